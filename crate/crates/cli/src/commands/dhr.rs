//! `finocr dhr` — document-level heading hierarchy reconstruction.
//!
//! Builds the pseudo-TOC pages for the input's heading elements, prompts the
//! generation service (or the in-process stub), decodes the returned levels
//! and writes them back onto the heading elements. Rendered pages are
//! written before the service call, so they survive a service failure.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::Args;
use finocr_core::dhr::{
    apply_levels, build_dhr_prompt, build_text_only_prompt, decode_level_assignment,
    layout_pseudo_toc, render_pseudo_toc, CropStore, DhrPrompt, Heading, LevelAssignment,
    PseudoTocLayout, PseudoTocPage, SpatialRef, DEFAULT_INSTRUCTION,
};
use finocr_core::doc::{Category, DocumentFile};
use finocr_core::vlm::{
    DecodeParams, GenerationRequest, HttpVlmClient, ImageAttachment, StubVlm, VlmService,
};
use serde::Serialize;

use crate::config::load_vlm_config;
use crate::util::{atomic_write, read_document, read_to_string, Failure};

#[derive(Args)]
pub struct DhrArgs {
    /// Input document with heading elements (JSON Lines).
    pub input: PathBuf,
    /// Output document with levels populated.
    pub output: PathBuf,
    /// Generation-service endpoint (overrides config file and environment).
    #[arg(long, conflicts_with = "stub")]
    pub endpoint: Option<String>,
    /// Answer from the in-process stub replaying the input's gold levels.
    #[arg(long)]
    pub stub: bool,
    /// Skip pseudo-TOC rendering and send the text-only prompt.
    #[arg(long)]
    pub no_render: bool,
    /// Directory of heading crop images, one `<image_id>.png` per crop.
    #[arg(long)]
    pub crops: Option<PathBuf>,
    /// Directory for rendered pseudo-TOC pages (default: next to output).
    #[arg(long)]
    pub images_dir: Option<PathBuf>,
    /// File containing a custom instruction template.
    #[arg(long)]
    pub instruction: Option<PathBuf>,
}

#[derive(Serialize)]
struct Audit<'a> {
    images_sent: usize,
    latency_ms: u64,
    prompt_tokens: u64,
    completion_tokens: u64,
    response_text: &'a str,
}

fn headings_from_doc(doc: &DocumentFile) -> Vec<Heading> {
    doc.elements_of(Category::Heading)
        .map(|el| {
            let page = doc.pages.iter().find(|p| p.page_index == el.page_index);
            Heading {
                text: el.text().unwrap_or_default().to_string(),
                crop: el.crop.clone(),
                spatial: SpatialRef {
                    page_index: el.page_index,
                    bbox: el.bbox,
                    page_width: page.map_or(0, |p| p.width),
                    page_height: page.map_or(0, |p| p.height),
                },
                level: el.level,
                numeric_label: None,
            }
        })
        .collect()
}

fn load_crops(dir: &Path, headings: &[Heading]) -> Result<CropStore, Failure> {
    let mut store = CropStore::new();
    for heading in headings {
        let Some(crop) = &heading.crop else { continue };
        let path = dir.join(format!("{}.png", crop.image_id));
        let img = image::open(&path)
            .map_err(|e| Failure::Input(format!("cannot load crop {}: {e}", path.display())))?
            .to_rgb8();
        store.insert(crop.image_id.clone(), img);
    }
    Ok(store)
}

fn render_pages(
    doc_id: &str,
    pages: &[PseudoTocPage],
    headings: &[Heading],
    crops: &CropStore,
    dir: &Path,
) -> Result<Vec<ImageAttachment>, Failure> {
    let mut attachments = Vec::with_capacity(pages.len());
    for (i, page) in pages.iter().enumerate() {
        let bytes = render_pseudo_toc(page, crops, headings)
            .map_err(|e| Failure::Input(e.to_string()))?;
        let path = dir.join(format!("{doc_id}_pseudo_toc_{i:03}.png"));
        atomic_write(&path, &bytes)?;
        attachments.push(ImageAttachment::png(bytes));
    }
    Ok(attachments)
}

fn gold_assignment(doc: &DocumentFile, n: usize) -> Result<LevelAssignment, Failure> {
    let gold = doc
        .gold
        .as_ref()
        .filter(|g| !g.headings.is_empty())
        .ok_or_else(|| {
            Failure::Input("--stub requires gold headings with levels in the input".into())
        })?;
    if gold.headings.len() != n {
        return Err(Failure::Input(format!(
            "--stub: {} gold headings for {n} candidate headings",
            gold.headings.len()
        )));
    }
    let pairs: Result<Vec<(u32, u32)>, Failure> = gold
        .headings
        .iter()
        .enumerate()
        .map(|(i, h)| {
            h.level
                .map(|l| ((i + 1) as u32, l))
                .ok_or_else(|| Failure::Input(format!("gold heading {} has no level", i + 1)))
        })
        .collect();
    Ok(LevelAssignment::from_pairs(pairs?))
}

pub fn run(args: &DhrArgs, config_path: Option<&Path>) -> Result<(), Failure> {
    let doc = read_document(&args.input)?;
    let headings = headings_from_doc(&doc);
    if headings.is_empty() {
        return Err(Failure::Input(format!(
            "{}: no heading elements to reconstruct",
            args.input.display()
        )));
    }

    let instruction = match &args.instruction {
        Some(path) => read_to_string(path)?,
        None => DEFAULT_INSTRUCTION.to_string(),
    };

    let (prompt, images): (DhrPrompt, Vec<ImageAttachment>) = if args.no_render {
        (build_text_only_prompt(&headings, &instruction), Vec::new())
    } else {
        let pages = layout_pseudo_toc(&headings, &PseudoTocLayout::default())
            .map_err(|e| Failure::Input(e.to_string()))?;
        let prompt = build_dhr_prompt(&headings, &pages, &instruction)
            .map_err(|e| Failure::Input(e.to_string()))?;
        let crops_dir = args.crops.as_deref().ok_or_else(|| {
            Failure::Input("--crops <dir> is required unless --no-render is set".into())
        })?;
        let store = load_crops(crops_dir, &headings)?;
        let images_dir = args
            .images_dir
            .clone()
            .or_else(|| args.output.parent().map(Path::to_path_buf))
            .unwrap_or_else(|| PathBuf::from("."));
        let images = render_pages(&doc.doc_id, &pages, &headings, &store, &images_dir)?;
        (prompt, images)
    };

    let request = GenerationRequest {
        instruction: prompt.instruction.clone(),
        text_lines: prompt.text_lines(),
        images,
        decode_params: DecodeParams::default(),
    };

    let service: Box<dyn VlmService> = if args.stub {
        Box::new(StubVlm::from_gold(&gold_assignment(&doc, headings.len())?))
    } else {
        let mut cfg = load_vlm_config(config_path)?;
        if let Some(endpoint) = &args.endpoint {
            cfg.endpoint = endpoint.clone();
        }
        if cfg.endpoint.is_empty() {
            return Err(Failure::Input(
                "no endpoint configured; pass --endpoint, set [vlm].endpoint in --config, or FINOCR_VLM_URL"
                    .into(),
            ));
        }
        Box::new(HttpVlmClient::new(cfg).map_err(|e| Failure::Service(e.to_string()))?)
    };

    let response = service
        .generate(&request)
        .map_err(|e| Failure::Service(e.to_string()))?;

    let audit = Audit {
        images_sent: request.images.len(),
        latency_ms: response.latency_ms,
        prompt_tokens: response.usage.prompt_tokens,
        completion_tokens: response.usage.completion_tokens,
        response_text: &response.text,
    };
    let mut audit_path = args.output.as_os_str().to_owned();
    audit_path.push(".audit.json");
    atomic_write(
        Path::new(&audit_path),
        serde_json::to_string_pretty(&audit)
            .map_err(|e| Failure::Internal(e.to_string()))?
            .as_bytes(),
    )?;

    let expected: BTreeSet<u32> = (1..=headings.len() as u32).collect();
    let decoded = decode_level_assignment(&response.text, &expected)
        .map_err(|e| Failure::Service(format!("undecodable service response: {e}")))?;
    for warning in &decoded.warnings {
        eprintln!("warning: {warning}");
    }
    let applied = apply_levels(&headings, &decoded.assignment)
        .map_err(|e| Failure::Service(e.to_string()))?;
    for warning in &applied.warnings {
        eprintln!("warning: {warning}");
    }

    let mut out = doc.clone();
    let mut assigned = applied.headings.iter();
    for el in out.elements.iter_mut() {
        if el.category == Category::Heading {
            if let Some(h) = assigned.next() {
                el.level = h.level;
            }
        }
    }
    atomic_write(&args.output, out.to_jsonl().as_bytes())?;
    println!(
        "assigned levels to {} heading(s) across {} pseudo-TOC page(s)",
        applied.headings.len(),
        prompt.image_pages.len()
    );
    Ok(())
}
