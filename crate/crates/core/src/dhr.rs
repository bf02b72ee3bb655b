//! Document-level heading hierarchy reconstruction.
//!
//! Candidate headings arrive from upstream layout analysis with text, a
//! cropped image and a spatial anchor, but no level. The pipeline here lays
//! the crops out on synthetic pseudo-TOC pages with numbered colored
//! annotations, assembles the text-image prompt for the generation service,
//! and decodes the returned line-delimited level records back onto the
//! headings.
//!
//! Layout and prompt assembly are pure; rendering draws into a per-call
//! image buffer, so documents can be processed concurrently.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use image::{ImageEncoder as _, Rgb, RgbImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grounding::BBox;

#[derive(Debug, Error, PartialEq)]
pub enum DhrError {
    #[error("crop for heading {index} ({width}x{height}) exceeds page dimensions after scaling")]
    CropTooLarge {
        index: usize,
        width: u32,
        height: u32,
    },
    #[error("heading {index} has no crop")]
    MissingCropRef { index: usize },
    #[error("crop image {0:?} is not in the store")]
    MissingCrop(String),
    #[error("prompt labels do not match headings: {0}")]
    LabelMismatch(String),
    #[error("malformed response at line {line}: {reason}")]
    MalformedResponse { line: usize, reason: String },
    #[error("response is missing labels {0:?}")]
    MissingLabels(Vec<u32>),
    #[error("label {label} assigned conflicting levels {first} and {second}")]
    DuplicateLabel { label: u32, first: u32, second: u32 },
    #[error("assignment is missing labels {0:?} required by the headings")]
    IncompleteAssignment(Vec<u32>),
}

/// Reference to a heading's cropped image and its pixel dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRef {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
}

/// Where the heading sits in the source document: bounding box in page
/// pixels plus the page's own size, so horizontal offsets can be rescaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialRef {
    pub page_index: usize,
    pub bbox: BBox,
    pub page_width: u32,
    pub page_height: u32,
}

impl Default for SpatialRef {
    fn default() -> Self {
        SpatialRef {
            page_index: 0,
            bbox: BBox::new(0.0, 0.0, 0.0, 0.0),
            page_width: 0,
            page_height: 0,
        }
    }
}

/// A candidate heading: text content, visual crop, spatial anchor, and the
/// hierarchy level once recovered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heading {
    pub text: String,
    pub crop: Option<CropRef>,
    #[serde(default)]
    pub spatial: SpatialRef,
    pub level: Option<u32>,
    pub numeric_label: Option<u32>,
}

impl Heading {
    pub fn new(text: impl Into<String>) -> Self {
        Heading {
            text: text.into(),
            crop: None,
            spatial: SpatialRef::default(),
            level: None,
            numeric_label: None,
        }
    }

    pub fn with_level(mut self, level: u32) -> Self {
        self.level = Some(level);
        self
    }

    pub fn with_crop(mut self, crop: CropRef) -> Self {
        self.crop = Some(crop);
        self
    }

    pub fn with_spatial(mut self, spatial: SpatialRef) -> Self {
        self.spatial = spatial;
        self
    }
}

/// Pseudo-TOC page geometry. Defaults are A4 at 150 dpi with a 40 px
/// top/bottom margin and a 24 px gap between crops.
#[derive(Debug, Clone, Copy)]
pub struct PseudoTocLayout {
    pub page_width: u32,
    pub page_height: u32,
    pub margin: u32,
    pub gap: u32,
}

impl Default for PseudoTocLayout {
    fn default() -> Self {
        PseudoTocLayout {
            page_width: 1240,
            page_height: 1754,
            margin: 40,
            gap: 24,
        }
    }
}

/// Fixed high-contrast annotation palette, cycled across placements. Color
/// carries no semantics.
pub const ANNOTATION_PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 130, 60],
    [0, 90, 200],
    [245, 130, 48],
    [145, 30, 180],
    [0, 150, 150],
    [200, 50, 130],
    [120, 110, 0],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PasteRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    /// Index of the heading in the input list.
    pub heading_index: usize,
    pub numeric_label: u32,
    pub rect: PasteRect,
    pub color: [u8; 3],
}

/// One rendered-page worth of placements.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoTocPage {
    pub width: u32,
    pub height: u32,
    pub placements: Vec<Placement>,
}

/// Lay heading crops out top-to-bottom in reading order. The vertical cursor
/// advances by crop height plus the gap; a crop that would cross the bottom
/// margin starts a new page. Each placement keeps the heading's horizontal
/// offset (rescaled to the pseudo-TOC page width), gets a cycled palette
/// color and a numeric label increasing across all pages.
///
/// Crops wider than the page are scaled down proportionally, never up.
pub fn layout_pseudo_toc(
    headings: &[Heading],
    cfg: &PseudoTocLayout,
) -> Result<Vec<PseudoTocPage>, DhrError> {
    let usable_bottom = cfg.page_height.saturating_sub(cfg.margin);
    let mut pages = Vec::new();
    let mut placements: Vec<Placement> = Vec::new();
    let mut y = cfg.margin;

    for (index, heading) in headings.iter().enumerate() {
        let crop = heading
            .crop
            .as_ref()
            .ok_or(DhrError::MissingCropRef { index })?;
        let (w, h) = if crop.width > cfg.page_width && crop.width > 0 {
            let h = (crop.height as u64 * cfg.page_width as u64 / crop.width as u64) as u32;
            (cfg.page_width, h)
        } else {
            (crop.width, crop.height)
        };
        if h > usable_bottom.saturating_sub(cfg.margin) {
            return Err(DhrError::CropTooLarge {
                index,
                width: crop.width,
                height: crop.height,
            });
        }
        if y + h > usable_bottom && !placements.is_empty() {
            pages.push(PseudoTocPage {
                width: cfg.page_width,
                height: cfg.page_height,
                placements: std::mem::take(&mut placements),
            });
            y = cfg.margin;
        }
        let x = if heading.spatial.page_width > 0 {
            let ratio = heading.spatial.bbox.x1 / heading.spatial.page_width as f64;
            ((ratio * cfg.page_width as f64).round() as u32).min(cfg.page_width.saturating_sub(w))
        } else {
            0
        };
        placements.push(Placement {
            heading_index: index,
            numeric_label: (index + 1) as u32,
            rect: PasteRect { x, y, w, h },
            color: ANNOTATION_PALETTE[index % ANNOTATION_PALETTE.len()],
        });
        y += h + cfg.gap;
    }
    if !placements.is_empty() {
        pages.push(PseudoTocPage {
            width: cfg.page_width,
            height: cfg.page_height,
            placements,
        });
    }
    Ok(pages)
}

/// In-memory store of crop rasters keyed by image id.
#[derive(Debug, Default)]
pub struct CropStore {
    images: HashMap<String, RgbImage>,
}

impl CropStore {
    pub fn new() -> Self {
        CropStore::default()
    }

    pub fn insert(&mut self, image_id: impl Into<String>, image: RgbImage) {
        self.images.insert(image_id.into(), image);
    }

    pub fn get(&self, image_id: &str) -> Option<&RgbImage> {
        self.images.get(image_id)
    }
}

// 3x5 digit glyphs, row-major bits, scaled up at draw time.
const DIGITS: [[u8; 5]; 10] = [
    [0b111, 0b101, 0b101, 0b101, 0b111],
    [0b010, 0b110, 0b010, 0b010, 0b111],
    [0b111, 0b001, 0b111, 0b100, 0b111],
    [0b111, 0b001, 0b111, 0b001, 0b111],
    [0b101, 0b101, 0b111, 0b001, 0b001],
    [0b111, 0b100, 0b111, 0b001, 0b111],
    [0b111, 0b100, 0b111, 0b101, 0b111],
    [0b111, 0b001, 0b001, 0b010, 0b010],
    [0b111, 0b101, 0b111, 0b101, 0b111],
    [0b111, 0b101, 0b111, 0b001, 0b111],
];
const DIGIT_SCALE: u32 = 3;
const OUTLINE_PX: u32 = 2;

fn put_pixel_checked(img: &mut RgbImage, x: u32, y: u32, color: Rgb<u8>) {
    if x < img.width() && y < img.height() {
        img.put_pixel(x, y, color);
    }
}

fn draw_outline(img: &mut RgbImage, rect: &PasteRect, color: Rgb<u8>) {
    for t in 0..OUTLINE_PX {
        for dx in 0..rect.w {
            put_pixel_checked(img, rect.x + dx, rect.y + t, color);
            put_pixel_checked(img, rect.x + dx, (rect.y + rect.h).saturating_sub(1 + t), color);
        }
        for dy in 0..rect.h {
            put_pixel_checked(img, rect.x + t, rect.y + dy, color);
            put_pixel_checked(img, (rect.x + rect.w).saturating_sub(1 + t), rect.y + dy, color);
        }
    }
}

fn draw_label(img: &mut RgbImage, label: u32, rect: &PasteRect, color: Rgb<u8>) {
    let digits: Vec<u32> = label
        .to_string()
        .bytes()
        .map(|b| (b - b'0') as u32)
        .collect();
    let glyph_w = 4 * DIGIT_SCALE; // 3-wide glyph plus one column of spacing
    let total_w = glyph_w * digits.len() as u32;
    let x0 = rect.x.saturating_sub(total_w + 4);
    let y0 = rect.y;
    for (i, &d) in digits.iter().enumerate() {
        let glyph = DIGITS[d as usize];
        for (row, bits) in glyph.iter().enumerate() {
            for col in 0..3u32 {
                if bits & (0b100 >> col) != 0 {
                    for sy in 0..DIGIT_SCALE {
                        for sx in 0..DIGIT_SCALE {
                            put_pixel_checked(
                                img,
                                x0 + i as u32 * glyph_w + col * DIGIT_SCALE + sx,
                                y0 + row as u32 * DIGIT_SCALE + sy,
                                color,
                            );
                        }
                    }
                }
            }
        }
    }
}

/// Render one pseudo-TOC page to PNG bytes: white background, crops pasted
/// at their placement rects, a 2 px colored outline per crop and the numeric
/// label drawn at the rect's left edge. Deterministic: identical inputs
/// yield byte-identical PNGs.
pub fn render_pseudo_toc(
    page: &PseudoTocPage,
    crops: &CropStore,
    headings: &[Heading],
) -> Result<Vec<u8>, DhrError> {
    let mut img = RgbImage::from_pixel(page.width, page.height, Rgb([255, 255, 255]));
    for placement in &page.placements {
        let heading = &headings[placement.heading_index];
        let crop_ref = heading.crop.as_ref().ok_or(DhrError::MissingCropRef {
            index: placement.heading_index,
        })?;
        let crop = crops
            .get(&crop_ref.image_id)
            .ok_or_else(|| DhrError::MissingCrop(crop_ref.image_id.clone()))?;
        let rect = placement.rect;
        if crop.width() == rect.w && crop.height() == rect.h {
            for (dx, dy, px) in crop.enumerate_pixels() {
                put_pixel_checked(&mut img, rect.x + dx, rect.y + dy, *px);
            }
        } else if rect.w > 0 && rect.h > 0 {
            let resized = image::imageops::resize(
                crop,
                rect.w,
                rect.h,
                image::imageops::FilterType::Triangle,
            );
            for (dx, dy, px) in resized.enumerate_pixels() {
                put_pixel_checked(&mut img, rect.x + dx, rect.y + dy, *px);
            }
        }
        let color = Rgb(placement.color);
        draw_outline(&mut img, &rect, color);
        draw_label(&mut img, placement.numeric_label, &rect, color);
    }
    let mut bytes = Vec::new();
    image::codecs::png::PngEncoder::new(&mut bytes)
        .write_image(
            img.as_raw(),
            img.width(),
            img.height(),
            image::ExtendedColorType::Rgb8,
        )
        .expect("in-memory png encode");
    Ok(bytes)
}

/// Default task instruction; callers may substitute their own template.
pub const DEFAULT_INSTRUCTION: &str = "Parse the TOC pages into the following JSONL format: \
one line per numbered heading, {\"label\": <heading number>, \"level\": <hierarchy level, 1 for top-level>}. \
Use the colored boxes and their numeric labels in the images to identify each heading.";

/// Text-image prompt: instruction, one `[label] text` line per heading in
/// reading order, and the pseudo-TOC page references in order.
#[derive(Debug, Clone, PartialEq)]
pub struct DhrPrompt {
    pub instruction: String,
    pub heading_lines: Vec<(u32, String)>,
    /// Indices into the laid-out page list, in order.
    pub image_pages: Vec<usize>,
}

impl DhrPrompt {
    /// Heading lines formatted for the request body.
    pub fn text_lines(&self) -> Vec<String> {
        self.heading_lines
            .iter()
            .map(|(label, text)| format!("[{label}] {text}"))
            .collect()
    }
}

/// Assemble the prompt for a set of headings and their laid-out pages.
/// Newlines inside heading text are replaced with spaces so every heading
/// occupies exactly one line.
pub fn build_dhr_prompt(
    headings: &[Heading],
    pages: &[PseudoTocPage],
    instruction: &str,
) -> Result<DhrPrompt, DhrError> {
    let placed: Vec<u32> = pages
        .iter()
        .flat_map(|p| p.placements.iter().map(|pl| pl.numeric_label))
        .collect();
    let expected: Vec<u32> = (1..=headings.len() as u32).collect();
    if placed != expected {
        return Err(DhrError::LabelMismatch(format!(
            "pages place labels {placed:?}, headings require {expected:?}"
        )));
    }
    let heading_lines = headings
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let text = h.text.replace(['\n', '\r'], " ");
            ((i + 1) as u32, text)
        })
        .collect();
    Ok(DhrPrompt {
        instruction: instruction.to_string(),
        heading_lines,
        image_pages: (0..pages.len()).collect(),
    })
}

/// Assemble a text-only prompt: same instruction and heading lines, no
/// pseudo-TOC pages. This is the baseline mode that withholds the visual
/// and spatial cues.
pub fn build_text_only_prompt(headings: &[Heading], instruction: &str) -> DhrPrompt {
    DhrPrompt {
        instruction: instruction.to_string(),
        heading_lines: headings
            .iter()
            .enumerate()
            .map(|(i, h)| ((i + 1) as u32, h.text.replace(['\n', '\r'], " ")))
            .collect(),
        image_pages: Vec::new(),
    }
}

/// Level assignment keyed by numeric label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LevelAssignment {
    levels: BTreeMap<u32, u32>,
}

impl LevelAssignment {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        LevelAssignment {
            levels: pairs.into_iter().collect(),
        }
    }

    pub fn get(&self, label: u32) -> Option<u32> {
        self.levels.get(&label).copied()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = u32> + '_ {
        self.levels.keys().copied()
    }

    /// Serialize as the line-delimited record format the service returns.
    pub fn to_jsonl(&self) -> String {
        self.levels
            .iter()
            .map(|(label, level)| format!("{{\"label\": {label}, \"level\": {level}}}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Deserialize)]
struct LevelRecord {
    label: i64,
    level: i64,
}

/// Outcome of decoding a service response: the assignment plus warnings for
/// skipped non-record lines and tolerated duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedLevels {
    pub assignment: LevelAssignment,
    pub warnings: Vec<String>,
}

/// Decode line-delimited `{"label": int, "level": int}` records.
///
/// Lenient where generation noise is harmless: blank lines and lines that
/// are not JSON objects are skipped with a warning, duplicate records that
/// agree are tolerated. Strict where it matters: records with invalid
/// fields, unknown labels or conflicting duplicates are errors, and every
/// expected label must appear.
pub fn decode_level_assignment(
    response: &str,
    expected_labels: &BTreeSet<u32>,
) -> Result<DecodedLevels, DhrError> {
    let mut levels: BTreeMap<u32, u32> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (idx, raw_line) in response.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let value: serde_json::Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(_) => {
                warnings.push(format!("line {line_no} skipped: not a JSON record"));
                continue;
            }
        };
        if !value.is_object() {
            warnings.push(format!("line {line_no} skipped: not a JSON object"));
            continue;
        }
        let record: LevelRecord =
            serde_json::from_value(value).map_err(|e| DhrError::MalformedResponse {
                line: line_no,
                reason: e.to_string(),
            })?;
        let label = u32::try_from(record.label).map_err(|_| DhrError::MalformedResponse {
            line: line_no,
            reason: format!("label {} out of range", record.label),
        })?;
        let level = u32::try_from(record.level)
            .ok()
            .filter(|&l| l >= 1)
            .ok_or(DhrError::MalformedResponse {
                line: line_no,
                reason: format!("level {} must be an integer >= 1", record.level),
            })?;
        if !expected_labels.contains(&label) {
            return Err(DhrError::MalformedResponse {
                line: line_no,
                reason: format!("unknown label {label}"),
            });
        }
        match levels.get(&label) {
            Some(&existing) if existing != level => {
                return Err(DhrError::DuplicateLabel {
                    label,
                    first: existing,
                    second: level,
                });
            }
            Some(_) => warnings.push(format!("line {line_no}: duplicate record for label {label}")),
            None => {
                levels.insert(label, level);
            }
        }
    }
    let missing: Vec<u32> = expected_labels
        .iter()
        .copied()
        .filter(|l| !levels.contains_key(l))
        .collect();
    if !missing.is_empty() {
        return Err(DhrError::MissingLabels(missing));
    }
    Ok(DecodedLevels {
        assignment: LevelAssignment { levels },
        warnings,
    })
}

/// Headings with levels populated, plus warnings for assignment labels that
/// matched no heading.
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedLevels {
    pub headings: Vec<Heading>,
    pub warnings: Vec<String>,
}

/// Populate each heading's level from the assignment. A heading's label is
/// its `numeric_label` when set, otherwise its 1-based position. Labels in
/// the assignment that match no heading are ignored with a warning.
pub fn apply_levels(
    headings: &[Heading],
    assignment: &LevelAssignment,
) -> Result<AppliedLevels, DhrError> {
    let mut out = Vec::with_capacity(headings.len());
    let mut used: BTreeSet<u32> = BTreeSet::new();
    let mut missing = Vec::new();
    for (i, heading) in headings.iter().enumerate() {
        let label = heading.numeric_label.unwrap_or((i + 1) as u32);
        match assignment.get(label) {
            Some(level) => {
                used.insert(label);
                let mut h = heading.clone();
                h.level = Some(level);
                h.numeric_label = Some(label);
                out.push(h);
            }
            None => missing.push(label),
        }
    }
    if !missing.is_empty() {
        return Err(DhrError::IncompleteAssignment(missing));
    }
    let warnings: Vec<String> = assignment
        .labels()
        .filter(|l| !used.contains(l))
        .map(|l| format!("assignment label {l} matches no heading; ignored"))
        .collect();
    Ok(AppliedLevels {
        headings: out,
        warnings,
    })
}
