//! Typed page elements and the JSON Lines document interchange format.
//!
//! A document file is one JSON record per line: a leading `meta` section
//! carrying the schema version, page declarations and document id, followed
//! by `element` sections in reading order and optional `gold` /
//! `cell_boxes` sections. Files with a newer schema version are rejected so
//! forward-incompatible inputs fail loudly instead of being half-read.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dhr::{CropRef, Heading};
use crate::grounding::BBox;
use crate::table::{parse_table, serialize_table, HtmlTable};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("first line must be a meta section with schema_version")]
    MissingMeta,
    #[error("schema_version {0} is not supported (this build reads {SCHEMA_VERSION})")]
    UnsupportedSchema(u32),
    #[error("line {line}: element {id:?}: {message}")]
    Element {
        line: usize,
        id: String,
        message: String,
    },
    #[error("duplicate order_rank {0}")]
    DuplicateRank(u32),
}

/// Page block categories from layout analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Text,
    #[serde(alias = "title")]
    Heading,
    Table,
    Figure,
    Header,
    Footer,
    PageNumber,
    Footnote,
    Caption,
    Other,
}

impl Category {
    /// Non-content artifacts that never count as intervening elements and
    /// never block a cross-page merge.
    pub fn is_non_content(self) -> bool {
        matches!(self, Category::Header | Category::Footer | Category::PageNumber)
    }
}

/// Element payload, typed by category.
#[derive(Debug, Clone, PartialEq)]
pub enum Content {
    Text(String),
    Table(HtmlTable),
    None,
}

/// One typed page block with its reading-order rank.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentElement {
    pub id: String,
    pub page_index: usize,
    pub category: Category,
    pub bbox: BBox,
    /// Globally monotone reading-order rank; unique per document.
    pub order_rank: u32,
    pub content: Content,
    /// Crop reference for heading elements feeding the pseudo-TOC pipeline.
    pub crop: Option<CropRef>,
    /// Recovered hierarchy level for heading elements.
    pub level: Option<u32>,
}

impl DocumentElement {
    pub fn text_block(
        id: impl Into<String>,
        page_index: usize,
        order_rank: u32,
        text: impl Into<String>,
    ) -> Self {
        DocumentElement {
            id: id.into(),
            page_index,
            category: Category::Text,
            bbox: BBox::new(0.0, 0.0, 0.0, 0.0),
            order_rank,
            content: Content::Text(text.into()),
            crop: None,
            level: None,
        }
    }

    pub fn table_block(
        id: impl Into<String>,
        page_index: usize,
        order_rank: u32,
        table: HtmlTable,
    ) -> Self {
        DocumentElement {
            id: id.into(),
            page_index,
            category: Category::Table,
            bbox: BBox::new(0.0, 0.0, 0.0, 0.0),
            order_rank,
            content: Content::Table(table),
            crop: None,
            level: None,
        }
    }

    pub fn marker_block(
        id: impl Into<String>,
        page_index: usize,
        order_rank: u32,
        category: Category,
        text: impl Into<String>,
    ) -> Self {
        DocumentElement {
            id: id.into(),
            page_index,
            category,
            bbox: BBox::new(0.0, 0.0, 0.0, 0.0),
            order_rank,
            content: Content::Text(text.into()),
            crop: None,
            level: None,
        }
    }

    pub fn text(&self) -> Option<&str> {
        match &self.content {
            Content::Text(t) => Some(t),
            _ => None,
        }
    }

    pub fn table(&self) -> Option<&HtmlTable> {
        match &self.content {
            Content::Table(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageDecl {
    pub page_index: usize,
    pub width: u32,
    pub height: u32,
}

/// Grounding record for one table cell, coordinates normalized to [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellBoxRecord {
    pub table_id: String,
    pub cell_index: usize,
    pub row: usize,
    pub col: usize,
    pub x1: f64,
    pub y1: f64,
    pub w: f64,
    pub h: f64,
}

impl CellBoxRecord {
    pub fn bbox(&self) -> BBox {
        BBox::new(self.x1, self.y1, self.w, self.h)
    }
}

/// Assemble grounding records for one table: the k-th predicted box pairs
/// with the k-th origin cell of the expanded grid (cells in document order,
/// the same order anchor detection yields).
pub fn cell_box_records(
    table_id: &str,
    table: &HtmlTable,
    boxes: &[BBox],
) -> Result<Vec<CellBoxRecord>, crate::grounding::GroundingError> {
    let grid = crate::table::expand_grid(table);
    if grid.origins.len() != boxes.len() {
        return Err(crate::grounding::GroundingError::LengthMismatch(
            grid.origins.len(),
            boxes.len(),
        ));
    }
    Ok(grid
        .origins
        .iter()
        .zip(boxes)
        .enumerate()
        .map(|(cell_index, (origin, b))| CellBoxRecord {
            table_id: table_id.to_string(),
            cell_index,
            row: origin.row,
            col: origin.col,
            x1: b.x1,
            y1: b.y1,
            w: b.w,
            h: b.h,
        })
        .collect())
}

/// Ground-truth bundle carried alongside predicted elements.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoldAnnotations {
    pub tables: Vec<HtmlTable>,
    pub headings: Vec<Heading>,
    pub reading_order: Vec<String>,
    pub cell_boxes: Vec<CellBoxRecord>,
}

impl GoldAnnotations {
    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
            && self.headings.is_empty()
            && self.reading_order.is_empty()
            && self.cell_boxes.is_empty()
    }
}

/// A whole parsed document: declared pages, elements in reading order, and
/// optional gold annotations plus predicted cell boxes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocumentFile {
    pub doc_id: String,
    pub pages: Vec<PageDecl>,
    pub elements: Vec<DocumentElement>,
    pub gold: Option<GoldAnnotations>,
    pub cell_boxes: Vec<CellBoxRecord>,
}

// Wire records --------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ElementLine {
    id: String,
    page_index: usize,
    category: Category,
    bbox: BBox,
    order_rank: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table_html: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    crop: Option<CropRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "section", rename_all = "snake_case")]
enum DocLine {
    Meta {
        schema_version: u32,
        doc_id: String,
        pages: Vec<PageDecl>,
    },
    Element(ElementLine),
    GoldTables {
        tables: Vec<String>,
    },
    GoldHeadings {
        headings: Vec<Heading>,
    },
    GoldReadingOrder {
        order: Vec<String>,
    },
    GoldCellBoxes {
        boxes: Vec<CellBoxRecord>,
    },
    CellBoxes {
        boxes: Vec<CellBoxRecord>,
    },
}

impl DocumentFile {
    /// Parse the JSON Lines interchange form. Elements are re-sorted by
    /// order_rank; duplicate ranks, undeclared pages, and content that does
    /// not match its category are rejected with the offending line number.
    pub fn from_jsonl(input: &str) -> Result<Self, DocError> {
        let mut lines = input
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (first_no, first) = lines.next().ok_or(DocError::MissingMeta)?;
        let meta: DocLine = serde_json::from_str(first).map_err(|e| DocError::Parse {
            line: first_no + 1,
            message: e.to_string(),
        })?;
        let (doc_id, pages) = match meta {
            DocLine::Meta {
                schema_version,
                doc_id,
                pages,
            } => {
                if schema_version > SCHEMA_VERSION {
                    return Err(DocError::UnsupportedSchema(schema_version));
                }
                (doc_id, pages)
            }
            _ => return Err(DocError::MissingMeta),
        };

        let mut doc = DocumentFile {
            doc_id,
            pages,
            ..DocumentFile::default()
        };
        let mut gold = GoldAnnotations::default();
        for (idx, raw) in lines {
            let line = idx + 1;
            let record: DocLine = serde_json::from_str(raw).map_err(|e| DocError::Parse {
                line,
                message: e.to_string(),
            })?;
            match record {
                DocLine::Meta { .. } => {
                    return Err(DocError::Parse {
                        line,
                        message: "meta section may only appear once, first".into(),
                    })
                }
                DocLine::Element(el) => doc.elements.push(element_from_line(el, line, &doc.pages)?),
                DocLine::GoldTables { tables } => {
                    for html in tables {
                        let table = parse_table(&html).map_err(|e| DocError::Parse {
                            line,
                            message: format!("gold table: {e}"),
                        })?;
                        gold.tables.push(table);
                    }
                }
                DocLine::GoldHeadings { headings } => gold.headings.extend(headings),
                DocLine::GoldReadingOrder { order } => gold.reading_order.extend(order),
                DocLine::GoldCellBoxes { boxes } => gold.cell_boxes.extend(boxes),
                DocLine::CellBoxes { boxes } => doc.cell_boxes.extend(boxes),
            }
        }
        if !gold.is_empty() {
            doc.gold = Some(gold);
        }
        doc.elements.sort_by_key(|e| e.order_rank);
        for pair in doc.elements.windows(2) {
            if pair[0].order_rank == pair[1].order_rank {
                return Err(DocError::DuplicateRank(pair[0].order_rank));
            }
        }
        Ok(doc)
    }

    /// Serialize to the JSON Lines interchange form. Deterministic: field
    /// and section order are fixed, so identical documents produce identical
    /// bytes.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: &DocLine| {
            out.push_str(&serde_json::to_string(line).expect("interchange records serialize"));
            out.push('\n');
        };
        push(
            &mut out,
            &DocLine::Meta {
                schema_version: SCHEMA_VERSION,
                doc_id: self.doc_id.clone(),
                pages: self.pages.clone(),
            },
        );
        for el in &self.elements {
            push(&mut out, &DocLine::Element(element_to_line(el)));
        }
        if !self.cell_boxes.is_empty() {
            push(
                &mut out,
                &DocLine::CellBoxes {
                    boxes: self.cell_boxes.clone(),
                },
            );
        }
        if let Some(gold) = &self.gold {
            if !gold.tables.is_empty() {
                push(
                    &mut out,
                    &DocLine::GoldTables {
                        tables: gold.tables.iter().map(serialize_table).collect(),
                    },
                );
            }
            if !gold.headings.is_empty() {
                push(
                    &mut out,
                    &DocLine::GoldHeadings {
                        headings: gold.headings.clone(),
                    },
                );
            }
            if !gold.reading_order.is_empty() {
                push(
                    &mut out,
                    &DocLine::GoldReadingOrder {
                        order: gold.reading_order.clone(),
                    },
                );
            }
            if !gold.cell_boxes.is_empty() {
                push(
                    &mut out,
                    &DocLine::GoldCellBoxes {
                        boxes: gold.cell_boxes.clone(),
                    },
                );
            }
        }
        out
    }

    /// Elements of one category, in reading order.
    pub fn elements_of(&self, category: Category) -> impl Iterator<Item = &DocumentElement> {
        self.elements.iter().filter(move |e| e.category == category)
    }
}

fn element_from_line(
    el: ElementLine,
    line: usize,
    pages: &[PageDecl],
) -> Result<DocumentElement, DocError> {
    if !pages.is_empty() && !pages.iter().any(|p| p.page_index == el.page_index) {
        return Err(DocError::Element {
            line,
            id: el.id,
            message: format!("references undeclared page {}", el.page_index),
        });
    }
    let content = match (el.category, &el.table_html, &el.text) {
        (Category::Table, Some(html), _) => {
            Content::Table(parse_table(html).map_err(|e| DocError::Element {
                line,
                id: el.id.clone(),
                message: e.to_string(),
            })?)
        }
        (Category::Table, None, _) => {
            return Err(DocError::Element {
                line,
                id: el.id,
                message: "table element requires table_html".into(),
            })
        }
        (_, Some(_), _) => {
            return Err(DocError::Element {
                line,
                id: el.id,
                message: "table_html is only valid on table elements".into(),
            })
        }
        (_, None, Some(text)) => Content::Text(text.clone()),
        (_, None, None) => Content::None,
    };
    Ok(DocumentElement {
        id: el.id,
        page_index: el.page_index,
        category: el.category,
        bbox: el.bbox,
        order_rank: el.order_rank,
        content,
        crop: el.crop,
        level: el.level,
    })
}

fn element_to_line(el: &DocumentElement) -> ElementLine {
    let (text, table_html) = match &el.content {
        Content::Text(t) => (Some(t.clone()), None),
        Content::Table(t) => (None, Some(serialize_table(t))),
        Content::None => (None, None),
    };
    ElementLine {
        id: el.id.clone(),
        page_index: el.page_index,
        category: el.category,
        bbox: el.bbox,
        order_rank: el.order_rank,
        text,
        table_html,
        crop: el.crop.clone(),
        level: el.level,
    }
}
