//! Restricted HTML table dialect: parsing, span expansion, normalization,
//! canonical serialization, and grid signatures.
//!
//! The dialect allows the tags `table`, `thead`, `tbody`, `tr`, `td`, `th`
//! and the attributes `rowspan`/`colspan` only. Canonical serialization is
//! the interchange form used by every other module; `parse` of `serialize`
//! reproduces the table structurally.
//!
//! All operations are pure functions over immutable inputs.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("malformed table html at byte {offset}: {reason}")]
    MalformedHtml { offset: usize, reason: String },
    #[error("invalid {attr} {value:?} at byte {offset}: spans must be integers >= 1")]
    InvalidSpan {
        attr: &'static str,
        value: String,
        offset: usize,
    },
}

/// One table cell. `text` is the concatenated character data between the
/// cell's tags with the five XML entities decoded; everything else is
/// preserved verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub text: String,
    pub rowspan: u32,
    pub colspan: u32,
    pub is_header: bool,
}

impl Cell {
    pub fn text(text: impl Into<String>) -> Self {
        Cell {
            text: text.into(),
            rowspan: 1,
            colspan: 1,
            is_header: false,
        }
    }

    pub fn with_span(mut self, rowspan: u32, colspan: u32) -> Self {
        self.rowspan = rowspan;
        self.colspan = colspan;
        self
    }

    pub fn header(mut self) -> Self {
        self.is_header = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub cells: Vec<Cell>,
}

impl Row {
    pub fn new(cells: Vec<Cell>) -> Self {
        Row { cells }
    }
}

/// Provenance of a table fragment within a document stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub page_index: usize,
    pub order_rank: u32,
}

/// Structured table in the restricted dialect. Header membership is the
/// union of tag-based (`th`) and section-based (`thead`) headerness, so the
/// same table compares equal regardless of which serialization style
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct HtmlTable {
    pub head_rows: Vec<Row>,
    pub body_rows: Vec<Row>,
    pub source_span: Option<SourceSpan>,
}

impl HtmlTable {
    pub fn new(head_rows: Vec<Row>, body_rows: Vec<Row>) -> Self {
        HtmlTable {
            head_rows,
            body_rows,
            source_span: None,
        }
    }

    /// Rows in logical order: head rows first, then body rows.
    pub fn logical_rows(&self) -> impl Iterator<Item = &Row> {
        self.head_rows.iter().chain(self.body_rows.iter())
    }

    pub fn row_count(&self) -> usize {
        self.head_rows.len() + self.body_rows.len()
    }

    /// Structural equality: rows, cells, spans and header flags, ignoring
    /// `source_span` provenance.
    pub fn structurally_equal(&self, other: &HtmlTable) -> bool {
        self.head_rows == other.head_rows && self.body_rows == other.body_rows
    }
}

/// What occupies one slot of the expanded grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotRef {
    /// Covered by the span of `origins[idx]`.
    Cell(usize),
    /// Not covered by any cell span.
    Padding,
}

/// An origin cell anchored at its top-left slot.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOrigin {
    pub row: usize,
    pub col: usize,
    pub cell: Cell,
}

/// Logical cell grid after rowspan/colspan expansion. Slots are row-major;
/// every slot is covered by exactly one origin's span or is padding.
#[derive(Debug, Clone, PartialEq)]
pub struct TableGrid {
    pub n_rows: usize,
    pub n_cols: usize,
    pub slots: Vec<SlotRef>,
    pub origins: Vec<GridOrigin>,
    /// Non-fatal irregularities observed during expansion (clamped rowspans,
    /// span collisions).
    pub warnings: Vec<String>,
}

impl TableGrid {
    pub fn slot(&self, row: usize, col: usize) -> SlotRef {
        self.slots[row * self.n_cols + col]
    }

    /// Number of slots covered by cell spans in each row, excluding padding.
    pub fn row_widths(&self) -> Vec<usize> {
        (0..self.n_rows)
            .map(|r| {
                (0..self.n_cols)
                    .filter(|&c| matches!(self.slot(r, c), SlotRef::Cell(_)))
                    .count()
            })
            .collect()
    }
}

/// Content-blind structural fingerprint: the expanded width of each logical
/// row. Two tables with identical structure but different cell text have
/// equal signatures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSignature {
    pub row_widths: Vec<usize>,
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    Table,
    Thead,
    Tbody,
    Tr,
    Td,
    Th,
}

impl Tag {
    fn from_name(name: &str) -> Option<Tag> {
        match name {
            "table" => Some(Tag::Table),
            "thead" => Some(Tag::Thead),
            "tbody" => Some(Tag::Tbody),
            "tr" => Some(Tag::Tr),
            "td" => Some(Tag::Td),
            "th" => Some(Tag::Th),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Tag::Table => "table",
            Tag::Thead => "thead",
            Tag::Tbody => "tbody",
            Tag::Tr => "tr",
            Tag::Td => "td",
            Tag::Th => "th",
        }
    }
}

#[derive(Debug)]
enum Token {
    Open {
        tag: Tag,
        rowspan: u32,
        colspan: u32,
        self_closing: bool,
        offset: usize,
    },
    Close {
        tag: Tag,
        offset: usize,
    },
    Text {
        value: String,
        offset: usize,
    },
}

struct Lexer<'a> {
    input: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(input: &'a str) -> Self {
        Lexer {
            input,
            bytes: input.as_bytes(),
            pos: 0,
        }
    }

    fn malformed(&self, offset: usize, reason: impl Into<String>) -> TableError {
        TableError::MalformedHtml {
            offset,
            reason: reason.into(),
        }
    }

    fn next_token(&mut self) -> Result<Option<Token>, TableError> {
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        if self.bytes[self.pos] == b'<' {
            self.lex_tag(start).map(Some)
        } else {
            let end = self.input[self.pos..]
                .find('<')
                .map(|i| self.pos + i)
                .unwrap_or(self.bytes.len());
            let raw = &self.input[self.pos..end];
            self.pos = end;
            Ok(Some(Token::Text {
                value: decode_entities(raw),
                offset: start,
            }))
        }
    }

    fn lex_tag(&mut self, start: usize) -> Result<Token, TableError> {
        self.pos += 1; // consume '<'
        let closing = self.bytes.get(self.pos) == Some(&b'/');
        if closing {
            self.pos += 1;
        }
        let name_start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_alphanumeric())
        {
            self.pos += 1;
        }
        let name = &self.input[name_start..self.pos];
        let tag = Tag::from_name(&name.to_ascii_lowercase())
            .ok_or_else(|| self.malformed(start, format!("unknown tag {name:?}")))?;

        if closing {
            self.skip_spaces();
            if self.bytes.get(self.pos) != Some(&b'>') {
                return Err(self.malformed(start, format!("unterminated closing tag </{name}")));
            }
            self.pos += 1;
            return Ok(Token::Close { tag, offset: start });
        }

        let mut rowspan = 1u32;
        let mut colspan = 1u32;
        let mut self_closing = false;
        loop {
            self.skip_spaces();
            match self.bytes.get(self.pos) {
                Some(b'>') => {
                    self.pos += 1;
                    break;
                }
                Some(b'/') => {
                    self.pos += 1;
                    if self.bytes.get(self.pos) != Some(&b'>') {
                        return Err(self.malformed(start, "expected '>' after '/'"));
                    }
                    self.pos += 1;
                    self_closing = true;
                    break;
                }
                Some(_) => {
                    let (attr, value, attr_offset) = self.lex_attribute(start)?;
                    let attr_name = attr.to_ascii_lowercase();
                    let span_attr = match attr_name.as_str() {
                        "rowspan" => &mut rowspan,
                        "colspan" => &mut colspan,
                        _ => {
                            return Err(self.malformed(
                                attr_offset,
                                format!("attribute {attr:?} is not allowed"),
                            ))
                        }
                    };
                    if !matches!(tag, Tag::Td | Tag::Th) {
                        return Err(self.malformed(
                            attr_offset,
                            format!("{attr_name} is not allowed on <{}>", tag.name()),
                        ));
                    }
                    let static_attr: &'static str =
                        if attr_name == "rowspan" { "rowspan" } else { "colspan" };
                    let parsed = value.parse::<u32>().ok().filter(|&v| v >= 1).ok_or(
                        TableError::InvalidSpan {
                            attr: static_attr,
                            value: value.clone(),
                            offset: attr_offset,
                        },
                    )?;
                    *span_attr = parsed;
                }
                None => return Err(self.malformed(start, "unterminated tag")),
            }
        }
        Ok(Token::Open {
            tag,
            rowspan,
            colspan,
            self_closing,
            offset: start,
        })
    }

    fn lex_attribute(&mut self, tag_start: usize) -> Result<(String, String, usize), TableError> {
        let attr_start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'-')
        {
            self.pos += 1;
        }
        if self.pos == attr_start {
            return Err(self.malformed(tag_start, "expected attribute name"));
        }
        let name = self.input[attr_start..self.pos].to_string();
        self.skip_spaces();
        if self.bytes.get(self.pos) != Some(&b'=') {
            return Err(self.malformed(attr_start, format!("attribute {name:?} requires a value")));
        }
        self.pos += 1;
        self.skip_spaces();
        let value = match self.bytes.get(self.pos) {
            Some(&q @ (b'"' | b'\'')) => {
                self.pos += 1;
                let value_start = self.pos;
                while self.bytes.get(self.pos).is_some_and(|&b| b != q) {
                    self.pos += 1;
                }
                if self.pos >= self.bytes.len() {
                    return Err(self.malformed(attr_start, "unterminated attribute value"));
                }
                let value = self.input[value_start..self.pos].to_string();
                self.pos += 1;
                value
            }
            Some(_) => {
                let value_start = self.pos;
                while self
                    .bytes
                    .get(self.pos)
                    .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'>' && *b != b'/')
                {
                    self.pos += 1;
                }
                self.input[value_start..self.pos].to_string()
            }
            None => return Err(self.malformed(attr_start, "unterminated attribute")),
        };
        Ok((name, value, attr_start))
    }

    fn skip_spaces(&mut self) {
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
    }
}

/// Decode the five XML entities; any other text passes through verbatim.
fn decode_entities(raw: &str) -> String {
    if !raw.contains('&') {
        return raw.to_string();
    }
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        let decoded = [
            ("&amp;", '&'),
            ("&lt;", '<'),
            ("&gt;", '>'),
            ("&quot;", '"'),
            ("&apos;", '\''),
        ]
        .iter()
        .find(|(entity, _)| rest.starts_with(entity));
        match decoded {
            Some((entity, ch)) => {
                out.push(*ch);
                rest = &rest[entity.len()..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(ch),
        }
    }
    out
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<Token>,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser {
            lexer: Lexer::new(input),
            peeked: None,
        }
    }

    fn next(&mut self) -> Result<Option<Token>, TableError> {
        if let Some(tok) = self.peeked.take() {
            return Ok(Some(tok));
        }
        self.lexer.next_token()
    }

    /// Next token, skipping whitespace-only character data between tags.
    fn next_structural(&mut self) -> Result<Option<Token>, TableError> {
        loop {
            match self.next()? {
                Some(Token::Text { value, offset }) => {
                    if !value.chars().all(char::is_whitespace) {
                        return Err(TableError::MalformedHtml {
                            offset,
                            reason: "character data is only allowed inside cells".into(),
                        });
                    }
                }
                other => return Ok(other),
            }
        }
    }

    fn parse_table(&mut self) -> Result<HtmlTable, TableError> {
        match self.next_structural()? {
            Some(Token::Open {
                tag: Tag::Table,
                self_closing,
                offset,
                ..
            }) => {
                let mut head_rows = Vec::new();
                let mut body_rows = Vec::new();
                if !self_closing {
                    self.parse_sections(&mut head_rows, &mut body_rows, offset)?;
                }
                // Nothing but trailing whitespace may follow the table.
                if let Some(tok) = self.next_structural()? {
                    let offset = token_offset(&tok);
                    return Err(TableError::MalformedHtml {
                        offset,
                        reason: "content after </table>".into(),
                    });
                }
                Ok(HtmlTable::new(head_rows, body_rows))
            }
            Some(tok) => Err(TableError::MalformedHtml {
                offset: token_offset(&tok),
                reason: "input must start with <table>".into(),
            }),
            None => Err(TableError::MalformedHtml {
                offset: 0,
                reason: "empty input".into(),
            }),
        }
    }

    fn parse_sections(
        &mut self,
        head_rows: &mut Vec<Row>,
        body_rows: &mut Vec<Row>,
        table_offset: usize,
    ) -> Result<(), TableError> {
        loop {
            match self.next_structural()? {
                Some(Token::Close {
                    tag: Tag::Table, ..
                }) => return Ok(()),
                Some(Token::Open {
                    tag: tag @ (Tag::Thead | Tag::Tbody),
                    self_closing,
                    offset,
                    ..
                }) => {
                    if !self_closing {
                        let in_head = tag == Tag::Thead;
                        self.parse_section_rows(
                            tag,
                            if in_head { head_rows } else { body_rows },
                            in_head,
                            offset,
                        )?;
                    }
                }
                Some(Token::Open {
                    tag: Tag::Tr,
                    self_closing,
                    offset,
                    ..
                }) => {
                    // Bare rows outside any section are body rows.
                    body_rows.push(self.parse_row(self_closing, false, offset)?);
                }
                Some(tok) => {
                    return Err(TableError::MalformedHtml {
                        offset: token_offset(&tok),
                        reason: "expected <thead>, <tbody>, <tr> or </table>".into(),
                    })
                }
                None => {
                    return Err(TableError::MalformedHtml {
                        offset: table_offset,
                        reason: "unclosed <table>".into(),
                    })
                }
            }
        }
    }

    fn parse_section_rows(
        &mut self,
        section: Tag,
        rows: &mut Vec<Row>,
        in_head: bool,
        section_offset: usize,
    ) -> Result<(), TableError> {
        loop {
            match self.next_structural()? {
                Some(Token::Close { tag, .. }) if tag == section => return Ok(()),
                Some(Token::Open {
                    tag: Tag::Tr,
                    self_closing,
                    offset,
                    ..
                }) => rows.push(self.parse_row(self_closing, in_head, offset)?),
                Some(tok) => {
                    return Err(TableError::MalformedHtml {
                        offset: token_offset(&tok),
                        reason: format!("expected <tr> or </{}>", section.name()),
                    })
                }
                None => {
                    return Err(TableError::MalformedHtml {
                        offset: section_offset,
                        reason: format!("unclosed <{}>", section.name()),
                    })
                }
            }
        }
    }

    fn parse_row(
        &mut self,
        self_closing: bool,
        in_head: bool,
        row_offset: usize,
    ) -> Result<Row, TableError> {
        let mut cells = Vec::new();
        if !self_closing {
            loop {
                match self.next_structural()? {
                    Some(Token::Close { tag: Tag::Tr, .. }) => break,
                    Some(Token::Open {
                        tag: tag @ (Tag::Td | Tag::Th),
                        rowspan,
                        colspan,
                        self_closing,
                        offset,
                    }) => {
                        let text = if self_closing {
                            String::new()
                        } else {
                            self.parse_cell_text(tag, offset)?
                        };
                        cells.push(Cell {
                            text,
                            rowspan,
                            colspan,
                            is_header: in_head || tag == Tag::Th,
                        });
                    }
                    Some(tok) => {
                        return Err(TableError::MalformedHtml {
                            offset: token_offset(&tok),
                            reason: "expected <td>, <th> or </tr>".into(),
                        })
                    }
                    None => {
                        return Err(TableError::MalformedHtml {
                            offset: row_offset,
                            reason: "unclosed <tr>".into(),
                        })
                    }
                }
            }
        }
        if cells.is_empty() {
            return Err(TableError::MalformedHtml {
                offset: row_offset,
                reason: "row has no cells".into(),
            });
        }
        Ok(Row::new(cells))
    }

    fn parse_cell_text(&mut self, cell_tag: Tag, cell_offset: usize) -> Result<String, TableError> {
        let mut text = String::new();
        loop {
            match self.next()? {
                Some(Token::Text { value, .. }) => text.push_str(&value),
                Some(Token::Close { tag, offset }) => {
                    if tag == cell_tag {
                        return Ok(text);
                    }
                    return Err(TableError::MalformedHtml {
                        offset,
                        reason: format!("expected </{}>", cell_tag.name()),
                    });
                }
                Some(Token::Open { offset, tag, .. }) => {
                    return Err(TableError::MalformedHtml {
                        offset,
                        reason: format!("nested <{}> inside a cell", tag.name()),
                    })
                }
                None => {
                    return Err(TableError::MalformedHtml {
                        offset: cell_offset,
                        reason: format!("unclosed <{}>", cell_tag.name()),
                    })
                }
            }
        }
    }
}

fn token_offset(tok: &Token) -> usize {
    match tok {
        Token::Open { offset, .. } | Token::Close { offset, .. } | Token::Text { offset, .. } => {
            *offset
        }
    }
}

/// Parse a single `<table>` element in the restricted dialect.
///
/// `th` cells get `is_header = true`; cells inside `thead` get
/// `is_header = true` regardless of tag.
pub fn parse_table(html: &str) -> Result<HtmlTable, TableError> {
    Parser::new(html).parse_table()
}

// ---------------------------------------------------------------------------
// Grid expansion

/// Expand rowspans/colspans into a dense slot grid with standard HTML
/// occupancy: a rowspan reserves slots in subsequent rows, shifting later
/// cells right; rows shorter than the widest row are padded on the right.
///
/// A rowspan extending past the last row is clamped to the table boundary
/// with a recorded warning rather than an error, keeping the metric pipeline
/// total on overshooting OCR output.
pub fn expand_grid(table: &HtmlTable) -> TableGrid {
    let n_rows = table.row_count();
    let mut rows: Vec<Vec<Option<usize>>> = vec![Vec::new(); n_rows];
    let mut origins: Vec<GridOrigin> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();

    for (r, row) in table.logical_rows().enumerate() {
        for cell in &row.cells {
            let mut col = 0usize;
            while rows[r].get(col).is_some_and(Option::is_some) {
                col += 1;
            }
            let rowspan = if cell.rowspan as usize > n_rows - r {
                warnings.push(format!(
                    "rowspan {} at row {r} col {col} clamped to table boundary",
                    cell.rowspan
                ));
                (n_rows - r) as u32
            } else {
                cell.rowspan
            };
            let origin_idx = origins.len();
            origins.push(GridOrigin {
                row: r,
                col,
                cell: cell.clone(),
            });
            for dr in 0..rowspan as usize {
                let target = &mut rows[r + dr];
                for dc in 0..cell.colspan as usize {
                    let c = col + dc;
                    if target.len() <= c {
                        target.resize(c + 1, None);
                    }
                    if target[c].is_some() {
                        warnings.push(format!(
                            "span of cell at row {r} col {col} collides at row {} col {c}",
                            r + dr
                        ));
                    } else {
                        target[c] = Some(origin_idx);
                    }
                }
            }
        }
    }

    let n_cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut slots = Vec::with_capacity(n_rows * n_cols);
    for row in &rows {
        for c in 0..n_cols {
            slots.push(match row.get(c).copied().flatten() {
                Some(idx) => SlotRef::Cell(idx),
                None => SlotRef::Padding,
            });
        }
    }
    TableGrid {
        n_rows,
        n_cols,
        slots,
        origins,
        warnings,
    }
}

/// Extract the logical grid signature: the expanded rowspan/colspan row-width
/// list. Content-blind; changing cell text never changes the signature.
pub fn grid_signature(table: &HtmlTable) -> GridSignature {
    GridSignature {
        row_widths: expand_grid(table).row_widths(),
    }
}

// ---------------------------------------------------------------------------
// Normalization and serialization

/// Collapse runs of whitespace in cell text to single spaces.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_run = false;
    for ch in text.trim().chars() {
        if ch.is_whitespace() {
            in_run = true;
        } else {
            if in_run && !out.is_empty() {
                out.push(' ');
            }
            in_run = false;
            out.push(ch);
        }
    }
    out
}

fn row_is_empty(row: &Row) -> bool {
    row.cells.iter().all(|c| c.text.is_empty())
}

/// Normalize a table: collapse and trim cell whitespace, drop empty trailing
/// rows. Header information is already carried by the `is_header` flag (th
/// and thead both set it), so tag style needs no further canonicalization.
/// Idempotent.
pub fn normalize_table(table: &HtmlTable) -> HtmlTable {
    let map_rows = |rows: &[Row]| -> Vec<Row> {
        rows.iter()
            .map(|row| {
                Row::new(
                    row.cells
                        .iter()
                        .map(|c| Cell {
                            text: normalize_text(&c.text),
                            ..c.clone()
                        })
                        .collect(),
                )
            })
            .collect()
    };
    let mut head_rows = map_rows(&table.head_rows);
    let mut body_rows = map_rows(&table.body_rows);
    while body_rows.last().is_some_and(row_is_empty) {
        body_rows.pop();
    }
    if body_rows.is_empty() {
        while head_rows.last().is_some_and(row_is_empty) {
            head_rows.pop();
        }
    }
    HtmlTable {
        head_rows,
        body_rows,
        source_span: table.source_span,
    }
}

/// Emit the canonical serialization: single `thead` (when head rows exist)
/// followed by a single `tbody`, attributes ordered rowspan then colspan and
/// emitted only when greater than one, no insignificant whitespace. Body
/// cells flagged `is_header` serialize as `th` so the flag survives a parse.
pub fn serialize_table(table: &HtmlTable) -> String {
    let mut out = String::from("<table>");
    if !table.head_rows.is_empty() {
        out.push_str("<thead>");
        for row in &table.head_rows {
            write_row(&mut out, row, true);
        }
        out.push_str("</thead>");
    }
    out.push_str("<tbody>");
    for row in &table.body_rows {
        write_row(&mut out, row, false);
    }
    out.push_str("</tbody></table>");
    out
}

fn write_row(out: &mut String, row: &Row, in_head: bool) {
    out.push_str("<tr>");
    for cell in &row.cells {
        let tag = if !in_head && cell.is_header { "th" } else { "td" };
        out.push('<');
        out.push_str(tag);
        if cell.rowspan > 1 {
            let _ = write!(out, " rowspan=\"{}\"", cell.rowspan);
        }
        if cell.colspan > 1 {
            let _ = write!(out, " colspan=\"{}\"", cell.colspan);
        }
        out.push('>');
        out.push_str(&escape_text(&cell.text));
        out.push_str("</");
        out.push_str(tag);
        out.push('>');
    }
    out.push_str("</tr>");
}
