//! Document-level reconstruction and evaluation toolkit for long paginated
//! documents.
//!
//! The crate consolidates cross-page text and table fragments into whole
//! document entities, rebuilds document-wide heading hierarchies through a
//! pseudo-TOC pipeline backed by a vision-language generation service, and
//! provides the metric and training-math suite used to evaluate and train
//! structured-table parsers: TEDS / TEDS-S, TocEDS, NED, ARD, cell-level IoU
//! reports, tabular difficulty scoring, and GRPO reward arithmetic.
//!
//! Modules:
//! - [`table`] — restricted HTML table dialect: parsing, span expansion into a
//!   logical grid, normalization, canonical serialization, grid signatures.
//! - [`tree_edit`] — ordered labeled tree edit distance, the engine beneath
//!   TEDS and TocEDS.
//! - [`metrics`] — scalar evaluation metrics and report serialization.
//! - [`merge`] — cross-page text and table consolidation.
//! - [`dhr`] — document-level heading hierarchy reconstruction (pseudo-TOC
//!   layout, rendering, prompt assembly, level decoding).
//! - [`difficulty`] — tabular attribute extraction, correlation screening,
//!   inference-consistency difficulty, curriculum stratification.
//! - [`rl`] — gated table reward and group-relative policy objective values.
//! - [`grounding`] — structural anchor tokens, box parameterization, box
//!   losses and the reference cell-box regressor.
//! - [`vlm`] — client for the external generation service plus a
//!   deterministic in-process stub.
//! - [`doc`] — typed document elements and the JSON Lines interchange format.

pub mod dhr;
pub mod difficulty;
pub mod doc;
pub mod grounding;
pub mod merge;
pub mod metrics;
pub mod rl;
pub mod table;
pub mod tree_edit;
pub mod vlm;
