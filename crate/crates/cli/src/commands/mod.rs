pub mod dhr;
pub mod difficulty;
pub mod eval;
pub mod merge;
