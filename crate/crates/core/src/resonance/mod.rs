//! Exact and quasi-resonance of mode quartets.
//!
//! All decisions are made on the integer defect pair `(p, q)`; the float
//! `ω²` only enters the quasi-resonance window comparison.

pub mod enumerate;
pub mod levels;
pub mod precision;
pub mod quartet;

pub use enumerate::{
    enumerate_exact_resonant_quartets, enumerate_quasi_resonant_quartets,
    max_quasi_resonant_extent, nonresonant_quasi_quartets, QuasiWindow, DEFAULT_WORK_BUDGET,
};
pub use levels::{expand_levels, square_level, LevelSets, DEFAULT_SEARCH_BOX};
pub use precision::{audit, audit_precision, reduce_float_to_fraction, FractionMode, PrecisionAudit};
pub use quartet::{
    defect, defect_in_window, is_axis_parallel_rectangle, is_defect_exact, is_exact_resonant,
    is_quasi_resonant, DefectPair,
    QuasiResonanceParams, Quartet, WindowNorm,
};
