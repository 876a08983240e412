pub mod audit;
pub mod convergence;
pub mod kinematic;
pub mod simulate;
pub mod threshold;
pub mod truncated;
