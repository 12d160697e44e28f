pub mod analysis;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod padic;
pub mod polygon;
pub mod psi;
pub mod series;
pub mod witt;
