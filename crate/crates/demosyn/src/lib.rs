pub mod checks;
pub mod cli;
pub mod dataset;
pub mod formats;
