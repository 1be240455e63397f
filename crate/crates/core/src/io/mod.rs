//! File formats: PGM images, key files, equivalent-key files, census CSV.

pub mod census_csv;
pub mod eqkey;
pub mod keyfile;
pub mod pgm;
