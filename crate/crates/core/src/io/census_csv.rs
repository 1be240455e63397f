//! Census histograms as `period,count` CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::keystats::PeriodCensus;

pub fn format_census_csv(census: &PeriodCensus) -> String {
    let mut out = String::from("period,count\n");
    for (period, count) in &census.histogram {
        let _ = writeln!(out, "{period},{count}");
    }
    out
}

pub fn write_census_csv(census: &PeriodCensus, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_census_csv(census))?;
    Ok(())
}

/// File name used for one IV, e.g. `census_91_63_45.csv`.
pub fn census_file_name(census: &PeriodCensus) -> String {
    let parts: Vec<String> = census.iv.as_slice().iter().map(u8::to_string).collect();
    format!("census_{}.csv", parts.join("_"))
}
