//! Column-1 period histograms over random K1 for the reference IVs, in
//! both sampling modes, next to the reference fractions.
//!
//! `cargo run --release --example period_census [trials]`

use hillcrack::keystats::{period_census, DEFAULT_SEED, REFERENCE_CENSUS, REFERENCE_PERIODS};

fn main() -> hillcrack::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2000);
    println!("{trials} trials per row, seed {DEFAULT_SEED:#x}");
    print!("{:<16} {:<10}", "IV", "mode");
    for p in REFERENCE_PERIODS {
        print!(" {:>7}", format!("N{p}"));
    }
    println!();
    for row in REFERENCE_CENSUS {
        print!("{:<16} {:<10}", format!("{:?}", row.iv), "reference");
        for p in REFERENCE_PERIODS {
            print!(" {:>7.4}", row.fraction(p));
        }
        println!();
        for invertible_only in [false, true] {
            let c = period_census(&row.iv_vector(), trials, DEFAULT_SEED, invertible_only)?;
            let mode = if invertible_only { "odd det" } else { "any K1" };
            print!("{:<16} {:<10}", "", mode);
            for p in REFERENCE_PERIODS {
                print!(" {:>7.4}", c.fraction(p));
            }
            let extra: Vec<_> = c
                .histogram
                .iter()
                .filter(|(p, _)| !REFERENCE_PERIODS.contains(p))
                .collect();
            if !extra.is_empty() {
                print!("  other {extra:?}");
            }
            println!();
        }
    }
    Ok(())
}
