//! Flip bit 5 of K1[1,2]: only offset 2 of each block changes, and every
//! change is a multiple of 32.
//!
//! `cargo run --example k1_sensitivity [out_dir]`

use std::path::PathBuf;

use hillcrack::analysis::{k1_bitflip_experiment, MatrixBit};
use hillcrack::io::keyfile::parse_key;
use hillcrack::GrayImage;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KEY: &str = "4\n3 9 17 33\n11 2 3 7\n8 5 19 103\n201 203 119 150\n7 9 21 35\n";

fn main() -> hillcrack::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/examples-out".into()),
    );
    std::fs::create_dir_all(&out)?;
    let key = parse_key(KEY)?;
    // a random image: on the gray levels of the test pattern a change of 32
    // vanishes mod 256
    let plain = GrayImage::random(256, 256, &mut ChaCha8Rng::seed_from_u64(3))?;
    let report = k1_bitflip_experiment(
        &plain,
        &key,
        MatrixBit {
            row: 1,
            col: 2,
            bit: 5,
        },
    )?;
    print!("{}", report.diff.summary(key.m()));
    println!("flipped key still valid: {}", report.flipped_key_valid);
    println!("confined to column 2: {}", report.confined_to_column);
    println!("all differences divisible by 32: {}", report.divisible);
    for path in report.diff.write_files(&out.join("k1flip"), key.m())? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
