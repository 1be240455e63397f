//! Flip one bit of IV and look at the key-matrix difference D2 = K̃2 − K2.
//! Its first row is the flip delta times the first row of K1.

use hillcrack::analysis::{iv_bitflip_experiment, IndexBit};
use hillcrack::io::keyfile::parse_key;
use hillcrack::GrayImage;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KEY: &str = "4\n3 9 17 33\n11 2 3 7\n8 5 19 103\n201 203 119 150\n7 9 21 35\n";

fn main() -> hillcrack::Result<()> {
    let key = parse_key(KEY)?;
    let plain = GrayImage::random(256, 256, &mut ChaCha8Rng::seed_from_u64(3))?;
    for bit in [1, 4, 7] {
        let r = iv_bitflip_experiment(&plain, &key, IndexBit { index: 1, bit })?;
        println!("flip IV[1] bit {bit}: delta = {}", r.delta);
        println!("D2 =\n{}", r.d2);
        println!("first-row law holds: {}", r.first_row_law_holds);
        if let Some(all) = r.d2_recurrence_holds {
            println!("row recurrence holds: {all}");
        }
        println!(
            "changed pixels: {} of {}, offsets touched: {}\n",
            r.diff.affected_positions.len(),
            plain.len(),
            r.offsets_touched
        );
    }
    Ok(())
}
