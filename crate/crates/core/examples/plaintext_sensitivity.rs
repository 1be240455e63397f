//! A one-bit change in the plain image only touches its own block.

use hillcrack::analysis::{plaintext_flip_experiment, IndexBit};
use hillcrack::io::keyfile::parse_key;
use hillcrack::GrayImage;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KEY: &str = "4\n3 9 17 33\n11 2 3 7\n8 5 19 103\n201 203 119 150\n7 9 21 35\n";

fn main() -> hillcrack::Result<()> {
    let key = parse_key(KEY)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let plain = GrayImage::random(64, 64, &mut rng)?;
    for (index, bit) in [(1, 0), (1000, 3), (4096, 7)] {
        let r = plaintext_flip_experiment(&plain, &key, IndexBit { index, bit })?;
        println!(
            "pixel {index} bit {bit}: block {}, changed bytes {:?}, confined: {}",
            r.block, r.diff.affected_positions, r.confined_to_block
        );
    }
    Ok(())
}
