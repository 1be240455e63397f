//! How many m×m byte matrices are invertible.

use hillcrack::{gl_count, invertible_probability};
use num_bigint::BigUint;

fn main() -> hillcrack::Result<()> {
    println!("{:>3} {:>12} {:>10}  |GL(m, Z256)|", "m", "p_m", "exact");
    for m in [1usize, 2, 3, 4, 5, 6, 8, 16, 32, 64] {
        let p = invertible_probability(m)?;
        let count = match m {
            1..=4 => gl_count(m)?.to_string(),
            5..=16 => format!("~2^{}", gl_count(m)?.bits() - 1),
            _ => String::new(),
        };
        let exact = if m <= 4 {
            p.exact.to_string()
        } else {
            String::new()
        };
        println!("{m:>3} {:>12} {exact:>10}  {count}", p.to_decimal(6));
    }
    let total = BigUint::from(2u8).pow(32);
    println!("2x2 check: {} of {total} matrices invertible", gl_count(2)?);
    Ok(())
}
