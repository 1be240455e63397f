//! Encrypt and decrypt the structured test pattern with a fixed 4×4 key.
//!
//! `cargo run --example round_trip [out_dir]`

use std::path::PathBuf;

use hillcrack::analysis::make_test_pattern;
use hillcrack::io::keyfile::parse_key;
use hillcrack::io::pgm::{write_cipher_pgm, write_pgm};
use hillcrack::{decrypt, encrypt};

const KEY: &str = "4\n3 9 17 33\n11 2 3 7\n8 5 19 103\n201 203 119 150\n7 9 21 35\n";

fn main() -> hillcrack::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/examples-out".into()),
    );
    std::fs::create_dir_all(&out)?;

    let key = parse_key(KEY)?;
    let plain = make_test_pattern(256, 256)?;
    let cipher = encrypt(&plain, &key)?;
    let back = decrypt(&cipher, &key)?;
    assert_eq!(back, plain);

    write_pgm(&plain, out.join("pattern.pgm"))?;
    write_cipher_pgm(&cipher, out.join("pattern.enc.pgm"))?;
    write_pgm(&back, out.join("pattern.dec.pgm"))?;

    // the zero band on top stays zero
    let zero_rows = cipher.image.pixels()[..256 * 64].iter().all(|&p| p == 0);
    println!("K1 =\n{}\nIV = {}", key.k1(), key.iv());
    println!("first key-stream matrices:");
    for (l, k) in key.key_stream().take(3).enumerate() {
        println!("K{} =\n{k}", l + 1);
    }
    println!("round trip exact: {}", back == plain);
    println!("zero band still zero after encryption: {zero_rows}");
    println!("images written to {}", out.display());
    Ok(())
}
