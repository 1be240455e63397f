//! With access to the encryption oracle, m basis images reveal every key
//! matrix directly.

use hillcrack::attack::{chosen_plaintext_images, reconstruct_from_pairs, PairSet};
use hillcrack::io::keyfile::parse_key;
use hillcrack::{encrypt, GrayImage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KEY: &str = "4\n3 9 17 33\n11 2 3 7\n8 5 19 103\n201 203 119 150\n7 9 21 35\n";

fn main() -> hillcrack::Result<()> {
    let secret = parse_key(KEY)?;
    let (w, h) = (128, 128);
    let mut pairs = PairSet::new();
    for p in chosen_plaintext_images(secret.m(), w, h)? {
        let c = encrypt(&p, &secret)?;
        pairs.push(p, c)?;
    }
    let key = reconstruct_from_pairs(&pairs, secret.m())?;
    let exact = secret
        .key_stream()
        .take(w * h / secret.m())
        .enumerate()
        .all(|(l, k)| key.matrix(l + 1) == Some(&k));
    println!("oracle queries: {}", pairs.len());
    println!("recovered K1 =\n{}", key.matrix(1).expect("block 1"));
    println!("every key matrix matches: {exact}");

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fresh = GrayImage::random(w, h, &mut rng)?;
    let back = key.decrypt(&encrypt(&fresh, &secret)?)?;
    println!("fresh image decrypted exactly: {}", back == fresh);
    Ok(())
}
