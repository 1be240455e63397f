//! Keys with an even determinant or an even IV entry cannot be decrypted.

use hillcrack::{validate_key, ByteMatrix, ByteVector, GrayImage, KeyValidity, SecretKey};

fn show(label: &str, key: &SecretKey) {
    match validate_key(key) {
        KeyValidity::Valid => println!("{label}: valid"),
        KeyValidity::Invalid(faults) => {
            let text: Vec<String> = faults.iter().map(ToString::to_string).collect();
            println!("{label}: invalid ({})", text.join("; "));
        }
    }
    let dets: Vec<u8> = key.key_stream().take(10).map(|k| k.det_mod()).collect();
    println!("  det K_1..K_10 = {dets:?}");
}

fn main() -> hillcrack::Result<()> {
    let k1 = ByteMatrix::from_rows(&[[1u8, 2], [3, 5]])?;
    show(
        "odd det, odd IV",
        &SecretKey::new(k1.clone(), ByteVector::new(vec![3, 7])?)?,
    );
    show(
        "odd det, IV with 2",
        &SecretKey::new(k1, ByteVector::new(vec![2, 7])?)?,
    );
    let even = ByteMatrix::from_rows(&[[2u8, 0], [0, 2]])?;
    show(
        "even det",
        &SecretKey::new(even.clone(), ByteVector::new(vec![1, 1])?)?,
    );

    let key = SecretKey::new(even, ByteVector::new(vec![1, 1])?)?;
    let plain = GrayImage::new(2, 1, vec![1, 129])?;
    match hillcrack::encrypt(&plain, &key) {
        Ok(_) => println!("encrypted"),
        Err(e) => println!("encrypt refused: {e}"),
    }

    // 1×1 census: a key is valid iff K1 and IV are both odd
    let valid = (0..=255u8)
        .flat_map(|k| (0..=255u8).map(move |v| (k, v)))
        .filter(|&(k, v)| {
            let key = SecretKey::new(
                ByteMatrix::from_rows(&[[k]]).unwrap(),
                ByteVector::new(vec![v]).unwrap(),
            )
            .unwrap();
            validate_key(&key).is_valid()
        })
        .count();
    println!("valid 1×1 keys: {valid} of 65536");
    Ok(())
}
