//! One known image suffices: the key stream repeats, so blocks a period
//! apart share a matrix.

use hillcrack::attack::single_image_attack;
use hillcrack::keystats::{matrix_period, DEFAULT_MAX_STEPS, REFERENCE_CENSUS};
use hillcrack::{encrypt, ByteMatrix, GrayImage, SecretKey};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hillcrack::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for row in REFERENCE_CENSUS {
        let secret = SecretKey::new(ByteMatrix::random_invertible(3, &mut rng)?, row.iv_vector())?;
        let plain = GrayImage::random(256, 256, &mut rng)?;
        let cipher = encrypt(&plain, &secret)?;
        let result = single_image_attack(&plain, &cipher, 3)?;
        let truth = matrix_period(secret.k1(), secret.iv(), DEFAULT_MAX_STEPS)?
            .cycle()
            .map(|c| c.period);

        let other = GrayImage::random(256, 256, &mut rng)?;
        let ok = result.key.decrypt(&encrypt(&other, &secret)?)? == other;
        println!(
            "IV {:?}: period found {:?} (true {:?}), {} candidates tried, decrypts another image: {ok}",
            row.iv,
            result.key.period().filter(|_| result.period_found),
            truth,
            result.attempts.len(),
        );
    }
    Ok(())
}
