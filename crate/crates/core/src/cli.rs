//! Command-line front end. Every subcommand is deterministic in its
//! arguments; randomness only flows from `--seed`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    iv_bitflip_experiment, k1_bitflip_experiment, make_test_pattern, plaintext_flip_experiment,
    DiffReport, IndexBit, MatrixBit,
};
use crate::attack::{
    chosen_plaintext_images, reconstruct_from_pairs, single_image_attack, verify_equivalent_key,
    PairSet,
};
use crate::cipher::{decrypt, encrypt, validate_key, KeyValidity};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::io::census_csv::{census_file_name, format_census_csv, write_census_csv};
use crate::io::eqkey::write_equivalent_key;
use crate::io::keyfile::read_key;
use crate::io::pgm::{read_cipher_pgm, read_pgm, write_cipher_pgm, write_pgm};
use crate::keystats::{
    column_period, matrix_period, run_census, CensusConfig, PeriodOutcome, DEFAULT_MAX_STEPS,
    DEFAULT_SEED, REFERENCE_CENSUS, REFERENCE_PERIODS,
};
use crate::modmat::{gl_count, invertible_probability, ByteVector};

#[derive(Parser, Debug)]
#[command(
    name = "hillcrack",
    version,
    about = "Hill-cipher image encryption and its cryptanalysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Encrypt a PGM image.
    Encrypt(CryptArgs),
    /// Decrypt a PGM cipher image.
    Decrypt(CryptArgs),
    /// Report whether a key file holds a valid key.
    CheckKey {
        #[arg(long)]
        key: PathBuf,
    },
    /// Recover an equivalent key from known plain/cipher image pairs.
    AttackKnown {
        /// Plain images, in the same order as --cipher.
        #[arg(long, required = true, num_args = 1..)]
        plain: Vec<PathBuf>,
        #[arg(long, required = true, num_args = 1..)]
        cipher: Vec<PathBuf>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=16))]
        m: u8,
        #[arg(long)]
        output: PathBuf,
        /// Cipher image to decrypt with the recovered key.
        #[arg(long, requires = "decrypt_output")]
        decrypt: Option<PathBuf>,
        #[arg(long)]
        decrypt_output: Option<PathBuf>,
    },
    /// Encrypt the m basis images with a key (the encryption oracle), then
    /// recover the key stream from them.
    AttackChosen {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        output: PathBuf,
        /// Directory for the basis images and their encryptions.
        #[arg(long)]
        emit_dir: Option<PathBuf>,
    },
    /// Recover a periodic equivalent key from a single known pair.
    AttackSingle {
        #[arg(long)]
        plain: PathBuf,
        #[arg(long)]
        cipher: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=16))]
        m: u8,
        #[arg(long)]
        output: PathBuf,
    },
    /// Flip one bit of K1 and write the bit-planes of the cipher difference.
    FlipK1 {
        #[command(flatten)]
        common: FlipArgs,
        #[arg(long)]
        row: usize,
        #[arg(long)]
        col: usize,
    },
    /// Flip one bit of IV and write the bit-planes of the cipher difference.
    FlipIv {
        #[command(flatten)]
        common: FlipArgs,
        #[arg(long)]
        index: usize,
    },
    /// Flip one bit of one plain pixel (1-based raster index).
    FlipPlain {
        #[command(flatten)]
        common: FlipArgs,
        #[arg(long)]
        pixel: usize,
    },
    /// Periods of every column of the key stream and of the whole matrix.
    PeriodScan {
        #[arg(long)]
        key: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: usize,
    },
    /// Histogram of column-1 periods over random K1.
    Census(CensusArgs),
    /// Count of invertible matrices and the invertibility probability.
    GlStats {
        #[arg(long, default_value_t = 8)]
        max_m: usize,
    },
    /// Write the structured test pattern.
    MakePattern {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Write a seeded uniformly random image.
    MakeRandom {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct CryptArgs {
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct FlipArgs {
    #[arg(long)]
    pub key: PathBuf,
    /// Plain image.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u32).range(0..=7))]
    pub bit: u32,
    /// Output prefix for `<stem>.plane<b>.pgm` and friends.
    #[arg(long)]
    pub stem: PathBuf,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    /// Comma-separated IV bytes, e.g. 91,63,45.
    #[arg(
        long,
        value_delimiter = ',',
        required_unless_present = "reference",
        conflicts_with = "reference"
    )]
    pub iv: Vec<u8>,
    /// Run the five reference IVs.
    #[arg(long)]
    pub reference: bool,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Only draw K1 with odd determinant.
    #[arg(long)]
    pub invertible_only: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    /// CSV path for a single IV.
    #[arg(long, conflicts_with = "output_dir")]
    pub output: Option<PathBuf>,
    /// Directory receiving one CSV per IV.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code: 0 success, 1 domain error, 2 usage error.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", e.name());
            1
        }
    }
}

fn print(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{text}")?;
    Ok(())
}

fn run(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Encrypt(a) => {
            let key = read_key(&a.key)?;
            let plain = read_pgm(&a.input)?;
            write_cipher_pgm(&encrypt(&plain, &key)?, &a.output)?;
        }
        Command::Decrypt(a) => {
            let key = read_key(&a.key)?;
            let cipher = read_cipher_pgm(&a.input)?;
            write_pgm(&decrypt(&cipher, &key)?, &a.output)?;
        }
        Command::CheckKey { key } => {
            let key = read_key(&key)?;
            match validate_key(&key) {
                KeyValidity::Valid => print(out, "valid")?,
                KeyValidity::Invalid(faults) => {
                    for f in &faults {
                        print(out, format!("invalid: {f}"))?;
                    }
                    return Err(Error::InvalidKey(faults[0].clone()));
                }
            }
        }
        Command::AttackKnown {
            plain,
            cipher,
            m,
            output,
            decrypt,
            decrypt_output,
        } => {
            if plain.len() != cipher.len() {
                return Err(Error::DimensionMismatch {
                    expected: plain.len(),
                    found: cipher.len(),
                });
            }
            let mut pairs = PairSet::new();
            for (p, c) in plain.iter().zip(&cipher) {
                pairs.push(read_pgm(p)?, read_cipher_pgm(c)?)?;
            }
            let key = reconstruct_from_pairs(&pairs, m.into())?;
            write_equivalent_key(&key, &output)?;
            print(out, format!("coverage {:.6}", key.coverage()))?;
            print(out, format!("unresolved blocks {}", key.unresolved().len()))?;
            print(
                out,
                format!("verified {:.6}", verify_equivalent_key(&key, &pairs)?),
            )?;
            if let (Some(src), Some(dst)) = (decrypt, decrypt_output) {
                write_pgm(&key.decrypt(&read_cipher_pgm(&src)?)?, &dst)?;
            }
        }
        Command::AttackChosen {
            key,
            width,
            height,
            output,
            emit_dir,
        } => {
            let key = read_key(&key)?;
            let mut pairs = PairSet::new();
            for (i, p) in chosen_plaintext_images(key.m(), width, height)?
                .into_iter()
                .enumerate()
            {
                let c = encrypt(&p, &key)?;
                if let Some(dir) = &emit_dir {
                    std::fs::create_dir_all(dir)?;
                    write_pgm(&p, dir.join(format!("basis{}.pgm", i + 1)))?;
                    write_cipher_pgm(&c, dir.join(format!("basis{}.enc.pgm", i + 1)))?;
                }
                pairs.push(p, c)?;
            }
            let recovered = reconstruct_from_pairs(&pairs, key.m())?;
            write_equivalent_key(&recovered, &output)?;
            let matches = key
                .key_stream()
                .enumerate()
                .take(width * height / key.m())
                .all(|(l, k)| recovered.matrix(l + 1) == Some(&k));
            print(out, format!("coverage {:.6}", recovered.coverage()))?;
            print(out, format!("full blocks match key stream: {matches}"))?;
        }
        Command::AttackSingle {
            plain,
            cipher,
            m,
            output,
        } => {
            let result =
                single_image_attack(&read_pgm(&plain)?, &read_cipher_pgm(&cipher)?, m.into())?;
            write_equivalent_key(&result.key, &output)?;
            match result.key.period() {
                Some(p) if result.period_found => print(out, format!("period {p}"))?,
                _ => {
                    print(
                        out,
                        format!(
                            "no period found; dense coverage {:.6}",
                            result.key.coverage()
                        ),
                    )?;
                    return Ok(1);
                }
            }
        }
        Command::FlipK1 { common, row, col } => {
            let key = read_key(&common.key)?;
            let plain = read_pgm(&common.input)?;
            let r = k1_bitflip_experiment(
                &plain,
                &key,
                MatrixBit {
                    row,
                    col,
                    bit: common.bit,
                },
            )?;
            write_report(out, &r.diff, &common.stem, key.m())?;
            print(out, format!("flipped key valid: {}", r.flipped_key_valid))?;
            print(
                out,
                format!("confined to column {col}: {}", r.confined_to_column),
            )?;
            print(
                out,
                format!("divisible by 2^{}: {}", common.bit, r.divisible),
            )?;
        }
        Command::FlipIv { common, index } => {
            let key = read_key(&common.key)?;
            let plain = read_pgm(&common.input)?;
            let r = iv_bitflip_experiment(
                &plain,
                &key,
                IndexBit {
                    index,
                    bit: common.bit,
                },
            )?;
            write_report(out, &r.diff, &common.stem, key.m())?;
            print(out, format!("flipped key valid: {}", r.flipped_key_valid))?;
            print(out, format!("D2 =\n{}", r.d2))?;
            print(
                out,
                format!("first-row law holds: {}", r.first_row_law_holds),
            )?;
            if let Some(all) = r.d2_recurrence_holds {
                print(out, format!("row recurrence holds: {all}"))?;
            }
        }
        Command::FlipPlain { common, pixel } => {
            let key = read_key(&common.key)?;
            let plain = read_pgm(&common.input)?;
            let r = plaintext_flip_experiment(
                &plain,
                &key,
                IndexBit {
                    index: pixel,
                    bit: common.bit,
                },
            )?;
            write_report(out, &r.diff, &common.stem, key.m())?;
            print(
                out,
                format!("confined to block {}: {}", r.block, r.confined_to_block),
            )?;
        }
        Command::PeriodScan { key, max_steps } => {
            let key = read_key(&key)?;
            for j in 1..=key.m() {
                let outcome = column_period(key.k1(), key.iv(), j, max_steps)?;
                print(out, format!("column {j}: {}", describe(outcome)))?;
            }
            let outcome = matrix_period(key.k1(), key.iv(), max_steps)?;
            print(out, format!("matrix: {}", describe(outcome)))?;
        }
        Command::Census(a) => census(a, out)?,
        Command::GlStats { max_m } => {
            print(out, "m,gl_count,p_exact,p_decimal")?;
            for m in 1..=max_m {
                let p = invertible_probability(m)?;
                print(
                    out,
                    format!("{m},{},{},{}", gl_count(m)?, p.exact, p.to_decimal(6)),
                )?;
            }
        }
        Command::MakePattern {
            width,
            height,
            output,
        } => write_pgm(&make_test_pattern(width, height)?, &output)?,
        Command::MakeRandom {
            width,
            height,
            seed,
            output,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            write_pgm(&GrayImage::random(width, height, &mut rng)?, &output)?;
        }
    }
    Ok(0)
}

fn describe(outcome: PeriodOutcome) -> String {
    match outcome {
        PeriodOutcome::Cycle(c) => format!("preperiod {} period {}", c.preperiod, c.period),
        PeriodOutcome::Overflow => "overflow".into(),
    }
}

fn write_report(
    out: &mut dyn Write,
    diff: &DiffReport,
    stem: &std::path::Path,
    m: usize,
) -> Result<()> {
    if let Some(parent) = stem.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    diff.write_files(stem, m)?;
    write!(out, "{}", diff.summary(m))?;
    Ok(())
}

fn census(a: CensusArgs, out: &mut dyn Write) -> Result<()> {
    let ivs: Vec<ByteVector> = if a.reference {
        REFERENCE_CENSUS.iter().map(|r| r.iv_vector()).collect()
    } else {
        vec![ByteVector::new(a.iv.clone())?]
    };
    for iv in ivs {
        let mut config = CensusConfig::new(iv, a.trials, a.seed, a.invertible_only);
        config.max_steps = a.max_steps;
        let census = run_census(&config)?;
        if let Some(dir) = &a.output_dir {
            std::fs::create_dir_all(dir)?;
            write_census_csv(&census, dir.join(census_file_name(&census)))?;
        } else if let Some(path) = &a.output {
            write_census_csv(&census, path)?;
        } else {
            print(out, format!("# IV {}", census.iv))?;
            write!(out, "{}", format_census_csv(&census))?;
        }
        if let Some(reference) = REFERENCE_CENSUS
            .iter()
            .find(|r| r.iv.as_slice() == census.iv.as_slice())
        {
            let mut line = format!("# IV {} observed/reference:", census.iv);
            for p in REFERENCE_PERIODS {
                line.push_str(&format!(
                    " N{p}={:.4}/{:.4}",
                    census.fraction(p),
                    reference.fraction(p)
                ));
            }
            print(out, line)?;
        }
        let odd = census.non_power_of_two();
        if !odd.is_empty() {
            print(out, format!("# WARNING: non-power-of-two periods {odd:?}"))?;
        }
        if census.overflows > 0 {
            print(
                out,
                format!("# WARNING: {} trials overflowed", census.overflows),
            )?;
        }
    }
    Ok(())
}
