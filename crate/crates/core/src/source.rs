//! Prior-annotated bit streams.
//!
//! A stream is `k` message bits together with one log-likelihood ratio per
//! bit, `mu_i = ln p(b_i = 0) / p(b_i = 1)`, the side information the decoder
//! fuses into belief propagation. Priors are delivered losslessly and
//! out-of-band; this module only produces, loads and transforms them.
//!
//! Two file formats are supported: a text format with one `<bit>\t<mu>`
//! record per line (`#` starts a comment) and a binary format with magic
//! `NPRI`, a little-endian `u32` record count, then one byte plus a
//! little-endian `f64` per record.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::rng;
use crate::DEFAULT_MU_FLOOR;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Per-bit prior LLRs for one stream of `k` bits.
///
/// Entries are finite and their magnitudes never fall below the floor the
/// vector was constructed with, so the reliability statistic of every bit is
/// strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorVector<T: Real = f64> {
    mu: Vec<T>,
}

impl<T: Real> PriorVector<T> {
    /// Validates finiteness and the magnitude floor.
    pub fn new(mu: Vec<T>, mu_floor: T) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Config("zero-length stream".into()));
        }
        if mu_floor < T::zero() {
            return Err(Error::Config("mu_floor must be nonnegative".into()));
        }
        for (i, &m) in mu.iter().enumerate() {
            if !m.is_finite() {
                return Err(Error::Config(format!("prior {i} is not finite")));
            }
            if m.abs() < mu_floor {
                return Err(Error::Config(format!(
                    "prior {i} has magnitude {} below the floor {mu_floor}",
                    m.abs()
                )));
            }
        }
        Ok(Self { mu })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.mu
    }
}

/// The `k` message bits of one stream, with their priors.
#[derive(Debug, Clone, PartialEq)]
pub struct BitBlock<T: Real = f64> {
    bits: Vec<u8>,
    prior: PriorVector<T>,
}

impl<T: Real> BitBlock<T> {
    pub fn new(bits: Vec<u8>, prior: PriorVector<T>) -> Result<Self> {
        if bits.len() != prior.len() {
            return Err(Error::Structural(format!(
                "bit count {} does not match prior count {}",
                bits.len(),
                prior.len()
            )));
        }
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(Error::Structural(format!("bit {i} is outside {{0, 1}}")));
        }
        Ok(Self { bits, prior })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn prior(&self) -> &PriorVector<T> {
        &self.prior
    }
}

/// Priors with their signs aligned to the all-zero convention: the sign of
/// entry `i` is kept when `b_i = 0` and negated when `b_i = 1`, so a positive
/// flipped prior always points at the transmitted bit.
#[derive(Debug, Clone, PartialEq)]
pub struct FlippedPrior<T: Real = f64> {
    mu_tilde: Vec<T>,
}

impl<T: Real> FlippedPrior<T> {
    pub fn values(&self) -> &[T] {
        &self.mu_tilde
    }

    pub fn len(&self) -> usize {
        self.mu_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu_tilde.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Parameters for the synthetic prior-consistent source.
#[derive(Debug, Clone)]
pub struct SyntheticConfig<T: Real = f64> {
    pub k: usize,
    /// Lower bound on |mu|.
    pub certainty_low: T,
    /// Upper bound on |mu|.
    pub certainty_high: T,
    /// Magnitude floor enforced on the generated priors.
    pub mu_floor: T,
}

impl<T: Real> SyntheticConfig<T> {
    pub fn new(k: usize, certainty_low: T, certainty_high: T) -> Self {
        Self {
            k,
            certainty_low,
            certainty_high,
            mu_floor: T::from_f64_lossy(DEFAULT_MU_FLOOR),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.certainty_low > T::zero()) || self.certainty_low > self.certainty_high {
            return Err(Error::Config(format!(
                "certainty range [{}, {}] must satisfy 0 < low <= high",
                self.certainty_low, self.certainty_high
            )));
        }
        if self.certainty_low < self.mu_floor {
            return Err(Error::Config(format!(
                "certainty_low {} violates mu_floor {}",
                self.certainty_low, self.mu_floor
            )));
        }
        Ok(())
    }

    /// Draws a block whose bits are consistent with the priors:
    /// |mu_i| uniform in [low, high], sign of mu_i uniform, and
    /// `b_i ~ Bernoulli(1 - sigmoid(mu_i))`. Pure function of the seed.
    pub fn generate(&self, seed: u64) -> Result<BitBlock<T>> {
        self.validate()?;
        let mut stream = rng::root(seed);
        let lo = self.certainty_low.to_f64().unwrap();
        let hi = self.certainty_high.to_f64().unwrap();
        let mut mu = Vec::with_capacity(self.k);
        let mut bits = Vec::with_capacity(self.k);
        for _ in 0..self.k {
            let mag = lo + (hi - lo) * rng::uniform_open(&mut stream);
            let sign = if rng::uniform_open(&mut stream) < 0.5 {
                1.0
            } else {
                -1.0
            };
            let m = sign * mag;
            let p_one = 1.0 - 1.0 / (1.0 + (-m).exp());
            let b = u8::from(rng::uniform_open(&mut stream) < p_one);
            mu.push(T::from_f64_lossy(m));
            bits.push(b);
        }
        BitBlock::new(bits, PriorVector::new(mu, self.mu_floor)?)
    }
}

/// Flip prior signs into the all-zero convention. Pure; involutive when
/// applied twice with the same bits.
pub fn flip_priors<T: Real>(block: &BitBlock<T>) -> FlippedPrior<T> {
    let mu_tilde = block
        .prior
        .values()
        .iter()
        .zip(&block.bits)
        .map(|(&m, &b)| if b == 0 { m } else { -m })
        .collect();
    FlippedPrior { mu_tilde }
}

/// Probability that the flipped prior lands on the wrong side of zero,
/// `1 - sigmoid(|mu|)`; in (0, 1/2].
pub fn wrong_side_probability<T: Real>(mu: T) -> T {
    T::one() - mu.abs().sigmoid()
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

const BINARY_MAGIC: &[u8; 4] = b"NPRI";

/// Loads a priors file, detecting the binary format by its magic bytes.
pub fn load_bits_with_priors<T: Real>(path: &Path, mu_floor: T) -> Result<BitBlock<T>> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(BINARY_MAGIC) {
        parse_binary(&bytes, path, mu_floor)
    } else {
        parse_text(&bytes, path, mu_floor)
    }
}

fn parse_text<T: Real>(bytes: &[u8], path: &Path, mu_floor: T) -> Result<BitBlock<T>> {
    let name = path.display().to_string();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: name.clone(),
        line,
        message,
    };
    let reader = BufReader::new(bytes);
    let mut bits = Vec::new();
    let mut mu = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut fields = body.split_whitespace();
        let bit_str = fields.next().unwrap();
        let mu_str = fields
            .next()
            .ok_or_else(|| parse_err(lineno, "missing mu field".into()))?;
        if fields.next().is_some() {
            return Err(parse_err(lineno, "trailing fields after <bit> <mu>".into()));
        }
        let bit = match bit_str {
            "0" => 0u8,
            "1" => 1u8,
            other => return Err(parse_err(lineno, format!("bit '{other}' outside {{0, 1}}"))),
        };
        let value: f64 = mu_str
            .parse()
            .map_err(|_| parse_err(lineno, format!("mu '{mu_str}' is not a decimal real")))?;
        if !value.is_finite() {
            return Err(parse_err(lineno, format!("mu '{mu_str}' is not finite")));
        }
        bits.push(bit);
        mu.push(T::from_f64_lossy(value));
    }
    if bits.is_empty() {
        return Err(parse_err(0, "zero-length stream".into()));
    }
    BitBlock::new(bits, PriorVector::new(mu, mu_floor)?)
}

fn parse_binary<T: Real>(bytes: &[u8], path: &Path, mu_floor: T) -> Result<BitBlock<T>> {
    let name = path.display().to_string();
    let structural = |message: String| Error::Parse {
        path: name.clone(),
        line: 0,
        message,
    };
    let mut cursor = &bytes[4..];
    let mut count_buf = [0u8; 4];
    cursor
        .read_exact(&mut count_buf)
        .map_err(|_| structural("truncated record count".into()))?;
    let count = u32::from_le_bytes(count_buf) as usize;
    if count == 0 {
        return Err(structural("zero-length stream".into()));
    }
    let mut bits = Vec::with_capacity(count);
    let mut mu = Vec::with_capacity(count);
    for record in 0..count {
        let mut b = [0u8; 1];
        let mut m = [0u8; 8];
        cursor
            .read_exact(&mut b)
            .and_then(|_| cursor.read_exact(&mut m))
            .map_err(|_| structural(format!("truncated record {record}")))?;
        if b[0] > 1 {
            return Err(structural(format!("record {record}: bit outside {{0, 1}}")));
        }
        let value = f64::from_le_bytes(m);
        if !value.is_finite() {
            return Err(structural(format!("record {record}: mu is not finite")));
        }
        bits.push(b[0]);
        mu.push(T::from_f64_lossy(value));
    }
    BitBlock::new(bits, PriorVector::new(mu, mu_floor)?)
}

/// Writes the text format.
pub fn save_text<T: Real>(block: &BitBlock<T>, out: &mut impl Write) -> Result<()> {
    for (&b, &m) in block.bits.iter().zip(block.prior.values()) {
        writeln!(out, "{b}\t{}", m.to_f64().unwrap())?;
    }
    Ok(())
}

/// Writes the binary format.
pub fn save_binary<T: Real>(block: &BitBlock<T>, out: &mut impl Write) -> Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(block.len() as u32).to_le_bytes())?;
    for (&b, &m) in block.bits.iter().zip(block.prior.values()) {
        out.write_all(&[b])?;
        out.write_all(&m.to_f64().unwrap().to_le_bytes())?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
