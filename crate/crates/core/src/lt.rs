//! Seeded LT encoding.
//!
//! Each coded symbol is formed by sampling a degree `d` from the degree
//! distribution, drawing `d` distinct message indices without replacement
//! under the selection weights, and XOR-ing the selected bits. All
//! randomness is counter-addressed by `(seed, symbol_index)`, so any symbol
//! can be regenerated in isolation and a decoder holding the same seed
//! rebuilds the identical bipartite graph without seeing the data.
//!
//! Index subsets are drawn by perturbing the log-weights with Gumbel noise
//! and keeping the top `d` keys, the exact sampling counterpart of the
//! relaxed top-d masks used for differentiable training of such codes.

use std::io::{Read, Write};
use std::path::Path;

use crate::design::{DegreeDistribution, SelectionWeights};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::rng;
use crate::source::BitBlock;

// ---------------------------------------------------------------------------
// Coded symbol specification
// ---------------------------------------------------------------------------

/// One LT output symbol: which inputs it combines and its position in the
/// stream (the counter its randomness derives from).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedSymbolSpec {
    pub symbol_index: u64,
    /// Distinct input indices, sorted ascending.
    pub indices: Vec<u32>,
}

impl CodedSymbolSpec {
    pub fn degree(&self) -> usize {
        self.indices.len()
    }

    /// Structural validity against a stream of length `k`.
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::Structural("coded symbol has degree 0".into()));
        }
        for w in self.indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Structural(
                    "symbol indices must be sorted and distinct".into(),
                ));
            }
        }
        if self.indices.last().map(|&i| i as usize >= k) == Some(true) {
            return Err(Error::Structural(format!(
                "symbol index {} out of range for k = {k}",
                self.indices.last().unwrap()
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Sampling primitives
// ---------------------------------------------------------------------------

/// Inverse-CDF categorical draw; returns a 1-based degree.
pub fn inverse_cdf_degree(cdf: &[f64], u: f64) -> usize {
    for (i, &c) in cdf.iter().enumerate() {
        if u <= c {
            return i + 1;
        }
    }
    cdf.len()
}

/// Weighted sampling of `d` distinct indices without replacement: each
/// base key (a log-weight) is perturbed by fresh Gumbel noise and the `d`
/// largest keys win, a draw from the size-`d` Plackett–Luce law. The
/// selection is written sorted into `out`.
pub fn gumbel_top_d(
    stream: &mut rng::Stream,
    base_keys: &[f64],
    d: usize,
    out: &mut Vec<usize>,
) {
    let k = base_keys.len();
    debug_assert!(d >= 1 && d <= k);
    out.clear();
    if d == k {
        out.extend(0..k);
        return;
    }
    let mut keyed: Vec<(f64, usize)> = base_keys
        .iter()
        .enumerate()
        .map(|(i, &b)| (b + rng::gumbel(stream), i))
        .collect();
    keyed.select_nth_unstable_by(d - 1, |a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    out.extend(keyed[..d].iter().map(|&(_, i)| i));
    out.sort_unstable();
}

// ---------------------------------------------------------------------------
// Generator stream
// ---------------------------------------------------------------------------

/// Deterministic source of coded-symbol specifications.
///
/// Two streams built from the same `(seed, omega, weights, k)` produce
/// identical specification sequences; this is the contract that lets the
/// decoder rebuild the encoder's graph. Sampling is carried out in `f64`
/// regardless of the scalar type the design quantities were computed in,
/// so the graph does not depend on the numeric precision of the pipeline.
#[derive(Debug, Clone)]
pub struct GeneratorStream {
    seed: u64,
    k: usize,
    degree_cdf: Vec<f64>,
    selection_keys: Vec<f64>,
}

impl GeneratorStream {
    pub fn new<T: Real>(
        seed: u64,
        omega: &DegreeDistribution<T>,
        weights: &SelectionWeights<T>,
        k: usize,
    ) -> Result<Self> {
        if weights.len() != k {
            return Err(Error::Structural(format!(
                "weight count {} does not match stream length {k}",
                weights.len()
            )));
        }
        omega.check_stream_len(k)?;
        let degree_cdf = omega.cdf().iter().map(|c| c.to_f64().unwrap()).collect();
        let selection_keys = weights
            .rho()
            .iter()
            .map(|&r| r.to_f64().unwrap().ln())
            .collect();
        Ok(Self {
            seed,
            k,
            degree_cdf,
            selection_keys,
        })
    }

    /// Uniform selection, any degree profile.
    pub fn uniform<T: Real>(
        seed: u64,
        omega: &DegreeDistribution<T>,
        k: usize,
    ) -> Result<Self> {
        Self::new(seed, omega, &SelectionWeights::<T>::uniform(k), k)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The specification of symbol `symbol_index`, independent of every
    /// other symbol.
    pub fn spec_at(&self, symbol_index: u64) -> CodedSymbolSpec {
        let mut stream = rng::at(self.seed, symbol_index);
        let d = inverse_cdf_degree(&self.degree_cdf, rng::uniform_open(&mut stream));
        let mut out = Vec::with_capacity(d);
        gumbel_top_d(&mut stream, &self.selection_keys, d, &mut out);
        CodedSymbolSpec {
            symbol_index,
            indices: out.into_iter().map(|i| i as u32).collect(),
        }
    }

    /// First `n` specifications; a prefix of any longer run.
    pub fn specs(&self, n: usize) -> Vec<CodedSymbolSpec> {
        (0..n as u64).map(|i| self.spec_at(i)).collect()
    }
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

/// XOR of the selected message bits.
pub fn encode_symbol<T: Real>(block: &BitBlock<T>, spec: &CodedSymbolSpec) -> Result<u8> {
    spec.validate(block.len())?;
    let bits = block.bits();
    Ok(spec
        .indices
        .iter()
        .fold(0u8, |acc, &i| acc ^ bits[i as usize]))
}

/// First `n` coded bits with their specifications.
pub fn encode_stream<T: Real>(
    block: &BitBlock<T>,
    generator: &GeneratorStream,
    n: usize,
) -> Result<(Vec<u8>, Vec<CodedSymbolSpec>)> {
    if generator.k() != block.len() {
        return Err(Error::Structural(format!(
            "generator built for k = {} but block has {} bits",
            generator.k(),
            block.len()
        )));
    }
    let specs = generator.specs(n);
    let mut bits = Vec::with_capacity(n);
    for spec in &specs {
        bits.push(encode_symbol(block, spec)?);
    }
    Ok((bits, specs))
}

/// Decoder-side reconstruction of the same specifications without bit
/// access.
pub fn rebuild_graph(generator: &GeneratorStream, n: usize) -> Vec<CodedSymbolSpec> {
    generator.specs(n)
}

// ---------------------------------------------------------------------------
// Coded-symbol file
// ---------------------------------------------------------------------------

const SYMBOL_MAGIC: &[u8; 4] = b"NLTS";

/// Writes `magic, k, seed, n`, then the coded bits packed LSB-first.
pub fn write_symbol_file(
    out: &mut impl Write,
    k: usize,
    seed: u64,
    bits: &[u8],
) -> Result<()> {
    out.write_all(SYMBOL_MAGIC)?;
    out.write_all(&(k as u32).to_le_bytes())?;
    out.write_all(&seed.to_le_bytes())?;
    out.write_all(&(bits.len() as u32).to_le_bytes())?;
    let mut packed = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        packed[i / 8] |= (b & 1) << (i % 8);
    }
    out.write_all(&packed)?;
    Ok(())
}

/// Parsed contents of a coded-symbol file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolFile {
    pub k: usize,
    pub seed: u64,
    pub bits: Vec<u8>,
}

pub fn read_symbol_file(path: &Path) -> Result<SymbolFile> {
    let bytes = std::fs::read(path)?;
    let structural = |message: String| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        message,
    };
    let mut cursor = bytes.as_slice();
    let mut magic = [0u8; 4];
    cursor
        .read_exact(&mut magic)
        .map_err(|_| structural("truncated header".into()))?;
    if &magic != SYMBOL_MAGIC {
        return Err(structural("bad magic, expected NLTS".into()));
    }
    let mut k4 = [0u8; 4];
    let mut s8 = [0u8; 8];
    let mut n4 = [0u8; 4];
    cursor
        .read_exact(&mut k4)
        .and_then(|_| cursor.read_exact(&mut s8))
        .and_then(|_| cursor.read_exact(&mut n4))
        .map_err(|_| structural("truncated header".into()))?;
    let k = u32::from_le_bytes(k4) as usize;
    let seed = u64::from_le_bytes(s8);
    let n = u32::from_le_bytes(n4) as usize;
    let mut packed = vec![0u8; n.div_ceil(8)];
    cursor
        .read_exact(&mut packed)
        .map_err(|_| structural(format!("truncated payload, expected {n} symbols")))?;
    let bits = (0..n).map(|i| (packed[i / 8] >> (i % 8)) & 1).collect();
    Ok(SymbolFile { k, seed, bits })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::selection_weights;
    use crate::source::{PriorVector, SyntheticConfig};

    fn block(bits: Vec<u8>) -> BitBlock {
        let prior = PriorVector::new(vec![1.0; bits.len()], 0.0).unwrap();
        BitBlock::new(bits, prior).unwrap()
    }

    fn uniform_gen(seed: u64, omega: &DegreeDistribution, k: usize) -> GeneratorStream {
        GeneratorStream::uniform(seed, omega, k).unwrap()
    }

    #[test]
    fn point_mass_degree_is_constant() {
        let omega = DegreeDistribution::single(2);
        let gen = uniform_gen(3, &omega, 8);
        for spec in gen.specs(200) {
            assert_eq!(spec.degree(), 2);
        }
    }

    #[test]
    fn uniform_degree_frequencies() {
        let omega =
            DegreeDistribution::from_pairs(&[(1, 0.25), (2, 0.25), (3, 0.25), (4, 0.25)])
                .unwrap();
        let gen = uniform_gen(11, &omega, 16);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for spec in gen.specs(n) {
            counts[spec.degree() - 1] += 1;
        }
        let se = (0.25 * 0.75 / n as f64).sqrt();
        for &c in &counts {
            let freq = c as f64 / n as f64;
            assert!((freq - 0.25).abs() < 3.0 * se + 1e-3, "freq {freq}");
        }
    }

    #[test]
    fn replay_is_identical_and_seed_sensitive() {
        let omega = DegreeDistribution::<f64>::default_profile(8).unwrap();
        let a = uniform_gen(21, &omega, 64).specs(10_000);
        let b = uniform_gen(21, &omega, 64).specs(10_000);
        assert_eq!(a, b);

        let c = uniform_gen(22, &omega, 64).specs(1_000);
        let differing = a
            .iter()
            .take(1_000)
            .zip(&c)
            .filter(|(x, y)| x.indices != y.indices)
            .count();
        assert!(differing > 900, "only {differing} specs differ across seeds");
    }

    #[test]
    fn prefix_property() {
        let omega = DegreeDistribution::<f64>::default_profile(8).unwrap();
        let gen = uniform_gen(5, &omega, 32);
        let long = gen.specs(500);
        let short = gen.specs(120);
        assert_eq!(&long[..120], &short[..]);
    }

    #[test]
    fn full_degree_selects_everything() {
        let omega = DegreeDistribution::single(5);
        let weights = selection_weights(&[0.0, 0.1, 0.9, 0.2, 0.5], 10.0);
        let gen = GeneratorStream::new(9, &omega, &weights, 5).unwrap();
        for spec in gen.specs(50) {
            assert_eq!(spec.indices, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn degree_one_frequencies_follow_weights() {
        let omega = DegreeDistribution::single(1);
        let rho = [0.9f64, 0.05, 0.05];
        // ln-weights proportional to the target law give a categorical draw.
        let u = [rho[0].ln(), rho[1].ln(), rho[2].ln()];
        let weights = selection_weights(&u, 1.0);
        for (r, w) in rho.iter().zip(weights.rho()) {
            assert!((r - w).abs() < 1e-12);
        }
        let gen = GeneratorStream::new(13, &omega, &weights, 3).unwrap();
        let n = 100_000;
        let mut count0 = 0usize;
        for spec in gen.specs(n) {
            if spec.indices[0] == 0 {
                count0 += 1;
            }
        }
        let freq = count0 as f64 / n as f64;
        let se = (0.9 * 0.1 / n as f64).sqrt();
        assert!((freq - 0.9).abs() < 3.0 * se + 1e-3, "freq {freq}");
    }

    #[test]
    fn uniform_degree_one_index_frequencies() {
        let omega = DegreeDistribution::single(1);
        let k = 8;
        let gen = uniform_gen(17, &omega, k);
        let n = 100_000;
        let mut counts = vec![0usize; k];
        for spec in gen.specs(n) {
            counts[spec.indices[0] as usize] += 1;
        }
        let p = 1.0 / k as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        for &c in &counts {
            assert!((c as f64 / n as f64 - p).abs() < 3.0 * se + 1e-3);
        }
    }

    #[test]
    fn degree_law_chi_square() {
        // Goodness of fit at significance 1e-3; the critical value comes
        // from the Wilson-Hilferty cube approximation of the chi-square
        // quantile (z_{0.999} = 3.090232).
        let omega = DegreeDistribution::<f64>::default_profile(12).unwrap();
        let gen = uniform_gen(23, &omega, 64);
        let n = 100_000usize;
        let mut counts = vec![0usize; omega.d_max()];
        for spec in gen.specs(n) {
            counts[spec.degree() - 1] += 1;
        }
        let mut statistic = 0.0f64;
        let mut df = 0usize;
        for (i, &c) in counts.iter().enumerate() {
            let expected = omega.prob(i + 1) * n as f64;
            if expected < 5.0 {
                continue; // merge-below-5 rule; tiny cells skipped
            }
            statistic += (c as f64 - expected).powi(2) / expected;
            df += 1;
        }
        df -= 1;
        let z = 3.090_232f64;
        let d = df as f64;
        let critical = d * (1.0 - 2.0 / (9.0 * d) + z * (2.0 / (9.0 * d)).sqrt()).powi(3);
        assert!(
            statistic < critical,
            "chi-square {statistic:.2} exceeds critical {critical:.2} at df {df}"
        );
    }

    #[test]
    fn empirical_mean_degree_matches_omega() {
        let omega = DegreeDistribution::<f64>::default_profile(12).unwrap();
        let gen = uniform_gen(29, &omega, 64);
        let n = 100_000;
        let degrees: Vec<f64> = gen.specs(n).iter().map(|s| s.degree() as f64).collect();
        let mean = degrees.iter().sum::<f64>() / n as f64;
        let var = degrees.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64;
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - omega.mean_degree()).abs() < 3.0 * se + 1e-3,
            "mean degree {mean} vs {}",
            omega.mean_degree()
        );
    }

    #[test]
    fn xor_encoding() {
        let b = block(vec![1, 0, 1]);
        let one = CodedSymbolSpec {
            symbol_index: 0,
            indices: vec![0],
        };
        assert_eq!(encode_symbol(&b, &one).unwrap(), 1);
        let all = CodedSymbolSpec {
            symbol_index: 1,
            indices: vec![0, 1, 2],
        };
        assert_eq!(encode_symbol(&b, &all).unwrap(), 0);

        let zeros = block(vec![0; 3]);
        assert_eq!(encode_symbol(&zeros, &all).unwrap(), 0);

        let bad = CodedSymbolSpec {
            symbol_index: 2,
            indices: vec![0, 7],
        };
        assert!(encode_symbol(&b, &bad).is_err());
    }

    #[test]
    fn encoding_is_linear() {
        let omega = DegreeDistribution::<f64>::default_profile(6).unwrap();
        let gen = uniform_gen(41, &omega, 24);
        let b1 = SyntheticConfig::<f64>::new(24, 0.5, 3.0).generate(1).unwrap();
        let b2 = SyntheticConfig::<f64>::new(24, 0.5, 3.0).generate(2).unwrap();
        let xor_bits: Vec<u8> = b1
            .bits()
            .iter()
            .zip(b2.bits())
            .map(|(a, b)| a ^ b)
            .collect();
        let bx = block(xor_bits);
        let (e1, _) = encode_stream(&b1, &gen, 300).unwrap();
        let (e2, _) = encode_stream(&b2, &gen, 300).unwrap();
        let (ex, _) = encode_stream(&bx, &gen, 300).unwrap();
        for i in 0..300 {
            assert_eq!(ex[i], e1[i] ^ e2[i]);
        }
    }

    #[test]
    fn empty_stream() {
        let omega = DegreeDistribution::<f64>::default_profile(4).unwrap();
        let gen = uniform_gen(1, &omega, 8);
        let b = block(vec![0; 8]);
        let (bits, specs) = encode_stream(&b, &gen, 0).unwrap();
        assert!(bits.is_empty() && specs.is_empty());
    }

    #[test]
    fn decoder_rebuilds_encoder_graph() {
        let omega = DegreeDistribution::<f64>::default_profile(10).unwrap();
        let gen = uniform_gen(77, &omega, 128);
        let b = SyntheticConfig::<f64>::new(128, 0.5, 3.0).generate(4).unwrap();
        let (_, enc_specs) = encode_stream(&b, &gen, 10_000).unwrap();
        let dec_specs = rebuild_graph(&gen, 10_000);
        assert_eq!(enc_specs, dec_specs);
    }

    #[test]
    fn symbol_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stream.nlts");
        let bits: Vec<u8> = (0..37).map(|i| (i % 3 == 0) as u8).collect();
        let mut buf = Vec::new();
        write_symbol_file(&mut buf, 64, 0xDEAD_BEEF, &bits).unwrap();
        std::fs::write(&path, &buf).unwrap();
        let parsed = read_symbol_file(&path).unwrap();
        assert_eq!(parsed.k, 64);
        assert_eq!(parsed.seed, 0xDEAD_BEEF);
        assert_eq!(parsed.bits, bits);

        std::fs::write(&path, b"JUNKxxxx").unwrap();
        assert!(read_symbol_file(&path).is_err());
    }

    #[test]
    fn header_only_file() {
        let mut buf = Vec::new();
        write_symbol_file(&mut buf, 16, 5, &[]).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 8 + 4);
    }
}
