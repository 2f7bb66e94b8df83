//! Design quantities for prior-guided selection.
//!
//! The encoder biases which message bits enter each coded symbol through
//! selection weights `rho_i ∝ exp(lambda U_i)`, where `U_i` is a per-bit
//! reliability statistic derived from the prior magnitude. The skew
//! parameter `lambda` is tuned through the monotone statistic
//!
//! ```text
//! Psi(lambda) = E_{omega(d)} E_{S_d} prod_{j in S_d} U_j
//! ```
//!
//! which must sit between two thresholds: `V * Psi > eps1` (confident
//! decoder initialization, with `V` the channel tanh mean) and
//! `(Psi - 1)^2 / 2 > eps2` (each coded symbol still carries information
//! beyond the priors). This module computes `U`, the weights, `Psi` by Monte
//! Carlo or exact enumeration, the two constraint values, and two
//! divergence-style diagnostics that bracket them on small instances.
//!
//! Degree expectations here are taken under the edge-degree distribution
//! `omega(d) ∝ d * Omega(d)`.

use crate::error::{Error, Result};
use crate::lt;
use crate::num::Real;
use crate::rng;
use crate::source::{flip_priors, BitBlock, PriorVector};

/// Largest stream length for which exact subset enumeration is attempted.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 12;

/// Stability floor on Omega(2) from the ripple analysis of LT codes.
pub const OMEGA2_STABILITY_FLOOR: f64 = 0.360_673_760_222_240_9; // 1/ln(16)

// ---------------------------------------------------------------------------
// Degree distribution
// ---------------------------------------------------------------------------

/// Probability law over coded-symbol degrees `1..=d_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution<T: Real = f64> {
    omega: Vec<T>,
}

impl<T: Real> DegreeDistribution<T> {
    /// Builds from `omega[d-1] = Omega(d)`; validates nonnegativity and
    /// normalization, then renormalizes exactly.
    pub fn new(omega: Vec<T>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::Config("degree distribution is empty".into()));
        }
        let mut sum = T::zero();
        for (i, &p) in omega.iter().enumerate() {
            if !(p >= T::zero()) || !p.is_finite() {
                return Err(Error::Config(format!(
                    "Omega({}) = {p} is not a probability",
                    i + 1
                )));
            }
            sum += p;
        }
        let tol = T::from_f64_lossy(1e-12).max(T::epsilon() * T::from_f64_lossy(64.0));
        if (sum - T::one()).abs() > tol {
            return Err(Error::Config(format!(
                "degree probabilities sum to {sum}, expected 1"
            )));
        }
        let omega = omega.into_iter().map(|p| p / sum).collect();
        Ok(Self { omega })
    }

    /// Builds from sparse `(degree, probability)` pairs.
    pub fn from_pairs(pairs: &[(usize, T)]) -> Result<Self> {
        let d_max = pairs
            .iter()
            .map(|&(d, _)| d)
            .max()
            .ok_or_else(|| Error::Config("degree distribution is empty".into()))?;
        if pairs.iter().any(|&(d, _)| d == 0) {
            return Err(Error::Config("degree 0 is not allowed".into()));
        }
        let mut omega = vec![T::zero(); d_max];
        for &(d, p) in pairs {
            omega[d - 1] += p;
        }
        Self::new(omega)
    }

    /// A point mass on a single degree.
    pub fn single(d: usize) -> Self {
        assert!(d >= 1);
        let mut omega = vec![T::zero(); d];
        omega[d - 1] = T::one();
        Self { omega }
    }

    /// Default soliton-like profile: light degree-1 mass for decoder
    /// startup, a degree-2 bulk above the stability floor, a `1/(d(d-1))`
    /// body, and a spike at `d_max` for coverage.
    pub fn default_profile(d_max: usize) -> Result<Self> {
        if d_max < 3 {
            return Err(Error::Config(format!(
                "default profile needs d_max >= 3, got {d_max}"
            )));
        }
        let mut omega = vec![0.0f64; d_max];
        omega[0] = 0.03;
        omega[1] = 0.42;
        let spike = 0.12;
        omega[d_max - 1] = spike;
        let body: f64 = (3..d_max).map(|d| 1.0 / (d * (d - 1)) as f64).sum();
        let remaining = 1.0 - 0.03 - 0.42 - spike;
        if body > 0.0 {
            for d in 3..d_max {
                omega[d - 1] = remaining / (d * (d - 1)) as f64 / body;
            }
        } else {
            omega[d_max - 1] += remaining;
        }
        let dist = Self::new(omega.into_iter().map(T::from_f64_lossy).collect())?;
        dist.check_stability()?;
        Ok(dist)
    }

    /// Enforces the `Omega(2) > 1/ln(16)` ripple-stability floor.
    pub fn check_stability(&self) -> Result<()> {
        let omega2 = self.omega.get(1).copied().unwrap_or_else(T::zero);
        if omega2 <= T::from_f64_lossy(OMEGA2_STABILITY_FLOOR) {
            return Err(Error::Config(format!(
                "Omega(2) = {omega2} does not exceed the stability floor 1/ln(16)"
            )));
        }
        Ok(())
    }

    /// Rejects distributions whose maximum degree exceeds the stream length.
    pub fn check_stream_len(&self, k: usize) -> Result<()> {
        if self.d_max() > k {
            return Err(Error::Config(format!(
                "d_max {} exceeds stream length {k}",
                self.d_max()
            )));
        }
        Ok(())
    }

    pub fn d_max(&self) -> usize {
        self.omega.len()
    }

    /// `Omega(d)`; zero outside `1..=d_max`.
    pub fn prob(&self, d: usize) -> T {
        if d == 0 || d > self.omega.len() {
            T::zero()
        } else {
            self.omega[d - 1]
        }
    }

    pub fn probs(&self) -> &[T] {
        &self.omega
    }

    /// Mean symbol degree `sum d Omega(d)`.
    pub fn mean_degree(&self) -> T {
        self.omega
            .iter()
            .enumerate()
            .map(|(i, &p)| T::from_f64_lossy((i + 1) as f64) * p)
            .sum()
    }

    /// Edge-degree law `omega(d) = d Omega(d) / sum d' Omega(d')`.
    pub fn edge_degree(&self) -> DegreeDistribution<T> {
        let mean = self.mean_degree();
        let omega = self
            .omega
            .iter()
            .enumerate()
            .map(|(i, &p)| T::from_f64_lossy((i + 1) as f64) * p / mean)
            .collect();
        DegreeDistribution { omega }
    }

    /// Cumulative law for inverse-CDF sampling.
    pub fn cdf(&self) -> Vec<T> {
        let mut acc = T::zero();
        self.omega
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Reliability and selection weights
// ---------------------------------------------------------------------------

/// Per-bit reliability `U_i = [2 sigmoid(|mu_i|) - 1] tanh(|mu_i|/2)`,
/// the mean of `tanh(mu~_i / 2)` under the wrong-side law of the flipped
/// prior. Values lie in [0, 1) and are even in `mu_i`.
pub fn reliability<T: Real>(prior: &PriorVector<T>) -> Vec<T> {
    prior.values().iter().map(|&m| reliability_one(m)).collect()
}

fn reliability_one<T: Real>(mu: T) -> T {
    let a = mu.abs();
    let two = T::from_f64_lossy(2.0);
    (two * a.sigmoid() - T::one()) * (a / two).tanh()
}

/// Reliability vector paired with the channel statistic it is judged
/// against.
#[derive(Debug, Clone)]
pub struct ReliabilityProfile<T: Real = f64> {
    pub u: Vec<T>,
    pub v_channel: T,
}

impl<T: Real> ReliabilityProfile<T> {
    pub fn new(prior: &PriorVector<T>, sigma2: T) -> Self {
        Self {
            u: reliability(prior),
            v_channel: crate::channel::channel_tanh_mean(sigma2),
        }
    }
}

/// Normalized selection weights `rho_i ∝ exp(lambda U_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionWeights<T: Real = f64> {
    rho: Vec<T>,
    lambda: T,
}

impl<T: Real> SelectionWeights<T> {
    pub fn uniform(k: usize) -> Self {
        let w = T::one() / T::from_f64_lossy(k as f64);
        Self {
            rho: vec![w; k],
            lambda: T::zero(),
        }
    }

    pub fn rho(&self) -> &[T] {
        &self.rho
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Log-weights for the without-replacement sampler; normalization
    /// cancels there, so these are just `lambda U_i - max`.
    pub fn ln_rho(&self) -> Vec<T> {
        self.rho.iter().map(|&r| r.ln()).collect()
    }
}

/// Exponentially tilted weights; `lambda = 0` gives the uniform law.
/// Shift-invariant in `U` because the maximum is subtracted before
/// exponentiation.
pub fn selection_weights<T: Real>(u: &[T], lambda: T) -> SelectionWeights<T> {
    assert!(!u.is_empty(), "selection weights need at least one bit");
    let max = u.iter().cloned().fold(T::neg_infinity(), T::max);
    let mut rho: Vec<T> = u.iter().map(|&ui| (lambda * (ui - max)).exp()).collect();
    let z: T = rho.iter().cloned().sum();
    for r in &mut rho {
        *r = *r / z;
    }
    SelectionWeights { rho, lambda }
}

// ---------------------------------------------------------------------------
// Psi
// ---------------------------------------------------------------------------

/// How subset expectations are evaluated.
#[derive(Debug, Clone, Copy)]
pub enum PsiEstimator {
    /// Sample degrees from the edge-degree law and subsets with the
    /// without-replacement sampler of the codec; deterministic given the
    /// seed, and common random numbers across `lambda` make the estimate
    /// monotone sample-by-sample.
    MonteCarlo { samples: usize, seed: u64 },
    /// Full enumeration over subsets weighted by `exp(lambda sum U)`.
    /// Only for small streams; the subset law here is the fixed-size
    /// product-weight law rather than the sampler's law.
    Exact { max_k: usize },
}

impl PsiEstimator {
    pub fn exact() -> Self {
        PsiEstimator::Exact {
            max_k: DEFAULT_ENUMERATION_LIMIT,
        }
    }
}

/// `Psi(lambda)`: expected product of reliabilities over a sampled subset.
pub fn psi<T: Real>(
    lambda: T,
    u: &[T],
    omega: &DegreeDistribution<T>,
    estimator: &PsiEstimator,
) -> Result<T> {
    omega.check_stream_len(u.len())?;
    match *estimator {
        PsiEstimator::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::Config("psi needs at least one sample".into()));
            }
            Ok(psi_monte_carlo(lambda, u, omega, samples, seed))
        }
        PsiEstimator::Exact { max_k } => {
            if u.len() > max_k {
                return Err(Error::Config(format!(
                    "exact psi enumeration limited to k <= {max_k}, got {}",
                    u.len()
                )));
            }
            Ok(psi_exact(lambda, u, omega))
        }
    }
}

fn psi_monte_carlo<T: Real>(
    lambda: T,
    u: &[T],
    omega: &DegreeDistribution<T>,
    samples: usize,
    seed: u64,
) -> T {
    let edge_cdf: Vec<f64> = omega
        .edge_degree()
        .cdf()
        .iter()
        .map(|c| c.to_f64().unwrap())
        .collect();
    let keys_base: Vec<f64> = u
        .iter()
        .map(|&ui| lambda.to_f64().unwrap() * ui.to_f64().unwrap())
        .collect();
    let mut selected = Vec::new();
    let mut acc = 0.0f64;
    for s in 0..samples {
        let mut stream = rng::at(seed, s as u64);
        let d = lt::inverse_cdf_degree(&edge_cdf, rng::uniform_open(&mut stream));
        lt::gumbel_top_d(&mut stream, &keys_base, d, &mut selected);
        let prod = selected
            .iter()
            .map(|&i| u[i].to_f64().unwrap())
            .product::<f64>();
        acc += prod;
    }
    T::from_f64_lossy(acc / samples as f64)
}

fn psi_exact<T: Real>(lambda: T, u: &[T], omega: &DegreeDistribution<T>) -> T {
    let uf: Vec<f64> = u.iter().map(|x| x.to_f64().unwrap()).collect();
    let lf = lambda.to_f64().unwrap();
    let edge = omega.edge_degree();
    let mut value = 0.0f64;
    for d in 1..=edge.d_max() {
        let w = edge.prob(d).to_f64().unwrap();
        if w == 0.0 {
            continue;
        }
        // exp is stabilized by the largest attainable sum of U over a
        // d-subset.
        let mut sorted = uf.clone();
        sorted.sort_by(f64::total_cmp);
        let top: f64 = sorted.iter().rev().take(d).sum();
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for_each_subset(uf.len(), d, &mut |subset| {
            let sum: f64 = subset.iter().map(|&i| uf[i]).sum();
            let prod: f64 = subset.iter().map(|&i| uf[i]).product();
            let weight = (lf * (sum - top)).exp();
            num += weight * prod;
            den += weight;
        });
        value += w * num / den;
    }
    T::from_f64_lossy(value)
}

/// Visits all size-`d` index subsets of `0..k` in lexicographic order.
fn for_each_subset(k: usize, d: usize, f: &mut impl FnMut(&[usize])) {
    debug_assert!(d >= 1 && d <= k);
    let mut c: Vec<usize> = (0..d).collect();
    loop {
        f(&c);
        let mut i = d as isize - 1;
        while i >= 0 && c[i as usize] == k - d + i as usize {
            i -= 1;
        }
        if i < 0 {
            return;
        }
        let i = i as usize;
        c[i] += 1;
        for j in i + 1..d {
            c[j] = c[j - 1] + 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Tuning
// ---------------------------------------------------------------------------

const BISECTION_STEPS: usize = 60;

/// Finds `lambda` with `|Psi(lambda) - target| < tol` by bisection over
/// `[0, lambda_max]` with common random numbers.
///
/// Ties break toward the smallest feasible `lambda`; an unreachable target
/// reports the achievable `[Psi(0), Psi(lambda_max)]` interval.
pub fn tune_lambda<T: Real>(
    u: &[T],
    omega: &DegreeDistribution<T>,
    target: T,
    tol: T,
    lambda_max: T,
    estimator: &PsiEstimator,
) -> Result<T> {
    if !(lambda_max > T::zero()) {
        return Err(Error::Config("lambda_max must be positive".into()));
    }
    tune_lambda_bracketed(u, omega, target, tol, (T::zero(), lambda_max), estimator)
}

/// Bisection over an arbitrary bracket. Negative skew is how unreliable
/// bits get selected more often than reliable ones, so brackets reaching
/// below zero are the route to protecting them.
pub fn tune_lambda_bracketed<T: Real>(
    u: &[T],
    omega: &DegreeDistribution<T>,
    target: T,
    tol: T,
    bracket: (T, T),
    estimator: &PsiEstimator,
) -> Result<T> {
    if !(tol > T::zero()) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let (lambda_lo, lambda_hi) = bracket;
    if !(lambda_hi > lambda_lo) {
        return Err(Error::Config(format!(
            "bracket [{lambda_lo}, {lambda_hi}] is empty"
        )));
    }
    let psi_lo = psi(lambda_lo, u, omega, estimator)?;
    if (psi_lo - target).abs() < tol {
        return Ok(lambda_lo);
    }
    let psi_hi = psi(lambda_hi, u, omega, estimator)?;
    if target < psi_lo || target > psi_hi {
        return Err(Error::Infeasible {
            message: format!("psi target {target} outside the reachable range"),
            lo: psi_lo.to_f64().unwrap(),
            hi: psi_hi.to_f64().unwrap(),
        });
    }
    let mut lo = lambda_lo;
    let mut hi = lambda_hi;
    let mut best = (T::infinity(), lambda_hi);
    for _ in 0..BISECTION_STEPS {
        let mid = (lo + hi) / T::from_f64_lossy(2.0);
        let value = psi(mid, u, omega, estimator)?;
        let gap = (value - target).abs();
        if gap < best.0 {
            best = (gap, mid);
        }
        if gap < tol {
            return Ok(mid);
        }
        if value < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.0 < tol {
        Ok(best.1)
    } else {
        Err(Error::Config(format!(
            "bisection stalled: best |psi - target| = {} at lambda = {}",
            best.0, best.1
        )))
    }
}

// ---------------------------------------------------------------------------
// Constraints and bounds
// ---------------------------------------------------------------------------

/// Initialization statistic `V * Psi(lambda)`; compare against `eps1`.
pub fn init_constraint<T: Real>(
    u: &[T],
    omega: &DegreeDistribution<T>,
    lambda: T,
    v_channel: T,
    estimator: &PsiEstimator,
) -> Result<T> {
    Ok(v_channel * psi(lambda, u, omega, estimator)?)
}

/// Pinsker-style lower bound `(Psi - 1)^2 / 2` on per-symbol information;
/// compare against `eps2`.
pub fn pinsker_mi_bound<T: Real>(
    u: &[T],
    omega: &DegreeDistribution<T>,
    lambda: T,
    estimator: &PsiEstimator,
) -> Result<T> {
    let p = psi(lambda, u, omega, estimator)?;
    Ok((p - T::one()) * (p - T::one()) / T::from_f64_lossy(2.0))
}

/// Tractable upper surrogate `4 (E_omega prod_min U - 1)^2`.
///
/// With `min_degree_subsets` set (the deployed form), each degree
/// contributes the product of the `d` smallest reliabilities. With it
/// cleared, the subset product is replaced by its exact mean over uniform
/// subsets (elementary symmetric polynomials), which never exceeds the
/// min-subset form.
pub fn dkl_upper_bound<T: Real>(
    u: &[T],
    omega: &DegreeDistribution<T>,
    min_degree_subsets: bool,
) -> T {
    let edge = omega.edge_degree();
    let d_top = edge.d_max().min(u.len());
    let mut uf: Vec<f64> = u.iter().map(|x| x.to_f64().unwrap()).collect();
    uf.sort_by(f64::total_cmp);

    let per_degree: Vec<f64> = if min_degree_subsets {
        let mut prods = Vec::with_capacity(d_top);
        let mut acc = 1.0f64;
        for &x in uf.iter().take(d_top) {
            acc *= x;
            prods.push(acc);
        }
        prods
    } else {
        // Mean of subset products = e_d(U) / C(k, d) via the elementary
        // symmetric polynomial recurrence.
        let k = uf.len();
        let mut e = vec![0.0f64; d_top + 1];
        e[0] = 1.0;
        for &x in &uf {
            for d in (1..=d_top).rev() {
                e[d] += x * e[d - 1];
            }
        }
        let mut binom = 1.0f64;
        (1..=d_top)
            .map(|d| {
                binom *= (k - d + 1) as f64 / d as f64;
                e[d] / binom
            })
            .collect()
    };

    let avg: f64 = (1..=d_top)
        .map(|d| edge.prob(d).to_f64().unwrap() * per_degree[d - 1])
        .sum();
    T::from_f64_lossy(4.0 * (avg - 1.0) * (avg - 1.0))
}

/// Exact per-symbol divergence oracle for small streams.
///
/// Enumerates every subset under the fixed-size product-weight law
/// `p(S_d) ∝ prod rho_j`, flips the priors by the block's bits, and returns
/// the divergence between the bit-conditioned symbol law and its
/// prior-predicted counterpart in the flipped coordinates:
/// `-ln((1 + E prod tanh(mu~_j / 2)) / 2)`.
pub fn exact_symbol_kl<T: Real>(
    block: &BitBlock<T>,
    omega: &DegreeDistribution<T>,
    weights: &SelectionWeights<T>,
    max_k: usize,
) -> Result<T> {
    let k = block.len();
    if k > max_k {
        return Err(Error::Config(format!(
            "exact divergence enumeration limited to k <= {max_k}, got {k}"
        )));
    }
    if weights.len() != k {
        return Err(Error::Structural(format!(
            "weight count {} does not match stream length {k}",
            weights.len()
        )));
    }
    omega.check_stream_len(k)?;

    let flipped = flip_priors(block);
    let tanhs: Vec<f64> = flipped
        .values()
        .iter()
        .map(|&m| (m.to_f64().unwrap() / 2.0).tanh())
        .collect();
    let ln_rho: Vec<f64> = weights
        .rho()
        .iter()
        .map(|&r| r.to_f64().unwrap().ln())
        .collect();

    let edge = omega.edge_degree();
    let mut mean = 0.0f64;
    for d in 1..=edge.d_max() {
        let w = edge.prob(d).to_f64().unwrap();
        if w == 0.0 {
            continue;
        }
        let mut keyed = ln_rho.clone();
        keyed.sort_by(f64::total_cmp);
        let top: f64 = keyed.iter().rev().take(d).sum();
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for_each_subset(k, d, &mut |subset| {
            let key: f64 = subset.iter().map(|&i| ln_rho[i]).sum();
            let prod: f64 = subset.iter().map(|&i| tanhs[i]).product();
            let weight = (key - top).exp();
            num += weight * prod;
            den += weight;
        });
        mean += w * num / den;
    }
    Ok(T::from_f64_lossy(-(0.5 * (1.0 + mean)).ln()))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
