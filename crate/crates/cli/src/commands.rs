//! Subcommand implementations.
//!
//! Every command is a pure function of `(config, seed)`: randomized outputs
//! embed the seed in a `#` comment header so runs can be replayed, reals
//! are printed with 17 significant digits, and lines end with LF.

use std::fmt::Write as _;
use std::path::Path;

use rateless_uep::bp::{decode, DecodeGraph};
use rateless_uep::broadcast::{
    run_broadcast, sweep, ReceiverProfile, StreamSet, SweepConfig, SweepPoint,
};
use rateless_uep::channel::{
    channel_tanh_mean, demodulate_default, modulate, transmit, ChannelParams, LlrVector,
};
use rateless_uep::design::{
    dkl_upper_bound, psi, reliability, selection_weights, tune_lambda_bracketed,
    PsiEstimator,
};
use rateless_uep::lt::{encode_stream, read_symbol_file, write_symbol_file, GeneratorStream};
use rateless_uep::rng;
use rateless_uep::source::{load_bits_with_priors, BitBlock, SyntheticConfig};
use rateless_uep::{Error, Result, DEFAULT_LLR_CAP};

use crate::config::RunConfig;

const DESIGN_TAG: u64 = 0xD511;
const DECODE_TAG: u64 = 0xDEC0;
const SESSION_TAG: u64 = 0x5E55;
const TRIAL_TAG: u64 = 0x7219;
const SWEEP_TAG: u64 = 0x5EEE;

/// 17 significant digits, enough to reconstruct the double exactly.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn load_source(config: &RunConfig, source: Option<&Path>) -> Result<BitBlock> {
    match source {
        Some(path) => load_bits_with_priors(path, config.mu_floor),
        None => {
            let mut synth =
                SyntheticConfig::new(config.k, config.certainty_low, config.certainty_high);
            synth.mu_floor = config.mu_floor;
            synth.generate(rng::derive(config.seed, 0x50))
        }
    }
}

// ---------------------------------------------------------------------------
// design
// ---------------------------------------------------------------------------

/// Tunes the selection skew and reports the design constraints per channel.
///
/// With no explicit target the tuner aims at the midpoint of the feasible
/// band: the initialization constraint wants the subset statistic large,
/// the per-symbol-information constraint wants it away from one.
pub fn cmd_design(config: &RunConfig, source: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let block = load_source(config, source)?;
    let u = reliability(block.prior());
    let omega = config.degree_distribution()?;
    let estimator = PsiEstimator::MonteCarlo {
        samples: config.psi_samples,
        seed: rng::derive(config.seed, DESIGN_TAG),
    };
    let bracket = (config.lambda_min, config.lambda_max);

    let mut body = String::new();
    let _ = writeln!(body, "# seed = {}", config.seed);
    let _ = writeln!(body, "# k = {}", block.len());
    let _ = writeln!(body, "# eps1 = {}, eps2 = {}", config.eps1, config.eps2);
    let _ = writeln!(
        body,
        "lambda,psi,init_constraint,pinsker_bound,dkl_upper,feasible_eps1,feasible_eps2"
    );

    for &sigma2 in &config.sigma2 {
        if !(sigma2 > 0.0) {
            return Err(Error::Config(format!(
                "design needs positive noise variance, got {sigma2}"
            )));
        }
        let v = channel_tanh_mean(sigma2);
        let reachable_lo = psi(config.lambda_min, &u, &omega, &estimator)?;
        let reachable_hi = psi(config.lambda_max, &u, &omega, &estimator)?;
        let lambda = match config.psi_target {
            Some(target) => {
                tune_lambda_bracketed(&u, &omega, target, config.psi_tol, bracket, &estimator)?
            }
            None => {
                let band_lo = (config.eps1 / v).max(reachable_lo);
                let band_hi = (1.0 - (2.0 * config.eps2).sqrt()).min(reachable_hi);
                if band_lo > band_hi {
                    return Err(Error::Infeasible {
                        message: format!(
                            "constraints leave no feasible psi at sigma2 = {sigma2}: \
                             initialization needs psi > {:.6}, per-symbol information \
                             needs psi < {:.6}",
                            config.eps1 / v,
                            1.0 - (2.0 * config.eps2).sqrt()
                        ),
                        lo: reachable_lo,
                        hi: reachable_hi,
                    });
                }
                let target = 0.5 * (band_lo + band_hi);
                tune_lambda_bracketed(&u, &omega, target, config.psi_tol, bracket, &estimator)?
            }
        };
        let psi_value = psi(lambda, &u, &omega, &estimator)?;
        let init = v * psi_value;
        let pinsker = 0.5 * (psi_value - 1.0) * (psi_value - 1.0);
        let dkl = dkl_upper_bound(&u, &omega, true);
        let _ = writeln!(body, "# sigma2 = {}", real(sigma2));
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{}",
            real(lambda),
            real(psi_value),
            real(init),
            real(pinsker),
            real(dkl),
            init > config.eps1,
            pinsker > config.eps2
        );
    }
    write_text(out, &body)
}

// ---------------------------------------------------------------------------
// encode
// ---------------------------------------------------------------------------

/// Encodes a priors file into a coded-symbol file. Idempotent for a fixed
/// seed: the output is byte-identical across runs.
pub fn cmd_encode(
    config: &RunConfig,
    source: &Path,
    n_flag: Option<usize>,
    out: Option<&Path>,
) -> Result<()> {
    let out = out.ok_or_else(|| Error::Config("encode requires --out".into()))?;
    let block = load_source(config, Some(source))?;
    let k = block.len();
    let omega = config.degree_distribution()?;
    omega.check_stream_len(k)?;
    let weights = selection_weights(&reliability(block.prior()), config.lambda);
    let generator = GeneratorStream::new(config.seed, &omega, &weights, k)?;
    let n = n_flag
        .or_else(|| config.n.as_ref().and_then(|list| list.first().copied()))
        .unwrap_or(2 * k);
    let (bits, _) = encode_stream(&block, &generator, n)?;
    let mut buf = Vec::new();
    write_symbol_file(&mut buf, k, config.seed, &bits)?;
    std::fs::write(out, buf)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// decode
// ---------------------------------------------------------------------------

/// Rebuilds the encoder's graph from the symbol-file seed, runs the coded
/// bits through the configured channel, decodes, and emits marginals.
///
/// `sigma2 = 0` means a noiseless channel: LLRs are pinned at the cap.
pub fn cmd_decode(
    config: &RunConfig,
    symbols: &Path,
    priors: &Path,
    out: Option<&Path>,
    trace: bool,
) -> Result<()> {
    let file = read_symbol_file(symbols)?;
    let block = load_bits_with_priors(priors, config.mu_floor)?;
    if file.k != block.len() {
        return Err(Error::Structural(format!(
            "symbol file was encoded for k = {} but priors have k = {}",
            file.k,
            block.len()
        )));
    }
    let omega = config.degree_distribution()?;
    omega.check_stream_len(file.k)?;
    let weights = selection_weights(&reliability(block.prior()), config.lambda);
    let generator = GeneratorStream::new(file.seed, &omega, &weights, file.k)?;
    let specs = rateless_uep::lt::rebuild_graph(&generator, file.bits.len());

    let sigma2 = config.sigma2[0];
    let llr = if sigma2 == 0.0 {
        LlrVector::from_raw(
            file.bits
                .iter()
                .map(|&b| if b == 0 { DEFAULT_LLR_CAP } else { -DEFAULT_LLR_CAP })
                .collect(),
            DEFAULT_LLR_CAP,
        )
    } else {
        let params = ChannelParams::new(sigma2, rng::derive(config.seed, DECODE_TAG))?;
        let received = transmit(&modulate::<f64>(&file.bits), &params);
        demodulate_default(&received, sigma2)
    };
    let eta = config
        .eta
        .as_ref()
        .and_then(|list| list.first().copied())
        .unwrap_or(10.0);
    let graph = DecodeGraph::new(&specs, llr, block.prior().clone())?;
    let result = decode(&graph, eta, None)?;

    let mut body = String::new();
    let _ = writeln!(body, "# seed = {}", config.seed);
    let _ = writeln!(body, "# sigma2 = {}", real(sigma2));
    let _ = writeln!(body, "# eta = {}", real(eta));
    let _ = writeln!(body, "index,marginal,p1");
    for (i, (m, p)) in result.marginals.iter().zip(&result.soft_bits).enumerate() {
        let _ = writeln!(body, "{i},{},{}", real(*m), real(*p));
    }
    let _ = writeln!(body, "# op_count = {}", result.ops.total());
    write_text(out, &body)?;

    if trace {
        let mut t = String::new();
        let _ = writeln!(t, "# seed = {}", config.seed);
        let _ = writeln!(t, "iteration,mean_input_msg,mean_output_msg,op_count_cum");
        let per_iter = result.ops_per_iteration();
        for l in 0..result.iterations_run {
            let _ = writeln!(
                t,
                "{},{},{},{}",
                l + 1,
                real(result.message_mean_trace[l + 1]),
                real(result.output_message_mean_trace[l]),
                (l as u64 + 1) * per_iter
            );
        }
        match out {
            Some(path) => {
                let mut trace_path = path.as_os_str().to_owned();
                trace_path.push(".trace.csv");
                std::fs::write(trace_path, t)?;
            }
            None => print!("{t}"),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// One broadcast session over the configured receiver list; per-receiver
/// records.
pub fn cmd_simulate(config: &RunConfig, out: Option<&Path>) -> Result<()> {
    let omega = config.degree_distribution()?;
    let table = config.scaling_table()?;
    let mut synth = SyntheticConfig::new(config.k, config.certainty_low, config.certainty_high);
    synth.mu_floor = config.mu_floor;
    let blocks = (0..config.c)
        .map(|j| synth.generate(rng::derive(rng::derive(config.seed, SESSION_TAG), j as u64)))
        .collect::<Result<Vec<_>>>()?;
    let streams = StreamSet::new(blocks, &omega, config.lambda, config.seed)?;

    let pick = |list: &[f64], i: usize| list[i.min(list.len() - 1)];
    let receivers = config
        .sigma2
        .iter()
        .enumerate()
        .map(|(i, &sigma2)| {
            ReceiverProfile::new(
                sigma2,
                pick(&config.alpha, i),
                pick(&config.beta, i),
                &table,
                rng::derive(config.seed, 100 + i as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let outcome = run_broadcast(
        &streams,
        &receivers,
        config.max_symbols,
        rng::derive(config.seed, TRIAL_TAG),
    )?;

    let mut body = String::new();
    let _ = writeln!(body, "# seed = {}", config.seed);
    let _ = writeln!(body, "# total_transmitted = {}", outcome.total_transmitted);
    let _ = writeln!(
        body,
        "receiver,sigma2,snr_db,alpha,beta,gamma,eta,n,iterations,ber,soft_distortion,ops,\
         bits_per_source_bit,ops_per_source_bit,side_info_bits,truncated"
    );
    for r in &outcome.records {
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.receiver,
            real(r.sigma2),
            real(10.0 * (1.0 / r.sigma2).log10()),
            real(r.alpha),
            real(r.beta),
            real(r.gamma),
            real(r.eta),
            r.bits_received,
            r.iterations,
            real(r.ber),
            real(r.soft_distortion),
            r.ops,
            real(r.bits_per_source_bit),
            real(r.ops_per_source_bit),
            real(r.side_info_bits),
            r.truncated
        );
    }
    write_text(out, &body)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

/// Trial-averaged rate/complexity/distortion table over the configured
/// grid.
pub fn cmd_sweep(config: &RunConfig, out: Option<&Path>) -> Result<()> {
    let omega = config.degree_distribution()?;
    let table = config.scaling_table()?;
    let mut synth = SyntheticConfig::new(config.k, config.certainty_low, config.certainty_high);
    synth.mu_floor = config.mu_floor;

    let n_axis: Vec<Option<usize>> = match &config.n {
        Some(list) => list.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let eta_axis: Vec<Option<f64>> = match &config.eta {
        Some(list) => list.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut points = Vec::new();
    for &sigma2 in &config.sigma2 {
        if !(sigma2 > 0.0) {
            return Err(Error::Config(format!(
                "sweep needs positive noise variance, got {sigma2}"
            )));
        }
        for &alpha in &config.alpha {
            for &beta in &config.beta {
                for &n_override in &n_axis {
                    for &eta_override in &eta_axis {
                        points.push(SweepPoint {
                            sigma2,
                            alpha,
                            beta,
                            n_override,
                            eta_override,
                        });
                    }
                }
            }
        }
    }

    let sweep_config = SweepConfig {
        synth,
        streams: config.c,
        omega,
        lambda: config.lambda,
        table,
        max_symbols: config.max_symbols,
        seed: rng::derive(config.seed, SWEEP_TAG),
    };
    let rows = sweep(&sweep_config, &points, config.trials)?;

    let mut body = String::new();
    let _ = writeln!(body, "# seed = {}", config.seed);
    let _ = writeln!(
        body,
        "sigma2,snr_db,alpha,beta,gamma,eta,n_total,ber_mean,ber_stderr,\
         soft_distortion_mean,ops_mean,bits_per_source_bit,ops_per_source_bit,trials"
    );
    for row in &rows {
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            real(row.sigma2),
            real(row.snr_db),
            real(row.alpha),
            real(row.beta),
            real(row.gamma),
            real(row.eta),
            real(row.n_total),
            real(row.ber_mean),
            real(row.ber_stderr),
            real(row.soft_distortion_mean),
            real(row.ops_mean),
            real(row.bits_per_source_bit),
            real(row.ops_per_source_bit),
            row.trials
        );
    }
    write_text(out, &body)
}
