//! End-to-end frame pipelines for the DISC, SIR and DF schemes: per-scheme
//! relay processing, the joint BCJR MAP destination decoder for the
//! distributed rate-1/K codeword, and MRC combining for SIR.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    bpsk_modulate, draw_realization, transmit, ChannelMode, ChannelRealization, LinkBudget,
};
use crate::code_algebra::{
    is_noncatastrophic, CodeEnsemble, GeneratorSequence, JointTrellis, PairingAssignment,
};
use crate::soft_coding::{
    encoder_output_stats, encoder_output_stats_empirical, llr_bpsk, sbe_from_llr, sbe_noise_stats,
    siso_encode,
    EncoderOutputStats, SbeNoiseStats,
};

#[derive(Debug, Error)]
pub enum RelayError {
    #[error("scheme requires a noncatastrophic ensemble")]
    CatastrophicEnsemble,
    #[error("pairing covers {pairing} codes but ensemble has {codes}")]
    PairingSizeMismatch { pairing: usize, codes: usize },
    #[error("frame length {frame_len} must be at least the constraint length {l}")]
    FrameTooShort { frame_len: usize, l: usize },
    #[error("decoder given {given} streams, expected {expected}")]
    StreamCountMismatch { given: usize, expected: usize },
    #[error("received streams have mismatched lengths")]
    LengthMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Distributed soft coding: SBE, SISO encode, normalize, joint BCJR.
    Disc,
    /// Soft information relaying: normalized SBE forwarding, MRC decision.
    Sir,
    /// Detect and forward with relay re-encoding, joint BCJR.
    Df,
}

/// A fully resolved scheme configuration for one simulated link.
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub ensemble: CodeEnsemble,
    /// code_for_relay[k] is the ensemble index used by relay k.
    pub code_for_relay: Vec<usize>,
    pub frame_len: usize,
}

impl SchemeConfig {
    pub fn disc(
        ensemble: CodeEnsemble,
        pairing: &PairingAssignment,
        frame_len: usize,
    ) -> Result<Self, RelayError> {
        Self::coded(Scheme::Disc, ensemble, pairing, frame_len)
    }

    pub fn df(
        ensemble: CodeEnsemble,
        pairing: &PairingAssignment,
        frame_len: usize,
    ) -> Result<Self, RelayError> {
        Self::coded(Scheme::Df, ensemble, pairing, frame_len)
    }

    fn coded(
        scheme: Scheme,
        ensemble: CodeEnsemble,
        pairing: &PairingAssignment,
        frame_len: usize,
    ) -> Result<Self, RelayError> {
        if pairing.len() != ensemble.len() {
            return Err(RelayError::PairingSizeMismatch {
                pairing: pairing.len(),
                codes: ensemble.len(),
            });
        }
        if !is_noncatastrophic(&ensemble) {
            return Err(RelayError::CatastrophicEnsemble);
        }
        if frame_len < ensemble.constraint_len() {
            return Err(RelayError::FrameTooShort {
                frame_len,
                l: ensemble.constraint_len(),
            });
        }
        Ok(Self {
            scheme,
            ensemble,
            code_for_relay: pairing.code_for_relay(),
            frame_len,
        })
    }

    /// SIR behaves as DISC with the identity code at every relay.
    pub fn sir(num_relays: usize, frame_len: usize) -> Self {
        let identity = GeneratorSequence::parse("1").unwrap();
        Self {
            scheme: Scheme::Sir,
            ensemble: CodeEnsemble::new(vec![identity; num_relays]).unwrap(),
            code_for_relay: (0..num_relays).collect(),
            frame_len,
        }
    }

    pub fn num_relays(&self) -> usize {
        self.code_for_relay.len()
    }
}

/// Genie-delivered per-relay destination knowledge: the effective complex
/// amplitude a_k of the useful signal and the equivalent noise variance of
/// the stream, never below thermal noise.
#[derive(Debug, Clone, PartialEq)]
pub struct DestinationSideInfo {
    pub a: Vec<Complex64>,
    pub sigma2: Vec<f64>,
    pub degenerate: Vec<bool>,
}

impl DestinationSideInfo {
    fn with_capacity(k: usize) -> Self {
        Self {
            a: Vec::with_capacity(k),
            sigma2: Vec::with_capacity(k),
            degenerate: Vec::with_capacity(k),
        }
    }
}

/// Outcome of one simulated frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutcome {
    pub bit_errors: usize,
    pub frame_error: bool,
    pub decoded_bits: Vec<u8>,
    /// Average per-symbol relay transmit power, for the same-power audit.
    pub tx_power: f64,
}

/// SBEs of the source symbols from the relay's received samples.
fn relay_sbe_frame(rx: &[Complex64], amp: f64, h_sr: Complex64, sigma2: f64) -> Vec<f64> {
    rx.iter()
        .map(|&r| sbe_from_llr(llr_bpsk(r, h_sr, amp, sigma2)))
        .collect()
}

/// DISC relay: SBE, SISO-encode with the assigned code, normalize to power
/// P_r. The SBE statistics (alpha, sigma2_in) are the frame's empirical
/// moments against the true transmitted symbols (genie side information),
/// so frames whose SBEs are unusually degraded are discounted at the
/// destination. On a degenerate frame (alpha <= 0, possible at very low
/// SNR) the power normalization falls back to the measured output power.
pub fn relay_process_disc(
    rx: &[Complex64],
    g: &GeneratorSequence,
    budget: &LinkBudget,
    relay_idx: usize,
    h_sr: Complex64,
    truth: &[f64],
) -> (Vec<f64>, SbeNoiseStats, EncoderOutputStats) {
    let amp = (budget.p_s * budget.l_sr[relay_idx]).sqrt();
    let sbes = relay_sbe_frame(rx, amp, h_sr, budget.sigma2_n);
    let stats = sbe_noise_stats(&sbes, truth);
    let encoded = siso_encode(&sbes, g);
    let d = g.gsw();
    let out_stats = match encoder_output_stats(&stats, d, budget.p_r) {
        Ok(o) => o,
        Err(_) => encoder_output_stats_empirical(&encoded, stats.alpha, d, budget.p_r),
    };
    let tx = encoded.iter().map(|&x| out_stats.beta * x).collect();
    (tx, stats, out_stats)
}

/// SIR relay: normalized SBE forwarding, identical to DISC with g = (1).
pub fn relay_process_sir(
    rx: &[Complex64],
    budget: &LinkBudget,
    relay_idx: usize,
    h_sr: Complex64,
    truth: &[f64],
) -> (Vec<f64>, SbeNoiseStats, EncoderOutputStats) {
    let g = GeneratorSequence::parse("1").unwrap();
    relay_process_disc(rx, &g, budget, relay_idx, h_sr, truth)
}

/// DF relay: per-symbol hard decision, binary re-encoding, BPSK at power P_r.
pub fn relay_process_df(
    rx: &[Complex64],
    g: &GeneratorSequence,
    budget: &LinkBudget,
    _relay_idx: usize,
    h_sr: Complex64,
) -> Vec<f64> {
    let bits: Vec<u8> = rx
        .iter()
        .map(|&r| if (h_sr.conj() * r).re >= 0.0 { 0u8 } else { 1u8 })
        .collect();
    let code = g.encode_bits(&bits);
    let amp = budget.p_r.sqrt();
    bpsk_modulate(&code).iter().map(|&s| amp * s).collect()
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Joint BCJR MAP decoding of the K relay streams as one rate-1/K codeword.
///
/// Each stream is coherently rotated; the branch metric is the sum over
/// relays of the Gaussian log-likelihood of the rotated real part with mean
/// |a_k| * (branch output) and the stream's equivalent noise variance.
/// The last `known_zero_tail` inputs are treated as known zeros (zero-tail
/// termination); with a tail of 0 the frame is unterminated and the
/// backward pass starts uniform.
///
/// Returns the per-bit APP LLRs ln(P(b=0)/P(b=1)) and their hard decisions.
pub fn joint_bcjr_decode(
    rx_frames: &[Vec<Complex64>],
    side: &DestinationSideInfo,
    ensemble: &CodeEnsemble,
    code_for_relay: &[usize],
    known_zero_tail: usize,
) -> Result<(Vec<f64>, Vec<u8>), RelayError> {
    let k = code_for_relay.len();
    if rx_frames.len() != k || side.a.len() != k {
        return Err(RelayError::StreamCountMismatch {
            given: rx_frames.len(),
            expected: k,
        });
    }
    if code_for_relay.iter().any(|&c| c >= ensemble.len()) {
        return Err(RelayError::PairingSizeMismatch {
            pairing: code_for_relay.len(),
            codes: ensemble.len(),
        });
    }
    let n = rx_frames.first().map_or(0, |f| f.len());
    if rx_frames.iter().any(|f| f.len() != n) {
        return Err(RelayError::LengthMismatch);
    }

    // Rotated sufficient statistics and per-stream scalars.
    let mut amps = vec![0.0f64; k];
    let mut zs: Vec<Vec<f64>> = Vec::with_capacity(k);
    for r in 0..k {
        let a = side.a[r];
        let mag = a.norm();
        amps[r] = mag;
        let u = if mag > 0.0 {
            a / mag
        } else {
            Complex64::new(0.0, 0.0)
        };
        zs.push(rx_frames[r].iter().map(|&y| (u.conj() * y).re).collect());
    }

    let trellis = JointTrellis::new(ensemble);
    let n_states = trellis.num_states();
    let tail_start = n - known_zero_tail.min(n);
    let inputs_at = |t: usize| -> usize {
        if t >= tail_start {
            1
        } else {
            2
        }
    };

    // Branch log-metric at time t for (state, input): the rotated real part
    // carries noise variance sigma2/2 per real dimension.
    let metric = |t: usize, state: usize, input: usize| -> f64 {
        let outs = trellis.branch_outputs(state, input);
        let mut m = 0.0;
        for r in 0..k {
            if amps[r] == 0.0 {
                continue;
            }
            let x = if outs[code_for_relay[r]] == 0 { 1.0 } else { -1.0 };
            let e = zs[r][t] - amps[r] * x;
            m -= e * e / side.sigma2[r];
        }
        m
    };

    // Forward pass.
    let mut alpha = vec![f64::NEG_INFINITY; n_states];
    alpha[0] = 0.0;
    let mut alphas = Vec::with_capacity(n);
    for t in 0..n {
        alphas.push(alpha.clone());
        let mut next = vec![f64::NEG_INFINITY; n_states];
        for (s, &a_s) in alpha.iter().enumerate() {
            if a_s == f64::NEG_INFINITY {
                continue;
            }
            for input in 0..inputs_at(t) {
                let ns = trellis.next_state(s, input);
                let v = a_s + metric(t, s, input);
                next[ns] = log_sum_exp(next[ns], v);
            }
        }
        let m = next.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m.is_finite() {
            next.iter_mut().for_each(|v| *v -= m);
        }
        alpha = next;
    }

    // Backward pass and APPs.
    let mut beta = vec![0.0f64; n_states];
    let mut llrs = vec![0.0f64; n];
    for t in (0..n).rev() {
        let a_t = &alphas[t];
        let mut num = [f64::NEG_INFINITY; 2];
        let mut prev = vec![f64::NEG_INFINITY; n_states];
        for (s, &a_s) in a_t.iter().enumerate() {
            if a_s == f64::NEG_INFINITY {
                continue;
            }
            for (input, acc) in num.iter_mut().enumerate().take(inputs_at(t)) {
                let ns = trellis.next_state(s, input);
                let g = metric(t, s, input);
                *acc = log_sum_exp(*acc, a_s + g + beta[ns]);
                prev[s] = log_sum_exp(prev[s], g + beta[ns]);
            }
        }
        llrs[t] = num[0] - num[1];
        let m = prev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m.is_finite() {
            prev.iter_mut().for_each(|v| *v -= m);
        }
        beta = prev;
    }

    let bits = llrs.iter().map(|&l| if l >= 0.0 { 0u8 } else { 1u8 }).collect();
    Ok((llrs, bits))
}

/// Maximum ratio combining across relay streams followed by a sign decision
/// (the SIR destination).
pub fn mrc_combine_decide(
    rx_frames: &[Vec<Complex64>],
    side: &DestinationSideInfo,
) -> Result<Vec<u8>, RelayError> {
    let k = side.a.len();
    if rx_frames.len() != k {
        return Err(RelayError::StreamCountMismatch {
            given: rx_frames.len(),
            expected: k,
        });
    }
    let n = rx_frames.first().map_or(0, |f| f.len());
    if rx_frames.iter().any(|f| f.len() != n) {
        return Err(RelayError::LengthMismatch);
    }
    let bits = (0..n)
        .map(|t| {
            let l: f64 = rx_frames
                .iter()
                .zip(&side.a)
                .zip(&side.sigma2)
                .map(|((f, &a), &s2)| llr_bpsk(f[t], a, 1.0, s2))
                .sum();
            if l >= 0.0 {
                0u8
            } else {
                1u8
            }
        })
        .collect();
    Ok(bits)
}

/// Relay processing and side-information assembly for one relay stream.
/// Returns the transmit symbols and the destination-side (a_k, sigma2_k).
fn process_relay(
    cfg: &SchemeConfig,
    budget: &LinkBudget,
    relay_idx: usize,
    rx: &[Complex64],
    h_sr: Complex64,
    h_rd: Complex64,
    truth: &[f64],
) -> (Vec<f64>, Complex64, f64, bool) {
    let g = &cfg.ensemble.codes()[cfg.code_for_relay[relay_idx]];
    match cfg.scheme {
        Scheme::Disc | Scheme::Sir => {
            let (tx, stats, out) = relay_process_disc(rx, g, budget, relay_idx, h_sr, truth);
            let d = g.gsw() as i32;
            let a = budget.l_r.sqrt() * h_rd * out.beta * stats.alpha.powi(d);
            // The soft-encoder self-noise is real-valued and lies along the
            // signal phase, unlike the circular thermal noise. The decoder
            // metric divides by sigma2/2 per real dimension, so the
            // equivalent circular variance doubles the self-noise term to
            // put the correct real-axis variance on the signal axis.
            let sigma2 = (budget.sigma2_n
                + 2.0 * budget.l_r * h_rd.norm_sqr() * out.beta * out.beta * out.sigma2_out)
                .max(budget.sigma2_n);
            (tx, a, sigma2, stats.degenerate)
        }
        Scheme::Df => {
            let tx = relay_process_df(rx, g, budget, relay_idx, h_sr);
            // The destination assumes the relay detected correctly.
            let a = (budget.p_r * budget.l_r).sqrt() * h_rd;
            (tx, a, budget.sigma2_n, false)
        }
    }
}

/// Simulates one frame end to end: source bits, both hops, scheme-specific
/// relay processing and destination decoding, error counting.
pub fn run_frame<R: Rng + ?Sized>(
    cfg: &SchemeConfig,
    budget: &LinkBudget,
    mode: ChannelMode,
    rng: &mut R,
) -> FrameOutcome {
    let n = cfg.frame_len;
    let k = cfg.num_relays();
    debug_assert_eq!(budget.num_relays(), k);

    // Zero-tail termination for the coded schemes: the source's last
    // `memory` bits are zero, driving every constituent encoder back to the
    // zero state, and the destination decoder conditions on them.
    let tail = match cfg.scheme {
        Scheme::Sir => 0,
        Scheme::Disc | Scheme::Df => cfg.ensemble.constraint_len() - 1,
    };
    let mut bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
    for b in bits.iter_mut().skip(n - tail) {
        *b = 0;
    }
    let x_b = bpsk_modulate(&bits);
    let real: ChannelRealization = draw_realization(mode, k, rng);

    let mut side = DestinationSideInfo::with_capacity(k);
    let mut streams: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    let mut power_sum = 0.0;
    for r in 0..k {
        let amp_sr = (budget.p_s * budget.l_sr[r]).sqrt();
        let rx = transmit(&x_b, amp_sr, real.h_sr[r], budget.sigma2_n, rng);
        let (tx, a, sigma2, degenerate) =
            process_relay(cfg, budget, r, &rx, real.h_sr[r], real.h_rd[r], &x_b);
        power_sum += tx.iter().map(|&s| s * s).sum::<f64>();
        side.a.push(a);
        side.sigma2.push(sigma2);
        side.degenerate.push(degenerate);
        streams.push(transmit(
            &tx,
            budget.l_r.sqrt(),
            real.h_rd[r],
            budget.sigma2_n,
            rng,
        ));
    }

    let decoded = match cfg.scheme {
        Scheme::Sir => mrc_combine_decide(&streams, &side).expect("stream shapes fixed above"),
        Scheme::Disc | Scheme::Df => {
            let (_, bits) =
                joint_bcjr_decode(&streams, &side, &cfg.ensemble, &cfg.code_for_relay, tail)
                    .expect("stream shapes fixed above");
            bits
        }
    };

    let bit_errors = decoded.iter().zip(&bits).filter(|(a, b)| a != b).count();
    FrameOutcome {
        bit_errors,
        frame_error: bit_errors > 0,
        decoded_bits: decoded,
        tx_power: power_sum / (k * n) as f64,
    }
}
