//! Soft-information algebra: SBE/LLR conversions, the product-form SISO
//! encoder, the probability-inference reference encoder, boxplus chains and
//! the equivalent-noise statistics of the SBE model.
//!
//! A soft bit estimate (SBE) is the expected value of a BPSK symbol given the
//! observations, x = Pr0 - Pr1 in [-1, 1]. It relates to the LLR
//! l = ln(Pr0/Pr1) by x = tanh(l/2).

use num_complex::Complex64;
use thiserror::Error;

use crate::code_algebra::{GeneratorSequence, JointTrellis};

/// Soft bit estimate, in [-1, 1].
pub type Sbe = f64;
/// Log-likelihood ratio ln(Pr0/Pr1); +/- infinity denotes a certain bit.
pub type Llr = f64;

#[derive(Debug, Error)]
pub enum SoftCodingError {
    #[error("probability pair ({0}, {1}) does not sum to 1 within 1e-9")]
    InvalidProbabilityPair(f64, f64),
    #[error("encoder output power is zero; normalization undefined")]
    ZeroOutputPower,
    #[error("degenerate SBE statistics (alpha = {alpha}); frame carries no signal component")]
    DegenerateFrame { alpha: f64 },
}

/// x = tanh(l/2); +/- infinity map to +/-1.
pub fn sbe_from_llr(l: Llr) -> Sbe {
    (l / 2.0).tanh()
}

/// l = ln((1+x)/(1-x)); +/-1 map to +/- infinity.
pub fn llr_from_sbe(x: Sbe) -> Llr {
    debug_assert!((-1.0..=1.0).contains(&x));
    2.0 * x.atanh()
}

/// Exact matched-filter LLR for BPSK with known channel gain.
///
/// The received sample is r = amp * h * x + eta with eta circularly symmetric
/// complex Gaussian of total variance sigma2 (sigma2/2 per real dimension),
/// giving l = 4 * amp * Re(conj(h) * r) / sigma2.
pub fn llr_bpsk(r: Complex64, h: Complex64, amp: f64, sigma2: f64) -> Llr {
    debug_assert!(sigma2 > 0.0);
    4.0 * amp * (h.conj() * r).re / sigma2
}

/// LLR of the XOR of independent bits: ln((1 + prod tanh(l/2)) / (1 - prod
/// tanh(l/2))).
pub fn boxplus_llr(ls: &[Llr]) -> Llr {
    assert!(!ls.is_empty());
    let prod: f64 = ls.iter().map(|&l| (l / 2.0).tanh()).product();
    2.0 * prod.atanh()
}

/// Rate-1 SISO encoding: each output SBE is the product of the input SBEs
/// selected by the generator taps. Pre-frame positions contribute a +1
/// factor (the SBE of a known zero bit from the all-zero initial state).
pub fn siso_encode(frame: &[Sbe], g: &GeneratorSequence) -> Vec<Sbe> {
    let taps = g.taps();
    (0..frame.len())
        .map(|n| {
            taps.iter()
                .enumerate()
                .filter(|&(j, &t)| t == 1 && n >= j)
                .map(|(j, _)| frame[n - j])
                .product()
        })
        .collect()
}

/// Reference soft encoder by probability inference over the code trellis:
/// a forward recursion over state probabilities, marginalizing the encoder
/// output at each step. Exactly equivalent to [`siso_encode`] through
/// Pr0 - Pr1, but kept as the independent route.
pub fn prob_inference_encode(
    probs: &[(f64, f64)],
    g: &GeneratorSequence,
) -> Result<Vec<(f64, f64)>, SoftCodingError> {
    for &(p0, p1) in probs {
        if (p0 + p1 - 1.0).abs() > 1e-9 {
            return Err(SoftCodingError::InvalidProbabilityPair(p0, p1));
        }
    }
    let ensemble = crate::code_algebra::CodeEnsemble::new(vec![g.clone()]).unwrap();
    let trellis = JointTrellis::new(&ensemble);
    let n_states = trellis.num_states();
    let mut state_p = vec![0.0f64; n_states];
    state_p[0] = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for &(p0, p1) in probs {
        let mut acc = [0.0f64; 2];
        let mut next_p = vec![0.0f64; n_states];
        for (state, &sp) in state_p.iter().enumerate() {
            if sp == 0.0 {
                continue;
            }
            for (input, pb) in [(0usize, p0), (1usize, p1)] {
                let c = trellis.branch_outputs(state, input)[0] as usize;
                acc[c] += pb * sp;
                next_p[trellis.next_state(state, input)] += pb * sp;
            }
        }
        out.push((acc[0], acc[1]));
        state_p = next_p;
    }
    Ok(out)
}

/// Equivalent-noise statistics of an SBE frame against the true BPSK symbols
/// (genie-aided, simulation only). The model is x_tilde = alpha * x + w_in
/// with alpha = 1 - mean(1 - x * x_tilde).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbeNoiseStats {
    /// Mean of the equivalent noise w_tilde = 1 - x * x_tilde.
    pub mu_w: f64,
    /// Variance of w_tilde (equal to the variance of w_in for BPSK).
    pub sigma2_w: f64,
    /// Signal scaling alpha = 1 - mu_w.
    pub alpha: f64,
    /// Variance of the zero-mean input noise w_in = x_tilde - alpha * x.
    pub sigma2_in: f64,
    /// SISO encoder input SNR alpha^2 / sigma2_in.
    pub gamma_sr_in: f64,
    /// Set when alpha <= 0: the linear model carries no signal component.
    pub degenerate: bool,
}

pub fn sbe_noise_stats(frame: &[Sbe], truth: &[f64]) -> SbeNoiseStats {
    assert_eq!(frame.len(), truth.len());
    let n = frame.len() as f64;
    let mu_w: f64 = frame
        .iter()
        .zip(truth)
        .map(|(&x_t, &x)| 1.0 - x * x_t)
        .sum::<f64>()
        / n;
    let sigma2_w: f64 = frame
        .iter()
        .zip(truth)
        .map(|(&x_t, &x)| {
            let w = 1.0 - x * x_t - mu_w;
            w * w
        })
        .sum::<f64>()
        / n;
    let alpha = 1.0 - mu_w;
    // w_in = -x (w_tilde - mu_w), x^2 = 1, so var(w_in) = var(w_tilde).
    let sigma2_in = sigma2_w;
    let gamma_sr_in = if sigma2_in > 0.0 {
        alpha * alpha / sigma2_in
    } else if alpha != 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    SbeNoiseStats {
        mu_w,
        sigma2_w,
        alpha,
        sigma2_in,
        gamma_sr_in,
        degenerate: alpha <= 0.0,
    }
}

/// Exact SBE statistics for a BPSK hop at instantaneous receive SNR gamma
/// (total complex SNR amp^2 / sigma2).
///
/// Conditioned on x = +1 the matched-filter LLR is Gaussian with mean
/// 4*gamma and variance 8*gamma, so alpha = E[tanh(l/2)] and
/// sigma2_in = E[tanh^2(l/2)] - alpha^2 follow by one-dimensional
/// integration (composite Simpson over +/-10 standard deviations).
pub fn sbe_channel_stats(gamma: f64) -> SbeNoiseStats {
    assert!(gamma.is_finite() && gamma >= 0.0, "snr {gamma}");
    let mean = 4.0 * gamma;
    let sd = (8.0 * gamma).sqrt();
    let n = 600usize; // even
    let (lo, hi) = (-10.0f64, 10.0f64);
    let h = (hi - lo) / n as f64;
    let mut num_a = 0.0;
    let mut num_m2 = 0.0;
    let mut den = 0.0;
    for i in 0..=n {
        let u = lo + i as f64 * h;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let phi = (-0.5 * u * u).exp();
        let t = ((mean + sd * u) / 2.0).tanh();
        num_a += w * phi * t;
        num_m2 += w * phi * t * t;
        den += w * phi;
    }
    let alpha = num_a / den;
    let m2 = num_m2 / den;
    let sigma2_in = (m2 - alpha * alpha).max(0.0);
    let mu_w = 1.0 - alpha;
    let gamma_sr_in = if sigma2_in > 0.0 {
        alpha * alpha / sigma2_in
    } else if alpha != 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    SbeNoiseStats {
        mu_w,
        sigma2_w: sigma2_in,
        alpha,
        sigma2_in,
        gamma_sr_in,
        degenerate: alpha <= 0.0,
    }
}

/// SISO encoder output statistics for a code of GSW d:
/// P_x = (alpha^2 + sigma2_in)^d, sigma2_out = P_x - alpha^(2d), and the
/// power normalization beta = sqrt(P_r / P_x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderOutputStats {
    pub p_x: f64,
    pub sigma2_out: f64,
    pub beta: f64,
}

pub fn encoder_output_stats(
    s: &SbeNoiseStats,
    d: usize,
    p_r: f64,
) -> Result<EncoderOutputStats, SoftCodingError> {
    if s.degenerate {
        return Err(SoftCodingError::DegenerateFrame { alpha: s.alpha });
    }
    let p_x = (s.alpha * s.alpha + s.sigma2_in).powi(d as i32);
    if p_x <= 0.0 {
        return Err(SoftCodingError::ZeroOutputPower);
    }
    let sigma2_out = (p_x - s.alpha.powi(2 * d as i32)).max(0.0);
    Ok(EncoderOutputStats {
        p_x,
        sigma2_out,
        beta: (p_r / p_x).sqrt(),
    })
}

/// Output statistics from an empirical output power, for frames where the
/// linear SBE model degenerates (alpha <= 0) and P_x from the model is
/// meaningless. beta stays well defined through the measured power.
pub fn encoder_output_stats_empirical(
    encoded: &[Sbe],
    alpha: f64,
    d: usize,
    p_r: f64,
) -> EncoderOutputStats {
    let n = encoded.len().max(1) as f64;
    let p_x: f64 = encoded.iter().map(|&x| x * x).sum::<f64>() / n;
    let sigma2_out = (p_x - alpha.powi(2 * d as i32)).max(0.0);
    let beta = if p_x > 0.0 { (p_r / p_x).sqrt() } else { 0.0 };
    EncoderOutputStats {
        p_x,
        sigma2_out,
        beta,
    }
}
