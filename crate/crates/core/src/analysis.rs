//! Statistical post-processing: FER curves, destination-noise histograms,
//! diversity-order slope estimation, dB-gain extraction at a target FER and
//! analytic BER overlays.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{bpsk_modulate, transmit, LinkBudget};
use crate::code_algebra::{
    ber_approx, CodeEnsemble, GeneratorSequence, LinkSnrProfile, PairingAssignment,
};
use crate::relay::relay_process_disc;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("FER curve point {index}: {reason}")]
    InvalidCurvePoint { index: usize, reason: &'static str },
    #[error("snr_db values must be strictly increasing")]
    UnsortedCurve,
    #[error("need at least {needed} points inside the FER window, found {found}")]
    InsufficientPoints { needed: usize, found: usize },
    #[error("curve is not monotonically decreasing around FER {0}")]
    NonMonotone(f64),
    #[error("curve does not cross FER {0}")]
    NoCrossing(f64),
}

/// One Monte Carlo measurement point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FerPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
}

impl FerPoint {
    pub fn from_counts(
        snr_db: f64,
        frames: u64,
        frame_errors: u64,
        bit_errors: u64,
        frame_len: usize,
    ) -> Self {
        let fer = frame_errors as f64 / frames as f64;
        let ber = bit_errors as f64 / (frames * frame_len as u64) as f64;
        Self {
            snr_db,
            frames,
            frame_errors,
            bit_errors,
            fer,
            ber,
        }
    }
}

/// A swept error-rate curve with strictly increasing SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerCurve {
    points: Vec<FerPoint>,
}

impl FerCurve {
    pub fn new(points: Vec<FerPoint>) -> Result<Self, AnalysisError> {
        for (i, p) in points.iter().enumerate() {
            if !(0.0..=1.0).contains(&p.fer) || !p.fer.is_finite() {
                return Err(AnalysisError::InvalidCurvePoint {
                    index: i,
                    reason: "fer outside [0, 1]",
                });
            }
            if p.ber > p.fer + 1e-12 {
                return Err(AnalysisError::InvalidCurvePoint {
                    index: i,
                    reason: "ber exceeds fer",
                });
            }
        }
        if points.windows(2).any(|w| w[1].snr_db <= w[0].snr_db) {
            return Err(AnalysisError::UnsortedCurve);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[FerPoint] {
        &self.points
    }
}

/// Least-squares slope of log10(FER) versus snr_db / 10 over the points whose
/// FER lies inside the window, returned as a positive diversity estimate.
/// Zero-FER points carry no information and are excluded.
pub fn diversity_slope(curve: &FerCurve, window: (f64, f64)) -> Result<f64, AnalysisError> {
    let (hi, lo) = window;
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.fer > 0.0 && p.fer <= hi && p.fer >= lo)
        .map(|p| (p.snr_db / 10.0, p.fer.log10()))
        .collect();
    if pts.len() < 2 {
        return Err(AnalysisError::InsufficientPoints {
            needed: 2,
            found: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(-(sxy / sxx))
}

/// SNR (dB) at which the curve crosses the target FER, by log-linear
/// interpolation. The curve must be monotonically decreasing through the
/// crossing.
pub fn snr_at_fer(curve: &FerCurve, target: f64) -> Result<f64, AnalysisError> {
    let pts = &curve.points;
    let positive: Vec<&FerPoint> = pts.iter().filter(|p| p.fer > 0.0).collect();
    if positive.windows(2).any(|w| w[1].fer > w[0].fer) {
        return Err(AnalysisError::NonMonotone(target));
    }
    for w in pts.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.fer >= target && b.fer <= target && b.fer > 0.0 && a.fer > 0.0 {
            if a.fer == b.fer {
                return Ok(a.snr_db);
            }
            let t = (target.log10() - a.fer.log10()) / (b.fer.log10() - a.fer.log10());
            return Ok(a.snr_db + t * (b.snr_db - a.snr_db));
        }
    }
    Err(AnalysisError::NoCrossing(target))
}

/// dB gain of curve a over curve b at the target FER: positive when a
/// reaches the target at a lower SNR.
pub fn gain_at_fer(
    curve_a: &FerCurve,
    curve_b: &FerCurve,
    target: f64,
) -> Result<f64, AnalysisError> {
    Ok(snr_at_fer(curve_b, target)? - snr_at_fer(curve_a, target)?)
}

/// Analytic BER overlay: the high-SNR approximation evaluated across an SNR
/// sweep for plotting against simulation.
pub fn analytic_overlay(
    ensemble: &CodeEnsemble,
    pairing: &PairingAssignment,
    sweep: &[LinkSnrProfile],
    b_dfree: f64,
) -> Vec<f64> {
    sweep
        .iter()
        .map(|profile| ber_approx(pairing, ensemble, profile, b_dfree))
        .collect()
}

/// Uniform-bin density histogram of one conditioning class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub densities: Vec<f64>,
    pub condition: String,
}

impl Histogram {
    pub const NUM_BINS: usize = 101;

    /// Bins span mean +/- 5 empirical standard deviations; the density is
    /// normalized over the samples falling inside that range.
    pub fn from_samples(samples: &[f64], condition: &str) -> Self {
        let n = samples.len().max(1) as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|&s| (s - mean) * (s - mean)).sum::<f64>() / n;
        let half = 5.0 * var.sqrt().max(f64::MIN_POSITIVE);
        let (lo, hi) = (mean - half, mean + half);
        let width = (hi - lo) / Self::NUM_BINS as f64;
        let mut counts = vec![0u64; Self::NUM_BINS];
        let mut included = 0u64;
        for &s in samples {
            if s >= lo && s < hi {
                let b = ((s - lo) / width) as usize;
                counts[b.min(Self::NUM_BINS - 1)] += 1;
                included += 1;
            }
        }
        let denom = (included.max(1) as f64) * width;
        Self {
            lo,
            hi,
            densities: counts.iter().map(|&c| c as f64 / denom).collect(),
            condition: condition.to_string(),
        }
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.densities.len() as f64
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        let w = self.bin_width();
        (0..self.densities.len())
            .map(|i| self.lo + (i as f64 + 0.5) * w)
            .collect()
    }

    pub fn integral(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.bin_width()
    }
}

/// Configuration of the destination-noise PDF study: a single DISC relay in
/// AWGN with the 4-state generator (111).
#[derive(Debug, Clone)]
pub struct NoisePdfConfig {
    pub snr_db: f64,
    pub frames: usize,
    pub frame_len: usize,
    /// Replace the relay SBEs by the true symbols (noise-free first hop).
    pub genie_perfect: bool,
    pub seed: u64,
}

impl NoisePdfConfig {
    pub fn new(snr_db: f64, frames: usize) -> Self {
        Self {
            snr_db,
            frames,
            frame_len: 130,
            genie_perfect: false,
            seed: 0,
        }
    }
}

/// Outcome of the noise-PDF study: residual histograms conditioned on the
/// code symbol, plus Gaussianity diagnostics (reported, never asserted).
#[derive(Debug, Clone)]
pub struct NoisePdfStudy {
    pub hist_plus: Histogram,
    pub hist_minus: Histogram,
    /// Mean squared magnitude of the complex residual y - a * x_c.
    pub empirical_variance: f64,
    /// Frame-averaged model variance of the same residual.
    pub predicted_variance: f64,
    /// Excess kurtosis of the real residual component.
    pub excess_kurtosis: f64,
    /// KS distance of the real residual against the model Gaussian.
    pub ks_distance: f64,
}

/// Collects the overall destination noise w_rd = y - a * x_c of a single
/// DISC relay stream, conditioned on the code symbol x_c.
pub fn noise_pdf(cfg: &NoisePdfConfig) -> NoisePdfStudy {
    let g = GeneratorSequence::parse("111").unwrap();
    let d = g.gsw();
    let budget = LinkBudget::from_snrs_db(&[cfg.snr_db], cfg.snr_db).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut reals = Vec::new();
    let mut sum_sq = 0.0;
    let mut predicted = 0.0;
    let mut total = 0usize;
    for _ in 0..cfg.frames {
        let bits: Vec<u8> = (0..cfg.frame_len).map(|_| rng.random_range(0..2u8)).collect();
        let x_b = bpsk_modulate(&bits);
        let amp_sr = (budget.p_s * budget.l_sr[0]).sqrt();
        let rx: Vec<Complex64> = if cfg.genie_perfect {
            // Noise-free first hop: the SBE frame is exactly the symbols.
            x_b.iter().map(|&s| Complex64::new(1e6 * s, 0.0)).collect()
        } else {
            transmit(&x_b, amp_sr, Complex64::ONE, budget.sigma2_n, &mut rng)
        };
        let budget_relay = if cfg.genie_perfect {
            LinkBudget::new(1e12, budget.p_r, vec![1.0], 1.0, budget.sigma2_n).unwrap()
        } else {
            budget.clone()
        };
        let (tx, stats, out) = relay_process_disc(&rx, &g, &budget_relay, 0, Complex64::ONE, &x_b);
        let y = transmit(&tx, budget.l_r.sqrt(), Complex64::ONE, budget.sigma2_n, &mut rng);
        let a = budget.l_r.sqrt() * out.beta * stats.alpha.powi(d as i32);
        let x_c = bpsk_modulate(&g.encode_bits(&bits));
        predicted += budget.sigma2_n + budget.l_r * out.beta * out.beta * out.sigma2_out;
        for (t, (&yc, &xc)) in y.iter().zip(&x_c).enumerate() {
            let _ = t;
            let w = yc - a * xc;
            sum_sq += w.norm_sqr();
            reals.push(w.re);
            if xc > 0.0 {
                plus.push(w.re);
            } else {
                minus.push(w.re);
            }
            total += 1;
        }
    }

    let n = total.max(1) as f64;
    let empirical_variance = sum_sq / n;
    let predicted_variance = predicted / cfg.frames.max(1) as f64;

    let mean = reals.iter().sum::<f64>() / n;
    let m2 = reals.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = reals.iter().map(|&x| (x - mean).powi(4)).sum::<f64>() / n;
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;

    let sigma_real = (predicted_variance / 2.0).sqrt();
    let ks_distance = ks_against_gaussian(&mut reals, 0.0, sigma_real);

    NoisePdfStudy {
        hist_plus: Histogram::from_samples(&plus, "+1"),
        hist_minus: Histogram::from_samples(&minus, "-1"),
        empirical_variance,
        predicted_variance,
        excess_kurtosis,
        ks_distance,
    }
}

/// Abramowitz & Stegun 7.1.26 rational approximation, |error| < 1.5e-7.
fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

fn normal_cdf(x: f64, mu: f64, sigma: f64) -> f64 {
    0.5 * (1.0 + erf((x - mu) / (sigma * std::f64::consts::SQRT_2)))
}

/// Kolmogorov-Smirnov distance against N(mu, sigma^2). Sorts in place.
pub fn ks_against_gaussian(samples: &mut [f64], mu: f64, sigma: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let cdf = normal_cdf(x, mu, sigma);
        d = d.max((cdf - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - cdf).abs());
    }
    d
}
