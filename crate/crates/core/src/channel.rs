//! BPSK modulation, link budgets and complex-baseband channel realizations.
//!
//! Convention, fixed project-wide: the complex noise variance sigma_n^2 is the
//! total variance, sigma_n^2 / 2 per real dimension. BPSK detection uses the
//! real part after coherent rotation by conj(h) / |h|.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("link budget field {0} must be positive and finite")]
    InvalidBudget(&'static str),
    #[error("per-relay pathloss list must not be empty")]
    NoRelays,
}

/// Transmit powers, pathlosses and noise variance of the two hops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Source transmit power.
    pub p_s: f64,
    /// Relay transmit power (equal across relays).
    pub p_r: f64,
    /// Per-relay source-to-relay pathloss.
    pub l_sr: Vec<f64>,
    /// Relay-to-destination pathloss (equal across relays).
    pub l_r: f64,
    /// Total complex noise variance sigma_n^2.
    pub sigma2_n: f64,
}

impl LinkBudget {
    pub fn new(
        p_s: f64,
        p_r: f64,
        l_sr: Vec<f64>,
        l_r: f64,
        sigma2_n: f64,
    ) -> Result<Self, ChannelError> {
        if l_sr.is_empty() {
            return Err(ChannelError::NoRelays);
        }
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(p_s) {
            return Err(ChannelError::InvalidBudget("p_s"));
        }
        if !ok(p_r) {
            return Err(ChannelError::InvalidBudget("p_r"));
        }
        if !ok(l_r) {
            return Err(ChannelError::InvalidBudget("l_r"));
        }
        if !ok(sigma2_n) {
            return Err(ChannelError::InvalidBudget("sigma2_n"));
        }
        if !l_sr.iter().all(|&v| ok(v)) {
            return Err(ChannelError::InvalidBudget("l_sr"));
        }
        Ok(Self {
            p_s,
            p_r,
            l_sr,
            l_r,
            sigma2_n,
        })
    }

    pub fn num_relays(&self) -> usize {
        self.l_sr.len()
    }

    /// Average source-to-relay SNR for relay k.
    pub fn avg_snr_sr(&self, k: usize) -> f64 {
        self.p_s * self.l_sr[k] / self.sigma2_n
    }

    /// Average relay-to-destination SNR.
    pub fn avg_snr_rd(&self) -> f64 {
        self.p_r * self.l_r / self.sigma2_n
    }

    /// Builds a unit-power, unit-pathloss budget from per-relay average
    /// source-to-relay SNRs (dB) and an average relay-to-destination SNR
    /// (dB), all expressed through the noise variance. With P = L = 1 the
    /// two hops share one noise figure, so the source-relay SNRs are set via
    /// pathloss.
    pub fn from_snrs_db(sr_db: &[f64], rd_db: f64) -> Result<Self, ChannelError> {
        let rd = db_to_linear(rd_db);
        // sigma2 from the rd link with P_r = L_r = 1.
        let sigma2_n = 1.0 / rd;
        let l_sr: Vec<f64> = sr_db
            .iter()
            .map(|&db| db_to_linear(db) * sigma2_n)
            .collect();
        Self::new(1.0, 1.0, l_sr, 1.0, sigma2_n)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelMode {
    Awgn,
    Rayleigh,
}

impl std::str::FromStr for ChannelMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(Self::Awgn),
            "rayleigh" | "fading" => Ok(Self::Rayleigh),
            other => Err(format!("unknown channel mode {other:?}")),
        }
    }
}

/// Quasi-static channel gains, one per link per frame. AWGN mode pins all
/// gains to exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_sr: Vec<Complex64>,
    pub h_rd: Vec<Complex64>,
}

/// One circularly symmetric complex Gaussian sample with E|z|^2 = 1.
fn unit_cscg<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn draw_realization<R: Rng + ?Sized>(
    mode: ChannelMode,
    k: usize,
    rng: &mut R,
) -> ChannelRealization {
    match mode {
        ChannelMode::Awgn => ChannelRealization {
            h_sr: vec![Complex64::ONE; k],
            h_rd: vec![Complex64::ONE; k],
        },
        ChannelMode::Rayleigh => ChannelRealization {
            h_sr: (0..k).map(|_| unit_cscg(rng)).collect(),
            h_rd: (0..k).map(|_| unit_cscg(rng)).collect(),
        },
    }
}

/// 0 -> +1, 1 -> -1.
pub fn bpsk_modulate(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

/// sample(n) = amp * h * symbol(n) + eta(n), eta complex Gaussian with total
/// variance sigma2.
pub fn transmit<R: Rng + ?Sized>(
    symbols: &[f64],
    amp: f64,
    h: Complex64,
    sigma2: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let per_dim = (sigma2 / 2.0).sqrt();
    symbols
        .iter()
        .map(|&s| {
            let nr: f64 = StandardNormal.sample(rng);
            let ni: f64 = StandardNormal.sample(rng);
            amp * h * s + Complex64::new(nr * per_dim, ni * per_dim)
        })
        .collect()
}
