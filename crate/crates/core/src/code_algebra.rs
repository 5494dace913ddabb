//! Generator-sequence algebra for the relay constituent codes.
//!
//! A relay constituent code is a rate-1 non-recursive convolutional code
//! described by a single binary generator sequence. This module provides the
//! generator sequence weight (GSW), exact and bounded minimum Hamming
//! distance over the joint rate-1/K trellis, the Massey-Sain catastrophic
//! check, the high-SNR per-relay SNR expression rho, the analytic BER
//! approximation, and the GSW-to-SNR code pairing criterion.

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("generator sequence must contain at least one 1-tap")]
    AllZeroGenerator,
    #[error("invalid generator text {0:?}: expected binary (e.g. \"101\") or octal (e.g. \"5\") digits")]
    InvalidGeneratorText(String),
    #[error("ensemble must contain at least one code")]
    EmptyEnsemble,
    #[error("minimum-distance search did not converge within depth {depth} (best merged weight {best:?}); the ensemble is likely catastrophic")]
    MhdNotConverged { depth: usize, best: Option<usize> },
    #[error("exhaustive pairing search is limited to K <= 8, got K = {0}")]
    PairingTooLarge(usize),
    #[error("SNR profile values must be positive and finite")]
    InvalidSnrProfile,
    #[error("SNR profile has {profile} relays but ensemble has {codes} codes")]
    ProfileSizeMismatch { profile: usize, codes: usize },
}

/// Binary generator sequence (g_1, ..., g_L) of a rate-1 feedforward
/// convolutional code. The first tap multiplies the current input bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSequence {
    taps: Vec<u8>,
}

impl GeneratorSequence {
    /// Builds a generator sequence, trimming leading and trailing zero taps
    /// (pure delay does not change the code).
    pub fn new(taps: &[u8]) -> Result<Self, CodeError> {
        let first = taps.iter().position(|&t| t != 0);
        let Some(first) = first else {
            return Err(CodeError::AllZeroGenerator);
        };
        let last = taps.iter().rposition(|&t| t != 0).unwrap();
        if first != 0 || last != taps.len() - 1 {
            log::warn!(
                "trimming zero taps from generator {:?} -> {:?}",
                taps,
                &taps[first..=last]
            );
        }
        Ok(Self {
            taps: taps[first..=last].iter().map(|&t| (t != 0) as u8).collect(),
        })
    }

    /// Parses `"101"`-style binary text, or octal text (most significant tap
    /// first) when a digit above 1 is present.
    pub fn parse(text: &str) -> Result<Self, CodeError> {
        let s = text.trim();
        if s.is_empty() {
            return Err(CodeError::InvalidGeneratorText(text.to_string()));
        }
        if s.chars().all(|c| c == '0' || c == '1') {
            let taps: Vec<u8> = s.bytes().map(|b| b - b'0').collect();
            return Self::new(&taps);
        }
        if s.chars().all(|c| ('0'..='7').contains(&c)) {
            let mut taps = Vec::with_capacity(3 * s.len());
            for c in s.bytes() {
                let d = c - b'0';
                taps.extend_from_slice(&[(d >> 2) & 1, (d >> 1) & 1, d & 1]);
            }
            return Self::new(&taps);
        }
        Err(CodeError::InvalidGeneratorText(text.to_string()))
    }

    pub fn taps(&self) -> &[u8] {
        &self.taps
    }

    /// Constraint length L (number of taps after trimming).
    pub fn constraint_len(&self) -> usize {
        self.taps.len()
    }

    /// Encoder memory m = L - 1; the trellis has 2^m states.
    pub fn memory(&self) -> usize {
        self.taps.len() - 1
    }

    /// Generator sequence weight: the number of 1-taps.
    pub fn gsw(&self) -> usize {
        self.taps.iter().filter(|&&t| t == 1).count()
    }

    /// Generator polynomial over GF(2), bit i holding the coefficient of D^i.
    pub fn polynomial(&self) -> u64 {
        self.taps
            .iter()
            .enumerate()
            .fold(0u64, |p, (i, &t)| p | ((t as u64) << i))
    }

    /// Binary convolutional encoding from the all-zero state, output length
    /// equal to the input length.
    pub fn encode_bits(&self, bits: &[u8]) -> Vec<u8> {
        (0..bits.len())
            .map(|n| {
                self.taps
                    .iter()
                    .enumerate()
                    .filter(|&(j, &t)| t == 1 && n >= j)
                    .fold(0u8, |acc, (j, _)| acc ^ bits[n - j])
            })
            .collect()
    }
}

impl std::fmt::Display for GeneratorSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for t in &self.taps {
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// The K constituent codes of a distributed rate-1/K code. The destination
/// decodes them on a single joint trellis sized by the longest constraint
/// length; shorter members (such as the trimmed delay branch of the standard
/// 2-state rate-1/2 code) are padded with zero taps on that trellis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeEnsemble {
    codes: Vec<GeneratorSequence>,
}

impl CodeEnsemble {
    pub fn new(codes: Vec<GeneratorSequence>) -> Result<Self, CodeError> {
        if codes.is_empty() {
            return Err(CodeError::EmptyEnsemble);
        }
        Ok(Self { codes })
    }

    pub fn parse(texts: &[&str]) -> Result<Self, CodeError> {
        Self::new(
            texts
                .iter()
                .map(|t| GeneratorSequence::parse(t))
                .collect::<Result<_, _>>()?,
        )
    }

    pub fn codes(&self) -> &[GeneratorSequence] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Constraint length of the joint trellis: the longest member's L.
    pub fn constraint_len(&self) -> usize {
        self.codes
            .iter()
            .map(|c| c.constraint_len())
            .max()
            .unwrap()
    }

    pub fn gsws(&self) -> Vec<usize> {
        self.codes.iter().map(|c| c.gsw()).collect()
    }
}

/// Joint trellis of K equal-constraint-length rate-1 codes: one input bit per
/// step, K output bits per branch, 2^m states (state bit j = input at lag j+1).
#[derive(Debug, Clone)]
pub struct JointTrellis {
    memory: usize,
    k: usize,
    /// outputs[(state * 2 + input) * k + code] in {0, 1}
    outputs: Vec<u8>,
}

impl JointTrellis {
    pub fn new(ensemble: &CodeEnsemble) -> Self {
        let m = ensemble.constraint_len() - 1;
        let k = ensemble.len();
        let n_states = 1usize << m;
        let mut outputs = vec![0u8; n_states * 2 * k];
        for state in 0..n_states {
            for input in 0..2usize {
                for (ci, code) in ensemble.codes().iter().enumerate() {
                    let taps = code.taps();
                    let mut out = (input as u8) & taps[0];
                    for j in 0..m.min(taps.len().saturating_sub(1)) {
                        out ^= (((state >> j) as u8) & 1) & taps[j + 1];
                    }
                    outputs[(state * 2 + input) * k + ci] = out;
                }
            }
        }
        Self {
            memory: m,
            k,
            outputs,
        }
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    pub fn num_codes(&self) -> usize {
        self.k
    }

    pub fn next_state(&self, state: usize, input: usize) -> usize {
        ((state << 1) | input) & (self.num_states() - 1)
    }

    /// The K branch output bits for (state, input).
    pub fn branch_outputs(&self, state: usize, input: usize) -> &[u8] {
        let base = (state * 2 + input) * self.k;
        &self.outputs[base..base + self.k]
    }

    fn branch_weight(&self, state: usize, input: usize) -> usize {
        self.branch_outputs(state, input)
            .iter()
            .map(|&b| b as usize)
            .sum()
    }
}

/// Per-code GSW bounds d_k and their sum: d_min,k <= d_k and
/// d_min <= sum_k d_k.
pub fn mhd_bound(ensemble: &CodeEnsemble) -> (Vec<usize>, usize) {
    let per_code = ensemble.gsws();
    let total = per_code.iter().sum();
    (per_code, total)
}

/// Exact minimum Hamming weight over all nonzero input sequences, by
/// lowest-weight diverge-and-remerge path search on the joint trellis.
///
/// Fails with `MhdNotConverged` when unmerged paths lighter than the best
/// remerged one still exist at `search_depth` (catastrophic ensembles).
pub fn exact_mhd(ensemble: &CodeEnsemble, search_depth: usize) -> Result<usize, CodeError> {
    let trellis = JointTrellis::new(ensemble);
    let n_states = trellis.num_states();
    const INF: usize = usize::MAX / 2;

    // Diverge from the zero state on input 1.
    let mut best_merged = INF;
    let mut frontier = vec![INF; n_states];
    let s1 = trellis.next_state(0, 1);
    let w1 = trellis.branch_weight(0, 1);
    if s1 == 0 {
        best_merged = w1;
    } else {
        frontier[s1] = w1;
    }

    for _ in 1..search_depth {
        let open_min = frontier.iter().copied().min().unwrap_or(INF);
        if open_min >= best_merged {
            return Ok(best_merged);
        }
        let mut next = vec![INF; n_states];
        for (state, &w) in frontier.iter().enumerate() {
            if w >= INF {
                continue;
            }
            for input in 0..2usize {
                let nw = w + trellis.branch_weight(state, input);
                let ns = trellis.next_state(state, input);
                if ns == 0 {
                    best_merged = best_merged.min(nw);
                } else if nw < next[ns] {
                    next[ns] = nw;
                }
            }
        }
        frontier = next;
    }
    let open_min = frontier.iter().copied().min().unwrap_or(INF);
    if open_min >= best_merged {
        Ok(best_merged)
    } else {
        Err(CodeError::MhdNotConverged {
            depth: search_depth,
            best: (best_merged < INF).then_some(best_merged),
        })
    }
}

/// Default search depth for [`exact_mhd`]: 10 constraint lengths.
pub fn default_search_depth(ensemble: &CodeEnsemble) -> usize {
    10 * ensemble.constraint_len()
}

/// Massey-Sain criterion for feedforward codes: noncatastrophic iff the
/// GF(2)[D] gcd of the generator polynomials is a pure power of D.
pub fn is_noncatastrophic(ensemble: &CodeEnsemble) -> bool {
    let g = ensemble
        .codes()
        .iter()
        .map(|c| c.polynomial())
        .fold(0u64, gf2_poly_gcd);
    g.count_ones() == 1
}

fn gf2_poly_gcd(a: u64, b: u64) -> u64 {
    fn rem(mut a: u64, b: u64) -> u64 {
        let db = 63 - b.leading_zeros() as i32;
        loop {
            if a == 0 {
                return 0;
            }
            let da = 63 - a.leading_zeros() as i32;
            if da < db {
                return a;
            }
            a ^= b << (da - db);
        }
    }
    let (mut x, mut y) = (a, b);
    while y != 0 {
        let r = rem(x, y);
        x = y;
        y = r;
    }
    x
}

/// Per-relay link SNRs (linear): the SISO encoder input SNR on the
/// source-to-relay side and the relay-to-destination SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSnrProfile {
    sr_in: Vec<f64>,
    rd: Vec<f64>,
}

impl LinkSnrProfile {
    pub fn new(sr_in: Vec<f64>, rd: Vec<f64>) -> Result<Self, CodeError> {
        if sr_in.len() != rd.len()
            || sr_in.is_empty()
            || sr_in
                .iter()
                .chain(rd.iter())
                .any(|&v| !(v.is_finite() && v > 0.0))
        {
            return Err(CodeError::InvalidSnrProfile);
        }
        Ok(Self { sr_in, rd })
    }

    pub fn len(&self) -> usize {
        self.sr_in.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sr_in.is_empty()
    }

    pub fn sr_in(&self) -> &[f64] {
        &self.sr_in
    }

    pub fn rd(&self) -> &[f64] {
        &self.rd
    }

    fn rd_all_equal(&self) -> bool {
        let first = self.rd[0];
        self.rd
            .iter()
            .all(|&v| (v - first).abs() <= 1e-9 * first.abs())
    }
}

/// Which form of the per-relay equivalent destination SNR to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhoForm {
    /// High-SNR approximation: the form the pairing analysis rests on.
    #[default]
    HighSnr,
    /// Exact equivalent destination SNR.
    Exact,
}

/// Per-relay equivalent destination SNR rho(d, gamma_rd, gamma_sr,in).
///
/// The default high-SNR form is gamma_rd * gamma_in / (gamma_in / d +
/// gamma_rd); it is strictly increasing in d and in both SNRs.
pub fn rho(d: usize, snr_rd: f64, snr_sr_in: f64) -> f64 {
    rho_with_form(d, snr_rd, snr_sr_in, RhoForm::HighSnr)
}

pub fn rho_with_form(d: usize, snr_rd: f64, snr_sr_in: f64, form: RhoForm) -> f64 {
    debug_assert!(d >= 1 && snr_rd > 0.0 && snr_sr_in > 0.0);
    match form {
        RhoForm::HighSnr => snr_rd * snr_sr_in / (snr_sr_in / d as f64 + snr_rd),
        RhoForm::Exact => {
            let a = (1.0 + 1.0 / snr_sr_in).powi(d as i32);
            snr_rd / ((a - 1.0) * snr_rd + a)
        }
    }
}

/// Bijective assignment of constituent codes to relays:
/// `relay_for_code[code_index] = relay_index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingAssignment {
    relay_for_code: Vec<usize>,
}

impl PairingAssignment {
    pub fn new(relay_for_code: Vec<usize>) -> Option<Self> {
        let k = relay_for_code.len();
        let mut seen = vec![false; k];
        for &r in &relay_for_code {
            if r >= k || seen[r] {
                return None;
            }
            seen[r] = true;
        }
        Some(Self { relay_for_code })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            relay_for_code: (0..k).collect(),
        }
    }

    pub fn relay_for_code(&self) -> &[usize] {
        &self.relay_for_code
    }

    /// Inverse view: `code_for_relay[relay_index] = code_index`.
    pub fn code_for_relay(&self) -> Vec<usize> {
        let mut inv = vec![0usize; self.relay_for_code.len()];
        for (code, &relay) in self.relay_for_code.iter().enumerate() {
            inv[relay] = code;
        }
        inv
    }

    pub fn len(&self) -> usize {
        self.relay_for_code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relay_for_code.is_empty()
    }
}

/// Sum of rho over relays under a given assignment.
pub fn pairing_objective(
    assignment: &PairingAssignment,
    ensemble: &CodeEnsemble,
    profile: &LinkSnrProfile,
    form: RhoForm,
) -> f64 {
    assignment
        .relay_for_code()
        .iter()
        .enumerate()
        .map(|(code, &relay)| {
            rho_with_form(
                ensemble.codes()[code].gsw(),
                profile.rd()[relay],
                profile.sr_in()[relay],
                form,
            )
        })
        .sum()
}

/// Analytic high-SNR BER approximation 0.5 * B_dfree * exp(-sum_k rho_k),
/// using the GSWs as the per-code distances.
pub fn ber_approx(
    assignment: &PairingAssignment,
    ensemble: &CodeEnsemble,
    profile: &LinkSnrProfile,
    b_dfree: f64,
) -> f64 {
    0.5 * b_dfree * (-pairing_objective(assignment, ensemble, profile, RhoForm::HighSnr)).exp()
}

/// Optimal code-to-relay pairing: the code with the k-th largest GSW goes to
/// the relay with the k-th largest input SNR. Among equally strong relays a
/// code keeps its same-index relay when possible (so equal SNRs yield the
/// identity), falling back to the lowest remaining index. Requires equal
/// relay-to-destination SNRs; otherwise falls back to the exhaustive search.
pub fn optimal_pairing(
    ensemble: &CodeEnsemble,
    profile: &LinkSnrProfile,
) -> Result<PairingAssignment, CodeError> {
    if profile.len() != ensemble.len() {
        return Err(CodeError::ProfileSizeMismatch {
            profile: profile.len(),
            codes: ensemble.len(),
        });
    }
    if !profile.rd_all_equal() {
        return pairing_oracle(ensemble, profile);
    }
    let k = ensemble.len();
    let mut code_order: Vec<usize> = (0..k).collect();
    code_order.sort_by(|&a, &b| ensemble.codes()[b].gsw().cmp(&ensemble.codes()[a].gsw()));
    let sr = profile.sr_in();
    let mut remaining: Vec<usize> = (0..k).collect();
    let mut relay_for_code = vec![0usize; k];
    for &code in &code_order {
        let best = remaining
            .iter()
            .map(|&r| sr[r])
            .fold(f64::NEG_INFINITY, f64::max);
        let pick = remaining
            .iter()
            .copied()
            .filter(|&r| sr[r] == best)
            .find(|&r| r == code)
            .unwrap_or_else(|| {
                remaining
                    .iter()
                    .copied()
                    .find(|&r| sr[r] == best)
                    .expect("remaining is nonempty")
            });
        relay_for_code[code] = pick;
        remaining.retain(|&r| r != pick);
    }
    Ok(PairingAssignment::new(relay_for_code).expect("rank matching is a bijection"))
}

/// Exhaustive pairing search maximizing sum_k rho_k over all K! assignments.
pub fn pairing_oracle(
    ensemble: &CodeEnsemble,
    profile: &LinkSnrProfile,
) -> Result<PairingAssignment, CodeError> {
    if profile.len() != ensemble.len() {
        return Err(CodeError::ProfileSizeMismatch {
            profile: profile.len(),
            codes: ensemble.len(),
        });
    }
    let k = ensemble.len();
    if k > 8 {
        return Err(CodeError::PairingTooLarge(k));
    }
    let best = (0..k)
        .permutations(k)
        .map(|perm| PairingAssignment::new(perm).unwrap())
        .max_by(|a, b| {
            pairing_objective(a, ensemble, profile, RhoForm::HighSnr).total_cmp(
                &pairing_objective(b, ensemble, profile, RhoForm::HighSnr),
            )
        })
        .unwrap();
    Ok(best)
}

/// Closed-form coding gains of the optimally paired two-relay (101)/(111)
/// ensemble: (gain over un-ordered pairing, gain over SIR). The input SNRs
/// are gamma_sr1,in and gamma_sr1,in / alpha0 with gamma_rd =
/// gamma_sr1,in / gamma_gap.
pub fn example2_gains(gamma_gap: f64, alpha0: f64, gamma_sr1_in: f64) -> (f64, f64) {
    assert!(gamma_gap > 0.0 && alpha0 > 1.0 && gamma_sr1_in > 0.0);
    let g = gamma_gap;
    let a = alpha0;
    let gain_unordered = g * (a - 1.0) * (5.0 * g + 6.0 * (1.0 + a))
        / ((g + 3.0) * (g + 2.0 * a) * (g + 2.0) * (g + 3.0 * a))
        * gamma_sr1_in;
    let gain_sir = g * (3.0 * g * g + (4.0 + 6.0 * a) * g + (4.0 * a * a + 3.0))
        / ((g + 3.0) * (g + 2.0 * a) * (g + 1.0) * (g + a))
        * gamma_sr1_in;
    (gain_unordered, gain_sir)
}
