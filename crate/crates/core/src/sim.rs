//! Scenario configuration, deterministic seeded parallel Monte Carlo driving,
//! adaptive stopping and persistence of results as delimited text.
//!
//! Determinism contract: frame i of scheme s at SNR index j draws from an rng
//! stream derived only from (master seed, s, j, i), and batches end on fixed
//! frame-count boundaries, so results are byte-identical at any worker count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{FerCurve, FerPoint, NoisePdfConfig, NoisePdfStudy};
use crate::channel::{db_to_linear, ChannelMode, LinkBudget};
use crate::code_algebra::{CodeEnsemble, GeneratorSequence, LinkSnrProfile, PairingAssignment};
use crate::relay::{run_frame, RelayError, Scheme, SchemeConfig};

/// Frames simulated between stopping-rule checks; a fixed batch size keeps
/// stopping decisions independent of scheduling.
const BATCH_FRAMES: u64 = 512;

pub const DEFAULT_FRAME_LEN: usize = 130;
pub const DEFAULT_MIN_FRAME_ERRORS: u64 = 100;
pub const DEFAULT_MAX_FRAMES: u64 = 2_000_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario field {field}: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("unknown preset {0:?}; see list_presets()")]
    UnknownPreset(String),
    #[error("config line {line}: {reason}")]
    ConfigParse { line: usize, reason: String },
    #[error("scheme {label}: {source}")]
    SchemeSetup {
        label: String,
        #[source]
        source: RelayError,
    },
    #[error("code error in scheme {label}: {reason}")]
    SchemeCode { label: String, reason: String },
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// How constituent codes are assigned to relays.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairingMode {
    /// Largest GSW to the strongest first hop.
    Optimal,
    /// The reverse: largest GSW to the weakest first hop.
    Unordered,
    /// Explicit relay_for_code permutation.
    Fixed(Vec<usize>),
}

/// One scheme to simulate within a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeEntry {
    pub label: String,
    pub scheme: Scheme,
    /// Generator texts, empty for SIR.
    pub generators: Vec<String>,
    pub pairing: PairingMode,
}

impl SchemeEntry {
    pub fn disc(generators: &[&str], pairing: PairingMode) -> Self {
        Self::coded(Scheme::Disc, generators, pairing)
    }

    pub fn df(generators: &[&str], pairing: PairingMode) -> Self {
        Self::coded(Scheme::Df, generators, pairing)
    }

    fn coded(scheme: Scheme, generators: &[&str], pairing: PairingMode) -> Self {
        let gens: Vec<String> = generators.iter().map(|s| s.to_string()).collect();
        let label = Self::auto_label(scheme, &gens, &pairing);
        Self {
            label,
            scheme,
            generators: gens,
            pairing,
        }
    }

    pub fn sir() -> Self {
        Self {
            label: "sir".into(),
            scheme: Scheme::Sir,
            generators: Vec::new(),
            pairing: PairingMode::Optimal,
        }
    }

    fn auto_label(scheme: Scheme, generators: &[String], pairing: &PairingMode) -> String {
        let kind = match scheme {
            Scheme::Disc => "disc",
            Scheme::Sir => "sir",
            Scheme::Df => "df",
        };
        let states = generators
            .iter()
            .filter_map(|g| GeneratorSequence::parse(g).ok())
            .map(|g| 1usize << g.memory())
            .max()
            .unwrap_or(1);
        let suffix = match pairing {
            PairingMode::Optimal => "opt",
            PairingMode::Unordered => "unord",
            PairingMode::Fixed(_) => "fixed",
        };
        match scheme {
            Scheme::Sir => "sir".into(),
            Scheme::Df => format!("{kind}-{states}st"),
            Scheme::Disc => format!("{kind}-{states}st-{suffix}"),
        }
    }
}

/// Full description of one simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub schemes: Vec<SchemeEntry>,
    pub num_relays: usize,
    pub channel: ChannelMode,
    /// Per-relay first-hop SNR offset (dB) added to the swept base SNR.
    pub sr_offsets_db: Vec<f64>,
    /// Second-hop SNR offset (dB) from the swept base SNR.
    pub rd_offset_db: f64,
    pub snr_start_db: f64,
    pub snr_stop_db: f64,
    pub snr_step_db: f64,
    pub frame_len: usize,
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub master_seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let err = |field, reason: String| Err(SimError::InvalidField { field, reason });
        if self.schemes.is_empty() {
            return err("schemes", "at least one scheme required".into());
        }
        if self.num_relays == 0 {
            return err("num_relays", "must be >= 1".into());
        }
        if self.sr_offsets_db.len() != self.num_relays {
            return err(
                "sr_offsets_db",
                format!(
                    "length {} != num_relays {}",
                    self.sr_offsets_db.len(),
                    self.num_relays
                ),
            );
        }
        if self.snr_step_db <= 0.0 || self.snr_stop_db < self.snr_start_db {
            return err("snr_step_db", "sweep must be nonempty with positive step".into());
        }
        if self.max_frames == 0 {
            return err("max_frames", "must be >= 1".into());
        }
        for entry in &self.schemes {
            if entry.scheme != Scheme::Sir && entry.generators.len() != self.num_relays {
                return err(
                    "schemes",
                    format!(
                        "scheme {} has {} generators for {} relays",
                        entry.label,
                        entry.generators.len(),
                        self.num_relays
                    ),
                );
            }
        }
        // frame_len vs constraint length is checked at scheme setup.
        Ok(())
    }

    pub fn snr_points(&self) -> Vec<f64> {
        let mut v = Vec::new();
        let mut s = self.snr_start_db;
        while s <= self.snr_stop_db + 1e-9 {
            v.push(s);
            s += self.snr_step_db;
        }
        v
    }

    /// Link budget at one swept base SNR (dB).
    pub fn budget_at(&self, base_db: f64) -> LinkBudget {
        let sr: Vec<f64> = self.sr_offsets_db.iter().map(|o| base_db + o).collect();
        LinkBudget::from_snrs_db(&sr, base_db + self.rd_offset_db)
            .expect("validated offsets produce a positive budget")
    }
}

/// Why a sweep point stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    MinFrameErrors,
    MaxFrames,
}

/// Results of one scheme across the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub label: String,
    pub curve: FerCurve,
    pub stop_reasons: Vec<StopReason>,
    /// Measured average per-symbol relay transmit power across all frames.
    pub avg_tx_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub spec: ScenarioSpec,
    pub schemes: Vec<SchemeResult>,
    pub wall_seconds: f64,
    pub version: String,
    pub seed: u64,
}

/// Resolves a scheme entry into a runnable configuration at the given link
/// budget (the pairing depends only on SNR ordering, which the sweep
/// preserves, so one resolution serves the whole sweep).
fn resolve_scheme(
    spec: &ScenarioSpec,
    entry: &SchemeEntry,
    budget: &LinkBudget,
) -> Result<SchemeConfig, SimError> {
    let label = entry.label.clone();
    if entry.scheme == Scheme::Sir {
        return Ok(SchemeConfig::sir(spec.num_relays, spec.frame_len));
    }
    let gens: Vec<&str> = entry.generators.iter().map(String::as_str).collect();
    let ensemble = CodeEnsemble::parse(&gens).map_err(|e| SimError::SchemeCode {
        label: label.clone(),
        reason: e.to_string(),
    })?;
    let pairing = resolve_pairing(&entry.pairing, &ensemble, budget).map_err(|reason| {
        SimError::SchemeCode {
            label: label.clone(),
            reason,
        }
    })?;
    let build = match entry.scheme {
        Scheme::Disc => SchemeConfig::disc(ensemble, &pairing, spec.frame_len),
        Scheme::Df => SchemeConfig::df(ensemble, &pairing, spec.frame_len),
        Scheme::Sir => unreachable!(),
    };
    build.map_err(|source| SimError::SchemeSetup { label, source })
}

fn resolve_pairing(
    mode: &PairingMode,
    ensemble: &CodeEnsemble,
    budget: &LinkBudget,
) -> Result<PairingAssignment, String> {
    let k = ensemble.len();
    let sr: Vec<f64> = (0..k).map(|r| budget.avg_snr_sr(r)).collect();
    let rd = vec![budget.avg_snr_rd(); k];
    match mode {
        PairingMode::Fixed(perm) => PairingAssignment::new(perm.clone())
            .ok_or_else(|| format!("{perm:?} is not a permutation of 0..{k}")),
        PairingMode::Optimal => {
            let profile = LinkSnrProfile::new(sr, rd).map_err(|e| e.to_string())?;
            crate::code_algebra::optimal_pairing(ensemble, &profile).map_err(|e| e.to_string())
        }
        PairingMode::Unordered => {
            // Anti-optimal: the largest GSW goes to the weakest first hop.
            let mut code_order: Vec<usize> = (0..k).collect();
            code_order
                .sort_by(|&a, &b| ensemble.codes()[b].gsw().cmp(&ensemble.codes()[a].gsw()));
            let mut relay_order: Vec<usize> = (0..k).collect();
            relay_order.sort_by(|&a, &b| sr[a].total_cmp(&sr[b]));
            let mut relay_for_code = vec![0usize; k];
            for (rank, &code) in code_order.iter().enumerate() {
                relay_for_code[code] = relay_order[rank];
            }
            Ok(PairingAssignment::new(relay_for_code).expect("rank matching is a bijection"))
        }
    }
}

/// Derives the per-frame rng stream from the run coordinates.
pub fn frame_rng(master_seed: u64, scheme_idx: u64, snr_idx: u64, frame_idx: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&scheme_idx.to_le_bytes());
    seed[16..24].copy_from_slice(&snr_idx.to_le_bytes());
    seed[24..32].copy_from_slice(&frame_idx.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

/// Runs the full scenario: every scheme at every sweep point until the
/// stopping rule fires. Frames within a point run in parallel on the current
/// rayon pool; aggregation order is fixed by frame index.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<RunResult, SimError> {
    spec.validate()?;
    let started = Instant::now();
    let snrs = spec.snr_points();
    let mut schemes = Vec::with_capacity(spec.schemes.len());

    for (scheme_idx, entry) in spec.schemes.iter().enumerate() {
        let cfg = resolve_scheme(spec, entry, &spec.budget_at(snrs[0]))?;
        let mut points = Vec::with_capacity(snrs.len());
        let mut stop_reasons = Vec::with_capacity(snrs.len());
        let mut power_sum = 0.0;
        let mut power_frames = 0u64;

        for (snr_idx, &snr_db) in snrs.iter().enumerate() {
            let budget = spec.budget_at(snr_db);
            let mut frames = 0u64;
            let mut frame_errors = 0u64;
            let mut bit_errors = 0u64;
            loop {
                let batch = BATCH_FRAMES.min(spec.max_frames - frames);
                let outcomes: Vec<(u64, bool, f64)> = (frames..frames + batch)
                    .into_par_iter()
                    .map(|frame_idx| {
                        let mut rng = frame_rng(
                            spec.master_seed,
                            scheme_idx as u64,
                            snr_idx as u64,
                            frame_idx,
                        );
                        let out = run_frame(&cfg, &budget, spec.channel, &mut rng);
                        (out.bit_errors as u64, out.frame_error, out.tx_power)
                    })
                    .collect();
                for (be, fe, pw) in outcomes {
                    bit_errors += be;
                    frame_errors += u64::from(fe);
                    power_sum += pw;
                }
                frames += batch;
                power_frames += batch;
                if frames >= spec.max_frames {
                    stop_reasons.push(StopReason::MaxFrames);
                    break;
                }
                if spec.min_frame_errors > 0 && frame_errors >= spec.min_frame_errors {
                    stop_reasons.push(StopReason::MinFrameErrors);
                    break;
                }
            }
            points.push(FerPoint::from_counts(
                snr_db,
                frames,
                frame_errors,
                bit_errors,
                spec.frame_len,
            ));
        }

        schemes.push(SchemeResult {
            label: entry.label.clone(),
            curve: FerCurve::new(points).expect("counts yield valid points"),
            stop_reasons,
            avg_tx_power: power_sum / power_frames.max(1) as f64,
        });
    }

    Ok(RunResult {
        spec: spec.clone(),
        schemes,
        wall_seconds: started.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: spec.master_seed,
    })
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

const G2_2ST: [&str; 2] = ["11", "1"];
const G2_4ST: [&str; 2] = ["101", "111"];
const G2_8ST: [&str; 2] = ["1101", "1111"];
const G3_4ST: [&str; 3] = ["111", "111", "101"];

fn base_spec(name: &str, k: usize, channel: ChannelMode) -> ScenarioSpec {
    ScenarioSpec {
        name: name.into(),
        schemes: Vec::new(),
        num_relays: k,
        channel,
        sr_offsets_db: vec![0.0; k],
        rd_offset_db: 0.0,
        snr_start_db: 0.0,
        snr_stop_db: 14.0,
        snr_step_db: 2.0,
        frame_len: DEFAULT_FRAME_LEN,
        min_frame_errors: DEFAULT_MIN_FRAME_ERRORS,
        max_frames: DEFAULT_MAX_FRAMES,
        master_seed: 0,
    }
}

/// Named scenario presets mirroring the simulation-study configurations.
pub fn preset(name: &str) -> Result<ScenarioSpec, SimError> {
    let spec = match name {
        // 2 relays, AWGN, second first hop 3 dB stronger, rd equal to base.
        "fig5" => {
            let mut s = base_spec(name, 2, ChannelMode::Awgn);
            s.sr_offsets_db = vec![0.0, 3.0];
            s.schemes = vec![
                SchemeEntry::disc(&G2_4ST, PairingMode::Optimal),
                SchemeEntry::disc(&G2_4ST, PairingMode::Unordered),
                SchemeEntry::sir(),
                SchemeEntry::df(&G2_2ST, PairingMode::Optimal),
                SchemeEntry::df(&G2_4ST, PairingMode::Optimal),
                SchemeEntry::df(&G2_8ST, PairingMode::Optimal),
            ];
            s
        }
        // Same topology, first hops 3 dB above the second hop.
        "fig6" => {
            let mut s = base_spec(name, 2, ChannelMode::Awgn);
            s.sr_offsets_db = vec![0.0, 3.0];
            s.rd_offset_db = -3.0;
            s.schemes = vec![
                SchemeEntry::disc(&G2_2ST, PairingMode::Optimal),
                SchemeEntry::disc(&G2_4ST, PairingMode::Optimal),
                SchemeEntry::disc(&G2_8ST, PairingMode::Optimal),
                SchemeEntry::sir(),
            ];
            s
        }
        // 2 relays, Rayleigh, equal average first hops.
        "fig7" | "fig8" => {
            let mut s = base_spec(name, 2, ChannelMode::Rayleigh);
            s.rd_offset_db = if name == "fig8" { 10.0 } else { 0.0 };
            s.snr_stop_db = 36.0;
            s.snr_step_db = 4.0;
            s.schemes = vec![
                SchemeEntry::disc(&G2_4ST, PairingMode::Optimal),
                SchemeEntry::sir(),
                SchemeEntry::df(&G2_4ST, PairingMode::Optimal),
            ];
            s
        }
        // 3 relays, AWGN, staggered first hops.
        "fig9" | "fig10" => {
            let mut s = base_spec(name, 3, ChannelMode::Awgn);
            s.sr_offsets_db = vec![0.0, 2.0, 4.0];
            s.rd_offset_db = if name == "fig10" { 3.0 } else { 0.0 };
            s.schemes = vec![
                SchemeEntry::disc(&G3_4ST, PairingMode::Optimal),
                SchemeEntry::disc(&G3_4ST, PairingMode::Unordered),
                SchemeEntry::sir(),
                SchemeEntry::df(&G3_4ST, PairingMode::Optimal),
            ];
            s
        }
        // 3 relays, Rayleigh, equal average first hops.
        "fig11" | "fig12" => {
            let mut s = base_spec(name, 3, ChannelMode::Rayleigh);
            s.rd_offset_db = if name == "fig12" { 10.0 } else { 0.0 };
            s.snr_stop_db = 36.0;
            s.snr_step_db = 4.0;
            s.schemes = vec![
                SchemeEntry::disc(&G3_4ST, PairingMode::Optimal),
                SchemeEntry::sir(),
                SchemeEntry::df(&G3_4ST, PairingMode::Optimal),
            ];
            s
        }
        other => return Err(SimError::UnknownPreset(other.into())),
    };
    Ok(spec)
}

/// Preset names with a one-line description of the caption-derived setup.
pub fn list_presets() -> Vec<(&'static str, &'static str)> {
    vec![
        ("fig5", "2 relays, AWGN, first hops +0/+3 dB, pairing comparison plus DF 2/4/8-state"),
        ("fig6", "2 relays, AWGN, first hops 3 dB above second hop, DISC 2/4/8-state vs SIR"),
        ("fig7", "2 relays, Rayleigh, equal hops, DISC vs SIR vs DF"),
        ("fig8", "2 relays, Rayleigh, second hop +10 dB, DISC vs SIR vs DF"),
        ("fig9", "3 relays, AWGN, first hops +0/+2/+4 dB, pairing comparison"),
        ("fig10", "3 relays, AWGN, first hops +0/+2/+4 dB, second hop +3 dB"),
        ("fig11", "3 relays, Rayleigh, equal hops, DISC vs SIR vs DF"),
        ("fig12", "3 relays, Rayleigh, second hop +10 dB, DISC vs SIR vs DF"),
    ]
}

// ---------------------------------------------------------------------------
// Config files: flat key-value text, list values in brackets.
// ---------------------------------------------------------------------------

/// Parses a scenario from flat `key = value` text. Lists use brackets
/// (`sr_offsets_db = [0, 3]`); each `scheme = ...` line appends one scheme,
/// e.g. `scheme = disc opt [101, 111]`, `scheme = sir`, `scheme = df [101, 111]`.
pub fn parse_config(text: &str) -> Result<ScenarioSpec, SimError> {
    let mut spec = base_spec("config", 0, ChannelMode::Awgn);
    let mut saw_relays = false;
    let mut saw_offsets = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| SimError::ConfigParse {
            line: line_no,
            reason: "expected key = value".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |reason: String| SimError::ConfigParse { line: line_no, reason };
        match key {
            "name" => spec.name = value.to_string(),
            "channel" => {
                spec.channel = value.parse().map_err(bad)?;
            }
            "relays" => {
                spec.num_relays = value.parse().map_err(|e| bad(format!("relays: {e}")))?;
                saw_relays = true;
            }
            "sr_offsets_db" => {
                spec.sr_offsets_db = parse_list(value).map_err(bad)?;
                saw_offsets = true;
            }
            "rd_offset_db" => spec.rd_offset_db = parse_num(value).map_err(bad)?,
            "snr_start_db" => spec.snr_start_db = parse_num(value).map_err(bad)?,
            "snr_stop_db" => spec.snr_stop_db = parse_num(value).map_err(bad)?,
            "snr_step_db" => spec.snr_step_db = parse_num(value).map_err(bad)?,
            "frame_len" => {
                spec.frame_len = value.parse().map_err(|e| bad(format!("frame_len: {e}")))?
            }
            "min_frame_errors" => {
                spec.min_frame_errors =
                    value.parse().map_err(|e| bad(format!("min_frame_errors: {e}")))?
            }
            "max_frames" => {
                spec.max_frames = value.parse().map_err(|e| bad(format!("max_frames: {e}")))?
            }
            "seed" => spec.master_seed = value.parse().map_err(|e| bad(format!("seed: {e}")))?,
            "scheme" => spec.schemes.push(parse_scheme_line(value).map_err(bad)?),
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    if !saw_offsets && saw_relays {
        spec.sr_offsets_db = vec![0.0; spec.num_relays];
    }
    spec.validate()?;
    Ok(spec)
}

fn parse_num(s: &str) -> Result<f64, String> {
    s.parse().map_err(|e| format!("{s:?}: {e}"))
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let inner = s
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| format!("expected bracketed list, got {s:?}"))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_num)
        .collect()
}

fn parse_scheme_line(value: &str) -> Result<SchemeEntry, String> {
    // Optional bracketed generator list anywhere in the line.
    let (head, gens) = match value.find('[') {
        Some(i) => {
            let close = value.rfind(']').ok_or("unclosed generator list")?;
            let gens: Vec<String> = value[i + 1..close]
                .split(',')
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect();
            (format!("{} {}", &value[..i], &value[close + 1..]), gens)
        }
        None => (value.to_string(), Vec::new()),
    };
    let tokens: Vec<&str> = head.split_whitespace().collect();
    let kind = *tokens.first().ok_or("empty scheme line")?;
    let mut pairing = PairingMode::Optimal;
    for tok in &tokens[1..] {
        pairing = match *tok {
            "opt" | "optimal" => PairingMode::Optimal,
            "unord" | "unordered" => PairingMode::Unordered,
            t if t.starts_with("fixed:") => {
                let perm: Result<Vec<usize>, _> =
                    t[6..].split(',').map(|p| p.trim().parse()).collect();
                PairingMode::Fixed(perm.map_err(|e| format!("fixed permutation: {e}"))?)
            }
            other => return Err(format!("unknown scheme token {other:?}")),
        };
    }
    let gen_refs: Vec<&str> = gens.iter().map(String::as_str).collect();
    match kind {
        "disc" => Ok(SchemeEntry::disc(&gen_refs, pairing)),
        "sir" => Ok(SchemeEntry::sir()),
        "df" => Ok(SchemeEntry::df(&gen_refs, pairing)),
        other => Err(format!("unknown scheme kind {other:?}")),
    }
}

/// Renders a spec back to config text (presets are expressible as configs).
pub fn render_config(spec: &ScenarioSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name = {}", spec.name);
    let channel = match spec.channel {
        ChannelMode::Awgn => "awgn",
        ChannelMode::Rayleigh => "rayleigh",
    };
    let _ = writeln!(out, "channel = {channel}");
    let _ = writeln!(out, "relays = {}", spec.num_relays);
    let offs: Vec<String> = spec.sr_offsets_db.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "sr_offsets_db = [{}]", offs.join(", "));
    let _ = writeln!(out, "rd_offset_db = {}", spec.rd_offset_db);
    let _ = writeln!(out, "snr_start_db = {}", spec.snr_start_db);
    let _ = writeln!(out, "snr_stop_db = {}", spec.snr_stop_db);
    let _ = writeln!(out, "snr_step_db = {}", spec.snr_step_db);
    let _ = writeln!(out, "frame_len = {}", spec.frame_len);
    let _ = writeln!(out, "min_frame_errors = {}", spec.min_frame_errors);
    let _ = writeln!(out, "max_frames = {}", spec.max_frames);
    let _ = writeln!(out, "seed = {}", spec.master_seed);
    for entry in &spec.schemes {
        let kind = match entry.scheme {
            Scheme::Disc => "disc",
            Scheme::Sir => "sir",
            Scheme::Df => "df",
        };
        let mut line = format!("scheme = {kind}");
        if entry.scheme != Scheme::Sir {
            match &entry.pairing {
                PairingMode::Optimal => line.push_str(" opt"),
                PairingMode::Unordered => line.push_str(" unord"),
                PairingMode::Fixed(perm) => {
                    let p: Vec<String> = perm.iter().map(|v| v.to_string()).collect();
                    let _ = write!(line, " fixed:{}", p.join(","));
                }
            }
            let _ = write!(line, " [{}]", entry.generators.join(", "));
        }
        let _ = writeln!(out, "{line}");
    }
    out
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

pub const CSV_HEADER: &str = "scheme,scenario,snr_db,frames,frame_errors,bit_errors,fer,ber,seed";
pub const HISTOGRAM_HEADER: &str = "bin_center,density,condition";

/// Renders the results CSV (header always present, one row per scheme per
/// sweep point).
pub fn render_csv(result: &RunResult) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for scheme in &result.schemes {
        for p in scheme.curve.points() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                scheme.label,
                result.spec.name,
                p.snr_db,
                p.frames,
                p.frame_errors,
                p.bit_errors,
                p.fer,
                p.ber,
                result.seed
            );
        }
    }
    out
}

/// Writes the results CSV plus per-curve plot data (`snr_db fer ber` columns)
/// into `out_dir`; returns the written paths.
pub fn emit(result: &RunResult, out_dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    std::fs::create_dir_all(out_dir).map_err(|source| SimError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let write = |path: PathBuf, content: &str| -> Result<PathBuf, SimError> {
        std::fs::write(&path, content).map_err(|source| SimError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    };
    let mut paths = Vec::new();
    paths.push(write(
        out_dir.join(format!("{}_results.csv", result.spec.name)),
        &render_csv(result),
    )?);
    for scheme in &result.schemes {
        let mut dat = String::from("snr_db fer ber\n");
        for p in scheme.curve.points() {
            let _ = writeln!(dat, "{} {} {}", p.snr_db, p.fer, p.ber);
        }
        paths.push(write(
            out_dir.join(format!("{}_{}.dat", result.spec.name, scheme.label)),
            &dat,
        )?);
    }
    Ok(paths)
}

/// Renders the two conditioned histograms of a noise-PDF study.
pub fn render_histograms(study: &NoisePdfStudy) -> String {
    let mut out = String::new();
    out.push_str(HISTOGRAM_HEADER);
    out.push('\n');
    for hist in [&study.hist_plus, &study.hist_minus] {
        for (center, density) in hist.bin_centers().iter().zip(&hist.densities) {
            let _ = writeln!(out, "{},{},{}", center, density, hist.condition);
        }
    }
    out
}

/// Runs the noise-PDF study and renders its histogram text in one step.
pub fn noise_pdf_render(cfg: &NoisePdfConfig) -> (NoisePdfStudy, String) {
    let study = crate::analysis::noise_pdf(cfg);
    let text = render_histograms(&study);
    (study, text)
}

/// Convenience linear-SNR profile sweep matching a scenario, for analytic
/// overlays.
pub fn profile_sweep(spec: &ScenarioSpec) -> Vec<LinkSnrProfile> {
    spec.snr_points()
        .iter()
        .map(|&base| {
            let sr: Vec<f64> = spec
                .sr_offsets_db
                .iter()
                .map(|o| db_to_linear(base + o))
                .collect();
            let rd = vec![db_to_linear(base + spec.rd_offset_db); spec.num_relays];
            LinkSnrProfile::new(sr, rd).expect("positive linear SNRs")
        })
        .collect()
}
