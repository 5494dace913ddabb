//! `disc`: Monte Carlo FER/BER simulation of distributed soft coding in
//! two-hop parallel relay networks, with code-analysis and pairing utilities.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use disc_core::analysis::{
    diversity_slope, gain_at_fer, FerCurve, FerPoint, NoisePdfConfig,
};
use disc_core::channel::db_to_linear;
use disc_core::code_algebra::{
    default_search_depth, exact_mhd, is_noncatastrophic, mhd_bound, optimal_pairing, CodeEnsemble,
    LinkSnrProfile,
};
use disc_core::sim::{
    emit, list_presets, noise_pdf_render, parse_config, preset, render_config, run_scenario,
    ScenarioSpec,
};

#[derive(Parser)]
#[command(name = "disc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation scenario from a preset or a config file.
    Run(RunArgs),
    /// List the built-in scenario presets.
    ListPresets,
    /// Collect the destination-noise histogram of a single DISC relay.
    NoisePdf(NoisePdfArgs),
    /// Post-process curve files: dB gain at a target FER, diversity slope.
    Analyze(AnalyzeArgs),
    /// Generator-sequence analysis: distances and optimal pairing.
    Codes(CodesArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario name (see list-presets).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Scenario config file (flat key = value text).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for the deterministic rng streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV and plot data.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Stop a sweep point after this many frame errors (0 = never).
    #[arg(long)]
    min_frame_errors: Option<u64>,
    /// Hard frame cap per sweep point.
    #[arg(long)]
    max_frames: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Print the resolved scenario as config text and exit.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct NoisePdfArgs {
    /// Per-hop average SNR in dB.
    #[arg(long)]
    snr_db: f64,
    #[arg(long, default_value_t = 1000)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the histogram CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(subcommand)]
    what: AnalyzeCommand,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// dB gain of the first curve over the second at the target FER.
    Gain {
        #[arg(long)]
        target_fer: f64,
        /// Exactly two plot-data files (`snr_db fer ber`).
        files: Vec<PathBuf>,
    },
    /// Diversity-order slope of each curve over an FER window.
    Slope {
        #[arg(long, default_value_t = 1e-1)]
        fer_hi: f64,
        #[arg(long, default_value_t = 1e-3)]
        fer_lo: f64,
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct CodesArgs {
    #[command(subcommand)]
    what: CodesCommand,
}

#[derive(Subcommand)]
enum CodesCommand {
    /// Per-code GSWs, the GSW-sum distance bound and the exact MHD.
    Mhd {
        /// Comma-separated generators, binary (101) or octal (5).
        #[arg(long, value_delimiter = ',')]
        generators: Vec<String>,
    },
    /// Optimal code-to-relay pairing for given first-hop SNRs.
    Pair {
        #[arg(long, value_delimiter = ',')]
        generators: Vec<String>,
        /// Per-relay first-hop SNRs in dB (default: all equal).
        #[arg(long, value_delimiter = ',')]
        snrs: Option<Vec<f64>>,
    },
}

fn main() {
    env_logger::init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::ListPresets => {
            for (name, desc) in list_presets() {
                println!("{name:8} {desc}");
            }
            Ok(())
        }
        Command::NoisePdf(args) => cmd_noise_pdf(args),
        Command::Analyze(args) => match args.what {
            AnalyzeCommand::Gain { target_fer, files } => cmd_gain(target_fer, &files),
            AnalyzeCommand::Slope { fer_hi, fer_lo, files } => cmd_slope(fer_hi, fer_lo, &files),
        },
        Command::Codes(args) => match args.what {
            CodesCommand::Mhd { generators } => cmd_mhd(&generators),
            CodesCommand::Pair { generators, snrs } => cmd_pair(&generators, snrs.as_deref()),
        },
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut spec: ScenarioSpec = match (&args.preset, &args.config) {
        (Some(name), None) => preset(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text)?
        }
        _ => bail!("exactly one of --preset or --config is required"),
    };
    if let Some(seed) = args.seed {
        spec.master_seed = seed;
    }
    if let Some(v) = args.min_frame_errors {
        spec.min_frame_errors = v;
    }
    if let Some(v) = args.max_frames {
        spec.max_frames = v;
    }
    if args.dry_run {
        print!("{}", render_config(&spec));
        return Ok(());
    }
    let result = match args.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")?
            .install(|| run_scenario(&spec)),
        None => run_scenario(&spec),
    }?;
    let paths = emit(&result, &args.out)?;
    for scheme in &result.schemes {
        for p in scheme.curve.points() {
            println!(
                "{:16} snr {:6.2} dB  frames {:8}  fer {:.3e}  ber {:.3e}",
                scheme.label, p.snr_db, p.frames, p.fer, p.ber
            );
        }
    }
    eprintln!(
        "wrote {} files to {} in {:.1} s",
        paths.len(),
        args.out.display(),
        result.wall_seconds
    );
    Ok(())
}

fn cmd_noise_pdf(args: NoisePdfArgs) -> Result<()> {
    let mut cfg = NoisePdfConfig::new(args.snr_db, args.frames);
    cfg.seed = args.seed;
    let (study, text) = noise_pdf_render(&cfg);
    eprintln!(
        "variance: empirical {:.6} model {:.6} | excess kurtosis {:.4} | KS vs Gaussian {:.4}",
        study.empirical_variance,
        study.predicted_variance,
        study.excess_kurtosis,
        study.ks_distance
    );
    match args.out {
        Some(path) => std::fs::write(&path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Loads a plot-data file: a `snr_db fer ber` header then one point per line.
fn load_curve(path: &PathBuf) -> Result<FerCurve> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("snr_db") || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 {
            bail!("{}:{}: expected `snr_db fer [ber]`", path.display(), i + 1);
        }
        let snr_db: f64 = fields[0]
            .parse()
            .with_context(|| format!("{}:{}: snr_db", path.display(), i + 1))?;
        let fer: f64 = fields[1]
            .parse()
            .with_context(|| format!("{}:{}: fer", path.display(), i + 1))?;
        let ber: f64 = fields
            .get(2)
            .map(|f| f.parse())
            .transpose()
            .with_context(|| format!("{}:{}: ber", path.display(), i + 1))?
            .unwrap_or(fer);
        // Reconstruct nominal counts; only the ratios matter downstream.
        let frames = 1_000_000u64;
        points.push(FerPoint {
            snr_db,
            frames,
            frame_errors: (fer * frames as f64).round() as u64,
            bit_errors: (ber * frames as f64).round() as u64,
            fer,
            ber: ber.min(fer),
        });
    }
    FerCurve::new(points).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn cmd_gain(target_fer: f64, files: &[PathBuf]) -> Result<()> {
    let [a, b] = files else {
        bail!("gain needs exactly two curve files, got {}", files.len());
    };
    let gain = gain_at_fer(&load_curve(a)?, &load_curve(b)?, target_fer)?;
    println!(
        "{:+.3} dB  ({} over {} at FER {:.1e})",
        gain,
        a.display(),
        b.display(),
        target_fer
    );
    Ok(())
}

fn cmd_slope(fer_hi: f64, fer_lo: f64, files: &[PathBuf]) -> Result<()> {
    if files.is_empty() {
        bail!("slope needs at least one curve file");
    }
    for path in files {
        let slope = diversity_slope(&load_curve(path)?, (fer_hi, fer_lo))?;
        println!("{}  diversity {:.3}", path.display(), slope);
    }
    Ok(())
}

fn parse_ensemble(generators: &[String]) -> Result<CodeEnsemble> {
    if generators.is_empty() {
        bail!("--generators must list at least one generator");
    }
    let refs: Vec<&str> = generators.iter().map(String::as_str).collect();
    CodeEnsemble::parse(&refs).map_err(|e| anyhow!("{e}"))
}

fn cmd_mhd(generators: &[String]) -> Result<()> {
    let ensemble = parse_ensemble(generators)?;
    let (per_code, total) = mhd_bound(&ensemble);
    for (g, d) in ensemble.codes().iter().zip(&per_code) {
        println!("generator {:?}  gsw {}", g.taps(), d);
    }
    println!("gsw-sum distance bound: {total}");
    println!(
        "noncatastrophic: {}",
        if is_noncatastrophic(&ensemble) { "yes" } else { "no" }
    );
    match exact_mhd(&ensemble, default_search_depth(&ensemble)) {
        Ok(d) => println!("exact mhd: {d}"),
        Err(e) => println!("exact mhd: {e}"),
    }
    Ok(())
}

fn cmd_pair(generators: &[String], snrs_db: Option<&[f64]>) -> Result<()> {
    let ensemble = parse_ensemble(generators)?;
    let k = ensemble.len();
    let sr: Vec<f64> = match snrs_db {
        Some(list) => {
            if list.len() != k {
                bail!("--snrs lists {} values for {} generators", list.len(), k);
            }
            list.iter().map(|&db| db_to_linear(db)).collect()
        }
        None => vec![1.0; k],
    };
    let profile = LinkSnrProfile::new(sr, vec![1.0; k]).map_err(|e| anyhow!("{e}"))?;
    let pairing = optimal_pairing(&ensemble, &profile).map_err(|e| anyhow!("{e}"))?;
    for (code, &relay) in pairing.relay_for_code().iter().enumerate() {
        println!(
            "code {} (generator {:?}, gsw {}) -> relay {}",
            code,
            ensemble.codes()[code].taps(),
            ensemble.codes()[code].gsw(),
            relay + 1
        );
    }
    Ok(())
}
