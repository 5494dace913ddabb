//! Acceptance suite: one test per acceptance criterion, each ending in a
//! single PASS line. The Monte Carlo criteria (8-11) are scaled to
//! desk-scale single-core runtime; their hard requirements are curve
//! orderings at 95% confidence, with the quoted dB gains asserted at the
//! stated tolerances.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use disc_core::analysis::{diversity_slope, gain_at_fer, noise_pdf, FerCurve, NoisePdfConfig};
use disc_core::channel::{bpsk_modulate, db_to_linear, transmit, LinkBudget};
use disc_core::code_algebra::{
    exact_mhd, mhd_bound, optimal_pairing, pairing_objective, pairing_oracle, rho, CodeEnsemble,
    GeneratorSequence, LinkSnrProfile, RhoForm,
};
use disc_core::relay::{joint_bcjr_decode, relay_process_disc, DestinationSideInfo};
use disc_core::sim::{
    emit, preset, render_csv, run_scenario, PairingMode, ScenarioSpec, SchemeEntry,
};
use disc_core::soft_coding::{prob_inference_encode, siso_encode};

fn pass(n: u32, what: &str) {
    println!("ACCEPTANCE {n} ({what}): PASS");
}

/// One-sided two-proportion z statistic for H1: p_a < p_b.
fn z_less(err_a: u64, n_a: u64, err_b: u64, n_b: u64) -> f64 {
    let pa = err_a as f64 / n_a as f64;
    let pb = err_b as f64 / n_b as f64;
    let pool = (err_a + err_b) as f64 / (n_a + n_b) as f64;
    let se = (pool * (1.0 - pool) * (1.0 / n_a as f64 + 1.0 / n_b as f64)).sqrt();
    (pb - pa) / se
}

#[test]
fn criterion_01_siso_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let l = rng.random_range(1..=4usize);
        let mut taps: Vec<u8> = (0..l).map(|_| rng.random_range(0..2u8)).collect();
        taps[0] = 1;
        let text: String = taps.iter().map(|t| if *t == 1 { '1' } else { '0' }).collect();
        let g = GeneratorSequence::parse(&text).unwrap();
        let n = rng.random_range(g.constraint_len()..=32);
        let frame: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let direct = siso_encode(&frame, &g);
        let probs: Vec<(f64, f64)> = frame.iter().map(|&x| ((1.0 + x) / 2.0, (1.0 - x) / 2.0)).collect();
        let inferred = prob_inference_encode(&probs, &g).unwrap();
        for (a, (p0, p1)) in direct.iter().zip(&inferred) {
            worst = worst.max((a - (p0 - p1)).abs());
        }
    }
    assert!(worst < 1e-9, "max abs error {worst}");
    pass(1, "SISO encoder matches probability-inference oracle");
}

#[test]
fn criterion_02_three_tap_sliding_product() {
    let g = GeneratorSequence::parse("111").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let frame: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let out = siso_encode(&frame, &g);
    for n in 0..frame.len() {
        let mut expect = frame[n];
        if n >= 1 {
            expect *= frame[n - 1];
        }
        if n >= 2 {
            expect *= frame[n - 2];
        }
        assert_eq!(out[n], expect, "symbol {n}");
    }
    pass(2, "g=(1,1,1) output is the exact 3-term sliding product");
}

#[test]
fn criterion_03_theorem2_bound() {
    for (texts, expect_exact, expect_bound) in [
        (vec!["101", "111"], 5usize, 5usize),
        (vec!["111", "111", "101"], 8, 8),
    ] {
        let e = CodeEnsemble::parse(&texts).unwrap();
        let (_, bound) = mhd_bound(&e);
        let exact = exact_mhd(&e, 100).unwrap();
        assert_eq!(bound, expect_bound, "{texts:?}");
        assert_eq!(exact, expect_exact, "{texts:?}");
        assert!(exact <= bound && bound - exact <= 1);
    }
    pass(3, "GSW-sum bound meets the exact MHD on the standard ensembles");
}

#[test]
fn criterion_04_pairing_optimality_and_lemma2() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..1000 {
        let k = rng.random_range(2..=6usize);
        let texts: Vec<String> = (0..k)
            .map(|_| {
                let l = rng.random_range(1..=6usize);
                let mut taps: Vec<char> = (0..l)
                    .map(|_| if rng.random_bool(0.5) { '1' } else { '0' })
                    .collect();
                taps[0] = '1';
                taps.into_iter().collect()
            })
            .collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let e = CodeEnsemble::parse(&refs).unwrap();
        let sr: Vec<f64> = (0..k).map(|_| db_to_linear(rng.random_range(-5.0..25.0))).collect();
        let rd = vec![db_to_linear(rng.random_range(-5.0..25.0)); k];
        let profile = LinkSnrProfile::new(sr, rd).unwrap();
        let fast = optimal_pairing(&e, &profile).unwrap();
        let brute = pairing_oracle(&e, &profile).unwrap();
        let of = pairing_objective(&fast, &e, &profile, RhoForm::HighSnr);
        let ob = pairing_objective(&brute, &e, &profile, RhoForm::HighSnr);
        // Equal GSWs allow equivalent permutations whose objective sums
        // differ only in summation order; anything beyond 1 ulp-scale noise
        // is a real suboptimality.
        assert!(
            of >= ob - 1e-12 * ob.abs(),
            "rank matching {of} below oracle {ob}"
        );
    }
    for _ in 0..100_000 {
        let mut v = [0.0f64; 2];
        let mut t = [0.0f64; 2];
        v.fill_with(|| rng.random_range(1e-3..1e3));
        t.fill_with(|| rng.random_range(1e-3..1e3));
        let (v1, v2) = (v[0].max(v[1]), v[0].min(v[1]));
        let (t1, t2) = (t[0].max(t[1]), t[0].min(t[1]));
        if v1 == v2 || t1 == t2 {
            continue;
        }
        assert!(
            1.0 / (v1 + t1) + 1.0 / (v2 + t2) > 1.0 / (v1 + t2) + 1.0 / (v2 + t1),
            "Lemma 2 fails at v=({v1},{v2}) theta=({t1},{t2})"
        );
    }
    pass(4, "rank-matched pairing attains the exhaustive optimum; Lemma 2 holds");
}

#[test]
fn criterion_05_example2_closed_forms() {
    let e = CodeEnsemble::parse(&["101", "111"]).unwrap();
    for gap in [0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
        for alpha0 in [1.01, 1.5, 2.0, 5.0, 10.0] {
            for gamma1 in [0.5, 5.0, 50.0] {
                let (g_un, g_sir) = disc_core::code_algebra::example2_gains(gap, alpha0, gamma1);
                assert!(g_un > 0.0 && g_sir > 0.0, "gap={gap} a0={alpha0}");
                // Direct sums of rho under the three assignments.
                let gamma2 = gamma1 / alpha0;
                let gamma_rd = gamma1 / gap;
                let opt = rho(3, gamma_rd, gamma1) + rho(2, gamma_rd, gamma2);
                let un = rho(2, gamma_rd, gamma1) + rho(3, gamma_rd, gamma2);
                let sir = rho(1, gamma_rd, gamma1) + rho(1, gamma_rd, gamma2);
                assert!((g_un - (opt - un)).abs() < 1e-12 * opt.max(1.0));
                assert!((g_sir - (opt - sir)).abs() < 1e-12 * opt.max(1.0));
                let _ = &e;
            }
        }
    }
    pass(5, "Example-2 closed-form gains positive and equal to direct rho sums");
}

#[test]
fn criterion_06_variance_laws() {
    // Encoder output variance at 10 dB over 1e4 frames with the 4-state code.
    let g = GeneratorSequence::parse("111").unwrap();
    let d = g.gsw();
    let budget = LinkBudget::from_snrs_db(&[10.0], 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let n = 130;
    let mut emp = 0.0;
    let mut model = 0.0;
    let mut count = 0usize;
    for _ in 0..10_000 {
        let bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        let x_b = bpsk_modulate(&bits);
        let amp = (budget.p_s * budget.l_sr[0]).sqrt();
        let rx = transmit(&x_b, amp, Complex64::ONE, budget.sigma2_n, &mut rng);
        let (_, stats, out) = relay_process_disc(&rx, &g, &budget, 0, Complex64::ONE, &x_b);
        let sbes: Vec<f64> = rx
            .iter()
            .map(|&r| disc_core::soft_coding::sbe_from_llr(disc_core::soft_coding::llr_bpsk(
                r,
                Complex64::ONE,
                amp,
                budget.sigma2_n,
            )))
            .collect();
        let encoded = siso_encode(&sbes, &g);
        let x_c = bpsk_modulate(&g.encode_bits(&bits));
        let scale = stats.alpha.powi(d as i32);
        for (e_out, xc) in encoded.iter().zip(&x_c) {
            let w = e_out - scale * xc;
            emp += w * w;
            count += 1;
        }
        model += out.sigma2_out;
    }
    let emp_var = emp / count as f64;
    let model_var = model / 10_000.0;
    assert!(
        (emp_var / model_var - 1.0).abs() < 0.03,
        "encoder output variance: empirical {emp_var} model {model_var}"
    );

    // Destination-noise variance against the equivalent-noise closed form.
    let mut cfg = NoisePdfConfig::new(10.0, 10_000);
    cfg.seed = 1066;
    let study = noise_pdf(&cfg);
    assert!(
        (study.empirical_variance / study.predicted_variance - 1.0).abs() < 0.03,
        "destination variance: empirical {} model {}",
        study.empirical_variance,
        study.predicted_variance
    );
    pass(6, "encoder-output and destination-noise variances match closed forms within 3%");
}

#[test]
fn criterion_07_bcjr_exhaustive_oracle() {
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
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let cases: Vec<(Vec<&str>, Vec<usize>)> = vec![
        (vec!["1"], vec![0]),
        (vec!["11", "1"], vec![1, 0]),
        (vec!["101", "111"], vec![0, 1]),
        (vec!["111", "111", "101"], vec![2, 0, 1]),
    ];
    let mut worst: f64 = 0.0;
    for (texts, assignment) in &cases {
        let e = CodeEnsemble::parse(texts).unwrap();
        let k = assignment.len();
        for n in [5usize, 8, 10] {
            let amps: Vec<f64> = (0..k).map(|_| rng.random_range(0.3..1.5)).collect();
            let sigma2: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.2)).collect();
            let zs: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let side = DestinationSideInfo {
                a: amps.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
                sigma2: sigma2.clone(),
                degenerate: vec![false; k],
            };
            let ys: Vec<Vec<Complex64>> = zs
                .iter()
                .map(|z| z.iter().map(|&v| Complex64::new(v, 0.0)).collect())
                .collect();
            let (llrs, _) = joint_bcjr_decode(&ys, &side, &e, assignment, 0).unwrap();
            // Exhaustive marginalization over all 2^n inputs.
            let mut log_post = Vec::with_capacity(1 << n);
            for v in 0u32..(1 << n) {
                let bits: Vec<u8> = (0..n).map(|i| ((v >> i) & 1) as u8).collect();
                let mut lp = 0.0;
                for r in 0..k {
                    let code = e.codes()[assignment[r]].encode_bits(&bits);
                    for (c, z) in code.iter().zip(&zs[r]) {
                        let x = if *c == 0 { 1.0 } else { -1.0 };
                        let err = z - amps[r] * x;
                        lp -= err * err / sigma2[r];
                    }
                }
                log_post.push(lp);
            }
            for (t, &llr) in llrs.iter().enumerate() {
                let mut l0 = f64::NEG_INFINITY;
                let mut l1 = f64::NEG_INFINITY;
                for (v, &lp) in log_post.iter().enumerate() {
                    if (v >> t) & 1 == 0 {
                        l0 = log_sum_exp(l0, lp);
                    } else {
                        l1 = log_sum_exp(l1, lp);
                    }
                }
                worst = worst.max((llr - (l0 - l1)).abs());
            }
        }
    }
    assert!(worst < 1e-9, "max APP deviation {worst}");
    pass(7, "joint BCJR APPs match exhaustive marginalization");
}

/// Shared fig5-topology sweep used by criteria 8 and 10.
fn fig5_spec(schemes: Vec<SchemeEntry>, start: f64, stop: f64) -> ScenarioSpec {
    let mut spec = preset("fig5").unwrap();
    spec.schemes = schemes;
    spec.snr_start_db = start;
    spec.snr_stop_db = stop;
    spec.snr_step_db = 1.0;
    spec.min_frame_errors = 60;
    spec.max_frames = 150_000;
    spec.master_seed = 2024;
    spec
}

fn curve<'a>(result: &'a disc_core::sim::RunResult, label: &str) -> &'a FerCurve {
    &result
        .schemes
        .iter()
        .find(|s| s.label == label)
        .unwrap_or_else(|| panic!("missing scheme {label}"))
        .curve
}

#[test]
fn criterion_08_fig5_pairing_gain() {
    let spec = fig5_spec(
        vec![
            SchemeEntry::disc(&["101", "111"], PairingMode::Optimal),
            SchemeEntry::disc(&["101", "111"], PairingMode::Unordered),
            SchemeEntry::sir(),
        ],
        3.0,
        11.0,
    );
    let result = run_scenario(&spec).unwrap();
    let opt = curve(&result, "disc-4st-opt");
    let unord = curve(&result, "disc-4st-unord");
    let sir = curve(&result, "sir");

    // Hard requirement: DISC-opt <= DISC-unord <= SIR at high SNR, 95% conf.
    // Pick the highest SNR where the worst curve still has >= 30 errors.
    let idx = (0..opt.points().len())
        .rev()
        .find(|&i| sir.points()[i].frame_errors >= 30 && unord.points()[i].frame_errors >= 30)
        .expect("sweep covers measurable region");
    let (po, pu, ps) = (&opt.points()[idx], &unord.points()[idx], &sir.points()[idx]);
    // opt < unord is a ~2 dB effect: demand significance. unord <= sir can be
    // near-equality, so demand the reverse ordering is not supported at 95%.
    let z_ou = z_less(po.frame_errors, po.frames, pu.frame_errors, pu.frames);
    let z_us = z_less(pu.frame_errors, pu.frames, ps.frame_errors, ps.frames);
    assert!(
        z_ou > 1.645 && z_us > -1.645,
        "ordering at {} dB: z(opt<unord)={z_ou:.2} z(unord<sir)={z_us:.2}",
        po.snr_db
    );

    // Quoted gain: optimal over un-ordered = 2 dB +/- 0.7 dB at FER 1e-3.
    let gain = gain_at_fer(opt, unord, 1e-3).unwrap();
    assert!(
        (gain - 2.0).abs() <= 0.7,
        "opt-vs-unordered gain {gain:.2} dB outside 2 +/- 0.7 dB"
    );
    pass(8, "fig5 pairing ordering (95% conf) and 2 dB optimal-pairing gain");
}

#[test]
fn criterion_09_fig6_state_count_gains() {
    // The 4-state/8-state gap is only ~0.1 dB, so this criterion needs a
    // tighter stopping rule than the other sweeps to resolve the ordering.
    let mut spec = preset("fig6").unwrap();
    spec.snr_start_db = 4.0;
    spec.snr_stop_db = 11.0;
    spec.snr_step_db = 1.0;
    spec.min_frame_errors = 200;
    spec.max_frames = 400_000;
    spec.master_seed = 2025;
    let result = run_scenario(&spec).unwrap();
    let sir = curve(&result, "sir");
    let gains: Vec<f64> = ["disc-2st-opt", "disc-4st-opt", "disc-8st-opt"]
        .iter()
        .map(|label| gain_at_fer(curve(&result, label), sir, 1e-3).unwrap())
        .collect();

    // Hard requirement: monotone improvement with the state count.
    assert!(
        gains[0] > 0.0 && gains[1] > gains[0] && gains[2] > gains[1],
        "gains over SIR not monotone in state count: {gains:?}"
    );
    for (g, target) in gains.iter().zip([1.7, 2.4, 2.5]) {
        assert!(
            (g - target).abs() <= 0.7,
            "gain {g:.2} dB outside {target} +/- 0.7 dB (all: {gains:?})"
        );
    }
    pass(9, "fig6 DISC gains over SIR monotone and near 1.7/2.4/2.5 dB");
}

#[test]
fn criterion_10_df_error_propagation() {
    let mut spec = fig5_spec(
        vec![
            SchemeEntry::df(&["11", "1"], PairingMode::Optimal),
            SchemeEntry::df(&["101", "111"], PairingMode::Optimal),
            SchemeEntry::df(&["1101", "1111"], PairingMode::Optimal),
        ],
        3.0,
        12.0,
    );
    // The 4-state/8-state DF separation is ~0.15 dB at the test point;
    // resolving that ordering at 95% needs more errors than the default.
    spec.min_frame_errors = 150;
    let result = run_scenario(&spec).unwrap();
    let df2 = curve(&result, "df-2st");
    let df4 = curve(&result, "df-4st");
    let df8 = curve(&result, "df-8st");

    // Hard requirement: longer constraint lengths degrade DF, 95% confidence
    // at the highest SNR with enough errors on the best curve.
    let idx = (0..df2.points().len())
        .rev()
        .find(|&i| df2.points()[i].frame_errors >= 30)
        .expect("sweep covers measurable region");
    let (p2, p4, p8) = (&df2.points()[idx], &df4.points()[idx], &df8.points()[idx]);
    let z_24 = z_less(p2.frame_errors, p2.frames, p4.frame_errors, p4.frames);
    let z_48 = z_less(p4.frame_errors, p4.frames, p8.frame_errors, p8.frames);
    assert!(
        z_24 > 1.645 && z_48 > 1.645,
        "DF ordering at {} dB: z(2st<4st)={z_24:.2} z(4st<8st)={z_48:.2}",
        p2.snr_db
    );

    // Soft targets: 4-state worse by ~0.5 dB, 8-state by ~0.7 dB (report).
    let d24 = gain_at_fer(df2, df4, 1e-3).unwrap();
    let d28 = gain_at_fer(df2, df8, 1e-3).unwrap();
    println!(
        "  df degradation at FER 1e-3: 4-state {d24:.2} dB (target ~0.5), 8-state {d28:.2} dB (target ~0.7)"
    );
    pass(10, "DF degrades with constraint length at 95% confidence");
}

#[test]
fn criterion_11_rayleigh_diversity() {
    // 2 relays (fig8 topology): DISC and SIR near diversity 2, DF near 1.
    // The strong relay-destination links put the measurable FER decades in
    // the regime where the asymptotic slope has set in; the sweep samples
    // the steep part of the fitting window densely.
    let mut spec = preset("fig8").unwrap();
    spec.snr_start_db = 14.0;
    spec.snr_stop_db = 24.0;
    spec.snr_step_db = 2.0;
    spec.min_frame_errors = 100;
    spec.max_frames = 200_000;
    spec.master_seed = 2026;
    let result = run_scenario(&spec).unwrap();
    let window = (1e-1, 1e-3);
    let s_disc = diversity_slope(curve(&result, "disc-4st-opt"), window).unwrap();
    let s_sir = diversity_slope(curve(&result, "sir"), window).unwrap();
    let s_df = diversity_slope(curve(&result, "df-4st"), window).unwrap();
    assert!(
        (1.7..=2.3).contains(&s_disc),
        "2-relay DISC diversity {s_disc:.2} outside [1.7, 2.3]"
    );
    assert!(
        (1.7..=2.3).contains(&s_sir),
        "2-relay SIR diversity {s_sir:.2} outside [1.7, 2.3]"
    );
    assert!(
        (0.8..=1.3).contains(&s_df),
        "2-relay DF diversity {s_df:.2} outside [0.8, 1.3]"
    );

    // 3 relays (fig12 topology): DISC slope at least 2.5.
    let mut spec3 = preset("fig12").unwrap();
    spec3.schemes.truncate(1); // DISC only
    spec3.snr_start_db = 10.0;
    spec3.snr_stop_db = 16.0;
    spec3.snr_step_db = 2.0;
    spec3.min_frame_errors = 150;
    spec3.max_frames = 200_000;
    spec3.master_seed = 2027;
    let result3 = run_scenario(&spec3).unwrap();
    let s_disc3 = diversity_slope(curve(&result3, "disc-4st-opt"), window).unwrap();
    assert!(s_disc3 >= 2.5, "3-relay DISC diversity {s_disc3:.2} below 2.5");
    println!(
        "  slopes: disc2 {s_disc:.2} sir {s_sir:.2} df {s_df:.2} disc3 {s_disc3:.2}"
    );
    pass(11, "Rayleigh diversity orders match the claimed slopes");
}

#[test]
fn criterion_12_worker_determinism() {
    let mut spec = preset("fig5").unwrap();
    spec.snr_stop_db = 4.0;
    spec.min_frame_errors = 0;
    spec.max_frames = 600; // spans a batch boundary
    spec.master_seed = 99;
    let mut outputs = Vec::new();
    for workers in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        let result = pool.install(|| run_scenario(&spec).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let paths = emit(&result, dir.path()).unwrap();
        let mut bytes = Vec::new();
        for p in &paths {
            bytes.extend(std::fs::read(p).unwrap());
        }
        outputs.push((render_csv(&result), bytes));
    }
    assert_eq!(outputs[0], outputs[1], "1 vs 4 workers");
    assert_eq!(outputs[0], outputs[2], "1 vs 8 workers");
    pass(12, "byte-identical output at 1/4/8 workers");
}
