//! Python bindings: generator-sequence analysis, optimal pairing, SISO
//! encoding, LLR/SBE utilities and a small simulation entry point.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use disc_core::code_algebra as ca;
use disc_core::sim;
use disc_core::soft_coding as sc;

fn ensemble(generators: Vec<String>) -> PyResult<ca::CodeEnsemble> {
    let refs: Vec<&str> = generators.iter().map(String::as_str).collect();
    ca::CodeEnsemble::parse(&refs).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn profile(sr_in: Vec<f64>, rd: Vec<f64>) -> PyResult<ca::LinkSnrProfile> {
    ca::LinkSnrProfile::new(sr_in, rd).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Tap list of a generator given as binary ("101") or octal ("5") text.
#[pyfunction]
fn parse_generator(text: &str) -> PyResult<Vec<u32>> {
    ca::GeneratorSequence::parse(text)
        .map(|g| g.taps().iter().map(|&t| t as u32).collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Generator sequence weight (number of 1-taps).
#[pyfunction]
fn gsw(text: &str) -> PyResult<usize> {
    ca::GeneratorSequence::parse(text)
        .map(|g| g.gsw())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// (per-code GSWs, GSW-sum bound on the minimum Hamming distance).
#[pyfunction]
fn mhd_bound(generators: Vec<String>) -> PyResult<(Vec<usize>, usize)> {
    Ok(ca::mhd_bound(&ensemble(generators)?))
}

/// Exact minimum Hamming distance of the distributed codeword.
#[pyfunction]
#[pyo3(signature = (generators, search_depth=None))]
fn exact_mhd(generators: Vec<String>, search_depth: Option<usize>) -> PyResult<usize> {
    let e = ensemble(generators)?;
    let depth = search_depth.unwrap_or_else(|| ca::default_search_depth(&e));
    ca::exact_mhd(&e, depth).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Whether the ensemble is free of catastrophic error propagation.
#[pyfunction]
fn is_noncatastrophic(generators: Vec<String>) -> PyResult<bool> {
    Ok(ca::is_noncatastrophic(&ensemble(generators)?))
}

/// relay_for_code permutation maximizing the summed equivalent SNR.
#[pyfunction]
fn optimal_pairing(
    generators: Vec<String>,
    snr_sr_in: Vec<f64>,
    snr_rd: Vec<f64>,
) -> PyResult<Vec<usize>> {
    let e = ensemble(generators)?;
    let p = profile(snr_sr_in, snr_rd)?;
    ca::optimal_pairing(&e, &p)
        .map(|a| a.relay_for_code().to_vec())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Per-relay equivalent destination SNR rho(d, gamma_rd, gamma_sr_in).
#[pyfunction]
#[pyo3(signature = (d, snr_rd, snr_sr_in, exact=false))]
fn rho(d: usize, snr_rd: f64, snr_sr_in: f64, exact: bool) -> f64 {
    let form = if exact { ca::RhoForm::Exact } else { ca::RhoForm::HighSnr };
    ca::rho_with_form(d, snr_rd, snr_sr_in, form)
}

/// Analytic high-SNR BER approximation for a given pairing.
#[pyfunction]
fn ber_approx(
    generators: Vec<String>,
    relay_for_code: Vec<usize>,
    snr_sr_in: Vec<f64>,
    snr_rd: Vec<f64>,
    b_dfree: f64,
) -> PyResult<f64> {
    let e = ensemble(generators)?;
    let p = profile(snr_sr_in, snr_rd)?;
    let a = ca::PairingAssignment::new(relay_for_code)
        .ok_or_else(|| PyValueError::new_err("relay_for_code is not a permutation"))?;
    Ok(ca::ber_approx(&a, &e, &p, b_dfree))
}

/// Closed-form Example-2 coding gains (over un-ordered pairing, over SIR).
#[pyfunction]
fn example2_gains(gamma_gap: f64, alpha0: f64, gamma_sr1_in: f64) -> (f64, f64) {
    ca::example2_gains(gamma_gap, alpha0, gamma_sr1_in)
}

/// Rate-1 SISO encoding of an SBE frame (sliding tap product).
#[pyfunction]
fn siso_encode(frame: Vec<f64>, generator: &str) -> PyResult<Vec<f64>> {
    let g = ca::GeneratorSequence::parse(generator)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(sc::siso_encode(&frame, &g))
}

#[pyfunction]
fn sbe_from_llr(l: f64) -> f64 {
    sc::sbe_from_llr(l)
}

#[pyfunction]
fn llr_from_sbe(x: f64) -> f64 {
    sc::llr_from_sbe(x)
}

/// LLR of the XOR of independent bits (boxplus combination).
#[pyfunction]
fn boxplus(llrs: Vec<f64>) -> f64 {
    sc::boxplus_llr(&llrs)
}

/// Names and descriptions of the built-in scenario presets.
#[pyfunction]
fn list_presets() -> Vec<(String, String)> {
    sim::list_presets()
        .into_iter()
        .map(|(n, d)| (n.to_string(), d.to_string()))
        .collect()
}

/// Config text of a built-in preset (editable, feed back into run_config).
#[pyfunction]
fn preset_config(name: &str) -> PyResult<String> {
    sim::preset(name)
        .map(|s| sim::render_config(&s))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs a scenario given as config text; returns the results CSV.
#[pyfunction]
fn run_config(text: &str) -> PyResult<String> {
    let spec = sim::parse_config(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let result = sim::run_scenario(&spec).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(sim::render_csv(&result))
}

#[pymodule]
fn disc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(parse_generator, m)?)?;
    m.add_function(wrap_pyfunction!(gsw, m)?)?;
    m.add_function(wrap_pyfunction!(mhd_bound, m)?)?;
    m.add_function(wrap_pyfunction!(exact_mhd, m)?)?;
    m.add_function(wrap_pyfunction!(is_noncatastrophic, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_pairing, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(ber_approx, m)?)?;
    m.add_function(wrap_pyfunction!(example2_gains, m)?)?;
    m.add_function(wrap_pyfunction!(siso_encode, m)?)?;
    m.add_function(wrap_pyfunction!(sbe_from_llr, m)?)?;
    m.add_function(wrap_pyfunction!(llr_from_sbe, m)?)?;
    m.add_function(wrap_pyfunction!(boxplus, m)?)?;
    m.add_function(wrap_pyfunction!(list_presets, m)?)?;
    m.add_function(wrap_pyfunction!(preset_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
