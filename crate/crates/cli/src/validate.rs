//! Invariant suites run by `gauss-distill validate`.

use gauss_distill::degauss::{
    local_gaussian_filter_tau, single_photon_subtract, two_copy_degauss, two_copy_filter_fock_action,
    TwoCopyFilterSpec,
};
use gauss_distill::fock::{epsilon_from_rho, gaussian_fock_state, tmsv, truncated_tmsv};
use gauss_distill::gaussian::{purity_from_r_epsilon, ChannelParametrization};
use gauss_distill::gaussify::{asymptotic_channel, epsilon_from_sigma, gaussification_step, sigma_from_rho1};
use gauss_distill::protocol::{nested_protocol, squared_epsilon, InitialState, ProtocolConfig};
use gauss_distill::{Result, Tolerances};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

const GRID_R: [f64; 3] = [0.3, 0.6, 1.0];
const GRID_T: [f64; 3] = [0.3, 0.5, 0.8];
const STAGE_CUTOFF: usize = 6;

fn grid() -> impl Iterator<Item = (f64, f64)> {
    GRID_R.into_iter().flat_map(|r| GRID_T.into_iter().map(move |t| (r, t)))
}

fn outcome(name: &'static str, run: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match run() {
        Ok((pass, detail)) => CheckResult { name, pass, detail },
        Err(e) => CheckResult {
            name,
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Two-mode checks run at `cutoff`; two-copy stages at `min(cutoff, 6)`.
pub fn run_all(lambda: f64, cutoff: usize, tol: &Tolerances) -> Vec<CheckResult> {
    let stage_cutoff = cutoff.min(STAGE_CUTOFF);
    let checks: Vec<Box<dyn Fn() -> CheckResult + Send + Sync>> = vec![
        Box::new(move || {
            outcome("cutoff-leakage", || {
                let psi = tmsv(lambda, cutoff, tol.leakage_bound)?;
                Ok((
                    true,
                    format!("λ = {lambda}, d = {cutoff}: top-level population {:.2e}", psi.leakage()),
                ))
            })
        }),
        Box::new(move || outcome("epsilon-invariance", || epsilon_invariance(cutoff, tol))),
        Box::new(move || outcome("photon-subtraction", || photon_subtraction(cutoff, tol))),
        Box::new(move || outcome("gaussian-filter", || gaussian_filter(cutoff, tol))),
        Box::new(move || outcome("squaring-law", || squaring_law(stage_cutoff, tol))),
        Box::new(move || outcome("truncated-exactness", || truncated_exactness(tol))),
        Box::new(move || outcome("fock-mapping", fock_mapping)),
        Box::new(move || outcome("purity-formula", purity_formula)),
        Box::new(move || outcome("nested-sequence", || nested_sequence(stage_cutoff, tol))),
    ];
    checks.par_iter().map(|c| c()).collect()
}

fn epsilon_invariance(d: usize, tol: &Tolerances) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (r, t) in grid() {
        let ch = ChannelParametrization::new(r, t)?;
        let rho = gaussian_fock_state(&ch, d)?;
        let step = gaussification_step(&rho, tol.weight_floor)?;
        let sig = sigma_from_rho1(&step.rho, tol.symmetry)?;
        let fixed = asymptotic_channel(&sig, None, tol.root)?;
        worst = worst.max((fixed.epsilon() - ch.epsilon()).abs());
    }
    Ok((worst < 1e-6, format!("max |ε_asym − ε_in| = {worst:.2e} (tol 1e-6)")))
}

fn photon_subtraction(d: usize, tol: &Tolerances) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for (r, t) in grid() {
        let ch = ChannelParametrization::new(r, t)?;
        let sub = single_photon_subtract(&gaussian_fock_state(&ch, d)?, tol.weight_floor)?;
        let step = gaussification_step(&sub.rho, tol.weight_floor)?;
        let ratio = epsilon_from_sigma(&sigma_from_rho1(&step.rho, tol.symmetry)?)? / ch.epsilon();
        let x = ch.epsilon().powi(2);
        worst = worst.max((ratio - (2.0 + x) / (1.0 + 2.0 * x)).abs());
        min_ratio = min_ratio.min(ratio);
    }
    Ok((
        worst < 1e-8 && min_ratio >= 1.0,
        format!("max ratio error {worst:.2e} (tol 1e-8), min ε_out/ε_in = {min_ratio:.6}"),
    ))
}

fn gaussian_filter(d: usize, tol: &Tolerances) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (r, t) in grid() {
        let rho = gaussian_fock_state(&ChannelParametrization::new(r, t)?, d)?;
        let eps = epsilon_from_rho(&rho)?;
        for tau in [0.3, 0.7, 1.0] {
            let out = local_gaussian_filter_tau(&rho, tau, tol.weight_floor)?;
            worst = worst.max((epsilon_from_rho(&out.rho)? - eps).abs());
        }
    }
    Ok((worst < 1e-10, format!("max |ε′ − ε| under τ^n̂ = {worst:.2e} (tol 1e-10)")))
}

fn squaring_law(d: usize, tol: &Tolerances) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0] {
        for t in [0.4, 0.7] {
            for q in [0.5, 1.0, 2.0] {
                let ch = ChannelParametrization::new(r, t)?;
                let rho = gaussian_fock_state(&ch, d)?.normalized()?;
                let out = two_copy_degauss(&rho, &rho, TwoCopyFilterSpec::new(q)?, tol.weight_floor)?;
                let step = gaussification_step(&out.rho, tol.weight_floor)?;
                let eps = epsilon_from_sigma(&sigma_from_rho1(&step.rho, tol.symmetry)?)?;
                worst = worst.max((eps - ch.epsilon().powi(2)).abs());
            }
        }
    }
    Ok((worst < 1e-5, format!("max |ε_out − ε_in²| = {worst:.2e} at d = {d} (tol 1e-5)")))
}

fn truncated_exactness(tol: &Tolerances) -> Result<(bool, String)> {
    let rho = truncated_tmsv(1.0, 4)?.apply_loss(0.5, 0)?.apply_loss(0.5, 1)?;
    let out = two_copy_degauss(&rho, &rho, TwoCopyFilterSpec::new(1.0)?, tol.weight_floor)?;
    let rho = out.rho.normalized()?;
    let listed = [
        (rho.re(&[0, 0], &[0, 0]), 25.0 / 28.0),
        (rho.re(&[1, 1], &[0, 0]), 4.0 / 28.0),
        (rho.re(&[1, 0], &[1, 0]), 1.0 / 28.0),
        (rho.re(&[1, 1], &[1, 1]), 1.0 / 28.0),
    ];
    let worst = listed.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((worst < 1e-10, format!("max element error {worst:.2e} (tol 1e-10)")))
}

fn fock_mapping() -> Result<(bool, String)> {
    let q = 0.7;
    let s3 = 3f64.sqrt();
    let f0 = two_copy_filter_fock_action(0, q)?;
    let f1 = two_copy_filter_fock_action(1, q)?;
    let f2 = two_copy_filter_fock_action(2, q)?;
    let errs = [
        (f0.amplitude(&[0, 0]).re - q).abs(),
        (f0.trace() - q * q).abs(),
        (f1.amplitude(&[1, 1]).re + 1.0).abs(),
        (f1.trace() - 1.0).abs(),
        (f2.amplitude(&[2, 0]).re + 0.5 * q).abs(),
        (f2.amplitude(&[2, 1]).re + 1.5).abs(),
        (f2.amplitude(&[0, 2]).re + 0.5 * q).abs(),
        (f2.amplitude(&[0, 3]).re + 0.5 * s3).abs(),
        (f2.trace() - (0.5 * q * q + 3.0)).abs(),
    ];
    let worst = errs.into_iter().fold(0.0, f64::max);
    Ok((worst < 1e-10, format!("max deviation {worst:.2e} for n ≤ 2 (tol 1e-10)")))
}

fn purity_formula() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for i in 1..=20 {
        let r = 0.1 * i as f64;
        for j in 1..=19 {
            let t = 0.05 * j as f64;
            let ch = ChannelParametrization::new(r, t)?;
            let det = ch.state().covariance().matrix().determinant();
            worst = worst.max((purity_from_r_epsilon(r, ch.epsilon()) - det.sqrt().recip()).abs());
        }
    }
    Ok((worst < 1e-12, format!("max |P(r, ε) − 1/√det γ| = {worst:.2e} (tol 1e-12)")))
}

fn nested_sequence(d: usize, tol: &Tolerances) -> Result<(bool, String)> {
    let config = ProtocolConfig {
        initial: InitialState::Channel { r: 1.0, t: 0.5 },
        stages: 3,
        cutoff: d,
        tolerances: *tol,
        ..ProtocolConfig::default()
    };
    let eps_in = ChannelParametrization::new(1.0, 0.5)?.epsilon();
    let reports = nested_protocol(&config)?;
    let worst = reports
        .iter()
        .map(|rep| (rep.output.epsilon - squared_epsilon(eps_in, rep.stage)).abs())
        .fold(0.0, f64::max);
    let r_dev = reports.iter().map(|rep| (rep.output.r - 1.0).abs()).fold(0.0, f64::max);
    Ok((
        worst < 1e-8 && r_dev < 1e-6,
        format!("3 stages at r = 1, T = 0.5: max |ε − ε_in^(2^N)| = {worst:.2e}, max |r − 1| = {r_dev:.2e}"),
    ))
}
