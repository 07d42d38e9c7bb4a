//! Nested distillation: each stage is a two-copy de-Gaussification followed
//! by Gaussification to the fixed point, with `q` tuned per stage to hold
//! the two-mode squeezing of the output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degauss::{two_copy_degauss, TwoCopyFilterSpec};
use crate::error::{domain, Error, Result};
use crate::fock::{covariance_of, gaussian_fock_state};
use crate::gaussian::{rt_from_cs, ChannelParametrization, SymmetricGaussianState};
use crate::gaussify::{asymptotic_channel, gaussification_step, iterate_to_convergence, sigma_from_rho1};
use crate::solve::illinois;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Channel { r: f64, t: f64 },
    Covariance { c: f64, s: f64 },
}

impl InitialState {
    pub fn state(&self) -> Result<SymmetricGaussianState> {
        match *self {
            InitialState::Channel { r, t } => Ok(ChannelParametrization::new(r, t)?.state()),
            InitialState::Covariance { c, s } => SymmetricGaussianState::new(c, s, 1e-9),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QSchedule {
    /// Tune `q` at every stage so the output squeezing equals `target_r`.
    Auto,
    /// One `q` per stage.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub initial: InitialState,
    pub stages: usize,
    pub target_r: f64,
    pub q: QSchedule,
    pub cutoff: usize,
    pub tolerances: Tolerances,
    /// Also iterate Gaussification in Fock space and compare covariances.
    pub brute_force: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            initial: InitialState::Channel { r: 1.0, t: 0.5 },
            stages: 3,
            target_r: 1.0,
            q: QSchedule::Auto,
            cutoff: 6,
            tolerances: Tolerances::default(),
            brute_force: false,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stages == 0 {
            return Err(domain("stages", 0.0, "N ≥ 1"));
        }
        if self.cutoff < 3 {
            return Err(domain("cutoff", self.cutoff as f64, "d ≥ 3"));
        }
        if !(self.target_r > 0.0 && self.target_r.is_finite()) {
            return Err(domain("target r", self.target_r, "(0, ∞)"));
        }
        if let QSchedule::Explicit(qs) = &self.q {
            if qs.len() != self.stages {
                return Err(Error::Shape(format!("{} q values for {} stages", qs.len(), self.stages)));
            }
            for &q in qs {
                TwoCopyFilterSpec::new(q)?;
            }
        }
        if !self.initial.state()?.is_entangled() {
            return Err(Error::Inadmissible("initial state is separable".into()));
        }
        Ok(())
    }
}

/// Derived quantities of a symmetric Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub c: f64,
    pub s: f64,
    pub r: f64,
    pub t: f64,
    pub epsilon: f64,
    pub purity: f64,
    pub eof: f64,
}

impl StateSummary {
    pub fn of_channel(ch: &ChannelParametrization) -> Self {
        let st = ch.state();
        Self {
            c: st.c(),
            s: st.s(),
            r: ch.r(),
            t: ch.t(),
            epsilon: ch.epsilon(),
            purity: st.purity(),
            eof: st.eof(),
        }
    }
}

/// Fock-space check of the analytic fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceCheck {
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm distance between the iterated covariance and that of the
    /// analytic fixed point truncated to the same cutoff.
    pub covariance_distance: f64,
    /// Product of all step weights.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub input: StateSummary,
    pub output: StateSummary,
    pub q: f64,
    /// De-Gaussification weight times the first Gaussification weight; a
    /// lower-bound proxy for the success probability.
    pub weight: f64,
    pub degauss_weight: f64,
    pub gaussify_weight: f64,
    /// Copies of the original input behind each de-Gaussified state:
    /// `2^stage`, before the Gaussification doubling.
    pub copies_consumed: u64,
    /// Top-level population of the truncated input state.
    pub leakage: f64,
    pub brute_force: Option<BruteForceCheck>,
}

fn channel_of(state: &SymmetricGaussianState) -> Result<ChannelParametrization> {
    let (canon, _) = state.canonical();
    if canon.s() == 0.0 {
        return Err(Error::Inadmissible("stage input has S = 0".into()));
    }
    rt_from_cs(&canon)
}

/// One stage on the state given by its channel parametrization.
pub fn run_stage_channel(
    input: &ChannelParametrization,
    q: f64,
    d: usize,
    tol: &Tolerances,
    brute_force: bool,
) -> Result<StageReport> {
    let spec = TwoCopyFilterSpec::new(q)?;
    let rho = gaussian_fock_state(input, d)?;
    let leakage = rho.leakage();
    let rho = rho.normalized()?;
    let degauss = two_copy_degauss(&rho, &rho, spec, tol.weight_floor)?;
    let first = gaussification_step(&degauss.rho, tol.weight_floor)?;
    let sig = sigma_from_rho1(&first.rho, tol.symmetry)?;
    let out = asymptotic_channel(&sig, Some(*input), tol.root)?;

    let brute_force = if brute_force {
        let it = iterate_to_convergence(&degauss.rho, 8, 1e-6, tol.weight_floor)?;
        let expect = covariance_of(&gaussian_fock_state(&out, d)?)?;
        Some(BruteForceCheck {
            iterations: it.iterations,
            converged: it.converged,
            covariance_distance: it.covariance()?.max_abs_diff(&expect),
            weight: it.weights.iter().product(),
        })
    } else {
        None
    };

    Ok(StageReport {
        stage: 1,
        input: StateSummary::of_channel(input),
        output: StateSummary::of_channel(&out),
        q,
        weight: degauss.weight * first.weight,
        degauss_weight: degauss.weight,
        gaussify_weight: first.weight,
        copies_consumed: 2,
        leakage,
        brute_force,
    })
}

/// One stage: two-copy de-Gaussification of `state` at cutoff `d`, then the
/// Gaussian fixed point of Gaussification.
pub fn run_stage(state: &SymmetricGaussianState, q: f64, d: usize, tol: &Tolerances) -> Result<StageReport> {
    run_stage_channel(&channel_of(state)?, q, d, tol, false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub q: f64,
    /// Output squeezing at `q`.
    pub r: f64,
    /// `(q, r)` on the coarse log grid; failed points carry `r = ∞`.
    pub sweep: Vec<(f64, f64)>,
    /// Whether the finite sweep values are non-increasing in `q`.
    pub monotone: bool,
    pub report: StageReport,
}

/// Coarse grid for [`tune_q`]: half-decade steps over `[1e-3, 1e3]`.
pub fn q_sweep_grid() -> Vec<f64> {
    (0..=12).map(|k| 10f64.powf(-3.0 + 0.5 * k as f64)).collect()
}

/// Finds `q` such that the stage output has squeezing `target_r`.
///
/// The output `r` decreases with `q`; small `q` eventually leaves the
/// physical region, which the sweep records as `r = ∞`.
pub fn tune_q(input: &ChannelParametrization, target_r: f64, d: usize, tol: &Tolerances) -> Result<TuneResult> {
    let r_at = |q: f64| -> f64 {
        match run_stage_channel(input, q, d, tol, false) {
            Ok(rep) => rep.output.r,
            Err(_) => f64::INFINITY,
        }
    };
    let sweep: Vec<(f64, f64)> = q_sweep_grid().into_iter().map(|q| (q, r_at(q))).collect();
    let finite: Vec<f64> = sweep.iter().map(|p| p.1).filter(|r| r.is_finite()).collect();
    let monotone = finite.windows(2).all(|w| w[1] <= w[0]);

    let Some(k) = sweep.windows(2).position(|w| w[0].1 >= target_r && w[1].1 < target_r) else {
        return Err(Error::NoRootInBracket { sweep });
    };
    let (mut lo, mut hi) = (sweep[k].0.ln(), sweep[k + 1].0.ln());
    if !sweep[k].1.is_finite() {
        // bisect the left end off the unphysical side, keeping r above target
        let mut bad = lo;
        let mut found = false;
        for _ in 0..100 {
            let mid = 0.5 * (bad + hi);
            let r = r_at(mid.exp());
            if !r.is_finite() {
                bad = mid;
            } else if r >= target_r {
                lo = mid;
                found = true;
                break;
            } else {
                hi = mid;
            }
        }
        if !found {
            return Err(Error::NoRootInBracket { sweep });
        }
    }
    let f = |lnq: f64| -> Result<f64> {
        Ok(run_stage_channel(input, lnq.exp(), d, tol, false)?.output.r - target_r)
    };
    let lnq = illinois(f, lo, hi, tol.root, 200)?;
    let q = lnq.exp();
    let report = run_stage_channel(input, q, d, tol, false)?;
    Ok(TuneResult {
        q,
        r: report.output.r,
        sweep,
        monotone,
        report,
    })
}

/// Chains [`run_stage`] `config.stages` times and checks
/// `ε⁽ᵏ⁾ = ε_in^{2^k}` after every stage.
pub fn nested_protocol(config: &ProtocolConfig) -> Result<Vec<StageReport>> {
    config.validate()?;
    let tol = &config.tolerances;
    let mut current = channel_of(&config.initial.state()?)?;
    let eps_in = current.epsilon();
    let mut reports = Vec::with_capacity(config.stages);
    for stage in 1..=config.stages {
        let mut report = match &config.q {
            QSchedule::Auto => tune_q(&current, config.target_r, config.cutoff, tol)?.report,
            QSchedule::Explicit(qs) => run_stage_channel(&current, qs[stage - 1], config.cutoff, tol, false)?,
        };
        if config.brute_force {
            report = run_stage_channel(&current, report.q, config.cutoff, tol, true)?;
        }
        report.stage = stage;
        report.copies_consumed = 1u64 << stage.min(63);
        let expect = squared_epsilon(eps_in, stage);
        if (report.output.epsilon - expect).abs() > EPS_TOLERANCE * stage as f64 {
            return Err(Error::Invariant(format!(
                "stage {stage}: ε = {} but ε_in^(2^{stage}) = {expect}",
                report.output.epsilon
            )));
        }
        current = ChannelParametrization::new(report.output.r, report.output.t)?;
        reports.push(report);
    }
    Ok(reports)
}

/// Absolute per-stage tolerance on `ε⁽ᵏ⁾ − ε_in^{2^k}`.
pub const EPS_TOLERANCE: f64 = 1e-8;

/// `ε^{2^n}` by repeated squaring.
pub fn squared_epsilon(eps: f64, n: usize) -> f64 {
    (0..n).fold(eps, |e, _| e * e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure3Row {
    pub eps_in: f64,
    pub n: usize,
    pub eps_out: f64,
}

/// `(ε_in, N, ε⁽ᴺ⁾)` for `N = 1..=stages`, ordered by `ε_in` then `N`.
pub fn figure3_data(eps_grid: &[f64], stages: usize) -> Vec<Figure3Row> {
    eps_grid
        .iter()
        .flat_map(|&eps_in| {
            (1..=stages).map(move |n| Figure3Row {
                eps_in,
                n,
                eps_out: squared_epsilon(eps_in, n),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure4Row {
    pub t: f64,
    pub n: usize,
    pub purity: f64,
    pub eof: f64,
    /// Top-level population of the truncated stage input; zero at `N = 0`.
    pub leakage: f64,
}

/// Purity and entanglement of formation after `N = 0..=n_max` stages at
/// fixed `r`, one independent chain per `T`. Rows are ordered by `T` then
/// `N` regardless of how the chains are scheduled.
pub fn figure4_data(
    t_grid: &[f64],
    n_max: usize,
    r: f64,
    d: usize,
    tol: &Tolerances,
) -> Result<Vec<Figure4Row>> {
    let chains: Vec<Result<Vec<Figure4Row>>> = t_grid
        .par_iter()
        .map(|&t| {
            let initial = ChannelParametrization::new(r, t)?;
            let first = StateSummary::of_channel(&initial);
            let mut rows = vec![Figure4Row {
                t,
                n: 0,
                purity: first.purity,
                eof: first.eof,
                leakage: 0.0,
            }];
            if n_max > 0 {
                let config = ProtocolConfig {
                    initial: InitialState::Channel { r, t },
                    stages: n_max,
                    target_r: r,
                    q: QSchedule::Auto,
                    cutoff: d,
                    tolerances: *tol,
                    brute_force: false,
                };
                for rep in nested_protocol(&config)? {
                    rows.push(Figure4Row {
                        t,
                        n: rep.stage,
                        purity: rep.output.purity,
                        eof: rep.output.eof,
                        leakage: rep.leakage,
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for chain in chains {
        out.extend(chain?);
    }
    Ok(out)
}
