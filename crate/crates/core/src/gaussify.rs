//! Iterative Gaussification and its Gaussian fixed point.
//!
//! One step takes two copies of a two-mode state, mixes `A` with `C` and `B`
//! with `D` on balanced beam splitters and keeps the outcome where `C` and
//! `D` are both found in vacuum. The fixed point is fully determined by the
//! ratios `σ = ρ⁽¹⁾/ρ⁽¹⁾₀₀,₀₀` of the first output.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    beam_splitter_amplitude, covariance_of, lossy_tmsv_element_with_loss, trace_distance, two_copy_local_map,
    FockArray, LocalOperator, WeightedState,
};
use crate::gaussian::{ChannelParametrization, CovarianceMatrix, SymmetricGaussianState};
use crate::solve::newton2;

/// `M[a, (i, k)] = ⟨a, 0|U|i, k⟩`: beam splitter followed by a vacuum
/// projection of the second port.
pub(crate) fn gaussification_map(d: usize) -> LocalOperator {
    LocalOperator::from_fn(vec![d, d], vec![d, 1], |a, joint| {
        let (i, k) = (joint / d, joint % d);
        if i + k == a {
            Complex64::new(beam_splitter_amplitude(a, i, a), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// One Gaussification step on two copies of `rho`. The returned state is
/// unnormalized; its trace is the success weight for a normalized input.
pub fn gaussification_step(rho: &FockArray, weight_floor: f64) -> Result<WeightedState> {
    let rho = rho.to_density().normalized()?;
    if rho.n_modes() != 2 {
        return Err(Error::Shape("Gaussification acts on two-mode states".into()));
    }
    let out = two_copy_local_map(&rho, &rho, &gaussification_map(rho.dims()[0]))?;
    let weight = out.trace();
    if !(weight > weight_floor) {
        return Err(Error::ZeroWeight { weight });
    }
    Ok(WeightedState { rho: out, weight })
}

/// Elements of `σ` that matter for the fixed point, as ratios to `ρ⁽¹⁾₀₀,₀₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaElements {
    pub s10_10: f64,
    pub s01_01: f64,
    pub s11_00: f64,
    pub s00_11: f64,
    /// `|σ|` of the elements that vanish for symmetric states, in the order
    /// of [`SigmaElements::ZERO_PATTERN`].
    pub zero_pattern: [f64; 6],
}

impl SigmaElements {
    pub const ZERO_PATTERN: [([usize; 2], [usize; 2]); 6] = [
        ([2, 0], [0, 0]),
        ([0, 2], [0, 0]),
        ([0, 0], [2, 0]),
        ([0, 0], [0, 2]),
        ([1, 0], [0, 1]),
        ([0, 1], [1, 0]),
    ];

    /// Largest deviation from the symmetric structure.
    pub fn symmetry_violation(&self) -> (String, f64) {
        let mut worst = (String::from("none"), 0.0);
        for (&(ket, bra), &v) in Self::ZERO_PATTERN.iter().zip(&self.zero_pattern) {
            if v > worst.1 {
                worst = (format!("σ{}{},{}{}", ket[0], ket[1], bra[0], bra[1]), v);
            }
        }
        let d1 = (self.s10_10 - self.s01_01).abs();
        if d1 > worst.1 {
            worst = ("σ10,10 − σ01,01".into(), d1);
        }
        let d2 = (self.s11_00 - self.s00_11).abs();
        if d2 > worst.1 {
            worst = ("σ11,00 − σ00,11".into(), d2);
        }
        worst
    }
}

/// Reads `σ` off the first Gaussification output and checks the symmetric
/// zero pattern to `tol`.
pub fn sigma_from_rho1(rho1: &FockArray, tol: f64) -> Result<SigmaElements> {
    let sig = sigma_unchecked(rho1)?;
    let (element, value) = sig.symmetry_violation();
    if value > tol {
        return Err(Error::SymmetryViolation { element, value });
    }
    Ok(sig)
}

fn sigma_unchecked(rho1: &FockArray) -> Result<SigmaElements> {
    let rho1 = rho1.to_density();
    if rho1.n_modes() != 2 || rho1.dims().iter().any(|&d| d < 3) {
        return Err(Error::Shape("σ needs a two-mode state with cutoff ≥ 3".into()));
    }
    let norm = rho1.re(&[0, 0], &[0, 0]);
    if norm == 0.0 {
        return Err(Error::DivisionByZero("ρ⁽¹⁾₀₀,₀₀"));
    }
    let mut zero_pattern = [0.0; 6];
    for (z, (ket, bra)) in zero_pattern.iter_mut().zip(SigmaElements::ZERO_PATTERN) {
        *z = rho1.element(&ket, &bra).norm() / norm.abs();
    }
    Ok(SigmaElements {
        s10_10: rho1.re(&[1, 0], &[1, 0]) / norm,
        s01_01: rho1.re(&[0, 1], &[0, 1]) / norm,
        s11_00: rho1.re(&[1, 1], &[0, 0]) / norm,
        s00_11: rho1.re(&[0, 0], &[1, 1]) / norm,
        zero_pattern,
    })
}

/// `ε` of the asymptotic Gaussian state: `σ₁₀,₁₀ / σ₁₁,₀₀`.
pub fn epsilon_from_sigma(sig: &SigmaElements) -> Result<f64> {
    if sig.s11_00 == 0.0 {
        return Err(Error::DivisionByZero("σ₁₁,₀₀"));
    }
    Ok(sig.s10_10 / sig.s11_00)
}

/// The two Fock ratios matched by the fixed point, for the lossy-TMSV family
/// with `λ = tanh r` and loss `R = 1 − T`.
fn family_ratios(lambda: f64, loss: f64) -> [f64; 2] {
    let e00 = lossy_tmsv_element_with_loss(lambda, loss, [0, 0], [0, 0]);
    let e10 = lossy_tmsv_element_with_loss(lambda, loss, [1, 0], [1, 0]);
    let e11 = lossy_tmsv_element_with_loss(lambda, loss, [1, 1], [0, 0]);
    [e10 / e00, e11 / e00]
}

const UPPER: f64 = 1.0 - 1e-12;

/// The symmetric Gaussian state whose `σ₁₀,₁₀` and `σ₁₁,₀₀` equal those of
/// `sig`, found by a damped Newton search over `(λ, R)` started at `guess`.
/// A negative `σ₁₁,₀₀` is mapped to its local phase-flipped partner.
pub fn asymptotic_channel(
    sig: &SigmaElements,
    guess: Option<ChannelParametrization>,
    tol: f64,
) -> Result<ChannelParametrization> {
    let s10 = sig.s10_10;
    let s11 = sig.s11_00.abs();
    if !(s10 >= 0.0 && s10.is_finite() && s11.is_finite()) {
        return Err(Error::Inadmissible(format!("σ₁₀,₁₀ = {s10}")));
    }
    if s11 == 0.0 {
        if s10 == 0.0 {
            return ChannelParametrization::new(0.0, 1.0);
        }
        return Err(Error::Inadmissible("σ₁₁,₀₀ = 0 with σ₁₀,₁₀ > 0 is not Gaussian-symmetric".into()));
    }
    if s10 == 0.0 {
        // pure family: R = 0 and the coherence ratio is λ itself
        let lambda = family_ratios(s11.min(UPPER), 0.0)[1];
        if s11 >= UPPER || (lambda - s11).abs() > tol {
            return Err(Error::Unphysical);
        }
        return ChannelParametrization::from_lambda(s11, 1.0);
    }

    // The boundary λ → 1 along the line of fixed ε bounds the reachable σ₁₁,₀₀.
    let eps = s10 / s11;
    if eps >= 1.0 {
        return Err(Error::Unphysical);
    }
    let edge = family_ratios(UPPER, (eps / UPPER).min(UPPER))[1];
    if s11 >= edge {
        return Err(Error::Unphysical);
    }

    // unknowns (artanh λ, ln R); logarithmic residuals keep the system well
    // conditioned close to λ = 1 and for vanishing loss
    let (ln10, ln11) = (s10.ln(), s11.ln());
    let residual = |x: [f64; 2]| -> Result<[f64; 2]> {
        let g = family_ratios(x[0].tanh(), x[1].exp());
        Ok([g[0].ln() - ln10, g[1].ln() - ln11])
    };
    let bounds = [(1e-12, UPPER.atanh()), (-690.0, UPPER.ln())];
    let mut starts = Vec::new();
    if let Some(g) = guess {
        starts.push([g.r(), (1.0 - g.t()).max(eps).ln()]);
    }
    for &lam in &[0.5, 0.8, 0.95, 0.2, 0.99, 0.999] {
        if lam > eps {
            starts.push([f64::atanh(lam), (eps / lam).ln()]);
        }
    }
    let mut last = Error::NoConvergence {
        iterations: 0,
        residual: f64::INFINITY,
    };
    for x0 in starts {
        match newton2(&residual, x0, bounds, tol, 100) {
            Ok(x) => {
                let lambda = x[0].tanh();
                if lambda >= UPPER {
                    return Err(Error::Unphysical);
                }
                return ChannelParametrization::from_lambda(lambda, 1.0 - x[1].exp());
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Covariance-level view of [`asymptotic_channel`].
pub fn asymptotic_state(
    sig: &SigmaElements,
    guess: Option<ChannelParametrization>,
    tol: f64,
) -> Result<SymmetricGaussianState> {
    Ok(asymptotic_channel(sig, guess, tol)?.state())
}

/// Diagnostics of a brute-force Gaussification run.
#[derive(Debug, Clone, PartialEq)]
pub struct Iteration {
    /// Normalized state after the last step.
    pub state: FockArray,
    pub iterations: usize,
    pub converged: bool,
    /// Success weight of each step.
    pub weights: Vec<f64>,
    /// Trace distance between successive normalized states.
    pub distances: Vec<f64>,
    /// Largest deviation from the symmetric σ pattern seen along the way.
    pub symmetry_violation: (String, f64),
    /// Copies of the starting state consumed per output copy: `2^iterations`.
    pub copies_consumed: u64,
}

impl Iteration {
    pub fn covariance(&self) -> Result<CovarianceMatrix> {
        covariance_of(&self.state)
    }
}

/// Repeats [`gaussification_step`] until successive normalized states are
/// within trace distance `tol` or `max_iters` steps were taken.
/// Non-convergence is reported through `converged`, not as an error.
pub fn iterate_to_convergence(
    rho: &FockArray,
    max_iters: usize,
    tol: f64,
    weight_floor: f64,
) -> Result<Iteration> {
    let mut current = rho.to_density().normalized()?;
    let mut weights = Vec::new();
    let mut distances = Vec::new();
    let mut symmetry_violation = (String::from("none"), 0.0);
    let mut converged = false;
    for _ in 0..max_iters {
        let step = gaussification_step(&current, weight_floor)?;
        let v = sigma_unchecked(&step.rho)?.symmetry_violation();
        if v.1 > symmetry_violation.1 {
            symmetry_violation = v;
        }
        weights.push(step.weight);
        let next = step.rho.normalized()?;
        let dist = trace_distance(&next, &current)?;
        distances.push(dist);
        current = next;
        if dist < tol {
            converged = true;
            break;
        }
    }
    let iterations = weights.len();
    Ok(Iteration {
        state: current,
        iterations,
        converged,
        weights,
        distances,
        symmetry_violation,
        copies_consumed: 1u64 << iterations.min(63),
    })
}
