//! De-Gaussifying filters applied before Gaussification.
//!
//! The two-copy scheme runs each local pair `(A, C)` and `(B, D)` through a
//! Mach-Zehnder interferometer with an `n̂ − 1` filter in both arms and then
//! projects the second port on the unnormalized state `⟨0|(ĉ + q)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fock::{two_copy_local_map, FilterKind, FockArray, LocalOperator, WeightedState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoCopyFilterSpec {
    q: f64,
}

impl TwoCopyFilterSpec {
    /// `q = 0` removes the vacuum term the Gaussification normalization
    /// divides by, so it is rejected.
    pub fn new(q: f64) -> Result<Self> {
        if q == 0.0 || !q.is_finite() {
            return Err(domain("q", q, "finite and nonzero"));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// `âb̂ ρ â†b̂†`.
pub fn single_photon_subtract(rho: &FockArray, weight_floor: f64) -> Result<WeightedState> {
    WeightedState::start(rho)?
        .filter(0, FilterKind::Annihilate, weight_floor)?
        .filter(1, FilterKind::Annihilate, weight_floor)
}

/// `τ^n̂` on both modes.
pub fn local_gaussian_filter_tau(rho: &FockArray, tau: f64, weight_floor: f64) -> Result<WeightedState> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(domain("τ", tau, "(0, 1]"));
    }
    WeightedState::start(rho)?
        .filter(0, FilterKind::Tau(tau), weight_floor)?
        .filter(1, FilterKind::Tau(tau), weight_floor)
}

/// `F̂|n⟩ = U†(n̂_A − 1)(n̂_C − 1)U |n⟩_A (q|0⟩ + |1⟩)_C` at cutoff `w`.
fn filter_action(n: usize, q: f64, w: usize) -> Result<FockArray> {
    let mut data = vec![Complex64::new(0.0, 0.0); w * w];
    data[n * w] = Complex64::new(q, 0.0);
    data[n * w + 1] = Complex64::new(1.0, 0.0);
    FockArray::pure(vec![w, w], data)?
        .beam_splitter(0, 1)?
        .apply_filter(0, FilterKind::NMinusOne)?
        .apply_filter(1, FilterKind::NMinusOne)?
        .beam_splitter(0, 1)
}

/// The circuit-composed local map `F̂†: (A, C) → A` on cutoff `d`, with
/// `M[a, (i, k)] = ⟨i, k|F̂|a⟩` (real `q`). The circuit runs at a cutoff
/// large enough that no photon leaves the space.
pub fn two_copy_filter_map(d: usize, spec: TwoCopyFilterSpec) -> Result<LocalOperator> {
    let w = d + 2;
    let mut entries = Vec::new();
    for a in 0..d {
        let v = filter_action(a, spec.q, w)?;
        for i in 0..d {
            for k in 0..d {
                let amp = v.amplitude(&[i, k]);
                if amp.norm() > 0.0 {
                    entries.push((a, i * d + k, amp.conj()));
                }
            }
        }
    }
    LocalOperator::from_entries(vec![d, d], vec![d, 1], entries)
}

/// `F̂|n⟩` for `n ∈ {0, 1, 2}` as a two-mode `(A, C)` vector on cutoff 4.
pub fn two_copy_filter_fock_action(n: usize, q: f64) -> Result<FockArray> {
    if n > 2 {
        return Err(Error::UnsupportedLevel(n));
    }
    filter_action(n, q, 6)?.restrict(4)
}

/// `(F̂† ⊗ F̂†)(ρ_AB ⊗ ρ_CD)(F̂ ⊗ F̂)`, with the weight taken relative to the
/// product of the input traces.
pub fn two_copy_degauss(
    rho_ab: &FockArray,
    rho_cd: &FockArray,
    spec: TwoCopyFilterSpec,
    weight_floor: f64,
) -> Result<WeightedState> {
    let (ab, cd) = (rho_ab.to_density(), rho_cd.to_density());
    let input = ab.trace() * cd.trace();
    if !(input > 0.0) {
        return Err(Error::ZeroWeight { weight: input });
    }
    let d = ab.dims()[0];
    let rho = two_copy_local_map(&ab, &cd, &two_copy_filter_map(d, spec)?)?;
    let weight = rho.trace() / input;
    if !(weight > weight_floor) {
        return Err(Error::ZeroWeight { weight });
    }
    Ok(WeightedState { rho, weight })
}
