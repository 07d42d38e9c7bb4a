use num_complex::Complex64;

use super::{FockArray, FockKind, LocalOperator, WeightedState, ZERO};
use crate::error::{domain, Error, Result};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial_ratio_sqrt(num: &[usize], den: &[usize]) -> f64 {
    // √(Π num! / Π den!) via ln Γ-free accumulation
    let ln_fact = |n: usize| (2..=n).map(|k| (k as f64).ln()).sum::<f64>();
    let ln: f64 = num.iter().map(|&n| ln_fact(n)).sum::<f64>() - den.iter().map(|&n| ln_fact(n)).sum::<f64>();
    (0.5 * ln).exp()
}

/// `⟨m, N−m| U |k, N−k⟩` for the balanced beam splitter with
/// `â → (â + ĉ)/√2`, `ĉ → (â − ĉ)/√2`.
pub fn beam_splitter_amplitude(m: usize, k: usize, total: usize) -> f64 {
    if m > total || k > total {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..=k.min(m) {
        let j = m - i;
        if j > total - k {
            continue;
        }
        let sign = if (total - k - j) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binomial(k, i) * binomial(total - k, j);
    }
    sum * factorial_ratio_sqrt(&[m, total - m], &[k, total - k]) / 2f64.powf(total as f64 / 2.0)
}

/// Beam splitter on two modes of cutoff `d`. Photon-number sectors with
/// `N ≥ d` lose the components that leave the truncated space.
pub(crate) fn beam_splitter_operator(d: usize) -> LocalOperator {
    let mut entries = Vec::new();
    for k in 0..d {
        for l in 0..d {
            let total = k + l;
            for m in 0..=total {
                if m >= d || total - m >= d {
                    continue;
                }
                let amp = beam_splitter_amplitude(m, k, total);
                if amp != 0.0 {
                    entries.push((m * d + (total - m), k * d + l, re(amp)));
                }
            }
        }
    }
    LocalOperator {
        in_dims: vec![d, d],
        out_dims: vec![d, d],
        entries,
    }
}

/// Single-mode filters `Ẑ`, applied as raw (unnormalized) operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    /// `n̂ − 1`, which removes the single-photon component.
    NMinusOne,
    /// `n̂ + w`, equivalently `(1 − w) â†â + w ââ†`.
    NPlusW(f64),
    Annihilate,
    Create,
    /// `τ^n̂`, the Fock-diagonal form of a local Gaussian filter.
    Tau(f64),
}

impl FilterKind {
    pub(crate) fn operator(&self, d: usize) -> LocalOperator {
        match *self {
            FilterKind::NMinusOne => LocalOperator::single_mode(d, |m, n| {
                if m == n {
                    re(n as f64 - 1.0)
                } else {
                    ZERO
                }
            }),
            FilterKind::NPlusW(w) => LocalOperator::single_mode(d, |m, n| {
                if m == n {
                    re(n as f64 + w)
                } else {
                    ZERO
                }
            }),
            FilterKind::Annihilate => LocalOperator::single_mode(d, |m, n| {
                if n == m + 1 {
                    re((n as f64).sqrt())
                } else {
                    ZERO
                }
            }),
            FilterKind::Create => LocalOperator::single_mode(d, |m, n| {
                if m == n + 1 {
                    re((m as f64).sqrt())
                } else {
                    ZERO
                }
            }),
            FilterKind::Tau(tau) => LocalOperator::single_mode(d, |m, n| {
                if m == n {
                    re(tau.powi(n as i32))
                } else {
                    ZERO
                }
            }),
        }
    }
}

/// Measurement outcomes a mode can be projected on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectionTarget {
    Vacuum,
    /// The unnormalized functional `⟨0|(â + q)` = `q⟨0| + ⟨1|`, real `q`.
    QState(f64),
}

impl ProjectionTarget {
    pub(crate) fn functional(&self, d: usize) -> LocalOperator {
        let coeffs: Vec<(usize, f64)> = match *self {
            ProjectionTarget::Vacuum => vec![(0, 1.0)],
            ProjectionTarget::QState(q) => vec![(0, q), (1, 1.0)],
        };
        let entries = coeffs
            .into_iter()
            .filter(|&(n, v)| n < d && v != 0.0)
            .map(|(n, v)| (0, n, re(v)))
            .collect();
        LocalOperator {
            in_dims: vec![d],
            out_dims: vec![1],
            entries,
        }
    }
}

impl FockArray {
    /// Balanced beam splitter on modes `(j, k)`.
    pub fn beam_splitter(&self, j: usize, k: usize) -> Result<Self> {
        if j == k || j >= self.n_modes() || k >= self.n_modes() {
            return Err(Error::Shape(format!("invalid beam splitter modes ({j}, {k})")));
        }
        let d = self.dims[j];
        if self.dims[k] != d {
            return Err(Error::Shape("beam splitter modes must share a cutoff".into()));
        }
        self.apply_local(&[j, k], &beam_splitter_operator(d))
    }

    /// Raw filter `Ẑ` on one mode (no weight bookkeeping).
    pub fn apply_filter(&self, mode: usize, kind: FilterKind) -> Result<Self> {
        let d = *self
            .dims
            .get(mode)
            .ok_or_else(|| Error::Shape(format!("mode {mode} out of range")))?;
        self.apply_local(&[mode], &kind.operator(d))
    }

    /// Raw projection of one mode; the mode is removed.
    pub fn apply_projection(&self, mode: usize, target: ProjectionTarget) -> Result<Self> {
        let d = *self
            .dims
            .get(mode)
            .ok_or_else(|| Error::Shape(format!("mode {mode} out of range")))?;
        Ok(self
            .apply_local(&[mode], &target.functional(d))?
            .squeeze_modes(&[mode]))
    }

    /// Amplitude-damping channel of transmittance `t` on one mode.
    pub fn apply_loss(&self, t: f64, mode: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(domain("T", t, "[0, 1]"));
        }
        if self.kind() != FockKind::Density {
            return self.to_density().apply_loss(t, mode);
        }
        let d = *self
            .dims
            .get(mode)
            .ok_or_else(|| Error::Shape(format!("mode {mode} out of range")))?;
        let r = 1.0 - t;
        let mut entries = Vec::new();
        // K_k = Σ_n √C(n,k) T^{(n−k)/2} R^{k/2} |n−k⟩⟨n|
        for n in 0..d {
            for np in 0..d {
                for k in 0..=n.min(np) {
                    let (m, mp) = (n - k, np - k);
                    let v = (binomial(n, k) * binomial(np, k)).sqrt()
                        * t.powf((m + mp) as f64 / 2.0)
                        * r.powi(k as i32);
                    if v != 0.0 {
                        entries.push((m * d + mp, n * d + np, re(v)));
                    }
                }
            }
        }
        let sup = LocalOperator {
            in_dims: vec![d, d],
            out_dims: vec![d, d],
            entries,
        };
        self.apply_superoperator(mode, &sup)
    }

    /// Traces out `modes`.
    pub fn partial_trace(&self, modes: &[usize]) -> Result<Self> {
        if self.kind() != FockKind::Density {
            return self.to_density().partial_trace(modes);
        }
        let mut sorted = modes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.iter().any(|&m| m >= self.n_modes()) {
            return Err(Error::Shape(format!("modes {modes:?} out of range")));
        }
        let mut out = self.clone();
        for &m in sorted.iter().rev() {
            let d = out.dims[m];
            let sup = LocalOperator {
                in_dims: vec![d, d],
                out_dims: vec![1, 1],
                entries: (0..d).map(|n| (0, n * d + n, re(1.0))).collect(),
            };
            out = out.apply_superoperator(m, &sup)?.squeeze_modes(&[m]);
        }
        Ok(out)
    }
}

fn weighted(rho: FockArray, input_trace: f64, floor: f64) -> Result<WeightedState> {
    let weight = rho.trace() / input_trace;
    if !(weight > floor) {
        return Err(Error::ZeroWeight { weight });
    }
    Ok(WeightedState { rho, weight })
}

/// `ρ → ẐρẐ†` on one mode, with the trace ratio as weight.
pub fn fock_filter(rho: &FockArray, mode: usize, kind: FilterKind, floor: f64) -> Result<WeightedState> {
    let rho = rho.to_density();
    let out = rho.apply_filter(mode, kind)?;
    weighted(out, rho.trace(), floor)
}

/// Projects one mode on `target` and removes it.
pub fn project(
    rho: &FockArray,
    mode: usize,
    target: ProjectionTarget,
    floor: f64,
) -> Result<WeightedState> {
    let rho = rho.to_density();
    let out = rho.apply_projection(mode, target)?;
    weighted(out, rho.trace(), floor)
}
