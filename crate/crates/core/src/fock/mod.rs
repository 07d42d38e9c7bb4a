//! Truncated Fock-space numerics.
//!
//! A [`FockArray`] is a flat row-major complex tensor over a list of modes,
//! each truncated to its own cutoff. Pure states carry one axis per mode;
//! operators and density matrices carry ket axes followed by bra axes, so a
//! density matrix over modes `(A, B)` is indexed `[a, b, a', b']` and
//! `ρ_{jk,mn} = ⟨j,k|ρ|m,n⟩` is `element(&[j, k], &[m, n])`.
//!
//! Every operation is a contraction over the affected axes only (see
//! [`LocalOperator`]); full multimode matrices are never formed.

mod analysis;
mod ops;
mod states;

pub use analysis::{covariance_of, epsilon_from_rho, trace_distance};
pub use ops::{beam_splitter_amplitude, FilterKind, ProjectionTarget};
pub use states::{
    gaussian_fock_state, lossy_tmsv_element, lossy_tmsv_element_with_loss, tmsv, truncated_tmsv,
};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockKind {
    Pure,
    Operator,
    Density,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockArray {
    dims: Vec<usize>,
    kind: FockKind,
    data: Vec<Complex64>,
}

/// A sparse linear map acting on a subset of tensor axes.
///
/// Joint indices over the selected axes are row-major in the order the axes
/// are listed. The output dimension of each axis may differ from its input
/// (a projection maps an axis to dimension 1).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
    entries: Vec<(usize, usize, Complex64)>,
}

impl LocalOperator {
    /// Builds the map from a dense element function `f(out, in)`, keeping
    /// only nonzero entries.
    pub fn from_fn(
        in_dims: Vec<usize>,
        out_dims: Vec<usize>,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let n_in: usize = in_dims.iter().product();
        let n_out: usize = out_dims.iter().product();
        let mut entries = Vec::new();
        for o in 0..n_out {
            for i in 0..n_in {
                let v = f(o, i);
                if v != ZERO {
                    entries.push((o, i, v));
                }
            }
        }
        Self {
            in_dims,
            out_dims,
            entries,
        }
    }

    pub fn from_entries(
        in_dims: Vec<usize>,
        out_dims: Vec<usize>,
        entries: Vec<(usize, usize, Complex64)>,
    ) -> Result<Self> {
        let n_in: usize = in_dims.iter().product();
        let n_out: usize = out_dims.iter().product();
        if entries.iter().any(|&(o, i, _)| o >= n_out || i >= n_in) {
            return Err(Error::Shape("operator entry out of range".into()));
        }
        Ok(Self {
            in_dims,
            out_dims,
            entries: entries.into_iter().filter(|e| e.2 != ZERO).collect(),
        })
    }

    /// Single-mode operator from its matrix elements `⟨m|O|n⟩ = f(m, n)`.
    pub fn single_mode(d: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        Self::from_fn(vec![d], vec![d], f)
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn conj(&self) -> Self {
        Self {
            in_dims: self.in_dims.clone(),
            out_dims: self.out_dims.clone(),
            entries: self.entries.iter().map(|&(o, i, v)| (o, i, v.conj())).collect(),
        }
    }

    /// Dense element lookup; linear in the number of entries.
    pub fn get(&self, out: usize, inp: usize) -> Complex64 {
        self.entries
            .iter()
            .filter(|e| e.0 == out && e.1 == inp)
            .map(|e| e.2)
            .sum()
    }
}

fn row_major_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

/// Offsets of every joint index over `axes` (row-major in `axes` order).
fn joint_offsets(dims: &[usize], strides: &[usize], axes: &[usize]) -> Vec<usize> {
    let mut offsets = vec![0usize];
    for &ax in axes {
        let mut next = Vec::with_capacity(offsets.len() * dims[ax]);
        for &base in &offsets {
            for v in 0..dims[ax] {
                next.push(base + v * strides[ax]);
            }
        }
        offsets = next;
    }
    offsets
}

/// Contracts `op` into the listed axes of a row-major tensor.
pub(crate) fn apply_axes(
    data: &[Complex64],
    dims: &[usize],
    axes: &[usize],
    op: &LocalOperator,
) -> (Vec<Complex64>, Vec<usize>) {
    debug_assert_eq!(axes.len(), op.in_dims.len());
    debug_assert!(axes.iter().zip(&op.in_dims).all(|(&a, &d)| dims[a] == d));
    let mut out_dims = dims.to_vec();
    for (&ax, &d) in axes.iter().zip(&op.out_dims) {
        out_dims[ax] = d;
    }
    let in_strides = row_major_strides(dims);
    let out_strides = row_major_strides(&out_dims);
    let in_sel = joint_offsets(dims, &in_strides, axes);
    let out_sel = joint_offsets(&out_dims, &out_strides, axes);
    let others: Vec<usize> = (0..dims.len()).filter(|k| !axes.contains(k)).collect();
    let in_base = joint_offsets(dims, &in_strides, &others);
    let out_base = joint_offsets(&out_dims, &out_strides, &others);

    let mut out = vec![ZERO; out_dims.iter().product()];
    for (&bi, &bo) in in_base.iter().zip(&out_base) {
        for &(o, i, c) in &op.entries {
            let v = data[bi + in_sel[i]];
            if v != ZERO {
                out[bo + out_sel[o]] += c * v;
            }
        }
    }
    (out, out_dims)
}

impl FockArray {
    pub fn pure(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        Self::with_kind(dims, FockKind::Pure, data)
    }

    pub fn density(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        Self::with_kind(dims, FockKind::Density, data)
    }

    pub fn operator(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        Self::with_kind(dims, FockKind::Operator, data)
    }

    fn with_kind(dims: Vec<usize>, kind: FockKind, data: Vec<Complex64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Shape("zero-dimensional mode".into()));
        }
        let n: usize = dims.iter().product();
        let expected = match kind {
            FockKind::Pure => n,
            _ => n * n,
        };
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "expected {expected} entries for dims {dims:?}, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, kind, data })
    }

    /// Pure product Fock state `|n₁, n₂, …⟩`.
    pub fn basis(dims: Vec<usize>, levels: &[usize]) -> Result<Self> {
        if levels.len() != dims.len() || levels.iter().zip(&dims).any(|(l, d)| l >= d) {
            return Err(Error::Shape(format!("levels {levels:?} outside dims {dims:?}")));
        }
        let strides = row_major_strides(&dims);
        let mut data = vec![ZERO; dims.iter().product()];
        data[levels.iter().zip(&strides).map(|(l, s)| l * s).sum::<usize>()] = Complex64::new(1.0, 0.0);
        Self::pure(dims, data)
    }

    pub fn vacuum(modes: usize, d: usize) -> Result<Self> {
        Self::basis(vec![d; modes], &vec![0; modes])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn kind(&self) -> FockKind {
        self.kind
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    /// Hilbert-space dimension `Π d_k`.
    pub fn hilbert_dim(&self) -> usize {
        self.dims.iter().product()
    }

    fn axis_dims(&self) -> Vec<usize> {
        match self.kind {
            FockKind::Pure => self.dims.clone(),
            _ => self.dims.iter().chain(&self.dims).copied().collect(),
        }
    }

    fn flat(&self, levels: &[usize]) -> usize {
        let strides = row_major_strides(&self.dims);
        levels.iter().zip(&strides).map(|(l, s)| l * s).sum()
    }

    /// Amplitude `⟨n₁, n₂, …|ψ⟩` of a pure state.
    pub fn amplitude(&self, levels: &[usize]) -> Complex64 {
        debug_assert_eq!(self.kind, FockKind::Pure);
        if levels.iter().zip(&self.dims).any(|(l, d)| l >= d) {
            return ZERO;
        }
        self.data[self.flat(levels)]
    }

    /// `⟨ket|X|bra⟩`; zero when either index lies above the cutoff.
    pub fn element(&self, ket: &[usize], bra: &[usize]) -> Complex64 {
        debug_assert_ne!(self.kind, FockKind::Pure);
        let outside = |v: &[usize]| v.iter().zip(&self.dims).any(|(l, d)| l >= d);
        if outside(ket) || outside(bra) {
            return ZERO;
        }
        self.data[self.flat(ket) * self.hilbert_dim() + self.flat(bra)]
    }

    /// Real part of `element`; convenient for the real states used here.
    pub fn re(&self, ket: &[usize], bra: &[usize]) -> f64 {
        self.element(ket, bra).re
    }

    pub fn set_element(&mut self, ket: &[usize], bra: &[usize], value: Complex64) {
        let n = self.hilbert_dim();
        let idx = self.flat(ket) * n + self.flat(bra);
        self.data[idx] = value;
    }

    /// `|ψ⟩⟨ψ|` for pure states, a clone otherwise.
    pub fn to_density(&self) -> Self {
        match self.kind {
            FockKind::Pure => {
                let n = self.data.len();
                let mut data = Vec::with_capacity(n * n);
                for a in &self.data {
                    for b in &self.data {
                        data.push(a * b.conj());
                    }
                }
                Self {
                    dims: self.dims.clone(),
                    kind: FockKind::Density,
                    data,
                }
            }
            _ => self.clone(),
        }
    }

    /// Norm squared for pure states, trace otherwise.
    pub fn trace(&self) -> f64 {
        match self.kind {
            FockKind::Pure => self.data.iter().map(|v| v.norm_sqr()).sum(),
            _ => {
                let n = self.hilbert_dim();
                (0..n).map(|i| self.data[i * n + i].re).sum()
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            kind: self.kind,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if !(tr > 0.0) {
            return Err(Error::ZeroWeight { weight: tr });
        }
        Ok(match self.kind {
            FockKind::Pure => self.scaled(tr.sqrt().recip()),
            _ => self.scaled(tr.recip()),
        })
    }

    /// Applies a map acting on `modes`: `O|ψ⟩` for pure states, `OρO†` for
    /// density matrices, `O·X` for operators.
    pub fn apply_local(&self, modes: &[usize], op: &LocalOperator) -> Result<Self> {
        if modes.len() != op.in_dims.len()
            || modes.iter().zip(&op.in_dims).any(|(&m, &d)| m >= self.n_modes() || self.dims[m] != d)
        {
            return Err(Error::Shape(format!(
                "operator with input dims {:?} does not fit modes {modes:?} of {:?}",
                op.in_dims, self.dims
            )));
        }
        let axis_dims = self.axis_dims();
        let (mut data, mut dims) = apply_axes(&self.data, &axis_dims, modes, op);
        if self.kind == FockKind::Density {
            let n = self.n_modes();
            let bra: Vec<usize> = modes.iter().map(|m| m + n).collect();
            let (d2, dims2) = apply_axes(&data, &dims, &bra, &op.conj());
            data = d2;
            dims = dims2;
        }
        let new_dims = dims[..self.n_modes()].to_vec();
        Ok(Self {
            dims: new_dims,
            kind: self.kind,
            data,
        })
    }

    /// Applies a single-mode superoperator acting jointly on the ket and bra
    /// axes of `mode`; `sup` maps `(n, n')` to `(m, m')`.
    pub(crate) fn apply_superoperator(&self, mode: usize, sup: &LocalOperator) -> Result<Self> {
        if self.kind != FockKind::Density {
            return Err(Error::Shape("superoperators act on density matrices".into()));
        }
        if mode >= self.n_modes() {
            return Err(Error::Shape(format!("mode {mode} out of range")));
        }
        let n = self.n_modes();
        let (data, dims) = apply_axes(&self.data, &self.axis_dims(), &[mode, mode + n], sup);
        Ok(Self {
            dims: dims[..n].to_vec(),
            kind: FockKind::Density,
            data,
        })
    }

    /// Drops modes whose dimension has been reduced to one.
    pub(crate) fn squeeze_modes(mut self, modes: &[usize]) -> Self {
        let mut modes = modes.to_vec();
        modes.sort_unstable();
        for &m in modes.iter().rev() {
            debug_assert_eq!(self.dims[m], 1);
            self.dims.remove(m);
        }
        self
    }

    /// Tensor product `self ⊗ other` (modes of `self` first).
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.kind != other.kind {
            return Err(Error::Shape("tensor product of mismatched kinds".into()));
        }
        let dims: Vec<usize> = self.dims.iter().chain(&other.dims).copied().collect();
        let data = match self.kind {
            FockKind::Pure => {
                let mut data = Vec::with_capacity(self.data.len() * other.data.len());
                for a in &self.data {
                    for b in &other.data {
                        data.push(a * b);
                    }
                }
                data
            }
            _ => {
                let (n1, n2) = (self.hilbert_dim(), other.hilbert_dim());
                let n = n1 * n2;
                let mut data = vec![ZERO; n * n];
                for i1 in 0..n1 {
                    for j1 in 0..n1 {
                        let a = self.data[i1 * n1 + j1];
                        if a == ZERO {
                            continue;
                        }
                        for i2 in 0..n2 {
                            let row = (i1 * n2 + i2) * n + j1 * n2;
                            for j2 in 0..n2 {
                                data[row + j2] = a * other.data[i2 * n2 + j2];
                            }
                        }
                    }
                }
                data
            }
        };
        Ok(Self {
            dims,
            kind: self.kind,
            data,
        })
    }

    /// Restricts every mode to its first `d` levels (a projection, not a
    /// renormalization).
    pub fn restrict(&self, d: usize) -> Result<Self> {
        if self.dims.iter().any(|&k| k < d) {
            return Err(Error::Shape(format!("cannot restrict {:?} to {d}", self.dims)));
        }
        let ops: Vec<LocalOperator> = self
            .dims
            .iter()
            .map(|&k| {
                LocalOperator::from_fn(vec![k], vec![d], |o, i| {
                    if o == i {
                        Complex64::new(1.0, 0.0)
                    } else {
                        ZERO
                    }
                })
            })
            .collect();
        let mut out = self.clone();
        for (m, op) in ops.iter().enumerate() {
            out = out.apply_local(&[m], op)?;
        }
        Ok(out)
    }

    /// Population of the top Fock level, maximized over modes and
    /// normalized by the trace.
    pub fn leakage(&self) -> f64 {
        let tr = self.trace();
        if !(tr > 0.0) {
            return 0.0;
        }
        let strides = row_major_strides(&self.dims);
        let n = self.hilbert_dim();
        let mut worst: f64 = 0.0;
        for (m, &d) in self.dims.iter().enumerate() {
            let mut pop = 0.0;
            for flat in 0..n {
                if (flat / strides[m]) % d == d - 1 {
                    pop += match self.kind {
                        FockKind::Pure => self.data[flat].norm_sqr(),
                        _ => self.data[flat * n + flat].re,
                    };
                }
            }
            worst = worst.max(pop / tr);
        }
        worst
    }

    /// Largest `|X_ij − conj(X_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.hilbert_dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    fn as_matrix(&self) -> nalgebra::DMatrix<Complex64> {
        let n = self.hilbert_dim();
        nalgebra::DMatrix::from_fn(n, n, |i, j| self.data[i * n + j])
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.as_matrix();
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Checks Hermiticity, positivity and `0 < Tr ρ ≤ 1 + slack`.
    pub fn validate_density(&self, hermitian_tol: f64, positivity_tol: f64) -> Result<()> {
        if self.kind != FockKind::Density {
            return Err(Error::Shape("not a density matrix".into()));
        }
        let herm = self.hermiticity_error();
        if herm > hermitian_tol {
            return Err(Error::Inadmissible(format!("not Hermitian ({herm:e})")));
        }
        let min = self.eigenvalues()[0];
        if min < -positivity_tol {
            return Err(Error::Inadmissible(format!("negative eigenvalue {min:e}")));
        }
        let tr = self.trace();
        if !(tr > 0.0 && tr <= 1.0 + positivity_tol) {
            return Err(Error::Inadmissible(format!("trace {tr} outside (0, 1]")));
        }
        Ok(())
    }

    /// `Tr ρ² / (Tr ρ)²`.
    pub fn purity(&self) -> f64 {
        match self.kind {
            FockKind::Pure => 1.0,
            _ => {
                let tr = self.trace();
                self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() / (tr * tr)
            }
        }
    }
}

/// An unnormalized conditional state and its accumulated success weight.
///
/// `weight` is the trace of `rho` relative to the normalization of the
/// input the chain started from.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedState {
    pub rho: FockArray,
    pub weight: f64,
}

impl WeightedState {
    /// Starts a chain from `rho`, which is normalized first.
    pub fn start(rho: &FockArray) -> Result<Self> {
        Ok(Self {
            rho: rho.to_density().normalized()?,
            weight: 1.0,
        })
    }

    pub fn normalized_state(&self) -> Result<FockArray> {
        self.rho.normalized()
    }

    pub fn filter(self, mode: usize, kind: FilterKind, floor: f64) -> Result<Self> {
        let next = ops::fock_filter(&self.rho, mode, kind, floor)?;
        Ok(Self {
            rho: next.rho,
            weight: self.weight * next.weight,
        })
    }

    pub fn project(self, mode: usize, target: ProjectionTarget, floor: f64) -> Result<Self> {
        let next = ops::project(&self.rho, mode, target, floor)?;
        Ok(Self {
            rho: next.rho,
            weight: self.weight * next.weight,
        })
    }
}

pub use ops::{fock_filter, project};

/// `ρ' = (M ⊗ M)(ρ_AB ⊗ ρ_CD)(M ⊗ M)†` with `M` acting on `(A, C)` and on
/// `(B, D)`, mapping each pair to one output mode.
///
/// `map` has input dims `[d, d]` (first-copy mode, second-copy mode) and
/// output dims `[d_out, 1]`. The four-mode product is never stored.
pub fn two_copy_local_map(
    rho_ab: &FockArray,
    rho_cd: &FockArray,
    map: &LocalOperator,
) -> Result<FockArray> {
    for rho in [rho_ab, rho_cd] {
        if rho.kind != FockKind::Density || rho.n_modes() != 2 {
            return Err(Error::Shape("two-copy map needs two-mode density matrices".into()));
        }
    }
    let d = rho_ab.dims[0];
    if rho_ab.dims != [d, d] || rho_cd.dims != [d, d] {
        return Err(Error::Shape(format!(
            "copies must share one cutoff: {:?} vs {:?}",
            rho_ab.dims, rho_cd.dims
        )));
    }
    if map.in_dims != [d, d] || map.out_dims.len() != 2 || map.out_dims[1] != 1 {
        return Err(Error::Shape(format!(
            "map dims {:?} -> {:?} do not fit cutoff {d}",
            map.in_dims, map.out_dims
        )));
    }
    let d_out = map.out_dims[0];

    // nonzeros grouped by the first ket index
    let rows = |rho: &FockArray| {
        let mut rows: Vec<Vec<(usize, usize, usize, Complex64)>> = vec![Vec::new(); d];
        for i in 0..d {
            for j in 0..d {
                for ip in 0..d {
                    for jp in 0..d {
                        let v = rho.data[((i * d + j) * d + ip) * d + jp];
                        if v != ZERO {
                            rows[i].push((j, ip, jp, v));
                        }
                    }
                }
            }
        }
        rows
    };
    let rows_ab = rows(rho_ab);
    let rows_cd = rows(rho_cd);

    // X[a, j, l, i', j', k', l']
    let x_dims = vec![d_out, d, d, d, d, d, d];
    let x_strides = row_major_strides(&x_dims);
    let mut x = vec![ZERO; x_dims.iter().product()];
    for &(a, joint, m) in &map.entries {
        let (i, k) = (joint / d, joint % d);
        for &(j, ip, jp, v1) in &rows_ab[i] {
            let mv1 = m * v1;
            for &(l, kp, lp, v2) in &rows_cd[k] {
                let idx = a * x_strides[0]
                    + j * x_strides[1]
                    + l * x_strides[2]
                    + ip * x_strides[3]
                    + jp * x_strides[4]
                    + kp * x_strides[5]
                    + lp;
                x[idx] += mv1 * v2;
            }
        }
    }
    let conj = map.conj();
    // ket (B, D)
    let (y, mut dims) = apply_axes(&x, &x_dims, &[1, 2], map);
    dims.remove(2);
    // bra (A, C): axes [a, b, i', j', k', l']
    let (y, mut dims) = apply_axes(&y, &dims, &[2, 4], &conj);
    dims.remove(4);
    // bra (B, D): axes [a, b, a', j', l']
    let (y, mut dims) = apply_axes(&y, &dims, &[3, 4], &conj);
    dims.remove(4);
    debug_assert_eq!(dims, vec![d_out; 4]);
    FockArray::density(vec![d_out, d_out], y)
}
