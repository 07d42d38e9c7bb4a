//! Covariance-matrix calculus for symmetric two-mode Gaussian states.
//!
//! Quadratures are ordered `(x₁, p₁, x₂, p₂, …)` and the covariance matrix is
//! `γ_jk = ⟨{Δr̂_j, Δr̂_k}⟩`, so the vacuum has `γ = I`. The symmetric family
//! has the block form
//!
//! ```text
//! ⎡ C  0  S  0 ⎤
//! ⎢ 0  C  0 -S ⎥
//! ⎢ S  0  C  0 ⎥
//! ⎣ 0 -S  0  C ⎦
//! ```
//!
//! and every entangled member is a two-mode squeezed vacuum with squeezing
//! `r` transmitted through two identical lossy channels of transmittance `T`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// The `(C, S)` pair of a symmetric two-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricGaussianState {
    c: f64,
    s: f64,
}

impl SymmetricGaussianState {
    /// Checks `C ≥ 1` and `C² − S² ≥ 1` with slack `tol`.
    pub fn new(c: f64, s: f64, tol: f64) -> Result<Self> {
        if !c.is_finite() || !s.is_finite() {
            return Err(Error::Inadmissible(format!("non-finite (C, S) = ({c}, {s})")));
        }
        if c < 1.0 - tol {
            return Err(Error::Inadmissible(format!("C = {c} < 1")));
        }
        if (c - s.abs()) * (c + s.abs()) < 1.0 - tol {
            return Err(Error::Inadmissible(format!("C² − S² = {} < 1", c * c - s * s)));
        }
        Ok(Self { c, s })
    }

    pub fn vacuum() -> Self {
        Self { c: 1.0, s: 0.0 }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// EPR variance `C − |S|`; the state is entangled iff it is below one.
    pub fn epr_variance(&self) -> f64 {
        self.c - self.s.abs()
    }

    pub fn is_entangled(&self) -> bool {
        self.epr_variance() < 1.0
    }

    /// Maps `S → |S|` (a local phase flip) and reports whether it flipped.
    pub fn canonical(&self) -> (Self, bool) {
        (
            Self {
                c: self.c,
                s: self.s.abs(),
            },
            self.s < 0.0,
        )
    }

    pub fn covariance(&self) -> CovarianceMatrix {
        let (c, s) = (self.c, self.s);
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            c,   0.0, s,   0.0,
            0.0, c,   0.0, -s,
            s,   0.0, c,   0.0,
            0.0, -s,  0.0, c,
        ]);
        CovarianceMatrix(m)
    }

    /// Reads `(C, S)` back from a 4×4 covariance matrix, requiring the
    /// symmetric block pattern within `tol`.
    pub fn from_covariance(gamma: &CovarianceMatrix, tol: f64) -> Result<Self> {
        let m = gamma.matrix();
        if m.nrows() != 4 {
            return Err(Error::Shape(format!("expected 4x4 covariance, got {}", m.nrows())));
        }
        let reference = Self {
            c: m[(0, 0)],
            s: m[(0, 2)],
        }
        .covariance();
        let dev = (m - reference.matrix()).amax();
        if dev > tol {
            return Err(Error::SymmetryViolation {
                element: "covariance block pattern".into(),
                value: dev,
            });
        }
        Self::new(m[(0, 0)], m[(0, 2)], tol)
    }

    pub fn epsilon(&self) -> Result<f64> {
        epsilon_from_cs(self)
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    pub fn eof(&self) -> f64 {
        eof_symmetric(self)
    }
}

/// Two-mode squeezing `r` and channel transmittance `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParametrization {
    r: f64,
    t: f64,
}

impl ChannelParametrization {
    pub fn new(r: f64, t: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(domain("r", r, "[0, ∞)"));
        }
        if !(t > 0.0 && t <= 1.0) {
            return Err(domain("T", t, "(0, 1]"));
        }
        Ok(Self { r, t })
    }

    /// Same as [`ChannelParametrization::new`] with `λ = tanh r`.
    pub fn from_lambda(lambda: f64, t: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(domain("λ", lambda, "[0, 1)"));
        }
        Self::new(lambda.atanh(), t)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn lambda(&self) -> f64 {
        self.r.tanh()
    }

    pub fn epsilon(&self) -> f64 {
        (1.0 - self.t) * self.lambda()
    }

    pub fn state(&self) -> SymmetricGaussianState {
        let (c, s) = cs_pair(self.r, self.t);
        SymmetricGaussianState { c, s }
    }
}

fn cs_pair(r: f64, t: f64) -> (f64, f64) {
    let two_r = 2.0 * r;
    // T (cosh 2r − 1) + 1 keeps C − 1 accurate for small r.
    (1.0 + t * 2.0 * r.sinh().powi(2), t * two_r.sinh())
}

pub fn cs_from_rt(r: f64, t: f64) -> Result<SymmetricGaussianState> {
    Ok(ChannelParametrization::new(r, t)?.state())
}

/// Inverts `C = T cosh 2r + 1 − T`, `S = T sinh 2r`.
///
/// Uses `2r = ln[(S + C − 1)/(S − C + 1)]`, which equals
/// `artanh[2S(C−1)/(S² + (C−1)²)]` but stays accurate for large `r`.
pub fn rt_from_cs(state: &SymmetricGaussianState) -> Result<ChannelParametrization> {
    let (canon, _) = state.canonical();
    let (c, s) = (canon.c, canon.s);
    let cm1 = c - 1.0;
    if cm1 <= f64::EPSILON {
        return Err(Error::DegenerateDecomposition { c_minus_one: cm1 });
    }
    if s == 0.0 {
        return Err(Error::DivisionByZero("rt_from_cs with S = 0"));
    }
    if !canon.is_entangled() {
        return Err(Error::Inadmissible(format!(
            "separable state (C − |S| = {}) has no channel decomposition",
            canon.epr_variance()
        )));
    }
    let plus = s + cm1;
    let minus = s - cm1;
    let r = 0.5 * (plus / minus).ln();
    let t = minus * plus / (2.0 * cm1);
    if t > 1.0 + 1e-9 {
        return Err(Error::Inadmissible(format!("effective transmittance {t} > 1")));
    }
    ChannelParametrization::new(r, t.min(1.0))
}

/// `ε = (C² − S² − 1)/(2S)`.
pub fn epsilon_from_cs(state: &SymmetricGaussianState) -> Result<f64> {
    if state.s == 0.0 {
        return Err(Error::DivisionByZero("ε with S = 0"));
    }
    let (c, s) = (state.c, state.s);
    Ok(((c - s) * (c + s) - 1.0) / (2.0 * s))
}

/// `P = 1/√det γ`, i.e. `1/(C² − S²)` for the symmetric family.
pub fn purity(state: &SymmetricGaussianState) -> f64 {
    1.0 / ((state.c - state.s) * (state.c + state.s))
}

/// Purity written through `r` and `ε` of the channel parametrization.
pub fn purity_from_r_epsilon(r: f64, eps: f64) -> f64 {
    let two_r = 2.0 * r;
    1.0 / (1.0 - 2.0 * eps * eps - 2.0 * eps * eps * two_r.cosh() + 2.0 * eps * two_r.sinh())
}

/// Entanglement of formation in ebits as a function of the EPR variance
/// `δ = C − |S|`: `c₊ log₂ c₊ − c₋ log₂ c₋` with `c± = (δ^{-1/2} ± δ^{1/2})²/4`.
pub fn eof_symmetric(state: &SymmetricGaussianState) -> f64 {
    let delta = state.epr_variance();
    if delta >= 1.0 {
        return 0.0;
    }
    let (a, b) = (delta.sqrt().recip(), delta.sqrt());
    let c_plus = (a + b).powi(2) / 4.0;
    let c_minus = (a - b).powi(2) / 4.0;
    let xlog = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    xlog(c_plus) - xlog(c_minus)
}

/// A real symmetric `2N × 2N` covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    pub fn new(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() % 2 != 0 || matrix.nrows() == 0 {
            return Err(Error::Shape(format!(
                "covariance must be 2N×2N, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > tol {
            return Err(Error::Inadmissible(format!("covariance not symmetric ({asym:e})")));
        }
        Ok(Self(matrix))
    }

    pub fn vacuum(modes: usize) -> Self {
        Self(DMatrix::identity(2 * modes, 2 * modes))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn modes(&self) -> usize {
        self.0.nrows() / 2
    }

    /// Smallest eigenvalue of `γ + iΩ`; non-negative for physical states.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let n = self.0.nrows();
        let omega = symplectic_form(n / 2);
        let h = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            Complex64::new(self.0[(i, j)], omega[(i, j)])
        });
        h.symmetric_eigenvalues().min()
    }

    pub fn is_admissible(&self, tol: f64) -> bool {
        self.uncertainty_min_eigenvalue() >= -tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).amax()
    }
}

/// `Ω = ⊕ [[0, 1], [−1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    m
}

/// `Σ = diag(1, −1, 1, −1, …)`.
fn sigma_flip(dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| match (i == j, i % 2) {
        (true, 0) => 1.0,
        (true, _) => -1.0,
        _ => 0.0,
    })
}

/// `γ' = Tγ + (1 − T)I` on every mode.
pub fn lossy_channel(gamma: &CovarianceMatrix, t: f64) -> Result<CovarianceMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain("T", t, "[0, 1]"));
    }
    let n = gamma.0.nrows();
    Ok(CovarianceMatrix(
        &gamma.0 * t + DMatrix::identity(n, n) * (1.0 - t),
    ))
}

/// A Gaussian CP map described by the covariance matrix of its Choi state,
/// split into output (`Γ₁`) and input (`Γ₂`) blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianOperation {
    gamma1: DMatrix<f64>,
    gamma12: DMatrix<f64>,
    gamma2: DMatrix<f64>,
}

impl GaussianOperation {
    pub fn new(gamma1: DMatrix<f64>, gamma12: DMatrix<f64>, gamma2: DMatrix<f64>) -> Result<Self> {
        let n1 = gamma1.nrows();
        let n2 = gamma2.nrows();
        if !gamma1.is_square()
            || !gamma2.is_square()
            || gamma12.shape() != (n1, n2)
            || n1 % 2 != 0
            || n2 % 2 != 0
        {
            return Err(Error::Shape("inconsistent Γ block shapes".into()));
        }
        Ok(Self {
            gamma1,
            gamma12,
            gamma2,
        })
    }

    /// Same single-mode operation on both modes of a two-mode state, given
    /// the 4×4 covariance of its Choi state ordered `(output, input)`.
    pub fn local_pair(choi: &DMatrix<f64>) -> Result<Self> {
        if choi.shape() != (4, 4) {
            return Err(Error::Shape("single-mode Choi covariance must be 4×4".into()));
        }
        let block = |r: usize, c: usize| choi.view((r, c), (2, 2)).into_owned();
        let diag2 = |b: DMatrix<f64>| {
            let mut m = DMatrix::zeros(4, 4);
            m.view_mut((0, 0), (2, 2)).copy_from(&b);
            m.view_mut((2, 2), (2, 2)).copy_from(&b);
            m
        };
        Self::new(diag2(block(0, 0)), diag2(block(0, 2)), diag2(block(2, 2)))
    }

    /// Each mode is filtered by a pure two-mode squeezed vacuum Choi state
    /// with squeezing `s`. Approaches the identity channel as `s → ∞`.
    pub fn local_two_mode_squeezer(s: f64) -> Result<Self> {
        if !(s >= 0.0) {
            return Err(domain("s", s, "[0, ∞)"));
        }
        let tmsv = SymmetricGaussianState {
            c: (2.0 * s).cosh(),
            s: (2.0 * s).sinh(),
        };
        Self::local_pair(tmsv.covariance().matrix())
    }

    /// Pure-loss channel on each mode, dilated through a Choi state of
    /// squeezing `s`; exact in the limit `s → ∞`.
    pub fn local_pure_loss(t: f64, s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(domain("T", t, "[0, 1]"));
        }
        let (c, sh) = ((2.0 * s).cosh(), (2.0 * s).sinh());
        let out = t * c + 1.0 - t;
        let x = t.sqrt() * sh;
        #[rustfmt::skip]
        let choi = DMatrix::from_row_slice(4, 4, &[
            out, 0.0, x,   0.0,
            0.0, out, 0.0, -x,
            x,   0.0, c,   0.0,
            0.0, -x,  0.0, c,
        ]);
        Self::local_pair(&choi)
    }

    pub fn full(&self) -> DMatrix<f64> {
        let (n1, n2) = (self.gamma1.nrows(), self.gamma2.nrows());
        let mut m = DMatrix::zeros(n1 + n2, n1 + n2);
        m.view_mut((0, 0), (n1, n1)).copy_from(&self.gamma1);
        m.view_mut((0, n1), (n1, n2)).copy_from(&self.gamma12);
        m.view_mut((n1, 0), (n2, n1)).copy_from(&self.gamma12.transpose());
        m.view_mut((n1, n1), (n2, n2)).copy_from(&self.gamma2);
        m
    }

    pub fn is_admissible(&self, tol: f64) -> bool {
        CovarianceMatrix(self.full()).is_admissible(tol)
    }
}

/// `γ' = Γ₁ − Γ₁₂ [Γ₂ + ΣγΣᵀ]⁻¹ Γ₁₂ᵀ` (unnormalized conditional Gaussian map).
pub fn gaussian_cp_map(op: &GaussianOperation, gamma: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    let n = gamma.0.nrows();
    if op.gamma2.nrows() != n {
        return Err(Error::Shape(format!(
            "operation acts on {} quadratures, state has {n}",
            op.gamma2.nrows()
        )));
    }
    let sigma = sigma_flip(n);
    let m = &op.gamma2 + &sigma * &gamma.0 * sigma.transpose();
    let inv = m.try_inverse().ok_or(Error::SingularMatrix)?;
    if inv.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    let out = &op.gamma1 - &op.gamma12 * inv * op.gamma12.transpose();
    // symmetrize away rounding
    let out = (&out + out.transpose()) * 0.5;
    Ok(CovarianceMatrix(out))
}

/// Closed form of the symmetric local Gaussian filter with squeezing `s`.
pub fn symmetric_gaussian_filter(
    state: &SymmetricGaussianState,
    s: f64,
) -> Result<SymmetricGaussianState> {
    if !(s >= 0.0) {
        return Err(domain("s", s, "[0, ∞)"));
    }
    let ch = (2.0 * s).cosh();
    let sh2 = (2.0 * s).sinh().powi(2);
    let (c, sv) = (state.c, state.s);
    let den = (c + ch).powi(2) - sv * sv;
    let c_out = (c * (ch * ch + 1.0) + (c * c - sv * sv + 1.0) * ch) / den;
    let s_out = sv * sh2 / den;
    Ok(SymmetricGaussianState { c: c_out, s: s_out })
}
