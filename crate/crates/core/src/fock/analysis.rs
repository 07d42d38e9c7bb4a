use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{apply_axes, FockArray, FockKind, LocalOperator};
use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;

fn lowering(d: usize) -> LocalOperator {
    LocalOperator::single_mode(d, |o, i| {
        if i == o + 1 {
            Complex64::new((i as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn number(d: usize) -> LocalOperator {
    LocalOperator::single_mode(d, |o, i| {
        if o == i {
            Complex64::new(i as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `Tr(O₁ O₂ ⋯ ρ)` for ket-side single-mode factors, last applied first.
fn expect(rho: &FockArray, factors: &[(usize, &LocalOperator)]) -> Complex64 {
    let mut data = rho.data.clone();
    let mut dims = rho.axis_dims();
    for &(mode, op) in factors.iter().rev() {
        let (next, next_dims) = apply_axes(&data, &dims, &[mode], op);
        data = next;
        dims = next_dims;
    }
    let n = rho.hilbert_dim();
    (0..n).map(|i| data[i * n + i]).sum()
}

/// Covariance matrix in `(x₁, p₁, …, x_N, p_N)` order with vacuum `= I`,
/// from normally ordered moments of the normalized state. These moments are
/// exact on the truncated space.
pub fn covariance_of(rho: &FockArray) -> Result<CovarianceMatrix> {
    let rho = match rho.kind {
        FockKind::Pure => rho.to_density(),
        FockKind::Density => rho.clone(),
        FockKind::Operator => return Err(Error::Shape("covariance of an operator".into())),
    }
    .normalized()?;
    let modes = rho.n_modes();
    let a: Vec<LocalOperator> = rho.dims[..modes].iter().map(|&d| lowering(d)).collect();
    let ad: Vec<LocalOperator> = a.iter().map(adjoint).collect();
    let num: Vec<LocalOperator> = rho.dims[..modes].iter().map(|&d| number(d)).collect();

    let mean: Vec<Complex64> = (0..modes).map(|j| expect(&rho, &[(j, &a[j])])).collect();
    let mut quad = vec![0.0; 2 * modes];
    for j in 0..modes {
        quad[2 * j] = 2.0 * mean[j].re;
        quad[2 * j + 1] = 2.0 * mean[j].im;
    }

    let mut g = DMatrix::zeros(2 * modes, 2 * modes);
    for j in 0..modes {
        let m = expect(&rho, &[(j, &a[j]), (j, &a[j])]);
        let n = expect(&rho, &[(j, &num[j])]).re;
        g[(2 * j, 2 * j)] = 2.0 * m.re + 2.0 * n + 1.0;
        g[(2 * j + 1, 2 * j + 1)] = -2.0 * m.re + 2.0 * n + 1.0;
        g[(2 * j, 2 * j + 1)] = 2.0 * m.im;
        g[(2 * j + 1, 2 * j)] = 2.0 * m.im;
        for k in j + 1..modes {
            let m = expect(&rho, &[(j, &a[j]), (k, &a[k])]);
            let n = expect(&rho, &[(j, &ad[j]), (k, &a[k])]);
            let block = [
                [2.0 * (m.re + n.re), 2.0 * (m.im + n.im)],
                [2.0 * (m.im - n.im), 2.0 * (n.re - m.re)],
            ];
            for (u, row) in block.iter().enumerate() {
                for (v, &val) in row.iter().enumerate() {
                    g[(2 * j + u, 2 * k + v)] = val;
                    g[(2 * k + v, 2 * j + u)] = val;
                }
            }
        }
    }
    for u in 0..2 * modes {
        for v in 0..2 * modes {
            g[(u, v)] -= quad[u] * quad[v];
        }
    }
    CovarianceMatrix::new(g, 1e-9)
}

fn adjoint(op: &LocalOperator) -> LocalOperator {
    LocalOperator {
        in_dims: op.out_dims.clone(),
        out_dims: op.in_dims.clone(),
        entries: op.entries.iter().map(|&(o, i, c)| (i, o, c.conj())).collect(),
    }
}

/// `ρ₁₀,₁₀ / ρ₁₁,₀₀` of a two-mode state.
pub fn epsilon_from_rho(rho: &FockArray) -> Result<f64> {
    let rho = rho.to_density();
    if rho.n_modes() != 2 || rho.dims.iter().any(|&d| d < 2) {
        return Err(Error::Shape("ε needs a two-mode state with cutoff ≥ 2".into()));
    }
    let coh = rho.re(&[1, 1], &[0, 0]);
    if coh == 0.0 {
        return Err(Error::DivisionByZero("ρ₁₁,₀₀"));
    }
    Ok(rho.re(&[1, 0], &[1, 0]) / coh)
}

/// `½‖ρ − σ‖₁` of the normalized states.
pub fn trace_distance(rho: &FockArray, sigma: &FockArray) -> Result<f64> {
    let a = rho.to_density().normalized()?;
    let b = sigma.to_density().normalized()?;
    if a.dims != b.dims {
        return Err(Error::Shape(format!("dims {:?} vs {:?}", a.dims, b.dims)));
    }
    let diff: Vec<Complex64> = a.data.iter().zip(&b.data).map(|(x, y)| x - y).collect();
    let diff = FockArray::operator(a.dims.clone(), diff)?;
    Ok(0.5 * diff.eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{gaussian_fock_state, tmsv, truncated_tmsv};
    use crate::gaussian::ChannelParametrization;

    #[test]
    fn vacuum_covariance_is_identity() {
        let g = covariance_of(&FockArray::vacuum(2, 3).unwrap()).unwrap();
        assert!(g.max_abs_diff(&CovarianceMatrix::vacuum(2)) < 1e-15);
    }

    #[test]
    fn tmsv_covariance_matches_closed_form() {
        let lambda: f64 = 0.4;
        let psi = tmsv(lambda, 30, 1e-4).unwrap();
        let r = lambda.atanh();
        let expect = ChannelParametrization::new(r, 1.0).unwrap().state().covariance();
        let g = covariance_of(&psi).unwrap();
        assert!(g.max_abs_diff(&expect) < 1e-10);
    }

    #[test]
    fn lossy_covariance_matches_closed_form() {
        let ch = ChannelParametrization::new(0.5, 0.7).unwrap();
        let g = covariance_of(&gaussian_fock_state(&ch, 20).unwrap()).unwrap();
        assert!(g.max_abs_diff(&ch.state().covariance()) < 1e-8);
    }

    #[test]
    fn epsilon_of_pure_state_is_zero() {
        assert_eq!(epsilon_from_rho(&truncated_tmsv(0.3, 3).unwrap()).unwrap(), 0.0);
        assert!(epsilon_from_rho(&FockArray::vacuum(2, 3).unwrap()).is_err());
        let ch = ChannelParametrization::new(1.0, 0.4).unwrap();
        let eps = epsilon_from_rho(&gaussian_fock_state(&ch, 3).unwrap()).unwrap();
        assert!((eps - ch.epsilon()).abs() < 1e-14);
    }

    #[test]
    fn trace_distance_examples() {
        let a = FockArray::basis(vec![2], &[0]).unwrap();
        let b = FockArray::basis(vec![2], &[1]).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert!(trace_distance(&a, &a).unwrap() < 1e-15);
    }
}
