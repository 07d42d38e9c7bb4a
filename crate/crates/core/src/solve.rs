//! Small root finders used by the fixed-point and `q`-tuning code.

use crate::error::{Error, Result};

/// Damped Newton iteration for `f(x) = 0` in two unknowns, with a
/// finite-difference Jacobian and iterates clamped into `bounds`.
pub(crate) fn newton2(
    f: impl Fn([f64; 2]) -> Result<[f64; 2]>,
    x0: [f64; 2],
    bounds: [(f64, f64); 2],
    tol: f64,
    max_iter: usize,
) -> Result<[f64; 2]> {
    let clamp = |x: [f64; 2]| [x[0].clamp(bounds[0].0, bounds[0].1), x[1].clamp(bounds[1].0, bounds[1].1)];
    let norm = |v: [f64; 2]| v[0].abs().max(v[1].abs());
    let mut x = clamp(x0);
    let mut fx = f(x)?;
    let mut res = norm(fx);
    for _ in 0..max_iter {
        if res < tol {
            return Ok(x);
        }
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let h = 1e-7 * x[k].abs().max(1e-3);
            let mut xp = x;
            let mut xm = x;
            xp[k] = (x[k] + h).min(bounds[k].1);
            xm[k] = (x[k] - h).max(bounds[k].0);
            let fp = f(xp)?;
            let fm = f(xm)?;
            for i in 0..2 {
                jac[i][k] = (fp[i] - fm[i]) / (xp[k] - xm[k]);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let step = [
            (jac[1][1] * fx[0] - jac[0][1] * fx[1]) / det,
            (-jac[1][0] * fx[0] + jac[0][0] * fx[1]) / det,
        ];
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-6 {
            let trial = clamp([x[0] - alpha * step[0], x[1] - alpha * step[1]]);
            if let Ok(ft) = f(trial) {
                let rt = norm(ft);
                if rt < res {
                    x = trial;
                    fx = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res < tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence {
            iterations: max_iter,
            residual: res,
        })
    }
}

/// Illinois-modified regula falsi on a sign-changing bracket `[a, b]`.
pub(crate) fn illinois(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: fa.abs().min(fb.abs()),
        });
    }
    let mut side = 0;
    let mut best = (f64::INFINITY, a);
    for _ in 0..max_iter {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c)?;
        if fc.abs() < best.0 {
            best = (fc.abs(), c);
        }
        if fc.abs() < tol || (b - a).abs() < 1e-15 * c.abs().max(1.0) {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: best.0,
    })
}
