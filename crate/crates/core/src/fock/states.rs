use num_complex::Complex64;

use super::{FockArray, ZERO};
use crate::error::{domain, Error, Result};
use crate::gaussian::ChannelParametrization;

/// `√(1−λ²) Σ_{n<d} λⁿ |n, n⟩`, left unnormalized so the norm deficit is the
/// truncation tail. Fails when the top-level population exceeds
/// `leakage_bound`.
pub fn tmsv(lambda: f64, d: usize, leakage_bound: f64) -> Result<FockArray> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(domain("λ", lambda, "[0, 1)"));
    }
    if d < 2 {
        return Err(domain("cutoff", d as f64, "d ≥ 2"));
    }
    let norm = (1.0 - lambda * lambda).sqrt();
    let mut data = vec![ZERO; d * d];
    for n in 0..d {
        data[n * d + n] = Complex64::new(norm * lambda.powi(n as i32), 0.0);
    }
    let psi = FockArray::pure(vec![d, d], data)?;
    let leakage = psi.leakage();
    if leakage > leakage_bound {
        return Err(Error::CutoffTooSmall {
            cutoff: d,
            leakage,
            bound: leakage_bound,
        });
    }
    Ok(psi)
}

/// `(|00⟩ + λ|11⟩)/√(1 + λ²)` embedded in cutoff `d`.
pub fn truncated_tmsv(lambda: f64, d: usize) -> Result<FockArray> {
    if d < 2 {
        return Err(domain("cutoff", d as f64, "d ≥ 2"));
    }
    if !lambda.is_finite() {
        return Err(domain("λ", lambda, "finite"));
    }
    let norm = (1.0 + lambda * lambda).sqrt().recip();
    let mut data = vec![ZERO; d * d];
    data[0] = Complex64::new(norm, 0.0);
    data[d + 1] = Complex64::new(lambda * norm, 0.0);
    FockArray::pure(vec![d, d], data)
}

fn ln_factorial(n: usize) -> f64 {
    if n < 256 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    // Stirling series; relative error far below 1e-16 at n ≥ 256
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `⟨j,k|ρ|m,n⟩` of a two-mode squeezed vacuum (`λ = tanh r`, sign allowed)
/// sent through loss `R = 1 − T` on both modes, summed over all Kraus
/// branches without truncation.
pub fn lossy_tmsv_element_with_loss(lambda: f64, loss: f64, ket: [usize; 2], bra: [usize; 2]) -> f64 {
    let [j, k] = ket;
    let [m, n] = bra;
    // photon-number difference between the modes is conserved
    if j as isize - k as isize != m as isize - n as isize {
        return 0.0;
    }
    let t = 1.0 - loss;
    let lam = lambda.abs();
    let sign = if lambda < 0.0 && (j + m) % 2 == 1 { -1.0 } else { 1.0 };
    let prefactor = (1.0 - lam * lam) * t.powf((j + m + k + n) as f64 / 2.0);
    if prefactor == 0.0 {
        return 0.0;
    }

    let start = k.saturating_sub(j);
    let mut sum = 0.0;
    let mut small = 0;
    for la in start..start + 200_000 {
        let na = j + la; // ket photons of the squeezed pair
        let ma = m + la; // bra photons
        let lb = na - k;
        let powers = lam.powi((na + ma) as i32) * loss.powi((la + lb) as i32);
        if powers == 0.0 {
            if la > start + 1 || lam == 0.0 || loss == 0.0 {
                break;
            }
            continue;
        }
        let ln_b = 0.5
            * (ln_binomial(na, la) + ln_binomial(ma, la) + ln_binomial(na, lb) + ln_binomial(ma, lb));
        let term = powers * ln_b.exp();
        sum += term;
        if term < 1e-18 * sum {
            small += 1;
            if small > 8 {
                break;
            }
        } else {
            small = 0;
        }
    }
    sign * prefactor * sum
}

pub fn lossy_tmsv_element(channel: &ChannelParametrization, ket: [usize; 2], bra: [usize; 2]) -> f64 {
    lossy_tmsv_element_with_loss(channel.lambda(), 1.0 - channel.t(), ket, bra)
}

/// Exact matrix elements of a symmetric Gaussian state restricted to the
/// first `d` levels of each mode. The result is not renormalized: its trace
/// is the population kept by the truncation.
pub fn gaussian_fock_state(channel: &ChannelParametrization, d: usize) -> Result<FockArray> {
    gaussian_fock_state_with_loss(channel.lambda(), 1.0 - channel.t(), d)
}

pub(crate) fn gaussian_fock_state_with_loss(lambda: f64, loss: f64, d: usize) -> Result<FockArray> {
    if d < 2 {
        return Err(domain("cutoff", d as f64, "d ≥ 2"));
    }
    let n = d * d;
    let mut data = vec![ZERO; n * n];
    for j in 0..d {
        for k in 0..d {
            for m in 0..d {
                let diff = m as isize + k as isize - j as isize;
                if diff < 0 || diff >= d as isize {
                    continue;
                }
                let nn = diff as usize;
                let v = lossy_tmsv_element_with_loss(lambda, loss, [j, k], [m, nn]);
                data[(j * d + k) * n + m * d + nn] = Complex64::new(v, 0.0);
            }
        }
    }
    FockArray::density(vec![d, d], data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tmsv_examples() {
        let vac = tmsv(0.0, 4, 1e-4).unwrap();
        assert_eq!(vac.amplitude(&[0, 0]).re, 1.0);
        assert_eq!(vac.trace(), 1.0);

        // ⟨n̂₁⟩ = λ²/(1 − λ²) up to the truncated tail
        let psi = tmsv(0.5, 10, 1e-4).unwrap();
        let mean: f64 = (0..10).map(|n| n as f64 * psi.amplitude(&[n, n]).norm_sqr()).sum();
        assert!((mean - 1.0 / 3.0).abs() < 1e-4);

        assert!(matches!(tmsv(0.9, 2, 1e-4), Err(Error::CutoffTooSmall { .. })));
        assert!(tmsv(1.0, 8, 1e-4).is_err());
    }

    #[test]
    fn truncated_tmsv_examples() {
        let v = truncated_tmsv(0.0, 3).unwrap();
        assert_eq!(v.amplitude(&[0, 0]).re, 1.0);
        let bell = truncated_tmsv(1.0, 2).unwrap();
        assert!((bell.amplitude(&[0, 0]).re - bell.amplitude(&[1, 1]).re).abs() < 1e-16);
        assert!((truncated_tmsv(0.37, 4).unwrap().trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lossy_elements_closed_forms() {
        // ρ₀₀,₀₀ = (1 − λ²)/(1 − λ²R²), ρ₁₁,₀₀ = (1 − λ²)λT/(1 − λ²R²)²,
        // ρ₁₀,₁₀ = (1 − λ²)TRλ²/(1 − λ²R²)²
        for &(lam, r) in &[(0.3, 0.2), (0.76, 0.5), (0.95, 0.9)] {
            let t: f64 = 1.0 - r;
            let g: f64 = 1.0 - lam * lam * r * r;
            let base = 1.0 - lam * lam;
            let e00 = lossy_tmsv_element_with_loss(lam, r, [0, 0], [0, 0]);
            let e11 = lossy_tmsv_element_with_loss(lam, r, [1, 1], [0, 0]);
            let e10 = lossy_tmsv_element_with_loss(lam, r, [1, 0], [1, 0]);
            assert!((e00 - base / g).abs() < 1e-14);
            assert!((e11 - base * lam * t / (g * g)).abs() < 1e-14);
            assert!((e10 - base * t * r * lam * lam / (g * g)).abs() < 1e-14);
        }
    }

    #[test]
    fn gaussian_state_trace_approaches_one() {
        let ch = ChannelParametrization::new(0.4, 0.6).unwrap();
        let rho = gaussian_fock_state(&ch, 14).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-9);
        let rho = gaussian_fock_state(&ch, 4).unwrap();
        assert!(rho.trace() < 1.0);
        assert!(rho.hermiticity_error() < 1e-15);
    }

    #[test]
    fn negative_lambda_flips_odd_coherences() {
        let p = lossy_tmsv_element_with_loss(0.5, 0.3, [1, 1], [0, 0]);
        let n = lossy_tmsv_element_with_loss(-0.5, 0.3, [1, 1], [0, 0]);
        assert!((p + n).abs() < 1e-16);
        let p = lossy_tmsv_element_with_loss(0.5, 0.3, [1, 0], [1, 0]);
        let n = lossy_tmsv_element_with_loss(-0.5, 0.3, [1, 0], [1, 0]);
        assert_eq!(p, n);
    }
}
