//! Wave polynomials `p_m`, the Goursat solution of the wave equation and
//! generalized wave polynomials `u_m` built over a [`PhiBasis`].
//!
//! Ordering: `p_0 = 1`, `p_{2n-1} = Re (x + jt)^n`, `p_{2n} = Im (x + jt)^n`
//! with the hyperbolic unit `j^2 = 1`, so `p_1 = x`, `p_2 = t`,
//! `p_3 = x^2 + t^2`, `p_4 = 2xt`.

use num_complex::Complex64;

use crate::basis::{PhiBasis, SampledFunction};
use crate::error::{Error, Result};

/// Binomial coefficient by the multiplicative recurrence.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Pascal rows `0..=n` as a table: `table[n][k] = C(n, k)`.
pub fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    (0..=n)
        .map(|r| (0..=r).map(|k| binomial(r, k)).collect())
        .collect()
}

/// `(power n, parity of k)` for index `m`: odd `m` sums even `k`, even `m`
/// sums odd `k`.
#[inline]
fn split_index(m: usize) -> (usize, usize) {
    if m % 2 == 1 {
        (m.div_ceil(2), 0)
    } else {
        (m / 2, 1)
    }
}

/// Highest `phi` index that `u_m` involves, `None` for the terms that
/// vanish identically (`m` even with no odd `k`).
pub fn max_phi_index(m: usize) -> Option<usize> {
    match m {
        0 => Some(0),
        m if m % 2 == 1 => Some(m.div_ceil(2)),
        m => (m / 2).checked_sub(1),
    }
}

/// Wave polynomial `p_m(x, t)`.
pub fn wave_poly(m: usize, x: f64, t: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let (n, first) = split_index(m);
    (first..=n)
        .step_by(2)
        .map(|k| binomial(n, k) * x.powi((n - k) as i32) * t.powi(k as i32))
        .sum()
}

/// Solution of `w_xx = w_tt` with `w = phi(x)` on `x = t` and `w = psi(x)`
/// on `x = -t`: `w = phi((x+t)/2) + psi((x-t)/2) - phi(0)`.
pub fn goursat_solution(
    phi: &SampledFunction,
    psi: &SampledFunction,
    x: f64,
    t: f64,
) -> Result<Complex64> {
    let (p0, s0) = (phi.eval(0.0)?, psi.eval(0.0)?);
    let scale = p0.norm().max(s0.norm()).max(1.0);
    if (p0 - s0).norm() > 1e-12 * scale {
        return Err(Error::Compatibility {
            phi0: p0.to_string(),
            psi0: s0.to_string(),
        });
    }
    let b = phi.b().min(psi.b());
    if x.abs() + t.abs() > 2.0 * b * (1.0 + 1e-12) {
        return Err(Error::Domain {
            x: x.abs() + t.abs(),
            lo: 0.0,
            hi: 2.0 * b,
        });
    }
    Ok(phi.eval((x + t) / 2.0)? + psi.eval((x - t) / 2.0)? - p0)
}

/// Coefficients over `{p_m}` or `{u_m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveCoefficients {
    pub coeffs: Vec<Complex64>,
}

impl WaveCoefficients {
    /// `sum a_m p_m(x, t)`.
    pub fn eval_wave(&self, x: f64, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
            .map(|(m, a)| a * wave_poly(m, x, t))
            .sum()
    }

    /// `sum a_m u_m(x, t)` over the given basis.
    pub fn eval_generalized(&self, basis: &PhiBasis, x: f64, t: f64) -> Result<Complex64> {
        let top = self
            .coeffs
            .len()
            .checked_sub(1)
            .and_then(|m| (0..=m).filter_map(max_phi_index).max())
            .unwrap_or(0);
        let phi = basis.phi_at(x, top)?;
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, a)| a * gen_wave_poly_at(&phi, m, t))
            .sum())
    }
}

/// Goursat expansion: `alpha_0 p_0 + sum (alpha_n + beta_n)/2^n p_{2n-1}
/// + sum (alpha_n - beta_n)/2^n p_{2n}`.
pub fn wave_expansion(alpha: &[Complex64], beta: &[Complex64]) -> Result<WaveCoefficients> {
    let zero = Complex64::new(0.0, 0.0);
    let a0 = alpha.first().copied().unwrap_or(zero);
    let b0 = beta.first().copied().unwrap_or(zero);
    if (a0 - b0).norm() > 1e-12 * a0.norm().max(b0.norm()).max(1.0) {
        return Err(Error::Compatibility {
            phi0: a0.to_string(),
            psi0: b0.to_string(),
        });
    }
    let top = alpha.len().max(beta.len()).max(1) - 1;
    let mut coeffs = vec![zero; 2 * top + 1];
    coeffs[0] = a0;
    let mut scale = 1.0;
    for n in 1..=top {
        scale *= 0.5;
        let an = alpha.get(n).copied().unwrap_or(zero);
        let bn = beta.get(n).copied().unwrap_or(zero);
        coeffs[2 * n - 1] = (an + bn) * scale;
        coeffs[2 * n] = (an - bn) * scale;
    }
    Ok(WaveCoefficients { coeffs })
}

/// Generalized wave polynomial `u_m(x, t)`: `p_m` with `x^j` replaced by
/// `phi_j(x)`.
pub fn gen_wave_poly(basis: &PhiBasis, m: usize, x: f64, t: f64) -> Result<Complex64> {
    let top = max_phi_index(m).unwrap_or(0);
    let phi = basis.phi_at(x, top)?;
    Ok(gen_wave_poly_at(&phi, m, t))
}

/// `u_m` from precomputed `phi_j(x)` values.
pub fn gen_wave_poly_at(phi: &[Complex64], m: usize, t: f64) -> Complex64 {
    if m == 0 {
        return phi[0];
    }
    let (n, first) = split_index(m);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut tk = if first == 0 { 1.0 } else { t };
    let mut k = first;
    while k <= n {
        acc += phi[n - k] * (binomial(n, k) * tk);
        tk *= t * t;
        k += 2;
    }
    acc
}
