//! Particular solutions of `f'' = q f` and spectral parameter power series
//! for `u'' - q u = lambda u`.

use num_complex::Complex64;

use crate::basis::{antiderivative, check_non_vanishing, PhiBasis, SampledFunction};
use crate::error::Result;

const PICARD_TOL: f64 = 1e-14;
const PICARD_MAX_ITER: usize = 50;

/// Relative tail above which an SPPS sum is reported as truncated.
pub const SPPS_TAIL_TOL: f64 = 1e-12;

/// A non-vanishing solution of `f'' = q f` with `f(0) = 1`.
#[derive(Clone, Debug)]
pub struct ParticularSolution {
    pub f: SampledFunction,
    /// `f'(0)`; differs from the requested slope when the complex shift fired.
    pub h: Complex64,
    /// Set when the requested solution vanished and `y1 + i y2` was used.
    pub complex_shift: bool,
    pub iterations: usize,
}

/// Solves `f'' = q f`, `f(0) = 1`, `f'(0) = h` by Picard iteration on
/// `f = 1 + \int_0^x (h + \int_0^s q f)`.
///
/// If the solution vanishes on the grid and the data are real, retries with
/// `y1 + i y2` where `y2(0) = 0`, `y2'(0) = 1`; two real solutions with unit
/// Wronskian have no common zero.
pub fn particular_solution(q: &SampledFunction, h: Complex64) -> Result<ParticularSolution> {
    let (y1, iterations) = picard(q, Complex64::new(1.0, 0.0), h)?;
    match check_non_vanishing(&y1) {
        Ok(()) => Ok(ParticularSolution {
            f: y1,
            h,
            complex_shift: false,
            iterations,
        }),
        Err(err) if q.is_real() && h.im == 0.0 => {
            log::warn!("particular solution with f'(0) = {h} vanishes ({err}); using y1 + i*y2");
            let (y2, it2) = picard(q, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))?;
            let f = y1.zip_with(&y2, |a, b| a + Complex64::i() * b)?;
            check_non_vanishing(&f)?;
            Ok(ParticularSolution {
                f,
                h: h + Complex64::i(),
                complex_shift: true,
                iterations: iterations.max(it2),
            })
        }
        Err(err) => Err(err),
    }
}

fn picard(q: &SampledFunction, y0: Complex64, y0p: Complex64) -> Result<(SampledFunction, usize)> {
    let mut y = q.map(|x, _| y0 + y0p * x)?;
    for it in 1..=PICARD_MAX_ITER {
        let inner = antiderivative(&q.zip_with(&y, |a, b| a * b)?)?;
        let next = antiderivative(&inner.map(|_, v| v + y0p)?)?.map(|_, v| v + y0)?;
        let change = next.max_diff(&y)?;
        y = next;
        if change <= PICARD_TOL * y.max_abs() {
            return Ok((y, it));
        }
    }
    log::debug!("Picard iteration reached its cap of {PICARD_MAX_ITER} steps");
    Ok((y, PICARD_MAX_ITER))
}

/// Attached to an SPPS sum whose last retained terms are not negligible.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationWarning {
    pub tail_bound: f64,
}

#[derive(Clone, Debug)]
pub struct SppsSolution {
    pub solution: SampledFunction,
    pub warning: Option<TruncationWarning>,
}

/// Constants `(c1, c2)` for which `c1 u1 + c2 u2` has value `v0` and slope
/// `v0p` at the origin, given `u1(0) = 1, u1'(0) = h, u2(0) = 0, u2'(0) = 1`.
pub fn initial_constants(v0: Complex64, v0p: Complex64, h: Complex64) -> (Complex64, Complex64) {
    (v0, v0p - h * v0)
}

/// `c1 u1 + c2 u2` with `u1 = sum lambda^k phi_2k / (2k)!` and
/// `u2 = sum lambda^k phi_{2k+1} / (2k+1)!`, `k = 0..=n_terms`.
pub fn spps_solution(
    basis: &PhiBasis,
    lambda: Complex64,
    u0: Complex64,
    u0p: Complex64,
    n_terms: usize,
) -> Result<SppsSolution> {
    basis.check_order(2 * n_terms + 1)?;
    let (c1, c2) = initial_constants(u0, u0p, basis.h());
    let len = basis.grid().len();
    let mut u1 = vec![Complex64::new(0.0, 0.0); len];
    let mut u2 = vec![Complex64::new(0.0, 0.0); len];
    let mut even = Complex64::new(1.0, 0.0);
    let mut odd = Complex64::new(1.0, 0.0);
    let mut last_term = 0.0;
    for k in 0..=n_terms {
        let (pe, po) = (basis.phi(2 * k).values(), basis.phi(2 * k + 1).values());
        let mut term = 0.0f64;
        for i in 0..len {
            let te = pe[i] * even;
            let to = po[i] * odd;
            u1[i] += te;
            u2[i] += to;
            term = term.max((c1 * te).norm() + (c2 * to).norm());
        }
        last_term = term;
        let kk = k as f64;
        even *= lambda / ((2.0 * kk + 1.0) * (2.0 * kk + 2.0));
        odd *= lambda / ((2.0 * kk + 2.0) * (2.0 * kk + 3.0));
    }
    let values: Vec<Complex64> = u1.iter().zip(&u2).map(|(a, b)| c1 * a + c2 * b).collect();
    let solution = basis.f().with_values(values)?;
    let scale = solution.max_abs().max(f64::MIN_POSITIVE);
    let tail_bound = last_term / scale;
    let warning = if tail_bound > SPPS_TAIL_TOL && lambda != Complex64::new(0.0, 0.0) {
        log::warn!("SPPS sum truncated at {n_terms} terms, relative tail {tail_bound:e}");
        Some(TruncationWarning { tail_bound })
    } else {
        None
    };
    Ok(SppsSolution { solution, warning })
}

/// Coefficients over `phi_0..phi_n` of the solution of `v'' - q v = lambda v`
/// with `v(0) = v0`, `v'(0) = v0p`: `alpha_2k = c1 lambda^k / (2k)!`,
/// `alpha_{2k+1} = c2 lambda^k / (2k+1)!`.
pub fn spectral_taylor_coefficients(
    lambda: Complex64,
    v0: Complex64,
    v0p: Complex64,
    h: Complex64,
    n: usize,
) -> Vec<Complex64> {
    let (c1, c2) = initial_constants(v0, v0p, h);
    let mut out = Vec::with_capacity(n + 1);
    // running lambda^floor(k/2) / k!
    let mut r = Complex64::new(1.0, 0.0);
    for k in 0..=n {
        if k > 0 {
            r /= k as f64;
            if k % 2 == 0 {
                r *= lambda;
            }
        }
        out.push(if k % 2 == 0 { c1 * r } else { c2 * r });
    }
    out
}

/// Smallest `n` with `|lambda|^n b^{2n} / (2n)! < 1e-16`.
pub fn series_terms_needed(lambda: Complex64, b: f64) -> usize {
    let w = lambda.norm() * b * b;
    let mut term = 1.0;
    let mut n = 0;
    while term >= 1e-16 && n < 500 {
        n += 1;
        term *= w / ((2 * n - 1) as f64 * (2 * n) as f64);
    }
    n
}
