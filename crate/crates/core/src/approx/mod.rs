//! Best uniform approximation of sampled data by f-polynomials.
//!
//! Real data go through the Remez exchange; complex data through a
//! discretized linear program. Least squares seeds the initial reference.

mod lp;
mod remez;
pub mod simplex;

pub use lp::{minimax_lp, DEFAULT_LP_ANGLES, DEFAULT_LP_GRID_N};
pub use remez::{remez, Exchange, RemezOptions, DEFAULT_REMEZ_MAX_ITER, DEFAULT_REMEZ_TOL};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::basis::{FPolynomial, PhiBasis, SampledFunction};
use crate::error::{Error, Result};

/// Relative residual accepted from the dense Tchebyshev solve.
const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

/// `n + 2` strictly increasing abscissae.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSet {
    points: Vec<f64>,
}

impl ReferenceSet {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("a reference set needs at least two points"));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("reference points must be finite"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "reference points must be strictly increasing: {points:?}"
            )));
        }
        Ok(ReferenceSet { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Degree `n` served by this set, `len - 2`.
    pub fn degree(&self) -> usize {
        self.points.len() - 2
    }
}

/// Outcome of a best-approximation run.
#[derive(Clone, Debug)]
pub struct ApproxResult {
    pub poly: FPolynomial,
    /// Levelled error on the final reference (Remez) or LP optimum.
    pub e: Complex64,
    /// Max modulus of the residual over the whole grid.
    pub d: f64,
    pub iterations: usize,
    /// `(|E_k|, D_k)` per iteration.
    pub history: Vec<(f64, f64)>,
    pub reference: Option<ReferenceSet>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    Chebyshev,
    LsqExtrema,
}

fn require_real(basis: &PhiBasis, g: Option<&SampledFunction>) -> Result<()> {
    if !basis.is_real() || g.is_some_and(|g| !g.is_real()) {
        return Err(Error::ComplexData);
    }
    Ok(())
}

/// Solves `sum_k c_k phi_k(x_j) + (-1)^j E = g(x_j)`, `j = 0..=n+1`.
pub fn tchebyshev_interpolation(
    g_values: &[Complex64],
    refset: &ReferenceSet,
    basis: &PhiBasis,
    n: usize,
) -> Result<(Vec<Complex64>, Complex64)> {
    let pts = refset.points();
    if pts.len() != n + 2 || g_values.len() != n + 2 {
        return Err(Error::invalid(format!(
            "degree {n} needs {} reference points and values, got {} and {}",
            n + 2,
            pts.len(),
            g_values.len()
        )));
    }
    require_real(basis, None)?;
    if g_values
        .iter()
        .any(|v| v.im != 0.0 && v.im.abs() > 1e-13 * v.norm())
    {
        return Err(Error::ComplexData);
    }
    let size = n + 2;
    let mut a = DMatrix::<f64>::zeros(size, size);
    for (j, &x) in pts.iter().enumerate() {
        let phi = basis.phi_at(x, n)?;
        for (k, p) in phi.iter().enumerate() {
            a[(j, k)] = p.re;
        }
        a[(j, n + 1)] = if j % 2 == 0 { 1.0 } else { -1.0 };
    }
    let rhs = DVector::from_iterator(size, g_values.iter().map(|v| v.re));
    let sol = solve_equilibrated(&a, &rhs)?;
    let coeffs = sol
        .rows(0, n + 1)
        .iter()
        .map(|&c| Complex64::new(c, 0.0))
        .collect();
    Ok((coeffs, Complex64::new(sol[n + 1], 0.0)))
}

/// Dense LU solve with column equilibration and one refinement step.
fn solve_equilibrated(a: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let scales: Vec<f64> = a
        .column_iter()
        .map(|c| {
            let m = c.amax();
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = a.clone();
    for (k, s) in scales.iter().enumerate() {
        scaled.column_mut(k).scale_mut(*s);
    }
    let lu = scaled.clone().lu();
    let mut y = lu
        .solve(rhs)
        .ok_or_else(|| Error::HaarViolation("singular interpolation system".into()))?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::HaarViolation("singular interpolation system".into()));
    }
    let r = rhs - &scaled * &y;
    if let Some(dy) = lu.solve(&r) {
        y += dy;
    }
    let r = rhs - &scaled * &y;
    let scale = rhs.amax() + scaled.abs().row_sum().amax() * y.amax();
    if r.amax() > SOLVE_RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE) {
        log::warn!(
            "interpolation solve residual {:e} exceeds {SOLVE_RESIDUAL_TOL:e} relative",
            r.amax() / scale
        );
    }
    Ok(DVector::from_iterator(
        y.len(),
        y.iter().zip(&scales).map(|(v, s)| v * s),
    ))
}

/// Chebyshev extremal points `x_k = -b cos(k pi / (n + 1))`.
pub fn chebyshev_reference(b: f64, n: usize) -> ReferenceSet {
    let m = (n + 1) as f64;
    // sin form keeps the points exactly antisymmetric
    let points = (0..n + 2)
        .map(|k| b * (std::f64::consts::PI * (2.0 * k as f64 - m) / (2.0 * m)).sin())
        .collect();
    ReferenceSet { points }
}

/// Initial reference for the exchange.
pub fn initial_reference(
    kind: ReferenceKind,
    basis: &Arc<PhiBasis>,
    n: usize,
    g: &SampledFunction,
) -> Result<ReferenceSet> {
    match kind {
        ReferenceKind::Chebyshev => Ok(chebyshev_reference(basis.b(), n)),
        ReferenceKind::LsqExtrema => {
            require_real(basis, Some(g))?;
            let fit = lsq_approx(g, basis, n)?;
            let residual: Vec<f64> = g
                .values()
                .iter()
                .zip(fit.sample()?.values())
                .map(|(a, b)| a.re - b.re)
                .collect();
            let zero = 1e-13 * g.max_abs().max(f64::MIN_POSITIVE);
            let extrema = alternating_extrema(&residual, zero);
            match select_window(&extrema, &residual, n + 2) {
                Some(idx) => {
                    let nodes = basis.grid();
                    ReferenceSet::new(idx.iter().map(|&i| nodes.node(i)).collect())
                }
                None => {
                    log::warn!(
                        "least-squares residual has {} alternating extrema, need {}; \
                         using Chebyshev points",
                        extrema.len(),
                        n + 2
                    );
                    Ok(chebyshev_reference(basis.b(), n))
                }
            }
        }
    }
}

/// Index of the largest `|r|` in each maximal run of one sign; samples with
/// `|r| <= zero` are skipped.
pub(crate) fn alternating_extrema(r: &[f64], zero: f64) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut current: Option<(f64, usize)> = None;
    for (i, &v) in r.iter().enumerate() {
        if v.abs() <= zero {
            continue;
        }
        let s = v.signum();
        match current {
            Some((cs, best)) if cs == s => {
                if v.abs() > r[best].abs() {
                    current = Some((s, i));
                }
            }
            Some((_, best)) => {
                out.push(best);
                current = Some((s, i));
            }
            None => current = Some((s, i)),
        }
    }
    if let Some((_, best)) = current {
        out.push(best);
    }
    out
}

/// Reduces an alternating sequence to `want` entries. The smallest entry is
/// removed together with the smaller of its two (now equal-signed)
/// neighbours; near the target count the smaller end is dropped instead.
/// The global maximum always survives.
pub(crate) fn select_window(extrema: &[usize], r: &[f64], want: usize) -> Option<Vec<usize>> {
    if extrema.len() < want {
        return None;
    }
    let mut kept = extrema.to_vec();
    let mag = |i: usize| r[i].abs();
    while kept.len() > want {
        let last = kept.len() - 1;
        if kept.len() - want == 1 {
            if mag(kept[0]) <= mag(kept[last]) {
                kept.remove(0);
            } else {
                kept.pop();
            }
            continue;
        }
        let p = (0..kept.len())
            .min_by(|&a, &b| mag(kept[a]).total_cmp(&mag(kept[b])))
            .expect("non-empty");
        kept.remove(p);
        if p > 0 && p < last {
            let drop = if mag(kept[p - 1]) <= mag(kept[p]) {
                p - 1
            } else {
                p
            };
            kept.remove(drop);
        }
    }
    Some(kept)
}

/// Discrete least squares over all grid nodes by Householder QR.
pub fn lsq_approx(g: &SampledFunction, basis: &Arc<PhiBasis>, n: usize) -> Result<FPolynomial> {
    basis.check_order(n)?;
    g.check_same_grid(basis.f())?;
    let rows = g.values().len();
    let mut a = DMatrix::<Complex64>::zeros(rows, n + 1);
    let mut scales = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let col = basis.phi(k).values();
        let m = basis.phi(k).max_abs();
        let s = if m > 0.0 { 1.0 / m } else { 1.0 };
        scales.push(s);
        for (i, v) in col.iter().enumerate() {
            a[(i, k)] = v * s;
        }
    }
    let rhs = DVector::from_column_slice(g.values());
    let qr = a.qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().map(|v| v.norm()).fold(0.0, f64::max);
    if r.diagonal().iter().any(|v| v.norm() <= 1e-13 * diag_max) {
        log::warn!("least-squares matrix is rank deficient at degree {n}");
    }
    let qtb = qr.q().adjoint() * rhs;
    let y = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::HaarViolation("rank-deficient least-squares system".into()))?;
    let coeffs = y.iter().zip(&scales).map(|(v, s)| v * *s).collect();
    FPolynomial::new(basis.clone(), coeffs)
}

/// Real parts of `phi_0..phi_n` at every node, row-major by node.
pub(crate) fn basis_matrix_real(basis: &PhiBasis, n: usize) -> Vec<Vec<f64>> {
    let len = basis.grid().len();
    (0..len)
        .map(|i| (0..=n).map(|k| basis.phi(k).values()[i].re).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, Grid, DEFAULT_INTERP_ORDER};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn unit_basis(b: f64, n: usize, intervals: usize) -> Arc<PhiBasis> {
        let f = SampledFunction::constant(
            Grid::new(b, intervals).unwrap(),
            DEFAULT_INTERP_ORDER,
            c(1.0),
        )
        .unwrap();
        Arc::new(build_basis(&f, n).unwrap())
    }

    #[test]
    fn two_point_system() {
        let basis = unit_basis(1.0, 0, 100);
        let refset = ReferenceSet::new(vec![-1.0, 1.0]).unwrap();
        let (coeffs, e) = tchebyshev_interpolation(&[c(0.0), c(2.0)], &refset, &basis, 0).unwrap();
        assert!((coeffs[0] - c(1.0)).norm() < 1e-14);
        assert!((e - c(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn square_on_three_points() {
        let basis = unit_basis(1.0, 1, 100);
        let refset = ReferenceSet::new(vec![-1.0, 0.0, 1.0]).unwrap();
        let (coeffs, e) =
            tchebyshev_interpolation(&[c(1.0), c(0.0), c(1.0)], &refset, &basis, 1).unwrap();
        assert!((coeffs[0] - c(0.5)).norm() < 1e-14);
        assert!(coeffs[1].norm() < 1e-14);
        assert!((e - c(0.5)).norm() < 1e-14);
        // brute force: the best constant-plus-line on {-1, 0, 1} for x^2
        let mut best = f64::INFINITY;
        for a in 0..=200 {
            for s in 0..=200 {
                let (c0, c1) = (a as f64 / 200.0, (s as f64 - 100.0) / 200.0);
                let dev = [-1.0f64, 0.0, 1.0]
                    .iter()
                    .map(|x| (x * x - c0 - c1 * x).abs())
                    .fold(0.0, f64::max);
                best = best.min(dev);
            }
        }
        assert!((best - 0.5).abs() < 1e-12);
    }

    #[test]
    fn span_member_is_reproduced() {
        let basis = unit_basis(2.0, 4, 400);
        let coeffs = [0.3, -1.0, 0.25, 0.5, -0.125];
        let refset = chebyshev_reference(2.0, 4);
        let g: Vec<Complex64> = refset
            .points()
            .iter()
            .map(|&x| {
                c(coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * x.powi(k as i32))
                    .sum())
            })
            .collect();
        let (got, e) = tchebyshev_interpolation(&g, &refset, &basis, 4).unwrap();
        assert!(e.norm() < 1e-12);
        for (a, b) in got.iter().zip(coeffs) {
            assert!((a.re - b).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_sizes_and_order_rejected() {
        let basis = unit_basis(1.0, 2, 100);
        let refset = ReferenceSet::new(vec![-1.0, 0.0, 1.0]).unwrap();
        assert!(tchebyshev_interpolation(&[c(0.0); 3], &refset, &basis, 2).is_err());
        assert!(ReferenceSet::new(vec![0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn chebyshev_points() {
        assert_eq!(chebyshev_reference(1.0, 1).points(), &[-1.0, 0.0, 1.0]);
        let p = chebyshev_reference(2.0, 2);
        for (a, b) in p.points().iter().zip([-2.0, -1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn lsq_extrema_falls_back_on_exact_fit() {
        let basis = unit_basis(1.0, 2, 300);
        let g = SampledFunction::from_real_fn(*basis.grid(), DEFAULT_INTERP_ORDER, |x| 1.0 - x * x)
            .unwrap();
        let r = initial_reference(ReferenceKind::LsqExtrema, &basis, 2, &g).unwrap();
        assert_eq!(r, chebyshev_reference(1.0, 2));
    }

    #[test]
    fn lsq_extrema_alternate() {
        let basis = unit_basis(1.0, 3, 2000);
        let g =
            SampledFunction::from_real_fn(*basis.grid(), DEFAULT_INTERP_ORDER, |x| (3.0 * x).exp())
                .unwrap();
        let r = initial_reference(ReferenceKind::LsqExtrema, &basis, 3, &g).unwrap();
        assert_eq!(r.points().len(), 5);
        assert_eq!(r.points()[0], -1.0);
        assert_eq!(r.points()[4], 1.0);
    }

    #[test]
    fn least_squares_square() {
        let basis = unit_basis(1.0, 1, 3000);
        let g =
            SampledFunction::from_real_fn(*basis.grid(), DEFAULT_INTERP_ORDER, |x| x * x).unwrap();
        let p = lsq_approx(&g, &basis, 1).unwrap();
        assert!((p.coeffs()[0].re - 1.0 / 3.0).abs() < 1e-3);
        assert!(p.coeffs()[1].norm() < 1e-12);
        // residual orthogonal to the span
        let r = g.zip_with(&p.sample().unwrap(), |a, b| a - b).unwrap();
        for k in 0..=1 {
            let dot: Complex64 = r
                .values()
                .iter()
                .zip(basis.phi(k).values())
                .map(|(a, b)| a * b.conj())
                .sum();
            assert!(dot.norm() <= 1e-10 * g.values().len() as f64);
        }
    }

    #[test]
    fn least_squares_recovers_span_member_with_complex_coefficients() {
        let basis = unit_basis(1.0, 3, 600);
        let want = [
            c(1.0),
            Complex64::new(0.0, 2.0),
            c(-0.5),
            Complex64::new(0.25, 0.25),
        ];
        let g = SampledFunction::from_fn(*basis.grid(), DEFAULT_INTERP_ORDER, |x| {
            want.iter()
                .enumerate()
                .map(|(k, a)| a * x.powi(k as i32))
                .sum()
        })
        .unwrap();
        let p = lsq_approx(&g, &basis, 3).unwrap();
        for (a, b) in p.coeffs().iter().zip(want) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn extrema_runs() {
        let r = [1.0, 2.0, -1.0, -3.0, 0.0, 0.5, 0.2, -0.1];
        assert_eq!(alternating_extrema(&r, 0.0), vec![1, 3, 5, 7]);
        assert_eq!(select_window(&[1, 3, 5, 7], &r, 3), Some(vec![1, 3, 5]));
        assert_eq!(select_window(&[1, 3], &r, 3), None);
        // a small interior pair goes before the larger ends
        let r = [1.0, -0.01, 0.02, -2.0, 3.0, -1.5];
        assert_eq!(
            select_window(&[0, 1, 2, 3, 4, 5], &r, 4),
            Some(vec![0, 3, 4, 5])
        );
    }
}
