//! Discretized minimax as a linear program.
//!
//! The primal problem is `min E` subject to `E >= Re(e^{i theta} r(x_j))` for
//! every sample `x_j` and angle `theta`, where `r = g - sum c_k phi_k`. Real
//! data use the two angles `0, pi`; complex data a regular `m`-gon. The
//! simplex runs on the dual, whose row count is the number of unknowns, and
//! `E, c` are read back from the optimal multipliers.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{lsq_approx, simplex, ApproxResult};
use crate::basis::{FPolynomial, PhiBasis, SampledFunction};
use crate::error::{Error, Result};

pub const DEFAULT_LP_GRID_N: usize = 1001;
pub const DEFAULT_LP_ANGLES: usize = 16;

/// `grid_n` node indices spread evenly over the grid, endpoints included.
fn sample_indices(len: usize, grid_n: usize) -> Vec<usize> {
    if grid_n >= len {
        return (0..len).collect();
    }
    let mut idx: Vec<usize> = (0..grid_n)
        .map(|i| ((i as f64) * (len - 1) as f64 / (grid_n - 1) as f64).round() as usize)
        .collect();
    idx.dedup();
    idx
}

pub fn minimax_lp(
    g: &SampledFunction,
    basis: &Arc<PhiBasis>,
    n: usize,
    grid_n: usize,
    angles_m: usize,
) -> Result<ApproxResult> {
    basis.check_order(n)?;
    g.check_same_grid(basis.f())?;
    if grid_n < n + 2 {
        return Err(Error::invalid(format!(
            "LP grid of {grid_n} points cannot determine degree {n}"
        )));
    }
    let real = basis.is_real() && g.is_real();
    if !real && angles_m < 3 {
        return Err(Error::invalid(format!(
            "complex linearization needs at least 3 angles, got {angles_m}"
        )));
    }
    let samples = sample_indices(basis.grid().len(), grid_n);
    let angles: Vec<Complex64> = if real {
        vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]
    } else {
        (0..angles_m)
            .map(|l| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / angles_m as f64)
            })
            .collect()
    };
    // The LP fits the least-squares residual, so its data and optimum are
    // both of order one after scaling and the simplex tolerances act
    // relative to the deviation rather than to max |g|.
    let base = lsq_approx(g, basis, n)?;
    let target = g.zip_with(&base.sample()?, |a, b| a - b)?;
    let g_scale = samples
        .iter()
        .map(|&i| target.values()[i].norm())
        .fold(0.0, f64::max);
    if g_scale <= 1e-15 * g.max_abs() {
        let d = base.sample()?.max_diff(g)?;
        return Ok(ApproxResult {
            poly: base,
            e: Complex64::new(0.0, 0.0),
            d,
            iterations: 0,
            history: vec![(0.0, d)],
            reference: None,
        });
    }
    let col_scale: Vec<f64> = (0..=n)
        .map(|k| {
            let m = samples
                .iter()
                .map(|&i| basis.phi(k).values()[i].norm())
                .fold(0.0, f64::max);
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();

    let unknowns = if real { n + 1 } else { 2 * (n + 1) };
    let rows = unknowns + 1;
    let cols = samples.len() * angles.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut cost = Vec::with_capacity(cols);
    let mut col = 0;
    for &i in &samples {
        for w in &angles {
            a[(0, col)] = 1.0;
            for k in 0..=n {
                let v = w * basis.phi(k).values()[i] * col_scale[k];
                a[(1 + k, col)] = v.re;
                if !real {
                    a[(2 + n + k, col)] = -v.im;
                }
            }
            cost.push((w * target.values()[i]).re / g_scale);
            col += 1;
        }
    }
    let mut rhs = vec![0.0; rows];
    rhs[0] = 1.0;
    let sol = simplex::maximize(&a, &rhs, &cost)?;
    let pi = &sol.duals;
    let e = pi[0] * g_scale;
    let coeffs: Vec<Complex64> = (0..=n)
        .map(|k| {
            let re = pi[1 + k];
            let im = if real { 0.0 } else { pi[2 + n + k] };
            base.coeffs()[k] + Complex64::new(re, im) * (col_scale[k] * g_scale)
        })
        .collect();
    let poly = FPolynomial::new(basis.clone(), coeffs)?;
    let d = poly.sample()?.max_diff(g)?;
    log::debug!(
        "LP minimax degree {n}: E = {e:e}, D = {d:e}, {} pivots on {rows}x{cols}",
        sol.iterations
    );
    Ok(ApproxResult {
        poly,
        e: Complex64::new(e, 0.0),
        d,
        iterations: sol.iterations,
        history: vec![(e.abs(), d)],
        reference: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, Grid, DEFAULT_INTERP_ORDER};

    fn unit_basis(b: f64, n: usize, intervals: usize) -> Arc<PhiBasis> {
        let f = SampledFunction::constant(
            Grid::new(b, intervals).unwrap(),
            DEFAULT_INTERP_ORDER,
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        Arc::new(build_basis(&f, n).unwrap())
    }

    #[test]
    fn indices_cover_endpoints() {
        assert_eq!(sample_indices(11, 3), vec![0, 5, 10]);
        assert_eq!(sample_indices(5, 9), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn real_span_member() {
        let basis = unit_basis(1.0, 3, 600);
        let g = SampledFunction::from_real_fn(*basis.grid(), DEFAULT_INTERP_ORDER, |x| {
            2.0 - x + 0.3 * x * x * x
        })
        .unwrap();
        let r = minimax_lp(&g, &basis, 3, 301, DEFAULT_LP_ANGLES).unwrap();
        assert!(r.e.re <= 1e-10);
        assert!(r.d <= 1e-10);
    }

    #[test]
    fn square_minimax() {
        let basis = unit_basis(1.0, 1, 3000);
        let g =
            SampledFunction::from_real_fn(*basis.grid(), DEFAULT_INTERP_ORDER, |x| x * x).unwrap();
        let r = minimax_lp(&g, &basis, 1, DEFAULT_LP_GRID_N, DEFAULT_LP_ANGLES).unwrap();
        assert!((r.e.re - 0.5).abs() < 1e-12);
        assert!((r.d - 0.5).abs() < 1e-12);
        assert!((r.poly.coeffs()[0].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn complex_data_within_polygon_factor() {
        // e^{i pi x} traces the unit circle, so the best constant is 0
        // with deviation 1
        let basis = unit_basis(1.0, 0, 1000);
        let g = SampledFunction::from_fn(*basis.grid(), DEFAULT_INTERP_ORDER, |x| {
            Complex64::from_polar(1.0, std::f64::consts::PI * x)
        })
        .unwrap();
        let r = minimax_lp(&g, &basis, 0, 1001, DEFAULT_LP_ANGLES).unwrap();
        let inflation = 1.0 / (std::f64::consts::PI / DEFAULT_LP_ANGLES as f64).cos();
        assert!(r.d >= 1.0 - 1e-9);
        assert!(r.d <= inflation + 1e-9);
        assert!(r.e.re <= r.d + 1e-12);
    }

    #[test]
    fn complex_polynomial_recovered() {
        let basis = unit_basis(1.0, 2, 600);
        let want = [
            Complex64::new(1.0, -1.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(-0.5, 0.0),
        ];
        let g = SampledFunction::from_fn(*basis.grid(), DEFAULT_INTERP_ORDER, |x| {
            want.iter()
                .enumerate()
                .map(|(k, a)| a * x.powi(k as i32))
                .sum()
        })
        .unwrap();
        let r = minimax_lp(&g, &basis, 2, 201, 8).unwrap();
        assert!(r.d <= 1e-10, "{}", r.d);
    }

    #[test]
    fn too_few_points_rejected() {
        let basis = unit_basis(1.0, 4, 100);
        let g = SampledFunction::constant(
            *basis.grid(),
            DEFAULT_INTERP_ORDER,
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        assert!(minimax_lp(&g, &basis, 4, 5, 16).is_err());
    }
}
