//! Transmutation checks: kernel bound, closed-form kernel, `T x^k = phi_k`
//! and `T^{-1} T = id`.

use kleinwave::basis::{build_basis_with_slope, Grid, SampledFunction, DEFAULT_INTERP_ORDER};
use kleinwave::spps::particular_solution;
use kleinwave::transmute::{
    apply_t, apply_t_inverse, bessel_i, bessel_i1_over_z, build_kernel, kernel_bound, KernelGrid,
    DEFAULT_KERNEL_M, DEFAULT_KERNEL_TOL,
};
use num_complex::Complex64;

use crate::error::CliError;

pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tol
    }
}

struct Case {
    label: &'static str,
    q: SampledFunction,
    h: Complex64,
    /// Tolerance for the identities; exact cases get 1e-12.
    tol: f64,
    constant: Option<f64>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn run(grid_n: usize, quick: bool) -> Result<Vec<Check>, CliError> {
    let (m, k_max) = if quick {
        (128, 4)
    } else {
        (DEFAULT_KERNEL_M, 8)
    };
    let grid = Grid::new(1.0, grid_n)?;
    let cases = [
        Case {
            label: "q=0",
            q: SampledFunction::constant(grid, DEFAULT_INTERP_ORDER, c(0.0))?,
            h: c(0.0),
            tol: 1e-12,
            constant: None,
        },
        Case {
            label: "q=9",
            q: SampledFunction::constant(grid, DEFAULT_INTERP_ORDER, c(9.0))?,
            h: c(3.0),
            tol: 1e-4,
            constant: Some(9.0),
        },
        Case {
            label: "q=x^2",
            q: SampledFunction::from_real_fn(grid, DEFAULT_INTERP_ORDER, |x| x * x)?,
            h: c(0.0),
            tol: 1e-4,
            constant: None,
        },
    ];
    let mut checks = Vec::new();
    for case in &cases {
        log::info!("validating {}", case.label);
        let kernel = build_kernel(&case.q, case.h, m, DEFAULT_KERNEL_TOL)?;
        checks.push(Check {
            name: format!("{}: kernel bound, max |K|/bound - 1", case.label),
            value: bound_excess(&kernel, &case.q)?,
            tol: 1e-6,
        });
        if let Some(c2) = case.constant {
            checks.push(Check {
                name: format!("{}: kernel vs Bessel closed form, max rel", case.label),
                value: closed_form_error(&kernel, c2, case.h.re)?,
                tol: 1e-6,
            });
        }
        let ps = particular_solution(&case.q, case.h)?;
        let basis = build_basis_with_slope(&ps.f, ps.h, k_max)?;
        let (mut fwd, mut inv) = (0.0f64, 0.0f64);
        for k in 0..=k_max {
            let xk =
                SampledFunction::from_real_fn(grid, DEFAULT_INTERP_ORDER, |x| x.powi(k as i32))?;
            let tx = apply_t(&kernel, &xk)?;
            fwd = fwd.max(tx.max_diff(basis.phi(k))? / basis.phi(k).max_abs());
            inv = inv.max(apply_t_inverse(&kernel, &tx)?.max_diff(&xk)?);
        }
        checks.push(Check {
            name: format!("{}: T x^k vs phi_k (k <= {k_max}), max rel", case.label),
            value: fwd,
            tol: case.tol,
        });
        checks.push(Check {
            name: format!("{}: T^-1 T x^k vs x^k (k <= {k_max}), max abs", case.label),
            value: inv,
            tol: case.tol,
        });
    }
    Ok(checks)
}

/// Largest relative excess of `|K|` over its bound, clipped at 0.
fn bound_excess(kernel: &KernelGrid, q: &SampledFunction) -> Result<f64, CliError> {
    let cmax = q.max_abs();
    let mut worst = 0.0f64;
    for (i, j) in kernel.diamond_nodes() {
        let (u, v) = (i as f64 * kernel.spacing(), j as f64 * kernel.spacing());
        let bound = kernel_bound(cmax, kernel.h().norm(), u + v, u - v)?;
        let got = kernel.node(i, j)?.norm();
        if got > 0.0 {
            worst = worst.max(got / bound - 1.0);
        }
    }
    Ok(worst)
}

/// Max relative error against `(h/2) I0(z) + (c2/2)(x + t) I1(z)/z` on
/// `0 <= t <= x`.
fn closed_form_error(kernel: &KernelGrid, c2: f64, h: f64) -> Result<f64, CliError> {
    let mut worst = 0.0f64;
    for (i, j) in kernel.diamond_nodes() {
        if j < 0 || j > i {
            continue;
        }
        let (u, v) = (i as f64 * kernel.spacing(), j as f64 * kernel.spacing());
        let (x, t) = (u + v, u - v);
        let z = (c2 * (x * x - t * t)).max(0.0).sqrt();
        let want = 0.5 * h * bessel_i(0, z)? + 0.5 * c2 * (x + t) * bessel_i1_over_z(z)?;
        worst = worst.max((kernel.node(i, j)? - want).norm() / want.abs().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}
