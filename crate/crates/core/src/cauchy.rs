//! Approximate solutions of the Cauchy problem
//! `u_xx - u_tt - q(x) u = 0`, `u(x, 0) = g(x)`, `u_t(x, 0) = h(x)`
//! as finite sums of generalized wave polynomials.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::approx::{
    minimax_lp, remez, ApproxResult, RemezOptions, DEFAULT_LP_ANGLES, DEFAULT_LP_GRID_N,
};
use crate::basis::{build_basis_with_slope, FPolynomial, PhiBasis, SampledFunction};
use crate::error::{Error, Result};
use crate::spps::{particular_solution, spectral_taylor_coefficients};
use crate::transmute::norm_bound;
use crate::wavepoly::{gen_wave_poly_at, max_phi_index};

/// Mesh step used when none is given, as a fraction of `b`.
pub const DEFAULT_MESH_DIVISIONS: usize = 200;

/// Exact solution used for validation.
pub type ExactSolution = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// Data function `v` known to solve `v'' - q v = lambda v` with the given
/// value and slope at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralData {
    pub lambda: Complex64,
    pub v0: Complex64,
    pub v0p: Complex64,
}

#[derive(Clone)]
pub struct CauchyProblem {
    pub q: SampledFunction,
    pub g: SampledFunction,
    pub h_data: SampledFunction,
    /// Requested `f'(0)` for the particular solution.
    pub slope: Complex64,
    pub spectral_g: Option<SpectralData>,
    pub spectral_h: Option<SpectralData>,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for CauchyProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CauchyProblem")
            .field("b", &self.b())
            .field("nodes", &self.q.grid().len())
            .field("slope", &self.slope)
            .field("spectral_g", &self.spectral_g)
            .field("spectral_h", &self.spectral_h)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl CauchyProblem {
    pub fn new(q: SampledFunction, g: SampledFunction, h_data: SampledFunction) -> Result<Self> {
        g.check_same_grid(&q)?;
        h_data.check_same_grid(&q)?;
        Ok(CauchyProblem {
            q,
            g,
            h_data,
            slope: Complex64::new(0.0, 0.0),
            spectral_g: None,
            spectral_h: None,
            exact: None,
        })
    }

    pub fn with_slope(mut self, slope: Complex64) -> Self {
        self.slope = slope;
        self
    }

    pub fn with_spectral(mut self, g: SpectralData, h: SpectralData) -> Self {
        self.spectral_g = Some(g);
        self.spectral_h = Some(h);
        self
    }

    pub fn with_exact(mut self, exact: ExactSolution) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn b(&self) -> f64 {
        self.q.b()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Truncated generalized Taylor series from declared spectral data.
    Taylor,
    Remez,
    Lp,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "taylor" => Ok(Strategy::Taylor),
            "remez" => Ok(Strategy::Remez),
            "lp" => Ok(Strategy::Lp),
            other => Err(Error::Configuration(format!(
                "unknown strategy {other:?} (expected taylor, remez or lp)"
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Taylor => "taylor",
            Strategy::Remez => "remez",
            Strategy::Lp => "lp",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub strategy: Strategy,
    /// Order of the f-polynomial for `g`.
    pub n_g: usize,
    /// Order of the f-polynomial for `h`.
    pub n_h: usize,
    pub remez: RemezOptions,
    /// Propagate Remez stagnation instead of keeping its best iterate.
    pub strict: bool,
    pub lp_grid_n: usize,
    pub lp_angles: usize,
}

impl SolveOptions {
    /// `P_n` for `g` and `Q_{n-1}` for `h`.
    pub fn paired(strategy: Strategy, n: usize) -> Self {
        Self::orders(strategy, n, n.saturating_sub(1))
    }

    pub fn orders(strategy: Strategy, n_g: usize, n_h: usize) -> Self {
        SolveOptions {
            strategy,
            n_g,
            n_h,
            remez: RemezOptions::default(),
            strict: false,
            lp_grid_n: DEFAULT_LP_GRID_N,
            lp_angles: DEFAULT_LP_ANGLES,
        }
    }
}

/// Outcome of approximating one data function.
#[derive(Clone, Debug)]
pub struct DataFit {
    pub poly: FPolynomial,
    /// Max deviation from the data over the grid.
    pub max_error: f64,
    /// False when the Remez exchange stopped short of its tolerance.
    pub converged: bool,
    pub iterations: usize,
}

impl DataFit {
    /// Pointwise `|data - poly|` over the grid.
    pub fn errors(&self, data: &SampledFunction) -> Result<Vec<f64>> {
        let p = self.poly.sample()?;
        Ok(p.values()
            .iter()
            .zip(data.values())
            .map(|(a, b)| (a - b).norm())
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorCertificate {
    pub eps1: f64,
    pub eps2: f64,
    pub norm_t_bound: f64,
    pub norm_t_inv_bound: f64,
    pub total: f64,
}

/// `||T|| ||T^{-1}|| (eps1 + eps2 b)` with both norms bounded by
/// [`norm_bound`].
pub fn error_certificate(
    eps1: f64,
    eps2: f64,
    q: &SampledFunction,
    h: Complex64,
    b: f64,
) -> Result<ErrorCertificate> {
    if !(eps1 >= 0.0 && eps2 >= 0.0) {
        return Err(Error::invalid(format!(
            "data errors must be nonnegative, got {eps1}, {eps2}"
        )));
    }
    let bound = norm_bound(q, h, b)?;
    Ok(ErrorCertificate {
        eps1,
        eps2,
        norm_t_bound: bound,
        norm_t_inv_bound: bound,
        total: bound * bound * (eps1 + eps2 * b),
    })
}

/// `a_0 = alpha_0`, `a_{2m-1} = alpha_m`, `a_{2(m+1)} = beta_m / (m + 1)`.
pub fn assemble_coefficients(alpha: &[Complex64], beta: &[Complex64]) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let len_a = if alpha.len() > 1 {
        2 * (alpha.len() - 1) + 1
    } else {
        alpha.len()
    };
    let len_b = if beta.is_empty() {
        0
    } else {
        2 * beta.len() + 1
    };
    let mut a = vec![zero; len_a.max(len_b)];
    if let Some(&a0) = alpha.first() {
        a[0] = a0;
    }
    for (m, &v) in alpha.iter().enumerate().skip(1) {
        a[2 * m - 1] = v;
    }
    for (m, &v) in beta.iter().enumerate() {
        a[2 * (m + 1)] = v / (m as f64 + 1.0);
    }
    a
}

#[derive(Clone, Debug)]
pub struct GeneralizedWaveSolution {
    pub basis: Arc<PhiBasis>,
    pub a: Vec<Complex64>,
    pub g_fit: DataFit,
    pub h_fit: DataFit,
    pub certificate: ErrorCertificate,
    /// Set when the particular solution needed the complex shift.
    pub complex_shift: bool,
    q: SampledFunction,
}

impl GeneralizedWaveSolution {
    /// Builds a solution from given f-polynomial coefficients of the data
    /// approximants.
    pub fn from_coefficients(
        basis: Arc<PhiBasis>,
        q: SampledFunction,
        alpha: &[Complex64],
        beta: &[Complex64],
        g: &SampledFunction,
        h_data: &SampledFunction,
    ) -> Result<Self> {
        let g_fit = exact_fit(&basis, alpha, g)?;
        let h_fit = exact_fit(&basis, beta, h_data)?;
        let certificate =
            error_certificate(g_fit.max_error, h_fit.max_error, &q, basis.h(), basis.b())?;
        Ok(GeneralizedWaveSolution {
            a: assemble_coefficients(alpha, beta),
            basis,
            g_fit,
            h_fit,
            certificate,
            complex_shift: false,
            q,
        })
    }

    pub fn b(&self) -> f64 {
        self.basis.b()
    }

    pub fn q(&self) -> &SampledFunction {
        &self.q
    }

    /// Highest `phi` index any nonzero term reaches.
    fn top_phi(&self) -> usize {
        self.a
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
            .filter_map(|(m, _)| max_phi_index(m))
            .max()
            .unwrap_or(0)
    }

    /// `u_N(x, t)` for each `t`, sharing one interpolation of the basis at `x`.
    pub fn eval_column(&self, x: f64, ts: &[f64]) -> Result<Vec<Complex64>> {
        let phi = self.basis.phi_at(x, self.top_phi())?;
        Ok(ts
            .iter()
            .map(|&t| {
                self.a
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
                    .map(|(m, a)| a * gen_wave_poly_at(&phi, m, t))
                    .sum()
            })
            .collect())
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<Complex64> {
        Ok(self.eval_column(x, &[t])?[0])
    }

    /// `partial_t u_N(x, 0)`: only `u_{2m}` contribute, with `m phi_{m-1}`.
    pub fn eval_dt0(&self, x: f64) -> Result<Complex64> {
        let phi = self.basis.phi_at(x, self.top_phi())?;
        Ok(self
            .a
            .iter()
            .enumerate()
            .skip(2)
            .step_by(2)
            .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
            .map(|(m, a)| a * phi[m / 2 - 1] * (m / 2) as f64)
            .sum())
    }
}

fn exact_fit(
    basis: &Arc<PhiBasis>,
    coeffs: &[Complex64],
    data: &SampledFunction,
) -> Result<DataFit> {
    let coeffs = if coeffs.is_empty() {
        vec![Complex64::new(0.0, 0.0)]
    } else {
        coeffs.to_vec()
    };
    let poly = FPolynomial::new(basis.clone(), coeffs)?;
    let max_error = poly.sample()?.max_diff(data)?;
    Ok(DataFit {
        poly,
        max_error,
        converged: true,
        iterations: 0,
    })
}

/// Builds `f` and the basis from `q`, approximates the data and assembles
/// `u_N = sum a_n u_n`.
pub fn solve(problem: &CauchyProblem, opts: &SolveOptions) -> Result<GeneralizedWaveSolution> {
    let ps = particular_solution(&problem.q, problem.slope)?;
    let order = opts.n_g.max(opts.n_h);
    let basis = Arc::new(build_basis_with_slope(&ps.f, ps.h, order)?);
    let mut sol = solve_with_basis(problem, basis, opts)?;
    sol.complex_shift = ps.complex_shift;
    Ok(sol)
}

/// [`solve`] over a prebuilt basis, which must be at least of order
/// `max(n_g, n_h)`.
pub fn solve_with_basis(
    problem: &CauchyProblem,
    basis: Arc<PhiBasis>,
    opts: &SolveOptions,
) -> Result<GeneralizedWaveSolution> {
    problem.g.check_same_grid(basis.f())?;
    let g_fit = fit(&problem.g, problem.spectral_g, &basis, opts.n_g, opts, "g")?;
    let h_fit = fit(
        &problem.h_data,
        problem.spectral_h,
        &basis,
        opts.n_h,
        opts,
        "h",
    )?;
    let certificate = error_certificate(
        g_fit.max_error,
        h_fit.max_error,
        &problem.q,
        basis.h(),
        basis.b(),
    )?;
    log::info!(
        "{} fit: eps(g) = {:e} at n = {}, eps(h) = {:e} at n = {}, certificate {:e}",
        opts.strategy,
        g_fit.max_error,
        opts.n_g,
        h_fit.max_error,
        opts.n_h,
        certificate.total
    );
    Ok(GeneralizedWaveSolution {
        a: assemble_coefficients(g_fit.poly.coeffs(), h_fit.poly.coeffs()),
        basis,
        g_fit,
        h_fit,
        certificate,
        complex_shift: false,
        q: problem.q.clone(),
    })
}

fn fit(
    data: &SampledFunction,
    spectral: Option<SpectralData>,
    basis: &Arc<PhiBasis>,
    n: usize,
    opts: &SolveOptions,
    name: &str,
) -> Result<DataFit> {
    let result = match opts.strategy {
        Strategy::Taylor => {
            let s = spectral.ok_or_else(|| {
                Error::Configuration(format!(
                    "taylor strategy needs spectral data (lambda, v(0), v'(0)) for {name}"
                ))
            })?;
            let coeffs = spectral_taylor_coefficients(s.lambda, s.v0, s.v0p, basis.h(), n);
            return exact_fit(basis, &coeffs, data);
        }
        Strategy::Remez => match remez(data, basis, n, &opts.remez) {
            Ok(r) => (r, true),
            Err(Error::Stagnation { best, .. } | Error::IterationCap { best, .. })
                if !opts.strict =>
            {
                log::warn!(
                    "Remez for {name} at n = {n} stopped short of its tolerance; keeping the best iterate (D = {:e})",
                    best.d
                );
                (*best, false)
            }
            Err(e) => return Err(e),
        },
        Strategy::Lp => (
            minimax_lp(data, basis, n, opts.lp_grid_n, opts.lp_angles)?,
            true,
        ),
    };
    let (r, converged): (ApproxResult, bool) = result;
    Ok(DataFit {
        poly: r.poly,
        max_error: r.d,
        converged,
        iterations: r.iterations,
    })
}

/// Number of consecutive orders without a 10% gain over the best deviation
/// after which the order scan stops.
pub const ORDER_SCAN_PATIENCE: usize = 4;

/// Picks the order after which the achieved deviation stops improving:
/// increases `n` until [`ORDER_SCAN_PATIENCE`] consecutive orders fail to
/// beat the best deviation so far by 10%, and returns the best order.
pub fn select_order(
    data: &SampledFunction,
    basis: &Arc<PhiBasis>,
    opts: &SolveOptions,
    n_max: usize,
) -> Result<usize> {
    basis.check_order(n_max)?;
    let mut best = (0usize, f64::INFINITY);
    let mut stalled = 0;
    for n in 0..=n_max {
        let d = fit(data, None, basis, n, opts, "data")?.max_error;
        log::debug!("order scan: n = {n}, D = {d:e}");
        if d < 0.9 * best.1 {
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= ORDER_SCAN_PATIENCE {
                break;
            }
        }
        if d < best.1 {
            best = (n, d);
        }
    }
    Ok(best.0)
}

/// Uniform mesh of the closed triangle `|x| + t <= b`, `t >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    /// Steps per half-width; `x_i = -b + i s`, `t_j = j s` with `s = b / m`.
    pub m: usize,
    pub b: f64,
}

impl TriangleMesh {
    pub fn new(b: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || !(b > 0.0) {
            return Err(Error::invalid(format!(
                "mesh step must be positive, got {step}"
            )));
        }
        let m = (b / step).round().max(1.0) as usize;
        Ok(TriangleMesh { m, b })
    }

    pub fn step(&self) -> f64 {
        self.b / self.m as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.m {
            0.0
        } else {
            self.b * (i as f64 - self.m as f64) / self.m as f64
        }
    }

    pub fn t(&self, j: usize) -> f64 {
        self.b * j as f64 / self.m as f64
    }

    /// Number of `t` levels in column `i`.
    pub fn column_len(&self, i: usize) -> usize {
        self.m - i.abs_diff(self.m) + 1
    }

    pub fn len(&self) -> usize {
        (self.m + 1) * (self.m + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `u_N` over the triangle mesh, column by column in `x`.
#[derive(Clone, Debug)]
pub struct MeshValues {
    pub mesh: TriangleMesh,
    pub columns: Vec<Vec<Complex64>>,
}

impl MeshValues {
    /// `(x, t, u)` rows, `x` ascending then `t` ascending.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, Complex64)> + '_ {
        self.columns.iter().enumerate().flat_map(move |(i, col)| {
            col.iter()
                .enumerate()
                .map(move |(j, &u)| (self.mesh.x(i), self.mesh.t(j), u))
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.columns
            .iter()
            .flatten()
            .map(|u| u.norm())
            .fold(0.0, f64::max)
    }

    /// Max `|u_N - exact|` over the mesh.
    pub fn max_error(&self, exact: &(dyn Fn(f64, f64) -> Complex64 + Sync)) -> f64 {
        self.points()
            .map(|(x, t, u)| (u - exact(x, t)).norm())
            .fold(0.0, f64::max)
    }
}

pub fn evaluate_on_triangle(sol: &GeneralizedWaveSolution, step: f64) -> Result<MeshValues> {
    let mesh = TriangleMesh::new(sol.b(), step)?;
    let columns = (0..=2 * mesh.m)
        .into_par_iter()
        .map(|i| {
            let ts: Vec<f64> = (0..mesh.column_len(i)).map(|j| mesh.t(j)).collect();
            sol.eval_column(mesh.x(i), &ts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeshValues { mesh, columns })
}

/// Max of `|u_xx - u_tt - q u|` by the five-point stencil over mesh points
/// whose four neighbours lie in the triangle.
pub fn residual_check(sol: &GeneralizedWaveSolution, step: f64) -> Result<f64> {
    let values = evaluate_on_triangle(sol, step)?;
    Ok(mesh_residual(&values, sol.q()))
}

pub fn mesh_residual(values: &MeshValues, q: &SampledFunction) -> f64 {
    let mesh = &values.mesh;
    let s2 = mesh.step() * mesh.step();
    (1..2 * mesh.m)
        .into_par_iter()
        .map(|i| {
            let col = &values.columns[i];
            let qx = q.eval(mesh.x(i)).unwrap_or_default();
            let mut worst = 0.0f64;
            // neighbours exist while j + 1 < column_len - 1 is inside the
            // shorter adjacent column
            let inner = mesh.column_len(i).saturating_sub(1);
            for j in 1..inner {
                let u = col[j];
                let uxx = values.columns[i - 1][j] - 2.0 * u + values.columns[i + 1][j];
                let utt = col[j - 1] - 2.0 * u + col[j + 1];
                worst = worst.max(((uxx - utt) / s2 - qx * u).norm());
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, Grid, DEFAULT_INTERP_ORDER};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn grid(b: f64, n: usize) -> Grid {
        Grid::new(b, n).unwrap()
    }

    #[test]
    fn coefficients_assembled() {
        assert_eq!(assemble_coefficients(&[c(7.0)], &[]), vec![c(7.0)]);
        let a = assemble_coefficients(&[c(1.0), c(2.0), c(3.0)], &[c(4.0), c(5.0)]);
        assert_eq!(a, vec![c(1.0), c(2.0), c(4.0), c(3.0), c(2.5)]);
        // h longer than g pads the odd slots
        let a = assemble_coefficients(&[c(1.0)], &[c(0.0), c(0.0), c(6.0)]);
        assert_eq!(a.len(), 7);
        assert_eq!(a[6], c(2.0));
    }

    #[test]
    fn mesh_is_the_triangle() {
        let mesh = TriangleMesh::new(1.0, 0.25).unwrap();
        assert_eq!(mesh.m, 4);
        let values = MeshValues {
            columns: (0..=8).map(|i| vec![c(0.0); mesh.column_len(i)]).collect(),
            mesh: mesh.clone(),
        };
        let pts: Vec<(f64, f64)> = values.points().map(|(x, t, _)| (x, t)).collect();
        assert_eq!(pts.len(), mesh.len());
        for &(x, t) in &pts {
            assert!(t >= 0.0 && x.abs() + t <= 1.0 + 1e-12);
        }
        // brute force count of lattice points in the closed triangle
        let mut count = 0;
        for i in -4i32..=4 {
            for j in 0..=4i32 {
                if i.abs() + j <= 4 {
                    count += 1;
                }
            }
        }
        assert_eq!(pts.len(), count);
        assert!(TriangleMesh::new(1.0, 0.0).is_err());
    }

    #[test]
    fn certificate_formula() {
        let q0 = SampledFunction::constant(grid(1.0, 100), 3, c(0.0)).unwrap();
        let cert = error_certificate(0.0, 0.0, &q0, c(0.0), 1.0).unwrap();
        assert_eq!(cert.total, 0.0);
        let cert = error_certificate(1e-3, 2e-3, &q0, c(0.0), 1.0).unwrap();
        assert!((cert.total - 3e-3).abs() < 1e-15);
        let q9 = SampledFunction::constant(grid(2.0, 100), 3, c(9.0)).unwrap();
        let cert = error_certificate(1e-9, 1e-8, &q9, c(3.0), 2.0).unwrap();
        let bound = norm_bound(&q9, c(3.0), 2.0).unwrap();
        assert!((cert.total - bound * bound * 2.1e-8).abs() <= 1e-12 * cert.total);
        assert!(error_certificate(-1.0, 0.0, &q0, c(0.0), 1.0).is_err());
    }

    fn free_problem(b: f64, g: impl Fn(f64) -> f64, h: impl Fn(f64) -> f64) -> CauchyProblem {
        let gr = grid(b, 1000);
        let q = SampledFunction::constant(gr, DEFAULT_INTERP_ORDER, c(0.0)).unwrap();
        CauchyProblem::new(
            q,
            SampledFunction::from_real_fn(gr, DEFAULT_INTERP_ORDER, g).unwrap(),
            SampledFunction::from_real_fn(gr, DEFAULT_INTERP_ORDER, h).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let p = free_problem(1.0, |_| 0.0, |_| 0.0);
        for strategy in [Strategy::Remez, Strategy::Lp] {
            let sol = solve(&p, &SolveOptions::paired(strategy, 4)).unwrap();
            assert!(sol.a.iter().all(|a| a.norm() == 0.0), "{strategy}");
            let values = evaluate_on_triangle(&sol, 0.05).unwrap();
            assert_eq!(values.max_abs(), 0.0);
            assert_eq!(residual_check(&sol, 0.05).unwrap(), 0.0);
        }
    }

    #[test]
    fn taylor_needs_spectral_data() {
        let p = free_problem(1.0, |x| x, |_| 1.0);
        let err = solve(&p, &SolveOptions::paired(Strategy::Taylor, 4)).unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }

    #[test]
    fn free_wave_dalembert() {
        // q = 0: u = (g(x+t) + g(x-t))/2 + (H(x+t) - H(x-t))/2 with H' = h
        let p = free_problem(1.0, |x| x * x * x - x, |x| 2.0 * x * x);
        let sol = solve(&p, &SolveOptions::paired(Strategy::Remez, 4)).unwrap();
        let exact = |x: f64, t: f64| {
            let g = |s: f64| s * s * s - s;
            let hh = |s: f64| 2.0 * s * s * s / 3.0;
            c(0.5 * (g(x + t) + g(x - t)) + 0.5 * (hh(x + t) - hh(x - t)))
        };
        let values = evaluate_on_triangle(&sol, 0.05).unwrap();
        assert!(values.max_error(&exact) < 1e-10);
        assert!(sol.certificate.total < 1e-9);
    }

    #[test]
    fn initial_data_reproduced() {
        let gr = grid(1.0, 1000);
        let q = SampledFunction::from_real_fn(gr, DEFAULT_INTERP_ORDER, |x| 1.0 + x * x).unwrap();
        let g = SampledFunction::from_real_fn(gr, DEFAULT_INTERP_ORDER, |x| x.sin() + 2.0).unwrap();
        let h =
            SampledFunction::from_real_fn(gr, DEFAULT_INTERP_ORDER, |x| (2.0 * x).cos()).unwrap();
        let p = CauchyProblem::new(q, g, h).unwrap().with_slope(c(0.5));
        let sol = solve(&p, &SolveOptions::orders(Strategy::Remez, 8, 7)).unwrap();
        let pg = sol.g_fit.poly.sample().unwrap();
        let ph = sol.h_fit.poly.sample().unwrap();
        let dt = 1e-4;
        for i in (0..gr.len()).step_by(37) {
            let x = gr.node(i);
            assert!((sol.eval(x, 0.0).unwrap() - pg.values()[i]).norm() <= 1e-12);
            assert!((sol.eval_dt0(x).unwrap() - ph.values()[i]).norm() <= 1e-12);
            // central difference in t; u_N is odd-plus-even in t
            let fd = (sol.eval(x, dt).unwrap() - sol.eval(x, -dt).unwrap()) / (2.0 * dt);
            assert!((fd - ph.values()[i]).norm() <= 1e-6);
        }
    }

    #[test]
    fn taylor_is_linear_in_data() {
        let gr = grid(1.0, 1000);
        let q = SampledFunction::constant(gr, DEFAULT_INTERP_ORDER, c(4.0)).unwrap();
        // the Taylor coefficients depend only on the declared spectral data
        let mk = |_: f64| {
            SampledFunction::from_real_fn(gr, DEFAULT_INTERP_ORDER, |x| (x * 5f64.sqrt()).cosh())
                .unwrap()
        };
        let s1 = SpectralData {
            lambda: c(1.0),
            v0: c(1.0),
            v0p: c(0.0),
        };
        let s2 = SpectralData {
            lambda: c(1.0),
            v0: c(0.0),
            v0p: c(2.0),
        };
        let p1 = CauchyProblem::new(q.clone(), mk(1.0), mk(1.0))
            .unwrap()
            .with_slope(c(2.0))
            .with_spectral(s1, s2);
        let p2 = CauchyProblem::new(q.clone(), mk(1.0), mk(1.0))
            .unwrap()
            .with_slope(c(2.0))
            .with_spectral(s2, s1);
        let sum = |a: SpectralData, b: SpectralData| SpectralData {
            lambda: a.lambda,
            v0: a.v0 + b.v0,
            v0p: a.v0p + b.v0p,
        };
        let p12 = CauchyProblem::new(q, mk(1.0), mk(1.0))
            .unwrap()
            .with_slope(c(2.0))
            .with_spectral(sum(s1, s2), sum(s2, s1));
        let opts = SolveOptions::paired(Strategy::Taylor, 10);
        let (a1, a2, a12) = (
            solve(&p1, &opts).unwrap().a,
            solve(&p2, &opts).unwrap().a,
            solve(&p12, &opts).unwrap().a,
        );
        for k in 0..a12.len() {
            assert!((a1[k] + a2[k] - a12[k]).norm() <= 1e-14 * a12[k].norm().max(1.0));
        }
    }

    #[test]
    fn residual_vanishes_for_wave_polynomials() {
        // f = 1 so u_m = p_m; the stencil is exact for cubics in x and t
        let gr = grid(1.0, 600);
        let f = SampledFunction::constant(gr, DEFAULT_INTERP_ORDER, c(1.0)).unwrap();
        let basis = Arc::new(build_basis(&f, 4).unwrap());
        let q = SampledFunction::constant(gr, DEFAULT_INTERP_ORDER, c(0.0)).unwrap();
        let alpha = [c(1.0), c(-1.0), c(0.5), c(0.25)];
        let sol = GeneralizedWaveSolution::from_coefficients(
            basis.clone(),
            q.clone(),
            &alpha,
            &[c(0.0), c(1.0)],
            &f,
            &f,
        )
        .unwrap();
        assert!(residual_check(&sol, 0.05).unwrap() < 1e-8);
        assert!(sol.certificate.total > 0.0);
    }
}
