//! Transmutation operator `T` with `T[x^k] = phi_k`, its inverse, and kernel
//! and norm bounds via modified Bessel functions.
//!
//! The kernel is stored as `H(u, v) = K(u + v, u - v; h)` on a uniform grid
//! over the diamond `|u| + |v| <= b`, which is the image of the square
//! `|x|, |t| <= b`. Four extra layers of nodes outside the diamond keep
//! the 4x4 interpolation stencils well defined up to its edge.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{Grid, SampledFunction, StencilRule};
use crate::error::{Error, Result};

pub const DEFAULT_KERNEL_M: usize = 512;
pub const DEFAULT_KERNEL_TOL: f64 = 1e-12;
pub const KERNEL_MAX_ITER: usize = 60;
const PAD: usize = 4;

/// `H(u, v)` sampled with spacing `2b / M` on the padded diamond.
#[derive(Clone, Debug)]
pub struct KernelGrid {
    b: f64,
    h: Complex64,
    m: usize,
    delta: f64,
    /// half-width of the stored square in nodes, `M/2 + PAD`
    radius: usize,
    values: Vec<Complex64>,
    iterations: usize,
}

impl KernelGrid {
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn h(&self) -> Complex64 {
        self.h
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> f64 {
        self.delta
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn width(&self) -> usize {
        2 * self.radius + 1
    }

    fn index(&self, i: isize, j: isize) -> usize {
        let r = self.radius as isize;
        ((i + r) as usize) * self.width() + (j + r) as usize
    }

    /// `H` at node `(i delta, j delta)`; requires `|i| + |j| <= M/2`.
    pub fn node(&self, i: isize, j: isize) -> Result<Complex64> {
        let half = (self.m / 2) as isize;
        if i.abs() + j.abs() > half {
            return Err(Error::invalid(format!(
                "kernel node ({i}, {j}) lies outside the diamond of radius {half}"
            )));
        }
        Ok(self.values[self.index(i, j)])
    }

    /// Nodes `(i, j)` of the diamond `|i| + |j| <= M/2`.
    pub fn diamond_nodes(&self) -> impl Iterator<Item = (isize, isize)> {
        let half = (self.m / 2) as isize;
        (-half..=half).flat_map(move |i| {
            let w = half - i.abs();
            (-w..=w).map(move |j| (i, j))
        })
    }

    /// `H(u, v)` by tensor-product cubic interpolation.
    pub fn at_uv(&self, u: f64, v: f64) -> Result<Complex64> {
        let slack = 1e-12 * self.b;
        if !(u.abs() + v.abs() <= self.b + slack) {
            return Err(Error::Domain {
                x: u.abs() + v.abs(),
                lo: 0.0,
                hi: self.b,
            });
        }
        Ok(self.interpolate(u, v))
    }

    fn interpolate(&self, u: f64, v: f64) -> Complex64 {
        let r = self.radius as isize;
        let (su, sv) = (u / self.delta, v / self.delta);
        let i0 = (su.floor() as isize - 1).clamp(-r, r - 3);
        let j0 = (sv.floor() as isize - 1).clamp(-r, r - 3);
        let wu = cubic_weights(su - i0 as f64);
        let wv = cubic_weights(sv - j0 as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        for (di, a) in wu.iter().enumerate() {
            let row = self.index(i0 + di as isize, j0);
            let mut inner = Complex64::new(0.0, 0.0);
            for (dj, c) in wv.iter().enumerate() {
                inner += self.values[row + dj] * *c;
            }
            acc += inner * *a;
        }
        acc
    }

    /// `K(x, t; h)` for `|x|, |t| <= b`.
    pub fn kernel(&self, x: f64, t: f64) -> Result<Complex64> {
        self.at_uv(0.5 * (x + t), 0.5 * (x - t))
    }
}

/// Solves the Goursat problem for `H` by successive approximations of
/// `H = h/2 + \int_0^u G du'`, `G = q(u)/2 + \int_0^v q(u + v') H dv'`.
pub fn build_kernel(q: &SampledFunction, h: Complex64, m: usize, tol: f64) -> Result<KernelGrid> {
    if m < 64 || !m.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "kernel resolution must be even and at least 64, got {m}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("kernel tolerance must be positive"));
    }
    let b = q.b();
    let delta = 2.0 * b / m as f64;
    let radius = m / 2 + PAD;
    let r = radius as isize;
    let width = 2 * radius + 1;
    let idx = |i: isize, j: isize| ((i + r) as usize) * width + (j + r) as usize;

    // q at k * delta for |k| <= radius
    let qk: Vec<Complex64> = (-r..=r)
        .map(|k| {
            if k.unsigned_abs() <= m / 2 {
                q.eval(b * (k as f64 / (m / 2) as f64))
            } else {
                Ok(q.eval_extrapolated(k as f64 * delta))
            }
        })
        .collect::<Result<_>>()?;
    let qat = |k: isize| qk[(k + r) as usize];

    let rule = StencilRule::new(q.interp_order());
    let half_h = h * 0.5;
    let mut values = vec![Complex64::new(0.0, 0.0); width * width];
    for i in -r..=r {
        let w = r - i.abs();
        for j in -w..=w {
            values[idx(i, j)] = half_h;
        }
    }
    let mut g = vec![Complex64::new(0.0, 0.0); width * width];
    let mut line = Vec::with_capacity(width);

    for it in 1..=KERNEL_MAX_ITER {
        for i in -r..=r {
            let w = r - i.abs();
            line.clear();
            line.extend((-w..=w).map(|j| qat(i + j) * values[idx(i, j)]));
            let cum = rule.cumulative(&line, delta, w as usize);
            for (jj, c) in cum.iter().enumerate() {
                g[idx(i, jj as isize - w)] = qat(i) * 0.5 + c;
            }
        }
        let mut change = 0.0f64;
        let mut scale = 1.0f64;
        for j in -r..=r {
            let w = r - j.abs();
            line.clear();
            line.extend((-w..=w).map(|i| g[idx(i, j)]));
            let cum = rule.cumulative(&line, delta, w as usize);
            for (ii, c) in cum.iter().enumerate() {
                let k = idx(ii as isize - w, j);
                let next = half_h + c;
                change = change.max((next - values[k]).norm());
                scale = scale.max(next.norm());
                values[k] = next;
            }
        }
        log::trace!("kernel iteration {it}: change {change:e}");
        if change < tol * scale {
            log::debug!("kernel converged after {it} iterations");
            return Ok(KernelGrid {
                b,
                h,
                m,
                delta,
                radius,
                values,
                iterations: it,
            });
        }
        if !change.is_finite() {
            return Err(Error::NonConvergence {
                what: "kernel successive approximation",
                iterations: it,
                residual: change,
            });
        }
        if it == KERNEL_MAX_ITER {
            return Err(Error::NonConvergence {
                what: "kernel successive approximation",
                iterations: it,
                residual: change,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Cubic Lagrange weights on nodes 0..=3 at `tau`.
fn cubic_weights(tau: f64) -> [f64; 4] {
    let (a, b, c, d) = (tau, tau - 1.0, tau - 2.0, tau - 3.0);
    [
        -b * c * d / 6.0,
        a * c * d / 2.0,
        -a * b * d / 2.0,
        a * b * c / 6.0,
    ]
}

fn check_domain(kernel: &KernelGrid, grid: &Grid) -> Result<()> {
    if (grid.b() - kernel.b).abs() > 1e-12 * kernel.b {
        return Err(Error::invalid(format!(
            "function domain [-{}, {}] does not match kernel domain [-{}, {}]",
            grid.b(),
            grid.b(),
            kernel.b,
            kernel.b
        )));
    }
    Ok(())
}

/// `\int_{-x}^{x} k(t) u(t) dt` at every node, with `k` read per node.
fn volterra<F>(u: &SampledFunction, sign: f64, kernel_at: F) -> Result<SampledFunction>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let grid = *u.grid();
    let n = grid.intervals();
    let rule = StencilRule::new(u.interp_order());
    let values: Vec<Complex64> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let (lo, hi) = if 2 * i >= n { (n - i, i) } else { (i, n - i) };
            let line: Vec<Complex64> = (lo..=hi)
                .map(|j| kernel_at(x, grid.node(j)) * u.values()[j])
                .collect();
            let integral = rule.total(&line, grid.spacing());
            let oriented = if 2 * i >= n { integral } else { -integral };
            u.values()[i] + oriented * sign
        })
        .collect();
    u.with_values(values)
}

/// `(T u)(x) = u(x) + \int_{-x}^{x} K(x, t; h) u(t) dt`.
pub fn apply_t(kernel: &KernelGrid, u: &SampledFunction) -> Result<SampledFunction> {
    check_domain(kernel, u.grid())?;
    volterra(u, 1.0, |x, t| {
        kernel.interpolate(0.5 * (x + t), 0.5 * (x - t))
    })
}

/// `(T^{-1} g)(x) = g(x) - \int_{-x}^{x} K(t, x; h) g(t) dt`.
pub fn apply_t_inverse(kernel: &KernelGrid, g: &SampledFunction) -> Result<SampledFunction> {
    check_domain(kernel, g.grid())?;
    volterra(g, -1.0, |x, t| {
        kernel.interpolate(0.5 * (t + x), 0.5 * (t - x))
    })
}

/// Modified Bessel function `I_0` or `I_1` by its power series.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    if order > 1 {
        return Err(Error::invalid(format!(
            "only I_0 and I_1 are available, got order {order}"
        )));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            x,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let nu = order as f64;
    let y = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= y / (k * (k + nu));
        sum += term;
        if term <= 1e-17 * sum || term == 0.0 {
            return Ok(sum);
        }
    }
}

/// `I_1(z) / z`, analytic at zero where it equals 1/2.
pub fn bessel_i1_over_z(z: f64) -> Result<f64> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain {
            x: z,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let y = 0.25 * z * z;
    let mut term = 0.5;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= y / (k * (k + 1.0));
        sum += term;
        if term <= 1e-17 * sum {
            return Ok(sum);
        }
    }
}

/// Right-hand side of the pointwise kernel estimate,
/// `(|h|/2) I_0(z) + (c |x + t| / 2) I_1(z) / z` with `z = sqrt(c |x^2 - t^2|)`.
pub fn kernel_bound(c: f64, h_abs: f64, x: f64, t: f64) -> Result<f64> {
    let z = (c * (x * x - t * t).abs()).sqrt();
    Ok(0.5 * h_abs * bessel_i(0, z)? + 0.5 * c * (x + t).abs() * bessel_i1_over_z(z)?)
}

/// `1 + b (|h| I_0(b sqrt c) + 2 sqrt c I_1(b sqrt c))` with `c = max |q|`;
/// bounds both `||T||` and `||T^{-1}||` in the sup norm.
pub fn norm_bound(q: &SampledFunction, h: Complex64, b: f64) -> Result<f64> {
    norm_bound_from_max(q.max_abs(), h.norm(), b)
}

pub fn norm_bound_from_max(c: f64, h_abs: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) || !(c >= 0.0) || !(h_abs >= 0.0) {
        return Err(Error::invalid(format!(
            "norm bound needs b > 0, c >= 0, |h| >= 0; got b = {b}, c = {c}, |h| = {h_abs}"
        )));
    }
    let s = c.sqrt();
    Ok(1.0 + b * (h_abs * bessel_i(0, b * s)? + 2.0 * s * bessel_i(1, b * s)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis_with_slope, DEFAULT_INTERP_ORDER};
    use crate::spps::particular_solution;
    use crate::wavepoly::{gen_wave_poly_at, wave_poly};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn constant_q(b: f64, value: Complex64) -> SampledFunction {
        SampledFunction::constant(Grid::new(b, 3000).unwrap(), DEFAULT_INTERP_ORDER, value).unwrap()
    }

    /// `(1/pi) \int_0^pi e^{x cos s} cos(n s) ds` by the trapezoid rule, which
    /// converges geometrically for this periodic integrand.
    fn bessel_quadrature(n: u32, x: f64) -> f64 {
        let m = 400;
        let mut s = 0.0;
        for k in 0..=m {
            let th = PI * k as f64 / m as f64;
            let w = if k == 0 || k == m { 0.5 } else { 1.0 };
            s += w * (x * th.cos()).exp() * (n as f64 * th).cos();
        }
        s / m as f64
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert!((bessel_i(0, 1.0).unwrap() - 1.2660658777520).abs() < 1e-12);
        for x in [0.3, 1.0, 6.0, 10.0] {
            for n in [0, 1] {
                let want = bessel_quadrature(n, x);
                assert!((bessel_i(n, x).unwrap() - want).abs() <= 1e-13 * want.abs().max(1.0));
            }
            let ratio = bessel_i(1, x).unwrap() / x;
            assert!((bessel_i1_over_z(x).unwrap() - ratio).abs() <= 1e-14 * ratio);
        }
        assert_eq!(bessel_i1_over_z(0.0).unwrap(), 0.5);
        assert!(matches!(bessel_i(0, -1.0), Err(Error::Domain { .. })));
        assert!(bessel_i(2, 1.0).is_err());
    }

    #[test]
    fn norm_bound_examples() {
        let zero = constant_q(2.0, c(0.0));
        assert_eq!(norm_bound(&zero, c(0.0), 2.0).unwrap(), 1.0);
        let nine = constant_q(2.0, c(9.0));
        let want = 1.0 + 2.0 * (3.0 * bessel_quadrature(0, 6.0) + 6.0 * bessel_quadrature(1, 6.0));
        let got = norm_bound(&nine, c(3.0), 2.0).unwrap();
        assert!((got - want).abs() <= 1e-12 * want);
    }

    proptest! {
        #[test]
        fn norm_bound_is_monotone(c0 in 0.0f64..30.0, dc in 0.0f64..10.0,
                                  h0 in 0.0f64..10.0, dh in 0.0f64..5.0, b in 0.1f64..3.0) {
            let base = norm_bound_from_max(c0, h0, b).unwrap();
            prop_assert!(norm_bound_from_max(c0 + dc, h0, b).unwrap() >= base);
            prop_assert!(norm_bound_from_max(c0, h0 + dh, b).unwrap() >= base);
        }
    }

    #[test]
    fn free_kernels() {
        let zero = constant_q(1.0, c(0.0));
        let k = build_kernel(&zero, c(0.0), 64, DEFAULT_KERNEL_TOL).unwrap();
        assert!(k
            .diamond_nodes()
            .all(|(i, j)| k.node(i, j).unwrap() == c(0.0)));
        let h = Complex64::new(0.7, -1.2);
        let k = build_kernel(&zero, h, 64, DEFAULT_KERNEL_TOL).unwrap();
        assert!(k
            .diamond_nodes()
            .all(|(i, j)| (k.node(i, j).unwrap() - h / 2.0).norm() < 1e-15));
    }

    #[test]
    fn resolution_is_validated() {
        let zero = constant_q(1.0, c(0.0));
        assert!(build_kernel(&zero, c(0.0), 32, 1e-12).is_err());
        assert!(build_kernel(&zero, c(0.0), 65, 1e-12).is_err());
    }

    fn exact_constant_kernel(c2: f64, h: f64, x: f64, t: f64) -> f64 {
        let z = (c2 * (x * x - t * t)).max(0.0).sqrt();
        0.5 * h * bessel_quadrature(0, z)
            + 0.5 * c2 * (x + t) * {
                if z == 0.0 {
                    0.5
                } else {
                    bessel_quadrature(1, z) / z
                }
            }
    }

    #[test]
    fn constant_potential_kernel_is_exact() {
        let q = constant_q(1.0, c(9.0));
        let k = build_kernel(&q, c(3.0), DEFAULT_KERNEL_M, DEFAULT_KERNEL_TOL).unwrap();
        let mut worst = 0.0f64;
        for (i, j) in k.diamond_nodes() {
            // 0 <= t <= x  <=>  0 <= v <= u
            if j < 0 || j > i {
                continue;
            }
            let (u, v) = (i as f64 * k.spacing(), j as f64 * k.spacing());
            let want = exact_constant_kernel(9.0, 3.0, u + v, u - v);
            worst = worst.max((k.node(i, j).unwrap() - want).norm() / want);
        }
        assert!(worst <= 1e-6, "{worst:e}");
    }

    #[test]
    fn goursat_boundary_conditions() {
        let g = Grid::new(2.0, 3000).unwrap();
        let q = SampledFunction::from_real_fn(g, DEFAULT_INTERP_ORDER, |x| x * x).unwrap();
        let h = c(0.4);
        let k = build_kernel(&q, h, 256, DEFAULT_KERNEL_TOL).unwrap();
        let half = 128isize;
        for i in -half..=half {
            let u = i as f64 * k.spacing();
            let want = h / 2.0 + u * u * u / 6.0;
            assert!((k.node(i, 0).unwrap() - want).norm() < 1e-12);
            assert!((k.node(0, i).unwrap() - h / 2.0).norm() < 1e-15);
        }
    }

    fn kernel_bound_holds(q: &SampledFunction, h: Complex64) {
        let k = build_kernel(q, h, 256, DEFAULT_KERNEL_TOL).unwrap();
        let cmax = q.max_abs();
        for (i, j) in k.diamond_nodes() {
            let (u, v) = (i as f64 * k.spacing(), j as f64 * k.spacing());
            let bound = kernel_bound(cmax, h.norm(), u + v, u - v).unwrap();
            let got = k.node(i, j).unwrap().norm();
            assert!(got <= bound * (1.0 + 1e-6), "({i}, {j}): {got} > {bound}");
        }
    }

    #[test]
    fn kernel_bound_constant_positive() {
        kernel_bound_holds(&constant_q(2.0, c(9.0)), c(3.0));
    }

    #[test]
    fn kernel_bound_quadratic() {
        let g = Grid::new(2.0, 3000).unwrap();
        let q = SampledFunction::from_real_fn(g, DEFAULT_INTERP_ORDER, |x| x * x).unwrap();
        kernel_bound_holds(&q, c(0.0));
    }

    #[test]
    fn kernel_bound_negative_constant() {
        kernel_bound_holds(&constant_q(2.0, c(-25.0)), Complex64::new(0.0, 5.0));
    }

    fn monomial(g: Grid, k: usize) -> SampledFunction {
        SampledFunction::from_real_fn(g, DEFAULT_INTERP_ORDER, |x| x.powi(k as i32)).unwrap()
    }

    fn rel(a: &SampledFunction, b: &SampledFunction) -> f64 {
        a.max_diff(b).unwrap() / b.max_abs()
    }

    #[test]
    fn mapping_property_and_inverse() {
        let g = Grid::new(1.0, 3000).unwrap();
        let q = SampledFunction::constant(g, DEFAULT_INTERP_ORDER, c(9.0)).unwrap();
        let ps = particular_solution(&q, c(3.0)).unwrap();
        let basis = build_basis_with_slope(&ps.f, ps.h, 8).unwrap();
        let k = build_kernel(&q, c(3.0), DEFAULT_KERNEL_M, DEFAULT_KERNEL_TOL).unwrap();
        for n in 0..=8 {
            let xk = monomial(g, n);
            let tx = apply_t(&k, &xk).unwrap();
            assert!(
                rel(&tx, basis.phi(n)) <= 1e-4,
                "T x^{n}: {:e}",
                rel(&tx, basis.phi(n))
            );
            if n <= 6 {
                let back = apply_t_inverse(&k, &tx).unwrap();
                assert!(back.max_diff(&xk).unwrap() <= 1e-4, "inverse on x^{n}");
                let from_phi = apply_t_inverse(&k, basis.phi(n)).unwrap();
                assert!(
                    from_phi.max_diff(&xk).unwrap() <= 1e-4,
                    "inverse on phi_{n}"
                );
            }
        }
    }

    #[test]
    fn identity_for_free_problem() {
        let g = Grid::new(1.0, 600).unwrap();
        let zero = SampledFunction::constant(g, DEFAULT_INTERP_ORDER, c(0.0)).unwrap();
        let k = build_kernel(&zero, c(0.0), 64, DEFAULT_KERNEL_TOL).unwrap();
        let u = SampledFunction::from_real_fn(g, DEFAULT_INTERP_ORDER, |x| (2.0 * x).sin() + 1.0)
            .unwrap();
        assert_eq!(apply_t(&k, &u).unwrap().values(), u.values());
        assert_eq!(apply_t_inverse(&k, &u).unwrap().values(), u.values());
    }

    #[test]
    fn transmuted_wave_polynomials() {
        let g = Grid::new(1.0, 3000).unwrap();
        let q = SampledFunction::constant(g, DEFAULT_INTERP_ORDER, c(9.0)).unwrap();
        let ps = particular_solution(&q, c(3.0)).unwrap();
        let basis = build_basis_with_slope(&ps.f, ps.h, 6).unwrap();
        let k = build_kernel(&q, c(3.0), DEFAULT_KERNEL_M, DEFAULT_KERNEL_TOL).unwrap();
        for m in 0..=5 {
            for t in [0.0, 0.3, 0.7] {
                let p =
                    SampledFunction::from_real_fn(g, DEFAULT_INTERP_ORDER, |x| wave_poly(m, x, t))
                        .unwrap();
                let tp = apply_t(&k, &p).unwrap();
                let want: Vec<Complex64> = (0..=g.intervals())
                    .map(|i| {
                        let at: Vec<Complex64> =
                            basis.phis().iter().map(|p| p.values()[i]).collect();
                        gen_wave_poly_at(&at, m, t)
                    })
                    .collect();
                let want = p.with_values(want).unwrap();
                let scale = want.max_abs().max(1.0);
                assert!(
                    tp.max_diff(&want).unwrap() <= 1e-4 * scale,
                    "m = {m}, t = {t}"
                );
            }
        }
    }

    #[test]
    fn observed_norm_within_bound() {
        let g = Grid::new(1.0, 3000).unwrap();
        let q = SampledFunction::constant(g, DEFAULT_INTERP_ORDER, c(9.0)).unwrap();
        let k = build_kernel(&q, c(3.0), 256, DEFAULT_KERNEL_TOL).unwrap();
        let bound = norm_bound(&q, c(3.0), 1.0).unwrap();
        let tests = [
            SampledFunction::constant(g, DEFAULT_INTERP_ORDER, c(1.0)).unwrap(),
            SampledFunction::from_real_fn(g, DEFAULT_INTERP_ORDER, |x| (5.0 * x).cos()).unwrap(),
            SampledFunction::from_real_fn(g, DEFAULT_INTERP_ORDER, |x| x.signum() * x.abs().sqrt())
                .unwrap(),
        ];
        for u in &tests {
            let ratio_t = apply_t(&k, u).unwrap().max_abs() / u.max_abs();
            let ratio_inv = apply_t_inverse(&k, u).unwrap().max_abs() / u.max_abs();
            assert!(ratio_t <= bound && ratio_inv <= bound);
        }
    }
}
