//! Uniformly sampled complex functions on a symmetric interval `[-b, b]`.
//!
//! Samples are interpolated by local Lagrange pieces of a fixed degree: on
//! the interval `[x_i, x_{i+1}]` the interpolant is the polynomial through
//! `interp_order + 1` consecutive nodes, centred on the interval and shifted
//! inward near the ends. Integrals are exact integrals of that interpolant,
//! so any function that is a polynomial of degree `<= interp_order` on every
//! stencil is integrated exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default number of grid subintervals.
pub const DEFAULT_GRID_N: usize = 3000;

/// Default interpolation degree (piecewise quintic).
pub const DEFAULT_INTERP_ORDER: usize = 5;

/// Highest supported interpolation degree.
pub const MAX_INTERP_ORDER: usize = 9;

/// Uniform grid with `n` subintervals on `[-b, b]`. `n` is even so that the
/// origin is a node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    b: f64,
    n: usize,
}

impl Grid {
    pub fn new(b: f64, n: usize) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::invalid(format!(
                "half-width b must be positive, got {b}"
            )));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "grid needs an even number of subintervals >= 4, got {n}"
            )));
        }
        Ok(Grid { b, n })
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of subintervals.
    #[inline]
    pub fn intervals(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.b / self.n as f64
    }

    /// Index of the node at the origin.
    #[inline]
    pub fn origin(&self) -> usize {
        self.n / 2
    }

    /// Abscissa of node `i`; exactly antisymmetric about the origin.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        let n = self.n as f64;
        self.b * ((2.0 * i as f64 - n) / n)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x.abs() <= self.b * (1.0 + 1e-12)
    }

    /// Interpolation stencil for `x`, which must lie in the domain.
    pub fn stencil(&self, x: f64, order: usize) -> Result<Stencil> {
        if !x.is_finite() || !self.contains(x) {
            return Err(Error::Domain {
                x,
                lo: -self.b,
                hi: self.b,
            });
        }
        Ok(self.stencil_unchecked(x.clamp(-self.b, self.b), order))
    }

    /// Like [`Grid::stencil`] but extrapolates with the boundary piece when
    /// `x` is outside `[-b, b]`.
    pub(crate) fn stencil_unchecked(&self, x: f64, order: usize) -> Stencil {
        let order = order.min(self.n);
        let r = (x + self.b) / self.spacing();
        let nearest = r.round();
        if nearest >= 0.0 && nearest <= self.n as f64 {
            let i = nearest as usize;
            if self.node(i) == x {
                return Stencil::exact(i);
            }
        }
        let interval = (r.floor().max(0.0) as usize).min(self.n - 1);
        let start = stencil_start(interval, order, self.n);
        let tau = r - start as f64;
        Stencil {
            start,
            weights: lagrange_weights(order, tau),
        }
    }
}

#[inline]
fn stencil_start(interval: usize, order: usize, n: usize) -> usize {
    let lead = order / 2;
    interval.saturating_sub(lead).min(n - order)
}

/// Node weights for evaluating an interpolant at one abscissa.
#[derive(Clone, Debug)]
pub struct Stencil {
    start: usize,
    weights: Vec<f64>,
}

impl Stencil {
    fn exact(i: usize) -> Self {
        Stencil {
            start: i,
            weights: vec![1.0],
        }
    }

    #[inline]
    pub fn apply(&self, values: &[Complex64]) -> Complex64 {
        self.weights
            .iter()
            .zip(&values[self.start..self.start + self.weights.len()])
            .map(|(w, v)| v * w)
            .sum()
    }
}

/// Values of the Lagrange basis on nodes `0..=order` at `tau`.
fn lagrange_weights(order: usize, tau: f64) -> Vec<f64> {
    (0..=order)
        .map(|j| {
            let mut w = 1.0;
            for m in 0..=order {
                if m != j {
                    w *= (tau - m as f64) / (j as f64 - m as f64);
                }
            }
            w
        })
        .collect()
}

/// Monomial coefficients of the Lagrange basis polynomial `j` on nodes
/// `0..=order`.
fn lagrange_coefficients(order: usize, j: usize) -> Vec<f64> {
    let mut coeffs = vec![1.0];
    let mut denom = 1.0;
    for m in 0..=order {
        if m == j {
            continue;
        }
        denom *= j as f64 - m as f64;
        let mut next = vec![0.0; coeffs.len() + 1];
        for (r, c) in coeffs.iter().enumerate() {
            next[r + 1] += c;
            next[r] -= c * m as f64;
        }
        coeffs = next;
    }
    coeffs.iter().map(|c| c / denom).collect()
}

/// Exact integration weights of the local Lagrange interpolant.
///
/// `weights[s][j]` integrates the basis polynomial `j` over `[s, s + 1]` in
/// units of the grid spacing, where `s` is the position of the subinterval
/// inside its stencil.
#[derive(Clone, Debug)]
pub struct StencilRule {
    order: usize,
    weights: Vec<Vec<f64>>,
}

impl StencilRule {
    pub fn new(order: usize) -> Self {
        assert!((1..=MAX_INTERP_ORDER).contains(&order));
        let basis: Vec<Vec<f64>> = (0..=order)
            .map(|j| lagrange_coefficients(order, j))
            .collect();
        let weights = (0..order)
            .map(|s| {
                let (lo, hi) = (s as f64, s as f64 + 1.0);
                basis
                    .iter()
                    .map(|c| {
                        c.iter()
                            .enumerate()
                            .map(|(r, cr)| {
                                let p = (r + 1) as i32;
                                cr * (hi.powi(p) - lo.powi(p)) / (r + 1) as f64
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        StencilRule { order, weights }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Integral over subinterval `i` of a segment of equally spaced values.
    #[inline]
    fn interval(&self, values: &[Complex64], i: usize, spacing: f64) -> Complex64 {
        let n = values.len() - 1;
        let start = stencil_start(i, self.order, n);
        let w = &self.weights[i - start];
        let s: Complex64 = w
            .iter()
            .zip(&values[start..=start + self.order])
            .map(|(w, v)| v * w)
            .sum();
        s * spacing
    }

    /// Running integral `G[k] = \int_{x_origin}^{x_k}` over a segment of
    /// equally spaced samples. Segments shorter than the stencil fall back
    /// to the highest degree they support.
    pub fn cumulative(&self, values: &[Complex64], spacing: f64, origin: usize) -> Vec<Complex64> {
        let n = values.len().saturating_sub(1);
        let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
        if n == 0 {
            return out;
        }
        if n < self.order {
            return StencilRule::new(n).cumulative(values, spacing, origin);
        }
        for i in origin..n {
            out[i + 1] = out[i] + self.interval(values, i, spacing);
        }
        for i in (0..origin).rev() {
            out[i] = out[i + 1] - self.interval(values, i, spacing);
        }
        out
    }

    /// Integral over the whole segment.
    pub fn total(&self, values: &[Complex64], spacing: f64) -> Complex64 {
        let n = values.len().saturating_sub(1);
        if n == 0 {
            return Complex64::new(0.0, 0.0);
        }
        if n < self.order {
            return StencilRule::new(n).total(values, spacing);
        }
        (0..n).map(|i| self.interval(values, i, spacing)).sum()
    }
}

/// A complex function sampled on a uniform [`Grid`].
#[derive(Clone)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
    interp_order: usize,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>, interp_order: usize) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if !(1..=MAX_INTERP_ORDER).contains(&interp_order) || interp_order > grid.intervals() {
            return Err(Error::invalid(format!(
                "interpolation order must be in 1..={MAX_INTERP_ORDER}, got {interp_order}"
            )));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::invalid(format!(
                "non-finite sample at node {i} (x = {})",
                grid.node(i)
            )));
        }
        Ok(SampledFunction {
            grid,
            values,
            interp_order,
        })
    }

    /// Samples a closed-form function on the grid.
    pub fn from_fn(grid: Grid, interp_order: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self::new(grid, values, interp_order)
    }

    pub fn from_real_fn(grid: Grid, interp_order: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, interp_order, |x| Complex64::new(f(x), 0.0))
    }

    pub fn constant(grid: Grid, interp_order: usize, c: Complex64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()], interp_order)
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.grid.b
    }

    #[inline]
    pub fn interp_order(&self) -> usize {
        self.interp_order
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    /// Value at the origin node.
    pub fn at_origin(&self) -> Complex64 {
        self.values[self.grid.origin()]
    }

    /// Interpolated value at `x`; exact at nodes.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        Ok(self.grid.stencil(x, self.interp_order)?.apply(&self.values))
    }

    pub(crate) fn eval_extrapolated(&self, x: f64) -> Complex64 {
        self.grid
            .stencil_unchecked(x, self.interp_order)
            .apply(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// True when every imaginary part is negligible against the sup norm.
    pub fn is_real(&self) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.values.iter().all(|v| v.im.abs() <= 1e-13 * scale)
    }

    /// Same grid, new samples.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        Self::new(self.grid, values, self.interp_order)
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| f(self.grid.node(i), *v))
            .collect();
        self.with_values(values)
    }

    pub fn zip_with(
        &self,
        other: &SampledFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(*a, *b))
            .collect();
        self.with_values(values)
    }

    pub fn scale(&self, c: Complex64) -> Result<Self> {
        self.map(|_, v| v * c)
    }

    pub(crate) fn check_same_grid(&self, other: &SampledFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::invalid(format!(
                "grid mismatch: [-{}, {}] with {} intervals vs [-{}, {}] with {} intervals",
                self.grid.b, self.grid.b, self.grid.n, other.grid.b, other.grid.b, other.grid.n
            )));
        }
        Ok(())
    }

    /// Max-norm distance to another function on the same grid.
    pub fn max_diff(&self, other: &SampledFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Sixth-order finite-difference derivative: centred seven-point
    /// stencils inside, one-sided seven-point stencils near the ends.
    pub fn derivative(&self) -> Result<Self> {
        if self.values.len() < FD_POINTS {
            return Err(Error::invalid(format!(
                "finite differences need at least {FD_POINTS} nodes"
            )));
        }
        self.with_values(fd_derivative(&self.values, self.grid.spacing()))
    }
}

impl std::fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledFunction")
            .field("grid", &self.grid)
            .field("interp_order", &self.interp_order)
            .field("max_abs", &self.max_abs())
            .finish_non_exhaustive()
    }
}

/// Antiderivative vanishing at the origin: `G(x) = \int_0^x g(s) ds`.
pub fn antiderivative(g: &SampledFunction) -> Result<SampledFunction> {
    let rule = StencilRule::new(g.interp_order);
    let values = rule.cumulative(&g.values, g.grid.spacing(), g.grid.origin());
    g.with_values(values)
}

const FD_POINTS: usize = 7;

/// Row `j` (times 60) differentiates at offset `j` of a seven-node stencil.
const FD_WEIGHTS: [[f64; FD_POINTS]; FD_POINTS] = [
    [-147.0, 360.0, -450.0, 400.0, -225.0, 72.0, -10.0],
    [-10.0, -77.0, 150.0, -100.0, 50.0, -15.0, 2.0],
    [2.0, -24.0, -35.0, 80.0, -30.0, 8.0, -1.0],
    [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0],
    [1.0, -8.0, 30.0, -80.0, 35.0, 24.0, -2.0],
    [-2.0, 15.0, -50.0, 100.0, -150.0, 77.0, 10.0],
    [10.0, -72.0, 225.0, -400.0, 450.0, -360.0, 147.0],
];

pub(crate) fn fd_derivative(v: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = v.len();
    debug_assert!(n >= FD_POINTS);
    let half = FD_POINTS / 2;
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - FD_POINTS);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, w) in FD_WEIGHTS[i - start].iter().enumerate() {
                acc += v[start + j] * *w;
            }
            acc / (60.0 * h)
        })
        .collect()
}
