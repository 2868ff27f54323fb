//! Transmuted power basis: recursive integrals, the families `phi_k` and
//! `psi_k`, f-polynomials and generalized f-derivatives.

mod sampled;

pub use sampled::{
    antiderivative, Grid, SampledFunction, Stencil, StencilRule, DEFAULT_GRID_N,
    DEFAULT_INTERP_ORDER, MAX_INTERP_ORDER,
};

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the basis order.
pub const DEFAULT_ORDER_CAP: usize = 200;

/// Highest f-derivative order computed by finite differences.
pub const F_DERIVATIVE_CAP: usize = 4;

/// `f` is rejected when `min |f| < VANISHING_RATIO * max |f|` on the grid.
pub const VANISHING_RATIO: f64 = 1e-8;

/// The families `phi_0..phi_n` and `psi_0..psi_n` generated by a
/// non-vanishing `f` with `f(0) = 1`, integrating from the origin.
#[derive(Clone)]
pub struct PhiBasis {
    f: SampledFunction,
    h: Complex64,
    phi: Vec<SampledFunction>,
    psi: Vec<SampledFunction>,
    x_tilde: Vec<SampledFunction>,
    x: Vec<SampledFunction>,
}

impl PhiBasis {
    /// The normalized generating function, `f(0) = 1`.
    pub fn f(&self) -> &SampledFunction {
        &self.f
    }

    /// `f'(0)`.
    pub fn h(&self) -> Complex64 {
        self.h
    }

    /// Expansion center; always the origin.
    pub fn x0(&self) -> f64 {
        0.0
    }

    pub fn n_max(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn b(&self) -> f64 {
        self.f.b()
    }

    pub fn grid(&self) -> &Grid {
        self.f.grid()
    }

    pub fn phi(&self, k: usize) -> &SampledFunction {
        &self.phi[k]
    }

    pub fn psi(&self, k: usize) -> &SampledFunction {
        &self.psi[k]
    }

    pub fn phis(&self) -> &[SampledFunction] {
        &self.phi
    }

    pub fn psis(&self) -> &[SampledFunction] {
        &self.psi
    }

    /// Raw recursive integral `X~^(k)`.
    pub fn x_tilde(&self, k: usize) -> &SampledFunction {
        &self.x_tilde[k]
    }

    /// Raw recursive integral `X^(k)`.
    pub fn x_raw(&self, k: usize) -> &SampledFunction {
        &self.x[k]
    }

    /// True when `f` (hence every `phi_k`) is real-valued.
    pub fn is_real(&self) -> bool {
        self.f.is_real()
    }

    /// `phi_0(x)..phi_upto(x)` at one abscissa.
    pub fn phi_at(&self, x: f64, upto: usize) -> Result<Vec<Complex64>> {
        self.check_order(upto)?;
        let stencil = self.grid().stencil(x, self.f.interp_order())?;
        Ok(self.phi[..=upto]
            .iter()
            .map(|p| stencil.apply(p.values()))
            .collect())
    }

    pub(crate) fn check_order(&self, k: usize) -> Result<()> {
        if k > self.n_max() {
            return Err(Error::Capacity {
                what: "basis order",
                requested: k,
                cap: self.n_max(),
            });
        }
        Ok(())
    }

    /// Returns a basis truncated to order `n`.
    pub fn truncated(&self, n: usize) -> Result<PhiBasis> {
        self.check_order(n)?;
        Ok(PhiBasis {
            f: self.f.clone(),
            h: self.h,
            phi: self.phi[..=n].to_vec(),
            psi: self.psi[..=n].to_vec(),
            x_tilde: self.x_tilde[..=n].to_vec(),
            x: self.x[..=n].to_vec(),
        })
    }
}

impl std::fmt::Debug for PhiBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhiBasis")
            .field("grid", self.grid())
            .field("h", &self.h)
            .field("n_max", &self.n_max())
            .finish_non_exhaustive()
    }
}

/// Builds the basis with `h = f'(0)` estimated by finite differences.
pub fn build_basis(f: &SampledFunction, n: usize) -> Result<PhiBasis> {
    check_non_vanishing(f)?;
    let d = f.derivative()?;
    let h = d.at_origin() / f.at_origin();
    build_basis_capped(f, h * f.at_origin(), n, DEFAULT_ORDER_CAP)
}

/// Builds the basis from `f` and its known slope `f'(0) = h`.
pub fn build_basis_with_slope(f: &SampledFunction, h: Complex64, n: usize) -> Result<PhiBasis> {
    build_basis_capped(f, h, n, DEFAULT_ORDER_CAP)
}

pub fn build_basis_capped(
    f: &SampledFunction,
    h: Complex64,
    n: usize,
    order_cap: usize,
) -> Result<PhiBasis> {
    if n > order_cap {
        return Err(Error::Capacity {
            what: "basis order",
            requested: n,
            cap: order_cap,
        });
    }
    check_non_vanishing(f)?;
    let f0 = f.at_origin();
    let f = f.scale(f0.inv())?;
    let h = h / f0;

    let f2 = f.map(|_, v| v * v)?;
    let inv_f2 = f.map(|_, v| (v * v).inv())?;
    let inv_f = f.map(|_, v| v.inv())?;
    let one = SampledFunction::constant(*f.grid(), f.interp_order(), Complex64::new(1.0, 0.0))?;

    // X~^(k) carries the weight f^2 on odd steps, X^(k) on even steps.
    let mut x_tilde = vec![one.clone()];
    let mut x = vec![one];
    for k in 1..=n {
        let (wt, w) = if k % 2 == 1 {
            (&f2, &inv_f2)
        } else {
            (&inv_f2, &f2)
        };
        let kk = Complex64::new(k as f64, 0.0);
        let next_t = antiderivative(&x_tilde[k - 1].zip_with(wt, |a, b| a * b * kk)?)?;
        let next = antiderivative(&x[k - 1].zip_with(w, |a, b| a * b * kk)?)?;
        x_tilde.push(next_t);
        x.push(next);
    }

    let mut phi = Vec::with_capacity(n + 1);
    let mut psi = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let (for_phi, for_psi) = if k % 2 == 1 {
            (&x[k], &x_tilde[k])
        } else {
            (&x_tilde[k], &x[k])
        };
        phi.push(for_phi.zip_with(&f, |a, b| a * b)?);
        psi.push(for_psi.zip_with(&inv_f, |a, b| a * b)?);
    }

    Ok(PhiBasis {
        f,
        h,
        phi,
        psi,
        x_tilde,
        x,
    })
}

pub(crate) fn check_non_vanishing(f: &SampledFunction) -> Result<()> {
    let (min_abs, max_abs) = (f.min_abs(), f.max_abs());
    if !(min_abs >= VANISHING_RATIO * max_abs) || max_abs == 0.0 {
        return Err(Error::VanishingF { min_abs, max_abs });
    }
    // a real f can cross zero between nodes without any small sample
    if f.is_real() && f.values().windows(2).any(|w| w[0].re * w[1].re < 0.0) {
        return Err(Error::VanishingF { min_abs, max_abs });
    }
    Ok(())
}

/// Generalized derivative `d_k^f[g]`: odd steps apply `f (d/dx)(. / f)`,
/// even steps `(1/f)(d/dx)(f .)`.
pub fn f_derivative(g: &SampledFunction, basis: &PhiBasis, k: usize) -> Result<SampledFunction> {
    if k > F_DERIVATIVE_CAP {
        return Err(Error::Capacity {
            what: "f-derivative order",
            requested: k,
            cap: F_DERIVATIVE_CAP,
        });
    }
    let f = basis.f();
    g.check_same_grid(f)?;
    let mut d = g.clone();
    for step in 1..=k {
        d = if step % 2 == 1 {
            d.zip_with(f, |a, b| a / b)?
                .derivative()?
                .zip_with(f, |a, b| a * b)?
        } else {
            d.zip_with(f, |a, b| a * b)?
                .derivative()?
                .zip_with(f, |a, b| a / b)?
        };
    }
    Ok(d)
}

/// A finite combination `sum_k alpha_k phi_k`.
#[derive(Clone, Debug)]
pub struct FPolynomial {
    basis: Arc<PhiBasis>,
    coeffs: Vec<Complex64>,
}

impl FPolynomial {
    pub fn new(basis: Arc<PhiBasis>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid(
                "an f-polynomial needs at least one coefficient",
            ));
        }
        basis.check_order(coeffs.len() - 1)?;
        Ok(FPolynomial { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<PhiBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        let stencil = self
            .basis
            .grid()
            .stencil(x, self.basis.f().interp_order())?;
        Ok(self
            .coeffs
            .iter()
            .zip(self.basis.phis())
            .map(|(a, p)| a * stencil.apply(p.values()))
            .sum())
    }

    /// Values on every grid node.
    pub fn sample(&self) -> Result<SampledFunction> {
        let grid = *self.basis.grid();
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (a, p) in self.coeffs.iter().zip(self.basis.phis()) {
            for (v, pv) in values.iter_mut().zip(p.values()) {
                *v += a * pv;
            }
        }
        self.basis.f().with_values(values)
    }
}

/// Evaluates `sum alpha_k phi_k(x)`.
pub fn fpoly_eval(p: &FPolynomial, x: f64) -> Result<Complex64> {
    p.eval(x)
}
