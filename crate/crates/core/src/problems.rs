//! Built-in test problems with closed-form data and exact solutions, and a
//! registry of named closed-form functions for configuration files.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::{Grid, SampledFunction, DEFAULT_INTERP_ORDER};
use crate::cauchy::{CauchyProblem, SpectralData, Strategy};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExampleId {
    /// `q = 9`, `g = cosh(sqrt(8) x)`, `h = 1` on `[-2, 2]`.
    Ex1,
    /// `q = -25`, `g = cos(sqrt(26) x)`, `h = 1` on `[-2, 2]`.
    Ex2,
    /// `q = x^2`, `g = e^{x^2/2} (1 + int_0^x e^{-s^2})`, `h = x e^{x^2/2}`.
    Ex3,
}

impl ExampleId {
    pub const ALL: [ExampleId; 3] = [ExampleId::Ex1, ExampleId::Ex2, ExampleId::Ex3];

    pub fn name(self) -> &'static str {
        match self {
            ExampleId::Ex1 => "ex1",
            ExampleId::Ex2 => "ex2",
            ExampleId::Ex3 => "ex3",
        }
    }

    /// Orders `(n_g, n_h)` used for each strategy.
    pub fn orders(self, strategy: Strategy) -> (usize, usize) {
        match (self, strategy) {
            (ExampleId::Ex1, Strategy::Taylor) | (ExampleId::Ex3, Strategy::Taylor) => (20, 19),
            (ExampleId::Ex2, Strategy::Taylor) => (50, 49),
            (ExampleId::Ex1, _) => (11, 18),
            (ExampleId::Ex2, _) => (14, 25),
            (ExampleId::Ex3, _) => (16, 19),
        }
    }

    /// Strategy used when none is requested.
    pub fn default_strategy(self) -> Strategy {
        match self {
            ExampleId::Ex2 => Strategy::Lp,
            _ => Strategy::Remez,
        }
    }
}

impl std::str::FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                Error::Configuration(format!("unknown example {s:?} (expected ex1, ex2 or ex3)"))
            })
    }
}

pub const EXAMPLE_B: f64 = 2.0;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ex3_g(x: f64) -> f64 {
    (x * x / 2.0).exp() * (1.0 + 0.5 * PI.sqrt() * libm::erf(x))
}

fn ex3_h(x: f64) -> f64 {
    x * (x * x / 2.0).exp()
}

/// Builds the named example on `grid_n` subintervals of `[-2, 2]`.
pub fn example(id: ExampleId, grid_n: usize) -> Result<CauchyProblem> {
    let grid = Grid::new(EXAMPLE_B, grid_n)?;
    let sample = |name: &str| {
        let f = expression(name).expect("registry covers the examples");
        SampledFunction::from_fn(grid, DEFAULT_INTERP_ORDER, f)
    };
    let name = id.name();
    let problem = CauchyProblem::new(
        sample(&format!("{name}_q"))?,
        sample(&format!("{name}_g"))?,
        sample(&format!("{name}_h"))?,
    )?;
    let problem = match id {
        ExampleId::Ex1 => {
            // v'' - 9 v = lambda v: lambda = -1 for g, -9 for h = 1
            let exact =
                |x: f64, t: f64| c((3.0 * t).sin() / 3.0 + t.cos() * (8f64.sqrt() * x).cosh());
            problem
                .with_slope(c(3.0))
                .with_spectral(
                    SpectralData {
                        lambda: c(-1.0),
                        v0: c(1.0),
                        v0p: c(0.0),
                    },
                    SpectralData {
                        lambda: c(-9.0),
                        v0: c(1.0),
                        v0p: c(0.0),
                    },
                )
                .with_exact(Arc::new(exact))
        }
        ExampleId::Ex2 => {
            // f = e^{5ix}; lambda = -1 for g, 25 for h = 1
            let exact =
                |x: f64, t: f64| c((5.0 * t).sinh() / 5.0 + t.cos() * (26f64.sqrt() * x).cos());
            problem
                .with_slope(Complex64::new(0.0, 5.0))
                .with_spectral(
                    SpectralData {
                        lambda: c(-1.0),
                        v0: c(1.0),
                        v0p: c(0.0),
                    },
                    SpectralData {
                        lambda: c(25.0),
                        v0: c(1.0),
                        v0p: c(0.0),
                    },
                )
                .with_exact(Arc::new(exact))
        }
        ExampleId::Ex3 => {
            // u_t(x, 0) = h forces the 1/sqrt(3) on the sinh term
            let s3 = 3f64.sqrt();
            let exact =
                move |x: f64, t: f64| c(ex3_g(x) * t.cosh() + ex3_h(x) * (s3 * t).sinh() / s3);
            problem
                .with_slope(c(0.0))
                .with_spectral(
                    SpectralData {
                        lambda: c(1.0),
                        v0: c(1.0),
                        v0p: c(1.0),
                    },
                    SpectralData {
                        lambda: c(3.0),
                        v0: c(0.0),
                        v0p: c(1.0),
                    },
                )
                .with_exact(Arc::new(exact))
        }
    };
    Ok(problem)
}

/// Closed-form functions addressable by name from configuration files.
pub fn expression(id: &str) -> Option<fn(f64) -> Complex64> {
    let f: fn(f64) -> Complex64 = match id {
        "zero" => |_| c(0.0),
        "one" => |_| c(1.0),
        "x" => c,
        "x2" => |x| c(x * x),
        "ex1_q" => |_| c(9.0),
        "ex1_g" => |x| c((8f64.sqrt() * x).cosh()),
        "ex1_h" | "ex2_h" => |_| c(1.0),
        "ex2_q" => |_| c(-25.0),
        "ex2_g" => |x| c((26f64.sqrt() * x).cos()),
        "ex3_q" => |x| c(x * x),
        "ex3_g" => |x| c(ex3_g(x)),
        "ex3_h" => |x| c(ex3_h(x)),
        _ => return None,
    };
    Some(f)
}

/// Names accepted by [`expression`].
pub const EXPRESSION_IDS: [&str; 13] = [
    "zero", "one", "x", "x2", "ex1_q", "ex1_g", "ex1_h", "ex2_q", "ex2_g", "ex2_h", "ex3_q",
    "ex3_g", "ex3_h",
];
