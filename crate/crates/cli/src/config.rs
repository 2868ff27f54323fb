//! JSON problem configuration.

use std::path::Path;

use kleinwave::approx::{
    Exchange, ReferenceKind, RemezOptions, DEFAULT_LP_ANGLES, DEFAULT_LP_GRID_N,
};
use kleinwave::basis::{Grid, SampledFunction, DEFAULT_GRID_N, DEFAULT_INTERP_ORDER};
use kleinwave::cauchy::{
    CauchyProblem, SolveOptions, SpectralData, Strategy, DEFAULT_MESH_DIVISIONS,
};
use kleinwave::problems::{self, ExampleId, EXPRESSION_IDS};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::CliError;

pub const GRID_ENV: &str = "KLEINWAVE_GRID_N";
pub const DEFAULT_PRECISION: usize = 17;

/// A real number or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::Real(0.0)
    }
}

impl Scalar {
    pub fn value(self) -> Complex64 {
        match self {
            Scalar::Real(re) => Complex64::new(re, 0.0),
            Scalar::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        value: Scalar,
    },
    /// One value per grid node, left to right.
    Table {
        values: Vec<Scalar>,
    },
    Expression {
        id: String,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralEntry {
    pub lambda: Scalar,
    pub v0: Scalar,
    pub v0p: Scalar,
}

impl From<&SpectralEntry> for SpectralData {
    fn from(s: &SpectralEntry) -> Self {
        SpectralData {
            lambda: s.lambda.value(),
            v0: s.v0.value(),
            v0p: s.v0p.value(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSpec {
    pub g: SpectralEntry,
    pub h: SpectralEntry,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemezSpec {
    /// `single` or `general`.
    pub exchange: Option<String>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// `chebyshev` or `lsq_extrema`.
    pub initial: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpSpec {
    pub grid_n: Option<usize>,
    pub angles: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Prefix of the output files.
    pub name: Option<String>,
    pub b: f64,
    pub grid_n: Option<usize>,
    pub q: FunctionSpec,
    pub g: Option<FunctionSpec>,
    pub h: Option<FunctionSpec>,
    /// `f'(0)` of the particular solution.
    #[serde(default)]
    pub slope: Scalar,
    pub strategy: Option<String>,
    /// Pairs `P_n` with `Q_{n-1}`; `n_g`, `n_h` override either side.
    pub n: Option<usize>,
    pub n_g: Option<usize>,
    pub n_h: Option<usize>,
    /// Scan orders up to this bound when none is given.
    pub auto_max: Option<usize>,
    pub spectral: Option<SpectralSpec>,
    /// Example whose exact solution applies.
    pub exact: Option<String>,
    pub mesh_step: Option<f64>,
    #[serde(rename = "kernel_M")]
    pub kernel_m: Option<usize>,
    pub precision: Option<usize>,
    pub remez: Option<RemezSpec>,
    pub lp: Option<LpSpec>,
    #[serde(default)]
    pub strict: bool,
}

/// Grid resolution: the environment override, else the default.
pub fn env_grid_n() -> Result<usize, CliError> {
    match std::env::var(GRID_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| {
            CliError::config(
                GRID_ENV,
                format!("expected a positive even integer, got {s:?}"),
            )
        }),
        Err(_) => Ok(DEFAULT_GRID_N),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orders {
    Fixed(usize, usize),
    Auto(usize),
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Config, CliError> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| {
            CliError::config(
                origin,
                format!("line {}, column {}: {e}", e.line(), e.column()),
            )
        })?;
        if !(cfg.b > 0.0 && cfg.b.is_finite()) {
            return Err(CliError::config(
                origin,
                format!("field `b`: must be positive, got {}", cfg.b),
            ));
        }
        if let Some(p) = cfg.precision {
            if !(1..=17).contains(&p) {
                return Err(CliError::config(
                    origin,
                    format!("field `precision`: expected 1..=17, got {p}"),
                ));
            }
        }
        Ok(cfg)
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("solution")
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let n = match self.grid_n {
            Some(n) => n,
            None => env_grid_n()?,
        };
        Grid::new(self.b, n).map_err(|e| CliError::config("grid_n", e.to_string()))
    }

    pub fn precision(&self) -> usize {
        self.precision.unwrap_or(DEFAULT_PRECISION)
    }

    pub fn mesh_step(&self) -> f64 {
        self.mesh_step
            .unwrap_or(self.b / DEFAULT_MESH_DIVISIONS as f64)
    }

    pub fn strategy(&self) -> Result<Strategy, CliError> {
        let s = self.strategy.as_deref().unwrap_or("remez");
        s.parse()
            .map_err(|e: kleinwave::Error| CliError::config("strategy", e.to_string()))
    }

    pub fn orders(&self) -> Result<Orders, CliError> {
        let paired = self.n.map(|n| (n, n.saturating_sub(1)));
        match (
            self.n_g.or(paired.map(|p| p.0)),
            self.n_h.or(paired.map(|p| p.1)),
        ) {
            (Some(g), Some(h)) => Ok(Orders::Fixed(g, h)),
            (None, None) => match self.auto_max {
                Some(m) => Ok(Orders::Auto(m)),
                None => Err(CliError::config(
                    "n",
                    "set `n`, both `n_g` and `n_h`, or `auto_max`",
                )),
            },
            _ => Err(CliError::config(
                "n_g",
                "`n_g` and `n_h` must be given together unless `n` is set",
            )),
        }
    }

    pub fn solve_options(
        &self,
        strategy: Strategy,
        n_g: usize,
        n_h: usize,
    ) -> Result<SolveOptions, CliError> {
        let mut opts = SolveOptions::orders(strategy, n_g, n_h);
        opts.strict = self.strict;
        opts.remez = remez_options(self.remez.as_ref().unwrap_or(&RemezSpec::default()))?;
        let lp = self.lp.clone().unwrap_or_default();
        opts.lp_grid_n = lp.grid_n.unwrap_or(DEFAULT_LP_GRID_N);
        opts.lp_angles = lp.angles.unwrap_or(DEFAULT_LP_ANGLES);
        Ok(opts)
    }

    pub fn sample(
        &self,
        field: &str,
        spec: &FunctionSpec,
        grid: Grid,
    ) -> Result<SampledFunction, CliError> {
        let values = match spec {
            FunctionSpec::Constant { value } => vec![value.value(); grid.len()],
            FunctionSpec::Table { values } => {
                if values.len() != grid.len() {
                    return Err(CliError::config(
                        format!("field `{field}.values`"),
                        format!(
                            "expected {} entries (grid_n = {} subintervals), got {}",
                            grid.len(),
                            grid.intervals(),
                            values.len()
                        ),
                    ));
                }
                values.iter().map(|v| v.value()).collect()
            }
            FunctionSpec::Expression { id } => {
                let f = problems::expression(id).ok_or_else(|| {
                    CliError::config(
                        format!("field `{field}.id`"),
                        format!(
                            "unknown expression {id:?}; known: {}",
                            EXPRESSION_IDS.join(", ")
                        ),
                    )
                })?;
                grid.nodes().into_iter().map(f).collect()
            }
        };
        if let Some(i) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(CliError::config(
                format!("field `{field}`"),
                format!("non-finite value at node {i}"),
            ));
        }
        Ok(SampledFunction::new(grid, values, DEFAULT_INTERP_ORDER)?)
    }

    pub fn problem(&self) -> Result<CauchyProblem, CliError> {
        let grid = self.grid()?;
        let q = self.sample("q", &self.q, grid)?;
        let g = self.sample(
            "g",
            self.g
                .as_ref()
                .ok_or_else(|| CliError::config("g", "missing field `g`"))?,
            grid,
        )?;
        let h = self.sample(
            "h",
            self.h
                .as_ref()
                .ok_or_else(|| CliError::config("h", "missing field `h`"))?,
            grid,
        )?;
        let mut p = CauchyProblem::new(q, g, h)?.with_slope(self.slope.value());
        if let Some(s) = &self.spectral {
            p = p.with_spectral((&s.g).into(), (&s.h).into());
        }
        if let Some(name) = &self.exact {
            let id: ExampleId = name
                .parse()
                .map_err(|e: kleinwave::Error| CliError::config("field `exact`", e.to_string()))?;
            p.exact = problems::example(id, 8)?.exact;
        }
        Ok(p)
    }
}

fn remez_options(spec: &RemezSpec) -> Result<RemezOptions, CliError> {
    let mut opts = RemezOptions::default();
    if let Some(e) = &spec.exchange {
        opts.exchange = match e.as_str() {
            "single" => Exchange::Single,
            "general" => Exchange::General,
            other => {
                return Err(CliError::config(
                    "field `remez.exchange`",
                    format!("expected single or general, got {other:?}"),
                ))
            }
        };
    }
    if let Some(i) = &spec.initial {
        opts.initial = match i.as_str() {
            "chebyshev" => ReferenceKind::Chebyshev,
            "lsq_extrema" => ReferenceKind::LsqExtrema,
            other => {
                return Err(CliError::config(
                    "field `remez.initial`",
                    format!("expected chebyshev or lsq_extrema, got {other:?}"),
                ))
            }
        };
    }
    if let Some(t) = spec.tol {
        opts.tol = t;
    }
    if let Some(m) = spec.max_iter {
        opts.max_iter = m;
    }
    Ok(opts)
}
