//! Remez exchange for real data.

use std::sync::Arc;

use super::{
    alternating_extrema, basis_matrix_real, initial_reference, require_real, select_window,
    tchebyshev_interpolation, ApproxResult, ReferenceKind, ReferenceSet,
};
use crate::basis::{FPolynomial, PhiBasis, SampledFunction};
use crate::error::{Error, Result};

pub const DEFAULT_REMEZ_TOL: f64 = 1e-10;
pub const DEFAULT_REMEZ_MAX_ITER: usize = 50;

/// A deviation this small relative to `max |g|` counts as an exact fit.
const ROUNDING_FLOOR: f64 = 1e-13;

/// Relative drop in `|E|` tolerated before the run counts as stagnated.
const STAGNATION_SLACK: f64 = 1e-12;

/// Differences in `E` or `D` below this times `max |g|` are rounding noise
/// of the linear solve and the residual evaluation.
const LEVEL_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exchange {
    /// Swap one reference point for the global maximizer.
    Single,
    /// Re-pick one extremum between each pair of residual zeros.
    General,
}

#[derive(Clone, Debug)]
pub struct RemezOptions {
    pub exchange: Exchange,
    pub tol: f64,
    pub max_iter: usize,
    pub initial: ReferenceKind,
}

impl Default for RemezOptions {
    fn default() -> Self {
        RemezOptions {
            exchange: Exchange::General,
            tol: DEFAULT_REMEZ_TOL,
            max_iter: DEFAULT_REMEZ_MAX_ITER,
            initial: ReferenceKind::LsqExtrema,
        }
    }
}

struct Residual<'a> {
    g: &'a SampledFunction,
    basis: &'a PhiBasis,
    coeffs: Vec<f64>,
    nodes: Vec<f64>,
}

impl Residual<'_> {
    fn at(&self, x: f64) -> Result<f64> {
        let phi = self.basis.phi_at(x, self.coeffs.len() - 1)?;
        let p: f64 = phi.iter().zip(&self.coeffs).map(|(v, c)| v.re * c).sum();
        Ok(self.g.eval(x)?.re - p)
    }

    /// Three-point parabolic refinement of an interior node extremum.
    fn refine(&self, i: usize) -> Result<(f64, f64)> {
        let x = self.basis.grid().node(i);
        let r = &self.nodes;
        if i == 0 || i + 1 == r.len() {
            return Ok((x, r[i]));
        }
        let denom = r[i - 1] - 2.0 * r[i] + r[i + 1];
        if denom == 0.0 {
            return Ok((x, r[i]));
        }
        let s = (0.5 * (r[i - 1] - r[i + 1]) / denom).clamp(-0.5, 0.5);
        if s == 0.0 {
            return Ok((x, r[i]));
        }
        let xs = x + s * self.basis.grid().spacing();
        let rs = self.at(xs)?;
        if rs.abs() > r[i].abs() && rs.signum() == r[i].signum() {
            Ok((xs, rs))
        } else {
            Ok((x, r[i]))
        }
    }
}

/// Best uniform approximation of real `g` by `sum_{k<=n} c_k phi_k`.
///
/// Stops when `(D - |E|) / D < tol`. A drop in `|E|` returns
/// [`Error::Stagnation`] and running out of iterations returns
/// [`Error::IterationCap`]; both carry the iterate with the smallest `D`.
pub fn remez(
    g: &SampledFunction,
    basis: &Arc<PhiBasis>,
    n: usize,
    opts: &RemezOptions,
) -> Result<ApproxResult> {
    require_real(basis, Some(g))?;
    basis.check_order(n)?;
    g.check_same_grid(basis.f())?;
    if opts.max_iter == 0 || !(opts.tol > 0.0) {
        return Err(Error::invalid("Remez needs max_iter >= 1 and tol > 0"));
    }
    let rows = basis_matrix_real(basis, n);
    let g_norm = g.max_abs();
    let mut refset = initial_reference(opts.initial, basis, n, g)?;
    let mut history: Vec<(f64, f64)> = Vec::new();
    let mut best: Option<ApproxResult> = None;
    let mut prev_e = 0.0;

    for it in 1..=opts.max_iter {
        let g_ref = refset
            .points()
            .iter()
            .map(|&x| g.eval(x))
            .collect::<Result<Vec<_>>>()?;
        let (coeffs, e) = tchebyshev_interpolation(&g_ref, &refset, basis, n)?;
        let c: Vec<f64> = coeffs.iter().map(|v| v.re).collect();
        let nodes: Vec<f64> = rows
            .iter()
            .zip(g.values())
            .map(|(row, gv)| gv.re - row.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let residual = Residual {
            g,
            basis,
            coeffs: c,
            nodes,
        };
        let e_abs = e.re.abs();
        // D: refined local extrema, never below the levelled error that the
        // residual attains on the reference itself
        let (mut xmax, mut rmax) = residual.refine(argmax_abs(&residual.nodes))?;
        let extrema = alternating_extrema(&residual.nodes, 0.0);
        let refined = extrema
            .iter()
            .map(|&i| residual.refine(i))
            .collect::<Result<Vec<_>>>()?;
        for &(x, r) in &refined {
            if r.abs() > rmax.abs() {
                (xmax, rmax) = (x, r);
            }
        }
        let d = rmax.abs().max(e_abs);
        history.push((e_abs, d));
        log::debug!("Remez iteration {it}: |E| = {e_abs:e}, D = {d:e}");

        let result = ApproxResult {
            poly: FPolynomial::new(basis.clone(), coeffs)?,
            e,
            d,
            iterations: it,
            history: history.clone(),
            reference: Some(refset.clone()),
        };
        if best.as_ref().is_none_or(|b| d < b.d) {
            best = Some(result.clone());
        }
        let noise = LEVEL_FLOOR * g_norm;
        if d <= ROUNDING_FLOOR * g_norm || (d - e_abs) / d < opts.tol || d - e_abs <= noise {
            return Ok(result);
        }
        let best_now = best.as_ref().expect("set above");
        if it > 1 && e_abs < prev_e * (1.0 - STAGNATION_SLACK) - noise {
            return Err(Error::Stagnation {
                iteration: it,
                previous: prev_e,
                current: e_abs,
                best_deviation: best_now.d,
                best: Box::new(best_now.clone()),
            });
        }
        prev_e = e_abs;

        let next = match opts.exchange {
            Exchange::Single => single_exchange(&refset, e.re, xmax, rmax),
            Exchange::General => general_exchange(&residual, &extrema, &refined, n),
        };
        match next {
            Some(next) if next != refset => refset = next,
            _ => {
                return Err(Error::Stagnation {
                    iteration: it,
                    previous: prev_e,
                    current: e_abs,
                    best_deviation: best_now.d,
                    best: Box::new(best_now.clone()),
                })
            }
        }
    }
    let best = best.expect("at least one iteration ran");
    Err(Error::IterationCap {
        iterations: opts.max_iter,
        best_deviation: best.d,
        best: Box::new(best),
    })
}

fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

/// Sign-preserving single-point exchange.
fn single_exchange(refset: &ReferenceSet, e: f64, x: f64, r: f64) -> Option<ReferenceSet> {
    let pts = refset.points();
    let last = pts.len() - 1;
    // residual at x_j is (-1)^j E
    let sign_at = |j: usize| {
        if j.is_multiple_of(2) {
            e.signum()
        } else {
            -e.signum()
        }
    };
    let s = r.signum();
    let mut next = pts.to_vec();
    if pts.contains(&x) {
        return None;
    }
    if x < pts[0] {
        if sign_at(0) == s {
            next[0] = x;
        } else {
            next.pop();
            next.insert(0, x);
        }
    } else if x > pts[last] {
        if sign_at(last) == s {
            next[last] = x;
        } else {
            next.remove(0);
            next.push(x);
        }
    } else {
        let j = pts.partition_point(|&p| p < x) - 1;
        if sign_at(j) == s {
            next[j] = x;
        } else {
            next[j + 1] = x;
        }
    }
    ReferenceSet::new(next).ok()
}

/// One extremum per sign run of the residual, trimmed to `n + 2` points.
fn general_exchange(
    residual: &Residual<'_>,
    extrema: &[usize],
    refined: &[(f64, f64)],
    n: usize,
) -> Option<ReferenceSet> {
    let values: Vec<f64> = refined.iter().map(|p| p.1).collect();
    let order: Vec<usize> = (0..refined.len()).collect();
    let Some(kept) = select_window(&order, &values, n + 2) else {
        log::debug!(
            "residual has {} sign runs, fewer than {}; no general exchange possible",
            extrema.len(),
            n + 2
        );
        return None;
    };
    let mut points: Vec<f64> = kept.iter().map(|&k| refined[k].0).collect();
    if !points.windows(2).all(|w| w[0] < w[1]) {
        // refinements of neighbouring nodes crossed; fall back to nodes
        points = kept
            .iter()
            .map(|&k| residual.basis.grid().node(extrema[k]))
            .collect();
    }
    ReferenceSet::new(points).ok()
}
