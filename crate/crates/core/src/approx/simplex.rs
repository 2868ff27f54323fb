//! Dense two-phase primal simplex for `max c.x` subject to `A x = b`, `x >= 0`.
//!
//! Revised form: the basis matrix is refactored from scratch every pivot,
//! which is cheap for the few dozen rows this crate produces and keeps
//! rounding from accumulating across thousands of columns. Pricing is
//! Dantzig's rule; after a run of degenerate pivots it switches to Bland's
//! rule until the objective moves again.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const OPT_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 50_000;

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Multipliers `pi` of the equality rows; `c_j <= pi . A_j` at optimum.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

struct Tableau {
    /// `[A | I]` with rows sign-flipped so that `b >= 0`.
    a: DMatrix<f64>,
    b: DVector<f64>,
    n: usize,
    basis: Vec<usize>,
    iterations: usize,
}

struct Factored {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    lu_t: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    x_b: DVector<f64>,
}

impl Tableau {
    fn factor(&self) -> Result<Factored> {
        let bm = self.a.select_columns(&self.basis);
        let lu_t = bm.transpose().lu();
        let lu = bm.lu();
        let x_b = lu
            .solve(&self.b)
            .ok_or_else(|| Error::LinearProgram("singular basis".into()))?;
        Ok(Factored { lu, lu_t, x_b })
    }

    fn duals(&self, f: &Factored, cost: &[f64]) -> Result<DVector<f64>> {
        let c_b = DVector::from_iterator(self.basis.len(), self.basis.iter().map(|&j| cost[j]));
        f.lu_t
            .solve(&c_b)
            .ok_or_else(|| Error::LinearProgram("singular basis".into()))
    }

    fn objective(&self, f: &Factored, cost: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(f.x_b.iter())
            .map(|(&j, v)| cost[j] * v)
            .sum()
    }

    /// Runs pivots until no allowed column has a positive reduced cost.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<()> {
        let mut degenerate = 0usize;
        let mut is_basic = vec![false; self.a.ncols()];
        for &j in &self.basis {
            is_basic[j] = true;
        }
        loop {
            if self.iterations >= MAX_PIVOTS {
                return Err(Error::LinearProgram(format!(
                    "no optimum after {MAX_PIVOTS} pivots"
                )));
            }
            let f = self.factor()?;
            let pi = self.duals(&f, cost)?;
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..allowed {
                if is_basic[j] {
                    continue;
                }
                let r = cost[j] - self.a.column(j).dot(&pi);
                if r <= OPT_TOL {
                    continue;
                }
                if bland {
                    entering = Some((j, r));
                    break;
                }
                if entering.is_none_or(|(_, best)| r > best) {
                    entering = Some((j, r));
                }
            }
            let Some((q, _)) = entering else {
                return Ok(());
            };
            let u =
                f.lu.solve(&self.a.column(q).into_owned())
                    .ok_or_else(|| Error::LinearProgram("singular basis".into()))?;
            let tol = PIVOT_TOL * u.amax().max(1.0);
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..u.len() {
                if u[i] <= tol {
                    continue;
                }
                let ratio = f.x_b[i].max(0.0) / u[i];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((l, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * best.abs().max(1e-300);
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[l]
                            } else {
                                u[i] > u[l]
                            }
                        } else {
                            ratio < best
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((l, best))
                        }
                    }
                };
            }
            let Some((p, step)) = leave else {
                return Err(Error::LinearProgram("objective is unbounded".into()));
            };
            if step <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            is_basic[self.basis[p]] = false;
            is_basic[q] = true;
            self.basis[p] = q;
            self.iterations += 1;
        }
    }
}

/// Maximizes `c.x` subject to `A x = b`, `x >= 0`.
pub fn maximize(a: &DMatrix<f64>, b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let (m, n) = a.shape();
    if b.len() != m || c.len() != n || m == 0 {
        return Err(Error::invalid(format!(
            "LP shape mismatch: A is {m}x{n}, b has {}, c has {}",
            b.len(),
            c.len()
        )));
    }
    if a.iter().chain(b).chain(c).any(|v| !v.is_finite()) {
        return Err(Error::invalid("LP data must be finite"));
    }
    let signs: Vec<f64> = b
        .iter()
        .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let mut aug = DMatrix::<f64>::zeros(m, n + m);
    for j in 0..n {
        for i in 0..m {
            aug[(i, j)] = a[(i, j)] * signs[i];
        }
    }
    for i in 0..m {
        aug[(i, n + i)] = 1.0;
    }
    let bvec = DVector::from_iterator(m, b.iter().zip(&signs).map(|(v, s)| v * s));
    let mut t = Tableau {
        a: aug,
        b: bvec,
        n,
        basis: (n..n + m).collect(),
        iterations: 0,
    };

    // phase 1: drive the artificial variables to zero
    let phase1: Vec<f64> = (0..n + m).map(|j| if j < n { 0.0 } else { -1.0 }).collect();
    t.optimize(&phase1, n + m)?;
    let f = t.factor()?;
    let infeas = -t.objective(&f, &phase1);
    if infeas > 1e-9 * (1.0 + t.b.amax()) {
        return Err(Error::LinearProgram(format!(
            "infeasible (phase-one residual {infeas:e})"
        )));
    }
    t.expel_artificials()?;

    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat_n(0.0, m));
    t.optimize(&phase2, n)?;

    let f = t.factor()?;
    let pi = t.duals(&f, &phase2)?;
    let mut x = vec![0.0; n];
    for (&j, v) in t.basis.iter().zip(f.x_b.iter()) {
        if j < n {
            x[j] = v.max(0.0);
        }
    }
    Ok(LpSolution {
        objective: x.iter().zip(c).map(|(a, b)| a * b).sum(),
        x,
        duals: pi.iter().zip(&signs).map(|(p, s)| p * s).collect(),
        iterations: t.iterations,
    })
}

impl Tableau {
    /// Pivots zero-valued artificials out of the basis where a structural
    /// column can replace them; the rest sit on redundant rows.
    fn expel_artificials(&mut self) -> Result<()> {
        for p in 0..self.basis.len() {
            if self.basis[p] < self.n {
                continue;
            }
            let f = self.factor()?;
            let mut e = DVector::zeros(self.basis.len());
            e[p] = 1.0;
            let rho = f
                .lu_t
                .solve(&e)
                .ok_or_else(|| Error::LinearProgram("singular basis".into()))?;
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.basis.contains(&j) {
                    continue;
                }
                let v = self.a.column(j).dot(&rho).abs();
                if v > PIVOT_TOL && best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((j, v));
                }
            }
            match best {
                Some((j, _)) => {
                    self.basis[p] = j;
                    self.iterations += 1;
                }
                None => log::debug!("LP row {p} is redundant"),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn small_problem() {
        // max 3x + 2y, x + y <= 4, x + 3y <= 6
        let a = mat(&[&[1.0, 1.0, 1.0, 0.0], &[1.0, 3.0, 0.0, 1.0]]);
        let s = maximize(&a, &[4.0, 6.0], &[3.0, 2.0, 0.0, 0.0]).unwrap();
        assert!((s.objective - 12.0).abs() < 1e-12);
        assert!((s.x[0] - 4.0).abs() < 1e-12);
        assert!((s.duals[0] - 3.0).abs() < 1e-12);
        assert!(s.duals[1].abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = mat(&[&[1.0, 1.0]]);
        assert!(matches!(
            maximize(&a, &[-1.0], &[1.0, 0.0]),
            Err(Error::LinearProgram(_))
        ));
        let a = mat(&[&[1.0, -1.0]]);
        assert!(matches!(
            maximize(&a, &[0.0], &[1.0, 0.0]),
            Err(Error::LinearProgram(_))
        ));
    }

    #[test]
    fn cycling_example_terminates() {
        // a classical problem on which textbook Dantzig pivoting cycles
        let a = mat(&[
            &[1.0, 0.0, 0.0, 0.25, -8.0, -1.0, 9.0],
            &[0.0, 1.0, 0.0, 0.5, -12.0, -0.5, 3.0],
            &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
        ]);
        let c = [0.0, 0.0, 0.0, 0.75, -20.0, 0.5, -6.0];
        let s = maximize(&a, &[0.0, 0.0, 1.0], &c).unwrap();
        assert!((s.objective - 1.25).abs() < 1e-12);
    }

    #[test]
    fn redundant_row() {
        let a = mat(&[&[1.0, 1.0, 0.0], &[2.0, 2.0, 0.0], &[0.0, 1.0, 1.0]]);
        let s = maximize(&a, &[1.0, 2.0, 1.0], &[1.0, 2.0, 0.0]).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-12);
    }

    /// Best basic feasible solution by enumerating every basis.
    fn brute_force(a: &DMatrix<f64>, b: &[f64], c: &[f64]) -> Option<f64> {
        let (m, n) = a.shape();
        let mut best: Option<f64> = None;
        let mut idx: Vec<usize> = (0..m).collect();
        loop {
            let bm = a.select_columns(&idx);
            if bm.determinant().abs() > 1e-9 {
                let xb = bm.lu().solve(&DVector::from_column_slice(b)).unwrap();
                if xb.iter().all(|v| *v >= -1e-9) {
                    let obj: f64 = idx.iter().zip(xb.iter()).map(|(&j, v)| c[j] * v).sum();
                    best = Some(best.map_or(obj, |b: f64| b.max(obj)));
                }
            }
            // next combination
            let mut k = m;
            loop {
                if k == 0 {
                    return best;
                }
                k -= 1;
                if idx[k] < n - m + k {
                    idx[k] += 1;
                    for r in k + 1..m {
                        idx[r] = idx[r - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    proptest! {
        #[test]
        fn matches_vertex_enumeration(
            entries in proptest::collection::vec(-3i32..4, 18),
            rhs in proptest::collection::vec(0i32..5, 3),
            cost in proptest::collection::vec(-3i32..4, 6),
        ) {
            // a last row sum_j x_j + s = 10 keeps the feasible set bounded
            let mut a = DMatrix::from_fn(3, 6, |i, j| entries[i * 6 + j] as f64);
            a = a.insert_row(3, 1.0);
            a = a.insert_column(6, 0.0);
            a[(3, 6)] = 1.0;
            let mut b: Vec<f64> = rhs.iter().map(|&v| v as f64).collect();
            b.push(10.0);
            let mut c: Vec<f64> = cost.iter().map(|&v| v as f64).collect();
            c.push(0.0);
            prop_assume!(a.rank(1e-9) == 4);
            let want = brute_force(&a, &b, &c);
            match (maximize(&a, &b, &c), want) {
                (Ok(s), Some(w)) => prop_assert!((s.objective - w).abs() <= 1e-8 * (1.0 + w.abs())),
                (Err(Error::LinearProgram(_)), None) => {}
                (got, want) => prop_assert!(false, "simplex {:?} vs enumeration {:?}", got.map(|s| s.objective), want),
            }
        }
    }
}
