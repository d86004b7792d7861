//! Solvers for `max c.x  s.t.  0 <= A x <= f,  x in {0,1}^n` with `A >= 0`.
//!
//! [`solve_lp`] solves the box relaxation with a bounded-variable revised
//! simplex, [`solve_ilp`] runs depth-first branch and bound on top of it, and
//! [`brute_force`] enumerates every subset for verification.
//!
//! Because `A` is non-negative and every row's lower bound is zero, any
//! point obtained by lowering variables of a feasible point stays feasible.
//! The simplex therefore always starts from the all-lower-bounds vertex and
//! needs no phase one, and rounding a relaxed solution down always yields a
//! feasible incumbent.

use crate::constraints::ConstraintSystem;
use crate::error::{Error, Result};

/// Row feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// Smallest pivot element accepted by the ratio test.
pub const PIVOT_TOL: f64 = 1e-9;
/// A relaxed value within this distance of 0 or 1 counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Branch-and-bound node cap.
pub const MAX_NODES: usize = 1_000_000;
/// Largest column count [`brute_force`] accepts.
pub const MAX_BRUTE_FORCE_COLS: usize = 25;

const REDUCED_COST_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlpSolution {
    pub values: Vec<bool>,
    pub objective: f64,
    pub nodes_explored: usize,
    /// Relaxation optimum at the root, for gap diagnostics; `None` if the
    /// simplex stopped at its iteration cap.
    pub root_lp_objective: Option<f64>,
}

impl IlpSolution {
    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|b| f64::from(u8::from(*b))).collect()
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().enumerate().filter(|(_, b)| **b).map(|(j, _)| j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

/// Bounded-variable revised simplex over `[A | -I] (x, r) = 0`, with
/// `lower <= x <= upper` and `0 <= r <= f`.
struct Simplex<'a> {
    cs: &'a ConstraintSystem,
    n: usize,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    value: Vec<f64>,
    state: Vec<VarState>,
    /// `basis[i]` is the variable basic in row position `i`.
    basis: Vec<usize>,
    /// Dense row-major basis inverse.
    binv: Vec<f64>,
    pivots_since_refactor: usize,
}

impl<'a> Simplex<'a> {
    fn new(cs: &'a ConstraintSystem, lower: &[f64], upper: &[f64], row_upper: &[f64]) -> Self {
        let n = cs.cols();
        let m = cs.rows();
        let mut lo = lower.to_vec();
        let mut up = upper.to_vec();
        lo.extend(std::iter::repeat_n(0.0, m));
        up.extend_from_slice(row_upper);
        let mut cost = cs.objective.clone();
        cost.extend(std::iter::repeat_n(0.0, m));

        let mut value = lo.clone();
        let activity = cs.matrix.mul(&lower[..n]);
        value[n..].copy_from_slice(&activity);

        let mut state = vec![VarState::AtLower; n + m];
        for s in &mut state[n..] {
            *s = VarState::Basic;
        }
        let basis: Vec<usize> = (n..n + m).collect();
        // B = -I.
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = -1.0;
        }
        Simplex {
            cs,
            n,
            m,
            lower: lo,
            upper: up,
            cost,
            value,
            state,
            basis,
            binv,
            pivots_since_refactor: 0,
        }
    }

    /// Column `j` of `[A | -I]` as sparse entries.
    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            self.cs.matrix.column(j).to_vec()
        } else {
            vec![(j - self.n, -1.0)]
        }
    }

    fn ftran(&self, col: &[(usize, f64)]) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for (k, a) in col {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.binv[i * m + k] * a;
            }
        }
        out
    }

    /// Simplex multipliers `y = c_B B^-1`.
    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &var) in self.basis.iter().enumerate() {
            let c = self.cost[var];
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, b) in y.iter_mut().zip(row) {
                    *yk += c * b;
                }
            }
        }
        y
    }

    /// Smallest-index improving variable (Bland) and its direction.
    fn entering(&self, y: &[f64]) -> Option<(usize, f64)> {
        for j in 0..self.n + self.m {
            let st = self.state[j];
            if st == VarState::Basic || self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            let d = if j < self.n {
                self.cost[j]
                    - self
                        .cs
                        .matrix
                        .column(j)
                        .iter()
                        .map(|(i, a)| y[*i] * a)
                        .sum::<f64>()
            } else {
                y[j - self.n]
            };
            match st {
                VarState::AtLower if d > REDUCED_COST_TOL => return Some((j, 1.0)),
                VarState::AtUpper if d < -REDUCED_COST_TOL => return Some((j, -1.0)),
                _ => {}
            }
        }
        None
    }

    fn refactor(&mut self) {
        let m = self.m;
        // Gauss-Jordan on [B | I].
        let mut a = vec![0.0; m * m];
        for (pos, &var) in self.basis.iter().enumerate() {
            for (i, v) in self.column(var) {
                a[i * m + pos] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&p, &q| a[p * m + col].abs().total_cmp(&a[q * m + col].abs()))
                .expect("non-empty range");
            if piv != col {
                for k in 0..m {
                    a.swap(piv * m + k, col * m + k);
                    inv.swap(piv * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for r in 0..m {
                if r != col {
                    let f = a[r * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[col * m + k];
                            inv[r * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        self.pivots_since_refactor = 0;

        // Recompute basic values: B x_B = -N x_N.
        let mut rhs = vec![0.0; m];
        for j in 0..self.n + self.m {
            if self.state[j] != VarState::Basic && self.value[j] != 0.0 {
                for (i, v) in self.column(j) {
                    rhs[i] -= v * self.value[j];
                }
            }
        }
        for (pos, &var) in self.basis.iter().enumerate() {
            let row = &self.binv[pos * m..(pos + 1) * m];
            self.value[var] = row.iter().zip(&rhs).map(|(b, r)| b * r).sum();
        }
    }

    fn run(&mut self, max_iterations: usize) -> (LpStatus, usize) {
        let m = self.m;
        let mut iterations = 0;
        loop {
            let y = self.duals();
            let Some((enter, dir)) = self.entering(&y) else {
                return (LpStatus::Optimal, iterations);
            };
            if iterations >= max_iterations {
                return (LpStatus::IterationLimit, iterations);
            }
            iterations += 1;

            let alpha = self.ftran(&self.column(enter));
            // Basic variable at position i moves by -dir * alpha[i] * theta.
            let mut theta = self.upper[enter] - self.lower[enter];
            let mut leave: Option<(usize, usize, bool)> = None; // (pos, var, to_upper)
            for (pos, &var) in self.basis.iter().enumerate() {
                let rate = -dir * alpha[pos];
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                let (limit, to_upper) = if rate < 0.0 {
                    (((self.value[var] - self.lower[var]) / -rate).max(0.0), false)
                } else {
                    (((self.upper[var] - self.value[var]) / rate).max(0.0), true)
                };
                let better = match leave {
                    _ if limit < theta - 1e-12 => true,
                    Some((_, lv, _)) if (limit - theta).abs() <= 1e-12 => var < lv,
                    _ => false,
                };
                if better {
                    theta = limit;
                    leave = Some((pos, var, to_upper));
                }
            }

            for (pos, &var) in self.basis.iter().enumerate() {
                self.value[var] -= dir * alpha[pos] * theta;
            }
            self.value[enter] += dir * theta;

            match leave {
                None => {
                    // Bound flip.
                    if dir > 0.0 {
                        self.state[enter] = VarState::AtUpper;
                        self.value[enter] = self.upper[enter];
                    } else {
                        self.state[enter] = VarState::AtLower;
                        self.value[enter] = self.lower[enter];
                    }
                }
                Some((pos, var, to_upper)) => {
                    self.state[var] = if to_upper {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    self.value[var] = if to_upper {
                        self.upper[var]
                    } else {
                        self.lower[var]
                    };
                    self.state[enter] = VarState::Basic;
                    self.basis[pos] = enter;

                    let piv = alpha[pos];
                    let prow: Vec<f64> =
                        self.binv[pos * m..(pos + 1) * m].iter().map(|v| v / piv).collect();
                    for (i, a) in alpha.iter().enumerate() {
                        if i != pos && *a != 0.0 {
                            let row = &mut self.binv[i * m..(i + 1) * m];
                            for (r, p) in row.iter_mut().zip(&prow) {
                                *r -= a * p;
                            }
                        }
                    }
                    self.binv[pos * m..(pos + 1) * m].copy_from_slice(&prow);
                    self.pivots_since_refactor += 1;
                    if self.pivots_since_refactor >= REFACTOR_EVERY {
                        self.refactor();
                    }
                }
            }
        }
    }

    fn solution(&self) -> Vec<f64> {
        self.value[..self.n]
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| v.clamp(*l, *u))
            .collect()
    }
}

fn iteration_cap(cs: &ConstraintSystem) -> usize {
    10 * (cs.rows() + cs.cols())
}

fn lp_with_bounds(
    cs: &ConstraintSystem,
    lower: &[f64],
    upper: &[f64],
    row_upper: &[f64],
) -> LpSolution {
    if cs.cols() == 0 {
        return LpSolution {
            values: Vec::new(),
            objective: 0.0,
            status: LpStatus::Optimal,
            iterations: 0,
        };
    }
    let mut sx = Simplex::new(cs, lower, upper, row_upper);
    let (status, iterations) = sx.run(iteration_cap(cs));
    let values = sx.solution();
    let objective = cs.objective_value(&values);
    LpSolution {
        values,
        objective,
        status,
        iterations,
    }
}

/// Optimal basic solution of the relaxation with `0 <= x <= 1`.
pub fn solve_lp(cs: &ConstraintSystem) -> Result<LpSolution> {
    cs.validate()?;
    let n = cs.cols();
    Ok(lp_with_bounds(
        cs,
        &vec![0.0; n],
        &vec![1.0; n],
        &cs.upper_bounds,
    ))
}

/// Rows whose coefficients are all integers have integral activity at any
/// binary point, so their bounds can be floored without losing solutions.
fn integral_row_bounds(cs: &ConstraintSystem) -> Vec<f64> {
    let mut integral = vec![true; cs.rows()];
    for j in 0..cs.cols() {
        for (i, a) in cs.matrix.column(j) {
            if a.fract() != 0.0 {
                integral[*i] = false;
            }
        }
    }
    cs.upper_bounds
        .iter()
        .zip(integral)
        .map(|(f, int)| if int { (f + 1e-9).floor() } else { *f })
        .collect()
}

/// Common step of the objective lattice, when every positive coefficient is
/// an integer multiple of the smallest one.
fn objective_step(objective: &[f64]) -> Option<f64> {
    let g = objective.iter().copied().filter(|c| *c > 0.0).fold(f64::INFINITY, f64::min);
    if !g.is_finite() {
        return None;
    }
    objective
        .iter()
        .all(|c| {
            let r = c / g;
            (r - r.round()).abs() <= 1e-9 * r.max(1.0)
        })
        .then_some(g)
}

struct Node {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Rounds a relaxed point down, then greedily raises variables in column
/// order while every row stays within bounds.
fn round_and_fill(cs: &ConstraintSystem, x: &[f64], lower: &[f64], upper: &[f64], rows: &[f64]) -> Vec<bool> {
    let mut sel: Vec<bool> = x
        .iter()
        .zip(lower)
        .map(|(v, l)| *l >= 1.0 || *v >= 1.0 - INTEGRALITY_TOL)
        .collect();
    let mut act = cs.matrix.mul(&sel.iter().map(|b| f64::from(u8::from(*b))).collect::<Vec<_>>());
    for j in 0..sel.len() {
        if sel[j] || upper[j] < 1.0 || cs.objective[j] <= 0.0 {
            continue;
        }
        let col = cs.matrix.column(j);
        if col.iter().all(|(i, a)| act[*i] + a <= rows[*i] + FEASIBILITY_TOL) {
            sel[j] = true;
            for (i, a) in col {
                act[*i] += a;
            }
        }
    }
    sel
}

fn binary_objective(cs: &ConstraintSystem, x: &[bool]) -> f64 {
    cs.objective
        .iter()
        .zip(x)
        .filter(|(_, b)| **b)
        .map(|(c, _)| c)
        .sum()
}

/// Globally optimal binary solution by depth-first branch and bound.
///
/// Branches on the most fractional variable (lowest index on ties), exploring
/// the `x = 1` child first. Nodes are pruned when their relaxation bound,
/// rounded down to the objective lattice when one exists, cannot beat the
/// incumbent.
pub fn solve_ilp(cs: &ConstraintSystem) -> Result<IlpSolution> {
    cs.validate()?;
    let n = cs.cols();
    let rows = integral_row_bounds(cs);
    let step = objective_step(&cs.objective);
    let cap_bound = |z: f64| match step {
        Some(g) => ((z / g) + 1e-6).floor() * g,
        None => z,
    };
    let improves = |candidate: f64, incumbent: f64| candidate > incumbent + 1e-9 * incumbent.abs().max(1.0);

    let mut best = vec![false; n];
    let mut best_obj = 0.0;
    let mut nodes = 0;
    let mut root_lp = None;
    let mut stack = vec![Node {
        lower: vec![0.0; n],
        upper: vec![1.0; n],
    }];

    while let Some(node) = stack.pop() {
        nodes += 1;
        if nodes > MAX_NODES {
            return Err(Error::NodeLimit(MAX_NODES));
        }
        // Fixings are feasible exactly when the forced ones fit.
        let forced = cs.matrix.mul(&node.lower);
        if forced.iter().zip(&rows).any(|(a, f)| *a > f + FEASIBILITY_TOL) {
            continue;
        }
        let lp = lp_with_bounds(cs, &node.lower, &node.upper, &rows);
        if nodes == 1 {
            root_lp = solve_lp_unfloored(cs);
        }
        let bound = if lp.status == LpStatus::Optimal {
            cap_bound(lp.objective)
        } else {
            f64::INFINITY
        };
        if !improves(bound, best_obj) {
            continue;
        }

        let heuristic = round_and_fill(cs, &lp.values, &node.lower, &node.upper, &rows);
        let h_obj = binary_objective(cs, &heuristic);
        if improves(h_obj, best_obj) {
            best = heuristic;
            best_obj = h_obj;
            if !improves(bound, best_obj) {
                continue;
            }
        }

        // Without a trusted relaxation, any free variable will do.
        let trusted = lp.status == LpStatus::Optimal;
        let branch = (0..n)
            .filter(|&j| node.upper[j] > node.lower[j])
            .map(|j| (j, (lp.values[j] - 0.5).abs()))
            .filter(|(_, dist)| !trusted || *dist < 0.5 - INTEGRALITY_TOL)
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let Some((j, _)) = branch else {
            // Integral relaxation: the heuristic already took it.
            continue;
        };
        let mut zero = Node {
            lower: node.lower.clone(),
            upper: node.upper.clone(),
        };
        zero.upper[j] = 0.0;
        let mut one = node;
        one.lower[j] = 1.0;
        stack.push(zero);
        stack.push(one);
    }

    Ok(IlpSolution {
        values: best,
        objective: best_obj,
        nodes_explored: nodes,
        root_lp_objective: root_lp,
    })
}

fn solve_lp_unfloored(cs: &ConstraintSystem) -> Option<f64> {
    let lp = solve_lp(cs).ok()?;
    (lp.status == LpStatus::Optimal).then_some(lp.objective)
}

/// Exhaustive search over all `2^n` binary vectors.
///
/// Among equal-objective optima the earliest columns win: the lexicographically
/// largest vector read from column 0.
pub fn brute_force(cs: &ConstraintSystem) -> Result<IlpSolution> {
    cs.validate()?;
    let n = cs.cols();
    if n > MAX_BRUTE_FORCE_COLS {
        return Err(Error::TooManyColumns {
            got: n,
            max: MAX_BRUTE_FORCE_COLS,
        });
    }
    let mut best: Option<(Vec<bool>, f64)> = None;
    let mut x = vec![0.0; n];
    // Mask bit (n-1-j) is column j, so descending masks visit vectors in
    // decreasing lexicographic order and the first optimum found wins ties.
    for mask in (0u32..(1u32 << n)).rev() {
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = f64::from((mask >> (n - 1 - j)) & 1);
        }
        if !cs.is_feasible(&x, 1e-9) {
            continue;
        }
        let sel: Vec<bool> = x.iter().map(|v| *v == 1.0).collect();
        let obj = binary_objective(cs, &sel);
        let better = match &best {
            None => true,
            Some((_, b)) => obj > b + 1e-12 * b.abs().max(1.0),
        };
        if better {
            best = Some((sel, obj));
        }
    }
    let (values, objective) = best.expect("the zero vector is feasible");
    Ok(IlpSolution {
        values,
        objective,
        nodes_explored: 1usize << n,
        root_lp_objective: solve_lp_unfloored(cs),
    })
}
