//! Discrete factor graphs and convergent dual message passing.
//!
//! The solver is sequential reweighted message passing in min-sum form. The
//! dual state is a reparameterization: every variable keeps `θ̄_i` and every
//! factor keeps its own table `θ̄_f`, and their sum equals the original
//! energy for every assignment. Visiting a variable first *collects* (moves
//! each adjacent factor's min-marginal into `θ̄_i`, which can only raise the
//! bound) and then *distributes* a fraction `ω` of `θ̄_i` back into the
//! factors that reach variables later in the pass (which leaves the bound
//! unchanged). Passes alternate direction.

use std::sync::Arc;

use super::InferenceError;

/// A factor over two or more variables. `table` is row-major with the first
/// variable most significant.
#[derive(Debug, Clone)]
pub struct Factor {
    pub vars: Vec<usize>,
    pub table: Arc<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct FactorGraph {
    pub unaries: Vec<Vec<f64>>,
    pub factors: Vec<Factor>,
}

impl FactorGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable with the given unary costs; returns its index.
    pub fn add_variable(&mut self, unary: Vec<f64>) -> usize {
        self.unaries.push(unary);
        self.unaries.len() - 1
    }

    pub fn add_factor(
        &mut self,
        vars: Vec<usize>,
        table: Arc<Vec<f64>>,
    ) -> Result<usize, InferenceError> {
        let size: usize = vars.iter().map(|&v| self.n_states(v)).product();
        if vars.len() < 2 || size != table.len() {
            return Err(InferenceError::InvalidFactor(format!(
                "{} variables with {size} joint states, table of {}",
                vars.len(),
                table.len()
            )));
        }
        let mut sorted = vars.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(InferenceError::InvalidFactor(
                "repeated variable in scope".into(),
            ));
        }
        self.factors.push(Factor { vars, table });
        Ok(self.factors.len() - 1)
    }

    pub fn n_variables(&self) -> usize {
        self.unaries.len()
    }

    pub fn n_states(&self, v: usize) -> usize {
        self.unaries[v].len()
    }

    /// Energy of a full assignment: unaries in variable order, then factors.
    pub fn energy(&self, x: &[usize]) -> f64 {
        let mut e = 0.0;
        for (u, &s) in self.unaries.iter().zip(x) {
            e += u[s];
        }
        for f in &self.factors {
            e += f.table[self.flat_index(f, x)];
        }
        e
    }

    fn flat_index(&self, f: &Factor, x: &[usize]) -> usize {
        f.vars
            .iter()
            .fold(0, |acc, &v| acc * self.n_states(v) + x[v])
    }

    fn check_finite(&self) -> Result<(), InferenceError> {
        for (v, u) in self.unaries.iter().enumerate() {
            if u.is_empty() {
                return Err(InferenceError::InvalidFactor(format!(
                    "variable {v} has no states"
                )));
            }
            if u.iter().any(|c| !c.is_finite()) {
                return Err(InferenceError::NonFinite(format!("unary of variable {v}")));
            }
        }
        for (k, f) in self.factors.iter().enumerate() {
            if f.table.iter().any(|c| !c.is_finite()) {
                return Err(InferenceError::NonFinite(format!("table of factor {k}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpConfig {
    pub max_sweeps: usize,
    /// Stop once a sweep raises the bound by less than this.
    pub tolerance: f64,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 200,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpResult {
    pub assignment: Vec<usize>,
    /// Dual lower bound on the minimum energy.
    pub bound: f64,
    /// Energy of `assignment`.
    pub energy: f64,
    /// Bound after every sweep (one forward and one backward pass).
    pub bounds: Vec<f64>,
}

/// Min-sum convex belief propagation; see the module docs.
pub fn convex_bp(g: &FactorGraph, cfg: &BpConfig) -> Result<BpResult, InferenceError> {
    g.check_finite()?;
    let n = g.n_variables();
    let mut var_rep: Vec<Vec<f64>> = g.unaries.clone();
    let mut fac_rep: Vec<Vec<f64>> = g.factors.iter().map(|f| f.table.as_ref().clone()).collect();

    // per factor: strides of each scope position
    let strides: Vec<Vec<usize>> = g
        .factors
        .iter()
        .map(|f| {
            let mut s = vec![1; f.vars.len()];
            for p in (0..f.vars.len().saturating_sub(1)).rev() {
                s[p] = s[p + 1] * g.n_states(f.vars[p + 1]);
            }
            s
        })
        .collect();
    // per variable: (factor, position in scope, min other var, max other var)
    let mut incident: Vec<Vec<(usize, usize, usize, usize)>> = vec![Vec::new(); n];
    for (k, f) in g.factors.iter().enumerate() {
        for (p, &v) in f.vars.iter().enumerate() {
            let others = f.vars.iter().filter(|&&o| o != v).copied();
            let lo = others.clone().min().expect("arity >= 2");
            let hi = others.max().expect("arity >= 2");
            incident[v].push((k, p, lo, hi));
        }
    }

    let bound_of = |var_rep: &[Vec<f64>], fac_rep: &[Vec<f64>]| -> f64 {
        let mut b = 0.0;
        for r in var_rep {
            b += min_of(r);
        }
        for r in fac_rep {
            b += min_of(r);
        }
        b
    };

    let mut belief: Vec<Vec<f64>> = var_rep.clone();
    let mut bounds = Vec::new();
    let mut prev = bound_of(&var_rep, &fac_rep);
    let mut mm = Vec::new();
    let scale = 1.0 + g.unaries.iter().flatten().map(|c| c.abs()).sum::<f64>();

    for _sweep in 0..cfg.max_sweeps.max(1) {
        for forward in [true, false] {
            for step in 0..n {
                let i = if forward { step } else { n - 1 - step };
                let ns = g.n_states(i);
                // collect
                for &(k, p, _, _) in &incident[i] {
                    let stride = strides[k][p];
                    let table = &mut fac_rep[k];
                    mm.clear();
                    mm.resize(ns, f64::INFINITY);
                    for (idx, &c) in table.iter().enumerate() {
                        let s = (idx / stride) % ns;
                        if c < mm[s] {
                            mm[s] = c;
                        }
                    }
                    for (idx, c) in table.iter_mut().enumerate() {
                        *c -= mm[(idx / stride) % ns];
                    }
                    for (r, m) in var_rep[i].iter_mut().zip(&mm) {
                        *r += m;
                    }
                }
                belief[i].clone_from(&var_rep[i]);
                // distribute
                let later = |&&(_, _, lo, hi): &&(usize, usize, usize, usize)| {
                    if forward {
                        hi > i
                    } else {
                        lo < i
                    }
                };
                let earlier = |&&(_, _, lo, hi): &&(usize, usize, usize, usize)| {
                    if forward {
                        lo < i
                    } else {
                        hi > i
                    }
                };
                let n_out = incident[i].iter().filter(later).count();
                let n_in = incident[i].iter().filter(earlier).count();
                if n_out == 0 {
                    continue;
                }
                let omega = 1.0 / n_out.max(n_in) as f64;
                let share: Vec<f64> = var_rep[i].iter().map(|r| omega * r).collect();
                for &(k, p, _, _) in incident[i].iter().filter(later) {
                    let stride = strides[k][p];
                    for (idx, c) in fac_rep[k].iter_mut().enumerate() {
                        *c += share[(idx / stride) % ns];
                    }
                }
                let keep = 1.0 - n_out as f64 * omega;
                for r in var_rep[i].iter_mut() {
                    *r *= keep;
                }
            }
        }
        let b = bound_of(&var_rep, &fac_rep);
        debug_assert!(
            b >= prev - 1e-9 * scale.max(b.abs()),
            "bound decreased: {prev} -> {b}"
        );
        bounds.push(b);
        let gain = b - prev;
        prev = b;
        if gain < cfg.tolerance {
            break;
        }
    }

    let assignment: Vec<usize> = belief.iter().map(|b| argmin(b)).collect();
    let energy = g.energy(&assignment);
    Ok(BpResult {
        assignment,
        bound: prev,
        energy,
        bounds,
    })
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Lowest index among the minima.
pub(crate) fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, &c) in v.iter().enumerate().skip(1) {
        if c < v[best] {
            best = k;
        }
    }
    best
}
