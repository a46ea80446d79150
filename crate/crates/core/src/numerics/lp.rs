//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Problems here are desk-sized (a few dozen variables and constraints), so the
//! solver keeps a full tableau and favours termination guarantees over speed.

use crate::error::{Error, Result};

/// Pivot and reduced-cost tolerance.
pub const PIVOT_TOL: f64 = 1e-9;

const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// `optimize cᵀx` subject to `rows · x (rel) rhs` and per-variable bounds.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub rows: Vec<Vec<f64>>,
    pub relations: Vec<Relation>,
    pub rhs: Vec<f64>,
    /// `(lower, upper)`; `None` means unbounded on that side.
    pub bounds: Vec<(Option<f64>, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

impl LpProblem {
    /// New problem with all variables non-negative.
    pub fn new(objective: Vec<f64>, sense: Sense) -> Self {
        let n = objective.len();
        Self {
            objective,
            sense,
            rows: Vec::new(),
            relations: Vec::new(),
            rhs: Vec::new(),
            bounds: vec![(Some(0.0), None); n],
        }
    }

    /// New problem with all variables free.
    pub fn free(objective: Vec<f64>, sense: Sense) -> Self {
        let n = objective.len();
        let mut p = Self::new(objective, sense);
        p.bounds = vec![(None, None); n];
        p
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) -> &mut Self {
        debug_assert_eq!(coeffs.len(), self.num_vars());
        self.rows.push(coeffs);
        self.relations.push(rel);
        self.rhs.push(rhs);
        self
    }

    pub fn le(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.add(coeffs, Relation::Le, rhs)
    }

    pub fn ge(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.add(coeffs, Relation::Ge, rhs)
    }

    pub fn eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.add(coeffs, Relation::Eq, rhs)
    }

    pub fn set_bounds(&mut self, j: usize, lower: Option<f64>, upper: Option<f64>) -> &mut Self {
        self.bounds[j] = (lower, upper);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.bounds.len(),
            });
        }
        for r in &self.rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        if self.relations.len() != self.rows.len() || self.rhs.len() != self.rows.len() {
            return Err(Error::DimensionMismatch {
                expected: self.rows.len(),
                found: self.rhs.len(),
            });
        }
        Ok(())
    }
}

/// Substitution `x_j = offset + Σ coef · y_col` for one original variable.
struct VarMap {
    offset: f64,
    terms: Vec<(usize, f64)>,
}

struct Tableau {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.cols + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * (self.cols + 1) + self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let piv = self.data[r * w + c];
        for j in 0..w {
            self.data[r * w + j] /= piv;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for j in 0..w {
                    row[j] -= f * prow[j];
                }
                row[c] = 0.0;
            }
        };
        for row in before.chunks_mut(w) {
            eliminate(row);
        }
        for row in after.chunks_mut(w) {
            eliminate(row);
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule on the objective stored in row `rows` (last row),
    /// allowing only columns with `allowed[j]` to enter.
    fn optimize(&mut self, allowed: &[bool]) -> Result<()> {
        let obj = self.rows;
        for _ in 0..MAX_PIVOTS {
            let entering = (0..self.cols).find(|&j| allowed[j] && self.at(obj, j) < -PIVOT_TOL);
            let Some(c) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    match best {
                        None => best = Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                best = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, _)) = best else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, c);
        }
        Err(Error::Unsupported("simplex iteration limit reached".into()))
    }
}

/// Solves `p`; infeasible and unbounded problems are reported as distinct errors.
pub fn lp_solve(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let n = p.num_vars();

    let mut maps = Vec::with_capacity(n);
    let mut ny = 0usize;
    let mut extra_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for &(lo, hi) in &p.bounds {
        match (lo, hi) {
            (Some(l), hi) => {
                let col = ny;
                ny += 1;
                if let Some(h) = hi {
                    if h < l - PIVOT_TOL {
                        return Err(Error::Infeasible);
                    }
                    extra_rows.push((vec![(col, 1.0)], (h - l).max(0.0)));
                }
                maps.push(VarMap {
                    offset: l,
                    terms: vec![(col, 1.0)],
                });
            }
            (None, Some(h)) => {
                let col = ny;
                ny += 1;
                maps.push(VarMap {
                    offset: h,
                    terms: vec![(col, -1.0)],
                });
            }
            (None, None) => {
                let col = ny;
                ny += 2;
                maps.push(VarMap {
                    offset: 0.0,
                    terms: vec![(col, 1.0), (col + 1, -1.0)],
                });
            }
        }
    }

    // constraints in y-space
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rels: Vec<Relation> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (k, row) in p.rows.iter().enumerate() {
        let mut y = vec![0.0; ny];
        let mut b = p.rhs[k];
        for (j, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            b -= a * maps[j].offset;
            for &(col, coef) in &maps[j].terms {
                y[col] += a * coef;
            }
        }
        rows.push(y);
        rels.push(p.relations[k]);
        rhs.push(b);
    }
    for (terms, b) in extra_rows {
        let mut y = vec![0.0; ny];
        for (col, coef) in terms {
            y[col] = coef;
        }
        rows.push(y);
        rels.push(Relation::Le);
        rhs.push(b);
    }
    for k in 0..rows.len() {
        if rhs[k] < 0.0 {
            for v in rows[k].iter_mut() {
                *v = -*v;
            }
            rhs[k] = -rhs[k];
            rels[k] = match rels[k] {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rels.iter().filter(|r| **r != Relation::Eq).count();
    let n_art = rels.iter().filter(|r| **r != Relation::Le).count();
    let cols = ny + n_slack + n_art;
    let w = cols + 1;
    let mut t = Tableau {
        rows: m,
        cols,
        data: vec![0.0; (m + 1) * w],
        basis: vec![0; m],
    };
    let mut is_art = vec![false; cols];
    let mut slack = ny;
    let mut art = ny + n_slack;
    for i in 0..m {
        t.data[i * w..i * w + ny].copy_from_slice(&rows[i]);
        t.data[i * w + cols] = rhs[i];
        match rels[i] {
            Relation::Le => {
                t.data[i * w + slack] = 1.0;
                t.basis[i] = slack;
                slack += 1;
            }
            Relation::Ge => {
                t.data[i * w + slack] = -1.0;
                slack += 1;
                t.data[i * w + art] = 1.0;
                is_art[art] = true;
                t.basis[i] = art;
                art += 1;
            }
            Relation::Eq => {
                t.data[i * w + art] = 1.0;
                is_art[art] = true;
                t.basis[i] = art;
                art += 1;
            }
        }
    }

    let scale = rhs.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    if n_art > 0 {
        // phase 1: maximize −Σ artificials
        for j in 0..cols {
            t.data[m * w + j] = if is_art[j] { 1.0 } else { 0.0 };
        }
        t.data[m * w + cols] = 0.0;
        for i in 0..m {
            if is_art[t.basis[i]] {
                for j in 0..w {
                    t.data[m * w + j] -= t.data[i * w + j];
                }
            }
        }
        let allowed = vec![true; cols];
        t.optimize(&allowed)?;
        if t.rhs(m) < -1e-8 * scale {
            return Err(Error::Infeasible);
        }
        // drive artificials out of the basis; drop redundant rows
        let mut i = 0;
        while i < t.rows {
            if is_art[t.basis[i]] {
                let col = (0..cols).find(|&j| !is_art[j] && t.at(i, j).abs() > PIVOT_TOL);
                match col {
                    Some(c) => {
                        t.pivot(i, c);
                        i += 1;
                    }
                    None => {
                        // redundant row
                        let start = i * w;
                        t.data.drain(start..start + w);
                        t.basis.remove(i);
                        t.rows -= 1;
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    // phase 2
    let m = t.rows;
    let sign = match p.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut cy = vec![0.0; ny];
    for (j, map) in maps.iter().enumerate() {
        for &(col, coef) in &map.terms {
            cy[col] += sign * p.objective[j] * coef;
        }
    }
    for j in 0..w {
        t.data[m * w + j] = 0.0;
    }
    for j in 0..ny {
        t.data[m * w + j] = -cy[j];
    }
    for i in 0..m {
        let b = t.basis[i];
        let cb = if b < ny { cy[b] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..w {
                t.data[m * w + j] += cb * t.data[i * w + j];
            }
        }
    }
    let allowed: Vec<bool> = (0..cols).map(|j| !is_art[j]).collect();
    t.optimize(&allowed)?;

    let mut y = vec![0.0; ny];
    for i in 0..m {
        if t.basis[i] < ny {
            y[t.basis[i]] = t.rhs(i).max(0.0);
        }
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| map.offset + map.terms.iter().map(|&(c, k)| k * y[c]).sum::<f64>())
        .collect();
    let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { value, x })
}
