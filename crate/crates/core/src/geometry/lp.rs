//! Exact linear programming over Q.
//!
//! Dense two-phase tableau simplex with Bland's rule. Variables are free;
//! internally each is split into a nonnegative pair.

use num_traits::{One, Signed, Zero};

use super::rational::{QVector, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { point: QVector, value: Rat },
}

impl LpOutcome {
    pub fn point(&self) -> Option<&QVector> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

/// `a . x <= b` when used as an inequality, `a . x = b` as an equality.
pub type Row = (QVector, Rat);

/// Maximizes `c . x` subject to the given rows over free variables in Q^dim.
pub fn maximize(dim: usize, c: &QVector, ineqs: &[Row], eqs: &[Row]) -> LpOutcome {
    Tableau::build(dim, ineqs, eqs).solve(c)
}

/// Some point satisfying every row, if one exists.
pub fn feasible_point(dim: usize, ineqs: &[Row], eqs: &[Row]) -> Option<QVector> {
    match maximize(dim, &QVector::zeros(dim), ineqs, eqs) {
        LpOutcome::Optimal { point, .. } => Some(point),
        _ => None,
    }
}

struct Tableau {
    dim: usize,
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    /// Column index where artificial variables start.
    art_start: usize,
    ncols: usize,
}

impl Tableau {
    fn build(dim: usize, ineqs: &[Row], eqs: &[Row]) -> Tableau {
        let nslack = ineqs.len();
        let slack_start = 2 * dim;
        let art_start = slack_start + nslack;
        // artificial columns are needed for equalities and negative right-hand sides
        let needs_art: Vec<bool> = ineqs
            .iter()
            .map(|(_, b)| b.is_negative())
            .chain(eqs.iter().map(|_| true))
            .collect();
        let nart = needs_art.iter().filter(|&&x| x).count();
        let ncols = art_start + nart;
        let mut rows = Vec::with_capacity(ineqs.len() + eqs.len());
        let mut rhs = Vec::with_capacity(rows.capacity());
        let mut basis = Vec::with_capacity(rows.capacity());
        let mut next_art = art_start;
        for (i, (a, b)) in ineqs.iter().chain(eqs.iter()).enumerate() {
            let mut row = vec![Rat::zero(); ncols];
            for j in 0..dim {
                row[j] = a[j].clone();
                row[dim + j] = -a[j].clone();
            }
            if i < nslack {
                row[slack_start + i] = Rat::one();
            }
            let mut b = b.clone();
            if needs_art[i] {
                if b.is_negative() {
                    for v in row.iter_mut() {
                        *v = -v.clone();
                    }
                    b = -b;
                }
                row[next_art] = Rat::one();
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(slack_start + i);
            }
            rows.push(row);
            rhs.push(b);
        }
        Tableau {
            dim,
            rows,
            rhs,
            basis,
            art_start,
            ncols,
        }
    }

    fn pivot(&mut self, r: usize, col: usize, obj: &mut [Rat], obj_val: &mut Rat) {
        let inv = self.rows[r][col].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        self.rhs[r] *= &inv;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for (j, p) in prow.iter().enumerate() {
                if !p.is_zero() {
                    let d = p * &f;
                    self.rows[i][j] -= d;
                }
            }
            self.rhs[i] -= &prhs * &f;
        }
        if !obj[col].is_zero() {
            let f = obj[col].clone();
            for (j, p) in prow.iter().enumerate() {
                if !p.is_zero() {
                    obj[j] -= p * &f;
                }
            }
            *obj_val += &prhs * &f;
        }
        self.basis[r] = col;
    }

    /// Reduced costs and objective value for cost vector `cost` under the current basis.
    fn reduced(&self, cost: &[Rat]) -> (Vec<Rat>, Rat) {
        let mut obj = cost.to_vec();
        let mut val = Rat::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in self.rows[i].iter().enumerate() {
                if !v.is_zero() {
                    obj[j] -= cb * v;
                }
            }
            val += cb * &self.rhs[i];
        }
        (obj, val)
    }

    /// Runs simplex iterations on columns below `limit`; false when unbounded.
    fn iterate(&mut self, obj: &mut [Rat], val: &mut Rat, limit: usize) -> bool {
        loop {
            let Some(col) = (0..limit).find(|&j| obj[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(r, col, obj, val);
        }
    }

    fn solve(mut self, c: &QVector) -> LpOutcome {
        if self.art_start < self.ncols {
            let mut cost = vec![Rat::zero(); self.ncols];
            for v in cost.iter_mut().skip(self.art_start) {
                *v = -Rat::one();
            }
            let (mut obj, mut val) = self.reduced(&cost);
            let ncols = self.ncols;
            self.iterate(&mut obj, &mut val, ncols);
            if val.is_negative() {
                return LpOutcome::Infeasible;
            }
            // drive remaining artificial variables out of the basis
            let mut r = 0;
            while r < self.rows.len() {
                if self.basis[r] >= self.art_start {
                    match (0..self.art_start).find(|&j| !self.rows[r][j].is_zero()) {
                        Some(col) => {
                            let mut dummy = vec![Rat::zero(); self.ncols];
                            let mut dv = Rat::zero();
                            self.pivot(r, col, &mut dummy, &mut dv);
                            r += 1;
                        }
                        None => {
                            self.rows.remove(r);
                            self.rhs.remove(r);
                            self.basis.remove(r);
                        }
                    }
                } else {
                    r += 1;
                }
            }
        }
        let mut cost = vec![Rat::zero(); self.ncols];
        for j in 0..self.dim {
            cost[j] = c[j].clone();
            cost[self.dim + j] = -c[j].clone();
        }
        let (mut obj, mut val) = self.reduced(&cost);
        let limit = self.art_start;
        if !self.iterate(&mut obj, &mut val, limit) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rat::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs[i].clone();
        }
        let point: QVector = (0..self.dim).map(|j| &x[j] - &x[self.dim + j]).collect();
        LpOutcome::Optimal { point, value: val }
    }
}
