//! Bounded-variable revised primal simplex for
//!
//! ```text
//!   minimize cᵀx  subject to  A x ≤ b,  0 ≤ x ≤ upper
//! ```
//!
//! The constraint matrix is accessed only through [`ConstraintMatrix`], so
//! structured matrices can supply cheap products. The basis inverse is kept
//! explicitly (product-form updates, periodic refactorization); rows with a
//! negative right-hand side are covered by crashing singleton columns into
//! the basis, falling back to a phase-1 with artificials.
//!
//! Every returned solution carries a [`Certificate`] computed from scratch:
//! primal residual, dual residual and duality gap.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("problem dimensions inconsistent: {0}")]
    Dimensions(String),
    #[error("linear program is infeasible (phase-1 residual {0:.3e})")]
    Infeasible(f64),
    #[error("linear program is unbounded along variable {0}")]
    Unbounded(usize),
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("singular basis during refactorization")]
    SingularBasis,
    #[error("optimality not certified: {0}")]
    NotCertified(Certificate),
}

/// Read access to a constraint matrix.
pub trait ConstraintMatrix {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// Writes column `j` into `out` (length `rows()`).
    fn column(&self, j: usize, out: &mut [f64]);
    /// `out = Aᵀ y`
    fn transpose_mul(&self, y: &[f64], out: &mut [f64]);
    /// `out = A x`
    fn mul(&self, x: &[f64], out: &mut [f64]);
    /// If column `j` has exactly one nonzero, its row and value.
    fn singleton(&self, j: usize) -> Option<(usize, f64)>;
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LpError> {
        if data.len() != rows * cols {
            return Err(LpError::Dimensions(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_matrix<M: ConstraintMatrix>(m: &M) -> Self {
        let mut d = DenseMatrix::zeros(m.rows(), m.cols());
        let mut col = vec![0.0; m.rows()];
        for j in 0..m.cols() {
            m.column(j, &mut col);
            for (i, v) in col.iter().enumerate() {
                d.data[i * d.cols + j] = *v;
            }
        }
        d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }
}

impl ConstraintMatrix for DenseMatrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.data[i * self.cols + j];
        }
    }

    fn transpose_mul(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, yi) in y.iter().enumerate() {
            if *yi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += yi * a;
            }
        }
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn singleton(&self, j: usize) -> Option<(usize, f64)> {
        let mut found = None;
        for i in 0..self.rows {
            let v = self.data[i * self.cols + j];
            if v != 0.0 {
                if found.is_some() {
                    return None;
                }
                found = Some((i, v));
            }
        }
        found
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<M> {
    pub c: Vec<f64>,
    pub a: M,
    pub b: Vec<f64>,
    /// Per-variable upper bound; `f64::INFINITY` for none.
    pub upper: Vec<f64>,
}

impl<M: ConstraintMatrix> LinearProgram<M> {
    fn check(&self) -> Result<(), LpError> {
        let (m, n) = (self.a.rows(), self.a.cols());
        if self.c.len() != n || self.upper.len() != n || self.b.len() != m {
            return Err(LpError::Dimensions(format!(
                "A is {m}x{n}, c has {}, upper {}, b {}",
                self.c.len(),
                self.upper.len(),
                self.b.len()
            )));
        }
        if self.c.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(LpError::Dimensions("non-finite cost or right-hand side".into()));
        }
        if self.upper.iter().any(|u| u.is_nan() || *u < 0.0) {
            return Err(LpError::Dimensions("upper bounds must be >= 0".into()));
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }
}

/// Optimality evidence computed independently of the simplex iterates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// Largest violation of `A x ≤ b` or of the variable bounds.
    pub primal_residual: f64,
    /// Largest violation of dual feasibility (`y ≥ 0`, reduced-cost signs).
    pub dual_residual: f64,
    /// `(cᵀx − dual objective) / max(1, |cᵀx|)`.
    pub relative_gap: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl std::fmt::Display for Certificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "primal residual {:.3e}, dual residual {:.3e}, relative gap {:.3e} (primal {:.9}, dual {:.9})",
            self.primal_residual, self.dual_residual, self.relative_gap, self.primal_objective, self.dual_objective
        )
    }
}

impl Certificate {
    pub fn is_certified(&self, tol: f64) -> bool {
        self.primal_residual <= tol && self.dual_residual <= tol && self.relative_gap.abs() <= tol
    }
}

/// Checks a primal/dual pair against the LP. `y` are the multipliers of
/// `A x ≤ b` (nonnegative at optimality).
pub fn certify<M: ConstraintMatrix>(lp: &LinearProgram<M>, x: &[f64], y: &[f64]) -> Certificate {
    let (m, n) = (lp.a.rows(), lp.a.cols());
    let mut ax = vec![0.0; m];
    lp.a.mul(x, &mut ax);
    let mut primal: f64 = 0.0;
    for i in 0..m {
        primal = primal.max(ax[i] - lp.b[i]);
    }
    for j in 0..n {
        primal = primal.max(-x[j]);
        if lp.upper[j].is_finite() {
            primal = primal.max(x[j] - lp.upper[j]);
        }
    }

    let mut dual: f64 = y.iter().map(|v| -v).fold(0.0, f64::max);
    let mut aty = vec![0.0; n];
    lp.a.transpose_mul(y, &mut aty);
    let mut dual_obj: f64 = -lp.b.iter().zip(y).map(|(b, y)| b * y).sum::<f64>();
    for j in 0..n {
        let r = lp.c[j] + aty[j];
        if r < 0.0 {
            if lp.upper[j].is_finite() {
                dual_obj += lp.upper[j] * r;
            } else {
                dual = dual.max(-r / (1.0 + lp.c[j].abs()));
            }
        }
    }
    let primal_obj = lp.objective(x);
    Certificate {
        primal_residual: primal.max(0.0),
        dual_residual: dual,
        relative_gap: (primal_obj - dual_obj) / primal_obj.abs().max(1.0),
        primal_objective: primal_obj,
        dual_objective: dual_obj,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Multipliers of `A x ≤ b`.
    pub y: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iterations: Option<usize>,
    /// Reduced-cost tolerance for optimality.
    pub dual_tol: f64,
    /// Feasibility slack allowed in the Harris ratio test.
    pub primal_tol: f64,
    /// Pivots between basis refactorizations.
    pub refactor_every: usize,
    /// Threshold passed to [`Certificate::is_certified`].
    pub certify_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: None,
            dual_tol: 1e-9,
            primal_tol: 1e-9,
            refactor_every: 64,
            certify_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
}

const PIVOT_TOL: f64 = 1e-11;

struct Simplex<'a, M> {
    lp: &'a LinearProgram<M>,
    opts: SimplexOptions,
    m: usize,
    n: usize,
    /// Row of each artificial, indexed from `n + m`.
    art_rows: Vec<usize>,
    cost: Vec<f64>,
    upper: Vec<f64>,
    status: Vec<Status>,
    head: Vec<usize>,
    x: Vec<f64>,
    binv: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
    // scratch
    col: Vec<f64>,
    alpha: Vec<f64>,
    pi: Vec<f64>,
    aty: Vec<f64>,
}

enum Outcome {
    Optimal,
    Unbounded(usize),
}

impl<'a, M: ConstraintMatrix> Simplex<'a, M> {
    fn total(&self) -> usize {
        self.n + self.m + self.art_rows.len()
    }

    fn load_column(&self, j: usize, out: &mut [f64]) {
        if j < self.n {
            self.lp.a.column(j, out);
        } else {
            out.iter_mut().for_each(|o| *o = 0.0);
            if j < self.n + self.m {
                out[j - self.n] = 1.0;
            } else {
                out[self.art_rows[j - self.n - self.m]] = -1.0;
            }
        }
    }

    /// Builds an initial feasible basis: row slacks where `b ≥ 0`, a
    /// singleton column with the right sign where available, else an
    /// artificial.
    fn new(lp: &'a LinearProgram<M>, opts: SimplexOptions) -> Self {
        let (m, n) = (lp.a.rows(), lp.a.cols());
        let mut head = vec![usize::MAX; m];
        let mut art_rows = Vec::new();
        let mut crash = vec![None; m];
        for j in 0..n {
            if let Some((i, v)) = lp.a.singleton(j) {
                if lp.b[i] < 0.0 && v < 0.0 && crash[i].is_none() {
                    let val = lp.b[i] / v;
                    if val <= lp.upper[j] {
                        crash[i] = Some((j, val));
                    }
                }
            }
        }
        let mut basic_vals = vec![0.0; m];
        for i in 0..m {
            if lp.b[i] >= 0.0 {
                head[i] = n + i;
                basic_vals[i] = lp.b[i];
            } else if let Some((j, val)) = crash[i] {
                head[i] = j;
                basic_vals[i] = val;
            } else {
                head[i] = n + m + art_rows.len();
                art_rows.push(i);
                basic_vals[i] = -lp.b[i];
            }
        }
        let total = n + m + art_rows.len();
        let mut upper = lp.upper.clone();
        upper.extend(std::iter::repeat(f64::INFINITY).take(m + art_rows.len()));
        let mut status = vec![Status::Lower; total];
        let mut x = vec![0.0; total];
        for (i, &h) in head.iter().enumerate() {
            status[h] = Status::Basic;
            x[h] = basic_vals[i];
        }
        let mut s = Simplex {
            lp,
            opts,
            m,
            n,
            art_rows,
            cost: vec![0.0; total],
            upper,
            status,
            head,
            x,
            binv: vec![0.0; m * m],
            since_refactor: 0,
            iterations: 0,
            col: vec![0.0; m],
            alpha: vec![0.0; m],
            pi: vec![0.0; m],
            aty: vec![0.0; n],
        };
        // Initial basis is diagonal.
        for i in 0..m {
            let mut c = vec![0.0; m];
            s.load_column(s.head[i], &mut c);
            s.binv[i * m + i] = 1.0 / c[i];
        }
        s
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        // Gauss–Jordan on [B | I].
        let mut bmat = vec![0.0; m * m];
        let mut c = vec![0.0; m];
        for (k, &h) in self.head.iter().enumerate() {
            self.load_column(h, &mut c);
            for i in 0..m {
                bmat[i * m + k] = c[i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&a, &b| bmat[a * m + col].abs().total_cmp(&bmat[b * m + col].abs()))
                .unwrap();
            let p = bmat[piv * m + col];
            if p.abs() < 1e-14 {
                return Err(LpError::SingularBasis);
            }
            if piv != col {
                for k in 0..m {
                    bmat.swap(piv * m + k, col * m + k);
                    inv.swap(piv * m + k, col * m + k);
                }
            }
            let ip = 1.0 / p;
            for k in 0..m {
                bmat[col * m + k] *= ip;
                inv[col * m + k] *= ip;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = bmat[r * m + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    bmat[r * m + k] -= f * bmat[col * m + k];
                    inv[r * m + k] -= f * inv[col * m + k];
                }
            }
        }
        self.binv = inv;
        self.since_refactor = 0;
        self.recompute_basic_values();
        Ok(())
    }

    /// `x_B = B⁻¹ (b − Σ_{j at upper} upper_j A_j)`
    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut rhs = self.lp.b.clone();
        let mut c = vec![0.0; m];
        for j in 0..self.total() {
            if self.status[j] == Status::Upper {
                self.x[j] = self.upper[j];
                self.load_column(j, &mut c);
                for i in 0..m {
                    rhs[i] -= self.upper[j] * c[i];
                }
            } else if self.status[j] == Status::Lower {
                self.x[j] = 0.0;
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.x[self.head[r]] = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        }
    }

    /// Simplex multipliers `π = c_Bᵀ B⁻¹`.
    fn compute_pi(&mut self) {
        let m = self.m;
        self.pi.iter_mut().for_each(|p| *p = 0.0);
        for r in 0..m {
            let cb = self.cost[self.head[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.binv[r * m..(r + 1) * m];
            for (p, b) in self.pi.iter_mut().zip(row) {
                *p += cb * b;
            }
        }
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        if j < self.n {
            self.cost[j] - self.aty[j]
        } else if j < self.n + self.m {
            self.cost[j] - self.pi[j - self.n]
        } else {
            self.cost[j] + self.pi[self.art_rows[j - self.n - self.m]]
        }
    }

    fn run(&mut self, limit: usize) -> Result<Outcome, LpError> {
        let m = self.m;
        let mut degenerate_run = 0usize;
        loop {
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            self.compute_pi();
            self.lp.a.transpose_mul(&self.pi, &mut self.aty);

            let bland = degenerate_run > 50;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.total() {
                let st = self.status[j];
                if st == Status::Basic || self.upper[j] <= 0.0 {
                    continue;
                }
                let d = self.reduced_cost(j);
                let improving =
                    (st == Status::Lower && d < -self.opts.dual_tol) || (st == Status::Upper && d > self.opts.dual_tol);
                if !improving {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| d.abs() > best.abs()) {
                    entering = Some((j, d));
                }
            }
            let Some((q, _)) = entering else {
                return Ok(Outcome::Optimal);
            };
            if self.iterations >= limit {
                return Err(LpError::IterationLimit(limit));
            }
            self.iterations += 1;

            let mut col = std::mem::take(&mut self.col);
            self.load_column(q, &mut col);
            for r in 0..m {
                let row = &self.binv[r * m..(r + 1) * m];
                self.alpha[r] = row.iter().zip(&col).map(|(a, b)| a * b).sum();
            }
            self.col = col;
            let dir = if self.status[q] == Status::Lower { 1.0 } else { -1.0 };

            // Harris two-pass ratio test.
            let tol = self.opts.primal_tol;
            let mut relaxed = f64::INFINITY;
            for r in 0..m {
                let v = dir * self.alpha[r];
                let h = self.head[r];
                if v > PIVOT_TOL {
                    relaxed = relaxed.min((self.x[h] + tol) / v);
                } else if v < -PIVOT_TOL && self.upper[h].is_finite() {
                    relaxed = relaxed.min((self.upper[h] - self.x[h] + tol) / -v);
                }
            }
            let mut leave: Option<(usize, f64)> = None;
            let mut best_mag = 0.0;
            for r in 0..m {
                let v = dir * self.alpha[r];
                let h = self.head[r];
                let step = if v > PIVOT_TOL {
                    self.x[h] / v
                } else if v < -PIVOT_TOL && self.upper[h].is_finite() {
                    (self.upper[h] - self.x[h]) / -v
                } else {
                    continue;
                };
                if step <= relaxed && v.abs() > best_mag {
                    best_mag = v.abs();
                    leave = Some((r, step.max(0.0)));
                }
            }
            let flip = self.upper[q];
            let theta = match leave {
                Some((_, t)) if t < flip => t,
                _ if flip.is_finite() => flip,
                _ => return Ok(Outcome::Unbounded(q)),
            };
            let is_flip = leave.is_none_or(|(_, t)| t >= flip);

            if theta <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            for r in 0..m {
                let h = self.head[r];
                self.x[h] -= dir * theta * self.alpha[r];
            }
            if is_flip {
                self.status[q] = if dir > 0.0 { Status::Upper } else { Status::Lower };
                self.x[q] = if dir > 0.0 { self.upper[q] } else { 0.0 };
                continue;
            }
            let (p, _) = leave.unwrap();
            let out = self.head[p];
            let v = dir * self.alpha[p];
            if v > 0.0 {
                self.status[out] = Status::Lower;
                self.x[out] = 0.0;
            } else {
                self.status[out] = Status::Upper;
                self.x[out] = self.upper[out];
            }
            self.x[q] = if dir > 0.0 { theta } else { self.upper[q] - theta };
            self.status[q] = Status::Basic;
            self.head[p] = q;

            // Eta update of the explicit inverse.
            let ap = self.alpha[p];
            let (before, rest) = self.binv.split_at_mut(p * m);
            let (prow, after) = rest.split_at_mut(m);
            prow.iter_mut().for_each(|v| *v /= ap);
            for (r, row) in before.chunks_mut(m).enumerate() {
                let f = self.alpha[r];
                if f != 0.0 {
                    row.iter_mut().zip(prow.iter()).for_each(|(a, b)| *a -= f * b);
                }
            }
            for (k, row) in after.chunks_mut(m).enumerate() {
                let f = self.alpha[p + 1 + k];
                if f != 0.0 {
                    row.iter_mut().zip(prow.iter()).for_each(|(a, b)| *a -= f * b);
                }
            }
            self.since_refactor += 1;
        }
    }
}

/// Solves the LP to certified optimality.
pub fn solve<M: ConstraintMatrix>(lp: &LinearProgram<M>, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    lp.check()?;
    let (m, n) = (lp.a.rows(), lp.a.cols());
    let limit = opts.max_iterations.unwrap_or(20 * (m + n) + 1000);
    let mut s = Simplex::new(lp, *opts);

    if !s.art_rows.is_empty() {
        for k in 0..s.art_rows.len() {
            s.cost[n + m + k] = 1.0;
        }
        match s.run(limit)? {
            Outcome::Optimal => {}
            Outcome::Unbounded(_) => return Err(LpError::Infeasible(f64::NAN)),
        }
        s.refactor()?;
        let residual: f64 = (0..s.art_rows.len()).map(|k| s.x[n + m + k]).sum();
        if residual > 1e-7 * (1.0 + lp.b.iter().map(|b| b.abs()).fold(0.0, f64::max)) {
            return Err(LpError::Infeasible(residual));
        }
        for k in 0..s.art_rows.len() {
            s.cost[n + m + k] = 0.0;
            s.upper[n + m + k] = 0.0;
        }
    }
    s.cost[..n].copy_from_slice(&lp.c);

    let mut polish = 0;
    loop {
        match s.run(limit)? {
            Outcome::Optimal => {}
            Outcome::Unbounded(j) => return Err(LpError::Unbounded(j)),
        }
        s.refactor()?;
        s.compute_pi();
        s.lp.a.transpose_mul(&s.pi, &mut s.aty);
        let x: Vec<f64> = s.x[..n].iter().zip(&lp.upper).map(|(v, u)| v.clamp(0.0, *u)).collect();
        let y: Vec<f64> = s.pi.iter().map(|p| -p).collect();
        let certificate = certify(lp, &x, &y);
        if certificate.is_certified(opts.certify_tol) {
            return Ok(LpSolution {
                objective: lp.objective(&x),
                x,
                y,
                iterations: s.iterations,
                certificate,
            });
        }
        // A fresh factorization can expose a few more improving columns.
        polish += 1;
        if polish > 3 {
            return Err(LpError::NotCertified(certificate));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> DenseMatrix {
        let m = rows.len();
        let n = rows[0].len();
        DenseMatrix::new(m, n, rows.iter().flat_map(|r| r.iter().copied()).collect()).unwrap()
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let lp = LinearProgram {
            c: vec![-3.0, -5.0],
            a: dense(&[&[1.0, 0.0], &[0.0, 2.0], &[3.0, 2.0]]),
            b: vec![4.0, 12.0, 18.0],
            upper: vec![f64::INFINITY; 2],
        };
        let s = solve(&lp, &SimplexOptions::default()).unwrap();
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        assert!(s.certificate.is_certified(1e-9));
    }

    #[test]
    fn upper_bounds_flip() {
        // min -x - y, x + y ≤ 10, x,y ∈ [0, 3]
        let lp = LinearProgram {
            c: vec![-1.0, -1.0],
            a: dense(&[&[1.0, 1.0]]),
            b: vec![10.0],
            upper: vec![3.0, 3.0],
        };
        let s = solve(&lp, &SimplexOptions::default()).unwrap();
        assert!((s.objective + 6.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // min x + y s.t. -x - y ≤ -2 (x + y ≥ 2), x - y ≤ 1
        let lp = LinearProgram {
            c: vec![1.0, 2.0],
            a: dense(&[&[-1.0, -1.0], &[1.0, -1.0]]),
            b: vec![-2.0, 1.0],
            upper: vec![f64::INFINITY; 2],
        };
        let s = solve(&lp, &SimplexOptions::default()).unwrap();
        // x = 1.5, y = 0.5 → 2.5
        assert!((s.objective - 2.5).abs() < 1e-9, "{:?}", s);
    }

    #[test]
    fn infeasible_detected() {
        // x ≤ 1 and x ≥ 2
        let lp = LinearProgram {
            c: vec![1.0],
            a: dense(&[&[1.0], &[-1.0]]),
            b: vec![1.0, -2.0],
            upper: vec![f64::INFINITY],
        };
        assert!(matches!(
            solve(&lp, &SimplexOptions::default()),
            Err(LpError::Infeasible(_))
        ));
    }

    #[test]
    fn unbounded_detected() {
        let lp = LinearProgram {
            c: vec![-1.0, 0.0],
            a: dense(&[&[-1.0, 1.0]]),
            b: vec![1.0],
            upper: vec![f64::INFINITY; 2],
        };
        assert!(matches!(
            solve(&lp, &SimplexOptions::default()),
            Err(LpError::Unbounded(_))
        ));
    }

    #[test]
    fn crash_uses_singleton_slack() {
        // min x + 10 s  s.t.  -x - s ≤ -3, x ≤ 1 → x = 1, s = 2
        let lp = LinearProgram {
            c: vec![1.0, 10.0],
            a: dense(&[&[-1.0, -1.0], &[1.0, 0.0]]),
            b: vec![-3.0, 1.0],
            upper: vec![f64::INFINITY; 2],
        };
        let s = solve(&lp, &SimplexOptions::default()).unwrap();
        assert!((s.objective - 21.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let lp = LinearProgram {
            c: vec![1.0],
            a: dense(&[&[1.0, 1.0]]),
            b: vec![1.0],
            upper: vec![1.0],
        };
        assert!(matches!(
            solve(&lp, &SimplexOptions::default()),
            Err(LpError::Dimensions(_))
        ));
    }

    #[test]
    fn certificate_flags_suboptimal_point() {
        let lp = LinearProgram {
            c: vec![-1.0],
            a: dense(&[&[1.0]]),
            b: vec![2.0],
            upper: vec![f64::INFINITY],
        };
        let good = certify(&lp, &[2.0], &[1.0]);
        assert!(good.is_certified(1e-12));
        let bad = certify(&lp, &[1.0], &[1.0]);
        assert!(!bad.is_certified(1e-6));
    }
}
