//! δ as the dominant real eigenvalue of the linearized renormalization
//! operator.
//!
//! The operator `DT f(x) = α g'(g(x/α)) f(x/α) + α f(g(x/α))` is only ever
//! applied to vectors: `f` is evaluated at the nodes and mapped back to
//! coefficients by the DCT. Arnoldi builds a Hessenberg reduction on the
//! Krylov space of `e_1`, and after every step the Ritz value near δ is found
//! as a root of `det(tI - H_k)` by the secant method.

use log::{debug, info};
use rayon::prelude::*;
use rug::Float;

use crate::chebyshev::{
    self, differentiate, values_to_coeffs, ChebEvenSeries, ChebOddSeries, NodeSet,
};
use crate::error::{Error, Result};
use crate::linalg::{inner_product, Vector};
use crate::mpnum::{BigReal, PrecisionContext};

/// Anything that maps coefficient vectors linearly to coefficient vectors.
pub trait LinearOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &Vector) -> Result<Vector>;
}

/// `DT` at a converged `g`, with the per-node quantities that do not depend
/// on the argument precomputed.
#[derive(Clone, Debug)]
pub struct LinearizedOperator {
    pub g: ChebEvenSeries,
    pub gprime: ChebOddSeries,
    pub alpha: BigReal,
    pub nodes: NodeSet,
    pub ctx: PrecisionContext,
    /// `t_i / α`
    scaled: Vec<Float>,
    /// `g(t_i / α)`
    inner: Vec<Float>,
    /// `α g'(g(t_i / α))`
    weight: Vec<Float>,
}

impl LinearizedOperator {
    pub fn new(g: &ChebEvenSeries, alpha: &BigReal, nodes: &NodeSet, ctx: &PrecisionContext) -> Result<Self> {
        if g.len() != nodes.n() {
            return Err(Error::DimensionMismatch {
                expected: nodes.n(),
                found: g.len(),
            });
        }
        if alpha.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let bits = ctx.work_bits();
        let g = g.round_to(bits);
        let gprime = differentiate(&g);
        let c = g.floats();
        let d = gprime.floats();
        let a = alpha.round_to(bits).into_float();

        let per_node: Vec<(Float, Float, Float)> = nodes
            .nodes()
            .par_iter()
            .map(|t| {
                let z = Float::with_val(bits, t.float() / &a);
                let y = chebyshev::eval_even_floats(&c, &z, bits);
                let gp = chebyshev::eval_odd_floats(&d, &y, bits);
                let w = Float::with_val(bits, &a * &gp);
                (z, y, w)
            })
            .collect();
        let mut scaled = Vec::with_capacity(per_node.len());
        let mut inner = Vec::with_capacity(per_node.len());
        let mut weight = Vec::with_capacity(per_node.len());
        for (z, y, w) in per_node {
            if !(z.is_finite() && y.is_finite() && w.is_finite()) {
                return Err(Error::NonFinite("linearized operator"));
            }
            scaled.push(z);
            inner.push(y);
            weight.push(w);
        }
        Ok(LinearizedOperator {
            g,
            gprime,
            alpha: BigReal::from_float(a),
            nodes: nodes.clone(),
            ctx: *ctx,
            scaled,
            inner,
            weight,
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.n()
    }
}

impl LinearOp for LinearizedOperator {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, v: &Vector) -> Result<Vector> {
        apply_dt(self, v)
    }
}

/// `DT` applied to the even series with coefficients `v`, returned as
/// coefficients.
pub fn apply_dt(op: &LinearizedOperator, v: &Vector) -> Result<Vector> {
    let n = op.n();
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    let bits = op.ctx.work_bits();
    let f: Vec<Float> = v.floats().map(|x| Float::with_val(bits, x)).collect();
    let values: Vec<BigReal> = (0..n)
        .into_par_iter()
        .map(|i| {
            let fz = chebyshev::eval_even_floats(&f, &op.scaled[i], bits);
            let fy = chebyshev::eval_even_floats(&f, &op.inner[i], bits);
            let mut w = Float::with_val(bits, &op.weight[i] * &fz);
            w += Float::with_val(bits, op.alpha.float() * &fy);
            BigReal::from_float(w)
        })
        .collect();
    values_to_coeffs(&Vector::new(values), &op.nodes, &op.ctx).map(|s| s.to_vector())
}

/// Upper-Hessenberg matrix stored by columns; column `j` holds rows
/// `0..=j+1`, everything below the subdiagonal is structurally zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Hessenberg {
    cols: Vec<Vec<BigReal>>,
}

impl Hessenberg {
    pub fn new() -> Self {
        Hessenberg { cols: Vec::new() }
    }

    /// From a dense square array; entries below the subdiagonal are ignored.
    pub fn from_dense(rows: &[Vec<BigReal>], ctx: &PrecisionContext) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidArgument("Hessenberg input must be square".into()));
        }
        let cols = (0..k)
            .map(|j| {
                (0..=(j + 1))
                    .map(|i| {
                        if i < k {
                            rows[i][j].clone()
                        } else {
                            BigReal::zero(ctx)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Hessenberg { cols })
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    /// Entry `(i, j)`, or `None` below the subdiagonal / out of range.
    pub fn get(&self, i: usize, j: usize) -> Option<&BigReal> {
        self.cols.get(j).and_then(|c| c.get(i))
    }

    fn push_column(&mut self, col: Vec<BigReal>) {
        debug_assert_eq!(col.len(), self.cols.len() + 2);
        self.cols.push(col);
    }
}

/// `det(tI - H_k)` for the leading `k x k` block, by the principal-minor
/// recurrence `p_i = (t - h_ii) p_{i-1} - sum_{j<i} h_ji (prod_{l=j}^{i-1} h_{l+1,l}) p_{j-1}`.
pub fn hessenberg_charpoly_eval(h: &Hessenberg, k: usize, t: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    if k == 0 || k > h.cols() {
        return Err(Error::InvalidArgument(format!(
            "charpoly order {k} outside 1..={}",
            h.cols()
        )));
    }
    let bits = ctx.work_bits();
    let e = |i: usize, j: usize| h.cols[j][i].float();
    // p is the leading minor of order i; scaled[j] = p_j prod_{l=j}^{i-1} h_{l+1,l}
    let mut p = Float::with_val(bits, 1);
    let mut scaled: Vec<Float> = Vec::with_capacity(k);
    for i in 0..k {
        let mut next = Float::with_val(bits, t.float() - e(i, i));
        next *= &p;
        let mut sum = Float::new(bits);
        for (j, s) in scaled.iter().enumerate() {
            sum += e(j, i) * s;
        }
        next -= &sum;
        if i + 1 < k {
            let sub = e(i + 1, i);
            for s in scaled.iter_mut() {
                *s *= sub;
            }
            scaled.push(Float::with_val(bits, sub * &p));
        }
        p = next;
    }
    let r = p;
    if !r.is_finite() {
        return Err(Error::NonFinite("characteristic polynomial"));
    }
    Ok(BigReal::from_float(r))
}

/// Secant iteration from `t0, t1` until `|t_{i+1} - t_i| < tol |t_i|`.
pub fn secant_root<F>(mut f: F, t0: &BigReal, t1: &BigReal, tol: &BigReal, max_iters: usize, ctx: &PrecisionContext) -> Result<BigReal>
where
    F: FnMut(&BigReal) -> Result<BigReal>,
{
    if t0 == t1 {
        return Err(Error::InvalidArgument("secant needs two distinct starting points".into()));
    }
    let mut a = t0.round_to(ctx.work_bits());
    let mut b = t1.round_to(ctx.work_bits());
    let mut fa = f(&a)?;
    let mut fb = f(&b)?;
    let mut best = if fa.cmp_abs(&fb).is_lt() { a.clone() } else { b.clone() };
    let mut best_f = if fa.cmp_abs(&fb).is_lt() { fa.clone() } else { fb.clone() };

    for _ in 0..max_iters {
        if fb.is_zero() {
            return Ok(b);
        }
        let df = fb.sub(&fa, ctx)?;
        if df.is_zero() {
            return Err(Error::FlatSecant { best });
        }
        let step = fb.mul(&b.sub(&a, ctx)?, ctx)?.div(&df, ctx)?;
        let c = b.sub(&step, ctx)?;
        let done = step.abs() < tol.mul(&b.abs(), ctx)?;
        a = b;
        fa = fb;
        b = c;
        if done {
            return Ok(b);
        }
        fb = f(&b)?;
        if fb.cmp_abs(&best_f).is_lt() {
            best = b.clone();
            best_f = fb.clone();
        }
    }
    Err(Error::SecantIterations {
        iterations: max_iters,
        best,
    })
}

/// Krylov basis and Hessenberg reduction built so far.
#[derive(Clone, Debug)]
pub struct ArnoldiState {
    /// Orthonormal basis `q_1..q_{k+1}` (the last one is the next direction
    /// unless the process is complete).
    pub q: Vec<Vector>,
    pub h: Hessenberg,
    pub k: usize,
    pub delta_estimates: Vec<Option<BigReal>>,
    /// Set when the Krylov space became invariant.
    pub complete: bool,
    pub reorthogonalizations: usize,
}

/// Ratio `||w_orth|| / ||w||` below which a second Gram-Schmidt pass runs.
pub const REORTH_THRESHOLD: f64 = 0.1;

impl ArnoldiState {
    /// Starts from `q_1 = e_1`.
    pub fn new(n: usize, ctx: &PrecisionContext) -> Result<Self> {
        Ok(ArnoldiState {
            q: vec![Vector::unit(n, 0, ctx)?],
            h: Hessenberg::new(),
            k: 0,
            delta_estimates: Vec::new(),
            complete: false,
            reorthogonalizations: 0,
        })
    }

    /// Ritz vector `Q_k y` with `(H_k - λ I) y = 0`, `y_k = 1`, normalized.
    pub fn ritz_vector(&self, lambda: &BigReal, ctx: &PrecisionContext) -> Result<Vector> {
        let k = self.k;
        if k == 0 {
            return Err(Error::InvalidArgument("no Arnoldi steps taken".into()));
        }
        let mut y = vec![BigReal::zero(ctx); k];
        y[k - 1] = BigReal::one(ctx);
        for i in (1..k).rev() {
            // row i: h_{i,i-1} y_{i-1} + sum_{j>=i} (h_ij - λ δ_ij) y_j = 0
            let mut s = BigReal::zero(ctx);
            for (j, yj) in y.iter().enumerate().skip(i) {
                let mut hij = self.h.get(i, j).expect("in band").clone();
                if i == j {
                    hij = hij.sub(lambda, ctx)?;
                }
                s = s.add(&hij.mul(yj, ctx)?, ctx)?;
            }
            let sub = self.h.get(i, i - 1).expect("subdiagonal");
            y[i - 1] = s.neg().div(sub, ctx)?;
        }
        let n = self.q[0].len();
        let mut v = Vector::zeros(n, ctx);
        for (qj, yj) in self.q.iter().zip(&y) {
            v = v.axpy(yj, qj, ctx)?;
        }
        let norm = v.norm2(ctx)?;
        v.scale(&BigReal::one(ctx).div(&norm, ctx)?, ctx)
    }
}

fn project_out(w: &Vector, q: &[Vector], ctx: &PrecisionContext) -> Result<(Vector, Vec<BigReal>)> {
    // classical Gram-Schmidt: every projection uses the same w
    let coeffs: Vec<BigReal> = q
        .par_iter()
        .map(|qi| inner_product(qi, w, ctx))
        .collect::<Result<_>>()?;
    let mut r = w.clone();
    for (qi, hi) in q.iter().zip(&coeffs) {
        r = r.axpy(&hi.neg(), qi, ctx)?;
    }
    Ok((r, coeffs))
}

/// One Arnoldi step: extends `H` by a column and the basis by a vector.
pub fn arnoldi_step<L: LinearOp + ?Sized>(state: &mut ArnoldiState, op: &L, ctx: &PrecisionContext) -> Result<()> {
    if state.complete {
        return Err(Error::InvalidArgument("Arnoldi process already complete".into()));
    }
    let k = state.k;
    let qk = &state.q[k];
    let w = op.apply(qk)?;
    let w_norm = w.norm2(ctx)?;
    let (mut r, mut col) = project_out(&w, &state.q, ctx)?;
    let mut r_norm = r.norm2(ctx)?;

    let ratio = if w_norm.is_zero() {
        0.0
    } else {
        r_norm.div(&w_norm, ctx)?.to_f64()
    };
    if ratio < REORTH_THRESHOLD && !r_norm.is_zero() {
        let (r2, corr) = project_out(&r, &state.q, ctx)?;
        for (c, d) in col.iter_mut().zip(&corr) {
            *c = c.add(d, ctx)?;
        }
        r = r2;
        r_norm = r.norm2(ctx)?;
        state.reorthogonalizations += 1;
    }

    let breakdown_tol = ctx.eps_scaled(16).mul(&w_norm, ctx)?;
    let n = qk.len();
    col.push(r_norm.clone());
    state.h.push_column(col);
    state.k += 1;
    if r_norm <= breakdown_tol || state.k >= n {
        state.complete = true;
        debug!("Arnoldi breakdown at k={}: invariant Krylov space", state.k);
        return Ok(());
    }
    let inv = BigReal::one(ctx).div(&r_norm, ctx)?;
    state.q.push(r.scale(&inv, ctx)?);
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaConfig {
    pub target_digits: u32,
    pub max_steps: usize,
    pub seeds: (String, String),
    pub secant_max_iters: usize,
}

/// Arnoldi step cap for operator size `n`.
pub fn arnoldi_step_cap(n: usize) -> usize {
    (3.0 * (n as f64).sqrt()).ceil() as usize + 10
}

impl DeltaConfig {
    pub fn new(n: usize, target_digits: u32) -> Self {
        DeltaConfig {
            target_digits,
            max_steps: arnoldi_step_cap(n),
            seeds: ("4.6".into(), "4.7".into()),
            secant_max_iters: 200,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DeltaSolution {
    pub delta: BigReal,
    pub steps: usize,
    /// Agreement in digits between the last two estimates.
    pub agreement_digits: u32,
    pub state: ArnoldiState,
}

/// Decimal digits to which `a` and `b` agree, capped at `cap`.
pub fn agreement_digits(a: &BigReal, b: &BigReal, cap: u32, ctx: &PrecisionContext) -> Result<u32> {
    let diff = a.sub(b, ctx)?;
    if diff.is_zero() {
        return Ok(cap);
    }
    let scale = if a.cmp_abs(b).is_lt() { a.abs() } else { b.abs() };
    if scale.is_zero() {
        return Ok(0);
    }
    let d = scale.log10_abs() - diff.log10_abs();
    Ok(d.floor().clamp(0.0, cap as f64) as u32)
}

fn ritz_estimate(state: &ArnoldiState, prev: Option<&BigReal>, cfg: &DeltaConfig, ctx: &PrecisionContext) -> Result<BigReal> {
    let (t0, t1) = match prev {
        Some(p) => {
            let bump = BigReal::from_decimal("1.001", ctx)?;
            (p.clone(), p.mul(&bump, ctx)?)
        }
        None => (
            BigReal::from_decimal(&cfg.seeds.0, ctx)?,
            BigReal::from_decimal(&cfg.seeds.1, ctx)?,
        ),
    };
    let tol = BigReal::from_decimal(&format!("1e-{}", cfg.target_digits + 2), ctx)?;
    let k = state.k;
    let p = |t: &BigReal| hessenberg_charpoly_eval(&state.h, k, t, ctx);
    match secant_root(p, &t0, &t1, &tol, cfg.secant_max_iters, ctx) {
        // converged to rounding noise before meeting the step test
        Err(Error::FlatSecant { best }) if prev.is_some() => Ok(best),
        r => r,
    }
}

/// δ from a converged `g` by Arnoldi on `DT`.
pub fn solve_delta(g: &ChebEvenSeries, ctx: &PrecisionContext, cfg: &DeltaConfig) -> Result<DeltaSolution> {
    let n = g.len();
    let nodes = chebyshev::make_nodes(n, ctx)?;
    let alpha = crate::gsolver::alpha_from(g, ctx)?;
    let op = LinearizedOperator::new(g, &alpha, &nodes, ctx)?;
    solve_delta_with(&op, cfg)
}

/// As [`solve_delta`], with a prebuilt operator.
pub fn solve_delta_with<L>(op: &L, cfg: &DeltaConfig) -> Result<DeltaSolution>
where
    L: LinearOp + HasContext + ?Sized,
{
    let ctx = op.context();
    let mut state = ArnoldiState::new(op.dim(), &ctx)?;
    let mut last: Option<BigReal> = None;
    let mut best_agreement = 0;

    while state.k < cfg.max_steps && !state.complete {
        arnoldi_step(&mut state, op, &ctx)?;
        let est = match ritz_estimate(&state, last.as_ref(), cfg, &ctx) {
            Ok(e) => Some(e),
            Err(e) if e.is_numerical() => {
                debug!("Arnoldi k={}: no Ritz value near delta ({e})", state.k);
                None
            }
            Err(e) => return Err(e),
        };
        state.delta_estimates.push(est.clone());
        let Some(est) = est else { continue };

        let agree = match &last {
            Some(prev) => agreement_digits(prev, &est, cfg.target_digits, &ctx)?,
            None => 0,
        };
        info!(
            "delta arnoldi k={} estimate={} agreement={agree}",
            state.k,
            est.to_decimal(20)
        );
        best_agreement = agree;
        last = Some(est);
        if agree >= cfg.target_digits || state.complete {
            return Ok(DeltaSolution {
                delta: last.expect("just set"),
                steps: state.k,
                agreement_digits: agree,
                state,
            });
        }
    }
    match last {
        Some(best) if state.complete => Ok(DeltaSolution {
            delta: best,
            steps: state.k,
            agreement_digits: best_agreement,
            state,
        }),
        Some(best) => Err(Error::DeltaNotStabilized {
            steps: state.k,
            agreement_digits: best_agreement,
            best,
        }),
        None => Err(Error::DeltaNotStabilized {
            steps: state.k,
            agreement_digits: 0,
            best: BigReal::zero(&ctx),
        }),
    }
}

/// Operators that carry their own working precision.
pub trait HasContext {
    fn context(&self) -> PrecisionContext;
}

impl HasContext for LinearizedOperator {
    fn context(&self) -> PrecisionContext {
        self.ctx
    }
}
