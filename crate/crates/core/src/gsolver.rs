//! Collocation solver for the universal function `g`.
//!
//! The unknowns are the coefficients of an even Chebyshev series. They are
//! fixed by requiring `g(1) g(t) - g(g(g(1) t)) = 0` at the `n` collocation
//! nodes, and the resulting system is solved with the inverse column updating
//! method (ICUM): a quasi-Newton iteration that keeps an explicit approximate
//! inverse Jacobian at reduced precision and corrects one column of it per
//! step.
//!
//! The starting point comes from a ladder of smaller solves: the size-`n`
//! problem is seeded with the zero-padded solution at size `~1.5 sqrt(n)`, and
//! so on down to a rung that starts from the two-term guess `(0.6, -0.7)`.

use log::{debug, info};
use rayon::prelude::*;
use rug::Float;

use crate::chebyshev::{self, make_nodes, ChebEvenSeries, NodeSet};
use crate::error::{Error, Result};
use crate::linalg::{invert_gauss_owned, mat_vec, rank_one_update, DenseMatrix, Vector};
use crate::mpnum::{bits_for_digits, BigReal, PrecisionContext};

/// Coefficients of the two-term starting guess `0.6/2 - 0.7 T_2(x)`.
pub const BASE_GUESS: [&str; 2] = ["0.6", "-0.7"];

/// Rungs at or below this size are not solved separately: the two-term guess
/// seeds the rung above them directly.
pub const LADDER_FLOOR: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GSolveConfig {
    pub n: usize,
    pub target_digits: u32,
    /// Decimal digits carried by the approximate inverse Jacobian.
    pub jacobian_digits: u32,
    /// Central differences use the absolute step `10^-fd_step_exponent`.
    pub fd_step_exponent: u32,
    pub max_icum_iters: usize,
    /// Convergence when `||F||_inf <= 10^-residual_tol_exponent`.
    pub residual_tol_exponent: u32,
    pub guard_bits: u32,
}

fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

/// Maximum ICUM iterations allowed for one rung of size `n`.
pub fn icum_iteration_cap(n: usize) -> usize {
    8 * ceil_sqrt(n) + 40
}

impl GSolveConfig {
    /// Defaults for a size-`n` solve to `target_digits` digits.
    pub fn new(n: usize, target_digits: u32) -> Result<Self> {
        let jacobian_digits = ((4.0 * (n as f64).sqrt()).ceil() as u32)
            .max(12)
            .min(target_digits.max(1));
        let cfg = GSolveConfig {
            n,
            target_digits,
            jacobian_digits,
            fd_step_exponent: jacobian_digits.div_ceil(2),
            max_icum_iters: icum_iteration_cap(n),
            residual_tol_exponent: target_digits + 3,
            guard_bits: PrecisionContext::default_guard(n),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overrides the Jacobian precision and re-derives the finite-difference step.
    pub fn with_jacobian_digits(mut self, digits: u32) -> Result<Self> {
        self.jacobian_digits = digits;
        self.fd_step_exponent = digits.div_ceil(2);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n < 2 {
            return bad(format!("collocation size must be at least 2, got {}", self.n));
        }
        if self.target_digits == 0 {
            return bad("target digits must be positive".into());
        }
        if self.jacobian_digits == 0 || self.jacobian_digits > self.target_digits {
            return bad(format!(
                "jacobian digits must be in 1..={}, got {}",
                self.target_digits, self.jacobian_digits
            ));
        }
        if self.fd_step_exponent == 0 {
            return bad("finite-difference exponent must be positive".into());
        }
        if self.max_icum_iters == 0 {
            return bad("iteration cap must be positive".into());
        }
        Ok(())
    }

    /// Full working precision of the solve.
    pub fn context(&self) -> PrecisionContext {
        PrecisionContext::for_digits(self.target_digits, self.guard_bits)
            .expect("for_digits never fails")
    }

    /// Reduced precision of the approximate inverse Jacobian.
    pub fn jacobian_context(&self) -> PrecisionContext {
        PrecisionContext::for_digits(self.jacobian_digits, 0).expect("for_digits never fails")
    }

    fn residual_tol(&self, ctx: &PrecisionContext) -> BigReal {
        BigReal::from_decimal(&format!("1e-{}", self.residual_tol_exponent), ctx)
            .expect("well-formed literal")
    }
}

/// Residual `g(1) g(t_i) - g(g(g(1) t_i))` at every node, evaluated with
/// prefix Clenshaw plus isolated trailing terms from `dense_prefix` on.
fn residual_floats(c: &[Float], nodes: &NodeSet, dense_prefix: usize, bits: u32) -> Vec<Float> {
    let g1 = chebyshev::sum_at_one(c, bits);
    let eval = |x: &Float| -> Float {
        if dense_prefix >= c.len() {
            chebyshev::eval_even_floats(c, x, bits)
        } else {
            chebyshev::tail_split_floats(c, x, dense_prefix, bits)
        }
    };
    nodes
        .nodes()
        .par_iter()
        .map(|t| {
            let gt = eval(t.float());
            let inner = Float::with_val(bits, &g1 * t.float());
            let once = eval(&inner);
            let twice = eval(&once);
            let mut r = Float::with_val(bits, &g1 * &gt);
            r -= &twice;
            r
        })
        .collect()
}

/// The collocation residual `F(c)` at `ctx` precision.
pub fn residual_f(c: &Vector, nodes: &NodeSet, ctx: &PrecisionContext) -> Result<Vector> {
    if c.len() != nodes.n() {
        return Err(Error::DimensionMismatch {
            expected: nodes.n(),
            found: c.len(),
        });
    }
    let coeffs: Vec<Float> = c.floats().cloned().collect();
    let out = residual_floats(&coeffs, nodes, coeffs.len(), ctx.work_bits());
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("residual"));
    }
    Ok(Vector::from_floats(out))
}

/// Collocation sizes from `n` downwards: `n_{i+1} = round(1.5 sqrt(n_i))`,
/// stopping before the first size at or below [`LADDER_FLOOR`].
pub fn bootstrap_ladder(n: usize) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "collocation size must be at least 2, got {n}"
        )));
    }
    let mut ladder = vec![n];
    let mut m = n;
    loop {
        let next = ((1.5 * (m as f64).sqrt() + 0.5).floor() as usize).max(2);
        if next <= LADDER_FLOOR || next >= m {
            break;
        }
        ladder.push(next);
        m = next;
    }
    Ok(ladder)
}

/// Central-difference Jacobian of `F` at `c`, computed entirely at `jac_ctx`
/// precision with absolute step `10^-fd_step_exponent`.
///
/// Columns are independent; only the leading nonzero block of `c` goes through
/// Clenshaw, the perturbed trailing coefficient is evaluated in isolation.
pub fn fd_jacobian(
    c: &Vector,
    nodes: &NodeSet,
    jac_ctx: &PrecisionContext,
    fd_step_exponent: u32,
) -> Result<DenseMatrix> {
    let n = nodes.n();
    if c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.len(),
        });
    }
    let bits = jac_ctx.work_bits();
    let base: Vec<Float> = c.floats().map(|x| Float::with_val(bits, x)).collect();
    let prefix = base.iter().rposition(|x| !x.is_zero()).map_or(1, |p| p + 1);
    let h = BigReal::from_decimal(&format!("1e-{fd_step_exponent}"), jac_ctx)?.into_float();
    let mut two_h = h.clone();
    two_h <<= 1;

    let columns: Vec<Vector> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut plus = base.clone();
            plus[j] += &h;
            let mut minus = base.clone();
            minus[j] -= &h;
            let fp = residual_floats(&plus, nodes, prefix, bits);
            let fm = residual_floats(&minus, nodes, prefix, bits);
            let col = fp
                .into_iter()
                .zip(fm)
                .map(|(mut a, b)| {
                    a -= &b;
                    a /= &two_h;
                    a
                })
                .collect();
            Vector::from_floats(col)
        })
        .collect();
    DenseMatrix::from_columns(columns)
}

/// Iterate of the ICUM solve.
#[derive(Clone, Debug)]
pub struct SolverState {
    /// Current coefficients, full precision.
    pub x: Vector,
    /// Approximate inverse Jacobian, reduced precision.
    pub binv: DenseMatrix,
    /// `F(x)`, full precision.
    pub fx: Vector,
    pub k: usize,
    /// `||F(x^(k))||_inf` for every iterate visited.
    pub history: Vec<BigReal>,
    pub refreshes: usize,
}

/// Quantities of one ICUM update, kept for diagnostics and tests.
#[derive(Clone, Debug)]
pub struct IcumStep {
    pub s: Vector,
    pub y: Vector,
    /// Column that was updated, or `None` when `y = 0` and `s = 0`.
    pub column: Option<usize>,
}

impl SolverState {
    /// Evaluates `F` at `x0`, builds the finite-difference Jacobian there and
    /// inverts it at reduced precision.
    pub fn new(x0: Vector, nodes: &NodeSet, cfg: &GSolveConfig) -> Result<Self> {
        let ctx = cfg.context();
        let x = x0.round_to(ctx.work_bits());
        let fx = residual_f(&x, nodes, &ctx)?;
        let binv = inverse_jacobian(&x, nodes, cfg)?;
        let history = vec![fx.norm_inf()?];
        Ok(SolverState {
            x,
            binv,
            fx,
            k: 0,
            history,
            refreshes: 0,
        })
    }

    pub fn residual_norm(&self) -> BigReal {
        self.history.last().cloned().expect("history starts non-empty")
    }

    /// Recomputes and re-inverts the Jacobian at the current iterate.
    ///
    /// The old `B'` is released first so only one n x n matrix is live; after
    /// an error the state has no usable `B'` and must be rebuilt.
    pub fn refresh_jacobian(&mut self, nodes: &NodeSet, cfg: &GSolveConfig) -> Result<()> {
        self.binv = DenseMatrix::zeros(0, &cfg.jacobian_context());
        self.binv = inverse_jacobian(&self.x, nodes, cfg)?;
        self.refreshes += 1;
        Ok(())
    }

    /// One ICUM iteration:
    /// `x' = x - B' F(x)`, `s = x' - x`, `y = F(x') - F(x)`,
    /// `B' += (s - B' y) / y_j  e_j^T` with `|y_j| = ||y||_inf`.
    pub fn step(&mut self, nodes: &NodeSet, cfg: &GSolveConfig) -> Result<IcumStep> {
        let ctx = cfg.context();
        let jac = cfg.jacobian_context();

        let dx = mat_vec(&self.binv, &self.fx, &jac)?;
        let x1 = self.x.sub(&dx, &ctx)?;
        let s = x1.sub(&self.x, &ctx)?;
        let f1 = residual_f(&x1, nodes, &ctx)?;
        let y = f1.sub(&self.fx, &ctx)?;
        let j = y.argmax_abs()?;
        let yj = y.entries()[j].clone();

        let column = if yj.is_zero() {
            if s.iter().any(|v| !v.is_zero()) {
                return Err(Error::IcumBreakdown { iteration: self.k });
            }
            None
        } else {
            let by = mat_vec(&self.binv, &y, &jac)?;
            let s_jac = s.round_to(jac.work_bits());
            let inv_yj = BigReal::one(&jac).div(&yj, &jac)?;
            let u = s_jac.sub(&by, &jac)?.scale(&inv_yj, &jac)?;
            rank_one_update(&mut self.binv, &u, j, &jac)?;
            Some(j)
        };

        self.x = x1;
        self.fx = f1;
        self.k += 1;
        self.history.push(self.fx.norm_inf()?);
        Ok(IcumStep { s, y, column })
    }
}

fn inverse_jacobian(x: &Vector, nodes: &NodeSet, cfg: &GSolveConfig) -> Result<DenseMatrix> {
    let jac = cfg.jacobian_context();
    let b0 = fd_jacobian(x, nodes, &jac, cfg.fd_step_exponent)?;
    invert_gauss_owned(b0, &jac)
}

/// Outcome of [`icum_solve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IcumStats {
    pub iterations: usize,
    pub refreshes: usize,
}

/// Runs ICUM until `||F||_inf <= 10^-residual_tol_exponent`.
///
/// When the best residual has not halved for 10 iterations, or the update
/// breaks down, the Jacobian is rebuilt at the current iterate.
pub fn icum_solve(state: &mut SolverState, cfg: &GSolveConfig, nodes: &NodeSet) -> Result<IcumStats> {
    let ctx = cfg.context();
    let tol = cfg.residual_tol(&ctx);
    let start_k = state.k;
    let mut best = state.residual_norm();
    let mut best_x = state.x.clone();
    let mut mark_norm = best.clone();
    let mut mark_k = state.k;

    loop {
        let norm = state.residual_norm();
        if norm <= tol {
            return Ok(IcumStats {
                iterations: state.k - start_k,
                refreshes: state.refreshes,
            });
        }
        if state.k - start_k >= cfg.max_icum_iters {
            return Err(Error::NonConvergence {
                iterations: state.k - start_k,
                best_residual: best.to_f64(),
                best: Box::new(best_x),
            });
        }
        if state.k - mark_k >= 10 {
            debug!("n={} k={}: residual stagnated, refreshing Jacobian", cfg.n, state.k);
            state.refresh_jacobian(nodes, cfg)?;
            mark_k = state.k;
            mark_norm = best.clone();
        }

        match state.step(nodes, cfg) {
            Ok(_) => {}
            Err(Error::IcumBreakdown { iteration }) => {
                debug!("n={} k={iteration}: ICUM breakdown, refreshing Jacobian", cfg.n);
                state.refresh_jacobian(nodes, cfg)?;
                mark_k = state.k;
                continue;
            }
            Err(e) => return Err(e),
        }

        let norm = state.residual_norm();
        info!(
            "g solve n={} iter={} log10|F|={:.2}",
            cfg.n,
            state.k,
            norm.log10_abs()
        );
        if norm < best {
            best = norm.clone();
            best_x = state.x.clone();
        }
        let mut half = mark_norm.float().clone();
        half >>= 1;
        if best.float() <= &half {
            mark_norm = best.clone();
            mark_k = state.k;
        }
    }
}

/// Storage for solved rungs, so runs can resume from earlier results.
pub trait RungCache: Sync {
    /// A stored series of size `n` carrying at least `min_bits` bits.
    fn load(&self, n: usize, min_bits: u32) -> Result<Option<ChebEvenSeries>>;
    fn store(&self, n: usize, series: &ChebEvenSeries) -> Result<()>;
}

/// What happened at one rung of the ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct RungReport {
    pub n: usize,
    pub target_digits: u32,
    pub work_bits: u32,
    pub jacobian_digits: u32,
    pub iterations: usize,
    pub refreshes: usize,
    pub reused: bool,
    /// log10 of `||F||_inf` at every iterate (empty for reused rungs).
    pub residual_log10: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct GSolution {
    pub series: ChebEvenSeries,
    pub ctx: PrecisionContext,
    /// Rungs in the order they were solved (smallest first).
    pub rungs: Vec<RungReport>,
}

impl GSolution {
    pub fn total_iterations(&self) -> usize {
        self.rungs.iter().map(|r| r.iterations).sum()
    }
}

/// Digits aimed for at an intermediate rung of size `m`.
fn rung_digits(m: usize) -> u32 {
    (1.6 * m as f64).ceil() as u32
}

fn base_guess(ctx: &PrecisionContext) -> Result<ChebEvenSeries> {
    ChebEvenSeries::new(
        BASE_GUESS
            .iter()
            .map(|s| BigReal::from_decimal(s, ctx))
            .collect::<Result<_>>()?,
    )
}

/// Solves for the size-`cfg.n` Chebyshev model of `g`, bottom-up along the
/// bootstrap ladder.
pub fn solve_g(cfg: &GSolveConfig, cache: Option<&dyn RungCache>) -> Result<GSolution> {
    cfg.validate()?;
    let ladder = bootstrap_ladder(cfg.n)?;
    let mut seed = base_guess(&cfg.context())?;
    let mut rungs = Vec::with_capacity(ladder.len());
    let mut ctx = cfg.context();

    for &m in ladder.iter().rev() {
        let rung_cfg = if m == cfg.n {
            cfg.clone()
        } else {
            GSolveConfig::new(m, rung_digits(m).min(cfg.target_digits))?
        };
        ctx = rung_cfg.context();

        if let Some(cached) = cache.map(|c| c.load(m, ctx.work_bits())).transpose()?.flatten() {
            info!("rung n={m}: reusing checkpoint ({} bits)", cached.coeffs()[0].precision_bits());
            seed = cached.round_to(ctx.work_bits());
            rungs.push(RungReport {
                n: m,
                target_digits: rung_cfg.target_digits,
                work_bits: ctx.work_bits(),
                jacobian_digits: rung_cfg.jacobian_digits,
                iterations: 0,
                refreshes: 0,
                reused: true,
                residual_log10: Vec::new(),
            });
            continue;
        }

        info!(
            "rung n={m}: solving to {} digits ({} bits, jacobian {} digits)",
            rung_cfg.target_digits,
            ctx.work_bits(),
            rung_cfg.jacobian_digits
        );
        let nodes = make_nodes(m, &ctx)?;
        let x0 = seed.resized(m, &ctx)?.to_vector();
        let mut state = SolverState::new(x0, &nodes, &rung_cfg)?;
        let stats = icum_solve(&mut state, &rung_cfg, &nodes)?;
        let series = ChebEvenSeries::from_vector(state.x.clone())?;
        if let Some(c) = cache {
            c.store(m, &series)?;
        }
        rungs.push(RungReport {
            n: m,
            target_digits: rung_cfg.target_digits,
            work_bits: ctx.work_bits(),
            jacobian_digits: rung_cfg.jacobian_digits,
            iterations: stats.iterations,
            refreshes: stats.refreshes,
            reused: false,
            residual_log10: state.history.iter().map(BigReal::log10_abs).collect(),
        });
        seed = series;
    }

    Ok(GSolution {
        series: seed,
        ctx,
        rungs,
    })
}

/// Signed `alpha = 1 / g(1)`; negative for the true fixed point.
pub fn alpha_from(g: &ChebEvenSeries, ctx: &PrecisionContext) -> Result<BigReal> {
    BigReal::one(ctx).div(&g.value_at_one(ctx), ctx)
}

/// Bits needed for `digits` decimal digits of the Jacobian (exposed for reports).
pub fn jacobian_bits(digits: u32) -> u32 {
    bits_for_digits(digits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::clenshaw_eval;

    fn dec(s: &str, c: &PrecisionContext) -> BigReal {
        BigReal::from_decimal(s, c).unwrap()
    }

    #[test]
    fn ladder_examples() {
        assert_eq!(bootstrap_ladder(2).unwrap(), vec![2]);
        assert_eq!(bootstrap_ladder(100).unwrap(), vec![100, 15]);
        assert_eq!(bootstrap_ladder(1000).unwrap(), vec![1000, 47, 10]);
        assert_eq!(bootstrap_ladder(16).unwrap(), vec![16]);
        assert_eq!(bootstrap_ladder(24).unwrap(), vec![24, 7]);
        assert!(bootstrap_ladder(1).is_err());
        for n in 2..2000 {
            let l = bootstrap_ladder(n).unwrap();
            assert!(l.windows(2).all(|w| w[0] > w[1]));
            assert!(l[1..].iter().all(|&m| m > LADDER_FLOOR));
        }
    }

    #[test]
    fn config_defaults() {
        let c = GSolveConfig::new(64, 138).unwrap();
        assert_eq!(c.jacobian_digits, 32);
        assert_eq!(c.fd_step_exponent, 16);
        assert_eq!(c.residual_tol_exponent, 141);
        assert_eq!(c.max_icum_iters, 8 * 8 + 40);
        assert_eq!(GSolveConfig::new(4, 100).unwrap().jacobian_digits, 12);
        assert_eq!(GSolveConfig::new(4, 8).unwrap().jacobian_digits, 8);
        assert!(GSolveConfig::new(1, 10).is_err());
        assert!(GSolveConfig::new(10, 20).unwrap().with_jacobian_digits(21).is_err());
        assert_eq!(icum_iteration_cap(17), 8 * 5 + 40);
    }

    #[test]
    fn residual_of_base_guess() {
        let c = PrecisionContext::from_bits(128).unwrap();
        let nodes = make_nodes(2, &c).unwrap();
        let x = Vector::new(vec![dec("0.6", &c), dec("-0.7", &c)]);
        let f = residual_f(&x, &nodes, &c).unwrap();
        // independent evaluation with g(x) = 1 - 1.4 x^2
        let g = |v: f64| 1.0 - 1.4 * v * v;
        for (fi, t) in f.iter().zip(nodes.nodes()) {
            let t = t.to_f64();
            let want = g(1.0) * g(t) - g(g(g(1.0) * t));
            assert!((fi.to_f64() - want).abs() < 1e-14);
        }
        let norm = f.norm_inf().unwrap().to_f64();
        assert!(norm > 0.0 && norm < 0.2, "{norm}");
    }

    #[test]
    fn constant_one_is_a_spurious_root() {
        let c = PrecisionContext::from_bits(128).unwrap();
        let nodes = make_nodes(5, &c).unwrap();
        let mut x = Vector::zeros(5, &c).into_entries();
        x[0] = BigReal::from_i64(2, &c);
        let f = residual_f(&Vector::new(x), &nodes, &c).unwrap();
        assert!(f.iter().all(BigReal::is_zero));
    }

    #[test]
    fn alpha_of_base_guess() {
        let c = PrecisionContext::from_bits(128).unwrap();
        let g = base_guess(&c).unwrap();
        let a = alpha_from(&g, &c).unwrap();
        assert!((a.to_f64() + 2.5).abs() < 1e-30);
        let zero = ChebEvenSeries::from_f64(&[0.0, 0.0], &c).unwrap();
        assert!(matches!(alpha_from(&zero, &c), Err(Error::DivisionByZero)));
    }

    #[test]
    fn fd_jacobian_columns_are_order_independent() {
        let cfg = GSolveConfig::new(5, 30).unwrap();
        let ctx = cfg.context();
        let nodes = make_nodes(5, &ctx).unwrap();
        let x = base_guess(&ctx).unwrap().resized(5, &ctx).unwrap().to_vector();
        let jac = cfg.jacobian_context();
        let a = fd_jacobian(&x, &nodes, &jac, cfg.fd_step_exponent).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| fd_jacobian(&x, &nodes, &jac, cfg.fd_step_exponent).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn fd_jacobian_matches_richardson_oracle() {
        // n = 3 Jacobian against 4-point Richardson differences at higher precision
        let cfg = GSolveConfig::new(3, 40).unwrap();
        let ctx = cfg.context();
        let nodes = make_nodes(3, &ctx).unwrap();
        let x = base_guess(&ctx).unwrap().resized(3, &ctx).unwrap().to_vector();
        let jac_ctx = cfg.jacobian_context();
        let jac = fd_jacobian(&x, &nodes, &jac_ctx, cfg.fd_step_exponent).unwrap();

        let hi = PrecisionContext::from_bits(400).unwrap();
        let h = dec("1e-12", &hi);
        for j in 0..3 {
            let shifted = |k: i64| {
                let mut v = x.round_to(400).into_entries();
                let dk = h.mul(&BigReal::from_i64(k, &hi), &hi).unwrap();
                v[j] = v[j].add(&dk, &hi).unwrap();
                residual_f(&Vector::new(v), &nodes, &hi).unwrap()
            };
            let (p1, m1, p2, m2) = (shifted(1), shifted(-1), shifted(2), shifted(-2));
            for i in 0..3 {
                // (8(f1 - f-1) - (f2 - f-2)) / 12h
                let d1 = p1.entries()[i].sub(&m1.entries()[i], &hi).unwrap();
                let d2 = p2.entries()[i].sub(&m2.entries()[i], &hi).unwrap();
                let num = d1.mul(&BigReal::from_i64(8, &hi), &hi).unwrap().sub(&d2, &hi).unwrap();
                let den = h.mul(&BigReal::from_i64(12, &hi), &hi).unwrap();
                let want = num.div(&den, &hi).unwrap();
                let err = jac.get(i, j).sub(&want, &hi).unwrap().abs();
                // the jacobian carries about jacobian_digits / 2 correct digits
                let bound = -(cfg.jacobian_digits as f64) / 2.0 + 1.0;
                assert!(err.log10_abs() < bound, "({i},{j}) {err:?}");
            }
        }
    }

    #[test]
    fn jacobian_predicts_directional_differences() {
        let cfg = GSolveConfig::new(4, 40).unwrap();
        let ctx = cfg.context();
        let nodes = make_nodes(4, &ctx).unwrap();
        let x = base_guess(&ctx).unwrap().resized(4, &ctx).unwrap().to_vector();
        let jac = fd_jacobian(&x, &nodes, &cfg.jacobian_context(), cfg.fd_step_exponent).unwrap();
        let f0 = residual_f(&x, &nodes, &ctx).unwrap();
        let mut prev_err = f64::INFINITY;
        for e in [2, 3, 4] {
            let h = dec(&format!("1e-{e}"), &ctx);
            let j = 1;
            let mut v = x.clone().into_entries();
            v[j] = v[j].add(&h, &ctx).unwrap();
            let f1 = residual_f(&Vector::new(v), &nodes, &ctx).unwrap();
            let mut worst = f64::NEG_INFINITY;
            for i in 0..4 {
                let diff = f1.entries()[i].sub(&f0.entries()[i], &ctx).unwrap();
                let lin = jac.get(i, j).mul(&h, &ctx).unwrap();
                worst = worst.max(diff.sub(&lin, &ctx).unwrap().abs().log10_abs());
            }
            // O(h^2) remainder: two decades per decade of h
            assert!(worst < prev_err - 1.5, "h=1e-{e}: {worst}");
            prev_err = worst;
        }
    }

    #[test]
    fn icum_updates_satisfy_secant_condition() {
        let cfg = GSolveConfig::new(8, 20).unwrap();
        let ctx = cfg.context();
        let jac = cfg.jacobian_context();
        let nodes = make_nodes(8, &ctx).unwrap();
        let x0 = base_guess(&ctx).unwrap().resized(8, &ctx).unwrap().to_vector();
        let mut state = SolverState::new(x0, &nodes, &cfg).unwrap();
        for _ in 0..6 {
            let step = state.step(&nodes, &cfg).unwrap();
            assert!(step.column.is_some());
            let by = mat_vec(&state.binv, &step.y, &jac).unwrap();
            let resid = by.sub(&step.s, &ctx).unwrap().norm_inf().unwrap();
            let scale = step.s.norm_inf().unwrap();
            let bound = scale.log10_abs() + (16.0 - jac.work_bits() as f64) * std::f64::consts::LOG10_2;
            assert!(resid.log10_abs() < bound, "{} vs {bound}", resid.log10_abs());
        }
    }

    #[test]
    fn solves_small_system_from_base_guess() {
        let cfg = GSolveConfig::new(8, 14).unwrap();
        let sol = solve_g(&cfg, None).unwrap();
        let g = &sol.series;
        let a = alpha_from(g, &sol.ctx).unwrap();
        assert!((a.to_f64() + 2.5029).abs() < 1e-3, "{a:?}");
        assert!(g.value_at_one(&sol.ctx).to_f64() < 0.0);
        let g0 = clenshaw_eval(g, &BigReal::zero(&sol.ctx), &sol.ctx).to_f64();
        assert!((g0 - 1.0).abs() < 1e-6, "{g0}");
    }

    #[test]
    fn exact_solution_is_a_fixed_point() {
        let cfg = GSolveConfig::new(8, 20).unwrap();
        let sol = solve_g(&cfg, None).unwrap();
        let ctx = cfg.context();
        let nodes = make_nodes(8, &ctx).unwrap();
        let mut state = SolverState::new(sol.series.to_vector(), &nodes, &cfg).unwrap();
        let before = state.x.clone();
        let step = state.step(&nodes, &cfg).unwrap();
        let moved = step.s.norm_inf().unwrap();
        assert!(moved.log10_abs() < -20.0);
        assert!(state.x.sub(&before, &ctx).unwrap().norm_inf().unwrap().log10_abs() < -20.0);
    }
}
