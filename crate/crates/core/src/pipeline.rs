//! End-to-end runs: solve for `g`, extract α and δ, optionally cross-check
//! against a larger collocation and against the brute-force oracle.

use std::path::PathBuf;
use std::time::Instant;

use log::info;

use crate::checkpoint::DirCache;
use crate::deltasolver::{solve_delta, DeltaConfig, DeltaSolution};
use crate::error::{Error, Result};
use crate::gsolver::{alpha_from, solve_g, GSolution, GSolveConfig, RungCache};
use crate::mpnum::{BigReal, PrecisionContext};
use crate::oracle;
use crate::report::{
    digit_agreement, Comparison, ConfigEcho, Constant, RunReport, RungSummary, Timings, REPORT_FORMAT,
    SIGN_CONVENTION,
};

/// Default verification offset: the reference run uses `n + 16` nodes.
pub const DEFAULT_VERIFY_OFFSET: usize = 16;

/// Precision bits of the oracle computation.
pub const ORACLE_BITS: u32 = 256;

/// Digits carried by a run at size `n`; comfortably above what the model
/// can resolve (about 1.6 n).
pub fn default_target_digits(n: usize) -> u32 {
    2 * n as u32 + 10
}

/// Collocation size for about `digits` correct digits: `ceil(digits / 1.5)`
/// rounded up to a multiple of 8.
pub fn n_for_digits(digits: u32) -> usize {
    let n = (digits as usize * 2).div_ceil(3).max(2);
    n.div_ceil(8) * 8
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub target_digits: Option<u32>,
    pub constant: Constant,
    pub jacobian_digits: Option<u32>,
    pub max_icum_iters: Option<usize>,
    pub fd_step_exponent: Option<u32>,
    pub checkpoint_dir: Option<PathBuf>,
    /// Offset of the reference run, if any.
    pub verify: Option<usize>,
    /// Oracle depth, if any.
    pub verify_oracle: Option<usize>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(n: usize) -> Self {
        RunConfig {
            n,
            target_digits: None,
            constant: Constant::Both,
            jacobian_digits: None,
            max_icum_iters: None,
            fd_step_exponent: None,
            checkpoint_dir: None,
            verify: None,
            verify_oracle: None,
            threads: None,
        }
    }

    pub fn solve_config(&self) -> Result<GSolveConfig> {
        let digits = self.target_digits.unwrap_or_else(|| default_target_digits(self.n));
        let mut cfg = GSolveConfig::new(self.n, digits)?;
        if let Some(j) = self.jacobian_digits {
            cfg = cfg.with_jacobian_digits(j)?;
        }
        if let Some(m) = self.max_icum_iters {
            cfg.max_icum_iters = m;
        }
        if let Some(e) = self.fd_step_exponent {
            cfg.fd_step_exponent = e;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// What a run keeps of the δ solve; the Krylov basis is dropped right away
/// so it does not sit in memory through the verification run.
struct DeltaSummary {
    delta: BigReal,
    steps: usize,
    agreement_digits: u32,
}

impl From<DeltaSolution> for DeltaSummary {
    fn from(d: DeltaSolution) -> Self {
        DeltaSummary {
            delta: d.delta,
            steps: d.steps,
            agreement_digits: d.agreement_digits,
        }
    }
}

struct Solved {
    g: GSolution,
    alpha: BigReal,
    delta: Option<DeltaSummary>,
    g_time: f64,
    delta_time: Option<f64>,
}

impl Solved {
    fn alpha_text(&self, digits: u32) -> String {
        self.alpha.abs().to_decimal(digits as usize)
    }

    fn delta_text(&self, digits: u32) -> Option<String> {
        self.delta.as_ref().map(|d| d.delta.to_decimal(digits as usize))
    }
}

fn solve(cfg: &GSolveConfig, constant: Constant, cache: Option<&dyn RungCache>) -> Result<Solved> {
    let t = Instant::now();
    let g = solve_g(cfg, cache)?;
    let alpha = alpha_from(&g.series, &g.ctx)?;
    let g_time = t.elapsed().as_secs_f64();
    info!("n={}: |alpha| ~ {}", cfg.n, alpha.abs().to_decimal(30));

    let (delta, delta_time) = if constant.wants_delta() {
        let t = Instant::now();
        let d = solve_delta(&g.series, &g.ctx, &DeltaConfig::new(cfg.n, cfg.target_digits))?;
        info!("n={}: delta ~ {}", cfg.n, d.delta.to_decimal(30));
        (Some(d.into()), Some(t.elapsed().as_secs_f64()))
    } else {
        (None, None)
    };
    Ok(Solved {
        g,
        alpha,
        delta,
        g_time,
        delta_time,
    })
}

fn bytes_per_float(bits: u32) -> u64 {
    32 + 8 * u64::from(bits.div_ceil(64))
}

/// Deterministic estimate of the largest live multiprecision footprint.
pub fn peak_memory_estimate(cfg: &GSolveConfig, arnoldi_steps: Option<usize>) -> u64 {
    let n = cfg.n as u64;
    let work = bytes_per_float(cfg.context().work_bits());
    let jac = bytes_per_float(cfg.jacobian_context().work_bits());
    let nodes = 9 * n * work;
    // one n x n matrix (B' is inverted in place) plus the emptied column buffers
    let g_stage = n * n * (jac + 32) + 12 * n * work;
    let d_stage = arnoldi_steps.map_or(0, |k| {
        let k = k as u64 + 1;
        k * n * work + k * k * work + 6 * n * work
    });
    nodes + g_stage.max(d_stage)
}

fn compare(main: &Solved, other_alpha: &str, other_delta: Option<&str>, digits: u32, reference: usize) -> Result<Comparison> {
    let digits_alpha = Some(digit_agreement(&main.alpha_text(digits), other_alpha)?);
    let digits_delta = match (main.delta_text(digits), other_delta) {
        (Some(a), Some(b)) => Some(digit_agreement(&a, b)?),
        _ => None,
    };
    Ok(Comparison {
        reference,
        alpha: Some(other_alpha.to_string()),
        delta: other_delta.map(str::to_string),
        digits_alpha,
        digits_delta,
    })
}

fn run_inner(cfg: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let gcfg = cfg.solve_config()?;
    let cache = cfg.checkpoint_dir.as_ref().map(DirCache::new).transpose()?;
    let cache_ref = cache.as_ref().map(|c| c as &dyn RungCache);

    let main = solve(&gcfg, cfg.constant, cache_ref)?;
    let digits = gcfg.target_digits;

    let (verify, verify_s) = match cfg.verify {
        Some(0) => return Err(Error::InvalidArgument("verification offset must be positive".into())),
        Some(off) => {
            let t = Instant::now();
            let m = cfg.n + off;
            let rcfg = GSolveConfig::new(m, default_target_digits(m))?;
            let reference = solve(&rcfg, cfg.constant, cache_ref)?;
            let rd = rcfg.target_digits;
            let c = compare(&main, &reference.alpha_text(rd), reference.delta_text(rd).as_deref(), digits, m)?;
            (Some(c), Some(t.elapsed().as_secs_f64()))
        }
        None => (None, None),
    };

    let (oracle_cmp, oracle_s) = match cfg.verify_oracle {
        Some(depth) => {
            let t = Instant::now();
            let octx = PrecisionContext::from_bits(ORACLE_BITS)?;
            let seq = oracle::superstable_params(depth, &octx)?;
            let a = oracle::alpha_oracle(&seq)?.value.abs().to_decimal(20);
            let d = oracle::delta_oracle(&seq)?.value.to_decimal(20);
            let c = compare(&main, &a, cfg.constant.wants_delta().then_some(d.as_str()), digits, depth)?;
            (Some(c), Some(t.elapsed().as_secs_f64()))
        }
        None => (None, None),
    };

    let best = verify.as_ref().or(oracle_cmp.as_ref());
    let want_alpha = cfg.constant.wants_alpha();
    let arnoldi = main.delta.as_ref().map(|d| d.steps);

    Ok(RunReport {
        format: REPORT_FORMAT,
        n: cfg.n,
        target_digits: digits,
        work_bits: gcfg.context().work_bits(),
        alpha: want_alpha.then(|| main.alpha_text(digits)),
        sign_convention: SIGN_CONVENTION.to_string(),
        delta: main.delta_text(digits),
        achieved_digits_alpha: best.and_then(|c| c.digits_alpha).filter(|_| want_alpha),
        achieved_digits_delta: best.and_then(|c| c.digits_delta),
        icum_iterations: main.g.total_iterations(),
        rungs: main
            .g
            .rungs
            .iter()
            .map(|r| RungSummary {
                n: r.n,
                target_digits: r.target_digits,
                work_bits: r.work_bits,
                jacobian_digits: r.jacobian_digits,
                iterations: r.iterations,
                refreshes: r.refreshes,
                reused: r.reused,
            })
            .collect(),
        arnoldi_iterations: arnoldi,
        delta_agreement_digits: main.delta.as_ref().map(|d| d.agreement_digits),
        verify,
        oracle: oracle_cmp,
        peak_memory_estimate_bytes: peak_memory_estimate(&gcfg, arnoldi),
        timings: Timings {
            g_solve_s: main.g_time,
            delta_solve_s: main.delta_time,
            verify_s,
            oracle_s,
            total_s: start.elapsed().as_secs_f64(),
        },
        config: ConfigEcho {
            constant: cfg.constant,
            jacobian_digits: gcfg.jacobian_digits,
            fd_step_exponent: gcfg.fd_step_exponent,
            max_icum_iters: gcfg.max_icum_iters,
            residual_tol_exponent: gcfg.residual_tol_exponent,
            guard_bits: gcfg.guard_bits,
            checkpoint_dir: cfg.checkpoint_dir.as_ref().map(|p| p.display().to_string()),
            verify_offset: cfg.verify,
            verify_oracle_depth: cfg.verify_oracle,
            threads: cfg.threads,
        },
    })
}

/// Runs `cfg`, inside a dedicated thread pool when a width is given.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    match cfg.threads {
        Some(0) => Err(Error::InvalidArgument("thread count must be positive".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| run_inner(cfg)),
        None => run_inner(cfg),
    }
}
