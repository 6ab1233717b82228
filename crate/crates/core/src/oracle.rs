//! Brute-force α and δ from superstable orbits of the logistic map
//! `x -> μ x (1 - x)`.
//!
//! Exponentially slow in the number of digits; only used to cross-check the
//! leading digits of the spectral pipeline.

use rug::{Assign, Float};

use crate::error::{Error, Result};
use crate::mpnum::{BigReal, PrecisionContext};

/// Deepest cascade level accepted (the map is iterated `2^(depth-1)` times).
pub const MAX_DEPTH: usize = 30;

#[derive(Clone, Debug)]
pub struct SuperstableSequence {
    /// `mu[k-1] = μ_k`, the parameter with a superstable cycle of period `2^(k-1)`.
    pub mu: Vec<BigReal>,
    /// `d[k-2] = f^(2^(k-2))(1/2) - 1/2` at `μ_k`, for `k >= 2`.
    pub d: Vec<BigReal>,
}

#[derive(Clone, Debug)]
pub struct OracleEstimate {
    pub value: BigReal,
    /// Difference between the last two extrapolated values.
    pub error: f64,
}

/// `f^iters(1/2)` for the logistic map at `mu`.
fn orbit(mu: &Float, iters: u64, bits: u32) -> Float {
    let mut x = Float::with_val(bits, 0.5);
    let mut t = Float::new(bits);
    for _ in 0..iters {
        // μ x (1 - x)
        t.assign(1 - &x);
        x *= &t;
        x *= mu;
    }
    x
}

fn phi(mu: &Float, k: usize, bits: u32) -> Float {
    let mut v = orbit(mu, 1u64 << (k - 1), bits);
    v -= 0.5;
    v
}

/// μ_1..μ_depth by a sign-change scan above the previous level followed by
/// bisection to `ctx` precision.
pub fn superstable_params(depth: usize, ctx: &PrecisionContext) -> Result<SuperstableSequence> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::InvalidArgument(format!(
            "oracle depth must be in 1..={MAX_DEPTH}, got {depth}"
        )));
    }
    let bits = ctx.work_bits();
    let mut mu: Vec<Float> = vec![Float::with_val(bits, 2)];
    for k in 2..=depth {
        let prev = &mu[k - 2];
        let gap = if k == 2 {
            Float::with_val(bits, 1.5)
        } else {
            Float::with_val(bits, prev - &mu[k - 3])
        };
        let step = Float::with_val(bits, &gap / 64);
        let mut lo = Float::with_val(bits, &gap * 1e-3);
        lo += prev;
        let mut f_lo = phi(&lo, k, bits);
        let mut bracket = None;
        for i in 1..=64u32 {
            let mut hi = Float::with_val(bits, &step * i);
            hi += prev;
            let f_hi = phi(&hi, k, bits);
            if f_lo.is_sign_negative() != f_hi.is_sign_negative() {
                bracket = Some((lo.clone(), hi, f_lo.is_sign_negative()));
                break;
            }
            lo = hi;
            f_lo = f_hi;
        }
        let (mut a, mut b, neg_at_a) = bracket.ok_or(Error::Bracket { level: k })?;
        loop {
            let mid = Float::with_val(bits, &a + &b) / 2u32;
            if mid <= a || mid >= b {
                break;
            }
            let fm = phi(&mid, k, bits);
            if fm.is_zero() {
                a = mid;
                break;
            }
            if fm.is_sign_negative() == neg_at_a {
                a = mid;
            } else {
                b = mid;
            }
        }
        mu.push(a);
    }
    let d = mu
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, m)| {
            // μ_{i+1}, half period 2^(i-1)
            let mut v = orbit(m, 1u64 << (i - 1), bits);
            v -= 0.5;
            BigReal::from_float(v)
        })
        .collect();
    Ok(SuperstableSequence {
        mu: mu.into_iter().map(BigReal::from_float).collect(),
        d,
    })
}

/// One Aitken Δ² pass.
fn aitken(x: &[BigReal], ctx: &PrecisionContext) -> Result<Vec<BigReal>> {
    x.windows(3)
        .map(|w| {
            let d1 = w[1].sub(&w[0], ctx)?;
            let d2 = w[2].sub(&w[1], ctx)?;
            let den = d2.sub(&d1, ctx)?;
            if den.is_zero() {
                return Ok(w[2].clone());
            }
            w[2].sub(&d2.mul(&d2, ctx)?.div(&den, ctx)?, ctx)
        })
        .collect()
}

fn extrapolate(raw: &[BigReal], ctx: &PrecisionContext) -> Result<OracleEstimate> {
    let acc = aitken(raw, ctx)?;
    let n = acc.len();
    let value = acc[n - 1].clone();
    let error = value.sub(&acc[n - 2], ctx)?.abs().to_f64();
    Ok(OracleEstimate { value, error })
}

fn ctx_of(seq: &SuperstableSequence) -> Result<PrecisionContext> {
    PrecisionContext::from_bits(seq.mu[0].precision_bits())
}

/// Raw ratios `δ_k = (μ_{k-1} - μ_{k-2}) / (μ_k - μ_{k-1})` for `k = 3..=depth`.
pub fn delta_ratios(seq: &SuperstableSequence) -> Result<Vec<BigReal>> {
    let ctx = ctx_of(seq)?;
    seq.mu
        .windows(3)
        .map(|w| w[1].sub(&w[0], &ctx)?.div(&w[2].sub(&w[1], &ctx)?, &ctx))
        .collect()
}

/// Raw ratios `d_k / d_{k+1}` (negative).
pub fn alpha_ratios(seq: &SuperstableSequence) -> Result<Vec<BigReal>> {
    let ctx = ctx_of(seq)?;
    seq.d.windows(2).map(|w| w[0].div(&w[1], &ctx)).collect()
}

fn check_depth(seq: &SuperstableSequence) -> Result<()> {
    if seq.mu.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "oracle extrapolation needs depth >= 5, got {}",
            seq.mu.len()
        )));
    }
    Ok(())
}

pub fn delta_oracle(seq: &SuperstableSequence) -> Result<OracleEstimate> {
    check_depth(seq)?;
    extrapolate(&delta_ratios(seq)?, &ctx_of(seq)?)
}

/// Signed α (negative), extrapolated from successive cycle-distance ratios.
pub fn alpha_oracle(seq: &SuperstableSequence) -> Result<OracleEstimate> {
    check_depth(seq)?;
    extrapolate(&alpha_ratios(seq)?, &ctx_of(seq)?)
}
