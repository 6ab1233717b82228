//! Arbitrary-precision real numbers.
//!
//! [`BigReal`] is a thin wrapper over an MPFR float. Every arithmetic result is
//! rounded to nearest at the precision of the [`PrecisionContext`] passed in, so
//! the numeric behaviour of a pipeline stage is fixed by the context it declares,
//! not by the precision its inputs happen to carry.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};

/// log2(10), used to translate decimal digits into significand bits.
const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Smallest significand width accepted anywhere in the crate.
pub const MIN_PRECISION_BITS: u32 = 8;

/// Number of bits needed to carry `digits` decimal digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * LOG2_10).ceil() as u32
}

/// Number of decimal digits carried by `bits` significand bits.
pub fn digits_for_bits(bits: u32) -> u32 {
    (bits as f64 / LOG2_10).floor() as u32
}

fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Working precision shared by one stage of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    work_bits: u32,
    guard_bits: u32,
}

impl PrecisionContext {
    /// A context with exactly `work_bits` bits and no guard.
    pub fn from_bits(work_bits: u32) -> Result<Self> {
        if work_bits < MIN_PRECISION_BITS {
            return Err(Error::InvalidArgument(format!(
                "precision of {work_bits} bits is below the minimum of {MIN_PRECISION_BITS}"
            )));
        }
        Ok(PrecisionContext {
            work_bits,
            guard_bits: 0,
        })
    }

    /// Enough bits for `digits` decimal digits plus `guard_bits`.
    pub fn for_digits(digits: u32, guard_bits: u32) -> Result<Self> {
        let work_bits = (bits_for_digits(digits) + guard_bits).max(MIN_PRECISION_BITS);
        Ok(PrecisionContext {
            work_bits,
            guard_bits,
        })
    }

    /// Default guard for computations whose inner sums have length `n`:
    /// 64 + ceil(log2 n) bits.
    pub fn default_guard(n: usize) -> u32 {
        64 + ceil_log2(n)
    }

    pub fn work_bits(&self) -> u32 {
        self.work_bits
    }

    pub fn guard_bits(&self) -> u32 {
        self.guard_bits
    }

    /// Decimal digits guaranteed beyond the guard.
    pub fn target_digits(&self) -> u32 {
        digits_for_bits(self.work_bits - self.guard_bits.min(self.work_bits))
    }

    /// 2^(-work_bits + slack), a convenient relative tolerance.
    pub fn eps_scaled(&self, slack: i32) -> BigReal {
        let mut f = Float::with_val(self.work_bits, 1);
        f <<= slack - self.work_bits as i32;
        BigReal(f)
    }
}

/// An arbitrary-precision binary floating-point number.
///
/// Values are finite: every constructor and operation rejects NaN and
/// infinities with an error instead of letting them propagate.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigReal(pub(crate) Float);

fn finite(f: Float, what: &'static str) -> Result<BigReal> {
    if f.is_finite() {
        Ok(BigReal(f))
    } else {
        Err(Error::NonFinite(what))
    }
}

impl BigReal {
    pub fn zero(ctx: &PrecisionContext) -> Self {
        BigReal(Float::new(ctx.work_bits))
    }

    pub fn one(ctx: &PrecisionContext) -> Self {
        BigReal(Float::with_val(ctx.work_bits, 1))
    }

    pub fn from_i64(v: i64, ctx: &PrecisionContext) -> Self {
        BigReal(Float::with_val(ctx.work_bits, v))
    }

    /// `num / den`, correctly rounded.
    pub fn from_ratio(num: i64, den: i64, ctx: &PrecisionContext) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        let mut f = Float::with_val(ctx.work_bits, num);
        f /= den;
        Ok(BigReal(f))
    }

    pub fn from_f64(v: f64, ctx: &PrecisionContext) -> Result<Self> {
        finite(Float::with_val(ctx.work_bits, v), "from_f64")
    }

    pub(crate) fn from_float(f: Float) -> Self {
        debug_assert!(f.is_finite());
        BigReal(f)
    }

    pub(crate) fn float(&self) -> &Float {
        &self.0
    }

    pub(crate) fn into_float(self) -> Float {
        self.0
    }

    pub fn precision_bits(&self) -> u32 {
        self.0.prec()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn add(&self, rhs: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
        finite(Float::with_val(ctx.work_bits, &self.0 + &rhs.0), "add")
    }

    pub fn sub(&self, rhs: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
        finite(Float::with_val(ctx.work_bits, &self.0 - &rhs.0), "sub")
    }

    pub fn mul(&self, rhs: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
        finite(Float::with_val(ctx.work_bits, &self.0 * &rhs.0), "mul")
    }

    pub fn div(&self, rhs: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
        if rhs.0.is_zero() {
            return Err(Error::DivisionByZero);
        }
        finite(Float::with_val(ctx.work_bits, &self.0 / &rhs.0), "div")
    }

    pub fn sqrt(&self, ctx: &PrecisionContext) -> Result<BigReal> {
        if self.is_sign_negative() {
            return Err(Error::InvalidArgument(format!("sqrt of negative value {self}")));
        }
        finite(Float::with_val(ctx.work_bits, self.0.sqrt_ref()), "sqrt")
    }

    /// Negation is exact and keeps the operand's precision.
    pub fn neg(&self) -> BigReal {
        BigReal(-self.0.clone())
    }

    /// Absolute value is exact and keeps the operand's precision.
    pub fn abs(&self) -> BigReal {
        BigReal(self.0.clone().abs())
    }

    pub fn cmp_abs(&self, other: &BigReal) -> Ordering {
        self.0
            .cmp_abs(&other.0)
            .expect("BigReal values are never NaN")
    }

    /// log10(|x|) as f64; `-inf` for zero.
    pub fn log10_abs(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        let l = Float::with_val(64, self.0.abs_ref()).log10();
        l.to_f64()
    }

    /// Nearest value with a `bits`-bit significand. Idempotent.
    pub fn round_to(&self, bits: u32) -> BigReal {
        assert!(bits >= MIN_PRECISION_BITS, "round_to needs at least {MIN_PRECISION_BITS} bits");
        BigReal(Float::with_val(bits, &self.0))
    }

    /// Decimal rendering with `digits` significant digits, rounded to nearest.
    ///
    /// Positional notation is used for decimal exponents in `-20..=digits`,
    /// scientific notation otherwise.
    pub fn to_decimal(&self, digits: usize) -> String {
        let digits = digits.max(1);
        let (negative, mantissa, exp) = self.0.to_sign_string_exp(10, Some(digits));
        let sign = if negative { "-" } else { "" };
        let Some(exp) = exp else {
            // zero
            return if digits == 1 {
                format!("{sign}0")
            } else {
                format!("{sign}0.{}", "0".repeat(digits - 1))
            };
        };
        // value = 0.<mantissa> x 10^exp
        let exp = exp as i64;
        if exp > 0 && exp as usize <= digits {
            let (int, frac) = mantissa.split_at(exp as usize);
            if frac.is_empty() {
                format!("{sign}{int}")
            } else {
                format!("{sign}{int}.{frac}")
            }
        } else if exp <= 0 && exp > -20 {
            format!("{sign}0.{}{mantissa}", "0".repeat((-exp) as usize))
        } else {
            let (lead, rest) = mantissa.split_at(1);
            if rest.is_empty() {
                format!("{sign}{lead}e{}", exp - 1)
            } else {
                format!("{sign}{lead}.{rest}e{}", exp - 1)
            }
        }
    }

    /// Parses a signed decimal with optional fraction and exponent.
    pub fn from_decimal(s: &str, ctx: &PrecisionContext) -> Result<BigReal> {
        let trimmed = s.trim();
        if !is_decimal_literal(trimmed) {
            return Err(Error::Parse {
                input: s.to_string(),
            });
        }
        let parsed = Float::parse(trimmed).map_err(|_| Error::Parse {
            input: s.to_string(),
        })?;
        finite(Float::with_val(ctx.work_bits, parsed), "from_decimal")
    }
}

fn is_decimal_literal(s: &str) -> bool {
    let bytes = s.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let mut mantissa_digits = 0;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
        mantissa_digits += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
            mantissa_digits += 1;
        }
    }
    if mantissa_digits == 0 {
        return false;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        i += 1;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == start {
            return false;
        }
    }
    i == bytes.len()
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        f.write_str(&self.to_decimal(digits))
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigReal({}, {} bits)", self.to_decimal(25), self.precision_bits())
    }
}

/// π rounded to nearest at `ctx` precision.
pub fn pi(ctx: &PrecisionContext) -> BigReal {
    BigReal(Float::with_val(ctx.work_bits, Constant::Pi))
}

/// cos(x) rounded to nearest at `ctx` precision.
pub fn cos(x: &BigReal, ctx: &PrecisionContext) -> BigReal {
    BigReal(Float::with_val(ctx.work_bits, x.0.cos_ref()))
}
