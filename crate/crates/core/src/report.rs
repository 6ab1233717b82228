//! Run reports and the digit-agreement metric.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpnum::{bits_for_digits, BigReal, PrecisionContext};

/// Version of the JSON report layout.
pub const REPORT_FORMAT: u32 = 1;

pub const SIGN_CONVENTION: &str =
    "alpha is reported as |alpha|; the fixed-point normalization gives alpha = 1/g(1) < 0";

/// Significant digits in a decimal literal (leading zeros excluded).
fn significant_digits(s: &str) -> Result<u32> {
    let t = s.trim().trim_start_matches(['+', '-']);
    let mant = t.split(['e', 'E']).next().unwrap_or("");
    if mant.is_empty() || !mant.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
        return Err(Error::Parse { input: s.to_string() });
    }
    let digits: String = mant.chars().filter(char::is_ascii_digit).collect();
    let sig = digits.trim_start_matches('0').len() as u32;
    Ok(sig.max(1))
}

/// Number of leading significant digits shared by two decimal strings,
/// `floor(log10(min(|a|,|b|) / |a - b|))`, clipped to `[0, min digits given]`.
pub fn digit_agreement(a: &str, b: &str) -> Result<u32> {
    let cap = significant_digits(a)?.min(significant_digits(b)?);
    let digits = significant_digits(a)?.max(significant_digits(b)?);
    let ctx = PrecisionContext::from_bits(bits_for_digits(digits) + 64)?;
    let x = BigReal::from_decimal(a, &ctx)?;
    let y = BigReal::from_decimal(b, &ctx)?;
    if x == y {
        return Ok(cap);
    }
    if x.is_sign_negative() != y.is_sign_negative() || x.is_zero() || y.is_zero() {
        return Ok(0);
    }
    let diff = x.sub(&y, &ctx)?.abs();
    let small = if x.cmp_abs(&y).is_lt() { x.abs() } else { y.abs() };
    let ratio = Float::with_val(ctx.work_bits(), small.float() / diff.float());
    let lg = ratio.log10().to_f64();
    // ratios that are exact powers of ten in decimal are inexact in binary
    let d = (lg + 1e-9).floor();
    Ok(d.clamp(0.0, cap as f64) as u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constant {
    Alpha,
    Delta,
    Both,
}

impl Constant {
    pub fn wants_delta(self) -> bool {
        matches!(self, Constant::Delta | Constant::Both)
    }

    pub fn wants_alpha(self) -> bool {
        matches!(self, Constant::Alpha | Constant::Both)
    }
}

impl std::str::FromStr for Constant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Constant::Alpha),
            "delta" => Ok(Constant::Delta),
            "both" => Ok(Constant::Both),
            _ => Err(Error::InvalidArgument(format!("unknown constant {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RungSummary {
    pub n: usize,
    pub target_digits: u32,
    pub work_bits: u32,
    pub jacobian_digits: u32,
    pub iterations: usize,
    pub refreshes: usize,
    pub reused: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `n` of the reference run, or the cascade depth for the oracle.
    pub reference: usize,
    pub alpha: Option<String>,
    pub delta: Option<String>,
    pub digits_alpha: Option<u32>,
    pub digits_delta: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub g_solve_s: f64,
    pub delta_solve_s: Option<f64>,
    pub verify_s: Option<f64>,
    pub oracle_s: Option<f64>,
    pub total_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub constant: Constant,
    pub jacobian_digits: u32,
    pub fd_step_exponent: u32,
    pub max_icum_iters: usize,
    pub residual_tol_exponent: u32,
    pub guard_bits: u32,
    pub checkpoint_dir: Option<String>,
    pub verify_offset: Option<usize>,
    pub verify_oracle_depth: Option<usize>,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: u32,
    pub n: usize,
    pub target_digits: u32,
    pub work_bits: u32,
    /// |α| to `target_digits` significant digits.
    pub alpha: Option<String>,
    pub sign_convention: String,
    pub delta: Option<String>,
    pub achieved_digits_alpha: Option<u32>,
    pub achieved_digits_delta: Option<u32>,
    pub icum_iterations: usize,
    pub rungs: Vec<RungSummary>,
    pub arnoldi_iterations: Option<usize>,
    pub delta_agreement_digits: Option<u32>,
    pub verify: Option<Comparison>,
    pub oracle: Option<Comparison>,
    pub peak_memory_estimate_bytes: u64,
    pub timings: Timings,
    pub config: ConfigEcho,
}

impl RunReport {
    /// Plain-text rendering for terminals.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("n = {} ({} digits, {} bits)\n", self.n, self.target_digits, self.work_bits));
        if let Some(a) = &self.alpha {
            s.push_str(&format!("|alpha| = {a}\n"));
        }
        if let Some(d) = &self.delta {
            s.push_str(&format!("delta   = {d}\n"));
        }
        let rungs: Vec<String> = self.rungs.iter().map(|r| r.n.to_string()).collect();
        s.push_str(&format!(
            "ladder [{}], {} ICUM iterations",
            rungs.join(", "),
            self.icum_iterations
        ));
        if let Some(k) = self.arnoldi_iterations {
            s.push_str(&format!(", {k} Arnoldi steps"));
        }
        s.push('\n');
        for (label, c) in [("verify", &self.verify), ("oracle", &self.oracle)] {
            if let Some(c) = c {
                let fmt = |d: Option<u32>| d.map_or("-".to_string(), |d| d.to_string());
                s.push_str(&format!(
                    "{label} ({}): digits alpha {}, delta {}\n",
                    c.reference,
                    fmt(c.digits_alpha),
                    fmt(c.digits_delta)
                ));
            }
        }
        s.push_str(&format!("time {:.3} s\n", self.timings.total_s));
        s
    }
}
