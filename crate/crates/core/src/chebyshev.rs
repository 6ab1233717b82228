//! Even Chebyshev series on [-1, 1].
//!
//! An even series with coefficients `c_0..c_{n-1}` stands for
//! `c_0/2 + sum_{j>=1} c_j T_{2j}(x)`. The halved first term is used everywhere,
//! including the checkpoint format, and is never converted away.
//!
//! Since `T_{2j}(x) = T_j(2x^2 - 1)`, even series are evaluated as ordinary
//! Chebyshev series in `u = 2x^2 - 1`.

use rayon::prelude::*;
use rug::{Assign, Float};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::mpnum::{self, BigReal, PrecisionContext};

/// Coefficients of `sum' c_j T_{2j}(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebEvenSeries {
    coeffs: Vec<BigReal>,
}

/// Coefficients of `sum d_j T_{2j+1}(x)`. May be empty (the zero series).
#[derive(Clone, Debug, PartialEq)]
pub struct ChebOddSeries {
    coeffs: Vec<BigReal>,
}

impl ChebEvenSeries {
    pub fn new(coeffs: Vec<BigReal>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("an even series needs at least one coefficient".into()));
        }
        Ok(ChebEvenSeries { coeffs })
    }

    pub fn from_f64(coeffs: &[f64], ctx: &PrecisionContext) -> Result<Self> {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigReal::from_f64(c, ctx))
                .collect::<Result<_>>()?,
        )
    }

    /// The series whose only nonzero coefficient is `c_j = 1`.
    pub fn unit(n: usize, j: usize, ctx: &PrecisionContext) -> Result<Self> {
        Self::new(Vector::unit(n, j, ctx)?.into_entries())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[BigReal] {
        &self.coeffs
    }

    pub fn to_vector(&self) -> Vector {
        Vector::new(self.coeffs.clone())
    }

    pub fn from_vector(v: Vector) -> Result<Self> {
        Self::new(v.into_entries())
    }

    pub(crate) fn floats(&self) -> Vec<Float> {
        self.coeffs.iter().map(|c| c.float().clone()).collect()
    }

    /// Truncates or zero-pads to `n` coefficients at `ctx` precision.
    pub fn resized(&self, n: usize, ctx: &PrecisionContext) -> Result<Self> {
        let coeffs = (0..n)
            .map(|j| match self.coeffs.get(j) {
                Some(c) => c.round_to(ctx.work_bits()),
                None => BigReal::zero(ctx),
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn round_to(&self, bits: u32) -> Self {
        ChebEvenSeries {
            coeffs: self.coeffs.iter().map(|c| c.round_to(bits)).collect(),
        }
    }

    /// Value at x = 1: `c_0/2 + c_1 + ... + c_{n-1}`.
    pub fn value_at_one(&self, ctx: &PrecisionContext) -> BigReal {
        BigReal::from_float(sum_at_one(&self.floats(), ctx.work_bits()))
    }

    /// Index one past the last nonzero coefficient (at least 1).
    pub fn support_len(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .map_or(1, |p| p + 1)
    }
}

impl ChebOddSeries {
    pub fn new(coeffs: Vec<BigReal>) -> Self {
        ChebOddSeries { coeffs }
    }

    pub fn coeffs(&self) -> &[BigReal] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub(crate) fn floats(&self) -> Vec<Float> {
        self.coeffs.iter().map(|c| c.float().clone()).collect()
    }
}

pub(crate) fn sum_at_one(c: &[Float], bits: u32) -> Float {
    let mut s = Float::with_val(bits, &c[0]);
    s >>= 1;
    for cj in &c[1..] {
        s += cj;
    }
    s
}

/// `u = 2x^2 - 1` at `bits` precision.
fn to_u(x: &Float, bits: u32) -> Float {
    let mut u = Float::with_val(bits, x.square_ref());
    u <<= 1;
    u -= 1;
    u
}

/// Clenshaw recurrence for `c_0/2 + sum_{k>=1} c_k T_k(u)`.
pub(crate) fn clenshaw_u(c: &[Float], u: &Float, bits: u32) -> Float {
    let n = c.len();
    if n == 0 {
        return Float::new(bits);
    }
    let mut half_c0 = Float::with_val(bits, &c[0]);
    half_c0 >>= 1;
    if n == 1 {
        return half_c0;
    }
    let mut two_u = Float::with_val(bits, u);
    two_u <<= 1;
    let mut b1 = Float::new(bits);
    let mut b2 = Float::new(bits);
    for ck in c[1..].iter().rev() {
        // b2 <- c_k + 2u b1 - b2, then rotate
        b2 = -b2;
        b2 += &two_u * &b1;
        b2 += ck;
        std::mem::swap(&mut b1, &mut b2);
    }
    // result = c_0/2 + u b1 - b2
    let mut r = Float::with_val(bits, u * &b1);
    r -= &b2;
    r += &half_c0;
    r
}

pub(crate) fn eval_even_floats(c: &[Float], x: &Float, bits: u32) -> Float {
    clenshaw_u(c, &to_u(x, bits), bits)
}

/// `sum d_j T_{2j+1}(x)` using `T_{2j+3} = 2u T_{2j+1} - T_{2j-1}`; the sum is
/// `x (b_0 - b_1)` for the usual Clenshaw sequence `b_j` in `u`.
pub(crate) fn eval_odd_floats(d: &[Float], x: &Float, bits: u32) -> Float {
    if d.is_empty() {
        return Float::new(bits);
    }
    let u = to_u(x, bits);
    let mut two_u = u;
    two_u <<= 1;
    let mut b1 = Float::new(bits);
    let mut b2 = Float::new(bits);
    for dj in d.iter().rev() {
        b2 = -b2;
        b2 += &two_u * &b1;
        b2 += dj;
        std::mem::swap(&mut b1, &mut b2);
    }
    // b1 = b_0, b2 = b_1
    b1 -= &b2;
    b1 *= x;
    b1
}

/// `T_m(y)` by binary doubling on the pair `(T_k, T_{k+1})`:
/// `T_{2k} = 2 T_k^2 - T_0`, `T_{2k+1} = 2 T_k T_{k+1} - T_1`.
pub(crate) fn chebyshev_t(m: u64, y: &Float, bits: u32) -> Float {
    if m == 0 {
        return Float::with_val(bits, 1);
    }
    let mut lo = Float::with_val(bits, 1); // T_k
    let mut hi = Float::with_val(bits, y); // T_{k+1}
    let mut tmp = Float::new(bits);
    for bit in (0..64 - m.leading_zeros()).rev() {
        // tmp = T_{2k+1} = 2 T_k T_{k+1} - y
        tmp.assign(&lo * &hi);
        tmp <<= 1;
        tmp -= y;
        if (m >> bit) & 1 == 0 {
            // (T_{2k}, T_{2k+1})
            lo.square_mut();
            lo <<= 1;
            lo -= 1;
            std::mem::swap(&mut hi, &mut tmp);
        } else {
            // (T_{2k+1}, T_{2k+2})
            hi.square_mut();
            hi <<= 1;
            hi -= 1;
            std::mem::swap(&mut lo, &mut tmp);
        }
    }
    lo
}

/// Prefix Clenshaw plus isolated evaluation of the nonzero trailing terms.
pub(crate) fn tail_split_floats(c: &[Float], x: &Float, dense_prefix: usize, bits: u32) -> Float {
    let u = to_u(x, bits);
    let mut acc = clenshaw_u(&c[..dense_prefix], &u, bits);
    for (j, cj) in c.iter().enumerate().skip(dense_prefix) {
        if cj.is_zero() {
            continue;
        }
        if j == 0 {
            let mut h = Float::with_val(bits, cj);
            h >>= 1;
            acc += &h;
        } else {
            let t = chebyshev_t(j as u64, &u, bits);
            acc += cj * &t;
        }
    }
    acc
}

/// Evaluates the even series at `x` by Clenshaw's recurrence in `u = 2x^2 - 1`.
pub fn clenshaw_eval(s: &ChebEvenSeries, x: &BigReal, ctx: &PrecisionContext) -> BigReal {
    BigReal::from_float(eval_even_floats(&s.floats(), x.float(), ctx.work_bits()))
}

/// `T_{2j}(x)` in O(log j) multiplications.
pub fn isolated_term_eval(j: u64, x: &BigReal, ctx: &PrecisionContext) -> BigReal {
    let bits = ctx.work_bits();
    BigReal::from_float(chebyshev_t(j, &to_u(x.float(), bits), bits))
}

/// Clenshaw over the first `dense_prefix` coefficients, plus each nonzero
/// coefficient beyond it evaluated as an isolated term.
pub fn tail_split_eval(
    s: &ChebEvenSeries,
    x: &BigReal,
    dense_prefix: usize,
    ctx: &PrecisionContext,
) -> Result<BigReal> {
    if dense_prefix > s.len() {
        return Err(Error::IndexOutOfRange {
            index: dense_prefix,
            len: s.len(),
        });
    }
    Ok(BigReal::from_float(tail_split_floats(
        &s.floats(),
        x.float(),
        dense_prefix,
        ctx.work_bits(),
    )))
}

/// Derivative of an even series, as an odd series.
///
/// With `b_{k-1} = b_{k+1} + 2k a_k` and only even `a_k` nonzero, the odd
/// coefficients satisfy `d_j = d_{j+1} + 4(j+1) c_{j+1}`. Arithmetic is at the
/// widest precision among the input coefficients.
pub fn differentiate(s: &ChebEvenSeries) -> ChebOddSeries {
    let n = s.len();
    let bits = s.coeffs.iter().map(BigReal::precision_bits).max().unwrap_or(64);
    let mut d = vec![Float::new(bits); n - 1];
    let mut next = Float::new(bits);
    for j in (0..n - 1).rev() {
        let mut v = Float::with_val(bits, s.coeffs[j + 1].float() * (4 * (j as u64 + 1)));
        v += &next;
        next = v.clone();
        d[j] = v;
    }
    ChebOddSeries::new(d.into_iter().map(BigReal::from_float).collect())
}

/// Evaluates `sum d_j T_{2j+1}(x)`.
pub fn eval_odd(s: &ChebOddSeries, x: &BigReal, ctx: &PrecisionContext) -> BigReal {
    BigReal::from_float(eval_odd_floats(&s.floats(), x.float(), ctx.work_bits()))
}

/// Collocation nodes `t_i = cos((2i-1) pi / (4n))`, `i = 1..n`, with a cosine
/// table shared by the transforms.
#[derive(Clone, Debug)]
pub struct NodeSet {
    n: usize,
    nodes: Vec<BigReal>,
    /// `cos(k pi / (4n))` for `k = 0..8n`.
    cosine_table: Vec<BigReal>,
}

/// `cos(k pi / (4n))` with `k` reduced modulo `8n`: the single routine that
/// fills the cosine table.
pub fn node_angle_cosine(n: usize, k: usize, ctx: &PrecisionContext) -> BigReal {
    let bits = ctx.work_bits();
    let k = k % (8 * n);
    let mut angle = mpnum::pi(ctx).into_float();
    angle *= k as u64;
    angle /= (4 * n) as u64;
    BigReal::from_float(Float::with_val(bits, angle.cos_ref()))
}

pub fn make_nodes(n: usize, ctx: &PrecisionContext) -> Result<NodeSet> {
    if n < 1 {
        return Err(Error::InvalidArgument("node count must be at least 1".into()));
    }
    let cosine_table: Vec<BigReal> = (0..8 * n)
        .into_par_iter()
        .map(|k| node_angle_cosine(n, k, ctx))
        .collect();
    let nodes = (0..n).map(|i| cosine_table[2 * i + 1].clone()).collect();
    Ok(NodeSet {
        n,
        nodes,
        cosine_table,
    })
}

impl NodeSet {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Nodes in decreasing order, `t_1 > t_2 > ... > t_n`.
    pub fn nodes(&self) -> &[BigReal] {
        &self.nodes
    }

    /// `T_{2j}(t_{i+1}) = cos(j (2i+1) pi / (2n))` for 0-based `i`.
    pub fn cosine(&self, j: usize, i: usize) -> &BigReal {
        &self.cosine_table[(2 * j * (2 * i + 1)) % (8 * self.n)]
    }

    pub fn cosine_table(&self) -> &[BigReal] {
        &self.cosine_table
    }

    pub fn precision_bits(&self) -> u32 {
        self.nodes[0].precision_bits()
    }
}

/// Nodal values `f(t_i) = c_0/2 + sum_{j>=1} c_j cos(j (2i-1) pi / (2n))`.
pub fn coeffs_to_values(
    s: &ChebEvenSeries,
    nodes: &NodeSet,
    ctx: &PrecisionContext,
) -> Result<Vector> {
    let n = nodes.n;
    if s.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: s.len(),
        });
    }
    let bits = ctx.work_bits();
    let out: Vec<Float> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = Float::with_val(bits, s.coeffs[0].float());
            acc >>= 1;
            for j in 1..n {
                acc += s.coeffs[j].float() * nodes.cosine(j, i).float();
            }
            acc
        })
        .collect();
    Ok(Vector::from_floats(out))
}

/// Coefficients `c_j = (2/n) sum_i f(t_i) cos(j (2i-1) pi / (2n))`.
pub fn values_to_coeffs(
    vals: &Vector,
    nodes: &NodeSet,
    ctx: &PrecisionContext,
) -> Result<ChebEvenSeries> {
    let n = nodes.n;
    if vals.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: vals.len(),
        });
    }
    let bits = ctx.work_bits();
    let v = vals.entries();
    let out: Vec<BigReal> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = Float::new(bits);
            for (i, vi) in v.iter().enumerate() {
                acc += vi.float() * nodes.cosine(j, i).float();
            }
            acc *= 2;
            acc /= n as u64;
            BigReal::from_float(acc)
        })
        .collect();
    ChebEvenSeries::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(bits: u32) -> PrecisionContext {
        PrecisionContext::from_bits(bits).unwrap()
    }

    fn big(x: f64, c: &PrecisionContext) -> BigReal {
        BigReal::from_f64(x, c).unwrap()
    }

    /// Monomial coefficients of T_k for k = 0..=deg (exact integers).
    fn chebyshev_monomials(deg: usize) -> Vec<Vec<i128>> {
        let mut t: Vec<Vec<i128>> = vec![vec![1], vec![0, 1]];
        for k in 2..=deg {
            let mut next = vec![0i128; k + 1];
            for (p, &a) in t[k - 1].iter().enumerate() {
                next[p + 1] += 2 * a;
            }
            for (p, &a) in t[k - 2].iter().enumerate() {
                next[p] -= a;
            }
            t.push(next);
        }
        t.truncate(deg + 1);
        t
    }

    /// Monomial coefficients of sum' c_j T_{2j}, as exact rationals evaluated
    /// by Horner at `bits` precision.
    fn horner_even(c: &[BigReal], x: &BigReal, bits: u32) -> Float {
        let deg = 2 * (c.len() - 1);
        let t = chebyshev_monomials(deg.max(1));
        let mut mono = vec![Float::new(bits); deg + 1];
        for (j, cj) in c.iter().enumerate() {
            let mut w = Float::with_val(bits, cj.float());
            if j == 0 {
                w >>= 1;
            }
            for (p, &a) in t[2 * j].iter().enumerate() {
                mono[p] += Float::with_val(bits, &w * Float::with_val(bits, a));
            }
        }
        horner(&mono, x.float(), bits)
    }

    fn horner_odd(d: &[BigReal], x: &BigReal, bits: u32) -> Float {
        let deg = 2 * d.len() + 1;
        let t = chebyshev_monomials(deg);
        let mut mono = vec![Float::new(bits); deg + 1];
        for (j, dj) in d.iter().enumerate() {
            for (p, &a) in t[2 * j + 1].iter().enumerate() {
                mono[p] += Float::with_val(bits, dj.float() * Float::with_val(bits, a));
            }
        }
        horner(&mono, x.float(), bits)
    }

    fn horner(mono: &[Float], x: &Float, bits: u32) -> Float {
        let mut acc = Float::new(bits);
        for a in mono.iter().rev() {
            acc *= x;
            acc += a;
        }
        acc
    }

    fn random_series(n: usize, seed: u64, c: &PrecisionContext) -> ChebEvenSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ChebEvenSeries::new(
            (0..n)
                .map(|_| {
                    let text = format!("{:.30}", rng.gen_range(-1.0..1.0));
                    BigReal::from_decimal(&text, c).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    fn abs_diff(a: &Float, b: &Float) -> Float {
        Float::with_val(64, a - b).abs()
    }

    fn pow2(e: i32) -> Float {
        Float::with_val(64, Float::i_exp(1, e))
    }

    #[test]
    fn nodes_closed_forms() {
        let c = ctx(200);
        let one = make_nodes(1, &c).unwrap();
        let half_sqrt2 = BigReal::from_i64(2, &c).sqrt(&c).unwrap().float().clone() >> 1u32;
        assert!(abs_diff(one.nodes()[0].float(), &half_sqrt2) <= pow2(-199));

        let two = make_nodes(2, &c).unwrap();
        assert!(two.nodes()[0] > two.nodes()[1]);
        let pi8 = mpnum::pi(&c).float().clone() / 8u32;
        let direct = Float::with_val(200, pi8.cos_ref());
        assert!(abs_diff(two.nodes()[0].float(), &direct) <= pow2(-199));

        let many = make_nodes(64, &c).unwrap();
        for w in many.nodes().windows(2) {
            assert!(w[0] > w[1]);
        }
        assert!(many.nodes().iter().all(|t| t.to_f64() > 0.0 && t.to_f64() < 1.0));
        assert!(make_nodes(0, &c).is_err());
    }

    #[test]
    fn cosine_table_reproduces_direct_calls() {
        let c = ctx(160);
        let n = 7;
        let nodes = make_nodes(n, &c).unwrap();
        let hi = ctx(400);
        for j in 0..n {
            for i in 0..n {
                let k = 2 * j * (2 * i + 1);
                assert_eq!(nodes.cosine(j, i), &node_angle_cosine(n, k, &c));
                // unreduced angle j(2i+1)pi/(2n), evaluated independently
                let mut angle = mpnum::pi(&hi).into_float();
                angle *= (j * (2 * i + 1)) as u64;
                angle /= (2 * n) as u64;
                let direct = Float::with_val(400, angle.cos_ref());
                assert!(abs_diff(nodes.cosine(j, i).float(), &direct) <= pow2(-155));
            }
        }
    }

    #[test]
    fn clenshaw_examples() {
        let c = ctx(128);
        let s = ChebEvenSeries::new(vec![
            BigReal::from_decimal("0.6", &c).unwrap(),
            BigReal::from_decimal("-0.7", &c).unwrap(),
        ])
        .unwrap();
        let at0 = clenshaw_eval(&s, &BigReal::zero(&c), &c);
        let at1 = clenshaw_eval(&s, &BigReal::one(&c), &c);
        assert!(abs_diff(at0.float(), &Float::with_val(128, 1)) <= pow2(-120));
        let expect = BigReal::from_decimal("-0.4", &c).unwrap();
        assert!(abs_diff(at1.float(), expect.float()) <= pow2(-120));
        assert!(abs_diff(s.value_at_one(&c).float(), expect.float()) <= pow2(-120));
    }

    #[test]
    fn clenshaw_matches_horner_six_terms() {
        let c = ctx(256);
        let s = random_series(6, 1, &c);
        let x = BigReal::from_decimal("0.37", &c).unwrap();
        let got = clenshaw_eval(&s, &x, &c);
        let want = horner_even(s.coeffs(), &x, 512);
        assert!(abs_diff(got.float(), &want) < pow2(-256 + 12));
    }

    #[test]
    fn isolated_terms() {
        let c = ctx(256);
        let x = BigReal::from_decimal("0.3", &c).unwrap();
        assert_eq!(isolated_term_eval(0, &x, &c).to_f64(), 1.0);
        let half = BigReal::from_ratio(1, 2, &c).unwrap();
        assert_eq!(isolated_term_eval(1, &half, &c).to_f64(), -0.5);
        let e13 = ChebEvenSeries::unit(14, 13, &c).unwrap();
        let got = isolated_term_eval(13, &x, &c);
        let want = clenshaw_eval(&e13, &x, &c);
        assert!(abs_diff(got.float(), want.float()) < pow2(-256 + 12));
    }

    #[test]
    fn isolated_terms_agree_with_clenshaw_up_to_64() {
        let c = ctx(256);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for j in 0..=64 {
            let x = big(rng.gen_range(-1.0..1.0), &c);
            let e = ChebEvenSeries::unit(j + 1, j, &c).unwrap();
            let got = isolated_term_eval(j as u64, &x, &c);
            let want = clenshaw_eval(&e, &x, &c);
            // unit series carries the halving on c_0
            let want = if j == 0 { want.float().clone() * 2u32 } else { want.float().clone() };
            assert!(abs_diff(got.float(), &want) < pow2(-256 + 16), "j = {j}");
        }
    }

    #[test]
    fn tail_split_cases() {
        let c = ctx(256);
        let x = BigReal::from_decimal("0.81", &c).unwrap();
        let s = random_series(16, 4, &c);
        assert_eq!(
            tail_split_eval(&s, &x, 16, &c).unwrap(),
            clenshaw_eval(&s, &x, &c)
        );

        let mut sparse = random_series(4, 5, &c).resized(16, &c).unwrap();
        let prefix = ChebEvenSeries::new(sparse.coeffs()[..4].to_vec()).unwrap();
        assert_eq!(
            tail_split_eval(&sparse, &x, 4, &c).unwrap(),
            clenshaw_eval(&prefix, &x, &c)
        );

        sparse.coeffs[11] = BigReal::from_decimal("-0.3125", &c).unwrap();
        let split = tail_split_eval(&sparse, &x, 4, &c).unwrap();
        let full = clenshaw_eval(&sparse, &x, &c);
        assert!(abs_diff(split.float(), full.float()) < pow2(-256 + 12));
        assert!(tail_split_eval(&sparse, &x, 17, &c).is_err());
    }

    #[test]
    fn derivative_examples() {
        let c = ctx(128);
        let constant = ChebEvenSeries::from_f64(&[0.9], &c).unwrap();
        assert!(differentiate(&constant).is_empty());
        let x = big(0.3, &c);
        assert!(eval_odd(&differentiate(&constant), &x, &c).is_zero());

        let t2 = ChebEvenSeries::from_f64(&[0.0, 1.0], &c).unwrap();
        let d = differentiate(&t2);
        assert_eq!(d.len(), 1);
        assert_eq!(d.coeffs()[0].to_f64(), 4.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = 256;
        let c = ctx(p);
        let s = random_series(8, 12, &c);
        let x = BigReal::from_decimal("0.41", &c).unwrap();
        let d = eval_odd(&differentiate(&s), &x, &c);
        // central difference with step 10^-(p_dec/2)
        let digits = mpnum::digits_for_bits(p);
        let h = BigReal::from_decimal(&format!("1e-{}", digits / 2), &c).unwrap();
        let fp = clenshaw_eval(&s, &x.add(&h, &c).unwrap(), &c);
        let fm = clenshaw_eval(&s, &x.sub(&h, &c).unwrap(), &c);
        let two_h = h.add(&h, &c).unwrap();
        let fd = fp.sub(&fm, &c).unwrap().div(&two_h, &c).unwrap();
        let err = d.sub(&fd, &c).unwrap().abs();
        assert!(err.log10_abs() < -(digits as f64 / 2.0) + 3.0, "{err:?}");
    }

    #[test]
    fn derivative_is_exact_against_monomial_expansion() {
        let c = ctx(256);
        for n in 1..=8 {
            let s = random_series(n, 100 + n as u64, &c);
            let d = differentiate(&s);
            // derivative of the monomial expansion, evaluated exactly
            let deg = 2 * (n - 1);
            let t = chebyshev_monomials(deg.max(1));
            let mut mono = vec![Float::new(512); deg + 1];
            for (j, cj) in s.coeffs().iter().enumerate() {
                let mut w = Float::with_val(512, cj.float());
                if j == 0 {
                    w >>= 1;
                }
                for (p, &a) in t[2 * j].iter().enumerate() {
                    mono[p] += Float::with_val(512, &w * Float::with_val(512, a));
                }
            }
            let dmono: Vec<Float> = mono
                .iter()
                .enumerate()
                .skip(1)
                .map(|(p, a)| Float::with_val(512, a * p as u32))
                .collect();
            for xv in [-0.9, -0.2, 0.41, 0.77] {
                let x = big(xv, &c);
                let want = horner(&dmono, x.float(), 512);
                let got = eval_odd(&d, &x, &c);
                assert!(abs_diff(got.float(), &want) < pow2(-256 + 16), "n = {n}");
                let odd_oracle = horner_odd(d.coeffs(), &x, 512);
                assert!(abs_diff(got.float(), &odd_oracle) < pow2(-256 + 16));
            }
        }
    }

    #[test]
    fn odd_examples() {
        let c = ctx(128);
        let x = big(0.5, &c);
        let t1 = ChebOddSeries::new(vec![BigReal::one(&c)]);
        assert_eq!(eval_odd(&t1, &x, &c).to_f64(), 0.5);
        let t3 = ChebOddSeries::new(vec![BigReal::zero(&c), BigReal::one(&c)]);
        assert_eq!(eval_odd(&t3, &x, &c).to_f64(), -1.0);
    }

    #[test]
    fn dct_constant_series() {
        let c = ctx(200);
        let nodes = make_nodes(5, &c).unwrap();
        let e0 = ChebEvenSeries::from_f64(&[2.0, 0.0, 0.0, 0.0, 0.0], &c).unwrap();
        let vals = coeffs_to_values(&e0, &nodes, &c).unwrap();
        assert!(vals.iter().all(|v| v.to_f64() == 1.0));
        let back = values_to_coeffs(&vals, &nodes, &c).unwrap();
        assert!(abs_diff(back.coeffs()[0].float(), &Float::with_val(64, 2)) < pow2(-190));
        assert!(values_to_coeffs(&Vector::zeros(4, &c), &nodes, &c).is_err());
    }

    #[test]
    fn dct_values_match_clenshaw() {
        let c = ctx(256);
        let nodes = make_nodes(16, &c).unwrap();
        let s = random_series(16, 21, &c);
        let vals = coeffs_to_values(&s, &nodes, &c).unwrap();
        for (v, t) in vals.iter().zip(nodes.nodes()) {
            let direct = clenshaw_eval(&s, t, &c);
            assert!(abs_diff(v.float(), direct.float()) < pow2(-256 + 12));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn dct_roundtrip(n in 1usize..24, seed in any::<u64>()) {
            let c = ctx(256);
            let nodes = make_nodes(n, &c).unwrap();
            let s = random_series(n, seed, &c);
            let back = values_to_coeffs(&coeffs_to_values(&s, &nodes, &c).unwrap(), &nodes, &c).unwrap();
            for (a, b) in back.coeffs().iter().zip(s.coeffs()) {
                prop_assert!(abs_diff(a.float(), b.float()) < pow2(-256 + 12));
            }
        }

        #[test]
        fn clenshaw_agrees_with_horner(n in 1usize..=24, seed in any::<u64>(), xv in -1.0f64..1.0) {
            let c = ctx(256);
            let s = random_series(n, seed, &c);
            let x = big(xv, &c);
            let got = clenshaw_eval(&s, &x, &c);
            let want = horner_even(s.coeffs(), &x, 768);
            prop_assert!(abs_diff(got.float(), &want) < pow2(-256 + 12));
        }
    }
}
