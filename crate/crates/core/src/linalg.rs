//! Dense vectors and square matrices of [`BigReal`].
//!
//! All reductions (dot products, norms) run in a fixed left-to-right order with
//! fused multiply-add, so results do not depend on how rows are scheduled
//! across threads.

use std::cmp::Ordering;

use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};
use crate::mpnum::{BigReal, PrecisionContext};

#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<BigReal>);

impl Vector {
    pub fn new(entries: Vec<BigReal>) -> Self {
        Vector(entries)
    }

    pub fn zeros(n: usize, ctx: &PrecisionContext) -> Self {
        Vector(vec![BigReal::zero(ctx); n])
    }

    /// The canonical basis vector with a one at (0-based) index `j`.
    pub fn unit(n: usize, j: usize, ctx: &PrecisionContext) -> Result<Self> {
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, len: n });
        }
        let mut v = Self::zeros(n, ctx);
        v.0[j] = BigReal::one(ctx);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[BigReal] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigReal> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BigReal> {
        self.0.iter()
    }

    pub(crate) fn floats(&self) -> impl Iterator<Item = &Float> + '_ {
        self.0.iter().map(BigReal::float)
    }

    pub(crate) fn from_floats(v: Vec<Float>) -> Self {
        Vector(v.into_iter().map(BigReal::from_float).collect())
    }

    pub fn round_to(&self, bits: u32) -> Vector {
        Vector(self.0.iter().map(|x| x.round_to(bits)).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(BigReal::to_f64).collect()
    }

    /// Maximum absolute entry.
    pub fn norm_inf(&self) -> Result<BigReal> {
        let j = self.argmax_abs()?;
        Ok(self.0[j].abs())
    }

    /// Smallest 0-based index attaining the maximum absolute entry.
    pub fn argmax_abs(&self) -> Result<usize> {
        if self.0.is_empty() {
            return Err(Error::InvalidArgument("argmax of an empty vector".into()));
        }
        let mut best = 0;
        for (i, x) in self.0.iter().enumerate().skip(1) {
            if x.cmp_abs(&self.0[best]) == Ordering::Greater {
                best = i;
            }
        }
        Ok(best)
    }

    pub fn norm2(&self, ctx: &PrecisionContext) -> Result<BigReal> {
        inner_product(self, self, ctx)?.sqrt(ctx)
    }

    pub fn add(&self, other: &Vector, ctx: &PrecisionContext) -> Result<Vector> {
        check_len(self.len(), other.len())?;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.add(b, ctx))
            .collect::<Result<_>>()
            .map(Vector)
    }

    pub fn sub(&self, other: &Vector, ctx: &PrecisionContext) -> Result<Vector> {
        check_len(self.len(), other.len())?;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.sub(b, ctx))
            .collect::<Result<_>>()
            .map(Vector)
    }

    pub fn scale(&self, s: &BigReal, ctx: &PrecisionContext) -> Result<Vector> {
        self.0
            .iter()
            .map(|a| a.mul(s, ctx))
            .collect::<Result<_>>()
            .map(Vector)
    }

    /// `self + a * x` with one rounding per entry.
    pub fn axpy(&self, a: &BigReal, x: &Vector, ctx: &PrecisionContext) -> Result<Vector> {
        check_len(self.len(), x.len())?;
        let bits = ctx.work_bits();
        let out = self
            .0
            .iter()
            .zip(&x.0)
            .map(|(y, xi)| {
                let mut acc = Float::with_val(bits, y.float());
                acc += a.float() * xi.float();
                acc
            })
            .collect();
        Ok(Vector::from_floats(out))
    }
}

impl From<Vec<BigReal>> for Vector {
    fn from(v: Vec<BigReal>) -> Self {
        Vector(v)
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn dot<'a>(
    a: impl Iterator<Item = &'a Float>,
    b: impl Iterator<Item = &'a Float>,
    bits: u32,
) -> Float {
    let mut acc = Float::new(bits);
    for (x, y) in a.zip(b) {
        acc += x * y;
    }
    acc
}

/// Fixed-order inner product at `ctx` precision.
pub fn inner_product(u: &Vector, v: &Vector, ctx: &PrecisionContext) -> Result<BigReal> {
    check_len(u.len(), v.len())?;
    let acc = dot(u.floats(), v.floats(), ctx.work_bits());
    if !acc.is_finite() {
        return Err(Error::NonFinite("inner_product"));
    }
    Ok(BigReal::from_float(acc))
}

/// Square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Float>,
}

impl DenseMatrix {
    pub fn zeros(n: usize, ctx: &PrecisionContext) -> Self {
        DenseMatrix {
            n,
            data: vec![Float::new(ctx.work_bits()); n * n],
        }
    }

    pub fn identity(n: usize, ctx: &PrecisionContext) -> Self {
        let mut m = Self::zeros(n, ctx);
        for i in 0..n {
            m.data[i * n + i] = Float::with_val(ctx.work_bits(), 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigReal>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            check_len(n, row.len())?;
            data.extend(row.into_iter().map(BigReal::into_float));
        }
        Ok(DenseMatrix { n, data })
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(cols: Vec<Vector>) -> Result<Self> {
        let n = cols.len();
        let mut cols = cols
            .into_iter()
            .map(|c| {
                check_len(n, c.len())?;
                Ok(c.into_entries().into_iter())
            })
            .collect::<Result<Vec<_>>>()?;
        // entries are moved, not copied: large Jacobians exist only once
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n {
            data.extend(cols.iter_mut().map(|c| c.next().expect("length checked").into_float()));
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> BigReal {
        BigReal::from_float(self.data[i * self.n + j].clone())
    }

    pub fn set(&mut self, i: usize, j: usize, value: &BigReal) {
        let slot = &mut self.data[i * self.n + j];
        *slot = Float::with_val(slot.prec(), value.float());
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector::from_floats((0..self.n).map(|i| self.data[i * self.n + j].clone()).collect())
    }

    pub(crate) fn row(&self, i: usize) -> &[Float] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Precision of the stored entries (that of entry (0, 0)).
    pub fn precision_bits(&self) -> u32 {
        self.data.first().map_or(0, Float::prec)
    }

    /// max_i sum_j |m_ij|, accumulated at 64 bits (only used for thresholds).
    pub fn norm_inf(&self) -> BigReal {
        let mut best = Float::new(64);
        for i in 0..self.n {
            let mut s = Float::new(64);
            for x in self.row(i) {
                s += Float::with_val(64, x.abs_ref());
            }
            if s > best {
                best = s;
            }
        }
        BigReal::from_float(best)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(Float::to_f64).collect())
            .collect()
    }
}

/// `m * v`. The vector is rounded to `ctx` precision before the product; each
/// row is a fixed-order fused dot product.
pub fn mat_vec(m: &DenseMatrix, v: &Vector, ctx: &PrecisionContext) -> Result<Vector> {
    check_len(m.n, v.len())?;
    let bits = ctx.work_bits();
    let vr: Vec<Float> = v.floats().map(|x| Float::with_val(bits, x)).collect();
    let out: Vec<Float> = (0..m.n)
        .into_par_iter()
        .map(|i| dot(m.row(i).iter(), vr.iter(), bits))
        .collect();
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("mat_vec"));
    }
    Ok(Vector::from_floats(out))
}

/// Adds `u` to column `j` (0-based): `m + u e_j^T`. No other entry changes.
pub fn rank_one_update(
    m: &mut DenseMatrix,
    u: &Vector,
    j: usize,
    ctx: &PrecisionContext,
) -> Result<()> {
    check_len(m.n, u.len())?;
    if j >= m.n {
        return Err(Error::IndexOutOfRange { index: j, len: m.n });
    }
    let bits = ctx.work_bits();
    for (i, ui) in u.floats().enumerate() {
        let slot = &mut m.data[i * m.n + j];
        let mut sum = Float::with_val(bits, &*slot);
        sum += ui;
        *slot = sum;
    }
    Ok(())
}

/// Explicit inverse by in-place Gauss-Jordan elimination with partial
/// (max-|pivot|) row pivoting, at `ctx` precision.
///
/// A pivot below `2^(8 - work_bits) * ||m||_inf` is treated as singular.
pub fn invert_gauss(m: &DenseMatrix, ctx: &PrecisionContext) -> Result<DenseMatrix> {
    invert_gauss_owned(m.clone(), ctx)
}

/// As [`invert_gauss`], inverting in the storage of `m`.
pub fn invert_gauss_owned(m: DenseMatrix, ctx: &PrecisionContext) -> Result<DenseMatrix> {
    let n = m.n;
    let bits = ctx.work_bits();
    let mut threshold = m.norm_inf().into_float();
    let mut a = m.data;
    for x in &mut a {
        x.set_prec(bits);
    }
    threshold <<= 8 - bits as i32;
    let mut perm = vec![0usize; n];

    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[i * n + k].cmp_abs(&a[p * n + k]) == Some(Ordering::Greater) {
                p = i;
            }
        }
        let pivot_abs = Float::with_val(bits, a[p * n + k].abs_ref());
        if pivot_abs.is_zero() || pivot_abs < threshold {
            return Err(Error::Singular { step: k });
        }
        perm[k] = p;
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
        }

        let pivot = std::mem::replace(&mut a[k * n + k], Float::with_val(bits, 1));
        for x in &mut a[k * n..(k + 1) * n] {
            *x /= &pivot;
        }
        let pivot_row: Vec<Float> = a[k * n..(k + 1) * n].to_vec();

        a.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            if i == k {
                return;
            }
            let f = std::mem::replace(&mut row[k], Float::new(bits));
            if f.is_zero() {
                return;
            }
            for (x, pk) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * pk;
            }
        });
    }

    for k in (0..n).rev() {
        let p = perm[k];
        if p != k {
            for i in 0..n {
                a.swap(i * n + k, i * n + p);
            }
        }
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("invert_gauss"));
    }
    Ok(DenseMatrix { n, data: a })
}

/// Product of two matrices at `ctx` precision (test and diagnostics helper).
pub fn mat_mul(a: &DenseMatrix, b: &DenseMatrix, ctx: &PrecisionContext) -> Result<DenseMatrix> {
    check_len(a.n, b.n)?;
    let n = a.n;
    let bits = ctx.work_bits();
    let cols: Vec<Vec<Float>> = (0..n)
        .map(|j| (0..n).map(|i| b.data[i * n + j].clone()).collect())
        .collect();
    let data: Vec<Float> = (0..n * n)
        .into_par_iter()
        .map(|idx| dot(a.row(idx / n).iter(), cols[idx % n].iter(), bits))
        .collect();
    Ok(DenseMatrix { n, data })
}
