use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix. Vectors are `1 x n` or `n x 1`, scalars `1 x 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape {
                op: "tensor",
                lhs: [rows, cols],
                rhs: [data.len(), 1],
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, v: S) -> Self {
        Self {
            rows,
            cols,
            data: vec![v; rows * cols],
        }
    }

    pub fn scalar(v: S) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![v],
        }
    }

    /// Column vector `n x 1`.
    pub fn column(data: Vec<S>) -> Self {
        Self {
            rows: data.len(),
            cols: 1,
            data,
        }
    }

    /// Row vector `1 x n`.
    pub fn row(data: Vec<S>) -> Self {
        Self {
            rows: 1,
            cols: data.len(),
            data,
        }
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Shape {
                    op: "from_rows",
                    lhs: [rows.len(), cols],
                    rhs: [1, r.len()],
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn shape(&self) -> [usize; 2] {
        [self.rows, self.cols]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols + c]
    }

    pub fn row_slice(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Value of a `1 x 1` tensor.
    pub fn item(&self) -> Option<S> {
        (self.len() == 1).then(|| self.data[0])
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub(crate) fn add_assign(&mut self, other: &Tensor<S>) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b;
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.as_f64()).collect()
    }
}

/// `a (n x k) * b (k x m)`, i-k-j loop order.
pub(crate) fn matmul<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> Tensor<S> {
    let (n, k, m) = (a.rows, a.cols, b.cols);
    let mut out = vec![S::zero(); n * m];
    for i in 0..n {
        let orow = &mut out[i * m..(i + 1) * m];
        for p in 0..k {
            let av = a.data[i * k + p];
            if av == S::zero() {
                continue;
            }
            let brow = &b.data[p * m..(p + 1) * m];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o = *o + av * bv;
            }
        }
    }
    Tensor {
        rows: n,
        cols: m,
        data: out,
    }
}

/// `a^T (k x n) * b (n x m)` without materializing the transpose.
pub(crate) fn matmul_tn<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> Tensor<S> {
    let (n, k, m) = (a.rows, a.cols, b.cols);
    let mut out = vec![S::zero(); k * m];
    for i in 0..n {
        let brow = &b.data[i * m..(i + 1) * m];
        for p in 0..k {
            let av = a.data[i * k + p];
            if av == S::zero() {
                continue;
            }
            let orow = &mut out[p * m..(p + 1) * m];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o = *o + av * bv;
            }
        }
    }
    Tensor {
        rows: k,
        cols: m,
        data: out,
    }
}

/// `a (n x m) * b^T` where `b` is `k x m`.
pub(crate) fn matmul_nt<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> Tensor<S> {
    let (n, m, k) = (a.rows, a.cols, b.rows);
    let mut out = vec![S::zero(); n * k];
    for i in 0..n {
        let arow = &a.data[i * m..(i + 1) * m];
        for j in 0..k {
            let brow = &b.data[j * m..(j + 1) * m];
            let mut acc = S::zero();
            for (&x, &y) in arow.iter().zip(brow) {
                acc = acc + x * y;
            }
            out[i * k + j] = acc;
        }
    }
    Tensor {
        rows: n,
        cols: k,
        data: out,
    }
}

pub(crate) fn transpose<S: Scalar>(a: &Tensor<S>) -> Tensor<S> {
    let mut out = vec![S::zero(); a.len()];
    for i in 0..a.rows {
        for j in 0..a.cols {
            out[j * a.rows + i] = a.data[i * a.cols + j];
        }
    }
    Tensor {
        rows: a.cols,
        cols: a.rows,
        data: out,
    }
}
