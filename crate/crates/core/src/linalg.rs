//! Column-restricted least squares via an incrementally grown thin QR
//! factorization (modified Gram-Schmidt with one reorthogonalization pass).
//!
//! The greedy algorithms score many supports that differ from a base support
//! by a single column. Keeping the factorization of the base lets each
//! candidate be solved in `O(m·k + k²)` instead of refactoring from scratch.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Pivots below this fraction of the largest pivot mark a rank-deficient system.
pub const RANK_TOL: f64 = 1e-10;

/// Thin QR factorization of `A[:, cols]`, with `cols` kept in insertion order.
#[derive(Clone, Debug)]
pub struct ColumnQr<'a> {
    a: &'a DMatrix<f64>,
    cols: Vec<usize>,
    q: Vec<DVector<f64>>,
    // Column k of R holds k + 1 entries.
    r: Vec<Vec<f64>>,
    max_pivot: f64,
}

/// One orthogonalization step against an existing basis.
struct Extension {
    q: DVector<f64>,
    r_col: Vec<f64>,
}

impl<'a> ColumnQr<'a> {
    pub fn new(a: &'a DMatrix<f64>) -> Self {
        ColumnQr {
            a,
            cols: Vec::new(),
            q: Vec::new(),
            r: Vec::new(),
            max_pivot: 0.0,
        }
    }

    /// Factorizes `A[:, cols]` with the columns taken in the given order.
    pub fn with_columns(a: &'a DMatrix<f64>, cols: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut qr = ColumnQr::new(a);
        for c in cols {
            qr.push(c)?;
        }
        Ok(qr)
    }

    pub fn matrix(&self) -> &'a DMatrix<f64> {
        self.a
    }

    pub fn columns(&self) -> &[usize] {
        &self.cols
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    fn extend(&self, col: usize) -> Result<Extension> {
        let mut w: DVector<f64> = self.a.column(col).into_owned();
        let k = self.q.len();
        let mut r_col = vec![0.0; k + 1];
        for _pass in 0..2 {
            for (i, qi) in self.q.iter().enumerate() {
                let h = qi.dot(&w);
                w.axpy(-h, qi, 1.0);
                r_col[i] += h;
            }
        }
        let pivot = w.norm();
        let largest = self.max_pivot.max(pivot);
        if pivot == 0.0 || pivot < RANK_TOL * largest || k >= self.a.nrows() {
            let mut support = self.cols.clone();
            support.push(col);
            return Err(Error::DegenerateSystem { support, pivot });
        }
        r_col[k] = pivot;
        w /= pivot;
        Ok(Extension { q: w, r_col })
    }

    /// Appends column `col` of `A` to the factorization.
    pub fn push(&mut self, col: usize) -> Result<()> {
        let ext = self.extend(col)?;
        self.max_pivot = self.max_pivot.max(ext.r_col[self.q.len()]);
        self.q.push(ext.q);
        self.r.push(ext.r_col);
        self.cols.push(col);
        Ok(())
    }

    /// `Qᵀ y`.
    pub fn qt_mul(&self, y: &DVector<f64>) -> Vec<f64> {
        self.q.iter().map(|qi| qi.dot(y)).collect()
    }

    /// Least-squares coefficients for the current columns, in `columns()` order.
    pub fn solve(&self, y: &DVector<f64>) -> Vec<f64> {
        let qty = self.qt_mul(y);
        back_substitute(&self.r, None, &qty)
    }

    /// Least-squares coefficients for `columns() ++ [col]` without modifying
    /// the factorization. `qty` must be `self.qt_mul(y)`.
    pub fn solve_with(&self, col: usize, y: &DVector<f64>, qty: &[f64]) -> Result<Vec<f64>> {
        let ext = self.extend(col)?;
        let mut rhs = qty.to_vec();
        rhs.push(ext.q.dot(y));
        Ok(back_substitute(&self.r, Some(&ext.r_col), &rhs))
    }
}

fn back_substitute(r: &[Vec<f64>], extra: Option<&Vec<f64>>, rhs: &[f64]) -> Vec<f64> {
    let k = rhs.len();
    let col = |j: usize| -> &Vec<f64> {
        if j < r.len() {
            &r[j]
        } else {
            extra.expect("extra column")
        }
    };
    let mut z = rhs.to_vec();
    for i in (0..k).rev() {
        let mut acc = z[i];
        for (j, zj) in z.iter().enumerate().take(k).skip(i + 1) {
            acc -= col(j)[i] * zj;
        }
        z[i] = acc / col(i)[i];
    }
    z
}

/// `A[:, cols] · z`.
pub fn restricted_mul(a: &DMatrix<f64>, cols: &[usize], z: &[f64]) -> DVector<f64> {
    let mut out = DVector::zeros(a.nrows());
    for (&c, &zc) in cols.iter().zip(z) {
        out.axpy(zc, &a.column(c), 1.0);
    }
    out
}
