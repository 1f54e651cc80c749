//! Dense complex linear algebra.
//!
//! Matrices are stored row-major. Multi-subsystem operators use big-endian
//! ordering: subsystem 0 is the most significant factor of a Kronecker
//! product, so `kron(a, b)` places `a` on the left.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Tolerance used for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance used when asserting reconstructions.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
/// Sweep cap for the Jacobi eigensolver.
pub const MAX_SWEEPS: usize = 100;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting bad lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("matrix dimensions must be nonzero".into()));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Shape(format!("{rows}x{cols} overflows")))?;
        if data.len() != len {
            return Err(Error::Shape(format!(
                "expected {len} entries for {rows}x{cols}, got {}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_vec(nrows, ncols, rows.concat())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be nonzero");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = c(v, 0.0);
        }
        m
    }

    /// `|u><v|`
    pub fn outer(u: &[Complex], v: &[Complex]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m[(i, j)] = ui * vj.conj();
            }
        }
        m
    }

    /// `|i><j|` in dimension `n`.
    pub fn basis_op(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    fn map(&self, f: impl Fn(Complex) -> Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Result<Vec<Complex>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "cannot apply {}x{} to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `A rho A^dagger`
    pub fn sandwich(&self, inner: &Self) -> Result<Self> {
        self.matmul(inner)?.matmul(&self.adjoint())
    }

    fn zip_with(
        &self,
        rhs: &Self,
        op: &str,
        f: impl Fn(Complex, Complex) -> Complex,
    ) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Shape(format!(
                "cannot {op} {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "subtract", |a, b| a - b)
    }

    /// Largest entry-wise modulus of `self - rhs`. Shapes must agree.
    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64> {
        Ok(self.try_sub(rhs)?.max_abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |A - A^dagger|`, or an error for non-square input.
    pub fn hermitian_deviation(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "{}x{} is not square",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        Ok(dev)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation().is_ok_and(|d| d <= tol)
    }

    /// Whether `U^dagger U = I` within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square()
            && self
                .adjoint()
                .matmul(self)
                .and_then(|p| p.max_abs_diff(&Self::identity(self.rows)))
                .is_ok_and(|d| d <= tol)
    }

    /// Replaces `A` with `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Result<Self> {
        Ok(self.try_add(&self.adjoint())?.scale_real(0.5))
    }

    pub fn sum<'a>(mut iter: impl Iterator<Item = &'a Self>) -> Result<Self> {
        let first = iter
            .next()
            .ok_or_else(|| Error::Argument("cannot sum an empty operator list".into()))?;
        iter.try_fold(first.clone(), |acc, m| acc.try_add(m))
    }

    /// Serializes in the text format: one row per line, entries `re+imj`
    /// with 17 significant digits, separated by spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|&z| format_complex(z)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let rows: Vec<Vec<Complex>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(parse_complex)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Self::from_rows(&rows)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// Panicking operator forms, for callers that already know the shapes agree.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        self.try_add(rhs).expect("shape mismatch in +")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        self.try_sub(rhs).expect("shape mismatch in -")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in *")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let line: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:>9.5}{:+.5}i", z.re, z.im))
                .collect();
            writeln!(f, "  {}", line.join("  "))?;
        }
        write!(f, "]")
    }
}

pub fn format_complex(z: Complex) -> String {
    format!("{:.16e}{:+.16e}j", z.re, z.im)
}

pub fn parse_complex(token: &str) -> Result<Complex> {
    let bad = || Error::Parse(format!("malformed complex entry {token:?}"));
    let body = token.strip_suffix('j').ok_or_else(bad)?;
    // The imaginary part starts at the last sign that does not follow an exponent marker.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].parse().map_err(|_| bad())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::NonFinite("complex entry"));
    }
    Ok(c(re, im))
}

/// Kronecker product with `a` as the most significant factor:
/// `out[(i*p + k, j*q + l)] = a[(i, j)] * b[(k, l)]` for `b` of shape `p x q`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a
        .rows
        .checked_mul(b.rows)
        .ok_or_else(|| Error::Shape("Kronecker row count overflows".into()))?;
    let cols = a
        .cols
        .checked_mul(b.cols)
        .ok_or_else(|| Error::Shape("Kronecker column count overflows".into()))?;
    rows.checked_mul(cols)
        .ok_or_else(|| Error::Shape("Kronecker size overflows".into()))?;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..b.rows {
                let dst = (i * b.rows + k) * cols + j * b.cols;
                for (o, &bkl) in out.data[dst..dst + b.cols].iter_mut().zip(b.row(k)) {
                    *o = aij * bkl;
                }
            }
        }
    }
    Ok(out)
}

pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Result<ComplexMatrix> {
    let mut iter = factors.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Argument("Kronecker product of no factors".into()))?;
    iter.try_fold(first.clone(), |acc, m| kron(&acc, m))
}

/// Sum of the diagonal.
pub fn trace(a: &ComplexMatrix) -> Result<Complex> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "trace of non-square {}x{}",
            a.rows, a.cols
        )));
    }
    Ok((0..a.rows).map(|i| a[(i, i)]).sum())
}

/// Eigen-decomposition `A = V diag(eigenvalues) V^dagger` of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex> {
        self.eigenvectors.column(k)
    }

    /// Rebuilds `V f(diag) V^dagger` for an arbitrary function of the eigenvalues.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|x| x)
    }
}

/// Hermitian eigensolver using cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a[p][q]` with a
/// diagonal unitary and then applies the classical real Jacobi rotation in
/// the `(p, q)` plane. Sweeps continue until the off-diagonal Frobenius
/// norm is at most `tol * max(1, ||A||_F)`, capped at [`MAX_SWEEPS`].
pub fn eig_hermitian(a: &ComplexMatrix, tol: f64) -> Result<Spectrum> {
    let deviation = a.hermitian_deviation()?;
    if deviation > tol {
        return Err(Error::Symmetry { deviation, tol });
    }
    let n = a.rows;
    let mut m = a.hermitian_part()?;
    for i in 0..n {
        m[(i, i)].im = 0.0;
    }
    let mut v = ComplexMatrix::identity(n);
    let threshold = tol * m.frobenius_norm().max(1.0);

    let mut converged = false;
    let mut off = off_diagonal_norm(&m);
    for _ in 0..MAX_SWEEPS {
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        off = off_diagonal_norm(&m);
    }
    if !converged && off > threshold {
        return Err(Error::Convergence {
            sweeps: MAX_SWEEPS,
            off_norm: off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let eigenvalues = order.iter().map(|&k| m[(k, k)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            eigenvectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Applies `M <- U^dagger M U`, `V <- V U` with `U` chosen to zero `M[p][q]`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Skip pivots that are already negligible next to the diagonal.
    if mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        m[(p, q)] = ZERO;
        m[(q, p)] = ZERO;
        return;
    }
    let phase = apq / mag; // e^{i phi}
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        0.0
    };
    let cos = 1.0 / (t * t + 1.0).sqrt();
    let sin = t * cos;
    let phase_conj = phase.conj();
    let n = m.rows;

    // Columns: M <- M U with U = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] in (p, q).
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * cos - mkq * phase_conj * sin;
        m[(k, q)] = mkp * sin + mkq * phase_conj * cos;
    }
    // Rows: M <- U^dagger M.
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * cos - mqk * phase * sin;
        m[(q, k)] = mpk * sin + mqk * phase * cos;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)].im = 0.0;
    m[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * cos - vkq * phase_conj * sin;
        v[(k, q)] = vkp * sin + vkq * phase_conj * cos;
    }
}
