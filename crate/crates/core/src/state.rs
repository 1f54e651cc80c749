//! Pure states, density operators on multi-qudit registers, and the
//! partial trace.

use crate::error::{Error, Result};
use crate::linalg::{c, eig_hermitian, trace, Complex, ComplexMatrix, ONE, ZERO};

/// Normalization tolerance for kets.
pub const NORM_TOL: f64 = 1e-10;
/// Hermiticity and unit-trace tolerance for density operators.
pub const STATE_TOL: f64 = 1e-10;
/// Most negative eigenvalue still accepted as roundoff.
pub const EIGENVALUE_FLOOR: f64 = -1e-9;
/// Tolerance on mixture weights before renormalization.
pub const MIXTURE_TOL: f64 = 1e-9;

fn check_dims(dims: &[usize], len: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Shape(format!(
            "invalid subsystem dimensions {dims:?}"
        )));
    }
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Shape("register dimension overflows".into()))?;
    if total != len {
        return Err(Error::Shape(format!(
            "dims {dims:?} imply dimension {total}, got {len}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    dims: Vec<usize>,
    amplitudes: Vec<Complex>,
}

impl Ket {
    /// Accepts amplitudes whose squared norm is 1 within [`NORM_TOL`].
    pub fn new(dims: Vec<usize>, amplitudes: Vec<Complex>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("ket amplitudes"));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::Normalization { norm_sqr });
        }
        Ok(Self { dims, amplitudes })
    }

    /// Rescales any nonzero vector to unit norm.
    pub fn normalized(dims: Vec<usize>, amplitudes: Vec<Complex>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Normalization {
                norm_sqr: norm * norm,
            });
        }
        Self::new(dims, amplitudes.into_iter().map(|z| z / norm).collect())
    }

    pub fn from_real(dims: Vec<usize>, amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(dims, amplitudes.iter().map(|&x| c(x, 0.0)).collect())
    }

    /// Computational basis state `|index>`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let n: usize = dims.iter().product();
        if index >= n {
            return Err(Error::Argument(format!(
                "basis index {index} out of range {n}"
            )));
        }
        let mut amps = vec![ZERO; n];
        amps[index] = ONE;
        Self::new(dims, amps)
    }

    /// `(|000> + |111>) / sqrt(2)`
    pub fn ghz() -> Self {
        let mut amps = [0.0; 8];
        amps[0b000] = 1.0;
        amps[0b111] = 1.0;
        Self::from_real(vec![2, 2, 2], &amps).expect("valid GHZ state")
    }

    /// `(|100> + |010> + |001>) / sqrt(3)`
    pub fn w() -> Self {
        let mut amps = [0.0; 8];
        amps[0b100] = 1.0;
        amps[0b010] = 1.0;
        amps[0b001] = 1.0;
        Self::from_real(vec![2, 2, 2], &amps).expect("valid W state")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Ket) -> Result<Complex> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(
                "inner product of kets of different dimension".into(),
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `<psi|A|psi>`
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<Complex> {
        let a_psi = op.mul_vec(&self.amplitudes)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&a_psi)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// A unit-trace, Hermitian, positive-semidefinite operator together with
/// the dimensions of its subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity and unit trace within [`STATE_TOL`] and
    /// eigenvalues above [`EIGENVALUE_FLOOR`].
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape("density matrix must be square".into()));
        }
        check_dims(&dims, matrix.rows())?;
        let deviation = matrix.hermitian_deviation()?;
        if deviation > STATE_TOL {
            return Err(Error::Symmetry {
                deviation,
                tol: STATE_TOL,
            });
        }
        let tr = trace(&matrix)?;
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = *eig_hermitian(&matrix, STATE_TOL)?
            .eigenvalues
            .last()
            .expect("nonempty spectrum");
        if min < EIGENVALUE_FLOOR {
            return Err(Error::Positivity { eigenvalue: min });
        }
        Ok(Self { dims, matrix })
    }

    /// Symmetrizes an operator produced by a trace-preserving map before
    /// validating it.
    pub(crate) fn from_map_output(dims: Vec<usize>, matrix: &ComplexMatrix) -> Result<Self> {
        Self::new(dims, matrix.hermitian_part()?)
    }

    /// `|psi><psi|`
    pub fn from_ket(ket: &Ket) -> Self {
        let m = ComplexMatrix::outer(ket.amplitudes(), ket.amplitudes());
        Self {
            dims: ket.dims().to_vec(),
            matrix: m,
        }
    }

    /// `|v><v| / <v|v>` for an unnormalized vector. Exact for vectors whose
    /// squared norm and entry products are representable, such as small
    /// integer amplitudes.
    pub fn from_unnormalized(dims: Vec<usize>, v: &[Complex]) -> Result<Self> {
        check_dims(&dims, v.len())?;
        let norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr == 0.0 || !norm_sqr.is_finite() {
            return Err(Error::Normalization { norm_sqr });
        }
        let m = ComplexMatrix::outer(v, v).scale_real(1.0 / norm_sqr);
        Self::new(dims, m)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        check_dims(&dims, n)?;
        let m = ComplexMatrix::identity(n).scale_real(1.0 / n as f64);
        Ok(Self { dims, matrix: m })
    }

    /// `sum_i p_i rho_i`. Weights must be nonnegative and sum to 1 within
    /// [`MIXTURE_TOL`]; they are renormalized before mixing.
    pub fn mixture(parts: &[(f64, DensityOperator)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::Argument("empty mixture".into()))?;
        if let Some((p, _)) = parts.iter().find(|(p, _)| *p < 0.0 || !p.is_finite()) {
            return Err(Error::Argument(format!("invalid mixture weight {p}")));
        }
        if parts.iter().any(|(_, r)| r.dims != first.dims) {
            return Err(Error::Shape(
                "mixture components have different dims".into(),
            ));
        }
        let total: f64 = parts.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > MIXTURE_TOL {
            return Err(Error::Argument(format!("mixture weights sum to {total}")));
        }
        let n = first.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (p, r) in parts {
            m = &m + &r.matrix.scale_real(p / total);
        }
        Self::new(first.dims.clone(), m)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Eigenvalues, sorted descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eig_hermitian(&self.matrix, STATE_TOL)?.eigenvalues)
    }

    /// `tr(rho^2)`
    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum_ij |rho_ij|^2 for Hermitian rho
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<phi|rho|phi>` for a pure reference state.
    pub fn fidelity_with_pure(&self, phi: &Ket) -> Result<f64> {
        Ok(phi.expectation(&self.matrix)?.re)
    }

    /// Reduced state on the subsystems in `keep`, tracing out the rest.
    ///
    /// `keep` is a set: order and duplicates are ignored and the result
    /// lists kept subsystems in register order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::Argument(
                "partial trace needs at least one kept subsystem; use trace() for the full trace"
                    .into(),
            ));
        }
        let nsub = self.dims.len();
        if let Some(&bad) = keep.iter().find(|&&k| k >= nsub) {
            return Err(Error::Argument(format!(
                "subsystem {bad} out of range for {nsub} subsystems"
            )));
        }
        let mut kept = vec![false; nsub];
        for &k in keep {
            kept[k] = true;
        }

        // Big-endian strides: subsystem 0 is most significant.
        let mut strides = vec![1usize; nsub];
        for s in (0..nsub.saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * self.dims[s + 1];
        }
        let offsets = |select: bool| -> (Vec<usize>, Vec<usize>) {
            let subs: Vec<usize> = (0..nsub).filter(|&s| kept[s] == select).collect();
            let sub_dims: Vec<usize> = subs.iter().map(|&s| self.dims[s]).collect();
            let count: usize = sub_dims.iter().product();
            let mut offs = Vec::with_capacity(count);
            for idx in 0..count {
                let mut rem = idx;
                let mut off = 0;
                for (pos, &s) in subs.iter().enumerate().rev() {
                    let d = sub_dims[pos];
                    off += (rem % d) * strides[s];
                    rem /= d;
                }
                offs.push(off);
            }
            (offs, sub_dims)
        };
        let (keep_off, keep_dims) = offsets(true);
        let (trace_off, _) = offsets(false);

        let n = keep_off.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (i, &ri) in keep_off.iter().enumerate() {
            for (j, &rj) in keep_off.iter().enumerate() {
                out[(i, j)] = trace_off
                    .iter()
                    .map(|&t| self.matrix[(ri + t, rj + t)])
                    .sum();
            }
        }
        Self::from_map_output(keep_dims, &out)
    }
}
