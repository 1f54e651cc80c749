//! Measurement sets, projective measurements of observables, POVMs, and
//! the selective and nonselective measurement updates.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{c, eig_hermitian, kron_all, trace, Complex, ComplexMatrix, Spectrum};
use crate::state::{DensityOperator, Ket};

/// Completeness and projector-algebra tolerance.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Probabilities at or below this are treated as outcomes that never occur.
pub const ZERO_PROBABILITY: f64 = 1e-12;
/// Relative gap below which eigenvalues share an eigenspace.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Most negative POVM-element eigenvalue clamped to zero before the square root.
pub const POVM_EIGENVALUE_FLOOR: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementKind {
    Projective,
    PovmDerived,
    General,
}

/// Labeled measurement operators `{M_m}` with `sum M_m^dagger M_m = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    labels: Vec<String>,
    operators: Vec<ComplexMatrix>,
    kind: MeasurementKind,
}

impl MeasurementSet {
    pub fn new(
        labels: Vec<String>,
        operators: Vec<ComplexMatrix>,
        kind: MeasurementKind,
    ) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::Argument("measurement set has no operators".into()))?;
        if labels.len() != operators.len() {
            return Err(Error::Argument(format!(
                "{} labels for {} operators",
                labels.len(),
                operators.len()
            )));
        }
        let n = first.rows();
        if operators.iter().any(|m| m.rows() != n || m.cols() != n) {
            return Err(Error::Shape(
                "measurement operators must share one square shape".into(),
            ));
        }
        let set = Self {
            labels,
            operators,
            kind,
        };
        let deviation = set.completeness_deviation();
        if deviation > COMPLETENESS_TOL {
            return Err(Error::Completeness { deviation });
        }
        if kind == MeasurementKind::Projective {
            set.check_projective()?;
        }
        Ok(set)
    }

    fn check_projective(&self) -> Result<()> {
        for (i, p) in self.operators.iter().enumerate() {
            if !p.is_hermitian(COMPLETENESS_TOL) {
                return Err(Error::Argument(format!(
                    "projector {} is not Hermitian",
                    self.labels[i]
                )));
            }
            if (p * p).max_abs_diff(p)? > COMPLETENESS_TOL {
                return Err(Error::Argument(format!(
                    "projector {} is not idempotent",
                    self.labels[i]
                )));
            }
            for q in &self.operators[i + 1..] {
                if (p * q).max_abs() > COMPLETENESS_TOL {
                    return Err(Error::Argument(
                        "projectors are not mutually orthogonal".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Z-basis projectors `|i><i|`, labeled by `i`.
    pub fn computational(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("dimension must be positive".into()));
        }
        Self::new(
            (0..dim).map(|i| i.to_string()).collect(),
            (0..dim)
                .map(|i| ComplexMatrix::basis_op(dim, i, i))
                .collect(),
            MeasurementKind::Projective,
        )
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn from_orthonormal_basis(basis: &ComplexMatrix) -> Result<Self> {
        if !basis.is_unitary(COMPLETENESS_TOL) {
            return Err(Error::Argument("basis is not orthonormal".into()));
        }
        let ops = (0..basis.cols())
            .map(|k| {
                let v = basis.column(k);
                ComplexMatrix::outer(&v, &v)
            })
            .collect();
        Self::new(
            (0..basis.cols()).map(|i| i.to_string()).collect(),
            ops,
            MeasurementKind::Projective,
        )
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn kind(&self) -> MeasurementKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `max |sum M^dagger M - I|`
    pub fn completeness_deviation(&self) -> f64 {
        let n = self.dim();
        let mut sum = ComplexMatrix::zeros(n, n);
        for m in &self.operators {
            sum = &sum + &(&m.adjoint() * m);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(n))
            .expect("square operators")
    }

    fn check_dim(&self, rho: &DensityOperator) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "measurement acts on dimension {}, state has dimension {}",
                self.dim(),
                rho.dim()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub value: f64,
    pub label: String,
    pub projector: ComplexMatrix,
    /// Orthonormal basis of the eigenspace.
    pub vectors: Vec<Vec<Complex>>,
}

impl Eigenspace {
    pub fn rank(&self) -> usize {
        self.vectors.len()
    }
}

/// A Hermitian operator with its spectral projectors `M = sum_m m P_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
    spectrum: Spectrum,
    eigenspaces: Vec<Eigenspace>,
}

impl Observable {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Eigenspaces: descending eigenvalue order when built by
    /// [`projective_from_observable`], basis order when built by [`Observable::in_basis`].
    pub fn eigenspaces(&self) -> &[Eigenspace] {
        &self.eigenspaces
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.eigenspaces.iter().all(|e| e.rank() == 1)
    }

    pub fn measurement_set(&self) -> MeasurementSet {
        MeasurementSet {
            labels: self.eigenspaces.iter().map(|e| e.label.clone()).collect(),
            operators: self
                .eigenspaces
                .iter()
                .map(|e| e.projector.clone())
                .collect(),
            kind: MeasurementKind::Projective,
        }
    }

    /// `sum_m m P_m`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        self.eigenspaces
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, e| {
                &acc + &e.projector.scale_real(e.value)
            })
    }

    /// Pauli Z.
    pub fn pauli_z() -> Self {
        projective_from_observable(
            &ComplexMatrix::diag_real(&[1.0, -1.0]),
            crate::linalg::HERMITIAN_TOL,
        )
        .expect("Pauli Z is Hermitian")
    }

    /// `diag(0, 1, ..., d-1)`, with eigenspaces in basis order `|0>, |1>, ...`.
    pub fn computational(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("dimension must be positive".into()));
        }
        let values: Vec<f64> = (0..dim).map(|i| i as f64).collect();
        Self::in_basis(&ComplexMatrix::identity(dim), &values)
    }

    /// `U diag(values) U^dagger` for a unitary `U`. Eigenspaces follow the
    /// column order of `basis`; equal values share one eigenspace.
    pub fn in_basis(basis: &ComplexMatrix, values: &[f64]) -> Result<Self> {
        if !basis.is_unitary(COMPLETENESS_TOL) {
            return Err(Error::Argument("basis is not orthonormal".into()));
        }
        let n = basis.cols();
        if values.len() != n {
            return Err(Error::Shape("one value per basis vector required".into()));
        }
        let mut eigenspaces: Vec<Eigenspace> = Vec::new();
        for (k, &value) in values.iter().enumerate() {
            let v = basis.column(k);
            let p = ComplexMatrix::outer(&v, &v);
            match eigenspaces.iter_mut().find(|e| e.value == value) {
                Some(e) => {
                    e.projector = &e.projector + &p;
                    e.vectors.push(v);
                }
                None => eigenspaces.push(Eigenspace {
                    value,
                    label: eigenvalue_label(value),
                    projector: p,
                    vectors: vec![v],
                }),
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
        let mut eigenvectors = ComplexMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..n {
                eigenvectors[(i, dst)] = basis[(i, src)];
            }
        }
        let spectrum = Spectrum {
            eigenvalues: order.iter().map(|&k| values[k]).collect(),
            eigenvectors,
        };
        let matrix = spectrum.reconstruct().hermitian_part()?;
        Ok(Observable {
            matrix,
            spectrum,
            eigenspaces,
        })
    }
}

fn eigenvalue_label(value: f64) -> String {
    let s = format!("{value:.12}");
    if s.trim_start_matches('-')
        .chars()
        .all(|ch| ch == '0' || ch == '.')
    {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// Builds the spectral projectors of a Hermitian operator, merging
/// eigenvalues closer than `DEGENERACY_TOL * max(1, |lambda|)`.
pub fn projective_from_observable(m: &ComplexMatrix, tol: f64) -> Result<Observable> {
    let spectrum = eig_hermitian(m, tol)?;
    let n = spectrum.dim();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        let lambda = spectrum.eigenvalues[k];
        match groups.last_mut() {
            Some(g)
                if (spectrum.eigenvalues[g[0]] - lambda).abs()
                    <= DEGENERACY_TOL * lambda.abs().max(1.0) =>
            {
                g.push(k)
            }
            _ => groups.push(vec![k]),
        }
    }
    let eigenspaces = groups
        .into_iter()
        .map(|g| {
            let value = g.iter().map(|&k| spectrum.eigenvalues[k]).sum::<f64>() / g.len() as f64;
            let vectors: Vec<_> = g.iter().map(|&k| spectrum.eigenvector(k)).collect();
            let projector = vectors.iter().fold(ComplexMatrix::zeros(n, n), |acc, v| {
                &acc + &ComplexMatrix::outer(v, v)
            });
            Eigenspace {
                value,
                label: eigenvalue_label(value),
                projector,
                vectors,
            }
        })
        .collect();
    Ok(Observable {
        matrix: m.clone(),
        spectrum,
        eigenspaces,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub probability: f64,
    /// `None` when the outcome has probability at most [`ZERO_PROBABILITY`]
    /// and the post-measurement state is undefined.
    pub post_state: Option<DensityOperator>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub entries: Vec<Outcome>,
}

impl OutcomeDistribution {
    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.probability).collect()
    }

    pub fn get(&self, label: &str) -> Option<&Outcome> {
        self.entries.iter().find(|e| e.label == label)
    }
}

/// `p(m) = tr(M_m rho M_m^dagger)` and the post-measurement states
/// `M_m rho M_m^dagger / p(m)`.
pub fn outcome_distribution(
    ms: &MeasurementSet,
    rho: &DensityOperator,
) -> Result<OutcomeDistribution> {
    ms.check_dim(rho)?;
    let mut entries = Vec::with_capacity(ms.len());
    for (label, m) in ms.labels.iter().zip(&ms.operators) {
        let unnormalized = m.sandwich(rho.matrix())?;
        let raw = trace(&unnormalized)?.re;
        let probability = clamp_probability(raw)?;
        let post_state = if probability > ZERO_PROBABILITY {
            Some(DensityOperator::from_map_output(
                rho.dims().to_vec(),
                &unnormalized.scale_real(1.0 / raw),
            )?)
        } else {
            None
        };
        entries.push(Outcome {
            label: label.clone(),
            probability,
            post_state,
        });
    }
    let total: f64 = entries.iter().map(|e| e.probability).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Completeness {
            deviation: (total - 1.0).abs(),
        });
    }
    Ok(OutcomeDistribution { entries })
}

fn clamp_probability(p: f64) -> Result<f64> {
    if !(-ZERO_PROBABILITY..=1.0 + ZERO_PROBABILITY).contains(&p) {
        return Err(Error::InvalidState(format!(
            "outcome probability {p} out of range"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `<psi| M_m^dagger M_m |psi>` computed on the state vector.
pub fn ket_probabilities(ms: &MeasurementSet, psi: &Ket) -> Result<Vec<f64>> {
    if psi.dim() != ms.dim() {
        return Err(Error::Shape("measurement and ket dimensions differ".into()));
    }
    ms.operators
        .iter()
        .map(|m| {
            let v = m.mul_vec(psi.amplitudes())?;
            Ok(v.iter().map(|z| z.norm_sqr()).sum())
        })
        .collect()
}

/// `sum_m M_m rho M_m^dagger`: measure and discard the outcome.
pub fn nonselective_update(ms: &MeasurementSet, rho: &DensityOperator) -> Result<DensityOperator> {
    ms.check_dim(rho)?;
    let n = rho.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for m in &ms.operators {
        out = &out + &m.sandwich(rho.matrix())?;
    }
    DensityOperator::from_map_output(rho.dims().to_vec(), &out)
}

/// Lifts `{M_m}` on subsystem `target` to `I x ... x M_m x ... x I`.
pub fn subsystem_measurement(
    ms: &MeasurementSet,
    target: usize,
    dims: &[usize],
) -> Result<MeasurementSet> {
    let &d = dims
        .get(target)
        .ok_or_else(|| Error::Argument(format!("subsystem {target} out of range for {dims:?}")))?;
    if d != ms.dim() {
        return Err(Error::Shape(format!(
            "measurement dimension {} does not match subsystem dimension {d}",
            ms.dim()
        )));
    }
    let identities: Vec<ComplexMatrix> = dims.iter().map(|&d| ComplexMatrix::identity(d)).collect();
    let operators = ms
        .operators
        .iter()
        .map(|m| {
            kron_all(
                identities
                    .iter()
                    .enumerate()
                    .map(|(s, id)| if s == target { m } else { id }),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementSet {
        labels: ms.labels.clone(),
        operators,
        kind: ms.kind,
    })
}

/// Lifts POVM elements to measurement operators `M_m = sqrt(E_m)`.
pub fn povm_to_measurement(elements: &[ComplexMatrix]) -> Result<MeasurementSet> {
    let first = elements
        .first()
        .ok_or_else(|| Error::Argument("POVM has no elements".into()))?;
    let n = first.rows();
    let mut sum = ComplexMatrix::zeros(n, n);
    let mut roots = Vec::with_capacity(elements.len());
    for e in elements {
        if e.rows() != n || e.cols() != n {
            return Err(Error::Shape(
                "POVM elements must share one square shape".into(),
            ));
        }
        let spectrum = eig_hermitian(e, COMPLETENESS_TOL)?;
        let min = *spectrum.eigenvalues.last().expect("nonempty");
        if min < POVM_EIGENVALUE_FLOOR {
            return Err(Error::Positivity { eigenvalue: min });
        }
        roots.push(spectrum.apply_fn(|x| x.max(0.0).sqrt()));
        sum = &sum + e;
    }
    let deviation = sum.max_abs_diff(&ComplexMatrix::identity(n))?;
    if deviation > COMPLETENESS_TOL {
        return Err(Error::Completeness { deviation });
    }
    MeasurementSet::new(
        (1..=elements.len()).map(|i| format!("E{i}")).collect(),
        roots,
        MeasurementKind::PovmDerived,
    )
}

/// The qubit POVM `E1 = c|1><1|`, `E2 = c|-><-|`, `E3 = I - E1 - E2` with
/// `c = sqrt(2) / (1 + sqrt(2))`.
pub fn three_element_povm() -> [ComplexMatrix; 3] {
    let weight = SQRT_2 / (1.0 + SQRT_2);
    let e1 = ComplexMatrix::basis_op(2, 1, 1).scale_real(weight);
    let minus = [c(1.0, 0.0), c(-1.0, 0.0)];
    let e2 = ComplexMatrix::outer(&minus, &minus).scale_real(weight / 2.0);
    let e3 = &(&ComplexMatrix::identity(2) - &e1) - &e2;
    [e1, e2, e3]
}

/// Mean and spread of an observable.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MomentStats {
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
}

/// `<M> = tr(M rho)`, `Var = <M^2> - <M>^2`.
pub fn moment_stats(obs: &Observable, rho: &DensityOperator) -> Result<MomentStats> {
    if obs.dim() != rho.dim() {
        return Err(Error::Shape(
            "observable and state dimensions differ".into(),
        ));
    }
    let m_rho = obs.matrix().matmul(rho.matrix())?;
    let mean = trace(&m_rho)?.re;
    let second = trace(&obs.matrix().matmul(&m_rho)?)?.re;
    let raw = second - mean * mean;
    if raw < -1e-12 {
        return Err(Error::InvalidState(format!("negative variance {raw}")));
    }
    let variance = raw.max(0.0);
    Ok(MomentStats {
        mean,
        variance,
        std_dev: variance.sqrt(),
    })
}

/// `sum_m m p(m)` over the observable's eigenspaces.
pub fn spectral_mean(obs: &Observable, rho: &DensityOperator) -> Result<f64> {
    let dist = outcome_distribution(&obs.measurement_set(), rho)?;
    Ok(obs
        .eigenspaces()
        .iter()
        .zip(&dist.entries)
        .map(|(e, o)| e.value * o.probability)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{HERMITIAN_TOL, ONE};
    use crate::random::{random_density, random_hermitian};
    use crate::rng::SplitMix64;

    fn plus() -> DensityOperator {
        DensityOperator::from_unnormalized(vec![2], &[ONE, ONE]).unwrap()
    }

    fn ket1() -> DensityOperator {
        DensityOperator::from_ket(&Ket::basis(vec![2], 1).unwrap())
    }

    #[test]
    fn z_measurement_on_plus() {
        let ms = MeasurementSet::computational(2).unwrap();
        let dist = outcome_distribution(&ms, &plus()).unwrap();
        for (k, e) in dist.entries.iter().enumerate() {
            assert!((e.probability - 0.5).abs() < 1e-15);
            let post = e.post_state.as_ref().unwrap();
            assert!(
                post.matrix()
                    .max_abs_diff(&ComplexMatrix::basis_op(2, k, k))
                    .unwrap()
                    < 1e-15
            );
        }
    }

    #[test]
    fn three_element_povm_on_one() {
        // <1|E_i|1> by hand: c, c/2, 1 - 3c/2
        let weight = SQRT_2 / (1.0 + SQRT_2);
        let ms = povm_to_measurement(&three_element_povm()).unwrap();
        let p = outcome_distribution(&ms, &ket1()).unwrap().probabilities();
        assert!((p[0] - weight).abs() < 1e-12);
        assert!((p[0] - 0.585_786_437_626_905).abs() < 1e-12);
        assert!((p[1] - weight / 2.0).abs() < 1e-12);
        assert!((p[2] - (1.0 - 1.5 * weight)).abs() < 1e-12);
    }

    #[test]
    fn three_element_povm_never_misfires() {
        let ms = povm_to_measurement(&three_element_povm()).unwrap();
        let zero = DensityOperator::from_ket(&Ket::basis(vec![2], 0).unwrap());
        let on_zero = outcome_distribution(&ms, &zero).unwrap();
        assert!(on_zero.entries[0].probability <= ZERO_PROBABILITY);
        assert!(on_zero.entries[0].post_state.is_none());
        let on_plus = outcome_distribution(&ms, &plus()).unwrap();
        assert!(on_plus.entries[1].probability <= ZERO_PROBABILITY);
    }

    #[test]
    fn povm_elements_are_complete_and_positive() {
        let es = three_element_povm();
        let sum = ComplexMatrix::sum(es.iter()).unwrap();
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(2)).unwrap() <= 1e-12);
        for e in &es {
            let s = eig_hermitian(e, HERMITIAN_TOL).unwrap();
            assert!(s.eigenvalues.iter().all(|&l| l >= -1e-10));
        }
    }

    #[test]
    fn povm_trivial_cases() {
        let single = povm_to_measurement(&[ComplexMatrix::identity(2)]).unwrap();
        assert!(
            single.operators()[0]
                .max_abs_diff(&ComplexMatrix::identity(2))
                .unwrap()
                < 1e-15
        );

        let half = ComplexMatrix::identity(2).scale_real(0.5);
        let halves = povm_to_measurement(&[half.clone(), half]).unwrap();
        let root = ComplexMatrix::identity(2).scale_real(std::f64::consts::FRAC_1_SQRT_2);
        for m in halves.operators() {
            assert!(m.max_abs_diff(&root).unwrap() < 1e-15);
        }
        let mut rng = SplitMix64::new(2);
        let rho = random_density(&[2], &mut rng);
        for p in outcome_distribution(&halves, &rho).unwrap().probabilities() {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn povm_errors() {
        let neg = ComplexMatrix::diag_real(&[1.5, 1.0]);
        let comp = ComplexMatrix::diag_real(&[-0.5, 0.0]);
        assert!(matches!(
            povm_to_measurement(&[neg, comp]),
            Err(Error::Positivity { .. })
        ));
        let short = ComplexMatrix::diag_real(&[0.5, 0.5]);
        assert!(matches!(
            povm_to_measurement(&[short]),
            Err(Error::Completeness { .. })
        ));
    }

    #[test]
    fn nonselective_examples() {
        let ms = MeasurementSet::computational(2).unwrap();
        let mixed = nonselective_update(&ms, &plus()).unwrap();
        assert!(
            mixed
                .matrix()
                .max_abs_diff(&ComplexMatrix::diag_real(&[0.5, 0.5]))
                .unwrap()
                < 1e-15
        );
        let zero = DensityOperator::from_ket(&Ket::basis(vec![2], 0).unwrap());
        assert_eq!(nonselective_update(&ms, &zero).unwrap(), zero);

        let mut rng = SplitMix64::new(9);
        let rho = random_density(&[2], &mut rng);
        let out = nonselective_update(&ms, &rho).unwrap();
        let mut expected = ComplexMatrix::zeros(2, 2);
        expected[(0, 0)] = rho.matrix()[(0, 0)];
        expected[(1, 1)] = rho.matrix()[(1, 1)];
        assert!(out.matrix().max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn observable_projectors() {
        let z = Observable::pauli_z();
        let spaces = z.eigenspaces();
        assert_eq!(spaces.len(), 2);
        assert_eq!(spaces[0].value, 1.0);
        assert_eq!(spaces[1].value, -1.0);
        assert_eq!(spaces[0].label, "1.000000000000");
        assert_eq!(spaces[0].projector, ComplexMatrix::basis_op(2, 0, 0));
        assert_eq!(spaces[1].projector, ComplexMatrix::basis_op(2, 1, 1));

        let degenerate =
            projective_from_observable(&ComplexMatrix::diag_real(&[2.0, 2.0, 5.0]), HERMITIAN_TOL)
                .unwrap();
        let ranks: Vec<(f64, usize)> = degenerate
            .eigenspaces()
            .iter()
            .map(|e| (e.value, e.rank()))
            .collect();
        assert_eq!(ranks, vec![(5.0, 1), (2.0, 2)]);
        assert!(!degenerate.is_nondegenerate());
    }

    #[test]
    fn observable_reconstructs_random_hermitian() {
        let mut rng = SplitMix64::new(17);
        let h = random_hermitian(4, &mut rng);
        let obs = projective_from_observable(&h, HERMITIAN_TOL).unwrap();
        assert!(obs.reconstruct().max_abs_diff(&h).unwrap() <= 1e-9);
        let ms = obs.measurement_set();
        assert!(MeasurementSet::new(
            ms.labels().to_vec(),
            ms.operators().to_vec(),
            MeasurementKind::Projective
        )
        .is_ok());
    }

    #[test]
    fn lifted_measurements() {
        let z = MeasurementSet::computational(2).unwrap();
        let lifted = subsystem_measurement(&z, 1, &[2, 2]).unwrap();
        let id = ComplexMatrix::identity(2);
        for (k, op) in lifted.operators().iter().enumerate() {
            let expected = crate::linalg::kron(&id, &ComplexMatrix::basis_op(2, k, k)).unwrap();
            assert_eq!(op, &expected);
        }
        let three = subsystem_measurement(&z, 2, &[2, 2, 2]).unwrap();
        assert!(three.completeness_deviation() <= 1e-12);
        assert!(matches!(
            subsystem_measurement(&z, 3, &[2, 2, 2]),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            subsystem_measurement(&z, 0, &[3, 2]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn lifted_z_on_ghz_then_trace() {
        let ghz = DensityOperator::from_ket(&Ket::ghz());
        let lifted =
            subsystem_measurement(&MeasurementSet::computational(2).unwrap(), 0, &[2, 2, 2])
                .unwrap();
        let reduced = nonselective_update(&lifted, &ghz)
            .unwrap()
            .partial_trace(&[1, 2])
            .unwrap();
        let expected = ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5]);
        assert!(reduced.matrix().max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn moments() {
        let z = Observable::pauli_z();
        let zero = DensityOperator::from_ket(&Ket::basis(vec![2], 0).unwrap());
        let s = moment_stats(&z, &zero).unwrap();
        assert_eq!((s.mean, s.std_dev), (1.0, 0.0));
        let s = moment_stats(&z, &plus()).unwrap();
        assert!(s.mean.abs() < 1e-15 && (s.variance - 1.0).abs() < 1e-15);
        let s = moment_stats(&z, &DensityOperator::maximally_mixed(vec![2]).unwrap()).unwrap();
        assert_eq!((s.mean, s.variance), (0.0, 1.0));
    }

    #[test]
    fn shape_errors() {
        let ms = MeasurementSet::computational(3).unwrap();
        assert!(matches!(
            outcome_distribution(&ms, &plus()),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            nonselective_update(&ms, &plus()),
            Err(Error::Shape(_))
        ));
        let z3 = Observable::computational(3).unwrap();
        assert!(matches!(moment_stats(&z3, &plus()), Err(Error::Shape(_))));
    }

    #[test]
    fn incomplete_or_nonorthogonal_sets_rejected() {
        let p0 = ComplexMatrix::basis_op(2, 0, 0);
        assert!(matches!(
            MeasurementSet::new(vec!["0".into()], vec![p0.clone()], MeasurementKind::General),
            Err(Error::Completeness { .. })
        ));
        let half = ComplexMatrix::identity(2).scale_real(std::f64::consts::FRAC_1_SQRT_2);
        assert!(MeasurementSet::new(
            vec!["a".into(), "b".into()],
            vec![half.clone(), half.clone()],
            MeasurementKind::Projective
        )
        .is_err());
        assert!(MeasurementSet::new(
            vec!["a".into(), "b".into()],
            vec![half.clone(), half],
            MeasurementKind::General
        )
        .is_ok());
    }
}
