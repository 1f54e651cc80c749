//! Quantum operations in Kraus form, the erasure channel, erasure by
//! measurement plus rotation, and the partial-trace / nonselective
//! measurement equivalence.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::measurement::{
    nonselective_update, outcome_distribution, subsystem_measurement, MeasurementSet, Observable,
    ZERO_PROBABILITY,
};
use crate::par::Execution;
use crate::random::{random_density_any_rank, random_unitary};
use crate::rng::{stream_seed, SplitMix64};
use crate::state::{DensityOperator, Ket};

/// Tolerance on `sum K^dagger K = I` for trace preservation.
pub const TRACE_PRESERVING_TOL: f64 = 1e-10;

/// `rho -> sum_k K_k rho K_k^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    elements: Vec<ComplexMatrix>,
    input_dim: usize,
    output_dim: usize,
    trace_preserving: bool,
}

impl KrausChannel {
    /// All elements must share one `output_dim x input_dim` shape.
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::Argument("channel has no Kraus elements".into()))?;
        let (output_dim, input_dim) = (first.rows(), first.cols());
        if elements
            .iter()
            .any(|k| k.rows() != output_dim || k.cols() != input_dim)
        {
            return Err(Error::Shape("Kraus elements must share one shape".into()));
        }
        let mut sum = ComplexMatrix::zeros(input_dim, input_dim);
        for k in &elements {
            sum = &sum + &(&k.adjoint() * k);
        }
        let trace_preserving =
            sum.max_abs_diff(&ComplexMatrix::identity(input_dim))? <= TRACE_PRESERVING_TOL;
        Ok(Self {
            elements,
            input_dim,
            output_dim,
            trace_preserving,
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("dimension must be positive".into()));
        }
        Self::new(vec![ComplexMatrix::identity(dim)])
    }

    /// The nonselective channel of a measurement set.
    pub fn from_measurement(ms: &MeasurementSet) -> Self {
        Self::new(ms.operators().to_vec()).expect("measurement operators share a shape")
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `sum K A K^dagger` on a raw operator.
    pub fn apply_operator(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.rows() != self.input_dim || a.cols() != self.input_dim {
            return Err(Error::Shape(format!(
                "channel expects dimension {}, got {}x{}",
                self.input_dim,
                a.rows(),
                a.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.output_dim, self.output_dim);
        for k in &self.elements {
            out = &out + &k.sandwich(a)?;
        }
        Ok(out)
    }

    /// Applies a trace-preserving channel. The register layout is kept
    /// when the channel is square, otherwise the output is one subsystem.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if !self.trace_preserving {
            return Err(Error::Argument(
                "channel is not trace preserving; use apply_operator".into(),
            ));
        }
        if rho.dim() != self.input_dim {
            return Err(Error::Shape(format!(
                "channel expects dimension {}, state has {}",
                self.input_dim,
                rho.dim()
            )));
        }
        let out = self.apply_operator(rho.matrix())?;
        let dims = if self.output_dim == self.input_dim {
            rho.dims().to_vec()
        } else {
            vec![self.output_dim]
        };
        DensityOperator::from_map_output(dims, &out)
    }
}

/// Erasure `R(rho) = sum_i |0><i| rho |i><0|`, which maps every state of
/// a `d`-level system to `|0><0|` of the same system.
pub fn erasure_channel(input_dim: usize) -> Result<KrausChannel> {
    if input_dim == 0 {
        return Err(Error::Argument("erasure needs a positive dimension".into()));
    }
    KrausChannel::new(
        (0..input_dim)
            .map(|i| ComplexMatrix::basis_op(input_dim, 0, i))
            .collect(),
    )
}

/// Record of one measure-then-rotate erasure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErasureTranscript {
    pub outcome: String,
    pub outcome_index: usize,
    pub probability: f64,
    /// `U|k>` is proportional to `|permutation[k]>` when the rotation is a
    /// permutation in the computational basis.
    pub permutation: Option<Vec<usize>>,
    #[serde(skip)]
    pub unitary: ComplexMatrix,
    pub seed: u64,
}

/// Picks an outcome index from `probabilities` with one uniform draw.
fn sample_outcome(probabilities: &[f64], seed: u64) -> usize {
    let u: f64 = SplitMix64::new(seed).random();
    let mut acc = 0.0;
    let mut last_possible = 0;
    for (k, &p) in probabilities.iter().enumerate() {
        if p <= ZERO_PROBABILITY {
            continue;
        }
        last_possible = k;
        acc += p;
        if u < acc {
            return k;
        }
    }
    last_possible
}

fn as_permutation(u: &ComplexMatrix) -> Option<Vec<usize>> {
    (0..u.cols())
        .map(|k| {
            let col = u.column(k);
            let hits: Vec<usize> = col
                .iter()
                .enumerate()
                .filter(|(_, z)| z.norm() > 1e-12)
                .map(|(i, _)| i)
                .collect();
            match hits.as_slice() {
                [i] if (col[*i].norm() - 1.0).abs() <= 1e-12 => Some(*i),
                _ => None,
            }
        })
        .collect()
}

/// Erases `rho` by a projective measurement in the eigenbasis of `basis`
/// followed by the unitary `U = P W^dagger`, where `W` holds the basis
/// vectors as columns and `P` swaps the measured index with 0.
///
/// For the computational basis `U` is the transposition `(j 0)`.
pub fn erase_via_measure_rotate(
    rho: &DensityOperator,
    basis: &Observable,
    seed: u64,
) -> Result<(DensityOperator, ErasureTranscript)> {
    if !basis.is_nondegenerate() {
        return Err(Error::Argument(
            "erasure by measurement needs a nondegenerate basis".into(),
        ));
    }
    let dist = outcome_distribution(&basis.measurement_set(), rho)?;
    let j = sample_outcome(&dist.probabilities(), seed);
    let outcome = &dist.entries[j];
    let post = outcome
        .post_state
        .as_ref()
        .expect("sampled outcomes have positive probability");

    let n = basis.dim();
    let mut frame_adjoint = ComplexMatrix::zeros(n, n);
    for (k, space) in basis.eigenspaces().iter().enumerate() {
        let target = if k == j {
            0
        } else if k == 0 {
            j
        } else {
            k
        };
        for (i, z) in space.vectors[0].iter().enumerate() {
            frame_adjoint[(target, i)] = z.conj();
        }
    }
    let unitary = frame_adjoint;
    let erased = unitary.sandwich(post.matrix())?;
    let erased = DensityOperator::from_map_output(rho.dims().to_vec(), &erased)?;
    let transcript = ErasureTranscript {
        outcome: outcome.label.clone(),
        outcome_index: j,
        probability: outcome.probability,
        permutation: as_permutation(&unitary),
        unitary,
        seed,
    };
    Ok((erased, transcript))
}

/// Outcome counts and worst fidelity with `|0><0|` over a batch of
/// independently seeded measure-rotate erasures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErasureTrials {
    pub trials: usize,
    pub counts: Vec<usize>,
    pub expected: Vec<f64>,
    pub min_fidelity: f64,
    pub max_off_target: f64,
}

impl ErasureTrials {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.trials as f64)
            .collect()
    }
}

/// Runs `trials` erasures; trial `i` uses `stream_seed(base_seed, i)`.
pub fn erasure_trials(
    rho: &DensityOperator,
    basis: &Observable,
    base_seed: u64,
    trials: usize,
    exec: Execution,
) -> Result<ErasureTrials> {
    let zero = Ket::basis(rho.dims().to_vec(), 0)?;
    let results = exec.map_indices(trials, |i| {
        let (erased, t) = erase_via_measure_rotate(rho, basis, stream_seed(base_seed, i as u64))?;
        let fidelity = erased.fidelity_with_pure(&zero)?;
        Ok((t.outcome_index, fidelity, max_off_origin(erased.matrix())))
    });
    let expected = outcome_distribution(&basis.measurement_set(), rho)?.probabilities();
    let mut counts = vec![0; basis.eigenspaces().len()];
    let mut min_fidelity = f64::INFINITY;
    let mut max_off_target = 0.0f64;
    for r in results {
        let (j, f, off) = r?;
        counts[j] += 1;
        min_fidelity = min_fidelity.min(f);
        max_off_target = max_off_target.max(off);
    }
    Ok(ErasureTrials {
        trials,
        counts,
        expected,
        min_fidelity,
        max_off_target,
    })
}

/// Both routes to the reduced state of the complement of `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Equivalence {
    pub via_trace: DensityOperator,
    pub via_measurement: DensityOperator,
    pub max_abs_diff: f64,
}

/// Compares tracing out `target` with measuring it nonselectively in
/// `basis` and then tracing it out.
pub fn trace_measurement_equivalence(
    rho_joint: &DensityOperator,
    target: usize,
    basis: &Observable,
) -> Result<Equivalence> {
    let dims = rho_joint.dims();
    if target >= dims.len() {
        return Err(Error::Argument(format!(
            "subsystem {target} out of range for {dims:?}"
        )));
    }
    if basis.dim() != dims[target] {
        return Err(Error::Shape(format!(
            "basis dimension {} does not match subsystem dimension {}",
            basis.dim(),
            dims[target]
        )));
    }
    let keep: Vec<usize> = (0..dims.len()).filter(|&s| s != target).collect();
    let via_trace = rho_joint.partial_trace(&keep)?;
    let lifted = subsystem_measurement(&basis.measurement_set(), target, dims)?;
    let via_measurement = nonselective_update(&lifted, rho_joint)?.partial_trace(&keep)?;
    let max_abs_diff = via_trace.matrix().max_abs_diff(via_measurement.matrix())?;
    Ok(Equivalence {
        via_trace,
        via_measurement,
        max_abs_diff,
    })
}

/// One randomized equivalence case: bipartite dims in `{2,3}^2`, a random
/// mixed state of random rank, a random target, and a random orthonormal
/// basis for it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceCase {
    pub dims: Vec<usize>,
    pub target: usize,
    pub max_abs_diff: f64,
}

pub fn equivalence_sweep(cases: usize, seed: u64, exec: Execution) -> Result<Vec<EquivalenceCase>> {
    exec.map_indices(cases, |i| {
        let mut rng = SplitMix64::new(stream_seed(seed, i as u64));
        let dims = vec![rng.random_range(2..=3), rng.random_range(2..=3)];
        let rho = random_density_any_rank(&dims, &mut rng);
        let target = rng.random_range(0..2);
        let d = dims[target];
        let basis = Observable::in_basis(
            &random_unitary(d, &mut rng),
            &(0..d).map(|k| k as f64).collect::<Vec<_>>(),
        )?;
        let eq = trace_measurement_equivalence(&rho, target, &basis)?;
        Ok(EquivalenceCase {
            dims,
            target,
            max_abs_diff: eq.max_abs_diff,
        })
    })
    .into_iter()
    .collect()
}

/// Largest modulus among entries other than `(0, 0)`.
pub fn max_off_origin(m: &ComplexMatrix) -> f64 {
    let mut off = 0.0f64;
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if (r, c) != (0, 0) {
                off = off.max(m[(r, c)].norm());
            }
        }
    }
    off
}
