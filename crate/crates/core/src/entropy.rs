//! Von Neumann and Shannon entropy, entropy change under projective
//! measurement, the Landauer bound, and basis-dependent coherence.

use std::f64::consts::LN_2;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Complex, ComplexMatrix};
use crate::measurement::{nonselective_update, MeasurementKind, MeasurementSet, Observable};
use crate::par::Execution;
use crate::random::{random_density_any_rank, random_unitary};
use crate::rng::{stream_seed, SplitMix64};
use crate::state::{DensityOperator, Ket, EIGENVALUE_FLOOR};

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;
/// Default amplitude threshold for counting support.
pub const WAVE_THRESHOLD: f64 = 1e-9;
/// Allowed entropy decrease from roundoff under projective measurement.
pub const GAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyValue {
    pub bits: f64,
    pub nats: f64,
}

impl EntropyValue {
    pub const ZERO: EntropyValue = EntropyValue {
        bits: 0.0,
        nats: 0.0,
    };

    pub fn from_nats(nats: f64) -> Self {
        Self {
            bits: nats / LN_2,
            nats,
        }
    }
}

/// `-sum x ln x` over a list of weights, with `0 ln 0 = 0`. Weights in
/// `[EIGENVALUE_FLOOR, 0)` count as zero.
fn entropy_of_weights(weights: &[f64]) -> Result<EntropyValue> {
    let mut nats = 0.0;
    for &w in weights {
        if w < EIGENVALUE_FLOOR {
            return Err(Error::Positivity { eigenvalue: w });
        }
        if w > 0.0 {
            nats -= w * w.ln();
        }
    }
    Ok(EntropyValue::from_nats(nats.max(0.0)))
}

/// `S(rho) = -sum lambda log lambda` over the spectrum of `rho`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<EntropyValue> {
    entropy_of_weights(&rho.eigenvalues()?)
}

/// `H(p) = -sum p log p`.
pub fn shannon_entropy(p: &[f64]) -> Result<EntropyValue> {
    if let Some(&bad) = p.iter().find(|&&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::Argument(format!("invalid probability {bad}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Argument(format!("probabilities sum to {total}")));
    }
    entropy_of_weights(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyGain {
    pub before: EntropyValue,
    pub after: EntropyValue,
    /// `after - before` in bits.
    pub gain: f64,
    pub post_state: DensityOperator,
}

/// Entropy before and after the nonselective projective measurement
/// `rho' = sum P_i rho P_i`.
pub fn projective_entropy_gain(
    rho: &DensityOperator,
    proj: &MeasurementSet,
) -> Result<EntropyGain> {
    if proj.kind() != MeasurementKind::Projective {
        return Err(Error::Argument(
            "entropy monotonicity only holds for projective measurements".into(),
        ));
    }
    let before = von_neumann_entropy(rho)?;
    let post_state = nonselective_update(proj, rho)?;
    let after = von_neumann_entropy(&post_state)?;
    Ok(EntropyGain {
        before,
        after,
        gain: after.bits - before.bits,
        post_state,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainCase {
    pub dim: usize,
    pub gain: f64,
}

/// Random qutrit states of random rank measured in random orthonormal bases.
pub fn entropy_gain_sweep(cases: usize, seed: u64, exec: Execution) -> Result<Vec<GainCase>> {
    exec.map_indices(cases, |i| {
        let mut rng = SplitMix64::new(stream_seed(seed, i as u64));
        let rho = random_density_any_rank(&[3], &mut rng);
        let basis = Observable::in_basis(&random_unitary(3, &mut rng), &[0.0, 1.0, 2.0])?;
        let g = projective_entropy_gain(&rho, &basis.measurement_set())?;
        Ok(GainCase {
            dim: 3,
            gain: g.gain,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveBehaviorReport {
    pub support_count: usize,
    pub has_wave_behavior: bool,
    pub l1_coherence: f64,
}

/// `sum_{i != j} |rho_ij|` of `B^dagger rho B`.
pub fn l1_coherence_in_basis(rho: &ComplexMatrix, basis: &ComplexMatrix) -> Result<f64> {
    if !basis.is_unitary(1e-10) {
        return Err(Error::Argument("basis is not unitary".into()));
    }
    let rotated = basis.adjoint().matmul(rho)?.matmul(basis)?;
    Ok(l1_coherence(&rotated))
}

pub fn l1_coherence(rho: &ComplexMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..rho.rows() {
        for j in 0..rho.cols() {
            if i != j {
                s += rho[(i, j)].norm();
            }
        }
    }
    s
}

/// Counts amplitudes of `k` in the columns of `basis` above `threshold`.
/// Two or more nonzero amplitudes means the state has wave behavior.
pub fn wave_behavior(k: &Ket, basis: &ComplexMatrix, threshold: f64) -> Result<WaveBehaviorReport> {
    if !basis.is_unitary(1e-10) {
        return Err(Error::Argument("basis is not unitary".into()));
    }
    let amps: Vec<Complex> = basis.adjoint().mul_vec(k.amplitudes())?;
    let support_count = amps.iter().filter(|a| a.norm() > threshold).count();
    let l1_coherence = l1_coherence(&ComplexMatrix::outer(&amps, &amps));
    Ok(WaveBehaviorReport {
        support_count,
        has_wave_behavior: support_count >= 2,
        l1_coherence,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LandauerCost {
    pub bits_erased: u64,
    pub temperature: f64,
    /// `bits * k_B * T * ln 2`, joules.
    pub min_heat: f64,
}

pub fn landauer_cost(bits: u64, temperature: f64) -> Result<LandauerCost> {
    if temperature <= 0.0 || !temperature.is_finite() {
        return Err(Error::Argument(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    Ok(LandauerCost {
        bits_erased: bits,
        temperature,
        min_heat: bits as f64 * BOLTZMANN * temperature * LN_2,
    })
}

/// A uniformly random probability vector, for tests and sweeps.
pub fn random_probabilities<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}
