//! Named, seeded demonstrations. Each scenario computes its payload with the
//! library operations and grades it with a list of checks.

use std::f64::consts::{LN_2, SQRT_2};

use rand::Rng;
use serde_json::{json, Value};

use crate::channel::{
    equivalence_sweep, erase_via_measure_rotate, erasure_channel, erasure_trials,
};
use crate::demon::{self, DemonConfig, GatePolicy, RunReport};
use crate::entropy::{
    entropy_gain_sweep, projective_entropy_gain, random_probabilities, von_neumann_entropy,
    BOLTZMANN, GAIN_TOL,
};
use crate::error::Result;
use crate::linalg::{c, eig_hermitian, Complex, ComplexMatrix, HERMITIAN_TOL};
use crate::measurement::{
    moment_stats, outcome_distribution, povm_to_measurement, three_element_povm, MeasurementSet,
    Observable, ZERO_PROBABILITY,
};
use crate::par::Execution;
use crate::random::random_density_any_rank;
use crate::report::{complex_json, density_json, matrix_json, vector_json, Check, ScenarioReport};
use crate::rng::{stream_seed, SplitMix64};
use crate::state::{DensityOperator, Ket};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scenario {
    GhzTrace,
    WTrace,
    PovmThree,
    Erasure,
    TraceEquivalence,
    EntropyGain,
    ConservationDemo,
    Demon,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::GhzTrace,
        Scenario::WTrace,
        Scenario::PovmThree,
        Scenario::Erasure,
        Scenario::TraceEquivalence,
        Scenario::EntropyGain,
        Scenario::ConservationDemo,
        Scenario::Demon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::GhzTrace => "ghz-trace",
            Scenario::WTrace => "w-trace",
            Scenario::PovmThree => "povm-three",
            Scenario::Erasure => "erasure",
            Scenario::TraceEquivalence => "trace-equivalence",
            Scenario::EntropyGain => "entropy-gain",
            Scenario::ConservationDemo => "conservation-demo",
            Scenario::Demon => "demon",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub seed: u64,
    /// Used by `demon`; its `seed` is overwritten by `seed` above.
    pub demon: DemonConfig,
    /// Keep every n-th step of the demon time series in the report (the
    /// last step is always kept).
    pub series_every: usize,
    pub ground_energy: f64,
    pub excited_energy: f64,
    pub erasure_trials: usize,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            seed: 0,
            demon: DemonConfig::default(),
            series_every: 100,
            ground_energy: 1.0,
            excited_energy: 3.0,
            erasure_trials: 10_000,
        }
    }
}

/// Scenarios run single-threaded so that a process uses one core.
const EXEC: Execution = Execution::Sequential;

pub fn run_scenario(scenario: Scenario, params: &ScenarioParams) -> Result<ScenarioReport> {
    match scenario {
        Scenario::GhzTrace => ghz_trace(params.seed),
        Scenario::WTrace => w_trace(params.seed),
        Scenario::PovmThree => povm_three(params.seed),
        Scenario::Erasure => erasure(params),
        Scenario::TraceEquivalence => trace_equivalence(params.seed),
        Scenario::EntropyGain => entropy_gain(params.seed),
        Scenario::ConservationDemo => conservation_demo(params),
        Scenario::Demon => demon_scenario(params).map(|(report, _)| report),
    }
}

fn spectrum_json(values: &[f64], vectors: &ComplexMatrix) -> Value {
    json!({ "eigenvalues": values, "eigenvectors": matrix_json(vectors) })
}

fn max_deviation(got: &[f64], want: &[f64]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn ghz_trace(seed: u64) -> Result<ScenarioReport> {
    let rho = DensityOperator::from_ket(&Ket::ghz());
    let reduced = rho.partial_trace(&[1, 2])?;
    let spec = eig_hermitian(reduced.matrix(), HERMITIAN_TOL)?;
    let expected = [0.5, 0.5, 0.0, 0.0];
    // weight of the support eigenvectors outside span{|00>, |11>}
    let leak = (0..spec.dim())
        .filter(|&k| spec.eigenvalues[k] > 1e-10)
        .map(|k| {
            let v = spec.eigenvector(k);
            1.0 - v[0].norm_sqr() - v[3].norm_sqr()
        })
        .fold(0.0, f64::max);
    let entropy = von_neumann_entropy(&reduced)?;
    Ok(ScenarioReport::new(
        Scenario::GhzTrace.name(),
        seed,
        json!({ "state": "(|000> + |111>)/sqrt2", "traced_out": [0] }),
        json!({
            "reduced_state": density_json(&reduced),
            "spectrum": spectrum_json(&spec.eigenvalues, &spec.eigenvectors),
            "entropy": entropy,
        }),
        vec![
            Check::at_most(
                "eigenvalues are 1/2, 1/2, 0, 0",
                max_deviation(&spec.eigenvalues, &expected),
                1e-10,
            ),
            Check::at_most("support eigenvectors lie in span{|00>,|11>}", leak, 1e-10),
            Check::close("entropy is 1 bit", entropy.bits, 1.0, 1e-10),
        ],
    ))
}

fn w_trace(seed: u64) -> Result<ScenarioReport> {
    let rho = DensityOperator::from_ket(&Ket::w());
    let reduced = rho.partial_trace(&[1, 2])?;
    let spec = eig_hermitian(reduced.matrix(), HERMITIAN_TOL)?;
    let expected = [2.0 / 3.0, 1.0 / 3.0, 0.0, 0.0];
    let top = spec.eigenvector(0);
    let overlap = ((top[1] + top[2]) / SQRT_2).norm();
    let entropy = von_neumann_entropy(&reduced)?;
    let binary = -(1.0 / 3.0f64) * (1.0 / 3.0f64).log2() - (2.0 / 3.0f64) * (2.0 / 3.0f64).log2();
    Ok(ScenarioReport::new(
        Scenario::WTrace.name(),
        seed,
        json!({ "state": "(|001> + |010> + |100>)/sqrt3", "traced_out": [0] }),
        json!({
            "reduced_state": density_json(&reduced),
            "spectrum": spectrum_json(&spec.eigenvalues, &spec.eigenvectors),
            "overlap_with_psi_plus": overlap,
            "entropy": entropy,
        }),
        vec![
            Check::at_most(
                "eigenvalues are 2/3, 1/3, 0, 0",
                max_deviation(&spec.eigenvalues, &expected),
                1e-10,
            ),
            Check::at_least_neg(
                "2/3-eigenvector overlaps (|01>+|10>)/sqrt2",
                overlap - (1.0 - 1e-9),
                0.0,
            ),
            Check::close("entropy is 0.91830 bits", entropy.bits, 0.91830, 1e-4),
            Check::close(
                "entropy matches binary entropy of 1/3",
                entropy.bits,
                binary,
                1e-10,
            ),
        ],
    ))
}

fn povm_three(seed: u64) -> Result<ScenarioReport> {
    let elements = three_element_povm();
    let weight = SQRT_2 / (1.0 + SQRT_2);
    let completeness =
        ComplexMatrix::sum(elements.iter())?.max_abs_diff(&ComplexMatrix::identity(2))?;
    let mut min_eigenvalues = Vec::new();
    for e in &elements {
        let s = eig_hermitian(e, HERMITIAN_TOL)?;
        min_eigenvalues.push(s.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let min_eig = min_eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let ms = povm_to_measurement(&elements)?;
    let probs = |k: &Ket| -> Result<Vec<f64>> {
        Ok(outcome_distribution(&ms, &DensityOperator::from_ket(k))?.probabilities())
    };
    let one = Ket::basis(vec![2], 1)?;
    let zero = Ket::basis(vec![2], 0)?;
    let plus = Ket::from_real(vec![2], &[1.0 / SQRT_2, 1.0 / SQRT_2])?;
    let (p_one, p_zero, p_plus) = (probs(&one)?, probs(&zero)?, probs(&plus)?);
    Ok(ScenarioReport::new(
        Scenario::PovmThree.name(),
        seed,
        json!({ "weight": weight }),
        json!({
            "elements": elements.iter().map(matrix_json).collect::<Vec<_>>(),
            "min_eigenvalues": min_eigenvalues,
            "completeness_deviation": completeness,
            "probabilities": { "one": p_one, "zero": p_zero, "plus": p_plus },
        }),
        vec![
            Check::at_most("elements sum to identity", completeness, 1e-12),
            Check::at_least_neg("elements are positive", min_eig, 1e-10),
            Check::close("p(E1 | |1>) is sqrt2/(1+sqrt2)", p_one[0], weight, 1e-12),
            Check::at_most("p(E2 | |1>) vanishes", p_one[1], ZERO_PROBABILITY),
            Check::close(
                "p(E2 | |1>) is <1|E2|1> = weight/2",
                p_one[1],
                weight / 2.0,
                1e-12,
            ),
            Check::at_most("E1 never fires on |0>", p_zero[0], ZERO_PROBABILITY),
            Check::at_most("E2 never fires on |+>", p_plus[1], ZERO_PROBABILITY),
        ],
    ))
}

fn erasure(params: &ScenarioParams) -> Result<ScenarioReport> {
    const INPUTS: usize = 100;
    let seed = params.seed;
    let channel = erasure_channel(3)?;
    let basis = Observable::computational(3)?;
    let zero = Ket::basis(vec![3], 0)?;
    let mut worst_channel = 0.0f64;
    let mut worst_rotate = 0.0f64;
    let mut worst_idempotence = 0.0f64;
    let mut worst_entropy = 0.0f64;
    for i in 0..INPUTS {
        let mut rng = SplitMix64::new(stream_seed(seed, i as u64));
        let rho = random_density_any_rank(&[3], &mut rng);
        let once = channel.apply(&rho)?;
        let twice = channel.apply(&once)?;
        let (rotated, _) = erase_via_measure_rotate(&rho, &basis, rng.random())?;
        worst_channel = worst_channel.max((1.0 - once.fidelity_with_pure(&zero)?).abs());
        worst_rotate = worst_rotate.max((1.0 - rotated.fidelity_with_pure(&zero)?).abs());
        worst_idempotence = worst_idempotence.max(once.matrix().max_abs_diff(twice.matrix())?);
        worst_entropy = worst_entropy.max(von_neumann_entropy(&once)?.bits.abs());
    }

    let mut rng = SplitMix64::new(stream_seed(seed, INPUTS as u64));
    let rho = random_density_any_rank(&[3], &mut rng);
    let trials = erasure_trials(&rho, &basis, rng.random(), params.erasure_trials, EXEC)?;
    let freqs = trials.frequencies();
    let freq_dev = max_deviation(&freqs, &trials.expected);
    let (_, transcript) = erase_via_measure_rotate(&rho, &basis, seed)?;
    Ok(ScenarioReport::new(
        Scenario::Erasure.name(),
        seed,
        json!({ "dim": 3, "random_inputs": INPUTS, "trials": params.erasure_trials }),
        json!({
            "kraus_elements": channel.elements().iter().map(matrix_json).collect::<Vec<_>>(),
            "max_fidelity_defect_channel": worst_channel,
            "max_fidelity_defect_measure_rotate": worst_rotate,
            "max_idempotence_defect": worst_idempotence,
            "max_entropy_after_erasure_bits": worst_entropy,
            "trial_state": density_json(&rho),
            "expected_probabilities": trials.expected,
            "frequencies": freqs,
            "counts": trials.counts,
            "example_transcript": transcript,
        }),
        vec![
            Check::at_most(
                "channel output has fidelity 1 with |0>",
                worst_channel,
                1e-12,
            ),
            Check::at_most(
                "measure-rotate output has fidelity 1 with |0>",
                worst_rotate,
                1e-12,
            ),
            Check::at_most(
                "measure-rotate outcome frequencies match Born probabilities",
                freq_dev,
                0.02,
            ),
            Check::at_most("erasure is idempotent", worst_idempotence, 1e-12),
            Check::at_most("erased state has zero entropy", worst_entropy, 1e-10),
        ],
    ))
}

fn trace_equivalence(seed: u64) -> Result<ScenarioReport> {
    const CASES: usize = 200;
    let cases = equivalence_sweep(CASES, seed, EXEC)?;
    let worst = cases.iter().map(|c| c.max_abs_diff).fold(0.0, f64::max);
    let mut by_dims = std::collections::BTreeMap::new();
    for case in &cases {
        *by_dims
            .entry(format!("{}x{}", case.dims[0], case.dims[1]))
            .or_insert(0usize) += 1;
    }
    Ok(ScenarioReport::new(
        Scenario::TraceEquivalence.name(),
        seed,
        json!({ "cases": CASES, "dims": "each factor in {2, 3}" }),
        json!({ "max_abs_diff": worst, "cases_by_dims": by_dims }),
        vec![Check::at_most(
            "tracing out equals measuring then tracing out",
            worst,
            1e-10,
        )],
    ))
}

fn entropy_gain(seed: u64) -> Result<ScenarioReport> {
    const CASES: usize = 300;
    let cases = entropy_gain_sweep(CASES, seed, EXEC)?;
    let min_gain = cases.iter().map(|c| c.gain).fold(f64::INFINITY, f64::min);

    let mut rng = SplitMix64::new(stream_seed(seed, CASES as u64));
    let weights = random_probabilities(3, &mut rng);
    let diagonal = DensityOperator::new(vec![3], ComplexMatrix::diag_real(&weights))?;
    let fixed = projective_entropy_gain(&diagonal, &MeasurementSet::computational(3)?)?;
    let fixed_shift = fixed.post_state.matrix().max_abs_diff(diagonal.matrix())?;

    let plus = DensityOperator::from_ket(&Ket::from_real(vec![2], &[1.0 / SQRT_2, 1.0 / SQRT_2])?);
    let plus_gain = projective_entropy_gain(&plus, &MeasurementSet::computational(2)?)?;
    Ok(ScenarioReport::new(
        Scenario::EntropyGain.name(),
        seed,
        json!({ "cases": CASES, "dim": 3 }),
        json!({
            "min_gain_bits": min_gain,
            "diagonal_state_weights": weights,
            "diagonal_state_gain_bits": fixed.gain,
            "plus_state_gain": { "before": plus_gain.before, "after": plus_gain.after, "gain_bits": plus_gain.gain },
        }),
        vec![
            Check::at_least_neg(
                "projective measurement never lowers entropy",
                min_gain,
                GAIN_TOL,
            ),
            Check::at_most("diagonal state: zero gain", fixed.gain.abs(), GAIN_TOL),
            Check::at_most(
                "diagonal state: unchanged by measurement",
                fixed_shift,
                1e-10,
            ),
            Check::close("|+> measured in Z gains 1 bit", plus_gain.gain, 1.0, 1e-10),
        ],
    ))
}

fn conservation_demo(params: &ScenarioParams) -> Result<ScenarioReport> {
    let (e0, e1) = (params.ground_energy, params.excited_energy);
    let photon = 0.5 * (e1 - e0);
    let hamiltonian = Observable::in_basis(&ComplexMatrix::identity(2), &[e0, e1])?;
    let superposed = DensityOperator::from_unnormalized(vec![2], &[c(1.0, 0.0), c(1.0, 0.0)])?;
    let stats = moment_stats(&hamiltonian, &superposed)?;
    let target = e0 + photon;
    let ground = DensityOperator::from_ket(&Ket::basis(vec![2], 0)?);
    let excited = DensityOperator::from_ket(&Ket::basis(vec![2], 1)?);
    let miss_ground = moment_stats(&hamiltonian, &ground)?.mean - target;
    let miss_excited = moment_stats(&hamiltonian, &excited)?.mean - target;
    let amplitude: Vec<Complex> = vec![c(1.0 / SQRT_2, 0.0); 2];
    Ok(ScenarioReport::new(
        Scenario::ConservationDemo.name(),
        params.seed,
        json!({ "ground_energy": e0, "excited_energy": e1 }),
        json!({
            "photon_energy": photon,
            "post_absorption_state": vector_json(&amplitude),
            "mean_energy": stats.mean,
            "energy_spread": stats.std_dev,
            "expected_mean": target,
            "ground_outcome_miss": miss_ground,
            "excited_outcome_miss": miss_excited,
            "coherence": complex_json(superposed.matrix()[(0, 1)]),
        }),
        vec![
            Check::close("superposition has <H> = E0 + dE", stats.mean, target, 0.0),
            Check::close("ground outcome misses by -dE", miss_ground, -photon, 0.0),
            Check::close("excited outcome misses by +dE", miss_excited, photon, 0.0),
        ],
    ))
}

/// Runs the demon scenario and also returns the full run for CSV export.
pub fn demon_scenario(params: &ScenarioParams) -> Result<(ScenarioReport, RunReport)> {
    let cfg = DemonConfig {
        seed: params.seed,
        ..params.demon.clone()
    };
    let run = demon::run(&cfg, EXEC)?;
    let every = params.series_every.max(1);
    let n = run.series.len();
    let series: Vec<_> = run
        .series
        .iter()
        .enumerate()
        .filter(|(i, _)| (i + 1) % every == 0 || i + 1 == n)
        .map(|(_, r)| r)
        .collect();
    let last = run.series.last();
    let bit = BOLTZMANN * LN_2;
    let jump_error = run
        .erasures
        .iter()
        .map(|e| (e.entropy_jump - cfg.memory_capacity_bits as f64 * bit).abs() / BOLTZMANN)
        .fold(0.0, f64::max);
    let min_step = run.min_total_step();

    let mut checks = vec![Check::at_least_neg(
        "ledger total never decreases (k_B per step)",
        min_step.unwrap_or(0.0),
        demon::SECOND_LAW_TOL,
    )];
    match last {
        None => {
            checks.push(Check::flag(
                "empty run has empty time series",
                series.is_empty(),
            ));
            checks.push(Check::at_most(
                "empty run leaves the ledger unchanged",
                run.delta.total.abs(),
                0.0,
            ));
        }
        Some(last) if cfg.effective_policy() == GatePolicy::SpeedSort => {
            let gap = last.temperature_b - last.temperature_a;
            checks.push(Check {
                name: "final T_B - T_A is positive".into(),
                passed: gap > 0.0,
                measured: gap,
                tolerance: 0.0,
            });
            checks.push(Check::flag(
                "at least one erasure occurred",
                !run.erasures.is_empty(),
            ));
            checks.push(Check::at_most(
                "erasure jump is capacity k_B ln2 (k_B)",
                jump_error,
                0.0,
            ));
        }
        Some(_) => {
            checks.push(Check::at_most(
                "closed gate: ledger unchanged (k_B)",
                run.delta.total.abs() / BOLTZMANN,
                0.0,
            ));
            checks.push(Check::flag(
                "closed gate: no measurements",
                run.total_measurements == 0,
            ));
        }
    }

    let report = ScenarioReport::new(
        Scenario::Demon.name(),
        params.seed,
        json!({ "config": &cfg, "series_every": every }),
        json!({
            "speed_threshold": run.threshold,
            "dt": run.dt,
            "gate_policy": cfg.effective_policy(),
            "heisenberg_floor": run.heisenberg_floor,
            "kick_momentum": run.kick_momentum,
            "initial_ledger": run.initial_ledger,
            "ledger_change": run.delta,
            "initial_temperature_a": run.initial_temperature_a,
            "initial_temperature_b": run.initial_temperature_b,
            "final_temperature_a": last.map(|r| r.temperature_a),
            "final_temperature_b": last.map(|r| r.temperature_b),
            "total_measurements": run.total_measurements,
            "erasure_count": run.erasures.len(),
            "erasures": run.erasures,
            "min_total_step_kb": min_step,
            "gas_entropy_decrease_steps": run.gas_entropy_decreases(),
            "series": series,
        }),
        checks,
    );
    Ok((report, run))
}
