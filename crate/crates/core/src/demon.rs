//! One-dimensional Maxwell-demon simulation with an entropy ledger.
//!
//! Two chambers `A = [0, L)` and `B = [L, 2L]` are separated by a gate at
//! `x = L`. Molecules move ballistically and reflect elastically off the
//! outer walls. Whenever a molecule reaches the gate the demon measures its
//! speed class (one bit stored in memory), kicks its momentum by `hbar/L`
//! with a random sign, and lets it through only if it is fast and moving
//! A to B, or slow and moving B to A. A full memory is erased all at once,
//! dumping `k_B ln 2` of entropy per bit into the environment.
//!
//! Ledger components, all in J/K:
//!
//! * gas: `N k_B (ln(l / (N lambda_th)) + 3/2)` per chamber, with the
//!   temperature estimated from the chamber's mean `m v^2`;
//! * memory: `k_B ln 2` per stored bit;
//! * environment: accumulated erasure heat over the environment temperature.

use std::f64::consts::{LN_2, PI};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::entropy::BOLTZMANN;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::rng::{mix64, stream_seed, SplitMix64};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Mass of an N2 molecule, kg.
pub const NITROGEN_MASS: f64 = 4.651_8e-26;
/// Largest per-step ledger decrease, in units of `k_B`, tolerated as roundoff.
pub const SECOND_LAW_TOL: f64 = 1e-12;

const KICK_STREAM: u64 = 0x6b69_636b;
const MAX_ENCOUNTERS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chamber {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Molecule {
    pub position: f64,
    pub velocity: f64,
    pub chamber: Chamber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasState {
    pub molecules: Vec<Molecule>,
    /// Length of one chamber, m.
    pub box_length: f64,
    pub mass: f64,
    /// Whether the gate let the last molecule that reached it through.
    pub gate_open: bool,
}

impl GasState {
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass
            * self
                .molecules
                .iter()
                .map(|m| m.velocity * m.velocity)
                .sum::<f64>()
    }

    pub fn population(&self, chamber: Chamber) -> usize {
        self.molecules
            .iter()
            .filter(|m| m.chamber == chamber)
            .count()
    }

    /// `m <v^2> / k_B` over one chamber; zero for an empty chamber.
    pub fn temperature(&self, chamber: Chamber) -> f64 {
        let (n, sum_sq) = self.chamber_moments(chamber);
        if n == 0 {
            0.0
        } else {
            self.mass * sum_sq / (n as f64 * BOLTZMANN)
        }
    }

    fn chamber_moments(&self, chamber: Chamber) -> (usize, f64) {
        self.molecules
            .iter()
            .filter(|m| m.chamber == chamber)
            .fold((0, 0.0), |(n, s), m| (n + 1, s + m.velocity * m.velocity))
    }

    /// Sum of the two chambers' ideal-gas entropies, J/K.
    pub fn entropy(&self) -> f64 {
        [Chamber::A, Chamber::B]
            .into_iter()
            .map(|c| {
                let (n, sum_sq) = self.chamber_moments(c);
                ideal_gas_entropy(n, sum_sq, self.box_length, self.mass)
            })
            .sum()
    }

    /// Positions within their chamber (the gate point `L` belongs to both).
    pub fn is_consistent(&self) -> bool {
        let l = self.box_length;
        self.molecules.iter().all(|m| match m.chamber {
            Chamber::A => (0.0..=l).contains(&m.position),
            Chamber::B => (l..=2.0 * l).contains(&m.position),
        })
    }
}

/// One-dimensional ideal-gas entropy of `n` molecules with `sum v^2 =
/// sum_sq` in a box of length `length`.
pub fn ideal_gas_entropy(n: usize, sum_sq: f64, length: f64, mass: f64) -> f64 {
    if n == 0 || sum_sq <= 0.0 {
        return 0.0;
    }
    let n_f = n as f64;
    let temperature = mass * sum_sq / (n_f * BOLTZMANN);
    let lambda = PLANCK / (2.0 * PI * mass * BOLTZMANN * temperature).sqrt();
    n_f * BOLTZMANN * ((length / (n_f * lambda)).ln() + 1.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedClass {
    Fast,
    Slow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemonMemory {
    pub capacity_bits: usize,
    pub records: Vec<SpeedClass>,
}

impl DemonMemory {
    pub fn new(capacity_bits: usize) -> Self {
        Self {
            capacity_bits,
            records: Vec::with_capacity(capacity_bits),
        }
    }

    pub fn used_bits(&self) -> usize {
        self.records.len()
    }

    pub fn is_full(&self) -> bool {
        self.records.len() >= self.capacity_bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EntropyLedger {
    pub gas_entropy: f64,
    pub demon_memory_entropy: f64,
    pub environment_entropy: f64,
    pub total: f64,
}

impl EntropyLedger {
    fn new(gas: f64, memory: f64, environment: f64) -> Self {
        Self {
            gas_entropy: gas,
            demon_memory_entropy: memory,
            environment_entropy: environment,
            total: gas + memory + environment,
        }
    }

    fn recompute(&mut self, gas: &GasState, memory: &DemonMemory) {
        *self = Self::new(
            gas.entropy(),
            memory.used_bits() as f64 * BOLTZMANN * LN_2,
            self.environment_entropy,
        );
    }

    pub fn minus(&self, earlier: &EntropyLedger) -> EntropyLedger {
        EntropyLedger {
            gas_entropy: self.gas_entropy - earlier.gas_entropy,
            demon_memory_entropy: self.demon_memory_entropy - earlier.demon_memory_entropy,
            environment_entropy: self.environment_entropy - earlier.environment_entropy,
            total: self.total - earlier.total,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GatePolicy {
    /// Fast molecules pass A to B, slow ones pass B to A.
    SpeedSort,
    /// The gate stays shut and the demon never measures.
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DemonConfig {
    pub n_molecules: usize,
    /// Gas and environment temperature, K.
    pub temperature: f64,
    /// Length of one chamber, m.
    pub box_length: f64,
    pub mass: f64,
    /// Speeds strictly above this are fast. Defaults to `sqrt(k_B T / m)`.
    pub speed_threshold: Option<f64>,
    pub memory_capacity_bits: usize,
    pub steps: usize,
    /// Defaults to `L / (20 v_thermal)`.
    pub dt: Option<f64>,
    pub seed: u64,
    pub measurement_kicks: bool,
    pub policy: GatePolicy,
}

impl Default for DemonConfig {
    fn default() -> Self {
        Self {
            n_molecules: 2000,
            temperature: 300.0,
            box_length: 1e-6,
            mass: NITROGEN_MASS,
            speed_threshold: None,
            memory_capacity_bits: 1024,
            steps: 10_000,
            dt: None,
            seed: 0,
            measurement_kicks: true,
            policy: GatePolicy::SpeedSort,
        }
    }
}

impl DemonConfig {
    /// `sqrt(k_B T / m)`, the one-dimensional thermal speed.
    pub fn thermal_speed(&self) -> f64 {
        (BOLTZMANN * self.temperature / self.mass).sqrt()
    }

    /// `sqrt(2 k_B T / (pi m)) * sqrt(pi / 2)` unless overridden.
    pub fn threshold(&self) -> f64 {
        self.speed_threshold.unwrap_or_else(|| {
            (2.0 * BOLTZMANN * self.temperature / (PI * self.mass)).sqrt() * (PI / 2.0).sqrt()
        })
    }

    /// An infinite threshold means nothing is ever fast: the gate stays shut.
    pub fn effective_policy(&self) -> GatePolicy {
        if self.threshold().is_infinite() {
            GatePolicy::Closed
        } else {
            self.policy
        }
    }

    pub fn time_step(&self) -> f64 {
        self.dt
            .unwrap_or_else(|| self.box_length / (20.0 * self.thermal_speed()))
    }

    /// Velocity change of one measurement kick, `hbar / (L m)`.
    pub fn kick_velocity(&self) -> f64 {
        if self.measurement_kicks {
            HBAR / (self.box_length * self.mass)
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        if self.n_molecules == 0 {
            return Err(Error::Config("n_molecules must be positive".into()));
        }
        if self.memory_capacity_bits == 0 {
            return Err(Error::Config(
                "memory_capacity_bits must be positive".into(),
            ));
        }
        positive("temperature", self.temperature)?;
        positive("box_length", self.box_length)?;
        positive("mass", self.mass)?;
        positive("dt", self.time_step())?;
        let threshold = self.threshold();
        if threshold.is_nan() || threshold <= 0.0 {
            return Err(Error::Config(format!(
                "speed_threshold must be positive, got {threshold}"
            )));
        }
        if self.thermal_speed() * self.time_step() >= self.box_length / 10.0 {
            return Err(Error::Config(
                "dt too large: thermal molecules would move L/10 or more per step".into(),
            ));
        }
        Ok(())
    }
}

/// `hbar / L`, the momentum uncertainty floor of a measurement localizing a
/// molecule to a box of length `L`.
pub fn heisenberg_floor(box_length: f64) -> Result<f64> {
    if box_length <= 0.0 || !box_length.is_finite() {
        return Err(Error::Argument(format!(
            "box length must be positive, got {box_length}"
        )));
    }
    Ok(HBAR / box_length)
}

/// Maxwell-Boltzmann velocities at the configured temperature and uniform
/// positions over both chambers.
pub fn init_gas(cfg: &DemonConfig) -> Result<GasState> {
    cfg.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let normal = Normal::new(0.0, cfg.thermal_speed())
        .map_err(|e| Error::Config(format!("velocity distribution: {e}")))?;
    let l = cfg.box_length;
    let molecules = (0..cfg.n_molecules)
        .map(|_| {
            let position = rand::Rng::random::<f64>(&mut rng) * 2.0 * l;
            let velocity = normal.sample(&mut rng);
            let chamber = if position < l { Chamber::A } else { Chamber::B };
            Molecule {
                position,
                velocity,
                chamber,
            }
        })
        .collect();
    Ok(GasState {
        molecules,
        box_length: l,
        mass: cfg.mass,
        gate_open: false,
    })
}

/// Gate encounters of one molecule during one step, oldest bit first.
#[derive(Debug, Clone, Copy, Default)]
struct Encounters {
    count: u32,
    /// Bit `i` set means encounter `i` was classified fast.
    fast_bits: u64,
    passed_last: bool,
}

struct StepParams {
    length: f64,
    dt: f64,
    threshold: f64,
    kick: f64,
    policy: GatePolicy,
    kick_seed: u64,
}

fn advance(m: &mut Molecule, index: usize, p: &StepParams) -> Encounters {
    let mut enc = Encounters::default();
    let mut remaining = p.dt;
    let two_l = 2.0 * p.length;
    while remaining > 0.0 && m.velocity != 0.0 {
        let (lo, hi) = match m.chamber {
            Chamber::A => (0.0, p.length),
            Chamber::B => (p.length, two_l),
        };
        let target = m.position + m.velocity * remaining;
        if target > lo && target < hi {
            m.position = target;
            break;
        }
        let boundary = if m.velocity > 0.0 { hi } else { lo };
        let t_hit = ((boundary - m.position) / m.velocity).clamp(0.0, remaining);
        remaining -= t_hit;
        m.position = boundary;
        let at_gate = boundary == p.length;
        if !at_gate || p.policy == GatePolicy::Closed || enc.count >= MAX_ENCOUNTERS {
            m.velocity = -m.velocity;
            continue;
        }

        let direction = m.velocity.signum();
        let speed = m.velocity.abs();
        let fast = speed > p.threshold;
        let sign = if mix64(p.kick_seed ^ ((index as u64) << 6 | enc.count as u64)) & 1 == 0 {
            1.0
        } else {
            -1.0
        };
        let kicked_speed = (m.velocity + sign * p.kick).abs();
        let passes = match m.chamber {
            Chamber::A => fast,
            Chamber::B => !fast,
        };
        if fast {
            enc.fast_bits |= 1 << enc.count;
        }
        enc.count += 1;
        enc.passed_last = passes;
        if passes {
            m.velocity = direction * kicked_speed;
            m.chamber = match m.chamber {
                Chamber::A => Chamber::B,
                Chamber::B => Chamber::A,
            };
        } else {
            m.velocity = -direction * kicked_speed;
        }
    }
    enc
}

/// Landauer erasure of the whole memory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErasureEvent {
    pub step: usize,
    pub bits: usize,
    /// `bits k_B ln 2`, J/K.
    pub entropy_jump: f64,
    /// `bits k_B T ln 2`, J.
    pub heat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepSummary {
    pub measurements: usize,
    pub crossings: usize,
}

/// Advances the gas by one time step and settles the demon's memory and
/// the ledger. `step` is the 1-based step index; it selects the kick
/// stream so that the result does not depend on `exec`.
pub fn demon_step(
    gas: &mut GasState,
    memory: &mut DemonMemory,
    ledger: &mut EntropyLedger,
    cfg: &DemonConfig,
    step: usize,
    exec: Execution,
    erasures: &mut Vec<ErasureEvent>,
) -> StepSummary {
    let params = StepParams {
        length: cfg.box_length,
        dt: cfg.time_step(),
        threshold: cfg.threshold(),
        kick: cfg.kick_velocity(),
        policy: cfg.effective_policy(),
        kick_seed: stream_seed(cfg.seed ^ KICK_STREAM, step as u64),
    };
    let chambers_before: Vec<Chamber> = gas.molecules.iter().map(|m| m.chamber).collect();
    let encounters = exec.map_mut(&mut gas.molecules, |i, m| advance(m, i, &params));

    let mut summary = StepSummary::default();
    for (i, enc) in encounters.iter().enumerate() {
        for bit in 0..enc.count {
            if memory.is_full() {
                let bits = memory.used_bits();
                let entropy_jump = bits as f64 * BOLTZMANN * LN_2;
                ledger.environment_entropy += entropy_jump;
                memory.records.clear();
                erasures.push(ErasureEvent {
                    step,
                    bits,
                    entropy_jump,
                    heat: entropy_jump * cfg.temperature,
                });
            }
            let class = if enc.fast_bits >> bit & 1 == 1 {
                SpeedClass::Fast
            } else {
                SpeedClass::Slow
            };
            memory.records.push(class);
            summary.measurements += 1;
        }
        if enc.count > 0 {
            gas.gate_open = enc.passed_last;
        }
        if gas.molecules[i].chamber != chambers_before[i] {
            summary.crossings += 1;
        }
    }
    if summary.measurements > 0 {
        ledger.recompute(gas, memory);
    }
    summary
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub temperature_a: f64,
    pub temperature_b: f64,
    pub population_a: usize,
    pub population_b: usize,
    pub gas_entropy: f64,
    pub memory_entropy: f64,
    pub environment_entropy: f64,
    pub total_entropy: f64,
    pub used_bits: usize,
    pub measurements: usize,
    pub crossings: usize,
    pub erasures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: DemonConfig,
    pub threshold: f64,
    pub dt: f64,
    /// `hbar / L`, kg m/s.
    pub heisenberg_floor: f64,
    /// Momentum change per measurement applied in this run, kg m/s.
    pub kick_momentum: f64,
    pub initial_ledger: EntropyLedger,
    /// Final ledger minus initial ledger.
    pub delta: EntropyLedger,
    pub initial_temperature_a: f64,
    pub initial_temperature_b: f64,
    pub series: Vec<StepRecord>,
    pub erasures: Vec<ErasureEvent>,
    pub total_measurements: usize,
}

impl RunReport {
    /// Smallest per-step change of the total ledger, in units of `k_B`.
    /// `None` for an empty run.
    pub fn min_total_step(&self) -> Option<f64> {
        let mut prev = self.initial_ledger.total;
        self.series
            .iter()
            .map(|r| {
                let d = (r.total_entropy - prev) / BOLTZMANN;
                prev = r.total_entropy;
                d
            })
            .reduce(f64::min)
    }

    /// Whether the total entropy never dropped by more than [`SECOND_LAW_TOL`] `k_B`.
    pub fn second_law_holds(&self) -> bool {
        self.min_total_step().is_none_or(|d| d >= -SECOND_LAW_TOL)
    }

    /// Number of steps in which the gas entropy alone decreased.
    pub fn gas_entropy_decreases(&self) -> usize {
        let mut prev = self.initial_ledger.gas_entropy;
        self.series
            .iter()
            .filter(|r| {
                let down = r.gas_entropy < prev;
                prev = r.gas_entropy;
                down
            })
            .count()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.series {
            w.serialize(r)
                .map_err(|e| Error::Argument(format!("csv: {e}")))?;
        }
        w.flush()
            .map_err(|e| Error::Argument(format!("csv: {e}")))?;
        Ok(())
    }
}

/// Runs the configured number of steps.
pub fn run(cfg: &DemonConfig, exec: Execution) -> Result<RunReport> {
    let mut gas = init_gas(cfg)?;
    let mut memory = DemonMemory::new(cfg.memory_capacity_bits);
    let mut ledger = EntropyLedger::new(gas.entropy(), 0.0, 0.0);
    let initial_ledger = ledger;
    let initial_temperature_a = gas.temperature(Chamber::A);
    let initial_temperature_b = gas.temperature(Chamber::B);
    let dt = cfg.time_step();
    let mut erasures = Vec::new();
    let mut series = Vec::with_capacity(cfg.steps);
    let mut total_measurements = 0;
    for step in 1..=cfg.steps {
        let s = demon_step(
            &mut gas,
            &mut memory,
            &mut ledger,
            cfg,
            step,
            exec,
            &mut erasures,
        );
        total_measurements += s.measurements;
        let (na, nb) = (gas.population(Chamber::A), gas.population(Chamber::B));
        series.push(StepRecord {
            step,
            time: step as f64 * dt,
            temperature_a: gas.temperature(Chamber::A),
            temperature_b: gas.temperature(Chamber::B),
            population_a: na,
            population_b: nb,
            gas_entropy: ledger.gas_entropy,
            memory_entropy: ledger.demon_memory_entropy,
            environment_entropy: ledger.environment_entropy,
            total_entropy: ledger.total,
            used_bits: memory.used_bits(),
            measurements: s.measurements,
            crossings: s.crossings,
            erasures: erasures.len(),
        });
    }
    Ok(RunReport {
        config: cfg.clone(),
        threshold: cfg.threshold(),
        dt,
        heisenberg_floor: heisenberg_floor(cfg.box_length)?,
        kick_momentum: cfg.kick_velocity() * cfg.mass,
        initial_ledger,
        delta: ledger.minus(&initial_ledger),
        initial_temperature_a,
        initial_temperature_b,
        series,
        erasures,
        total_measurements,
    })
}

/// Independent runs over several seeds.
pub fn run_ensemble(cfg: &DemonConfig, seeds: &[u64], exec: Execution) -> Result<Vec<RunReport>> {
    exec.map_indices(seeds.len(), |i| {
        let cfg = DemonConfig {
            seed: seeds[i],
            ..cfg.clone()
        };
        run(&cfg, exec)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(steps: usize) -> DemonConfig {
        DemonConfig {
            n_molecules: 200,
            steps,
            seed: 4,
            memory_capacity_bits: 64,
            ..DemonConfig::default()
        }
    }

    #[test]
    fn init_is_seed_deterministic() {
        let cfg = DemonConfig {
            n_molecules: 2,
            ..DemonConfig::default()
        };
        let a = init_gas(&cfg).unwrap();
        assert_eq!(a, init_gas(&cfg).unwrap());
        assert!(a.is_consistent());
        let other = init_gas(&DemonConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn init_equipartition_and_balance() {
        let cfg = DemonConfig {
            n_molecules: 10_000,
            seed: 17,
            ..DemonConfig::default()
        };
        let gas = init_gas(&cfg).unwrap();
        let energies: Vec<f64> = gas
            .molecules
            .iter()
            .map(|m| 0.5 * cfg.mass * m.velocity * m.velocity)
            .collect();
        let n = energies.len() as f64;
        let mean = energies.iter().sum::<f64>() / n;
        let var = energies.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let target = 0.5 * BOLTZMANN * cfg.temperature;
        assert!(
            (mean - target).abs() <= 3.0 * se,
            "mean {mean} target {target} se {se}"
        );
        let na = gas.population(Chamber::A);
        assert!((4700..=5300).contains(&na), "population A {na}");
    }

    #[test]
    fn config_validation() {
        assert!(DemonConfig::default().validate().is_ok());
        assert!(DemonConfig {
            n_molecules: 0,
            ..DemonConfig::default()
        }
        .validate()
        .is_err());
        assert!(DemonConfig {
            temperature: -1.0,
            ..DemonConfig::default()
        }
        .validate()
        .is_err());
        assert!(DemonConfig {
            dt: Some(1e-3),
            ..DemonConfig::default()
        }
        .validate()
        .is_err());
        assert!(DemonConfig {
            memory_capacity_bits: 0,
            ..DemonConfig::default()
        }
        .validate()
        .is_err());
        assert!(matches!(
            init_gas(&DemonConfig {
                box_length: 0.0,
                ..DemonConfig::default()
            }),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn threshold_default_is_thermal_speed() {
        let cfg = DemonConfig::default();
        assert!((cfg.threshold() - cfg.thermal_speed()).abs() <= 1e-12 * cfg.thermal_speed());
        let dt = cfg.time_step();
        assert!((cfg.thermal_speed() * dt - cfg.box_length / 20.0).abs() < 1e-20);
    }

    #[test]
    fn heisenberg_floor_values() {
        assert_eq!(heisenberg_floor(1.0).unwrap(), 1.054571817e-34);
        assert!((heisenberg_floor(1e-6).unwrap() - 1.054571817e-28).abs() < 1e-40);
        let grid: Vec<f64> = (1..50).map(|k| k as f64 * 1e-7).collect();
        let floors: Vec<f64> = grid.iter().map(|&l| heisenberg_floor(l).unwrap()).collect();
        assert!(floors.windows(2).all(|w| w[0] > w[1]));
        assert!(heisenberg_floor(0.0).is_err());
        assert!(heisenberg_floor(-1.0).is_err());
    }

    fn one_molecule(position: f64, velocity: f64, chamber: Chamber) -> (GasState, DemonConfig) {
        let cfg = DemonConfig {
            n_molecules: 1,
            memory_capacity_bits: 4,
            measurement_kicks: false,
            ..DemonConfig::default()
        };
        let gas = GasState {
            molecules: vec![Molecule {
                position,
                velocity,
                chamber,
            }],
            box_length: cfg.box_length,
            mass: cfg.mass,
            gate_open: false,
        };
        (gas, cfg)
    }

    #[test]
    fn step_without_gate_contact_is_ballistic() {
        let (mut gas, cfg) = one_molecule(0.3e-6, 100.0, Chamber::A);
        let mut mem = DemonMemory::new(cfg.memory_capacity_bits);
        let mut ledger = EntropyLedger::new(gas.entropy(), 0.0, 0.0);
        let before = ledger;
        let mut ev = Vec::new();
        let s = demon_step(
            &mut gas,
            &mut mem,
            &mut ledger,
            &cfg,
            1,
            Execution::Sequential,
            &mut ev,
        );
        assert_eq!(s.measurements, 0);
        assert_eq!(mem.used_bits(), 0);
        assert_eq!(ledger, before);
        let expected = 0.3e-6 + 100.0 * cfg.time_step();
        assert!((gas.molecules[0].position - expected).abs() < 1e-18);
    }

    #[test]
    fn fast_molecule_crosses_to_b() {
        // v = 2 v_th starting 0.01 L left of the gate: reaches it within one step
        let (mut gas, cfg) = one_molecule(0.99e-6, 0.0, Chamber::A);
        let v = 2.0 * cfg.thermal_speed();
        gas.molecules[0].velocity = v;
        let mut mem = DemonMemory::new(cfg.memory_capacity_bits);
        let mut ledger = EntropyLedger::new(gas.entropy(), 0.0, 0.0);
        let mut ev = Vec::new();
        let s = demon_step(
            &mut gas,
            &mut mem,
            &mut ledger,
            &cfg,
            1,
            Execution::Sequential,
            &mut ev,
        );
        assert_eq!(s.measurements, 1);
        assert_eq!(s.crossings, 1);
        assert_eq!(mem.records, vec![SpeedClass::Fast]);
        let m = gas.molecules[0];
        assert_eq!(m.chamber, Chamber::B);
        let expected = 0.99e-6 + v * cfg.time_step();
        assert!((m.position - expected).abs() < 1e-18);
        assert!(gas.gate_open);
        assert!((ledger.demon_memory_entropy - BOLTZMANN * LN_2).abs() < 1e-40);
    }

    #[test]
    fn slow_molecule_is_reflected_from_a() {
        let (mut gas, cfg) = one_molecule(0.999e-6, 0.0, Chamber::A);
        gas.molecules[0].velocity = 0.5 * cfg.thermal_speed();
        let mut mem = DemonMemory::new(4);
        let mut ledger = EntropyLedger::new(gas.entropy(), 0.0, 0.0);
        let mut ev = Vec::new();
        demon_step(
            &mut gas,
            &mut mem,
            &mut ledger,
            &cfg,
            1,
            Execution::Sequential,
            &mut ev,
        );
        assert_eq!(mem.records, vec![SpeedClass::Slow]);
        assert_eq!(gas.molecules[0].chamber, Chamber::A);
        assert!(gas.molecules[0].velocity < 0.0);
        assert!(!gas.gate_open);
    }

    #[test]
    fn full_memory_triggers_erasure() {
        let (mut gas, cfg) = one_molecule(0.999e-6, 0.0, Chamber::A);
        gas.molecules[0].velocity = 0.5 * cfg.thermal_speed();
        let mut mem = DemonMemory::new(4);
        mem.records = vec![SpeedClass::Slow; 4];
        let mut ledger = EntropyLedger::new(gas.entropy(), 4.0 * BOLTZMANN * LN_2, 0.0);
        let mut ev = Vec::new();
        demon_step(
            &mut gas,
            &mut mem,
            &mut ledger,
            &cfg,
            1,
            Execution::Sequential,
            &mut ev,
        );
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].bits, 4);
        assert_eq!(ev[0].entropy_jump, 4.0 * BOLTZMANN * LN_2);
        assert_eq!(ledger.environment_entropy, 4.0 * BOLTZMANN * LN_2);
        assert_eq!(mem.used_bits(), 1);
    }

    #[test]
    fn zero_steps_is_empty() {
        let report = run(&small(0), Execution::default()).unwrap();
        assert!(report.series.is_empty());
        assert_eq!(report.delta, EntropyLedger::default());
        assert!(report.second_law_holds());
    }

    #[test]
    fn closed_gate_conserves_energy_and_entropy() {
        let cfg = DemonConfig {
            policy: GatePolicy::Closed,
            measurement_kicks: false,
            ..small(2000)
        };
        let gas0 = init_gas(&cfg).unwrap();
        let report = run(&cfg, Execution::default()).unwrap();
        assert_eq!(report.total_measurements, 0);
        assert_eq!(report.delta, EntropyLedger::default());
        let last = report.series.last().unwrap();
        assert_eq!(last.population_a, gas0.population(Chamber::A));
        assert_eq!(last.temperature_a, report.initial_temperature_a);
        assert_eq!(last.temperature_b, report.initial_temperature_b);
    }

    #[test]
    fn kinetic_energy_conserved_without_kicks() {
        let cfg = DemonConfig {
            measurement_kicks: false,
            ..small(500)
        };
        let mut gas = init_gas(&cfg).unwrap();
        let e0 = gas.kinetic_energy();
        let mut mem = DemonMemory::new(cfg.memory_capacity_bits);
        let mut ledger = EntropyLedger::new(gas.entropy(), 0.0, 0.0);
        let mut ev = Vec::new();
        for step in 1..=cfg.steps {
            demon_step(
                &mut gas,
                &mut mem,
                &mut ledger,
                &cfg,
                step,
                Execution::Sequential,
                &mut ev,
            );
        }
        assert!((gas.kinetic_energy() - e0).abs() <= 1e-9 * e0);
        assert!(gas.is_consistent());
    }

    #[test]
    fn sorting_run_obeys_second_law() {
        let cfg = DemonConfig {
            n_molecules: 2000,
            ..small(3000)
        };
        let report = run(&cfg, Execution::default()).unwrap();
        assert!(
            report.second_law_holds(),
            "min step {:?}",
            report.min_total_step()
        );
        assert!(report.gas_entropy_decreases() > 0);
        let last = report.series.last().unwrap();
        assert!(last.temperature_b > last.temperature_a);
        assert!(!report.erasures.is_empty());
    }

    #[test]
    fn strategies_are_bit_identical() {
        let cfg = small(300);
        assert_eq!(
            run(&cfg, Execution::Sequential).unwrap(),
            run(&cfg, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn doubling_memory_halves_erasures() {
        let base = small(2000);
        let doubled = DemonConfig {
            memory_capacity_bits: 2 * base.memory_capacity_bits,
            ..base.clone()
        };
        let e1 = run(&base, Execution::default()).unwrap();
        let e2 = run(&doubled, Execution::default()).unwrap();
        assert_eq!(e1.total_measurements, e2.total_measurements);
        let (n1, n2) = (e1.erasures.len() as i64, e2.erasures.len() as i64);
        assert!(n1 > 10);
        assert!((n1 - 2 * n2).abs() <= 1, "{n1} vs {n2}");
    }

    #[test]
    fn relabeling_leaves_gas_entropy_unchanged() {
        let cfg = small(0);
        let gas = init_gas(&cfg).unwrap();
        let mut shuffled = gas.clone();
        shuffled.molecules.reverse();
        let (a, b) = (gas.entropy(), shuffled.entropy());
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let report = run(&small(5), Execution::Sequential).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("step,time,temperature_a,temperature_b"));
    }
}
