//! Parameter sweeps: independent runs fanned out across threads.

use rayon::prelude::*;

use super::rng::{stream_seed, Purpose};
use super::{run_simulation, LoadModel, RatePolicy, ScenarioSpec, SimError};

/// Per-node utilizations at one attacker load.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub rho0: f64,
    /// Mean utilization per node across replications.
    pub utilization: Vec<f64>,
}

/// Limiting utilizations of the last node with the attacker silent and
/// saturated, at one node load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeLoadPoint {
    pub rho: f64,
    pub u_last_quiet: f64,
    pub u_last_full: f64,
}

fn replicated_seeds(base: u64, point: u64, reps: u32) -> Vec<u64> {
    (0..reps as u64)
        .map(|r| stream_seed(stream_seed(base, point, Purpose::SweepPoint), r, Purpose::Replication))
        .collect()
}

fn mean_utilizations(spec: &ScenarioSpec, seeds: &[u64]) -> Result<Vec<f64>, SimError> {
    let runs: Result<Vec<_>, _> = seeds
        .par_iter()
        .map(|&seed| {
            let mut s = spec.clone();
            s.seed = seed;
            run_simulation(&s)
        })
        .collect();
    let runs = runs?;
    let n = spec.n_pairs;
    let mut mean = vec![0.0; n];
    for r in &runs {
        for i in 0..n {
            mean[i] += r.nodes[i].utilization;
        }
    }
    for m in &mut mean {
        *m /= runs.len() as f64;
    }
    Ok(mean)
}

/// Run the scenario once per attacker load `rho0` (attacker packet rate
/// `rho0 / T` at the fixed bit rate), with `reps` independent seeds per
/// point, all derived from the base seed.
pub fn sweep_attacker_load(
    spec: &ScenarioSpec,
    rho0_values: &[f64],
    reps: u32,
) -> Result<Vec<SweepPoint>, SimError> {
    let t = fixed_attempt_time(spec)?;
    if reps < 1 {
        return Err(SimError::invalid("reps", "need at least one replication"));
    }
    for &rho0 in rho0_values {
        if !(0.0..=1.0).contains(&rho0) {
            return Err(SimError::invalid(
                "rho0",
                format!("attacker load {rho0} outside [0, 1]"),
            ));
        }
    }
    rho0_values
        .iter()
        .enumerate()
        .map(|(idx, &rho0)| {
            let mut point_spec = spec.clone();
            point_spec.attacker_rate = rho0 / t;
            let seeds = replicated_seeds(spec.seed, idx as u64, reps);
            Ok(SweepPoint {
                rho0,
                utilization: mean_utilizations(&point_spec, &seeds)?,
            })
        })
        .collect()
}

/// For each node load `rho`, measure the last node's utilization with the
/// attacker silent (`rho0 = 0`) and saturated (`rho0 = 1`). Divergence of
/// the two limits over a load interval is the signature of a phase
/// transition at that retry limit.
pub fn sweep_node_load(
    spec: &ScenarioSpec,
    rho_values: &[f64],
    reps: u32,
) -> Result<Vec<NodeLoadPoint>, SimError> {
    let t = fixed_attempt_time(spec)?;
    if reps < 1 {
        return Err(SimError::invalid("reps", "need at least one replication"));
    }
    let last = spec.n_pairs - 1;
    rho_values
        .iter()
        .enumerate()
        .map(|(idx, &rho)| {
            let mut quiet = spec.clone();
            quiet.arrival_rate = LoadModel::Fixed(rho / t);
            quiet.attacker_rate = 0.0;
            let mut full = quiet.clone();
            full.attacker_rate = 1.0 / t;
            let seeds = replicated_seeds(spec.seed, idx as u64, reps);
            let u_quiet = mean_utilizations(&quiet, &seeds)?[last];
            let u_full = mean_utilizations(&full, &seeds)?[last];
            Ok(NodeLoadPoint {
                rho,
                u_last_quiet: u_quiet,
                u_last_full: u_full,
            })
        })
        .collect()
}

fn fixed_attempt_time(spec: &ScenarioSpec) -> Result<f64, SimError> {
    match spec.rate_policy {
        RatePolicy::FixedBitRate(_) => Ok(spec.fixed_attempt_time().expect("fixed rate")),
        RatePolicy::Minstrel => Err(SimError::Unsupported(
            "load sweeps need a fixed bit rate to translate rho into a packet rate",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TopologyKind;

    fn spec() -> ScenarioSpec {
        let mut s = ScenarioSpec::new(TopologyKind::Linear, 3);
        s.arrival_rate = LoadModel::Fixed(8.125);
        s.duration = 30.0;
        s.warmup = 3.0;
        s.seed = 5;
        s
    }

    #[test]
    fn sweep_is_deterministic_and_monotone_at_node_one() {
        let points = sweep_attacker_load(&spec(), &[0.1, 0.8], 2).unwrap();
        let again = sweep_attacker_load(&spec(), &[0.1, 0.8], 2).unwrap();
        assert_eq!(points, again);
        // More attacker traffic cannot reduce node 1's airtime.
        assert!(points[1].utilization[1] > points[0].utilization[1]);
    }

    #[test]
    fn rho0_outside_unit_interval_rejected() {
        assert!(sweep_attacker_load(&spec(), &[1.5], 1).is_err());
    }

    #[test]
    fn minstrel_sweep_rejected() {
        let mut s = spec();
        s.rate_policy = RatePolicy::Minstrel;
        assert!(sweep_attacker_load(&s, &[0.5], 1).is_err());
    }
}
