//! Timing-free mode: the chain under the analytic model's own assumptions.
//!
//! DIFS and backoff are dropped, service is exactly one attempt time per
//! transmission, and each attempt of node `i` collides independently with
//! the probability the analytic map assigns to the measured utilization of
//! node `i-1`. Nodes are simulated in chain order, so the coupling is
//! feed-forward exactly as in the iteration `u_{i+1} = min{f(u_i), 1}`.
//! Queue growth is what clips congested nodes at utilization 1.
//!
//! This is the bridge fixture between the simulator and the analytic
//! module: with the MAC's timing stripped away, measured per-node
//! utilizations must track the utilization iteration closely.

use rand::Rng;

use super::rng::{exp_interarrival, stream_rng, Purpose};
use super::{RatePolicy, ScenarioSpec, SimError, TopologyKind};
use crate::analytic::collision_probability;

/// Run the stylized chain and return per-node utilization measured over the
/// post-warmup window. Linear chains with a fixed bit rate only.
pub fn run_stylized(spec: &ScenarioSpec) -> Result<Vec<f64>, SimError> {
    spec.validate()?;
    if spec.topology != TopologyKind::Linear {
        return Err(SimError::Unsupported("stylized mode runs linear chains"));
    }
    if spec.burst.is_some() {
        return Err(SimError::Unsupported("stylized mode has no burst support"));
    }
    let t = match spec.rate_policy {
        RatePolicy::FixedBitRate(_) => spec.fixed_attempt_time().expect("fixed rate"),
        RatePolicy::Minstrel => {
            return Err(SimError::Unsupported("stylized mode needs a fixed bit rate"))
        }
    };

    let rates = spec.resolved_rates();
    let window = spec.duration - spec.warmup;
    let mut utilizations = Vec::with_capacity(spec.n_pairs);
    let mut upstream_u = 0.0;

    for node in 0..spec.n_pairs {
        let lambda = rates[node];
        let p = if node == 0 {
            0.0 // the first receiver has no hidden interferer
        } else {
            collision_probability(upstream_u).expect("utilization in [0, 1]")
        };
        let u = simulate_node(spec, node, lambda, p, t, window);
        utilizations.push(u);
        upstream_u = u;
    }
    Ok(utilizations)
}

/// One M/G/1-style node: Poisson arrivals, per-attempt service `t`,
/// independent per-attempt collisions with probability `p`, retry limit from
/// the spec. Returns the busy fraction of the measurement window.
fn simulate_node(spec: &ScenarioSpec, node: usize, lambda: f64, p: f64, t: f64, window: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let mut arrivals = stream_rng(spec.seed, node as u64, Purpose::Arrival);
    let mut collisions = stream_rng(spec.seed, node as u64, Purpose::StylizedCollision);

    let mut next_arrival = exp_interarrival(&mut arrivals, lambda);
    let mut server_free = 0.0f64;
    let mut busy = 0.0f64;

    while next_arrival <= spec.duration {
        let start = next_arrival.max(server_free);
        if start >= spec.duration {
            break;
        }
        let mut attempts = 1u32;
        while attempts < spec.retry_limit && collisions.gen::<f64>() < p {
            attempts += 1;
        }
        let end = start + attempts as f64 * t;
        server_free = end;
        let lo = start.max(spec.warmup);
        let hi = end.min(spec.duration);
        if hi > lo {
            busy += hi - lo;
        }
        next_arrival += exp_interarrival(&mut arrivals, lambda);
    }
    busy / window
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::utilization_sequence;
    use crate::sim::LoadModel;

    fn spec(rho0: f64, rho: f64, retry_limit: u32) -> ScenarioSpec {
        let mut s = ScenarioSpec::new(TopologyKind::Linear, 41);
        let t = 0.016;
        s.arrival_rate = LoadModel::Fixed(rho / t);
        s.attacker_rate = rho0 / t;
        s.retry_limit = retry_limit;
        s.duration = 2000.0;
        s.warmup = 200.0;
        s.seed = 99;
        s
    }

    #[test]
    fn tracks_the_analytic_iteration() {
        for &(rho0, rho, r) in &[(0.2, 0.13, 7u32), (0.9, 0.15, 7), (0.5, 0.13, 10)] {
            let s = spec(rho0, rho, r);
            let measured = run_stylized(&s).unwrap();
            let predicted = utilization_sequence(rho0.min(1.0), &[rho], r, 40, 1e-12)
                .unwrap()
                .values;
            for i in 0..s.n_pairs {
                let want = predicted[i.min(predicted.len() - 1)];
                assert!(
                    (measured[i] - want).abs() < 0.05,
                    "rho0={rho0} rho={rho} R={r} node {i}: sim {} vs map {}",
                    measured[i],
                    want
                );
            }
        }
    }

    #[test]
    fn ring_and_minstrel_rejected() {
        let mut s = spec(0.5, 0.13, 7);
        s.topology = TopologyKind::Ring;
        assert!(run_stylized(&s).is_err());
        let mut s = spec(0.5, 0.13, 7);
        s.rate_policy = RatePolicy::Minstrel;
        assert!(run_stylized(&s).is_err());
    }
}
