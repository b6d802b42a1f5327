//! Seeded random families for testing and benchmarking.
//!
//! States `s0 .. s{n-3}` are transient, followed by an absorbing `goal` and
//! an absorbing `sink`. Hole domains point mostly forward (toward higher
//! state indices) with an occasional backedge. Every transient state draws
//! on one to three parameters: its share of the `params` holes `h0, h1, ..`
//! plus fixed single-value parameters `a_<state>` for the remaining mass.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::family::{Distribution, Family};

const BACKEDGE_PROB: f64 = 0.2;
const SHARE_PROB: f64 = 0.5;
/// Template probabilities are multiples of `1 / GRAIN`.
const GRAIN: u32 = 20;

/// `parts` positive integers summing to `GRAIN`.
fn composition(rng: &mut ChaCha8Rng, parts: usize) -> Vec<u32> {
    let mut cuts: Vec<u32> = (1..GRAIN).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<u32> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain([GRAIN]) {
        out.push(c - prev);
        prev = c;
    }
    out
}

/// Generates a family with `states` states and `params` holes of
/// `domain_size` values each. The same arguments always give the same family.
pub fn generate_benchmark(states: usize, params: usize, domain_size: usize, seed: u64) -> Result<Family> {
    if states < 3 || params < 1 || domain_size < 2 {
        return Err(Error::BenchmarkParameters(
            "need states >= 3, params >= 1 and domain >= 2".into(),
        ));
    }
    let transient = states - 2;
    if params > 3 * transient {
        return Err(Error::BenchmarkParameters(format!(
            "{params} parameters do not fit {transient} transient states (at most 3 each)"
        )));
    }
    if domain_size > states {
        return Err(Error::BenchmarkParameters(format!(
            "domain size {domain_size} exceeds the {states} available states"
        )));
    }
    let goal = states - 2;
    let sink = states - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // holes used by each transient state; every hole is used at least once
    let mut uses: Vec<Vec<usize>> = vec![Vec::new(); transient];
    let mut order: Vec<usize> = (0..transient).collect();
    order.shuffle(&mut rng);
    for k in 0..params {
        uses[order[k % transient]].push(k);
    }
    for used in uses.iter_mut() {
        if used.is_empty() && rng.random_bool(SHARE_PROB) {
            used.push(rng.random_range(0..params));
        }
    }

    // a hole's domain leans forward from the first state using it
    let mut domains: Vec<Vec<usize>> = Vec::with_capacity(params);
    for k in 0..params {
        let owner = uses.iter().position(|u| u.contains(&k)).expect("every hole is used");
        let mut forward: Vec<usize> = (owner + 1..states).collect();
        let mut backward: Vec<usize> = (0..=owner).collect();
        forward.shuffle(&mut rng);
        backward.shuffle(&mut rng);
        let mut dom: Vec<usize> = forward.iter().copied().take(domain_size).collect();
        if dom.len() < domain_size {
            dom.extend(backward.iter().copied().take(domain_size - dom.len()));
        } else if rng.random_bool(BACKEDGE_PROB) {
            dom[domain_size - 1] = backward[0];
        }
        dom.sort_unstable();
        domains.push(dom);
    }

    let mut state_names: Vec<String> = (0..transient).map(|s| format!("s{s}")).collect();
    state_names.push("goal".into());
    state_names.push("sink".into());
    let mut param_names: Vec<String> = (0..params).map(|k| format!("h{k}")).collect();
    let mut templates = Vec::with_capacity(states);

    for (s, used) in uses.iter().enumerate() {
        let mut keys = used.clone();
        if keys.len() < 3 && (keys.is_empty() || rng.random_bool(0.5)) {
            keys.push(param_names.len());
            param_names.push(format!("a_{}", state_names[s]));
            domains.push(vec![rng.random_range(s + 1..states)]);
        }
        let weights = composition(&mut rng, keys.len());
        let entries = keys
            .into_iter()
            .zip(weights)
            .map(|(k, w)| (k, f64::from(w) / f64::from(GRAIN)));
        templates.push(Distribution::new(entries)?);
    }
    for absorbing in [goal, sink] {
        let k = param_names.len();
        param_names.push(format!("a_{}", state_names[absorbing]));
        domains.push(vec![absorbing]);
        templates.push(Distribution::point(k));
    }

    Family::new(state_names, 0, param_names, domains, templates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::induce;
    use crate::io::sketch::{parse_sketch, serialize_sketch};

    #[test]
    fn deterministic_for_a_seed() {
        let a = serialize_sketch(&generate_benchmark(10, 3, 2, 7).unwrap());
        let b = serialize_sketch(&generate_benchmark(10, 3, 2, 7).unwrap());
        assert_eq!(a, b);
        let c = serialize_sketch(&generate_benchmark(10, 3, 2, 8).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn round_trips_through_the_sketch_format() {
        for seed in 0..20 {
            let fam = generate_benchmark(12, 5, 3, seed).unwrap();
            assert_eq!(parse_sketch(&serialize_sketch(&fam)).unwrap(), fam);
        }
    }

    #[test]
    fn shape() {
        for seed in 0..20 {
            let fam = generate_benchmark(8, 4, 3, seed).unwrap();
            assert_eq!(fam.num_states(), 8);
            assert_eq!(fam.multi_valued_params(), vec![0, 1, 2, 3]);
            for s in 0..6 {
                let n = fam.template(s).len();
                assert!((1..=3).contains(&n), "state {s} uses {n} parameters");
            }
            for s in [6, 7] {
                let k = fam.template(s).support().next().unwrap();
                assert_eq!(fam.domain(k), [s]);
            }
        }
    }

    #[test]
    fn every_member_is_a_chain() {
        let fam = generate_benchmark(6, 3, 2, 1).unwrap();
        let full = fam.full_subfamily();
        assert_eq!(full.member_count(), 8);
        for r in full.members() {
            induce(&fam, &r).unwrap();
        }
    }

    #[test]
    fn infeasible_budgets() {
        assert!(generate_benchmark(3, 4, 2, 0).is_err());
        assert!(generate_benchmark(4, 1, 5, 0).is_err());
        assert!(generate_benchmark(2, 1, 2, 0).is_err());
        assert!(generate_benchmark(5, 0, 2, 0).is_err());
        assert!(generate_benchmark(5, 1, 1, 0).is_err());
        assert!(generate_benchmark(3, 3, 3, 0).is_ok());
    }
}
