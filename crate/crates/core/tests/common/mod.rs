//! Random instances and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use famsynth::family::{induce, Distribution, Family, Realization, Subfamily};
use famsynth::io::generate_benchmark;
use famsynth::numerics::{mc_reach_exact, Bound, Property};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-8;
pub const ETA: f64 = 1e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unstructured family: arbitrary cycles, shared holes, mixed domain sizes.
/// At most `max_members` members and `max_states` states.
pub fn wild_family(seed: u64, max_states: usize, max_members: u128) -> Family {
    let mut rng = rng(seed);
    let n = rng.random_range(3..=max_states);
    let mut domains: Vec<Vec<usize>> = Vec::new();
    let mut members: u128 = 1;
    let wanted = rng.random_range(1..=8);
    for _ in 0..wanted {
        let size = rng.random_range(2..=4usize).min(n);
        if members * size as u128 > max_members {
            break;
        }
        members *= size as u128;
        let mut states: Vec<usize> = (0..n).collect();
        states.shuffle(&mut rng);
        domains.push(states[..size].to_vec());
    }
    // fixed single-value parameters give every state somewhere to go
    let holes = domains.len();
    for s in 0..n {
        let target = if s + 1 < n && rng.random_bool(0.7) {
            rng.random_range(s + 1..n)
        } else {
            rng.random_range(0..n)
        };
        domains.push(vec![target]);
    }
    let mut templates = Vec::with_capacity(n);
    for s in 0..n {
        let mut keys = vec![holes + s];
        let extra = rng.random_range(0..=2usize).min(holes);
        for _ in 0..extra {
            let k = rng.random_range(0..holes);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        let weights: Vec<f64> = keys.iter().map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut entries: Vec<(usize, f64)> = keys.iter().zip(&weights).map(|(&k, w)| (k, w / total)).collect();
        // force an exact sum
        let head: f64 = entries[1..].iter().map(|e| e.1).sum();
        entries[0].1 = 1.0 - head;
        templates.push(Distribution::new(entries).unwrap());
    }
    Family::unnamed(0, domains, templates).unwrap()
}

/// Layered benchmark family with at most `max_members` members.
pub fn layered_family(seed: u64, max_states: usize, max_members: u128) -> Family {
    let mut rng = rng(seed ^ 0x5eed);
    let states = rng.random_range(4..=max_states);
    let domain = rng.random_range(2..=3usize).min(states);
    let mut params = 1;
    while params < 3 * (states - 2) && (domain as u128).pow(params as u32 + 1) <= max_members && rng.random_bool(0.75) {
        params += 1;
    }
    generate_benchmark(states, params, domain, seed).unwrap()
}

/// Alternates between the two generators.
pub fn random_family(seed: u64, max_states: usize, max_members: u128) -> Family {
    if seed.is_multiple_of(2) {
        layered_family(seed, max_states, max_members)
    } else {
        wild_family(seed, max_states, max_members)
    }
}

/// A target set: the last state of layered families, a random state otherwise.
pub fn random_targets(family: &Family, seed: u64) -> Vec<usize> {
    match family.state_index("goal") {
        Some(g) => vec![g],
        None => vec![rng(seed).random_range(1..family.num_states())],
    }
}

/// Exact reachability vector of every member of `sub`.
pub fn exact_values(family: &Family, sub: &Subfamily, targets: &[usize]) -> Vec<(Realization, Vec<f64>)> {
    sub.members()
        .map(|r| {
            let mc = induce(family, &r).unwrap();
            let v = mc_reach_exact(&mc, targets).unwrap();
            (r, v)
        })
        .collect()
}

/// Per-state minimum and maximum over all members.
pub fn exact_extremes(values: &[(Realization, Vec<f64>)]) -> (Vec<f64>, Vec<f64>) {
    let n = values[0].1.len();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for (_, v) in values {
        for s in 0..n {
            lo[s] = lo[s].min(v[s]);
            hi[s] = hi[s].max(v[s]);
        }
    }
    (lo, hi)
}

/// Exact satisfaction with the same `eta` slack the synthesizer uses.
pub fn satisfies(value: f64, p: &Property) -> bool {
    match p.bound {
        Bound::AtMost => value <= p.threshold + ETA,
        Bound::AtLeast => value >= p.threshold - ETA,
    }
}

/// A threshold at least `gap` away from every member value, so numerical
/// noise cannot flip a verdict. Picks a point between two sorted values.
pub fn separated_threshold(values: &[f64], pick: usize, gap: f64) -> Option<f64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut cands: Vec<f64> = Vec::new();
    if sorted[0] > 2.0 * gap {
        cands.push(sorted[0] / 2.0);
    }
    for w in sorted.windows(2) {
        if w[1] - w[0] > 2.0 * gap {
            cands.push((w[0] + w[1]) / 2.0);
        }
    }
    if 1.0 - sorted[sorted.len() - 1] > 2.0 * gap {
        cands.push((1.0 + sorted[sorted.len() - 1]) / 2.0);
    }
    if cands.is_empty() {
        return None;
    }
    Some(cands[pick % cands.len()])
}
