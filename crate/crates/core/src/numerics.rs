//! Reachability probabilities for Markov chains and MDPs.
//!
//! Both solvers fix the probability-0 and probability-1 states by graph
//! analysis and then run Gauss-Seidel sweeps in state-index order starting
//! from zero, so iterates approach the least fixpoint from below. Sweeps stop
//! once the largest per-state change drops below the tolerance, scaled down
//! by the observed contraction rate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{Distribution, Mc};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_ETA: f64 = 1e-6;
pub const MAX_SWEEPS: usize = 1_000_000;
pub const EXACT_STATE_LIMIT: usize = 2000;

/// Numeric tolerances: `tol` for value iteration, `eta` for threshold decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub tol: f64,
    pub eta: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol: DEFAULT_TOL,
            eta: DEFAULT_ETA,
        }
    }
}

impl Tolerances {
    /// Defaults, with `tol` taken from `SYNTH_TOL` when it holds a positive number.
    pub fn from_env() -> Self {
        let mut t = Tolerances::default();
        if let Some(v) = std::env::var("SYNTH_TOL")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| *v > 0.0 && v.is_finite())
        {
            t.tol = v;
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bound {
    /// `P <= lambda`: a safety property.
    AtMost,
    /// `P >= lambda`: a liveness property.
    AtLeast,
}

/// Threshold reachability property `P ⋈ lambda [F targets]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub bound: Bound,
    pub threshold: f64,
    pub targets: Vec<usize>,
}

impl Property {
    pub fn new(bound: Bound, threshold: f64, targets: impl IntoIterator<Item = usize>) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::ThresholdOutOfRange(threshold));
        }
        let targets = normalize_targets(targets)?;
        Ok(Property {
            bound,
            threshold,
            targets,
        })
    }

    pub fn is_safety(&self) -> bool {
        self.bound == Bound::AtMost
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

/// Optimization objective over the reachability probability of `targets`,
/// with relative slack `eps` (0 = exact optimum).
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub direction: Direction,
    pub targets: Vec<usize>,
    pub eps: f64,
}

impl Objective {
    pub fn new(direction: Direction, targets: impl IntoIterator<Item = usize>, eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::RelaxationOutOfRange(eps));
        }
        Ok(Objective {
            direction,
            targets: normalize_targets(targets)?,
            eps,
        })
    }

    /// True when `a` is strictly better than `b`.
    pub fn better(&self, a: f64, b: f64) -> bool {
        match self.direction {
            Direction::Min => a < b,
            Direction::Max => a > b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Specification {
    pub properties: Vec<Property>,
    pub objective: Option<Objective>,
}

impl Specification {
    pub fn single(property: Property) -> Self {
        Specification {
            properties: vec![property],
            objective: None,
        }
    }
}

fn normalize_targets(targets: impl IntoIterator<Item = usize>) -> Result<Vec<usize>> {
    let mut t: Vec<usize> = targets.into_iter().collect();
    t.sort_unstable();
    t.dedup();
    if t.is_empty() {
        return Err(Error::EmptyTarget);
    }
    Ok(t)
}

fn target_mask(n: usize, targets: &[usize]) -> Result<Vec<bool>> {
    if targets.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let mut mask = vec![false; n];
    for &t in targets {
        if t >= n {
            return Err(Error::UnknownState(t));
        }
        mask[t] = true;
    }
    Ok(mask)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Sat,
    Viol,
}

/// Threshold decision with tolerance `eta`; values exactly at the threshold satisfy.
pub fn evaluate(value: f64, property: &Property, eta: f64) -> Verdict {
    let sat = match property.bound {
        Bound::AtMost => value <= property.threshold + eta,
        Bound::AtLeast => value >= property.threshold - eta,
    };
    if sat {
        Verdict::Sat
    } else {
        Verdict::Viol
    }
}

/// States from which some target is reachable with positive probability.
fn can_reach(rows: &[&[Distribution]], target: &[bool]) -> Vec<bool> {
    let n = rows.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, actions) in rows.iter().enumerate() {
        for d in actions.iter() {
            for t in d.support() {
                preds[t].push(s);
            }
        }
    }
    let mut reach = target.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&s| target[s]).collect();
    while let Some(t) = stack.pop() {
        for &s in &preds[t] {
            if !reach[s] {
                reach[s] = true;
                stack.push(s);
            }
        }
    }
    reach
}

/// Predecessor lists over every action's support.
fn predecessors(rows: &[&[Distribution]]) -> Vec<Vec<(usize, usize)>> {
    let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); rows.len()];
    for (s, actions) in rows.iter().enumerate() {
        for (a, d) in actions.iter().enumerate() {
            for t in d.support() {
                preds[t].push((s, a));
            }
        }
    }
    preds
}

/// States where some scheduler reaches the targets with probability 1: the
/// greatest set `U` whose states can reach the targets using only actions
/// that never leave `U`. `positive` must be the positive-probability set.
fn almost_sure_exists(rows: &[&[Distribution]], target: &[bool], positive: &[bool]) -> Vec<bool> {
    let preds = predecessors(rows);
    let mut inside = positive.to_vec();
    loop {
        let mut reach = target.to_vec();
        let mut stack: Vec<usize> = (0..rows.len()).filter(|&s| target[s]).collect();
        while let Some(t) = stack.pop() {
            for &(s, a) in &preds[t] {
                if !reach[s] && inside[s] && rows[s][a].support().all(|u| inside[u]) {
                    reach[s] = true;
                    stack.push(s);
                }
            }
        }
        if reach == inside {
            return inside;
        }
        inside = reach;
    }
}

/// States where every scheduler reaches the targets with probability 1: those
/// that cannot enter the zero region of some scheduler before a target.
fn almost_sure_all(rows: &[&[Distribution]], target: &[bool], forced: &[bool]) -> Vec<bool> {
    let preds = predecessors(rows);
    let mut escapes: Vec<bool> = forced.iter().map(|&f| !f).collect();
    let mut stack: Vec<usize> = (0..rows.len()).filter(|&s| escapes[s]).collect();
    while let Some(t) = stack.pop() {
        for &(s, _) in &preds[t] {
            if !escapes[s] && !target[s] {
                escapes[s] = true;
                stack.push(s);
            }
        }
    }
    escapes.iter().map(|&e| !e).collect()
}

/// Probability mass of `d` leaving `s`, weighted by `x`, over the mass that
/// leaves at all. Solving the self-loop in place is the Gauss-Seidel diagonal.
fn row_value(d: &Distribution, s: usize, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut stay = 0.0;
    for (t, p) in d.iter() {
        if t == s {
            stay += p;
        } else {
            acc += p * x[t];
        }
    }
    if stay >= 1.0 {
        0.0
    } else {
        (acc / (1.0 - stay)).min(1.0)
    }
}

/// Stopping rule for the sweeps: the last change must be below `tol` scaled
/// by `1 - rho`, where `rho` estimates the contraction from the last two
/// changes. Under geometric convergence the remaining error is then below
/// `tol`, which a plain `change < tol` test does not ensure on slow chains.
struct Stopping {
    tol: f64,
    prev: f64,
}

impl Stopping {
    fn new(tol: f64) -> Self {
        Stopping {
            tol,
            prev: f64::INFINITY,
        }
    }

    fn done(&mut self, delta: f64) -> bool {
        let rho = if self.prev > 0.0 {
            (delta / self.prev).min(1.0)
        } else {
            0.0
        };
        self.prev = delta;
        delta < self.tol && delta <= self.tol * (1.0 - rho)
    }
}

/// Called after every sweep with the sweep number and the current iterate.
pub(crate) type SweepObserver<'a> = &'a mut dyn FnMut(usize, &[f64]);

pub(crate) fn gauss_seidel_mc(
    mc: &Mc,
    targets: &[usize],
    tol: f64,
    mut observe: Option<SweepObserver<'_>>,
) -> Result<Vec<f64>> {
    let n = mc.num_states();
    let target = target_mask(n, targets)?;
    let rows: Vec<&[Distribution]> = mc.rows().iter().map(std::slice::from_ref).collect();
    let positive = can_reach(&rows, &target);
    let sure = almost_sure_exists(&rows, &target, &positive);
    let maybe: Vec<usize> = (0..n).filter(|&s| positive[s] && !sure[s]).collect();
    let mut x: Vec<f64> = sure.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
    let mut stop = Stopping::new(tol);
    for sweep in 1..=MAX_SWEEPS {
        let mut delta: f64 = 0.0;
        for &s in &maybe {
            let v = row_value(mc.row(s), s, &x);
            delta = delta.max((v - x[s]).abs());
            x[s] = v;
        }
        if let Some(f) = observe.as_mut() {
            f(sweep, &x);
        }
        if stop.done(delta) {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence(MAX_SWEEPS))
}

/// Probability of eventually reaching `targets` from every state.
pub fn mc_reach(mc: &Mc, targets: &[usize], tol: f64) -> Result<Vec<f64>> {
    gauss_seidel_mc(mc, targets, tol, None)
}

/// Reachability by direct elimination of the linear system over the states
/// that can reach the targets. Intended for certification of small instances.
pub fn mc_reach_exact(mc: &Mc, targets: &[usize]) -> Result<Vec<f64>> {
    let n = mc.num_states();
    if n > EXACT_STATE_LIMIT {
        return Err(Error::TooManyStates {
            states: n,
            limit: EXACT_STATE_LIMIT,
        });
    }
    let target = target_mask(n, targets)?;
    let rows: Vec<&[Distribution]> = mc.rows().iter().map(std::slice::from_ref).collect();
    let positive = can_reach(&rows, &target);
    let maybe: Vec<usize> = (0..n).filter(|&s| positive[s] && !target[s]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &s) in maybe.iter().enumerate() {
        index[s] = i;
    }
    let m = maybe.len();
    let mut x: Vec<f64> = target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
    if m == 0 {
        return Ok(x);
    }
    let mut a = DMatrix::<f64>::identity(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for (i, &s) in maybe.iter().enumerate() {
        for (t, p) in mc.row(s).iter() {
            if target[t] {
                b[i] += p;
            } else if index[t] != usize::MAX {
                a[(i, index[t])] -= p;
            }
        }
    }
    let solution = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::InvalidSubfamily("singular reachability system".into()))?;
    for (i, &s) in maybe.iter().enumerate() {
        x[s] = solution[i].clamp(0.0, 1.0);
    }
    Ok(x)
}

/// A Markov decision process: every state owns a list of actions, each a
/// distribution over successor states.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    initial: usize,
    actions: Vec<Vec<Distribution>>,
}

impl Mdp {
    pub fn new(initial: usize, actions: Vec<Vec<Distribution>>) -> Result<Self> {
        let n = actions.len();
        if initial >= n {
            return Err(Error::UnknownState(initial));
        }
        for acts in &actions {
            for d in acts {
                if let Some(bad) = d.support().find(|&t| t >= n) {
                    return Err(Error::UnknownState(bad));
                }
            }
        }
        Ok(Mdp { initial, actions })
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self, state: usize) -> &[Distribution] {
        &self.actions[state]
    }

    pub fn num_actions(&self, state: usize) -> usize {
        self.actions[state].len()
    }

    /// The chain obtained by fixing the scheduler's action in every state.
    pub fn induced_mc(&self, scheduler: &Scheduler) -> Result<Mc> {
        let rows = self
            .actions
            .iter()
            .zip(&scheduler.0)
            .map(|(acts, &a)| acts.get(a).cloned().ok_or(Error::NoActions(a)))
            .collect::<Result<Vec<_>>>()?;
        Mc::new(self.initial, rows)
    }
}

/// Memoryless deterministic scheduler: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheduler(pub Vec<usize>);

impl Scheduler {
    pub fn action(&self, state: usize) -> usize {
        self.0[state]
    }
}

/// Optimal (min or max) reachability values plus a scheduler attaining them.
pub fn mdp_extreme(mdp: &Mdp, targets: &[usize], direction: Direction, tol: f64) -> Result<(Vec<f64>, Scheduler)> {
    let n = mdp.num_states();
    if let Some(s) = (0..n).find(|&s| mdp.actions[s].is_empty()) {
        return Err(Error::NoActions(s));
    }
    let target = target_mask(n, targets)?;
    let rows: Vec<&[Distribution]> = mdp.actions.iter().map(Vec::as_slice).collect();
    let positive = match direction {
        Direction::Max => can_reach(&rows, &target),
        Direction::Min => forced_reach(&rows, &target),
    };
    let sure = match direction {
        Direction::Max => almost_sure_exists(&rows, &target, &positive),
        Direction::Min => almost_sure_all(&rows, &target, &positive),
    };
    let maybe: Vec<usize> = (0..n).filter(|&s| positive[s] && !sure[s]).collect();
    let mut x: Vec<f64> = sure.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
    let pick = |a: f64, b: f64| match direction {
        Direction::Max => a.max(b),
        Direction::Min => a.min(b),
    };
    let mut converged = false;
    let mut stop = Stopping::new(tol);
    for _ in 0..MAX_SWEEPS {
        let mut delta: f64 = 0.0;
        for &s in &maybe {
            let v = mdp.actions[s]
                .iter()
                .map(|d| row_value(d, s, &x))
                .reduce(pick)
                .unwrap_or(0.0);
            delta = delta.max((v - x[s]).abs());
            x[s] = v;
        }
        if stop.done(delta) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }
    let scheduler = match direction {
        Direction::Max => max_scheduler(mdp, &target, &positive, &sure, &x, tol),
        Direction::Min => min_scheduler(mdp, &target, &positive, &x),
    };
    Ok((x, scheduler))
}

/// States where every scheduler reaches the targets with positive probability.
fn forced_reach(rows: &[&[Distribution]], target: &[bool]) -> Vec<bool> {
    let n = rows.len();
    let mut inside = target.to_vec();
    loop {
        let mut changed = false;
        for s in 0..n {
            if inside[s] {
                continue;
            }
            let forced = rows[s].iter().all(|d| d.support().any(|t| inside[t]));
            if forced {
                inside[s] = true;
                changed = true;
            }
        }
        if !changed {
            return inside;
        }
    }
}

fn best_action(actions: &[Distribution], s: usize, x: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    let mut best_v = row_value(&actions[0], s, x);
    for (a, d) in actions.iter().enumerate().skip(1) {
        let v = row_value(d, s, x);
        if better(v, best_v) {
            best = a;
            best_v = v;
        }
    }
    best
}

fn min_scheduler(mdp: &Mdp, target: &[bool], positive: &[bool], x: &[f64]) -> Scheduler {
    let choice = (0..mdp.num_states())
        .map(|s| {
            let acts = &mdp.actions[s];
            if target[s] {
                0
            } else if !positive[s] {
                // stay inside the probability-0 region
                acts.iter().position(|d| d.support().all(|t| !positive[t])).unwrap_or(0)
            } else {
                best_action(acts, s, x, |a, b| a < b)
            }
        })
        .collect();
    Scheduler(choice)
}

/// Among near-optimal actions, prefer ones that move toward states already
/// known to reach the targets; an arbitrary optimal action could loop forever
/// inside an end component.
fn max_scheduler(mdp: &Mdp, target: &[bool], positive: &[bool], sure: &[bool], x: &[f64], tol: f64) -> Scheduler {
    let n = mdp.num_states();
    let mut choice: Vec<Option<usize>> = (0..n).map(|s| target[s].then_some(0)).collect();
    let mut attracted = target.to_vec();
    let candidates: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|s| {
            if target[s] || !positive[s] || x[s] <= 0.0 {
                return Vec::new();
            }
            mdp.actions[s]
                .iter()
                .enumerate()
                .filter(|(_, d)| !sure[s] || d.support().all(|t| sure[t]))
                .map(|(a, d)| (a, row_value(d, s, x)))
                .filter(|&(_, v)| v >= x[s] - tol)
                .collect()
        })
        .collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if attracted[s] || candidates[s].is_empty() {
                continue;
            }
            let progressing = candidates[s]
                .iter()
                .filter(|&&(a, _)| mdp.actions[s][a].support().any(|t| t != s && attracted[t]))
                .fold(None::<(usize, f64)>, |acc, &(a, v)| match acc {
                    Some((_, bv)) if bv >= v => acc,
                    _ => Some((a, v)),
                });
            if let Some((a, _)) = progressing {
                choice[s] = Some(a);
                attracted[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let choice = (0..n)
        .map(|s| choice[s].unwrap_or_else(|| best_action(&mdp.actions[s], s, x, |a, b| a > b)))
        .collect();
    Scheduler(choice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{induce, Realization};
    use crate::fixtures::toy4;

    fn chain(rows: Vec<Vec<(usize, f64)>>) -> Mc {
        Mc::new(0, rows.into_iter().map(|r| Distribution::new(r).unwrap()).collect()).unwrap()
    }

    #[test]
    fn toy4_r0_reaches_target_with_point_eight() {
        let fam = toy4();
        let mc = induce(&fam, &Realization::new(vec![1, 3, 3, 4])).unwrap();
        let x = mc_reach(&mc, &[3], DEFAULT_TOL).unwrap();
        assert!((x[0] - 0.8).abs() < DEFAULT_TOL);
        assert_eq!(x[3], 1.0);
        assert_eq!(x[4], 0.0);
    }

    #[test]
    fn exact_solver_examples() {
        let fam = toy4();
        let mc = induce(&fam, &Realization::new(vec![2, 4, 3, 4])).unwrap();
        let x = mc_reach_exact(&mc, &[3]).unwrap();
        assert!((x[0] - 0.2).abs() < 1e-12);

        let absorbing = chain(vec![vec![(0, 1.0)], vec![(1, 1.0)]]);
        assert_eq!(mc_reach_exact(&absorbing, &[1]).unwrap()[0], 0.0);

        let direct = chain(vec![vec![(1, 1.0)], vec![(1, 1.0)]]);
        assert_eq!(mc_reach_exact(&direct, &[1]).unwrap()[0], 1.0);
    }

    #[test]
    fn exact_solver_refuses_large_chains() {
        let rows = (0..EXACT_STATE_LIMIT + 1).map(|s| vec![(s, 1.0)]).collect();
        assert!(matches!(
            mc_reach_exact(&chain(rows), &[0]),
            Err(Error::TooManyStates { .. })
        ));
    }

    #[test]
    fn empty_or_unknown_targets_are_rejected() {
        let mc = chain(vec![vec![(0, 1.0)]]);
        assert_eq!(mc_reach(&mc, &[], 1e-8), Err(Error::EmptyTarget));
        assert_eq!(mc_reach(&mc, &[4], 1e-8), Err(Error::UnknownState(4)));
    }

    #[test]
    fn loops_converge_to_least_fixpoint() {
        // 0 <-> 1 with a leak to the target 2 and the sink 3
        let mc = chain(vec![
            vec![(1, 0.9), (2, 0.1)],
            vec![(0, 0.5), (1, 0.3), (3, 0.2)],
            vec![(2, 1.0)],
            vec![(3, 1.0)],
        ]);
        let vi = mc_reach(&mc, &[2], 1e-12).unwrap();
        let exact = mc_reach_exact(&mc, &[2]).unwrap();
        for s in 0..4 {
            assert!((vi[s] - exact[s]).abs() < 1e-9, "{s}: {} vs {}", vi[s], exact[s]);
        }
        // a closed loop without targets is precomputed to zero
        let closed = chain(vec![vec![(1, 1.0)], vec![(0, 1.0)], vec![(2, 1.0)]]);
        assert_eq!(mc_reach(&closed, &[2], 1e-8).unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn iterates_are_monotone_from_below() {
        let mc = chain(vec![
            vec![(0, 0.4), (1, 0.3), (4, 0.3)],
            vec![(0, 0.6), (2, 0.4)],
            vec![(1, 0.7), (3, 0.3)],
            vec![(3, 1.0)],
            vec![(4, 1.0)],
        ]);
        let mut last: Option<Vec<f64>> = None;
        let mut obs = |sweep: usize, x: &[f64]| {
            if sweep.is_multiple_of(10) {
                if let Some(prev) = &last {
                    assert!(prev.iter().zip(x).all(|(a, b)| a <= b));
                }
                last = Some(x.to_vec());
            }
        };
        gauss_seidel_mc(&mc, &[3], 1e-14, Some(&mut obs)).unwrap();
    }

    #[test]
    fn evaluate_examples() {
        let phi = Property::new(Bound::AtMost, 0.3, [3]).unwrap();
        assert_eq!(evaluate(0.8, &phi, DEFAULT_ETA), Verdict::Viol);
        assert_eq!(evaluate(0.3, &phi, DEFAULT_ETA), Verdict::Sat);
        assert_eq!(evaluate(0.2, &phi, DEFAULT_ETA), Verdict::Sat);
        let live = Property::new(Bound::AtLeast, 0.5, [3]).unwrap();
        assert_eq!(evaluate(0.5, &live, 0.0), Verdict::Sat);
        assert_eq!(evaluate(0.49, &live, DEFAULT_ETA), Verdict::Viol);
    }

    #[test]
    fn property_validation() {
        assert_eq!(
            Property::new(Bound::AtMost, 1.2, [0]),
            Err(Error::ThresholdOutOfRange(1.2))
        );
        assert_eq!(Property::new(Bound::AtMost, 0.2, []), Err(Error::EmptyTarget));
        assert!(Objective::new(Direction::Min, [0], 1.0).is_err());
        assert!(Property::new(Bound::AtMost, 0.2, [0]).unwrap().is_safety());
        assert!(!Property::new(Bound::AtLeast, 0.2, [0]).unwrap().is_safety());
    }

    #[test]
    fn mdp_min_max_on_a_loop_with_exit() {
        // state 0: stay in a loop with 1, or exit to target 2; state 1: back to 0 or sink 3
        let mdp = Mdp::new(
            0,
            vec![
                vec![Distribution::point(1), Distribution::new([(2, 0.5), (3, 0.5)]).unwrap()],
                vec![Distribution::point(0), Distribution::point(3)],
                vec![Distribution::point(2)],
                vec![Distribution::point(3)],
            ],
        )
        .unwrap();
        let (max, max_s) = mdp_extreme(&mdp, &[2], Direction::Max, 1e-10).unwrap();
        let (min, min_s) = mdp_extreme(&mdp, &[2], Direction::Min, 1e-10).unwrap();
        assert!((max[0] - 0.5).abs() < 1e-9 && (max[1] - 0.5).abs() < 1e-9);
        assert_eq!(min[0], 0.0);
        assert_eq!(min[1], 0.0);
        let induced = mc_reach(&mdp.induced_mc(&max_s).unwrap(), &[2], 1e-10).unwrap();
        assert!((induced[0] - 0.5).abs() < 1e-9);
        assert_eq!(max_s.action(0), 1);
        let induced = mc_reach(&mdp.induced_mc(&min_s).unwrap(), &[2], 1e-10).unwrap();
        assert_eq!(induced[0], 0.0);
    }

    #[test]
    fn mdp_without_actions_is_an_error() {
        let mdp = Mdp::new(0, vec![vec![Distribution::point(1)], vec![]]).unwrap();
        assert_eq!(
            mdp_extreme(&mdp, &[1], Direction::Max, 1e-8).unwrap_err(),
            Error::NoActions(1)
        );
    }

    #[test]
    fn single_action_mdp_matches_chain() {
        let fam = toy4();
        let mc = induce(&fam, &Realization::new(vec![2, 3, 3, 4])).unwrap();
        let mdp = Mdp::new(0, mc.rows().iter().map(|r| vec![r.clone()]).collect()).unwrap();
        let want = mc_reach(&mc, &[3], 1e-10).unwrap();
        for dir in [Direction::Min, Direction::Max] {
            let (got, _) = mdp_extreme(&mdp, &[3], dir, 1e-10).unwrap();
            assert_eq!(got, want);
        }
    }
}
