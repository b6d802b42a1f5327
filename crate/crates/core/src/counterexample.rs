//! Counterexample-based conflicts for violating family members.
//!
//! A candidate counterexample expands a set of states `C` of the member chain
//! and replaces every other state by a shortcut to a fresh target `top` with
//! probability `gamma(s)` (and to a fresh sink otherwise). When `gamma` is a
//! lower bound on the reachability probability valid for every member of a
//! subfamily, a rerouted chain that already violates a safety property proves
//! that every member agreeing on the parameters of `C` violates it too.
//! Liveness works dually with upper bounds.

use std::collections::HashMap;

use crate::abstraction::BoundsVec;
use crate::error::{Error, Result};
use crate::family::{generalization, induce, Conflict, Distribution, Family, Mc, Realization, Subfamily};
use crate::numerics::{evaluate, mc_reach, Property, Verdict};

pub const ORACLE_MEMBER_LIMIT: u128 = 4096;
pub const ORACLE_PARAM_LIMIT: usize = 16;

/// A rerouted chain: the base states followed by the fresh `top` and `bottom` sinks.
#[derive(Debug, Clone)]
pub struct Rerouting {
    pub mc: Mc,
    pub top: usize,
    pub bottom: usize,
}

impl Rerouting {
    /// `targets` extended with the fresh target state.
    pub fn targets(&self, targets: &[usize]) -> Vec<usize> {
        let mut t = targets.to_vec();
        t.push(self.top);
        t
    }
}

pub fn reroute(mc: &Mc, expanded: &[bool], gamma: &[f64]) -> Result<Rerouting> {
    let n = mc.num_states();
    let (top, bottom) = (n, n + 1);
    let mut rows = Vec::with_capacity(n + 2);
    for s in 0..n {
        if expanded.get(s).copied().unwrap_or(false) {
            rows.push(mc.row(s).clone());
            continue;
        }
        let g = gamma.get(s).copied().unwrap_or(f64::NAN);
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::GammaOutOfRange { state: s, value: g });
        }
        rows.push(Distribution::new([(top, g), (bottom, 1.0 - g)])?);
    }
    rows.push(Distribution::point(top));
    rows.push(Distribution::point(bottom));
    Ok(Rerouting {
        mc: Mc::new(mc.initial(), rows)?,
        top,
        bottom,
    })
}

/// Expanded region and exploration horizon for a set of relevant parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Exploration {
    pub expanded: Vec<bool>,
    /// Reachable states bordering the expanded region whose templates mention
    /// a parameter that is not relevant yet, ascending.
    pub horizon: Vec<usize>,
}

impl Exploration {
    pub fn expanded_states(&self) -> Vec<usize> {
        (0..self.expanded.len()).filter(|&s| self.expanded[s]).collect()
    }
}

/// Relevance mask: the given parameters plus every parameter fixed in `scope`.
pub fn relevance_mask(scope: &Subfamily, relevant: &[usize]) -> Vec<bool> {
    let mut mask: Vec<bool> = (0..scope.num_params()).map(|k| !scope.is_multi_valued(k)).collect();
    for &k in relevant {
        mask[k] = true;
    }
    mask
}

fn covered(family: &Family, s: usize, mask: &[bool]) -> bool {
    family.template(s).support().all(|k| mask[k])
}

/// States reachable in `mc` from the initial state through states whose
/// templates only use relevant parameters (per `mask`), and the horizon
/// bordering them.
pub fn reachable_via_holes(mc: &Mc, family: &Family, mask: &[bool]) -> Exploration {
    let n = mc.num_states();
    let mut expanded = vec![false; n];
    let mut in_horizon = vec![false; n];
    let init = mc.initial();
    let mut queue = std::collections::VecDeque::new();
    if covered(family, init, mask) {
        expanded[init] = true;
        queue.push_back(init);
    } else {
        in_horizon[init] = true;
    }
    while let Some(s) = queue.pop_front() {
        for t in mc.row(s).support() {
            if expanded[t] || in_horizon[t] {
                continue;
            }
            if covered(family, t, mask) {
                expanded[t] = true;
                queue.push_back(t);
            } else {
                in_horizon[t] = true;
            }
        }
    }
    let horizon = (0..n).filter(|&s| in_horizon[s]).collect();
    Exploration { expanded, horizon }
}

/// The horizon state with the fewest parameters outside `mask`; ties go to
/// the smallest state index.
pub fn choose_to_expand(horizon: &[usize], mask: &[bool], family: &Family) -> Result<usize> {
    horizon
        .iter()
        .copied()
        .min_by_key(|&s| (family.template(s).support().filter(|&k| !mask[k]).count(), s))
        .ok_or(Error::EmptyHorizon)
}

/// Rerouting vector for a property: lower bounds for safety, upper bounds for
/// liveness, or the trivial 0/1 vector without bounds.
pub fn gamma_for(property: &Property, bounds: Option<&BoundsVec>, num_states: usize) -> Vec<f64> {
    match (property.is_safety(), bounds) {
        (true, Some(b)) => b.lb.clone(),
        (false, Some(b)) => b.ub.clone(),
        (true, None) => vec![0.0; num_states],
        (false, None) => vec![1.0; num_states],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleResult {
    pub conflict: Conflict,
    pub expanded: Vec<usize>,
    /// Model checks of rerouted chains performed.
    pub checks: usize,
}

/// Greedy state expansion. `mc` must be the chain induced by `reference` and
/// must violate `property`; `gamma` must be a valid bound for every member
/// of `scope` in the direction the property requires.
#[allow(clippy::too_many_arguments)]
pub fn construct_conflict(
    family: &Family,
    reference: &Realization,
    mc: &Mc,
    property: &Property,
    gamma: &[f64],
    scope: &Subfamily,
    tol: f64,
    eta: f64,
) -> Result<CounterexampleResult> {
    let base = mc_reach(mc, &property.targets, tol)?[mc.initial()];
    if evaluate(base, property, eta) == Verdict::Sat {
        return Err(Error::NotViolating);
    }
    expand_conflict(family, reference, mc, property, gamma, scope, tol, eta)
}

/// The expansion loop without the initial violation check.
#[allow(clippy::too_many_arguments)]
pub(crate) fn expand_conflict(
    family: &Family,
    reference: &Realization,
    mc: &Mc,
    property: &Property,
    gamma: &[f64],
    scope: &Subfamily,
    tol: f64,
    eta: f64,
) -> Result<CounterexampleResult> {
    let mut relevant: Vec<usize> = Vec::new();
    let mut mask = relevance_mask(scope, &relevant);
    let mut checks = 0;
    loop {
        let exploration = reachable_via_holes(mc, family, &mask);
        let rerouted = reroute(mc, &exploration.expanded, gamma)?;
        let targets = rerouted.targets(&property.targets);
        let value = mc_reach(&rerouted.mc, &targets, tol)?[mc.initial()];
        checks += 1;
        if evaluate(value, property, eta) == Verdict::Viol {
            return Ok(CounterexampleResult {
                conflict: Conflict::new(relevant, reference.clone(), scope.clone()),
                expanded: exploration.expanded_states(),
                checks,
            });
        }
        if exploration.horizon.is_empty() {
            return Err(Error::InvalidBounds);
        }
        let s = choose_to_expand(&exploration.horizon, &mask, family)?;
        for k in family.template(s).support() {
            if !mask[k] {
                mask[k] = true;
                relevant.push(k);
            }
        }
    }
}

/// Minimum-cardinality conflict by exhaustive search: parameter subsets are
/// tried by increasing size (lexicographic within a size) and accepted once
/// every member of the scoped generalization violates `property`.
pub fn minimal_conflict_oracle(
    family: &Family,
    reference: &Realization,
    property: &Property,
    scope: &Subfamily,
    tol: f64,
    eta: f64,
) -> Result<Conflict> {
    let members = scope.member_count();
    if members > ORACLE_MEMBER_LIMIT {
        return Err(Error::OracleLimit(format!(
            "{members} members (limit {ORACLE_MEMBER_LIMIT})"
        )));
    }
    let params = scope.multi_valued_params();
    if params.len() > ORACLE_PARAM_LIMIT {
        return Err(Error::OracleLimit(format!(
            "{} multi-valued parameters (limit {ORACLE_PARAM_LIMIT})",
            params.len()
        )));
    }
    if !scope.contains(reference) {
        return Err(Error::InvalidRealization("reference is outside the scope".into()));
    }
    let mut violates: HashMap<Realization, bool> = HashMap::new();
    for r in scope.members() {
        let mc = induce(family, &r)?;
        let v = mc_reach(&mc, &property.targets, tol)?[mc.initial()];
        violates.insert(r, evaluate(v, property, eta) == Verdict::Viol);
    }
    if !violates[reference] {
        return Err(Error::NotViolating);
    }
    for size in 0..=params.len() {
        for subset in combinations(params.len(), size) {
            let chosen: Vec<usize> = subset.iter().map(|&i| params[i]).collect();
            if generalization(reference, &chosen, scope).iter().all(|r| violates[r]) {
                return Ok(Conflict::new(chosen, reference.clone(), scope.clone()));
            }
        }
    }
    unreachable!("the full parameter set always yields a valid conflict")
}

/// `size`-element subsets of `0..n` in lexicographic order.
fn combinations(n: usize, size: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = (size <= n).then(|| (0..size).collect::<Vec<_>>());
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut idx = current.clone();
        let mut i = size;
        while i > 0 {
            i -= 1;
            if idx[i] < n - size + i {
                idx[i] += 1;
                for j in i + 1..size {
                    idx[j] = idx[j - 1] + 1;
                }
                next = Some(idx);
                break;
            }
        }
        Some(current)
    })
}
