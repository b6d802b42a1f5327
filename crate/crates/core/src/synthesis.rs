//! Synthesis drivers: one-by-one enumeration, CEGIS, abstraction refinement
//! (AR) and the hybrid loop that alternates AR and CEGIS.
//!
//! All drivers share one search context. A member is accepted when it
//! satisfies every property of the specification; with an objective, each
//! accepted member becomes the incumbent and adds an improvement constraint
//! that later members must meet, until the search space is exhausted.
//!
//! The queue holds disjoint subfamilies. Each entry owns a conflict store
//! (its learner state) and the bounds of the closest analysed ancestor, so
//! CEGIS can use refined bounds as soon as AR produces them. Conflicts are
//! only ever applied inside the subfamily whose bounds produced them.

use std::collections::VecDeque;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::abstraction::{compute_bounds_for, split_subfamily, BoundsVec};
use crate::counterexample::{expand_conflict, gamma_for};
use crate::error::{Error, Result};
use crate::family::{induce, member_count, Conflict, ConflictStore, Family, Mc, Realization, Subfamily};
use crate::numerics::{evaluate, mc_reach, Bound, Direction, Property, Specification, Tolerances, Verdict};

pub const DEFAULT_MEMBER_CAP: u128 = 10_000_000;
pub const DELTA_MIN: f64 = 1.0 / 64.0;
pub const DELTA_MAX: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    OneByOne,
    Cegis,
    Ar,
    Hybrid,
}

/// Which rerouting vector CEGIS uses when building counterexamples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsMode {
    Trivial,
    Family,
}

/// How the hybrid loop measures effort: model-check invocations or seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostUnits {
    Deterministic,
    WallClock,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisConfig {
    pub tolerances: Tolerances,
    pub bounds: BoundsMode,
    pub cost_units: CostUnits,
    pub member_cap: u128,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            tolerances: Tolerances::default(),
            bounds: BoundsMode::Family,
            cost_units: CostUnits::Deterministic,
            member_cap: DEFAULT_MEMBER_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// A member satisfying every property, with the value of each property.
    Feasible {
        realization: Realization,
        values: Vec<f64>,
    },
    Infeasible,
    /// The best (or `eps`-close to best) satisfying member and its objective value.
    Optimal {
        realization: Realization,
        value: f64,
    },
}

impl Outcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, Outcome::Infeasible)
    }

    pub fn realization(&self) -> Option<&Realization> {
        match self {
            Outcome::Feasible { realization, .. } | Outcome::Optimal { realization, .. } => Some(realization),
            Outcome::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Stats {
    /// Members examined by the CEGIS oracle.
    pub cegis_iterations: u64,
    /// Subfamilies analysed by the abstraction oracle.
    pub ar_iterations: u64,
    /// Chain and MDP reachability computations, including rerouted chains.
    pub model_checks: u64,
    /// Members ruled out without being examined individually.
    pub pruned: u128,
    /// Members examined individually.
    pub checked: u128,
    pub conflicts: u64,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub outcome: Outcome,
    pub stats: Stats,
}

/// δ after a round: the CEGIS/AR efficiency ratio, clamped to
/// `[DELTA_MIN, DELTA_MAX]`. An AR round that removed nothing yields the
/// upper clamp.
pub fn update_delta(sigma_cegis: f64, sigma_ar: f64) -> f64 {
    if sigma_ar <= 0.0 {
        return DELTA_MAX;
    }
    (sigma_cegis / sigma_ar).clamp(DELTA_MIN, DELTA_MAX)
}

/// Checks every member in lexicographic order.
pub fn one_by_one(family: &Family, spec: &Specification, config: &SynthesisConfig) -> Result<SynthesisResult> {
    let clock = Instant::now();
    let full = family.full_subfamily();
    let members = member_count(&full);
    if members > config.member_cap {
        return Err(Error::MemberCap {
            members,
            cap: config.member_cap,
        });
    }
    let eta = config.tolerances.eta;
    let mut stats = Stats::default();
    let mut best: Option<(Realization, f64)> = None;
    for r in full.members() {
        let eval = evaluate_member(family, spec, &r, config.tolerances.tol)?;
        stats.model_checks += eval.checks;
        stats.checked += 1;
        let sat = spec
            .properties
            .iter()
            .zip(&eval.values)
            .all(|(p, &v)| evaluate(v, p, eta) == Verdict::Sat);
        if !sat {
            continue;
        }
        match (&spec.objective, eval.objective) {
            (None, _) => {
                stats.wall_time_secs = clock.elapsed().as_secs_f64();
                return Ok(SynthesisResult {
                    outcome: Outcome::Feasible {
                        realization: r,
                        values: eval.values,
                    },
                    stats,
                });
            }
            (Some(obj), Some(v)) => {
                if best.as_ref().is_none_or(|(_, b)| obj.better(v, *b)) {
                    best = Some((r, v));
                }
            }
            (Some(_), None) => unreachable!("objective value is computed when an objective exists"),
        }
    }
    stats.wall_time_secs = clock.elapsed().as_secs_f64();
    let outcome = match best {
        Some((realization, value)) => Outcome::Optimal { realization, value },
        None => Outcome::Infeasible,
    };
    Ok(SynthesisResult { outcome, stats })
}

pub fn cegis(family: &Family, spec: &Specification, config: &SynthesisConfig) -> Result<SynthesisResult> {
    let mut s = Synthesizer::new(family, spec, config)?;
    if config.bounds == BoundsMode::Family {
        s.analyse_front()?;
    }
    s.finish_with(|s| {
        while !s.queue.is_empty() {
            if let Some(out) = s.cegis_run(f64::INFINITY)?.decided {
                return Ok(Some(out));
            }
        }
        Ok(None)
    })
}

pub fn abstraction_refinement(
    family: &Family,
    spec: &Specification,
    config: &SynthesisConfig,
) -> Result<SynthesisResult> {
    let s = Synthesizer::new(family, spec, config)?;
    s.finish_with(|s| {
        while !s.queue.is_empty() {
            if let Some(out) = s.ar_run()?.decided {
                return Ok(Some(out));
            }
        }
        Ok(None)
    })
}

pub fn hybrid(family: &Family, spec: &Specification, config: &SynthesisConfig) -> Result<SynthesisResult> {
    let s = Synthesizer::new(family, spec, config)?;
    s.finish_with(|s| s.run_hybrid())
}

pub fn synthesize(
    family: &Family,
    spec: &Specification,
    method: Method,
    config: &SynthesisConfig,
) -> Result<SynthesisResult> {
    match method {
        Method::OneByOne => one_by_one(family, spec, config),
        Method::Cegis => cegis(family, spec, config),
        Method::Ar => abstraction_refinement(family, spec, config),
        Method::Hybrid => hybrid(family, spec, config),
    }
}

/// Optimal synthesis through any driver; the specification must carry an objective.
pub fn optimal_synthesize(
    family: &Family,
    spec: &Specification,
    method: Method,
    config: &SynthesisConfig,
) -> Result<SynthesisResult> {
    if spec.objective.is_none() {
        return Err(Error::MissingObjective);
    }
    synthesize(family, spec, method, config)
}

struct MemberEval {
    mc: Mc,
    values: Vec<f64>,
    objective: Option<f64>,
    checks: u64,
}

fn evaluate_member(family: &Family, spec: &Specification, r: &Realization, tol: f64) -> Result<MemberEval> {
    let mc = induce(family, r)?;
    let mut solved: Vec<(&[usize], f64)> = Vec::new();
    let mut checks = 0;
    let mut value_for = |targets: &'_ [usize], solved: &mut Vec<(&'_ [usize], f64)>| -> Result<f64> {
        if let Some(&(_, v)) = solved.iter().find(|(t, _)| *t == targets) {
            return Ok(v);
        }
        let v = mc_reach(&mc, targets, tol)?[mc.initial()];
        checks += 1;
        Ok(v)
    };
    let mut values = Vec::with_capacity(spec.properties.len());
    for p in &spec.properties {
        let v = value_for(&p.targets, &mut solved)?;
        solved.push((&p.targets, v));
        values.push(v);
    }
    let objective = match &spec.objective {
        Some(o) => Some(value_for(&o.targets, &mut solved)?),
        None => None,
    };
    Ok(MemberEval {
        mc,
        values,
        objective,
        checks,
    })
}

/// A queued subfamily with its learner state.
#[derive(Debug, Clone)]
struct Entry {
    store: ConflictStore,
    inherited: Vec<Arc<BoundsVec>>,
    checked: Vec<Realization>,
}

impl Entry {
    fn new(sub: Subfamily, inherited: Vec<Arc<BoundsVec>>) -> Self {
        Entry {
            store: ConflictStore::new(sub),
            inherited,
            checked: Vec::new(),
        }
    }

    fn bounds_for(&self, targets: &[usize]) -> Option<Arc<BoundsVec>> {
        self.store
            .scope()
            .cached_bounds(targets)
            .or_else(|| self.inherited.iter().find(|b| b.targets == targets).cloned())
    }

    fn remaining(&self) -> u128 {
        member_count(self.store.scope()) - self.checked.len() as u128
    }
}

/// Outcome of one AR step.
#[derive(Debug, Clone, PartialEq)]
pub struct ArRound {
    pub decided: Option<Outcome>,
    /// Members removed from the queue in this step.
    pub pruned: u128,
    pub cost: f64,
}

/// Outcome of one budgeted CEGIS round.
#[derive(Debug, Clone, PartialEq)]
pub struct CegisRound {
    pub decided: Option<Outcome>,
    /// Members examined or skipped by conflicts in this round.
    pub pruned: u128,
    pub cost: f64,
}

enum Examined {
    Rejected,
    Accepted,
    Decided(Outcome),
}

/// Search state shared by the CEGIS, AR and hybrid drivers.
pub struct Synthesizer<'a> {
    family: &'a Family,
    spec: &'a Specification,
    config: SynthesisConfig,
    queue: VecDeque<Entry>,
    improvement: Option<Property>,
    incumbent: Option<(Realization, f64)>,
    stats: Stats,
    clock: Instant,
    delta: f64,
    sigma_ar: f64,
    sigma_cegis: f64,
}

impl<'a> Synthesizer<'a> {
    pub fn new(family: &'a Family, spec: &'a Specification, config: &SynthesisConfig) -> Result<Self> {
        let n = family.num_states();
        for targets in spec
            .properties
            .iter()
            .map(|p| &p.targets)
            .chain(spec.objective.as_ref().map(|o| &o.targets))
        {
            if let Some(&t) = targets.iter().find(|&&t| t >= n) {
                return Err(Error::UnknownState(t));
            }
        }
        let mut queue = VecDeque::new();
        queue.push_back(Entry::new(family.full_subfamily(), Vec::new()));
        Ok(Synthesizer {
            family,
            spec,
            config: *config,
            queue,
            improvement: None,
            incumbent: None,
            stats: Stats::default(),
            clock: Instant::now(),
            delta: 1.0,
            sigma_ar: 0.0,
            sigma_cegis: 0.0,
        })
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma_ar(&self) -> f64 {
        self.sigma_ar
    }

    pub fn sigma_cegis(&self) -> f64 {
        self.sigma_cegis
    }

    /// Undecided subfamilies, front first.
    pub fn queue(&self) -> impl Iterator<Item = &Subfamily> {
        self.queue.iter().map(|e| e.store.scope())
    }

    pub fn incumbent(&self) -> Option<&(Realization, f64)> {
        self.incumbent.as_ref()
    }

    /// Runs hybrid rounds until the queue is empty or a result is found.
    pub fn run_hybrid(&mut self) -> Result<Option<Outcome>> {
        while !self.queue.is_empty() {
            if let Some(out) = self.hybrid_round()? {
                return Ok(Some(out));
            }
        }
        Ok(None)
    }

    /// One AR step, then CEGIS for `cost_AR · δ`, then δ ← σ_CEGIS / σ_AR.
    pub fn hybrid_round(&mut self) -> Result<Option<Outcome>> {
        let ar = self.ar_run()?;
        if ar.decided.is_some() {
            return Ok(ar.decided);
        }
        self.sigma_ar = efficiency(ar.pruned, ar.cost);
        let cegis = self.cegis_run(ar.cost * self.delta)?;
        if cegis.decided.is_some() {
            return Ok(cegis.decided);
        }
        self.sigma_cegis = efficiency(cegis.pruned, cegis.cost);
        self.delta = update_delta(self.sigma_cegis, self.sigma_ar);
        Ok(None)
    }

    /// Pops the front subfamily, computes its bounds and either removes it
    /// (all members violate), accepts a member (all satisfy) or splits it.
    pub fn ar_run(&mut self) -> Result<ArRound> {
        let start = self.cost_now();
        let Some(mut entry) = self.queue.pop_front() else {
            return Ok(ArRound {
                decided: None,
                pruned: 0,
                cost: 0.0,
            });
        };
        self.stats.ar_iterations += 1;
        let bounds = self.analyse(&mut entry)?;
        let props = self.working_properties();
        let init = self.family.initial();
        let eta = self.config.tolerances.eta;
        let singleton = entry.store.scope().is_singleton();
        let mut all_sat = true;
        let mut undecided: Option<usize> = None;
        for (i, p) in props.iter().enumerate() {
            let b = &bounds[self.target_slot(&p.targets)];
            let (lo, hi) = if singleton {
                let mid = 0.5 * (b.lb[init] + b.ub[init]);
                (mid, mid)
            } else {
                (b.lb[init], b.ub[init])
            };
            let (worst, best) = if p.is_safety() { (hi, lo) } else { (lo, hi) };
            if evaluate(best, p, eta) == Verdict::Viol {
                let pruned = entry.remaining();
                self.stats.pruned += pruned;
                return Ok(ArRound {
                    decided: None,
                    pruned,
                    cost: self.cost_now() - start,
                });
            }
            if evaluate(worst, p, eta) == Verdict::Viol {
                all_sat = false;
                undecided.get_or_insert(i);
            }
        }
        if all_sat {
            let Some(r) = entry.store.next_unpruned() else {
                let pruned = entry.remaining();
                self.stats.pruned += pruned;
                return Ok(ArRound {
                    decided: None,
                    pruned,
                    cost: self.cost_now() - start,
                });
            };
            let before = entry.remaining();
            let decided = match self.examine(&mut entry, r)? {
                Examined::Decided(out) => Some(out),
                Examined::Accepted | Examined::Rejected => None,
            };
            let pruned = before - entry.remaining();
            if decided.is_none() {
                self.queue.push_back(entry);
            }
            return Ok(ArRound {
                decided,
                pruned,
                cost: self.cost_now() - start,
            });
        }
        let p = &props[undecided.expect("an undecided property exists")];
        let b = &bounds[self.target_slot(&p.targets)];
        let (left, right) = split_subfamily(self.family, entry.store.scope(), &b.min_scheduler, &b.max_scheduler)?;
        let inherited: Vec<Arc<BoundsVec>> = entry.store.scope().all_cached_bounds().to_vec();
        for child in [left, right] {
            let checked = entry.checked.iter().filter(|r| child.contains(r)).cloned().collect();
            self.queue.push_back(Entry {
                store: entry.store.restrict_to(child),
                inherited: inherited.clone(),
                checked,
            });
        }
        Ok(ArRound {
            decided: None,
            pruned: 0,
            cost: self.cost_now() - start,
        })
    }

    /// Examines unpruned members of queued subfamilies, front first, until
    /// the budget is spent. A partly explored subfamily goes back to the
    /// front of the queue with its conflicts.
    pub fn cegis_run(&mut self, budget: f64) -> Result<CegisRound> {
        let start = self.cost_now();
        let mut pruned: u128 = 0;
        while self.cost_now() - start < budget {
            let Some(mut entry) = self.queue.pop_front() else {
                break;
            };
            let skipped_before = entry.store.skipped();
            let mut exhausted = false;
            let mut decided = None;
            while self.cost_now() - start < budget {
                let Some(r) = entry.store.next_unpruned() else {
                    exhausted = true;
                    break;
                };
                self.stats.cegis_iterations += 1;
                pruned += 1;
                if let Examined::Decided(out) = self.examine(&mut entry, r)? {
                    decided = Some(out);
                    break;
                }
            }
            pruned += entry.store.skipped() - skipped_before;
            if decided.is_some() {
                return Ok(CegisRound {
                    decided,
                    pruned,
                    cost: self.cost_now() - start,
                });
            }
            if exhausted {
                self.stats.pruned += entry.remaining();
            } else {
                self.queue.push_front(entry);
            }
        }
        Ok(CegisRound {
            decided: None,
            pruned,
            cost: self.cost_now() - start,
        })
    }

    fn finish_with(mut self, run: impl FnOnce(&mut Self) -> Result<Option<Outcome>>) -> Result<SynthesisResult> {
        let decided = run(&mut self)?;
        let outcome = match decided {
            Some(out) => out,
            None => match self.incumbent.take() {
                Some((realization, value)) => Outcome::Optimal { realization, value },
                None => Outcome::Infeasible,
            },
        };
        self.stats.wall_time_secs = self.clock.elapsed().as_secs_f64();
        Ok(SynthesisResult {
            outcome,
            stats: self.stats,
        })
    }

    /// Computes and caches bounds of the front entry for every target set.
    fn analyse_front(&mut self) -> Result<()> {
        if let Some(mut entry) = self.queue.pop_front() {
            self.analyse(&mut entry)?;
            self.queue.push_front(entry);
        }
        Ok(())
    }

    fn analyse(&mut self, entry: &mut Entry) -> Result<Vec<Arc<BoundsVec>>> {
        let (bounds, solves) = compute_bounds_for(
            self.family,
            entry.store.scope_mut(),
            &self.target_sets(),
            self.config.tolerances.tol,
        )?;
        self.stats.model_checks += solves as u64;
        Ok(bounds)
    }

    /// Distinct target sets: properties first, then the objective.
    fn target_sets(&self) -> Vec<Vec<usize>> {
        let mut sets: Vec<Vec<usize>> = Vec::new();
        let all = self
            .spec
            .properties
            .iter()
            .map(|p| &p.targets)
            .chain(self.spec.objective.as_ref().map(|o| &o.targets));
        for t in all {
            if !sets.contains(t) {
                sets.push(t.clone());
            }
        }
        sets
    }

    fn target_slot(&self, targets: &[usize]) -> usize {
        self.target_sets()
            .iter()
            .position(|t| t == targets)
            .expect("target set registered")
    }

    fn working_properties(&self) -> Vec<Property> {
        let mut props = self.spec.properties.clone();
        props.extend(self.improvement.clone());
        props
    }

    fn cost_now(&self) -> f64 {
        match self.config.cost_units {
            CostUnits::Deterministic => self.stats.model_checks as f64,
            CostUnits::WallClock => self.clock.elapsed().as_secs_f64(),
        }
    }

    /// Model checks `r`; on violation adds one conflict per violated
    /// property to the entry, on acceptance records the solution.
    fn examine(&mut self, entry: &mut Entry, r: Realization) -> Result<Examined> {
        let tol = self.config.tolerances.tol;
        let eta = self.config.tolerances.eta;
        let eval = evaluate_member(self.family, self.spec, &r, tol)?;
        self.stats.model_checks += eval.checks;
        self.stats.checked += 1;
        entry.checked.push(r.clone());

        let mut violated: Vec<Property> = self
            .spec
            .properties
            .iter()
            .zip(&eval.values)
            .filter(|(p, &v)| evaluate(v, p, eta) == Verdict::Viol)
            .map(|(p, _)| p.clone())
            .collect();
        if let (Some(imp), Some(v)) = (&self.improvement, eval.objective) {
            if evaluate(v, imp, eta) == Verdict::Viol {
                violated.push(imp.clone());
            }
        }

        if violated.is_empty() {
            let Some(objective) = &self.spec.objective else {
                return Ok(Examined::Decided(Outcome::Feasible {
                    realization: r,
                    values: eval.values,
                }));
            };
            let value = eval.objective.expect("objective value computed");
            self.incumbent = Some((r.clone(), value));
            let scope = entry.store.scope().clone();
            entry
                .store
                .add(Conflict::new(scope.multi_valued_params(), r.clone(), scope));
            match improvement_constraint(objective.direction, &objective.targets, objective.eps, value, eta, tol) {
                Some(p) => self.improvement = Some(p),
                None => return Ok(Examined::Decided(Outcome::Optimal { realization: r, value })),
            }
            return Ok(Examined::Accepted);
        }

        let n = self.family.num_states();
        for p in &violated {
            let bounds = match self.config.bounds {
                BoundsMode::Family => entry.bounds_for(&p.targets),
                BoundsMode::Trivial => None,
            };
            let gamma = gamma_for(p, bounds.as_deref(), n);
            let ce = expand_conflict(self.family, &r, &eval.mc, p, &gamma, entry.store.scope(), tol, eta)?;
            self.stats.model_checks += ce.checks as u64;
            self.stats.conflicts += 1;
            entry.store.add(ce.conflict);
        }
        Ok(Examined::Rejected)
    }
}

fn efficiency(progress: u128, cost: f64) -> f64 {
    progress as f64 / cost.max(f64::MIN_POSITIVE)
}

/// The constraint a member must meet to improve on an incumbent with
/// objective value `value`: at least `value / (1 - eps)` when maximizing and
/// at most `value / (1 + eps)` when minimizing, plus a margin that keeps the
/// incumbent itself out. `None` when no probability can meet it.
pub fn improvement_constraint(
    direction: Direction,
    targets: &[usize],
    eps: f64,
    value: f64,
    eta: f64,
    tol: f64,
) -> Option<Property> {
    let margin = 10.0 * tol;
    let (bound, required) = match direction {
        Direction::Max => (Bound::AtLeast, value / (1.0 - eps) + margin),
        Direction::Min => (Bound::AtMost, value / (1.0 + eps) - margin),
    };
    if !(0.0..=1.0).contains(&required) {
        return None;
    }
    // `evaluate` widens thresholds by eta; shift so the effective cut is `required`
    let threshold = match bound {
        Bound::AtLeast => required + eta,
        Bound::AtMost => required - eta,
    };
    Some(Property {
        bound,
        threshold,
        targets: targets.to_vec(),
    })
}
