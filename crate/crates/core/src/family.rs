//! Markov chains, families of Markov chains with parameter holes, and the
//! realization/subfamily/conflict vocabulary used by every synthesis method.
//!
//! States and parameters are dense indices. A family maps every state to a
//! distribution over parameters; a realization fixes each parameter to one
//! state of its domain, and the induced chain sends the parameter's
//! probability mass to that state.

use std::fmt;
use std::sync::Arc;

use crate::abstraction::BoundsVec;
use crate::error::{Error, Result};

/// Absolute tolerance on distribution sums.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// A finite probability distribution over dense keys (states or parameters).
///
/// Entries are sorted by key, merged and free of zero-probability keys.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    entries: Vec<(usize, f64)>,
}

impl Distribution {
    pub fn new(entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut raw: Vec<(usize, f64)> = entries.into_iter().collect();
        for &(key, value) in &raw {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ProbabilityOutOfRange { key, value });
            }
        }
        raw.sort_by_key(|&(k, _)| k);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(raw.len());
        for (key, value) in raw {
            match entries.last_mut() {
                Some((last, acc)) if *last == key => *acc += value,
                _ => entries.push((key, value)),
            }
        }
        entries.retain(|&(_, p)| p > 0.0);
        // merged duplicates can round past 1
        for e in entries.iter_mut() {
            e.1 = e.1.min(1.0);
        }
        if entries.is_empty() {
            return Err(Error::EmptySupport);
        }
        let sum: f64 = entries.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotStochastic { sum });
        }
        Ok(Distribution { entries })
    }

    /// Dirac distribution on `key`.
    pub fn point(key: usize) -> Self {
        Distribution {
            entries: vec![(key, 1.0)],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(k, _)| k)
    }

    pub fn prob(&self, key: usize) -> f64 {
        self.entries
            .binary_search_by_key(&key, |&(k, _)| k)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A discrete-time Markov chain over states `0..num_states()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mc {
    initial: usize,
    rows: Vec<Distribution>,
}

impl Mc {
    pub fn new(initial: usize, rows: Vec<Distribution>) -> Result<Self> {
        let n = rows.len();
        if initial >= n {
            return Err(Error::UnknownState(initial));
        }
        for row in &rows {
            if let Some(bad) = row.support().find(|&t| t >= n) {
                return Err(Error::UnknownState(bad));
            }
        }
        Ok(Mc { initial, rows })
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, state: usize) -> &Distribution {
        &self.rows[state]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn is_absorbing(&self, state: usize) -> bool {
        let row = &self.rows[state];
        row.len() == 1 && row.prob(state) > 0.0
    }

    /// States reachable from the initial state, as a mask.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.rows.len()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(s) = stack.pop() {
            for t in self.rows[s].support() {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }
}

/// A family of Markov chains: states, parameters with domains of target
/// states, and one distribution over parameters per state.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    state_names: Vec<String>,
    initial: usize,
    param_names: Vec<String>,
    domains: Vec<Vec<usize>>,
    templates: Vec<Distribution>,
}

impl Family {
    pub fn new(
        state_names: Vec<String>,
        initial: usize,
        param_names: Vec<String>,
        domains: Vec<Vec<usize>>,
        templates: Vec<Distribution>,
    ) -> Result<Self> {
        let n = state_names.len();
        if initial >= n {
            return Err(Error::UnknownState(initial));
        }
        if param_names.len() != domains.len() {
            return Err(Error::InvalidSubfamily(format!(
                "{} parameter names but {} domains",
                param_names.len(),
                domains.len()
            )));
        }
        for (k, dom) in domains.iter().enumerate() {
            if dom.is_empty() {
                return Err(Error::EmptyDomain(k));
            }
            if let Some(&bad) = dom.iter().find(|&&v| v >= n) {
                return Err(Error::UnknownState(bad));
            }
            for (i, v) in dom.iter().enumerate() {
                if dom[..i].contains(v) {
                    return Err(Error::InvalidSubfamily(format!("parameter {k} lists state {v} twice")));
                }
            }
        }
        if templates.len() != n {
            return Err(Error::MissingTemplate {
                state: templates.len().min(n),
            });
        }
        for tpl in &templates {
            if let Some(bad) = tpl.support().find(|&k| k >= domains.len()) {
                return Err(Error::UnknownParameter(bad));
            }
        }
        Ok(Family {
            state_names,
            initial,
            param_names,
            domains,
            templates,
        })
    }

    /// Builds a family with generated names `s0, s1, ...` and `p0, p1, ...`.
    pub fn unnamed(initial: usize, domains: Vec<Vec<usize>>, templates: Vec<Distribution>) -> Result<Self> {
        let states = (0..templates.len()).map(|i| format!("s{i}")).collect();
        let params = (0..domains.len()).map(|k| format!("p{k}")).collect();
        Family::new(states, initial, params, domains, templates)
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_params(&self) -> usize {
        self.domains.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn domain(&self, param: usize) -> &[usize] {
        &self.domains[param]
    }

    pub fn domains(&self) -> &[Vec<usize>] {
        &self.domains
    }

    pub fn template(&self, state: usize) -> &Distribution {
        &self.templates[state]
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.state_names[state]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn param_name(&self, param: usize) -> &str {
        &self.param_names[param]
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|s| s == name)
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|p| p == name)
    }

    /// Parameters whose declared domain has more than one value.
    pub fn multi_valued_params(&self) -> Vec<usize> {
        (0..self.num_params()).filter(|&k| self.domains[k].len() > 1).collect()
    }

    /// The subfamily containing every realization.
    pub fn full_subfamily(&self) -> Subfamily {
        Subfamily {
            domains: self.domains.clone(),
            bounds: Vec::new(),
        }
    }

    pub fn check_realization(&self, r: &Realization) -> Result<()> {
        if r.0.len() != self.num_params() {
            return Err(Error::InvalidRealization(format!(
                "expected {} parameter values, got {}",
                self.num_params(),
                r.0.len()
            )));
        }
        for (k, &v) in r.0.iter().enumerate() {
            if !self.domains[k].contains(&v) {
                return Err(Error::InvalidRealization(format!(
                    "value {} is not in the domain of parameter {}",
                    v, self.param_names[k]
                )));
            }
        }
        Ok(())
    }

    /// Renders a realization as `{name=value, ...}` over multi-valued parameters.
    pub fn display_realization(&self, r: &Realization) -> String {
        let parts: Vec<String> = self
            .multi_valued_params()
            .into_iter()
            .map(|k| format!("{}={}", self.param_names[k], self.state_names[r.value(k)]))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// A total assignment of parameters to states, indexed by parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Realization(Vec<usize>);

impl Realization {
    pub fn new(values: Vec<usize>) -> Self {
        Realization(values)
    }

    pub fn value(&self, param: usize) -> usize {
        self.0[param]
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Builds the chain induced by `r`: the probability of parameter `k` in the
/// template of `s` moves to the state `r(k)`, summing over parameters that
/// share a target.
pub fn induce(family: &Family, r: &Realization) -> Result<Mc> {
    family.check_realization(r)?;
    let rows = family
        .templates
        .iter()
        .map(|tpl| Distribution::new(tpl.iter().map(|(k, p)| (r.value(k), p))))
        .collect::<Result<Vec<_>>>()?;
    Mc::new(family.initial, rows)
}

/// A hyper-rectangle of realizations: each parameter restricted to a
/// non-empty subset of its declared domain, kept in declared order.
#[derive(Debug, Clone)]
pub struct Subfamily {
    domains: Vec<Vec<usize>>,
    bounds: Vec<Arc<BoundsVec>>,
}

impl PartialEq for Subfamily {
    fn eq(&self, other: &Self) -> bool {
        self.domains == other.domains
    }
}

impl Subfamily {
    pub fn new(family: &Family, domains: Vec<Vec<usize>>) -> Result<Self> {
        if domains.len() != family.num_params() {
            return Err(Error::InvalidSubfamily(format!(
                "expected {} domains, got {}",
                family.num_params(),
                domains.len()
            )));
        }
        let mut ordered = Vec::with_capacity(domains.len());
        for (k, dom) in domains.into_iter().enumerate() {
            if dom.is_empty() {
                return Err(Error::EmptyDomain(k));
            }
            if let Some(v) = dom.iter().find(|v| !family.domain(k).contains(v)) {
                return Err(Error::InvalidSubfamily(format!(
                    "value {v} is outside the declared domain of parameter {}",
                    family.param_name(k)
                )));
            }
            let kept: Vec<usize> = family.domain(k).iter().copied().filter(|v| dom.contains(v)).collect();
            ordered.push(kept);
        }
        Ok(Subfamily {
            domains: ordered,
            bounds: Vec::new(),
        })
    }

    pub fn domain(&self, param: usize) -> &[usize] {
        &self.domains[param]
    }

    pub fn domains(&self) -> &[Vec<usize>] {
        &self.domains
    }

    pub fn num_params(&self) -> usize {
        self.domains.len()
    }

    pub fn member_count(&self) -> u128 {
        member_count(self)
    }

    pub fn is_singleton(&self) -> bool {
        self.domains.iter().all(|d| d.len() == 1)
    }

    pub fn is_multi_valued(&self, param: usize) -> bool {
        self.domains[param].len() > 1
    }

    pub fn multi_valued_params(&self) -> Vec<usize> {
        (0..self.domains.len()).filter(|&k| self.domains[k].len() > 1).collect()
    }

    pub fn contains(&self, r: &Realization) -> bool {
        r.0.len() == self.domains.len() && r.0.iter().zip(&self.domains).all(|(v, d)| d.contains(v))
    }

    /// Members in lexicographic order: parameter 0 is most significant,
    /// values follow domain order.
    pub fn members(&self) -> impl Iterator<Item = Realization> + '_ {
        let mut pos = Some(vec![0usize; self.domains.len()]);
        std::iter::from_fn(move || {
            let current = pos.take()?;
            let r = self.realization_at(&current);
            pos = odometer_step(&self.domains, current, self.domains.len());
            Some(r)
        })
    }

    pub fn lex_least(&self) -> Realization {
        Realization(self.domains.iter().map(|d| d[0]).collect())
    }

    /// Copy with the domain of `param` replaced by `values` (in declared order).
    /// Cached bounds are not carried over.
    pub fn restrict(&self, param: usize, values: &[usize]) -> Result<Subfamily> {
        let kept: Vec<usize> = self.domains[param]
            .iter()
            .copied()
            .filter(|v| values.contains(v))
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyDomain(param));
        }
        let mut domains = self.domains.clone();
        domains[param] = kept;
        Ok(Subfamily {
            domains,
            bounds: Vec::new(),
        })
    }

    /// Whether some member agrees with `r` on every parameter in `params`.
    pub fn intersects(&self, r: &Realization, params: &[usize]) -> bool {
        params.iter().all(|&k| self.domains[k].contains(&r.value(k)))
    }

    pub fn cached_bounds(&self, targets: &[usize]) -> Option<Arc<BoundsVec>> {
        self.bounds.iter().find(|b| b.targets == targets).cloned()
    }

    pub fn all_cached_bounds(&self) -> &[Arc<BoundsVec>] {
        &self.bounds
    }

    /// Caches bounds for their target set; the first stored value wins.
    pub fn store_bounds(&mut self, bounds: Arc<BoundsVec>) {
        if self.cached_bounds(&bounds.targets).is_none() {
            self.bounds.push(bounds);
        }
    }

    fn realization_at(&self, pos: &[usize]) -> Realization {
        Realization(pos.iter().zip(&self.domains).map(|(&i, d)| d[i]).collect())
    }

    /// Lexicographic rank of a position vector.
    fn rank(&self, pos: &[usize]) -> u128 {
        pos.iter().zip(&self.domains).fold(0u128, |acc, (&i, d)| {
            acc.saturating_mul(d.len() as u128).saturating_add(i as u128)
        })
    }
}

/// Number of realizations in `sub`, saturating at `u128::MAX`.
pub fn member_count(sub: &Subfamily) -> u128 {
    sub.domains
        .iter()
        .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128))
}

/// Advances the odometer at digit `digit - 1` (carrying toward digit 0) and
/// zeroes all less significant digits. `None` once the odometer overflows.
fn odometer_step(domains: &[Vec<usize>], mut pos: Vec<usize>, digit: usize) -> Option<Vec<usize>> {
    for p in pos.iter_mut().skip(digit) {
        *p = 0;
    }
    let mut i = digit;
    while i > 0 {
        i -= 1;
        pos[i] += 1;
        if pos[i] < domains[i].len() {
            return Some(pos);
        }
        pos[i] = 0;
    }
    None
}

/// All members of `scope` that agree with `r` on `relevant`.
pub fn generalization(r: &Realization, relevant: &[usize], scope: &Subfamily) -> Vec<Realization> {
    let mut restricted = scope.clone();
    for &k in relevant {
        let v = r.value(k);
        if !scope.domains[k].contains(&v) {
            return Vec::new();
        }
        restricted.domains[k] = vec![v];
    }
    restricted.members().collect()
}

/// A set of relevant parameters together with the violating realization it
/// was derived from. Every member of the scope agreeing with the reference on
/// the relevant parameters violates the property the conflict was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct Conflict {
    relevant: Vec<usize>,
    reference: Realization,
    scope: Subfamily,
}

impl Conflict {
    /// Parameters with a singleton domain in `scope` are dropped.
    pub fn new(relevant: impl IntoIterator<Item = usize>, reference: Realization, scope: Subfamily) -> Self {
        let mut relevant: Vec<usize> = relevant.into_iter().filter(|&k| scope.is_multi_valued(k)).collect();
        relevant.sort_unstable();
        relevant.dedup();
        Conflict {
            relevant,
            reference,
            scope: Subfamily {
                domains: scope.domains,
                bounds: Vec::new(),
            },
        }
    }

    pub fn relevant(&self) -> &[usize] {
        &self.relevant
    }

    pub fn reference(&self) -> &Realization {
        &self.reference
    }

    pub fn scope(&self) -> &Subfamily {
        &self.scope
    }

    pub fn covers(&self, r: &Realization) -> bool {
        self.relevant.iter().all(|&k| r.value(k) == self.reference.value(k))
    }

    pub fn generalization(&self) -> Vec<Realization> {
        generalization(&self.reference, &self.relevant, &self.scope)
    }
}

#[derive(Debug, Clone)]
enum Cursor {
    Start,
    At(Vec<usize>),
    Done,
}

/// Learner bookkeeping: a subfamily, the conflicts known inside it, and a
/// resumable lexicographic cursor over the members not yet ruled out.
///
/// When the cursor lands on a member covered by a conflict, it jumps past the
/// whole block of members sharing the conflict's relevant coordinates.
#[derive(Debug, Clone)]
pub struct ConflictStore {
    scope: Subfamily,
    conflicts: Vec<Conflict>,
    cursor: Cursor,
    skipped: u128,
}

impl ConflictStore {
    pub fn new(scope: Subfamily) -> Self {
        ConflictStore {
            scope,
            conflicts: Vec::new(),
            cursor: Cursor::Start,
            skipped: 0,
        }
    }

    pub fn with_conflicts(scope: Subfamily, conflicts: impl IntoIterator<Item = Conflict>) -> Self {
        let mut store = ConflictStore::new(scope);
        for c in conflicts {
            store.add(c);
        }
        store
    }

    pub fn scope(&self) -> &Subfamily {
        &self.scope
    }

    pub fn scope_mut(&mut self) -> &mut Subfamily {
        &mut self.scope
    }

    pub fn conflicts(&self) -> &[Conflict] {
        &self.conflicts
    }

    /// Members the cursor has jumped over because a conflict covered them.
    pub fn skipped(&self) -> u128 {
        self.skipped
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self.cursor, Cursor::Done)
    }

    /// Records a conflict; ones that cannot touch this scope are dropped.
    pub fn add(&mut self, conflict: Conflict) {
        if self.scope.intersects(&conflict.reference, &conflict.relevant) {
            self.conflicts.push(conflict);
        }
    }

    /// A fresh store over `child` (a subset of this scope) that keeps every
    /// conflict still relevant to it.
    pub fn restrict_to(&self, child: Subfamily) -> ConflictStore {
        ConflictStore::with_conflicts(child, self.conflicts.iter().cloned())
    }

    /// Next member not covered by any conflict, in lexicographic order.
    pub fn next_unpruned(&mut self) -> Option<Realization> {
        let n = self.scope.domains.len();
        let mut pos = match std::mem::replace(&mut self.cursor, Cursor::Done) {
            Cursor::Start => vec![0; n],
            Cursor::At(p) => odometer_step(&self.scope.domains, p, n)?,
            Cursor::Done => return None,
        };
        'scan: loop {
            let r = self.scope.realization_at(&pos);
            for c in &self.conflicts {
                if !c.covers(&r) {
                    continue;
                }
                let from = self.scope.rank(&pos);
                let digit = c.relevant.iter().max().map_or(0, |&k| k + 1);
                match odometer_step(&self.scope.domains, pos, digit) {
                    Some(next) => {
                        self.skipped += self.scope.rank(&next) - from;
                        pos = next;
                        continue 'scan;
                    }
                    None => {
                        self.skipped += member_count(&self.scope) - from;
                        return None;
                    }
                }
            }
            self.cursor = Cursor::At(pos);
            return Some(r);
        }
    }
}

/// Members of `sub` outside every conflict's generalization, in lexicographic order.
pub fn iterate_unpruned(sub: &Subfamily, conflicts: &[Conflict]) -> impl Iterator<Item = Realization> {
    let mut store = ConflictStore::with_conflicts(sub.clone(), conflicts.iter().cloned());
    std::iter::from_fn(move || store.next_unpruned())
}
