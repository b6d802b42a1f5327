//! Quotient MDPs over subfamilies, reachability bounds valid for every member,
//! and the splitting step of abstraction refinement.
//!
//! In the quotient, state `s` gets one action per combination of values for
//! the parameters in the support of its template, drawn from the subfamily's
//! restricted domains. Every member chain is a memoryless resolution of that
//! nondeterminism, so min/max reachability brackets all member values.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::family::{Distribution, Family, Realization, Subfamily};
use crate::numerics::{mdp_extreme, Direction, Mdp};

pub use crate::numerics::Scheduler;

pub const ACTION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone)]
pub struct QuotientMdp {
    mdp: Mdp,
    /// Template support per state, ascending parameter index.
    params_at: Vec<Vec<usize>>,
    domains: Vec<Vec<usize>>,
}

impl QuotientMdp {
    pub fn mdp(&self) -> &Mdp {
        &self.mdp
    }

    pub fn num_actions(&self, state: usize) -> usize {
        self.mdp.num_actions(state)
    }

    /// Parameter values selected by `action` at `state`.
    pub fn choice(&self, state: usize, action: usize) -> Vec<(usize, usize)> {
        decode_choice(&self.params_at[state], &self.domains, action)
    }

    /// The action that a member realization takes at `state`.
    pub fn action_of(&self, state: usize, r: &Realization) -> Option<usize> {
        let mut action = 0usize;
        for &k in &self.params_at[state] {
            let dom = &self.domains[k];
            let i = dom.iter().position(|&v| v == r.value(k))?;
            action = action * dom.len() + i;
        }
        Some(action)
    }
}

fn decode_choice(params: &[usize], domains: &[Vec<usize>], mut action: usize) -> Vec<(usize, usize)> {
    let mut out = vec![(0, 0); params.len()];
    for (slot, &k) in params.iter().enumerate().rev() {
        let dom = &domains[k];
        out[slot] = (k, dom[action % dom.len()]);
        action /= dom.len();
    }
    out
}

pub fn build_quotient(family: &Family, sub: &Subfamily) -> Result<QuotientMdp> {
    let n = family.num_states();
    let mut actions = Vec::with_capacity(n);
    let mut params_at = Vec::with_capacity(n);
    for s in 0..n {
        let tpl = family.template(s);
        let params: Vec<usize> = tpl.support().collect();
        let count = params
            .iter()
            .fold(1u128, |acc, &k| acc.saturating_mul(sub.domain(k).len() as u128));
        if count > ACTION_CAP {
            return Err(Error::ActionCap {
                state: s,
                actions: count,
                limit: ACTION_CAP,
            });
        }
        let mut acts = Vec::with_capacity(count as usize);
        for a in 0..count as usize {
            let choice = decode_choice(&params, sub.domains(), a);
            let dist = Distribution::new(tpl.iter().zip(&choice).map(|((_, p), &(_, target))| (target, p)))?;
            acts.push(dist);
        }
        actions.push(acts);
        params_at.push(params);
    }
    Ok(QuotientMdp {
        mdp: Mdp::new(family.initial(), actions)?,
        params_at,
        domains: sub.domains().to_vec(),
    })
}

/// Per-state lower and upper reachability bounds over a subfamily, with the
/// schedulers that attain them in the quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsVec {
    pub targets: Vec<usize>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub min_scheduler: Scheduler,
    pub max_scheduler: Scheduler,
}

impl BoundsVec {
    pub fn lower_at_initial(&self, initial: usize) -> f64 {
        self.lb[initial]
    }
}

fn solve_bounds(quotient: &QuotientMdp, targets: &[usize], tol: f64) -> Result<BoundsVec> {
    let (lb, min_scheduler) = mdp_extreme(&quotient.mdp, targets, Direction::Min, tol)?;
    let (mut ub, max_scheduler) = mdp_extreme(&quotient.mdp, targets, Direction::Max, tol)?;
    // the two solves approximate from below independently; keep lb <= ub
    for (u, &l) in ub.iter_mut().zip(&lb) {
        if *u < l {
            *u = l;
        }
    }
    Ok(BoundsVec {
        targets: targets.to_vec(),
        lb,
        ub,
        min_scheduler,
        max_scheduler,
    })
}

/// Bounds for one target set, served from the subfamily cache when present.
pub fn compute_bounds(family: &Family, sub: &mut Subfamily, targets: &[usize], tol: f64) -> Result<Arc<BoundsVec>> {
    let (mut all, _) = compute_bounds_for(family, sub, &[targets.to_vec()], tol)?;
    Ok(all.remove(0))
}

/// Bounds for several target sets, building the quotient at most once.
/// Returns the bounds in request order and the number of MDP solves performed.
pub fn compute_bounds_for(
    family: &Family,
    sub: &mut Subfamily,
    target_sets: &[Vec<usize>],
    tol: f64,
) -> Result<(Vec<Arc<BoundsVec>>, usize)> {
    let mut quotient: Option<QuotientMdp> = None;
    let mut solves = 0;
    let mut out = Vec::with_capacity(target_sets.len());
    for targets in target_sets {
        let mut sorted = targets.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(b) = sub.cached_bounds(&sorted) {
            out.push(b);
            continue;
        }
        if quotient.is_none() {
            quotient = Some(build_quotient(family, sub)?);
        }
        let b = Arc::new(solve_bounds(quotient.as_ref().unwrap(), &sorted, tol)?);
        solves += 2;
        sub.store_bounds(b.clone());
        out.push(b);
    }
    Ok((out, solves))
}

/// States visited from the initial state when every parameter at each state
/// takes the value chosen by `scheduler`.
fn visited_under(family: &Family, sub: &Subfamily, scheduler: &Scheduler) -> Vec<bool> {
    let n = family.num_states();
    let mut seen = vec![false; n];
    let mut stack = vec![family.initial()];
    seen[family.initial()] = true;
    while let Some(s) = stack.pop() {
        let params: Vec<usize> = family.template(s).support().collect();
        for (_, t) in decode_choice(&params, sub.domains(), scheduler.action(s)) {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    seen
}

/// Splits `sub` into two disjoint, non-empty halves.
///
/// Each multi-valued parameter is scored by how often the min and max
/// schedulers pick different values for it, counting every state visited
/// under either scheduler (a state visited under both counts twice). The
/// top-scoring parameter (lowest index on ties) is split into the value the
/// max scheduler picks most often versus the rest. Without any disagreement
/// the largest domain is halved in value order.
pub fn split_subfamily(
    family: &Family,
    sub: &Subfamily,
    min_scheduler: &Scheduler,
    max_scheduler: &Scheduler,
) -> Result<(Subfamily, Subfamily)> {
    if sub.is_singleton() {
        return Err(Error::SingletonSplit);
    }
    let k_count = sub.num_params();
    let mut score = vec![0usize; k_count];
    let mut max_votes: Vec<Vec<usize>> = sub.domains().iter().map(|d| vec![0; d.len()]).collect();
    let by_min = visited_under(family, sub, min_scheduler);
    let by_max = visited_under(family, sub, max_scheduler);
    for s in 0..family.num_states() {
        let weight = by_min[s] as usize + by_max[s] as usize;
        if weight == 0 {
            continue;
        }
        let params: Vec<usize> = family.template(s).support().collect();
        let lo = decode_choice(&params, sub.domains(), min_scheduler.action(s));
        let hi = decode_choice(&params, sub.domains(), max_scheduler.action(s));
        for (&(k, v_lo), &(_, v_hi)) in lo.iter().zip(&hi) {
            if !sub.is_multi_valued(k) {
                continue;
            }
            if v_lo != v_hi {
                score[k] += weight;
            }
            let i = sub.domain(k).iter().position(|&v| v == v_hi).unwrap();
            max_votes[k][i] += weight;
        }
    }
    let best = (0..k_count)
        .filter(|&k| sub.is_multi_valued(k))
        .max_by(|&a, &b| score[a].cmp(&score[b]).then(b.cmp(&a)))
        .ok_or(Error::SingletonSplit)?;
    let dom = sub.domain(best);
    let (left, right): (Vec<usize>, Vec<usize>) = if score[best] > 0 {
        let votes = &max_votes[best];
        let pick = (0..dom.len())
            .max_by(|&a, &b| votes[a].cmp(&votes[b]).then(b.cmp(&a)))
            .unwrap();
        (
            vec![dom[pick]],
            dom.iter().copied().filter(|&v| v != dom[pick]).collect(),
        )
    } else {
        let widest = (0..k_count)
            .max_by(|&a, &b| sub.domain(a).len().cmp(&sub.domain(b).len()).then(b.cmp(&a)))
            .unwrap();
        let dom = sub.domain(widest);
        let half = dom.len() / 2;
        return Ok((sub.restrict(widest, &dom[..half])?, sub.restrict(widest, &dom[half..])?));
    };
    Ok((sub.restrict(best, &left)?, sub.restrict(best, &right)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{induce, member_count};
    use crate::fixtures::toy4;
    use crate::numerics::{mc_reach, DEFAULT_TOL};

    #[test]
    fn toy4_quotient_actions() {
        let fam = toy4();
        let q = build_quotient(&fam, &fam.full_subfamily()).unwrap();
        let s0: Vec<_> = q
            .mdp()
            .actions(0)
            .iter()
            .map(|d| d.iter().collect::<Vec<_>>())
            .collect();
        assert_eq!(s0, vec![vec![(1, 1.0)], vec![(2, 1.0)]]);
        let s1 = q.mdp().actions(1);
        assert_eq!(s1.len(), 2);
        assert!((s1[0].prob(3) - 0.8).abs() < 1e-12 && (s1[0].prob(4) - 0.2).abs() < 1e-12);
        assert!((s1[1].prob(3) - 0.6).abs() < 1e-12 && (s1[1].prob(4) - 0.4).abs() < 1e-12);
        assert_eq!(q.choice(1, 1), vec![(1, 4), (2, 3), (3, 4)]);
    }

    #[test]
    fn singleton_quotient_is_the_member_chain() {
        let fam = toy4();
        let r = Realization::new(vec![2, 3, 3, 4]);
        let sub = fam
            .full_subfamily()
            .restrict(0, &[2])
            .unwrap()
            .restrict(1, &[3])
            .unwrap();
        let q = build_quotient(&fam, &sub).unwrap();
        let mc = induce(&fam, &r).unwrap();
        for s in 0..fam.num_states() {
            assert_eq!(q.num_actions(s), 1);
            assert_eq!(&q.mdp().actions(s)[0], mc.row(s));
        }
    }

    #[test]
    fn members_are_embedded_in_the_quotient() {
        let fam = toy4();
        let sub = fam.full_subfamily();
        let q = build_quotient(&fam, &sub).unwrap();
        for r in sub.members() {
            let mc = induce(&fam, &r).unwrap();
            for s in 0..fam.num_states() {
                let a = q.action_of(s, &r).unwrap();
                assert_eq!(&q.mdp().actions(s)[a], mc.row(s));
            }
        }
    }

    #[test]
    fn toy4_family_bounds() {
        let fam = toy4();
        let mut sub = fam.full_subfamily();
        let b = compute_bounds(&fam, &mut sub, &[3], DEFAULT_TOL).unwrap();
        let want = [0.2, 0.6, 0.2, 1.0, 0.0];
        for (s, w) in want.iter().enumerate() {
            assert!((b.lb[s] - w).abs() < 1e-6, "lb[{s}] = {}", b.lb[s]);
        }
        assert!((b.ub[0] - 0.8).abs() < 1e-6);
        assert!(sub.cached_bounds(&[3]).is_some());
    }

    #[test]
    fn singleton_bounds_are_tight() {
        let fam = toy4();
        let mut sub = fam
            .full_subfamily()
            .restrict(0, &[2])
            .unwrap()
            .restrict(1, &[4])
            .unwrap();
        let b = compute_bounds(&fam, &mut sub, &[3], DEFAULT_TOL).unwrap();
        assert!((b.lb[0] - 0.2).abs() < 1e-6 && (b.ub[0] - 0.2).abs() < 1e-6);
        let mc = induce(&fam, &sub.lex_least()).unwrap();
        let x = mc_reach(&mc, &[3], DEFAULT_TOL).unwrap();
        for (s, v) in x.iter().enumerate() {
            assert!((b.lb[s] - b.ub[s]).abs() <= 2.0 * DEFAULT_TOL);
            assert!((b.lb[s] - v).abs() <= 2.0 * DEFAULT_TOL);
        }
    }

    #[test]
    fn toy4_split_on_x() {
        let fam = toy4();
        let mut sub = fam.full_subfamily();
        let b = compute_bounds(&fam, &mut sub, &[3], DEFAULT_TOL).unwrap();
        assert_eq!(b.min_scheduler.action(0), 1);
        assert_eq!(b.max_scheduler.action(0), 0);
        let (l, r) = split_subfamily(&fam, &sub, &b.min_scheduler, &b.max_scheduler).unwrap();
        assert_eq!(l.domain(0), &[1]);
        assert_eq!(r.domain(0), &[2]);
        assert_eq!(l.domain(1), &[3, 4]);
        assert_eq!(member_count(&l) + member_count(&r), member_count(&sub));
    }

    #[test]
    fn two_member_split_yields_singletons() {
        let fam = toy4();
        let mut sub = fam.full_subfamily().restrict(0, &[2]).unwrap();
        let b = compute_bounds(&fam, &mut sub, &[3], DEFAULT_TOL).unwrap();
        let (l, r) = split_subfamily(&fam, &sub, &b.min_scheduler, &b.max_scheduler).unwrap();
        assert!(l.is_singleton() && r.is_singleton());
        assert_ne!(l, r);
    }

    #[test]
    fn consistent_schedulers_fall_back_to_widest_domain() {
        let fam = toy4();
        let sub = fam.full_subfamily();
        let same = Scheduler(vec![0; fam.num_states()]);
        let (l, r) = split_subfamily(&fam, &sub, &same, &same).unwrap();
        assert_eq!((l.domain(0), r.domain(0)), (&[1][..], &[2][..]));
        let single = sub.restrict(0, &[1]).unwrap().restrict(1, &[3]).unwrap();
        assert_eq!(split_subfamily(&fam, &single, &same, &same), Err(Error::SingletonSplit));
    }

    #[test]
    fn action_cap_is_enforced() {
        let states = 2;
        let fam = Family::unnamed(
            0,
            vec![vec![0, 1]; 21],
            vec![
                Distribution::new((0..21).map(|k| (k, 1.0 / 21.0))).unwrap(),
                Distribution::point(0),
            ],
        )
        .unwrap();
        assert_eq!(fam.num_states(), states);
        assert!(matches!(
            build_quotient(&fam, &fam.full_subfamily()),
            Err(Error::ActionCap { state: 0, .. })
        ));
    }
}
