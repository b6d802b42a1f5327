//! Conflict quality over every violating member of a family.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::abstraction::compute_bounds;
use crate::counterexample::{construct_conflict, gamma_for, minimal_conflict_oracle};
use crate::error::{Error, Result};
use crate::family::{induce, Family};
use crate::numerics::{evaluate, mc_reach, Specification, Tolerances, Verdict};
use crate::synthesis::DEFAULT_MEMBER_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportMode {
    Trivial,
    Family,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CeEntry {
    /// Parameter name to value name.
    pub realization: Vec<(String, String)>,
    pub property: usize,
    pub conflict: Vec<String>,
    /// Conflict size over the number of multi-valued parameters.
    pub ratio: f64,
    /// Model-check calls, including the one confirming the violation.
    pub model_checks: usize,
    pub time_secs: f64,
    /// Size of a minimum conflict, when the exhaustive oracle was requested.
    pub minimal_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CeReport {
    pub mode: ReportMode,
    pub parameters: usize,
    pub entries: Vec<CeEntry>,
    pub mean_ratio: Option<f64>,
    pub mean_model_checks: Option<f64>,
    pub mean_time_secs: Option<f64>,
    pub mean_minimal_ratio: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Builds a conflict for every (member, violated constraint) pair. Objectives
/// are ignored.
pub fn ce_quality_report(
    family: &Family,
    spec: &Specification,
    mode: ReportMode,
    minimal_oracle: bool,
    tolerances: Tolerances,
) -> Result<CeReport> {
    let mut full = family.full_subfamily();
    let members = full.member_count();
    if members > DEFAULT_MEMBER_CAP {
        return Err(Error::MemberCap {
            members,
            cap: DEFAULT_MEMBER_CAP,
        });
    }
    let Tolerances { tol, eta } = tolerances;
    let n = family.num_states();
    let mut bounds = Vec::with_capacity(spec.properties.len());
    for p in &spec.properties {
        bounds.push(match mode {
            ReportMode::Family => Some(compute_bounds(family, &mut full, &p.targets, tol)?),
            ReportMode::Trivial => None,
        });
    }
    let params = family.multi_valued_params().len();
    let ratio_of = |size: usize| if params == 0 { 0.0 } else { size as f64 / params as f64 };

    let mut entries = Vec::new();
    for r in full.members() {
        let mc = induce(family, &r)?;
        for (i, p) in spec.properties.iter().enumerate() {
            let value = mc_reach(&mc, &p.targets, tol)?[mc.initial()];
            if evaluate(value, p, eta) == Verdict::Sat {
                continue;
            }
            let gamma = gamma_for(p, bounds[i].as_deref(), n);
            let start = Instant::now();
            let ce = construct_conflict(family, &r, &mc, p, &gamma, &full, tol, eta)?;
            let time_secs = start.elapsed().as_secs_f64();
            let minimal_size = if minimal_oracle {
                Some(
                    minimal_conflict_oracle(family, &r, p, &full, tol, eta)?
                        .relevant()
                        .len(),
                )
            } else {
                None
            };
            let relevant = ce.conflict.relevant();
            entries.push(CeEntry {
                realization: (0..family.num_params())
                    .map(|k| {
                        (
                            family.param_name(k).to_string(),
                            family.state_name(r.value(k)).to_string(),
                        )
                    })
                    .collect(),
                property: i,
                conflict: relevant.iter().map(|&k| family.param_name(k).to_string()).collect(),
                ratio: ratio_of(relevant.len()),
                model_checks: ce.checks + 1,
                time_secs,
                minimal_size,
            });
        }
    }

    Ok(CeReport {
        mode,
        parameters: params,
        mean_ratio: mean(entries.iter().map(|e| e.ratio)),
        mean_model_checks: mean(entries.iter().map(|e| e.model_checks as f64)),
        mean_time_secs: mean(entries.iter().map(|e| e.time_secs)),
        mean_minimal_ratio: mean(entries.iter().filter_map(|e| e.minimal_size.map(ratio_of))),
        entries,
    })
}

impl CeReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mode = match self.mode {
            ReportMode::Trivial => "trivial",
            ReportMode::Family => "family",
        };
        let _ = writeln!(out, "mode: {mode}, {} multi-valued parameters", self.parameters);
        if self.entries.is_empty() {
            out.push_str("no violating members\n");
            return out;
        }
        for e in &self.entries {
            let r: Vec<String> = e.realization.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let minimal = e.minimal_size.map(|m| format!(", minimum {m}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "[{}] property {}: conflict {{{}}} ratio {:.3}, {} checks{minimal}",
                r.join(", "),
                e.property,
                e.conflict.join(", "),
                e.ratio,
                e.model_checks,
            );
        }
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "mean ratio {}, mean checks {}, mean time {}s",
            fmt(self.mean_ratio),
            fmt(self.mean_model_checks),
            fmt(self.mean_time_secs),
        );
        if self.mean_minimal_ratio.is_some() {
            let _ = writeln!(out, "mean minimum ratio {}", fmt(self.mean_minimal_ratio));
        }
        out
    }
}
