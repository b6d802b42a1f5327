//! The `mc-family/1` sketch format.
//!
//! ```json
//! {
//!   "format": "mc-family/1",
//!   "states": ["s0", "t", "f"],
//!   "initial": "s0",
//!   "parameters": {
//!     "X": ["t", "f"]
//!   },
//!   "transitions": {
//!     "s0": {"X": 1.0},
//!     ...
//!   }
//! }
//! ```
//!
//! Parameter domains list state names; each transition template maps
//! parameter names to probabilities. Objects keep their textual order and
//! duplicate keys are reported instead of silently overwritten.

use std::fmt;
use std::marker::PhantomData;

use serde::de::{Deserializer, MapAccess, Visitor};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::family::{Distribution, Family, STOCHASTIC_TOL};

pub const FORMAT_TAG: &str = "mc-family/1";

/// A JSON object as an ordered list of entries, duplicates included.
struct Entries<T>(Vec<(String, T)>);

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Entries<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct EntriesVisitor<T>(PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for EntriesVisitor<T> {
            type Value = Entries<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON object")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, T>()? {
                    out.push((k, v));
                }
                Ok(Entries(out))
            }
        }

        deserializer.deserialize_map(EntriesVisitor(PhantomData))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSketch {
    format: String,
    states: Vec<String>,
    initial: String,
    parameters: Entries<Vec<String>>,
    transitions: Entries<Entries<f64>>,
}

fn find_duplicate<'a>(names: impl IntoIterator<Item = &'a String>) -> Option<(usize, &'a String)> {
    let mut seen = std::collections::HashSet::new();
    names.into_iter().enumerate().find(|(_, n)| !seen.insert(n.as_str()))
}

/// Parses and validates a sketch document.
pub fn parse_sketch(text: &str) -> Result<Family> {
    let raw: RawSketch = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
        )
    })?;

    if raw.format != FORMAT_TAG {
        return Err(Error::parse(
            "format",
            format!("unsupported format {:?}, expected {FORMAT_TAG:?}", raw.format),
        ));
    }
    if raw.states.is_empty() {
        return Err(Error::parse("states", "at least one state is required"));
    }
    if let Some((i, name)) = find_duplicate(&raw.states) {
        return Err(Error::parse(
            format!("states[{i}]"),
            format!("duplicate state name {name:?}"),
        ));
    }
    let state_index = |name: &str| raw.states.iter().position(|s| s == name);
    let initial =
        state_index(&raw.initial).ok_or_else(|| Error::parse("initial", format!("unknown state {:?}", raw.initial)))?;

    let params = &raw.parameters.0;
    if let Some((_, name)) = find_duplicate(params.iter().map(|(n, _)| n)) {
        return Err(Error::parse(format!("parameters.{name}"), "duplicate parameter name"));
    }
    let mut domains = Vec::with_capacity(params.len());
    for (name, values) in params {
        if values.is_empty() {
            return Err(Error::parse(format!("parameters.{name}"), "empty domain"));
        }
        let mut dom = Vec::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            let s = state_index(v)
                .ok_or_else(|| Error::parse(format!("parameters.{name}[{i}]"), format!("unknown state {v:?}")))?;
            if dom.contains(&s) {
                return Err(Error::parse(
                    format!("parameters.{name}[{i}]"),
                    format!("state {v:?} listed twice"),
                ));
            }
            dom.push(s);
        }
        domains.push(dom);
    }

    let rows = &raw.transitions.0;
    if let Some((_, name)) = find_duplicate(rows.iter().map(|(n, _)| n)) {
        return Err(Error::parse(
            format!("transitions.{name}"),
            "duplicate transition template",
        ));
    }
    let mut templates: Vec<Option<Distribution>> = vec![None; raw.states.len()];
    for (state, entries) in rows {
        let s = state_index(state)
            .ok_or_else(|| Error::parse(format!("transitions.{state}"), format!("unknown state {state:?}")))?;
        if let Some((_, p)) = find_duplicate(entries.0.iter().map(|(n, _)| n)) {
            return Err(Error::parse(format!("transitions.{state}.{p}"), "duplicate parameter"));
        }
        let mut dist = Vec::with_capacity(entries.0.len());
        for (param, prob) in &entries.0 {
            let k = params.iter().position(|(n, _)| n == param).ok_or_else(|| {
                Error::parse(
                    format!("transitions.{state}.{param}"),
                    format!("unknown parameter {param:?}"),
                )
            })?;
            if !(0.0..=1.0).contains(prob) {
                return Err(Error::parse(
                    format!("transitions.{state}.{param}"),
                    format!("probability {prob} is outside [0, 1]"),
                ));
            }
            dist.push((k, *prob));
        }
        let sum: f64 = dist.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::parse(
                format!("transitions.{state}"),
                format!(
                    "probabilities of state {state:?} sum to {}, expected 1",
                    (sum * 1e9).round() / 1e9
                ),
            ));
        }
        let dist = Distribution::new(dist).map_err(|e| Error::parse(format!("transitions.{state}"), e.to_string()))?;
        templates[s] = Some(dist);
    }
    let templates = templates
        .into_iter()
        .enumerate()
        .map(|(s, t)| {
            t.ok_or_else(|| {
                Error::parse(
                    "transitions",
                    format!("state {:?} has no transition template", raw.states[s]),
                )
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let param_names = params.iter().map(|(n, _)| n.clone()).collect();
    Family::new(raw.states, initial, param_names, domains, templates)
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn number(x: f64) -> String {
    serde_json::to_string(&x).expect("finite probabilities serialize")
}

/// Renders `family` in the sketch format, one parameter or template per line.
pub fn serialize_sketch(family: &Family) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"format\": {},\n", quote(FORMAT_TAG)));
    let states: Vec<String> = family.state_names().iter().map(|s| quote(s)).collect();
    out.push_str(&format!("  \"states\": [{}],\n", states.join(", ")));
    out.push_str(&format!(
        "  \"initial\": {},\n",
        quote(family.state_name(family.initial()))
    ));

    out.push_str("  \"parameters\": {");
    let params: Vec<String> = (0..family.num_params())
        .map(|k| {
            let dom: Vec<String> = family.domain(k).iter().map(|&s| quote(family.state_name(s))).collect();
            format!("    {}: [{}]", quote(family.param_name(k)), dom.join(", "))
        })
        .collect();
    if params.is_empty() {
        out.push_str("},\n");
    } else {
        out.push('\n');
        out.push_str(&params.join(",\n"));
        out.push_str("\n  },\n");
    }

    out.push_str("  \"transitions\": {\n");
    let rows: Vec<String> = (0..family.num_states())
        .map(|s| {
            let entries: Vec<String> = family
                .template(s)
                .iter()
                .map(|(k, p)| format!("{}: {}", quote(family.param_name(k)), number(p)))
                .collect();
            format!("    {}: {{{}}}", quote(family.state_name(s)), entries.join(", "))
        })
        .collect();
    out.push_str(&rows.join(",\n"));
    out.push_str("\n  }\n}\n");
    out
}
