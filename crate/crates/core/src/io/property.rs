//! Property expressions.
//!
//! ```text
//! P<=0.3 [F t]            probability of reaching t is at most 0.3
//! P>=0.9 [F goal done]    at least 0.9 to reach goal or done
//! min P [F t] eps=0.05    minimize, accepting 5% slack
//! max P [F t]
//! ```
//!
//! A specification file holds one expression per line; blank lines and
//! lines starting with `#` are ignored. At most one line may be an objective.

use crate::error::{Error, Result};
use crate::family::Family;
use crate::numerics::{Bound, Direction, Objective, Property, Specification};

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedProperty {
    Constraint(Property),
    Objective(Objective),
}

const LOCATION: &str = "property";

fn err(message: impl Into<String>) -> Error {
    Error::parse(LOCATION, message)
}

/// Splits off the bracketed `[F ...]` part, returning (head, targets, tail).
fn split_brackets(text: &str) -> Result<(&str, &str, &str)> {
    let open = text.find('[').ok_or_else(|| err("missing '[F ...]'"))?;
    let close = text[open..]
        .find(']')
        .map(|i| open + i)
        .ok_or_else(|| err("missing ']'"))?;
    Ok((&text[..open], &text[open + 1..close], &text[close + 1..]))
}

fn parse_targets(inner: &str, family: &Family) -> Result<Vec<usize>> {
    let mut words = inner.split_whitespace();
    if words.next() != Some("F") {
        return Err(err("expected 'F' after '['"));
    }
    let targets = words
        .map(|name| {
            family
                .state_index(name)
                .ok_or_else(|| err(format!("unknown target state {name:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if targets.is_empty() {
        return Err(err("empty target list"));
    }
    Ok(targets)
}

fn parse_unit(text: &str, what: &str) -> Result<f64> {
    let value: f64 = text.parse().map_err(|_| err(format!("malformed {what} {text:?}")))?;
    if !value.is_finite() {
        return Err(err(format!("malformed {what} {text:?}")));
    }
    Ok(value)
}

/// Parses one expression, resolving target names against `family`.
pub fn parse_property(text: &str, family: &Family) -> Result<ParsedProperty> {
    let (head, inner, tail) = split_brackets(text.trim())?;
    let targets = parse_targets(inner, family)?;
    let head = head.trim();
    let tail = tail.trim();

    if let Some(rest) = head.strip_prefix('P') {
        if !tail.is_empty() {
            return Err(err(format!("unexpected {tail:?} after ']'")));
        }
        let rest = rest.trim();
        let (bound, lambda) = if let Some(l) = rest.strip_prefix("<=") {
            (Bound::AtMost, l)
        } else if let Some(l) = rest.strip_prefix(">=") {
            (Bound::AtLeast, l)
        } else {
            return Err(err("expected '<=' or '>=' after 'P'"));
        };
        let lambda = parse_unit(lambda.trim(), "threshold")?;
        let p = Property::new(bound, lambda, targets).map_err(|e| err(e.to_string()))?;
        return Ok(ParsedProperty::Constraint(p));
    }

    let direction = match head.split_whitespace().collect::<Vec<_>>()[..] {
        ["min", "P"] => Direction::Min,
        ["max", "P"] => Direction::Max,
        _ => {
            return Err(err(format!(
                "expected 'P<=', 'P>=', 'min P' or 'max P', found {head:?}"
            )))
        }
    };
    let eps = match tail {
        "" => 0.0,
        t => {
            let value = t
                .strip_prefix("eps")
                .map(str::trim_start)
                .and_then(|t| t.strip_prefix('='))
                .ok_or_else(|| err(format!("unexpected {t:?} after ']'")))?;
            parse_unit(value.trim(), "eps")?
        }
    };
    let o = Objective::new(direction, targets, eps).map_err(|e| err(e.to_string()))?;
    Ok(ParsedProperty::Objective(o))
}

/// Parses a specification file: constraints plus at most one objective.
pub fn parse_spec(text: &str, family: &Family) -> Result<Specification> {
    let mut spec = Specification::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at_line = |e: Error| match e {
            Error::Parse { message, .. } => Error::parse(format!("line {}", i + 1), message),
            other => other,
        };
        match parse_property(line, family).map_err(at_line)? {
            ParsedProperty::Constraint(p) => spec.properties.push(p),
            ParsedProperty::Objective(o) => {
                if spec.objective.is_some() {
                    return Err(Error::parse(format!("line {}", i + 1), "more than one objective"));
                }
                spec.objective = Some(o);
            }
        }
    }
    if spec.properties.is_empty() && spec.objective.is_none() {
        return Err(Error::parse("specification", "no properties"));
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::toy4;

    fn message(e: Error) -> String {
        match e {
            Error::Parse { message, .. } => message,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn safety_on_toy4() {
        let fam = toy4();
        let p = parse_property("P<=0.3 [F t]", &fam).unwrap();
        assert_eq!(
            p,
            ParsedProperty::Constraint(Property::new(Bound::AtMost, 0.3, [3]).unwrap())
        );
    }

    #[test]
    fn liveness_with_spacing() {
        let fam = toy4();
        let p = parse_property("  P >= 1.0 [ F t f ]", &fam).unwrap();
        assert_eq!(
            p,
            ParsedProperty::Constraint(Property::new(Bound::AtLeast, 1.0, [3, 4]).unwrap())
        );
    }

    #[test]
    fn objectives() {
        let fam = toy4();
        let p = parse_property("min P [F t] eps=0.05", &fam).unwrap();
        assert_eq!(
            p,
            ParsedProperty::Objective(Objective::new(Direction::Min, [3], 0.05).unwrap())
        );
        let p = parse_property("max P [F f]", &fam).unwrap();
        assert_eq!(
            p,
            ParsedProperty::Objective(Objective::new(Direction::Max, [4], 0.0).unwrap())
        );
    }

    #[test]
    fn rejects_bad_input() {
        let fam = toy4();
        assert!(message(parse_property("P<=0.3x [F t]", &fam).unwrap_err()).contains("malformed threshold"));
        assert!(message(parse_property("P<=1.5 [F t]", &fam).unwrap_err()).contains("outside [0, 1]"));
        assert!(message(parse_property("P<=0.3 [F goal]", &fam).unwrap_err()).contains("unknown target"));
        assert_eq!(
            message(parse_property("P<=0.3 [F ]", &fam).unwrap_err()),
            "empty target list"
        );
        assert!(parse_property("P<0.3 [F t]", &fam).is_err());
        assert!(parse_property("min P [F t] eps=1", &fam).is_err());
        assert!(parse_property("min P [F t] delta=0.1", &fam).is_err());
    }

    #[test]
    fn spec_file() {
        let fam = toy4();
        let spec = parse_spec("# comment\nP<=0.3 [F t]\n\nmax P [F f] eps=0.1\n", &fam).unwrap();
        assert_eq!(spec.properties.len(), 1);
        assert_eq!(spec.objective.unwrap().eps, 0.1);
        match parse_spec("P<=0.3 [F t]\nP<=x [F t]", &fam).unwrap_err() {
            Error::Parse { location, .. } => assert_eq!(location, "line 2"),
            other => panic!("{other:?}"),
        }
        assert!(parse_spec("min P [F t]\nmax P [F t]", &fam).is_err());
        assert!(parse_spec("# nothing\n", &fam).is_err());
    }
}
