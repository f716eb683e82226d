//! Line-oriented text format for problem files (`.geqn`).
//!
//! Grammar (one field per line, `#` starts a comment, blank lines ignored):
//!
//! ```text
//! file       := line*
//! line       := "n" INT
//!             | "kappa" (FLOAT | "inf")                 (optional, default inf)
//!             | "set" ("zeromap" | "orthant" | "box" | "polyhedron")
//!             | "lower" FLOAT{n}                        (box only; -inf allowed)
//!             | "upper" FLOAT{n}                        (box only; inf allowed)
//!             | "constraint" FLOAT{n} "<=" FLOAT        (polyhedron only, repeatable)
//!             | "term" INT INT{n} FLOAT                 (component, exponents, coefficient)
//!             | "solution" FLOAT{n}                     (optional)
//! ```
//!
//! Components are 0-based. Every polynomial is given exactly by its `term`
//! lines, which is what makes exact Jacobians and higher derivatives
//! possible downstream. Parsing is strict: unknown fields, duplicate scalar
//! fields, and dimension mismatches are errors naming the offending line.

use std::path::Path;

use thiserror::Error;

use crate::linalg::Mat;
use crate::poly::{PolySystem, PolyTerm};
use crate::problem::{ProblemBuilder, ProblemError, ProblemInstance, SetDescriptor};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown set type '{name}'")]
    UnknownSetType { line: usize, name: String },
    #[error("missing required field '{0}'")]
    MissingField(&'static str),
    #[error("validation failed: {0}")]
    Validation(#[from] ProblemError),
    #[error("problem has no polynomial form and cannot be serialized")]
    NotSerializable,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

fn parse_float(tok: &str, line: usize, what: &str) -> Result<f64, ParseError> {
    match tok {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse::<f64>()
            .map_err(|_| syntax(line, format!("malformed {what} '{tok}'"))),
    }
}

/// Parses and validates a problem file (declared solutions are checked
/// against the natural residual, Jacobians come exactly from the terms).
pub fn parse_problem(text: &str) -> Result<ProblemInstance, ParseError> {
    let mut n: Option<usize> = None;
    let mut kappa: Option<f64> = None;
    let mut set_kind: Option<(usize, String)> = None;
    let mut lower: Option<(usize, Vec<f64>)> = None;
    let mut upper: Option<(usize, Vec<f64>)> = None;
    let mut constraints: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut terms: Vec<(usize, PolyTerm)> = Vec::new();
    let mut solution: Option<Vec<f64>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        macro_rules! need_n {
            () => {
                n.ok_or_else(|| syntax(line_no, "field requires 'n' to be set first"))?
            };
        }
        match tokens[0] {
            "n" => {
                if n.is_some() {
                    return Err(syntax(line_no, "duplicate field 'n'"));
                }
                if tokens.len() != 2 {
                    return Err(syntax(line_no, "expected 'n <dimension>'"));
                }
                let v: usize = tokens[1]
                    .parse()
                    .map_err(|_| syntax(line_no, format!("malformed dimension '{}'", tokens[1])))?;
                if v == 0 {
                    return Err(syntax(line_no, "dimension must be positive"));
                }
                n = Some(v);
            }
            "kappa" => {
                if kappa.is_some() {
                    return Err(syntax(line_no, "duplicate field 'kappa'"));
                }
                if tokens.len() != 2 {
                    return Err(syntax(line_no, "expected 'kappa <value>'"));
                }
                kappa = Some(parse_float(tokens[1], line_no, "kappa")?);
            }
            "set" => {
                if set_kind.is_some() {
                    return Err(syntax(line_no, "duplicate field 'set'"));
                }
                if tokens.len() != 2 {
                    return Err(syntax(line_no, "expected 'set <type>'"));
                }
                match tokens[1] {
                    "zeromap" | "orthant" | "box" | "polyhedron" => {
                        set_kind = Some((line_no, tokens[1].to_string()))
                    }
                    other => {
                        return Err(ParseError::UnknownSetType {
                            line: line_no,
                            name: other.to_string(),
                        })
                    }
                }
            }
            "lower" | "upper" => {
                let dim = need_n!();
                if tokens.len() != dim + 1 {
                    return Err(syntax(
                        line_no,
                        format!("expected {dim} values after '{}'", tokens[0]),
                    ));
                }
                let vals = tokens[1..]
                    .iter()
                    .map(|t| parse_float(t, line_no, "bound"))
                    .collect::<Result<Vec<_>, _>>()?;
                if tokens[0] == "lower" {
                    if lower.is_some() {
                        return Err(syntax(line_no, "duplicate field 'lower'"));
                    }
                    lower = Some((line_no, vals));
                } else {
                    if upper.is_some() {
                        return Err(syntax(line_no, "duplicate field 'upper'"));
                    }
                    upper = Some((line_no, vals));
                }
            }
            "constraint" => {
                let dim = need_n!();
                if tokens.len() != dim + 3 || tokens[dim + 1] != "<=" {
                    return Err(syntax(
                        line_no,
                        format!("expected 'constraint a_1 .. a_{dim} <= b'"),
                    ));
                }
                let row = tokens[1..=dim]
                    .iter()
                    .map(|t| parse_float(t, line_no, "constraint coefficient"))
                    .collect::<Result<Vec<_>, _>>()?;
                let b = parse_float(tokens[dim + 2], line_no, "constraint bound")?;
                constraints.push((row, b));
            }
            "term" => {
                let dim = need_n!();
                if tokens.len() != dim + 3 {
                    return Err(syntax(
                        line_no,
                        format!("expected 'term <component> <e_1> .. <e_{dim}> <coefficient>'"),
                    ));
                }
                let comp: usize = tokens[1]
                    .parse()
                    .map_err(|_| syntax(line_no, format!("malformed component '{}'", tokens[1])))?;
                if comp >= dim {
                    return Err(syntax(line_no, format!("component {comp} out of range 0..{dim}")));
                }
                let exponents = tokens[2..2 + dim]
                    .iter()
                    .map(|t| {
                        t.parse::<u32>()
                            .map_err(|_| syntax(line_no, format!("malformed exponent '{t}'")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let coeff = parse_float(tokens[2 + dim], line_no, "coefficient")?;
                terms.push((comp, PolyTerm { coeff, exponents }));
            }
            "solution" => {
                let dim = need_n!();
                if solution.is_some() {
                    return Err(syntax(line_no, "duplicate field 'solution'"));
                }
                if tokens.len() != dim + 1 {
                    return Err(syntax(line_no, format!("expected {dim} solution values")));
                }
                solution = Some(
                    tokens[1..]
                        .iter()
                        .map(|t| parse_float(t, line_no, "solution value"))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            other => return Err(syntax(line_no, format!("unknown field '{other}'"))),
        }
    }

    let n = n.ok_or(ParseError::MissingField("n"))?;
    let (set_line, kind) = set_kind.ok_or(ParseError::MissingField("set"))?;
    if terms.is_empty() {
        return Err(ParseError::MissingField("term"));
    }
    if kind != "box" {
        if let Some((line, _)) = lower.as_ref().or(upper.as_ref()) {
            return Err(syntax(*line, "bounds are only valid for 'set box'"));
        }
    }
    if kind != "polyhedron" && !constraints.is_empty() {
        return Err(syntax(set_line, "constraints are only valid for 'set polyhedron'"));
    }
    let set = match kind.as_str() {
        "zeromap" => SetDescriptor::ZeroMap,
        "orthant" => SetDescriptor::Orthant(n),
        "box" => {
            let (_, lo) = lower.ok_or(ParseError::MissingField("lower"))?;
            let (_, up) = upper.ok_or(ParseError::MissingField("upper"))?;
            SetDescriptor::Box { lower: lo, upper: up }
        }
        "polyhedron" => {
            if constraints.is_empty() {
                return Err(ParseError::MissingField("constraint"));
            }
            let rows: Vec<&[f64]> = constraints.iter().map(|(r, _)| r.as_slice()).collect();
            SetDescriptor::Polyhedron {
                a: Mat::from_rows(&rows),
                b: constraints.iter().map(|(_, b)| *b).collect(),
            }
        }
        _ => unreachable!(),
    };

    let mut components: Vec<Vec<PolyTerm>> = vec![Vec::new(); n];
    for (comp, term) in terms {
        components[comp].push(term);
    }
    let poly = PolySystem::new(n, components);
    let mut builder = ProblemBuilder::from_poly(poly, set);
    if let Some(sol) = solution {
        builder = builder.solution(sol);
    }
    builder = builder.kappa(kappa.unwrap_or(f64::INFINITY));
    Ok(builder.build()?)
}

pub fn parse_problem_file(path: impl AsRef<Path>) -> Result<ProblemInstance, ParseError> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

fn fmt_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

/// Canonical serialization: fields in fixed order, terms sorted by
/// (component, exponents), shortest-roundtrip float formatting. Parsing the
/// output reproduces the problem field-for-field.
pub fn serialize_problem(problem: &ProblemInstance) -> Result<String, ParseError> {
    let poly = problem.poly().ok_or(ParseError::NotSerializable)?;
    let n = problem.dim();
    let mut out = String::new();
    out.push_str(&format!("n {n}\n"));
    out.push_str(&format!("kappa {}\n", fmt_value(problem.kappa())));
    match problem.set() {
        SetDescriptor::ZeroMap => out.push_str("set zeromap\n"),
        SetDescriptor::Orthant(_) => out.push_str("set orthant\n"),
        SetDescriptor::Box { lower, upper } => {
            out.push_str("set box\n");
            out.push_str(&format!(
                "lower {}\n",
                lower.iter().map(|v| fmt_value(*v)).collect::<Vec<_>>().join(" ")
            ));
            out.push_str(&format!(
                "upper {}\n",
                upper.iter().map(|v| fmt_value(*v)).collect::<Vec<_>>().join(" ")
            ));
        }
        SetDescriptor::Polyhedron { a, b } => {
            out.push_str("set polyhedron\n");
            for i in 0..a.rows() {
                out.push_str(&format!(
                    "constraint {} <= {}\n",
                    a.row(i).iter().map(|v| fmt_value(*v)).collect::<Vec<_>>().join(" "),
                    fmt_value(b[i])
                ));
            }
        }
    }
    let mut terms: Vec<(usize, &PolyTerm)> = Vec::new();
    for (comp, list) in poly.components().iter().enumerate() {
        for t in list {
            terms.push((comp, t));
        }
    }
    terms.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.exponents.cmp(&a.1.exponents)));
    for (comp, t) in terms {
        out.push_str(&format!(
            "term {comp} {} {}\n",
            t.exponents.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "),
            fmt_value(t.coeff)
        ));
    }
    if let Some(sol) = problem.solution() {
        out.push_str(&format!(
            "solution {}\n",
            sol.iter().map(|v| fmt_value(*v)).collect::<Vec<_>>().join(" ")
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT1: &str = "\
# scalar square-root benchmark
n 1
kappa 10
set orthant
term 0 2 1
term 0 0 -1
solution 1
";

    #[test]
    fn parses_registry_style_file() {
        let p = parse_problem(SQRT1).unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.kappa(), 10.0);
        assert_eq!(p.solution(), Some(&[1.0][..]));
        assert_eq!(p.f(&[1.5]), vec![1.25]);
        assert!(matches!(p.set(), SetDescriptor::Orthant(1)));
    }

    #[test]
    fn unknown_set_type() {
        let text = "n 1\nset cone\nterm 0 1 1\n";
        match parse_problem(text) {
            Err(ParseError::UnknownSetType { name, line }) => {
                assert_eq!(name, "cone");
                assert_eq!(line, 2);
            }
            other => panic!("expected unknown set type, got {other:?}"),
        }
    }

    #[test]
    fn solution_residual_failure_is_reported() {
        let text = "n 1\nset orthant\nterm 0 2 1\nterm 0 0 -1\nsolution 1.15\n";
        let err = parse_problem(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("solution residual"), "{msg}");
    }

    #[test]
    fn malformed_term_lines() {
        let text = "n 2\nset zeromap\nterm 0 1 1\n"; // missing one exponent
        assert!(matches!(parse_problem(text), Err(ParseError::Syntax { line: 3, .. })));
        let text = "n 1\nset zeromap\nterm 3 1 1\n"; // component out of range
        assert!(matches!(parse_problem(text), Err(ParseError::Syntax { line: 3, .. })));
        let text = "n 1\nn 1\nset zeromap\nterm 0 1 1\n"; // duplicate n
        assert!(matches!(parse_problem(text), Err(ParseError::Syntax { line: 2, .. })));
        let text = "set zeromap\nterm 0 1 1\n"; // term before n
        assert!(matches!(parse_problem(text), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn missing_fields() {
        assert!(matches!(parse_problem("n 1\nterm 0 1 1\n"), Err(ParseError::MissingField("set"))));
        assert!(matches!(parse_problem("n 1\nset zeromap\n"), Err(ParseError::MissingField("term"))));
        assert!(matches!(
            parse_problem("n 1\nset box\nterm 0 1 1\nupper 1\n"),
            Err(ParseError::MissingField("lower"))
        ));
    }

    #[test]
    fn box_and_polyhedron_round_trip() {
        let boxy = "\
n 2
kappa inf
set box
lower 0 -inf
upper 2 inf
term 0 1 0 1
term 0 0 0 -1
term 1 0 1 1
";
        let p = parse_problem(boxy).unwrap();
        let s = serialize_problem(&p).unwrap();
        let p2 = parse_problem(&s).unwrap();
        assert_eq!(serialize_problem(&p2).unwrap(), s);

        let poly = "\
n 1
kappa 10
set polyhedron
constraint 1 <= 1
term 0 2 1
term 0 0 -4
solution 1
";
        let p = parse_problem(poly).unwrap();
        let s = serialize_problem(&p).unwrap();
        let p2 = parse_problem(&s).unwrap();
        assert_eq!(serialize_problem(&p2).unwrap(), s);
        assert_eq!(p2.solution(), Some(&[1.0][..]));
    }

    #[test]
    fn round_trip_is_canonical() {
        let p = parse_problem(SQRT1).unwrap();
        let s1 = serialize_problem(&p).unwrap();
        let p2 = parse_problem(&s1).unwrap();
        let s2 = serialize_problem(&p2).unwrap();
        assert_eq!(s1, s2);
    }
}
