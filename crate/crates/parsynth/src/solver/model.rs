//! Solver response parsing: s-expressions, values, and the model table.

use std::collections::HashMap;
use std::fmt;

use crate::encoder::Term;

use super::SolverError;

/// Exact rational with a positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rat {
    pub num: i128,
    pub den: i128,
}

impl Rat {
    pub fn new(num: i128, den: i128) -> Rat {
        assert!(den != 0, "zero denominator");
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i128;
        Rat { num: num / g, den: den / g }
    }

    pub fn from_int(i: i128) -> Rat {
        Rat { num: i, den: 1 }
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Rat(Rat),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_rat(&self) -> Option<Rat> {
        match self {
            Value::Rat(r) => Some(*r),
            Value::Int(i) => Some(Rat::from_int(*i as i128)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

pub(crate) fn parse_sexps(input: &str) -> Result<Vec<Sexp>, String> {
    let bytes = input.as_bytes();
    let mut pos = 0usize;
    let mut stack: Vec<Vec<Sexp>> = Vec::new();
    let mut top: Vec<Sexp> = Vec::new();
    while pos < bytes.len() {
        let c = bytes[pos];
        match c {
            b';' => {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            }
            c if c.is_ascii_whitespace() => pos += 1,
            b'(' => {
                stack.push(std::mem::take(&mut top));
                pos += 1;
            }
            b')' => {
                let list = Sexp::List(std::mem::take(&mut top));
                top = stack.pop().ok_or("unbalanced `)`")?;
                top.push(list);
                pos += 1;
            }
            b'"' => {
                let start = pos;
                pos += 1;
                while pos < bytes.len() && bytes[pos] != b'"' {
                    pos += 1;
                }
                if pos >= bytes.len() {
                    return Err("unterminated string".into());
                }
                pos += 1;
                top.push(Sexp::Atom(input[start..pos].to_string()));
            }
            _ => {
                let start = pos;
                while pos < bytes.len()
                    && !bytes[pos].is_ascii_whitespace()
                    && bytes[pos] != b'('
                    && bytes[pos] != b')'
                {
                    pos += 1;
                }
                top.push(Sexp::Atom(input[start..pos].to_string()));
            }
        }
    }
    if !stack.is_empty() {
        return Err("unbalanced `(`".into());
    }
    Ok(top)
}

pub(crate) fn value_of_sexp(s: &Sexp) -> Result<Value, String> {
    match s {
        Sexp::Atom(a) => {
            if a == "true" {
                return Ok(Value::Bool(true));
            }
            if a == "false" {
                return Ok(Value::Bool(false));
            }
            if let Ok(i) = a.parse::<i64>() {
                return Ok(Value::Int(i));
            }
            if let Some((int_part, frac)) = a.split_once('.') {
                let sign = if int_part.starts_with('-') { -1i128 } else { 1 };
                let ip: i128 = int_part.parse().map_err(|_| format!("bad decimal `{a}`"))?;
                let fp: i128 = if frac.is_empty() {
                    0
                } else {
                    frac.parse().map_err(|_| format!("bad decimal `{a}`"))?
                };
                let scale = 10i128.pow(frac.len() as u32);
                return Ok(Value::Rat(Rat::new(ip * scale + sign * fp, scale)));
            }
            Err(format!("unrecognised value `{a}`"))
        }
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => match value_of_sexp(x)? {
                Value::Int(i) => Ok(Value::Int(-i)),
                Value::Rat(r) => Ok(Value::Rat(Rat::new(-r.num, r.den))),
                Value::Bool(_) => Err("negated boolean".into()),
            },
            [Sexp::Atom(op), a, b] if op == "/" => {
                let num = value_of_sexp(a)?.as_rat().ok_or("non-numeric numerator")?;
                let den = value_of_sexp(b)?.as_rat().ok_or("non-numeric denominator")?;
                Ok(Value::Rat(Rat::new(num.num * den.den, num.den * den.num)))
            }
            [Sexp::Atom(op), x] if op == "to_real" || op == "to_int" => value_of_sexp(x),
            _ => Err(format!("unrecognised value shape: {s:?}")),
        },
    }
}

/// Parsed interpretations, keyed by the rendered query term.
#[derive(Debug, Clone)]
pub struct SmtModel {
    values: HashMap<String, Value>,
}

impl SmtModel {
    /// Builds the model by pairing query terms with the parsed responses,
    /// positionally.
    pub(crate) fn from_responses(
        queries: &[Term],
        responses: &[Sexp],
    ) -> Result<SmtModel, SolverError> {
        let mut pairs: Vec<&Sexp> = Vec::new();
        for r in responses {
            match r {
                Sexp::List(items)
                    if matches!(items.first(), Some(Sexp::Atom(a)) if a == "error") =>
                {
                    return Err(SolverError::Malformed(format!(
                        "solver reported an error while producing values: {items:?}"
                    )));
                }
                Sexp::List(items) => pairs.extend(items.iter()),
                Sexp::Atom(a) => {
                    return Err(SolverError::Malformed(format!(
                        "unexpected token `{a}` in model output"
                    )));
                }
            }
        }
        if pairs.len() != queries.len() {
            return Err(SolverError::Malformed(format!(
                "expected {} model values, got {}",
                queries.len(),
                pairs.len()
            )));
        }
        let mut values = HashMap::with_capacity(queries.len());
        for (q, p) in queries.iter().zip(pairs) {
            let Sexp::List(pair) = p else {
                return Err(SolverError::Malformed("model entry is not a pair".into()));
            };
            if pair.len() != 2 {
                return Err(SolverError::Malformed(format!(
                    "model entry has {} elements",
                    pair.len()
                )));
            }
            let value = value_of_sexp(&pair[1]).map_err(SolverError::Malformed)?;
            values.insert(q.to_string(), value);
        }
        Ok(SmtModel { values })
    }

    #[cfg(test)]
    pub(crate) fn from_pairs(pairs: Vec<(String, Value)>) -> SmtModel {
        SmtModel { values: pairs.into_iter().collect() }
    }

    pub fn lookup(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn get_term(&self, term: &Term) -> Result<Value, SolverError> {
        let key = term.to_string();
        self.values
            .get(&key)
            .copied()
            .ok_or(SolverError::IncompleteModel(key))
    }

    pub fn bool_term(&self, term: &Term) -> Result<bool, SolverError> {
        self.get_term(term)?
            .as_bool()
            .ok_or_else(|| SolverError::Malformed(format!("`{term}` is not boolean")))
    }

    pub fn int_term(&self, term: &Term) -> Result<i64, SolverError> {
        self.get_term(term)?
            .as_int()
            .ok_or_else(|| SolverError::Malformed(format!("`{term}` is not an integer")))
    }
}
