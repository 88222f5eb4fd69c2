//! Post-solve re-validation: every assertion of the script must evaluate
//! to true under the parsed model. In particular this re-checks the strict
//! rank increase into rejecting states and the token families, point by
//! point.

use crate::encoder::{SmtScript, Term};

use super::model::{SmtModel, Value};
use super::SolverError;

fn eval(term: &Term, model: &SmtModel) -> Result<Value, SolverError> {
    match term {
        Term::Bool(b) => Ok(Value::Bool(*b)),
        Term::Int(i) => Ok(Value::Int(*i)),
        Term::Real(r) => Ok(Value::Rat(super::Rat::from_int(*r as i128))),
        Term::App(name, args) => {
            // Evaluate arguments to literals, rebuild the query key, and
            // look it up; queries cover every point of the finite domains.
            let mut lit_args = Vec::with_capacity(args.len());
            for a in args {
                lit_args.push(match eval(a, model)? {
                    Value::Bool(b) => Term::Bool(b),
                    Value::Int(i) => Term::Int(i),
                    Value::Rat(_) => {
                        return Err(SolverError::Malformed(format!(
                            "real-valued argument in `{term}`"
                        )))
                    }
                });
            }
            model.get_term(&Term::App(name.clone(), lit_args))
        }
        Term::Not(a) => Ok(Value::Bool(!eval_bool(a, model)?)),
        Term::And(xs) => {
            for x in xs {
                if !eval_bool(x, model)? {
                    return Ok(Value::Bool(false));
                }
            }
            Ok(Value::Bool(true))
        }
        Term::Or(xs) => {
            for x in xs {
                if eval_bool(x, model)? {
                    return Ok(Value::Bool(true));
                }
            }
            Ok(Value::Bool(false))
        }
        Term::Implies(a, b) => Ok(Value::Bool(!eval_bool(a, model)? || eval_bool(b, model)?)),
        Term::Eq(a, b) => {
            let va = eval(a, model)?;
            let vb = eval(b, model)?;
            let eq = match (va, vb) {
                (Value::Bool(x), Value::Bool(y)) => x == y,
                (Value::Int(x), Value::Int(y)) => x == y,
                (x, y) => match (x.as_rat(), y.as_rat()) {
                    (Some(rx), Some(ry)) => rx == ry,
                    _ => {
                        return Err(SolverError::Malformed(format!(
                            "ill-sorted equality `{term}`"
                        )))
                    }
                },
            };
            Ok(Value::Bool(eq))
        }
        Term::Ge(a, b) => cmp(a, b, model, |o| o.is_ge()),
        Term::Gt(a, b) => cmp(a, b, model, |o| o.is_gt()),
        Term::Lt(a, b) => cmp(a, b, model, |o| o.is_lt()),
        Term::Ite(c, t, e) => {
            if eval_bool(c, model)? {
                eval(t, model)
            } else {
                eval(e, model)
            }
        }
    }
}

fn cmp(
    a: &Term,
    b: &Term,
    model: &SmtModel,
    pred: impl Fn(std::cmp::Ordering) -> bool,
) -> Result<Value, SolverError> {
    let ra = eval(a, model)?
        .as_rat()
        .ok_or_else(|| SolverError::Malformed(format!("non-numeric comparison on `{a}`")))?;
    let rb = eval(b, model)?
        .as_rat()
        .ok_or_else(|| SolverError::Malformed(format!("non-numeric comparison on `{b}`")))?;
    Ok(Value::Bool(pred(ra.cmp(&rb))))
}

fn eval_bool(term: &Term, model: &SmtModel) -> Result<bool, SolverError> {
    eval(term, model)?
        .as_bool()
        .ok_or_else(|| SolverError::Malformed(format!("`{term}` is not boolean")))
}

/// Fails with the first assertion the model does not satisfy.
pub fn validate_model(script: &SmtScript, model: &SmtModel) -> Result<(), SolverError> {
    for (index, assert) in script.asserts.iter().enumerate() {
        if !eval_bool(assert, model)? {
            return Err(SolverError::ModelInvalid { index, term: assert.to_string() });
        }
    }
    Ok(())
}
