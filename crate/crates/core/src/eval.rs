//! Expression evaluation and enumeration of behavior outcomes.
//!
//! `evaluate` is total and pure on typechecked inputs. Integer arithmetic
//! saturates: `+`/`-` clamp to the left operand's declared range, and
//! assignments (to resources or outputs) clamp to the target domain, so every
//! produced valuation stays inside its finite domains.
//!
//! `enumerate_outcomes` resolves every `choice` branch (internal, demonic
//! nondeterminism), executes assignments in sequence order, and stops at
//! `return`, `block`, or the first `call`. Falling off the end of a behavior
//! yields a `Returned` outcome with no output bindings; the transition-system
//! builder interprets that as an implicit return for private frames and as
//! unconstrained behavior for public frames that still owe outputs.

use alloc::vec::Vec;

use crate::ast::{BinOp, Expr, ParamDecl, Stmt, VarDecl, VarRef};
use crate::value::{Bindings, Valuation, Value};

/// One way a behavior fragment can finish, up to its first private call.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    /// Execution completed; `outputs` bind declared outputs in declaration
    /// order (empty when control fell off the end of the statement list).
    Returned { state: Valuation, outputs: Bindings },
    /// Execution entered a permanent wait.
    Blocked,
    /// Execution reached `call service`; `remainder` is what runs in this
    /// frame once the callee returns.
    Calls { service: u32, state: Valuation, remainder: Vec<Stmt> },
}

/// Evaluate an expression in a state with concrete parameter values.
pub fn evaluate(expr: &Expr, state: &Valuation, params: &[Value]) -> Value {
    match expr {
        Expr::Lit(v) => v.clone(),
        Expr::Var(VarRef::Resource(i)) => state.get(*i).clone(),
        Expr::Var(VarRef::Param(i)) => params[*i as usize].clone(),
        Expr::Not(inner) => Value::Bool(!evaluate(inner, state, params).as_bool()),
        Expr::Binary { op, lhs, rhs, dom } => {
            let l = evaluate(lhs, state, params);
            let r = evaluate(rhs, state, params);
            match op {
                BinOp::And => Value::Bool(l.as_bool() && r.as_bool()),
                BinOp::Or => Value::Bool(l.as_bool() || r.as_bool()),
                BinOp::Add | BinOp::Sub => {
                    let raw = match op {
                        BinOp::Add => l.as_int() + r.as_int(),
                        _ => l.as_int() - r.as_int(),
                    };
                    let clamped = match dom {
                        Some((lo, hi)) => raw.max(*lo).min(*hi),
                        None => raw,
                    };
                    Value::Int(clamped)
                }
                BinOp::Eq => Value::Bool(l == r),
                BinOp::Ne => Value::Bool(l != r),
                BinOp::Lt => Value::Bool(l.as_int() < r.as_int()),
                BinOp::Le => Value::Bool(l.as_int() <= r.as_int()),
                BinOp::Gt => Value::Bool(l.as_int() > r.as_int()),
                BinOp::Ge => Value::Bool(l.as_int() >= r.as_int()),
            }
        }
    }
}

fn clamp_to(domain: &crate::ast::Domain, v: Value) -> Value {
    match v {
        Value::Int(n) => Value::Int(domain.clamp_int(n)),
        other => other,
    }
}

fn exec(
    todo: &[Stmt],
    mut state: Valuation,
    params: &[Value],
    resources: &[VarDecl],
    outputs: &[ParamDecl],
    out: &mut Vec<Outcome>,
) {
    let mut i = 0;
    while i < todo.len() {
        match &todo[i] {
            Stmt::Assign { resource, expr } => {
                let v = evaluate(expr, &state, params);
                let v = clamp_to(&resources[*resource as usize].domain, v);
                state.set(*resource, v);
                i += 1;
            }
            Stmt::Block => {
                out.push(Outcome::Blocked);
                return;
            }
            Stmt::Return(bindings) => {
                let outs: Bindings = bindings
                    .iter()
                    .map(|(idx, expr)| {
                        let decl = &outputs[*idx as usize];
                        let v = clamp_to(&decl.domain, evaluate(expr, &state, params));
                        (decl.name.clone(), v)
                    })
                    .collect();
                out.push(Outcome::Returned { state, outputs: outs });
                return;
            }
            Stmt::Call { service } => {
                out.push(Outcome::Calls {
                    service: *service,
                    state,
                    remainder: todo[i + 1..].to_vec(),
                });
                return;
            }
            Stmt::Choice(branches) => {
                let rest = &todo[i + 1..];
                for branch in branches {
                    let merged: Vec<Stmt> = branch.iter().chain(rest.iter()).cloned().collect();
                    exec(&merged, state.clone(), params, resources, outputs, out);
                }
                return;
            }
        }
    }
    // Fell off the end of the list: completion without explicit bindings.
    out.push(Outcome::Returned { state, outputs: Bindings::new() });
}

/// All outcomes of running `behavior` from `state` with the given parameter
/// values. Deterministic: branches are explored in source order and exact
/// duplicates are dropped (first occurrence wins).
pub fn enumerate_outcomes(
    behavior: &[Stmt],
    state: &Valuation,
    params: &[Value],
    resources: &[VarDecl],
    outputs: &[ParamDecl],
) -> Vec<Outcome> {
    let mut raw = Vec::new();
    exec(behavior, state.clone(), params, resources, outputs, &mut raw);
    let mut seen: alloc::collections::BTreeSet<Outcome> = alloc::collections::BTreeSet::new();
    let mut out = Vec::new();
    for o in raw {
        if seen.insert(o.clone()) {
            out.push(o);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_contract;
    use crate::value::Value;
    use alloc::vec;

    /// A deposit-like service used across these tests: one int resource, one
    /// int input, two-way internal choice between success and blocking.
    const DEPOSIT_LIKE: &str = "contract T { \
        resources { LoginState: bool = false; Balance: int[0..30] = 0; } \
        service +deposit(amt: int[0..30]) -> (r: bool) { \
          guard LoginState == true; pre amt >= 10; \
          effect { choice { { Balance = Balance + amt; return r = true; } { block; } } } } \
        protocol { (?deposit !deposit)* } }";

    fn contract() -> crate::ast::Contract {
        parse_contract(DEPOSIT_LIKE).unwrap()
    }

    #[test]
    fn guard_false_in_initial_state() {
        let c = contract();
        let state = Valuation(vec![Value::Bool(false), Value::Int(0)]);
        let svc = &c.services[0];
        assert_eq!(evaluate(&svc.guard, &state, &[]), Value::Bool(false));
    }

    #[test]
    fn precondition_at_exact_bound() {
        let c = contract();
        let state = Valuation(vec![Value::Bool(true), Value::Int(0)]);
        let svc = &c.services[0];
        assert_eq!(evaluate(&svc.pre, &state, &[Value::Int(10)]), Value::Bool(true));
        assert_eq!(evaluate(&svc.pre, &state, &[Value::Int(9)]), Value::Bool(false));
    }

    #[test]
    fn addition_saturates_at_domain_hi() {
        let c = contract();
        let state = Valuation(vec![Value::Bool(true), Value::Int(28)]);
        // Balance + amt inside the assignment of the first branch
        let svc = &c.services[0];
        let expr = match &svc.behavior[0] {
            Stmt::Choice(branches) => match &branches[0][0] {
                Stmt::Assign { expr, .. } => expr,
                other => panic!("unexpected stmt {other:?}"),
            },
            other => panic!("unexpected stmt {other:?}"),
        };
        assert_eq!(evaluate(expr, &state, &[Value::Int(10)]), Value::Int(30));
    }

    #[test]
    fn choice_yields_both_outcomes() {
        let c = contract();
        let svc = &c.services[0];
        let state = Valuation(vec![Value::Bool(true), Value::Int(0)]);
        let outcomes =
            enumerate_outcomes(&svc.behavior, &state, &[Value::Int(10)], &c.resources, &svc.outputs);
        assert_eq!(outcomes.len(), 2);
        match &outcomes[0] {
            Outcome::Returned { state, outputs } => {
                assert_eq!(state.get(1), &Value::Int(10));
                assert_eq!(outputs.len(), 1);
                assert_eq!(outputs[0].1, Value::Bool(true));
            }
            other => panic!("unexpected outcome {other:?}"),
        }
        assert_eq!(outcomes[1], Outcome::Blocked);
    }

    #[test]
    fn plain_return_keeps_state() {
        let src = "contract T { resources { b: bool = false; } \
            service +m() -> (r: bool) { guard true; pre true; effect { return r = true; } } \
            protocol { (?m !m)* } }";
        let c = parse_contract(src).unwrap();
        let svc = &c.services[0];
        let state = Valuation(vec![Value::Bool(false)]);
        let outcomes = enumerate_outcomes(&svc.behavior, &state, &[], &c.resources, &svc.outputs);
        assert_eq!(outcomes.len(), 1);
        assert!(matches!(&outcomes[0], Outcome::Returned { state: s, .. } if *s == state));
    }

    #[test]
    fn call_stops_enumeration_with_remainder() {
        let src = "contract T { resources { n: int[0..3] = 0; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { choice { { return r = true; } { call p; n = 1; return r = false; } } } } \
            service -p() { guard true; pre true; effect { return; } } \
            protocol { (?m !m)* } }";
        let c = parse_contract(src).unwrap();
        let svc = &c.services[0];
        let state = Valuation(vec![Value::Int(0)]);
        let outcomes = enumerate_outcomes(&svc.behavior, &state, &[], &c.resources, &svc.outputs);
        assert_eq!(outcomes.len(), 2);
        match &outcomes[1] {
            Outcome::Calls { service, remainder, .. } => {
                assert_eq!(*service, 1);
                assert_eq!(remainder.len(), 2);
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn duplicate_outcomes_collapse() {
        let src = "contract T { resources { b: bool = false; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { choice { { return r = true; } { return r = true; } } } } \
            protocol { (?m !m)* } }";
        let c = parse_contract(src).unwrap();
        let svc = &c.services[0];
        let state = Valuation(vec![Value::Bool(false)]);
        let outcomes = enumerate_outcomes(&svc.behavior, &state, &[], &c.resources, &svc.outputs);
        assert_eq!(outcomes.len(), 1);
    }

    #[test]
    fn outcome_count_bounded_by_choice_nodes() {
        // two nested binary choices -> at most 4 outcomes
        let src = "contract T { resources { n: int[0..9] = 0; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { choice { { n = 1; } { n = 2; } } \
                       choice { { return r = true; } { return r = false; } } } } \
            protocol { (?m !m)* } }";
        let c = parse_contract(src).unwrap();
        let svc = &c.services[0];
        let state = Valuation(vec![Value::Int(0)]);
        let outcomes = enumerate_outcomes(&svc.behavior, &state, &[], &c.resources, &svc.outputs);
        assert_eq!(outcomes.len(), 4);
        for o in &outcomes {
            match o {
                Outcome::Returned { state, .. } => {
                    let n = state.get(0).as_int();
                    assert!((0..=9).contains(&n));
                }
                other => panic!("unexpected outcome {other:?}"),
            }
        }
    }

    #[test]
    fn subtraction_saturates_at_domain_lo() {
        let src = "contract T { resources { n: int[0..9] = 0; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { n = n - 5; return r = true; } } \
            protocol { (?m !m)* } }";
        let c = parse_contract(src).unwrap();
        let svc = &c.services[0];
        let state = Valuation(vec![Value::Int(2)]);
        let outcomes = enumerate_outcomes(&svc.behavior, &state, &[], &c.resources, &svc.outputs);
        match &outcomes[0] {
            Outcome::Returned { state, .. } => assert_eq!(state.get(0), &Value::Int(0)),
            other => panic!("unexpected outcome {other:?}"),
        }
    }
}
