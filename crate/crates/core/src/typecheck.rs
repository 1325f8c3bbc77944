//! Type and invariant checking for elaborated contracts.
//!
//! The checker accumulates diagnostics instead of stopping at the first
//! problem; an empty result means the contract is well-typed and safe to hand
//! to the transition-system builder. Checked here: domain validity and the
//! integer-size cap, init values inside their domains, expression typing,
//! output coverage on every return path, and the path discipline of behaviors
//! (every maximal path ends in `return`, `block`, or a trailing `call`).

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{BinOp, Contract, Domain, Expr, ParamDecl, ServiceDecl, Stmt, VarDecl, VarRef};
use crate::value::Value;

/// Largest allowed bounded-int domain, `hi - lo + 1`. Keeps request
/// enumeration and state spaces desk-scale.
pub const DEFAULT_INT_DOMAIN_CAP: u64 = 4096;

/// One problem found by the typechecker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// What the problem is attached to, e.g. `resource Balance` or
    /// `service deposit`.
    pub context: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.context, self.message)
    }
}

/// Inferred expression type. Enum label literals start out domain-agnostic
/// and are checked for membership once compared against a known domain.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Ty {
    Bool,
    Int,
    EnumOf(Arc<[Arc<str>]>),
    EnumLit(Arc<str>),
    Error,
}

/// How a statement list can finish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Falls {
    /// Every path hits `return` or `block`.
    No,
    /// Some path ends exactly at a `call` (legal tail position).
    AfterCall,
    /// Some path reaches the end without any terminator.
    Plain,
}

struct Checker<'a> {
    contract: &'a Contract,
    diagnostics: Vec<Diagnostic>,
}

impl<'a> Checker<'a> {
    fn report(&mut self, context: impl Into<String>, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic { context: context.into(), message: message.into() });
    }

    fn check_domain(&mut self, context: &str, domain: &Domain) {
        match domain {
            Domain::Bool => {}
            Domain::Int { lo, hi } => {
                if lo > hi {
                    self.report(context, format!("empty integer domain [{lo}..{hi}]"));
                } else if domain.size() > DEFAULT_INT_DOMAIN_CAP {
                    self.report(
                        context,
                        format!(
                            "integer domain [{lo}..{hi}] has {} values, cap is {}",
                            domain.size(),
                            DEFAULT_INT_DOMAIN_CAP
                        ),
                    );
                }
            }
            Domain::Enum(labels) => {
                if labels.is_empty() {
                    self.report(context, "enumeration has no labels");
                }
            }
        }
    }

    fn check_resource(&mut self, r: &VarDecl) {
        let context = format!("resource {}", r.name);
        self.check_domain(&context, &r.domain);
        if !r.domain.contains(&r.init) {
            self.report(&context, format!("init value {} not in domain", r.init));
        }
    }

    fn ty_of_domain(domain: &Domain) -> Ty {
        match domain {
            Domain::Bool => Ty::Bool,
            Domain::Int { .. } => Ty::Int,
            Domain::Enum(labels) => Ty::EnumOf(labels.clone()),
        }
    }

    fn infer(&mut self, context: &str, expr: &Expr, svc: &ServiceDecl) -> Ty {
        match expr {
            Expr::Lit(Value::Bool(_)) => Ty::Bool,
            Expr::Lit(Value::Int(_)) => Ty::Int,
            Expr::Lit(Value::Enum(l)) => Ty::EnumLit(l.clone()),
            Expr::Var(VarRef::Resource(i)) => {
                Self::ty_of_domain(&self.contract.resources[*i as usize].domain)
            }
            Expr::Var(VarRef::Param(i)) => Self::ty_of_domain(&svc.inputs[*i as usize].domain),
            Expr::Not(inner) => {
                let t = self.infer(context, inner, svc);
                if !matches!(t, Ty::Bool | Ty::Error) {
                    self.report(context, "`not` applied to a non-boolean");
                }
                Ty::Bool
            }
            Expr::Binary { op, lhs, rhs, .. } => {
                let lt = self.infer(context, lhs, svc);
                let rt = self.infer(context, rhs, svc);
                match op {
                    BinOp::And | BinOp::Or => {
                        for t in [&lt, &rt] {
                            if !matches!(t, Ty::Bool | Ty::Error) {
                                self.report(context, format!("`{}` applied to a non-boolean", op.symbol()));
                                break;
                            }
                        }
                        Ty::Bool
                    }
                    BinOp::Add | BinOp::Sub => {
                        for t in [&lt, &rt] {
                            if !matches!(t, Ty::Int | Ty::Error) {
                                self.report(context, format!("arithmetic `{}` on a non-integer", op.symbol()));
                                break;
                            }
                        }
                        Ty::Int
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        for t in [&lt, &rt] {
                            if !matches!(t, Ty::Int | Ty::Error) {
                                self.report(context, format!("ordering `{}` on a non-integer", op.symbol()));
                                break;
                            }
                        }
                        Ty::Bool
                    }
                    BinOp::Eq | BinOp::Ne => {
                        self.check_eq_compatible(context, &lt, &rt);
                        Ty::Bool
                    }
                }
            }
        }
    }

    fn check_eq_compatible(&mut self, context: &str, lt: &Ty, rt: &Ty) {
        match (lt, rt) {
            (Ty::Error, _) | (_, Ty::Error) => {}
            (Ty::Bool, Ty::Bool) | (Ty::Int, Ty::Int) => {}
            (Ty::EnumOf(a), Ty::EnumOf(b)) => {
                if a != b {
                    self.report(context, "equality between distinct enumerations");
                }
            }
            (Ty::EnumOf(d), Ty::EnumLit(l)) | (Ty::EnumLit(l), Ty::EnumOf(d)) => {
                if !d.iter().any(|x| x == l) {
                    self.report(context, format!("label `{l}` not in the compared enumeration"));
                }
            }
            (Ty::EnumLit(_), Ty::EnumLit(_)) => {}
            _ => self.report(context, "equality between incompatible types"),
        }
    }

    /// Expression assignable to a target domain?
    fn check_assignable(&mut self, context: &str, ty: &Ty, target: &Domain) {
        match (ty, target) {
            (Ty::Error, _) => {}
            (Ty::Bool, Domain::Bool) => {}
            (Ty::Int, Domain::Int { .. }) => {}
            (Ty::EnumOf(a), Domain::Enum(b)) => {
                if a != b {
                    self.report(context, "assignment between distinct enumerations");
                }
            }
            (Ty::EnumLit(l), Domain::Enum(d)) => {
                if !d.iter().any(|x| x == l) {
                    self.report(context, format!("label `{l}` not in the target enumeration"));
                }
            }
            _ => self.report(context, "assignment of incompatible type"),
        }
    }

    fn check_expr_bool(&mut self, context: &str, expr: &Expr, svc: &ServiceDecl) {
        let t = self.infer(context, expr, svc);
        if !matches!(t, Ty::Bool | Ty::Error) {
            self.report(context, "expression must be boolean");
        }
    }

    fn check_stmts(&mut self, context: &str, stmts: &[Stmt], svc: &ServiceDecl) -> Falls {
        let mut falls = Falls::Plain; // empty list falls through plainly
        let mut reported_unreachable = false;
        for (i, stmt) in stmts.iter().enumerate() {
            if i > 0 && falls == Falls::No && !reported_unreachable {
                self.report(context, "unreachable statement after return or block");
                reported_unreachable = true;
            }
            falls = match stmt {
                Stmt::Assign { resource, expr } => {
                    let ty = self.infer(context, expr, svc);
                    let target = self.contract.resources[*resource as usize].domain.clone();
                    self.check_assignable(context, &ty, &target);
                    Falls::Plain
                }
                Stmt::Choice(branches) => {
                    let mut joined = Falls::No;
                    for b in branches {
                        let f = self.check_stmts(context, b, svc);
                        joined = joined.max(f);
                    }
                    joined
                }
                Stmt::Call { .. } => Falls::AfterCall,
                Stmt::Block => Falls::No,
                Stmt::Return(bindings) => {
                    for (idx, expr) in bindings {
                        let ty = self.infer(context, expr, svc);
                        let target = svc.outputs[*idx as usize].domain.clone();
                        self.check_assignable(context, &ty, &target);
                    }
                    for (oi, o) in svc.outputs.iter().enumerate() {
                        if !bindings.iter().any(|(idx, _)| *idx == oi as u32) {
                            self.report(context, format!("output `{}` not bound on a return path", o.name));
                        }
                    }
                    Falls::No
                }
            };
        }
        falls
    }

    fn check_service(&mut self, svc: &ServiceDecl) {
        let context = format!("service {}", svc.name);
        for p in svc.inputs.iter().chain(svc.outputs.iter()) {
            self.check_domain(&format!("{context}, parameter {}", p.name), &p.domain);
        }
        self.check_expr_bool(&format!("{context}, guard"), &svc.guard, svc);
        self.check_expr_bool(&format!("{context}, pre"), &svc.pre, svc);
        let falls = self.check_stmts(&context, &svc.behavior, svc);
        if falls == Falls::Plain {
            self.report(
                &context,
                "behavior can reach its end without `return`, `block`, or a trailing `call`",
            );
        }
    }
}

/// Check all contract invariants; an empty list means well-typed.
pub fn typecheck(contract: &Contract) -> Vec<Diagnostic> {
    let mut checker = Checker { contract, diagnostics: Vec::new() };
    for r in &contract.resources {
        checker.check_resource(r);
    }
    for s in &contract.services {
        checker.check_service(s);
    }
    if !contract.services.iter().any(|s| s.is_public()) {
        checker.report(format!("contract {}", contract.name), "no public service declared");
    }
    checker.diagnostics
}

/// Convenience used widely in tests and by the CLI: parse then typecheck,
/// formatting diagnostics into a single message.
pub fn parse_and_check(source: &str) -> Result<Contract, String> {
    let contract = crate::parser::parse_contract(source).map_err(|e| alloc::format!("{e}"))?;
    let diagnostics = typecheck(&contract);
    if diagnostics.is_empty() {
        Ok(contract)
    } else {
        let mut msg = String::new();
        for d in &diagnostics {
            if !msg.is_empty() {
                msg.push('\n');
            }
            msg.push_str(&alloc::format!("{d}"));
        }
        Err(msg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_contract;

    fn check(src: &str) -> Vec<Diagnostic> {
        typecheck(&parse_contract(src).unwrap())
    }

    #[test]
    fn minimal_contract_is_clean() {
        let src = "contract C { resources { b: bool = false; } \
            service +m() -> (r: bool) { guard true; pre true; effect { return r = true; } } \
            protocol { (?m !m)* } }";
        assert!(check(src).is_empty());
    }

    #[test]
    fn init_outside_domain() {
        let src = "contract C { resources { b: bool = 5; } \
            service +m() -> (r: bool) { guard true; pre true; effect { return r = true; } } \
            protocol { (?m !m)* } }";
        let diags = check(src);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("not in domain"));
    }

    #[test]
    fn init_outside_int_range() {
        let src = "contract C { resources { n: int[0..3] = 7; } \
            service +m() -> (r: bool) { guard true; pre true; effect { return r = true; } } \
            protocol { (?m !m)* } }";
        let diags = check(src);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("not in domain"));
    }

    #[test]
    fn output_not_bound_on_branch() {
        let src = "contract C { resources { b: bool = false; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { choice { { return r = true; } { return; } } } } \
            protocol { (?m !m)* } }";
        let diags = check(src);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("not bound"));
    }

    #[test]
    fn int_domain_cap_enforced() {
        let src = "contract C { resources { n: int[0..5000] = 0; } \
            service +m() -> (r: bool) { guard true; pre true; effect { return r = true; } } \
            protocol { (?m !m)* } }";
        let diags = check(src);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("cap"));
    }

    #[test]
    fn arithmetic_on_bool_rejected() {
        let src = "contract C { resources { b: bool = false; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { b = b + b; return r = true; } } \
            protocol { (?m !m)* } }";
        let diags = check(src);
        assert!(diags.iter().any(|d| d.message.contains("non-integer")));
    }

    #[test]
    fn equality_across_domains_rejected() {
        let src = "contract C { resources { n: int[0..3] = 0; b: bool = false; } \
            service +m() -> (r: bool) { guard n == b; pre true; effect { return r = true; } } \
            protocol { (?m !m)* } }";
        let diags = check(src);
        assert!(diags.iter().any(|d| d.message.contains("incompatible")));
    }

    #[test]
    fn behavior_must_terminate_paths() {
        let src = "contract C { resources { n: int[0..3] = 0; } \
            service +m() -> (r: bool) { guard true; pre true; effect { n = 1; } } \
            protocol { (?m !m)* } }";
        let diags = check(src);
        assert!(diags.iter().any(|d| d.message.contains("without `return`")));
    }

    #[test]
    fn trailing_call_is_a_valid_path_end() {
        let src = "contract C { resources { n: int[0..3] = 0; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { choice { { return r = true; } { call p; } } } } \
            service -p() { guard true; pre true; effect { return; } } \
            protocol { (?m !m)* } }";
        assert!(check(src).is_empty());
    }

    #[test]
    fn unreachable_statement_reported() {
        let src = "contract C { resources { n: int[0..3] = 0; } \
            service +m() -> (r: bool) { guard true; pre true; \
              effect { return r = true; n = 1; } } \
            protocol { (?m !m)* } }";
        let diags = check(src);
        assert!(diags.iter().any(|d| d.message.contains("unreachable")));
    }

    #[test]
    fn requires_a_public_service() {
        let src = "contract C { resources { b: bool = false; } \
            service -p() { guard true; pre true; effect { return; } } \
            protocol { } }";
        let diags = check(src);
        assert!(diags.iter().any(|d| d.message.contains("no public service")));
    }

    #[test]
    fn label_membership_checked_in_comparisons() {
        let src = "contract C { resources { s: enum { open, closed } = open; t: enum { red, blue } = red; } \
            service +m() -> (r: bool) { guard s == red; pre true; effect { return r = true; } } \
            protocol { (?m !m)* } }";
        let diags = check(src);
        assert!(diags.iter().any(|d| d.message.contains("not in the compared enumeration")));
    }
}
