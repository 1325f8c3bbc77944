//! Canonical text rendering of elaborated contracts.
//!
//! `render` emits source the parser accepts; re-parsing the output yields a
//! structurally identical contract.

use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::{
    BinOp, Contract, Domain, Expr, ParamDecl, ProtocolPattern, ServiceDecl, Stmt, VarRef,
    Visibility,
};
use crate::value::Value;

pub fn render(contract: &Contract) -> String {
    let mut out = String::new();
    out.push_str("contract ");
    out.push_str(&contract.name);
    out.push_str(" {\n");

    out.push_str("  resources {\n");
    for r in &contract.resources {
        out.push_str("    ");
        out.push_str(&r.name);
        out.push_str(": ");
        render_domain(&r.domain, &mut out);
        out.push_str(" = ");
        render_value(&r.init, &mut out);
        out.push_str(";\n");
    }
    out.push_str("  }\n");

    for s in &contract.services {
        render_service(contract, s, &mut out);
    }

    out.push_str("  protocol {\n    ");
    render_pattern(&contract.protocol, &mut out, false);
    out.push_str("\n  }\n");

    out.push_str("}\n");
    out
}

fn render_domain(d: &Domain, out: &mut String) {
    match d {
        Domain::Bool => out.push_str("bool"),
        Domain::Int { lo, hi } => {
            out.push_str("int[");
            out.push_str(&alloc::format!("{lo}"));
            out.push_str("..");
            out.push_str(&alloc::format!("{hi}"));
            out.push(']');
        }
        Domain::Enum(labels) => {
            out.push_str("enum { ");
            for (i, l) in labels.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(l);
            }
            out.push_str(" }");
        }
    }
}

fn render_value(v: &Value, out: &mut String) {
    match v {
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Int(n) => out.push_str(&alloc::format!("{n}")),
        Value::Enum(l) => out.push_str(l),
    }
}

fn render_params(params: &[ParamDecl], out: &mut String) {
    out.push('(');
    for (i, p) in params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&p.name);
        out.push_str(": ");
        render_domain(&p.domain, out);
    }
    out.push(')');
}

fn render_service(contract: &Contract, s: &ServiceDecl, out: &mut String) {
    out.push_str("  service ");
    out.push(match s.visibility {
        Visibility::Public => '+',
        Visibility::Private => '-',
    });
    out.push_str(&s.name);
    render_params(&s.inputs, out);
    if !s.outputs.is_empty() {
        out.push_str(" -> ");
        render_params(&s.outputs, out);
    }
    out.push_str(" {\n    guard ");
    render_expr(&s.guard, contract, s, out, 0);
    out.push_str(";\n    pre ");
    render_expr(&s.pre, contract, s, out, 0);
    out.push_str(";\n    effect {\n");
    render_stmts(&s.behavior, contract, s, out, 3);
    out.push_str("    }\n  }\n");
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn render_stmts(stmts: &[Stmt], contract: &Contract, svc: &ServiceDecl, out: &mut String, depth: usize) {
    for st in stmts {
        indent(out, depth);
        match st {
            Stmt::Assign { resource, expr } => {
                out.push_str(&contract.resources[*resource as usize].name);
                out.push_str(" = ");
                render_expr(expr, contract, svc, out, 0);
                out.push_str(";\n");
            }
            Stmt::Choice(branches) => {
                out.push_str("choice {\n");
                for b in branches {
                    indent(out, depth + 1);
                    out.push_str("{\n");
                    render_stmts(b, contract, svc, out, depth + 2);
                    indent(out, depth + 1);
                    out.push_str("}\n");
                }
                indent(out, depth);
                out.push_str("}\n");
            }
            Stmt::Call { service } => {
                out.push_str("call ");
                out.push_str(&contract.services[*service as usize].name);
                out.push_str(";\n");
            }
            Stmt::Block => out.push_str("block;\n"),
            Stmt::Return(bindings) => {
                out.push_str("return");
                for (i, (idx, expr)) in bindings.iter().enumerate() {
                    out.push_str(if i == 0 { " " } else { ", " });
                    out.push_str(&svc.outputs[*idx as usize].name);
                    out.push_str(" = ");
                    render_expr(expr, contract, svc, out, 0);
                }
                out.push_str(";\n");
            }
        }
    }
}

// Precedence levels for minimal parenthesization: or(1) < and(2) < not(3) <
// comparison(4) < additive(5) < atoms(6).
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op, .. } => match op {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
        },
        Expr::Not(_) => 3,
        _ => 6,
    }
}

fn render_expr(e: &Expr, contract: &Contract, svc: &ServiceDecl, out: &mut String, min_prec: u8) {
    let prec = precedence(e);
    let needs_parens = prec < min_prec;
    if needs_parens {
        out.push('(');
    }
    match e {
        Expr::Lit(v) => render_value(v, out),
        Expr::Var(VarRef::Resource(i)) => out.push_str(&contract.resources[*i as usize].name),
        Expr::Var(VarRef::Param(i)) => out.push_str(&svc.inputs[*i as usize].name),
        Expr::Not(inner) => {
            out.push_str("not ");
            render_expr(inner, contract, svc, out, 3);
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            // Left-associative chains print without parens on the left;
            // comparisons are non-chaining so both sides need the next level.
            let (lp, rp) = match op {
                BinOp::Or => (1, 2),
                BinOp::And => (2, 3),
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => (5, 5),
                BinOp::Add | BinOp::Sub => (5, 6),
            };
            render_expr(lhs, contract, svc, out, lp);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            render_expr(rhs, contract, svc, out, rp);
        }
    }
    if needs_parens {
        out.push(')');
    }
}

fn render_pattern(p: &ProtocolPattern, out: &mut String, atom_position: bool) {
    match p {
        ProtocolPattern::Symbol { request, service } => {
            out.push(if *request { '?' } else { '!' });
            out.push_str(service);
        }
        ProtocolPattern::Seq(items) => {
            if atom_position {
                out.push('(');
            }
            let mut first = true;
            for item in items {
                if !first {
                    out.push(' ');
                }
                first = false;
                render_pattern(item, out, !matches!(item, ProtocolPattern::Symbol { .. } | ProtocolPattern::Opt(_) | ProtocolPattern::Star(_)));
            }
            if atom_position {
                out.push(')');
            }
        }
        ProtocolPattern::Alt(items) => {
            if atom_position {
                out.push('(');
            }
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                render_pattern(item, out, !matches!(item, ProtocolPattern::Symbol { .. } | ProtocolPattern::Opt(_) | ProtocolPattern::Star(_)));
            }
            if atom_position {
                out.push(')');
            }
        }
        ProtocolPattern::Opt(inner) => {
            render_pattern_atom(inner, out);
            out.push('?');
        }
        ProtocolPattern::Star(inner) => {
            render_pattern_atom(inner, out);
            out.push('*');
        }
    }
}

// Postfix operators bind to a single atom, so anything compound must be
// parenthesized under them.
fn render_pattern_atom(p: &ProtocolPattern, out: &mut String) {
    match p {
        ProtocolPattern::Symbol { .. } => render_pattern(p, out, false),
        _ => {
            out.push('(');
            render_pattern(p, out, false);
            out.push(')');
        }
    }
}

/// Render a protocol pattern on its own (used by the CLI `protocol` command).
pub fn render_pattern_text(p: &ProtocolPattern) -> String {
    let mut s = String::new();
    render_pattern(p, &mut s, false);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_contract;

    #[test]
    fn round_trips_minimal_contract() {
        let src = "contract C { resources { b: bool = false; } \
            service +m() -> (r: bool) { guard true; pre true; effect { return r = true; } } \
            protocol { (?m !m)* } }";
        let c1 = parse_contract(src).unwrap();
        let printed = render(&c1);
        let c2 = parse_contract(&printed)
            .unwrap_or_else(|e| panic!("re-parse failed: {e}\n{printed}"));
        assert_eq!(c1, c2);
    }

    #[test]
    fn round_trips_nested_expressions() {
        let src = "contract C { resources { n: int[0..9] = 0; b: bool = true; } \
            service +m(a: int[0..3]) -> (r: bool) { \
              guard not (n >= 5) and b or n == 0; pre a + 1 <= 3; \
              effect { n = n + a - 1; choice { { return r = true; } { block; } } } } \
            protocol { ?m !m | (?m !m)? } }";
        let c1 = parse_contract(src).unwrap();
        let printed = render(&c1);
        let c2 = parse_contract(&printed)
            .unwrap_or_else(|e| panic!("re-parse failed: {e}\n{printed}"));
        assert_eq!(c1, c2);
    }
}
