//! Recursive descent parser and name resolution for `.ctr` sources.
//!
//! Parsing runs in two phases. The descent phase builds a raw tree that still
//! holds identifier text and source positions; elaboration then resolves
//! every name (resources, parameters, enum labels, call targets, protocol
//! symbols) and produces an elaborated [`Contract`]. Both phases report
//! [`ParseError`] with a position inside the input. Value- and type-level
//! checking is deferred to [`crate::typecheck`].

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{
    BinOp, Contract, Domain, Expr, ParamDecl, ProtocolPattern, ServiceDecl, Stmt, VarDecl, VarRef,
    Visibility,
};
use crate::lexer::{lex, Pos, Tok, Token};
use crate::value::Value;

/// Parse failure with position and, for syntax errors, the token set that
/// would have been accepted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl ParseError {
    fn at(pos: Pos, message: impl Into<String>) -> Self {
        ParseError { line: pos.line, col: pos.col, message: message.into(), expected: Vec::new() }
    }
}

// ---------------------------------------------------------------------------
// Raw tree (descent output, names unresolved)
// ---------------------------------------------------------------------------

struct RawContract {
    name: Arc<str>,
    resources: Vec<RawVar>,
    services: Vec<RawService>,
    protocol: RawPat,
}

struct RawVar {
    name: Arc<str>,
    pos: Pos,
    domain: Domain,
    init: Value,
}

struct RawService {
    name: Arc<str>,
    pos: Pos,
    visibility: Visibility,
    inputs: Vec<ParamDecl>,
    outputs: Vec<ParamDecl>,
    guard: RawExpr,
    pre: RawExpr,
    body: Vec<RawStmt>,
}

enum RawExpr {
    Lit(Value),
    Ident(Arc<str>, Pos),
    Binary { op: BinOp, lhs: Box<RawExpr>, rhs: Box<RawExpr> },
    Not(Box<RawExpr>),
}

enum RawStmt {
    Assign { name: Arc<str>, pos: Pos, expr: RawExpr },
    Choice(Vec<Vec<RawStmt>>),
    Call { name: Arc<str>, pos: Pos },
    Block,
    Return(Vec<(Arc<str>, Pos, RawExpr)>),
}

enum RawPat {
    Symbol { request: bool, service: Arc<str>, pos: Pos },
    Seq(Vec<RawPat>),
    Alt(Vec<RawPat>),
    Opt(Box<RawPat>),
    Star(Box<RawPat>),
}

// ---------------------------------------------------------------------------
// Descent
// ---------------------------------------------------------------------------

struct TokenCursor {
    tokens: Vec<Token>,
    at: usize,
}

impl TokenCursor {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.at].tok.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[want.describe()]))
        }
    }

    fn expect_ident(&mut self) -> Result<(Arc<str>, Pos), ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok((name, pos))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == want {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        ParseError {
            line: self.pos().line,
            col: self.pos().col,
            message: alloc::format!("unexpected {}", self.peek().describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn parse_domain(c: &mut TokenCursor) -> Result<Domain, ParseError> {
    match c.peek().clone() {
        Tok::KwBool => {
            c.bump();
            Ok(Domain::Bool)
        }
        Tok::KwInt => {
            c.bump();
            c.expect(Tok::LBracket)?;
            let lo = parse_int(c)?;
            c.expect(Tok::DotDot)?;
            let hi = parse_int(c)?;
            c.expect(Tok::RBracket)?;
            Ok(Domain::Int { lo, hi })
        }
        Tok::KwEnum => {
            c.bump();
            c.expect(Tok::LBrace)?;
            let mut labels: Vec<Arc<str>> = Vec::new();
            let (first, first_pos) = c.expect_ident()?;
            labels.push(first);
            let mut dup_pos = first_pos;
            while c.eat(&Tok::Comma) {
                let (l, p) = c.expect_ident()?;
                if labels.contains(&l) {
                    dup_pos = p;
                    return Err(ParseError::at(dup_pos, alloc::format!("duplicate enum label `{l}`")));
                }
                labels.push(l);
            }
            c.expect(Tok::RBrace)?;
            Ok(Domain::Enum(labels.into()))
        }
        _ => Err(c.unexpected(&["`bool`", "`int`", "`enum`"])),
    }
}

fn parse_int(c: &mut TokenCursor) -> Result<i64, ParseError> {
    match c.peek().clone() {
        Tok::Int(n) => {
            c.bump();
            Ok(n)
        }
        _ => Err(c.unexpected(&["integer"])),
    }
}

/// Literal in a resource initializer: bool, int, or enum label.
fn parse_literal(c: &mut TokenCursor) -> Result<Value, ParseError> {
    match c.peek().clone() {
        Tok::KwTrue => {
            c.bump();
            Ok(Value::Bool(true))
        }
        Tok::KwFalse => {
            c.bump();
            Ok(Value::Bool(false))
        }
        Tok::Int(n) => {
            c.bump();
            Ok(Value::Int(n))
        }
        Tok::Ident(l) => {
            c.bump();
            Ok(Value::Enum(l))
        }
        _ => Err(c.unexpected(&["`true`", "`false`", "integer", "identifier"])),
    }
}

fn parse_params(c: &mut TokenCursor) -> Result<Vec<ParamDecl>, ParseError> {
    c.expect(Tok::LParen)?;
    let mut params = Vec::new();
    if c.peek() != &Tok::RParen {
        loop {
            let (name, pos) = c.expect_ident()?;
            if params.iter().any(|p: &ParamDecl| p.name == name) {
                return Err(ParseError::at(pos, alloc::format!("duplicate parameter `{name}`")));
            }
            c.expect(Tok::Colon)?;
            let domain = parse_domain(c)?;
            params.push(ParamDecl { name, domain });
            if !c.eat(&Tok::Comma) {
                break;
            }
        }
    }
    c.expect(Tok::RParen)?;
    Ok(params)
}

// Expression precedence, loosest to tightest: or, and, not, comparison, +/-.
fn parse_expr(c: &mut TokenCursor) -> Result<RawExpr, ParseError> {
    parse_or(c)
}

fn parse_or(c: &mut TokenCursor) -> Result<RawExpr, ParseError> {
    let mut lhs = parse_and(c)?;
    while c.eat(&Tok::KwOr) {
        let rhs = parse_and(c)?;
        lhs = RawExpr::Binary { op: BinOp::Or, lhs: Box::new(lhs), rhs: Box::new(rhs) };
    }
    Ok(lhs)
}

fn parse_and(c: &mut TokenCursor) -> Result<RawExpr, ParseError> {
    let mut lhs = parse_not(c)?;
    while c.eat(&Tok::KwAnd) {
        let rhs = parse_not(c)?;
        lhs = RawExpr::Binary { op: BinOp::And, lhs: Box::new(lhs), rhs: Box::new(rhs) };
    }
    Ok(lhs)
}

fn parse_not(c: &mut TokenCursor) -> Result<RawExpr, ParseError> {
    if c.eat(&Tok::KwNot) {
        let inner = parse_not(c)?;
        Ok(RawExpr::Not(Box::new(inner)))
    } else {
        parse_cmp(c)
    }
}

fn parse_cmp(c: &mut TokenCursor) -> Result<RawExpr, ParseError> {
    let lhs = parse_add(c)?;
    let op = match c.peek() {
        Tok::EqEq => BinOp::Eq,
        Tok::NotEq => BinOp::Ne,
        Tok::Lt => BinOp::Lt,
        Tok::Le => BinOp::Le,
        Tok::Gt => BinOp::Gt,
        Tok::Ge => BinOp::Ge,
        _ => return Ok(lhs),
    };
    c.bump();
    let rhs = parse_add(c)?;
    Ok(RawExpr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) })
}

fn parse_add(c: &mut TokenCursor) -> Result<RawExpr, ParseError> {
    let mut lhs = parse_atom(c)?;
    loop {
        let op = match c.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            _ => break,
        };
        c.bump();
        let rhs = parse_atom(c)?;
        lhs = RawExpr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
    }
    Ok(lhs)
}

fn parse_atom(c: &mut TokenCursor) -> Result<RawExpr, ParseError> {
    match c.peek().clone() {
        Tok::Int(n) => {
            c.bump();
            Ok(RawExpr::Lit(Value::Int(n)))
        }
        Tok::KwTrue => {
            c.bump();
            Ok(RawExpr::Lit(Value::Bool(true)))
        }
        Tok::KwFalse => {
            c.bump();
            Ok(RawExpr::Lit(Value::Bool(false)))
        }
        Tok::Ident(name) => {
            let pos = c.pos();
            c.bump();
            Ok(RawExpr::Ident(name, pos))
        }
        Tok::LParen => {
            c.bump();
            let e = parse_expr(c)?;
            c.expect(Tok::RParen)?;
            Ok(e)
        }
        _ => Err(c.unexpected(&["integer", "`true`", "`false`", "identifier", "`(`"])),
    }
}

fn parse_block(c: &mut TokenCursor) -> Result<Vec<RawStmt>, ParseError> {
    c.expect(Tok::LBrace)?;
    let mut stmts = Vec::new();
    while c.peek() != &Tok::RBrace {
        stmts.push(parse_stmt(c)?);
    }
    c.expect(Tok::RBrace)?;
    Ok(stmts)
}

fn parse_stmt(c: &mut TokenCursor) -> Result<RawStmt, ParseError> {
    match c.peek().clone() {
        Tok::KwChoice => {
            c.bump();
            c.expect(Tok::LBrace)?;
            let mut branches = Vec::new();
            branches.push(parse_block(c)?);
            while c.peek() == &Tok::LBrace {
                branches.push(parse_block(c)?);
            }
            c.expect(Tok::RBrace)?;
            Ok(RawStmt::Choice(branches))
        }
        Tok::KwCall => {
            c.bump();
            let (name, pos) = c.expect_ident()?;
            c.expect(Tok::Semi)?;
            Ok(RawStmt::Call { name, pos })
        }
        Tok::KwBlock => {
            c.bump();
            c.expect(Tok::Semi)?;
            Ok(RawStmt::Block)
        }
        Tok::KwReturn => {
            c.bump();
            let mut bindings = Vec::new();
            if c.peek() != &Tok::Semi {
                loop {
                    let (name, pos) = c.expect_ident()?;
                    c.expect(Tok::Assign)?;
                    let expr = parse_expr(c)?;
                    bindings.push((name, pos, expr));
                    if !c.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            c.expect(Tok::Semi)?;
            Ok(RawStmt::Return(bindings))
        }
        Tok::Ident(name) => {
            let pos = c.pos();
            c.bump();
            c.expect(Tok::Assign)?;
            let expr = parse_expr(c)?;
            c.expect(Tok::Semi)?;
            Ok(RawStmt::Assign { name, pos, expr })
        }
        _ => Err(c.unexpected(&["identifier", "`choice`", "`call`", "`block`", "`return`"])),
    }
}

fn parse_pattern(c: &mut TokenCursor) -> Result<RawPat, ParseError> {
    let mut alts = Vec::new();
    alts.push(parse_pattern_seq(c)?);
    while c.eat(&Tok::Pipe) {
        alts.push(parse_pattern_seq(c)?);
    }
    if alts.len() == 1 {
        Ok(alts.pop().unwrap())
    } else {
        Ok(RawPat::Alt(alts))
    }
}

fn parse_pattern_seq(c: &mut TokenCursor) -> Result<RawPat, ParseError> {
    let mut items = Vec::new();
    loop {
        let atom = match c.peek().clone() {
            Tok::Question => {
                c.bump();
                let (service, pos) = c.expect_ident()?;
                RawPat::Symbol { request: true, service, pos }
            }
            Tok::Bang => {
                c.bump();
                let (service, pos) = c.expect_ident()?;
                RawPat::Symbol { request: false, service, pos }
            }
            Tok::LParen => {
                c.bump();
                let inner = parse_pattern(c)?;
                c.expect(Tok::RParen)?;
                inner
            }
            _ => break,
        };
        let atom = match c.peek() {
            Tok::Question => {
                c.bump();
                RawPat::Opt(Box::new(atom))
            }
            Tok::Star => {
                c.bump();
                RawPat::Star(Box::new(atom))
            }
            _ => atom,
        };
        items.push(atom);
    }
    if items.len() == 1 {
        Ok(items.pop().unwrap())
    } else {
        Ok(RawPat::Seq(items))
    }
}

fn parse_raw(c: &mut TokenCursor) -> Result<RawContract, ParseError> {
    c.expect(Tok::KwContract)?;
    let (name, _) = c.expect_ident()?;
    c.expect(Tok::LBrace)?;

    c.expect(Tok::KwResources)?;
    c.expect(Tok::LBrace)?;
    let mut resources = Vec::new();
    while c.peek() != &Tok::RBrace {
        let (rname, pos) = c.expect_ident()?;
        c.expect(Tok::Colon)?;
        let domain = parse_domain(c)?;
        c.expect(Tok::Assign)?;
        let init = parse_literal(c)?;
        c.expect(Tok::Semi)?;
        resources.push(RawVar { name: rname, pos, domain, init });
    }
    c.expect(Tok::RBrace)?;

    let mut services = Vec::new();
    while c.peek() == &Tok::KwService {
        c.bump();
        let visibility = match c.peek() {
            Tok::Plus => {
                c.bump();
                Visibility::Public
            }
            Tok::Minus => {
                c.bump();
                Visibility::Private
            }
            _ => return Err(c.unexpected(&["`+`", "`-`"])),
        };
        let (sname, pos) = c.expect_ident()?;
        let inputs = parse_params(c)?;
        let outputs = if c.eat(&Tok::Arrow) { parse_params(c)? } else { Vec::new() };
        c.expect(Tok::LBrace)?;
        c.expect(Tok::KwGuard)?;
        let guard = parse_expr(c)?;
        c.expect(Tok::Semi)?;
        c.expect(Tok::KwPre)?;
        let pre = parse_expr(c)?;
        c.expect(Tok::Semi)?;
        c.expect(Tok::KwEffect)?;
        let body = parse_block(c)?;
        c.expect(Tok::RBrace)?;
        services.push(RawService { name: sname, pos, visibility, inputs, outputs, guard, pre, body });
    }

    c.expect(Tok::KwProtocol)?;
    c.expect(Tok::LBrace)?;
    let protocol = parse_pattern(c)?;
    c.expect(Tok::RBrace)?;

    c.expect(Tok::RBrace)?;
    c.expect(Tok::Eof)?;
    Ok(RawContract { name, resources, services, protocol })
}

// ---------------------------------------------------------------------------
// Elaboration: name resolution
// ---------------------------------------------------------------------------

struct Scope<'a> {
    resources: &'a [VarDecl],
    /// Input parameters in scope, empty inside guards.
    params: &'a [ParamDecl],
}

impl<'a> Scope<'a> {
    /// Enum labels visible here: labels of every resource domain plus labels
    /// of in-scope parameter domains.
    fn is_enum_label(&self, name: &str) -> bool {
        let in_domain = |d: &Domain| matches!(d, Domain::Enum(ls) if ls.iter().any(|l| &**l == name));
        self.resources.iter().any(|r| in_domain(&r.domain))
            || self.params.iter().any(|p| in_domain(&p.domain))
    }

    fn resolve(&self, name: &str, pos: Pos) -> Result<Expr, ParseError> {
        if let Some(i) = self.params.iter().position(|p| &*p.name == name) {
            return Ok(Expr::Var(VarRef::Param(i as u32)));
        }
        if let Some(i) = self.resources.iter().position(|r| &*r.name == name) {
            return Ok(Expr::Var(VarRef::Resource(i as u32)));
        }
        if self.is_enum_label(name) {
            return Ok(Expr::Lit(Value::Enum(Arc::from(name))));
        }
        Err(ParseError::at(pos, alloc::format!("unknown identifier `{name}`")))
    }
}

fn elaborate_expr(raw: &RawExpr, scope: &Scope<'_>) -> Result<Expr, ParseError> {
    match raw {
        RawExpr::Lit(v) => Ok(Expr::Lit(v.clone())),
        RawExpr::Ident(name, pos) => scope.resolve(name, *pos),
        RawExpr::Not(inner) => Ok(Expr::Not(Box::new(elaborate_expr(inner, scope)?))),
        RawExpr::Binary { op, lhs, rhs } => {
            let lhs = elaborate_expr(lhs, scope)?;
            let rhs = elaborate_expr(rhs, scope)?;
            let dom = match op {
                BinOp::Add | BinOp::Sub => lhs.int_range(scope.resources, scope.params),
                _ => None,
            };
            Ok(Expr::Binary { op: *op, lhs: Box::new(lhs), rhs: Box::new(rhs), dom })
        }
    }
}

fn elaborate_stmts(
    raw: &[RawStmt],
    scope: &Scope<'_>,
    outputs: &[ParamDecl],
    services: &[RawService],
) -> Result<Vec<Stmt>, ParseError> {
    let mut out = Vec::new();
    for stmt in raw {
        out.push(match stmt {
            RawStmt::Assign { name, pos, expr } => {
                if scope.params.iter().any(|p| p.name == *name) {
                    return Err(ParseError::at(*pos, alloc::format!("cannot assign to parameter `{name}`")));
                }
                let resource = scope
                    .resources
                    .iter()
                    .position(|r| r.name == *name)
                    .ok_or_else(|| ParseError::at(*pos, alloc::format!("unknown resource `{name}`")))?;
                Stmt::Assign { resource: resource as u32, expr: elaborate_expr(expr, scope)? }
            }
            RawStmt::Choice(branches) => {
                let mut elaborated = Vec::new();
                for b in branches {
                    elaborated.push(elaborate_stmts(b, scope, outputs, services)?);
                }
                Stmt::Choice(elaborated)
            }
            RawStmt::Call { name, pos } => {
                let idx = services
                    .iter()
                    .position(|s| s.name == *name)
                    .ok_or_else(|| ParseError::at(*pos, alloc::format!("unknown service `{name}`")))?;
                if services[idx].visibility != Visibility::Private {
                    return Err(ParseError::at(
                        *pos,
                        alloc::format!("call target `{name}` must be a private service"),
                    ));
                }
                Stmt::Call { service: idx as u32 }
            }
            RawStmt::Block => Stmt::Block,
            RawStmt::Return(bindings) => {
                let mut resolved: Vec<(u32, Expr)> = Vec::new();
                for (name, pos, expr) in bindings {
                    let idx = outputs
                        .iter()
                        .position(|o| o.name == *name)
                        .ok_or_else(|| ParseError::at(*pos, alloc::format!("unknown output `{name}`")))?;
                    if resolved.iter().any(|(i, _)| *i == idx as u32) {
                        return Err(ParseError::at(*pos, alloc::format!("output `{name}` bound twice")));
                    }
                    resolved.push((idx as u32, elaborate_expr(expr, scope)?));
                }
                Stmt::Return(resolved)
            }
        });
    }
    Ok(out)
}

fn elaborate(raw: RawContract) -> Result<Contract, ParseError> {
    // Resources: reject duplicates, keep declaration order.
    let mut resources: Vec<VarDecl> = Vec::new();
    for r in &raw.resources {
        if resources.iter().any(|x| x.name == r.name) {
            return Err(ParseError::at(r.pos, alloc::format!("duplicate resource `{}`", r.name)));
        }
        resources.push(VarDecl { name: r.name.clone(), domain: r.domain.clone(), init: r.init.clone() });
    }

    // Service signatures first so that bodies may call any private service,
    // including ones declared later (mutual recursion).
    for (i, s) in raw.services.iter().enumerate() {
        if raw.services[..i].iter().any(|x| x.name == s.name) {
            return Err(ParseError::at(s.pos, alloc::format!("duplicate service `{}`", s.name)));
        }
        if s.visibility == Visibility::Private && (!s.inputs.is_empty() || !s.outputs.is_empty()) {
            return Err(ParseError::at(s.pos, "private services take no parameters"));
        }
    }

    let mut services: Vec<ServiceDecl> = Vec::new();
    for s in &raw.services {
        let guard_scope = Scope { resources: &resources, params: &[] };
        let guard = elaborate_expr(&s.guard, &guard_scope)?;
        let body_scope = Scope { resources: &resources, params: &s.inputs };
        let pre = elaborate_expr(&s.pre, &body_scope)?;
        let behavior = elaborate_stmts(&s.body, &body_scope, &s.outputs, &raw.services)?;
        services.push(ServiceDecl {
            name: s.name.clone(),
            visibility: s.visibility,
            inputs: s.inputs.clone(),
            outputs: s.outputs.clone(),
            guard,
            pre,
            behavior,
        });
    }

    let protocol = elaborate_pattern(&raw.protocol, &services)?;

    Ok(Contract { name: raw.name, resources, services, protocol })
}

fn elaborate_pattern(raw: &RawPat, services: &[ServiceDecl]) -> Result<ProtocolPattern, ParseError> {
    Ok(match raw {
        RawPat::Symbol { request, service, pos } => {
            let decl = services
                .iter()
                .find(|s| s.name == *service)
                .ok_or_else(|| ParseError::at(*pos, alloc::format!("unknown service `{service}` in protocol")))?;
            if !decl.is_public() {
                return Err(ParseError::at(
                    *pos,
                    alloc::format!("protocol symbols must name public services, `{service}` is private"),
                ));
            }
            ProtocolPattern::Symbol { request: *request, service: service.clone() }
        }
        RawPat::Seq(items) => ProtocolPattern::Seq(
            items.iter().map(|p| elaborate_pattern(p, services)).collect::<Result<_, _>>()?,
        ),
        RawPat::Alt(items) => ProtocolPattern::Alt(
            items.iter().map(|p| elaborate_pattern(p, services)).collect::<Result<_, _>>()?,
        ),
        RawPat::Opt(inner) => ProtocolPattern::Opt(Box::new(elaborate_pattern(inner, services)?)),
        RawPat::Star(inner) => ProtocolPattern::Star(Box::new(elaborate_pattern(inner, services)?)),
    })
}

/// Parse and resolve one `.ctr` source. Pure: identical input yields a
/// structurally identical contract.
pub fn parse_contract(source: &str) -> Result<Contract, ParseError> {
    let tokens = lex(source).map_err(|e| ParseError {
        line: e.pos.line,
        col: e.pos.col,
        message: e.message,
        expected: Vec::new(),
    })?;
    let mut cursor = TokenCursor { tokens, at: 0 };
    let raw = parse_raw(&mut cursor)?;
    elaborate(raw)
}
