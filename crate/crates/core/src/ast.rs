//! Elaborated contract syntax trees.
//!
//! `parse_contract` produces these with all identifiers resolved: expression
//! variables are resource/parameter indices, `call` targets are service
//! indices, and protocol symbols are checked to name declared public
//! services. Value-level and type-level invariants (init values in domain,
//! output coverage, expression typing) are the typechecker's job.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::value::Value;

/// Finite value domain of a resource or parameter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Domain {
    Bool,
    /// Contiguous signed integer range, inclusive on both ends.
    Int { lo: i64, hi: i64 },
    /// Ordered enumeration of distinct labels.
    Enum(Arc<[Arc<str>]>),
}

impl Domain {
    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Domain::Bool, Value::Bool(_)) => true,
            (Domain::Int { lo, hi }, Value::Int(n)) => lo <= n && n <= hi,
            (Domain::Enum(labels), Value::Enum(l)) => labels.iter().any(|x| x == l),
            _ => false,
        }
    }

    /// Number of values in the domain.
    pub fn size(&self) -> u64 {
        match self {
            Domain::Bool => 2,
            Domain::Int { lo, hi } => (hi - lo + 1) as u64,
            Domain::Enum(labels) => labels.len() as u64,
        }
    }

    /// All values of the domain in canonical order.
    pub fn values(&self) -> Vec<Value> {
        match self {
            Domain::Bool => alloc::vec![Value::Bool(false), Value::Bool(true)],
            Domain::Int { lo, hi } => (*lo..=*hi).map(Value::Int).collect(),
            Domain::Enum(labels) => labels.iter().map(|l| Value::Enum(l.clone())).collect(),
        }
    }

    /// Clamp an integer into this domain's range. Only meaningful for `Int`.
    pub fn clamp_int(&self, n: i64) -> i64 {
        match self {
            Domain::Int { lo, hi } => n.max(*lo).min(*hi),
            _ => n,
        }
    }
}

/// Resource declaration with its initial value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: Arc<str>,
    pub domain: Domain,
    pub init: Value,
}

/// Input or output parameter of a service.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: Arc<str>,
    pub domain: Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Visibility {
    Public,
    Private,
}

/// Resolved variable reference inside an expression.
///
/// Guards resolve over resources only; preconditions and effects resolve over
/// resources plus the service's input parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarRef {
    Resource(u32),
    Param(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }
}

/// Expression over resources and parameters.
///
/// Integer arithmetic saturates: an `Add`/`Sub` node clamps its result to the
/// domain of its left operand (`dom`, filled in during elaboration), and
/// assignments clamp again to the target's domain. This keeps every reachable
/// valuation inside its declared finite domains.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Lit(Value),
    Var(VarRef),
    Binary {
        op: BinOp,
        lhs: alloc::boxed::Box<Expr>,
        rhs: alloc::boxed::Box<Expr>,
        /// Saturation range for arithmetic nodes; `None` on comparisons and
        /// boolean connectives.
        dom: Option<(i64, i64)>,
    },
    Not(alloc::boxed::Box<Expr>),
}

impl Expr {
    pub const TRUE: Expr = Expr::Lit(Value::Bool(true));

    /// The integer range this expression is known to produce, if integral.
    pub fn int_range(&self, resources: &[VarDecl], params: &[ParamDecl]) -> Option<(i64, i64)> {
        match self {
            Expr::Lit(Value::Int(n)) => Some((*n, *n)),
            Expr::Var(VarRef::Resource(i)) => match &resources[*i as usize].domain {
                Domain::Int { lo, hi } => Some((*lo, *hi)),
                _ => None,
            },
            Expr::Var(VarRef::Param(i)) => match &params[*i as usize].domain {
                Domain::Int { lo, hi } => Some((*lo, *hi)),
                _ => None,
            },
            Expr::Binary { dom, .. } => *dom,
            _ => None,
        }
    }
}

/// One statement of a service behavior.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stmt {
    /// `x = e;` — assign to a resource, clamped to its domain.
    Assign { resource: u32, expr: Expr },
    /// `choice { {..} {..} }` — internal nondeterminism; the engine resolves
    /// every branch.
    Choice(Vec<Vec<Stmt>>),
    /// `call p;` — invoke a private service of the same contract.
    Call { service: u32 },
    /// `block;` — enter a permanently waiting state.
    Block,
    /// `return r = e, ...;` — finish, binding outputs (by output index).
    Return(Vec<(u32, Expr)>),
}

/// Service declaration: signature, firing condition, precondition, behavior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceDecl {
    pub name: Arc<str>,
    pub visibility: Visibility,
    pub inputs: Vec<ParamDecl>,
    pub outputs: Vec<ParamDecl>,
    /// Firing condition over resources; the service is offered only where it
    /// holds.
    pub guard: Expr,
    /// Precondition over resources and inputs; a violated precondition leaves
    /// the behavior unconstrained (the engine maps it to chaos).
    pub pre: Expr,
    pub behavior: Vec<Stmt>,
}

impl ServiceDecl {
    pub fn is_public(&self) -> bool {
        self.visibility == Visibility::Public
    }
}

/// Regular pattern over protocol symbols `?name` / `!name`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolPattern {
    /// `?m` or `!m`; `request` selects the direction.
    Symbol { request: bool, service: Arc<str> },
    Seq(Vec<ProtocolPattern>),
    Alt(Vec<ProtocolPattern>),
    Opt(alloc::boxed::Box<ProtocolPattern>),
    Star(alloc::boxed::Box<ProtocolPattern>),
}

/// An elaborated contract: resources, services, and the declared protocol.
///
/// The initial state is given by the resource init values; the start state of
/// the transition system is stable by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    pub name: Arc<str>,
    pub resources: Vec<VarDecl>,
    pub services: Vec<ServiceDecl>,
    pub protocol: ProtocolPattern,
}

impl Contract {
    pub fn service_named(&self, name: &str) -> Option<(u32, &ServiceDecl)> {
        self.services
            .iter()
            .enumerate()
            .find(|(_, s)| &*s.name == name)
            .map(|(i, s)| (i as u32, s))
    }

    pub fn public_services(&self) -> impl Iterator<Item = (u32, &ServiceDecl)> {
        self.services
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_public())
            .map(|(i, s)| (i as u32, s))
    }

    pub fn private_names(&self) -> Vec<Arc<str>> {
        self.services
            .iter()
            .filter(|s| !s.is_public())
            .map(|s| s.name.clone())
            .collect()
    }

    pub fn resource_index(&self, name: &str) -> Option<u32> {
        self.resources
            .iter()
            .position(|r| &*r.name == name)
            .map(|i| i as u32)
    }
}
