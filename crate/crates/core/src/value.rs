//! Finite-domain values and valuation stores.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

/// A value of one of the three finite domain kinds.
///
/// Enum values carry their label text so that values from two independently
/// parsed contracts compare equal whenever their domains are structurally
/// equal; refinement checking relies on this.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Enum(Arc<str>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Enum(l) => write!(f, "{l}"),
        }
    }
}

impl Value {
    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            _ => panic!("expected boolean value"),
        }
    }

    pub fn as_int(&self) -> i64 {
        match self {
            Value::Int(n) => *n,
            _ => panic!("expected integer value"),
        }
    }
}

/// Total map from declared resources to values, indexed by declaration order.
///
/// The fixed ordering makes equal valuations compare and hash equal, which
/// the transition-system builder uses for state deduplication.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation(pub Vec<Value>);

impl Valuation {
    pub fn get(&self, idx: u32) -> &Value {
        &self.0[idx as usize]
    }

    pub fn set(&mut self, idx: u32, v: Value) {
        self.0[idx as usize] = v;
    }
}

/// Named value bindings, e.g. the concrete inputs of a request or the outputs
/// of a response. Order follows the parameter declaration order.
pub type Bindings = Vec<(Arc<str>, Value)>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enum_values_compare_by_label() {
        let a = Value::Enum(Arc::from("valid"));
        let b = Value::Enum(Arc::from("valid"));
        let c = Value::Enum(Arc::from("invalid"));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(c < a); // "invalid" < "valid"
    }

    #[test]
    fn valuations_compare_pointwise() {
        let v1 = Valuation(alloc::vec![Value::Bool(false), Value::Int(3)]);
        let mut v2 = v1.clone();
        assert_eq!(v1, v2);
        v2.set(1, Value::Int(4));
        assert!(v1 < v2);
    }
}
