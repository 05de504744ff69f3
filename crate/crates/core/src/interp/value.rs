use std::fmt;
use std::sync::Arc;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::ast::{Program, Type};
use crate::int::Int;

/// A runtime value. Addresses are naturals with `null = 0`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(Int),
    Addr(u64),
    Obj(Arc<ObjVal>),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjVal {
    pub ctor: Arc<str>,
    pub fields: Vec<Value>,
}

impl Value {
    pub fn int(v: i64) -> Value {
        Value::Int(Int::from(v))
    }

    pub fn obj(ctor: &str, fields: Vec<Value>) -> Value {
        Value::Obj(Arc::new(ObjVal { ctor: ctor.into(), fields }))
    }

    pub fn as_int(&self) -> Option<&Int> {
        match self {
            Value::Int(v) => Some(v),
            _ => None,
        }
    }

    /// Truth value under the convention that zero is false.
    pub fn truthy(&self) -> bool {
        match self {
            Value::Int(v) => !v.is_zero(),
            Value::Addr(a) => *a != 0,
            Value::Obj(_) => true,
        }
    }

    /// Address denoted by an `Addr` or a (retyped) `Int` value; negative
    /// integers denote no address.
    pub fn as_addr(&self) -> Option<u64> {
        match self {
            Value::Addr(a) => Some(*a),
            Value::Int(v) => v.to_i64().and_then(|v| u64::try_from(v).ok()),
            Value::Obj(_) => None,
        }
    }

    /// Equality that identifies `Addr(n)` with `Int(n)`, also inside objects.
    /// Relates values of a program to values of its heap-free encoding.
    pub fn loose_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Addr(a), Value::Int(b)) | (Value::Int(b), Value::Addr(a)) => {
                b.to_i64().is_some_and(|b| b >= 0 && b as u64 == *a)
            }
            (Value::Obj(a), Value::Obj(b)) => {
                a.ctor == b.ctor
                    && a.fields.len() == b.fields.len()
                    && a.fields.iter().zip(&b.fields).all(|(x, y)| x.loose_eq(y))
            }
            _ => self == other,
        }
    }

    /// Replaces every address by the corresponding integer.
    pub fn addr_to_int(&self) -> Value {
        match self {
            Value::Addr(a) => Value::Int(Int::from(*a)),
            Value::Obj(o) => Value::Obj(Arc::new(ObjVal {
                ctor: o.ctor.clone(),
                fields: o.fields.iter().map(Value::addr_to_int).collect(),
            })),
            v => v.clone(),
        }
    }
}

/// The default value of a type: `0`, `null`, or the all-default instance of
/// the type's default constructor.
pub fn default_value(p: &Program, ty: &Type) -> Value {
    match ty {
        Type::Int => Value::Int(Int::ZERO),
        Type::Addr => Value::Addr(0),
        Type::Obj(name) => {
            let adt = p.adt(name).unwrap_or_else(|| panic!("unknown data type {name}"));
            let ctor = &adt.ctors[adt.default_ctor];
            Value::obj(&ctor.name, ctor.fields.iter().map(|f| default_value(p, &f.ty)).collect())
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Addr(0) => f.write_str("null"),
            Value::Addr(a) => write!(f, "@{a}"),
            Value::Obj(o) => {
                write!(f, "{}(", o.ctor)?;
                for (i, v) in o.fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// JSON form: integers as numbers, addresses as `{"addr": n}`, objects as
/// `{"ctor": C, "fields": [...]}`.
impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => v.serialize(s),
            Value::Addr(a) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("addr", a)?;
                m.end()
            }
            Value::Obj(o) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("ctor", &*o.ctor)?;
                m.serialize_entry("fields", &o.fields)?;
                m.end()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_program;

    #[test]
    fn defaults_follow_the_default_constructor() {
        let p = parse_program("prog { adt N { Leaf(v: Int); default N(d: Int, nx: Addr); } }").unwrap();
        let v = default_value(&p, &Type::Obj("N".into()));
        assert_eq!(v, Value::obj("N", vec![Value::int(0), Value::Addr(0)]));
        assert_eq!(v.to_string(), "N(0, null)");
    }

    #[test]
    fn loose_equality_identifies_addresses_with_naturals() {
        let a = Value::obj("N", vec![Value::int(2), Value::Addr(3)]);
        let b = Value::obj("N", vec![Value::int(2), Value::int(3)]);
        assert!(a.loose_eq(&b));
        assert!(!Value::Addr(1).loose_eq(&Value::int(-1)));
        assert_eq!(a.addr_to_int(), b);
    }

    #[test]
    fn json_form() {
        let v = Value::obj("N", vec![Value::int(-2), Value::Addr(1)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"ctor":"N","fields":[-2,{"addr":1}]}"#);
    }
}
