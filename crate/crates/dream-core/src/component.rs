//! The component model shared by every other layer: values, expressions,
//! component types, instances, ports and interactions.
//!
//! Components are labelled transition systems whose transition labels are
//! ports offered for synchronization. Instances are id-renamed copies of a
//! component type; an interaction is a set of instance-qualified ports with
//! at most one port per instance. Everything here is immutable once built;
//! evolution always produces fresh values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use ordered_float::NotNan;

use crate::error::{Error, Result};

/// The reserved non-participation port. Never a member of a type's port set;
/// it exists implicitly as a self-loop at every control location.
pub const IDLE_PORT: &str = "idle";

/// Globally unique component instance identifier, totally ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceId(pub i64);

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of a map node: either a named node of an explicit map or a
/// coordinate of a generated map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Named(String),
    Coord(Vec<i64>),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Named(n) => write!(f, "{n}"),
            NodeId::Coord(c) => {
                write!(f, "(")?;
                for (i, x) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A runtime value. Equality is structural; sets are unordered and
/// duplicate-free. Reals only arise from the `distance` built-in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Vector(Vec<i64>),
    IntSet(BTreeSet<i64>),
    Instance(InstanceId),
    Node(NodeId),
    Real(NotNan<f64>),
}

impl Value {
    pub fn empty_set() -> Value {
        Value::IntSet(BTreeSet::new())
    }

    pub fn set_from(items: impl IntoIterator<Item = i64>) -> Value {
        Value::IntSet(items.into_iter().collect())
    }

    pub fn real(x: f64) -> Value {
        Value::Real(NotNan::new(x).expect("distance is never NaN"))
    }

    /// Integer view; instance identifiers project to their integer.
    pub fn as_int(&self) -> Result<i64> {
        match self {
            Value::Int(i) => Ok(*i),
            Value::Instance(c) => Ok(c.0),
            other => Err(Error::TypeMismatch(format!("expected integer, got {other}"))),
        }
    }

    pub fn as_bool(&self) -> Result<bool> {
        match self {
            Value::Bool(b) => Ok(*b),
            other => Err(Error::TypeMismatch(format!("expected boolean, got {other}"))),
        }
    }

    pub fn as_set(&self) -> Result<&BTreeSet<i64>> {
        match self {
            Value::IntSet(s) => Ok(s),
            other => Err(Error::TypeMismatch(format!("expected set, got {other}"))),
        }
    }

    pub fn as_node(&self) -> Result<NodeId> {
        match self {
            Value::Node(n) => Ok(n.clone()),
            // A coordinate vector denotes the node at that coordinate.
            Value::Vector(v) => Ok(NodeId::Coord(v.clone())),
            other => Err(Error::TypeMismatch(format!("expected node, got {other}"))),
        }
    }

    fn as_real(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Instance(c) => Some(c.0 as f64),
            Value::Real(r) => Some(r.into_inner()),
            _ => None,
        }
    }

    /// Expression-level equality: instance ids compare equal to their
    /// integer projection, coordinate nodes to their coordinate vector.
    pub fn loose_eq(&self, other: &Value) -> bool {
        if self == other {
            return true;
        }
        if let (Some(a), Some(b)) = (self.as_real(), other.as_real()) {
            return a == b;
        }
        match (self, other) {
            (Value::Node(NodeId::Coord(c)), Value::Vector(v))
            | (Value::Vector(v), Value::Node(NodeId::Coord(c))) => c == v,
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Vector(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            Value::IntSet(s) => {
                write!(f, "{{")?;
                for (i, x) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "}}")
            }
            Value::Instance(c) => write!(f, "{c}"),
            Value::Node(n) => write!(f, "{n}"),
            Value::Real(r) => write!(f, "{r}"),
        }
    }
}

/// Declared type of a local variable or node attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueType {
    Int,
    Bool,
    Vector(usize),
    IntSet,
}

impl ValueType {
    pub fn default_value(self) -> Value {
        match self {
            ValueType::Int => Value::Int(0),
            ValueType::Bool => Value::Bool(false),
            ValueType::Vector(n) => Value::Vector(vec![0; n]),
            ValueType::IntSet => Value::empty_set(),
        }
    }

    /// Checks `v` against the declared type, coercing instance identifiers
    /// to integers (the examples store peer identifiers in integer fields).
    pub fn coerce(self, v: Value) -> Result<Value> {
        match (self, v) {
            (ValueType::Int, Value::Int(i)) => Ok(Value::Int(i)),
            (ValueType::Int, Value::Instance(c)) => Ok(Value::Int(c.0)),
            (ValueType::Bool, Value::Bool(b)) => Ok(Value::Bool(b)),
            (ValueType::Vector(n), Value::Vector(v)) => {
                if v.len() == n {
                    Ok(Value::Vector(v))
                } else {
                    Err(Error::VectorLength(n, v.len()))
                }
            }
            (ValueType::IntSet, Value::IntSet(s)) => Ok(Value::IntSet(s)),
            (ty, v) => Err(Error::TypeMismatch(format!(
                "cannot store {v} in a {ty:?} variable"
            ))),
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Int => write!(f, "int"),
            ValueType::Bool => write!(f, "bool"),
            ValueType::Vector(n) => write!(f, "vec[{n}]"),
            ValueType::IntSet => write!(f, "set"),
        }
    }
}

/// Reference to a component instance inside expressions and formulas.
/// `Var` and `SelfRef` occur only before declaration expansion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InstRef {
    Concrete(InstanceId),
    Var(String),
    SelfRef,
}

impl InstRef {
    pub fn concrete(&self) -> Result<InstanceId> {
        match self {
            InstRef::Concrete(id) => Ok(*id),
            InstRef::Var(v) => Err(Error::UnboundVariable(v.clone())),
            InstRef::SelfRef => Err(Error::UnboundVariable("self".into())),
        }
    }

    pub fn subst(&self, var: &str, id: InstanceId) -> InstRef {
        match self {
            InstRef::Var(v) if v == var => InstRef::Concrete(id),
            other => other.clone(),
        }
    }

    pub fn subst_self(&self, id: InstanceId) -> InstRef {
        match self {
            InstRef::SelfRef => InstRef::Concrete(id),
            other => other.clone(),
        }
    }
}

impl fmt::Display for InstRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstRef::Concrete(id) => write!(f, "{id}"),
            InstRef::Var(v) => write!(f, "{v}"),
            InstRef::SelfRef => write!(f, "self"),
        }
    }
}

/// Binary expression operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    And,
    Or,
    Union,
    In,
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Mod => "mod",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Union => "union",
            BinOp::In => "in",
        };
        write!(f, "{s}")
    }
}

/// Expression over a configuration. Evaluation is total when every
/// referenced instance and node exists; otherwise it is an error, never a
/// silent default. State predicates and assignment right-hand sides are
/// expressions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Lit(Value),
    /// The identifier of an instance, e.g. `s` in `s != s2`.
    InstanceRef(InstRef),
    /// Local variable `c.x`.
    Var(InstRef, String),
    /// Node attribute `at(c).x`.
    NodeAttr(InstRef, String),
    /// Address `at(c)`.
    Address(InstRef),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Card(Box<Expr>),
    Distance(Box<Expr>, Box<Expr>),
    SetLit(Vec<Expr>),
    VecLit(Vec<Expr>),
}

impl Expr {
    pub fn lit_int(i: i64) -> Expr {
        Expr::Lit(Value::Int(i))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn var(inst: InstRef, name: impl Into<String>) -> Expr {
        Expr::Var(inst, name.into())
    }

    /// Substitutes a component variable with a concrete instance id.
    pub fn subst(&self, var: &str, id: InstanceId) -> Expr {
        self.map_refs(&|r| r.subst(var, id))
    }

    pub fn subst_self(&self, id: InstanceId) -> Expr {
        self.map_refs(&|r| r.subst_self(id))
    }

    pub fn map_refs(&self, f: &dyn Fn(&InstRef) -> InstRef) -> Expr {
        match self {
            Expr::Lit(v) => Expr::Lit(v.clone()),
            Expr::InstanceRef(r) => Expr::InstanceRef(f(r)),
            Expr::Var(r, x) => Expr::Var(f(r), x.clone()),
            Expr::NodeAttr(r, x) => Expr::NodeAttr(f(r), x.clone()),
            Expr::Address(r) => Expr::Address(f(r)),
            Expr::Bin(op, l, r) => Expr::bin(*op, l.map_refs(f), r.map_refs(f)),
            Expr::Not(e) => Expr::Not(Box::new(e.map_refs(f))),
            Expr::Neg(e) => Expr::Neg(Box::new(e.map_refs(f))),
            Expr::Card(e) => Expr::Card(Box::new(e.map_refs(f))),
            Expr::Distance(a, b) => {
                Expr::Distance(Box::new(a.map_refs(f)), Box::new(b.map_refs(f)))
            }
            Expr::SetLit(es) => Expr::SetLit(es.iter().map(|e| e.map_refs(f)).collect()),
            Expr::VecLit(es) => Expr::VecLit(es.iter().map(|e| e.map_refs(f)).collect()),
        }
    }

    /// Free component variables referenced by the expression.
    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        let collect = |r: &InstRef, out: &mut BTreeSet<String>| {
            if let InstRef::Var(v) = r {
                out.insert(v.clone());
            }
        };
        match self {
            Expr::Lit(_) => {}
            Expr::InstanceRef(r) | Expr::Address(r) => collect(r, out),
            Expr::Var(r, _) | Expr::NodeAttr(r, _) => collect(r, out),
            Expr::Bin(_, l, r) => {
                l.free_vars(out);
                r.free_vars(out);
            }
            Expr::Not(e) | Expr::Neg(e) | Expr::Card(e) => e.free_vars(out),
            Expr::Distance(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Expr::SetLit(es) | Expr::VecLit(es) => {
                for e in es {
                    e.free_vars(out);
                }
            }
        }
    }

    /// True when the expression reads no runtime state (instances, nodes,
    /// addresses). Such expressions can be folded at expansion time.
    pub fn is_closed(&self) -> bool {
        match self {
            Expr::Lit(_) => true,
            Expr::InstanceRef(r) => matches!(r, InstRef::Concrete(_)),
            Expr::Var(..) | Expr::NodeAttr(..) | Expr::Address(_) => false,
            Expr::Bin(_, l, r) => l.is_closed() && r.is_closed(),
            Expr::Not(e) | Expr::Neg(e) | Expr::Card(e) => e.is_closed(),
            Expr::Distance(..) => false,
            Expr::SetLit(es) | Expr::VecLit(es) => es.iter().all(Expr::is_closed),
        }
    }

    pub fn eval(&self, scope: &dyn EvalScope) -> Result<Value> {
        match self {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::InstanceRef(r) => {
                let id = r.concrete()?;
                scope.check_instance(id)?;
                Ok(Value::Instance(id))
            }
            Expr::Var(r, x) => {
                let id = r.concrete()?;
                let inst = scope
                    .instance(id)
                    .ok_or(Error::UnknownInstance(id.0))?;
                inst.valuation
                    .get(x)
                    .cloned()
                    .ok_or_else(|| Error::UnknownVariable {
                        instance: id.0,
                        var: x.clone(),
                    })
            }
            Expr::NodeAttr(r, x) => {
                let id = r.concrete()?;
                let node = scope
                    .address_of(id)
                    .ok_or(Error::NoAddress(id.0))?;
                scope.node_attr(&node, x)
            }
            Expr::Address(r) => {
                let id = r.concrete()?;
                scope.check_instance(id)?;
                let node = scope
                    .address_of(id)
                    .ok_or(Error::NoAddress(id.0))?;
                Ok(Value::Node(node))
            }
            Expr::Bin(op, l, r) => {
                let lv = l.eval(scope)?;
                let rv = r.eval(scope)?;
                eval_bin(*op, lv, rv, scope)
            }
            Expr::Not(e) => Ok(Value::Bool(!e.eval(scope)?.as_bool()?)),
            Expr::Neg(e) => Ok(Value::Int(-e.eval(scope)?.as_int()?)),
            Expr::Card(e) => Ok(Value::Int(e.eval(scope)?.as_set()?.len() as i64)),
            Expr::Distance(a, b) => {
                let na = a.eval(scope)?.as_node()?;
                let nb = b.eval(scope)?.as_node()?;
                Ok(Value::real(scope.node_distance(&na, &nb)?))
            }
            Expr::SetLit(es) => {
                let mut s = BTreeSet::new();
                for e in es {
                    s.insert(e.eval(scope)?.as_int()?);
                }
                Ok(Value::IntSet(s))
            }
            Expr::VecLit(es) => {
                let mut v = Vec::with_capacity(es.len());
                for e in es {
                    v.push(e.eval(scope)?.as_int()?);
                }
                Ok(Value::Vector(v))
            }
        }
    }
}

fn eval_bin(op: BinOp, l: Value, r: Value, scope: &dyn EvalScope) -> Result<Value> {
    match op {
        BinOp::Add => match (&l, &r) {
            (Value::Vector(a), Value::Vector(b)) => {
                if a.len() != b.len() {
                    return Err(Error::VectorLength(a.len(), b.len()));
                }
                Ok(Value::Vector(a.iter().zip(b).map(|(x, y)| x + y).collect()))
            }
            // Moving from a node by an offset; generated maps wrap here.
            (Value::Node(NodeId::Coord(a)), Value::Vector(b))
            | (Value::Vector(b), Value::Node(NodeId::Coord(a))) => {
                if a.len() != b.len() {
                    return Err(Error::VectorLength(a.len(), b.len()));
                }
                let raw = NodeId::Coord(a.iter().zip(b).map(|(x, y)| x + y).collect());
                Ok(Value::Node(scope.normalize_node(raw)))
            }
            _ => numeric(op, &l, &r),
        },
        BinOp::Sub | BinOp::Mul | BinOp::Mod => numeric(op, &l, &r),
        BinOp::Eq => Ok(Value::Bool(l.loose_eq(&r))),
        BinOp::Ne => Ok(Value::Bool(!l.loose_eq(&r))),
        BinOp::Lt | BinOp::Le => {
            let (a, b) = both_reals(&l, &r)?;
            Ok(Value::Bool(if op == BinOp::Lt { a < b } else { a <= b }))
        }
        BinOp::And => Ok(Value::Bool(l.as_bool()? && r.as_bool()?)),
        BinOp::Or => Ok(Value::Bool(l.as_bool()? || r.as_bool()?)),
        BinOp::Union => {
            let mut s = l.as_set()?.clone();
            s.extend(r.as_set()?.iter().copied());
            Ok(Value::IntSet(s))
        }
        BinOp::In => Ok(Value::Bool(r.as_set()?.contains(&l.as_int()?))),
    }
}

fn numeric(op: BinOp, l: &Value, r: &Value) -> Result<Value> {
    if let (Value::Real(_), _) | (_, Value::Real(_)) = (l, r) {
        let (a, b) = both_reals(l, r)?;
        let v = match op {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            _ => return Err(Error::TypeMismatch(format!("{op} on real values"))),
        };
        return Ok(Value::real(v));
    }
    let a = l.as_int()?;
    let b = r.as_int()?;
    let v = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Mod => {
            if b == 0 {
                return Err(Error::TypeMismatch("mod by zero".into()));
            }
            a.rem_euclid(b)
        }
        _ => unreachable!(),
    };
    Ok(Value::Int(v))
}

fn both_reals(l: &Value, r: &Value) -> Result<(f64, f64)> {
    match (l.as_real(), r.as_real()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::TypeMismatch(format!(
            "cannot compare {l} and {r} numerically"
        ))),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Or, ..) => 1,
            Expr::Bin(BinOp::And, ..) => 2,
            Expr::Not(_) => 3,
            Expr::Bin(BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::In, ..) => 4,
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 5,
            Expr::Bin(BinOp::Mul | BinOp::Mod, ..) => 6,
            Expr::Neg(_) => 7,
            _ => 8,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        let parens = prec < min;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Lit(v) => write!(f, "{v}")?,
            Expr::InstanceRef(r) => write!(f, "{r}")?,
            Expr::Var(r, x) => write!(f, "{r}.{x}")?,
            Expr::NodeAttr(r, x) => write!(f, "at({r}).{x}")?,
            Expr::Address(r) => write!(f, "at({r})")?,
            Expr::Bin(op, l, r) => {
                l.fmt_prec(f, prec)?;
                write!(f, " {op} ")?;
                r.fmt_prec(f, prec + 1)?;
            }
            Expr::Not(e) => {
                write!(f, "not ")?;
                e.fmt_prec(f, prec)?;
            }
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, prec)?;
            }
            Expr::Card(e) => write!(f, "card({e})")?,
            Expr::Distance(a, b) => write!(f, "distance({a}, {b})")?,
            Expr::SetLit(es) => {
                write!(f, "{{")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "}}")?;
            }
            Expr::VecLit(es) => {
                write!(f, "[")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "]")?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Resolution context for expression evaluation. Motif configurations are
/// the canonical implementation; the system view covers migration terms.
pub trait EvalScope {
    fn instance(&self, id: InstanceId) -> Option<&ComponentInstance>;
    fn address_of(&self, id: InstanceId) -> Option<NodeId>;
    fn node_attr(&self, node: &NodeId, attr: &str) -> Result<Value>;
    fn has_node(&self, node: &NodeId) -> bool;
    /// Canonical form of a node id (generated maps wrap coordinates).
    fn normalize_node(&self, raw: NodeId) -> NodeId;
    fn node_distance(&self, a: &NodeId, b: &NodeId) -> Result<f64>;

    fn check_instance(&self, id: InstanceId) -> Result<()> {
        if self.instance(id).is_some() {
            Ok(())
        } else {
            Err(Error::UnknownInstance(id.0))
        }
    }
}

/// A bare set of component instances: the configuration of the map-free
/// layers (locations plus valuations). Motif configurations extend it with
/// map state and an address function.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceStore {
    pub instances: BTreeMap<InstanceId, ComponentInstance>,
}

impl InstanceStore {
    pub fn new() -> InstanceStore {
        InstanceStore::default()
    }

    /// Instantiates `ty` under `id` and adds it to the store.
    pub fn add(&mut self, ty: &Arc<ComponentType>, id: InstanceId) -> Result<()> {
        if self.instances.contains_key(&id) {
            return Err(Error::DuplicateInstance(id.0));
        }
        let inst = instantiate(ty, id)?;
        self.instances.insert(id, inst);
        Ok(())
    }

    pub fn get(&self, id: InstanceId) -> Option<&ComponentInstance> {
        self.instances.get(&id)
    }

    pub fn enabled_ports(&self) -> Vec<Port> {
        self.instances.values().flat_map(|i| enabled_ports(i)).collect()
    }
}

impl EvalScope for InstanceStore {
    fn instance(&self, id: InstanceId) -> Option<&ComponentInstance> {
        self.instances.get(&id)
    }
    fn address_of(&self, _: InstanceId) -> Option<NodeId> {
        None
    }
    fn node_attr(&self, node: &NodeId, attr: &str) -> Result<Value> {
        Err(Error::UnknownNodeAttr {
            node: node.to_string(),
            attr: attr.into(),
        })
    }
    fn has_node(&self, _: &NodeId) -> bool {
        false
    }
    fn normalize_node(&self, raw: NodeId) -> NodeId {
        raw
    }
    fn node_distance(&self, a: &NodeId, _: &NodeId) -> Result<f64> {
        Err(Error::UnknownNode(a.to_string()))
    }
}

/// Scope with no runtime state, used to evaluate initializer expressions.
pub struct ClosedScope;

impl EvalScope for ClosedScope {
    fn instance(&self, _: InstanceId) -> Option<&ComponentInstance> {
        None
    }
    fn address_of(&self, _: InstanceId) -> Option<NodeId> {
        None
    }
    fn node_attr(&self, node: &NodeId, attr: &str) -> Result<Value> {
        Err(Error::UnknownNodeAttr {
            node: node.to_string(),
            attr: attr.into(),
        })
    }
    fn has_node(&self, _: &NodeId) -> bool {
        false
    }
    fn normalize_node(&self, raw: NodeId) -> NodeId {
        raw
    }
    fn node_distance(&self, a: &NodeId, _: &NodeId) -> Result<f64> {
        Err(Error::UnknownNode(a.to_string()))
    }
}

/// Local variable declaration of a component type.
#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub ty: ValueType,
    /// Evaluated at instantiation; must not reference runtime state.
    /// `None` defaults to the type's zero value.
    pub init: Option<Expr>,
}

/// One transition of a component type.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub from: String,
    pub port: String,
    pub to: String,
}

/// Assignment on the firing instance's own variables, attached to a port
/// (the per-port local operations of the examples).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalAssign {
    pub var: String,
    /// Expression over the instance's own variables via `InstRef::SelfRef`.
    pub value: Expr,
}

/// A component type: a labelled transition system template with local
/// variables and ports. Instances are id-renamed copies.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentType {
    pub name: String,
    pub locations: Vec<String>,
    pub initial: String,
    pub variables: Vec<VarDecl>,
    pub ports: Vec<String>,
    pub transitions: Vec<Transition>,
    /// Per-port local operations, applied when the port fires.
    pub port_ops: BTreeMap<String, Vec<LocalAssign>>,
}

impl ComponentType {
    /// Validates the structural invariants and returns the type.
    pub fn validated(self) -> Result<Arc<ComponentType>> {
        let err = |reason: String| Error::InvalidType {
            ty: self.name.clone(),
            reason,
        };
        let locs: BTreeSet<&String> = self.locations.iter().collect();
        if locs.len() != self.locations.len() {
            return Err(err("duplicate control location".into()));
        }
        if !locs.contains(&self.initial) {
            return Err(err(format!("initial location '{}' not declared", self.initial)));
        }
        let ports: BTreeSet<&String> = self.ports.iter().collect();
        if ports.len() != self.ports.len() {
            return Err(err("duplicate port".into()));
        }
        if self.ports.iter().any(|p| p == IDLE_PORT) {
            return Err(err(format!("'{IDLE_PORT}' is reserved")));
        }
        let vars: BTreeSet<&String> = self.variables.iter().map(|v| &v.name).collect();
        if vars.len() != self.variables.len() {
            return Err(err("duplicate variable".into()));
        }
        let mut seen = BTreeSet::new();
        for t in &self.transitions {
            if !locs.contains(&t.from) || !locs.contains(&t.to) {
                return Err(err(format!("transition {} -{}-> {} leaves S", t.from, t.port, t.to)));
            }
            if !ports.contains(&t.port) {
                return Err(err(format!("transition port '{}' not declared", t.port)));
            }
            // Outgoing ports are distinct per location, so a port uniquely
            // determines the transition taken from the current location.
            if !seen.insert((&t.from, &t.port)) {
                return Err(err(format!(
                    "two transitions from '{}' labelled '{}'",
                    t.from, t.port
                )));
            }
        }
        for (port, ops) in &self.port_ops {
            if !ports.contains(port) {
                return Err(err(format!("local operation on unknown port '{port}'")));
            }
            for op in ops {
                if !vars.contains(&op.var) {
                    return Err(err(format!("local operation writes unknown variable '{}'", op.var)));
                }
            }
        }
        Ok(Arc::new(self))
    }

    pub fn transition_from(&self, location: &str, port: &str) -> Option<&Transition> {
        self.transitions
            .iter()
            .find(|t| t.from == location && t.port == port)
    }

    pub fn has_port(&self, port: &str) -> bool {
        self.ports.iter().any(|p| p == port)
    }
}

/// A running copy of a component type.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentInstance {
    pub id: InstanceId,
    pub ty: Arc<ComponentType>,
    pub location: String,
    pub valuation: BTreeMap<String, Value>,
}

impl ComponentInstance {
    pub fn value(&self, var: &str) -> Result<&Value> {
        self.valuation.get(var).ok_or_else(|| Error::UnknownVariable {
            instance: self.id.0,
            var: var.into(),
        })
    }
}

/// Creates an instance of `ty` with identifier `id`: the instance starts at
/// the type's initial location and each variable carries its evaluated
/// initializer (or the type's default when none is declared).
pub fn instantiate(ty: &Arc<ComponentType>, id: InstanceId) -> Result<ComponentInstance> {
    let mut valuation = BTreeMap::new();
    for decl in &ty.variables {
        let value = match &decl.init {
            Some(expr) => {
                let v = expr
                    .eval(&ClosedScope)
                    .map_err(|_| Error::InitializerNotClosed(decl.name.clone()))?;
                decl.ty.coerce(v)?
            }
            None => decl.ty.default_value(),
        };
        valuation.insert(decl.name.clone(), value);
    }
    Ok(ComponentInstance {
        id,
        ty: Arc::clone(ty),
        location: ty.initial.clone(),
        valuation,
    })
}

/// Ports labelling transitions out of the instance's current location.
/// `idle` is never reported.
pub fn enabled_ports(inst: &ComponentInstance) -> BTreeSet<Port> {
    inst.ty
        .transitions
        .iter()
        .filter(|t| t.from == inst.location)
        .map(|t| Port::new(inst.id, t.port.clone()))
        .collect()
}

/// An instance-qualified port.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Port {
    pub instance: InstanceId,
    pub name: String,
}

impl Port {
    pub fn new(instance: InstanceId, name: impl Into<String>) -> Port {
        Port {
            instance,
            name: name.into(),
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.instance, self.name)
    }
}

/// A finite set of ports, at most one per instance, executed jointly.
/// Instances absent from the set implicitly idle.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interaction {
    ports: BTreeSet<Port>,
}

impl Interaction {
    pub fn empty() -> Interaction {
        Interaction::default()
    }

    pub fn new(ports: impl IntoIterator<Item = Port>) -> Result<Interaction> {
        let mut seen = BTreeSet::new();
        let mut set = BTreeSet::new();
        for p in ports {
            if p.name == IDLE_PORT {
                return Err(Error::Invalid("idle ports are implicit".into()));
            }
            if !seen.insert(p.instance) {
                return Err(Error::MultiplePortsPerInstance(p.instance.0));
            }
            set.insert(p);
        }
        Ok(Interaction { ports: set })
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ports.len()
    }

    pub fn contains(&self, port: &Port) -> bool {
        self.ports.contains(port)
    }

    pub fn involves(&self, id: InstanceId) -> bool {
        self.ports.iter().any(|p| p.instance == id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Port> {
        self.ports.iter()
    }

    pub fn is_subset(&self, other: &Interaction) -> bool {
        self.ports.is_subset(&other.ports)
    }
}

impl FromIterator<Port> for Interaction {
    /// Panics when two ports share an instance; use [`Interaction::new`]
    /// for fallible construction.
    fn from_iter<T: IntoIterator<Item = Port>>(iter: T) -> Self {
        Interaction::new(iter).expect("invalid interaction")
    }
}

impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ports.is_empty() {
            return write!(f, "idle");
        }
        for (i, p) in self.ports.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Executes interaction `a` on a set of instances: every participating
/// instance takes its uniquely labelled transition, everyone else stays put
/// (the implicit idle loop). Valuations are untouched; data is handled by
/// operation application.
pub fn fire(
    instances: &BTreeMap<InstanceId, ComponentInstance>,
    a: &Interaction,
) -> Result<BTreeMap<InstanceId, ComponentInstance>> {
    let mut next = instances.clone();
    for port in a.iter() {
        let inst = next
            .get_mut(&port.instance)
            .ok_or(Error::UnknownInstance(port.instance.0))?;
        let t = inst
            .ty
            .transition_from(&inst.location, &port.name)
            .ok_or_else(|| Error::PortNotEnabled {
                instance: inst.id.0,
                port: port.name.clone(),
                location: inst.location.clone(),
            })?;
        inst.location = t.to.clone();
    }
    Ok(next)
}
