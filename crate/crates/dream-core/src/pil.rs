//! Propositional Interaction Logic: formulas whose models are interactions,
//! judged against a configuration for the state predicates.
//!
//! The core connectives are port literals, state predicates, negation and
//! conjunction; disjunction, implication and idle literals are kept as
//! explicit variants for readable output but are semantically derived.
//! The module also provides the characteristic-formula function `beta`,
//! a brute-force model enumerator and the translation between the
//! disjunctive and conjunctive specification styles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::component::{EvalScope, Expr, InstRef, InstanceId, Interaction, Port};
use crate::error::{Error, Result};

/// Enumeration guard for [`models_of`].
pub const MODEL_UNIVERSE_BOUND: usize = 24;

/// A possibly unexpanded port literal: the instance may still be a
/// component variable before declaration expansion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortRef {
    pub instance: InstRef,
    pub port: String,
}

impl PortRef {
    pub fn new(instance: InstRef, port: impl Into<String>) -> PortRef {
        PortRef {
            instance,
            port: port.into(),
        }
    }

    pub fn concrete(id: InstanceId, port: impl Into<String>) -> PortRef {
        PortRef::new(InstRef::Concrete(id), port)
    }

    pub fn to_port(&self) -> Result<Port> {
        Ok(Port::new(self.instance.concrete()?, self.port.clone()))
    }
}

impl From<&Port> for PortRef {
    fn from(p: &Port) -> PortRef {
        PortRef::concrete(p.instance, p.name.clone())
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.instance, self.port)
    }
}

/// A propositional interaction-logic formula.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PilFormula {
    True,
    False,
    Port(PortRef),
    /// Boolean-valued state predicate; depends on the configuration only.
    Pred(Expr),
    Not(Box<PilFormula>),
    And(Box<PilFormula>, Box<PilFormula>),
    Or(Box<PilFormula>, Box<PilFormula>),
    Implies(Box<PilFormula>, Box<PilFormula>),
    /// Holds iff no port of the instance occurs in the interaction;
    /// equivalent to the conjunction of the instance's negated ports.
    Idle(InstRef),
}

impl PilFormula {
    pub fn port(id: InstanceId, name: impl Into<String>) -> PilFormula {
        PilFormula::Port(PortRef::concrete(id, name))
    }

    /// Conjunction with constant folding.
    pub fn and(self, other: PilFormula) -> PilFormula {
        match (self, other) {
            (PilFormula::True, f) | (f, PilFormula::True) => f,
            (PilFormula::False, _) | (_, PilFormula::False) => PilFormula::False,
            (a, b) => PilFormula::And(Box::new(a), Box::new(b)),
        }
    }

    /// Disjunction with constant folding.
    pub fn or(self, other: PilFormula) -> PilFormula {
        match (self, other) {
            (PilFormula::False, f) | (f, PilFormula::False) => f,
            (PilFormula::True, _) | (_, PilFormula::True) => PilFormula::True,
            (a, b) => PilFormula::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn negate(self) -> PilFormula {
        match self {
            PilFormula::True => PilFormula::False,
            PilFormula::False => PilFormula::True,
            PilFormula::Not(inner) => *inner,
            f => PilFormula::Not(Box::new(f)),
        }
    }

    pub fn implies(self, other: PilFormula) -> PilFormula {
        match (self, other) {
            (PilFormula::True, f) => f,
            (PilFormula::False, _) => PilFormula::True,
            (_, PilFormula::True) => PilFormula::True,
            (a, PilFormula::False) => a.negate(),
            (a, b) => PilFormula::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn all(items: impl IntoIterator<Item = PilFormula>) -> PilFormula {
        items
            .into_iter()
            .fold(PilFormula::True, |acc, f| acc.and(f))
    }

    pub fn any(items: impl IntoIterator<Item = PilFormula>) -> PilFormula {
        items
            .into_iter()
            .fold(PilFormula::False, |acc, f| acc.or(f))
    }

    /// Substitutes `true` for a port literal. Idle literals of the port's
    /// instance become `false`: they cannot hold once the port occurs.
    pub fn substitute_true(&self, port: &Port) -> PilFormula {
        match self {
            PilFormula::Port(pr) => {
                if pr.instance == InstRef::Concrete(port.instance) && pr.port == port.name {
                    PilFormula::True
                } else {
                    self.clone()
                }
            }
            PilFormula::Idle(InstRef::Concrete(id)) if *id == port.instance => PilFormula::False,
            PilFormula::Not(f) => f.substitute_true(port).negate(),
            PilFormula::And(a, b) => a.substitute_true(port).and(b.substitute_true(port)),
            PilFormula::Or(a, b) => a.substitute_true(port).or(b.substitute_true(port)),
            PilFormula::Implies(a, b) => a.substitute_true(port).implies(b.substitute_true(port)),
            other => other.clone(),
        }
    }

    /// Substitutes a component variable with a concrete instance id.
    pub fn subst(&self, var: &str, id: InstanceId) -> PilFormula {
        self.map_parts(&|r| r.subst(var, id), &|e| e.subst(var, id))
    }

    pub fn subst_self(&self, id: InstanceId) -> PilFormula {
        self.map_parts(&|r| r.subst_self(id), &|e| e.subst_self(id))
    }

    fn map_parts(
        &self,
        fr: &dyn Fn(&InstRef) -> InstRef,
        fe: &dyn Fn(&Expr) -> Expr,
    ) -> PilFormula {
        match self {
            PilFormula::True => PilFormula::True,
            PilFormula::False => PilFormula::False,
            PilFormula::Port(pr) => PilFormula::Port(PortRef::new(fr(&pr.instance), pr.port.clone())),
            PilFormula::Pred(e) => PilFormula::Pred(fe(e)),
            PilFormula::Not(f) => PilFormula::Not(Box::new(f.map_parts(fr, fe))),
            PilFormula::And(a, b) => {
                PilFormula::And(Box::new(a.map_parts(fr, fe)), Box::new(b.map_parts(fr, fe)))
            }
            PilFormula::Or(a, b) => {
                PilFormula::Or(Box::new(a.map_parts(fr, fe)), Box::new(b.map_parts(fr, fe)))
            }
            PilFormula::Implies(a, b) => {
                PilFormula::Implies(Box::new(a.map_parts(fr, fe)), Box::new(b.map_parts(fr, fe)))
            }
            PilFormula::Idle(r) => PilFormula::Idle(fr(r)),
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            PilFormula::True | PilFormula::False => {}
            PilFormula::Port(pr) => {
                if let InstRef::Var(v) = &pr.instance {
                    out.insert(v.clone());
                }
            }
            PilFormula::Pred(e) => e.free_vars(out),
            PilFormula::Not(f) => f.free_vars(out),
            PilFormula::And(a, b) | PilFormula::Or(a, b) | PilFormula::Implies(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            PilFormula::Idle(r) => {
                if let InstRef::Var(v) = r {
                    out.insert(v.clone());
                }
            }
        }
    }

    /// Replaces every state predicate by its truth value under `scope`.
    /// Predicates are interaction-independent, so the engine folds them
    /// once per step instead of once per candidate.
    pub fn fold_predicates(&self, scope: &dyn EvalScope) -> Result<PilFormula> {
        Ok(match self {
            PilFormula::Pred(e) => {
                if e.eval(scope)?.as_bool()? {
                    PilFormula::True
                } else {
                    PilFormula::False
                }
            }
            PilFormula::Not(f) => f.fold_predicates(scope)?.negate(),
            PilFormula::And(a, b) => a.fold_predicates(scope)?.and(b.fold_predicates(scope)?),
            PilFormula::Or(a, b) => a.fold_predicates(scope)?.or(b.fold_predicates(scope)?),
            PilFormula::Implies(a, b) => {
                a.fold_predicates(scope)?.implies(b.fold_predicates(scope)?)
            }
            other => other.clone(),
        })
    }
}

/// The satisfaction relation between an interaction and a formula, judged
/// against a configuration. Every referenced instance must exist.
pub fn pil_satisfies(a: &Interaction, scope: &dyn EvalScope, f: &PilFormula) -> Result<bool> {
    Ok(match f {
        PilFormula::True => true,
        PilFormula::False => false,
        PilFormula::Port(pr) => {
            let port = pr.to_port()?;
            scope.check_instance(port.instance)?;
            a.contains(&port)
        }
        PilFormula::Pred(e) => e.eval(scope)?.as_bool()?,
        PilFormula::Not(inner) => !pil_satisfies(a, scope, inner)?,
        PilFormula::And(l, r) => pil_satisfies(a, scope, l)? && pil_satisfies(a, scope, r)?,
        PilFormula::Or(l, r) => pil_satisfies(a, scope, l)? || pil_satisfies(a, scope, r)?,
        PilFormula::Implies(l, r) => !pil_satisfies(a, scope, l)? || pil_satisfies(a, scope, r)?,
        PilFormula::Idle(r) => {
            let id = r.concrete()?;
            scope.check_instance(id)?;
            !a.involves(id)
        }
    })
}

impl fmt::Display for PilFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl PilFormula {
    fn precedence(&self) -> u8 {
        match self {
            PilFormula::Or(..) => 1,
            PilFormula::And(..) => 2,
            PilFormula::Not(_) => 3,
            _ => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        let parens = prec < min;
        if parens {
            write!(f, "(")?;
        }
        match self {
            PilFormula::True => write!(f, "true")?,
            PilFormula::False => write!(f, "false")?,
            PilFormula::Port(p) => write!(f, "{p}")?,
            PilFormula::Pred(e) => {
                // Predicates with low-precedence operators keep their own
                // parentheses so the printed formula regroups identically.
                if matches!(
                    e,
                    Expr::Bin(crate::component::BinOp::And, ..)
                        | Expr::Bin(crate::component::BinOp::Or, ..)
                ) {
                    write!(f, "({e})")?;
                } else {
                    write!(f, "{e}")?;
                }
            }
            PilFormula::Not(inner) => {
                write!(f, "not ")?;
                inner.fmt_prec(f, prec)?;
            }
            PilFormula::And(l, r) => {
                l.fmt_prec(f, prec)?;
                write!(f, " and ")?;
                r.fmt_prec(f, prec + 1)?;
            }
            PilFormula::Or(l, r) => {
                l.fmt_prec(f, prec)?;
                write!(f, " or ")?;
                r.fmt_prec(f, prec + 1)?;
            }
            PilFormula::Implies(l, r) => {
                write!(f, "(")?;
                l.fmt_prec(f, 0)?;
                write!(f, " => ")?;
                r.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            PilFormula::Idle(r) => write!(f, "idle({r})")?,
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A conjunction of required and inhibited port literals; ports absent from
/// both sides are optional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    positive: BTreeSet<Port>,
    negative: BTreeSet<Port>,
}

impl Monomial {
    pub fn new(
        positive: impl IntoIterator<Item = Port>,
        negative: impl IntoIterator<Item = Port>,
    ) -> Result<Monomial> {
        let positive: BTreeSet<Port> = positive.into_iter().collect();
        let negative: BTreeSet<Port> = negative.into_iter().collect();
        if let Some(p) = positive.intersection(&negative).next() {
            return Err(Error::Invalid(format!(
                "port {p} both required and inhibited"
            )));
        }
        Ok(Monomial { positive, negative })
    }

    pub fn positive(&self) -> &BTreeSet<Port> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<Port> {
        &self.negative
    }

    pub fn to_formula(&self) -> PilFormula {
        let pos = self.positive.iter().map(|p| PilFormula::Port(p.into()));
        let neg = self
            .negative
            .iter()
            .map(|p| PilFormula::Port(p.into()).negate());
        PilFormula::all(pos.chain(neg))
    }
}

/// Brute-force model enumeration: all interactions over the port universe
/// (at most one port per instance) satisfying the formula.
pub fn models_of(
    f: &PilFormula,
    universe: &[Port],
    scope: &dyn EvalScope,
) -> Result<BTreeSet<Interaction>> {
    if universe.len() > MODEL_UNIVERSE_BOUND {
        return Err(Error::UniverseTooLarge(universe.len(), MODEL_UNIVERSE_BOUND));
    }
    let mut models = BTreeSet::new();
    for a in valid_subsets(universe) {
        if pil_satisfies(&a, scope, f)? {
            models.insert(a);
        }
    }
    Ok(models)
}

/// All subsets of the universe containing at most one port per instance.
pub fn valid_subsets(universe: &[Port]) -> Vec<Interaction> {
    let n = universe.len();
    let mut groups: BTreeMap<InstanceId, u32> = BTreeMap::new();
    for (i, p) in universe.iter().enumerate() {
        *groups.entry(p.instance).or_default() |= 1 << i;
    }
    let group_masks: Vec<u32> = groups.into_values().collect();
    let mut out = Vec::new();
    'mask: for mask in 0u32..(1 << n) {
        for g in &group_masks {
            if (mask & g).count_ones() > 1 {
                continue 'mask;
            }
        }
        let ports = universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, p)| p.clone());
        out.push(Interaction::new(ports).expect("groups keep instances unique"));
    }
    out
}

/// The characteristic formula of a set of interactions over a known port
/// universe: for each interaction the full monomial requiring exactly its
/// ports and inhibiting every other port of the universe, disjoined over
/// the set. It never emits state predicates.
pub fn beta(gamma: &BTreeSet<Interaction>, universe: &[Port]) -> Result<PilFormula> {
    let all: BTreeSet<&Port> = universe.iter().collect();
    let mut parts = Vec::new();
    for a in gamma {
        for p in a.iter() {
            if !all.contains(p) {
                return Err(Error::PortOutsideUniverse(p.to_string()));
            }
        }
        let m = Monomial::new(
            a.iter().cloned(),
            universe.iter().filter(|p| !a.contains(p)).cloned(),
        )?;
        parts.push(m.to_formula());
    }
    Ok(PilFormula::any(parts))
}

/// The conjunctive-style translation: for every port of the universe the
/// formula obtained by substituting `true` for that port. The conjunction
/// of `p => Ψ_p` has the same models as the original formula, plus global
/// idling.
pub fn to_conjunctive(f: &PilFormula, universe: &[Port]) -> BTreeMap<Port, PilFormula> {
    universe
        .iter()
        .map(|p| (p.clone(), f.substitute_true(p)))
        .collect()
}

/// Builds the conjunction of causal rules `p => Ψ_p`.
pub fn conjunction_of(rules: &BTreeMap<Port, PilFormula>) -> PilFormula {
    PilFormula::all(
        rules
            .iter()
            .map(|(p, psi)| PilFormula::Port(p.into()).implies(psi.clone())),
    )
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::component::{ComponentType, InstanceStore, Transition};
    use std::collections::BTreeMap as Map;

    /// A configuration of single-port instances named after the given
    /// ports, so every subset of the universe is a valid interaction.
    pub fn abstract_universe(names: &[&str]) -> (InstanceStore, Vec<Port>) {
        let mut store = InstanceStore::new();
        let mut universe = Vec::new();
        for (i, name) in names.iter().enumerate() {
            let id = InstanceId(i as i64 + 1);
            let ty = ComponentType {
                name: format!("T{name}"),
                locations: vec!["s".into()],
                initial: "s".into(),
                variables: vec![],
                ports: vec![name.to_string()],
                transitions: vec![Transition {
                    from: "s".into(),
                    port: name.to_string(),
                    to: "s".into(),
                }],
                port_ops: Map::new(),
            }
            .validated()
            .unwrap();
            store.add(&ty, id).unwrap();
            universe.push(Port::new(id, *name));
        }
        (store, universe)
    }

    pub fn interaction(universe: &[Port], names: &[&str]) -> Interaction {
        Interaction::new(
            universe
                .iter()
                .filter(|p| names.contains(&p.name.as_str()))
                .cloned(),
        )
        .unwrap()
    }

    pub fn port(universe: &[Port], name: &str) -> Port {
        universe.iter().find(|p| p.name == name).unwrap().clone()
    }

    pub fn lit(universe: &[Port], name: &str) -> PilFormula {
        PilFormula::Port((&port(universe, name)).into())
    }
}
