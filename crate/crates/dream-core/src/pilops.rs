//! Guarded-command terms over interaction-logic guards: `guard -> ops`
//! rules composed with conjunction (`&`) and union (`|`), the rewrite
//! axioms with disjunctive normal form, and the conjunctive-term machinery
//! translating per-port causal rules into explicit disjunctive form.
//!
//! Satisfaction treats `&` and `|` as logical conjunction and disjunction;
//! operations differ: a conjunction contributes operations only when both
//! sides are satisfied, a union contributes the operations of every
//! satisfied disjunct.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::component::{EvalScope, Expr, InstRef, InstanceId, Interaction, Port};
use crate::error::{Error, Result};
use crate::pil::{pil_satisfies, valid_subsets, PilFormula, PortRef};

/// Enumeration guard for [`equivalent`].
pub const EQUIV_UNIVERSE_BOUND: usize = 20;

/// Assignment destination, resolved against the pre-state snapshot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssignTarget {
    /// Local variable `c.x`.
    Var { instance: InstRef, var: String },
    /// Attribute of the node the instance is addressed to: `at(c).x`.
    NodeAttr { instance: InstRef, attr: String },
}

impl AssignTarget {
    fn map_refs(&self, f: &dyn Fn(&InstRef) -> InstRef) -> AssignTarget {
        match self {
            AssignTarget::Var { instance, var } => AssignTarget::Var {
                instance: f(instance),
                var: var.clone(),
            },
            AssignTarget::NodeAttr { instance, attr } => AssignTarget::NodeAttr {
                instance: f(instance),
                attr: attr.clone(),
            },
        }
    }
}

impl fmt::Display for AssignTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssignTarget::Var { instance, var } => write!(f, "{instance}.{var}"),
            AssignTarget::NodeAttr { instance, attr } => write!(f, "at({instance}).{attr}"),
        }
    }
}

/// Reconfiguration statements transforming a motif configuration. All
/// expressions are evaluated against the pre-state snapshot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReconfigOp {
    /// Creates a fresh instance of the type at the node.
    Create { ty: String, node: Expr },
    /// Deletes the instance (and its address binding).
    Delete { instance: Expr },
    AddNode { node: Expr },
    /// Removes the node along with incident edges and instances mapped
    /// to it.
    RemoveNode { node: Expr },
    AddEdge { from: Expr, to: Expr },
    RemoveEdge { from: Expr, to: Expr },
    /// Changes the instance's address only.
    Move { instance: Expr, node: Expr },
}

impl ReconfigOp {
    fn map_exprs(&self, f: &dyn Fn(&Expr) -> Expr) -> ReconfigOp {
        match self {
            ReconfigOp::Create { ty, node } => ReconfigOp::Create {
                ty: ty.clone(),
                node: f(node),
            },
            ReconfigOp::Delete { instance } => ReconfigOp::Delete {
                instance: f(instance),
            },
            ReconfigOp::AddNode { node } => ReconfigOp::AddNode { node: f(node) },
            ReconfigOp::RemoveNode { node } => ReconfigOp::RemoveNode { node: f(node) },
            ReconfigOp::AddEdge { from, to } => ReconfigOp::AddEdge {
                from: f(from),
                to: f(to),
            },
            ReconfigOp::RemoveEdge { from, to } => ReconfigOp::RemoveEdge {
                from: f(from),
                to: f(to),
            },
            ReconfigOp::Move { instance, node } => ReconfigOp::Move {
                instance: f(instance),
                node: f(node),
            },
        }
    }

    fn exprs(&self) -> Vec<&Expr> {
        match self {
            ReconfigOp::Create { node, .. }
            | ReconfigOp::AddNode { node }
            | ReconfigOp::RemoveNode { node } => vec![node],
            ReconfigOp::Delete { instance } => vec![instance],
            ReconfigOp::AddEdge { from, to } | ReconfigOp::RemoveEdge { from, to } => {
                vec![from, to]
            }
            ReconfigOp::Move { instance, node } => vec![instance, node],
        }
    }
}

impl fmt::Display for ReconfigOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReconfigOp::Create { ty, node } => write!(f, "create {ty} at {node}"),
            ReconfigOp::Delete { instance } => write!(f, "delete {instance}"),
            ReconfigOp::AddNode { node } => write!(f, "addnode {node}"),
            ReconfigOp::RemoveNode { node } => write!(f, "removenode {node}"),
            ReconfigOp::AddEdge { from, to } => write!(f, "addedge({from}, {to})"),
            ReconfigOp::RemoveEdge { from, to } => write!(f, "removeedge({from}, {to})"),
            ReconfigOp::Move { instance, node } => write!(f, "move {instance} to {node}"),
        }
    }
}

/// One operation of a guarded command.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operation {
    /// `target := value`, reads resolved against the snapshot.
    Assign { target: AssignTarget, value: Expr },
    Reconfig(ReconfigOp),
    /// Moves an instance to a node of another motif's map; only valid in
    /// migration terms.
    Migrate {
        instance: Expr,
        motif: String,
        node: Expr,
    },
    /// Branches on a snapshot predicate and contributes the chosen
    /// branch's operations.
    Conditional {
        condition: Expr,
        then_ops: OperationSet,
        else_ops: OperationSet,
    },
}

impl Operation {
    pub fn assign(target: AssignTarget, value: Expr) -> Operation {
        Operation::Assign { target, value }
    }

    pub fn map_parts(
        &self,
        fr: &dyn Fn(&InstRef) -> InstRef,
        fe: &dyn Fn(&Expr) -> Expr,
    ) -> Operation {
        match self {
            Operation::Assign { target, value } => Operation::Assign {
                target: target.map_refs(fr),
                value: fe(value),
            },
            Operation::Reconfig(op) => Operation::Reconfig(op.map_exprs(fe)),
            Operation::Migrate {
                instance,
                motif,
                node,
            } => Operation::Migrate {
                instance: fe(instance),
                motif: motif.clone(),
                node: fe(node),
            },
            Operation::Conditional {
                condition,
                then_ops,
                else_ops,
            } => Operation::Conditional {
                condition: fe(condition),
                then_ops: then_ops.map_parts(fr, fe),
                else_ops: else_ops.map_parts(fr, fe),
            },
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        let target_vars = |t: &AssignTarget, out: &mut BTreeSet<String>| {
            let r = match t {
                AssignTarget::Var { instance, .. } => instance,
                AssignTarget::NodeAttr { instance, .. } => instance,
            };
            if let InstRef::Var(v) = r {
                out.insert(v.clone());
            }
        };
        match self {
            Operation::Assign { target, value } => {
                target_vars(target, out);
                value.free_vars(out);
            }
            Operation::Reconfig(op) => {
                for e in op.exprs() {
                    e.free_vars(out);
                }
            }
            Operation::Migrate { instance, node, .. } => {
                instance.free_vars(out);
                node.free_vars(out);
            }
            Operation::Conditional {
                condition,
                then_ops,
                else_ops,
            } => {
                condition.free_vars(out);
                then_ops.free_vars(out);
                else_ops.free_vars(out);
            }
        }
    }

    /// True when the operation (transitively) contains a migration.
    pub fn contains_migrate(&self) -> bool {
        match self {
            Operation::Migrate { .. } => true,
            Operation::Conditional {
                then_ops, else_ops, ..
            } => {
                then_ops.iter().any(Operation::contains_migrate)
                    || else_ops.iter().any(Operation::contains_migrate)
            }
            _ => false,
        }
    }

    /// True when the operation (transitively) is migration-only.
    pub fn migrate_only(&self) -> bool {
        match self {
            Operation::Migrate { .. } => true,
            Operation::Conditional {
                then_ops, else_ops, ..
            } => {
                then_ops.iter().all(Operation::migrate_only)
                    && else_ops.iter().all(Operation::migrate_only)
            }
            _ => false,
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Assign { target, value } => write!(f, "{target} := {value}"),
            Operation::Reconfig(op) => write!(f, "{op}"),
            Operation::Migrate {
                instance,
                motif,
                node,
            } => write!(f, "migrate {instance} to {motif} at {node}"),
            Operation::Conditional {
                condition,
                then_ops,
                else_ops,
            } => {
                write!(f, "if {condition} then {then_ops}")?;
                if !else_ops.is_empty() {
                    write!(f, " else {else_ops}")?;
                }
                Ok(())
            }
        }
    }
}

/// A set of operations. Union is idempotent; two operations are the same
/// element only when structurally equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperationSet {
    ops: BTreeSet<Operation>,
}

impl OperationSet {
    pub fn empty() -> OperationSet {
        OperationSet::default()
    }

    pub fn single(op: Operation) -> OperationSet {
        OperationSet {
            ops: [op].into_iter().collect(),
        }
    }

    pub fn insert(&mut self, op: Operation) {
        self.ops.insert(op);
    }

    pub fn union(mut self, other: &OperationSet) -> OperationSet {
        self.ops.extend(other.ops.iter().cloned());
        self
    }

    pub fn extend_from(&mut self, other: &OperationSet) {
        self.ops.extend(other.ops.iter().cloned());
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Operation> {
        self.ops.iter()
    }

    pub fn map_parts(
        &self,
        fr: &dyn Fn(&InstRef) -> InstRef,
        fe: &dyn Fn(&Expr) -> Expr,
    ) -> OperationSet {
        OperationSet {
            ops: self.ops.iter().map(|op| op.map_parts(fr, fe)).collect(),
        }
    }

    pub fn subst(&self, var: &str, id: InstanceId) -> OperationSet {
        self.map_parts(&|r| r.subst(var, id), &|e| e.subst(var, id))
    }

    pub fn subst_self(&self, id: InstanceId) -> OperationSet {
        self.map_parts(&|r| r.subst_self(id), &|e| e.subst_self(id))
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        for op in &self.ops {
            op.free_vars(out);
        }
    }
}

impl FromIterator<Operation> for OperationSet {
    fn from_iter<T: IntoIterator<Item = Operation>>(iter: T) -> Self {
        OperationSet {
            ops: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for OperationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, op) in self.ops.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, " {op}")?;
        }
        if !self.ops.is_empty() {
            write!(f, " ")?;
        }
        write!(f, "}}")
    }
}

/// A guarded-command term. `&` and `|` are associative and commutative and
/// are kept n-ary; `&` binds tighter than `|`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PilopsTerm {
    Rule {
        guard: PilFormula,
        ops: OperationSet,
    },
    And(Vec<PilopsTerm>),
    Or(Vec<PilopsTerm>),
}

impl PilopsTerm {
    pub fn rule(guard: PilFormula, ops: OperationSet) -> PilopsTerm {
        PilopsTerm::Rule { guard, ops }
    }

    pub fn formula(guard: PilFormula) -> PilopsTerm {
        PilopsTerm::rule(guard, OperationSet::empty())
    }

    /// The neutral element of `&`.
    pub fn neutral() -> PilopsTerm {
        PilopsTerm::formula(PilFormula::True)
    }

    /// The neutral element of `|`: an unsatisfiable term.
    pub fn absorbing() -> PilopsTerm {
        PilopsTerm::formula(PilFormula::False)
    }

    /// n-ary conjunction; nested conjunctions are flattened and an empty
    /// list yields the neutral term.
    pub fn and_all(items: impl IntoIterator<Item = PilopsTerm>) -> PilopsTerm {
        let mut flat = Vec::new();
        for t in items {
            match t {
                PilopsTerm::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => PilopsTerm::neutral(),
            1 => flat.pop().unwrap(),
            _ => PilopsTerm::And(flat),
        }
    }

    /// n-ary union; nested unions are flattened and an empty list yields
    /// the absorbing (unsatisfiable) term.
    pub fn or_all(items: impl IntoIterator<Item = PilopsTerm>) -> PilopsTerm {
        let mut flat = Vec::new();
        for t in items {
            match t {
                PilopsTerm::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => PilopsTerm::absorbing(),
            1 => flat.pop().unwrap(),
            _ => PilopsTerm::Or(flat),
        }
    }

    pub fn and(self, other: PilopsTerm) -> PilopsTerm {
        PilopsTerm::and_all([self, other])
    }

    pub fn or(self, other: PilopsTerm) -> PilopsTerm {
        PilopsTerm::or_all([self, other])
    }

    pub fn map_parts(
        &self,
        ff: &dyn Fn(&PilFormula) -> PilFormula,
        fo: &dyn Fn(&OperationSet) -> OperationSet,
    ) -> PilopsTerm {
        match self {
            PilopsTerm::Rule { guard, ops } => PilopsTerm::rule(ff(guard), fo(ops)),
            PilopsTerm::And(ts) => {
                PilopsTerm::And(ts.iter().map(|t| t.map_parts(ff, fo)).collect())
            }
            PilopsTerm::Or(ts) => PilopsTerm::Or(ts.iter().map(|t| t.map_parts(ff, fo)).collect()),
        }
    }

    /// Substitutes a component variable with a concrete instance id in
    /// guards and operations.
    pub fn subst(&self, var: &str, id: InstanceId) -> PilopsTerm {
        self.map_parts(&|f| f.subst(var, id), &|o| o.subst(var, id))
    }

    pub fn subst_self(&self, id: InstanceId) -> PilopsTerm {
        self.map_parts(&|f| f.subst_self(id), &|o| o.subst_self(id))
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            PilopsTerm::Rule { guard, ops } => {
                guard.free_vars(out);
                ops.free_vars(out);
            }
            PilopsTerm::And(ts) | PilopsTerm::Or(ts) => {
                for t in ts {
                    t.free_vars(out);
                }
            }
        }
    }

    /// Folds state predicates in every guard against the configuration.
    pub fn fold_predicates(&self, scope: &dyn EvalScope) -> Result<PilopsTerm> {
        Ok(match self {
            PilopsTerm::Rule { guard, ops } => {
                PilopsTerm::rule(guard.fold_predicates(scope)?, ops.clone())
            }
            PilopsTerm::And(ts) => PilopsTerm::And(
                ts.iter()
                    .map(|t| t.fold_predicates(scope))
                    .collect::<Result<_>>()?,
            ),
            PilopsTerm::Or(ts) => PilopsTerm::Or(
                ts.iter()
                    .map(|t| t.fold_predicates(scope))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    pub fn operations(&self) -> Vec<&OperationSet> {
        match self {
            PilopsTerm::Rule { ops, .. } => vec![ops],
            PilopsTerm::And(ts) | PilopsTerm::Or(ts) => {
                ts.iter().flat_map(|t| t.operations()).collect()
            }
        }
    }
}

/// Satisfaction of a guarded-command term: rules defer to their guard,
/// `&` requires both sides, `|` either side.
pub fn pilops_satisfies(
    a: &Interaction,
    scope: &dyn EvalScope,
    term: &PilopsTerm,
) -> Result<bool> {
    Ok(match term {
        PilopsTerm::Rule { guard, .. } => pil_satisfies(a, scope, guard)?,
        PilopsTerm::And(ts) => {
            for t in ts {
                if !pilops_satisfies(a, scope, t)? {
                    return Ok(false);
                }
            }
            true
        }
        PilopsTerm::Or(ts) => {
            for t in ts {
                if pilops_satisfies(a, scope, t)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

/// The set of operations to be performed for the term under `(a, Γ)`:
/// a rule contributes its operations when its guard holds; a conjunction
/// contributes the union of its sides when all are satisfied and nothing
/// otherwise; a union contributes the union of its disjuncts
/// unconditionally (unsatisfied disjuncts contribute the empty set).
pub fn ops_of(a: &Interaction, scope: &dyn EvalScope, term: &PilopsTerm) -> Result<OperationSet> {
    Ok(match term {
        PilopsTerm::Rule { guard, ops } => {
            if pil_satisfies(a, scope, guard)? {
                ops.clone()
            } else {
                OperationSet::empty()
            }
        }
        PilopsTerm::And(ts) => {
            if !pilops_satisfies(a, scope, term)? {
                return Ok(OperationSet::empty());
            }
            let mut out = OperationSet::empty();
            for t in ts {
                out.extend_from(&ops_of(a, scope, t)?);
            }
            out
        }
        PilopsTerm::Or(ts) => {
            let mut out = OperationSet::empty();
            for t in ts {
                out.extend_from(&ops_of(a, scope, t)?);
            }
            out
        }
    })
}

/// Semantic equivalence by brute force: the two terms agree on satisfaction
/// and on the operation set for every interaction over the universe and
/// every supplied configuration.
pub fn equivalent(
    t1: &PilopsTerm,
    t2: &PilopsTerm,
    universe: &[Port],
    scopes: &[&dyn EvalScope],
) -> Result<bool> {
    if universe.len() > EQUIV_UNIVERSE_BOUND {
        return Err(Error::UniverseTooLarge(universe.len(), EQUIV_UNIVERSE_BOUND));
    }
    for scope in scopes {
        for a in valid_subsets(universe) {
            if pilops_satisfies(&a, *scope, t1)? != pilops_satisfies(&a, *scope, t2)? {
                return Ok(false);
            }
            if ops_of(&a, *scope, t1)? != ops_of(&a, *scope, t2)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The conjunctive term for a causal rule `p => Ψ_p` with operations:
/// `(not p -> {}) | (p and Ψ_p -> Δ_p)`. The operations may run exactly
/// when `p` participates in the interaction.
pub fn conjunctive_term(port: PortRef, guard: PilFormula, ops: OperationSet) -> PilopsTerm {
    let p = PilFormula::Port(port);
    PilopsTerm::Or(vec![
        PilopsTerm::formula(p.clone().negate()),
        PilopsTerm::rule(p.and(guard), ops),
    ])
}

/// Expands a family of per-port causal rules into the equivalent explicit
/// disjunctive form: one rule per partition `I ∪ J = P`, requiring the
/// ports of `I` with their guards, inhibiting the ports of `J`, and
/// executing the union of the operations of `I`. The all-negative rule with
/// empty operations is always present (it admits global idling).
pub fn expand_conjunctive(
    entries: &BTreeMap<Port, (PilFormula, OperationSet)>,
    universe: &[Port],
) -> Result<PilopsTerm> {
    for p in universe {
        if !entries.contains_key(p) {
            return Err(Error::Invalid(format!("no causal rule for port {p}")));
        }
    }
    let n = universe.len();
    let mut disjuncts = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let mut guard = PilFormula::True;
        let mut ops = OperationSet::empty();
        for (i, p) in universe.iter().enumerate() {
            let lit = PilFormula::Port(p.into());
            if mask & (1 << i) != 0 {
                let (psi, delta) = &entries[p];
                guard = guard.and(lit).and(psi.clone());
                ops.extend_from(delta);
            } else {
                guard = guard.and(lit.negate());
            }
        }
        disjuncts.push(PilopsTerm::rule(guard, ops));
    }
    Ok(PilopsTerm::Or(disjuncts))
}

// ---- disjunctive normal form -------------------------------------------

/// Collects the top-level conjuncts of a guard as literals with polarity,
/// treating non-conjunctive subformulas as opaque atoms.
fn guard_literals(f: &PilFormula, polarity: bool, out: &mut BTreeSet<(PilFormula, bool)>) {
    match (f, polarity) {
        (PilFormula::And(a, b), true) => {
            guard_literals(a, true, out);
            guard_literals(b, true, out);
        }
        (PilFormula::Or(a, b), false) => {
            guard_literals(a, false, out);
            guard_literals(b, false, out);
        }
        (PilFormula::Not(inner), pol) => guard_literals(inner, !pol, out),
        (atom, pol) => {
            out.insert((atom.clone(), pol));
        }
    }
}

fn literal_set(f: &PilFormula) -> BTreeSet<(PilFormula, bool)> {
    let mut out = BTreeSet::new();
    guard_literals(f, true, &mut out);
    out
}

fn contradicts(lits: &BTreeSet<(PilFormula, bool)>) -> bool {
    lits.iter().any(|(a, pol)| {
        matches!(
            (a, pol),
            (PilFormula::True, false) | (PilFormula::False, true)
        ) || lits.contains(&(a.clone(), !pol))
    })
}

/// Distributes `&` over `|` and fuses conjoined rules into single rules
/// (`(Ψ1 -> Δ1) & (Ψ2 -> Δ2) = (Ψ1 and Ψ2 -> Δ1 ∪ Δ2)`), yielding the
/// flat disjunct list of the distributed form.
fn distribute(term: &PilopsTerm) -> Vec<(PilFormula, OperationSet)> {
    match term {
        PilopsTerm::Rule { guard, ops } => vec![(guard.clone(), ops.clone())],
        PilopsTerm::Or(ts) => ts.iter().flat_map(distribute).collect(),
        PilopsTerm::And(ts) => {
            let mut acc: Vec<(PilFormula, OperationSet)> =
                vec![(PilFormula::True, OperationSet::empty())];
            for t in ts {
                let parts = distribute(t);
                let mut next = Vec::with_capacity(acc.len() * parts.len());
                for (g, o) in &acc {
                    for (pg, po) in &parts {
                        next.push((g.clone().and(pg.clone()), o.clone().union(po)));
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// Disjunctive normal form: a union of rules with pairwise-disjoint guards,
/// equivalent to the input. Distribution and rule fusion produce the raw
/// disjuncts; where guards may overlap, sign-complete combinations are
/// emitted, pruning combinations whose guard is syntactically contradictory
/// and dropping negated disjuncts already excluded by the positive part.
pub fn to_dnf(term: &PilopsTerm) -> PilopsTerm {
    let rules = distribute(term);
    let n = rules.len();
    if n == 0 || n > 16 {
        // n > 16 would mean 2^n sign combinations; fall back to the
        // distributed form, which is equivalent albeit not disjoint.
        return PilopsTerm::or_all(rules.into_iter().map(|(g, o)| PilopsTerm::rule(g, o)));
    }
    let lit_sets: Vec<BTreeSet<(PilFormula, bool)>> =
        rules.iter().map(|(g, _)| literal_set(g)).collect();
    let mut disjuncts = Vec::new();
    for mask in 1u64..(1 << n) {
        let mut base: BTreeSet<(PilFormula, bool)> = BTreeSet::new();
        for (i, lits) in lit_sets.iter().enumerate() {
            if mask & (1 << i) != 0 {
                base.extend(lits.iter().cloned());
            }
        }
        if contradicts(&base) {
            continue;
        }
        let mut guard = PilFormula::True;
        let mut ops = OperationSet::empty();
        for (i, (g, o)) in rules.iter().enumerate() {
            if mask & (1 << i) != 0 {
                guard = guard.and(g.clone());
                ops.extend_from(o);
            } else {
                // keep the negated disjunct only when the positive part
                // does not already contradict it
                let excluded = lit_sets[i]
                    .iter()
                    .any(|(a, pol)| base.contains(&(a.clone(), !pol)));
                if !excluded {
                    guard = guard.and(g.clone().negate());
                }
            }
        }
        if guard == PilFormula::False {
            continue;
        }
        disjuncts.push(PilopsTerm::rule(guard, ops));
    }
    PilopsTerm::or_all(disjuncts)
}

/// The disjuncts of a normal form, treating a lone rule as a singleton.
pub fn dnf_disjuncts(term: &PilopsTerm) -> Vec<&PilopsTerm> {
    match term {
        PilopsTerm::Or(ts) => ts.iter().collect(),
        other => vec![other],
    }
}

impl fmt::Display for PilopsTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PilopsTerm::Rule { guard, ops } => write!(f, "{guard} -> {ops}"),
            PilopsTerm::And(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " & ")?;
                    }
                    match t {
                        PilopsTerm::Rule { .. } | PilopsTerm::Or(_) => write!(f, "({t})")?,
                        PilopsTerm::And(_) => write!(f, "{t}")?,
                    }
                }
                Ok(())
            }
            PilopsTerm::Or(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    match t {
                        PilopsTerm::Rule { .. } => write!(f, "({t})")?,
                        _ => write!(f, "{t}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::component::InstanceStore;
    use crate::testkit::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assign(universe: &[Port], pname: &str, var: &str, v: i64) -> Operation {
        Operation::Assign {
            target: AssignTarget::Var {
                instance: InstRef::Concrete(port(universe, pname).instance),
                var: var.into(),
            },
            value: Expr::lit_int(v),
        }
    }

    /// The master-slaves term with data: two binds without operations and
    /// the triple synchronization assigning the buffer.
    fn masterslaves_term(u: &[Port]) -> (PilopsTerm, OperationSet) {
        let buffer_assign: OperationSet = [Operation::Assign {
            target: AssignTarget::Var {
                instance: InstRef::Concrete(port(u, "work").instance),
                var: "buffer".into(),
            },
            value: Expr::bin(
                crate::component::BinOp::Add,
                Expr::var(InstRef::Concrete(port(u, "serve1").instance), "mem"),
                Expr::var(InstRef::Concrete(port(u, "serve2").instance), "mem"),
            ),
        }]
        .into_iter()
        .collect();
        let term = PilopsTerm::or_all([
            PilopsTerm::formula(
                lit(u, "link1")
                    .and(lit(u, "bind1"))
                    .and(lit(u, "bind2").negate())
                    .and(lit(u, "serve2").negate()),
            ),
            PilopsTerm::formula(
                lit(u, "link2")
                    .and(lit(u, "bind2"))
                    .and(lit(u, "bind1").negate())
                    .and(lit(u, "serve1").negate()),
            ),
            PilopsTerm::rule(
                lit(u, "work").and(lit(u, "serve1")).and(lit(u, "serve2")),
                buffer_assign.clone(),
            ),
        ]);
        (term, buffer_assign)
    }

    fn ms_universe() -> (InstanceStore, Vec<Port>) {
        grouped_universe(&[
            &["link1", "link2", "work"],
            &["bind1", "serve1"],
            &["bind2", "serve2"],
        ])
    }

    #[test]
    fn satisfaction_of_disjunctive_term() {
        let (store, u) = ms_universe();
        let (term, _) = masterslaves_term(&u);
        let work = interaction(&u, &["work", "serve1", "serve2"]);
        assert!(pilops_satisfies(&work, &store, &term).unwrap());
        let link = interaction(&u, &["link1"]);
        assert!(!pilops_satisfies(&link, &store, &term).unwrap());
    }

    #[test]
    fn neutral_rule_always_satisfied() {
        let (store, u) = sized_universe(3);
        for a in valid_subsets(&u) {
            assert!(pilops_satisfies(&a, &store, &PilopsTerm::neutral()).unwrap());
        }
    }

    #[test]
    fn ops_of_work_interaction() {
        let (store, u) = ms_universe();
        let (term, buffer_assign) = masterslaves_term(&u);
        let work = interaction(&u, &["work", "serve1", "serve2"]);
        assert_eq!(ops_of(&work, &store, &term).unwrap(), buffer_assign);
    }

    #[test]
    fn conjunction_with_unsatisfied_side_contributes_nothing() {
        let (store, u) = sized_universe(2);
        let t1 = PilopsTerm::rule(
            lit(&u, "p0"),
            OperationSet::single(assign(&u, "p0", "x", 1)),
        );
        let t2 = PilopsTerm::rule(
            lit(&u, "p1"),
            OperationSet::single(assign(&u, "p1", "y", 2)),
        );
        let both = t1.and(t2);
        let a = interaction(&u, &["p0"]);
        assert_eq!(ops_of(&a, &store, &both).unwrap(), OperationSet::empty());
        let ab = interaction(&u, &["p0", "p1"]);
        assert_eq!(ops_of(&ab, &store, &both).unwrap().len(), 2);
    }

    #[test]
    fn union_of_same_guard_merges_ops() {
        let (store, u) = sized_universe(1);
        let d1 = OperationSet::single(assign(&u, "p0", "x", 1));
        let d2 = OperationSet::single(assign(&u, "p0", "y", 2));
        let t = PilopsTerm::rule(lit(&u, "p0"), d1.clone())
            .or(PilopsTerm::rule(lit(&u, "p0"), d2.clone()));
        let a = interaction(&u, &["p0"]);
        assert_eq!(ops_of(&a, &store, &t).unwrap(), d1.union(&d2));
    }

    #[test]
    fn pil_embedding() {
        let (store, u) = sized_universe(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let f = random_formula(&mut rng, &u, 3);
            let t = PilopsTerm::formula(f.clone());
            for a in valid_subsets(&u) {
                assert_eq!(
                    pilops_satisfies(&a, &store, &t).unwrap(),
                    pil_satisfies(&a, &store, &f).unwrap()
                );
            }
        }
    }

    #[test]
    fn dnf_of_single_rule_is_itself() {
        let (_, u) = sized_universe(2);
        let r = PilopsTerm::rule(
            lit(&u, "p0").and(lit(&u, "p1")),
            OperationSet::single(assign(&u, "p0", "x", 1)),
        );
        assert_eq!(to_dnf(&r), r);
    }

    #[test]
    fn dnf_of_two_conjunctive_terms_is_four_disjuncts() {
        let (store, u) = sized_universe(2);
        let dp = OperationSet::single(assign(&u, "p0", "x", 1));
        let dq = OperationSet::single(assign(&u, "p1", "y", 2));
        let conj = conjunctive_term((&port(&u, "p0")).into(), PilFormula::True, dp.clone())
            .and(conjunctive_term(
                (&port(&u, "p1")).into(),
                PilFormula::True,
                dq.clone(),
            ));
        let dnf = to_dnf(&conj);
        let PilopsTerm::Or(disjuncts) = &dnf else {
            panic!("expected a union, got {dnf}");
        };
        assert_eq!(disjuncts.len(), 4);
        let expected_ops: BTreeSet<OperationSet> = [
            OperationSet::empty(),
            dp.clone(),
            dq.clone(),
            dp.clone().union(&dq),
        ]
        .into_iter()
        .collect();
        let got_ops: BTreeSet<OperationSet> = disjuncts
            .iter()
            .map(|t| match t {
                PilopsTerm::Rule { ops, .. } => ops.clone(),
                _ => panic!("DNF disjunct is not a rule"),
            })
            .collect();
        assert_eq!(got_ops, expected_ops);
        assert!(equivalent(&conj, &dnf, &u, &[&store]).unwrap());
        for a in valid_subsets(&u) {
            let fired = disjuncts
                .iter()
                .filter(|t| pilops_satisfies(&a, &store, t).unwrap())
                .count();
            assert!(fired <= 1, "guards overlap on {a}");
        }
    }

    #[test]
    fn dnf_random_terms_equivalent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.gen_range(1..=4);
            let (store, u) = sized_universe(n);
            let t = random_term(&mut rng, &u, 2);
            let dnf = to_dnf(&t);
            assert!(
                equivalent(&t, &dnf, &u, &[&store]).unwrap(),
                "t = {t}, dnf = {dnf}"
            );
            let disjuncts = dnf_disjuncts(&dnf);
            for d in &disjuncts {
                assert!(matches!(d, PilopsTerm::Rule { .. }));
            }
            for a in valid_subsets(&u) {
                let fired = disjuncts
                    .iter()
                    .filter(|d| pilops_satisfies(&a, &store, d).unwrap())
                    .count();
                assert!(fired <= 1);
            }
        }
    }

    #[test]
    fn equivalence_axiom_smoke() {
        let (store, u) = sized_universe(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let t = random_term(&mut rng, &u, 2);
            assert!(equivalent(&t.clone().and(PilopsTerm::neutral()), &t, &u, &[&store]).unwrap());
            assert!(equivalent(&PilopsTerm::absorbing().or(t.clone()), &t, &u, &[&store]).unwrap());
        }
    }

    #[test]
    fn absorption_axiom() {
        let (store, u) = sized_universe(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let t1 = random_term(&mut rng, &u, 2);
            let t2 = random_term(&mut rng, &u, 2);
            let lhs = PilopsTerm::or_all([t1.clone(), t2.clone()]);
            let rhs = PilopsTerm::or_all([t1.clone(), t2.clone(), t1.clone().and(t2.clone())]);
            assert!(equivalent(&lhs, &rhs, &u, &[&store]).unwrap());
        }
    }

    #[test]
    fn conjunctive_term_examples() {
        let (store, u) = sized_universe(2);
        // q => p over a broadcast: satisfied exactly when q ∈ a implies p ∈ a
        let t = conjunctive_term(
            (&port(&u, "p1")).into(),
            lit(&u, "p0"),
            OperationSet::empty(),
        );
        for a in valid_subsets(&u) {
            let expect = !a.contains(&port(&u, "p1")) || a.contains(&port(&u, "p0"));
            assert_eq!(pilops_satisfies(&a, &store, &t).unwrap(), expect);
        }
        // trivial guard: satisfied by every interaction
        let t = conjunctive_term(
            (&port(&u, "p0")).into(),
            PilFormula::True,
            OperationSet::empty(),
        );
        for a in valid_subsets(&u) {
            assert!(pilops_satisfies(&a, &store, &t).unwrap());
        }
    }

    /// The conjunction of the seven causal rules of the master-slaves
    /// example equals the disjunctive term except for global idling.
    #[test]
    fn masterslaves_conjunctive_matches_disjunctive_modulo_idle() {
        let (store, u) = ms_universe();
        let (disj, buffer_assign) = masterslaves_term(&u);
        let ct = |p: &str, guard: PilFormula, ops: OperationSet| {
            conjunctive_term((&port(&u, p)).into(), guard, ops)
        };
        let conj = PilopsTerm::and_all([
            ct("link1", lit(&u, "bind1"), OperationSet::empty()),
            ct("link2", lit(&u, "bind2"), OperationSet::empty()),
            ct("bind1", lit(&u, "link1"), OperationSet::empty()),
            ct("bind2", lit(&u, "link2"), OperationSet::empty()),
            ct(
                "work",
                lit(&u, "serve1").and(lit(&u, "serve2")),
                buffer_assign,
            ),
            ct("serve1", lit(&u, "work"), OperationSet::empty()),
            ct("serve2", lit(&u, "work"), OperationSet::empty()),
        ]);
        for a in valid_subsets(&u) {
            let s_disj = pilops_satisfies(&a, &store, &disj).unwrap();
            let s_conj = pilops_satisfies(&a, &store, &conj).unwrap();
            if a.is_empty() {
                assert!(!s_disj);
                assert!(s_conj);
            } else {
                assert_eq!(s_disj, s_conj, "disagree on {a}");
                if s_disj {
                    assert_eq!(
                        ops_of(&a, &store, &disj).unwrap(),
                        ops_of(&a, &store, &conj).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn expand_conjunctive_two_ports() {
        let (store, u) = sized_universe(2);
        let dp = OperationSet::single(assign(&u, "p0", "x", 1));
        let dq = OperationSet::single(assign(&u, "p1", "y", 2));
        let entries: BTreeMap<Port, (PilFormula, OperationSet)> = [
            (port(&u, "p0"), (PilFormula::True, dp.clone())),
            (port(&u, "p1"), (PilFormula::True, dq.clone())),
        ]
        .into_iter()
        .collect();
        let expanded = expand_conjunctive(&entries, &u).unwrap();
        let PilopsTerm::Or(ds) = &expanded else {
            panic!("not a union")
        };
        assert_eq!(ds.len(), 4);
        let conj = PilopsTerm::and_all(
            entries
                .iter()
                .map(|(p, (g, o))| conjunctive_term(p.into(), g.clone(), o.clone())),
        );
        assert!(equivalent(&expanded, &conj, &u, &[&store]).unwrap());
    }

    #[test]
    fn expand_conjunctive_single_port_trivial() {
        let (_, u) = sized_universe(1);
        let entries: BTreeMap<Port, (PilFormula, OperationSet)> =
            [(port(&u, "p0"), (PilFormula::True, OperationSet::empty()))]
                .into_iter()
                .collect();
        let expanded = expand_conjunctive(&entries, &u).unwrap();
        let PilopsTerm::Or(ds) = &expanded else {
            panic!("not a union")
        };
        assert_eq!(ds.len(), 2);
        // first disjunct: ¬p with no operations
        let PilopsTerm::Rule { guard, ops } = &ds[0] else {
            panic!()
        };
        assert_eq!(guard, &lit(&u, "p0").negate());
        assert!(ops.is_empty());
    }

    #[test]
    fn expand_conjunctive_requires_every_port() {
        let (_, u) = sized_universe(2);
        let entries: BTreeMap<Port, (PilFormula, OperationSet)> =
            [(port(&u, "p0"), (PilFormula::True, OperationSet::empty()))]
                .into_iter()
                .collect();
        assert!(expand_conjunctive(&entries, &u).is_err());
    }

    #[test]
    fn expand_conjunctive_random_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let n = rng.gen_range(1..=3);
            let (store, u) = sized_universe(n);
            let entries: BTreeMap<Port, (PilFormula, OperationSet)> = u
                .iter()
                .map(|p| (p.clone(), random_rule_parts(&mut rng, &u)))
                .collect();
            let expanded = expand_conjunctive(&entries, &u).unwrap();
            let conj = PilopsTerm::and_all(
                entries
                    .iter()
                    .map(|(p, (g, o))| conjunctive_term(p.into(), g.clone(), o.clone())),
            );
            assert!(equivalent(&expanded, &conj, &u, &[&store]).unwrap());
        }
    }

    #[test]
    fn term_display_shape() {
        let (_, u) = sized_universe(2);
        let t = PilopsTerm::rule(
            lit(&u, "p0"),
            OperationSet::single(assign(&u, "p0", "x", 1)),
        )
        .or(PilopsTerm::formula(lit(&u, "p1")));
        let s = t.to_string();
        assert!(s.contains("->"), "{s}");
        assert!(s.contains(" | "), "{s}");
    }
}
