//! Shared fixtures for tests and the acceptance suite: abstract port
//! universes and deterministic random generation of formulas and terms.

use std::collections::BTreeMap;

use rand::Rng;

use crate::component::{
    BinOp, ComponentType, Expr, InstRef, InstanceId, InstanceStore, Interaction, Port, Transition,
};
use crate::pil::{PilFormula, PortRef};
use crate::pilops::{AssignTarget, Operation, OperationSet, PilopsTerm};

/// A configuration of single-port instances named after the given ports,
/// so every subset of the universe is a valid interaction.
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
            port_ops: BTreeMap::new(),
        }
        .validated()
        .unwrap();
        store.add(&ty, id).unwrap();
        universe.push(Port::new(id, *name));
    }
    (store, universe)
}

/// A universe of `n` ports named `p0..`, one per instance.
pub fn sized_universe(n: usize) -> (InstanceStore, Vec<Port>) {
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    abstract_universe(&refs)
}

/// A universe where each group of ports belongs to one instance, so valid
/// interactions pick at most one port per group.
pub fn grouped_universe(groups: &[&[&str]]) -> (InstanceStore, Vec<Port>) {
    let mut store = InstanceStore::new();
    let mut universe = Vec::new();
    for (i, group) in groups.iter().enumerate() {
        let id = InstanceId(i as i64 + 1);
        let ty = ComponentType {
            name: format!("G{i}"),
            locations: vec!["s".into()],
            initial: "s".into(),
            variables: vec![],
            ports: group.iter().map(|p| p.to_string()).collect(),
            transitions: group
                .iter()
                .map(|p| Transition {
                    from: "s".into(),
                    port: p.to_string(),
                    to: "s".into(),
                })
                .collect(),
            port_ops: BTreeMap::new(),
        }
        .validated()
        .unwrap();
        store.add(&ty, id).unwrap();
        for p in *group {
            universe.push(Port::new(id, *p));
        }
    }
    (store, universe)
}

/// The interaction consisting of the named ports of the universe.
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

/// Random port-level formula over the universe.
pub fn random_formula(rng: &mut impl Rng, universe: &[Port], depth: u32) -> PilFormula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..6) {
            0 => PilFormula::True,
            1 => PilFormula::False,
            _ => {
                let p = &universe[rng.gen_range(0..universe.len())];
                PilFormula::Port(p.into())
            }
        };
    }
    match rng.gen_range(0..4) {
        0 => PilFormula::Not(Box::new(random_formula(rng, universe, depth - 1))),
        1 => PilFormula::And(
            Box::new(random_formula(rng, universe, depth - 1)),
            Box::new(random_formula(rng, universe, depth - 1)),
        ),
        2 => PilFormula::Or(
            Box::new(random_formula(rng, universe, depth - 1)),
            Box::new(random_formula(rng, universe, depth - 1)),
        ),
        _ => PilFormula::Implies(
            Box::new(random_formula(rng, universe, depth - 1)),
            Box::new(random_formula(rng, universe, depth - 1)),
        ),
    }
}

/// Random operation set: assignments of small integer literals to synthetic
/// variable targets. Structurally distinct targets and values exercise the
/// set semantics of operation union.
pub fn random_ops(rng: &mut impl Rng, universe: &[Port]) -> OperationSet {
    let n = rng.gen_range(0..3);
    let mut ops = OperationSet::empty();
    for _ in 0..n {
        let inst = universe[rng.gen_range(0..universe.len())].instance;
        let var = format!("x{}", rng.gen_range(0..3));
        let value = Expr::lit_int(rng.gen_range(0..4));
        ops.insert(Operation::Assign {
            target: AssignTarget::Var {
                instance: InstRef::Concrete(inst),
                var,
            },
            value,
        });
    }
    ops
}

/// Random guarded-command term built from rules, `&` and `|`.
pub fn random_term(rng: &mut impl Rng, universe: &[Port], depth: u32) -> PilopsTerm {
    if depth == 0 || rng.gen_bool(0.4) {
        return PilopsTerm::rule(
            random_formula(rng, universe, 2),
            random_ops(rng, universe),
        );
    }
    let n = rng.gen_range(2..=3);
    let items: Vec<PilopsTerm> = (0..n)
        .map(|_| random_term(rng, universe, depth - 1))
        .collect();
    if rng.gen_bool(0.5) {
        PilopsTerm::and_all(items)
    } else {
        PilopsTerm::or_all(items)
    }
}

/// Random guard paired with random ops, handy for conjunctive-style cases.
pub fn random_rule_parts(
    rng: &mut impl Rng,
    universe: &[Port],
) -> (PilFormula, OperationSet) {
    (random_formula(rng, universe, 2), random_ops(rng, universe))
}

/// A port literal with a variable instance, for first-order fixtures.
pub fn var_port(var: &str, port: &str) -> PortRef {
    PortRef::new(InstRef::Var(var.into()), port)
}

/// Comparison of two component variables, e.g. `s1 != s2`.
pub fn var_cmp(op: BinOp, a: &str, b: &str) -> Expr {
    Expr::bin(
        op,
        Expr::InstanceRef(InstRef::Var(a.into())),
        Expr::InstanceRef(InstRef::Var(b.into())),
    )
}
