//! Propositional IR: variables keyed by encoding role, clauses and cubes,
//! a two-block QBF, and the definition-to-clause compiler.

mod dimacs;
mod qbf;

use std::collections::HashMap;
use std::fmt;

use crate::kexpr::{Color, LabeledGraph};

pub use dimacs::{parse_dimacs, write_dimacs, DimacsError};
pub use qbf::write_qbf;

/// Variable families attached to (color, node) pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Ext,
    Defeat,
    Attack,
    Out,
    DefeatGe,
    Subset,
    RangeLoss,
    Sat,
    True,
    False,
}

impl Family {
    pub fn symbol(self) -> &'static str {
        match self {
            Family::Ext => "e",
            Family::Defeat => "d",
            Family::Attack => "a",
            Family::Out => "o",
            Family::DefeatGe => "dge",
            Family::Subset => "s",
            Family::RangeLoss => "r",
            Family::Sat => "sat",
            Family::True => "t",
            Family::False => "f",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    /// `e_a` (or `e*_a`) for argument index `arg`.
    Arg { arg: usize, starred: bool },
    /// `x_c^b` for a family `x`.
    Node { family: Family, color: Color, node: usize, starred: bool },
    /// A plain input variable (from a DIMACS file).
    Input(usize),
    /// The selector used to merge two DNF matrices.
    Selector,
}

impl VarKey {
    pub fn node(family: Family, color: Color, node: usize) -> Self {
        VarKey::Node { family, color, node, starred: false }
    }

    pub fn is_starred(&self) -> bool {
        matches!(self, VarKey::Arg { starred: true, .. } | VarKey::Node { starred: true, .. })
    }

    /// The same key with the star flag set.
    pub fn starred(self) -> Self {
        match self {
            VarKey::Arg { arg, .. } => VarKey::Arg { arg, starred: true },
            VarKey::Node { family, color, node, .. } => VarKey::Node { family, color, node, starred: true },
            other => other,
        }
    }
}

/// Dense variable numbering (ids start at 1) keyed by [`VarKey`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarTable {
    keys: Vec<VarKey>,
    ids: HashMap<VarKey, u32>,
    arg_names: Vec<String>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// A table that renders `Arg` keys with the given argument names.
    pub fn with_arg_names(names: Vec<String>) -> Self {
        VarTable { arg_names: names, ..Self::default() }
    }

    /// Id of `key`, registering it on first use.
    pub fn id(&mut self, key: VarKey) -> u32 {
        if let Some(&i) = self.ids.get(&key) {
            return i;
        }
        self.keys.push(key);
        let i = self.keys.len() as u32;
        self.ids.insert(key, i);
        i
    }

    pub fn get(&self, key: &VarKey) -> Option<u32> {
        self.ids.get(key).copied()
    }

    pub fn key(&self, id: u32) -> VarKey {
        self.keys[id as usize - 1]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> {
        1..=self.keys.len() as u32
    }

    pub fn arg_names(&self) -> &[String] {
        &self.arg_names
    }

    /// Human-readable name, e.g. `e(z)`, `e*(z)`, `d1^9`, `dge2^5`.
    pub fn name(&self, id: u32) -> String {
        match self.key(id) {
            VarKey::Arg { arg, starred } => {
                let star = if starred { "*" } else { "" };
                match self.arg_names.get(arg) {
                    Some(n) => format!("e{star}({n})"),
                    None => format!("e{star}(#{arg})"),
                }
            }
            VarKey::Node { family, color, node, starred } => {
                let star = if starred { "*" } else { "" };
                format!("{}{star}{color}^{node}", family.symbol())
            }
            VarKey::Input(i) => format!("x{i}"),
            VarKey::Selector => "sel".to_string(),
        }
    }
}

/// A DIMACS-style literal: `+v` or `-v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(pub i32);

impl Lit {
    pub fn pos(v: u32) -> Lit {
        Lit(v as i32)
    }

    pub fn neg(v: u32) -> Lit {
        Lit(-(v as i32))
    }

    pub fn new(v: u32, positive: bool) -> Lit {
        if positive {
            Lit::pos(v)
        } else {
            Lit::neg(v)
        }
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_pos(self) -> bool {
        self.0 > 0
    }

    pub fn negate(self) -> Lit {
        Lit(-self.0)
    }

    /// Truth value under an assignment indexed by variable id.
    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var() as usize] == self.is_pos()
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        self.negate()
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A clause (or, in a DNF, a cube): literals sorted by variable, no repeats.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause(Vec<Lit>);

impl Clause {
    /// Normalize; `None` when the literals contain a complementary pair.
    pub fn new(mut lits: Vec<Lit>) -> Option<Clause> {
        lits.sort_by_key(|l| (l.var(), l.0));
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return None;
        }
        Some(Clause(lits))
    }

    pub fn unit(l: Lit) -> Clause {
        Clause(vec![l])
    }

    pub fn empty() -> Clause {
        Clause(Vec::new())
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The complementary cube (or clause): every literal negated.
    pub fn negated(&self) -> Clause {
        Clause(self.0.iter().map(|l| l.negate()).collect())
    }

    /// Disjunctive reading.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.0.iter().any(|l| l.eval(assignment))
    }

    /// Conjunctive (cube) reading.
    pub fn cube_holds(&self, assignment: &[bool]) -> bool {
        self.0.iter().all(|l| l.eval(assignment))
    }

    /// Render with variable names, e.g. `(-e1^5 e1^8)`.
    pub fn render(&self, vars: &VarTable) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| format!("{}{}", if l.is_pos() { "" } else { "-" }, vars.name(l.var())))
            .collect();
        format!("({})", parts.join(" "))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    pub vars: VarTable,
    pub clauses: Vec<Clause>,
}

impl Cnf {
    pub fn new(vars: VarTable, clauses: Vec<Clause>) -> Self {
        Cnf { vars, clauses }
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.satisfied_by(assignment))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dnf {
    pub vars: VarTable,
    pub cubes: Vec<Clause>,
}

impl Dnf {
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.cubes.iter().any(|c| c.cube_holds(assignment))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quant {
    Forall,
    Exists,
}

/// `free X. Q Y. (cnf ∧ dnf)`; an empty `cnf` is ⊤, an empty `dnf` is ⊤ too
/// (the DNF part is absent), use `dnf_present` to tell the two apart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qbf2 {
    pub vars: VarTable,
    pub free: Vec<u32>,
    pub quant: Quant,
    pub inner: Vec<u32>,
    pub cnf: Vec<Clause>,
    pub dnf: Vec<Clause>,
    pub dnf_present: bool,
}

/// Definition bodies: nested conjunctions and disjunctions of literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    Lit(Lit),
    And(Vec<Gate>),
    Or(Vec<Gate>),
}

impl Gate {
    pub fn or_lits<I: IntoIterator<Item = Lit>>(lits: I) -> Gate {
        Gate::Or(lits.into_iter().map(Gate::Lit).collect())
    }

    pub fn and_lits<I: IntoIterator<Item = Lit>>(lits: I) -> Gate {
        Gate::And(lits.into_iter().map(Gate::Lit).collect())
    }

    /// CNF of the gate (or of its negation) as raw literal lists.
    fn cnf(&self, negate: bool) -> Vec<Vec<Lit>> {
        match (self, negate) {
            (Gate::Lit(l), false) => vec![vec![*l]],
            (Gate::Lit(l), true) => vec![vec![l.negate()]],
            (Gate::And(xs), false) | (Gate::Or(xs), true) => {
                xs.iter().flat_map(|x| x.cnf(negate)).collect()
            }
            (Gate::Or(xs), false) | (Gate::And(xs), true) => {
                let mut acc: Vec<Vec<Lit>> = vec![Vec::new()];
                for x in xs {
                    let part = x.cnf(negate);
                    let mut next = Vec::with_capacity(acc.len() * part.len());
                    for a in &acc {
                        for p in &part {
                            let mut c = a.clone();
                            c.extend_from_slice(p);
                            next.push(c);
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }
}

/// Clauses of `head ↔ body` without auxiliary variables: first `head → body`
/// (one clause per CNF clause of `body`), then `body → head`.
///
/// `e ↔ (p ∨ q)` gives `(¬e∨p∨q), (¬p∨e), (¬q∨e)`; an empty disjunction
/// forces the head false, an empty conjunction forces it true.
pub fn clausify_one(head: Lit, body: &Gate) -> Vec<Clause> {
    let mut out = Vec::new();
    for mut k in body.cnf(false) {
        k.insert(0, head.negate());
        out.extend(Clause::new(k));
    }
    for mut k in body.cnf(true) {
        k.push(head);
        out.extend(Clause::new(k));
    }
    out
}

/// Clausify a list of definitions in order.
pub fn clausify(defs: &[(Lit, Gate)]) -> Vec<Clause> {
    defs.iter().flat_map(|(h, b)| clausify_one(*h, b)).collect()
}

/// Directed incidence graph: vertices `v<id>` for variables then `c<idx>`
/// for clauses; a positive occurrence gives clause→variable, a negative one
/// variable→clause.
pub fn incidence_digraph(num_vars: usize, clauses: &[Clause]) -> LabeledGraph {
    let mut names: Vec<String> = (1..=num_vars).map(|v| format!("v{v}")).collect();
    let mut edges = std::collections::BTreeSet::new();
    for (i, c) in clauses.iter().enumerate() {
        let cv = names.len();
        names.push(format!("c{i}"));
        for l in c.lits() {
            let v = l.var() as usize - 1;
            edges.insert(if l.is_pos() { (cv, v) } else { (v, cv) });
        }
    }
    LabeledGraph { names, edges }
}
