//! Witness expressions: explicit k'-expressions for the directed incidence
//! graph of an emitted formula, built by replaying the guiding expression
//! and inserting every clause at the node that produced it.
//!
//! Labels are allocated on demand from:
//! - `L1(key)`: variables of the current node, one label per (family, star, color);
//! - `L2(key)`: the same variables once the parent has taken over;
//! - `Alt(key)`: pending clauses of the opposite sign;
//! - `CM`: the clause being wired;
//! - `DEAD`: finished vertices;
//! - `TMP` / `LEAFn`: vertices still being introduced.
//!
//! Clauses hanging under a union node that mention one parent variable and
//! variables of a single child are made inside that child's branch
//! ("pending") and only connected once the parent variable exists.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::af::SemanticsId;
use crate::encoder::{DnfConversion, Encoding};
use crate::formula::{incidence_digraph, Clause, Family, VarKey};
use crate::kexpr::{evaluate, Color, KExpr, KExprBuilder, KExprError, KNode};

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("clause {clause} at node {home} mentions `{var}`, which lives neither there nor at a child")]
    Drift { clause: usize, home: usize, var: String },
    #[error("clause {clause} at node {home} touches only part of the `{var}` class")]
    SplitClass { clause: usize, home: usize, var: String },
    #[error("formula has no variables or clauses")]
    Empty,
    #[error(transparent)]
    Expr(#[from] KExprError),
}

/// Colour budget of the witness for a semantics' matrix, in terms of the
/// width `k` of the guiding expression.
pub fn budget(sigma: SemanticsId, k: u32) -> u32 {
    match sigma {
        SemanticsId::ConflictFree | SemanticsId::Stable | SemanticsId::Admissible => 11 * k + 2,
        SemanticsId::Complete => 2 * (11 * k + 2),
        SemanticsId::Preferred => 27 * k + 4,
        SemanticsId::SemiStable | SemanticsId::Stage => 32 * k + 4,
    }
}

/// Budget for a converted DNF matrix; this is a drift check, not a proven constant.
pub fn dnf_budget(k_in: u32) -> u32 {
    6 * k_in + 4
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub expression: KExpr,
    pub colors_used: u32,
    pub budget: Option<u32>,
}

type Key = (Family, bool, Color);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Label {
    L1(Key),
    L2(Key),
    Alt(Key),
    Cm,
    Dead,
    Tmp,
    Leaf(usize),
}

/// Where a variable vertex is introduced.
#[derive(Debug, Clone, Copy)]
pub enum Home {
    /// A per-node variable, introduced when its node is processed.
    Node(usize, Key),
    /// An input variable created at a leaf, in the given slot.
    Leaf(usize, usize),
}

/// Everything the construction needs; vertices are `v<id>` and `c<idx>`.
pub struct Problem<'a> {
    pub guide: &'a KExpr,
    pub num_vars: usize,
    pub clauses: &'a [Clause],
    pub homes: &'a [usize],
    pub var_home: &'a dyn Fn(u32) -> Option<Home>,
    pub var_name: &'a dyn Fn(u32) -> String,
}

struct Build {
    b: KExprBuilder,
    labels: HashMap<Label, Color>,
}

impl Build {
    fn lab(&mut self, l: Label) -> Color {
        let next = self.labels.len() as Color + 1;
        *self.labels.entry(l).or_insert(next)
    }

    fn join(&mut self, parts: Vec<Option<usize>>) -> Option<usize> {
        let parts: Vec<usize> = parts.into_iter().flatten().collect();
        if parts.is_empty() {
            None
        } else {
            Some(self.b.union(parts))
        }
    }

    fn add_vertex(&mut self, cur: Option<usize>, l: Label, name: String) -> usize {
        let c = self.lab(l);
        let v = self.b.leaf(c, name);
        self.join(vec![cur, Some(v)]).unwrap()
    }

    fn relabel(&mut self, cur: Option<usize>, from: Label, to: Label) -> Option<usize> {
        let cur = cur?;
        if !self.labels.contains_key(&from) {
            return Some(cur);
        }
        let (f, t) = (self.lab(from), self.lab(to));
        Some(self.b.relabel(f, t, cur))
    }

    fn edge(&mut self, cur: usize, src: Label, dst: Label) -> usize {
        let (s, d) = (self.lab(src), self.lab(dst));
        self.b.edge(s, d, cur)
    }

    /// Introduce clause `idx` and wire it through `wires` (sign of the
    /// occurrence, label holding the variable class); the clause vertex
    /// ends in `to`.
    fn clause(&mut self, cur: Option<usize>, idx: usize, wires: &[(bool, Label)], to: Label) -> usize {
        let mut cur = self.add_vertex(cur, Label::Cm, format!("c{idx}"));
        for &(pos, lab) in wires {
            cur = if pos { self.edge(cur, Label::Cm, lab) } else { self.edge(cur, lab, Label::Cm) };
        }
        self.relabel(Some(cur), Label::Cm, to).unwrap()
    }
}

/// Build the witness expression for `p`.
pub fn construct(p: &Problem) -> Result<KExpr, WitnessError> {
    let x = p.guide;
    let n = x.len();
    let mut node_vars: Vec<Vec<(Key, u32)>> = vec![Vec::new(); n];
    let mut leaf_vars: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n];
    let mut homeless = Vec::new();
    let homes: Vec<Option<Home>> = std::iter::once(None).chain((1..=p.num_vars as u32).map(p.var_home)).collect();
    for v in 1..=p.num_vars as u32 {
        match homes[v as usize] {
            Some(Home::Node(b, k)) => node_vars[b].push((k, v)),
            Some(Home::Leaf(b, s)) => leaf_vars[b].push((s, v)),
            None => homeless.push(v),
        }
    }
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &h) in p.homes.iter().enumerate() {
        at[h].push(i);
    }
    let node_of = |v: u32| match homes[v as usize] {
        Some(Home::Node(b, _)) | Some(Home::Leaf(b, _)) => Some(b),
        None => None,
    };
    let key_of = |v: u32| match homes[v as usize] {
        Some(Home::Node(_, k)) => Some(k),
        _ => None,
    };
    let drift = |i: usize, b: usize, v: u32| WitnessError::Drift { clause: i, home: b, var: (p.var_name)(v) };

    let mut bd = Build { b: KExprBuilder::new(), labels: HashMap::new() };
    let mut frag: Vec<Option<usize>> = vec![None; n];
    for b in x.bottom_up() {
        let children = x.node(b).children().to_vec();
        let own_label = |v: u32| -> Option<Label> {
            match homes[v as usize] {
                Some(Home::Node(h, k)) if h == b => Some(Label::L1(k)),
                Some(Home::Leaf(h, s)) if h == b => Some(Label::Leaf(s)),
                Some(Home::Node(h, k)) if children.contains(&h) => Some(Label::L2(k)),
                _ => None,
            }
        };
        // One wire per distinct label: a child class is wired in one step.
        let labels_for = |i: usize| -> Result<Vec<(bool, Label)>, WitnessError> {
            let mut wires: Vec<(bool, Label)> = Vec::new();
            for l in p.clauses[i].lits() {
                let lab = own_label(l.var()).ok_or_else(|| drift(i, b, l.var()))?;
                if !wires.iter().any(|&(_, w)| w == lab) {
                    wires.push((l.is_pos(), lab));
                }
            }
            Ok(wires)
        };
        let mut cur;
        if children.is_empty() {
            let mut parts = Vec::new();
            for &(s, v) in &leaf_vars[b] {
                parts.push(Some(bd.add_vertex(None, Label::Leaf(s), format!("v{v}"))));
            }
            for &(k, v) in &node_vars[b] {
                parts.push(Some(bd.add_vertex(None, Label::L1(k), format!("v{v}"))));
            }
            cur = bd.join(parts);
            for &i in &at[b] {
                let labs = labels_for(i)?;
                cur = Some(bd.clause(cur, i, &labs, Label::Dead));
            }
            for &(s, _) in &leaf_vars[b] {
                cur = bd.relabel(cur, Label::Leaf(s), Label::Dead);
            }
        } else if children.len() == 1 {
            let child = children[0];
            cur = frag[child];
            for &(k, _) in &node_vars[child] {
                cur = bd.relabel(cur, Label::L1(k), Label::L2(k));
            }
            for &(k, v) in &node_vars[b] {
                cur = Some(bd.add_vertex(cur, Label::L1(k), format!("v{v}")));
            }
            for &i in &at[b] {
                let labs = labels_for(i)?;
                cur = Some(bd.clause(cur, i, &labs, Label::Dead));
            }
            for &(k, _) in &node_vars[child] {
                cur = bd.relabel(cur, Label::L2(k), Label::Dead);
            }
        } else {
            // Does every child literal of clause `i` take its whole class, with one sign?
            let covers_classes = |i: usize| {
                let cl = &p.clauses[i];
                cl.lits().iter().all(|l| match own_label(l.var()) {
                    Some(Label::L2(k)) => children
                        .iter()
                        .flat_map(|&c| node_vars[c].iter().filter(|(kk, _)| *kk == k).map(|&(_, v)| v))
                        .all(|v| cl.lits().iter().any(|m| m.var() == v && m.is_pos() == l.is_pos())),
                    _ => true,
                })
            };
            // Sort the clauses into per-child work (local or pending) and the rest.
            let mut local: Vec<Vec<usize>> = vec![Vec::new(); children.len()];
            let mut pending: Vec<Vec<(usize, Key, bool)>> = vec![Vec::new(); children.len()];
            let mut post = Vec::new();
            for &i in &at[b] {
                let mut parent_lits = Vec::new();
                let mut sides = BTreeSet::new();
                for l in p.clauses[i].lits() {
                    match node_of(l.var()) {
                        Some(h) if h == b => parent_lits.push(*l),
                        Some(h) => match children.iter().position(|&c| c == h) {
                            Some(j) => {
                                sides.insert(j);
                            }
                            None => return Err(drift(i, b, l.var())),
                        },
                        None => return Err(drift(i, b, l.var())),
                    }
                }
                match (parent_lits.len(), sides.len()) {
                    (0, 1) => local[*sides.iter().next().unwrap()].push(i),
                    (1, 1) if !covers_classes(i) => {
                        let l = parent_lits[0];
                        let k = key_of(l.var()).ok_or_else(|| drift(i, b, l.var()))?;
                        pending[*sides.iter().next().unwrap()].push((i, k, l.is_pos()));
                    }
                    _ => post.push(i),
                }
            }
            // Keys whose pending clauses come in both signs need a second label.
            let mut signs: HashMap<Key, (bool, bool)> = HashMap::new();
            for &(_, k, pos) in pending.iter().flatten() {
                let e = signs.entry(k).or_default();
                if pos {
                    e.0 = true;
                } else {
                    e.1 = true;
                }
            }
            let slot = |k: Key, pos: bool| {
                let (p_, n_) = signs[&k];
                if p_ && n_ && !pos {
                    Label::Alt(k)
                } else {
                    Label::L1(k)
                }
            };
            let mut branches = Vec::new();
            for (j, &child) in children.iter().enumerate() {
                let mut c = frag[child];
                for &(k, _) in &node_vars[child] {
                    c = bd.relabel(c, Label::L1(k), Label::L2(k));
                }
                for &i in &local[j] {
                    let labs = labels_for(i)?;
                    c = Some(bd.clause(c, i, &labs, Label::Dead));
                }
                for &(i, k, pos) in &pending[j] {
                    let cl = &p.clauses[i];
                    let mut cm = bd.add_vertex(c, Label::Cm, format!("c{i}"));
                    for l in cl.lits() {
                        if key_of(l.var()) == Some(k) && node_of(l.var()) == Some(b) {
                            continue;
                        }
                        let lab = own_label(l.var()).ok_or_else(|| drift(i, b, l.var()))?;
                        cm = if l.is_pos() { bd.edge(cm, Label::Cm, lab) } else { bd.edge(cm, lab, Label::Cm) };
                    }
                    c = bd.relabel(Some(cm), Label::Cm, slot(k, pos));
                }
                branches.push(c);
            }
            cur = bd.join(branches);
            for &(k, v) in &node_vars[b] {
                match signs.get(&k) {
                    None => cur = Some(bd.add_vertex(cur, Label::L1(k), format!("v{v}"))),
                    Some(&(pos, neg)) => {
                        let mut c = bd.add_vertex(cur, Label::Tmp, format!("v{v}"));
                        if pos {
                            c = bd.edge(c, Label::L1(k), Label::Tmp);
                        }
                        if neg {
                            let dst = if pos { Label::Alt(k) } else { Label::L1(k) };
                            c = bd.edge(c, Label::Tmp, dst);
                        }
                        let mut c = bd.relabel(Some(c), Label::L1(k), Label::Dead);
                        if pos && neg {
                            c = bd.relabel(c, Label::Alt(k), Label::Dead);
                        }
                        cur = bd.relabel(c, Label::Tmp, Label::L1(k));
                    }
                }
            }
            for &i in &post {
                let cl = &p.clauses[i];
                let labs = labels_for(i)?;
                if !covers_classes(i) {
                    let l = cl.lits().iter().find(|l| matches!(own_label(l.var()), Some(Label::L2(_)))).unwrap();
                    return Err(WitnessError::SplitClass { clause: i, home: b, var: (p.var_name)(l.var()) });
                }
                cur = Some(bd.clause(cur, i, &labs, Label::Dead));
            }
            let mut keys: Vec<Key> = children.iter().flat_map(|&c| node_vars[c].iter().map(|&(k, _)| k)).collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                cur = bd.relabel(cur, Label::L2(k), Label::Dead);
            }
        }
        frag[b] = cur;
    }
    let mut top = frag[0];
    for v in homeless {
        top = Some(bd.add_vertex(top, Label::Dead, format!("v{v}")));
    }
    let top = top.ok_or(WitnessError::Empty)?;
    Ok(bd.b.finish(top)?)
}

fn leaf_home(enc: &Encoding) -> impl Fn(u32) -> Option<Home> + '_ {
    move |v| match enc.vars.key(v) {
        VarKey::Node { family, color, node, starred } => Some(Home::Node(node, (family, starred, color))),
        VarKey::Arg { arg, starred } => Some(Home::Leaf(enc.leaf_of_arg[arg], usize::from(starred))),
        _ => None,
    }
}

/// Witness for the full matrix of `enc` (CNF part plus inner CNF), guided by
/// the expression it was encoded from.
pub fn build_witness(enc: &Encoding, x: &KExpr) -> Result<Witness, WitnessError> {
    let (clauses, prov) = enc.matrix_clauses();
    let homes: Vec<usize> = prov.iter().map(|p| p.node).collect();
    let home = leaf_home(enc);
    let name = |v: u32| enc.vars.name(v);
    let expression = construct(&Problem {
        guide: x,
        num_vars: enc.vars.len(),
        clauses: &clauses,
        homes: &homes,
        var_home: &home,
        var_name: &name,
    })?;
    let colors_used = expression.width();
    Ok(Witness { expression, colors_used, budget: Some(budget(enc.semantics, x.width())) })
}

/// Witness for the CNF part of `enc` alone.
pub fn build_outer_witness(enc: &Encoding, x: &KExpr) -> Result<Witness, WitnessError> {
    let homes: Vec<usize> = enc.provenance.iter().map(|p| p.node).collect();
    let home = leaf_home(enc);
    let name = |v: u32| enc.vars.name(v);
    let expression = construct(&Problem {
        guide: x,
        num_vars: enc.vars.len(),
        clauses: &enc.clauses,
        homes: &homes,
        var_home: &home,
        var_name: &name,
    })?;
    let colors_used = expression.width();
    Ok(Witness { expression, colors_used, budget: None })
}

/// Witness for a converted DNF, guided by the CNF's witness `x_cnf`.
pub fn build_dnf_witness(conv: &DnfConversion, x_cnf: &KExpr) -> Result<Witness, WitnessError> {
    let mut input_leaf = HashMap::new();
    for leaf in x_cnf.leaves() {
        if let KNode::Initial { name, .. } = x_cnf.node(leaf) {
            if let Some(v) = name.strip_prefix('v').and_then(|s| s.parse::<u32>().ok()) {
                input_leaf.insert(v, leaf);
            }
        }
    }
    let home = |v: u32| match conv.vars.key(v) {
        VarKey::Node { family, color, node, starred } => Some(Home::Node(node, (family, starred, color))),
        _ => input_leaf.get(&v).map(|&b| Home::Leaf(b, 0)),
    };
    let name = |v: u32| conv.vars.name(v);
    let expression = construct(&Problem {
        guide: x_cnf,
        num_vars: conv.vars.len(),
        clauses: &conv.cubes,
        homes: &conv.homes,
        var_home: &home,
        var_name: &name,
    })?;
    let colors_used = expression.width();
    Ok(Witness { expression, colors_used, budget: Some(dnf_budget(x_cnf.width())) })
}

/// Outcome of the four witness checks.
#[derive(Debug, Clone, Default)]
pub struct WitnessReport {
    /// Vertex sets differ: (only in the formula, only in the witness).
    pub vertex_mismatch: (Vec<String>, Vec<String>),
    /// (I) incidence edges the witness does not build.
    pub missing: Vec<(String, String)>,
    /// (II) built edges with no incidence in either direction.
    pub extraneous: Vec<(String, String)>,
    /// (III) built edges whose reverse is the incidence edge.
    pub reversed: Vec<(String, String)>,
    pub colors_used: u32,
    pub budget: Option<u32>,
}

impl WitnessReport {
    pub fn within_budget(&self) -> bool {
        self.budget.is_none_or(|b| self.colors_used <= b)
    }

    pub fn ok(&self) -> bool {
        self.vertex_mismatch.0.is_empty()
            && self.vertex_mismatch.1.is_empty()
            && self.missing.is_empty()
            && self.extraneous.is_empty()
            && self.reversed.is_empty()
            && self.within_budget()
    }

    /// Clause vertices with a missing incidence edge.
    pub fn missing_clauses(&self) -> BTreeSet<String> {
        self.missing
            .iter()
            .map(|(a, b)| if a.starts_with('c') { a.clone() } else { b.clone() })
            .collect()
    }
}

impl fmt::Display for WitnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let budget = self.budget.map_or("-".to_string(), |b| b.to_string());
        if self.ok() {
            return write!(f, "colors_used={} budget={budget} ok", self.colors_used);
        }
        write!(f, "colors_used={} budget={budget} FAILED", self.colors_used)?;
        let (a, b) = &self.vertex_mismatch;
        if !a.is_empty() || !b.is_empty() {
            write!(f, "; vertices missing {a:?} unexpected {b:?}")?;
        }
        let show = |v: &Vec<(String, String)>| {
            v.iter().take(5).map(|(x, y)| format!("{x}->{y}")).collect::<Vec<_>>().join(", ")
        };
        if !self.missing.is_empty() {
            write!(f, "; (I) missing {} edges: {}", self.missing.len(), show(&self.missing))?;
        }
        if !self.extraneous.is_empty() {
            write!(f, "; (II) extraneous {} edges: {}", self.extraneous.len(), show(&self.extraneous))?;
        }
        if !self.reversed.is_empty() {
            write!(f, "; (III) reversed {} edges: {}", self.reversed.len(), show(&self.reversed))?;
        }
        if !self.within_budget() {
            write!(f, "; over budget")?;
        }
        Ok(())
    }
}

/// Compare the graph built by `w` with the incidence graph of `clauses`.
pub fn verify(w: &Witness, num_vars: usize, clauses: &[Clause]) -> WitnessReport {
    let want_g = incidence_digraph(num_vars, clauses);
    let got_g = evaluate(&w.expression);
    let want_v: BTreeSet<&String> = want_g.names.iter().collect();
    let got_v: BTreeSet<&String> = got_g.names.iter().collect();
    let want = want_g.named_edges();
    let got = got_g.named_edges();
    let mut r = WitnessReport {
        vertex_mismatch: (
            want_v.difference(&got_v).map(|s| s.to_string()).collect(),
            got_v.difference(&want_v).map(|s| s.to_string()).collect(),
        ),
        missing: want.difference(&got).cloned().collect(),
        colors_used: w.colors_used,
        budget: w.budget,
        ..Default::default()
    };
    for (a, b) in got.difference(&want) {
        if want.contains(&(b.clone(), a.clone())) {
            r.reversed.push((a.clone(), b.clone()));
        } else {
            r.extraneous.push((a.clone(), b.clone()));
        }
    }
    r
}

/// Verify a witness of the full matrix of `enc`.
pub fn verify_witness(enc: &Encoding, w: &Witness) -> WitnessReport {
    let (clauses, _) = enc.matrix_clauses();
    verify(w, enc.vars.len(), &clauses)
}

/// Witness file text: a `# k'=<c> budget=<b>` header and the expression.
pub fn render_witness(w: &Witness) -> String {
    let budget = w.budget.map_or("-".to_string(), |b| b.to_string());
    format!("# k'={} budget={budget}\n{}\n", w.colors_used, w.expression)
}
