//! Decomposition-guided encodings: one pass over the annotated k-expression
//! per variable family, each node contributing definitions for its live
//! colors.
//!
//! Rule tags: 1–4 extension, 5–9 defeat, 10–15 attack, 16–20/24 out,
//! 21–23 backward defeat, 25 and 26–31 preferred, 32 and 33–37 semi-stable /
//! stage, 38–41 range loss (see [`Variant`]). Tag 0 marks acceptance units.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::af::{Af, Extension, Mode, SemanticsId};
use crate::formula::{clausify_one, Clause, Cnf, Family, Gate, Lit, Qbf2, Quant, VarKey, VarTable};
use crate::kexpr::{annotate, validate, Color, ColorState, Diagnostics, KExpr, KNode};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("expression does not build the framework: {0}")]
    Validation(Diagnostics),
    #[error("argument `{0}` attacks itself; such frameworks have no k-expression with distinct edge colors")]
    SelfAttack(String),
    #[error("unknown argument `{0}`")]
    UnknownArgument(String),
    #[error("guiding expression does not fit the formula: {0}")]
    BadGuide(String),
}

/// Which reading of the rules to instantiate.
///
/// `Literal` is the plain per-color reading of every rule. `Corrected` (default)
/// fixes the cases where they depend on the order of edge introductions:
/// the attack rule for a source color also requires that the color is not
/// already fully defeated below, the defence rule for a target color also
/// accepts attackers defeated below, backward defeat through a relabeling
/// keeps the child's own edge, and semi-stable/stage range inclusion is
/// tracked per argument by a range-loss family instead of per color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Corrected,
    Literal,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EncodeOptions {
    pub variant: Variant,
}

/// Where a clause came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prov {
    pub node: usize,
    pub tag: u8,
    pub color: Color,
}

/// The universal part of a second-level encoding: `inner` is a CNF whose
/// negation is the DNF part of the matrix.
#[derive(Debug, Clone)]
pub struct InnerPart {
    pub universal: Vec<u32>,
    pub clauses: Vec<Clause>,
    pub provenance: Vec<Prov>,
}

#[derive(Debug, Clone)]
pub struct Encoding {
    pub semantics: SemanticsId,
    pub vars: VarTable,
    /// The CNF (first level) or the CNF part over the free block.
    pub clauses: Vec<Clause>,
    pub provenance: Vec<Prov>,
    pub inner: Option<InnerPart>,
    /// `e_a` per argument index.
    pub extension_vars: Vec<u32>,
    /// Set by a skeptical assertion: the answer is the negation of satisfiability.
    pub flip: bool,
    /// Width of the expression used.
    pub width: Color,
    /// Leaf node creating each argument.
    pub leaf_of_arg: Vec<usize>,
}

impl Encoding {
    pub fn cnf(&self) -> Cnf {
        Cnf::new(self.vars.clone(), self.clauses.clone())
    }

    pub fn is_second_level(&self) -> bool {
        self.inner.is_some()
    }

    /// Free variables: everything occurring in the CNF part.
    pub fn free_vars(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.clauses.iter().flat_map(|c| c.lits().iter().map(|l| l.var())).collect();
        set.into_iter().collect()
    }

    /// The prenex form `free X. ∀Y. (cnf ∧ ¬inner)`.
    pub fn qbf(&self) -> Option<Qbf2> {
        let inner = self.inner.as_ref()?;
        Some(Qbf2 {
            vars: self.vars.clone(),
            free: self.free_vars(),
            quant: Quant::Forall,
            inner: inner.universal.clone(),
            cnf: self.clauses.clone(),
            dnf: inner.clauses.iter().map(Clause::negated).collect(),
            dnf_present: true,
        })
    }

    /// All clauses whose incidence graph is witnessed: the CNF part followed
    /// by the inner CNF (the complement of the DNF part), with provenance.
    pub fn matrix_clauses(&self) -> (Vec<Clause>, Vec<Prov>) {
        let mut cs = self.clauses.clone();
        let mut ps = self.provenance.clone();
        if let Some(inner) = &self.inner {
            cs.extend(inner.clauses.iter().cloned());
            ps.extend(inner.provenance.iter().copied());
        }
        (cs, ps)
    }

    /// Read the extension off a model indexed by variable id.
    pub fn extension_of(&self, model: &[bool]) -> Extension {
        Extension::from_indices(
            self.extension_vars
                .iter()
                .enumerate()
                .filter(|(_, &v)| model[v as usize])
                .map(|(i, _)| i),
        )
    }

    /// Sidecar map: `<clause-index> <node-id> eq<tag>` per clause, CNF part
    /// first, then the inner part.
    pub fn provenance_map(&self) -> String {
        let (_, ps) = self.matrix_clauses();
        ps.iter()
            .enumerate()
            .map(|(i, p)| format!("{i} {} eq{}\n", p.node, p.tag))
            .collect()
    }
}

#[derive(Clone, Copy)]
enum Op {
    And,
    Or,
}

struct Ctx<'a> {
    x: &'a KExpr,
    st: ColorState,
    /// Per node: colors with a member that was the target of an edge below (or at) the node.
    targeted: Vec<BTreeSet<Color>>,
    vars: VarTable,
    variant: Variant,
    leaf_of_arg: Vec<usize>,
    arg_of_leaf: Vec<Option<usize>>,
}

#[derive(Default)]
struct Sink {
    out: Vec<(Prov, Clause)>,
}

impl Sink {
    fn def(&mut self, node: usize, tag: u8, color: Color, head: Lit, body: Gate) {
        for c in clausify_one(head, &body) {
            self.out.push((Prov { node, tag, color }, c));
        }
    }

    fn clause(&mut self, node: usize, tag: u8, color: Color, lits: Vec<Lit>) {
        if let Some(c) = Clause::new(lits) {
            self.out.push((Prov { node, tag, color }, c));
        }
    }

    fn finish(mut self) -> (Vec<Clause>, Vec<Prov>) {
        self.out.sort_by_key(|(p, _)| (p.node, p.tag, p.color));
        self.out.into_iter().map(|(p, c)| (c, p)).unzip()
    }
}

impl Ctx<'_> {
    fn v(&mut self, family: Family, color: Color, node: usize, starred: bool) -> Lit {
        Lit::pos(self.vars.id(VarKey::Node { family, color, node, starred }))
    }

    fn arg(&mut self, arg: usize, starred: bool) -> Lit {
        Lit::pos(self.vars.id(VarKey::Arg { arg, starred }))
    }

    fn cols(&self, b: usize) -> Vec<Color> {
        self.st.cols(b).to_vec()
    }

    fn live(&self, b: usize, c: Color) -> bool {
        self.st.has(b, c)
    }

    /// The introduced pair at an edge node when both colors are live.
    fn live_edge(&self, b: usize) -> Option<(Color, Color)> {
        match *self.x.node(b) {
            KNode::EdgeIntro { src, dst, child } if self.live(child, src) && self.live(child, dst) => Some((src, dst)),
            _ => None,
        }
    }

    /// Child colors feeding color `c` of the relabel node `b`.
    fn relabel_sources(&self, b: usize, c: Color) -> Vec<Color> {
        let KNode::Relabel { from, to, child } = *self.x.node(b) else { unreachable!() };
        let mut srcs = Vec::new();
        if c == to && from != to && self.live(child, from) {
            srcs.push(from);
        }
        if self.live(child, c) {
            srcs.push(c);
        }
        srcs
    }

    /// Standard union/relabel propagation for `family` with the given operator.
    fn propagate(&mut self, sink: &mut Sink, b: usize, family: Family, star: bool, op: Op, tags: (u8, u8)) {
        let mk = |v: Vec<Lit>| match op {
            Op::And => Gate::and_lits(v),
            Op::Or => Gate::or_lits(v),
        };
        match self.x.node(b).clone() {
            KNode::Union(ch) => {
                for c in self.cols(b) {
                    let live: Vec<usize> = ch.iter().copied().filter(|&k| self.live(k, c)).collect();
                    let terms: Vec<Lit> = live.into_iter().map(|k| self.v(family, c, k, star)).collect();
                    let head = self.v(family, c, b, star);
                    sink.def(b, tags.0, c, head, mk(terms));
                }
            }
            KNode::Relabel { child, .. } => {
                for c in self.cols(b) {
                    let terms: Vec<Lit> = self
                        .relabel_sources(b, c)
                        .into_iter()
                        .map(|s| self.v(family, s, child, star))
                        .collect();
                    let head = self.v(family, c, b, star);
                    sink.def(b, tags.1, c, head, mk(terms));
                }
            }
            _ => unreachable!(),
        }
    }
}

fn child_of(x: &KExpr, b: usize) -> usize {
    x.node(b).children()[0]
}

fn retag(tag: u8, over: Option<u8>) -> u8 {
    over.unwrap_or(tag)
}

/// Eqs. (1)–(4).
fn ext_layer(cx: &mut Ctx, sink: &mut Sink, star: bool, over: Option<u8>) {
    for b in 0..cx.x.len() {
        match cx.x.node(b) {
            KNode::Initial { color, .. } => {
                let c = *color;
                let a = cx.arg_of_leaf[b].expect("leaf argument");
                let head = cx.v(Family::Ext, c, b, star);
                let ea = cx.arg(a, star);
                sink.def(b, retag(1, over), c, head, Gate::Lit(ea));
            }
            KNode::Union(_) | KNode::Relabel { .. } => {
                cx.propagate(sink, b, Family::Ext, star, Op::Or, (retag(2, over), retag(3, over)))
            }
            KNode::EdgeIntro { .. } => {
                let child = child_of(cx.x, b);
                for c in cx.cols(b) {
                    let head = cx.v(Family::Ext, c, b, star);
                    let prev = cx.v(Family::Ext, c, child, star);
                    sink.def(b, retag(4, over), c, head, Gate::Lit(prev));
                }
                if let Some((s, t)) = cx.live_edge(b) {
                    let es = cx.v(Family::Ext, s, b, star);
                    let et = cx.v(Family::Ext, t, b, star);
                    sink.clause(b, retag(4, over), t, vec![!et, !es]);
                }
            }
        }
    }
}

/// Eqs. (5)–(8), plus the root units (9) when `root_units`.
fn defeat_layer(cx: &mut Ctx, sink: &mut Sink, star: bool, over: Option<u8>, root_units: bool) {
    for b in 0..cx.x.len() {
        match cx.x.node(b) {
            KNode::Initial { color, .. } => {
                let c = *color;
                let head = cx.v(Family::Defeat, c, b, star);
                let e = cx.v(Family::Ext, c, b, star);
                sink.def(b, retag(5, over), c, head, Gate::Lit(e));
            }
            KNode::Union(_) | KNode::Relabel { .. } => {
                cx.propagate(sink, b, Family::Defeat, star, Op::And, (retag(6, over), retag(7, over)))
            }
            KNode::EdgeIntro { .. } => {
                let child = child_of(cx.x, b);
                let pair = cx.live_edge(b);
                for c in cx.cols(b) {
                    let head = cx.v(Family::Defeat, c, b, star);
                    let mut terms = vec![cx.v(Family::Defeat, c, child, star)];
                    if let Some((s, t)) = pair {
                        if t == c {
                            terms.push(cx.v(Family::Ext, s, b, star));
                        }
                    }
                    sink.def(b, retag(8, over), c, head, Gate::or_lits(terms));
                }
            }
        }
    }
    if root_units {
        for c in cx.cols(0) {
            let d = cx.v(Family::Defeat, c, 0, star);
            sink.clause(0, retag(9, over), c, vec![d]);
        }
    }
}

/// Eqs. (10)–(15).
fn attack_layer(cx: &mut Ctx, sink: &mut Sink, star: bool, over: Option<u8>) {
    for b in 0..cx.x.len() {
        match cx.x.node(b) {
            KNode::Initial { color, .. } => {
                let c = *color;
                let head = cx.v(Family::Attack, c, b, star);
                sink.def(b, retag(10, over), c, head, Gate::Or(vec![]));
            }
            KNode::Union(_) | KNode::Relabel { .. } => {
                cx.propagate(sink, b, Family::Attack, star, Op::Or, (retag(11, over), retag(12, over)))
            }
            KNode::EdgeIntro { .. } => {
                let child = child_of(cx.x, b);
                let pair = cx.live_edge(b);
                for c in cx.cols(b) {
                    let head = cx.v(Family::Attack, c, b, star);
                    let prev = Gate::Lit(cx.v(Family::Attack, c, child, star));
                    match pair {
                        Some((s, t)) if c == t => {
                            let es = cx.v(Family::Ext, s, b, star);
                            sink.def(b, retag(14, over), c, head, Gate::And(vec![prev, Gate::Lit(!es)]));
                        }
                        Some((s, t)) if c == s => {
                            let et = Gate::Lit(cx.v(Family::Ext, t, b, star));
                            let fresh = if cx.variant == Variant::Corrected && cx.targeted[child].contains(&s) {
                                let ds = cx.v(Family::Defeat, s, child, star);
                                Gate::And(vec![et, Gate::Lit(!ds)])
                            } else {
                                et
                            };
                            sink.def(b, retag(13, over), c, head, Gate::Or(vec![prev, fresh]));
                        }
                        _ => sink.def(b, retag(13, over), c, head, Gate::Or(vec![prev])),
                    }
                }
            }
        }
    }
    for c in cx.cols(0) {
        let a = cx.v(Family::Attack, c, 0, star);
        sink.clause(0, retag(15, over), c, vec![!a]);
    }
}

/// Eqs. (16)–(20) and the out half of (24).
fn out_layer(cx: &mut Ctx, sink: &mut Sink) {
    for b in 0..cx.x.len() {
        match cx.x.node(b) {
            KNode::Initial { color, .. } => {
                let c = *color;
                let head = cx.v(Family::Out, c, b, false);
                let e = cx.v(Family::Ext, c, b, false);
                sink.def(b, 16, c, head, Gate::Lit(!e));
            }
            KNode::Union(_) | KNode::Relabel { .. } => cx.propagate(sink, b, Family::Out, false, Op::Or, (17, 18)),
            KNode::EdgeIntro { .. } => {
                let child = child_of(cx.x, b);
                let pair = cx.live_edge(b);
                for c in cx.cols(b) {
                    let head = cx.v(Family::Out, c, b, false);
                    let prev = Gate::Lit(cx.v(Family::Out, c, child, false));
                    match pair {
                        Some((s, t)) if c == t => {
                            // The (c ≠ c') guard holds by construction: edge colors are distinct.
                            let dge = Gate::Lit(cx.v(Family::DefeatGe, s, b, false));
                            let defended = if cx.variant == Variant::Corrected && cx.targeted[child].contains(&s) {
                                let ds = cx.v(Family::Defeat, s, child, false);
                                let es = cx.v(Family::Ext, s, child, false);
                                Gate::Or(vec![dge, Gate::and_lits([ds, !es])])
                            } else {
                                dge
                            };
                            sink.def(b, 20, c, head, Gate::And(vec![prev, defended]));
                        }
                        Some((s, t)) if c == s => {
                            let et = cx.v(Family::Ext, t, b, false);
                            sink.def(b, 19, c, head, Gate::And(vec![prev, Gate::Lit(!et)]));
                        }
                        _ => sink.def(b, 19, c, head, Gate::And(vec![prev])),
                    }
                }
            }
        }
    }
    for c in cx.cols(0) {
        let o = cx.v(Family::Out, c, 0, false);
        sink.clause(0, 24, c, vec![!o]);
    }
}

/// Eqs. (21)–(23): backward defeat, root to leaves. Clauses are homed at the
/// parent node, whose variables they relate to the child's.
fn dge_layer(cx: &mut Ctx, sink: &mut Sink) {
    let own_edge = |cx: &mut Ctx, b: usize, c: Color| -> Option<Lit> {
        match cx.live_edge(b) {
            Some((s, t)) if t == c => Some(cx.v(Family::Ext, s, b, false)),
            _ => None,
        }
    };
    for c in cx.cols(0) {
        let head = cx.v(Family::DefeatGe, c, 0, false);
        let terms: Vec<Lit> = own_edge(cx, 0, c).into_iter().collect();
        sink.def(0, 21, c, head, Gate::or_lits(terms));
    }
    for b in 0..cx.x.len() {
        let children = cx.x.node(b).children().to_vec();
        let relabel = match *cx.x.node(b) {
            KNode::Relabel { from, to, .. } => Some((from, to)),
            _ => None,
        };
        for child in children {
            for c in cx.cols(child) {
                let head = cx.v(Family::DefeatGe, c, child, false);
                let mut terms = Vec::new();
                let tag = match relabel {
                    None => {
                        terms.push(cx.v(Family::DefeatGe, c, b, false));
                        terms.extend(own_edge(cx, child, c));
                        22
                    }
                    Some((from, to)) => {
                        if c == from && from != to {
                            terms.push(cx.v(Family::DefeatGe, to, b, false));
                        }
                        if cx.live(b, c) {
                            terms.push(cx.v(Family::DefeatGe, c, b, false));
                        }
                        if cx.variant == Variant::Corrected {
                            terms.extend(own_edge(cx, child, c));
                        }
                        23
                    }
                };
                sink.def(b, tag, c, head, Gate::or_lits(terms));
            }
        }
    }
}

/// Eqs. (26)–(31).
fn pref_layer(cx: &mut Ctx, sink: &mut Sink) {
    for b in 0..cx.x.len() {
        match cx.x.node(b) {
            KNode::Initial { color, .. } => {
                let c = *color;
                let s = cx.v(Family::Subset, c, b, false);
                let es = cx.v(Family::Ext, c, b, true);
                let e = cx.v(Family::Ext, c, b, false);
                sink.def(b, 26, c, s, Gate::and_lits([es, !e]));
                sink.clause(b, 30, c, vec![!e, es]);
            }
            KNode::Union(_) | KNode::Relabel { .. } => cx.propagate(sink, b, Family::Subset, false, Op::Or, (27, 28)),
            KNode::EdgeIntro { .. } => {
                let child = child_of(cx.x, b);
                for c in cx.cols(b) {
                    let head = cx.v(Family::Subset, c, b, false);
                    let prev = cx.v(Family::Subset, c, child, false);
                    sink.def(b, 29, c, head, Gate::Lit(prev));
                }
            }
        }
    }
    let root: Vec<Lit> = cx.cols(0).into_iter().map(|c| cx.v(Family::Subset, c, 0, false)).collect();
    sink.clause(0, 31, 0, root);
}

/// `x ↔ y ∧ ¬z` at leaves, Or-propagation, `x ↔ (x' ∨ y) ∧ ¬z` at edges.
/// With `(y, z) = (d*, d)` this is Eqs. (33)–(36); with `(d, d*)` the
/// range-loss family (38)–(41).
fn range_diff_layer(cx: &mut Ctx, sink: &mut Sink, family: Family, gain_star: bool, tags: [u8; 4]) {
    for b in 0..cx.x.len() {
        let cols = cx.cols(b);
        match cx.x.node(b) {
            KNode::Initial { .. } => {
                for c in cols {
                    let head = cx.v(family, c, b, false);
                    let y = cx.v(Family::Defeat, c, b, gain_star);
                    let z = cx.v(Family::Defeat, c, b, !gain_star);
                    sink.def(b, tags[0], c, head, Gate::and_lits([y, !z]));
                }
            }
            KNode::Union(_) | KNode::Relabel { .. } => cx.propagate(sink, b, family, false, Op::Or, (tags[1], tags[2])),
            KNode::EdgeIntro { .. } => {
                let child = child_of(cx.x, b);
                for c in cols {
                    let head = cx.v(family, c, b, false);
                    let prev = cx.v(family, c, child, false);
                    let y = cx.v(Family::Defeat, c, b, gain_star);
                    let z = cx.v(Family::Defeat, c, b, !gain_star);
                    sink.def(b, tags[3], c, head, Gate::And(vec![Gate::or_lits([prev, y]), Gate::Lit(!z)]));
                }
            }
        }
    }
}

/// Root rule for range maximality (tag 37), or its corrected form (tags 38–41).
fn range_root(cx: &mut Ctx, sink: &mut Sink) {
    for c in cx.cols(0) {
        match cx.variant {
            Variant::Literal => {
                let d = cx.v(Family::Defeat, c, 0, false);
                let ds = cx.v(Family::Defeat, c, 0, true);
                sink.clause(0, 37, c, vec![!d, ds]);
            }
            Variant::Corrected => {
                let r = cx.v(Family::RangeLoss, c, 0, false);
                sink.clause(0, 37, c, vec![!r]);
            }
        }
    }
    let root: Vec<Lit> = cx.cols(0).into_iter().map(|c| cx.v(Family::Subset, c, 0, false)).collect();
    sink.clause(0, 37, 0, root);
}

fn targeted_colors(x: &KExpr, st: &ColorState) -> Vec<BTreeSet<Color>> {
    let mut t: Vec<BTreeSet<Color>> = vec![BTreeSet::new(); x.len()];
    for b in x.bottom_up() {
        t[b] = match x.node(b) {
            KNode::Initial { .. } => BTreeSet::new(),
            KNode::Union(ch) => ch.iter().flat_map(|&k| t[k].iter().copied()).collect(),
            KNode::Relabel { from, to, child } => t[*child]
                .iter()
                .map(|&c| if c == *from { *to } else { c })
                .collect(),
            KNode::EdgeIntro { src, dst, child } => {
                let mut s = t[*child].clone();
                if st.has(*child, *src) && st.has(*child, *dst) {
                    s.insert(*dst);
                }
                s
            }
        };
    }
    t
}

/// Encode with the default (corrected) rules.
pub fn encode(af: &Af, x: &KExpr, sigma: SemanticsId) -> Result<Encoding, EncodeError> {
    encode_with(af, x, sigma, EncodeOptions::default())
}

pub fn encode_conflict_free(af: &Af, x: &KExpr) -> Result<Encoding, EncodeError> {
    encode(af, x, SemanticsId::ConflictFree)
}

pub fn encode_stable(af: &Af, x: &KExpr) -> Result<Encoding, EncodeError> {
    encode(af, x, SemanticsId::Stable)
}

pub fn encode_admissible(af: &Af, x: &KExpr) -> Result<Encoding, EncodeError> {
    encode(af, x, SemanticsId::Admissible)
}

pub fn encode_complete(af: &Af, x: &KExpr) -> Result<Encoding, EncodeError> {
    encode(af, x, SemanticsId::Complete)
}

pub fn encode_preferred(af: &Af, x: &KExpr) -> Result<Encoding, EncodeError> {
    encode(af, x, SemanticsId::Preferred)
}

pub fn encode_semi_stable(af: &Af, x: &KExpr) -> Result<Encoding, EncodeError> {
    encode(af, x, SemanticsId::SemiStable)
}

pub fn encode_stage(af: &Af, x: &KExpr) -> Result<Encoding, EncodeError> {
    encode(af, x, SemanticsId::Stage)
}

pub fn encode_with(af: &Af, x: &KExpr, sigma: SemanticsId, opts: EncodeOptions) -> Result<Encoding, EncodeError> {
    if let Some((a, _)) = af.attacks().find(|&(a, b)| a == b) {
        return Err(EncodeError::SelfAttack(af.name(a).to_string()));
    }
    validate(x, af).map_err(EncodeError::Validation)?;
    let st = annotate(x);
    let targeted = targeted_colors(x, &st);
    let mut leaf_of_arg = vec![0; af.len()];
    let mut arg_of_leaf = vec![None; x.len()];
    for leaf in x.leaves() {
        if let KNode::Initial { name, .. } = x.node(leaf) {
            let a = af.index_of(name).expect("validated");
            leaf_of_arg[a] = leaf;
            arg_of_leaf[leaf] = Some(a);
        }
    }
    let mut vars = VarTable::with_arg_names(af.names().to_vec());
    let extension_vars: Vec<u32> = (0..af.len()).map(|a| vars.id(VarKey::Arg { arg: a, starred: false })).collect();
    if sigma.is_second_level() {
        for a in 0..af.len() {
            vars.id(VarKey::Arg { arg: a, starred: true });
        }
    }
    let mut cx = Ctx { x, st, targeted, vars, variant: opts.variant, leaf_of_arg, arg_of_leaf };
    let corrected = opts.variant == Variant::Corrected;
    let mut outer = Sink::default();
    let mut inner = Sink::default();

    // The defeat layer is part of the admissible encoding only in corrected form.
    let adm = |cx: &mut Ctx, sink: &mut Sink, star: bool, over: Option<u8>, with_defeat: bool| {
        ext_layer(cx, sink, star, over);
        if with_defeat {
            defeat_layer(cx, sink, star, over, false);
        }
        attack_layer(cx, sink, star, over);
    };

    match sigma {
        SemanticsId::ConflictFree => ext_layer(&mut cx, &mut outer, false, None),
        SemanticsId::Stable => {
            ext_layer(&mut cx, &mut outer, false, None);
            defeat_layer(&mut cx, &mut outer, false, None, true);
        }
        SemanticsId::Admissible => adm(&mut cx, &mut outer, false, None, corrected),
        SemanticsId::Complete => {
            adm(&mut cx, &mut outer, false, None, corrected);
            out_layer(&mut cx, &mut outer);
            dge_layer(&mut cx, &mut outer);
        }
        SemanticsId::Preferred => {
            adm(&mut cx, &mut outer, false, None, corrected);
            adm(&mut cx, &mut inner, true, Some(25), corrected);
            pref_layer(&mut cx, &mut inner);
        }
        SemanticsId::SemiStable => {
            // The range comparison reads d on the free side, so the defeat
            // layer is always part of the outer formula here.
            adm(&mut cx, &mut outer, false, None, true);
            adm(&mut cx, &mut inner, true, Some(32), true);
            range_diff_layer(&mut cx, &mut inner, Family::Subset, true, [33, 34, 35, 36]);
            if corrected {
                range_diff_layer(&mut cx, &mut inner, Family::RangeLoss, false, [38, 39, 40, 41]);
            }
            range_root(&mut cx, &mut inner);
        }
        SemanticsId::Stage => {
            ext_layer(&mut cx, &mut outer, false, None);
            defeat_layer(&mut cx, &mut outer, false, None, false);
            ext_layer(&mut cx, &mut inner, true, Some(32));
            defeat_layer(&mut cx, &mut inner, true, Some(32), false);
            range_diff_layer(&mut cx, &mut inner, Family::Subset, true, [33, 34, 35, 36]);
            if corrected {
                range_diff_layer(&mut cx, &mut inner, Family::RangeLoss, false, [38, 39, 40, 41]);
            }
            range_root(&mut cx, &mut inner);
        }
    }

    let (clauses, provenance) = outer.finish();
    let inner = if sigma.is_second_level() {
        let (ic, ip) = inner.finish();
        let free: BTreeSet<u32> = clauses.iter().flat_map(|c| c.lits().iter().map(|l| l.var())).collect();
        let universal: BTreeSet<u32> = ic
            .iter()
            .flat_map(|c| c.lits().iter().map(|l| l.var()))
            .filter(|v| !free.contains(v))
            .collect();
        Some(InnerPart { universal: universal.into_iter().collect(), clauses: ic, provenance: ip })
    } else {
        None
    };
    Ok(Encoding {
        semantics: sigma,
        vars: cx.vars,
        clauses,
        provenance,
        inner,
        extension_vars,
        flip: false,
        width: x.width(),
        leaf_of_arg: cx.leaf_of_arg,
    })
}

/// Credulous: add `e_a`. Skeptical: add `¬e_a` and mark the answer flipped.
pub fn assert_acceptance(enc: &Encoding, a: &crate::af::Argument, mode: Mode) -> Result<Encoding, EncodeError> {
    let var = *enc
        .extension_vars
        .get(a.index)
        .ok_or_else(|| EncodeError::UnknownArgument(a.name.clone()))?;
    if enc.vars.arg_names().get(a.index) != Some(&a.name) {
        return Err(EncodeError::UnknownArgument(a.name.clone()));
    }
    let mut out = enc.clone();
    let lit = match mode {
        Mode::Credulous => Lit::pos(var),
        Mode::Skeptical => Lit::neg(var),
    };
    out.clauses.push(Clause::unit(lit));
    out.provenance.push(Prov { node: enc.leaf_of_arg[a.index], tag: 0, color: 0 });
    out.flip = mode == Mode::Skeptical;
    Ok(out)
}

/// A CNF turned into an equivalent DNF under universally quantified
/// auxiliary variables: `CNF(X) ⇔ ∀aux. DNF(X, aux)`.
#[derive(Debug, Clone)]
pub struct DnfConversion {
    pub vars: VarTable,
    pub cubes: Vec<Clause>,
    /// Guide node owning each cube.
    pub homes: Vec<usize>,
    pub aux: Vec<u32>,
}

/// Convert `clauses` along `guide`, an expression for their directed
/// incidence graph (leaves `v<id>` and `c<idx>`).
///
/// Per color class: `sat` (every clause vertex already has a satisfying
/// edge), `t` / `f` (some variable vertex is true / false). The cubes are
/// the negations of the definition clauses plus the root cube `∧ sat`.
pub fn dnf_convert(vars: &VarTable, clauses: &[Clause], guide: &KExpr) -> Result<DnfConversion, EncodeError> {
    const VAR: u8 = 1;
    const CLAUSE: u8 = 2;
    let st = annotate(guide);
    let mut kinds: Vec<Vec<(Color, u8)>> = vec![Vec::new(); guide.len()];
    let kind = |kinds: &Vec<Vec<(Color, u8)>>, b: usize, c: Color| {
        kinds[b].iter().find(|(k, _)| *k == c).map_or(0, |&(_, m)| m)
    };
    let mut leaf_var = vec![None; guide.len()];
    let mut seen_clauses = 0usize;
    for b in guide.bottom_up() {
        kinds[b] = match guide.node(b) {
            KNode::Initial { color, name } => {
                let (tag, rest) = name.split_at(1.min(name.len()));
                let idx: Option<usize> = rest.parse().ok();
                match (tag, idx) {
                    ("v", Some(v)) if v >= 1 && v <= vars.len() => {
                        leaf_var[b] = Some(v as u32);
                        vec![(*color, VAR)]
                    }
                    ("c", Some(i)) if i < clauses.len() => {
                        seen_clauses += 1;
                        vec![(*color, CLAUSE)]
                    }
                    _ => return Err(EncodeError::BadGuide(format!("unexpected vertex `{name}`"))),
                }
            }
            KNode::Union(ch) => {
                let mut acc: Vec<(Color, u8)> = Vec::new();
                for &k in ch {
                    for &(c, m) in &kinds[k] {
                        match acc.iter_mut().find(|(x, _)| *x == c) {
                            Some(e) => e.1 |= m,
                            None => acc.push((c, m)),
                        }
                    }
                }
                acc
            }
            KNode::Relabel { from, to, child } => {
                let mut acc: Vec<(Color, u8)> = Vec::new();
                for &(c, m) in &kinds[*child] {
                    let c = if c == *from { *to } else { c };
                    match acc.iter_mut().find(|(x, _)| *x == c) {
                        Some(e) => e.1 |= m,
                        None => acc.push((c, m)),
                    }
                }
                acc
            }
            KNode::EdgeIntro { child, .. } => kinds[*child].clone(),
        };
    }
    if seen_clauses != clauses.len() {
        return Err(EncodeError::BadGuide("not every clause has a leaf".into()));
    }

    let mut vars = vars.clone();
    let mut defs: Vec<(usize, Clause)> = Vec::new();
    let lit = |vars: &mut VarTable, family: Family, c: Color, b: usize| {
        Lit::pos(vars.id(VarKey::Node { family, color: c, node: b, starred: false }))
    };
    let def = |defs: &mut Vec<(usize, Clause)>, b: usize, head: Lit, body: Gate| {
        defs.extend(clausify_one(head, &body).into_iter().map(|c| (b, c)));
    };
    for (b, &leaf) in leaf_var.iter().enumerate() {
        let cols = st.cols(b).to_vec();
        match guide.node(b).clone() {
            KNode::Initial { color: c, .. } => {
                let sat = lit(&mut vars, Family::Sat, c, b);
                let t = lit(&mut vars, Family::True, c, b);
                let f = lit(&mut vars, Family::False, c, b);
                match leaf {
                    Some(v) => {
                        def(&mut defs, b, sat, Gate::And(vec![]));
                        def(&mut defs, b, t, Gate::Lit(Lit::pos(v)));
                        def(&mut defs, b, f, Gate::Lit(Lit::neg(v)));
                    }
                    None => {
                        for x in [sat, t, f] {
                            def(&mut defs, b, x, Gate::Or(vec![]));
                        }
                    }
                }
            }
            KNode::Union(ch) => {
                for c in cols {
                    let live: Vec<usize> = ch.iter().copied().filter(|&k| st.has(k, c)).collect();
                    for (family, and) in [(Family::Sat, true), (Family::True, false), (Family::False, false)] {
                        let head = lit(&mut vars, family, c, b);
                        let terms: Vec<Lit> = live.iter().map(|&k| lit(&mut vars, family, c, k)).collect();
                        def(&mut defs, b, head, if and { Gate::and_lits(terms) } else { Gate::or_lits(terms) });
                    }
                }
            }
            KNode::Relabel { from, to, child } => {
                for c in cols {
                    let mut srcs = Vec::new();
                    if c == to && from != to && st.has(child, from) {
                        srcs.push(from);
                    }
                    if st.has(child, c) {
                        srcs.push(c);
                    }
                    for (family, and) in [(Family::Sat, true), (Family::True, false), (Family::False, false)] {
                        let head = lit(&mut vars, family, c, b);
                        let terms: Vec<Lit> = srcs.iter().map(|&s| lit(&mut vars, family, s, child)).collect();
                        def(&mut defs, b, head, if and { Gate::and_lits(terms) } else { Gate::or_lits(terms) });
                    }
                }
            }
            KNode::EdgeIntro { src, dst, child } => {
                let live = st.has(child, src) && st.has(child, dst);
                let (ks, kd) = (kind(&kinds, child, src), kind(&kinds, child, dst));
                // (clause class, literal-carrying family, variable class)
                let grant = match (live, ks, kd) {
                    (false, ..) => None,
                    (true, CLAUSE, VAR) => Some((src, Family::True, dst)),
                    (true, VAR, CLAUSE) => Some((dst, Family::False, src)),
                    _ => {
                        return Err(EncodeError::BadGuide(format!(
                            "node {b} joins classes that are not one clause class and one variable class"
                        )))
                    }
                };
                for c in cols {
                    for family in [Family::Sat, Family::True, Family::False] {
                        let head = lit(&mut vars, family, c, b);
                        let mut terms = vec![lit(&mut vars, family, c, child)];
                        if let Some((cc, via, vc)) = grant {
                            if family == Family::Sat && c == cc {
                                terms.push(lit(&mut vars, via, vc, child));
                            }
                        }
                        def(&mut defs, b, head, Gate::or_lits(terms));
                    }
                }
            }
        }
    }
    defs.sort_by_key(|(b, _)| *b);
    let orig = vars.len();
    let mut homes = Vec::new();
    let mut cubes = Vec::new();
    for (b, c) in defs {
        homes.push(b);
        cubes.push(c.negated());
    }
    let root: Vec<Lit> = st.cols(0).iter().map(|&c| lit(&mut vars, Family::Sat, c, 0)).collect();
    debug_assert_eq!(orig, vars.len());
    cubes.push(Clause::new(root).expect("distinct variables"));
    homes.push(0);
    let aux = vars
        .ids()
        .filter(|&v| matches!(vars.key(v), VarKey::Node { family: Family::Sat | Family::True | Family::False, .. }))
        .collect();
    Ok(DnfConversion { vars, cubes, homes, aux })
}

/// `free X. ∀(Y, aux, sel). (sel ∧ D_outer) ∨ (¬sel ∧ ¬inner)`: the CNF part
/// of a second-level encoding replaced by its DNF conversion, so the matrix
/// is a single DNF.
pub fn dnf_matrix(enc: &Encoding, outer_guide: &KExpr) -> Result<Qbf2, EncodeError> {
    let mut q = enc.qbf().ok_or_else(|| EncodeError::BadGuide("first-level encoding has no matrix".into()))?;
    let conv = dnf_convert(&enc.vars, &enc.clauses, outer_guide)?;
    let mut vars = conv.vars;
    let sel = vars.id(VarKey::Selector);
    let mut cubes = Vec::new();
    for c in &conv.cubes {
        let mut l = c.lits().to_vec();
        l.push(Lit::pos(sel));
        cubes.push(Clause::new(l).expect("selector is fresh"));
    }
    for c in &q.dnf {
        let mut l = c.lits().to_vec();
        l.push(Lit::neg(sel));
        cubes.push(Clause::new(l).expect("selector is fresh"));
    }
    q.inner.extend(conv.aux);
    q.inner.push(sel);
    q.inner.sort_unstable();
    q.vars = vars;
    q.cnf.clear();
    q.dnf = cubes;
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::af::parse_apx;
    use crate::kexpr::parse_kexpr;

    const FIG2: &str = "e(1,2,u(e(2,1,u(1(u),2(r))),r(1->3,e(1,2,u(1(z),2(o))))))";

    fn fig1() -> Af {
        parse_apx("arg(z). arg(o). arg(u). arg(r). att(z,o). att(u,o). att(u,r). att(r,u).").unwrap()
    }

    fn rendered(enc: &Encoding, node: usize, tags: &[u8]) -> Vec<String> {
        let (cs, ps) = enc.matrix_clauses();
        cs.iter()
            .zip(&ps)
            .filter(|(_, p)| p.node == node && tags.contains(&p.tag))
            .map(|(c, _)| c.render(&enc.vars))
            .collect()
    }

    #[test]
    fn leaf_nine_and_edge_five() {
        let enc = encode_conflict_free(&fig1(), &parse_kexpr(FIG2).unwrap()).unwrap();
        assert_eq!(rendered(&enc, 9, &[1]), vec!["(e(z) -e1^9)", "(-e(z) e1^9)"]);
        let five = rendered(&enc, 5, &[4]);
        assert!(five.iter().any(|c| c == "(-e1^5 -e2^5)" || c == "(-e2^5 -e1^5)"), "{five:?}");
        assert_eq!(five.len(), 5);
    }

    #[test]
    fn single_leaf() {
        let af = parse_apx("arg(a).").unwrap();
        let enc = encode_conflict_free(&af, &parse_kexpr("1(a)").unwrap()).unwrap();
        assert_eq!(enc.clauses.len(), 2);
        assert_eq!(enc.provenance.iter().map(|p| p.tag).collect::<Vec<_>>(), vec![1, 1]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let af = fig1();
        let x = parse_kexpr("1(a)").unwrap();
        assert!(matches!(encode_stable(&af, &x), Err(EncodeError::Validation(_))));
        let selfish = parse_apx("arg(a). att(a,a).").unwrap();
        assert!(matches!(encode_stable(&selfish, &x), Err(EncodeError::SelfAttack(_))));
    }

    #[test]
    fn second_level_blocks() {
        let enc = encode_preferred(&fig1(), &parse_kexpr(FIG2).unwrap()).unwrap();
        let q = enc.qbf().unwrap();
        let free: BTreeSet<u32> = q.free.iter().copied().collect();
        assert!(q.inner.iter().all(|v| !free.contains(v)));
        for &v in &q.inner {
            let k = enc.vars.key(v);
            assert!(k.is_starred() || matches!(k, VarKey::Node { family: Family::Subset, .. }), "{k:?}");
        }
        for &v in &q.free {
            assert!(!enc.vars.key(v).is_starred());
        }
    }

    #[test]
    fn provenance_is_total() {
        for sem in SemanticsId::ALL {
            let enc = encode(&fig1(), &parse_kexpr(FIG2).unwrap(), sem).unwrap();
            let (cs, ps) = enc.matrix_clauses();
            assert_eq!(cs.len(), ps.len());
            assert_eq!(enc.provenance_map().lines().count(), cs.len());
        }
    }
}
