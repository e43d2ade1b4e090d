//! Directed clique-width k-expressions.
//!
//! Expressions live in an arena whose ids follow level order (breadth-first,
//! root = 0), so every child has a larger id than its parent. All traversals
//! are iterative: witness expressions are hundreds of thousands of nodes deep.

mod parse;
mod search;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::af::Af;

pub use parse::parse_kexpr;
pub use search::{search_expression, SearchError};

pub type Color = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KExprError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("argument `{0}` is created by more than one leaf")]
    DuplicateLeaf(String),
    #[error("edge introduction e({0},{0},..) needs two distinct colors")]
    SelfColorEdge(Color),
    #[error("colors start at 1 (got {0})")]
    BadColor(i64),
    #[error("a union needs at least two children")]
    ThinUnion,
    #[error("argument `{0}` attacks itself; self-attacks cannot be built with distinct-color edge introductions")]
    SelfAttack(String),
    #[error("the framework has no arguments")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KNode {
    Initial { color: Color, name: String },
    Union(Vec<usize>),
    Relabel { from: Color, to: Color, child: usize },
    EdgeIntro { src: Color, dst: Color, child: usize },
}

impl KNode {
    pub fn children(&self) -> &[usize] {
        match self {
            KNode::Initial { .. } => &[],
            KNode::Union(ch) => ch,
            KNode::Relabel { child, .. } | KNode::EdgeIntro { child, .. } => std::slice::from_ref(child),
        }
    }

    fn colors(&self) -> Vec<Color> {
        match *self {
            KNode::Initial { color, .. } => vec![color],
            KNode::Union(_) => vec![],
            KNode::Relabel { from, to, .. } => vec![from, to],
            KNode::EdgeIntro { src, dst, .. } => vec![src, dst],
        }
    }
}

/// A k-expression; `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KExpr {
    nodes: Vec<KNode>,
    parent: Vec<Option<usize>>,
    width: Color,
    arity: usize,
}

impl KExpr {
    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, id: usize) -> &KNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[KNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.parent[id]
    }

    /// The largest color label mentioned anywhere (all colors lie in `1..=width`).
    pub fn width(&self) -> Color {
        self.width
    }

    /// Maximum union fan-out (1 if there is no union).
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Leaf ids in ascending order.
    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| matches!(self.nodes[i], KNode::Initial { .. }))
    }

    /// Ids in an order where every child precedes its parent.
    pub fn bottom_up(&self) -> impl Iterator<Item = usize> {
        (0..self.nodes.len()).rev()
    }

    /// Build from an arena with arbitrary ids; renumbers in level order.
    pub fn from_arena(arena: Vec<KNode>, root: usize) -> Result<KExpr, KExprError> {
        let mut order = Vec::with_capacity(arena.len());
        let mut new_id = vec![usize::MAX; arena.len()];
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(id) = queue.pop_front() {
            new_id[id] = order.len();
            order.push(id);
            queue.extend(arena[id].children().iter().copied());
        }
        let mut slots: Vec<Option<KNode>> = arena.into_iter().map(Some).collect();
        let mut nodes = Vec::with_capacity(order.len());
        for &old in &order {
            let node = slots[old].take().expect("arena node reached twice (not a tree)");
            nodes.push(match node {
                KNode::Union(ch) => KNode::Union(ch.into_iter().map(|c| new_id[c]).collect()),
                KNode::Relabel { from, to, child } => KNode::Relabel { from, to, child: new_id[child] },
                KNode::EdgeIntro { src, dst, child } => KNode::EdgeIntro { src, dst, child: new_id[child] },
                leaf => leaf,
            });
        }
        Self::from_nodes(nodes)
    }

    fn from_nodes(nodes: Vec<KNode>) -> Result<KExpr, KExprError> {
        let mut parent = vec![None; nodes.len()];
        let mut width = 0;
        let mut arity = 1;
        let mut seen = std::collections::HashSet::new();
        for (id, n) in nodes.iter().enumerate() {
            for &c in n.children() {
                parent[c] = Some(id);
            }
            for c in n.colors() {
                if c == 0 {
                    return Err(KExprError::BadColor(0));
                }
                width = width.max(c);
            }
            match n {
                KNode::Initial { name, .. } if !seen.insert(name.as_str()) => {
                    return Err(KExprError::DuplicateLeaf(name.clone()));
                }
                KNode::Union(ch) if ch.len() < 2 => return Err(KExprError::ThinUnion),
                KNode::Union(ch) => arity = arity.max(ch.len()),
                KNode::EdgeIntro { src, dst, .. } if src == dst => {
                    return Err(KExprError::SelfColorEdge(*src));
                }
                _ => {}
            }
        }
        Ok(KExpr { nodes, parent, width, arity })
    }

    /// Serialize in the textual grammar (`e(1,2,u(1(a),2(b)))`).
    pub fn serialize(&self) -> String {
        enum Step {
            Open(usize),
            Text(&'static str),
        }
        let mut out = String::new();
        let mut stack = vec![Step::Open(0)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Text(t) => out.push_str(t),
                Step::Open(id) => match &self.nodes[id] {
                    KNode::Initial { color, name } => out.push_str(&format!("{color}({name})")),
                    KNode::Union(ch) => {
                        out.push_str("u(");
                        stack.push(Step::Text(")"));
                        for (i, &c) in ch.iter().enumerate().rev() {
                            stack.push(Step::Open(c));
                            if i > 0 {
                                stack.push(Step::Text(","));
                            }
                        }
                    }
                    KNode::Relabel { from, to, child } => {
                        out.push_str(&format!("r({from}->{to},"));
                        stack.push(Step::Text(")"));
                        stack.push(Step::Open(*child));
                    }
                    KNode::EdgeIntro { src, dst, child } => {
                        out.push_str(&format!("e({src},{dst},"));
                        stack.push(Step::Text(")"));
                        stack.push(Step::Open(*child));
                    }
                },
            }
        }
        out
    }
}

impl fmt::Display for KExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

/// Incremental construction of an expression; ids are arena-local until
/// [`KExprBuilder::finish`] renumbers them.
#[derive(Debug, Default)]
pub struct KExprBuilder {
    arena: Vec<KNode>,
}

impl KExprBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, n: KNode) -> usize {
        self.arena.push(n);
        self.arena.len() - 1
    }

    pub fn leaf(&mut self, color: Color, name: impl Into<String>) -> usize {
        self.push(KNode::Initial { color, name: name.into() })
    }

    /// Union of the given parts; a single part is returned unchanged.
    pub fn union(&mut self, children: Vec<usize>) -> usize {
        if children.len() == 1 {
            children[0]
        } else {
            self.push(KNode::Union(children))
        }
    }

    pub fn relabel(&mut self, from: Color, to: Color, child: usize) -> usize {
        self.push(KNode::Relabel { from, to, child })
    }

    pub fn edge(&mut self, src: Color, dst: Color, child: usize) -> usize {
        self.push(KNode::EdgeIntro { src, dst, child })
    }

    pub fn finish(self, root: usize) -> Result<KExpr, KExprError> {
        KExpr::from_arena(self.arena, root)
    }
}

/// A directed graph with named vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    pub names: Vec<String>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl LabeledGraph {
    /// Edges as name pairs.
    pub fn named_edges(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|&(a, b)| (self.names[a].clone(), self.names[b].clone()))
            .collect()
    }
}

/// Evaluate the expression bottom-up into the digraph it constructs.
pub fn evaluate(x: &KExpr) -> LabeledGraph {
    let mut names = Vec::new();
    let mut vertex_of = vec![usize::MAX; x.len()];
    for leaf in x.leaves() {
        if let KNode::Initial { name, .. } = &x.nodes[leaf] {
            vertex_of[leaf] = names.len();
            names.push(name.clone());
        }
    }
    let mut edges = BTreeSet::new();
    let mut state: Vec<HashMap<Color, Vec<usize>>> = vec![HashMap::new(); x.len()];
    for id in x.bottom_up() {
        let cur = match &x.nodes[id] {
            KNode::Initial { color, .. } => HashMap::from([(*color, vec![vertex_of[id]])]),
            KNode::Union(ch) => {
                let mut acc = std::mem::take(&mut state[ch[0]]);
                for &c in &ch[1..] {
                    for (col, vs) in std::mem::take(&mut state[c]) {
                        merge_into(acc.entry(col).or_default(), vs);
                    }
                }
                acc
            }
            KNode::Relabel { from, to, child } => {
                let mut acc = std::mem::take(&mut state[*child]);
                if from != to {
                    if let Some(vs) = acc.remove(from) {
                        merge_into(acc.entry(*to).or_default(), vs);
                    }
                }
                acc
            }
            KNode::EdgeIntro { src, dst, child } => {
                let acc = std::mem::take(&mut state[*child]);
                if let (Some(s), Some(d)) = (acc.get(src), acc.get(dst)) {
                    for &u in s {
                        for &v in d {
                            edges.insert((u, v));
                        }
                    }
                }
                acc
            }
        };
        state[id] = cur;
    }
    LabeledGraph { names, edges }
}

fn merge_into(dst: &mut Vec<usize>, mut src: Vec<usize>) {
    if src.len() > dst.len() {
        std::mem::swap(dst, &mut src);
    }
    dst.extend(src);
}

/// Per-node color sets, the input the encoder consumes.
#[derive(Debug, Clone)]
pub struct ColorState {
    cols: Vec<Vec<Color>>,
    leaf_of: HashMap<String, usize>,
    parent: Vec<Option<usize>>,
    relabels: Vec<Option<(Color, Color)>>,
    edge_pairs: Vec<Option<(Color, Color)>>,
}

impl ColorState {
    /// Live colors at node `b`, ascending.
    pub fn cols(&self, b: usize) -> &[Color] {
        &self.cols[b]
    }

    pub fn has(&self, b: usize, c: Color) -> bool {
        self.cols[b].binary_search(&c).is_ok()
    }

    /// The `(source, target)` pair introduced at an edge node.
    pub fn edge_pair(&self, b: usize) -> Option<(Color, Color)> {
        self.edge_pairs[b]
    }

    /// Color of argument `name` in the subgraph built at `b`, if it exists there.
    pub fn col(&self, name: &str, b: usize) -> Option<Color> {
        let mut node = *self.leaf_of.get(name)?;
        let mut color = self.cols[node][0];
        while node != b {
            node = self.parent[node]?;
            if let Some((from, to)) = self.relabels[node] {
                if color == from {
                    color = to;
                }
            }
        }
        Some(color)
    }
}

/// Compute `cols(b)` for every node.
pub fn annotate(x: &KExpr) -> ColorState {
    let n = x.len();
    let mut cols: Vec<Vec<Color>> = vec![Vec::new(); n];
    let mut leaf_of = HashMap::new();
    let mut relabels = vec![None; n];
    let mut edge_pairs = vec![None; n];
    for id in x.bottom_up() {
        cols[id] = match &x.nodes[id] {
            KNode::Initial { color, name } => {
                leaf_of.insert(name.clone(), id);
                vec![*color]
            }
            KNode::Union(ch) => {
                let set: BTreeSet<Color> = ch.iter().flat_map(|&c| cols[c].iter().copied()).collect();
                set.into_iter().collect()
            }
            KNode::Relabel { from, to, child } => {
                relabels[id] = Some((*from, *to));
                let mut set: BTreeSet<Color> = cols[*child].iter().copied().collect();
                if set.remove(from) {
                    set.insert(*to);
                }
                set.into_iter().collect()
            }
            KNode::EdgeIntro { src, dst, child } => {
                edge_pairs[id] = Some((*src, *dst));
                cols[*child].clone()
            }
        };
    }
    ColorState { cols, leaf_of, parent: x.parent.clone(), relabels, edge_pairs }
}

/// Mismatches between an expression's graph and a framework.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub missing_arguments: Vec<String>,
    pub extra_arguments: Vec<String>,
    pub missing_edges: Vec<(String, String)>,
    pub extra_edges: Vec<(String, String)>,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.missing_arguments.is_empty()
            && self.extra_arguments.is_empty()
            && self.missing_edges.is_empty()
            && self.extra_edges.is_empty()
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.missing_arguments.is_empty() {
            parts.push(format!("missing arguments: {}", self.missing_arguments.join(",")));
        }
        if !self.extra_arguments.is_empty() {
            parts.push(format!("extra arguments: {}", self.extra_arguments.join(",")));
        }
        let pairs = |v: &[(String, String)]| {
            v.iter().map(|(a, b)| format!("{a}->{b}")).collect::<Vec<_>>().join(",")
        };
        if !self.missing_edges.is_empty() {
            parts.push(format!("missing edges: {}", pairs(&self.missing_edges)));
        }
        if !self.extra_edges.is_empty() {
            parts.push(format!("extra edges: {}", pairs(&self.extra_edges)));
        }
        if parts.is_empty() {
            f.write_str("ok")
        } else {
            f.write_str(&parts.join("; "))
        }
    }
}

impl std::error::Error for Diagnostics {}

/// Check that `x` builds exactly the attack graph of `af`.
pub fn validate(x: &KExpr, af: &Af) -> Result<(), Diagnostics> {
    let g = evaluate(x);
    let mut d = Diagnostics::default();
    let have: BTreeSet<&str> = g.names.iter().map(String::as_str).collect();
    for n in af.names() {
        if !have.contains(n.as_str()) {
            d.missing_arguments.push(n.clone());
        }
    }
    for n in &g.names {
        if af.index_of(n).is_none() {
            d.extra_arguments.push(n.clone());
        }
    }
    let built = g.named_edges();
    let wanted: BTreeSet<(String, String)> = af
        .attacks()
        .map(|(a, b)| (af.name(a).to_string(), af.name(b).to_string()))
        .collect();
    d.missing_edges = wanted.difference(&built).cloned().collect();
    d.extra_edges = built.difference(&wanted).cloned().collect();
    if d.is_ok() {
        Ok(())
    } else {
        Err(d)
    }
}

/// The width-|A| fallback: distinct colors, one union, one edge per attack.
pub fn trivial_expression(af: &Af) -> Result<KExpr, KExprError> {
    if af.is_empty() {
        return Err(KExprError::Empty);
    }
    if let Some((a, _)) = af.attacks().find(|&(a, b)| a == b) {
        return Err(KExprError::SelfAttack(af.name(a).to_string()));
    }
    let mut b = KExprBuilder::new();
    let leaves: Vec<usize> = (0..af.len()).map(|i| b.leaf(i as Color + 1, af.name(i))).collect();
    let mut top = b.union(leaves);
    for (x, y) in af.attacks() {
        top = b.edge(x as Color + 1, y as Color + 1, top);
    }
    b.finish(top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::af::parse_apx;

    pub(crate) const FIG2: &str = "e(1,2,u(e(2,1,u(1(u),2(r))),r(1->3,e(1,2,u(1(z),2(o))))))";

    fn fig1() -> Af {
        parse_apx("arg(z). arg(o). arg(u). arg(r). att(z,o). att(u,o). att(u,r). att(r,u).").unwrap()
    }

    #[test]
    fn level_order_ids() {
        let x = parse_kexpr(FIG2).unwrap();
        assert_eq!(x.len(), 11);
        assert_eq!(x.width(), 3);
        assert!(matches!(x.node(3), KNode::Relabel { from: 1, to: 3, .. }));
        assert!(matches!(x.node(5), KNode::EdgeIntro { src: 1, dst: 2, .. }));
        assert!(matches!(x.node(8), KNode::Union(_)));
        assert_eq!(x.node(9), &KNode::Initial { color: 1, name: "z".into() });
        assert_eq!(x.node(10), &KNode::Initial { color: 2, name: "o".into() });
        assert_eq!(x.node(6), &KNode::Initial { color: 1, name: "u".into() });
    }

    #[test]
    fn evaluate_builds_fig1() {
        let x = parse_kexpr(FIG2).unwrap();
        assert!(validate(&x, &fig1()).is_ok());
        let one = evaluate(&parse_kexpr("e(1,2,u(1(a),2(b)))").unwrap());
        assert_eq!(one.named_edges(), BTreeSet::from([("a".to_string(), "b".to_string())]));
        assert!(evaluate(&parse_kexpr("1(a)").unwrap()).edges.is_empty());
    }

    #[test]
    fn validate_reports_mismatches() {
        let x = parse_kexpr(FIG2).unwrap();
        let mut af = fig1();
        af.add_attack(af.index_of("o").unwrap(), af.index_of("z").unwrap());
        let d = validate(&x, &af).unwrap_err();
        assert_eq!(d.missing_edges, vec![("o".to_string(), "z".to_string())]);
        let two = parse_apx("arg(a). arg(b).").unwrap();
        let d = validate(&parse_kexpr("1(a)").unwrap(), &two).unwrap_err();
        assert_eq!(d.missing_arguments, vec!["b".to_string()]);
    }

    #[test]
    fn annotate_cols() {
        let x = parse_kexpr(FIG2).unwrap();
        let st = annotate(&x);
        assert_eq!(st.cols(3), &[2, 3]);
        assert_eq!(st.cols(1), &[1, 2, 3]);
        assert_eq!(st.cols(9), &[1]);
        assert_eq!(st.col("z", 9), Some(1));
        assert_eq!(st.col("z", 3), Some(3));
        assert_eq!(st.col("z", 0), Some(3));
        assert_eq!(st.col("u", 3), None);
        assert_eq!(st.edge_pair(5), Some((1, 2)));
    }

    #[test]
    fn trivial_expressions() {
        let af = fig1();
        let x = trivial_expression(&af).unwrap();
        assert_eq!(x.width(), 4);
        assert!(validate(&x, &af).is_ok());
        let single = parse_apx("arg(a).").unwrap();
        assert_eq!(trivial_expression(&single).unwrap().serialize(), "1(a)");
        let selfish = parse_apx("arg(a). att(a,a).").unwrap();
        assert!(matches!(trivial_expression(&selfish), Err(KExprError::SelfAttack(_))));
    }

    #[test]
    fn round_trip() {
        let x = parse_kexpr(FIG2).unwrap();
        assert_eq!(x.serialize(), FIG2);
        assert_eq!(parse_kexpr(&x.serialize()).unwrap(), x);
    }

    #[test]
    fn dead_relabel_is_noop() {
        let x = parse_kexpr("r(3->1,e(1,2,u(1(a),2(b))))").unwrap();
        let st = annotate(&x);
        assert_eq!(st.cols(0), &[1, 2]);
        assert_eq!(evaluate(&x).edges.len(), 1);
    }
}
