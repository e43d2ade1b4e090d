//! Desk-scale search for low-width k-expressions.
//!
//! Exhaustive mode (n ≤ 10) is a dynamic program over vertex subsets. A
//! subset `S` is summarized by its coarsest partition into classes whose
//! members see `V \ S` identically (in- and out-neighbours); those classes are
//! what must carry distinct colors when `S` is finished. A subset is built by
//! a union of two finished subsets, where classes from either side may share
//! a color ("group") if they will never need telling apart, followed by edge
//! introductions between groups and relabelings down to the classes of `S`.
//! Widths are tried in increasing order, so the first hit is minimal within
//! this expression shape. Above n = 10 only the linear split order is tried.

use std::collections::HashMap;

use thiserror::Error;

use super::{Color, KExpr, KExprBuilder};
use crate::af::Af;

/// Largest framework searched exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("search budget of {0} steps exhausted")]
    BudgetExhausted(usize),
    #[error("argument `{0}` attacks itself")]
    SelfAttack(String),
    #[error("the framework has no arguments")]
    Empty,
}

#[derive(Clone)]
enum Choice {
    Leaf,
    Split { s1: u64, s2: u64, groups: Vec<Vec<u64>> },
}

struct Dp<'a> {
    af: &'a Af,
    out: Vec<u64>,
    inc: Vec<u64>,
    all: u64,
    k: usize,
    steps: usize,
    budget: usize,
    parts: HashMap<u64, Vec<u64>>,
}

impl Dp<'_> {
    fn tick(&mut self) -> Result<(), SearchError> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(SearchError::BudgetExhausted(self.budget))
        } else {
            Ok(())
        }
    }

    /// Coarsest partition of `s` by neighbourhood outside `s`, ordered by lowest member.
    fn partition(&mut self, s: u64) -> Vec<u64> {
        if let Some(p) = self.parts.get(&s) {
            return p.clone();
        }
        let outside = self.all & !s;
        let mut classes: Vec<((u64, u64), u64)> = Vec::new();
        for v in bits(s) {
            let sig = (self.out[v] & outside, self.inc[v] & outside);
            match classes.iter_mut().find(|(g, _)| *g == sig) {
                Some((_, m)) => *m |= 1 << v,
                None => classes.push((sig, 1 << v)),
            }
        }
        let p: Vec<u64> = classes.into_iter().map(|(_, m)| m).collect();
        self.parts.insert(s, p.clone());
        p
    }

    fn has_edges(&self, from: u64, to: u64) -> bool {
        bits(from).any(|u| self.out[u] & to != 0)
    }

    fn complete(&self, from: u64, to: u64) -> bool {
        bits(from).all(|u| self.out[u] & to == to)
    }

    /// Group the classes of two finished parts for their union, or `None`.
    fn grouping(&mut self, s1: u64, s2: u64) -> Result<Option<Vec<Vec<u64>>>, SearchError> {
        let s = s1 | s2;
        let target = self.partition(s);
        let mut items: Vec<(u64, bool, usize)> = Vec::new();
        for (side, part) in [(false, s1), (true, s2)] {
            for m in self.partition(part) {
                let cls = target.iter().position(|&t| t & m != 0).expect("class covers");
                items.push((m, side, cls));
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        if self.place(&items, 0, &mut groups)? {
            Ok(Some(
                groups
                    .iter()
                    .map(|g| g.iter().map(|&i| items[i].0).collect())
                    .collect(),
            ))
        } else {
            Ok(None)
        }
    }

    /// Assign items `i..` to groups (set-partition backtracking).
    fn place(
        &mut self,
        items: &[(u64, bool, usize)],
        i: usize,
        groups: &mut Vec<Vec<usize>>,
    ) -> Result<bool, SearchError> {
        self.tick()?;
        if i == items.len() {
            return Ok(self.groups_ok(items, groups));
        }
        let (m, side, cls) = items[i];
        for g in 0..=groups.len() {
            if g == groups.len() {
                if groups.len() == self.k {
                    break;
                }
                groups.push(vec![i]);
                if self.place(items, i + 1, groups)? {
                    return Ok(true);
                }
                groups.pop();
                break;
            }
            let fits = groups[g].iter().all(|&j| {
                let (mj, sj, cj) = items[j];
                cj == cls && (sj == side || (!self.has_edges(m, mj) && !self.has_edges(mj, m)))
            });
            if fits {
                groups[g].push(i);
                if self.place(items, i + 1, groups)? {
                    return Ok(true);
                }
                groups[g].pop();
            }
        }
        Ok(false)
    }

    fn groups_ok(&self, items: &[(u64, bool, usize)], groups: &[Vec<usize>]) -> bool {
        for (ai, a) in groups.iter().enumerate() {
            for (bi, b) in groups.iter().enumerate() {
                if ai == bi {
                    continue;
                }
                let needed = a.iter().any(|&i| {
                    b.iter().any(|&j| items[i].1 != items[j].1 && self.has_edges(items[i].0, items[j].0))
                });
                if needed {
                    let am: u64 = a.iter().map(|&i| items[i].0).fold(0, |x, y| x | y);
                    let bm: u64 = b.iter().map(|&j| items[j].0).fold(0, |x, y| x | y);
                    if !self.complete(am, bm) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn run(&mut self, linear: bool) -> Result<Option<HashMap<u64, Choice>>, SearchError> {
        let n = self.af.len();
        let mut table: HashMap<u64, Choice> = HashMap::new();
        for v in 0..n {
            table.insert(1 << v, Choice::Leaf);
        }
        if linear {
            let mut s = 1u64;
            for v in 1..n {
                let next = s | 1 << v;
                if self.partition(next).len() > self.k {
                    return Ok(None);
                }
                match self.grouping(s, 1 << v)? {
                    Some(groups) => {
                        table.insert(next, Choice::Split { s1: s, s2: 1 << v, groups });
                    }
                    None => return Ok(None),
                }
                s = next;
            }
            return Ok(Some(table));
        }
        for s in 1..=self.all {
            if s.count_ones() < 2 || self.partition(s).len() > self.k {
                continue;
            }
            let low = s & s.wrapping_neg();
            let rest = s & !low;
            // s2 ranges over nonempty submasks of `rest`; s1 keeps the lowest vertex.
            let mut s2 = rest;
            while s2 != 0 {
                let s1 = s & !s2;
                if table.contains_key(&s1) && table.contains_key(&s2) {
                    if let Some(groups) = self.grouping(s1, s2)? {
                        table.insert(s, Choice::Split { s1, s2, groups });
                        break;
                    }
                }
                s2 = (s2 - 1) & rest;
            }
        }
        Ok(table.contains_key(&self.all).then_some(table))
    }

    fn build(&mut self, table: &HashMap<u64, Choice>, b: &mut KExprBuilder, s: u64, colors: &[Color]) -> usize {
        match &table[&s] {
            Choice::Leaf => b.leaf(colors[0], self.af.name(bits(s).next().unwrap())),
            Choice::Split { s1, s2, groups } => {
                let classes = self.partition(s);
                let bucket_of = |g: &Vec<u64>| {
                    let i = classes.iter().position(|&c| c & g[0] != 0).unwrap();
                    colors[i]
                };
                let mut buckets: Vec<Color> = groups.iter().map(bucket_of).collect();
                let mut spare = (1..=self.k as Color).filter(|c| !colors.contains(c));
                let mut seen = Vec::new();
                let mut gcol = Vec::with_capacity(groups.len());
                for &bc in &buckets {
                    if seen.contains(&bc) {
                        gcol.push(spare.next().expect("enough spare colors"));
                    } else {
                        seen.push(bc);
                        gcol.push(bc);
                    }
                }
                let color_of = |m: u64| {
                    let gi = groups.iter().position(|g| g.contains(&m)).unwrap();
                    gcol[gi]
                };
                let c1: Vec<Color> = self.partition(*s1).into_iter().map(color_of).collect();
                let c2: Vec<Color> = self.partition(*s2).into_iter().map(color_of).collect();
                let (s1, s2, groups) = (*s1, *s2, groups.clone());
                let left = self.build(table, b, s1, &c1);
                let right = self.build(table, b, s2, &c2);
                let mut node = b.union(vec![left, right]);
                for (ai, a) in groups.iter().enumerate() {
                    for (bi, bg) in groups.iter().enumerate() {
                        if ai == bi {
                            continue;
                        }
                        let cross = a.iter().any(|&x| {
                            bg.iter().any(|&y| ((x & s1 != 0) != (y & s1 != 0)) && self.has_edges(x, y))
                        });
                        if cross {
                            node = b.edge(gcol[ai], gcol[bi], node);
                        }
                    }
                }
                for (gi, bc) in buckets.drain(..).enumerate() {
                    if gcol[gi] != bc {
                        node = b.relabel(gcol[gi], bc, node);
                    }
                }
                node
            }
        }
    }
}

/// Search for an expression of width ≤ `k_max`.
///
/// `Ok(None)` means no expression exists in the searched shape class within
/// `k_max` colors; exhausting `budget` search steps is an error.
pub fn search_expression(af: &Af, k_max: usize, budget: usize) -> Result<Option<KExpr>, SearchError> {
    if af.is_empty() {
        return Err(SearchError::Empty);
    }
    if let Some((a, _)) = af.attacks().find(|&(a, b)| a == b) {
        return Err(SearchError::SelfAttack(af.name(a).to_string()));
    }
    let n = af.len();
    if n > 64 {
        // Masks are u64 even in linear mode.
        return Ok(None);
    }
    let linear = n > EXHAUSTIVE_LIMIT;
    let mut out = vec![0u64; n];
    let mut inc = vec![0u64; n];
    for (a, b) in af.attacks() {
        out[a] |= 1 << b;
        inc[b] |= 1 << a;
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut steps = 0;
    for k in 1..=k_max {
        let mut dp = Dp { af, out: out.clone(), inc: inc.clone(), all, k, steps, budget, parts: HashMap::new() };
        let found = dp.run(linear)?;
        steps = dp.steps;
        if let Some(table) = found {
            let mut b = KExprBuilder::new();
            let root = dp.build(&table, &mut b, all, &[1]);
            let x = b.finish(root).expect("search builds well-formed expressions");
            debug_assert!(super::validate(&x, af).is_ok());
            return Ok(Some(x));
        }
    }
    Ok(None)
}

fn bits(mut s: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (s != 0).then(|| {
            let i = s.trailing_zeros() as usize;
            s &= s - 1;
            i
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::af::parse_apx;
    use crate::kexpr::validate;

    const BUDGET: usize = 5_000_000;

    #[test]
    fn fig3_widths() {
        let f1 = parse_apx("arg(a). arg(b). arg(c). att(a,b). att(b,a). att(b,c). att(c,b). att(a,c). att(c,a).").unwrap();
        let x = search_expression(&f1, 2, BUDGET).unwrap().expect("width 2");
        assert!(x.width() <= 2);
        assert!(validate(&x, &f1).is_ok());
        let f2 = parse_apx("arg(d). arg(e). arg(f). att(d,e). att(e,f). att(f,d).").unwrap();
        assert!(search_expression(&f2, 2, BUDGET).unwrap().is_none());
        let x = search_expression(&f2, 3, BUDGET).unwrap().unwrap();
        assert_eq!(x.width(), 3);
        assert!(validate(&x, &f2).is_ok());
    }

    #[test]
    fn single_argument() {
        let af = parse_apx("arg(a).").unwrap();
        assert_eq!(search_expression(&af, 1, BUDGET).unwrap().unwrap().serialize(), "1(a)");
    }

    #[test]
    fn fig1_width_and_budget() {
        let af = parse_apx("arg(z). arg(o). arg(u). arg(r). att(z,o). att(u,o). att(u,r). att(r,u).").unwrap();
        let x = search_expression(&af, 4, BUDGET).unwrap().unwrap();
        assert!(validate(&x, &af).is_ok());
        assert!(x.width() <= 3);
        assert!(matches!(search_expression(&af, 4, 3), Err(SearchError::BudgetExhausted(3))));
    }

    #[test]
    fn deterministic() {
        let af = parse_apx("arg(a). arg(b). arg(c). arg(d). att(a,b). att(b,c). att(c,d). att(d,a).").unwrap();
        let x = search_expression(&af, 4, BUDGET).unwrap();
        let y = search_expression(&af, 4, BUDGET).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn linear_mode_above_limit() {
        let mut text = String::new();
        for i in 0..12 {
            text.push_str(&format!("arg(a{i}). "));
        }
        for i in 0..11 {
            text.push_str(&format!("att(a{i},a{}). ", i + 1));
        }
        let af = parse_apx(&text).unwrap();
        let x = search_expression(&af, 4, BUDGET).unwrap().expect("paths have small width");
        assert!(validate(&x, &af).is_ok());
    }
}
