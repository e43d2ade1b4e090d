//! QBF writers.
//!
//! A mixed CNF ∧ DNF matrix has no QDIMACS form, so the default output is a
//! QCIR-style gate listing with explicit `cnf-part` / `dnf-part` sections.
//! When the inner block is universal and the matrix is a pure DNF, the
//! complemented existential form is written as QDIMACS instead: the original
//! formula holds iff the written one is false.

use super::dimacs::push_clause;
use super::{Qbf2, Quant};

fn join(ids: impl IntoIterator<Item = i64>) -> String {
    ids.into_iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn write_qbf(q: &Qbf2) -> String {
    if q.quant == Quant::Forall && q.cnf.is_empty() && q.dnf_present {
        return complement_qdimacs(q);
    }
    let mut out = String::from("#QCIR-G14\n");
    for v in q.vars.ids() {
        out.push_str(&format!("# {v} {}\n", q.vars.name(v)));
    }
    out.push_str(&format!("free({})\n", join(q.free.iter().map(|&v| v as i64))));
    let block = match q.quant {
        Quant::Forall => "forall",
        Quant::Exists => "exists",
    };
    out.push_str(&format!("{block}({})\n", join(q.inner.iter().map(|&v| v as i64))));
    let mut next = q.vars.len() as i64;
    let mut fresh = || {
        next += 1;
        next
    };
    let root = fresh();
    out.push_str(&format!("output({root})\n"));
    let mut parts = Vec::new();
    out.push_str("# cnf-part\n");
    let mut clause_gates = Vec::new();
    for c in &q.cnf {
        let g = fresh();
        out.push_str(&format!("{g} = or({})\n", join(c.lits().iter().map(|l| l.0 as i64))));
        clause_gates.push(g);
    }
    let cnf_gate = fresh();
    out.push_str(&format!("{cnf_gate} = and({})\n", join(clause_gates)));
    parts.push(cnf_gate);
    out.push_str("# dnf-part\n");
    if q.dnf_present {
        let mut cube_gates = Vec::new();
        for c in &q.dnf {
            let g = fresh();
            out.push_str(&format!("{g} = and({})\n", join(c.lits().iter().map(|l| l.0 as i64))));
            cube_gates.push(g);
        }
        let dnf_gate = fresh();
        out.push_str(&format!("{dnf_gate} = or({})\n", join(cube_gates)));
        parts.push(dnf_gate);
    }
    out.push_str(&format!("{root} = and({})\n", join(parts)));
    out
}

fn complement_qdimacs(q: &Qbf2) -> String {
    let mut out = String::new();
    out.push_str("c complement of a universal DNF matrix: the original formula is true iff this one is false\n");
    for v in q.vars.ids() {
        out.push_str(&format!("c {v} {}\n", q.vars.name(v)));
    }
    out.push_str(&format!("p cnf {} {}\n", q.vars.len(), q.dnf.len()));
    if !q.inner.is_empty() {
        out.push_str("e ");
        for v in &q.inner {
            out.push_str(&format!("{v} "));
        }
        out.push_str("0\n");
    }
    for cube in &q.dnf {
        push_clause(&mut out, &cube.negated());
    }
    out
}
