//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::PathBuf;

use cwsat::af::{parse_apx, Af, SemanticsId};
use cwsat::encoder::{dnf_convert, encode, Encoding};
use cwsat::formula::{clausify_one, incidence_digraph, write_dimacs, write_qbf, Clause, Gate, Lit, Qbf2, Quant, VarKey, VarTable};
use cwsat::kexpr::{parse_kexpr, search_expression, trivial_expression, KExpr};
use cwsat::solver::{QbfChecker, SolverConfig};
use cwsat::witness::{build_dnf_witness, dnf_budget, verify};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FIG2: &str = "e(1,2,u(e(2,1,u(1(u),2(r))),r(1->3,e(1,2,u(1(z),2(o))))))";

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Arguments `a0..`; bit `b` of `code` is the b-th ordered pair (i, j), i ≠ j.
pub fn af_from_code(n: usize, code: u64) -> Af {
    let mut af = Af::new();
    for i in 0..n {
        af.add_argument(&format!("a{i}")).unwrap();
    }
    let mut bit = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                if code >> bit & 1 == 1 {
                    af.add_attack(i, j);
                }
                bit += 1;
            }
        }
    }
    af
}

pub fn random_af(rng: &mut ChaCha8Rng, n: usize) -> Af {
    let p = rng.gen_range(0.1..0.6);
    let mut af = af_from_code(n, 0);
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(p) {
                af.add_attack(i, j);
            }
        }
    }
    af
}

/// A searched expression when one is found within the budget, else the trivial one.
pub fn guide(af: &Af, budget: usize) -> KExpr {
    search_expression(af, af.len(), budget)
        .ok()
        .flatten()
        .unwrap_or_else(|| trivial_expression(af).unwrap())
}

pub fn running_example(sem: SemanticsId) -> Encoding {
    let af = parse_apx(&fs::read_to_string(data("fig1.apx")).unwrap()).unwrap();
    let x = parse_kexpr(&fs::read_to_string(data("fig2.kx")).unwrap()).unwrap();
    encode(&af, &x, sem).unwrap()
}

// ---- worked-example formulas -------------------------------------------

pub type Table = &'static [(usize, u8, &'static [&'static str])];

pub const STABLE: Table = &[
    (9, 1, &["e1^9 <-> e(z)"]),
    (10, 1, &["e2^10 <-> e(o)"]),
    (9, 5, &["d1^9 <-> e1^9"]),
    (10, 5, &["d2^10 <-> e2^10"]),
    (8, 2, &["e1^8 <-> e1^9", "e2^8 <-> e2^10"]),
    (8, 6, &["d1^8 <-> d1^9", "d2^8 <-> d2^10"]),
    (5, 4, &["e1^5 <-> e1^8", "e2^5 <-> e2^8", "-e2^5 | -e1^5"]),
    (5, 8, &["d1^5 <-> d1^8", "d2^5 <-> d2^8 | e1^5"]),
    (3, 3, &["e2^3 <-> e2^5", "e3^3 <-> e1^5"]),
    (3, 7, &["d2^3 <-> d2^5", "d3^3 <-> d1^5"]),
];

pub const ADMISSIBLE: Table = &[
    (9, 10, &["-a1^9"]),
    (10, 10, &["-a2^10"]),
    (8, 11, &["a1^8 <-> a1^9", "a2^8 <-> a2^10"]),
    (5, 13, &["a1^5 <-> a1^8 | e2^5"]),
    (5, 14, &["a2^5 <-> a2^8 & -e1^5"]),
    (3, 12, &["a2^3 <-> a2^5", "a3^3 <-> a1^5"]),
];

pub const COMPLETE: Table = &[
    (9, 16, &["o1^9 <-> -e1^9"]),
    (10, 16, &["o2^10 <-> -e2^10"]),
    (8, 17, &["o1^8 <-> o1^9", "o2^8 <-> o2^10"]),
    (5, 19, &["o1^5 <-> o1^8 & -e2^5"]),
    (5, 20, &["o2^5 <-> o2^8 & dge1^5"]),
    (3, 18, &["o2^3 <-> o2^5", "o3^3 <-> o1^5"]),
];

pub const PREFERRED: Table = &[
    (9, 26, &["s1^9 <-> e*1^9 & -e1^9"]),
    (10, 26, &["s2^10 <-> e*2^10 & -e2^10"]),
    (8, 27, &["s1^8 <-> s1^9", "s2^8 <-> s2^10"]),
    (5, 29, &["s1^5 <-> s1^8", "s2^5 <-> s2^8"]),
    (3, 28, &["s2^3 <-> s2^5", "s3^3 <-> s1^5"]),
];

/// Which tables apply to which encoding.
pub const LAYERS: [(SemanticsId, &[Table]); 4] = [
    (SemanticsId::Stable, &[STABLE]),
    (SemanticsId::Admissible, &[STABLE, ADMISSIBLE]),
    (SemanticsId::Complete, &[STABLE, ADMISSIBLE, COMPLETE]),
    (SemanticsId::Preferred, &[STABLE, ADMISSIBLE, PREFERRED]),
];

/// Clauses of `h <-> l op l ...` (op `&` or `|`) or of a plain clause `l | l ...`.
fn clauses_of(enc: &Encoding, formula: &str) -> Vec<String> {
    let ids: HashMap<String, u32> = enc.vars.ids().map(|v| (enc.vars.name(v), v)).collect();
    let lit = |tok: &str| {
        let (neg, name) = tok.strip_prefix('-').map_or((false, tok), |n| (true, n));
        let v = *ids.get(name).unwrap_or_else(|| panic!("no variable {name}"));
        Lit::new(v, !neg)
    };
    let render = |cs: Vec<Clause>| cs.iter().map(|c| c.render(&enc.vars)).collect();
    match formula.split_once("<->") {
        Some((head, body)) => {
            let toks: Vec<&str> = body.split_whitespace().collect();
            let lits = toks.iter().step_by(2).map(|t| lit(t));
            let gate = if toks.contains(&"|") { Gate::or_lits(lits) } else { Gate::and_lits(lits) };
            render(clausify_one(lit(head.trim()), &gate))
        }
        None => render(Clause::new(formula.split(" | ").map(|t| lit(t.trim())).collect()).into_iter().collect()),
    }
}

type Grouped = BTreeMap<(usize, u8), Vec<String>>;

fn emitted(enc: &Encoding, table: Table) -> Grouped {
    let tags: Vec<u8> = table.iter().map(|t| t.1).collect();
    let (clauses, prov) = enc.matrix_clauses();
    let mut out = Grouped::new();
    for (c, p) in clauses.iter().zip(&prov) {
        if [3, 5, 8, 9, 10].contains(&p.node) && tags.contains(&p.tag) {
            out.entry((p.node, p.tag)).or_default().push(c.render(&enc.vars));
        }
    }
    out.values_mut().for_each(|v| v.sort());
    out
}

fn expected(enc: &Encoding, table: Table) -> Grouped {
    let mut out = Grouped::new();
    for &(node, tag, formulas) in table {
        let entry = out.entry((node, tag)).or_default();
        for f in formulas {
            entry.extend(clauses_of(enc, f));
        }
        entry.sort();
    }
    out
}

pub fn check_layers(sem: SemanticsId, tables: &[Table]) -> Result<(), String> {
    let enc = running_example(sem);
    for &table in tables {
        let (got, want) = (emitted(&enc, table), expected(&enc, table));
        if got != want {
            return Err(format!("{sem}: emitted {got:?}, expected {want:?}"));
        }
    }
    Ok(())
}

pub const SNAPSHOTS: [(SemanticsId, &str); 4] = [
    (SemanticsId::Stable, "fig2_stb"),
    (SemanticsId::Admissible, "fig2_adm"),
    (SemanticsId::Complete, "fig2_com"),
    (SemanticsId::Preferred, "fig2_prf"),
];

/// The written encoding and provenance map against `data/golden`;
/// `UPDATE_GOLDENS=1` rewrites the files first.
pub fn check_snapshot(sem: SemanticsId, stem: &str) -> Result<(), String> {
    let enc = running_example(sem);
    let (ext, body) = match enc.qbf() {
        Some(q) => {
            let text = write_qbf(&q);
            (if text.starts_with("#QCIR") { "qcir" } else { "qdimacs" }, text)
        }
        None => ("cnf", write_dimacs(&enc.cnf())),
    };
    for (name, text) in [(format!("{stem}.{ext}"), body), (format!("{stem}.prov"), enc.provenance_map())] {
        let path = data("golden").join(name);
        if std::env::var_os("UPDATE_GOLDENS").is_some() {
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(&path, &text).unwrap();
        }
        let want = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        if want != text {
            return Err(format!("{} differs from the written encoding", path.display()));
        }
    }
    Ok(())
}

// ---- CNF → DNF ------------------------------------------------------------

pub fn random_cnf(rng: &mut ChaCha8Rng) -> (VarTable, Vec<Clause>) {
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=8);
    let mut vars = VarTable::new();
    for i in 1..=n {
        vars.id(VarKey::Input(i));
    }
    let mut clauses = Vec::new();
    while clauses.len() < m {
        let len = rng.gen_range(1..=3);
        let lits = (0..len).map(|_| Lit::new(rng.gen_range(1..=n as u32), rng.gen_bool(0.5))).collect();
        clauses.extend(Clause::new(lits));
    }
    (vars, clauses)
}

pub fn incidence_guide(num_vars: usize, clauses: &[Clause]) -> KExpr {
    let g = incidence_digraph(num_vars, clauses);
    let mut af = Af::new();
    for name in &g.names {
        af.add_argument(name).unwrap();
    }
    for &(a, b) in &g.edges {
        af.add_attack(a, b);
    }
    search_expression(&af, 4, 20_000).ok().flatten().unwrap_or_else(|| trivial_expression(&af).unwrap())
}

/// DNF agreement on every assignment and the witness bound for `rounds`
/// random CNFs drawn from `seed`.
pub fn check_dnf(seed: u64, rounds: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for round in 0..rounds {
        let (vars, clauses) = random_cnf(&mut rng);
        let n = vars.len();
        let guide = incidence_guide(n, &clauses);
        let conv = dnf_convert(&vars, &clauses, &guide).map_err(|e| e.to_string())?;
        let q = Qbf2 {
            vars: conv.vars.clone(),
            free: (1..=n as u32).collect(),
            quant: Quant::Forall,
            inner: conv.aux.clone(),
            cnf: vec![],
            dnf: conv.cubes.clone(),
            dnf_present: true,
        };
        let mut checker = QbfChecker::new(&q, SolverConfig::default());
        for a in 0..1u32 << n {
            let model: Vec<bool> = std::iter::once(false).chain((0..n).map(|i| a >> i & 1 == 1)).collect();
            let want = clauses.iter().all(|c| c.satisfied_by(&model));
            let cand: Vec<Lit> = (1..=n as u32).map(|v| Lit::new(v, model[v as usize])).collect();
            if checker.check(&cand).map_err(|e| e.to_string())? != want {
                return Err(format!("round {round}: disagreement on assignment {a:b}"));
            }
        }
        let w = build_dnf_witness(&conv, &guide).map_err(|e| e.to_string())?;
        let r = verify(&w, conv.vars.len(), &conv.cubes);
        if !r.ok() || w.colors_used > dnf_budget(guide.width()) {
            return Err(format!("round {round}: k_in={} {r}", guide.width()));
        }
    }
    Ok(())
}
