//! Property tests: solver against truth tables, encodings against the
//! oracle and against each other.

mod common;

use cwsat::af::{oracle_accept, Af, Mode, SemanticsId};
use cwsat::encoder::encode;
use cwsat::formula::{Clause, Cnf, Lit, Qbf2, Quant, VarKey, VarTable};
use cwsat::kexpr::KExpr;
use cwsat::solver::{check_2qbf, decide, enumerate_models, extensions, solve_cnf, SolverConfig};
use proptest::prelude::*;

fn table(n: usize) -> VarTable {
    let mut vars = VarTable::new();
    for i in 1..=n {
        vars.id(VarKey::Input(i));
    }
    vars
}

fn clauses(n: u32, max: usize) -> impl Strategy<Value = Vec<Clause>> {
    let lit = (1..=n, any::<bool>()).prop_map(|(v, s)| Lit::new(v, s));
    prop::collection::vec(prop::collection::vec(lit, 1..=3), 0..=max)
        .prop_map(|cs| cs.into_iter().filter_map(Clause::new).collect())
}

fn cnf_strategy() -> impl Strategy<Value = Cnf> {
    (1..=12u32).prop_flat_map(|n| clauses(n, 40).prop_map(move |cs| Cnf::new(table(n as usize), cs)))
}

fn models(n: usize, cs: &[Clause]) -> Vec<Vec<bool>> {
    (0..1u32 << n)
        .map(|a| std::iter::once(false).chain((0..n).map(|i| a >> i & 1 == 1)).collect::<Vec<bool>>())
        .filter(|m| cs.iter().all(|c| c.satisfied_by(m)))
        .collect()
}

fn af_strategy(max: usize) -> impl Strategy<Value = Af> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * n - n).prop_map(move |bits| {
            let code = bits.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (b as u64) << i);
            common::af_from_code(n, code)
        })
    })
}

fn with_expr(max: usize) -> impl Strategy<Value = (Af, KExpr)> {
    af_strategy(max).prop_map(|af| {
        let x = common::guide(&af, 5_000);
        (af, x)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sat_matches_truth_table(cnf in cnf_strategy()) {
        let r = solve_cnf(&cnf).unwrap();
        let truth = models(cnf.vars.len(), &cnf.clauses);
        prop_assert_eq!(r.is_sat(), !truth.is_empty());
        if let Some(m) = r.model {
            prop_assert!(cnf.satisfied_by(&m));
        }
    }

    #[test]
    fn enumeration_matches_truth_table(cnf in cnf_strategy()) {
        let n = cnf.vars.len();
        let all: Vec<u32> = (1..=n as u32).collect();
        let mut got = enumerate_models(&cnf, &all, &SolverConfig::default()).unwrap();
        got.sort();
        let mut want: Vec<Vec<bool>> = models(n, &cnf.clauses).into_iter().map(|m| m[1..].to_vec()).collect();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn two_qbf_matches_expansion(
        nf in 1..=3usize,
        ni in 0..=3usize,
        forall in any::<bool>(),
        seed_cnf in clauses(6, 6),
        seed_dnf in clauses(6, 4),
        cand in 0..8u32,
    ) {
        let n = nf + ni;
        let keep = |cs: Vec<Clause>| -> Vec<Clause> {
            cs.into_iter().filter(|c| c.lits().iter().all(|l| l.var() as usize <= n)).collect()
        };
        let (cnf, dnf) = (keep(seed_cnf), keep(seed_dnf));
        let q = Qbf2 {
            vars: table(n),
            free: (1..=nf as u32).collect(),
            quant: if forall { Quant::Forall } else { Quant::Exists },
            inner: (nf as u32 + 1..=n as u32).collect(),
            cnf: cnf.clone(),
            dnf: dnf.clone(),
            dnf_present: true,
        };
        let cand_lits: Vec<Lit> = (0..nf).map(|i| Lit::new(i as u32 + 1, cand >> i & 1 == 1)).collect();
        let holds = |y: u32| {
            let m: Vec<bool> = std::iter::once(false)
                .chain((0..nf).map(|i| cand >> i & 1 == 1))
                .chain((0..ni).map(|i| y >> i & 1 == 1))
                .collect();
            cnf.iter().all(|c| c.satisfied_by(&m)) && dnf.iter().any(|c| c.cube_holds(&m))
        };
        let want = if forall { (0..1u32 << ni).all(holds) } else { (0..1u32 << ni).any(holds) };
        prop_assert_eq!(check_2qbf(&q, &cand_lits, &SolverConfig::default()).unwrap(), want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn semantics_nest((af, x) in with_expr(5)) {
        let cfg = SolverConfig::default();
        let ext = |s| extensions(&encode(&af, &x, s).unwrap(), &cfg).unwrap();
        let (cf, adm, com, stb, prf) = (
            ext(SemanticsId::ConflictFree),
            ext(SemanticsId::Admissible),
            ext(SemanticsId::Complete),
            ext(SemanticsId::Stable),
            ext(SemanticsId::Preferred),
        );
        for (small, big) in [(&stb, &prf), (&prf, &com), (&com, &adm), (&adm, &cf)] {
            prop_assert!(small.iter().all(|e| big.contains(e)));
        }
        prop_assert!(ext(SemanticsId::SemiStable).iter().all(|e| prf.contains(e)));
        prop_assert!(ext(SemanticsId::Stage).iter().all(|e| cf.contains(e)));
    }

    #[test]
    fn acceptance_matches_oracle((af, x) in with_expr(4), sem in prop::sample::select(SemanticsId::ALL.to_vec())) {
        let cfg = SolverConfig::default();
        for a in af.arguments() {
            for mode in [Mode::Credulous, Mode::Skeptical] {
                prop_assert_eq!(
                    decide(&af, &x, sem, &a, mode, &cfg).unwrap(),
                    oracle_accept(&af, sem, &a, mode).unwrap(),
                    "{} {} {:?}", sem, a.name, mode
                );
            }
        }
    }

    #[test]
    fn provenance_is_total_and_local((af, x) in with_expr(6), sem in prop::sample::select(SemanticsId::ALL.to_vec())) {
        let enc = encode(&af, &x, sem).unwrap();
        let (clauses, prov) = enc.matrix_clauses();
        prop_assert_eq!(clauses.len(), prov.len());
        prop_assert!(prov.iter().all(|p| p.node < x.len() && p.tag <= 41));
        prop_assert_eq!(enc.provenance_map().lines().count(), clauses.len());
        // Linear in the expression for fixed width.
        let k = x.width() as usize;
        prop_assert!(clauses.len() <= 64 * x.len() * k * k, "{} clauses, {} nodes, k={}", clauses.len(), x.len(), k);
    }
}
