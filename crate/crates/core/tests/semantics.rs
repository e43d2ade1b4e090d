//! Encodings against the brute-force oracle.

mod common;

use cwsat::af::{Af, Extension, Oracle, SemanticsId};
use cwsat::encoder::{encode, encode_with, EncodeOptions, Variant};
use cwsat::kexpr::{parse_kexpr, search_expression, trivial_expression, KExpr};
use cwsat::solver::{extensions, SolverConfig};

use common::{af_from_code, FIG2};

fn expressions(af: &Af) -> Vec<KExpr> {
    let mut xs = vec![trivial_expression(af).unwrap()];
    if let Some(x) = search_expression(af, af.len(), 100_000).unwrap() {
        xs.push(x);
    }
    xs
}

fn mismatches(af: &Af, x: &KExpr, variant: Variant) -> Vec<(SemanticsId, Vec<Extension>, Vec<Extension>)> {
    let oracle = Oracle::new(af).unwrap();
    let mut out = Vec::new();
    for sem in SemanticsId::ALL {
        let enc = encode_with(af, x, sem, EncodeOptions { variant }).unwrap();
        let got = extensions(&enc, &SolverConfig::default()).unwrap();
        let want = oracle.enumerate(sem);
        if got != want {
            out.push((sem, got, want));
        }
    }
    out
}

#[test]
fn running_example_counts() {
    let af = Af::from_names(&["z", "o", "u", "r"], &[("z", "o"), ("u", "o"), ("u", "r"), ("r", "u")]);
    let x = parse_kexpr(FIG2).unwrap();
    assert!(mismatches(&af, &x, Variant::Corrected).is_empty());
    let counts: Vec<usize> = SemanticsId::ALL
        .iter()
        .map(|&s| extensions(&encode(&af, &x, s).unwrap(), &SolverConfig::default()).unwrap().len())
        .collect();
    // cf adm com stb prf sst stg
    assert_eq!(counts, vec![8, 6, 3, 2, 2, 2, 2]);
}

#[test]
fn all_three_argument_frameworks() {
    for code in 0..(1u64 << 6) {
        let af = af_from_code(3, code);
        for x in expressions(&af) {
            let bad = mismatches(&af, &x, Variant::Corrected);
            assert!(bad.is_empty(), "code {code} {x}: {bad:?}");
        }
    }
}

fn literal_variant_disagrees(apx: &str, x: &str, sem: SemanticsId) {
    let af = cwsat::af::parse_apx(apx).unwrap();
    let x = parse_kexpr(x).unwrap();
    let literal = extensions(&encode_with(&af, &x, sem, EncodeOptions { variant: Variant::Literal }).unwrap(), &SolverConfig::default()).unwrap();
    let fixed = extensions(&encode(&af, &x, sem).unwrap(), &SolverConfig::default()).unwrap();
    let want = Oracle::new(&af).unwrap().enumerate(sem);
    assert_eq!(fixed, want);
    assert_ne!(literal, want);
}

#[test]
fn attack_rule_needs_defeat_guard() {
    // The second edge re-reads the first as an attack although the
    // attacker is already defeated.
    literal_variant_disagrees("arg(a). arg(b). att(a,b). att(b,a).", "e(2,1,e(1,2,u(1(a),2(b))))", SemanticsId::Admissible);
}

#[test]
fn defence_rule_accepts_defeat_below() {
    literal_variant_disagrees(
        "arg(a). arg(b). arg(c). att(a,b). att(a,c). att(b,a).",
        "r(2->1,e(1,2,u(e(2,1,e(1,2,u(1(a),2(b)))),2(c))))",
        SemanticsId::Complete,
    );
}

#[test]
fn backward_defeat_keeps_own_edge_under_relabel() {
    literal_variant_disagrees(
        "arg(a). arg(b). arg(c). att(a,c). att(b,a).",
        "r(3->1,r(2->1,e(2,1,e(1,3,u(1(a),u(2(b),3(c)))))))",
        SemanticsId::Complete,
    );
}

#[test]
fn range_inclusion_is_per_argument() {
    // Per-color d -> d* at the root misses range lost inside a color class.
    literal_variant_disagrees(
        "arg(a). arg(b). arg(c). att(a,b). att(b,c). att(c,a).",
        "r(3->1,r(2->1,e(3,1,e(1,2,u(1(a),e(2,3,u(2(b),3(c))))))))",
        SemanticsId::Stage,
    );
}

#[test]
fn witnesses_on_three_argument_frameworks() {
    use cwsat::witness::{build_witness, verify_witness};
    let mut worst = std::collections::BTreeMap::new();
    for code in 0..(1u64 << 6) {
        let af = af_from_code(3, code);
        for x in expressions(&af) {
            for sem in SemanticsId::ALL {
                let enc = encode(&af, &x, sem).unwrap();
                let w = build_witness(&enc, &x).unwrap();
                let r = verify_witness(&enc, &w);
                assert!(r.ok(), "{sem} {x}: {r}");
                let e = worst.entry(sem).or_insert((0, 0));
                if w.colors_used > e.0 {
                    *e = (w.colors_used, x.width());
                }
            }
        }
    }
    println!("{worst:?}");
}
