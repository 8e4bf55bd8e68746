use proptest::prelude::*;

use patcfg::dsl::{parse_grammar, serialize_grammar};
use patcfg::equiv::{random_grammar, RandomGrammarConfig};
use patcfg::grammar::{FeatureValue, FeatureVector, Pattern, Specificity};

use FeatureValue::{Minus, Plus, Unbound};

const SLOTS: usize = 6;

fn value() -> impl Strategy<Value = FeatureValue> {
    prop_oneof![Just(Unbound), Just(Plus), Just(Minus)]
}

fn vector() -> impl Strategy<Value = FeatureVector> {
    prop::collection::vec(value(), SLOTS).prop_map(FeatureVector::from_values)
}

/// `general` binds a subset of what `specific` binds, to the same values.
fn subsumes(general: &FeatureVector, specific: &FeatureVector) -> bool {
    general.values().iter().zip(specific.values()).all(|(g, s)| *g == Unbound || g == s)
}

fn generalize(v: &FeatureVector, mask: &[bool]) -> FeatureVector {
    let values = v.values().iter().zip(mask).map(|(x, keep)| if *keep { *x } else { Unbound }).collect();
    FeatureVector::from_values(values)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn unify_commutes(a in vector(), b in vector()) {
        prop_assert_eq!(a.unify(&b).ok(), b.unify(&a).ok());
    }

    #[test]
    fn unify_is_idempotent(a in vector()) {
        prop_assert_eq!(a.unify(&a).ok(), Some(a.clone()));
    }

    #[test]
    fn unify_associates(a in vector(), b in vector(), c in vector()) {
        let left = a.unify(&b).ok().and_then(|ab| ab.unify(&c).ok());
        let right = b.unify(&c).ok().and_then(|bc| a.unify(&bc).ok());
        prop_assert_eq!(left, right);
    }

    #[test]
    fn unify_result_refines_both_inputs(a in vector(), b in vector()) {
        if let Ok(c) = a.unify(&b) {
            prop_assert!(subsumes(&a, &c));
            prop_assert!(subsumes(&b, &c));
        } else {
            let clash = a.values().iter().zip(b.values()).any(|(x, y)| *x != Unbound && *y != Unbound && x != y);
            prop_assert!(clash);
        }
    }

    #[test]
    fn unify_is_monotone(a in vector(), b in vector(), mask in prop::collection::vec(any::<bool>(), SLOTS)) {
        let general = generalize(&a, &mask);
        if let Ok(c) = a.unify(&b) {
            let g = general.unify(&b);
            prop_assert!(g.is_ok());
            prop_assert!(subsumes(&g.unwrap(), &c));
        }
    }

    #[test]
    fn unbound_is_the_identity(a in vector()) {
        prop_assert_eq!(a.unify(&FeatureVector::unbound(SLOTS)).ok(), Some(a.clone()));
    }
}

const AGREEMENT: &str = "
start S
feature NOMI
feature 3RD
feature SG
feature PL
feature FIN
feature 3SG
feature PAST
aggregate AGRS/AGRV:
  +NOMI+3RD+SG | +FIN+3SG
  +NOMI+3RD+PL | +FIN-3SG
  +NOMI-3RD | +FIN-3SG
  +NOMI | +FIN+PAST
lex n: x -> NP || NP <- x
";

fn sign(b: bool) -> FeatureValue {
    if b {
        Plus
    } else {
        Minus
    }
}

#[test]
fn agreement_table_accepts_exactly_the_listed_combinations() {
    let g = parse_grammar(AGREEMENT).unwrap();
    let r = g.registry();
    let mut accepted = 0;
    for bits in 0u32..128 {
        let bit = |i: u32| bits & (1 << i) != 0;
        let (nomi, third, sg, pl, fin, sg3, past) = (bit(0), bit(1), bit(2), bit(3), bit(4), bit(5), bit(6));
        let np = r.vector([("NOMI", sign(nomi)), ("3RD", sign(third)), ("SG", sign(sg)), ("PL", sign(pl))]).unwrap();
        let vp = r.vector([("FIN", sign(fin)), ("3SG", sign(sg3)), ("PAST", sign(past))]).unwrap();
        let expected = nomi && fin && ((third && sg && sg3) || (third && pl && !sg3) || (!third && !sg3) || past);
        let got = r.unify_aggregate("AGRS/AGRV", &np, &vp).is_ok();
        assert_eq!(got, expected, "NP {} VP {}", r.format_vector(&np), r.format_vector(&vp));
        accepted += usize::from(got);
    }
    assert!(accepted > 0 && accepted < 128);

    // a fully specified third person singular subject with a non-past
    // plural verb matches no row
    let np = r.vector([("NOMI", Plus), ("3RD", Plus), ("SG", Plus), ("PL", Minus)]).unwrap();
    let vp = r.vector([("FIN", Plus), ("3SG", Minus), ("PAST", Minus)]).unwrap();
    assert!(r.unify_aggregate("AGRS/AGRV", &np, &vp).is_err());
    // first person with a third singular verb fails as well
    let np = r.vector([("NOMI", Plus), ("3RD", Minus)]).unwrap();
    let vp = r.vector([("FIN", Plus), ("3SG", Plus), ("PAST", Minus)]).unwrap();
    assert!(r.unify_aggregate("AGRS/AGRV", &np, &vp).is_err());
}

#[test]
fn agreement_rows_are_tried_in_order() {
    let g = parse_grammar(AGREEMENT).unwrap();
    let r = g.registry();
    let np = r.vector([("NOMI", Plus)]).unwrap();
    let vp = r.vector([("FIN", Plus), ("PAST", Plus)]).unwrap();
    let (a, b) = r.unify_aggregate("AGRS/AGRV", &np, &vp).unwrap();
    assert_eq!(r.format_vector(&a), "+NOMI+3RD+SG");
    assert_eq!(r.format_vector(&b), "+FIN+3SG+PAST");
}

const HEADS: [Option<&str>; 3] = [None, Some("leave"), Some("house")];

/// Patterns over one skeleton, differing only in head constraints.
fn skeleton_variants() -> Vec<Pattern> {
    let mut text = String::from("start VP\n");
    let mut n = 0;
    for h1 in HEADS {
        for h2 in HEADS {
            let el = |h: Option<&str>, rest: &str| match h {
                Some(w) => format!("{w}:{rest}"),
                None => rest.to_string(),
            };
            let src = format!("{} {}", el(h1, "V:1"), el(h2, "NP:2"));
            text.push_str(&format!("pattern p{n}: {src} -> VP:1 || VP:1 <- V:1 NP:2\n"));
            n += 1;
        }
    }
    parse_grammar(&text).unwrap().patterns().to_vec()
}

#[test]
fn specificity_is_a_partial_order() {
    let ps = skeleton_variants();
    for p in &ps {
        assert_eq!(p.more_specific(p), Specificity::Equal);
        for q in &ps {
            let pq = p.more_specific(q);
            let qp = q.more_specific(p);
            let mirrored = match pq {
                Specificity::StrictlyMore => Specificity::StrictlyLess,
                Specificity::StrictlyLess => Specificity::StrictlyMore,
                other => other,
            };
            assert_eq!(qp, mirrored, "{} vs {}", p.id, q.id);
            if pq == Specificity::Equal {
                assert_eq!(p.source, q.source);
            }
            for r in &ps {
                if pq == Specificity::StrictlyMore && q.more_specific(r) == Specificity::StrictlyMore {
                    assert_eq!(p.more_specific(r), Specificity::StrictlyMore, "{} {} {}", p.id, q.id, r.id);
                }
            }
        }
    }
}

#[test]
fn specificity_examples() {
    let g = parse_grammar(
        "start VP
pattern p: leave:V:1 house:NP:2 -> VP:1 || VP:1 <- V:1 NP:2
pattern q: leave:V:1 NP:2 -> VP:1 || VP:1 <- V:1 NP:2
pattern r: take:V:1 a walk -> VP:1 || VP:1 <- V:1
pattern s: V:1 house:NP:2 -> VP:1 || VP:1 <- V:1 NP:2
",
    )
    .unwrap();
    let p = |id: &str| g.by_id(id).unwrap();
    assert_eq!(p("p").more_specific(p("q")), Specificity::StrictlyMore);
    assert_eq!(p("q").more_specific(p("p")), Specificity::StrictlyLess);
    assert_eq!(p("q").more_specific(p("r")), Specificity::Incomparable);
    assert_eq!(p("q").more_specific(p("s")), Specificity::Incomparable);
    assert_eq!(p("p").static_priority(), (2, 0));
    assert_eq!(p("r").static_priority(), (1, 2));
}

fn round_trips(text: &str) {
    let g = parse_grammar(text).unwrap();
    let once = serialize_grammar(&g);
    let g2 = parse_grammar(&once).unwrap_or_else(|e| panic!("{e:?}\n{once}"));
    assert!(g.same_as(&g2), "{once}");
    assert_eq!(serialize_grammar(&g2), once);
}

#[test]
fn fixtures_round_trip() {
    for name in ["figure1.pcfg", "ambiguity.pcfg", "integration.pcfg", "cycle.pcfg"] {
        let text = std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap();
        round_trips(&text);
    }
    round_trips(AGREEMENT);
}

#[test]
fn random_grammars_round_trip() {
    for seed in 0..200 {
        let (_, text) = random_grammar(seed, RandomGrammarConfig::default());
        round_trips(&text);
    }
}
