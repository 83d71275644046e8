use dendrite_core::config::{content_hash, export_config, parse_config, AnalysisConfig};
use dendrite_core::examples::{by_name, families, names, random_system};
use dendrite_core::{Error, PLSelfMap, Rational};
use proptest::prelude::*;

fn round_trip(name: &str, f: &PLSelfMap) {
    let mut analysis = AnalysisConfig::default();
    analysis.horizon = Some(77);
    analysis.mesh = Some(Rational::new(1, 9));
    let text = export_config(Some(name), f, &analysis);
    let back = parse_config(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
    assert_eq!(back.name.as_deref(), Some(name));
    assert_eq!(back.analysis, analysis);
    assert_eq!(back.map.vertex_images(), f.vertex_images(), "{name}");
    assert_eq!(back.map.plans(), f.plans(), "{name}");
    assert_eq!(content_hash(&back.map), content_hash(f));
    assert_eq!(export_config(Some(name), &back.map, &back.analysis), text);
}

#[test]
fn every_example_round_trips() {
    for n in names() {
        let fam = families().into_iter().find(|f| f.name == n);
        let levels: Vec<u64> = match fam {
            Some(f) if f.name == "random" => vec![0, 1, 7],
            Some(f) => vec![f.min_level, f.min_level + 1, 4.min(f.max_level)],
            None => vec![1],
        };
        for l in levels {
            let s = by_name(n, l).unwrap();
            round_trip(&s.spec(), &s.map);
        }
    }
}

#[test]
fn hash_ignores_the_name_but_not_the_map() {
    let a = by_name("tent", 1).unwrap().map;
    let b = by_name("bump", 1).unwrap().map;
    let ta = parse_config(&export_config(Some("x"), &a, &AnalysisConfig::default())).unwrap();
    let tb = parse_config(&export_config(Some("y"), &a, &AnalysisConfig::default())).unwrap();
    assert_eq!(content_hash(&ta.map), content_hash(&tb.map));
    assert_ne!(content_hash(&a), content_hash(&b));
    assert_eq!(content_hash(&a).len(), 64);
}

fn parse_err(text: &str) -> (usize, usize, String) {
    match parse_config(text) {
        Err(Error::Parse { line, col, msg }) => (line, col, msg),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn diagnostics_point_at_the_problem() {
    let (line, col, msg) = parse_err("[tree]\nvertices = a b\na b 0\n");
    assert_eq!(line, 3);
    assert_eq!(col, 5);
    assert!(msg.contains("positive"), "{msg}");

    let (line, _, msg) = parse_err("[tree]\nvertices = a b\na c 1\n");
    assert_eq!(line, 3);
    assert!(msg.contains('c'), "{msg}");

    let (line, _, _) = parse_err("[tree]\nvertices = a b\na b 1\n[map]\na -> @a\nb -> 3:1/2\n");
    assert_eq!(line, 6);

    let (line, _, _) = parse_err("[bogus]\n");
    assert_eq!(line, 1);

    let (line, _, msg) = parse_err("[tree]\nvertices = a b\na b 1\n[map]\na -> @a\nb -> @b\n[analysis]\nhorizon = lots\n");
    assert_eq!(line, 8);
    assert!(msg.contains("lots"), "{msg}");
}

#[test]
fn discontinuous_maps_are_rejected() {
    let text = "[tree]\nvertices = a b\na b 1\n[map]\na -> @a\nb -> @b\n0 : 0=@a, 1/2=@b, 1=@a\n";
    match parse_config(text) {
        Err(Error::InvalidMap(m)) | Err(Error::Parse { msg: m, .. }) => assert!(m.contains('b'), "{m}"),
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn missing_plan_is_linear() {
    let c = parse_config("[tree]\nvertices = a b\na b 2\n[map]\na -> @b\nb -> @a\n").unwrap();
    let f = &c.map;
    let p = dendrite_core::TreePoint::Edge { edge: 0, t: Rational::new(1, 4) };
    assert_eq!(f.apply(&p), dendrite_core::TreePoint::Edge { edge: 0, t: Rational::new(3, 4) });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_systems_round_trip(seed in any::<u64>(), n in 2usize..9, bp in 1usize..6) {
        let f = random_system(seed, n, bp).unwrap();
        round_trip(&format!("random {seed}"), &f);
    }
}
