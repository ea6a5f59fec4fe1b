mod common;

use common::random_graph;
use crystalwalk::lattice::{
    load_graph, load_graph_str, parse_params, parse_probability, save_graph, save_graph_string,
    validate, ViolationKind,
};
use crystalwalk::spectral::invariant_measure;
use crystalwalk::{Builtin, Error, QuotientGraph};
use proptest::prelude::*;

#[test]
fn simple_builtins_are_valid() {
    for b in Builtin::ALL {
        let g = b.simple();
        assert!(validate(&g).is_empty(), "{b}: {}", validate(&g));
    }
    let sq = Builtin::Square.simple();
    assert_eq!(sq.n_vertices(), 1);
    assert_eq!(sq.edges().len(), 4);
    assert!(sq.probabilities().iter().all(|&p| p == 0.25));
    assert_eq!(Builtin::Hexagonal.simple().n_vertices(), 2);
    assert_eq!(Builtin::Triangular.simple().edges().len(), 6);
}

#[test]
fn builtin_parameter_errors() {
    let bad = parse_params("alpha=0.5,alpha_p=0.5,beta=0.5,beta_p=0.5").unwrap();
    assert!(matches!(Builtin::Square.build(&bad), Err(Error::Params(_))));
    let missing = parse_params("alpha=0.5,alpha_p=0.5").unwrap();
    assert!(matches!(
        Builtin::Square.build(&missing),
        Err(Error::Params(_))
    ));
    let negative = parse_params("alpha=-0.1,alpha_p=0.6,beta=0.25,beta_p=0.25").unwrap();
    assert!(matches!(
        Builtin::Square.build(&negative),
        Err(Error::Params(_))
    ));
    let unknown = parse_params("alpha=0.25,alpha_p=0.25,beta=0.25,beta_p=0.25,gamma=0").unwrap();
    assert!(matches!(
        Builtin::Square.build(&unknown),
        Err(Error::Params(_))
    ));
    assert!(parse_params("alpha").is_err());
    assert!(parse_params("alpha=1,alpha=2").is_err());
    assert!("cubic".parse::<Builtin>().is_err());
    assert_eq!("hexagonal".parse::<Builtin>().unwrap(), Builtin::Hexagonal);
}

#[test]
fn rational_literals() {
    assert_eq!(parse_probability("1/3").unwrap(), 1.0 / 3.0);
    assert_eq!(parse_probability(" 0.25 ").unwrap(), 0.25);
    assert!(parse_probability("1/0").is_err());
    assert!(parse_probability("x").is_err());
    let p = parse_params("alpha=1/3, beta=2/3").unwrap();
    assert_eq!(p["alpha"], 1.0 / 3.0);
}

const HEX_DOC: &str = r#"{
  "dim": 2,
  "vertices": ["x2", "x1"],
  "edges": [
    {"id": "a", "from": "x1", "to": "x2", "translation": [1, 0], "p": "1/3", "inverse": "abar"},
    {"id": "abar", "from": "x2", "to": "x1", "translation": [-1, 0], "p": "1/3", "inverse": "a"},
    {"id": "b", "from": "x1", "to": "x2", "translation": [0, 0], "p": "1/3", "inverse": "bbar"},
    {"id": "bbar", "from": "x2", "to": "x1", "translation": [0, 0], "p": "1/3", "inverse": "b"},
    {"id": "c", "from": "x1", "to": "x2", "translation": [0, 1], "p": 0.3333333333333333, "inverse": "cbar"},
    {"id": "cbar", "from": "x2", "to": "x1", "translation": [0, -1], "p": "1/3", "inverse": "c"}
  ]
}"#;

#[test]
fn document_parsing() {
    let g = load_graph_str(HEX_DOC).unwrap();
    assert_eq!(g.vertices(), ["x1", "x2"]);
    assert_eq!(g.edges()[0].probability, 1.0 / 3.0);
    assert_eq!(g.edges()[g.edges()[0].inverse].id, "abar");
    assert!(validate(&g).is_empty());
}

#[test]
fn document_errors() {
    let wrong_dim = HEX_DOC.replacen("[1, 0]", "[1, 0, 0]", 1);
    assert!(matches!(
        load_graph_str(&wrong_dim),
        Err(Error::DimensionMismatch {
            expected: 2,
            found: 3,
            ..
        })
    ));
    let dangling = HEX_DOC.replacen("\"inverse\": \"abar\"", "\"inverse\": \"zz\"", 1);
    assert!(matches!(
        load_graph_str(&dangling),
        Err(Error::DanglingInverse { .. })
    ));
    let unknown = HEX_DOC.replacen("\"from\": \"x1\"", "\"from\": \"x9\"", 1);
    assert!(matches!(
        load_graph_str(&unknown),
        Err(Error::UnknownVertex { .. })
    ));
    assert!(matches!(load_graph_str("{"), Err(Error::Parse { .. })));
    assert!(matches!(
        load_graph_str("{\"dim\": 0}"),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn file_round_trip() {
    let dir = std::env::temp_dir().join(format!("crystalwalk-lattice-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("hex.json");
    let g = common::hex_drift();
    save_graph(&g, &path).unwrap();
    assert_eq!(load_graph(&path).unwrap(), g);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn validation_messages() {
    let sq = Builtin::Square.simple();

    let dead = sq.with_probabilities(&[0.0, 0.0, 0.5, 0.5]);
    let r = validate(&dead);
    assert!(r.contains(ViolationKind::PairProbability, "e1"));
    assert!(r.to_string().contains("p(e)+p(ē)>0 violated at e1"));

    let short = sq.with_probabilities(&[0.2, 0.2, 0.25, 0.25]);
    let r = validate(&short);
    assert!(r.contains(ViolationKind::RowSum, "x0"));
    assert!(r.to_string().contains("≠ 1 at x0"));

    let range = sq.with_probabilities(&[1.5, -0.5, 0.0, 0.0]);
    assert!(validate(&range).contains(ViolationKind::ProbabilityRange, "e1"));
}

#[test]
fn validation_structure() {
    let mut specs = Builtin::Square.simple().edge_specs();
    specs[1].translation = vec![1, 0];
    let g = QuotientGraph::new(2, vec!["x0".into()], specs).unwrap();
    assert!(validate(&g).contains(ViolationKind::InverseTranslation, "e1"));

    let mut specs = Builtin::Square.simple().edge_specs();
    specs[0].inverse = "e1".into();
    let g = QuotientGraph::new(2, vec!["x0".into()], specs).unwrap();
    assert!(validate(&g).contains(ViolationKind::SelfInverse, "e1"));

    // One-way hexagon: x2 can never return to x1.
    let hex = Builtin::Hexagonal.simple();
    let p: Vec<f64> = hex
        .edges()
        .iter()
        .map(|e| if e.origin == 0 { 1.0 / 3.0 } else { 0.0 })
        .collect();
    let r = validate(&hex.with_probabilities(&p));
    assert!(r.contains(ViolationKind::RowSum, "x2"));
    assert!(r.contains(ViolationKind::NotIrreducible, "x1"));

    let mut specs = Builtin::Square.simple().edge_specs();
    for s in &mut specs {
        s.p = 0.25;
    }
    let g = QuotientGraph::new(2, vec!["x0".into(), "y0".into()], specs).unwrap();
    assert!(validate(&g).contains(ViolationKind::Disconnected, "y0"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_graphs_validate(g in random_graph()) {
        prop_assert!(validate(&g).is_empty(), "{}", validate(&g));
    }

    #[test]
    fn document_round_trip(g in random_graph()) {
        let text = save_graph_string(&g);
        prop_assert_eq!(load_graph_str(&text).unwrap(), g);
    }

    #[test]
    fn reversal_consistency(g in random_graph()) {
        for (i, e) in g.edges().iter().enumerate() {
            let inv = &g.edges()[e.inverse];
            prop_assert_eq!(inv.inverse, i);
            prop_assert_eq!((inv.origin, inv.terminus), (e.terminus, e.origin));
            let neg: Vec<i64> = e.translation.iter().map(|t| -t).collect();
            prop_assert_eq!(&inv.translation, &neg);
        }
    }

    #[test]
    fn edge_measure_is_a_probability(g in random_graph()) {
        let m = invariant_measure(&g).unwrap();
        let total: f64 = g.edges().iter().map(|e| e.probability * m.get(e.origin)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(m.values.iter().all(|&v| v > 0.0));
    }
}
