use arboreal::coalgebra::{
    build_bisim, build_ef, build_modal, build_positive_bisim, find_morphism, parse_coalgebra,
    serialize_coalgebra, verify_bisim, verify_positive_bisim, MorphismKind, DEFAULT_CARRIER_CAP,
};
use arboreal::games::{distinguish, replay, solve, GameFamily, GameSpec, Move, Side, Winner};
use arboreal::logic::{
    holds, modal_at, oracle_preserves, parse_formula, standard_translation, Mode,
};
use arboreal::{parse_structure, Error, Structure};

fn s(src: &str) -> Structure {
    parse_structure(src).unwrap()
}

fn order(n: usize) -> Structure {
    let mut src = format!("vocab E/2\nstructure L{n}\nelems");
    for i in 0..n {
        src.push_str(&format!(" c{i}"));
    }
    for i in 0..n {
        for j in i + 1..n {
            src.push_str(&format!("\nrel E c{i} c{j}"));
        }
    }
    s(&src)
}

fn clique(n: usize) -> Structure {
    let mut src = format!("vocab E/2\nstructure K{n}\nelems");
    for i in 0..n {
        src.push_str(&format!(" c{i}"));
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                src.push_str(&format!("\nrel E c{i} c{j}"));
            }
        }
    }
    s(&src)
}

const EDGE: &str = "vocab E/2\nstructure edge\nelems v w\nrel E v w";
const LOOP: &str = "vocab E/2\nstructure loop\nelems u\nrel E u u";

#[test]
fn linear_orders_need_rank_three() {
    let (l2, l3, l4) = (order(2), order(3), order(4));
    for (a, b) in [(&l3, &l4), (&l4, &l3)] {
        assert!(
            solve(GameSpec::ef(Mode::Full, 2), a, b)
                .unwrap()
                .duplicator_wins
        );
    }
    assert!(
        !solve(GameSpec::ef(Mode::Full, 3), &l3, &l4)
            .unwrap()
            .duplicator_wins
    );
    let f = distinguish(GameSpec::ef(Mode::Full, 2), &l3, &l2).unwrap();
    assert!(holds(&f, &l3).unwrap() && !holds(&f, &l2).unwrap());
    assert!(f.classify().rank <= 2);
}

#[test]
fn cliques_and_variable_count() {
    let (k2, k3) = (clique(2), clique(3));
    for mode in Mode::ALL {
        let two = GameSpec::pebble(mode, 2);
        assert!(solve(two, &k2, &k3).unwrap().duplicator_wins, "{mode}");
        assert!(solve(two, &k3, &k2).unwrap().duplicator_wins, "{mode}");
    }
    assert!(
        !solve(GameSpec::pebble(Mode::Full, 3), &k3, &k2)
            .unwrap()
            .duplicator_wins
    );
    assert!(
        !oracle_preserves(
            GameSpec::pebble(Mode::ExistentialPositive, 3).fragment(),
            &k3,
            &k2
        )
        .unwrap()
        .preserved
    );
}

#[test]
fn edge_and_loop() {
    let (edge, lp) = (s(EDGE), s(LOOP));
    for k in 1..=3 {
        assert!(
            solve(GameSpec::ef(Mode::ExistentialPositive, k), &edge, &lp)
                .unwrap()
                .duplicator_wins
        );
        assert!(
            solve(GameSpec::ef(Mode::Positive, k), &edge, &lp)
                .unwrap()
                .duplicator_wins
        );
    }
    let f = distinguish(GameSpec::ef(Mode::Existential, 1), &edge, &lp).unwrap();
    assert_eq!(f.to_string(), "E x1. !E(x1,x1)");

    let x = build_ef(&edge, 2, false, DEFAULT_CARRIER_CAP)
        .unwrap()
        .into_coalgebra();
    let y = build_ef(&lp, 2, false, DEFAULT_CARRIER_CAP)
        .unwrap()
        .into_coalgebra();
    assert!(find_morphism(MorphismKind::Hom, &x, &y).unwrap().is_some());
    assert!(find_morphism(MorphismKind::Pathwise, &x, &y)
        .unwrap()
        .is_none());
}

#[test]
fn spoiler_script_against_the_solver() {
    let (edge, lp) = (s(EDGE), s(LOOP));
    let v = solve(GameSpec::ef(Mode::Existential, 2), &edge, &lp).unwrap();
    let mv = Move {
        side: Side::A,
        pebble: None,
        relation: None,
        elem: 0,
    };
    let t = replay(&v, &edge, &lp, &[mv]).unwrap();
    assert_eq!(t.winner, Some(Winner::Spoiler));
    assert!(t.lines[0].starts_with("round 1: Spoiler plays v in A"));
    let bad = Move {
        side: Side::A,
        pebble: None,
        relation: None,
        elem: 7,
    };
    assert!(matches!(
        replay(&v, &edge, &lp, &[bad]),
        Err(Error::IllegalMove { round: 1, .. })
    ));
}

#[test]
fn modal_chains_by_depth() {
    let chain = |n: usize| {
        let mut src = format!("vocab R/2 p/1\nstructure C{n}\nelems");
        for i in 0..=n {
            src.push_str(&format!(" w{i}"));
        }
        for i in 0..n {
            src.push_str(&format!("\nrel R w{i} w{}", i + 1));
        }
        src.push_str("\npoint w0");
        s(&src)
    };
    let (c1, c2) = (chain(1), chain(2));
    assert!(
        solve(GameSpec::modal(Mode::Full, 1), &c1, &c2)
            .unwrap()
            .duplicator_wins
    );
    assert!(
        !solve(GameSpec::modal(Mode::Full, 2), &c2, &c1)
            .unwrap()
            .duplicator_wins
    );

    let f = parse_formula("<R> <R> true").unwrap();
    assert!(modal_at(&f, &c2, 0).unwrap() && !modal_at(&f, &c1, 0).unwrap());
    let st = standard_translation(&f, 1).unwrap();
    assert_eq!(st.classify().var_count, 2);

    let x = build_modal(&c2, 2, DEFAULT_CARRIER_CAP)
        .unwrap()
        .into_coalgebra();
    let back = parse_coalgebra(&serialize_coalgebra(&x)).unwrap();
    assert_eq!(serialize_coalgebra(&back), serialize_coalgebra(&x));
}

#[test]
fn bisimulation_witnesses() {
    let (l3, l4) = (order(3), order(4));
    let out = build_bisim(GameFamily::Ef, &l3, &l4, 2)
        .unwrap()
        .expect("equivalent at rank 2");
    assert!(verify_bisim(&out.span, &out.x, &out.y).ok);
    assert!(build_bisim(GameFamily::Ef, &order(2), &l3, 2)
        .unwrap()
        .is_none());

    let (edge, lp) = (s(EDGE), s(LOOP));
    let out = build_positive_bisim(GameFamily::Ef, &edge, &lp, 2)
        .unwrap()
        .expect("positive game is won");
    assert!(verify_positive_bisim(&out.witness, &out.x, &out.y).ok);
    assert!(matches!(
        build_bisim(GameFamily::Pebble, &edge, &lp, 2),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn malformed_inputs_are_rejected() {
    assert!(matches!(
        parse_structure("vocab E/2\nstructure x\nelems a\nrel E a b"),
        Err(Error::Parse { .. })
    ));
    assert!(matches!(
        parse_structure("vocab I/2\nstructure x\nelems a"),
        Err(Error::Parse { .. })
    ));
    assert!(matches!(
        parse_formula("E x1. (E(x1,x1)"),
        Err(Error::FormulaSyntax { .. })
    ));
    let (edge, f) = (s(EDGE), s("vocab F/2\nstructure f\nelems a"));
    assert!(matches!(
        solve(GameSpec::ef(Mode::Full, 1), &edge, &f),
        Err(Error::VocabularyMismatch(_))
    ));
    assert!(matches!(
        solve(GameSpec::modal(Mode::Full, 1), &edge, &edge),
        Err(Error::NonModalVocabulary | Error::MissingPoint)
    ));
}
