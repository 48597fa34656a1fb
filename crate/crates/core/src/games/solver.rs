//! Explicit game graphs solved by a synchronous greatest-fixpoint iteration.
//!
//! A position is dead at stage 0 when the winning condition fails, and dead
//! at stage `s` when Spoiler has a move all of whose answers lead to
//! positions dead before `s`. Positions never killed are Duplicator wins.
//! For bounded games the graph is acyclic and this is backward induction.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::games::spec::{check_pairs, check_worlds, GameFamily, GameSpec, Move, Side};
use crate::structure::{Elem, Structure};

pub const DEFAULT_POSITION_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Position {
    /// Set of chosen pairs (sorted) and rounds played.
    Ef {
        pairs: Vec<(Elem, Elem)>,
        round: usize,
    },
    /// Pebble placement; `round` counts rounds in the bounded variant.
    Pebble {
        placement: Vec<Option<(Elem, Elem)>>,
        round: Option<usize>,
    },
    /// Current worlds and rounds played.
    Modal { a: Elem, b: Elem, round: usize },
}

impl Position {
    /// The chosen pairs, in the order used for condition checks.
    pub fn pairs(&self) -> Vec<(Elem, Elem)> {
        match self {
            Position::Ef { pairs, .. } => pairs.clone(),
            Position::Pebble { placement, .. } => placement.iter().flatten().copied().collect(),
            Position::Modal { a, b, .. } => vec![(*a, *b)],
        }
    }

    pub fn round(&self) -> Option<usize> {
        match self {
            Position::Ef { round, .. } | Position::Modal { round, .. } => Some(*round),
            Position::Pebble { round, .. } => *round,
        }
    }

    pub fn describe(&self, a: &Structure, b: &Structure) -> String {
        let pair = |(x, y): (Elem, Elem)| format!("({},{})", a.elem_name(x), b.elem_name(y));
        match self {
            Position::Ef { pairs, round } => {
                let ps: Vec<String> = pairs.iter().map(|&p| pair(p)).collect();
                format!("round {round} {{{}}}", ps.join(","))
            }
            Position::Pebble { placement, round } => {
                let mut s = String::new();
                if let Some(r) = round {
                    let _ = write!(s, "round {r} ");
                }
                let ps: Vec<String> = placement
                    .iter()
                    .enumerate()
                    .filter_map(|(i, p)| p.map(|p| format!("{}:{}", i + 1, pair(p))))
                    .collect();
                let _ = write!(s, "[{}]", ps.join(","));
                s
            }
            Position::Modal { a: x, b: y, round } => format!("round {round} {}", pair((*x, *y))),
        }
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub pos: Position,
    pub ok: bool,
    /// Spoiler moves with Duplicator's answers and the resulting nodes.
    pub moves: Vec<(Move, Vec<(Elem, NodeId)>)>,
}

/// Outcome of a solved game, keeping the whole reachable game graph.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub spec: GameSpec,
    pub duplicator_wins: bool,
    pub(crate) nodes: Vec<Node>,
    pub(crate) index: HashMap<Position, NodeId>,
    pub(crate) stage: Vec<Option<usize>>,
}

fn elems_of(s: &Structure) -> std::ops::Range<Elem> {
    s.elems()
}

fn sides(spec: &GameSpec) -> &'static [Side] {
    if spec.mode.spoiler_plays_both() {
        &[Side::A, Side::B]
    } else {
        &[Side::A]
    }
}

fn orient(side: Side, mine: Elem, theirs: Elem) -> (Elem, Elem) {
    match side {
        Side::A => (mine, theirs),
        Side::B => (theirs, mine),
    }
}

/// Successor positions of `pos`, each with its condition status.
type Expansion = Vec<(Move, Vec<(Elem, Position, bool)>)>;

fn expand(spec: &GameSpec, a: &Structure, b: &Structure, pos: &Position) -> Expansion {
    let mut out = Vec::new();
    let structure = |side: Side| if side == Side::A { a } else { b };
    match pos {
        Position::Ef { pairs, round } => {
            if *round >= spec.k {
                return out;
            }
            for &side in sides(spec) {
                for x in elems_of(structure(side)) {
                    let mv = Move {
                        side,
                        pebble: None,
                        relation: None,
                        elem: x,
                    };
                    let mut answers = Vec::new();
                    for y in elems_of(structure(side.other())) {
                        let p = orient(side, x, y);
                        let mut next = pairs.clone();
                        let ok = match next.binary_search(&p) {
                            Ok(_) => true,
                            Err(at) => {
                                next.insert(at, p);
                                check_pairs(a, b, &next, spec.mode, Some(at)).is_none()
                            }
                        };
                        answers.push((
                            y,
                            Position::Ef {
                                pairs: next,
                                round: round + 1,
                            },
                            ok,
                        ));
                    }
                    out.push((mv, answers));
                }
            }
        }
        Position::Pebble { placement, round } => {
            if let (Some(r), Some(limit)) = (round, spec.rounds) {
                if *r >= limit {
                    return out;
                }
            }
            for &side in sides(spec) {
                for p in 0..spec.k {
                    for x in elems_of(structure(side)) {
                        let mv = Move {
                            side,
                            pebble: Some(p),
                            relation: None,
                            elem: x,
                        };
                        let mut answers = Vec::new();
                        for y in elems_of(structure(side.other())) {
                            let mut next = placement.clone();
                            next[p] = Some(orient(side, x, y));
                            let pairs: Vec<(Elem, Elem)> = next.iter().flatten().copied().collect();
                            let focus = next[..p].iter().flatten().count();
                            let ok = check_pairs(a, b, &pairs, spec.mode, Some(focus)).is_none();
                            let pos = Position::Pebble {
                                placement: next,
                                round: round.map(|r| r + 1),
                            };
                            answers.push((y, pos, ok));
                        }
                        out.push((mv, answers));
                    }
                }
            }
        }
        Position::Modal {
            a: wa,
            b: wb,
            round,
        } => {
            if *round >= spec.k {
                return out;
            }
            let binaries: Vec<usize> = a.vocab().of_arity(2).collect();
            for &side in sides(spec) {
                let (mine, theirs) = if side == Side::A {
                    (*wa, *wb)
                } else {
                    (*wb, *wa)
                };
                for &r in &binaries {
                    let responses = structure(side.other()).successors(r, theirs);
                    for x in structure(side).successors(r, mine) {
                        let mv = Move {
                            side,
                            pebble: None,
                            relation: Some(r),
                            elem: x,
                        };
                        let answers = responses
                            .iter()
                            .map(|&y| {
                                let (na, nb) = orient(side, x, y);
                                let ok = check_worlds(a, b, na, nb, spec.mode).is_none();
                                (
                                    y,
                                    Position::Modal {
                                        a: na,
                                        b: nb,
                                        round: round + 1,
                                    },
                                    ok,
                                )
                            })
                            .collect();
                        out.push((mv, answers));
                    }
                }
            }
        }
    }
    out
}

fn initial(spec: &GameSpec, a: &Structure, b: &Structure) -> (Position, bool) {
    match spec.family {
        GameFamily::Ef => (
            Position::Ef {
                pairs: Vec::new(),
                round: 0,
            },
            true,
        ),
        GameFamily::Pebble => {
            let round = spec.rounds.map(|_| 0);
            (
                Position::Pebble {
                    placement: vec![None; spec.k],
                    round,
                },
                true,
            )
        }
        GameFamily::Modal => {
            let (pa, pb) = (a.point().expect("validated"), b.point().expect("validated"));
            let ok = check_worlds(a, b, pa, pb, spec.mode).is_none();
            (
                Position::Modal {
                    a: pa,
                    b: pb,
                    round: 0,
                },
                ok,
            )
        }
    }
}

pub fn solve(spec: GameSpec, a: &Structure, b: &Structure) -> Result<Verdict> {
    solve_with_cap(spec, a, b, DEFAULT_POSITION_CAP)
}

pub fn solve_with_cap(spec: GameSpec, a: &Structure, b: &Structure, cap: usize) -> Result<Verdict> {
    spec.validate(a, b)?;
    let (start, ok) = initial(&spec, a, b);
    let mut nodes = vec![Node {
        pos: start.clone(),
        ok,
        moves: Vec::new(),
    }];
    let mut index = HashMap::new();
    index.insert(start, 0);
    let mut queue = VecDeque::from([0]);
    while let Some(id) = queue.pop_front() {
        if !nodes[id].ok {
            continue;
        }
        let expansion = expand(&spec, a, b, &nodes[id].pos);
        let mut moves = Vec::with_capacity(expansion.len());
        for (mv, answers) in expansion {
            let mut targets = Vec::with_capacity(answers.len());
            for (y, pos, ok) in answers {
                let child = match index.get(&pos) {
                    Some(&c) => c,
                    None => {
                        let c = nodes.len();
                        if c >= cap {
                            return Err(Error::ResourceLimit(format!(
                                "game graph exceeds {cap} positions"
                            )));
                        }
                        index.insert(pos.clone(), c);
                        nodes.push(Node {
                            pos,
                            ok,
                            moves: Vec::new(),
                        });
                        queue.push_back(c);
                        c
                    }
                };
                targets.push((y, child));
            }
            moves.push((mv, targets));
        }
        nodes[id].moves = moves;
    }
    let stage = stages(&nodes);
    Ok(Verdict {
        spec,
        duplicator_wins: stage[0].is_none(),
        nodes,
        index,
        stage,
    })
}

fn stages(nodes: &[Node]) -> Vec<Option<usize>> {
    let mut stage: Vec<Option<usize>> = nodes
        .iter()
        .map(|n| if n.ok { None } else { Some(0) })
        .collect();
    let mut open: Vec<NodeId> = (0..nodes.len()).filter(|&n| nodes[n].ok).collect();
    let mut s = 1;
    loop {
        let killed: Vec<NodeId> = open
            .iter()
            .copied()
            .filter(|&n| {
                nodes[n].moves.iter().any(|(_, answers)| {
                    answers
                        .iter()
                        .all(|&(_, c)| stage[c].is_some_and(|t| t < s))
                })
            })
            .collect();
        if killed.is_empty() {
            return stage;
        }
        for &n in &killed {
            stage[n] = Some(s);
        }
        open.retain(|n| stage[*n].is_none());
        s += 1;
    }
}

impl Verdict {
    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn position(&self, n: NodeId) -> &Position {
        &self.nodes[n].pos
    }

    pub fn lookup(&self, pos: &Position) -> Option<NodeId> {
        self.index.get(pos).copied()
    }

    /// `None` while Duplicator wins from `n`; otherwise the number of rounds
    /// Spoiler needs (0 when the condition already fails).
    pub fn stage(&self, n: NodeId) -> Option<usize> {
        self.stage[n]
    }

    pub fn condition_holds(&self, n: NodeId) -> bool {
        self.nodes[n].ok
    }

    pub fn moves(&self, n: NodeId) -> impl Iterator<Item = &Move> {
        self.nodes[n].moves.iter().map(|(m, _)| m)
    }

    pub(crate) fn answers(&self, n: NodeId, mv: &Move) -> Option<&[(Elem, NodeId)]> {
        self.nodes[n]
            .moves
            .iter()
            .find(|(m, _)| m == mv)
            .map(|(_, ans)| ans.as_slice())
    }

    /// Spoiler's optimal move: the first move (canonical order) forcing a
    /// position that dies strictly earlier.
    pub fn spoiler_move(&self, n: NodeId) -> Option<Move> {
        let s = self.stage[n]?;
        if s == 0 {
            return None;
        }
        self.nodes[n]
            .moves
            .iter()
            .find(|(_, ans)| {
                ans.iter()
                    .all(|&(_, c)| self.stage[c].is_some_and(|t| t < s))
            })
            .map(|(m, _)| *m)
    }

    /// Duplicator's answer: the first answer staying in the winning region,
    /// or else the one that survives longest.
    pub fn duplicator_answer(&self, n: NodeId, mv: &Move) -> Option<(Elem, NodeId)> {
        let answers = self.answers(n, mv)?;
        answers
            .iter()
            .find(|&&(_, c)| self.stage[c].is_none())
            .or_else(|| {
                answers
                    .iter()
                    .max_by_key(|&&(_, c)| (self.stage[c], std::cmp::Reverse(c)))
            })
            .copied()
    }

    /// Reachable winning positions with Duplicator's answer to each move.
    pub fn duplicator_strategy(&self) -> Vec<(NodeId, Move, Elem)> {
        let mut out = Vec::new();
        if !self.duplicator_wins {
            return out;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for (mv, _) in &self.nodes[n].moves {
                let (y, c) = self
                    .duplicator_answer(n, mv)
                    .expect("winning positions have answers");
                out.push((n, *mv, y));
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        out.sort_by_key(|(n, _, _)| *n);
        out
    }

    /// Spoiler's move at every losing position reachable under it.
    pub fn spoiler_strategy(&self) -> Vec<(NodeId, Move)> {
        let mut out = Vec::new();
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            let Some(mv) = self.spoiler_move(n) else {
                continue;
            };
            out.push((n, mv));
            for &(_, c) in self.answers(n, &mv).expect("own move") {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        out.sort_by_key(|(n, _)| *n);
        out
    }

    /// Dead positions with their stages.
    pub fn stage_table(&self) -> Vec<(NodeId, usize)> {
        self.stage
            .iter()
            .enumerate()
            .filter_map(|(n, s)| s.map(|s| (n, s)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_structure;
    use crate::logic::Mode;

    fn order(n: usize) -> Structure {
        let names: Vec<String> = (0..n).map(|i| format!("o{i}")).collect();
        let mut text = format!("vocab E/2\nstructure L{n}\nelems {}\n", names.join(" "));
        for i in 0..n {
            for j in i + 1..n {
                text.push_str(&format!("rel E o{i} o{j}\n"));
            }
        }
        parse_structure(&text).unwrap()
    }

    fn clique(n: usize) -> Structure {
        let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let mut text = format!("vocab E/2\nstructure K{n}\nelems {}\n", names.join(" "));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    text.push_str(&format!("rel E c{i} c{j}\n"));
                }
            }
        }
        parse_structure(&text).unwrap()
    }

    #[test]
    fn linear_orders() {
        assert!(
            solve(GameSpec::ef(Mode::Full, 2), &order(3), &order(4))
                .unwrap()
                .duplicator_wins
        );
        assert!(
            !solve(GameSpec::ef(Mode::Full, 2), &order(2), &order(3))
                .unwrap()
                .duplicator_wins
        );
    }

    #[test]
    fn edge_and_loop() {
        let edge = parse_structure("vocab E/2\nstructure D\nelems v w\nrel E v w").unwrap();
        let lp = parse_structure("vocab E/2\nstructure L\nelems u\nrel E u u").unwrap();
        let v = solve(GameSpec::ef(Mode::Existential, 2), &edge, &lp).unwrap();
        assert!(!v.duplicator_wins);
        // the loop on u is not reflected by v, so one round suffices
        assert_eq!(v.stage(0), Some(1));
        for k in 1..=3 {
            assert!(
                solve(GameSpec::ef(Mode::ExistentialPositive, k), &edge, &lp)
                    .unwrap()
                    .duplicator_wins
            );
        }
    }

    #[test]
    fn pebbles_on_cliques() {
        assert!(
            solve(GameSpec::pebble(Mode::Full, 2), &clique(2), &clique(3))
                .unwrap()
                .duplicator_wins
        );
        assert!(
            !solve(GameSpec::pebble(Mode::Full, 3), &clique(2), &clique(3))
                .unwrap()
                .duplicator_wins
        );
    }

    #[test]
    fn modal_missing_successor() {
        let a =
            parse_structure("vocab P/1 R/2\nstructure A\nelems a c\nrel R a c\npoint a").unwrap();
        let b = parse_structure("vocab P/1 R/2\nstructure B\nelems b\npoint b").unwrap();
        let v = solve(GameSpec::modal(Mode::Existential, 1), &a, &b).unwrap();
        assert!(!v.duplicator_wins);
        assert_eq!(v.stage(0), Some(1));
    }

    #[test]
    fn identical_structures_duplicator_copies() {
        let s = order(3);
        for mode in Mode::ALL {
            for spec in [
                GameSpec::ef(mode, 2),
                GameSpec::pebble(mode, 2),
                GameSpec::pebble_bounded(mode, 2, 3),
            ] {
                let v = solve(spec, &s, &s).unwrap();
                assert!(v.duplicator_wins);
                assert!(!v.duplicator_strategy().is_empty());
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let e = order(2);
        let p = parse_structure("vocab P/1\nstructure P\nelems a").unwrap();
        assert!(matches!(
            solve(GameSpec::ef(Mode::Full, 1), &e, &p),
            Err(Error::VocabularyMismatch(_))
        ));
        assert!(matches!(
            solve(GameSpec::modal(Mode::Full, 1), &e, &e),
            Err(Error::MissingPoint)
        ));
        assert!(matches!(
            solve_with_cap(GameSpec::ef(Mode::Full, 3), &order(4), &order(4), 10),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn spoiler_has_no_move_in_empty_structure() {
        let empty = parse_structure("vocab E/2\nstructure Z").unwrap();
        let v = solve(GameSpec::ef(Mode::Existential, 2), &empty, &order(2)).unwrap();
        assert!(v.duplicator_wins);
        let v = solve(GameSpec::ef(Mode::Full, 2), &empty, &order(2)).unwrap();
        assert!(!v.duplicator_wins);
    }
}
