//! Round-by-round play against a solved game's positional strategies.

use crate::error::{Error, Result};
use crate::games::solver::{NodeId, Position, Verdict};
use crate::games::spec::{check_pairs, check_worlds, GameFamily, Move, Side};
use crate::structure::{Elem, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    Spoiler,
    Duplicator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub lines: Vec<String>,
    /// `None` when the script ended before the game did.
    pub winner: Option<Winner>,
}

pub struct GameSession<'a> {
    verdict: &'a Verdict,
    a: &'a Structure,
    b: &'a Structure,
    node: NodeId,
    round: usize,
    winner: Option<Winner>,
    lines: Vec<String>,
}

impl<'a> GameSession<'a> {
    pub fn new(verdict: &'a Verdict, a: &'a Structure, b: &'a Structure) -> Self {
        let mut s = GameSession {
            verdict,
            a,
            b,
            node: verdict.root(),
            round: 0,
            winner: None,
            lines: Vec::new(),
        };
        if !verdict.condition_holds(s.node) {
            let why = s.violation_text(s.node);
            s.finish(Winner::Spoiler, format!("{why}, Spoiler wins round 0"));
        } else {
            s.check_exhausted();
        }
        s
    }

    pub fn winner(&self) -> Option<Winner> {
        self.winner
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn position(&self) -> &Position {
        self.verdict.position(self.node)
    }

    pub fn legal_moves(&self) -> Vec<Move> {
        if self.winner.is_some() {
            return Vec::new();
        }
        self.verdict.moves(self.node).copied().collect()
    }

    /// Legal answers to `mv` in the current position.
    pub fn legal_answers(&self, mv: &Move) -> Vec<Elem> {
        self.verdict
            .answers(self.node, mv)
            .map(|ans| ans.iter().map(|&(y, _)| y).collect())
            .unwrap_or_default()
    }

    fn structure(&self, side: Side) -> &Structure {
        if side == Side::A {
            self.a
        } else {
            self.b
        }
    }

    pub fn describe_move(&self, mv: &Move) -> String {
        let mut s = format!(
            "{} in {}",
            self.structure(mv.side).elem_name(mv.elem),
            mv.side
        );
        if let Some(p) = mv.pebble {
            s = format!("pebble {} on {s}", p + 1);
        }
        if let Some(r) = mv.relation {
            s = format!("{s} along {}", self.a.vocab().name(r));
        }
        s
    }

    fn violation_text(&self, node: NodeId) -> String {
        let pos = self.verdict.position(node);
        let mode = self.verdict.spec.mode;
        let pairs = pos.pairs();
        let violation = match pos {
            Position::Modal { a, b, .. } => check_worlds(self.a, self.b, *a, *b, mode),
            _ => check_pairs(self.a, self.b, &pairs, mode, None),
        };
        violation
            .map(|v| v.describe(self.a, self.b, &pairs))
            .unwrap_or_else(|| "condition violated".into())
    }

    fn finish(&mut self, w: Winner, line: String) {
        self.lines.push(line);
        self.winner = Some(w);
    }

    fn check_exhausted(&mut self) {
        if self.winner.is_none() && self.verdict.moves(self.node).next().is_none() {
            let line = if self.verdict.spec.family == GameFamily::Modal
                && self.round < self.verdict.spec.k
            {
                "Spoiler has no legal move, Duplicator wins".to_string()
            } else {
                format!("Duplicator survives all {} rounds", self.round)
            };
            self.finish(Winner::Duplicator, line);
        }
    }

    fn check_legal(&self, mv: &Move) -> Result<()> {
        if self.winner.is_some() {
            return Err(Error::IllegalMove {
                round: self.round + 1,
                msg: "the game is over".into(),
            });
        }
        if mv.elem >= self.structure(mv.side).len() {
            return Err(Error::IllegalMove {
                round: self.round + 1,
                msg: format!("{} has no element #{}", mv.side, mv.elem),
            });
        }
        if self.verdict.answers(self.node, mv).is_none() {
            return Err(Error::IllegalMove {
                round: self.round + 1,
                msg: format!("{} is not a legal move", self.describe_move(mv)),
            });
        }
        Ok(())
    }

    fn advance(&mut self, mv: &Move, answer: Option<(Elem, NodeId)>) {
        self.round += 1;
        let r = self.round;
        let Some((y, child)) = answer else {
            let line = format!(
                "round {r}: Spoiler plays {}; Duplicator has no answer, Spoiler wins round {r}",
                self.describe_move(mv)
            );
            self.finish(Winner::Spoiler, line);
            return;
        };
        self.node = child;
        let answer_name = self.structure(mv.side.other()).elem_name(y);
        let head = format!(
            "round {r}: Spoiler plays {}; Duplicator answers {answer_name} in {}",
            self.describe_move(mv),
            mv.side.other()
        );
        if self.verdict.condition_holds(child) {
            self.lines.push(format!("{head}; condition holds"));
            self.check_exhausted();
        } else {
            let why = self.violation_text(child);
            self.lines.push(head);
            self.finish(Winner::Spoiler, format!("{why}, Spoiler wins round {r}"));
        }
    }

    /// A human Spoiler move; the engine answers with its strategy.
    pub fn spoiler_plays(&mut self, mv: Move) -> Result<()> {
        self.check_legal(&mv)?;
        let answer = self.verdict.duplicator_answer(self.node, &mv);
        self.advance(&mv, answer);
        Ok(())
    }

    /// The engine's Spoiler move: optimal when Spoiler wins, otherwise the
    /// first legal move.
    pub fn engine_spoiler_move(&self) -> Option<Move> {
        if self.winner.is_some() {
            return None;
        }
        self.verdict
            .spoiler_move(self.node)
            .or_else(|| self.verdict.moves(self.node).next().copied())
    }

    /// A human Duplicator answer to `mv`.
    pub fn duplicator_plays(&mut self, mv: Move, answer: Elem) -> Result<()> {
        self.check_legal(&mv)?;
        let answers = self.verdict.answers(self.node, &mv).expect("legal");
        let Some(&(y, child)) = answers.iter().find(|&&(y, _)| y == answer) else {
            return Err(Error::IllegalMove {
                round: self.round + 1,
                msg: "not a legal answer".into(),
            });
        };
        self.advance(&mv, Some((y, child)));
        Ok(())
    }

    pub fn status(&self) -> String {
        let pos = self.verdict.position(self.node).describe(self.a, self.b);
        let cond = if self.verdict.condition_holds(self.node) {
            let kind = if self.verdict.spec.mode.iso_condition() {
                "partial isomorphism"
            } else {
                "partial homomorphism"
            };
            format!("{kind} condition holds")
        } else {
            format!("condition violated: {}", self.violation_text(self.node))
        };
        let outcome = match self.winner {
            Some(Winner::Spoiler) => "; Spoiler has won",
            Some(Winner::Duplicator) => "; Duplicator has won",
            None => "",
        };
        format!("{} {}; {cond}{outcome}", self.verdict.spec, pos)
    }

    pub fn transcript(&self) -> Transcript {
        Transcript {
            lines: self.lines.clone(),
            winner: self.winner,
        }
    }
}

/// Plays Duplicator's strategy against a fixed Spoiler script.
pub fn replay(
    verdict: &Verdict,
    a: &Structure,
    b: &Structure,
    script: &[Move],
) -> Result<Transcript> {
    let mut session = GameSession::new(verdict, a, b);
    for mv in script {
        if session.winner().is_some() {
            break;
        }
        session.spoiler_plays(*mv)?;
    }
    let t = session.transcript();
    if verdict.duplicator_wins && t.winner == Some(Winner::Spoiler) {
        return Err(Error::Internal(
            "Duplicator's winning strategy reached a lost position".into(),
        ));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::solver::solve;
    use crate::games::spec::GameSpec;
    use crate::io::parse_structure;
    use crate::logic::Mode;

    fn mv(side: Side, elem: Elem) -> Move {
        Move {
            side,
            pebble: None,
            relation: None,
            elem,
        }
    }

    #[test]
    fn edge_to_loop_script() {
        let edge = parse_structure("vocab E/2\nstructure D\nelems v w\nrel E v w").unwrap();
        let lp = parse_structure("vocab E/2\nstructure L\nelems u\nrel E u u").unwrap();
        let v = solve(GameSpec::ef(Mode::Existential, 2), &edge, &lp).unwrap();
        let t = replay(&v, &edge, &lp, &[mv(Side::A, 0), mv(Side::A, 1)]).unwrap();
        assert_eq!(t.winner, Some(Winner::Spoiler));
        assert_eq!(
            t.lines.last().unwrap(),
            "E(u,u) in B but not E(v,v) in A, Spoiler wins round 1"
        );
        let err = replay(&v, &edge, &lp, &[mv(Side::B, 0)]).unwrap_err();
        assert!(matches!(err, Error::IllegalMove { round: 1, .. }));

        // without the loop, the collapse is caught by injectivity
        let bare = parse_structure("vocab E/2\nstructure U\nelems u").unwrap();
        let two = parse_structure("vocab E/2\nstructure T\nelems v w").unwrap();
        let v = solve(GameSpec::ef(Mode::Existential, 2), &two, &bare).unwrap();
        let t = replay(&v, &two, &bare, &[mv(Side::A, 0), mv(Side::A, 1)]).unwrap();
        assert_eq!(
            t.lines.last().unwrap(),
            "injectivity violated, Spoiler wins round 2"
        );
        let err = replay(&v, &two, &bare, &[mv(Side::B, 0)]).unwrap_err();
        assert!(matches!(err, Error::IllegalMove { round: 1, .. }));
    }

    #[test]
    fn copy_strategy_survives() {
        let s = parse_structure("vocab E/2\nstructure D\nelems v w\nrel E v w").unwrap();
        let v = solve(GameSpec::ef(Mode::Full, 2), &s, &s).unwrap();
        let t = replay(&v, &s, &s, &[mv(Side::B, 1), mv(Side::A, 0)]).unwrap();
        assert_eq!(t.winner, Some(Winner::Duplicator));
    }

    #[test]
    fn human_duplicator() {
        let edge = parse_structure("vocab E/2\nstructure D\nelems v w\nrel E v w").unwrap();
        let lp = parse_structure("vocab E/2\nstructure L\nelems u\nrel E u u").unwrap();
        let v = solve(GameSpec::ef(Mode::Existential, 2), &edge, &lp).unwrap();
        let mut s = GameSession::new(&v, &edge, &lp);
        while s.winner().is_none() {
            let m = s.engine_spoiler_move().unwrap();
            s.duplicator_plays(m, 0).unwrap();
        }
        assert_eq!(s.winner(), Some(Winner::Spoiler));
        assert!(s.status().contains("not E(v,v) in A"));
    }
}
