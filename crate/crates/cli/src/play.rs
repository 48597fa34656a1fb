//! Line-oriented play against the solver.

use std::io::{self, Write};

use arboreal::games::{GameSession, Move, Side, Verdict, Winner};
use arboreal::Structure;

const HELP: &str =
    "commands: side A|B, move [pebble] [relation] <elem>, answer <elem>, moves, status, help, quit";

fn flush_lines(session: &GameSession, seen: &mut usize, out: &mut impl Write) -> io::Result<()> {
    for line in &session.lines()[*seen..] {
        writeln!(out, "{line}")?;
    }
    *seen = session.lines().len();
    Ok(())
}

/// Picks the single legal move matching the typed tokens.
fn resolve(
    session: &GameSession,
    a: &Structure,
    b: &Structure,
    side: Side,
    words: &[&str],
) -> Result<Move, String> {
    let (elem, rest) = words.split_last().ok_or("move needs an element")?;
    let s = if side == Side::A { a } else { b };
    let e = s
        .elem_index(elem)
        .ok_or_else(|| format!("no element {elem} in {side}"))?;
    let mut pebble = None;
    let mut relation = None;
    for w in rest {
        if let Ok(p) = w.parse::<usize>() {
            if p == 0 {
                return Err("pebbles are numbered from 1".into());
            }
            pebble = Some(p - 1);
        } else if let Some(r) = a.vocab().index_of(w) {
            relation = Some(r);
        } else {
            return Err(format!("cannot read {w} as a pebble or relation"));
        }
    }
    let found: Vec<Move> = session
        .legal_moves()
        .into_iter()
        .filter(|m| m.side == side && m.elem == e)
        .filter(|m| pebble.is_none() || m.pebble == pebble)
        .filter(|m| relation.is_none() || m.relation == relation)
        .collect();
    match found.as_slice() {
        [] => Err("no legal move matches".into()),
        [m] => Ok(*m),
        _ => Err(format!(
            "{} moves match; name the pebble or relation",
            found.len()
        )),
    }
}

fn announce(session: &GameSession, out: &mut impl Write) -> io::Result<Option<Move>> {
    let mv = session.engine_spoiler_move();
    if let Some(m) = &mv {
        writeln!(out, "Spoiler plays {}", session.describe_move(m))?;
    }
    Ok(mv)
}

fn finished(session: &GameSession, out: &mut impl Write) -> io::Result<bool> {
    match session.winner() {
        Some(Winner::Spoiler) => writeln!(out, "Spoiler wins")?,
        Some(Winner::Duplicator) => writeln!(out, "Duplicator wins")?,
        None => return Ok(false),
    }
    Ok(true)
}

/// The human plays Spoiler unless `as_duplicator`; the engine takes the
/// other role.
pub fn repl(
    verdict: &Verdict,
    a: &Structure,
    b: &Structure,
    as_duplicator: bool,
    input: &mut impl Iterator<Item = String>,
    out: &mut impl Write,
) -> io::Result<()> {
    let mut session = GameSession::new(verdict, a, b);
    let mut seen = 0;
    let mut side = Side::A;
    writeln!(out, "{}", session.status())?;
    flush_lines(&session, &mut seen, out)?;
    if finished(&session, out)? {
        return Ok(());
    }
    let mut pending = if as_duplicator {
        announce(&session, out)?
    } else {
        None
    };

    for line in input {
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some((&cmd, args)) = words.split_first() else {
            continue;
        };
        let before = session.round();
        let result = match cmd {
            "quit" | "exit" => return Ok(()),
            "help" => {
                writeln!(out, "{HELP}")?;
                Ok(())
            }
            "status" => {
                writeln!(out, "{}", session.status())?;
                Ok(())
            }
            "moves" => {
                for m in session.legal_moves() {
                    writeln!(out, "  {}", session.describe_move(&m))?;
                }
                Ok(())
            }
            "side" if !as_duplicator => match args {
                ["A" | "a"] => {
                    side = Side::A;
                    Ok(())
                }
                ["B" | "b"] => {
                    side = Side::B;
                    Ok(())
                }
                _ => Err("side takes A or B".to_string()),
            },
            "move" if !as_duplicator => resolve(&session, a, b, side, args)
                .and_then(|m| session.spoiler_plays(m).map_err(|e| e.to_string())),
            "move" | "answer" if as_duplicator => match (pending, args) {
                (Some(m), [elem]) => {
                    let other = if m.side == Side::A { b } else { a };
                    match other.elem_index(elem) {
                        Some(y) => session.duplicator_plays(m, y).map_err(|e| e.to_string()),
                        None => Err(format!("no element {elem} in {}", m.side.other())),
                    }
                }
                _ => Err("answer takes one element".to_string()),
            },
            _ => Err(format!("unknown command {cmd}; {HELP}")),
        };
        if let Err(msg) = result {
            writeln!(out, "error: {msg}")?;
            continue;
        }
        flush_lines(&session, &mut seen, out)?;
        if finished(&session, out)? {
            return Ok(());
        }
        if as_duplicator && session.round() > before {
            pending = announce(&session, out)?;
        }
    }
    Ok(())
}
