//! `arboreal`: compare finite structures by games, coalgebras and the
//! signature oracle.
//!
//! Exit codes: 0 preserved / equivalent / holds, 1 not, 2 error.

mod play;

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arboreal::coalgebra::{
    build_ef, build_modal, build_pebble_truncated, check_laws, check_morphism, find_morphism,
    parse_coalgebra, serialize_coalgebra, Cofree, ForestKind, MorphismKind, MorphismWitness,
};
use arboreal::games::{
    back_forth, distinguish_from, render, solve, verdict_report, GameFamily, GameSpec,
    SCHEMA_VERSION,
};
use arboreal::logic::{holds, oracle_preserves, parse_formula, Formula, FragmentSpec, Mode};
use arboreal::{parse_structure, Error, Structure};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(
    name = "arboreal",
    version,
    about = "Resource-bounded preservation and equivalence of finite structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Via {
    Game,
    Oracle,
    Coalgebra,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Role {
    Spoiler,
    Duplicator,
}

#[derive(Args, Clone)]
struct GameArgs {
    /// ef, pebble or modal.
    #[arg(long, default_value = "ef")]
    family: String,
    /// full, existential, positive or ep.
    #[arg(long, default_value = "full")]
    mode: String,
    /// Rounds, or pebbles for the pebble family.
    #[arg(short = 'k', default_value_t = 2)]
    k: usize,
    /// Pebble games: stop after this many rounds.
    #[arg(short = 'n')]
    n: Option<usize>,
}

impl GameArgs {
    fn family(&self) -> Result<GameFamily, Error> {
        self.family.parse()
    }

    fn mode(&self) -> Result<Mode, Error> {
        self.mode.parse()
    }

    fn spec(&self) -> Result<GameSpec, Error> {
        let mode = self.mode()?;
        let spec = match (self.family()?, self.n) {
            (GameFamily::Ef, _) => GameSpec::ef(mode, self.k),
            (GameFamily::Modal, _) => GameSpec::modal(mode, self.k),
            (GameFamily::Pebble, None) => GameSpec::pebble(mode, self.k),
            (GameFamily::Pebble, Some(r)) => GameSpec::pebble_bounded(mode, self.k, r),
        };
        if self.n.is_some() && spec.family != GameFamily::Pebble {
            return Err(Error::Precondition("-n bounds pebble games only".into()));
        }
        Ok(spec)
    }

    fn fragment(&self) -> Result<FragmentSpec, Error> {
        Ok(self.spec()?.fragment())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Does every sentence of the fragment true in A hold in B?
    Check {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value = "game")]
        via: Via,
        /// Check both directions and report equivalence.
        #[arg(long)]
        both: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        a: PathBuf,
        b: PathBuf,
    },
    /// Print a sentence of the fragment true in A and false in B.
    Distinguish {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        a: PathBuf,
        b: PathBuf,
    },
    /// Evaluate a sentence (or a modal formula at the point).
    Modelcheck {
        /// The formula, or @file.
        formula: String,
        structure: PathBuf,
    },
    /// Write the cofree coalgebra of a structure.
    Build {
        #[arg(long, default_value = "ef")]
        family: String,
        #[arg(short = 'k', default_value_t = 2)]
        k: usize,
        /// Pebble family: length of the sequences kept.
        #[arg(short = 'n')]
        n: Option<usize>,
        #[arg(long = "with-I")]
        with_i: bool,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        structure: PathBuf,
    },
    /// List the violated coalgebra conditions of a coalgebra file.
    Validate {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        coalgebra: PathBuf,
    },
    /// Search for a morphism between two coalgebra files.
    Morphism {
        /// hom, i-morphism, pathwise or open.
        #[arg(long, default_value = "hom")]
        kind: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        x: PathBuf,
        y: PathBuf,
    },
    /// Check the comonad laws on random homomorphisms.
    Laws {
        #[arg(long, default_value = "ef")]
        family: String,
        #[arg(short = 'k', default_value_t = 2)]
        k: usize,
        #[arg(short = 'n', default_value_t = 2)]
        n: usize,
        #[arg(long = "with-I")]
        with_i: bool,
        #[arg(long, default_value_t = 60)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        structure: PathBuf,
    },
    /// Decide preservation with the signature oracle alone.
    Oracle {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        a: PathBuf,
        b: PathBuf,
    },
    /// Play a game against the solver on standard input.
    Play {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long = "as", value_enum, default_value = "spoiler")]
        role: Role,
        a: PathBuf,
        b: PathBuf,
    },
}

type Outcome = Result<u8, Error>;

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Structure, Error> {
    parse_structure(&read(path)?)
        .map_err(|e| Error::Precondition(format!("{}: {e}", path.display())))
}

fn write_out(output: Option<&Path>, text: &str) -> Result<(), Error> {
    match output {
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::Precondition(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn code(ok: bool) -> u8 {
    if ok {
        0
    } else {
        1
    }
}

struct Decision {
    preserved: bool,
    witness: Option<Formula>,
    report: Value,
}

fn decide_game(spec: GameSpec, a: &Structure, b: &Structure) -> Result<Decision, Error> {
    let v = solve(spec, a, b)?;
    let witness = if v.duplicator_wins {
        None
    } else {
        Some(distinguish_from(&v, a, b)?)
    };
    let report = verdict_report(&v, a, b, false, witness.as_ref());
    Ok(Decision {
        preserved: v.duplicator_wins,
        witness,
        report,
    })
}

fn oracle_report(frag: FragmentSpec, a: &Structure, b: &Structure) -> Result<Decision, Error> {
    let o = oracle_preserves(frag, a, b)?;
    let mut m = Map::new();
    m.insert("schemaVersion".into(), json!(SCHEMA_VERSION));
    m.insert("fragment".into(), json!(frag.family.as_str()));
    m.insert("mode".into(), json!(frag.mode.as_str()));
    m.insert("k".into(), json!(frag.k));
    m.insert("left".into(), json!(a.name()));
    m.insert("right".into(), json!(b.name()));
    m.insert("preserved".into(), json!(o.preserved));
    m.insert("signatures".into(), json!(o.signatures));
    if let Some(w) = &o.witness {
        m.insert("witnessFormula".into(), json!(w.to_string()));
    }
    Ok(Decision {
        preserved: o.preserved,
        witness: o.witness,
        report: Value::Object(m),
    })
}

fn cofree(family: GameFamily, a: &Structure, k: usize) -> Result<Cofree, Error> {
    match family {
        GameFamily::Ef => build_ef(a, k, true, arboreal::coalgebra::DEFAULT_CARRIER_CAP),
        GameFamily::Modal => build_modal(a, k, arboreal::coalgebra::DEFAULT_CARRIER_CAP),
        GameFamily::Pebble => Err(Error::Precondition(
            "the coalgebra route covers the ef and modal families".into(),
        )),
    }
}

fn decide_coalgebra(spec: GameSpec, a: &Structure, b: &Structure) -> Result<Decision, Error> {
    let (fx, fy) = (
        cofree(spec.family, a, spec.k)?,
        cofree(spec.family, b, spec.k)?,
    );
    let (x, y) = (fx.coalgebra(), fy.coalgebra());
    let (route, preserved) = match spec.mode {
        Mode::ExistentialPositive => {
            let kind = if spec.family == GameFamily::Ef {
                MorphismKind::IMorphism
            } else {
                MorphismKind::Hom
            };
            (kind.as_str(), find_morphism(kind, x, y)?.is_some())
        }
        Mode::Existential => (
            "pathwise",
            find_morphism(MorphismKind::Pathwise, x, y)?.is_some(),
        ),
        Mode::Positive | Mode::Full => ("back-and-forth", back_forth(spec.mode, x, y)?.is_some()),
    };
    let mut m = Map::new();
    m.insert("schemaVersion".into(), json!(SCHEMA_VERSION));
    m.insert("family".into(), json!(spec.family.as_str()));
    m.insert("mode".into(), json!(spec.mode.as_str()));
    m.insert("k".into(), json!(spec.k));
    m.insert("left".into(), json!(a.name()));
    m.insert("right".into(), json!(b.name()));
    m.insert("route".into(), json!(route));
    m.insert("preserved".into(), json!(preserved));
    m.insert("coalgebraSizes".into(), json!([x.len(), y.len()]));
    Ok(Decision {
        preserved,
        witness: None,
        report: Value::Object(m),
    })
}

fn check(game: &GameArgs, via: Via, both: bool, format: Format, pa: &Path, pb: &Path) -> Outcome {
    let (a, b) = (load(pa)?, load(pb)?);
    let spec = game.spec()?;
    let decide = |a: &Structure, b: &Structure| match via {
        Via::Game => decide_game(spec, a, b),
        Via::Oracle => oracle_report(game.fragment()?, a, b),
        Via::Coalgebra => decide_coalgebra(spec, a, b),
    };
    let via_name = match via {
        Via::Game => "game",
        Via::Oracle => "oracle",
        Via::Coalgebra => "coalgebra",
    };
    let mut runs = vec![(decide(&a, &b)?, a.name().to_string(), b.name().to_string())];
    if both {
        runs.push((decide(&b, &a)?, b.name().to_string(), a.name().to_string()));
    }
    let ok = runs.iter().all(|(d, _, _)| d.preserved);
    match format {
        Format::Json => {
            let mut m = Map::new();
            m.insert("schemaVersion".into(), json!(SCHEMA_VERSION));
            m.insert("via".into(), json!(via_name));
            if both {
                m.insert("equivalent".into(), json!(ok));
                m.insert("forward".into(), runs[0].0.report.clone());
                m.insert("backward".into(), runs[1].0.report.clone());
            } else {
                m.insert("preserved".into(), json!(ok));
                m.insert("report".into(), runs[0].0.report.clone());
            }
            print!("{}", render(&Value::Object(m)));
        }
        Format::Text => {
            for (d, l, r) in &runs {
                let verdict = if d.preserved {
                    "preserved"
                } else {
                    "not preserved"
                };
                println!("{spec} {l} -> {r}: {verdict} (via {via_name})");
                if let Some(w) = &d.witness {
                    println!("  witness: {w}");
                }
            }
            if both {
                println!("{}", if ok { "equivalent" } else { "not equivalent" });
            }
        }
    }
    Ok(code(ok))
}

fn distinguish(game: &GameArgs, format: Format, pa: &Path, pb: &Path) -> Outcome {
    let (a, b) = (load(pa)?, load(pb)?);
    let spec = game.spec()?;
    let v = solve(spec, &a, &b)?;
    if v.duplicator_wins {
        eprintln!(
            "{spec}: Duplicator wins, so no sentence of the fragment separates {} from {}",
            a.name(),
            b.name()
        );
        return Ok(1);
    }
    let f = distinguish_from(&v, &a, &b)?;
    if !holds(&f, &a)? || holds(&f, &b)? {
        return Err(Error::Internal(format!(
            "{f} does not separate the structures"
        )));
    }
    match format {
        Format::Text => println!("{f}"),
        Format::Json => print!("{}", render(&verdict_report(&v, &a, &b, true, Some(&f)))),
    }
    Ok(0)
}

fn formula_arg(s: &str) -> Result<Formula, Error> {
    match s.strip_prefix('@') {
        Some(path) => parse_formula(read(Path::new(path))?.trim()),
        None => parse_formula(s),
    }
}

fn modelcheck(formula: &str, path: &Path) -> Outcome {
    let f = formula_arg(formula)?;
    let a = load(path)?;
    let v = holds(&f, &a)?;
    println!("{v}");
    Ok(code(v))
}

fn forest_kind(family: &str) -> Result<ForestKind, Error> {
    family.parse()
}

fn build(
    family: &str,
    k: usize,
    n: Option<usize>,
    with_i: bool,
    output: Option<&Path>,
    path: &Path,
) -> Outcome {
    let a = load(path)?;
    let cap = arboreal::coalgebra::DEFAULT_CARRIER_CAP;
    let c = match forest_kind(family)? {
        ForestKind::Ef => build_ef(&a, k, with_i, cap)?,
        ForestKind::Pebble => {
            let n = n.ok_or_else(|| {
                Error::Precondition("the pebble family needs -n (sequence length)".into())
            })?;
            build_pebble_truncated(&a, k, n, with_i, cap)?
        }
        ForestKind::Modal => {
            if with_i {
                return Err(Error::Precondition("modal coalgebras take no I".into()));
            }
            build_modal(&a, k, cap)?
        }
    };
    write_out(output, &serialize_coalgebra(c.coalgebra()))?;
    Ok(0)
}

fn validate(format: Format, path: &Path) -> Outcome {
    let c = parse_coalgebra(&read(path)?)?;
    let violations = c.validate();
    match format {
        Format::Text => {
            if violations.is_empty() {
                println!("valid {} coalgebra, {} elements", c.kind(), c.len());
            }
            for v in &violations {
                println!("{v}");
            }
        }
        Format::Json => {
            let list: Vec<Value> = violations
                .iter()
                .map(|v| json!({ "condition": v.condition, "detail": v.detail }))
                .collect();
            let report = json!({
                "schemaVersion": SCHEMA_VERSION,
                "kind": c.kind().as_str(),
                "elements": c.len(),
                "valid": violations.is_empty(),
                "violations": list,
            });
            print!("{}", render(&report));
        }
    }
    Ok(code(violations.is_empty()))
}

fn witness_text(
    w: &MorphismWitness,
    x: &arboreal::coalgebra::ForestCoalgebra,
    y: &arboreal::coalgebra::ForestCoalgebra,
) -> String {
    let mut out = String::new();
    for (e, &v) in w.map.iter().enumerate() {
        out.push_str(&format!(
            "map {} {}\n",
            x.carrier().elem_name(e),
            y.carrier().elem_name(v)
        ));
    }
    let tags: Vec<&str> = w.verified.iter().map(|t| t.as_str()).collect();
    out.push_str(&format!("verified {}\n", tags.join(" ")));
    out
}

fn morphism(kind: &str, format: Format, output: Option<&Path>, px: &Path, py: &Path) -> Outcome {
    let kind: MorphismKind = kind.parse()?;
    let x = parse_coalgebra(&read(px)?)?;
    let y = parse_coalgebra(&read(py)?)?;
    let found = find_morphism(kind, &x, &y)?;
    if let Some(w) = &found {
        // re-verify the map as given
        if !check_morphism(&x, &y, &w.map)?.is(kind) {
            return Err(Error::Internal("search result failed verification".into()));
        }
    }
    let text = match (format, &found) {
        (Format::Text, None) => "none\n".to_string(),
        (Format::Text, Some(w)) => witness_text(w, &x, &y),
        (Format::Json, _) => {
            let body = found.as_ref().map(|w| {
                let map: Map<String, Value> = w
                    .map
                    .iter()
                    .enumerate()
                    .map(|(e, &v)| {
                        (
                            x.carrier().elem_name(e).to_string(),
                            json!(y.carrier().elem_name(v)),
                        )
                    })
                    .collect();
                let tags: Vec<&str> = w.verified.iter().map(|t| t.as_str()).collect();
                json!({ "map": map, "verified": tags })
            });
            render(
                &json!({ "schemaVersion": SCHEMA_VERSION, "kind": kind.as_str(), "witness": body }),
            )
        }
    };
    write_out(output, &text)?;
    Ok(code(found.is_some()))
}

#[allow(clippy::too_many_arguments)]
fn laws(
    family: &str,
    k: usize,
    n: usize,
    with_i: bool,
    samples: usize,
    seed: u64,
    format: Format,
    path: &Path,
) -> Outcome {
    let a = load(path)?;
    let r = check_laws(forest_kind(family)?, &a, k, n, with_i, samples, seed)?;
    match format {
        Format::Text => {
            if r.all_hold() {
                println!("all laws hold ({} instances)", r.instances);
            }
            for f in &r.failures {
                println!("{f}");
            }
        }
        Format::Json => print!(
            "{}",
            render(&json!({
                "schemaVersion": SCHEMA_VERSION,
                "instances": r.instances,
                "failures": r.failures,
                "allHold": r.all_hold(),
            }))
        ),
    }
    Ok(code(r.all_hold()))
}

fn oracle(game: &GameArgs, format: Format, pa: &Path, pb: &Path) -> Outcome {
    let (a, b) = (load(pa)?, load(pb)?);
    let frag = game.fragment()?;
    let d = oracle_report(frag, &a, &b)?;
    match format {
        Format::Text => {
            println!(
                "{frag} {} -> {}: {}",
                a.name(),
                b.name(),
                if d.preserved {
                    "preserved"
                } else {
                    "not preserved"
                }
            );
            if let Some(w) = &d.witness {
                println!("  witness: {w}");
            }
        }
        Format::Json => print!("{}", render(&d.report)),
    }
    Ok(code(d.preserved))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Check {
            game,
            via,
            both,
            format,
            a,
            b,
        } => check(&game, via, both, format, &a, &b),
        Command::Distinguish { game, format, a, b } => distinguish(&game, format, &a, &b),
        Command::Modelcheck { formula, structure } => modelcheck(&formula, &structure),
        Command::Build {
            family,
            k,
            n,
            with_i,
            output,
            structure,
        } => build(&family, k, n, with_i, output.as_deref(), &structure),
        Command::Validate { format, coalgebra } => validate(format, &coalgebra),
        Command::Morphism {
            kind,
            format,
            output,
            x,
            y,
        } => morphism(&kind, format, output.as_deref(), &x, &y),
        Command::Laws {
            family,
            k,
            n,
            with_i,
            samples,
            seed,
            format,
            structure,
        } => laws(&family, k, n, with_i, samples, seed, format, &structure),
        Command::Oracle { game, format, a, b } => oracle(&game, format, &a, &b),
        Command::Play { game, role, a, b } => {
            let (sa, sb) = (load(&a)?, load(&b)?);
            let verdict = solve(game.spec()?, &sa, &sb)?;
            let stdin = io::stdin();
            let mut out = io::stdout();
            play::repl(
                &verdict,
                &sa,
                &sb,
                role == Role::Duplicator,
                &mut stdin.lock().lines().map_while(Result::ok),
                &mut out,
            )
            .map_err(|e| Error::Precondition(format!("terminal error: {e}")))?;
            out.flush().ok();
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
