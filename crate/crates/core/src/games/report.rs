//! Machine-readable verdict reports. Keys come out sorted, so equal
//! verdicts render to identical text.

use serde_json::{json, Map, Value};

use crate::games::solver::Verdict;
use crate::logic::Formula;
use crate::structure::Structure;

pub const SCHEMA_VERSION: u64 = 1;

/// `stages` adds the table of dead positions; `witness` a distinguishing
/// formula.
pub fn verdict_report(
    verdict: &Verdict,
    a: &Structure,
    b: &Structure,
    stages: bool,
    witness: Option<&Formula>,
) -> Value {
    let spec = verdict.spec;
    let mut m = Map::new();
    m.insert("schemaVersion".into(), json!(SCHEMA_VERSION));
    m.insert("family".into(), json!(spec.family.as_str()));
    m.insert("mode".into(), json!(spec.mode.as_str()));
    m.insert("k".into(), json!(spec.k));
    if let Some(r) = spec.rounds {
        m.insert("rounds".into(), json!(r));
    }
    m.insert("left".into(), json!(a.name()));
    m.insert("right".into(), json!(b.name()));
    m.insert("duplicatorWins".into(), json!(verdict.duplicator_wins));
    if stages {
        let table: Vec<Value> = verdict
            .stage_table()
            .into_iter()
            .map(|(n, s)| json!({ "position": verdict.position(n).describe(a, b), "stage": s }))
            .collect();
        m.insert("stageTable".into(), Value::Array(table));
    }
    if let Some(f) = witness {
        m.insert("witnessFormula".into(), json!(f.to_string()));
    }
    Value::Object(m)
}

/// Pretty-printed with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialise");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{distinguish_from, solve, GameSpec};
    use crate::io::parse_structure;
    use crate::logic::Mode;

    #[test]
    fn keys_sorted_and_stable() {
        let a = parse_structure("vocab E/2\nstructure edge\nelems v w\nrel E v w").unwrap();
        let b = parse_structure("vocab E/2\nstructure loop\nelems u\nrel E u u").unwrap();
        let v = solve(GameSpec::ef(Mode::Existential, 2), &a, &b).unwrap();
        let f = distinguish_from(&v, &a, &b).unwrap();
        let text = render(&verdict_report(&v, &a, &b, true, Some(&f)));
        assert_eq!(text, render(&verdict_report(&v, &a, &b, true, Some(&f))));
        let keys: Vec<&str> = [
            "duplicatorWins",
            "family",
            "k",
            "left",
            "mode",
            "right",
            "schemaVersion",
            "stageTable",
            "witnessFormula",
        ]
        .to_vec();
        let positions: Vec<usize> = keys
            .iter()
            .map(|k| text.find(&format!("\"{k}\"")).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains("\"duplicatorWins\": false"));
    }
}
