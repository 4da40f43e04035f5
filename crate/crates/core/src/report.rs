//! Deterministic report serialization: rationals as `"num/den"` strings,
//! JSON objects with sorted keys, and tab-separated series for plotting.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::extract::{ChoiceCheck, SenderCheck};
use crate::prob::{fmt_prob, to_f64, Prob};
use crate::ucharness::GameResult;
use crate::verifier::{FamilyMode, StandaloneReport};

pub fn ser_prob<S: Serializer>(p: &Prob, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_prob(p))
}

pub fn ser_prob_opt<S: Serializer>(p: &Option<Prob>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(p) => s.serialize_str(&fmt_prob(p)),
        None => s.serialize_none(),
    }
}

/// Extraction results for one protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractReport {
    pub protocol: String,
    #[serde(serialize_with = "ser_prob")]
    pub theta: Prob,
    pub sender: SenderCheck,
    pub choice: ChoiceCheck,
}

/// One row of the plotting series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub protocol: String,
    pub params: String,
    pub metric: String,
    #[serde(serialize_with = "ser_prob")]
    pub value: Prob,
}

/// Everything an invocation produced. Empty sections serialize as `[]`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub config: BTreeMap<String, String>,
    pub standalone: Vec<StandaloneReport>,
    pub extract: Vec<ExtractReport>,
    pub games: Vec<GameResult>,
    pub series: Vec<SeriesRow>,
}

/// Canonical JSON: keys sorted at every level, two-space indentation,
/// trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // serde_json's default map is ordered, so a round trip through Value
    // sorts struct fields too
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn series_tsv(rows: &[SeriesRow]) -> String {
    let mut out = String::from("protocol\tparams\tmetric\texact\tvalue\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.9}\n",
            r.protocol,
            r.params,
            r.metric,
            fmt_prob(&r.value),
            to_f64(&r.value)
        ));
    }
    out
}

/// Series rows for a set of stand-alone reports and games.
pub fn series_from(standalone: &[StandaloneReport], extract: &[ExtractReport], games: &[GameResult]) -> Vec<SeriesRow> {
    let row = |label: &str, metric: String, value: &Prob| {
        let (protocol, params) = label.split_once(':').unwrap_or((label, ""));
        SeriesRow {
            protocol: protocol.into(),
            params: params.into(),
            metric,
            value: value.clone(),
        }
    };
    let mut rows = Vec::new();
    for r in standalone {
        rows.push(row(&r.protocol, "eps_correctness".into(), &r.correctness.eps));
        rows.push(row(&r.protocol, "eps_worst".into(), &r.worst));
    }
    for r in extract {
        rows.push(row(&r.protocol, "extract_sender_eps".into(), &r.sender.eps));
        rows.push(row(&r.protocol, "extract_choice_eps".into(), &r.choice.eps));
    }
    for g in games {
        rows.push(row(&g.protocol, format!("advantage[{}/{}]", g.case, g.adversary), &g.advantage));
    }
    rows
}

pub fn text_summary(report: &Report) -> String {
    let mut out = String::new();
    for r in &report.standalone {
        let family = match r.family_mode {
            FamilyMode::Exhaustive => "exhaustive",
            FamilyMode::Curated => "curated",
        };
        out.push_str(&format!("standalone {} ({family} family)\n", r.protocol));
        let c = &r.correctness;
        out.push_str(&format!(
            "  correctness eps {}  abort {}  defect_b {}  defect_c {}\n",
            fmt_prob(&c.eps),
            fmt_prob(&c.abort),
            fmt_prob(&c.defect_b),
            fmt_prob(&c.defect_c)
        ));
        for (side, w) in [("alice", &r.worst_alice), ("bob", &r.worst_bob)] {
            if let Some(w) = w {
                out.push_str(&format!("  security for {side}: {} via {}\n", fmt_prob(&w.value), w.adversary));
                if let (Some(t), false) = (&w.transcript, w.value.is_zero()) {
                    out.push_str(&format!("    transcript {t}\n"));
                }
            }
        }
        out.push_str(&format!("  worst {}  self-check {}\n", fmt_prob(&r.worst), if r.self_check { "ok" } else { "MISMATCH" }));
    }
    for r in &report.extract {
        out.push_str(&format!("extract {} (theta {})\n", r.protocol, fmt_prob(&r.theta)));
        out.push_str(&format!("  sender success {}  eps {}\n", fmt_prob(&r.sender.success), fmt_prob(&r.sender.eps)));
        let c = &r.choice;
        out.push_str(&format!(
            "  choice agreement {}  eps {}  last-message violations {}  equivocation violations {}\n",
            fmt_prob(&c.agreement),
            fmt_prob(&c.eps),
            c.last_message_violations,
            c.equivocation_violations
        ));
    }
    for g in &report.games {
        let radius = g.radius.as_deref().map(|r| format!(" ± {r}")).unwrap_or_default();
        out.push_str(&format!(
            "uc-game {} {} {} [{}]: advantage {}{radius}  failure {}",
            g.protocol,
            g.case,
            g.adversary,
            g.mode,
            fmt_prob(&g.advantage),
            fmt_prob(&g.failure)
        ));
        if let Some(w) = &g.witness {
            out.push_str(&format!("  witness {w}"));
        }
        out.push('\n');
    }
    if out.is_empty() {
        out.push_str("no results\n");
    }
    out
}

/// Writes `report.json`, `summary.txt` and `series.tsv` into `dir`.
pub fn emit_report(report: &Report, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let json = to_canonical_json(report).map_err(std::io::Error::other)?;
    let files = [
        ("report.json", json),
        ("summary.txt", text_summary(report)),
        ("series.tsv", series_tsv(&report.series)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
