use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use planar_cocycles::domination::{DominationVerdict, UnstableSearch};
use planar_cocycles::thermo::{LowerBoundKind, PressureBounds, RatioBands};
use serde::Serialize;

use crate::jobs::{
    ClassificationReport, EquilibriumReport, EquilibriumState, Example1Report, MulticoneReport, PressureReport, Timings,
};
use crate::{Stage, WorkbenchError};

fn io_err(path: &Path, e: impl std::fmt::Display) -> WorkbenchError {
    WorkbenchError::Io(format!("{}: {e}", path.display()))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, WorkbenchError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| WorkbenchError::Failed {
        stage: Stage::Output,
        message: e.to_string(),
    })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), WorkbenchError> {
    fs::write(path, to_json(value)?).map_err(|e| io_err(path, e))
}

fn csv_string<R: Serialize>(header: [&str; 3], rows: impl IntoIterator<Item = R>) -> Result<String, WorkbenchError> {
    let fail = |e: csv::Error| WorkbenchError::Failed {
        stage: Stage::Output,
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.serialize(r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| WorkbenchError::Failed {
        stage: Stage::Output,
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Rows `(depth, value, bound_type)`: one upper and one lower bound per
/// depth. The lower bound type is `lower_kappa` or `lower_heuristic`.
pub fn pressure_csv(b: &PressureBounds) -> Result<String, WorkbenchError> {
    let lower = match b.lower_kind {
        LowerBoundKind::KappaCertified => "lower_kappa",
        LowerBoundKind::SpectralHeuristic => "lower_heuristic",
    };
    let rows = b
        .rows
        .iter()
        .flat_map(|r| [(r.depth, r.upper, "upper"), (r.depth, r.lower, lower)]);
    csv_string(["depth", "value", "bound_type"], rows)
}

/// Rows `(depth, band_min, band_max)`.
pub fn bands_csv(b: &RatioBands) -> Result<String, WorkbenchError> {
    csv_string(
        ["depth", "band_min", "band_max"],
        b.rows.iter().map(|r| (r.depth, r.band_min, r.band_max)),
    )
}

/// The Gibbs-type band of the first constructed state; only the header when
/// there is none.
pub fn state_bands_csv(states: &[EquilibriumState]) -> Result<String, WorkbenchError> {
    match states.first() {
        Some(st) => bands_csv(&st.gibbs_type_band),
        None => csv_string(["depth", "band_min", "band_max"], std::iter::empty::<(usize, f64, f64)>()),
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), WorkbenchError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn timings(out: &mut String, t: &Timings) {
    let parts: Vec<String> = t.0.iter().map(|(s, d)| format!("{s} {d:.2?}")).collect();
    let _ = writeln!(out, "  time: {}", parts.join(", "));
}

fn matrices(out: &mut String, r: &crate::JobConfig) {
    let ms: Vec<String> = r.tuple.matrices().iter().map(|m| format!("{m:?}")).collect();
    let _ = writeln!(out, "  tuple: {}  s = {}", ms.join(" "), r.s);
}

fn pressure_lines(out: &mut String, b: &PressureBounds) {
    let _ = writeln!(
        out,
        "  pressure: [{:.6}, {:.6}] at depth {} (lower bound {:?}{})",
        b.lower,
        b.upper,
        b.depth,
        b.lower_kind,
        b.kappa.map(|k| format!(", kappa {k:.6}")).unwrap_or_default()
    );
}

fn state_lines(out: &mut String, st: &EquilibriumState) {
    let _ = writeln!(out, "  state {:?}: pressure {:.6}", st.kind, st.pressure);
    if let Some(p) = &st.probabilities {
        let _ = writeln!(out, "    probabilities {p:?}");
    }
    let _ = writeln!(
        out,
        "    h + Lambda = {:.6} + {:.6} = {:.6}",
        st.entropy_lambda.entropy,
        st.entropy_lambda.lambda,
        st.entropy_lambda.entropy + st.entropy_lambda.lambda
    );
    let _ = writeln!(
        out,
        "    Gibbs-type band [{:.4}, {:.4}], quasi-Bernoulli band [{:.4}, {:.4}]",
        st.gibbs_type_band.min, st.gibbs_type_band.max, st.quasi_bernoulli_band.min, st.quasi_bernoulli_band.max
    );
    if let Some(sh) = &st.shadowing {
        let _ = writeln!(out, "    shadowing deficit {:.4} up to length {} (worst word {})", sh.deficit, sh.horizon, sh.argmax);
    }
}

pub fn render_pressure(r: &PressureReport) -> String {
    let mut out = String::from("pressure\n");
    matrices(&mut out, &r.config);
    if let Some(k) = r.kappa.last() {
        let _ = writeln!(out, "  kappa: {:.6} at depth {} ({} · {})", k.kappa, k.depth, k.argmin.0, k.argmin.1);
    }
    pressure_lines(&mut out, &r.bounds);
    for row in &r.bounds.rows {
        let _ = writeln!(out, "    n = {:>2}: upper {:.6}  lower {:.6}", row.depth, row.upper, row.lower);
    }
    timings(&mut out, &r.timings);
    out
}

fn verdict_line(v: &DominationVerdict) -> String {
    match v {
        DominationVerdict::Dominated(c) => format!(
            "Dominated ({} arc(s), margin {:.4}, products of length {})",
            c.cone.component_count(),
            c.margin,
            c.block_length
        ),
        DominationVerdict::NotDominated(w) => format!("NotDominated (witness {w:?})"),
        DominationVerdict::Inconclusive { max_depth, .. } => format!("Inconclusive up to depth {max_depth}"),
    }
}

fn unstable_line(u: &UnstableSearch) -> String {
    match u {
        UnstableSearch::Found(c) => format!("found ({} arc(s))", c.cone.component_count()),
        UnstableSearch::NotFound(f) => format!("not found ({f:?})"),
    }
}

pub fn render_classify(r: &ClassificationReport) -> String {
    let mut out = String::from("classify\n");
    matrices(&mut out, &r.config);
    let f = &r.flags;
    let _ = writeln!(out, "  irreducible: {}  strongly conformal: {}", f.irreducible, f.strongly_conformal);
    if let Some(v) = &r.classification.domination {
        let _ = writeln!(out, "  domination: {}", verdict_line(v));
    }
    let _ = writeln!(out, "  invariant unstable multicone: {}", unstable_line(&r.invariant_unstable));
    let _ = writeln!(
        out,
        "  conformal generators: {:?}",
        f.conformal_indices.iter().map(|i| i + 1).collect::<Vec<_>>()
    );
    if let Some(k) = r.kappa.last() {
        let _ = writeln!(out, "  kappa: {:.6} at depth {}", k.kappa, k.depth);
    }
    pressure_lines(&mut out, &r.pressure);
    let _ = writeln!(out, "  class: {}", r.classification.class.name());
    if !r.classification.inconclusive.is_empty() {
        let _ = writeln!(out, "  inconclusive stages: {:?}", r.classification.inconclusive);
    }
    for st in &r.equilibrium {
        state_lines(&mut out, st);
    }
    if let Some(n) = &r.note {
        let _ = writeln!(out, "  note: {n}");
    }
    timings(&mut out, &r.timings);
    out
}

pub fn render_equilibrium(r: &EquilibriumReport) -> String {
    let mut out = String::from("equilibrium\n");
    matrices(&mut out, &r.config);
    let _ = writeln!(out, "  class: {}{}", r.class.name(), if r.conclusive { "" } else { " (inconclusive)" });
    for st in &r.states {
        state_lines(&mut out, st);
    }
    if let Some(n) = &r.note {
        let _ = writeln!(out, "  note: {n}");
    }
    timings(&mut out, &r.timings);
    out
}

pub fn render_multicone(r: &MulticoneReport) -> String {
    let mut out = String::from("multicone\n");
    matrices(&mut out, &r.config);
    let _ = writeln!(out, "  domination: {}", verdict_line(&r.domination));
    let _ = writeln!(out, "  invariant unstable multicone: {}", unstable_line(&r.invariant_unstable));
    match &r.hyperbolic_part {
        Some(Ok(c)) => {
            let _ = writeln!(out, "  hyperbolic part: certified, margin {:.4}", c.margin);
        }
        Some(Err(e)) => {
            let _ = writeln!(out, "  hyperbolic part: {:?}: {}", e.stage, e.detail);
        }
        None => {}
    }
    for (label, c) in r.certificates() {
        let arcs: Vec<String> = c
            .cone
            .arcs()
            .iter()
            .map(|a| format!("[{:.6}, +{:.6}]", a.start().theta(), a.length()))
            .collect();
        let _ = writeln!(out, "  {label} cone: {}", arcs.join(" "));
    }
    timings(&mut out, &r.timings);
    out
}

pub fn render_example1(r: &Example1Report) -> String {
    let mut out = String::new();
    for c in &r.cases {
        let _ = writeln!(
            out,
            "{} {}: expected {}, got {}",
            if c.matches { "ok" } else { "MISMATCH" },
            c.name,
            c.expected.name(),
            c.report.classification.class.name()
        );
        out.push_str(&render_classify(&c.report));
    }
    out
}
