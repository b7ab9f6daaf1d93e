// SPDX-License-Identifier: MIT OR Apache-2.0

//! JSON report documents. Every real number is rounded to 12 significant
//! digits before serialization so that reports are stable across
//! platforms and parse back to the same values.

use serde::{Deserialize, Serialize};
use softed_core::analysis::{
    categorize_nab_tolerance, categorize_tolerance, evaluate, rank, sweep_tolerance,
    CategoryBreakdown, CategoryShares, CorpusSummary, Criterion, EvaluationOptions, MetricReport,
    RankingTable, SweepRow, ToleranceCategory,
};
use softed_core::hard_metrics::HardCounts;
use softed_core::nab::{make_windows, AnomalyWindow, ApplicationProfile};
use softed_core::softed::{ConsumptionRule, SoftCounts};
use softed_core::{DuplicateWarning, Score, ScoreSet};

use crate::error::CliResult;
use crate::files::LoadedInstance;

pub const SCHEMA_VERSION: &str = "1.0.0";

/// `x` rounded to 12 significant digits; zero loses its sign.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn round_score(s: Score) -> Score {
    s.map(round_sig)
}

fn round_scores(s: ScoreSet) -> ScoreSet {
    ScoreSet {
        precision: round_score(s.precision),
        recall: round_score(s.recall),
        sensitivity: round_score(s.sensitivity),
        specificity: round_score(s.specificity),
        f_beta: round_score(s.f_beta),
        f1: round_score(s.f1),
    }
}

fn round_profile(p: &ApplicationProfile) -> ApplicationProfile {
    ApplicationProfile {
        name: p.name.clone(),
        weight_tp: round_sig(p.weight_tp),
        weight_fp: round_sig(p.weight_fp),
        weight_fn: round_sig(p.weight_fn),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub series: String,
    pub length: usize,
    pub m: usize,
    pub events: Vec<usize>,
    pub k: f64,
    pub beta: f64,
    pub rule: ConsumptionRule,
    pub profile: ApplicationProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardSection {
    pub counts: HardCounts,
    pub scores: ScoreSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftSection {
    pub counts: SoftCounts,
    pub scores: ScoreSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NabSection {
    pub raw_score: f64,
    pub counts: HardCounts,
    pub f1: Score,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Categories {
    pub softed: ToleranceCategory,
    pub nab: ToleranceCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSection {
    pub method: String,
    pub detections: usize,
    pub hard: HardSection,
    pub soft: SoftSection,
    pub nab: NabSection,
    pub categories: Categories,
}

/// Everything reported about one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub instance: InstanceMeta,
    pub warnings: Vec<DuplicateWarning>,
    pub windows: Vec<AnomalyWindow>,
    pub methods: Vec<MethodSection>,
    pub rankings: Vec<RankingTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRow>>,
}

fn method_section(r: &MetricReport, n: usize) -> MethodSection {
    let soft = r.soft.counts;
    MethodSection {
        method: r.method.clone(),
        detections: n,
        hard: HardSection {
            counts: r.hard.counts,
            scores: round_scores(r.hard.scores),
        },
        soft: SoftSection {
            counts: SoftCounts {
                tps: round_sig(soft.tps),
                fps: round_sig(soft.fps),
                tns: round_sig(soft.tns),
                fns: round_sig(soft.fns),
            },
            scores: round_scores(r.soft.scores),
        },
        nab: NabSection {
            raw_score: round_sig(r.nab.raw_score),
            counts: r.nab.counts,
            f1: round_score(r.nab.f1),
        },
        categories: Categories {
            softed: categorize_tolerance(r),
            nab: categorize_nab_tolerance(r),
        },
    }
}

fn round_ranking(mut t: RankingTable) -> RankingTable {
    for e in &mut t.entries {
        e.value = round_score(e.value);
    }
    t
}

/// Evaluates every method of `loaded`, with a tolerance sweep when `sweep_k`
/// is given. Also returns the unrounded reports for corpus aggregation.
pub fn instance_report(
    loaded: &LoadedInstance,
    options: &EvaluationOptions,
    sweep_k: Option<&[f64]>,
) -> CliResult<(InstanceReport, Vec<MetricReport>)> {
    let instance = &loaded.instance;
    let reports = evaluate(instance, options)?;
    let sweep = sweep_k
        .map(|ks| sweep_tolerance(instance, ks, options))
        .transpose()?
        .map(|t| {
            t.rows
                .into_iter()
                .map(|r| SweepRow {
                    k: round_sig(r.k),
                    precision_delta: round_score(r.precision_delta),
                    recall_delta: round_score(r.recall_delta),
                    ..r
                })
                .collect()
        });
    let methods = reports
        .iter()
        .zip(instance.detections())
        .map(|(r, d)| method_section(r, d.n()))
        .collect();
    let report = InstanceReport {
        instance: InstanceMeta {
            series: loaded.name.clone(),
            length: instance.timeline().length(),
            m: instance.events().m(),
            events: instance.events().times().to_vec(),
            k: round_sig(options.tolerance.k()),
            beta: round_sig(options.tolerance.beta()),
            rule: options.rule,
            profile: round_profile(&options.profile),
        },
        warnings: loaded.warnings.clone(),
        windows: make_windows(instance.events(), instance.timeline()),
        methods,
        rankings: Criterion::ALL
            .iter()
            .map(|&c| round_ranking(rank(&reports, c)))
            .collect(),
        sweep,
    };
    Ok((report, reports))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDocument {
    pub schema_version: String,
    pub kind: String,
    #[serde(flatten)]
    pub report: InstanceReport,
}

impl EvaluationDocument {
    pub fn new(report: InstanceReport) -> Self {
        EvaluationDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            kind: "evaluation".to_string(),
            report,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusOptions {
    pub k: f64,
    pub beta: f64,
    pub rule: ConsumptionRule,
    pub profile: ApplicationProfile,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub schema_version: String,
    pub kind: String,
    pub options: CorpusOptions,
    pub summary: CorpusSummary,
    pub series: Vec<InstanceReport>,
}

fn round_shares(s: CategoryShares) -> CategoryShares {
    CategoryShares {
        incorporated: round_sig(s.incorporated),
        confirmed: round_sig(s.confirmed),
        not_applicable: round_sig(s.not_applicable),
    }
}

fn round_breakdown(b: CategoryBreakdown) -> CategoryBreakdown {
    CategoryBreakdown {
        counts: b.counts,
        per_application: round_shares(b.per_application),
        per_series: round_shares(b.per_series),
    }
}

impl CorpusDocument {
    pub fn new(
        options: &EvaluationOptions,
        depth: usize,
        summary: CorpusSummary,
        series: Vec<InstanceReport>,
    ) -> Self {
        CorpusDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            kind: "corpus".to_string(),
            options: CorpusOptions {
                k: round_sig(options.tolerance.k()),
                beta: round_sig(options.tolerance.beta()),
                rule: options.rule,
                profile: round_profile(&options.profile),
                depth,
            },
            summary: CorpusSummary {
                softed: round_breakdown(summary.softed),
                nab: round_breakdown(summary.nab),
                ..summary
            },
            series,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSection {
    pub number: u8,
    pub name: String,
    pub description: String,
    pub report: InstanceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenariosDocument {
    pub schema_version: String,
    pub kind: String,
    pub scenarios: Vec<ScenarioSection>,
}

impl ScenariosDocument {
    pub fn new(scenarios: Vec<ScenarioSection>) -> Self {
        ScenariosDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            kind: "scenarios".to_string(),
            scenarios,
        }
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
    s.push('\n');
    s
}

fn md_score(s: Score) -> String {
    s.to_string()
}

/// Human-readable summary of one instance.
pub fn instance_markdown(r: &InstanceReport) -> String {
    let meta = &r.instance;
    let mut out = format!(
        "## {}\n\nlength {}, {} event(s), k = {}, beta = {}, profile {}\n\n",
        meta.series, meta.length, meta.m, meta.k, meta.beta, meta.profile.name
    );
    out.push_str("| method | n | hard F1 | soft F1 | NAB raw | NAB F1 | SoftED | NAB |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for m in &r.methods {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} |\n",
            m.method,
            m.detections,
            md_score(m.hard.scores.f1),
            md_score(m.soft.scores.f1),
            m.nab.raw_score,
            md_score(m.nab.f1),
            m.categories.softed.as_str(),
            m.categories.nab.as_str(),
        ));
    }
    out.push('\n');
    for t in &r.rankings {
        let order: Vec<String> = t
            .entries
            .iter()
            .map(|e| {
                let tie = if e.tied { "=" } else { "" };
                format!("{}{tie}. {} ({})", e.rank, e.method, e.value)
            })
            .collect();
        out.push_str(&format!(
            "- {}: {}\n",
            t.criterion.as_str(),
            order.join(", ")
        ));
    }
    if let Some(rows) = &r.sweep {
        out.push_str("\n| method | k | precision delta | recall delta |\n|---|---|---|---|\n");
        for row in rows {
            out.push_str(&format!(
                "| {} | {} | {} | {} |\n",
                row.method, row.k, row.precision_delta, row.recall_delta
            ));
        }
    }
    out
}

pub fn corpus_markdown(doc: &CorpusDocument) -> String {
    let s = &doc.summary;
    let mut out = format!(
        "# Corpus summary\n\n{} series, {} method applications, k = {}\n\n",
        s.series, s.applications, doc.options.k
    );
    out.push_str(
        "| scorer | granularity | incorporated % | confirmed % | n/a % |\n|---|---|---|---|---|\n",
    );
    for (scorer, b) in [("SoftED", &s.softed), ("NAB", &s.nab)] {
        for (label, sh) in [
            ("application", &b.per_application),
            ("series", &b.per_series),
        ] {
            out.push_str(&format!(
                "| {scorer} | {label} | {} | {} | {} |\n",
                sh.incorporated, sh.confirmed, sh.not_applicable
            ));
        }
    }
    out.push_str("\n| position | kept | climbed | dropped |\n|---|---|---|---|\n");
    for p in &s.rank_changes.positions {
        out.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            p.position, p.kept, p.climbed, p.dropped
        ));
    }
    for r in &doc.series {
        out.push('\n');
        out.push_str(&instance_markdown(r));
    }
    out
}

pub fn scenarios_markdown(doc: &ScenariosDocument) -> String {
    let mut out = String::from("# Scenario suite\n");
    for s in &doc.scenarios {
        out.push_str(&format!(
            "\n### {} ({})\n\n{}\n\n",
            s.name, s.number, s.description
        ));
        out.push_str(&instance_markdown(&s.report));
    }
    out
}
