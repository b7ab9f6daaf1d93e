// SPDX-License-Identifier: MIT OR Apache-2.0

//! Cross-method reports, rankings, tolerance categories and k-sweeps.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::domain::{EvaluationInstance, ToleranceConfig};
use crate::error::Result;
use crate::hard_metrics::{self, HardCounts};
use crate::nab::{self, ApplicationProfile, NabResult};
use crate::score::{Score, ScoreSet};
use crate::softed::{self, ConsumptionRule, SoftCounts};

/// A tolerant F1 must exceed the hard F1 by more than this to count as an
/// improvement.
pub const SCORE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvaluationOptions {
    pub tolerance: ToleranceConfig,
    pub profile: ApplicationProfile,
    pub rule: ConsumptionRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardReport {
    pub counts: HardCounts,
    pub scores: ScoreSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftReport {
    pub counts: SoftCounts,
    pub scores: ScoreSet,
}

/// Hard, soft and NAB results of one method on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub method: String,
    pub k: f64,
    pub hard: HardReport,
    pub soft: SoftReport,
    pub nab: NabResult,
}

/// One report per method, in the instance's method order.
pub fn evaluate(
    instance: &EvaluationInstance,
    options: &EvaluationOptions,
) -> Result<Vec<MetricReport>> {
    options.profile.validate()?;
    instance
        .methods()
        .map(|method| evaluate_method(instance, method, options))
        .collect()
}

pub fn evaluate_method(
    instance: &EvaluationInstance,
    method: &str,
    options: &EvaluationOptions,
) -> Result<MetricReport> {
    let beta = options.tolerance.beta();
    let k = options.tolerance.k();
    let hard_counts = hard_metrics::hard_confusion(instance, method)?;
    let soft = softed::soft_confusion(instance, method, k, options.rule)?;
    let nab = nab::nab_score(instance, method, &options.profile)?;
    Ok(MetricReport {
        method: method.to_string(),
        k,
        hard: HardReport {
            counts: hard_counts,
            scores: hard_counts.scores(beta),
        },
        soft: SoftReport {
            counts: soft.counts,
            scores: soft.counts.scores(beta),
        },
        nab,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceCategory {
    /// The tolerant F1 is higher, or only the tolerant F1 is computable.
    Incorporated,
    /// Both F1 values are computable and equal.
    Confirmed,
    /// Even the tolerant F1 is not computable.
    NotApplicable,
}

impl ToleranceCategory {
    pub const ALL: [ToleranceCategory; 3] = [
        ToleranceCategory::Incorporated,
        ToleranceCategory::Confirmed,
        ToleranceCategory::NotApplicable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ToleranceCategory::Incorporated => "incorporated",
            ToleranceCategory::Confirmed => "confirmed",
            ToleranceCategory::NotApplicable => "not_applicable",
        }
    }
}

/// Compares a tolerant F1 against the hard F1.
pub fn categorize(hard_f1: Score, tolerant_f1: Score) -> ToleranceCategory {
    match (hard_f1, tolerant_f1) {
        (_, Score::NotApplicable) => ToleranceCategory::NotApplicable,
        (Score::NotApplicable, Score::Value(_)) => ToleranceCategory::Incorporated,
        (Score::Value(h), Score::Value(s)) if s > h + SCORE_EPS => ToleranceCategory::Incorporated,
        (Score::Value(_), Score::Value(_)) => ToleranceCategory::Confirmed,
    }
}

/// SoftED F1 against hard F1.
pub fn categorize_tolerance(report: &MetricReport) -> ToleranceCategory {
    categorize(report.hard.scores.f1, report.soft.scores.f1)
}

/// NAB window F1 against hard F1.
pub fn categorize_nab_tolerance(report: &MetricReport) -> ToleranceCategory {
    categorize(report.hard.scores.f1, report.nab.f1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    HardF1,
    SoftF1,
    NabRaw,
    NabF1,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::HardF1,
        Criterion::SoftF1,
        Criterion::NabRaw,
        Criterion::NabF1,
    ];

    pub fn value(self, report: &MetricReport) -> Score {
        match self {
            Criterion::HardF1 => report.hard.scores.f1,
            Criterion::SoftF1 => report.soft.scores.f1,
            Criterion::NabRaw => Score::Value(report.nab.raw_score),
            Criterion::NabF1 => report.nab.f1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::HardF1 => "hard_f1",
            Criterion::SoftF1 => "soft_f1",
            Criterion::NabRaw => "nab_raw",
            Criterion::NabF1 => "nab_f1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub method: String,
    pub value: Score,
    /// 1-based; tied methods share the rank of the first of their group.
    pub rank: usize,
    pub tied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub criterion: Criterion,
    pub entries: Vec<RankEntry>,
}

impl RankingTable {
    /// 1-based row of `method`, if present.
    pub fn position(&self, method: &str) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.method == method)
            .map(|p| p + 1)
    }

    pub fn top(&self) -> Option<&RankEntry> {
        self.entries.first()
    }
}

fn same_value(a: Score, b: Score) -> bool {
    a.cmp_desc(b) == Ordering::Equal
}

/// Orders methods by `criterion`, best first. n/a sorts below every number;
/// equal values share a rank and are flagged, listed by method name.
pub fn rank(reports: &[MetricReport], criterion: Criterion) -> RankingTable {
    let mut rows: Vec<(String, Score)> = reports
        .iter()
        .map(|r| (r.method.clone(), criterion.value(r)))
        .collect();
    rows.sort_by(|a, b| a.1.cmp_desc(b.1).then_with(|| a.0.cmp(&b.0)));

    let mut entries: Vec<RankEntry> = Vec::with_capacity(rows.len());
    let mut group_start = 0;
    for (i, (method, value)) in rows.into_iter().enumerate() {
        if i > 0 && !same_value(entries[group_start].value, value) {
            group_start = i;
        }
        entries.push(RankEntry {
            method,
            value,
            rank: group_start + 1,
            tied: false,
        });
    }
    for i in 0..entries.len() {
        let tied = entries
            .iter()
            .enumerate()
            .any(|(j, e)| j != i && e.rank == entries[i].rank);
        entries[i].tied = tied;
    }
    RankingTable { criterion, entries }
}

/// What happened at one row of the ranking when switching criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PositionChange {
    pub position: usize,
    /// Same method at this row under both criteria.
    pub kept: usize,
    /// The new occupant came from a lower row.
    pub climbed: usize,
    /// The new occupant came from a higher row.
    pub dropped: usize,
}

impl PositionChange {
    pub fn changed(&self) -> usize {
        self.climbed + self.dropped
    }

    fn add(&mut self, other: &PositionChange) {
        self.kept += other.kept;
        self.climbed += other.climbed;
        self.dropped += other.dropped;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RankChangeSummary {
    pub positions: Vec<PositionChange>,
}

impl RankChangeSummary {
    fn merge(&mut self, other: &RankChangeSummary) {
        if self.positions.len() < other.positions.len() {
            let from = self.positions.len();
            self.positions
                .extend((from..other.positions.len()).map(|i| PositionChange {
                    position: i + 1,
                    ..Default::default()
                }));
        }
        for (mine, theirs) in self.positions.iter_mut().zip(&other.positions) {
            mine.add(theirs);
        }
    }
}

/// Per row `1..=depth` of `after`: whether its method held the same row in
/// `before`, climbed from a lower one, or dropped from a higher one. A
/// method absent from `before` counts as climbed.
pub fn compare_rankings(
    before: &RankingTable,
    after: &RankingTable,
    depth: usize,
) -> RankChangeSummary {
    let positions = after
        .entries
        .iter()
        .take(depth)
        .enumerate()
        .map(|(i, entry)| {
            let position = i + 1;
            let mut change = PositionChange {
                position,
                ..Default::default()
            };
            match before.position(&entry.method) {
                Some(p) if p == position => change.kept = 1,
                Some(p) if p < position => change.dropped = 1,
                _ => change.climbed = 1,
            }
            change
        })
        .collect();
    RankChangeSummary { positions }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub k: f64,
    pub precision_delta: Score,
    pub recall_delta: Score,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn for_method<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }
}

/// Soft minus hard precision and recall for every method at every `k`.
/// Rows are grouped by method (instance order), then `k` in the given order.
pub fn sweep_tolerance(
    instance: &EvaluationInstance,
    k_values: &[f64],
    options: &EvaluationOptions,
) -> Result<SweepTable> {
    let beta = options.tolerance.beta();
    let tolerances = k_values
        .iter()
        .map(|&k| ToleranceConfig::new(k, beta))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(instance.detections().len() * k_values.len());
    for method in instance.methods() {
        let hard = hard_metrics::hard_confusion(instance, method)?.scores(beta);
        for tol in &tolerances {
            let soft = softed::soft_confusion(instance, method, tol.k(), options.rule)?
                .counts
                .scores(beta);
            rows.push(SweepRow {
                method: method.to_string(),
                k: tol.k(),
                precision_delta: soft.precision.delta(hard.precision),
                recall_delta: soft.recall.delta(hard.recall),
            });
        }
    }
    Ok(SweepTable { rows })
}

/// Reports of every method on one named series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEvaluation {
    pub series: String,
    pub reports: Vec<MetricReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub incorporated: usize,
    pub confirmed: usize,
    pub not_applicable: usize,
}

impl CategoryCounts {
    fn bump(&mut self, category: ToleranceCategory) {
        match category {
            ToleranceCategory::Incorporated => self.incorporated += 1,
            ToleranceCategory::Confirmed => self.confirmed += 1,
            ToleranceCategory::NotApplicable => self.not_applicable += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.incorporated + self.confirmed + self.not_applicable
    }

    /// Percentages of the total; all zero for an empty tally.
    pub fn shares(&self) -> CategoryShares {
        let total = self.total();
        let pct = |c: usize| {
            if total == 0 {
                0.0
            } else {
                100.0 * c as f64 / total as f64
            }
        };
        CategoryShares {
            incorporated: pct(self.incorporated),
            confirmed: pct(self.confirmed),
            not_applicable: pct(self.not_applicable),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryShares {
    pub incorporated: f64,
    pub confirmed: f64,
    pub not_applicable: f64,
}

/// Category percentages at two granularities: pooled over every
/// (series, method) application, and averaged per series.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryBreakdown {
    pub counts: CategoryCounts,
    pub per_application: CategoryShares,
    pub per_series: CategoryShares,
}

fn breakdown(
    corpus: &[SeriesEvaluation],
    categorize: fn(&MetricReport) -> ToleranceCategory,
) -> CategoryBreakdown {
    let mut pooled = CategoryCounts::default();
    let mut sums = CategoryShares::default();
    let mut series_with_methods = 0usize;
    for s in corpus {
        let mut local = CategoryCounts::default();
        for r in &s.reports {
            let c = categorize(r);
            pooled.bump(c);
            local.bump(c);
        }
        if local.total() > 0 {
            series_with_methods += 1;
            let sh = local.shares();
            sums.incorporated += sh.incorporated;
            sums.confirmed += sh.confirmed;
            sums.not_applicable += sh.not_applicable;
        }
    }
    let avg = |x: f64| {
        if series_with_methods == 0 {
            0.0
        } else {
            x / series_with_methods as f64
        }
    };
    CategoryBreakdown {
        counts: pooled,
        per_application: pooled.shares(),
        per_series: CategoryShares {
            incorporated: avg(sums.incorporated),
            confirmed: avg(sums.confirmed),
            not_applicable: avg(sums.not_applicable),
        },
    }
}

/// Corpus-level view: tolerance categories for SoftED and NAB against hard
/// F1, and summed top-`depth` rank changes from hard F1 to soft F1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub series: usize,
    pub applications: usize,
    pub softed: CategoryBreakdown,
    pub nab: CategoryBreakdown,
    pub rank_changes: RankChangeSummary,
}

pub fn summarize_corpus(corpus: &[SeriesEvaluation], depth: usize) -> CorpusSummary {
    let mut rank_changes = RankChangeSummary::default();
    for s in corpus {
        let hard = rank(&s.reports, Criterion::HardF1);
        let soft = rank(&s.reports, Criterion::SoftF1);
        rank_changes.merge(&compare_rankings(&hard, &soft, depth));
    }
    CorpusSummary {
        series: corpus.len(),
        applications: corpus.iter().map(|s| s.reports.len()).sum(),
        softed: breakdown(corpus, categorize_tolerance),
        nab: breakdown(corpus, categorize_nab_tolerance),
        rank_changes,
    }
}
