// SPDX-License-Identifier: MIT OR Apache-2.0

//! Long-format tables for plotting, one observation per row.

use softed_core::analysis::RankChangeSummary;
use softed_core::hard_metrics::HardCounts;
use softed_core::ScoreSet;

use crate::report::InstanceReport;

/// A table with a fixed header, rendered as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &'static [&'static str]) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

pub const METRICS_HEADER: &[&str] = &["dataset", "method", "metric", "k", "value"];

fn score_rows(prefix: &str, s: &ScoreSet) -> [(String, String); 6] {
    [
        ("precision", s.precision),
        ("recall", s.recall),
        ("sensitivity", s.sensitivity),
        ("specificity", s.specificity),
        ("f_beta", s.f_beta),
        ("f1", s.f1),
    ]
    .map(|(name, v)| (format!("{prefix}_{name}"), v.to_string()))
}

fn count_rows(prefix: &str, c: &HardCounts) -> [(String, String); 4] {
    [("tp", c.tp), ("fp", c.fp), ("tn", c.tn), ("fn", c.fn_)]
        .map(|(name, v)| (format!("{prefix}_{name}"), v.to_string()))
}

/// Appends every metric of every method in `report` to a metrics table.
pub fn push_metrics(table: &mut Table, dataset: &str, report: &InstanceReport) {
    let k = report.instance.k.to_string();
    for m in &report.methods {
        let soft = &m.soft.counts;
        let mut values: Vec<(String, String)> = Vec::new();
        values.extend(count_rows("hard", &m.hard.counts));
        values.extend(score_rows("hard", &m.hard.scores));
        values.extend(
            [
                ("tps", soft.tps),
                ("fps", soft.fps),
                ("tns", soft.tns),
                ("fns", soft.fns),
            ]
            .map(|(name, v)| (format!("soft_{name}"), v.to_string())),
        );
        values.extend(score_rows("soft", &m.soft.scores));
        values.push(("nab_raw_score".into(), m.nab.raw_score.to_string()));
        values.extend(count_rows("nab", &m.nab.counts));
        values.push(("nab_f1".into(), m.nab.f1.to_string()));
        for (metric, value) in values {
            table.push(vec![
                dataset.to_string(),
                m.method.clone(),
                metric,
                k.clone(),
                value,
            ]);
        }
    }
}

pub fn metrics_table<'a>(
    reports: impl IntoIterator<Item = (&'a str, &'a InstanceReport)>,
) -> Table {
    let mut t = Table::new(METRICS_HEADER);
    for (dataset, r) in reports {
        push_metrics(&mut t, dataset, r);
    }
    t
}

pub fn rankings_table<'a>(
    reports: impl IntoIterator<Item = (&'a str, &'a InstanceReport)>,
) -> Table {
    let mut t = Table::new(&["dataset", "criterion", "rank", "method", "value", "tied"]);
    for (dataset, r) in reports {
        for table in &r.rankings {
            for e in &table.entries {
                t.push(vec![
                    dataset.to_string(),
                    table.criterion.as_str().to_string(),
                    e.rank.to_string(),
                    e.method.clone(),
                    e.value.to_string(),
                    e.tied.to_string(),
                ]);
            }
        }
    }
    t
}

/// Soft-minus-hard deltas of a sweep, one row per metric.
pub fn sweep_table(report: &InstanceReport) -> Table {
    let mut t = Table::new(&["method", "k", "metric", "delta"]);
    for row in report.sweep.iter().flatten() {
        for (metric, delta) in [
            ("precision", row.precision_delta),
            ("recall", row.recall_delta),
        ] {
            t.push(vec![
                row.method.clone(),
                row.k.to_string(),
                metric.to_string(),
                delta.to_string(),
            ]);
        }
    }
    t
}

/// SoftED (`nab = false`) or NAB tolerance category per series and method.
pub fn category_table(series: &[InstanceReport], nab: bool) -> Table {
    let mut t = Table::new(&["series", "method", "category"]);
    for r in series {
        for m in &r.methods {
            let c = if nab {
                m.categories.nab
            } else {
                m.categories.softed
            };
            t.push(vec![
                r.instance.series.clone(),
                m.method.clone(),
                c.as_str().to_string(),
            ]);
        }
    }
    t
}

pub fn rank_change_table(summary: &RankChangeSummary) -> Table {
    let mut t = Table::new(&["position", "kept", "climbed", "dropped"]);
    for p in &summary.positions {
        t.push(vec![
            p.position.to_string(),
            p.kept.to_string(),
            p.climbed.to_string(),
            p.dropped.to_string(),
        ]);
    }
    t
}
