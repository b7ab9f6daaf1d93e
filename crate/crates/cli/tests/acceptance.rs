// SPDX-License-Identifier: MIT OR Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Random instances come from fixed seeds.

// `ensure!` negates its condition so that a NaN comparison fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use softed_cli::report::{to_json, CorpusDocument, EvaluationDocument};
use softed_core::analysis::{evaluate, EvaluationOptions};
use softed_core::detectors::{
    classify_anomalies, classify_change_points, classify_events, generate_synthetic, BaseSignal,
    DetectorConfig, Estimator, InjectedEvent, Injection, SyntheticSpec,
};
use softed_core::hard_metrics::confusion;
use softed_core::nab::{make_windows, score_detections, ApplicationProfile};
use softed_core::scenarios::scenario_suite;
use softed_core::softed::{
    attribute, membership, membership_at_offset, resolve_representatives, soft_counts, Attribution,
    ConsumptionRule, SoftCounts,
};
use softed_core::{DetectionSet, EventSet, Score, Timeline};

type Outcome = Result<String, String>;
type Criterion = (u8, &'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

struct Fuzz {
    length: usize,
    events: Vec<usize>,
    detections: Vec<usize>,
}

impl Fuzz {
    fn sets(&self) -> (Timeline, EventSet, DetectionSet) {
        (
            Timeline::new(self.length).unwrap(),
            EventSet::new(self.events.clone()).unwrap(),
            DetectionSet::new("A", self.detections.clone()).unwrap(),
        )
    }
}

fn sorted_sample(rng: &mut ChaCha8Rng, length: usize, amount: usize) -> Vec<usize> {
    let mut v: Vec<usize> = sample(rng, length, amount)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    v.sort_unstable();
    v
}

/// length ≤ `max_len`, 1 ≤ m ≤ `max_m`, 0 ≤ n ≤ `max_n`.
fn fuzz(rng: &mut ChaCha8Rng, max_len: usize, max_m: usize, max_n: usize) -> Fuzz {
    let length = rng.random_range(1..=max_len);
    let m = rng.random_range(1..=max_m.min(length));
    let n = rng.random_range(0..=max_n.min(length));
    Fuzz {
        length,
        events: sorted_sample(rng, length, m),
        detections: sorted_sample(rng, length, n),
    }
}

fn resolved(f: &Fuzz, k: f64, rule: ConsumptionRule) -> (Attribution, SoftCounts) {
    let (tl, ev, det) = f.sets();
    let attr = resolve_representatives(attribute(&ev, &det, k).unwrap(), rule);
    let counts = soft_counts(&attr, &tl, &ev, &det);
    (attr, counts)
}

fn within(limit: Duration, start: Instant) -> Outcome {
    let elapsed = start.elapsed();
    if elapsed < limit {
        Ok(format!("{:.2?}", elapsed))
    } else {
        Err(format!("took {:.2?}, limit {:?}", elapsed, limit))
    }
}

fn criterion_1_membership() -> Outcome {
    let start = Instant::now();
    let tol = 1e-12;
    let mut pairs = 0;
    for ki in 0..40 {
        let k = 0.5 + 1.5 * ki as f64;
        for di in 0..25 {
            let delta = k * 1.25 * di as f64 / 24.0;
            pairs += 1;
            let up = membership_at_offset(delta, k);
            let down = membership_at_offset(-delta, k);
            ensure!(
                (up - down).abs() <= tol,
                "asymmetric at delta={delta}, k={k}"
            );
            let linear = (1.0 - delta / k).max(0.0);
            ensure!(
                (up - linear).abs() <= tol,
                "mu({delta}; k={k}) = {up}, expected {linear}"
            );
            ensure!(
                (up - support::membership(delta, 0.0, k)).abs() <= tol,
                "disagrees with reference at delta={delta}, k={k}"
            );
        }
        ensure!(
            membership_at_offset(0.0, k) == 1.0,
            "mu(t_e) != 1 for k={k}"
        );
        for s in [-1.0, 1.0] {
            ensure!(
                membership_at_offset(s * k, k).abs() <= tol,
                "mu(t_e±k) != 0 for k={k}"
            );
            ensure!(
                (membership_at_offset(s * k / 2.0, k) - 0.5).abs() <= tol,
                "mu(t_e±k/2) != 0.5 for k={k}"
            );
        }
    }
    // Integer-time entry point on the same shape.
    for te in [1usize, 50, 1000] {
        for d in 0..40usize {
            let a = membership(te + d, te, 15.0);
            ensure!(
                (a - (1.0 - d as f64 / 15.0).max(0.0)).abs() <= tol,
                "integer grid at {d}"
            );
            if d < te {
                ensure!(a == membership(te - d, te, 15.0), "integer symmetry at {d}");
            }
        }
    }
    let t = within(Duration::from_secs(1), start)?;
    Ok(format!("{pairs} (delta, k) pairs, {t}"))
}

fn criterion_2_credit_bound() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut max_total_ratio: f64 = 0.0;
    for i in 0..10_000 {
        let f = fuzz(&mut rng, 500, 10, 30);
        let k = rng.random_range(1..=60) as f64;
        let (attr, _) = resolved(&f, k, ConsumptionRule::default());
        let m = f.events.len() as f64;
        let total: f64 = attr.detection_score().iter().sum();
        ensure!(total <= m, "instance {i}: sum ds = {total} > m = {m}");
        for (j, &es) in attr.event_score().iter().enumerate() {
            ensure!(
                (0.0..=1.0).contains(&es),
                "instance {i}: event {j} credited {es}"
            );
        }
        let mut reps: Vec<usize> = attr.representative().iter().flatten().copied().collect();
        let count = reps.len();
        reps.sort_unstable();
        reps.dedup();
        ensure!(
            reps.len() == count,
            "instance {i}: a detection represents two events"
        );
        ensure!(
            attr.detection_score().len() == f.detections.len(),
            "instance {i}: score count differs from n"
        );
        max_total_ratio = max_total_ratio.max(total / m);
    }
    let t = within(Duration::from_secs(10), start)?;
    Ok(format!(
        "10000 instances, max sum(ds)/m = {max_total_ratio:.3}, {t}"
    ))
}

fn criterion_3_degenerate_k() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..1000 {
        let f = fuzz(&mut rng, 500, 10, 30);
        let (tl, ev, det) = f.sets();
        let h = confusion(&tl, &ev, &det);
        let (_, s) = resolved(&f, 0.5, ConsumptionRule::default());
        let hard = [h.tp, h.fp, h.tn, h.fn_].map(|x| x as f64);
        ensure!(
            [s.tps, s.fps, s.tns, s.fns] == hard,
            "instance {i}: soft {s:?} vs hard {h:?}"
        );
    }
    Ok("1000 instances at k = 0.5".into())
}

fn criterion_4_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ks = [15.0, 30.0, 45.0, 60.0];
    let mut strictly_growing = 0;
    for i in 0..1000 {
        let f = fuzz(&mut rng, 500, 10, 30);
        let (tl, ev, det) = f.sets();
        let hard_recall = confusion(&tl, &ev, &det)
            .scores(1.0)
            .recall
            .value()
            .unwrap();
        let runs: Vec<(Attribution, SoftCounts)> = ks
            .iter()
            .map(|&k| resolved(&f, k, ConsumptionRule::default()))
            .collect();
        let mut prev_delta = f64::NEG_INFINITY;
        for (w, k) in runs.windows(2).zip(&ks[1..]) {
            ensure!(
                w[0].0.event_of_detection() == w[1].0.event_of_detection(),
                "instance {i}: nearest-event attribution changed at k={k}"
            );
            ensure!(w[0].1.tps <= w[1].1.tps, "instance {i}: tps fell at k={k}");
        }
        for (_, s) in &runs {
            let recall = s.scores(1.0).recall.value().unwrap();
            let delta = recall - hard_recall;
            ensure!(delta >= 0.0, "instance {i}: negative recall delta {delta}");
            ensure!(delta >= prev_delta, "instance {i}: recall delta fell");
            prev_delta = delta;
        }
        if runs[3].1.tps > runs[0].1.tps {
            strictly_growing += 1;
        }
    }
    Ok(format!(
        "1000 instances at k = 15/30/45/60, tps grew on {strictly_growing}"
    ))
}

/// Every strictly increasing vector of `len` values from `1..=max`.
fn combinations(max: usize, len: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, max: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in start..=max {
            cur.push(v);
            rec(v + 1, max, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, max, len, &mut Vec::new(), &mut out);
    out
}

fn criterion_5_oracle() -> Outcome {
    let start = Instant::now();
    let event_sets: Vec<Vec<usize>> = (1..=2).flat_map(|m| combinations(20, m)).collect();
    let detection_sets: Vec<Vec<usize>> = (0..=3).flat_map(|n| combinations(20, n)).collect();
    let mut checked = 0usize;
    let mut greedy_short = 0usize;
    let mut example = None;
    for k in [2.0, 5.0] {
        for e in &event_sets {
            for d in &detection_sets {
                let f = Fuzz {
                    length: 20,
                    events: e.clone(),
                    detections: d.clone(),
                };
                let oracle = support::best_total(e, d, k);
                let (_, s) = resolved(&f, k, ConsumptionRule::default());
                ensure!(
                    (s.tps - oracle).abs() <= 1e-9,
                    "E={e:?} D={d:?} k={k}: resolved {} vs exhaustive {oracle}",
                    s.tps
                );
                let (_, g) = resolved(&f, k, ConsumptionRule::GreedyFallback);
                if g.tps < oracle - 1e-9 {
                    greedy_short += 1;
                    example.get_or_insert((e.clone(), d.clone(), k, g.tps, oracle));
                }
                checked += 1;
            }
        }
    }
    let t = within(Duration::from_secs(30), start)?;
    let note = match example {
        Some((e, d, k, g, o)) => format!(
            "; greedy-fallback falls short on {greedy_short}, e.g. E={e:?} D={d:?} k={k}: {g} < {o}"
        ),
        None => String::new(),
    };
    Ok(format!(
        "{checked} instances match exhaustive search (optimal-fallback){note}, {t}"
    ))
}

fn criterion_6_scenarios() -> Outcome {
    let opts = EvaluationOptions::default();
    let mut f1 = std::collections::BTreeMap::new();
    for s in scenario_suite() {
        let r = evaluate(&s.instance, &opts).unwrap();
        let get = |m: &str| r.iter().find(|x| x.method == m).unwrap().clone();
        f1.insert(s.number, (get("A"), get("B")));
    }
    let soft = |r: &softed_core::analysis::MetricReport| r.soft.scores.f1;
    let hard = |r: &softed_core::analysis::MetricReport| r.hard.scores.f1;
    let gt = |a: Score, b: Score| matches!((a, b), (Score::Value(x), Score::Value(y)) if x > y);

    let (a, b) = &f1[&5];
    ensure!(
        gt(hard(b), hard(a)) && gt(soft(b), soft(a)),
        "exp 5: quieter method does not win"
    );

    let (a, b) = &f1[&8];
    ensure!(
        gt(soft(b), soft(a)),
        "exp 8: fewer near misses not ahead on soft F1"
    );
    ensure!(
        hard(a) == Score::NotApplicable && hard(b) == Score::NotApplicable,
        "exp 8: hard F1 should be n/a for both"
    );

    let (a, b) = &f1[&9];
    let (sa, sb) = (
        soft(a).value().unwrap_or(0.0),
        soft(b).value().unwrap_or(0.0),
    );
    ensure!(
        sb > sa && sb > 5.0 * sa,
        "exp 9: ratio {sb}/{sa} not above 5"
    );

    let (a, b) = &f1[&10];
    ensure!(
        soft(a) == Score::Value(1.0),
        "exp 10: exact method soft F1 {}",
        soft(a)
    );
    ensure!(gt(soft(a), soft(b)), "exp 10: exact method not ahead");

    let (a6, b6) = &f1[&6];
    ensure!(
        gt(soft(a6), soft(b6)),
        "exp 6: closer, quieter method not ahead"
    );
    let (a7, b7) = &f1[&7];
    ensure!(
        soft(a7) == soft(b7),
        "exp 7: symmetric detections scored differently"
    );
    let v = |s: Score| s.value().map_or("n/a".to_string(), |x| format!("{x:.4}"));
    Ok(format!(
        "soft F1 exp5 {} > {}, exp8 {} > {}, exp9 {} > {} (ratio {:.1}), exp10 {} > {}",
        v(soft(&f1[&5].1)),
        v(soft(&f1[&5].0)),
        v(soft(&f1[&8].1)),
        v(soft(&f1[&8].0)),
        v(soft(&f1[&9].1)),
        v(soft(&f1[&9].0)),
        sb / sa,
        v(soft(&f1[&10].0)),
        v(soft(&f1[&10].1))
    ))
}

fn criterion_7_hard_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut applicable = 0;
    for i in 0..10_000 {
        let f = fuzz(&mut rng, 500, 10, 30);
        let (tl, ev, det) = f.sets();
        let c = confusion(&tl, &ev, &det);
        let m = f.events.len();
        ensure!(c.tp + c.fn_ == m, "instance {i}: tp + fn != m");
        ensure!(
            c.fp + c.tn == f.length - m,
            "instance {i}: fp + tn != length - m"
        );
        ensure!(
            (c.tp, c.fp, c.tn, c.fn_) == support::hard_counts(f.length, &f.events, &f.detections),
            "instance {i}: counts differ from reference"
        );
        let s = c.scores(1.0);
        if let (Some(p), Some(r), Some(f1)) = (s.precision.value(), s.recall.value(), s.f1.value())
        {
            applicable += 1;
            ensure!(
                (f1 - 2.0 * p * r / (p + r)).abs() <= 1e-12,
                "instance {i}: f1 {f1}"
            );
        }
    }
    Ok(format!("10000 instances, {applicable} with applicable F1"))
}

fn criterion_8_nab_windows() -> Outcome {
    let mut grid = 0;
    for length in [1usize, 9, 10, 19, 20, 99, 100, 101, 250, 1000, 1234, 5000] {
        for m in [1usize, 2, 3, 5, 7, 10, 20, 50] {
            if m > length {
                continue;
            }
            let step = length / m;
            let events = EventSet::new((1..=m).map(|i| i * step).collect()).unwrap();
            let expected = (length as f64 / (10.0 * m as f64)).floor() as usize;
            for w in make_windows(&events, &Timeline::new(length).unwrap()) {
                ensure!(
                    w.size == expected,
                    "length {length}, m {m}: size {} != {expected}",
                    w.size
                );
                ensure!(
                    1 <= w.left && w.left <= w.event && w.event <= w.right && w.right <= length,
                    "bad bounds"
                );
            }
            grid += 1;
        }
    }
    let events = EventSet::new((1..=20).map(|i| i * 5).collect()).unwrap();
    let zero = make_windows(&events, &Timeline::new(100).unwrap());
    ensure!(
        zero.iter().all(|w| w.size == 0),
        "length 100, m 20 did not give zero-size windows"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut fuzzed = 0;
    while fuzzed < 1000 {
        let f = fuzz(&mut rng, 200, 30, 40);
        if f.length >= 10 * f.events.len() {
            continue;
        }
        let (tl, ev, det) = f.sets();
        let r = score_detections(&tl, &ev, &det, &ApplicationProfile::standard());
        ensure!(
            r.windows.iter().all(|w| w.size == 0),
            "expected zero-size windows"
        );
        ensure!(
            r.counts == confusion(&tl, &ev, &det),
            "zero-width NAB counts differ from hard"
        );
        fuzzed += 1;
    }
    Ok(format!(
        "{grid} (length, m) grid points, 1000 zero-width instances"
    ))
}

fn criterion_9_detectors() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut interior_events = 0usize;
    for i in 0..500 {
        let nb = rng.random_range(2..=10usize);
        let noise = rng.random_range(0.5..2.0);
        let length = rng.random_range(12 * nb + 40..=400);
        let base = match rng.random_range(0..4) {
            0 => BaseSignal::Constant {
                level: rng.random_range(-5.0..5.0),
            },
            1 => BaseSignal::Trend {
                intercept: 1.0,
                slope: rng.random_range(-0.05..0.05) * noise,
            },
            2 => BaseSignal::Seasonal {
                level: 0.0,
                amplitude: noise,
                period: rng.random_range(200.0..400.0),
            },
            _ => BaseSignal::Constant { level: 0.0 },
        };
        // A spike and a level shift far enough apart that no side window sees both.
        let margin = nb + 2;
        let spike = rng.random_range(margin..=length / 2 - margin);
        let shift = rng.random_range(length / 2 + margin..=length - margin);
        let sign = |rng: &mut ChaCha8Rng| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let spec = SyntheticSpec {
            length,
            base,
            noise,
            events: vec![
                InjectedEvent {
                    time: spike,
                    injection: Injection::Spike {
                        magnitude: sign(&mut rng) * rng.random_range(10.0..20.0) * noise,
                    },
                },
                InjectedEvent {
                    time: shift,
                    injection: Injection::LevelShift {
                        delta: sign(&mut rng) * rng.random_range(10.0..20.0) * noise,
                    },
                },
            ],
            seed: rng.random(),
        };
        let (series, truth) = generate_synthetic(&spec).unwrap();
        ensure!(
            truth.times() == [spike, shift],
            "series {i}: wrong ground truth"
        );
        let estimator = if i % 3 == 0 {
            Estimator::Median
        } else {
            Estimator::Mean
        };
        let cfg = DetectorConfig::new(nb, 3.0 * noise, estimator).unwrap();
        let ev = classify_events(&series, &cfg).unwrap();
        let an = classify_anomalies(&series, &cfg).unwrap();
        let cp = classify_change_points(&series, &cfg).unwrap();
        for &t in an.times() {
            ensure!(
                !cp.contains(t),
                "series {i}: {t} both anomaly and change point"
            );
            ensure!(ev.contains(t), "series {i}: anomaly {t} not an event");
        }
        for &t in cp.times() {
            ensure!(ev.contains(t), "series {i}: change point {t} not an event");
        }
        for &t in ev.times() {
            if t > 1 && t < length {
                interior_events += 1;
                ensure!(
                    an.contains(t) || cp.contains(t),
                    "series {i}: interior event {t} unclassified"
                );
            }
        }
        ensure!(
            an.contains(spike),
            "series {i}: spike at {spike} missed (anomalies {:?})",
            an.times()
        );
        ensure!(
            !cp.contains(spike),
            "series {i}: spike at {spike} reported as change point"
        );
        ensure!(
            cp.times().iter().any(|&t| t.abs_diff(shift) <= 1),
            "series {i}: shift at {shift} missed (change points {:?})",
            cp.times()
        );
    }
    Ok(format!(
        "500 series, {interior_events} interior events partitioned; spikes and shifts found at sigma = 3x noise"
    ))
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/corpus")
}

fn run_softed(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_softed"))
        .args(args)
        .env_remove("SOFTED_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "softed {args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn criterion_10_cli() -> Outcome {
    let start = Instant::now();
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let validator = jsonschema::validator_for(&schema).map_err(|e| e.to_string())?;

    let corpus = corpus_dir();
    let corpus = corpus.to_str().unwrap();
    let instance = format!("{corpus}/synthetic-spike-shift");
    let events = format!("{instance}/events.csv");
    let series = format!("{instance}/series.csv");
    let detections: Vec<String> = ["anomalies", "change-points", "events"]
        .iter()
        .map(|k| format!("{instance}/detections-{k}.csv"))
        .collect();
    let mut eval_args: Vec<&str> = vec!["eval", "--events", &events, "--series", &series];
    for d in &detections {
        eval_args.extend(["--detections", d.as_str()]);
    }

    let mut checked = 0;
    for base in [eval_args.clone(), vec!["batch", corpus]] {
        let mut outputs = Vec::new();
        for jobs in ["1", "4", "1", "4"] {
            let mut args = base.clone();
            args.extend(["--jobs", jobs]);
            outputs.push(run_softed(&args)?);
        }
        ensure!(
            outputs.windows(2).all(|w| w[0] == w[1]),
            "{} output differs across runs or --jobs",
            base[0]
        );
        let doc: serde_json::Value =
            serde_json::from_slice(&outputs[0]).map_err(|e| e.to_string())?;
        let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
        ensure!(
            errors.is_empty(),
            "{} report violates schema: {errors:?}",
            base[0]
        );
        // Parsing into the report types and rendering again is lossless.
        let text = std::str::from_utf8(&outputs[0]).unwrap();
        let again = if base[0] == "eval" {
            to_json(&serde_json::from_str::<EvaluationDocument>(text).map_err(|e| e.to_string())?)
        } else {
            to_json(&serde_json::from_str::<CorpusDocument>(text).map_err(|e| e.to_string())?)
        };
        ensure!(again == text, "{} report does not round-trip", base[0]);
        checked += 1;
    }
    let t = within(Duration::from_secs(60), start)?;
    Ok(format!(
        "{checked} commands byte-identical over 4 runs (--jobs 1/4), schema-valid, {t}"
    ))
}

fn main() {
    let suite_start = Instant::now();
    let criteria: [Criterion; 10] = [
        (1, "membership function", criterion_1_membership),
        (2, "credit bound fuzz", criterion_2_credit_bound),
        (3, "degenerate tolerance", criterion_3_degenerate_k),
        (4, "monotonicity in k", criterion_4_monotonicity),
        (5, "small-instance oracle", criterion_5_oracle),
        (6, "scenario orderings", criterion_6_scenarios),
        (7, "hard-metric identities", criterion_7_hard_identities),
        (8, "NAB windows", criterion_8_nab_windows),
        (9, "detector partition", criterion_9_detectors),
        (10, "CLI determinism and schema", criterion_10_cli),
    ];
    let mut failed = 0;
    for (n, name, check) in criteria {
        let outcome =
            std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} of 10 criteria passed in {:.2?}",
        10 - failed,
        suite_start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
