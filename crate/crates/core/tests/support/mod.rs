// SPDX-License-Identifier: MIT OR Apache-2.0

//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's metric code.

#![allow(dead_code)]

/// Triangular membership written directly from its definition.
pub fn membership(t_d: f64, t_e: f64, k: f64) -> f64 {
    let rising = (t_d - (t_e - k)) / k;
    let falling = ((t_e + k) - t_d) / k;
    rising.min(falling).max(0.0)
}

/// Events at minimal absolute distance from `t`, by linear scan.
pub fn nearest(events: &[usize], t: usize) -> Vec<usize> {
    let best = events.iter().map(|&e| e.abs_diff(t)).min();
    match best {
        None => Vec::new(),
        Some(d) => (0..events.len())
            .filter(|&j| events[j].abs_diff(t) == d)
            .collect(),
    }
}

/// Maximal total credit over every one-to-one assignment of detections to
/// events, where a detection may only credit one of its nearest events.
/// Exponential; meant for a handful of points.
pub fn best_total(events: &[usize], detections: &[usize], k: f64) -> f64 {
    let allowed: Vec<Vec<usize>> = detections.iter().map(|&d| nearest(events, d)).collect();
    let mut used = vec![false; detections.len()];
    search(0, events, detections, &allowed, k, &mut used)
}

fn search(
    j: usize,
    events: &[usize],
    detections: &[usize],
    allowed: &[Vec<usize>],
    k: f64,
    used: &mut [bool],
) -> f64 {
    if j == events.len() {
        return 0.0;
    }
    // Event j takes nothing.
    let mut best = search(j + 1, events, detections, allowed, k, used);
    for i in 0..detections.len() {
        if used[i] || !allowed[i].contains(&j) {
            continue;
        }
        used[i] = true;
        let mu = membership(detections[i] as f64, events[j] as f64, k);
        best = best.max(mu + search(j + 1, events, detections, allowed, k, used));
        used[i] = false;
    }
    best
}

/// Exact-match confusion counts `(tp, fp, tn, fn)` via set lookups.
pub fn hard_counts(
    length: usize,
    events: &[usize],
    detections: &[usize],
) -> (usize, usize, usize, usize) {
    let tp = detections.iter().filter(|d| events.contains(d)).count();
    let fp = detections.len() - tp;
    let fn_ = events.len() - tp;
    let tn = length - tp - fp - fn_;
    (tp, fp, tn, fn_)
}
