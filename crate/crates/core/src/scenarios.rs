// SPDX-License-Identifier: MIT OR Apache-2.0

//! Two-method comparison scenarios.
//!
//! Each scenario isolates one property of a pair of detection results
//! (A and B) on a small synthetic timeline: perfect recall with different
//! false-alarm counts, detections in the neighbourhood of the events,
//! symmetric early/late detections, different numbers of near-miss
//! detections, different distances to the events, and an exact detection
//! against a near miss. Detection times are chosen so that, at the default
//! tolerance `k = 15`, the soft F1 values land on simple fractions.

use crate::domain::{validate_instance, EvaluationInstance, RawDetections, Timeline};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub number: u8,
    /// Short identifier, usable as a directory name.
    pub name: &'static str,
    pub description: &'static str,
    pub instance: EvaluationInstance,
}

fn build(length: usize, events: &[i64], a: &[i64], b: &[i64]) -> EvaluationInstance {
    validate_instance(
        Timeline::new(length).expect("non-zero length"),
        events,
        vec![
            RawDetections::new("A", a.to_vec()),
            RawDetections::new("B", b.to_vec()),
        ],
    )
    .expect("scenario inputs are well formed")
    .0
}

pub fn scenario_suite() -> Vec<Scenario> {
    vec![
        Scenario {
            number: 5,
            name: "exp05-perfect-recall",
            description: "both methods detect every event; A adds eight false alarms",
            // A: P = 3/11, R = 1, F1 = 6/14. B: F1 = 1.
            instance: build(
                500,
                &[100, 250, 400],
                &[30, 60, 100, 160, 200, 250, 300, 340, 400, 450, 490],
                &[100, 250, 400],
            ),
        },
        Scenario {
            number: 6,
            name: "exp06-event-neighborhood",
            description:
                "no exact matches; A's nearest detection is closer and A raises fewer alarms",
            // A: membership 1/3 over 8 detections, F1 = 2/27.
            // B: membership 1/15 over 12 detections, F1 = 2/195.
            instance: build(
                1000,
                &[500],
                &[490, 530, 560, 600, 650, 700, 750, 800],
                &[486, 540, 580, 620, 660, 700, 740, 780, 820, 860, 900, 940],
            ),
        },
        Scenario {
            number: 7,
            name: "exp07-detection-symmetry",
            description: "one detection each, equally far before (A) and after (B) the event",
            // Both: membership 13/15.
            instance: build(200, &[100], &[98], &[102]),
        },
        Scenario {
            number: 8,
            name: "exp08-number-of-detections",
            description: "same nearest distance; A adds eight farther detections",
            // Nearest membership 0.6. A: F1 = 1.2 / 10. B: F1 = 0.6.
            instance: build(
                600,
                &[300],
                &[294, 330, 360, 390, 420, 450, 480, 510, 540],
                &[294],
            ),
        },
        Scenario {
            number: 9,
            name: "exp09-detection-distances",
            description: "one detection before each of two events; B's are closer",
            // A: membership 1/15 each, F1 = 1/15. B: 13/15 each, F1 = 13/15.
            instance: build(600, &[200, 400], &[186, 386], &[198, 398]),
        },
        Scenario {
            number: 10,
            name: "exp10-detection-bias",
            description: "A detects the event exactly; B detects it seven observations early",
            // A: F1 = 1. B: membership 8/15, hard F1 n/a.
            instance: build(300, &[150], &[150], &[143]),
        },
    ]
}
