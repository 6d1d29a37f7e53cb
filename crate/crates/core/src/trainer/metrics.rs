//! Per-class precision/recall/F1 and macro averaging.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::NO_RELATION;

/// Which classes enter the macro average. Every class stays a valid
/// prediction target regardless of the choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// All classes except `no-relation`.
    #[default]
    ExcludeNoRelation,
    AllClasses,
    /// Classes with gold support, `no-relation` excluded.
    GoldPresent,
}

impl FromStr for Averaging {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exclude-no-relation" => Ok(Averaging::ExcludeNoRelation),
            "all-classes" => Ok(Averaging::AllClasses),
            "gold-present" => Ok(Averaging::GoldPresent),
            _ => Err(format!("unknown averaging {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub predicted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub macro_f1: f64,
    pub averaged_over: Vec<String>,
    pub per_class: BTreeMap<String, ClassScores>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores `pred` against `gold`, both indices into `labels`.
pub fn evaluate(gold: &[usize], pred: &[usize], labels: &[String], averaging: Averaging) -> EvalReport {
    assert_eq!(gold.len(), pred.len(), "gold and predictions differ in length");
    let k = labels.len();
    let (mut tp, mut support, mut predicted) = (vec![0; k], vec![0; k], vec![0; k]);
    for (&g, &p) in gold.iter().zip(pred) {
        support[g] += 1;
        predicted[p] += 1;
        if g == p {
            tp[g] += 1;
        }
    }
    let mut per_class = BTreeMap::new();
    let mut averaged_over = Vec::new();
    let mut sum = 0.0;
    for c in 0..k {
        let precision = ratio(tp[c], predicted[c]);
        let recall = ratio(tp[c], support[c]);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let name = &labels[c];
        let counted = match averaging {
            Averaging::AllClasses => true,
            Averaging::ExcludeNoRelation => name != NO_RELATION,
            Averaging::GoldPresent => name != NO_RELATION && support[c] > 0,
        };
        if counted {
            sum += f1;
            averaged_over.push(name.clone());
        }
        per_class.insert(
            name.clone(),
            ClassScores {
                precision,
                recall,
                f1,
                support: support[c],
                predicted: predicted[c],
            },
        );
    }
    let macro_f1 = if averaged_over.is_empty() {
        0.0
    } else {
        sum / averaged_over.len() as f64
    };
    EvalReport {
        macro_f1,
        averaged_over,
        per_class,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_and_all_negative() {
        let l = labels(&["a", "b", NO_RELATION]);
        let gold = [0, 1, 2, 1];
        assert_eq!(evaluate(&gold, &gold, &l, Averaging::default()).macro_f1, 1.0);
        let none = [2, 2, 2, 2];
        let r = evaluate(&gold, &none, &l, Averaging::default());
        assert_eq!(r.macro_f1, 0.0);
        assert_eq!(r.averaged_over, labels(&["a", "b"]));
        assert_eq!(r.per_class[NO_RELATION].recall, 1.0);
    }

    #[test]
    fn one_and_a_half() {
        // a is perfect; b has p = r = 1/2
        let l = labels(&["a", "b", NO_RELATION]);
        let r = evaluate(&[0, 1, 1, 2], &[0, 1, 2, 1], &l, Averaging::default());
        assert_eq!(r.per_class["a"].f1, 1.0);
        assert_eq!(r.per_class["b"].f1, 0.5);
        assert_eq!(r.macro_f1, 0.75);
        let two = evaluate(&[0, 1, 1], &[0, 1, 0], &labels(&["a", "b"]), Averaging::AllClasses);
        assert!((two.per_class["a"].f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((two.macro_f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gold_present_skips_absent_classes() {
        let l = labels(&["a", "b", "c"]);
        let r = evaluate(&[0, 0], &[0, 0], &l, Averaging::GoldPresent);
        assert_eq!(r.macro_f1, 1.0);
        let r = evaluate(&[0, 0], &[0, 0], &l, Averaging::AllClasses);
        assert!((r.macro_f1 - 1.0 / 3.0).abs() < 1e-12);
    }
}
