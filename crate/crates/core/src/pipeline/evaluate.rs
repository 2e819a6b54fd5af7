use std::collections::BTreeMap;

use super::{feature_matrix, LabeledRecord, PipelineError, Stage};
use crate::autonet::{predict_labels, DenseNetwork};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRow<T> {
    pub ticker: String,
    pub volatility: T,
    pub ret: T,
    pub raw_output: T,
    pub predicted: usize,
    pub kmeans: usize,
}

impl<T> EvaluationRow<T> {
    pub fn missed(&self) -> bool {
        self.predicted != self.kmeans
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport<T> {
    pub rows: Vec<EvaluationRow<T>>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl<T: Scalar> EvaluationReport<T> {
    pub fn from_rows(rows: Vec<EvaluationRow<T>>) -> Result<Self, PipelineError> {
        let predicted: Vec<usize> = rows.iter().map(|r| r.predicted).collect();
        let reference: Vec<usize> = rows.iter().map(|r| r.kmeans).collect();
        let (correct, total, accuracy) = accuracy(&predicted, &reference)?;
        Ok(Self {
            rows,
            correct,
            total,
            accuracy,
        })
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &EvaluationRow<T>> {
        self.rows.iter().filter(|r| r.missed())
    }
}

/// `(correct, total, correct / total)`.
pub fn accuracy(predicted: &[usize], reference: &[usize]) -> Result<(usize, usize, f64), PipelineError> {
    if predicted.len() != reference.len() {
        return Err(PipelineError::Split(format!(
            "{} predictions for {} references",
            predicted.len(),
            reference.len()
        )));
    }
    if predicted.is_empty() {
        return Err(PipelineError::EmptyDataset {
            stage: Stage::Evaluation,
        });
    }
    let correct = predicted.iter().zip(reference).filter(|(p, r)| p == r).count();
    Ok((correct, predicted.len(), correct as f64 / predicted.len() as f64))
}

/// Predicts every test record and compares against its k-means label.
pub fn evaluate<T: Scalar>(
    net: &DenseNetwork<T>,
    test: &[LabeledRecord<T>],
    num_clusters: usize,
) -> Result<EvaluationReport<T>, PipelineError> {
    if test.is_empty() {
        return Err(PipelineError::EmptyDataset {
            stage: Stage::Evaluation,
        });
    }
    let inputs = feature_matrix(test.iter().map(LabeledRecord::point));
    let predictions =
        predict_labels(net, inputs.view(), num_clusters).map_err(PipelineError::net(Stage::Evaluation))?;
    let rows = test
        .iter()
        .zip(predictions.raw.iter().zip(&predictions.labels))
        .map(|(r, (&raw_output, &predicted))| EvaluationRow {
            ticker: r.ticker.clone(),
            volatility: r.volatility,
            ret: r.ret,
            raw_output,
            predicted,
            kmeans: r.cluster,
        })
        .collect();
    EvaluationReport::from_rows(rows)
}

/// Feature ranges and centroid of one k-means cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterBounds<T> {
    pub cluster: usize,
    pub count: usize,
    pub volatility_min: T,
    pub volatility_max: T,
    pub ret_min: T,
    pub ret_max: T,
    pub mean: [T; 2],
}

impl<T: Scalar> ClusterBounds<T> {
    pub fn contains(&self, point: [T; 2]) -> bool {
        point[0] >= self.volatility_min
            && point[0] <= self.volatility_max
            && point[1] >= self.ret_min
            && point[1] <= self.ret_max
    }

    fn distance_to_mean(&self, point: [T; 2]) -> T {
        let dv = point[0] - self.mean[0];
        let dr = point[1] - self.mean[1];
        (dv * dv + dr * dr).sqrt()
    }
}

/// A record the network labelled differently from k-means, placed against
/// the bounds of both clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Disagreement<T> {
    pub ticker: String,
    pub point: [T; 2],
    pub kmeans: usize,
    pub predicted: usize,
    pub inside_kmeans_bounds: bool,
    pub inside_predicted_bounds: bool,
    pub distance_to_kmeans_mean: T,
    /// `None` when no record carries the predicted label.
    pub distance_to_predicted_mean: Option<T>,
    /// True when the point sits on the outer rim of its k-means cluster: it
    /// is an extreme of that cluster's volatility or return range.
    pub on_kmeans_edge: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BorderAnalysis<T> {
    pub bounds: Vec<ClusterBounds<T>>,
    pub disagreements: Vec<Disagreement<T>>,
}

impl<T: Scalar> BorderAnalysis<T> {
    pub fn to_text(&self) -> String {
        let mut out = String::from("cluster,count,vol_min,vol_max,ret_min,ret_max,vol_mean,ret_mean\n");
        for b in &self.bounds {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                b.cluster, b.count, b.volatility_min, b.volatility_max, b.ret_min, b.ret_max, b.mean[0], b.mean[1]
            ));
        }
        out.push_str("ticker,volatility,return,kmeans,predicted,in_kmeans_bounds,in_predicted_bounds,on_kmeans_edge\n");
        for d in &self.disagreements {
            out.push_str(&format!(
                "{},{:.6},{:.6},{},{},{},{},{}\n",
                d.ticker,
                d.point[0],
                d.point[1],
                d.kmeans,
                d.predicted,
                d.inside_kmeans_bounds,
                d.inside_predicted_bounds,
                d.on_kmeans_edge
            ));
        }
        out
    }
}

/// Per-cluster feature bounds over all labelled records, and where each
/// disagreement of `report` falls relative to them.
pub fn border_analysis<T: Scalar>(all: &[LabeledRecord<T>], report: &EvaluationReport<T>) -> BorderAnalysis<T> {
    let mut groups: BTreeMap<usize, Vec<&LabeledRecord<T>>> = BTreeMap::new();
    for r in all {
        groups.entry(r.cluster).or_default().push(r);
    }
    let bounds: Vec<ClusterBounds<T>> = groups
        .iter()
        .map(|(&cluster, members)| {
            let n = T::from_usize_lossy(members.len());
            let fold = |f: fn(&LabeledRecord<T>) -> T, pick: fn(T, T) -> T| {
                members.iter().map(|r| f(r)).reduce(pick).expect("non-empty group")
            };
            ClusterBounds {
                cluster,
                count: members.len(),
                volatility_min: fold(|r| r.volatility, T::min),
                volatility_max: fold(|r| r.volatility, T::max),
                ret_min: fold(|r| r.ret, T::min),
                ret_max: fold(|r| r.ret, T::max),
                mean: [
                    members.iter().map(|r| r.volatility).sum::<T>() / n,
                    members.iter().map(|r| r.ret).sum::<T>() / n,
                ],
            }
        })
        .collect();
    let find = |c: usize| bounds.iter().find(|b| b.cluster == c);

    let disagreements = report
        .disagreements()
        .map(|row| {
            let point = [row.volatility, row.ret];
            let own = find(row.kmeans);
            let other = find(row.predicted);
            Disagreement {
                ticker: row.ticker.clone(),
                point,
                kmeans: row.kmeans,
                predicted: row.predicted,
                inside_kmeans_bounds: own.is_some_and(|b| b.contains(point)),
                inside_predicted_bounds: other.is_some_and(|b| b.contains(point)),
                distance_to_kmeans_mean: own.map_or(T::nan(), |b| b.distance_to_mean(point)),
                distance_to_predicted_mean: other.map(|b| b.distance_to_mean(point)),
                on_kmeans_edge: own.is_some_and(|b| {
                    point[0] == b.volatility_min
                        || point[0] == b.volatility_max
                        || point[1] == b.ret_min
                        || point[1] == b.ret_max
                }),
            }
        })
        .collect();
    BorderAnalysis { bounds, disagreements }
}
