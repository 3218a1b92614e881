use super::{evaluate_subpops, SubpopPredictions};
use crate::dataio::{AugmentationStrategy, Dataset, Label};
use crate::error::{Error, Result};
use crate::models::Classifier;
use crate::siamese::{input_distance, FairnessSpec};

pub(crate) fn predict_all<C: Classifier>(test: &Dataset, model: &C) -> Result<Vec<Label>> {
    if test.is_empty() {
        return Err(Error::EmptyDataset(String::new()));
    }
    test.records
        .iter()
        .map(|r| model.predict(&r.input()))
        .collect()
}

pub fn accuracy<C: Classifier>(test: &Dataset, model: &C) -> Result<f64> {
    let preds = predict_all(test, model)?;
    let correct = preds
        .iter()
        .zip(&test.records)
        .filter(|(p, r)| **p == r.y)
        .count();
    Ok(correct as f64 / test.len() as f64)
}

pub(crate) fn fta_from(preds: &[SubpopPredictions]) -> f64 {
    let fair = preds
        .iter()
        .filter(|p| p.labels.iter().all(|&l| l == p.labels[0]))
        .count();
    fair as f64 / preds.len() as f64
}

/// Fraction of records whose whole sub-population gets one predicted label.
pub fn fta_rate<C: Classifier>(
    test: &Dataset,
    model: &C,
    strategy: &AugmentationStrategy,
) -> Result<f64> {
    Ok(fta_from(&evaluate_subpops(test, model, strategy)?))
}

pub(crate) fn af_from<C: Classifier>(
    preds: &[SubpopPredictions],
    model: &C,
    spec: &FairnessSpec,
) -> f64 {
    let fair = preds
        .iter()
        .filter(|p| {
            let origin = p.subpop.origin();
            p.subpop.members.iter().zip(&p.outputs).all(|(m, out)| {
                spec.output_distance(p.y, out, model.activation())
                    - spec.k * input_distance(origin, m)
                    <= 0.0
            })
        })
        .count();
    fair as f64 / preds.len() as f64
}

/// Fraction of records to which the model is accurately fair: every member
/// of the sub-population has non-positive slack under `spec`.
pub fn af_rate<C: Classifier>(
    test: &Dataset,
    model: &C,
    spec: &FairnessSpec,
    strategy: &AugmentationStrategy,
) -> Result<f64> {
    spec.validate()?;
    Ok(af_from(
        &evaluate_subpops(test, model, strategy)?,
        model,
        spec,
    ))
}

pub(crate) fn consistency_from(test: &Dataset, preds: &[Label], k: usize) -> Result<f64> {
    let n = test.len();
    if k == 0 || k >= n {
        return Err(Error::config(format!(
            "consistency needs 1 <= k < n, got k={k}, n={n}"
        )));
    }
    let xs: Vec<&[f64]> = test.records.iter().map(|r| r.x.as_slice()).collect();
    let mut total = 0.0;
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        dist.clear();
        for j in (0..n).filter(|&j| j != i) {
            let d: f64 = xs[i]
                .iter()
                .zip(xs[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dist.push((d, j));
        }
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        dist.select_nth_unstable_by(k - 1, cmp);
        let disagree = dist[..k]
            .iter()
            .filter(|&&(_, j)| preds[j] != preds[i])
            .count();
        total += disagree as f64 / k as f64;
    }
    Ok(1.0 - total / n as f64)
}

/// k-nearest-neighbour prediction consistency on the non-sensitive features
/// (Euclidean distance, ties broken by record index).
pub fn consistency<C: Classifier>(test: &Dataset, model: &C, k: usize) -> Result<f64> {
    let preds = predict_all(test, model)?;
    consistency_from(test, &preds, k)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dataio::{ColumnSpec, Record, SchemaConfig};
    use crate::metrics::fairness_confusion;
    use crate::models::OutputActivation;

    /// Predicts from a closure over the input.
    struct Fn1<F: Fn(&[f64]) -> f64>(F);

    impl<F: Fn(&[f64]) -> f64> Classifier for Fn1<F> {
        fn output(&self, input: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![(self.0)(input)])
        }
        fn activation(&self) -> OutputActivation {
            OutputActivation::Sigmoid
        }
    }

    fn schema() -> Arc<SchemaConfig> {
        Arc::new(
            SchemaConfig::new(
                "t",
                vec![
                    ColumnSpec::numeric("x0"),
                    ColumnSpec::numeric("x1"),
                    ColumnSpec::sensitive("g", &["a", "b"], "b"),
                    ColumnSpec::label("y", &["0", "1"], "1"),
                ],
            )
            .unwrap(),
        )
    }

    fn dataset(n: usize, p_one: f64) -> Dataset {
        let ones = (n as f64 * p_one).round() as usize;
        let records = (0..n)
            .map(|i| {
                Record::new(
                    vec![i as f64 / n as f64, 0.5],
                    vec![(i % 2) as f64],
                    usize::from(i < ones),
                )
            })
            .collect();
        Dataset::new(schema(), records).unwrap()
    }

    #[test]
    fn constant_model_rates() {
        let d = dataset(100, 0.7);
        let always_one = Fn1(|_| 0.9);
        assert!((accuracy(&d, &always_one).unwrap() - 0.7).abs() < 1e-15);
        let full = AugmentationStrategy::full();
        assert_eq!(fta_rate(&d, &always_one, &full).unwrap(), 1.0);
        let c = fairness_confusion(&d, &always_one, &full).unwrap();
        assert_eq!((c.tfr(), c.ffr(), c.tbr(), c.fbr()), (0.7, 0.3, 0.0, 0.0));
        assert_eq!(consistency(&d, &always_one, 5).unwrap(), 1.0);
    }

    #[test]
    fn flipping_on_ten_records_gives_point_nine() {
        let d = dataset(100, 0.5);
        // counterpart flips only for records with x0 < 0.1 (ten of them)
        let m = Fn1(|inp: &[f64]| {
            if inp[0] < 0.1 && inp[2] == 1.0 {
                0.9
            } else {
                0.1
            }
        });
        let fta = fta_rate(&d, &m, &AugmentationStrategy::full()).unwrap();
        assert!((fta - 0.9).abs() < 1e-15);
    }

    #[test]
    fn consistency_geometry() {
        let s = schema();
        // two clusters of five far apart, labelled by cluster
        let mut recs = Vec::new();
        for c in 0..2 {
            for i in 0..5 {
                recs.push(Record::new(
                    vec![c as f64 + 0.01 * i as f64, c as f64],
                    vec![0.0],
                    c,
                ));
            }
        }
        let d = Dataset::new(s.clone(), recs).unwrap();
        let by_cluster = Fn1(|inp: &[f64]| inp[1]);
        assert_eq!(consistency(&d, &by_cluster, 3).unwrap(), 1.0);

        // pairs of coincident-ish points with opposite labels: nearest neighbour always disagrees
        let mut recs = Vec::new();
        for p in 0..4 {
            let base = 10.0 * p as f64;
            recs.push(Record::new(vec![base, 0.0], vec![0.0], 0));
            recs.push(Record::new(vec![base + 0.001, 1.0], vec![0.0], 0));
        }
        let d = Dataset::new(s, recs).unwrap();
        let checker = Fn1(|inp: &[f64]| inp[1]);
        assert_eq!(consistency(&d, &checker, 1).unwrap(), 0.0);
        assert!(consistency(&d, &checker, 0).is_err());
        assert!(consistency(&d, &checker, 8).is_err());
    }

    #[test]
    fn af_rate_limits() {
        let d = dataset(20, 0.5);
        let full = AugmentationStrategy::full();
        // perfect, consistent model
        let perfect = Fn1(|inp: &[f64]| if inp[0] < 0.5 { 1.0 } else { 0.0 });
        for k in [0.0, 0.3, 10.0] {
            assert_eq!(
                af_rate(&d, &perfect, &FairnessSpec::new(k), &full).unwrap(),
                1.0
            );
        }
        // huge K relaxes every counterpart; only the origin constraint D = 0 remains
        let soft = Fn1(|inp: &[f64]| if inp[0] < 0.25 { 1.0 } else { 0.6 });
        let rate = af_rate(&d, &soft, &FairnessSpec::new(1e9), &full).unwrap();
        let exact_origin = d
            .records
            .iter()
            .filter(|r| (if r.x[0] < 0.25 { 1.0 } else { 0.6 }) == r.y as f64)
            .count() as f64
            / 20.0;
        assert_eq!(rate, exact_origin);
    }
}
