mod common;

use std::sync::Arc;

use common::*;
use privmeasure::interval::{log_density_ratio, private_measure_discrete, private_measure_interval};
use privmeasure::measure::tv_distance;
use privmeasure::metric::{fold_net, folded_weights, private_measure_metric};
use privmeasure::net::build_net;
use privmeasure::synth::{dp_synthetic_data, Dataset, Domain};
use privmeasure::transport::wasserstein1_line;
use privmeasure::{FiniteMetricSpace, Metric, RandomStream, WeightedMeasure};

/// Points `j / 64` including both endpoints, with point 0 at the origin.
fn dyadic_line(rng: &mut RandomStream) -> Arc<FiniteMetricSpace> {
    let mut picks: Vec<usize> = (1..64).filter(|_| rng.uniform() < 0.3).collect();
    picks.push(64);
    let mut coords = vec![0.0];
    coords.extend(picks.iter().map(|&j| j as f64 / 64.0));
    // shuffle everything but the origin
    for i in (2..coords.len()).rev() {
        let j = 1 + rng.index(i);
        coords.swap(i, j);
    }
    Arc::new(FiniteMetricSpace::line(coords).unwrap())
}

#[test]
fn metric_pipeline_reduces_to_interval_core_on_the_line() {
    let mut rng = RandomStream::new(200);
    for trial in 0..40 {
        let s = dyadic_line(&mut rng);
        let mu = random_measure(&s, &mut rng);
        let alpha = 5.0 + 100.0 * rng.uniform();
        let metric = private_measure_metric(&mu, alpha, 1.0 / 256.0, &mut RandomStream::new(trial)).unwrap();

        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s.line_coord(a).unwrap().total_cmp(&s.line_coord(b).unwrap()));
        let dense = mu.dense();
        let sorted = WeightedMeasure::new(s.clone(), order.clone(), order.iter().map(|&p| dense[p]).collect()).unwrap();
        let core = private_measure_discrete(&sorted, alpha, &mut RandomStream::new(trial)).unwrap();

        assert_eq!(metric.output.support(), core.output.support());
        assert_eq!(metric.output.weights(), core.output.weights());
        assert_eq!(metric.signed_intermediate.weights(), core.signed_intermediate.weights());
    }
}

#[test]
fn metric_privacy_audit_on_neighbors() {
    let mut rng = RandomStream::new(201);
    let s = random_space(150, 2, Metric::Euclidean, &mut rng);
    let net = build_net(s.clone(), 0.1).unwrap();
    let (folding, _) = fold_net(&net).unwrap();
    for _ in 0..100 {
        let n = 1 + rng.index(30);
        let alpha = 2.0 + 50.0 * rng.uniform();
        let x: Vec<usize> = (0..n).map(|_| rng.index(150)).collect();
        let mut y = x.clone();
        y[rng.index(n)] = rng.index(150);
        let mu = WeightedMeasure::empirical(s.clone(), &x).unwrap();
        let nu = WeightedMeasure::empirical(s.clone(), &y).unwrap();
        let (a, b) = (folded_weights(&mu, &net, &folding).unwrap(), folded_weights(&nu, &net, &folding).unwrap());
        let out: Vec<f64> = (0..a.len()).map(|_| rng.uniform() - 0.3).collect();
        let ratio = log_density_ratio(&out, &a, &b, alpha).unwrap();
        assert!(ratio.abs() <= alpha * tv_distance(&mu, &nu).unwrap() + 1e-9);
    }
}

#[test]
fn interval_mechanism_improves_with_alpha() {
    let mut rng = RandomStream::new(202);
    let s = random_space(20, 1, Metric::Chebyshev, &mut rng);
    let mu = random_measure(&s, &mut rng);
    let mean = |alpha: f64, rng: &mut RandomStream| {
        (0..40)
            .map(|_| wasserstein1_line(&private_measure_interval(&mu, alpha, rng).unwrap().output, &mu).unwrap())
            .sum::<f64>()
            / 40.0
    };
    let coarse = mean(8.0, &mut rng);
    let fine = mean(2048.0, &mut rng);
    assert!(fine < coarse / 4.0, "{fine} vs {coarse}");
}

#[test]
fn synthetic_pipeline_end_to_end() {
    let mut rng = RandomStream::new(203);
    let s = random_space(300, 2, Metric::Chebyshev, &mut rng);
    let data = Dataset::new(s, (0..300).collect()).unwrap();
    let a = dp_synthetic_data(&data, Domain::Cube { dim: 2 }, 1.0, None, &mut RandomStream::new(9)).unwrap();
    let b = dp_synthetic_data(&data, Domain::Cube { dim: 2 }, 1.0, None, &mut RandomStream::new(9)).unwrap();
    assert_eq!(a.points, b.points);
    let p = a.provenance.as_ref().unwrap();
    assert_eq!(p.alpha, 300.0);
    assert_eq!(a.m(), p.m);
    // every synthetic point is a grid center appended after the data
    assert!(a.points.iter().all(|&q| q >= 300));
    let again = dp_synthetic_data(&data, Domain::Generic, 1.0, None, &mut RandomStream::new(9)).unwrap();
    assert!(again.points.iter().all(|&q| q < 300));
}
