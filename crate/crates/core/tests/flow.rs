mod common;

use std::sync::Arc;

use approx::assert_abs_diff_eq;
use common::{orbit_point, orbit_sum, random_model, rng, SmallModel};
use emr_multifractal::cylinder::TruncationSpec;
use emr_multifractal::flow::{abramov_entropy, flow_spectrum, flow_spectrum_point, kac_average, kac_transform, SuspensionProblem};
use emr_multifractal::model::{GaussModel, MarkovSystem, SharedModel};
use emr_multifractal::potential::{constant, digit, log_derivative, log_digit, Potential};
use emr_multifractal::pressure::{equilibrium_stats, Combination};
use emr_multifractal::spectrum::{classify_regimes, spectrum_point, uniform_grid, Regime, SolverSettings};
use rand::Rng;

/// Bernoulli weights `p_a ∝ exp(Σ c_i v_i(a))` of a one-step combination on a linear model.
fn bernoulli(m: &SmallModel, coeffs: &[(&str, f64)], s: f64) -> Vec<f64> {
    let n = m.model.symbols();
    let logw: Vec<f64> = (0..n)
        .map(|a| coeffs.iter().map(|(name, c)| c * m.model.column(name).unwrap()[a]).sum::<f64>() - s * m.lambda[a])
        .collect();
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logw.iter().map(|l| (l - top).exp()).sum();
    logw.iter().map(|l| (l - top).exp() / z).collect()
}

#[test]
fn kac_and_abramov_on_finite_bases() {
    let mut r = rng(23);
    for _ in 0..8 {
        let symbols = r.gen_range(2..5);
        let base = random_model(&mut r, symbols);
        let tau: Vec<f64> = (0..symbols).map(|_| r.gen_range(0.5..3.0)).collect();
        let g: Vec<f64> = (0..symbols).map(|_| r.gen_range(-2.0..2.0)).collect();
        let m = SmallModel::new(
            &base.lambda.iter().map(|l| (-l).exp()).collect::<Vec<_>>(),
            vec![("phi".into(), base.model.column("phi").unwrap()), ("tau".into(), tau.clone()), ("g".into(), g.clone())],
        );
        let (q, s) = (r.gen_range(-1.5..1.5), r.gen_range(0.2..1.2));
        let roof = m.column("tau");
        let kac = kac_transform(&m.column("g"), &roof);
        let comb = Combination::new().with(m.column("phi"), q).with(log_derivative(m.shared()), -s);
        let stats = equilibrium_stats(&m.shared(), &comb, TruncationSpec::new(symbols, 1).unwrap(), &[roof.clone(), kac.clone()]).unwrap();

        let p = bernoulli(&m, &[("phi", q)], s);
        let mean_tau: f64 = p.iter().zip(&tau).map(|(pa, t)| pa * t).sum();
        let mean_kac: f64 = (0..symbols).map(|a| p[a] * g[a] * tau[a]).sum();
        let h: f64 = -p.iter().map(|pa| pa * pa.ln()).sum::<f64>();
        assert_abs_diff_eq!(kac_average(&stats, &kac, &roof).unwrap(), mean_kac / mean_tau, epsilon = 1e-10);
        assert_abs_diff_eq!(abramov_entropy(&stats, &roof).unwrap(), h / mean_tau, epsilon = 1e-10);
    }
}

/// Flow average of `g(x, s) = x + s` along the periodic orbit of `word`,
/// integrating over each fiber `{x} × [0, τ(x))` with Simpson's rule.
fn fiber_average(m: &dyn MarkovSystem, roof: &dyn Fn(usize, f64) -> f64, word: &[usize]) -> f64 {
    let mut rotated = word.to_vec();
    let (mut integral, mut time) = (0.0, 0.0);
    for _ in 0..word.len() {
        let x = orbit_point(m, &rotated);
        let t = roof(rotated[0], x);
        let panels = 8;
        let h = t / panels as f64;
        let mut fiber = 0.0;
        for j in 0..panels {
            let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
            fiber += h / 6.0 * ((x + a) + 4.0 * (x + 0.5 * (a + b)) + (x + b));
        }
        integral += fiber;
        time += t;
        rotated.rotate_left(1);
    }
    integral / time
}

#[test]
fn periodic_flow_averages_reduce_to_base_quotients() {
    let m = SmallModel::new(&[0.3, 0.25, 0.35], vec![("phi".into(), vec![0.0; 3])]);
    let roof_fn = |a: usize, x: f64| a as f64 + x;
    let roof = Potential::new("tau", move |a, x| roof_fn(a, x), |k| if k == 0 { 1.0 } else { 0.0 }).with_floor(1.0);
    let kac = Potential::new("kac", move |a, x| x * roof_fn(a, x) + 0.5 * roof_fn(a, x).powi(2), |_| f64::INFINITY);
    let mut words: Vec<Vec<usize>> = vec![vec![]];
    let mut checked = 0;
    for _ in 1..=5 {
        words = words.iter().flat_map(|w| (1..=3).map(move |a| [w.clone(), vec![a]].concat())).collect();
        for w in &words {
            let quotient = orbit_sum(m.model.as_ref(), &[(kac.clone(), 1.0)], w) / orbit_sum(m.model.as_ref(), &[(roof.clone(), 1.0)], w);
            let flow = fiber_average(m.model.as_ref(), &roof_fn, w);
            assert!((flow - quotient).abs() <= 1e-12 * quotient.abs().max(1.0), "{w:?}: {flow} vs {quotient}");
            checked += 1;
        }
    }
    assert_eq!(checked, 3 + 9 + 27 + 81 + 243);
}

fn gauss_flow(n: usize) -> SuspensionProblem {
    let g: SharedModel = Arc::new(GaussModel::new());
    SuspensionProblem::new(g, digit(), log_digit(), TruncationSpec::new(n, 2).unwrap()).unwrap()
}

#[test]
fn flow_spectrum_is_base_spectrum_plus_one() {
    let problem = gauss_flow(80);
    let grid = uniform_grid(0.02, 0.35, 17);
    let (points, report) = flow_spectrum(&problem, &grid, SolverSettings::default(), 4).unwrap();
    let base = classify_regimes(&problem.base_problem().unwrap(), &grid, SolverSettings::default(), 4).unwrap();
    assert_eq!(points.len(), 17);
    for (f, b) in points.iter().zip(&base.points) {
        assert_eq!(f.big_b.to_bits(), (b.b + 1.0).to_bits());
        assert_eq!(f.base.regime, b.regime);
    }
    assert_eq!(report.intervals, base.intervals);
    let single = flow_spectrum_point(&problem, 0.2, 1e-10).unwrap();
    let direct = spectrum_point(&problem.base_problem().unwrap(), 0.2, 1e-10).unwrap();
    assert_eq!(single.big_b.to_bits(), (direct.b + 1.0).to_bits());
}

#[test]
fn constant_observable_fills_the_flow() {
    let g: SharedModel = Arc::new(GaussModel::new());
    let mut last = 0.0;
    for n in [20, 200] {
        let p = SuspensionProblem::from_fiber_constant(g.clone(), digit(), &constant(0.7), TruncationSpec::new(n, 2).unwrap()).unwrap();
        let point = flow_spectrum_point(&p, 0.7, 1e-10).unwrap();
        assert_eq!(point.base.regime, Regime::J2);
        assert!(point.big_b > last && point.big_b < 2.0);
        last = point.big_b;
    }
    assert!(last > 1.99);
}

#[test]
fn roof_must_be_bounded_away_from_zero() {
    let g: SharedModel = Arc::new(GaussModel::new());
    assert!(SuspensionProblem::new(g, log_digit(), digit(), TruncationSpec::new(5, 1).unwrap()).is_err());
}
