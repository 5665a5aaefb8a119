use facerot::continuum::{FourierField, ScalarSeries, Trig};
use facerot::exec::Execution;
use facerot::fields::{discretize_field, divergence, face_circulation};
use facerot::lattice::{Face, Torus};
use facerot::observables::FourierBasis;
use facerot::sim::{SimConfig, Simulator};
use facerot::stats::{fit_slope, Summary};

fn smooth_field() -> FourierField {
    FourierField::new(
        ScalarSeries::default()
            .with_wave(0.7, [1, 2], Trig::Sin)
            .with_wave(0.3, [0, 1], Trig::Cos),
        ScalarSeries::constant(0.2).with_wave(-0.5, [2, 1], Trig::Cos),
    )
}

const SIDES: [usize; 4] = [8, 16, 32, 64];

fn slope(errors: &[f64]) -> f64 {
    let xs: Vec<f64> = SIDES.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    fit_slope(&xs, &ys)
}

#[test]
fn discrete_divergence_converges_at_second_order() {
    let g = smooth_field();
    let errors: Vec<f64> = SIDES
        .iter()
        .map(|&n| {
            let torus = Torus::new(n).unwrap();
            let gn = discretize_field(&g, &torus);
            let n2 = (n * n) as f64;
            torus
                .vertices()
                .map(|v| (n2 * divergence(&torus, &gn, v) - g.divergence(torus.position(v))).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let s = slope(&errors);
    assert!((-2.3..=-1.7).contains(&s), "slope {s}, errors {errors:?}");
}

#[test]
fn discrete_circulation_converges_at_second_order() {
    let g = smooth_field();
    let errors: Vec<f64> = SIDES
        .iter()
        .map(|&n| {
            let torus = Torus::new(n).unwrap();
            let gn = discretize_field(&g, &torus);
            let n2 = (n * n) as f64;
            let h = 0.5 / n as f64;
            torus
                .vertices()
                .map(|v| {
                    let p = torus.position(v);
                    let f = Face::anticlockwise(v);
                    (n2 * face_circulation(&torus, &gn, &f) - g.curl([p[0] + h, p[1] + h])).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let s = slope(&errors);
    assert!((-2.3..=-1.7).contains(&s), "slope {s}, errors {errors:?}");
}

#[test]
fn dual_norm_of_current_stays_bounded() {
    let profile = ScalarSeries::constant(0.5).with_wave(0.25, [1, 0], Trig::Sin);
    let mut means = Vec::new();
    for n in [8, 16, 32] {
        let mut cfg = SimConfig::new(n, 0.05, 0.5, profile.clone());
        cfg.seed = 3;
        cfg.ensemble_size = 20;
        let sim = Simulator::new(cfg).unwrap();
        let basis = FourierBasis::new(sim.torus(), 2, Execution::Parallel);
        let norms: Vec<f64> = sim
            .map_ensemble(Execution::Parallel, |tr| {
                basis
                    .dual_norm(&tr.snapshots.last().unwrap().crossings, 3.0)
                    .unwrap()
                    .value
            })
            .unwrap();
        means.push(Summary::of(&norms).mean);
    }
    assert!(means.iter().all(|m| m.is_finite() && *m < 1.0), "{means:?}");
    assert!(means[2] <= means[0], "{means:?}");
}
