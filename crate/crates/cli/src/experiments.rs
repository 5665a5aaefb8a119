//! Ensemble experiments comparing the particle system with its continuum
//! predictions, plus the exact and Hodge check suites.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use facerot::continuum::{FourierField, ScalarSeries};
use facerot::exact::{detailed_balance_witness, run_all, CheckReport, Mutation, VerifyOptions};
use facerot::exec::Execution;
use facerot::fields::{discretize_field, hodge_decompose, subspace_ranks, DiscreteVectorField};
use facerot::hydro::{solve_drift_diffusion, solve_heat, CurrentPrediction, DensityField};
use facerot::io::write_field_csv;
use facerot::lattice::Torus;
use facerot::observables::{current_pairing, empirical_pairing_values, martingale_diagnostics, FourierBasis};
use facerot::sim::SimConfig;
use facerot::stats::Summary;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::registry::{self, current_tests, density_tests, FieldSource, TestField, TestFunction};
use crate::spec::{Command, ExperimentSpec};

/// Seed offsets keep the runs of one experiment statistically independent.
pub mod seeds {
    pub const MAIN: u64 = 0;
    pub const ALPHA_ZERO: u64 = 1;
    pub const COARSE: u64 = 2;
    pub const REFLECTED: u64 = 3;
    pub const MARTINGALE: u64 = 4;
}

/// One observed-versus-predicted comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub run: String,
    pub n: usize,
    pub alpha: f64,
    pub time: f64,
    pub id: String,
    pub observed: f64,
    pub predicted: f64,
    pub se: f64,
    pub z: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Row {
    #[allow(clippy::too_many_arguments)]
    fn new(
        experiment: &str,
        run: &Ensemble,
        time: f64,
        id: &str,
        observed: f64,
        predicted: f64,
        se: f64,
        tolerance: f64,
    ) -> Self {
        let z = if se > 0.0 {
            (observed - predicted) / se
        } else {
            f64::NAN
        };
        Self {
            experiment: experiment.into(),
            run: run.label.clone(),
            n: run.n,
            alpha: run.alpha,
            time,
            id: id.into(),
            observed,
            predicted,
            se,
            z,
            tolerance,
            passed: (observed - predicted).abs() <= tolerance,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{:<18} {:<4} {:<10} t={:<5} {:<4} observed={:+.5} predicted={:+.5} se={:.1e} z={:+.2} tol={:.1e}",
            self.experiment,
            if self.passed { "PASS" } else { "FAIL" },
            self.run,
            self.time,
            self.id,
            self.observed,
            self.predicted,
            self.se,
            self.z,
            self.tolerance
        )
    }
}

pub enum ObservableKind {
    /// Site values of a test function.
    Density(Vec<f64>),
    Current(DiscreteVectorField),
}

pub struct Observable {
    pub id: String,
    pub kind: ObservableKind,
}

pub fn observables(torus: &Torus, density: &[TestFunction], current: &[TestField]) -> Vec<Observable> {
    let mut out: Vec<Observable> = density
        .iter()
        .map(|f| Observable {
            id: f.id.into(),
            kind: ObservableKind::Density(torus.vertices().map(|v| f.series.value(torus.position(v))).collect()),
        })
        .collect();
    out.extend(current.iter().map(|g| Observable {
        id: g.id.into(),
        kind: ObservableKind::Current(discretize_field(&g.field, torus)),
    }));
    out
}

/// Pairings of every trajectory with every observable at the comparison
/// times: `values[trajectory][time][observable]`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub label: String,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub times: Vec<f64>,
    pub ids: Vec<String>,
    pub values: Vec<Vec<Vec<f64>>>,
    pub runtime_secs: f64,
}

impl Ensemble {
    pub fn index(&self, id: &str) -> usize {
        self.ids
            .iter()
            .position(|x| x == id)
            .unwrap_or_else(|| panic!("no observable `{id}`"))
    }

    pub fn samples(&self, ti: usize, oi: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[ti][oi]).collect()
    }

    pub fn summary(&self, ti: usize, id: &str) -> Summary {
        Summary::of(&self.samples(ti, self.index(id)))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunInfo {
    pub run: String,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub trajectories: usize,
    pub runtime_secs: f64,
}

impl From<&Ensemble> for RunInfo {
    fn from(e: &Ensemble) -> Self {
        Self {
            run: e.label.clone(),
            n: e.n,
            alpha: e.alpha,
            seed: e.seed,
            trajectories: e.values.len(),
            runtime_secs: e.runtime_secs,
        }
    }
}

/// Extra output file written next to the standard tables.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub checks: Vec<CheckReport>,
    pub ensembles: Vec<Ensemble>,
    pub runs: Vec<RunInfo>,
    /// Observable id to formula.
    pub registry: BTreeMap<String, String>,
    pub notes: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed) && self.checks.iter().all(|c| c.passed)
    }

    fn register(&mut self, density: &[TestFunction], current: &[TestField]) {
        for f in density {
            self.registry
                .insert(f.id.into(), format!("density test function {}", f.formula));
        }
        for g in current {
            self.registry
                .insert(g.id.into(), format!("current test field {}", g.formula));
        }
    }

    fn absorb(&mut self, other: Outcome) {
        self.rows.extend(other.rows);
        self.checks.extend(other.checks);
        self.ensembles.extend(other.ensembles);
        self.runs.extend(other.runs);
        self.registry.extend(other.registry);
        self.notes.extend(other.notes);
        self.artifacts.extend(other.artifacts);
    }
}

/// Parameters of one ensemble run derived from the spec.
pub struct RunPlan {
    pub label: String,
    pub n: usize,
    pub alpha: f64,
    pub seed_offset: u64,
    pub ensemble: usize,
}

impl RunPlan {
    pub fn main(spec: &ExperimentSpec) -> Self {
        Self {
            label: "main".into(),
            n: spec.sim.n,
            alpha: spec.sim.alpha,
            seed_offset: seeds::MAIN,
            ensemble: spec.sim.ensemble,
        }
    }

    fn config(&self, spec: &ExperimentSpec) -> Result<SimConfig> {
        let mut cfg = SimConfig::new(self.n, spec.sim.t, self.alpha, registry::profile(&spec.sim.profile)?);
        cfg.seed = spec.sim.seed.wrapping_add(self.seed_offset);
        cfg.ensemble_size = self.ensemble;
        cfg.snapshot_times = spec.times();
        Ok(cfg)
    }
}

pub fn run_ensemble(
    spec: &ExperimentSpec,
    plan: &RunPlan,
    density: &[TestFunction],
    current: &[TestField],
    exec: Execution,
) -> Result<Ensemble> {
    let start = Instant::now();
    let cfg = plan.config(spec)?;
    let seed = cfg.seed;
    let sim = registry::simulator(cfg, &spec.field()?)?;
    let obs = observables(sim.torus(), density, current);
    let times = spec.times();
    let values = sim
        .map_ensemble(exec, |traj| -> Result<Vec<Vec<f64>>> {
            times
                .iter()
                .map(|&t| {
                    let snap = traj.snapshot_at(t)?;
                    Ok(obs
                        .iter()
                        .map(|o| match &o.kind {
                            ObservableKind::Density(f) => empirical_pairing_values(&snap.config, f),
                            ObservableKind::Current(g) => current_pairing(g, &snap.crossings),
                        })
                        .collect())
                })
                .collect()
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        label: plan.label.clone(),
        n: plan.n,
        alpha: plan.alpha,
        seed,
        times,
        ids: obs.into_iter().map(|o| o.id).collect(),
        values,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// The `alpha = sim.alpha` run on the main lattice, carrying every density
/// and current observable; shared by the density and current comparisons.
pub fn main_ensemble(spec: &ExperimentSpec, exec: Execution) -> Result<Ensemble> {
    run_ensemble(spec, &RunPlan::main(spec), &density_tests(), &current_tests(), exec)
}

fn density_prediction(spec: &ExperimentSpec, t: f64) -> Result<DensityField> {
    let profile = registry::profile(&spec.sim.profile)?;
    let m = spec.analysis.grid;
    Ok(match spec.field()? {
        FieldSource::None => solve_heat(&profile, t, m),
        FieldSource::Smooth(h) if h.is_zero() => solve_heat(&profile, t, m),
        FieldSource::Smooth(h) => solve_drift_diffusion(&DensityField::from_fn(m, 0.0, &profile), &h, t)?,
        FieldSource::File(_) => bail!("continuum predictions need a named smooth field, not a field file"),
    })
}

fn density_rows(spec: &ExperimentSpec, run: &Ensemble, tests: &[TestFunction]) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (ti, &t) in run.times.iter().enumerate() {
        let rho = density_prediction(spec, t)?;
        for f in tests {
            let s = run.summary(ti, f.id);
            let tol = (4.0 * s.se).max(spec.analysis.floor);
            rows.push(Row::new(
                "density",
                run,
                t,
                f.id,
                s.mean,
                rho.pair(&f.series),
                s.se,
                tol,
            ));
        }
    }
    Ok(rows)
}

/// `max_t |mean - predicted|` per test function.
fn discrepancies(rows: &[Row], run: &str, tests: &[TestFunction]) -> Vec<f64> {
    tests
        .iter()
        .map(|f| {
            rows.iter()
                .filter(|r| r.run == run && r.id == f.id)
                .map(|r| (r.observed - r.predicted).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Empirical density against the continuum solution, a refinement
/// comparison with a coarser lattice, and independence from `alpha`.
pub fn hydro_compare(spec: &ExperimentSpec, exec: Execution) -> Result<Outcome> {
    let main = main_ensemble(spec, exec)?;
    hydro_compare_with(spec, main, exec)
}

pub fn hydro_compare_with(spec: &ExperimentSpec, main: Ensemble, exec: Execution) -> Result<Outcome> {
    let tests = density_tests();
    let mut out = Outcome::default();
    out.register(&tests, &[]);

    let coarse = run_ensemble(
        spec,
        &RunPlan {
            label: "coarse".into(),
            n: spec.analysis.coarse_n,
            alpha: spec.sim.alpha,
            seed_offset: seeds::COARSE,
            ensemble: spec.sim.ensemble,
        },
        &tests,
        &[],
        exec,
    )?;
    out.rows.extend(density_rows(spec, &main, &tests)?);
    out.rows.extend(density_rows(spec, &coarse, &tests)?);

    let start = Instant::now();
    let fine_d = discrepancies(&out.rows, &main.label, &tests);
    let coarse_d = discrepancies(&out.rows, &coarse.label, &tests);
    let losses = fine_d.iter().zip(&coarse_d).filter(|(f, c)| f >= c).count();
    for ((f, fd), cd) in tests.iter().zip(&fine_d).zip(&coarse_d) {
        out.notes.push(format!(
            "{}: max discrepancy N={} {:.2e}, N={} {:.2e}",
            f.id, main.n, fd, coarse.n, cd
        ));
    }
    out.checks.push(CheckReport::new(
        format!("refinement N={} vs N={}", main.n, coarse.n),
        tests.len() as u64,
        losses as f64,
        1.0,
        start,
    ));

    if spec.sim.alpha != 0.0 {
        let zero = run_ensemble(
            spec,
            &RunPlan {
                label: "alpha0".into(),
                n: spec.sim.n,
                alpha: 0.0,
                seed_offset: seeds::ALPHA_ZERO,
                ensemble: spec.sim.ensemble,
            },
            &tests,
            &[],
            exec,
        )?;
        for (ti, &t) in main.times.iter().enumerate() {
            for f in &tests {
                let a = main.summary(ti, f.id);
                let b = zero.summary(ti, f.id);
                let se = a.se.hypot(b.se);
                out.rows.push(Row::new(
                    "alpha-independence",
                    &main,
                    t,
                    f.id,
                    a.mean - b.mean,
                    0.0,
                    se,
                    4.0 * se,
                ));
            }
        }
        out.runs.push((&zero).into());
        out.ensembles.push(zero);
    }
    out.runs.push((&main).into());
    out.runs.push((&coarse).into());
    out.ensembles.push(main);
    out.ensembles.push(coarse);
    Ok(out)
}

fn current_predictions(
    spec: &ExperimentSpec,
    alpha: f64,
    tests: &[TestField],
) -> Result<Vec<Vec<facerot::hydro::PredictedPairing>>> {
    let profile = registry::profile(&spec.sim.profile)?;
    let field = spec.field()?;
    if matches!(field, FieldSource::File(_)) {
        bail!("continuum predictions need a named smooth field, not a field file");
    }
    let fields: Vec<FourierField> = tests.iter().map(|g| g.field.clone()).collect();
    let mut pred = CurrentPrediction::new(&profile, alpha, spec.analysis.grid);
    if let Some(h) = field.smooth() {
        pred = pred.with_field(h);
    }
    spec.times().iter().map(|&t| Ok(pred.pairings(&fields, t)?)).collect()
}

/// Integrated currents against the weak-form prediction for `alpha` and
/// `-alpha`, their antisymmetric difference, and the martingale diagnostics.
pub fn current_compare(spec: &ExperimentSpec, exec: Execution) -> Result<Outcome> {
    let main = main_ensemble(spec, exec)?;
    let mut out = current_compare_with(spec, main, exec)?;
    out.absorb(martingale(spec, exec)?);
    Ok(out)
}

pub fn current_compare_with(spec: &ExperimentSpec, main: Ensemble, exec: Execution) -> Result<Outcome> {
    let tests = current_tests();
    let mut out = Outcome::default();
    out.register(&[], &tests);
    let alpha = spec.sim.alpha;
    let reflected = run_ensemble(
        spec,
        &RunPlan {
            label: "reflected".into(),
            n: spec.sim.n,
            alpha: -alpha,
            seed_offset: seeds::REFLECTED,
            ensemble: spec.sim.ensemble,
        },
        &[],
        &tests,
        exec,
    )?;
    let pred_plus = current_predictions(spec, alpha, &tests)?;
    let pred_minus = current_predictions(spec, -alpha, &tests)?;
    let floor = spec.analysis.floor;
    for (run, pred) in [(&main, &pred_plus), (&reflected, &pred_minus)] {
        for (ti, &t) in run.times.iter().enumerate() {
            for (g, p) in tests.iter().zip(&pred[ti]) {
                let s = run.summary(ti, g.id);
                out.rows.push(Row::new(
                    "current",
                    run,
                    t,
                    g.id,
                    s.mean,
                    p.weak,
                    s.se,
                    (4.0 * s.se).max(floor),
                ));
            }
        }
    }
    for (ti, &t) in main.times.iter().enumerate() {
        for (gi, g) in tests.iter().enumerate() {
            let a = main.summary(ti, g.id);
            let b = reflected.summary(ti, g.id);
            let se = a.se.hypot(b.se);
            let predicted = 2.0 * pred_plus[ti][gi].circulation;
            out.rows.push(Row::new(
                "antisymmetric",
                &main,
                t,
                g.id,
                a.mean - b.mean,
                predicted,
                se,
                4.0 * se,
            ));
        }
    }
    out.runs.push((&main).into());
    out.runs.push((&reflected).into());
    out.ensembles.push(main);
    out.ensembles.push(reflected);
    Ok(out)
}

/// Replays recorded event logs: the compensated current `M_t(G)` should have
/// mean zero, and its second moment should match the quadratic variation and
/// obey the a priori bound `4 t (1 + |alpha|) |G|_inf^2 / N^2`.
pub fn martingale(spec: &ExperimentSpec, exec: Execution) -> Result<Outcome> {
    let tests = current_tests();
    let mut out = Outcome::default();
    let times = spec.times();
    let alpha = spec.sim.alpha;
    for (idx, &n) in spec.analysis.martingale_n.iter().enumerate() {
        let start = Instant::now();
        let plan = RunPlan {
            label: format!("martingale{n}"),
            n,
            alpha,
            seed_offset: seeds::MARTINGALE + idx as u64,
            ensemble: spec.sim.ensemble,
        };
        let mut cfg = plan.config(spec)?;
        cfg.record_events = true;
        let seed = cfg.seed;
        let sim = registry::simulator(cfg, &spec.field()?)?;
        let fields: Vec<_> = tests.iter().map(|g| discretize_field(&g.field, sim.torus())).collect();
        // per trajectory: [time][field] -> (residual, quadratic variation)
        let data = sim
            .map_ensemble(exec, |traj| -> Result<Vec<Vec<(f64, f64)>>> {
                let per_field = fields
                    .iter()
                    .map(|g| martingale_diagnostics(sim.model(), &traj, g, &times))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((0..times.len())
                    .map(|ti| {
                        per_field
                            .iter()
                            .map(|p| (p[ti].residual, p[ti].quadratic_variation))
                            .collect()
                    })
                    .collect())
            })?
            .into_iter()
            .collect::<Result<Vec<_>>>()?;

        let ids: Vec<String> = tests.iter().map(|g| g.id.to_string()).collect();
        let ens = Ensemble {
            label: plan.label.clone(),
            n,
            alpha,
            seed,
            times: times.clone(),
            ids: ids.iter().map(|id| format!("M:{id}")).collect(),
            values: data
                .iter()
                .map(|tr| tr.iter().map(|row| row.iter().map(|p| p.0).collect()).collect())
                .collect(),
            runtime_secs: start.elapsed().as_secs_f64(),
        };
        for (ti, &t) in times.iter().enumerate() {
            for (gi, g) in tests.iter().enumerate() {
                let res: Vec<f64> = data.iter().map(|tr| tr[ti][gi].0).collect();
                let qv: Vec<f64> = data.iter().map(|tr| tr[ti][gi].1).collect();
                let s = Summary::of(&res);
                out.rows.push(Row::new(
                    "martingale-mean",
                    &ens,
                    t,
                    g.id,
                    s.mean,
                    0.0,
                    s.se,
                    4.0 * s.se,
                ));

                let sq: Vec<f64> = res.iter().map(|r| r * r).collect();
                let gap = Summary::of(&sq.iter().zip(&qv).map(|(a, b)| a - b).collect::<Vec<_>>());
                let ms = Summary::of(&sq).mean;
                let mq = Summary::of(&qv).mean;
                out.rows
                    .push(Row::new("martingale-qv", &ens, t, g.id, ms, mq, gap.se, 4.0 * gap.se));

                let sup = g.field.sup_bound();
                let bound = 4.0 * t * (1.0 + alpha.abs()) * sup * sup / (n * n) as f64;
                out.checks.push(CheckReport::new(
                    format!("martingale-bound N={n} t={t} {}", g.id),
                    res.len() as u64,
                    ms,
                    spec.analysis.martingale_slack * bound,
                    start,
                ));
            }
        }
        for (id, g) in ids.iter().zip(&tests) {
            out.registry
                .insert(format!("M:{id}"), format!("compensated current of {}", g.formula));
        }
        out.runs.push((&ens).into());
        out.ensembles.push(ens);
    }
    Ok(out)
}

/// Linear response of the current to a weak constant field at uniform
/// density, and relaxation of the drift-diffusion equation to the logit
/// stationary profile.
pub fn einstein(spec: &ExperimentSpec, exec: Execution) -> Result<Outcome> {
    let profile = registry::profile(&spec.sim.profile)?;
    if !profile.waves.is_empty() {
        bail!("einstein needs a flat profile, got `{}`", spec.sim.profile);
    }
    let rho = profile.constant;
    let e = match spec.field()? {
        FieldSource::Smooth(h) if h.components.iter().all(|c| c.waves.is_empty()) => {
            [h.components[0].constant, h.components[1].constant]
        }
        _ => bail!(
            "einstein needs a constant field const:<e1>,<e2>, got `{}`",
            spec.sim.field
        ),
    };
    let zero = ScalarSeries::default;
    let tests = [
        TestField {
            id: "G1",
            formula: "(1, 0)",
            field: FourierField::new(ScalarSeries::constant(1.0), zero()),
        },
        TestField {
            id: "G2",
            formula: "(0, 1)",
            field: FourierField::new(zero(), ScalarSeries::constant(1.0)),
        },
    ];
    let mut out = Outcome::default();
    out.register(&[], &tests);
    let run = run_ensemble(spec, &RunPlan::main(spec), &[], &tests, exec)?;
    let sigma = rho * (1.0 - rho);
    for (ti, &t) in run.times.iter().enumerate() {
        for (a, g) in tests.iter().enumerate() {
            let s = run.summary(ti, g.id);
            let predicted = 2.0 * sigma * e[a] * t;
            let tol = (4.0 * s.se).max(spec.analysis.relative_floor * predicted.abs());
            out.rows
                .push(Row::new("linear-response", &run, t, g.id, s.mean, predicted, s.se, tol));
        }
    }
    out.runs.push((&run).into());
    out.ensembles.push(run);
    out.checks.extend(logit_relaxation(spec, rho)?);
    Ok(out)
}

/// Drift-diffusion driven by `grad V` from a flat start must settle on
/// `logit(rho) = 2 V + const` without changing the mass.
pub fn logit_relaxation(spec: &ExperimentSpec, rho: f64) -> Result<Vec<CheckReport>> {
    let start = Instant::now();
    let m = spec.analysis.grid;
    let v = registry::gradient_potential(spec.analysis.logit_amplitude);
    let h = FourierField::gradient_of(&v);
    let init = DensityField::from_fn(m, 0.0, &ScalarSeries::constant(rho));
    let out = solve_drift_diffusion(&init, &h, spec.analysis.logit_time)?;
    let vg = DensityField::from_fn(m, 0.0, &v);
    let (lo, hi) = out
        .values
        .iter()
        .zip(&vg.values)
        .map(|(r, v)| (r / (1.0 - r)).ln() - 2.0 * v)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    Ok(vec![
        CheckReport::new("logit-stationary", (m * m) as u64, hi - lo, 1e-6, start),
        CheckReport::new("drift-diffusion-mass", 1, (out.mean() - rho).abs(), 1e-12, start),
    ])
}

/// Random-field Hodge decompositions and subspace dimensions; when a field
/// is configured it is decomposed too and its parts written out.
pub fn hodge(spec: &ExperimentSpec) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.sim.seed);
    for &n in &spec.analysis.hodge_sizes {
        let start = Instant::now();
        let torus = Torus::new(n)?;
        let phi = DiscreteVectorField::from_canonical(
            &torus,
            (0..torus.num_edges()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )?;
        let parts = hodge_decompose(&torus, &phi)?;
        let rebuilt = parts.gradient.add(&parts.circulation).add(&parts.harmonic);
        let recon = phi.sub(&rebuilt).max_abs() / phi.max_abs();
        let norm = phi.norm_sq();
        let orth = [
            parts.gradient.inner(&parts.circulation),
            parts.gradient.inner(&parts.harmonic),
            parts.circulation.inner(&parts.harmonic),
        ]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
            / norm;
        out.checks.push(CheckReport::new(
            format!("hodge-reconstruction N={n}"),
            1,
            recon,
            1e-10,
            start,
        ));
        out.checks.push(CheckReport::new(
            format!("hodge-orthogonality N={n}"),
            3,
            orth,
            1e-9,
            start,
        ));
        let ranks = subspace_ranks(&torus);
        let nv = n * n;
        let mismatch = ranks.gradient.abs_diff(nv - 1)
            + ranks.circulation.abs_diff(nv - 1)
            + ranks.harmonic.abs_diff(2)
            + ranks.total.abs_diff(2 * nv);
        out.notes.push(format!(
            "N={n}: ranks gradient={} circulation={} harmonic={} total={}",
            ranks.gradient, ranks.circulation, ranks.harmonic, ranks.total
        ));
        out.checks.push(CheckReport::new(
            format!("hodge-ranks N={n}"),
            4,
            mismatch as f64,
            0.0,
            start,
        ));
    }

    let source = spec.field()?;
    let torus = Torus::new(spec.sim.n)?;
    if let Some(phi) = source.discrete(&torus)? {
        let parts = hodge_decompose(&torus, &phi)?;
        for (name, part) in [
            ("gradient", &parts.gradient),
            ("circulation", &parts.circulation),
            ("harmonic", &parts.harmonic),
        ] {
            let mut buf = Vec::new();
            write_field_csv(&mut buf, &torus, part)?;
            out.artifacts.push(Artifact {
                name: format!("{name}.csv"),
                contents: String::from_utf8(buf)?,
            });
        }
        out.notes.push(format!(
            "field `{}` on N={}: |gradient|^2={:.6e} |circulation|^2={:.6e} harmonic coefficients=({:.6e}, {:.6e})",
            spec.sim.field,
            spec.sim.n,
            parts.gradient.norm_sq(),
            parts.circulation.norm_sq(),
            parts.harmonic_coefficients[0],
            parts.harmonic_coefficients[1]
        ));
    }
    Ok(out)
}

pub fn verify(spec: &ExperimentSpec, exec: Execution) -> Result<Outcome> {
    let mutation = if spec.checks.mutate {
        Mutation::DoubleAntiDiagonal
    } else {
        Mutation::None
    };
    let mut out = Outcome {
        checks: run_all(
            VerifyOptions {
                exact_n4: spec.checks.exact_n4,
                mutation,
            },
            exec,
        )?,
        ..Default::default()
    };
    if let Some(w) = detailed_balance_witness(3, 0.5)? {
        out.notes.push(format!(
            "detailed balance fails at alpha=1/2, N=3: configuration {} edge ({},{}) {:?}, forward rate {} backward rate {}",
            w.config.to_bitstring(),
            w.edge.tail.i,
            w.edge.tail.j,
            w.edge.dir,
            w.forward,
            w.backward
        ));
    }
    Ok(out)
}

/// Plain ensemble run: per-trajectory pairings with the named test
/// functions and the Fourier test fields, the dual Sobolev norm of the
/// integrated current, snapshots and crossing counters.
pub fn simulate(spec: &ExperimentSpec, exec: Execution) -> Result<Outcome> {
    let start = Instant::now();
    let plan = RunPlan::main(spec);
    let cfg = plan.config(spec)?;
    let seed = cfg.seed;
    let sim = registry::simulator(cfg, &spec.field()?)?;
    let torus = sim.torus().clone();
    let density = density_tests();
    let current = current_tests();
    let obs = observables(&torus, &density, &current);
    let basis = FourierBasis::new(&torus, spec.analysis.zmax, exec);
    let times = spec.times();
    let trajectories = sim.run_ensemble(exec)?;

    let mut ids: Vec<String> = obs.iter().map(|o| o.id.clone()).collect();
    ids.extend(
        basis
            .modes
            .iter()
            .map(|(m, _)| format!("I{}({};{})", m.component, m.z[0], m.z[1])),
    );
    ids.push("dual-norm".into());

    let mut values = Vec::with_capacity(trajectories.len());
    let mut snapshots = String::from("trajectory,time,particles,occupation\n");
    let mut counters = String::from("trajectory,time,x_index,y_index,direction,crossings\n");
    for traj in &trajectories {
        let mut per_time = Vec::with_capacity(times.len());
        for snap in &traj.snapshots {
            snapshots.push_str(&format!(
                "{},{},{},{}\n",
                traj.index,
                snap.time,
                snap.config.particles(),
                snap.config.to_bitstring()
            ));
            for (c, j) in snap.crossings.iter().enumerate() {
                let e = torus.canonical_edge_at(c);
                let dir = if c % 2 == 0 { "right" } else { "up" };
                counters.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    traj.index, snap.time, e.tail.i, e.tail.j, dir, j
                ));
            }
        }
        for &t in &times {
            let snap = traj.snapshot_at(t)?;
            let mut row: Vec<f64> = obs
                .iter()
                .map(|o| match &o.kind {
                    ObservableKind::Density(f) => empirical_pairing_values(&snap.config, f),
                    ObservableKind::Current(g) => current_pairing(g, &snap.crossings),
                })
                .collect();
            row.extend(basis.modes.iter().map(|(_, g)| current_pairing(g, &snap.crossings)));
            row.push(basis.dual_norm(&snap.crossings, spec.analysis.k)?.value);
            per_time.push(row);
        }
        values.push(per_time);
    }

    let mut out = Outcome::default();
    out.register(&density, &current);
    for (m, _) in &basis.modes {
        out.registry.insert(
            format!("I{}({};{})", m.component, m.z[0], m.z[1]),
            format!(
                "Fourier test field, component {} wave vector ({}, {})",
                m.component, m.z[0], m.z[1]
            ),
        );
    }
    out.registry.insert(
        "dual-norm".into(),
        format!(
            "squared H^-{} norm of the integrated current, |z|_inf <= {}",
            spec.analysis.k, spec.analysis.zmax
        ),
    );
    let ens = Ensemble {
        label: plan.label,
        n: plan.n,
        alpha: plan.alpha,
        seed,
        times,
        ids,
        values,
        runtime_secs: start.elapsed().as_secs_f64(),
    };
    let mut table = String::from("time,field_id,mean,sd,se,count\n");
    for (ti, &t) in ens.times.iter().enumerate() {
        for (oi, id) in ens.ids.iter().enumerate() {
            let s = Summary::of(&ens.samples(ti, oi));
            table.push_str(&format!("{t},{id},{},{},{},{}\n", s.mean, s.sd, s.se, s.count));
        }
    }
    out.artifacts.push(Artifact {
        name: "ensemble.csv".into(),
        contents: table,
    });
    out.artifacts.push(Artifact {
        name: "snapshots.csv".into(),
        contents: snapshots,
    });
    out.artifacts.push(Artifact {
        name: "counters.csv".into(),
        contents: counters,
    });
    out.runs.push((&ens).into());
    out.ensembles.push(ens);
    Ok(out)
}

pub fn run(spec: &ExperimentSpec) -> Result<Outcome> {
    spec.validate()?;
    let exec = spec.execution;
    match spec.command {
        Command::Verify => verify(spec, exec),
        Command::Simulate => simulate(spec, exec),
        Command::HydroCompare => hydro_compare(spec, exec),
        Command::CurrentCompare => current_compare(spec, exec),
        Command::Einstein => einstein(spec, exec),
        Command::Hodge => hodge(spec),
    }
    .with_context(|| format!("{:?} failed", spec.command))
}
