//! Exact continuous-time simulation with rates `N^2 c_{x,y}`.
//!
//! Per-edge rates live in a Fenwick tree; after a jump only the edges whose
//! flanking faces touch the two endpoints are refreshed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::continuum::{FourierField, ScalarFunction, ScalarSeries};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fenwick::Fenwick;
use crate::fields::{discretize_field, DiscreteVectorField};
use crate::lattice::{canonical_to_directed, directed_to_canonical, Neighbourhoods, Torus};
use crate::model::{Configuration, Model, ModelParams};

pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = trajectory index";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    /// Macroscopic time horizon.
    pub t: f64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FourierField>,
    pub initial_profile: ScalarSeries,
    pub seed: u64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    pub ensemble_size: usize,
    #[serde(default)]
    pub record_events: bool,
}

impl SimConfig {
    pub fn new(n: usize, t: f64, alpha: f64, initial_profile: ScalarSeries) -> Self {
        Self {
            n,
            t,
            alpha,
            field: None,
            initial_profile,
            seed: 0,
            snapshot_times: Vec::new(),
            ensemble_size: 1,
            record_events: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < crate::lattice::MIN_SIDE {
            return Err(Error::InvalidParameter(format!("n must be at least 3, got {}", self.n)));
        }
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t must be finite and >= 0, got {}",
                self.t
            )));
        }
        ModelParams::new(self.alpha)?;
        if self.ensemble_size == 0 {
            return Err(Error::InvalidParameter("ensemble_size must be positive".into()));
        }
        if self.snapshot_times.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("snapshot_times must be sorted".into()));
        }
        if let Some(&s) = self.snapshot_times.iter().find(|&&s| !(s >= 0.0 && s <= self.t)) {
            return Err(Error::InvalidParameter(format!(
                "snapshot time {s} outside [0, {}]",
                self.t
            )));
        }
        Ok(())
    }

    /// Recorded times: always `0` and `t`, plus the requested ones.
    pub fn effective_snapshot_times(&self) -> Vec<f64> {
        let mut ts = vec![0.0];
        ts.extend(self.snapshot_times.iter().copied());
        ts.push(self.t);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }
}

/// Independent Bernoulli(`profile(x/N)`) occupations.
pub fn sample_initial<F: ScalarFunction + ?Sized, R: Rng + ?Sized>(
    profile: &F,
    torus: &Torus,
    rng: &mut R,
) -> Result<Configuration> {
    let n = torus.side();
    let mut occ = Vec::with_capacity(n * n);
    for v in torus.vertices() {
        let u = torus.position(v);
        let p = profile.eval(u);
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProfileOutOfRange {
                value: p,
                u1: u[0],
                u2: u[1],
            });
        }
        occ.push(rng.random_bool(p) as u8);
    }
    Configuration::from_occupations(n, occ)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub config: Configuration,
    /// Net crossings per undirected edge on its canonical orientation.
    pub crossings: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    /// Directed edge crossed by the particle.
    pub edge: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub index: u64,
    pub seed: u64,
    pub snapshots: Vec<Snapshot>,
    pub events: u64,
    pub log: Option<Vec<Event>>,
}

impl Trajectory {
    pub fn initial(&self) -> &Configuration {
        &self.snapshots[0].config
    }

    pub fn snapshot_at(&self, t: f64) -> Result<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| s.time == t)
            .ok_or(Error::SnapshotNotRecorded(t))
    }
}

/// Immutable per-run data shared by all trajectories of an ensemble.
#[derive(Clone, Debug)]
pub struct Simulator {
    cfg: SimConfig,
    model: Model,
    neighbourhoods: Neighbourhoods,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        let torus = Torus::new(cfg.n)?;
        let h = cfg.field.as_ref().map(|h| discretize_field(h, &torus));
        Self::build(cfg, torus, h)
    }

    /// Like `new`, but with an already discretized field `H_N`; the
    /// continuum field of `cfg` must be absent.
    pub fn with_discrete_field(cfg: SimConfig, h: DiscreteVectorField) -> Result<Self> {
        if cfg.field.is_some() {
            return Err(Error::InvalidParameter(
                "both a continuum and a discrete field were given".into(),
            ));
        }
        let torus = Torus::new(cfg.n)?;
        Self::build(cfg, torus, Some(h))
    }

    fn build(cfg: SimConfig, torus: Torus, h: Option<DiscreteVectorField>) -> Result<Self> {
        cfg.validate()?;
        let mut params = ModelParams::new(cfg.alpha)?;
        if let Some(h) = h {
            params = params.with_field(h);
        }
        let model = Model::new(torus, params)?;
        let neighbourhoods = Neighbourhoods::new(model.torus());
        Ok(Self {
            cfg,
            model,
            neighbourhoods,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn torus(&self) -> &Torus {
        self.model.torus()
    }

    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(index);
        rng
    }

    /// Trajectory `index` of the ensemble, started from the configured profile.
    pub fn run(&self, index: u64) -> Result<Trajectory> {
        let mut rng = self.rng(index);
        let init = sample_initial(&self.cfg.initial_profile, self.torus(), &mut rng)?;
        Ok(self.evolve(init, index, &mut rng))
    }

    /// Trajectory `index` from a fixed initial configuration.
    pub fn run_from(&self, init: Configuration, index: u64) -> Result<Trajectory> {
        if init.side() != self.cfg.n {
            return Err(Error::InvalidParameter(
                "initial configuration has the wrong size".into(),
            ));
        }
        let mut rng = self.rng(index);
        Ok(self.evolve(init, index, &mut rng))
    }

    fn evolve(&self, init: Configuration, index: u64, rng: &mut ChaCha8Rng) -> Trajectory {
        let torus = self.torus();
        let n = torus.side();
        let scale = (n * n) as f64;
        let mut config = init;
        let mut rates = Fenwick::new(
            (0..torus.num_directed_edges())
                .map(|k| self.model.rate_at(config.occupations(), k))
                .collect(),
        );
        let rebuild_every = torus.num_directed_edges() as u64;
        let mut crossings = vec![0i64; torus.num_edges()];
        let mut log = self.cfg.record_events.then(Vec::new);
        let mut events = 0u64;
        let mut time = 0.0;
        let mut next = self.next_event(&mut rates, time, scale, rng);
        let mut snapshots = Vec::new();

        for target in self.cfg.effective_snapshot_times() {
            while next <= target {
                time = next;
                let k = self.choose_edge(&mut rates, rng);
                let s = torus.stencil(k);
                let occ = config.occupations_mut();
                assert!(
                    occ[s.tail as usize] == 1 && occ[s.head as usize] == 0,
                    "selected edge {k} is not an allowed jump"
                );
                occ.swap(s.tail as usize, s.head as usize);
                let (c, sign) = directed_to_canonical(torus, k);
                crossings[c] += sign;
                for &d in self.neighbourhoods.get(c) {
                    let fwd = canonical_to_directed(d as usize);
                    let rev = torus.reverse_index(fwd);
                    rates.set(fwd, self.model.rate_at(config.occupations(), fwd));
                    rates.set(rev, self.model.rate_at(config.occupations(), rev));
                }
                events += 1;
                if events.is_multiple_of(rebuild_every) {
                    rates.rebuild();
                }
                if let Some(log) = log.as_mut() {
                    log.push(Event { time, edge: k as u32 });
                }
                next = self.next_event(&mut rates, time, scale, rng);
            }
            snapshots.push(Snapshot {
                time: target,
                config: config.clone(),
                crossings: crossings.clone(),
            });
        }

        Trajectory {
            index,
            seed: self.cfg.seed,
            snapshots,
            events,
            log,
        }
    }

    fn next_event(&self, rates: &mut Fenwick, now: f64, scale: f64, rng: &mut ChaCha8Rng) -> f64 {
        let mut total = rates.total();
        if total < 1e-9 {
            rates.rebuild();
            total = rates.total();
            if total <= 0.0 {
                return f64::INFINITY;
            }
        }
        let hold: f64 = rng.sample(Exp1);
        now + hold / (scale * total)
    }

    fn choose_edge(&self, rates: &mut Fenwick, rng: &mut ChaCha8Rng) -> usize {
        loop {
            let u = rng.random::<f64>() * rates.total();
            let k = rates.find(u);
            if rates.weight(k) > 0.0 {
                return k;
            }
            // only reachable through accumulated rounding in the tree
            rates.rebuild();
        }
    }

    /// All trajectories of the ensemble.
    pub fn run_ensemble(&self, exec: Execution) -> Result<Vec<Trajectory>> {
        self.map_ensemble(exec, |t| t)
    }

    /// Run each trajectory and reduce it immediately with `f`.
    pub fn map_ensemble<T, F>(&self, exec: Execution, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(Trajectory) -> T + Sync + Send,
    {
        exec.map_indexed(self.cfg.ensemble_size, |i| self.run(i as u64).map(&f))
            .into_iter()
            .collect()
    }
}
