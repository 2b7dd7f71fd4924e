use std::cell::RefCell;
use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{StrategyConfig, StrategyKind, TrainConfig};
use super::ewc::{estimate_fisher, ewc_penalty, EwcState};
use super::lwf::{lwf_kd_logit_grad, lwf_kd_loss, TeacherSnapshot};
use super::memory::{entries_of, MemoryBuffer, MemoryPolicy};
use super::projection::{agem_project, gem_project, GemSolver};
use super::si::{si_consolidate, si_penalty, si_update, SiState};
use crate::error::{Error, Result};
use crate::ndcore::{
    backprop, backward, ce_logit_grad, ce_loss, forward, forward_cached, loss_and_grad, AdamState,
    Model, Tensor2,
};
use crate::scenarios::{LabeledSet, TaskStream};

/// SplitMix64 output for `seed` at position `counter`.
pub fn split_seed(seed: u64, counter: u64) -> u64 {
    let mut z = seed.wrapping_add(counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent RNG streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub init: u64,
    pub shuffle: u64,
    pub memory: u64,
    pub fisher: u64,
}

impl SeedSet {
    pub fn derive(master: u64) -> Self {
        Self {
            init: split_seed(master, 0),
            shuffle: split_seed(master, 1),
            memory: split_seed(master, 2),
            fisher: split_seed(master, 3),
        }
    }
}

/// Per-strategy persistent state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StrategyState {
    Stateless,
    Ewc(EwcState),
    Si(Option<SiState>),
    Lwf(Option<TeacherSnapshot>),
    Replay(MemoryBuffer),
    GDumb(MemoryBuffer),
    /// One ring per finished task (GEM and A-GEM).
    Episodic(Vec<MemoryBuffer>),
}

impl StrategyState {
    fn initial(config: &StrategyConfig) -> Self {
        match config.kind {
            StrategyKind::Naive | StrategyKind::Cumulative | StrategyKind::Joint => {
                StrategyState::Stateless
            }
            StrategyKind::EWC => StrategyState::Ewc(EwcState::default()),
            StrategyKind::SI => StrategyState::Si(None),
            StrategyKind::LwF => StrategyState::Lwf(None),
            StrategyKind::Replay => StrategyState::Replay(MemoryBuffer::new(
                config.memory_size,
                MemoryPolicy::Reservoir,
            )),
            StrategyKind::GDumb => StrategyState::GDumb(MemoryBuffer::new(
                config.memory_size,
                MemoryPolicy::ClassBalancedGreedy,
            )),
            StrategyKind::GEM | StrategyKind::AGEM => StrategyState::Episodic(Vec::new()),
        }
    }

    pub fn memory_occupancy(&self) -> usize {
        match self {
            StrategyState::Replay(b) | StrategyState::GDumb(b) => b.len(),
            StrategyState::Episodic(v) => v.iter().map(MemoryBuffer::len).sum(),
            _ => 0,
        }
    }
}

/// What one training session did.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub session: usize,
    pub steps: usize,
    /// Mean batch loss over the last epoch.
    pub final_loss: f64,
    pub projections: usize,
    pub solver_fallbacks: usize,
    pub degenerate_references: usize,
    pub buffer_occupancy: usize,
    /// Tasks whose train split was read.
    pub touched_tasks: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub sessions: Vec<SessionReport>,
    /// Smallest Fisher / Ω entry after each consolidation.
    pub consolidation_min: Vec<f64>,
}

/// Train-data view for one session that rejects reads outside the
/// strategy's allowance and records every read.
pub struct SessionData<'a> {
    stream: &'a TaskStream,
    session: usize,
    privileged: bool,
    touched: RefCell<BTreeSet<usize>>,
}

impl<'a> SessionData<'a> {
    pub fn new(stream: &'a TaskStream, session: usize, privileged: bool) -> Self {
        Self {
            stream,
            session,
            privileged,
            touched: RefCell::new(BTreeSet::new()),
        }
    }

    pub fn train(&self, task: usize) -> Result<&'a LabeledSet> {
        if task != self.session && !self.privileged {
            return Err(Error::AccessViolation {
                session: self.session,
                task,
            });
        }
        let set = &self.stream.task(task)?.train;
        self.touched.borrow_mut().insert(task);
        Ok(set)
    }

    pub fn touched(&self) -> Vec<usize> {
        self.touched.borrow().iter().copied().collect()
    }
}

/// A strategy instance driving one model through a task stream.
#[derive(Debug, Clone)]
pub struct Learner {
    config: StrategyConfig,
    train: TrainConfig,
    seeds: SeedSet,
    completed: usize,
    state: StrategyState,
    memory_rng: ChaCha8Rng,
    diagnostics: Diagnostics,
}

impl Learner {
    pub fn new(config: StrategyConfig, train: TrainConfig, seeds: SeedSet) -> Result<Self> {
        config.validate()?;
        train.validate()?;
        Ok(Self {
            state: StrategyState::initial(&config),
            memory_rng: ChaCha8Rng::seed_from_u64(seeds.memory),
            config,
            train,
            seeds,
            completed: 0,
            diagnostics: Diagnostics::default(),
        })
    }

    pub(super) fn from_parts(
        config: StrategyConfig,
        train: TrainConfig,
        seeds: SeedSet,
        completed: usize,
        state: StrategyState,
        memory_rng: ChaCha8Rng,
        diagnostics: Diagnostics,
    ) -> Result<Self> {
        config.validate()?;
        train.validate()?;
        Ok(Self {
            config,
            train,
            seeds,
            completed,
            state,
            memory_rng,
            diagnostics,
        })
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    pub fn train_config(&self) -> &TrainConfig {
        &self.train
    }

    pub fn seeds(&self) -> SeedSet {
        self.seeds
    }

    pub fn completed(&self) -> usize {
        self.completed
    }

    pub fn state(&self) -> &StrategyState {
        &self.state
    }

    pub(super) fn memory_rng(&self) -> &ChaCha8Rng {
        &self.memory_rng
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    /// A freshly initialised model for this run's init seed.
    pub fn fresh_model(&self, template: &Model) -> Model {
        Model::init(template.spec.clone(), self.seeds.init)
    }

    fn check_order(&self, stream: &TaskStream, t: usize) -> Result<()> {
        let expected = if self.config.kind == StrategyKind::Joint {
            if self.completed > 0 {
                return Err(Error::SessionOrder {
                    expected: stream.len() + 1,
                    got: t,
                });
            }
            stream.len()
        } else {
            self.completed + 1
        };
        if t != expected {
            return Err(Error::SessionOrder { expected, got: t });
        }
        stream.task(t)?;
        Ok(())
    }

    /// Runs training session `t` (1-based). Sessions must come in order;
    /// Joint runs once, as session `T`, over every task.
    pub fn train_task(
        &mut self,
        model: &mut Model,
        stream: &TaskStream,
        t: usize,
    ) -> Result<SessionReport> {
        self.check_order(stream, t)?;
        if model.params.len() != model.spec.param_count() {
            return Err(Error::Shape(
                "model parameters do not match its spec".into(),
            ));
        }
        let kind = self.config.kind;
        let access = SessionData::new(stream, t, kind.reads_all_tasks());
        let mut report = SessionReport {
            session: t,
            ..Default::default()
        };

        let data: LabeledSet = match kind {
            StrategyKind::Cumulative | StrategyKind::Joint => {
                let mut all = LabeledSet::empty(stream.feature_dim());
                for k in 1..=t {
                    all.extend_from(access.train(k)?)?;
                }
                *model = self.fresh_model(model);
                all
            }
            StrategyKind::GDumb => {
                let own = access.train(t)?;
                *model = self.fresh_model(model);
                let StrategyState::GDumb(buf) = &mut self.state else {
                    unreachable!()
                };
                for e in entries_of(own, t) {
                    buf.gdumb_insert_balanced(e);
                }
                buf.to_labeled_set(stream.feature_dim())?
            }
            _ => access.train(t)?.clone(),
        };

        match &mut self.state {
            StrategyState::Lwf(teacher) if self.completed > 0 => {
                *teacher = Some(TeacherSnapshot {
                    spec: model.spec.clone(),
                    params: model.params.clone(),
                });
            }
            StrategyState::Si(si) if si.is_none() => {
                *si = Some(SiState::new(&model.params.values, self.config.si_damping));
            }
            _ => {}
        }

        self.fit(model, &data, t, &mut report)?;
        self.consolidate(model, &access, t)?;

        report.buffer_occupancy = self.state.memory_occupancy();
        report.touched_tasks = access.touched();
        self.completed = t;
        self.diagnostics.sessions.push(report.clone());
        Ok(report)
    }

    fn fit(
        &mut self,
        model: &mut Model,
        data: &LabeledSet,
        t: usize,
        report: &mut SessionReport,
    ) -> Result<()> {
        if data.is_empty() {
            return Ok(());
        }
        let mut adam = AdamState::new(model.params.len(), self.train.learning_rate);
        let mut rng = ChaCha8Rng::seed_from_u64(split_seed(self.seeds.shuffle, t as u64));
        let mut order: Vec<usize> = (0..data.len()).collect();
        for epoch in 0..self.train.epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            let mut batches = 0;
            for chunk in order.chunks(self.train.batch_size) {
                let x = data.features.select_rows(chunk);
                let y: Vec<usize> = chunk.iter().map(|&i| data.labels[i]).collect();
                let loss = self.step(model, &mut adam, x, y, report)?;
                if !loss.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "{} session {t} epoch {}: loss {loss}",
                        self.config.kind,
                        epoch + 1
                    )));
                }
                total += loss;
                batches += 1;
                report.steps += 1;
            }
            report.final_loss = total / batches as f64;
        }
        Ok(())
    }

    fn step(
        &mut self,
        model: &mut Model,
        adam: &mut AdamState,
        x: Tensor2,
        y: Vec<usize>,
        report: &mut SessionReport,
    ) -> Result<f64> {
        let cfg = &self.config;
        let (loss, grad) = match &mut self.state {
            StrategyState::Ewc(ewc) if cfg.lambda > 0.0 && !ewc.anchors.is_empty() => {
                let (ce, mut g) = loss_and_grad(&model.params, &model.spec, &x, &y)?;
                let theta = &model.params.values;
                ewc.add_penalty_grad(theta, cfg.lambda, &mut g.values)?;
                (ce + ewc_penalty(ewc, theta, cfg.lambda)?, g.values)
            }
            StrategyState::Si(Some(si)) => {
                let (ce, g) = loss_and_grad(&model.params, &model.spec, &x, &y)?;
                let before = model.params.values.clone();
                let mut total = g.values.clone();
                let mut loss = ce;
                if cfg.lambda > 0.0 && si.consolidations > 0 {
                    si.add_penalty_grad(&before, cfg.lambda, &mut total)?;
                    loss += si_penalty(si, &before, cfg.lambda)?;
                }
                adam.step(&mut model.params.values, &total)?;
                si_update(si, &g.values, &before, &model.params.values)?;
                return Ok(loss);
            }
            StrategyState::Lwf(Some(teacher)) if cfg.alpha > 0.0 => {
                let cache = forward_cached(&model.params, &model.spec, &x)?;
                let soft = forward(&teacher.params, &teacher.spec, &x)?;
                let student = cache.logits();
                let mut dl = ce_logit_grad(student, &y)?;
                let kd = lwf_kd_logit_grad(&soft, student, cfg.temperature, cfg.alpha)?;
                for (a, b) in dl.data_mut().iter_mut().zip(kd.data()) {
                    *a += b;
                }
                let loss = ce_loss(student, &y)?
                    + lwf_kd_loss(&soft, student, cfg.temperature, cfg.alpha)?;
                (
                    loss,
                    backprop(&model.params, &model.spec, &cache, &dl)?.values,
                )
            }
            StrategyState::Replay(buf) if !buf.is_empty() => {
                let k = self.train.batch_size.min(buf.len());
                let picks = rand::seq::index::sample(&mut self.memory_rng, buf.len(), k);
                let mut xb = x;
                let mut yb = y;
                for i in picks.iter() {
                    xb.push_row(&buf.entries[i].features)?;
                    yb.push(buf.entries[i].label);
                }
                let (loss, g) = loss_and_grad(&model.params, &model.spec, &xb, &yb)?;
                (loss, g.values)
            }
            StrategyState::Episodic(rings) if !rings.iter().all(MemoryBuffer::is_empty) => {
                let (loss, g) = loss_and_grad(&model.params, &model.spec, &x, &y)?;
                let dim = x.cols();
                let projected = if cfg.kind == StrategyKind::GEM {
                    let mut rows = Vec::with_capacity(rings.len());
                    for ring in rings.iter().filter(|r| !r.is_empty()) {
                        let mem = ring.to_labeled_set(dim)?;
                        rows.push(
                            backward(&model.params, &model.spec, &mem.features, &mem.labels)?
                                .values,
                        );
                    }
                    let solver = GemSolver {
                        margin: cfg.gem_margin,
                        ..Default::default()
                    };
                    let out = gem_project(&g.values, &rows, solver)?;
                    report.projections += usize::from(out.projected);
                    report.solver_fallbacks += usize::from(out.fallback);
                    out.grad
                } else {
                    let pool: Vec<_> = rings.iter().flat_map(|r| r.entries.iter()).collect();
                    let k = self.train.batch_size.min(pool.len());
                    let picks = rand::seq::index::sample(&mut self.memory_rng, pool.len(), k);
                    let mut xr = Tensor2::zeros(0, dim);
                    let mut yr = Vec::with_capacity(k);
                    for i in picks.iter() {
                        xr.push_row(&pool[i].features)?;
                        yr.push(pool[i].label);
                    }
                    let g_ref = backward(&model.params, &model.spec, &xr, &yr)?;
                    let out = agem_project(&g.values, &g_ref.values)?;
                    report.projections += usize::from(out.projected);
                    report.degenerate_references += usize::from(out.degenerate);
                    out.grad
                };
                (loss, projected)
            }
            _ => {
                let (loss, g) = loss_and_grad(&model.params, &model.spec, &x, &y)?;
                (loss, g.values)
            }
        };
        adam.step(&mut model.params.values, &grad)?;
        Ok(loss)
    }

    fn consolidate(&mut self, model: &Model, access: &SessionData<'_>, t: usize) -> Result<()> {
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        match &mut self.state {
            StrategyState::Ewc(ewc) => {
                let own = access.train(t)?;
                let seed = split_seed(self.seeds.fisher, t as u64);
                let fisher = estimate_fisher(model, own, self.config.fisher_budget, seed)?;
                self.diagnostics.consolidation_min.push(min(&fisher));
                ewc.push(model.params.values.clone(), fisher)?;
            }
            StrategyState::Si(Some(si)) => {
                si_consolidate(si, &model.params.values)?;
                self.diagnostics.consolidation_min.push(min(&si.importance));
            }
            StrategyState::Replay(buf) => {
                for e in entries_of(access.train(t)?, t) {
                    buf.reservoir_insert(e, &mut self.memory_rng);
                }
            }
            StrategyState::Episodic(rings) => {
                let mut ring =
                    MemoryBuffer::new(self.config.per_task_memory, MemoryPolicy::PerTaskRing);
                for e in entries_of(access.train(t)?, t) {
                    ring.ring_insert(e);
                }
                rings.push(ring);
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndcore::ModelSpec;
    use crate::scenarios::synthetic::{ci_manifest, di_manifest, CiGeometry, DiGeometry};
    use crate::scenarios::{build_stream, BuildOptions, SplitCounts};

    fn tiny_ci() -> TaskStream {
        let groups: [&[&str]; 3] = [&["a", "b"], &["c", "d"], &["e", "f"]];
        let counts = vec![
            vec![
                SplitCounts {
                    train: 20,
                    test: 10
                };
                2
            ];
            3
        ];
        build_stream(
            &ci_manifest(
                &groups,
                &counts,
                CiGeometry {
                    dim: 6,
                    separation: 8.0,
                    sigma: 1.0,
                    offset: 0.0,
                },
                3,
            ),
            &BuildOptions::default(),
        )
        .unwrap()
    }

    fn train_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 2,
            batch_size: 8,
            learning_rate: 1e-2,
        }
    }

    fn model(stream: &TaskStream, seeds: SeedSet) -> Model {
        Model::init(
            ModelSpec::new(stream.feature_dim(), vec![16], stream.num_classes()).unwrap(),
            seeds.init,
        )
    }

    fn run(kind_cfg: StrategyConfig, stream: &TaskStream) -> (Model, Learner) {
        let seeds = SeedSet::derive(7);
        let mut m = model(stream, seeds);
        let mut l = Learner::new(kind_cfg, train_cfg(), seeds).unwrap();
        if l.config().kind == StrategyKind::Joint {
            l.train_task(&mut m, stream, stream.len()).unwrap();
        } else {
            for t in 1..=stream.len() {
                l.train_task(&mut m, stream, t).unwrap();
            }
        }
        (m, l)
    }

    #[test]
    fn seeds_are_distinct() {
        let s = SeedSet::derive(0);
        let all = [s.init, s.shuffle, s.memory, s.fisher];
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(all[i], all[j]);
            }
        }
        assert_eq!(SeedSet::derive(5), SeedSet::derive(5));
    }

    #[test]
    fn session_order_enforced() {
        let stream = tiny_ci();
        let seeds = SeedSet::derive(1);
        let mut m = model(&stream, seeds);
        let mut l =
            Learner::new(StrategyConfig::new(StrategyKind::Naive), train_cfg(), seeds).unwrap();
        assert!(matches!(
            l.train_task(&mut m, &stream, 2),
            Err(Error::SessionOrder {
                expected: 1,
                got: 2
            })
        ));
        l.train_task(&mut m, &stream, 1).unwrap();
        assert!(l.train_task(&mut m, &stream, 1).is_err());

        let mut j =
            Learner::new(StrategyConfig::new(StrategyKind::Joint), train_cfg(), seeds).unwrap();
        assert!(j.train_task(&mut m, &stream, 1).is_err());
        j.train_task(&mut m, &stream, 3).unwrap();
        assert!(j.train_task(&mut m, &stream, 3).is_err());
    }

    #[test]
    fn access_is_audited() {
        let stream = tiny_ci();
        let d = SessionData::new(&stream, 2, false);
        assert!(matches!(
            d.train(1),
            Err(Error::AccessViolation {
                session: 2,
                task: 1
            })
        ));
        d.train(2).unwrap();
        assert_eq!(d.touched(), vec![2]);
        for kind in StrategyKind::ALL {
            let (_, l) = run(
                StrategyConfig::new(kind)
                    .with_memory(20)
                    .with_per_task_memory(5),
                &stream,
            );
            for s in &l.diagnostics().sessions {
                if kind.reads_all_tasks() {
                    assert_eq!(s.touched_tasks, (1..=s.session).collect::<Vec<_>>());
                } else {
                    assert_eq!(s.touched_tasks, vec![s.session], "{kind}");
                }
            }
        }
    }

    #[test]
    fn degenerate_configs_match_naive() {
        let stream = tiny_ci();
        let (naive, _) = run(StrategyConfig::new(StrategyKind::Naive), &stream);
        for cfg in [
            StrategyConfig::new(StrategyKind::EWC).with_lambda(0.0),
            StrategyConfig::new(StrategyKind::SI).with_lambda(0.0),
            StrategyConfig::new(StrategyKind::LwF).with_alpha(0.0),
            StrategyConfig::new(StrategyKind::Replay).with_memory(0),
        ] {
            let (m, _) = run(cfg.clone(), &stream);
            assert_eq!(m.params.values, naive.params.values, "{}", cfg.kind);
        }
    }

    #[test]
    fn memory_bounds_and_consolidation_signs() {
        let stream = tiny_ci();
        let (_, r) = run(
            StrategyConfig::new(StrategyKind::Replay).with_memory(25),
            &stream,
        );
        assert_eq!(r.state().memory_occupancy(), 25);
        let (_, g) = run(
            StrategyConfig::new(StrategyKind::GEM).with_per_task_memory(5),
            &stream,
        );
        assert_eq!(g.state().memory_occupancy(), 15);
        assert!(g.diagnostics().sessions[1].projections <= g.diagnostics().sessions[1].steps);
        for kind in [StrategyKind::EWC, StrategyKind::SI] {
            let (_, l) = run(StrategyConfig::new(kind), &stream);
            assert_eq!(l.diagnostics().consolidation_min.len(), 3);
            assert!(l.diagnostics().consolidation_min.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn gdumb_restarts_from_fresh_init() {
        let stream = tiny_ci();
        let cfg = StrategyConfig::new(StrategyKind::GDumb).with_memory(12);
        let (a, la) = run(cfg.clone(), &stream);
        let (b, _) = run(cfg, &stream);
        assert_eq!(a.params, b.params);
        let StrategyState::GDumb(buf) = la.state() else {
            panic!()
        };
        let counts: Vec<usize> = buf.class_counts().values().copied().collect();
        assert_eq!(counts, vec![2; 6]);
    }

    #[test]
    fn di_stream_trains_every_kind() {
        let names = ["x", "y"];
        let m = di_manifest(&names, &[(40, 20), (40, 20)], DiGeometry::default(), 1);
        let stream = build_stream(&m, &BuildOptions::default()).unwrap();
        for kind in StrategyKind::ALL {
            let (model, l) = run(
                StrategyConfig::new(kind)
                    .with_memory(10)
                    .with_per_task_memory(5),
                &stream,
            );
            assert!(model.params.values.iter().all(|v| v.is_finite()));
            assert!(l
                .diagnostics()
                .sessions
                .iter()
                .all(|s| s.final_loss.is_finite()));
        }
    }
}
