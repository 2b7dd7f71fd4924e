//! Property suites run by `clbench selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::audiofeat::{frame_count, logmel, LogMelConfig, PcmClip};
use crate::error::Result;
use crate::metrics::AccuracyMatrix;
use crate::ndcore::{grad_check, ModelSpec, Tensor2};
use crate::strategies::{
    agem_project, ewc_penalty, gem_project, lwf_kd_loss, si_consolidate, si_penalty, si_update,
    EwcState, GemSolver, MemoryBuffer, MemoryEntry, MemoryPolicy, SiState,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn suite(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> SuiteResult {
    match f() {
        Ok((passed, detail)) => SuiteResult {
            name,
            passed,
            detail,
        },
        Err(e) => SuiteResult {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn gradients() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden: Vec<usize> = (0..rng.random_range(0..3))
            .map(|_| rng.random_range(2..7))
            .collect();
        let spec = ModelSpec::new(rng.random_range(1..6), hidden, rng.random_range(2..5))?;
        worst = worst.max(grad_check(&spec, seed, 1e-5)?);
    }
    Ok((
        worst < 1e-4,
        format!("20 nets, worst relative error {worst:.2e}"),
    ))
}

fn metrics() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 6;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
            .collect();
        let m = AccuracyMatrix::from_rows(&rows)?;
        let (mut bwt, mut fwt, mut a) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if j < i {
                    bwt += rows[i][j] - rows[j][j];
                }
                if i < j {
                    fwt += rows[i][j];
                }
                if j <= i {
                    a += rows[i][j];
                }
            }
        }
        let pairs = (n * (n - 1)) as f64 / 2.0;
        let acc = rows[n - 1].iter().sum::<f64>() / n as f64;
        let expect = [bwt / pairs, fwt / pairs, acc, a / (pairs + n as f64)];
        let got = [m.bwt()?, m.fwt()?, m.acc_final()?, m.a_incremental()?];
        for (e, g) in expect.iter().zip(got) {
            worst = worst.max((e - g).abs());
        }
    }
    Ok((
        worst <= 1e-12,
        format!("100 random 6x6 matrices, worst deviation {worst:.1e}"),
    ))
}

fn projections() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::INFINITY;
    let mut idempotent = true;
    for _ in 0..200 {
        let dim = rng.random_range(10..=200);
        let g = gaussian_vec(&mut rng, dim);
        let k = rng.random_range(1..=5);
        let rows: Vec<Vec<f64>> = (0..k).map(|_| gaussian_vec(&mut rng, dim)).collect();
        let a = agem_project(&g, &rows[0])?;
        worst = worst.min(crate::ndcore::dot(&a.grad, &rows[0]));
        let p = gem_project(&g, &rows, GemSolver::default())?;
        if !p.fallback {
            for r in &rows {
                worst = worst.min(crate::ndcore::dot(&p.grad, r));
            }
            let again = gem_project(&p.grad, &rows, GemSolver::default())?;
            idempotent &= again.grad == p.grad;
        }
    }
    Ok((
        worst >= -1e-7 && idempotent,
        format!("200 instances, smallest constraint value {worst:.2e}, idempotent {idempotent}"),
    ))
}

fn regularizers() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ok = true;
    for _ in 0..50 {
        let n = rng.random_range(1..20);
        let theta = gaussian_vec(&mut rng, n);
        let fisher: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..2.0)).collect();
        let mut ewc = EwcState::default();
        ewc.push(theta.clone(), fisher)?;
        let moved: Vec<f64> = theta
            .iter()
            .map(|v| v + rng.random_range(0.01..1.0))
            .collect();
        ok &= ewc_penalty(&ewc, &theta, 1.0)? == 0.0 && ewc_penalty(&ewc, &moved, 1.0)? > 0.0;

        let mut si = SiState::new(&theta, 0.1);
        let grad: Vec<f64> = theta.iter().map(|_| -1.0).collect();
        si_update(&mut si, &grad, &theta, &moved)?;
        si_consolidate(&mut si, &moved)?;
        ok &= si.importance.iter().all(|&v| v >= 0.0);
        ok &= si_penalty(&si, &moved, 1.0)? == 0.0 && si_penalty(&si, &theta, 1.0)? > 0.0;

        let c = rng.random_range(2..6);
        let t = Tensor2::from_vec(2, c, gaussian_vec(&mut rng, 2 * c))?;
        let s = Tensor2::from_vec(2, c, gaussian_vec(&mut rng, 2 * c))?;
        ok &= lwf_kd_loss(&t, &t, 2.0, 1.0)? == 0.0 && lwf_kd_loss(&t, &s, 2.0, 1.0)? > 0.0;
    }
    Ok((
        ok,
        "EWC, SI and distillation identities on 50 random draws".into(),
    ))
}

fn buffers() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ok = true;
    for _ in 0..100 {
        let classes = rng.random_range(1..6);
        let capacity = rng.random_range(classes..4 * classes + 1);
        let mut b = MemoryBuffer::new(capacity, MemoryPolicy::ClassBalancedGreedy);
        let mut offers: Vec<usize> = (0..classes)
            .flat_map(|c| std::iter::repeat_n(c, capacity))
            .collect();
        if rng.random() {
            use rand::seq::SliceRandom;
            offers.shuffle(&mut rng);
        }
        for (i, &y) in offers.iter().enumerate() {
            b.gdumb_insert_balanced(MemoryEntry {
                features: vec![],
                label: y,
                origin_task: 1,
                id: i as u64,
            });
            ok &= b.len() <= capacity;
        }
        let counts: Vec<usize> = b.class_counts().values().copied().collect();
        ok &= counts.len() == classes
            && counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1;
    }
    Ok((
        ok,
        "class-balanced buffer: 100 random insertion sequences".into(),
    ))
}

fn features() -> Result<(bool, String)> {
    let cfg = LogMelConfig {
        clip_seconds: 1.0,
        ..LogMelConfig::default()
    };
    let sr = cfg.sample_rate as f64;
    let sine: Vec<f64> = (0..16000)
        .map(|i| 0.5 * (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / sr).sin())
        .collect();
    let spec = logmel(&PcmClip::new(cfg.sample_rate, sine)?, &cfg)?;
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let (lo, hi) = (mel(cfg.fmin), mel(cfg.fmax_hz()));
    let step = (hi - lo) / (cfg.mel_bins + 1) as f64;
    let nearest = (0..cfg.mel_bins)
        .min_by(|&a, &b| {
            let c = |m: usize| {
                (700.0 * (10f64.powf((lo + (m + 1) as f64 * step) / 2595.0) - 1.0) - 1000.0).abs()
            };
            c(a).total_cmp(&c(b))
        })
        .expect("at least one bin");
    let peak_ok = (0..spec.rows()).all(|r| spec.argmax_row(r) == nearest);

    let silence = logmel(&PcmClip::new(cfg.sample_rate, vec![0.0; 16000])?, &cfg)?;
    let floor = cfg.log_floor.ln();
    let floor_ok = silence.data().iter().all(|&v| v == floor);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut frames_ok = true;
    for _ in 0..50 {
        let fft = rng.random_range(2..2048);
        let hop = rng.random_range(1..=fft);
        let len = rng.random_range(fft..20000);
        let brute = (0..).take_while(|k| k * hop + fft <= len).count();
        frames_ok &= frame_count(len, fft, hop) == Some(brute);
    }
    Ok((
        peak_ok && floor_ok && frames_ok,
        format!("1 kHz peak in bin {nearest}: {peak_ok}; silence floor: {floor_ok}; frame counts: {frames_ok}"),
    ))
}

/// Runs every suite; never panics.
pub fn run_selftest() -> Vec<SuiteResult> {
    vec![
        suite("gradients", gradients),
        suite("metrics", metrics),
        suite("projections", projections),
        suite("regularizers", regularizers),
        suite("buffers", buffers),
        suite("features", features),
    ]
}
