use clbench::metrics::{matrix_from_csv, matrix_to_csv, AccuracyMatrix, CurveMode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent double loops over a full matrix: (bwt, fwt, acc, a).
fn brute(r: &[Vec<f64>]) -> [f64; 4] {
    let n = r.len();
    let (mut bwt, mut nb, mut fwt, mut nf, mut a, mut na) = (0.0, 0, 0.0, 0, 0.0, 0);
    for i in 0..n {
        for j in 0..n {
            if j < i {
                bwt += r[i][j] - r[j][j];
                nb += 1;
            }
            if j > i {
                fwt += r[i][j];
                nf += 1;
            }
            if j <= i {
                a += r[i][j];
                na += 1;
            }
        }
    }
    let acc = r[n - 1].iter().sum::<f64>() / n as f64;
    [bwt / nb as f64, fwt / nf as f64, acc, a / na as f64]
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
        .collect()
}

#[test]
fn metrics_match_brute_force_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let rows = random_rows(&mut rng, 6);
        let m = AccuracyMatrix::from_rows(&rows).unwrap();
        let got = [
            m.bwt().unwrap(),
            m.fwt().unwrap(),
            m.acc_final().unwrap(),
            m.a_incremental().unwrap(),
        ];
        for (g, e) in got.iter().zip(brute(&rows)) {
            assert!((g - e).abs() <= 1e-12, "{g} vs {e}");
        }
    }
}

fn example() -> AccuracyMatrix {
    let mut m = AccuracyMatrix::new(3).unwrap();
    for (t, j, v) in [
        (1, 1, 0.8),
        (2, 1, 0.6),
        (2, 2, 0.9),
        (3, 1, 0.5),
        (3, 2, 0.7),
        (3, 3, 0.95),
    ] {
        m.record(t, j, v).unwrap();
    }
    m
}

#[test]
fn worked_examples() {
    let m = example();
    assert!((m.bwt().unwrap() - (-0.2 - 0.3 - 0.2) / 3.0).abs() < 1e-15);
    assert!((m.acc_final().unwrap() - 2.15 / 3.0).abs() < 1e-15);
    assert!((m.a_incremental().unwrap() - 4.45 / 6.0).abs() < 1e-15);
    let seen = m.session_curve(CurveMode::SeenTasks).unwrap();
    for (a, b) in seen.iter().zip([0.8, 0.75, 2.15 / 3.0]) {
        assert!((a - b).abs() < 1e-15);
    }

    let mut up = AccuracyMatrix::new(3).unwrap();
    up.record(1, 2, 0.1).unwrap();
    up.record(1, 3, 0.0).unwrap();
    up.record(2, 3, 0.2).unwrap();
    assert!((up.fwt().unwrap() - 0.1).abs() < 1e-15);
}

#[test]
fn edge_cases() {
    let ones = AccuracyMatrix::from_rows(&vec![vec![1.0; 5]; 5]).unwrap();
    assert_eq!(ones.bwt().unwrap(), 0.0);
    assert_eq!(ones.a_incremental().unwrap(), 1.0);
    let mut single = AccuracyMatrix::new(1).unwrap();
    single.record(1, 1, 0.4).unwrap();
    assert!(single.bwt().is_err() && single.fwt().is_err());
    assert_eq!(single.acc_final().unwrap(), 0.4);
    assert!(AccuracyMatrix::new(0).is_err());
    assert!(AccuracyMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5]]).is_err());
}

#[test]
fn csv_roundtrip_fraction_and_percent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = AccuracyMatrix::from_rows(&random_rows(&mut rng, 4)).unwrap();
    assert_eq!(
        matrix_from_csv(&matrix_to_csv(&m, false), false).unwrap(),
        m
    );
    let pct = matrix_from_csv(&matrix_to_csv(&m, true), true).unwrap();
    for t in 1..=4 {
        for j in 1..=4 {
            let (a, b) = (
                m.get(t, j).unwrap().unwrap(),
                pct.get(t, j).unwrap().unwrap(),
            );
            assert!((a - b).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn percent_view_is_exact_scaling(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = AccuracyMatrix::from_rows(&random_rows(&mut rng, n)).unwrap();
        let f = m.summary();
        let p = f.to_percent();
        for (a, b) in f.values().iter().zip(p.values()) {
            prop_assert_eq!(a.unwrap() * 100.0, b.unwrap());
        }
    }

    #[test]
    fn metrics_stay_in_range(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = AccuracyMatrix::from_rows(&random_rows(&mut rng, n)).unwrap();
        prop_assert!((-1.0..=1.0).contains(&m.bwt().unwrap()));
        for v in [m.fwt().unwrap(), m.acc_final().unwrap(), m.a_incremental().unwrap()] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn cells_are_write_once(t in 1usize..4, j in 1usize..4, v in 0.0f64..=1.0) {
        let mut m = AccuracyMatrix::new(3).unwrap();
        m.record(t, j, v).unwrap();
        prop_assert!(m.record(t, j, v).is_err());
        prop_assert_eq!(m.get(t, j).unwrap(), Some(v));
    }
}
