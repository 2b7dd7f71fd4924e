use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndcore::{softmax, ModelSpec, ParamVector, Tensor2};

/// Frozen copy of the model taken before a new task starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherSnapshot {
    pub spec: ModelSpec,
    pub params: ParamVector,
}

fn check(teacher: &Tensor2, student: &Tensor2, temperature: f64) -> Result<()> {
    if teacher.shape() != student.shape() {
        return Err(Error::Shape(format!(
            "teacher logits {:?} vs student logits {:?}",
            teacher.shape(),
            student.shape()
        )));
    }
    if teacher.rows() == 0 {
        return Err(Error::Shape("empty logit batch".into()));
    }
    if !(temperature > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    Ok(())
}

fn log_softmax_row(row: &[f64], temperature: f64) -> Vec<f64> {
    let max = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let scaled: Vec<f64> = row.iter().map(|&v| (v - max) / temperature).collect();
    let lse = scaled.iter().map(|v| v.exp()).sum::<f64>().ln();
    scaled.iter().map(|v| v - lse).collect()
}

/// `α τ² KL(softmax(t/τ) ‖ softmax(s/τ))`, averaged over rows.
pub fn lwf_kd_loss(
    teacher: &Tensor2,
    student: &Tensor2,
    temperature: f64,
    alpha: f64,
) -> Result<f64> {
    check(teacher, student, temperature)?;
    let mut total = 0.0;
    for r in 0..teacher.rows() {
        let lp = log_softmax_row(teacher.row(r), temperature);
        let lq = log_softmax_row(student.row(r), temperature);
        for (a, b) in lp.iter().zip(&lq) {
            let p = a.exp();
            if p > 0.0 {
                total += p * (a - b);
            }
        }
    }
    // KL of softmax pairs is ≥ 0; clamp round-off
    let kl = (total / teacher.rows() as f64).max(0.0);
    Ok(alpha * temperature * temperature * kl)
}

/// Gradient of [`lwf_kd_loss`] with respect to the student logits:
/// `α τ (q − p) / B`.
pub fn lwf_kd_logit_grad(
    teacher: &Tensor2,
    student: &Tensor2,
    temperature: f64,
    alpha: f64,
) -> Result<Tensor2> {
    check(teacher, student, temperature)?;
    let p = softmax(teacher, temperature);
    let mut g = softmax(student, temperature);
    let scale = alpha * temperature / teacher.rows() as f64;
    for (gv, pv) in g.data_mut().iter_mut().zip(p.data()) {
        *gv = scale * (*gv - pv);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(rows: usize, cols: usize, v: &[f64]) -> Tensor2 {
        Tensor2::from_vec(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn worked_example() {
        let loss =
            lwf_kd_loss(&t(1, 2, &[0.0, 0.0]), &t(1, 2, &[3f64.ln(), 0.0]), 1.0, 1.0).unwrap();
        let expect = 0.5 * (2.0f64 / 3.0).ln() + 0.5 * 2f64.ln();
        assert!((loss - expect).abs() < 1e-12);
        assert!((loss - 0.143841).abs() < 1e-6);
    }

    #[test]
    fn identity_and_shift() {
        let a = t(2, 3, &[0.3, -1.0, 2.0, 0.0, 0.5, 0.5]);
        assert_eq!(lwf_kd_loss(&a, &a, 2.0, 2.0).unwrap(), 0.0);
        let b = t(2, 3, &[1.0, 0.0, -1.0, 2.0, 2.0, 0.0]);
        let shifted = t(2, 3, &b.data().iter().map(|v| v + 7.0).collect::<Vec<_>>());
        let l1 = lwf_kd_loss(&a, &b, 2.0, 1.0).unwrap();
        let l2 = lwf_kd_loss(&a, &shifted, 2.0, 1.0).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        assert!(l1 > 0.0);
    }

    #[test]
    fn gradient_matches_difference() {
        let a = t(2, 3, &[0.3, -1.0, 2.0, 0.0, 0.5, 0.5]);
        let b = t(2, 3, &[1.0, 0.0, -1.0, 2.0, 2.0, 0.0]);
        let g = lwf_kd_logit_grad(&a, &b, 2.5, 1.7).unwrap();
        for i in 0..6 {
            let h = 1e-6;
            let mut up = b.clone();
            up.data_mut()[i] += h;
            let mut dn = b.clone();
            dn.data_mut()[i] -= h;
            let fd = (lwf_kd_loss(&a, &up, 2.5, 1.7).unwrap()
                - lwf_kd_loss(&a, &dn, 2.5, 1.7).unwrap())
                / (2.0 * h);
            assert!(
                (fd - g.data()[i]).abs() < 1e-8,
                "{i}: {fd} vs {}",
                g.data()[i]
            );
        }
    }

    #[test]
    fn shape_mismatch() {
        assert!(lwf_kd_loss(&t(1, 2, &[0.0, 0.0]), &t(1, 3, &[0.0; 3]), 1.0, 1.0).is_err());
        assert!(lwf_kd_loss(&t(1, 2, &[0.0, 0.0]), &t(1, 2, &[0.0; 2]), 0.0, 1.0).is_err());
    }
}
