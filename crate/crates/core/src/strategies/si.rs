use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Path-integral importance state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiState {
    /// Running credit for the current task.
    pub omega: Vec<f64>,
    /// Accumulated importance; ≥ 0 after every consolidation.
    pub importance: Vec<f64>,
    pub task_start: Vec<f64>,
    /// Parameters at the last consolidation.
    pub anchor: Vec<f64>,
    pub damping: f64,
    pub consolidations: usize,
}

impl SiState {
    pub fn new(theta: &[f64], damping: f64) -> Self {
        Self {
            omega: vec![0.0; theta.len()],
            importance: vec![0.0; theta.len()],
            task_start: theta.to_vec(),
            anchor: theta.to_vec(),
            damping,
            consolidations: 0,
        }
    }

    fn check(&self, what: &str, v: &[f64]) -> Result<()> {
        if v.len() != self.omega.len() {
            return Err(Error::Shape(format!(
                "SI {what} has {} entries, state has {}",
                v.len(),
                self.omega.len()
            )));
        }
        Ok(())
    }

    /// Adds `2λ Ω (θ − θ*)` into `grad`.
    pub fn add_penalty_grad(&self, theta: &[f64], lambda: f64, grad: &mut [f64]) -> Result<()> {
        self.check("parameters", theta)?;
        for i in 0..theta.len() {
            grad[i] += 2.0 * lambda * self.importance[i] * (theta[i] - self.anchor[i]);
        }
        Ok(())
    }
}

/// `ω_i += −g_i (θ_after,i − θ_before,i)`.
pub fn si_update(state: &mut SiState, grad: &[f64], before: &[f64], after: &[f64]) -> Result<()> {
    state.check("gradient", grad)?;
    state.check("start point", before)?;
    state.check("end point", after)?;
    for i in 0..grad.len() {
        state.omega[i] -= grad[i] * (after[i] - before[i]);
    }
    Ok(())
}

/// `Ω_i += max(0, ω_i) / ((θ_end,i − θ_start,i)² + ξ)`, then resets ω and
/// moves both the task start and the anchor to `theta_end`.
pub fn si_consolidate(state: &mut SiState, theta_end: &[f64]) -> Result<()> {
    state.check("end point", theta_end)?;
    for i in 0..theta_end.len() {
        let d = theta_end[i] - state.task_start[i];
        state.importance[i] += state.omega[i].max(0.0) / (d * d + state.damping);
    }
    state.omega.iter_mut().for_each(|w| *w = 0.0);
    state.task_start = theta_end.to_vec();
    state.anchor = theta_end.to_vec();
    state.consolidations += 1;
    Ok(())
}

/// `λ Σ_i Ω_i (θ_i − θ*_i)²`.
pub fn si_penalty(state: &SiState, theta: &[f64], lambda: f64) -> Result<f64> {
    state.check("parameters", theta)?;
    let mut total = 0.0;
    for i in 0..theta.len() {
        let d = theta[i] - state.anchor[i];
        total += state.importance[i] * d * d;
    }
    Ok(lambda * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let mut s = SiState::new(&[0.0], 0.1);
        si_update(&mut s, &[-1.0], &[0.0], &[0.1]).unwrap();
        assert!((s.omega[0] - 0.1).abs() < 1e-15);
        si_consolidate(&mut s, &[0.1]).unwrap();
        assert!((s.importance[0] - 0.1 / 0.11).abs() < 1e-12);
        assert_eq!(s.omega[0], 0.0);
        assert_eq!(si_penalty(&s, &[0.1], 3.0).unwrap(), 0.0);
        assert!(si_penalty(&s, &[0.2], 3.0).unwrap() > 0.0);
    }

    #[test]
    fn no_movement_gives_no_importance() {
        let mut s = SiState::new(&[0.5, -0.5], 0.1);
        si_consolidate(&mut s, &[0.5, -0.5]).unwrap();
        assert_eq!(s.importance, vec![0.0, 0.0]);
        assert_eq!(si_penalty(&s, &[9.0, 9.0], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_credit_clamps() {
        let mut s = SiState::new(&[0.0], 0.1);
        si_update(&mut s, &[1.0], &[0.0], &[0.1]).unwrap();
        assert!(s.omega[0] < 0.0);
        si_consolidate(&mut s, &[0.1]).unwrap();
        assert_eq!(s.importance[0], 0.0);
    }

    #[test]
    fn penalty_grad_matches_difference() {
        let mut s = SiState::new(&[0.0, 0.0], 0.1);
        si_update(&mut s, &[-2.0, -0.5], &[0.0, 0.0], &[0.3, 0.2]).unwrap();
        si_consolidate(&mut s, &[0.3, 0.2]).unwrap();
        let theta = [0.1, 0.9];
        let mut g = vec![0.0; 2];
        s.add_penalty_grad(&theta, 0.7, &mut g).unwrap();
        for i in 0..2 {
            let h = 1e-6;
            let mut up = theta;
            let mut dn = theta;
            up[i] += h;
            dn[i] -= h;
            let fd =
                (si_penalty(&s, &up, 0.7).unwrap() - si_penalty(&s, &dn, 0.7).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn shape_errors() {
        let mut s = SiState::new(&[0.0; 3], 0.1);
        assert!(si_update(&mut s, &[0.0; 2], &[0.0; 3], &[0.0; 3]).is_err());
        assert!(si_consolidate(&mut s, &[0.0; 4]).is_err());
        assert!(si_penalty(&s, &[0.0; 1], 1.0).is_err());
    }
}
