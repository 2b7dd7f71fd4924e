use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndcore::{backward, Model};
use crate::scenarios::LabeledSet;

/// Parameters and Fisher diagonal captured at the end of one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EwcAnchor {
    pub params: Vec<f64>,
    pub fisher: Vec<f64>,
}

/// One anchor per completed task; penalties are summed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EwcState {
    pub anchors: Vec<EwcAnchor>,
}

impl EwcState {
    pub fn push(&mut self, params: Vec<f64>, fisher: Vec<f64>) -> Result<()> {
        if params.len() != fisher.len() {
            return Err(Error::Shape(format!(
                "anchor has {} params and {} fisher entries",
                params.len(),
                fisher.len()
            )));
        }
        if let Some(a) = self
            .anchors
            .first()
            .filter(|a| a.params.len() != params.len())
        {
            return Err(Error::Shape(format!(
                "anchor has {} params, earlier anchors {}",
                params.len(),
                a.params.len()
            )));
        }
        if let Some(i) = fisher.iter().position(|&f| !(f >= 0.0) || !f.is_finite()) {
            return Err(Error::NonFinite(format!(
                "fisher entry {i} is {}",
                fisher[i]
            )));
        }
        self.anchors.push(EwcAnchor { params, fisher });
        Ok(())
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        for (k, a) in self.anchors.iter().enumerate() {
            if a.params.len() != theta.len() || a.fisher.len() != theta.len() {
                return Err(Error::Shape(format!(
                    "anchor {k} has {} entries, parameters have {}",
                    a.params.len(),
                    theta.len()
                )));
            }
        }
        Ok(())
    }

    /// Adds the penalty gradient `λ Σ_k F_k (θ − θ*_k)` into `grad`.
    pub fn add_penalty_grad(&self, theta: &[f64], lambda: f64, grad: &mut [f64]) -> Result<()> {
        self.check(theta)?;
        for a in &self.anchors {
            for i in 0..theta.len() {
                grad[i] += lambda * a.fisher[i] * (theta[i] - a.params[i]);
            }
        }
        Ok(())
    }
}

/// `(λ/2) Σ_k Σ_i F_{k,i} (θ_i − θ*_{k,i})²`.
pub fn ewc_penalty(state: &EwcState, theta: &[f64], lambda: f64) -> Result<f64> {
    state.check(theta)?;
    let mut total = 0.0;
    for a in &state.anchors {
        for i in 0..theta.len() {
            let d = theta[i] - a.params[i];
            total += a.fisher[i] * d * d;
        }
    }
    Ok(0.5 * lambda * total)
}

/// Empirical Fisher diagonal: mean squared per-example gradient of the
/// true-label log-likelihood over `min(budget, n)` examples drawn
/// without replacement.
pub fn estimate_fisher(
    model: &Model,
    data: &LabeledSet,
    budget: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if budget == 0 {
        return Err(Error::InvalidArgument("fisher budget must be >= 1".into()));
    }
    if data.is_empty() {
        return Err(Error::InvalidArgument(
            "fisher estimate over empty data".into(),
        ));
    }
    let idx: Vec<usize> = if budget >= data.len() {
        (0..data.len()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::index::sample(&mut rng, data.len(), budget).into_vec()
    };
    let mut fisher = vec![0.0; model.params.len()];
    for &i in &idx {
        let x = data.features.select_rows(&[i]);
        let g = backward(&model.params, &model.spec, &x, &data.labels[i..=i])?;
        for (f, v) in fisher.iter_mut().zip(&g.values) {
            *f += v * v;
        }
    }
    let n = idx.len() as f64;
    for f in &mut fisher {
        *f /= n;
    }
    Ok(fisher)
}
