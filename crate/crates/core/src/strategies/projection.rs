use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ndcore::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct AgemOutcome {
    pub grad: Vec<f64>,
    pub projected: bool,
    /// Constraint violated but the reference gradient was zero.
    pub degenerate: bool,
}

/// `g − (g·r / r·r) r` when `g·r < 0`, otherwise `g`.
pub fn agem_project(g: &[f64], g_ref: &[f64]) -> Result<AgemOutcome> {
    if g.len() != g_ref.len() {
        return Err(Error::Shape(format!(
            "gradient {} vs reference {}",
            g.len(),
            g_ref.len()
        )));
    }
    let d = dot(g, g_ref);
    if d >= 0.0 {
        return Ok(AgemOutcome {
            grad: g.to_vec(),
            projected: false,
            degenerate: false,
        });
    }
    let rr = dot(g_ref, g_ref);
    if rr == 0.0 {
        return Ok(AgemOutcome {
            grad: g.to_vec(),
            projected: false,
            degenerate: true,
        });
    }
    let c = d / rr;
    Ok(AgemOutcome {
        grad: g.iter().zip(g_ref).map(|(a, b)| a - c * b).collect(),
        projected: true,
        degenerate: false,
    })
}

/// Dual solver settings for [`gem_project`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GemSolver {
    pub tol: f64,
    pub max_iter: usize,
    /// Lower bound on every dual variable.
    pub margin: f64,
}

impl Default for GemSolver {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 10_000,
            margin: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GemOutcome {
    pub grad: Vec<f64>,
    pub projected: bool,
    /// Solver hit `max_iter`; the A-GEM projection onto the mean
    /// constraint was used instead.
    pub fallback: bool,
    pub iterations: usize,
}

/// Euclidean projection of `g` onto `{x : ⟨x, g_k⟩ ≥ 0 ∀k}` via the dual
/// `min ½ vᵀ(GGᵀ)v + (Gg)ᵀv, v ≥ margin`, solved by projected gradient
/// with step `1/‖GGᵀ‖∞`; the primal is `g + Gᵀv`.
pub fn gem_project(g: &[f64], constraints: &[Vec<f64>], solver: GemSolver) -> Result<GemOutcome> {
    if !(solver.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be > 0, got {}",
            solver.tol
        )));
    }
    if let Some(c) = constraints.iter().find(|c| c.len() != g.len()) {
        return Err(Error::Shape(format!(
            "constraint of length {} for gradient {}",
            c.len(),
            g.len()
        )));
    }
    let unchanged = |fallback| GemOutcome {
        grad: g.to_vec(),
        projected: false,
        fallback,
        iterations: 0,
    };
    let q: Vec<f64> = constraints.iter().map(|c| dot(c, g)).collect();
    if q.iter().all(|&d| d >= -solver.tol) {
        return Ok(unchanged(false));
    }
    let k = constraints.len();
    let mut p = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let v = dot(&constraints[i], &constraints[j]);
            p[i * k + j] = v;
            p[j * k + i] = v;
        }
    }
    let lip = (0..k)
        .map(|i| p[i * k..(i + 1) * k].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if lip == 0.0 {
        // every violated constraint is a zero vector; nothing to project on
        return Ok(unchanged(false));
    }
    let step = 1.0 / lip;
    let mut v = vec![solver.margin; k];
    let mut grad = vec![0.0; k];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < solver.max_iter {
        for i in 0..k {
            grad[i] = q[i] + dot(&p[i * k..(i + 1) * k], &v);
        }
        // grad_i = ⟨g + Gᵀv, g_i⟩: primal constraint values
        let residual = (0..k)
            .map(|i| {
                if v[i] > solver.margin {
                    grad[i].abs()
                } else {
                    (-grad[i]).max(0.0)
                }
            })
            .fold(0.0, f64::max);
        if residual <= solver.tol {
            converged = true;
            break;
        }
        for i in 0..k {
            v[i] = (v[i] - step * grad[i]).max(solver.margin);
        }
        iterations += 1;
    }
    if !converged {
        let mean: Vec<f64> = (0..g.len())
            .map(|d| constraints.iter().map(|c| c[d]).sum::<f64>() / k as f64)
            .collect();
        let a = agem_project(g, &mean)?;
        return Ok(GemOutcome {
            grad: a.grad,
            projected: a.projected,
            fallback: true,
            iterations,
        });
    }
    let mut out = g.to_vec();
    for (c, &vi) in constraints.iter().zip(&v) {
        if vi != 0.0 {
            for (o, x) in out.iter_mut().zip(c) {
                *o += vi * x;
            }
        }
    }
    Ok(GemOutcome {
        grad: out,
        projected: true,
        fallback: false,
        iterations,
    })
}
