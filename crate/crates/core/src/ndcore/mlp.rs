//! Batched forward and reverse passes for the ReLU MLP described by a
//! [`ModelSpec`], plus softmax cross-entropy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::params::{ModelSpec, ParamVector};
use super::tensor::Tensor2;
use crate::error::{Error, Result};

/// Activations kept from a forward pass for the reverse pass.
///
/// `acts[0]` is the input batch, `acts[l]` the post-ReLU output of hidden
/// layer `l`; the last entry is the logits.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    acts: Vec<Tensor2>,
}

impl ForwardCache {
    pub fn logits(&self) -> &Tensor2 {
        self.acts.last().expect("cache always holds logits")
    }
}

fn affine(x: &Tensor2, w: &[f64], b: &[f64], fan_in: usize, fan_out: usize) -> Tensor2 {
    let mut out = Tensor2::zeros(x.rows(), fan_out);
    for r in 0..x.rows() {
        let xr = x.row(r);
        let yr = out.row_mut(r);
        for o in 0..fan_out {
            let wr = &w[o * fan_in..(o + 1) * fan_in];
            let mut acc = b[o];
            for i in 0..fan_in {
                acc += wr[i] * xr[i];
            }
            yr[o] = acc;
        }
    }
    out
}

pub fn forward_cached(
    params: &ParamVector,
    spec: &ModelSpec,
    batch: &Tensor2,
) -> Result<ForwardCache> {
    spec.check_params(params)?;
    if batch.cols() != spec.input_dim {
        return Err(Error::Shape(format!(
            "batch has {} columns, model expects {}",
            batch.cols(),
            spec.input_dim
        )));
    }
    let dims = spec.layer_dims();
    let last = dims.len() - 1;
    let mut acts = Vec::with_capacity(dims.len() + 1);
    acts.push(batch.clone());
    let mut offset = 0;
    for (l, &(fan_in, fan_out)) in dims.iter().enumerate() {
        let w = &params.values[offset..offset + fan_in * fan_out];
        offset += fan_in * fan_out;
        let b = &params.values[offset..offset + fan_out];
        offset += fan_out;
        let mut y = affine(acts.last().unwrap(), w, b, fan_in, fan_out);
        if l < last {
            for v in y.data_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        acts.push(y);
    }
    let cache = ForwardCache { acts };
    cache
        .logits()
        .ensure_finite("forward produced non-finite logits")?;
    Ok(cache)
}

pub fn forward(params: &ParamVector, spec: &ModelSpec, batch: &Tensor2) -> Result<Tensor2> {
    let mut cache = forward_cached(params, spec, batch)?;
    Ok(cache.acts.pop().unwrap())
}

/// Reverse pass from an arbitrary gradient with respect to the logits.
pub fn backprop(
    params: &ParamVector,
    spec: &ModelSpec,
    cache: &ForwardCache,
    dlogits: &Tensor2,
) -> Result<ParamVector> {
    if dlogits.shape() != cache.logits().shape() {
        return Err(Error::Shape(format!(
            "logit gradient {:?} vs logits {:?}",
            dlogits.shape(),
            cache.logits().shape()
        )));
    }
    let dims = spec.layer_dims();
    let mut grad = params.zeros_like();
    let mut offsets = Vec::with_capacity(dims.len());
    let mut offset = 0;
    for &(fan_in, fan_out) in &dims {
        offsets.push(offset);
        offset += fan_in * fan_out + fan_out;
    }

    let mut delta = dlogits.clone();
    for l in (0..dims.len()).rev() {
        let (fan_in, fan_out) = dims[l];
        let w_off = offsets[l];
        let b_off = w_off + fan_in * fan_out;
        let input = &cache.acts[l];
        {
            let (gw, gb) = grad.values[w_off..b_off + fan_out].split_at_mut(fan_in * fan_out);
            for r in 0..delta.rows() {
                let dr = delta.row(r);
                let xr = input.row(r);
                for o in 0..fan_out {
                    let d = dr[o];
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    let gwr = &mut gw[o * fan_in..(o + 1) * fan_in];
                    for i in 0..fan_in {
                        gwr[i] += d * xr[i];
                    }
                }
            }
        }
        if l == 0 {
            break;
        }
        let w = &params.values[w_off..w_off + fan_in * fan_out];
        let mut prev = Tensor2::zeros(delta.rows(), fan_in);
        for r in 0..delta.rows() {
            let dr = delta.row(r);
            let pr = prev.row_mut(r);
            for o in 0..fan_out {
                let d = dr[o];
                if d == 0.0 {
                    continue;
                }
                let wr = &w[o * fan_in..(o + 1) * fan_in];
                for i in 0..fan_in {
                    pr[i] += d * wr[i];
                }
            }
            // ReLU mask from the forward activation of this layer's input
            let ar = input.row(r);
            for i in 0..fan_in {
                if ar[i] <= 0.0 {
                    pr[i] = 0.0;
                }
            }
        }
        delta = prev;
    }
    Ok(grad)
}

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: &Tensor2, temperature: f64) -> Tensor2 {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = ((*v - max) / temperature).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

fn check_labels(logits: &Tensor2, labels: &[usize]) -> Result<()> {
    if labels.len() != logits.rows() {
        return Err(Error::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            logits.rows()
        )));
    }
    if logits.rows() == 0 {
        return Err(Error::Shape("empty batch".into()));
    }
    if let Some(&label) = labels.iter().find(|&&y| y >= logits.cols()) {
        return Err(Error::LabelOutOfRange {
            label,
            classes: logits.cols(),
        });
    }
    Ok(())
}

/// Mean softmax cross-entropy over the batch.
pub fn ce_loss(logits: &Tensor2, labels: &[usize]) -> Result<f64> {
    check_labels(logits, labels)?;
    let mut total = 0.0;
    for (r, &y) in labels.iter().enumerate() {
        let row = logits.row(r);
        let max = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
        total += lse - row[y];
    }
    Ok(total / labels.len() as f64)
}

/// d(mean CE)/d(logits): (softmax − onehot) / batch.
pub fn ce_logit_grad(logits: &Tensor2, labels: &[usize]) -> Result<Tensor2> {
    check_labels(logits, labels)?;
    let mut g = softmax(logits, 1.0);
    let n = labels.len() as f64;
    for (r, &y) in labels.iter().enumerate() {
        let row = g.row_mut(r);
        row[y] -= 1.0;
        for v in row.iter_mut() {
            *v /= n;
        }
    }
    Ok(g)
}

/// Gradient of the mean cross-entropy with respect to every parameter.
pub fn backward(
    params: &ParamVector,
    spec: &ModelSpec,
    batch: &Tensor2,
    labels: &[usize],
) -> Result<ParamVector> {
    Ok(loss_and_grad(params, spec, batch, labels)?.1)
}

pub fn loss_and_grad(
    params: &ParamVector,
    spec: &ModelSpec,
    batch: &Tensor2,
    labels: &[usize],
) -> Result<(f64, ParamVector)> {
    let cache = forward_cached(params, spec, batch)?;
    let loss = ce_loss(cache.logits(), labels)?;
    let dl = ce_logit_grad(cache.logits(), labels)?;
    let grad = backprop(params, spec, &cache, &dl)?;
    Ok((loss, grad))
}

/// Compares the analytic gradient against central differences on a
/// seeded random net and batch, returning the worst relative error
/// `|a − n| / max(1, |a|, |n|)`.
pub fn grad_check(spec: &ModelSpec, seed: u64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = spec.init(seed ^ 0x5eed);
    // non-zero biases so the check also covers them
    for v in params.values.iter_mut() {
        *v += rng.random_range(-0.1..0.1);
    }
    let rows = 4;
    let data: Vec<f64> = (0..rows * spec.input_dim)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let batch = Tensor2::from_vec(rows, spec.input_dim, data)?;
    let labels: Vec<usize> = (0..rows)
        .map(|_| rng.random_range(0..spec.output_dim))
        .collect();

    let analytic = backward(&params, spec, &batch, &labels)?;
    let mut worst: f64 = 0.0;
    for i in 0..params.len() {
        let orig = params.values[i];
        params.values[i] = orig + h;
        let up = ce_loss(&forward(&params, spec, &batch)?, &labels)?;
        params.values[i] = orig - h;
        let down = ce_loss(&forward(&params, spec, &batch)?, &labels)?;
        params.values[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let a = analytic.values[i];
        let err = (a - numeric).abs() / 1f64.max(a.abs()).max(numeric.abs());
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Top-1 accuracy with ties toward the lowest class id.
pub fn accuracy(
    params: &ParamVector,
    spec: &ModelSpec,
    features: &Tensor2,
    labels: &[usize],
) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Shape("accuracy over an empty set".into()));
    }
    let mut correct = 0usize;
    const CHUNK: usize = 512;
    let idx: Vec<usize> = (0..features.rows()).collect();
    for chunk in idx.chunks(CHUNK) {
        let logits = forward(params, spec, &features.select_rows(chunk))?;
        for (k, &i) in chunk.iter().enumerate() {
            if logits.argmax_row(k) == labels[i] {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / labels.len() as f64)
}
