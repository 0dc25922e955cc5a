//! Forward and backward passes of the classifier.
//!
//! Only the first `true_length` positions are evaluated. With causal
//! attention, later positions can never influence them, so padding has no
//! effect on the output at all.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::params::{k, off, ModelParams, Scalar, Slots};
use super::LabeledExample;
use crate::error::{Error, Result};
use crate::featurize::TokenSequence;
use crate::planspace::PlanLabel;

const LN_EPS: f64 = 1e-5;

/// One classifier input: a token sequence plus the normalized L1 feature.
#[derive(Debug, Clone, Copy)]
pub struct ModelInput<'a> {
    pub sequence: &'a TokenSequence,
    pub l1: f64,
}

impl<'a> From<&'a LabeledExample> for ModelInput<'a> {
    fn from(e: &'a LabeledExample) -> Self {
        ModelInput {
            sequence: &e.sequence,
            l1: e.l1_input(),
        }
    }
}

fn gelu<F: Scalar>(x: F) -> F {
    let c: F = k((2.0 / std::f64::consts::PI).sqrt());
    let half: F = k(0.5);
    half * x * (F::one() + (c * (x + k::<F>(0.044715) * x * x * x)).tanh())
}

fn gelu_grad<F: Scalar>(x: F) -> F {
    let c: F = k((2.0 / std::f64::consts::PI).sqrt());
    let a: F = k(0.044715);
    let half: F = k(0.5);
    let t = (c * (x + a * x * x * x)).tanh();
    half * (F::one() + t) + half * x * (F::one() - t * t) * c * (F::one() + k::<F>(3.0) * a * x * x)
}

/// `y[r] = x[r] W + b` for `rows` rows of width `n_in`.
fn linear<F: Scalar>(x: &[F], rows: usize, n_in: usize, w: &[F], b: &[F], n_out: usize) -> Vec<F> {
    let mut y = Vec::with_capacity(rows * n_out);
    for r in 0..rows {
        y.extend_from_slice(b);
        let yr = &mut y[r * n_out..];
        for (i, &xi) in x[r * n_in..(r + 1) * n_in].iter().enumerate() {
            if xi == F::zero() {
                continue;
            }
            for (yo, &wo) in yr.iter_mut().zip(&w[i * n_out..(i + 1) * n_out]) {
                *yo = *yo + xi * wo;
            }
        }
    }
    y
}

/// Accumulates weight and bias gradients and returns the input gradient.
#[allow(clippy::too_many_arguments)]
fn linear_back<F: Scalar>(
    x: &[F],
    dy: &[F],
    rows: usize,
    n_in: usize,
    n_out: usize,
    w: &[F],
    dw: &mut [F],
    db: &mut [F],
) -> Vec<F> {
    let mut dx = vec![F::zero(); rows * n_in];
    for r in 0..rows {
        let dyr = &dy[r * n_out..(r + 1) * n_out];
        for (o, &g) in dyr.iter().enumerate() {
            db[o] = db[o] + g;
        }
        for i in 0..n_in {
            let xi = x[r * n_in + i];
            let wi = &w[i * n_out..(i + 1) * n_out];
            let dwi = &mut dw[i * n_out..(i + 1) * n_out];
            let mut acc = F::zero();
            for o in 0..n_out {
                dwi[o] = dwi[o] + xi * dyr[o];
                acc = acc + wi[o] * dyr[o];
            }
            dx[r * n_in + i] = acc;
        }
    }
    dx
}

struct Norm<F> {
    y: Vec<F>,
    xhat: Vec<F>,
    rstd: Vec<F>,
}

fn layer_norm<F: Scalar>(x: &[F], rows: usize, d: usize, g: &[F], b: &[F]) -> Norm<F> {
    let mut y = vec![F::zero(); rows * d];
    let mut xhat = vec![F::zero(); rows * d];
    let mut rstd = vec![F::zero(); rows];
    let n: F = k(d as f64);
    for r in 0..rows {
        let xr = &x[r * d..(r + 1) * d];
        let mean = xr.iter().fold(F::zero(), |a, &v| a + v) / n;
        let var = xr.iter().fold(F::zero(), |a, &v| a + (v - mean) * (v - mean)) / n;
        let rs = F::one() / (var + k(LN_EPS)).sqrt();
        rstd[r] = rs;
        for i in 0..d {
            let h = (xr[i] - mean) * rs;
            xhat[r * d + i] = h;
            y[r * d + i] = g[i] * h + b[i];
        }
    }
    Norm { y, xhat, rstd }
}

fn layer_norm_back<F: Scalar>(
    dy: &[F],
    norm: &Norm<F>,
    rows: usize,
    d: usize,
    g: &[F],
    dg: &mut [F],
    db: &mut [F],
) -> Vec<F> {
    let mut dx = vec![F::zero(); rows * d];
    let n: F = k(d as f64);
    for r in 0..rows {
        let mut mean_dxhat = F::zero();
        let mut mean_dxhat_xhat = F::zero();
        for i in 0..d {
            let j = r * d + i;
            dg[i] = dg[i] + dy[j] * norm.xhat[j];
            db[i] = db[i] + dy[j];
            let dxhat = dy[j] * g[i];
            mean_dxhat = mean_dxhat + dxhat;
            mean_dxhat_xhat = mean_dxhat_xhat + dxhat * norm.xhat[j];
        }
        mean_dxhat = mean_dxhat / n;
        mean_dxhat_xhat = mean_dxhat_xhat / n;
        for i in 0..d {
            let j = r * d + i;
            let dxhat = dy[j] * g[i];
            dx[j] = norm.rstd[r] * (dxhat - mean_dxhat - norm.xhat[j] * mean_dxhat_xhat);
        }
    }
    dx
}

struct LayerTrace<F> {
    ln1: Norm<F>,
    qkv: Vec<F>,
    /// `[head][i][j]`, zero above the diagonal.
    probs: Vec<F>,
    attn: Vec<F>,
    ln2: Norm<F>,
    pre_act: Vec<F>,
    act: Vec<F>,
}

struct Trace<F> {
    len: usize,
    tokens: Vec<usize>,
    emb_mask: Option<Vec<F>>,
    layers: Vec<LayerTrace<F>>,
    lnf: Norm<F>,
    feat: Vec<F>,
    pre_hidden: Vec<F>,
    head_mask: Option<Vec<F>>,
    hidden: Vec<F>,
    probs: [F; 2],
}

fn check_input<F: Scalar>(params: &ModelParams<F>, seq: &TokenSequence) -> Result<Vec<usize>> {
    let cfg = &params.config;
    let n = seq.true_length;
    let bad = |m: String| Err(Error::Input(m));
    if seq.tokens.len() > cfg.max_len {
        return bad(format!("sequence capacity {} exceeds max_len {}", seq.tokens.len(), cfg.max_len));
    }
    if n == 0 || n > seq.tokens.len() || seq.attention_mask.len() != seq.tokens.len() {
        return bad(format!("inconsistent sequence lengths (true length {n})"));
    }
    if seq.attention_mask.iter().enumerate().any(|(i, &m)| (m == 1) != (i < n)) {
        return bad("attention mask does not match true length".into());
    }
    seq.tokens[..n]
        .iter()
        .map(|&t| {
            if (t as usize) < cfg.vocab_size {
                Ok(t as usize)
            } else {
                Err(Error::Input(format!("token {t} outside vocabulary of {}", cfg.vocab_size)))
            }
        })
        .collect()
}

fn dropout_mask<F: Scalar>(n: usize, rate: f64, rng: &mut ChaCha8Rng) -> Vec<F> {
    let keep: F = k(1.0 / (1.0 - rate));
    (0..n)
        .map(|_| if rng.random::<f64>() < rate { F::zero() } else { keep })
        .collect()
}

fn run<F: Scalar>(params: &ModelParams<F>, input: ModelInput, mut rng: Option<&mut ChaCha8Rng>) -> Result<Trace<F>> {
    let tokens = check_input(params, input.sequence)?;
    let cfg = &params.config;
    let (d, nh, dh) = (cfg.embed_dim, cfg.heads, cfg.head_dim());
    let len = tokens.len();
    let p = &params.tensors;
    let s = params.slots();
    let rate = cfg.dropout_rate;

    let mut x = Vec::with_capacity(len * d);
    for (i, &t) in tokens.iter().enumerate() {
        let te = &p[Slots::TOK][t * d..(t + 1) * d];
        let pe = &p[Slots::POS][i * d..(i + 1) * d];
        x.extend(te.iter().zip(pe).map(|(&a, &b)| a + b));
    }
    let emb_mask = match rng.as_deref_mut() {
        Some(r) if rate > 0.0 => {
            let m = dropout_mask::<F>(len * d, rate, r);
            x.iter_mut().zip(&m).for_each(|(v, &m)| *v = *v * m);
            Some(m)
        }
        _ => None,
    };

    let scale: F = k(1.0 / (dh as f64).sqrt());
    let mut layers = Vec::with_capacity(cfg.layers);
    for l in 0..cfg.layers {
        let w = |o: usize| &p[s.layer(l, o)][..];
        let ln1 = layer_norm(&x, len, d, w(off::LN1_G), w(off::LN1_B));
        let qkv = linear(&ln1.y, len, d, w(off::QKV_W), w(off::QKV_B), 3 * d);
        let mut probs = vec![F::zero(); nh * len * len];
        let mut attn = vec![F::zero(); len * d];
        for h in 0..nh {
            for i in 0..len {
                let q = &qkv[i * 3 * d + h * dh..][..dh];
                let row = &mut probs[(h * len + i) * len..][..len];
                let mut max = F::neg_infinity();
                for j in 0..=i {
                    let kj = &qkv[j * 3 * d + d + h * dh..][..dh];
                    let sc = q.iter().zip(kj).fold(F::zero(), |a, (&u, &v)| a + u * v) * scale;
                    row[j] = sc;
                    max = max.max(sc);
                }
                let mut total = F::zero();
                for v in row[..=i].iter_mut() {
                    *v = (*v - max).exp();
                    total = total + *v;
                }
                for v in row[..=i].iter_mut() {
                    *v = *v / total;
                }
                let out = &mut attn[i * d + h * dh..][..dh];
                for (j, &pij) in row[..=i].iter().enumerate() {
                    let vj = &qkv[j * 3 * d + 2 * d + h * dh..][..dh];
                    for (o, &vv) in out.iter_mut().zip(vj) {
                        *o = *o + pij * vv;
                    }
                }
            }
        }
        let proj = linear(&attn, len, d, w(off::OUT_W), w(off::OUT_B), d);
        x.iter_mut().zip(&proj).for_each(|(a, &b)| *a = *a + b);
        let ln2 = layer_norm(&x, len, d, w(off::LN2_G), w(off::LN2_B));
        let pre_act = linear(&ln2.y, len, d, w(off::FC_W), w(off::FC_B), 4 * d);
        let act: Vec<F> = pre_act.iter().map(|&v| gelu(v)).collect();
        let mlp = linear(&act, len, 4 * d, w(off::PROJ_W), w(off::PROJ_B), d);
        x.iter_mut().zip(&mlp).for_each(|(a, &b)| *a = *a + b);
        layers.push(LayerTrace {
            ln1,
            qkv,
            probs,
            attn,
            ln2,
            pre_act,
            act,
        });
    }

    // the classifier only reads the last real position
    let last = &x[(len - 1) * d..len * d];
    let lnf = layer_norm(last, 1, d, &p[s.lnf_g()], &p[s.lnf_b()]);
    let mut feat = lnf.y.clone();
    feat.push(k(input.l1));
    let hm = cfg.mlp_hidden;
    let pre_hidden = linear(&feat, 1, d + 1, &p[s.head(0)], &p[s.head(1)], hm);
    let mut hidden: Vec<F> = pre_hidden.iter().map(|&v| gelu(v)).collect();
    let head_mask = match rng {
        Some(r) if rate > 0.0 => {
            let m = dropout_mask::<F>(hm, rate, r);
            hidden.iter_mut().zip(&m).for_each(|(v, &m)| *v = *v * m);
            Some(m)
        }
        _ => None,
    };
    let logits = linear(&hidden, 1, hm, &p[s.head(2)], &p[s.head(3)], 2);
    let mx = logits[0].max(logits[1]);
    let e0 = (logits[0] - mx).exp();
    let e1 = (logits[1] - mx).exp();
    let probs = [e0 / (e0 + e1), e1 / (e0 + e1)];
    Ok(Trace {
        len,
        tokens,
        emb_mask,
        layers,
        lnf,
        feat,
        pre_hidden,
        head_mask,
        hidden,
        probs,
    })
}

/// `(p_optimal, p_suboptimal)` in inference mode.
pub fn forward<F: Scalar>(params: &ModelParams<F>, input: ModelInput) -> Result<[F; 2]> {
    Ok(run(params, input, None)?.probs)
}

fn backward<F: Scalar>(params: &ModelParams<F>, t: &Trace<F>, label: PlanLabel, grads: &mut [Vec<F>]) {
    let cfg = &params.config;
    let (d, nh, dh, hm) = (cfg.embed_dim, cfg.heads, cfg.head_dim(), cfg.mlp_hidden);
    let len = t.len;
    let p = &params.tensors;
    let s = params.slots();
    let scale: F = k(1.0 / (dh as f64).sqrt());

    let y = label.index();
    let dlogits: Vec<F> = (0..2)
        .map(|c| t.probs[c] - if c == y { F::one() } else { F::zero() })
        .collect();
    let (w2, rest) = split2(grads, s.head(2), s.head(3));
    let mut dhidden = linear_back(&t.hidden, &dlogits, 1, hm, 2, &p[s.head(2)], w2, rest);
    if let Some(m) = &t.head_mask {
        dhidden.iter_mut().zip(m).for_each(|(g, &m)| *g = *g * m);
    }
    let dpre: Vec<F> = dhidden
        .iter()
        .zip(&t.pre_hidden)
        .map(|(&g, &z)| g * gelu_grad(z))
        .collect();
    let (w1, b1) = split2(grads, s.head(0), s.head(1));
    let dfeat = linear_back(&t.feat, &dpre, 1, d + 1, hm, &p[s.head(0)], w1, b1);
    let (gf, bf) = split2(grads, s.lnf_g(), s.lnf_b());
    let dlast = layer_norm_back(&dfeat[..d], &t.lnf, 1, d, &p[s.lnf_g()], gf, bf);

    let mut dx = vec![F::zero(); len * d];
    dx[(len - 1) * d..].copy_from_slice(&dlast);

    for l in (0..cfg.layers).rev() {
        let lt = &t.layers[l];
        let w = |o: usize| &p[s.layer(l, o)][..];

        let (dw, db) = split2(grads, s.layer(l, off::PROJ_W), s.layer(l, off::PROJ_B));
        let dact = linear_back(&lt.act, &dx, len, 4 * d, d, w(off::PROJ_W), dw, db);
        let dpre: Vec<F> = dact
            .iter()
            .zip(&lt.pre_act)
            .map(|(&g, &z)| g * gelu_grad(z))
            .collect();
        let (dw, db) = split2(grads, s.layer(l, off::FC_W), s.layer(l, off::FC_B));
        let dm = linear_back(&lt.ln2.y, &dpre, len, d, 4 * d, w(off::FC_W), dw, db);
        let (dg, db) = split2(grads, s.layer(l, off::LN2_G), s.layer(l, off::LN2_B));
        let dres = layer_norm_back(&dm, &lt.ln2, len, d, w(off::LN2_G), dg, db);
        dx.iter_mut().zip(&dres).for_each(|(a, &b)| *a = *a + b);

        let (dw, db) = split2(grads, s.layer(l, off::OUT_W), s.layer(l, off::OUT_B));
        let dattn = linear_back(&lt.attn, &dx, len, d, d, w(off::OUT_W), dw, db);
        let mut dqkv = vec![F::zero(); len * 3 * d];
        let mut dp = vec![F::zero(); len];
        for h in 0..nh {
            for i in 0..len {
                let row = &lt.probs[(h * len + i) * len..][..len];
                let dout = &dattn[i * d + h * dh..][..dh];
                let mut dot = F::zero();
                for j in 0..=i {
                    let vj = &lt.qkv[j * 3 * d + 2 * d + h * dh..][..dh];
                    dp[j] = dout.iter().zip(vj).fold(F::zero(), |a, (&u, &v)| a + u * v);
                    dot = dot + row[j] * dp[j];
                    let dvj = &mut dqkv[j * 3 * d + 2 * d + h * dh..][..dh];
                    for (g, &u) in dvj.iter_mut().zip(dout) {
                        *g = *g + row[j] * u;
                    }
                }
                for j in 0..=i {
                    let ds = row[j] * (dp[j] - dot) * scale;
                    if ds == F::zero() {
                        continue;
                    }
                    for tt in 0..dh {
                        let qi = lt.qkv[i * 3 * d + h * dh + tt];
                        let kj = lt.qkv[j * 3 * d + d + h * dh + tt];
                        dqkv[i * 3 * d + h * dh + tt] = dqkv[i * 3 * d + h * dh + tt] + ds * kj;
                        dqkv[j * 3 * d + d + h * dh + tt] = dqkv[j * 3 * d + d + h * dh + tt] + ds * qi;
                    }
                }
            }
        }
        let (dw, db) = split2(grads, s.layer(l, off::QKV_W), s.layer(l, off::QKV_B));
        let da = linear_back(&lt.ln1.y, &dqkv, len, d, 3 * d, w(off::QKV_W), dw, db);
        let (dg, db) = split2(grads, s.layer(l, off::LN1_G), s.layer(l, off::LN1_B));
        let dres = layer_norm_back(&da, &lt.ln1, len, d, w(off::LN1_G), dg, db);
        dx.iter_mut().zip(&dres).for_each(|(a, &b)| *a = *a + b);
    }

    if let Some(m) = &t.emb_mask {
        dx.iter_mut().zip(m).for_each(|(g, &m)| *g = *g * m);
    }
    for (i, &tok) in t.tokens.iter().enumerate() {
        let row = &dx[i * d..(i + 1) * d];
        for (g, &v) in grads[Slots::TOK][tok * d..(tok + 1) * d].iter_mut().zip(row) {
            *g = *g + v;
        }
        for (g, &v) in grads[Slots::POS][i * d..(i + 1) * d].iter_mut().zip(row) {
            *g = *g + v;
        }
    }
}

/// Mutable borrows of two distinct tensors, `a < b`.
fn split2<F>(grads: &mut [Vec<F>], a: usize, b: usize) -> (&mut [F], &mut [F]) {
    debug_assert!(a < b);
    let (lo, hi) = grads.split_at_mut(b);
    (&mut lo[a], &mut hi[0])
}

/// Cross-entropy of one example and its gradient. `dropout` seeds the masks;
/// `None` evaluates deterministically.
pub fn example_gradient<F: Scalar>(
    params: &ModelParams<F>,
    input: ModelInput,
    label: PlanLabel,
    dropout: Option<&mut ChaCha8Rng>,
) -> Result<(F, Vec<Vec<F>>)> {
    let trace = run(params, input, dropout)?;
    let mut grads = params.zeros_like();
    backward(params, &trace, label, &mut grads);
    let p = trace.probs[label.index()].max(k(1e-30));
    Ok((-p.ln(), grads))
}

/// Mean cross-entropy over `batch` with gradients for every tensor, in
/// inference mode. Per-example work runs in parallel; the reduction walks the
/// batch in order so the result does not depend on thread timing.
pub fn loss_and_gradients<F: Scalar>(params: &ModelParams<F>, batch: &[&LabeledExample]) -> Result<(F, Vec<Vec<F>>)> {
    batch_gradients(params, batch, |_| None)
}

pub(crate) fn batch_gradients<F: Scalar>(
    params: &ModelParams<F>,
    batch: &[&LabeledExample],
    rng_for: impl Fn(&LabeledExample) -> Option<ChaCha8Rng> + Sync,
) -> Result<(F, Vec<Vec<F>>)> {
    if batch.is_empty() {
        return Err(Error::Training("empty batch".into()));
    }
    let parts: Vec<(F, Vec<Vec<F>>)> = batch
        .par_iter()
        .map(|e| {
            let mut rng = rng_for(e);
            example_gradient(params, ModelInput::from(*e), e.label, rng.as_mut())
        })
        .collect::<Result<_>>()?;
    let n: F = k(batch.len() as f64);
    let mut total = F::zero();
    let mut grads = params.zeros_like();
    for (loss, g) in parts {
        total = total + loss;
        for (acc, part) in grads.iter_mut().zip(g) {
            for (a, b) in acc.iter_mut().zip(part) {
                *a = *a + b;
            }
        }
    }
    for g in grads.iter_mut().flatten() {
        *g = *g / n;
    }
    Ok((total / n, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::{BOS, EOS, SEP};
    use crate::model::{init_model, ModelConfig};

    fn seq(tokens: &[u32]) -> TokenSequence {
        TokenSequence {
            tokens: tokens.to_vec(),
            attention_mask: vec![1; tokens.len()],
            true_length: tokens.len(),
        }
    }

    /// One layer, one head, width 2, unit-ish weights, recomputed by hand
    /// for a three-token sequence.
    #[test]
    fn hand_computed_forward() {
        let cfg = ModelConfig {
            layers: 1,
            heads: 1,
            embed_dim: 2,
            max_len: 3,
            vocab_size: 5,
            mlp_hidden: 1,
            dropout_rate: 0.0,
            seed: 0,
        };
        let mut p = init_model::<f64>(&cfg).unwrap();
        let s = p.slots();
        // tokens 0, 1, 4 embed to (1,0), (0,1), (2,1); positions add nothing
        p.tensors[Slots::TOK] = vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.0, 1.0];
        p.tensors[Slots::POS] = vec![0.0; 6];
        // q = k = v = ln1 output
        p.tensors[s.layer(0, off::QKV_W)] = vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        p.tensors[s.layer(0, off::OUT_W)] = vec![1.0, 0.0, 0.0, 1.0];
        // feed-forward branch disabled
        p.tensors[s.layer(0, off::FC_W)] = vec![0.0; 16];
        p.tensors[s.layer(0, off::PROJ_W)] = vec![0.0; 16];
        // head: hidden = gelu(h0 + l1), logits = (0, hidden)
        p.tensors[s.head(0)] = vec![1.0, 0.0, 1.0];
        p.tensors[s.head(2)] = vec![0.0, 1.0];

        let probs = forward(&p, ModelInput { sequence: &seq(&[0, 1, 4]), l1: 0.5 }).unwrap();

        // every ln1 row of a width-2 vector (a, b), a != b, is ±(1, -1) scaled
        let r = 0.5 / (0.25f64 + 1e-5).sqrt();
        let rows = [[r, -r], [-r, r], [r, -r]];
        // last position attends to all three with scores q·k / sqrt(1)
        let scores: Vec<f64> = rows.iter().map(|kr| rows[2][0] * kr[0] + rows[2][1] * kr[1]).collect();
        let mx = scores.iter().cloned().fold(f64::MIN, f64::max);
        let e: Vec<f64> = scores.iter().map(|s| (s - mx).exp()).collect();
        let z: f64 = e.iter().sum();
        let o: Vec<f64> = (0..2).map(|c| (0..3).map(|j| e[j] / z * rows[j][c]).sum()).collect();
        let x = [2.0 + o[0], 1.0 + o[1]];
        let mean = (x[0] + x[1]) / 2.0;
        let var = ((x[0] - mean).powi(2) + (x[1] - mean).powi(2)) / 2.0;
        let h0 = (x[0] - mean) / (var + 1e-5).sqrt();
        let pre: f64 = h0 + 0.5;
        let hidden = 0.5 * pre * (1.0 + ((2.0 / std::f64::consts::PI).sqrt() * (pre + 0.044715 * pre.powi(3))).tanh());
        let p1 = 1.0 / (1.0 + (-hidden).exp());
        assert!((probs[1] - p1).abs() < 1e-6, "{} vs {p1}", probs[1]);
        assert!((probs[0] + probs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_logits_give_ln2() {
        let cfg = ModelConfig::small(11, 11);
        let mut p = init_model::<f64>(&cfg).unwrap();
        let s = p.slots();
        p.tensors[s.head(2)].iter_mut().for_each(|v| *v = 0.0);
        let e = LabeledExample::new("q", 0, seq(&[BOS, 5, SEP, 5, EOS]), 1.0, 2.0, PlanLabel::SubOptimal);
        let (loss, _) = loss_and_gradients(&p, &[&e]).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn out_of_vocabulary_tokens_are_rejected() {
        let p = init_model::<f32>(&ModelConfig::small(11, 8)).unwrap();
        let s = seq(&[BOS, 11, EOS]);
        assert!(matches!(forward(&p, ModelInput { sequence: &s, l1: 0.0 }), Err(Error::Input(_))));
    }
}
