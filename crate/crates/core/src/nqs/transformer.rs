use super::{LayerOffsets, Nqs};
use crate::quantum::qubit_bit;

const NORM_EPS: f64 = 1e-5;

struct Norm {
    /// Standardized input, `m x D`.
    unit: Vec<f64>,
    inv_std: Vec<f64>,
}

struct LayerCache {
    input: Vec<f64>,
    query: Vec<f64>,
    key: Vec<f64>,
    value: Vec<f64>,
    /// Attention weights, `heads x m x m` (row = query position).
    attention: Vec<f64>,
    mixed: Vec<f64>,
    first: Norm,
    /// Output of the first normalization.
    normed: Vec<f64>,
    hidden: Vec<f64>,
    second: Norm,
}

/// Row-wise `gain * (z - mean) / sqrt(var + eps) + shift`.
fn layer_norm(z: &[f64], m: usize, d: usize, params: &[f64]) -> (Vec<f64>, Norm) {
    let (gain, shift) = params.split_at(d);
    let mut out = vec![0.0; m * d];
    let mut unit = vec![0.0; m * d];
    let mut inv_std = vec![0.0; m];
    for j in 0..m {
        let row = &z[j * d..(j + 1) * d];
        let mean = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / d as f64;
        let r = 1.0 / (var + NORM_EPS).sqrt();
        inv_std[j] = r;
        for c in 0..d {
            let u = (row[c] - mean) * r;
            unit[j * d + c] = u;
            out[j * d + c] = gain[c] * u + shift[c];
        }
    }
    (out, Norm { unit, inv_std })
}

/// Gradient with respect to the normalization input; accumulates gain and shift gradients.
fn layer_norm_back(dout: &[f64], norm: &Norm, m: usize, d: usize, params: &[f64], grad: &mut [f64]) -> Vec<f64> {
    let gain = &params[..d];
    let mut dz = vec![0.0; m * d];
    for j in 0..m {
        let u = &norm.unit[j * d..(j + 1) * d];
        let g = &dout[j * d..(j + 1) * d];
        let du: Vec<f64> = (0..d).map(|c| g[c] * gain[c]).collect();
        for c in 0..d {
            grad[c] += g[c] * u[c];
            grad[d + c] += g[c];
        }
        let mean_du = du.iter().sum::<f64>() / d as f64;
        let mean_du_u = du.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / d as f64;
        for c in 0..d {
            dz[j * d + c] = norm.inv_std[j] * (du[c] - mean_du - u[c] * mean_du_u);
        }
    }
    dz
}

/// Input tokens `(0, s_1, ..., s_{len-1})` for the first `len` positions.
fn tokens(n: usize, s: u64, len: usize) -> Vec<usize> {
    let mut t = Vec::with_capacity(len);
    t.push(0);
    for q in 0..len - 1 {
        t.push(((s >> qubit_bit(q, n)) & 1) as usize);
    }
    t
}

/// `a (rows x inner) * b (inner x cols)`.
fn matmul(a: &[f64], rows: usize, inner: usize, b: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        let o = &mut out[r * cols..(r + 1) * cols];
        for k in 0..inner {
            let av = a[r * inner + k];
            if av != 0.0 {
                for (ov, bv) in o.iter_mut().zip(&b[k * cols..(k + 1) * cols]) {
                    *ov += av * bv;
                }
            }
        }
    }
    out
}

/// `a (rows x inner) * b^T` where `b` is `cols x inner`.
fn matmul_bt(a: &[f64], rows: usize, inner: usize, b: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        let ar = &a[r * inner..(r + 1) * inner];
        for c in 0..cols {
            out[r * cols + c] = ar.iter().zip(&b[c * inner..(c + 1) * inner]).map(|(x, y)| x * y).sum();
        }
    }
    out
}

/// `out (inner_a x inner_b) += a^T b` with `a` as `rows x inner_a`, `b` as `rows x inner_b`.
fn add_at_b(a: &[f64], b: &[f64], rows: usize, inner_a: usize, inner_b: usize, out: &mut [f64]) {
    for r in 0..rows {
        for i in 0..inner_a {
            let av = a[r * inner_a + i];
            if av != 0.0 {
                for (ov, bv) in out[i * inner_b..(i + 1) * inner_b]
                    .iter_mut()
                    .zip(&b[r * inner_b..(r + 1) * inner_b])
                {
                    *ov += av * bv;
                }
            }
        }
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Runs the body on the first `tok.len()` positions; returns final activations `m x D`.
fn body(net: &Nqs, tok: &[usize], mut caches: Option<&mut Vec<LayerCache>>) -> Vec<f64> {
    let d = net.arch.dim;
    let heads = net.arch.heads;
    let hd = net.arch.head_dim();
    let scale = 1.0 / (hd as f64).sqrt();
    let p = &net.params;
    let lay = &net.layout;
    let m = tok.len();
    let mut x = vec![0.0; m * d];
    for (j, &t) in tok.iter().enumerate() {
        for c in 0..d {
            x[j * d + c] = p[lay.token + t * d + c] + p[lay.position + j * d + c];
        }
    }
    for off in &lay.layers {
        let LayerOffsets {
            query,
            key,
            value,
            output,
            linear,
            bias,
            norm_attention,
            norm_linear,
        } = *off;
        let q = matmul(&x, m, d, &p[query..query + d * d], d);
        let k = matmul(&x, m, d, &p[key..key + d * d], d);
        let v = matmul(&x, m, d, &p[value..value + d * d], d);
        let mut att = vec![0.0; heads * m * m];
        let mut mixed = vec![0.0; m * d];
        for h in 0..heads {
            let cols = h * hd..(h + 1) * hd;
            for i in 0..m {
                let qi = &q[i * d + cols.start..i * d + cols.end];
                let row = &mut att[(h * m + i) * m..(h * m + i + 1) * m];
                let mut top = f64::NEG_INFINITY;
                for j in 0..=i {
                    let kj = &k[j * d + cols.start..j * d + cols.end];
                    row[j] = qi.iter().zip(kj).map(|(a, b)| a * b).sum::<f64>() * scale;
                    top = top.max(row[j]);
                }
                let mut total = 0.0;
                for w in row[..=i].iter_mut() {
                    *w = (*w - top).exp();
                    total += *w;
                }
                for w in row[..=i].iter_mut() {
                    *w /= total;
                }
                for j in 0..=i {
                    let w = row[j];
                    for c in cols.clone() {
                        mixed[i * d + c] += w * v[j * d + c];
                    }
                }
            }
        }
        let attended = matmul(&mixed, m, d, &p[output..output + d * d], d);
        let residual: Vec<f64> = x.iter().zip(&attended).map(|(a, b)| a + b).collect();
        let (normed, first) = layer_norm(&residual, m, d, &p[norm_attention..norm_attention + 2 * d]);
        let mut hidden = matmul(&normed, m, d, &p[linear..linear + d * d], d);
        for j in 0..m {
            for c in 0..d {
                hidden[j * d + c] += p[bias + c];
            }
        }
        let block: Vec<f64> = normed.iter().zip(&hidden).map(|(r, h)| r + h.max(0.0)).collect();
        let (next, second) = layer_norm(&block, m, d, &p[norm_linear..norm_linear + 2 * d]);
        if let Some(c) = caches.as_deref_mut() {
            c.push(LayerCache {
                input: x,
                query: q,
                key: k,
                value: v,
                attention: att,
                mixed,
                first,
                normed,
                hidden,
                second,
            });
        }
        x = next;
    }
    x
}

fn logit(net: &Nqs, out: &[f64], j: usize) -> f64 {
    let d = net.arch.dim;
    let at = net.layout.logit.expect("network has a logit head");
    let w = &net.params[at..at + d];
    w.iter().zip(&out[j * d..(j + 1) * d]).map(|(a, b)| a * b).sum::<f64>() + net.params[at + d]
}

fn phase(net: &Nqs, out: &[f64]) -> f64 {
    let d = net.arch.dim;
    let len = (net.arch.n + 1) * d;
    let at = net.layout.phase.expect("network has a phase head");
    net.params[at..at + len].iter().zip(out).map(|(a, b)| a * b).sum::<f64>() + net.params[at + len]
}

pub(super) fn evaluate(net: &Nqs, s: u64) -> super::WaveAmplitude {
    let n = net.arch.n;
    let out = body(net, &tokens(n, s, n + 1), None);
    let mut log_sqrt_p = 0.0;
    if net.mode.has_amplitude() {
        for j in 0..n {
            let l = logit(net, &out, j);
            let bit = (s >> qubit_bit(j, n)) & 1;
            log_sqrt_p -= 0.5 * if bit == 1 { softplus(-l) } else { softplus(l) };
        }
    }
    let phase_raw = if net.mode.has_phase() { phase(net, &out) } else { 0.0 };
    super::WaveAmplitude {
        log_sqrt_p,
        phase_raw,
    }
}

pub(super) fn conditionals(net: &Nqs, s: u64) -> Vec<f64> {
    let n = net.arch.n;
    if !net.mode.has_amplitude() {
        return vec![0.5; n];
    }
    let out = body(net, &tokens(n, s, n + 1), None);
    (0..n).map(|j| sigmoid(logit(net, &out, j))).collect()
}

/// `p(s_{j+1} = 1 | prefix)` where `prefix` holds the first `j` bits, most significant first.
pub(super) fn next_conditional(net: &Nqs, prefix: u64, j: usize) -> f64 {
    if !net.mode.has_amplitude() {
        return 0.5;
    }
    let mut tok = Vec::with_capacity(j + 1);
    tok.push(0);
    for q in 0..j {
        tok.push(((prefix >> (j - 1 - q)) & 1) as usize);
    }
    let out = body(net, &tok, None);
    sigmoid(logit(net, &out, j))
}

pub(super) fn backward(net: &Nqs, s: u64, seed_amp: f64, seed_phase: f64, grad: &mut [f64]) {
    let n = net.arch.n;
    let d = net.arch.dim;
    let heads = net.arch.heads;
    let hd = net.arch.head_dim();
    let scale = 1.0 / (hd as f64).sqrt();
    let m = n + 1;
    let p = &net.params;
    let lay = &net.layout;
    assert_eq!(grad.len(), p.len());

    let tok = tokens(n, s, m);
    let mut caches = Vec::with_capacity(lay.layers.len());
    let out = body(net, &tok, Some(&mut caches));

    let mut dx = vec![0.0; m * d];
    if seed_amp != 0.0 {
        if let Some(at) = lay.logit {
            for j in 0..n {
                let bit = ((s >> qubit_bit(j, n)) & 1) as f64;
                let dl = seed_amp * 0.5 * (bit - sigmoid(logit(net, &out, j)));
                for c in 0..d {
                    grad[at + c] += dl * out[j * d + c];
                    dx[j * d + c] += dl * p[at + c];
                }
                grad[at + d] += dl;
            }
        }
    }
    if seed_phase != 0.0 {
        if let Some(at) = lay.phase {
            let len = m * d;
            for i in 0..len {
                grad[at + i] += seed_phase * out[i];
                dx[i] += seed_phase * p[at + i];
            }
            grad[at + len] += seed_phase;
        }
    }
    if dx.iter().all(|&v| v == 0.0) {
        return;
    }

    for (off, c) in lay.layers.iter().zip(caches.iter()).rev() {
        // x' = norm(y + relu(h)), h = y W + b
        let nl = off.norm_linear;
        let dblock = layer_norm_back(&dx, &c.second, m, d, &p[nl..nl + 2 * d], &mut grad[nl..nl + 2 * d]);
        let dh: Vec<f64> = dblock
            .iter()
            .zip(&c.hidden)
            .map(|(g, h)| if *h > 0.0 { *g } else { 0.0 })
            .collect();
        add_at_b(&c.normed, &dh, m, d, d, &mut grad[off.linear..off.linear + d * d]);
        for j in 0..m {
            for col in 0..d {
                grad[off.bias + col] += dh[j * d + col];
            }
        }
        let through = matmul_bt(&dh, m, d, &p[off.linear..off.linear + d * d], d);
        let dy: Vec<f64> = dblock.iter().zip(&through).map(|(a, b)| a + b).collect();

        // y = norm(x + mixed O)
        let na = off.norm_attention;
        let dy = layer_norm_back(&dy, &c.first, m, d, &p[na..na + 2 * d], &mut grad[na..na + 2 * d]);
        add_at_b(&c.mixed, &dy, m, d, d, &mut grad[off.output..off.output + d * d]);
        let dmixed = matmul_bt(&dy, m, d, &p[off.output..off.output + d * d], d);

        let mut dq = vec![0.0; m * d];
        let mut dk = vec![0.0; m * d];
        let mut dv = vec![0.0; m * d];
        for h in 0..heads {
            let cols = h * hd..(h + 1) * hd;
            for i in 0..m {
                let row = &c.attention[(h * m + i) * m..(h * m + i + 1) * m];
                let dz = &dmixed[i * d + cols.start..i * d + cols.end];
                let mut da = vec![0.0; i + 1];
                for j in 0..=i {
                    let vj = &c.value[j * d + cols.start..j * d + cols.end];
                    da[j] = dz.iter().zip(vj).map(|(a, b)| a * b).sum();
                    for (t, col) in cols.clone().enumerate() {
                        dv[j * d + col] += row[j] * dz[t];
                    }
                }
                let dot: f64 = (0..=i).map(|j| row[j] * da[j]).sum();
                for j in 0..=i {
                    let ds = row[j] * (da[j] - dot) * scale;
                    if ds == 0.0 {
                        continue;
                    }
                    for col in cols.clone() {
                        dq[i * d + col] += ds * c.key[j * d + col];
                        dk[j * d + col] += ds * c.query[i * d + col];
                    }
                }
            }
        }
        let mut dinput = dy;
        for (dmat, at) in [(&dq, off.query), (&dk, off.key), (&dv, off.value)] {
            add_at_b(&c.input, dmat, m, d, d, &mut grad[at..at + d * d]);
            let back = matmul_bt(dmat, m, d, &p[at..at + d * d], d);
            dinput.iter_mut().zip(back).for_each(|(a, b)| *a += b);
        }
        dx = dinput;
    }

    for (j, &t) in tok.iter().enumerate() {
        for col in 0..d {
            grad[lay.token + t * d + col] += dx[j * d + col];
            grad[lay.position + j * d + col] += dx[j * d + col];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_log_sigmoid() {
        for x in [-800.0, -30.0, -1.0, 0.0, 2.0, 40.0, 900.0] {
            let direct: f64 = sigmoid(x);
            assert!(direct >= 0.0 && direct <= 1.0);
            assert!(softplus(x).is_finite());
            if x.abs() < 30.0 {
                assert!((softplus(x) - (1.0 + f64::exp(x)).ln()).abs() < 1e-12);
                assert!((-softplus(-x) - direct.ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matrix_helpers() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]; // 2 x 3
        let b = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0]; // 3 x 2
        assert_eq!(matmul(&a, 2, 3, &b, 2), vec![4.0, 5.0, 10.0, 11.0]);
        // a * a^T
        assert_eq!(matmul_bt(&a, 2, 3, &a, 2), vec![14.0, 32.0, 32.0, 77.0]);
        let mut out = vec![0.0; 9];
        add_at_b(&a, &a, 2, 3, 3, &mut out);
        assert_eq!(out[0], 17.0);
        assert_eq!(out[8], 45.0);
    }
}
