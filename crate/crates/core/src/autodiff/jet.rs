//! Batched truncated Taylor jets through dense networks.
//!
//! A jet column block for one sample holds the value, `K` first-order
//! directional derivatives and `P` second-order mixed derivatives
//! `∂²/∂uₐ∂u_b` for selected pairs of those directions. All samples of a
//! batch sit side by side, so every affine layer is one GEMM over
//! `B·(1 + K + P)` columns. [`JetTrace::backward`] pulls a cotangent on the
//! output jets back to the network parameters, which is how parameter
//! gradients flow through input Hessians without a scalar tape.

use crate::nets::{Activation, LayerShape, NetworkParams};

/// Which derivatives a jet carries per sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetLayout {
    pub tangents: usize,
    /// Index pairs into the tangent directions.
    pub pairs: Vec<(usize, usize)>,
}

impl JetLayout {
    pub fn values_only() -> Self {
        JetLayout {
            tangents: 0,
            pairs: Vec::new(),
        }
    }

    pub fn first_order(tangents: usize) -> Self {
        JetLayout {
            tangents,
            pairs: Vec::new(),
        }
    }

    /// Columns per sample.
    pub fn width(&self) -> usize {
        1 + self.tangents + self.pairs.len()
    }

    pub fn tangent_col(&self, k: usize) -> usize {
        1 + k
    }

    pub fn pair_col(&self, p: usize) -> usize {
        1 + self.tangents + p
    }
}

/// Column-major block of jets: `rows × (samples · width)`.
#[derive(Clone, Debug)]
pub struct Jets {
    pub rows: usize,
    pub samples: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl Jets {
    pub fn zeros(rows: usize, samples: usize, width: usize) -> Self {
        Jets {
            rows,
            samples,
            width,
            data: vec![0.0; rows * samples * width],
        }
    }

    pub fn cols(&self) -> usize {
        self.samples * self.width
    }

    #[inline]
    pub fn col(&self, sample: usize, c: usize) -> &[f64] {
        let start = (sample * self.width + c) * self.rows;
        &self.data[start..start + self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, sample: usize, c: usize) -> &mut [f64] {
        let start = (sample * self.width + c) * self.rows;
        &mut self.data[start..start + self.rows]
    }

    #[inline]
    pub fn get(&self, row: usize, sample: usize, c: usize) -> f64 {
        self.data[(sample * self.width + c) * self.rows + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, sample: usize, c: usize, v: f64) {
        self.data[(sample * self.width + c) * self.rows + row] = v;
    }

    /// Input jets: value `x` and tangent directions `dirs[k]` per sample.
    /// Second-order input columns are zero since inputs are affine in
    /// themselves.
    pub fn input(layout: &JetLayout, values: &[Vec<f64>], dirs: &[Vec<Vec<f64>>]) -> Self {
        let rows = values.first().map_or(0, Vec::len);
        let mut j = Jets::zeros(rows, values.len(), layout.width());
        for (s, x) in values.iter().enumerate() {
            j.col_mut(s, 0).copy_from_slice(x);
            for k in 0..layout.tangents {
                j.col_mut(s, layout.tangent_col(k))
                    .copy_from_slice(&dirs[s][k]);
            }
        }
        j
    }
}

/// `C = α·A·B + β·C` with explicit strides.
#[allow(clippy::too_many_arguments)]
#[inline]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    rsa: isize,
    csa: isize,
    b: &[f64],
    rsb: isize,
    csb: isize,
    beta: f64,
    c: &mut [f64],
    rsc: isize,
    csc: isize,
) {
    if m == 0 || n == 0 {
        return;
    }
    // SAFETY: callers pass slices that cover the addressed m×k, k×n and
    // m×n extents for the given strides.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            rsc,
            csc,
        );
    }
}

struct LayerCache {
    /// Pre-activation jets.
    z: Jets,
    /// Post-activation jets; `None` for identity layers (equal to `z`).
    a: Option<Jets>,
}

/// Forward record kept for the reverse pass.
pub struct JetTrace {
    layout: JetLayout,
    input: Jets,
    layers: Vec<LayerCache>,
}

impl JetTrace {
    /// Runs `input` through the network.
    pub fn forward(params: &NetworkParams, layout: &JetLayout, input: Jets) -> Self {
        assert_eq!(input.rows, params.input_dim(), "jet input rows");
        assert_eq!(input.width, layout.width(), "jet input width");
        let offsets = params.offsets();
        let mut layers: Vec<LayerCache> = Vec::with_capacity(params.layers.len());
        for (li, shape) in params.layers.iter().enumerate() {
            let prev = match layers.last() {
                None => &input,
                Some(c) => c.a.as_ref().unwrap_or(&c.z),
            };
            let (w_off, b_off) = offsets[li];
            let w = &params.values[w_off..b_off];
            let b = &params.values[b_off..b_off + shape.outputs];
            let mut z = Jets::zeros(shape.outputs, prev.samples, prev.width);
            gemm(
                shape.outputs,
                shape.inputs,
                prev.cols(),
                1.0,
                w,
                1,
                shape.outputs as isize,
                &prev.data,
                1,
                shape.inputs as isize,
                0.0,
                &mut z.data,
                1,
                shape.outputs as isize,
            );
            for s in 0..z.samples {
                for (zr, br) in z.col_mut(s, 0).iter_mut().zip(b) {
                    *zr += br;
                }
            }
            let a = match shape.activation {
                Activation::Identity => None,
                act => Some(activate(act, layout, &z)),
            };
            layers.push(LayerCache { z, a });
        }
        JetTrace {
            layout: layout.clone(),
            input,
            layers,
        }
    }

    pub fn output(&self) -> &Jets {
        let last = self.layers.last().expect("network has layers");
        last.a.as_ref().unwrap_or(&last.z)
    }

    /// Accumulates `∂ℓ/∂θ` into `grad` given `d_out = ∂ℓ/∂(output jets)`.
    pub fn backward(&self, params: &NetworkParams, d_out: &Jets, grad: &mut [f64]) {
        assert_eq!(grad.len(), params.len());
        assert_eq!(d_out.data.len(), self.output().data.len());
        let offsets = params.offsets();
        let mut g_a = d_out.clone();
        for li in (0..self.layers.len()).rev() {
            let shape = params.layers[li];
            let cache = &self.layers[li];
            let g_z = match shape.activation {
                Activation::Identity => g_a,
                act => activate_backward(act, &self.layout, &cache.z, &g_a),
            };
            let prev = if li == 0 {
                &self.input
            } else {
                let c = &self.layers[li - 1];
                c.a.as_ref().unwrap_or(&c.z)
            };
            let (w_off, b_off) = offsets[li];
            // dW += G_z · prevᵀ
            gemm(
                shape.outputs,
                g_z.cols(),
                shape.inputs,
                1.0,
                &g_z.data,
                1,
                shape.outputs as isize,
                &prev.data,
                shape.inputs as isize,
                1,
                1.0,
                &mut grad[w_off..b_off],
                1,
                shape.outputs as isize,
            );
            let gb = &mut grad[b_off..b_off + shape.outputs];
            for s in 0..g_z.samples {
                for (acc, v) in gb.iter_mut().zip(g_z.col(s, 0)) {
                    *acc += v;
                }
            }
            if li == 0 {
                break;
            }
            // G_prev = Wᵀ · G_z
            let w = &params.values[w_off..b_off];
            let mut g_prev = Jets::zeros(shape.inputs, g_z.samples, g_z.width);
            gemm(
                shape.inputs,
                shape.outputs,
                g_z.cols(),
                1.0,
                w,
                shape.outputs as isize,
                1,
                &g_z.data,
                1,
                shape.outputs as isize,
                0.0,
                &mut g_prev.data,
                1,
                shape.inputs as isize,
            );
            g_a = g_prev;
        }
    }
}

fn activate(act: Activation, layout: &JetLayout, z: &Jets) -> Jets {
    let mut a = Jets::zeros(z.rows, z.samples, z.width);
    let rows = z.rows;
    let mut d = vec![[0.0; 4]; rows];
    for s in 0..z.samples {
        for (r, dr) in d.iter_mut().enumerate() {
            *dr = act.derivatives(z.get(r, s, 0));
        }
        for r in 0..rows {
            a.set(r, s, 0, d[r][0]);
        }
        for k in 0..layout.tangents {
            let c = layout.tangent_col(k);
            for r in 0..rows {
                a.set(r, s, c, d[r][1] * z.get(r, s, c));
            }
        }
        for (p, &(i, j)) in layout.pairs.iter().enumerate() {
            let (ci, cj, cp) = (
                layout.tangent_col(i),
                layout.tangent_col(j),
                layout.pair_col(p),
            );
            for r in 0..rows {
                let v = d[r][2] * z.get(r, s, ci) * z.get(r, s, cj) + d[r][1] * z.get(r, s, cp);
                a.set(r, s, cp, v);
            }
        }
    }
    a
}

fn activate_backward(act: Activation, layout: &JetLayout, z: &Jets, g_a: &Jets) -> Jets {
    let mut g_z = Jets::zeros(z.rows, z.samples, z.width);
    let rows = z.rows;
    let mut d = vec![[0.0; 4]; rows];
    for s in 0..z.samples {
        for (r, dr) in d.iter_mut().enumerate() {
            *dr = act.derivatives(z.get(r, s, 0));
        }
        for r in 0..rows {
            g_z.set(r, s, 0, g_a.get(r, s, 0) * d[r][1]);
        }
        for k in 0..layout.tangents {
            let c = layout.tangent_col(k);
            for r in 0..rows {
                let g = g_a.get(r, s, c);
                g_z.set(r, s, c, g * d[r][1]);
                let v = g_z.get(r, s, 0) + g * d[r][2] * z.get(r, s, c);
                g_z.set(r, s, 0, v);
            }
        }
        for (p, &(i, j)) in layout.pairs.iter().enumerate() {
            let (ci, cj, cp) = (
                layout.tangent_col(i),
                layout.tangent_col(j),
                layout.pair_col(p),
            );
            for r in 0..rows {
                let g = g_a.get(r, s, cp);
                if g == 0.0 {
                    continue;
                }
                let (zi, zj, zp) = (z.get(r, s, ci), z.get(r, s, cj), z.get(r, s, cp));
                g_z.set(r, s, cp, g * d[r][1]);
                let gi = g_z.get(r, s, ci) + g * d[r][2] * zj;
                g_z.set(r, s, ci, gi);
                let gj = g_z.get(r, s, cj) + g * d[r][2] * zi;
                g_z.set(r, s, cj, gj);
                let g0 = g_z.get(r, s, 0) + g * (d[r][3] * zi * zj + d[r][2] * zp);
                g_z.set(r, s, 0, g0);
            }
        }
    }
    g_z
}

/// Layer shapes are enough to size a trace; kept for callers that build
/// cotangent buffers up front.
pub fn output_rows(layers: &[LayerShape]) -> usize {
    layers.last().map_or(0, |l| l.outputs)
}
