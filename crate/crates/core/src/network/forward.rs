use super::arch::{Architecture, ConvActivation, MlpActivation, SliceKind, INPUT_LEN};
use crate::autodiff::Real;
use crate::error::{Error, Result};

fn conv_act<T: Real>(a: ConvActivation, t: T) -> T {
    match a {
        ConvActivation::Relu => t.relu(),
        ConvActivation::Gelu => t.gelu(),
    }
}

fn mlp_act<T: Real>(a: MlpActivation, t: T) -> T {
    match a {
        MlpActivation::Requ => t.requ(),
        MlpActivation::Gelu2 => t.gelu2(),
    }
}

/// One-sided, stride-one multichannel convolution:
/// `out[i][o] = b[o] + sum_{k, j} w[k][o][j] * x[i + k][j]`, zero beyond the end.
pub(crate) fn conv_layer<T: Real>(
    x: &[Vec<T>],
    filter: &[T],
    bias: &[T],
    kernel: usize,
    out_ch: usize,
) -> Vec<Vec<T>> {
    let len = x.len();
    let in_ch = x[0].len();
    (0..len)
        .map(|i| {
            (0..out_ch)
                .map(|o| {
                    let mut acc = bias[o];
                    for k in 0..kernel.min(len - i) {
                        let row = &filter[(k * out_ch + o) * in_ch..(k * out_ch + o + 1) * in_ch];
                        for (w, &xv) in row.iter().zip(&x[i + k]) {
                            acc = acc + *w * xv;
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Network output for one input point, generic over the scalar payload.
///
/// `params` must follow `arch.layout()`; for jet payloads the parameters are
/// lifted constants, for tape payloads they are leaves.
pub fn forward<T: Real>(arch: &Architecture, params: &[T], input: [T; INPUT_LEN]) -> Result<T> {
    let layout = arch.layout();
    if params.len() != layout.total_len() {
        return Err(Error::LayoutMismatch {
            expected: layout.total_len(),
            got: params.len(),
        });
    }
    let slice = |kind| &params[layout.find(kind).range()];
    let c = &arch.conv;

    let mut h: Vec<Vec<T>> = input.iter().map(|&v| vec![v]).collect();
    for layer in 0..c.layers {
        let pre = conv_layer(
            &h,
            slice(SliceKind::ConvFilter { layer }),
            slice(SliceKind::ConvBias { layer }),
            c.kernel_size,
            c.channels,
        );
        h = pre
            .into_iter()
            .map(|row| row.into_iter().map(|t| conv_act(c.activation, t)).collect())
            .collect();
    }

    // average pooling over the spatial axis
    let scale = 1.0 / INPUT_LEN as f64;
    let mut feat: Vec<T> = (0..c.channels)
        .map(|ch| h.iter().fold(T::zero(), |acc, row| acc + row[ch]) * scale)
        .collect();

    let dense = |w: &[T], b: &[T], x: &[T]| -> Vec<T> {
        b.iter()
            .enumerate()
            .map(|(o, &bias)| {
                w[o * x.len()..(o + 1) * x.len()]
                    .iter()
                    .zip(x)
                    .fold(bias, |acc, (&wi, &xi)| acc + wi * xi)
            })
            .collect()
    };
    for layer in 0..arch.mlp.widths.len() {
        feat = dense(
            slice(SliceKind::DenseWeight { layer }),
            slice(SliceKind::DenseBias { layer }),
            &feat,
        )
        .into_iter()
        .map(|t| mlp_act(arch.mlp.activation, t))
        .collect();
    }
    let out = dense(slice(SliceKind::OutputWeight), slice(SliceKind::OutputBias), &feat);
    Ok(out[0])
}
