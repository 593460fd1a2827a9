//! Expanding-width single-channel CNN: full (Toeplitz) convolution, ReLU,
//! then downsampling by a fixed stride.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SingleChannelSpec {
    pub depth: usize,
    pub filter_size: usize,
    /// Input dimension `d`, also the downsampling stride.
    pub downsample_stride: usize,
}

impl SingleChannelSpec {
    /// Widths `d_0, ..., d_L` with `d_l = d_{l-1} + S - 1`.
    pub fn widths(&self) -> Vec<usize> {
        (0..=self.depth)
            .map(|l| self.downsample_stride + l * (self.filter_size - 1))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleChannelOutput {
    pub pre_downsample: Vec<f64>,
    pub downsampled: Vec<f64>,
}

/// `(T w) x` for the `(len(x) + S - 1) x len(x)` Toeplitz matrix of `w`.
pub fn toeplitz_apply(w: &[f64], x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len() + w.len() - 1];
    for (j, &xj) in x.iter().enumerate() {
        for (k, &wk) in w.iter().enumerate() {
            out[j + k] += wk * xj;
        }
    }
    out
}

/// `D(x)_i = x_{i d}` with 1-based indices, `i = 1..floor(len/d)`.
pub fn downsample(x: &[f64], d: usize) -> Vec<f64> {
    (1..=x.len() / d).map(|i| x[i * d - 1]).collect()
}

pub fn single_channel_forward(
    spec: &SingleChannelSpec,
    filters: &[Vec<f64>],
    biases: &[Vec<f64>],
    input: &[f64],
) -> Result<SingleChannelOutput> {
    let widths = spec.widths();
    if spec.filter_size < 3 || spec.downsample_stride == 0 {
        return Err(Error::Shape(format!(
            "filter size must be >= 3 and stride >= 1, got {spec:?}"
        )));
    }
    if input.len() != widths[0] {
        return Err(Error::Shape(format!(
            "input length {} != d = {}",
            input.len(),
            widths[0]
        )));
    }
    if filters.len() != spec.depth || biases.len() != spec.depth {
        return Err(Error::Shape(format!(
            "expected {} filters and biases, got {} and {}",
            spec.depth,
            filters.len(),
            biases.len()
        )));
    }
    let mut h = input.to_vec();
    for (l, (w, b)) in filters.iter().zip(biases).enumerate() {
        if w.len() != spec.filter_size || b.len() != widths[l + 1] {
            return Err(Error::Shape(format!(
                "layer {l}: filter length {} (want {}), bias length {} (want {})",
                w.len(),
                spec.filter_size,
                b.len(),
                widths[l + 1]
            )));
        }
        h = toeplitz_apply(w, &h)
            .into_iter()
            .zip(b)
            .map(|(t, bi)| (t - bi).max(0.0))
            .collect();
    }
    let downsampled = downsample(&h, spec.downsample_stride);
    Ok(SingleChannelOutput {
        pre_downsample: h,
        downsampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_filter_pads_with_zeros() {
        let spec = SingleChannelSpec {
            depth: 1,
            filter_size: 3,
            downsample_stride: 2,
        };
        let out =
            single_channel_forward(&spec, &[vec![1.0, 0.0, 0.0]], &[vec![0.0; 4]], &[1.0, -1.0])
                .unwrap();
        assert_eq!(out.pre_downsample, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(out.downsampled, vec![0.0, 0.0]);
    }

    #[test]
    fn zero_filters_give_zero() {
        let spec = SingleChannelSpec {
            depth: 2,
            filter_size: 4,
            downsample_stride: 3,
        };
        let w = spec.widths();
        assert_eq!(w, vec![3, 6, 9]);
        let out = single_channel_forward(
            &spec,
            &[vec![0.0; 4], vec![0.0; 4]],
            &[vec![0.0; 6], vec![0.0; 9]],
            &[0.3, -2.0, 5.0],
        )
        .unwrap();
        assert!(out.pre_downsample.iter().all(|&v| v == 0.0));
        assert_eq!(out.downsampled.len(), 3);
    }

    #[test]
    fn downsample_one_based() {
        assert_eq!(downsample(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 2), vec![2.0, 4.0, 6.0]);
        assert_eq!(downsample(&[1.0, 2.0, 3.0, 4.0, 5.0], 2), vec![2.0, 4.0]);
    }

    #[test]
    fn toeplitz_matches_matrix() {
        let w = [0.5, -1.0, 2.0];
        let x = [1.0, 2.0, -3.0, 0.25];
        let y = toeplitz_apply(&w, &x);
        for (i, yi) in y.iter().enumerate() {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                if i >= j && i - j < w.len() {
                    acc += w[i - j] * xj;
                }
            }
            assert_eq!(*yi, acc);
        }
    }

    #[test]
    fn shape_errors() {
        let spec = SingleChannelSpec {
            depth: 1,
            filter_size: 3,
            downsample_stride: 2,
        };
        assert!(single_channel_forward(&spec, &[vec![1.0; 2]], &[vec![0.0; 4]], &[1.0, 1.0]).is_err());
        assert!(single_channel_forward(&spec, &[vec![1.0; 3]], &[vec![0.0; 4]], &[1.0]).is_err());
    }
}
