//! The single-channel expanding CNN: each layer is a full convolution that
//! grows the width by S - 1, followed by ReLU; the final feature vector is
//! downsampled by the input dimension.
//!
//! cargo run --release --example expanding_cnn -- [depth] [filter_size]

use picnn::network::{single_channel_forward, toeplitz_apply, SingleChannelSpec};

fn main() -> picnn::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let depth: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(3);
    let filter_size: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let spec = SingleChannelSpec {
        depth,
        filter_size,
        downsample_stride: 3,
    };
    let widths = spec.widths();
    println!("widths {widths:?}");

    println!("Toeplitz [1, -1] * [1, 2, 3] = {:?}", toeplitz_apply(&[1.0, -1.0], &[1.0, 2.0, 3.0]));

    let filters: Vec<Vec<f64>> = (0..depth)
        .map(|l| (0..filter_size).map(|k| 0.5 - 0.2 * k as f64 + 0.1 * l as f64).collect())
        .collect();
    let biases: Vec<Vec<f64>> = widths[1..].iter().map(|&w| vec![0.05; w]).collect();
    let out = single_channel_forward(&spec, &filters, &biases, &[0.6, 0.8, 0.3])?;
    println!("features before downsampling {:?}", out.pre_downsample);
    println!("downsampled {:?}", out.downsampled);
    Ok(())
}
