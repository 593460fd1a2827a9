use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Length of the input sequence: the three ambient coordinates.
pub const INPUT_LEN: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvActivation {
    Relu,
    Gelu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MlpActivation {
    Requ,
    Gelu2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Padding {
    OneSidedZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub layers: usize,
    pub channels: usize,
    pub kernel_size: usize,
    pub padding: Padding,
    pub activation: ConvActivation,
}

/// Hidden widths of the dense head; a final affine map to one output is implied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    pub activation: MlpActivation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub conv: ConvSpec,
    pub mlp: MlpSpec,
}

impl Default for Architecture {
    /// Three 56-channel GeLU conv layers, kernel 3, and a GeLU² head (24, 8).
    fn default() -> Self {
        Architecture {
            conv: ConvSpec {
                layers: 3,
                channels: 56,
                kernel_size: 3,
                padding: Padding::OneSidedZero,
                activation: ConvActivation::Gelu,
            },
            mlp: MlpSpec {
                widths: vec![24, 8],
                activation: MlpActivation::Gelu2,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SliceKind {
    ConvFilter { layer: usize },
    ConvBias { layer: usize },
    DenseWeight { layer: usize },
    DenseBias { layer: usize },
    OutputWeight,
    OutputBias,
}

/// A contiguous block of the flat parameter vector.
///
/// Conv filters have shape `[kernel, out_channels, in_channels]`, dense
/// weights `[out, in]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slice {
    pub kind: SliceKind,
    pub offset: usize,
    pub shape: Vec<usize>,
}

impl Slice {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }

    pub fn is_bias(&self) -> bool {
        matches!(
            self.kind,
            SliceKind::ConvBias { .. } | SliceKind::DenseBias { .. } | SliceKind::OutputBias
        )
    }

    /// `(fan_in, fan_out)` for Glorot initialisation.
    pub fn fans(&self) -> (usize, usize) {
        match (self.kind, self.shape.as_slice()) {
            (SliceKind::ConvFilter { .. }, [k, out, inp]) => (k * inp, k * out),
            (_, [out, inp]) => (*inp, *out),
            (_, [n]) => (*n, *n),
            _ => (1, 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub slices: Vec<Slice>,
}

impl Layout {
    pub fn total_len(&self) -> usize {
        self.slices.iter().map(Slice::len).sum()
    }

    pub fn find(&self, kind: SliceKind) -> &Slice {
        self.slices
            .iter()
            .find(|s| s.kind == kind)
            .expect("slice kind present in layout")
    }

    /// Stable 64-bit digest of the slice shapes and order.
    pub fn hash(&self) -> u64 {
        let mut h = Sha256::new();
        for s in &self.slices {
            h.update(format!("{:?}:{}:{:?};", s.kind, s.offset, s.shape).as_bytes());
        }
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
    }
}

impl Architecture {
    pub fn validate(&self) -> Result<()> {
        let c = &self.conv;
        if c.layers == 0 || c.channels == 0 || c.kernel_size == 0 {
            return Err(Error::Precondition(format!(
                "conv layers, channels and kernel size must be >= 1, got {c:?}"
            )));
        }
        if self.mlp.widths.is_empty() || self.mlp.widths.contains(&0) {
            return Err(Error::Precondition(format!(
                "mlp widths must be non-empty and positive, got {:?}",
                self.mlp.widths
            )));
        }
        Ok(())
    }

    /// Parameter layout, a pure function of the architecture.
    pub fn layout(&self) -> Layout {
        let mut slices = Vec::new();
        let mut offset = 0;
        let mut push = |kind, shape: Vec<usize>| {
            let s = Slice { kind, offset, shape };
            offset += s.len();
            slices.push(s);
        };
        let c = &self.conv;
        let mut in_ch = 1;
        for layer in 0..c.layers {
            push(SliceKind::ConvFilter { layer }, vec![c.kernel_size, c.channels, in_ch]);
            push(SliceKind::ConvBias { layer }, vec![c.channels]);
            in_ch = c.channels;
        }
        let mut width = c.channels;
        for (layer, &out) in self.mlp.widths.iter().enumerate() {
            push(SliceKind::DenseWeight { layer }, vec![out, width]);
            push(SliceKind::DenseBias { layer }, vec![out]);
            width = out;
        }
        push(SliceKind::OutputWeight, vec![1, width]);
        push(SliceKind::OutputBias, vec![1]);
        Layout { slices }
    }

    /// Closed-form parameter count.
    pub fn param_count(&self) -> usize {
        let c = &self.conv;
        let conv: usize = (0..c.layers)
            .map(|l| {
                let in_ch = if l == 0 { 1 } else { c.channels };
                c.kernel_size * c.channels * in_ch + c.channels
            })
            .sum();
        let mut width = c.channels;
        let mut dense = 0;
        for &w in self.mlp.widths.iter().chain(std::iter::once(&1)) {
            dense += w * width + w;
            width = w;
        }
        conv + dense
    }
}
