//! Network architecture model: layers, chains and their validation.
//!
//! Every quantity is tracked per spatial axis. Square layers simply carry
//! the same value on both axes. The input image is layer 0 and is never
//! stored as a [`LayerSpec`].

use std::fmt;

use serde::{Serialize, Serializer};

/// One spatial axis of a feature map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    H,
    W,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::H, Axis::W];

    pub fn name(self) -> &'static str {
        match self {
            Axis::H => "h",
            Axis::W => "w",
        }
    }
}

/// A per-axis pair of values, serialized as `[h, w]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Axes<T> {
    pub h: T,
    pub w: T,
}

impl<T: Copy> Axes<T> {
    pub const fn new(h: T, w: T) -> Self {
        Self { h, w }
    }

    pub const fn square(v: T) -> Self {
        Self { h: v, w: v }
    }

    pub fn get(&self, axis: Axis) -> T {
        match axis {
            Axis::H => self.h,
            Axis::W => self.w,
        }
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> Axes<U> {
        Axes {
            h: f(self.h),
            w: f(self.w),
        }
    }

}

impl<T> Axes<T> {
    /// Builds a pair by evaluating `f` once per axis.
    pub fn from_fn(mut f: impl FnMut(Axis) -> T) -> Self {
        Self {
            h: f(Axis::H),
            w: f(Axis::W),
        }
    }
}

impl<T: Copy + PartialEq> Axes<T> {
    pub fn is_square(&self) -> bool {
        self.h == self.w
    }
}

impl<T, E> Axes<Result<T, E>> {
    pub fn transpose(self) -> Result<Axes<T>, E> {
        Ok(Axes {
            h: self.h?,
            w: self.w?,
        })
    }
}

impl<T: Serialize> Serialize for Axes<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (&self.h, &self.w).serialize(serializer)
    }
}

impl<T: fmt::Display + PartialEq> fmt::Display for Axes<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.h == self.w {
            write!(f, "{}", self.h)
        } else {
            write!(f, "{}x{}", self.h, self.w)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Conv,
    Pool,
}

impl LayerKind {
    pub fn keyword(self) -> &'static str {
        match self {
            LayerKind::Conv => "conv",
            LayerKind::Pool => "pool",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        match word {
            "conv" => Some(LayerKind::Conv),
            "pool" => Some(LayerKind::Pool),
            _ => None,
        }
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Whether the chain is read as a CNN or as its deconvolutional inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Conv,
    Deconv,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Conv => "conv",
            Direction::Deconv => "deconv",
        }
    }

    pub fn toggled(self) -> Self {
        match self {
            Direction::Conv => Direction::Deconv,
            Direction::Deconv => Direction::Conv,
        }
    }
}

/// A single conv or pool layer at 1-based position `index` in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerSpec {
    pub index: usize,
    pub kind: LayerKind,
    pub filter: Axes<u64>,
    pub stride: Axes<u64>,
    /// Number of filters. Only used to print the depth multiplier.
    pub channels_out: Option<u64>,
}

impl LayerSpec {
    pub fn new(index: usize, kind: LayerKind, filter: Axes<u64>, stride: Axes<u64>) -> Self {
        Self {
            index,
            kind,
            filter,
            stride,
            channels_out: None,
        }
    }

    pub fn with_channels(mut self, channels: u64) -> Self {
        self.channels_out = Some(channels);
        self
    }

    /// True when the windows of this layer tile its input without holes on both axes.
    pub fn covers_input(&self) -> bool {
        self.stride.h <= self.filter.h && self.stride.w <= self.filter.w
    }
}

/// Kind, filter and stride of a layer before it is placed in a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerShape {
    pub kind: LayerKind,
    pub filter: Axes<u64>,
    pub stride: Axes<u64>,
    pub channels_out: Option<u64>,
}

impl LayerShape {
    pub fn square(kind: LayerKind, filter: u64, stride: u64) -> Self {
        Self {
            kind,
            filter: Axes::square(filter),
            stride: Axes::square(stride),
            channels_out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkSpec {
    pub name: String,
    pub direction: Direction,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    /// Places `shapes` in a chain, numbering them 1..=n in order.
    pub fn from_shapes(
        name: impl Into<String>,
        direction: Direction,
        shapes: impl IntoIterator<Item = LayerShape>,
    ) -> Self {
        let layers = shapes
            .into_iter()
            .enumerate()
            .map(|(i, shape)| LayerSpec {
                index: i + 1,
                kind: shape.kind,
                filter: shape.filter,
                stride: shape.stride,
                channels_out: shape.channels_out,
            })
            .collect();
        Self {
            name: name.into(),
            direction,
            layers,
        }
    }

    /// Convenience constructor for square layers given as `(kind, filter, stride)`.
    pub fn square_chain(
        name: impl Into<String>,
        layers: impl IntoIterator<Item = (LayerKind, u64, u64)>,
    ) -> Self {
        Self::from_shapes(
            name,
            Direction::Conv,
            layers
                .into_iter()
                .map(|(kind, f, s)| LayerShape::square(kind, f, s)),
        )
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Layer `k` (1-based). `None` for layer 0 or past the end.
    pub fn layer(&self, k: usize) -> Option<&LayerSpec> {
        k.checked_sub(1).and_then(|i| self.layers.get(i))
    }

    /// Copy of the chain with `shape` inserted so that it becomes layer `at`
    /// (1-based); later layers are renumbered.
    pub fn with_inserted(&self, at: usize, shape: LayerShape) -> Self {
        let mut shapes: Vec<LayerShape> = self
            .layers
            .iter()
            .map(|l| LayerShape {
                kind: l.kind,
                filter: l.filter,
                stride: l.stride,
                channels_out: l.channels_out,
            })
            .collect();
        shapes.insert(at.saturating_sub(1).min(shapes.len()), shape);
        Self::from_shapes(self.name.clone(), self.direction, shapes)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// A single finding, attached to a layer (0 for network-level findings).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub layer: usize,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.layer == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "layer {}: {}", self.layer, self.message)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks the structural invariants of `network`.
///
/// Errors are raised for empty chains, non-contiguous indices and zero
/// filters or strides. An axis whose stride exceeds its filter only gets a
/// warning: the extent formulas stay valid but the influenced pixels have holes.
pub fn validate(network: &NetworkSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    if network.layers.is_empty() {
        report.errors.push(Finding {
            layer: 0,
            message: "network has no layers".into(),
        });
    }
    for (pos, layer) in network.layers.iter().enumerate() {
        let k = layer.index;
        if k != pos + 1 {
            report.errors.push(Finding {
                layer: k,
                message: format!("layer index {k} out of sequence, expected {}", pos + 1),
            });
        }
        for axis in Axis::BOTH {
            let f = layer.filter.get(axis);
            let s = layer.stride.get(axis);
            if f < 1 {
                report.errors.push(Finding {
                    layer: k,
                    message: format!("filter must be ≥ 1 (axis {})", axis.name()),
                });
            }
            if s < 1 {
                report.errors.push(Finding {
                    layer: k,
                    message: format!("stride must be ≥ 1 (axis {})", axis.name()),
                });
            }
            if f >= 1 && s > f {
                report.warnings.push(Finding {
                    layer: k,
                    message: format!(
                        "stride exceeds filter: coverage gaps (axis {}, f={f}, s={s})",
                        axis.name()
                    ),
                });
            }
        }
        if layer.channels_out == Some(0) {
            report.errors.push(Finding {
                layer: k,
                message: "channels_out must be ≥ 1".into(),
            });
        }
    }
    report
}
