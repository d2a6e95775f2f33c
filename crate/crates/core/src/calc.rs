//! Closed-form field arithmetic.
//!
//! Bottom-up: `R_k = R_{k-1} + (f_k - 1) * prod_{i<k} s_i`, one pass for all layers.
//! Top-down: `R_{k,j} = (R_{k,j+1} - 1) * s_{j+1} + f_{j+1}`, one pass per target layer.
//! Projective field sizes: products of `{floor(f/s), ceil(f/s)}` per axis of the next layer.
//!
//! All arithmetic is on `u64` and overflow is reported, never wrapped.

use std::collections::BTreeSet;

use crate::arch::{Axes, Axis, Direction, LayerSpec, NetworkSpec};
use crate::error::{FieldError, Result};

/// Per-layer ERF values from the bottom-up pass.
///
/// `values` has `n + 1` entries (`values[0]` is the input image). `increments`
/// and `cumulative_strides` have `n` entries; entry `k - 1` belongs to layer `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErfTrace {
    pub values: Vec<Axes<u64>>,
    pub increments: Vec<Axes<u64>>,
    pub cumulative_strides: Vec<Axes<u64>>,
}

impl ErfTrace {
    pub fn erf(&self, k: usize) -> Option<Axes<u64>> {
        self.values.get(k).copied()
    }

    /// ERF of the last layer.
    pub fn network_erf(&self) -> Axes<u64> {
        *self.values.last().expect("trace always holds the input layer")
    }

    pub fn increment(&self, k: usize) -> Option<Axes<u64>> {
        k.checked_sub(1).and_then(|i| self.increments.get(i)).copied()
    }

    pub fn cumulative_stride(&self, k: usize) -> Option<Axes<u64>> {
        k.checked_sub(1)
            .and_then(|i| self.cumulative_strides.get(i))
            .copied()
    }
}

/// RF of one layer-`k` neuron projected down onto every layer `j = k..=0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RfProjection {
    pub target_layer: usize,
    /// `values[i]` is `R_{k, k-i}`.
    pub values: Vec<Axes<u64>>,
}

impl RfProjection {
    /// `R_{k,j}`, or `None` if `j > k`.
    pub fn at(&self, j: usize) -> Option<Axes<u64>> {
        self.target_layer
            .checked_sub(j)
            .and_then(|i| self.values.get(i))
            .copied()
    }

    /// The projection onto the input image, i.e. the ERF of the target layer.
    pub fn erf(&self) -> Axes<u64> {
        *self.values.last().expect("projection always holds j = k")
    }

    /// Iterates `(j, R_{k,j})` from `j = k` down to 0.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Axes<u64>)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.target_layer - i, *v))
    }
}

/// Distinct projective-field sizes of layer-`k` neurons into layer `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PfSizeSet {
    pub boundary_layer: usize,
    /// `(floor(f/s), ceil(f/s))` per axis.
    pub bounds: Axes<(u64, u64)>,
    pub sizes: BTreeSet<Axes<u64>>,
    pub uniform: bool,
}

/// Human-facing names for the two quantities, which swap under deconv duality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldLabels {
    pub extent: &'static str,
    pub sizes: &'static str,
}

impl FieldLabels {
    pub fn for_direction(direction: Direction) -> Self {
        match direction {
            Direction::Conv => FieldLabels {
                extent: "effective receptive field",
                sizes: "projective field sizes",
            },
            Direction::Deconv => FieldLabels {
                extent: "projective field extent",
                sizes: "effective receptive field sizes",
            },
        }
    }
}

pub(crate) fn ensure_valid(network: &NetworkSpec) -> Result<()> {
    let report = network.validate();
    if report.is_ok() {
        return Ok(());
    }
    let msg = report
        .errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ");
    Err(FieldError::InvalidNetwork(msg))
}

fn check_layer(network: &NetworkSpec, k: usize) -> Result<()> {
    if k > network.len() {
        return Err(FieldError::LayerOutOfRange { k, n: network.len() });
    }
    Ok(())
}

/// Product of the strides of layers `1..k` on one axis.
fn stride_product(layers: &[LayerSpec], k: usize, axis: Axis) -> Result<u64> {
    layers[..k - 1].iter().try_fold(1u64, |acc, l| {
        acc.checked_mul(l.stride.get(axis))
            .ok_or(FieldError::Overflow { layer: l.index })
    })
}

/// Pixels a single extra window of layer `k` adds to the ERF: `(f_k - 1) * prod_{i<k} s_i`.
pub fn layer_increment(network: &NetworkSpec, k: usize) -> Result<Axes<u64>> {
    ensure_valid(network)?;
    if k == 0 || k > network.len() {
        return Err(FieldError::LayerOutOfRange { k, n: network.len() });
    }
    let layer = &network.layers[k - 1];
    Axes::from_fn(|axis| {
        let f = layer.filter.get(axis);
        if f == 1 {
            // (1 - 1) * anything, even an overflowing product.
            return Ok(0);
        }
        stride_product(&network.layers, k, axis)?
            .checked_mul(f - 1)
            .ok_or(FieldError::Overflow { layer: k })
    })
    .transpose()
}

/// ERF of every layer in one forward pass.
pub fn erf_bottom_up(network: &NetworkSpec) -> Result<ErfTrace> {
    ensure_valid(network)?;
    let n = network.len();
    let mut values = Vec::with_capacity(n + 1);
    let mut increments = Vec::with_capacity(n);
    let mut cumulative_strides = Vec::with_capacity(n);

    let mut erf = Axes::square(1u64);
    let mut jump = Axes::square(1u64);
    values.push(erf);
    for (pos, layer) in network.layers.iter().enumerate() {
        let k = layer.index;
        if pos > 0 {
            let prev = &network.layers[pos - 1];
            jump = Axes::from_fn(|axis| {
                jump.get(axis)
                    .checked_mul(prev.stride.get(axis))
                    .ok_or(FieldError::Overflow { layer: prev.index })
            })
            .transpose()?;
        }
        let inc = Axes::from_fn(|axis| {
            (layer.filter.get(axis) - 1)
                .checked_mul(jump.get(axis))
                .ok_or(FieldError::Overflow { layer: k })
        })
        .transpose()?;
        erf = Axes::from_fn(|axis| {
            erf.get(axis)
                .checked_add(inc.get(axis))
                .ok_or(FieldError::Overflow { layer: k })
        })
        .transpose()?;
        cumulative_strides.push(jump);
        increments.push(inc);
        values.push(erf);
    }
    Ok(ErfTrace {
        values,
        increments,
        cumulative_strides,
    })
}

/// Projects one neuron of layer `k` down to the input, layer by layer.
pub fn rf_top_down(network: &NetworkSpec, k: usize) -> Result<RfProjection> {
    ensure_valid(network)?;
    check_layer(network, k)?;
    let mut values = Vec::with_capacity(k + 1);
    let mut rf = Axes::square(1u64);
    values.push(rf);
    for layer in network.layers[..k].iter().rev() {
        rf = Axes::from_fn(|axis| {
            (rf.get(axis) - 1)
                .checked_mul(layer.stride.get(axis))
                .and_then(|v| v.checked_add(layer.filter.get(axis)))
                .ok_or(FieldError::Overflow { layer: layer.index })
        })
        .transpose()?;
        values.push(rf);
    }
    Ok(RfProjection {
        target_layer: k,
        values,
    })
}

/// Projective-field sizes of interior layer-`k` neurons into layer `k + 1`.
pub fn pf_size_set(network: &NetworkSpec, k: usize) -> Result<PfSizeSet> {
    ensure_valid(network)?;
    check_layer(network, k)?;
    let next = network
        .layer(k + 1)
        .ok_or(FieldError::NoSuccessor { k, n: network.len() })?;
    Ok(pf_sizes_for(k, next.filter, next.stride))
}

/// Size set for a window of size `filter` applied with `stride`.
pub fn pf_sizes_for(boundary_layer: usize, filter: Axes<u64>, stride: Axes<u64>) -> PfSizeSet {
    let bounds = Axes::from_fn(|axis| {
        let (f, s) = (filter.get(axis), stride.get(axis));
        (f / s, f.div_ceil(s))
    });
    let mut sizes = BTreeSet::new();
    for h in [bounds.h.0, bounds.h.1] {
        for w in [bounds.w.0, bounds.w.1] {
            sizes.insert(Axes::new(h, w));
        }
    }
    let uniform = filter.h.is_multiple_of(stride.h) && filter.w.is_multiple_of(stride.w);
    PfSizeSet {
        boundary_layer,
        bounds,
        sizes,
        uniform,
    }
}

/// The same chain read in the opposite direction. Numbers are unchanged;
/// only the meaning attached to them (see [`FieldLabels`]) swaps.
pub fn deconv_view(network: &NetworkSpec) -> NetworkSpec {
    NetworkSpec {
        direction: network.direction.toggled(),
        ..network.clone()
    }
}
