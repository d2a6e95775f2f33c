//! Seeded random chains for the equivalence suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arch::{Axes, Direction, LayerKind, LayerShape, NetworkSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainBounds {
    pub max_layers: usize,
    pub max_filter: u64,
    pub max_stride: u64,
}

impl Default for ChainBounds {
    fn default() -> Self {
        Self {
            max_layers: 8,
            max_filter: 11,
            max_stride: 4,
        }
    }
}

/// One chain of 1..=max_layers layers. Roughly half the layers are square;
/// the rest draw each axis independently.
pub fn random_chain<R: Rng>(rng: &mut R, bounds: &ChainBounds, name: String) -> NetworkSpec {
    let n = rng.random_range(1..=bounds.max_layers);
    let shapes: Vec<LayerShape> = (0..n)
        .map(|_| {
            let kind = if rng.random_bool(0.5) {
                LayerKind::Conv
            } else {
                LayerKind::Pool
            };
            let mut draw = |max: u64| rng.random_range(1..=max);
            let (filter, stride) = if draw(2) == 1 {
                (
                    Axes::square(draw(bounds.max_filter)),
                    Axes::square(draw(bounds.max_stride)),
                )
            } else {
                (
                    Axes::new(draw(bounds.max_filter), draw(bounds.max_filter)),
                    Axes::new(draw(bounds.max_stride), draw(bounds.max_stride)),
                )
            };
            LayerShape {
                kind,
                filter,
                stride,
                channels_out: None,
            }
        })
        .collect();
    NetworkSpec::from_shapes(name, Direction::Conv, shapes)
}

/// `trials` chains drawn from a ChaCha8 stream seeded with `seed`.
pub fn seeded_chains(seed: u64, trials: usize, bounds: &ChainBounds) -> Vec<NetworkSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|i| random_chain(&mut rng, bounds, format!("random_{seed}_{i}")))
        .collect()
}

/// Copy of `network` with every stride lowered to at most its filter, so that
/// windows cover their input without holes.
pub fn clamp_strides(network: &NetworkSpec) -> NetworkSpec {
    let mut out = network.clone();
    for layer in &mut out.layers {
        layer.stride = Axes::new(
            layer.stride.h.min(layer.filter.h),
            layer.stride.w.min(layer.filter.w),
        );
    }
    out
}
