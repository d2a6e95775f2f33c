//! Reference architectures.

use crate::arch::{LayerKind::*, NetworkSpec};

/// The 11-layer pose-machine stage with its 1x1 layers removed: three
/// conv9/pool2 pairs followed by conv5, conv9 and three conv11 layers.
pub fn case_study() -> NetworkSpec {
    NetworkSpec::square_chain(
        "case_study",
        [
            (Conv, 9, 1),
            (Pool, 2, 2),
            (Conv, 9, 1),
            (Pool, 2, 2),
            (Conv, 9, 1),
            (Pool, 2, 2),
            (Conv, 5, 1),
            (Conv, 9, 1),
            (Conv, 11, 1),
            (Conv, 11, 1),
            (Conv, 11, 1),
        ],
    )
}
