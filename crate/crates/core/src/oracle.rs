//! Brute-force connectivity oracle.
//!
//! Nothing here uses the closed-form recurrences. Influence sets are built by
//! materializing which input positions each window reads, and projective-field
//! counts by sliding windows over positions and counting hits. Output position
//! `p` of a layer reads inputs `p*s ..= p*s + f - 1`, so all coordinates are
//! non-negative and the neuron under study sits at position 0.

use std::collections::BTreeSet;

use crate::arch::{Axes, Axis, NetworkSpec};
use crate::calc::{self, ensure_valid};
use crate::error::{FieldError, Result};
use crate::par::{self, Execution};

/// Upper bound on positions the oracle will materialize for a single set.
pub const DEFAULT_POSITION_LIMIT: u64 = 1 << 24;

/// Input-image positions reachable from one neuron, on one axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceSet {
    /// Layer whose neuron was traced back.
    pub source_layer: usize,
    /// Layer the positions live on; always 0 (the input image).
    pub layer: usize,
    /// Sorted, without duplicates; never empty.
    pub positions: Vec<u64>,
}

impl InfluenceSet {
    pub fn span(&self) -> u64 {
        let (first, last) = (self.positions[0], self.positions[self.positions.len() - 1]);
        last - first + 1
    }

    pub fn cardinality(&self) -> u64 {
        self.positions.len() as u64
    }

    pub fn is_contiguous(&self) -> bool {
        self.span() == self.cardinality()
    }
}

/// Traces position 0 of layer `k` back to the input image on one axis.
pub fn backward_influence(network: &NetworkSpec, k: usize, axis: Axis) -> Result<InfluenceSet> {
    backward_influence_limited(network, k, axis, DEFAULT_POSITION_LIMIT)
}

pub fn backward_influence_limited(
    network: &NetworkSpec,
    k: usize,
    axis: Axis,
    limit: u64,
) -> Result<InfluenceSet> {
    ensure_valid(network)?;
    if k > network.len() {
        return Err(FieldError::LayerOutOfRange { k, n: network.len() });
    }
    let mut positions = vec![0u64];
    for layer in network.layers[..k].iter().rev() {
        let f = layer.filter.get(axis);
        let s = layer.stride.get(axis);
        let last = *positions.last().unwrap();
        let top = last
            .checked_mul(s)
            .and_then(|v| v.checked_add(f))
            .ok_or(FieldError::Overflow { layer: layer.index })?;
        let bound = (positions.len() as u64).saturating_mul(f);
        if top.min(bound) > limit {
            return Err(FieldError::OracleLimit {
                positions: top.min(bound),
                limit,
            });
        }
        let mut next = Vec::with_capacity(top.min(bound) as usize);
        for &p in &positions {
            let start = p * s;
            next.extend(start..start + f);
        }
        next.sort_unstable();
        next.dedup();
        positions = next;
    }
    Ok(InfluenceSet {
        source_layer: k,
        layer: 0,
        positions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleErf {
    pub span: Axes<u64>,
    pub cardinality: Axes<u64>,
}

impl OracleErf {
    /// Some input positions inside the extent are never read.
    pub fn has_gaps(&self) -> bool {
        self.cardinality.h < self.span.h || self.cardinality.w < self.span.w
    }
}

pub fn erf_oracle(network: &NetworkSpec, k: usize) -> Result<OracleErf> {
    erf_oracle_limited(network, k, DEFAULT_POSITION_LIMIT)
}

pub fn erf_oracle_limited(network: &NetworkSpec, k: usize, limit: u64) -> Result<OracleErf> {
    let h = backward_influence_limited(network, k, Axis::H, limit)?;
    let w = if network.layers.iter().all(|l| l.filter.is_square() && l.stride.is_square()) {
        h.clone()
    } else {
        backward_influence_limited(network, k, Axis::W, limit)?
    };
    Ok(OracleErf {
        span: Axes::new(h.span(), w.span()),
        cardinality: Axes::new(h.cardinality(), w.cardinality()),
    })
}

/// Window-hit counts for one stride period of interior positions on one axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisCounts {
    /// First scanned position; counts[i] belongs to `start + i`.
    pub start: u64,
    pub counts: Vec<u64>,
}

impl AxisCounts {
    pub fn distinct(&self) -> BTreeSet<u64> {
        self.counts.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PfCountField {
    pub boundary_layer: Option<usize>,
    pub counts: Axes<AxisCounts>,
    /// Distinct `(h, w)` count pairs over the scanned period.
    pub sizes: BTreeSet<Axes<u64>>,
}

impl PfCountField {
    /// Count pair for every scanned 2D position.
    pub fn counts_2d(&self) -> impl Iterator<Item = ((u64, u64), Axes<u64>)> + '_ {
        let (ch, cw) = (&self.counts.h, &self.counts.w);
        ch.counts.iter().enumerate().flat_map(move |(i, &a)| {
            cw.counts
                .iter()
                .enumerate()
                .map(move |(j, &b)| ((ch.start + i as u64, cw.start + j as u64), Axes::new(a, b)))
        })
    }
}

/// Number of windows `p >= 0` with `p*s <= x <= p*s + f - 1`, by direct scan.
fn windows_covering(x: u64, f: u64, s: u64) -> u64 {
    (0..=x / s).filter(|p| x < p * s + f).count() as u64
}

fn axis_counts(f: u64, s: u64) -> AxisCounts {
    // First multiple of s at which no window is cut off by the origin.
    let start = (f - 1).div_ceil(s) * s;
    let counts = (start..start + s)
        .map(|x| windows_covering(x, f, s))
        .collect();
    AxisCounts { start, counts }
}

/// Slides a `filter` window with `stride` and counts, for each interior
/// input position, how many output neurons it feeds.
pub fn pf_counts_oracle(filter: Axes<u64>, stride: Axes<u64>) -> PfCountField {
    let counts = Axes::from_fn(|axis| axis_counts(filter.get(axis), stride.get(axis)));
    let mut sizes = BTreeSet::new();
    for &a in &counts.h.counts {
        for &b in &counts.w.counts {
            sizes.insert(Axes::new(a, b));
        }
    }
    PfCountField {
        boundary_layer: None,
        counts,
        sizes,
    }
}

/// [`pf_counts_oracle`] for the windows of layer `k + 1`.
pub fn pf_counts_at(network: &NetworkSpec, k: usize) -> Result<PfCountField> {
    ensure_valid(network)?;
    if k > network.len() {
        return Err(FieldError::LayerOutOfRange { k, n: network.len() });
    }
    let next = network
        .layer(k + 1)
        .ok_or(FieldError::NoSuccessor { k, n: network.len() })?;
    let mut field = pf_counts_oracle(next.filter, next.stride);
    field.boundary_layer = Some(k);
    Ok(field)
}

/// Counts on a finite input of `len` positions where only windows lying fully
/// inside the input exist. Shows the smaller fields at the borders.
pub fn pf_counts_bounded(filter: u64, stride: u64, len: u64) -> Vec<u64> {
    if filter > len {
        return vec![0; len as usize];
    }
    let windows = (len - filter) / stride + 1;
    let mut counts = vec![0u64; len as usize];
    for p in 0..windows {
        for x in p * stride..p * stride + filter {
            counts[x as usize] += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErfCheck {
    pub layer: usize,
    pub bottom_up: Axes<u64>,
    pub top_down: Axes<u64>,
    pub oracle: OracleErf,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PfCheck {
    pub boundary: usize,
    pub closed_form: BTreeSet<Axes<u64>>,
    pub oracle: BTreeSet<Axes<u64>>,
    /// Next layer has stride ≤ filter on both axes. Only these rows gate `pass`.
    pub covered: bool,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub name: String,
    pub erf: Vec<ErfCheck>,
    pub pf: Vec<PfCheck>,
    pub pass: bool,
}

impl EquivalenceReport {
    pub fn first_erf_mismatch(&self) -> Option<&ErfCheck> {
        self.erf.iter().find(|c| !c.matched)
    }

    pub fn first_pf_mismatch(&self) -> Option<&PfCheck> {
        self.pf.iter().find(|c| c.covered && !c.matched)
    }
}

/// Cross-checks bottom-up, top-down and the oracle on every layer and boundary.
pub fn check_equivalence(network: &NetworkSpec) -> Result<EquivalenceReport> {
    check_equivalence_limited(network, DEFAULT_POSITION_LIMIT)
}

pub fn check_equivalence_limited(network: &NetworkSpec, limit: u64) -> Result<EquivalenceReport> {
    let trace = calc::erf_bottom_up(network)?;
    let mut erf = Vec::with_capacity(network.len() + 1);
    for k in 0..=network.len() {
        let bottom_up = trace.values[k];
        let top_down = calc::rf_top_down(network, k)?.erf();
        let oracle = erf_oracle_limited(network, k, limit)?;
        let matched = bottom_up == top_down && top_down == oracle.span;
        erf.push(ErfCheck {
            layer: k,
            bottom_up,
            top_down,
            oracle,
            matched,
        });
    }

    let mut pf = Vec::with_capacity(network.len());
    for k in 0..network.len() {
        // Layer k + 1.
        let next = &network.layers[k];
        for axis in Axis::BOTH {
            let (f, s) = (next.filter.get(axis), next.stride.get(axis));
            let work = s.max(f / s + 1);
            if work > limit {
                return Err(FieldError::OracleLimit {
                    positions: work,
                    limit,
                });
            }
        }
        let closed_form = calc::pf_size_set(network, k)?.sizes;
        let oracle = pf_counts_at(network, k)?.sizes;
        let matched = closed_form == oracle;
        pf.push(PfCheck {
            boundary: k,
            closed_form,
            oracle,
            covered: next.covers_input(),
            matched,
        });
    }

    let pass = erf.iter().all(|c| c.matched) && pf.iter().all(|c| !c.covered || c.matched);
    Ok(EquivalenceReport {
        name: network.name.clone(),
        erf,
        pf,
        pass,
    })
}

/// First failing trial of a batch, with the network that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchFailure {
    pub trial: usize,
    pub network: NetworkSpec,
    pub outcome: Result<EquivalenceReport>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchOutcome {
    pub trials: usize,
    pub passed: usize,
    pub first_failure: Option<BatchFailure>,
}

impl BatchOutcome {
    pub fn pass(&self) -> bool {
        self.passed == self.trials
    }
}

/// Runs [`check_equivalence`] on every network. Trials are independent and
/// may run in parallel; the outcome does not depend on `exec`.
pub fn check_batch(networks: &[NetworkSpec], exec: Execution) -> BatchOutcome {
    let results = par::map(networks, exec, check_equivalence);
    let passed = results
        .iter()
        .filter(|r| matches!(r, Ok(rep) if rep.pass))
        .count();
    let first_failure = results
        .into_iter()
        .enumerate()
        .find(|(_, r)| !matches!(r, Ok(rep) if rep.pass))
        .map(|(trial, outcome)| BatchFailure {
            trial,
            network: networks[trial].clone(),
            outcome,
        });
    BatchOutcome {
        trials: networks.len(),
        passed,
        first_failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::LayerKind::{Conv, Pool};
    use crate::fixtures::case_study;

    fn ax(h: u64, w: u64) -> Axes<u64> {
        Axes::new(h, w)
    }

    #[test]
    fn two_conv3_influence() {
        let net = NetworkSpec::square_chain("n", [(Conv, 3, 1), (Conv, 3, 1)]);
        let set = backward_influence(&net, 2, Axis::H).unwrap();
        assert_eq!(set.positions, [0, 1, 2, 3, 4]);
        assert_eq!(set.span(), 5);
    }

    #[test]
    fn layer_zero_is_itself() {
        let set = backward_influence(&case_study(), 0, Axis::W).unwrap();
        assert_eq!(set.positions, [0]);
        assert_eq!(set.span(), 1);
    }

    #[test]
    fn case_study_spans() {
        let net = case_study();
        assert_eq!(backward_influence(&net, 11, Axis::H).unwrap().span(), 400);
        assert_eq!(erf_oracle(&net, 5).unwrap().span, Axes::square(60));
        assert!(matches!(
            backward_influence(&net, 12, Axis::H),
            Err(FieldError::LayerOutOfRange { k: 12, .. })
        ));
    }

    #[test]
    fn identity_layer() {
        let net = NetworkSpec::square_chain("n", [(Conv, 1, 1)]);
        let e = erf_oracle(&net, 1).unwrap();
        assert_eq!(e.span, Axes::square(1));
        assert_eq!(e.cardinality, Axes::square(1));
    }

    #[test]
    fn gapped_windows() {
        // Layer 2 reads layer-1 {0, 1}; each expands through f=2, s=3 to {0,1} and {3,4}.
        let net = NetworkSpec::square_chain("g", [(Conv, 2, 3), (Conv, 2, 1)]);
        let set = backward_influence(&net, 2, Axis::H).unwrap();
        assert_eq!(set.positions, [0, 1, 3, 4]);
        assert!(!set.is_contiguous());
        let e = erf_oracle(&net, 2).unwrap();
        assert_eq!(e.span, Axes::square(5));
        assert_eq!(e.cardinality, Axes::square(4));
        assert!(e.has_gaps());
        assert_eq!(calc::erf_bottom_up(&net).unwrap().network_erf(), e.span);
    }

    #[test]
    fn pf_counts_worked_example() {
        let field = pf_counts_oracle(ax(5, 5), ax(2, 2));
        let want: BTreeSet<_> = [ax(2, 2), ax(2, 3), ax(3, 2), ax(3, 3)].into_iter().collect();
        assert_eq!(field.sizes, want);
        assert_eq!(field.counts.h.counts.len(), 2);
        assert_eq!(field.counts_2d().count(), 4);
    }

    #[test]
    fn pf_counts_partitioning_and_gaps() {
        let field = pf_counts_oracle(ax(2, 2), ax(2, 2));
        assert!(field.counts.h.counts.iter().all(|&c| c == 1));
        assert_eq!(field.sizes.into_iter().collect::<Vec<_>>(), [ax(1, 1)]);

        let field = pf_counts_oracle(ax(3, 3), ax(4, 4));
        assert_eq!(field.counts.h.counts, [1, 1, 1, 0]);
        assert!(field.counts.h.distinct().contains(&0));
    }

    #[test]
    fn pf_counts_at_boundary() {
        let net = NetworkSpec::square_chain("n", [(Conv, 3, 1), (Conv, 5, 2)]);
        let field = pf_counts_at(&net, 1).unwrap();
        assert_eq!(field.boundary_layer, Some(1));
        assert_eq!(field.sizes.len(), 4);
        assert!(matches!(
            pf_counts_at(&net, 2),
            Err(FieldError::NoSuccessor { .. })
        ));
    }

    #[test]
    fn bounded_counts_shrink_at_borders() {
        assert_eq!(pf_counts_bounded(3, 1, 6), [1, 2, 3, 3, 2, 1]);
        assert_eq!(pf_counts_bounded(5, 2, 9), [1, 1, 2, 2, 3, 2, 2, 1, 1]);
        assert_eq!(pf_counts_bounded(4, 1, 3), [0, 0, 0]);
    }

    #[test]
    fn case_study_equivalence() {
        let report = check_equivalence(&case_study()).unwrap();
        assert_eq!(report.erf.len(), 12);
        assert!(report.erf.iter().all(|c| c.matched));
        assert_eq!(report.pf.len(), 11);
        assert!(report.pass);
    }

    #[test]
    fn trivial_equivalence() {
        let report = check_equivalence(&NetworkSpec::square_chain("n", [(Conv, 1, 1)])).unwrap();
        assert!(report.pass);
        assert_eq!(report.pf.len(), 1);
    }

    #[test]
    fn gapped_network_still_matches_extent() {
        let net = NetworkSpec::square_chain("g", [(Conv, 2, 3), (Conv, 2, 1), (Pool, 3, 4)]);
        let report = check_equivalence(&net).unwrap();
        assert!(report.pass);
        assert!(report.erf[2].oracle.has_gaps());
        assert!(!report.pf[0].covered);
        assert!(report.pf[1].covered);
        assert!(!report.pf[2].covered);
        assert!(report.pf.iter().all(|c| c.matched));
    }

    #[test]
    fn batch_reports_first_failure() {
        let good = case_study();
        let bad = NetworkSpec::square_chain("bad", [(Conv, 0, 1)]);
        let nets = vec![good.clone(), bad.clone(), good];
        for exec in [Execution::Sequential, Execution::Parallel] {
            let out = check_batch(&nets, exec);
            assert_eq!(out.trials, 3);
            assert_eq!(out.passed, 2);
            let fail = out.first_failure.unwrap();
            assert_eq!(fail.trial, 1);
            assert_eq!(fail.network, bad);
            assert!(fail.outcome.is_err());
        }
    }

    #[test]
    fn limit_is_enforced() {
        let net = NetworkSpec::square_chain("big", [(Conv, 1000, 1), (Conv, 1000, 1)]);
        assert!(matches!(
            erf_oracle_limited(&net, 2, 100),
            Err(FieldError::OracleLimit { limit: 100, .. })
        ));
    }
}
