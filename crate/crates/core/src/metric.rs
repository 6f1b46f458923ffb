//! Distance between two solution spaces.
//!
//! A solution is an action sequence that ends in a rewarded terminal state.
//! Two spaces are compared partition by partition, where partition `n`
//! holds every solution with exactly `n` actions:
//!
//! ```text
//! d_n(p, q)      = Σ_i ‖p_i − q_i‖ / (n · max_a)
//! D(A_n, B_n)    = ((|A_n| − |B_n|) + Σ nearest d_n) / max(|A|, |B|)
//! D(A, B)        = Σ_n D(A_n, B_n) / max(|A|, |B|)          (literal)
//!                = Σ_n numerator_n / max(|A|, |B|)          (single)
//! ```
//!
//! The size term is signed, so a change that only adds solutions has a
//! non-positive distance.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("solution lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("action dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("invalid action metric: {0}")]
    InvalidMetric(String),
    #[error("solution spaces use different action metrics")]
    MetricMismatch,
    #[error("both solution spaces are empty; distance is undefined")]
    EmptySolutionSpaces,
    #[error("distance {0} is not finite")]
    InvalidDistance(f64),
    #[error("invalid thresholds: easy_max {easy_max} must be finite and below medium_max {medium_max}")]
    InvalidThresholds { easy_max: f64, medium_max: f64 },
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
}

/// One action as a point in an environment-defined coordinate space.
///
/// Components are always finite, which is what makes the `Eq`/`Ord`
/// implementations below total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ActionVector<T>(Vec<T>);

impl<T: Scalar> ActionVector<T> {
    pub fn new(components: Vec<T>) -> Result<Self, MetricError> {
        if components.is_empty() {
            return Err(MetricError::InvalidAction("action has no components".into()));
        }
        if let Some(c) = components.iter().find(|c| !c.is_finite()) {
            return Err(MetricError::InvalidAction(format!("non-finite component {c:?}")));
        }
        Ok(Self(components))
    }

    pub fn components(&self) -> &[T] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for ActionVector<T> {
    type Error = MetricError;

    fn try_from(components: Vec<T>) -> Result<Self, Self::Error> {
        Self::new(components)
    }
}

impl<T> From<ActionVector<T>> for Vec<T> {
    fn from(a: ActionVector<T>) -> Self {
        a.0
    }
}

impl<T: Scalar> Eq for ActionVector<T> {}

impl<T: Scalar> PartialOrd for ActionVector<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for ActionVector<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            // finite components: partial_cmp never fails
            match a.partial_cmp(b).unwrap_or(Ordering::Equal) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Euclidean,
    Discrete,
}

/// How two actions are compared, and the largest possible distance between them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricRecord<T>", into = "MetricRecord<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ActionMetricSpec<T> {
    kind: MetricKind,
    max_a: T,
    bounds: Vec<(T, T)>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricRecord<T> {
    kind: MetricKind,
    max_a: T,
    #[serde(default = "Vec::new", skip_serializing_if = "Vec::is_empty")]
    bounds: Vec<[T; 2]>,
}

impl<T: Scalar> TryFrom<MetricRecord<T>> for ActionMetricSpec<T> {
    type Error = MetricError;

    fn try_from(rec: MetricRecord<T>) -> Result<Self, Self::Error> {
        let spec = match rec.kind {
            MetricKind::Discrete => {
                if !rec.bounds.is_empty() {
                    return Err(MetricError::InvalidMetric("discrete metric takes no bounds".into()));
                }
                Self::discrete()
            }
            MetricKind::Euclidean => {
                Self::euclidean(rec.bounds.iter().map(|b| (b[0], b[1])).collect())?
            }
        };
        if spec.max_a != rec.max_a {
            return Err(MetricError::InvalidMetric(format!(
                "max_a {:?} does not match the metric's diameter {:?}",
                rec.max_a, spec.max_a
            )));
        }
        Ok(spec)
    }
}

impl<T: Scalar> From<ActionMetricSpec<T>> for MetricRecord<T> {
    fn from(m: ActionMetricSpec<T>) -> Self {
        MetricRecord {
            kind: m.kind,
            max_a: m.max_a,
            bounds: m.bounds.iter().map(|&(lo, hi)| [lo, hi]).collect(),
        }
    }
}

impl<T: Scalar> ActionMetricSpec<T> {
    /// Euclidean distance inside a bounding box; `max_a` is the box diagonal.
    pub fn euclidean(bounds: Vec<(T, T)>) -> Result<Self, MetricError> {
        if bounds.is_empty() {
            return Err(MetricError::InvalidMetric("euclidean metric needs at least one dimension".into()));
        }
        for (d, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(MetricError::InvalidMetric(format!(
                    "dimension {d}: bounds ({lo:?}, {hi:?}) must be finite with lo < hi"
                )));
            }
        }
        let max_a = bounds
            .iter()
            .fold(T::zero(), |acc, &(lo, hi)| acc + (hi - lo) * (hi - lo))
            .sqrt();
        Ok(Self { kind: MetricKind::Euclidean, max_a, bounds })
    }

    /// 0 for identical actions, 1 otherwise.
    pub fn discrete() -> Self {
        Self { kind: MetricKind::Discrete, max_a: T::one(), bounds: Vec::new() }
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn max_a(&self) -> T {
        self.max_a
    }

    pub fn bounds(&self) -> &[(T, T)] {
        &self.bounds
    }

    /// Fixed action dimension, if the metric imposes one.
    pub fn dimension(&self) -> Option<usize> {
        match self.kind {
            MetricKind::Euclidean => Some(self.bounds.len()),
            MetricKind::Discrete => None,
        }
    }

    /// Checks that `a` lives in this metric's action space.
    pub fn check_action(&self, a: &ActionVector<T>) -> Result<(), MetricError> {
        if self.kind == MetricKind::Euclidean {
            if a.dimension() != self.bounds.len() {
                return Err(MetricError::DimensionMismatch {
                    expected: self.bounds.len(),
                    found: a.dimension(),
                });
            }
            for (c, &(lo, hi)) in a.components().iter().zip(&self.bounds) {
                if *c < lo || *c > hi {
                    return Err(MetricError::InvalidAction(format!(
                        "component {c:?} outside bounds ({lo:?}, {hi:?})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Distance between two already-checked actions of equal dimension.
    pub(crate) fn action_distance(&self, a: &ActionVector<T>, b: &ActionVector<T>) -> T {
        match self.kind {
            MetricKind::Discrete => {
                if a == b {
                    T::zero()
                } else {
                    T::one()
                }
            }
            MetricKind::Euclidean => a
                .components()
                .iter()
                .zip(b.components())
                .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
                .sqrt(),
        }
    }

    /// Normalized per-step distance between two equal-length solutions of
    /// already-checked actions.
    pub(crate) fn solution_distance_unchecked(&self, a: &Solution<T>, b: &Solution<T>) -> T {
        let sum = a
            .actions
            .iter()
            .zip(&b.actions)
            .fold(T::zero(), |acc, (x, y)| acc + self.action_distance(x, y));
        // rounding in the sum can overshoot n * max_a by an ulp
        (sum / (T::from_count(a.len()) * self.max_a)).min(T::one())
    }
}

/// An action sequence that reached a reward-1 terminal state.
///
/// Ordering is lexicographic over the flattened action components, which is
/// the canonical order inside a partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Solution<T: Scalar> {
    actions: Vec<ActionVector<T>>,
}

impl<T: Scalar> Eq for Solution<T> {}

impl<T: Scalar> PartialOrd for Solution<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Solution<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.actions.cmp(&other.actions)
    }
}

impl<T: Scalar> Solution<T> {
    pub fn new(actions: Vec<ActionVector<T>>) -> Result<Self, MetricError> {
        let first = actions
            .first()
            .ok_or_else(|| MetricError::InvalidAction("a solution needs at least one action".into()))?;
        let dim = first.dimension();
        if let Some(a) = actions.iter().find(|a| a.dimension() != dim) {
            return Err(MetricError::DimensionMismatch { expected: dim, found: a.dimension() });
        }
        Ok(Self { actions })
    }

    pub fn actions(&self) -> &[ActionVector<T>] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    /// Always false; solutions have at least one action.
    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.actions[0].dimension()
    }
}

/// `d_n`: mean per-step action distance scaled into `[0, 1]`.
pub fn solution_distance<T: Scalar>(
    a: &Solution<T>,
    b: &Solution<T>,
    metric: &ActionMetricSpec<T>,
) -> Result<T, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    if a.dimension() != b.dimension() {
        return Err(MetricError::DimensionMismatch { expected: a.dimension(), found: b.dimension() });
    }
    for action in a.actions().iter().chain(b.actions()) {
        metric.check_action(action)?;
    }
    Ok(metric.solution_distance_unchecked(a, b))
}

/// A solution set grouped by sequence length.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedSolutionSpace<T: Scalar> {
    partitions: BTreeMap<usize, Vec<Solution<T>>>,
    total_size: usize,
    metric: ActionMetricSpec<T>,
}

impl<T: Scalar> PartitionedSolutionSpace<T> {
    pub fn empty(metric: ActionMetricSpec<T>) -> Self {
        Self { partitions: BTreeMap::new(), total_size: 0, metric }
    }

    /// Solutions of length `n` in canonical order (empty when absent).
    pub fn partition(&self, n: usize) -> &[Solution<T>] {
        self.partitions.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Lengths with at least one solution, ascending.
    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.partitions.keys().copied()
    }

    pub fn partitions(&self) -> &BTreeMap<usize, Vec<Solution<T>>> {
        &self.partitions
    }

    pub fn total_size(&self) -> usize {
        self.total_size
    }

    pub fn is_empty(&self) -> bool {
        self.total_size == 0
    }

    pub fn metric(&self) -> &ActionMetricSpec<T> {
        &self.metric
    }

    /// Every solution, by ascending length then canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &Solution<T>> {
        self.partitions.values().flatten()
    }

    pub fn contains(&self, s: &Solution<T>) -> bool {
        self.partition(s.len()).binary_search(s).is_ok()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.iter().all(|s| other.contains(s))
    }
}

/// Deduplicates `solutions` and groups them by length in canonical order.
pub fn partition_space<T: Scalar>(
    solutions: impl IntoIterator<Item = Solution<T>>,
    metric: &ActionMetricSpec<T>,
) -> Result<PartitionedSolutionSpace<T>, MetricError> {
    let mut sets: BTreeMap<usize, BTreeSet<Solution<T>>> = BTreeMap::new();
    let mut dim = metric.dimension();
    for s in solutions {
        match dim {
            Some(d) if d != s.dimension() => {
                return Err(MetricError::DimensionMismatch { expected: d, found: s.dimension() })
            }
            Some(_) => {}
            None => dim = Some(s.dimension()),
        }
        for a in s.actions() {
            metric.check_action(a)?;
        }
        sets.entry(s.len()).or_default().insert(s);
    }
    let partitions: BTreeMap<_, Vec<_>> =
        sets.into_iter().map(|(n, set)| (n, set.into_iter().collect())).collect();
    let total_size = partitions.values().map(Vec::len).sum();
    Ok(PartitionedSolutionSpace { partitions, total_size, metric: metric.clone() })
}

/// Per-length contribution to a space distance.
///
/// Returns `(partition_term, matched_sum)`. Every solution of the smaller
/// partition is matched to its nearest neighbour in the larger one (first
/// minimum in canonical order wins). Equal-sized partitions match from
/// whichever partition sorts first, so `matched_sum` does not depend on
/// argument order.
pub fn partition_distance<T: Scalar>(
    a_n: &[Solution<T>],
    b_n: &[Solution<T>],
    totals: (usize, usize),
    metric: &ActionMetricSpec<T>,
) -> Result<(T, T), MetricError> {
    let m = totals.0.max(totals.1);
    if m == 0 {
        return Err(MetricError::InternalInvariantViolation(
            "partition distance needs max(|P_A|, |P_B|) >= 1".into(),
        ));
    }
    if a_n.len() > totals.0 || b_n.len() > totals.1 {
        return Err(MetricError::InternalInvariantViolation(format!(
            "partition sizes ({}, {}) exceed space totals {:?}",
            a_n.len(),
            b_n.len(),
            totals
        )));
    }
    let mut n = None;
    for s in a_n.iter().chain(b_n) {
        match n {
            None => n = Some(s.len()),
            Some(len) if len != s.len() => return Err(MetricError::LengthMismatch(len, s.len())),
            _ => {}
        }
    }

    let (source, target) = match a_n.len().cmp(&b_n.len()) {
        Ordering::Less => (a_n, b_n),
        Ordering::Greater => (b_n, a_n),
        Ordering::Equal if a_n <= b_n => (a_n, b_n),
        Ordering::Equal => (b_n, a_n),
    };
    let matched_sum = if target.is_empty() {
        T::zero()
    } else {
        source.iter().fold(T::zero(), |acc, s| {
            let nearest = target
                .iter()
                .map(|t| metric.solution_distance_unchecked(s, t))
                .fold(None, |best: Option<T>, d| match best {
                    Some(b) if b <= d => Some(b),
                    _ => Some(d),
                })
                .unwrap_or_else(T::zero);
            acc + nearest
        })
    };

    let size_term = T::from_signed(a_n.len() as i64 - b_n.len() as i64);
    Ok(((size_term + matched_sum) / T::from_count(m), matched_sum))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// Divide by `max(|P_A|, |P_B|)` per partition and again for the whole space.
    #[default]
    Literal,
    /// Sum the per-partition numerators and divide once.
    Single,
}

impl fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalizationMode::Literal => "literal",
            NormalizationMode::Single => "single",
        })
    }
}

impl std::str::FromStr for NormalizationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(Self::Literal),
            "single" => Ok(Self::Single),
            other => Err(format!("unknown normalization mode `{other}` (expected literal or single)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DifficultyClass {
    Easy,
    Medium,
    Hard,
}

impl DifficultyClass {
    pub fn letter(self) -> char {
        match self {
            DifficultyClass::Easy => 'E',
            DifficultyClass::Medium => 'M',
            DifficultyClass::Hard => 'H',
        }
    }
}

impl fmt::Display for DifficultyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Upper bounds (inclusive) of the Easy and Medium classes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifficultyThresholds<T> {
    easy_max: T,
    medium_max: T,
}

impl<T: Scalar> DifficultyThresholds<T> {
    pub fn new(easy_max: T, medium_max: T) -> Result<Self, MetricError> {
        let t = Self { easy_max, medium_max };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<(), MetricError> {
        if self.easy_max.is_finite() && self.medium_max.is_finite() && self.easy_max < self.medium_max {
            Ok(())
        } else {
            Err(MetricError::InvalidThresholds {
                easy_max: self.easy_max.to_f64_lossy(),
                medium_max: self.medium_max.to_f64_lossy(),
            })
        }
    }

    pub fn easy_max(&self) -> T {
        self.easy_max
    }

    pub fn medium_max(&self) -> T {
        self.medium_max
    }
}

impl<T: Scalar> Default for DifficultyThresholds<T> {
    fn default() -> Self {
        Self { easy_max: T::zero(), medium_max: T::lit(0.3) }
    }
}

/// Easy when `distance <= easy_max`, Medium up to and including
/// `medium_max`, Hard above.
pub fn classify_difficulty<T: Scalar>(
    distance: T,
    thresholds: &DifficultyThresholds<T>,
) -> Result<DifficultyClass, MetricError> {
    thresholds.validate()?;
    if !distance.is_finite() {
        return Err(MetricError::InvalidDistance(distance.to_f64_lossy()));
    }
    Ok(if distance <= thresholds.easy_max {
        DifficultyClass::Easy
    } else if distance <= thresholds.medium_max {
        DifficultyClass::Medium
    } else {
        DifficultyClass::Hard
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionBreakdown<T> {
    pub n: usize,
    pub size_a: usize,
    pub size_b: usize,
    pub matched_sum: T,
    pub partition_term: T,
}

impl<T: Scalar> PartitionBreakdown<T> {
    /// `(|A_n| − |B_n|) + matched_sum`, before any normalization.
    pub fn numerator(&self) -> T {
        T::from_signed(self.size_a as i64 - self.size_b as i64) + self.matched_sum
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifficultyReport<T> {
    pub distance: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<DifficultyClass>,
    pub mode: NormalizationMode,
    pub size_a: usize,
    pub size_b: usize,
    pub per_partition: Vec<PartitionBreakdown<T>>,
}

impl<T: Scalar> DifficultyReport<T> {
    /// Recomputes the distance from the per-partition breakdown.
    pub fn recompute_distance(&self) -> T {
        let m = T::from_count(self.size_a.max(self.size_b).max(1));
        match self.mode {
            NormalizationMode::Literal => {
                self.per_partition.iter().fold(T::zero(), |acc, p| acc + p.partition_term) / m
            }
            NormalizationMode::Single => {
                self.per_partition.iter().fold(T::zero(), |acc, p| acc + p.numerator()) / m
            }
        }
    }

    pub fn classify(mut self, thresholds: &DifficultyThresholds<T>) -> Result<Self, MetricError> {
        self.class = Some(classify_difficulty(self.distance, thresholds)?);
        Ok(self)
    }

    pub fn matched_total(&self) -> T {
        self.per_partition.iter().fold(T::zero(), |acc, p| acc + p.matched_sum)
    }
}

/// Distance between two solution spaces; the class is left unset.
pub fn space_distance<T: Scalar>(
    pa: &PartitionedSolutionSpace<T>,
    pb: &PartitionedSolutionSpace<T>,
    mode: NormalizationMode,
) -> Result<DifficultyReport<T>, MetricError> {
    if pa.metric != pb.metric {
        return Err(MetricError::MetricMismatch);
    }
    if pa.is_empty() && pb.is_empty() {
        return Err(MetricError::EmptySolutionSpaces);
    }
    let totals = (pa.total_size, pb.total_size);
    let lengths: BTreeSet<usize> = pa.lengths().chain(pb.lengths()).collect();

    let mut per_partition = Vec::with_capacity(lengths.len());
    for n in lengths {
        let (a_n, b_n) = (pa.partition(n), pb.partition(n));
        let (partition_term, matched_sum) = partition_distance(a_n, b_n, totals, &pa.metric)?;
        per_partition.push(PartitionBreakdown {
            n,
            size_a: a_n.len(),
            size_b: b_n.len(),
            matched_sum,
            partition_term,
        });
    }

    let mut report = DifficultyReport {
        distance: T::zero(),
        class: None,
        mode,
        size_a: totals.0,
        size_b: totals.1,
        per_partition,
    };
    report.distance = report.recompute_distance();
    Ok(report)
}
