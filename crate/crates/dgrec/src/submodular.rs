//! Submodular set functions and greedy cardinality-constrained maximization.
//!
//! The default objective is a facility-location function over the complement
//! of the selected set: f(S) = sum over ground\S of the best similarity to a
//! selected element, with similarity given by a Gaussian kernel. Two coverage
//! objectives (category and per-dimension bucket coverage) are provided as
//! alternatives, plus the standard full-ground facility location which is
//! monotone and therefore carries the 1 - 1/e greedy guarantee.
//!
//! f(empty) = 0 everywhere, and the max over an empty selected set is 0.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::matrix::squared_distance;

/// Exhaustive-search guard for [`brute_force_select`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Ground sets at or below this size get a precomputed similarity matrix
/// during greedy selection; larger ones compute similarities per row.
const SIM_CACHE_LIMIT: usize = 2048;

/// Marginal gains within this distance of the step's best are treated as
/// ties and resolve toward the smaller element id. Incremental bookkeeping
/// and from-scratch re-evaluation round differently in the last ulps; without
/// a shared tie band their argmax picks could diverge on degenerate inputs.
pub const GAIN_TIE_EPS: f64 = 1e-12;

/// Gaussian kernel width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelConfig {
    pub sigma_squared: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { sigma_squared: 1.0 }
    }
}

/// Which submodular objective drives neighbor selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubmodularChoice {
    /// f(S) = sum over ground\S of max similarity to S. Not monotone.
    FacilityComplement,
    /// f(S) = sum over the whole ground set of max similarity to S. Monotone.
    FacilityFull,
    /// f(S) = number of distinct categories covered by S.
    CategoryCoverage,
    /// f(S) = number of distinct (dimension, bucket) pairs covered by S.
    BucketCoverage { bucket_count: usize },
}

impl SubmodularChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SubmodularChoice::FacilityComplement => "facility_complement",
            SubmodularChoice::FacilityFull => "facility_full",
            SubmodularChoice::CategoryCoverage => "category_coverage",
            SubmodularChoice::BucketCoverage { .. } => "bucket_coverage",
        }
    }

    pub fn from_name(name: &str, bucket_count: usize) -> Result<Self> {
        match name {
            "facility_complement" => Ok(SubmodularChoice::FacilityComplement),
            "facility_full" => Ok(SubmodularChoice::FacilityFull),
            "category_coverage" => Ok(SubmodularChoice::CategoryCoverage),
            "bucket_coverage" => {
                if bucket_count == 0 {
                    return Err(Error::InvalidArgument(
                        "bucket_coverage requires bucket_count >= 1".into(),
                    ));
                }
                Ok(SubmodularChoice::BucketCoverage { bucket_count })
            }
            other => Err(Error::InvalidArgument(format!(
                "unknown submodular function {other}"
            ))),
        }
    }
}

/// The element universe greedy selection runs over: one feature vector per
/// element, optionally one category id per element.
#[derive(Clone, Debug)]
pub struct Ground<'a> {
    features: Vec<&'a [f64]>,
    categories: Option<Vec<u32>>,
}

impl<'a> Ground<'a> {
    pub fn new(features: Vec<&'a [f64]>) -> Self {
        Ground {
            features,
            categories: None,
        }
    }

    pub fn with_categories(features: Vec<&'a [f64]>, categories: Vec<u32>) -> Self {
        assert_eq!(features.len(), categories.len());
        Ground {
            features,
            categories: Some(categories),
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature(&self, i: usize) -> &[f64] {
        self.features[i]
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, |f| f.len())
    }

    fn category(&self, i: usize) -> Result<u32> {
        self.categories
            .as_ref()
            .map(|c| c[i])
            .ok_or_else(|| Error::InvalidArgument("ground set has no categories".into()))
    }
}

/// Result of a greedy run: the picks in selection order, the cached
/// best-similarity array m(i) = max over selected of sim(i, .), and f(S).
#[derive(Clone, Debug)]
pub struct SelectionState {
    pub selected: Vec<usize>,
    pub best_sim: Vec<f64>,
    pub current_value: f64,
}

/// exp(-||a - b||^2 / sigma^2). Symmetric, in (0, 1], equal to 1 iff a == b.
/// Pairs distant enough that the exponent passes f64 range underflow to 0.
pub fn gaussian_sim(a: &[f64], b: &[f64], cfg: &KernelConfig) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    if cfg.sigma_squared.is_nan() || cfg.sigma_squared <= 0.0 {
        return Err(Error::InvalidArgument("sigma_squared must be > 0".into()));
    }
    Ok((-squared_distance(a, b) / cfg.sigma_squared).exp())
}

/// Per-dimension equal-width buckets spanning [min, max] of the fitted set.
#[derive(Clone, Debug)]
pub struct Bucketizer {
    bucket_count: usize,
    // (min, width) per dimension; width 0 marks a constant dimension that
    // collapses to the single bucket 0.
    dims: Vec<(f64, f64)>,
}

impl Bucketizer {
    pub fn bucket_count(&self) -> usize {
        self.bucket_count
    }

    pub fn dim_count(&self) -> usize {
        self.dims.len()
    }

    /// Bucket index for value `x` on `dim`: floor((x - min) / width) clamped
    /// to [0, bucket_count - 1].
    pub fn bucket(&self, dim: usize, x: f64) -> usize {
        let (min, width) = self.dims[dim];
        if width == 0.0 {
            return 0;
        }
        let b = ((x - min) / width).floor();
        (b.max(0.0) as usize).min(self.bucket_count - 1)
    }

    /// All (dimension, bucket) pairs covered by one feature vector.
    pub fn pairs_of<'v>(&'v self, v: &'v [f64]) -> impl Iterator<Item = (usize, usize)> + 'v {
        v.iter().enumerate().map(|(d, &x)| (d, self.bucket(d, x)))
    }
}

/// Fit equal-width bucket boundaries on a feature set.
pub fn bucketize(features: &[&[f64]], bucket_count: usize) -> Result<Bucketizer> {
    if bucket_count == 0 {
        return Err(Error::InvalidArgument("bucket_count must be >= 1".into()));
    }
    if features.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot bucketize an empty set".into(),
        ));
    }
    let dim = features[0].len();
    let mut dims = Vec::with_capacity(dim);
    for d in 0..dim {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for f in features {
            lo = lo.min(f[d]);
            hi = hi.max(f[d]);
        }
        let width = (hi - lo) / bucket_count as f64;
        dims.push((lo, width));
    }
    Ok(Bucketizer { bucket_count, dims })
}

fn check_subset(selected: &[usize], n: usize) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &s in selected {
        if s >= n {
            return Err(Error::OutsideGround(s, n));
        }
        mask[s] = true;
    }
    Ok(mask)
}

/// Evaluate the chosen objective on `selected` directly from its definition.
pub fn evaluate(
    choice: &SubmodularChoice,
    selected: &[usize],
    ground: &Ground,
    kernel: &KernelConfig,
) -> Result<f64> {
    let n = ground.len();
    let mask = check_subset(selected, n)?;
    if selected.is_empty() {
        return Ok(0.0);
    }
    match choice {
        SubmodularChoice::FacilityComplement | SubmodularChoice::FacilityFull => {
            let full = matches!(choice, SubmodularChoice::FacilityFull);
            let mut total = 0.0;
            for (i, &in_s) in mask.iter().enumerate() {
                if !full && in_s {
                    continue;
                }
                let mut best = 0.0f64;
                for &s in selected {
                    let sim = gaussian_sim(ground.feature(i), ground.feature(s), kernel)?;
                    best = best.max(sim);
                }
                total += best;
            }
            Ok(total)
        }
        SubmodularChoice::CategoryCoverage => {
            let mut covered = HashSet::new();
            for (i, &in_s) in mask.iter().enumerate() {
                if in_s {
                    covered.insert(ground.category(i)?);
                }
            }
            Ok(covered.len() as f64)
        }
        SubmodularChoice::BucketCoverage { bucket_count } => {
            let buckets = bucketize(&ground.features, *bucket_count)?;
            let mut covered = HashSet::new();
            for (i, &in_s) in mask.iter().enumerate() {
                if in_s {
                    covered.extend(buckets.pairs_of(ground.feature(i)));
                }
            }
            Ok(covered.len() as f64)
        }
    }
}

/// Precomputed or on-demand pairwise similarities over the ground set.
enum SimTable<'g, 'a> {
    Cached(Vec<f64>, usize),
    OnDemand(&'g Ground<'a>, KernelConfig),
}

impl<'g, 'a> SimTable<'g, 'a> {
    fn build(ground: &'g Ground<'a>, kernel: &KernelConfig) -> Result<SimTable<'g, 'a>> {
        let n = ground.len();
        if n <= SIM_CACHE_LIMIT {
            let mut sims = vec![1.0; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let s = gaussian_sim(ground.feature(i), ground.feature(j), kernel)?;
                    sims[i * n + j] = s;
                    sims[j * n + i] = s;
                }
            }
            Ok(SimTable::Cached(sims, n))
        } else {
            // Validates dimensions and sigma once up front.
            gaussian_sim(ground.feature(0), ground.feature(0), kernel)?;
            Ok(SimTable::OnDemand(ground, *kernel))
        }
    }

    fn sim(&self, i: usize, j: usize) -> f64 {
        match self {
            SimTable::Cached(sims, n) => sims[i * n + j],
            SimTable::OnDemand(ground, kernel) => {
                gaussian_sim(ground.feature(i), ground.feature(j), kernel)
                    .expect("validated at build time")
            }
        }
    }
}

/// Internal incremental state for the coverage objectives.
enum CoverState {
    Facility { complement: bool },
    Categories(HashSet<u32>),
    Buckets(Bucketizer, HashSet<(usize, usize)>),
}

/// Marginal gain of adding `v` given the cached state. For the facility
/// objectives this is O(|ground|) similarity lookups.
fn marginal_gain(
    v: usize,
    ground: &Ground,
    selected_mask: &[bool],
    best_sim: &[f64],
    sims: Option<&SimTable>,
    cover: &CoverState,
) -> Result<f64> {
    match cover {
        CoverState::Facility { complement } => {
            let sims = sims.expect("facility variants build a sim table");
            let n = ground.len();
            let mut gain = 0.0;
            for i in 0..n {
                if *complement && (selected_mask[i] || i == v) {
                    continue;
                }
                let s = sims.sim(i, v);
                if s > best_sim[i] {
                    gain += s - best_sim[i];
                }
            }
            if *complement {
                // v leaves the complement sum.
                gain -= best_sim[v];
            }
            Ok(gain)
        }
        CoverState::Categories(covered) => {
            Ok(if covered.contains(&ground.category(v)?) {
                0.0
            } else {
                1.0
            })
        }
        CoverState::Buckets(buckets, covered) => {
            let new = buckets
                .pairs_of(ground.feature(v))
                .filter(|p| !covered.contains(p))
                .count();
            Ok(new as f64)
        }
    }
}

/// Greedy maximization under a cardinality budget. Runs exactly
/// min(k, |ground|) steps, taking the max-marginal-gain element each step
/// even when the gain is negative; ties break toward the smallest element id.
pub fn greedy_select(
    ground: &Ground,
    k: usize,
    choice: &SubmodularChoice,
    kernel: &KernelConfig,
) -> Result<SelectionState> {
    if k == 0 {
        return Err(Error::InvalidArgument("budget k must be >= 1".into()));
    }
    if ground.is_empty() {
        return Err(Error::InvalidArgument("ground set is empty".into()));
    }
    let n = ground.len();
    let steps = k.min(n);

    let needs_sims = matches!(
        choice,
        SubmodularChoice::FacilityComplement | SubmodularChoice::FacilityFull
    );
    let sims = if needs_sims {
        Some(SimTable::build(ground, kernel)?)
    } else {
        None
    };
    let mut cover = match choice {
        SubmodularChoice::FacilityComplement => CoverState::Facility { complement: true },
        SubmodularChoice::FacilityFull => CoverState::Facility { complement: false },
        SubmodularChoice::CategoryCoverage => {
            ground.category(0)?; // fail fast when categories are missing
            CoverState::Categories(HashSet::new())
        }
        SubmodularChoice::BucketCoverage { bucket_count } => {
            CoverState::Buckets(bucketize(&ground.features, *bucket_count)?, HashSet::new())
        }
    };

    let mut state = SelectionState {
        selected: Vec::with_capacity(steps),
        best_sim: vec![0.0; n],
        current_value: 0.0,
    };
    let mut selected_mask = vec![false; n];

    for _ in 0..steps {
        let mut best: Option<(usize, f64)> = None;
        for v in 0..n {
            if selected_mask[v] {
                continue;
            }
            let gain = marginal_gain(
                v,
                ground,
                &selected_mask,
                &state.best_sim,
                sims.as_ref(),
                &cover,
            )?;
            match best {
                Some((_, g)) if gain <= g + GAIN_TIE_EPS => {}
                _ => best = Some((v, gain)),
            }
        }
        let (pick, gain) = best.expect("steps <= unselected count");
        selected_mask[pick] = true;
        state.selected.push(pick);
        state.current_value += gain;
        if let Some(sims) = &sims {
            for i in 0..n {
                let s = sims.sim(i, pick);
                if s > state.best_sim[i] {
                    state.best_sim[i] = s;
                }
            }
        }
        match &mut cover {
            CoverState::Facility { .. } => {}
            CoverState::Categories(covered) => {
                covered.insert(ground.category(pick)?);
            }
            CoverState::Buckets(buckets, covered) => {
                covered.extend(buckets.pairs_of(ground.feature(pick)));
            }
        }
    }
    Ok(state)
}

/// Exact maximizer over all subsets of size <= k, for oracle tests.
/// Ties go to the lexicographically smallest subset.
pub fn brute_force_select(
    ground: &Ground,
    k: usize,
    choice: &SubmodularChoice,
    kernel: &KernelConfig,
) -> Result<(Vec<usize>, f64)> {
    let n = ground.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::GroundTooLarge(n, BRUTE_FORCE_LIMIT));
    }
    let mut best_set: Vec<usize> = Vec::new();
    let mut best_value = 0.0f64;

    // Enumerate every subset of {0..n} with |S| <= k via bitmask.
    for mask in 0u32..(1u32 << n) {
        if (mask.count_ones() as usize) > k {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let value = evaluate(choice, &subset, ground, kernel)?;
        if value > best_value || (value == best_value && subset < best_set) {
            best_value = value;
            best_set = subset;
        }
    }
    Ok((best_set, best_value))
}

/// Reference implementations kept deliberately independent of the incremental
/// greedy path, for equivalence testing.
pub mod reference {
    use super::*;

    /// Greedy selection that re-evaluates f from scratch for every candidate
    /// at every step.
    pub fn greedy_select_naive(
        ground: &Ground,
        k: usize,
        choice: &SubmodularChoice,
        kernel: &KernelConfig,
    ) -> Result<Vec<usize>> {
        if k == 0 {
            return Err(Error::InvalidArgument("budget k must be >= 1".into()));
        }
        if ground.is_empty() {
            return Err(Error::InvalidArgument("ground set is empty".into()));
        }
        let n = ground.len();
        let steps = k.min(n);
        let mut selected: Vec<usize> = Vec::with_capacity(steps);
        for _ in 0..steps {
            let base = evaluate(choice, &selected, ground, kernel)?;
            let mut best: Option<(usize, f64)> = None;
            for v in 0..n {
                if selected.contains(&v) {
                    continue;
                }
                let mut trial = selected.clone();
                trial.push(v);
                let gain = evaluate(choice, &trial, ground, kernel)? - base;
                match best {
                    Some((_, g)) if gain <= g + GAIN_TIE_EPS => {}
                    _ => best = Some((v, gain)),
                }
            }
            selected.push(best.expect("steps <= unselected count").0);
        }
        Ok(selected)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn scalar_ground(values: &'static [f64]) -> Ground<'static> {
        Ground::new(values.chunks(1).collect())
    }

    #[test]
    fn gaussian_sim_point_values() {
        let unit = KernelConfig { sigma_squared: 1.0 };
        assert_eq!(gaussian_sim(&[0.3, -1.0], &[0.3, -1.0], &unit).unwrap(), 1.0);
        let s = gaussian_sim(&[0.0], &[1.0], &unit).unwrap();
        assert!((s - (-1.0f64).exp()).abs() < 1e-12);
        assert!((s - 0.367879).abs() < 1e-6);
        let wide = KernelConfig {
            sigma_squared: 100.0,
        };
        let s = gaussian_sim(&[0.0], &[1.0], &wide).unwrap();
        assert!((s - 0.990050).abs() < 1e-6);
        assert!(gaussian_sim(&[0.0], &[1.0, 2.0], &unit).is_err());
    }

    #[test]
    fn evaluate_empty_set_is_zero() {
        static VALUES: [f64; 2] = [0.0, 1.0];
        let ground = scalar_ground(&VALUES);
        let kernel = KernelConfig::default();
        for choice in [
            SubmodularChoice::FacilityComplement,
            SubmodularChoice::FacilityFull,
            SubmodularChoice::BucketCoverage { bucket_count: 2 },
        ] {
            assert_eq!(evaluate(&choice, &[], &ground, &kernel).unwrap(), 0.0);
        }
    }

    #[test]
    fn facility_complement_two_points() {
        static VALUES: [f64; 2] = [0.0, 1.0];
        let ground = scalar_ground(&VALUES);
        let kernel = KernelConfig::default();
        let choice = SubmodularChoice::FacilityComplement;
        let v = evaluate(&choice, &[0], &ground, &kernel).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-12);
        let v = evaluate(&choice, &[0, 1], &ground, &kernel).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn category_coverage_counts_distinct() {
        static VALUES: [f64; 3] = [0.0, 1.0, 2.0];
        let ground = Ground::with_categories(VALUES.chunks(1).collect(), vec![0, 1, 1]);
        let kernel = KernelConfig::default();
        let v = evaluate(
            &SubmodularChoice::CategoryCoverage,
            &[0, 1, 2],
            &ground,
            &kernel,
        )
        .unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn evaluate_rejects_out_of_range() {
        static VALUES: [f64; 2] = [0.0, 1.0];
        let ground = scalar_ground(&VALUES);
        let err = evaluate(
            &SubmodularChoice::FacilityFull,
            &[5],
            &ground,
            &KernelConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::OutsideGround(5, 2)));
    }

    #[test]
    fn greedy_worked_example() {
        // Scalars {0, 0.1, 5}: the first pick is the middle element (highest
        // total similarity to the rest); the second pick is the far element,
        // whose negative gain is the least negative.
        static VALUES: [f64; 3] = [0.0, 0.1, 5.0];
        let ground = scalar_ground(&VALUES);
        let kernel = KernelConfig::default();
        let choice = SubmodularChoice::FacilityComplement;
        let one = greedy_select(&ground, 1, &choice, &kernel).unwrap();
        assert_eq!(one.selected, vec![1]);
        let expected = (-0.01f64).exp() + (-24.01f64).exp();
        assert!((one.current_value - expected).abs() < 1e-12);
        let two = greedy_select(&ground, 2, &choice, &kernel).unwrap();
        assert_eq!(two.selected, vec![1, 2]);
        let expected = (-0.01f64).exp();
        assert!((two.current_value - expected).abs() < 1e-12);
    }

    #[test]
    fn greedy_budget_covers_ground() {
        static VALUES: [f64; 3] = [0.0, 1.0, 2.0];
        let ground = scalar_ground(&VALUES);
        let state = greedy_select(
            &ground,
            10,
            &SubmodularChoice::FacilityFull,
            &KernelConfig::default(),
        )
        .unwrap();
        let mut sorted = state.selected.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2]);
    }

    #[test]
    fn facility_complement_is_not_monotone() {
        // Adding the second element drops the value from e^-1 to 0.
        static VALUES: [f64; 2] = [0.0, 1.0];
        let ground = scalar_ground(&VALUES);
        let kernel = KernelConfig::default();
        let choice = SubmodularChoice::FacilityComplement;
        let small = evaluate(&choice, &[0], &ground, &kernel).unwrap();
        let large = evaluate(&choice, &[0, 1], &ground, &kernel).unwrap();
        assert!(large < small);
    }

    #[test]
    fn brute_force_full_budget_matches_full_set() {
        static VALUES: [f64; 4] = [0.0, 0.5, 1.5, 3.0];
        let ground = scalar_ground(&VALUES);
        let kernel = KernelConfig::default();
        let choice = SubmodularChoice::FacilityFull;
        let (set, value) = brute_force_select(&ground, 4, &choice, &kernel).unwrap();
        assert_eq!(set, vec![0, 1, 2, 3]);
        let direct = evaluate(&choice, &[0, 1, 2, 3], &ground, &kernel).unwrap();
        assert!((value - direct).abs() < 1e-12);
    }

    #[test]
    fn brute_force_guard() {
        let values: Vec<f64> = (0..25).map(|i| i as f64).collect();
        let features: Vec<&[f64]> = values.chunks(1).collect();
        let ground = Ground::new(features);
        assert!(matches!(
            brute_force_select(
                &ground,
                2,
                &SubmodularChoice::FacilityFull,
                &KernelConfig::default()
            ),
            Err(Error::GroundTooLarge(25, BRUTE_FORCE_LIMIT))
        ));
    }

    #[test]
    fn bucketize_halves() {
        static VALUES: [f64; 4] = [0.0, 1.0, 2.0, 3.0];
        let features: Vec<&[f64]> = VALUES.chunks(1).collect();
        let b = bucketize(&features, 2).unwrap();
        assert_eq!(b.bucket(0, 0.0), 0);
        assert_eq!(b.bucket(0, 1.0), 0);
        assert_eq!(b.bucket(0, 2.0), 1);
        assert_eq!(b.bucket(0, 3.0), 1);
        // Coverage of {0, 3} spans both buckets on the only dimension.
        let ground = Ground::new(features);
        let v = evaluate(
            &SubmodularChoice::BucketCoverage { bucket_count: 2 },
            &[0, 3],
            &ground,
            &KernelConfig::default(),
        )
        .unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn bucketize_single_bucket_and_constant_dim() {
        static ROWS: [[f64; 2]; 3] = [[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]];
        let features: Vec<&[f64]> = ROWS.iter().map(|r| r.as_slice()).collect();
        let one = bucketize(&features, 1).unwrap();
        for f in &features {
            let pairs: Vec<_> = one.pairs_of(f).collect();
            assert_eq!(pairs, vec![(0, 0), (1, 0)]);
        }
        // Dimension 1 is constant: everything lands in bucket 0 even with
        // more buckets requested.
        let four = bucketize(&features, 4).unwrap();
        assert_eq!(four.bucket(1, 5.0), 0);
    }

    fn random_instance(rng: &mut impl Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn incremental_matches_naive_on_random_instances() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let n = rng.random_range(2..10);
            let rows = random_instance(&mut rng, n, 3);
            let features: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            let cats: Vec<u32> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let ground = Ground::with_categories(features, cats);
            let kernel = KernelConfig {
                sigma_squared: [0.1, 1.0, 10.0][trial % 3],
            };
            let k = rng.random_range(1..5);
            for choice in [
                SubmodularChoice::FacilityComplement,
                SubmodularChoice::FacilityFull,
                SubmodularChoice::CategoryCoverage,
                SubmodularChoice::BucketCoverage { bucket_count: 3 },
            ] {
                let fast = greedy_select(&ground, k, &choice, &kernel).unwrap();
                let naive =
                    reference::greedy_select_naive(&ground, k, &choice, &kernel).unwrap();
                assert_eq!(fast.selected, naive, "variant {}", choice.name());
                // The running value must agree with direct evaluation.
                let direct = evaluate(&choice, &fast.selected, &ground, &kernel).unwrap();
                assert!(
                    (fast.current_value - direct).abs() < 1e-9,
                    "incremental value {} vs direct {}",
                    fast.current_value,
                    direct
                );
            }
        }
    }

    proptest! {
        #[test]
        fn gaussian_sim_symmetric_and_bounded(
            a in proptest::collection::vec(-5.0f64..5.0, 3),
            b in proptest::collection::vec(-5.0f64..5.0, 3),
            // Keep the exponent inside f64 range; beyond it the similarity
            // underflows to an exact 0.
            sigma in 0.5f64..50.0,
        ) {
            let cfg = KernelConfig { sigma_squared: sigma };
            let ab = gaussian_sim(&a, &b, &cfg).unwrap();
            let ba = gaussian_sim(&b, &a, &cfg).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab > 0.0 && ab <= 1.0);
        }

        #[test]
        fn diminishing_returns_monotone_variants(
            rows in proptest::collection::vec(
                proptest::collection::vec(-2.0f64..2.0, 2), 3..9),
            cats in proptest::collection::vec(0u32..3, 9),
            pick in proptest::collection::vec(0usize..100, 4),
        ) {
            let n = rows.len();
            let features: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            let ground = Ground::with_categories(features, cats[..n].to_vec());
            let kernel = KernelConfig::default();

            // Derive A subset of B and v not in B from the pick bytes.
            let b_size = 1 + pick[0] % (n - 1);
            let b: Vec<usize> = (0..b_size).map(|i| (pick[1] + i * 2) % n).collect();
            let mut b: Vec<usize> = b.into_iter().collect::<std::collections::BTreeSet<_>>()
                .into_iter().collect();
            let v = (0..n).find(|i| !b.contains(i));
            prop_assume!(v.is_some());
            let v = v.unwrap();
            let a_size = pick[2] % (b.len() + 1);
            let a: Vec<usize> = b.iter().take(a_size).copied().collect();
            b.sort_unstable();

            for choice in [
                SubmodularChoice::FacilityFull,
                SubmodularChoice::CategoryCoverage,
                SubmodularChoice::BucketCoverage { bucket_count: 2 },
            ] {
                let f = |s: &[usize]| evaluate(&choice, s, &ground, &kernel).unwrap();
                let mut av = a.clone();
                av.push(v);
                let mut bv = b.clone();
                bv.push(v);
                let gain_a = f(&av) - f(&a);
                let gain_b = f(&bv) - f(&b);
                prop_assert!(
                    gain_a >= gain_b - 1e-9,
                    "diminishing returns violated for {}: {} < {}",
                    choice.name(), gain_a, gain_b
                );
                // Monotone: adding v never decreases the value.
                prop_assert!(f(&bv) >= f(&b) - 1e-12);
            }
        }
    }
}
