//! Data ingestion, k-core filtering, splitting, and synthetic generation.
//!
//! File formats are plain UTF-8 text, one record per line:
//! interactions as `user_id<TAB>item_id[<TAB>ignored...]`, categories as
//! `item_id<TAB>category_id`. Lines starting with `#` are skipped. Any
//! timestamp or extra column is ignored; splitting is random, not temporal.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

/// Reserved category assigned to items that have no entry in the category file.
pub const UNKNOWN_CATEGORY: &str = "unknown";

/// Deduplicated list of positive user-item interactions, in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InteractionLog {
    pub records: Vec<(String, String)>,
}

impl InteractionLog {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut log = InteractionLog::default();
        let mut seen = HashSet::new();
        for (u, i) in pairs {
            let (u, i) = (u.into(), i.into());
            if seen.insert((u.clone(), i.clone())) {
                log.records.push((u, i));
            }
        }
        log
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct user and item counts.
    pub fn entity_counts(&self) -> (usize, usize) {
        let users: HashSet<&str> = self.records.iter().map(|(u, _)| u.as_str()).collect();
        let items: HashSet<&str> = self.records.iter().map(|(_, i)| i.as_str()).collect();
        (users.len(), items.len())
    }
}

/// Item -> category assignment with external string ids.
pub type CategoryAssignment = HashMap<String, String>;

/// Per-user random train/validation/test partition of a filtered log.
#[derive(Clone, Debug)]
pub struct SplitBundle {
    pub train: InteractionLog,
    pub validation: InteractionLog,
    pub test: InteractionLog,
    pub seed: u64,
    pub ratios: (f64, f64, f64),
}

/// How interactions are partitioned across train/validation/test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SplitStrategy {
    /// Partition each user's interactions independently, so every evaluated
    /// user keeps train history.
    #[default]
    PerUser,
    /// Shuffle the whole log once and cut it by the ratios. Users may end up
    /// without train interactions; evaluation skips them.
    Global,
}

/// Parameters for the synthetic long-tail generator.
#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub user_count: usize,
    pub item_count: usize,
    pub category_count: usize,
    /// Exponent of the power law governing category sizes; 0 means uniform.
    pub zipf_exponent: f64,
    /// Probability that a draw comes from the user's majority category.
    pub majority_interest_prob: f64,
    pub interactions_per_user: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    /// The desk-scale corpus used by the end-to-end tests: 5,000 users,
    /// 3,000 items, 40 categories with Zipf-1.2 sizes.
    pub fn desk_scale(seed: u64) -> Self {
        SyntheticSpec {
            user_count: 5_000,
            item_count: 3_000,
            category_count: 40,
            zipf_exponent: 1.2,
            majority_interest_prob: 0.8,
            interactions_per_user: 20,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.user_count == 0 || self.item_count == 0 || self.category_count == 0 {
            return Err(Error::InvalidArgument(
                "synthetic spec requires positive user/item/category counts".into(),
            ));
        }
        if self.category_count > self.item_count {
            return Err(Error::InvalidArgument(
                "more categories than items".into(),
            ));
        }
        if self.zipf_exponent.is_nan() || self.zipf_exponent < 0.0 {
            return Err(Error::InvalidArgument("zipf_exponent must be >= 0".into()));
        }
        let prob_ok = self.majority_interest_prob > 0.0 && self.majority_interest_prob <= 1.0;
        if !prob_ok {
            return Err(Error::InvalidArgument(
                "majority_interest_prob must be in (0, 1]".into(),
            ));
        }
        if self.interactions_per_user == 0 {
            return Err(Error::InvalidArgument(
                "interactions_per_user must be positive".into(),
            ));
        }
        if self.interactions_per_user > self.item_count {
            return Err(Error::InvalidArgument(format!(
                "interactions_per_user ({}) exceeds item_count ({})",
                self.interactions_per_user, self.item_count
            )));
        }
        Ok(())
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Parse an interactions file: `user<TAB>item[<TAB>extra ignored]`.
pub fn parse_interactions(path: &Path) -> Result<InteractionLog> {
    let text = read_to_string(path)?;
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let user = fields.next().map(str::trim).unwrap_or("");
        let item = fields.next().map(str::trim).unwrap_or("");
        if user.is_empty() || item.is_empty() {
            return Err(Error::parse(
                path.display().to_string(),
                line_no,
                "expected user_id<TAB>item_id",
            ));
        }
        pairs.push((user.to_string(), item.to_string()));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} contains no records",
            path.display()
        )));
    }
    Ok(InteractionLog::from_pairs(pairs))
}

/// Parse a categories file: `item<TAB>category`.
pub fn parse_categories(path: &Path) -> Result<CategoryAssignment> {
    let text = read_to_string(path)?;
    let mut map = CategoryAssignment::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let item = fields.next().map(str::trim).unwrap_or("");
        let category = fields.next().map(str::trim).unwrap_or("");
        if item.is_empty() || category.is_empty() {
            return Err(Error::parse(
                path.display().to_string(),
                line_no,
                "expected item_id<TAB>category_id",
            ));
        }
        map.insert(item.to_string(), category.to_string());
    }
    Ok(map)
}

/// Read interaction and category files, deduplicate, and make sure every item
/// in the log carries a category (missing ones get [`UNKNOWN_CATEGORY`]).
pub fn ingest(
    interactions_path: &Path,
    categories_path: &Path,
) -> Result<(InteractionLog, CategoryAssignment)> {
    let log = parse_interactions(interactions_path)?;
    let mut categories = parse_categories(categories_path)?;
    for (_, item) in &log.records {
        categories
            .entry(item.clone())
            .or_insert_with(|| UNKNOWN_CATEGORY.to_string());
    }
    Ok((log, categories))
}

/// Iteratively drop users and items with fewer than `k` interactions until a
/// fixed point. Each round removes all currently sub-k nodes at once, so the
/// result is the maximal k-core and independent of any ordering.
pub fn k_core_filter(log: &InteractionLog, k: usize) -> Result<InteractionLog> {
    if k == 0 {
        return Err(Error::InvalidArgument("k-core requires k >= 1".into()));
    }

    let mut user_deg: HashMap<&str, usize> = HashMap::new();
    let mut item_deg: HashMap<&str, usize> = HashMap::new();
    for (u, i) in &log.records {
        *user_deg.entry(u).or_default() += 1;
        *item_deg.entry(i).or_default() += 1;
    }

    let mut alive: Vec<bool> = vec![true; log.records.len()];
    loop {
        let dead_users: HashSet<&str> = user_deg
            .iter()
            .filter(|(_, &d)| d < k)
            .map(|(&u, _)| u)
            .collect();
        let dead_items: HashSet<&str> = item_deg
            .iter()
            .filter(|(_, &d)| d < k)
            .map(|(&i, _)| i)
            .collect();
        if dead_users.is_empty() && dead_items.is_empty() {
            break;
        }
        for (idx, (u, i)) in log.records.iter().enumerate() {
            if !alive[idx] {
                continue;
            }
            if dead_users.contains(u.as_str()) || dead_items.contains(i.as_str()) {
                alive[idx] = false;
                *user_deg.get_mut(u.as_str()).unwrap() -= 1;
                *item_deg.get_mut(i.as_str()).unwrap() -= 1;
            }
        }
        user_deg.retain(|u, _| !dead_users.contains(u));
        item_deg.retain(|i, _| !dead_items.contains(i));
    }

    let records: Vec<(String, String)> = log
        .records
        .iter()
        .zip(&alive)
        .filter(|(_, &a)| a)
        .map(|(r, _)| r.clone())
        .collect();
    if records.is_empty() {
        return Err(Error::KCoreEmpty(k));
    }
    Ok(InteractionLog { records })
}

fn validate_ratios(ratios: (f64, f64, f64)) -> Result<()> {
    let (a, b, c) = ratios;
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(Error::InvalidArgument("split ratios must be positive".into()));
    }
    if ((a + b + c) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split ratios must sum to 1 (got {})",
            a + b + c
        )));
    }
    Ok(())
}

/// Per-user random split. Each user's interactions are shuffled with a seed
/// derived from `(seed, user)` and cut by the ratios; validation and test get
/// the floors, train gets the remainder. Users with fewer than 3 interactions
/// go entirely to train.
pub fn split(log: &InteractionLog, ratios: (f64, f64, f64), seed: u64) -> Result<SplitBundle> {
    split_with(log, ratios, seed, SplitStrategy::PerUser)
}

pub fn split_with(
    log: &InteractionLog,
    ratios: (f64, f64, f64),
    seed: u64,
    strategy: SplitStrategy,
) -> Result<SplitBundle> {
    validate_ratios(ratios)?;
    if log.is_empty() {
        return Err(Error::EmptyDataset("cannot split an empty log".into()));
    }

    // 0 = train, 1 = validation, 2 = test
    let mut assignment: Vec<u8> = vec![0; log.records.len()];

    match strategy {
        SplitStrategy::PerUser => {
            let mut per_user: HashMap<&str, Vec<usize>> = HashMap::new();
            for (idx, (u, _)) in log.records.iter().enumerate() {
                per_user.entry(u).or_default().push(idx);
            }
            for (user, mut indices) in per_user {
                let n = indices.len();
                if n < 3 {
                    continue; // all train
                }
                let mut rng = seed::rng_for(seed, &format!("split:{user}"));
                indices.shuffle(&mut rng);
                let n_val = (n as f64 * ratios.1).floor() as usize;
                let n_test = (n as f64 * ratios.2).floor() as usize;
                let n_train = n - n_val - n_test;
                for &idx in &indices[n_train..n_train + n_val] {
                    assignment[idx] = 1;
                }
                for &idx in &indices[n_train + n_val..] {
                    assignment[idx] = 2;
                }
            }
        }
        SplitStrategy::Global => {
            let n = log.records.len();
            let mut indices: Vec<usize> = (0..n).collect();
            let mut rng = seed::rng_for(seed, "split:global");
            indices.shuffle(&mut rng);
            let n_val = (n as f64 * ratios.1).floor() as usize;
            let n_test = (n as f64 * ratios.2).floor() as usize;
            let n_train = n - n_val - n_test;
            for &idx in &indices[n_train..n_train + n_val] {
                assignment[idx] = 1;
            }
            for &idx in &indices[n_train + n_val..] {
                assignment[idx] = 2;
            }
        }
    }

    let mut parts = [Vec::new(), Vec::new(), Vec::new()];
    for (record, &part) in log.records.iter().zip(&assignment) {
        parts[part as usize].push(record.clone());
    }
    let [train, validation, test] = parts;
    Ok(SplitBundle {
        train: InteractionLog { records: train },
        validation: InteractionLog { records: validation },
        test: InteractionLog { records: test },
        seed,
        ratios,
    })
}

/// Apportion `total` across weights by Hamilton's largest-remainder method.
/// With non-increasing weights the resulting sizes are non-increasing too.
fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &c in order.iter().take(total - assigned) {
        sizes[c] += 1;
    }
    sizes
}

/// Generate a long-tail interaction log. Categories get Zipf-distributed
/// sizes; each user draws one majority category and fills its quota with
/// distinct items, mostly from that category.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(InteractionLog, CategoryAssignment)> {
    spec.validate()?;

    let weights: Vec<f64> = (0..spec.category_count)
        .map(|c| ((c + 1) as f64).powf(-spec.zipf_exponent))
        .collect();
    let sizes = apportion(&weights, spec.item_count);

    // Items are laid out contiguously per category: category c owns the id
    // range [starts[c], starts[c] + sizes[c]).
    let mut starts = Vec::with_capacity(spec.category_count);
    let mut next = 0usize;
    for &s in &sizes {
        starts.push(next);
        next += s;
    }

    let mut categories = CategoryAssignment::new();
    let mut category_of = vec![0usize; spec.item_count];
    for (c, (&start, &size)) in starts.iter().zip(&sizes).enumerate() {
        for (i, slot) in category_of.iter_mut().enumerate().skip(start).take(size) {
            categories.insert(format!("i{i}"), format!("c{c}"));
            *slot = c;
        }
    }

    let mut rng = seed::rng_for(spec.seed, "synthetic");
    let mut pairs = Vec::with_capacity(spec.user_count * spec.interactions_per_user);
    for u in 0..spec.user_count {
        // Majority interest is the category of a uniformly drawn item, so
        // category occurrence tracks category size and the tail categories
        // stay rare, mirroring the long-tail shape of real interaction data.
        let majority = category_of[rng.random_range(0..spec.item_count)];
        let mut n_major = 0usize;
        for _ in 0..spec.interactions_per_user {
            if rng.random_bool(spec.majority_interest_prob) {
                n_major += 1;
            }
        }
        n_major = n_major.min(sizes[majority]);

        let mut chosen: HashSet<usize> = HashSet::with_capacity(spec.interactions_per_user);
        // Partial Fisher-Yates over the majority category's id range.
        let mut pool: Vec<usize> =
            (starts[majority]..starts[majority] + sizes[majority]).collect();
        for slot in 0..n_major {
            let pick = rng.random_range(slot..pool.len());
            pool.swap(slot, pick);
            chosen.insert(pool[slot]);
        }
        // Remaining draws come uniformly from the whole catalog.
        while chosen.len() < spec.interactions_per_user {
            let item = rng.random_range(0..spec.item_count);
            chosen.insert(item);
        }
        let mut items: Vec<usize> = chosen.into_iter().collect();
        items.sort_unstable();
        for item in items {
            pairs.push((format!("u{u}"), format!("i{item}")));
        }
    }

    Ok((InteractionLog::from_pairs(pairs), categories))
}

/// Write a log in the interactions file format.
pub fn write_interactions(path: &Path, log: &InteractionLog) -> Result<()> {
    let mut out = String::with_capacity(log.len() * 16);
    for (u, i) in &log.records {
        let _ = writeln!(out, "{u}\t{i}");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Write a category assignment sorted by item id, so repeated runs produce
/// identical files.
pub fn write_categories(path: &Path, categories: &CategoryAssignment) -> Result<()> {
    let mut entries: Vec<(&str, &str)> = categories
        .iter()
        .map(|(i, c)| (i.as_str(), c.as_str()))
        .collect();
    entries.sort_unstable();
    let mut out = String::with_capacity(entries.len() * 12);
    for (item, cat) in entries {
        let _ = writeln!(out, "{item}\t{cat}");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Render the `key=value` manifest describing a split.
pub fn render_manifest(bundle: &SplitBundle, categories: &CategoryAssignment) -> String {
    let full = InteractionLog {
        records: bundle
            .train
            .records
            .iter()
            .chain(&bundle.validation.records)
            .chain(&bundle.test.records)
            .cloned()
            .collect(),
    };
    let (users, items) = full.entity_counts();
    let distinct_categories: HashSet<&str> = categories.values().map(String::as_str).collect();
    let mut out = String::new();
    let _ = writeln!(out, "seed={}", bundle.seed);
    let _ = writeln!(out, "ratio_train={}", bundle.ratios.0);
    let _ = writeln!(out, "ratio_validation={}", bundle.ratios.1);
    let _ = writeln!(out, "ratio_test={}", bundle.ratios.2);
    let _ = writeln!(out, "users={users}");
    let _ = writeln!(out, "items={items}");
    let _ = writeln!(out, "interactions={}", full.len());
    let _ = writeln!(out, "train_interactions={}", bundle.train.len());
    let _ = writeln!(out, "validation_interactions={}", bundle.validation.len());
    let _ = writeln!(out, "test_interactions={}", bundle.test.len());
    let _ = writeln!(out, "categories={}", distinct_categories.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(name: &str, content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("dgrec-dataset-{}-{name}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn ingest_dedups_exact_duplicates() {
        let inter = write_temp("dup.tsv", "u1\ti1\nu1\ti1\n");
        let cats = write_temp("dup-cats.tsv", "i1\tc1\n");
        let (log, _) = ingest(&inter, &cats).unwrap();
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn ingest_reports_malformed_line() {
        let inter = write_temp("bad.tsv", "u1\n");
        let cats = write_temp("bad-cats.tsv", "i1\tc1\n");
        let err = ingest(&inter, &cats).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn ingest_rejects_empty_interactions() {
        let inter = write_temp("empty.tsv", "# only a comment\n");
        let cats = write_temp("empty-cats.tsv", "i1\tc1\n");
        assert!(matches!(
            ingest(&inter, &cats),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn ingest_cross_product_and_unknown_category() {
        let mut body = String::new();
        for u in 0..3 {
            for i in 0..2 {
                body.push_str(&format!("u{u}\ti{i}\n"));
            }
        }
        let inter = write_temp("cross.tsv", &body);
        let cats = write_temp("cross-cats.tsv", "i0\tc0\n");
        let (log, categories) = ingest(&inter, &cats).unwrap();
        assert_eq!(log.len(), 6);
        assert_eq!(categories["i1"], UNKNOWN_CATEGORY);
    }

    #[test]
    fn k_core_chain_collapses_to_error() {
        let log = InteractionLog::from_pairs([("u1", "i1"), ("u2", "i1"), ("u2", "i2")]);
        assert!(matches!(k_core_filter(&log, 2), Err(Error::KCoreEmpty(2))));
    }

    #[test]
    fn k_core_complete_bipartite_unchanged() {
        let pairs: Vec<(String, String)> = (0..3)
            .flat_map(|u| (0..3).map(move |i| (format!("u{u}"), format!("i{i}"))))
            .collect();
        let log = InteractionLog::from_pairs(pairs);
        let filtered = k_core_filter(&log, 3).unwrap();
        assert_eq!(filtered, log);
    }

    #[test]
    fn one_core_is_identity() {
        let log = InteractionLog::from_pairs([("a", "x"), ("b", "y")]);
        assert_eq!(k_core_filter(&log, 1).unwrap(), log);
    }

    #[test]
    fn split_exact_ratio_multiple() {
        let pairs: Vec<(String, String)> =
            (0..10).map(|i| ("u".to_string(), format!("i{i}"))).collect();
        let log = InteractionLog::from_pairs(pairs);
        let bundle = split(&log, (0.6, 0.2, 0.2), 1).unwrap();
        assert_eq!(bundle.train.len(), 6);
        assert_eq!(bundle.validation.len(), 2);
        assert_eq!(bundle.test.len(), 2);
    }

    #[test]
    fn split_is_deterministic() {
        let pairs: Vec<(String, String)> = (0..7)
            .flat_map(|u| (0..9).map(move |i| (format!("u{u}"), format!("i{i}"))))
            .collect();
        let log = InteractionLog::from_pairs(pairs);
        let a = split(&log, (0.6, 0.2, 0.2), 42).unwrap();
        let b = split(&log, (0.6, 0.2, 0.2), 42).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.validation, b.validation);
        assert_eq!(a.test, b.test);
    }

    #[test]
    fn split_small_users_go_to_train() {
        let log = InteractionLog::from_pairs([("u1", "i1"), ("u1", "i2")]);
        let bundle = split(&log, (0.6, 0.2, 0.2), 3).unwrap();
        assert_eq!(bundle.train.len(), 2);
        assert!(bundle.validation.is_empty());
        assert!(bundle.test.is_empty());
    }

    #[test]
    fn synthetic_uniform_limit() {
        let spec = SyntheticSpec {
            user_count: 10,
            item_count: 100,
            category_count: 4,
            zipf_exponent: 0.0,
            majority_interest_prob: 0.5,
            interactions_per_user: 5,
            seed: 1,
        };
        let (_, categories) = generate_synthetic(&spec).unwrap();
        let mut sizes = HashMap::new();
        for cat in categories.values() {
            *sizes.entry(cat.clone()).or_insert(0usize) += 1;
        }
        for n in sizes.into_values() {
            assert!((n as i64 - 25).abs() <= 1, "category size {n} not within 25±1");
        }
    }

    #[test]
    fn synthetic_forced_concentration() {
        let spec = SyntheticSpec {
            user_count: 20,
            item_count: 80,
            category_count: 4,
            zipf_exponent: 0.0, // 20 items per category, >= interactions_per_user
            majority_interest_prob: 1.0,
            interactions_per_user: 10,
            seed: 5,
        };
        let (log, categories) = generate_synthetic(&spec).unwrap();
        let mut per_user: HashMap<&str, HashSet<&str>> = HashMap::new();
        for (u, i) in &log.records {
            per_user
                .entry(u)
                .or_default()
                .insert(categories[i].as_str());
        }
        for (user, cats) in per_user {
            assert_eq!(cats.len(), 1, "user {user} touched {} categories", cats.len());
        }
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticSpec {
            user_count: 30,
            item_count: 50,
            category_count: 5,
            zipf_exponent: 1.0,
            majority_interest_prob: 0.7,
            interactions_per_user: 8,
            seed: 7,
        };
        let (a, ca) = generate_synthetic(&spec).unwrap();
        let (b, cb) = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(ca, cb);
    }

    #[test]
    fn synthetic_rejects_oversized_quota() {
        let spec = SyntheticSpec {
            user_count: 1,
            item_count: 3,
            category_count: 1,
            zipf_exponent: 1.0,
            majority_interest_prob: 0.5,
            interactions_per_user: 4,
            seed: 0,
        };
        assert!(generate_synthetic(&spec).is_err());
    }

    #[test]
    fn synthetic_entropy_tracks_majority_prob() {
        // Per-user category entropy should be much lower when users stick to
        // their majority category than when they sample uniformly.
        fn mean_entropy(prob: f64, seed: u64) -> f64 {
            let spec = SyntheticSpec {
                user_count: 60,
                item_count: 200,
                category_count: 8,
                zipf_exponent: 0.0,
                majority_interest_prob: prob,
                interactions_per_user: 16,
                seed,
            };
            let (log, categories) = generate_synthetic(&spec).unwrap();
            let mut per_user: HashMap<&str, HashMap<&str, usize>> = HashMap::new();
            for (u, i) in &log.records {
                *per_user
                    .entry(u)
                    .or_default()
                    .entry(categories[i].as_str())
                    .or_default() += 1;
            }
            let mut total = 0.0;
            for counts in per_user.values() {
                let n: usize = counts.values().sum();
                let h: f64 = counts
                    .values()
                    .map(|&c| {
                        let p = c as f64 / n as f64;
                        -p * p.ln()
                    })
                    .sum();
                total += h;
            }
            total / per_user.len() as f64
        }
        for seed in [1, 2, 3] {
            assert!(mean_entropy(0.95, seed) < mean_entropy(1.0 / 8.0, seed));
        }
    }

    #[test]
    fn apportion_preserves_order_and_total() {
        let sizes = apportion(&[0.55, 0.45], 10);
        assert_eq!(sizes, vec![6, 4]);
        let sizes = apportion(&[1.0, 1.0, 1.0, 1.0], 100);
        assert_eq!(sizes, vec![25, 25, 25, 25]);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arbitrary_log() -> impl Strategy<Value = InteractionLog> {
            proptest::collection::vec((0u8..8, 0u8..8), 1..60).prop_map(|pairs| {
                InteractionLog::from_pairs(
                    pairs
                        .into_iter()
                        .map(|(u, i)| (format!("u{u}"), format!("i{i}"))),
                )
            })
        }

        proptest! {
            #[test]
            fn k_core_leaves_degrees_at_least_k(log in arbitrary_log(), k in 1usize..4) {
                let Ok(filtered) = k_core_filter(&log, k) else {
                    return Ok(());
                };
                let mut user_deg: HashMap<&str, usize> = HashMap::new();
                let mut item_deg: HashMap<&str, usize> = HashMap::new();
                for (u, i) in &filtered.records {
                    *user_deg.entry(u).or_default() += 1;
                    *item_deg.entry(i).or_default() += 1;
                }
                prop_assert!(user_deg.values().all(|&d| d >= k));
                prop_assert!(item_deg.values().all(|&d| d >= k));
                // Idempotence: a second pass removes nothing.
                let twice = k_core_filter(&filtered, k).unwrap();
                prop_assert_eq!(twice, filtered);
            }

            #[test]
            fn split_is_a_partition(log in arbitrary_log(), seed in 0u64..50) {
                let bundle = split(&log, (0.6, 0.2, 0.2), seed).unwrap();
                let mut all: Vec<&(String, String)> = bundle
                    .train
                    .records
                    .iter()
                    .chain(&bundle.validation.records)
                    .chain(&bundle.test.records)
                    .collect();
                prop_assert_eq!(all.len(), log.len());
                let unique: HashSet<&(String, String)> = all.iter().copied().collect();
                prop_assert_eq!(unique.len(), all.len(), "partitions overlap");
                all.sort_unstable();
                let mut original: Vec<&(String, String)> = log.records.iter().collect();
                original.sort_unstable();
                prop_assert_eq!(all, original);
                // Every evaluated user keeps train history.
                let train_users: HashSet<&str> =
                    bundle.train.records.iter().map(|(u, _)| u.as_str()).collect();
                for (u, _) in bundle.validation.records.iter().chain(&bundle.test.records) {
                    prop_assert!(train_users.contains(u.as_str()));
                }
            }
        }
    }
}
