//! Parameter storage and the forward pass: embedding lookup, light graph
//! convolution over selected neighborhoods, and layer readout.
//!
//! Propagation follows the LightGCN recipe: plain neighbor aggregation with
//! symmetric degree normalization, no feature transformation, no nonlinear
//! activation, no self-loop. Each layer's output is kept so the readout can
//! combine all receptive fields, either uniformly or with learned attention
//! weights.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, SelectedNeighborhoods};
use crate::matrix::{dot, Matrix};
use crate::seed;

/// Learnable parameters: one embedding row per node (users first, then
/// items) plus the attention score vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub embeddings: Matrix,
    pub attention: Vec<f64>,
}

impl ModelParams {
    pub fn dim(&self) -> usize {
        self.embeddings.cols()
    }

    pub fn is_finite(&self) -> bool {
        self.embeddings.is_finite() && self.attention.iter().all(|v| v.is_finite())
    }

    /// Squared L2 norm over every parameter entry.
    pub fn l2_norm_sq(&self) -> f64 {
        self.embeddings.frobenius_sq() + self.attention.iter().map(|v| v * v).sum::<f64>()
    }
}

/// Which degrees feed the symmetric normalization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DegreeNormMode {
    /// Full-graph degrees |N|, even when aggregation runs over a selected
    /// subset. Keeps message scale stable as the budget varies.
    #[default]
    Full,
    /// Selected-subset degrees |S|.
    Selected,
}

/// How per-layer embeddings are combined into the final representation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReadoutMode {
    Mean,
    #[default]
    Attention,
}

/// Forward-pass shape shared by training and evaluation.
#[derive(Clone, Copy, Debug)]
pub struct ForwardConfig {
    pub layers: usize,
    pub degree_norm: DegreeNormMode,
    pub readout: ReadoutMode,
    /// Whether the raw embedding (layer 0) participates in the readout.
    pub include_layer_zero: bool,
    /// Separate attention vectors for the user and item sides.
    pub per_side_attention: bool,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        ForwardConfig {
            layers: 2,
            degree_norm: DegreeNormMode::Full,
            readout: ReadoutMode::Attention,
            include_layer_zero: true,
            per_side_attention: false,
        }
    }
}

/// Per-layer embedding matrices E(0)..E(L).
#[derive(Clone, Debug)]
pub struct PropagatedEmbeddings {
    pub layers: Vec<Matrix>,
}

impl PropagatedEmbeddings {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }
}

/// Final embeddings plus the per-node layer weights that produced them.
#[derive(Clone, Debug)]
pub struct ReadoutResult {
    pub embeddings: Matrix,
    /// nodes x (L+1); excluded layers carry weight 0.
    pub weights: Matrix,
}

/// Draw embeddings and attention from N(0, init_scale^2), deterministically.
pub fn init_params(
    user_count: usize,
    item_count: usize,
    dim: usize,
    master_seed: u64,
    init_scale: f64,
    per_side_attention: bool,
) -> ModelParams {
    let mut rng = seed::rng_for(master_seed, "init");
    let nodes = user_count + item_count;
    let mut embeddings = Matrix::zeros(nodes, dim);
    for v in embeddings.data_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = init_scale * z;
    }
    let att_len = if per_side_attention { 2 * dim } else { dim };
    let attention: Vec<f64> = (0..att_len)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            init_scale * z
        })
        .collect();
    ModelParams {
        embeddings,
        attention,
    }
}

/// Inverse-sqrt degree tables for both sides under the configured convention.
/// Degree-0 entries become 0 so empty neighborhoods aggregate to zero.
pub(crate) fn inv_sqrt_degrees(
    graph: &BipartiteGraph,
    neighborhoods: &SelectedNeighborhoods,
    mode: DegreeNormMode,
) -> (Vec<f64>, Vec<f64>) {
    let inv = |d: usize| if d == 0 { 0.0 } else { 1.0 / (d as f64).sqrt() };
    match mode {
        DegreeNormMode::Full => (
            (0..graph.user_count() as u32)
                .map(|u| inv(graph.user_degree(u)))
                .collect(),
            (0..graph.item_count() as u32)
                .map(|i| inv(graph.item_degree(i)))
                .collect(),
        ),
        DegreeNormMode::Selected => (
            (0..graph.user_count() as u32)
                .map(|u| inv(neighborhoods.user_selected_degree(u)))
                .collect(),
            (0..graph.item_count() as u32)
                .map(|i| inv(neighborhoods.item_selected_degree(i)))
                .collect(),
        ),
    }
}

/// Run `layer_count` rounds of light graph convolution over the selected
/// neighborhoods. Layer 0 is the embedding table itself; a node whose
/// selected neighborhood is empty gets the zero vector at the next layer.
pub fn propagate(
    graph: &BipartiteGraph,
    neighborhoods: &SelectedNeighborhoods,
    params: &ModelParams,
    layer_count: usize,
    norm: DegreeNormMode,
) -> PropagatedEmbeddings {
    let user_count = graph.user_count();
    let (user_inv, item_inv) = inv_sqrt_degrees(graph, neighborhoods, norm);

    let mut layers = Vec::with_capacity(layer_count + 1);
    layers.push(params.embeddings.clone());
    for _ in 0..layer_count {
        let prev = layers.last().unwrap();
        let mut next = Matrix::zeros(prev.rows(), prev.cols());
        for u in 0..user_count as u32 {
            let cu = user_inv[u as usize];
            for &i in neighborhoods.selected_items(u) {
                let coeff = cu * item_inv[i as usize];
                next.axpy_row(u as usize, coeff, prev.row(graph.item_node(i)));
            }
        }
        for i in 0..graph.item_count() as u32 {
            let ci = item_inv[i as usize];
            for &u in neighborhoods.selected_users(i) {
                let coeff = ci * user_inv[u as usize];
                next.axpy_row(graph.item_node(i), coeff, prev.row(u as usize));
            }
        }
        layers.push(next);
    }
    PropagatedEmbeddings { layers }
}

/// Index of the first layer the readout includes.
pub(crate) fn readout_start(layer_count: usize, include_layer_zero: bool) -> usize {
    if include_layer_zero || layer_count == 1 {
        0
    } else {
        1
    }
}

/// Numerically safe softmax (max subtraction), written into `out`.
pub(crate) fn softmax_into(scores: &[f64], out: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &s) in out.iter_mut().zip(scores) {
        let e = (s - max).exp();
        *o = e;
        sum += e;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

pub(crate) fn attention_slice(
    attention: &[f64],
    dim: usize,
    per_side: bool,
    node: usize,
    user_count: usize,
) -> &[f64] {
    if per_side && node >= user_count {
        &attention[dim..2 * dim]
    } else {
        &attention[..dim]
    }
}

/// Softmax-weighted combination of layer embeddings with a learned score
/// vector. Weights per node are positive and sum to 1.
pub fn layer_attention_readout(
    propagated: &PropagatedEmbeddings,
    attention: &[f64],
    include_layer_zero: bool,
    per_side_attention: bool,
    user_count: usize,
) -> ReadoutResult {
    let layer_count = propagated.layer_count();
    let nodes = propagated.layers[0].rows();
    let dim = propagated.layers[0].cols();
    let start = readout_start(layer_count, include_layer_zero);

    let mut embeddings = Matrix::zeros(nodes, dim);
    let mut weights = Matrix::zeros(nodes, layer_count);
    let mut scores = vec![0.0; layer_count - start];
    let mut probs = vec![0.0; layer_count - start];
    for n in 0..nodes {
        let w = attention_slice(attention, dim, per_side_attention, n, user_count);
        for (slot, l) in (start..layer_count).enumerate() {
            scores[slot] = dot(w, propagated.layers[l].row(n));
        }
        softmax_into(&scores, &mut probs);
        for (slot, l) in (start..layer_count).enumerate() {
            weights.row_mut(n)[l] = probs[slot];
            embeddings.axpy_row(n, probs[slot], propagated.layers[l].row(n));
        }
    }
    ReadoutResult {
        embeddings,
        weights,
    }
}

/// Uniform average of the included layers.
pub fn mean_readout(propagated: &PropagatedEmbeddings, include_layer_zero: bool) -> Matrix {
    let layer_count = propagated.layer_count();
    let nodes = propagated.layers[0].rows();
    let dim = propagated.layers[0].cols();
    let start = readout_start(layer_count, include_layer_zero);
    let weight = 1.0 / (layer_count - start) as f64;

    let mut out = Matrix::zeros(nodes, dim);
    for l in start..layer_count {
        for n in 0..nodes {
            out.axpy_row(n, weight, propagated.layers[l].row(n));
        }
    }
    out
}

/// Preference score of a user/item pair: plain dot product.
pub fn score(user_embedding: &[f64], item_embedding: &[f64]) -> f64 {
    dot(user_embedding, item_embedding)
}

/// One full forward pass.
#[derive(Clone, Debug)]
pub struct Forward {
    pub propagated: PropagatedEmbeddings,
    pub final_embeddings: Matrix,
    /// Present only under attention readout.
    pub attention_weights: Option<Matrix>,
}

pub fn forward(
    graph: &BipartiteGraph,
    neighborhoods: &SelectedNeighborhoods,
    params: &ModelParams,
    cfg: &ForwardConfig,
) -> Forward {
    let propagated = propagate(graph, neighborhoods, params, cfg.layers, cfg.degree_norm);
    match cfg.readout {
        ReadoutMode::Mean => {
            let final_embeddings = mean_readout(&propagated, cfg.include_layer_zero);
            Forward {
                propagated,
                final_embeddings,
                attention_weights: None,
            }
        }
        ReadoutMode::Attention => {
            let readout = layer_attention_readout(
                &propagated,
                &params.attention,
                cfg.include_layer_zero,
                cfg.per_side_attention,
                graph.user_count(),
            );
            Forward {
                propagated,
                final_embeddings: readout.embeddings,
                attention_weights: Some(readout.weights),
            }
        }
    }
}

/// Saved model state. The config pairs are round-tripped verbatim so an
/// evaluation run can rebuild the exact forward pass.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub user_count: usize,
    pub item_count: usize,
    pub seed: u64,
    pub generation: u64,
    pub config_pairs: Vec<(String, String)>,
}

const CHECKPOINT_MAGIC: &str = "dgrec-checkpoint-v1";

/// Render a checkpoint as plain text. Floats use Rust's shortest round-trip
/// formatting, so load followed by save is byte-identical.
pub fn render_checkpoint(ckpt: &Checkpoint) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CHECKPOINT_MAGIC}");
    let _ = writeln!(out, "users={}", ckpt.user_count);
    let _ = writeln!(out, "items={}", ckpt.item_count);
    let _ = writeln!(out, "dim={}", ckpt.params.dim());
    let _ = writeln!(out, "seed={}", ckpt.seed);
    let _ = writeln!(out, "generation={}", ckpt.generation);
    for (k, v) in &ckpt.config_pairs {
        let _ = writeln!(out, "config.{k}={v}");
    }
    let _ = write!(out, "attention");
    for v in &ckpt.params.attention {
        let _ = write!(out, " {v}");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "embeddings");
    for r in 0..ckpt.params.embeddings.rows() {
        let row = ckpt.params.embeddings.row(r);
        for (idx, v) in row.iter().enumerate() {
            if idx > 0 {
                let _ = write!(out, " ");
            }
            let _ = write!(out, "{v}");
        }
        let _ = writeln!(out);
    }
    out
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    std::fs::write(path, render_checkpoint(ckpt))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = text.lines();
    if lines.next() != Some(CHECKPOINT_MAGIC) {
        return Err(Error::Checkpoint("missing header magic".into()));
    }

    let mut users = None;
    let mut items = None;
    let mut dim = None;
    let mut seed = None;
    let mut generation = None;
    let mut config_pairs = Vec::new();
    let mut attention = Vec::new();

    for line in lines.by_ref() {
        if let Some(rest) = line.strip_prefix("attention") {
            for tok in rest.split_whitespace() {
                attention.push(
                    tok.parse::<f64>()
                        .map_err(|e| Error::Checkpoint(format!("bad attention value: {e}")))?,
                );
            }
            break;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Checkpoint(format!("expected key=value, got {line:?}")))?;
        let parse_usize = |v: &str| {
            v.parse::<usize>()
                .map_err(|e| Error::Checkpoint(format!("bad {key}: {e}")))
        };
        match key {
            "users" => users = Some(parse_usize(value)?),
            "items" => items = Some(parse_usize(value)?),
            "dim" => dim = Some(parse_usize(value)?),
            "seed" => {
                seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|e| Error::Checkpoint(format!("bad seed: {e}")))?,
                )
            }
            "generation" => {
                generation = Some(
                    value
                        .parse::<u64>()
                        .map_err(|e| Error::Checkpoint(format!("bad generation: {e}")))?,
                )
            }
            other => {
                if let Some(cfg_key) = other.strip_prefix("config.") {
                    config_pairs.push((cfg_key.to_string(), value.to_string()));
                } else {
                    return Err(Error::Checkpoint(format!("unknown header key {other}")));
                }
            }
        }
    }

    let users = users.ok_or_else(|| Error::Checkpoint("missing users".into()))?;
    let items = items.ok_or_else(|| Error::Checkpoint("missing items".into()))?;
    let dim = dim.ok_or_else(|| Error::Checkpoint("missing dim".into()))?;
    let seed = seed.ok_or_else(|| Error::Checkpoint("missing seed".into()))?;
    let generation = generation.ok_or_else(|| Error::Checkpoint("missing generation".into()))?;

    if lines.next() != Some("embeddings") {
        return Err(Error::Checkpoint("missing embeddings section".into()));
    }
    let nodes = users + items;
    let mut embeddings = Matrix::zeros(nodes, dim);
    for r in 0..nodes {
        let line = lines
            .next()
            .ok_or_else(|| Error::Checkpoint(format!("missing embedding row {r}")))?;
        let row = embeddings.row_mut(r);
        let mut count = 0;
        for (slot, tok) in row.iter_mut().zip(line.split_whitespace()) {
            *slot = tok
                .parse::<f64>()
                .map_err(|e| Error::Checkpoint(format!("bad value in row {r}: {e}")))?;
            count += 1;
        }
        if count != dim {
            return Err(Error::Checkpoint(format!(
                "row {r} has {count} values, expected {dim}"
            )));
        }
    }

    Ok(Checkpoint {
        params: ModelParams {
            embeddings,
            attention,
        },
        user_count: users,
        item_count: items,
        seed,
        generation,
        config_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::InteractionLog;
    use crate::graph::build_graph;

    fn params_from_rows(rows: &[Vec<f64>], attention: Vec<f64>) -> ModelParams {
        ModelParams {
            embeddings: Matrix::from_rows(rows),
            attention,
        }
    }

    #[test]
    fn single_edge_swaps_embeddings() {
        let log = InteractionLog::from_pairs([("u", "i")]);
        let (graph, _) = build_graph(&log).unwrap();
        let sel = SelectedNeighborhoods::full(&graph, 0);
        let params = params_from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], vec![0.0, 0.0]);
        let prop = propagate(&graph, &sel, &params, 1, DegreeNormMode::Full);
        assert_eq!(prop.layers[1].row(0), &[3.0, 4.0]);
        assert_eq!(prop.layers[1].row(1), &[1.0, 2.0]);
    }

    #[test]
    fn two_leaf_items_scale_by_sqrt2() {
        let log = InteractionLog::from_pairs([("u", "a"), ("u", "b")]);
        let (graph, _) = build_graph(&log).unwrap();
        let sel = SelectedNeighborhoods::full(&graph, 0);
        let params = params_from_rows(
            &[vec![0.0], vec![2.0], vec![4.0]],
            vec![0.0],
        );
        let prop = propagate(&graph, &sel, &params, 1, DegreeNormMode::Full);
        let expected = (2.0 + 4.0) / 2.0_f64.sqrt();
        assert!((prop.layers[1].row(0)[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_layers_is_identity() {
        let log = InteractionLog::from_pairs([("u", "i")]);
        let (graph, _) = build_graph(&log).unwrap();
        let sel = SelectedNeighborhoods::full(&graph, 0);
        let params = params_from_rows(&[vec![1.0], vec![2.0]], vec![0.0]);
        let prop = propagate(&graph, &sel, &params, 0, DegreeNormMode::Full);
        assert_eq!(prop.layer_count(), 1);
        assert_eq!(prop.layers[0], params.embeddings);
    }

    #[test]
    fn empty_selected_neighborhood_yields_zero() {
        let log = InteractionLog::from_pairs([("u", "i")]);
        let (graph, _) = build_graph(&log).unwrap();
        let sel = SelectedNeighborhoods::from_lists(vec![vec![]], vec![vec![0]], 1, 0);
        let params = params_from_rows(&[vec![5.0], vec![7.0]], vec![0.0]);
        let prop = propagate(&graph, &sel, &params, 1, DegreeNormMode::Full);
        assert_eq!(prop.layers[1].row(0), &[0.0]);
        assert_eq!(prop.layers[1].row(1), &[5.0]);
    }

    #[test]
    fn propagate_is_linear_in_embeddings() {
        let log = InteractionLog::from_pairs([("u1", "a"), ("u1", "b"), ("u2", "a")]);
        let (graph, _) = build_graph(&log).unwrap();
        let sel = SelectedNeighborhoods::full(&graph, 0);
        let params = init_params(2, 2, 3, 9, 0.5, false);
        let mut scaled = params.clone();
        scaled.embeddings.scale(2.5);
        let base = propagate(&graph, &sel, &params, 2, DegreeNormMode::Full);
        let big = propagate(&graph, &sel, &scaled, 2, DegreeNormMode::Full);
        for l in 0..=2 {
            for (a, b) in base.layers[l].data().iter().zip(big.layers[l].data()) {
                assert!((2.5 * a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_attention_matches_mean() {
        let prop = PropagatedEmbeddings {
            layers: vec![
                Matrix::from_rows(&[vec![0.0, 1.0]]),
                Matrix::from_rows(&[vec![2.0, 3.0]]),
            ],
        };
        let readout = layer_attention_readout(&prop, &[0.0, 0.0], true, false, 1);
        let mean = mean_readout(&prop, true);
        for (a, b) in readout.embeddings.data().iter().zip(mean.data()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((readout.weights.row(0)[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_layer_readout_is_identity() {
        let prop = PropagatedEmbeddings {
            layers: vec![Matrix::from_rows(&[vec![1.5, -2.0]])],
        };
        let readout = layer_attention_readout(&prop, &[3.0, 1.0], true, false, 1);
        assert_eq!(readout.embeddings.row(0), &[1.5, -2.0]);
        assert_eq!(readout.weights.row(0), &[1.0]);
    }

    #[test]
    fn attention_worked_example() {
        // d = 1, w = 1, layers 0 and 1 hold values 0 and 1.
        let prop = PropagatedEmbeddings {
            layers: vec![
                Matrix::from_rows(&[vec![0.0]]),
                Matrix::from_rows(&[vec![1.0]]),
            ],
        };
        let readout = layer_attention_readout(&prop, &[1.0], true, false, 1);
        let w = readout.weights.row(0);
        assert!((w[0] - 0.268941).abs() < 1e-6);
        assert!((w[1] - 0.731059).abs() < 1e-6);
        assert!((readout.embeddings.row(0)[0] - 0.731059).abs() < 1e-6);
    }

    #[test]
    fn attention_weights_sum_to_one() {
        let prop = PropagatedEmbeddings {
            layers: vec![
                Matrix::from_rows(&[vec![0.3, -0.4], vec![2.0, 0.1]]),
                Matrix::from_rows(&[vec![1.0, 0.7], vec![-1.0, 0.2]]),
                Matrix::from_rows(&[vec![-0.2, 0.9], vec![0.4, -0.3]]),
            ],
        };
        let readout = layer_attention_readout(&prop, &[0.8, -1.3], true, false, 1);
        for n in 0..2 {
            let sum: f64 = readout.weights.row(n).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(readout.weights.row(n).iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let scores = [0.3, -1.2, 2.0];
        let shifted: Vec<f64> = scores.iter().map(|s| s + 123.456).collect();
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        softmax_into(&scores, &mut a);
        softmax_into(&shifted, &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_readout_cases() {
        let layer = Matrix::from_rows(&[vec![0.5, 1.5]]);
        let prop = PropagatedEmbeddings {
            layers: vec![layer.clone(), layer.clone()],
        };
        assert_eq!(mean_readout(&prop, true), layer);
        let prop = PropagatedEmbeddings {
            layers: vec![
                Matrix::from_rows(&[vec![0.0]]),
                Matrix::from_rows(&[vec![1.0]]),
            ],
        };
        assert_eq!(mean_readout(&prop, true).row(0), &[0.5]);
    }

    #[test]
    fn score_examples() {
        assert_eq!(score(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(score(&[1.0, 1.0], &[1.0, 1.0]), 2.0);
        assert_eq!(score(&[1.0, 2.0], &[3.0, -1.0]), 1.0);
    }

    #[test]
    fn init_params_behavior() {
        let zero = init_params(3, 4, 2, 1, 0.0, false);
        assert!(zero.embeddings.data().iter().all(|&v| v == 0.0));
        assert!(zero.attention.iter().all(|&v| v == 0.0));

        let a = init_params(3, 4, 2, 5, 0.1, false);
        let b = init_params(3, 4, 2, 5, 0.1, false);
        assert_eq!(a, b);
        let c = init_params(3, 4, 2, 6, 0.1, false);
        assert_ne!(a, c);

        let big = init_params(1000, 0, 100, 2, 0.1, false);
        let mean: f64 =
            big.embeddings.data().iter().sum::<f64>() / big.embeddings.data().len() as f64;
        assert!(mean.abs() < 0.005, "sample mean {mean} too far from 0");
    }

    #[test]
    fn per_side_attention_length() {
        let p = init_params(2, 2, 4, 1, 0.1, true);
        assert_eq!(p.attention.len(), 8);
        let slice_user = attention_slice(&p.attention, 4, true, 0, 2);
        let slice_item = attention_slice(&p.attention, 4, true, 2, 2);
        assert_eq!(slice_user, &p.attention[..4]);
        assert_eq!(slice_item, &p.attention[4..]);
    }

    #[test]
    fn checkpoint_round_trip() {
        let params = init_params(2, 3, 4, 77, 0.1, false);
        let ckpt = Checkpoint {
            params,
            user_count: 2,
            item_count: 3,
            seed: 77,
            generation: 5,
            config_pairs: vec![("layers".into(), "2".into())],
        };
        let dir = std::env::temp_dir().join(format!("dgrec-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.ckpt");
        save_checkpoint(&path, &ckpt).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.params, ckpt.params);
        assert_eq!(loaded.generation, 5);
        assert_eq!(loaded.config_pairs, ckpt.config_pairs);
        // Save of the loaded state is byte-identical.
        let path2 = dir.join("model2.ckpt");
        save_checkpoint(&path2, &loaded).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }
}
