//! Training: negative sampling, class-balanced BPR loss with exact gradients
//! through readout and propagation, Adam updates, periodic neighborhood
//! refresh, and early stopping.
//!
//! Neighbor selection is treated as fixed between refreshes: gradients flow
//! through the aggregation coefficients of the currently selected edges and
//! nowhere else. All gradient accumulation runs in a fixed order so training
//! is bit-reproducible for a given (data, config, seed).

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluation::{self, Scorer};
use crate::graph::{BipartiteGraph, CategoryMap, SelectedNeighborhoods};
use crate::matrix::{dot, Matrix};
use crate::model::{
    attention_slice, forward, init_params, inv_sqrt_degrees, readout_start, DegreeNormMode,
    Forward, ForwardConfig, ModelParams, ReadoutMode,
};
use crate::seed;
use crate::submodular::{self, Ground, KernelConfig, SubmodularChoice};

/// Submodular objective selector without the bucket payload, so config files
/// can set the variant and the bucket count independently.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SubmodularVariant {
    #[default]
    FacilityComplement,
    FacilityFull,
    CategoryCoverage,
    BucketCoverage,
}

impl SubmodularVariant {
    pub fn name(&self) -> &'static str {
        match self {
            SubmodularVariant::FacilityComplement => "facility_complement",
            SubmodularVariant::FacilityFull => "facility_full",
            SubmodularVariant::CategoryCoverage => "category_coverage",
            SubmodularVariant::BucketCoverage => "bucket_coverage",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "facility_complement" => Ok(SubmodularVariant::FacilityComplement),
            "facility_full" => Ok(SubmodularVariant::FacilityFull),
            "category_coverage" => Ok(SubmodularVariant::CategoryCoverage),
            "bucket_coverage" => Ok(SubmodularVariant::BucketCoverage),
            other => Err(Error::InvalidArgument(format!(
                "unknown submodular function {other}"
            ))),
        }
    }
}

/// Which embeddings feed neighborhood selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SelectionSource {
    /// The raw embedding table (layer 0).
    #[default]
    Layer0,
    /// The readout of a forward pass over the previous neighborhoods.
    Readout,
}

/// Everything that shapes a training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub embedding_dim: usize,
    pub layers: usize,
    pub neighbor_budget: usize,
    pub sigma_squared: f64,
    pub beta: f64,
    pub lambda: f64,
    pub learning_rate: f64,
    pub negatives_per_positive: usize,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub refresh_period_epochs: usize,
    pub seed: u64,
    pub use_selection: bool,
    pub use_attention: bool,
    pub use_reweight: bool,
    pub submodular: SubmodularVariant,
    pub bucket_count: usize,
    pub degree_norm: DegreeNormMode,
    pub selection_source: SelectionSource,
    pub include_layer_zero: bool,
    pub per_side_attention: bool,
    pub init_scale: f64,
    pub val_cutoff: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            embedding_dim: 32,
            layers: 2,
            neighbor_budget: 12,
            sigma_squared: 1.0,
            beta: 0.9,
            lambda: 1e-6,
            learning_rate: 0.05,
            negatives_per_positive: 4,
            batch_size: 1024,
            max_epochs: 60,
            patience: 10,
            refresh_period_epochs: 1,
            seed: 42,
            use_selection: true,
            use_attention: true,
            use_reweight: true,
            submodular: SubmodularVariant::FacilityComplement,
            bucket_count: 4,
            degree_norm: DegreeNormMode::Full,
            selection_source: SelectionSource::Layer0,
            include_layer_zero: true,
            per_side_attention: false,
            init_scale: 0.1,
            val_cutoff: 300,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 {
            return Err(Error::InvalidArgument("embedding_dim must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::InvalidArgument("beta must be in [0, 1)".into()));
        }
        if self.sigma_squared.is_nan() || self.sigma_squared <= 0.0 {
            return Err(Error::InvalidArgument("sigma_squared must be > 0".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument("learning_rate must be > 0".into()));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(Error::InvalidArgument("lambda must be >= 0".into()));
        }
        if self.neighbor_budget == 0
            || self.negatives_per_positive == 0
            || self.batch_size == 0
            || self.refresh_period_epochs == 0
            || self.bucket_count == 0
            || self.val_cutoff == 0
        {
            return Err(Error::InvalidArgument(
                "budgets, counts, and periods must be positive".into(),
            ));
        }
        if self.init_scale.is_nan() || self.init_scale < 0.0 {
            return Err(Error::InvalidArgument("init_scale must be >= 0".into()));
        }
        Ok(())
    }

    pub fn forward_config(&self) -> ForwardConfig {
        ForwardConfig {
            layers: self.layers,
            degree_norm: self.degree_norm,
            readout: if self.use_attention {
                ReadoutMode::Attention
            } else {
                ReadoutMode::Mean
            },
            include_layer_zero: self.include_layer_zero,
            per_side_attention: self.per_side_attention,
        }
    }

    pub fn submodular_choice(&self) -> SubmodularChoice {
        match self.submodular {
            SubmodularVariant::FacilityComplement => SubmodularChoice::FacilityComplement,
            SubmodularVariant::FacilityFull => SubmodularChoice::FacilityFull,
            SubmodularVariant::CategoryCoverage => SubmodularChoice::CategoryCoverage,
            SubmodularVariant::BucketCoverage => SubmodularChoice::BucketCoverage {
                bucket_count: self.bucket_count,
            },
        }
    }

    pub fn kernel(&self) -> KernelConfig {
        KernelConfig {
            sigma_squared: self.sigma_squared,
        }
    }

    /// Serialize as ordered key=value pairs, the shared currency of config
    /// files and checkpoint headers.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let b = |v: bool| v.to_string();
        vec![
            ("embedding_dim".into(), self.embedding_dim.to_string()),
            ("layers".into(), self.layers.to_string()),
            ("neighbor_budget".into(), self.neighbor_budget.to_string()),
            ("sigma_squared".into(), self.sigma_squared.to_string()),
            ("beta".into(), self.beta.to_string()),
            ("lambda".into(), self.lambda.to_string()),
            ("learning_rate".into(), self.learning_rate.to_string()),
            (
                "negatives_per_positive".into(),
                self.negatives_per_positive.to_string(),
            ),
            ("batch_size".into(), self.batch_size.to_string()),
            ("max_epochs".into(), self.max_epochs.to_string()),
            ("patience".into(), self.patience.to_string()),
            (
                "refresh_period_epochs".into(),
                self.refresh_period_epochs.to_string(),
            ),
            ("seed".into(), self.seed.to_string()),
            ("use_selection".into(), b(self.use_selection)),
            ("use_attention".into(), b(self.use_attention)),
            ("use_reweight".into(), b(self.use_reweight)),
            ("submodular".into(), self.submodular.name().into()),
            ("bucket_count".into(), self.bucket_count.to_string()),
            (
                "degree_norm".into(),
                match self.degree_norm {
                    DegreeNormMode::Full => "full".into(),
                    DegreeNormMode::Selected => "selected".into(),
                },
            ),
            (
                "selection_source".into(),
                match self.selection_source {
                    SelectionSource::Layer0 => "layer0".into(),
                    SelectionSource::Readout => "readout".into(),
                },
            ),
            (
                "include_layer_zero".into(),
                b(self.include_layer_zero),
            ),
            ("per_side_attention".into(), b(self.per_side_attention)),
            ("init_scale".into(), self.init_scale.to_string()),
            ("val_cutoff".into(), self.val_cutoff.to_string()),
        ]
    }

    /// Apply one key=value pair; unknown keys are rejected.
    pub fn apply_pair(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse::<T>()
                .map_err(|e| Error::InvalidArgument(format!("bad value for {key}: {e}")))
        }
        match key {
            "embedding_dim" => self.embedding_dim = num(key, value)?,
            "layers" => self.layers = num(key, value)?,
            "neighbor_budget" => self.neighbor_budget = num(key, value)?,
            "sigma_squared" => self.sigma_squared = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "lambda" => self.lambda = num(key, value)?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "negatives_per_positive" => self.negatives_per_positive = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "max_epochs" => self.max_epochs = num(key, value)?,
            "patience" => self.patience = num(key, value)?,
            "refresh_period_epochs" => self.refresh_period_epochs = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "use_selection" => self.use_selection = num(key, value)?,
            "use_attention" => self.use_attention = num(key, value)?,
            "use_reweight" => self.use_reweight = num(key, value)?,
            "submodular" => self.submodular = SubmodularVariant::from_name(value)?,
            "bucket_count" => self.bucket_count = num(key, value)?,
            "degree_norm" => {
                self.degree_norm = match value {
                    "full" => DegreeNormMode::Full,
                    "selected" => DegreeNormMode::Selected,
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "degree_norm must be full or selected, got {other}"
                        )))
                    }
                }
            }
            "selection_source" => {
                self.selection_source = match value {
                    "layer0" => SelectionSource::Layer0,
                    "readout" => SelectionSource::Readout,
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "selection_source must be layer0 or readout, got {other}"
                        )))
                    }
                }
            }
            "include_layer_zero" => self.include_layer_zero = num(key, value)?,
            "per_side_attention" => self.per_side_attention = num(key, value)?,
            "init_scale" => self.init_scale = num(key, value)?,
            "val_cutoff" => self.val_cutoff = num(key, value)?,
            other => {
                return Err(Error::InvalidArgument(format!("unknown config key {other}")))
            }
        }
        Ok(())
    }

    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for (k, v) in pairs {
            cfg.apply_pair(k, v)?;
        }
        Ok(cfg)
    }

    /// Full model: submodular selection, layer attention, loss reweighting.
    pub fn dgrec_preset() -> Self {
        TrainConfig::default()
    }

    /// Mean readout over full neighborhoods, unweighted loss.
    pub fn lightgcn_preset() -> Self {
        TrainConfig {
            use_selection: false,
            use_attention: false,
            use_reweight: false,
            beta: 0.0,
            ..TrainConfig::default()
        }
    }

    /// Plain matrix factorization with BPR: no propagation at all.
    pub fn mf_bpr_preset() -> Self {
        TrainConfig {
            layers: 0,
            use_selection: false,
            use_attention: false,
            use_reweight: false,
            beta: 0.0,
            ..TrainConfig::default()
        }
    }
}

/// Class-balanced weight (1 - beta) / (1 - beta^n) for a category of size n.
/// beta = 0 is exactly 1.
pub fn class_balanced_weight(beta: f64, category_size: usize) -> Result<f64> {
    if category_size == 0 {
        return Err(Error::InvalidArgument(
            "category_size must be >= 1".into(),
        ));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidArgument("beta must be in [0, 1)".into()));
    }
    if beta == 0.0 {
        return Ok(1.0);
    }
    Ok((1.0 - beta) / (1.0 - beta.powi(category_size as i32)))
}

/// Numerically stable softplus: ln(1 + e^x).
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Numerically stable logistic function.
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// BPR ranking loss -ln sigma(pos - neg), computed as softplus(neg - pos).
pub fn bpr_loss(pos_score: f64, neg_score: f64) -> f64 {
    softplus(neg_score - pos_score)
}

/// Draw `n` items the user has not interacted with in train, uniformly, with
/// rejection on collisions. Draws are independent, so duplicates can occur.
pub fn sample_negatives(
    user: u32,
    n: usize,
    graph: &BipartiteGraph,
    rng: &mut impl Rng,
) -> Result<Vec<u32>> {
    let item_count = graph.item_count();
    if graph.user_degree(user) >= item_count {
        return Err(Error::NoNegativeCandidates(user));
    }
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let candidate = rng.random_range(0..item_count) as u32;
        if !graph.has_edge(user, candidate) {
            out.push(candidate);
        }
    }
    Ok(out)
}

/// One positive interaction with its sampled negatives.
#[derive(Clone, Debug)]
pub struct BatchSample {
    pub user: u32,
    pub pos_item: u32,
    pub neg_items: Vec<u32>,
}

/// Gradients with the same shape as [`ModelParams`].
#[derive(Clone, Debug)]
pub struct Grads {
    pub embeddings: Matrix,
    pub attention: Vec<f64>,
}

impl Grads {
    fn zeros_like(params: &ModelParams) -> Self {
        Grads {
            embeddings: Matrix::zeros(params.embeddings.rows(), params.embeddings.cols()),
            attention: vec![0.0; params.attention.len()],
        }
    }
}

/// Mean class-balanced BPR over the batch plus global L2, with exact
/// reverse-mode gradients for every parameter. The forward pass must have
/// been computed for `params` over `neighborhoods`.
#[allow(clippy::too_many_arguments)]
pub fn batch_loss(
    samples: &[BatchSample],
    graph: &BipartiteGraph,
    categories: &CategoryMap,
    neighborhoods: &SelectedNeighborhoods,
    params: &ModelParams,
    fwd: &Forward,
    cfg: &TrainConfig,
) -> Result<(f64, Grads)> {
    let nodes = graph.node_count();
    let dim = params.dim();
    let final_emb = &fwd.final_embeddings;

    // Loss over scores and the gradient w.r.t. the final embeddings.
    let mut data_loss = 0.0;
    let mut g_final = Matrix::zeros(nodes, dim);
    let mut touched: Vec<usize> = Vec::with_capacity(samples.len() * 3);
    let batch_scale = if samples.is_empty() {
        0.0
    } else {
        1.0 / samples.len() as f64
    };
    for sample in samples {
        let weight = if cfg.use_reweight {
            class_balanced_weight(cfg.beta, categories.category_size_of(sample.pos_item))?
        } else {
            1.0
        };
        let u_node = graph.user_node(sample.user);
        let p_node = graph.item_node(sample.pos_item);
        let per_pair = weight * batch_scale / sample.neg_items.len() as f64;
        let pos_score = dot(final_emb.row(u_node), final_emb.row(p_node));
        touched.push(u_node);
        touched.push(p_node);
        for &neg in &sample.neg_items {
            let n_node = graph.item_node(neg);
            touched.push(n_node);
            let neg_score = dot(final_emb.row(u_node), final_emb.row(n_node));
            let margin = neg_score - pos_score;
            data_loss += per_pair * softplus(margin);
            let coef = per_pair * sigmoid(margin);
            // d margin / d f_u = f_neg - f_pos, d/d f_pos = -f_u, d/d f_neg = f_u
            for c in 0..dim {
                let fu = final_emb.row(u_node)[c];
                let fp = final_emb.row(p_node)[c];
                let fn_ = final_emb.row(n_node)[c];
                g_final.row_mut(u_node)[c] += coef * (fn_ - fp);
                g_final.row_mut(p_node)[c] -= coef * fu;
                g_final.row_mut(n_node)[c] += coef * fu;
            }
        }
    }
    touched.sort_unstable();
    touched.dedup();

    let loss = data_loss + cfg.lambda * params.l2_norm_sq();

    // Backward through the readout: per-layer gradients R[l].
    let layer_count = fwd.propagated.layer_count();
    let start = readout_start(layer_count, cfg.include_layer_zero);
    let mut grads = Grads::zeros_like(params);
    let mut layer_grads: Vec<Matrix> = (0..layer_count)
        .map(|_| Matrix::zeros(nodes, dim))
        .collect();

    match &fwd.attention_weights {
        None => {
            // Mean readout: each included layer gets an equal share.
            let share = 1.0 / (layer_count - start) as f64;
            for &n in &touched {
                let g = g_final.row(n);
                for lg in layer_grads.iter_mut().skip(start) {
                    lg.axpy_row(n, share, g);
                }
            }
        }
        Some(weights) => {
            let user_count = graph.user_count();
            for &n in &touched {
                let g = g_final.row(n);
                let w_att =
                    attention_slice(&params.attention, dim, cfg.per_side_attention, n, user_count);
                let a = weights.row(n);
                // q_l = <g, x_l>; softmax Jacobian gives r_l = a_l (q_l - sum a q).
                let mut q = vec![0.0; layer_count];
                let mut aq_sum = 0.0;
                for l in start..layer_count {
                    q[l] = dot(g, fwd.propagated.layers[l].row(n));
                    aq_sum += a[l] * q[l];
                }
                let att_offset = if cfg.per_side_attention && n >= user_count {
                    dim
                } else {
                    0
                };
                for l in start..layer_count {
                    let r = a[l] * (q[l] - aq_sum);
                    let x = fwd.propagated.layers[l].row(n);
                    let row = layer_grads[l].row_mut(n);
                    for c in 0..dim {
                        row[c] += a[l] * g[c] + r * w_att[c];
                        grads.attention[att_offset + c] += r * x[c];
                    }
                }
            }
        }
    }

    // Backward through propagation: accumulate top-down, scattering each
    // layer's gradient to the previous layer along the selected edges.
    let (user_inv, item_inv) = inv_sqrt_degrees(graph, neighborhoods, cfg.degree_norm);
    for l in (1..layer_count).rev() {
        let (lower, upper) = layer_grads.split_at_mut(l);
        let g_up = &upper[0];
        let g_down = &mut lower[l - 1];
        for u in 0..graph.user_count() as u32 {
            let cu = user_inv[u as usize];
            let src = g_up.row(graph.user_node(u));
            for &i in neighborhoods.selected_items(u) {
                let coeff = cu * item_inv[i as usize];
                g_down.axpy_row(graph.item_node(i), coeff, src);
            }
        }
        for i in 0..graph.item_count() as u32 {
            let ci = item_inv[i as usize];
            let src = g_up.row(graph.item_node(i));
            for &u in neighborhoods.selected_users(i) {
                let coeff = ci * user_inv[u as usize];
                g_down.axpy_row(graph.user_node(u), coeff, src);
            }
        }
    }
    grads.embeddings = layer_grads.swap_remove(0);

    // Global L2 touches every parameter.
    let two_lambda = 2.0 * cfg.lambda;
    for (g, p) in grads
        .embeddings
        .data_mut()
        .iter_mut()
        .zip(params.embeddings.data())
    {
        *g += two_lambda * p;
    }
    for (g, p) in grads.attention.iter_mut().zip(&params.attention) {
        *g += two_lambda * p;
    }

    Ok((loss, grads))
}

/// Adam optimizer state (standard defaults, bias correction included).
#[derive(Clone, Debug)]
pub struct AdamState {
    m_emb: Matrix,
    v_emb: Matrix,
    m_att: Vec<f64>,
    v_att: Vec<f64>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        AdamState {
            m_emb: Matrix::zeros(params.embeddings.rows(), params.embeddings.cols()),
            v_emb: Matrix::zeros(params.embeddings.rows(), params.embeddings.cols()),
            m_att: vec![0.0; params.attention.len()],
            v_att: vec![0.0; params.attention.len()],
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update over all parameters.
pub fn adam_step(state: &mut AdamState, params: &mut ModelParams, grads: &Grads, lr: f64) {
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
    };
    for ((p, &g), (m, v)) in params
        .embeddings
        .data_mut()
        .iter_mut()
        .zip(grads.embeddings.data())
        .zip(
            state
                .m_emb
                .data_mut()
                .iter_mut()
                .zip(state.v_emb.data_mut()),
        )
    {
        update(p, g, m, v);
    }
    for ((p, &g), (m, v)) in params
        .attention
        .iter_mut()
        .zip(&grads.attention)
        .zip(state.m_att.iter_mut().zip(state.v_att.iter_mut()))
    {
        update(p, g, m, v);
    }
}

/// The embedding matrix neighbor selection reads from.
fn selection_embeddings(
    graph: &BipartiteGraph,
    params: &ModelParams,
    previous: &SelectedNeighborhoods,
    cfg: &TrainConfig,
) -> Matrix {
    match cfg.selection_source {
        SelectionSource::Layer0 => params.embeddings.clone(),
        SelectionSource::Readout => {
            forward(graph, previous, params, &cfg.forward_config()).final_embeddings
        }
    }
}

/// Re-run greedy selection for every node over the current embeddings.
/// With selection disabled this returns the full neighborhoods. Category
/// coverage cannot rank user neighbors (users carry no category), so item
/// nodes fall back to their full neighborhood under that variant.
pub fn refresh_neighborhoods(
    graph: &BipartiteGraph,
    categories: &CategoryMap,
    params: &ModelParams,
    previous: &SelectedNeighborhoods,
    cfg: &TrainConfig,
) -> Result<SelectedNeighborhoods> {
    let generation = previous.generation + 1;
    if !cfg.use_selection {
        return Ok(SelectedNeighborhoods::full(graph, generation));
    }
    let source = selection_embeddings(graph, params, previous, cfg);
    let choice = cfg.submodular_choice();
    let kernel = cfg.kernel();
    let k = cfg.neighbor_budget;

    let user_lists: Vec<Vec<u32>> = (0..graph.user_count() as u32)
        .into_par_iter()
        .map(|u| {
            let neighbors = graph.items_of(u);
            if neighbors.len() <= k {
                return Ok(neighbors.to_vec());
            }
            let features: Vec<&[f64]> = neighbors
                .iter()
                .map(|&i| source.row(graph.item_node(i)))
                .collect();
            let cats: Vec<u32> = neighbors.iter().map(|&i| categories.category_of(i)).collect();
            let ground = Ground::with_categories(features, cats);
            let state = submodular::greedy_select(&ground, k, &choice, &kernel)?;
            Ok(state.selected.iter().map(|&idx| neighbors[idx]).collect())
        })
        .collect::<Result<_>>()?;

    let item_lists: Vec<Vec<u32>> = (0..graph.item_count() as u32)
        .into_par_iter()
        .map(|i| {
            let neighbors = graph.users_of(i);
            if neighbors.len() <= k || choice == SubmodularChoice::CategoryCoverage {
                return Ok(neighbors.to_vec());
            }
            let features: Vec<&[f64]> = neighbors
                .iter()
                .map(|&u| source.row(graph.user_node(u)))
                .collect();
            let ground = Ground::new(features);
            let state = submodular::greedy_select(&ground, k, &choice, &kernel)?;
            Ok(state.selected.iter().map(|&idx| neighbors[idx]).collect())
        })
        .collect::<Result<_>>()?;

    Ok(SelectedNeighborhoods::from_lists(
        user_lists, item_lists, k, generation,
    ))
}

/// Strict-improvement early stopping.
struct EarlyStopper {
    best: f64,
    bad_epochs: usize,
    patience: usize,
}

enum StopDecision {
    Improved,
    Continue,
    Stop,
}

impl EarlyStopper {
    fn new(patience: usize) -> Self {
        EarlyStopper {
            best: f64::NEG_INFINITY,
            bad_epochs: 0,
            patience,
        }
    }

    fn update(&mut self, metric: f64) -> StopDecision {
        if metric > self.best {
            self.best = metric;
            self.bad_epochs = 0;
            StopDecision::Improved
        } else {
            self.bad_epochs += 1;
            if self.patience > 0 && self.bad_epochs >= self.patience {
                StopDecision::Stop
            } else {
                StopDecision::Continue
            }
        }
    }
}

/// One row of the training log.
#[derive(Clone, Debug)]
pub struct LogEntry {
    pub epoch: usize,
    pub loss: f64,
    pub val_recall: f64,
    pub val_coverage: f64,
    pub elapsed_seconds: f64,
    pub neighborhood_generation: u64,
}

#[derive(Clone, Debug, Default)]
pub struct TrainLog {
    pub entries: Vec<LogEntry>,
}

impl TrainLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "epoch,loss,val_recall,val_coverage,elapsed_seconds,neighborhood_generation\n",
        );
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.3},{}",
                e.epoch, e.loss, e.val_recall, e.val_coverage, e.elapsed_seconds,
                e.neighborhood_generation
            );
        }
        out
    }
}

/// Result of a training run: the best validation snapshot and the log.
#[derive(Clone, Debug)]
pub struct FitOutput {
    pub params: ModelParams,
    pub log: TrainLog,
    /// Neighborhood generation active when the snapshot was taken.
    pub generation: u64,
}

/// Full training loop: per epoch, optionally refresh neighborhoods, sweep
/// shuffled mini-batches of (positive, negatives) through forward/backward
/// and Adam, evaluate recall on validation, and early-stop on `patience`
/// non-improving epochs. Returns the best snapshot.
pub fn fit(
    graph: &BipartiteGraph,
    categories: &CategoryMap,
    validation: &[(u32, u32)],
    cfg: &TrainConfig,
) -> Result<FitOutput> {
    cfg.validate()?;
    let fcfg = cfg.forward_config();
    let mut params = init_params(
        graph.user_count(),
        graph.item_count(),
        cfg.embedding_dim,
        cfg.seed,
        cfg.init_scale,
        cfg.per_side_attention,
    );
    let mut adam = AdamState::new(&params);
    let mut neighborhoods = SelectedNeighborhoods::full(graph, 0);

    let val_sets = evaluation::group_by_user(validation);
    let mut positives: Vec<(u32, u32)> = graph.edges().collect();
    let mut rng = seed::rng_for(cfg.seed, "train");

    let mut best_params = params.clone();
    let mut best_generation = 0;
    let mut stopper = EarlyStopper::new(cfg.patience);
    let mut log = TrainLog::default();
    let started = Instant::now();

    for epoch in 1..=cfg.max_epochs {
        if cfg.use_selection && (epoch - 1) % cfg.refresh_period_epochs == 0 {
            neighborhoods =
                refresh_neighborhoods(graph, categories, &params, &neighborhoods, cfg)?;
        }
        positives.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        for (batch_idx, chunk) in positives.chunks(cfg.batch_size).enumerate() {
            let mut samples = Vec::with_capacity(chunk.len());
            for &(user, pos_item) in chunk {
                samples.push(BatchSample {
                    user,
                    pos_item,
                    neg_items: sample_negatives(
                        user,
                        cfg.negatives_per_positive,
                        graph,
                        &mut rng,
                    )?,
                });
            }
            let fwd = forward(graph, &neighborhoods, &params, &fcfg);
            let (loss, grads) = batch_loss(
                &samples,
                graph,
                categories,
                &neighborhoods,
                &params,
                &fwd,
                cfg,
            )?;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: batch_idx,
                    value: loss,
                });
            }
            adam_step(&mut adam, &mut params, &grads, cfg.learning_rate);
            epoch_loss += loss * chunk.len() as f64;
        }
        epoch_loss /= positives.len() as f64;

        let (val_recall, val_coverage) = if val_sets.is_empty() {
            (0.0, 0.0)
        } else {
            let fwd = forward(graph, &neighborhoods, &params, &fcfg);
            let report = evaluation::evaluate(
                &Scorer::DotProduct(&fwd.final_embeddings),
                graph,
                &val_sets,
                categories,
                &[cfg.val_cutoff],
            )?;
            (
                report.recall(cfg.val_cutoff),
                report.coverage(cfg.val_cutoff),
            )
        };

        log.entries.push(LogEntry {
            epoch,
            loss: epoch_loss,
            val_recall,
            val_coverage,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            neighborhood_generation: neighborhoods.generation,
        });

        match stopper.update(val_recall) {
            StopDecision::Improved => {
                best_params = params.clone();
                best_generation = neighborhoods.generation;
            }
            StopDecision::Continue => {}
            StopDecision::Stop => break,
        }
    }

    Ok(FitOutput {
        params: best_params,
        log,
        generation: best_generation,
    })
}
