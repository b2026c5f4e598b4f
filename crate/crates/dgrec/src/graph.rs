//! Compressed bipartite-graph storage and category bookkeeping.
//!
//! `BipartiteGraph` and `CategoryMap` are immutable after construction and
//! freely shared across threads. `SelectedNeighborhoods` is rebuilt as a
//! whole generation and swapped in, so readers never observe a partial
//! refresh.

use std::collections::HashMap;

use crate::dataset::{CategoryAssignment, InteractionLog};
use crate::error::{Error, Result};

/// User-item interaction graph in CSR form, both directions.
#[derive(Clone, Debug)]
pub struct BipartiteGraph {
    user_count: usize,
    item_count: usize,
    user_offsets: Vec<usize>,
    user_items: Vec<u32>,
    item_offsets: Vec<usize>,
    item_users: Vec<u32>,
}

impl BipartiteGraph {
    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    pub fn node_count(&self) -> usize {
        self.user_count + self.item_count
    }

    pub fn edge_count(&self) -> usize {
        self.user_items.len()
    }

    /// Items interacted with by `user`, ascending.
    pub fn items_of(&self, user: u32) -> &[u32] {
        let u = user as usize;
        &self.user_items[self.user_offsets[u]..self.user_offsets[u + 1]]
    }

    /// Users that interacted with `item`, ascending.
    pub fn users_of(&self, item: u32) -> &[u32] {
        let i = item as usize;
        &self.item_users[self.item_offsets[i]..self.item_offsets[i + 1]]
    }

    pub fn user_degree(&self, user: u32) -> usize {
        self.items_of(user).len()
    }

    pub fn item_degree(&self, item: u32) -> usize {
        self.users_of(item).len()
    }

    /// True if `(user, item)` is an edge.
    pub fn has_edge(&self, user: u32, item: u32) -> bool {
        self.items_of(user).binary_search(&item).is_ok()
    }

    /// Global node index: users first, then items.
    pub fn user_node(&self, user: u32) -> usize {
        user as usize
    }

    pub fn item_node(&self, item: u32) -> usize {
        self.user_count + item as usize
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.user_count as u32)
            .flat_map(move |u| self.items_of(u).iter().map(move |&i| (u, i)))
    }
}

/// Bidirectional maps between external string ids and contiguous internal ids.
#[derive(Clone, Debug, Default)]
pub struct IdMaps {
    pub user_to_internal: HashMap<String, u32>,
    pub item_to_internal: HashMap<String, u32>,
    pub user_names: Vec<String>,
    pub item_names: Vec<String>,
}

impl IdMaps {
    pub fn user(&self, external: &str) -> Option<u32> {
        self.user_to_internal.get(external).copied()
    }

    pub fn item(&self, external: &str) -> Option<u32> {
        self.item_to_internal.get(external).copied()
    }

    /// Map a log to internal id pairs, dropping records whose user or item
    /// never appears in train (they cannot be scored or recommended).
    pub fn map_log(&self, log: &InteractionLog) -> Vec<(u32, u32)> {
        log.records
            .iter()
            .filter_map(|(u, i)| Some((self.user(u)?, self.item(i)?)))
            .collect()
    }
}

/// Build the CSR graph from a training log. Internal ids are assigned in
/// first-appearance order, adjacency lists are sorted ascending, and the two
/// directions are exact transposes.
pub fn build_graph(train: &InteractionLog) -> Result<(BipartiteGraph, IdMaps)> {
    if train.is_empty() {
        return Err(Error::EmptyDataset("cannot build graph from empty log".into()));
    }

    let mut maps = IdMaps::default();
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(train.len());
    for (u, i) in &train.records {
        let uid = *maps.user_to_internal.entry(u.clone()).or_insert_with(|| {
            maps.user_names.push(u.clone());
            (maps.user_names.len() - 1) as u32
        });
        let iid = *maps.item_to_internal.entry(i.clone()).or_insert_with(|| {
            maps.item_names.push(i.clone());
            (maps.item_names.len() - 1) as u32
        });
        edges.push((uid, iid));
    }

    let user_count = maps.user_names.len();
    let item_count = maps.item_names.len();

    let mut user_deg = vec![0usize; user_count];
    let mut item_deg = vec![0usize; item_count];
    for &(u, i) in &edges {
        user_deg[u as usize] += 1;
        item_deg[i as usize] += 1;
    }

    let mut user_offsets = vec![0usize; user_count + 1];
    for u in 0..user_count {
        user_offsets[u + 1] = user_offsets[u] + user_deg[u];
    }
    let mut item_offsets = vec![0usize; item_count + 1];
    for i in 0..item_count {
        item_offsets[i + 1] = item_offsets[i] + item_deg[i];
    }

    let mut user_items = vec![0u32; edges.len()];
    let mut item_users = vec![0u32; edges.len()];
    let mut user_cursor = user_offsets.clone();
    let mut item_cursor = item_offsets.clone();
    for &(u, i) in &edges {
        user_items[user_cursor[u as usize]] = i;
        user_cursor[u as usize] += 1;
        item_users[item_cursor[i as usize]] = u;
        item_cursor[i as usize] += 1;
    }
    for u in 0..user_count {
        user_items[user_offsets[u]..user_offsets[u + 1]].sort_unstable();
    }
    for i in 0..item_count {
        item_users[item_offsets[i]..item_offsets[i + 1]].sort_unstable();
    }

    Ok((
        BipartiteGraph {
            user_count,
            item_count,
            user_offsets,
            user_items,
            item_offsets,
            item_users,
        },
        maps,
    ))
}

/// Symmetric degree normalization 1/(sqrt(du) * sqrt(di)).
pub fn degree_norm(user_degree: usize, item_degree: usize) -> Result<f64> {
    if user_degree == 0 || item_degree == 0 {
        return Err(Error::InvalidArgument(
            "degree normalization requires positive degrees".into(),
        ));
    }
    Ok(1.0 / ((user_degree as f64).sqrt() * (item_degree as f64).sqrt()))
}

/// Item -> category over internal ids, plus per-category item counts.
#[derive(Clone, Debug)]
pub struct CategoryMap {
    item_category: Vec<u32>,
    category_sizes: Vec<usize>,
    category_names: Vec<String>,
}

impl CategoryMap {
    /// Build from the external assignment; category ids are assigned in
    /// ascending order of category name for stability.
    pub fn build(assignment: &CategoryAssignment, maps: &IdMaps) -> Result<CategoryMap> {
        let mut names: Vec<&str> = Vec::new();
        for item in &maps.item_names {
            let cat = assignment.get(item).ok_or_else(|| {
                Error::InvalidArgument(format!("item {item} has no category entry"))
            })?;
            names.push(cat);
        }
        let mut sorted: Vec<&str> = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let index: HashMap<&str, u32> = sorted
            .iter()
            .enumerate()
            .map(|(idx, &name)| (name, idx as u32))
            .collect();

        let item_category: Vec<u32> = names.iter().map(|n| index[n]).collect();
        let mut category_sizes = vec![0usize; sorted.len()];
        for &c in &item_category {
            category_sizes[c as usize] += 1;
        }
        Ok(CategoryMap {
            item_category,
            category_sizes,
            category_names: sorted.into_iter().map(String::from).collect(),
        })
    }

    pub fn category_of(&self, item: u32) -> u32 {
        self.item_category[item as usize]
    }

    /// Number of items sharing `item`'s category.
    pub fn category_size_of(&self, item: u32) -> usize {
        self.category_sizes[self.category_of(item) as usize]
    }

    pub fn category_count(&self) -> usize {
        self.category_sizes.len()
    }

    pub fn category_sizes(&self) -> &[usize] {
        &self.category_sizes
    }

    pub fn category_name(&self, category: u32) -> &str {
        &self.category_names[category as usize]
    }

    pub fn item_count(&self) -> usize {
        self.item_category.len()
    }
}

/// Per-node diversified neighbor subsets, refreshed between epochs.
#[derive(Clone, Debug)]
pub struct SelectedNeighborhoods {
    user_offsets: Vec<usize>,
    user_items: Vec<u32>,
    item_offsets: Vec<usize>,
    item_users: Vec<u32>,
    pub budget: usize,
    pub generation: u64,
}

impl SelectedNeighborhoods {
    /// Assemble from per-node selected lists. Lists are sorted here so the
    /// aggregation order downstream is the ascending id order.
    pub fn from_lists(
        user_lists: Vec<Vec<u32>>,
        item_lists: Vec<Vec<u32>>,
        budget: usize,
        generation: u64,
    ) -> Self {
        fn pack(mut lists: Vec<Vec<u32>>) -> (Vec<usize>, Vec<u32>) {
            let mut offsets = Vec::with_capacity(lists.len() + 1);
            offsets.push(0usize);
            let mut flat = Vec::new();
            for list in &mut lists {
                list.sort_unstable();
                flat.extend_from_slice(list);
                offsets.push(flat.len());
            }
            (offsets, flat)
        }
        let (user_offsets, user_items) = pack(user_lists);
        let (item_offsets, item_users) = pack(item_lists);
        SelectedNeighborhoods {
            user_offsets,
            user_items,
            item_offsets,
            item_users,
            budget,
            generation,
        }
    }

    /// Full neighborhoods: selection disabled or budget covering every node.
    pub fn full(graph: &BipartiteGraph, generation: u64) -> Self {
        SelectedNeighborhoods {
            user_offsets: graph.user_offsets.clone(),
            user_items: graph.user_items.clone(),
            item_offsets: graph.item_offsets.clone(),
            item_users: graph.item_users.clone(),
            budget: usize::MAX,
            generation,
        }
    }

    pub fn selected_items(&self, user: u32) -> &[u32] {
        let u = user as usize;
        &self.user_items[self.user_offsets[u]..self.user_offsets[u + 1]]
    }

    pub fn selected_users(&self, item: u32) -> &[u32] {
        let i = item as usize;
        &self.item_users[self.item_offsets[i]..self.item_offsets[i + 1]]
    }

    pub fn user_selected_degree(&self, user: u32) -> usize {
        self.selected_items(user).len()
    }

    pub fn item_selected_degree(&self, item: u32) -> usize {
        self.selected_users(item).len()
    }
}
