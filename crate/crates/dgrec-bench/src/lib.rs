//! Shared fixtures for the engine benchmarks: a mid-sized synthetic corpus
//! prepared once and reused across benchmark groups.

use dgrec::dataset::{self, SyntheticSpec};
use dgrec::graph::{build_graph, BipartiteGraph, CategoryMap};
use dgrec::model::{init_params, ModelParams};

pub struct BenchFixture {
    pub graph: BipartiteGraph,
    pub categories: CategoryMap,
    pub params: ModelParams,
}

/// Build the standard benchmark corpus: 2,000 users, 1,200 items, 40
/// categories, trained-scale embeddings.
pub fn fixture(dim: usize) -> BenchFixture {
    let spec = SyntheticSpec {
        user_count: 2_000,
        item_count: 1_200,
        category_count: 40,
        zipf_exponent: 1.2,
        majority_interest_prob: 0.8,
        interactions_per_user: 20,
        seed: 13,
    };
    let (log, assignment) = dataset::generate_synthetic(&spec).expect("synthetic generation");
    let filtered = dataset::k_core_filter(&log, 4).expect("k-core");
    let (graph, maps) = build_graph(&filtered).expect("graph build");
    let categories = CategoryMap::build(&assignment, &maps).expect("categories");
    let params = init_params(graph.user_count(), graph.item_count(), dim, 13, 0.1, false);
    BenchFixture {
        graph,
        categories,
        params,
    }
}
