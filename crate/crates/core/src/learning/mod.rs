//! From exploration traces to a partition of each action's measure space.

mod areas;
mod examples;
mod mdl;
mod paths;

pub use areas::{build_areas, ActionAreas, Area, AreaOrigin, Partition};
pub use examples::{build_example_sets, Example, ExampleSet, Label};
pub use mdl::{mdl_discretize, ENTROPY_TIE};
pub use paths::{extract_best_paths, BestPath};

/// Cut points per action per measure: `cuts[action][measure]`.
pub fn learn_cuts(sets: &[ExampleSet]) -> Vec<Vec<Vec<f64>>> {
    sets.iter()
        .map(|set| {
            let labels = set.labels();
            (0..set.measure_names.len())
                .map(|m| mdl_discretize(&set.values(m), &labels))
                .collect()
        })
        .collect()
}
