//! Dominance over `(μ, σ)` and an NSGA-II optimiser for the
//! exploration/exploitation front.

mod dominance;
mod nsga2;

pub use dominance::{crowding_distance, dominates, fast_nondominated_sort, non_dominated_filter, Objectives};
pub use nsga2::{nsga2, polynomial_mutation, sbx_crossover, Individual, MoeaParams, ParetoArchive};
