//! Subgroup automata for finitely generated subgroups of free groups.

mod fiber;
mod graph;
mod subgroup;

pub use fiber::{
    based_intersection, commensurator_in_free, conjugate_intersections, double_coset_contains,
    is_malnormal, power_conjugates_into, short_products, CommensuratorResult, FiberComponent,
    MalnormalityReport, PowerConjugacy,
};
pub use graph::{Index, Label, StallingsGraph};
pub use subgroup::{is_automorphism, GraphSummary, SubgroupHandle};
