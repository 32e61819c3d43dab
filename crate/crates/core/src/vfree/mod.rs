//! Split extensions `F_m ⋊ Q` of a free group by a finite group, and the
//! construction of weakly malnormal subgroups inside them.

mod action;
mod commensurator;
mod group;
mod theorem;

pub use action::{
    abelianized_action, baumslag_taylor_check, centralizer_of_fiber, inner_conjugator,
};
pub use commensurator::{
    commensurator_in_g, conjugate_fiber_subgroup, product_contains, torsion_and_splitting,
    weak_malnormality_in_g, GCommensurator, GOffender, GSubgroup, Splitting,
    WeakMalnormalityReport,
};
pub use group::{
    validate, FiniteGroupTable, FreeAutomorphism, GElement, VirtuallyFree, VirtuallyFreeData,
};
pub use theorem::{
    construct_weakly_malnormal, run_pipeline, Refinement, TheoremAResult, Transcript, Verdicts,
};
