//! Ordered rooted trees, B-series over them, and exact order conditions
//! for commutator-free schemes.

mod bseries;
mod conditions;
mod lie;
mod trees;

pub use bseries::{cf_scheme_bseries, compose, exp_bseries, frozen_bseries, BSeriesMap, MAX_SCHEME_SERIES_ORDER};
pub use conditions::{
    check_order, condition_jacobian, independent_conditions, rational_rank, OrderConditionRow, OrderReport, MAX_CHECK_ORDER,
};
pub use lie::{c_kappa, dim_free_lie, mobius, SubtreeMultiset, MAX_LIE_GRADE};
pub use trees::{trees_up_to, OrderedTree, MAX_TREE_ORDER};
