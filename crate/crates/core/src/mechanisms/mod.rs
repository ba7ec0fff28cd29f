//! Prior-free mechanisms and the reductions between environments.

pub mod digital;
pub mod matroid;
pub mod multi_unit;
pub mod position;
pub mod pq;
pub mod registry;
pub mod rsem;
pub mod vcg;

pub use digital::{optimal_price, DigitalGoodAuction, DigitalGoodMechanism, OptimalPrice, Rsop};
pub use matroid::{characteristic_weights, matroid_perm_reduction, CharacteristicWeights, MatroidReduction, WeightMode};
pub use multi_unit::{multi_unit_reduction, MultiUnitReduction};
pub use position::{decompose_majorized, position_reduction, PositionReduction, WeightDecomposition};
pub use pq::{imbalance, max_r_hat, pq_quantities, r_hat, PQLottery};
pub use rsem::{expected_rsem_revenue, rsem, rsem_prime, Rsem};
pub use registry::{build_mechanism, mu_family, rsem_family, vickrey_family, MECHANISMS};
pub use vcg::{best_reserve, vcg_with_reserve, vcgr_benchmark, vickrey};
