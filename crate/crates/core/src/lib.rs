//! Envy-free optimal pricing, incentive-compatible virtual-surplus mechanisms and
//! random-sampling auctions, computed with exact rationals.

pub mod analysis;
pub mod curves;
pub mod environment;
pub mod envyfree;
pub mod error;
pub mod incentive;
pub mod instance;
pub mod lp;
pub mod mechanisms;
pub mod matching;
pub mod maximizer;
pub mod outcome;
pub mod profile;
pub mod rational;
pub mod seed;

pub use curves::{build_curve, evaluate_foreign, ironed_virtual_values, virtual_valuation, RevenueCurve, VirtualValuation};
pub use environment::{permute_environment, Environment, Family, Kind, Matroid};
pub use error::{Error, Result};
pub use matching::{transversal_is_independent, Bipartite};
pub use outcome::{Allocation, Outcome, Partition};
pub use profile::ValuationProfile;
pub use rational::Rational;
