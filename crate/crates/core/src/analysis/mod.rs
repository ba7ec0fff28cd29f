//! Benchmarks, partition statistics, estimators and instance generators.

pub mod distribution;
pub mod experiments;
pub mod generators;
pub mod partition;
pub mod runner;
pub mod stats;

pub use distribution::{tail_regular, DiscreteDistribution, TailRegularity};
pub use experiments::{
    balance_chain_check, benchmark_bounds, conditional_sample_bound, ratio_experiment, rsem_factor, rsem_prime_factor,
    tight_family, tight_family_ratio, Benchmark, BoundsReport, ChainReport, RatioReport,
};
pub use generators::{
    gen_one_vs_n, gen_opera_house, one_vs_n_revenues, one_vs_n_sweep, opera_house_revenues, random_downward_closed,
    random_matroid, random_multi_unit, random_symmetric, OneVsN, OperaHouse, OperaRevenues,
};
pub use partition::{
    ams_constant, ams_quantity, balanced_probability, is_balanced, partition_stats, ruin_root, AmsEstimate,
    BalanceEstimate, PartitionStats,
};
pub use runner::{default_workers, parallel_map, parallel_trials, TrialSummary};

/// Closed-form or enumerated expectations versus seeded sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}
