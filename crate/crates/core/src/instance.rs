//! Instance files: an environment, a valuation profile and optionally a value distribution.
//!
//! Rationals are `"num/den"` strings. Writing a parsed instance reproduces the file
//! byte for byte when it was written by [`Instance::to_json`].

use serde::{Deserialize, Serialize};

use crate::analysis::DiscreteDistribution;
use crate::environment::{members, Environment, Family, Kind, Matroid};
use crate::error::{Error, Result};
use crate::profile::ValuationProfile;
use crate::rational::Rational;
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvSpec {
    DigitalGood {
        n: usize,
    },
    MultiUnit {
        n: usize,
        k: usize,
    },
    Position {
        #[serde(with = "crate::rational::serde_rational_vec")]
        weights: Vec<Rational>,
    },
    UniformMatroid {
        n: usize,
        k: usize,
    },
    PartitionMatroid {
        sector: Vec<usize>,
        capacity: Vec<usize>,
    },
    TransversalMatroid {
        items: usize,
        desires: Vec<Vec<usize>>,
    },
    DownwardClosed {
        n: usize,
        sets: Vec<Vec<usize>>,
    },
    SingleMinded {
        items: usize,
        bundles: Vec<Vec<usize>>,
    },
    /// Roles `0..n` form one feasible set and role `n` another.
    OneVsN {
        n: usize,
    },
}

impl EnvSpec {
    pub fn build(&self, permuted: bool) -> Result<Environment> {
        let env = match self {
            EnvSpec::DigitalGood { n } => Environment::new(*n, crate::environment::Kind::DigitalGood)?,
            EnvSpec::MultiUnit { n, k } => Environment::multi_unit(*n, *k)?,
            EnvSpec::Position { weights } => Environment::position(weights.len(), weights.clone())?,
            EnvSpec::UniformMatroid { n, k } => Environment::uniform_matroid(*n, *k)?,
            EnvSpec::PartitionMatroid { sector, capacity } => Environment::partition_matroid(sector.clone(), capacity.clone())?,
            EnvSpec::TransversalMatroid { items, desires } => Environment::transversal_matroid(*items, desires.clone())?,
            EnvSpec::DownwardClosed { n, sets } => Environment::downward_closed(*n, sets)?,
            EnvSpec::SingleMinded { items, bundles } => Environment::single_minded(*items, bundles.clone())?,
            EnvSpec::OneVsN { n } => crate::analysis::generators::one_vs_n_fixed(*n)?,
        };
        Ok(if permuted { env.permutation() } else { env })
    }

    /// Serializable description of an environment, ignoring permutation. Oracle families
    /// and relabelings have none.
    pub fn describe(env: &Environment) -> Option<EnvSpec> {
        if env.relabeling().is_some() {
            return None;
        }
        let n = env.n();
        Some(match env.kind() {
            Kind::DigitalGood => EnvSpec::DigitalGood { n },
            Kind::MultiUnit { k } => EnvSpec::MultiUnit { n, k: *k },
            Kind::Position { weights } => {
                let mut w = weights.clone();
                w.resize(n, Rational::zero());
                EnvSpec::Position { weights: w }
            }
            Kind::Matroid(Matroid::Uniform { k }) => EnvSpec::UniformMatroid { n, k: *k },
            Kind::Matroid(Matroid::Partition { sector, capacity }) => {
                EnvSpec::PartitionMatroid { sector: sector.clone(), capacity: capacity.clone() }
            }
            Kind::Matroid(Matroid::Transversal(g)) => {
                EnvSpec::TransversalMatroid { items: g.items, desires: g.desires.clone() }
            }
            Kind::DownwardClosed(Family::Explicit(masks)) => {
                EnvSpec::DownwardClosed { n, sets: masks.iter().map(|&m| members(m)).collect() }
            }
            Kind::DownwardClosed(Family::Oracle(_)) => return None,
            Kind::SingleMinded { items, bundles } => EnvSpec::SingleMinded { items: *items, bundles: bundles.clone() },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub id: String,
    pub environment: EnvSpec,
    /// Whether agents are assigned roles uniformly at random.
    #[serde(default)]
    pub permuted: bool,
    /// Values by agent id.
    #[serde(with = "crate::rational::serde_rational_vec")]
    pub values: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DiscreteDistribution>,
}

impl Instance {
    pub fn environment(&self) -> Result<Environment> {
        let env = self.environment.build(self.permuted)?;
        if env.n() != self.values.len() {
            return Err(Error::Schema(format!("environment has {} agents but {} values are given", env.n(), self.values.len())));
        }
        Ok(env)
    }

    pub fn profile(&self) -> Result<ValuationProfile> {
        ValuationProfile::from_unsorted(self.values.clone())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        inst.environment()?;
        inst.profile()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instances serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn demo() -> Instance {
        Instance {
            id: "demo".into(),
            environment: EnvSpec::MultiUnit { n: 3, k: 2 },
            permuted: false,
            values: vec![int(6), int(4), int(4)],
            distribution: None,
        }
    }

    #[test]
    fn round_trip() {
        let s = demo().to_json();
        let back = Instance::from_json(&s).unwrap();
        assert_eq!(back, demo());
        assert_eq!(back.to_json(), s);
        assert!(s.contains("\"kind\": \"multi-unit\""));
        assert!(s.contains("\"6/1\""));
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(Instance::from_json("{"), Err(Error::Schema(_))));
        let bad = r#"{"id":"x","environment":{"kind":"multi-unit","n":2,"k":1},"values":["1"]}"#;
        assert!(matches!(Instance::from_json(bad), Err(Error::Schema(_))));
        let typo = r#"{"id":"x","environment":{"kind":"multi-units","n":1,"k":1},"values":["1"]}"#;
        assert!(matches!(Instance::from_json(typo), Err(Error::Schema(_))));
        let plain = r#"{"id":"x","environment":{"kind":"digital-good","n":2},"values":["3", 2]}"#;
        assert_eq!(Instance::from_json(plain).unwrap().values, vec![int(3), int(2)]);
    }

    #[test]
    fn describe_rebuilds() {
        let specs = [
            EnvSpec::MultiUnit { n: 3, k: 2 },
            EnvSpec::Position { weights: vec![int(1), crate::rational::q(1, 2), int(0)] },
            EnvSpec::PartitionMatroid { sector: vec![0, 0, 1], capacity: vec![1, 1] },
            EnvSpec::TransversalMatroid { items: 2, desires: vec![vec![0], vec![0, 1], vec![1]] },
            EnvSpec::DownwardClosed { n: 3, sets: vec![vec![0, 1], vec![2]] },
        ];
        for s in specs {
            let env = s.build(false).unwrap();
            let back = EnvSpec::describe(&env).unwrap();
            let again = back.build(false).unwrap();
            assert_eq!(format!("{:?}", again.kind()), format!("{:?}", env.kind()));
        }
    }
}
