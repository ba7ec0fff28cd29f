//! Allocations, outcomes and market/sample partitions.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Per-agent service probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    probs: Vec<Rational>,
}

impl Allocation {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        if let Some(i) = probs.iter().position(|p| p.is_negative() || *p > Rational::one()) {
            return Err(Error::Precondition(format!("probability of agent {i} is outside [0,1]")));
        }
        Ok(Self { probs })
    }

    pub fn zeros(n: usize) -> Self {
        Self { probs: vec![Rational::zero(); n] }
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<Rational> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Nonincreasing along the index order.
    pub fn is_swap_monotone(&self) -> bool {
        self.probs.windows(2).all(|w| w[0] >= w[1])
    }
}

/// Allocation with expected payments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub allocation: Allocation,
    pub payments: Vec<Rational>,
}

impl Outcome {
    /// Checks nonnegative payments and individual rationality against `values`
    /// (indexed like the allocation).
    pub fn new(allocation: Allocation, payments: Vec<Rational>, values: &[Rational]) -> Result<Self> {
        if payments.len() != allocation.len() || values.len() != allocation.len() {
            return Err(Error::Precondition("outcome lengths differ".into()));
        }
        for (i, p) in payments.iter().enumerate() {
            if p.is_negative() {
                return Err(Error::Precondition(format!("payment of agent {i} is negative")));
            }
            if *p > &values[i] * &allocation.probs()[i] {
                return Err(Error::Precondition(format!("payment of agent {i} exceeds her expected value")));
            }
        }
        Ok(Self { allocation, payments })
    }

    pub fn revenue(&self) -> Rational {
        crate::rational::sum(&self.payments)
    }

    /// `u_i = v_i x_i - p_i`.
    pub fn utilities(&self, values: &[Rational]) -> Vec<Rational> {
        values
            .iter()
            .zip(self.allocation.probs())
            .zip(&self.payments)
            .map(|((v, x), p)| v * x - p)
            .collect()
    }

    /// Whether no agent strictly prefers another agent's (probability, payment) pair.
    pub fn is_envy_free(&self, values: &[Rational]) -> bool {
        let x = self.allocation.probs();
        let p = &self.payments;
        (0..x.len()).all(|i| {
            let own = &values[i] * &x[i] - &p[i];
            (0..x.len()).all(|j| own >= &values[i] * &x[j] - &p[j])
        })
    }
}

/// Split of agents `0..n` into market and sample.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    in_sample: Vec<bool>,
}

impl Partition {
    pub fn new(in_sample: Vec<bool>) -> Self {
        Self { in_sample }
    }

    pub fn from_sample(n: usize, sample: &[usize]) -> Result<Self> {
        let mut in_sample = vec![false; n];
        for &a in sample {
            if a >= n {
                return Err(Error::IndexOutOfRange { index: a, n });
            }
            in_sample[a] = true;
        }
        Ok(Self { in_sample })
    }

    pub fn n(&self) -> usize {
        self.in_sample.len()
    }

    pub fn in_sample(&self) -> &[bool] {
        &self.in_sample
    }

    pub fn is_sample(&self, a: usize) -> bool {
        self.in_sample[a]
    }

    pub fn market(&self) -> Vec<usize> {
        (0..self.n()).filter(|&a| !self.in_sample[a]).collect()
    }

    pub fn sample(&self) -> Vec<usize> {
        (0..self.n()).filter(|&a| self.in_sample[a]).collect()
    }

    pub fn market_mask(&self) -> Vec<bool> {
        self.in_sample.iter().map(|s| !s).collect()
    }

    /// Swaps the roles of the two sides.
    pub fn flipped(&self) -> Self {
        Self { in_sample: self.market_mask() }
    }
}
