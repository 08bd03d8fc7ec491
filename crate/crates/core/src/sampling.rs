//! Exact posterior sampling.
//!
//! After an inward pass toward the sampling root, the cluster conditionals
//!
//! ```text
//! P(X_{C_j} | X_{S_j}, E) = Φ_j · Π_{i ∈ ne(j), i ≠ pa(j)} M_{i->j} / M_{j->pa(j)}
//! ```
//!
//! (with `S_j = ∅` and `P(E)` as divisor at the root) let a single downward
//! sweep draw a full configuration. Children are visited in ascending index
//! order and every categorical draw is an inverse-CDF lookup over the
//! canonical ordering of the free variables, using ChaCha8 seeded from a
//! 64-bit seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::factor::{self, FactorError};
use crate::hmm::{self, ForwardBackward, HmmError, HmmSpec};
use crate::model::VarId;
use crate::propagation::{CompiledQuery, PropagationError, Semiring};

#[derive(Debug, Error, PartialEq)]
pub enum SamplingError {
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Hmm(#[from] HmmError),
    #[error("evidence has probability zero")]
    ImpossibleEvidence,
    #[error("cluster {cluster}: conditional has zero mass for a separator state of positive probability")]
    Inconsistent { cluster: usize },
    #[error("variable {0} is not in the network")]
    UnknownVariable(VarId),
}

impl From<FactorError> for SamplingError {
    fn from(e: FactorError) -> Self {
        SamplingError::Propagation(e.into())
    }
}

/// A cluster conditional as a block table.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConditional {
    pub cluster: usize,
    /// Conditioning variables, `S_{j,pa(j)}`.
    pub given: Vec<VarId>,
    given_cards: Vec<usize>,
    /// Variables drawn at this cluster, `C_j \ S_{j,pa(j)}`.
    pub free: Vec<VarId>,
    free_cards: Vec<usize>,
    /// One block per assignment of `given`, each a distribution over `free`;
    /// both orderings have the last variable fastest.
    table: Vec<f64>,
}

impl ClusterConditional {
    fn block_len(&self) -> usize {
        self.free_cards.iter().product()
    }

    fn block_index(&self, given_states: &[usize]) -> usize {
        given_states
            .iter()
            .zip(&self.given_cards)
            .fold(0, |acc, (s, c)| acc * c + s)
    }

    /// Distribution over `free` given the states of `given` (in `given` order).
    pub fn block(&self, given_states: &[usize]) -> &[f64] {
        let f = self.block_len();
        let b = self.block_index(given_states);
        &self.table[b * f..(b + 1) * f]
    }

    /// Decodes a block offset into states of `free`.
    pub fn free_states(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.free_cards.len()];
        for (slot, &c) in out.iter_mut().zip(&self.free_cards).rev() {
            *slot = k % c;
            k /= c;
        }
        out
    }
}

/// Conditional of cluster `j` given its separator with `parent` (or its
/// plain posterior when `parent` is `None`). Needs every message into `j`
/// other than the one from `parent`, and `M_{j->parent}`.
pub fn cluster_conditional(
    cq: &CompiledQuery<'_>,
    j: usize,
    parent: Option<usize>,
) -> Result<ClusterConditional, SamplingError> {
    let jt = cq.tree();
    let net = cq.network();
    let mut num = cq.cluster_potential(j).clone();
    for &k in jt.neighbors(j) {
        if Some(k) == parent {
            continue;
        }
        let m = cq
            .message(Semiring::Sum, k, j)
            .ok_or(PropagationError::MissingMessage { from: k, to: j })?;
        num = factor::multiply_capped(&num, m, cq.options().scope_cap)?;
    }
    let (cond, given) = match parent {
        Some(p) => {
            if !jt.is_edge(j, p) {
                return Err(PropagationError::NotAnEdge(j, p).into());
            }
            let m = cq
                .message(Semiring::Sum, j, p)
                .ok_or(PropagationError::MissingMessage { from: j, to: p })?;
            let q = factor::divide(&num, m).map_err(|e| match e {
                FactorError::DivisionInconsistent(_) => SamplingError::Inconsistent { cluster: j },
                other => other.into(),
            })?;
            (q, jt.separator(j, p))
        }
        None => {
            let z = num.log_total();
            if z == f64::NEG_INFINITY {
                return Err(SamplingError::ImpossibleEvidence);
            }
            {
                let shifted = num.log_scale() - z;
                (num.with_log_scale(shifted), Vec::new())
            }
        }
    };
    let free: Vec<VarId> = jt
        .cluster(j)
        .iter()
        .copied()
        .filter(|v| !given.contains(v))
        .collect();
    let order: Vec<VarId> = given.iter().chain(&free).copied().collect();
    let s = cond.log_scale().exp();
    let table: Vec<f64> = cond.layout_for(&order).into_iter().map(|x| x * s).collect();
    Ok(ClusterConditional {
        cluster: j,
        given_cards: given.iter().map(|&v| net.cardinality(v)).collect(),
        given,
        free_cards: free.iter().map(|&v| net.cardinality(v)).collect(),
        free,
        table,
    })
}

/// Draws configurations by ancestral sampling down the junction tree.
#[derive(Debug)]
pub struct Sampler {
    /// Conditionals in sampling (pre-)order.
    plan: Vec<ClusterConditional>,
    num_vars: usize,
    rng: ChaCha8Rng,
}

impl Sampler {
    /// All variables. The inward pass toward `root` must have been run.
    pub fn new(cq: &CompiledQuery<'_>, root: usize, seed: u64) -> Result<Self, SamplingError> {
        Self::build(cq, root, seed, None)
    }

    /// Only the clusters needed to reach the target variables from `root`;
    /// the drawn values of the targets follow `P(X_targets | E)`.
    pub fn for_targets(
        cq: &CompiledQuery<'_>,
        root: usize,
        seed: u64,
        targets: &[VarId],
    ) -> Result<Self, SamplingError> {
        Self::build(cq, root, seed, Some(targets))
    }

    fn build(
        cq: &CompiledQuery<'_>,
        root: usize,
        seed: u64,
        targets: Option<&[VarId]>,
    ) -> Result<Self, SamplingError> {
        let jt = cq.tree();
        let rooted = jt.rooted(root).map_err(PropagationError::from)?;
        let mut needed = vec![targets.is_none(); jt.len()];
        for &t in targets.unwrap_or(&[]) {
            if t.0 >= cq.network().len() {
                return Err(SamplingError::UnknownVariable(t));
            }
            let mut c = Some(jt.cluster_of(t));
            while let Some(k) = c {
                if needed[k] {
                    break;
                }
                needed[k] = true;
                c = rooted.parent[k];
            }
        }
        let plan = rooted
            .preorder
            .iter()
            .filter(|&&j| needed[j])
            .map(|&j| cluster_conditional(cq, j, rooted.parent[j]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Sampler {
            plan,
            num_vars: cq.network().len(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// One draw; variables outside the sampled clusters are `None`.
    pub fn draw_partial(&mut self) -> Result<Vec<Option<usize>>, SamplingError> {
        let mut x: Vec<Option<usize>> = vec![None; self.num_vars];
        for c in &self.plan {
            let given: Vec<usize> = c
                .given
                .iter()
                .map(|v| x[v.0].expect("separator sampled at the parent"))
                .collect();
            let block = c.block(&given);
            if block.iter().sum::<f64>() <= 0.0 {
                return Err(SamplingError::Inconsistent { cluster: c.cluster });
            }
            let k = hmm::draw_index(&mut self.rng, block);
            for (v, s) in c.free.iter().zip(c.free_states(k)) {
                x[v.0] = Some(s);
            }
        }
        Ok(x)
    }

    /// One full configuration.
    pub fn draw(&mut self) -> Result<Vec<usize>, SamplingError> {
        Ok(self
            .draw_partial()?
            .into_iter()
            .map(|s| s.expect("full sampler covers every variable"))
            .collect())
    }
}

/// `count` independent draws from `P(X | E)`: inward pass toward `root`, then
/// ancestral sampling from the root.
pub fn sample_posterior(
    cq: &mut CompiledQuery<'_>,
    root: usize,
    seed: u64,
    count: usize,
) -> Result<Vec<Vec<usize>>, SamplingError> {
    cq.inward(Semiring::Sum, root)?;
    if cq.log_evidence()? == f64::NEG_INFINITY {
        return Err(SamplingError::ImpossibleEvidence);
    }
    let mut s = Sampler::new(cq, root, seed)?;
    (0..count).map(|_| s.draw()).collect()
}

/// `count` draws of the target variables only, in `targets` order.
pub fn sample_targets(
    cq: &mut CompiledQuery<'_>,
    root: usize,
    seed: u64,
    count: usize,
    targets: &[VarId],
) -> Result<Vec<Vec<usize>>, SamplingError> {
    cq.inward(Semiring::Sum, root)?;
    if cq.log_evidence()? == f64::NEG_INFINITY {
        return Err(SamplingError::ImpossibleEvidence);
    }
    let mut s = Sampler::for_targets(cq, root, seed, targets)?;
    (0..count)
        .map(|_| {
            let x = s.draw_partial()?;
            Ok(targets
                .iter()
                .map(|t| x[t.0].expect("target cluster sampled"))
                .collect())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Draw `S_0` first, then each next state from the backward quantities.
    Forward,
    /// Draw the last state first, then each previous one from the forward
    /// quantities.
    Backward,
}

/// One hidden path from `P(S | Y)` for the HMM.
pub fn sample_hmm_path<R: Rng + ?Sized>(
    spec: &HmmSpec,
    y: &[u64],
    fb: &ForwardBackward,
    direction: Direction,
    rng: &mut R,
) -> Result<Vec<usize>, SamplingError> {
    let n = y.len();
    let k = spec.num_states();
    if fb.log_likelihood() == f64::NEG_INFINITY {
        return Err(SamplingError::ImpossibleEvidence);
    }
    let mut path = vec![0; n];
    match direction {
        Direction::Forward => {
            let w0: Vec<f64> = (0..k)
                .map(|s| spec.initial[s] * spec.emission(s, y[0]) * fb.backward[0][s])
                .collect();
            path[0] = hmm::draw_index(rng, &w0);
            for i in 1..n {
                let r = path[i - 1];
                // The B_{i-1}(r) divisor is common to the row.
                let w: Vec<f64> = (0..k)
                    .map(|s| spec.transition[r][s] * spec.emission(s, y[i]) * fb.backward[i][s])
                    .collect();
                path[i] = hmm::draw_index(rng, &w);
            }
        }
        Direction::Backward => {
            path[n - 1] = hmm::draw_index(rng, &fb.forward[n - 1]);
            for i in (1..n).rev() {
                let s = path[i];
                let w: Vec<f64> = (0..k)
                    .map(|r| fb.forward[i - 1][r] * spec.transition[r][s])
                    .collect();
                path[i - 1] = hmm::draw_index(rng, &w);
            }
        }
    }
    Ok(path)
}

/// Seeded convenience wrapper around [`sample_hmm_path`].
pub fn sample_hmm_paths(
    spec: &HmmSpec,
    y: &[u64],
    direction: Direction,
    seed: u64,
    count: usize,
) -> Result<Vec<Vec<usize>>, SamplingError> {
    let fb = ForwardBackward::compute(spec, y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| sample_hmm_path(spec, y, &fb, direction, &mut rng))
        .collect()
}
