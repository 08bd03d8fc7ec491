//! Sum-product and max-product message passing on a junction tree.
//!
//! Each cluster `j` carries the potential `Φ_j`, the product of the
//! evidence-restricted CPDs `K_u` of the variables assigned to it. The message
//! along `i -> j` is
//!
//! ```text
//! M_{i->j} = Σ_{C_i \ S_ij} Φ_i · Π_{k ∈ ne(i), k ≠ j} M_{k->i}
//! ```
//!
//! (maximization instead of summation for max-product). It equals the sum of
//! the product of all upstream `K_u` over the upstream variables outside the
//! separator. Messages are stored over the full separator scope and, by
//! default, rescaled to a maximum entry of 1 with the magnitude kept in the
//! factor's log scale.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::factor::{self, Factor, FactorError, DEFAULT_SCOPE_CAP};
use crate::jtree::{JtError, JunctionTree};
use crate::model::{DiscreteNetwork, EvidenceSet, VarId};

#[derive(Debug, Error, PartialEq)]
pub enum PropagationError {
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error("clusters {0} and {1} are not adjacent")]
    NotAnEdge(usize, usize),
    #[error("cluster {0} does not exist")]
    NoSuchCluster(usize),
    #[error("message {from} -> {to} has not been computed")]
    MissingMessage { from: usize, to: usize },
    #[error("junction tree assigns {got} variables, network has {expected}")]
    TreeMismatch { expected: usize, got: usize },
    #[error("evidence has probability zero")]
    ImpossibleEvidence,
    #[error("no cluster contains all of the queried variables")]
    NoCoveringCluster,
    #[error("variable {0} is not in the network")]
    UnknownVariable(VarId),
}

impl From<JtError> for PropagationError {
    fn from(e: JtError) -> Self {
        match e {
            JtError::NotAnEdge(i, j) => PropagationError::NotAnEdge(i, j),
            JtError::NoSuchCluster(i) => PropagationError::NoSuchCluster(i),
            // Other tree errors come from construction, not propagation.
            other => unreachable!("unexpected tree error during propagation: {other}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semiring {
    Sum,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    /// Rescale every message to a maximum entry of 1.
    pub renormalize: bool,
    /// Largest scope any intermediate product may have.
    pub scope_cap: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            renormalize: true,
            scope_cap: DEFAULT_SCOPE_CAP,
        }
    }
}

/// Messages computed so far, keyed by directed edge.
#[derive(Debug, Clone, Default)]
pub struct MessageStore {
    sum: BTreeMap<(usize, usize), Factor>,
    max: BTreeMap<(usize, usize), Factor>,
}

impl MessageStore {
    fn table(&self, s: Semiring) -> &BTreeMap<(usize, usize), Factor> {
        match s {
            Semiring::Sum => &self.sum,
            Semiring::Max => &self.max,
        }
    }

    fn table_mut(&mut self, s: Semiring) -> &mut BTreeMap<(usize, usize), Factor> {
        match s {
            Semiring::Sum => &mut self.sum,
            Semiring::Max => &mut self.max,
        }
    }

    pub fn get(&self, s: Semiring, from: usize, to: usize) -> Option<&Factor> {
        self.table(s).get(&(from, to))
    }

    pub fn len(&self, s: Semiring) -> usize {
        self.table(s).len()
    }

    pub fn is_empty(&self) -> bool {
        self.sum.is_empty() && self.max.is_empty()
    }
}

/// Most probable configuration consistent with the evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct MapResult {
    /// One state index per variable.
    pub assignment: Vec<usize>,
    /// `ln max_x P(x, E)`.
    pub log_value: f64,
}

/// A network, junction tree and evidence set prepared for message passing.
#[derive(Debug, Clone)]
pub struct CompiledQuery<'a> {
    net: &'a DiscreteNetwork,
    jt: &'a JunctionTree,
    evidence: EvidenceSet,
    potentials: Vec<Factor>,
    cluster_potentials: Vec<Factor>,
    options: Options,
    messages: MessageStore,
}

/// `K_u = 1_{E_u}(x_u) · P(x_u | x_pa(u))` for every variable. Only the
/// child's own evidence enters; parents stay unrestricted.
pub fn build_potentials(net: &DiscreteNetwork, ev: &EvidenceSet) -> Vec<Factor> {
    net.ids()
        .map(|u| {
            let cpd = Factor::from_cpd(net, u);
            match ev.allowed(u) {
                Some(s) => factor::restrict_var(&cpd, u, s),
                None => cpd,
            }
        })
        .collect()
}

fn scope_of(net: &DiscreteNetwork, vars: &[VarId]) -> Vec<(VarId, usize)> {
    vars.iter().map(|&v| (v, net.cardinality(v))).collect()
}

impl<'a> CompiledQuery<'a> {
    pub fn new(
        net: &'a DiscreteNetwork,
        jt: &'a JunctionTree,
        ev: &EvidenceSet,
    ) -> Result<Self, PropagationError> {
        Self::with_options(net, jt, ev, Options::default())
    }

    pub fn with_options(
        net: &'a DiscreteNetwork,
        jt: &'a JunctionTree,
        ev: &EvidenceSet,
        options: Options,
    ) -> Result<Self, PropagationError> {
        if jt.assignment().len() != net.len() {
            return Err(PropagationError::TreeMismatch {
                expected: net.len(),
                got: jt.assignment().len(),
            });
        }
        let potentials = build_potentials(net, ev);
        let mut cluster_potentials = Vec::with_capacity(jt.len());
        for (j, c) in jt.clusters().iter().enumerate() {
            if c.len() > options.scope_cap {
                return Err(FactorError::ScopeTooLarge {
                    vars: c.len(),
                    cap: options.scope_cap,
                }
                .into());
            }
            let mut phi = Factor::ones(&scope_of(net, c))?;
            for u in jt.owned(j) {
                phi = factor::multiply_capped(&phi, &potentials[u.0], options.scope_cap)?;
            }
            cluster_potentials.push(phi);
        }
        Ok(CompiledQuery {
            net,
            jt,
            evidence: ev.clone(),
            potentials,
            cluster_potentials,
            options,
            messages: MessageStore::default(),
        })
    }

    pub fn network(&self) -> &'a DiscreteNetwork {
        self.net
    }

    pub fn tree(&self) -> &'a JunctionTree {
        self.jt
    }

    pub fn evidence(&self) -> &EvidenceSet {
        &self.evidence
    }

    pub fn options(&self) -> Options {
        self.options
    }

    /// `K_u`.
    pub fn potential(&self, u: VarId) -> &Factor {
        &self.potentials[u.0]
    }

    /// `Φ_j`, over the full cluster scope.
    pub fn cluster_potential(&self, j: usize) -> &Factor {
        &self.cluster_potentials[j]
    }

    pub fn messages(&self) -> &MessageStore {
        &self.messages
    }

    pub fn message(&self, s: Semiring, from: usize, to: usize) -> Option<&Factor> {
        self.messages.get(s, from, to)
    }

    fn check_cluster(&self, j: usize) -> Result<(), PropagationError> {
        if j >= self.jt.len() {
            Err(PropagationError::NoSuchCluster(j))
        } else {
            Ok(())
        }
    }

    /// `Φ_i` times every stored message into `i` except the one from
    /// `except`.
    fn gather(
        &self,
        s: Semiring,
        i: usize,
        except: Option<usize>,
    ) -> Result<Factor, PropagationError> {
        let mut acc = self.cluster_potentials[i].clone();
        for &k in self.jt.neighbors(i) {
            if Some(k) == except {
                continue;
            }
            let m = self
                .messages
                .get(s, k, i)
                .ok_or(PropagationError::MissingMessage { from: k, to: i })?;
            acc = factor::multiply_capped(&acc, m, self.options.scope_cap)?;
        }
        Ok(acc)
    }

    /// Computes and stores `M_{from -> to}`. Every message into `from` other
    /// than the one from `to` must already be present.
    pub fn compute_message(
        &mut self,
        s: Semiring,
        from: usize,
        to: usize,
    ) -> Result<&Factor, PropagationError> {
        self.check_cluster(from)?;
        if !self.jt.is_edge(from, to) {
            return Err(PropagationError::NotAnEdge(from, to));
        }
        let product = self.gather(s, from, Some(to))?;
        let sep = self.jt.separator(from, to);
        let drop: Vec<VarId> = product
            .scope()
            .iter()
            .copied()
            .filter(|v| !sep.contains(v))
            .collect();
        let mut m = match s {
            Semiring::Sum => factor::marginalize_sum(&product, &drop)?,
            Semiring::Max => factor::marginalize_max(&product, &drop)?,
        };
        if self.options.renormalize {
            m.rescale_max();
        }
        let slot = self.messages.table_mut(s);
        slot.insert((from, to), m);
        Ok(&slot[&(from, to)])
    }

    /// Leaves-to-root pass.
    pub fn inward(&mut self, s: Semiring, root: usize) -> Result<(), PropagationError> {
        let rooted = self.jt.rooted(root)?;
        for c in rooted.postorder() {
            if let Some(p) = rooted.parent[c] {
                self.compute_message(s, c, p)?;
            }
        }
        Ok(())
    }

    /// Root-to-leaves pass; assumes the inward pass for `root` has run.
    pub fn outward(&mut self, s: Semiring, root: usize) -> Result<(), PropagationError> {
        let rooted = self.jt.rooted(root)?;
        for &p in &rooted.preorder {
            for &c in &rooted.children[p] {
                self.compute_message(s, p, c)?;
            }
        }
        Ok(())
    }

    /// Both passes: afterwards every directed edge has a message.
    pub fn calibrate(&mut self, root: usize) -> Result<(), PropagationError> {
        self.inward(Semiring::Sum, root)?;
        self.outward(Semiring::Sum, root)
    }

    /// Both max-product passes.
    pub fn calibrate_max(&mut self, root: usize) -> Result<(), PropagationError> {
        self.inward(Semiring::Max, root)?;
        self.outward(Semiring::Max, root)
    }

    /// `M_{i->j} · M_{j->i}`: the unnormalized marginal of `P(X_S, E)`.
    pub fn edge_marginal(&self, i: usize, j: usize) -> Result<Factor, PropagationError> {
        self.check_cluster(i)?;
        if !self.jt.is_edge(i, j) {
            return Err(PropagationError::NotAnEdge(i, j));
        }
        let a = self
            .messages
            .get(Semiring::Sum, i, j)
            .ok_or(PropagationError::MissingMessage { from: i, to: j })?;
        let b = self
            .messages
            .get(Semiring::Sum, j, i)
            .ok_or(PropagationError::MissingMessage { from: j, to: i })?;
        Ok(factor::multiply_capped(a, b, self.options.scope_cap)?)
    }

    /// `Φ_j · Π_{i ∈ ne(j)} M_{i->j}`: the unnormalized marginal `P(X_{C_j}, E)`.
    pub fn cluster_marginal(&self, j: usize) -> Result<Factor, PropagationError> {
        self.check_cluster(j)?;
        self.gather(Semiring::Sum, j, None)
    }

    /// Max-product analogue of [`CompiledQuery::cluster_marginal`]: entry `x`
    /// is the largest `P(x', E)` over full configurations `x'` extending `x`.
    pub fn max_marginal(&self, j: usize) -> Result<Factor, PropagationError> {
        self.check_cluster(j)?;
        self.gather(Semiring::Max, j, None)
    }

    /// `ln P(E)`, read off the first cluster whose incoming messages are all
    /// present. `-inf` when the evidence is impossible.
    pub fn log_evidence(&self) -> Result<f64, PropagationError> {
        let mut first_err = None;
        for j in 0..self.jt.len() {
            match self.cluster_marginal(j) {
                Ok(f) => return Ok(f.log_total()),
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        Err(first_err.unwrap_or(PropagationError::NoSuchCluster(0)))
    }

    /// Normalized posterior over the states of `u`; needs every message into
    /// `cl(u)`.
    pub fn variable_posterior(&self, u: VarId) -> Result<Vec<f64>, PropagationError> {
        if u.0 >= self.net.len() {
            return Err(PropagationError::UnknownVariable(u));
        }
        let joint = self.cluster_marginal(self.jt.cluster_of(u))?;
        normalized(&joint.sum_onto(&[u])?)
    }

    /// Posterior of every variable, one cluster marginal per cluster.
    pub fn all_posteriors(&self) -> Result<Vec<Vec<f64>>, PropagationError> {
        let mut by_cluster: BTreeMap<usize, Factor> = BTreeMap::new();
        let mut out = Vec::with_capacity(self.net.len());
        for u in self.net.ids() {
            let j = self.jt.cluster_of(u);
            let joint = match by_cluster.entry(j) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(self.cluster_marginal(j)?),
            };
            out.push(normalized(&joint.sum_onto(&[u])?)?);
        }
        Ok(out)
    }

    /// Normalized joint posterior of `vars`, which must share a cluster. The
    /// result is over `vars` sorted by id.
    pub fn joint_posterior(&self, vars: &[VarId]) -> Result<Factor, PropagationError> {
        if let Some(v) = vars.iter().find(|v| v.0 >= self.net.len()) {
            return Err(PropagationError::UnknownVariable(*v));
        }
        let j = self
            .jt
            .clusters()
            .iter()
            .enumerate()
            .filter(|(_, c)| vars.iter().all(|v| c.contains(v)))
            .min_by_key(|(i, c)| (c.len(), *i))
            .map(|(i, _)| i)
            .ok_or(PropagationError::NoCoveringCluster)?;
        let joint = self.cluster_marginal(j)?.sum_onto(vars)?;
        match factor::normalize(&joint) {
            Ok((f, _)) => Ok(f),
            Err(FactorError::ZeroMass) => Err(PropagationError::ImpossibleEvidence),
            Err(e) => Err(e.into()),
        }
    }

    /// Max-product inward pass to `root` followed by a downward extension of
    /// the root's maximizer. Ties go to the lowest table index at each
    /// cluster.
    pub fn map_assignment(&mut self, root: usize) -> Result<MapResult, PropagationError> {
        self.inward(Semiring::Max, root)?;
        let rooted = self.jt.rooted(root)?;
        let top = self.gather(Semiring::Max, root, None)?;
        if top.max_value() <= 0.0 {
            return Err(PropagationError::ImpossibleEvidence);
        }
        let log_value = top.max_value().ln() + top.log_scale();
        let mut assignment: Vec<Option<usize>> = vec![None; self.net.len()];
        let best = top.assignment_of(top.argmax());
        for (v, s) in top.scope().iter().zip(best) {
            assignment[v.0] = Some(s);
        }
        for &p in &rooted.preorder {
            for &c in &rooted.children[p] {
                let local = self.gather(Semiring::Max, c, Some(p))?;
                let fixed: Vec<(VarId, usize)> = local
                    .scope()
                    .iter()
                    .filter_map(|v| assignment[v.0].map(|s| (*v, s)))
                    .collect();
                let rest = local.reduce(&fixed);
                let choice = rest.assignment_of(rest.argmax());
                for (v, s) in rest.scope().iter().zip(choice) {
                    assignment[v.0] = Some(s);
                }
            }
        }
        Ok(MapResult {
            assignment: assignment
                .into_iter()
                .map(|s| s.expect("clusters cover every variable"))
                .collect(),
            log_value,
        })
    }
}

fn normalized(f: &Factor) -> Result<Vec<f64>, PropagationError> {
    match factor::normalize(f) {
        Ok((g, _)) => Ok(g.values().to_vec()),
        Err(FactorError::ZeroMass) => Err(PropagationError::ImpossibleEvidence),
        Err(e) => Err(e.into()),
    }
}

/// `ln P(E)` by a single inward pass to cluster 0.
pub fn log_evidence(
    net: &DiscreteNetwork,
    jt: &JunctionTree,
    ev: &EvidenceSet,
) -> Result<f64, PropagationError> {
    let mut q = CompiledQuery::new(net, jt, ev)?;
    q.inward(Semiring::Sum, 0)?;
    q.log_evidence()
}

/// Posterior marginal of every variable.
pub fn posteriors(
    net: &DiscreteNetwork,
    jt: &JunctionTree,
    ev: &EvidenceSet,
) -> Result<Vec<Vec<f64>>, PropagationError> {
    let mut q = CompiledQuery::new(net, jt, ev)?;
    q.calibrate(0)?;
    q.all_posteriors()
}

/// MAP configuration rooted at cluster 0.
pub fn map_assignment(
    net: &DiscreteNetwork,
    jt: &JunctionTree,
    ev: &EvidenceSet,
) -> Result<MapResult, PropagationError> {
    CompiledQuery::new(net, jt, ev)?.map_assignment(0)
}
