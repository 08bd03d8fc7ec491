//! Discrete Bayesian networks and evidence sets.
//!
//! A network is a list of variables, each with an ordered list of state
//! labels, and exactly one conditional probability table per variable. The
//! joint law is the product of the conditionals over a DAG.
//!
//! CPD rows enumerate parent assignments in row-major order over the listed
//! parents (the last listed parent varies fastest); each row holds one
//! probability per child state.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

/// Tolerance on CPD row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Index of a variable inside its network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new(id: usize, name: impl Into<String>, states: &[&str]) -> Self {
        Variable {
            id: VarId(id),
            name: name.into(),
            states: states.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Conditional distribution `P(child | parents)` stored as a flat row-major
/// table: `table[row * child_card + state]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpd {
    pub child: VarId,
    pub parents: Vec<VarId>,
    pub table: Vec<f64>,
}

impl Cpd {
    pub fn new(child: VarId, parents: Vec<VarId>, rows: Vec<Vec<f64>>) -> Self {
        Cpd {
            child,
            parents,
            table: rows.into_iter().flatten().collect(),
        }
    }

    /// A CPD with no parents.
    pub fn prior(child: VarId, probs: Vec<f64>) -> Self {
        Cpd {
            child,
            parents: Vec::new(),
            table: probs,
        }
    }

    pub fn rows(&self, child_card: usize) -> impl Iterator<Item = &[f64]> {
        self.table.chunks(child_card.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    IdMismatch { position: usize },
    EmptyDomain,
    DuplicateState { label: String },
    DuplicateName,
    MissingCpd,
    DuplicateCpd,
    UnknownChild,
    DanglingParent { parent: usize },
    SelfParent,
    DuplicateParent { parent: VarId },
    TableShape { expected: Option<usize>, got: usize },
    BadProbability { row: usize, state: usize },
    RowSum { row: usize, sum: f64 },
    Cycle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub var: VarId,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.var;
        match &self.kind {
            ViolationKind::IdMismatch { position } => {
                write!(f, "variable {v}: listed at position {position}")
            }
            ViolationKind::EmptyDomain => write!(f, "variable {v}: empty state list"),
            ViolationKind::DuplicateState { label } => {
                write!(f, "variable {v}: duplicate state '{label}'")
            }
            ViolationKind::DuplicateName => write!(f, "variable {v}: duplicate name"),
            ViolationKind::MissingCpd => write!(f, "variable {v}: no cpd"),
            ViolationKind::DuplicateCpd => write!(f, "variable {v}: more than one cpd"),
            ViolationKind::UnknownChild => write!(f, "cpd for unknown variable {v}"),
            ViolationKind::DanglingParent { parent } => {
                write!(f, "variable {v}: unknown parent #{parent}")
            }
            ViolationKind::SelfParent => write!(f, "variable {v}: is its own parent"),
            ViolationKind::DuplicateParent { parent } => {
                write!(f, "variable {v}: parent {parent} listed twice")
            }
            ViolationKind::TableShape { expected, got } => match expected {
                Some(e) => write!(f, "variable {v}: table has {got} entries, expected {e}"),
                None => write!(f, "variable {v}: table size overflows"),
            },
            ViolationKind::BadProbability { row, state } => {
                write!(f, "variable {v}: row {row} state {state} outside [0, 1]")
            }
            ViolationKind::RowSum { row, sum } => {
                write!(f, "variable {v}: row {row} sums to {sum}")
            }
            ViolationKind::Cycle => write!(f, "variable {v}: lies on a directed cycle"),
        }
    }
}

/// Outcome of network validation. Empty means the network is well formed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, var: VarId, kind: ViolationKind) {
        self.violations.push(Violation { var, kind });
    }

    pub fn has(&self, pred: impl Fn(&ViolationKind) -> bool) -> bool {
        self.violations.iter().any(|v| pred(&v.kind))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid network:\n{0}")]
    Invalid(ValidationReport),
    #[error("unknown variable {0}")]
    UnknownVariable(VarId),
    #[error("unknown variable '{0}'")]
    UnknownVariableName(String),
    #[error("variable '{var}' has no state '{state}'")]
    UnknownState { var: String, state: String },
    #[error("state index {state} out of range for variable {var}")]
    StateOutOfRange { var: VarId, state: usize },
}

/// A discrete Bayesian network. Variable ids equal their position in
/// `variables`; `cpds[u]` is the conditional of variable `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteNetwork {
    variables: Vec<Variable>,
    cpds: Vec<Cpd>,
}

impl DiscreteNetwork {
    /// Builds and validates a network. CPDs may be given in any order.
    pub fn new(variables: Vec<Variable>, cpds: Vec<Cpd>) -> Result<Self, ModelError> {
        let report = validate_parts(&variables, &cpds);
        if !report.is_ok() {
            return Err(ModelError::Invalid(report));
        }
        let mut cpds = cpds;
        cpds.sort_by_key(|c| c.child);
        Ok(DiscreteNetwork { variables, cpds })
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn cpds(&self) -> &[Cpd] {
        &self.cpds
    }

    pub fn cpd(&self, id: VarId) -> &Cpd {
        &self.cpds[id.0]
    }

    pub fn cardinality(&self, id: VarId) -> usize {
        self.variables[id.0].states.len()
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.variables.len()).map(VarId)
    }

    pub fn find(&self, name: &str) -> Option<VarId> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .map(VarId)
    }

    pub fn parents(&self, id: VarId) -> &[VarId] {
        &self.cpds[id.0].parents
    }

    /// `fa(u) = pa(u) ∪ {u}`, sorted by id.
    pub fn family(&self, id: VarId) -> Result<Vec<VarId>, ModelError> {
        if id.0 >= self.len() {
            return Err(ModelError::UnknownVariable(id));
        }
        let mut fam: Vec<VarId> = self.parents(id).to_vec();
        fam.push(id);
        fam.sort();
        Ok(fam)
    }

    /// Topological order of the variables (Kahn, smallest id first).
    pub fn topological_order(&self) -> Vec<VarId> {
        topological_order(self.len(), |u| self.cpds[u].parents.iter().map(|p| p.0))
            .expect("validated network is acyclic")
    }

    /// `P(child = state | parents = parent_states)`.
    pub fn conditional(&self, child: VarId, parent_states: &[usize], state: usize) -> f64 {
        let cpd = &self.cpds[child.0];
        let mut row = 0;
        for (p, &s) in cpd.parents.iter().zip(parent_states) {
            row = row * self.cardinality(*p) + s;
        }
        cpd.table[row * self.cardinality(child) + state]
    }

    /// Product of all conditionals at a full assignment (state index per
    /// variable, in id order).
    pub fn joint_probability(&self, assignment: &[usize]) -> f64 {
        let mut p = 1.0;
        let mut parent_states = Vec::new();
        for u in self.ids() {
            parent_states.clear();
            parent_states.extend(self.parents(u).iter().map(|q| assignment[q.0]));
            p *= self.conditional(u, &parent_states, assignment[u.0]);
        }
        p
    }
}

/// Validates raw parts without constructing a network.
pub fn validate_parts(variables: &[Variable], cpds: &[Cpd]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let p = variables.len();

    let mut names = HashSet::new();
    for (pos, var) in variables.iter().enumerate() {
        if var.id.0 != pos {
            report.push(var.id, ViolationKind::IdMismatch { position: pos });
        }
        if var.states.is_empty() {
            report.push(var.id, ViolationKind::EmptyDomain);
        }
        let mut seen = HashSet::new();
        for s in &var.states {
            if !seen.insert(s.as_str()) {
                report.push(var.id, ViolationKind::DuplicateState { label: s.clone() });
            }
        }
        if !names.insert(var.name.as_str()) {
            report.push(var.id, ViolationKind::DuplicateName);
        }
    }

    let mut by_child: Vec<Option<&Cpd>> = vec![None; p];
    for cpd in cpds {
        match by_child.get_mut(cpd.child.0) {
            None => report.push(cpd.child, ViolationKind::UnknownChild),
            Some(slot @ None) => *slot = Some(cpd),
            Some(Some(_)) => report.push(cpd.child, ViolationKind::DuplicateCpd),
        }
    }

    let mut structurally_sound = report.is_ok();
    for (u, slot) in by_child.iter().enumerate() {
        let id = VarId(u);
        let Some(cpd) = slot else {
            report.push(id, ViolationKind::MissingCpd);
            structurally_sound = false;
            continue;
        };
        let mut parent_ok = true;
        let mut seen = BTreeSet::new();
        for &q in &cpd.parents {
            if q.0 >= p {
                report.push(id, ViolationKind::DanglingParent { parent: q.0 });
                parent_ok = false;
            } else if q == id {
                report.push(id, ViolationKind::SelfParent);
                parent_ok = false;
            } else if !seen.insert(q) {
                report.push(id, ViolationKind::DuplicateParent { parent: q });
                parent_ok = false;
            }
        }
        if !parent_ok {
            structurally_sound = false;
            continue;
        }
        let child_card = variables[u].states.len();
        let expected = cpd.parents.iter().try_fold(child_card, |acc, q| {
            acc.checked_mul(variables[q.0].states.len())
        });
        if expected != Some(cpd.table.len()) {
            report.push(
                id,
                ViolationKind::TableShape {
                    expected,
                    got: cpd.table.len(),
                },
            );
            continue;
        }
        if child_card == 0 {
            continue;
        }
        for (row, probs) in cpd.table.chunks(child_card).enumerate() {
            let mut bad = false;
            for (state, &x) in probs.iter().enumerate() {
                if !(0.0..=1.0).contains(&x) {
                    report.push(id, ViolationKind::BadProbability { row, state });
                    bad = true;
                }
            }
            let sum: f64 = probs.iter().sum();
            if !bad && (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                report.push(id, ViolationKind::RowSum { row, sum });
            }
        }
    }

    if structurally_sound {
        let parents_of = |u: usize| by_child[u].unwrap().parents.iter().map(|q| q.0);
        if let Err(cyclic) = topological_order(p, parents_of) {
            for u in cyclic {
                report.push(u, ViolationKind::Cycle);
            }
        }
    }
    report
}

/// Kahn's algorithm. On failure returns the variables that could not be
/// ordered (those on or downstream of a cycle are pruned to the cycle core).
fn topological_order<I>(p: usize, parents: impl Fn(usize) -> I) -> Result<Vec<VarId>, Vec<VarId>>
where
    I: Iterator<Item = usize>,
{
    let mut indegree = vec![0usize; p];
    let mut children = vec![Vec::new(); p];
    for (u, d) in indegree.iter_mut().enumerate() {
        for q in parents(u) {
            *d += 1;
            children[q].push(u);
        }
    }
    let mut ready: BTreeSet<usize> = (0..p).filter(|&u| indegree[u] == 0).collect();
    let mut order = Vec::with_capacity(p);
    while let Some(u) = ready.pop_first() {
        order.push(VarId(u));
        for &c in &children[u] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == p {
        return Ok(order);
    }
    // Strip nodes that merely hang off a cycle: repeatedly drop leftover
    // nodes without leftover children.
    let mut left: BTreeSet<usize> = (0..p).filter(|&u| indegree[u] > 0).collect();
    loop {
        let sinks: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&u| !children[u].iter().any(|c| left.contains(c)))
            .collect();
        if sinks.is_empty() {
            break;
        }
        for s in sinks {
            left.remove(&s);
        }
    }
    Err(left.into_iter().map(VarId).collect())
}

pub fn validate_network(net: &DiscreteNetwork) -> ValidationReport {
    validate_parts(&net.variables, &net.cpds)
}

pub fn family(net: &DiscreteNetwork, u: VarId) -> Result<Vec<VarId>, ModelError> {
    net.family(u)
}

/// Allowed-state subsets per variable. Variables without an entry are
/// unconstrained. An empty subset makes the evidence impossible.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvidenceSet {
    allowed: BTreeMap<VarId, Vec<usize>>,
}

impl EvidenceSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Restricts `var` to `states` (state indices). Repeated calls replace
    /// the earlier subset.
    pub fn set(
        &mut self,
        net: &DiscreteNetwork,
        var: VarId,
        states: impl IntoIterator<Item = usize>,
    ) -> Result<(), ModelError> {
        if var.0 >= net.len() {
            return Err(ModelError::UnknownVariable(var));
        }
        let card = net.cardinality(var);
        let mut subset: Vec<usize> = states.into_iter().collect();
        if let Some(&bad) = subset.iter().find(|&&s| s >= card) {
            return Err(ModelError::StateOutOfRange { var, state: bad });
        }
        subset.sort_unstable();
        subset.dedup();
        self.allowed.insert(var, subset);
        Ok(())
    }

    /// Same as [`EvidenceSet::set`] but with names and labels.
    pub fn set_labels<S: AsRef<str>>(
        &mut self,
        net: &DiscreteNetwork,
        var: &str,
        labels: &[S],
    ) -> Result<(), ModelError> {
        let id = net
            .find(var)
            .ok_or_else(|| ModelError::UnknownVariableName(var.to_string()))?;
        let v = net.variable(id);
        let mut states = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            states.push(v.state_index(l).ok_or_else(|| ModelError::UnknownState {
                var: var.to_string(),
                state: l.to_string(),
            })?);
        }
        self.set(net, id, states)
    }

    pub fn observe(
        &mut self,
        net: &DiscreteNetwork,
        var: VarId,
        state: usize,
    ) -> Result<(), ModelError> {
        self.set(net, var, [state])
    }

    pub fn allowed(&self, var: VarId) -> Option<&[usize]> {
        self.allowed.get(&var).map(Vec::as_slice)
    }

    pub fn allows(&self, var: VarId, state: usize) -> bool {
        match self.allowed.get(&var) {
            Some(s) => s.binary_search(&state).is_ok(),
            None => true,
        }
    }

    /// True when every variable is consistent with the evidence.
    pub fn admits(&self, assignment: &[usize]) -> bool {
        self.allowed
            .iter()
            .all(|(v, s)| s.binary_search(&assignment[v.0]).is_ok())
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &[usize])> {
        self.allowed.iter().map(|(v, s)| (*v, s.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.allowed.is_empty()
    }
}
