//! JSON formats for networks, evidence and junction trees.
//!
//! Network:
//!
//! ```json
//! {"variables": [{"name": "A", "states": ["0", "1"]}, ...],
//!  "cpds": [{"child": "B", "parents": ["A"], "table": [[0.9, 0.1], [0.2, 0.8]]}, ...]}
//! ```
//!
//! Table rows are indexed by parent configurations, last listed parent
//! fastest. Evidence maps a variable name to one state label or to an array
//! of allowed labels. A junction tree lists clusters as arrays of names,
//! edges as index pairs and, optionally, the cluster each variable is
//! assigned to.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jtree::{validate_junction_tree, JtError, JunctionTree};
use crate::model::{
    Cpd, DiscreteNetwork, EvidenceSet, ModelError, ValidationReport, VarId, Variable,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("variable '{var}' has no state '{state}'")]
    UnknownState { var: String, state: String },
    #[error("cpd of '{child}': row {row} has {got} entries, expected {expected}")]
    RowLength {
        child: String,
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("junction tree assignment is missing variable '{0}'")]
    MissingAssignment(String),
    #[error("invalid network:\n{0}")]
    InvalidNetwork(ValidationReport),
    #[error(transparent)]
    InvalidTree(JtError),
}

impl IoError {
    /// Whether the input parsed but describes an invalid model, as opposed to
    /// being malformed or referring to unknown names.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            IoError::RowLength { .. } | IoError::InvalidNetwork(_) | IoError::InvalidTree(_)
        )
    }
}

impl From<ModelError> for IoError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Invalid(r) => IoError::InvalidNetwork(r),
            ModelError::UnknownVariableName(n) => IoError::UnknownVariable(n),
            ModelError::UnknownState { var, state } => IoError::UnknownState { var, state },
            ModelError::UnknownVariable(v) => IoError::UnknownVariable(v.to_string()),
            ModelError::StateOutOfRange { var, state } => IoError::UnknownState {
                var: var.to_string(),
                state: state.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableEntry {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpdEntry {
    pub child: String,
    #[serde(default)]
    pub parents: Vec<String>,
    pub table: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub variables: Vec<VariableEntry>,
    pub cpds: Vec<CpdEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionTreeFile {
    pub clusters: Vec<Vec<String>>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<BTreeMap<String, usize>>,
}

fn lookup(names: &BTreeMap<&str, usize>, name: &str) -> Result<VarId, IoError> {
    names
        .get(name)
        .map(|&i| VarId(i))
        .ok_or_else(|| IoError::UnknownVariable(name.to_string()))
}

impl NetworkFile {
    pub fn into_network(self) -> Result<DiscreteNetwork, IoError> {
        let mut names = BTreeMap::new();
        for (i, v) in self.variables.iter().enumerate() {
            names.entry(v.name.as_str()).or_insert(i);
        }
        let mut cpds = Vec::with_capacity(self.cpds.len());
        for c in &self.cpds {
            let child = lookup(&names, &c.child)?;
            let parents = c
                .parents
                .iter()
                .map(|p| lookup(&names, p))
                .collect::<Result<Vec<_>, _>>()?;
            let expected = self.variables[child.0].states.len();
            if let Some((row, r)) = c
                .table
                .iter()
                .enumerate()
                .find(|(_, r)| r.len() != expected)
            {
                return Err(IoError::RowLength {
                    child: c.child.clone(),
                    row,
                    expected,
                    got: r.len(),
                });
            }
            cpds.push(Cpd::new(child, parents, c.table.clone()));
        }
        let vars = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let labels: Vec<&str> = v.states.iter().map(String::as_str).collect();
                Variable::new(i, v.name.clone(), &labels)
            })
            .collect();
        Ok(DiscreteNetwork::new(vars, cpds)?)
    }

    pub fn from_network(net: &DiscreteNetwork) -> Self {
        let name = |v: VarId| net.variable(v).name.clone();
        NetworkFile {
            variables: net
                .variables()
                .iter()
                .map(|v| VariableEntry {
                    name: v.name.clone(),
                    states: v.states.clone(),
                })
                .collect(),
            cpds: net
                .cpds()
                .iter()
                .map(|c| CpdEntry {
                    child: name(c.child),
                    parents: c.parents.iter().map(|&p| name(p)).collect(),
                    table: c
                        .rows(net.cardinality(c.child))
                        .map(<[f64]>::to_vec)
                        .collect(),
                })
                .collect(),
        }
    }
}

pub fn parse_network(text: &str) -> Result<DiscreteNetwork, IoError> {
    let file: NetworkFile = serde_json::from_str(text)?;
    file.into_network()
}

pub fn network_to_json(net: &DiscreteNetwork) -> String {
    serde_json::to_string_pretty(&NetworkFile::from_network(net)).expect("network serializes")
}

pub fn parse_evidence(net: &DiscreteNetwork, text: &str) -> Result<EvidenceSet, IoError> {
    let map: BTreeMap<String, StateSpec> = serde_json::from_str(text)?;
    let mut ev = EvidenceSet::new();
    for (name, spec) in map {
        let labels = match spec {
            StateSpec::One(s) => vec![s],
            StateSpec::Many(v) => v,
        };
        ev.set_labels(net, &name, &labels)?;
    }
    Ok(ev)
}

pub fn evidence_to_json(net: &DiscreteNetwork, ev: &EvidenceSet) -> String {
    let map: BTreeMap<String, StateSpec> = ev
        .iter()
        .map(|(v, states)| {
            let var = net.variable(v);
            let labels: Vec<String> = states.iter().map(|&s| var.states[s].clone()).collect();
            let spec = match labels.as_slice() {
                [one] => StateSpec::One(one.clone()),
                _ => StateSpec::Many(labels),
            };
            (var.name.clone(), spec)
        })
        .collect();
    serde_json::to_string_pretty(&map).expect("evidence serializes")
}

/// Parses and validates a junction tree for `net`. Without an explicit
/// assignment each variable goes to its smallest covering cluster.
pub fn parse_junction_tree(net: &DiscreteNetwork, text: &str) -> Result<JunctionTree, IoError> {
    let jt = parse_junction_tree_unchecked(net, text)?;
    let report = validate_junction_tree(net, &jt);
    if report.is_ok() {
        Ok(jt)
    } else {
        Err(IoError::InvalidTree(JtError::Invalid(report)))
    }
}

/// Resolves names but does not check the tree conditions. A variable whose
/// family no cluster covers is provisionally assigned to cluster 0.
pub fn parse_junction_tree_unchecked(
    net: &DiscreteNetwork,
    text: &str,
) -> Result<JunctionTree, IoError> {
    let file: JunctionTreeFile = serde_json::from_str(text)?;
    let names: BTreeMap<&str, usize> = net
        .variables()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let clusters = file
        .clusters
        .iter()
        .map(|c| {
            c.iter()
                .map(|n| lookup(&names, n))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let edges = file.edges.iter().map(|e| (e[0], e[1])).collect();
    let assignment = match file.assignment {
        Some(map) => {
            for n in map.keys() {
                lookup(&names, n)?;
            }
            net.variables()
                .iter()
                .map(|v| {
                    map.get(&v.name)
                        .copied()
                        .ok_or_else(|| IoError::MissingAssignment(v.name.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        None => {
            let sorted: Vec<Vec<VarId>> = clusters
                .iter()
                .map(|c| {
                    let mut c = c.clone();
                    c.sort_unstable();
                    c.dedup();
                    c
                })
                .collect();
            net.ids()
                .map(|u| assign_one(net, &sorted, u).unwrap_or(0))
                .collect()
        }
    };
    Ok(JunctionTree::unchecked(clusters, edges, assignment))
}

fn assign_one(net: &DiscreteNetwork, clusters: &[Vec<VarId>], u: VarId) -> Option<usize> {
    let fam = net.family(u).ok()?;
    clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| fam.iter().all(|v| c.binary_search(v).is_ok()))
        .min_by_key(|(i, c)| (c.len(), *i))
        .map(|(i, _)| i)
}

pub fn junction_tree_to_json(net: &DiscreteNetwork, jt: &JunctionTree) -> String {
    let name = |v: &VarId| net.variable(*v).name.clone();
    let file = JunctionTreeFile {
        clusters: jt
            .clusters()
            .iter()
            .map(|c| c.iter().map(name).collect())
            .collect(),
        edges: jt.edges().iter().map(|&(a, b)| [a, b]).collect(),
        assignment: Some(net.ids().map(|u| (name(&u), jt.cluster_of(u))).collect()),
    };
    serde_json::to_string_pretty(&file).expect("junction tree serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pedigree;

    const TINY: &str = r#"{
        "variables": [{"name": "A", "states": ["no", "yes"]}, {"name": "B", "states": ["lo", "mid", "hi"]}],
        "cpds": [
            {"child": "B", "parents": ["A"], "table": [[0.2, 0.3, 0.5], [0.6, 0.4, 0.0]]},
            {"child": "A", "table": [[0.7, 0.3]]}
        ]
    }"#;

    #[test]
    fn parses_a_small_network() {
        let net = parse_network(TINY).unwrap();
        assert_eq!(net.len(), 2);
        assert_eq!(net.parents(VarId(1)), &[VarId(0)]);
        assert_eq!(net.conditional(VarId(1), &[1], 0), 0.6);
        assert_eq!(net.conditional(VarId(0), &[], 1), 0.3);
    }

    #[test]
    fn round_trip() {
        let net = pedigree::network();
        let again = parse_network(&network_to_json(&net)).unwrap();
        assert_eq!(again, net);
        let tiny = parse_network(TINY).unwrap();
        assert_eq!(parse_network(&network_to_json(&tiny)).unwrap(), tiny);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err =
            parse_network("{\n  \"variables\": [\n    {\"name\": \"A\",, }\n  ]\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(!err.is_validation());
    }

    #[test]
    fn unknown_names_are_reported() {
        let bad = TINY.replace("\"parents\": [\"A\"]", "\"parents\": [\"Q\"]");
        assert!(matches!(parse_network(&bad), Err(IoError::UnknownVariable(n)) if n == "Q"));
        let net = parse_network(TINY).unwrap();
        assert!(
            matches!(parse_evidence(&net, r#"{"C": "x"}"#), Err(IoError::UnknownVariable(n)) if n == "C")
        );
        let err = parse_evidence(&net, r#"{"B": ["lo", "max"]}"#).unwrap_err();
        assert!(
            matches!(&err, IoError::UnknownState { var, state } if var == "B" && state == "max")
        );
    }

    #[test]
    fn invalid_network_is_a_validation_error() {
        let bad = TINY.replace("[0.7, 0.3]", "[0.7, 0.2]");
        let err = parse_network(&bad).unwrap_err();
        assert!(err.is_validation());
        let ragged = TINY.replace("[0.6, 0.4, 0.0]", "[0.6, 0.4]");
        assert!(matches!(
            parse_network(&ragged),
            Err(IoError::RowLength { row: 1, .. })
        ));
    }

    #[test]
    fn evidence_forms() {
        let net = pedigree::network();
        let ev = parse_evidence(&net, r#"{"X2": "DD", "X7": ["dd", "dD"]}"#).unwrap();
        assert_eq!(ev.allowed(VarId(1)), Some(&[2usize][..]));
        assert_eq!(ev.allowed(VarId(6)), Some(&[0usize, 1][..]));
        assert_eq!(
            parse_evidence(&net, &evidence_to_json(&net, &ev)).unwrap(),
            ev
        );
        let empty = parse_evidence(&net, r#"{"X1": []}"#).unwrap();
        assert_eq!(empty.allowed(VarId(0)), Some(&[][..]));
    }

    #[test]
    fn junction_tree_round_trip() {
        let net = pedigree::network();
        let jt = pedigree::reference_junction_tree(&net);
        let text = junction_tree_to_json(&net, &jt);
        assert_eq!(parse_junction_tree(&net, &text).unwrap(), jt);
        let no_assignment =
            r#"{"clusters": [["X1","X2","X3","X4","X5","X6","X7","X8","X9","X10"]], "edges": []}"#;
        assert_eq!(parse_junction_tree(&net, no_assignment).unwrap().len(), 1);
        let broken = r#"{"clusters": [["X1"], ["X2"]], "edges": [[0, 1]]}"#;
        assert!(parse_junction_tree(&net, broken)
            .unwrap_err()
            .is_validation());
    }
}
