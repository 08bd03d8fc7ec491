//! A ten-individual pedigree at a biallelic disease locus.
//!
//! Founders (X1, X2, X5, X6) follow Hardy-Weinberg proportions for a disease
//! allele frequency of 0.2; every other individual inherits one allele from
//! each parent under Mendelian transmission. Individuals 7 and 9 are cousins,
//! which closes a loop through X10.

use crate::jtree::JunctionTree;
use crate::model::{Cpd, DiscreteNetwork, EvidenceSet, VarId, Variable};

pub const GENOTYPES: [&str; 3] = ["dd", "dD", "DD"];

/// Founder genotype frequencies for a disease allele frequency of 0.2.
pub const FOUNDER_PRIOR: [f64; 3] = [0.64, 0.32, 0.04];

/// Hardy-Weinberg genotype frequencies for disease allele frequency `p`.
pub fn founder_prior(p: f64) -> Vec<f64> {
    vec![(1.0 - p) * (1.0 - p), 2.0 * p * (1.0 - p), p * p]
}

/// Mendelian table `P(child | parent_a, parent_b)`, rows in the order
/// (dd,dd), (dd,dD), ..., (DD,DD).
pub fn mendelian_rows() -> Vec<Vec<f64>> {
    // Probability of transmitting D from each genotype.
    let t = [0.0, 0.5, 1.0];
    let mut rows = Vec::with_capacity(9);
    for a in t {
        for b in t {
            rows.push(vec![
                (1.0 - a) * (1.0 - b),
                a * (1.0 - b) + (1.0 - a) * b,
                a * b,
            ]);
        }
    }
    rows
}

/// `(child, parents)` pairs, 1-based as the individuals are numbered.
pub const PARENTS: [(usize, [usize; 2]); 6] = [
    (3, [1, 2]),
    (4, [1, 2]),
    (7, [3, 5]),
    (8, [3, 5]),
    (9, [4, 6]),
    (10, [7, 9]),
];

fn x(i: usize) -> VarId {
    VarId(i - 1)
}

pub fn network() -> DiscreteNetwork {
    let vars = (1..=10)
        .map(|i| Variable::new(i - 1, format!("X{i}"), &GENOTYPES))
        .collect();
    let mut cpds = Vec::new();
    for i in 1..=10 {
        match PARENTS.iter().find(|(c, _)| *c == i) {
            Some((_, [a, b])) => cpds.push(Cpd::new(x(i), vec![x(*a), x(*b)], mendelian_rows())),
            None => cpds.push(Cpd::prior(x(i), FOUNDER_PRIOR.to_vec())),
        }
    }
    DiscreteNetwork::new(vars, cpds).expect("pedigree network is valid")
}

/// Recessive-disease status: X2, X4, X8 and X10 are affected (DD), X7 is
/// unaffected (dd or dD), everyone else is unknown.
pub fn evidence(net: &DiscreteNetwork) -> EvidenceSet {
    let mut ev = EvidenceSet::new();
    for i in [2, 4, 8, 10] {
        ev.observe(net, x(i), 2).unwrap();
    }
    ev.set(net, x(7), [0, 1]).unwrap();
    ev
}

pub fn network_with_evidence() -> (DiscreteNetwork, EvidenceSet) {
    let net = network();
    let ev = evidence(&net);
    (net, ev)
}

/// The hand-built seven-cluster junction tree for this pedigree:
///
/// ```text
/// C0 {X1..X4} - C1 {X3,X4,X9} - C2 {X4,X6,X9}
///                     |
///               C3 {X3,X7,X9} - C4 {X7,X9,X10}
///                     |
///               C5 {X3,X5,X7} - C6 {X3,X5,X8}
/// ```
pub fn reference_junction_tree(net: &DiscreteNetwork) -> JunctionTree {
    let c = |ids: &[usize]| ids.iter().map(|&i| x(i)).collect::<Vec<_>>();
    let clusters = vec![
        c(&[1, 2, 3, 4]),
        c(&[3, 4, 9]),
        c(&[4, 6, 9]),
        c(&[3, 7, 9]),
        c(&[7, 9, 10]),
        c(&[3, 5, 7]),
        c(&[3, 5, 8]),
    ];
    let edges = vec![(0, 1), (1, 2), (1, 3), (3, 4), (3, 5), (5, 6)];
    JunctionTree::new(net, clusters, edges).expect("reference tree is valid")
}
