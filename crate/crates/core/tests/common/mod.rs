//! Random networks and evidence for property tests, and shared fixtures.
#![allow(dead_code)]

pub mod stats;
pub mod pedigree_messages;

use exactbp::model::{Cpd, DiscreteNetwork, EvidenceSet, VarId, Variable};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct RandomCase {
    pub net: DiscreteNetwork,
    pub ev: EvidenceSet,
}

/// Row of a random conditional. Some entries are zeroed so that
/// deterministic relations and impossible configurations show up.
fn random_row(rng: &mut ChaCha8Rng, card: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..card)
        .map(|_| {
            if rng.random_bool(0.15) {
                0.0
            } else {
                rng.random_range(0.01..1.0)
            }
        })
        .collect();
    if row.iter().all(|&x| x == 0.0) {
        let k = rng.random_range(0..card);
        row[k] = 1.0;
    }
    let total: f64 = row.iter().sum();
    row.iter().map(|x| x / total).collect()
}

/// A random DAG over `1..=max_vars` variables with 2 or 3 states each and
/// at most `max_parents` parents per variable. Variable ids are shuffled so
/// that parents do not always have smaller ids.
pub fn random_network(
    rng: &mut ChaCha8Rng,
    max_vars: usize,
    max_parents: usize,
) -> DiscreteNetwork {
    let p = rng.random_range(1..=max_vars);
    let cards: Vec<usize> = (0..p).map(|_| rng.random_range(2..=3)).collect();
    // Parents in topological position, then relabeled through `perm`.
    let mut perm: Vec<usize> = (0..p).collect();
    perm.shuffle(rng);
    let mut parents_topo: Vec<Vec<usize>> = Vec::with_capacity(p);
    for u in 0..p {
        let mut pa: Vec<usize> = (0..u).filter(|_| rng.random_bool(0.4)).collect();
        pa.shuffle(rng);
        pa.truncate(max_parents);
        parents_topo.push(pa);
    }
    let mut vars = vec![None; p];
    let mut cpds = Vec::with_capacity(p);
    for u in 0..p {
        let id = perm[u];
        let labels: Vec<String> = (0..cards[u]).map(|s| format!("s{s}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        vars[id] = Some(Variable::new(id, format!("V{id}"), &refs));
        let parents: Vec<VarId> = parents_topo[u].iter().map(|&w| VarId(perm[w])).collect();
        let rows: usize = parents_topo[u].iter().map(|&w| cards[w]).product();
        let table = (0..rows).map(|_| random_row(rng, cards[u])).collect();
        cpds.push(Cpd::new(VarId(id), parents, table));
    }
    DiscreteNetwork::new(vars.into_iter().map(Option::unwrap).collect(), cpds)
        .expect("generated network is valid")
}

/// Each variable is constrained with probability `rate` to a random
/// non-empty subset of its states.
pub fn random_evidence(rng: &mut ChaCha8Rng, net: &DiscreteNetwork, rate: f64) -> EvidenceSet {
    let mut ev = EvidenceSet::new();
    for u in net.ids() {
        if rng.random_bool(rate) {
            let card = net.cardinality(u);
            let mut states: Vec<usize> = (0..card).filter(|_| rng.random_bool(0.5)).collect();
            if states.is_empty() {
                states.push(rng.random_range(0..card));
            }
            ev.set(net, u, states).unwrap();
        }
    }
    ev
}

pub fn random_case(seed: u64, max_vars: usize) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = random_network(&mut rng, max_vars, 3);
    let ev = random_evidence(&mut rng, &net, 0.3);
    RandomCase { net, ev }
}

/// `|a - b| <= tol * max(|a|, |b|)`; equal infinities pass.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

pub fn all_rel_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| rel_close(*x, *y, tol))
}
