//! Brute-force reference computations by full enumeration.
//!
//! Nothing here uses the junction tree beyond reading its edge sets, so the
//! results are independent of message passing. Only small networks are
//! accepted.

use thiserror::Error;

use crate::factor::Factor;
use crate::jtree::{JtError, JunctionTree};
use crate::model::{DiscreteNetwork, EvidenceSet, VarId};

/// Largest number of joint configurations the oracle will enumerate.
pub const MAX_CONFIGURATIONS: usize = 10_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("enumeration needs more than {MAX_CONFIGURATIONS} configurations")]
    TooLarge,
    #[error("evidence has probability zero")]
    ImpossibleEvidence,
    #[error("clusters {0} and {1} are not adjacent")]
    NotAnEdge(usize, usize),
}

fn configurations(cards: &[usize]) -> Result<usize, OracleError> {
    cards
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c))
        .filter(|&n| n <= MAX_CONFIGURATIONS)
        .ok_or(OracleError::TooLarge)
}

/// Calls `f` on every assignment of `cards`, last position fastest.
fn for_each_assignment(cards: &[usize], mut f: impl FnMut(&[usize])) {
    if cards.contains(&0) {
        return;
    }
    let mut a = vec![0; cards.len()];
    loop {
        f(&a);
        let mut k = cards.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            a[k] += 1;
            if a[k] < cards[k] {
                break;
            }
            a[k] = 0;
        }
    }
}

fn all_cards(net: &DiscreteNetwork) -> Vec<usize> {
    net.ids().map(|u| net.cardinality(u)).collect()
}

/// `P(x) · 1_E(x)` over every variable, ordered by id.
pub fn joint_table(net: &DiscreteNetwork, ev: &EvidenceSet) -> Result<Factor, OracleError> {
    let cards = all_cards(net);
    let n = configurations(&cards)?;
    let mut values = Vec::with_capacity(n);
    for_each_assignment(&cards, |x| {
        values.push(if ev.admits(x) {
            net.joint_probability(x)
        } else {
            0.0
        });
    });
    let scope: Vec<(VarId, usize)> = net.ids().zip(cards).collect();
    Ok(Factor::new(&scope, values).expect("scope is canonical"))
}

/// `P(E)`.
pub fn evidence_probability(net: &DiscreteNetwork, ev: &EvidenceSet) -> Result<f64, OracleError> {
    Ok(joint_table(net, ev)?.sum())
}

/// Posterior of every variable given the evidence.
pub fn marginals(net: &DiscreteNetwork, ev: &EvidenceSet) -> Result<Vec<Vec<f64>>, OracleError> {
    let cards = all_cards(net);
    configurations(&cards)?;
    let mut out: Vec<Vec<f64>> = cards.iter().map(|&c| vec![0.0; c]).collect();
    let mut total = 0.0;
    for_each_assignment(&cards, |x| {
        if ev.admits(x) {
            let p = net.joint_probability(x);
            total += p;
            for (u, &s) in x.iter().enumerate() {
                out[u][s] += p;
            }
        }
    });
    if total <= 0.0 {
        return Err(OracleError::ImpossibleEvidence);
    }
    for row in &mut out {
        for p in row.iter_mut() {
            *p /= total;
        }
    }
    Ok(out)
}

/// Normalized joint posterior of `vars` (sorted by id in the result).
pub fn joint_marginal(
    net: &DiscreteNetwork,
    ev: &EvidenceSet,
    vars: &[VarId],
) -> Result<Factor, OracleError> {
    let mut vars = vars.to_vec();
    vars.sort_unstable();
    vars.dedup();
    let table = joint_table(net, ev)?;
    let total = table.sum();
    if total <= 0.0 {
        return Err(OracleError::ImpossibleEvidence);
    }
    let m = table.sum_onto(&vars).expect("variables are in the network");
    let values = m.values().iter().map(|p| p / total).collect();
    Ok(Factor::new(&m.scope_with_cards(), values).expect("same scope"))
}

/// First maximizer of `P(x) · 1_E(x)` in enumeration order, with its value.
pub fn map_assignment(
    net: &DiscreteNetwork,
    ev: &EvidenceSet,
) -> Result<(Vec<usize>, f64), OracleError> {
    let cards = all_cards(net);
    configurations(&cards)?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_assignment(&cards, |x| {
        if ev.admits(x) {
            let p = net.joint_probability(x);
            if best.as_ref().is_none_or(|(_, b)| p > *b) {
                best = Some((x.to_vec(), p));
            }
        }
    });
    match best {
        Some((a, p)) if p > 0.0 => Ok((a, p)),
        _ => Err(OracleError::ImpossibleEvidence),
    }
}

/// The message along `from -> to` straight from its definition: the product
/// of `K_u` over the upstream variables `U`, summed over `U` minus the
/// separator, enumerated over `U ∪ S` and returned over `S`.
pub fn message(
    net: &DiscreteNetwork,
    jt: &JunctionTree,
    ev: &EvidenceSet,
    from: usize,
    to: usize,
) -> Result<Factor, OracleError> {
    let ctx = jt.edge_context(from, to).map_err(|e| match e {
        JtError::NotAnEdge(a, b) => OracleError::NotAnEdge(a, b),
        _ => OracleError::NotAnEdge(from, to),
    })?;
    let mut vars: Vec<VarId> = ctx.upstream.iter().chain(&ctx.separator).copied().collect();
    vars.sort_unstable();
    vars.dedup();
    let cards: Vec<usize> = vars.iter().map(|&v| net.cardinality(v)).collect();
    configurations(&cards)?;

    let sep_cards: Vec<usize> = ctx.separator.iter().map(|&v| net.cardinality(v)).collect();
    let sep_pos: Vec<usize> = ctx
        .separator
        .iter()
        .map(|v| vars.binary_search(v).unwrap())
        .collect();
    let mut out = vec![0.0; sep_cards.iter().product()];
    let mut full = vec![0usize; net.len()];
    for_each_assignment(&cards, |x| {
        for (v, &s) in vars.iter().zip(x) {
            full[v.0] = s;
        }
        let mut p = 1.0;
        for &u in &ctx.upstream {
            if !ev.allows(u, full[u.0]) {
                p = 0.0;
                break;
            }
            let pa: Vec<usize> = net.parents(u).iter().map(|w| full[w.0]).collect();
            p *= net.conditional(u, &pa, full[u.0]);
        }
        let mut idx = 0;
        for (k, &pos) in sep_pos.iter().enumerate() {
            idx = idx * sep_cards[k] + x[pos];
        }
        out[idx] += p;
    });
    let scope: Vec<(VarId, usize)> = ctx.separator.iter().copied().zip(sep_cards).collect();
    Ok(Factor::new(&scope, out).expect("separator scope is canonical"))
}
