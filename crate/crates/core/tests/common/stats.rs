//! Goodness-of-fit helpers for sampler tests.

use exactbp::model::{DiscreteNetwork, EvidenceSet};
use exactbp::oracle;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{random_case, RandomCase};

/// Pearson goodness of fit of `draws` against the oracle joint posterior.
/// Cells with small expected counts are pooled. Returns the p-value.
pub fn joint_gof(net: &DiscreteNetwork, ev: &EvidenceSet, draws: &[Vec<usize>]) -> f64 {
    let joint = oracle::joint_table(net, ev).unwrap();
    let total = joint.sum();
    let mut counts = vec![0usize; joint.len()];
    for x in draws {
        let i = joint.index_of(x);
        assert!(
            joint.values()[i] > 0.0,
            "drew an impossible configuration {x:?}"
        );
        counts[i] += 1;
    }
    let n = draws.len() as f64;
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (c, p) in counts.iter().zip(joint.values()) {
        let e = n * p / total;
        if e == 0.0 {
            continue;
        }
        if e < 5.0 {
            pooled_obs += *c as f64;
            pooled_exp += e;
        } else {
            stat += (*c as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    assert!(cells >= 2);
    ChiSquared::new((cells - 1) as f64).unwrap().sf(stat)
}

/// A fixed random network with four variables and non-trivial evidence.
pub fn four_variable_case() -> RandomCase {
    (0u64..)
        .map(|seed| random_case(seed, 4))
        .find(|c| {
            c.net.len() == 4
                && !c.ev.is_empty()
                && c.net.ids().any(|u| !c.net.parents(u).is_empty())
                && oracle::evidence_probability(&c.net, &c.ev).unwrap() > 0.0
        })
        .unwrap()
}
