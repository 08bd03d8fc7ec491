//! Two-state precipitation HMM with Poisson emissions: direct forward and
//! backward recursions, posterior decoding, simulation, and a bridge to the
//! general network engine.
//!
//! Days are indexed from 0 in code. Forward and backward tables are stored
//! per day as a column rescaled to a maximum of 1 plus the absolute `ln` of
//! the scale, so `F_i(s) = forward[i][s] * exp(forward_log_scale[i])`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::jtree::JunctionTree;
use crate::model::{Cpd, DiscreteNetwork, EvidenceSet, VarId, Variable};

/// Largest rainfall count representable in the network bridge.
pub const EMISSION_CUTOFF: usize = 40;

pub const LOW: usize = 0;
pub const HIGH: usize = 1;

const STOCHASTIC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum HmmError {
    #[error("invalid HMM: {0}")]
    BadSpec(String),
    #[error("expected {expected} observations, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("day {day}: count {value} exceeds the emission cutoff {EMISSION_CUTOFF}")]
    BeyondCutoff { day: usize, value: u64 },
    #[error("observations have zero likelihood")]
    ZeroLikelihood,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HmmSpec {
    pub states: Vec<String>,
    /// Distribution of the first hidden state.
    pub initial: Vec<f64>,
    /// `transition[r][s] = P(S_i = s | S_{i-1} = r)`.
    pub transition: Vec<Vec<f64>>,
    /// Poisson rate of each state.
    pub rates: Vec<f64>,
    /// Number of days.
    pub n: usize,
}

impl HmmSpec {
    pub fn new(
        states: Vec<String>,
        initial: Vec<f64>,
        transition: Vec<Vec<f64>>,
        rates: Vec<f64>,
        n: usize,
    ) -> Result<Self, HmmError> {
        let spec = HmmSpec {
            states,
            initial,
            transition,
            rates,
            n,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Low/high pressure model: the chain starts in H, leaves L with
    /// probability 0.1 and H with probability 0.3; rainfall is Poisson with
    /// mean 3.0 under L and 0.5 under H.
    pub fn precipitation(n: usize) -> Self {
        HmmSpec::new(
            vec!["L".into(), "H".into()],
            vec![0.0, 1.0],
            vec![vec![0.9, 0.1], vec![0.3, 0.7]],
            vec![3.0, 0.5],
            n,
        )
        .expect("precipitation model is valid")
    }

    pub fn with_initial(mut self, initial: Vec<f64>) -> Result<Self, HmmError> {
        self.initial = initial;
        self.validate()?;
        Ok(self)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn validate(&self) -> Result<(), HmmError> {
        let k = self.states.len();
        let bad = |m: &str| Err(HmmError::BadSpec(m.to_string()));
        if k == 0 {
            return bad("no hidden states");
        }
        if self.n == 0 {
            return bad("horizon must be at least one day");
        }
        if self.initial.len() != k || self.rates.len() != k || self.transition.len() != k {
            return bad("dimension mismatch");
        }
        let stochastic = |row: &[f64]| {
            row.len() == k
                && row.iter().all(|p| p.is_finite() && *p >= 0.0)
                && (row.iter().sum::<f64>() - 1.0).abs() <= STOCHASTIC_TOLERANCE
        };
        if !stochastic(&self.initial) {
            return bad("initial distribution is not a probability vector");
        }
        if !self.transition.iter().all(|r| stochastic(r)) {
            return bad("transition rows must sum to 1");
        }
        if !self.rates.iter().all(|l| l.is_finite() && *l > 0.0) {
            return bad("emission rates must be positive");
        }
        Ok(())
    }

    /// Poisson probability `e_s(k)`.
    pub fn emission(&self, s: usize, k: u64) -> f64 {
        poisson_pmf(self.rates[s], k)
    }

    fn check_len(&self, y: &[u64]) -> Result<(), HmmError> {
        if y.len() != self.n {
            return Err(HmmError::LengthMismatch {
                expected: self.n,
                got: y.len(),
            });
        }
        Ok(())
    }
}

pub fn poisson_pmf(rate: f64, k: u64) -> f64 {
    let mut p = (-rate).exp();
    for i in 1..=k {
        p *= rate / i as f64;
        if p == 0.0 {
            break;
        }
    }
    p
}

/// Rescales `col` to a maximum of 1 and returns `ln` of the factor removed.
/// An all-zero column is left alone.
fn rescale(col: &mut [f64]) -> f64 {
    let m = col.iter().copied().fold(0.0, f64::max);
    if m > 0.0 {
        for x in col.iter_mut() {
            *x /= m;
        }
        m.ln()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardBackward {
    /// Rescaled `F_i = P(S_i, Y_{0..=i})`.
    pub forward: Vec<Vec<f64>>,
    pub forward_log_scale: Vec<f64>,
    /// Rescaled `B_i = P(Y_{i+1..n} | S_i)`.
    pub backward: Vec<Vec<f64>>,
    pub backward_log_scale: Vec<f64>,
}

/// Forward table: `F_0(s) = μ(s) e_s(y_0)`,
/// `F_i(s) = Σ_r F_{i-1}(r) π(r,s) e_s(y_i)`.
pub fn forward(spec: &HmmSpec, y: &[u64]) -> Result<(Vec<Vec<f64>>, Vec<f64>), HmmError> {
    spec.check_len(y)?;
    let k = spec.num_states();
    let mut table = Vec::with_capacity(y.len());
    let mut scales = Vec::with_capacity(y.len());
    let mut col: Vec<f64> = (0..k)
        .map(|s| spec.initial[s] * spec.emission(s, y[0]))
        .collect();
    let mut scale = rescale(&mut col);
    table.push(col);
    scales.push(scale);
    for (i, &yi) in y.iter().enumerate().skip(1) {
        let prev = &table[i - 1];
        let mut col: Vec<f64> = (0..k)
            .map(|s| {
                let inflow: f64 = (0..k).map(|r| prev[r] * spec.transition[r][s]).sum();
                inflow * spec.emission(s, yi)
            })
            .collect();
        scale += rescale(&mut col);
        table.push(col);
        scales.push(scale);
    }
    Ok((table, scales))
}

/// Backward table: `B_{n-1}(s) = 1`,
/// `B_{i-1}(r) = Σ_s π(r,s) e_s(y_i) B_i(s)`.
pub fn backward(spec: &HmmSpec, y: &[u64]) -> Result<(Vec<Vec<f64>>, Vec<f64>), HmmError> {
    spec.check_len(y)?;
    let k = spec.num_states();
    let n = y.len();
    let mut table = vec![vec![1.0; k]; n];
    let mut scales = vec![0.0; n];
    for i in (1..n).rev() {
        let next = table[i].clone();
        let mut col: Vec<f64> = (0..k)
            .map(|r| {
                (0..k)
                    .map(|s| spec.transition[r][s] * spec.emission(s, y[i]) * next[s])
                    .sum()
            })
            .collect();
        scales[i - 1] = scales[i] + rescale(&mut col);
        table[i - 1] = col;
    }
    Ok((table, scales))
}

impl ForwardBackward {
    pub fn compute(spec: &HmmSpec, y: &[u64]) -> Result<Self, HmmError> {
        let (forward, forward_log_scale) = forward(spec, y)?;
        let (backward, backward_log_scale) = backward(spec, y)?;
        Ok(ForwardBackward {
            forward,
            forward_log_scale,
            backward,
            backward_log_scale,
        })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Unscaled `F_i(s)`; may underflow on long sequences.
    pub fn forward_value(&self, i: usize, s: usize) -> f64 {
        self.forward[i][s] * self.forward_log_scale[i].exp()
    }

    pub fn backward_value(&self, i: usize, s: usize) -> f64 {
        self.backward[i][s] * self.backward_log_scale[i].exp()
    }

    /// `ln Σ_s F_i(s) B_i(s)`, which is `ln P(Y)` for every `i`.
    pub fn log_normalizer(&self, i: usize) -> f64 {
        let dot: f64 = self.forward[i]
            .iter()
            .zip(&self.backward[i])
            .map(|(f, b)| f * b)
            .sum();
        dot.ln() + self.forward_log_scale[i] + self.backward_log_scale[i]
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_normalizer(self.len() - 1)
    }

    /// `P(S_i = · | Y)`.
    pub fn posterior(&self, i: usize) -> Result<Vec<f64>, HmmError> {
        let w: Vec<f64> = self.forward[i]
            .iter()
            .zip(&self.backward[i])
            .map(|(f, b)| f * b)
            .collect();
        let total: f64 = w.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(HmmError::ZeroLikelihood);
        }
        Ok(w.into_iter().map(|x| x / total).collect())
    }

    pub fn posteriors(&self) -> Result<Vec<Vec<f64>>, HmmError> {
        (0..self.len()).map(|i| self.posterior(i)).collect()
    }

    /// Transition row of the posterior chain run forwards, for `i ≥ 1`:
    /// `π(r,s) e_s(y_i) B_i(s) / B_{i-1}(r)`.
    pub fn forward_transition(&self, spec: &HmmSpec, y: &[u64], i: usize, r: usize) -> Vec<f64> {
        let k = spec.num_states();
        let shift = (self.backward_log_scale[i] - self.backward_log_scale[i - 1]).exp();
        (0..k)
            .map(|s| {
                spec.transition[r][s] * spec.emission(s, y[i]) * self.backward[i][s] * shift
                    / self.backward[i - 1][r]
            })
            .collect()
    }

    /// Transition row of the posterior chain run backwards, for `i ≥ 1`:
    /// `F_{i-1}(r) π(r,s) e_s(y_i) / F_i(s)` as a distribution over `r`.
    pub fn backward_transition(&self, spec: &HmmSpec, y: &[u64], i: usize, s: usize) -> Vec<f64> {
        let k = spec.num_states();
        let shift = (self.forward_log_scale[i - 1] - self.forward_log_scale[i]).exp();
        (0..k)
            .map(|r| {
                self.forward[i - 1][r] * spec.transition[r][s] * spec.emission(s, y[i]) * shift
                    / self.forward[i][s]
            })
            .collect()
    }
}

/// Variable id of hidden state `S_i` in the network bridge.
pub fn state_var(i: usize) -> VarId {
    VarId(2 * i)
}

/// Variable id of observation `Y_i` in the network bridge.
pub fn obs_var(i: usize) -> VarId {
    VarId(2 * i + 1)
}

/// The HMM as a network over `S_0, Y_0, S_1, Y_1, ...` with the observations
/// as evidence. Counts are truncated at [`EMISSION_CUTOFF`]; the truncated
/// rows are kept as they are (their missing tail mass is below 1e-12).
pub fn to_bayes_net(spec: &HmmSpec, y: &[u64]) -> Result<(DiscreteNetwork, EvidenceSet), HmmError> {
    spec.check_len(y)?;
    if let Some((day, &value)) = y
        .iter()
        .enumerate()
        .find(|(_, &v)| v as usize > EMISSION_CUTOFF)
    {
        return Err(HmmError::BeyondCutoff { day, value });
    }
    let state_labels: Vec<&str> = spec.states.iter().map(String::as_str).collect();
    let counts: Vec<String> = (0..=EMISSION_CUTOFF).map(|k| k.to_string()).collect();
    let count_labels: Vec<&str> = counts.iter().map(String::as_str).collect();
    let emission_rows: Vec<Vec<f64>> = (0..spec.num_states())
        .map(|s| {
            (0..=EMISSION_CUTOFF as u64)
                .map(|k| spec.emission(s, k))
                .collect()
        })
        .collect();

    let mut vars = Vec::with_capacity(2 * spec.n);
    let mut cpds = Vec::with_capacity(2 * spec.n);
    for i in 0..spec.n {
        vars.push(Variable::new(
            state_var(i).0,
            format!("S{}", i + 1),
            &state_labels,
        ));
        vars.push(Variable::new(
            obs_var(i).0,
            format!("Y{}", i + 1),
            &count_labels,
        ));
        if i == 0 {
            cpds.push(Cpd::prior(state_var(0), spec.initial.clone()));
        } else {
            cpds.push(Cpd::new(
                state_var(i),
                vec![state_var(i - 1)],
                spec.transition.clone(),
            ));
        }
        cpds.push(Cpd::new(
            obs_var(i),
            vec![state_var(i)],
            emission_rows.clone(),
        ));
    }
    let net = DiscreteNetwork::new(vars, cpds).map_err(|e| HmmError::BadSpec(e.to_string()))?;
    let mut ev = EvidenceSet::new();
    for (i, &yi) in y.iter().enumerate() {
        ev.observe(&net, obs_var(i), yi as usize)
            .map_err(|e| HmmError::BadSpec(e.to_string()))?;
    }
    Ok((net, ev))
}

/// Chain junction tree `{S_0,Y_0} - {S_0,S_1,Y_1} - ... - {S_{n-2},S_{n-1},Y_{n-1}}`,
/// with `S_i` and `Y_i` assigned to cluster `i`.
pub fn chain_junction_tree(net: &DiscreteNetwork, n: usize) -> JunctionTree {
    let mut clusters = vec![vec![state_var(0), obs_var(0)]];
    for i in 1..n {
        clusters.push(vec![state_var(i - 1), state_var(i), obs_var(i)]);
    }
    let edges = (1..n).map(|i| (i - 1, i)).collect();
    JunctionTree::new(net, clusters, edges).expect("chain is a junction tree for the HMM")
}

/// Draws `(S, Y)` from the model.
pub fn simulate(spec: &HmmSpec, seed: u64) -> (Vec<usize>, Vec<u64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_with(spec, &mut rng)
}

pub fn simulate_with<R: Rng + ?Sized>(spec: &HmmSpec, rng: &mut R) -> (Vec<usize>, Vec<u64>) {
    let poissons: Vec<Poisson<f64>> = spec
        .rates
        .iter()
        .map(|&l| Poisson::new(l).expect("validated rate"))
        .collect();
    let mut s = Vec::with_capacity(spec.n);
    let mut y = Vec::with_capacity(spec.n);
    let mut state = draw_index(rng, &spec.initial);
    for i in 0..spec.n {
        if i > 0 {
            state = draw_index(rng, &spec.transition[state]);
        }
        s.push(state);
        y.push(poissons[state].sample(rng) as u64);
    }
    (s, y)
}

/// Inverse-CDF draw from unnormalized non-negative weights.
pub(crate) fn draw_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = k;
            if u < acc {
                return k;
            }
        }
    }
    last
}
