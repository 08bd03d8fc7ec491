//! Dense factor algebra.
//!
//! A [`Factor`] is a non-negative table over an ordered scope of variables.
//! The scope is kept sorted by variable id and the table is laid out with the
//! last scope variable varying fastest, so two factors over the same scope are
//! comparable entry by entry. Each factor carries a `log_scale`: the function
//! it represents is `values * exp(log_scale)`. Message passing keeps tables
//! near unit magnitude and pushes the magnitude into the scale, which lets
//! long chains run without underflow.

use thiserror::Error;

use crate::model::{DiscreteNetwork, EvidenceSet, VarId};

/// Default cap on the number of variables in a product scope.
pub const DEFAULT_SCOPE_CAP: usize = 25;

#[derive(Debug, Error, PartialEq)]
pub enum FactorError {
    #[error("scope of {vars} variables exceeds the cap of {cap}")]
    ScopeTooLarge { vars: usize, cap: usize },
    #[error("table size overflows")]
    TableTooLarge,
    #[error("variable {0} appears twice in a scope")]
    DuplicateVariable(VarId),
    #[error("variable {var} has cardinality {left} in one factor and {right} in another")]
    CardinalityMismatch {
        var: VarId,
        left: usize,
        right: usize,
    },
    #[error("table has {got} entries, scope needs {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("entry {0} is negative or not finite")]
    BadValue(usize),
    #[error("variable {0} is not in the factor scope")]
    NotInScope(VarId),
    #[error("divisor scope is not contained in the dividend scope")]
    DivisorScope,
    #[error("division of a positive entry by zero at index {0}")]
    DivisionInconsistent(usize),
    #[error("factor has zero total mass")]
    ZeroMass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<f64>,
    log_scale: f64,
}

fn table_len(cards: &[usize]) -> Result<usize, FactorError> {
    cards
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c))
        .ok_or(FactorError::TableTooLarge)
}

/// Stride of each variable of `scope` inside the canonical layout of `sub`
/// (zero when the variable is absent from `sub`).
fn strides_within(scope: &[VarId], sub: &Factor) -> Vec<usize> {
    let own = sub.strides();
    scope
        .iter()
        .map(|v| sub.position(*v).map_or(0, |k| own[k]))
        .collect()
}

/// Walks every assignment of `cards` in canonical order, keeping one running
/// index per stride vector.
struct Odometer<'a> {
    cards: &'a [usize],
    digits: Vec<usize>,
}

impl<'a> Odometer<'a> {
    fn new(cards: &'a [usize]) -> Self {
        Odometer {
            cards,
            digits: vec![0; cards.len()],
        }
    }

    /// Advances to the next assignment and updates each tracked index.
    #[inline]
    fn step(&mut self, tracked: &mut [(&[usize], &mut usize)]) {
        for d in (0..self.cards.len()).rev() {
            self.digits[d] += 1;
            if self.digits[d] < self.cards[d] {
                for (strides, idx) in tracked.iter_mut() {
                    **idx += strides[d];
                }
                return;
            }
            let wrap = self.cards[d] - 1;
            for (strides, idx) in tracked.iter_mut() {
                **idx -= strides[d] * wrap;
            }
            self.digits[d] = 0;
        }
    }
}

impl Factor {
    /// Builds a factor from a scope given in any order and a table laid out
    /// with the last listed variable varying fastest.
    pub fn new(scope: &[(VarId, usize)], values: Vec<f64>) -> Result<Self, FactorError> {
        let mut sorted: Vec<(VarId, usize)> = scope.to_vec();
        sorted.sort_by_key(|(v, _)| *v);
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(FactorError::DuplicateVariable(w[0].0));
            }
        }
        let cards: Vec<usize> = scope.iter().map(|(_, c)| *c).collect();
        let expected = table_len(&cards)?;
        if values.len() != expected {
            return Err(FactorError::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(FactorError::BadValue(i));
        }
        let given = Factor {
            scope: scope.iter().map(|(v, _)| *v).collect(),
            cards,
            values,
            log_scale: 0.0,
        };
        if given.scope.windows(2).all(|w| w[0] < w[1]) {
            return Ok(given);
        }
        let canonical_scope: Vec<VarId> = sorted.iter().map(|(v, _)| *v).collect();
        let values = given.layout_for(&canonical_scope);
        Ok(Factor {
            scope: canonical_scope,
            cards: sorted.iter().map(|(_, c)| *c).collect(),
            values,
            log_scale: 0.0,
        })
    }

    /// The constant function `value` over the empty scope.
    pub fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
            log_scale: 0.0,
        }
    }

    pub fn ones(scope: &[(VarId, usize)]) -> Result<Self, FactorError> {
        let n = table_len(&scope.iter().map(|(_, c)| *c).collect::<Vec<_>>())?;
        Factor::new(scope, vec![1.0; n])
    }

    /// The CPD of `u` as a factor over `fa(u)`.
    pub fn from_cpd(net: &DiscreteNetwork, u: VarId) -> Self {
        let cpd = net.cpd(u);
        let mut scope: Vec<(VarId, usize)> = cpd
            .parents
            .iter()
            .map(|p| (*p, net.cardinality(*p)))
            .collect();
        scope.push((u, net.cardinality(u)));
        Factor::new(&scope, cpd.table.clone()).expect("validated cpd")
    }

    pub fn with_log_scale(mut self, log_scale: f64) -> Self {
        self.log_scale = log_scale;
        self
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn scope_with_cards(&self) -> Vec<(VarId, usize)> {
        self.scope
            .iter()
            .copied()
            .zip(self.cards.iter().copied())
            .collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn position(&self, v: VarId) -> Option<usize> {
        self.scope.binary_search(&v).ok()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.position(v).is_some()
    }

    pub fn card_of(&self, v: VarId) -> Option<usize> {
        self.position(v).map(|k| self.cards[k])
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.cards.len()];
        for k in (0..self.cards.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.cards[k + 1];
        }
        s
    }

    pub fn index_of(&self, assignment: &[usize]) -> usize {
        assignment
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&a, &c)| acc * c + a)
    }

    pub fn assignment_of(&self, mut index: usize) -> Vec<usize> {
        let mut a = vec![0; self.cards.len()];
        for k in (0..self.cards.len()).rev() {
            a[k] = index % self.cards[k];
            index /= self.cards[k];
        }
        a
    }

    /// Table entry (without the scale) at an assignment of the scope.
    pub fn get(&self, assignment: &[usize]) -> f64 {
        self.values[self.index_of(assignment)]
    }

    /// Represented value at table index `i`, scale included.
    pub fn scaled(&self, i: usize) -> f64 {
        self.values[i] * self.log_scale.exp()
    }

    /// Table with the scale folded in.
    pub fn scaled_values(&self) -> Vec<f64> {
        let s = self.log_scale.exp();
        self.values.iter().map(|x| x * s).collect()
    }

    pub fn to_linear(&self) -> Factor {
        Factor {
            values: self.scaled_values(),
            log_scale: 0.0,
            ..self.clone()
        }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `ln` of the represented total mass; `-inf` when the table is all zero.
    pub fn log_total(&self) -> f64 {
        self.sum().ln() + self.log_scale
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the first maximal entry (lowest canonical index on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &x) in self.values.iter().enumerate() {
            if x > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Divides the table by its largest entry and moves that magnitude into
    /// the log scale. An all-zero table is left alone.
    pub fn rescale_max(&mut self) {
        let m = self.max_value();
        if m > 0.0 && m != 1.0 {
            for x in &mut self.values {
                *x /= m;
            }
            self.log_scale += m.ln();
        }
    }

    /// Table values laid out for `order`, a permutation of the scope, with
    /// the last variable of `order` varying fastest.
    pub fn layout_for(&self, order: &[VarId]) -> Vec<f64> {
        assert_eq!(order.len(), self.scope.len());
        let cards: Vec<usize> = order
            .iter()
            .map(|v| {
                let k = self.scope.iter().position(|s| s == v);
                self.cards[k.expect("order is a permutation of the scope")]
            })
            .collect();
        let src = {
            let own = self.strides();
            let pos: Vec<usize> = self
                .scope
                .iter()
                .map(|v| order.iter().position(|o| o == v).unwrap())
                .collect();
            let mut s = vec![0; order.len()];
            for (k, p) in pos.iter().enumerate() {
                s[*p] = own[k];
            }
            s
        };
        let mut out = Vec::with_capacity(self.values.len());
        let mut odo = Odometer::new(&cards);
        let mut i = 0usize;
        for n in 0..self.values.len() {
            out.push(self.values[i]);
            if n + 1 < self.values.len() {
                odo.step(&mut [(&src, &mut i)]);
            }
        }
        out
    }

    /// Fixes some scope variables to given states and drops them from the
    /// scope. Variables not in the scope are ignored.
    pub fn reduce(&self, fixed: &[(VarId, usize)]) -> Factor {
        let strides = self.strides();
        let mut base = 0;
        let mut keep = vec![true; self.scope.len()];
        for &(v, s) in fixed {
            if let Some(k) = self.position(v) {
                if keep[k] {
                    base += strides[k] * s;
                    keep[k] = false;
                }
            }
        }
        let scope: Vec<VarId> = self
            .scope
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(v, _)| *v)
            .collect();
        let cards: Vec<usize> = self
            .cards
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(c, _)| *c)
            .collect();
        let sub: Vec<usize> = strides
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(s, _)| *s)
            .collect();
        let n: usize = cards.iter().product();
        let mut values = Vec::with_capacity(n);
        let mut odo = Odometer::new(&cards);
        let mut i = base;
        for m in 0..n {
            values.push(self.values[i]);
            if m + 1 < n {
                odo.step(&mut [(&sub, &mut i)]);
            }
        }
        Factor {
            scope,
            cards,
            values,
            log_scale: self.log_scale,
        }
    }

    pub fn multiply(&self, other: &Factor) -> Result<Factor, FactorError> {
        multiply(self, other)
    }

    pub fn marginalize_sum(&self, drop: &[VarId]) -> Result<Factor, FactorError> {
        marginalize_sum(self, drop)
    }

    pub fn marginalize_max(&self, drop: &[VarId]) -> Result<Factor, FactorError> {
        marginalize_max(self, drop)
    }

    /// Sums out everything except `keep`.
    pub fn sum_onto(&self, keep: &[VarId]) -> Result<Factor, FactorError> {
        let drop: Vec<VarId> = self
            .scope
            .iter()
            .copied()
            .filter(|v| !keep.contains(v))
            .collect();
        marginalize_sum(self, &drop)
    }
}

fn merged_scope(f: &Factor, g: &Factor) -> Result<(Vec<VarId>, Vec<usize>), FactorError> {
    let (mut i, mut j) = (0, 0);
    let mut scope = Vec::with_capacity(f.scope.len() + g.scope.len());
    let mut cards = Vec::with_capacity(scope.capacity());
    while i < f.scope.len() || j < g.scope.len() {
        let take_f = j == g.scope.len() || (i < f.scope.len() && f.scope[i] <= g.scope[j]);
        let take_g = i == f.scope.len() || (j < g.scope.len() && g.scope[j] <= f.scope[i]);
        if take_f && take_g {
            if f.cards[i] != g.cards[j] {
                return Err(FactorError::CardinalityMismatch {
                    var: f.scope[i],
                    left: f.cards[i],
                    right: g.cards[j],
                });
            }
            scope.push(f.scope[i]);
            cards.push(f.cards[i]);
            i += 1;
            j += 1;
        } else if take_f {
            scope.push(f.scope[i]);
            cards.push(f.cards[i]);
            i += 1;
        } else {
            scope.push(g.scope[j]);
            cards.push(g.cards[j]);
            j += 1;
        }
    }
    Ok((scope, cards))
}

/// Product over the union of both scopes, with the default scope cap.
pub fn multiply(f: &Factor, g: &Factor) -> Result<Factor, FactorError> {
    multiply_capped(f, g, DEFAULT_SCOPE_CAP)
}

pub fn multiply_capped(f: &Factor, g: &Factor, cap: usize) -> Result<Factor, FactorError> {
    let (scope, cards) = merged_scope(f, g)?;
    if scope.len() > cap {
        return Err(FactorError::ScopeTooLarge {
            vars: scope.len(),
            cap,
        });
    }
    let n = table_len(&cards)?;
    let sf = strides_within(&scope, f);
    let sg = strides_within(&scope, g);
    let mut values = Vec::with_capacity(n);
    let (mut i, mut j) = (0usize, 0usize);
    let mut odo = Odometer::new(&cards);
    for m in 0..n {
        values.push(f.values[i] * g.values[j]);
        if m + 1 < n {
            odo.step(&mut [(&sf, &mut i), (&sg, &mut j)]);
        }
    }
    Ok(Factor {
        scope,
        cards,
        values,
        log_scale: f.log_scale + g.log_scale,
    })
}

fn marginalize(
    f: &Factor,
    drop: &[VarId],
    fold: impl Fn(f64, f64) -> f64,
) -> Result<Factor, FactorError> {
    if let Some(v) = drop.iter().find(|v| !f.contains(**v)) {
        return Err(FactorError::NotInScope(*v));
    }
    let keep: Vec<bool> = f.scope.iter().map(|v| !drop.contains(v)).collect();
    let scope: Vec<VarId> = f
        .scope
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(v, _)| *v)
        .collect();
    let cards: Vec<usize> = f
        .cards
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(c, _)| *c)
        .collect();
    let mut out = Factor {
        scope,
        cards,
        values: Vec::new(),
        log_scale: f.log_scale,
    };
    let n: usize = out.cards.iter().product();
    out.values = vec![0.0; n];
    let so = strides_within(&f.scope, &out);
    let mut o = 0usize;
    let mut odo = Odometer::new(&f.cards);
    for (m, &x) in f.values.iter().enumerate() {
        out.values[o] = fold(out.values[o], x);
        if m + 1 < f.values.len() {
            odo.step(&mut [(&so, &mut o)]);
        }
    }
    Ok(out)
}

/// Sums out `drop`.
pub fn marginalize_sum(f: &Factor, drop: &[VarId]) -> Result<Factor, FactorError> {
    marginalize(f, drop, |acc, x| acc + x)
}

/// Maximizes out `drop`.
pub fn marginalize_max(f: &Factor, drop: &[VarId]) -> Result<Factor, FactorError> {
    marginalize(f, drop, f64::max)
}

/// Zeroes every entry whose assignment falls outside the evidence.
pub fn restrict(f: &Factor, ev: &EvidenceSet) -> Factor {
    let mut out = f.clone();
    for v in &f.scope {
        if let Some(allowed) = ev.allowed(*v) {
            out = restrict_var(&out, *v, allowed);
        }
    }
    out
}

/// Zeroes the entries whose state of `var` is not in `allowed` (sorted).
/// Returns a copy when `var` is not in scope.
pub fn restrict_var(f: &Factor, var: VarId, allowed: &[usize]) -> Factor {
    let mut out = f.clone();
    let Some(k) = f.position(var) else {
        return out;
    };
    let stride = f.strides()[k];
    for (i, x) in out.values.iter_mut().enumerate() {
        let state = (i / stride) % f.cards[k];
        if allowed.binary_search(&state).is_err() {
            *x = 0.0;
        }
    }
    out
}

/// Entrywise `f / g` with `g` broadcast over `f`'s scope; `0/0 = 0`.
pub fn divide(f: &Factor, g: &Factor) -> Result<Factor, FactorError> {
    for (v, c) in g.scope.iter().zip(&g.cards) {
        match f.card_of(*v) {
            None => return Err(FactorError::DivisorScope),
            Some(fc) if fc != *c => {
                return Err(FactorError::CardinalityMismatch {
                    var: *v,
                    left: fc,
                    right: *c,
                })
            }
            _ => {}
        }
    }
    let sg = strides_within(&f.scope, g);
    let mut values = Vec::with_capacity(f.values.len());
    let mut j = 0usize;
    let mut odo = Odometer::new(&f.cards);
    for (m, &x) in f.values.iter().enumerate() {
        let d = g.values[j];
        if d == 0.0 {
            if x != 0.0 {
                return Err(FactorError::DivisionInconsistent(m));
            }
            values.push(0.0);
        } else {
            values.push(x / d);
        }
        if m + 1 < f.values.len() {
            odo.step(&mut [(&sg, &mut j)]);
        }
    }
    Ok(Factor {
        scope: f.scope.clone(),
        cards: f.cards.clone(),
        values,
        log_scale: f.log_scale - g.log_scale,
    })
}

/// Scales the table to sum to one. Returns the normalized factor (scale 0)
/// and `ln` of the represented total mass.
pub fn normalize(f: &Factor) -> Result<(Factor, f64), FactorError> {
    let total = f.sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(FactorError::ZeroMass);
    }
    let out = Factor {
        scope: f.scope.clone(),
        cards: f.cards.clone(),
        values: f.values.iter().map(|x| x / total).collect(),
        log_scale: 0.0,
    };
    Ok((out, total.ln() + f.log_scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pedigree;

    const A: VarId = VarId(0);
    const B: VarId = VarId(1);

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn multiply_by_ones() {
        let f = Factor::new(&[(A, 2)], vec![2.0, 3.0]).unwrap();
        let g = Factor::new(&[(A, 2)], vec![1.0, 1.0]).unwrap();
        assert_eq!(multiply(&f, &g).unwrap().values(), &[2.0, 3.0]);
    }

    #[test]
    fn multiply_outer_product() {
        let f = Factor::new(&[(A, 2)], vec![0.5, 0.5]).unwrap();
        let g = Factor::new(&[(B, 2)], vec![0.2, 0.8]).unwrap();
        let h = multiply(&f, &g).unwrap();
        assert_eq!(h.scope(), &[A, B]);
        assert_eq!(h.values(), &[0.1, 0.4, 0.1, 0.4]);
        // Argument order does not change the layout.
        assert_eq!(multiply(&g, &f).unwrap(), h);
    }

    #[test]
    fn founder_prior_under_evidence() {
        let (net, ev) = pedigree::network_with_evidence();
        let x2 = VarId(1);
        let k2 = restrict(&Factor::from_cpd(&net, x2), &ev);
        let ones = Factor::ones(&[(x2, 3)]).unwrap();
        assert_eq!(multiply(&k2, &ones).unwrap().values(), &[0.0, 0.0, 0.04]);
    }

    #[test]
    fn scope_cap_is_enforced() {
        let vars: Vec<(VarId, usize)> = (0..4).map(|i| (VarId(i), 1)).collect();
        let f = Factor::ones(&vars[..2]).unwrap();
        let g = Factor::ones(&vars[2..]).unwrap();
        assert_eq!(
            multiply_capped(&f, &g, 3),
            Err(FactorError::ScopeTooLarge { vars: 4, cap: 3 })
        );
        let wide: Vec<(VarId, usize)> = (0..26).map(|i| (VarId(i), 1)).collect();
        let f = Factor::ones(&wide[..13]).unwrap();
        let g = Factor::ones(&wide[13..]).unwrap();
        assert!(matches!(
            multiply(&f, &g),
            Err(FactorError::ScopeTooLarge { vars: 26, cap: 25 })
        ));
    }

    #[test]
    fn cardinality_mismatch() {
        let f = Factor::ones(&[(A, 2)]).unwrap();
        let g = Factor::ones(&[(A, 3)]).unwrap();
        assert!(matches!(
            multiply(&f, &g),
            Err(FactorError::CardinalityMismatch { .. })
        ));
    }

    #[test]
    fn new_reorders_to_canonical_scope() {
        // Table over (B, A) with A fastest.
        let f = Factor::new(&[(B, 2), (A, 3)], vec![1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(f.scope(), &[A, B]);
        assert_eq!(f.values(), &[1., 4., 2., 5., 3., 6.]);
        assert_eq!(f.layout_for(&[B, A]), vec![1., 2., 3., 4., 5., 6.]);
        assert!(matches!(
            Factor::new(&[(A, 2)], vec![1.0, -1.0]),
            Err(FactorError::BadValue(1))
        ));
        assert!(matches!(
            Factor::new(&[(A, 2), (A, 2)], vec![1.0; 4]),
            Err(FactorError::DuplicateVariable(_))
        ));
        assert!(matches!(
            Factor::new(&[(A, 2)], vec![1.0]),
            Err(FactorError::LengthMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn mendelian_rows_sum_to_one() {
        let net = pedigree::network();
        let k = Factor::from_cpd(&net, VarId(7));
        let m = marginalize_sum(&k, &[VarId(7)]).unwrap();
        assert_eq!(m.scope(), &[VarId(2), VarId(4)]);
        assert!(close(m.values(), &[1.0; 9], 1e-15));
    }

    #[test]
    fn sum_out_rows() {
        let f = Factor::new(&[(A, 2), (B, 2)], vec![0.1, 0.4, 0.1, 0.4]).unwrap();
        assert!(close(
            marginalize_sum(&f, &[B]).unwrap().values(),
            &[0.5, 0.5],
            1e-15
        ));
        assert_eq!(marginalize_max(&f, &[B]).unwrap().values(), &[0.4, 0.4]);
        assert_eq!(
            marginalize_sum(&f, &[VarId(9)]),
            Err(FactorError::NotInScope(VarId(9)))
        );
    }

    #[test]
    fn sum_out_child_of_evidence_potential_gives_table_row() {
        // Σ_{X8} K_8(X3, X5, X8) with X8 = DD observed.
        let (net, ev) = pedigree::network_with_evidence();
        let k8 = restrict(&Factor::from_cpd(&net, VarId(7)), &ev);
        let m = marginalize_sum(&k8, &[VarId(7)]).unwrap();
        assert!(close(
            m.values(),
            &[0.0, 0.0, 0.0, 0.0, 0.25, 0.5, 0.0, 0.5, 1.0],
            1e-15
        ));
    }

    #[test]
    fn max_out() {
        let net = pedigree::network();
        let k = Factor::from_cpd(&net, VarId(2));
        // Parents (dD, dD): child distribution (0.25, 0.5, 0.25).
        let col = k.reduce(&[(VarId(0), 1), (VarId(1), 1)]);
        assert_eq!(marginalize_max(&col, &[VarId(2)]).unwrap().values(), &[0.5]);
        let c = Factor::new(&[(A, 3)], vec![0.7; 3]).unwrap();
        assert_eq!(marginalize_max(&c, &[A]).unwrap().values(), &[0.7]);
    }

    #[test]
    fn restrict_cases() {
        let (net, _) = pedigree::network_with_evidence();
        let x1 = VarId(0);
        let prior = Factor::from_cpd(&net, x1);
        let mut ev = EvidenceSet::new();
        assert_eq!(restrict(&prior, &ev), prior);
        ev.set(&net, x1, [0, 1]).unwrap();
        assert_eq!(restrict(&prior, &ev).values(), &[0.64, 0.32, 0.0]);
        ev.set(&net, x1, []).unwrap();
        assert_eq!(restrict(&prior, &ev).values(), &[0.0; 3]);
    }

    #[test]
    fn divide_cases() {
        let f = Factor::new(&[(A, 2)], vec![0.2, 0.0]).unwrap();
        let g = Factor::new(&[(A, 2)], vec![0.4, 0.0]).unwrap();
        assert_eq!(divide(&f, &g).unwrap().values(), &[0.5, 0.0]);
        let p = Factor::new(&[(A, 2), (B, 2)], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(divide(&p, &p).unwrap().values(), &[1.0; 4]);
        let bad = Factor::new(&[(A, 2)], vec![0.2, 0.1]).unwrap();
        assert_eq!(divide(&bad, &g), Err(FactorError::DivisionInconsistent(1)));
        assert_eq!(divide(&f, &p), Err(FactorError::DivisorScope));
    }

    #[test]
    fn divide_conditional_at_observed_child() {
        // K_8(X3, X5, X8) / M_{7->6}(X3, X5) at (dD, dD, DD) is 0.25 / 0.25.
        let (net, ev) = pedigree::network_with_evidence();
        let k8 = restrict(&Factor::from_cpd(&net, VarId(7)), &ev);
        let m = marginalize_sum(&k8, &[VarId(7)]).unwrap();
        let q = divide(&k8, &m).unwrap();
        assert_eq!(q.get(&[1, 1, 2]), 1.0);
    }

    #[test]
    fn divide_subtracts_scales() {
        let f = Factor::new(&[(A, 2)], vec![1.0, 2.0])
            .unwrap()
            .with_log_scale(3.0);
        let g = Factor::scalar(2.0).with_log_scale(1.0);
        let q = divide(&f, &g).unwrap();
        assert_eq!(q.values(), &[0.5, 1.0]);
        assert_eq!(q.log_scale(), 2.0);
    }

    #[test]
    fn normalize_cases() {
        let f = Factor::new(&[(A, 2)], vec![2.0, 2.0]).unwrap();
        let (n, z) = normalize(&f).unwrap();
        assert_eq!(n.values(), &[0.5, 0.5]);
        assert!((z - 4f64.ln()).abs() < 1e-15);
        let (n, z) = normalize(&Factor::scalar(1.0)).unwrap();
        assert_eq!((n.values(), z), (&[1.0][..], 0.0));
        let zero = Factor::new(&[(A, 2)], vec![0.0, 0.0]).unwrap();
        assert_eq!(normalize(&zero), Err(FactorError::ZeroMass));
        // P(E) read off the separator {X3, X4} between the founders' cluster
        // and the rest of the pedigree.
        let m12 = Factor::new(
            &[(A, 3), (B, 3)],
            vec![0., 0., 0., 0., 0., 3.2e-3, 0., 0., 4.8e-3],
        )
        .unwrap();
        let m21 = Factor::new(
            &[(A, 3), (B, 3)],
            vec![0., 0., 0., 0.0025, 0.00875, 0.015, 0.004, 0.014, 0.024],
        )
        .unwrap();
        let (_, z) = normalize(&multiply(&m12, &m21).unwrap()).unwrap();
        assert!((z - 1.632e-4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rescale_keeps_represented_values() {
        let mut f = Factor::new(&[(A, 3)], vec![0.001, 0.004, 0.002]).unwrap();
        let before = f.scaled_values();
        f.rescale_max();
        assert_eq!(f.max_value(), 1.0);
        assert!(close(&f.scaled_values(), &before, 1e-15));
        let mut z = Factor::new(&[(A, 2)], vec![0.0, 0.0]).unwrap();
        z.rescale_max();
        assert_eq!(z.log_scale(), 0.0);
    }

    #[test]
    fn reduce_slices() {
        let f = Factor::new(&[(A, 2), (B, 3)], vec![1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(f.reduce(&[(A, 1)]).values(), &[4., 5., 6.]);
        assert_eq!(f.reduce(&[(B, 2)]).values(), &[3., 6.]);
        assert_eq!(f.reduce(&[(A, 0), (B, 1)]).values(), &[2.]);
        assert_eq!(f.reduce(&[(VarId(7), 0)]), f);
    }
}
