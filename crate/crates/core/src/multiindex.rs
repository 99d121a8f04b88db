//! Count vectors, orbits and the conversions between ordered outcome
//! sequences and their occupation counts.
//!
//! Count vectors of a fixed degree are ordered graded-lexicographically with
//! the first coordinate descending, so for `r = 2, d = 2` the order is
//! `(2,0), (1,1), (0,2)`. Every dense index set in the crate (LP rows and
//! columns, occupation bases) follows this order, and [`rank`] / [`unrank`]
//! give positions in it.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Occupation counts `[n_1, ..., n_d]` of a sequence of outcomes.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct CountVector(Vec<usize>);

impl CountVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::domain("count vector needs at least one coordinate"));
        }
        Ok(Self(counts))
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::new(vec![0; d])
    }

    /// The count vector with a single `1` at `index`.
    pub fn unit(d: usize, index: usize) -> Result<Self> {
        if index >= d {
            return Err(Error::domain(format!("unit index {index} out of range for d = {d}")));
        }
        let mut counts = vec![0; d];
        counts[index] = 1;
        Self::new(counts)
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Componentwise sum, used when multiplying monomials.
    pub fn add(&self, other: &CountVector) -> CountVector {
        debug_assert_eq!(self.dim(), other.dim());
        CountVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub(crate) fn incremented(&self, i: usize) -> CountVector {
        let mut counts = self.0.clone();
        counts[i] += 1;
        CountVector(counts)
    }

    /// True when `self[i] <= other[i]` for every coordinate.
    pub fn is_dominated_by(&self, other: &CountVector) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// The lexicographically-first sequence with these counts, e.g.
    /// `(1,0,2) -> [0,2,2]`.
    pub fn canonical_sequence(&self) -> Vec<usize> {
        self.0.iter().enumerate().flat_map(|(face, &n)| std::iter::repeat_n(face, n)).collect()
    }

    /// All distinct orderings of the multiset, in lexicographic order.
    pub fn orbit_sequences(&self) -> OrbitIter {
        OrbitIter { next: Some(self.canonical_sequence()) }
    }
}

impl Ord for CountVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.dim().cmp(&other.dim())).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for CountVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<Vec<usize>> for CountVector {
    type Error = Error;

    fn try_from(counts: Vec<usize>) -> Result<Self> {
        Self::new(counts)
    }
}

impl From<CountVector> for Vec<usize> {
    fn from(n: CountVector) -> Self {
        n.0
    }
}

impl fmt::Debug for CountVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CountVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// Distinct permutations of a multiset via the standard next-permutation step.
pub struct OrbitIter {
    next: Option<Vec<usize>>,
}

impl Iterator for OrbitIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(current)
    }
}

pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).expect("pivot exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// An ordered list of outcomes `t_1..t_r`, each in `[0, d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence {
    outcomes: Vec<usize>,
    d: usize,
}

impl Sequence {
    pub fn new(outcomes: Vec<usize>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("number of outcomes d must be at least 1"));
        }
        if let Some(&bad) = outcomes.iter().find(|&&t| t >= d) {
            return Err(Error::domain(format!("outcome {bad} out of range [0, {d})")));
        }
        Ok(Self { outcomes, d })
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn counts(&self) -> CountVector {
        let mut counts = vec![0; self.d];
        for &t in &self.outcomes {
            counts[t] += 1;
        }
        CountVector(counts)
    }

    /// Row-major (Kronecker) position of the sequence in the `d^r` basis.
    pub fn tensor_index(&self) -> usize {
        tensor_index(&self.outcomes, self.d)
    }
}

pub fn sequence_to_counts(seq: &[usize], d: usize) -> Result<CountVector> {
    Ok(Sequence::new(seq.to_vec(), d)?.counts())
}

pub(crate) fn tensor_index(outcomes: &[usize], d: usize) -> usize {
    outcomes.iter().fold(0, |acc, &t| acc * d + t)
}

/// Inverse of [`Sequence::tensor_index`].
pub fn sequence_at(index: usize, r: usize, d: usize) -> Vec<usize> {
    let mut outcomes = vec![0; r];
    let mut rest = index;
    for slot in outcomes.iter_mut().rev() {
        *slot = rest % d;
        rest /= d;
    }
    outcomes
}

/// `d^r`, or `None` on overflow.
pub fn tensor_dim(r: usize, d: usize) -> Option<usize> {
    u32::try_from(r).ok().and_then(|r| d.checked_pow(r))
}

/// Exact binomial coefficient; `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

pub(crate) fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of count vectors of degree `r` in `d` coordinates, `C(r+d-1, d-1)`.
pub fn num_compositions(r: usize, d: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::domain("d must be at least 1"));
    }
    binomial(r + d - 1, d - 1)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| Error::Overflow(format!("C({}, {})", r + d - 1, d - 1)))
}

/// All count vectors of degree `r` with `d` coordinates, in rank order.
pub fn compositions(r: usize, d: usize) -> Result<Vec<CountVector>> {
    let total = num_compositions(r, d)?;
    let mut out = Vec::with_capacity(total);
    let mut current = vec![0; d];
    fill_compositions(r, 0, &mut current, &mut out);
    debug_assert_eq!(out.len(), total);
    Ok(out)
}

fn fill_compositions(rest: usize, pos: usize, current: &mut [usize], out: &mut Vec<CountVector>) {
    if pos + 1 == current.len() {
        current[pos] = rest;
        out.push(CountVector(current.to_vec()));
        return;
    }
    for v in (0..=rest).rev() {
        current[pos] = v;
        fill_compositions(rest - v, pos + 1, current, out);
    }
    current[pos] = 0;
}

/// Count vectors `m` of degree `r` with `m <= bound` componentwise, in rank order.
pub fn bounded_compositions(bound: &CountVector, r: usize) -> Vec<CountVector> {
    let mut out = Vec::new();
    if r > bound.degree() {
        return out;
    }
    let mut current = vec![0; bound.dim()];
    fill_bounded(bound.counts(), r, 0, &mut current, &mut out);
    out
}

fn fill_bounded(bound: &[usize], rest: usize, pos: usize, current: &mut [usize], out: &mut Vec<CountVector>) {
    if pos + 1 == current.len() {
        if rest <= bound[pos] {
            current[pos] = rest;
            out.push(CountVector(current.to_vec()));
        }
        return;
    }
    let remaining_capacity: usize = bound[pos + 1..].iter().sum();
    let lo = rest.saturating_sub(remaining_capacity);
    for v in (lo..=rest.min(bound[pos])).rev() {
        current[pos] = v;
        fill_bounded(bound, rest - v, pos + 1, current, out);
    }
    current[pos] = 0;
}

/// Number of distinct sequences with counts `n`: `r! / (n_1! ... n_d!)`.
pub fn orbit_size(n: &CountVector) -> Result<u128> {
    let mut acc: u128 = 1;
    let mut running = 0usize;
    for &k in n.counts() {
        running += k;
        let b = binomial(running, k).ok_or_else(|| Error::Overflow(format!("orbit size of {n}")))?;
        acc = acc.checked_mul(b).ok_or_else(|| Error::Overflow(format!("orbit size of {n}")))?;
    }
    Ok(acc)
}

/// Orbit size as a float; exact whenever the orbit size is below `2^53`.
pub(crate) fn orbit_size_f64(n: &CountVector) -> f64 {
    let mut acc = 1.0;
    let mut running = 0usize;
    for &k in n.counts() {
        running += k;
        acc *= binomial_f64(running, k);
    }
    acc
}

/// Position of `n` within `compositions(n.degree(), n.dim())`.
pub fn rank(n: &CountVector) -> usize {
    let d = n.dim();
    let mut rest = n.degree();
    let mut k = 0usize;
    for (pos, &v) in n.counts().iter().enumerate().take(d - 1) {
        let tail = d - pos - 1;
        // vectors with a larger value in this slot come first
        for bigger in v + 1..=rest {
            k += num_compositions(rest - bigger, tail).expect("rank fits in usize");
        }
        rest -= v;
    }
    k
}

pub fn unrank(k: usize, r: usize, d: usize) -> Result<CountVector> {
    let total = num_compositions(r, d)?;
    if k >= total {
        return Err(Error::domain(format!(
            "rank {k} out of range: there are {total} count vectors of degree {r} with d = {d}"
        )));
    }
    let mut counts = vec![0; d];
    let mut rest = r;
    let mut k = k;
    for (pos, slot) in counts.iter_mut().enumerate().take(d - 1) {
        let tail = d - pos - 1;
        let mut v = rest;
        loop {
            let block = num_compositions(rest - v, tail)?;
            if k < block {
                break;
            }
            k -= block;
            v -= 1;
        }
        *slot = v;
        rest -= v;
    }
    counts[d - 1] = rest;
    Ok(CountVector(counts))
}
