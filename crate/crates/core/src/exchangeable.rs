//! Finitely exchangeable distributions over `d` outcomes and `r` draws.
//!
//! An exchangeable distribution assigns the same probability to every
//! ordering of a multiset of outcomes, so it is stored as one probability per
//! orbit (count vector). The extreme points of this set are the urn
//! distributions: all `r` balls drawn without replacement from an urn whose
//! composition is a fixed count vector. [`oracle_bound`] minimizes a linear
//! objective by enumerating those extreme points.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{
    binomial_f64, bounded_compositions, compositions, orbit_size_f64, sequence_to_counts, CountVector, Sequence,
};
use crate::polynomial::SimplexPolynomial;
use crate::solvers::Tolerances;

#[derive(Clone, Debug, PartialEq)]
pub struct ExchangeableDistribution {
    d: usize,
    r: usize,
    orbit_probs: BTreeMap<CountVector, f64>,
}

impl ExchangeableDistribution {
    /// Validates and stores orbit probabilities. Zero entries are dropped.
    pub fn new(d: usize, r: usize, orbit_probs: BTreeMap<CountVector, f64>) -> Result<Self> {
        Self::new_with(d, r, orbit_probs, &Tolerances::default())
    }

    pub fn new_with(d: usize, r: usize, mut orbit_probs: BTreeMap<CountVector, f64>, tol: &Tolerances) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("d must be at least 1"));
        }
        let mut mass = 0.0;
        for (n, &p) in &orbit_probs {
            if n.dim() != d || n.degree() != r {
                return Err(Error::domain(format!("orbit {n} does not have d = {d} and degree {r}")));
            }
            if !p.is_finite() || p < -1e-12 {
                return Err(Error::domain(format!("orbit {n} has invalid probability {p}")));
            }
            mass += p;
        }
        if (mass - 1.0).abs() > tol.normalization {
            return Err(Error::Normalization { mass, tolerance: tol.normalization });
        }
        orbit_probs.retain(|_, p| *p > 0.0);
        Ok(Self { d, r, orbit_probs })
    }

    /// Builds a distribution from per-sequence probabilities, checking that
    /// each orbit is uniform. Sequences not listed have probability zero.
    pub fn from_sequence_probs<I>(probs: I, d: usize, r: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        Self::from_sequence_probs_with(probs, d, r, &Tolerances::default())
    }

    pub fn from_sequence_probs_with<I>(probs: I, d: usize, r: usize, tol: &Tolerances) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut table: HashMap<Vec<usize>, f64> = HashMap::new();
        for (seq, p) in probs {
            if seq.len() != r {
                return Err(Error::domain(format!("sequence {seq:?} has length {}, expected {r}", seq.len())));
            }
            Sequence::new(seq.clone(), d)?;
            if !p.is_finite() || p < 0.0 {
                return Err(Error::domain(format!("sequence {seq:?} has negative or non-finite probability {p}")));
            }
            if table.insert(seq.clone(), p).is_some() {
                return Err(Error::domain(format!("sequence {seq:?} listed twice")));
            }
        }

        let mut by_orbit: BTreeMap<CountVector, Vec<(&Vec<usize>, f64)>> = BTreeMap::new();
        for (seq, &p) in &table {
            by_orbit.entry(sequence_to_counts(seq, d)?).or_default().push((seq, p));
        }

        let mut orbit_probs = BTreeMap::new();
        for (n, mut members) in by_orbit {
            members.sort_by(|a, b| a.0.cmp(b.0));
            let size = orbit_size_f64(&n);
            let (ref_seq, ref_p) = members[0];
            if let Some(&(other, p)) = members.iter().find(|(_, p)| (p - ref_p).abs() > tol.symmetry) {
                return Err(violation(ref_seq, ref_p, other, p, tol));
            }
            if (members.len() as f64) < size && ref_p > tol.symmetry {
                let missing =
                    n.orbit_sequences().find(|s| !table.contains_key(s)).expect("orbit has an unlisted member");
                return Err(violation(ref_seq, ref_p, &missing, 0.0, tol));
            }
            let total: f64 = members.iter().map(|(_, p)| p).sum();
            orbit_probs.insert(n, total);
        }
        Self::new_with(d, r, orbit_probs, tol)
    }

    /// The urn extreme point: probability one on the orbit of `n`.
    pub fn urn(n: &CountVector) -> Result<Self> {
        if n.degree() == 0 {
            return Err(Error::domain("an urn needs at least one ball"));
        }
        Ok(Self { d: n.dim(), r: n.degree(), orbit_probs: BTreeMap::from([(n.clone(), 1.0)]) })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn orbit_prob(&self, n: &CountVector) -> f64 {
        self.orbit_probs.get(n).copied().unwrap_or(0.0)
    }

    /// Orbits with positive probability, in rank order.
    pub fn support(&self) -> impl Iterator<Item = (&CountVector, f64)> {
        self.orbit_probs.iter().map(|(n, &p)| (n, p))
    }

    pub fn sequence_prob(&self, seq: &[usize]) -> Result<f64> {
        if seq.len() != self.r {
            return Err(Error::domain(format!("sequence has length {}, expected {}", seq.len(), self.r)));
        }
        let n = sequence_to_counts(seq, self.d)?;
        Ok(self.orbit_prob(&n) / orbit_size_f64(&n))
    }

    /// Distribution of the first `r` draws: a multivariate hypergeometric
    /// mixture over the orbits of `self`.
    pub fn marginalize(&self, r: usize) -> Result<Self> {
        if r > self.r {
            return Err(Error::domain(format!("cannot marginalize length {} up to {r}", self.r)));
        }
        let total = binomial_f64(self.r, r);
        let mut out: BTreeMap<CountVector, f64> = BTreeMap::new();
        for (n, p) in self.support() {
            for m in bounded_compositions(n, r) {
                let ways: f64 = n.counts().iter().zip(m.counts()).map(|(&a, &b)| binomial_f64(a, b)).product();
                *out.entry(m).or_insert(0.0) += p * ways / total;
            }
        }
        Self::new(self.d, r, out)
    }

    /// Quasi-expectation `L(g)` with `L(theta^n)` the probability of one
    /// sequence with counts `n`.
    pub fn expectation(&self, g: &SimplexPolynomial) -> Result<f64> {
        if g.d() != self.d || g.degree() != self.r {
            return Err(Error::domain(format!(
                "polynomial has d = {}, degree {}; distribution has d = {}, r = {} (lift the polynomial first)",
                g.d(),
                g.degree(),
                self.d,
                self.r
            )));
        }
        Ok(self.support().map(|(n, p)| p * g.coeff(n) / orbit_size_f64(n)).sum())
    }

    /// `count` independent draws, each an orbit chosen by probability followed
    /// by a uniformly random ordering of its multiset. Uses ChaCha8 seeded
    /// from `seed`, so output is identical across platforms.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Sequence> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let orbits: Vec<(&CountVector, f64)> = self.support().collect();
        let mass: f64 = orbits.iter().map(|(_, p)| p).sum();
        (0..count)
            .map(|_| {
                let u = rng.gen::<f64>() * mass;
                let mut acc = 0.0;
                let mut chosen = orbits[orbits.len() - 1].0;
                for &(n, p) in &orbits {
                    acc += p;
                    if u < acc {
                        chosen = n;
                        break;
                    }
                }
                let mut seq = chosen.canonical_sequence();
                seq.shuffle(&mut rng);
                Sequence::new(seq, self.d).expect("outcomes come from a valid count vector")
            })
            .collect()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: DistributionJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let mut orbit_probs = BTreeMap::new();
        for o in raw.orbits {
            let n = CountVector::new(o.counts).map_err(|e| Error::Parse(e.to_string()))?;
            if orbit_probs.insert(n.clone(), o.prob).is_some() {
                return Err(Error::Parse(format!("orbit {n} listed twice")));
            }
        }
        Self::new(raw.d, raw.r, orbit_probs)
    }

    pub fn to_json(&self) -> DistributionJson {
        DistributionJson {
            d: self.d,
            r: self.r,
            orbits: self.support().map(|(n, p)| OrbitJson { counts: n.counts().to_vec(), prob: p }).collect(),
        }
    }
}

fn violation(first: &[usize], first_prob: f64, second: &[usize], second_prob: f64, tol: &Tolerances) -> Error {
    Error::ExchangeabilityViolation {
        first: first.to_vec(),
        first_prob,
        second: second.to_vec(),
        second_prob,
        tolerance: tol.symmetry,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionJson {
    pub d: usize,
    pub r: usize,
    pub orbits: Vec<OrbitJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitJson {
    pub counts: Vec<usize>,
    pub prob: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Oracle,
    Lp,
    Boson,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Lp => "lp",
            Method::Boson => "boson",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeTerm {
    pub counts: CountVector,
    pub weight: f64,
}

/// Evidence for a computed bound, one variant per method.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Urn composition attaining the minimum.
    Urn { counts: CountVector },
    /// `lift(g) = c * (sum theta)^s + sum_n weight_n theta^n` with every weight >= 0.
    Cone { c: f64, terms: Vec<ConeTerm> },
    /// Ground-state amplitudes over the occupation basis, as `[re, im]`.
    GroundState { basis: Vec<CountVector>, amplitudes: Vec<[f64; 2]> },
    /// Nothing to certify (zero objective).
    Empty,
}

impl Certificate {
    pub(crate) fn ground_state(basis: &[CountVector], v: &[Complex64]) -> Self {
        Certificate::GroundState { basis: basis.to_vec(), amplitudes: v.iter().map(|z| [z.re, z.im]).collect() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Candidates enumerated, simplex pivots, or Jacobi sweeps.
    pub iterations: usize,
    /// Method-specific residual (LP optimality, eigenpair residual).
    pub residual: f64,
    /// Size of the problem solved: compositions, LP rows, basis dimension.
    pub size: usize,
}

/// A worst-case expectation `v_s` with its certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundResult {
    pub value: f64,
    pub method: Method,
    pub s: usize,
    pub certificate: Certificate,
    pub diagnostics: Diagnostics,
}

/// `v_s`: the smallest expectation of `g`, lifted to degree `s`, over every
/// urn distribution of `s` draws. Ties go to the first composition in rank order.
pub fn oracle_bound(g: &SimplexPolynomial, s: usize) -> Result<BoundResult> {
    if s < g.degree() {
        return Err(Error::domain(format!("s = {s} is below the polynomial degree {}", g.degree())));
    }
    let lifted = g.homogenize(s)?;
    let candidates = compositions(s, g.d())?;
    if s == 0 {
        // A single empty urn: the expectation is the constant itself.
        let n = candidates[0].clone();
        return Ok(BoundResult {
            value: lifted.coeff(&n),
            method: Method::Oracle,
            s,
            certificate: Certificate::Urn { counts: n },
            diagnostics: Diagnostics { iterations: 1, residual: 0.0, size: 1 },
        });
    }
    let mut best: Option<(f64, &CountVector)> = None;
    for n in &candidates {
        let value = ExchangeableDistribution::urn(n)?.expectation(&lifted)?;
        if best.is_none_or(|(b, _)| value < b) {
            best = Some((value, n));
        }
    }
    let (value, argmin) = best.expect("at least one composition");
    Ok(BoundResult {
        value,
        method: Method::Oracle,
        s,
        certificate: Certificate::Urn { counts: argmin.clone() },
        diagnostics: Diagnostics { iterations: candidates.len(), residual: 0.0, size: candidates.len() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::{sequence_at, tensor_dim};
    use proptest::prelude::*;

    fn cv(c: &[usize]) -> CountVector {
        CountVector::new(c.to_vec()).unwrap()
    }

    fn dice_witness() -> SimplexPolynomial {
        SimplexPolynomial::from_terms(
            6,
            [(cv(&[2, 0, 0, 0, 0, 0]), 1.0), (cv(&[1, 1, 0, 0, 0, 0]), -1.0), (cv(&[0, 2, 0, 0, 0, 0]), 1.0)],
        )
        .unwrap()
    }

    /// Marginal of an urn computed by listing every ordering of its balls.
    fn brute_force_marginal(n: &CountVector, r: usize) -> BTreeMap<CountVector, f64> {
        let orderings: Vec<Vec<usize>> = n.orbit_sequences().collect();
        let weight = 1.0 / orderings.len() as f64;
        let mut out = BTreeMap::new();
        for seq in orderings {
            *out.entry(sequence_to_counts(&seq[..r], n.dim()).unwrap()).or_insert(0.0) += weight;
        }
        out
    }

    #[test]
    fn coin_urn_from_sequences() {
        let dist = ExchangeableDistribution::from_sequence_probs([(vec![0, 1], 0.5), (vec![1, 0], 0.5)], 2, 2).unwrap();
        assert_eq!(dist.support().collect::<Vec<_>>(), vec![(&cv(&[1, 1]), 1.0)]);
    }

    #[test]
    fn pair_distribution_without_repeats_is_exchangeable() {
        let mut probs = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                probs.push((vec![i, j], if i == j { 0.0 } else { 1.0 / 30.0 }));
            }
        }
        let dist = ExchangeableDistribution::from_sequence_probs(probs, 6, 2).unwrap();
        assert_eq!(dist.support().count(), 15);
        for (n, p) in dist.support() {
            assert!(n.counts().iter().all(|&k| k <= 1));
            assert!((p - 1.0 / 15.0).abs() < 1e-15);
        }
    }

    #[test]
    fn asymmetric_input_names_both_sequences() {
        let err = ExchangeableDistribution::from_sequence_probs(
            [(vec![0, 0], 1.0), (vec![0, 1], 0.3), (vec![1, 0], 0.2)],
            2,
            2,
        )
        .unwrap_err();
        match err {
            Error::ExchangeabilityViolation { first, second, .. } => {
                assert_eq!(first, vec![0, 1]);
                assert_eq!(second, vec![1, 0]);
            }
            other => panic!("unexpected {other}"),
        }
        // an unlisted orbit member counts as zero
        let err = ExchangeableDistribution::from_sequence_probs([(vec![0, 1], 1.0)], 2, 2).unwrap_err();
        assert!(matches!(err, Error::ExchangeabilityViolation { second, .. } if second == vec![1, 0]));
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            ExchangeableDistribution::from_sequence_probs([(vec![0, 0], -0.1), (vec![1, 1], 1.1)], 2, 2),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            ExchangeableDistribution::from_sequence_probs([(vec![0, 0], 0.5)], 2, 2),
            Err(Error::Normalization { .. })
        ));
        assert!(ExchangeableDistribution::from_sequence_probs([(vec![0, 2], 1.0)], 2, 2).is_err());
        assert!(ExchangeableDistribution::urn(&cv(&[0, 0])).is_err());
    }

    #[test]
    fn urn_examples() {
        let coin = ExchangeableDistribution::urn(&cv(&[1, 1])).unwrap();
        assert_eq!(coin.sequence_prob(&[0, 1]).unwrap(), 0.5);
        assert_eq!(coin.sequence_prob(&[1, 0]).unwrap(), 0.5);
        assert_eq!(coin.sequence_prob(&[0, 0]).unwrap(), 0.0);
        assert_eq!(coin.sequence_prob(&[1, 1]).unwrap(), 0.0);

        let heads = ExchangeableDistribution::urn(&cv(&[2, 0])).unwrap();
        assert_eq!(heads.sequence_prob(&[0, 0]).unwrap(), 1.0);

        let three = ExchangeableDistribution::urn(&cv(&[1, 1, 1, 0, 0, 0])).unwrap();
        for seq in cv(&[1, 1, 1, 0, 0, 0]).orbit_sequences() {
            assert!((three.sequence_prob(&seq).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn marginal_examples() {
        let m = ExchangeableDistribution::urn(&cv(&[1, 1, 1, 0, 0, 0])).unwrap().marginalize(2).unwrap();
        let brute = brute_force_marginal(&cv(&[1, 1, 1, 0, 0, 0]), 2);
        assert_eq!(brute.len(), 3);
        for (n, p) in &brute {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
            assert!((m.orbit_prob(n) - p).abs() < 1e-15);
        }

        let m = ExchangeableDistribution::urn(&cv(&[2, 1])).unwrap().marginalize(2).unwrap();
        assert!((m.orbit_prob(&cv(&[2, 0])) - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.orbit_prob(&cv(&[1, 1])) - 2.0 / 3.0).abs() < 1e-15);

        let dist = ExchangeableDistribution::urn(&cv(&[2, 1])).unwrap();
        assert_eq!(dist.marginalize(3).unwrap(), dist);
        assert!(dist.marginalize(4).is_err());
    }

    #[test]
    fn marginals_match_enumeration() {
        for d in 1..=3 {
            for s in 1..=5 {
                for n in compositions(s, d).unwrap() {
                    let urn = ExchangeableDistribution::urn(&n).unwrap();
                    for r in 0..=s {
                        let ours = urn.marginalize(r).unwrap();
                        let brute = brute_force_marginal(&n, r);
                        for m in compositions(r, d).unwrap() {
                            let b = brute.get(&m).copied().unwrap_or(0.0);
                            assert!((ours.orbit_prob(&m) - b).abs() <= 1e-12, "{n} -> {m}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let g = dice_witness();
        let urn = ExchangeableDistribution::urn(&cv(&[1, 1, 0, 0, 0, 0])).unwrap();
        assert_eq!(urn.expectation(&g).unwrap(), -0.5);

        let three = ExchangeableDistribution::urn(&cv(&[1, 1, 1, 0, 0, 0])).unwrap();
        let v = three.expectation(&g.homogenize(3).unwrap()).unwrap();
        assert!((v + 1.0 / 6.0).abs() < 1e-15);
        // the same number through the marginal
        let v2 = three.marginalize(2).unwrap().expectation(&g).unwrap();
        assert!((v2 + 1.0 / 6.0).abs() < 1e-15);

        assert!(three.expectation(&g).is_err());
        let norm = SimplexPolynomial::simplex_power(6, 3).unwrap();
        assert!((three.expectation(&norm).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_examples() {
        let g = dice_witness();
        let v2 = oracle_bound(&g, 2).unwrap();
        assert_eq!(v2.value, -0.5);
        assert_eq!(v2.certificate, Certificate::Urn { counts: cv(&[1, 1, 0, 0, 0, 0]) });

        let v3 = oracle_bound(&g, 3).unwrap();
        assert!((v3.value + 1.0 / 6.0).abs() < 1e-15);

        let square = SimplexPolynomial::monomial(cv(&[2, 0, 0, 0, 0, 0]), 1.0);
        let v = oracle_bound(&square, 2).unwrap();
        assert_eq!(v.value, 0.0);
        let Certificate::Urn { counts } = v.certificate else { panic!() };
        // an urn holding a single ball of face 1 can never draw it twice, so
        // the first zero in rank order is (1,1,0,0,0,0)
        assert_eq!(counts, cv(&[1, 1, 0, 0, 0, 0]));

        assert!(oracle_bound(&g, 1).is_err());
    }

    #[test]
    fn oracle_matches_sequence_level_brute_force() {
        // minimum over urns of sum over all d^s sequences of D(seq[..2]) P(seq)
        let g = dice_witness();
        let obs = g.to_diagonal_observable();
        let d = 3;
        let g3 = SimplexPolynomial::from_terms(
            d,
            g.terms().map(|(n, c)| (CountVector::new(n.counts()[..3].to_vec()).unwrap(), c)),
        )
        .unwrap();
        for s in 2..=5 {
            let mut best = f64::INFINITY;
            for n in compositions(s, d).unwrap() {
                let urn = ExchangeableDistribution::urn(&n).unwrap();
                let mut total = 0.0;
                for idx in 0..tensor_dim(s, d).unwrap() {
                    let seq = sequence_at(idx, s, d);
                    let p = urn.sequence_prob(&seq).unwrap();
                    if p > 0.0 {
                        total += p * obs.entry(&seq[..2]).unwrap();
                    }
                }
                best = best.min(total);
            }
            let oracle = oracle_bound(&g3, s).unwrap().value;
            assert!((oracle - best).abs() < 1e-12, "s = {s}: {oracle} vs {best}");
            assert!((oracle + 1.0 / (s * (s - 1)) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn bounds_increase_towards_zero() {
        let g = dice_witness();
        let values: Vec<f64> = (2..=12).map(|s| oracle_bound(&g, s).unwrap().value).collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1] + 1e-15));
        assert!(values.iter().all(|&v| v < 0.0));
    }

    #[test]
    fn sampling() {
        let coin = ExchangeableDistribution::urn(&cv(&[1, 1])).unwrap();
        let draws = coin.sample(100_000, 42);
        assert!(draws.iter().all(|s| s.outcomes() == [0, 1] || s.outcomes() == [1, 0]));
        let freq = draws.iter().filter(|s| s.outcomes() == [0, 1]).count() as f64 / draws.len() as f64;
        assert!((freq - 0.5).abs() < 0.01);
        assert_eq!(coin.sample(50, 7), coin.sample(50, 7));
        assert_ne!(coin.sample(50, 7), coin.sample(50, 8));
    }

    #[test]
    fn json_round_trip() {
        let dist = ExchangeableDistribution::urn(&cv(&[2, 1])).unwrap().marginalize(2).unwrap();
        let text = serde_json::to_string(&dist.to_json()).unwrap();
        let back = ExchangeableDistribution::from_json_str(&text).unwrap();
        assert_eq!(back, dist);
        assert!(
            ExchangeableDistribution::from_json_str(r#"{"d":2,"r":2,"orbits":[{"counts":[1,1],"prob":0.5}]}"#).is_err()
        );
        assert!(ExchangeableDistribution::from_json_str("[]").is_err());
    }

    fn arb_distribution(d: usize, r: usize) -> impl Strategy<Value = ExchangeableDistribution> {
        let k = compositions(r, d).unwrap().len();
        proptest::collection::vec(0.0f64..1.0, k).prop_filter_map("nonzero mass", move |w| {
            let total: f64 = w.iter().sum();
            if total <= 1e-6 {
                return None;
            }
            let probs = compositions(r, d).unwrap().into_iter().zip(w).map(|(n, x)| (n, x / total)).collect();
            ExchangeableDistribution::new(d, r, probs).ok()
        })
    }

    proptest! {
        #[test]
        fn oracle_commutes_with_marginals(seed in any::<u64>(), d in 2usize..=3, s in 2usize..=5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = SimplexPolynomial::random(d, 2, &mut rng).unwrap();
            let via_lift = oracle_bound(&g, s).unwrap().value;
            let via_marginal = compositions(s, d).unwrap().iter()
                .map(|n| ExchangeableDistribution::urn(n).unwrap().marginalize(2).unwrap().expectation(&g).unwrap())
                .fold(f64::INFINITY, f64::min);
            prop_assert!((via_lift - via_marginal).abs() <= 1e-12);
        }

        #[test]
        fn marginals_stay_valid(dist in arb_distribution(3, 4), r in 0usize..=4) {
            let m = dist.marginalize(r).unwrap();
            let mass: f64 = m.support().map(|(_, p)| p).sum();
            prop_assert!((mass - 1.0).abs() < 1e-12);
            prop_assert!(m.support().all(|(n, p)| p >= 0.0 && n.degree() == r));
        }

        #[test]
        fn diagonal_observable_reproduces_expectation(dist in arb_distribution(3, 3), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = SimplexPolynomial::random(3, 3, &mut rng).unwrap();
            let obs = g.to_diagonal_observable();
            let mut total = 0.0;
            for idx in 0..27 {
                let seq = sequence_at(idx, 3, 3);
                total += obs.entry(&seq).unwrap() * dist.sequence_prob(&seq).unwrap();
            }
            prop_assert!((total - dist.expectation(&g).unwrap()).abs() <= 1e-12);
        }
    }
}
