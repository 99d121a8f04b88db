//! Homogeneous polynomials on the probability simplex, stored in the
//! monomial basis `theta^n = theta_1^n_1 ... theta_d^n_d`.
//!
//! On the simplex `sum(theta) = 1`, so multiplying by `(theta_1 + ... + theta_d)`
//! lifts a polynomial to a higher degree without changing its values. Under an
//! exchangeable quasi-expectation this lift is exactly marginalization of the
//! longer sequence down to its first `r` outcomes.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::boson::DiagonalObservable;
use crate::error::{Error, Result};
use crate::multiindex::{compositions, orbit_size_f64, CountVector};

/// Coefficients below this magnitude are dropped after arithmetic.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

#[derive(Clone, PartialEq)]
pub struct SimplexPolynomial {
    d: usize,
    degree: usize,
    terms: BTreeMap<CountVector, f64>,
}

impl SimplexPolynomial {
    pub fn zero(d: usize, degree: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("a simplex polynomial needs at least one variable"));
        }
        Ok(Self { d, degree, terms: BTreeMap::new() })
    }

    pub fn constant(d: usize, value: f64) -> Result<Self> {
        let mut p = Self::zero(d, 0)?;
        p.add_term(CountVector::zeros(d)?, value)?;
        Ok(p)
    }

    pub fn monomial(n: CountVector, coeff: f64) -> Self {
        let mut p = Self { d: n.dim(), degree: n.degree(), terms: BTreeMap::new() };
        p.add_term(n, coeff).expect("degree and dimension match by construction");
        p
    }

    /// `(theta_1 + ... + theta_d)^r`, identically 1 on the simplex.
    pub fn simplex_power(d: usize, r: usize) -> Result<Self> {
        Self::constant(d, 1.0)?.homogenize(r)
    }

    /// Builds a polynomial from `(counts, coeff)` pairs. Every term must share
    /// the degree of the first one.
    pub fn from_terms<I>(d: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (CountVector, f64)>,
    {
        let mut iter = terms.into_iter().peekable();
        let degree = iter.peek().map_or(0, |(n, _)| n.degree());
        let mut p = Self::zero(d, degree)?;
        for (n, c) in iter {
            p.add_term(n, c)?;
        }
        Ok(p)
    }

    /// Random coefficients uniform in `[-1, 1]` on every monomial of the degree.
    pub fn random<R: Rng + ?Sized>(d: usize, degree: usize, rng: &mut R) -> Result<Self> {
        let terms = compositions(degree, d)?.into_iter().map(|n| (n, rng.gen_range(-1.0..=1.0))).collect::<Vec<_>>();
        let mut p = Self::zero(d, degree)?;
        for (n, c) in terms {
            p.add_term(n, c)?;
        }
        Ok(p)
    }

    /// Adds `coeff * theta^n` in place.
    pub fn add_term(&mut self, n: CountVector, coeff: f64) -> Result<()> {
        if n.dim() != self.d {
            return Err(Error::domain(format!("term {n} has {} coordinates, polynomial has d = {}", n.dim(), self.d)));
        }
        if n.degree() != self.degree {
            return Err(Error::domain(format!(
                "term {n} has degree {}, polynomial is homogeneous of degree {}",
                n.degree(),
                self.degree
            )));
        }
        if !coeff.is_finite() {
            return Err(Error::domain(format!("term {n} has non-finite coefficient {coeff}")));
        }
        let value = self.terms.get(&n).copied().unwrap_or(0.0) + coeff;
        if value.abs() < PRUNE_THRESHOLD {
            self.terms.remove(&n);
        } else {
            self.terms.insert(n, value);
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, n: &CountVector) -> f64 {
        self.terms.get(n).copied().unwrap_or(0.0)
    }

    /// Non-zero terms in rank order.
    pub fn terms(&self) -> impl Iterator<Item = (&CountVector, f64)> {
        self.terms.iter().map(|(n, &c)| (n, c))
    }

    pub fn scale(&self, alpha: f64) -> Self {
        let mut out = Self { d: self.d, degree: self.degree, terms: BTreeMap::new() };
        for (n, c) in self.terms() {
            out.add_term(n.clone(), alpha * c).expect("same shape");
        }
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (n, c) in other.terms() {
            out.add_term(n.clone(), c)?;
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.scale(-1.0))
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::domain(format!("cannot multiply d = {} by d = {}", self.d, other.d)));
        }
        let mut acc: BTreeMap<CountVector, f64> = BTreeMap::new();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                *acc.entry(a.add(b)).or_insert(0.0) += ca * cb;
            }
        }
        Ok(self.with_terms(self.degree + other.degree, acc))
    }

    fn with_terms(&self, degree: usize, mut terms: BTreeMap<CountVector, f64>) -> Self {
        terms.retain(|_, c| c.abs() >= PRUNE_THRESHOLD);
        Self { d: self.d, degree, terms }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.d != other.d || self.degree != other.degree {
            return Err(Error::domain(format!(
                "shape mismatch: (d = {}, degree {}) vs (d = {}, degree {})",
                self.d, self.degree, other.d, other.degree
            )));
        }
        Ok(())
    }

    /// Multiplies by `(theta_1 + ... + theta_d)^(target_degree - degree)`.
    pub fn homogenize(&self, target_degree: usize) -> Result<Self> {
        if target_degree < self.degree {
            return Err(Error::domain(format!(
                "cannot lift a degree-{} polynomial down to degree {target_degree}",
                self.degree
            )));
        }
        let mut current = self.clone();
        for _ in self.degree..target_degree {
            let mut acc: BTreeMap<CountVector, f64> = BTreeMap::new();
            for (n, c) in current.terms() {
                for i in 0..self.d {
                    *acc.entry(n.incremented(i)).or_insert(0.0) += c;
                }
            }
            current = current.with_terms(current.degree + 1, acc);
        }
        Ok(current)
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.d {
            return Err(Error::domain(format!("point has {} coordinates, polynomial has d = {}", theta.len(), self.d)));
        }
        Ok(self.terms().map(|(n, c)| c * monomial_value(n.counts(), theta)).sum())
    }

    /// Gradient with respect to `theta`, used by the simplex minimizer.
    pub fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.d {
            return Err(Error::domain("dimension mismatch in gradient"));
        }
        let mut grad = vec![0.0; self.d];
        let mut exps = vec![0usize; self.d];
        for (n, c) in self.terms() {
            for (i, g) in grad.iter_mut().enumerate() {
                let k = n.get(i);
                if k == 0 {
                    continue;
                }
                exps.copy_from_slice(n.counts());
                exps[i] -= 1;
                *g += c * k as f64 * monomial_value(&exps, theta);
            }
        }
        Ok(grad)
    }

    /// Substitutes `theta_d = 1 - theta_1 - ... - theta_{d-1}` and expands.
    pub fn reduce_to_free_vars(&self) -> ReducedPolynomial {
        let vars = self.d - 1;
        let mut out = ReducedPolynomial { vars, terms: BTreeMap::new() };
        for (n, c) in self.terms() {
            let last = n.get(vars);
            let head = &n.counts()[..vars];
            // (1 - s)^k = sum over m of multinomial(k; m_0, m_1..) (-1)^{|m|-m_0} theta^m
            for m in compositions(last, self.d).expect("d >= 1") {
                let constant_part = m.get(0);
                let sign = if (last - constant_part) % 2 == 0 { 1.0 } else { -1.0 };
                let weight = sign * orbit_size_f64(&m);
                let exps: Vec<usize> = head.iter().zip(&m.counts()[1..]).map(|(a, b)| a + b).collect();
                *out.terms.entry(exps).or_insert(0.0) += c * weight;
            }
        }
        out.terms.retain(|_, c| c.abs() >= PRUNE_THRESHOLD);
        out
    }

    /// The diagonal observable on the `d^r` sequence basis whose expectation
    /// under any exchangeable distribution equals the quasi-expectation of
    /// this polynomial. A sequence with counts `n` gets `coeff(n) / |orbit(n)|`.
    pub fn to_diagonal_observable(&self) -> DiagonalObservable {
        let values = self.terms().map(|(n, c)| (n.clone(), c / orbit_size_f64(n))).collect();
        DiagonalObservable::from_values(self.d, self.degree, values)
            .expect("keys share the polynomial's degree and dimension")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: PolynomialJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        raw.try_into()
    }

    pub fn to_json(&self) -> PolynomialJson {
        PolynomialJson {
            d: self.d,
            degree: Some(self.degree),
            terms: self.terms().map(|(n, c)| TermJson { counts: n.counts().to_vec(), coeff: c }).collect(),
        }
    }
}

fn monomial_value(exps: &[usize], theta: &[f64]) -> f64 {
    exps.iter().zip(theta).filter(|(&k, _)| k > 0).map(|(&k, &t)| t.powi(k as i32)).product()
}

impl fmt::Debug for SimplexPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SimplexPolynomial(d={}, degree={}: ", self.d, self.degree)?;
        if self.is_zero() {
            write!(f, "0")?;
        }
        for (i, (n, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{n}")?;
        }
        write!(f, ")")
    }
}

/// A polynomial in the `d - 1` free simplex coordinates, not homogeneous.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPolynomial {
    vars: usize,
    terms: BTreeMap<Vec<usize>, f64>,
}

impl ReducedPolynomial {
    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn coeff(&self, exps: &[usize]) -> f64 {
        self.terms.get(exps).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn evaluate(&self, free: &[f64]) -> Result<f64> {
        if free.len() != self.vars {
            return Err(Error::domain(format!(
                "point has {} coordinates, reduced polynomial has {} variables",
                free.len(),
                self.vars
            )));
        }
        Ok(self.terms().map(|(e, c)| c * monomial_value(e, free)).sum())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub d: usize,
    /// Required only for the zero polynomial; otherwise inferred and checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub counts: Vec<usize>,
    pub coeff: f64,
}

impl TryFrom<PolynomialJson> for SimplexPolynomial {
    type Error = Error;

    fn try_from(raw: PolynomialJson) -> Result<Self> {
        if raw.d == 0 {
            return Err(Error::Parse("\"d\" must be at least 1".into()));
        }
        let degree = match (raw.degree, raw.terms.first()) {
            (Some(deg), _) => deg,
            (None, Some(t)) => t.counts.iter().sum(),
            (None, None) => 0,
        };
        let mut p = SimplexPolynomial::zero(raw.d, degree)?;
        for (i, t) in raw.terms.into_iter().enumerate() {
            if t.counts.len() != raw.d {
                return Err(Error::Parse(format!(
                    "term {i} {:?} has {} counts, expected d = {}",
                    t.counts,
                    t.counts.len(),
                    raw.d
                )));
            }
            let deg: usize = t.counts.iter().sum();
            if deg != degree {
                return Err(Error::Parse(format!(
                    "term {i} {:?} has degree {deg}, but the polynomial is homogeneous of degree {degree}",
                    t.counts
                )));
            }
            let n = CountVector::new(t.counts)?;
            p.add_term(n, t.coeff).map_err(|e| Error::Parse(format!("term {i}: {e}")))?;
        }
        Ok(p)
    }
}
