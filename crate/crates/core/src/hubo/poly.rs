//! Sparse multilinear polynomials over binary (`x² = x`) or spin (`σ² = 1`)
//! variables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::marker::PhantomData;

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::numfmt::g17;

/// Default cap on the number of stored terms.
pub const DEFAULT_TERM_CAP: usize = 5_000_000;

/// Relative pruning tolerance applied after construction.
pub const PRUNE_TOL: f64 = 1e-12;

/// Sorted, duplicate-free list of variable ids.
pub type Monomial = Vec<u32>;

/// What a variable id stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarLabel {
    /// Bit `x_{i,α}` weighting `2^α` in institution `i`'s value.
    Bit { institution: usize, exponent: i32 },
    /// Free-standing variable with no encoding attached.
    Plain(u32),
    Ancilla(u32),
}

/// Multiplication rule for repeated variables.
pub trait Algebra: Clone + std::fmt::Debug + Default {
    /// `x·x = x` (binary) or `σ·σ = 1` (spin).
    fn product(a: &[u32], b: &[u32]) -> Monomial;
    /// Value of one variable under `bit`.
    fn value(bit: bool) -> f64;
    const NAME: &'static str;
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Boolean;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Spin;

impl Algebra for Boolean {
    fn product(a: &[u32], b: &[u32]) -> Monomial {
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        out
    }

    fn value(bit: bool) -> f64 {
        if bit {
            1.0
        } else {
            0.0
        }
    }

    const NAME: &'static str = "binary";
}

impl Algebra for Spin {
    fn product(a: &[u32], b: &[u32]) -> Monomial {
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        out
    }

    fn value(bit: bool) -> f64 {
        if bit {
            1.0
        } else {
            -1.0
        }
    }

    const NAME: &'static str = "spin";
}

/// Multilinear polynomial; the empty monomial holds the constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<A: Algebra> {
    terms: BTreeMap<Monomial, f64>,
    labels: Vec<VarLabel>,
    _algebra: PhantomData<A>,
}

pub type BinaryPolynomial = Polynomial<Boolean>;
pub type SpinPolynomial = Polynomial<Spin>;

impl<A: Algebra> Polynomial<A> {
    /// The zero polynomial over variables labelled by `labels` (id = index).
    pub fn zero(labels: Vec<VarLabel>) -> Self {
        Self {
            terms: BTreeMap::new(),
            labels,
            _algebra: PhantomData,
        }
    }

    /// Zero polynomial over `n` plain variables.
    pub fn with_vars(n: usize) -> Self {
        Self::zero((0..n as u32).map(VarLabel::Plain).collect())
    }

    pub fn constant(labels: Vec<VarLabel>, c: f64) -> Self {
        let mut p = Self::zero(labels);
        p.add_term(Vec::new(), c);
        p
    }

    /// Builds from `(variables, coefficient)` pairs; variables need not be
    /// sorted and repeats are reduced by the algebra.
    pub fn from_terms<I>(labels: Vec<VarLabel>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(labels);
        for (vars, c) in terms {
            if let Some(&v) = vars.iter().find(|&&v| v as usize >= p.labels.len()) {
                return Err(param(format!("variable {v} out of range for {} variables", p.labels.len())));
            }
            let mono = vars.iter().fold(Vec::new(), |acc, &v| A::product(&acc, &[v]));
            p.add_term(mono, c);
        }
        Ok(p)
    }

    pub fn labels(&self) -> &[VarLabel] {
        &self.labels
    }

    pub fn num_vars(&self) -> usize {
        self.labels.len()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(k, &v)| (k, v))
    }

    pub fn coefficient(&self, vars: &[u32]) -> f64 {
        self.terms.get(vars).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(&[])
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Term counts indexed by order.
    pub fn order_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.degree() + 1];
        for k in self.terms.keys() {
            h[k.len()] += 1;
        }
        h
    }

    /// Adds `c` to the coefficient of an already-reduced monomial.
    pub fn add_term(&mut self, mono: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (k, &v) in &other.terms {
            self.add_term(k.clone(), v);
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        if s == 0.0 {
            return;
        }
        for (k, &v) in &other.terms {
            self.add_term(k.clone(), s * v);
        }
    }

    pub fn scale(&mut self, s: f64) {
        if s == 0.0 {
            self.terms.clear();
        } else {
            for v in self.terms.values_mut() {
                *v *= s;
            }
        }
    }

    /// Distributive product with immediate reduction and merging.
    pub fn mul(&self, other: &Self, cap: usize) -> Result<Self> {
        let mut out = Self::zero(self.labels.clone());
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                out.add_term(A::product(a, b), ca * cb);
            }
            if out.terms.len() > cap {
                return Err(Error::Resource(format!(
                    "{} polynomial expansion exceeded {cap} terms",
                    A::NAME
                )));
            }
        }
        Ok(out)
    }

    /// Drops coefficients below `rel_tol` times the largest magnitude and
    /// returns how many were removed.
    pub fn prune(&mut self, rel_tol: f64) -> usize {
        let max = self.terms.values().fold(0.0_f64, |m, v| m.max(v.abs()));
        let cut = rel_tol * max;
        let before = self.terms.len();
        self.terms.retain(|_, v| v.abs() >= cut && *v != 0.0);
        before - self.terms.len()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Value at an assignment; for spin polynomials `true` means `σ = +1`.
    pub fn evaluate(&self, assignment: &[bool]) -> Result<f64> {
        if assignment.len() < self.labels.len() {
            return Err(param(format!(
                "assignment covers {} of {} variables",
                assignment.len(),
                self.labels.len()
            )));
        }
        Ok(self.evaluate_unchecked(assignment))
    }

    pub(crate) fn evaluate_unchecked(&self, assignment: &[bool]) -> f64 {
        self.terms
            .iter()
            .map(|(k, &c)| k.iter().fold(c, |acc, &v| acc * A::value(assignment[v as usize])))
            .sum()
    }

    /// One line per term, `coefficient  i1 i2 … ik`, in lexicographic order
    /// of the variable lists.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (k, &c) in &self.terms {
            s.push_str(&g17(c));
            if !k.is_empty() {
                s.push_str("  ");
                let ids: Vec<String> = k.iter().map(|v| v.to_string()).collect();
                s.push_str(&ids.join(" "));
            }
            s.push('\n');
        }
        s
    }

    /// Parses [`dump`](Self::dump) output over `num_vars` plain variables.
    pub fn parse_dump(text: &str, num_vars: usize) -> Result<Self> {
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let err = |m: String| Error::Parse { line: lineno + 1, message: m };
            let c: f64 = fields
                .next()
                .expect("non-empty line")
                .parse()
                .map_err(|e| err(format!("bad coefficient: {e}")))?;
            let vars = fields
                .map(|f| f.parse::<u32>().map_err(|e| err(format!("bad variable id {f:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            terms.push((vars, c));
        }
        Self::from_terms((0..num_vars as u32).map(VarLabel::Plain).collect(), terms)
    }

    /// Human-readable summary used in reports and logs.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{} polynomial: {} variables, {} terms, degree {}",
            A::NAME,
            self.num_vars(),
            self.num_terms(),
            self.degree()
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_idempotence() {
        let x = BinaryPolynomial::from_terms(BinaryPolynomial::with_vars(2).labels().to_vec(), [(vec![0], 1.0), (vec![1], 2.0)]).unwrap();
        let sq = x.mul(&x, DEFAULT_TERM_CAP).unwrap();
        // (x0 + 2 x1)² = x0 + 4 x1 + 4 x0 x1
        assert_eq!(sq.coefficient(&[0]), 1.0);
        assert_eq!(sq.coefficient(&[1]), 4.0);
        assert_eq!(sq.coefficient(&[0, 1]), 4.0);
        assert_eq!(sq.num_terms(), 3);
    }

    #[test]
    fn spin_squares_to_one() {
        let s = SpinPolynomial::from_terms(SpinPolynomial::with_vars(2).labels().to_vec(), [(vec![0, 1], 3.0)]).unwrap();
        let sq = s.mul(&s, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(sq.constant_term(), 9.0);
        assert_eq!(sq.num_terms(), 1);
    }

    #[test]
    fn repeated_variables_reduce_on_input() {
        let p = BinaryPolynomial::from_terms(BinaryPolynomial::with_vars(3).labels().to_vec(), [(vec![2, 0, 2], 1.5)]).unwrap();
        assert_eq!(p.coefficient(&[0, 2]), 1.5);
        let s = SpinPolynomial::from_terms(SpinPolynomial::with_vars(3).labels().to_vec(), [(vec![2, 0, 2], 1.5)]).unwrap();
        assert_eq!(s.coefficient(&[0]), 1.5);
    }

    #[test]
    fn evaluation() {
        let labels = BinaryPolynomial::with_vars(2).labels().to_vec();
        let c = BinaryPolynomial::constant(labels.clone(), 4.25);
        assert_eq!(c.evaluate(&[true, false]).unwrap(), 4.25);
        let p = BinaryPolynomial::from_terms(labels, [(vec![], 9.0), (vec![0], -5.0), (vec![1], -8.0), (vec![0, 1], 4.0)]).unwrap();
        assert_eq!(p.evaluate(&[true, true]).unwrap(), 0.0);
        assert_eq!(p.evaluate(&[false, false]).unwrap(), 9.0);
        assert!(p.evaluate(&[true]).is_err());
    }

    #[test]
    fn term_cap() {
        let labels: Vec<VarLabel> = (0..12).map(VarLabel::Plain).collect();
        let lin = BinaryPolynomial::from_terms(labels, (0..12).map(|i| (vec![i], 1.0))).unwrap();
        let sq = lin.mul(&lin, 1000).unwrap();
        assert!(matches!(sq.mul(&sq, 100), Err(Error::Resource(_))));
    }

    #[test]
    fn dump_round_trip() {
        let labels = BinaryPolynomial::with_vars(3).labels().to_vec();
        let p = BinaryPolynomial::from_terms(labels, [(vec![], 0.1), (vec![2], -3.0), (vec![0, 2], 1.0 / 3.0)]).unwrap();
        let text = p.dump();
        assert_eq!(text, "0.10000000000000001\n0.33333333333333331  0 2\n-3  2\n");
        let q = BinaryPolynomial::parse_dump(&text, 3).unwrap();
        assert_eq!(p.terms().collect::<Vec<_>>(), q.terms().collect::<Vec<_>>());
    }

    #[test]
    fn pruning_removes_dust() {
        let labels = BinaryPolynomial::with_vars(2).labels().to_vec();
        let mut p = BinaryPolynomial::from_terms(labels, [(vec![0], 1e3), (vec![1], 1e-10)]).unwrap();
        assert_eq!(p.prune(PRUNE_TOL), 1);
        assert_eq!(p.num_terms(), 1);
    }
}
