//! Sparse multivariate polynomials in the variables `x_1..x_d, z_1..z_d`,
//! graded monomial bases and Gram forms.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::rational::{format_rational, Rational};

/// Coefficient field: exact rationals or `f64`.
pub trait Coeff: Clone + PartialEq + Num + Neg<Output = Self> {
    fn render(&self) -> String;
}

impl Coeff for f64 {
    fn render(&self) -> String {
        format!("{self}")
    }
}

impl Coeff for Rational {
    fn render(&self) -> String {
        format_rational(self)
    }
}

/// Exponent vector; the first half of the variables are `x`, the second `z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.0.iter().zip(point).map(|(&e, &v)| v.powi(e as i32)).product()
    }
}

/// Graded lexicographic: lower degree first; within a degree, higher
/// powers of earlier variables first (`x1 < x2`, `x1^2 < x1 x2`).
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn var_name(nvars: usize, i: usize) -> String {
    let d = nvars / 2;
    if nvars.is_multiple_of(2) && i >= d {
        format!("z{}", i - d + 1)
    } else {
        format!("x{}", i + 1)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                let name = var_name(self.nvars(), i);
                if e == 1 {
                    name
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    nvars: usize,
    terms: BTreeMap<Monomial, T>,
}

impl<T: Coeff> Polynomial<T> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        Self::from_terms(nvars, [(Monomial::one(nvars), c)])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::from_terms(nvars, [(Monomial::var(nvars, i), T::one())])
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, T)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial arity");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> T {
        self.terms.get(m).cloned().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), c.clone() * s.clone())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count");
        let mut out = Self::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        out
    }

    /// Largest absolute coefficient, via `abs`.
    pub fn max_abs_coeff(&self, abs: impl Fn(&T) -> f64) -> f64 {
        self.terms.values().map(abs).fold(0.0, f64::max)
    }
}

impl Polynomial<f64> {
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(point)).sum()
    }
}

impl Polynomial<Rational> {
    pub fn to_f64(&self) -> Polynomial<f64> {
        Polynomial::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), crate::rational::to_f64(c))))
    }
}

impl<T: Coeff> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| if m.degree() == 0 { c.render() } else { format!("{}·{m}", c.render()) })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// All monomials of degree `<= degree_bound` in graded-lex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    pub nvars: usize,
    pub degree_bound: u32,
    pub monomials: Vec<Monomial>,
}

impl MonomialBasis {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }
}

fn push_of_degree(nvars: usize, var: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if var + 1 == nvars {
        cur[var] = left;
        out.push(Monomial(cur.clone()));
        cur[var] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[var] = e;
        push_of_degree(nvars, var + 1, left - e, cur, out);
    }
    cur[var] = 0;
}

pub fn basis(nvars: usize, degree: u32) -> MonomialBasis {
    let mut monomials = Vec::new();
    if nvars == 0 {
        monomials.push(Monomial(Vec::new()));
    } else {
        let mut cur = vec![0; nvars];
        for deg in 0..=degree {
            push_of_degree(nvars, 0, deg, &mut cur, &mut monomials);
        }
    }
    MonomialBasis { nvars, degree_bound: degree, monomials }
}

/// `[m]^T G [m]` for a symmetric matrix `G` over a monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GramForm<T> {
    pub basis: MonomialBasis,
    pub matrix: Vec<Vec<T>>,
}

impl<T: Coeff> GramForm<T> {
    pub fn is_well_formed(&self) -> bool {
        let n = self.basis.len();
        self.matrix.len() == n
            && self.matrix.iter().all(|r| r.len() == n)
            && (0..n).all(|i| (0..i).all(|j| self.matrix[i][j] == self.matrix[j][i]))
    }
}

pub fn gram_to_poly<T: Coeff>(g: &GramForm<T>) -> Polynomial<T> {
    let b = &g.basis.monomials;
    let mut p = Polynomial::zero(g.basis.nvars);
    for (i, mi) in b.iter().enumerate() {
        for (j, mj) in b.iter().enumerate() {
            p.add_term(mi.mul(mj), g.matrix[i][j].clone());
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    #[test]
    fn basis_sizes_and_order() {
        let b = basis(2, 1);
        assert_eq!(b.monomials, vec![Monomial(vec![0, 0]), Monomial(vec![1, 0]), Monomial(vec![0, 1])]);
        assert_eq!(basis(4, 2).len(), 15);
        assert_eq!(basis(10, 2).len(), 66);
        let b2 = basis(2, 2);
        assert_eq!(b2.monomials[3], Monomial(vec![2, 0]));
        assert_eq!(b2.monomials[4], Monomial(vec![1, 1]));
        let mut sorted = b2.monomials.clone();
        sorted.sort();
        assert_eq!(sorted, b2.monomials);
    }

    #[test]
    fn gram_expansion() {
        let b = MonomialBasis {
            nvars: 2,
            degree_bound: 1,
            monomials: vec![Monomial(vec![1, 0]), Monomial(vec![0, 1])],
        };
        let id = GramForm { basis: b.clone(), matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
        assert_eq!(format!("{}", gram_to_poly(&id)), "1·x1^2 + 1·z1^2");
        let off = GramForm { basis: b, matrix: vec![vec![rat(0), ratio(1, 2)], vec![ratio(1, 2), rat(0)]] };
        assert_eq!(gram_to_poly(&off), Polynomial::from_terms(2, [(Monomial(vec![1, 1]), rat(1))]));
        let id3 = GramForm {
            basis: basis(2, 1),
            matrix: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        };
        assert_eq!(format!("{}", gram_to_poly(&id3)), "1 + 1·x1^2 + 1·z1^2");
    }

    #[test]
    fn arithmetic() {
        let one = Polynomial::constant(2, rat(1));
        let x = Polynomial::var(2, 0);
        let z = Polynomial::var(2, 1);
        assert_eq!(one.sub(&x).mul(&one.add(&x)), one.sub(&x.mul(&x)));
        assert!(x.add(&x.scale(&rat(-1))).is_zero());
        let f = one.sub(&x.mul(&z));
        assert_eq!(f.mul(&one), f);
        assert_eq!(format!("{f}"), "1 + -1·x1·z1");
    }
}
