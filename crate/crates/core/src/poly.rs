//! Multivariate polynomials with exact gradients and Hessians.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// `coeff · Π x_k^{exponents[k]}`
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: Vec<Term>,
}

fn powu(x: f64, e: u32) -> f64 {
    match e {
        0 => 1.0,
        1 => x,
        _ => (0..e).fold(1.0, |acc, _| acc * x),
    }
}

impl Polynomial {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("polynomial needs at least one variable".to_string()));
        }
        for t in &terms {
            if t.exponents.len() != n {
                return Err(Error::DimMismatch { expected: n, found: t.exponents.len() });
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidArgument("non-finite coefficient".to_string()));
            }
        }
        Ok(Polynomial { n, terms })
    }

    /// Builds from `(coeff, exponents)` pairs.
    pub fn from_pairs(n: usize, pairs: &[(f64, &[u32])]) -> Result<Self> {
        Polynomial::new(n, pairs.iter().map(|(c, e)| Term { coeff: *c, exponents: e.to_vec() }).collect())
    }

    pub fn zero(n: usize) -> Self {
        Polynomial { n, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.exponents.iter().zip(x).map(|(e, xi)| powu(*xi, *e)).product::<f64>())
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for t in &self.terms {
            for k in 0..self.n {
                let ek = t.exponents[k];
                if ek == 0 {
                    continue;
                }
                let mut prod = t.coeff * ek as f64 * powu(x[k], ek - 1);
                for (j, (e, xj)) in t.exponents.iter().zip(x).enumerate() {
                    if j != k {
                        prod *= powu(*xj, *e);
                    }
                }
                g[k] += prod;
            }
        }
        g
    }

    pub fn hessian(&self, x: &[f64]) -> Matrix {
        let n = self.n;
        let mut h = Matrix::zeros(n, n);
        for t in &self.terms {
            for a in 0..n {
                for b in a..n {
                    let mut e = t.exponents.clone();
                    let mut c = t.coeff;
                    if e[a] == 0 {
                        continue;
                    }
                    c *= e[a] as f64;
                    e[a] -= 1;
                    if e[b] == 0 {
                        continue;
                    }
                    c *= e[b] as f64;
                    e[b] -= 1;
                    let val = c * e.iter().zip(x).map(|(ei, xi)| powu(*xi, *ei)).product::<f64>();
                    h[(a, b)] += val;
                    if a != b {
                        h[(b, a)] += val;
                    }
                }
            }
        }
        h
    }
}
