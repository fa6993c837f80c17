//! Gegenbauer polynomials on the sphere S^{d-1}, their monomial expansion
//! coefficients, and the product kernels built from them.
//!
//! The family is normalized by Q_0(x) = 1, Q_1(x) = d·x and the three-term
//! recurrence ((k+1)/(d+2k))·Q_{k+1}(x) = x·Q_k(x) - ((d+k-3)/(d+2k-4))·Q_{k-1}(x).
//! At k = 1 the trailing coefficient reads (d-2)/(d-2), which cancels to 1
//! for every d; using the cancelled value keeps d = 2 well defined, where the
//! family degenerates to 2·T_k (twice the Chebyshev polynomials).
//!
//! Polynomials are stored as exact rational monomial coefficient vectors, so
//! evaluation and expansion-coefficient extraction (a triangular solve) share
//! one representation.

use crate::qfield::{ExactReal, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::cell::RefCell;
use std::collections::HashMap;

fn rat(n: i64) -> Rational {
    Rational::from(BigInt::from(n))
}

/// Cached Gegenbauer coefficient rows for a fixed ambient dimension d ≥ 2.
/// Row k holds the monomial coefficients of Q_k, lowest degree first.
pub struct GegenbauerBasis {
    dimension: u32,
    rows: RefCell<Vec<Vec<Rational>>>,
    expansions: RefCell<HashMap<u32, Vec<Rational>>>,
}

impl GegenbauerBasis {
    pub fn new(dimension: u32) -> Self {
        assert!(dimension >= 2, "ambient dimension must be at least 2");
        GegenbauerBasis {
            dimension,
            rows: RefCell::new(vec![
                vec![Rational::one()],
                vec![Rational::zero(), rat(dimension as i64)],
            ]),
            expansions: RefCell::new(HashMap::new()),
        }
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    fn ensure_degree(&self, k: u32) {
        let mut rows = self.rows.borrow_mut();
        let d = self.dimension as i64;
        while rows.len() <= k as usize {
            let k_prev = (rows.len() - 1) as i64;
            // Q_{k+1} = ((d+2k)/(k+1)) (x·Q_k - c_k·Q_{k-1}), c_1 = 1.
            let lead = Rational::new(BigInt::from(d + 2 * k_prev), BigInt::from(k_prev + 1));
            let c = if k_prev == 1 {
                Rational::one()
            } else {
                Rational::new(BigInt::from(d + k_prev - 3), BigInt::from(d + 2 * k_prev - 4))
            };
            let q_k = &rows[rows.len() - 1];
            let q_km1 = &rows[rows.len() - 2];
            let mut next = vec![Rational::zero(); q_k.len() + 1];
            for (i, coeff) in q_k.iter().enumerate() {
                next[i + 1] += coeff * &lead;
            }
            for (i, coeff) in q_km1.iter().enumerate() {
                next[i] -= coeff * &c * &lead;
            }
            rows.push(next);
        }
    }

    /// Monomial coefficients of Q_k, lowest degree first.
    pub fn coefficients(&self, k: u32) -> Vec<Rational> {
        self.ensure_degree(k);
        self.rows.borrow()[k as usize].clone()
    }

    /// Exact evaluation of Q_k at x.
    pub fn eval_q(&self, k: u32, x: &ExactReal) -> ExactReal {
        self.ensure_degree(k);
        let rows = self.rows.borrow();
        // Horner from the top coefficient down.
        let coeffs = &rows[k as usize];
        let mut acc = ExactReal::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * x) + &ExactReal::from_rational(c.clone());
        }
        acc
    }

    /// Coefficients f_{λ,l} with x^λ = Σ_{l=0}^{λ} f_{λ,l}·Q_l(x), by exact
    /// back-substitution against the triangular monomial matrix of Q_0..Q_λ.
    pub fn expand_monomial(&self, lambda: u32) -> Vec<Rational> {
        if let Some(cached) = self.expansions.borrow().get(&lambda) {
            return cached.clone();
        }
        self.ensure_degree(lambda);
        let rows = self.rows.borrow();
        let n = lambda as usize;
        // residual starts as the monomial x^λ.
        let mut residual = vec![Rational::zero(); n + 1];
        residual[n] = Rational::one();
        let mut f = vec![Rational::zero(); n + 1];
        for l in (0..=n).rev() {
            let q = &rows[l];
            let lead = &q[l];
            let coeff = &residual[l] / lead;
            if !coeff.is_zero() {
                for (i, qc) in q.iter().enumerate() {
                    residual[i] -= &coeff * qc;
                }
            }
            f[l] = coeff;
        }
        debug_assert!(residual.iter().all(|r| r.is_zero()));
        drop(rows);
        self.expansions.borrow_mut().insert(lambda, f.clone());
        f
    }

    /// The kernel F_{λ,μ}(x) = Σ_{l=0}^{min(λ,μ)} f_{λ,l}·f_{μ,l}·Q_l(x).
    pub fn eval_f(&self, lambda: u32, mu: u32, x: &ExactReal) -> ExactReal {
        let fl = self.expand_monomial(lambda);
        let fm = self.expand_monomial(mu);
        let mut acc = ExactReal::zero();
        for l in 0..=lambda.min(mu) {
            let prod = &fl[l as usize] * &fm[l as usize];
            if prod.is_zero() {
                continue;
            }
            acc += &(&ExactReal::from_rational(prod) * &self.eval_q(l, x));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::ratio;

    #[test]
    fn base_cases() {
        let b = GegenbauerBasis::new(3);
        let half = ExactReal::from_rational(ratio(1, 2));
        assert_eq!(b.eval_q(0, &half), ExactReal::one());
        assert_eq!(b.eval_q(1, &half), ExactReal::from_rational(ratio(3, 2)));
        let b7 = GegenbauerBasis::new(7);
        assert_eq!(b7.eval_q(0, &ExactReal::sqrt_int(5)), ExactReal::one());
    }

    #[test]
    fn degree_two_value() {
        // One recurrence step gives Q_2 = (d+2)(d·x² - 1)/2.
        let b = GegenbauerBasis::new(4);
        assert_eq!(b.eval_q(2, &ExactReal::zero()), ExactReal::from_int(-3));
        for d in 2..10u32 {
            let b = GegenbauerBasis::new(d);
            let x = ExactReal::from_rational(ratio(1, 3));
            let expected = ExactReal::from_rational(
                ratio((d as i64 + 2) * d as i64, 18) - ratio(d as i64 + 2, 2),
            );
            assert_eq!(b.eval_q(2, &x), expected);
        }
    }

    #[test]
    fn chebyshev_degeneration() {
        // d = 2: Q_k = 2·T_k for k >= 1.
        let b = GegenbauerBasis::new(2);
        assert_eq!(b.coefficients(2), vec![ratio(-2, 1), ratio(0, 1), ratio(4, 1)]);
        assert_eq!(
            b.coefficients(3),
            vec![ratio(0, 1), ratio(-6, 1), ratio(0, 1), ratio(8, 1)]
        );
        // Q_k(cos θ) = 2cos(kθ): at x = 1 every Q_k(1) = 2.
        for k in 1..8 {
            assert_eq!(b.eval_q(k, &ExactReal::one()), ExactReal::from_int(2));
        }
    }

    #[test]
    fn monomial_expansions() {
        let b = GegenbauerBasis::new(4);
        assert_eq!(b.expand_monomial(0), vec![ratio(1, 1)]);
        assert_eq!(b.expand_monomial(1), vec![ratio(0, 1), ratio(1, 4)]);
        assert_eq!(
            b.expand_monomial(2),
            vec![ratio(1, 4), ratio(0, 1), ratio(1, 12)]
        );
    }

    #[test]
    fn reconstruction_identity() {
        // Σ_l f_{λ,l}·Q_l = x^λ coefficientwise, all λ ≤ 8, d ∈ 2..=24.
        for d in 2..=24u32 {
            let b = GegenbauerBasis::new(d);
            for lambda in 0..=8u32 {
                let f = b.expand_monomial(lambda);
                let mut acc = vec![Rational::zero(); lambda as usize + 1];
                for l in 0..=lambda {
                    for (i, c) in b.coefficients(l).iter().enumerate() {
                        acc[i] += &f[l as usize] * c;
                    }
                }
                for (i, c) in acc.iter().enumerate() {
                    let expected = if i == lambda as usize {
                        Rational::one()
                    } else {
                        Rational::zero()
                    };
                    assert_eq!(*c, expected, "d={d} λ={lambda} coeff {i}");
                }
            }
        }
    }

    #[test]
    fn degree_and_parity() {
        for d in [2u32, 3, 5, 8, 24] {
            let b = GegenbauerBasis::new(d);
            for k in 0..=8u32 {
                let coeffs = b.coefficients(k);
                assert_eq!(coeffs.len(), k as usize + 1);
                assert!(!coeffs[k as usize].is_zero(), "degree exactly k");
                for (i, c) in coeffs.iter().enumerate() {
                    if (i as u32) % 2 != k % 2 {
                        assert!(c.is_zero(), "parity violation d={d} k={k} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn f_kernel_values() {
        let b = GegenbauerBasis::new(4);
        let x = ExactReal::from_rational(ratio(2, 7));
        assert_eq!(b.eval_f(0, 0, &x), ExactReal::one());
        assert_eq!(
            b.eval_f(1, 1, &ExactReal::one()),
            ExactReal::from_rational(ratio(1, 4))
        );
        assert_eq!(b.eval_f(2, 0, &x), ExactReal::from_rational(ratio(1, 4)));
    }

    #[test]
    fn f_kernel_symmetry() {
        for d in [2u32, 3, 6] {
            let b = GegenbauerBasis::new(d);
            let xs = [
                ExactReal::from_rational(ratio(1, 2)),
                ExactReal::from_term(ratio(1, 3), 5),
                ExactReal::from_int(-1),
            ];
            for lambda in 0..5 {
                for mu in 0..5 {
                    for x in &xs {
                        assert_eq!(b.eval_f(lambda, mu, x), b.eval_f(mu, lambda, x));
                    }
                }
            }
        }
    }
}
