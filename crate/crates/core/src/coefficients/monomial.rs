//! Boundary data `α_j = P_{j1}(q2)`, `β_j = P_{j2}(q2)`, `η_j = ∂_n P_{j1}(q2)`,
//! `γ_j = ∂_n P_{j2}(q2)` of the monomials.

use num_traits::{One, Zero};

use super::convention::{ConventionBundle, EtaLeadTerm, InitialValues, MinusOneTerm, SumSource};
use super::multiharmonic::multiharmonic_tables_with;
use super::{MonomialTables, MultiharmonicTables};
use crate::error::{Error, Result};
use crate::scalar::{int, pow, rat, Rational};

/// `X = (b+2)(2b+1)/b`, the factor by which `Δ` rescales under one contraction.
fn growth(b: usize) -> Rational {
    let bi = b as i64;
    rat((bi + 2) * (2 * bi + 1), bi)
}

/// `ζ_j = (b+1)^2 / ((b+2)(2b+1)(X^{j-1} - 1))`, `j >= 2`.
pub fn zeta(b: usize, j: usize) -> Rational {
    let bi = b as i64;
    int((bi + 1) * (bi + 1)) / (int((bi + 2) * (2 * bi + 1)) * (pow(&growth(b), j as i32 - 1) - int(1)))
}

/// `ι_j = (b+1)^2 / ((2b+1)(X^j - 1))`, `j >= 1`.
pub fn iota(b: usize, j: usize) -> Rational {
    let bi = b as i64;
    int((bi + 1) * (bi + 1)) / (int(2 * bi + 1) * (pow(&growth(b), j as i32) - int(1)))
}

/// `α_0..=α_jmax` from the quadratic recursion.
pub fn alpha_sequence(b: usize, jmax: usize) -> Vec<Rational> {
    let mut al = vec![Rational::one(), rat(1, 2)];
    for j in 2..=jmax {
        let mut sum = Rational::zero();
        for l in 1..j {
            let mut inner = int(2) * &al[l];
            for lp in 1..=l {
                inner += &al[l - lp] * &al[lp];
            }
            sum += &al[j - l] * inner;
        }
        al.push(zeta(b, j) * sum);
    }
    al.truncate(jmax + 1);
    al
}

/// `β_0..=β_jmax` given enough `α`.
pub fn beta_sequence(b: usize, jmax: usize, al: &[Rational]) -> Vec<Rational> {
    let mut be = vec![-Rational::one()];
    for j in 1..=jmax {
        let mut sum = Rational::zero();
        for l in 0..j {
            for lp in 0..=(j - l) {
                sum += &be[l] * &al[lp] * &al[j - l - lp];
            }
        }
        be.push(iota(b, j) * sum);
    }
    be
}

/// Monomial tables for `0..=jmax` under the consistent bundle.
pub fn monomial_tables(b: usize, jmax: usize) -> Result<MonomialTables> {
    let mh = multiharmonic_tables_with(b, jmax, ConventionBundle::consistent().ab_sum)?;
    monomial_tables_with(&mh, jmax, ConventionBundle::consistent())
}

/// Monomial tables for `0..=jmax` from `mh` (which must cover `jmax - 1`).
pub fn monomial_tables_with(mh: &MultiharmonicTables, jmax: usize, conv: ConventionBundle) -> Result<MonomialTables> {
    if jmax > 0 && mh.jmax + 1 < jmax {
        return Err(Error::TablesTooShort { have: mh.jmax, need: jmax - 1 });
    }
    let b = mh.b;
    let alpha = alpha_sequence(b, jmax);
    let beta = beta_sequence(b, jmax, &alpha);
    let (eta0, gamma0) = match conv.initial {
        InitialValues::Alternate => (-Rational::one(), Rational::one()),
        InitialValues::BoundaryConditions => (Rational::zero(), -Rational::one()),
    };
    let lower = |l: usize| -> Rational {
        // the factor written with index l - 1 in both sums
        if l == 0 {
            match conv.minus_one {
                MinusOneTerm::Zero => Rational::zero(),
                MinusOneTerm::One => Rational::one(),
            }
        } else {
            match conv.source {
                SumSource::MonomialAlpha => alpha[l - 1].clone(),
                SumSource::InnerProductA => mh.a[l - 1].clone(),
            }
        }
    };
    let mut eta = vec![eta0];
    let mut gamma = vec![gamma0];
    for j in 1..=jmax {
        let lead = match conv.eta_lead {
            EtaLeadTerm::InnerProductB => mh.b_[j - 1].clone(),
            EtaLeadTerm::MonomialBeta => beta[j - 1].clone(),
        };
        let mut e = lead;
        let mut g = Rational::zero();
        for l in 0..=j {
            let w = lower(l);
            e += &alpha[j - l] * &w;
            g += &beta[j - l] * &w;
        }
        eta.push(e);
        gamma.push(g);
    }
    Ok(MonomialTables { b, jmax, alpha, beta, eta, gamma, convention: conv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::multiharmonic::multiharmonic_tables;

    fn factorial(n: u32) -> Rational {
        int((1..=n as i64).product::<i64>().max(1))
    }

    #[test]
    fn interval_monomials() {
        let t = monomial_tables(1, 5).unwrap();
        for j in 0..=5u32 {
            let jj = j as usize;
            assert_eq!(t.alpha[jj], Rational::one() / factorial(2 * j));
            assert_eq!(t.beta[jj], -Rational::one() / factorial(2 * j + 1));
            assert_eq!(t.gamma[jj], -Rational::one() / factorial(2 * j));
            if j > 0 {
                assert_eq!(t.eta[jj], Rational::one() / factorial(2 * j - 1));
            }
        }
        assert!(t.eta[0].is_zero());
    }

    #[test]
    fn initial_values() {
        for b in 1..6 {
            let t = monomial_tables(b, 1).unwrap();
            assert_eq!(t.alpha[0], int(1));
            assert_eq!(t.alpha[1], rat(1, 2));
            assert_eq!(t.beta[0], int(-1));
        }
    }

    #[test]
    fn alpha_beta_match_inner_product_expansion() {
        // α_i = a_{i-1} + b_{i-1} + Σ α_{i-m} b_{m-1},  β_i = Σ β_{i-m} b_{m-1}
        for b in 1..6 {
            let mh = multiharmonic_tables(b, 6).unwrap();
            let al = alpha_sequence(b, 6);
            let be = beta_sequence(b, 6, &al);
            for i in 1..=6 {
                let mut x = &mh.a[i - 1] + &mh.b_[i - 1];
                let mut y = Rational::zero();
                for m in 1..i {
                    x += &al[i - m] * &mh.b_[m - 1];
                }
                for m in 1..=i {
                    y += &be[i - m] * &mh.b_[m - 1];
                }
                assert_eq!(al[i], x, "alpha b={b} i={i}");
                assert_eq!(be[i], y, "beta b={b} i={i}");
            }
        }
    }
}
