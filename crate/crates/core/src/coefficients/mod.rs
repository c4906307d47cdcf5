//! Exact coefficient sequences of the multiharmonic and monomial bases.

pub mod convention;
pub mod monomial;
pub mod multiharmonic;
pub mod oracle;

pub use convention::{resolve_conventions, resolve_conventions_at, ConventionBundle, ConventionResolution};
pub use monomial::{monomial_tables, monomial_tables_with};
pub use multiharmonic::{multiharmonic_tables, multiharmonic_tables_with};

use serde_json::{json, Value};

use crate::error::Result;
use crate::scalar::{to_fraction_string, Rational};

/// `a_j = <f_j1, f_01>`, `b_j = <f_j1, f_02>`, and the rescaled junction values
/// `p_j = s^{-j} f_j1(J1)`, `q_j = s^{-j} f_j1(J2)` with `s = r/(b+2)`; `J1` is
/// the junction next to `q1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiharmonicTables {
    pub b: usize,
    pub jmax: usize,
    pub a: Vec<Rational>,
    pub b_: Vec<Rational>,
    pub p: Vec<Rational>,
    pub q: Vec<Rational>,
}

/// Values and normal derivatives of the monomials at `q2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialTables {
    pub b: usize,
    pub jmax: usize,
    pub alpha: Vec<Rational>,
    pub beta: Vec<Rational>,
    pub eta: Vec<Rational>,
    pub gamma: Vec<Rational>,
    pub convention: ConventionBundle,
}

/// Both table families, built to a common degree.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTables {
    pub multiharmonic: MultiharmonicTables,
    pub monomial: MonomialTables,
}

impl CoefficientTables {
    /// Tables to `jmax` under the consistent convention.
    pub fn build(b: usize, jmax: usize) -> Result<Self> {
        Self::build_with(b, jmax, ConventionBundle::consistent())
    }

    pub fn build_with(b: usize, jmax: usize, conv: ConventionBundle) -> Result<Self> {
        let multiharmonic = multiharmonic_tables_with(b, jmax, conv.ab_sum)?;
        let monomial = monomial_tables_with(&multiharmonic, jmax, conv)?;
        Ok(CoefficientTables { multiharmonic, monomial })
    }

    pub fn b(&self) -> usize {
        self.multiharmonic.b
    }

    pub fn jmax(&self) -> usize {
        self.multiharmonic.jmax.min(self.monomial.jmax)
    }

    /// `{"b", "jmax", "a", "b_", "p", "q", "alpha", "beta", "eta", "gamma", "convention"}`.
    pub fn to_json(&self) -> Value {
        let f = |v: &[Rational]| v.iter().map(to_fraction_string).collect::<Vec<_>>();
        let mh = &self.multiharmonic;
        let mo = &self.monomial;
        json!({
            "b": mh.b,
            "jmax": self.jmax(),
            "a": f(&mh.a),
            "b_": f(&mh.b_),
            "p": f(&mh.p),
            "q": f(&mh.q),
            "alpha": f(&mo.alpha),
            "beta": f(&mo.beta),
            "eta": f(&mo.eta),
            "gamma": f(&mo.gamma),
            "convention": mo.convention,
        })
    }
}
