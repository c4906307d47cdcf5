//! Candidate readings of the coefficient recursions and the oracle harness
//! that selects among them.
//!
//! Five independent binary choices give 32 bundles. A bundle survives when
//! (α) the monomial Gram data it produces gives `<P_01, P_01> = 1` and a
//! symmetric Gram matrix, exactly, and (β) every probed table entry agrees
//! with discrete quadrature oracles on `G_{l-2}` and `G_l`, with the error
//! shrinking between the two levels and below 1% relative on the finer one.

use std::fmt;

use num_traits::{One, Signed};
use serde::Serialize;

use super::monomial::monomial_tables_with;
use super::multiharmonic::multiharmonic_tables_with;
use super::oracle::{discrete_oracle, OracleValues};
use super::{MonomialTables, MultiharmonicTables};
use crate::error::{Error, Result};
use crate::orthopoly::monomial_inner;
use crate::scalar::{ratio_to_f64, Rational};
use crate::topology::check_b;

/// Leading term of the `η_j` recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaLeadTerm {
    InnerProductB,
    MonomialBeta,
}

/// Value of the index `-1` factor at `l = 0` in the `η`/`γ` sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinusOneTerm {
    Zero,
    One,
}

/// What the second `a_j, b_j` equation sums against: the unknowns `(a_j + b_j)`
/// times a lumped factor, or the lower-index `(a_l + b_l)` term by term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SumReading {
    Unknowns,
    LowerIndex,
}

/// Initial `(η_0, γ_0)`: `(-1, 1)`, or `(0, -1)` from the boundary
/// conditions defining the monomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialValues {
    Alternate,
    BoundaryConditions,
}

/// Sequence standing behind the factor indexed `l - 1` in the `η`/`γ` sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SumSource {
    MonomialAlpha,
    InnerProductA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ConventionBundle {
    pub eta_lead: EtaLeadTerm,
    pub minus_one: MinusOneTerm,
    pub ab_sum: SumReading,
    pub initial: InitialValues,
    pub source: SumSource,
}

impl ConventionBundle {
    /// The bundle the harness selects for every tested `b`.
    pub const fn consistent() -> Self {
        ConventionBundle {
            eta_lead: EtaLeadTerm::InnerProductB,
            minus_one: MinusOneTerm::One,
            ab_sum: SumReading::LowerIndex,
            initial: InitialValues::BoundaryConditions,
            source: SumSource::InnerProductA,
        }
    }

    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(32);
        for eta_lead in [EtaLeadTerm::InnerProductB, EtaLeadTerm::MonomialBeta] {
            for minus_one in [MinusOneTerm::Zero, MinusOneTerm::One] {
                for ab_sum in [SumReading::Unknowns, SumReading::LowerIndex] {
                    for initial in [InitialValues::Alternate, InitialValues::BoundaryConditions] {
                        for source in [SumSource::MonomialAlpha, SumSource::InnerProductA] {
                            out.push(ConventionBundle { eta_lead, minus_one, ab_sum, initial, source });
                        }
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for ConventionBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lead = match self.eta_lead {
            EtaLeadTerm::InnerProductB => "b",
            EtaLeadTerm::MonomialBeta => "beta",
        };
        let m1 = match self.minus_one {
            MinusOneTerm::Zero => "0",
            MinusOneTerm::One => "1",
        };
        let sum = match self.ab_sum {
            SumReading::Unknowns => "unknowns",
            SumReading::LowerIndex => "lower",
        };
        let init = match self.initial {
            InitialValues::Alternate => "alt",
            InitialValues::BoundaryConditions => "bc",
        };
        let src = match self.source {
            SumSource::MonomialAlpha => "alpha",
            SumSource::InnerProductA => "a",
        };
        write!(f, "lead={lead} m1={m1} sum={sum} init={init} src={src}")
    }
}

/// One probed table entry compared against the two oracle levels.
#[derive(Debug, Clone, Serialize)]
pub struct EntryCheck {
    pub name: &'static str,
    pub j: usize,
    pub recursion: f64,
    pub coarse: f64,
    pub fine: f64,
    pub err_coarse: f64,
    pub err_fine: f64,
    pub passed: bool,
}

impl EntryCheck {
    /// Error below which both levels count as exact: floating-point roundoff
    /// of the Dirichlet solves, well under any discretization error at `l <= 8`.
    pub const EXACT: f64 = 1e-7;
    pub const MAX_RELATIVE: f64 = 1e-2;

    pub fn new(name: &'static str, j: usize, recursion: f64, coarse: f64, fine: f64) -> Self {
        let err_coarse = (coarse - recursion).abs();
        let err_fine = (fine - recursion).abs();
        let scale = recursion.abs().max(1.0) * Self::EXACT;
        let exact = err_coarse <= scale && err_fine <= scale;
        let rel = err_fine / recursion.abs().max(f64::MIN_POSITIVE);
        let passed = exact || (err_fine < err_coarse && rel < Self::MAX_RELATIVE);
        EntryCheck { name, j, recursion, coarse, fine, err_coarse, err_fine, passed }
    }

    pub fn relative_fine(&self) -> f64 {
        self.err_fine / self.recursion.abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateReport {
    pub bundle: ConventionBundle,
    /// `<P_01, P_01>` as `num/den`, or the failure that prevented computing it.
    pub unit_norm: String,
    pub unit_norm_ok: bool,
    pub symmetric: bool,
    pub max_asymmetry: f64,
    pub entries: Vec<EntryCheck>,
    pub oracle_ok: bool,
}

impl CandidateReport {
    pub fn survives(&self) -> bool {
        self.unit_norm_ok && self.symmetric && self.oracle_ok
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConventionResolution {
    pub b: usize,
    pub probe: usize,
    pub coarse_level: usize,
    pub fine_level: usize,
    pub candidates: Vec<CandidateReport>,
    pub survivor: Option<ConventionBundle>,
}

impl ConventionResolution {
    pub fn survivors(&self) -> Vec<ConventionBundle> {
        self.candidates.iter().filter(|c| c.survives()).map(|c| c.bundle).collect()
    }

    /// Residual table, one row per candidate.
    pub fn table(&self) -> String {
        let mut s = format!(
            "b={} probe={} levels {}/{}\n{:<58} {:>8} {:>6} {:>12} {:>9}\n",
            self.b, self.probe, self.coarse_level, self.fine_level, "bundle", "<P,P>=1", "sym", "worst rel", "oracle"
        );
        for c in &self.candidates {
            let worst = c.entries.iter().map(|e| e.relative_fine()).fold(0.0f64, f64::max);
            s.push_str(&format!(
                "{:<58} {:>8} {:>6} {:>12.3e} {:>9}\n",
                c.bundle.to_string(),
                c.unit_norm_ok,
                c.symmetric,
                worst,
                if c.oracle_ok { "pass" } else { "fail" }
            ));
        }
        s
    }
}

/// Default oracle levels: the finest `l <= 8` with `(b+2)^l <= 400000`, and `l - 2`.
pub fn default_levels(b: usize) -> (usize, usize) {
    let mut fine = 2;
    while fine < 8 && ((b + 2) as u128).pow(fine as u32 + 1) <= 400_000 {
        fine += 1;
    }
    (fine - 2, fine)
}

/// Runs the harness with the default levels.
pub fn resolve_conventions(b: usize, probe: usize) -> Result<ConventionResolution> {
    let (coarse, fine) = default_levels(b);
    resolve_conventions_at(b, probe, coarse, fine)
}

/// Evaluates every bundle; errors unless exactly one survives.
pub fn resolve_conventions_at(b: usize, probe: usize, coarse: usize, fine: usize) -> Result<ConventionResolution> {
    let res = evaluate_conventions(b, probe, coarse, fine)?;
    match res.survivors().len() {
        1 => Ok(res),
        0 => Err(Error::Convention { reason: "no consistent convention".into(), table: res.table() }),
        _ => Err(Error::Convention { reason: "ambiguous convention".into(), table: res.table() }),
    }
}

/// Evaluates every bundle without insisting on a unique survivor.
pub fn evaluate_conventions(b: usize, probe: usize, coarse: usize, fine: usize) -> Result<ConventionResolution> {
    check_b(b)?;
    if probe < 2 {
        return Err(Error::InvalidArgument("convention probe degree must be at least 2".into()));
    }
    if coarse >= fine {
        return Err(Error::InvalidArgument("coarse oracle level must be below the fine one".into()));
    }
    let oc = discrete_oracle(b, coarse, probe)?;
    let of = discrete_oracle(b, fine, probe)?;
    // Gram data over P_{jk}, j <= probe, needs monomial tables to 2 probe + 1.
    let jmax = 2 * probe + 1;
    let mut candidates = Vec::new();
    for bundle in ConventionBundle::all() {
        candidates.push(evaluate_bundle(b, probe, jmax, bundle, &oc, &of));
    }
    let survivors: Vec<_> = candidates.iter().filter(|c| c.survives()).map(|c| c.bundle).collect();
    let survivor = if survivors.len() == 1 { Some(survivors[0]) } else { None };
    Ok(ConventionResolution { b, probe, coarse_level: coarse, fine_level: fine, candidates, survivor })
}

fn evaluate_bundle(
    b: usize,
    probe: usize,
    jmax: usize,
    bundle: ConventionBundle,
    oc: &OracleValues,
    of: &OracleValues,
) -> CandidateReport {
    let failed = |why: String| CandidateReport {
        bundle,
        unit_norm: why,
        unit_norm_ok: false,
        symmetric: false,
        max_asymmetry: f64::INFINITY,
        entries: Vec::new(),
        oracle_ok: false,
    };
    let mh = match multiharmonic_tables_with(b, jmax, bundle.ab_sum) {
        Ok(t) => t,
        Err(e) => return failed(e.to_string()),
    };
    let mono = match monomial_tables_with(&mh, jmax, bundle) {
        Ok(t) => t,
        Err(e) => return failed(e.to_string()),
    };
    let norm = monomial_inner(0, 1, 0, 1, &mono).expect("tables cover degree 1");
    let mut max_asym = 0.0f64;
    let mut symmetric = true;
    for j in 0..=probe {
        for k in 1..=2 {
            for jp in 0..=probe {
                for kp in 1..=2 {
                    let x = monomial_inner(j, k, jp, kp, &mono).expect("covered");
                    let y = monomial_inner(jp, kp, j, k, &mono).expect("covered");
                    if x != y {
                        symmetric = false;
                        max_asym = max_asym.max(ratio_to_f64(&(x - y).abs()));
                    }
                }
            }
        }
    }
    let entries = compare_with_oracles(&mh, &mono, probe, oc, of);
    let oracle_ok = entries.iter().all(|e| e.passed);
    CandidateReport {
        bundle,
        unit_norm: crate::scalar::to_fraction_string(&norm),
        unit_norm_ok: norm == Rational::one(),
        symmetric,
        max_asymmetry: max_asym,
        entries,
        oracle_ok,
    }
}

/// Entry-by-entry comparison of tables with two oracle levels, `j <= probe`.
pub fn compare_with_oracles(
    mh: &MultiharmonicTables,
    mono: &MonomialTables,
    probe: usize,
    oc: &OracleValues,
    of: &OracleValues,
) -> Vec<EntryCheck> {
    let mut out = Vec::new();
    let rows: [(&'static str, &[Rational], &[f64], &[f64]); 8] = [
        ("a", &mh.a, &oc.a, &of.a),
        ("b", &mh.b_, &oc.b_, &of.b_),
        ("p", &mh.p, &oc.p, &of.p),
        ("q", &mh.q, &oc.q, &of.q),
        ("alpha", &mono.alpha, &oc.alpha, &of.alpha),
        ("beta", &mono.beta, &oc.beta, &of.beta),
        ("eta", &mono.eta, &oc.eta, &of.eta),
        ("gamma", &mono.gamma, &oc.gamma, &of.gamma),
    ];
    for (name, rec, c, f) in rows {
        for j in 0..=probe {
            out.push(EntryCheck::new(name, j, ratio_to_f64(&rec[j]), c[j], f[j]));
        }
    }
    out
}
