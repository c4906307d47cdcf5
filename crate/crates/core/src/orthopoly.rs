//! Gram matrices of monomials, Gram-Schmidt, and the recursion satisfied by
//! the resulting orthogonal polynomials under the Green operator.
//!
//! Monomials are taken in the interleaved order `P_0 = P_01`, `P_1 = P_02`,
//! `P_2 = P_11`, ..., i.e. `P_{2j+k-1} = P_{jk}`. The Green shift raises the
//! degree by one, which moves two slots in this order, and the mirror
//! symmetry of the measure makes `p_n` alternately even and odd. The Green
//! image of `p_n` therefore expands over `p_{n-2}, p_n, p_{n+2}`, and the
//! three-term recursion lives on the two parity families `p_0, p_2, ...` and
//! `p_1, p_3, ...`. Both the interleaved and the per-family coefficients are
//! reported; nothing is assumed about the band.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::calculus::{green_norm_squared, SampledFunction};
use crate::coefficients::{CoefficientTables, MonomialTables, MultiharmonicTables};
use crate::error::{Error, Result};
use crate::polyspace::{green_shift, inner_product, monomial_to_fbasis, sample, PolySpec};
use crate::scalar::{int, rat, ratio_to_f64, sqrt_rational, to_decimal_string, to_fraction_string, Rational};
use crate::topology::GraphLevel;

/// `(j, k)` of the interleaved index `n`.
pub fn interleaved(n: usize) -> (usize, usize) {
    (n / 2, n % 2 + 1)
}

/// Coefficient tables deep enough for `n` orthogonal polynomials and their Green images.
pub fn tables_for(b: usize, n: usize) -> Result<CoefficientTables> {
    CoefficientTables::build(b, n + 4)
}

/// `<P_{jk}, P_{j'k'}>` from boundary data:
/// `Σ_{l=0}^{j} (V_{j-l,k} D_{j'+l+1,k'} - V_{j'+l+1,k'} D_{j-l,k})` with
/// `V = (α, β)` the values and `D = (η, γ)` the normal derivatives at `q2`.
pub fn monomial_inner(j: usize, k: usize, jp: usize, kp: usize, t: &MonomialTables) -> Result<Rational> {
    let need = j + jp + 1;
    if t.alpha.len() <= need || t.eta.len() <= need {
        return Err(Error::TablesTooShort { have: t.jmax, need });
    }
    let val = |k: usize, i: usize| if k == 1 { &t.alpha[i] } else { &t.beta[i] };
    let der = |k: usize, i: usize| if k == 1 { &t.eta[i] } else { &t.gamma[i] };
    if !(1..=2).contains(&k) || !(1..=2).contains(&kp) {
        return Err(Error::InvalidArgument("monomial index k must be 1 or 2".into()));
    }
    let mut sum = Rational::zero();
    for l in 0..=j {
        sum += val(k, j - l) * der(kp, jp + l + 1) - val(kp, jp + l + 1) * der(k, j - l);
    }
    Ok(sum)
}

/// Gram matrix of `P_0, ..., P_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub b: usize,
    pub n: usize,
    pub entries: Vec<Vec<Rational>>,
}

impl GramMatrix {
    /// Pivots of `LDL^T` without pivoting; all positive iff every leading minor is.
    pub fn pivots(&self) -> Vec<Rational> {
        let mut a = self.entries.clone();
        let n = self.n;
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let p = a[k][k].clone();
            piv.push(p.clone());
            if p.is_zero() {
                break;
            }
            for i in k + 1..n {
                let f = &a[i][k] / &p;
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let d = &f * &a[k][j];
                    a[i][j] -= d;
                }
            }
        }
        piv
    }

    /// Leading principal minors.
    pub fn leading_minors(&self) -> Vec<Rational> {
        let mut acc = Rational::one();
        self.pivots()
            .into_iter()
            .map(|p| {
                acc *= p;
                acc.clone()
            })
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    pub fn is_positive_definite(&self) -> bool {
        let p = self.pivots();
        p.len() == self.n && p.iter().all(|x| x.is_positive())
    }
}

/// Fills the Gram matrix from the closed-form inner products and validates it.
pub fn gram_matrix(n: usize, tables: &CoefficientTables) -> Result<GramMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one monomial".into()));
    }
    let mono = &tables.monomial;
    let mut entries = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for jx in 0..n {
            let (j, k) = interleaved(i);
            let (jp, kp) = interleaved(jx);
            entries[i][jx] = monomial_inner(j, k, jp, kp, mono)?;
        }
    }
    let g = GramMatrix { b: tables.b(), n, entries };
    if !g.is_symmetric() {
        return Err(Error::Consistency("monomial Gram matrix is not symmetric".into()));
    }
    if !g.is_positive_definite() {
        return Err(Error::Consistency("monomial Gram matrix is not positive definite".into()));
    }
    Ok(g)
}

/// Three-term data of one parity family `p_f, p_{f+2}, p_{f+4}, ...`.
#[derive(Debug, Clone)]
pub struct FamilyRecursion {
    pub parity: usize,
    /// Global indices of the members.
    pub members: Vec<usize>,
    /// `s_i = <G p, p> / <p, p>` at member `i`.
    pub s: Vec<Rational>,
    /// `t_i = <p_i, p_i> / <p_{i-1}, p_{i-1}>` within the family, `t_0 = 0`.
    pub t: Vec<Rational>,
    /// Measured coefficient of the previous member in the Green image.
    pub lower: Vec<Rational>,
    /// Whether the Green image of member `i` has family band exactly `{i-1, i, i+1}`
    /// with unit top coefficient and lower coefficient equal to `t_i`.
    pub three_term: Vec<bool>,
}

impl FamilyRecursion {
    /// `||p_i||^2 = ||p_0||^2 Π_{m<=i} lower_m` for every member with `three_term` up to `i`.
    pub fn product_identity(&self, norm_sq: &[Rational]) -> Vec<bool> {
        let first = &norm_sq[self.members[0]];
        let mut acc = first.clone();
        let mut out = Vec::new();
        for (i, &g) in self.members.iter().enumerate() {
            if i > 0 {
                acc *= &self.lower[i];
            }
            out.push(acc == norm_sq[g]);
        }
        out
    }
}

/// Orthogonal polynomials `p_0, p_1, ...` with their recursion data.
#[derive(Debug, Clone)]
pub struct OrthogonalSequence {
    pub b: usize,
    /// `p_n` as jet arrays.
    pub specs: Vec<PolySpec>,
    /// `p_n = Σ_m coords[n][m] P_m` (unit diagonal).
    pub coords: Vec<Vec<Rational>>,
    /// `d_n^{-2} = <p_n, p_n>`.
    pub norm_sq: Vec<Rational>,
    /// Interleaved `s_n = d_n^2 <G p_n, p_n>`, for `n` whose Green image is covered.
    pub s: Vec<Rational>,
    /// Interleaved `t_n = d_{n-1}^2 d_n^{-2}`, `t_0 = 0`.
    pub t: Vec<Rational>,
    /// Nonzero coefficients `<G p_n, p_l> / <p_l, p_l>` of each Green image.
    pub bandwidth_report: Vec<BTreeMap<usize, Rational>>,
    /// Indices `(n, l)` with `l + 2 < n` and `<G p_n, p_l> != 0`.
    pub low_index_violations: Vec<(usize, usize)>,
    pub families: Vec<FamilyRecursion>,
}

impl OrthogonalSequence {
    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// Number of leading indices whose Green image lies inside the computed span.
    pub fn covered(&self) -> usize {
        self.bandwidth_report.len()
    }

    /// `(n, band)` for each covered index, band = sorted indices with nonzero coefficient.
    pub fn bands(&self) -> Vec<(usize, Vec<usize>)> {
        self.bandwidth_report.iter().enumerate().map(|(n, m)| (n, m.keys().copied().collect())).collect()
    }

    /// Indices whose interleaved band is not contained in `{n-1, n, n+1}`.
    pub fn interleaved_three_term_failures(&self) -> Vec<usize> {
        self.bands()
            .into_iter()
            .filter(|(n, band)| band.iter().any(|&l| l + 1 < *n || l > n + 1))
            .map(|(n, _)| n)
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let f = |v: &[Rational]| v.iter().map(to_fraction_string).collect::<Vec<_>>();
        let band: Vec<BTreeMap<String, String>> = self
            .bandwidth_report
            .iter()
            .map(|m| m.iter().map(|(k, v)| (k.to_string(), to_fraction_string(v))).collect())
            .collect();
        let families: Vec<Value> = self
            .families
            .iter()
            .map(|fam| {
                json!({
                    "parity": fam.parity,
                    "members": fam.members,
                    "s": f(&fam.s),
                    "t": f(&fam.t),
                    "lower": f(&fam.lower),
                    "three_term": fam.three_term,
                    "product_identity": fam.product_identity(&self.norm_sq),
                })
            })
            .collect();
        json!({
            "b": self.b,
            "specs": self.specs.iter().map(|s| s.to_json()["coeffs"].clone()).collect::<Vec<_>>(),
            "monomial_coords": self.coords.iter().map(|c| f(c)).collect::<Vec<_>>(),
            "norm_sq": f(&self.norm_sq),
            "s": f(&self.s),
            "t": f(&self.t),
            "bandwidth_report": band,
            "low_index_violations": self.low_index_violations,
            "interleaved_three_term_failures": self.interleaved_three_term_failures(),
            "families": families,
        })
    }
}

/// Classical Gram-Schmidt on `P_0, ..., P_{n-1}`, exactly.
pub fn gram_schmidt(n: usize, tables: &CoefficientTables) -> Result<OrthogonalSequence> {
    let gram = gram_matrix(n, tables)?;
    let g = &gram.entries;
    let mut coords: Vec<Vec<Rational>> = Vec::with_capacity(n);
    let mut norm_sq: Vec<Rational> = Vec::with_capacity(n);
    for i in 0..n {
        let mut c = vec![Rational::zero(); n];
        c[i] = Rational::one();
        for l in 0..i {
            // <P_i, p_l> = Σ_m coords[l][m] G[i][m]
            let mut ip = Rational::zero();
            for m in 0..=l {
                if !coords[l][m].is_zero() {
                    ip += &coords[l][m] * &g[i][m];
                }
            }
            if ip.is_zero() {
                continue;
            }
            let f = ip / &norm_sq[l];
            for m in 0..=l {
                let d = &f * &coords[l][m];
                c[m] -= d;
            }
        }
        let mut nn = Rational::zero();
        for a in 0..=i {
            if c[a].is_zero() {
                continue;
            }
            for bx in 0..=i {
                if !c[bx].is_zero() {
                    nn += &c[a] * &c[bx] * &g[a][bx];
                }
            }
        }
        if !nn.is_positive() {
            return Err(Error::Consistency(format!("non-positive norm at index {i}")));
        }
        coords.push(c);
        norm_sq.push(nn);
    }
    let mono = &tables.monomial;
    let basis: Vec<PolySpec> = (0..n)
        .map(|m| {
            let (j, k) = interleaved(m);
            monomial_to_fbasis(tables.b(), j, k, mono)
        })
        .collect::<Result<_>>()?;
    let specs = coords
        .iter()
        .map(|c| {
            let mut s = PolySpec::zero(tables.b());
            for (m, x) in c.iter().enumerate() {
                if !x.is_zero() {
                    s = s.add_scaled(&basis[m], x);
                }
            }
            s.trimmed()
        })
        .collect();
    Ok(OrthogonalSequence {
        b: tables.b(),
        specs,
        coords,
        norm_sq,
        s: Vec::new(),
        t: Vec::new(),
        bandwidth_report: Vec::new(),
        low_index_violations: Vec::new(),
        families: Vec::new(),
    })
}

/// Re-orthogonalizes arbitrary specs with the jet-array inner product.
pub fn gram_schmidt_specs(specs: &[PolySpec], mh: &MultiharmonicTables) -> Result<Vec<PolySpec>> {
    let mut out: Vec<PolySpec> = Vec::with_capacity(specs.len());
    let mut norms: Vec<Rational> = Vec::with_capacity(specs.len());
    for s in specs {
        let mut v = s.clone();
        for (p, nn) in out.iter().zip(&norms) {
            let c = inner_product(s, p, mh)? / nn;
            if !c.is_zero() {
                v = v.add_scaled(p, &-c);
            }
        }
        let v = v.trimmed();
        let nn = inner_product(&v, &v, mh)?;
        if nn.is_zero() {
            return Err(Error::Consistency("zero norm in Gram-Schmidt".into()));
        }
        out.push(v);
        norms.push(nn);
    }
    Ok(out)
}

/// Expands `G p_n` over the sequence for every `n` with `n + 2 < len`, and
/// extracts the interleaved and per-family recursion coefficients.
pub fn recursion_coefficients(seq: &mut OrthogonalSequence, tables: &CoefficientTables) -> Result<()> {
    let mh = &tables.multiharmonic;
    let len = seq.len();
    let covered = len.saturating_sub(2);
    let mut band = Vec::with_capacity(covered);
    let mut violations = Vec::new();
    let mut s = Vec::with_capacity(covered);
    let mut t = Vec::with_capacity(covered);
    for n in 0..covered {
        let g = green_shift(&seq.specs[n]);
        let mut coeffs = BTreeMap::new();
        for l in 0..len {
            let ip = inner_product(&g, &seq.specs[l], mh)?;
            if !ip.is_zero() {
                if l + 2 < n {
                    violations.push((n, l));
                }
                coeffs.insert(l, ip / &seq.norm_sq[l]);
            }
        }
        s.push(coeffs.get(&n).cloned().unwrap_or_else(Rational::zero));
        t.push(if n == 0 { Rational::zero() } else { &seq.norm_sq[n] / &seq.norm_sq[n - 1] });
        band.push(coeffs);
    }
    let mut families = Vec::new();
    for parity in 0..2 {
        let members: Vec<usize> = (parity..covered).step_by(2).collect();
        if members.is_empty() {
            continue;
        }
        let mut fam = FamilyRecursion {
            parity,
            members: members.clone(),
            s: Vec::new(),
            t: Vec::new(),
            lower: Vec::new(),
            three_term: Vec::new(),
        };
        for &n in &members {
            let coeffs: &BTreeMap<usize, Rational> = &band[n];
            let ti = if n < 2 { Rational::zero() } else { &seq.norm_sq[n] / &seq.norm_sq[n - 2] };
            let lower = if n < 2 { Rational::zero() } else { coeffs.get(&(n - 2)).cloned().unwrap_or_else(Rational::zero) };
            let top_ok = coeffs.get(&(n + 2)) == Some(&Rational::one());
            let inside = coeffs.keys().all(|&l| l == n || l == n + 2 || (n >= 2 && l == n - 2));
            fam.three_term.push(top_ok && inside && lower == ti);
            fam.s.push(coeffs.get(&n).cloned().unwrap_or_else(Rational::zero));
            fam.t.push(ti);
            fam.lower.push(lower);
        }
        families.push(fam);
    }
    seq.s = s;
    seq.t = t;
    seq.bandwidth_report = band;
    seq.low_index_violations = violations;
    seq.families = families;
    Ok(())
}

/// Gram-Schmidt on `n + 2` monomials followed by recursion extraction, so that
/// recursion data covers `p_0, ..., p_{n-1}`.
pub fn legendre(b: usize, n: usize) -> Result<(OrthogonalSequence, CoefficientTables)> {
    let tables = tables_for(b, n + 2)?;
    let mut seq = gram_schmidt(n + 2, &tables)?;
    recursion_coefficients(&mut seq, &tables)?;
    Ok((seq, tables))
}

/// Orthonormal-form coefficients `(√t_{i+1}, s_i, √t_i)` of one family member.
#[derive(Debug, Clone, Serialize)]
pub struct NormalizedStep {
    pub parity: usize,
    pub member: usize,
    pub index: usize,
    pub sqrt_t_next: String,
    pub s: String,
    pub sqrt_t: String,
    /// `d^2 <G p, G p> - t_{i+1} - s_i^2 - t_i`, exactly.
    pub exact_residual: String,
    /// The same residual with the rounded square roots, as a decimal.
    pub numeric_residual: String,
    pub numeric_residual_abs: f64,
}

/// Normalized recursion for every family member whose successor is covered and
/// whose Green image is three-term. Indices where the form fails are returned
/// separately instead of coefficients.
pub fn normalized_recursion(
    seq: &OrthogonalSequence,
    tables: &CoefficientTables,
    digits: u32,
) -> Result<(Vec<NormalizedStep>, Vec<usize>)> {
    let mh = &tables.multiharmonic;
    let mut out = Vec::new();
    let mut failures = Vec::new();
    for fam in &seq.families {
        for (i, &n) in fam.members.iter().enumerate() {
            if !fam.three_term[i] {
                failures.push(n);
                continue;
            }
            let next = n + 2;
            let t_next = &seq.norm_sq[next] / &seq.norm_sq[n];
            let s = &fam.s[i];
            let t = &fam.t[i];
            let g = green_shift(&seq.specs[n]);
            let gg = inner_product(&g, &g, mh)? / &seq.norm_sq[n];
            let exact = &gg - &t_next - s * s - t;
            let rt_next = sqrt_rational(&t_next, digits);
            let rt = sqrt_rational(t, digits);
            let numeric = &gg - &rt_next * &rt_next - s * s - &rt * &rt;
            out.push(NormalizedStep {
                parity: fam.parity,
                member: i,
                index: n,
                sqrt_t_next: to_decimal_string(&rt_next, digits as usize),
                s: to_decimal_string(s, digits as usize),
                sqrt_t: to_decimal_string(&rt, digits as usize),
                exact_residual: to_fraction_string(&exact),
                numeric_residual: to_decimal_string(&numeric, 6),
                numeric_residual_abs: ratio_to_f64(&numeric.abs()),
            });
        }
    }
    Ok((out, failures))
}

/// `||G||^2` estimated on `V_l` and its square root.
#[derive(Debug, Clone)]
pub struct GreenNorm {
    pub b: usize,
    pub level: usize,
    pub squared: Rational,
    pub norm: Rational,
}

/// `(Σ_{p,q} w(p) w(q) G(p,q)^2)^{1/2}` on `V_l`, squared value exact.
pub fn green_norm_estimate(b: usize, level: usize, digits: u32) -> Result<GreenNorm> {
    crate::topology::check_b(b)?;
    if level < 2 {
        return Err(Error::InvalidArgument("Green norm estimate needs level >= 2".into()));
    }
    let squared = green_norm_squared(b, level);
    let norm = sqrt_rational(&squared, digits);
    Ok(GreenNorm { b, level, squared, norm })
}

/// Slack on the `t <= ||G||^2` bound absorbing the finite-level estimate.
pub const BOUND_SLACK: (i64, i64) = (11, 10);

/// Outcome of the boundedness checks on one coefficient list.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub label: String,
    pub t_nonnegative: bool,
    pub s_nonpositive: bool,
    pub t_bounded: bool,
    pub s_bounded: bool,
    pub worst_t_ratio: f64,
}

/// `0 <= t <= 1.1 ||G||^2` and `-||G|| <= s <= 0` (the `s` bound also uses the slack).
pub fn check_bounds(label: &str, s: &[Rational], t: &[Rational], gn: &GreenNorm) -> BoundCheck {
    let slack = rat(BOUND_SLACK.0, BOUND_SLACK.1);
    let tmax = &slack * &gn.squared;
    let smin = -(&slack * &gn.norm);
    let worst = t.iter().map(|x| ratio_to_f64(&(x / &gn.squared))).fold(0.0f64, f64::max);
    BoundCheck {
        label: label.to_string(),
        t_nonnegative: t.iter().all(|x| !x.is_negative()),
        s_nonpositive: s.iter().all(|x| !x.is_positive()),
        t_bounded: t.iter().all(|x| *x <= tmax),
        s_bounded: s.iter().all(|x| *x >= smin),
        worst_t_ratio: worst,
    }
}

/// Samples `π_n = p_n / ||p_n||` on `g`; the norm's square root is taken to `digits` digits.
pub fn sample_orthonormal<'g>(
    seq: &OrthogonalSequence,
    n: usize,
    g: &'g GraphLevel,
    tables: &CoefficientTables,
    digits: u32,
) -> Result<SampledFunction<'g, Rational>> {
    if n >= seq.len() {
        return Err(Error::InvalidArgument(format!("sequence has {} polynomials, asked for index {n}", seq.len())));
    }
    let raw = sample(&seq.specs[n], g, &tables.multiharmonic)?;
    let inv = int(1) / sqrt_rational(&seq.norm_sq[n], digits + 5);
    Ok(raw.map(|v| v * &inv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values_b1() {
        let t = CoefficientTables::build(1, 6).unwrap();
        let m = &t.monomial;
        assert_eq!(monomial_inner(0, 1, 0, 1, m).unwrap(), int(1));
        assert_eq!(monomial_inner(0, 1, 0, 2, m).unwrap(), rat(-1, 2));
        let g = gram_matrix(3, &t).unwrap();
        assert_eq!(
            g.entries,
            vec![
                vec![int(1), rat(-1, 2), rat(1, 6)],
                vec![rat(-1, 2), rat(1, 3), rat(-1, 8)],
                vec![rat(1, 6), rat(-1, 8), rat(1, 20)],
            ]
        );
        assert!(monomial_inner(3, 1, 3, 1, m).is_err());
    }

    #[test]
    fn gram_one_by_one() {
        for b in 1..5 {
            let t = CoefficientTables::build(b, 2).unwrap();
            let g = gram_matrix(1, &t).unwrap();
            assert_eq!(g.entries, vec![vec![int(1)]]);
            assert!(gram_matrix(2, &t).unwrap().leading_minors()[1].is_positive());
        }
    }

    #[test]
    fn first_polynomial_is_constant() {
        let (seq, _) = legendre(2, 3).unwrap();
        assert_eq!(seq.specs[0], PolySpec::constant(2, int(1)));
        assert_eq!(seq.norm_sq[0], int(1));
    }

    #[test]
    fn band_structure_b1() {
        let (seq, _) = legendre(1, 8).unwrap();
        for (n, band) in seq.bands() {
            let want: Vec<usize> = [n.checked_sub(2), Some(n), Some(n + 2)].into_iter().flatten().collect();
            assert!(band.iter().all(|l| want.contains(l)), "n={n} band={band:?}");
            assert!(band.contains(&(n + 2)));
        }
        assert!(seq.low_index_violations.is_empty());
        for fam in &seq.families {
            assert!(fam.three_term.iter().all(|&x| x));
            assert!(fam.product_identity(&seq.norm_sq).iter().all(|&x| x));
        }
        // classical shifted Legendre: family step ratio for the even family at m=1 is 1/720
        assert_eq!(seq.families[0].t[1], rat(1, 720));
        assert_eq!(seq.t[1], rat(1, 12));
    }

    #[test]
    fn normalized_residuals() {
        let (seq, tables) = legendre(1, 6).unwrap();
        let (steps, failures) = normalized_recursion(&seq, &tables, 50).unwrap();
        assert!(failures.is_empty());
        assert!(!steps.is_empty());
        for s in &steps {
            assert_eq!(s.exact_residual, "0/1");
            assert!(s.numeric_residual_abs < 1e-30);
        }
        assert_eq!(steps[0].sqrt_t, "0");
    }

    #[test]
    fn norm_estimate_b1() {
        let gn = green_norm_estimate(1, 8, 30).unwrap();
        let target = 1.0 / 90f64.sqrt();
        assert!((ratio_to_f64(&gn.norm) / target - 1.0).abs() < 0.05);
        assert!(green_norm_estimate(1, 1, 30).is_err());
    }
}
