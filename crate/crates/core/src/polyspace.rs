//! Polynomials stored by their boundary jets.
//!
//! A polynomial `f` of degree `j` is the array `c(m, k) = Δ^m f(q_k)`,
//! `0 <= m <= j`, which is also its coefficient array in the basis `f_{mk}`.
//! Vertex values are recovered by refining the jet array from a cell to its
//! children, using the values of `f_{mk}` at the first-level junctions.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::calculus::{laplacian_ratio, SampledFunction};
use crate::coefficients::{MonomialTables, MultiharmonicTables};
use crate::error::{Error, Result};
use crate::scalar::{pow, to_fraction_string, Rational};
use crate::topology::{check_b, GraphLevel};

/// Jet array of a polynomial; `coeffs[m][k - 1] = Δ^m f(q_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolySpec {
    pub b: usize,
    pub coeffs: Vec<[Rational; 2]>,
}

fn zero_row() -> [Rational; 2] {
    [Rational::zero(), Rational::zero()]
}

impl PolySpec {
    /// The zero polynomial, stored with a single harmonic row.
    pub fn zero(b: usize) -> Self {
        PolySpec { b, coeffs: vec![zero_row()] }
    }

    pub fn constant(b: usize, c: Rational) -> Self {
        PolySpec { b, coeffs: vec![[c.clone(), c]] }
    }

    pub fn from_rows(b: usize, rows: Vec<[Rational; 2]>) -> Self {
        let mut s = PolySpec { b, coeffs: rows };
        if s.coeffs.is_empty() {
            s.coeffs.push(zero_row());
        }
        s
    }

    /// Stored degree (number of rows minus one, trailing zero rows included).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `Δ^m f(q_k)`, zero beyond the stored rows.
    pub fn get(&self, m: usize, k: usize) -> Rational {
        self.coeffs.get(m).map(|r| r[k - 1].clone()).unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|r| r[0].is_zero() && r[1].is_zero())
    }

    /// Drops trailing all-zero rows, keeping at least one.
    pub fn trimmed(&self) -> Self {
        let mut rows = self.coeffs.clone();
        while rows.len() > 1 && rows.last().is_some_and(|r| r[0].is_zero() && r[1].is_zero()) {
            rows.pop();
        }
        PolySpec { b: self.b, coeffs: rows }
    }

    fn padded(&self, len: usize) -> Vec<[Rational; 2]> {
        let mut rows = self.coeffs.clone();
        rows.resize(len.max(rows.len()), zero_row());
        rows
    }

    pub fn scale(&self, c: &Rational) -> Self {
        PolySpec { b: self.b, coeffs: self.coeffs.iter().map(|[x, y]| [x * c, y * c]).collect() }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &PolySpec, c: &Rational) -> Self {
        assert_eq!(self.b, other.b, "specs for different b");
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut rows = self.padded(len);
        for (row, o) in rows.iter_mut().zip(&other.coeffs) {
            row[0] += &o[0] * c;
            row[1] += &o[1] * c;
        }
        PolySpec { b: self.b, coeffs: rows }
    }

    /// `{"b": b, "coeffs": [["num/den", "num/den"], ...]}`.
    pub fn to_json(&self) -> Value {
        let rows: Vec<[String; 2]> =
            self.coeffs.iter().map(|[x, y]| [to_fraction_string(x), to_fraction_string(y)]).collect();
        json!({ "b": self.b, "coeffs": rows })
    }
}

impl Add for &PolySpec {
    type Output = PolySpec;
    fn add(self, rhs: &PolySpec) -> PolySpec {
        self.add_scaled(rhs, &Rational::one())
    }
}

impl Sub for &PolySpec {
    type Output = PolySpec;
    fn sub(self, rhs: &PolySpec) -> PolySpec {
        self.add_scaled(rhs, &-Rational::one())
    }
}

impl Neg for &PolySpec {
    type Output = PolySpec;
    fn neg(self) -> PolySpec {
        self.scale(&-Rational::one())
    }
}

impl Mul<&Rational> for &PolySpec {
    type Output = PolySpec;
    fn mul(self, rhs: &Rational) -> PolySpec {
        self.scale(rhs)
    }
}

/// `f_{jk}`: the unit jet at `(j, k)`.
pub fn multiharmonic_basis(b: usize, j: usize, k: usize) -> Result<PolySpec> {
    check_b(b)?;
    if !(1..=2).contains(&k) {
        return Err(Error::InvalidArgument(format!("basis index k must be 1 or 2, got {k}")));
    }
    let mut rows = vec![zero_row(); j + 1];
    rows[j][k - 1] = Rational::one();
    Ok(PolySpec { b, coeffs: rows })
}

/// Jet array of the monomial `P_{jk}`: `Δ^m P_{jk} = P_{(j-m)k}`, read at `q1` and `q2`.
pub fn monomial_to_fbasis(b: usize, j: usize, k: usize, tables: &MonomialTables) -> Result<PolySpec> {
    check_b(b)?;
    if tables.b != b {
        return Err(Error::InvalidArgument("tables built for a different b".into()));
    }
    if tables.alpha.len() <= j {
        return Err(Error::TablesTooShort { have: tables.jmax, need: j });
    }
    let mut rows = vec![zero_row(); j + 1];
    match k {
        1 => {
            rows[j][0] = Rational::one();
            for (m, row) in rows.iter_mut().enumerate() {
                row[1] = tables.alpha[j - m].clone();
            }
        }
        2 => {
            for (m, row) in rows.iter_mut().enumerate() {
                row[1] = tables.beta[j - m].clone();
            }
        }
        _ => return Err(Error::InvalidArgument(format!("monomial index k must be 1 or 2, got {k}"))),
    }
    Ok(PolySpec { b, coeffs: rows })
}

/// `Δ`: drop the first row.
pub fn apply_laplacian(spec: &PolySpec) -> PolySpec {
    if spec.coeffs.len() <= 1 {
        return PolySpec::zero(spec.b);
    }
    PolySpec { b: spec.b, coeffs: spec.coeffs[1..].to_vec() }
}

/// The polynomial `h` with `Δh = spec` and `h(q1) = h(q2) = 0`: prepend a zero row.
pub fn green_shift(spec: &PolySpec) -> PolySpec {
    let mut rows = Vec::with_capacity(spec.coeffs.len() + 1);
    rows.push(zero_row());
    rows.extend(spec.coeffs.iter().cloned());
    PolySpec { b: spec.b, coeffs: rows }
}

/// `<u, v> = Σ u(m,k) v(m',k') <f_{mk}, f_{m'k'}>` with `<f_{mk}, f_{m'k'}>`
/// equal to `a_{m+m'}` when `k = k'` and `b_{m+m'}` otherwise.
pub fn inner_product(u: &PolySpec, v: &PolySpec, tables: &MultiharmonicTables) -> Result<Rational> {
    let u = u.trimmed();
    let v = v.trimmed();
    let need = u.degree() + v.degree();
    if tables.a.len() <= need {
        return Err(Error::TablesTooShort { have: tables.jmax, need });
    }
    let mut sum = Rational::zero();
    for (m, ru) in u.coeffs.iter().enumerate() {
        for (mp, rv) in v.coeffs.iter().enumerate() {
            let same = &ru[0] * &rv[0] + &ru[1] * &rv[1];
            let cross = &ru[0] * &rv[1] + &ru[1] * &rv[0];
            if !same.is_zero() {
                sum += same * &tables.a[m + mp];
            }
            if !cross.is_zero() {
                sum += cross * &tables.b_[m + mp];
            }
        }
    }
    Ok(sum)
}

/// Restriction of a polynomial to one cell, as the jet array of `f ∘ F_word`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFrame {
    pub word: Vec<usize>,
    pub local: PolySpec,
}

impl CellFrame {
    pub fn root(spec: PolySpec) -> Self {
        CellFrame { word: Vec::new(), local: spec }
    }
}

/// Values `f_{jk}` at `q1`, `q2`, `J1`, `J2` up to a degree, and the corners of each child.
#[derive(Debug, Clone)]
pub struct RefineTable {
    b: usize,
    /// `vals[j][k][pt]`, points ordered `q1, q2, J1, J2`.
    vals: Vec<[[Rational; 4]; 2]>,
    /// `s^m`.
    scale: Vec<Rational>,
}

impl RefineTable {
    pub fn new(tables: &MultiharmonicTables, degree: usize) -> Result<Self> {
        if tables.jmax < degree {
            return Err(Error::TablesTooShort { have: tables.jmax, need: degree });
        }
        let s = laplacian_ratio(tables.b);
        let scale: Vec<Rational> = (0..=degree).map(|m| pow(&s, m as i32)).collect();
        let mut vals = Vec::with_capacity(degree + 1);
        for j in 0..=degree {
            let (h1, h2) = if j == 0 {
                (Rational::one(), Rational::zero())
            } else {
                (Rational::zero(), Rational::zero())
            };
            let p = &scale[j] * &tables.p[j];
            let q = &scale[j] * &tables.q[j];
            vals.push([[h1.clone(), h2.clone(), p.clone(), q.clone()], [h2, h1, q, p]]);
        }
        Ok(RefineTable { b: tables.b, vals, scale })
    }

    fn corner(&self, i: usize) -> [usize; 2] {
        if i < self.b {
            [2, 3]
        } else if i == self.b {
            [0, 2]
        } else {
            [3, 1]
        }
    }

    /// Jet arrays of `f ∘ F_i`, `i = 1..=b+2`, from the jet array of `f`:
    /// `c_i(m, n) = s^m Σ_{m' >= m} Σ_k c(m', k) f_{(m'-m)k}(F_i q_n)`.
    pub fn children(&self, local: &PolySpec) -> Result<Vec<PolySpec>> {
        let deg = local.degree();
        if deg >= self.vals.len() {
            return Err(Error::TablesTooShort { have: self.vals.len() - 1, need: deg });
        }
        let mut out = Vec::with_capacity(self.b + 2);
        for i in 0..self.b + 2 {
            let corner = self.corner(i);
            let mut rows = vec![zero_row(); deg + 1];
            for (m, row) in rows.iter_mut().enumerate() {
                for (n, slot) in row.iter_mut().enumerate() {
                    let mut acc = Rational::zero();
                    for mp in m..=deg {
                        for k in 0..2 {
                            let c = &local.coeffs[mp][k];
                            if c.is_zero() {
                                continue;
                            }
                            let v = &self.vals[mp - m][k][corner[n]];
                            if !v.is_zero() {
                                acc += c * v;
                            }
                        }
                    }
                    *slot = acc * &self.scale[m];
                }
            }
            out.push(PolySpec { b: self.b, coeffs: rows });
        }
        Ok(out)
    }
}

/// Splits a cell frame into its `b+2` children.
pub fn refine(frame: &CellFrame, tables: &MultiharmonicTables) -> Result<Vec<CellFrame>> {
    let table = RefineTable::new(tables, frame.local.degree())?;
    let children = table.children(&frame.local)?;
    Ok(children
        .into_iter()
        .enumerate()
        .map(|(i, local)| {
            let mut word = frame.word.clone();
            word.push(i + 1);
            CellFrame { word, local }
        })
        .collect())
}

/// Vertex values of `spec` on `g`, exactly.
///
/// Every cell reports its two corner values; a vertex shared by several cells
/// must receive the same value from all of them.
pub fn sample<'g>(
    spec: &PolySpec,
    g: &'g GraphLevel,
    tables: &MultiharmonicTables,
) -> Result<SampledFunction<'g, Rational>> {
    if spec.b != g.b || tables.b != g.b {
        return Err(Error::InvalidArgument("spec, graph and tables disagree on b".into()));
    }
    let spec = spec.trimmed();
    let table = RefineTable::new(tables, spec.degree())?;
    let mut values: Vec<Option<Rational>> = vec![None; g.n_vertices()];
    visit(g, &table, 0, 0, &spec, &mut values)?;
    let values = values.into_iter().map(|v| v.expect("every vertex lies in a cell")).collect();
    Ok(SampledFunction { graph: g, values })
}

fn visit(
    g: &GraphLevel,
    table: &RefineTable,
    depth: usize,
    cell: usize,
    local: &PolySpec,
    values: &mut [Option<Rational>],
) -> Result<()> {
    let ids = g.cell_boundary(depth, cell);
    for (n, &v) in ids.iter().enumerate() {
        let x = &local.coeffs[0][n];
        match &values[v] {
            Some(old) if old != x => {
                return Err(Error::Consistency(format!(
                    "vertex {} gets {} and {}",
                    g.address(v),
                    to_fraction_string(old),
                    to_fraction_string(x)
                )))
            }
            Some(_) => {}
            None => values[v] = Some(x.clone()),
        }
    }
    if depth == g.level {
        return Ok(());
    }
    let m = g.b + 2;
    for (i, child) in table.children(local)?.iter().enumerate() {
        visit(g, table, depth + 1, cell * m + i, child, values)?;
    }
    Ok(())
}
