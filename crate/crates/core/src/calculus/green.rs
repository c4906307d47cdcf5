//! Green operator of the Dirichlet Laplacian.
//!
//! On `V_l` the Green kernel restricted to vertex pairs is the inverse of the
//! Dirichlet energy matrix `r^{-l}(D - A)` on interior vertices, so `-G W f`
//! solves `Δu = f` for the renormalized graph Laplacian. The solver eliminates
//! junctions cell by cell (nested dissection along the self-similar
//! structure): every cell of depth `d` has the same boundary Schur complement,
//! so the factorization costs `O(l)` and each solve `O(|V_l|)`.

use num_traits::{One, Zero};

use super::{energy_ratio, harmonic_matrices, Mat2, SampledFunction};
use crate::error::{Error, Result};
use crate::scalar::{int, pow, rat, Rational, Scalar};
use crate::topology::GraphLevel;

type M2<S> = [[S; 2]; 2];

fn inv2<S: Scalar>(m: &M2<S>) -> M2<S> {
    let det = m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone();
    [
        [m[1][1].clone() / det.clone(), -m[0][1].clone() / det.clone()],
        [-m[1][0].clone() / det.clone(), m[0][0].clone() / det],
    ]
}

fn mul2<S: Scalar>(a: &M2<S>, b: &M2<S>) -> M2<S> {
    let e = |i: usize, j: usize| a[i][0].clone() * b[0][j].clone() + a[i][1].clone() * b[1][j].clone();
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn apply2<S: Scalar>(a: &M2<S>, v: &[S; 2]) -> [S; 2] {
    [
        a[0][0].clone() * v[0].clone() + a[0][1].clone() * v[1].clone(),
        a[1][0].clone() * v[0].clone() + a[1][1].clone() * v[1].clone(),
    ]
}

/// Measure weights `deg(x) / (2 (b+2)^l)` in the scalar type `S`.
pub(crate) fn weights_in<S: Scalar>(g: &GraphLevel) -> Vec<S> {
    let unit = S::from_rational(&(Rational::one() / (int(2) * pow(&int(g.b as i64 + 2), g.level as i32))));
    (0..g.n_vertices())
        .map(|v| unit.clone() * S::from_rational(&int(g.degree(v) as i64)))
        .collect()
}

/// Factorized Dirichlet energy matrix of one graph.
#[derive(Debug, Clone)]
pub struct DirichletSolver<'g, S> {
    graph: &'g GraphLevel,
    /// Per depth `d < l`: child Schur complement, `S_JJ^{-1}`, `S_JJ^{-1} S_Jb`.
    child: Vec<M2<S>>,
    r_mats: Vec<M2<S>>,
    p_mats: Vec<M2<S>>,
    weights: Vec<S>,
}

impl<'g, S: Scalar> DirichletSolver<'g, S> {
    pub fn new(graph: &'g GraphLevel) -> Self {
        let l = graph.level;
        let b = S::from_rational(&int(graph.b as i64));
        let scale = S::from_rational(&pow(&energy_ratio(graph.b), -(l as i32)));
        let mut s: M2<S> = [[scale.clone(), -scale.clone()], [-scale.clone(), scale]];
        let mut child = vec![s.clone(); l];
        let mut r_mats = vec![s.clone(); l];
        let mut p_mats = vec![s.clone(); l];
        for d in (0..l).rev() {
            let sjj = [
                [s[1][1].clone() + b.clone() * s[0][0].clone(), b.clone() * s[0][1].clone()],
                [b.clone() * s[1][0].clone(), b.clone() * s[1][1].clone() + s[0][0].clone()],
            ];
            let sjb = [[s[1][0].clone(), S::zero()], [S::zero(), s[0][1].clone()]];
            let r = inv2(&sjj);
            let p = mul2(&r, &sjb);
            let sbj = [[s[0][1].clone(), S::zero()], [S::zero(), s[1][0].clone()]];
            let corr = mul2(&sbj, &p);
            let next = [
                [s[0][0].clone() - corr[0][0].clone(), -corr[0][1].clone()],
                [-corr[1][0].clone(), s[1][1].clone() - corr[1][1].clone()],
            ];
            child[d] = s;
            r_mats[d] = r;
            p_mats[d] = p;
            s = next;
        }
        DirichletSolver { graph, child, r_mats, p_mats, weights: weights_in(graph) }
    }

    /// Solves `r^{-l}(D - A) u = rhs` at interior vertices with `u(q1) = u(q2) = 0`.
    pub fn solve_energy(&self, rhs: &[S]) -> Vec<S> {
        let g = self.graph;
        let l = g.level;
        let m = g.b + 2;
        let bb = g.b;
        let mut ys: Vec<Vec<[S; 2]>> = vec![Vec::new(); l];
        let mut h: Vec<[S; 2]> = Vec::new();
        for d in (0..l).rev() {
            let n = g.n_cells(d);
            let s = &self.child[d];
            let mut next_h = Vec::with_capacity(n);
            let mut y_d = Vec::with_capacity(n);
            for c in 0..n {
                let hc = |i: usize| -> [S; 2] {
                    if h.is_empty() {
                        [S::zero(), S::zero()]
                    } else {
                        h[c * m + i].clone()
                    }
                };
                let left = hc(bb);
                let right = hc(bb + 1);
                let mut hj = [left[1].clone(), right[0].clone()];
                if !h.is_empty() {
                    for i in 0..bb {
                        let hi = &h[c * m + i];
                        hj[0] = hj[0].clone() + hi[0].clone();
                        hj[1] = hj[1].clone() + hi[1].clone();
                    }
                }
                let [j1, j2] = g.junctions(d, c);
                let gj = [rhs[j1].clone() - hj[0].clone(), rhs[j2].clone() - hj[1].clone()];
                let y = apply2(&self.r_mats[d], &gj);
                next_h.push([
                    left[0].clone() + s[0][1].clone() * y[0].clone(),
                    right[1].clone() + s[1][0].clone() * y[1].clone(),
                ]);
                y_d.push(y);
            }
            ys[d] = y_d;
            h = next_h;
        }
        let mut u = vec![S::zero(); g.n_vertices()];
        for d in 0..l {
            let p = &self.p_mats[d];
            for (c, y) in ys[d].iter().enumerate() {
                let [x, z] = g.cell_boundary(d, c);
                let [j1, j2] = g.junctions(d, c);
                let pu = apply2(p, &[u[x].clone(), u[z].clone()]);
                u[j1] = y[0].clone() - pu[0].clone();
                u[j2] = y[1].clone() - pu[1].clone();
            }
        }
        u
    }

    /// `u` with `u = 0` on the boundary and renormalized `Δu = f` at interior vertices.
    pub fn solve(&self, f: &SampledFunction<'_, S>) -> Result<SampledFunction<'g, S>> {
        if f.graph.b != self.graph.b || f.graph.level != self.graph.level {
            return Err(Error::GraphMismatch);
        }
        let rhs: Vec<S> = f.values.iter().zip(&self.weights).map(|(v, w)| -(v.clone() * w.clone())).collect();
        Ok(SampledFunction { graph: self.graph, values: self.solve_energy(&rhs) })
    }
}

/// Dirichlet solution `u` of `Δu = f`, `u(q1) = u(q2) = 0`, on the graph of `f`.
pub fn dirichlet_solve<'g, S: Scalar>(f: &SampledFunction<'g, S>) -> SampledFunction<'g, S> {
    DirichletSolver::new(f.graph).solve(f).expect("same graph")
}

/// `x ↦ Σ_y w(y) G(x, y) f(y)`, the level-`l` quadrature of `∫ G(·, y) f(y) dμ(y)`.
pub fn green_apply<'g, S: Scalar>(f: &SampledFunction<'g, S>) -> SampledFunction<'g, S> {
    dirichlet_solve(f).map(|v| -v.clone())
}

/// Dense kernel `G(x, y)` on `V_l × V_l`, summed cell by cell from the
/// junction values `g(J_k, J_k) = r^2 (b+1)/b`, `g(J_1, J_2) = r^2`, scaled by
/// `r^m` on `m`-cells and spread by piecewise-harmonic tent functions.
pub fn green_matrix<S: Scalar>(g: &GraphLevel) -> Vec<Vec<S>> {
    let n = g.n_vertices();
    let b = g.b;
    let r = energy_ratio(b);
    let diag = &r * &r * rat(b as i64 + 1, b as i64);
    let off = &r * &r;
    let a = harmonic_matrices(b).into_iter().map(|m| m.map(|row| row.map(|x| S::from_rational(&x)))).collect::<Vec<_>>();
    let mut out = vec![vec![S::zero(); n]; n];
    for depth in 0..g.level {
        let rm = pow(&r, depth as i32);
        let gd = S::from_rational(&(&rm * &diag));
        let go = S::from_rational(&(&rm * &off));
        for c in 0..g.n_cells(depth) {
            let mut tents: Vec<(usize, S, S)> = Vec::new();
            let [j1, j2] = g.junctions(depth, c);
            tents.push((j1, S::one(), S::zero()));
            tents.push((j2, S::zero(), S::one()));
            let one = S::one();
            let zero = S::zero();
            for i in 0..b + 2 {
                // (ψ1, ψ2) at the child's (q1, q2) corners.
                let (p1, p2) = if i < b {
                    ([one.clone(), zero.clone()], [zero.clone(), one.clone()])
                } else if i == b {
                    ([zero.clone(), one.clone()], [zero.clone(), zero.clone()])
                } else {
                    ([zero.clone(), zero.clone()], [one.clone(), zero.clone()])
                };
                spread_tents(g, &a, depth + 1, c * (b + 2) + i, p1, p2, &mut tents);
            }
            for (u, u1, u2) in &tents {
                for (v, v1, v2) in &tents {
                    let add = gd.clone() * (u1.clone() * v1.clone() + u2.clone() * v2.clone())
                        + go.clone() * (u1.clone() * v2.clone() + u2.clone() * v1.clone());
                    out[*u][*v] = out[*u][*v].clone() + add;
                }
            }
        }
    }
    out
}

fn spread_tents<S: Scalar>(
    g: &GraphLevel,
    a: &[[[S; 2]; 2]],
    depth: usize,
    cell: usize,
    p1: [S; 2],
    p2: [S; 2],
    out: &mut Vec<(usize, S, S)>,
) {
    if depth >= g.level || (p1.iter().chain(&p2).all(|x| x.is_zero())) {
        return;
    }
    let [j1, j2] = g.junctions(depth, cell);
    let e1 = apply2(&a[g.b], &p1)[1].clone();
    let e2 = apply2(&a[g.b], &p2)[1].clone();
    let f1 = apply2(&a[g.b + 1], &p1)[0].clone();
    let f2 = apply2(&a[g.b + 1], &p2)[0].clone();
    out.push((j1, e1.clone(), e2.clone()));
    out.push((j2, f1.clone(), f2.clone()));
    let m = g.b + 2;
    for i in 0..m {
        let (c1, c2) = if i < g.b {
            ([e1.clone(), f1.clone()], [e2.clone(), f2.clone()])
        } else if i == g.b {
            ([p1[0].clone(), e1.clone()], [p2[0].clone(), e2.clone()])
        } else {
            ([f1.clone(), p1[1].clone()], [f2.clone(), p2[1].clone()])
        };
        spread_tents(g, a, depth + 1, cell * m + i, c1, c2, out);
    }
}

/// `Σ_{p,q} w(p) w(q) G(p,q)^2` on `V_l` by dense summation.
pub fn green_norm_squared_dense(g: &GraphLevel) -> Rational {
    let gm = green_matrix::<Rational>(g);
    let w = weights_in::<Rational>(g);
    let mut sum = Rational::zero();
    for (p, row) in gm.iter().enumerate() {
        for (q, v) in row.iter().enumerate() {
            if !v.is_zero() {
                sum += &w[p] * &w[q] * v * v;
            }
        }
    }
    sum
}

fn t2(a: &Mat2) -> Mat2 {
    [[a[0][0].clone(), a[1][0].clone()], [a[0][1].clone(), a[1][1].clone()]]
}

fn m2(a: &Mat2, b: &Mat2) -> Mat2 {
    mul2(a, b)
}

fn add2(a: &Mat2, b: &Mat2, s: &Rational) -> Mat2 {
    let e = |i: usize, j: usize| &a[i][j] + &b[i][j] * s;
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn zero2() -> Mat2 {
    [[Rational::zero(), Rational::zero()], [Rational::zero(), Rational::zero()]]
}

/// `Σ_{p,q ∈ V_l} w(p) w(q) G(p,q)^2`, exactly, by self-similarity in `O(l b^2)`.
///
/// The sum splits into pairs lying in different first-level cells (kernel
/// supported on the first-level junctions) and pairs inside one cell (scaled
/// copy of the level `l-1` sum plus a cross term with the junction kernel).
/// The state carried between levels is the scalar sum, the `2×2` matrix of
/// boundary moments `Σ w(p) f_{0n}(p) f_{0n'}(p)`, and the `2×2` matrix
/// `Σ w w f_{0n}(p) G(p,q) f_{0n'}(q)`.
pub fn green_norm_squared(b: usize, level: usize) -> Rational {
    let r = energy_ratio(b);
    let lam = rat(1, b as i64 + 2);
    let mats = harmonic_matrices(b);
    // H_i[n][k] = f_{0n}(F_i q_k)
    let h: Vec<Mat2> = mats.iter().map(t2).collect();
    let diag = &r * &r * rat(b as i64 + 1, b as i64);
    let off = &r * &r;
    // Corner of child i lying on a junction: Some(0) = J1, Some(1) = J2.
    let corner = |i: usize, k: usize| -> Option<usize> {
        if i < b {
            Some(k)
        } else if i == b {
            if k == 1 { Some(0) } else { None }
        } else if k == 0 {
            Some(1)
        } else {
            None
        }
    };
    let gval = |x: usize, y: usize| if x == y { diag.clone() } else { off.clone() };
    let cmat = |i: usize, ip: usize| -> Mat2 {
        let e = |n: usize, np: usize| match (corner(i, n), corner(ip, np)) {
            (Some(x), Some(y)) => gval(x, y),
            _ => Rational::zero(),
        };
        [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
    };
    let half = rat(1, 2);
    let mut nm: Mat2 = [[half.clone(), Rational::zero()], [Rational::zero(), half]];
    let mut mm = zero2();
    let mut q = Rational::zero();
    let lam2 = &lam * &lam;
    for _ in 0..level {
        let mut qn = Rational::zero();
        let mut mn = zero2();
        let mut nn = zero2();
        for i in 0..b + 2 {
            nn = add2(&nn, &m2(&m2(&h[i], &nm), &t2(&h[i])), &lam);
            for ip in 0..b + 2 {
                let c = cmat(i, ip);
                let x = m2(&m2(&m2(&t2(&c), &nm), &c), &nm);
                qn += &lam2 * (&x[0][0] + &x[1][1]);
                mn = add2(&mn, &m2(&m2(&m2(&m2(&h[i], &nm), &c), &nm), &t2(&h[ip])), &lam2);
            }
            let cii = cmat(i, i);
            let mut dot = Rational::zero();
            for n in 0..2 {
                for np in 0..2 {
                    dot += &cii[n][np] * &mm[n][np];
                }
            }
            qn += int(2) * &lam2 * &r * dot;
            mn = add2(&mn, &m2(&m2(&h[i], &mm), &t2(&h[i])), &(&lam2 * &r));
        }
        qn += &lam2 * int(b as i64 + 2) * &r * &r * &q;
        q = qn;
        mm = mn;
        nm = nn;
    }
    q
}
