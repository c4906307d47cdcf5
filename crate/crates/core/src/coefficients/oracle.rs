//! Oracles for the coefficient tables that do not use the recursions.
//!
//! [`discrete_oracle`] measures every quantity on `G_l` in floating point:
//! multiharmonics and monomials are built by repeated Dirichlet solves and
//! read off by quadrature, vertex values and difference quotients.
//! [`exact_multiharmonic_oracle`] derives `a_j, b_j, p_j, q_j` exactly from the
//! Green kernel at the first-level junctions and self-similarity of the
//! integrals.

use num_traits::{One, Zero};

use super::MultiharmonicTables;
use crate::calculus::{harmonic, laplacian_ratio, normal_derivative, quadrature, DirichletSolver, SampledFunction};
use crate::error::{Error, Result};
use crate::scalar::{int, pow, rat, ratio_to_f64, Rational};
use crate::topology::{build_graph, check_b};

/// Oracle measurements of all eight sequences, indexed `0..=jmax`.
#[derive(Debug, Clone)]
pub struct OracleValues {
    pub b: usize,
    pub level: usize,
    pub a: Vec<f64>,
    pub b_: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub eta: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// Measures the tables on `G_level` (`level >= 1`).
pub fn discrete_oracle(b: usize, level: usize, jmax: usize) -> Result<OracleValues> {
    check_b(b)?;
    if level == 0 {
        return Err(Error::InvalidArgument("oracle level must be at least 1".into()));
    }
    let g = build_graph(b, level)?;
    let solver = DirichletSolver::<f64>::new(&g);
    let f01 = harmonic(&g, 1.0, 0.0);
    let f02 = harmonic(&g, 0.0, 1.0);
    let s = ratio_to_f64(&laplacian_ratio(b));
    let [j1, j2] = g.junctions(0, 0);

    let mut out = OracleValues {
        b,
        level,
        a: Vec::new(),
        b_: Vec::new(),
        p: Vec::new(),
        q: Vec::new(),
        alpha: Vec::new(),
        beta: Vec::new(),
        eta: Vec::new(),
        gamma: Vec::new(),
    };

    let mut f = f01.clone();
    for j in 0..=jmax {
        out.a.push(quadrature(&f, &f01)?);
        out.b_.push(quadrature(&f, &f02)?);
        let scale = s.powi(-(j as i32));
        out.p.push(f.values[j1] * scale);
        out.q.push(f.values[j2] * scale);
        if j < jmax {
            f = solver.solve(&f)?;
        }
    }

    let mut p1 = SampledFunction::constant(&g, 1.0);
    let mut p2 = f02.map(|v| -v);
    for j in 0..=jmax {
        out.alpha.push(p1.values[1]);
        out.beta.push(p2.values[1]);
        out.eta.push(normal_derivative(&p1, 1)?);
        out.gamma.push(normal_derivative(&p2, 1)?);
        if j < jmax {
            p1 = next_monomial(&solver, &p1, &f02)?;
            p2 = next_monomial(&solver, &p2, &f02)?;
        }
    }
    Ok(out)
}

// Δ^{-1} with value and normal derivative zero at q1: the Dirichlet solution
// plus the multiple of f_02 that cancels its normal derivative there.
fn next_monomial<'g>(
    solver: &DirichletSolver<'g, f64>,
    p: &SampledFunction<'_, f64>,
    f02: &SampledFunction<'_, f64>,
) -> Result<SampledFunction<'g, f64>> {
    let mut u = solver.solve(p)?;
    let c = normal_derivative(&u, 0)?;
    for (v, h) in u.values.iter_mut().zip(&f02.values) {
        *v += c * h;
    }
    Ok(u)
}

/// `a_j, b_j, p_j, q_j` for `0..=jmax`, exactly, without the closed recursions.
///
/// Junction values come from `f_{jk}(J) = -Σ_z g(J, z) ∫ψ_z f_{(j-1)k} dμ` with
/// `z` over the two first-level junctions (deeper terms of the kernel vanish
/// on `V_1`). Integrals against `f_{0k}` and `ψ_z` are split over the `b+2`
/// first-level cells and expanded with `f_{jk} ∘ F_i = Σ s^m f_{(j-m)k}(F_i q_n) f_{mn}`.
pub fn exact_multiharmonic_oracle(b: usize, jmax: usize) -> Result<MultiharmonicTables> {
    check_b(b)?;
    let bi = b as i64;
    let r = rat(bi, 2 * bi + 1);
    let lam = rat(1, bi + 2);
    let s = &r * &lam;
    let near = rat(bi + 1, 2 * bi + 1);
    let far = rat(bi, 2 * bi + 1);
    // Points: 0 = q1, 1 = q2, 2 = J1, 3 = J2. Child i has corners corner[i].
    let mut corner = vec![[2usize, 3usize]; b];
    corner.push([0, 2]);
    corner.push([3, 1]);
    // val[j][k][pt] = f_{j,k+1}(pt)
    let mut val: Vec<[[Rational; 4]; 2]> = vec![[
        [Rational::one(), Rational::zero(), near.clone(), far.clone()],
        [Rational::zero(), Rational::one(), far.clone(), near.clone()],
    ]];
    let mut a = vec![rat(bi + 1, 2 + 4 * bi)];
    let mut bb = vec![rat(bi, 2 + 4 * bi)];
    let pw: Vec<Rational> = (0..=jmax).map(|m| pow(&s, m as i32)).collect();
    let diag = &r * &r * rat(bi + 1, bi);
    let off = &r * &r;

    for j in 1..=jmax {
        // ∫ (f_{0kp} ∘ F_i)(f_{(j-1)k} ∘ F_i) with all indices known.
        let piece = |val: &Vec<[[Rational; 4]; 2]>, a: &[Rational], bb: &[Rational], kp: usize, k: usize, i: usize| {
            let mut tot = Rational::zero();
            for m in 0..j {
                for n in 0..2 {
                    let ip = if n == kp { &a[m] } else { &bb[m] };
                    tot += &pw[m] * &val[j - 1 - m][k][corner[i][n]] * ip;
                }
            }
            tot
        };
        let mut next: [[Rational; 4]; 2] = Default::default();
        for k in 0..2 {
            // ψ_{J1} is f_02 on copy b+1 and f_01 on each bubble; ψ_{J2} mirrors it.
            let mut i1 = piece(&val, &a, &bb, 1, k, b);
            let mut i2 = piece(&val, &a, &bb, 0, k, b + 1);
            for i in 0..b {
                i1 += piece(&val, &a, &bb, 0, k, i);
                i2 += piece(&val, &a, &bb, 1, k, i);
            }
            i1 *= &lam;
            i2 *= &lam;
            next[k][2] = -(&diag * &i1 + &off * &i2);
            next[k][3] = -(&off * &i1 + &diag * &i2);
        }
        val.push(next);

        // ∫ f_{j1} f_{0kp} = λ Σ_i Σ_m Σ_n s^m f_{(j-m)1}(F_i q_n) Σ_{n'} f_{0kp}(F_i q_n') I(mn, 0n')
        // with the m = j terms carrying the unknowns a_j (n = n') and b_j (n ≠ n').
        let mut rows = Vec::new();
        for kp in 0..2 {
            let (mut ca, mut cb, mut c) = (Rational::zero(), Rational::zero(), Rational::zero());
            for cr in &corner {
                for m in 0..=j {
                    for n in 0..2 {
                        let fv = &val[j - m][0][cr[n]];
                        if fv.is_zero() {
                            continue;
                        }
                        for np in 0..2 {
                            let gv = &val[0][kp][cr[np]];
                            let coef = &lam * &pw[m] * fv * gv;
                            if m == j {
                                if n == np {
                                    ca += coef;
                                } else {
                                    cb += coef;
                                }
                            } else {
                                c += coef * if n == np { &a[m] } else { &bb[m] };
                            }
                        }
                    }
                }
            }
            rows.push((ca, cb, c));
        }
        let (ca1, cb1, c1) = rows[0].clone();
        let (ca2, cb2, c2) = rows[1].clone();
        let (m11, m12, m21, m22) = (int(1) - ca1, -cb1, -ca2, int(1) - cb2);
        let det = &m11 * &m22 - &m12 * &m21;
        if det.is_zero() {
            return Err(Error::Singular(j));
        }
        a.push((&c1 * &m22 - &m12 * &c2) / &det);
        bb.push((&m11 * &c2 - &m21 * &c1) / &det);
    }
    let p = (0..=jmax).map(|j| &val[j][0][2] / &pw[j]).collect();
    let q = (0..=jmax).map(|j| &val[j][0][3] / &pw[j]).collect();
    Ok(MultiharmonicTables { b, jmax, a, b_: bb, p, q })
}
