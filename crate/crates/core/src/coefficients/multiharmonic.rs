//! Inner products `a_j, b_j` and junction values `p_j, q_j` of the
//! multiharmonic basis.

use num_traits::Zero;

use super::convention::SumReading;
use super::MultiharmonicTables;
use crate::error::{Error, Result};
use crate::scalar::{int, pow, rat, Rational};
use crate::topology::check_b;

/// Tables for `0..=jmax` under the consistent reading.
pub fn multiharmonic_tables(b: usize, jmax: usize) -> Result<MultiharmonicTables> {
    multiharmonic_tables_with(b, jmax, SumReading::LowerIndex)
}

/// Tables for `0..=jmax`. Each step first advances `p_j, q_j` from lower-index
/// data, then solves the `2×2` system for `a_j, b_j`.
pub fn multiharmonic_tables_with(b: usize, jmax: usize, reading: SumReading) -> Result<MultiharmonicTables> {
    check_b(b)?;
    let bi = b as i64;
    let bq = int(bi);
    let b1 = int(bi + 1);
    let den = int(2 * bi + 1);
    let mut a = vec![rat(bi + 1, 2 + 4 * bi)];
    let mut bb = vec![rat(bi, 2 + 4 * bi)];
    let mut p = vec![rat(bi + 1, 2 * bi + 1)];
    let mut q = vec![rat(bi, 2 * bi + 1)];

    let nu1 = rat(2 * bi.pow(3) + 8 * bi * bi + 7 * bi + 2, 2 * bi + 1);
    let nu2 = rat(2 * bi.pow(3) + 6 * bi * bi + 6 * bi + 2, 2 * bi + 1);
    let up1 = rat(2 * bi.pow(3) + 4 * bi * bi + 2 * bi, 2 * bi + 1);
    let up2 = rat(2 * bi.pow(3) + 6 * bi * bi + 3 * bi, 2 * bi + 1);
    let growth = rat((bi + 2) * (2 * bi + 1), bi);
    let b1sq = &b1 * &b1;
    let bsq = &bq * &bq;
    let bb1 = &bq * &b1;

    for j in 1..=jmax {
        let mut pj = Rational::zero();
        let mut qj = Rational::zero();
        for l in 0..j {
            let mix = &b1sq * &a[l] + &bsq * &bb[l];
            let sum = &a[l] + &bb[l];
            pj -= &p[j - l - 1] * &mix + &bb1 * &q[j - l - 1] * &sum;
            qj -= &bb1 * &p[j - l - 1] * &sum + &q[j - l - 1] * &mix;
        }
        pj -= &b1 * &bb[j - 1];
        qj -= &bq * &bb[j - 1];
        p.push(pj / &den);
        q.push(qj / &den);

        let big_l = (int(bi + 2) * int(2 * bi + 1)) * pow(&growth, j as i32);
        let mut c1 = Rational::zero();
        let mut c2 = Rational::zero();
        let mut shared = Rational::zero();
        for l in 0..j {
            let sum = &a[l] + &bb[l];
            c1 += &sum * (&b1 * &p[j - l] + &bq * &q[j - l]);
            c2 += &sum * (&bq * &p[j - l] + &b1 * &q[j - l]);
            shared += &bq * &p[j - l] + &b1 * &q[j - l];
        }
        c1 *= &b1;
        c2 *= &b1;
        shared *= &b1;
        // (L - ν1) a - ν2 b = c1,  -υ1 a + (L - υ2) b = c2
        let (m11, m12) = (&big_l - &nu1, -nu2.clone());
        let (m21, m22, rhs2) = match reading {
            SumReading::LowerIndex => (-up1.clone(), &big_l - &up2, c2),
            // The sum multiplies the unknown (a_j + b_j) instead.
            SumReading::Unknowns => (-(&up1 + &shared), &big_l - &up2 - &shared, Rational::zero()),
        };
        let det = &m11 * &m22 - &m12 * &m21;
        if det.is_zero() {
            return Err(Error::Singular(j));
        }
        a.push((&c1 * &m22 - &m12 * &rhs2) / &det);
        bb.push((&m11 * &rhs2 - &m21 * &c1) / &det);
    }
    Ok(MultiharmonicTables { b, jmax, a, b_: bb, p, q })
}
