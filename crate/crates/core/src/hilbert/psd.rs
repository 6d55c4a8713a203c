//! Exact positive-semidefiniteness certificates.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsdVerdict {
    /// All `LDLᵀ` pivots are non-negative. `pivots` lists the positive ones
    /// in elimination order; the remaining Schur complement vanished.
    Psd { rank: usize, pivots: Vec<Scalar> },
    /// `witnessᵀ G witness = value < 0`.
    NotPsd { witness: Vec<Scalar>, value: Scalar },
}

impl PsdVerdict {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdVerdict::Psd { .. })
    }
}

/// `LDLᵀ` with largest-diagonal symmetric pivoting in exact arithmetic.
///
/// Alongside the Schur complement `S` the routine keeps, for every
/// uneliminated index `i`, a coefficient vector `u_i` in original
/// coordinates with `S[i][j] = u_iᵀ G u_j`, so any failure turns into an
/// explicit witness.
pub fn psd_check(g: &Matrix) -> Result<PsdVerdict> {
    if !g.is_square() {
        return Err(Error::Shape(format!("{}x{} is not square", g.rows(), g.cols())));
    }
    if !g.is_symmetric() {
        return Err(Error::NonSymmetric);
    }
    let n = g.rows();
    let mut s = g.clone();
    let mut u = Matrix::identity(n);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();

    let witness_from = |w: Vec<Scalar>| {
        let value = g.quadratic_form(&w);
        debug_assert!(value.is_negative());
        Ok(PsdVerdict::NotPsd { witness: w, value })
    };

    while !remaining.is_empty() {
        let &p = remaining
            .iter()
            .max_by(|&&a, &&b| s[(a, a)].cmp(&s[(b, b)]).then(b.cmp(&a)))
            .expect("non-empty");
        let d = s[(p, p)].clone();
        if d.is_negative() {
            return witness_from(u.row(p).to_vec());
        }
        if d.is_zero() {
            // Zero pivot: the whole remaining block must vanish.
            for (a, &i) in remaining.iter().enumerate() {
                for &j in &remaining[a + 1..] {
                    let sij = &s[(i, j)];
                    if sij.is_zero() {
                        continue;
                    }
                    let sign = if sij.is_positive() { -Scalar::from_integer(1.into()) } else { Scalar::from_integer(1.into()) };
                    let w: Vec<Scalar> = u
                        .row(i)
                        .iter()
                        .zip(u.row(j))
                        .map(|(a, b)| a + &sign * b)
                        .collect();
                    return witness_from(w);
                }
            }
            break;
        }
        remaining.retain(|&i| i != p);
        for &i in &remaining {
            let f = &s[(i, p)] / &d;
            if f.is_zero() {
                continue;
            }
            for &j in &remaining {
                let v = &s[(i, j)] - &f * &s[(p, j)];
                s[(i, j)] = v;
            }
            for k in 0..n {
                if u[(p, k)].is_zero() {
                    continue;
                }
                let v = &u[(i, k)] - &f * &u[(p, k)];
                u[(i, k)] = v;
            }
        }
        pivots.push(d);
    }
    Ok(PsdVerdict::Psd {
        rank: pivots.len(),
        pivots,
    })
}
