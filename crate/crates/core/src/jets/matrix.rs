//! 4×4 matrices of jets: determinant and inverse.

use nalgebra::Matrix4;

use super::tables::tables;
use super::{Jet, JetError, Result, TruncationOrder};

pub type JetMatrix4 = [[Jet; 4]; 4];

fn common_order(m: &JetMatrix4) -> TruncationOrder {
    m.iter()
        .flatten()
        .map(Jet::order)
        .reduce(TruncationOrder::min)
        .expect("non-empty matrix")
}

pub fn value_matrix(m: &JetMatrix4) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| m[i][j].value())
}

/// Determinant via the 2×2 minors of rows (0,1) and (2,3).
pub fn det4(m: &JetMatrix4) -> Jet {
    const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let minor = |r0: usize, r1: usize, (c0, c1): (usize, usize)| {
        &m[r0][c0] * &m[r1][c1] - &m[r0][c1] * &m[r1][c0]
    };
    let mut det: Option<Jet> = None;
    for (a, &cols) in PAIRS.iter().enumerate() {
        let comp = PAIRS[5 - a];
        // sign of the permutation (cols, comp)
        let perm = [cols.0, cols.1, comp.0, comp.1];
        let mut inversions = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let term = minor(0, 1, cols).mul(&minor(2, 3, comp));
        let term = if inversions % 2 == 0 { term } else { -term };
        det = Some(match det {
            None => term,
            Some(d) => d + term,
        });
    }
    det.unwrap()
}

/// Inverse of a jet-valued matrix.
///
/// The value-level inverse comes from an LU factorisation with partial
/// pivoting; higher coefficients follow from `G·Y = I` solved in graded order,
/// `Y_α = −G₀⁻¹ Σ_{β≠0} G_β Y_{α−β}`.
pub fn invert4(g: &JetMatrix4) -> Result<JetMatrix4> {
    let order = common_order(g);
    let g0 = value_matrix(g);
    let g0_inv = g0.lu().try_inverse().ok_or(JetError::SingularMatrix)?;
    if !g0_inv.iter().all(|v| v.is_finite()) {
        return Err(JetError::SingularMatrix);
    }
    let g: Vec<Vec<Jet>> = g
        .iter()
        .map(|row| row.iter().map(|j| j.truncate(order)).collect())
        .collect();
    let t = tables();
    let proto = Jet::zeros(order);
    let nv = proto.nv;
    let nx = proto.coeffs.len() / nv;
    let tv = t.triples_upto(order.max_v_order);
    let mut y: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; nx * nv]; 4]; 4];
    let rows_nonzero: Vec<Vec<Vec<bool>>> = g
        .iter()
        .map(|r| r.iter().map(Jet::nonzero_rows).collect())
        .collect();

    let mut acc = vec![[[0.0f64; 4]; 4]; nv];
    for k in 0..nx {
        acc.iter_mut().for_each(|a| *a = [[0.0; 4]; 4]);
        for &[i, j, _] in t.group(k) {
            let (i, j) = (i as usize, j as usize);
            if i == 0 {
                continue;
            }
            for a in 0..4 {
                for b in 0..4 {
                    if !rows_nonzero[a][b][i] {
                        continue;
                    }
                    let grow = &g[a][b].coeffs[i * nv..(i + 1) * nv];
                    for c in 0..4 {
                        let yrow = &y[b][c][j * nv..(j + 1) * nv];
                        for &[p, q, r] in tv {
                            acc[r as usize][a][c] += grow[p as usize] * yrow[q as usize];
                        }
                    }
                }
            }
        }
        for r in 0..nv {
            let mut s = [[0.0f64; 4]; 4];
            for a in 0..4 {
                for c in 0..4 {
                    let rhs = if k == 0 && r == 0 && a == c { 1.0 } else { 0.0 };
                    s[a][c] = rhs - acc[r][a][c];
                }
            }
            for &[p, q, _] in t.group(r) {
                if p == 0 {
                    continue;
                }
                let (p, q) = (p as usize, q as usize);
                for a in 0..4 {
                    for b in 0..4 {
                        let gv = g[a][b].coeffs[p];
                        if gv == 0.0 {
                            continue;
                        }
                        for c in 0..4 {
                            s[a][c] -= gv * y[b][c][k * nv + q];
                        }
                    }
                }
            }
            for a in 0..4 {
                for c in 0..4 {
                    y[a][c][k * nv + r] = (0..4).map(|b| g0_inv[(a, b)] * s[b][c]).sum();
                }
            }
        }
    }
    Ok(std::array::from_fn(|a| {
        std::array::from_fn(|c| Jet {
            order,
            nv,
            coeffs: std::mem::take(&mut y[a][c]),
        })
    }))
}
