//! Exact dense linear algebra over cyclotomic coefficients.
//!
//! Everything is plain Gaussian elimination over a field; entries are
//! [`Cyclo`] values (rationals are the order-1 case). Sizes here are small
//! (at most a few hundred unknowns), so no pivoting strategy beyond
//! first-nonzero is needed.

use crate::numeric::Cyclo;
use crate::Result;

/// Reduced row echelon form in place. Returns the pivot column of each row
/// that received one (in order).
pub fn rref(rows: &mut [Vec<Cyclo>], ncols: usize) -> Result<Vec<usize>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].inverse()?;
        for x in rows[r].iter_mut() {
            if !x.is_zero() {
                *x = x.mul(&inv);
            }
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for c in col..ncols {
                    if rows[r][c].is_zero() {
                        continue;
                    }
                    let delta = rows[r][c].mul(&f);
                    rows[i][c] = rows[i][c].sub(&delta);
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    Ok(pivots)
}

pub fn rank(mut rows: Vec<Vec<Cyclo>>, ncols: usize) -> Result<usize> {
    Ok(rref(&mut rows, ncols)?.len())
}

/// Basis of the right nullspace `{x : A x = 0}`. Each basis vector has a 1
/// in one free column and zeros in the others, so the result is canonical
/// for a given column order.
pub fn nullspace(mut rows: Vec<Vec<Cyclo>>, ncols: usize) -> Result<Vec<Vec<Cyclo>>> {
    let pivots = rref(&mut rows, ncols)?;
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; ncols];
        for &p in &pivots {
            v[p] = true;
        }
        v
    };
    let mut basis = Vec::new();
    for free in 0..ncols {
        if is_pivot[free] {
            continue;
        }
        let mut vec = vec![Cyclo::zero(); ncols];
        vec[free] = Cyclo::one();
        for (row, &p) in pivots.iter().enumerate() {
            let c = rows[row][free].clone();
            if !c.is_zero() {
                vec[p] = c.neg();
            }
        }
        basis.push(vec);
    }
    Ok(basis)
}

/// True iff `v` lies in the span of `basis` (all over the same column count).
pub fn in_span(basis: &[Vec<Cyclo>], v: &[Cyclo], ncols: usize) -> Result<bool> {
    let mut rows: Vec<Vec<Cyclo>> = basis.to_vec();
    let r0 = rank(rows.clone(), ncols)?;
    rows.push(v.to_vec());
    Ok(rank(rows, ncols)? == r0)
}

/// True iff two row families span the same subspace.
pub fn same_span(a: &[Vec<Cyclo>], b: &[Vec<Cyclo>], ncols: usize) -> Result<bool> {
    let ra = rank(a.to_vec(), ncols)?;
    let rb = rank(b.to_vec(), ncols)?;
    if ra != rb {
        return Ok(false);
    }
    let mut all = a.to_vec();
    all.extend(b.iter().cloned());
    Ok(rank(all, ncols)? == ra)
}
