//! Exact lattice arithmetic in `Q^2` (with rank-3 support for the index
//! machinery on `Z^3`).
//!
//! A [`Lattice2`] is stored through a canonical rational basis: denominators
//! are cleared by their lcm and the resulting integer matrix is put in column
//! Hermite normal form, so two values represent the same subgroup iff their
//! stored bases are identical. [`ArithProg`] represents solution sets of
//! one-variable congruence systems `alpha * m = beta (mod Z)`; the empty set
//! is a value, not an error.

use num::bigint::BigInt;
use num::integer::Integer;
use num::traits::{One, Signed, Zero};

use crate::error::Error;
use crate::numeric::{
    common_denominator, frac_part, parse_rat, rat_gcd, rat_string, Rat,
};
use crate::Result;

pub type Point2 = [Rat; 2];
pub type Point3 = [Rat; 3];
/// Row-major 2x2 rational matrix.
pub type Mat2 = [[Rat; 2]; 2];
/// Row-major 3x3 rational matrix.
pub type Mat3 = [[Rat; 3]; 3];

pub fn point2(a: Rat, b: Rat) -> Point2 {
    [a, b]
}

pub fn mat2_det(m: &Mat2) -> Rat {
    &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]
}

pub fn mat2_mul_vec(m: &Mat2, v: &Point2) -> Point2 {
    [
        &m[0][0] * &v[0] + &m[0][1] * &v[1],
        &m[1][0] * &v[0] + &m[1][1] * &v[1],
    ]
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Rat::zero(), Rat::zero()], [Rat::zero(), Rat::zero()]];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = &a[r][0] * &b[0][c] + &a[r][1] * &b[1][c];
        }
    }
    out
}

pub fn mat2_inv(m: &Mat2) -> Result<Mat2> {
    let d = mat2_det(m);
    if d.is_zero() {
        return Err(Error::SingularMatrix("2x2 determinant is zero".into()));
    }
    Ok([
        [&m[1][1] / &d, -&m[0][1] / &d],
        [-&m[1][0] / &d, &m[0][0] / &d],
    ])
}

pub fn mat3_mul_vec(m: &Mat3, v: &Point3) -> Point3 {
    let row = |r: usize| &m[r][0] * &v[0] + &m[r][1] * &v[1] + &m[r][2] * &v[2];
    [row(0), row(1), row(2)]
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out: Mat3 = Default::default();
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = &a[r][0] * &b[0][c] + &a[r][1] * &b[1][c] + &a[r][2] * &b[2][c];
        }
    }
    out
}

pub fn mat3_det(m: &Mat3) -> Rat {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

pub fn mat3_inv(m: &Mat3) -> Result<Mat3> {
    let d = mat3_det(m);
    if d.is_zero() {
        return Err(Error::SingularMatrix("3x3 determinant is zero".into()));
    }
    let cof = |r1: usize, c1: usize, r2: usize, c2: usize| &m[r1][c1] * &m[r2][c2] - &m[r1][c2] * &m[r2][c1];
    // adjugate transpose
    let adj: Mat3 = [
        [cof(1, 1, 2, 2), -cof(0, 1, 2, 2), cof(0, 1, 1, 2)],
        [-cof(1, 0, 2, 2), cof(0, 0, 2, 2), -cof(0, 0, 1, 2)],
        [cof(1, 0, 2, 1), -cof(0, 0, 2, 1), cof(0, 0, 1, 1)],
    ];
    let mut out: Mat3 = Default::default();
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = &adj[r][c] / &d;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Integer column Hermite normal form (generic in the number of rows).
// ---------------------------------------------------------------------------

/// Column HNF of an integer matrix given as a list of columns of length
/// `nrows`. Returns the `nrows` leading columns of the reduced matrix
/// (lower triangular, positive diagonal, entries left of the diagonal
/// reduced into `[0, diag)`), or an error if the columns do not span a
/// rank-`nrows` subgroup.
pub fn hnf_cols(nrows: usize, mut cols: Vec<Vec<BigInt>>) -> Result<Vec<Vec<BigInt>>> {
    let k = cols.len();
    let mut lead = 0usize;
    for r in 0..nrows {
        if lead >= k {
            return Err(Error::SingularMatrix(format!(
                "rank below {nrows} in HNF input"
            )));
        }
        loop {
            // Pick the column with the smallest nonzero entry in row r.
            let mut best: Option<usize> = None;
            for j in lead..k {
                if !cols[j][r].is_zero()
                    && best.is_none_or(|b| cols[j][r].abs() < cols[b][r].abs())
                {
                    best = Some(j);
                }
            }
            let Some(b) = best else {
                return Err(Error::SingularMatrix(format!(
                    "rank below {nrows} in HNF input"
                )));
            };
            cols.swap(lead, b);
            let mut done = true;
            for j in lead + 1..k {
                if cols[j][r].is_zero() {
                    continue;
                }
                let q = cols[j][r].div_floor(&cols[lead][r]);
                for i in 0..nrows {
                    let delta = &q * &cols[lead][i];
                    cols[j][i] -= delta;
                }
                if !cols[j][r].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if cols[lead][r].is_negative() {
            for i in 0..nrows {
                cols[lead][i] = -cols[lead][i].clone();
            }
        }
        lead += 1;
    }
    cols.truncate(nrows);
    // Reduce entries left of each diagonal into [0, diag).
    for r in 1..nrows {
        for c in 0..r {
            let q = cols[c][r].div_floor(&cols[r][r]);
            if q.is_zero() {
                continue;
            }
            for i in 0..nrows {
                let delta = &q * &cols[r][i];
                cols[c][i] -= delta;
            }
        }
    }
    Ok(cols)
}

/// Column HNF of a 3x3 integer matrix (rows of the result are rows; input
/// row-major). Exposed for the normal-form contracts on `Z^3`.
pub fn hnf3(m: &[[BigInt; 3]; 3]) -> Result<[[BigInt; 3]; 3]> {
    let cols: Vec<Vec<BigInt>> = (0..3)
        .map(|c| (0..3).map(|r| m[r][c].clone()).collect())
        .collect();
    let h = hnf_cols(3, cols)?;
    let mut out: [[BigInt; 3]; 3] = Default::default();
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = h[c][r].clone();
        }
    }
    Ok(out)
}

/// Smith normal form diagonal `(s1, s2, s3)` of a nonsingular 3x3 integer
/// matrix, with the divisibility chain `s1 | s2 | s3` and all entries
/// positive. Computed from gcds of minors.
pub fn snf3(m: &[[BigInt; 3]; 3]) -> Result<[BigInt; 3]> {
    let mut d1 = BigInt::zero();
    for r in 0..3 {
        for c in 0..3 {
            d1 = d1.gcd(&m[r][c]);
        }
    }
    let mut d2 = BigInt::zero();
    for r1 in 0..3 {
        for r2 in r1 + 1..3 {
            for c1 in 0..3 {
                for c2 in c1 + 1..3 {
                    let minor = &m[r1][c1] * &m[r2][c2] - &m[r1][c2] * &m[r2][c1];
                    d2 = d2.gcd(&minor);
                }
            }
        }
    }
    let d3 = (&m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0]))
        .abs();
    if d3.is_zero() {
        return Err(Error::SingularMatrix("SNF of a singular matrix".into()));
    }
    Ok([d1.clone(), &d2 / &d1, d3 / d2])
}

// ---------------------------------------------------------------------------
// Rank-2 lattices
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice2 {
    basis: Mat2,
}

impl Lattice2 {
    /// Lattice generated by the two columns of `basis`.
    pub fn from_basis(basis: Mat2) -> Result<Self> {
        if mat2_det(&basis).is_zero() {
            return Err(Error::SingularMatrix("lattice basis is singular".into()));
        }
        Ok(Self::canonicalize(&[
            [basis[0][0].clone(), basis[1][0].clone()],
            [basis[0][1].clone(), basis[1][1].clone()],
        ]))
    }

    /// Lattice generated by an arbitrary finite generating set (must span
    /// rank 2).
    pub fn from_generators(gens: &[Point2]) -> Result<Self> {
        if gens.len() < 2 {
            return Err(Error::SingularMatrix(
                "need at least two generators for a rank-2 lattice".into(),
            ));
        }
        Ok(Self::canonicalize(gens))
    }

    fn canonicalize(gens: &[Point2]) -> Self {
        let mut all = Vec::new();
        for g in gens {
            all.push(g[0].clone());
            all.push(g[1].clone());
        }
        let den = common_denominator(&all);
        let denr = Rat::from_integer(den.clone());
        let cols: Vec<Vec<BigInt>> = gens
            .iter()
            .map(|g| vec![(&g[0] * &denr).to_integer(), (&g[1] * &denr).to_integer()])
            .collect();
        let h = hnf_cols(2, cols).expect("generators span rank 2");
        let basis: Mat2 = [
            [
                Rat::new(h[0][0].clone(), den.clone()),
                Rat::new(h[1][0].clone(), den.clone()),
            ],
            [
                Rat::new(h[0][1].clone(), den.clone()),
                Rat::new(h[1][1].clone(), den),
            ],
        ];
        Lattice2 { basis }
    }

    /// `Z^2`.
    pub fn standard() -> Self {
        Lattice2 {
            basis: [
                [Rat::one(), Rat::zero()],
                [Rat::zero(), Rat::one()],
            ],
        }
    }

    /// The lattice `s * Z^2`.
    pub fn scaled_standard(s: &Rat) -> Result<Self> {
        Self::from_basis([[s.clone(), Rat::zero()], [Rat::zero(), s.clone()]])
    }

    /// Canonical basis matrix (columns are generators).
    pub fn basis(&self) -> &Mat2 {
        &self.basis
    }

    pub fn det_abs(&self) -> Rat {
        mat2_det(&self.basis).abs()
    }

    /// Coordinates of `x` on the basis.
    pub fn coords(&self, x: &Point2) -> Point2 {
        let inv = mat2_inv(&self.basis).expect("canonical basis is nonsingular");
        mat2_mul_vec(&inv, x)
    }

    pub fn member(&self, x: &Point2) -> bool {
        let t = self.coords(x);
        t[0].is_integer() && t[1].is_integer()
    }

    /// The canonical representative of `x` modulo this lattice (coordinates
    /// reduced into `[0, 1)`).
    pub fn canonical_rep(&self, x: &Point2) -> Point2 {
        let t = self.coords(x);
        let f = [frac_part(&t[0]), frac_part(&t[1])];
        mat2_mul_vec(&self.basis, &f)
    }

    pub fn sum(&self, other: &Self) -> Self {
        let gens = [
            self.column(0),
            self.column(1),
            other.column(0),
            other.column(1),
        ];
        Self::canonicalize(&gens)
    }

    /// Lattice plus one extra generator.
    pub fn sum_with_vector(&self, v: &Point2) -> Self {
        Self::canonicalize(&[self.column(0), self.column(1), v.clone()])
    }

    fn dual(&self) -> Self {
        let inv = mat2_inv(&self.basis).expect("nonsingular");
        // Columns of the inverse-transpose = rows of the inverse.
        Self::canonicalize(&[inv[0].clone(), inv[1].clone()])
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.dual().sum(&other.dual()).dual()
    }

    pub fn contains_lattice(&self, sub: &Self) -> bool {
        self.member(&sub.column(0)) && self.member(&sub.column(1))
    }

    /// Index `[other : self]` for `self` a finite-index sublattice of `other`.
    pub fn index_in(&self, other: &Self) -> Result<BigInt> {
        if !other.contains_lattice(self) {
            return Err(Error::LatticeInclusion(
                "index_in requires the receiver to be a sublattice".into(),
            ));
        }
        let ratio = self.det_abs() / other.det_abs();
        debug_assert!(ratio.is_integer());
        Ok(ratio.to_integer())
    }

    /// Representatives of `other / self` (one point per coset), for `self`
    /// a sublattice of `other`.
    pub fn coset_reps_in(&self, other: &Self) -> Result<Vec<Point2>> {
        if !other.contains_lattice(self) {
            return Err(Error::LatticeInclusion(
                "coset_reps_in requires the receiver to be a sublattice".into(),
            ));
        }
        // T = other^{-1} * self is an integer matrix; reps of Z^2 / T Z^2
        // map through other's basis.
        let inv = mat2_inv(&other.basis)?;
        let t = mat2_mul(&inv, &self.basis);
        let cols: Vec<Vec<BigInt>> = (0..2)
            .map(|c| vec![t[0][c].to_integer(), t[1][c].to_integer()])
            .collect();
        let h = hnf_cols(2, cols)?;
        let a = h[0][0].clone();
        let c = h[1][1].clone();
        let mut reps = Vec::new();
        let mut i = BigInt::zero();
        while i < a {
            let mut j = BigInt::zero();
            while j < c {
                let p = [
                    Rat::from_integer(i.clone()),
                    Rat::from_integer(j.clone()),
                ];
                reps.push(mat2_mul_vec(&other.basis, &p));
                j += 1;
            }
            i += 1;
        }
        Ok(reps)
    }

    /// Image of this lattice under a nonsingular rational matrix.
    pub fn transform(&self, m: &Mat2) -> Result<Self> {
        Self::from_basis(mat2_mul(m, &self.basis))
    }

    /// Scale every vector by `s != 0`.
    pub fn scale(&self, s: &Rat) -> Result<Self> {
        self.transform(&[
            [s.clone(), Rat::zero()],
            [Rat::zero(), s.clone()],
        ])
    }

    fn column(&self, c: usize) -> Point2 {
        [self.basis[0][c].clone(), self.basis[1][c].clone()]
    }

    pub fn generators(&self) -> [Point2; 2] {
        [self.column(0), self.column(1)]
    }

    /// The projection of this lattice onto coordinate `axis` is `step * Z`;
    /// returns the (positive) step.
    pub fn coord_step(&self, axis: usize) -> Rat {
        rat_gcd(&self.basis[axis][0], &self.basis[axis][1])
    }

    /// All points of `offset + L` inside the closed box
    /// `[lo[0], hi[0]] x [lo[1], hi[1]]`.
    pub fn coset_points_in_box(
        &self,
        offset: &Point2,
        lo: &Point2,
        hi: &Point2,
    ) -> Vec<Point2> {
        let inv = mat2_inv(&self.basis).expect("canonical basis nonsingular");
        let corners = [
            [lo[0].clone(), lo[1].clone()],
            [lo[0].clone(), hi[1].clone()],
            [hi[0].clone(), lo[1].clone()],
            [hi[0].clone(), hi[1].clone()],
        ];
        let mut t_lo = [Rat::zero(), Rat::zero()];
        let mut t_hi = [Rat::zero(), Rat::zero()];
        for (n, corner) in corners.iter().enumerate() {
            let shifted = [&corner[0] - &offset[0], &corner[1] - &offset[1]];
            let t = mat2_mul_vec(&inv, &shifted);
            for i in 0..2 {
                if n == 0 || t[i] < t_lo[i] {
                    t_lo[i] = t[i].clone();
                }
                if n == 0 || t[i] > t_hi[i] {
                    t_hi[i] = t[i].clone();
                }
            }
        }
        let mut out = Vec::new();
        let mut t1 = t_lo[0].ceil();
        let t1_max = t_hi[0].floor();
        while t1 <= t1_max {
            let mut t2 = t_lo[1].ceil();
            let t2_max = t_hi[1].floor();
            while t2 <= t2_max {
                let x = [
                    &offset[0] + &self.basis[0][0] * &t1 + &self.basis[0][1] * &t2,
                    &offset[1] + &self.basis[1][0] * &t1 + &self.basis[1][1] * &t2,
                ];
                if x[0] >= lo[0] && x[0] <= hi[0] && x[1] >= lo[1] && x[1] <= hi[1] {
                    out.push(x);
                }
                t2 += Rat::one();
            }
            t1 += Rat::one();
        }
        out
    }

    /// Lattice points on the line `x[axis] = a`, described as
    /// `base + Z * dir`, or `None` if the line misses the lattice.
    pub fn line_points(&self, axis: usize, a: &Rat) -> Option<(Point2, Point2)> {
        let p = &self.basis[axis][0];
        let q = &self.basis[axis][1];
        let all = [p.clone(), q.clone(), a.clone()];
        let den = common_denominator(&all);
        let denr = Rat::from_integer(den);
        let pi = (p * &denr).to_integer();
        let qi = (q * &denr).to_integer();
        let ai = a * &denr;
        if !ai.is_integer() {
            return None;
        }
        let ai = ai.to_integer();
        let e = pi.extended_gcd(&qi);
        if (&ai % &e.gcd) != BigInt::zero() {
            return None;
        }
        let k = &ai / &e.gcd;
        let t0 = [
            Rat::from_integer(&e.x * &k),
            Rat::from_integer(&e.y * &k),
        ];
        let dir_t = [
            Rat::from_integer(&qi / &e.gcd),
            Rat::from_integer(-(&pi / &e.gcd)),
        ];
        Some((
            mat2_mul_vec(&self.basis, &t0),
            mat2_mul_vec(&self.basis, &dir_t),
        ))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "basis": [
                [rat_string(&self.basis[0][0]), rat_string(&self.basis[0][1])],
                [rat_string(&self.basis[1][0]), rat_string(&self.basis[1][1])],
            ],
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let b = v
            .get("basis")
            .and_then(|b| b.as_array())
            .filter(|b| b.len() == 2)
            .ok_or_else(|| Error::Input("Lattice2: missing 2x2 \"basis\"".into()))?;
        let mut m: Mat2 = Default::default();
        for (r, row) in b.iter().enumerate() {
            let row = row
                .as_array()
                .filter(|r| r.len() == 2)
                .ok_or_else(|| Error::Input("Lattice2: basis rows must have 2 entries".into()))?;
            for (c, entry) in row.iter().enumerate() {
                let s = entry
                    .as_str()
                    .ok_or_else(|| Error::Input("Lattice2: entries must be strings".into()))?;
                m[r][c] = parse_rat(s)?;
            }
        }
        Self::from_basis(m)
    }
}

// ---------------------------------------------------------------------------
// Rank-3 lattices (minimal support for the Z^3 quotients)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice3 {
    basis: Mat3,
}

impl Lattice3 {
    pub fn from_generators(gens: &[Point3]) -> Result<Self> {
        let mut all = Vec::new();
        for g in gens {
            all.extend(g.iter().cloned());
        }
        let den = common_denominator(&all);
        let denr = Rat::from_integer(den.clone());
        let cols: Vec<Vec<BigInt>> = gens
            .iter()
            .map(|g| {
                (0..3)
                    .map(|i| (&g[i] * &denr).to_integer())
                    .collect::<Vec<_>>()
            })
            .collect();
        let h = hnf_cols(3, cols)?;
        let mut basis: Mat3 = Default::default();
        for r in 0..3 {
            for c in 0..3 {
                basis[r][c] = Rat::new(h[c][r].clone(), den.clone());
            }
        }
        Ok(Lattice3 { basis })
    }

    pub fn standard() -> Self {
        let mut basis: Mat3 = Default::default();
        for (i, row) in basis.iter_mut().enumerate() {
            row[i] = Rat::one();
        }
        Lattice3 { basis }
    }

    pub fn scaled_standard(s: &Rat) -> Self {
        let mut basis: Mat3 = Default::default();
        for (i, row) in basis.iter_mut().enumerate() {
            row[i] = s.clone();
        }
        Lattice3 { basis }
    }

    pub fn basis(&self) -> &Mat3 {
        &self.basis
    }

    pub fn member(&self, x: &Point3) -> bool {
        let inv = mat3_inv(&self.basis).expect("canonical basis nonsingular");
        let t = mat3_mul_vec(&inv, x);
        t.iter().all(|c| c.is_integer())
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        let mut gens = Vec::new();
        for l in [self, other] {
            for c in 0..3 {
                gens.push([
                    l.basis[0][c].clone(),
                    l.basis[1][c].clone(),
                    l.basis[2][c].clone(),
                ]);
            }
        }
        Self::from_generators(&gens)
    }

    pub fn contains_lattice(&self, sub: &Self) -> bool {
        (0..3).all(|c| {
            self.member(&[
                sub.basis[0][c].clone(),
                sub.basis[1][c].clone(),
                sub.basis[2][c].clone(),
            ])
        })
    }

    pub fn index_in(&self, other: &Self) -> Result<BigInt> {
        if !other.contains_lattice(self) {
            return Err(Error::LatticeInclusion(
                "index_in requires the receiver to be a sublattice".into(),
            ));
        }
        let ratio = mat3_det(&self.basis).abs() / mat3_det(&other.basis).abs();
        debug_assert!(ratio.is_integer());
        Ok(ratio.to_integer())
    }
}

// ---------------------------------------------------------------------------
// Arithmetic progressions and congruence systems
// ---------------------------------------------------------------------------

/// The set `{step * n + offset : n in Z}` (with `step > 0` and
/// `0 <= offset < step`), or the empty set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArithProg {
    Empty,
    Progression { step: Rat, offset: Rat },
}

impl ArithProg {
    pub fn new(step: Rat, offset: Rat) -> Self {
        debug_assert!(step > Rat::zero());
        let offset = &offset - (&offset / &step).floor() * &step;
        ArithProg::Progression { step, offset }
    }

    pub fn integers() -> Self {
        Self::new(Rat::one(), Rat::zero())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ArithProg::Empty)
    }

    pub fn contains(&self, m: &Rat) -> bool {
        match self {
            ArithProg::Empty => false,
            ArithProg::Progression { step, offset } => ((m - offset) / step).is_integer(),
        }
    }

    /// Members in the closed interval `[lo, hi]`, in increasing order.
    pub fn members_in(&self, lo: &Rat, hi: &Rat) -> Vec<Rat> {
        match self {
            ArithProg::Empty => Vec::new(),
            ArithProg::Progression { step, offset } => {
                let k_lo = ((lo - offset) / step).ceil();
                let k_hi = ((hi - offset) / step).floor();
                let mut out = Vec::new();
                let mut k = k_lo;
                while k <= k_hi {
                    out.push(offset + &k * step);
                    k += Rat::one();
                }
                out
            }
        }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (s1, o1, s2, o2) = match (self, other) {
            (ArithProg::Empty, _) | (_, ArithProg::Empty) => return ArithProg::Empty,
            (
                ArithProg::Progression { step: s1, offset: o1 },
                ArithProg::Progression { step: s2, offset: o2 },
            ) => (s1, o1, s2, o2),
        };
        let den = common_denominator(&[s1.clone(), o1.clone(), s2.clone(), o2.clone()]);
        let denr = Rat::from_integer(den.clone());
        let si1 = (s1 * &denr).to_integer();
        let oi1 = (o1 * &denr).to_integer();
        let si2 = (s2 * &denr).to_integer();
        let oi2 = (o2 * &denr).to_integer();
        let e = si1.extended_gcd(&si2);
        let diff = &oi2 - &oi1;
        if (&diff % &e.gcd) != BigInt::zero() {
            return ArithProg::Empty;
        }
        let lcm = (&si1 / &e.gcd) * &si2;
        // x = o1 + s1 * (diff/g) * inv(s1/g mod s2/g); e.x satisfies
        // e.x * s1 + e.y * s2 = g, so e.x is that inverse up to sign.
        let t = (&diff / &e.gcd) * &e.x;
        let x = &oi1 + &si1 * t;
        let x = x.mod_floor(&lcm);
        ArithProg::new(
            Rat::new(lcm, den.clone()),
            Rat::new(x, den),
        )
    }
}

/// Exact solution set of the system `alpha_t * m = beta_t (mod Z)`.
/// Every `alpha_t` must be nonzero.
pub fn solve_congruences(conds: &[(Rat, Rat)]) -> ArithProg {
    let mut acc = ArithProg::Progression {
        step: Rat::one(),
        offset: Rat::zero(),
    };
    let mut first = true;
    for (alpha, beta) in conds {
        assert!(!alpha.is_zero(), "congruence coefficient must be nonzero");
        // alpha * m = beta + n  =>  m = beta/alpha + n/alpha
        let step = (Rat::one() / alpha).abs();
        let single = ArithProg::new(step, beta / alpha);
        acc = if first { single } else { acc.intersect(&single) };
        first = false;
        if acc.is_empty() {
            return acc;
        }
    }
    if first {
        ArithProg::integers()
    } else {
        acc
    }
}

impl ArithProg {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ArithProg::Empty => serde_json::Value::Null,
            ArithProg::Progression { step, offset } => serde_json::json!({
                "step": rat_string(step),
                "offset": rat_string(offset),
            }),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        if v.is_null() {
            return Ok(ArithProg::Empty);
        }
        let step = v
            .get("step")
            .and_then(|s| s.as_str())
            .ok_or_else(|| Error::Input("ArithProg: missing string \"step\"".into()))?;
        let offset = v
            .get("offset")
            .and_then(|s| s.as_str())
            .ok_or_else(|| Error::Input("ArithProg: missing string \"offset\"".into()))?;
        let step = parse_rat(step)?;
        if step <= Rat::zero() {
            return Err(Error::Input("ArithProg: step must be positive".into()));
        }
        Ok(Self::new(step, parse_rat(offset)?))
    }
}
