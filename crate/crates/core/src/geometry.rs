//! Combinatorial structures attached to a degree triple `(d1, d2, d)`.
//!
//! The triple determines an indefinite quadratic form `Q_{d1,d2,d}`, a pair
//! of rational involutions `(A, B)`, an invertible coordinate change `phi`
//! between `(lambda_1, lambda_2, l)`-space and `(i, j, k)`-index space, and
//! the lattices `Lambda` (periods), `Gamma` (index support) and the subgroup
//! `Delta` (extra periodicity). Congruence index sets are returned as
//! arithmetic progressions; empty sets are values, not errors.

use num::integer::Integer;
use num::traits::Zero;

use crate::error::Error;
use crate::lattice::{
    mat2_mul, solve_congruences, ArithProg, Lattice2, Mat2, Mat3, Point2, Point3,
};
use crate::numeric::{is_integer, rat, rat_int, rat_string, Rat};
use crate::Result;

/// Line-bundle degrees `(d1, d2, d)` with `d > d1`, `d > d2` and
/// `d0 = d1 + d2 - d > 0`, plus the derived invariants used everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeTriple {
    d1: u32,
    d2: u32,
    d: u32,
}

impl DegreeTriple {
    pub fn new(d1: u32, d2: u32, d: u32) -> Result<Self> {
        if d1 == 0 || d2 == 0 || d <= d1 || d <= d2 || d1 + d2 <= d {
            return Err(Error::InvalidTriple {
                d1: d1.to_string(),
                d2: d2.to_string(),
                d: d.to_string(),
            });
        }
        Ok(DegreeTriple { d1, d2, d })
    }

    pub fn d1(&self) -> u32 {
        self.d1
    }
    pub fn d2(&self) -> u32 {
        self.d2
    }
    pub fn d(&self) -> u32 {
        self.d
    }
    /// `d0 = d1 + d2 - d`, the target degree.
    pub fn d0(&self) -> u32 {
        self.d1 + self.d2 - self.d
    }
    pub fn g1(&self) -> u32 {
        self.d1.gcd(&self.d)
    }
    pub fn g2(&self) -> u32 {
        self.d2.gcd(&self.d)
    }
    pub fn g(&self) -> u32 {
        self.d1.gcd(&self.d2).gcd(&self.d)
    }
    /// `p1 = d d1 / (d - d1)`.
    pub fn p1(&self) -> Rat {
        rat((self.d as i64) * (self.d1 as i64), (self.d - self.d1) as i64)
    }
    /// `p2 = d d2 / (d - d2)`.
    pub fn p2(&self) -> Rat {
        rat((self.d as i64) * (self.d2 as i64), (self.d - self.d2) as i64)
    }

    /// Number of unknowns `d1 * d * d2` in a Massey tensor.
    pub fn index_count(&self) -> usize {
        self.d1 as usize * self.d as usize * self.d2 as usize
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "d": self.d,
            "d0": self.d0(),
            "d1": self.d1,
            "d2": self.d2,
            "g": self.g(),
            "g1": self.g1(),
            "g2": self.g2(),
            "p1": rat_string(&self.p1()),
            "p2": rat_string(&self.p2()),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let get = |k: &str| {
            v.get(k)
                .and_then(|x| x.as_u64())
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| Error::Input(format!("DegreeTriple: missing integer {k:?}")))
        };
        Self::new(get("d1")?, get("d2")?, get("d")?)
    }
}

/// Indefinite form `Q(m, n) = a m^2 + 2 b m n + c n^2` with `a, b, c > 0`
/// and `b^2 > ac`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadForm {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
}

impl QuadForm {
    pub fn new(a: Rat, b: Rat, c: Rat) -> Result<Self> {
        let pos = a > Rat::zero() && b > Rat::zero() && c > Rat::zero();
        if !pos || &b * &b <= &a * &c {
            return Err(Error::InvalidForm {
                a: rat_string(&a),
                b: rat_string(&b),
                c: rat_string(&c),
            });
        }
        Ok(QuadForm { a, b, c })
    }

    pub fn eval(&self, x: &Point2) -> Rat {
        &self.a * &x[0] * &x[0]
            + rat_int(2) * &self.b * &x[0] * &x[1]
            + &self.c * &x[1] * &x[1]
    }

    /// The associated bilinear form `(Q(x+y) - Q(x) - Q(y)) / 2`.
    pub fn bilinear(&self, x: &Point2, y: &Point2) -> Rat {
        &self.a * &x[0] * &y[0]
            + &self.b * (&x[0] * &y[1] + &x[1] * &y[0])
            + &self.c * &x[1] * &y[1]
    }

    /// `b^2 - ac > 0`.
    pub fn discriminant(&self) -> Rat {
        &self.b * &self.b - &self.a * &self.c
    }

    /// The involutions `A = [[-1, -2b/a], [0, 1]]` and
    /// `B = [[1, 0], [-2b/c, -1]]` under which admissible kernels change
    /// sign.
    pub fn matrices(&self) -> (Mat2, Mat2) {
        let a = [
            [rat_int(-1), rat_int(-2) * &self.b / &self.a],
            [rat_int(0), rat_int(1)],
        ];
        let b = [
            [rat_int(1), rat_int(0)],
            [rat_int(-2) * &self.b / &self.c, rat_int(-1)],
        ];
        (a, b)
    }

    pub fn scale(&self, factor: &Rat) -> Result<Self> {
        Self::new(&self.a * factor, &self.b * factor, &self.c * factor)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "a": rat_string(&self.a),
            "b": rat_string(&self.b),
            "c": rat_string(&self.c),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let get = |k: &str| {
            v.get(k)
                .and_then(|x| x.as_str())
                .ok_or_else(|| Error::Input(format!("QuadForm: missing string {k:?}")))
                .and_then(crate::numeric::parse_rat)
        };
        Self::new(get("a")?, get("b")?, get("c")?)
    }
}

/// Moduli parameters `(v1, v2, w1, w2)` of the line-bundle family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuliParams {
    pub v1: Rat,
    pub v2: Rat,
    pub w1: Rat,
    pub w2: Rat,
}

impl ModuliParams {
    pub fn zero() -> Self {
        ModuliParams {
            v1: Rat::zero(),
            v2: Rat::zero(),
            w1: Rat::zero(),
            w2: Rat::zero(),
        }
    }

    pub fn new(v1: Rat, v2: Rat, w1: Rat, w2: Rat) -> Self {
        ModuliParams { v1, v2, w1, w2 }
    }

    pub fn is_zero(&self) -> bool {
        self.v1.is_zero() && self.v2.is_zero() && self.w1.is_zero() && self.w2.is_zero()
    }

    pub fn v(&self) -> Point2 {
        [self.v1.clone(), self.v2.clone()]
    }

    pub fn w(&self) -> Point2 {
        [self.w1.clone(), self.w2.clone()]
    }
}

/// `Q_{d1,d2,d}(m, n) = (1/d)[d1(d-d1) m^2 + 2 d1 d2 m n + d2(d-d2) n^2]`.
pub fn quad_form_of(t: &DegreeTriple) -> QuadForm {
    let d = t.d() as i64;
    let d1 = t.d1() as i64;
    let d2 = t.d2() as i64;
    QuadForm::new(
        rat(d1 * (d - d1), d),
        rat(d1 * d2, d),
        rat(d2 * (d - d2), d),
    )
    .expect("degree triples always give admissible forms")
}

/// `phi(lambda_1, lambda_2, l)` into `(i, j, k)`-space.
pub fn phi(t: &DegreeTriple, p: &Point3) -> Point3 {
    let d = rat_int(t.d() as i64);
    let d1 = rat_int(t.d1() as i64);
    let d2 = rat_int(t.d2() as i64);
    let d0 = rat_int(t.d0() as i64);
    let l_over_d0 = &p[2] / &d0;
    [
        &d1 * &p[0] + &d1 * &l_over_d0,
        &d2 * &p[1] - &d1 * &p[0] - &d * &l_over_d0,
        -(&d2 * &p[1]) + &d2 * &l_over_d0,
    ]
}

/// Inverse of [`phi`].
pub fn phi_inv(t: &DegreeTriple, q: &Point3) -> Point3 {
    let d1 = rat_int(t.d1() as i64);
    let d2 = rat_int(t.d2() as i64);
    let d0 = rat_int(t.d0() as i64);
    let s = &q[0] + &q[1] + &q[2];
    let s_over_d0 = &s / &d0;
    [&q[0] / &d1 - &s_over_d0, -(&q[2] / &d2) + &s_over_d0, s]
}

/// `phi_l(lambda) = phi(lambda_1, lambda_2, l)`; reduction modulo
/// `d1 Z x d Z x d2 Z` is left to tensor evaluation.
pub fn phi_l(t: &DegreeTriple, l: i64, lam: &Point2) -> Point3 {
    phi(t, &[lam[0].clone(), lam[1].clone(), rat_int(l)])
}

/// Matrix of [`phi`] (row-major).
pub fn phi_matrix(t: &DegreeTriple) -> Mat3 {
    let d = t.d() as i64;
    let d1 = t.d1() as i64;
    let d2 = t.d2() as i64;
    let d0 = t.d0() as i64;
    [
        [rat_int(d1), rat_int(0), rat(d1, d0)],
        [rat_int(-d1), rat_int(d2), rat(-d, d0)],
        [rat_int(0), rat_int(-d2), rat(d2, d0)],
    ]
}

/// `p12`: drop the third coordinate.
pub fn p12(p: &Point3) -> Point2 {
    [p[0].clone(), p[1].clone()]
}

/// The period lattice `Lambda = d M^{-1} Z^2` where
/// `M = [[d1, d-d2], [d-d1, d2]]`; equivalently the solutions of
/// `d1 x1 + (d-d2) x2 in dZ` and `(d-d1) x1 + d2 x2 in dZ`.
pub fn lambda_lattice(t: &DegreeTriple) -> Lattice2 {
    let d = t.d() as i64;
    let d1 = t.d1() as i64;
    let d2 = t.d2() as i64;
    let m: Mat2 = [
        [rat_int(d1), rat_int(d - d2)],
        [rat_int(d - d1), rat_int(d2)],
    ];
    let m_inv = crate::lattice::mat2_inv(&m).expect("M is nonsingular for valid triples");
    let scaled = mat2_mul(
        &[[rat_int(d), rat_int(0)], [rat_int(0), rat_int(d)]],
        &m_inv,
    );
    Lattice2::from_basis(scaled).expect("Lambda has rank 2")
}

/// `Lambda^0 = Lambda intersect Z^2`, the homogeneous solution lattice of
/// the fiber congruences.
pub fn lambda0_lattice(t: &DegreeTriple) -> Lattice2 {
    lambda_lattice(t).intersect(&Lattice2::standard())
}

/// The index lattice `Gamma = p12(phi^{-1}(Z^3))`.
pub fn gamma_lattice(t: &DegreeTriple) -> Lattice2 {
    let e = [
        phi_inv(t, &[rat_int(1), rat_int(0), rat_int(0)]),
        phi_inv(t, &[rat_int(0), rat_int(1), rat_int(0)]),
        phi_inv(t, &[rat_int(0), rat_int(0), rat_int(1)]),
    ];
    Lattice2::from_generators(&[p12(&e[0]), p12(&e[1]), p12(&e[2])])
        .expect("Gamma has rank 2")
}

/// The slice `Gamma(l) = {lambda : phi(lambda, l) in Z^3}` as a coset
/// `offset + Gamma(0)`; `Gamma(0)` is `(1/d1)Z x (1/d2)Z`.
pub fn gamma_slice(t: &DegreeTriple, l: i64) -> (Point2, Lattice2) {
    let d1 = t.d1() as i64;
    let d2 = t.d2() as i64;
    let d0 = t.d0() as i64;
    let offset = [rat(-l, d0), rat(l, d0) - rat(l, d2)];
    let lattice = Lattice2::from_basis([
        [rat(1, d1), rat_int(0)],
        [rat_int(0), rat(1, d2)],
    ])
    .expect("diagonal basis");
    (offset, lattice)
}

/// Both displayed integrality ratios `2 d1 g1 / (d - d1)` and
/// `2 d2 g2 / (d - d2)` are integers. A nonzero universal Massey system can
/// exist only if this holds.
pub fn necessary_condition(t: &DegreeTriple) -> bool {
    let r1 = 2 * t.d1() as u64 * t.g1() as u64 % (t.d() - t.d1()) as u64;
    let r2 = 2 * t.d2() as u64 * t.g2() as u64 % (t.d() - t.d2()) as u64;
    r1 == 0 && r2 == 0
}

/// Generators `(z1, z2, (d0/g) e3)` of the extra periodicity subgroup
/// `Delta` inside `phi^{-1}(Z^3)`.
pub fn delta_generators(t: &DegreeTriple) -> Result<[Point3; 3]> {
    if !necessary_condition(t) {
        return Err(Error::IntegralityCondition {
            d1: t.d1(),
            d2: t.d2(),
            d: t.d(),
            detail: "2 d1 g1/(d-d1) and 2 d2 g2/(d-d2) must be integers".into(),
        });
    }
    let d = t.d() as i64;
    let d1 = t.d1() as i64;
    let d2 = t.d2() as i64;
    let d0 = t.d0() as i64;
    let g1 = t.g1() as i64;
    let g2 = t.g2() as i64;
    let g = t.g() as i64;
    let z1 = [
        rat(-2 * d2 * g1, d0 * (d - d1)),
        rat(2 * g1, d0),
        rat_int(2 * g1),
    ];
    let z2 = [
        rat(-2 * g2, d0),
        rat(2 * d1 * g2, d0 * (d - d2)),
        rat_int(2 * g2),
    ];
    let e3 = [rat_int(0), rat_int(0), rat(d0, g)];
    Ok([z1, z2, e3])
}

/// `p12(Delta)` as a rank-2 lattice.
pub fn delta_projection(t: &DegreeTriple) -> Result<Lattice2> {
    let [z1, z2, _] = delta_generators(t)?;
    Lattice2::from_generators(&[p12(&z1), p12(&z2)])
}

/// Index translations under which every admissible tensor is periodic:
/// `phi(z1)` and `phi(z2)` (always integer vectors when the necessary
/// condition holds).
pub fn periodicity_shifts(t: &DegreeTriple) -> ([Rat; 3], [Rat; 3]) {
    let d = t.d() as i64;
    let d1 = t.d1() as i64;
    let d2 = t.d2() as i64;
    let g1 = t.g1() as i64;
    let g2 = t.g2() as i64;
    (
        [rat(-2 * d1 * g1, d - d1), rat(2 * d * g1, d - d1), rat_int(0)],
        [rat_int(0), rat(2 * d * g2, d - d2), rat(-2 * d2 * g2, d - d2)],
    )
}

/// The linear operators of the two sign relations on `(i, j, k)`-space.
/// They equal `phi (A x id) phi^{-1}` and `phi (B x id) phi^{-1}`.
pub fn sign_relation_operators(t: &DegreeTriple) -> (Mat3, Mat3) {
    let d = t.d() as i64;
    let d1 = t.d1() as i64;
    let d2 = t.d2() as i64;
    let v1: Mat3 = [
        [rat(-(d + d1), d - d1), rat(-2 * d1, d - d1), rat_int(0)],
        [rat(2 * d, d - d1), rat(d + d1, d - d1), rat_int(0)],
        [rat_int(0), rat_int(0), rat_int(1)],
    ];
    let v2: Mat3 = [
        [rat_int(1), rat_int(0), rat_int(0)],
        [rat_int(0), rat(d + d2, d - d2), rat(2 * d, d - d2)],
        [rat_int(0), rat(-2 * d2, d - d2), rat(-(d + d2), d - d2)],
    ];
    (v1, v2)
}

/// The fiber `{lambda in Q^2 : phi_l(lambda) = (i,j,k) mod d1 Z x d Z x d2 Z}`
/// as a coset `offset + Lambda^0`, or `None` when the congruences are
/// inconsistent.
pub fn phi_fiber_coset(
    t: &DegreeTriple,
    i: i64,
    j: i64,
    k: i64,
    l: i64,
) -> Option<(Point2, Lattice2)> {
    let d = t.d() as i64;
    let d1 = t.d1() as i64;
    let d2 = t.d2() as i64;
    let d0 = t.d0() as i64;
    let alpha = rat(i, d1) - rat(l, d0);
    let beta = rat(l, d0) - rat(k, d2);
    let gamma = rat(-j, d) - rat(k, d2);
    // With lambda = (alpha + s, beta + t), the third congruence becomes
    // d1 s + (d - d2) t = d * delta (mod d Z) over integers s, t.
    let delta = &gamma - (rat_int(d1) * &alpha + rat_int(d - d2) * &beta) / rat_int(d);
    let rhs = rat_int(d) * &delta;
    if !is_integer(&rhs) {
        return None;
    }
    let rhs: i64 = match i64::try_from(rhs.to_integer().mod_floor(&num::bigint::BigInt::from(d))) {
        Ok(v) => v,
        Err(_) => return None,
    };
    let g = gcd3(d1, d - d2, d);
    if rhs % g != 0 {
        return None;
    }
    // Particular solution of d1 s + (d-d2) t + d u = rhs.
    let e1 = d1.extended_gcd(&(d - d2));
    let g12 = e1.gcd;
    let e2 = g12.extended_gcd(&d);
    debug_assert_eq!(e2.gcd, g);
    let scale = rhs / g;
    let s = e1.x * e2.x * scale;
    let tt = e1.y * e2.x * scale;
    let offset = [&alpha + rat_int(s), &beta + rat_int(tt)];
    let lattice = lambda0_lattice(t);
    Some((lattice.canonical_rep(&offset), lattice))
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    a.gcd(&b).gcd(&c)
}

/// `Lambda^0(i,j,k,l)`: the integer solutions of the fiber congruences, as
/// a coset of `Lambda^0` inside `Z^2`, or `None` when empty.
pub fn lambda0_progressions(
    t: &DegreeTriple,
    i: i64,
    j: i64,
    k: i64,
    l: i64,
) -> Option<(Point2, Lattice2)> {
    let (offset, lattice) = phi_fiber_coset(t, i, j, k, l)?;
    if is_integer(&offset[0]) && is_integer(&offset[1]) {
        Some((offset, lattice))
    } else {
        None
    }
}

/// `I_1(u, i, j) = {m : m = -i/d1 - j/d (mod Z),
/// d m/(d-d1) = -i/d1 - u/(d-d1) (mod Z)}`.
pub fn i1_set(t: &DegreeTriple, u: i64, i: i64, j: i64) -> ArithProg {
    let d = t.d() as i64;
    let d1 = t.d1() as i64;
    solve_congruences(&[
        (rat_int(1), rat(-i, d1) - rat(j, d)),
        (rat(d, d - d1), rat(-i, d1) - rat(u, d - d1)),
    ])
}

/// `I_2(v, j, k) = {m : m = j/d + k/d2 (mod Z),
/// d m/(d-d2) = v/(d-d2) + k/d2 (mod Z)}`.
pub fn i2_set(t: &DegreeTriple, v: i64, j: i64, k: i64) -> ArithProg {
    let d = t.d() as i64;
    let d2 = t.d2() as i64;
    solve_congruences(&[
        (rat_int(1), rat(j, d) + rat(k, d2)),
        (rat(d, d - d2), rat(v, d - d2) + rat(k, d2)),
    ])
}

/// Theta arguments of the two double-product expansions: the pair
/// `(rho, sigma)` with `x = rho tau + sigma`, together with the scale `p`,
/// for each side.
pub fn double_product_args(t: &DegreeTriple, params: &ModuliParams) -> ((Rat, Rat, Rat), (Rat, Rat, Rat)) {
    let d = rat_int(t.d() as i64);
    let d1 = rat_int(t.d1() as i64);
    let d2 = rat_int(t.d2() as i64);
    let dm1 = rat_int((t.d() - t.d1()) as i64);
    let dm2 = rat_int((t.d() - t.d2()) as i64);
    let rho1 = -(&dm1 * &params.v1 + &d2 * &params.v2) / &d;
    let sigma1 = -(&dm1 * &params.w1 + &d2 * &params.w2) / &d;
    let rho2 = -(&dm2 * &params.v2 + &d1 * &params.v1) / &d;
    let sigma2 = -(&dm2 * &params.w2 + &d1 * &params.w1) / &d;
    ((rho1, sigma1, t.p1()), (rho2, sigma2, t.p2()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{mat2_mul_vec, mat3_inv, mat3_mul};

    fn t(d1: u32, d2: u32, d: u32) -> DegreeTriple {
        DegreeTriple::new(d1, d2, d).unwrap()
    }

    #[test]
    fn triple_validation() {
        assert!(DegreeTriple::new(2, 2, 3).is_ok());
        assert!(DegreeTriple::new(1, 2, 3).is_err()); // d0 = 0
        assert!(DegreeTriple::new(3, 2, 3).is_err()); // d = d1
        assert!(DegreeTriple::new(2, 4, 4).is_err()); // d = d2
    }

    #[test]
    fn quad_form_values() {
        let q = quad_form_of(&t(2, 2, 3));
        assert_eq!((q.a.clone(), q.b.clone(), q.c.clone()), (rat(2, 3), rat(4, 3), rat(2, 3)));
        let q = quad_form_of(&t(3, 3, 4));
        assert_eq!((q.a.clone(), q.b.clone(), q.c.clone()), (rat(3, 4), rat(9, 4), rat(3, 4)));
        let q = quad_form_of(&t(2, 3, 4));
        assert_eq!((q.a.clone(), q.b.clone(), q.c.clone()), (rat(1, 1), rat(3, 2), rat(3, 4)));
    }

    #[test]
    fn involution_matrices() {
        let q = quad_form_of(&t(2, 2, 3));
        let (a, _) = q.matrices();
        assert_eq!(a[0][1], rat_int(-4));
        let q = quad_form_of(&t(2, 3, 4));
        let (_, b) = q.matrices();
        assert_eq!(b[1][0], rat_int(-4));
        for triple in [t(2, 2, 3), t(3, 3, 4), t(2, 3, 4), t(3, 4, 6)] {
            let q = quad_form_of(&triple);
            let (a, b) = q.matrices();
            let id: Mat2 = [[rat_int(1), rat_int(0)], [rat_int(0), rat_int(1)]];
            assert_eq!(mat2_mul(&a, &a), id);
            assert_eq!(mat2_mul(&b, &b), id);
        }
    }

    #[test]
    fn involutions_preserve_the_form() {
        let triples = [t(2, 2, 3), t(3, 3, 4), t(2, 3, 4)];
        for tr in triples {
            let q = quad_form_of(&tr);
            let (a, b) = q.matrices();
            let mut seed = 12345u64;
            for _ in 0..100 {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let x0 = rat(((seed >> 16) % 41) as i64 - 20, ((seed >> 40) % 7 + 1) as i64);
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let x1 = rat(((seed >> 16) % 41) as i64 - 20, ((seed >> 40) % 7 + 1) as i64);
                let x = [x0, x1];
                assert_eq!(q.eval(&mat2_mul_vec(&a, &x)), q.eval(&x));
                assert_eq!(q.eval(&mat2_mul_vec(&b, &x)), q.eval(&x));
            }
        }
    }

    #[test]
    fn phi_and_phi_inv_are_mutually_inverse() {
        let tr = t(2, 2, 3);
        assert_eq!(
            phi_inv(&tr, &[rat_int(1), rat_int(0), rat_int(0)]),
            [rat(-1, 2), rat_int(1), rat_int(1)]
        );
        assert_eq!(
            phi(&tr, &[rat_int(0), rat_int(0), rat_int(0)]),
            [rat_int(0), rat_int(0), rat_int(0)]
        );
        let mut seed = 99u64;
        for tr in [t(2, 2, 3), t(3, 4, 6), t(2, 3, 4)] {
            for _ in 0..100 {
                let mut coord = || {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    rat(((seed >> 16) % 61) as i64 - 30, ((seed >> 40) % 9 + 1) as i64)
                };
                let x = [coord(), coord(), coord()];
                assert_eq!(phi(&tr, &phi_inv(&tr, &x)), x);
                assert_eq!(phi_inv(&tr, &phi(&tr, &x)), x);
            }
        }
    }

    #[test]
    fn lambda_basis_for_2_2_3() {
        let l = lambda_lattice(&t(2, 2, 3));
        let expect = Lattice2::from_generators(&[
            [rat_int(2), rat_int(-1)],
            [rat_int(-1), rat_int(2)],
        ])
        .unwrap();
        assert_eq!(l, expect);
        // generators satisfy both defining congruences
        for g in l.generators() {
            let c1 = rat_int(2) * &g[0] + rat_int(1) * &g[1];
            let c2 = rat_int(1) * &g[0] + rat_int(2) * &g[1];
            assert!((c1 / rat_int(3)).is_integer());
            assert!((c2 / rat_int(3)).is_integer());
        }
    }

    #[test]
    fn lambda_is_rescale_invariant() {
        for n in [2u32, 3] {
            assert_eq!(
                lambda_lattice(&t(2 * n, 2 * n, 3 * n)),
                lambda_lattice(&t(2, 2, 3))
            );
        }
    }

    #[test]
    fn scaling_laws_hold_for_all_admissible_triples_up_to_8() {
        for d in 2u32..=8 {
            for d1 in 1..d {
                for d2 in 1..d {
                    if d1 + d2 <= d {
                        continue;
                    }
                    let tr = t(d1, d2, d);
                    let doubled = t(2 * d1, 2 * d2, 2 * d);
                    assert_eq!(
                        gamma_lattice(&doubled),
                        gamma_lattice(&tr).scale(&rat(1, 2)).unwrap(),
                        "{tr:?}: Gamma scaling"
                    );
                    assert_eq!(
                        lambda_lattice(&doubled),
                        lambda_lattice(&tr),
                        "{tr:?}: Lambda invariance"
                    );
                }
            }
        }
    }

    #[test]
    fn projected_delta_plus_lambda_is_rescale_invariant() {
        for (d1, d2, d) in [(2u32, 2u32, 3u32), (3, 3, 4), (2, 3, 4), (3, 4, 6)] {
            let tr = t(d1, d2, d);
            let base = delta_projection(&tr).unwrap().sum(&lambda_lattice(&tr));
            for n in [2u32, 3] {
                let tn = t(n * d1, n * d2, n * d);
                let scaled = delta_projection(&tn).unwrap().sum(&lambda_lattice(&tn));
                assert_eq!(scaled, base, "({d1},{d2},{d}) x{n}");
            }
        }
    }

    #[test]
    fn gamma_contains_lambda_and_scales() {
        for tr in [t(2, 2, 3), t(3, 3, 4), t(2, 3, 4)] {
            let gamma = gamma_lattice(&tr);
            let lambda = lambda_lattice(&tr);
            assert!(gamma.contains_lattice(&lambda));
        }
        let g1 = gamma_lattice(&t(2, 2, 3));
        let g2 = gamma_lattice(&t(4, 4, 6));
        assert_eq!(g2, g1.scale(&rat(1, 2)).unwrap());
        assert!(gamma_lattice(&t(2, 2, 3)).member(&[rat_int(0), rat_int(0)]));
    }

    #[test]
    fn lambda_from_projected_phi_inv_of_scaled_standard() {
        // p12(phi^{-1}(d Z^3)) = Lambda
        for tr in [t(2, 2, 3), t(3, 3, 4), t(2, 3, 4), t(3, 4, 6)] {
            let gens = [
                phi_inv(&tr, &[rat_int(tr.d1() as i64), rat_int(0), rat_int(0)]),
                phi_inv(&tr, &[rat_int(0), rat_int(tr.d() as i64), rat_int(0)]),
                phi_inv(&tr, &[rat_int(0), rat_int(0), rat_int(tr.d2() as i64)]),
            ];
            let projected =
                Lattice2::from_generators(&[p12(&gens[0]), p12(&gens[1]), p12(&gens[2])]).unwrap();
            assert_eq!(projected, lambda_lattice(&tr));
        }
    }

    #[test]
    fn necessary_condition_cases() {
        assert!(necessary_condition(&t(2, 2, 3)));
        assert!(necessary_condition(&t(3, 3, 4)));
        assert!(!necessary_condition(&t(2, 4, 5)));
    }

    #[test]
    fn delta_generators_for_2_2_3() {
        let tr = t(2, 2, 3);
        let [z1, z2, e3] = delta_generators(&tr).unwrap();
        assert_eq!(z1, [rat_int(-4), rat_int(2), rat_int(2)]);
        assert_eq!(z2, [rat_int(-2), rat_int(4), rat_int(2)]);
        assert_eq!(e3, [rat_int(0), rat_int(0), rat_int(1)]);
        assert_eq!(phi(&tr, &z1), [rat_int(-4), rat_int(6), rat_int(0)]);
        // phi((d0/g) e3) = (d1/g, -d/g, d2/g)
        assert_eq!(phi(&tr, &e3), [rat_int(2), rat_int(-3), rat_int(2)]);
        for tr in [t(2, 2, 3), t(3, 3, 4), t(2, 3, 4), t(3, 4, 6), t(4, 4, 6)] {
            for z in delta_generators(&tr).unwrap() {
                let img = phi(&tr, &z);
                assert!(img.iter().all(is_integer), "{tr:?}: {z:?} -> {img:?}");
            }
        }
        assert!(delta_generators(&t(2, 4, 5)).is_err());
    }

    #[test]
    fn periodicity_shifts_match_phi_of_delta() {
        for tr in [t(2, 2, 3), t(3, 3, 4), t(2, 3, 4), t(3, 4, 6)] {
            let [z1, z2, _] = delta_generators(&tr).unwrap();
            let (s1, s2) = periodicity_shifts(&tr);
            assert_eq!(phi(&tr, &z1), s1);
            assert_eq!(phi(&tr, &z2), s2);
        }
    }

    #[test]
    fn conjugated_involutions_equal_sign_relation_operators() {
        // ten admissible triples
        let triples = [
            t(2, 2, 3),
            t(3, 3, 4),
            t(2, 3, 4),
            t(3, 2, 4),
            t(2, 4, 5),
            t(4, 4, 5),
            t(3, 4, 6),
            t(4, 4, 6),
            t(5, 5, 6),
            t(4, 5, 6),
        ];
        for tr in triples {
            let q = quad_form_of(&tr);
            let (a, b) = q.matrices();
            let a3: Mat3 = [
                [a[0][0].clone(), a[0][1].clone(), rat_int(0)],
                [a[1][0].clone(), a[1][1].clone(), rat_int(0)],
                [rat_int(0), rat_int(0), rat_int(1)],
            ];
            let b3: Mat3 = [
                [b[0][0].clone(), b[0][1].clone(), rat_int(0)],
                [b[1][0].clone(), b[1][1].clone(), rat_int(0)],
                [rat_int(0), rat_int(0), rat_int(1)],
            ];
            let f = phi_matrix(&tr);
            let f_inv = mat3_inv(&f).unwrap();
            let (v1, v2) = sign_relation_operators(&tr);
            assert_eq!(mat3_mul(&mat3_mul(&f, &a3), &f_inv), v1, "{tr:?} A side");
            assert_eq!(mat3_mul(&mat3_mul(&f, &b3), &f_inv), v2, "{tr:?} B side");
        }
    }

    #[test]
    fn phi_matrix_matches_phi() {
        let tr = t(3, 4, 6);
        let x = [rat(1, 2), rat(-2, 3), rat(5, 1)];
        assert_eq!(crate::lattice::mat3_mul_vec(&phi_matrix(&tr), &x), phi(&tr, &x));
    }

    #[test]
    fn fiber_cosets_and_integer_version() {
        let tr = t(2, 2, 3);
        let (offset, lattice) = lambda0_progressions(&tr, 0, 0, 0, 0).unwrap();
        let zero = [rat_int(0), rat_int(0)];
        let diff = [&zero[0] - &offset[0], &zero[1] - &offset[1]];
        assert!(lattice.member(&diff), "(0,0) lies in Lambda^0(0,0,0,0)");
        assert!(lambda0_progressions(&tr, 1, 0, 0, 0)
            .map(|(o, lat)| {
                let d = [-&o[0], -&o[1]];
                lat.member(&d)
            })
            .map_or(true, |contains_zero| !contains_zero));
    }

    #[test]
    fn fiber_membership_matches_phi_l_on_grid() {
        let tr = t(2, 2, 3);
        for (i, j, k, l) in [(0i64, 0i64, 0i64, 0i64), (1, 0, 0, 0), (1, 2, 1, 0), (0, 1, 1, 0)] {
            let coset = lambda0_progressions(&tr, i, j, k, l);
            for a in -4i64..=4 {
                for b in -4i64..=4 {
                    let lam = [rat_int(a), rat_int(b)];
                    let img = phi_l(&tr, l, &lam);
                    let matches = is_integer(&img[0])
                        && is_integer(&img[1])
                        && is_integer(&img[2])
                        && ((&img[0] - rat_int(i)) / rat_int(tr.d1() as i64)).is_integer()
                        && ((&img[1] - rat_int(j)) / rat_int(tr.d() as i64)).is_integer()
                        && ((&img[2] - rat_int(k)) / rat_int(tr.d2() as i64)).is_integer();
                    let in_coset = coset.as_ref().map_or(false, |(o, lat)| {
                        lat.member(&[&lam[0] - &o[0], &lam[1] - &o[1]])
                    });
                    assert_eq!(matches, in_coset, "({i},{j},{k},{l}) at ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn index_space_and_kernel_space_quotients_match() {
        // |Z^3 / (dZ^3 + phi(Delta))| = |Gamma / (p12(Delta) + Lambda)| and
        // |Z^3 / (dZ^3 + (d0/g) Z phi(e3))| = |Gamma / Lambda|.
        use crate::lattice::Lattice3;
        for tr in [t(2, 2, 3), t(3, 3, 4), t(2, 3, 4), t(3, 4, 6), t(4, 4, 6)] {
            let d1 = rat_int(tr.d1() as i64);
            let d = rat_int(tr.d() as i64);
            let d2 = rat_int(tr.d2() as i64);
            let scaled_gens = [
                [d1.clone(), rat_int(0), rat_int(0)],
                [rat_int(0), d.clone(), rat_int(0)],
                [rat_int(0), rat_int(0), d2.clone()],
            ];
            let [z1, z2, e3] = delta_generators(&tr).unwrap();
            let gamma = gamma_lattice(&tr);
            let lambda = lambda_lattice(&tr);

            let mut gens = scaled_gens.to_vec();
            gens.push(phi(&tr, &e3));
            let coarse = Lattice3::from_generators(&gens).unwrap();
            assert_eq!(
                coarse.index_in(&Lattice3::standard()).unwrap(),
                lambda.index_in(&gamma).unwrap(),
                "{tr:?}: e3 quotient"
            );

            gens.push(phi(&tr, &z1));
            gens.push(phi(&tr, &z2));
            let full = Lattice3::from_generators(&gens).unwrap();
            let kernel_period = delta_projection(&tr).unwrap().sum(&lambda);
            assert_eq!(
                full.index_in(&Lattice3::standard()).unwrap(),
                kernel_period.index_in(&gamma).unwrap(),
                "{tr:?}: Delta quotient"
            );
        }
    }

    #[test]
    fn i1_examples() {
        let tr = t(2, 2, 3);
        assert_eq!(i1_set(&tr, 0, 0, 0), ArithProg::integers());
        assert_eq!(
            i1_set(&tr, 0, 1, 0),
            ArithProg::new(rat_int(1), rat(1, 2))
        );
    }

    #[test]
    fn i1_nonempty_iff_u_matches_mod_g1() {
        let tr = t(2, 3, 4);
        let g1 = tr.g1() as i64;
        for u in 0..(tr.d() - tr.d1()) as i64 {
            for i in 0..tr.d1() as i64 {
                for j in 0..tr.d() as i64 {
                    let nonempty = !i1_set(&tr, u, i, j).is_empty();
                    assert_eq!(nonempty, (u - i - j).rem_euclid(g1) == 0, "u={u} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn i2_nonempty_criterion_mirrors_i1() {
        let tr = t(2, 3, 4);
        let g2 = tr.g2() as i64;
        for v in 0..(tr.d() - tr.d2()) as i64 {
            for j in 0..tr.d() as i64 {
                for k in 0..tr.d2() as i64 {
                    let nonempty = !i2_set(&tr, v, j, k).is_empty();
                    assert_eq!(nonempty, (v - j - k).rem_euclid(g2) == 0, "v={v} j={j} k={k}");
                }
            }
        }
    }

    #[test]
    fn json_round_trips() {
        let tr = t(2, 3, 4);
        assert_eq!(DegreeTriple::from_json(&tr.to_json()).unwrap(), tr);
        let q = quad_form_of(&tr);
        assert_eq!(QuadForm::from_json(&q.to_json()).unwrap(), q);
        let j = tr.to_json();
        assert_eq!(j.get("d0").unwrap().as_u64().unwrap(), 1);
        assert_eq!(j.get("p1").unwrap().as_str().unwrap(), "4/1");
    }
}
