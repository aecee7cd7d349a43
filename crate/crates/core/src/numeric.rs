//! Exact rational and cyclotomic arithmetic.
//!
//! [`Rat`] is an arbitrary-precision rational (always stored in lowest terms
//! with a positive denominator). [`Cyclo`] is an element of a cyclotomic
//! field `Q(zeta_M)`, stored on the power basis `zeta_M^j`, `0 <= j < phi(M)`,
//! reduced modulo the `M`-th cyclotomic polynomial. Two values of different
//! orders compare equal iff their images in `Q(zeta_lcm)` have identical
//! coefficient vectors, so equality is always exact.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock, RwLock};

use num::bigint::BigInt;
use num::integer::Integer;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::Result;

pub type Rat = BigRational;

/// `n/d` as an exact rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}

pub fn is_integer(x: &Rat) -> bool {
    x.denom().is_one()
}

/// Fractional part in `[0, 1)`.
pub fn frac_part(x: &Rat) -> Rat {
    x - x.floor()
}

/// `x mod m` normalized into `[0, m)` for `m > 0`.
pub fn rat_mod(x: &Rat, m: &Rat) -> Rat {
    let q = (x / m).floor();
    x - q * m
}

/// gcd of two rationals: the generator of `aZ + bZ` (zero if both are zero).
pub fn rat_gcd(a: &Rat, b: &Rat) -> Rat {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let den = a.denom().lcm(b.denom());
    let na = (a * Rat::from_integer(den.clone())).to_integer();
    let nb = (b * Rat::from_integer(den.clone())).to_integer();
    Rat::new(na.gcd(&nb), den)
}

/// lcm of denominators of a slice of rationals.
pub fn common_denominator(xs: &[Rat]) -> BigInt {
    let mut l = BigInt::one();
    for x in xs {
        l = l.lcm(x.denom());
    }
    l
}

/// Parse "p/q" or "p" into a rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Input(format!("invalid rational {s:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Input(format!("invalid rational {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Input(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(n, d))
}

/// Render as "p/q" (always with the explicit denominator).
pub fn rat_string(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Smallest integer `n >= 0` with `n^2 >= x` (for nonnegative `x`).
/// Used only to produce safe enumeration bounds; exactness is not required
/// beyond being an upper bound.
pub fn sqrt_ceil(x: &Rat) -> BigInt {
    if x <= &Rat::zero() {
        return BigInt::zero();
    }
    // ceil(x) <= n^2 for n = isqrt(ceil(x)) possibly + 1
    let c = x.ceil().to_integer();
    let r = c.sqrt();
    if &r * &r >= c {
        r
    } else {
        r + 1
    }
}

static ORDER_CAP: AtomicU64 = AtomicU64::new(10_000);

/// Global cap on cyclotomic orders, guarding against accidental blow-up.
pub fn order_cap() -> u64 {
    ORDER_CAP.load(Ordering::Relaxed)
}

pub fn set_order_cap(cap: u64) {
    ORDER_CAP.store(cap.max(1), Ordering::Relaxed);
}

/// Euler's totient.
pub fn euler_phi(mut m: u64) -> u64 {
    let mut result = m;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

fn phi_cache() -> &'static RwLock<HashMap<u64, Arc<Vec<BigInt>>>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Exact division of integer polynomials (the divisor must divide evenly;
/// its leading coefficient is 1 for every cyclotomic polynomial).
fn int_poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let nd = rem.len() - 1;
    assert!(den[dd].is_one(), "divisor must be monic");
    let mut quot = vec![BigInt::zero(); nd - dd + 1];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        quot[i] = c.clone();
        for (k, dk) in den.iter().enumerate() {
            rem[i + k] -= &c * dk;
        }
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    quot
}

/// Coefficients of the `m`-th cyclotomic polynomial, low degree first.
/// Computed as `(x^m - 1) / prod_{d | m, d < m} Phi_d` and cached.
pub fn cyclotomic_polynomial(m: u64) -> Arc<Vec<BigInt>> {
    if let Some(p) = phi_cache().read().unwrap().get(&m) {
        return p.clone();
    }
    let poly = if m == 1 {
        vec![-BigInt::one(), BigInt::one()]
    } else {
        let mut num = vec![BigInt::zero(); m as usize + 1];
        num[0] = -BigInt::one();
        num[m as usize] = BigInt::one();
        let mut acc = num;
        for d in 1..m {
            if m.is_multiple_of(d) {
                let phi_d = cyclotomic_polynomial(d);
                acc = int_poly_div_exact(&acc, &phi_d);
            }
        }
        acc
    };
    debug_assert_eq!(poly.len() as u64, euler_phi(m) + 1);
    let arc = Arc::new(poly);
    phi_cache()
        .write()
        .unwrap()
        .entry(m)
        .or_insert_with(|| arc.clone());
    arc
}

/// An element of `Q(zeta_order)` on the reduced power basis.
#[derive(Clone, Debug)]
pub struct Cyclo {
    order: u64,
    coeffs: Vec<Rat>,
}

impl Cyclo {
    pub fn zero() -> Self {
        Cyclo {
            order: 1,
            coeffs: vec![Rat::zero()],
        }
    }

    pub fn one() -> Self {
        Cyclo {
            order: 1,
            coeffs: vec![Rat::one()],
        }
    }

    pub fn from_rat(x: Rat) -> Self {
        Cyclo {
            order: 1,
            coeffs: vec![x],
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(rat_int(n))
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Construct from raw power-basis coefficients (reducing mod `Phi_order`).
    pub fn from_coeffs(order: u64, coeffs: Vec<Rat>) -> Result<Self> {
        check_order(order)?;
        Ok(Self::reduce(order, coeffs))
    }

    fn reduce(order: u64, mut coeffs: Vec<Rat>) -> Self {
        let phi = euler_phi(order) as usize;
        if coeffs.len() > phi {
            let modulus = cyclotomic_polynomial(order);
            let deg = modulus.len() - 1;
            for i in (deg..coeffs.len()).rev() {
                if coeffs[i].is_zero() {
                    continue;
                }
                let c = std::mem::replace(&mut coeffs[i], Rat::zero());
                for (k, mk) in modulus.iter().take(deg).enumerate() {
                    let delta = &c * Rat::from_integer(mk.clone());
                    coeffs[i - deg + k] -= delta;
                }
            }
        }
        coeffs.resize(phi, Rat::zero());
        Cyclo { order, coeffs }
    }

    /// `exp(2 pi i num/den)` as an exact cyclotomic number. The order of the
    /// representation is `den / gcd(num, den)`, the multiplicative order of
    /// the result.
    pub fn root_of_unity(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        let num = BigInt::from(num).mod_floor(&BigInt::from(den));
        let g = num.gcd(&BigInt::from(den));
        let order = (BigInt::from(den) / &g).to_u64().unwrap();
        let k = (num / g).to_u64().unwrap();
        check_order(order)?;
        let phi = euler_phi(order) as usize;
        let mut coeffs = vec![Rat::zero(); (k as usize).max(phi - 1) + 1];
        coeffs[k as usize] = Rat::one();
        Ok(Self::reduce(order, coeffs))
    }

    /// `exp(2 pi i r)` for a rational turn `r`.
    pub fn root_of_unity_rat(r: &Rat) -> Result<Self> {
        let r = frac_part(r);
        let den = r
            .denom()
            .to_u64()
            .ok_or_else(|| Error::Input("root-of-unity denominator too large".into()))?;
        let num = r
            .numer()
            .to_i64()
            .ok_or_else(|| Error::Input("root-of-unity numerator too large".into()))?;
        Self::root_of_unity(num, den)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Value-preserving re-representation in `Q(zeta_target)`.
    pub fn embed(&self, target: u64) -> Result<Self> {
        if target == self.order {
            return Ok(self.clone());
        }
        if !target.is_multiple_of(self.order) {
            return Err(Error::EmbedOrder {
                from: self.order,
                to: target,
            });
        }
        check_order(target)?;
        Ok(self.embed_unchecked(target))
    }

    fn embed_unchecked(&self, target: u64) -> Self {
        if target == self.order {
            return self.clone();
        }
        let k = (target / self.order) as usize;
        let mut coeffs = vec![Rat::zero(); (self.coeffs.len() - 1) * k + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs[j * k] = c.clone();
        }
        Self::reduce(target, coeffs)
    }

    fn common_order(&self, other: &Self) -> u64 {
        self.order.lcm(&other.order)
    }

    pub fn add(&self, other: &Self) -> Self {
        let l = self.common_order(other);
        let mut a = self.embed_unchecked(l);
        let b = other.embed_unchecked(l);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x += y;
        }
        a
    }

    pub fn neg(&self) -> Self {
        Cyclo {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let l = self.common_order(other);
        let a = self.embed_unchecked(l);
        let b = other.embed_unchecked(l);
        let mut out = vec![Rat::zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, ai) in a.coeffs.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                out[i + j] += ai * bj;
            }
        }
        Self::reduce(l, out)
    }

    pub fn scale(&self, k: &Rat) -> Self {
        Cyclo {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in
    /// `Q[x]` modulo `Phi_order`.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let modulus: Vec<Rat> = cyclotomic_polynomial(self.order)
            .iter()
            .map(|c| Rat::from_integer(c.clone()))
            .collect();
        let mut r0 = modulus;
        let mut r1 = trim(self.coeffs.clone());
        let mut s0 = vec![Rat::zero()];
        let mut s1 = vec![Rat::one()];
        while poly_deg(&r1) > 0 {
            let (q, r) = poly_divrem(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
        }
        // r1 is a nonzero constant: Phi is irreducible over Q.
        let c = r1[0].clone();
        debug_assert!(!c.is_zero());
        let inv: Vec<Rat> = s1.iter().map(|x| x / &c).collect();
        Ok(Self::reduce(self.order, inv))
    }

    /// `self^k` for nonnegative `k`.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Cyclo::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// The rational value, if this element lies in `Q`.
    pub fn as_rat(&self) -> Option<Rat> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Numerical evaluation (display only).
    pub fn eval_f64(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cf = c.to_f64().unwrap_or(f64::NAN);
            let arg = 2.0 * std::f64::consts::PI * (j as f64) / (self.order as f64);
            re += cf * arg.cos();
            im += cf * arg.sin();
        }
        (re, im)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.order,
            "coeffs": self.coeffs.iter().map(rat_string).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let order = v
            .get("order")
            .and_then(|o| o.as_u64())
            .ok_or_else(|| Error::Input("Cyclo: missing integer \"order\"".into()))?;
        let coeffs = v
            .get("coeffs")
            .and_then(|c| c.as_array())
            .ok_or_else(|| Error::Input("Cyclo: missing array \"coeffs\"".into()))?;
        let coeffs = coeffs
            .iter()
            .map(|c| {
                c.as_str()
                    .ok_or_else(|| Error::Input("Cyclo: coefficient must be a string".into()))
                    .and_then(parse_rat)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(order, coeffs)
    }
}

fn check_order(order: u64) -> Result<()> {
    let cap = order_cap();
    if order > cap {
        Err(Error::OrderCapExceeded { order, cap })
    } else if order == 0 {
        Err(Error::ZeroDenominator)
    } else {
        Ok(())
    }
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        let l = self.common_order(other);
        let a = self.embed_unchecked(l);
        let b = other.embed_unchecked(l);
        a.coeffs == b.coeffs
    }
}

impl Eq for Cyclo {}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let a = c.abs();
            if j == 0 {
                write!(f, "{}", fmt_rat(&a))?;
            } else {
                if !a.is_one() {
                    write!(f, "{}*", fmt_rat(&a))?;
                }
                if j == 1 {
                    write!(f, "z{}", self.order)?;
                } else {
                    write!(f, "z{}^{}", self.order, j)?;
                }
            }
            first = false;
        }
        Ok(())
    }
}

fn fmt_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

// Dense polynomial helpers over Q (low degree first), used by `inverse`.

fn trim(mut p: Vec<Rat>) -> Vec<Rat> {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

fn poly_deg(p: &[Rat]) -> usize {
    p.len() - 1
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    trim(out)
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len().max(b.len())];
    for (i, ai) in a.iter().enumerate() {
        out[i] += ai;
    }
    for (i, bi) in b.iter().enumerate() {
        out[i] -= bi;
    }
    trim(out)
}

fn poly_divrem(num: &[Rat], den: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let dd = poly_deg(den);
    let lead = den[dd].clone();
    let mut rem = num.to_vec();
    if poly_deg(&rem) < dd {
        return (vec![Rat::zero()], trim(rem));
    }
    let mut quot = vec![Rat::zero(); poly_deg(&rem) - dd + 1];
    for i in (0..quot.len()).rev() {
        let c = &rem[i + dd] / &lead;
        if c.is_zero() {
            continue;
        }
        quot[i] = c.clone();
        for (k, dk) in den.iter().enumerate() {
            let delta = &c * dk;
            rem[i + k] -= delta;
        }
    }
    (trim(quot), trim(rem))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials_match_known_values() {
        let p1: Vec<i64> = vec![-1, 1];
        let p2: Vec<i64> = vec![1, 1];
        let p4: Vec<i64> = vec![1, 0, 1];
        let p6: Vec<i64> = vec![1, -1, 1];
        let p12: Vec<i64> = vec![1, 0, -1, 0, 1];
        for (m, want) in [(1, p1), (2, p2), (4, p4), (6, p6), (12, p12)] {
            let got: Vec<i64> = cyclotomic_polynomial(m)
                .iter()
                .map(|c| c.to_i64().unwrap())
                .collect();
            assert_eq!(got, want, "Phi_{m}");
        }
    }

    #[test]
    fn root_of_unity_identity_cases() {
        assert_eq!(Cyclo::root_of_unity(0, 5).unwrap(), Cyclo::one());
        assert_eq!(Cyclo::root_of_unity(1, 2).unwrap(), Cyclo::from_int(-1));
        let i = Cyclo::root_of_unity(1, 4).unwrap();
        assert_eq!(i.mul(&i), Cyclo::from_int(-1));
    }

    #[test]
    fn root_of_unity_order_reduction() {
        // zeta_10^2 has multiplicative order 5.
        let z = Cyclo::root_of_unity(2, 10).unwrap();
        assert_eq!(z.order(), 5);
        assert_eq!(z, Cyclo::root_of_unity(1, 5).unwrap());
        assert_eq!(z.pow(5), Cyclo::one());
        assert_ne!(z.pow(4), Cyclo::one());
    }

    #[test]
    fn embedding_preserves_values() {
        let m1 = Cyclo::from_int(-1);
        assert_eq!(m1.embed(4).unwrap(), Cyclo::root_of_unity(2, 4).unwrap());
        assert_eq!(Cyclo::one().embed(12).unwrap(), Cyclo::one());
        // zeta_3 embeds into Q(zeta_6); cubing the image gives 1.
        let z3 = Cyclo::root_of_unity(1, 3).unwrap();
        let in6 = z3.embed(6).unwrap();
        assert_eq!(in6.order(), 6);
        assert_eq!(in6.pow(3), Cyclo::one());
        assert_eq!(in6, z3);
    }

    #[test]
    fn embed_rejects_non_multiple() {
        let z3 = Cyclo::root_of_unity(1, 3).unwrap();
        assert!(z3.embed(4).is_err());
    }

    #[test]
    fn roots_multiply_additively() {
        for n in 1u64..=24 {
            for a in 0..n {
                for b in 0..n {
                    let za = Cyclo::root_of_unity(a as i64, n).unwrap();
                    let zb = Cyclo::root_of_unity(b as i64, n).unwrap();
                    let zab = Cyclo::root_of_unity((a + b) as i64, n).unwrap();
                    assert_eq!(za.mul(&zb), zab, "a={a} b={b} n={n}");
                }
            }
        }
    }

    #[test]
    fn root_powers_to_one() {
        for n in 1u64..=24 {
            for a in 0..n {
                let z = Cyclo::root_of_unity(a as i64, n).unwrap();
                assert_eq!(z.pow(n), Cyclo::one());
            }
        }
    }

    #[test]
    fn inverse_of_zero_errors() {
        assert!(Cyclo::zero().inverse().is_err());
    }

    #[test]
    fn inverses_multiply_to_one() {
        let z = Cyclo::root_of_unity(1, 7).unwrap();
        let x = z.add(&Cyclo::from_int(2)); // 2 + zeta_7
        let inv = x.inverse().unwrap();
        assert_eq!(x.mul(&inv), Cyclo::one());
    }

    #[test]
    fn zeta_sum_is_minus_one() {
        // 1 + zeta_p + ... + zeta_p^{p-1} = 0 for prime p.
        for p in [2u64, 3, 5, 7, 11] {
            let mut s = Cyclo::zero();
            for k in 0..p {
                s = s.add(&Cyclo::root_of_unity(k as i64, p).unwrap());
            }
            assert!(s.is_zero(), "p={p}");
        }
    }

    #[test]
    fn order_cap_is_enforced() {
        let cap = order_cap();
        assert!(Cyclo::root_of_unity(1, cap + 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let z = Cyclo::root_of_unity(3, 8).unwrap();
        let x = z.add(&Cyclo::from_rat(rat(1, 2)));
        let back = Cyclo::from_json(&x.to_json()).unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert!(matches!(
            Cyclo::root_of_unity(1, 0),
            Err(crate::error::Error::ZeroDenominator)
        ));
    }

    #[test]
    fn polynomial_cache_survives_concurrent_access() {
        let handles: Vec<_> = (0..8)
            .map(|n| {
                std::thread::spawn(move || {
                    for m in 1..=40u64 {
                        let p = cyclotomic_polynomial(m);
                        assert_eq!(p.len() as u64, euler_phi(m) + 1);
                        let z = Cyclo::root_of_unity((n % m) as i64, m).unwrap();
                        assert_eq!(z.pow(m), Cyclo::one());
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
    }

    #[test]
    fn eval_f64_of_i() {
        let (re, im) = Cyclo::root_of_unity(1, 4).unwrap().eval_f64();
        assert!(re.abs() < 1e-12 && (im - 1.0).abs() < 1e-12);
    }
}
