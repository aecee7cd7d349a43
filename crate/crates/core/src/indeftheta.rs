//! Doubly periodic kernels and indefinite theta series.
//!
//! A [`CosetFunction2`] is a function on `Q^2` supported on a lattice and
//! periodic under a finite-index sublattice, stored through its values on
//! coset representatives. [`theta_indef`] sums `f(x) q^{Q(x)/2}` over the
//! closed first quadrant minus the open third quadrant; for kernels
//! satisfying the sign-reversal condition `f(Ax) = f(Bx) = -f(x)` this
//! equals every admissible shifted-cone sum and all line sums vanish.

use std::collections::BTreeMap;

use num::traits::{One, Signed, Zero};

use crate::error::Error;
use crate::geometry::QuadForm;
use crate::lattice::{mat2_mul_vec, ArithProg, Lattice2, Point2};
use crate::numeric::{parse_rat, rat_int, rat_string, sqrt_ceil, Cyclo, Rat};
use crate::qseries::QSeries;
use crate::Result;

/// A doubly periodic function: supported on `support`, periodic under
/// `period`, with finitely many stored values on coset representatives.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetFunction2 {
    support: Lattice2,
    period: Lattice2,
    values: BTreeMap<(Rat, Rat), Cyclo>,
}

impl CosetFunction2 {
    /// Build from any list of `(point, value)` pairs; points are reduced to
    /// canonical representatives modulo the period and values at the same
    /// representative accumulate.
    pub fn new(
        support: Lattice2,
        period: Lattice2,
        values: impl IntoIterator<Item = (Point2, Cyclo)>,
    ) -> Result<Self> {
        if !support.contains_lattice(&period) {
            return Err(Error::LatticeInclusion(
                "the period must be a sublattice of the support".into(),
            ));
        }
        let mut f = CosetFunction2 {
            support,
            period,
            values: BTreeMap::new(),
        };
        for (p, v) in values {
            if !f.support.member(&p) {
                return Err(Error::Input(format!(
                    "value point ({}, {}) lies outside the support lattice",
                    rat_string(&p[0]),
                    rat_string(&p[1]),
                )));
            }
            f.accumulate(&p, v);
        }
        Ok(f)
    }

    pub fn zero_function(support: Lattice2, period: Lattice2) -> Result<Self> {
        Self::new(support, period, [])
    }

    fn accumulate(&mut self, p: &Point2, v: Cyclo) {
        if v.is_zero() {
            return;
        }
        let rep = self.period.canonical_rep(p);
        let key = (rep[0].clone(), rep[1].clone());
        match self.values.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&v);
                if sum.is_zero() {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
    }

    pub fn support(&self) -> &Lattice2 {
        &self.support
    }

    pub fn period(&self) -> &Lattice2 {
        &self.period
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Stored nonzero values, keyed by canonical coset representative.
    pub fn nonzero_values(&self) -> impl Iterator<Item = (Point2, &Cyclo)> {
        self.values
            .iter()
            .map(|((a, b), v)| ([a.clone(), b.clone()], v))
    }

    pub fn eval(&self, x: &Point2) -> Cyclo {
        if !self.support.member(x) {
            return Cyclo::zero();
        }
        let [a, b] = self.period.canonical_rep(x);
        self.values.get(&(a, b)).cloned().unwrap_or_else(Cyclo::zero)
    }

    pub fn neg(&self) -> Self {
        CosetFunction2 {
            support: self.support.clone(),
            period: self.period.clone(),
            values: self
                .values
                .iter()
                .map(|(k, v)| (k.clone(), v.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, k: &Cyclo) -> Self {
        let mut values = BTreeMap::new();
        if !k.is_zero() {
            for (key, v) in &self.values {
                values.insert(key.clone(), v.mul(k));
            }
        }
        CosetFunction2 {
            support: self.support.clone(),
            period: self.period.clone(),
            values,
        }
    }

    /// Pointwise sum; the result lives on the lattice sum of the supports
    /// with the intersection of the periods.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let support = self.support.sum(&other.support);
        let period = self.period.intersect(&other.period);
        let mut out = Self::zero_function(support.clone(), period.clone())?;
        for rep in period.coset_reps_in(&support)? {
            let v = self.eval(&rep).add(&other.eval(&rep));
            out.accumulate(&rep, v);
        }
        Ok(out)
    }

    /// True iff every vector of `w` is a period of this function.
    pub fn is_periodic_under(&self, w: &Lattice2) -> Result<bool> {
        if self.is_zero() {
            return Ok(true);
        }
        for gen in w.generators() {
            if !self.support.member(&gen) {
                return Ok(false);
            }
        }
        let reps = self.period.coset_reps_in(&self.support)?;
        for gen in w.generators() {
            for r in &reps {
                let shifted = [&r[0] + &gen[0], &r[1] + &gen[1]];
                if self.eval(&shifted) != self.eval(r) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "period": self.period.to_json(),
            "support": self.support.to_json(),
            "values": self
                .values
                .iter()
                .map(|((a, b), v)| {
                    serde_json::json!([[rat_string(a), rat_string(b)], v.to_json()])
                })
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let support = Lattice2::from_json(
            v.get("support")
                .ok_or_else(|| Error::Input("CosetFunction2: missing \"support\"".into()))?,
        )?;
        let period = Lattice2::from_json(
            v.get("period")
                .ok_or_else(|| Error::Input("CosetFunction2: missing \"period\"".into()))?,
        )?;
        let raw = v
            .get("values")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Input("CosetFunction2: missing array \"values\"".into()))?;
        let mut values = Vec::new();
        for entry in raw {
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Input("CosetFunction2: value must be [point, coeff]".into()))?;
            let pt = pair[0]
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Input("CosetFunction2: point must be [x, y]".into()))?;
            let x = pt[0]
                .as_str()
                .ok_or_else(|| Error::Input("CosetFunction2: coordinates must be strings".into()))?;
            let y = pt[1]
                .as_str()
                .ok_or_else(|| Error::Input("CosetFunction2: coordinates must be strings".into()))?;
            values.push(([parse_rat(x)?, parse_rat(y)?], Cyclo::from_json(&pair[1])?));
        }
        Self::new(support, period, values)
    }
}

/// Decide `f(Ax) = f(Bx) = -f(x)` for all `x` by checking representatives
/// of `(S + AS + BS) / (P and AP and BP)`, where `S`/`P` are the support and
/// period of `f`. All six lattices are commensurable because `A` and `B`
/// are rational involutions.
pub fn check_f_condition(q: &QuadForm, f: &CosetFunction2) -> bool {
    let (a, b) = q.matrices();
    let s = f.support();
    let p = f.period();
    let sa = s.transform(&a).expect("A is invertible");
    let sb = s.transform(&b).expect("B is invertible");
    let big_support = s.sum(&sa).sum(&sb);
    let pa = p.transform(&a).expect("A is invertible");
    let pb = p.transform(&b).expect("B is invertible");
    let small_period = p.intersect(&pa).intersect(&pb);
    let reps = small_period
        .coset_reps_in(&big_support)
        .expect("intersection is a sublattice of the sum");
    for x in reps {
        let minus = f.eval(&x).neg();
        if f.eval(&mat2_mul_vec(&a, &x)) != minus || f.eval(&mat2_mul_vec(&b, &x)) != minus {
            return false;
        }
    }
    true
}

/// Antisymmetrize the indicator of `seed` over the group generated by the
/// two involutions of `q`: walk the orbit of the seed class assigning
/// alternating signs along `A`- and `B`-steps. When the walk forces both
/// signs on one class the antisymmetrization collapses and the zero
/// function is returned. Both lattices must be stable under `A` and `B`.
pub fn orbit_antisymmetrize(
    q: &QuadForm,
    support: Lattice2,
    period: Lattice2,
    seed: Point2,
) -> Result<CosetFunction2> {
    let (a, b) = q.matrices();
    for (name, m) in [("A", &a), ("B", &b)] {
        for lat in [&support, &period] {
            if &lat.transform(m)? != lat {
                return Err(Error::Precondition(format!(
                    "orbit_antisymmetrize: the lattice is not {name}-stable"
                )));
            }
        }
    }
    if !support.member(&seed) {
        return Err(Error::Input(
            "orbit_antisymmetrize: seed lies outside the support".into(),
        ));
    }
    let key = |p: &Point2| {
        let r = period.canonical_rep(p);
        (r[0].clone(), r[1].clone())
    };
    let mut signs: BTreeMap<(Rat, Rat), bool> = BTreeMap::new();
    let mut queue = vec![(seed.clone(), true)];
    signs.insert(key(&seed), true);
    while let Some((x, sign)) = queue.pop() {
        for m in [&a, &b] {
            let y = mat2_mul_vec(m, &x);
            let k = key(&y);
            match signs.get(&k) {
                Some(&s) if s == !sign => continue,
                Some(_) => {
                    // the class is forced to carry both signs
                    return CosetFunction2::zero_function(support, period);
                }
                None => {
                    signs.insert(k, !sign);
                    queue.push((y, !sign));
                }
            }
        }
    }
    let one = Cyclo::one();
    let values = signs
        .into_iter()
        .map(|((x, y), s)| ([x, y], if s { one.clone() } else { one.neg() }));
    CosetFunction2::new(support, period, values)
}

fn require_positive(t: &Rat, what: &str) -> Result<()> {
    if t > &Rat::zero() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{what} must be positive (got {})",
            rat_string(t)
        )))
    }
}

/// Bounding box for `Q(x)/2 < trunc` on the union of the two quadrant
/// cones: there `Q(x) >= a x1^2` and `Q(x) >= c x2^2`, so
/// `|x1| <= sqrt(2T/a)` and `|x2| <= sqrt(2T/c)`.
fn quadrant_box(q: &QuadForm, trunc: &Rat) -> (Point2, Point2) {
    let two_t = rat_int(2) * trunc;
    let b1 = Rat::from_integer(sqrt_ceil(&(&two_t / &q.a)));
    let b2 = Rat::from_integer(sqrt_ceil(&(&two_t / &q.c)));
    ([-&b1, -&b2], [b1, b2])
}

/// The indefinite theta series
/// `(sum_{m>=0,n>=0} - sum_{m<0,n<0}) f(m,n) q^{Q(m,n)/2}`, truncated at
/// exponent `trunc`.
pub fn theta_indef(q: &QuadForm, f: &CosetFunction2, trunc: &Rat) -> Result<QSeries> {
    require_positive(trunc, "truncation")?;
    let mut out = QSeries::zero(trunc.clone());
    let (lo, hi) = quadrant_box(q, trunc);
    let zero = Rat::zero();
    for x in f
        .support()
        .coset_points_in_box(&[zero.clone(), zero.clone()], &lo, &hi)
    {
        let plus = x[0] >= zero && x[1] >= zero;
        let minus = x[0] < zero && x[1] < zero;
        if !plus && !minus {
            continue;
        }
        let e = q.eval(&x) / rat_int(2);
        if &e >= trunc {
            continue;
        }
        let v = f.eval(&x);
        if v.is_zero() {
            continue;
        }
        out.add_term(e, if plus { v } else { v.neg() });
    }
    Ok(out)
}

/// The shifted-cone sum
/// `sum_{(m+c1)(n+c2)>0} sign(m+c1) f(m,n) q^{Q(m,n)/2}`.
/// The shift must avoid the support: no lattice line `x1 = -c1` or
/// `x2 = -c2` may meet it.
pub fn theta_indef_shifted(
    q: &QuadForm,
    f: &CosetFunction2,
    c1: &Rat,
    c2: &Rat,
    trunc: &Rat,
) -> Result<QSeries> {
    require_positive(trunc, "truncation")?;
    for (axis, name, c) in [(0usize, "x1", c1), (1usize, "x2", c2)] {
        if f.support().line_points(axis, &-c).is_some() {
            return Err(Error::DegenerateShift {
                axis: name,
                value: rat_string(&-c),
            });
        }
    }
    // For y = x + c inside the cone pair, Q(x) >= a y1^2 + c y2^2
    // - 2K(|y1| + |y2|) + Q(c) with K = max(a|c1| + b|c2|, b|c1| + c|c2|);
    // minimizing one square bounds the other once Q(x)/2 < trunc.
    let shift = [c1.clone(), c2.clone()];
    let qc = q.eval(&shift);
    let k1 = &q.a * c1.abs() + &q.b * c2.abs();
    let k2 = &q.b * c1.abs() + &q.c * c2.abs();
    let k = if k1 > k2 { k1 } else { k2 };
    let two_t = rat_int(2) * trunc;
    let upper = |lead: &Rat, other: &Rat| -> Rat {
        let mut c0 = &two_t - &qc + &k * &k / other;
        if c0 < Rat::zero() {
            c0 = Rat::zero();
        }
        let disc = &k * &k + lead * &c0;
        (&k + Rat::from_integer(sqrt_ceil(&disc))) / lead + Rat::one()
    };
    let y1_max = upper(&q.a, &q.c);
    let y2_max = upper(&q.c, &q.a);
    let lo = [-c1 - &y1_max, -c2 - &y2_max];
    let hi = [-c1 + &y1_max, -c2 + &y2_max];
    let zero = Rat::zero();
    let mut out = QSeries::zero(trunc.clone());
    for x in f
        .support()
        .coset_points_in_box(&[zero.clone(), zero.clone()], &lo, &hi)
    {
        let y1 = &x[0] + c1;
        let y2 = &x[1] + c2;
        if (&y1 * &y2) <= zero {
            continue;
        }
        let e = q.eval(&x) / rat_int(2);
        if &e >= trunc {
            continue;
        }
        let v = f.eval(&x);
        if v.is_zero() {
            continue;
        }
        out.add_term(e, if y1 > zero { v } else { v.neg() });
    }
    Ok(out)
}

/// Sum of `f(x) q^{Q(x)/2}` over the line `x[axis] = a`, truncated at
/// `trunc`. Vanishes identically (up to any order) exactly when `f`
/// satisfies the sign-reversal condition.
pub fn line_sum(
    q: &QuadForm,
    f: &CosetFunction2,
    axis: usize,
    a: &Rat,
    trunc: &Rat,
) -> Result<QSeries> {
    require_positive(trunc, "truncation")?;
    let mut out = QSeries::zero(trunc.clone());
    let Some((base, dir)) = f.support().line_points(axis, a) else {
        return Ok(out);
    };
    // exponent(k) = (Q(dir) k^2 + 2 B(base, dir) k + Q(base)) / 2
    let a2 = q.eval(&dir);
    let a1 = q.bilinear(&base, &dir);
    let a0 = q.eval(&base);
    let c0 = rat_int(2) * trunc + a0.abs();
    let disc = &a1 * &a1 + &a2 * &c0;
    let bound = (a1.abs() + Rat::from_integer(sqrt_ceil(&disc))) / &a2 + Rat::one();
    let mut k = -bound.floor();
    let k_hi = bound.floor();
    while k <= k_hi {
        let x = [&base[0] + &dir[0] * &k, &base[1] + &dir[1] * &k];
        let e = q.eval(&x) / rat_int(2);
        if &e < trunc {
            out.add_term(e, f.eval(&x));
        }
        k += Rat::one();
    }
    Ok(out)
}

/// `theta_I(p(rho tau + sigma), p tau)` as a q-series: terms
/// `exp(2 pi i p m sigma) q^{p m^2/2 + p m rho}` over `m` in the
/// progression `I`.
pub fn theta_coset_series(
    i_set: &ArithProg,
    rho: &Rat,
    sigma: &Rat,
    p: &Rat,
    trunc: &Rat,
) -> Result<QSeries> {
    require_positive(p, "theta scale p")?;
    let mut out = QSeries::zero(trunc.clone());
    if i_set.is_empty() {
        return Ok(out);
    }
    // exponent(m) = (p/2)(m + rho)^2 - p rho^2 / 2
    let head = p * rho * rho / rat_int(2);
    let mut cap = trunc + &head;
    if cap < Rat::zero() {
        cap = Rat::zero();
    }
    let radius = Rat::from_integer(sqrt_ceil(&(rat_int(2) * &cap / p))) + Rat::one();
    for m in i_set.members_in(&(-rho - &radius), &(-rho + &radius)) {
        let e = p * &m * &m / rat_int(2) + p * &m * rho;
        if &e >= trunc {
            continue;
        }
        let coeff = Cyclo::root_of_unity_rat(&(p * &m * sigma))?;
        out.add_term(e, coeff);
    }
    Ok(out)
}
