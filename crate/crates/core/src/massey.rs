//! Universal Massey systems and their identification with indefinite theta
//! series.
//!
//! A [`MasseyTensor`] is a collection `c = (c_{ijk})` indexed by
//! `Z/d1 x Z/d x Z/d2`, viewed as a `d1 Z x d Z x d2 Z`-periodic function on
//! `Q^3` supported on `Z^3` (extension by zero). The admissible tensors are
//! cut out by two periodicity relations and two sign relations; at zero
//! moduli parameters this is a finite exact linear system
//! ([`universal_massey_kernel_exact`]), while for general parameters the
//! kernel is solved from truncated theta-identity coefficients and
//! re-verified at a higher order ([`universal_massey_kernel_truncated`]).
//!
//! [`mp_coefficient`] computes the Massey product coefficient series through
//! the boundary-safe closed-cone sum, and [`verify_thm1`] checks it against
//! the indefinite theta series of the extracted kernel [`f_from_system`].

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::integer::Integer;
use num::traits::{One, ToPrimitive, Zero};

use crate::error::Error;
use crate::geometry::{
    delta_generators, double_product_args, gamma_lattice, gamma_slice, i1_set, i2_set,
    lambda0_lattice, necessary_condition, phi, phi_fiber_coset, phi_l, quad_form_of,
    sign_relation_operators, DegreeTriple, ModuliParams, QuadForm,
};
use crate::indeftheta::{check_f_condition, theta_indef, CosetFunction2};
use crate::lattice::{mat3_mul_vec, ArithProg, Lattice2, Point2, Point3};
use crate::linalg;
use crate::numeric::{is_integer, rat_int, rat_string, Cyclo, Rat};
use crate::qseries::QSeries;
use crate::Result;

/// Cap on the number of stored cosets when materializing a kernel function.
const COSET_CAP: u64 = 1_000_000;

/// `c = (c_{ijk})` on `Z/d1 x Z/d x Z/d2`, extended by zero off `Z^3`.
#[derive(Clone, Debug, PartialEq)]
pub struct MasseyTensor {
    degrees: DegreeTriple,
    entries: BTreeMap<(u32, u32, u32), Cyclo>,
}

impl MasseyTensor {
    pub fn zero(degrees: DegreeTriple) -> Self {
        MasseyTensor {
            degrees,
            entries: BTreeMap::new(),
        }
    }

    pub fn degrees(&self) -> &DegreeTriple {
        &self.degrees
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn num_nonzero(&self) -> usize {
        self.entries.len()
    }

    fn reduce_key(&self, i: i64, j: i64, k: i64) -> (u32, u32, u32) {
        (
            i.rem_euclid(self.degrees.d1() as i64) as u32,
            j.rem_euclid(self.degrees.d() as i64) as u32,
            k.rem_euclid(self.degrees.d2() as i64) as u32,
        )
    }

    pub fn get(&self, i: i64, j: i64, k: i64) -> Cyclo {
        self.entries
            .get(&self.reduce_key(i, j, k))
            .cloned()
            .unwrap_or_else(Cyclo::zero)
    }

    pub fn set(&mut self, i: i64, j: i64, k: i64, v: Cyclo) {
        let key = self.reduce_key(i, j, k);
        if v.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, v);
        }
    }

    pub fn add_to(&mut self, i: i64, j: i64, k: i64, v: &Cyclo) {
        let cur = self.get(i, j, k);
        self.set(i, j, k, cur.add(v));
    }

    /// Nonzero entries, keyed by reduced index.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (&(u32, u32, u32), &Cyclo)> {
        self.entries.iter()
    }

    /// Evaluation as a periodic function on `Q^3` supported on `Z^3`.
    pub fn eval_q3(&self, p: &Point3) -> Cyclo {
        if !p.iter().all(is_integer) {
            return Cyclo::zero();
        }
        let m = [
            self.degrees.d1() as i64,
            self.degrees.d() as i64,
            self.degrees.d2() as i64,
        ];
        let red: Vec<i64> = (0..3)
            .map(|t| {
                p[t].to_integer()
                    .mod_floor(&BigInt::from(m[t]))
                    .to_i64()
                    .unwrap()
            })
            .collect();
        self.get(red[0], red[1], red[2])
    }

    pub fn neg(&self) -> Self {
        MasseyTensor {
            degrees: self.degrees,
            entries: self.entries.iter().map(|(k, v)| (*k, v.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &Cyclo) -> Self {
        let mut out = Self::zero(self.degrees);
        if !s.is_zero() {
            for (k, v) in &self.entries {
                let prod = v.mul(s);
                if !prod.is_zero() {
                    out.entries.insert(*k, prod);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j, k), v) in &other.entries {
            out.add_to(i as i64, j as i64, k as i64, v);
        }
        out
    }

    /// Dense coefficient vector in the canonical index order
    /// `(i, j, k) -> (i * d + j) * d2 + k`.
    pub fn to_dense_vec(&self) -> Vec<Cyclo> {
        let t = &self.degrees;
        let mut out = vec![Cyclo::zero(); t.index_count()];
        for (&(i, j, k), v) in &self.entries {
            out[dense_index(t, i, j, k)] = v.clone();
        }
        out
    }

    pub fn from_dense_vec(degrees: DegreeTriple, v: &[Cyclo]) -> Self {
        let mut out = Self::zero(degrees);
        let mut idx = 0;
        for i in 0..degrees.d1() {
            for j in 0..degrees.d() {
                for k in 0..degrees.d2() {
                    if !v[idx].is_zero() {
                        out.entries.insert((i, j, k), v[idx].clone());
                    }
                    idx += 1;
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "degrees": self.degrees.to_json(),
            "entries": self
                .entries
                .iter()
                .map(|(&(i, j, k), v)| serde_json::json!([[i, j, k], v.to_json()]))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let degrees = DegreeTriple::from_json(
            v.get("degrees")
                .ok_or_else(|| Error::Input("MasseyTensor: missing \"degrees\"".into()))?,
        )?;
        let mut out = Self::zero(degrees);
        let entries = v
            .get("entries")
            .and_then(|e| e.as_array())
            .ok_or_else(|| Error::Input("MasseyTensor: missing array \"entries\"".into()))?;
        for e in entries {
            let pair = e
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| {
                    Error::Input("MasseyTensor: entry must be [[i,j,k], coeff]".into())
                })?;
            let idx = pair[0]
                .as_array()
                .filter(|p| p.len() == 3)
                .ok_or_else(|| Error::Input("MasseyTensor: index must be [i,j,k]".into()))?;
            let nums: Vec<i64> = idx
                .iter()
                .map(|x| {
                    x.as_i64().ok_or_else(|| {
                        Error::Input("MasseyTensor: index entries must be integers".into())
                    })
                })
                .collect::<Result<_>>()?;
            out.add_to(nums[0], nums[1], nums[2], &Cyclo::from_json(&pair[1])?);
        }
        Ok(out)
    }
}

fn dense_index(t: &DegreeTriple, i: u32, j: u32, k: u32) -> usize {
    ((i as usize) * t.d() as usize + j as usize) * t.d2() as usize + k as usize
}

/// Method used to produce a kernel basis.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelMethod {
    Exact,
    Truncated { solve_order: Rat },
}

/// A solved admissible-tensor space: basis plus how it was obtained.
#[derive(Clone, Debug)]
pub struct MasseyKernelReport {
    pub degrees: DegreeTriple,
    pub basis: Vec<MasseyTensor>,
    pub method: KernelMethod,
    /// Order up to which every basis element was re-verified against the
    /// theta identities (`None` for the exact combinatorial method).
    pub verified_order: Option<Rat>,
    /// Re-verification outcome per produced candidate vector, in solver
    /// order (`false` entries were dropped from the basis).
    pub checks: Vec<bool>,
    /// Candidate vectors dropped because re-verification failed.
    pub dropped: usize,
    /// Note set when the integrality criterion already forces the zero
    /// kernel.
    pub note: Option<String>,
}

impl MasseyKernelReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "basis": self.basis.iter().map(|b| b.to_json()).collect::<Vec<_>>(),
            "checks": self.checks,
            "degrees": self.degrees.to_json(),
            "dimension": self.basis.len(),
            "dropped": self.dropped,
            "method": match &self.method {
                KernelMethod::Exact => serde_json::json!("exact"),
                KernelMethod::Truncated { solve_order } => {
                    serde_json::json!({"truncated": rat_string(solve_order)})
                }
            },
            "note": self.note,
            "verified_order": self.verified_order.as_ref().map(rat_string),
        })
    }
}

/// Rows of the finite linear system: the two periodicity relations and the
/// two sign relations, with extension-by-zero bookkeeping (a relation whose
/// partner index leaves `Z^3` pins the surviving entry to zero).
fn exact_equations(t: &DegreeTriple) -> Vec<Vec<Cyclo>> {
    let n = t.index_count();
    let (m1, m2) = sign_relation_operators(t);
    let (s1, s2) = crate::geometry::periodicity_shifts(t);
    let mut rows: Vec<Vec<Cyclo>> = Vec::new();
    let mut push_row = |row: Vec<Cyclo>| {
        if row.iter().any(|x| !x.is_zero()) {
            rows.push(row);
        }
    };
    for i in 0..t.d1() as i64 {
        for j in 0..t.d() as i64 {
            for k in 0..t.d2() as i64 {
                let src = dense_index(t, i as u32, j as u32, k as u32);
                // periodicity: c[x] - c[x + phi(z)] = 0
                for shift in [&s1, &s2] {
                    debug_assert!(shift.iter().all(is_integer));
                    let ti = i + shift[0].to_integer().to_i64().unwrap();
                    let tj = j + shift[1].to_integer().to_i64().unwrap();
                    let tk = k + shift[2].to_integer().to_i64().unwrap();
                    let dst = reduced_dense_index(t, ti, tj, tk);
                    if dst != src {
                        let mut row = vec![Cyclo::zero(); n];
                        row[src] = Cyclo::one();
                        row[dst] = Cyclo::from_int(-1);
                        push_row(row);
                    }
                }
                // sign relations: c[x] + c[Mx] = 0, or c[x] = 0 when Mx
                // leaves Z^3
                for m in [&m1, &m2] {
                    let img = mat3_mul_vec(m, &[rat_int(i), rat_int(j), rat_int(k)]);
                    let mut row = vec![Cyclo::zero(); n];
                    row[src] = Cyclo::one();
                    if img.iter().all(is_integer) {
                        let dst = reduced_dense_index(
                            t,
                            img[0].to_integer().to_i64().unwrap(),
                            img[1].to_integer().to_i64().unwrap(),
                            img[2].to_integer().to_i64().unwrap(),
                        );
                        if dst != src {
                            row[dst] = Cyclo::one();
                        }
                        // dst == src gives c = -c, so the row stays c = 0
                    }
                    push_row(row);
                }
            }
        }
    }
    rows
}

fn reduced_dense_index(t: &DegreeTriple, i: i64, j: i64, k: i64) -> usize {
    dense_index(
        t,
        i.rem_euclid(t.d1() as i64) as u32,
        j.rem_euclid(t.d() as i64) as u32,
        k.rem_euclid(t.d2() as i64) as u32,
    )
}

/// Exact kernel of the zero-parameter Massey conditions via the finite
/// combinatorial system. When the integrality criterion fails the kernel is
/// zero and an empty basis is returned directly.
pub fn universal_massey_kernel_exact(t: &DegreeTriple) -> Result<MasseyKernelReport> {
    if !necessary_condition(t) {
        return Ok(MasseyKernelReport {
            degrees: *t,
            basis: Vec::new(),
            method: KernelMethod::Exact,
            verified_order: None,
            checks: Vec::new(),
            dropped: 0,
            note: Some("necessary condition fails; the kernel is zero".into()),
        });
    }
    let rows = exact_equations(t);
    let basis = linalg::nullspace(rows, t.index_count())?;
    Ok(MasseyKernelReport {
        degrees: *t,
        basis: basis
            .iter()
            .map(|v| MasseyTensor::from_dense_vec(*t, v))
            .collect(),
        method: KernelMethod::Exact,
        verified_order: None,
        checks: vec![true; basis.len()],
        dropped: 0,
        note: None,
    })
}

/// Accumulated theta series of one double-product side, bucketed by the
/// output index pair. Series are cached per progression since many index
/// pairs share one.
struct SideAccumulator<'a> {
    rho: &'a Rat,
    sigma: &'a Rat,
    p: &'a Rat,
    upto: &'a Rat,
    cache: BTreeMap<(Rat, Rat), QSeries>,
    buckets: BTreeMap<(i64, i64), QSeries>,
}

impl<'a> SideAccumulator<'a> {
    fn new(rho: &'a Rat, sigma: &'a Rat, p: &'a Rat, upto: &'a Rat) -> Self {
        SideAccumulator {
            rho,
            sigma,
            p,
            upto,
            cache: BTreeMap::new(),
            buckets: BTreeMap::new(),
        }
    }

    fn add(&mut self, bucket: (i64, i64), prog: &ArithProg, coeff: &Cyclo) -> Result<()> {
        let series = match cached_theta(&mut self.cache, prog, self.rho, self.sigma, self.p, self.upto)? {
            Some(s) => s,
            None => return Ok(()),
        };
        let scaled = series.scale(coeff);
        let entry = self
            .buckets
            .entry(bucket)
            .or_insert_with(|| QSeries::zero(self.upto.clone()));
        *entry = entry.add(&scaled);
        Ok(())
    }

    fn all_zero(&self) -> bool {
        self.buckets.values().all(|s| s.is_zero())
    }
}

fn cached_theta(
    cache: &mut BTreeMap<(Rat, Rat), QSeries>,
    prog: &ArithProg,
    rho: &Rat,
    sigma: &Rat,
    p: &Rat,
    trunc: &Rat,
) -> Result<Option<QSeries>> {
    match prog {
        ArithProg::Empty => Ok(None),
        ArithProg::Progression { step, offset } => {
            let key = (step.clone(), offset.clone());
            if let Some(s) = cache.get(&key) {
                return Ok(Some(s.clone()));
            }
            let s = crate::indeftheta::theta_coset_series(prog, rho, sigma, p, trunc)?;
            cache.insert(key, s.clone());
            Ok(Some(s))
        }
    }
}

/// Check the two families of double-product identities for `c` up to the
/// stated order: for every `(k, u)` the `I_1`-theta combination vanishes,
/// and for every `(i, v)` the `I_2`-theta combination vanishes.
pub fn verify_double_products(
    t: &DegreeTriple,
    params: &ModuliParams,
    c: &MasseyTensor,
    upto: &Rat,
) -> Result<bool> {
    if upto <= &Rat::zero() {
        return Err(Error::Precondition(
            "verification order must be positive".into(),
        ));
    }
    let ((rho1, sigma1, p1), (rho2, sigma2, p2)) = double_product_args(t, params);
    let g1 = t.g1() as i64;
    let g2 = t.g2() as i64;
    let dm1 = (t.d() - t.d1()) as i64;
    let dm2 = (t.d() - t.d2()) as i64;

    let mut side1 = SideAccumulator::new(&rho1, &sigma1, &p1, upto);
    for (&(i, j, k), v) in c.nonzero_entries() {
        let (i, j, k) = (i as i64, j as i64, k as i64);
        // I_1(u, i, j) is nonempty only for u = i + j (mod g1)
        let mut u = (i + j).rem_euclid(g1);
        while u < dm1 {
            side1.add((k, u), &i1_set(t, u, i, j), v)?;
            u += g1;
        }
    }
    if !side1.all_zero() {
        return Ok(false);
    }

    let mut side2 = SideAccumulator::new(&rho2, &sigma2, &p2, upto);
    for (&(i, j, k), v) in c.nonzero_entries() {
        let (i, j, k) = (i as i64, j as i64, k as i64);
        let mut u = (j + k).rem_euclid(g2);
        while u < dm2 {
            side2.add((i, u), &i2_set(t, u, j, k), v)?;
            u += g2;
        }
    }
    Ok(side2.all_zero())
}

/// Solve the Massey conditions at general parameters from the coefficients
/// of the truncated double-product series, then re-verify each basis vector
/// at a higher order. Vectors failing re-verification are dropped and
/// counted.
pub fn universal_massey_kernel_truncated(
    t: &DegreeTriple,
    params: &ModuliParams,
    solve_order: &Rat,
    verify_order: &Rat,
) -> Result<MasseyKernelReport> {
    if !(solve_order > &Rat::zero() && verify_order >= solve_order) {
        return Err(Error::Precondition(
            "require verify_order >= solve_order > 0".into(),
        ));
    }
    let n = t.index_count();
    let ((rho1, sigma1, p1), (rho2, sigma2, p2)) = double_product_args(t, params);
    let mut rows: Vec<Vec<Cyclo>> = Vec::new();

    // side 1: for each (k, u), sum_{ij} c_{ijk} theta_{I1(u,i,j)} = 0
    let mut cache1: BTreeMap<(Rat, Rat), QSeries> = BTreeMap::new();
    for k in 0..t.d2() as i64 {
        for u in 0..(t.d() - t.d1()) as i64 {
            let mut per_exponent: BTreeMap<Rat, Vec<Cyclo>> = BTreeMap::new();
            for i in 0..t.d1() as i64 {
                for j in 0..t.d() as i64 {
                    let prog = i1_set(t, u, i, j);
                    let Some(series) =
                        cached_theta(&mut cache1, &prog, &rho1, &sigma1, &p1, solve_order)?
                    else {
                        continue;
                    };
                    let col = dense_index(t, i as u32, j as u32, k as u32);
                    for (e, coeff) in series.terms() {
                        per_exponent
                            .entry(e.clone())
                            .or_insert_with(|| vec![Cyclo::zero(); n])[col] = coeff.clone();
                    }
                }
            }
            rows.extend(per_exponent.into_values());
        }
    }
    // side 2: for each (i, v), sum_{jk} c_{ijk} theta_{I2(v,j,k)} = 0
    let mut cache2: BTreeMap<(Rat, Rat), QSeries> = BTreeMap::new();
    for i in 0..t.d1() as i64 {
        for v in 0..(t.d() - t.d2()) as i64 {
            let mut per_exponent: BTreeMap<Rat, Vec<Cyclo>> = BTreeMap::new();
            for j in 0..t.d() as i64 {
                for k in 0..t.d2() as i64 {
                    let prog = i2_set(t, v, j, k);
                    let Some(series) =
                        cached_theta(&mut cache2, &prog, &rho2, &sigma2, &p2, solve_order)?
                    else {
                        continue;
                    };
                    let col = dense_index(t, i as u32, j as u32, k as u32);
                    for (e, coeff) in series.terms() {
                        per_exponent
                            .entry(e.clone())
                            .or_insert_with(|| vec![Cyclo::zero(); n])[col] = coeff.clone();
                    }
                }
            }
            rows.extend(per_exponent.into_values());
        }
    }

    let null = linalg::nullspace(rows, n)?;
    let mut basis = Vec::new();
    let mut checks = Vec::new();
    for v in &null {
        let tensor = MasseyTensor::from_dense_vec(*t, v);
        let ok = verify_double_products(t, params, &tensor, verify_order)?;
        checks.push(ok);
        if ok {
            basis.push(tensor);
        }
    }
    let dropped = checks.iter().filter(|ok| !**ok).count();
    Ok(MasseyKernelReport {
        degrees: *t,
        basis,
        method: KernelMethod::Truncated {
            solve_order: solve_order.clone(),
        },
        verified_order: Some(verify_order.clone()),
        checks,
        dropped,
        note: None,
    })
}

/// Summation pattern over the cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConePattern {
    /// `x1 x2 > 0` with weight `sign(x1)`; requires a generic shift.
    Open,
    /// Closed first quadrant minus open third quadrant; defined for all
    /// shifts (the continuous limit).
    Closed,
}

/// Signed sum over one fiber coset: terms
/// `sign * exp(2 pi i B(lambda, w)) q^{Q(lambda)/2 + B(lambda, v)}` over
/// `lambda` in the coset with `x = lambda + v` inside the chosen cone
/// pattern, truncated at `trunc`.
fn coset_cone_sum(
    q: &QuadForm,
    coset: &(Point2, Lattice2),
    v: &Point2,
    w: &Point2,
    trunc: &Rat,
    pattern: ConePattern,
) -> Result<QSeries> {
    let (offset, lattice) = coset;
    let mut out = QSeries::zero(trunc.clone());
    // exponent = (Q(x) - Q(v))/2 < trunc with x in the quadrant cones,
    // where Q(x) >= a x1^2 and Q(x) >= c x2^2.
    let qv = q.eval(v);
    let mut cap = rat_int(2) * trunc + &qv;
    if cap < Rat::zero() {
        cap = Rat::zero();
    }
    let b1 = Rat::from_integer(crate::numeric::sqrt_ceil(&(&cap / &q.a)));
    let b2 = Rat::from_integer(crate::numeric::sqrt_ceil(&(&cap / &q.c)));
    let lo = [-&b1 - &v[0], -&b2 - &v[1]];
    let hi = [&b1 - &v[0], &b2 - &v[1]];
    let zero = Rat::zero();
    for lam in lattice.coset_points_in_box(offset, &lo, &hi) {
        let x = [&lam[0] + &v[0], &lam[1] + &v[1]];
        let sign = match pattern {
            ConePattern::Open => {
                if &x[0] * &x[1] <= zero {
                    continue;
                }
                x[0] > zero
            }
            ConePattern::Closed => {
                if x[0] >= zero && x[1] >= zero {
                    true
                } else if x[0] < zero && x[1] < zero {
                    false
                } else {
                    continue;
                }
            }
        };
        let e = q.eval(&lam) / rat_int(2) + q.bilinear(&lam, v);
        if &e >= trunc {
            continue;
        }
        let coeff = Cyclo::root_of_unity_rat(&q.bilinear(&lam, w))?;
        out.add_term(e, if sign { coeff } else { coeff.neg() });
    }
    Ok(out)
}

/// The Fukaya triple-product series over one fiber
/// `Lambda^0(i,j,k,l) intersect (C - v)`, truncated at `trunc`.
/// For the `Open` pattern the shift must be generic: no fiber point may lie
/// on `lambda_1 = -v1` or `lambda_2 = -v2`.
pub fn triple_theta(
    t: &DegreeTriple,
    params: &ModuliParams,
    i: i64,
    j: i64,
    k: i64,
    l: i64,
    trunc: &Rat,
    pattern: ConePattern,
) -> Result<QSeries> {
    if trunc <= &Rat::zero() {
        return Err(Error::Precondition("truncation must be positive".into()));
    }
    let Some(coset) = phi_fiber_coset(t, i, j, k, l) else {
        return Ok(QSeries::zero(trunc.clone()));
    };
    if pattern == ConePattern::Open {
        for (axis, v) in [(0usize, &params.v1), (1usize, &params.v2)] {
            let step = coset.1.coord_step(axis);
            let gap = (-v - &coset.0[axis]) / &step;
            if is_integer(&gap) {
                return Err(Error::GenericityViolation(format!(
                    "fiber ({i},{j},{k},{l}) meets the boundary line on axis {axis}"
                )));
            }
        }
    }
    let q = quad_form_of(t);
    coset_cone_sum(&q, &coset, &params.v(), &params.w(), trunc, pattern)
}

/// The Massey product coefficient series `MP(c)_l`, computed through the
/// closed-cone sum (valid for every parameter choice) and shifted by
/// `Q(v)/2` so that its exponents are `Q(lambda + v)/2`. The returned
/// series is truncated at exactly `trunc`.
pub fn mp_coefficient(
    t: &DegreeTriple,
    params: &ModuliParams,
    c: &MasseyTensor,
    l: i64,
    trunc: &Rat,
) -> Result<QSeries> {
    if trunc <= &Rat::zero() {
        return Err(Error::Precondition("truncation must be positive".into()));
    }
    let q = quad_form_of(t);
    let v = params.v();
    let w = params.w();
    let qv_half = q.eval(&v) / rat_int(2);
    let pre_trunc = trunc - &qv_half;
    let mut total = QSeries::zero(pre_trunc.clone());
    for (&(i, j, k), coeff) in c.nonzero_entries() {
        let Some(coset) = phi_fiber_coset(t, i as i64, j as i64, k as i64, l) else {
            continue;
        };
        let part = coset_cone_sum(&q, &coset, &v, &w, &pre_trunc, ConePattern::Closed)?;
        total = total.add(&part.scale(coeff));
    }
    Ok(total.shift(&qv_half))
}

/// The kernel function `f_{c,l}(x) = c(phi_l(x - v)) exp(2 pi i B(x-v, w))`
/// as a doubly periodic function: the support is `Gamma` extended by the
/// coset translation, the period is the sublattice of `Lambda^0` on which
/// the exponential factor is trivial.
pub fn f_from_system(
    t: &DegreeTriple,
    params: &ModuliParams,
    c: &MasseyTensor,
    l: i64,
) -> Result<CosetFunction2> {
    let q = quad_form_of(t);
    let v = params.v();
    let w = params.w();
    let gamma = gamma_lattice(t);
    let (slice_offset, _) = gamma_slice(t, l);
    let translation = [&slice_offset[0] + &v[0], &slice_offset[1] + &v[1]];
    let support = gamma.sum_with_vector(&translation);
    let period = exponential_period(&q, &lambda0_lattice(t), &w);
    let index = period.index_in(&support)?;
    if index > BigInt::from(COSET_CAP) {
        return Err(Error::CosetCapExceeded {
            needed: index.to_string(),
            cap: COSET_CAP,
        });
    }
    let mut values = Vec::new();
    for r in period.coset_reps_in(&support)? {
        let shifted = [&r[0] - &v[0], &r[1] - &v[1]];
        let base = c.eval_q3(&phi_l(t, l, &shifted));
        if base.is_zero() {
            continue;
        }
        let twist = Cyclo::root_of_unity_rat(&q.bilinear(&shifted, &w))?;
        values.push((r, base.mul(&twist)));
    }
    CosetFunction2::new(support, period, values)
}

/// Largest sublattice of `base` on which `x -> exp(2 pi i B(x, w))` is
/// trivial.
fn exponential_period(q: &QuadForm, base: &Lattice2, w: &Point2) -> Lattice2 {
    if w[0].is_zero() && w[1].is_zero() {
        return base.clone();
    }
    let [g1, g2] = base.generators();
    let alpha = q.bilinear(&g1, w);
    let beta = q.bilinear(&g2, w);
    // sublattice {m g1 + n g2 : alpha m + beta n in Z}
    let den = crate::numeric::common_denominator(&[alpha.clone(), beta.clone()]);
    let denr = Rat::from_integer(den.clone());
    let a = (&alpha * &denr).to_integer();
    let b = (&beta * &denr).to_integer();
    let d = den;
    let ga = a.gcd(&d);
    // t1 = (d/ga, 0); t2 = (m0, n0) with the smallest n0 > 0 admitting a
    // solution of a m = -b n0 (mod d).
    let n0 = &ga / b.gcd(&ga);
    let rhs = -(&b * &n0) / &ga;
    let modulus = &d / &ga;
    let m0 = if modulus.is_one() {
        BigInt::zero()
    } else {
        let a_red = (&a / &ga).mod_floor(&modulus);
        let e = a_red.extended_gcd(&modulus);
        debug_assert!(e.gcd.is_one());
        (rhs.mod_floor(&modulus) * e.x.mod_floor(&modulus)).mod_floor(&modulus)
    };
    let t1 = [Rat::from_integer(&d / &ga), Rat::zero()];
    let t2 = [Rat::from_integer(m0), Rat::from_integer(n0)];
    let to_point = |tvec: &[Rat; 2]| {
        [
            &g1[0] * &tvec[0] + &g2[0] * &tvec[1],
            &g1[1] * &tvec[0] + &g2[1] * &tvec[1],
        ]
    };
    Lattice2::from_generators(&[to_point(&t1), to_point(&t2)])
        .expect("exponential period has rank 2")
}

/// `f_c = sum_l f_{c,l}`: the aggregated kernel of the full Massey product.
pub fn f_aggregate(
    t: &DegreeTriple,
    params: &ModuliParams,
    c: &MasseyTensor,
) -> Result<CosetFunction2> {
    let mut acc: Option<CosetFunction2> = None;
    for l in 0..t.d0() as i64 {
        let f = f_from_system(t, params, c, l)?;
        acc = Some(match acc {
            None => f,
            Some(prev) => prev.add(&f)?,
        });
    }
    Ok(acc.expect("d0 >= 1"))
}

/// Per-`l` outcome of the main identity check.
#[derive(Clone, Debug)]
pub struct Thm1Check {
    pub l: u32,
    pub series_match: bool,
    pub f_condition: bool,
}

/// Result of [`verify_thm1`].
#[derive(Clone, Debug)]
pub struct Thm1Report {
    pub degrees: DegreeTriple,
    pub double_products: bool,
    pub per_l: Vec<Thm1Check>,
    pub pass: bool,
}

impl Thm1Report {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "degrees": self.degrees.to_json(),
            "double_products": self.double_products,
            "pass": self.pass,
            "per_l": self
                .per_l
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "f_condition": c.f_condition,
                        "l": c.l,
                        "series_match": c.series_match,
                    })
                })
                .collect::<Vec<_>>(),
        })
    }
}

/// For every `l`: compare `MP(c)_l` against the indefinite theta series of
/// the extracted kernel `f_{c,l}` up to `trunc`, and check the sign-reversal
/// condition on `f_{c,l}`. Also records whether `c` satisfies the
/// double-product identities at order `trunc`.
pub fn verify_thm1(
    t: &DegreeTriple,
    params: &ModuliParams,
    c: &MasseyTensor,
    trunc: &Rat,
) -> Result<Thm1Report> {
    let q = quad_form_of(t);
    let double_products = verify_double_products(t, params, c, trunc)?;
    let mut per_l = Vec::new();
    for l in 0..t.d0() as i64 {
        let mp = mp_coefficient(t, params, c, l, trunc)?;
        let f = f_from_system(t, params, c, l)?;
        let theta = theta_indef(&q, &f, trunc)?;
        per_l.push(Thm1Check {
            l: l as u32,
            series_match: mp == theta,
            f_condition: check_f_condition(&q, &f),
        });
    }
    let pass = double_products && per_l.iter().all(|c| c.series_match && c.f_condition);
    Ok(Thm1Report {
        degrees: *t,
        double_products,
        per_l,
        pass,
    })
}

/// Restrict a spanned tensor space to the subspace additionally periodic
/// under the translation `(d0/g) phi(e3)` (the extra periodicity needed for
/// the inverse construction). The two shift periodicities are already part
/// of every admissible kernel.
pub fn delta_periodic_subspace(
    t: &DegreeTriple,
    basis: &[MasseyTensor],
) -> Result<Vec<MasseyTensor>> {
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let [_, _, e3] = delta_generators(t)?;
    let shift = phi(t, &e3);
    debug_assert!(shift.iter().all(is_integer));
    let si = shift[0].to_integer().to_i64().unwrap();
    let sj = shift[1].to_integer().to_i64().unwrap();
    let sk = shift[2].to_integer().to_i64().unwrap();
    // rows over combination coefficients: for every index y,
    // sum_t a_t (basis_t(y) - basis_t(y + shift)) = 0
    let mut rows = Vec::new();
    for i in 0..t.d1() as i64 {
        for j in 0..t.d() as i64 {
            for k in 0..t.d2() as i64 {
                let row: Vec<Cyclo> = basis
                    .iter()
                    .map(|b| b.get(i, j, k).sub(&b.get(i + si, j + sj, k + sk)))
                    .collect();
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    if rows.is_empty() {
        return Ok(basis.to_vec());
    }
    let combos = linalg::nullspace(rows, basis.len())?;
    let mut out = Vec::new();
    for combo in combos {
        let mut acc = MasseyTensor::zero(*t);
        for (coeff, b) in combo.iter().zip(basis.iter()) {
            acc = acc.add(&b.scale(coeff));
        }
        out.push(acc);
    }
    Ok(out)
}
