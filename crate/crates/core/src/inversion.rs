//! The reverse construction: from an admissible pair `(Q, f)` to a degree
//! triple and a Massey tensor whose coefficient series sum back to
//! `Theta_{Q,f}`.
//!
//! The steps are: rescale the form so `b > a` and `b > c`, read off the
//! (rational) degrees, rescale coordinates by a sufficiently divisible `N`
//! so that the degrees become integers and the kernel fits the index/period
//! lattices of the triple, and invert the fiber-sum map to obtain the
//! tensor. The final identity `sum_l MP(c)_l = Theta_{Q,f}` is then checked
//! exactly up to the requested order.

use num::bigint::BigInt;
use num::traits::{One, ToPrimitive, Zero};

use crate::error::Error;
use crate::geometry::{
    delta_projection, gamma_lattice, lambda_lattice, lambda0_lattice, necessary_condition, phi,
    quad_form_of, DegreeTriple, ModuliParams, QuadForm,
};
use crate::indeftheta::{check_f_condition, theta_indef, CosetFunction2};
use crate::lattice::{solve_congruences, Lattice2};
use crate::massey::{mp_coefficient, verify_double_products, MasseyTensor};
use crate::numeric::{common_denominator, is_integer, rat_int, rat_string, Cyclo, Rat};
use crate::qseries::QSeries;
use crate::Result;

/// Rescale `(a, b, c)` to `(x^2 a, x y b, y^2 c)` so that `b > a` and
/// `b > c`. If the inequalities already hold, `(x, y) = (1, 1)`; otherwise
/// `x/y` is the midpoint of the open interval `(c/b, b/a)`, which is
/// nonempty since `b^2 > ac`.
pub fn rescale_form(q: &QuadForm) -> (Rat, Rat, QuadForm) {
    if q.b > q.a && q.b > q.c {
        return (Rat::one(), Rat::one(), q.clone());
    }
    let t = (&q.c / &q.b + &q.b / &q.a) / rat_int(2);
    let x = Rat::from_integer(t.numer().clone());
    let y = Rat::from_integer(t.denom().clone());
    let form = QuadForm::new(&x * &x * &q.a, &x * &y * &q.b, &y * &y * &q.c)
        .expect("rescaling preserves admissibility");
    (x, y, form)
}

/// Degrees attached to a form with `b > a`, `b > c`:
/// `d1 = D/(b-c)`, `d2 = D/(b-a)`, `d = d1 d2 / b` with `D = b^2 - ac`.
/// The result reproduces the form and satisfies `d > d1`, `d > d2`,
/// `d1 + d2 - d > 0` as exact rationals.
pub fn degrees_from_form(q: &QuadForm) -> Result<(Rat, Rat, Rat)> {
    if !(q.b > q.a && q.b > q.c) {
        return Err(Error::Precondition(format!(
            "degrees_from_form requires b > a and b > c (got a={}, b={}, c={})",
            rat_string(&q.a),
            rat_string(&q.b),
            rat_string(&q.c),
        )));
    }
    let disc = q.discriminant();
    let d1 = &disc / (&q.b - &q.c);
    let d2 = &disc / (&q.b - &q.a);
    let d = &d1 * &d2 / &q.b;
    debug_assert!(d > d1 && d > d2 && &d1 + &d2 > d);
    Ok((d1, d2, d))
}

/// `Q_{d1,d2,d}` for a rational triple (used to check that the degree
/// dictionary inverts the form construction).
pub fn quad_form_of_rational(d1: &Rat, d2: &Rat, d: &Rat) -> Result<QuadForm> {
    QuadForm::new(d1 * (d - d1) / d, d1 * d2 / d, d2 * (d - d2) / d)
}

/// Outcome of the scale search: the multiplier and the integer triple.
#[derive(Clone, Debug)]
pub struct ScaleResult {
    pub n: u64,
    pub triple: DegreeTriple,
}

/// Find the least `N <= cap`, among multiples of the lcm of the degree
/// denominators, such that the rescaled triple `(N^2 d1, N^2 d2, N^2 d)`
/// is integral, satisfies the integrality criterion, and the kernel
/// lattices fit: `p12(Delta) + Lambda` inside `(1/N) T0` and
/// `(1/N) T_sup` inside `Gamma` of the rescaled triple.
pub fn find_scale_n(
    degrees: &(Rat, Rat, Rat),
    f_support: &Lattice2,
    f_period: &Lattice2,
    cap: u64,
) -> Result<ScaleResult> {
    let (d1, d2, d) = degrees;
    let lcm_den = common_denominator(&[d1.clone(), d2.clone(), d.clone()])
        .to_u64()
        .ok_or_else(|| Error::Input("degree denominators too large".into()))?;
    if lcm_den > cap {
        return Err(Error::ScaleNotFound {
            cap,
            last_tried: lcm_den,
            detail: format!("the denominator lcm {lcm_den} already exceeds the cap"),
        });
    }
    let mut last_detail = String::new();
    let mut last_tried = 0;
    let mut n = lcm_den;
    while n <= cap {
        last_tried = n;
        match scale_conditions(degrees, f_support, f_period, n) {
            Ok(triple) => return Ok(ScaleResult { n, triple }),
            Err(detail) => last_detail = detail,
        }
        n += lcm_den;
    }
    Err(Error::ScaleNotFound {
        cap,
        last_tried,
        detail: last_detail,
    })
}

fn scale_conditions(
    degrees: &(Rat, Rat, Rat),
    f_support: &Lattice2,
    f_period: &Lattice2,
    n: u64,
) -> std::result::Result<DegreeTriple, String> {
    let (d1, d2, d) = degrees;
    let n2 = Rat::from_integer(BigInt::from(n) * BigInt::from(n));
    let scaled = [d1 * &n2, d2 * &n2, d * &n2];
    if !scaled.iter().all(is_integer) {
        return Err(format!("N = {n}: N^2 degrees are not all integers"));
    }
    let as_u32 = |x: &Rat| x.to_integer().to_u32();
    let (Some(s1), Some(s2), Some(sd)) = (as_u32(&scaled[0]), as_u32(&scaled[1]), as_u32(&scaled[2]))
    else {
        return Err(format!("N = {n}: rescaled degrees exceed u32"));
    };
    let triple =
        DegreeTriple::new(s1, s2, sd).map_err(|e| format!("N = {n}: {e}"))?;
    if !necessary_condition(&triple) {
        return Err(format!(
            "N = {n}: integrality criterion fails for ({s1}, {s2}, {sd})"
        ));
    }
    let inv_n = Rat::new(BigInt::one(), BigInt::from(n));
    let target_period = f_period
        .scale(&inv_n)
        .map_err(|e| format!("N = {n}: {e}"))?;
    let kernel_periods = delta_projection(&triple)
        .map_err(|e| format!("N = {n}: {e}"))?
        .sum(&lambda_lattice(&triple));
    if !target_period.contains_lattice(&kernel_periods) {
        return Err(format!(
            "N = {n}: p12(Delta) + Lambda is not inside (1/N) * period"
        ));
    }
    let scaled_support = f_support
        .scale(&inv_n)
        .map_err(|e| format!("N = {n}: {e}"))?;
    if !gamma_lattice(&triple).contains_lattice(&scaled_support) {
        return Err(format!("N = {n}: (1/N) * support is not inside Gamma"));
    }
    Ok(triple)
}

/// Invert the fiber-sum map: the unique suitably periodic tensor `c` with
/// `f_c = f`, namely `c(i,j,k) = f(p12(phi^{-1}(i,j,k))) / g`.
///
/// Preconditions (each failure is named): the integrality criterion holds,
/// `f` is supported on `Gamma`, is periodic under `p12(Delta) + Lambda`,
/// and satisfies the sign-reversal condition for `Q_{d1,d2,d}`.
pub fn system_from_f(t: &DegreeTriple, f: &CosetFunction2) -> Result<MasseyTensor> {
    if !necessary_condition(t) {
        return Err(Error::Precondition(
            "system_from_f: integrality criterion fails for the triple".into(),
        ));
    }
    let gamma = gamma_lattice(t);
    if !gamma.contains_lattice(f.support()) {
        return Err(Error::Precondition(
            "system_from_f: support is not inside Gamma".into(),
        ));
    }
    let required_period = delta_projection(t)?.sum(&lambda_lattice(t));
    if !f.is_periodic_under(&required_period)? {
        return Err(Error::Precondition(
            "system_from_f: f is not periodic under p12(Delta) + Lambda".into(),
        ));
    }
    let q = quad_form_of(t);
    if !check_f_condition(&q, f) {
        return Err(Error::Precondition(
            "system_from_f: f violates the sign-reversal condition".into(),
        ));
    }

    let d0 = t.d0() as i64;
    let g = t.g() as i64;
    let g_inv = Cyclo::from_rat(Rat::new(BigInt::one(), BigInt::from(g)));
    let lambda0 = lambda0_lattice(t);
    let mut c = MasseyTensor::zero(*t);
    for lam in lambda0.coset_reps_in(f.support())? {
        let val = f.eval(&lam);
        if val.is_zero() {
            continue;
        }
        let entry = val.mul(&g_inv);
        // l-values with phi(lam, l) integral form a progression of step d0/g
        let d1r = rat_int(t.d1() as i64);
        let d2r = rat_int(t.d2() as i64);
        let dr = rat_int(t.d() as i64);
        let d0r = rat_int(d0);
        let prog = solve_congruences(&[
            (&d1r / &d0r, -(&d1r * &lam[0])),
            (&dr / &d0r, &d2r * &lam[1] - &d1r * &lam[0]),
            (&d2r / &d0r, &d2r * &lam[1]),
        ]);
        debug_assert!(!prog.is_empty(), "support point outside Gamma");
        for l in prog.members_in(&Rat::zero(), &rat_int(d0 - 1)) {
            let img = phi(t, &[lam[0].clone(), lam[1].clone(), l.clone()]);
            debug_assert!(img.iter().all(is_integer));
            let i = img[0].to_integer().to_i64().unwrap();
            let j = img[1].to_integer().to_i64().unwrap();
            let k = img[2].to_integer().to_i64().unwrap();
            debug_assert!(
                c.get(i, j, k).is_zero() || c.get(i, j, k) == entry,
                "inconsistent overwrite at ({i},{j},{k})"
            );
            c.set(i, j, k, entry.clone());
        }
    }
    Ok(c)
}

/// Full report of the inverse pipeline.
#[derive(Clone, Debug)]
pub struct Thm2Report {
    pub rescale: (Rat, Rat, QuadForm),
    pub degrees: (Rat, Rat, Rat),
    pub n: u64,
    pub triple: DegreeTriple,
    pub tensor: MasseyTensor,
    pub double_products: bool,
    pub total_mp: QSeries,
    pub theta: QSeries,
    pub equality: bool,
    pub order: Rat,
}

impl Thm2Report {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n,
            "degrees": {
                "d1": rat_string(&self.degrees.0),
                "d2": rat_string(&self.degrees.1),
                "d": rat_string(&self.degrees.2),
            },
            "double_products": self.double_products,
            "equality": self.equality,
            "order": rat_string(&self.order),
            "rescale": {
                "form": self.rescale.2.to_json(),
                "x": rat_string(&self.rescale.0),
                "y": rat_string(&self.rescale.1),
            },
            "series": self.total_mp.to_json(),
            "tensor": self.tensor.to_json(),
            "triple": self.triple.to_json(),
        })
    }
}

/// Run the whole inverse construction on `(Q, f)` and verify
/// `sum_l MP(c)_l = Theta_{Q,f}` exactly up to `trunc`.
pub fn thm2_pipeline(
    q: &QuadForm,
    f: &CosetFunction2,
    trunc: &Rat,
    cap: u64,
) -> Result<Thm2Report> {
    if !check_f_condition(q, f) {
        return Err(Error::Precondition(
            "thm2_pipeline: (Q, f) violates the sign-reversal condition".into(),
        ));
    }
    let (x, y, form) = rescale_form(q);
    let f1 = rescale_coords(f, &x, &y)?;
    let degrees = degrees_from_form(&form)?;
    let scale = find_scale_n(&degrees, f1.support(), f1.period(), cap)?;
    let n_rat = rat_int(scale.n as i64);
    let f2 = rescale_coords(&f1, &n_rat, &n_rat)?;
    let triple = scale.triple;
    let tensor = system_from_f(&triple, &f2)?;
    let params = ModuliParams::zero();
    let double_products = verify_double_products(&triple, &params, &tensor, trunc)?;
    let mut total = QSeries::zero(trunc.clone());
    for l in 0..triple.d0() as i64 {
        total = total.add(&mp_coefficient(&triple, &params, &tensor, l, trunc)?);
    }
    let theta = theta_indef(q, f, trunc)?;
    let equality = total == theta;
    Ok(Thm2Report {
        rescale: (x, y, form),
        degrees,
        n: scale.n,
        triple,
        tensor,
        double_products,
        total_mp: total,
        theta,
        equality,
        order: trunc.clone(),
    })
}

/// `f'(z) = f(sx z1, sy z2)` with the support and period carried along
/// (`Theta_{Q,f} = Theta_{Q',f'}` under the matching form rescale).
fn rescale_coords(f: &CosetFunction2, sx: &Rat, sy: &Rat) -> Result<CosetFunction2> {
    let inv = [
        [Rat::one() / sx, Rat::zero()],
        [Rat::zero(), Rat::one() / sy],
    ];
    let support = f.support().transform(&inv)?;
    let period = f.period().transform(&inv)?;
    let values: Vec<_> = f
        .nonzero_values()
        .map(|(p, v)| ([&p[0] / sx, &p[1] / sy], v.clone()))
        .collect();
    CosetFunction2::new(support, period, values)
}
