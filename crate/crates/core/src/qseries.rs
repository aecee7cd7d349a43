//! Truncated formal series in `q` with rational exponents.
//!
//! A [`QSeries`] stores finitely many exact terms below a truncation order;
//! exponents at or above the truncation are unknown and discarded. The
//! truncation propagates pessimistically (as a minimum) through arithmetic,
//! so no operation ever reports a coefficient it cannot know.

use std::collections::BTreeMap;
use std::fmt;

use num::traits::{ToPrimitive, Zero};

use crate::error::Error;
use crate::numeric::{parse_rat, rat_string, Cyclo, Rat};
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct QSeries {
    truncation: Rat,
    terms: BTreeMap<Rat, Cyclo>,
}

impl QSeries {
    /// The empty (zero) series known up to `truncation`.
    pub fn zero(truncation: Rat) -> Self {
        QSeries {
            truncation,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(truncation: Rat, exponent: Rat, coeff: Cyclo) -> Self {
        let mut s = Self::zero(truncation);
        s.add_term(exponent, coeff);
        s
    }

    pub fn constant(truncation: Rat, coeff: Cyclo) -> Self {
        Self::monomial(truncation, Rat::zero(), coeff)
    }

    pub fn truncation(&self) -> &Rat {
        &self.truncation
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &Cyclo)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &Rat) -> Cyclo {
        self.terms.get(e).cloned().unwrap_or_else(Cyclo::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Accumulate one term, pruning zeros and anything at or above the
    /// truncation.
    pub fn add_term(&mut self, exponent: Rat, coeff: Cyclo) {
        if coeff.is_zero() || exponent >= self.truncation {
            return;
        }
        match self.terms.entry(exponent) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let truncation = self.truncation.clone().min(other.truncation.clone());
        let mut out = Self::zero(truncation);
        for (e, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        QSeries {
            truncation: self.truncation.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Cyclo) -> Self {
        let mut out = Self::zero(self.truncation.clone());
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.mul(k));
        }
        out
    }

    /// Exact convolution, truncated at the minimum of the two truncations.
    /// Requires all exponents to be nonnegative.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        for s in [self, other] {
            if let Some((e, _)) = s.terms.iter().next() {
                if e < &Rat::zero() {
                    return Err(Error::NegativeExponent(rat_string(e)));
                }
            }
        }
        let truncation = self.truncation.clone().min(other.truncation.clone());
        let mut out = Self::zero(truncation.clone());
        for (e1, c1) in &self.terms {
            if e1 >= &truncation {
                break;
            }
            for (e2, c2) in &other.terms {
                let e = e1 + e2;
                if e >= truncation {
                    break;
                }
                out.add_term(e, c1.mul(c2));
            }
        }
        Ok(out)
    }

    /// Multiply by `q^e`: every exponent and the truncation move up by `e`.
    pub fn shift(&self, e: &Rat) -> Self {
        QSeries {
            truncation: &self.truncation + e,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k + e, c.clone()))
                .collect(),
        }
    }

    /// Exact agreement of all terms with exponent below `upto`.
    pub fn eq_upto(&self, other: &Self, upto: &Rat) -> Result<bool> {
        for s in [self, other] {
            if upto > &s.truncation {
                return Err(Error::TruncationExceeded {
                    upto: rat_string(upto),
                    truncation: rat_string(&s.truncation),
                });
            }
        }
        let mine: Vec<_> = self.terms.range(..upto.clone()).collect();
        let theirs: Vec<_> = other.terms.range(..upto.clone()).collect();
        Ok(mine == theirs)
    }

    /// Double-precision evaluation at `q = exp(-2 pi tau_im)`; a display
    /// convenience, never used in verification.
    pub fn eval_float(&self, tau_im: &Rat) -> Result<(f64, f64)> {
        if tau_im <= &Rat::zero() {
            return Err(Error::NonpositiveTau(rat_string(tau_im)));
        }
        let t = tau_im.to_f64().unwrap();
        let mut re = 0.0;
        let mut im = 0.0;
        for (e, c) in &self.terms {
            let q_pow = (-2.0 * std::f64::consts::PI * t * e.to_f64().unwrap()).exp();
            let (cr, ci) = c.eval_f64();
            re += cr * q_pow;
            im += ci * q_pow;
        }
        Ok((re, im))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "truncation": rat_string(&self.truncation),
            "terms": self
                .terms
                .iter()
                .map(|(e, c)| serde_json::json!([rat_string(e), c.to_json()]))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let truncation = v
            .get("truncation")
            .and_then(|t| t.as_str())
            .ok_or_else(|| Error::Input("QSeries: missing string \"truncation\"".into()))?;
        let mut out = Self::zero(parse_rat(truncation)?);
        let terms = v
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| Error::Input("QSeries: missing array \"terms\"".into()))?;
        for t in terms {
            let pair = t
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Input("QSeries: term must be [exponent, coeff]".into()))?;
            let e = pair[0]
                .as_str()
                .ok_or_else(|| Error::Input("QSeries: exponent must be a string".into()))?;
            out.add_term(parse_rat(e)?, Cyclo::from_json(&pair[1])?);
        }
        Ok(out)
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O(q^{})", fmt_exp(&self.truncation));
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            let cs = c.to_string();
            let needs_parens = cs.contains(' ');
            if e.is_zero() {
                if needs_parens {
                    write!(f, "({cs})")?;
                } else {
                    write!(f, "{cs}")?;
                }
            } else {
                if needs_parens {
                    write!(f, "({cs})*")?;
                } else if cs != "1" {
                    write!(f, "{cs}*")?;
                }
                write!(f, "q^{}", fmt_exp(e))?;
            }
            first = false;
        }
        write!(f, " + O(q^{})", fmt_exp(&self.truncation))
    }
}

fn fmt_exp(e: &Rat) -> String {
    if num::traits::One::is_one(e.denom()) {
        e.numer().to_string()
    } else {
        format!("({}/{})", e.numer(), e.denom())
    }
}
