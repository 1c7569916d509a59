//! Exact fixed-precision arithmetic in `Q_p`.
//!
//! A [`PadicNumber`] is `p^v * u` where `u` is either an exact integer
//! mantissa (when the value is known exactly, e.g. it was built from an
//! integer and only ring operations touched it) or a unit residue mod
//! `p^N`. Subtraction that cancels every tracked digit produces a
//! "zero mod p^a" form, so valuations of computed differences are always
//! honest lower bounds. Norms and distances are [`Val`]s -- integer
//! exponents `w` denoting `p^(-w)` -- never floats.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// An ultrametric norm/distance value `p^(-w)`, or zero (`w = +inf`).
///
/// Ordered by the *norm* it denotes: `Val::Infinite` (norm 0) is the
/// smallest element and `Finite(w)` grows as `w` decreases, so `max()`
/// over a collection is the sup of the norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Val {
    Finite(i64),
    Infinite,
}

impl Val {
    /// Exponent, if finite.
    pub fn exponent(self) -> Option<i64> {
        match self {
            Val::Finite(w) => Some(w),
            Val::Infinite => None,
        }
    }

    /// True when the denoted norm is `<= p^(-w)`, i.e. the exponent is at
    /// least `w`.
    pub fn at_most(self, w: i64) -> bool {
        match self {
            Val::Finite(e) => e >= w,
            Val::Infinite => true,
        }
    }


    pub fn is_finite(self) -> bool {
        matches!(self, Val::Finite(_))
    }
}

/// Product of the denoted norms: exponents add.
impl std::ops::Mul for Val {
    type Output = Val;

    #[allow(clippy::suspicious_arithmetic_impl)] // p^-a * p^-b = p^-(a+b)
    fn mul(self, other: Val) -> Val {
        match (self, other) {
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a + b),
            _ => Val::Infinite,
        }
    }
}

impl Ord for Val {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Val::Infinite, Val::Infinite) => Ordering::Equal,
            (Val::Infinite, Val::Finite(_)) => Ordering::Less,
            (Val::Finite(_), Val::Infinite) => Ordering::Greater,
            // smaller exponent = larger norm
            (Val::Finite(a), Val::Finite(b)) => b.cmp(a),
        }
    }
}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(w) => write!(f, "p^-{w}"),
            Val::Infinite => write!(f, "0"),
        }
    }
}

/// `v_p(k!) = (k - digitsum_p(k)) / (p - 1)` (Legendre).
pub fn factorial_valuation(k: u64, p: u64) -> u64 {
    let mut digitsum = 0;
    let mut n = k;
    while n > 0 {
        digitsum += n % p;
        n /= p;
    }
    (k - digitsum) / (p - 1)
}

/// `v_p(k)` for a nonzero integer.
pub fn int_valuation(mut k: i128, p: u64) -> u32 {
    assert!(k != 0);
    let p = p as i128;
    let mut v = 0;
    while k % p == 0 {
        k /= p;
        v += 1;
    }
    v
}

fn pow_u128(p: u64, e: u32) -> u128 {
    (p as u128).pow(e)
}

/// Largest precision `N` with `p^N < 2^63`, so products of residues fit
/// in `u128` without overflow.
pub fn max_precision(p: u64) -> u32 {
    let mut n = 0;
    let mut acc: u128 = 1;
    while acc * (p as u128) < (1u128 << 63) {
        acc *= p as u128;
        n += 1;
    }
    n
}

fn inv_mod(a: u128, m: u128) -> u128 {
    // extended Euclid; m is a prime power and gcd(a, m) = 1
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert!(r == 1, "inv_mod of non-unit");
    t.rem_euclid(m as i128) as u128
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Form {
    /// Exact zero.
    Zero,
    /// Known to be `0 mod p^abs` with nothing beyond that.
    ZeroMod { abs: i64 },
    /// Exactly `p^val * mant`, `p` does not divide `mant`, `mant != 0`.
    /// `prec` is the precision to fall back to when exactness is lost.
    Exact { val: i64, mant: i128, prec: u32 },
    /// `p^val * unit + O(p^(val+prec))`, `0 < unit < p^prec`, `p` ∤ `unit`.
    Approx { val: i64, unit: u128, prec: u32 },
}

/// An element of `Q_p` at working precision.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicNumber {
    p: u64,
    form: Form,
}

impl PadicNumber {
    pub fn zero(p: u64) -> Self {
        PadicNumber { p, form: Form::Zero }
    }

    pub fn one(p: u64, prec: u32) -> Self {
        Self::from_integer(p, 1, prec)
    }

    /// Exact integer `k`, carrying `prec` as demotion precision.
    pub fn from_integer(p: u64, k: i64, prec: u32) -> Self {
        Self::from_i128(p, k as i128, prec)
    }

    pub fn from_i128(p: u64, k: i128, prec: u32) -> Self {
        assert!(prec >= 1 && prec <= max_precision(p), "precision out of range");
        if k == 0 {
            return Self::zero(p);
        }
        let v = int_valuation(k, p);
        let mant = k / (p as i128).pow(v);
        PadicNumber { p, form: Form::Exact { val: v as i64, mant, prec } }
    }

    /// Exact rational `num/den` when `den` is (up to sign and a power of
    /// `p`) equal to 1, otherwise the unit residue of the quotient.
    pub fn from_rational(p: u64, num: i64, den: i64, prec: u32) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        let n = Self::from_integer(p, num, prec);
        let d = Self::from_integer(p, den, prec);
        n.div(&d)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.form, Form::Zero)
    }

    /// True when nothing distinguishes the value from zero (exact zero or
    /// zero to working precision).
    pub fn is_zero_to_precision(&self) -> bool {
        matches!(self.form, Form::Zero | Form::ZeroMod { .. })
    }

    /// The valuation as a guaranteed lower bound: exact for unit forms,
    /// `Finite(abs)` for a value only known to vanish mod `p^abs`,
    /// `Infinite` for exact zero. Norm computations built on this report
    /// guaranteed upper bounds `p^(-w)`.
    pub fn val_lower(&self) -> Val {
        match &self.form {
            Form::Zero => Val::Infinite,
            Form::ZeroMod { abs } => Val::Finite(*abs),
            Form::Exact { val, .. } | Form::Approx { val, .. } => Val::Finite(*val),
        }
    }

    /// Valuation when it is exactly known.
    pub fn val_exact(&self) -> Option<Val> {
        match &self.form {
            Form::Zero => Some(Val::Infinite),
            Form::ZeroMod { .. } => None,
            Form::Exact { val, .. } | Form::Approx { val, .. } => Some(Val::Finite(*val)),
        }
    }

    /// Absolute precision: the value is known mod `p^abs`. `None` means
    /// exact.
    pub fn abs_precision(&self) -> Option<i64> {
        match &self.form {
            Form::Zero | Form::Exact { .. } => None,
            Form::ZeroMod { abs } => Some(*abs),
            Form::Approx { val, prec, .. } => Some(val + *prec as i64),
        }
    }

    /// Relative precision of the unit part, reported with results per the
    /// module contract. Exact values report their demotion precision.
    pub fn precision(&self) -> u32 {
        match &self.form {
            Form::Zero => 0,
            Form::ZeroMod { .. } => 0,
            Form::Exact { prec, .. } => *prec,
            Form::Approx { prec, .. } => *prec,
        }
    }

    fn demote(&self) -> Self {
        match &self.form {
            Form::Exact { val, mant, prec } => {
                let m = pow_u128(self.p, *prec);
                let unit = (*mant).rem_euclid(m as i128) as u128;
                debug_assert!(!unit.is_multiple_of(self.p as u128));
                PadicNumber { p: self.p, form: Form::Approx { val: *val, unit, prec: *prec } }
            }
            _ => self.clone(),
        }
    }

    /// Residue `x mod p^abs` (for `x` with `val >= 0`), as a `u128`,
    /// together with a validity flag when the tracked precision does not
    /// reach `abs`.
    pub fn residue_mod(&self, abs: u32) -> Result<u128> {
        let m = pow_u128(self.p, abs);
        match &self.form {
            Form::Zero => Ok(0),
            Form::ZeroMod { abs: a } => {
                if *a >= abs as i64 {
                    Ok(0)
                } else {
                    Err(Error::Precision(format!(
                        "value known only mod p^{a}, residue mod p^{abs} requested"
                    )))
                }
            }
            Form::Exact { val, mant, .. } => {
                if *val < 0 {
                    return Err(Error::Domain("negative valuation has no residue".into()));
                }
                let shifted = mant.rem_euclid(m as i128) as u128;
                let v = (*val).min(abs as i64) as u32;
                Ok(shifted * pow_u128(self.p, v) % m)
            }
            Form::Approx { val, unit, prec } => {
                if *val < 0 {
                    return Err(Error::Domain("negative valuation has no residue".into()));
                }
                if val + *prec as i64 >= abs as i64 {
                    let v = (*val).min(abs as i64) as u32;
                    Ok(unit % pow_u128(self.p, abs.saturating_sub(v)) * pow_u128(self.p, v) % m)
                } else {
                    Err(Error::Precision(format!(
                        "value known mod p^{}, residue mod p^{abs} requested",
                        val + *prec as i64
                    )))
                }
            }
        }
    }

    /// Forget digits beyond absolute precision `abs` (used to account for
    /// unknown series tails).
    pub fn truncate_abs(&self, abs: i64) -> Self {
        match &self.form {
            Form::Zero => PadicNumber { p: self.p, form: Form::ZeroMod { abs } },
            Form::ZeroMod { abs: a } => {
                PadicNumber { p: self.p, form: Form::ZeroMod { abs: (*a).min(abs) } }
            }
            Form::Exact { val, .. } | Form::Approx { val, .. } => {
                if *val >= abs {
                    return PadicNumber { p: self.p, form: Form::ZeroMod { abs } };
                }
                let keep = (abs - val) as u32;
                let x = self.demote();
                match x.form {
                    Form::Approx { val, unit, prec } => {
                        let prec = prec.min(keep);
                        let unit = unit % pow_u128(self.p, prec);
                        if unit == 0 {
                            PadicNumber { p: self.p, form: Form::ZeroMod { abs } }
                        } else {
                            PadicNumber { p: self.p, form: Form::Approx { val, unit, prec } }
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
    }

    fn check_same_prime(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::Domain(format!(
                "mismatched primes {} and {}",
                self.p, other.p
            )));
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        match &self.form {
            Form::Zero | Form::ZeroMod { .. } => self.clone(),
            Form::Exact { val, mant, prec } => PadicNumber {
                p: self.p,
                form: Form::Exact { val: *val, mant: -mant, prec: *prec },
            },
            Form::Approx { val, unit, prec } => {
                let m = pow_u128(self.p, *prec);
                PadicNumber {
                    p: self.p,
                    form: Form::Approx { val: *val, unit: m - unit, prec: *prec },
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        let p = self.p;
        match (&self.form, &other.form) {
            (Form::Zero, _) => Ok(other.clone()),
            (_, Form::Zero) => Ok(self.clone()),
            (Form::ZeroMod { abs }, _) => Ok(other.truncate_abs(*abs)),
            (_, Form::ZeroMod { abs }) => Ok(self.truncate_abs(*abs)),
            (
                Form::Exact { val: v1, mant: m1, prec: p1 },
                Form::Exact { val: v2, mant: m2, prec: p2 },
            ) => {
                let v = (*v1).min(*v2);
                let s1 = (v1 - v) as u32;
                let s2 = (v2 - v) as u32;
                let pb = p as i128;
                let t1 = pb.checked_pow(s1).and_then(|f| m1.checked_mul(f));
                let t2 = pb.checked_pow(s2).and_then(|f| m2.checked_mul(f));
                if let (Some(t1), Some(t2)) = (t1, t2) {
                    if let Some(sum) = t1.checked_add(t2) {
                        if sum == 0 {
                            return Ok(Self::zero(p));
                        }
                        let w = int_valuation(sum, p);
                        return Ok(PadicNumber {
                            p,
                            form: Form::Exact {
                                val: v + w as i64,
                                mant: sum / pb.pow(w),
                                prec: (*p1).min(*p2),
                            },
                        });
                    }
                }
                // mantissa overflow: fall back to residues
                self.demote().add(&other.demote())
            }
            _ => {
                let a = self.demote();
                let b = other.demote();
                let (Form::Approx { val: v1, unit: u1, prec: p1 },
                     Form::Approx { val: v2, unit: u2, prec: p2 }) = (&a.form, &b.form)
                else {
                    unreachable!()
                };
                let abs = (v1 + *p1 as i64).min(v2 + *p2 as i64);
                let v = (*v1).min(*v2);
                let width = (abs - v) as u32;
                if width == 0 {
                    return Ok(PadicNumber { p, form: Form::ZeroMod { abs } });
                }
                let m = pow_u128(p, width);
                let residue = |unit: &u128, vi: i64| -> u128 {
                    let shift = (vi - v) as u32;
                    if shift >= width {
                        0
                    } else {
                        unit % pow_u128(p, width - shift) * pow_u128(p, shift)
                    }
                };
                let r1 = residue(u1, *v1);
                let r2 = residue(u2, *v2);
                let s = (r1 + r2) % m;
                if s == 0 {
                    return Ok(PadicNumber { p, form: Form::ZeroMod { abs } });
                }
                let w = {
                    let mut s = s;
                    let mut w = 0u32;
                    while s.is_multiple_of(p as u128) {
                        s /= p as u128;
                        w += 1;
                    }
                    w
                };
                Ok(PadicNumber {
                    p,
                    form: Form::Approx {
                        val: v + w as i64,
                        unit: s / pow_u128(p, w),
                        prec: width - w,
                    },
                })
            }
        }
    }

    /// `self - other`. Identical representations subtract to exact zero:
    /// two bit-equal approximations denote the same tracked value.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self == other {
            return Ok(Self::zero(self.p));
        }
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        let p = self.p;
        match (&self.form, &other.form) {
            (Form::Zero, _) | (_, Form::Zero) => Ok(Self::zero(p)),
            (Form::ZeroMod { abs }, f) | (f, Form::ZeroMod { abs }) => {
                let shift = match f {
                    Form::ZeroMod { abs: b } => *b,
                    Form::Exact { val, .. } | Form::Approx { val, .. } => *val,
                    Form::Zero => unreachable!(),
                };
                Ok(PadicNumber { p, form: Form::ZeroMod { abs: abs + shift } })
            }
            (
                Form::Exact { val: v1, mant: m1, prec: p1 },
                Form::Exact { val: v2, mant: m2, prec: p2 },
            ) => {
                if let Some(prod) = m1.checked_mul(*m2) {
                    Ok(PadicNumber {
                        p,
                        form: Form::Exact { val: v1 + v2, mant: prod, prec: (*p1).min(*p2) },
                    })
                } else {
                    self.demote().mul(&other.demote())
                }
            }
            _ => {
                let a = self.demote();
                let b = other.demote();
                let (Form::Approx { val: v1, unit: u1, prec: p1 },
                     Form::Approx { val: v2, unit: u2, prec: p2 }) = (&a.form, &b.form)
                else {
                    unreachable!()
                };
                let prec = (*p1).min(*p2);
                let m = pow_u128(p, prec);
                let unit = (u1 % m) * (u2 % m) % m;
                Ok(PadicNumber { p, form: Form::Approx { val: v1 + v2, unit, prec } })
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        let p = self.p;
        match &other.form {
            Form::Zero => Err(Error::Domain("division by zero".into())),
            Form::ZeroMod { .. } => Err(Error::Precision(
                "division by a value indistinguishable from zero".into(),
            )),
            Form::Exact { val: v2, mant: m2, prec: p2 } => match &self.form {
                Form::Zero => Ok(Self::zero(p)),
                Form::ZeroMod { abs } => {
                    Ok(PadicNumber { p, form: Form::ZeroMod { abs: abs - v2 } })
                }
                Form::Exact { val: v1, mant: m1, prec: p1 } => {
                    if m1 % m2 == 0 {
                        Ok(PadicNumber {
                            p,
                            form: Form::Exact {
                                val: v1 - v2,
                                mant: m1 / m2,
                                prec: (*p1).min(*p2),
                            },
                        })
                    } else {
                        self.demote().div(&other.demote())
                    }
                }
                Form::Approx { .. } => self.div(&other.demote()),
            },
            Form::Approx { val: v2, unit: u2, prec: p2 } => match &self.form {
                Form::Zero => Ok(Self::zero(p)),
                Form::ZeroMod { abs } => {
                    Ok(PadicNumber { p, form: Form::ZeroMod { abs: abs - v2 } })
                }
                Form::Exact { .. } => self.demote().div(other),
                Form::Approx { val: v1, unit: u1, prec: p1 } => {
                    let prec = (*p1).min(*p2);
                    let m = pow_u128(p, prec);
                    let unit = (u1 % m) * inv_mod(u2 % m, m) % m;
                    Ok(PadicNumber { p, form: Form::Approx { val: v1 - v2, unit, prec } })
                }
            },
        }
    }

    /// Multiply by `p^k` (exact valuation shift).
    pub fn shift(&self, k: i64) -> Self {
        match &self.form {
            Form::Zero => self.clone(),
            Form::ZeroMod { abs } => PadicNumber { p: self.p, form: Form::ZeroMod { abs: abs + k } },
            Form::Exact { val, mant, prec } => PadicNumber {
                p: self.p,
                form: Form::Exact { val: val + k, mant: *mant, prec: *prec },
            },
            Form::Approx { val, unit, prec } => PadicNumber {
                p: self.p,
                form: Form::Approx { val: val + k, unit: *unit, prec: *prec },
            },
        }
    }

    /// Agreement to absolute precision: `|self - other| <= p^(-abs)`.
    pub fn agrees_mod(&self, other: &Self, abs: i64) -> bool {
        match self.sub(other) {
            Ok(d) => d.val_lower().at_most(abs),
            Err(_) => false,
        }
    }

    /// The canonical integer representative mod `p^abs` for values in `Z_p`.
    pub fn table_value(&self, abs: u32) -> Result<u64> {
        Ok(self.residue_mod(abs)? as u64)
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            Form::Zero => write!(f, "0"),
            Form::ZeroMod { abs } => write!(f, "O({}^{})", self.p, abs),
            Form::Exact { val, mant, .. } => write!(f, "{}^{}*{}", self.p, val, mant),
            Form::Approx { val, unit, prec } => {
                write!(f, "{}^{}*{} + O({}^{})", self.p, val, unit, self.p, *val + *prec as i64)
            }
        }
    }
}

/// JSON form: `{p, precision, valuation, unit}` with the unit as a decimal
/// string. Zero-like values carry `valuation: null`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PadicJson {
    pub p: u64,
    pub precision: Option<u32>,
    pub valuation: Option<i64>,
    pub unit: String,
}

impl From<&PadicNumber> for PadicJson {
    fn from(x: &PadicNumber) -> Self {
        match &x.form {
            Form::Zero => PadicJson { p: x.p, precision: None, valuation: None, unit: "0".into() },
            Form::ZeroMod { abs } => {
                PadicJson { p: x.p, precision: Some((*abs).max(0) as u32), valuation: None, unit: "0".into() }
            }
            _ => {
                let d = x.demote();
                let Form::Approx { val, unit, prec } = d.form else { unreachable!() };
                PadicJson {
                    p: x.p,
                    precision: Some(prec),
                    valuation: Some(val),
                    unit: unit.to_string(),
                }
            }
        }
    }
}

impl TryFrom<&PadicJson> for PadicNumber {
    type Error = Error;

    fn try_from(j: &PadicJson) -> Result<Self> {
        match j.valuation {
            None => Ok(match j.precision {
                None => PadicNumber::zero(j.p),
                Some(a) => PadicNumber { p: j.p, form: Form::ZeroMod { abs: a as i64 } },
            }),
            Some(val) => {
                let prec = j.precision.unwrap_or(1);
                if prec == 0 || prec > max_precision(j.p) {
                    return Err(Error::Domain(format!("precision {prec} out of range")));
                }
                let unit: u128 = j
                    .unit
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad unit string {:?}", j.unit)))?;
                let unit = unit % pow_u128(j.p, prec);
                if unit == 0 || unit.is_multiple_of(j.p as u128) {
                    return Err(Error::Domain("unit must be coprime to p".into()));
                }
                Ok(PadicNumber { p: j.p, form: Form::Approx { val, unit, prec } })
            }
        }
    }
}

/// Convergence domain of `exp`: `v(x) >= 1` for odd `p`, `v(x) >= 2` for
/// `p = 2`.
pub fn exp_domain_valuation(p: u64) -> i64 {
    if p == 2 {
        2
    } else {
        1
    }
}

/// Truncated exponential series with rigorous precision tracking through
/// the factorial denominators.
pub fn exp_scalar(x: &PadicNumber) -> Result<PadicNumber> {
    let p = x.prime();
    let need = exp_domain_valuation(p);
    if !x.val_lower().at_most(need) {
        return Err(Error::Domain(format!(
            "exp requires v(x) >= {need}, got {}",
            x.val_lower()
        )));
    }
    if x.is_zero() {
        return Ok(PadicNumber::one(p, max_precision(p)));
    }
    let guard = match x.abs_precision() {
        Some(a) => a,
        None => x.val_lower().exponent().unwrap_or(1) + x.precision() as i64,
    };
    let mut sum = PadicNumber::one(p, x.precision().max(1));
    let mut term = PadicNumber::one(p, x.precision().max(1));
    for s in 1..10_000u64 {
        term = term.mul(x)?.div(&PadicNumber::from_i128(p, s as i128, max_precision(p)))?;
        match term.val_lower() {
            Val::Finite(w) if w < guard => {}
            _ => break,
        }
        sum = sum.add(&term)?;
    }
    Ok(sum)
}

/// Truncated logarithm series; requires `v(y - 1) >= 1`.
pub fn log_scalar(y: &PadicNumber) -> Result<PadicNumber> {
    let p = y.prime();
    let one = PadicNumber::one(p, y.precision().max(1));
    let u = y.sub(&one)?;
    if !u.val_lower().at_most(1) {
        return Err(Error::Domain(format!(
            "log requires v(y-1) >= 1, got {}",
            u.val_lower()
        )));
    }
    if u.is_zero() {
        return Ok(PadicNumber::zero(p));
    }
    let guard = match u.abs_precision() {
        Some(a) => a,
        None => u.val_lower().exponent().unwrap_or(1) + u.precision() as i64,
    };
    let mut sum = PadicNumber::zero(p);
    let mut upow = PadicNumber::one(p, u.precision().max(1));
    for k in 1..10_000u64 {
        upow = upow.mul(&u)?;
        let term = upow.div(&PadicNumber::from_i128(p, k as i128, max_precision(p)))?;
        if let Val::Finite(w) = term.val_lower() {
            if w >= guard {
                break;
            }
        } else {
            break;
        }
        if k % 2 == 1 {
            sum = sum.add(&term)?;
        } else {
            sum = sum.sub(&term)?;
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pd(k: i64) -> PadicNumber {
        PadicNumber::from_integer(3, k, 12)
    }

    #[test]
    fn add_identity_and_small_sum() {
        let x = pd(7);
        assert_eq!(PadicNumber::zero(3).add(&x).unwrap(), x);
        // (p=3) 1 + 2 -> valuation 1, unit 1
        let s = pd(1).add(&pd(2)).unwrap();
        assert_eq!(s.val_exact(), Some(Val::Finite(1)));
        assert_eq!(s, pd(3));
    }

    #[test]
    fn add_rational_thirds() {
        // (p=3, N=5) 1/3 + 2/3 -> 1 (valuation 0)
        let a = PadicNumber::from_rational(3, 1, 3, 5).unwrap();
        let b = PadicNumber::from_rational(3, 2, 3, 5).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.val_exact(), Some(Val::Finite(0)));
        assert!(s.agrees_mod(&PadicNumber::one(3, 5), 5));
    }

    #[test]
    fn mismatched_primes_rejected() {
        let a = PadicNumber::from_integer(3, 1, 8);
        let b = PadicNumber::from_integer(5, 1, 8);
        assert!(matches!(a.add(&b), Err(Error::Domain(_))));
    }

    #[test]
    fn factorial_valuation_examples() {
        assert_eq!(factorial_valuation(0, 3), 0);
        // p=3, k=9: multiples of 3 in 1..9 are 3,6,9 and 9 contributes twice
        assert_eq!(factorial_valuation(9, 3), 4);
        // 4! = 24 = 2^3 * 3
        assert_eq!(factorial_valuation(4, 2), 3);
    }

    #[test]
    fn factorial_valuation_matches_bruteforce() {
        for p in [2u64, 3, 5, 7] {
            let mut acc = 0u64;
            for k in 1..=200u64 {
                let mut n = k;
                while n % p == 0 {
                    acc += 1;
                    n /= p;
                }
                assert_eq!(factorial_valuation(k, p), acc, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn exp_log_trivial() {
        let e0 = exp_scalar(&PadicNumber::zero(3)).unwrap();
        assert!(e0.agrees_mod(&PadicNumber::one(3, 12), 12));
        let l1 = log_scalar(&PadicNumber::one(3, 12)).unwrap();
        assert!(l1.is_zero());
    }

    #[test]
    fn exp_log_round_trip_p3() {
        // p=3: log(exp(3)) = 3 mod 3^8 at N=10
        let x = PadicNumber::from_integer(3, 3, 10);
        let y = exp_scalar(&x).unwrap();
        let back = log_scalar(&y).unwrap();
        assert!(back.agrees_mod(&x, 8), "got {back}");
    }

    #[test]
    fn exp_outside_domain_rejected() {
        assert!(matches!(exp_scalar(&pd(1)), Err(Error::Domain(_))));
        let x2 = PadicNumber::from_integer(2, 2, 12);
        assert!(matches!(exp_scalar(&x2), Err(Error::Domain(_))));
        let x4 = PadicNumber::from_integer(2, 4, 12);
        assert!(exp_scalar(&x4).is_ok());
    }

    #[test]
    fn exp_is_homomorphism() {
        for (a, b) in [(3i64, 6), (9, 3), (12, 21), (3, 3)] {
            let x = PadicNumber::from_integer(3, a, 14);
            let y = PadicNumber::from_integer(3, b, 14);
            let lhs = exp_scalar(&x.add(&y).unwrap()).unwrap();
            let rhs = exp_scalar(&x).unwrap().mul(&exp_scalar(&y).unwrap()).unwrap();
            assert!(lhs.agrees_mod(&rhs, 12), "a={a} b={b}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn zero_mod_tracking() {
        // cancellation drops to a ZeroMod at the shared absolute precision
        let a = PadicNumber { p: 3, form: Form::Approx { val: 0, unit: 5, prec: 6 } };
        let b = PadicNumber { p: 3, form: Form::Approx { val: 0, unit: 5, prec: 5 } };
        let d = a.sub(&b).unwrap();
        assert_eq!(d.val_lower(), Val::Finite(5));
        assert!(d.is_zero_to_precision());
        // a genuine difference at the last tracked digit keeps its valuation
        let c = PadicNumber { p: 3, form: Form::Approx { val: 0, unit: 5 + 243, prec: 6 } };
        let d2 = a.sub(&c).unwrap();
        assert_eq!(d2.val_lower(), Val::Finite(5));
        assert!(!d2.is_zero_to_precision());
    }

    #[test]
    fn val_order_is_norm_order() {
        assert!(Val::Finite(1) > Val::Finite(2));
        assert!(Val::Infinite < Val::Finite(100));
        assert_eq!(
            [Val::Finite(3), Val::Infinite, Val::Finite(1)].into_iter().max(),
            Some(Val::Finite(1))
        );
        assert!(Val::Finite(5).at_most(2));
        assert!(!Val::Finite(1).at_most(2));
        assert!(Val::Infinite.at_most(1_000_000));
    }

    #[test]
    fn arithmetic_across_primes() {
        for p in [2u64, 5, 7] {
            let prec = 10;
            for a in -30i64..30 {
                for b in [-7i64, 1, 4, 25] {
                    let x = PadicNumber::from_integer(p, a, prec);
                    let y = PadicNumber::from_integer(p, b, prec);
                    let want = PadicNumber::from_integer(p, a + b, prec);
                    assert!(x.add(&y).unwrap().agrees_mod(&want, 9), "p={p} {a}+{b}");
                    let wprod = PadicNumber::from_i128(p, a as i128 * b as i128, prec);
                    assert!(x.mul(&y).unwrap().agrees_mod(&wprod, 8), "p={p} {a}*{b}");
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let x = pd(45).div(&pd(7)).unwrap();
        let j = PadicJson::from(&x);
        let y = PadicNumber::try_from(&j).unwrap();
        assert!(x.agrees_mod(&y, 10));
        let z = PadicNumber::zero(3);
        let jz = PadicJson::from(&z);
        assert!(PadicNumber::try_from(&jz).unwrap().is_zero());
    }

    proptest! {
        #[test]
        fn ultrametric_inequality(a in -2_000i64..2_000, b in -2_000i64..2_000) {
            let x = pd(a);
            let y = pd(b);
            let s = x.add(&y).unwrap();
            let vx = x.val_lower();
            let vy = y.val_lower();
            // |x+y| <= max(|x|,|y|) in norm order
            let bound = vx.max(vy);
            prop_assert!(s.val_lower() <= bound);
            // equality when the norms differ
            if vx != vy && !x.is_zero() && !y.is_zero() {
                prop_assert_eq!(s.val_lower(), bound);
            }
        }

        #[test]
        fn norm_multiplicativity(a in -3_000i64..3_000, b in -3_000i64..3_000) {
            prop_assume!(a != 0 && b != 0);
            let x = pd(a);
            let y = pd(b);
            let prod = x.mul(&y).unwrap();
            prop_assert_eq!(prod.val_lower(), x.val_lower() * y.val_lower());
        }
    }
}
