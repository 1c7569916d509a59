//! Function spaces `C(t, Z_p -> Q_p)` in the binomial-coefficient
//! (Mahler) basis.
//!
//! A continuous `f: Z_p -> Q_p` expands as `sum_m a_m * binom(x, m)` with
//! `a_m` the m-th forward difference of `f` at 0. The basis is orthonormal
//! at `C(0)`: the sup norm of `f` over `Z_p` equals `max_m |a_m|`, which
//! the grid norms below verify exhaustively. Smoothness orders are the
//! integer `C(t)` classes built from iterated difference quotients; the
//! norms are grid suprema with stabilization detection, since no closed
//! form for the basis norms `J(t, m)` is available.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{factorial_valuation, max_precision, PadicJson, PadicNumber, Val};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Smoothness order for the `C(t)` norms. Integer orders only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtIndex(pub u32);

/// Largest smoothness order the grid norms will evaluate.
pub const MAX_CT: u32 = 3;

/// A truncated Mahler expansion: coefficients `a_0..a_D` plus a lower
/// bound `tail_val` on `|a_m|` for `m > D` (`Val::Infinite` for exactly
/// polynomial data).
#[derive(Debug, Clone, PartialEq)]
pub struct MahlerSeries {
    p: u64,
    prec: u32,
    coeffs: Vec<PadicNumber>,
    tail_val: Val,
}

impl MahlerSeries {
    pub fn new(p: u64, prec: u32, mut coeffs: Vec<PadicNumber>, tail_val: Val) -> Self {
        if coeffs.is_empty() {
            coeffs.push(PadicNumber::zero(p));
        }
        MahlerSeries { p, prec, coeffs, tail_val }
    }

    pub fn zero(p: u64, prec: u32) -> Self {
        Self::new(p, prec, vec![PadicNumber::zero(p)], Val::Infinite)
    }

    /// The identity function `x`.
    pub fn identity(p: u64, prec: u32) -> Self {
        Self::new(
            p,
            prec,
            vec![PadicNumber::zero(p), PadicNumber::one(p, prec)],
            Val::Infinite,
        )
    }

    pub fn constant(c: PadicNumber, prec: u32) -> Self {
        let p = c.prime();
        Self::new(p, prec, vec![c], Val::Infinite)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[PadicNumber] {
        &self.coeffs
    }

    pub fn coeff(&self, m: usize) -> PadicNumber {
        self.coeffs.get(m).cloned().unwrap_or_else(|| PadicNumber::zero(self.p))
    }

    pub fn tail_val(&self) -> Val {
        self.tail_val
    }

    pub fn with_tail_val(mut self, tail: Val) -> Self {
        self.tail_val = tail;
        self
    }

    /// Coefficient-wise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::Domain("mismatched primes".into()));
        }
        let d = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(d);
        for m in 0..d {
            coeffs.push(self.coeff(m).add(&other.coeff(m))?);
        }
        Ok(Self::new(
            self.p,
            self.prec.min(other.prec),
            coeffs,
            // the weaker of the two tail bounds (larger norm) survives
            self.tail_val.max(other.tail_val),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        // identical representations denote the same function: the tails
        // cancel along with the coefficients
        if self == other {
            return Ok(Self::zero(self.p, self.prec));
        }
        self.add(&other.scale(&PadicNumber::from_integer(other.p, -1, other.prec.max(1)))?)
    }

    /// True when every stored coefficient is exactly zero and the tail is
    /// infinite: the representation of the zero function.
    pub fn is_exactly_zero(&self) -> bool {
        self.tail_val == Val::Infinite && self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, c: &PadicNumber) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| a.mul(c))
            .collect::<Result<Vec<_>>>()?;
        let tail = match (self.tail_val, c.val_lower()) {
            (Val::Finite(t), Val::Finite(v)) => Val::Finite(t + v),
            _ => Val::Infinite,
        };
        Ok(Self::new(self.p, self.prec, coeffs, tail))
    }

    /// Whether the function maps `Z_p` into `Z_p`: all `|a_m| <= 1`.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|a| a.val_lower().at_most(0)) && self.tail_val.at_most(0)
    }

    /// `max_m |a_m|` over the stored range only, ignoring the tail
    /// bound: the `C(0)` size of the stored truncation.
    pub fn coeff_sup_stored(&self) -> Val {
        self.coeffs
            .iter()
            .map(|a| a.val_lower())
            .max()
            .unwrap_or(Val::Infinite)
    }

    /// `max_m |a_m|` over the stored range combined with the tail bound,
    /// as a `Val`. By `C(0)` orthonormality of the basis this is the sup
    /// norm over `Z_p`.
    pub fn coeff_sup(&self) -> Val {
        let stored = self
            .coeffs
            .iter()
            .map(|a| a.val_lower())
            .max()
            .unwrap_or(Val::Infinite);
        stored.max(self.tail_val)
    }

    /// `binom(x, m)` by the falling-factorial product over `m!`, exact for
    /// integer `x`.
    pub fn binomial_at(p: u64, x: &PadicNumber, m: usize, prec: u32) -> Result<PadicNumber> {
        let mut num = PadicNumber::one(p, prec);
        for j in 0..m {
            let xj = x.sub(&PadicNumber::from_i128(p, j as i128, prec))?;
            num = num.mul(&xj)?;
        }
        let mut fact = PadicNumber::one(p, max_precision(p));
        for j in 1..=m {
            fact = fact.mul(&PadicNumber::from_i128(p, j as i128, max_precision(p)))?;
        }
        num.div(&fact)
    }

    /// Evaluate at `x` with `|x| <= 1`. Exact to `min(precision, tail_val)`.
    pub fn evaluate(&self, x: &PadicNumber) -> Result<PadicNumber> {
        if x.prime() != self.p {
            return Err(Error::Domain("mismatched primes".into()));
        }
        if !x.val_lower().at_most(0) {
            return Err(Error::Domain(format!("|x| > 1 (valuation {})", x.val_lower())));
        }
        let mut acc = PadicNumber::zero(self.p);
        // running falling-factorial product, divided term-wise
        let mut basis = PadicNumber::one(self.p, self.prec.max(x.precision()).max(1));
        for (m, a) in self.coeffs.iter().enumerate() {
            if m > 0 {
                let xj = x.sub(&PadicNumber::from_i128(self.p, (m - 1) as i128, self.prec.max(1)))?;
                basis = basis
                    .mul(&xj)?
                    .div(&PadicNumber::from_i128(self.p, m as i128, max_precision(self.p)))?;
            }
            if !a.is_zero() {
                acc = acc.add(&a.mul(&basis)?)?;
            }
        }
        // the unknown tail contributes at most p^(-tail_val)
        match self.tail_val {
            Val::Infinite => Ok(acc),
            Val::Finite(t) => Ok(acc.truncate_abs(t)),
        }
    }

    /// Evaluate at an integer point.
    pub fn evaluate_at_int(&self, x: i64) -> Result<PadicNumber> {
        self.evaluate(&PadicNumber::from_integer(self.p, x, self.prec.max(1)))
    }
}

/// Coefficient extraction: `a_m` is the m-th forward difference of `f`
/// at 0, so `D + 1` values `f(0..=D)` determine the truncation exactly
/// (and exactly reproduce polynomials of degree `<= D`).
pub fn mahler_coeffs_from_values(
    p: u64,
    prec: u32,
    values: &[PadicNumber],
    degree: usize,
    tail_val: Val,
) -> Result<MahlerSeries> {
    if values.len() <= degree {
        return Err(Error::Domain(format!(
            "need {} values for degree {degree}, got {}",
            degree + 1,
            values.len()
        )));
    }
    let mut row: Vec<PadicNumber> = values[..=degree].to_vec();
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(row[0].clone());
    for _m in 1..=degree {
        for i in 0..row.len() - 1 {
            row[i] = row[i + 1].sub(&row[i])?;
        }
        row.pop();
        coeffs.push(row[0].clone());
    }
    Ok(MahlerSeries::new(p, prec, coeffs, tail_val))
}

/// Coefficient extraction from a callable on integer points.
pub fn mahler_coeffs<F>(p: u64, prec: u32, f: F, degree: usize) -> Result<MahlerSeries>
where
    F: Fn(i64) -> Result<PadicNumber>,
{
    let values = (0..=degree as i64).map(f).collect::<Result<Vec<_>>>()?;
    mahler_coeffs_from_values(p, prec, &values, degree, Val::Finite(0))
}

/// The recursive partial difference quotient of integer order `n`:
/// `Phi^1 f(x; h; z) = (f(x + z h) - f(x)) / z` and
/// `Phi^(n+1) f(x; h_1..h_(n+1); z_1..z_(n+1)) =
///   (Phi^n f(x + z_(n+1) h_(n+1); ..) - Phi^n f(x; ..)) / z_(n+1)`.
pub fn difference_quotient(
    f: &MahlerSeries,
    order: usize,
    x: &PadicNumber,
    hs: &[PadicNumber],
    zs: &[PadicNumber],
) -> Result<PadicNumber> {
    if hs.len() != order || zs.len() != order {
        return Err(Error::Domain(format!(
            "order {order} needs {order} increments, got {} and {}",
            hs.len(),
            zs.len()
        )));
    }
    for (h, z) in hs.iter().zip(zs) {
        if h.is_zero_to_precision() || z.is_zero_to_precision() {
            return Err(Error::Domain("zero increment in difference quotient".into()));
        }
    }
    if order == 0 {
        return f.evaluate(x);
    }
    let n = order - 1;
    let step = zs[n].mul(&hs[n])?;
    let shifted = x.add(&step)?;
    let a = difference_quotient(f, n, &shifted, &hs[..n], &zs[..n])?;
    let b = difference_quotient(f, n, x, &hs[..n], &zs[..n])?;
    a.sub(&b)?.div(&zs[n])
}

/// Result of a grid norm: the sup as a `Val` together with a flag telling
/// whether the value agreed with the level `L - 1` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormReport {
    pub value: Val,
    pub stabilized: bool,
}

fn grid_norm_at_level(f: &MahlerSeries, t: u32, level: u32, parallel: bool) -> Result<Val> {
    let p = f.prime();
    let q = (p as i64).pow(level);
    // memoize f on every integer argument the grid can produce:
    // x + sum of up to t shifts z*h with x, z, h < p^level
    let reach = q - 1 + t as i64 * (q - 1) * (q - 1);
    let eval = |k: i64| f.evaluate_at_int(k);
    let values: Vec<PadicNumber> = {
        #[cfg(feature = "parallel")]
        {
            if parallel {
                (0..=reach).into_par_iter().map(eval).collect::<Result<Vec<_>>>()?
            } else {
                (0..=reach).map(eval).collect::<Result<Vec<_>>>()?
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = parallel;
            (0..=reach).map(eval).collect::<Result<Vec<_>>>()?
        }
    };

    // v = 0 term: sup |f| over the grid
    let mut best = values[..q as usize]
        .iter()
        .map(|v| v.val_lower())
        .max()
        .unwrap_or(Val::Infinite);

    if t == 0 {
        return Ok(best);
    }

    let exp_of = |k: i64| -> i64 { crate::padic::int_valuation(k as i128, p) as i64 };

    // Phi^v tables built order by order: entry [profile][x] holds the
    // quotient for a fixed increment profile (h_1, z_1, .., h_v, z_v);
    // the x slot covers every base point still reachable by later shifts.
    let mut prev: Vec<Vec<PadicNumber>> = Vec::new();
    let mut prev_hexp: Vec<i64> = Vec::new(); // v_p(h_1 .. h_v) per profile
    for v in 1..=t {
        let reach_v = q - 1 + (t - v) as i64 * (q - 1) * (q - 1);
        let n_prev = if v == 1 { 1 } else { prev.len() };
        let mut payloads: Vec<(usize, i64, i64)> = Vec::with_capacity(n_prev * ((q - 1) * (q - 1)) as usize);
        for pi in 0..n_prev {
            for h in 1..q {
                for z in 1..q {
                    payloads.push((pi, h, z));
                }
            }
        }
        let prec = f.precision().max(1);
        let build = |&(pi, h, z): &(usize, i64, i64)| -> Result<(Vec<PadicNumber>, i64)> {
            let zval = PadicNumber::from_integer(p, z, prec);
            let mut col = Vec::with_capacity(reach_v as usize + 1);
            for x in 0..=reach_v {
                let shifted = (x + z * h) as usize;
                let (a, b) = if v == 1 {
                    (&values[shifted], &values[x as usize])
                } else {
                    (&prev[pi][shifted], &prev[pi][x as usize])
                };
                col.push(a.sub(b)?.div(&zval)?);
            }
            let base = if v == 1 { 0 } else { prev_hexp[pi] };
            Ok((col, base + exp_of(h)))
        };
        let built: Vec<(Vec<PadicNumber>, i64)> = {
            #[cfg(feature = "parallel")]
            {
                if parallel {
                    payloads.par_iter().map(build).collect::<Result<Vec<_>>>()?
                } else {
                    payloads.iter().map(build).collect::<Result<Vec<_>>>()?
                }
            }
            #[cfg(not(feature = "parallel"))]
            {
                payloads.iter().map(build).collect::<Result<Vec<_>>>()?
            }
        };
        let mut cur = Vec::with_capacity(built.len());
        let mut cur_hexp = Vec::with_capacity(built.len());
        for (col, hexp) in built {
            // contribution |Phi^v f| / |h_1 .. h_v|
            for x in 0..q as usize {
                let contrib = match col[x].val_lower() {
                    Val::Infinite => Val::Infinite,
                    Val::Finite(w) => Val::Finite(w - hexp),
                };
                if contrib > best {
                    best = contrib;
                }
            }
            cur.push(col);
            cur_hexp.push(hexp);
        }
        prev = cur;
        prev_hexp = cur_hexp;
    }
    Ok(best)
}

/// The `C(t)` pseudoultranorm as an exhaustive sup over the level-`L`
/// grid: `x, h_i, z_i` range over representatives mod `p^L` (increments
/// nonzero), the order-`v` term is `|Phi^v f| / |h_1...h_v|`, maximized
/// with the `v = 0` term `sup |f|`, for all `0 <= v <= t`. Monotone
/// nondecreasing in `L`; `stabilized` reports agreement with level `L-1`.
pub fn norm_ct(f: &MahlerSeries, t: CtIndex, level: u32) -> Result<NormReport> {
    norm_ct_impl(f, t, level, cfg!(feature = "parallel"))
}

/// Sequential fallback of [`norm_ct`], always available.
pub fn norm_ct_seq(f: &MahlerSeries, t: CtIndex, level: u32) -> Result<NormReport> {
    norm_ct_impl(f, t, level, false)
}

fn norm_ct_impl(f: &MahlerSeries, t: CtIndex, level: u32, parallel: bool) -> Result<NormReport> {
    if t.0 > MAX_CT {
        return Err(Error::Domain(format!("smoothness order {} above maximum {MAX_CT}", t.0)));
    }
    if level < 1 {
        return Err(Error::Domain("level must be >= 1".into()));
    }
    // the grid has (p^L - 1)^2t increment profiles; refuse hopeless sizes
    let q = (f.prime() as f64).powi(level as i32) - 1.0;
    if q.powi(2 * t.0 as i32) > 2e7 {
        return Err(Error::Domain(format!(
            "grid of order {} at level {level} is too large; lower the level or the order",
            t.0
        )));
    }
    let value = grid_norm_at_level(f, t.0, level, parallel)?;
    let stabilized = if level == 1 {
        false
    } else {
        grid_norm_at_level(f, t.0, level - 1, parallel)? == value
    };
    Ok(NormReport { value, stabilized })
}

/// Norm of the basis element `binom(x, m)` in `C(t)`; `J(0, m) = 1` for
/// every `m` (non-Archimedean orthonormality).
pub fn basis_norm_j(p: u64, prec: u32, t: CtIndex, m: usize, level: u32) -> Result<NormReport> {
    let mut coeffs = vec![PadicNumber::zero(p); m + 1];
    coeffs[m] = PadicNumber::one(p, prec);
    let f = MahlerSeries::new(p, prec, coeffs, Val::Infinite);
    norm_ct(&f, t, level)
}

/// Monomial-basis view of a truncated series: coefficients of
/// `1, x, x^2, ..`. Conversion is exact basis change (falling factorials
/// over `m!`), so valuations track the genuine denominators.
pub fn to_monomial(f: &MahlerSeries) -> Result<Vec<PadicNumber>> {
    let p = f.prime();
    let d = f.degree_bound();
    let mut out = vec![PadicNumber::zero(p); d + 1];
    // falling factorial x(x-1)..(x-m+1) expanded in the monomial basis
    let mut falling = vec![PadicNumber::one(p, max_precision(p))];
    let mut fact = PadicNumber::one(p, max_precision(p));
    for m in 0..=d {
        if m > 0 {
            // falling_m = falling_(m-1) * (x - (m-1))
            let shift = PadicNumber::from_i128(p, -((m - 1) as i128), max_precision(p));
            let mut next = vec![PadicNumber::zero(p); falling.len() + 1];
            for (k, c) in falling.iter().enumerate() {
                next[k + 1] = next[k + 1].add(c)?;
                if !c.is_zero() {
                    next[k] = next[k].add(&c.mul(&shift)?)?;
                }
            }
            falling = next;
            fact = fact.mul(&PadicNumber::from_i128(p, m as i128, max_precision(p)))?;
        }
        let a = f.coeff(m);
        if a.is_zero() {
            continue;
        }
        let scaled = a.div(&fact)?;
        for (k, c) in falling.iter().enumerate() {
            if !c.is_zero() {
                out[k] = out[k].add(&scaled.mul(c)?)?;
            }
        }
    }
    Ok(out)
}

/// Inverse of [`to_monomial`]: evaluate the polynomial on `0..=D` and take
/// forward differences.
pub fn from_monomial(p: u64, prec: u32, mono: &[PadicNumber]) -> Result<MahlerSeries> {
    let d = mono.len().saturating_sub(1);
    let mut values = Vec::with_capacity(d + 1);
    for x in 0..=d as i64 {
        let xv = PadicNumber::from_integer(p, x, prec.max(1));
        let mut acc = PadicNumber::zero(p);
        let mut pow = PadicNumber::one(p, prec.max(1));
        for (k, c) in mono.iter().enumerate() {
            if k > 0 {
                pow = pow.mul(&xv)?;
            }
            if !c.is_zero() {
                acc = acc.add(&c.mul(&pow)?)?;
            }
        }
        values.push(acc);
    }
    mahler_coeffs_from_values(p, prec, &values, d, Val::Infinite)
}

/// Analyticity verdict from the stored coefficients.
///
/// The radius-1 criterion in the binomial basis is `|a_m| / |m!| -> 0`.
/// On truncated data we decide by the slope-normalized valuations
/// `u_m = (p - 1) * v(a_m) - m` (since `v_p(m!) ~ m/(p-1)`): analytic when
/// `u_m` is nondecreasing and grows over the stored range. Exactly
/// polynomial data (infinite tail) is analytic outright. The margin is
/// the net growth of `u_m` as a `Val`.
pub fn is_analytic(f: &MahlerSeries) -> (bool, Val) {
    let p = f.prime() as i64;
    if f.tail_val() == Val::Infinite {
        return (true, Val::Infinite);
    }
    let mut us: Vec<i64> = Vec::new();
    for (m, a) in f.coeffs().iter().enumerate() {
        match a.val_lower() {
            Val::Infinite => continue,
            Val::Finite(v) => us.push((p - 1) * v - m as i64),
        }
    }
    if us.len() <= 1 {
        return (true, Val::Infinite);
    }
    let nondecreasing = us.windows(2).all(|w| w[1] >= w[0]);
    let growth = us[us.len() - 1] - us[0];
    (nondecreasing && growth > 0, Val::Finite(growth))
}

/// The two equivalent analytic norms: `sup_m |a_m| J(an, m)` in the Mahler
/// basis, with `J(an, m) = |1/m!|`, and `sup_m |b_m|` in the monomial
/// basis. Returns the pair of `Val`s; the equivalence window is for the
/// caller to log, not to assume.
pub fn analytic_norm_pair(f: &MahlerSeries) -> Result<(Val, Val)> {
    let (ok, _) = is_analytic(f);
    if !ok {
        return Err(Error::Domain("series is not analytic".into()));
    }
    let p = f.prime();
    let mut mahler_side = Val::Infinite;
    for (m, a) in f.coeffs().iter().enumerate() {
        let contrib = match a.val_lower() {
            Val::Infinite => Val::Infinite,
            Val::Finite(v) => Val::Finite(v - factorial_valuation(m as u64, p) as i64),
        };
        mahler_side = mahler_side.max(contrib);
    }
    let mono = to_monomial(f)?;
    let mono_side = mono.iter().map(|b| b.val_lower()).max().unwrap_or(Val::Infinite);
    Ok((mahler_side, mono_side))
}

/// Gauss norm `sup_m |b_m|` of monomial coefficients.
pub fn gauss_norm(mono: &[PadicNumber]) -> Val {
    mono.iter().map(|b| b.val_lower()).max().unwrap_or(Val::Infinite)
}

/// Term-wise analytic derivative, computed in the monomial basis.
pub fn derivative(f: &MahlerSeries) -> Result<MahlerSeries> {
    let mono = to_monomial(f)?;
    let p = f.prime();
    let mut dmono = Vec::new();
    for (k, c) in mono.iter().enumerate().skip(1) {
        dmono.push(c.mul(&PadicNumber::from_i128(p, k as i128, max_precision(p)))?);
    }
    if dmono.is_empty() {
        dmono.push(PadicNumber::zero(p));
    }
    from_monomial(p, f.precision(), &dmono)
}

/// Antiderivative with `S(0) = 0`: exact conversion to the monomial basis,
/// term-wise integration, conversion back. Fails with the offending degree
/// if a denominator eats the whole precision budget.
pub fn antiderivative(f: &MahlerSeries) -> Result<MahlerSeries> {
    let p = f.prime();
    let mono = to_monomial(f)?;
    let mut imono = vec![PadicNumber::zero(p)];
    for (k, c) in mono.iter().enumerate() {
        let deg = PadicNumber::from_i128(p, (k + 1) as i128, max_precision(p));
        let term = c.div(&deg)?;
        if !c.is_zero_to_precision() && term.is_zero_to_precision() {
            return Err(Error::Precision(format!(
                "antiderivative lost all precision dividing by degree {}",
                k + 1
            )));
        }
        imono.push(term);
    }
    from_monomial(p, f.precision(), &imono)
}

/// JSON form `{p, N, D, coeffs, tail_val}` (tail `null` = infinite).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MahlerJson {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "D")]
    pub d: usize,
    pub coeffs: Vec<PadicJson>,
    pub tail_val: Option<i64>,
}

impl From<&MahlerSeries> for MahlerJson {
    fn from(f: &MahlerSeries) -> Self {
        MahlerJson {
            p: f.p,
            n: f.prec,
            d: f.degree_bound(),
            coeffs: f.coeffs.iter().map(PadicJson::from).collect(),
            tail_val: f.tail_val.exponent(),
        }
    }
}

impl TryFrom<&MahlerJson> for MahlerSeries {
    type Error = Error;

    fn try_from(j: &MahlerJson) -> Result<Self> {
        let coeffs = j
            .coeffs
            .iter()
            .map(PadicNumber::try_from)
            .collect::<Result<Vec<_>>>()?;
        for c in &coeffs {
            if c.prime() != j.p {
                return Err(Error::Domain("coefficient prime mismatch".into()));
            }
        }
        let tail = match j.tail_val {
            Some(t) => Val::Finite(t),
            None => Val::Infinite,
        };
        Ok(MahlerSeries::new(j.p, j.n, coeffs, tail))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: u64 = 3;
    const N: u32 = 12;

    fn pd(k: i64) -> PadicNumber {
        PadicNumber::from_integer(P, k, N)
    }

    fn series(cs: &[i64]) -> MahlerSeries {
        MahlerSeries::new(P, N, cs.iter().map(|&c| pd(c)).collect(), Val::Infinite)
    }

    #[test]
    fn coeffs_of_identity_and_square() {
        let id = mahler_coeffs(P, N, |x| Ok(pd(x)), 4).unwrap();
        assert!(id.coeff(0).is_zero());
        assert!(id.coeff(1).agrees_mod(&pd(1), 10));
        assert!(id.coeff(2).is_zero());
        // f(x) = x^2 -> (0, 1, 2, 0, ...)
        let sq = mahler_coeffs(P, N, |x| Ok(pd(x * x)), 4).unwrap();
        assert!(sq.coeff(0).is_zero());
        assert!(sq.coeff(1).agrees_mod(&pd(1), 10));
        assert!(sq.coeff(2).agrees_mod(&pd(2), 10));
        assert!(sq.coeff(3).is_zero());
        // constant
        let c = mahler_coeffs(P, N, |_| Ok(pd(7)), 3).unwrap();
        assert!(c.coeff(0).agrees_mod(&pd(7), 10));
        assert!(c.coeff(1).is_zero());
    }

    #[test]
    fn insufficient_table_rejected() {
        let vals = vec![pd(0), pd(1)];
        assert!(matches!(
            mahler_coeffs_from_values(P, N, &vals, 2, Val::Infinite),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn evaluation_examples() {
        let id = MahlerSeries::identity(P, N);
        assert!(id.evaluate_at_int(5).unwrap().agrees_mod(&pd(5), 10));
        // s = (0,1,2) at x=4: C(4,1) + 2 C(4,2) = 4 + 12 = 16
        let s = series(&[0, 1, 2]);
        assert!(s.evaluate_at_int(4).unwrap().agrees_mod(&pd(16), 10));
        let c = series(&[9]);
        assert!(c.evaluate_at_int(77).unwrap().agrees_mod(&pd(9), 10));
        // |x| > 1 rejected
        let big = PadicNumber::from_rational(P, 1, 3, N).unwrap();
        assert!(matches!(s.evaluate(&big), Err(Error::Domain(_))));
    }

    #[test]
    fn difference_quotient_examples() {
        // f = id: Phi^1 = h
        let id = MahlerSeries::identity(P, N);
        let q = difference_quotient(&id, 1, &pd(5), &[pd(2)], &[pd(4)]).unwrap();
        assert!(q.agrees_mod(&pd(2), 10));
        // f = x^2: Phi^1 = 2xh + z h^2
        let sq = from_monomial(P, N, &[pd(0), pd(0), pd(1)]).unwrap();
        let (x, h, z) = (pd(5), pd(2), pd(4));
        let q = difference_quotient(&sq, 1, &x, &[h], &[z]).unwrap();
        let expect = pd(2 * 5 * 2 + 4 * 2 * 2);
        assert!(q.agrees_mod(&expect, 10));
        // f = x^2 order 2: 2 h1 h2
        let q2 = difference_quotient(&sq, 2, &pd(5), &[pd(2), pd(7)], &[pd(4), pd(1)]).unwrap();
        assert!(q2.agrees_mod(&pd(2 * 2 * 7), 10));
        // zero increment rejected
        assert!(matches!(
            difference_quotient(&sq, 1, &pd(5), &[pd(0)], &[pd(1)]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dq_of_low_degree_polynomial_vanishes() {
        // order n quotient of degree < n polynomial is 0
        let lin = series(&[4, 2]); // degree 1
        let q = difference_quotient(&lin, 2, &pd(1), &[pd(2), pd(5)], &[pd(1), pd(2)]).unwrap();
        assert!(q.is_zero_to_precision(), "got {q}");
    }

    #[test]
    fn norm_ct_examples() {
        // f = id, t = 1: norm 1
        let id = MahlerSeries::identity(P, N);
        let r = norm_ct(&id, CtIndex(1), 2).unwrap();
        assert_eq!(r.value, Val::Finite(0));
        // f = 0: norm 0
        let z = MahlerSeries::zero(P, N);
        assert_eq!(norm_ct(&z, CtIndex(1), 2).unwrap().value, Val::Infinite);
        // f = p^2 binom(x,1) at t=0: norm p^-2
        let f = series(&[0, 9]);
        let r = norm_ct(&f, CtIndex(0), 3).unwrap();
        assert_eq!(r.value, Val::Finite(2));
        assert!(r.stabilized);
    }

    #[test]
    fn c0_norm_is_coeff_sup() {
        let f = series(&[3, 27, 1, 0, 9]);
        let r = norm_ct(&f, CtIndex(0), 3).unwrap();
        assert_eq!(r.value, f.coeff_sup());
        assert_eq!(r.value, Val::Finite(0));
    }

    #[test]
    fn basis_norm_examples() {
        // J(0, m) = 1 for all m
        for m in [0usize, 1, 2, 5, 7] {
            let r = basis_norm_j(P, N, CtIndex(0), m, 3).unwrap();
            assert_eq!(r.value, Val::Finite(0), "m={m}");
        }
        // t=1, m=2: fixed by the grid oracle with stabilization
        let l3 = basis_norm_j(P, N, CtIndex(1), 2, 3).unwrap();
        let l4 = basis_norm_j(P, N, CtIndex(1), 2, 4).unwrap();
        assert_eq!(l3.value, l4.value, "stabilized by level 3");
        assert!(l4.stabilized);
    }

    #[test]
    fn analytic_examples() {
        // polynomial: analytic
        let (ok, margin) = is_analytic(&series(&[1, 5, 7]));
        assert!(ok);
        assert_eq!(margin, Val::Infinite);
        // a_m = 1 for all m <= D, tail 0: not analytic for D >= p
        let ones = MahlerSeries::new(P, N, vec![pd(1); 6], Val::Finite(0));
        let (ok, _) = is_analytic(&ones);
        assert!(!ok);
        // a_m = p^m: analytic for p >= 3
        let geo: Vec<PadicNumber> = (0..10).map(|m| pd(3i64.pow(m))).collect();
        let f = MahlerSeries::new(P, N, geo, Val::Finite(10));
        let (ok, margin) = is_analytic(&f);
        assert!(ok);
        assert!(matches!(margin, Val::Finite(w) if w > 0));
    }

    #[test]
    fn analytic_norm_pair_examples() {
        let id = MahlerSeries::identity(P, N);
        assert_eq!(analytic_norm_pair(&id).unwrap(), (Val::Finite(0), Val::Finite(0)));
        // single a_2 = 1: monomial coefficients (0, -1/2, 1/2)
        let f = series(&[0, 0, 1]);
        let mono = to_monomial(&f).unwrap();
        let half = PadicNumber::from_rational(P, 1, 2, N).unwrap();
        assert!(mono[0].is_zero());
        assert!(mono[1].agrees_mod(&half.neg(), 10));
        assert!(mono[2].agrees_mod(&half, 10));
        // s = p^2 x
        let g = series(&[0, 9]);
        assert_eq!(analytic_norm_pair(&g).unwrap(), (Val::Finite(2), Val::Finite(2)));
    }

    #[test]
    fn non_analytic_rejected_by_norm_pair() {
        let ones = MahlerSeries::new(P, N, vec![pd(1); 6], Val::Finite(0));
        assert!(matches!(analytic_norm_pair(&ones), Err(Error::Domain(_))));
    }

    #[test]
    fn antiderivative_examples() {
        let z = MahlerSeries::zero(P, N);
        let az = antiderivative(&z).unwrap();
        assert!(az.coeff_sup() == Val::Infinite);
        // s = 1 -> id
        let one = series(&[1]);
        let a1 = antiderivative(&one).unwrap();
        assert!(a1.coeff(0).is_zero_to_precision());
        assert!(a1.coeff(1).agrees_mod(&pd(1), 10));
        // s = 2x (Mahler coeffs (0,2,0): forward differences of 0,2,4) -> x^2
        let twox = series(&[0, 2, 0]);
        let sq = antiderivative(&twox).unwrap();
        let expect = from_monomial(P, N, &[pd(0), pd(0), pd(1)]).unwrap();
        for m in 0..=3 {
            assert!(
                sq.coeff(m).agrees_mod(&expect.coeff(m), 9),
                "m={m}: {} vs {}",
                sq.coeff(m),
                expect.coeff(m)
            );
        }
    }

    #[test]
    fn derivative_of_antiderivative() {
        let f = series(&[2, 6, 3, 9]);
        let g = derivative(&antiderivative(&f).unwrap()).unwrap();
        for m in 0..=4 {
            assert!(g.coeff(m).agrees_mod(&f.coeff(m), 8), "m={m}");
        }
    }

    #[test]
    fn monomial_round_trip() {
        let f = series(&[5, 1, 3, 2]);
        let g = from_monomial(P, N, &to_monomial(&f).unwrap()).unwrap();
        for m in 0..=4 {
            assert!(f.coeff(m).agrees_mod(&g.coeff(m), 8), "m={m}");
        }
    }

    #[test]
    fn higher_order_norms() {
        // binom(x,3): the order-1 quotient reaches p (take x=0, h=1,
        // z=3: binom(3,3)/3 = 1/3), and integer values cap it there
        let mut coeffs = vec![pd(0); 4];
        coeffs[3] = pd(1);
        let b3 = MahlerSeries::new(P, N, coeffs, Val::Infinite);
        let r = norm_ct(&b3, CtIndex(1), 3).unwrap();
        assert_eq!(r.value, Val::Finite(-1));
        assert!(r.stabilized);
        // the norms grow with the smoothness order
        let r2 = norm_ct(&b3, CtIndex(2), 2).unwrap();
        let r3 = norm_ct(&b3, CtIndex(3), 2).unwrap();
        let r1 = norm_ct(&b3, CtIndex(1), 2).unwrap();
        let r0 = norm_ct(&b3, CtIndex(0), 2).unwrap();
        assert!(r0.value <= r1.value);
        assert!(r1.value <= r2.value);
        assert!(r2.value <= r3.value);
        // and with the level
        let s = series(&[1, 3, 9, 2]);
        for t in 0..=1u32 {
            let v2 = norm_ct(&s, CtIndex(t), 2).unwrap().value;
            let v3 = norm_ct(&s, CtIndex(t), 3).unwrap().value;
            assert!(v2 <= v3, "t={t}");
        }
    }

    #[test]
    fn oversized_grid_rejected() {
        let f = series(&[1, 2]);
        assert!(matches!(norm_ct(&f, CtIndex(3), 3), Err(Error::Domain(_))));
        assert!(matches!(norm_ct(&f, CtIndex(4), 1), Err(Error::Domain(_))));
    }

    #[test]
    fn analytic_norm_window_logged() {
        // the (iv)/(v) equivalence window over sampled polynomials:
        // reported, with only finiteness asserted
        let mut rng = crate::sample::rng(17);
        let mut widest = 0i64;
        for _ in 0..20 {
            let mono = crate::sample::random_int_polynomial(&mut rng, P, N, 8, 40);
            let f = from_monomial(P, N, &mono).unwrap();
            let (a, b) = analytic_norm_pair(&f).unwrap();
            match (a, b) {
                (Val::Finite(wa), Val::Finite(wb)) => widest = widest.max((wa - wb).abs()),
                _ => panic!("nonzero polynomial has finite norms"),
            }
        }
        println!("analytic norm equivalence window: exponent gap <= {widest}");
    }

    #[test]
    fn seq_matches_parallel() {
        let f = series(&[3, 27, 1, 0, 9]);
        for t in 0..=1u32 {
            let a = norm_ct(&f, CtIndex(t), 2).unwrap();
            let b = norm_ct_seq(&f, CtIndex(t), 2).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn json_round_trip() {
        let f = series(&[5, 1, 3, 2]);
        let j = MahlerJson::from(&f);
        let text = serde_json::to_string(&j).unwrap();
        let back: MahlerJson = serde_json::from_str(&text).unwrap();
        let g = MahlerSeries::try_from(&back).unwrap();
        for m in 0..=3 {
            assert!(f.coeff(m).agrees_mod(&g.coeff(m), 10));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn round_trip_polynomials(cs in proptest::collection::vec(-40i64..40, 1..6)) {
            // extraction then evaluation reproduces polynomial values exactly
            let mono: Vec<PadicNumber> = cs.iter().map(|&c| pd(c)).collect();
            let f = from_monomial(P, N, &mono).unwrap();
            for x in 0..27i64 {
                let mut expect = 0i128;
                for (k, &c) in cs.iter().enumerate() {
                    expect += (c as i128) * (x as i128).pow(k as u32);
                }
                let got = f.evaluate_at_int(x).unwrap();
                let want = PadicNumber::from_i128(P, expect, N);
                prop_assert!(got.agrees_mod(&want, 11), "x={x}: {got} vs {want}");
            }
        }

        #[test]
        fn coefficient_linearity(
            a in proptest::collection::vec(-20i64..20, 4),
            b in proptest::collection::vec(-20i64..20, 4),
            alpha in -5i64..5,
            beta in -5i64..5,
        ) {
            let fa = series(&a);
            let fb = series(&b);
            let lhs = fa.scale(&pd(alpha)).unwrap().add(&fb.scale(&pd(beta)).unwrap()).unwrap();
            // extract coefficients of the combined function from values
            let comb = mahler_coeffs(P, N, |x| {
                let va = fa.evaluate_at_int(x)?;
                let vb = fb.evaluate_at_int(x)?;
                va.mul(&pd(alpha))?.add(&vb.mul(&pd(beta))?)
            }, 3).unwrap();
            for m in 0..=3 {
                prop_assert!(lhs.coeff(m).agrees_mod(&comb.coeff(m), 10));
            }
        }
    }
}
