//! Flows of vector fields and logarithms of near-identity maps.
//!
//! A field `A = a(x) d/dx` with `||a|| <= p^-2` (Gauss norm of the
//! monomial coefficients; `p^-3` for `p = 2`) exponentiates to the flow
//! `g^q = sum_s q^s A^s x / s!`, a one-parameter subgroup of `W`. The
//! logarithm inverts this by an iterative scheme: each step solves the
//! linear system `(I + S) T = P` on truncated coefficients, where
//! `S(X) = sum_k A^k X / (k+1)!` has operator norm at most `1/p`, so the
//! Neumann iteration converges one digit per pass. Both directions share
//! the same truncated pipeline (degree cap, term cutoff), which is what
//! makes `log(exp(A)) = A` hold to working precision.
//!
//! Monomial fields `q x^m d/dx` flow in closed form with the integer
//! products `gamma(k, m)`; iterated brackets admit the closed `(ad u)^s v`
//! formula. Composing two flows is *not* the flow of a Campbell-Hausdorff
//! sum -- the discrepancy operation quantifies the failure at order 4.

use crate::diffeo::Diffeo;
use crate::error::{Error, Result};
use crate::mahler::{self, from_monomial, gauss_norm, MahlerSeries};
use crate::padic::{max_precision, PadicNumber, Val};

/// A vector field `a(x) d/dx` on `Z_p`, kept in both bases.
#[derive(Debug, Clone)]
pub struct VectorField {
    p: u64,
    prec: u32,
    mahler: MahlerSeries,
    mono: Vec<PadicNumber>,
}

impl VectorField {
    pub fn from_mahler(a: MahlerSeries) -> Result<Self> {
        let mono = mahler::to_monomial(&a)?;
        Ok(VectorField { p: a.prime(), prec: a.precision(), mahler: a, mono })
    }

    pub fn from_monomial(p: u64, prec: u32, mono: Vec<PadicNumber>) -> Result<Self> {
        let mahler = from_monomial(p, prec, &mono)?;
        Ok(VectorField { p, prec, mahler, mono })
    }

    pub fn zero(p: u64, prec: u32) -> Self {
        VectorField {
            p,
            prec,
            mahler: MahlerSeries::zero(p, prec),
            mono: vec![PadicNumber::zero(p)],
        }
    }

    /// The constant field `d/dx`.
    pub fn unit(p: u64, prec: u32) -> Self {
        VectorField {
            p,
            prec,
            mahler: MahlerSeries::constant(PadicNumber::one(p, prec), prec),
            mono: vec![PadicNumber::one(p, prec)],
        }
    }

    /// `c x^m d/dx`.
    pub fn monomial(p: u64, prec: u32, c: PadicNumber, m: usize) -> Result<Self> {
        let mut mono = vec![PadicNumber::zero(p); m + 1];
        mono[m] = c;
        Self::from_monomial(p, prec, mono)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn coeff(&self) -> &MahlerSeries {
        &self.mahler
    }

    pub fn mono(&self) -> &[PadicNumber] {
        &self.mono
    }

    /// Gauss norm of the monomial coefficients (the norm the exp/log
    /// estimates run in).
    pub fn norm(&self) -> Val {
        gauss_norm(&self.mono)
    }

    /// `C(0)` sup norm from the Mahler coefficients.
    pub fn norm_c0(&self) -> Val {
        self.mahler.coeff_sup()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mono = poly_add(self.p, &self.mono, &other.mono)?;
        Self::from_monomial(self.p, self.prec.min(other.prec), mono)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let neg = other.scale(&PadicNumber::from_integer(self.p, -1, self.prec))?;
        self.add(&neg)
    }

    pub fn scale(&self, c: &PadicNumber) -> Result<Self> {
        let mono = self.mono.iter().map(|b| b.mul(c)).collect::<Result<Vec<_>>>()?;
        Self::from_monomial(self.p, self.prec, mono)
    }

    /// The single monomial `(c, m)` when the field is one, after dropping
    /// zero coefficients.
    pub fn as_monomial(&self) -> Option<(PadicNumber, usize)> {
        let mut found = None;
        for (m, c) in self.mono.iter().enumerate() {
            if !c.is_zero_to_precision() {
                if found.is_some() {
                    return None;
                }
                found = Some((c.clone(), m));
            }
        }
        found
    }

    pub fn is_zero(&self) -> bool {
        self.mono.iter().all(|c| c.is_zero_to_precision())
    }
}

fn poly_add(p: u64, a: &[PadicNumber], b: &[PadicNumber]) -> Result<Vec<PadicNumber>> {
    let n = a.len().max(b.len());
    let zero = PadicNumber::zero(p);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).unwrap_or(&zero);
        let y = b.get(i).unwrap_or(&zero);
        out.push(x.add(y)?);
    }
    Ok(out)
}

fn poly_derivative(p: u64, a: &[PadicNumber]) -> Result<Vec<PadicNumber>> {
    if a.len() <= 1 {
        return Ok(vec![PadicNumber::zero(p)]);
    }
    let mut out = Vec::with_capacity(a.len() - 1);
    for (k, c) in a.iter().enumerate().skip(1) {
        out.push(c.mul(&PadicNumber::from_i128(p, k as i128, max_precision(p)))?);
    }
    Ok(out)
}

/// Product truncated at degree `cap`; returns the minimum valuation of
/// any discarded coefficient (`Infinite` when nothing was dropped).
fn poly_mul_capped(
    p: u64,
    a: &[PadicNumber],
    b: &[PadicNumber],
    cap: usize,
) -> Result<(Vec<PadicNumber>, Val)> {
    let deg = a.len() + b.len() - 2;
    let keep = deg.min(cap);
    let mut out = vec![PadicNumber::zero(p); keep + 1];
    let mut discarded = Val::Infinite;
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let t = x.mul(y)?;
            if i + j <= keep {
                out[i + j] = out[i + j].add(&t)?;
            } else {
                // dropped tail: remember how big it could be
                discarded = discarded.min(t.val_lower());
            }
        }
    }
    Ok((out, discarded))
}

fn poly_min_val(a: &[PadicNumber]) -> Val {
    gauss_norm(a)
}

/// One application of the derivation: `A(u) = a * u'`, truncated.
fn apply_field(
    p: u64,
    a: &[PadicNumber],
    u: &[PadicNumber],
    cap: usize,
) -> Result<(Vec<PadicNumber>, Val)> {
    let du = poly_derivative(p, u)?;
    poly_mul_capped(p, a, &du, cap)
}

/// Result of exponentiating a field.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub g: Diffeo,
    pub q: PadicNumber,
    pub terms_used: usize,
    /// Absolute exponent to which the flow coefficients are guaranteed.
    pub precision: i64,
}

fn exp_domain_exponent(p: u64) -> i64 {
    if p == 2 {
        3
    } else {
        2
    }
}

/// The flow `g^q(x) = sum_s q^s A^s x / s!` as a [`Diffeo`].
///
/// `cap` bounds the polynomial degree (discarded tails are tracked into
/// the result's tail valuation), `stop` is the absolute valuation at
/// which series terms are dropped; `l_max` is the number of cached
/// permutation levels for the resulting element.
pub fn exp_field(
    field: &VectorField,
    q: &PadicNumber,
    cap: usize,
    stop: i64,
    l_max: u32,
) -> Result<FlowResult> {
    let p = field.prime();
    let need = exp_domain_exponent(p);
    if !field.norm().at_most(need) {
        return Err(Error::Convergence(format!(
            "exp requires ||A|| <= p^-{need}, got {}",
            field.norm()
        )));
    }
    if !q.val_lower().at_most(0) {
        return Err(Error::Domain("flow parameter must satisfy |q| <= 1".into()));
    }
    let a = field.mono();
    // u_s = A^(s-1) a with intermediate truncation; scalar_s = q^s / s!
    let mut u_s: Vec<PadicNumber> = a.to_vec();
    let mut scalar = q.clone();
    let mut sum = vec![PadicNumber::zero(p); 1];
    let mut tail = Val::Infinite;
    let mut terms_used = 0;
    let mut hit_cutoff = false;
    for s in 1..=(4 * stop.max(4) as usize) {
        if s > 1 {
            let (next, disc) = apply_field(p, a, &u_s, cap)?;
            u_s = next;
            scalar = scalar
                .mul(q)?
                .div(&PadicNumber::from_i128(p, s as i128, max_precision(p)))?;
            // the dropped degree-cap tail enters the flow scaled by
            // q^s/s!; bounds accumulate by the weaker one winning
            tail = tail.max(match (disc, scalar.val_lower()) {
                (Val::Finite(d), Val::Finite(sv)) => Val::Finite(d + sv),
                _ => Val::Infinite,
            });
        }
        let term: Vec<PadicNumber> =
            u_s.iter().map(|c| c.mul(&scalar)).collect::<Result<Vec<_>>>()?;
        let tv = poly_min_val(&term);
        if tv == Val::Infinite {
            // the series terminated exactly
            break;
        }
        if tv.at_most(stop) {
            hit_cutoff = true;
            break;
        }
        sum = poly_add(p, &sum, &term)?;
        terms_used += 1;
    }
    let mut coeffs = sum;
    if hit_cutoff {
        coeffs = coeffs.iter().map(|c| c.truncate_abs(stop)).collect();
        tail = tail.max(Val::Finite(stop));
    }
    let mut series = from_monomial(p, field.precision(), &coeffs)?;
    if tail != Val::Infinite {
        let combined = series.tail_val().max(tail);
        series = series.with_tail_val(combined);
    }
    let precision = series
        .coeffs()
        .iter()
        .filter_map(|c| c.abs_precision())
        .min()
        .unwrap_or(stop);
    let g = Diffeo::from_series(series, l_max)?.with_u_mono(coeffs);
    Ok(FlowResult { g, q: q.clone(), terms_used, precision })
}

/// Lie bracket `[u, v] = (a_u a_v' - a_v a_u') d/dx` with the stated cap.
pub fn bracket(u: &VectorField, v: &VectorField, cap: usize) -> Result<VectorField> {
    let p = u.prime();
    let (t1, d1) = poly_mul_capped(p, u.mono(), &poly_derivative(p, v.mono())?, cap)?;
    let (t2, d2) = poly_mul_capped(p, v.mono(), &poly_derivative(p, u.mono())?, cap)?;
    let _ = (d1, d2);
    let neg = t2
        .iter()
        .map(|c| Ok(c.neg()))
        .collect::<Result<Vec<_>>>()?;
    let mono = poly_add(p, &t1, &neg)?;
    VectorField::from_monomial(p, u.precision().min(v.precision()), mono)
}

/// Closed form for `(ad u)^s v` on monomials `u = c x^m d/dx`,
/// `v = z x^n d/dx`:
/// `c^s z (n-m)(n-1)(n+m-2)...(n+(s-2)m-s+1) x^(n+s(m-1)) d/dx`,
/// the j-th factor being `n + (j-2)m - (j-1)`.
pub fn ad_power(u: &VectorField, v: &VectorField, s: u32) -> Result<VectorField> {
    let p = u.prime();
    let prec = u.precision().min(v.precision());
    let (c, m) = u
        .as_monomial()
        .ok_or_else(|| Error::Domain("ad_power requires a monomial first field".into()))?;
    let (z, n) = v
        .as_monomial()
        .ok_or_else(|| Error::Domain("ad_power requires a monomial second field".into()))?;
    if s == 0 {
        return Ok(v.clone());
    }
    let mut factor = PadicNumber::one(p, max_precision(p));
    for j in 1..=s as i128 {
        let f = n as i128 + (j - 2) * m as i128 - (j - 1);
        factor = factor.mul(&PadicNumber::from_i128(p, f, max_precision(p)))?;
        if factor.is_zero() {
            return Ok(VectorField::zero(p, prec));
        }
    }
    let exp = n as i128 + s as i128 * (m as i128 - 1);
    if exp < 0 {
        return Err(Error::Domain(format!(
            "(ad u)^{s} v leaves the polynomial fields (degree {exp})"
        )));
    }
    let mut cs = PadicNumber::one(p, prec.max(1));
    for _ in 0..s {
        cs = cs.mul(&c)?;
    }
    let coeff = cs.mul(&z)?.mul(&factor)?;
    VectorField::monomial(p, prec, coeff, exp as usize)
}

/// Iterated bracket `(ad u)^s v` computed the long way (for the closed
/// form to be checked against).
pub fn ad_power_iterated(
    u: &VectorField,
    v: &VectorField,
    s: u32,
    cap: usize,
) -> Result<VectorField> {
    let mut acc = v.clone();
    for _ in 0..s {
        acc = bracket(u, &acc, cap)?;
    }
    Ok(acc)
}

/// `gamma(k, m) = prod_{j=1}^{k-1} (j(m-1) + 1)`, the integer coefficient
/// in the monomial flow; `gamma(0, m) = gamma(1, m) = 1`.
pub fn gamma_coefficient(p: u64, k: u32, m: u32) -> Result<PadicNumber> {
    let mut g = PadicNumber::one(p, max_precision(p));
    for j in 1..k as i128 {
        g = g.mul(&PadicNumber::from_i128(
            p,
            j * (m as i128 - 1) + 1,
            max_precision(p),
        ))?;
    }
    Ok(g)
}

/// The closed-form monomial flow
/// `g^q_m(x) = sum_k q^k x^(k(m-1)+1) gamma(k, m) / k!` for `|q| <= 1/p`.
/// Detects divergence (non-increasing term valuations) and reports it.
pub fn monomial_flow(p: u64, prec: u32, m: u32, q: &PadicNumber, terms: u32) -> Result<MahlerSeries> {
    if !q.val_lower().at_most(1) {
        return Err(Error::Domain("monomial flow requires |q| <= 1/p".into()));
    }
    let mut degree = 1usize;
    for k in 0..=terms {
        let e = k as i128 * (m as i128 - 1) + 1;
        if e >= 0 {
            degree = degree.max(e as usize);
        }
    }
    let mut mono = vec![PadicNumber::zero(p); degree + 1];
    let mut qpow = PadicNumber::one(p, prec.max(1));
    let mut fact = PadicNumber::one(p, max_precision(p));
    let mut first_val = None;
    for k in 0..=terms {
        if k > 0 {
            qpow = qpow.mul(q)?;
            fact = fact.mul(&PadicNumber::from_i128(p, k as i128, max_precision(p)))?;
        }
        let gamma = gamma_coefficient(p, k, m)?;
        if gamma.is_zero() {
            break; // flow terminates (translations)
        }
        let e = k as i128 * (m as i128 - 1) + 1;
        if e < 0 {
            break;
        }
        let coeff = qpow.mul(&gamma)?.div(&fact)?;
        // divergence shows up as term valuations falling back to the
        // first term's level instead of growing past it
        match (k, coeff.val_lower(), first_val) {
            (1, v, _) => first_val = Some(v),
            (k, Val::Finite(now), Some(Val::Finite(start))) if k >= 2 && now <= start => {
                return Err(Error::Convergence(format!(
                    "term valuations stopped increasing at k={k} ({now} <= {start})"
                )));
            }
            _ => {}
        }
        mono[e as usize] = mono[e as usize].add(&coeff)?;
    }
    from_monomial(p, prec, &mono)
}

/// One step record of the logarithm iteration.
#[derive(Debug, Clone, Copy)]
pub struct LogStep {
    pub j: u32,
    /// `||A(j) - A(j-1)||` in the Gauss norm.
    pub change: Val,
    /// `||A(j)||` in the Gauss norm.
    pub norm: Val,
}

/// Result of [`log_diffeo`]: the field plus the per-step iteration log.
#[derive(Debug, Clone)]
pub struct LogResult {
    pub field: VectorField,
    pub steps: Vec<LogStep>,
}

/// `S_B(X) = sum_{k>=1} B^k(X) / (k+1)!`, the correction operator of the
/// logarithm equation, truncated like the exponential pipeline.
fn correction(
    p: u64,
    b: &[PadicNumber],
    x: &[PadicNumber],
    cap: usize,
    stop: i64,
) -> Result<Vec<PadicNumber>> {
    let mut acc = vec![PadicNumber::zero(p)];
    let mut w = x.to_vec();
    let mut fact = PadicNumber::one(p, max_precision(p));
    for k in 1..=(4 * stop.max(4) as usize) {
        let (next, _disc) = apply_field(p, b, &w, cap)?;
        w = next;
        fact = fact.mul(&PadicNumber::from_i128(p, (k + 1) as i128, max_precision(p)))?;
        let term: Vec<PadicNumber> = w
            .iter()
            .map(|c| c.div(&fact))
            .collect::<Result<Vec<_>>>()?;
        let tv = poly_min_val(&term);
        if tv == Val::Infinite || tv.at_most(stop) {
            break;
        }
        acc = poly_add(p, &acc, &term)?;
    }
    Ok(acc)
}

/// Logarithm of a near-identity map: the unique field `A` with
/// `exp_field(A, 1) = f`, found by the iteration
/// `(I + S_{A(j)}) A(j+1) = P` with `A(0) = P = f - id`. Each linear
/// solve runs the Neumann iteration, valid because `||S|| <= 1/p` on the
/// admissible ball. Steps record the contraction `||A(j+1) - A(j)||` and
/// the norm preservation `||A(j)|| = ||P||`.
pub fn log_diffeo(f: &Diffeo, max_iter: u32, cap: usize, stop: i64) -> Result<LogResult> {
    let p = f.prime();
    let need = exp_domain_exponent(p);
    if !f.w_member() {
        return Err(Error::Domain("log is defined on W only".into()));
    }
    // the cached monomial view, when present, avoids the factorial
    // denominators of the basis change
    let pfield = match f.u_mono() {
        Some(mono) => mono.to_vec(),
        None => mahler::to_monomial(f.u())?,
    };
    if !gauss_norm(&pfield).at_most(need) {
        return Err(Error::Domain(format!(
            "log requires the analytic ball ||f - id|| <= p^-{need}, got {}",
            gauss_norm(&pfield)
        )));
    }
    let prec = f.u().precision();
    let mut t = pfield.clone();
    let mut steps = Vec::new();
    let mut converged = false;
    for j in 1..=max_iter {
        // solve (I + S_t) X = P by Neumann iteration
        let mut x = pfield.clone();
        let mut solved = false;
        for _ in 0..(2 * stop.max(4) as usize + 8) {
            let s_x = correction(p, &t, &x, cap, stop)?;
            let neg = s_x.iter().map(|c| c.neg()).collect::<Vec<_>>();
            let next = poly_add(p, &pfield, &neg)?;
            let delta = poly_add(
                p,
                &next,
                &x.iter().map(|c| c.neg()).collect::<Vec<_>>(),
            )?;
            x = next;
            if delta.iter().all(|c| c.is_zero_to_precision()) {
                solved = true;
                break;
            }
        }
        if !solved {
            return Err(Error::Convergence(format!(
                "Neumann iteration stagnated at outer step {j}"
            )));
        }
        let diff = poly_add(p, &x, &t.iter().map(|c| c.neg()).collect::<Vec<_>>())?;
        let change = gauss_norm(&diff);
        let norm = gauss_norm(&x);
        steps.push(LogStep { j, change, norm });
        t = x;
        // representational fixpoint: nothing left to move at working
        // precision (or the explicit tolerance was reached earlier)
        if diff.iter().all(|c| c.is_zero_to_precision())
            || change.at_most(stop.min(max_iter as i64))
        {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "outer iteration stagnated above tolerance: residual {}",
            steps.last().map(|s| s.change).unwrap_or(Val::Infinite)
        )));
    }
    let field = VectorField::from_monomial(p, prec, t)?;
    Ok(LogResult { field, steps })
}

/// Distance between `exp((q1+q2) A)` and `exp(q1 A) . exp(q2 A)` at
/// `C(0)`: the one-parameter subgroup defect, `Infinite` when the two
/// representations agree exactly.
pub fn one_param_check(
    field: &VectorField,
    q1: &PadicNumber,
    q2: &PadicNumber,
    cap: usize,
    stop: i64,
    l_max: u32,
) -> Result<Val> {
    let sum = q1.add(q2)?;
    let both = exp_field(field, &sum, cap, stop, l_max)?;
    let g1 = exp_field(field, q1, cap, stop, l_max)?;
    let g2 = exp_field(field, q2, cap, stop, l_max)?;
    let composed = g1.g.compose(&g2.g)?;
    // defect of the degree-capped representations: the independent
    // generic tail bounds of the two truncations are not part of the
    // subgroup-law claim
    Ok(both.g.u().sub(composed.u())?.coeff_sup_stored())
}

/// Residual of the flow ODE `d g^q(x) / d q = a(g^q(x))`: the worst
/// `C(0)` defect of the difference quotient in `q` against `a . g^q`,
/// sampled on integer points mod `p^level`.
pub fn flow_ode_residual(
    field: &VectorField,
    q: &PadicNumber,
    dq: &PadicNumber,
    cap: usize,
    stop: i64,
    level: u32,
) -> Result<Val> {
    let p = field.prime();
    if dq.is_zero_to_precision() {
        return Err(Error::Domain("zero increment".into()));
    }
    let g_q = exp_field(field, q, cap, stop, 1)?;
    let shifted = q.add(dq)?;
    let g_q2 = exp_field(field, &shifted, cap, stop, 1)?;
    let mut worst = Val::Infinite;
    for x in 0..(p as i64).pow(level) {
        let a = g_q2.g.apply_int(x)?;
        let b = g_q.g.apply_int(x)?;
        let quotient = a.sub(&b)?.div(dq)?;
        let target = field.coeff().evaluate(&b)?;
        let defect = quotient.sub(&target)?.val_lower();
        worst = worst.max(defect);
    }
    Ok(worst)
}

/// Campbell-Hausdorff series of `u` and `v` to the given order (at most 4).
pub fn bch_series(u: &VectorField, v: &VectorField, order: u32, cap: usize) -> Result<VectorField> {
    if order == 0 || order > 4 {
        return Err(Error::Domain(format!("BCH order {order} unsupported (1..=4)")));
    }
    let p = u.prime();
    let prec = u.precision().min(v.precision());
    let mut w = u.add(v)?;
    if order >= 2 {
        let uv = bracket(u, v, cap)?;
        let half = PadicNumber::one(p, prec).div(&PadicNumber::from_integer(p, 2, max_precision(p)))?;
        w = w.add(&uv.scale(&half)?)?;
    }
    if order >= 3 {
        let uv = bracket(u, v, cap)?;
        let uuv = bracket(u, &uv, cap)?;
        let vvu = bracket(v, &bracket(v, u, cap)?, cap)?;
        let twelfth =
            PadicNumber::one(p, prec).div(&PadicNumber::from_integer(p, 12, max_precision(p)))?;
        w = w.add(&uuv.add(&vvu)?.scale(&twelfth)?)?;
    }
    if order >= 4 {
        let uv = bracket(u, v, cap)?;
        let uuv = bracket(u, &uv, cap)?;
        let vuuv = bracket(v, &uuv, cap)?;
        let m24 = PadicNumber::from_integer(p, -24, max_precision(p));
        let c = PadicNumber::one(p, prec).div(&m24)?;
        w = w.add(&vuuv.scale(&c)?)?;
    }
    Ok(w)
}

/// `C(0)` distance between `exp(w)` for the order-`r` Campbell-Hausdorff
/// sum and the composition `exp(u) . exp(v)`. A finite exponent exhibits
/// the failure of the Banach-Lie property at this truncation; commuting
/// terminating fields agree exactly (`Infinite`).
///
/// Flows compose through pullbacks, which reverses the operator order:
/// `exp(u) . exp(v)` (apply `v` first) is the flow of `BCH(v, u)`.
pub fn bch_discrepancy(
    u: &VectorField,
    v: &VectorField,
    order: u32,
    cap: usize,
    stop: i64,
    l_max: u32,
) -> Result<Val> {
    let one = PadicNumber::one(u.prime(), u.precision());
    let w = bch_series(v, u, order, cap)?;
    let ew = exp_field(&w, &one, cap, stop, l_max)?;
    let eu = exp_field(u, &one, cap, stop, l_max)?;
    let ev = exp_field(v, &one, cap, stop, l_max)?;
    let composed = eu.g.compose(&ev.g)?;
    // compare the stored truncations, as in the subgroup-law defect
    Ok(ew.g.u().sub(composed.u())?.coeff_sup_stored())
}

/// Solve `[A, d/dx] = C` by antidifferentiation: `A = -P(C) d/dx` where
/// `P` is the antiderivative vanishing at 0.
pub fn solve_commutator(c_field: &VectorField) -> Result<VectorField> {
    let anti = mahler::antiderivative(c_field.coeff())?;
    let minus_one = PadicNumber::from_integer(c_field.prime(), -1, c_field.precision().max(1));
    VectorField::from_mahler(anti.scale(&minus_one)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mahler::CtIndex;

    const P: u64 = 3;
    const N: u32 = 16;
    const CAP: usize = 24;
    const LMAX: u32 = 3;

    fn pd(k: i64) -> PadicNumber {
        PadicNumber::from_integer(P, k, N)
    }

    fn field(mono: &[i64]) -> VectorField {
        VectorField::from_monomial(P, N, mono.iter().map(|&c| pd(c)).collect()).unwrap()
    }

    #[test]
    fn bracket_examples() {
        // [u, u] = 0
        let u = field(&[0, 0, 9]);
        assert!(bracket(&u, &u, CAP).unwrap().is_zero());
        // monomials: [x^m, x^n] = (n - m) x^(m+n-1), here scaled by p^2 each
        let v = field(&[0, 0, 0, 9]);
        let b = bracket(&u, &v, CAP).unwrap();
        let expect = field(&[0, 0, 0, 0, 81]); // (3-2) * 81 x^4
        assert!(b.sub(&expect).unwrap().is_zero());
        // u = p^2 d/dx, v = p^2 x d/dx -> p^4 d/dx
        let u0 = field(&[9]);
        let v1 = field(&[0, 9]);
        let b2 = bracket(&u0, &v1, CAP).unwrap();
        assert!(b2.sub(&field(&[81])).unwrap().is_zero());
    }

    #[test]
    fn ad_power_closed_form() {
        // s=2, m=2, n=3: factors (n-m)(n-1) = 1*2, exponent 5
        let u = VectorField::monomial(P, N, pd(1), 2).unwrap();
        let v = VectorField::monomial(P, N, pd(1), 3).unwrap();
        let a = ad_power(&u, &v, 2).unwrap();
        let expect = field(&[0, 0, 0, 0, 0, 2]);
        assert!(a.sub(&expect).unwrap().is_zero());
        // n = m: zero for all s
        let w = VectorField::monomial(P, N, pd(5), 2).unwrap();
        for s in 1..=4 {
            assert!(ad_power(&u, &w, s).unwrap().is_zero(), "s={s}");
        }
    }

    #[test]
    fn ad_power_matches_iterated_bracket() {
        for m in 0..=4usize {
            for n in 0..=4usize {
                let u = VectorField::monomial(P, N, pd(9), m).unwrap();
                let v = VectorField::monomial(P, N, pd(18), n).unwrap();
                for s in 1..=4u32 {
                    let closed = match ad_power(&u, &v, s) {
                        Ok(c) => c,
                        // leaving polynomial degrees can only happen when
                        // the iterated bracket also left (m = 0 cases
                        // terminate in zero first)
                        Err(_) => continue,
                    };
                    let iter = ad_power_iterated(&u, &v, s, 64).unwrap();
                    assert!(
                        closed.sub(&iter).unwrap().is_zero(),
                        "m={m} n={n} s={s}"
                    );
                }
            }
        }
    }

    #[test]
    fn exp_zero_and_translation() {
        let zero = VectorField::zero(P, N);
        let r = exp_field(&zero, &pd(1), CAP, N as i64, LMAX).unwrap();
        let id = Diffeo::identity(P, N, LMAX);
        assert_eq!(r.g.distance(&id, CtIndex(0), 1).unwrap(), Val::Infinite);
        // A = p^2 d/dx: series terminates after two terms, g = x + p^2
        let a = field(&[9]);
        let r = exp_field(&a, &pd(1), CAP, N as i64, LMAX).unwrap();
        assert!(r.g.u().coeff(0).agrees_mod(&pd(9), 12));
        assert!(r.g.u().coeff(1).is_zero());
        assert_eq!(r.terms_used, 1);
    }

    #[test]
    fn exp_linear_field_is_scalar_exp() {
        // A = p^2 x d/dx, q = 1: g = exp_scalar(p^2) x
        let a = field(&[0, 9]);
        let r = exp_field(&a, &pd(1), CAP, N as i64, LMAX).unwrap();
        let e = crate::padic::exp_scalar(&pd(9)).unwrap();
        let got = r.g.apply_int(1).unwrap();
        assert!(got.agrees_mod(&e, 12), "{got} vs {e}");
    }

    #[test]
    fn exp_norm_too_large_rejected() {
        let a = field(&[0, 3]); // norm p^-1 > p^-2
        assert!(matches!(
            exp_field(&a, &pd(1), CAP, N as i64, LMAX),
            Err(Error::Convergence(_))
        ));
    }

    #[test]
    fn monomial_flow_examples() {
        // m = 0: x + q
        let f = monomial_flow(P, N, 0, &pd(3), 20).unwrap();
        assert!(f.coeff(0).agrees_mod(&pd(3), 12));
        assert!(f.coeff(1).agrees_mod(&pd(1), 12));
        // m = 1: exp_scalar(q) x
        let f = monomial_flow(P, N, 1, &pd(9), 30).unwrap();
        let e = crate::padic::exp_scalar(&pd(9)).unwrap();
        assert!(f.evaluate_at_int(1).unwrap().agrees_mod(&e, 12));
        // m = 2: coefficients of x^(k+1) are q^k exactly
        let q = pd(3);
        let f = monomial_flow(P, N, 2, &q, 12).unwrap();
        let mono = mahler::to_monomial(&f).unwrap();
        let mut qk = PadicNumber::one(P, N);
        for k in 0..=10usize {
            assert!(mono[k + 1].agrees_mod(&qk, 10), "k={k}");
            qk = qk.mul(&q).unwrap();
        }
    }

    #[test]
    fn monomial_flow_agrees_with_exp_field() {
        for m in 0..=3u32 {
            let q = pd(9);
            let flow = monomial_flow(P, N, m, &q, 16).unwrap();
            let a = VectorField::monomial(P, N, q.clone(), m as usize).unwrap();
            let r = exp_field(&a, &pd(1), 40, N as i64, 1).unwrap();
            for x in 0..9i64 {
                let lhs = flow.evaluate_at_int(x).unwrap();
                let rhs = r.g.apply_int(x).unwrap();
                assert!(lhs.agrees_mod(&rhs, 11), "m={m} x={x}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn monomial_flow_divergence_detected() {
        // |q| = 1 violates the domain outright
        assert!(monomial_flow(P, N, 2, &pd(1), 10).is_err());
        // p = 2, m = 1 with v(q) = 1: the 1/k! terms stall at bounded
        // valuation (digit sums), which the detector must flag
        let q2 = PadicNumber::from_integer(2, 2, 20);
        assert!(matches!(
            monomial_flow(2, 20, 1, &q2, 16),
            Err(Error::Convergence(_) | Error::Domain(_))
        ));
    }

    #[test]
    fn log_of_identity_and_translation() {
        let id = Diffeo::identity(P, N, LMAX);
        let r = log_diffeo(&id, N, CAP, N as i64).unwrap();
        assert!(r.field.is_zero());
        // f = x + p^2 -> A = p^2 d/dx
        let a = field(&[9]);
        let f = exp_field(&a, &pd(1), CAP, N as i64, LMAX).unwrap();
        let r = log_diffeo(&f.g, N, CAP, N as i64).unwrap();
        assert!(r.field.mono()[0].agrees_mod(&pd(9), 12));
    }

    #[test]
    fn log_of_linear_scaling_matches_scalar_log() {
        // f = (1 + p^2) x -> A = log(1 + p^2) x d/dx
        let u = from_monomial(P, N, &[pd(0), pd(9)]).unwrap();
        let f = Diffeo::from_series(u, LMAX).unwrap();
        let r = log_diffeo(&f, N, CAP, N as i64).unwrap();
        let expect = crate::padic::log_scalar(&pd(10)).unwrap();
        assert!(
            r.field.mono()[1].agrees_mod(&expect, 12),
            "{} vs {expect}",
            r.field.mono()[1]
        );
        // round trip
        let back = exp_field(&r.field, &pd(1), CAP, N as i64, LMAX).unwrap();
        assert!(back.g.distance(&f, CtIndex(0), 1).unwrap().at_most(12));
    }

    #[test]
    fn log_iteration_contract() {
        let a = field(&[0, 9, 9, 0, 9]);
        let f = exp_field(&a, &pd(1), CAP, N as i64, LMAX).unwrap();
        let r = log_diffeo(&f.g, N, CAP, N as i64).unwrap();
        let pnorm = gauss_norm(&mahler::to_monomial(f.g.u()).unwrap());
        for step in &r.steps {
            // (ii): ||A(j) - A(j-1)|| <= p^-j ||P||
            if let (Val::Finite(c), Val::Finite(pn)) = (step.change, pnorm) {
                assert!(c >= step.j as i64 + pn, "step {}: {c} < j+{pn}", step.j);
            }
            // (iii): ||A(j)|| = ||P||
            assert_eq!(step.norm, pnorm, "step {}", step.j);
        }
        // recovered field equals the original
        let d = r.field.sub(&a).unwrap();
        assert!(d.norm().at_most(12), "residual {}", d.norm());
    }

    #[test]
    fn one_param_subgroup_examples() {
        // translations compose exactly
        let a = field(&[9]);
        let v = one_param_check(&a, &pd(1), &pd(4), CAP, N as i64, LMAX).unwrap();
        assert_eq!(v, Val::Infinite);
        // q2 = 0
        let b = field(&[0, 0, 9]);
        let v = one_param_check(&b, &pd(5), &pd(0), CAP, N as i64, LMAX).unwrap();
        assert_eq!(v, Val::Infinite);
        // generic field: defect below working precision
        let v = one_param_check(&b, &pd(1), &pd(1), CAP, N as i64, LMAX).unwrap();
        assert!(v.at_most(N as i64 - 4), "defect {v}");
    }

    #[test]
    fn flow_ode_holds() {
        let a = field(&[0, 0, 9]);
        // the quotient error scales with |dq| (second-derivative term)
        let r = flow_ode_residual(&a, &pd(1), &pd(3), CAP, N as i64, 2).unwrap();
        assert!(r.at_most(4), "ODE residual {r}");
        let r2 = flow_ode_residual(&a, &pd(1), &pd(27), CAP, N as i64, 2).unwrap();
        assert!(r2.at_most(6), "ODE residual {r2}");
        // the optimal increment balances the first-order error v(dq)+2
        // against the quotient's precision N - v(dq): v(dq) = 7 gives 9
        let deep = pd(3i64.pow(7));
        let r3 = flow_ode_residual(&a, &pd(1), &deep, CAP, N as i64, 2).unwrap();
        assert!(r3.at_most(9), "ODE residual {r3}");
    }

    #[test]
    fn p2_round_trip_with_stricter_ball() {
        // p = 2 requires ||A|| <= p^-3 for the term valuations to climb
        let p2 = 2u64;
        let n2 = 24u32;
        let pd2 = |k: i64| PadicNumber::from_integer(p2, k, n2);
        let a = VectorField::from_monomial(p2, n2, vec![pd2(8), pd2(16), pd2(8)]).unwrap();
        let f = exp_field(&a, &pd2(1), CAP, n2 as i64, 3).unwrap();
        assert!(f.g.w_member());
        let r = log_diffeo(&f.g, n2, CAP, n2 as i64).unwrap();
        let d = r.field.sub(&a).unwrap().norm();
        assert!(d.at_most(n2 as i64 - 8), "p=2 round trip {d}");
        // a norm p^-2 field is outside the p = 2 ball
        let too_big = VectorField::from_monomial(p2, n2, vec![pd2(4)]).unwrap();
        assert!(exp_field(&too_big, &pd2(1), CAP, n2 as i64, 3).is_err());
    }

    #[test]
    fn exp_of_log_recovers_the_map() {
        let mut rng = crate::sample::rng(44);
        for _ in 0..5 {
            let f = crate::sample::random_w_diffeo(&mut rng, P, N, 4, LMAX).unwrap();
            let r = log_diffeo(&f, N, CAP, N as i64).unwrap();
            let back = exp_field(&r.field, &pd(1), CAP, N as i64, LMAX).unwrap();
            let d = back.g.distance(&f, CtIndex(0), 1).unwrap();
            assert!(d.at_most(N as i64 - 4), "round trip {d}");
        }
    }

    #[test]
    fn bch_examples() {
        // v = 0: exp(w) = exp(u) exactly
        let u = field(&[9]);
        let z = VectorField::zero(P, N);
        let d = bch_discrepancy(&u, &z, 4, CAP, N as i64, LMAX).unwrap();
        assert_eq!(d, Val::Infinite);
        // commuting translations: exact agreement
        let v = field(&[27]);
        let d = bch_discrepancy(&u, &v, 4, CAP, N as i64, LMAX).unwrap();
        assert_eq!(d, Val::Infinite);
        // commuting monomials of equal degree: agreement to precision
        let u2 = field(&[0, 0, 9]);
        let v2 = field(&[0, 0, 18]);
        let d = bch_discrepancy(&u2, &v2, 4, CAP, N as i64, LMAX).unwrap();
        assert!(d.at_most(N as i64 - 4), "commuting defect {d}");
        // the order-4 truncation genuinely differs for non-commuting fields
        let u3 = field(&[0, 0, 9]);
        let v3 = field(&[0, 0, 0, 9]);
        let d = bch_discrepancy(&u3, &v3, 4, CAP, N as i64, LMAX).unwrap();
        assert!(matches!(d, Val::Finite(w) if w < N as i64 - 4), "defect {d}");
        // unsupported order
        assert!(bch_discrepancy(&u3, &v3, 5, CAP, N as i64, LMAX).is_err());
    }

    #[test]
    fn bch_matches_closed_form_composition() {
        // u = q x d/dx flows to e^q x, v = c d/dx to x + c; their
        // composition solves x' = qx + b with b = qc e^q/(e^q - 1),
        // whose series the order-4 BCH sum must reproduce mod q^5
        let q = pd(9);
        let c = pd(9);
        let u = VectorField::monomial(P, N, q.clone(), 1).unwrap();
        let v = VectorField::monomial(P, N, c.clone(), 0).unwrap();
        let d = bch_discrepancy(&u, &v, 4, CAP, N as i64, LMAX).unwrap();
        // the order-5 remainder: valuation 5*v(q) = 10 minus v_3(720) = 2
        assert!(d.at_most(8), "BCH order-4 residual {d}");
        // order 1 (w = u + v) must be visibly wrong: error at ~ [u,v]/2
        let d1 = bch_discrepancy(&u, &v, 1, CAP, N as i64, LMAX).unwrap();
        assert!(matches!(d1, Val::Finite(w) if w <= 5), "order-1 residual {d1}");
    }

    #[test]
    fn solve_commutator_examples() {
        let z = VectorField::zero(P, N);
        assert!(solve_commutator(&z).unwrap().is_zero());
        // C = c d/dx -> A = -c x d/dx
        let c = field(&[9]);
        let a = solve_commutator(&c).unwrap();
        assert!(a.sub(&field(&[0, -9])).unwrap().is_zero());
        // C = p^2 x d/dx -> A = -p^2 x^2/2 d/dx, and [A, d/dx] = C
        let c2 = field(&[0, 9]);
        let a2 = solve_commutator(&c2).unwrap();
        let b = VectorField::unit(P, N);
        let back = bracket(&a2, &b, CAP).unwrap();
        let d = back.sub(&c2).unwrap();
        assert!(d.norm().at_most(12), "residual {}", d.norm());
    }
}
