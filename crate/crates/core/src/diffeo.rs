//! The group of near-identity homeomorphisms of `Z_p`.
//!
//! A [`Diffeo`] keeps two views of `f`: the Mahler series of `u = f - id`
//! and cached permutation tables of `Z/p^l` for `l = 1..=l_max`. Group
//! operations are exact on the tables; the series is re-extracted from
//! values after each operation. The tables are the ground truth -- the
//! group is a projective limit of its finite quotients -- while the series
//! carries the analytic data (norms, flows, logarithms).
//!
//! The clopen ball `W` is `{f : dist(f, id) <= p^-2}`; its members are
//! isometries, which [`Diffeo::is_isometry`] checks exhaustively on any
//! cached level.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mahler::{
    self, basis_norm_j, mahler_coeffs_from_values, CtIndex, MahlerJson, MahlerSeries,
};
use crate::padic::{factorial_valuation, PadicNumber, Val};

/// Which representation is authoritative for this element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReprKind {
    /// Built from a Mahler series; tables derived by evaluation.
    Series,
    /// Built from value tables (locally constant maps such as ball swaps);
    /// the series is a mod-`p^l_max` shadow with an explicit tail bound.
    ValueTable,
}

/// A homeomorphism `f: Z_p -> Z_p` near the identity.
#[derive(Debug, Clone)]
pub struct Diffeo {
    u: MahlerSeries,
    kind: ReprKind,
    tables: Vec<Vec<u64>>,
    ball_member: bool,
    w_member: bool,
    /// Monomial coefficients of `u` when the element came out of a
    /// monomial pipeline (flows). Basis changes divide by factorials, so
    /// keeping the original view preserves precision for the logarithm.
    u_mono: Option<Vec<PadicNumber>>,
}

fn check_tables(p: u64, tables: &[Vec<u64>]) -> Result<()> {
    for (i, t) in tables.iter().enumerate() {
        let l = i as u32 + 1;
        let size = p.pow(l) as usize;
        if t.len() != size {
            return Err(Error::Integrity(format!("level {l} table has wrong size")));
        }
        let mut seen = vec![false; size];
        for &v in t {
            if v as usize >= size || seen[v as usize] {
                return Err(Error::Integrity(format!(
                    "level {l} table is not a bijection of Z/{p}^{l}"
                )));
            }
            seen[v as usize] = true;
        }
        if i > 0 {
            // tower compatibility with the previous level
            let q = p.pow(l - 1);
            for (x, &v) in t.iter().enumerate() {
                if tables[i - 1][x % q as usize] != v % q {
                    return Err(Error::Integrity(format!(
                        "levels {} and {l} are not tower-compatible at x={x}",
                        l - 1
                    )));
                }
            }
        }
    }
    Ok(())
}

fn isometry_on_table(p: u64, table: &[u64], l: u32) -> bool {
    let q = p.pow(l);
    let vp = |k: u64| -> u32 {
        if k == 0 {
            return l;
        }
        let mut k = k;
        let mut v = 0;
        while k.is_multiple_of(p) {
            k /= p;
            v += 1;
        }
        v.min(l)
    };
    for x in 0..q {
        for y in 0..x {
            let lhs = vp((table[x as usize] + q - table[y as usize]) % q);
            let rhs = vp(x - y);
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

impl Diffeo {
    pub fn prime(&self) -> u64 {
        self.u.prime()
    }

    /// Number of cached levels.
    pub fn levels(&self) -> u32 {
        self.tables.len() as u32
    }

    /// The series of `f - id`.
    pub fn u(&self) -> &MahlerSeries {
        &self.u
    }

    pub fn kind(&self) -> ReprKind {
        self.kind
    }

    /// Membership flag for the clopen ball `W` (`C(0)` distance to the
    /// identity at most `p^-2`, isometry on the top cached level).
    pub fn w_member(&self) -> bool {
        self.w_member
    }

    /// Membership in the unit group ball (`C(0)` distance at most `p^-1`).
    pub fn ball_member(&self) -> bool {
        self.ball_member
    }

    pub fn identity(p: u64, prec: u32, l_max: u32) -> Self {
        let u = MahlerSeries::zero(p, prec);
        let tables = (1..=l_max)
            .map(|l| (0..p.pow(l)).collect())
            .collect();
        Diffeo { u, kind: ReprKind::Series, tables, ball_member: true, w_member: true, u_mono: None }
    }

    /// Build from the monomial coefficients of `f - id`, caching them so
    /// later logarithms avoid the factorial denominators of the basis
    /// change.
    pub fn from_monomial_u(
        p: u64,
        prec: u32,
        mono: Vec<PadicNumber>,
        l_max: u32,
    ) -> Result<Self> {
        let series = mahler::from_monomial(p, prec, &mono)?;
        let mut f = Self::from_series(series, l_max)?;
        f.u_mono = Some(mono);
        Ok(f)
    }

    /// Cached monomial view of `f - id`, when the element came out of a
    /// monomial pipeline.
    pub fn u_mono(&self) -> Option<&[PadicNumber]> {
        self.u_mono.as_deref()
    }

    /// Attach a monomial view (the caller vouches it describes `u`).
    pub fn with_u_mono(mut self, mono: Vec<PadicNumber>) -> Self {
        self.u_mono = Some(mono);
        self
    }

    /// Build from the series of `f - id`; derives and validates the
    /// permutation tables.
    pub fn from_series(u: MahlerSeries, l_max: u32) -> Result<Self> {
        if !u.is_integral() {
            return Err(Error::Domain(
                "f - id must map Z_p into Z_p (some |a_m| > 1)".into(),
            ));
        }
        let p = u.prime();
        let top = p.pow(l_max);
        let mut uvals = Vec::with_capacity(top as usize);
        for k in 0..top {
            let v = u.evaluate_at_int(k as i64)?;
            uvals.push(v.residue_mod(l_max)? as u64);
        }
        let mut tables = Vec::with_capacity(l_max as usize);
        for l in 1..=l_max {
            let q = p.pow(l);
            let t: Vec<u64> = (0..q).map(|x| (x + uvals[x as usize]) % q).collect();
            tables.push(t);
        }
        check_tables(p, &tables)?;
        let sup = u.coeff_sup();
        let ball_member = sup.at_most(1);
        let w_member = sup.at_most(2) && isometry_on_table(p, &tables[tables.len() - 1], l_max);
        Ok(Diffeo { u, kind: ReprKind::Series, tables, ball_member, w_member, u_mono: None })
    }

    /// Build from a rule giving exact values of `f` on `0..p^l_max` (used
    /// for locally constant elements whose Mahler series does not
    /// terminate); coefficients come from the values at `0..=degree`.
    pub fn from_integer_values(
        p: u64,
        prec: u32,
        l_max: u32,
        f_at: impl Fn(u64) -> u64,
        degree: usize,
        tail_val: Val,
    ) -> Result<Self> {
        let mut tables = Vec::with_capacity(l_max as usize);
        for l in 1..=l_max {
            let q = p.pow(l);
            let t: Vec<u64> = (0..q).map(|x| f_at(x) % q).collect();
            tables.push(t);
        }
        check_tables(p, &tables)?;
        let values: Vec<PadicNumber> = (0..=degree as u64)
            .map(|k| {
                let fk = f_at(k) as i128 - k as i128;
                PadicNumber::from_i128(p, fk, prec)
            })
            .collect();
        let u = mahler_coeffs_from_values(p, prec, &values, degree, tail_val)?;
        let sup = u.coeff_sup();
        let ball_member = sup.at_most(1);
        let w_member =
            sup.at_most(2) && isometry_on_table(p, &tables[tables.len() - 1], l_max);
        Ok(Diffeo { u, kind: ReprKind::ValueTable, tables, ball_member, w_member, u_mono: None })
    }

    /// `f(x) = x + u(x)`.
    pub fn apply(&self, x: &PadicNumber) -> Result<PadicNumber> {
        x.add(&self.u.evaluate(x)?)
    }

    pub fn apply_int(&self, x: i64) -> Result<PadicNumber> {
        self.apply(&PadicNumber::from_integer(self.prime(), x, self.u.precision().max(1)))
    }

    /// Cached table at level `l`.
    pub fn table(&self, l: u32) -> Result<&[u64]> {
        if l == 0 || l as usize > self.tables.len() {
            return Err(Error::Domain(format!(
                "level {l} beyond cached range 1..={}",
                self.tables.len()
            )));
        }
        Ok(&self.tables[l as usize - 1])
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.prime() != other.prime() {
            return Err(Error::Domain("mismatched primes".into()));
        }
        if self.tables.len() != other.tables.len() {
            return Err(Error::Domain("mismatched cached levels".into()));
        }
        Ok(())
    }

    /// Decay exponent `c` with `v(a_m) >= c + v_p(m!)` across the stored
    /// coefficients, i.e. a monomial Gauss norm bound `p^-c` on the
    /// stored polynomial part of `u`. `None` when that part is zero.
    fn gauss_decay(&self) -> Option<i64> {
        let p = self.prime();
        let mut c = i64::MAX;
        for (m, a) in self.u.coeffs().iter().enumerate() {
            match a.val_lower() {
                Val::Infinite => continue,
                Val::Finite(v) => c = c.min(v - factorial_valuation(m as u64, p) as i64),
            }
        }
        if c == i64::MAX {
            None // stored part is zero
        } else {
            Some(c)
        }
    }

    /// Degree of `u` with trailing zero coefficients dropped; `None` when
    /// `u = 0`.
    fn true_degree(&self) -> Option<usize> {
        self.u
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, _)| m)
            .max()
    }

    /// Tail bound for `h = f . g`: the stored polynomial parts contribute
    /// Mahler coefficients bounded by their Gauss decay times `|m!|`, and
    /// each unknown tail enters `h - id` with its own sup bound.
    fn composed_tail(&self, other: &Self, degree: usize) -> Val {
        let p = self.prime();
        if self.u.tail_val() == Val::Infinite && other.u.tail_val() == Val::Infinite {
            // h - id = u_g + u_f(id + u_g): exactly a polynomial of
            // degree deg(u_f) * max(1, deg(u_g)) (or deg(u_g)); if the
            // extraction degree covers it, nothing is lost
            let df = self.true_degree();
            let dg = other.true_degree();
            let true_deg = match (df, dg) {
                (None, None) => 0,
                (None, Some(d)) => d,
                (Some(d), None) => d,
                (Some(df), Some(dg)) => dg.max(df * dg.max(1)),
            };
            if true_deg <= degree {
                return Val::Infinite;
            }
        }
        let poly_part = match (self.gauss_decay(), other.gauss_decay()) {
            (Some(cf), Some(cg)) if cf.min(cg) >= 1 => {
                Val::Finite(cf.min(cg) + factorial_valuation(degree as u64 + 1, p) as i64)
            }
            (None, Some(c)) | (Some(c), None) if c >= 1 => {
                Val::Finite(c + factorial_valuation(degree as u64 + 1, p) as i64)
            }
            (None, None) => Val::Infinite,
            // integer-valued u always has |a_m| <= 1
            _ => Val::Finite(0),
        };
        poly_part.max(self.u.tail_val()).max(other.u.tail_val())
    }

    /// Composition `f . g` (apply `g` first): exact table composition on
    /// every cached level plus Mahler re-extraction to the degree bound.
    pub fn compose(&self, g: &Diffeo) -> Result<Diffeo> {
        self.check_compatible(g)?;
        // composing with the exact identity is the algebraic identity
        if g.u.is_exactly_zero() {
            return Ok(self.clone());
        }
        if self.u.is_exactly_zero() {
            return Ok(g.clone());
        }
        let p = self.prime();
        let tables: Vec<Vec<u64>> = self
            .tables
            .iter()
            .zip(&g.tables)
            .map(|(tf, tg)| tg.iter().map(|&x| tf[x as usize]).collect())
            .collect();
        let degree = self.u.degree_bound().max(g.u.degree_bound());
        let prec = self.u.precision().min(g.u.precision());
        let kind = match (self.kind, g.kind) {
            (ReprKind::Series, ReprKind::Series) => ReprKind::Series,
            _ => ReprKind::ValueTable,
        };
        let u = match kind {
            ReprKind::Series => {
                // h(k) - k at full precision via the series
                let mut values = Vec::with_capacity(degree + 1);
                for k in 0..=degree as i64 {
                    let gk = g.apply_int(k)?;
                    let hk = self.apply(&gk)?;
                    values.push(hk.sub(&PadicNumber::from_integer(p, k, prec.max(1)))?);
                }
                let tail = self.composed_tail(g, degree);
                mahler_coeffs_from_values(p, prec, &values, degree, tail)?
            }
            ReprKind::ValueTable => {
                // only the top table is authoritative
                let l_max = self.levels();
                let top = tables.last().expect("at least one level");
                let q = p.pow(l_max);
                let mut values = Vec::with_capacity(degree + 1);
                for k in 0..=degree as u64 {
                    let r = (top[(k % q) as usize] + q - (k % q)) % q;
                    values.push(
                        PadicNumber::from_i128(p, r as i128, prec.max(1))
                            .truncate_abs(l_max as i64),
                    );
                }
                mahler_coeffs_from_values(p, prec, &values, degree, Val::Finite(0))?
            }
        };
        let sup = u.coeff_sup();
        let ball_member = sup.at_most(1);
        let w_member = sup.at_most(2)
            && isometry_on_table(p, &tables[tables.len() - 1], tables.len() as u32);
        Ok(Diffeo { u, kind, tables, ball_member, w_member, u_mono: None })
    }

    /// Inverse: permutation tables inverted level by level, the series
    /// re-extracted from fixed-point solutions of `y + u(y) = k`.
    pub fn invert(&self) -> Result<Diffeo> {
        let p = self.prime();
        if !self.ball_member {
            return Err(Error::Domain(
                "inversion requires the group ball ||f - id|| <= 1/p".into(),
            ));
        }
        let mut tables = Vec::with_capacity(self.tables.len());
        for t in &self.tables {
            let mut inv = vec![0u64; t.len()];
            for (x, &v) in t.iter().enumerate() {
                inv[v as usize] = x as u64;
            }
            tables.push(inv);
        }
        check_tables(p, &tables)?;
        let degree = self.u.degree_bound();
        let prec = self.u.precision().max(1);
        let u = match self.kind {
            ReprKind::Series => {
                let mut values = Vec::with_capacity(degree + 1);
                // digits settled beyond the working precision are noise
                let target = prec as i64 + 4;
                for k in 0..=degree as i64 {
                    let kv = PadicNumber::from_integer(p, k, prec);
                    // contraction y <- k - u(y); gains one digit per step
                    // once ||u(x) - u(y)|| < ||x - y||
                    let mut y = kv.clone();
                    let mut converged = false;
                    for _ in 0..(4 * prec as usize + 16) {
                        let next = kv.sub(&self.u.evaluate(&y)?)?;
                        let step = next.sub(&y)?;
                        if step.is_zero_to_precision() || step.val_lower().at_most(target) {
                            y = next;
                            converged = true;
                            break;
                        }
                        y = next;
                    }
                    if !converged {
                        return Err(Error::Convergence(format!(
                            "inverse iteration stagnated at node {k}"
                        )));
                    }
                    values.push(y.sub(&kv)?);
                }
                // affine maps invert to affine maps, exactly; otherwise
                // the stored-part decay and the unknown tail both bound
                // the inverse coefficients
                let affine = self.u.tail_val() == Val::Infinite
                    && self.true_degree().unwrap_or(0) <= 1;
                let tail = if affine {
                    Val::Infinite
                } else {
                    let poly_part = match self.gauss_decay() {
                        Some(c) if c >= 1 => {
                            Val::Finite(c + factorial_valuation(degree as u64 + 1, p) as i64)
                        }
                        None => Val::Infinite,
                        _ => Val::Finite(0),
                    };
                    poly_part.max(self.u.tail_val())
                };
                mahler_coeffs_from_values(p, prec, &values, degree, tail)?
            }
            ReprKind::ValueTable => {
                let l_max = self.levels();
                let top = tables.last().expect("at least one level");
                let q = p.pow(l_max);
                let mut values = Vec::with_capacity(degree + 1);
                for k in 0..=degree as u64 {
                    let r = (top[(k % q) as usize] + q - (k % q)) % q;
                    values.push(
                        PadicNumber::from_i128(p, r as i128, prec).truncate_abs(l_max as i64),
                    );
                }
                mahler_coeffs_from_values(p, prec, &values, degree, Val::Finite(0))?
            }
        };
        let sup = u.coeff_sup();
        let ball_member = sup.at_most(1);
        let w_member = sup.at_most(2)
            && isometry_on_table(p, &tables[tables.len() - 1], tables.len() as u32);
        Ok(Diffeo { u, kind: self.kind, tables, ball_member, w_member, u_mono: None })
    }

    /// The ultrametric `rho_0^t(f, g) = ||f - g||_{C(t)}`. At `t = 0` this
    /// is the coefficient sup (basis orthonormality); higher orders go
    /// through the grid norm at the given level.
    pub fn distance(&self, g: &Diffeo, t: CtIndex, level: u32) -> Result<Val> {
        if self.prime() != g.prime() {
            return Err(Error::Domain("mismatched primes".into()));
        }
        let diff = self.u.sub(&g.u)?;
        if t.0 == 0 {
            Ok(diff.coeff_sup())
        } else {
            Ok(mahler::norm_ct(&diff, t, level)?.value)
        }
    }

    /// `C(0)` distance read off the cached tables at level `l` (values are
    /// compared mod `p^l`, so the answer is capped at exponent `l`).
    pub fn distance_table(&self, g: &Diffeo, l: u32) -> Result<Val> {
        self.check_compatible(g)?;
        let p = self.prime();
        let tf = self.table(l)?;
        let tg = g.table(l)?;
        let q = p.pow(l);
        let mut best = Val::Finite(l as i64);
        for x in 0..q as usize {
            let d = (tf[x] + q - tg[x]) % q;
            if d != 0 {
                let w = crate::padic::int_valuation(d as i128, p) as i64;
                best = best.max(Val::Finite(w));
            }
        }
        Ok(best)
    }

    /// Membership in `W`: `dist(f, id) <= p^-2` for every order up to `t`,
    /// plus the isometry property on the top cached level.
    pub fn in_w(&self, t: CtIndex, level: u32) -> Result<bool> {
        let id = Diffeo::identity(self.prime(), self.u.precision(), self.levels());
        for tau in 0..=t.0 {
            if !self.distance(&id, CtIndex(tau), level)?.at_most(2) {
                return Ok(false);
            }
        }
        self.is_isometry(self.levels())
    }

    /// Exhaustive check of `|f(x) - f(y)| = |x - y|` on all pairs mod `p^l`.
    pub fn is_isometry(&self, l: u32) -> Result<bool> {
        let t = self.table(l)?;
        Ok(isometry_on_table(self.prime(), t, l))
    }
}

/// Result of the weighted compact-ball norm: the sup of
/// `|a_m| J(t, m) p^(1+m)` over the stored coefficients of `f - id`, plus
/// the number of `m` whose term exceeds `p^-2` (a finite count witnesses
/// compactness of the ball subgroup).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightedNorm {
    pub value: Val,
    pub witness_count: usize,
}

/// The one-dimensional reduction of the weighted `||.||_{t,a}` norm:
/// `Ord(m) = 1`, `|m| = m`, single coordinate, so the weight is `p^(1+m)`.
pub fn weighted_norm_a(f: &Diffeo, t: CtIndex, level: u32) -> Result<WeightedNorm> {
    let p = f.prime();
    let prec = f.u().precision();
    let mut value = Val::Infinite;
    let mut witness_count = 0;
    for (m, a) in f.u().coeffs().iter().enumerate() {
        let j = if t.0 == 0 {
            Val::Finite(0) // J(0, m) = 1
        } else {
            basis_norm_j(p, prec, t, m, level)?.value
        };
        let term = match (a.val_lower(), j) {
            (Val::Finite(v), Val::Finite(jw)) => Val::Finite(v + jw - (1 + m as i64)),
            _ => Val::Infinite,
        };
        if !term.at_most(2) {
            witness_count += 1;
        }
        value = value.max(term);
    }
    Ok(WeightedNorm { value, witness_count })
}

/// JSON form `{series, tables, w_member}`; table keys are decimal levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffeoJson {
    pub series: MahlerJson,
    pub kind: ReprKind,
    pub tables: BTreeMap<String, Vec<u64>>,
    pub w_member: bool,
}

impl From<&Diffeo> for DiffeoJson {
    fn from(f: &Diffeo) -> Self {
        DiffeoJson {
            series: MahlerJson::from(&f.u),
            kind: f.kind,
            tables: f
                .tables
                .iter()
                .enumerate()
                .map(|(i, t)| ((i + 1).to_string(), t.clone()))
                .collect(),
            w_member: f.w_member,
        }
    }
}

impl TryFrom<&DiffeoJson> for Diffeo {
    type Error = Error;

    fn try_from(j: &DiffeoJson) -> Result<Self> {
        let u = MahlerSeries::try_from(&j.series)?;
        let mut tables = Vec::new();
        for l in 1..=j.tables.len() as u32 {
            let t = j
                .tables
                .get(&l.to_string())
                .ok_or_else(|| Error::Domain(format!("missing table level {l}")))?;
            tables.push(t.clone());
        }
        if tables.is_empty() {
            return Err(Error::Domain("diffeo needs at least one table level".into()));
        }
        check_tables(u.prime(), &tables)?;
        let sup = u.coeff_sup();
        let ball_member = sup.at_most(1);
        let w_member = j.w_member
            && sup.at_most(2)
            && isometry_on_table(u.prime(), &tables[tables.len() - 1], tables.len() as u32);
        Ok(Diffeo { u, kind: j.kind, tables, ball_member, w_member, u_mono: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mahler::from_monomial;

    const P: u64 = 3;
    const N: u32 = 12;
    const LMAX: u32 = 4;

    fn pd(k: i64) -> PadicNumber {
        PadicNumber::from_integer(P, k, N)
    }

    /// f(x) = x + c
    fn translation(c: i64) -> Diffeo {
        let u = MahlerSeries::constant(pd(c), N);
        Diffeo::from_series(u, LMAX).unwrap()
    }

    /// f(x) = (1 + c) x
    fn scaling(c: i64) -> Diffeo {
        let u = from_monomial(P, N, &[pd(0), pd(c)]).unwrap();
        Diffeo::from_series(u, LMAX).unwrap()
    }

    #[test]
    fn compose_with_identity() {
        let id = Diffeo::identity(P, N, LMAX);
        let f = translation(9);
        let fid = f.compose(&id).unwrap();
        assert_eq!(fid.distance(&f, CtIndex(0), 2).unwrap(), Val::Infinite);
        for l in 1..=LMAX {
            assert_eq!(fid.table(l).unwrap(), f.table(l).unwrap());
        }
    }

    #[test]
    fn translations_add() {
        // (x + p^2) . (x + p^2) = x + 2 p^2, exactly
        let f = translation(9);
        let ff = f.compose(&f).unwrap();
        let expect = translation(18);
        assert_eq!(ff.distance(&expect, CtIndex(0), 2).unwrap(), Val::Infinite);
    }

    #[test]
    fn scaling_compose_translation() {
        // f = (1+p^2)x, g = x+p^2: f.g = (1+p^2)x + p^2(1+p^2)
        let f = scaling(9);
        let g = translation(9);
        let fg = f.compose(&g).unwrap();
        let expect = Diffeo::from_series(
            from_monomial(P, N, &[pd(9 * 10), pd(9)]).unwrap(),
            LMAX,
        )
        .unwrap();
        assert_eq!(fg.distance(&expect, CtIndex(0), 2).unwrap(), Val::Infinite);
    }

    #[test]
    fn invert_examples() {
        let id = Diffeo::identity(P, N, LMAX);
        let iid = id.invert().unwrap();
        assert_eq!(iid.distance(&id, CtIndex(0), 2).unwrap(), Val::Infinite);
        // invert(x + c) = x - c
        let f = translation(9);
        let finv = f.invert().unwrap();
        let expect = translation(-9);
        assert_eq!(finv.distance(&expect, CtIndex(0), 2).unwrap(), Val::Infinite);
        // invert((1+p^2)x) = (1+p^2)^-1 x
        let g = scaling(9);
        let ginv = g.invert().unwrap();
        let inv_scale = pd(1).div(&pd(10)).unwrap();
        let minus_one_part = inv_scale.sub(&pd(1)).unwrap();
        let expect_u = from_monomial(P, N, &[pd(0), minus_one_part]).unwrap();
        let d = ginv.u().sub(&expect_u).unwrap();
        assert!(d.coeff_sup().at_most(10), "distance {}", d.coeff_sup());
        // two-sided inverse on all cached levels
        let gg = g.compose(&ginv).unwrap();
        for l in 1..=LMAX {
            let idt: Vec<u64> = (0..(P).pow(l)).collect();
            assert_eq!(gg.table(l).unwrap(), &idt[..]);
        }
    }

    #[test]
    fn distance_examples() {
        let f = translation(9);
        let id = Diffeo::identity(P, N, LMAX);
        assert_eq!(f.distance(&f, CtIndex(0), 2).unwrap(), Val::Infinite);
        assert_eq!(f.distance(&id, CtIndex(0), 2).unwrap(), Val::Finite(2));
        // distance(f^-1, id) = distance(f, id) for f in W
        let finv = f.invert().unwrap();
        assert_eq!(
            finv.distance(&id, CtIndex(0), 2).unwrap(),
            f.distance(&id, CtIndex(0), 2).unwrap()
        );
    }

    #[test]
    fn in_w_examples() {
        let id = Diffeo::identity(P, N, LMAX);
        assert!(id.in_w(CtIndex(1), 2).unwrap());
        assert!(translation(9).in_w(CtIndex(1), 2).unwrap());
        // norm p^-1 perturbation is outside W
        let f = Diffeo::from_series(
            MahlerSeries::new(P, N, vec![pd(0), pd(3)], Val::Infinite),
            LMAX,
        )
        .unwrap();
        assert!(!f.in_w(CtIndex(0), 2).unwrap());
        assert!(!f.w_member());
    }

    #[test]
    fn isometry_examples() {
        let id = Diffeo::identity(P, N, LMAX);
        assert!(id.is_isometry(3).unwrap());
        assert!(translation(9).is_isometry(4).unwrap());
        // x^2 collapses mod 9, so the table is not a bijection
        let sq = from_monomial(P, N, &[pd(0), pd(-1), pd(1)]).unwrap(); // x^2 - id
        assert!(Diffeo::from_series(sq, 2).is_err());
    }

    #[test]
    fn ultrametric_and_group_ball_closure() {
        let f = translation(9);
        let g = scaling(9);
        let id = Diffeo::identity(P, N, LMAX);
        let fg = f.compose(&g).unwrap();
        let bound = f
            .distance(&id, CtIndex(0), 2)
            .unwrap()
            .max(g.distance(&id, CtIndex(0), 2).unwrap());
        assert!(fg.distance(&id, CtIndex(0), 2).unwrap() <= bound);
        assert!(fg.w_member());
    }

    #[test]
    fn composition_is_associative_on_tables() {
        let f = translation(9);
        let g = scaling(9);
        let h = scaling(-9);
        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();
        for l in 1..=LMAX {
            assert_eq!(left.table(l).unwrap(), right.table(l).unwrap(), "level {l}");
        }
    }

    #[test]
    fn right_invariance_at_c0_on_tables() {
        let f = translation(9);
        let g = scaling(9);
        // compose with an arbitrary cached bijection h: here a unit scaling
        let h = scaling(3).invert().unwrap();
        let d1 = f.distance_table(&g, 3).unwrap();
        let fh = f.compose(&h).unwrap();
        let gh = g.compose(&h).unwrap();
        let d2 = fh.distance_table(&gh, 3).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn weighted_norm_examples() {
        let id = Diffeo::identity(P, N, LMAX);
        let wn = weighted_norm_a(&id, CtIndex(0), 2).unwrap();
        assert_eq!(wn.value, Val::Infinite);
        assert_eq!(wn.witness_count, 0);
        // f = id + p^4 binom(x,1): |p^4| * J(0,1) * p^2 = p^-2
        let f = Diffeo::from_series(
            MahlerSeries::new(P, N, vec![pd(0), pd(81)], Val::Infinite),
            LMAX,
        )
        .unwrap();
        let wn = weighted_norm_a(&f, CtIndex(0), 2).unwrap();
        assert_eq!(wn.value, Val::Finite(2));
        assert_eq!(wn.witness_count, 0);
        // coefficients p^(m+3) binom(x,m): every term has exponent >= 2
        let coeffs: Vec<PadicNumber> = (0..6).map(|m| pd(3i64.pow(m + 3))).collect();
        let g = Diffeo::from_series(MahlerSeries::new(P, N, coeffs, Val::Infinite), LMAX).unwrap();
        let wn = weighted_norm_a(&g, CtIndex(0), 2).unwrap();
        assert_eq!(wn.witness_count, 0);
        assert_eq!(wn.value, Val::Finite(2));
        // order 1: the grid oracle gives J(1,2) = 1, so the m = 2 term
        // weighs p^(1+2) against |p^4|
        let h = Diffeo::from_series(
            MahlerSeries::new(P, N, vec![pd(0), pd(0), pd(81)], Val::Infinite),
            LMAX,
        )
        .unwrap();
        let wn = weighted_norm_a(&h, CtIndex(1), 3).unwrap();
        assert_eq!(wn.value, Val::Finite(4 - 3));
        assert_eq!(wn.witness_count, 1);
    }

    #[test]
    fn json_round_trip() {
        let f = scaling(9);
        let j = DiffeoJson::from(&f);
        let text = serde_json::to_string(&j).unwrap();
        let back: DiffeoJson = serde_json::from_str(&text).unwrap();
        let g = Diffeo::try_from(&back).unwrap();
        assert_eq!(f.table(3).unwrap(), g.table(3).unwrap());
        assert!(f.distance(&g, CtIndex(0), 2).unwrap().at_most(10));
    }

    #[test]
    fn corrupted_table_rejected() {
        let f = translation(9);
        let mut j = DiffeoJson::from(&f);
        let t = j.tables.get_mut("2").unwrap();
        t[0] = t[1]; // no longer a bijection
        assert!(Diffeo::try_from(&j).is_err());
    }
}
