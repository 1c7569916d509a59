//! Potential and symplectic subgroups over `Q_p^n` with polynomial data:
//! differential forms, the pullback invariance conditions, `Sp(2m)`
//! membership for linear maps, and the Lie-derivative kernel whose
//! dimension is `n(n+1)/2` for the constant nondegenerate form.
//!
//! All arithmetic is exact; linear systems are solved by Gaussian
//! elimination with max-norm (minimal valuation) pivoting, the
//! ultrametric-stable rule.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::padic::{PadicJson, PadicNumber, Val};

/// Hard bound on polynomial degree growth under composition.
pub const DEGREE_CAP: usize = 8;

/// Sparse polynomial in `n` variables over `Q_p`, keyed by exponent
/// vectors.
#[derive(Debug, Clone)]
pub struct PolyN {
    pub n: usize,
    pub p: u64,
    terms: BTreeMap<Vec<u16>, PadicNumber>,
}

impl PolyN {
    pub fn zero(n: usize, p: u64) -> Self {
        PolyN { n, p, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: PadicNumber) -> Self {
        let p = c.prime();
        let mut f = Self::zero(n, p);
        f.add_term(vec![0; n], c);
        f
    }

    /// The coordinate `x^i` (0-based).
    pub fn coordinate(n: usize, p: u64, i: usize, prec: u32) -> Self {
        let mut e = vec![0u16; n];
        e[i] = 1;
        let mut f = Self::zero(n, p);
        f.add_term(e, PadicNumber::one(p, prec));
        f
    }

    pub fn add_term(&mut self, expo: Vec<u16>, c: PadicNumber) {
        assert_eq!(expo.len(), self.n);
        if c.is_zero() {
            return;
        }
        match self.terms.get(&expo) {
            Some(old) => {
                let s = old.add(&c).expect("same prime");
                if s.is_zero() {
                    self.terms.remove(&expo);
                } else {
                    self.terms.insert(expo, s);
                }
            }
            None => {
                self.terms.insert(expo, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &PadicNumber)> {
        self.terms.iter()
    }

    pub fn coeff(&self, expo: &[u16]) -> PadicNumber {
        self.terms
            .get(expo)
            .cloned()
            .unwrap_or_else(|| PadicNumber::zero(self.p))
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// True when every coefficient is (exactly or to precision) zero.
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero_to_precision())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.neg());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &PadicNumber) -> Result<Self> {
        let mut out = Self::zero(self.n, self.p);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v.mul(c)?);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self, cap: usize) -> Result<Self> {
        let mut out = Self::zero(self.n, self.p);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u16> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let deg: usize = e.iter().map(|&x| x as usize).sum();
                if deg > cap {
                    return Err(Error::Domain(format!(
                        "degree {deg} exceeds the composition cap {cap}"
                    )));
                }
                out.add_term(e, c1.mul(c2)?);
            }
        }
        Ok(out)
    }

    pub fn partial_derivative(&self, i: usize) -> Result<Self> {
        let mut out = Self::zero(self.n, self.p);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            let k = PadicNumber::from_i128(self.p, e[i] as i128, crate::padic::max_precision(self.p));
            out.add_term(e2, c.mul(&k)?);
        }
        Ok(out)
    }

    /// Substitute the components of `g` for the variables.
    pub fn compose(&self, g: &PolyMap, cap: usize) -> Result<Self> {
        let mut out = Self::zero(self.n, self.p);
        for (e, c) in &self.terms {
            let mut term = Self::constant(self.n, c.clone());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term = term.mul(&g.components[i], cap)?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    pub fn evaluate(&self, point: &[PadicNumber]) -> Result<PadicNumber> {
        if point.len() != self.n {
            return Err(Error::Domain("point dimension mismatch".into()));
        }
        let mut acc = PadicNumber::zero(self.p);
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = t.mul(&point[i])?;
                }
            }
            acc = acc.add(&t)?;
        }
        Ok(acc)
    }
}

/// A polynomial map `Q_p^n -> Q_p^n`.
#[derive(Debug, Clone)]
pub struct PolyMap {
    pub n: usize,
    pub components: Vec<PolyN>,
}

impl PolyMap {
    pub fn identity(n: usize, p: u64, prec: u32) -> Self {
        PolyMap {
            n,
            components: (0..n).map(|i| PolyN::coordinate(n, p, i, prec)).collect(),
        }
    }

    /// Linear map from a matrix (rows act on the coordinate column).
    pub fn linear(p: u64, prec: u32, matrix: &[Vec<i64>]) -> Result<Self> {
        let n = matrix.len();
        let mut components = Vec::with_capacity(n);
        for row in matrix {
            if row.len() != n {
                return Err(Error::Domain("matrix is not square".into()));
            }
            let mut comp = PolyN::zero(n, p);
            for (j, &c) in row.iter().enumerate() {
                if c != 0 {
                    let mut e = vec![0u16; n];
                    e[j] = 1;
                    comp.add_term(e, PadicNumber::from_integer(p, c, prec));
                }
            }
            components.push(comp);
        }
        Ok(PolyMap { n, components })
    }

    pub fn linear_padic(matrix: &[Vec<PadicNumber>]) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::Domain("empty matrix".into()));
        }
        let p = matrix[0][0].prime();
        let mut components = Vec::with_capacity(n);
        for row in matrix {
            let mut comp = PolyN::zero(n, p);
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    let mut e = vec![0u16; n];
                    e[j] = 1;
                    comp.add_term(e, c.clone());
                }
            }
            components.push(comp);
        }
        Ok(PolyMap { n, components })
    }

    /// The matrix of a linear map; fails on nonlinear components.
    pub fn as_matrix(&self) -> Result<Vec<Vec<PadicNumber>>> {
        let p = self.prime();
        let mut out = Vec::with_capacity(self.n);
        for comp in &self.components {
            let mut row = vec![PadicNumber::zero(p); self.n];
            for (e, c) in comp.terms() {
                let deg: usize = e.iter().map(|&x| x as usize).sum();
                if deg != 1 {
                    return Err(Error::Domain("map is not linear".into()));
                }
                let j = e.iter().position(|&x| x == 1).expect("degree-1 exponent");
                row[j] = c.clone();
            }
            out.push(row);
        }
        Ok(out)
    }

    pub fn prime(&self) -> u64 {
        self.components
            .first()
            .map(|c| c.p)
            .expect("nonempty map")
    }

    pub fn compose(&self, g: &PolyMap, cap: usize) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| c.compose(g, cap))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyMap { n: self.n, components })
    }

    pub fn jacobian_entry(&self, mu: usize, alpha: usize) -> Result<PolyN> {
        self.components[mu].partial_derivative(alpha)
    }
}

/// A polynomial differential 1-form `A_alpha(x) dx^alpha`.
#[derive(Debug, Clone)]
pub struct OneForm {
    pub n: usize,
    pub components: Vec<PolyN>,
}

/// An antisymmetric polynomial 2-form `F_ab dx^a ^ dx^b / 2`.
#[derive(Debug, Clone)]
pub struct TwoForm {
    pub n: usize,
    pub components: Vec<Vec<PolyN>>,
}

impl TwoForm {
    pub fn is_antisymmetric(&self) -> bool {
        for a in 0..self.n {
            for b in 0..self.n {
                let sum = match self.components[a][b].add(&self.components[b][a]) {
                    Ok(s) => s,
                    Err(_) => return false,
                };
                if !sum.is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

/// The paper's standard antisymmetric form: `eps_{a,a+1} = 1`,
/// `eps_{a+1,a} = -1` along the diagonal, zero elsewhere; nondegenerate
/// for even `n`.
pub fn standard_epsilon(n: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; n]; n];
    for a in 0..n - 1 {
        m[a][a + 1] = 1;
        m[a + 1][a] = -1;
    }
    m
}

/// The linear potential `A = eps_{a,v} x^v dx^a` for a constant
/// antisymmetric matrix.
pub fn linear_form(p: u64, prec: u32, eps: &[Vec<i64>]) -> OneForm {
    let n = eps.len();
    let mut components = Vec::with_capacity(n);
    for a in 0..n {
        let mut comp = PolyN::zero(n, p);
        for (v, &c) in eps[a].iter().enumerate() {
            if c != 0 {
                let mut e = vec![0u16; n];
                e[v] = 1;
                comp.add_term(e, PadicNumber::from_integer(p, c, prec));
            }
        }
        components.push(comp);
    }
    OneForm { n, components }
}

/// Exterior derivative `F_ab = d_a A_b - d_b A_a`; antisymmetric by
/// construction, and zero on gradients.
pub fn exterior_derivative(a: &OneForm) -> Result<TwoForm> {
    let n = a.n;
    let mut components = Vec::with_capacity(n);
    for alpha in 0..n {
        let mut row = Vec::with_capacity(n);
        for beta in 0..n {
            let d1 = a.components[beta].partial_derivative(alpha)?;
            let d2 = a.components[alpha].partial_derivative(beta)?;
            row.push(d1.sub(&d2)?);
        }
        components.push(row);
    }
    Ok(TwoForm { n, components })
}

/// Exact determinant of a matrix of scalars by elimination with
/// max-norm pivoting.
pub fn determinant(m: &[Vec<PadicNumber>]) -> Result<PadicNumber> {
    let n = m.len();
    if n == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    let p = m[0][0].prime();
    let mut a: Vec<Vec<PadicNumber>> = m.to_vec();
    let mut det = PadicNumber::one(p, crate::padic::max_precision(p));
    for col in 0..n {
        // max-norm pivot: smallest valuation
        let mut pivot = None;
        let mut best = Val::Infinite;
        for (r, row) in a.iter().enumerate().skip(col) {
            let v = row[col].val_lower();
            if !row[col].is_zero_to_precision() && (pivot.is_none() || v > best) {
                pivot = Some(r);
                best = v;
            }
        }
        let Some(r) = pivot else {
            return Ok(PadicNumber::zero(p));
        };
        if r != col {
            a.swap(r, col);
            det = det.neg();
        }
        let pv = a[col][col].clone();
        det = det.mul(&pv)?;
        for r in col + 1..n {
            if a[r][col].is_zero_to_precision() {
                continue;
            }
            let factor = a[r][col].div(&pv)?;
            for c in col..n {
                let t = factor.mul(&a[col][c])?;
                a[r][c] = a[r][c].sub(&t)?;
            }
        }
    }
    Ok(det)
}

/// Nondegeneracy of a 2-form at each sampled point: the determinant of
/// `F(x)` has finite valuation everywhere. Records the valuations.
pub fn is_nondegenerate(f: &TwoForm, points: &[Vec<PadicNumber>]) -> Result<(bool, Vec<Val>)> {
    let mut vals = Vec::with_capacity(points.len());
    let mut ok = true;
    for pt in points {
        let mut m = Vec::with_capacity(f.n);
        for a in 0..f.n {
            let mut row = Vec::with_capacity(f.n);
            for b in 0..f.n {
                row.push(f.components[a][b].evaluate(pt)?);
            }
            m.push(row);
        }
        let det = determinant(&m)?;
        let v = det.val_lower();
        if det.is_zero_to_precision() {
            ok = false;
        }
        vals.push(v);
    }
    Ok((ok, vals))
}

/// Pullback invariance of the potential:
/// `A_alpha(x) = A_mu(g(x)) dg^mu/dx^alpha` as an exact polynomial
/// identity.
pub fn check_potential(g: &PolyMap, a: &OneForm, cap: usize) -> Result<bool> {
    for alpha in 0..a.n {
        let mut rhs = PolyN::zero(a.n, g.prime());
        for mu in 0..a.n {
            let composed = a.components[mu].compose(g, cap)?;
            let jac = g.jacobian_entry(mu, alpha)?;
            rhs = rhs.add(&composed.mul(&jac, cap)?)?;
        }
        if !a.components[alpha].sub(&rhs)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pullback invariance of the 2-form:
/// `F_ab(x) = F_mn(g(x)) dg^m/dx^a dg^n/dx^b` exactly.
pub fn check_symplectic(g: &PolyMap, f: &TwoForm, cap: usize) -> Result<bool> {
    for alpha in 0..f.n {
        for beta in 0..f.n {
            let mut rhs = PolyN::zero(f.n, g.prime());
            for mu in 0..f.n {
                let ja = g.jacobian_entry(mu, alpha)?;
                for nu in 0..f.n {
                    let comp = f.components[mu][nu].compose(g, cap)?;
                    let jb = g.jacobian_entry(nu, beta)?;
                    rhs = rhs.add(&comp.mul(&ja, cap)?.mul(&jb, cap)?)?;
                }
            }
            if !f.components[alpha][beta].sub(&rhs)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `g^t eps g = eps` for a linear map, the matrix form of symplectic
/// membership.
pub fn sp_membership(g: &PolyMap, eps: &[Vec<i64>]) -> Result<bool> {
    let p = g.prime();
    let m = g.as_matrix()?;
    let n = g.n;
    if !n.is_multiple_of(2) {
        return Err(Error::Domain("Sp(2m) needs even dimension".into()));
    }
    let prec = crate::padic::max_precision(p);
    for a in 0..n {
        for b in 0..n {
            // (g^t eps g)_{ab} = sum_{i,j} g_{ia} eps_{ij} g_{jb}
            let mut acc = PadicNumber::zero(p);
            for i in 0..n {
                if m[i][a].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if eps[i][j] == 0 || m[j][b].is_zero() {
                        continue;
                    }
                    let e = PadicNumber::from_integer(p, eps[i][j], prec);
                    acc = acc.add(&m[i][a].mul(&e)?.mul(&m[j][b])?)?;
                }
            }
            let target = PadicNumber::from_integer(p, eps[a][b], prec);
            if !acc.sub(&target)?.is_zero_to_precision() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Monomial exponent vectors of total degree at most `d` in `n`
/// variables, in lexicographic order.
pub fn monomials_up_to(n: usize, d: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; n];
    fn rec(out: &mut Vec<Vec<u16>>, cur: &mut Vec<u16>, i: usize, left: usize) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[i] = k as u16;
            rec(out, cur, i + 1, left - k);
        }
        cur[i] = 0;
    }
    rec(&mut out, &mut cur, 0, d);
    out
}

/// Kernel of an exact matrix by row reduction with max-norm pivoting.
/// Returns a basis of column vectors.
pub fn kernel_basis(rows: &[Vec<PadicNumber>], ncols: usize, p: u64) -> Result<Vec<Vec<PadicNumber>>> {
    let mut a: Vec<Vec<PadicNumber>> = rows.to_vec();
    let nrows = a.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut row = 0usize;
    for col in 0..ncols {
        if row >= nrows {
            break;
        }
        let mut pivot = None;
        let mut best = Val::Infinite;
        for (r, arow) in a.iter().enumerate().take(nrows).skip(row) {
            let v = arow[col].val_lower();
            if !arow[col].is_zero_to_precision() && (pivot.is_none() || v > best) {
                pivot = Some(r);
                best = v;
            }
        }
        let Some(r) = pivot else { continue };
        a.swap(r, row);
        let pv = a[row][col].clone();
        for c in col..ncols {
            a[row][c] = a[row][c].div(&pv)?;
        }
        for r2 in 0..nrows {
            if r2 == row || a[r2][col].is_zero_to_precision() {
                continue;
            }
            let factor = a[r2][col].clone();
            for c in col..ncols {
                let t = factor.mul(&a[row][c])?;
                a[r2][c] = a[r2][c].sub(&t)?;
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![PadicNumber::zero(p); ncols];
        v[free] = PadicNumber::one(p, crate::padic::max_precision(p));
        for col in 0..ncols {
            if let Some(r) = pivot_of_col[col] {
                v[col] = a[r][free].neg();
            }
        }
        basis.push(v);
    }
    Ok(basis)
}

/// A polynomial vector field `xi = xi^mu d_mu` given by its components.
pub type VectorFieldN = Vec<PolyN>;

/// Kernel of the Lie derivative `L_xi A = 0` on polynomial fields of
/// degree at most `d`: sets up the exact linear system
/// `xi^mu d_mu A_alpha + A_mu d_alpha xi^mu = 0` on the coefficients and
/// returns its dimension and a basis. For the constant nondegenerate
/// linear form the dimension is `n(n+1)/2` at every `d >= 1`.
pub fn lie_derivative_kernel(
    a: &OneForm,
    d: usize,
    cap: usize,
    max_unknowns: usize,
) -> Result<(usize, Vec<VectorFieldN>)> {
    let n = a.n;
    let p = a.components[0].p;
    let monos = monomials_up_to(n, d);
    let unknowns = n * monos.len();
    if unknowns > max_unknowns {
        return Err(Error::Domain(format!(
            "system has {unknowns} unknowns, above the cap {max_unknowns}"
        )));
    }
    // L_xi A_alpha for xi = x^e d_mu, one basis field at a time
    let max_deg = a
        .components
        .iter()
        .map(|c| c.degree())
        .max()
        .unwrap_or(0)
        + d;
    let eq_monos = monomials_up_to(n, max_deg);
    let eq_index: BTreeMap<Vec<u16>, usize> =
        eq_monos.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    let nrows = n * eq_monos.len();
    let mut rows = vec![vec![PadicNumber::zero(p); unknowns]; nrows];
    for (mi, e) in monos.iter().enumerate() {
        for mu in 0..n {
            let col = mu * monos.len() + mi;
            let mut basis_field = PolyN::zero(n, p);
            basis_field.add_term(e.clone(), PadicNumber::one(p, crate::padic::max_precision(p)));
            for alpha in 0..n {
                // xi^mu d_mu A_alpha
                let t1 = basis_field.mul(&a.components[alpha].partial_derivative(mu)?, cap + d)?;
                // A_mu d_alpha xi^mu
                let t2 = a.components[mu].mul(&basis_field.partial_derivative(alpha)?, cap + d)?;
                let total = t1.add(&t2)?;
                for (te, tc) in total.terms() {
                    let ri = alpha * eq_monos.len()
                        + eq_index
                            .get(te)
                            .copied()
                            .ok_or_else(|| Error::Domain("degree overflow in system".into()))?;
                    rows[ri][col] = rows[ri][col].add(tc)?;
                }
            }
        }
    }
    let kernel = kernel_basis(&rows, unknowns, p)?;
    let dim = kernel.len();
    let mut fields = Vec::with_capacity(dim);
    for v in kernel {
        let mut field: VectorFieldN = (0..n).map(|_| PolyN::zero(n, p)).collect();
        for (mi, e) in monos.iter().enumerate() {
            for mu in 0..n {
                let c = v[mu * monos.len() + mi].clone();
                if !c.is_zero_to_precision() {
                    field[mu].add_term(e.clone(), c);
                }
            }
        }
        fields.push(field);
    }
    Ok((dim, fields))
}

/// Substitute a kernel field back into `L_xi A` and check it vanishes.
pub fn lie_derivative_vanishes(a: &OneForm, xi: &VectorFieldN, cap: usize) -> Result<bool> {
    let n = a.n;
    for alpha in 0..n {
        let mut acc = PolyN::zero(n, a.components[0].p);
        for mu in 0..n {
            let t1 = xi[mu].mul(&a.components[alpha].partial_derivative(mu)?, cap)?;
            let t2 = a.components[mu].mul(&xi[mu].partial_derivative(alpha)?, cap)?;
            acc = acc.add(&t1)?.add(&t2)?;
        }
        if !acc.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Symplectic transvection `x -> x + c * eps(x, v) v`, exact in `Sp` for
/// any antisymmetric `eps` (used to sample symplectic elements).
pub fn transvection(p: u64, prec: u32, eps: &[Vec<i64>], v: &[i64], c: i64) -> Result<PolyMap> {
    let n = eps.len();
    if v.len() != n {
        return Err(Error::Domain("vector dimension mismatch".into()));
    }
    // (eps v)_j = sum_k eps_{j k} v_k ... we need x^T eps v = sum_j x_j (eps v)_j
    let mut epsv = vec![0i64; n];
    for j in 0..n {
        for k in 0..n {
            epsv[j] += eps[j][k] * v[k];
        }
    }
    let mut matrix = vec![vec![0i64; n]; n];
    for i in 0..n {
        matrix[i][i] = 1;
        for j in 0..n {
            matrix[i][j] += c * v[i] * epsv[j];
        }
    }
    PolyMap::linear(p, prec, &matrix)
}

/// Sparse JSON for a polynomial: exponent vector (as a dash-joined key)
/// to coefficient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyNJson {
    pub n: usize,
    pub p: u64,
    pub terms: BTreeMap<String, PadicJson>,
}

impl From<&PolyN> for PolyNJson {
    fn from(f: &PolyN) -> Self {
        PolyNJson {
            n: f.n,
            p: f.p,
            terms: f
                .terms
                .iter()
                .map(|(e, c)| {
                    let key = e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("-");
                    (key, PadicJson::from(c))
                })
                .collect(),
        }
    }
}

impl TryFrom<&PolyNJson> for PolyN {
    type Error = Error;

    fn try_from(j: &PolyNJson) -> Result<Self> {
        let mut f = PolyN::zero(j.n, j.p);
        for (key, c) in &j.terms {
            let expo: Vec<u16> = key
                .split('-')
                .map(|s| s.parse().map_err(|_| Error::Domain(format!("bad exponent {key}"))))
                .collect::<Result<Vec<_>>>()?;
            if expo.len() != j.n {
                return Err(Error::Domain("exponent arity mismatch".into()));
            }
            f.add_term(expo, PadicNumber::try_from(c)?);
        }
        Ok(f)
    }
}
