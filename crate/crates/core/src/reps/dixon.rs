//! The class-sum character table algorithm in exact modular arithmetic.
//!
//! Work in `F_l` for a prime `l = 1 (mod exp(G))`, `l > 2|G|`: the class
//! matrices `(M_i)_{jk} = a_{ijk}` have the central characters as common
//! eigenvectors, the degrees come out of the orthogonality relation, and
//! the character values lift to cyclotomic integers through the discrete
//! Fourier transform of the power map -- multiplicities are bounded by
//! the degree, hence lift uniquely below `l`.

use crate::error::{Error, Result};

use super::cyclotomic::Cyc;
use super::{Classes, FiniteGroup};

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64, l: u64) -> u64 {
    pow_mod(a, l - 2, l)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest prime `l = 1 (mod e)` with `l > bound`.
fn find_field(e: u64, bound: u64) -> u64 {
    let mut l = (bound / e + 1) * e + 1;
    loop {
        if is_prime(l) {
            return l;
        }
        l += e;
    }
}

/// An element of multiplicative order exactly `e` in `F_l`.
fn root_of_order(e: u64, l: u64) -> u64 {
    if e == 1 {
        return 1;
    }
    let cof = (l - 1) / e;
    let divs = prime_divisors(e);
    for c in 2..l {
        let z = pow_mod(c, cof, l);
        if z == 1 {
            continue;
        }
        if pow_mod(z, e, l) != 1 {
            continue;
        }
        if divs.iter().all(|&q| pow_mod(z, e / q, l) != 1) {
            return z;
        }
    }
    unreachable!("F_l has a cyclic unit group containing order-e elements")
}

// --- dense linear algebra mod l ---

fn mat_vec(m: &[Vec<u64>], v: &[u64], l: u64) -> Vec<u64> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(0u64, |acc, (&a, &b)| (acc + a * b) % l))
        .collect()
}

/// Reduced row echelon form over the first `ncols` columns; row
/// operations extend across the full row width (augmented columns ride
/// along). Returns the pivot column per pivot row.
fn rref(a: &mut [Vec<u64>], ncols: usize, l: u64) -> Vec<usize> {
    let width = a.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(r) = (row..a.len()).find(|&r| !a[r][col].is_multiple_of(l)) else {
            continue;
        };
        a.swap(r, row);
        let inv = inv_mod(a[row][col], l);
        for c in 0..width {
            a[row][c] = a[row][c] * inv % l;
        }
        for r2 in 0..a.len() {
            if r2 != row && a[r2][col] != 0 {
                let f = a[r2][col];
                for c in 0..width {
                    a[r2][c] = (a[r2][c] + (l - f) * a[row][c]) % l;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == a.len() {
            break;
        }
    }
    pivots
}

fn kernel_mod(m: &[Vec<u64>], l: u64) -> Vec<Vec<u64>> {
    let n = m.len();
    let mut a = m.to_vec();
    let pivots = rref(&mut a, n, l);
    let mut out = Vec::new();
    let pivot_set: Vec<Option<usize>> = {
        let mut v = vec![None; n];
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = Some(r);
        }
        v
    };
    for free in 0..n {
        if pivot_set[free].is_some() {
            continue;
        }
        let mut vec = vec![0u64; n];
        vec[free] = 1;
        for col in 0..n {
            if let Some(r) = pivot_set[col] {
                vec[col] = (l - a[r][free] % l) % l;
            }
        }
        out.push(vec);
    }
    out
}

/// Solve `B^T alpha = w` for `alpha` (columns of `B` are the subspace
/// basis vectors); consistent by construction.
fn solve_in_basis(basis: &[Vec<u64>], w: &[u64], l: u64) -> Vec<u64> {
    let k = basis.len();
    let r = w.len();
    let mut aug: Vec<Vec<u64>> = (0..r)
        .map(|i| {
            let mut row: Vec<u64> = basis.iter().map(|b| b[i]).collect();
            row.push(w[i]);
            row
        })
        .collect();
    let pivots = rref(&mut aug, k, l);
    let mut alpha = vec![0u64; k];
    for (row, &col) in pivots.iter().enumerate() {
        alpha[col] = aug[row][k];
    }
    alpha
}

/// Characteristic polynomial of a `k x k` matrix mod `l` by determinant
/// interpolation at `k + 1` points.
fn char_poly(m: &[Vec<u64>], l: u64) -> Vec<u64> {
    let k = m.len();
    let det_at = |lambda: u64| -> u64 {
        let mut a: Vec<Vec<u64>> = m.to_vec();
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = (row[i] + l - lambda % l) % l;
        }
        // elimination determinant
        let mut det = 1u64;
        for col in 0..k {
            let Some(r) = (col..k).find(|&r| a[r][col] != 0) else {
                return 0;
            };
            if r != col {
                a.swap(r, col);
                det = (l - det) % l;
            }
            det = det * a[col][col] % l;
            let inv = inv_mod(a[col][col], l);
            for r2 in col + 1..k {
                if a[r2][col] != 0 {
                    let f = a[r2][col] * inv % l;
                    for c in col..k {
                        a[r2][c] = (a[r2][c] + (l - f) * a[col][c]) % l;
                    }
                }
            }
        }
        det
    };
    // Lagrange interpolation on points 0..=k
    let xs: Vec<u64> = (0..=k as u64).collect();
    let ys: Vec<u64> = xs.iter().map(|&x| det_at(x)).collect();
    let mut coeffs = vec![0u64; k + 1];
    for (i, (&xi, &yi)) in xs.iter().zip(&ys).enumerate() {
        // basis polynomial prod_{j != i} (x - x_j) / (x_i - x_j)
        let mut num = vec![0u64; k + 1];
        num[0] = 1;
        let mut deg = 0;
        let mut denom = 1u64;
        for (j, &xj) in xs.iter().enumerate() {
            if j == i {
                continue;
            }
            // multiply num by (x - xj)
            deg += 1;
            for t in (1..=deg).rev() {
                num[t] = (num[t - 1] + num[t] * (l - xj % l)) % l;
            }
            num[0] = num[0] * (l - xj % l) % l;
            denom = denom * ((xi + l - xj) % l) % l;
        }
        let scale = yi * inv_mod(denom, l) % l;
        for t in 0..=k {
            coeffs[t] = (coeffs[t] + num[t] * scale) % l;
        }
    }
    coeffs
}

fn poly_roots(coeffs: &[u64], l: u64) -> Vec<u64> {
    let mut roots = Vec::new();
    for x in 0..l {
        let mut acc = 0u64;
        for &c in coeffs.iter().rev() {
            acc = (acc * x + c) % l;
        }
        if acc == 0 {
            roots.push(x);
        }
    }
    roots
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// A complete exact character table.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    pub classes: Classes,
    /// Group exponent (the cyclotomic order of all values).
    pub exponent: u32,
    pub degrees: Vec<u64>,
    /// `chars[t][k]` is the value of the t-th irreducible on class `k`.
    pub chars: Vec<Vec<Cyc>>,
}

impl CharacterTable {
    pub fn num_irreps(&self) -> usize {
        self.chars.len()
    }

    pub fn value_at(&self, irrep: usize, element: usize) -> &Cyc {
        &self.chars[irrep][self.classes.class_of[element]]
    }
}

/// Exact inner product `<a, b> = (1/|G|) sum_g a(g) b(g^-1)` of class
/// functions given by class values.
pub fn inner_product(
    g: &FiniteGroup,
    classes: &Classes,
    a: &[Cyc],
    b: &[Cyc],
) -> Result<Cyc> {
    let e = a[0].order();
    let mut acc = Cyc::zero(e);
    for k in 0..classes.reps.len() {
        let kinv = classes.class_of[g.inv(classes.reps[k])];
        let term = a[k].mul(&b[kinv])?.scale(classes.sizes[k] as i64);
        acc = acc.add(&term)?;
    }
    acc.div_int_exact(g.order() as i64)
}

/// Full table computation; `cap` bounds the group order.
pub fn character_table(g: &FiniteGroup, cap: usize) -> Result<CharacterTable> {
    let n = g.order();
    if n > cap {
        return Err(Error::CapExceeded(format!(
            "group order {n} above character-table cap {cap}"
        )));
    }
    let classes = g.conjugacy_classes();
    let r = classes.reps.len();
    let e = g.exponent() as u64;
    let l = find_field(e, (2 * n as u64).max(e + 1));
    let z = root_of_order(e, l);

    // members per class
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); r];
    for x in 0..n {
        members[classes.class_of[x]].push(x);
    }

    // class-multiplication coefficients a[i][j][k]
    let mut a = vec![vec![vec![0u64; r]; r]; r];
    for k in 0..r {
        let zk = classes.reps[k];
        for i in 0..r {
            for &x in &members[i] {
                let y = g.mul(g.inv(x), zk);
                a[i][classes.class_of[y]][k] += 1;
            }
        }
    }

    // split the common eigenspaces of the class matrices
    let id_class = classes.class_of[g.identity()];
    let mut subspaces: Vec<Vec<Vec<u64>>> = vec![(0..r)
        .map(|i| {
            let mut v = vec![0u64; r];
            v[i] = 1;
            v
        })
        .collect()];
    for i in 0..r {
        if subspaces.iter().all(|s| s.len() == 1) {
            break;
        }
        let m_i: Vec<Vec<u64>> = (0..r)
            .map(|j| (0..r).map(|k| a[i][j][k] % l).collect())
            .collect();
        let mut next = Vec::new();
        for s in subspaces {
            if s.len() == 1 {
                next.push(s);
                continue;
            }
            // restriction of M_i to the subspace
            let k = s.len();
            let images: Vec<Vec<u64>> = s.iter().map(|b| mat_vec(&m_i, b, l)).collect();
            let mut rest = vec![vec![0u64; k]; k];
            for (scol, w) in images.iter().enumerate() {
                let alpha = solve_in_basis(&s, w, l);
                for (srow, &c) in alpha.iter().enumerate() {
                    rest[srow][scol] = c;
                }
            }
            let cp = char_poly(&rest, l);
            for root in poly_roots(&cp, l) {
                let mut shifted = rest.clone();
                for (d, row) in shifted.iter_mut().enumerate() {
                    row[d] = (row[d] + l - root) % l;
                }
                let ker = kernel_mod(&shifted, l);
                if ker.is_empty() {
                    continue;
                }
                let sub: Vec<Vec<u64>> = ker
                    .iter()
                    .map(|coeffs| {
                        let mut v = vec![0u64; r];
                        for (b, &c) in s.iter().zip(coeffs) {
                            for (t, &bv) in b.iter().enumerate() {
                                v[t] = (v[t] + c * bv) % l;
                            }
                        }
                        v
                    })
                    .collect();
                next.push(sub);
            }
        }
        subspaces = next;
    }
    if subspaces.len() != r || subspaces.iter().any(|s| s.len() != 1) {
        return Err(Error::Integrity(
            "class matrices failed to split into one-dimensional eigenspaces".into(),
        ));
    }

    // central characters, normalized at the identity class
    let mut omegas: Vec<Vec<u64>> = Vec::with_capacity(r);
    for s in &subspaces {
        let v = &s[0];
        if v[id_class] == 0 {
            return Err(Error::Integrity("eigenvector vanishes at the identity".into()));
        }
        let inv = inv_mod(v[id_class], l);
        omegas.push(v.iter().map(|&c| c * inv % l).collect());
    }

    // degrees from sum_i w(i) w(i*) / |C_i| = |G| / d^2
    let inv_class: Vec<usize> = (0..r)
        .map(|k| classes.class_of[g.inv(classes.reps[k])])
        .collect();
    let mut degrees = Vec::with_capacity(r);
    for w in &omegas {
        let mut s = 0u64;
        for k in 0..r {
            s = (s + w[k] * w[inv_class[k]] % l * inv_mod(classes.sizes[k] as u64, l)) % l;
        }
        let d2 = n as u64 % l * inv_mod(s, l) % l;
        let mut found = None;
        for d in 1..=isqrt(n as u64) {
            if d * d % l == d2 {
                found = Some(d);
                break;
            }
        }
        let d =
            found.ok_or_else(|| Error::Integrity("no integer degree matches".into()))?;
        degrees.push(d);
    }

    // character values mod l, then the cyclotomic lift via power maps
    let mut chars = Vec::with_capacity(r);
    for (t, w) in omegas.iter().enumerate() {
        let chi_mod: Vec<u64> = (0..r)
            .map(|k| degrees[t] % l * w[k] % l * inv_mod(classes.sizes[k] as u64, l) % l)
            .collect();
        let mut row = Vec::with_capacity(r);
        for k in 0..r {
            let rep = classes.reps[k];
            let o = g.element_order(rep) as u64;
            let zo = pow_mod(z, e / o, l);
            let zo_inv = inv_mod(zo, l);
            let mut value = Cyc::zero(e as u32);
            for expo in 0..o {
                // multiplicity of the eigenvalue zeta_o^expo
                let mut m = 0u64;
                let mut gj = g.identity();
                for j in 0..o {
                    let cj = chi_mod[classes.class_of[gj]];
                    m = (m + cj * pow_mod(zo_inv, expo * j % o, l)) % l;
                    gj = g.mul(gj, rep);
                }
                m = m * inv_mod(o, l) % l;
                if m > degrees[t] {
                    return Err(Error::Integrity(format!(
                        "eigenvalue multiplicity {m} exceeds the degree {}",
                        degrees[t]
                    )));
                }
                if m > 0 {
                    let root = Cyc::zeta_pow(e as u32, (expo * (e / o)) as u32);
                    value = value.add(&root.scale(m as i64))?;
                }
            }
            row.push(value);
        }
        chars.push(row);
    }

    let table = CharacterTable { classes, exponent: e as u32, degrees, chars };

    // exactness gate: orthogonality and the degree sum
    if !verify_orthogonality(g, &table)? {
        return Err(Error::Integrity("orthogonality failed after lifting".into()));
    }
    let sum_sq: u64 = table.degrees.iter().map(|d| d * d).sum();
    if sum_sq != n as u64 {
        return Err(Error::Integrity(format!(
            "sum of squared degrees {sum_sq} != |G| = {n}"
        )));
    }
    Ok(table)
}

/// `<chi_i, chi_j> = delta_ij`, exactly, for every pair.
pub fn verify_orthogonality(g: &FiniteGroup, t: &CharacterTable) -> Result<bool> {
    for i in 0..t.num_irreps() {
        for j in 0..t.num_irreps() {
            let ip = inner_product(g, &t.classes, &t.chars[i], &t.chars[j])?;
            let expect = i64::from(i == j);
            if ip.as_int() != Some(expect) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
