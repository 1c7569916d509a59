//! Finite-level representation theory: groups by multiplication table,
//! exact character tables, Frobenius induction, and the Mackey
//! restriction and internal-tensor-product identities verified as exact
//! character equalities over cyclotomic integers.

pub mod cyclotomic;
pub mod dixon;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

pub use cyclotomic::Cyc;
pub use dixon::{character_table, inner_product, verify_orthogonality, CharacterTable};

/// Default cap for character-table computations.
pub const TABLE_CAP: usize = 2000;

/// A finite group on elements `0..n` by its multiplication table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteGroup {
    mul: Vec<Vec<u16>>,
    inv: Vec<u16>,
    identity: usize,
}

/// Conjugacy class data: representative, size and the class of every
/// element.
#[derive(Debug, Clone)]
pub struct Classes {
    pub reps: Vec<usize>,
    pub sizes: Vec<usize>,
    pub class_of: Vec<usize>,
}

impl FiniteGroup {
    /// Build from a multiplication table, validating the axioms
    /// (associativity exhaustively up to order 200, sampled beyond).
    pub fn from_mul_table(mul: Vec<Vec<u16>>) -> Result<Self> {
        let n = mul.len();
        if n == 0 || mul.iter().any(|row| row.len() != n) {
            return Err(Error::Integrity("multiplication table is not square".into()));
        }
        let mut identity = None;
        for e in 0..n {
            if (0..n).all(|x| mul[e][x] as usize == x && mul[x][e] as usize == x) {
                identity = Some(e);
                break;
            }
        }
        let identity =
            identity.ok_or_else(|| Error::Integrity("no two-sided identity".into()))?;
        let mut inv = vec![u16::MAX; n];
        for x in 0..n {
            for y in 0..n {
                if mul[x][y] as usize == identity && mul[y][x] as usize == identity {
                    inv[x] = y as u16;
                    break;
                }
            }
            if inv[x] == u16::MAX {
                return Err(Error::Integrity(format!("element {x} has no inverse")));
            }
        }
        let g = FiniteGroup { mul, inv, identity };
        if n <= 200 {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        if g.mul(g.mul(x, y), z) != g.mul(x, g.mul(y, z)) {
                            return Err(Error::Integrity(format!(
                                "associativity fails at ({x},{y},{z})"
                            )));
                        }
                    }
                }
            }
        } else {
            for s in 0..5000usize {
                let (x, y, z) = (s % n, (s * 31 + 7) % n, (s * 101 + 13) % n);
                if g.mul(g.mul(x, y), z) != g.mul(x, g.mul(y, z)) {
                    return Err(Error::Integrity("associativity spot check failed".into()));
                }
            }
        }
        Ok(g)
    }

    /// Build from a closed set of permutation tables (for instance the
    /// elements of a profinite quotient group).
    pub fn from_permutations(perms: &[Vec<u64>]) -> Result<Self> {
        let n = perms.len();
        if n == 0 {
            return Err(Error::Domain("no permutations given".into()));
        }
        if n > 4096 {
            return Err(Error::CapExceeded(format!(
                "{n} permutations is above the group-table bound"
            )));
        }
        let index: HashMap<&[u64], usize> =
            perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
        let mut mul = vec![vec![0u16; n]; n];
        for (i, f) in perms.iter().enumerate() {
            for (j, g) in perms.iter().enumerate() {
                let composed: Vec<u64> = g.iter().map(|&x| f[x as usize]).collect();
                let k = index.get(composed.as_slice()).ok_or_else(|| {
                    Error::Domain("permutation set is not closed under composition".into())
                })?;
                mul[i][j] = *k as u16;
            }
        }
        Self::from_mul_table(mul)
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.mul[x][y] as usize
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inv[x] as usize
    }

    pub fn conjugate(&self, g: usize, x: usize) -> usize {
        // g x g^-1
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn element_order(&self, x: usize) -> usize {
        let mut k = 1;
        let mut acc = x;
        while acc != self.identity {
            acc = self.mul(acc, x);
            k += 1;
        }
        k
    }

    /// Least common multiple of the element orders.
    pub fn exponent(&self) -> usize {
        let mut e = 1usize;
        for x in 0..self.order() {
            let o = self.element_order(x);
            e = e / gcd(e, o) * o;
        }
        e
    }

    pub fn conjugacy_classes(&self) -> Classes {
        let n = self.order();
        let mut class_of = vec![usize::MAX; n];
        let mut reps = Vec::new();
        let mut sizes = Vec::new();
        for x in 0..n {
            if class_of[x] != usize::MAX {
                continue;
            }
            let c = reps.len();
            let mut size = 0;
            for g in 0..n {
                let y = self.conjugate(g, x);
                if class_of[y] == usize::MAX {
                    class_of[y] = c;
                    size += 1;
                }
            }
            reps.push(x);
            sizes.push(size);
        }
        Classes { reps, sizes, class_of }
    }

    /// Closure of a generating set, as parent indices.
    pub fn generated_set(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        seen.insert(self.identity);
        let mut frontier = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                for y in [self.mul(g, x), self.mul(self.inv(g), x)] {
                    if seen.insert(y) {
                        frontier.push(y);
                    }
                }
            }
        }
        seen.into_iter().collect()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A verified subgroup: the sorted parent indices plus its own group
/// structure and the index translation.
#[derive(Debug, Clone)]
pub struct Subgroup {
    pub elements: Vec<usize>,
    pub group: FiniteGroup,
    to_sub: HashMap<usize, usize>,
}

impl Subgroup {
    /// Verify closure and package the subgroup.
    pub fn new(g: &FiniteGroup, elements: &[usize]) -> Result<Self> {
        let mut elems: Vec<usize> = elements.to_vec();
        elems.sort_unstable();
        elems.dedup();
        if !elems.contains(&g.identity()) {
            return Err(Error::Domain("subgroup must contain the identity".into()));
        }
        let to_sub: HashMap<usize, usize> =
            elems.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let m = elems.len();
        let mut mul = vec![vec![0u16; m]; m];
        for (i, &x) in elems.iter().enumerate() {
            if !to_sub.contains_key(&g.inv(x)) {
                return Err(Error::Domain(format!("not closed under inverse at {x}")));
            }
            for (j, &y) in elems.iter().enumerate() {
                let z = g.mul(x, y);
                let Some(&k) = to_sub.get(&z) else {
                    return Err(Error::Domain(format!(
                        "not closed under multiplication at ({x},{y})"
                    )));
                };
                mul[i][j] = k as u16;
            }
        }
        Ok(Subgroup { elements: elems, group: FiniteGroup::from_mul_table(mul)?, to_sub })
    }

    pub fn generated(g: &FiniteGroup, gens: &[usize]) -> Result<Self> {
        Self::new(g, &g.generated_set(gens))
    }

    pub fn whole(g: &FiniteGroup) -> Result<Self> {
        Self::new(g, &(0..g.order()).collect::<Vec<_>>())
    }

    pub fn trivial(g: &FiniteGroup) -> Result<Self> {
        Self::new(g, &[g.identity()])
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, parent_index: usize) -> bool {
        self.to_sub.contains_key(&parent_index)
    }

    pub fn sub_index(&self, parent_index: usize) -> Option<usize> {
        self.to_sub.get(&parent_index).copied()
    }

    /// `g^-1 H g` as a subgroup of the same parent.
    pub fn conjugated(&self, parent: &FiniteGroup, g: usize) -> Result<Subgroup> {
        let elems: Vec<usize> = self
            .elements
            .iter()
            .map(|&x| parent.mul(parent.mul(parent.inv(g), x), g))
            .collect();
        Subgroup::new(parent, &elems)
    }

    /// Intersection with another subgroup of the same parent.
    pub fn intersect(&self, parent: &FiniteGroup, other: &Subgroup) -> Result<Subgroup> {
        let elems: Vec<usize> = self
            .elements
            .iter()
            .copied()
            .filter(|&x| other.contains(x))
            .collect();
        Subgroup::new(parent, &elems)
    }
}

// --- standard groups ---

fn perms_of(n: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for k in 0..n {
        let mut next = Vec::new();
        for p in out {
            for slot in 0..=p.len() {
                let mut q = p.clone();
                q.insert(slot, k as u8);
                next.push(q);
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// The symmetric group on `n` letters via its permutation action.
pub fn symmetric_group(n: usize) -> Result<(FiniteGroup, Vec<Vec<u8>>)> {
    if n == 0 || n > 6 {
        return Err(Error::Domain("symmetric group supported for 1..=6 letters".into()));
    }
    let perms = perms_of(n);
    let index: HashMap<&[u8], usize> =
        perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let m = perms.len();
    let mut mul = vec![vec![0u16; m]; m];
    for (i, f) in perms.iter().enumerate() {
        for (j, g) in perms.iter().enumerate() {
            let comp: Vec<u8> = g.iter().map(|&x| f[x as usize]).collect();
            mul[i][j] = index[comp.as_slice()] as u16;
        }
    }
    Ok((FiniteGroup::from_mul_table(mul)?, perms))
}

fn perm_parity(p: &[u8]) -> bool {
    let mut even = true;
    let mut seen = vec![false; p.len()];
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x] as usize;
            len += 1;
        }
        if len % 2 == 0 {
            even = !even;
        }
    }
    even
}

/// The alternating subgroup inside [`symmetric_group`]`(n)`.
pub fn alternating_subgroup(g: &FiniteGroup, perms: &[Vec<u8>]) -> Result<Subgroup> {
    let elems: Vec<usize> = perms
        .iter()
        .enumerate()
        .filter(|(_, p)| perm_parity(p))
        .map(|(i, _)| i)
        .collect();
    Subgroup::new(g, &elems)
}

pub fn cyclic_group(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::Domain("cyclic group needs n >= 1".into()));
    }
    let mul = (0..n)
        .map(|i| (0..n).map(|j| ((i + j) % n) as u16).collect())
        .collect();
    FiniteGroup::from_mul_table(mul)
}

/// The dihedral group of order 8 as symmetries of the square `0..4`.
pub fn dihedral_8() -> Result<(FiniteGroup, Vec<Vec<u8>>)> {
    let r = vec![1u8, 2, 3, 0];
    let s = vec![1u8, 0, 3, 2];
    let mut set: BTreeSet<Vec<u8>> = BTreeSet::new();
    let id: Vec<u8> = (0..4).collect();
    set.insert(id.clone());
    let mut frontier = vec![id];
    while let Some(p) = frontier.pop() {
        for g in [&r, &s] {
            let q: Vec<u8> = p.iter().map(|&x| g[x as usize]).collect();
            if set.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    let perms: Vec<Vec<u8>> = set.into_iter().collect();
    let index: HashMap<&[u8], usize> =
        perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let m = perms.len();
    let mut mul = vec![vec![0u16; m]; m];
    for (i, f) in perms.iter().enumerate() {
        for (j, g) in perms.iter().enumerate() {
            let comp: Vec<u8> = g.iter().map(|&x| f[x as usize]).collect();
            mul[i][j] = index[comp.as_slice()] as u16;
        }
    }
    Ok((FiniteGroup::from_mul_table(mul)?, perms))
}

/// The quaternion group `{±1, ±i, ±j, ±k}`; element `2a + s` is the
/// `a`-th axis with sign `(-1)^s`.
pub fn quaternion_8() -> Result<FiniteGroup> {
    // axis_mul[a][b] = (axis, sign) for axes 0=1, 1=i, 2=j, 3=k
    let axis_mul = [
        [(0, 0), (1, 0), (2, 0), (3, 0)],
        [(1, 0), (0, 1), (3, 0), (2, 1)],
        [(2, 0), (3, 1), (0, 1), (1, 0)],
        [(3, 0), (2, 0), (1, 1), (0, 1)],
    ];
    let mut mul = vec![vec![0u16; 8]; 8];
    for x in 0..8usize {
        for y in 0..8usize {
            let (a1, s1) = (x / 2, x % 2);
            let (a2, s2) = (y / 2, y % 2);
            let (a, s) = axis_mul[a1][a2];
            let sign = (s1 + s2 + s) % 2;
            mul[x][y] = (a * 2 + sign) as u16;
        }
    }
    FiniteGroup::from_mul_table(mul)
}

// --- characters and induction ---

/// A character (class function) of a subgroup, stored as values on the
/// subgroup's own conjugacy classes.
#[derive(Debug, Clone)]
pub struct SubCharacter {
    pub classes: Classes,
    pub values: Vec<Cyc>,
}

impl SubCharacter {
    pub fn from_table_row(t: &CharacterTable, row: usize) -> Self {
        SubCharacter { classes: t.classes.clone(), values: t.chars[row].clone() }
    }

    /// Value at a subgroup element (subgroup index).
    pub fn at(&self, sub_element: usize) -> &Cyc {
        &self.values[self.classes.class_of[sub_element]]
    }
}

/// Frobenius induction:
/// `(Ind chi)(g) = (1/|H|) sum_{x in G, x^-1 g x in H} chi(x^-1 g x)`,
/// exact; returns values on the classes of `G`.
pub fn induce(
    g: &FiniteGroup,
    g_classes: &Classes,
    h: &Subgroup,
    chi: &SubCharacter,
    e: u32,
) -> Result<Vec<Cyc>> {
    let n = g.order();
    let mut out = Vec::with_capacity(g_classes.reps.len());
    for &rep in &g_classes.reps {
        let mut acc = Cyc::zero(e);
        for x in 0..n {
            let y = g.mul(g.mul(g.inv(x), rep), x);
            if let Some(ys) = h.sub_index(y) {
                acc = acc.add(chi.at(ys))?;
            }
        }
        out.push(acc.div_int_exact(h.order() as i64)?);
    }
    Ok(out)
}

/// Restriction of a class function on `G` to values on the classes of a
/// subgroup.
pub fn restrict(
    g_classes: &Classes,
    values: &[Cyc],
    h: &Subgroup,
) -> Vec<Cyc> {
    h.classes_in_parent()
        .iter()
        .map(|&parent_rep| values[g_classes.class_of[parent_rep]].clone())
        .collect()
}

impl Subgroup {
    /// Parent indices of this subgroup's class representatives.
    pub fn classes_in_parent(&self) -> Vec<usize> {
        self.group
            .conjugacy_classes()
            .reps
            .iter()
            .map(|&i| self.elements[i])
            .collect()
    }
}

/// Double cosets `K g N`: representatives and sizes, partitioning `G`.
pub fn double_cosets(g: &FiniteGroup, k: &Subgroup, n: &Subgroup) -> Vec<(usize, usize)> {
    let order = g.order();
    let mut seen = vec![false; order];
    let mut out = Vec::new();
    for rep in 0..order {
        if seen[rep] {
            continue;
        }
        let mut size = 0;
        for &a in &k.elements {
            for &b in &n.elements {
                let x = g.mul(g.mul(a, rep), b);
                if !seen[x] {
                    seen[x] = true;
                    size += 1;
                }
            }
        }
        out.push((rep, size));
    }
    out
}

/// Certificate of the restriction identity: the per-coset induced
/// constituents, both sides as values on the classes of `N`.
#[derive(Debug, Clone)]
pub struct MackeyCertificate {
    pub holds: bool,
    pub cosets: Vec<(usize, usize)>,
    pub lhs: Vec<Cyc>,
    pub rhs: Vec<Cyc>,
    pub per_coset: Vec<Vec<Cyc>>,
}

/// The Mackey restriction identity
/// `Res_N Ind_K^G chi = sum_{g in K\G/N} Ind_{N ∩ g^-1 K g}^N (chi^g)`,
/// verified as an exact equality of characters of `N`.
pub fn mackey_restriction_check(
    g: &FiniteGroup,
    k: &Subgroup,
    n: &Subgroup,
    chi: &SubCharacter,
    e: u32,
) -> Result<MackeyCertificate> {
    let g_classes = g.conjugacy_classes();
    let ind = induce(g, &g_classes, k, chi, e)?;
    let lhs = restrict(&g_classes, &ind, n);

    let n_class_parent = n.classes_in_parent();
    let cosets = double_cosets(g, k, n);
    let mut per_coset = Vec::with_capacity(cosets.len());
    let mut rhs = vec![Cyc::zero(e); n_class_parent.len()];
    for &(grep, _) in &cosets {
        // M = N ∩ g^-1 K g, with character y -> chi(g y g^-1)
        let m_elems: Vec<usize> = n
            .elements
            .iter()
            .copied()
            .filter(|&y| k.contains(g.conjugate(grep, y)))
            .collect();
        let m_order = m_elems.len() as i64;
        let m_set: std::collections::HashSet<usize> = m_elems.iter().copied().collect();
        // induce from M to N directly in parent indices
        let mut coset_char = Vec::with_capacity(n_class_parent.len());
        for &nrep in &n_class_parent {
            let mut acc = Cyc::zero(e);
            for &x in &n.elements {
                let y = g.mul(g.mul(g.inv(x), nrep), x);
                if m_set.contains(&y) {
                    let conj = g.conjugate(grep, y);
                    let ks = k.sub_index(conj).expect("conjugate lies in K");
                    acc = acc.add(chi.at(ks))?;
                }
            }
            coset_char.push(acc.div_int_exact(m_order)?);
        }
        for (t, v) in coset_char.iter().enumerate() {
            rhs[t] = rhs[t].add(v)?;
        }
        per_coset.push(coset_char);
    }
    let holds = lhs.iter().zip(&rhs).all(|(a, b)| a == b);
    Ok(MackeyCertificate { holds, cosets, lhs, rhs, per_coset })
}

/// Certificate of the internal tensor product identity, both sides as
/// values on the classes of `G`.
#[derive(Debug, Clone)]
pub struct TensorCertificate {
    pub holds: bool,
    pub cosets: Vec<(usize, usize)>,
    pub lhs: Vec<Cyc>,
    pub rhs: Vec<Cyc>,
    pub per_coset: Vec<Vec<Cyc>>,
}

/// The internal tensor product identity
/// `Ind_K^G chi . Ind_N^G psi =
///  sum_{g in K\G/N} Ind_{g^-1 K g ∩ N}^G ((chi o conj_g) . Res psi)`,
/// verified exactly on the classes of `G`.
pub fn tensor_product_check(
    g: &FiniteGroup,
    k: &Subgroup,
    n: &Subgroup,
    chi: &SubCharacter,
    psi: &SubCharacter,
    e: u32,
) -> Result<TensorCertificate> {
    let g_classes = g.conjugacy_classes();
    let ind_chi = induce(g, &g_classes, k, chi, e)?;
    let ind_psi = induce(g, &g_classes, n, psi, e)?;
    let lhs: Vec<Cyc> = ind_chi
        .iter()
        .zip(&ind_psi)
        .map(|(a, b)| a.mul(b))
        .collect::<Result<Vec<_>>>()?;

    let cosets = double_cosets(g, k, n);
    let mut per_coset = Vec::with_capacity(cosets.len());
    let mut rhs = vec![Cyc::zero(e); g_classes.reps.len()];
    let order = g.order();
    for &(grep, _) in &cosets {
        let m_elems: Vec<usize> = n
            .elements
            .iter()
            .copied()
            .filter(|&y| k.contains(g.conjugate(grep, y)))
            .collect();
        let m_order = m_elems.len() as i64;
        let m_set: std::collections::HashSet<usize> = m_elems.iter().copied().collect();
        // gamma(y) = chi(g y g^-1) psi(y) on M, induced to G
        let mut coset_char = Vec::with_capacity(g_classes.reps.len());
        for &rep in &g_classes.reps {
            let mut acc = Cyc::zero(e);
            for x in 0..order {
                let y = g.mul(g.mul(g.inv(x), rep), x);
                if m_set.contains(&y) {
                    let kc = g.conjugate(grep, y);
                    let ks = k.sub_index(kc).expect("conjugate lies in K");
                    let ns = n.sub_index(y).expect("y lies in N");
                    acc = acc.add(&chi.at(ks).mul(psi.at(ns))?)?;
                }
            }
            coset_char.push(acc.div_int_exact(m_order)?);
        }
        for (t, v) in coset_char.iter().enumerate() {
            rhs[t] = rhs[t].add(v)?;
        }
        per_coset.push(coset_char);
    }
    let holds = lhs.iter().zip(&rhs).all(|(a, b)| a == b);
    Ok(TensorCertificate { holds, cosets, lhs, rhs, per_coset })
}

/// Multiplicities of each irreducible in the regular representation,
/// computed as honest inner products; they equal the degrees.
pub fn decompose_regular(g: &FiniteGroup, t: &CharacterTable) -> Result<Vec<u64>> {
    let e = t.exponent;
    let id_class = t.classes.class_of[g.identity()];
    let reg: Vec<Cyc> = (0..t.classes.reps.len())
        .map(|kc| {
            if kc == id_class {
                Cyc::from_int(e, g.order() as i64)
            } else {
                Cyc::zero(e)
            }
        })
        .collect();
    let mut mults = Vec::with_capacity(t.num_irreps());
    for row in &t.chars {
        let m = inner_product(g, &t.classes, &reg, row)?;
        let v = m
            .as_int()
            .ok_or_else(|| Error::Integrity("regular multiplicity not an integer".into()))?;
        if v < 0 {
            return Err(Error::Integrity("negative multiplicity".into()));
        }
        mults.push(v as u64);
    }
    Ok(mults)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degrees_sorted(t: &CharacterTable) -> Vec<u64> {
        let mut d = t.degrees.clone();
        d.sort_unstable();
        d
    }

    #[test]
    fn cyclic_groups() {
        for n in 1..=12 {
            let g = cyclic_group(n).unwrap();
            let classes = g.conjugacy_classes();
            assert_eq!(classes.reps.len(), n, "abelian: singleton classes");
            let t = character_table(&g, TABLE_CAP).unwrap();
            assert!(t.degrees.iter().all(|&d| d == 1));
            assert!(verify_orthogonality(&g, &t).unwrap());
        }
    }

    #[test]
    fn s3_table() {
        let (g, _) = symmetric_group(3).unwrap();
        let classes = g.conjugacy_classes();
        let mut sizes = classes.sizes.clone();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 3]);
        let t = character_table(&g, TABLE_CAP).unwrap();
        assert_eq!(degrees_sorted(&t), vec![1, 1, 2]);
        let mults = decompose_regular(&g, &t).unwrap();
        assert_eq!(mults, t.degrees);
    }

    #[test]
    fn s4_d4_q8_tables() {
        let (s4, _) = symmetric_group(4).unwrap();
        let t = character_table(&s4, TABLE_CAP).unwrap();
        assert_eq!(degrees_sorted(&t), vec![1, 1, 2, 3, 3]);
        let (d4, _) = dihedral_8().unwrap();
        let t = character_table(&d4, TABLE_CAP).unwrap();
        assert_eq!(degrees_sorted(&t), vec![1, 1, 1, 1, 2]);
        let q8 = quaternion_8().unwrap();
        let t = character_table(&q8, TABLE_CAP).unwrap();
        assert_eq!(degrees_sorted(&t), vec![1, 1, 1, 1, 2]);
        let mults = decompose_regular(&q8, &t).unwrap();
        assert_eq!(mults, t.degrees);
    }

    #[test]
    fn induction_examples() {
        let (g, perms) = symmetric_group(3).unwrap();
        let g_classes = g.conjugacy_classes();
        let e = g.exponent() as u32;
        // H = G: Ind chi = chi
        let whole = Subgroup::whole(&g).unwrap();
        let t = character_table(&g, TABLE_CAP).unwrap();
        for row in 0..t.num_irreps() {
            let chi = SubCharacter::from_table_row(&character_table(&whole.group, TABLE_CAP).unwrap(), 0);
            let _ = chi;
            // use the parent table directly as the subgroup character
            let chi = SubCharacter {
                classes: t.classes.clone(),
                values: t.chars[row].clone(),
            };
            let ind = induce(&g, &g_classes, &whole, &chi, e).unwrap();
            assert_eq!(ind, t.chars[row], "row {row}");
        }
        // trivial chi of trivial H: the regular character
        let triv = Subgroup::trivial(&g).unwrap();
        let chi = SubCharacter {
            classes: triv.group.conjugacy_classes(),
            values: vec![Cyc::from_int(e, 1)],
        };
        let ind = induce(&g, &g_classes, &triv, &chi, e).unwrap();
        for (kc, v) in ind.iter().enumerate() {
            let expect = if g_classes.reps[kc] == g.identity() {
                Cyc::from_int(e, 6)
            } else {
                Cyc::zero(e)
            };
            assert_eq!(*v, expect);
        }
        // nontrivial linear character of A3 induces the 2-dim irreducible
        let a3 = alternating_subgroup(&g, &perms).unwrap();
        assert_eq!(a3.order(), 3);
        let ta3 = character_table(&a3.group, TABLE_CAP).unwrap();
        let row = (0..3)
            .find(|&r| ta3.chars[r].iter().any(|v| v.as_int().is_none()))
            .expect("A3 has a genuinely complex character");
        // lift the A3 character into the exponent of S3
        let chi = SubCharacter {
            classes: ta3.classes.clone(),
            values: ta3.chars[row]
                .iter()
                .map(|v| lift_cyc(v, e))
                .collect::<Result<Vec<_>>>()
                .unwrap(),
        };
        let ind = induce(&g, &g_classes, &a3, &chi, e).unwrap();
        let t2 = t
            .degrees
            .iter()
            .position(|&d| d == 2)
            .expect("S3 has a degree-2 irreducible");
        assert_eq!(ind, t.chars[t2]);
    }

    /// Re-express a cyclotomic value of order `e1 | e2` in order `e2`.
    fn lift_cyc(v: &Cyc, e2: u32) -> Result<Cyc> {
        let e1 = v.order();
        assert_eq!(e2 % e1, 0);
        let k = e2 / e1;
        // expand in the power basis: coefficient i multiplies zeta_e1^i
        let mut out = Cyc::zero(e2);
        for (i, &c) in v.coeffs().iter().enumerate() {
            if c != 0 {
                out = out.add(&Cyc::zeta_pow(e2, (i as u32 * k) % e2).scale(c))?;
            }
        }
        Ok(out)
    }

    #[test]
    fn double_coset_examples() {
        let (g, perms) = symmetric_group(3).unwrap();
        let whole = Subgroup::whole(&g).unwrap();
        let triv = Subgroup::trivial(&g).unwrap();
        assert_eq!(double_cosets(&g, &whole, &whole).len(), 1);
        assert_eq!(double_cosets(&g, &triv, &triv).len(), 6);
        // K = N = <(12)>: classes of sizes 2 and 4
        let swap = perms.iter().position(|p| p == &vec![1u8, 0, 2]).unwrap();
        let k = Subgroup::generated(&g, &[swap]).unwrap();
        let mut sizes: Vec<usize> =
            double_cosets(&g, &k, &k).iter().map(|&(_, s)| s).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 4]);
    }

    #[test]
    fn mackey_on_s3() {
        let (g, perms) = symmetric_group(3).unwrap();
        let e = g.exponent() as u32;
        let a3 = alternating_subgroup(&g, &perms).unwrap();
        let swap = perms.iter().position(|p| p == &vec![1u8, 0, 2]).unwrap();
        let n = Subgroup::generated(&g, &[swap]).unwrap();
        // trivial character of A3
        let chi = SubCharacter {
            classes: a3.group.conjugacy_classes(),
            values: vec![Cyc::from_int(e, 1); 3],
        };
        let cert = mackey_restriction_check(&g, &a3, &n, &chi, e).unwrap();
        assert!(cert.holds);
        assert_eq!(cert.cosets.len(), 1, "A3 swap gives a single double coset");
    }

    #[test]
    fn mackey_with_whole_group_is_restriction() {
        let (g, perms) = symmetric_group(3).unwrap();
        let e = g.exponent() as u32;
        let whole = Subgroup::whole(&g).unwrap();
        let swap = perms.iter().position(|p| p == &vec![1u8, 0, 2]).unwrap();
        let n = Subgroup::generated(&g, &[swap]).unwrap();
        let t = character_table(&g, TABLE_CAP).unwrap();
        // K = G: the identity reduces to Res_N chi on both sides
        let chi = SubCharacter {
            classes: whole.group.conjugacy_classes(),
            values: {
                // the whole-group subgroup relabels elements; evaluate the
                // parent character on its class representatives
                let wc = whole.group.conjugacy_classes();
                wc.reps
                    .iter()
                    .map(|&i| t.chars[2][t.classes.class_of[whole.elements[i]]].clone())
                    .collect()
            },
        };
        let cert = mackey_restriction_check(&g, &whole, &n, &chi, e).unwrap();
        assert!(cert.holds);
        assert_eq!(cert.cosets.len(), 1);
        let res = restrict(&g.conjugacy_classes(), &t.chars[2], &n);
        assert_eq!(cert.lhs, res);
    }

    #[test]
    fn tensor_with_whole_groups_is_pointwise_product() {
        let (g, _) = symmetric_group(3).unwrap();
        let e = g.exponent() as u32;
        let whole = Subgroup::whole(&g).unwrap();
        let t = character_table(&g, TABLE_CAP).unwrap();
        let wc = whole.group.conjugacy_classes();
        let lift_row = |row: usize| SubCharacter {
            classes: wc.clone(),
            values: wc
                .reps
                .iter()
                .map(|&i| t.chars[row][t.classes.class_of[whole.elements[i]]].clone())
                .collect(),
        };
        let two = (0..t.num_irreps()).find(|&r| t.degrees[r] == 2).unwrap();
        let chi = lift_row(two);
        let psi = lift_row(two);
        let cert = tensor_product_check(&g, &whole, &whole, &chi, &psi, e).unwrap();
        assert!(cert.holds);
        // lhs is the pointwise square of the degree-2 character
        let classes = g.conjugacy_classes();
        for (k, v) in cert.lhs.iter().enumerate() {
            let expect = t.chars[two][k].mul(&t.chars[two][k]).unwrap();
            assert_eq!(*v, expect, "class {k}");
        }
        let _ = classes;
    }

    #[test]
    fn tensor_on_s3() {
        let (g, perms) = symmetric_group(3).unwrap();
        let e = g.exponent() as u32;
        let a3 = alternating_subgroup(&g, &perms).unwrap();
        let swap = perms.iter().position(|p| p == &vec![1u8, 0, 2]).unwrap();
        let n = Subgroup::generated(&g, &[swap]).unwrap();
        let chi = SubCharacter {
            classes: a3.group.conjugacy_classes(),
            values: vec![Cyc::from_int(e, 1); 3],
        };
        let psi = SubCharacter {
            classes: n.group.conjugacy_classes(),
            values: vec![Cyc::from_int(e, 1); 2],
        };
        let cert = tensor_product_check(&g, &a3, &n, &chi, &psi, e).unwrap();
        assert!(cert.holds);
        // Burnside: both sides are permutation characters
        let id_class = g.conjugacy_classes().class_of[g.identity()];
        assert_eq!(cert.lhs[id_class].as_int(), Some(6));
    }

    #[test]
    fn frobenius_reciprocity() {
        let (g, perms) = symmetric_group(3).unwrap();
        let e = g.exponent() as u32;
        let g_classes = g.conjugacy_classes();
        let t = character_table(&g, TABLE_CAP).unwrap();
        let a3 = alternating_subgroup(&g, &perms).unwrap();
        let ta3 = character_table(&a3.group, TABLE_CAP).unwrap();
        for hrow in 0..ta3.num_irreps() {
            let chi = SubCharacter {
                classes: ta3.classes.clone(),
                values: ta3.chars[hrow]
                    .iter()
                    .map(|v| lift_cyc(v, e))
                    .collect::<Result<Vec<_>>>()
                    .unwrap(),
            };
            let ind = induce(&g, &g_classes, &a3, &chi, e).unwrap();
            for grow in 0..t.num_irreps() {
                // <Ind chi, psi>_G
                let lhs = inner_product(&g, &g_classes, &ind, &t.chars[grow]).unwrap();
                // <chi, Res psi>_H
                let res = restrict(&g_classes, &t.chars[grow], &a3);
                let rhs = inner_product(&a3.group, &ta3.classes, &chi.values, &res).unwrap();
                assert_eq!(lhs, rhs, "h={hrow} g={grow}");
            }
        }
    }

    #[test]
    fn bad_subgroup_rejected() {
        let (g, perms) = symmetric_group(3).unwrap();
        let swap = perms.iter().position(|p| p == &vec![1u8, 0, 2]).unwrap();
        let cycle = perms.iter().position(|p| p == &vec![1u8, 2, 0]).unwrap();
        // {e, swap, cycle} is not closed
        assert!(Subgroup::new(&g, &[g.identity(), swap, cycle]).is_err());
    }

    #[test]
    fn bad_mul_table_rejected() {
        // break associativity
        let mut mul = vec![vec![0u16; 3]; 3];
        for i in 0..3 {
            for j in 0..3usize {
                mul[i][j] = ((i + j) % 3) as u16;
            }
        }
        mul[2][2] = 2; // now 2*2=2 but 2 has inverse issues
        assert!(FiniteGroup::from_mul_table(mul).is_err());
    }
}
