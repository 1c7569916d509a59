//! The finite-quotient tower: truncation of homeomorphisms of `Z_p` to
//! permutations of `Z/p^l`, the reduction maps between levels, closure of
//! finitely generated permutation groups, and the embedded ball-swap
//! (symmetric group) and translation elements.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::diffeo::Diffeo;
use crate::error::{Error, Result};
use crate::padic::Val;

/// A map on the finite ring `Z/p^l`, stored as its value table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteMap {
    pub p: u64,
    pub l: u32,
    pub table: Vec<u64>,
}

impl FiniteMap {
    pub fn identity(p: u64, l: u32) -> Self {
        FiniteMap { p, l, table: (0..p.pow(l)).collect() }
    }

    pub fn size(&self) -> usize {
        self.table.len()
    }

    pub fn is_permutation(&self) -> bool {
        let n = self.table.len();
        if n != self.p.pow(self.l) as usize {
            return false;
        }
        let mut seen = vec![false; n];
        for &v in &self.table {
            if v as usize >= n || seen[v as usize] {
                return false;
            }
            seen[v as usize] = true;
        }
        true
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.l != other.l {
            return Err(Error::Domain(format!(
                "maps live at different levels: ({}, {}) vs ({}, {})",
                self.p, self.l, other.p, other.l
            )));
        }
        Ok(())
    }

    /// `self . other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let table = other.table.iter().map(|&x| self.table[x as usize]).collect();
        Ok(FiniteMap { p: self.p, l: self.l, table })
    }

    pub fn invert(&self) -> Result<Self> {
        if !self.is_permutation() {
            return Err(Error::Integrity("cannot invert a non-permutation".into()));
        }
        let mut table = vec![0u64; self.table.len()];
        for (x, &v) in self.table.iter().enumerate() {
            table[v as usize] = x as u64;
        }
        Ok(FiniteMap { p: self.p, l: self.l, table })
    }

    /// Reduction to a lower level; fails when the map does not factor
    /// through `Z/p^l'`.
    pub fn reduce(&self, l_target: u32) -> Result<Self> {
        if l_target == 0 || l_target > self.l {
            return Err(Error::Domain(format!(
                "cannot reduce a level-{} map to level {l_target}",
                self.l
            )));
        }
        let q = self.p.pow(l_target);
        let mut table = vec![u64::MAX; q as usize];
        for (x, &v) in self.table.iter().enumerate() {
            let xr = (x as u64 % q) as usize;
            let vr = v % q;
            if table[xr] == u64::MAX {
                table[xr] = vr;
            } else if table[xr] != vr {
                return Err(Error::Integrity(format!(
                    "map is not well-defined mod p^{l_target} at {xr}"
                )));
            }
        }
        Ok(FiniteMap { p: self.p, l: l_target, table })
    }
}

/// Truncation `pi_l` of a homeomorphism to the induced map on `Z/p^l`;
/// for elements of the group ball it is a permutation.
pub fn truncate(f: &Diffeo, l: u32) -> Result<FiniteMap> {
    let table = f.table(l)?;
    Ok(FiniteMap { p: f.prime(), l, table: table.to_vec() })
}

/// Projective-limit consistency: reducing the level-`l` truncation agrees
/// with truncating at level `l - 1`.
pub fn reduction_consistency(f: &Diffeo, l: u32) -> Result<bool> {
    if l < 2 {
        return Err(Error::Domain("need l >= 2 to compare with l - 1".into()));
    }
    let top = truncate(f, l)?;
    let low = truncate(f, l - 1)?;
    match top.reduce(l - 1) {
        Ok(r) => Ok(r == low),
        Err(_) => Ok(false),
    }
}

/// A finite group of permutations of `Z/p^l` with its generating set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinitePolyGroup {
    pub p: u64,
    pub l: u32,
    pub elements: Vec<FiniteMap>,
    pub generators: Vec<FiniteMap>,
}

impl FinitePolyGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Index of an element's table inside `elements`.
    pub fn index_of(&self, m: &FiniteMap) -> Option<usize> {
        self.elements.iter().position(|e| e == m)
    }

    /// Permutation tables, in enumeration order (identity first).
    pub fn permutation_tables(&self) -> Vec<Vec<u64>> {
        self.elements.iter().map(|m| m.table.clone()).collect()
    }
}

/// Outcome of a closure run: either the full group or the partial size at
/// which the cap was hit.
#[derive(Debug, Clone)]
pub enum Closure {
    Complete(FinitePolyGroup),
    CapExceeded { partial_size: usize, cap: usize },
}

/// Breadth-first closure of the generated group, with a hard element cap.
pub fn group_closure(generators: &[FiniteMap], cap: usize) -> Result<Closure> {
    if generators.is_empty() {
        return Err(Error::Domain("need at least one generator".into()));
    }
    let (p, l) = (generators[0].p, generators[0].l);
    let mut gens = Vec::new();
    for g in generators {
        if g.p != p || g.l != l {
            return Err(Error::Domain("generators live at different levels".into()));
        }
        if !g.is_permutation() {
            return Err(Error::Domain("generator is not a permutation".into()));
        }
        gens.push(g.clone());
        gens.push(g.invert()?);
    }
    let id = FiniteMap::identity(p, l);
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut elements = vec![id.clone()];
    seen.insert(id.table, 0);
    let mut frontier = vec![0usize];
    while let Some(i) = frontier.pop() {
        let cur = elements[i].clone();
        for g in &gens {
            let next = g.compose(&cur)?;
            if !seen.contains_key(&next.table) {
                if elements.len() >= cap {
                    return Ok(Closure::CapExceeded { partial_size: elements.len(), cap });
                }
                seen.insert(next.table.clone(), elements.len());
                frontier.push(elements.len());
                elements.push(next);
            }
        }
    }
    Ok(Closure::Complete(FinitePolyGroup {
        p,
        l,
        elements,
        generators: generators.to_vec(),
    }))
}

/// The isometry swapping the balls `a + pZ_p` and `b + pZ_p` by the
/// translations `x -> x + (b - a)` and `x -> x + (a - b)`, identity on
/// every other ball. An involution; value-table representation with a
/// tail bound from its local constancy: the Mahler coefficients of a
/// p-periodic integer map satisfy `v_p(a_m) >= floor((m-1)/(p-1))`.
pub fn ball_swap_diffeo(
    p: u64,
    prec: u32,
    l_max: u32,
    a: u64,
    b: u64,
    degree: usize,
) -> Result<Diffeo> {
    if a == b {
        return Err(Error::Domain("ball swap needs two distinct digits".into()));
    }
    if a >= p || b >= p {
        return Err(Error::Domain(format!("digits must lie in 0..{p}")));
    }
    let rule = move |x: u64| -> u64 {
        let digit = x % p;
        let shift: i64 = if digit == a {
            b as i64 - a as i64
        } else if digit == b {
            a as i64 - b as i64
        } else {
            0
        };
        (x as i64 + shift) as u64
    };
    let tail = Val::Finite((degree as i64) / (p as i64 - 1));
    Diffeo::from_integer_values(p, prec, l_max, rule, degree, tail)
}
