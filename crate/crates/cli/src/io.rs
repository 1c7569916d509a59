//! JSON plumbing: input from a file or standard input, deterministic
//! compact output, and the group-specification schema shared by the
//! representation subcommands.

use std::io::Read;

use serde::{Deserialize, Serialize};

use ultraflow::error::Error;
use ultraflow::reps::{
    self, alternating_subgroup, cyclic_group, dihedral_8, quaternion_8, symmetric_group,
    CharacterTable, Cyc, FiniteGroup, MackeyCertificate, SubCharacter, Subgroup,
    TensorCertificate,
};

/// Read a JSON document from the given path (`-` or absent = stdin).
pub fn read_input<T: serde::de::DeserializeOwned>(path: Option<&str>) -> Result<T, Error> {
    let text = match path {
        Some(p) if p != "-" => std::fs::read_to_string(p)
            .map_err(|e| Error::Domain(format!("cannot read {p}: {e}")))?,
        _ => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Error::Domain(format!("cannot read stdin: {e}")))?;
            buf
        }
    };
    serde_json::from_str(&text).map_err(|e| Error::Domain(format!("bad input JSON: {e}")))
}

/// Deterministic compact JSON on stdout.
pub fn write_json<T: Serialize>(value: &T) -> Result<(), Error> {
    let text = serde_json::to_string(value)
        .map_err(|e| Error::Domain(format!("serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

/// How a finite group arrives on the wire: by name, by multiplication
/// table, or by a closed set of permutations.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Named { name: String },
    Table { mul: Vec<Vec<u16>> },
    Perms { perms: Vec<Vec<u64>> },
}

impl GroupSpec {
    pub fn build(&self) -> Result<FiniteGroup, Error> {
        match self {
            GroupSpec::Named { name } => build_named(name),
            GroupSpec::Table { mul } => FiniteGroup::from_mul_table(mul.clone()),
            GroupSpec::Perms { perms } => FiniteGroup::from_permutations(perms),
        }
    }
}

pub fn build_named(name: &str) -> Result<FiniteGroup, Error> {
    match name {
        "s3" => Ok(symmetric_group(3)?.0),
        "s4" => Ok(symmetric_group(4)?.0),
        "d4" => Ok(dihedral_8()?.0),
        "q8" => quaternion_8(),
        _ => {
            if let Some(n) = name.strip_prefix('c') {
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::Domain(format!("unknown group name {name:?}")))?;
                cyclic_group(n)
            } else {
                Err(Error::Domain(format!(
                    "unknown group name {name:?} (use s3, s4, d4, q8, c<n>, a mul table or perms)"
                )))
            }
        }
    }
}

/// Named subgroup scenarios for the demo suite: returns `(K, N)`.
pub fn demo_subgroups(name: &str, g: &FiniteGroup) -> Result<(Subgroup, Subgroup), Error> {
    match name {
        "s3" => {
            let (_, perms) = symmetric_group(3)?;
            let a3 = alternating_subgroup(g, &perms)?;
            let swap = perms
                .iter()
                .position(|p| p == &vec![1u8, 0, 2])
                .expect("transposition exists");
            let n = Subgroup::generated(g, &[swap])?;
            Ok((a3, n))
        }
        "s4" => {
            let (_, perms) = symmetric_group(4)?;
            // K: the copy of S3 fixing the last letter; N: a Sylow 2-subgroup
            let fix3: Vec<usize> = perms
                .iter()
                .enumerate()
                .filter(|(_, p)| p[3] == 3)
                .map(|(i, _)| i)
                .collect();
            let k = Subgroup::new(g, &fix3)?;
            let r = perms.iter().position(|p| p == &vec![1u8, 2, 3, 0]).unwrap();
            let s = perms.iter().position(|p| p == &vec![3u8, 2, 1, 0]).unwrap();
            let n = Subgroup::generated(g, &[r, s])?;
            Ok((k, n))
        }
        "d4" => {
            let (_, perms) = dihedral_8()?;
            let r = perms.iter().position(|p| p == &vec![1u8, 2, 3, 0]).unwrap();
            let s = perms.iter().position(|p| p == &vec![1u8, 0, 3, 2]).unwrap();
            let k = Subgroup::generated(g, &[r])?;
            let n = Subgroup::generated(g, &[s])?;
            Ok((k, n))
        }
        _ => Err(Error::Domain(format!("no demo subgroups for {name:?}"))),
    }
}

/// Character of a subgroup picked from its own character table by row.
pub fn subgroup_character(h: &Subgroup, irrep: usize, e: u32) -> Result<SubCharacter, Error> {
    let t = reps::character_table(&h.group, reps::TABLE_CAP)?;
    if irrep >= t.num_irreps() {
        return Err(Error::Domain(format!(
            "irrep index {irrep} out of range 0..{}",
            t.num_irreps()
        )));
    }
    let he = h.group.exponent() as u32;
    if !e.is_multiple_of(he) {
        return Err(Error::Domain("subgroup exponent does not divide".into()));
    }
    let values = t.chars[irrep]
        .iter()
        .map(|v| lift_cyc(v, e))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SubCharacter { classes: t.classes.clone(), values })
}

/// Re-express a cyclotomic value of order `e1 | e2` in order `e2`.
pub fn lift_cyc(v: &Cyc, e2: u32) -> Result<Cyc, Error> {
    let e1 = v.order();
    if !e2.is_multiple_of(e1) {
        return Err(Error::Domain("cyclotomic orders incompatible".into()));
    }
    let k = e2 / e1;
    let mut out = Cyc::zero(e2);
    for (i, &c) in v.coeffs().iter().enumerate() {
        if c != 0 {
            out = out
                .add(&Cyc::zeta_pow(e2, (i as u32 * k) % e2).scale(c))
                .map_err(|e| Error::Domain(format!("{e}")))?;
        }
    }
    Ok(out)
}

fn cyc_string(v: &Cyc) -> String {
    if let Some(k) = v.as_int() {
        return k.to_string();
    }
    let mut parts = Vec::new();
    for (i, &c) in v.coeffs().iter().enumerate() {
        if c == 0 {
            continue;
        }
        if i == 0 {
            parts.push(c.to_string());
        } else if c == 1 {
            parts.push(format!("z^{i}"));
        } else {
            parts.push(format!("{c}*z^{i}"));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join("+").replace("+-", "-")
    }
}

#[derive(Serialize)]
pub struct TableJson {
    pub order: usize,
    pub exponent: u32,
    pub class_sizes: Vec<usize>,
    pub degrees: Vec<u64>,
    /// Values as strings over `z = zeta_exponent`.
    pub characters: Vec<Vec<String>>,
    pub orthogonal: bool,
    pub degree_square_sum: u64,
}

pub fn table_json(g: &FiniteGroup, t: &CharacterTable) -> Result<TableJson, Error> {
    Ok(TableJson {
        order: g.order(),
        exponent: t.exponent,
        class_sizes: t.classes.sizes.clone(),
        degrees: t.degrees.clone(),
        characters: t
            .chars
            .iter()
            .map(|row| row.iter().map(cyc_string).collect())
            .collect(),
        orthogonal: reps::verify_orthogonality(g, t)?,
        degree_square_sum: t.degrees.iter().map(|d| d * d).sum(),
    })
}

pub fn character_values_json(values: &[Cyc]) -> Vec<String> {
    values.iter().map(cyc_string).collect()
}

#[derive(Serialize)]
pub struct MackeyJson {
    pub holds: bool,
    pub double_cosets: Vec<(usize, usize)>,
    pub lhs: Vec<String>,
    pub rhs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_coset: Option<Vec<Vec<String>>>,
}

pub fn mackey_json(cert: &MackeyCertificate, with_certificate: bool) -> MackeyJson {
    MackeyJson {
        holds: cert.holds,
        double_cosets: cert.cosets.clone(),
        lhs: character_values_json(&cert.lhs),
        rhs: character_values_json(&cert.rhs),
        per_coset: with_certificate
            .then(|| cert.per_coset.iter().map(|c| character_values_json(c)).collect()),
    }
}

#[derive(Serialize)]
pub struct TensorJson {
    pub holds: bool,
    pub double_cosets: Vec<(usize, usize)>,
    pub lhs: Vec<String>,
    pub rhs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_coset: Option<Vec<Vec<String>>>,
}

pub fn tensor_json(cert: &TensorCertificate, with_certificate: bool) -> TensorJson {
    TensorJson {
        holds: cert.holds,
        double_cosets: cert.cosets.clone(),
        lhs: character_values_json(&cert.lhs),
        rhs: character_values_json(&cert.rhs),
        per_coset: with_certificate
            .then(|| cert.per_coset.iter().map(|c| character_values_json(c)).collect()),
    }
}
