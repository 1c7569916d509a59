//! Exact arithmetic in the cyclotomic ring `Z[zeta_e]`, represented as
//! integer vectors in the power basis of `Z[x]/Phi_e(x)`. Character
//! values are sums of roots of unity, so this ring carries every quantity
//! in the tables exactly; equality is coefficient equality.

use crate::error::{Error, Result};

/// Coefficients of the cyclotomic polynomial `Phi_e`, lowest degree
/// first, computed by exact division of `x^e - 1` by the proper-divisor
/// factors.
pub fn cyclotomic_polynomial(e: u32) -> Vec<i64> {
    assert!(e >= 1);
    if e == 1 {
        return vec![-1, 1]; // x - 1
    }
    // x^e - 1
    let mut num = vec![0i64; e as usize + 1];
    num[0] = -1;
    num[e as usize] = 1;
    for d in 1..e {
        if e.is_multiple_of(d) {
            let phi_d = cyclotomic_polynomial(d);
            num = poly_div_exact(&num, &phi_d);
        }
    }
    num
}

/// Exact division of integer polynomials (remainder must vanish).
fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    assert_eq!(den[dd], 1, "divisor must be monic");
    let mut quot = vec![0i64; rem.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        let qi = i - dd;
        quot[qi] = c;
        for (j, &dc) in den.iter().enumerate() {
            rem[qi + j] -= c * dc;
        }
    }
    assert!(rem.iter().all(|&c| c == 0), "division was not exact");
    quot
}

/// An element of `Z[zeta_e]` in the power basis `1, zeta, ..,
/// zeta^(phi(e)-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cyc {
    e: u32,
    c: Vec<i64>,
}

impl Cyc {
    pub fn zero(e: u32) -> Self {
        let deg = cyclotomic_polynomial(e).len() - 1;
        Cyc { e, c: vec![0; deg.max(1)] }
    }

    pub fn from_int(e: u32, k: i64) -> Self {
        let mut z = Self::zero(e);
        z.c[0] = k;
        z
    }

    /// `zeta_e^k`.
    pub fn zeta_pow(e: u32, k: u32) -> Self {
        let k = (k % e) as usize;
        let phi = cyclotomic_polynomial(e);
        let deg = phi.len() - 1;
        let mut raw = vec![0i64; k + 1];
        raw[k] = 1;
        let c = reduce_mod_phi(raw, &phi);
        let mut c = c;
        c.resize(deg.max(1), 0);
        Cyc { e, c }
    }

    pub fn order(&self) -> u32 {
        self.e
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    /// The rational integer it represents, when it is one.
    pub fn as_int(&self) -> Option<i64> {
        if self.c[1..].iter().all(|&x| x == 0) {
            Some(self.c[0])
        } else {
            None
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.e != other.e {
            return Err(Error::Domain(format!(
                "cyclotomic orders differ: {} vs {}",
                self.e, other.e
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let c = self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect();
        Ok(Cyc { e: self.e, c })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let c = self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect();
        Ok(Cyc { e: self.e, c })
    }

    pub fn neg(&self) -> Self {
        Cyc { e: self.e, c: self.c.iter().map(|&a| -a).collect() }
    }

    pub fn scale(&self, k: i64) -> Self {
        Cyc { e: self.e, c: self.c.iter().map(|&a| a * k).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut raw = vec![0i64; self.c.len() + other.c.len()];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                raw[i + j] += a * b;
            }
        }
        let phi = cyclotomic_polynomial(self.e);
        let mut c = reduce_mod_phi(raw, &phi);
        c.resize(self.c.len(), 0);
        Ok(Cyc { e: self.e, c })
    }

    /// Exact division by a rational integer; errors when any coefficient
    /// is not divisible (inner products of genuine characters always
    /// divide).
    pub fn div_int_exact(&self, k: i64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("division by zero".into()));
        }
        let mut c = Vec::with_capacity(self.c.len());
        for &a in &self.c {
            if a % k != 0 {
                return Err(Error::Integrity(format!(
                    "cyclotomic integer not divisible by {k}"
                )));
            }
            c.push(a / k);
        }
        Ok(Cyc { e: self.e, c })
    }
}

fn reduce_mod_phi(mut raw: Vec<i64>, phi: &[i64]) -> Vec<i64> {
    let deg = phi.len() - 1;
    for i in (deg..raw.len()).rev() {
        let c = raw[i];
        if c == 0 {
            continue;
        }
        raw[i] = 0;
        for (j, &pc) in phi.iter().take(deg).enumerate() {
            raw[i - deg + j] -= c * pc;
        }
    }
    raw.truncate(deg.max(1));
    raw
}
