//! Seeded, reproducible random generators for the test and demo suites.
//! Everything flows from a `ChaCha8Rng` so identical seeds give identical
//! runs across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffeo::Diffeo;
use crate::error::Result;
use crate::flows::VectorField;
use crate::mahler::MahlerSeries;
use crate::padic::{PadicNumber, Val};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A unit of `Z_p` (valuation 0) at the given precision.
pub fn random_unit(rng: &mut ChaCha8Rng, p: u64, prec: u32) -> PadicNumber {
    loop {
        let k = rng.gen_range(1..(p as i64).pow(prec.min(9)));
        if k % p as i64 != 0 {
            return PadicNumber::from_integer(p, k, prec);
        }
    }
}

/// `p^val * unit`.
pub fn random_with_valuation(rng: &mut ChaCha8Rng, p: u64, prec: u32, val: u32) -> PadicNumber {
    let u = random_unit(rng, p, prec);
    u.shift(val as i64)
}

/// A polynomial with integer coefficients in `[-bound, bound]`, degree
/// exactly `deg`, in the monomial basis.
pub fn random_int_polynomial(
    rng: &mut ChaCha8Rng,
    p: u64,
    prec: u32,
    deg: usize,
    bound: i64,
) -> Vec<PadicNumber> {
    let mut mono = Vec::with_capacity(deg + 1);
    for k in 0..=deg {
        let mut c = rng.gen_range(-bound..=bound);
        if k == deg && c == 0 {
            c = 1;
        }
        mono.push(PadicNumber::from_integer(p, c, prec));
    }
    mono
}

/// A truncated Mahler series with coefficient valuations at least
/// `min_val` (some coefficients may vanish).
pub fn random_mahler_series(
    rng: &mut ChaCha8Rng,
    p: u64,
    prec: u32,
    deg: usize,
    min_val: u32,
) -> MahlerSeries {
    let coeffs = (0..=deg)
        .map(|_| {
            if rng.gen_bool(0.15) {
                PadicNumber::zero(p)
            } else {
                let extra = rng.gen_range(0..3);
                random_with_valuation(rng, p, prec, min_val + extra)
            }
        })
        .collect();
    MahlerSeries::new(p, prec, coeffs, Val::Infinite)
}

/// A vector field in the admissible exp ball: monomial coefficients of
/// valuation at least 2 (3 for `p = 2`), degree at most `deg`.
pub fn random_w_field(rng: &mut ChaCha8Rng, p: u64, prec: u32, deg: usize) -> Result<VectorField> {
    let floor = if p == 2 { 3 } else { 2 };
    let mono: Vec<PadicNumber> = (0..=deg)
        .map(|_| {
            if rng.gen_bool(0.2) {
                PadicNumber::zero(p)
            } else {
                let extra = rng.gen_range(0..2);
                random_with_valuation(rng, p, prec, floor + extra)
            }
        })
        .collect();
    VectorField::from_monomial(p, prec, mono)
}

/// A `W`-element `id + u` with `u` a polynomial whose monomial
/// coefficients all have valuation at least 2.
pub fn random_w_diffeo(
    rng: &mut ChaCha8Rng,
    p: u64,
    prec: u32,
    deg: usize,
    l_max: u32,
) -> Result<Diffeo> {
    let floor = if p == 2 { 3 } else { 2 };
    let mono: Vec<PadicNumber> = (0..=deg)
        .map(|_| {
            if rng.gen_bool(0.25) {
                PadicNumber::zero(p)
            } else {
                let extra = rng.gen_range(0..2);
                random_with_valuation(rng, p, prec, floor + extra)
            }
        })
        .collect();
    Diffeo::from_monomial_u(p, prec, mono, l_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut r1 = rng(42);
        let mut r2 = rng(42);
        for _ in 0..10 {
            let a = random_unit(&mut r1, 3, 12);
            let b = random_unit(&mut r2, 3, 12);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn w_samples_are_admissible() {
        let mut r = rng(7);
        for _ in 0..10 {
            let f = random_w_field(&mut r, 3, 14, 6).unwrap();
            assert!(f.norm().at_most(2));
            let d = random_w_diffeo(&mut r, 3, 14, 6, 3).unwrap();
            assert!(d.w_member());
        }
    }
}
