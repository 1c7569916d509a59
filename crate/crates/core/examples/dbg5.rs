use ultraflow::flows::*;
use ultraflow::padic::*;

fn main() {
    let (p, n) = (3u64, 16u32);
    let pd = |k: i64| PadicNumber::from_integer(p, k, n);
    let a = VectorField::from_monomial(p, n, vec![pd(9), pd(0), pd(9)]).unwrap();
    let f = exp_field(&a, &pd(1), 32, n as i64, 3).unwrap();
    println!("tail: {:?}", f.g.u().tail_val());
    println!("terms_used: {}", f.terms_used);
    println!("deg: {}", f.g.u().degree_bound());
    for (m, c) in f.g.u().coeffs().iter().enumerate().take(4) {
        println!("a_{m} = {c}");
    }
}
