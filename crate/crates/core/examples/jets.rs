// Truncated Taylor jets in the eight chart variables (x⁰..x³, ẋ⁰..ẋ³):
// every partial derivative up to the truncation order comes out exactly.

use finsler_lab::jets::{seed_chart_jets, MultiIndex, TruncationOrder};

pub fn run_example() -> Vec<(MultiIndex, f64, f64)> {
    let order = TruncationOrder::new(2, 4);
    let x = [0.3, 1.2, 0.0, 0.0];
    let v = [1.0, 0.4, 0.0, 0.0];
    let s = seed_chart_jets(&x, &v, order);

    // f = sin(x¹)(ẋ⁰)² − exp(x⁰)(ẋ¹)⁴
    let f = s[1].sin().mul(&s[4].square()) - s[0].exp().mul(&s[5].powi(4));

    let (x0, x1, v0, v1) = (x[0], x[1], v[0], v[1]);
    let cases = [
        (vec![4, 4], 2.0 * x1.sin()),
        (vec![1, 4], 2.0 * v0 * x1.cos()),
        (vec![1, 1, 4, 4], -2.0 * x1.sin()),
        (vec![0, 5, 5, 5], -24.0 * x0.exp() * v1),
        (vec![5, 5, 5, 5], -24.0 * x0.exp()),
    ];
    let mut out = Vec::new();
    for (vars, exact) in cases {
        let idx = MultiIndex::from_vars(&vars);
        let got = f.partial(&idx).expect("within truncation order");
        println!("∂{vars:?} f = {got:+.15e}   exact {exact:+.15e}");
        out.push((idx, got, exact));
    }
    // asking for more than the stored order is an error, not a silent zero
    let too_deep = f.partial(&MultiIndex::from_vars(&[5, 5, 5, 5, 5]));
    println!("fifth ẋ-derivative: {}", too_deep.unwrap_err());
    out
}

#[allow(dead_code)]
fn main() {
    run_example();
}
