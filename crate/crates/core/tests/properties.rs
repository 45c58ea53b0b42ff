use proptest::prelude::*;

use finsler_lab::catalog::{build_model, presets, ChartPoint};
use finsler_lab::causal::is_pointwise_timelike;
use finsler_lab::geometry::GeometryBundle;
use finsler_lab::jets::{seed_chart_jets, Jet, TruncationOrder};
use finsler_lab::report::fmt_float;

const ORDER: TruncationOrder = TruncationOrder::new(2, 3);

fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
    a.coefficients()
        .iter()
        .zip(b.coefficients())
        .all(|(p, q)| (p - q).abs() <= tol * p.abs().max(q.abs()).max(1.0))
}

fn jet_strategy() -> impl Strategy<Value = Jet> {
    (prop::array::uniform8(-1.0..1.0f64), prop::array::uniform8(-1.0..1.0f64)).prop_map(|(base, c)| {
        let s = seed_chart_jets(&[base[0], base[1], base[2], base[3]], &[base[4], base[5], base[6], base[7]], ORDER);
        // a polynomial-ish jet with nonzero mixed terms
        let mut j = Jet::constant(1.5 + c[0].abs(), ORDER);
        for k in 0..8 {
            j = j + s[k].scale(c[k]);
        }
        j.clone() + j.mul(&s[2]).scale(0.3) + s[5].square().scale(0.2)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_associative_and_commutative(a in jet_strategy(), b in jet_strategy(), c in jet_strategy()) {
        prop_assert!(close(&a.mul(&b), &b.mul(&a), 1e-14));
        prop_assert!(close(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c)), 1e-12));
    }

    #[test]
    fn division_inverts_product(a in jet_strategy(), b in jet_strategy()) {
        prop_assume!(b.value().abs() > 0.5);
        let q = a.checked_div(&b, 1e-12).unwrap();
        prop_assert!(close(&q.mul(&b), &a, 1e-10));
    }

    #[test]
    fn exp_ln_and_sqrt_round_trip(a in jet_strategy()) {
        prop_assume!(a.value() > 0.5);
        prop_assert!(close(&a.checked_ln(1e-12).unwrap().exp(), &a, 1e-10));
        let r = a.checked_sqrt(1e-12).unwrap();
        prop_assert!(close(&r.square(), &a, 1e-10));
    }

    #[test]
    fn derivative_commutes(a in jet_strategy(), i in 0usize..4, j in 0usize..4) {
        let xv = a.d_x(i).unwrap().d_v(j).unwrap();
        let vx = a.d_v(j).unwrap().d_x(i).unwrap();
        prop_assert!(close(&xv, &vx, 1e-14));
    }

    #[test]
    fn float_format_round_trips(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        let back: f64 = fmt_float(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn randers_lagrangian_is_two_homogeneous(
        v in prop::array::uniform3(-0.5..0.5f64),
        alpha in 0.2..5.0f64,
        x in prop::array::uniform3(-1.0..1.0f64),
    ) {
        let model = build_model(&presets::randers_magnetic()).unwrap();
        let x = [0.0, x[0], x[1], x[2]];
        let v = [1.0, v[0], v[1], v[2]];
        prop_assume!(is_pointwise_timelike(&model, &x, &v));
        let l1 = model.lagrangian_value(&x, &v).unwrap();
        let l2 = model.lagrangian_value(&x, &v.map(|c| c * alpha)).unwrap();
        prop_assert!((l2 - alpha * alpha * l1).abs() <= 1e-13 * l2.abs());

        let b = GeometryBundle::new(&model, &ChartPoint::new(x, v), TruncationOrder::new(1, 3)).unwrap();
        // Euler: ẋⁱ∂̇ᵢL = 2L and ẋⁱg_ij = ½∂̇ⱼL
        let grad = b.l.v_gradient().unwrap();
        let euler: f64 = (0..4).map(|i| v[i] * grad[i]).sum();
        prop_assert!((euler - 2.0 * l1).abs() <= 1e-12 * l1.abs());
        for (j, gj) in grad.iter().enumerate() {
            let contracted: f64 = (0..4).map(|i| v[i] * b.g[i][j].value()).sum();
            prop_assert!((contracted - 0.5 * gj).abs() <= 1e-12 * l1.abs().max(1.0));
        }
    }
}
