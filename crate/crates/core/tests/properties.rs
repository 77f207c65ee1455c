use moebius_core::expr::{parse, BinOp, Expr, Func};
use moebius_core::linalg::{
    canonicalize_causal, generalized_spectrum, gram_schmidt, lorentz_dot, random_orthogonal, CausalType, Metric,
    SymmetricPencil,
};
use moebius_core::{LorentzTransform, LorentzVector};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (1usize..4).prop_map(Expr::Var),
        (-50i32..50).prop_map(|k| Expr::Const(k as f64 / 8.0)),
        (1e-3f64..1e3).prop_map(Expr::Const),
        Just(Expr::Pi),
    ]
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                inner.clone(),
                prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)]
            )
                .prop_map(|(a, b, op)| Expr::binary(op, a, b)),
            (inner.clone(), prop_oneof![Just(2.0), Just(3.0), Just(0.5), Just(-1.0)])
                .prop_map(|(a, p)| a.pow(Expr::num(p))),
            inner.clone().prop_map(Expr::neg),
            (inner, proptest::sample::select(Func::ALL.to_vec())).prop_map(|(a, f)| Expr::call(f, a)),
        ]
    })
}

fn same_value(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b || (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_expressions_parse_back(e in expr_tree()) {
        let text = e.to_string();
        let back = parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(back.to_string(), text.clone());
        let u = [0.3, -0.7, 1.1];
        let (x, y) = (e.eval(&u).unwrap(), back.eval(&u).unwrap());
        prop_assert!(same_value(x, y), "{} gives {} then {}", text, x, y);
    }
}

fn sym_from(v: &[f64], n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |i, j| v[i * n + j]);
    (&m + m.transpose()) * 0.5
}

proptest! {
    #[test]
    fn spectrum_is_invariant_under_congruence(
        a in prop::collection::vec(-2.0f64..2.0, 9),
        l in prop::collection::vec(-1.0f64..1.0, 9),
        p in prop::collection::vec(-1.0f64..1.0, 9),
    ) {
        let a = sym_from(&a, 3);
        let lm = DMatrix::from_fn(3, 3, |i, j| l[i * 3 + j]);
        let g = &lm * lm.transpose() + DMatrix::identity(3, 3);
        let pm = DMatrix::from_fn(3, 3, |i, j| p[i * 3 + j]) + DMatrix::identity(3, 3) * 3.0;
        let base = SymmetricPencil::new(a.clone(), g.clone()).unwrap().eigen().0;
        let moved = SymmetricPencil::new(pm.transpose() * &a * &pm, pm.transpose() * &g * &pm).unwrap().eigen().0;
        for (x, y) in base.iter().zip(&moved) {
            prop_assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()), "{:?} vs {:?}", base, moved);
        }
        let total: usize = generalized_spectrum(&SymmetricPencil::new(a, g).unwrap()).iter().map(|e| e.multiplicity).sum();
        prop_assert_eq!(total, 3);
    }

    #[test]
    fn eigenvectors_are_metric_orthonormal(a in prop::collection::vec(-2.0f64..2.0, 16), l in prop::collection::vec(-1.0f64..1.0, 16)) {
        let a = sym_from(&a, 4);
        let lm = DMatrix::from_fn(4, 4, |i, j| l[i * 4 + j]);
        let g = &lm * lm.transpose() + DMatrix::identity(4, 4) * 0.5;
        let (vals, v) = SymmetricPencil::new(a.clone(), g.clone()).unwrap().eigen();
        prop_assert!((v.transpose() * &g * &v - DMatrix::identity(4, 4)).amax() < 1e-9);
        prop_assert!((v.transpose() * &a * &v - DMatrix::from_diagonal(&vals.into())).amax() < 1e-9);
    }

    #[test]
    fn euclidean_gram_schmidt_is_orthonormal(vs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 5), 1..5)) {
        let mut vs = vs;
        for (k, v) in vs.iter_mut().enumerate() {
            v[k] += 3.0;
        }
        let out = gram_schmidt(&vs, Metric::Euclidean).unwrap();
        for (i, a) in out.iter().enumerate() {
            for (j, b) in out.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((Metric::Euclidean.inner(a, b) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lorentz_gram_schmidt_is_orthonormal(seed in any::<u64>(), k in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = LorentzTransform::random(5, 1.5, &mut rng);
        let vs: Vec<Vec<f64>> = (0..k).map(|i| {
            let mut e = vec![0.0; 5];
            e[(i + 1) % 5] = 1.0;
            t.apply(&e)
        }).collect();
        let out = gram_schmidt(&vs, Metric::Lorentz).unwrap();
        let mut timelike = 0;
        for (i, a) in out.iter().enumerate() {
            for (j, b) in out.iter().enumerate() {
                let q = lorentz_dot(a, b);
                if i == j {
                    prop_assert!((q.abs() - 1.0).abs() < 1e-9);
                    if q < 0.0 {
                        timelike += 1;
                        prop_assert_eq!(i, 0);
                        prop_assert!(a[0] > 0.0);
                    }
                } else {
                    prop_assert!(q.abs() < 1e-9);
                }
            }
        }
        prop_assert!(timelike <= 1);
    }

    #[test]
    fn lorentz_transforms_preserve_inner_products(seed in any::<u64>(), x in prop::collection::vec(-2.0f64..2.0, 5), y in prop::collection::vec(-2.0f64..2.0, 5)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = LorentzTransform::random(5, 2.0, &mut rng);
        prop_assert!(t.lorentz_defect() < 1e-9);
        prop_assert!(t.matrix()[(0, 0)] >= 1.0 - 1e-12);
        let before = lorentz_dot(&x, &y);
        let after = lorentz_dot(&t.apply(&x), &t.apply(&y));
        prop_assert!((before - after).abs() < 1e-8 * (1.0 + t.matrix().amax().powi(2)));
    }

    #[test]
    fn canonical_forms_keep_causal_type(c in prop::collection::vec(-3.0f64..3.0, 4)) {
        let v = LorentzVector::new(c).unwrap();
        let kind = v.causal_type(1e-9);
        prop_assume!(kind != CausalType::Zero && kind != CausalType::Lightlike);
        let (t, img) = canonicalize_causal(&v).unwrap();
        prop_assert!(t.lorentz_defect() < 1e-8);
        prop_assert_eq!(img.causal_type(1e-9), kind);
        let tail = match kind {
            CausalType::Timelike => &img.0[1..],
            _ => { prop_assert!(img.0[0].abs() < 1e-8); &img.0[2..] }
        };
        prop_assert!(tail.iter().all(|x| x.abs() < 1e-8), "{:?}", img);
    }
}

#[test]
fn random_orthogonal_is_orthogonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let q = random_orthogonal(6, &mut rng);
    assert!((q.transpose() * &q - DMatrix::identity(6, 6)).amax() < 1e-12);
}
