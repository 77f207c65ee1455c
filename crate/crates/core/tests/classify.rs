use moebius_core::report::{to_json, to_table};
use moebius_core::{builtin, classify, CausalType, ClassifyOptions, Verdict};

fn run(name: &str) -> moebius_core::ClassificationReport {
    classify(&builtin(name).unwrap(), &ClassifyOptions::default()).unwrap()
}

#[test]
fn product_of_spheres_witness() {
    let r = run("product-spheres-s4");
    assert_eq!(r.verdict, Verdict::Branch1Sphere);
    let ev = &r.spectrum.eigenvalues;
    assert_eq!((ev[0].multiplicity, ev[1].multiplicity), (2, 1));
    assert!((ev[0].value - 5.0 / 72.0).abs() < 1e-9);
    assert!((ev[1].value - 11.0 / 72.0).abs() < 1e-9);
    let w = r.witness.unwrap();
    assert!((w.a + 7.0 / 72.0).abs() < 1e-9);
    assert!((w.b.abs() - 1.0 / 12.0).abs() < 1e-9);
    assert!((w.causal_norm + 3.0 / 16.0).abs() < 1e-9);
    assert!((w.measured_norm - w.causal_norm).abs() < 1e-8);
    assert!(w.c_y_residual < 1e-8);
    assert!(w.constancy < 1e-6);
    assert!(w.splitting_residual < 1e-5);
    assert_eq!(w.causal_type, CausalType::Timelike);
}

#[test]
fn native_and_model_images_agree() {
    for (native, image, verdict, norm) in [
        ("cylinder-r4", "cylinder-sigma-s4", Verdict::Branch2Euclidean, 0.0),
        ("hyperbolic-cylinder-h4", "hyperbolic-cylinder-tau-s4", Verdict::Branch3Hyperbolic, 2.0),
    ] {
        let a = run(native);
        let b = run(image);
        assert_eq!(a.verdict, verdict, "{native}: {:?}", a.failures);
        assert_eq!(b.verdict, verdict, "{image}: {:?}", b.failures);
        for (x, y) in a.spectrum.eigenvalues.iter().zip(&b.spectrum.eigenvalues) {
            assert_eq!(x.multiplicity, y.multiplicity);
            assert!((x.value - y.value).abs() < 1e-9);
        }
        for r in [&a, &b] {
            let w = r.witness.as_ref().unwrap();
            assert!((w.causal_norm - norm).abs() < 1e-9);
            assert!((w.measured_norm - norm).abs() < 1e-8);
        }
    }
}

#[test]
fn cylinder_spectrum() {
    let r = run("cylinder-sigma-s4");
    let ev = &r.spectrum.eigenvalues;
    assert!((ev[0].value + 1.0 / 18.0).abs() < 1e-9 && ev[0].multiplicity == 2);
    assert!((ev[1].value - 5.0 / 18.0).abs() < 1e-9 && ev[1].multiplicity == 1);
}

#[test]
fn ls_blocks_split() {
    let r = run("ls-1-0-sqrt3-0");
    assert_eq!(r.verdict, Verdict::Branch4LS);
    assert!(r.block_splitting.unwrap() < 1e-6);
    assert!(r.spectrum.constancy < 1e-6);
    assert!(r.witness.is_none());
    let sum: f64 = r.spectrum.eigenvalues.iter().map(|e| e.value).sum();
    assert!(sum.abs() < 1e-8);
}

#[test]
fn isotropic_examples() {
    for (name, lambda) in [("clifford-torus-s3", 0.125), ("veronese-s4", 0.1875)] {
        let r = run(name);
        assert_eq!(r.verdict, Verdict::MoebiusIsotropic, "{name}: {:?}", r.failures);
        assert_eq!(r.spectrum.eigenvalues.len(), 1);
        assert!((r.spectrum.eigenvalues[0].value - lambda).abs() < 1e-9);
        assert!(r.block_splitting.is_none());
    }
}

#[test]
fn perturbed_torus_lists_failures() {
    let r = run("perturbed-torus-s3");
    assert_eq!(r.verdict, Verdict::NotClassified);
    assert!(r.c_norm > 1e-3);
    assert!(r.failures.iter().any(|f| f.starts_with("c_norm")));
    assert!(r.identities_hold());
}

#[test]
fn tight_sum_tolerance_still_routes_ls() {
    let opts = ClassifyOptions { tol_sum: 1e-12, ..Default::default() };
    let r = classify(&builtin("ls-1-0-sqrt3-0").unwrap(), &opts).unwrap();
    assert_eq!(r.verdict, Verdict::Branch4LS);
}

#[test]
fn report_layout() {
    let r = run("product-spheres-s4");
    let json = to_json(&r);
    let keys: Vec<&str> = json
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    assert_eq!(
        keys,
        [
            "name",
            "verdict",
            "spectrum",
            "residuals",
            "c_norm",
            "parallel_residual",
            "spectrum_constancy",
            "block_splitting",
            "witness",
            "failures",
            "samples",
            "order",
            "seed",
            "tolerances"
        ]
    );
    assert!(json.contains("\"causal_type\": \"timelike\""));
    assert!(json.contains("\"value\": 6.94444e-2"));
    let table = to_table(&r);
    assert!(table.contains("branch-1-sphere"));
    assert!(table.contains("timelike"));
}
