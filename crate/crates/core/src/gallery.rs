//! Space-model maps, the O⁺ action on the sphere, and the built-in
//! example immersions.

use std::f64::consts::PI;

use thiserror::Error;

use crate::expr::{parse, Expr, Func};
use crate::invariants::{fundamental_forms, InvariantError};
use crate::linalg::{dot, lorentz_dot, LorentzTransform};
use crate::riemann::{curvature, metric_from_immersion};
use crate::sampling::sample_points;
use crate::spec::{Ambient, AmbientKind, ImmersionSpec, SpecError};

/// Tolerance for points supplied to the model maps.
pub const MODEL_TOLERANCE: f64 = 1e-8;
/// Tolerance for factor minimality in [`build_ls`].
pub const MINIMALITY_TOLERANCE: f64 = 1e-8;
/// Tolerance for factor scalar curvatures in [`build_ls`].
pub const SCALAR_CURVATURE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum GalleryError {
    #[error("point is the removed pole of the stereographic chart")]
    Pole,
    #[error("point is off the model: {0}")]
    OffModel(String),
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("scalar curvature of factor {factor} is {computed} but {required} is required")]
    ScalarCurvature { factor: usize, required: f64, computed: f64 },
    #[error("factor {factor} is not minimal (|H| = {mean:e})")]
    NotMinimal { factor: usize, mean: f64 },
    #[error("unknown example '{0}'")]
    UnknownExample(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

/// Inverse stereographic projection `ℝⁿ → 𝕊ⁿ \ {(−1, 0)}`.
pub fn sigma(u: &[f64]) -> Vec<f64> {
    let s = dot(u, u);
    let mut x = vec![(1.0 - s) / (1.0 + s)];
    x.extend(u.iter().map(|ui| 2.0 * ui / (1.0 + s)));
    x
}

pub fn sigma_inv(x: &[f64]) -> Result<Vec<f64>, GalleryError> {
    if (dot(x, x) - 1.0).abs() > MODEL_TOLERANCE {
        return Err(GalleryError::OffModel(format!("|x|^2 = {}", dot(x, x))));
    }
    if 1.0 + x[0] < MODEL_TOLERANCE {
        return Err(GalleryError::Pole);
    }
    Ok(x[1..].iter().map(|xi| xi / (1.0 + x[0])).collect())
}

/// `τ(y) = (1/y₀, y₁/y₀)`, mapping `ℍⁿ` onto the open upper hemisphere.
pub fn tau(y: &[f64]) -> Result<Vec<f64>, GalleryError> {
    if (lorentz_dot(y, y) + 1.0).abs() > MODEL_TOLERANCE || y[0] <= 0.0 {
        return Err(GalleryError::OffModel(format!("<y,y>_1 = {}, y0 = {}", lorentz_dot(y, y), y[0])));
    }
    let mut x = vec![1.0 / y[0]];
    x.extend(y[1..].iter().map(|yi| yi / y[0]));
    Ok(x)
}

pub fn tau_inv(x: &[f64]) -> Result<Vec<f64>, GalleryError> {
    if (dot(x, x) - 1.0).abs() > MODEL_TOLERANCE || x[0] <= 0.0 {
        return Err(GalleryError::OffModel(format!("|x|^2 = {}, x0 = {}", dot(x, x), x[0])));
    }
    let mut y = vec![1.0 / x[0]];
    y.extend(x[1..].iter().map(|xi| xi / x[0]));
    Ok(y)
}

/// Action of `T ∈ O⁺` on the unit sphere through the light cone.
pub fn moebius_act(t: &LorentzTransform, x: &[f64]) -> Vec<f64> {
    let mut lift = vec![1.0];
    lift.extend_from_slice(x);
    let y = t.apply(&lift);
    assert!(y[0] > 0.0, "orthochronous transforms keep the light cone");
    y[1..].iter().map(|yi| yi / y[0]).collect()
}

fn sum_sq(es: &[Expr]) -> Expr {
    let mut it = es.iter().map(|e| e.clone().pow(Expr::num(2.0)));
    let first = it.next().unwrap_or(Expr::num(0.0));
    it.fold(first, Expr::add)
}

/// Coordinates of `σ ∘ f` for a chart `f` into `ℝⁿ`.
pub fn sigma_exprs(f: &[Expr]) -> Vec<Expr> {
    let s = sum_sq(f);
    let den = Expr::num(1.0).add(s.clone());
    let mut out = vec![Expr::num(1.0).sub(s).div(den.clone())];
    out.extend(f.iter().map(|e| Expr::num(2.0).mul(e.clone()).div(den.clone())));
    out
}

/// Coordinates of `τ ∘ f` for a chart `f` into `ℍⁿ`.
pub fn tau_exprs(f: &[Expr]) -> Vec<Expr> {
    let mut out = vec![Expr::num(1.0).div(f[0].clone())];
    out.extend(f[1..].iter().map(|e| e.clone().div(f[0].clone())));
    out
}

/// The light-cone spec `T(1, x)` of a unit-sphere spec `x`; its resolved
/// form is the image of `x` under the Möbius transformation `T`.
pub fn moebius_transform_spec(spec: &ImmersionSpec, t: &LorentzTransform) -> Result<ImmersionSpec, GalleryError> {
    let base = spec.resolved();
    if base.ambient.kind != AmbientKind::Sphere || base.ambient.c != 1.0 {
        return Err(GalleryError::Parameters("Möbius transforms act on unit-sphere specs".into()));
    }
    let n = base.ambient.n;
    if t.dim() != n + 2 {
        return Err(GalleryError::Parameters(format!("transform has size {}, expected {}", t.dim(), n + 2)));
    }
    let mut lift = vec![Expr::num(1.0)];
    lift.extend(base.coords.iter().cloned());
    let mat = t.matrix();
    let coords = (0..n + 2)
        .map(|i| {
            let mut e = Expr::num(mat[(i, 0)]);
            for (j, xj) in lift.iter().enumerate().skip(1) {
                e = e.add(Expr::num(mat[(i, j)]).mul(xj.clone()));
            }
            e
        })
        .collect();
    Ok(ImmersionSpec::new(base.name.clone(), Ambient::lightcone(n), base.m, coords, base.domain.clone())?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LSParams {
    pub m1: usize,
    pub p1: usize,
    pub r: f64,
    pub mu: f64,
}

impl LSParams {
    fn check(&self, m: usize, p: usize) -> Result<(), GalleryError> {
        let bad = |s: String| Err(GalleryError::Parameters(s));
        if !(1 <= self.m1 && self.m1 < m) {
            return bad(format!("need 1 <= m1 <= m - 1, got m1 = {}, m = {}", self.m1, m));
        }
        if self.p1 > p {
            return bad(format!("need p1 <= p, got p1 = {}, p = {}", self.p1, p));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return bad(format!("need r > 0, got {}", self.r));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return bad(format!("need mu in [0, 1], got {}", self.mu));
        }
        Ok(())
    }

    /// Scalar curvatures the two factors must have.
    pub fn required_scalar_curvatures(&self, m: usize) -> (f64, f64) {
        let (m1, m2) = (self.m1 as f64, (m - self.m1) as f64);
        let r2 = self.r * self.r;
        let w = (m as f64 - 1.0) / m as f64;
        (-m1 * (m1 - 1.0) / r2 - w * self.mu, m2 * (m2 - 1.0) / r2 - w * (1.0 - self.mu))
    }
}

/// A factor of the product construction: an immersion into
/// `ℍ^{m1+p1}(−1/r²)` or `𝕊^{m2+p2}(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorImmersion {
    pub spec: ImmersionSpec,
    pub scalar_curvature: f64,
    pub minimal: bool,
}

fn factor_checks(f: &FactorImmersion, index: usize, required: f64) -> Result<(), GalleryError> {
    if !f.minimal {
        return Err(GalleryError::Parameters(format!("factor {} must be declared minimal", index)));
    }
    if (f.scalar_curvature - required).abs() > SCALAR_CURVATURE_TOLERANCE {
        return Err(GalleryError::ScalarCurvature { factor: index, required, computed: f.scalar_curvature });
    }
    let spec = &f.spec;
    let lorentzian = spec.ambient.kind == AmbientKind::Hyperbolic;
    let codim = spec.ambient.n - spec.m;
    for u in sample_points(&spec.domain, 4, 1) {
        let x = spec.jets(&u, 3)?;
        let metric = metric_from_immersion(&x, lorentzian).map_err(InvariantError::from)?;
        let s = curvature(&metric).map_err(InvariantError::from)?.scalar;
        if (s - required).abs() > SCALAR_CURVATURE_TOLERANCE {
            return Err(GalleryError::ScalarCurvature { factor: index, required, computed: s });
        }
        if codim > 0 {
            let mean = fundamental_forms(spec, &u, 3)?.mean_curvature_sq().sqrt();
            if mean > MINIMALITY_TOLERANCE {
                return Err(GalleryError::NotMinimal { factor: index, mean });
            }
        }
    }
    Ok(())
}

/// Builds `x̃ = (ỹ₁/ỹ₀, ỹ₂/ỹ₀)` into `𝕊^{m+p}` from a minimal factor in
/// hyperbolic space and one in a sphere, after checking the scalar
/// curvature constraints tying them to `(r, μ)`.
pub fn build_ls(params: LSParams, f1: &FactorImmersion, f2: &FactorImmersion) -> Result<ImmersionSpec, GalleryError> {
    let (s1, s2) = (&f1.spec, &f2.spec);
    if s1.ambient.kind != AmbientKind::Hyperbolic || s2.ambient.kind != AmbientKind::Sphere {
        return Err(GalleryError::Parameters("factors must live in hyperbolic space and a sphere".into()));
    }
    let r2 = params.r * params.r;
    if (s1.ambient.c + 1.0 / r2).abs() > 1e-12 || (s2.ambient.c - 1.0 / r2).abs() > 1e-12 {
        return Err(GalleryError::Parameters(format!(
            "factor ambients must have curvature -1/r^2 and 1/r^2 with r = {}",
            params.r
        )));
    }
    let m = s1.m + s2.m;
    let p1 = s1.ambient.n - s1.m;
    let p = p1 + s2.ambient.n - s2.m;
    if s1.m != params.m1 || p1 != params.p1 {
        return Err(GalleryError::Parameters(format!(
            "first factor has m1 = {}, p1 = {}, parameters say {}, {}",
            s1.m, p1, params.m1, params.p1
        )));
    }
    params.check(m, p)?;
    let (req1, req2) = params.required_scalar_curvatures(m);
    factor_checks(f1, 1, req1)?;
    factor_checks(f2, 2, req2)?;
    let y0 = s1.coords[0].clone();
    let mut coords: Vec<Expr> = s1.coords[1..].iter().map(|e| e.clone().div(y0.clone())).collect();
    coords.extend(s2.coords.iter().map(|e| e.shift_vars(s1.m).div(y0.clone())));
    let mut domain = s1.domain.clone();
    domain.extend(s2.domain.iter().copied());
    let name = format!("ls-{}-{}-{}-{}", params.m1, params.p1, params.r, params.mu);
    Ok(ImmersionSpec::new(name, Ambient::sphere(m + p), m, coords, domain)?)
}

/// A named built-in example.
#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub spec: ImmersionSpec,
}

fn exprs(src: &[&str]) -> Vec<Expr> {
    src.iter().map(|s| parse(s).expect("builtin expression parses")).collect()
}

fn spec(name: &str, ambient: Ambient, m: usize, coords: Vec<Expr>, domain: Vec<(f64, f64)>) -> ImmersionSpec {
    ImmersionSpec::new(name, ambient, m, coords, domain).expect("builtin spec is valid")
}

/// `𝕊¹(1/2) × 𝕊²(√3/2) ⊂ 𝕊⁴`.
pub fn product_spheres_s4() -> ImmersionSpec {
    spec(
        "product-spheres-s4",
        Ambient::sphere(4),
        3,
        exprs(&[
            "0.5*cos(u1)",
            "0.5*sin(u1)",
            "sqrt(3)/2*cos(u2)*cos(u3)",
            "sqrt(3)/2*cos(u2)*sin(u3)",
            "sqrt(3)/2*sin(u2)",
        ]),
        vec![(0.0, 2.0 * PI), (-1.2, 1.2), (0.0, 2.0 * PI)],
    )
}

/// Minimal Clifford torus `𝕊¹(1/√2) × 𝕊¹(1/√2) ⊂ 𝕊³`.
pub fn clifford_torus_s3() -> ImmersionSpec {
    spec(
        "clifford-torus-s3",
        Ambient::sphere(3),
        2,
        exprs(&["cos(u1)/sqrt(2)", "sin(u1)/sqrt(2)", "cos(u2)/sqrt(2)", "sin(u2)/sqrt(2)"]),
        vec![(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
    )
}

/// Veronese surface in `𝕊⁴`, written in latitude/longitude on `𝕊²`.
pub fn veronese_s4() -> ImmersionSpec {
    let x = "cos(u1)*cos(u2)";
    let y = "cos(u1)*sin(u2)";
    let z = "sin(u1)";
    let src = [
        format!("sqrt(3)*({y})*({z})"),
        format!("sqrt(3)*({z})*({x})"),
        format!("sqrt(3)*({x})*({y})"),
        format!("sqrt(3)/2*(({x})^2 - ({y})^2)"),
        format!("(({x})^2 + ({y})^2 - 2*({z})^2)/2"),
    ];
    let refs: Vec<&str> = src.iter().map(String::as_str).collect();
    spec("veronese-s4", Ambient::sphere(4), 2, exprs(&refs), vec![(-1.2, 1.2), (0.0, 2.0 * PI)])
}

const CYLINDER: [&str; 4] = ["0.5*cos(u1)", "0.5*sin(u1)", "u2", "u3"];

/// Cylinder `𝕊¹(1/2) × ℝ² ⊂ ℝ⁴`.
pub fn cylinder_r4() -> ImmersionSpec {
    spec("cylinder-r4", Ambient::euclidean(4), 3, exprs(&CYLINDER), vec![(0.0, 2.0 * PI), (-1.0, 1.0), (-1.0, 1.0)])
}

/// Stereographic image of [`cylinder_r4`] in `𝕊⁴`.
pub fn cylinder_sigma_s4() -> ImmersionSpec {
    let c = cylinder_r4();
    spec("cylinder-sigma-s4", Ambient::sphere(4), 3, sigma_exprs(&c.coords), c.domain)
}

const HYPERBOLIC_CYLINDER: [&str; 5] =
    ["sqrt(2)*cosh(u2)*cosh(u3)", "sqrt(2)*sinh(u2)*cosh(u3)", "sqrt(2)*sinh(u3)", "cos(u1)", "sin(u1)"];

/// `𝕊¹(1) × ℍ²(−1/2) ⊂ ℍ⁴`.
pub fn hyperbolic_cylinder_h4() -> ImmersionSpec {
    spec(
        "hyperbolic-cylinder-h4",
        Ambient::hyperbolic(4, -1.0),
        3,
        exprs(&HYPERBOLIC_CYLINDER),
        vec![(0.0, 2.0 * PI), (-1.0, 1.0), (-1.0, 1.0)],
    )
}

/// Image of [`hyperbolic_cylinder_h4`] in `𝕊⁴` under `τ`.
pub fn hyperbolic_cylinder_tau_s4() -> ImmersionSpec {
    let h = hyperbolic_cylinder_h4();
    spec("hyperbolic-cylinder-tau-s4", Ambient::sphere(4), 3, tau_exprs(&h.coords), h.domain)
}

/// Totally geodesic `ℍ¹(−1/r²)`: `r (cosh(t/r), sinh(t/r))`.
pub fn hyperbolic_geodesic_factor(r: f64) -> FactorImmersion {
    let coords = vec![
        Expr::num(r).mul(Expr::call(Func::Cosh, Expr::var(1).div(Expr::num(r)))),
        Expr::num(r).mul(Expr::call(Func::Sinh, Expr::var(1).div(Expr::num(r)))),
    ];
    FactorImmersion {
        spec: spec("hyperbolic-geodesic", Ambient::hyperbolic(1, -1.0 / (r * r)), 1, coords, vec![(-1.0, 1.0)]),
        scalar_curvature: 0.0,
        minimal: true,
    }
}

/// Minimal Clifford torus in `𝕊³(r)`:
/// `(r/√2)(cos(√2 s/r), sin(√2 s/r), cos(√2 t/r), sin(√2 t/r))`.
pub fn clifford_torus_factor(r: f64) -> FactorImmersion {
    let k = 2f64.sqrt() / r;
    let amp = r / 2f64.sqrt();
    let wave = |f: Func, v: usize| Expr::num(amp).mul(Expr::call(f, Expr::num(k).mul(Expr::var(v))));
    let coords = vec![wave(Func::Cos, 1), wave(Func::Sin, 1), wave(Func::Cos, 2), wave(Func::Sin, 2)];
    let period = 2.0 * PI / k;
    FactorImmersion {
        spec: spec("clifford-torus", Ambient::sphere_radius(3, r), 2, coords, vec![(0.0, period), (0.0, period)]),
        scalar_curvature: 0.0,
        minimal: true,
    }
}

/// `LS(1, 0, √3, 0)` into `𝕊⁴`.
pub fn ls_1_0_sqrt3_0() -> ImmersionSpec {
    let r = 3f64.sqrt();
    let params = LSParams { m1: 1, p1: 0, r, mu: 0.0 };
    let mut s = build_ls(params, &hyperbolic_geodesic_factor(r), &clifford_torus_factor(r)).expect("valid LS data");
    s.name = "ls-1-0-sqrt3-0".into();
    s
}

/// Totally umbilic small sphere `𝕊³(0.8) ⊂ 𝕊⁴`.
pub fn round_sphere_s4() -> ImmersionSpec {
    spec(
        "round-sphere-s4",
        Ambient::sphere(4),
        3,
        exprs(&[
            "0.8*cos(u1)*cos(u2)*cos(u3)",
            "0.8*cos(u1)*cos(u2)*sin(u3)",
            "0.8*cos(u1)*sin(u2)",
            "0.8*sin(u1)",
            "0.6",
        ]),
        vec![(-1.0, 1.0), (-1.0, 1.0), (0.0, 2.0 * PI)],
    )
}

/// Product torus in `𝕊³` whose radii vary along one factor, so that it is
/// not CMC and has non-vanishing Möbius form.
pub fn perturbed_torus_s3() -> ImmersionSpec {
    let phi = "(0.6 + 0.25*sin(u2))";
    let src = [
        format!("cos{phi}*cos(u1)"),
        format!("cos{phi}*sin(u1)"),
        format!("sin{phi}*cos(u2)"),
        format!("sin{phi}*sin(u2)"),
    ];
    let refs: Vec<&str> = src.iter().map(String::as_str).collect();
    spec("perturbed-torus-s3", Ambient::sphere(3), 2, exprs(&refs), vec![(0.0, 2.0 * PI), (0.0, 2.0 * PI)])
}

type Builtin = (&'static str, &'static str, fn() -> ImmersionSpec);

const BUILTINS: [Builtin; 10] = [
    ("product-spheres-s4", "S^1(1/2) x S^2(sqrt(3)/2) in S^4, m=3 p=1", product_spheres_s4),
    ("clifford-torus-s3", "minimal Clifford torus in S^3, m=2 p=1", clifford_torus_s3),
    ("veronese-s4", "Veronese surface in S^4, m=2 p=2", veronese_s4),
    ("cylinder-r4", "S^1(1/2) x R^2 in R^4, m=3 p=1", cylinder_r4),
    ("cylinder-sigma-s4", "stereographic image of S^1(1/2) x R^2 in S^4", cylinder_sigma_s4),
    ("hyperbolic-cylinder-h4", "S^1(1) x H^2(-1/2) in H^4, m=3 p=1", hyperbolic_cylinder_h4),
    ("hyperbolic-cylinder-tau-s4", "hemisphere image of S^1(1) x H^2(-1/2) in S^4", hyperbolic_cylinder_tau_s4),
    ("ls-1-0-sqrt3-0", "LS(1,0,sqrt(3),0): geodesic of H^1(-1/3) with Clifford torus of S^3(sqrt(3))", ls_1_0_sqrt3_0),
    ("round-sphere-s4", "totally umbilic S^3(0.8) in S^4 (umbilic control)", round_sphere_s4),
    ("perturbed-torus-s3", "non-CMC perturbed torus in S^3 (Möbius form control)", perturbed_torus_s3),
];

/// All built-in examples in listing order.
pub fn builtin_examples() -> Vec<GalleryEntry> {
    BUILTINS.iter().map(|(name, description, f)| GalleryEntry { name, description, spec: f() }).collect()
}

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _, _)| *n).collect()
}

pub fn builtin(name: &str) -> Result<ImmersionSpec, GalleryError> {
    BUILTINS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, f)| f())
        .ok_or_else(|| GalleryError::UnknownExample(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(&[0.0, 0.0]), vec![1.0, 0.0, 0.0]);
        assert_eq!(sigma(&[1.0, 0.0]), vec![0.0, 1.0, 0.0]);
        let u = [0.3, -1.2, 2.0];
        let back = sigma_inv(&sigma(&u)).unwrap();
        assert!(back.iter().zip(&u).all(|(a, b)| (a - b).abs() < 1e-14));
        assert!(matches!(sigma_inv(&[-1.0, 0.0]), Err(GalleryError::Pole)));
    }

    #[test]
    fn tau_values() {
        assert_eq!(tau(&[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let t = 0.7f64;
        let x = tau(&[t.cosh(), t.sinh(), 0.0]).unwrap();
        assert!((x[0] - 1.0 / t.cosh()).abs() < 1e-15 && (x[1] - t.tanh()).abs() < 1e-15);
        let y = [2f64.sqrt(), 0.6, 0.8];
        let back = tau_inv(&tau(&y).unwrap()).unwrap();
        assert!(back.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(tau(&[0.5, 0.0]).is_err());
    }

    #[test]
    fn moebius_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = sigma(&[0.2, -0.4, 0.1]);
        assert_eq!(moebius_act(&LorentzTransform::identity(5), &x), x);
        let t1 = LorentzTransform::random(5, 1.5, &mut rng);
        let t2 = LorentzTransform::random(5, 1.5, &mut rng);
        let y = moebius_act(&t1, &x);
        assert!((dot(&y, &y) - 1.0).abs() < 1e-12);
        let a = moebius_act(&t2, &y);
        let b = moebius_act(&t2.compose(&t1), &x);
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
    }

    #[test]
    fn builtins_load() {
        let all = builtin_examples();
        assert_eq!(all.len(), builtin_names().len());
        for e in &all {
            assert_eq!(e.spec.name, e.name);
            let again = ImmersionSpec::from_json_str(&e.spec.to_json()).unwrap();
            let u = sample_points(&e.spec.domain, 1, 0).remove(0);
            let (a, b) = (e.spec.point(&u).unwrap(), again.point(&u).unwrap());
            assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-14));
        }
        assert!(matches!(builtin("nope"), Err(GalleryError::UnknownExample(_))));
    }

    #[test]
    fn ls_rejects_wrong_curvature() {
        let r = 3f64.sqrt();
        let f1 = hyperbolic_geodesic_factor(r);
        let f2 = clifford_torus_factor(r);
        let err = build_ls(LSParams { m1: 1, p1: 0, r, mu: 0.5 }, &f1, &f2).unwrap_err();
        assert!(matches!(err, GalleryError::ScalarCurvature { factor: 1, .. }), "{err}");
        let mut lying = f1.clone();
        lying.scalar_curvature = -1.0 / 3.0;
        let err = build_ls(LSParams { m1: 1, p1: 0, r, mu: 0.5 }, &lying, &f2).unwrap_err();
        assert!(matches!(err, GalleryError::ScalarCurvature { factor: 1, computed, .. } if computed == 0.0), "{err}");
    }

    #[test]
    fn ls_points_lie_on_sphere() {
        let s = ls_1_0_sqrt3_0();
        for u in sample_points(&s.domain, 16, 3) {
            let x = s.point(&u).unwrap();
            assert!((dot(&x, &x) - 1.0).abs() < 1e-10);
        }
    }
}
