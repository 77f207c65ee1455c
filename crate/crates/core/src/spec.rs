//! Immersion specs: an ambient model, a chart box and one expression per
//! ambient coordinate.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse, EvalError, Expr, ParseError};
use crate::jet::Jet;
use crate::linalg::{dot, lorentz_dot};
use crate::sampling::sample_points;

/// Absolute tolerance of the ambient constraint check.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-8;
/// Number of points at which the ambient constraint is checked on load.
pub const CONSTRAINT_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbientKind {
    Sphere,
    Euclidean,
    Hyperbolic,
    /// Points `Y` of the future light cone in `R^{n+2}_1`, read as the
    /// sphere points `Y_{1..}/Y_0`.
    Lightcone,
}

impl AmbientKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AmbientKind::Sphere => "sphere",
            AmbientKind::Euclidean => "euclidean",
            AmbientKind::Hyperbolic => "hyperbolic",
            AmbientKind::Lightcone => "lightcone",
        }
    }
}

/// Ambient space model. For spheres `c > 0` is the curvature (radius
/// `1/√c`); for hyperbolic space `c < 0` and points satisfy `<y,y>_1 = 1/c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ambient {
    pub kind: AmbientKind,
    pub n: usize,
    pub c: f64,
}

impl Ambient {
    pub fn sphere(n: usize) -> Self {
        Ambient { kind: AmbientKind::Sphere, n, c: 1.0 }
    }

    pub fn sphere_radius(n: usize, r: f64) -> Self {
        Ambient { kind: AmbientKind::Sphere, n, c: 1.0 / (r * r) }
    }

    pub fn euclidean(n: usize) -> Self {
        Ambient { kind: AmbientKind::Euclidean, n, c: 0.0 }
    }

    pub fn hyperbolic(n: usize, c: f64) -> Self {
        Ambient { kind: AmbientKind::Hyperbolic, n, c }
    }

    pub fn lightcone(n: usize) -> Self {
        Ambient { kind: AmbientKind::Lightcone, n, c: 0.0 }
    }

    pub fn coord_count(&self) -> usize {
        match self.kind {
            AmbientKind::Sphere | AmbientKind::Hyperbolic => self.n + 1,
            AmbientKind::Euclidean => self.n,
            AmbientKind::Lightcone => self.n + 2,
        }
    }

    /// Sectional curvature of the model.
    pub fn curvature(&self) -> f64 {
        match self.kind {
            AmbientKind::Sphere | AmbientKind::Hyperbolic => self.c,
            AmbientKind::Euclidean => 0.0,
            AmbientKind::Lightcone => 1.0,
        }
    }

    /// Whether coordinates carry the Lorentzian inner product.
    pub fn is_lorentzian(&self) -> bool {
        matches!(self.kind, AmbientKind::Hyperbolic | AmbientKind::Lightcone)
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        if self.is_lorentzian() {
            lorentz_dot(a, b)
        } else {
            dot(a, b)
        }
    }

    /// Deviation of `x` from the model; infinite when on the wrong sheet.
    pub fn constraint_residual(&self, x: &[f64]) -> f64 {
        match self.kind {
            AmbientKind::Euclidean => 0.0,
            AmbientKind::Sphere => (dot(x, x) - 1.0 / self.c).abs(),
            AmbientKind::Hyperbolic => {
                if x[0] <= 0.0 {
                    f64::INFINITY
                } else {
                    (lorentz_dot(x, x) - 1.0 / self.c).abs()
                }
            }
            AmbientKind::Lightcone => {
                if x[0] <= 0.0 {
                    f64::INFINITY
                } else {
                    lorentz_dot(x, x).abs() / (1.0 + dot(x, x))
                }
            }
        }
    }
}

impl fmt::Display for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            AmbientKind::Sphere if self.c != 1.0 => write!(f, "sphere({}, c={})", self.n, self.c),
            AmbientKind::Hyperbolic => write!(f, "hyperbolic({}, c={})", self.n, self.c),
            k => write!(f, "{}({})", k.as_str(), self.n),
        }
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read spec file")]
    Io(#[from] std::io::Error),
    #[error("spec is not valid JSON: {0}")]
    Json(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("coordinate {index}")]
    Parse { index: usize, source: ParseError },
    #[error("coordinate {index} cannot be evaluated at {point:?}")]
    Eval { index: usize, point: Vec<f64>, source: EvalError },
    #[error("ambient constraint violated: residual {residual:e} at {point:?}")]
    Constraint { point: Vec<f64>, residual: f64 },
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawAmbient {
    kind: AmbientKind,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: String,
    ambient: RawAmbient,
    m: usize,
    coords: Vec<String>,
    domain: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionSpec {
    pub name: String,
    pub ambient: Ambient,
    pub m: usize,
    pub coords: Vec<Expr>,
    pub domain: Vec<(f64, f64)>,
}

impl ImmersionSpec {
    /// Validates shape and spot-checks the ambient constraint.
    pub fn new(
        name: impl Into<String>,
        ambient: Ambient,
        m: usize,
        coords: Vec<Expr>,
        domain: Vec<(f64, f64)>,
    ) -> Result<Self, SpecError> {
        let spec = ImmersionSpec { name: name.into(), ambient, m, coords, domain };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), SpecError> {
        let schema = |msg: String| Err(SpecError::Schema(msg));
        if self.m == 0 {
            return schema("m must be at least 1".into());
        }
        if self.m > 16 {
            return schema("m must be at most 16".into());
        }
        if self.ambient.n == 0 {
            return schema("ambient dimension n must be at least 1".into());
        }
        match self.ambient.kind {
            AmbientKind::Sphere if !(self.ambient.c > 0.0 && self.ambient.c.is_finite()) => {
                return schema(format!("sphere curvature c must be positive, got {}", self.ambient.c));
            }
            AmbientKind::Hyperbolic if !(self.ambient.c < 0.0 && self.ambient.c.is_finite()) => {
                return schema(format!("hyperbolic curvature c must be negative, got {}", self.ambient.c));
            }
            _ => {}
        }
        let want = self.ambient.coord_count();
        if self.coords.len() != want {
            return schema(format!(
                "{} ambient needs {} coordinate expressions, got {}",
                self.ambient.kind.as_str(),
                want,
                self.coords.len()
            ));
        }
        if self.domain.len() != self.m {
            return schema(format!("domain has {} intervals but m = {}", self.domain.len(), self.m));
        }
        for (k, &(lo, hi)) in self.domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return schema(format!("domain interval {} is empty or not finite: [{}, {}]", k + 1, lo, hi));
            }
        }
        for (i, e) in self.coords.iter().enumerate() {
            if e.max_var() > self.m {
                return schema(format!("coordinate {} uses u{} but m = {}", i + 1, e.max_var(), self.m));
            }
        }
        let mut worst: Option<(Vec<f64>, f64)> = None;
        for p in sample_points(&self.domain, CONSTRAINT_POINTS, 0) {
            let x = self.point(&p)?;
            let r = self.ambient.constraint_residual(&x);
            if r.is_nan() || worst.as_ref().is_none_or(|(_, w)| r > *w) {
                worst = Some((p, if r.is_nan() { f64::INFINITY } else { r }));
            }
        }
        if let Some((point, residual)) = worst {
            if residual > CONSTRAINT_TOLERANCE {
                return Err(SpecError::Constraint { point, residual });
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, SpecError> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))?;
        let c = match (raw.ambient.kind, raw.ambient.c) {
            (AmbientKind::Sphere, c) => c.unwrap_or(1.0),
            (AmbientKind::Hyperbolic, c) => c.unwrap_or(-1.0),
            (kind, Some(_)) => {
                return Err(SpecError::Schema(format!("ambient kind {} takes no curvature c", kind.as_str())))
            }
            (_, None) => 0.0,
        };
        let ambient = Ambient { kind: raw.ambient.kind, n: raw.ambient.n, c };
        let coords = raw
            .coords
            .iter()
            .enumerate()
            .map(|(i, s)| parse(s).map_err(|source| SpecError::Parse { index: i + 1, source }))
            .collect::<Result<Vec<_>, _>>()?;
        let domain = raw.domain.iter().map(|d| (d[0], d[1])).collect();
        ImmersionSpec::new(raw.name, ambient, raw.m, coords, domain)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SpecError> {
        ImmersionSpec::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let c = match self.ambient.kind {
            AmbientKind::Sphere | AmbientKind::Hyperbolic => Some(self.ambient.c),
            _ => None,
        };
        let raw = RawSpec {
            name: self.name.clone(),
            ambient: RawAmbient { kind: self.ambient.kind, n: self.ambient.n, c },
            m: self.m,
            coords: self.coords.iter().map(|e| e.to_string()).collect(),
            domain: self.domain.iter().map(|&(a, b)| [a, b]).collect(),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("spec serializes");
        s.push('\n');
        s
    }

    /// Ambient coordinates at parameter `u`.
    pub fn point(&self, u: &[f64]) -> Result<Vec<f64>, SpecError> {
        self.coords
            .iter()
            .enumerate()
            .map(|(i, e)| e.eval(u).map_err(|source| SpecError::Eval { index: i + 1, point: u.to_vec(), source }))
            .collect()
    }

    /// Jets of the ambient coordinates about `u`.
    pub fn jets(&self, u: &[f64], order: usize) -> Result<Vec<Jet>, SpecError> {
        let vars: Vec<Jet> =
            (0..self.m).map(|k| Jet::variable(self.m, order, k, u[k]).expect("variable in range")).collect();
        self.coords
            .iter()
            .enumerate()
            .map(|(i, e)| {
                e.eval_jet(&vars).map_err(|source| SpecError::Eval { index: i + 1, point: u.to_vec(), source })
            })
            .collect()
    }

    /// Rewrites a light-cone spec as the equivalent unit-sphere spec;
    /// other kinds are returned unchanged.
    pub fn resolved(&self) -> ImmersionSpec {
        if self.ambient.kind != AmbientKind::Lightcone {
            return self.clone();
        }
        let y0 = &self.coords[0];
        ImmersionSpec {
            name: self.name.clone(),
            ambient: Ambient::sphere(self.ambient.n),
            m: self.m,
            coords: self.coords[1..].iter().map(|e| e.clone().div(y0.clone())).collect(),
            domain: self.domain.clone(),
        }
    }

    /// Composes the chart with an affine map `u = offset + M v` of the
    /// parameters; the new domain is `domain` (in `v`).
    pub fn reparametrize(&self, matrix: &[Vec<f64>], offset: &[f64], domain: Vec<(f64, f64)>) -> ImmersionSpec {
        let subs: Vec<Expr> = (0..self.m)
            .map(|a| {
                let mut e = Expr::Const(offset[a]);
                for (b, &mab) in matrix[a].iter().enumerate() {
                    if mab != 0.0 {
                        e = e.add(Expr::Const(mab).mul(Expr::Var(b + 1)));
                    }
                }
                e
            })
            .collect();
        ImmersionSpec {
            name: self.name.clone(),
            ambient: self.ambient,
            m: self.m,
            coords: self.coords.iter().map(|e| e.substitute(&|k| Some(subs[k - 1].clone()))).collect(),
            domain,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn json(kind: &str, n: usize, coords: &[&str], domain: &str, m: usize) -> String {
        format!(
            r#"{{"name":"t","ambient":{{"kind":"{}","n":{}}},"m":{},"coords":{:?},"domain":{}}}"#,
            kind, n, m, coords, domain
        )
    }

    #[test]
    fn unit_circle_in_s2() {
        let s = ImmersionSpec::from_json_str(&json("sphere", 2, &["cos(u1)", "sin(u1)", "0"], "[[0,6]]", 1)).unwrap();
        assert_eq!((s.m, s.ambient.n), (1, 2));
        assert_eq!(s.ambient.c, 1.0);
    }

    #[test]
    fn wrong_coordinate_count() {
        let err =
            ImmersionSpec::from_json_str(&json("euclidean", 2, &["u1", "u2", "0"], "[[0,1],[0,1]]", 2)).unwrap_err();
        assert!(matches!(err, SpecError::Schema(_)), "{err}");
    }

    #[test]
    fn off_sphere_is_rejected() {
        let err =
            ImmersionSpec::from_json_str(&json("sphere", 2, &["1.005*cos(u1)", "1.005*sin(u1)", "0"], "[[0,6]]", 1))
                .unwrap_err();
        match err {
            SpecError::Constraint { residual, .. } => assert!((residual - 0.010025).abs() < 1e-9),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn hyperbolic_checks_sheet() {
        let ok = json("hyperbolic", 1, &["cosh(u1)", "sinh(u1)"], "[[-1,1]]", 1);
        assert!(ImmersionSpec::from_json_str(&ok).is_ok());
        let bad = json("hyperbolic", 1, &["-cosh(u1)", "sinh(u1)"], "[[-1,1]]", 1);
        assert!(matches!(ImmersionSpec::from_json_str(&bad), Err(SpecError::Constraint { .. })));
    }

    #[test]
    fn parse_errors_carry_index() {
        let err = ImmersionSpec::from_json_str(&json("euclidean", 2, &["u1", "sin(u1"], "[[0,1]]", 1)).unwrap_err();
        assert!(matches!(err, SpecError::Parse { index: 2, .. }));
        let err = ImmersionSpec::from_json_str(&json("euclidean", 2, &["u1", "u2"], "[[0,1]]", 1)).unwrap_err();
        assert!(matches!(err, SpecError::Schema(_)));
    }

    #[test]
    fn unknown_fields_and_bad_json() {
        assert!(matches!(ImmersionSpec::from_json_str("{"), Err(SpecError::Json(_))));
        let extra = r#"{"name":"t","ambient":{"kind":"euclidean","n":1},"m":1,"coords":["u1"],"domain":[[0,1]],"x":1}"#;
        assert!(matches!(ImmersionSpec::from_json_str(extra), Err(SpecError::Json(_))));
    }

    #[test]
    fn json_round_trip() {
        let s =
            ImmersionSpec::from_json_str(&json("sphere", 2, &["cos(u1)", "sin(u1) * 1", "0"], "[[0,6]]", 1)).unwrap();
        assert_eq!(ImmersionSpec::from_json_str(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn lightcone_resolves_to_sphere() {
        let s = ImmersionSpec::from_json_str(&json("lightcone", 1, &["2", "2*cos(u1)", "2*sin(u1)"], "[[0,1]]", 1))
            .unwrap();
        let r = s.resolved();
        assert_eq!(r.ambient, Ambient::sphere(1));
        let x = r.point(&[0.3]).unwrap();
        assert!((x[0] - 0.3f64.cos()).abs() < 1e-15);
    }
}
