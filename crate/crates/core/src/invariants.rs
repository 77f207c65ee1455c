//! Möbius invariants of an immersion at a chart point: the Möbius factor,
//! light-cone lift, Möbius metric, Blaschke tensor `A`, Möbius second
//! fundamental form `B`, Möbius form `C`, and the identities relating them.
//!
//! Every quantity is propagated as a jet in the chart variables, so all
//! derivatives are exact up to the truncation order. Reported components
//! are taken in a `g`-orthonormal frame `E_i` obtained by Cholesky
//! factorization of the Möbius metric.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::jet::{Jet, JetError};
use crate::linalg::{lorentz_dot, LinalgError};
use crate::riemann::{
    christoffel_jets, covariant_derivative_sym2, curvature, d1, d2, gram_jets, inner_jets, inverse_jets,
    CurvatureAtPoint, GeometryError, MetricAtPoint,
};
use crate::spec::{AmbientKind, ImmersionSpec, SpecError};

/// Smallest jet order carrying every derivative the pipeline needs.
pub const MIN_ORDER: usize = 5;
/// `|h|² − m|H|² ≤ UMBILIC_TOLERANCE (1 + |h|²)` is treated as an umbilic.
pub const UMBILIC_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("umbilic point at {point:?}: |h|^2 - m|H|^2 = {defect:e}")]
    UmbilicPoint { point: Vec<f64>, defect: f64 },
    #[error("jet order {order} is too low, at least {required} is needed")]
    InsufficientOrder { order: usize, required: usize },
    #[error("Möbius invariants need m >= 2, got m = {0}")]
    CurveDimension(usize),
    #[error("immersion has no normal directions (m = {m}, ambient coordinates {coords})")]
    NoCodimension { m: usize, coords: usize },
    #[error("normal frame is rank deficient at {0:?}")]
    NormalFrame(Vec<f64>),
    #[error("degenerate immersion at {point:?}")]
    Degenerate { point: Vec<f64>, source: GeometryError },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

type JetVec = Vec<Jet>;

fn vadd(a: &[Jet], b: &[Jet]) -> JetVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn vsub(a: &[Jet], b: &[Jet]) -> JetVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn vmul(a: &[Jet], s: &Jet) -> JetVec {
    a.iter().map(|x| x * s).collect()
}

fn vpartial(a: &[Jet], var: usize) -> Result<JetVec, JetError> {
    a.iter().map(|x| x.partial(var)).collect()
}

fn values(a: &[Jet]) -> Vec<f64> {
    a.iter().map(Jet::value).collect()
}

fn axpy_values(acc: &mut [f64], s: f64, v: &[f64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += s * x;
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |w, (x, y)| w.max((x - y).abs()))
}

/// Geometry of the ambient model used by the pipeline: its metric, its
/// curvature and an isometric light-cone lift `P` into `R^{n+2}_1`.
struct Model {
    kind: AmbientKind,
    c: f64,
}

impl Model {
    fn lorentzian(&self) -> bool {
        self.kind == AmbientKind::Hyperbolic
    }

    fn curvature(&self) -> f64 {
        match self.kind {
            AmbientKind::Euclidean => 0.0,
            _ => self.c,
        }
    }

    fn curved(&self) -> bool {
        self.kind != AmbientKind::Euclidean
    }

    fn lift(&self, x: &[Jet]) -> JetVec {
        let proto = &x[0];
        let (nv, order) = (proto.num_vars(), proto.order());
        match self.kind {
            AmbientKind::Sphere | AmbientKind::Lightcone => {
                let mut p = vec![Jet::constant(nv, order, 1.0 / self.c.sqrt())];
                p.extend(x.iter().cloned());
                p
            }
            AmbientKind::Euclidean => {
                let s = inner_jets(x, x, false);
                let mut p = vec![s.add_scalar(1.0).scale(0.5), (-&s).add_scalar(1.0).scale(0.5)];
                p.extend(x.iter().cloned());
                p
            }
            AmbientKind::Hyperbolic => {
                let mut p = vec![x[0].clone(), Jet::constant(nv, order, 1.0 / (-self.c).sqrt())];
                p.extend(x[1..].iter().cloned());
                p
            }
        }
    }

    /// Differential of the lift applied to an ambient vector `v` at `x`.
    fn lift_vector(&self, x: &[Jet], v: &[Jet]) -> JetVec {
        let zero = v[0].scale(0.0);
        match self.kind {
            AmbientKind::Sphere | AmbientKind::Lightcone => {
                let mut p = vec![zero];
                p.extend(v.iter().cloned());
                p
            }
            AmbientKind::Euclidean => {
                let s = inner_jets(x, v, false);
                let mut p = vec![s.clone(), -s];
                p.extend(v.iter().cloned());
                p
            }
            AmbientKind::Hyperbolic => {
                let mut p = vec![v[0].clone(), zero];
                p.extend(v[1..].iter().cloned());
                p
            }
        }
    }
}

/// Classical first and second fundamental forms at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalForms {
    /// Orthonormal tangent vectors `e_i` in ambient coordinates.
    pub tangent_frame: Vec<Vec<f64>>,
    /// Orthonormal normal vectors `e_α`.
    pub normal_frame: Vec<Vec<f64>>,
    /// `h[α][(i,j)]` in the frame `e_i`.
    pub h: Vec<DMatrix<f64>>,
    pub mean_curvature: Vec<f64>,
    /// `normal_connection[i][α][β] = ⟨e_i(e_β), e_α⟩`.
    pub normal_connection: Vec<Vec<Vec<f64>>>,
    /// Induced metric `dx·dx` in coordinates.
    pub induced_metric: MetricAtPoint,
    /// Coordinate components of the orthonormal tangent frame (column `i`
    /// holds `e_i` in the coordinate basis).
    pub coordinate_frame: DMatrix<f64>,
}

impl FundamentalForms {
    /// `|h|²` summed over normals.
    pub fn h_norm_sq(&self) -> f64 {
        self.h.iter().map(|h| h.norm_squared()).sum()
    }

    pub fn mean_curvature_sq(&self) -> f64 {
        self.mean_curvature.iter().map(|x| x * x).sum()
    }
}

/// Frame of the chart basis that is orthonormal for `g`: `FᵀgF = I`.
fn orthonormal_frame(g: &DMatrix<f64>) -> Result<DMatrix<f64>, GeometryError> {
    let l = g.clone().cholesky().ok_or(GeometryError::NotPositiveDefinite)?.l();
    Ok(l.try_inverse().ok_or(GeometryError::DegenerateMetric(0.0))?.transpose())
}

/// Components `FᵀTF` of a coordinate 2-tensor.
fn frame2(f: &DMatrix<f64>, t: &DMatrix<f64>) -> DMatrix<f64> {
    f.transpose() * t * f
}

/// Jet-level intermediate results shared by all outputs.
struct Pipeline {
    point: Vec<f64>,
    m: usize,
    p: usize,
    x: JetVec,
    ginduced: Vec<Vec<Jet>>,
    normals: Vec<JetVec>,
    h: Vec<Vec<Vec<Jet>>>,
    mean: JetVec,
    omega_bar: Vec<Vec<Vec<Jet>>>,
}

fn check_spec(spec: &ImmersionSpec, order: usize, required: usize) -> Result<(), InvariantError> {
    if order < required {
        return Err(InvariantError::InsufficientOrder { order, required });
    }
    let coords = spec.ambient.coord_count();
    let offset = usize::from(spec.ambient.kind != AmbientKind::Euclidean);
    if spec.m + offset >= coords {
        return Err(InvariantError::NoCodimension { m: spec.m, coords });
    }
    Ok(())
}

impl Pipeline {
    fn run(spec: &ImmersionSpec, u: &[f64], order: usize) -> Result<(Pipeline, Model), InvariantError> {
        let spec = spec.resolved();
        let model = Model { kind: spec.ambient.kind, c: spec.ambient.c };
        let lor = model.lorentzian();
        let m = spec.m;
        let x = spec.jets(u, order)?;
        let dim = x.len();
        let tangents: Vec<JetVec> = (0..m).map(|a| vpartial(&x, a)).collect::<Result<_, _>>()?;
        let ginduced = gram_jets(&tangents, lor);
        let degenerate = |source| InvariantError::Degenerate { point: u.to_vec(), source };
        MetricAtPoint::from_jets(&ginduced).map_err(degenerate)?;

        // orthonormal basis of span{x, tangents}; normals are built against it
        let mut span: Vec<(JetVec, Jet)> = Vec::new();
        if model.curved() {
            let xx = inner_jets(&x, &x, lor);
            span.push((x.clone(), xx.recip()?));
        }
        for t in &tangents {
            let mut w = t.clone();
            for (f, inv) in &span {
                let c = &inner_jets(&w, f, lor) * inv;
                w = vsub(&w, &vmul(f, &c));
            }
            let nn = inner_jets(&w, &w, lor);
            if nn.value() <= 0.0 {
                return Err(degenerate(GeometryError::NotPositiveDefinite));
            }
            let inv = nn.recip()?;
            span.push((w, inv));
        }
        let p = dim - span.len();
        let proto = &x[0];
        let (nv, o) = (proto.num_vars(), proto.order());
        let mut normals: Vec<JetVec> = Vec::with_capacity(p);
        let mut remaining: Vec<usize> = (0..dim).collect();
        for _ in 0..p {
            let mut best: Option<(usize, JetVec, f64)> = None;
            for &k in &remaining {
                let mut w: JetVec = (0..dim).map(|i| Jet::constant(nv, o, if i == k { 1.0 } else { 0.0 })).collect();
                for (f, inv) in &span {
                    let c = &inner_jets(&w, f, lor) * inv;
                    w = vsub(&w, &vmul(f, &c));
                }
                for nb in &normals {
                    let c = inner_jets(&w, nb, lor);
                    w = vsub(&w, &vmul(nb, &c));
                }
                let q = lorentz_or_dot(&values(&w), lor);
                if best.as_ref().is_none_or(|(_, _, bq)| q > *bq) {
                    best = Some((k, w, q));
                }
            }
            let (k, w, q) = best.ok_or_else(|| InvariantError::NormalFrame(u.to_vec()))?;
            if q <= 1e-12 {
                return Err(InvariantError::NormalFrame(u.to_vec()));
            }
            remaining.retain(|&r| r != k);
            let len = inner_jets(&w, &w, lor).sqrt()?;
            let inv = len.recip()?;
            normals.push(vmul(&w, &inv));
        }

        let ginv = inverse_jets(&ginduced).map_err(degenerate)?;
        let mut h = vec![vec![Vec::with_capacity(m); m]; p];
        for a in 0..m {
            for b in 0..m {
                let yab = vpartial(&tangents[a], b)?;
                for (alpha, n) in normals.iter().enumerate() {
                    h[alpha][a].push(inner_jets(&yab, n, lor));
                }
            }
        }
        let mean: JetVec = h
            .iter()
            .map(|ha| {
                let mut acc = &ginv[0][0] * &ha[0][0];
                for a in 0..m {
                    for b in 0..m {
                        if a + b > 0 {
                            acc = &acc + &(&ginv[a][b] * &ha[a][b]);
                        }
                    }
                }
                acc.scale(1.0 / m as f64)
            })
            .collect();
        let mut omega_bar = vec![vec![Vec::with_capacity(p); p]; m];
        for a in 0..m {
            let dn: Vec<JetVec> = normals.iter().map(|n| vpartial(n, a)).collect::<Result<_, _>>()?;
            for alpha in 0..p {
                for beta in 0..p {
                    omega_bar[a][alpha].push(inner_jets(&dn[beta], &normals[alpha], lor));
                }
            }
        }
        Ok((Pipeline { point: u.to_vec(), m, p, x, ginduced, normals, h, mean, omega_bar }, model))
    }
}

fn lorentz_or_dot(v: &[f64], lor: bool) -> f64 {
    if lor {
        lorentz_dot(v, v)
    } else {
        v.iter().map(|x| x * x).sum()
    }
}

/// Tangent and normal frames, second fundamental form and mean curvature
/// at `u`.
pub fn fundamental_forms(spec: &ImmersionSpec, u: &[f64], order: usize) -> Result<FundamentalForms, InvariantError> {
    check_spec(spec, order, 2)?;
    let (pl, _) = Pipeline::run(spec, u, order)?;
    let m = pl.m;
    let induced = MetricAtPoint::from_jets(&pl.ginduced)?;
    let frame = orthonormal_frame(&induced.g)?;
    let tangents: Vec<Vec<f64>> = (0..m).map(|a| pl.x.iter().map(|xi| d1(xi, a)).collect()).collect();
    let tangent_frame = (0..m)
        .map(|i| {
            let mut v = vec![0.0; pl.x.len()];
            for a in 0..m {
                axpy_values(&mut v, frame[(a, i)], &tangents[a]);
            }
            v
        })
        .collect();
    let h = pl.h.iter().map(|ha| frame2(&frame, &DMatrix::from_fn(m, m, |a, b| ha[a][b].value()))).collect();
    let normal_connection = (0..m)
        .map(|i| {
            (0..pl.p)
                .map(|al| {
                    (0..pl.p).map(|be| (0..m).map(|a| frame[(a, i)] * pl.omega_bar[a][al][be].value()).sum()).collect()
                })
                .collect()
        })
        .collect();
    Ok(FundamentalForms {
        tangent_frame,
        normal_frame: pl.normals.iter().map(|n| values(n)).collect(),
        h,
        mean_curvature: values(&pl.mean),
        normal_connection,
        induced_metric: induced,
        coordinate_frame: frame,
    })
}

/// Möbius invariants at one chart point. Indices `i, j, k` refer to the
/// `g`-orthonormal frame `E_i = Σ_a frame[(a, i)] ∂_a`, `α, β` to the
/// Möbius normal frame `E_α`.
#[derive(Debug, Clone)]
pub struct MoebiusData {
    pub point: Vec<f64>,
    pub m: usize,
    pub p: usize,
    pub rho: f64,
    /// `∂_a ρ` and `∂_a ∂_b ρ` in chart coordinates.
    pub rho_gradient: Vec<f64>,
    pub rho_hessian: DMatrix<f64>,
    /// Light-cone lift `Y` and biposition vector `N` in `R^{n+2}_1`.
    pub y: Vec<f64>,
    pub n: Vec<f64>,
    /// `Y_i = E_i(Y)`.
    pub y_frame: Vec<Vec<f64>>,
    /// Möbius normal frame `E_α`.
    pub e_normal: Vec<Vec<f64>>,
    /// `Δ_g Y`.
    pub laplacian_y: Vec<f64>,
    /// Möbius metric in chart coordinates with two derivatives.
    pub metric: MetricAtPoint,
    /// Induced metric `dx·dx` in chart coordinates.
    pub induced_metric: MetricAtPoint,
    pub frame: DMatrix<f64>,
    /// Blaschke tensor, frame and chart components.
    pub a: DMatrix<f64>,
    pub a_coord: DMatrix<f64>,
    /// `b[α]` is the matrix `B^α_ij`.
    pub b: Vec<DMatrix<f64>>,
    /// `c[α][i] = C^α_i`.
    pub c: Vec<Vec<f64>>,
    /// `grad_a[i][j][k] = A_ijk`.
    pub grad_a: Vec<Vec<Vec<f64>>>,
    /// `grad_b[α][i][j][k] = B^α_ijk`.
    pub grad_b: Vec<Vec<Vec<Vec<f64>>>>,
    /// `grad_c[α][i][j] = C^α_ij`.
    pub grad_c: Vec<Vec<Vec<f64>>>,
    /// `riemann[i][j][k][l] = g(R(E_i, E_j) E_k, E_l)`.
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
    pub ricci: DMatrix<f64>,
    pub kappa: f64,
    /// `normal_curvature[α][β][i][j] = ⟨R^⊥(E_i, E_j) E_α, E_β⟩`.
    pub normal_curvature: Vec<Vec<Vec<Vec<f64>>>>,
    /// `normal_connection[i][α][β] = ⟨E_i(E_β), E_α⟩`.
    pub normal_connection: Vec<Vec<Vec<f64>>>,
    /// The same components of the normal connection of the immersion.
    pub induced_normal_connection: Vec<Vec<Vec<f64>>>,
    /// `dn[i] = E_i(N)`.
    pub dn: Vec<Vec<f64>>,
    /// `hess_y[i][j]`: covariant Hessian of `Y` under `g`.
    pub hess_y: Vec<Vec<Vec<f64>>>,
    /// `de[α][i] = E_i(E_α)`.
    pub de: Vec<Vec<Vec<f64>>>,
    /// Christoffel symbols and curvature of the Möbius metric.
    pub curvature: CurvatureAtPoint,
}

impl MoebiusData {
    pub fn trace_a(&self) -> f64 {
        self.a.trace()
    }

    /// `|C|` in the orthonormal frames.
    pub fn c_norm(&self) -> f64 {
        self.c.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `|∇A|` in the orthonormal frame.
    pub fn grad_a_norm(&self) -> f64 {
        self.grad_a.iter().flatten().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn b_norm_sq(&self) -> f64 {
        self.b.iter().map(|b| b.norm_squared()).sum()
    }

    /// Möbius metric relative to the frame (the identity up to rounding).
    pub fn frame_metric(&self) -> DMatrix<f64> {
        frame2(&self.frame, &self.metric.g)
    }
}

fn sym_values(t: &[Vec<Jet>]) -> DMatrix<f64> {
    let m = t.len();
    DMatrix::from_fn(m, m, |a, b| t[a][b].value())
}

/// Full Möbius invariant bundle at `u` with jets of the given order
/// (at least [`MIN_ORDER`]).
pub fn moebius_invariants(spec: &ImmersionSpec, u: &[f64], order: usize) -> Result<MoebiusData, InvariantError> {
    if spec.m < 2 {
        return Err(InvariantError::CurveDimension(spec.m));
    }
    check_spec(spec, order, MIN_ORDER)?;
    let (pl, model) = Pipeline::run(spec, u, order)?;
    let (m, p) = (pl.m, pl.p);
    let mf = m as f64;
    let ginv_hat = inverse_jets(&pl.ginduced)?;

    // |h|² and |H|²
    let mut hsq = ginv_hat[0][0].scale(0.0);
    for ha in &pl.h {
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let t = &(&ginv_hat[a][c] * &ginv_hat[b][d]) * &(&ha[a][b] * &ha[c][d]);
                        hsq = &hsq + &t;
                    }
                }
            }
        }
    }
    let mut msq = hsq.scale(0.0);
    for hm in &pl.mean {
        msq = &msq + &(hm * hm);
    }
    let defect = &hsq - &msq.scale(mf);
    if defect.value() <= UMBILIC_TOLERANCE * (1.0 + hsq.value()) {
        return Err(InvariantError::UmbilicPoint { point: pl.point.clone(), defect: defect.value() });
    }
    let rho = defect.scale(mf / (mf - 1.0)).sqrt()?;
    let log_rho = rho.ln()?;
    let dlog: JetVec = (0..m).map(|a| log_rho.partial(a)).collect::<Result<_, _>>()?;

    // Blaschke tensor in chart coordinates (induced-metric form)
    let gamma_hat = christoffel_jets(&pl.ginduced)?;
    let mut grad_sq = dlog[0].scale(0.0);
    for a in 0..m {
        for b in 0..m {
            grad_sq = &grad_sq + &(&ginv_hat[a][b] * &(&dlog[a] * &dlog[b]));
        }
    }
    let bracket = (&grad_sq + &msq).add_scalar(-model.curvature()).scale(0.5);
    let mut a_coord: Vec<Vec<Jet>> = vec![Vec::with_capacity(m); m];
    for a in 0..m {
        for b in 0..m {
            let mut hess = dlog[a].partial(b)?;
            for c in 0..m {
                hess = &hess - &(&gamma_hat[c][a][b] * &dlog[c]);
            }
            let mut hh = hess.scale(0.0);
            for (al, ha) in pl.h.iter().enumerate() {
                hh = &hh + &(&pl.mean[al] * &ha[a][b]);
            }
            let inner = &(&hess - &(&dlog[a] * &dlog[b])) - &hh;
            a_coord[a].push(&(-inner) - &(&bracket * &pl.ginduced[a][b]));
        }
    }

    // Möbius second fundamental form and Möbius form in chart coordinates
    let b_coord: Vec<Vec<Vec<Jet>>> = (0..p)
        .map(|al| {
            (0..m)
                .map(|a| (0..m).map(|b| &rho * &(&pl.h[al][a][b] - &(&pl.mean[al] * &pl.ginduced[a][b]))).collect())
                .collect()
        })
        .collect();
    let rho_inv = rho.recip()?;
    let mut c_coord: Vec<JetVec> = Vec::with_capacity(p);
    for al in 0..p {
        let mut row = Vec::with_capacity(m);
        for a in 0..m {
            let mut dh = pl.mean[al].partial(a)?;
            for be in 0..p {
                dh = &dh + &(&pl.omega_bar[a][al][be] * &pl.mean[be]);
            }
            for c in 0..m {
                let mut coef = pl.mean[al].scale(if a == c { -1.0 } else { 0.0 });
                for d in 0..m {
                    coef = &coef + &(&ginv_hat[c][d] * &pl.h[al][a][d]);
                }
                dh = &dh + &(&coef * &dlog[c]);
            }
            row.push(-(&dh * &rho_inv));
        }
        c_coord.push(row);
    }

    // light-cone lift, Möbius normal frame, Möbius metric
    let pvec = model.lift(&pl.x);
    let y = vmul(&pvec, &rho);
    let e_normal: Vec<JetVec> =
        pl.normals.iter().zip(&pl.mean).map(|(n, hm)| vadd(&model.lift_vector(&pl.x, n), &vmul(&pvec, hm))).collect();
    let rho_sq = &rho * &rho;
    let g: Vec<Vec<Jet>> = pl.ginduced.iter().map(|row| row.iter().map(|gab| &rho_sq * gab).collect()).collect();
    let metric = MetricAtPoint::from_jets(&g)?;
    let curv = curvature(&metric)?;
    let ginv = inverse_jets(&g)?;
    let gamma = christoffel_jets(&g)?;
    let ya: Vec<JetVec> = (0..m).map(|a| vpartial(&y, a)).collect::<Result<_, _>>()?;
    let mut lap = vmul(&vpartial(&ya[0], 0)?, &ginv[0][0].scale(0.0));
    let mut hess_y_coord = vec![vec![Vec::new(); m]; m];
    for a in 0..m {
        for b in 0..m {
            let mut hab = vpartial(&ya[a], b)?;
            for c in 0..m {
                hab = vsub(&hab, &vmul(&ya[c], &gamma[c][a][b]));
            }
            lap = vadd(&lap, &vmul(&hab, &ginv[a][b]));
            hess_y_coord[a][b] = values(&hab);
        }
    }
    let lap_sq = inner_jets(&lap, &lap, true);
    let nvec = vsub(
        &vmul(&lap, &Jet::constant(lap[0].num_vars(), lap[0].order(), -1.0 / mf)),
        &vmul(&y, &lap_sq.scale(0.5 / (mf * mf))),
    );

    // Möbius normal connection and its curvature
    let de_coord: Vec<Vec<JetVec>> =
        (0..m).map(|c| e_normal.iter().map(|e| vpartial(e, c)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
    let conn: Vec<Vec<JetVec>> = (0..m)
        .map(|c| {
            (0..p).map(|al| (0..p).map(|be| inner_jets(&de_coord[c][be], &e_normal[al], true)).collect()).collect()
        })
        .collect();
    let conn_v = |c: usize, al: usize, be: usize| conn[c][al][be].value();

    // values at the point
    let frame = orthonormal_frame(&metric.g)?;
    let fr = |a: usize, i: usize| frame[(a, i)];
    let a_coord_v = sym_values(&a_coord);
    let a_frame = frame2(&frame, &a_coord_v);
    let b_frame: Vec<DMatrix<f64>> = b_coord.iter().map(|b| frame2(&frame, &sym_values(b))).collect();
    let c_frame: Vec<Vec<f64>> =
        c_coord.iter().map(|c| (0..m).map(|i| (0..m).map(|a| fr(a, i) * c[a].value()).sum()).collect()).collect();
    let gpt = &curv.gamma;

    let grad_a_coord = covariant_derivative_sym2(&a_coord, &metric).t;
    let mut grad_b_coord = vec![vec![vec![vec![0.0; m]; m]; m]; p];
    for al in 0..p {
        let base = covariant_derivative_sym2(&b_coord[al], &metric).t;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let mut v = base[a][b][c];
                    for be in 0..p {
                        v += conn_v(c, al, be) * b_coord[be][a][b].value();
                    }
                    grad_b_coord[al][a][b][c] = v;
                }
            }
        }
    }
    let mut grad_c_coord = vec![vec![vec![0.0; m]; m]; p];
    for al in 0..p {
        for a in 0..m {
            for b in 0..m {
                let mut v = d1(&c_coord[al][a], b);
                for c in 0..m {
                    v -= gpt[c][b][a] * c_coord[al][c].value();
                }
                for be in 0..p {
                    v += conn_v(b, al, be) * c_coord[be][a].value();
                }
                grad_c_coord[al][a][b] = v;
            }
        }
    }
    let frame3 = |t: &Vec<Vec<Vec<f64>>>| -> Vec<Vec<Vec<f64>>> {
        let mut out = vec![vec![vec![0.0; m]; m]; m];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let mut s = 0.0;
                    for a in 0..m {
                        for b in 0..m {
                            for c in 0..m {
                                s += fr(a, i) * fr(b, j) * fr(c, k) * t[a][b][c];
                            }
                        }
                    }
                    out[i][j][k] = s;
                }
            }
        }
        out
    };
    let grad_a = frame3(&grad_a_coord);
    let grad_b: Vec<_> = grad_b_coord.iter().map(&frame3).collect();
    let grad_c: Vec<Vec<Vec<f64>>> = grad_c_coord
        .iter()
        .map(|t| {
            (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| {
                            (0..m)
                                .flat_map(|a| (0..m).map(move |b| (a, b)))
                                .map(|(a, b)| fr(a, i) * fr(b, j) * t[a][b])
                                .sum()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut riemann = vec![vec![vec![vec![0.0; m]; m]; m]; m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let mut s = 0.0;
                    for a in 0..m {
                        for b in 0..m {
                            for c in 0..m {
                                for d in 0..m {
                                    s += fr(a, i) * fr(b, j) * fr(c, k) * fr(d, l) * curv.riemann[a][b][c][d];
                                }
                            }
                        }
                    }
                    riemann[i][j][k][l] = s;
                }
            }
        }
    }
    let ricci = frame2(&frame, &curv.ricci);

    let mut omega_curv = vec![vec![vec![vec![0.0; m]; m]; p]; p];
    for a in 0..m {
        for b in 0..m {
            for al in 0..p {
                for be in 0..p {
                    let mut v = d1(&conn[b][al][be], a) - d1(&conn[a][al][be], b);
                    for ga in 0..p {
                        v += conn_v(a, al, ga) * conn_v(b, ga, be) - conn_v(b, al, ga) * conn_v(a, ga, be);
                    }
                    // ⟨R^⊥(∂_a,∂_b) E_α, E_β⟩ is the (β, α) entry
                    omega_curv[be][al][a][b] = v;
                }
            }
        }
    }
    let normal_curvature: Vec<Vec<Vec<Vec<f64>>>> = omega_curv
        .iter()
        .map(|row| {
            row.iter()
                .map(|t| {
                    (0..m)
                        .map(|i| {
                            (0..m)
                                .map(|j| {
                                    (0..m)
                                        .flat_map(|a| (0..m).map(move |b| (a, b)))
                                        .map(|(a, b)| fr(a, i) * fr(b, j) * t[a][b])
                                        .sum()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let conn_frame = |src: &dyn Fn(usize, usize, usize) -> f64| -> Vec<Vec<Vec<f64>>> {
        (0..m)
            .map(|i| {
                (0..p).map(|al| (0..p).map(|be| (0..m).map(|a| fr(a, i) * src(a, al, be)).sum()).collect()).collect()
            })
            .collect()
    };
    let normal_connection = conn_frame(&|a, al, be| conn_v(a, al, be));
    let induced_normal_connection = conn_frame(&|a, al, be| pl.omega_bar[a][al][be].value());

    let to_frame_vec = |coord: &[Vec<f64>], i: usize| -> Vec<f64> {
        let mut v = vec![0.0; coord[0].len()];
        for a in 0..m {
            axpy_values(&mut v, fr(a, i), &coord[a]);
        }
        v
    };
    let ya_v: Vec<Vec<f64>> = ya.iter().map(|v| values(v)).collect();
    let y_frame: Vec<Vec<f64>> = (0..m).map(|i| to_frame_vec(&ya_v, i)).collect();
    let dn_coord: Vec<Vec<f64>> = (0..m).map(|a| nvec.iter().map(|c| d1(c, a)).collect()).collect();
    let dn: Vec<Vec<f64>> = (0..m).map(|i| to_frame_vec(&dn_coord, i)).collect();
    let hess_y: Vec<Vec<Vec<f64>>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut v = vec![0.0; y.len()];
                    for a in 0..m {
                        for b in 0..m {
                            axpy_values(&mut v, fr(a, i) * fr(b, j), &hess_y_coord[a][b]);
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();
    let de: Vec<Vec<Vec<f64>>> = (0..p)
        .map(|al| {
            let coord: Vec<Vec<f64>> = (0..m).map(|c| values(&de_coord[c][al])).collect();
            (0..m).map(|i| to_frame_vec(&coord, i)).collect()
        })
        .collect();

    Ok(MoebiusData {
        point: pl.point.clone(),
        m,
        p,
        rho: rho.value(),
        rho_gradient: (0..m).map(|a| d1(&rho, a)).collect(),
        rho_hessian: DMatrix::from_fn(m, m, |a, b| d2(&rho, a, b)),
        y: values(&y),
        n: values(&nvec),
        y_frame,
        e_normal: e_normal.iter().map(|e| values(e)).collect(),
        laplacian_y: values(&lap),
        induced_metric: MetricAtPoint::from_jets(&pl.ginduced)?,
        metric,
        frame,
        a: a_frame,
        a_coord: a_coord_v,
        b: b_frame,
        c: c_frame,
        grad_a,
        grad_b,
        grad_c,
        riemann,
        ricci,
        kappa: curv.kappa,
        normal_curvature,
        normal_connection,
        induced_normal_connection,
        dn,
        hess_y,
        de,
        curvature: curv,
    })
}

/// Names of all identity residuals, in report order.
pub const IDENTITY_NAMES: [&str; 10] = [
    "lightcone",
    "traces",
    "gauss",
    "normal_curv",
    "codazzi_A",
    "codazzi_B",
    "ricci_C",
    "div_B",
    "structure",
    "frame_gram",
];

/// Max-norm residuals of the structural identities, keyed by name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IdentityResiduals {
    pub entries: BTreeMap<String, f64>,
}

impl IdentityResiduals {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).copied()
    }

    /// Largest entry.
    pub fn max(&self) -> f64 {
        self.entries.values().fold(0.0f64, |a, b| a.max(*b))
    }

    /// Entrywise maximum with `other`.
    pub fn merge_max(&mut self, other: &IdentityResiduals) {
        for (k, v) in &other.entries {
            let e = self.entries.entry(k.clone()).or_insert(0.0);
            if v.is_nan() || *v > *e {
                *e = *v;
            }
        }
    }

    /// Evaluates every identity on the data. The computation only uses the
    /// stored components, so perturbing a component shows up directly.
    pub fn evaluate(d: &MoebiusData) -> IdentityResiduals {
        let (m, p) = (d.m, d.p);
        let mf = m as f64;
        let lz = |u: &[f64], v: &[f64]| lorentz_dot(u, v);
        let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        let mut out = BTreeMap::new();

        let norm_term = 1.0 + mf * mf * d.kappa;
        let lightcone = [
            lz(&d.y, &d.y).abs(),
            lz(&d.n, &d.n).abs(),
            (lz(&d.y, &d.n) - 1.0).abs(),
            (lz(&d.laplacian_y, &d.y) + mf).abs(),
            (lz(&d.laplacian_y, &d.laplacian_y) - norm_term).abs(),
        ];
        out.insert("lightcone".into(), fold_max(lightcone));

        let mut traces = (d.a.trace() - norm_term / (2.0 * mf)).abs();
        traces = traces.max((d.b_norm_sq() - (mf - 1.0) / mf).abs());
        for b in &d.b {
            traces = traces.max(b.trace().abs());
        }
        out.insert("traces".into(), traces);

        let bsum = |i: usize, j: usize, k: usize, l: usize| -> f64 {
            d.b.iter().map(|b| b[(i, l)] * b[(j, k)] - b[(i, k)] * b[(j, l)]).sum()
        };
        let a = &d.a;
        let mut gauss = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let rhs = bsum(i, j, k, l) + a[(i, l)] * delta(j, k) - a[(i, k)] * delta(j, l)
                            + a[(j, k)] * delta(i, l)
                            - a[(j, l)] * delta(i, k);
                        gauss = gauss.max((d.riemann[i][j][k][l] - rhs).abs());
                    }
                }
            }
        }
        out.insert("gauss".into(), gauss);

        let mut normal = 0.0f64;
        for al in 0..p {
            for be in 0..p {
                for i in 0..m {
                    for j in 0..m {
                        let rhs: f64 =
                            (0..m).map(|k| d.b[al][(j, k)] * d.b[be][(i, k)] - d.b[al][(i, k)] * d.b[be][(j, k)]).sum();
                        normal = normal.max((d.normal_curvature[al][be][i][j] - rhs).abs());
                    }
                }
            }
        }
        out.insert("normal_curv".into(), normal);

        let mut cod_a = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let rhs: f64 = (0..p).map(|al| d.b[al][(i, k)] * d.c[al][j] - d.b[al][(i, j)] * d.c[al][k]).sum();
                    cod_a = cod_a.max((d.grad_a[i][j][k] - d.grad_a[i][k][j] - rhs).abs());
                }
            }
        }
        out.insert("codazzi_A".into(), cod_a);

        let mut cod_b = 0.0f64;
        let mut div_b = 0.0f64;
        for al in 0..p {
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let lhs = d.grad_b[al][i][j][k] - d.grad_b[al][i][k][j];
                        let rhs = delta(i, j) * d.c[al][k] - delta(i, k) * d.c[al][j];
                        cod_b = cod_b.max((lhs - rhs).abs());
                    }
                }
                let div: f64 = (0..m).map(|j| d.grad_b[al][i][j][j]).sum();
                div_b = div_b.max(((mf - 1.0) * d.c[al][i] + div).abs());
            }
        }
        out.insert("codazzi_B".into(), cod_b);
        out.insert("div_B".into(), div_b);

        let mut ricci_c = 0.0f64;
        for al in 0..p {
            for i in 0..m {
                for j in 0..m {
                    let rhs: f64 = (0..m).map(|k| d.b[al][(i, k)] * a[(k, j)] - d.b[al][(k, j)] * a[(k, i)]).sum();
                    ricci_c = ricci_c.max((d.grad_c[al][i][j] - d.grad_c[al][j][i] - rhs).abs());
                }
            }
        }
        let tr_a = a.trace();
        for i in 0..m {
            for j in 0..m {
                let bb: f64 = d.b.iter().map(|b| (0..m).map(|k| b[(i, k)] * b[(k, j)]).sum::<f64>()).sum();
                let rhs = -bb + delta(i, j) * tr_a + (mf - 2.0) * a[(i, j)];
                ricci_c = ricci_c.max((d.ricci[(i, j)] - rhs).abs());
            }
        }
        out.insert("ricci_C".into(), ricci_c);

        // dN, covariant Hessian of Y, dE_α and the normal connection
        let dim = d.y.len();
        let mut structure = 0.0f64;
        for i in 0..m {
            let mut rhs = vec![0.0; dim];
            for j in 0..m {
                axpy_values(&mut rhs, a[(i, j)], &d.y_frame[j]);
            }
            for al in 0..p {
                axpy_values(&mut rhs, d.c[al][i], &d.e_normal[al]);
            }
            structure = structure.max(max_abs_diff(&d.dn[i], &rhs));
            for j in 0..m {
                let mut rhs = vec![0.0; dim];
                axpy_values(&mut rhs, -a[(i, j)], &d.y);
                axpy_values(&mut rhs, -delta(i, j), &d.n);
                for al in 0..p {
                    axpy_values(&mut rhs, d.b[al][(i, j)], &d.e_normal[al]);
                }
                structure = structure.max(max_abs_diff(&d.hess_y[i][j], &rhs));
            }
        }
        for al in 0..p {
            for i in 0..m {
                let mut rhs = vec![0.0; dim];
                axpy_values(&mut rhs, -d.c[al][i], &d.y);
                for j in 0..m {
                    axpy_values(&mut rhs, -d.b[al][(i, j)], &d.y_frame[j]);
                }
                for be in 0..p {
                    axpy_values(&mut rhs, d.normal_connection[i][be][al], &d.e_normal[be]);
                }
                structure = structure.max(max_abs_diff(&d.de[al][i], &rhs));
                for be in 0..p {
                    let diff = d.normal_connection[i][al][be] - d.induced_normal_connection[i][al][be];
                    structure = structure.max(diff.abs());
                }
            }
        }
        out.insert("structure".into(), structure);

        // Gram matrix of {Y, N, Y_i, E_α} against the light-cone block form
        let mut basis: Vec<&[f64]> = vec![&d.y, &d.n];
        basis.extend(d.y_frame.iter().map(|v| v.as_slice()));
        basis.extend(d.e_normal.iter().map(|v| v.as_slice()));
        let mut gram = 0.0f64;
        for (s, u) in basis.iter().enumerate() {
            for (t, v) in basis.iter().enumerate() {
                let expected = match (s, t) {
                    (0, 1) | (1, 0) => 1.0,
                    (0, _) | (_, 0) | (1, _) | (_, 1) => 0.0,
                    _ => delta(s, t),
                };
                gram = gram.max((lz(u, v) - expected).abs());
            }
        }
        gram = gram.max((d.frame_metric() - DMatrix::identity(m, m)).amax());
        out.insert("frame_gram".into(), gram);

        IdentityResiduals { entries: out }
    }
}

fn fold_max<const N: usize>(v: [f64; N]) -> f64 {
    v.into_iter().fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}
