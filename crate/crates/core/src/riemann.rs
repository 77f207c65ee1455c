//! Chart-level Riemannian geometry: metrics from jets, Christoffel symbols,
//! curvature, Hessians and covariant derivatives.
//!
//! Convention: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z` and
//! `R_abcd = g(R(∂_a, ∂_b)∂_c, ∂_d)`, so the unit sphere has `R_abba > 0`
//! and `κ = 1`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::jet::{Jet, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate metric (pivot {0:e})")]
    DegenerateMetric(f64),
    #[error("metric is not positive definite")]
    NotPositiveDefinite,
    #[error("second derivatives of the metric are required")]
    MissingSecondDerivatives,
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Relative pivot size below which a metric counts as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Inverse of a square matrix of jets by Gauss–Jordan elimination with
/// partial pivoting on the values.
pub fn inverse_jets(mat: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>, GeometryError> {
    let n = mat.len();
    let proto = &mat[0][0];
    let (nv, order) = (proto.num_vars(), proto.order());
    let scale = mat.iter().flatten().fold(0.0f64, |a, j| a.max(j.value().abs()));
    let mut a: Vec<Vec<Jet>> = mat.to_vec();
    let mut inv: Vec<Vec<Jet>> =
        (0..n).map(|i| (0..n).map(|j| Jet::constant(nv, order, if i == j { 1.0 } else { 0.0 })).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].value().abs().total_cmp(&a[j][col].value().abs())).unwrap();
        let pv = a[piv][col].value();
        if pv.abs() <= DEGENERACY_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
            return Err(GeometryError::DegenerateMetric(pv));
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let r = a[col][col].recip()?;
        for j in 0..n {
            a[col][j] = &a[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i][col].clone();
            for j in 0..n {
                a[i][j] = &a[i][j] - &(&f * &a[col][j]);
                inv[i][j] = &inv[i][j] - &(&f * &inv[col][j]);
            }
        }
    }
    Ok(inv)
}

/// Gram matrix `⟨v_a, v_b⟩` of jet-valued vectors under `inner`.
pub fn gram_jets(vectors: &[Vec<Jet>], lorentzian: bool) -> Vec<Vec<Jet>> {
    let n = vectors.len();
    let mut g: Vec<Vec<Jet>> = vec![Vec::with_capacity(n); n];
    for a in 0..n {
        for b in 0..n {
            let v = if b < a { g[b][a].clone() } else { inner_jets(&vectors[a], &vectors[b], lorentzian) };
            g[a].push(v);
        }
    }
    g
}

/// `Σ_k ±v_k w_k` with the first sign negative when `lorentzian`.
pub fn inner_jets(v: &[Jet], w: &[Jet], lorentzian: bool) -> Jet {
    let mut acc = &v[0] * &w[0];
    if lorentzian {
        acc = -acc;
    }
    for k in 1..v.len() {
        acc = &acc + &(&v[k] * &w[k]);
    }
    acc
}

/// Christoffel symbols `Γ[c][a][b] = Γ^c_ab` as jets one order below `g`.
pub fn christoffel_jets(g: &[Vec<Jet>]) -> Result<Vec<Vec<Vec<Jet>>>, GeometryError> {
    let m = g.len();
    let ginv = inverse_jets(g)?;
    let dg: Vec<Vec<Vec<Jet>>> = (0..m)
        .map(|c| (0..m).map(|a| (0..m).map(|b| g[a][b].partial(c)).collect::<Result<_, _>>()).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    // first kind: Γ_dab = ½(∂_a g_db + ∂_b g_da − ∂_d g_ab)
    let mut first = vec![vec![Vec::with_capacity(m); m]; m];
    for d in 0..m {
        for a in 0..m {
            for b in 0..m {
                let s = &(&dg[a][d][b] + &dg[b][d][a]) - &dg[d][a][b];
                first[d][a].push(s.scale(0.5));
            }
        }
    }
    let mut gamma = vec![vec![Vec::with_capacity(m); m]; m];
    for c in 0..m {
        for a in 0..m {
            for b in 0..m {
                let mut acc = &ginv[c][0] * &first[0][a][b];
                for d in 1..m {
                    acc = &acc + &(&ginv[c][d] * &first[d][a][b]);
                }
                gamma[c][a].push(acc);
            }
        }
    }
    Ok(gamma)
}

/// Metric components and their first and second partials at a point.
/// `dg[a][b][c] = ∂_c g_ab`, `ddg[a][b][c][d] = ∂_c ∂_d g_ab`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAtPoint {
    pub g: DMatrix<f64>,
    pub dg: Vec<Vec<Vec<f64>>>,
    pub ddg: Option<Vec<Vec<Vec<Vec<f64>>>>>,
}

fn unit(m: usize, i: usize) -> Vec<u8> {
    let mut e = vec![0u8; m];
    e[i] += 1;
    e
}

fn unit2(m: usize, i: usize, j: usize) -> Vec<u8> {
    let mut e = vec![0u8; m];
    e[i] += 1;
    e[j] += 1;
    e
}

/// First partial `∂_i f` at the expansion point.
pub fn d1(f: &Jet, i: usize) -> f64 {
    f.derivative(&unit(f.num_vars(), i)).expect("jet order at least 1")
}

/// Second partial `∂_i ∂_j f` at the expansion point.
pub fn d2(f: &Jet, i: usize, j: usize) -> f64 {
    f.derivative(&unit2(f.num_vars(), i, j)).expect("jet order at least 2")
}

impl MetricAtPoint {
    /// Extracts `g`, `dg` and (if the jets have order ≥ 2) `ddg`; checks
    /// positive definiteness.
    pub fn from_jets(g: &[Vec<Jet>]) -> Result<Self, GeometryError> {
        let m = g.len();
        let order = g[0][0].order();
        if order < 1 {
            return Err(JetError::OrderExceeded { requested: 1, order }.into());
        }
        let gv = DMatrix::from_fn(m, m, |a, b| g[a][b].value());
        let dg = (0..m).map(|a| (0..m).map(|b| (0..m).map(|c| d1(&g[a][b], c)).collect()).collect()).collect();
        let ddg = (order >= 2).then(|| {
            (0..m)
                .map(|a| {
                    (0..m).map(|b| (0..m).map(|c| (0..m).map(|d| d2(&g[a][b], c, d)).collect()).collect()).collect()
                })
                .collect()
        });
        let metric = MetricAtPoint { g: gv, dg, ddg };
        metric.check_positive()?;
        Ok(metric)
    }

    /// Constant metric with vanishing derivatives.
    pub fn flat(g: DMatrix<f64>) -> Self {
        let m = g.nrows();
        MetricAtPoint { g, dg: vec![vec![vec![0.0; m]; m]; m], ddg: Some(vec![vec![vec![vec![0.0; m]; m]; m]; m]) }
    }

    fn check_positive(&self) -> Result<(), GeometryError> {
        let scale = self.g.amax();
        match self.g.clone().cholesky() {
            Some(ch) => {
                let min_pivot = ch.l().diagonal().iter().fold(f64::INFINITY, |a, b| a.min(*b));
                if min_pivot * min_pivot <= DEGENERACY_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
                    Err(GeometryError::DegenerateMetric(min_pivot * min_pivot))
                } else {
                    Ok(())
                }
            }
            None if scale == 0.0 => Err(GeometryError::DegenerateMetric(0.0)),
            None => Err(GeometryError::NotPositiveDefinite),
        }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.g.clone().try_inverse().expect("metric is invertible")
    }

    /// `Γ[c][a][b] = Γ^c_ab` at the point.
    pub fn christoffel(&self) -> Vec<Vec<Vec<f64>>> {
        let m = self.dim();
        let ginv = self.inverse();
        let mut gamma = vec![vec![vec![0.0; m]; m]; m];
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    gamma[c][a][b] = (0..m)
                        .map(|d| 0.5 * ginv[(c, d)] * (self.dg[d][b][a] + self.dg[d][a][b] - self.dg[a][b][d]))
                        .sum();
                }
            }
        }
        gamma
    }

    /// Maximum of `|∂_c g_ab − Γ^d_ca g_db − Γ^d_cb g_ad|`.
    pub fn compatibility_defect(&self) -> f64 {
        let m = self.dim();
        let gamma = self.christoffel();
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let mut v = self.dg[a][b][c];
                    for d in 0..m {
                        v -= gamma[d][c][a] * self.g[(d, b)] + gamma[d][c][b] * self.g[(a, d)];
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }
}

/// Curvature data in coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureAtPoint {
    /// `gamma[c][a][b] = Γ^c_ab`.
    pub gamma: Vec<Vec<Vec<f64>>>,
    /// `riemann[a][b][c][d] = R_abcd = g(R(∂_a,∂_b)∂_c, ∂_d)`.
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
    /// `ricci[b][c] = Σ_a R_abc^a`.
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    /// `S / (m(m−1))`, zero for curves.
    pub kappa: f64,
}

pub fn curvature(metric: &MetricAtPoint) -> Result<CurvatureAtPoint, GeometryError> {
    let m = metric.dim();
    let ddg = metric.ddg.as_ref().ok_or(GeometryError::MissingSecondDerivatives)?;
    let ginv = metric.inverse();
    let gamma = metric.christoffel();
    // ∂_e g^{cd} = −g^{cp} ∂_e g_pq g^{qd}
    let mut dginv = vec![vec![vec![0.0; m]; m]; m];
    for c in 0..m {
        for d in 0..m {
            for e in 0..m {
                let mut s = 0.0;
                for p in 0..m {
                    for q in 0..m {
                        s -= ginv[(c, p)] * metric.dg[p][q][e] * ginv[(q, d)];
                    }
                }
                dginv[c][d][e] = s;
            }
        }
    }
    // dgamma[e][c][a][b] = ∂_e Γ^c_ab
    let mut dgamma = vec![vec![vec![vec![0.0; m]; m]; m]; m];
    for e in 0..m {
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut s = 0.0;
                    for d in 0..m {
                        let first = 0.5 * (metric.dg[d][b][a] + metric.dg[d][a][b] - metric.dg[a][b][d]);
                        let dfirst = 0.5 * (ddg[d][b][a][e] + ddg[d][a][b][e] - ddg[a][b][d][e]);
                        s += dginv[c][d][e] * first + ginv[(c, d)] * dfirst;
                    }
                    dgamma[e][c][a][b] = s;
                }
            }
        }
    }
    // R_abc^d
    let mut mixed = vec![vec![vec![vec![0.0; m]; m]; m]; m];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let mut s = dgamma[a][d][b][c] - dgamma[b][d][a][c];
                    for e in 0..m {
                        s += gamma[e][b][c] * gamma[d][a][e] - gamma[e][a][c] * gamma[d][b][e];
                    }
                    mixed[a][b][c][d] = s;
                }
            }
        }
    }
    let mut riemann = vec![vec![vec![vec![0.0; m]; m]; m]; m];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    riemann[a][b][c][d] = (0..m).map(|e| mixed[a][b][c][e] * metric.g[(e, d)]).sum();
                }
            }
        }
    }
    let ricci = DMatrix::from_fn(m, m, |b, c| (0..m).map(|a| mixed[a][b][c][a]).sum());
    let scalar: f64 = (0..m).flat_map(|b| (0..m).map(move |c| (b, c))).map(|(b, c)| ginv[(b, c)] * ricci[(b, c)]).sum();
    let kappa = if m >= 2 { scalar / (m * (m - 1)) as f64 } else { 0.0 };
    Ok(CurvatureAtPoint { gamma, riemann, ricci, scalar, kappa })
}

impl CurvatureAtPoint {
    /// Largest violation of the pair symmetries of `R_abcd`.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.riemann.len();
        let r = &self.riemann;
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        worst = worst
                            .max((r[a][b][c][d] + r[b][a][c][d]).abs())
                            .max((r[a][b][c][d] + r[a][b][d][c]).abs())
                            .max((r[a][b][c][d] - r[c][d][a][b]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest `|R_abcd + R_bcad + R_cabd|`.
    pub fn bianchi_defect(&self) -> f64 {
        let m = self.riemann.len();
        let r = &self.riemann;
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        worst = worst.max((r[a][b][c][d] + r[b][c][a][d] + r[c][a][b][d]).abs());
                    }
                }
            }
        }
        worst
    }
}

/// `Hess_ab f = ∂_a∂_b f − Γ^c_ab ∂_c f` and `Δf = g^{ab} Hess_ab`.
pub fn hessian_laplacian(f: &Jet, metric: &MetricAtPoint) -> (DMatrix<f64>, f64) {
    let m = metric.dim();
    let gamma = metric.christoffel();
    let df: Vec<f64> = (0..m).map(|c| d1(f, c)).collect();
    let hess = DMatrix::from_fn(m, m, |a, b| d2(f, a, b) - (0..m).map(|c| gamma[c][a][b] * df[c]).sum::<f64>());
    let lap = metric.inverse().component_mul(&hess).sum();
    (hess, lap)
}

/// `t[a][b][c] = T_ab;c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovDeriv2Tensor {
    pub t: Vec<Vec<Vec<f64>>>,
}

impl CovDeriv2Tensor {
    /// Norm squared `g^{aa'} g^{bb'} g^{cc'} T_abc T_a'b'c'`.
    pub fn norm_sq(&self, ginv: &DMatrix<f64>) -> f64 {
        let m = self.t.len();
        let mut s = 0.0;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for a2 in 0..m {
                        for b2 in 0..m {
                            for c2 in 0..m {
                                s += ginv[(a, a2)]
                                    * ginv[(b, b2)]
                                    * ginv[(c, c2)]
                                    * self.t[a][b][c]
                                    * self.t[a2][b2][c2];
                            }
                        }
                    }
                }
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.t.iter().flatten().flatten().fold(0.0f64, |a, b| a.max(b.abs()))
    }
}

/// `T_ab;c = ∂_c T_ab − Γ^d_ca T_db − Γ^d_cb T_ad` for a field given as jets.
pub fn covariant_derivative_sym2(t: &[Vec<Jet>], metric: &MetricAtPoint) -> CovDeriv2Tensor {
    let m = metric.dim();
    let gamma = metric.christoffel();
    let mut out = vec![vec![vec![0.0; m]; m]; m];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let mut v = d1(&t[a][b], c);
                for d in 0..m {
                    v -= gamma[d][c][a] * t[d][b].value() + gamma[d][c][b] * t[a][d].value();
                }
                out[a][b][c] = v;
            }
        }
    }
    CovDeriv2Tensor { t: out }
}

/// Metric jets `g_ab = ⟨∂_a x, ∂_b x⟩` of an immersion, one order below `x`.
pub fn induced_metric_jets(x: &[Jet], lorentzian: bool) -> Result<Vec<Vec<Jet>>, GeometryError> {
    let m = x[0].num_vars();
    let tangents: Vec<Vec<Jet>> =
        (0..m).map(|a| x.iter().map(|xi| xi.partial(a)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
    Ok(gram_jets(&tangents, lorentzian))
}

pub fn metric_from_immersion(x: &[Jet], lorentzian: bool) -> Result<MetricAtPoint, GeometryError> {
    MetricAtPoint::from_jets(&induced_metric_jets(x, lorentzian)?)
}
