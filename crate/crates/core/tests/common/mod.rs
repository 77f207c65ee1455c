//! Finite-difference oracle built only from plain `f64` evaluation of a
//! unit-sphere chart: sixth-order central stencils, the second fundamental
//! form by projection, and the light-cone frame from `Y = ρ(1, x)`.

#![allow(dead_code, clippy::needless_range_loop)]

use moebius_core::linalg::{dot, lorentz_dot};
use moebius_core::ImmersionSpec;
use nalgebra::DMatrix;

const D1: [(i32, f64); 6] = [(-3, -1.0), (-2, 9.0), (-1, -45.0), (1, 45.0), (2, -9.0), (3, 1.0)];
const D2: [(i32, f64); 7] = [(-3, 2.0), (-2, -27.0), (-1, 270.0), (0, -490.0), (1, 270.0), (2, -27.0), (3, 2.0)];

fn shifted(u: &[f64], a: usize, s: f64) -> Vec<f64> {
    let mut v = u.to_vec();
    v[a] += s;
    v
}

fn axpy(acc: &mut [f64], w: f64, x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += w * b;
    }
}

/// `∂_a f(u)` of a vector-valued function.
pub fn fd1<F: Fn(&[f64]) -> Vec<f64>>(f: &F, u: &[f64], a: usize, h: f64) -> Vec<f64> {
    let mut acc: Vec<f64> = Vec::new();
    for (k, w) in D1 {
        let v = f(&shifted(u, a, k as f64 * h));
        if acc.is_empty() {
            acc = vec![0.0; v.len()];
        }
        axpy(&mut acc, w / (60.0 * h), &v);
    }
    acc
}

/// `∂_a ∂_b f(u)` of a vector-valued function.
pub fn fd2<F: Fn(&[f64]) -> Vec<f64>>(f: &F, u: &[f64], a: usize, b: usize, h: f64) -> Vec<f64> {
    if a != b {
        let g = |v: &[f64]| fd1(f, v, b, h);
        return fd1(&g, u, a, h);
    }
    let mut acc: Vec<f64> = Vec::new();
    for (k, w) in D2 {
        let v = f(&shifted(u, a, k as f64 * h));
        if acc.is_empty() {
            acc = vec![0.0; v.len()];
        }
        axpy(&mut acc, w / (180.0 * h * h), &v);
    }
    acc
}

fn gram(vs: &[Vec<f64>], ip: fn(&[f64], &[f64]) -> f64) -> DMatrix<f64> {
    DMatrix::from_fn(vs.len(), vs.len(), |i, j| ip(&vs[i], &vs[j]))
}

/// Möbius factor of a unit-sphere chart from the projected Hessian of `x`.
pub fn rho_fd(spec: &ImmersionSpec, u: &[f64], h: f64) -> f64 {
    let m = spec.m;
    let f = |v: &[f64]| spec.point(v).expect("chart evaluates");
    let x = f(u);
    let xa: Vec<Vec<f64>> = (0..m).map(|a| fd1(&f, u, a, h)).collect();
    let ghat = gram(&xa, dot);
    let ginv = ghat.clone().try_inverse().expect("immersion");
    let mut second = vec![vec![Vec::new(); m]; m];
    for a in 0..m {
        for b in a..m {
            let mut v = fd2(&f, u, a, b, h);
            let r = dot(&v, &x);
            axpy(&mut v, -r, &x);
            let t: Vec<f64> = xa.iter().map(|xc| dot(&v, xc)).collect();
            for c in 0..m {
                for d in 0..m {
                    axpy(&mut v, -ginv[(c, d)] * t[c], &xa[d]);
                }
            }
            second[a][b] = v.clone();
            second[b][a] = v;
        }
    }
    let mut h2 = 0.0;
    let mut mh = vec![0.0; x.len()];
    for a in 0..m {
        for b in 0..m {
            axpy(&mut mh, ginv[(a, b)], &second[a][b]);
            for c in 0..m {
                for d in 0..m {
                    h2 += ginv[(a, c)] * ginv[(b, d)] * dot(&second[a][b], &second[c][d]);
                }
            }
        }
    }
    let mf = m as f64;
    let defect = h2 - dot(&mh, &mh) / mf;
    (mf / (mf - 1.0) * defect).sqrt()
}

/// `Y = ρ(1, x)`.
pub fn lift_fd(spec: &ImmersionSpec, u: &[f64], h: f64) -> Vec<f64> {
    let rho = rho_fd(spec, u, h);
    let mut y = vec![rho];
    y.extend(spec.point(u).expect("chart evaluates").iter().map(|xi| rho * xi));
    y
}

/// Chart components `A_ab = −<∂_a∂_b Y, N>` with
/// `N = −ΔY/m − <ΔY,ΔY> Y / (2m²)`.
pub struct FdBlaschke {
    pub a: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub y: Vec<f64>,
    pub n: Vec<f64>,
}

pub fn blaschke_fd(spec: &ImmersionSpec, u: &[f64], h_inner: f64, h_outer: f64) -> FdBlaschke {
    let m = spec.m;
    let f = |v: &[f64]| lift_fd(spec, v, h_inner);
    let y = f(u);
    let ya: Vec<Vec<f64>> = (0..m).map(|a| fd1(&f, u, a, h_outer)).collect();
    let g = gram(&ya, lorentz_dot);
    let ginv = g.clone().try_inverse().expect("Möbius metric");
    let mut yab = vec![vec![Vec::new(); m]; m];
    for a in 0..m {
        for b in a..m {
            let v = fd2(&f, u, a, b, h_outer);
            yab[a][b] = v.clone();
            yab[b][a] = v;
        }
    }
    let mut lap = vec![0.0; y.len()];
    for a in 0..m {
        for b in 0..m {
            let mut v = yab[a][b].clone();
            let t: Vec<f64> = ya.iter().map(|yc| lorentz_dot(&v, yc)).collect();
            for c in 0..m {
                for d in 0..m {
                    axpy(&mut v, -ginv[(c, d)] * t[c], &ya[d]);
                }
            }
            axpy(&mut lap, ginv[(a, b)], &v);
        }
    }
    let mf = m as f64;
    let ll = lorentz_dot(&lap, &lap);
    let n: Vec<f64> = lap.iter().zip(&y).map(|(l, yi)| -l / mf - ll / (2.0 * mf * mf) * yi).collect();
    let a = DMatrix::from_fn(m, m, |i, j| -lorentz_dot(&yab[i][j], &n));
    FdBlaschke { a, g, y, n }
}

/// First and second partials of `ρ` by central differences of [`rho_fd`].
pub fn rho_partials_fd(spec: &ImmersionSpec, u: &[f64], h_inner: f64, h_outer: f64) -> (Vec<f64>, DMatrix<f64>) {
    let m = spec.m;
    let f = |v: &[f64]| vec![rho_fd(spec, v, h_inner)];
    let grad = (0..m).map(|a| fd1(&f, u, a, h_outer)[0]).collect();
    let mut hess = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let v = fd2(&f, u, a, b, h_outer)[0];
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    (grad, hess)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// Builtins whose resolved ambient is the unit sphere.
pub fn unit_sphere_builtins() -> Vec<ImmersionSpec> {
    moebius_core::builtin_examples()
        .into_iter()
        .map(|e| e.spec.resolved())
        .filter(|s| s.ambient.kind == moebius_core::AmbientKind::Sphere && s.ambient.c == 1.0)
        .collect()
}

/// `Σ_k ∂_a F^k ∂_b F^k` by central differences.
pub fn euclidean_pullback<F: Fn(&[f64]) -> Vec<f64>>(f: &F, u: &[f64], h: f64) -> DMatrix<f64> {
    let d: Vec<Vec<f64>> = (0..u.len()).map(|a| fd1(f, u, a, h)).collect();
    gram(&d, dot)
}

/// Worst relative deviation of the pullback of `σ` from `(2/(1+|u|²))² δ`.
pub fn sigma_conformality_defect(u: &[f64]) -> f64 {
    let f = |v: &[f64]| moebius_core::gallery::sigma(v);
    let g = euclidean_pullback(&f, u, 1e-3);
    let factor = (2.0 / (1.0 + dot(u, u))).powi(2);
    (g - DMatrix::identity(u.len(), u.len()) * factor).amax() / factor
}

/// Worst relative deviation of the pullback of `τ` from `1/y₀²` times the
/// hyperbolic metric, in the chart `w ↦ (√(1+|w|²), w)`.
pub fn tau_conformality_defect(w: &[f64]) -> f64 {
    let hyperboloid = |v: &[f64]| {
        let mut y = vec![(1.0 + dot(v, v)).sqrt()];
        y.extend_from_slice(v);
        y
    };
    let f = |v: &[f64]| moebius_core::gallery::tau(&hyperboloid(v)).expect("point on the hyperboloid");
    let g = euclidean_pullback(&f, w, 1e-3);
    let d: Vec<Vec<f64>> = (0..w.len()).map(|a| fd1(&hyperboloid, w, a, 1e-3)).collect();
    let hyp = gram(&d, lorentz_dot);
    let y0 = hyperboloid(w)[0];
    let factor = 1.0 / (y0 * y0);
    (g - hyp * factor).amax() / factor
}
