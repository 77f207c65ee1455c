//! Dense linear algebra over Euclidean and Lorentzian inner products.
//!
//! Lorentzian vectors use the signature `(-, +, ..., +)` with the timelike
//! coordinate first.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use thiserror::Error;

/// Relative threshold under which `<c, c>_1` counts as zero.
pub const CAUSAL_TOLERANCE: f64 = 1e-9;
/// Relative gap under which two generalized eigenvalues are merged.
pub const CLUSTER_TOLERANCE: f64 = 1e-4;
/// Relative residual norm below which Gram–Schmidt reports rank deficiency.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("Lorentzian vectors need at least 2 components, got {0}")]
    TooShort(usize),
    #[error("zero vector has no causal canonical form")]
    ZeroVector,
    #[error("causal type is numerically ambiguous: <c,c> = {norm:e} but lightlike defect {defect:e}")]
    AmbiguousCausal { norm: f64, defect: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("rank deficiency at input vector {0}")]
    RankDeficient(usize),
    #[error("more than one timelike direction among the inputs")]
    SignatureViolation,
    #[error("matrix does not preserve the Lorentzian form (defect {0:e})")]
    NotLorentz(f64),
    #[error("matrix reverses time orientation")]
    NotOrthochronous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CausalType {
    Timelike,
    Lightlike,
    Spacelike,
    Zero,
}

impl CausalType {
    pub fn as_str(self) -> &'static str {
        match self {
            CausalType::Timelike => "timelike",
            CausalType::Lightlike => "lightlike",
            CausalType::Spacelike => "spacelike",
            CausalType::Zero => "zero",
        }
    }
}

/// Inner product used by [`gram_schmidt`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Lorentz,
}

impl Metric {
    pub fn inner(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => dot(a, b),
            Metric::Lorentz => lorentz_dot(a, b),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `-a_0 b_0 + Σ_k a_k b_k` without length checks.
pub fn lorentz_dot(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + dot(&a[1..], &b[1..])
}

#[derive(Debug, Clone, PartialEq)]
pub struct LorentzVector(pub Vec<f64>);

impl LorentzVector {
    pub fn new(components: Vec<f64>) -> Result<Self, LinalgError> {
        if components.len() < 2 {
            return Err(LinalgError::TooShort(components.len()));
        }
        Ok(LorentzVector(components))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        lorentz_dot(&self.0, &self.0)
    }

    pub fn euclidean_norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    /// Causal type with the scale-aware threshold
    /// `|<c,c>_1| < tol (1 + |c|^2)`.
    pub fn causal_type(&self, tol: f64) -> CausalType {
        let e = self.euclidean_norm_sq();
        if e.sqrt() < f64::EPSILON {
            return CausalType::Zero;
        }
        let q = self.norm_sq();
        if q.abs() < tol * (1.0 + e) {
            CausalType::Lightlike
        } else if q < 0.0 {
            CausalType::Timelike
        } else {
            CausalType::Spacelike
        }
    }
}

pub fn lorentz_inner(y: &LorentzVector, z: &LorentzVector) -> Result<f64, LinalgError> {
    if y.len() != z.len() {
        return Err(LinalgError::DimensionMismatch(y.len(), z.len()));
    }
    if y.len() < 2 {
        return Err(LinalgError::TooShort(y.len()));
    }
    Ok(lorentz_dot(&y.0, &z.0))
}

fn eta(n: usize) -> DMatrix<f64> {
    let mut e = DMatrix::identity(n, n);
    e[(0, 0)] = -1.0;
    e
}

/// An element of the orthochronous Lorentz group O⁺(N-1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzTransform(DMatrix<f64>);

impl LorentzTransform {
    /// Validates `TᵀηT = η` within `1e-10` (scaled) and `T₀₀ > 0`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, LinalgError> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(LinalgError::DimensionMismatch(n, matrix.ncols()));
        }
        if n < 2 {
            return Err(LinalgError::TooShort(n));
        }
        let t = LorentzTransform(matrix);
        let defect = t.lorentz_defect();
        let scale = t.0.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        if defect > 1e-10 * scale * scale {
            return Err(LinalgError::NotLorentz(defect));
        }
        if t.0[(0, 0)] <= 0.0 {
            return Err(LinalgError::NotOrthochronous);
        }
        Ok(t)
    }

    pub fn identity(n: usize) -> Self {
        LorentzTransform(DMatrix::identity(n, n))
    }

    /// Pure boost with rapidity `|rapidity|` along the spatial direction
    /// given by `rapidity` (length N-1).
    pub fn boost(rapidity: &[f64]) -> Self {
        let n = rapidity.len() + 1;
        let phi = dot(rapidity, rapidity).sqrt();
        let mut m = DMatrix::identity(n, n);
        if phi > 0.0 {
            let dir: Vec<f64> = rapidity.iter().map(|r| r / phi).collect();
            let (ch, sh) = (phi.cosh(), phi.sinh());
            m[(0, 0)] = ch;
            for i in 0..n - 1 {
                m[(0, i + 1)] = sh * dir[i];
                m[(i + 1, 0)] = sh * dir[i];
                for j in 0..n - 1 {
                    m[(i + 1, j + 1)] += (ch - 1.0) * dir[i] * dir[j];
                }
            }
        }
        LorentzTransform(m)
    }

    /// Embeds a spatial orthogonal matrix.
    pub fn rotation(spatial: &DMatrix<f64>) -> Self {
        let n = spatial.nrows() + 1;
        let mut m = DMatrix::identity(n, n);
        m.view_mut((1, 1), (n - 1, n - 1)).copy_from(spatial);
        LorentzTransform(m)
    }

    /// Random element: rotation · boost · rotation, with rapidity at most
    /// `max_rapidity`.
    pub fn random<R: Rng + ?Sized>(n: usize, max_rapidity: f64, rng: &mut R) -> Self {
        let r1 = random_orthogonal(n - 1, rng);
        let r2 = random_orthogonal(n - 1, rng);
        let dir: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let len = dot(&dir, &dir).sqrt().max(1e-12);
        let phi = rng.gen_range(0.0..max_rapidity);
        let rap: Vec<f64> = dir.iter().map(|d| d / len * phi).collect();
        LorentzTransform::rotation(&r1)
            .compose(&LorentzTransform::boost(&rap))
            .compose(&LorentzTransform::rotation(&r2))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LorentzTransform) -> LorentzTransform {
        LorentzTransform(&self.0 * &other.0)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.0 * DVector::from_column_slice(v)).as_slice().to_vec()
    }

    /// `max |TᵀηT − η|`.
    pub fn lorentz_defect(&self) -> f64 {
        let e = eta(self.dim());
        (self.0.transpose() * &e * &self.0 - e).amax()
    }
}

/// Random orthogonal matrix from the QR factorization of a Gaussian-ish
/// matrix (uniform entries suffice for test-matrix generation).
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let a: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        if a.determinant().abs() < 1e-3 {
            continue;
        }
        return a.qr().q();
    }
}

fn householder(n: usize, from: &[f64], axis: usize) -> DMatrix<f64> {
    // reflection mapping the unit vector `from` onto e_axis
    let mut w = from.to_vec();
    w[axis] -= 1.0;
    let ww = dot(&w, &w);
    let mut h = DMatrix::identity(n, n);
    if ww > 1e-30 {
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] -= 2.0 * w[i] * w[j] / ww;
            }
        }
    }
    h
}

/// Rotates the spatial part of `c` onto the first spatial axis.
fn align_spatial(c: &[f64]) -> LorentzTransform {
    let spatial = &c[1..];
    let len = dot(spatial, spatial).sqrt();
    if len == 0.0 {
        return LorentzTransform::identity(c.len());
    }
    let dir: Vec<f64> = spatial.iter().map(|s| s / len).collect();
    LorentzTransform::rotation(&householder(c.len() - 1, &dir, 0))
}

/// Finds `T ∈ O⁺` mapping `c` to its causal canonical form:
/// `(∓r, 0, …)` for timelike (sign of `c₀`), `(∓1, 1, 0, …)` for lightlike,
/// `(0, r, 0, …)` for spacelike. Past-directed vectors land on the negative
/// forms `(−r, 0, …)` and `(−1, 1, 0, …)`.
pub fn canonicalize_causal(c: &LorentzVector) -> Result<(LorentzTransform, LorentzVector), LinalgError> {
    canonicalize_causal_with(c, CAUSAL_TOLERANCE)
}

pub fn canonicalize_causal_with(c: &LorentzVector, tol: f64) -> Result<(LorentzTransform, LorentzVector), LinalgError> {
    let n = c.len();
    if n < 2 {
        return Err(LinalgError::TooShort(n));
    }
    let v = c.components();
    let q = c.norm_sq();
    let t = match c.causal_type(tol) {
        CausalType::Zero => return Err(LinalgError::ZeroVector),
        CausalType::Timelike => {
            let r = (-q).sqrt();
            let s = v[0].signum();
            // unit future-pointing vector u; its inverse boost sends u to e0
            let u: Vec<f64> = v.iter().map(|x| x * s / r).collect();
            let rap_len = u[0].acosh();
            let sp = dot(&u[1..], &u[1..]).sqrt();
            let rap: Vec<f64> =
                if sp > 0.0 { u[1..].iter().map(|x| -x / sp * rap_len).collect() } else { vec![0.0; n - 1] };
            LorentzTransform::boost(&rap)
        }
        CausalType::Spacelike => {
            let align = align_spatial(v);
            let w = align.apply(v);
            // w = (w0, k, 0, ...) with k > |w0|; boost along e1 removes w0
            let phi = (-w[0] / w[1]).atanh();
            let mut rap = vec![0.0; n - 1];
            rap[0] = phi;
            LorentzTransform::boost(&rap).compose(&align)
        }
        CausalType::Lightlike => {
            let spatial = dot(&v[1..], &v[1..]).sqrt();
            let defect = (v[0].abs() - spatial).abs() / (v[0].abs() + spatial);
            if defect > tol.sqrt() {
                return Err(LinalgError::AmbiguousCausal { norm: q, defect });
            }
            let align = align_spatial(v);
            let w = align.apply(v);
            // w ≈ (±k, k, 0...); boost along e1 rescales the null ray
            let k = w[1];
            let phi = if w[0] < 0.0 { k.ln() } else { -k.ln() };
            let mut rap = vec![0.0; n - 1];
            rap[0] = phi;
            LorentzTransform::boost(&rap).compose(&align)
        }
    };
    let image = LorentzVector(t.apply(v));
    Ok((t, image))
}

/// A symmetric matrix paired with a symmetric positive definite one.
#[derive(Debug, Clone)]
pub struct SymmetricPencil {
    a: DMatrix<f64>,
    g: DMatrix<f64>,
    cholesky_l: DMatrix<f64>,
}

/// An eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub value: f64,
    pub multiplicity: usize,
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

impl SymmetricPencil {
    pub fn new(a: DMatrix<f64>, g: DMatrix<f64>) -> Result<Self, LinalgError> {
        if a.shape() != g.shape() || a.nrows() != a.ncols() {
            return Err(LinalgError::DimensionMismatch(a.nrows(), g.nrows()));
        }
        let scale = 1.0 + a.amax().max(g.amax());
        for m in [&a, &g] {
            let s = asymmetry(m);
            if s > 1e-9 * scale {
                return Err(LinalgError::NotSymmetric(s));
            }
        }
        let chol = g.clone().cholesky().ok_or(LinalgError::NotPositiveDefinite)?;
        Ok(SymmetricPencil { cholesky_l: chol.l(), a, g })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// Solves `A v = λ G v`; eigenvalues ascending, eigenvectors as columns
    /// normalized so that `VᵀGV = I`.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        let n = self.a.nrows();
        let l = &self.cholesky_l;
        let linv = l.clone().try_inverse().expect("cholesky factor is invertible");
        let mut c = &linv * &self.a * linv.transpose();
        c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let linv_t = linv.transpose();
        let mut vecs = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            let v = &linv_t * eig.eigenvectors.column(i);
            vecs.set_column(col, &v);
        }
        (values, vecs)
    }
}

/// Groups ascending values: a value joins the current cluster when it is
/// within `tol (1 + max|λ|)` of the cluster's first member.
pub fn cluster_eigenvalues(values: &[f64], tol: f64) -> Vec<Eigenvalue> {
    let scale = 1.0 + values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((first, sum, count)) if (v - *first).abs() < tol * scale => {
                *sum += v;
                *count += 1;
            }
            _ => out.push((v, v, 1)),
        }
    }
    out.into_iter().map(|(_, sum, count)| Eigenvalue { value: sum / count as f64, multiplicity: count }).collect()
}

pub fn generalized_spectrum(p: &SymmetricPencil) -> Vec<Eigenvalue> {
    generalized_spectrum_with(p, CLUSTER_TOLERANCE)
}

pub fn generalized_spectrum_with(p: &SymmetricPencil, tol: f64) -> Vec<Eigenvalue> {
    cluster_eigenvalues(&p.eigen().0, tol)
}

/// Orthonormalizes `vectors` in order. In the Lorentzian case a single
/// timelike input is moved to the front, processed first, and signed so its
/// first component is positive.
pub fn gram_schmidt(vectors: &[Vec<f64>], metric: Metric) -> Result<Vec<Vec<f64>>, LinalgError> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let n = first.len();
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        return Err(LinalgError::DimensionMismatch(n, v.len()));
    }
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    if metric == Metric::Lorentz {
        let timelike: Vec<usize> =
            order.iter().copied().filter(|&i| lorentz_dot(&vectors[i], &vectors[i]) < 0.0).collect();
        if timelike.len() > 1 {
            return Err(LinalgError::SignatureViolation);
        }
        if let Some(&t) = timelike.first() {
            order.retain(|&i| i != t);
            order.insert(0, t);
        }
    }
    let mut out: Vec<(Vec<f64>, f64)> = Vec::with_capacity(vectors.len());
    for &i in &order {
        let mut v = vectors[i].clone();
        let scale = dot(&v, &v).sqrt();
        for (f, sign) in &out {
            let c = metric.inner(&v, f) * sign;
            for (vk, fk) in v.iter_mut().zip(f) {
                *vk -= c * fk;
            }
        }
        let q = metric.inner(&v, &v);
        if q.abs().sqrt() <= RANK_TOLERANCE * scale.max(f64::MIN_POSITIVE) || scale == 0.0 {
            return Err(LinalgError::RankDeficient(i));
        }
        if q < 0.0 && !out.is_empty() {
            return Err(LinalgError::SignatureViolation);
        }
        let mut norm = q.abs().sqrt();
        if q < 0.0 && v[0] < 0.0 {
            norm = -norm;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        out.push((v, q.signum()));
    }
    Ok(out.into_iter().map(|(v, _)| v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lv(c: &[f64]) -> LorentzVector {
        LorentzVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn inner_products() {
        assert_eq!(lorentz_inner(&lv(&[1., 0., 0.]), &lv(&[1., 0., 0.])).unwrap(), -1.0);
        assert_eq!(lorentz_inner(&lv(&[1., 1., 0.]), &lv(&[1., 1., 0.])).unwrap(), 0.0);
        assert_eq!(lorentz_inner(&lv(&[0., 3., 4.]), &lv(&[0., 3., 4.])).unwrap(), 25.0);
        assert!(lorentz_inner(&lv(&[0., 3.]), &lv(&[0., 3., 4.])).is_err());
        assert!(LorentzVector::new(vec![1.0]).is_err());
    }

    fn check_canonical(c: &[f64], expected: &[f64]) {
        let cv = lv(c);
        let (t, tc) = canonicalize_causal(&cv).unwrap();
        assert!(t.lorentz_defect() < 1e-10, "defect {}", t.lorentz_defect());
        assert!(t.matrix()[(0, 0)] > 0.0);
        assert!((tc.norm_sq() - cv.norm_sq()).abs() < 1e-10);
        for (a, b) in tc.components().iter().zip(expected) {
            assert!((a - b).abs() < 1e-10, "{:?} vs {:?}", tc, expected);
        }
    }

    #[test]
    fn canonical_timelike() {
        // <c,c> = -4, past-directed
        check_canonical(&[-3.0, 1.0, 2.0, 0.0], &[-2.0, 0.0, 0.0, 0.0]);
        let c = [-(5.0f64).sqrt(), 1.0, 0.0];
        check_canonical(&c, &[-2.0, 0.0, 0.0]);
    }

    #[test]
    fn canonical_fixed_points() {
        let (t, tc) = canonicalize_causal(&lv(&[-1.0, 1.0, 0.0, 0.0])).unwrap();
        assert!((t.matrix() - DMatrix::identity(4, 4)).amax() < 1e-12);
        assert_eq!(tc.components(), &[-1.0, 1.0, 0.0, 0.0]);
        check_canonical(&[0.0, 5.0, 0.0, 0.0], &[0.0, 5.0, 0.0, 0.0]);
    }

    #[test]
    fn canonical_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(2..6);
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let cv = lv(&c);
            let (t, tc) = canonicalize_causal(&cv).unwrap();
            assert!(t.lorentz_defect() < 1e-10);
            assert!((tc.norm_sq() - cv.norm_sq()).abs() < 1e-10 * (1.0 + cv.euclidean_norm_sq()));
            assert!(tc.components()[2..].iter().all(|x| x.abs() < 1e-9));
        }
        // random null vectors
        for _ in 0..20 {
            let s: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let k = dot(&s, &s).sqrt();
            let c = [vec![-k], s].concat();
            let (_, tc) = canonicalize_causal(&lv(&c)).unwrap();
            assert!((tc.components()[0] + 1.0).abs() < 1e-9);
            assert!((tc.components()[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn canonical_errors() {
        assert_eq!(canonicalize_causal(&lv(&[0.0, 0.0, 0.0])).unwrap_err(), LinalgError::ZeroVector);
        // tiny but far from null
        let err = canonicalize_causal(&lv(&[1e-6, 0.0, 0.0])).unwrap_err();
        assert!(matches!(err, LinalgError::AmbiguousCausal { .. }));
    }

    #[test]
    fn spectrum_examples() {
        let p = SymmetricPencil::new(
            DMatrix::from_diagonal_element(2, 2, 2.0),
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])),
        )
        .unwrap();
        let s = generalized_spectrum(&p);
        assert_eq!(s.len(), 2);
        assert!((s[0].value - 1.0).abs() < 1e-12 && s[0].multiplicity == 1);
        assert!((s[1].value - 2.0).abs() < 1e-12 && s[1].multiplicity == 1);

        let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.1, 0.0, 0.1, 3.0]);
        let s = generalized_spectrum(&SymmetricPencil::new(g.clone(), g.clone()).unwrap());
        assert_eq!(s.len(), 1);
        assert!((s[0].value - 1.0).abs() < 1e-12 && s[0].multiplicity == 3);

        let s = generalized_spectrum(&SymmetricPencil::new(DMatrix::zeros(3, 3), g).unwrap());
        assert_eq!(s, vec![Eigenvalue { value: 0.0, multiplicity: 3 }]);
    }

    #[test]
    fn pencil_rejects_indefinite_metric() {
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert_eq!(SymmetricPencil::new(DMatrix::zeros(2, 2), g).unwrap_err(), LinalgError::NotPositiveDefinite);
    }

    #[test]
    fn eigenvectors_are_g_orthonormal() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -2.0]);
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.4, 0.4, 1.0]);
        let p = SymmetricPencil::new(a.clone(), g.clone()).unwrap();
        let (vals, v) = p.eigen();
        assert!((v.transpose() * &g * &v - DMatrix::identity(2, 2)).amax() < 1e-12);
        for k in 0..2 {
            let lhs = &a * v.column(k);
            let rhs = &g * v.column(k) * vals[k];
            assert!((lhs - rhs).amax() < 1e-12);
        }
    }

    #[test]
    fn gram_schmidt_examples() {
        let out = gram_schmidt(&[vec![2.0, 0.0], vec![1.0, 1.0]], Metric::Euclidean).unwrap();
        assert_eq!(out, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let out = gram_schmidt(&[vec![1.0, 0.0, 0.0]], Metric::Lorentz).unwrap();
        assert_eq!(out, vec![vec![1.0, 0.0, 0.0]]);
        assert_eq!(lorentz_dot(&out[0], &out[0]), -1.0);
        assert_eq!(
            gram_schmidt(&[vec![1.0, 0.0], vec![2.0, 0.0]], Metric::Euclidean).unwrap_err(),
            LinalgError::RankDeficient(1)
        );
    }

    #[test]
    fn lorentz_gram_schmidt_moves_timelike_first() {
        let vs = vec![vec![0.2, 1.0, 0.0], vec![-2.0, 0.3, 0.1], vec![0.0, 0.4, 1.0]];
        let out = gram_schmidt(&vs, Metric::Lorentz).unwrap();
        assert!(out[0][0] > 0.0);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i != j {
                    0.0
                } else if i == 0 {
                    -1.0
                } else {
                    1.0
                };
                assert!((lorentz_dot(&out[i], &out[j]) - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn random_transforms_are_orthochronous() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let t = LorentzTransform::random(6, 1.0, &mut rng);
            assert!(t.lorentz_defect() < 1e-12);
            assert!(LorentzTransform::new(t.matrix().clone()).is_ok());
        }
        let mut flip = DMatrix::identity(3, 3);
        flip[(0, 0)] = -1.0;
        assert_eq!(LorentzTransform::new(flip).unwrap_err(), LinalgError::NotOrthochronous);
    }
}
