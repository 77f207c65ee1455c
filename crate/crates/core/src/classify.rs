//! Sampling driver and branch classification.

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::invariants::{moebius_invariants, IdentityResiduals, InvariantError, MoebiusData, MIN_ORDER};
use crate::linalg::{
    cluster_eigenvalues, lorentz_dot, CausalType, Eigenvalue, LinalgError, LorentzVector, SymmetricPencil,
    CAUSAL_TOLERANCE, CLUSTER_TOLERANCE,
};
use crate::sampling::sample_points;
use crate::spec::ImmersionSpec;

/// Environment variable capping the number of worker threads (0 = auto).
pub const THREADS_ENV: &str = "MOEBIUS_THREADS";

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("at least one sample point is required")]
    NoSamples,
    #[error("invalid {name}: {value}")]
    InvalidOption { name: &'static str, value: String },
    #[error("cannot build worker pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error("witness needs exactly two distinct eigenvalues, found {0}")]
    EigenvalueCount(usize),
    #[error("eigenvalue multiplicities differ between samples")]
    InconsistentSpectrum,
    #[error("lambda_1 + lambda_2 = {0:e} is not positive")]
    NonPositiveSum(f64),
    #[error("no normal direction carries the A-eigenspace splitting")]
    NoSplittingDirection,
}

/// Knobs of [`classify`]. `threads = None` defers to [`THREADS_ENV`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    pub order: usize,
    pub samples: usize,
    pub seed: u64,
    /// Threshold for identity residuals, `|C|`, `|∇A|`, spectrum constancy
    /// and block splitting.
    pub tol: f64,
    /// `λ₁+λ₂` counts as zero below `tol_sum (1 + |λ₁| + |λ₂|)`.
    pub tol_sum: f64,
    pub cluster_tol: f64,
    pub causal_tol: f64,
    /// Acceptance threshold for the rank-one normal direction.
    pub witness_tol: f64,
    pub threads: Option<usize>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            order: MIN_ORDER,
            samples: 16,
            seed: 42,
            tol: 1e-6,
            tol_sum: 1e-6,
            cluster_tol: CLUSTER_TOLERANCE,
            causal_tol: CAUSAL_TOLERANCE,
            witness_tol: 1e-5,
            threads: None,
        }
    }
}

impl ClassifyOptions {
    fn validate(&self) -> Result<(), ClassifyError> {
        if self.samples == 0 {
            return Err(ClassifyError::NoSamples);
        }
        let checks = [
            ("tol", self.tol),
            ("tol_sum", self.tol_sum),
            ("cluster_tol", self.cluster_tol),
            ("causal_tol", self.causal_tol),
            ("witness_tol", self.witness_tol),
        ];
        for (name, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(ClassifyError::InvalidOption { name, value: value.to_string() });
            }
        }
        Ok(())
    }

    fn worker_count(&self) -> usize {
        self.threads.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse().ok())).unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    MoebiusIsotropic,
    Branch1Sphere,
    Branch2Euclidean,
    Branch3Hyperbolic,
    Branch4LS,
    NotClassified,
}

impl Verdict {
    pub const ALL: [Verdict; 6] = [
        Verdict::MoebiusIsotropic,
        Verdict::Branch1Sphere,
        Verdict::Branch2Euclidean,
        Verdict::Branch3Hyperbolic,
        Verdict::Branch4LS,
        Verdict::NotClassified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::MoebiusIsotropic => "moebius-isotropic",
            Verdict::Branch1Sphere => "branch-1-sphere",
            Verdict::Branch2Euclidean => "branch-2-euclidean",
            Verdict::Branch3Hyperbolic => "branch-3-hyperbolic",
            Verdict::Branch4LS => "branch-4-LS",
            Verdict::NotClassified => "not-classified",
        }
    }

    pub fn is_classified(self) -> bool {
        self != Verdict::NotClassified
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Blaschke eigenvalues relative to the Möbius metric over all samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeSpectrum {
    /// Ascending eigenvalues at each sample.
    pub per_sample: Vec<Vec<f64>>,
    /// Clusters averaged over samples.
    pub eigenvalues: Vec<Eigenvalue>,
    /// Largest deviation of any sample eigenvalue from its cluster value.
    pub constancy: f64,
    /// Whether every sample has the same multiplicity pattern.
    pub consistent: bool,
}

impl BlaschkeSpectrum {
    pub fn from_samples(per_sample: Vec<Vec<f64>>, cluster_tol: f64) -> Self {
        let clusters: Vec<Vec<Eigenvalue>> = per_sample.iter().map(|v| cluster_eigenvalues(v, cluster_tol)).collect();
        let pattern = |c: &[Eigenvalue]| c.iter().map(|e| e.multiplicity).collect::<Vec<_>>();
        let first = clusters.first().map(|c| pattern(c)).unwrap_or_default();
        let consistent = clusters.iter().all(|c| pattern(c) == first);
        let eigenvalues = if consistent && !clusters.is_empty() {
            let n = clusters.len() as f64;
            (0..first.len())
                .map(|k| Eigenvalue {
                    value: clusters.iter().map(|c| c[k].value).sum::<f64>() / n,
                    multiplicity: first[k],
                })
                .collect()
        } else {
            clusters.first().cloned().unwrap_or_default()
        };
        let targets: Vec<f64> = eigenvalues.iter().flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity)).collect();
        let constancy = per_sample
            .iter()
            .flat_map(|v| {
                v.iter()
                    .zip(&targets)
                    .map(|(x, t)| (x - t).abs())
                    .chain((v.len() != targets.len()).then_some(f64::INFINITY))
            })
            .fold(0.0f64, f64::max);
        BlaschkeSpectrum { per_sample, eigenvalues, constancy, consistent }
    }

    pub fn distinct(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// The constant vector `c = N + aY + bE_{α₀}` of a two-eigenvalue input.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessData {
    pub a: f64,
    pub b: f64,
    /// `c` at every sample.
    pub c: Vec<LorentzVector>,
    /// `max |c(u) − c(u′)|` over sample pairs (componentwise).
    pub constancy: f64,
    /// Predicted `<c,c>_1 = 2a + b²`.
    pub causal_norm: f64,
    /// `<c,c>_1` of the sample mean.
    pub measured_norm: f64,
    /// `max |<c,Y>_1 − 1|`.
    pub c_y_residual: f64,
    /// Deviation of `B^{α₀}` from its two predicted diagonal values.
    pub splitting_residual: f64,
    pub causal_type: CausalType,
}

impl WitnessData {
    pub fn mean(&self) -> LorentzVector {
        let n = self.c.len().max(1) as f64;
        let dim = self.c.first().map_or(0, |c| c.len());
        LorentzVector((0..dim).map(|k| self.c.iter().map(|c| c.0[k]).sum::<f64>() / n).collect())
    }
}

/// Everything [`classify`] found about an immersion.
#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub name: String,
    pub verdict: Verdict,
    /// Identity residuals, maximized over samples.
    pub residuals: IdentityResiduals,
    pub spectrum: BlaschkeSpectrum,
    pub c_norm: f64,
    pub parallel_residual: f64,
    /// `max |B^α_{i₁j₂}|` in the A-eigenframe; only for two eigenvalues.
    pub block_splitting: Option<f64>,
    pub witness: Option<WitnessData>,
    /// Reasons for not classifying, empty otherwise.
    pub failures: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub options: ClassifyOptions,
}

impl ClassificationReport {
    pub fn samples(&self) -> usize {
        self.options.samples
    }

    /// Whether every identity residual is below the tolerance.
    pub fn identities_hold(&self) -> bool {
        self.residuals.entries.values().all(|v| *v < self.options.tol)
    }
}

/// Runs the invariant pipeline at every sample point, on a worker pool.
/// Results keep the order of `points`; the first failing point wins.
pub fn analyze_points(
    spec: &ImmersionSpec,
    points: &[Vec<f64>],
    order: usize,
    threads: usize,
) -> Result<Vec<MoebiusData>, ClassifyError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ClassifyError::ThreadPool(e.to_string()))?;
    let results: Vec<Result<MoebiusData, InvariantError>> =
        pool.install(|| points.par_iter().map(|u| moebius_invariants(spec, u, order)).collect());
    results.into_iter().map(|r| r.map_err(ClassifyError::from)).collect()
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the frame
/// components of `A`.
fn frame_eigen(d: &MoebiusData) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (&d.a + d.a.transpose()) * 0.5;
    SymmetricPencil::new(sym, DMatrix::identity(d.m, d.m)).expect("identity is positive definite").eigen()
}

fn spectrum_of(d: &MoebiusData) -> Result<Vec<f64>, LinalgError> {
    let a = (&d.a_coord + d.a_coord.transpose()) * 0.5;
    Ok(SymmetricPencil::new(a, d.metric.g.clone())?.eigen().0)
}

/// `max |B^α_{i₁j₂}|` with the first `m1` eigenvectors as block one.
pub fn block_splitting(data: &[MoebiusData], m1: usize) -> f64 {
    let mut worst = 0.0f64;
    for d in data {
        let (_, q) = frame_eigen(d);
        for b in &d.b {
            let r = q.transpose() * b * &q;
            for i in 0..m1 {
                for j in m1..d.m {
                    worst = worst.max(r[(i, j)].abs());
                }
            }
        }
    }
    worst
}

/// Builds the witness vector from per-sample data and the clustered spectrum.
pub fn witness_vector(
    data: &[MoebiusData],
    spectrum: &BlaschkeSpectrum,
    causal_tol: f64,
) -> Result<WitnessData, WitnessError> {
    if spectrum.distinct() != 2 {
        return Err(WitnessError::EigenvalueCount(spectrum.distinct()));
    }
    if !spectrum.consistent {
        return Err(WitnessError::InconsistentSpectrum);
    }
    let (l1, m1) = (spectrum.eigenvalues[0].value, spectrum.eigenvalues[0].multiplicity);
    let (l2, m2) = (spectrum.eigenvalues[1].value, spectrum.eigenvalues[1].multiplicity);
    let sum = l1 + l2;
    if sum <= 0.0 {
        return Err(WitnessError::NonPositiveSum(sum));
    }
    let (m1f, m2f) = (m1 as f64, m2 as f64);
    let mf = m1f + m2f;
    let a = -(m1f * l1 + m2f * l2) / mf;
    let b = (l1 - l2) / mf * (m1f * m2f / sum).sqrt();
    let pred1 = (m2f / m1f * sum).sqrt();
    let pred2 = -(m1f / m2f * sum).sqrt();

    let mut cs = Vec::with_capacity(data.len());
    let mut splitting_residual = 0.0f64;
    let mut c_y_residual = 0.0f64;
    for d in data {
        let (_, q) = frame_eigen(d);
        let blocks: Vec<DMatrix<f64>> = d.b.iter().map(|b| q.transpose() * b * &q).collect();
        let w: Vec<f64> =
            blocks.iter().map(|r| (0..d.m).map(|i| if i < m1 { r[(i, i)] } else { -r[(i, i)] }).sum()).collect();
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn < 1e-12 {
            return Err(WitnessError::NoSplittingDirection);
        }
        let mut coef: Vec<f64> = w.iter().map(|x| x / wn).collect();
        let mut b0 = DMatrix::zeros(d.m, d.m);
        for (r, k) in blocks.iter().zip(&coef) {
            b0 += r * *k;
        }
        let first: f64 = (0..m1).map(|i| b0[(i, i)]).sum::<f64>() / m1f;
        if first < 0.0 {
            coef.iter_mut().for_each(|k| *k = -*k);
            b0 = -b0;
        }
        for i in 0..d.m {
            for j in 0..d.m {
                let expect = match (i == j, i < m1) {
                    (false, _) => 0.0,
                    (true, true) => pred1,
                    (true, false) => pred2,
                };
                splitting_residual = splitting_residual.max((b0[(i, j)] - expect).abs());
            }
        }
        let dim = d.y.len();
        let c: Vec<f64> = (0..dim)
            .map(|k| d.n[k] + a * d.y[k] + b * d.e_normal.iter().zip(&coef).map(|(e, s)| e[k] * s).sum::<f64>())
            .collect();
        c_y_residual = c_y_residual.max((lorentz_dot(&c, &d.y) - 1.0).abs());
        cs.push(LorentzVector(c));
    }

    let mut constancy = 0.0f64;
    for (i, x) in cs.iter().enumerate() {
        for y in &cs[i + 1..] {
            for (p, q) in x.0.iter().zip(&y.0) {
                constancy = constancy.max((p - q).abs());
            }
        }
    }
    let mut out = WitnessData {
        a,
        b,
        c: cs,
        constancy,
        causal_norm: 2.0 * a + b * b,
        measured_norm: 0.0,
        c_y_residual,
        splitting_residual,
        causal_type: CausalType::Zero,
    };
    let mean = out.mean();
    out.measured_norm = mean.norm_sq();
    out.causal_type = mean.causal_type(causal_tol);
    Ok(out)
}

/// `x < tol`, false for NaN.
fn below(x: f64, tol: f64) -> bool {
    x < tol
}

/// Samples the immersion, evaluates the identity suite, and decides the branch.
pub fn classify(spec: &ImmersionSpec, options: &ClassifyOptions) -> Result<ClassificationReport, ClassifyError> {
    options.validate()?;
    let points = sample_points(&spec.domain, options.samples, options.seed);
    let data = analyze_points(spec, &points, options.order, options.worker_count())?;
    Ok(classify_data(&spec.name, points, &data, options))
}

/// Classification from already computed per-sample data.
pub fn classify_data(
    name: &str,
    points: Vec<Vec<f64>>,
    data: &[MoebiusData],
    options: &ClassifyOptions,
) -> ClassificationReport {
    let tol = options.tol;
    let mut failures = Vec::new();

    let mut residuals = IdentityResiduals::default();
    let mut c_norm = 0.0f64;
    let mut parallel_residual = 0.0f64;
    let mut per_sample = Vec::with_capacity(data.len());
    for d in data {
        residuals.merge_max(&IdentityResiduals::evaluate(d));
        c_norm = c_norm.max(d.c_norm());
        parallel_residual = parallel_residual.max(d.grad_a_norm());
        match spectrum_of(d) {
            Ok(v) => per_sample.push(v),
            Err(e) => {
                failures.push(format!("spectrum: {e}"));
                per_sample.push(vec![f64::NAN; d.m]);
            }
        }
    }
    for (k, v) in &residuals.entries {
        if !below(*v, tol) {
            failures.push(format!("identity {k} residual {v:.5e}"));
        }
    }
    if !below(c_norm, tol) {
        failures.push(format!("c_norm {c_norm:.5e} exceeds {tol:e}"));
    }
    if !below(parallel_residual, tol) {
        failures.push(format!("parallel_residual {parallel_residual:.5e} exceeds {tol:e}"));
    }

    let spectrum = BlaschkeSpectrum::from_samples(per_sample, options.cluster_tol);
    if !spectrum.consistent {
        failures.push("eigenvalue multiplicities vary between samples".to_string());
    } else if !below(spectrum.constancy, tol) {
        failures.push(format!("spectrum constancy {:.5e} exceeds {tol:e}", spectrum.constancy));
    }

    let mut block = None;
    let mut witness = None;
    let mut verdict = Verdict::NotClassified;
    match spectrum.distinct() {
        1 => verdict = Verdict::MoebiusIsotropic,
        2 if spectrum.consistent => {
            let (l1, l2) = (spectrum.eigenvalues[0].value, spectrum.eigenvalues[1].value);
            let split = block_splitting(data, spectrum.eigenvalues[0].multiplicity);
            block = Some(split);
            if !below(split, tol) {
                failures.push(format!("block splitting {split:.5e} exceeds {tol:e}"));
            }
            let sum = l1 + l2;
            if sum.abs() < options.tol_sum * (1.0 + l1.abs() + l2.abs()) {
                verdict = Verdict::Branch4LS;
            } else if sum < 0.0 {
                failures.push(format!("lambda_1 + lambda_2 = {sum:.5e} is negative"));
            } else {
                match witness_vector(data, &spectrum, options.causal_tol) {
                    Ok(w) => {
                        let scale = 1.0 + w.c.iter().map(|c| c.euclidean_norm_sq()).fold(0.0f64, f64::max);
                        if !below(w.splitting_residual, options.witness_tol) {
                            failures.push(format!(
                                "rank-one normal direction residual {:.5e} exceeds {:e}",
                                w.splitting_residual, options.witness_tol
                            ));
                        }
                        if !below(w.constancy, tol * scale.sqrt()) {
                            failures.push(format!("witness constancy {:.5e}", w.constancy));
                        }
                        if !below(w.c_y_residual, tol) {
                            failures.push(format!("<c,Y> residual {:.5e}", w.c_y_residual));
                        }
                        if !below((w.measured_norm - w.causal_norm).abs(), tol * scale) {
                            failures.push(format!(
                                "<c,c> = {:.5e} differs from 2a+b^2 = {:.5e}",
                                w.measured_norm, w.causal_norm
                            ));
                        }
                        verdict = match w.causal_type {
                            CausalType::Timelike => Verdict::Branch1Sphere,
                            CausalType::Lightlike => Verdict::Branch2Euclidean,
                            CausalType::Spacelike => Verdict::Branch3Hyperbolic,
                            CausalType::Zero => Verdict::NotClassified,
                        };
                        witness = Some(w);
                    }
                    Err(e) => failures.push(format!("witness: {e}")),
                }
            }
        }
        n => failures.push(format!("{n} distinct Blaschke eigenvalues")),
    }
    if !failures.is_empty() {
        verdict = Verdict::NotClassified;
    }
    ClassificationReport {
        name: name.to_string(),
        verdict,
        residuals,
        spectrum,
        c_norm,
        parallel_residual,
        block_splitting: block,
        witness,
        failures,
        points,
        options: options.clone(),
    }
}
