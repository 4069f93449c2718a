//! Embedding certificates and the lambda-feasibility search.
//!
//! For a norm N on R^n and an admissible exponent q, write H = N^q on the
//! sphere and invert the kernel to get the density b_H. Two layered tests
//! decide embeddability of the space into L_q:
//!
//! 1. the sufficient bound K(q) ||H - 1|| + L(q) ||Delta^r H|| < c(q),
//!    which forces |b_H - c(q)| < c(q), hence b_H > 0;
//! 2. a direct positivity scan of the computed density, with margins for
//!    truncation and discretization error.
//!
//! A positive density is exactly a Levy representation with a non-negative
//! measure, i.e. an isometric embedding into L_q. The search routine then
//! shrinks a perturbation N = 1 + lambda f until every q in a sample set Q
//! certifies simultaneously, producing one non-Hilbertian space embeddable
//! into L_q for all q in Q.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funk_hecke::{admissible_q, bound_constants, c_constant, Q_GUARD};
use crate::harmonics::{expand, HarmonicCoefficients};
use crate::inversion::{invert, DensityResult};
use crate::sampling::{derive_seed, random_unit_vector, random_vector, seeded_rng};
use crate::scalar::{real, Real};
use crate::sphere::{build_grid, build_zonal_grid, surface_area, SphereGrid};

// ---------------------------------------------------------------------------
// Norm specifications
// ---------------------------------------------------------------------------

/// Symbolic description of the norm whose sphere restriction is N(x).
#[derive(Debug, Clone)]
pub struct NormSpec<T> {
    n: usize,
    kind: NormKind<T>,
}

#[derive(Debug, Clone)]
pub enum NormKind<T> {
    /// N = 1 (the euclidean norm on the sphere).
    Euclidean,
    /// N = 1 + lambda f with an even band-limited f.
    Perturbation {
        f: HarmonicCoefficients<T>,
        lambda: T,
    },
    /// N = (1 + lambda sum x_i^{2k})^{1/4}.
    LqPower { k: u32, lambda: T },
    /// N = (sum |x_i|^p)^{1/p}.
    LpBall { p: T },
}

impl<T: Real> NormSpec<T> {
    pub fn euclidean(n: usize) -> Self {
        NormSpec {
            n,
            kind: NormKind::Euclidean,
        }
    }

    /// Perturbation norm 1 + lambda f. `f` must be even; its dimension sets n.
    pub fn perturbation(f: HarmonicCoefficients<T>, lambda: T) -> Result<Self> {
        if !f.even() {
            return Err(Error::NotEven {
                magnitude: f.odd_mass().to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(NormSpec {
            n: f.n(),
            kind: NormKind::Perturbation { f, lambda },
        })
    }

    pub fn lq_power(n: usize, k: u32, lambda: T) -> Result<Self> {
        if k < 1 {
            return Err(Error::Domain("lq_power requires k >= 1".into()));
        }
        Ok(NormSpec {
            n,
            kind: NormKind::LqPower { k, lambda },
        })
    }

    pub fn lp_ball(n: usize, p: T) -> Result<Self> {
        if !(p > T::zero()) {
            return Err(Error::Domain(format!("lp_ball requires p > 0, got {p}")));
        }
        Ok(NormSpec {
            n,
            kind: NormKind::LpBall { p },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &NormKind<T> {
        &self.kind
    }

    /// A short self-describing label for reports.
    pub fn label(&self) -> String {
        match &self.kind {
            NormKind::Euclidean => "euclidean".into(),
            NormKind::Perturbation { f, lambda } => {
                format!(
                    "perturbation(max_degree={}, lambda={lambda})",
                    f.max_degree()
                )
            }
            NormKind::LqPower { k, lambda } => format!("lq-power(k={k}, lambda={lambda})"),
            NormKind::LpBall { p } => format!("lp-ball(p={p})"),
        }
    }

    /// N(x) for a unit vector x.
    pub fn eval_sphere(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.n);
        match &self.kind {
            NormKind::Euclidean => T::one(),
            NormKind::Perturbation { f, lambda } => T::one() + *lambda * f.evaluate(x),
            NormKind::LqPower { k, lambda } => {
                let s = x
                    .iter()
                    .fold(T::zero(), |acc, &c| acc + c.powi(2 * *k as i32));
                (T::one() + *lambda * s).powf(real(0.25))
            }
            NormKind::LpBall { p } => x
                .iter()
                .fold(T::zero(), |acc, &c| acc + c.abs().powf(*p))
                .powf(p.recip()),
        }
    }

    /// The 1-homogeneous extension of the sphere restriction to all of R^n.
    pub fn eval_homogeneous(&self, x: &[T]) -> T {
        let r = x.iter().fold(T::zero(), |acc, &c| acc + c * c).sqrt();
        if r.is_zero() {
            return T::zero();
        }
        let unit: Vec<T> = x.iter().map(|&c| c / r).collect();
        r * self.eval_sphere(&unit)
    }
}

// ---------------------------------------------------------------------------
// Q sets
// ---------------------------------------------------------------------------

/// A finite ascending sample of a compact subset of (0, inf) avoiding the
/// even integers.
#[derive(Debug, Clone)]
pub struct QSet<T> {
    samples: Vec<T>,
    guard: T,
}

impl<T: Real> QSet<T> {
    /// Validate and sort the samples; every entry must be positive and
    /// outside the guard band around the even integers.
    pub fn new(mut samples: Vec<T>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("Q must be nonempty".into()));
        }
        for &q in &samples {
            admissible_q(q)?;
        }
        samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in Q"));
        let mut guard = T::infinity();
        for &q in &samples {
            let qf = q.to_f64().unwrap();
            let nearest = 2.0 * (qf / 2.0).round();
            let dist = if nearest >= 2.0 {
                (qf - nearest).abs()
            } else {
                (qf - 2.0).abs()
            };
            guard = guard.min(real(dist));
        }
        Ok(QSet { samples, guard })
    }

    /// Evenly spaced samples over [lo, hi].
    pub fn linspace(lo: T, hi: T, count: usize) -> Result<Self> {
        if count == 0 || !(hi >= lo) {
            return Err(Error::Domain("bad Q range".into()));
        }
        let mut samples = Vec::with_capacity(count);
        if count == 1 {
            samples.push(lo);
        } else {
            let step = (hi - lo) / real(count - 1);
            for i in 0..count {
                samples.push(lo + step * real(i));
            }
        }
        QSet::new(samples)
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    /// Minimum distance of any sample to the nearest even integer.
    pub fn guard(&self) -> T {
        self.guard
    }

    pub fn max_q(&self) -> T {
        *self.samples.last().unwrap()
    }
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The closed-form sufficient bound holds: sufficient_bound_lhs < c(q).
    CertifiedSufficientBound,
    /// The bound failed but the computed density is positive beyond margins.
    CertifiedPositiveDensity,
    /// The density dips negative beyond margins: no embedding.
    RefutedNegativeDensity,
    /// Within the error margins; no conclusion.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::CertifiedSufficientBound => "certified_lemma2",
            Verdict::CertifiedPositiveDensity => "certified_positive_density",
            Verdict::RefutedNegativeDensity => "refuted_negative_density",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(
            self,
            Verdict::CertifiedSufficientBound | Verdict::CertifiedPositiveDensity
        )
    }
}

/// Outcome of the layered embedding test for one (norm, q) pair.
#[derive(Debug, Clone)]
pub struct EmbeddingCertificate<T> {
    pub q: T,
    pub r: u32,
    pub max_degree: usize,
    /// K(q) ||H - 1|| + L(q) ||Delta^r H||.
    pub sufficient_bound_lhs: T,
    pub c_q: T,
    /// Minimum of the computed density over the verification grid.
    pub min_density: T,
    /// Tail bound carried by the density series (plus the band-limit part).
    pub truncation_bound: T,
    /// 10x the worst pointwise band-limit residual of the expansion.
    pub quad_margin: T,
    /// Max residual of the representation identity at random points.
    pub reconstruction_error: T,
    pub verdict: Verdict,
    pub seed: u64,
}

/// Knobs for the certification pipeline.
#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    /// Random points for the reconstruction residual.
    pub sample_points: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            sample_points: 20,
            seed: 42,
        }
    }
}

/// Run the layered embedding test for `norm` at exponent q.
///
/// Verdict precedence: the closed-form bound first, then direct positivity,
/// then refutation, otherwise inconclusive. Positivity and refutation demand
/// clearance beyond `truncation_bound + quad_margin`.
pub fn certify_embedding<T: Real>(
    norm: &NormSpec<T>,
    q: T,
    r: u32,
    grid: &SphereGrid<T>,
    max_degree: usize,
    opts: &CertifyOptions,
) -> Result<EmbeddingCertificate<T>> {
    admissible_q(q)?;
    let n = norm.n();
    if grid.n() != n {
        return Err(Error::Domain(format!(
            "grid dimension {} does not match norm dimension {n}",
            grid.n()
        )));
    }
    crate::funk_hecke::check_hypothesis(n, q, r)?;

    let h_fn = |x: &[T]| norm.eval_sphere(x).powf(q);
    let h = expand(h_fn, grid, max_degree)?;
    if !h.even() {
        return Err(Error::NotEven {
            magnitude: h.odd_mass().to_f64().unwrap_or(f64::NAN),
        });
    }

    // Sufficient-condition left-hand side with the guaranteed (partial +
    // tail) L constant.
    let omega = surface_area::<T>(n)?;
    let mut h_minus_1 = h.clone();
    h_minus_1.set(0, 1, h.get(0, 1) - omega.sqrt())?;
    let bc = bound_constants(n, q, r, 400)?;
    let sufficient_bound_lhs =
        bc.k * h_minus_1.l2_norm() + bc.l_total() * h.laplace_beltrami_apply(r).l2_norm();
    let c_q = c_constant(n, q)?;

    // Band-limit quality of the expansion, on the grid.
    let mut band_max = T::zero();
    let mut band_l2 = T::zero();
    let h_on_grid = h.evaluate_on_grid(grid);
    for ((x, w), hv) in grid.iter().zip(h_on_grid) {
        let diff = h_fn(x) - hv;
        band_max = band_max.max(diff.abs());
        band_l2 = band_l2 + w * diff * diff;
    }
    let band_l2 = band_l2.sqrt();

    let density = invert(&h, q, r, max_degree + max_degree % 2)?;
    // Fold the band-limit residual into the truncation budget through the
    // K-part of the sup bound applied to the residual.
    let truncation_bound = density.truncation_bound + bc.k * band_l2;
    let quad_margin = real::<T, _>(10) * band_max;

    let min_density = density
        .coefficients
        .evaluate_on_grid(grid)
        .into_iter()
        .fold(T::infinity(), T::min);

    let reconstruction_error = representation_residual(
        norm,
        q,
        &density.coefficients,
        grid.exact_degree(),
        opts.sample_points,
        opts.seed,
    )?;

    let margin = truncation_bound + quad_margin;
    let verdict = if sufficient_bound_lhs < c_q {
        Verdict::CertifiedSufficientBound
    } else if min_density > margin {
        Verdict::CertifiedPositiveDensity
    } else if min_density < -margin {
        Verdict::RefutedNegativeDensity
    } else {
        Verdict::Inconclusive
    };

    Ok(EmbeddingCertificate {
        q,
        r,
        max_degree,
        sufficient_bound_lhs,
        c_q,
        min_density,
        truncation_bound,
        quad_margin,
        reconstruction_error,
        verdict,
        seed: opts.seed,
    })
}

/// Max over random unit points of |N(x)^q - int |<x, xi>|^q b(xi) d xi|,
/// with the integral taken on a kink-adapted grid.
fn representation_residual<T: Real>(
    norm: &NormSpec<T>,
    q: T,
    b: &HarmonicCoefficients<T>,
    _resolution: usize,
    points: usize,
    seed: u64,
) -> Result<T> {
    let n = norm.n();
    let mut rng = seeded_rng(seed);
    // The kink is graded away, so the quadrature only needs to resolve the
    // band-limited factor exactly; higher resolution adds nothing.
    let res = (2 * b.max_degree() + 2).max(16);
    let mut worst = T::zero();
    for _ in 0..points {
        let x = random_unit_vector::<T>(&mut rng, n);
        let zonal = build_zonal_grid(n, res, &x)?;
        let density_values = b.evaluate_on_grid(&zonal);
        let mut integral = T::zero();
        for ((xi, w), bv) in zonal.iter().zip(density_values) {
            let dot = x
                .iter()
                .zip(xi)
                .fold(T::zero(), |acc, (&a, &b_)| acc + a * b_);
            integral = integral + w * dot.abs().powf(q) * bv;
        }
        let truth = norm.eval_sphere(&x).powf(q);
        worst = worst.max((integral - truth).abs());
    }
    Ok(worst)
}

/// Max residual of the representation identity for a previously computed
/// density, at `points` random unit vectors.
pub fn levy_verify<T: Real>(
    norm: &NormSpec<T>,
    density: &DensityResult<T>,
    grid: &SphereGrid<T>,
    points: usize,
    seed: u64,
) -> Result<T> {
    representation_residual(
        norm,
        density.q,
        &density.coefficients,
        grid.exact_degree(),
        points,
        seed,
    )
}

// ---------------------------------------------------------------------------
// Convexity
// ---------------------------------------------------------------------------

/// Result of the sampled triangle-inequality test.
#[derive(Debug, Clone, Copy)]
pub struct ConvexityReport<T> {
    pub pass: bool,
    /// Worst observed violation of N~(u+v) <= N~(u) + N~(v); negative slack
    /// means no violation.
    pub worst_margin: T,
    /// Minimum of N over the sampled sphere points.
    pub min_norm: T,
    pub trials: usize,
    pub seed: u64,
}

/// Monte-Carlo check that the 1-homogeneous extension of N satisfies the
/// triangle inequality, plus positivity of N on the sphere.
pub fn convexity_check<T: Real>(
    norm: &NormSpec<T>,
    trials: usize,
    seed: u64,
) -> ConvexityReport<T> {
    let n = norm.n();
    let mut rng = seeded_rng(seed);
    let slack = real::<T, _>(1e-12);
    let mut worst = T::neg_infinity();
    let mut min_norm = T::infinity();
    for _ in 0..trials {
        let u = random_vector::<T>(&mut rng, n);
        let v = random_vector::<T>(&mut rng, n);
        let sum: Vec<T> = u.iter().zip(&v).map(|(&a, &b)| a + b).collect();
        let margin =
            norm.eval_homogeneous(&sum) - norm.eval_homogeneous(&u) - norm.eval_homogeneous(&v);
        worst = worst.max(margin);
        let r = u.iter().fold(T::zero(), |acc, &c| acc + c * c).sqrt();
        if r > real(1e-6) {
            let unit: Vec<T> = u.iter().map(|&c| c / r).collect();
            min_norm = min_norm.min(norm.eval_sphere(&unit));
        }
    }
    ConvexityReport {
        pass: worst <= slack && min_norm > T::zero(),
        worst_margin: worst,
        min_norm,
        trials,
        seed,
    }
}

// ---------------------------------------------------------------------------
// Even-integer example
// ---------------------------------------------------------------------------

/// Residual of the atomic-measure identity at q = 2k:
///
/// ```text
/// 1 + lambda sum_i x_i^{2k}
///   = c(2k) int |<x, xi>|^{2k} d xi + lambda sum_i |x_i|^{2k}
/// ```
///
/// The integrand is a polynomial of degree 2k, so the grid quadrature is
/// exact and the residual sits at roundoff level.
pub fn even_integer_example<T: Real>(
    n: usize,
    k: u32,
    lambda: T,
    points: usize,
    seed: u64,
) -> Result<T> {
    if k < 1 {
        return Err(Error::Domain("even-integer example requires k >= 1".into()));
    }
    if lambda < T::zero() {
        return Err(Error::Domain("lambda must be >= 0".into()));
    }
    let two_k = 2 * k as usize;
    let grid = build_grid::<T>(n, (two_k + 2).max(8))?;
    let c2k = c_constant(n, real::<T, _>(two_k as f64))?;
    let mut rng = seeded_rng(seed);
    let mut worst = T::zero();
    for _ in 0..points {
        let x = random_unit_vector::<T>(&mut rng, n);
        let quad = grid.quadrature(|xi| {
            let dot = x
                .iter()
                .zip(xi)
                .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
            dot.powi(two_k as i32)
        });
        let atoms = x
            .iter()
            .fold(T::zero(), |acc, &c| acc + c.abs().powi(two_k as i32));
        let lhs = T::one() + lambda * atoms;
        let rhs = c2k * quad + lambda * atoms;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Hilbertian check
// ---------------------------------------------------------------------------

/// Weighted least-squares fit of sampled values y_i ~ x_i^T A x_i over the
/// grid nodes; returns the relative residual. Values near zero certify that
/// the squared norm is a quadratic form (a Hilbert space).
pub fn quadratic_fit_residual<T: Real>(grid: &SphereGrid<T>, values: &[T]) -> Result<T> {
    let n = grid.n();
    if values.len() != grid.len() {
        return Err(Error::Domain(format!(
            "expected {} sampled values, got {}",
            grid.len(),
            values.len()
        )));
    }
    let dim = n * (n + 1) / 2;
    let mut gram = vec![T::zero(); dim * dim];
    let mut rhs = vec![T::zero(); dim];
    let mut feats = vec![T::zero(); dim];
    let mut y_sq = T::zero();
    for (i, (x, w)) in grid.iter().enumerate() {
        let mut k = 0;
        for a in 0..n {
            for b in a..n {
                feats[k] = if a == b {
                    x[a] * x[a]
                } else {
                    real::<T, _>(2) * x[a] * x[b]
                };
                k += 1;
            }
        }
        for a in 0..dim {
            for b in a..dim {
                gram[a * dim + b] = gram[a * dim + b] + w * feats[a] * feats[b];
            }
            rhs[a] = rhs[a] + w * feats[a] * values[i];
        }
        y_sq = y_sq + w * values[i] * values[i];
    }
    for a in 0..dim {
        for b in 0..a {
            gram[a * dim + b] = gram[b * dim + a];
        }
    }
    let coef = solve_dense(&mut gram, &mut rhs, dim)?;

    let mut resid = T::zero();
    for (i, (x, w)) in grid.iter().enumerate() {
        let mut k = 0;
        let mut fit = T::zero();
        for a in 0..n {
            for b in a..n {
                let f = if a == b {
                    x[a] * x[a]
                } else {
                    real::<T, _>(2) * x[a] * x[b]
                };
                fit = fit + coef[k] * f;
                k += 1;
            }
        }
        let d = values[i] - fit;
        resid = resid + w * d * d;
    }
    Ok((resid / y_sq.max(real(1e-300))).sqrt())
}

/// Least-squares residual of fitting N^2 by a quadratic form on the grid.
/// Residual > 1e-6 certifies non-Hilbertian; <= 1e-10 flags Hilbertian.
pub fn hilbertian_check<T: Real>(norm: &NormSpec<T>, grid: &SphereGrid<T>) -> Result<T> {
    let values: Vec<T> = grid
        .iter()
        .map(|(x, _)| {
            let v = norm.eval_sphere(x);
            v * v
        })
        .collect();
    quadratic_fit_residual(grid, &values)
}

/// Gaussian elimination with partial pivoting on a dense system; the
/// problems here are tiny (n(n+1)/2 unknowns).
fn solve_dense<T: Real>(a: &mut [T], b: &mut [T], dim: usize) -> Result<Vec<T>> {
    for col in 0..dim {
        let mut pivot = col;
        for row in (col + 1)..dim {
            if a[row * dim + col].abs() > a[pivot * dim + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * dim + col].abs() < real(1e-300) {
            return Err(Error::Domain("singular normal equations".into()));
        }
        if pivot != col {
            for k in 0..dim {
                a.swap(col * dim + k, pivot * dim + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * dim + col];
        for row in (col + 1)..dim {
            let factor = a[row * dim + col] / diag;
            if factor.is_zero() {
                continue;
            }
            for k in col..dim {
                a[row * dim + k] = a[row * dim + k] - factor * a[col * dim + k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); dim];
    for col in (0..dim).rev() {
        let mut acc = b[col];
        for k in (col + 1)..dim {
            acc = acc - a[col * dim + k] * x[k];
        }
        x[col] = acc / a[col * dim + col];
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Lambda search
// ---------------------------------------------------------------------------

/// Options for [`search_lambda`].
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Initial (largest) lambda tried.
    pub lambda_hi: f64,
    /// Give up below this lambda.
    pub lambda_min: f64,
    /// Relative bisection tolerance on lambda_star.
    pub rel_tol: f64,
    /// Convexity trials during the search and for the final report.
    pub search_trials: usize,
    pub final_trials: usize,
    /// Reconstruction sample points during search / final.
    pub search_points: usize,
    pub final_points: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            lambda_hi: 0.5,
            lambda_min: 1e-8,
            rel_tol: 1e-4,
            search_trials: 2_000,
            final_trials: 100_000,
            search_points: 8,
            final_points: 20,
            seed: 42,
        }
    }
}

/// Certificates for every q in the set, computed concurrently (one pure
/// pipeline per exponent, each with a seed derived from its index so the
/// output is independent of scheduling).
pub fn certify_many<T: Real>(
    norm: &NormSpec<T>,
    q_set: &QSet<T>,
    r: u32,
    grid: &SphereGrid<T>,
    max_degree: usize,
    points: usize,
    seed: u64,
) -> Result<Vec<EmbeddingCertificate<T>>> {
    q_set
        .samples()
        .par_iter()
        .enumerate()
        .map(|(i, &q)| {
            let co = CertifyOptions {
                sample_points: points,
                seed: derive_seed(seed, i as u64),
            };
            certify_embedding(norm, q, r, grid, max_degree, &co)
        })
        .collect()
}

/// Outcome of the feasibility search over the perturbation size.
#[derive(Debug, Clone)]
pub struct SearchOutcome<T> {
    /// Largest feasible lambda found (within the bisection tolerance).
    pub lambda_star: T,
    /// Certificates at lambda_star, one per q in ascending order.
    pub certificates: Vec<EmbeddingCertificate<T>>,
    pub convexity: ConvexityReport<T>,
    /// Quadratic-fit residual of N^2 at lambda_star.
    pub hilbertian_residual: T,
    /// True when f = 0 was supplied (the construction degenerates to the
    /// euclidean norm and the space is a Hilbert space).
    pub hilbertian_input: bool,
}

/// Find the largest lambda such that N = 1 + lambda f is convex and
/// certified for every q in Q, by halving to a feasible point and bisecting
/// the feasibility boundary.
pub fn search_lambda<T: Real>(
    f: &HarmonicCoefficients<T>,
    q_set: &QSet<T>,
    r: u32,
    grid: &SphereGrid<T>,
    max_degree: usize,
    opts: &SearchOptions,
) -> Result<SearchOutcome<T>> {
    let n = f.n();
    for &q in q_set.samples() {
        crate::funk_hecke::check_hypothesis(n, q, r)?;
    }

    let degenerate = f.l2_norm().is_zero();
    let certs_at = |lambda: f64,
                    points: usize,
                    trials: usize|
     -> Result<(Vec<EmbeddingCertificate<T>>, ConvexityReport<T>)> {
        let norm = if degenerate {
            NormSpec::euclidean(n)
        } else {
            NormSpec::perturbation(f.clone(), real(lambda))?
        };
        let conv = convexity_check(&norm, trials, opts.seed);
        let certs = certify_many(&norm, q_set, r, grid, max_degree, points, opts.seed)?;
        Ok((certs, conv))
    };
    let feasible = |lambda: f64| -> Result<bool> {
        let (certs, conv) = certs_at(lambda, opts.search_points, opts.search_trials)?;
        Ok(conv.pass && certs.iter().all(|c| c.verdict.is_certified()))
    };

    let lambda_star = if degenerate {
        opts.lambda_hi
    } else {
        // halve until feasible
        let mut lo = opts.lambda_hi;
        while !feasible(lo)? {
            lo /= 2.0;
            if lo < opts.lambda_min {
                return Err(Error::Infeasible {
                    lambda_min: opts.lambda_min,
                });
            }
        }
        if lo == opts.lambda_hi {
            lo
        } else {
            // the boundary sits in (lo, 2 lo]: bisect it
            let mut hi = 2.0 * lo;
            while (hi - lo) > opts.rel_tol * lo {
                let mid = 0.5 * (lo + hi);
                if feasible(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    };

    let (certificates, convexity) = certs_at(lambda_star, opts.final_points, opts.final_trials)?;
    let norm = if degenerate {
        NormSpec::euclidean(n)
    } else {
        NormSpec::perturbation(f.clone(), real(lambda_star))?
    };
    let hilbertian_residual = hilbertian_check(&norm, grid)?;

    Ok(SearchOutcome {
        lambda_star: real(lambda_star),
        certificates,
        convexity,
        hilbertian_residual,
        hilbertian_input: degenerate,
    })
}

/// One refinement pass over Q: bisect adjacent samples whose certificate
/// margins (c(q) - sufficient_bound_lhs) differ by more than 10% of the larger, until
/// stable or the sample budget is exhausted.
#[allow(clippy::too_many_arguments)]
pub fn refine_qset<T: Real>(
    f: &HarmonicCoefficients<T>,
    lambda: T,
    q_set: &QSet<T>,
    r: u32,
    grid: &SphereGrid<T>,
    max_degree: usize,
    opts: &CertifyOptions,
    max_samples: usize,
) -> Result<QSet<T>> {
    let norm = NormSpec::perturbation(f.clone(), lambda)?;
    let margin_at = |q: T| -> Result<T> {
        let cert = certify_embedding(&norm, q, r, grid, max_degree, opts)?;
        Ok(cert.c_q - cert.sufficient_bound_lhs)
    };
    let mut samples: Vec<T> = q_set.samples().to_vec();
    for _pass in 0..4 {
        let margins = samples
            .iter()
            .map(|&q| margin_at(q))
            .collect::<Result<Vec<_>>>()?;
        let mut inserts = Vec::new();
        for i in 0..samples.len() - 1 {
            let a = margins[i];
            let b = margins[i + 1];
            let scale = a.abs().max(b.abs());
            if (a - b).abs() > real::<T, _>(0.1) * scale {
                let mid = (samples[i] + samples[i + 1]) * real(0.5);
                if admissible_q(mid).is_ok() {
                    inserts.push(mid);
                }
            }
        }
        if inserts.is_empty() || samples.len() + inserts.len() > max_samples {
            break;
        }
        samples.extend(inserts);
        samples.sort_by(|x, y| x.partial_cmp(y).unwrap());
    }
    QSet::new(samples)
}

/// Re-export of the guard band width for front ends validating Q inputs.
pub const QSET_GUARD: f64 = Q_GUARD;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::basis_eval;

    const PI: f64 = std::f64::consts::PI;

    fn zonal_y4(n_: usize) -> HarmonicCoefficients<f64> {
        let mut f = HarmonicCoefficients::zero(n_, 4).unwrap();
        f.set(4, 1, 1.0).unwrap();
        f
    }

    #[test]
    fn qset_guard_and_rejection() {
        let q = QSet::new(vec![0.5f64, 1.0, 3.0, 5.0]).unwrap();
        assert_eq!(q.samples(), &[0.5, 1.0, 3.0, 5.0]);
        // nearest even integers: 0.5 -> 2 (1.5), 1 -> 2 (1), 3 -> 2/4 (1), 5 -> 4/6 (1)
        assert!((q.guard() - 1.0).abs() < 1e-15);
        assert!(matches!(
            QSet::new(vec![0.5f64, 2.0]),
            Err(Error::ExcludedExponent { .. })
        ));
        assert!(QSet::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn euclidean_certifies_trivially() {
        let grid = build_grid::<f64>(3, 20).unwrap();
        let norm = NormSpec::<f64>::euclidean(3);
        for &q in &[0.5f64, 1.0, 3.0] {
            let cert =
                certify_embedding(&norm, q, 5, &grid, 8, &CertifyOptions::default()).unwrap();
            assert_eq!(cert.verdict, Verdict::CertifiedSufficientBound, "q={q}");
            assert!(cert.sufficient_bound_lhs.abs() < 1e-10);
            let c_q = c_constant(3, q).unwrap();
            assert!((cert.min_density - c_q).abs() < 1e-10 * c_q);
            assert!(cert.reconstruction_error < 1e-8);
        }
    }

    #[test]
    fn small_zonal_perturbation_certifies() {
        let grid = build_grid::<f64>(3, 20).unwrap();
        let norm = NormSpec::perturbation(zonal_y4(3), 1e-3).unwrap();
        let cert = certify_embedding(&norm, 1.0, 5, &grid, 8, &CertifyOptions::default()).unwrap();
        assert!(cert.verdict.is_certified());
        // density hovers near c(1) = 1/(2 pi)
        assert!((cert.min_density - 1.0 / (2.0 * PI)).abs() < 0.05 / (2.0 * PI));
        // soundness: certified implies positive density
        assert!(cert.min_density > 0.0);
        // the representation identity holds to quadrature precision
        assert!(cert.reconstruction_error <= 1e-6);
    }

    #[test]
    fn sufficient_bound_controls_density_deviation() {
        // The certified chain promises sup |b_H - c(q)| <= sufficient_bound_lhs:
        // realize both sides and compare.
        let grid = build_grid::<f64>(3, 20).unwrap();
        for &(lam, q) in &[(1e-3f64, 1.0f64), (5e-3, 0.5), (1e-2, 3.0)] {
            let norm = NormSpec::perturbation(zonal_y4(3), lam).unwrap();
            let cert =
                certify_embedding(&norm, q, 5, &grid, 8, &CertifyOptions::default()).unwrap();
            let h = expand(|x: &[f64]| norm.eval_sphere(x).powf(q), &grid, 8).unwrap();
            let density = invert(&h, q, 5, 8).unwrap();
            let sup_dev = density
                .coefficients
                .evaluate_on_grid(&grid)
                .into_iter()
                .fold(0.0f64, |acc, b| acc.max((b - cert.c_q).abs()));
            assert!(
                sup_dev <= cert.sufficient_bound_lhs,
                "lam={lam} q={q}: sup deviation {sup_dev} exceeds bound {}",
                cert.sufficient_bound_lhs
            );
        }
    }

    #[test]
    fn circle_norms_certify_too() {
        // the whole pipeline runs for n = 2
        let grid = build_grid::<f64>(2, 24).unwrap();
        let euclid = NormSpec::<f64>::euclidean(2);
        for &q in &[0.5f64, 1.0, 3.0] {
            let cert =
                certify_embedding(&euclid, q, 4, &grid, 8, &CertifyOptions::default()).unwrap();
            assert_eq!(cert.verdict, Verdict::CertifiedSufficientBound, "q={q}");
            let c_q = c_constant(2, q).unwrap();
            assert!((cert.min_density - c_q).abs() < 1e-9 * c_q);
            assert!(cert.reconstruction_error < 1e-8, "q={q}");
        }
        // an even degree-4 perturbation on the circle
        let mut f = HarmonicCoefficients::<f64>::zero(2, 4).unwrap();
        f.set(4, 1, 1.0).unwrap();
        let norm = NormSpec::perturbation(f, 1e-3).unwrap();
        let cert = certify_embedding(&norm, 1.0, 4, &grid, 8, &CertifyOptions::default()).unwrap();
        assert!(cert.verdict.is_certified());
        assert!(cert.reconstruction_error <= 1e-6);
        // and the atomic identity on the circle
        let resid = even_integer_example(2, 2, 0.2f64, 50, 9).unwrap();
        assert!(resid <= 1e-8, "n=2 atomic identity residual {resid:e}");
    }

    #[test]
    fn lp_ball_4_is_refuted_at_q_1() {
        let grid = build_grid::<f64>(3, 28).unwrap();
        let norm = NormSpec::lp_ball(3, 4.0f64).unwrap();
        let cert = certify_embedding(&norm, 1.0, 3, &grid, 10, &CertifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::RefutedNegativeDensity);
        assert!(cert.min_density < 0.0);
        // q = 4 is an excluded exponent, not a certifiable case
        assert!(matches!(
            certify_embedding(&norm, 4.0, 5, &grid, 10, &CertifyOptions::default()),
            Err(Error::ExcludedExponent { .. })
        ));
    }

    #[test]
    fn convexity_pass_and_fail() {
        let euclid = NormSpec::<f64>::euclidean(3);
        let report = convexity_check(&euclid, 5_000, 7);
        assert!(report.pass);
        assert!(report.worst_margin <= 1e-12);

        // an enormous perturbation destroys convexity
        let wild = NormSpec::perturbation(zonal_y4(3), 10.0).unwrap();
        let report = convexity_check(&wild, 5_000, 7);
        assert!(!report.pass);

        // the quartic-power norm at modest lambda stays convex
        let lq = NormSpec::lq_power(3, 2, 0.1f64).unwrap();
        let report = convexity_check(&lq, 20_000, 7);
        assert!(report.pass, "worst margin {:e}", report.worst_margin);
    }

    #[test]
    fn even_integer_identity() {
        // lambda = 0 reduces to the definition of c(2k)
        let r0 = even_integer_example(3, 2, 0.0f64, 50, 3).unwrap();
        assert!(r0 <= 1e-10, "residual {r0:e}");
        let r = even_integer_example(3, 2, 0.1f64, 50, 3).unwrap();
        assert!(r <= 1e-8, "residual {r:e}");
        // grid-exact across the whole tested range of k and lambda
        for k in 1..=4u32 {
            for &lam in &[0.0f64, 0.5, 1.0] {
                let resid = even_integer_example(3, k, lam, 25, 3).unwrap();
                assert!(resid <= 1e-8, "k={k} lambda={lam}: residual {resid:e}");
            }
        }
        // coordinate point: both sides equal 1 + lambda exactly
        let grid = build_grid::<f64>(3, 8).unwrap();
        let c4 = c_constant(3, 4.0f64).unwrap();
        let e1 = [1.0f64, 0.0, 0.0];
        let quad = grid.quadrature(|xi| (e1[0] * xi[0] + e1[1] * xi[1] + e1[2] * xi[2]).powi(4));
        let lhs = 1.0 + 0.3;
        let rhs = c4 * quad + 0.3 * 1.0;
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn hilbertian_detection() {
        let grid = build_grid::<f64>(3, 16).unwrap();
        let euclid = NormSpec::<f64>::euclidean(3);
        assert!(hilbertian_check(&euclid, &grid).unwrap() <= 1e-12);

        // Hilbertian but non-euclidean: N^2 = x diag(1,2,3) x.
        let values: Vec<f64> = grid
            .iter()
            .map(|(x, _)| x[0] * x[0] + 2.0 * x[1] * x[1] + 3.0 * x[2] * x[2])
            .collect();
        assert!(quadratic_fit_residual(&grid, &values).unwrap() <= 1e-10);

        // degree-4 harmonic content cannot be quadratic
        let bumpy = NormSpec::perturbation(zonal_y4(3), 0.05).unwrap();
        assert!(hilbertian_check(&bumpy, &grid).unwrap() > 1e-6);
    }

    #[test]
    fn levy_verification_and_negative_control() {
        let grid = build_grid::<f64>(3, 20).unwrap();
        let norm = NormSpec::<f64>::euclidean(3);
        let h = HarmonicCoefficients::<f64>::constant(3, 1.0).unwrap();
        let d = invert(&h, 1.0, 3, 2).unwrap();
        let resid = levy_verify(&norm, &d, &grid, 10, 11).unwrap();
        assert!(resid <= 1e-8, "euclidean residual {resid:e}");

        // negative control: verify the euclidean density against a visibly
        // perturbed norm; the residual must blow past tolerance.
        let bumpy = NormSpec::perturbation(zonal_y4(3), 0.3).unwrap();
        let resid = levy_verify(&bumpy, &d, &grid, 10, 11).unwrap();
        assert!(resid > 1e-3, "negative control too small: {resid:e}");
    }

    #[test]
    fn search_finds_feasible_lambda() {
        let grid = build_grid::<f64>(3, 20).unwrap();
        let q_set = QSet::new(vec![0.5f64, 1.0, 3.0, 5.0]).unwrap();
        let opts = SearchOptions {
            final_trials: 20_000,
            ..SearchOptions::default()
        };
        let out = search_lambda(&zonal_y4(3), &q_set, 5, &grid, 8, &opts).unwrap();
        assert!(out.lambda_star > 0.0);
        assert!(!out.hilbertian_input);
        assert_eq!(out.certificates.len(), 4);
        for cert in &out.certificates {
            assert!(cert.verdict.is_certified(), "q={}", cert.q);
        }
        assert!(out.convexity.pass);
        assert!(out.hilbertian_residual > 1e-6);
        // the reported lambda_star is feasible: an independent re-run at
        // lambda_star reproduces certified verdicts
        let norm = NormSpec::perturbation(zonal_y4(3), out.lambda_star).unwrap();
        for &q in q_set.samples() {
            let cert =
                certify_embedding(&norm, q, 5, &grid, 8, &CertifyOptions::default()).unwrap();
            assert!(cert.verdict.is_certified(), "re-run at q={q}");
        }
    }

    #[test]
    fn search_flags_zero_input_as_hilbertian() {
        let grid = build_grid::<f64>(3, 16).unwrap();
        let zero = HarmonicCoefficients::<f64>::zero(3, 4).unwrap();
        let q_set = QSet::new(vec![1.0f64]).unwrap();
        let opts = SearchOptions {
            final_trials: 1_000,
            search_trials: 500,
            ..SearchOptions::default()
        };
        let out = search_lambda(&zero, &q_set, 3, &grid, 4, &opts).unwrap();
        assert!(out.hilbertian_input);
        assert!(out.certificates[0].verdict.is_certified());
        assert!(out.hilbertian_residual <= 1e-10);
    }

    #[test]
    fn min_density_monotone_in_lambda() {
        let grid = build_grid::<f64>(3, 20).unwrap();
        let ladder = [1e-4f64, 1e-3, 5e-3, 2e-2];
        let mut prev = f64::INFINITY;
        for &lam in &ladder {
            let norm = NormSpec::perturbation(zonal_y4(3), lam).unwrap();
            let cert =
                certify_embedding(&norm, 1.0, 5, &grid, 8, &CertifyOptions::default()).unwrap();
            assert!(
                cert.min_density <= prev + 1e-6,
                "min density rose along the lambda ladder"
            );
            prev = cert.min_density;
        }
    }

    #[test]
    fn qset_refinement_stays_admissible() {
        let grid = build_grid::<f64>(3, 16).unwrap();
        let q_set = QSet::new(vec![0.5f64, 5.0]).unwrap();
        let refined = refine_qset(
            &zonal_y4(3),
            1e-4,
            &q_set,
            5,
            &grid,
            8,
            &CertifyOptions::default(),
            16,
        )
        .unwrap();
        assert!(refined.samples().len() >= 2);
        for &q in refined.samples() {
            assert!(admissible_q(q).is_ok());
        }
    }

    #[test]
    fn norm_labels_and_zonal_basis() {
        assert_eq!(NormSpec::<f64>::euclidean(3).label(), "euclidean");
        let f = zonal_y4(3);
        assert!(NormSpec::perturbation(f, 0.1)
            .unwrap()
            .label()
            .contains("perturbation"));
        assert!(NormSpec::lq_power(3, 2, 0.1f64)
            .unwrap()
            .label()
            .contains("lq-power"));
        assert!(NormSpec::lp_ball(3, 4.0f64)
            .unwrap()
            .label()
            .contains("lp-ball"));
        // the degree-4 zonal basis function peaks at the pole
        let x = [0.0f64, 0.0, 1.0];
        assert!(basis_eval(3, 4, 1, &x).unwrap() > 0.0);
    }
}
