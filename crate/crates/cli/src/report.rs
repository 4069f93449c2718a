//! Report shapes emitted by the CLI. Everything a run used is echoed back in
//! `config`, so feeding the same file to `--config` reproduces the run
//! bit-for-bit.

use serde::{Deserialize, Serialize};

use levyrep::certify::{ConvexityReport, EmbeddingCertificate, SearchOutcome};
use levyrep::DensityResult64;

/// Fully resolved run configuration (also the accepted `--config` schema;
/// command-line flags override file values).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_range: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    /// Integer or the string "auto".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub even_k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_q: Option<bool>,
}

/// Wrapper so a previously emitted report can be fed back as `--config`.
#[derive(Debug, Deserialize)]
pub struct ReportEnvelope {
    pub config: RunConfig,
}

#[derive(Debug, Serialize)]
pub struct CertificateReport {
    pub q: f64,
    pub r: u32,
    #[serde(rename = "M")]
    pub max_degree: usize,
    #[serde(rename = "lemma2_lhs")]
    pub sufficient_bound_lhs: f64,
    pub c_q: f64,
    pub min_density: f64,
    pub truncation_bound: f64,
    pub quad_margin: f64,
    pub reconstruction_error: f64,
    pub verdict: String,
    pub seed: u64,
}

impl From<&EmbeddingCertificate<f64>> for CertificateReport {
    fn from(c: &EmbeddingCertificate<f64>) -> Self {
        CertificateReport {
            q: c.q,
            r: c.r,
            max_degree: c.max_degree,
            sufficient_bound_lhs: c.sufficient_bound_lhs,
            c_q: c.c_q,
            min_density: c.min_density,
            truncation_bound: c.truncation_bound,
            quad_margin: c.quad_margin,
            reconstruction_error: c.reconstruction_error,
            verdict: c.verdict.as_str().to_string(),
            seed: c.seed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ConvexitySection {
    pub pass: bool,
    pub worst_margin: f64,
    pub min_norm: f64,
    pub trials: usize,
    pub seed: u64,
}

impl From<&ConvexityReport<f64>> for ConvexitySection {
    fn from(c: &ConvexityReport<f64>) -> Self {
        ConvexitySection {
            pass: c.pass,
            worst_margin: c.worst_margin,
            min_norm: c.min_norm,
            trials: c.trials,
            seed: c.seed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CertifyReport {
    pub config: RunConfig,
    pub norm_spec: String,
    pub lambda: f64,
    pub certificates: Vec<CertificateReport>,
    pub exit_code: u8,
}

#[derive(Debug, Serialize)]
pub struct SearchReport {
    pub config: RunConfig,
    pub norm_spec: String,
    pub lambda_star: f64,
    pub hilbertian_input: bool,
    pub hilbertian_residual: f64,
    pub convexity: ConvexitySection,
    pub certificates: Vec<CertificateReport>,
    pub q_samples: Vec<f64>,
    pub exit_code: u8,
}

impl SearchReport {
    pub fn from_outcome(
        config: RunConfig,
        norm_spec: String,
        q_samples: Vec<f64>,
        out: &SearchOutcome<f64>,
        exit_code: u8,
    ) -> Self {
        SearchReport {
            config,
            norm_spec,
            lambda_star: out.lambda_star,
            hilbertian_input: out.hilbertian_input,
            hilbertian_residual: out.hilbertian_residual,
            convexity: (&out.convexity).into(),
            certificates: out.certificates.iter().map(Into::into).collect(),
            q_samples,
            exit_code,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub config: RunConfig,
    pub kind: String,
    pub norm_spec: Option<String>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub exit_code: u8,
}

/// Density serialization: {n, q, r, M_used, truncation_bound, uniform_bound,
/// coefficients: [[m, j, value]]}.
#[derive(Debug, Serialize, Deserialize)]
pub struct DensityFile {
    pub n: usize,
    pub q: f64,
    pub r: u32,
    #[serde(rename = "M_used")]
    pub m_used: usize,
    pub truncation_bound: f64,
    pub uniform_bound: f64,
    pub coefficients: Vec<(usize, usize, f64)>,
}

impl DensityFile {
    pub fn from_result(d: &DensityResult64) -> Self {
        DensityFile {
            n: d.coefficients.n(),
            q: d.q,
            r: d.r,
            m_used: d.m_used,
            truncation_bound: d.truncation_bound,
            uniform_bound: d.uniform_bound,
            coefficients: d.coefficient_rows(),
        }
    }

    pub fn into_result(self) -> levyrep::Result<DensityResult64> {
        let mut coeffs =
            levyrep::harmonics::HarmonicCoefficients::<f64>::zero(self.n, self.m_used)?;
        for (m, j, v) in self.coefficients {
            coeffs.set(m, j, v)?;
        }
        Ok(levyrep::inversion::DensityResult {
            coefficients: coeffs,
            q: self.q,
            r: self.r,
            m_used: self.m_used,
            truncation_bound: self.truncation_bound,
            uniform_bound: self.uniform_bound,
        })
    }
}
