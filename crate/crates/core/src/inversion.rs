//! Inversion of the zonal kernel: from the harmonic expansion of an even
//! function H to the continuous density b_H with
//! H(x) = int |<x, xi>|^q b_H(xi) d xi.
//!
//! On harmonics the kernel acts diagonally, so the density series is simply
//! coefficient division by the eigenvalues,
//! b_{m j} = lambda_m^{-1} (H, Y_{m j}), taken over even degrees. The sup
//! norm of the density obeys
//!
//! ```text
//! |b_H(x)| <= K(q) ||H||_{L_2} + L(q) ||Delta^r H||_{L_2},   2r > n + q,
//! ```
//!
//! which is what certificates lean on.

use crate::error::{Error, Result};
use crate::funk_hecke::{admissible_q, bound_constants, check_hypothesis, lambda_closed};
use crate::harmonics::{dim_harmonics, HarmonicCoefficients};
use crate::scalar::{real, Real};
use crate::sphere::surface_area;

/// Cap for the bound-constant series when a caller does not provide one.
const DEFAULT_BOUND_CAP: usize = 2000;

/// |lambda_m| below this threshold refuses inversion (conditioning).
const LAMBDA_FLOOR: f64 = 1e-280;

/// The density b_H together with its error bookkeeping.
#[derive(Debug, Clone)]
pub struct DensityResult<T> {
    /// Harmonic coefficients of b_H (even degrees only).
    pub coefficients: HarmonicCoefficients<T>,
    pub q: T,
    pub r: u32,
    /// Highest degree retained in the series.
    pub m_used: usize,
    /// Uniform bound on the discarded tail of the series (zero when H is
    /// band-limited within the retained window).
    pub truncation_bound: T,
    /// The closed-form sup bound K(q)||H|| + L(q)||Delta^r H|| for this H.
    pub uniform_bound: T,
}

impl<T: Real> DensityResult<T> {
    /// Coefficient triples (m, j, value) for serialization.
    pub fn coefficient_rows(&self) -> Vec<(usize, usize, T)> {
        self.coefficients.rows()
    }
}

/// Invert the kernel on a band-limited even expansion: coefficients of b_H
/// are lambda_m^{-1} (H, Y_{m j}) for even m <= m_limit.
pub fn invert<T: Real>(
    h: &HarmonicCoefficients<T>,
    q: T,
    r: u32,
    m_limit: usize,
) -> Result<DensityResult<T>> {
    admissible_q(q)?;
    let n = h.n();
    check_hypothesis(n, q, r)?;
    if !h.even() {
        return Err(Error::NotEven {
            magnitude: h.odd_mass().to_f64().unwrap_or(f64::NAN),
        });
    }
    if !m_limit.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "series limit must be even, got {m_limit}"
        )));
    }

    let m_used = m_limit.min(h.max_degree());
    let mut b = HarmonicCoefficients::zero(n, m_used)?;
    let mut m = 0;
    while m <= m_used {
        let lam = lambda_closed(n, m, q)?;
        if lam.abs() < real(LAMBDA_FLOOR) {
            return Err(Error::Conditioning {
                m,
                magnitude: lam.abs().to_f64().unwrap_or(0.0),
            });
        }
        for j in 1..=dim_harmonics(n, m)? {
            let c = h.get(m, j);
            if !c.is_zero() {
                b.set(m, j, c / lam)?;
            }
        }
        m += 2;
    }

    // Tail beyond m_limit: bound each discarded degree through the decay of
    // the Green's-formula pairing; exact zero when H is band-limited inside
    // the window.
    let truncation_bound = if h.max_degree() <= m_limit {
        T::zero()
    } else {
        let omega = surface_area::<T>(n)?;
        let laplaced = h.laplace_beltrami_apply(r);
        let dnorm = laplaced.l2_norm();
        let mut acc = T::zero();
        let mut m = m_limit + 2;
        while m <= h.max_degree() {
            let lam = lambda_closed(n, m, q)?;
            let nf: T = real(dim_harmonics(n, m)? as f64);
            let mf: T = real(m);
            acc = acc + lam.abs().recip() * mf.powi(-2 * r as i32) * (nf / omega).sqrt();
            m += 2;
        }
        acc * dnorm
    };

    let bound = uniform_bound(h, q, r)?;
    Ok(DensityResult {
        coefficients: b,
        q,
        r,
        m_used,
        truncation_bound,
        uniform_bound: bound,
    })
}

/// The sup-norm bound K(q) ||H|| + L(q) ||Delta^r H|| for this H.
pub fn uniform_bound<T: Real>(h: &HarmonicCoefficients<T>, q: T, r: u32) -> Result<T> {
    admissible_q(q)?;
    let bc = bound_constants(h.n(), q, r, DEFAULT_BOUND_CAP)?;
    Ok(bc.k * h.l2_norm() + bc.l_total() * h.laplace_beltrami_apply(r).l2_norm())
}

/// The forward direction: multiply coefficients by lambda_m. Exact inverse
/// of [`invert`] on band-limited even inputs.
pub fn forward<T: Real>(b: &HarmonicCoefficients<T>, q: T) -> Result<HarmonicCoefficients<T>> {
    admissible_q(q)?;
    if !b.even() {
        return Err(Error::NotEven {
            magnitude: b.odd_mass().to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = b.n();
    let mut out = HarmonicCoefficients::zero(n, b.max_degree())?;
    let mut m = 0;
    while m <= b.max_degree() {
        let lam = lambda_closed(n, m, q)?;
        for j in 1..=dim_harmonics(n, m)? {
            let c = b.get(m, j);
            if !c.is_zero() {
                out.set(m, j, c * lam)?;
            }
        }
        m += 2;
    }
    Ok(out)
}
