//! Funk-Hecke eigenvalues of the zonal kernel f(t) = |t|^q.
//!
//! Convolution with f(<x, xi>) acts diagonally on degree-m harmonics with
//! eigenvalue lambda_m. For |t|^q (q > 0, q not an even integer) the closed
//! form is
//!
//! ```text
//! lambda_m = pi^{n/2-1} Gamma(q+1) sin(pi (m-q)/2) Gamma((m-q)/2)
//!            / (2^{q-1} Gamma((m+n+q)/2))          (even m)
//! lambda_m = 0                                      (odd m, by parity)
//! ```
//!
//! evaluated entirely in log-Gamma space: the factor
//! sin(pi(m-q)/2) Gamma((m-q)/2) is rewritten through the reflection
//! identity as pi / Gamma(1 - (m-q)/2) whenever (m-q)/2 <= 0, so no
//! negative-argument Gamma is ever computed. An independent quadrature
//! oracle evaluates the defining integral directly.

use crate::error::{Error, Result};
use crate::harmonics::dim_harmonics;
use crate::scalar::{real, Real};
use crate::specfun::{gamma_ln, gegenbauer_at_one, gegenbauer_eval};
use crate::sphere::{
    build_interval_rule, integrate_graded, surface_area, IntervalRule, GRADED_LEVELS,
};

/// Guard band around even integers inside which q is rejected.
pub const Q_GUARD: f64 = 1e-9;

/// Check that q > 0 and is not within the guard band of an even integer.
pub fn admissible_q<T: Real>(q: T) -> Result<()> {
    let qf = q.to_f64().unwrap_or(f64::NAN);
    if !(qf > 0.0) {
        return Err(Error::Domain(format!(
            "exponent must satisfy q > 0, got {qf}"
        )));
    }
    let nearest_even = 2.0 * (qf / 2.0).round();
    if nearest_even >= 2.0 && (qf - nearest_even).abs() <= Q_GUARD {
        return Err(Error::ExcludedExponent {
            q: qf,
            guard: Q_GUARD,
        });
    }
    Ok(())
}

/// The normalizing constant c(q) = Gamma((n+q)/2) / (2 Gamma((q+1)/2) pi^{(n-1)/2}),
/// fixed by 1 = c(q) int |<x, xi>|^q d xi for unit x.
pub fn c_constant<T: Real>(n: usize, q: T) -> Result<T> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "c_constant requires n >= 2, got {n}"
        )));
    }
    if !(q > T::zero()) {
        return Err(Error::Domain(format!("c_constant requires q > 0, got {q}")));
    }
    let half = real::<T, _>(0.5);
    let nf: T = real(n);
    let ln = gamma_ln((nf + q) * half)?
        - gamma_ln((q + T::one()) * half)?
        - real::<T, _>(2).ln()
        - (nf - T::one()) * half * T::PI().ln();
    Ok(ln.exp())
}

/// Closed-form eigenvalue lambda_m for the kernel |t|^q on S^{n-1}.
///
/// Odd m returns exactly 0 (an even kernel annihilates odd harmonics).
pub fn lambda_closed<T: Real>(n: usize, m: usize, q: T) -> Result<T> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "lambda_closed requires n >= 2, got {n}"
        )));
    }
    admissible_q(q)?;
    if m % 2 == 1 {
        return Ok(T::zero());
    }
    let half = real::<T, _>(0.5);
    let two = real::<T, _>(2);
    let nf: T = real(n);
    let mf: T = real(m);
    let ln_common = (nf * half - T::one()) * T::PI().ln() + gamma_ln(q + T::one())?
        - (q - T::one()) * two.ln()
        - gamma_ln((mf + nf + q) * half)?;
    let hm = (mf - q) * half;
    if hm <= T::zero() {
        // m < q: sin * Gamma collapses to pi / Gamma(1 - (m-q)/2) > 0.
        let ln = ln_common + T::PI().ln() - gamma_ln(T::one() - hm)?;
        Ok(ln.exp())
    } else {
        // m > q: Gamma argument positive; take the sine's sign via parity,
        // sin(pi (m/2 - q/2)) = -(-1)^{m/2} sin(pi q / 2).
        let sine = (T::PI() * q * half).sin();
        let sign = if (m / 2).is_multiple_of(2) {
            -T::one()
        } else {
            T::one()
        };
        let magnitude = (ln_common + gamma_ln(hm)?).exp() * sine.abs();
        Ok(sign * sine.signum() * magnitude)
    }
}

/// Eigenvalues for one (n, q) pair, m = 0..=max_degree.
#[derive(Debug, Clone)]
pub struct EigenvalueTable<T> {
    pub n: usize,
    pub q: T,
    values: Vec<T>,
}

impl<T: Real> EigenvalueTable<T> {
    pub fn build(n: usize, q: T, max_degree: usize) -> Result<Self> {
        let values = (0..=max_degree)
            .map(|m| lambda_closed(n, m, q))
            .collect::<Result<Vec<_>>>()?;
        Ok(EigenvalueTable { n, q, values })
    }

    pub fn max_degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn lambda(&self, m: usize) -> T {
        self.values[m]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Quadrature oracle for lambda_m: integrates the zonal-kernel form of the
/// defining integral directly, independently of the closed form.
///
/// The substitution t = sin(theta) absorbs the surface weight
/// (1 - t^2)^{(n-3)/2} into cos^{n-2}(theta), and the graded split at
/// theta = 0 restores fast convergence against the |t|^q kink. `rule` is the
/// unweighted Gauss-Legendre panel core (weight exponent 0); weighted rules
/// are rejected since an affinely mapped panel cannot carry their weight.
pub fn lambda_oracle<T: Real>(n: usize, m: usize, q: T, rule: &IntervalRule<T>) -> Result<T> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "lambda_oracle requires n >= 2, got {n}"
        )));
    }
    if !(q > T::zero()) {
        return Err(Error::Domain(format!(
            "lambda_oracle requires q > 0, got {q}"
        )));
    }
    if rule.weight_exponent() != T::zero() {
        return Err(Error::InvalidRule(
            "lambda_oracle needs an unweighted Gauss-Legendre panel core".into(),
        ));
    }
    if m % 2 == 1 {
        // Even kernel against an odd zonal polynomial: identically zero.
        return Ok(T::zero());
    }
    let half_pi = T::FRAC_PI_2();
    if n == 2 {
        // lambda_m = 2 int f(sin th) T_m(sin th) d th over (-pi/2, pi/2),
        // and T_m(sin th) = (-1)^{m/2} cos(m th) for even m.
        let sign = if (m / 2).is_multiple_of(2) {
            T::one()
        } else {
            -T::one()
        };
        let mf: T = real(m);
        let integral = integrate_graded(rule, half_pi, GRADED_LEVELS, |theta| {
            theta.sin().abs().powf(q) * (mf * theta).cos()
        })?;
        // even integrand: double for the negative half
        return Ok(real::<T, _>(4) * sign * integral);
    }
    let nu: T = real((n as f64 - 2.0) / 2.0);
    let cos_pow = (n - 2) as i32;
    let integral = integrate_graded(rule, half_pi, GRADED_LEVELS, |theta| {
        let t = theta.sin();
        t.abs().powf(q) * gegenbauer_eval(nu, m, t).expect("|sin| <= 1") * theta.cos().powi(cos_pow)
    })?;
    let scale = surface_area::<T>(n - 1)? / gegenbauer_at_one(nu, m);
    Ok(real::<T, _>(2) * scale * integral)
}

/// The same integral evaluated from the explicit m-th derivative of
/// (1 - t^2)^{m + (n-3)/2}, differentiated term-by-term (odd n only, where
/// the exponent is an integer and the derivative is a polynomial).
///
/// The monomial coefficients grow like 4^m m!, so this route loses roughly
/// m/3 digits to cancellation; it is kept as a structurally independent
/// cross-check for moderate degrees and feeds the unit tests, while
/// [`lambda_oracle`] evaluates the same polynomial stably by recurrence.
pub fn lambda_oracle_derivative<T: Real>(
    n: usize,
    m: usize,
    q: T,
    rule: &IntervalRule<T>,
) -> Result<T> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "derivative-form oracle requires odd n >= 3, got {n}"
        )));
    }
    if rule.weight_exponent() != T::zero() {
        return Err(Error::InvalidRule(
            "derivative-form oracle needs an unweighted Gauss-Legendre panel core".into(),
        ));
    }
    if m % 2 == 1 {
        return Ok(T::zero());
    }
    let s = (n - 3) / 2;
    let p = m + s;
    // (1 - t^2)^p = sum_k binom(p, k) (-1)^k t^{2k};
    // d^m/dt^m t^{2k} = (2k)! / (2k - m)! t^{2k - m} for 2k >= m.
    // Powers 2k - m are even since m is even.
    let mut coeffs: Vec<T> = Vec::new(); // coefficient of t^{2i}, i = 0..
    for k in 0..=p {
        if 2 * k < m {
            continue;
        }
        let mut c: T = if k % 2 == 0 { T::one() } else { -T::one() };
        // binom(p, k) through the smaller side
        for i in 0..k.min(p - k) {
            c = c * real((p - i) as f64) / real((i + 1) as f64);
        }
        // falling factorial (2k)(2k-1)...(2k-m+1)
        for i in 0..m {
            c = c * real((2 * k - i) as f64);
        }
        let slot = (2 * k - m) / 2;
        if coeffs.len() <= slot {
            coeffs.resize(slot + 1, T::zero());
        }
        coeffs[slot] = coeffs[slot] + c;
    }
    let poly = move |t: T| {
        let u = t * t;
        coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * u + c)
    };
    let integral = integrate_graded(rule, T::one(), GRADED_LEVELS, |t| t.powf(q) * poly(t))?;
    // prefactor (-1)^m pi^{(n-1)/2} / (2^{m-1} Gamma(m + (n-1)/2)); m even.
    let half = real::<T, _>(0.5);
    let ln_pre = (real::<T, _>((n - 1) as f64) * half) * T::PI().ln()
        - real::<T, _>((m as f64) - 1.0) * real::<T, _>(2).ln()
        - gamma_ln(real::<T, _>(m) + (real::<T, _>((n - 1) as f64)) * half)?;
    Ok(real::<T, _>(2) * ln_pre.exp() * integral)
}

/// Refinement driver: doubles the panel order until two successive oracle
/// values agree to `tol` relative, returning (value, achieved change).
pub fn lambda_oracle_refined<T: Real>(n: usize, m: usize, q: T, tol: T) -> Result<(T, T)> {
    let mut degree = 31;
    let mut prev: Option<T> = None;
    while degree <= 1024 {
        let rule = build_interval_rule::<T>(3, degree)?;
        let value = lambda_oracle(n, m, q, &rule)?;
        if let Some(p) = prev {
            let change = (value - p).abs();
            if change <= tol * value.abs().max(real(1e-300)) {
                return Ok((value, change));
            }
        }
        prev = Some(value);
        degree = 2 * degree + 1;
    }
    let achieved = prev
        .map(|p| p.to_f64().unwrap_or(f64::NAN))
        .unwrap_or(f64::NAN);
    Err(Error::Accuracy {
        required: tol.to_f64().unwrap_or(f64::NAN),
        achieved: f64::NAN,
        estimate: achieved,
    })
}

/// The uniform-bound constants of the inversion estimate
/// |b_H| <= K(q) ||H|| + L(q) ||Delta^r H||.
#[derive(Debug, Clone, Copy)]
pub struct BoundConstants<T> {
    /// K(q) = |lambda_0|^{-1} omega_n^{-1/2}.
    pub k: T,
    /// Partial sum of |lambda_m|^{-1} m^{-2r} (N(n,m)/omega_n)^{1/2} over
    /// even m in [2, m_cap].
    pub l_partial: T,
    /// Over-estimate of the remainder beyond m_cap (reported separately).
    pub tail: T,
}

impl<T: Real> BoundConstants<T> {
    /// The full constant used when a guaranteed upper bound is required.
    pub fn l_total(&self) -> T {
        self.l_partial + self.tail
    }
}

/// Compute K(q), the partial sum of L(q) up to `m_cap`, and a tail estimate.
///
/// Requires the smoothness hypothesis 2r > n + q; the summand then decays
/// like m^{-(2r + 1 - n - q)} and the series converges. The tail is the sum
/// of 2000 further terms plus an integral-comparison remainder with a factor
/// 2 safety margin.
pub fn bound_constants<T: Real>(n: usize, q: T, r: u32, m_cap: usize) -> Result<BoundConstants<T>> {
    check_hypothesis(n, q, r)?;
    let omega = surface_area::<T>(n)?;
    let lambda0 = lambda_closed(n, 0, q)?;
    let k = lambda0.abs().recip() / omega.sqrt();

    let summand = |m: usize| -> Result<T> {
        let lam = lambda_closed(n, m, q)?;
        let nf: T = real(dim_harmonics(n, m)? as f64);
        let mf: T = real(m);
        Ok(lam.abs().recip() * mf.powi(-2 * r as i32) * (nf / omega).sqrt())
    };

    let m_cap = m_cap.max(2);
    let mut l_partial = T::zero();
    let mut m = 2;
    while m <= m_cap {
        l_partial = l_partial + summand(m)?;
        m += 2;
    }

    let extend_to = m_cap + 4000;
    let mut tail = T::zero();
    let mut last = T::zero();
    let mut m = m_cap + 2 - m_cap % 2;
    while m <= extend_to {
        last = summand(m)?;
        tail = tail + last;
        m += 2;
    }
    // integral remainder: sum_{even m > M} a_M (m/M)^{-s} <= a_M M / (2(s-1)),
    // doubled for safety. s = 2r + 1 - n - q > 1 under the hypothesis.
    let s = real::<T, _>(2.0 * r as f64 + 1.0 - n as f64) - q;
    let mf: T = real(extend_to);
    tail = tail + last * mf / (s - T::one());

    Ok(BoundConstants { k, l_partial, tail })
}

pub(crate) fn check_hypothesis<T: Real>(n: usize, q: T, r: u32) -> Result<()> {
    let qf = q.to_f64().unwrap_or(f64::NAN);
    if !(2.0 * r as f64 > n as f64 + qf) {
        return Err(Error::HypothesisViolation { r, n, q: qf });
    }
    Ok(())
}

/// Smallest r satisfying the strict-margin rule 2r > n + q_max + 1, used by
/// the "auto" setting of the command-line front end.
pub fn auto_r(n: usize, q_max: f64) -> u32 {
    let mut r = 1u32;
    while 2.0 * r as f64 <= n as f64 + q_max + 1.0 {
        r += 1;
    }
    r
}

/// Least-squares slope of log |lambda_m|^{-1} against log m over even
/// m in [10, max_degree]; the asymptotic growth rate is (n + 2q)/2.
pub fn decay_exponent_check<T: Real>(table: &EigenvalueTable<T>) -> Result<T> {
    if table.max_degree() < 40 {
        return Err(Error::Domain(format!(
            "decay fit needs eigenvalues up to degree >= 40, got {}",
            table.max_degree()
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut m = 10;
    while m <= table.max_degree() {
        let lam = table.lambda(m);
        if lam.is_zero() {
            m += 2;
            continue;
        }
        xs.push(real::<T, _>(m).ln());
        ys.push(-lam.abs().ln());
        m += 2;
    }
    if xs.len() < 4 {
        return Err(Error::Domain(
            "not enough even degrees for the decay fit".into(),
        ));
    }
    let count: T = real(xs.len());
    let mean_x = xs.iter().fold(T::zero(), |a, &v| a + v) / count;
    let mean_y = ys.iter().fold(T::zero(), |a, &v| a + v) / count;
    let mut cov = T::zero();
    let mut var = T::zero();
    for (&x, &y) in xs.iter().zip(&ys) {
        cov = cov + (x - mean_x) * (y - mean_y);
        var = var + (x - mean_x) * (x - mean_x);
    }
    Ok(cov / var)
}

/// One row of the eigenvalue-table report.
#[derive(Debug, Clone, Copy)]
pub struct LambdaRow<T> {
    pub m: usize,
    pub closed: T,
    pub oracle: T,
    pub rel_err: T,
}

/// Closed form next to the oracle for even m <= max_degree (odd rows are
/// omitted: both sides are identically zero).
pub fn lambda_table_rows<T: Real>(n: usize, q: T, max_degree: usize) -> Result<Vec<LambdaRow<T>>> {
    admissible_q(q)?;
    let mut rows = Vec::new();
    let mut m = 0;
    while m <= max_degree {
        let closed = lambda_closed(n, m, q)?;
        let (oracle, _) = lambda_oracle_refined(n, m, q, real(1e-12))?;
        let rel_err = (closed - oracle).abs() / closed.abs().max(real(1e-300));
        rows.push(LambdaRow {
            m,
            closed,
            oracle,
            rel_err,
        });
        m += 2;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn admissibility_guard() {
        assert!(admissible_q(1.0f64).is_ok());
        assert!(admissible_q(5.7f64).is_ok());
        assert!(matches!(
            admissible_q(2.0f64),
            Err(Error::ExcludedExponent { .. })
        ));
        assert!(matches!(
            admissible_q(4.0f64 + 5e-10),
            Err(Error::ExcludedExponent { .. })
        ));
        assert!(admissible_q(0.0f64).is_err());
    }

    #[test]
    fn lambda_closed_anchor_values() {
        // n=3, q=1: lambda_0 = 2 pi, lambda_2 = pi/2, lambda_4 = -pi/12.
        assert!(rel(lambda_closed(3, 0, 1.0f64).unwrap(), 2.0 * PI) < 1e-13);
        assert!(rel(lambda_closed(3, 2, 1.0f64).unwrap(), PI / 2.0) < 1e-13);
        assert!(rel(lambda_closed(3, 4, 1.0f64).unwrap(), -PI / 12.0) < 1e-13);
        // odd degree: exact zero by parity
        assert_eq!(lambda_closed(3, 1, 0.5f64).unwrap(), 0.0);
        // n=2, q=1: lambda_0 = 4 = int |cos|
        assert!(rel(lambda_closed(2, 0, 1.0f64).unwrap(), 4.0) < 1e-13);
    }

    #[test]
    fn lambda_sign_pattern() {
        // Below q the sign is constant positive (the sine's alternation is
        // cancelled by Gamma's sign on the negative axis); above q it is
        // the sign of sin(pi (m-q)/2), alternating between even m.
        for &(n, q) in &[(3usize, 1.0f64), (3, 5.7), (2, 3.0), (4, 0.5)] {
            let mut m = 0;
            while m <= 30 {
                let lam = lambda_closed(n, m, q).unwrap();
                if (m as f64) < q {
                    assert!(
                        lam > 0.0,
                        "lambda should be positive below q: n={n} m={m} q={q}"
                    );
                } else {
                    let expected = (PI * (m as f64 - q) / 2.0).sin();
                    assert!(
                        lam.signum() == expected.signum(),
                        "sign mismatch at n={n}, m={m}, q={q}: {lam}"
                    );
                }
                m += 2;
            }
        }
    }

    #[test]
    fn c_constant_values_and_normalization() {
        assert!(rel(c_constant(3, 1.0f64).unwrap(), 1.0 / (2.0 * PI)) < 1e-13);
        assert!(rel(c_constant(2, 1.0f64).unwrap(), 0.25) < 1e-13);
        // lambda_0 c(q) = 1 on a q-grid away from the even integers.
        for n in 2..=5usize {
            let mut q = 0.05f64;
            while q <= 6.0 {
                if (q - 2.0 * (q / 2.0).round()).abs() > 1e-3 {
                    let prod = lambda_closed(n, 0, q).unwrap() * c_constant(n, q).unwrap();
                    assert!((prod - 1.0).abs() <= 1e-10, "n={n} q={q}: {prod}");
                }
                q += 0.119;
            }
        }
    }

    #[test]
    fn oracle_matches_closed_form_spot() {
        let rule = build_interval_rule::<f64>(3, 63).unwrap();
        // n=3, m=2, q=1 -> pi/2
        let v = lambda_oracle(3, 2, 1.0, &rule).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-9);
        // n=3, m=4, q=1 -> -pi/12 (sign change past m > q)
        let v = lambda_oracle(3, 4, 1.0, &rule).unwrap();
        assert!(rel(v, -PI / 12.0) < 1e-9);
        // n=2 fractional exponent against the closed form
        let v = lambda_oracle(2, 2, 0.5, &rule).unwrap();
        assert!(rel(v, lambda_closed(2, 2, 0.5).unwrap()) < 1e-8);
    }

    #[test]
    fn oracle_rejects_weighted_rules() {
        let weighted = build_interval_rule::<f64>(4, 31).unwrap();
        assert!(matches!(
            lambda_oracle(3, 2, 1.0, &weighted),
            Err(Error::InvalidRule(_))
        ));
    }

    #[test]
    fn derivative_form_cross_checks_oracle() {
        let rule = build_interval_rule::<f64>(3, 63).unwrap();
        for &n in &[3usize, 5] {
            for m in (0..=12usize).step_by(2) {
                for &q in &[0.5f64, 1.0, 3.0] {
                    let a = lambda_oracle_derivative(n, m, q, &rule).unwrap();
                    let b = lambda_oracle(n, m, q, &rule).unwrap();
                    assert!(
                        rel(a, b) < 1e-9,
                        "n={n} m={m} q={q}: derivative {a} vs recurrence {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_refinement_converges() {
        let (v, change) = lambda_oracle_refined(3, 6, 0.5f64, 1e-10).unwrap();
        let closed = lambda_closed(3, 6, 0.5f64).unwrap();
        assert!(rel(v, closed) < 1e-9, "refined {v} vs closed {closed}");
        assert!(change <= 1e-10 * v.abs());
    }

    #[test]
    fn bound_constants_anchor() {
        // K(q) for n=3, q=1 is 1/(2 pi sqrt(4 pi)).
        let bc = bound_constants(3, 1.0f64, 3, 40).unwrap();
        assert!(rel(bc.k, 1.0 / (2.0 * PI * (4.0 * PI).sqrt())) < 1e-12);
        // First summand of L at m=2, r=3: (2/pi) 2^{-6} sqrt(5/(4 pi)).
        let first = (2.0 / PI) * 2.0f64.powi(-6) * (5.0 / (4.0 * PI)).sqrt();
        let only_first = bound_constants(3, 1.0f64, 3, 2).unwrap();
        assert!(rel(only_first.l_partial, first) < 1e-12);
        assert!(bc.tail > 0.0);
    }

    #[test]
    fn bound_tail_decreases_monotonically() {
        let mut prev = f64::INFINITY;
        for &cap in &[20usize, 40, 80, 160, 320] {
            let bc = bound_constants(3, 1.0f64, 3, cap).unwrap();
            assert!(bc.tail < prev, "tail at cap {cap} did not shrink");
            prev = bc.tail;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn bound_constants_enforce_hypothesis() {
        // 2r must exceed n + q strictly: r=2 fails at q=1, passes at q=0.9.
        assert!(matches!(
            bound_constants(3, 1.0f64, 2, 40),
            Err(Error::HypothesisViolation { .. })
        ));
        assert!(bound_constants(3, 0.9f64, 2, 40).is_ok());
    }

    #[test]
    fn l_series_summands_eventually_decay() {
        // summand ratio < 1 beyond a modest threshold
        let n = 3;
        let q = 1.0f64;
        let r = 3;
        let omega = 4.0 * PI;
        let summand = |m: usize| {
            lambda_closed(n, m, q).unwrap().abs().recip()
                * (m as f64).powi(-2 * r)
                * ((dim_harmonics(n, m).unwrap() as f64) / omega).sqrt()
        };
        let mut m = 10;
        while m < 200 {
            assert!(summand(m + 2) < summand(m), "ratio >= 1 at m={m}");
            m += 2;
        }
    }

    #[test]
    fn decay_fit_matches_growth_rate() {
        for &(n, q, want) in &[(3usize, 1.0f64, 2.5f64), (3, 0.5, 2.0), (2, 3.0, 4.0)] {
            let table = EigenvalueTable::build(n, q, 60).unwrap();
            let slope = decay_exponent_check(&table).unwrap();
            assert!(
                (slope - want).abs() <= 0.1,
                "n={n} q={q}: slope {slope} vs {want}"
            );
        }
    }

    #[test]
    fn auto_r_rule() {
        assert_eq!(auto_r(3, 5.0), 5); // 2r > 9
        assert_eq!(auto_r(3, 1.0), 3); // 2r > 5
        assert_eq!(auto_r(2, 0.5), 2); // 2r > 3.5
    }

    #[test]
    fn table_rows_spotcheck() {
        let rows = lambda_table_rows(3, 1.0f64, 10).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rel(rows[0].closed, 2.0 * PI) < 1e-12);
        for row in &rows {
            assert!(row.rel_err <= 1e-8, "m={} rel_err {}", row.m, row.rel_err);
        }
    }

    #[test]
    fn eigenvalue_table_invariants() {
        for &(n, q) in &[(3usize, 0.5f64), (2, 1.5), (5, 5.7)] {
            let table = EigenvalueTable::build(n, q, 40).unwrap();
            assert!(rel(table.lambda(0), 1.0 / c_constant(n, q).unwrap()) < 1e-10);
            for m in 0..=40usize {
                if m % 2 == 1 {
                    assert_eq!(table.lambda(m), 0.0);
                } else {
                    assert!(table.lambda(m).abs() > 0.0, "n={n} q={q} m={m}");
                }
            }
        }
    }
}
