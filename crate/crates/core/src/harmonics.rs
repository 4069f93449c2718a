//! Real spherical harmonics: bases for n in {2, 3}, expansion/synthesis,
//! the addition theorem, and the spectral Laplace-Beltrami action.
//!
//! Basis ordering: degree m holds N(n, m) functions indexed j = 1..N(n, m).
//! For n = 3, j = 1 is the zonal harmonic (azimuthal order 0) and the pair
//! (j = 2k, j = 2k+1) carries cos(k phi), sin(k phi). For n = 2, degree
//! m >= 1 has the pair (cos m theta, sin m theta) / sqrt(pi). All bases are
//! orthonormal in L_2 of the surface measure.

use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::sphere::{surface_area, SphereGrid};

/// Coefficients below this magnitude are stored as exact zeros after an
/// expansion, keeping the parity flag sharp. The floor is calibrated for
/// f64; lower-precision scalars scale it up to their own noise level.
fn zero_clip<T: Real>() -> T {
    real::<T, _>(1e-14).max(T::epsilon() * real(100.0))
}

/// Odd-degree mass up to this relative tolerance still counts as even.
fn even_tol<T: Real>() -> T {
    real::<T, _>(1e-10).max(T::epsilon() * real(1000.0))
}

/// Dimension N(n, m) of the space of degree-m spherical harmonics on S^{n-1},
/// with the conventional special cases N(n, 0) = 1 and N(2, m) = 2.
pub fn dim_harmonics(n: usize, m: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "dim_harmonics requires n >= 2, got {n}"
        )));
    }
    // N(n, m) = binom(n+m-1, m) - binom(n+m-3, m-2), the closed Gamma form
    // reduced to integers.
    let a = binom(n + m - 1, m);
    let b = if m >= 2 { binom(n + m - 3, m - 2) } else { 0 };
    Ok((a - b) as usize)
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// A finite spherical-harmonic expansion of a function on S^{n-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoefficients<T> {
    n: usize,
    max_degree: usize,
    /// entries[m][j-1] is the coefficient of Y_{m j}.
    entries: Vec<Vec<T>>,
    even: bool,
}

impl<T: Real> HarmonicCoefficients<T> {
    /// All-zero expansion up to `max_degree`.
    pub fn zero(n: usize, max_degree: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("need n >= 2, got {n}")));
        }
        let mut entries = Vec::with_capacity(max_degree + 1);
        for m in 0..=max_degree {
            entries.push(vec![T::zero(); dim_harmonics(n, m)?]);
        }
        Ok(HarmonicCoefficients {
            n,
            max_degree,
            entries,
            even: true,
        })
    }

    /// Expansion with a single unit entry at (m, j).
    pub fn unit(n: usize, m: usize, j: usize) -> Result<Self> {
        let mut c = Self::zero(n, m)?;
        c.set(m, j, T::one())?;
        Ok(c)
    }

    /// The constant function with value `v` (coefficient v sqrt(omega_n) on Y_{0 1}).
    pub fn constant(n: usize, v: T) -> Result<Self> {
        let mut c = Self::zero(n, 0)?;
        let root_area = surface_area::<T>(n)?.sqrt();
        c.set(0, 1, v * root_area)?;
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Whether all odd-degree coefficients vanish (within tolerance at
    /// construction time; exactly afterwards).
    pub fn even(&self) -> bool {
        self.even
    }

    /// Coefficient of Y_{m j}; j is 1-based. Entries outside the stored
    /// range read as zero.
    pub fn get(&self, m: usize, j: usize) -> T {
        self.entries
            .get(m)
            .and_then(|row| row.get(j - 1))
            .copied()
            .unwrap_or_else(T::zero)
    }

    /// Set the coefficient of Y_{m j} (1-based j).
    pub fn set(&mut self, m: usize, j: usize, value: T) -> Result<()> {
        let row = self.entries.get_mut(m).ok_or_else(|| {
            Error::Domain(format!("degree {m} beyond max_degree {}", self.max_degree))
        })?;
        let slot = row
            .get_mut(j - 1)
            .ok_or_else(|| Error::Domain(format!("order index {j} out of range for degree {m}")))?;
        *slot = value;
        self.refresh_even();
        Ok(())
    }

    /// Iterate stored (m, j, value) triples, skipping exact zeros.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.entries.iter().enumerate().flat_map(|(m, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(move |(idx, &v)| (m, idx + 1, v))
        })
    }

    /// sqrt(sum of squared coefficients): the L_2(S^{n-1}) norm by Parseval.
    pub fn l2_norm(&self) -> T {
        self.entries
            .iter()
            .flatten()
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt()
    }

    /// Apply Delta^r spectrally: degree m is scaled by (-m(m+n-2))^r.
    pub fn laplace_beltrami_apply(&self, r: u32) -> Self {
        let mut out = self.clone();
        for (m, row) in out.entries.iter_mut().enumerate() {
            let eigen = -real::<T, _>(m as f64 * (m as f64 + self.n as f64 - 2.0));
            let factor = eigen.powi(r as i32);
            for v in row.iter_mut() {
                *v = *v * factor;
            }
        }
        // r >= 1 zeroes the constant; parity is unaffected.
        out
    }

    /// Pointwise synthesis: sum of c_{m j} Y_{m j}(x). `x` must be a unit
    /// vector with `n` components.
    pub fn evaluate(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.n, "point dimension mismatch");
        let basis = basis_all(self.n, self.max_degree, x)
            .expect("basis evaluation for a dimension accepted at construction");
        self.dot_basis(&basis)
    }

    /// Synthesis at every node of a grid, reusing one basis buffer; the
    /// per-node allocation would otherwise dominate dense scans.
    pub fn evaluate_on_grid(&self, grid: &crate::sphere::SphereGrid<T>) -> Vec<T> {
        assert_eq!(grid.n(), self.n, "grid dimension mismatch");
        let mut scratch = BasisScratch::new();
        (0..grid.len())
            .map(|i| {
                scratch
                    .eval(self.n, self.max_degree, grid.node(i))
                    .expect("dimension checked above");
                self.dot_basis(&scratch.out)
            })
            .collect()
    }

    fn dot_basis(&self, basis: &[T]) -> T {
        let mut acc = T::zero();
        let mut k = 0;
        for row in &self.entries {
            for &c in row {
                if !c.is_zero() {
                    acc = acc + c * basis[k];
                }
                k += 1;
            }
        }
        acc
    }

    /// Coefficient rows (m, j, value) including stored zeros on even degrees;
    /// convenient for serialization.
    pub fn rows(&self) -> Vec<(usize, usize, T)> {
        self.iter().collect()
    }

    /// CSV dump: a header line carrying (n, max_degree, even_flag), then a
    /// column line, then one row per nonzero coefficient.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "n,max_degree,even\n{},{},{}\nm,j,value\n",
            self.n, self.max_degree, self.even as u8
        );
        for (m, j, v) in self.iter() {
            out.push_str(&format!(
                "{m},{j},{:.16e}\n",
                v.to_f64().unwrap_or(f64::NAN)
            ));
        }
        out
    }

    /// Parse the format written by [`HarmonicCoefficients::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().unwrap_or_default();
        if header.trim() != "n,max_degree,even" {
            return Err(Error::Parse(format!("bad coefficient header: {header}")));
        }
        let meta = lines
            .next()
            .ok_or_else(|| Error::Parse("missing metadata line".into()))?;
        let fields: Vec<&str> = meta.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("bad metadata line: {meta}")));
        }
        let n: usize = fields[0]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("n: {e}")))?;
        let max_degree: usize = fields[1]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("max_degree: {e}")))?;
        let _ = lines.next(); // column header
        let mut out = Self::zero(n, max_degree)?;
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("bad coefficient row: {line}")));
            }
            let m: usize = fields[0]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("m: {e}")))?;
            let j: usize = fields[1]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("j: {e}")))?;
            let v: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("value: {e}")))?;
            out.set(m, j, real(v))?;
        }
        Ok(out)
    }

    fn refresh_even(&mut self) {
        let mut odd_mass = T::zero();
        for (m, row) in self.entries.iter().enumerate() {
            if m % 2 == 1 {
                for &v in row {
                    odd_mass = odd_mass.max(v.abs());
                }
            }
        }
        let scale = T::one() + self.l2_norm();
        self.even = odd_mass <= even_tol::<T>() * scale;
    }

    /// Largest absolute odd-degree coefficient, for diagnostics.
    pub fn odd_mass(&self) -> T {
        let mut odd = T::zero();
        for (m, row) in self.entries.iter().enumerate() {
            if m % 2 == 1 {
                for &v in row {
                    odd = odd.max(v.abs());
                }
            }
        }
        odd
    }
}

/// Value of the j-th orthonormal real spherical harmonic of degree m at the
/// unit vector x, for n in {2, 3}.
pub fn basis_eval<T: Real>(n: usize, m: usize, j: usize, x: &[T]) -> Result<T> {
    let count = dim_harmonics(n, m)?;
    if j < 1 || j > count {
        return Err(Error::Domain(format!(
            "order index j={j} out of 1..={count} for (n={n}, m={m})"
        )));
    }
    let basis = basis_all(n, m, x)?;
    let offset: usize = (0..m).map(|d| dim_harmonics(n, d).unwrap()).sum();
    Ok(basis[offset + j - 1])
}

/// Evaluate every basis function of degree <= max_degree at x, ordered by
/// (m, j). This is the shared fast path behind expansion and synthesis.
pub fn basis_all<T: Real>(n: usize, max_degree: usize, x: &[T]) -> Result<Vec<T>> {
    let mut scratch = BasisScratch::new();
    scratch.eval(n, max_degree, x)?;
    Ok(scratch.out)
}

/// Reusable buffers for dense basis evaluation over many points.
pub struct BasisScratch<T> {
    pub out: Vec<T>,
    alf: Vec<T>,
    cosk: Vec<T>,
    sink: Vec<T>,
}

impl<T: Real> BasisScratch<T> {
    pub fn new() -> Self {
        BasisScratch {
            out: Vec::new(),
            alf: Vec::new(),
            cosk: Vec::new(),
            sink: Vec::new(),
        }
    }

    /// Fill `self.out` with the basis values at x, ordered by (m, j).
    pub fn eval(&mut self, n: usize, max_degree: usize, x: &[T]) -> Result<()> {
        match n {
            2 => {
                if x.len() != 2 {
                    return Err(Error::Domain("point must have 2 components".into()));
                }
                let theta = x[1].atan2(x[0]);
                let inv_sqrt_tau = T::TAU().sqrt().recip();
                let inv_sqrt_pi = T::PI().sqrt().recip();
                self.out.clear();
                self.out.push(inv_sqrt_tau);
                for m in 1..=max_degree {
                    let arg = theta * real(m);
                    self.out.push(arg.cos() * inv_sqrt_pi);
                    self.out.push(arg.sin() * inv_sqrt_pi);
                }
                Ok(())
            }
            3 => {
                if x.len() != 3 {
                    return Err(Error::Domain("point must have 3 components".into()));
                }
                let z = x[2].min(T::one()).max(-T::one());
                let phi = x[1].atan2(x[0]);
                normalized_alf_table(max_degree, z, &mut self.alf);
                // cos(k phi), sin(k phi) by recurrence
                let (c1, s1) = (phi.cos(), phi.sin());
                self.cosk.clear();
                self.sink.clear();
                self.cosk.push(T::one());
                self.sink.push(T::zero());
                for k in 1..=max_degree {
                    self.cosk
                        .push(self.cosk[k - 1] * c1 - self.sink[k - 1] * s1);
                    self.sink
                        .push(self.sink[k - 1] * c1 + self.cosk[k - 1] * s1);
                }
                let sqrt2 = T::SQRT_2();
                self.out.clear();
                for l in 0..=max_degree {
                    self.out.push(self.alf[idx(l, 0)]);
                    for k in 1..=l {
                        let s = sqrt2 * self.alf[idx(l, k)];
                        self.out.push(s * self.cosk[k]);
                        self.out.push(s * self.sink[k]);
                    }
                }
                Ok(())
            }
            _ => Err(Error::UnsupportedDimension {
                n,
                detail: "explicit harmonic bases exist for n in {2, 3}",
            }),
        }
    }
}

impl<T: Real> Default for BasisScratch<T> {
    fn default() -> Self {
        Self::new()
    }
}

#[inline]
fn idx(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Fully normalized associated Legendre table S_l^m(z) for l <= max_degree,
/// 0 <= m <= l, such that Y_{l m} = S_l^m(cos th) * {1, sqrt2 cos m phi,
/// sqrt2 sin m phi} is orthonormal on S^2. The normalization is applied
/// inside the recurrence so degrees up to a few hundred stay in range.
fn normalized_alf_table<T: Real>(max_degree: usize, z: T, p: &mut Vec<T>) {
    let s = (T::one() - z * z).max(T::zero()).sqrt();
    let len = idx(max_degree, max_degree) + 1;
    p.clear();
    p.resize(len, T::zero());
    // S_0^0 = 1 / sqrt(4 pi)
    p[0] = (real::<T, _>(4.0) * T::PI()).sqrt().recip();
    for m in 1..=max_degree {
        // diagonal: S_m^m = s sqrt((2m+1)/(2m)) S_{m-1}^{m-1}
        let mf: T = real(m);
        let two = real::<T, _>(2);
        p[idx(m, m)] = p[idx(m - 1, m - 1)] * s * ((two * mf + T::one()) / (two * mf)).sqrt();
    }
    for m in 0..max_degree {
        // first superdiagonal: S_{m+1}^m = z sqrt(2m+3) S_m^m
        let mf: T = real(m);
        p[idx(m + 1, m)] = p[idx(m, m)] * z * (real::<T, _>(2) * mf + real(3)).sqrt();
        // upward in l
        for l in (m + 2)..=max_degree {
            let lf: T = real(l);
            let mf2 = mf * mf;
            let a = ((real::<T, _>(4) * lf * lf - T::one()) / (lf * lf - mf2)).sqrt();
            let prev_lf: T = lf - T::one();
            let b = ((prev_lf * prev_lf - mf2) / (real::<T, _>(4) * prev_lf * prev_lf - T::one()))
                .sqrt();
            p[idx(l, m)] = a * (z * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
        }
    }
}

/// Addition theorem check value: sum_j Y_{m j}(x)^2, which equals
/// N(n, m) / omega_n independently of x.
pub fn addition_theorem_sum<T: Real>(n: usize, m: usize, x: &[T]) -> Result<T> {
    let basis = basis_all(n, m, x)?;
    let offset: usize = (0..m).map(|d| dim_harmonics(n, d).unwrap()).sum();
    Ok(basis[offset..]
        .iter()
        .fold(T::zero(), |acc, &v| acc + v * v))
}

/// Expand a pointwise-sampled function into harmonics of degree <= max_degree
/// by grid quadrature of the inner products (f, Y_{m j}).
///
/// The grid must integrate products of two degree-max_degree harmonics
/// exactly, i.e. its exact degree must be at least 2 max_degree.
pub fn expand<T: Real, F: Fn(&[T]) -> T>(
    f: F,
    grid: &SphereGrid<T>,
    max_degree: usize,
) -> Result<HarmonicCoefficients<T>> {
    let needed = 2 * max_degree;
    if grid.exact_degree() < needed {
        return Err(Error::ResolutionTooCoarse {
            max_degree,
            needed,
            got: grid.exact_degree(),
        });
    }
    let n = grid.n();
    let mut coeffs = HarmonicCoefficients::zero(n, max_degree)?;
    let total: usize = coeffs.entries.iter().map(Vec::len).sum();
    // Compensated summation: the inner products must come out clean enough
    // that true zeros land below the clip threshold even after thousands of
    // nodes.
    let mut flat = vec![T::zero(); total];
    let mut comp = vec![T::zero(); total];
    let mut scratch = BasisScratch::new();
    for (x, w) in grid.iter() {
        let fv = f(x) * w;
        if fv.is_zero() {
            continue;
        }
        scratch.eval(n, max_degree, x)?;
        for ((acc, carry), &b) in flat.iter_mut().zip(comp.iter_mut()).zip(&scratch.out) {
            let term = fv * b - *carry;
            let next = *acc + term;
            *carry = (next - *acc) - term;
            *acc = next;
        }
    }
    let clip = zero_clip::<T>();
    let mut k = 0;
    for row in coeffs.entries.iter_mut() {
        for slot in row.iter_mut() {
            *slot = if flat[k].abs() < clip {
                T::zero()
            } else {
                flat[k]
            };
            k += 1;
        }
    }
    coeffs.refresh_even();
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::build_grid;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn dimension_formula() {
        assert_eq!(dim_harmonics(3, 0).unwrap(), 1);
        assert_eq!(dim_harmonics(3, 2).unwrap(), 5);
        assert_eq!(dim_harmonics(4, 2).unwrap(), 9);
        assert_eq!(dim_harmonics(2, 0).unwrap(), 1);
        for m in 1..=10 {
            assert_eq!(dim_harmonics(2, m).unwrap(), 2);
            assert_eq!(dim_harmonics(3, m).unwrap(), 2 * m + 1);
        }
        // against the Gamma form of the dimension count
        use crate::specfun::gamma_ln;
        for n in 3..=6usize {
            for m in 1..=12usize {
                let want = ((2 * m + n - 2) as f64
                    * (gamma_ln((n + m - 2) as f64).unwrap()
                        - gamma_ln((m + 1) as f64).unwrap()
                        - gamma_ln((n - 1) as f64).unwrap())
                    .exp())
                .round() as usize;
                assert_eq!(dim_harmonics(n, m).unwrap(), want, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn basis_values() {
        // Y_{0 1} = 1/sqrt(omega_n)
        let x = [0.48, -0.6, 0.64];
        let y0 = basis_eval(3, 0, 1, &x).unwrap();
        assert!((y0 - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-14);
        // n = 2, degree 1 cosine at theta = 0
        let y = basis_eval(2, 1, 1, &[1.0, 0.0]).unwrap();
        assert!((y - 1.0 / PI.sqrt()).abs() < 1e-14);
        // degree-1 zonal harmonic at the pole: sqrt(3 / (4 pi)); the cos/sin
        // pair vanishes there.
        let pole = [0.0, 0.0, 1.0];
        assert!((basis_eval(3, 1, 1, &pole).unwrap() - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-13);
        assert!(basis_eval(3, 1, 2, &pole).unwrap().abs() < 1e-13);
        assert!(basis_eval(3, 1, 3, &pole).unwrap().abs() < 1e-13);
    }

    #[test]
    fn orthonormality_gram_matrix() {
        let max_degree = 6;
        for &n in &[2usize, 3] {
            let grid = build_grid::<f64>(n, 2 * max_degree + 2).unwrap();
            let total: usize = (0..=max_degree).map(|m| dim_harmonics(n, m).unwrap()).sum();
            let mut gram = vec![0.0f64; total * total];
            for (x, w) in grid.iter() {
                let basis = basis_all(n, max_degree, x).unwrap();
                for a in 0..total {
                    for b in a..total {
                        gram[a * total + b] += w * basis[a] * basis[b];
                    }
                }
            }
            for a in 0..total {
                for b in a..total {
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (gram[a * total + b] - want).abs() <= 1e-9,
                        "n={n}: gram[{a},{b}] = {}",
                        gram[a * total + b]
                    );
                }
            }
        }
    }

    #[test]
    fn addition_theorem_random_points() {
        use crate::sampling::{random_unit_vector, seeded_rng};
        let mut rng = seeded_rng(7);
        for &n in &[2usize, 3] {
            let omega = surface_area::<f64>(n).unwrap();
            for m in 0..=10usize {
                let want = dim_harmonics(n, m).unwrap() as f64 / omega;
                for _ in 0..100 {
                    let x = random_unit_vector::<f64>(&mut rng, n);
                    let got = addition_theorem_sum(n, m, &x).unwrap();
                    assert!((got - want).abs() <= 1e-9, "n={n} m={m}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn expand_constant_and_single_harmonic() {
        let grid = build_grid::<f64>(3, 20).unwrap();
        let c = expand(|_| 1.0, &grid, 6).unwrap();
        assert!((c.get(0, 1) - (4.0 * PI).sqrt()).abs() < 1e-10);
        for (m, _j, v) in c.iter() {
            if m > 0 {
                assert!(v.abs() <= 1e-10);
            }
        }
        assert!(c.even());

        let f = |x: &[f64]| basis_eval(3, 4, 2, x).unwrap();
        let c = expand(f, &grid, 6).unwrap();
        assert!((c.get(4, 2) - 1.0).abs() < 1e-10);
        let stray: f64 = c
            .iter()
            .filter(|&(m, j, _)| (m, j) != (4, 2))
            .map(|(_, _, v)| v.abs())
            .fold(0.0, f64::max);
        assert!(stray <= 1e-10);
    }

    #[test]
    fn expand_z_squared() {
        // x3^2 = 1/3 + (2/3) P_2(x3): degrees {0, 2} only, reconstructs.
        let grid = build_grid::<f64>(3, 20).unwrap();
        let c = expand(|x: &[f64]| x[2] * x[2], &grid, 8).unwrap();
        for (m, _, _) in c.iter() {
            assert!(m == 0 || m == 2, "unexpected degree {m}");
        }
        for (x, _) in grid.iter() {
            let err = (c.evaluate(x) - x[2] * x[2]).abs();
            assert!(err <= 1e-10);
        }
        // Parseval against the analytic moment: int x3^4 = 4 pi / 5.
        assert!((c.l2_norm() - (4.0 * PI / 5.0).sqrt()).abs() <= 1e-9);
        assert!(c.even());
        // analytic coefficients: (0,1) = sqrt(4 pi)/3, (2,1) = (2/3) sqrt(4 pi / 5)
        assert!((c.get(0, 1) - (4.0 * PI).sqrt() / 3.0).abs() <= 1e-12);
        assert!((c.get(2, 1) - 2.0 / 3.0 * (4.0 * PI / 5.0).sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn expansion_round_trip_band_limited() {
        use crate::sampling::{random_unit_vector, seeded_rng};
        let mut rng = seeded_rng(11);
        let grid = build_grid::<f64>(3, 24).unwrap();
        // a fixed band-limited function of degree 5
        let truth = |x: &[f64]| {
            1.0 + 0.7 * basis_eval(3, 2, 3, x).unwrap() - 0.4 * basis_eval(3, 5, 7, x).unwrap()
                + 0.05 * basis_eval(3, 4, 1, x).unwrap()
        };
        let c = expand(truth, &grid, 8).unwrap();
        for _ in 0..50 {
            let x = random_unit_vector::<f64>(&mut rng, 3);
            assert!((c.evaluate(&x) - truth(&x)).abs() <= 1e-8);
        }
        assert!(!c.even()); // degree-5 content present
    }

    #[test]
    fn even_functions_have_clean_odd_degrees() {
        let grid = build_grid::<f64>(3, 24).unwrap();
        let c = expand(|x: &[f64]| (x[0] * x[1]).abs() + x[2] * x[2], &grid, 8).unwrap();
        assert!(c.even());
        assert!(c.odd_mass() <= 1e-10);
    }

    #[test]
    fn laplace_beltrami_spectral_action() {
        let mut c = HarmonicCoefficients::<f64>::zero(3, 2).unwrap();
        c.set(0, 1, 2.0).unwrap();
        c.set(1, 2, 1.0).unwrap();
        c.set(2, 5, -3.0).unwrap();
        let lap = c.laplace_beltrami_apply(1);
        assert_eq!(lap.get(0, 1), 0.0);
        assert_eq!(lap.get(1, 2), -2.0); // eigenvalue -1*(1+1) = -2
        assert_eq!(lap.get(2, 5), 18.0); // -(-6)*-3
        let lap2 = c.laplace_beltrami_apply(2);
        assert_eq!(lap2.get(2, 5), -108.0); // 36 * -3
    }

    #[test]
    fn self_adjointness_coefficientwise() {
        // <Delta^r G, H> = <G, Delta^r H> for band-limited G, H.
        let grid = build_grid::<f64>(3, 16).unwrap();
        let g = expand(|x: &[f64]| x[0] * x[0] + 0.3 * x[2], &grid, 4).unwrap();
        let h = expand(|x: &[f64]| x[1] * x[2] + 0.1, &grid, 4).unwrap();
        for r in 1..=3u32 {
            let lg = g.laplace_beltrami_apply(r);
            let lh = h.laplace_beltrami_apply(r);
            let a: f64 = lg.iter().map(|(m, j, v)| v * h.get(m, j)).sum();
            let b: f64 = g.iter().map(|(m, j, v)| v * lh.get(m, j)).sum();
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
        }
    }

    #[test]
    fn parseval_against_quadrature() {
        let grid = build_grid::<f64>(3, 20).unwrap();
        let f = |x: &[f64]| 0.3 + x[0] * x[1] + 0.2 * x[2] * x[2];
        let c = expand(f, &grid, 6).unwrap();
        let quad_sq = grid.quadrature(|x| f(x) * f(x));
        let coeff_sq = c.l2_norm().powi(2);
        assert!((quad_sq - coeff_sq).abs() <= 1e-8 * quad_sq);
    }

    #[test]
    fn expansion_rejects_coarse_grids() {
        let grid = build_grid::<f64>(3, 8).unwrap();
        assert!(matches!(
            expand(|_| 1.0, &grid, 6),
            Err(Error::ResolutionTooCoarse { .. })
        ));
    }

    #[test]
    fn coefficient_csv_round_trip() {
        let grid = build_grid::<f64>(3, 16).unwrap();
        let c = expand(|x: &[f64]| x[2] * x[2] + 0.25, &grid, 4).unwrap();
        let back = HarmonicCoefficients::<f64>::from_csv(&c.to_csv()).unwrap();
        assert_eq!(back.n(), 3);
        assert_eq!(back.max_degree(), 4);
        assert_eq!(back.even(), c.even());
        for (m, j, v) in c.iter() {
            assert_eq!(back.get(m, j), v, "({m},{j})");
        }
    }

    #[test]
    fn harmonics_are_mean_zero_on_grids() {
        // Every degree >= 1 harmonic integrates to 0 over a symmetric grid
        // whose exactness covers it.
        for &n in &[2usize, 3] {
            let res = 16;
            let grid = build_grid::<f64>(n, res).unwrap();
            for m in 1..=res / 2 {
                for j in 1..=dim_harmonics(n, m).unwrap() {
                    let integral = grid.quadrature(|x| basis_eval(n, m, j, x).unwrap());
                    assert!(
                        integral.abs() <= 1e-9,
                        "n={n} Y_({m},{j}) mean {integral:e}"
                    );
                }
            }
        }
    }
}
