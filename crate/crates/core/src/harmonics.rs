//! Gegenbauer polynomials, zonal reproducing kernels, and band-limited zonal
//! test functions.
//!
//! With `lambda = (d-2)/2` the degree-`n` reproducing kernel of the spherical
//! harmonics is the ridge function `Z_n(x, y) = ((n+lambda)/lambda) *
//! C_n^lambda(<x, y>)`, so every zonal expansion reduces to a univariate
//! Gegenbauer series in the inner product with the pole. The whole test
//! class of the crate is built from such expansions because projections,
//! fractional Laplacian powers, and Sobolev norms then become exact finite
//! sums: no quadrature enters any trusted computation.
//!
//! All kernel evaluations run the stable three-term forward recurrence in
//! `t`; explicit monomial coefficients are never formed.

use crate::constants::MAX_ZONAL_DEGREE;
use crate::error::{Error, Result};
use crate::sphere::SpherePoint;

/// Degree and parameter of a Gegenbauer polynomial `C_n^lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerParams {
    pub degree: usize,
    pub lambda: f64,
}

impl GegenbauerParams {
    /// Requires `lambda > -1/2`.
    pub fn new(degree: usize, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= -0.5 {
            return Err(Error::invalid(format!(
                "gegenbauer parameter must be > -1/2, got {lambda}"
            )));
        }
        Ok(Self { degree, lambda })
    }

    /// Parameter `lambda = (d-2)/2` attached to the sphere `S^{d-1}`.
    pub fn for_dimension(degree: usize, d: usize) -> Result<Self> {
        check_dim(d)?;
        Self::new(degree, lambda_for(d))
    }
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d < 3 {
        return Err(Error::invalid(format!("need dimension d >= 3, got {d}")));
    }
    Ok(())
}

pub(crate) fn lambda_for(d: usize) -> f64 {
    (d as f64 - 2.0) / 2.0
}

/// Evaluates `C_n^lambda(t)` by the three-term recurrence
/// `C_0 = 1`, `C_1 = 2 lambda t`,
/// `n C_n = 2(n + lambda - 1) t C_{n-1} - (n + 2 lambda - 2) C_{n-2}`.
pub fn gegenbauer_eval(params: GegenbauerParams, t: f64) -> f64 {
    let lambda = params.lambda;
    let n = params.degree;
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut curr = 2.0 * lambda * t;
    for k in 2..=n {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda - 1.0) * t * curr - (kf + 2.0 * lambda - 2.0) * prev) / kf;
        prev = curr;
        curr = next;
    }
    curr
}

/// Dimension `N(n, d)` of the space of degree-`n` spherical harmonics on
/// `S^{d-1}`: `binom(n+d-1, n) - binom(n+d-3, n-2)`, with the second term 0
/// for `n < 2`.
pub fn harmonic_dim(n: usize, d: usize) -> u64 {
    assert!(d >= 3, "need d >= 3");
    if n == 0 {
        return 1;
    }
    let first = binomial(n + d - 1, n);
    let second = if n >= 2 {
        binomial(n + d - 3, n - 2)
    } else {
        0
    };
    (first - second)
        .try_into()
        .expect("harmonic dimension exceeds u64")
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128).expect("binomial overflow");
        acc /= (i + 1) as u128;
    }
    acc
}

/// Eigenvalue `lambda_n = n(n + d - 2)` of the negated Laplace-Beltrami
/// operator on degree-`n` spherical harmonics.
pub fn laplace_eigenvalue(n: usize, d: usize) -> u64 {
    assert!(d >= 3, "need d >= 3");
    (n as u64) * (n as u64 + d as u64 - 2)
}

/// Reproducing kernel value `Z_n(t) = ((n + lambda)/lambda) C_n^lambda(t)`
/// with `lambda = (d-2)/2`. Satisfies `Z_n(1) = N(n, d)`.
pub fn zonal_kernel(n: usize, d: usize, t: f64) -> f64 {
    assert!(d >= 3, "need d >= 3");
    let lambda = lambda_for(d);
    let params = GegenbauerParams { degree: n, lambda };
    (n as f64 + lambda) / lambda * gegenbauer_eval(params, t)
}

/// Sobolev smoothness index `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::invalid(format!(
                "sobolev index must be positive, got {r}"
            )));
        }
        Ok(Self(r))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A band-limited zonal function `f(x) = sum_k a_k Z_k(p, x)` with pole `p`
/// and explicit coefficients.
///
/// The class is closed under the smoothing operator and under fractional
/// powers of `-Delta_0 + I`, and its Sobolev norms are exact finite sums,
/// which is why it is the crate's entire test-function class.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLimitedZonal {
    pole: SpherePoint,
    coeffs: Vec<f64>,
}

impl BandLimitedZonal {
    /// `coeffs[k]` multiplies `Z_k(pole, .)`. The degree is capped at
    /// [`MAX_ZONAL_DEGREE`] to keep the recurrences in a well conditioned
    /// range.
    pub fn new(pole: SpherePoint, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyInput("zonal coefficient vector"));
        }
        if coeffs.len() - 1 > MAX_ZONAL_DEGREE {
            return Err(Error::invalid(format!(
                "zonal degree {} exceeds the cap {MAX_ZONAL_DEGREE}",
                coeffs.len() - 1
            )));
        }
        Ok(Self { pole, coeffs })
    }

    pub fn pole(&self) -> &SpherePoint {
        &self.pole
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.pole.dim()
    }

    /// Largest `k` with `a_k != 0`; 0 for the zero function.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&a| a != 0.0).unwrap_or(0)
    }

    /// Evaluates the expansion at `x`.
    pub fn eval(&self, x: &SpherePoint) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        // Rounding can push the inner product of two unit vectors epsilon
        // outside [-1, 1]; clamp before the recurrence.
        let t = self.pole.dot(x).clamp(-1.0, 1.0);
        Ok(zonal_series(&self.coeffs, self.dim(), t))
    }

    /// Applies `(-Delta_0 + I)^alpha`: multiplies `a_k` by `(1+lambda_k)^alpha`.
    ///
    /// With `alpha = r/2` this produces the companion function `F_r` paired
    /// with the smoothed kernel in the discretized operator.
    pub fn fractional_power(&self, alpha: f64) -> Self {
        let d = self.dim();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &a)| (1.0 + laplace_eigenvalue(k, d) as f64).powf(alpha) * a)
            .collect();
        Self {
            pole: self.pole.clone(),
            coeffs,
        }
    }

    /// Exact `W_2^r` norm: `sqrt( sum_k (1+lambda_k)^r a_k^2 N(k, d) )`.
    pub fn sobolev_norm(&self, r: SobolevIndex) -> f64 {
        self.weighted_norm(r.value())
    }

    /// Plain `L_2` norm of the expansion (the `r = 0` case).
    pub fn l2_norm(&self) -> f64 {
        self.weighted_norm(0.0)
    }

    fn weighted_norm(&self, r: f64) -> f64 {
        let d = self.dim();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                (1.0 + laplace_eigenvalue(k, d) as f64).powf(r) * a * a * harmonic_dim(k, d) as f64
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Evaluates `sum_k coeffs[k] Z_k(t)` on `S^{d-1}` in one recurrence pass.
pub(crate) fn zonal_series(coeffs: &[f64], d: usize, t: f64) -> f64 {
    let lambda = lambda_for(d);
    let mut acc = 0.0;
    let mut prev = 1.0; // C_0
    let mut curr = 2.0 * lambda * t; // C_1
    for (k, &a) in coeffs.iter().enumerate() {
        let c = match k {
            0 => prev,
            1 => curr,
            _ => {
                let kf = k as f64;
                let next =
                    (2.0 * (kf + lambda - 1.0) * t * curr - (kf + 2.0 * lambda - 2.0) * prev) / kf;
                prev = curr;
                curr = next;
                next
            }
        };
        if a != 0.0 {
            acc += a * (k as f64 + lambda) / lambda * c;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::sample_uniform;
    use proptest::prelude::*;

    /// Independent binomial oracle (Pascal's triangle).
    fn binom_oracle(n: usize, k: usize) -> u64 {
        let mut row = vec![1u64];
        for _ in 0..n {
            let mut next = vec![1u64];
            for w in row.windows(2) {
                next.push(w[0] + w[1]);
            }
            next.push(1);
            row = next;
        }
        if k < row.len() {
            row[k]
        } else {
            0
        }
    }

    /// Independent Legendre recurrence oracle: P_n(t).
    fn legendre_oracle(n: usize, t: f64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let mut prev = 1.0;
        let mut curr = t;
        for k in 1..n {
            let kf = k as f64;
            let next = ((2.0 * kf + 1.0) * t * curr - kf * prev) / (kf + 1.0);
            prev = curr;
            curr = next;
        }
        curr
    }

    #[test]
    fn gegenbauer_low_degrees() {
        let c0 = GegenbauerParams::new(0, 0.5).unwrap();
        assert_eq!(gegenbauer_eval(c0, 0.3), 1.0);
        // C_1 = 2 lambda t
        let c1 = GegenbauerParams::new(1, 0.5).unwrap();
        assert!((gegenbauer_eval(c1, 0.3) - 0.3).abs() < 1e-15);
        // lambda = 1/2 gives Legendre; P_2(1) = 1.
        let c2 = GegenbauerParams::new(2, 0.5).unwrap();
        assert!((gegenbauer_eval(c2, 1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gegenbauer_matches_legendre_for_d3() {
        for n in 0..=60 {
            for &t in &[-1.0, -0.73, 0.0, 0.2, 0.99, 1.0] {
                let p = GegenbauerParams::for_dimension(n, 3).unwrap();
                let diff = (gegenbauer_eval(p, t) - legendre_oracle(n, t)).abs();
                assert!(diff < 1e-10, "n={n} t={t} diff={diff}");
            }
        }
    }

    #[test]
    fn gegenbauer_bounded_by_value_at_one() {
        // |C_n^lambda(t)| <= C_n^lambda(1) for lambda >= 1/2.
        for d in 3..=8usize {
            for n in 0..=50usize {
                let p = GegenbauerParams::for_dimension(n, d).unwrap();
                let at_one = gegenbauer_eval(p, 1.0);
                for i in 0..=400 {
                    let t = -1.0 + 2.0 * i as f64 / 400.0;
                    assert!(
                        gegenbauer_eval(p, t).abs() <= at_one * (1.0 + 1e-12),
                        "n={n} d={d} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn harmonic_dim_examples() {
        for d in 3..=8 {
            assert_eq!(harmonic_dim(0, d), 1);
        }
        assert_eq!(harmonic_dim(1, 3), binom_oracle(3, 1));
        assert_eq!(harmonic_dim(1, 3), 3);
        assert_eq!(harmonic_dim(2, 3), binom_oracle(4, 2) - binom_oracle(2, 0));
        assert_eq!(harmonic_dim(2, 3), 5);
        // Cross-check the multiplicative binomial against Pascal's triangle.
        for n in 0..=20 {
            for d in 3..=8 {
                let expect = binom_oracle(n + d - 1, n)
                    - if n >= 2 {
                        binom_oracle(n + d - 3, n - 2)
                    } else {
                        0
                    };
                assert_eq!(harmonic_dim(n, d), expect, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn laplace_eigenvalue_examples() {
        assert_eq!(laplace_eigenvalue(0, 5), 0);
        assert_eq!(laplace_eigenvalue(1, 3), 2);
        assert_eq!(laplace_eigenvalue(2, 3), 6);
    }

    #[test]
    fn zonal_kernel_at_one_is_dimension() {
        for d in 3..=8usize {
            for n in 0..=50usize {
                let expect = harmonic_dim(n, d) as f64;
                let got = zonal_kernel(n, d, 1.0);
                assert!(
                    (got - expect).abs() <= 1e-8 * expect,
                    "n={n} d={d}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn zonal_kernel_examples() {
        for &t in &[-0.9, 0.0, 0.4, 1.0] {
            assert!((zonal_kernel(1, 3, t) - 3.0 * t).abs() < 1e-14);
            assert!((zonal_kernel(0, 5, t) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn addition_theorem_consistency_d3() {
        // Z_n(t) = (2n+1) P_n(t) on S^2.
        for n in 0..=50 {
            for i in 0..=100 {
                let t = -1.0 + 2.0 * i as f64 / 100.0;
                let expect = (2 * n + 1) as f64 * legendre_oracle(n, t);
                assert!((zonal_kernel(n, 3, t) - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn zonal_eval_examples() {
        let pole = SpherePoint::north_pole(3).unwrap();
        let constant = BandLimitedZonal::new(pole.clone(), vec![1.0]).unwrap();
        let x = sample_uniform(3, 1, 9).unwrap().pop().unwrap();
        assert!((constant.eval(&x).unwrap() - 1.0).abs() < 1e-14);

        let z1 = BandLimitedZonal::new(pole.clone(), vec![0.0, 1.0]).unwrap();
        // Z_1(p, p) = N(1, 3) = 3.
        assert!((z1.eval(&pole).unwrap() - 3.0).abs() < 1e-13);
        // <p, x> = 0 gives 3 * P_1(0) = 0.
        let equator = SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(z1.eval(&equator).unwrap().abs() < 1e-13);
    }

    #[test]
    fn zonal_eval_dimension_mismatch() {
        let pole = SpherePoint::north_pole(3).unwrap();
        let f = BandLimitedZonal::new(pole, vec![1.0]).unwrap();
        let x4 = SpherePoint::north_pole(4).unwrap();
        assert!(matches!(f.eval(&x4), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fractional_power_examples() {
        let pole = SpherePoint::north_pole(3).unwrap();
        let f = BandLimitedZonal::new(pole, vec![0.0, 1.0]).unwrap();
        let same = f.fractional_power(0.0);
        assert_eq!(same.coeffs(), f.coeffs());
        // (1 + lambda_1)^1 = 3 on S^2.
        let powered = f.fractional_power(1.0);
        assert!((powered.coeffs()[1] - 3.0).abs() < 1e-14);
        assert_eq!(powered.coeffs()[0], 0.0);
    }

    #[test]
    fn degree_cap_is_enforced() {
        let pole = SpherePoint::north_pole(3).unwrap();
        assert!(BandLimitedZonal::new(pole.clone(), vec![0.0; 202]).is_err());
        assert!(BandLimitedZonal::new(pole, vec![0.0; 201]).is_ok());
    }

    #[test]
    fn sobolev_norm_examples() {
        let pole = SpherePoint::north_pole(3).unwrap();
        let constant = BandLimitedZonal::new(pole.clone(), vec![1.0]).unwrap();
        for &r in &[0.5, 1.0, 3.7] {
            let r = SobolevIndex::new(r).unwrap();
            assert!((constant.sobolev_norm(r) - 1.0).abs() < 1e-15);
        }
        let z1 = BandLimitedZonal::new(pole.clone(), vec![0.0, 1.0]).unwrap();
        // sqrt(3^1 * 1 * 3) = 3.
        assert!((z1.sobolev_norm(SobolevIndex::new(1.0).unwrap()) - 3.0).abs() < 1e-14);
        // r -> 0 limit is the plain L2 norm.
        let f = BandLimitedZonal::new(pole, vec![0.5, -0.25, 0.125]).unwrap();
        let direct: f64 = f
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, a)| a * a * harmonic_dim(k, 3) as f64)
            .sum::<f64>()
            .sqrt();
        assert!((f.l2_norm() - direct).abs() < 1e-15);
    }

    #[test]
    fn sobolev_index_must_be_positive() {
        assert!(SobolevIndex::new(0.0).is_err());
        assert!(SobolevIndex::new(-1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn fractional_power_roundtrip(
            alpha in 0.01f64..4.0,
            coeffs in proptest::collection::vec(-2.0f64..2.0, 1..12),
        ) {
            let pole = SpherePoint::north_pole(3).unwrap();
            let f = BandLimitedZonal::new(pole, coeffs).unwrap();
            let back = f.fractional_power(alpha).fractional_power(-alpha);
            for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }
}
