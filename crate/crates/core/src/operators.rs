//! Smoothing operators and the ReLU spline quasi-interpolant.
//!
//! The near-best operator damps a zonal expansion with the smooth cutoff
//! [`eta`]; on band-limited zonal functions it acts coefficientwise, which is
//! exact and keeps quadrature out of the trusted computing base. Its integral
//! form is discretized by [`DiscretizedLn`], the Monte-Carlo average that the
//! network construction ultimately realizes. The univariate side lives on a
//! uniform mesh: hat functions built from three ReLUs, the quasi-interpolant
//! they span, and the second-difference extension that rewrites the
//! quasi-interpolant as a plain combination of shifted ReLUs.

use crate::error::{Error, Result};
use crate::harmonics::{check_dim, laplace_eigenvalue, zonal_series, BandLimitedZonal};
use crate::sphere::SpherePoint;

/// The fixed smooth cutoff: 1 on [0, 1], 0 on [2, inf), and the bump quotient
/// `h(2-t) / (h(2-t) + h(t-1))` with `h(s) = exp(-1/s)` in between.
///
/// Nonincreasing, values in [0, 1], and `eta(1.5) = 1/2` by symmetry.
pub fn eta(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        let a = bump(2.0 - t);
        let b = bump(t - 1.0);
        a / (a + b)
    }
}

fn bump(s: f64) -> f64 {
    (-1.0 / s).exp()
}

/// The polynomial kernel `sum_{k=0}^{2n} (1+lambda_k)^{-r/2} eta(k/n) Z_k(t)`
/// on [-1, 1].
///
/// With `r = 0` this is the plain smoothing kernel of the near-best operator;
/// positive `r` shifts smoothness onto the kernel so that the paired function
/// in the discretized operator is `(-Delta_0 + I)^{r/2} f`.
#[derive(Debug, Clone)]
pub struct SmoothedKernel {
    n: usize,
    r: f64,
    dim: usize,
    coeffs: Vec<f64>,
}

impl SmoothedKernel {
    pub fn new(n: usize, r: f64, d: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("kernel scale n must be >= 1"));
        }
        if !r.is_finite() || r < 0.0 {
            return Err(Error::invalid(format!(
                "kernel smoothing exponent must be >= 0, got {r}"
            )));
        }
        check_dim(d)?;
        let coeffs = (0..=2 * n)
            .map(|k| {
                (1.0 + laplace_eigenvalue(k, d) as f64).powf(-r / 2.0) * eta(k as f64 / n as f64)
            })
            .collect();
        Ok(Self {
            n,
            r,
            dim: d,
            coeffs,
        })
    }

    pub fn scale(&self) -> usize {
        self.n
    }

    pub fn smoothing(&self) -> f64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient of `Z_k` in the expansion; zero for `k >= 2n`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree of the kernel as a polynomial in `t` (at most `2n`).
    pub fn poly_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        zonal_series(&self.coeffs, self.dim, t)
    }

    /// Max of `|kernel|` over a uniform grid of `points` values on [-1, 1].
    pub fn sup_norm_on_grid(&self, points: usize) -> f64 {
        assert!(points >= 2);
        (0..points)
            .map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64)
            .map(|t| self.eval(t).abs())
            .fold(0.0, f64::max)
    }

    /// Kernel samples at the interior mesh nodes `t_2, ..., t_{2N+2}`.
    pub fn node_samples(&self, mesh: &SplineMesh) -> Vec<f64> {
        mesh.interior_nodes().map(|t| self.eval(t)).collect()
    }
}

/// Applies the near-best smoothing operator at scale `n`: multiplies the
/// `k`-th coefficient by `eta(k/n)`.
///
/// Exact on band-limited zonal functions (the integral and coefficient forms
/// agree there); reproduces `f` whenever `degree(f) <= n`.
pub fn apply_ln(f: &BandLimitedZonal, n: usize) -> Result<BandLimitedZonal> {
    if n < 1 {
        return Err(Error::invalid("operator scale n must be >= 1"));
    }
    let coeffs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &a)| eta(k as f64 / n as f64) * a)
        .collect();
    BandLimitedZonal::new(f.pole().clone(), coeffs)
}

/// The Monte-Carlo discretization of the smoothing operator over a fixed
/// sample: `x -> (1/m) sum_i F_r(y_i) kernel(<x, y_i>)` with
/// `F_r = (-Delta_0 + I)^{r/2} f`.
#[derive(Debug, Clone)]
pub struct DiscretizedLn {
    kernel: SmoothedKernel,
    samples: Vec<SpherePoint>,
    fr_values: Vec<f64>,
}

impl DiscretizedLn {
    pub fn new(f: &BandLimitedZonal, r: f64, n: usize, samples: Vec<SpherePoint>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("discretization sample list"));
        }
        let d = f.dim();
        for y in &samples {
            if y.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: y.dim(),
                });
            }
        }
        let kernel = SmoothedKernel::new(n, r, d)?;
        let f_r = f.fractional_power(r / 2.0);
        let fr_values = samples
            .iter()
            .map(|y| f_r.eval(y))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kernel,
            samples,
            fr_values,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn kernel(&self) -> &SmoothedKernel {
        &self.kernel
    }

    pub fn fr_values(&self) -> &[f64] {
        &self.fr_values
    }

    pub fn samples(&self) -> &[SpherePoint] {
        &self.samples
    }

    pub fn eval(&self, x: &SpherePoint) -> Result<f64> {
        if x.dim() != self.kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kernel.dim(),
                got: x.dim(),
            });
        }
        let m = self.samples.len() as f64;
        let mut acc = 0.0;
        for (y, &fr) in self.samples.iter().zip(&self.fr_values) {
            let t = x.dot(y).clamp(-1.0, 1.0);
            acc += fr * self.kernel.eval(t);
        }
        Ok(acc / m)
    }
}

/// One-shot form of [`DiscretizedLn`].
pub fn discretized_ln(
    f: &BandLimitedZonal,
    r: f64,
    n: usize,
    samples: &[SpherePoint],
    x: &SpherePoint,
) -> Result<f64> {
    DiscretizedLn::new(f, r, n, samples.to_vec())?.eval(x)
}

/// Uniform mesh `t_i = -1 + (i-2)/N`, `i = 1, ..., 2N+3`, spanning
/// `[-1 - 1/N, 1 + 1/N]` with spacing `1/N`.
///
/// Node indices throughout this module are the 1-based labels `t_1, ...,
/// t_{2N+3}`; the two extreme nodes lie outside [-1, 1] and only ever appear
/// as ReLU breakpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplineMesh {
    n: usize,
}

impl SplineMesh {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("mesh parameter N must be >= 1"));
        }
        Ok(Self { n })
    }

    /// The mesh parameter N.
    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        2 * self.n + 3
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Node `t_i` for a 1-based label `i` in `1..=2N+3`.
    pub fn node(&self, i: usize) -> f64 {
        assert!(
            (1..=self.node_count()).contains(&i),
            "node label {i} out of range 1..={}",
            self.node_count()
        );
        -1.0 + (i as f64 - 2.0) / self.n as f64
    }

    /// The interior nodes `t_2, ..., t_{2N+2}`, which span exactly [-1, 1].
    pub fn interior_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (2..=2 * self.n + 2).map(move |i| self.node(i))
    }

    pub fn interior_count(&self) -> usize {
        2 * self.n + 1
    }
}

fn relu(u: f64) -> f64 {
    u.max(0.0)
}

/// Hat function `delta_i(u) = N (relu(u - t_{i-1}) - 2 relu(u - t_i) +
/// relu(u - t_{i+1}))` for an interior label `i` in `2..=2N+2`.
///
/// Peaks at `t_i` with value 1 and vanishes outside `(t_{i-1}, t_{i+1})`.
pub fn delta_eval(mesh: &SplineMesh, i: usize, u: f64) -> Result<f64> {
    let max = 2 * mesh.resolution() + 2;
    if !(2..=max).contains(&i) {
        return Err(Error::IndexOutOfRange {
            index: i,
            min: 2,
            max,
        });
    }
    let n = mesh.resolution() as f64;
    Ok(
        n * (relu(u - mesh.node(i - 1)) - 2.0 * relu(u - mesh.node(i))
            + relu(u - mesh.node(i + 1))),
    )
}

/// The quasi-interpolant `L_t(g)(u) = sum_{i=2}^{2N+2} g(t_i) delta_i(u)`.
///
/// Interpolates `g` at the interior nodes, never exceeds `sup |g|`, and on
/// [-1, 1] its error is at most `2 omega(g, 1/N)`; it reproduces affine
/// functions exactly there.
pub fn apply_lt(g: impl Fn(f64) -> f64, mesh: &SplineMesh, u: f64) -> f64 {
    let values: Vec<f64> = mesh.interior_nodes().map(&g).collect();
    apply_lt_values(&values, mesh, u)
}

/// [`apply_lt`] with the node samples `g(t_2), ..., g(t_{2N+2})` given
/// directly.
pub fn apply_lt_values(values: &[f64], mesh: &SplineMesh, u: f64) -> f64 {
    assert_eq!(values.len(), mesh.interior_count(), "node sample length");
    values
        .iter()
        .enumerate()
        .map(|(offset, &v)| v * delta_eval(mesh, offset + 2, u).expect("interior label"))
        .sum()
}

/// The second-difference extension taking node samples
/// `v = (g(t_2), ..., g(t_{2N+2}))` to the 2N+3 ReLU coefficients of the
/// quasi-interpolant.
///
/// Subscripts in the defining formula are node labels, so with `z_k = v[k-2]`
/// the output is `(z_2, z_3 - 2 z_2, ..., z_{i-1} - 2 z_i + z_{i+1}, ...,
/// z_{2N+1} - 2 z_{2N+2}, z_{2N+2})`. It satisfies, for `u` in [-1, 1],
///
/// `L_t(g)(u) = N * sum_{i=1}^{2N+3} out_i relu(u - t_i)`.
pub fn second_difference(mesh: &SplineMesh, values: &[f64]) -> Result<Vec<f64>> {
    let len = mesh.interior_count();
    if values.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: values.len(),
        });
    }
    // z(k) = g(t_k) for node labels k = 2..=2N+2.
    let z = |k: usize| values[k - 2];
    let count = mesh.node_count();
    let mut out = Vec::with_capacity(count);
    out.push(z(2));
    out.push(z(3) - 2.0 * z(2));
    for i in 3..=2 * mesh.resolution() + 1 {
        out.push(z(i - 1) - 2.0 * z(i) + z(i + 1));
    }
    out.push(z(2 * mesh.resolution() + 1) - 2.0 * z(2 * mesh.resolution() + 2));
    out.push(z(2 * mesh.resolution() + 2));
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::sphere::{sample_uniform, SpherePoint};
    use rand::Rng;

    #[test]
    fn eta_examples() {
        assert_eq!(eta(0.0), 1.0);
        assert_eq!(eta(0.5), 1.0);
        assert_eq!(eta(1.0), 1.0);
        assert_eq!(eta(2.0), 0.0);
        assert_eq!(eta(3.0), 0.0);
        assert!((eta(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eta_is_nonincreasing_in_unit_range() {
        let mut last = 1.0;
        for i in 0..=1000 {
            let t = 2.5 * i as f64 / 1000.0;
            let v = eta(t);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= last + 1e-15, "eta increased at t = {t}");
            last = v;
        }
    }

    #[test]
    fn kernel_n1_r0_is_affine() {
        let k = SmoothedKernel::new(1, 0.0, 3).unwrap();
        for &t in &[-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert!((k.eval(t) - (1.0 + 3.0 * t)).abs() < 1e-13);
        }
        assert_eq!(k.poly_degree(), 2);
        assert_eq!(k.coeffs()[2], 0.0);
    }

    #[test]
    fn kernel_n1_r2_rescales_degree_one() {
        // (1 + lambda_1)^{-1} * 3t = t on S^2.
        let k = SmoothedKernel::new(1, 2.0, 3).unwrap();
        for &t in &[-0.8, 0.1, 1.0] {
            assert!((k.eval(t) - (1.0 + t)).abs() < 1e-13);
        }
    }

    #[test]
    fn kernel_r0_coefficients_are_plateau_values() {
        let k = SmoothedKernel::new(4, 0.0, 5).unwrap();
        for (idx, &c) in k.coeffs().iter().enumerate() {
            if idx <= 4 {
                assert_eq!(c, 1.0);
            }
        }
        assert_eq!(*k.coeffs().last().unwrap(), 0.0);
    }

    #[test]
    fn kernel_parity() {
        // Direct-summation oracle: even and odd parts flip independently.
        let k = SmoothedKernel::new(3, 1.0, 4).unwrap();
        for &t in &[0.3, 0.9] {
            let even: f64 = k
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(i, _)| i % 2 == 0)
                .map(|(i, &c)| c * crate::harmonics::zonal_kernel(i, 4, t))
                .sum();
            let odd: f64 = k
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(i, _)| i % 2 == 1)
                .map(|(i, &c)| c * crate::harmonics::zonal_kernel(i, 4, t))
                .sum();
            assert!((k.eval(t) - (even + odd)).abs() < 1e-12);
            assert!((k.eval(-t) - (even - odd)).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_ln_reproduces_low_degree() {
        let pole = SpherePoint::north_pole(3).unwrap();
        let f = BandLimitedZonal::new(pole, vec![1.0, -0.5, 0.25]).unwrap();
        let out = apply_ln(&f, 2).unwrap();
        assert_eq!(out.coeffs(), f.coeffs());
        let out = apply_ln(&f, 5).unwrap();
        assert_eq!(out.coeffs(), f.coeffs());
    }

    #[test]
    fn apply_ln_kills_high_degrees() {
        let pole = SpherePoint::north_pole(3).unwrap();
        let mut coeffs = vec![0.0; 9];
        coeffs[8] = 1.0;
        coeffs[4] = 1.0;
        let f = BandLimitedZonal::new(pole, coeffs).unwrap();
        let out = apply_ln(&f, 2).unwrap();
        // k = 4 = 2n and k = 8 > 2n are both outside the cutoff support.
        assert_eq!(out.coeffs()[8], 0.0);
        assert_eq!(out.coeffs()[4], 0.0);
    }

    #[test]
    fn apply_ln_midpoint_coefficient() {
        let pole = SpherePoint::north_pole(3).unwrap();
        let mut coeffs = vec![0.0; 4];
        coeffs[3] = 1.0;
        let f = BandLimitedZonal::new(pole, coeffs).unwrap();
        let out = apply_ln(&f, 2).unwrap();
        assert!((out.coeffs()[3] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn discretized_ln_single_sample_at_pole() {
        let pole = SpherePoint::north_pole(3).unwrap();
        let f = BandLimitedZonal::new(pole.clone(), vec![1.0]).unwrap();
        // F_0(p) * l_1(1) = 1 * (1 + 3) = 4.
        let value = discretized_ln(&f, 0.0, 1, std::slice::from_ref(&pole), &pole).unwrap();
        assert!((value - 4.0).abs() < 1e-13);
    }

    #[test]
    fn discretized_ln_zero_function() {
        let pole = SpherePoint::north_pole(4).unwrap();
        let f = BandLimitedZonal::new(pole.clone(), vec![0.0, 0.0, 0.0]).unwrap();
        let samples = sample_uniform(4, 50, 3).unwrap();
        let x = sample_uniform(4, 1, 4).unwrap().pop().unwrap();
        assert_eq!(discretized_ln(&f, 1.0, 2, &samples, &x).unwrap(), 0.0);
    }

    #[test]
    fn discretized_ln_empty_samples() {
        let pole = SpherePoint::north_pole(3).unwrap();
        let f = BandLimitedZonal::new(pole.clone(), vec![1.0]).unwrap();
        assert!(matches!(
            discretized_ln(&f, 0.0, 1, &[], &pole),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn discretized_ln_concentrates_on_smoothed_function() {
        // Monte-Carlo oracle: at m = 10^5 the sample mean agrees with the
        // smoothed function within 3 standard errors of the sampled terms.
        let d = 3;
        let r = 1.0;
        let n = 2;
        let pole = SpherePoint::north_pole(d).unwrap();
        let f = BandLimitedZonal::new(pole, vec![0.4, 0.3, -0.2, 0.1]).unwrap();
        let smoothed = apply_ln(&f, n).unwrap();
        let samples = sample_uniform(d, 100_000, 11).unwrap();
        let op = DiscretizedLn::new(&f, r, n, samples).unwrap();
        for (i, x) in sample_uniform(d, 3, 12).unwrap().iter().enumerate() {
            let mean = op.eval(x).unwrap();
            let expect = smoothed.eval(x).unwrap();
            // Standard error of the averaged terms.
            let terms: Vec<f64> = op
                .samples()
                .iter()
                .zip(op.fr_values())
                .map(|(y, &fr)| fr * op.kernel().eval(x.dot(y).clamp(-1.0, 1.0)))
                .collect();
            let m = terms.len() as f64;
            let var = terms.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
            let se = (var / m).sqrt();
            assert!(
                (mean - expect).abs() <= 3.0 * se,
                "x index {i}: |{mean} - {expect}| > 3 * {se}"
            );
        }
    }

    #[test]
    fn mesh_geometry() {
        let mesh = SplineMesh::new(4).unwrap();
        assert_eq!(mesh.node_count(), 11);
        assert!((mesh.node(1) - (-1.25)).abs() < 1e-15);
        assert!((mesh.node(2) - (-1.0)).abs() < 1e-15);
        assert!((mesh.node(11) - 1.25).abs() < 1e-15);
        assert!((mesh.node(10) - 1.0).abs() < 1e-15);
        let nodes: Vec<f64> = mesh.interior_nodes().collect();
        assert_eq!(nodes.len(), 9);
        for w in nodes.windows(2) {
            assert!((w[1] - w[0] - mesh.spacing()).abs() < 1e-15);
        }
    }

    #[test]
    fn hat_function_shape() {
        let mesh = SplineMesh::new(5).unwrap();
        for i in 2..=12 {
            assert!((delta_eval(&mesh, i, mesh.node(i)).unwrap() - 1.0).abs() < 1e-12);
            assert!(delta_eval(&mesh, i, mesh.node(i - 1)).unwrap().abs() < 1e-12);
            assert!(delta_eval(&mesh, i, mesh.node(i + 1)).unwrap().abs() < 1e-12);
            let mid = 0.5 * (mesh.node(i) + mesh.node(i + 1));
            assert!((delta_eval(&mesh, i, mid).unwrap() - 0.5).abs() < 1e-12);
        }
        assert!(delta_eval(&mesh, 1, 0.0).is_err());
        assert!(delta_eval(&mesh, 13, 0.0).is_err());
    }

    #[test]
    fn quasi_interpolant_reproduces_affine() {
        let mesh = SplineMesh::new(7).unwrap();
        let g = |u: f64| 0.6 * u - 0.3;
        for i in 0..=200 {
            let u = -1.0 + 2.0 * i as f64 / 200.0;
            assert!((apply_lt(g, &mesh, u) - g(u)).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn quasi_interpolant_interpolates_nodes() {
        let mesh = SplineMesh::new(6).unwrap();
        let g = |u: f64| (2.1 * u).sin();
        for t in mesh.interior_nodes() {
            assert!((apply_lt(g, &mesh, t) - g(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn quasi_interpolant_abs_error_bound() {
        // |u| with a node at 0 (N even): piecewise-linear interpolation error
        // is at most half the spacing.
        let mesh = SplineMesh::new(8).unwrap();
        let g = |u: f64| u.abs();
        let mut worst = 0.0f64;
        for i in 0..=2000 {
            let u = -1.0 + 2.0 * i as f64 / 2000.0;
            worst = worst.max((apply_lt(g, &mesh, u) - g(u)).abs());
        }
        assert!(worst <= 1.0 / 16.0 + 1e-12, "worst = {worst}");
    }

    #[test]
    fn quasi_interpolant_never_exceeds_sup() {
        let mesh = SplineMesh::new(9).unwrap();
        let g = |u: f64| (3.0 * u).cos();
        for i in 0..=500 {
            let u = -1.0 + 2.0 * i as f64 / 500.0;
            assert!(apply_lt(g, &mesh, u).abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn second_difference_example() {
        let mesh = SplineMesh::new(1).unwrap();
        // g(u) = u sampled at t_2, t_3, t_4 = -1, 0, 1.
        let out = second_difference(&mesh, &[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(out, vec![-1.0, 2.0, 0.0, -2.0, 1.0]);
    }

    #[test]
    fn second_difference_zero_and_length() {
        let mesh = SplineMesh::new(3).unwrap();
        let out = second_difference(&mesh, &[0.0; 7]).unwrap();
        assert_eq!(out, vec![0.0; 9]);
        assert!(matches!(
            second_difference(&mesh, &[0.0; 6]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn second_difference_relu_identity() {
        // The quasi-interpolant equals N * sum_i out_i relu(u - t_i) on
        // [-1, 1] for arbitrary node samples.
        let mut rand = rng::from_seed(5);
        for n in 1..=8 {
            let mesh = SplineMesh::new(n).unwrap();
            let values: Vec<f64> = (0..mesh.interior_count())
                .map(|_| rand.random_range(-2.0..2.0))
                .collect();
            let coeffs = second_difference(&mesh, &values).unwrap();
            for _ in 0..200 {
                let u: f64 = rand.random_range(-1.0..1.0);
                let via_relu: f64 = n as f64
                    * coeffs
                        .iter()
                        .enumerate()
                        .map(|(idx, &c)| c * relu(u - mesh.node(idx + 1)))
                        .sum::<f64>();
                let direct = apply_lt_values(&values, &mesh, u);
                assert!((via_relu - direct).abs() <= 1e-10, "N={n} u={u}");
            }
        }
    }
}
