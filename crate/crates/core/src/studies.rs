//! Desk-scale empirical rate studies.
//!
//! Each runner sweeps one control parameter, measures grid sup errors, fits
//! a log-log slope, and enforces the bounds it is supposed to certify as
//! hard errors, never warnings: the additive-ridge error bound, the
//! free-parameter bounds, the Monte-Carlo slope window, and the trend of the
//! smooth-function study. Test functions come from built-in catalogs with
//! analytic Holder seminorms and moduli of continuity, so every asserted
//! bound is computable without estimation.
//!
//! Reproducibility: a study derives all of its randomness from the config
//! seed through numbered substreams, so rerunning a config reproduces the
//! report byte for byte. Where the underlying error bound has an unknown
//! constant, only the rate (slope or trend) is asserted; metadata records grid sizes, seeds,
//! and the norm conventions used.

use rand::Rng;

use crate::constants::{
    DISCRETIZATION_SLOPE_WINDOW, FACTORIZATION_MAX_REL_ERROR, TREND_INCREASE_FACTOR,
};
use crate::error::{Error, Result};
use crate::filters::{factor_count_bound, factorize_filter, Filter};
use crate::harmonics::{laplace_eigenvalue, BandLimitedZonal};
use crate::network::{
    build_kernel_network, build_ridge_network, kernel_parameter_bound, ridge_parameter_bound,
};
use crate::operators::{apply_ln, DiscretizedLn, SplineMesh};
use crate::report::{FactorBenchReport, FactorBenchRow, RateRow, RateStudyReport};
use crate::rng;
use crate::sphere::{build_grid, sample_uniform, EvalGrid, GridKind, SpherePoint};

/// Built-in univariate profiles for the additive-ridge studies, each with an
/// analytic Holder seminorm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RidgeFamily {
    /// `g_j(u) = |u - c_j|` with per-feature offsets; Lipschitz constant 1.
    Abs,
    /// `g_j(u) = |u - c_j|^alpha`, `0 < alpha <= 1`; Holder-alpha constant 1.
    AbsPower { alpha: f64 },
    /// `g_j(u) = cos(pi u)`; Lipschitz constant pi.
    CosScaled,
    /// `g_j(u) = u`; Lipschitz constant 1, reproduced exactly.
    Linear,
    /// `g_j = 0`; exact zero through the whole pipeline.
    Zero,
}

impl RidgeFamily {
    /// Parses a CLI family name; `alpha` is required by `abspower` only.
    pub fn parse(name: &str, alpha: Option<f64>) -> Result<Self> {
        match name {
            "abs" => Ok(RidgeFamily::Abs),
            "abspower" => {
                let alpha = alpha
                    .ok_or_else(|| Error::invalid("ridge family abspower requires --alpha"))?;
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(Error::invalid(format!(
                        "abspower exponent must be in (0, 1], got {alpha}"
                    )));
                }
                Ok(RidgeFamily::AbsPower { alpha })
            }
            "cos" => Ok(RidgeFamily::CosScaled),
            "linear" => Ok(RidgeFamily::Linear),
            "zero" => Ok(RidgeFamily::Zero),
            other => Err(Error::invalid(format!("unknown ridge family {other:?}"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            RidgeFamily::Abs => "abs".into(),
            RidgeFamily::AbsPower { alpha } => format!("abspower({alpha})"),
            RidgeFamily::CosScaled => "cos".into(),
            RidgeFamily::Linear => "linear".into(),
            RidgeFamily::Zero => "zero".into(),
        }
    }

    /// The Holder exponent entering the error bound `sum_j |g_j| N^-alpha`.
    pub fn holder_alpha(&self) -> f64 {
        match self {
            RidgeFamily::AbsPower { alpha } => *alpha,
            _ => 1.0,
        }
    }

    /// Theoretical log-log slope of the measured error in `N`, when the
    /// family pins one down: kinked profiles decay at their Holder exponent,
    /// the smooth cosine gains second order from nodal interpolation, and
    /// linear/zero profiles are reproduced exactly (no slope to speak of).
    pub fn expected_slope(&self) -> Option<f64> {
        match self {
            RidgeFamily::Abs => Some(-1.0),
            RidgeFamily::AbsPower { alpha } => Some(-alpha),
            RidgeFamily::CosScaled => Some(-2.0),
            RidgeFamily::Linear | RidgeFamily::Zero => None,
        }
    }

    fn instantiate(&self, count: usize, rng: &mut impl Rng) -> Vec<RidgeProfile> {
        (0..count)
            .map(|_| {
                let offset = match self {
                    RidgeFamily::Abs | RidgeFamily::AbsPower { .. } => rng.random_range(-0.5..0.5),
                    _ => 0.0,
                };
                RidgeProfile {
                    family: *self,
                    offset,
                }
            })
            .collect()
    }
}

/// Draws `count` profiles from a family with offsets from the given seed
/// (substream 0 of the repository generator).
pub fn ridge_profiles(family: RidgeFamily, count: usize, seed: u64) -> Vec<RidgeProfile> {
    let mut rng = rng::substream(seed, 0);
    family.instantiate(count, &mut rng)
}

/// A concrete profile drawn from a [`RidgeFamily`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeProfile {
    family: RidgeFamily,
    offset: f64,
}

impl RidgeProfile {
    pub fn eval(&self, u: f64) -> f64 {
        match self.family {
            RidgeFamily::Abs => (u - self.offset).abs(),
            RidgeFamily::AbsPower { alpha } => (u - self.offset).abs().powf(alpha),
            RidgeFamily::CosScaled => (std::f64::consts::PI * u).cos(),
            RidgeFamily::Linear => u,
            RidgeFamily::Zero => 0.0,
        }
    }

    /// The analytic Holder-alpha seminorm on [-1, 1].
    pub fn holder_seminorm(&self) -> f64 {
        match self.family {
            RidgeFamily::Abs | RidgeFamily::AbsPower { .. } | RidgeFamily::Linear => 1.0,
            RidgeFamily::CosScaled => std::f64::consts::PI,
            RidgeFamily::Zero => 0.0,
        }
    }
}

/// Built-in band-limited zonal test functions.
#[derive(Debug, Clone, PartialEq)]
pub enum ZonalSpec {
    /// `f = Z_0` (the constant 1).
    Constant,
    /// `f = Z_0 + Z_1`: degree one, so the smoothing operator reproduces it
    /// and the measured error isolates the discretization.
    LowDegree,
    /// Coefficients `a_k = (1 + lambda_k)^{-(r + d)/2}` up to `max_degree`,
    /// the calibrated decay family for rate studies at smoothness `r`.
    PolyDecay { smoothness: f64, max_degree: usize },
}

impl ZonalSpec {
    pub fn parse(name: &str, smoothness: f64, max_degree: usize) -> Result<Self> {
        match name {
            "constant" => Ok(ZonalSpec::Constant),
            "lowdeg" => Ok(ZonalSpec::LowDegree),
            "decay" => Ok(ZonalSpec::PolyDecay {
                smoothness,
                max_degree,
            }),
            other => Err(Error::invalid(format!("unknown test function {other:?}"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ZonalSpec::Constant => "constant".into(),
            ZonalSpec::LowDegree => "lowdeg".into(),
            ZonalSpec::PolyDecay {
                smoothness,
                max_degree,
            } => format!("decay(r={smoothness},K={max_degree})"),
        }
    }

    /// Builds the test function on `S^{d-1}` with the north pole as the
    /// zonal axis.
    pub fn build(&self, d: usize) -> Result<BandLimitedZonal> {
        let pole = SpherePoint::north_pole(d)?;
        let coeffs = match self {
            ZonalSpec::Constant => vec![1.0],
            ZonalSpec::LowDegree => vec![1.0, 1.0],
            ZonalSpec::PolyDecay {
                smoothness,
                max_degree,
            } => (0..=*max_degree)
                .map(|k| {
                    (1.0 + laplace_eigenvalue(k, d) as f64).powf(-(smoothness + d as f64) / 2.0)
                })
                .collect(),
        };
        BandLimitedZonal::new(pole, coeffs)
    }
}

/// Deterministic evaluation grid for a study: the Fibonacci spiral on `S^2`,
/// a seeded uniform sample in higher dimension.
fn study_grid(d: usize, size: usize, seed: u64) -> Result<EvalGrid> {
    if d == 3 {
        build_grid(d, size, GridKind::Fibonacci, 0)
    } else {
        build_grid(d, size, GridKind::Random, seed)
    }
}

fn grid_kind_name(grid: &EvalGrid) -> &'static str {
    match grid.kind() {
        GridKind::Fibonacci => "fibonacci",
        GridKind::Random => "random",
    }
}

/// Configuration of the additive-ridge rate study (CLI `thm2-rate`).
#[derive(Debug, Clone)]
pub struct RidgeRateConfig {
    pub m: usize,
    pub d: usize,
    pub span: usize,
    pub family: RidgeFamily,
    /// Mesh resolutions N to sweep.
    pub mesh_sizes: Vec<usize>,
    pub grid_size: usize,
    pub seed: u64,
}

/// Sweeps the mesh resolution for an additive ridge target
/// `f = sum_j g_j(<y_j, .>)`, asserting the error bound
/// `sum_j |g_j| N^-alpha` and the free-parameter bound for every row.
pub fn run_ridge_rate(cfg: &RidgeRateConfig) -> Result<RateStudyReport> {
    if cfg.mesh_sizes.is_empty() {
        return Err(Error::EmptyInput("mesh size list"));
    }
    let mut master = rng::substream(cfg.seed, 0);
    let points_seed: u64 = master.random();
    let grid_seed: u64 = master.random();
    let points = sample_uniform(cfg.d, cfg.m, points_seed)?;
    let profiles = cfg.family.instantiate(cfg.m, &mut master);
    let grid = study_grid(cfg.d, cfg.grid_size, grid_seed)?;

    let alpha = cfg.family.holder_alpha();
    let norm_sum: f64 = profiles.iter().map(RidgeProfile::holder_seminorm).sum();

    let target = |x: &SpherePoint| -> f64 {
        points
            .iter()
            .zip(&profiles)
            .map(|(y, g)| g.eval(y.dot(x).clamp(-1.0, 1.0)))
            .sum()
    };

    let mut rows = Vec::with_capacity(cfg.mesh_sizes.len());
    for &mesh_n in &cfg.mesh_sizes {
        let mesh = SplineMesh::new(mesh_n)?;
        let g_values: Vec<Vec<f64>> = profiles
            .iter()
            .map(|g| mesh.interior_nodes().map(|t| g.eval(t)).collect())
            .collect();
        let net = build_ridge_network(&points, &g_values, cfg.span, mesh_n)?;
        let sup_error = grid
            .sup_norm(|x| target(x) - net.eval(x).expect("grid point dimension matches network"));

        let bound = norm_sum * (mesh_n as f64).powf(-alpha);
        if sup_error > bound {
            return Err(Error::BoundViolated(format!(
                "ridge error {sup_error:e} exceeds {bound:e} at N = {mesh_n}"
            )));
        }
        let count = net.free_parameter_count();
        let count_bound = ridge_parameter_bound(cfg.m, cfg.d, cfg.span, mesh_n);
        if count > count_bound {
            return Err(Error::BoundViolated(format!(
                "ridge parameter count {count} exceeds {count_bound} at N = {mesh_n}"
            )));
        }
        rows.push(RateRow {
            control: mesh_n as u64,
            sup_error,
            param_count: count as u64,
            seed: cfg.seed,
            grid_size: grid.len() as u64,
        });
    }

    let metadata = vec![
        ("study".into(), "thm2-rate".into()),
        ("family".into(), cfg.family.name()),
        ("holder_alpha".into(), format!("{alpha}")),
        ("holder_norm_sum".into(), format!("{norm_sum}")),
        ("m".into(), cfg.m.to_string()),
        ("d".into(), cfg.d.to_string()),
        ("S".into(), cfg.span.to_string()),
        ("grid_kind".into(), grid_kind_name(&grid).into()),
        ("grid_size".into(), grid.len().to_string()),
        ("seed".into(), cfg.seed.to_string()),
        (
            "error_bound".into(),
            "sum_j holder(g_j) * N^-alpha, asserted per row".into(),
        ),
    ];
    RateStudyReport::new(rows, metadata)
}

/// The `(m, n, N)` coupling derived from the depth for the smooth-function
/// study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelCoupling {
    pub feature_count: usize,
    pub kernel_scale: usize,
    pub mesh_size: usize,
}

/// Standard coupling: `m = floor(((S-1)J + 1)/d)`, then
/// `n = floor(m^{1/(2(d-1+tau))})`, `N = n^{d+1}` below the smoothness
/// threshold `r < d-1`, and `n = floor(m^{1/(2r)})`, `N = floor(n^{2+r})`
/// above it.
pub fn kernel_coupling(
    depth: usize,
    d: usize,
    span: usize,
    r: f64,
    tau: f64,
) -> Result<KernelCoupling> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::invalid("tau must be positive"));
    }
    let threshold = (d - 1) as f64;
    if r == threshold {
        return Err(Error::invalid(
            "the coupling excludes r = d - 1; perturb the smoothness index",
        ));
    }
    if r > threshold && tau >= r - threshold {
        return Err(Error::invalid(format!(
            "need tau < r - (d-1) = {} for r > d-1, got tau = {tau}",
            r - threshold
        )));
    }
    let m = ((span - 1) * depth + 1) / d;
    if m < 1 {
        return Err(Error::invalid(format!(
            "depth J = {depth} gives no features; need J >= (d-1)/(S-1)"
        )));
    }
    let mf = m as f64;
    let (n, mesh) = if r < threshold {
        let n = mf.powf(1.0 / (2.0 * (threshold + tau))).floor().max(1.0) as usize;
        (n, n.pow(d as u32 + 1))
    } else {
        let n = mf.powf(1.0 / (2.0 * r)).floor().max(1.0) as usize;
        let mesh = (n as f64).powf(2.0 + r).floor().max(1.0) as usize;
        (n, mesh)
    };
    Ok(KernelCoupling {
        feature_count: m,
        kernel_scale: n,
        mesh_size: mesh,
    })
}

/// Configuration of the smooth-function rate study (CLI `thm1-rate`).
#[derive(Debug, Clone)]
pub struct KernelRateConfig {
    pub f: ZonalSpec,
    pub r: f64,
    pub d: usize,
    pub span: usize,
    /// Depths J to sweep.
    pub depths: Vec<usize>,
    pub tau: f64,
    /// Number of seeds averaged per depth.
    pub seeds: usize,
    pub grid_size: usize,
    pub seed: u64,
}

/// Sweeps the depth with the standard `(m, n, N)` coupling, building the
/// kernel network per seed and averaging the grid sup error. Asserts the
/// free-parameter bound `(3S+5)J + 4` per network and a monotone-ish
/// decrease of the averaged errors (each at most
/// [`TREND_INCREASE_FACTOR`] times the smallest earlier value); the error
/// bound's constant is unknown, so no absolute level is asserted.
pub fn run_kernel_rate(cfg: &KernelRateConfig) -> Result<RateStudyReport> {
    if cfg.depths.is_empty() {
        return Err(Error::EmptyInput("depth list"));
    }
    if cfg.seeds < 1 {
        return Err(Error::invalid("need at least one seed"));
    }
    let f = cfg.f.build(cfg.d)?;
    let mut master = rng::substream(cfg.seed, 0);
    let grid_seed: u64 = master.random();
    let grid = study_grid(cfg.d, cfg.grid_size, grid_seed)?;
    let f_on_grid: Vec<f64> = grid
        .points()
        .iter()
        .map(|x| f.eval(x))
        .collect::<Result<Vec<_>>>()?;

    let mut depths = cfg.depths.clone();
    depths.sort_unstable();
    depths.dedup();

    let mut rows = Vec::with_capacity(depths.len());
    let mut metadata = vec![
        ("study".into(), "thm1-rate".into()),
        ("f".into(), cfg.f.name()),
        ("r".into(), cfg.r.to_string()),
        ("tau".into(), cfg.tau.to_string()),
        ("d".into(), cfg.d.to_string()),
        ("S".into(), cfg.span.to_string()),
        ("seeds".into(), cfg.seeds.to_string()),
        ("grid_kind".into(), grid_kind_name(&grid).into()),
        ("grid_size".into(), grid.len().to_string()),
        ("seed".into(), cfg.seed.to_string()),
        (
            "norms".into(),
            "W2^r proxy reported; the Linf Sobolev norm has no finite formula".into(),
        ),
    ];

    for (row_idx, &depth) in depths.iter().enumerate() {
        let coupling = kernel_coupling(depth, cfg.d, cfg.span, cfg.r, cfg.tau)?;
        let mut total = 0.0;
        let mut count_worst = 0usize;
        for seed_idx in 0..cfg.seeds {
            let mut stream = rng::substream(cfg.seed, 1 + (row_idx * cfg.seeds + seed_idx) as u64);
            let points_seed: u64 = stream.random();
            let samples = sample_uniform(cfg.d, coupling.feature_count, points_seed)?;
            let net = build_kernel_network(
                &f,
                cfg.r,
                coupling.kernel_scale,
                &samples,
                coupling.mesh_size,
                cfg.span,
                depth,
            )?;
            let count = net.free_parameter_count();
            count_worst = count_worst.max(count);
            let bound = kernel_parameter_bound(depth, cfg.span);
            if count > bound {
                return Err(Error::BoundViolated(format!(
                    "kernel parameter count {count} exceeds {bound} at J = {depth}"
                )));
            }
            let mut worst = 0.0f64;
            for (x, &fx) in grid.points().iter().zip(&f_on_grid) {
                let err = (fx - net.eval(x).expect("grid point dimension matches")).abs();
                worst = worst.max(err);
            }
            total += worst;
        }
        metadata.push((
            format!("coupling_J{depth}"),
            format!(
                "m={} n={} N={}",
                coupling.feature_count, coupling.kernel_scale, coupling.mesh_size
            ),
        ));
        rows.push(RateRow {
            control: depth as u64,
            sup_error: total / cfg.seeds as f64,
            param_count: count_worst as u64,
            seed: cfg.seed,
            grid_size: grid.len() as u64,
        });
    }

    // Trend: each averaged error at most the factor times the best earlier.
    let mut best = f64::INFINITY;
    for row in &rows {
        if row.sup_error > TREND_INCREASE_FACTOR * best {
            return Err(Error::BoundViolated(format!(
                "error {:e} at J = {} exceeds {} x the best earlier value {best:e}",
                row.sup_error, row.control, TREND_INCREASE_FACTOR
            )));
        }
        best = best.min(row.sup_error);
    }

    RateStudyReport::new(rows, metadata)
}

/// Configuration of the discretization concentration study (CLI
/// `discretize`).
#[derive(Debug, Clone)]
pub struct DiscretizationConfig {
    pub f: ZonalSpec,
    pub r: f64,
    pub n: usize,
    pub d: usize,
    /// Sample counts m to sweep.
    pub sample_counts: Vec<usize>,
    pub seeds: usize,
    pub grid_size: usize,
    pub seed: u64,
}

/// Sweeps the Monte-Carlo sample count, measuring the grid sup of the
/// discretized operator against the smoothed function, averaged over seeds.
/// Asserts the fitted slope lies in [`DISCRETIZATION_SLOPE_WINDOW`] (the
/// theoretical exponent is -1/2).
pub fn run_discretization_study(cfg: &DiscretizationConfig) -> Result<RateStudyReport> {
    if cfg.sample_counts.is_empty() {
        return Err(Error::EmptyInput("sample count list"));
    }
    if cfg.seeds < 1 {
        return Err(Error::invalid("need at least one seed"));
    }
    let f = cfg.f.build(cfg.d)?;
    let smoothed = apply_ln(&f, cfg.n)?;
    let mut master = rng::substream(cfg.seed, 0);
    let grid_seed: u64 = master.random();
    let grid = study_grid(cfg.d, cfg.grid_size, grid_seed)?;
    let smoothed_on_grid: Vec<f64> = grid
        .points()
        .iter()
        .map(|x| smoothed.eval(x))
        .collect::<Result<Vec<_>>>()?;

    let mut counts = cfg.sample_counts.clone();
    counts.sort_unstable();
    counts.dedup();

    let mut rows = Vec::with_capacity(counts.len());
    for (row_idx, &m) in counts.iter().enumerate() {
        let mut total = 0.0;
        for seed_idx in 0..cfg.seeds {
            let mut stream = rng::substream(cfg.seed, 1 + (row_idx * cfg.seeds + seed_idx) as u64);
            let points_seed: u64 = stream.random();
            let samples = sample_uniform(cfg.d, m, points_seed)?;
            let op = DiscretizedLn::new(&f, cfg.r, cfg.n, samples)?;
            let mut worst = 0.0f64;
            for (x, &sx) in grid.points().iter().zip(&smoothed_on_grid) {
                let err = (op.eval(x).expect("grid point dimension matches") - sx).abs();
                worst = worst.max(err);
            }
            total += worst;
        }
        rows.push(RateRow {
            control: m as u64,
            sup_error: total / cfg.seeds as f64,
            param_count: 0,
            seed: cfg.seed,
            grid_size: grid.len() as u64,
        });
    }

    let metadata = vec![
        ("study".into(), "discretize".into()),
        ("f".into(), cfg.f.name()),
        ("r".into(), cfg.r.to_string()),
        ("n".into(), cfg.n.to_string()),
        ("d".into(), cfg.d.to_string()),
        ("seeds".into(), cfg.seeds.to_string()),
        ("grid_kind".into(), grid_kind_name(&grid).into()),
        ("grid_size".into(), grid.len().to_string()),
        ("seed".into(), cfg.seed.to_string()),
        (
            "slope_window".into(),
            format!(
                "[{}, {}] around the theoretical -1/2",
                DISCRETIZATION_SLOPE_WINDOW.0, DISCRETIZATION_SLOPE_WINDOW.1
            ),
        ),
    ];
    let report = RateStudyReport::new(rows, metadata)?;
    let slope = report.fitted_slope();
    let (lo, hi) = DISCRETIZATION_SLOPE_WINDOW;
    if counts.len() >= 2 && !(lo..=hi).contains(&slope) {
        return Err(Error::BoundViolated(format!(
            "discretization slope {slope} outside [{lo}, {hi}]"
        )));
    }
    Ok(report)
}

/// Configuration of the factorization benchmark (CLI `bench-factor`).
#[derive(Debug, Clone)]
pub struct FactorBenchConfig {
    pub degrees: Vec<usize>,
    pub spans: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

/// Random taps, i.i.d. uniform in [-1, 1], with the leading tap bounded away
/// from zero (rejection below 1e-3).
pub fn random_filter_taps(rng: &mut impl Rng, degree: usize) -> Vec<f64> {
    loop {
        let taps: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        if taps[degree].abs() >= 1e-3 {
            return taps;
        }
    }
}

/// Factorizes `trials` random filters per `(M, S)` cell and asserts the
/// reconvolution accuracy and the factor count bound for every cell.
pub fn run_factorization_bench(cfg: &FactorBenchConfig) -> Result<FactorBenchReport> {
    if cfg.degrees.is_empty() || cfg.spans.is_empty() {
        return Err(Error::EmptyInput("bench degree/span lists"));
    }
    if cfg.trials < 1 {
        return Err(Error::invalid("need at least one trial"));
    }
    let mut rows = Vec::with_capacity(cfg.degrees.len() * cfg.spans.len());
    for (cell_idx, (&degree, &span)) in cfg
        .degrees
        .iter()
        .flat_map(|m| cfg.spans.iter().map(move |s| (m, s)))
        .enumerate()
    {
        if span < 2 {
            return Err(Error::invalid("factor support must be >= 2"));
        }
        let mut stream = rng::substream(cfg.seed, cell_idx as u64);
        let mut max_rel_err = 0.0f64;
        let mut max_count = 0usize;
        for _ in 0..cfg.trials {
            let w = Filter::new(random_filter_taps(&mut stream, degree))?;
            let fact = factorize_filter(&w, span)?;
            max_rel_err = max_rel_err.max(fact.rel_error);
            max_count = max_count.max(fact.factors.len());
        }
        if max_rel_err > FACTORIZATION_MAX_REL_ERROR {
            return Err(Error::BoundViolated(format!(
                "factorization error {max_rel_err:e} exceeds {FACTORIZATION_MAX_REL_ERROR:e} \
                 at M = {degree}, S = {span}"
            )));
        }
        let bound = factor_count_bound(degree, span);
        if max_count > bound {
            return Err(Error::BoundViolated(format!(
                "factor count {max_count} exceeds {bound} at M = {degree}, S = {span}"
            )));
        }
        rows.push(FactorBenchRow {
            degree: degree as u64,
            span: span as u64,
            max_rel_err,
            max_factor_count: max_count as u64,
        });
    }
    let metadata = vec![
        ("study".into(), "bench-factor".into()),
        ("trials".into(), cfg.trials.to_string()),
        ("seed".into(), cfg.seed.to_string()),
        (
            "bounds".into(),
            "rel_err <= 1e-6 and count <= ceil(M/(S-1)), asserted per cell".into(),
        ),
    ];
    FactorBenchReport::new(rows, metadata)
}
