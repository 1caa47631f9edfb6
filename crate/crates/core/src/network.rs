//! Assembly and evaluation of the constructed networks.
//!
//! The front of every network is a stack of convolutional ReLU layers whose
//! filters multiply out to the feature filter of the sample points. The bias
//! vectors are chosen so each pre-activation stays nonnegative on the sphere,
//! which turns every ReLU in the stack into the identity: after `J` layers,
//! coordinate `kd` holds exactly `<y_k, x> + B` with `B` the product of the
//! filter l1 norms. Downsampling extracts those features, and one or two
//! fully connected layers with block-structured connection matrices realize
//! a spline quasi-interpolant of a univariate profile on top of each feature.
//!
//! Two flavors are built:
//!
//! - the kernel network (two fully connected layers) realizing the
//!   Monte-Carlo discretization of the smoothing operator,
//!   `(1/m) sum_j F_r(y_j) L_t(zeta)(<y_j, x>)`, up to an output shift;
//! - the ridge network (one fully connected layer) realizing
//!   `sum_j L_t(g_j)(<y_j, x>)` for given univariate profiles `g_j`.
//!
//! Networks are stored as structured layers, never as dense weights, so the
//! free-parameter accounting matches the construction's conventions and the
//! block connection matrices are never materialized.

use std::io::{BufRead, Write};

use crate::constants::{FACTORIZATION_MAX_REL_ERROR, KERNEL_SUP_GRID_POINTS, KERNEL_SUP_MARGIN};
use crate::error::{Error, Result};
use crate::filters::{factorize_filter, feature_filter, pad_with_deltas, Filter};
use crate::harmonics::BandLimitedZonal;
use crate::operators::{second_difference, SmoothedKernel, SplineMesh};
use crate::sphere::SpherePoint;

fn relu(u: f64) -> f64 {
    u.max(0.0)
}

/// One convolutional ReLU layer: structural filter length `span`, taps of
/// degree at most `span`, and a bias vector of the output width.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnLayer {
    filter: Filter,
    span: usize,
    input_width: usize,
    bias: Vec<f64>,
}

impl CnnLayer {
    pub fn filter(&self) -> &Filter {
        &self.filter
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn output_width(&self) -> usize {
        self.input_width + self.span
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// `T h - b` before the activation.
    pub fn pre_activation(&self, h: &[f64]) -> Result<Vec<f64>> {
        if h.len() != self.input_width {
            return Err(Error::DimensionMismatch {
                expected: self.input_width,
                got: h.len(),
            });
        }
        let mut out = padded_convolve(&self.filter, self.span, h);
        for (o, b) in out.iter_mut().zip(&self.bias) {
            *o -= b;
        }
        Ok(out)
    }

    pub fn forward(&self, h: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.pre_activation(h)?;
        for o in out.iter_mut() {
            *o = relu(*o);
        }
        Ok(out)
    }
}

/// Convolution padded to the structural output width `len(v) + span` (the
/// filter degree may be smaller than `span`; missing taps are zeros).
fn padded_convolve(filter: &Filter, span: usize, v: &[f64]) -> Vec<f64> {
    debug_assert!(filter.degree() <= span);
    let mut out = vec![0.0; v.len() + span];
    for (i, slot) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(filter.degree());
        let hi = i.min(v.len() - 1);
        let mut acc = 0.0;
        for (k, &val) in v.iter().enumerate().take(hi + 1).skip(lo) {
            acc += filter.tap(i - k) * val;
        }
        *slot = acc;
    }
    out
}

/// Builds the `J`-layer CNN stack encoding the feature points, returning the
/// layers and the carry scale `B` left in every output coordinate.
///
/// The first layer's bias is `-B_1` in every coordinate; layer `j` uses
/// `B_{j-1} T^(j) 1 - B_j 1`, which satisfies the middle-run equality
/// restriction. The carry `B_j` must dominate `sup_x ||T^(j,1) x||_inf` over
/// the sphere so that every pre-activation is nonnegative and the ReLUs act
/// as the identity. The product of filter l1 norms is such a bound but grows
/// exponentially in `J`, large enough that subtracting `B_J` at the end
/// wipes out the extracted features in f64; we instead use the sharp
/// Cauchy-Schwarz bound, the largest row l2 norm of the partial-product
/// Toeplitz matrix, which stays of the order of `sqrt(m)`.
pub fn build_cnn_stack(
    points: &[SpherePoint],
    span: usize,
    depth: usize,
) -> Result<(Vec<CnnLayer>, f64)> {
    if points.is_empty() {
        return Err(Error::EmptyInput("feature point list"));
    }
    let d = points[0].dim();
    if span < 2 || span > d {
        return Err(Error::invalid(format!(
            "filter length must satisfy 2 <= S <= d, got S = {span}, d = {d}"
        )));
    }
    let m = points.len();
    let min_depth = (m * d - 1).div_ceil(span - 1);
    if depth < min_depth {
        return Err(Error::invalid(format!(
            "depth J = {depth} is below the minimum {min_depth} for m = {m}, d = {d}, S = {span}"
        )));
    }

    let w = feature_filter(points)?;
    let factorization = factorize_filter(&w, span)?;
    if factorization.rel_error > FACTORIZATION_MAX_REL_ERROR {
        return Err(Error::Factorization {
            taps: w.taps().to_vec(),
            reason: format!(
                "feature filter factorization error {:e} exceeds {:e}",
                factorization.rel_error, FACTORIZATION_MAX_REL_ERROR
            ),
        });
    }
    let filters = pad_with_deltas(factorization.factors, depth)?;

    let mut layers = Vec::with_capacity(depth);
    let mut scale = 0.0f64;
    let mut partial = Filter::delta();
    for (idx, filter) in filters.into_iter().enumerate() {
        let input_width = d + idx * span;
        let output_width = input_width + span;
        partial = partial.convolve(&filter);
        // Sharp pre-activation bound: rows of the partial-product Toeplitz
        // matrix are length-d windows of the partial filter, and x has unit
        // l2 norm. The relative headroom absorbs the rounding of the bound
        // computation itself.
        let next_scale = max_window_l2(partial.taps(), d) * (1.0 + 1e-9);
        let bias = if idx == 0 {
            vec![-next_scale; output_width]
        } else {
            let t_ones = padded_convolve(&filter, span, &vec![1.0; input_width]);
            t_ones.iter().map(|&t| scale * t - next_scale).collect()
        };
        scale = next_scale;
        layers.push(CnnLayer {
            filter,
            span,
            input_width,
            bias,
        });
    }
    Ok((layers, scale))
}

/// Largest l2 norm over all contiguous windows of `width` entries of the
/// zero-extended tap sequence.
fn max_window_l2(taps: &[f64], width: usize) -> f64 {
    let rows = taps.len() + width - 1;
    let mut worst = 0.0f64;
    for i in 0..rows {
        let mut acc = 0.0;
        for k in 0..width {
            // Window entry taps[i - k] with zeros outside the support.
            if let Some(&t) = i.checked_sub(k).and_then(|idx| taps.get(idx)) {
                acc += t * t;
            }
        }
        worst = worst.max(acc);
    }
    worst.sqrt()
}

/// Runs the stack on a sphere point; with no layers the output is `x` itself.
pub fn forward_cnn(layers: &[CnnLayer], x: &SpherePoint) -> Result<Vec<f64>> {
    let mut h = x.coords().to_vec();
    for layer in layers {
        h = layer.forward(&h)?;
    }
    Ok(h)
}

/// Like [`forward_cnn`] but keeps every intermediate layer output, for
/// diagnostics.
pub fn forward_cnn_trace(layers: &[CnnLayer], x: &SpherePoint) -> Result<Vec<Vec<f64>>> {
    let mut trace = Vec::with_capacity(layers.len() + 1);
    trace.push(x.coords().to_vec());
    for layer in layers {
        let next = layer.forward(trace.last().expect("non-empty trace"))?;
        trace.push(next);
    }
    Ok(trace)
}

/// Keeps every `d`-th coordinate: `(v_d, v_{2d}, ...)`.
pub fn downsample(v: &[f64], d: usize) -> Result<Vec<f64>> {
    if d < 1 {
        return Err(Error::invalid("downsampling scale must be >= 1"));
    }
    if d > v.len() {
        return Err(Error::invalid(format!(
            "downsampling scale {d} exceeds vector length {}",
            v.len()
        )));
    }
    Ok((1..=v.len() / d).map(|i| v[i * d - 1]).collect())
}

/// Block-diagonal connection matrix with one repeated column block: shape
/// `(len(block) * count) x count`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    block: Vec<f64>,
    count: usize,
}

impl BlockMatrix {
    pub fn new(block: Vec<f64>, count: usize) -> Result<Self> {
        if block.is_empty() {
            return Err(Error::EmptyInput("block vector"));
        }
        if count < 1 {
            return Err(Error::invalid("block count must be >= 1"));
        }
        Ok(Self { block, count })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.block.len() * self.count, self.count)
    }

    pub fn block(&self) -> &[f64] {
        &self.block
    }

    /// `Xi v`: block `j` of the output is `block * v_j`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.count {
            return Err(Error::DimensionMismatch {
                expected: self.count,
                got: v.len(),
            });
        }
        let mut out = Vec::with_capacity(self.block.len() * self.count);
        for &vj in v {
            out.extend(self.block.iter().map(|&b| b * vj));
        }
        Ok(out)
    }

    /// `Xi^T w`: entry `j` of the output is the block inner product.
    pub fn apply_transpose(&self, w: &[f64]) -> Result<Vec<f64>> {
        let (rows, _) = self.shape();
        if w.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: w.len(),
            });
        }
        Ok((0..self.count)
            .map(|j| {
                let offset = j * self.block.len();
                self.block
                    .iter()
                    .zip(&w[offset..offset + self.block.len()])
                    .map(|(&b, &x)| b * x)
                    .sum()
            })
            .collect())
    }
}

/// Which construction a network came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkFlavor {
    /// Two fully connected layers realizing the discretized smoothing
    /// operator.
    Kernel,
    /// One fully connected layer realizing a sum of ridge profiles.
    Ridge,
}

impl NetworkFlavor {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkFlavor::Kernel => "kernel",
            NetworkFlavor::Ridge => "ridge",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tail {
    Kernel {
        /// Second-difference coefficients of the kernel's node samples.
        theta: Vec<f64>,
        /// Upper bound for the kernel sup norm used in the last bias.
        kernel_bound: f64,
        /// Output coefficients, one per downsampled block.
        coeffs: Vec<f64>,
        /// Output shift subtracted at the very end.
        shift: f64,
    },
    Ridge {
        /// Per-feature coefficient blocks (already scaled by the mesh
        /// resolution), each of length `2N+3`.
        blocks: Vec<Vec<f64>>,
    },
}

/// A fully assembled network: CNN stack, downsampling, and the fully
/// connected tail of its flavor.
///
/// Immutable after construction; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalNetwork {
    dim: usize,
    span: usize,
    feature_count: usize,
    cnn_layers: Vec<CnnLayer>,
    cnn_scale: f64,
    mesh: SplineMesh,
    tail: Tail,
}

impl SphericalNetwork {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn depth(&self) -> usize {
        self.cnn_layers.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn cnn_layers(&self) -> &[CnnLayer] {
        &self.cnn_layers
    }

    /// The scale `B = prod ||w^(p)||_1` carried through the CNN stack.
    pub fn cnn_scale(&self) -> f64 {
        self.cnn_scale
    }

    pub fn mesh(&self) -> &SplineMesh {
        &self.mesh
    }

    pub fn flavor(&self) -> NetworkFlavor {
        match self.tail {
            Tail::Kernel { .. } => NetworkFlavor::Kernel,
            Tail::Ridge { .. } => NetworkFlavor::Ridge,
        }
    }

    /// Width of the downsampled feature vector (the narrow fully connected
    /// width).
    pub fn fc_outer_width(&self) -> usize {
        (self.dim + self.depth() * self.span) / self.dim
    }

    /// Width of the first fully connected layer.
    pub fn fc_inner_width(&self) -> usize {
        self.mesh.node_count() * self.fc_outer_width()
    }

    /// The sup-norm bound used for the second fully connected bias (kernel
    /// flavor only).
    pub fn kernel_bound(&self) -> Option<f64> {
        match &self.tail {
            Tail::Kernel { kernel_bound, .. } => Some(*kernel_bound),
            Tail::Ridge { .. } => None,
        }
    }

    /// The first fully connected layer: per block `j`,
    /// `relu(ds_j - B - t_i)` for `j < m` and `relu(ds_j - B - 1)` otherwise.
    /// The tail blocks vanish identically because the downsampled tail equals
    /// `B` exactly.
    pub fn first_fc_layer(&self, x: &SpherePoint) -> Result<Vec<f64>> {
        let h = forward_cnn(&self.cnn_layers, x)?;
        let ds = downsample(&h, self.dim)?;
        let nodes: Vec<f64> = (1..=self.mesh.node_count())
            .map(|i| self.mesh.node(i))
            .collect();
        let mut out = Vec::with_capacity(nodes.len() * ds.len());
        for (j, &v) in ds.iter().enumerate() {
            if j < self.feature_count {
                out.extend(nodes.iter().map(|&t| relu(v - self.cnn_scale - t)));
            } else {
                out.extend(std::iter::repeat_n(
                    relu(v - self.cnn_scale - 1.0),
                    nodes.len(),
                ));
            }
        }
        Ok(out)
    }

    /// Evaluates the network at a sphere point.
    pub fn eval(&self, x: &SpherePoint) -> Result<f64> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        let first = self.first_fc_layer(x)?;
        let width = self.mesh.node_count();
        match &self.tail {
            Tail::Kernel {
                theta,
                kernel_bound,
                coeffs,
                shift,
            } => {
                // Block transpose product without materializing the block
                // matrix: entry j mixes theta with block j of the first
                // layer.
                let n = self.mesh.resolution() as f64;
                let mut acc = 0.0;
                for (j, &c) in coeffs.iter().enumerate() {
                    let offset = j * width;
                    let z: f64 = theta
                        .iter()
                        .zip(&first[offset..offset + width])
                        .map(|(&t, &s)| t * s)
                        .sum();
                    let bias = if j < self.feature_count {
                        -kernel_bound / n
                    } else {
                        0.0
                    };
                    acc += c * relu(z - bias);
                }
                Ok(acc - shift)
            }
            Tail::Ridge { blocks } => {
                let mut acc = 0.0;
                for (j, block) in blocks.iter().enumerate() {
                    let offset = j * width;
                    for (b, &s) in block.iter().zip(&first[offset..offset + width]) {
                        acc += b * s;
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Free parameters under the construction's accounting: `S+1` taps and
    /// `2S+1` bias degrees of freedom per CNN layer (the middle equal run
    /// collapses to one value; delta-padded layers still count by capacity),
    /// plus the flavor's tail parameters. Determined block matrices are
    /// never counted.
    pub fn free_parameter_count(&self) -> usize {
        let j = self.depth();
        let s = self.span;
        let cnn = j * (s + 1) + j * (2 * s + 1);
        let n = self.mesh.resolution();
        match &self.tail {
            // 2N+1 kernel node samples, the two scalars carried by the
            // biases, and the m output coefficients with the shift.
            Tail::Kernel { .. } => cnn + (2 * n + 1) + 2 + self.feature_count + 1,
            // One bias scalar plus 2N+1 profile samples per feature block.
            Tail::Ridge { .. } => cnn + 1 + self.feature_count * (2 * n + 1),
        }
    }
}

/// Free-parameter bound for kernel networks built with the standard
/// coupling: `(3S+5) J + 4`.
pub fn kernel_parameter_bound(depth: usize, span: usize) -> usize {
    (3 * span + 5) * depth + 4
}

/// Free-parameter bound for ridge networks:
/// `(3S+2) ceil((md-1)/(S-1)) + m (2N+2)`.
pub fn ridge_parameter_bound(m: usize, d: usize, span: usize, mesh_n: usize) -> usize {
    (3 * span + 2) * (m * d - 1).div_ceil(span - 1) + m * (2 * mesh_n + 2)
}

/// Builds the kernel network: a CNN stack over the sample points followed by
/// downsampling and two fully connected layers realizing
/// `(1/m) sum_j F_r(y_j) L_t(zeta_{n,r})(<y_j, x>)`.
pub fn build_kernel_network(
    f: &BandLimitedZonal,
    r: f64,
    n: usize,
    samples: &[SpherePoint],
    mesh_n: usize,
    span: usize,
    depth: usize,
) -> Result<SphericalNetwork> {
    let d = f.dim();
    for y in samples {
        if y.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: y.dim(),
            });
        }
    }
    let m = samples.len();
    let mesh = SplineMesh::new(mesh_n)?;
    let (cnn_layers, cnn_scale) = build_cnn_stack(samples, span, depth)?;

    let outer = (d + depth * span) / d;
    if outer < m {
        return Err(Error::invalid(format!(
            "downsampled width {outer} is below the feature count {m}"
        )));
    }

    let kernel = SmoothedKernel::new(n, r, d)?;
    let theta = second_difference(&mesh, &kernel.node_samples(&mesh))?;
    let kernel_bound = KERNEL_SUP_MARGIN * kernel.sup_norm_on_grid(KERNEL_SUP_GRID_POINTS);

    let f_r = f.fractional_power(r / 2.0);
    let fr_values = samples
        .iter()
        .map(|y| f_r.eval(y))
        .collect::<Result<Vec<_>>>()?;

    let mut coeffs = vec![0.0; outer];
    for (j, &fr) in fr_values.iter().enumerate() {
        coeffs[j] = mesh_n as f64 / m as f64 * fr;
    }
    let shift = kernel_bound * fr_values.iter().sum::<f64>() / m as f64;

    Ok(SphericalNetwork {
        dim: d,
        span,
        feature_count: m,
        cnn_layers,
        cnn_scale,
        mesh,
        tail: Tail::Kernel {
            theta,
            kernel_bound,
            coeffs,
            shift,
        },
    })
}

/// Builds the ridge network for profiles sampled at the interior mesh nodes:
/// `g_values[j]` holds `g_j(t_2), ..., g_j(t_{2N+2})`. The depth is fixed to
/// the minimum `ceil((md-1)/(S-1))` and the output realizes
/// `sum_j L_t(g_j)(<y_j, x>)`.
pub fn build_ridge_network(
    points: &[SpherePoint],
    g_values: &[Vec<f64>],
    span: usize,
    mesh_n: usize,
) -> Result<SphericalNetwork> {
    if points.is_empty() {
        return Err(Error::EmptyInput("feature point list"));
    }
    let d = points[0].dim();
    let m = points.len();
    if g_values.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: g_values.len(),
        });
    }
    let mesh = SplineMesh::new(mesh_n)?;
    for row in g_values {
        if row.len() != mesh.interior_count() {
            return Err(Error::DimensionMismatch {
                expected: mesh.interior_count(),
                got: row.len(),
            });
        }
    }
    if span < 2 {
        return Err(Error::invalid("filter length must be >= 2"));
    }
    let depth = (m * d - 1).div_ceil(span - 1);
    let (cnn_layers, cnn_scale) = build_cnn_stack(points, span, depth)?;

    let outer = (d + depth * span) / d;
    if outer < m {
        return Err(Error::invalid(format!(
            "downsampled width {outer} is below the feature count {m}"
        )));
    }

    let blocks = g_values
        .iter()
        .map(|row| {
            second_difference(&mesh, row).map(|coeffs| {
                coeffs
                    .iter()
                    .map(|&c| c * mesh_n as f64)
                    .collect::<Vec<f64>>()
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SphericalNetwork {
        dim: d,
        span,
        feature_count: m,
        cnn_layers,
        cnn_scale,
        mesh,
        tail: Tail::Ridge { blocks },
    })
}

const FORMAT_HEADER: &str = "zonal-cnn-network v1";

impl SphericalNetwork {
    /// Writes the network in the versioned plain-text format.
    ///
    /// Layout: the header line, `key value` lines for the scalars (`flavor`,
    /// `d`, `S`, `J`, `m`, `N`, `cnn_scale`), two lines `taps .../bias ...`
    /// per CNN layer, the flavor-specific vectors (`theta`, `kernel_bound`,
    /// `coeffs`, `shift` for kernel; one `block` line per feature for ridge),
    /// and `end`. Floats use the shortest round-trip decimal form.
    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{FORMAT_HEADER}")?;
        writeln!(w, "flavor {}", self.flavor().as_str())?;
        writeln!(w, "d {}", self.dim)?;
        writeln!(w, "S {}", self.span)?;
        writeln!(w, "J {}", self.depth())?;
        writeln!(w, "m {}", self.feature_count)?;
        writeln!(w, "N {}", self.mesh.resolution())?;
        writeln!(w, "cnn_scale {}", fmt_f64(self.cnn_scale))?;
        for layer in &self.cnn_layers {
            writeln!(w, "taps {}", join_f64(layer.filter.taps()))?;
            writeln!(w, "bias {}", join_f64(&layer.bias))?;
        }
        match &self.tail {
            Tail::Kernel {
                theta,
                kernel_bound,
                coeffs,
                shift,
            } => {
                writeln!(w, "theta {}", join_f64(theta))?;
                writeln!(w, "kernel_bound {}", fmt_f64(*kernel_bound))?;
                writeln!(w, "coeffs {}", join_f64(coeffs))?;
                writeln!(w, "shift {}", fmt_f64(*shift))?;
            }
            Tail::Ridge { blocks } => {
                for block in blocks {
                    writeln!(w, "block {}", join_f64(block))?;
                }
            }
        }
        writeln!(w, "end")
    }

    /// Parses a network from the plain-text format produced by
    /// [`SphericalNetwork::write_text`].
    pub fn read_text(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = next_line(&mut lines)?;
        if header.trim() != FORMAT_HEADER {
            return Err(Error::Parse(format!("unexpected header: {header:?}")));
        }
        let flavor = parse_kv(&next_line(&mut lines)?, "flavor")?;
        let d: usize = parse_num(&parse_kv(&next_line(&mut lines)?, "d")?)?;
        let span: usize = parse_num(&parse_kv(&next_line(&mut lines)?, "S")?)?;
        let depth: usize = parse_num(&parse_kv(&next_line(&mut lines)?, "J")?)?;
        let m: usize = parse_num(&parse_kv(&next_line(&mut lines)?, "m")?)?;
        let mesh_n: usize = parse_num(&parse_kv(&next_line(&mut lines)?, "N")?)?;
        let cnn_scale: f64 = parse_num(&parse_kv(&next_line(&mut lines)?, "cnn_scale")?)?;
        let mesh = SplineMesh::new(mesh_n)?;

        let mut cnn_layers = Vec::with_capacity(depth);
        for idx in 0..depth {
            let taps = parse_vec(&parse_kv(&next_line(&mut lines)?, "taps")?)?;
            let bias = parse_vec(&parse_kv(&next_line(&mut lines)?, "bias")?)?;
            let input_width = d + idx * span;
            if bias.len() != input_width + span {
                return Err(Error::Parse(format!(
                    "layer {idx}: bias length {} does not match width {}",
                    bias.len(),
                    input_width + span
                )));
            }
            let filter = Filter::new(taps).map_err(|e| Error::Parse(e.to_string()))?;
            if filter.degree() > span {
                return Err(Error::Parse(format!(
                    "layer {idx}: filter degree {} exceeds S = {span}",
                    filter.degree()
                )));
            }
            cnn_layers.push(CnnLayer {
                filter,
                span,
                input_width,
                bias,
            });
        }

        let tail = match flavor.as_str() {
            "kernel" => {
                let theta = parse_vec(&parse_kv(&next_line(&mut lines)?, "theta")?)?;
                let kernel_bound = parse_num(&parse_kv(&next_line(&mut lines)?, "kernel_bound")?)?;
                let coeffs = parse_vec(&parse_kv(&next_line(&mut lines)?, "coeffs")?)?;
                let shift = parse_num(&parse_kv(&next_line(&mut lines)?, "shift")?)?;
                if theta.len() != mesh.node_count() {
                    return Err(Error::Parse("theta length mismatch".into()));
                }
                Tail::Kernel {
                    theta,
                    kernel_bound,
                    coeffs,
                    shift,
                }
            }
            "ridge" => {
                let mut blocks = Vec::with_capacity(m);
                for _ in 0..m {
                    let block = parse_vec(&parse_kv(&next_line(&mut lines)?, "block")?)?;
                    if block.len() != mesh.node_count() {
                        return Err(Error::Parse("block length mismatch".into()));
                    }
                    blocks.push(block);
                }
                Tail::Ridge { blocks }
            }
            other => return Err(Error::Parse(format!("unknown flavor {other:?}"))),
        };
        let end = next_line(&mut lines)?;
        if end.trim() != "end" {
            return Err(Error::Parse("missing end marker".into()));
        }
        Ok(SphericalNetwork {
            dim: d,
            span,
            feature_count: m,
            cnn_layers,
            cnn_scale,
            mesh,
            tail,
        })
    }
}

fn fmt_f64(v: f64) -> String {
    // Shortest decimal that round-trips to the same f64.
    format!("{v}")
}

fn join_f64(vs: &[f64]) -> String {
    vs.iter().map(fmt_f64_ref).collect::<Vec<_>>().join(" ")
}

fn fmt_f64_ref(v: &f64) -> String {
    fmt_f64(*v)
}

fn next_line(lines: &mut impl Iterator<Item = std::io::Result<String>>) -> Result<String> {
    match lines.next() {
        Some(Ok(line)) => Ok(line),
        Some(Err(e)) => Err(Error::Io(e)),
        None => Err(Error::Parse("unexpected end of file".into())),
    }
}

fn parse_kv(line: &str, key: &str) -> Result<String> {
    let trimmed = line.trim();
    match trimmed.strip_prefix(key) {
        Some(rest) if rest.starts_with(' ') || rest.is_empty() => Ok(rest.trim().to_string()),
        _ => Err(Error::Parse(format!(
            "expected key {key:?} in line {line:?}"
        ))),
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("cannot parse number from {s:?}")))
}

fn parse_vec(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(parse_num).collect()
}
