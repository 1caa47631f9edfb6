//! Finitely supported filters, convolution, Toeplitz matrices, and the
//! factorization of a long filter into short ones.
//!
//! A filter `w` supported in `{0, ..., M}` is identified with the polynomial
//! `sum_k w_k z^k`, so convolution of filters is polynomial multiplication
//! and factoring a filter into factors of support `{0, ..., S}` is factoring
//! its polynomial into real factors of degree at most `S`. Root finding goes
//! through the balanced companion matrix; roots are polished by Newton steps
//! and regrouped into real factors with conjugate pairs kept atomic. The
//! factorization is validated, never assumed: the factors are reconvolved
//! and the achieved relative error is returned with them.

use std::collections::VecDeque;

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sphere::SpherePoint;

/// A finitely supported real filter `(w_0, ..., w_M)`.
///
/// The representation is canonical: trailing zero taps are trimmed (the delta
/// filter keeps its single tap) and the all-zero filter is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    taps: Vec<f64>,
}

impl Filter {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        let last = taps.iter().rposition(|&t| t != 0.0);
        match last {
            None => Err(Error::invalid("filter must have a nonzero tap")),
            Some(idx) => {
                let mut taps = taps;
                taps.truncate(idx + 1);
                Ok(Self { taps })
            }
        }
    }

    /// The identity filter for convolution.
    pub fn delta() -> Self {
        Self { taps: vec![1.0] }
    }

    pub fn is_delta(&self) -> bool {
        self.taps.len() == 1 && self.taps[0] == 1.0
    }

    /// Largest support index `M`.
    pub fn degree(&self) -> usize {
        self.taps.len() - 1
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap at index `k`, zero outside the support.
    pub fn tap(&self, k: usize) -> f64 {
        self.taps.get(k).copied().unwrap_or(0.0)
    }

    pub fn l1_norm(&self) -> f64 {
        self.taps.iter().map(|t| t.abs()).sum()
    }

    /// Convolution of two filters (polynomial product).
    pub fn convolve(&self, other: &Filter) -> Filter {
        Filter {
            taps: conv_slices(&self.taps, &other.taps),
        }
    }
}

fn conv_slices(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Convolution `(w * v)_i = sum_k w_{i-k} v_k` restricted to its support
/// `{1, ..., D+M}` (returned 0-based with length `D + M`).
pub fn convolve(w: &Filter, v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::EmptyInput("convolution input vector"));
    }
    let m = w.degree();
    let d = v.len();
    let mut out = vec![0.0; d + m];
    for (i, slot) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(m);
        let hi = i.min(d - 1);
        let mut acc = 0.0;
        for (k, &vk) in v.iter().enumerate().take(hi + 1).skip(lo) {
            acc += w.tap(i - k) * vk;
        }
        *slot = acc;
    }
    Ok(out)
}

/// The `(D+M) x D` Toeplitz matrix with entries `w_{i-k}` realizing
/// convolution by `w` as a matrix product.
#[derive(Debug, Clone)]
pub struct ToeplitzMatrix {
    filter: Filter,
    input_dim: usize,
}

impl ToeplitzMatrix {
    pub fn new(filter: Filter, input_dim: usize) -> Result<Self> {
        if input_dim < 1 {
            return Err(Error::invalid("toeplitz input dimension must be >= 1"));
        }
        Ok(Self { filter, input_dim })
    }

    pub fn filter(&self) -> &Filter {
        &self.filter
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.input_dim + self.filter.degree(), self.input_dim)
    }

    /// Entry at 0-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        if col > row {
            0.0
        } else {
            self.filter.tap(row - col)
        }
    }

    /// Matrix-vector product computed row by row from the entries.
    ///
    /// Agrees exactly with [`convolve`]; the convolution route is the oracle
    /// for this one in the tests.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: v.len(),
            });
        }
        let (rows, cols) = self.shape();
        let mut out = vec![0.0; rows];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &vk) in v.iter().enumerate().take(cols) {
                acc += self.entry(i, k) * vk;
            }
            *slot = acc;
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let (rows, cols) = self.shape();
        DMatrix::from_fn(rows, cols, |i, k| self.entry(i, k))
    }
}

/// A validated factorization: short factors plus the relative sup error of
/// their reconvolution against the original filter.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub factors: Vec<Filter>,
    pub rel_error: f64,
}

impl Factorization {
    /// Convolution of all factors, for external verification.
    pub fn reconvolve(&self) -> Filter {
        self.factors
            .iter()
            .skip(1)
            .fold(self.factors[0].clone(), |acc, f| acc.convolve(f))
    }
}

/// Factors `w` into filters supported in `{0, ..., s}` whose convolution
/// reproduces `w`.
///
/// Returns at most `ceil(M / (s-1))` factors (one factor, exactly, when
/// `M <= s`). Roots of the generating polynomial are computed from the
/// balanced companion matrix, polished by Newton steps, and packed greedily
/// into factors of degree at most `s`, alternating small- and large-modulus
/// roots so no factor carries extreme scale; the leading coefficient is
/// spread geometrically across factors.
pub fn factorize_filter(w: &Filter, s: usize) -> Result<Factorization> {
    if s < 2 {
        return Err(Error::invalid("factor support s must be >= 2"));
    }
    let m = w.degree();
    if m <= s {
        return Ok(Factorization {
            factors: vec![w.clone()],
            rel_error: 0.0,
        });
    }

    // Roots at zero show up as leading zero taps; strip them first.
    let zero_roots = w.taps().iter().take_while(|&&t| t == 0.0).count();
    let core = &w.taps()[zero_roots..];

    let mut items: Vec<RootItem> = std::iter::repeat_n(RootItem::Real(0.0), zero_roots).collect();
    if core.len() > 1 {
        items.extend(root_items(core, w.taps())?);
    }
    debug_assert_eq!(
        items.iter().map(RootItem::degree).sum::<usize>(),
        m,
        "root multiset must carry the full degree"
    );

    let groups = pack_items(items, s);
    let p = groups.len();

    // Monic factors from the root groups, then the leading coefficient
    // spread as |lead|^{1/p} per factor with the sign on the first.
    let lead = *w.taps().last().expect("canonical filter");
    let scale = lead.abs().powf(1.0 / p as f64);
    let mut factors = Vec::with_capacity(p);
    for (idx, group) in groups.iter().enumerate() {
        let mut coeffs = expand_group(group);
        let factor_scale = if idx == 0 {
            scale.copysign(lead)
        } else {
            scale
        };
        for c in &mut coeffs {
            *c *= factor_scale;
        }
        factors.push(Filter::new(coeffs)?);
    }

    // The order in which the factors get convolved back together decides how
    // large the partial products grow, and with them the rounding error of
    // any reconvolution; return the factors in a greedy order that keeps the
    // partial products small.
    let factors = order_for_reconvolution(factors);

    let mut rel_error = reconvolution_error(w, &factors);
    // Ill-conditioned root configurations can leave a residual above the
    // documented accuracy; a couple of Gauss-Newton steps on the factor taps
    // against the original filter remove it.
    let mut factors = factors;
    if rel_error > 1e-11 {
        refine_factor_taps(w, &mut factors);
        rel_error = reconvolution_error(w, &factors);
    }
    if !rel_error.is_finite() {
        return Err(Error::Factorization {
            taps: w.taps().to_vec(),
            reason: "reconvolution produced non-finite taps".into(),
        });
    }
    Ok(Factorization { factors, rel_error })
}

/// Orders factors so the running convolution keeps its sup norm small:
/// starts from the factor of smallest sup and repeatedly appends the factor
/// whose product with the accumulator has the smallest sup.
fn order_for_reconvolution(factors: Vec<Filter>) -> Vec<Filter> {
    if factors.len() <= 2 {
        return factors;
    }
    let sup = |f: &Filter| f.taps().iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
    let mut remaining = factors;
    let first = remaining
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            sup(a)
                .partial_cmp(&sup(b))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)
        .expect("non-empty factor list");
    let mut ordered = vec![remaining.swap_remove(first)];
    let mut acc = ordered[0].clone();
    while !remaining.is_empty() {
        let (idx, product) = remaining
            .iter()
            .enumerate()
            .map(|(i, f)| (i, acc.convolve(f)))
            .min_by(|(_, a), (_, b)| {
                sup(a)
                    .partial_cmp(&sup(b))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty remainder");
        acc = product;
        ordered.push(remaining.swap_remove(idx));
    }
    ordered
}

fn reconvolution_error(w: &Filter, factors: &[Filter]) -> f64 {
    let reconvolved = factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.convolve(f));
    relative_sup_error(w, &reconvolved)
}

/// Gauss-Newton iteration on the flattened factor taps, minimizing the
/// reconvolution residual against `w`. The least-squares steps use the
/// minimum-norm SVD solution because the scale split between factors leaves
/// the Jacobian rank deficient by construction.
fn refine_factor_taps(w: &Filter, factors: &mut [Filter]) {
    let target_len = w.degree() + 1;
    let mut best = factors.to_vec();
    let mut best_err = reconvolution_error(w, factors);
    for _ in 0..4 {
        let taps_per_factor: Vec<Vec<f64>> = factors.iter().map(|f| f.taps().to_vec()).collect();
        let residual: Vec<f64> = {
            let conv_all = taps_per_factor
                .iter()
                .skip(1)
                .fold(taps_per_factor[0].clone(), |acc, f| conv_slices(&acc, f));
            (0..target_len)
                .map(|k| conv_all.get(k).copied().unwrap_or(0.0) - w.tap(k))
                .collect()
        };
        let unknowns: usize = taps_per_factor.iter().map(|t| t.len()).sum();
        let mut jac = DMatrix::<f64>::zeros(target_len, unknowns);
        let mut col = 0;
        for i in 0..taps_per_factor.len() {
            // Convolution of every factor except i.
            let mut others = vec![1.0];
            for (j, taps) in taps_per_factor.iter().enumerate() {
                if j != i {
                    others = conv_slices(&others, taps);
                }
            }
            for k in 0..taps_per_factor[i].len() {
                for (j, &o) in others.iter().enumerate() {
                    if k + j < target_len {
                        jac[(k + j, col)] = o;
                    }
                }
                col += 1;
            }
        }
        let rhs = nalgebra::DVector::from_iterator(target_len, residual.iter().map(|r| -r));
        let svd = jac.svd(true, true);
        let Ok(step) = svd.solve(&rhs, 1e-13) else {
            break;
        };
        let mut col = 0;
        let mut updated = Vec::with_capacity(factors.len());
        for taps in &taps_per_factor {
            let new_taps: Vec<f64> = taps
                .iter()
                .map(|&t| {
                    let v = t + step[col];
                    col += 1;
                    v
                })
                .collect();
            match Filter::new(new_taps) {
                Ok(f) => updated.push(f),
                Err(_) => return,
            }
        }
        let err = reconvolution_error(w, &updated);
        factors.clone_from_slice(&updated);
        if err < best_err {
            best_err = err;
            best = updated;
            if best_err <= 1e-14 {
                break;
            }
        } else {
            break;
        }
    }
    factors.clone_from_slice(&best);
}

fn relative_sup_error(w: &Filter, reconvolved: &Filter) -> f64 {
    let len = w.taps().len().max(reconvolved.taps().len());
    let mut worst = 0.0f64;
    for k in 0..len {
        worst = worst.max((w.tap(k) - reconvolved.tap(k)).abs());
    }
    let scale = w.taps().iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
    worst / scale
}

/// A real root or an atomic conjugate pair (stored by its upper-half-plane
/// representative).
#[derive(Debug, Clone, Copy)]
enum RootItem {
    Real(f64),
    Pair(Complex64),
}

impl RootItem {
    fn degree(&self) -> usize {
        match self {
            RootItem::Real(_) => 1,
            RootItem::Pair(_) => 2,
        }
    }

    fn modulus(&self) -> f64 {
        match self {
            RootItem::Real(x) => x.abs(),
            RootItem::Pair(z) => z.norm(),
        }
    }
}

/// Roots of the stripped polynomial as real/pair items, polished.
fn root_items(core: &[f64], original_taps: &[f64]) -> Result<Vec<RootItem>> {
    let raw = companion_eigenvalues(core)
        .or_else(|| weierstrass_from_scratch(core))
        .ok_or_else(|| Error::Factorization {
            taps: original_taps.to_vec(),
            reason: "companion eigenvalue iteration did not converge".into(),
        })?;
    // Per-root Newton polish nails well-separated roots. Clustered (multiple)
    // roots stall at eps^(1/multiplicity) individually and the polish even
    // collapses the cluster, so in that regime a simultaneous Weierstrass
    // pass over the raw (geometry-preserving) eigenvalues repairs the
    // multiset as a whole; whichever multiset reconstructs the polynomial
    // better wins.
    let polished: Vec<Complex64> = raw.iter().map(|&z| polish_complex(core, z)).collect();
    let raw = if reconstruction_error(core, &polished) <= 1e-12 {
        polished
    } else {
        let mut refined = raw;
        weierstrass_refine(core, &mut refined, 60, 3);
        if reconstruction_error(core, &polished) <= reconstruction_error(core, &refined) {
            polished
        } else {
            refined
        }
    };

    // Conjugate matching with the documented tolerance; roots essentially on
    // the real axis are snapped to it.
    const PAIR_TOL: f64 = 1e-8;
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for z in raw {
        if z.im.abs() <= PAIR_TOL * (1.0 + z.norm()) {
            reals.push(z.re);
        } else if z.im > 0.0 {
            upper.push(z);
        } else {
            lower.push(z);
        }
    }
    // Roots hovering right at the snap threshold can land on opposite sides
    // for the two members of a nearly-real pair; rebalance by reclassifying
    // the smallest-imaginary leftovers as real.
    while upper.len() != lower.len() {
        let (side, flip) = if upper.len() > lower.len() {
            (&mut upper, 1.0)
        } else {
            (&mut lower, -1.0)
        };
        let idx = side
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (a.im * flip)
                    .partial_cmp(&(b.im * flip))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(i, _)| i)
            .expect("non-empty side");
        reals.push(side.swap_remove(idx).re);
    }

    let mut pairs = Vec::new();
    for z in upper {
        let conj = z.conj();
        let nearest = lower
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - conj)
                    .norm()
                    .partial_cmp(&(*b - conj).norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(i, _)| i);
        match nearest {
            Some(i) => {
                let partner = lower.swap_remove(i);
                // Average the pair onto an exact conjugate representative.
                pairs.push(Complex64::new(
                    0.5 * (z.re + partner.re),
                    0.5 * (z.im - partner.im),
                ));
            }
            None => {
                return Err(Error::Factorization {
                    taps: original_taps.to_vec(),
                    reason: format!("complex root {z} has no conjugate partner"),
                })
            }
        }
    }
    if !lower.is_empty() {
        return Err(Error::Factorization {
            taps: original_taps.to_vec(),
            reason: "unmatched lower-half-plane roots".into(),
        });
    }

    // No further per-root polish here: dragging an individual member of a
    // root cluster toward the exact root would spoil the multiset that the
    // Weierstrass pass just balanced.
    let mut items: Vec<RootItem> = Vec::with_capacity(reals.len() + pairs.len());
    items.extend(reals.into_iter().map(RootItem::Real));
    items.extend(pairs.into_iter().map(RootItem::Pair));
    Ok(items)
}

/// Simultaneous Weierstrass (Durand-Kerner) refinement of the full root
/// multiset. Each sweep updates `z_i -= p(z_i) / (lead * prod_{j!=i} (z_i -
/// z_j))`; the multiset with the best reconstruction error of
/// `lead * prod (z - z_i)` against `coeffs` seen so far is kept, and the
/// iteration stops after `patience` sweeps without improvement. Skipped
/// entirely when the incoming multiset already reconstructs to near machine
/// precision.
fn weierstrass_refine(
    coeffs: &[f64],
    roots: &mut Vec<Complex64>,
    max_sweeps: usize,
    patience: usize,
) {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let mut best_err = reconstruction_error(coeffs, roots);
    if best_err <= 1e-13 {
        return;
    }
    let mut best = roots.clone();
    let mut stall = 0usize;
    for _ in 0..max_sweeps {
        let current = roots.clone();
        for i in 0..deg {
            let zi = current[i];
            let (p, _) = horner_complex(coeffs, zi);
            let mut denom = Complex64::new(lead, 0.0);
            for (j, zj) in current.iter().enumerate() {
                if j != i {
                    let mut diff = zi - zj;
                    if diff.norm() < 1e-100 {
                        diff = Complex64::new(1e-100, 0.0);
                    }
                    denom *= diff;
                }
            }
            let next = zi - p / denom;
            if next.re.is_finite() && next.im.is_finite() {
                roots[i] = next;
            }
        }
        let err = reconstruction_error(coeffs, roots);
        if err < best_err {
            best_err = err;
            best.clone_from(roots);
            stall = 0;
            if best_err <= 1e-15 {
                break;
            }
        } else {
            stall += 1;
            if stall > patience {
                break;
            }
        }
    }
    *roots = best;
}

/// Root finding by Weierstrass iteration alone, used as a fallback when the
/// companion eigenvalue iteration fails. Starts from points spread on a
/// circle of radius given by the geometric mean of the root moduli, slightly
/// rotated off the real axis.
fn weierstrass_from_scratch(coeffs: &[f64]) -> Option<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let constant = coeffs[0];
    // |constant/lead| is the product of all root moduli.
    let radius = (constant / lead)
        .abs()
        .powf(1.0 / deg as f64)
        .clamp(1e-3, 1e3);
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.5;
            Complex64::new(radius * angle.cos(), radius * angle.sin())
        })
        .collect();
    weierstrass_refine(coeffs, &mut roots, 800, 40);
    if reconstruction_error(coeffs, &roots) <= 1e-7 {
        Some(roots)
    } else {
        None
    }
}

/// Sup-norm distance between `coeffs` and the expansion of
/// `lead * prod_i (z - roots[i])`, relative to the largest coefficient.
///
/// The product is expanded alternating between the smallest- and
/// largest-modulus remaining roots; an arbitrary order lets intermediate
/// coefficients grow by orders of magnitude and the rounding of the
/// expansion itself would then swamp the quantity being measured.
fn reconstruction_error(coeffs: &[f64], roots: &[Complex64]) -> f64 {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let mut poly = vec![Complex64::new(lead, 0.0)];
    for root in BalancedOrder::new(roots) {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (k, &c) in poly.iter().enumerate() {
            next[k] -= c * root;
            next[k + 1] += c;
        }
        poly = next;
    }
    let scale = coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let mut worst = 0.0f64;
    for (k, &c) in coeffs.iter().enumerate() {
        worst = worst.max((poly[k] - Complex64::new(c, 0.0)).norm());
    }
    worst / scale
}

/// Yields roots sorted by modulus, alternating small and large ends.
struct BalancedOrder {
    sorted: VecDeque<Complex64>,
    from_small: bool,
}

impl BalancedOrder {
    fn new(roots: &[Complex64]) -> Self {
        let mut sorted: Vec<Complex64> = roots.to_vec();
        sorted.sort_by(|a, b| {
            a.norm()
                .partial_cmp(&b.norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Self {
            sorted: sorted.into(),
            from_small: true,
        }
    }
}

impl Iterator for BalancedOrder {
    type Item = Complex64;

    fn next(&mut self) -> Option<Complex64> {
        let item = if self.from_small {
            self.sorted.pop_front()
        } else {
            self.sorted.pop_back()
        };
        self.from_small = !self.from_small;
        item
    }
}

/// Eigenvalues of the balanced companion matrix of a polynomial with nonzero
/// leading and constant coefficients.
fn companion_eigenvalues(coeffs: &[f64]) -> Option<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let mut companion = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        companion[(i, deg - 1)] = -coeffs[i] / lead;
    }
    balance_in_place(&mut companion);
    // Retry with a looser deflation tolerance before giving up; the Newton
    // and Weierstrass polishing downstream recovers the lost digits.
    let schur = nalgebra::linalg::Schur::try_new(companion.clone(), 1e-15, 200 * deg.max(50))
        .or_else(|| nalgebra::linalg::Schur::try_new(companion, 1e-12, 400 * deg.max(50)))?;
    let eigs = schur.complex_eigenvalues();
    let roots: Vec<Complex64> = eigs
        .iter()
        .map(|z: &Complex<f64>| Complex64::new(z.re, z.im))
        .collect();
    if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    Some(roots)
}

/// Parlett-Reinsch balancing with power-of-two scaling (exact in floating
/// point). Reduces the norm imbalance between rows and columns before the
/// QR iteration.
fn balance_in_place(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let radix: f64 = 2.0;
    let sqr = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut col: f64 = (0..n).filter(|&j| j != i).map(|j| a[(j, i)].abs()).sum();
            let row: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut factor = 1.0;
            while col < row / radix {
                factor *= radix;
                col *= sqr;
            }
            while col > row * radix {
                factor /= radix;
                col /= sqr;
            }
            if (col + row) / factor < 0.95 * total {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= factor;
                }
                for j in 0..n {
                    a[(j, i)] *= factor;
                }
            }
        }
    }
}

fn horner_complex(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn polish_complex(coeffs: &[f64], mut z: Complex64) -> Complex64 {
    let (mut best_val, _) = horner_complex(coeffs, z);
    let mut best = z;
    for _ in 0..12 {
        let (p, dp) = horner_complex(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        z -= step;
        let (p2, _) = horner_complex(coeffs, z);
        if p2.norm() < best_val.norm() {
            best_val = p2;
            best = z;
        }
        if step.norm() <= f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    best
}

/// Greedy packing of root items into groups of total degree at most `s`,
/// alternating between the small- and large-modulus ends so factor tap
/// magnitudes stay balanced. Conjugate pairs are atomic. Every group except
/// possibly the last reaches degree at least `s - 1`, which gives the factor
/// count bound.
fn pack_items(mut items: Vec<RootItem>, s: usize) -> Vec<Vec<RootItem>> {
    items.sort_by(|a, b| a.modulus().partial_cmp(&b.modulus()).unwrap());
    let mut queue: VecDeque<RootItem> = items.into();
    let mut groups = Vec::new();
    let mut take_small = true;
    while !queue.is_empty() {
        let mut capacity = s;
        let mut group = Vec::new();
        while capacity > 0 && !queue.is_empty() {
            let picked = pick_fitting(&mut queue, capacity, take_small);
            take_small = !take_small;
            match picked {
                Some(item) => {
                    capacity -= item.degree();
                    group.push(item);
                }
                None => break,
            }
        }
        groups.push(group);
    }
    groups
}

/// Removes the first item fitting in `capacity`, preferring the requested
/// end; scans inward from that end if both ends are too large.
fn pick_fitting(
    queue: &mut VecDeque<RootItem>,
    capacity: usize,
    from_small: bool,
) -> Option<RootItem> {
    let indices: Vec<usize> = if from_small {
        (0..queue.len()).collect()
    } else {
        (0..queue.len()).rev().collect()
    };
    for idx in indices {
        if queue[idx].degree() <= capacity {
            return queue.remove(idx);
        }
    }
    None
}

/// Expands a root group into monic polynomial coefficients (ascending).
fn expand_group(group: &[RootItem]) -> Vec<f64> {
    let mut poly = vec![1.0];
    for item in group {
        let factor = match item {
            RootItem::Real(x) => vec![-x, 1.0],
            RootItem::Pair(z) => vec![z.norm_sqr(), -2.0 * z.re, 1.0],
        };
        poly = conv_slices(&poly, &factor);
    }
    poly
}

/// Product `T^{(J)} ... T^{(1)}` as the Toeplitz matrix of the convolved
/// filter (input width `d`).
///
/// The dense matrix-product route is [`toeplitz_chain_dense`]; both routes
/// must agree entrywise, which the test suites check.
pub fn toeplitz_chain(filters: &[Filter], d: usize) -> Result<ToeplitzMatrix> {
    if filters.is_empty() {
        return Err(Error::EmptyInput("filter chain"));
    }
    let combined = filters
        .iter()
        .skip(1)
        .fold(filters[0].clone(), |acc, f| acc.convolve(f));
    ToeplitzMatrix::new(combined, d)
}

/// The same product computed by explicit dense matrix multiplication.
pub fn toeplitz_chain_dense(filters: &[Filter], d: usize) -> Result<DMatrix<f64>> {
    if filters.is_empty() {
        return Err(Error::EmptyInput("filter chain"));
    }
    let mut acc = DMatrix::<f64>::identity(d, d);
    let mut width = d;
    for f in filters {
        let t = ToeplitzMatrix::new(f.clone(), width)?.to_dense();
        acc = &t * &acc;
        width += f.degree();
    }
    Ok(acc)
}

/// Encodes `m` sphere points into one filter supported in `{0, ..., md-1}`
/// with `W_{(j-1)d + (d-i)} = (y_j)_i`.
///
/// Row `kd` of the associated Toeplitz matrix applied to `x` is then exactly
/// `<y_k, x>` for `k = 1, ..., m`.
pub fn feature_filter(points: &[SpherePoint]) -> Result<Filter> {
    if points.is_empty() {
        return Err(Error::EmptyInput("feature point list"));
    }
    let d = points[0].dim();
    for p in points {
        if p.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.dim(),
            });
        }
    }
    let m = points.len();
    let mut taps = vec![0.0; m * d];
    for (j, y) in points.iter().enumerate() {
        for (i, &c) in y.coords().iter().enumerate() {
            taps[j * d + (d - 1 - i)] = c;
        }
    }
    Filter::new(taps)
}

/// Appends delta filters until the list has exactly `j` entries; the
/// convolution product is unchanged.
pub fn pad_with_deltas(mut filters: Vec<Filter>, j: usize) -> Result<Vec<Filter>> {
    if j < filters.len() {
        return Err(Error::invalid(format!(
            "cannot pad {} filters down to {j}",
            filters.len()
        )));
    }
    filters.resize_with(j, Filter::delta);
    Ok(filters)
}

/// Count bound `ceil(M / (s-1))` from the factorization guarantee.
pub fn factor_count_bound(m: usize, s: usize) -> usize {
    if m == 0 {
        1
    } else {
        m.div_ceil(s - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::FACTORIZATION_MAX_REL_ERROR;
    use crate::rng;
    use crate::sphere::sample_uniform;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn convolve_examples() {
        let w = Filter::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(
            convolve(&w, &[1.0, 2.0, 3.0]).unwrap(),
            vec![1.0, 3.0, 5.0, 3.0]
        );
        let delta = Filter::delta();
        assert_eq!(convolve(&delta, &[4.0, -1.0]).unwrap(), vec![4.0, -1.0]);
        let shift = Filter::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(convolve(&shift, &[1.0, 2.0]).unwrap(), vec![0.0, 1.0, 2.0]);
        assert!(matches!(convolve(&delta, &[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn filter_canonicalization() {
        let f = Filter::new(vec![1.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.taps(), &[1.0, 2.0]);
        assert!(Filter::new(vec![0.0, 0.0]).is_err());
        assert!(Filter::new(vec![]).is_err());
    }

    #[test]
    fn toeplitz_apply_equals_convolve() {
        let cases: Vec<(Vec<f64>, Vec<f64>)> = vec![
            (vec![1.0, 1.0], vec![1.0, 2.0, 3.0]),
            (vec![1.0], vec![4.0, -1.0]),
            (vec![0.0, 1.0], vec![1.0, 2.0]),
            (vec![0.5, -0.25, 0.125], vec![1.0, 0.0, -2.0, 4.0]),
        ];
        for (taps, v) in cases {
            let w = Filter::new(taps).unwrap();
            let t = ToeplitzMatrix::new(w.clone(), v.len()).unwrap();
            assert_eq!(t.apply(&v).unwrap(), convolve(&w, &v).unwrap());
        }
    }

    #[test]
    fn toeplitz_single_column_and_zero() {
        let w = Filter::new(vec![2.0, -1.0, 0.5]).unwrap();
        let t = ToeplitzMatrix::new(w.clone(), 1).unwrap();
        assert_eq!(t.apply(&[3.0]).unwrap(), vec![6.0, -3.0, 1.5]);
        let t = ToeplitzMatrix::new(w, 4).unwrap();
        assert_eq!(t.apply(&[0.0; 4]).unwrap(), vec![0.0; 6]);
        assert!(t.apply(&[1.0; 3]).is_err());
    }

    #[test]
    fn factorize_within_support_is_exact() {
        let w = Filter::new(vec![1.0, 2.0, 1.0]).unwrap();
        let fact = factorize_filter(&w, 2).unwrap();
        assert_eq!(fact.factors.len(), 1);
        assert_eq!(fact.rel_error, 0.0);
        assert_eq!(fact.reconvolve(), w);
    }

    #[test]
    fn factorize_cubic() {
        let w = Filter::new(vec![1.0, 3.0, 3.0, 1.0]).unwrap();
        let fact = factorize_filter(&w, 2).unwrap();
        assert!(fact.factors.len() <= 3);
        assert!(fact.rel_error <= 1e-10, "rel error {}", fact.rel_error);
        for f in &fact.factors {
            assert!(f.degree() <= 2);
        }
        let back = fact.reconvolve();
        for k in 0..=3 {
            assert!((back.tap(k) - w.tap(k)).abs() <= 1e-10);
        }
    }

    #[test]
    fn factorize_delta_and_shifts() {
        let fact = factorize_filter(&Filter::delta(), 2).unwrap();
        assert_eq!(fact.factors, vec![Filter::delta()]);

        // Pure shift by two: within support for s = 2, exact.
        let shift2 = Filter::new(vec![0.0, 0.0, 1.0]).unwrap();
        let fact = factorize_filter(&shift2, 2).unwrap();
        assert_eq!(fact.reconvolve(), shift2);

        // Shift by three exercises the zero-root path.
        let shift3 = Filter::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let fact = factorize_filter(&shift3, 2).unwrap();
        assert!(fact.factors.len() <= 3);
        assert_eq!(fact.reconvolve(), shift3);
        assert!(fact.rel_error <= 1e-12);
    }

    #[test]
    fn factorize_rejects_small_support() {
        let w = Filter::new(vec![1.0, 1.0]).unwrap();
        assert!(factorize_filter(&w, 1).is_err());
    }

    #[test]
    fn factorize_random_stress() {
        let mut rand = rng::from_seed(99);
        for s in 2..=8usize {
            for m in 1..=24usize {
                for _ in 0..10 {
                    let taps = random_taps(&mut rand, m);
                    let w = Filter::new(taps).unwrap();
                    let fact = factorize_filter(&w, s).unwrap();
                    assert!(
                        fact.rel_error <= FACTORIZATION_MAX_REL_ERROR,
                        "M={m} S={s}: rel error {}",
                        fact.rel_error
                    );
                    assert!(
                        fact.factors.len() <= factor_count_bound(m, s),
                        "M={m} S={s}: {} factors",
                        fact.factors.len()
                    );
                    for f in &fact.factors {
                        assert!(f.degree() <= s);
                        assert!(f.taps().iter().all(|t| t.is_finite()));
                    }
                }
            }
        }
    }

    pub(crate) fn random_taps(rand: &mut impl Rng, m: usize) -> Vec<f64> {
        // i.i.d. uniform taps with a leading tap bounded away from zero.
        loop {
            let taps: Vec<f64> = (0..=m).map(|_| rand.random_range(-1.0..1.0)).collect();
            if taps[m].abs() >= 1e-3 {
                return taps;
            }
        }
    }

    #[test]
    fn chain_single_and_deltas() {
        let w = Filter::new(vec![1.0, -2.0]).unwrap();
        let t = toeplitz_chain(std::slice::from_ref(&w), 3).unwrap();
        assert_eq!(t.filter(), &w);

        let t = toeplitz_chain(&[Filter::delta(), Filter::delta()], 4).unwrap();
        assert!(t.filter().is_delta());
        let dense = toeplitz_chain_dense(&[Filter::delta(), Filter::delta()], 4).unwrap();
        assert_eq!(dense, DMatrix::identity(4, 4));
    }

    #[test]
    fn chain_dual_route_agreement() {
        let mut rand = rng::from_seed(123);
        for _ in 0..20 {
            let filters: Vec<Filter> = (0..3)
                .map(|_| {
                    let degree = rand.random_range(1..=4);
                    Filter::new(random_taps(&mut rand, degree)).unwrap()
                })
                .collect();
            let d = 4;
            let combined = toeplitz_chain(&filters, d).unwrap().to_dense();
            let dense = toeplitz_chain_dense(&filters, d).unwrap();
            assert_eq!(combined.shape(), dense.shape());
            for i in 0..combined.nrows() {
                for k in 0..combined.ncols() {
                    assert!(
                        (combined[(i, k)] - dense[(i, k)]).abs() <= 1e-10,
                        "entry ({i}, {k})"
                    );
                }
            }
        }
    }

    #[test]
    fn feature_filter_single_point() {
        let y = SpherePoint::new(vec![1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]).unwrap();
        let w = feature_filter(&[y]).unwrap();
        assert_eq!(w.taps(), &[2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn feature_filter_rejects_empty_and_mixed_dims() {
        assert!(matches!(feature_filter(&[]), Err(Error::EmptyInput(_))));
        let p3 = SpherePoint::north_pole(3).unwrap();
        let p4 = SpherePoint::north_pole(4).unwrap();
        assert!(matches!(
            feature_filter(&[p3, p4]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn feature_filter_two_points() {
        let pts = sample_uniform(3, 2, 17).unwrap();
        let w = feature_filter(&pts).unwrap();
        assert!(w.degree() <= 5);
        // Second block holds the reversed second point.
        for i in 0..3 {
            assert_eq!(w.tap(3 + (2 - i)), pts[1].coords()[i]);
        }
    }

    #[test]
    fn feature_filter_rows_give_inner_products() {
        let m = 3;
        let d = 4;
        let pts = sample_uniform(d, m, 21).unwrap();
        let w = feature_filter(&pts).unwrap();
        let t = ToeplitzMatrix::new(w, d).unwrap();
        let xs = sample_uniform(d, 100, 22).unwrap();
        for x in &xs {
            let out = t.apply(x.coords()).unwrap();
            for (k, y) in pts.iter().enumerate() {
                // Row (k+1)d, 1-based, is index (k+1)d - 1.
                let row = (k + 1) * d - 1;
                let got = if row < out.len() { out[row] } else { 0.0 };
                assert!(
                    (got - y.dot(x)).abs() <= 1e-12,
                    "k={k}: {got} vs {}",
                    y.dot(x)
                );
            }
        }
    }

    #[test]
    fn pad_with_deltas_examples() {
        let w = Filter::new(vec![0.5, 0.5]).unwrap();
        let padded = pad_with_deltas(vec![w.clone()], 3).unwrap();
        assert_eq!(padded.len(), 3);
        assert_eq!(padded[0], w);
        assert!(padded[1].is_delta() && padded[2].is_delta());
        // Convolution product unchanged by the padding.
        let product = padded
            .iter()
            .skip(1)
            .fold(padded[0].clone(), |acc, f| acc.convolve(f));
        assert_eq!(product, w);

        let two = vec![w.clone(), w.clone()];
        assert_eq!(pad_with_deltas(two.clone(), 2).unwrap(), two);
        assert!(pad_with_deltas(two, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn toeplitz_apply_matches_convolve(
            taps in proptest::collection::vec(-2.0f64..2.0, 1..8),
            v in proptest::collection::vec(-2.0f64..2.0, 1..12),
        ) {
            prop_assume!(taps.iter().any(|&t| t != 0.0));
            let w = Filter::new(taps).unwrap();
            let t = ToeplitzMatrix::new(w.clone(), v.len()).unwrap();
            prop_assert_eq!(t.apply(&v).unwrap(), convolve(&w, &v).unwrap());
        }

        #[test]
        fn factorization_roundtrip_property(
            m in 1usize..20,
            s in 2usize..8,
            seed in 0u64..500,
        ) {
            let mut rand = rng::from_seed(seed);
            let w = Filter::new(random_taps(&mut rand, m)).unwrap();
            let fact = factorize_filter(&w, s).unwrap();
            prop_assert!(fact.rel_error <= FACTORIZATION_MAX_REL_ERROR);
            prop_assert!(fact.factors.len() <= factor_count_bound(m, s));
        }
    }
}
