//! Tensor algebra primitives and canonical polyadic decomposition via
//! alternating least squares.
//!
//! The decomposition approximates the CSI tensor by a sum of `F` rank-one
//! outer products. Each ALS sweep solves the three linear least-squares
//! problems in closed form through the Khatri-Rao pseudoinverse identity,
//! so only an F x F matrix is ever inverted.
//!
//! Besides the plain ALS on the full tensor, this module provides the
//! pipeline-grade fast path: orthonormal mode-1/mode-2 subspace compression
//! (randomized range finder) followed by ALS on the small core tensor, with
//! factors seeded from the oscillation poles of the Hankel subspace. Fits
//! are reported with respect to the original tensor in both paths.

use crate::error::{Error, Result};
use crate::linalg;
use crate::preprocess::CsiTensor;
use ndarray::{s, Array2, Array3, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Relative singular-value cutoff for pseudoinverses inside ALS updates.
const PINV_CUTOFF: f64 = 1e-12;
/// Relative singular-value cutoff for k-rank subset tests.
const KRANK_CUTOFF: f64 = 1e-10;
/// k-rank computation enumerates column subsets; cost grows as 2^F.
const KRANK_MAX_COMPONENTS: usize = 12;

/// CP factor matrices A (I x F), B (J x F), C (K x F) plus the relative
/// reconstruction error recorded after every sweep.
#[derive(Debug, Clone)]
pub struct FactorSet {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub c: Array2<f64>,
    pub fit_history: Vec<f64>,
}

impl FactorSet {
    pub fn components(&self) -> usize {
        self.a.ncols()
    }

    /// Final relative reconstruction error, if any sweep ran.
    pub fn final_fit(&self) -> Option<f64> {
        self.fit_history.last().copied()
    }
}

/// Factor initialization strategy.
///
/// Random initialization is the plain default, but on Hankel-structured
/// tensors the true factors are heavily collinear and ALS from a random
/// start routinely stalls on a swamp plateau for hundreds of sweeps.
/// `SubspaceRates` instead seeds the factors as cosine/sine pairs at the
/// oscillation rates read off the Hankel subspace (see [`subspace_rates`]),
/// which starts the iteration next to the solution. Both are deterministic
/// given the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CpInit {
    /// Seeded Gaussian random factors.
    Random,
    /// Cosine/sine pairs at subspace-estimated rates; leftover columns are
    /// seeded randomly. Needs the sampling rate to convert pole angles to
    /// rates.
    SubspaceRates { sampling_rate_hz: f64 },
}

/// Options for [`cp_als`] and [`compressed_cp_als`].
#[derive(Debug, Clone)]
pub struct CpOptions {
    pub max_sweeps: usize,
    /// Stop when the fit change between sweeps drops below this.
    pub tol: f64,
    /// Seed for the random draws in the initialization.
    pub seed: u64,
    pub init: CpInit,
}

impl Default for CpOptions {
    fn default() -> Self {
        CpOptions {
            max_sweeps: 500,
            tol: 1e-8,
            seed: 0,
            init: CpInit::Random,
        }
    }
}

/// Frobenius norm: square root of the sum of squares of all elements.
pub fn frobenius_norm(tensor: &CsiTensor) -> f64 {
    tensor.data.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Kronecker product, `(IM) x (JN)` block structure `a_ij * B`.
pub fn kronecker(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ia, ja) = a.dim();
    let (ib, jb) = b.dim();
    let mut out = Array2::zeros((ia * ib, ja * jb));
    for i in 0..ia {
        for j in 0..ja {
            let scale = a[[i, j]];
            let mut block = out.slice_mut(s![i * ib..(i + 1) * ib, j * jb..(j + 1) * jb]);
            block.assign(&(b * scale));
        }
    }
    out
}

/// Khatri-Rao product: column-wise Kronecker, `(IM) x F`.
pub fn khatri_rao(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    if a.ncols() != b.ncols() {
        return Err(Error::Dimension(format!(
            "khatri_rao: column counts differ ({} vs {})",
            a.ncols(),
            b.ncols()
        )));
    }
    let (ia, f) = a.dim();
    let ib = b.nrows();
    let mut out = Array2::zeros((ia * ib, f));
    for c in 0..f {
        for i in 0..ia {
            let av = a[[i, c]];
            for m in 0..ib {
                out[[i * ib + m, c]] = av * b[[m, c]];
            }
        }
    }
    Ok(out)
}

/// Hadamard (elementwise) product of equal-shaped matrices.
pub fn hadamard(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "hadamard: shapes differ ({:?} vs {:?})",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a * b)
}

/// Mode-n matricization with the column ordering that makes
/// `X_(1) = A (C ⊙ B)^T`, `X_(2) = B (C ⊙ A)^T`, `X_(3) = C (B ⊙ A)^T`
/// hold exactly for factor-built tensors.
pub fn matricize(tensor: &CsiTensor, mode: usize) -> Result<Array2<f64>> {
    let (i_dim, j_dim, k_dim) = tensor.shape();
    let x = &tensor.data;
    let out = match mode {
        1 => {
            let mut m = Array2::zeros((i_dim, j_dim * k_dim));
            for k in 0..k_dim {
                for j in 0..j_dim {
                    for i in 0..i_dim {
                        m[[i, k * j_dim + j]] = x[[i, j, k]];
                    }
                }
            }
            m
        }
        2 => {
            let mut m = Array2::zeros((j_dim, i_dim * k_dim));
            for k in 0..k_dim {
                for j in 0..j_dim {
                    for i in 0..i_dim {
                        m[[j, k * i_dim + i]] = x[[i, j, k]];
                    }
                }
            }
            m
        }
        3 => {
            let mut m = Array2::zeros((k_dim, i_dim * j_dim));
            for k in 0..k_dim {
                for j in 0..j_dim {
                    for i in 0..i_dim {
                        m[[k, j * i_dim + i]] = x[[i, j, k]];
                    }
                }
            }
            m
        }
        other => {
            return Err(Error::Dimension(format!(
                "matricize: mode must be 1, 2, or 3, got {other}"
            )))
        }
    };
    Ok(out)
}

/// Sum of rank-one outer products `sum_f a_f ∘ b_f ∘ c_f`.
pub fn reconstruct(factors: &FactorSet) -> CsiTensor {
    let (i_dim, f) = factors.a.dim();
    let j_dim = factors.b.nrows();
    let k_dim = factors.c.nrows();
    let mut data = Array3::zeros((i_dim, j_dim, k_dim));
    for r in 0..f {
        for i in 0..i_dim {
            let ai = factors.a[[i, r]];
            if ai == 0.0 {
                continue;
            }
            for j in 0..j_dim {
                let ab = ai * factors.b[[j, r]];
                for k in 0..k_dim {
                    data[[i, j, k]] += ab * factors.c[[k, r]];
                }
            }
        }
    }
    CsiTensor { data }
}

fn frontal_slices(tensor: &CsiTensor) -> Vec<Array2<f64>> {
    let (_, _, k_dim) = tensor.shape();
    (0..k_dim)
        .map(|k| tensor.data.slice(s![.., .., k]).to_owned())
        .collect()
}

/// One full ALS pass on a tensor given by its frontal slices. `offset_sq`
/// is energy outside the slices' span (zero for the plain path), and
/// `total_norm` the Frobenius norm the fit is reported against.
fn als_sweeps(
    slices: &[Array2<f64>],
    a: &mut Array2<f64>,
    b: &mut Array2<f64>,
    c: &mut Array2<f64>,
    opts: &CpOptions,
    offset_sq: f64,
    total_norm: f64,
) -> Vec<f64> {
    let f = a.ncols();
    let k_dim = slices.len();
    let mut history = Vec::new();
    let mut prev_fit: Option<f64> = None;

    for _ in 0..opts.max_sweeps {
        // A <- X_(1) (C ⊙ B) (C^T C * B^T B)^+
        let mut g = Array2::zeros((a.nrows(), f));
        for k in 0..k_dim {
            let p = slices[k].dot(b);
            let row = c.row(k);
            g += &(&p * &row);
        }
        let gram = (c.t().dot(c)) * (b.t().dot(b));
        *a = g.dot(&linalg::pseudo_inverse(&gram, PINV_CUTOFF));

        // B <- X_(2) (C ⊙ A) (C^T C * A^T A)^+
        let mut g = Array2::zeros((b.nrows(), f));
        for k in 0..k_dim {
            let p = slices[k].t().dot(a);
            let row = c.row(k);
            g += &(&p * &row);
        }
        let gram = (c.t().dot(c)) * (a.t().dot(a));
        *b = g.dot(&linalg::pseudo_inverse(&gram, PINV_CUTOFF));

        // C <- X_(3) (B ⊙ A) (B^T B * A^T A)^+
        let mut g3 = Array2::zeros((k_dim, f));
        for k in 0..k_dim {
            let p = slices[k].dot(b);
            let col = (&p * &*a).sum_axis(Axis(0));
            g3.row_mut(k).assign(&col);
        }
        let gram = (b.t().dot(b)) * (a.t().dot(a));
        *c = g3.dot(&linalg::pseudo_inverse(&gram, PINV_CUTOFF));

        // Relative reconstruction error, computed directly so that tiny
        // residuals are not swamped by cancellation noise: the Gram-based
        // shortcut |X|^2 + |X̂|^2 - 2<X, X̂> loses ~1e-8 relative accuracy
        // near convergence.
        let mut resid_sq = 0.0;
        for k in 0..k_dim {
            let scaled = &*a * &c.row(k);
            let xhat = scaled.dot(&b.t());
            resid_sq += slices[k]
                .iter()
                .zip(xhat.iter())
                .map(|(x, m)| (x - m) * (x - m))
                .sum::<f64>();
        }
        let fit = if total_norm > 0.0 {
            (offset_sq + resid_sq).max(0.0).sqrt() / total_norm
        } else {
            0.0
        };
        history.push(fit);
        if let Some(prev) = prev_fit {
            if (prev - fit).abs() < opts.tol {
                break;
            }
        }
        prev_fit = Some(fit);
    }
    history
}

fn validate_cp_inputs(tensor: &CsiTensor, f: usize, opts: &CpOptions) -> Result<()> {
    let (i, j, k) = tensor.shape();
    if f == 0 {
        return Err(Error::Config("component count F must be >= 1".into()));
    }
    let cap = (i * j).min(j * k).min(i * k);
    if f > cap {
        return Err(Error::Config(format!(
            "component count F={f} exceeds min(IJ, JK, IK)={cap}"
        )));
    }
    if opts.max_sweeps == 0 {
        return Err(Error::Config("max_sweeps must be >= 1".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Config("tol must be > 0".into()));
    }
    if tensor.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cp_als input tensor"));
    }
    Ok(())
}

/// Cosine/sine initialization of the first/second mode factors at the
/// given rates; columns beyond the provided pairs are seeded randomly.
fn structured_ab(
    i_dim: usize,
    j_dim: usize,
    f: usize,
    rates: &[f64],
    sampling_rate_hz: f64,
    rng: &mut ChaCha8Rng,
) -> (Array2<f64>, Array2<f64>) {
    let mut a = Array2::zeros((i_dim, f));
    let mut b = Array2::zeros((j_dim, f));
    let pairs = rates.len().min(f / 2);
    for (pair, &bpm) in rates.iter().take(pairs).enumerate() {
        let w = TAU * bpm / 60.0 / sampling_rate_hz;
        for t in 0..i_dim {
            a[[t, 2 * pair]] = (w * t as f64).cos();
            a[[t, 2 * pair + 1]] = (w * t as f64).sin();
        }
        for t in 0..j_dim {
            b[[t, 2 * pair]] = (w * t as f64).cos();
            b[[t, 2 * pair + 1]] = (w * t as f64).sin();
        }
    }
    for r in 2 * pairs..f {
        for t in 0..i_dim {
            a[[t, r]] = rng.random_range(-1.0..1.0);
        }
        for t in 0..j_dim {
            b[[t, r]] = rng.random_range(-1.0..1.0);
        }
    }
    (a, b)
}

/// Least-squares C given A, B: one mode-3 MTTKRP plus the Gram
/// pseudoinverse.
fn solve_c(slices: &[Array2<f64>], a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let f = a.ncols();
    let mut g3 = Array2::zeros((slices.len(), f));
    for (k, slice) in slices.iter().enumerate() {
        let p = slice.dot(b);
        let col = (&p * a).sum_axis(Axis(0));
        g3.row_mut(k).assign(&col);
    }
    let gram = (b.t().dot(b)) * (a.t().dot(a));
    g3.dot(&linalg::pseudo_inverse(&gram, PINV_CUTOFF))
}

/// CP decomposition by alternating least squares.
///
/// After convergence the columns of B and C are scaled to unit norm with
/// the scale absorbed into A, components are sorted by descending column
/// norm of A, and signs are fixed so the max-magnitude entries of each
/// `b_f` and `c_f` are positive.
pub fn cp_als(tensor: &CsiTensor, f: usize, opts: &CpOptions) -> Result<FactorSet> {
    validate_cp_inputs(tensor, f, opts)?;
    let (i_dim, j_dim, k_dim) = tensor.shape();
    let slices = frontal_slices(tensor);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (mut a, mut b, mut c) = match opts.init {
        CpInit::Random => {
            let a = Array2::from_shape_fn((i_dim, f), |_| rng.sample(rand_distr::StandardNormal));
            let b = Array2::from_shape_fn((j_dim, f), |_| rng.sample(rand_distr::StandardNormal));
            let c = Array2::from_shape_fn((k_dim, f), |_| rng.sample(rand_distr::StandardNormal));
            (a, b, c)
        }
        CpInit::SubspaceRates { sampling_rate_hz } => {
            let rates = subspace_rates(tensor, f / 2, sampling_rate_hz, opts.seed);
            let (a, b) = structured_ab(i_dim, j_dim, f, &rates, sampling_rate_hz, &mut rng);
            let c = solve_c(&slices, &a, &b);
            (a, b, c)
        }
    };

    let total_norm = frobenius_norm(tensor);
    let fit_history = als_sweeps(&slices, &mut a, &mut b, &mut c, opts, 0.0, total_norm);

    let mut factors = FactorSet {
        a,
        b,
        c,
        fit_history,
    };
    canonicalize(&mut factors);
    Ok(factors)
}

/// Scale b/c columns to unit norm into A, fix signs, sort by component
/// weight.
fn canonicalize(factors: &mut FactorSet) {
    let f = factors.components();
    for r in 0..f {
        let nb = factors.b.column(r).dot(&factors.b.column(r)).sqrt();
        if nb > 0.0 {
            factors.b.column_mut(r).mapv_inplace(|v| v / nb);
            factors.a.column_mut(r).mapv_inplace(|v| v * nb);
        }
        let nc = factors.c.column(r).dot(&factors.c.column(r)).sqrt();
        if nc > 0.0 {
            factors.c.column_mut(r).mapv_inplace(|v| v / nc);
            factors.a.column_mut(r).mapv_inplace(|v| v * nc);
        }
        let flip = |col: ndarray::ArrayView1<f64>| {
            let mut best = 0usize;
            let mut mag = -1.0;
            for (idx, &v) in col.iter().enumerate() {
                if v.abs() > mag {
                    mag = v.abs();
                    best = idx;
                }
            }
            col[best] < 0.0
        };
        if flip(factors.b.column(r)) {
            factors.b.column_mut(r).mapv_inplace(|v| -v);
            factors.a.column_mut(r).mapv_inplace(|v| -v);
        }
        if flip(factors.c.column(r)) {
            factors.c.column_mut(r).mapv_inplace(|v| -v);
            factors.a.column_mut(r).mapv_inplace(|v| -v);
        }
    }
    let mut order: Vec<usize> = (0..f).collect();
    let weights: Vec<f64> = (0..f)
        .map(|r| factors.a.column(r).dot(&factors.a.column(r)))
        .collect();
    order.sort_by(|&x, &y| weights[y].total_cmp(&weights[x]));
    let reorder = |m: &Array2<f64>| {
        let mut out = Array2::zeros(m.dim());
        for (dst, &src) in order.iter().enumerate() {
            out.column_mut(dst).assign(&m.column(src));
        }
        out
    };
    factors.a = reorder(&factors.a);
    factors.b = reorder(&factors.b);
    factors.c = reorder(&factors.c);
}

/// Result of the Kruskal uniqueness diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KruskalCheck {
    pub k_a: usize,
    pub k_b: usize,
    pub k_c: usize,
    /// `k_A + k_B + k_C >= 2F + 2`.
    pub unique: bool,
}

/// k-rank of each factor matrix and the uniqueness condition
/// `k_A + k_B + k_C >= 2F + 2`.
///
/// The k-rank test enumerates column subsets, which is exponential in F;
/// component counts above 12 are rejected.
pub fn kruskal_check(factors: &FactorSet) -> Result<KruskalCheck> {
    let f = factors.components();
    if f > KRANK_MAX_COMPONENTS {
        return Err(Error::Config(format!(
            "kruskal_check supports at most {KRANK_MAX_COMPONENTS} components, got {f}"
        )));
    }
    let k_a = k_rank(&factors.a);
    let k_b = k_rank(&factors.b);
    let k_c = k_rank(&factors.c);
    Ok(KruskalCheck {
        k_a,
        k_b,
        k_c,
        unique: k_a + k_b + k_c >= 2 * f + 2,
    })
}

/// Largest k such that every k-column subset has full column rank.
fn k_rank(m: &Array2<f64>) -> usize {
    let f = m.ncols();
    for k in 1..=f {
        let mut all_full = true;
        for subset in combinations(f, k) {
            let mut sub = Array2::zeros((m.nrows(), k));
            for (dst, &src) in subset.iter().enumerate() {
                sub.column_mut(dst).assign(&m.column(src));
            }
            if linalg::numerical_rank(&sub, KRANK_CUTOFF) < k {
                all_full = false;
                break;
            }
        }
        if !all_full {
            return k - 1;
        }
    }
    f
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Subspace compression and pole-structured initialization
// ---------------------------------------------------------------------------

struct Subspace {
    q1: Array2<f64>,
    q2: Array2<f64>,
    core: Vec<Array2<f64>>,
    /// |X|^2 - |core|^2: energy outside the compression subspace.
    offset_sq: f64,
    total_norm: f64,
}

/// Randomized range finder for the mode-1 (transpose=false) or mode-2
/// (transpose=true) unfolding, one power iteration included.
fn range_basis(
    slices: &[Array2<f64>],
    dims: usize,
    transpose: bool,
    rng: &mut ChaCha8Rng,
) -> Array2<f64> {
    let rows = if transpose {
        slices[0].ncols()
    } else {
        slices[0].nrows()
    };
    let cols = if transpose {
        slices[0].nrows()
    } else {
        slices[0].ncols()
    };
    let m = dims.min(rows);
    let mut y = Array2::zeros((rows, m));
    for slice in slices.iter() {
        let omega = Array2::from_shape_fn((cols, m), |_| rng.random_range(-1.0..1.0));
        if transpose {
            y += &slice.t().dot(&omega);
        } else {
            y += &slice.dot(&omega);
        }
    }
    let q = linalg::orthonormalize(&y);
    // one power iteration sharpens the subspace
    let mut y2 = Array2::zeros((rows, m));
    for slice in slices.iter() {
        if transpose {
            y2 += &slice.t().dot(&slice.dot(&q));
        } else {
            y2 += &slice.dot(&slice.t().dot(&q));
        }
    }
    linalg::orthonormalize(&y2)
}

fn compress(tensor: &CsiTensor, dims: usize, seed: u64) -> Subspace {
    let slices = frontal_slices(tensor);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0DE_5EED);
    let q1 = range_basis(&slices, dims, false, &mut rng);
    let q2 = range_basis(&slices, dims, true, &mut rng);
    let core: Vec<Array2<f64>> = slices.iter().map(|s| q1.t().dot(s).dot(&q2)).collect();
    let norm_sq: f64 = slices
        .iter()
        .map(|s| s.iter().map(|v| v * v).sum::<f64>())
        .sum();
    let core_sq: f64 = core
        .iter()
        .map(|s| s.iter().map(|v| v * v).sum::<f64>())
        .sum();
    Subspace {
        q1,
        q2,
        core,
        offset_sq: (norm_sq - core_sq).max(0.0),
        total_norm: norm_sq.sqrt(),
    }
}

/// Estimate the dominant oscillation rates (bpm) present in the tensor from
/// the shift-invariance of its mode-1 subspace, then rank candidates by the
/// energy they capture. Returns at most `count` rates, all inside the
/// breathing band and pairwise at least 0.8 bpm apart.
pub fn subspace_rates(
    tensor: &CsiTensor,
    count: usize,
    sampling_rate_hz: f64,
    seed: u64,
) -> Vec<f64> {
    let (i_dim, _, k_dim) = tensor.shape();
    if count == 0 || i_dim < 4 {
        return Vec::new();
    }
    let dims = (2 * count + 6).min(i_dim);
    let slices = frontal_slices(tensor);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5095_ACE5);
    let q1 = range_basis(&slices, dims, false, &mut rng);

    // shift invariance: rows 0..I-1 vs rows 1..I
    let up = q1.slice(s![..i_dim - 1, ..]).to_owned();
    let down = q1.slice(s![1.., ..]).to_owned();
    let psi = linalg::lstsq(&up, &down, 1e-12);
    let eig = linalg::complex_eigenvalues(&psi);

    let band = crate::model::BREATHING_BAND_BPM;
    let mut candidates: Vec<f64> = Vec::new();
    for lam in eig {
        if lam.im <= 1e-9 {
            continue;
        }
        let modulus = (lam.re * lam.re + lam.im * lam.im).sqrt();
        if modulus < 0.8 {
            continue;
        }
        let bpm = lam.im.atan2(lam.re) * sampling_rate_hz * 60.0 / TAU;
        if bpm >= band.0 && bpm <= band.1 {
            candidates.push(bpm);
        }
    }
    if candidates.is_empty() {
        return Vec::new();
    }

    // rank by projected energy of the leading fiber of each slice
    let mut first_cols = Array2::zeros((i_dim, k_dim));
    for (k, slice) in slices.iter().enumerate() {
        first_cols.column_mut(k).assign(&slice.column(0));
    }
    let mut scored: Vec<(f64, f64)> = candidates
        .into_iter()
        .map(|bpm| {
            let w = TAU * bpm / 60.0 / sampling_rate_hz;
            let mut basis = Array2::zeros((i_dim, 2));
            for t in 0..i_dim {
                basis[[t, 0]] = (w * t as f64).cos();
                basis[[t, 1]] = (w * t as f64).sin();
            }
            let q = linalg::orthonormalize(&basis);
            let proj = q.t().dot(&first_cols);
            let energy: f64 = proj.iter().map(|v| v * v).sum();
            (energy, bpm)
        })
        .collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut picked = Vec::new();
    for (_, bpm) in scored {
        if picked.iter().all(|&p: &f64| (p - bpm).abs() > 0.8) {
            picked.push(bpm);
        }
        if picked.len() == count {
            break;
        }
    }
    picked
}

/// CP decomposition on the compressed core tensor: the alternating updates
/// run on the projected core, which makes sweeps cheap enough to converge
/// fully, and the factors are expanded back through the orthonormal bases
/// afterwards. Fits are relative to the original tensor.
pub fn compressed_cp_als(
    tensor: &CsiTensor,
    f: usize,
    opts: &CpOptions,
    subspace_dims: usize,
) -> Result<FactorSet> {
    validate_cp_inputs(tensor, f, opts)?;
    let (i_dim, j_dim, _) = tensor.shape();
    let sub = compress(tensor, subspace_dims.max(f), opts.seed);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x1217_75EE);
    let (mut a, mut b, mut c) = match opts.init {
        CpInit::Random => {
            let a = Array2::from_shape_fn((sub.q1.ncols(), f), |_| {
                rng.sample(rand_distr::StandardNormal)
            });
            let b = Array2::from_shape_fn((sub.q2.ncols(), f), |_| {
                rng.sample(rand_distr::StandardNormal)
            });
            let c = solve_c(&sub.core, &a, &b);
            (a, b, c)
        }
        CpInit::SubspaceRates { sampling_rate_hz } => {
            let rates = subspace_rates(tensor, f / 2, sampling_rate_hz, opts.seed);
            let (a0, b0) = structured_ab(i_dim, j_dim, f, &rates, sampling_rate_hz, &mut rng);
            let a = sub.q1.t().dot(&a0);
            let b = sub.q2.t().dot(&b0);
            let c = solve_c(&sub.core, &a, &b);
            (a, b, c)
        }
    };

    let fit_history = als_sweeps(
        &sub.core,
        &mut a,
        &mut b,
        &mut c,
        opts,
        sub.offset_sq,
        sub.total_norm,
    );

    let mut factors = FactorSet {
        a: sub.q1.dot(&a),
        b: sub.q2.dot(&b),
        c,
        fit_history,
    };
    canonicalize(&mut factors);
    Ok(factors)
}
