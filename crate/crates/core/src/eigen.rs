//! Dense eigendecomposition for general complex matrices.
//!
//! `eig_dense` follows the classic pipeline: diagonal balancing, Householder
//! reduction to upper Hessenberg form, single-shift complex QR with Wilkinson
//! shifts and deflation, and back-substitution on the triangular Schur factor
//! for right eigenvectors. Balancing matters a lot for the chains in this
//! crate: strongly nonreciprocal hopping makes the raw matrix extremely
//! non-normal, and the diagonal similarity absorbs most of that.
//!
//! `eig2x2` is the closed-form quadratic used for Bloch Hamiltonians and
//! `sort_bands_by_continuity` turns per-k eigenvalue pairs into band curves.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

const EPS: f64 = f64::EPSILON;
const SAFE_MIN: f64 = f64::MIN_POSITIVE;
const RADIX: f64 = 2.0;
/// QR sweeps allowed per eigenvalue.
pub const SWEEPS_PER_EIGENVALUE: usize = 30;
/// Pairings whose costs differ by less than this are treated as ties.
pub const PAIRING_TIE_TOL: f64 = 1e-12;

#[inline]
fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Eigenvalues with optional right eigenvectors.
///
/// `residuals[i]` is `|M v_i - lambda_i v_i| / max(1, |M|_F)` when vectors are
/// present, and empty otherwise. A defective 2x2 input repeats its only
/// eigenvector and marks the copy with an infinite residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Option<Vec<Vec<Complex64>>>,
    pub residuals: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    fn with_residuals(m: &ComplexMatrix, eigenvalues: Vec<Complex64>, vectors: Vec<Vec<Complex64>>) -> Self {
        let scale = m.frobenius_norm().max(1.0);
        let residuals = eigenvalues
            .iter()
            .zip(&vectors)
            .map(|(&lambda, v)| {
                let mv = m.mul_vec(v);
                mv.iter()
                    .zip(v)
                    .map(|(a, b)| (a - lambda * b).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
                    / scale
            })
            .collect();
        Self {
            eigenvalues,
            eigenvectors: Some(vectors),
            residuals,
        }
    }
}

/// Scales to unit 2-norm and rotates the largest component onto the positive
/// real axis.
pub fn normalize_gauge(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return;
    }
    let mut pivot = 0;
    let mut best = -1.0;
    for (i, z) in v.iter().enumerate() {
        // first index wins ties so the gauge is deterministic
        if z.norm() > best * (1.0 + 1e-12) {
            best = z.norm();
            pivot = i;
        }
    }
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z = *z * phase / norm;
    }
    v[pivot] = Complex64::new(v[pivot].norm(), 0.0);
}

/// Closed-form eigenpairs of a 2x2 matrix.
pub fn eig2x2(m: &ComplexMatrix) -> Result<Spectrum> {
    if m.dim() != 2 {
        return Err(Error::validation(
            "matrix",
            format!("eig2x2 needs a 2x2 matrix, got {}x{}", m.dim(), m.dim()),
        ));
    }
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let half_tr = (a + d) / 2.0;
    let root = (half_tr * half_tr - (a * d - b * c)).sqrt();
    let values = [half_tr + root, half_tr - root];

    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(2);
    let scale = m.max_abs().max(SAFE_MIN);
    for &lambda in &values {
        let r0 = [a - lambda, b];
        let r1 = [c, d - lambda];
        let n0 = r0[0].norm_sqr() + r0[1].norm_sqr();
        let n1 = r1[0].norm_sqr() + r1[1].norm_sqr();
        let row = if n0 >= n1 { r0 } else { r1 };
        let mut v = if n0.max(n1).sqrt() <= 8.0 * EPS * scale {
            // scalar multiple of identity: any vector works, pick standard basis
            if vectors.is_empty() {
                vec![Complex64::new(1.0, 0.0), Complex64::default()]
            } else {
                vec![Complex64::default(), Complex64::new(1.0, 0.0)]
            }
        } else {
            vec![-row[1], row[0]]
        };
        normalize_gauge(&mut v);
        vectors.push(v);
    }
    let mut spec = Spectrum::with_residuals(m, values.to_vec(), vectors);

    // Repeated root with a single independent direction: flag the copy.
    let v = spec.eigenvectors.as_ref().unwrap();
    let overlap: Complex64 = v[0].iter().zip(&v[1]).map(|(x, y)| x.conj() * y).sum();
    if (1.0 - overlap.norm()).abs() < 1e-10 {
        spec.residuals[1] = f64::INFINITY;
    }
    Ok(spec)
}

/// All eigenvalues of a general complex matrix, with right eigenvectors when
/// `want_vectors` is set.
pub fn eig_dense(m: &ComplexMatrix, want_vectors: bool) -> Result<Spectrum> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::validation("matrix", "dimension must be positive"));
    }
    if !m.is_finite() {
        return Err(Error::validation("matrix", "entries must be finite"));
    }
    if n == 1 {
        let values = vec![m[(0, 0)]];
        if !want_vectors {
            return Ok(Spectrum {
                eigenvalues: values,
                eigenvectors: None,
                residuals: Vec::new(),
            });
        }
        return Ok(Spectrum::with_residuals(
            m,
            values,
            vec![vec![Complex64::new(1.0, 0.0)]],
        ));
    }

    let mut h = m.clone();
    let scaling = balance(&mut h);
    let mut z = want_vectors.then(|| ComplexMatrix::identity(n));
    hessenberg(&mut h, z.as_mut());
    hessenberg_qr(&mut h, z.as_mut())?;

    let eigenvalues: Vec<Complex64> = (0..n).map(|i| h[(i, i)]).collect();
    let Some(z) = z else {
        return Ok(Spectrum {
            eigenvalues,
            eigenvectors: None,
            residuals: Vec::new(),
        });
    };

    let mut vectors = triangular_eigenvectors(&h);
    for v in vectors.iter_mut() {
        let mut full = z.mul_vec(v);
        for (x, s) in full.iter_mut().zip(&scaling) {
            *x *= *s;
        }
        normalize_gauge(&mut full);
        *v = full;
    }
    Ok(Spectrum::with_residuals(m, eigenvalues, vectors))
}

/// Diagonal similarity `D^-1 A D` equalizing row and column norms, with
/// powers of two so no rounding is introduced. Returns the diagonal of `D`.
fn balance(a: &mut ComplexMatrix) -> Vec<f64> {
    let n = a.dim();
    let mut scale = vec![1.0; n];
    let radix2 = RADIX * RADIX;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += cabs1(a[(j, i)]);
                    r += cabs1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= radix2;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= radix2;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                scale[i] *= f;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
    scale
}

/// Householder reduction to upper Hessenberg form, accumulating the unitary
/// factor into `z` when given.
fn hessenberg(a: &mut ComplexMatrix, mut z: Option<&mut ComplexMatrix>) {
    let n = a.dim();
    if n < 3 {
        return;
    }
    let mut v = vec![Complex64::default(); n];
    for col in 0..n - 2 {
        let alpha = a[(col + 1, col)];
        let tail: f64 = (col + 2..n).map(|i| a[(i, col)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let xnorm = (alpha.norm_sqr() + tail).sqrt();
        let phase = if alpha.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            alpha / alpha.norm()
        };
        // v = x + phase*|x| e1; reflector P = I - 2 v v^H / (v^H v)
        v[col + 1] = alpha + phase * xnorm;
        for i in col + 2..n {
            v[i] = a[(i, col)];
        }
        let vnorm2: f64 = (col + 1..n).map(|i| v[i].norm_sqr()).sum();
        let beta = 2.0 / vnorm2;

        // left: A <- P A on rows col+1..n
        for j in col..n {
            let s: Complex64 = (col + 1..n).map(|i| v[i].conj() * a[(i, j)]).sum::<Complex64>() * beta;
            for i in col + 1..n {
                a[(i, j)] -= v[i] * s;
            }
        }
        // right: A <- A P on columns col+1..n
        for i in 0..n {
            let s: Complex64 = (col + 1..n).map(|j| a[(i, j)] * v[j]).sum::<Complex64>() * beta;
            for j in col + 1..n {
                a[(i, j)] -= s * v[j].conj();
            }
        }
        if let Some(z) = z.as_deref_mut() {
            for i in 0..n {
                let s: Complex64 = (col + 1..n).map(|j| z[(i, j)] * v[j]).sum::<Complex64>() * beta;
                for j in col + 1..n {
                    z[(i, j)] -= s * v[j].conj();
                }
            }
        }
        a[(col + 1, col)] = -phase * xnorm;
        for i in col + 2..n {
            a[(i, col)] = Complex64::default();
        }
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(a, b)` to `(r, 0)`.
#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn zeroing(a: Complex64, b: Complex64) -> Self {
        if b == Complex64::default() {
            return Self {
                c: 1.0,
                s: Complex64::default(),
            };
        }
        let na = a.norm();
        if na == 0.0 {
            return Self {
                c: 0.0,
                s: b.conj() / b.norm(),
            };
        }
        let norm = na.hypot(b.norm());
        Self {
            c: na / norm,
            s: (a / na) * b.conj() / norm,
        }
    }

    /// Rows `p`, `q` of `m`, columns in `cols`.
    fn apply_rows(&self, m: &mut ComplexMatrix, p: usize, q: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let x = m[(p, j)];
            let y = m[(q, j)];
            m[(p, j)] = x * self.c + self.s * y;
            m[(q, j)] = -self.s.conj() * x + y * self.c;
        }
    }

    /// Columns `p`, `q` of `m` times the adjoint rotation, rows in `rows`.
    fn apply_cols(&self, m: &mut ComplexMatrix, p: usize, q: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let x = m[(i, p)];
            let y = m[(i, q)];
            m[(i, p)] = x * self.c + y * self.s.conj();
            m[(i, q)] = -x * self.s + y * self.c;
        }
    }
}

/// Shifted QR on an upper Hessenberg matrix, leaving it upper triangular.
/// With `z` the full Schur form is maintained and the rotations accumulated;
/// without it only the active window is updated.
fn hessenberg_qr(h: &mut ComplexMatrix, mut z: Option<&mut ComplexMatrix>) -> Result<()> {
    let n = h.dim();
    let full = z.is_some();
    let budget = SWEEPS_PER_EIGENVALUE * n;
    let mut total = 0usize;
    let norm = h.as_slice().iter().map(|&x| cabs1(x)).fold(0.0, f64::max);
    let mut hi = n - 1;
    let mut its = 0usize;

    while hi > 0 {
        // locate the active unreduced block lo..=hi
        let mut lo = hi;
        while lo > 0 {
            let sub = cabs1(h[(lo, lo - 1)]);
            let mut diag = cabs1(h[(lo - 1, lo - 1)]) + cabs1(h[(lo, lo)]);
            if diag == 0.0 {
                diag = norm;
            }
            if sub <= EPS * diag || sub <= SAFE_MIN {
                h[(lo, lo - 1)] = Complex64::default();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        if total >= budget {
            return Err(Error::NotConverged {
                iterations: total,
                deflated: n - 1 - hi,
                dimension: n,
            });
        }
        total += 1;
        its += 1;

        let shift = if its.is_multiple_of(10) {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(0.75 * cabs1(h[(hi, hi - 1)]), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let (row_end, col_start) = if full { (n, 0) } else { (hi + 1, lo) };
        let mut g = Givens::zeroing(h[(lo, lo)] - shift, h[(lo + 1, lo)]);
        for k in lo..hi {
            if k > lo {
                g = Givens::zeroing(h[(k, k - 1)], h[(k + 1, k - 1)]);
                g.apply_rows(h, k, k + 1, k - 1..row_end);
                h[(k + 1, k - 1)] = Complex64::default();
            } else {
                g.apply_rows(h, k, k + 1, k..row_end);
            }
            let last = (k + 2).min(hi);
            g.apply_cols(h, k, k + 1, col_start..last + 1);
            if let Some(z) = z.as_deref_mut() {
                g.apply_cols(z, k, k + 1, 0..n);
            }
        }
    }
    Ok(())
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) / 2.0;
    let root = (half * half + b * c).sqrt();
    let mu1 = d + half + root;
    let mu2 = d + half - root;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Right eigenvectors of an upper triangular matrix by back-substitution.
fn triangular_eigenvectors(t: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    let n = t.dim();
    let small = SAFE_MIN * (n as f64 / EPS);
    let big = 1e100;
    (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            let smin = (EPS * cabs1(lambda)).max(small);
            let mut x = vec![Complex64::default(); n];
            x[k] = Complex64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let s: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * x[j]).sum();
                let mut denom = t[(i, i)] - lambda;
                if cabs1(denom) < smin {
                    denom = Complex64::new(smin, 0.0);
                }
                x[i] = -s / denom;
                if cabs1(x[i]) > big {
                    let inv = 1.0 / cabs1(x[i]);
                    for v in x[i..=k].iter_mut() {
                        *v *= inv;
                    }
                }
            }
            x
        })
        .collect()
}

/// Two bands sampled over a closed, uniform k-loop.
#[derive(Debug, Clone, PartialEq)]
pub struct BandTrajectories {
    pub k_grid: Vec<f64>,
    pub bands: [Vec<Complex64>; 2],
    /// The loop closes with band 0 continuing into band 1, so a single curve
    /// of period 4pi visits both bands.
    pub closes_with_swap: bool,
    /// Step indices `j` (pairing between `j` and `j + 1`, wrapping) where both
    /// pairings were equally good and the previous order was kept.
    pub near_degenerate: Vec<usize>,
}

impl BandTrajectories {
    pub fn len(&self) -> usize {
        self.k_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_grid.is_empty()
    }

    /// The closed loops traced by the bands: two loops of length `n`, or one
    /// loop of length `2n` when the bands swap on closure.
    pub fn loops(&self) -> Vec<Vec<Complex64>> {
        if self.closes_with_swap {
            let mut l = self.bands[0].clone();
            l.extend_from_slice(&self.bands[1]);
            vec![l]
        } else {
            vec![self.bands[0].clone(), self.bands[1].clone()]
        }
    }
}

fn pairing_costs(prev: [Complex64; 2], next: [Complex64; 2]) -> (f64, f64) {
    let keep = (next[0] - prev[0]).norm() + (next[1] - prev[1]).norm();
    let swap = (next[1] - prev[0]).norm() + (next[0] - prev[1]).norm();
    (keep, swap)
}

/// Greedy nearest-neighbour band tracking over a uniform closed k-loop.
pub fn sort_bands_by_continuity(raw: &[(f64, [Complex64; 2])]) -> Result<BandTrajectories> {
    let n = raw.len();
    if n < 16 {
        return Err(Error::validation(
            "k-grid",
            format!("band tracking needs at least 16 points, got {n}"),
        ));
    }
    let step = TAU / n as f64;
    for (j, (k, _)) in raw.iter().enumerate() {
        if (k - j as f64 * step).abs() > 1e-9 {
            return Err(Error::validation(
                "k-grid",
                format!("point {j} is {k}, expected uniform spacing 2pi/{n} starting at 0"),
            ));
        }
    }

    let mut bands = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut near_degenerate = Vec::new();
    let mut current = raw[0].1;
    bands[0].push(current[0]);
    bands[1].push(current[1]);
    for (j, (_, pair)) in raw.iter().enumerate().skip(1) {
        let (keep, swap) = pairing_costs(current, *pair);
        if (keep - swap).abs() <= PAIRING_TIE_TOL {
            near_degenerate.push(j - 1);
        }
        current = if swap < keep - PAIRING_TIE_TOL {
            [pair[1], pair[0]]
        } else {
            *pair
        };
        bands[0].push(current[0]);
        bands[1].push(current[1]);
    }

    let first = [bands[0][0], bands[1][0]];
    let (keep, swap) = pairing_costs(current, first);
    if (keep - swap).abs() <= PAIRING_TIE_TOL {
        near_degenerate.push(n - 1);
    }
    let closes_with_swap = swap < keep - PAIRING_TIE_TOL;

    // a closing step far larger than any interior step means tracking failed
    let max_step = (1..n)
        .map(|j| {
            (bands[0][j] - bands[0][j - 1])
                .norm()
                .max((bands[1][j] - bands[1][j - 1]).norm())
        })
        .fold(0.0, f64::max);
    let closing = if closes_with_swap {
        (first[1] - current[0]).norm().max((first[0] - current[1]).norm())
    } else {
        (first[0] - current[0]).norm().max((first[1] - current[1]).norm())
    };
    if closing > 10.0 * max_step + 1e-12 {
        return Err(Error::OpenTrajectory { gap: closing });
    }

    Ok(BandTrajectories {
        k_grid: raw.iter().map(|(k, _)| *k).collect(),
        bands,
        closes_with_swap,
        near_degenerate,
    })
}
