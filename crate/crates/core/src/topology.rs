//! Braiding degree, spectral winding numbers, exceptional points and the
//! `(tL, tR)` phase diagram.
//!
//! Every winding number here is an accumulated phase: the loop is sampled on
//! a uniform k-grid, consecutive phase differences are taken on the principal
//! branch, and the sum is divided by 2pi. A step whose principal difference
//! exceeds `MAX_PHASE_STEP` means the grid cannot resolve the loop, and a
//! total farther than `INTEGRALITY_TOL` from an integer is rejected.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{sort_bands_by_continuity, BandTrajectories};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::model::{analytic_eigenvalues, bloch_hamiltonian, GaugeVector, ModelParams};
use crate::skin::{gamma, obc_eigenstates, DEFAULT_WINDOW_FRACTION};

pub const MIN_TOPOLOGY_POINTS: usize = 64;
pub const DEFAULT_KPOINTS: usize = 1024;
pub const REFINED_KPOINTS: usize = 4096;
pub const INTEGRALITY_TOL: f64 = 0.05;
pub const MAX_PHASE_STEP: f64 = PI / 2.0;
pub const DEFAULT_EP_TOL: f64 = 1e-3;
/// Distance below which a reference energy counts as lying on the spectrum.
pub const ON_SPECTRUM_TOL: f64 = 1e-9;
/// Phase-diagram sentinel: the cell sits on an exceptional point.
pub const NU_ON_BOUNDARY: i32 = 127;
/// Phase-diagram sentinel: the winding failed the integrality guard.
pub const NU_UNRESOLVED: i32 = -127;

/// Uniform samples `2 pi j / n`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KGrid {
    n_points: usize,
}

impl KGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < MIN_TOPOLOGY_POINTS {
            return Err(Error::validation(
                "kpoints",
                format!("topology needs at least {MIN_TOPOLOGY_POINTS} k-points, got {n_points}"),
            ));
        }
        Ok(Self { n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n_points as f64
    }

    pub fn value(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_points as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|j| self.value(j))
    }

    fn refined(&self) -> Option<KGrid> {
        (self.n_points < REFINED_KPOINTS).then_some(KGrid {
            n_points: REFINED_KPOINTS,
        })
    }
}

impl Default for KGrid {
    fn default() -> Self {
        Self {
            n_points: DEFAULT_KPOINTS,
        }
    }
}

/// Raw winding (in turns) of a closed sampled loop around the origin.
///
/// `ks` labels the samples for error reporting. The loop closes from the last
/// sample back to the first.
pub fn loop_winding(values: &[Complex64], ks: &[f64]) -> Result<f64> {
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = 1e-14 * scale.max(f64::MIN_POSITIVE);
    for (z, &k) in values.iter().zip(ks) {
        if z.norm() <= floor {
            return Err(Error::OnPhaseBoundary { k });
        }
    }
    let n = values.len();
    let mut total = 0.0;
    for j in 0..n {
        let step = (values[(j + 1) % n] / values[j]).arg();
        if step.abs() > MAX_PHASE_STEP {
            return Err(Error::GridTooCoarse {
                winding: f64::NAN,
                points: n,
            });
        }
        total += step;
    }
    Ok(total / TAU)
}

fn integral(winding: f64, points: usize) -> Result<i32> {
    let nearest = winding.round();
    if (winding - nearest).abs() > INTEGRALITY_TOL {
        return Err(Error::GridTooCoarse { winding, points });
    }
    Ok(nearest as i32)
}

/// Runs `f` on `grid`, retrying once on the refined grid when the
/// integrality guard trips.
fn with_refinement(grid: &KGrid, f: impl Fn(&KGrid) -> Result<i32>) -> Result<i32> {
    match f(grid) {
        Err(Error::GridTooCoarse { .. }) if grid.refined().is_some() => f(&grid.refined().unwrap()),
        other => other,
    }
}

/// `det(H - Tr H / 2)` for a 2x2 matrix.
fn traceless_det(h: &ComplexMatrix) -> Complex64 {
    let half = (h[(0, 0)] - h[(1, 1)]) / 2.0;
    -half * half - h[(0, 1)] * h[(1, 0)]
}

/// Braiding degree of any 2x2 Bloch family `k -> H(k)`.
pub fn braiding_degree_of(bloch: impl Fn(f64) -> ComplexMatrix, grid: &KGrid) -> Result<i32> {
    with_refinement(grid, |g| {
        let ks: Vec<f64> = g.values().collect();
        let f: Vec<Complex64> = ks.iter().map(|&k| traceless_det(&bloch(k))).collect();
        integral(loop_winding(&f, &ks)?, g.n_points())
    })
}

pub fn braiding_degree(p: &ModelParams, grid: &KGrid) -> Result<i32> {
    braiding_degree_of(|k| bloch_hamiltonian(p, k), grid)
}

/// Winding of `det(H(k) - E0)` for any 2x2 Bloch family.
pub fn spectral_winding_of(bloch: impl Fn(f64) -> ComplexMatrix, e0: Complex64, grid: &KGrid) -> Result<i32> {
    with_refinement(grid, |g| {
        let ks: Vec<f64> = g.values().collect();
        let mats: Vec<ComplexMatrix> = ks.iter().map(|&k| bloch(k)).collect();
        let distance = mats
            .iter()
            .flat_map(|h| {
                let half_tr = (h[(0, 0)] + h[(1, 1)]) / 2.0;
                let root = (-traceless_det(h)).sqrt();
                [half_tr + root, half_tr - root]
            })
            .map(|e| (e - e0).norm())
            .fold(f64::INFINITY, f64::min);
        if distance <= ON_SPECTRUM_TOL {
            return Err(Error::ReferenceOnSpectrum { distance });
        }
        let f: Vec<Complex64> = mats.iter().map(|h| h.shifted(-e0).det2()).collect();
        integral(loop_winding(&f, &ks)?, g.n_points())
    })
}

pub fn spectral_winding(p: &ModelParams, e0: Complex64, grid: &KGrid) -> Result<i32> {
    spectral_winding_of(|k| bloch_hamiltonian(p, k), e0, grid)
}

/// Continuity-sorted PBC bands from the closed-form eigenvalues.
pub fn band_trajectories(p: &ModelParams, grid: &KGrid) -> Result<BandTrajectories> {
    let raw: Vec<(f64, [Complex64; 2])> = grid
        .values()
        .map(|k| {
            let (a, b) = analytic_eigenvalues(p, k);
            (k, [a, b])
        })
        .collect();
    sort_bands_by_continuity(&raw)
}

/// Winding of each closed band loop around `e0`.
pub fn band_resolved_winding(traj: &BandTrajectories, e0: Complex64) -> Result<Vec<i32>> {
    traj.loops()
        .iter()
        .map(|lp| {
            let n = lp.len();
            // a swapped loop covers k in [0, 4pi)
            let ks: Vec<f64> = (0..n).map(|j| TAU * j as f64 / traj.len() as f64).collect();
            let shifted: Vec<Complex64> = lp.iter().map(|e| e - e0).collect();
            let distance = shifted.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
            if distance <= ON_SPECTRUM_TOL {
                return Err(Error::ReferenceOnSpectrum { distance });
            }
            integral(loop_winding(&shifted, &ks)?, n)
        })
        .collect()
}

/// Left-hand side of the exceptional-point boundary condition at `t0 = 1`.
pub fn phase_boundary_residual(t_left: f64, t_right: f64) -> Result<f64> {
    let a = t_left * t_left;
    let b = t_right * t_right;
    let diff = a - b;
    if diff.abs() <= 1e-14 * (a + b).max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(1.0 + (a + b) * (2.0 * b / (diff * diff) - 1.0) + 2.0 * b / diff)
}

/// Momenta where the band gap `|E+ - E-|` falls below `tol * max_k |E+ - E-|`.
///
/// Every local minimum of the gap on the grid is refined by golden-section
/// search of `|E+ - E-|^2` inside its two neighbouring cells, so the reported
/// momenta need not be grid points.
pub fn exceptional_scan(p: &ModelParams, grid: &KGrid, tol: f64) -> Vec<f64> {
    let disc = |k: f64| {
        let (e, _) = analytic_eigenvalues(p, k);
        (e * e).norm()
    };
    let ks: Vec<f64> = grid.values().collect();
    let gaps: Vec<f64> = ks.iter().map(|&k| 2.0 * disc(k).sqrt()).collect();
    let scale = gaps.iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return ks;
    }
    let n = ks.len();
    let h = grid.spacing();
    let mut found: Vec<f64> = Vec::new();
    for j in 0..n {
        let prev = gaps[(j + n - 1) % n];
        let next = gaps[(j + 1) % n];
        if gaps[j] > prev || gaps[j] > next {
            continue;
        }
        let k = golden_min(&disc, ks[j] - h, ks[j] + h);
        let gap = 2.0 * disc(k).sqrt();
        if gap < tol * scale {
            let k = k.rem_euclid(TAU);
            if !found.iter().any(|&q| circular_distance(q, k) < h) {
                found.push(k);
            }
        }
    }
    found.sort_by(f64::total_cmp);
    found
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn golden_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Reference energies on a `resolution x resolution` grid covering the PBC
/// spectrum's bounding box (inflated by 10% on each axis), with their
/// spectral windings. Points on the spectrum carry the error.
pub fn winding_probe(
    bloch: impl Fn(f64) -> ComplexMatrix + Sync,
    spectrum: &[Complex64],
    resolution: usize,
    grid: &KGrid,
) -> Vec<(Complex64, Result<i32>)> {
    let (mut re_lo, mut re_hi, mut im_lo, mut im_hi) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for e in spectrum {
        re_lo = re_lo.min(e.re);
        re_hi = re_hi.max(e.re);
        im_lo = im_lo.min(e.im);
        im_hi = im_hi.max(e.im);
    }
    let pad_re = 0.1 * (re_hi - re_lo).max(1e-6);
    let pad_im = 0.1 * (im_hi - im_lo).max(1e-6);
    let (re_lo, re_hi, im_lo, im_hi) = (re_lo - pad_re, re_hi + pad_re, im_lo - pad_im, im_hi + pad_im);
    let axis = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * (i as f64 + 0.5) / resolution as f64;
    (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let e0 = Complex64::new(
                axis(re_lo, re_hi, idx % resolution),
                axis(im_lo, im_hi, idx / resolution),
            );
            (e0, spectral_winding_of(&bloch, e0, grid))
        })
        .collect()
}

/// Topology and skin layers over the `(tL, tR)` plane at `t0 = 1`.
///
/// Cell `(i, j)` holds `tL = tl_axis[i]`, `tR = tr_axis[j]`; grids are stored
/// row-major with `i` as the row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub tl_axis: Vec<f64>,
    pub tr_axis: Vec<f64>,
    pub nu_values: Vec<Vec<i32>>,
    /// `NaN` where the skin computation failed.
    pub gamma_values: Vec<Vec<f64>>,
    /// `NaN` on the degenerate line `tL^2 = tR^2`.
    pub boundary_residuals: Vec<Vec<f64>>,
    pub chain_sites: usize,
    pub kpoints: usize,
}

impl PhaseDiagram {
    pub fn is_sentinel(nu: i32) -> bool {
        nu == NU_ON_BOUNDARY || nu == NU_UNRESOLVED
    }

    /// Index of the cell whose sample point is nearest `(tL, tR)`.
    pub fn cell_of(&self, t_left: f64, t_right: f64) -> (usize, usize) {
        let nearest = |axis: &[f64], t: f64| {
            (0..axis.len())
                .min_by(|&a, &b| (axis[a] - t).abs().total_cmp(&(axis[b] - t).abs()))
                .unwrap_or(0)
        };
        (nearest(&self.tl_axis, t_left), nearest(&self.tr_axis, t_right))
    }
}

/// Axis samples at cell centres of `resolution` equal cells over `(lo, hi]`.
pub fn phase_axis(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    (0..resolution)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / resolution as f64)
        .collect()
}

pub struct PhaseDiagramRequest {
    pub t_range: (f64, f64),
    pub resolution: usize,
    pub chain_sites: usize,
    pub grid: KGrid,
    pub d_left: GaugeVector,
    pub d_right: GaugeVector,
}

impl PhaseDiagramRequest {
    pub fn standard(t_range: (f64, f64), resolution: usize, chain_sites: usize, grid: KGrid) -> Self {
        Self {
            t_range,
            resolution,
            chain_sites,
            grid,
            d_left: GaugeVector::Z,
            d_right: GaugeVector::X,
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.t_range;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(Error::validation(
                "t_range",
                format!("need 0 <= lo < hi, got ({lo}, {hi})"),
            ));
        }
        if self.resolution < 8 {
            return Err(Error::validation(
                "resolution",
                format!("must be at least 8, got {}", self.resolution),
            ));
        }
        if self.chain_sites < 4 {
            return Err(Error::validation(
                "chain_N",
                format!("must be at least 4, got {}", self.chain_sites),
            ));
        }
        Ok(())
    }
}

pub fn compute_phase_diagram(
    t_range: (f64, f64),
    resolution: usize,
    chain_sites: usize,
    grid: &KGrid,
) -> Result<PhaseDiagram> {
    compute_phase_diagram_with(
        &PhaseDiagramRequest::standard(t_range, resolution, chain_sites, *grid),
        |_| {},
    )
}

/// Sweeps the plane in parallel; `on_row` is called once per finished row
/// (in completion order). Cell failures become sentinels.
pub fn compute_phase_diagram_with(req: &PhaseDiagramRequest, on_row: impl Fn(usize) + Sync) -> Result<PhaseDiagram> {
    req.validate()?;
    let (lo, hi) = req.t_range;
    let axis = phase_axis(lo, hi, req.resolution);
    let res = req.resolution;

    let rows: Vec<Vec<(i32, f64, f64)>> = (0..res)
        .into_par_iter()
        .map(|i| {
            let row = (0..res)
                .map(|j| {
                    let (tl, tr) = (axis[i], axis[j]);
                    let p = ModelParams::new(1.0, tl, tr, req.d_left, req.d_right);
                    let nu = match p.as_ref().map(|p| braiding_degree(p, &req.grid)) {
                        Ok(Ok(nu)) => nu,
                        Ok(Err(Error::OnPhaseBoundary { .. })) => NU_ON_BOUNDARY,
                        _ => NU_UNRESOLVED,
                    };
                    let g = p
                        .and_then(|p| obc_eigenstates(&p, req.chain_sites))
                        .and_then(|s| gamma(&s, DEFAULT_WINDOW_FRACTION))
                        .unwrap_or(f64::NAN);
                    let r = phase_boundary_residual(tl, tr).unwrap_or(f64::NAN);
                    (nu, g, r)
                })
                .collect();
            on_row(i);
            row
        })
        .collect();

    Ok(PhaseDiagram {
        tl_axis: axis.clone(),
        tr_axis: axis,
        nu_values: rows.iter().map(|r| r.iter().map(|c| c.0).collect()).collect(),
        gamma_values: rows.iter().map(|r| r.iter().map(|c| c.1).collect()).collect(),
        boundary_residuals: rows.iter().map(|r| r.iter().map(|c| c.2).collect()).collect(),
        chain_sites: req.chain_sites,
        kpoints: req.grid.n_points(),
    })
}
