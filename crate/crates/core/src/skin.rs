//! Open-chain eigenstate densities and skin-effect diagnostics.

use serde::{Deserialize, Serialize};

use crate::eigen::eig_dense;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::model::{real_space_hamiltonian, BoundaryCondition, GaugeVector, ModelParams};

use num_complex::Complex64;

pub const DEFAULT_WINDOW_FRACTION: f64 = 0.2;
pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Minimum share of states on each side for a bipolar verdict.
pub const BIPOLAR_MIN_SHARE: f64 = 0.1;

/// Eigenvalues and per-site densities of every eigenstate of a chain.
/// `densities[state][site]` sums to one over sites for each state.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenstateSet {
    pub sites: usize,
    pub eigenvalues: Vec<Complex64>,
    pub densities: Vec<Vec<f64>>,
}

impl EigenstateSet {
    /// Decomposes a `2N x 2N` chain operator with two components per site.
    pub fn from_chain(m: &ComplexMatrix) -> Result<Self> {
        let dim = m.dim();
        if !dim.is_multiple_of(2) {
            return Err(Error::validation(
                "matrix",
                format!("chain operator must have even dimension, got {dim}"),
            ));
        }
        let sites = dim / 2;
        let spectrum = eig_dense(m, true)?;
        let vectors = spectrum.eigenvectors.expect("vectors requested");
        let densities = vectors.iter().map(|v| site_density(v, sites)).collect();
        Ok(Self {
            sites,
            eigenvalues: spectrum.eigenvalues,
            densities,
        })
    }

    pub fn len(&self) -> usize {
        self.densities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    /// Relabels sites `x -> N - 1 - x`.
    pub fn mirrored(&self) -> Self {
        Self {
            sites: self.sites,
            eigenvalues: self.eigenvalues.clone(),
            densities: self
                .densities
                .iter()
                .map(|d| d.iter().rev().copied().collect())
                .collect(),
        }
    }
}

/// `|psi_up(x)|^2 + |psi_down(x)|^2`, normalized to unit total.
pub fn site_density(v: &[Complex64], sites: usize) -> Vec<f64> {
    let mut d: Vec<f64> = (0..sites)
        .map(|x| v[2 * x].norm_sqr() + v[2 * x + 1].norm_sqr())
        .collect();
    let total: f64 = d.iter().sum();
    if total > 0.0 {
        d.iter_mut().for_each(|x| *x /= total);
    }
    d
}

pub fn obc_eigenstates(p: &ModelParams, sites: usize) -> Result<EigenstateSet> {
    if sites < 4 {
        return Err(Error::validation(
            "N",
            format!("skin analysis needs at least 4 sites, got {sites}"),
        ));
    }
    let h = real_space_hamiltonian(p, sites, BoundaryCondition::Obc)?;
    EigenstateSet::from_chain(&h)
}

fn window_width(sites: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 0.5) {
        return Err(Error::validation(
            "window_fraction",
            format!("must lie in (0, 0.5), got {fraction}"),
        ));
    }
    // the small offset keeps 0.2 * 100 from rounding up to 21
    Ok(((fraction * sites as f64) - 1e-9).ceil().max(1.0) as usize)
}

fn boundary_weights(density: &[f64], width: usize) -> (f64, f64) {
    let n = density.len();
    let left = density[..width].iter().sum();
    let right = density[n - width..].iter().sum();
    (left, right)
}

/// `(D_L - D_R) / (D_L + D_R)` with densities summed over all states.
pub fn gamma(states: &EigenstateSet, window_fraction: f64) -> Result<f64> {
    let width = window_width(states.sites, window_fraction)?;
    let (dl, dr) = states
        .densities
        .iter()
        .map(|d| boundary_weights(d, width))
        .fold((0.0, 0.0), |(a, b), (l, r)| (a + l, b + r));
    let total = dl + dr;
    if total <= 0.0 {
        return Err(Error::validation("densities", "boundary windows hold no weight"));
    }
    Ok(((dl - dr) / total).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Localization {
    Left,
    Right,
    Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub classes: Vec<Localization>,
    /// Per-state `(w_L, w_R)` boundary weights.
    pub weights: Vec<(f64, f64)>,
    pub gamma: f64,
    pub bipolar: bool,
    pub left_count: usize,
    pub right_count: usize,
    pub extended_count: usize,
}

impl LocalizationReport {
    /// Every localized state sits on the right edge and there is at least one.
    pub fn is_monopolar_right(&self) -> bool {
        self.right_count > 0 && self.left_count == 0
    }

    pub fn is_monopolar_left(&self) -> bool {
        self.left_count > 0 && self.right_count == 0
    }
}

pub fn classify_localization(
    states: &EigenstateSet,
    boundary_fraction: f64,
    threshold: f64,
) -> Result<LocalizationReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::validation(
            "threshold",
            format!("must lie in (0, 1), got {threshold}"),
        ));
    }
    let width = window_width(states.sites, boundary_fraction)?;
    let weights: Vec<(f64, f64)> = states.densities.iter().map(|d| boundary_weights(d, width)).collect();
    let classes: Vec<Localization> = weights
        .iter()
        .map(|&(l, r)| {
            if l > threshold {
                Localization::Left
            } else if r > threshold {
                Localization::Right
            } else {
                Localization::Extended
            }
        })
        .collect();
    let count = |c: Localization| classes.iter().filter(|&&x| x == c).count();
    let (left_count, right_count, extended_count) = (
        count(Localization::Left),
        count(Localization::Right),
        count(Localization::Extended),
    );
    let min_share = BIPOLAR_MIN_SHARE * classes.len() as f64;
    let bipolar =
        left_count as f64 >= min_share && right_count as f64 >= min_share && left_count > 0 && right_count > 0;
    Ok(LocalizationReport {
        gamma: gamma(states, boundary_fraction)?,
        classes,
        weights,
        bipolar,
        left_count,
        right_count,
        extended_count,
    })
}

/// Bipolar verdict for each `(tL, tR)` sample at `t0 = 1` and the given gauge.
pub fn bipolar_scan(
    samples: &[(f64, f64)],
    sites: usize,
    d_left: GaugeVector,
    d_right: GaugeVector,
) -> Result<Vec<bool>> {
    use rayon::prelude::*;
    samples
        .par_iter()
        .map(|&(tl, tr)| {
            let p = ModelParams::new(1.0, tl, tr, d_left, d_right)?;
            let states = obc_eigenstates(&p, sites)?;
            Ok(classify_localization(&states, DEFAULT_WINDOW_FRACTION, DEFAULT_THRESHOLD)?.bipolar)
        })
        .collect()
}

/// Runs the bipolar detector with the Abelian gauge `dL = dR = x`; true when
/// no sample is bipolar.
pub fn abelian_control(samples: &[(f64, f64)], sites: usize) -> Result<bool> {
    let verdicts = bipolar_scan(samples, sites, GaugeVector::X, GaugeVector::X)?;
    Ok(verdicts.iter().all(|b| !b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_from(densities: Vec<Vec<f64>>) -> EigenstateSet {
        EigenstateSet {
            sites: densities[0].len(),
            eigenvalues: vec![Complex64::default(); densities.len()],
            densities,
        }
    }

    #[test]
    fn uniform_state_is_extended() {
        let s = set_from(vec![vec![0.01; 100]]);
        let r = classify_localization(&s, 0.2, 0.5).unwrap();
        assert_eq!(r.classes, vec![Localization::Extended]);
        assert!((r.weights[0].0 - 0.2).abs() < 1e-12);
        assert!((r.weights[0].1 - 0.2).abs() < 1e-12);
        assert_eq!(r.gamma, 0.0);
        assert!(!r.bipolar);
    }

    #[test]
    fn edge_state_is_left() {
        let mut d = vec![0.0; 100];
        d[0] = 1.0;
        let r = classify_localization(&set_from(vec![d]), 0.2, 0.5).unwrap();
        assert_eq!(r.classes, vec![Localization::Left]);
        assert_eq!(r.gamma, 1.0);
    }

    #[test]
    fn windows_match_twenty_sites_at_hundred() {
        assert_eq!(window_width(100, 0.2).unwrap(), 20);
        assert_eq!(window_width(47, 0.2).unwrap(), 10);
        assert!(window_width(100, 0.5).is_err());
        assert!(window_width(100, 0.0).is_err());
    }

    #[test]
    fn bipolar_needs_both_sides() {
        let mut left = vec![0.0; 10];
        left[0] = 1.0;
        let mut right = vec![0.0; 10];
        right[9] = 1.0;
        let s = set_from(vec![left.clone(), left.clone(), right.clone(), right]);
        let r = classify_localization(&s, 0.2, 0.5).unwrap();
        assert!(r.bipolar);
        assert_eq!(r.gamma, 0.0);
        let s = set_from(vec![left.clone(), left]);
        assert!(!classify_localization(&s, 0.2, 0.5).unwrap().bipolar);
    }

    #[test]
    fn stray_edge_state_is_not_bipolar() {
        let mut left = vec![0.0; 10];
        left[0] = 1.0;
        let mut right = vec![0.0; 10];
        right[9] = 1.0;
        let mut states = vec![right; 19];
        states.push(left);
        let r = classify_localization(&set_from(states), 0.2, 0.5).unwrap();
        // exactly 1 of 20 on the left, below the 10% share
        assert!(!r.bipolar);
    }

    #[test]
    fn rejects_bad_thresholds() {
        let s = set_from(vec![vec![0.1; 10]]);
        assert!(classify_localization(&s, 0.2, 1.0).is_err());
        assert!(classify_localization(&s, 0.6, 0.5).is_err());
        assert!(gamma(&s, -0.1).is_err());
    }

    #[test]
    fn obc_needs_four_sites() {
        let p = ModelParams::standard(1.0, 1.0, 3.0).unwrap();
        assert!(obc_eigenstates(&p, 3).is_err());
    }
}
