//! Model parameters and the Bloch / real-space Hamiltonians.
//!
//! Each site carries two pseudospin components. The on-site term is
//! `t0 dR.sigma`, the leftward hopping (site n+1 to n) is `tL dL.sigma` and
//! the rightward hopping (site n to n+1) is `tR dR.sigma`. The real-space
//! operator uses the pseudospin as the fast index: `2 * site + spin`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

const UNIT_TOL: f64 = 1e-12;

/// Real unit vector selecting a Pauli combination `d.sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct GaugeVector {
    x: f64,
    y: f64,
    z: f64,
}

impl GaugeVector {
    pub const X: GaugeVector = GaugeVector { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: GaugeVector = GaugeVector { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: GaugeVector = GaugeVector { x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm2 = x * x + y * y + z * z;
        if !norm2.is_finite() || (norm2 - 1.0).abs() > UNIT_TOL {
            return Err(Error::validation(
                "gauge vector",
                format!("({x}, {y}, {z}) is not unit length (|d|^2 = {norm2})"),
            ));
        }
        Ok(Self { x, y, z })
    }

    /// Rescales any non-zero finite vector to unit length.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::validation(
                "gauge vector",
                "cannot normalize a zero or non-finite vector",
            ));
        }
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &GaugeVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &GaugeVector) -> [f64; 3] {
        [
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        ]
    }
}

impl TryFrom<[f64; 3]> for GaugeVector {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        GaugeVector::new(v[0], v[1], v[2])
    }
}

impl From<GaugeVector> for [f64; 3] {
    fn from(d: GaugeVector) -> Self {
        d.components()
    }
}

impl fmt::Display for GaugeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Pbc,
    Obc,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Pbc => f.write_str("pbc"),
            BoundaryCondition::Obc => f.write_str("obc"),
        }
    }
}

/// The five-tuple `(t0, tL, tR, dL, dR)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub t0: f64,
    #[serde(rename = "tL")]
    pub t_left: f64,
    #[serde(rename = "tR")]
    pub t_right: f64,
    #[serde(rename = "dL")]
    pub d_left: GaugeVector,
    #[serde(rename = "dR")]
    pub d_right: GaugeVector,
}

impl ModelParams {
    pub fn new(t0: f64, t_left: f64, t_right: f64, d_left: GaugeVector, d_right: GaugeVector) -> Result<Self> {
        let p = Self {
            t0,
            t_left,
            t_right,
            d_left,
            d_right,
        };
        p.validate()?;
        Ok(p)
    }

    /// The gauge choice used throughout the experiments: `dL = z`, `dR = x`.
    pub fn standard(t0: f64, t_left: f64, t_right: f64) -> Result<Self> {
        Self::new(t0, t_left, t_right, GaugeVector::Z, GaugeVector::X)
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [("t0", self.t0), ("tL", self.t_left), ("tR", self.t_right)] {
            if !v.is_finite() {
                return Err(Error::validation(key, format!("amplitude must be finite, got {v}")));
            }
        }
        // Re-check unit length for values built through struct literals.
        GaugeVector::try_from(self.d_left.components())
            .map_err(|_| Error::validation("dL", format!("{} is not unit length", self.d_left)))?;
        GaugeVector::try_from(self.d_right.components())
            .map_err(|_| Error::validation("dR", format!("{} is not unit length", self.d_right)))?;
        Ok(())
    }

    /// Divides all amplitudes by `t0`.
    pub fn normalized(&self) -> Result<Self> {
        if self.t0 == 0.0 {
            return Err(Error::validation("t0", "cannot normalize by a zero on-site amplitude"));
        }
        Ok(Self {
            t0: 1.0,
            t_left: self.t_left / self.t0,
            t_right: self.t_right / self.t0,
            ..*self
        })
    }

    pub fn is_nonabelian(&self, tol: f64) -> bool {
        is_nonabelian(&self.d_left, &self.d_right, tol)
    }
}

/// `d.sigma = dx sigma_x + dy sigma_y + dz sigma_z`.
pub fn pauli_combination(d: &GaugeVector) -> ComplexMatrix {
    let [x, y, z] = d.components();
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = Complex64::new(z, 0.0);
    m[(0, 1)] = Complex64::new(x, -y);
    m[(1, 0)] = Complex64::new(x, y);
    m[(1, 1)] = Complex64::new(-z, 0.0);
    m
}

/// True when `[dL.sigma, dR.sigma] = 2i (dL x dR).sigma` is non-zero.
pub fn is_nonabelian(d_left: &GaugeVector, d_right: &GaugeVector, tol: f64) -> bool {
    let c = d_left.cross(d_right);
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt() > tol
}

fn weighted_pauli(pairs: &[(Complex64, &GaugeVector)]) -> ComplexMatrix {
    let (mut x, mut y, mut z) = (Complex64::default(), Complex64::default(), Complex64::default());
    for (w, d) in pairs {
        let [dx, dy, dz] = d.components();
        x += w * dx;
        y += w * dy;
        z += w * dz;
    }
    let i = Complex64::i();
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = z;
    m[(0, 1)] = x - i * y;
    m[(1, 0)] = x + i * y;
    m[(1, 1)] = -z;
    m
}

/// `H(k) = t0 dR.sigma + tL e^{ik} dL.sigma + tR e^{-ik} dR.sigma`.
pub fn bloch_hamiltonian(p: &ModelParams, k: f64) -> ComplexMatrix {
    let forward = Complex64::from_polar(1.0, k);
    let backward = forward.conj();
    weighted_pauli(&[
        (Complex64::new(p.t0, 0.0) + backward * p.t_right, &p.d_right),
        (forward * p.t_left, &p.d_left),
    ])
}

/// Closed-form band energies `(E+, E-)` with `E- = -E+`, principal square root.
pub fn analytic_eigenvalues(p: &ModelParams, k: f64) -> (Complex64, Complex64) {
    let forward = Complex64::from_polar(1.0, k);
    let a = Complex64::new(p.t0, 0.0) + forward.conj() * p.t_right;
    let b = forward * p.t_left;
    let disc = a * a + b * b + a * b * (2.0 * p.d_left.dot(&p.d_right));
    let e = disc.sqrt();
    (e, -e)
}

/// The `2N x 2N` chain operator.
pub fn real_space_hamiltonian(p: &ModelParams, sites: usize, bc: BoundaryCondition) -> Result<ComplexMatrix> {
    if sites < 2 {
        return Err(Error::validation(
            "N",
            format!("chain needs at least 2 sites, got {sites}"),
        ));
    }
    let onsite = pauli_combination(&p.d_right).scale(p.t0.into());
    let left = pauli_combination(&p.d_left).scale(p.t_left.into());
    let right = pauli_combination(&p.d_right).scale(p.t_right.into());
    Ok(assemble_chain(sites, bc, &onsite, &left, &right))
}

/// Block-tridiagonal assembly shared by the lattice and circuit chains.
/// `left` sits at block (n, n+1) and `right` at block (n+1, n).
pub(crate) fn assemble_chain(
    sites: usize,
    bc: BoundaryCondition,
    onsite: &ComplexMatrix,
    left: &ComplexMatrix,
    right: &ComplexMatrix,
) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(2 * sites);
    for n in 0..sites {
        h.add_block(n, n, onsite);
    }
    let links = match bc {
        BoundaryCondition::Obc => sites - 1,
        BoundaryCondition::Pbc => sites,
    };
    for n in 0..links {
        let m = (n + 1) % sites;
        h.add_block(n, m, left);
        h.add_block(m, n, right);
    }
    h
}
