//! Electric-circuit realization of the chain.
//!
//! Each site is two circuit nodes. At drive frequency `omega` the Bloch
//! admittance is
//!
//! ```text
//! J(k) = i omega [ m0 s0 + m1 (s0 - sz) e^{ik} + C0 sx + C1 e^{ik} sz + C2 e^{-ik} sx ]
//! m0   = -C2 - 2 C0 + 1/(omega^2 L0) - 1/(i omega R0) - C1 + 1/(omega^2 L1)
//! m1   = (C1 - 1/(omega^2 L1)) / 2
//! ```
//!
//! At `omega0 = 1/sqrt(L1 C1)` the `m1` term vanishes and `J(k)` is an affine
//! image of the lattice Hamiltonian with `t0 = C0`, `tL = C1`, `tR = C2`,
//! `dL = z`, `dR = x`.
//!
//! Component values are entered in nF, uH and ohm and converted to SI
//! internally; admittances come back in siemens.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::model::{assemble_chain, pauli_combination, BoundaryCondition, GaugeVector, ModelParams};

const NANO: f64 = 1e-9;
const MICRO: f64 = 1e-6;
/// Networks with a 1-norm condition number above this are not measurable.
pub const MAX_CONDITION: f64 = 1e12;

fn default_true() -> bool {
    true
}

/// Component values in nF, uH and ohm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    #[serde(rename = "C0_nF")]
    pub c0_nf: f64,
    #[serde(rename = "C1_nF")]
    pub c1_nf: f64,
    #[serde(rename = "C2_nF")]
    pub c2_nf: f64,
    #[serde(rename = "L0_uH")]
    pub l0_uh: f64,
    #[serde(rename = "L1_uH")]
    pub l1_uh: f64,
    #[serde(rename = "R0_ohm")]
    pub r0_ohm: f64,
    /// Drive frequency; resonance when absent.
    #[serde(rename = "omega_rad_s", default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Keep the `-1/(i omega R0)` shift in `m0`.
    #[serde(rename = "include_R0", default = "default_true")]
    pub include_resistor: bool,
}

impl CircuitParams {
    /// `C0 = 10 nF`, `L0 = 0.95 uH`, `L1 = 4.4 uH`, `R0 = 3.9 ohm` with the
    /// given coupling capacitors.
    pub fn experiment(c1_nf: f64, c2_nf: f64) -> Self {
        Self {
            c0_nf: 10.0,
            c1_nf,
            c2_nf,
            l0_uh: 0.95,
            l1_uh: 4.4,
            r0_ohm: 3.9,
            omega: None,
            include_resistor: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("C0_nF", self.c0_nf),
            ("C1_nF", self.c1_nf),
            ("C2_nF", self.c2_nf),
            ("L0_uH", self.l0_uh),
            ("L1_uH", self.l1_uh),
            ("R0_ohm", self.r0_ohm),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(
                    key,
                    format!("component value must be positive, got {v}"),
                ));
            }
        }
        if let Some(w) = self.omega {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::validation("omega_rad_s", format!("must be positive, got {w}")));
            }
        }
        Ok(())
    }

    /// The drive frequency: `omega` if set, else resonance.
    pub fn drive_frequency(&self) -> f64 {
        self.omega.unwrap_or_else(|| resonance_frequency(self))
    }

    fn si(&self) -> Components {
        Components {
            c0: self.c0_nf * NANO,
            c1: self.c1_nf * NANO,
            c2: self.c2_nf * NANO,
            l0: self.l0_uh * MICRO,
            l1: self.l1_uh * MICRO,
            r0: self.include_resistor.then_some(self.r0_ohm),
        }
    }
}

/// One instance of every component, SI units.
#[derive(Debug, Clone, Copy)]
struct Components {
    c0: f64,
    c1: f64,
    c2: f64,
    l0: f64,
    l1: f64,
    r0: Option<f64>,
}

impl Components {
    fn m0(&self, omega: f64) -> Complex64 {
        let w2 = omega * omega;
        let re = -self.c2 - 2.0 * self.c0 + 1.0 / (w2 * self.l0) - self.c1 + 1.0 / (w2 * self.l1);
        // -1/(i omega R0) = i/(omega R0)
        let im = self.r0.map_or(0.0, |r| 1.0 / (omega * r));
        Complex64::new(re, im)
    }

    fn m1(&self, omega: f64) -> f64 {
        (self.c1 - 1.0 / (omega * omega * self.l1)) / 2.0
    }

    fn perturbed(&self, rng: &mut ChaCha8Rng, normal: &Normal<f64>) -> Self {
        let mut draw = |v: f64| v * (1.0 + normal.sample(rng)).max(0.05);
        Self {
            c0: draw(self.c0),
            c1: draw(self.c1),
            c2: draw(self.c2),
            l0: draw(self.l0),
            l1: draw(self.l1),
            r0: self.r0.map(&mut draw),
        }
    }
}

/// `omega0 = 1/sqrt(L1 C1)` in rad/s.
pub fn resonance_frequency(c: &CircuitParams) -> f64 {
    1.0 / (c.l1_uh * MICRO * c.c1_nf * NANO).sqrt()
}

/// `(m0, m1)` in farads.
pub fn m_coefficients(c: &CircuitParams, omega: f64) -> (Complex64, f64) {
    let si = c.si();
    (si.m0(omega), si.m1(omega))
}

fn sigma0() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

fn sx() -> ComplexMatrix {
    pauli_combination(&GaugeVector::X)
}

fn sz() -> ComplexMatrix {
    pauli_combination(&GaugeVector::Z)
}

fn combine(terms: &[(Complex64, ComplexMatrix)]) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |r, c| terms.iter().map(|(w, m)| w * m[(r, c)]).sum())
}

/// Bloch admittance matrix in siemens.
pub fn admittance_bloch(c: &CircuitParams, omega: f64, k: f64) -> ComplexMatrix {
    let si = c.si();
    let forward = Complex64::from_polar(1.0, k);
    let iw = Complex64::new(0.0, omega);
    let m1 = si.m1(omega);
    let body = combine(&[
        (si.m0(omega), sigma0()),
        (forward * m1, sigma0().sub(&sz())),
        (si.c0.into(), sx()),
        (forward * si.c1, sz()),
        (forward.conj() * si.c2, sx()),
    ]);
    body.scale(iw)
}

/// Lattice model realized at resonance, with `J(k) = scale (H(k) + shift)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitModel {
    /// Amplitudes in nF.
    pub params: ModelParams,
    /// `m0` in nF.
    pub shift: Complex64,
    /// `i omega0` in siemens per nF.
    pub scale: Complex64,
    pub omega0: f64,
}

pub fn circuit_to_model(c: &CircuitParams) -> Result<CircuitModel> {
    c.validate()?;
    let omega0 = resonance_frequency(c);
    let params = ModelParams::new(c.c0_nf, c.c1_nf, c.c2_nf, GaugeVector::Z, GaugeVector::X)?;
    let (m0, _) = m_coefficients(c, omega0);
    Ok(CircuitModel {
        params,
        shift: m0 / NANO,
        scale: Complex64::new(0.0, omega0 * NANO),
        omega0,
    })
}

/// Converts an admittance (siemens) to capacitance units (nF): `J / (i omega)`.
pub fn admittance_to_nf(j: &ComplexMatrix, omega: f64) -> ComplexMatrix {
    j.scale(Complex64::new(0.0, -1.0 / (omega * NANO)))
}

fn chain_blocks(si: &Components, omega: f64) -> [ComplexMatrix; 3] {
    let iw = Complex64::new(0.0, omega);
    let onsite = combine(&[(si.m0(omega), sigma0()), (si.c0.into(), sx())]).scale(iw);
    let left = combine(&[(si.m1(omega).into(), sigma0().sub(&sz())), (si.c1.into(), sz())]).scale(iw);
    let right = sx().scale(iw * si.c2);
    [onsite, left, right]
}

/// Chain admittance (siemens) with uniform grounding at every site.
pub fn circuit_chain(c: &CircuitParams, sites: usize, bc: BoundaryCondition, omega: f64) -> Result<ComplexMatrix> {
    c.validate()?;
    if sites < 2 {
        return Err(Error::validation(
            "N",
            format!("chain needs at least 2 sites, got {sites}"),
        ));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::validation(
            "omega_rad_s",
            format!("must be positive, got {omega}"),
        ));
    }
    let [onsite, left, right] = chain_blocks(&c.si(), omega);
    Ok(assemble_chain(sites, bc, &onsite, &left, &right))
}

/// Chain with every component instance drawn independently: each site owns
/// the components setting its on-site block, each link owns its `C1`, `L1`
/// and `C2`.
fn noisy_chain(
    c: &CircuitParams,
    sites: usize,
    bc: BoundaryCondition,
    omega: f64,
    noise: &NoiseModel,
) -> Result<ComplexMatrix> {
    let normal = Normal::new(0.0, noise.component_rel_sigma).map_err(|e| Error::validation("sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let base = c.si();
    let mut h = ComplexMatrix::zeros(2 * sites);
    for n in 0..sites {
        let [onsite, _, _] = chain_blocks(&base.perturbed(&mut rng, &normal), omega);
        h.add_block(n, n, &onsite);
    }
    let links = match bc {
        BoundaryCondition::Obc => sites - 1,
        BoundaryCondition::Pbc => sites,
    };
    for n in 0..links {
        let [_, left, right] = chain_blocks(&base.perturbed(&mut rng, &normal), omega);
        let m = (n + 1) % sites;
        h.add_block(n, m, &left);
        h.add_block(m, n, &right);
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Excite the two nodes of one unit cell and rebuild the circulant network.
    PbcUnitCell,
    /// Excite every node of an open chain.
    ObcAllNodes,
}

impl Protocol {
    pub fn boundary(&self) -> BoundaryCondition {
        match self {
            Protocol::PbcUnitCell => BoundaryCondition::Pbc,
            Protocol::ObcAllNodes => BoundaryCondition::Obc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub component_rel_sigma: f64,
    pub seed: u64,
}

/// Inverts `j` after checking its condition number.
fn response(j: &ComplexMatrix) -> Result<ComplexMatrix> {
    let g = j.lu()?.inverse();
    let condition = j.norm_one() * g.norm_one();
    if !(condition.is_finite() && condition < MAX_CONDITION) {
        return Err(Error::SingularNetwork { condition });
    }
    Ok(g)
}

/// Unit current injections give the voltage response `G = J^-1`; the
/// admittance is rebuilt as `G^-1`. The unit-cell protocol only uses the two
/// columns for cell 0 and assumes translation invariance.
pub fn reconstruct_admittance(j: &ComplexMatrix, protocol: Protocol) -> Result<ComplexMatrix> {
    let dim = j.dim();
    if !dim.is_multiple_of(2) {
        return Err(Error::validation("matrix", "admittance must have two nodes per site"));
    }
    let g = response(j)?;
    let g = match protocol {
        Protocol::ObcAllNodes => g,
        Protocol::PbcUnitCell => {
            let sites = dim / 2;
            ComplexMatrix::from_fn(dim, |r, c| {
                let (m, a) = (r / 2, r % 2);
                let (n, b) = (c / 2, c % 2);
                let d = (m + sites - n) % sites;
                g[(2 * d + a, b)]
            })
        }
    };
    response(&g)
}

/// What is measured: a circuit, chain length and drive frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetup {
    pub circuit: CircuitParams,
    pub sites: usize,
    pub omega: f64,
}

impl MeasurementSetup {
    pub fn at_drive(circuit: CircuitParams, sites: usize) -> Self {
        Self {
            circuit,
            sites,
            omega: circuit.drive_frequency(),
        }
    }
}

/// Builds the network (perturbing components when `noise` is given) and runs
/// the excite-and-measure protocol on it.
pub fn simulated_measurement(
    setup: &MeasurementSetup,
    protocol: Protocol,
    noise: Option<NoiseModel>,
) -> Result<ComplexMatrix> {
    let bc = protocol.boundary();
    let j = match noise {
        None => circuit_chain(&setup.circuit, setup.sites, bc, setup.omega)?,
        Some(noise) => {
            setup.circuit.validate()?;
            if setup.sites < 2 {
                return Err(Error::validation("N", "chain needs at least 2 sites"));
            }
            if !(noise.component_rel_sigma >= 0.0 && noise.component_rel_sigma.is_finite()) {
                return Err(Error::validation("sigma", "must be finite and non-negative"));
            }
            noisy_chain(&setup.circuit, setup.sites, bc, setup.omega, &noise)?
        }
    };
    reconstruct_admittance(&j, protocol)
}

/// Bloch family read off the first block row of a translation-invariant
/// chain: `J(k) = sum_d B_d e^{ikd}` with signed offsets `d`.
#[derive(Debug, Clone)]
pub struct CirculantBloch {
    blocks: Vec<(i64, ComplexMatrix)>,
}

impl CirculantBloch {
    pub fn from_chain(j: &ComplexMatrix) -> Result<Self> {
        let sites = j.dim() / 2;
        if !j.dim().is_multiple_of(2) || sites < 3 {
            return Err(Error::validation("N", "Bloch extraction needs at least 3 sites"));
        }
        let blocks = (0..sites)
            .map(|d| {
                let offset = if 2 * d <= sites {
                    d as i64
                } else {
                    d as i64 - sites as i64
                };
                (offset, j.block(0, d, 2))
            })
            .collect();
        Ok(Self { blocks })
    }

    pub fn at(&self, k: f64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(2);
        for (d, b) in &self.blocks {
            out.add_block(0, 0, &b.scale(Complex64::from_polar(1.0, k * *d as f64)));
        }
        out
    }
}

/// Runs `f` once per seed in parallel; output order follows `seeds`.
pub fn monte_carlo<T: Send>(seeds: &[u64], f: impl Fn(u64) -> T + Sync) -> Vec<(u64, T)> {
    seeds.par_iter().map(|&s| (s, f(s))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonance_arithmetic() {
        let c = CircuitParams::experiment(20.0, 30.0);
        let w = resonance_frequency(&c);
        assert!((w - 1.0 / (4.4e-6f64 * 20e-9).sqrt()).abs() < 1e-6);
        assert!((w - 3.370999312316e6).abs() / w < 1e-9);
        let mut doubled = c;
        doubled.c1_nf *= 2.0;
        doubled.l1_uh *= 2.0;
        assert!((resonance_frequency(&doubled) - w / 2.0).abs() / w < 1e-15);
    }

    #[test]
    fn m1_vanishes_at_resonance() {
        for (c1, c2) in [(20.0, 30.0), (12.0, 9.0), (39.0, 30.0), (10.0, 30.0)] {
            let c = CircuitParams::experiment(c1, c2);
            let (m0, m1) = m_coefficients(&c, resonance_frequency(&c));
            assert!(m1.abs() / (c1 * NANO) < 1e-15);
            assert!(m0.im > 0.0);
        }
    }

    #[test]
    fn resistor_flag_zeroes_imaginary_shift() {
        let mut c = CircuitParams::experiment(12.0, 9.0);
        c.include_resistor = false;
        let (m0, _) = m_coefficients(&c, resonance_frequency(&c));
        assert_eq!(m0.im, 0.0);
    }

    #[test]
    fn validation_rejects_nonpositive_components() {
        let mut c = CircuitParams::experiment(12.0, 9.0);
        c.l0_uh = 0.0;
        assert!(c.validate().is_err());
        let mut c = CircuitParams::experiment(12.0, 9.0);
        c.omega = Some(-1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn bloch_at_zero_momentum_by_hand() {
        let c = CircuitParams::experiment(12.0, 9.0);
        let w = 2.0e6;
        let j = admittance_bloch(&c, w, 0.0);
        let (m0, m1) = m_coefficients(&c, w);
        let iw = Complex64::new(0.0, w);
        // [[m0 + C1, C0 + C2], [C0 + C2, m0 + 2 m1 - C1]]
        let expected = [
            iw * (m0 + 12e-9),
            iw * (10e-9 + 9e-9),
            iw * (10e-9 + 9e-9),
            iw * (m0 + 2.0 * m1 - 12e-9),
        ];
        for (a, b) in j.as_slice().iter().zip(expected) {
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }
    }

    #[test]
    fn chain_needs_two_sites() {
        let c = CircuitParams::experiment(12.0, 9.0);
        assert!(circuit_chain(&c, 1, BoundaryCondition::Obc, 1e6).is_err());
    }

    #[test]
    fn nonreciprocal_blocks() {
        let c = CircuitParams::experiment(12.0, 9.0);
        let j = circuit_chain(&c, 4, BoundaryCondition::Obc, resonance_frequency(&c)).unwrap();
        let left = j.block(0, 1, 2);
        let right = j.block(1, 0, 2);
        assert!(left.sub(&right.conj_transpose()).max_abs() > 0.0);
    }

    #[test]
    fn noiseless_round_trip_obc() {
        let c = CircuitParams::experiment(12.0, 9.0);
        let setup = MeasurementSetup::at_drive(c, 10);
        let j = circuit_chain(&c, 10, BoundaryCondition::Obc, setup.omega).unwrap();
        let rec = simulated_measurement(&setup, Protocol::ObcAllNodes, None).unwrap();
        assert!(rec.sub(&j).frobenius_norm() / j.frobenius_norm() < 1e-9);
    }

    #[test]
    fn noise_is_seed_deterministic() {
        let c = CircuitParams::experiment(20.0, 30.0);
        let setup = MeasurementSetup::at_drive(c, 6);
        let noise = Some(NoiseModel {
            component_rel_sigma: 0.01,
            seed: 7,
        });
        let a = simulated_measurement(&setup, Protocol::PbcUnitCell, noise).unwrap();
        let b = simulated_measurement(&setup, Protocol::PbcUnitCell, noise).unwrap();
        assert_eq!(a, b);
        let other = simulated_measurement(
            &setup,
            Protocol::PbcUnitCell,
            Some(NoiseModel {
                component_rel_sigma: 0.01,
                seed: 8,
            }),
        )
        .unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn singular_network_reported() {
        let mut j = ComplexMatrix::zeros(4);
        j[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            reconstruct_admittance(&j, Protocol::ObcAllNodes),
            Err(Error::SingularNetwork { .. })
        ));
        let mut near = ComplexMatrix::identity(4);
        near[(3, 3)] = Complex64::new(1e-14, 0.0);
        assert!(matches!(
            reconstruct_admittance(&near, Protocol::ObcAllNodes),
            Err(Error::SingularNetwork { .. })
        ));
    }

    #[test]
    fn circulant_bloch_matches_admittance() {
        let c = CircuitParams::experiment(20.0, 30.0);
        let w = resonance_frequency(&c);
        let j = circuit_chain(&c, 7, BoundaryCondition::Pbc, w).unwrap();
        let fam = CirculantBloch::from_chain(&j).unwrap();
        for k in [0.0, 0.4, 2.5] {
            let d = fam.at(k).sub(&admittance_bloch(&c, w, k));
            assert!(d.max_abs() < 1e-12 * admittance_bloch(&c, w, k).max_abs());
        }
    }
}
