//! Weak-drive amplitudes from the no-jump Hamiltonian.
//!
//! With `C00 = 1` fixed, the stationary amplitudes are built manifold by
//! manifold: each excitation block of `H_eff` is solved with the drive
//! coupling from the manifold below as source. Terms that lower the
//! excitation number are dropped, so all correlations below are exact to
//! leading order in the drive and independent of its strength.
//!
//! The interference picture follows from the two-photon output amplitude
//!
//! ```text
//! <0,0| a_out^2 |psi> ~ sqrt2 k1 C20 + 2 e^{i phi} sqrt(k1 k2) C11 + sqrt2 e^{2 i phi} k2 C02
//! ```
//!
//! which at `phi = pi` and equal rates is `sqrt2 k (C20 - sqrt2 C11 + C02)`.

use std::f64::consts::{PI, SQRT_2};

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hilbert::BasisLabel;
use crate::model::{effective_hamiltonian, JcParams, KerrParams, ModelKind, ModelParams};
use crate::observables::{OutputMixSpec, OCCUPATION_FLOOR};

/// Default perturbative guard: `eps < kappa / 5`.
pub const MAX_DRIVE_RATIO: f64 = 0.2;
/// Below this strength (in units of kappa) the scaling laws are extrapolations.
pub const SCALING_VALIDITY: f64 = 10.0;

const BLOCK_RESIDUAL_TOL: f64 = 1e-12;
const BLOCK_SINGULAR_TOL: f64 = 1e-13;

/// Amplitudes `C_{n1 n2}` (Kerr) or `C_{s n1 n2}` (JC), relative to `C00 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSet {
    pub kind: ModelKind,
    entries: Vec<(BasisLabel, c64)>,
}

impl AmplitudeSet {
    pub fn new(kind: ModelKind, entries: Vec<(BasisLabel, c64)>) -> Self {
        Self { kind, entries }
    }

    pub fn entries(&self) -> &[(BasisLabel, c64)] {
        &self.entries
    }

    pub fn get(&self, label: BasisLabel) -> Option<c64> {
        self.entries.iter().find(|(l, _)| *l == label).map(|(_, c)| *c)
    }

    /// Photon-only amplitude with the TLS (if any) in its ground state.
    pub fn photon(&self, n1: usize, n2: usize) -> Option<c64> {
        let label = match self.kind {
            ModelKind::Kerr => BasisLabel::fock(n1, n2),
            ModelKind::Jc => BasisLabel::ground(n1, n2),
        };
        self.get(label)
    }

    fn require(&self, n1: usize, n2: usize) -> Result<c64> {
        self.photon(n1, n2)
            .ok_or_else(|| invalid(format!("amplitude set lacks C{n1}{n2}")))
    }

    /// Leading-order statistics reconstructed from the amplitudes.
    pub fn statistics(&self, spec: &OutputMixSpec) -> Result<WeakDriveStats> {
        let c10 = self.require(1, 0)?;
        let c01 = self.require(0, 1)?;
        let c20 = self.require(2, 0)?;
        let c02 = self.require(0, 2)?;
        let n1 = c10.norm_sqr();
        let n2 = c01.norm_sqr();
        let ratio = |num: f64, n: f64| if n > OCCUPATION_FLOOR { Some(num / (n * n)) } else { None };
        let g2_out = match g2out_from_amplitudes(self, spec) {
            Ok(v) => Some(v),
            Err(Error::UndefinedCorrelation(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(WeakDriveStats {
            n1,
            n2,
            n_out: output_flux(c10, c01, spec),
            g2_1: ratio(2.0 * c20.norm_sqr(), n1),
            g2_2: ratio(2.0 * c02.norm_sqr(), n2),
            g2_out,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakDriveStats {
    pub n1: f64,
    pub n2: f64,
    pub n_out: f64,
    pub g2_1: Option<f64>,
    pub g2_2: Option<f64>,
    pub g2_out: Option<f64>,
}

/// Kerr (`[n1, n2]`) or JC basis labels belonging to one excitation manifold.
fn manifold(kind: ModelKind, excitations: usize) -> Vec<BasisLabel> {
    let mut out = Vec::new();
    for n1 in 0..=excitations {
        for n2 in 0..=excitations - n1 {
            match kind {
                ModelKind::Kerr => {
                    if n1 + n2 == excitations {
                        out.push(BasisLabel::fock(n1, n2));
                    }
                }
                ModelKind::Jc => {
                    if n1 + n2 == excitations {
                        out.push(BasisLabel::ground(n1, n2));
                    }
                    if n1 + n2 + 1 == excitations {
                        out.push(BasisLabel::excited(n1, n2));
                    }
                }
            }
        }
    }
    out
}

/// Solve the one- and two-excitation amplitudes with `eps < kappa / 5`.
pub fn solve_amplitudes(params: &ModelParams) -> Result<AmplitudeSet> {
    solve_amplitudes_with_guard(params, MAX_DRIVE_RATIO)
}

pub fn solve_amplitudes_with_guard(params: &ModelParams, max_drive_ratio: f64) -> Result<AmplitudeSet> {
    params.validate()?;
    let kappa = match params {
        ModelParams::Kerr(p) => p.kappa1.min(p.kappa2),
        ModelParams::Jc(p) => p.kappa1.min(p.kappa2),
    };
    if params.eps() >= max_drive_ratio * kappa {
        return Err(invalid(format!(
            "drive {} outside the weak-drive regime (eps < {max_drive_ratio} kappa)",
            params.eps()
        )));
    }
    let space = params.space(2)?;
    let heff = effective_hamiltonian(&params.hamiltonian(&space)?, &params.channels(&space)?)?;
    let kind = params.kind();

    let root = manifold(kind, 0);
    let mut entries: Vec<(BasisLabel, c64)> = vec![(root[0], c64::new(1.0, 0.0))];
    let mut previous = entries.clone();
    for excitations in 1..=2 {
        let labels = manifold(kind, excitations);
        let idx: Vec<usize> = labels.iter().map(|&l| space.encode(l)).collect::<Result<_>>()?;
        let n = labels.len();
        let block = Mat::from_fn(n, n, |i, j| heff.get(idx[i], idx[j]));
        let source = Mat::from_fn(n, 1, |i, _| {
            previous
                .iter()
                .map(|(l, c)| heff.get(idx[i], space.encode(*l).expect("label in space")) * c)
                .sum::<c64>()
        });
        let amplitudes = solve_block(&block, &source, excitations)?;
        previous = labels.iter().copied().zip(amplitudes).collect();
        entries.extend(previous.iter().copied());
    }
    Ok(AmplitudeSet::new(kind, entries))
}

/// Solve `block * c = -source`, refusing near-singular blocks.
fn solve_block(block: &Mat<c64>, source: &Mat<c64>, excitations: usize) -> Result<Vec<c64>> {
    let sv = block
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD of excitation block failed: {e:?}")))?;
    let (max, min) = (sv.first().copied().unwrap_or(0.0), sv.last().copied().unwrap_or(0.0));
    if !(min > BLOCK_SINGULAR_TOL * max) {
        return Err(Error::Degenerate(format!(
            "{excitations}-excitation block is singular (sigma ratio {:.3e})",
            min / max
        )));
    }
    let rhs = Mat::from_fn(source.nrows(), 1, |i, _| -source[(i, 0)]);
    let x = block.full_piv_lu().solve(&rhs);
    let residual = (block * &x + source).norm_max();
    let scale = block.norm_max() * x.norm_max() + source.norm_max();
    if !(residual <= BLOCK_RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE)) && residual > 0.0 {
        return Err(Error::Numerical(format!(
            "{excitations}-excitation block residual {residual:.3e} too large"
        )));
    }
    Ok((0..x.nrows()).map(|i| x[(i, 0)]).collect())
}

fn output_flux(c10: c64, c01: c64, spec: &OutputMixSpec) -> f64 {
    let [w1, w2] = spec.weights();
    (c10 * w1 + spec.phase(1) * c01 * w2).norm_sqr()
}

/// Large-`U` amplitudes of the Kerr model at `delta1 = 0`, `delta = 2U`.
///
/// The one-photon amplitudes `C10 = eps / kappa` and `C01 = -i eps / (2U - i kappa)`
/// are exact there; the two-photon ones are the asymptotic forms.
pub fn closed_form_kerr(u: f64, kappa: f64, eps: f64) -> AmplitudeSet {
    let i = c64::new(0.0, 1.0);
    let e2 = eps * eps;
    let single = c64::new(u, -kappa);
    let double = c64::new(2.0 * u, -kappa);
    let c20 = -i / single * (e2 / (SQRT_2 * kappa));
    let c02 = -(c64::new(SQRT_2, 0.0) / double) * (e2 / (4.0 * u));
    let c11 = -i / single * (c64::new(e2 / (2.0 * kappa), 0.0) - i * (e2 / (4.0 * u)));
    let c10 = c64::new(eps / kappa, 0.0);
    let c01 = -i * eps / double;
    AmplitudeSet::new(
        ModelKind::Kerr,
        vec![
            (BasisLabel::fock(0, 0), c64::new(1.0, 0.0)),
            (BasisLabel::fock(1, 0), c10),
            (BasisLabel::fock(0, 1), c01),
            (BasisLabel::fock(2, 0), c20),
            (BasisLabel::fock(1, 1), c11),
            (BasisLabel::fock(0, 2), c02),
        ],
    )
}

/// Output `g2(0)` from the two-photon output amplitude over the squared flux.
pub fn g2out_from_amplitudes(amps: &AmplitudeSet, spec: &OutputMixSpec) -> Result<f64> {
    spec.validate()?;
    let c10 = amps.require(1, 0)?;
    let c01 = amps.require(0, 1)?;
    let c20 = amps.require(2, 0)?;
    let c11 = amps.require(1, 1)?;
    let c02 = amps.require(0, 2)?;
    let n_out = output_flux(c10, c01, spec);
    if n_out <= OCCUPATION_FLOOR * (c10.norm_sqr() + c01.norm_sqr()).max(f64::MIN_POSITIVE) || n_out == 0.0 {
        return Err(Error::UndefinedCorrelation(format!("output flux {n_out:.3e} vanishes")));
    }
    let (k1, k2) = (spec.kappa1, spec.kappa2);
    let two_photon = c20 * (SQRT_2 * k1) + spec.phase(1) * c11 * (2.0 * (k1 * k2).sqrt()) + spec.phase(2) * c02 * (SQRT_2 * k2);
    Ok(two_photon.norm_sqr() / (n_out * n_out))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPrediction {
    pub g2_out: f64,
    pub g2_1: f64,
    /// Strength below the strong-coupling regime the laws describe.
    pub extrapolated: bool,
}

/// Kerr: `((k/U)^4 / 16, (k/U)^2)`. JC: `(16 (k/g)^4, 36 (k/g)^2)`.
pub fn scaling_prediction(kind: ModelKind, strength: f64, kappa: f64) -> Result<ScalingPrediction> {
    if !(strength > 0.0) || !(kappa > 0.0) {
        return Err(invalid(format!("strength and kappa must be positive, got {strength}, {kappa}")));
    }
    let r = kappa / strength;
    let (g2_out, g2_1) = match kind {
        ModelKind::Kerr => (r.powi(4) / 16.0, r * r),
        ModelKind::Jc => (16.0 * r.powi(4), 36.0 * r * r),
    };
    Ok(ScalingPrediction { g2_out, g2_1, extrapolated: strength / kappa < SCALING_VALIDITY })
}

/// Interference optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalPoint {
    pub kind: ModelKind,
    pub strength: f64,
    pub phi: f64,
    /// Kerr: inter-cavity detuning `delta`. JC: auxiliary detuning `delta2`.
    pub detuning: f64,
    /// Cavity-1 detuning (and TLS detuning for JC).
    pub delta1: f64,
    /// Kerr only: the equivalent point `(phi = 0, delta = -2U)`.
    pub mirror: Option<(f64, f64)>,
}

impl OptimalPoint {
    /// Model parameters at this point with unit cavity rates and `kappa_a = 2`.
    pub fn params(&self, eps: f64) -> ModelParams {
        match self.kind {
            ModelKind::Kerr => ModelParams::Kerr(KerrParams {
                delta1: self.delta1,
                delta2: self.delta1 + self.detuning,
                u: self.strength,
                eps,
                kappa1: 1.0,
                kappa2: 1.0,
                phi: self.phi,
            }),
            ModelKind::Jc => ModelParams::Jc(JcParams {
                eps,
                phi: self.phi,
                ..JcParams::resonant(self.strength, self.delta1, self.detuning)
            }),
        }
    }
}

pub fn optimal_point(kind: ModelKind, strength: f64) -> Result<OptimalPoint> {
    if !(strength > 0.0) {
        return Err(invalid(format!("strength must be positive, got {strength}")));
    }
    Ok(match kind {
        ModelKind::Kerr => OptimalPoint {
            kind,
            strength,
            phi: PI,
            detuning: 2.0 * strength,
            delta1: 0.0,
            mirror: Some((0.0, -2.0 * strength)),
        },
        ModelKind::Jc => OptimalPoint {
            kind,
            strength,
            phi: PI,
            detuning: -2.0 * strength / 3.0,
            delta1: -strength,
            mirror: None,
        },
    })
}
