//! Photon numbers, intracavity second-order correlations and the
//! correlation of the beam-splitter output `a_out ~ sqrt(k1) a1 + e^{i phi} sqrt(k2) a2`.
//!
//! The vacuum input entering the output field never contributes: every moment
//! used here is normally ordered, so only intracavity correlators appear. The
//! common `1/sqrt(2)` of the beam splitter cancels in the ratio and is dropped.

use std::f64::consts::TAU;

use faer::c64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hilbert::{mode_lowering, CompositeSpace, DensityMatrix, OperatorMatrix};

/// Occupations or fluxes at or below this are treated as zero.
pub const OCCUPATION_FLOOR: f64 = 1e-14;
/// Slack allowed on quantities that must be non-negative.
pub const NEGATIVE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    One,
    Two,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::One, Mode::Two];

    pub fn index(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
        }
    }

    fn from_index(i: usize) -> Self {
        if i == 0 {
            Mode::One
        } else {
            Mode::Two
        }
    }
}

/// Beam-splitter settings of the output port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutputMixSpec {
    phi: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl OutputMixSpec {
    /// The phase is reduced to `[0, 2 pi)`.
    pub fn new(phi: f64, kappa1: f64, kappa2: f64) -> Self {
        Self { phi: phi.rem_euclid(TAU), kappa1, kappa2 }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn validate(&self) -> Result<()> {
        if !self.phi.is_finite() || !(self.kappa1 > 0.0) || !(self.kappa2 >= 0.0) || !self.kappa2.is_finite() {
            return Err(invalid(format!("invalid output mix {self:?}")));
        }
        Ok(())
    }

    pub(crate) fn weights(&self) -> [f64; 2] {
        [self.kappa1.sqrt(), self.kappa2.sqrt()]
    }

    /// `e^{i n phi}` for the net number of mode-2 operators `n`.
    pub(crate) fn phase(&self, n: i32) -> c64 {
        c64::from_polar(1.0, n as f64 * self.phi)
    }
}

/// `<a_j^dag a_k^dag a_l a_m>` for all 16 index combinations, indexed `[j][k][l][m]`.
pub type CrossTable = [[[[c64; 2]; 2]; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub n1: f64,
    pub n2: f64,
    pub n_out: f64,
    pub g2_1: Option<f64>,
    pub g2_2: Option<f64>,
    pub g2_out: Option<f64>,
    #[serde(skip)]
    pub cross: CrossTable,
}

/// Precomputed mode operators of one space.
#[derive(Debug, Clone)]
pub struct Correlator {
    lowering: [OperatorMatrix; 2],
    /// `a_x a_y`, symmetric in `(x, y)`.
    pair: [[OperatorMatrix; 2]; 2],
}

impl Correlator {
    pub fn new(space: &CompositeSpace) -> Result<Self> {
        let [a1, a2] = mode_lowering(space)?;
        let p11 = &a1 * &a1;
        let p12 = &a1 * &a2;
        let p22 = &a2 * &a2;
        Ok(Self { pair: [[p11, p12.clone()], [p12, p22]], lowering: [a1, a2] })
    }

    fn check(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.lowering[0].dim() {
            return Err(invalid(format!(
                "state dim {} does not match space dim {}",
                rho.dim(),
                self.lowering[0].dim()
            )));
        }
        Ok(())
    }

    /// `trace(B rho C^dag)` without forming the triple product.
    fn sandwich(rho: &DensityMatrix, left: &OperatorMatrix, right: &OperatorMatrix) -> c64 {
        let x = left * rho.as_operator();
        let n = x.dim();
        let mut acc = c64::new(0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                let r = right.get(i, j);
                if r != c64::new(0.0, 0.0) {
                    acc += x.get(i, j) * r.conj();
                }
            }
        }
        acc
    }

    /// `<a_j^dag a_k>`.
    pub fn quadratic(&self, rho: &DensityMatrix, j: Mode, k: Mode) -> Result<c64> {
        self.check(rho)?;
        Ok(Self::sandwich(rho, &self.lowering[k.index()], &self.lowering[j.index()]))
    }

    pub fn mean_photon(&self, rho: &DensityMatrix, mode: Mode) -> Result<f64> {
        let n = self.quadratic(rho, mode, mode)?.re;
        if n < -NEGATIVE_SLACK {
            return Err(Error::Numerical(format!("negative occupation {n:.3e}")));
        }
        Ok(n.max(0.0))
    }

    /// Normally ordered `<a_j^dag a_k^dag a_l a_m>`.
    pub fn quartic_correlator(&self, rho: &DensityMatrix, j: Mode, k: Mode, l: Mode, m: Mode) -> Result<c64> {
        self.check(rho)?;
        Ok(Self::sandwich(rho, &self.pair[l.index()][m.index()], &self.pair[k.index()][j.index()]))
    }

    pub fn cross_table(&self, rho: &DensityMatrix) -> Result<CrossTable> {
        self.check(rho)?;
        let mut table = [[[[c64::new(0.0, 0.0); 2]; 2]; 2]; 2];
        for (j, tj) in table.iter_mut().enumerate() {
            for (k, tk) in tj.iter_mut().enumerate() {
                for (l, tl) in tk.iter_mut().enumerate() {
                    for (m, v) in tl.iter_mut().enumerate() {
                        *v = self.quartic_correlator(
                            rho,
                            Mode::from_index(j),
                            Mode::from_index(k),
                            Mode::from_index(l),
                            Mode::from_index(m),
                        )?;
                    }
                }
            }
        }
        Ok(table)
    }

    /// `<a^dag a^dag a a> / <a^dag a>^2` for one cavity.
    pub fn g2_cavity(&self, rho: &DensityMatrix, mode: Mode) -> Result<f64> {
        let n = self.mean_photon(rho, mode)?;
        if n <= OCCUPATION_FLOOR {
            return Err(Error::UndefinedCorrelation(format!("mode {mode:?} occupation {n:.3e} is zero")));
        }
        let num = self.quartic_correlator(rho, mode, mode, mode, mode)?.re;
        clamp_nonnegative(num / (n * n))
    }

    /// Output photon flux `N_out`.
    pub fn n_out(&self, rho: &DensityMatrix, spec: &OutputMixSpec) -> Result<f64> {
        spec.validate()?;
        let n1 = self.mean_photon(rho, Mode::One)?;
        let n2 = self.mean_photon(rho, Mode::Two)?;
        let cross = self.quadratic(rho, Mode::One, Mode::Two)?;
        Ok(flux(spec, n1, n2, cross))
    }

    /// Output-field `g2(0)` from the sixteen phase-weighted correlators.
    pub fn g2_out(&self, rho: &DensityMatrix, spec: &OutputMixSpec) -> Result<f64> {
        let table = self.cross_table(rho)?;
        let n_out = self.n_out(rho, spec)?;
        g2_out_from_table(&table, n_out, spec)
    }

    /// Everything in a report that does not depend on the output mix.
    pub fn moments(&self, rho: &DensityMatrix) -> Result<Moments> {
        Ok(Moments {
            n1: self.mean_photon(rho, Mode::One)?,
            n2: self.mean_photon(rho, Mode::Two)?,
            cross12: self.quadratic(rho, Mode::One, Mode::Two)?,
            g2_1: defined(self.g2_cavity(rho, Mode::One))?,
            g2_2: defined(self.g2_cavity(rho, Mode::Two))?,
            table: self.cross_table(rho)?,
        })
    }

    pub fn report(&self, rho: &DensityMatrix, spec: &OutputMixSpec) -> Result<CorrelationReport> {
        self.moments(rho)?.report(spec)
    }
}

/// Mix-independent moments of one state; a phase scan reuses them.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub n1: f64,
    pub n2: f64,
    /// `<a_1^dag a_2>`.
    pub cross12: c64,
    pub g2_1: Option<f64>,
    pub g2_2: Option<f64>,
    pub table: CrossTable,
}

impl Moments {
    pub fn report(&self, spec: &OutputMixSpec) -> Result<CorrelationReport> {
        spec.validate()?;
        let n_out = flux(spec, self.n1, self.n2, self.cross12);
        Ok(CorrelationReport {
            n1: self.n1,
            n2: self.n2,
            n_out,
            g2_1: self.g2_1,
            g2_2: self.g2_2,
            g2_out: defined(g2_out_from_table(&self.table, n_out, spec))?,
            cross: self.table,
        })
    }
}

fn defined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedCorrelation(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn clamp_nonnegative(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Numerical(format!("non-finite correlation {x}")));
    }
    if x < -NEGATIVE_SLACK {
        return Err(Error::Numerical(format!("negative correlation {x:.3e}")));
    }
    Ok(x.max(0.0))
}

fn flux(spec: &OutputMixSpec, n1: f64, n2: f64, cross12: c64) -> f64 {
    let mix = 2.0 * (spec.kappa1 * spec.kappa2).sqrt() * (spec.phase(1) * cross12).re;
    (spec.kappa1 * n1 + spec.kappa2 * n2 + mix).max(0.0)
}

fn g2_out_from_table(table: &CrossTable, n_out: f64, spec: &OutputMixSpec) -> Result<f64> {
    if n_out <= OCCUPATION_FLOOR {
        return Err(Error::UndefinedCorrelation(format!("output flux {n_out:.3e} vanishes")));
    }
    let w = spec.weights();
    let mut num = c64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for j in 0..2 {
        for k in 0..2 {
            for l in 0..2 {
                for m in 0..2 {
                    let n = (l + m) as i32 - (j + k) as i32;
                    let term = spec.phase(n) * (w[j] * w[k] * w[l] * w[m]) * table[j][k][l][m];
                    magnitude += term.norm();
                    num += term;
                }
            }
        }
    }
    if num.im.abs() > NEGATIVE_SLACK * magnitude.max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!("output numerator has imaginary part {:.3e}", num.im)));
    }
    clamp_nonnegative(num.re / (n_out * n_out))
}

pub fn mean_photon(space: &CompositeSpace, rho: &DensityMatrix, mode: Mode) -> Result<f64> {
    Correlator::new(space)?.mean_photon(rho, mode)
}

pub fn g2_cavity(space: &CompositeSpace, rho: &DensityMatrix, mode: Mode) -> Result<f64> {
    Correlator::new(space)?.g2_cavity(rho, mode)
}

pub fn quartic_correlator(
    space: &CompositeSpace,
    rho: &DensityMatrix,
    [j, k, l, m]: [Mode; 4],
) -> Result<c64> {
    Correlator::new(space)?.quartic_correlator(rho, j, k, l, m)
}

pub fn n_out(space: &CompositeSpace, rho: &DensityMatrix, spec: &OutputMixSpec) -> Result<f64> {
    Correlator::new(space)?.n_out(rho, spec)
}

pub fn g2_out(space: &CompositeSpace, rho: &DensityMatrix, spec: &OutputMixSpec) -> Result<f64> {
    Correlator::new(space)?.g2_out(rho, spec)
}
