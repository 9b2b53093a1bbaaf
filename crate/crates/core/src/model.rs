//! Kerr and Jaynes-Cummings Hamiltonians for the two-cavity interferometer,
//! their dissipation channels, and the non-Hermitian effective Hamiltonians.
//!
//! All energies and rates are in units of the cavity decay rate, so the
//! reference setting is `kappa1 = kappa2 = 1`. Dissipators use the form
//! `coefficient * (2 c rho c^dag - c^dag c rho - rho c^dag c)`, under which
//! the no-jump Hamiltonian gains `-i * coefficient * c^dag c`.

use std::f64::consts::PI;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hilbert::{
    build_mode_operator, build_tls_operator, embed, mode_lowering, CompositeSpace, ModeOp,
    OperatorMatrix, Slot, TlsOp,
};
use crate::observables::OutputMixSpec;

/// Parameters of the Kerr cavity plus linear auxiliary cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KerrParams {
    /// Cavity-1 detuning from the probe.
    pub delta1: f64,
    /// Cavity-2 detuning from the probe.
    pub delta2: f64,
    /// Kerr strength.
    pub u: f64,
    pub eps: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Output mixing phase in radians.
    pub phi: f64,
}

impl Default for KerrParams {
    /// Resonant nonlinear cavity at `U = 20`, `delta = 2U`, `phi = pi`, `eps = 0.1`.
    fn default() -> Self {
        Self { delta1: 0.0, delta2: 40.0, u: 20.0, eps: 0.1, kappa1: 1.0, kappa2: 1.0, phi: PI }
    }
}

impl KerrParams {
    /// Detuning between the two cavities, `omega2 - omega1`.
    pub fn delta(&self) -> f64 {
        self.delta2 - self.delta1
    }

    pub fn set_delta(&mut self, delta: f64) {
        self.delta2 = self.delta1 + delta;
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.delta1, self.delta2, self.u, self.eps, self.kappa1, self.kappa2, self.phi];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(invalid(format!("non-finite Kerr parameter: {self:?}")));
        }
        if self.kappa1 <= 0.0 || self.kappa2 <= 0.0 {
            return Err(invalid("cavity decay rates must be positive"));
        }
        if self.eps < 0.0 {
            return Err(invalid("drive amplitude must be non-negative"));
        }
        Ok(())
    }
}

/// Parameters of the cavity-QED variant: a TLS coupled to cavity 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JcParams {
    pub delta1: f64,
    /// TLS detuning from the probe.
    pub delta_a: f64,
    pub delta2: f64,
    /// TLS-cavity coupling.
    pub g: f64,
    pub eps: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// TLS decay rate; the dissipator coefficient is half of it.
    pub kappa_a: f64,
    pub phi: f64,
}

impl Default for JcParams {
    /// `g = 20`, `delta1 = delta_a = -g`, `delta2 = -2g/3`, `kappa_a = 2`, `phi = pi`.
    fn default() -> Self {
        Self::resonant(20.0, -20.0, -40.0 / 3.0)
    }
}

impl JcParams {
    /// TLS resonant with cavity 1 (`delta_a = delta1`) and `kappa_a = 2 kappa`.
    pub fn resonant(g: f64, delta1: f64, delta2: f64) -> Self {
        Self {
            delta1,
            delta_a: delta1,
            delta2,
            g,
            eps: 0.1,
            kappa1: 1.0,
            kappa2: 1.0,
            kappa_a: 2.0,
            phi: PI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.delta1, self.delta_a, self.delta2, self.g, self.eps, self.kappa1, self.kappa2,
            self.kappa_a, self.phi,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(invalid(format!("non-finite JC parameter: {self:?}")));
        }
        if self.kappa1 <= 0.0 || self.kappa2 <= 0.0 {
            return Err(invalid("cavity decay rates must be positive"));
        }
        if self.kappa_a < 0.0 {
            return Err(invalid("TLS decay rate must be non-negative"));
        }
        if self.eps < 0.0 {
            return Err(invalid("drive amplitude must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Kerr,
    Jc,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Kerr => "kerr",
            ModelKind::Jc => "jc",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kerr" => Ok(ModelKind::Kerr),
            "jc" => Ok(ModelKind::Jc),
            other => Err(invalid(format!("unknown model {other:?}, expected kerr or jc"))),
        }
    }
}

/// Either model's parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Kerr(KerrParams),
    Jc(JcParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Kerr(_) => ModelKind::Kerr,
            ModelParams::Jc(_) => ModelKind::Jc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Kerr(p) => p.validate(),
            ModelParams::Jc(p) => p.validate(),
        }
    }

    pub fn space(&self, cutoff: usize) -> Result<CompositeSpace> {
        match self {
            ModelParams::Kerr(_) => CompositeSpace::two_modes(cutoff),
            ModelParams::Jc(_) => CompositeSpace::with_tls(cutoff),
        }
    }

    pub fn hamiltonian(&self, space: &CompositeSpace) -> Result<OperatorMatrix> {
        match self {
            ModelParams::Kerr(p) => kerr_hamiltonian(p, space),
            ModelParams::Jc(p) => jc_hamiltonian(p, space),
        }
    }

    pub fn channels(&self, space: &CompositeSpace) -> Result<Vec<CollapseChannel>> {
        collapse_channels(self, space)
    }

    pub fn eps(&self) -> f64 {
        match self {
            ModelParams::Kerr(p) => p.eps,
            ModelParams::Jc(p) => p.eps,
        }
    }

    pub fn output_mix(&self) -> OutputMixSpec {
        match self {
            ModelParams::Kerr(p) => OutputMixSpec::new(p.phi, p.kappa1, p.kappa2),
            ModelParams::Jc(p) => OutputMixSpec::new(p.phi, p.kappa1, p.kappa2),
        }
    }
}

/// One Lindblad jump operator and its prefactor.
#[derive(Debug, Clone)]
pub struct CollapseChannel {
    pub operator: OperatorMatrix,
    pub coefficient: f64,
}

impl CollapseChannel {
    pub fn new(operator: OperatorMatrix, coefficient: f64) -> Result<Self> {
        if !(coefficient > 0.0) || !coefficient.is_finite() {
            return Err(invalid(format!("channel coefficient must be positive, got {coefficient}")));
        }
        Ok(Self { operator, coefficient })
    }
}

fn i_unit() -> c64 {
    c64::new(0.0, 1.0)
}

fn real(x: f64) -> c64 {
    c64::new(x, 0.0)
}

pub fn kerr_hamiltonian(p: &KerrParams, space: &CompositeSpace) -> Result<OperatorMatrix> {
    if space.has_tls() {
        return Err(invalid("Kerr model lives on two bosonic modes without a TLS"));
    }
    p.validate()?;
    let [a1, a2] = mode_lowering(space)?;
    let (a1d, a2d) = (a1.adjoint(), a2.adjoint());
    let n1 = &a1d * &a1;
    let n2 = &a2d * &a2;
    let kerr = &(&a1d * &a1d) * &(&a1 * &a1);
    let drive1 = (&a1d - &a1).scale(i_unit() * p.eps);
    let drive2 = (&a2d - &a2).scale(i_unit() * p.eps);
    let h = &n1.scale(real(p.delta1)) + &kerr.scale(real(p.u));
    let h = &(&h + &drive1) + &n2.scale(real(p.delta2));
    Ok(&h + &drive2)
}

pub fn jc_hamiltonian(p: &JcParams, space: &CompositeSpace) -> Result<OperatorMatrix> {
    if !space.has_tls() {
        return Err(invalid("JC model needs a TLS factor"));
    }
    p.validate()?;
    let [a1, a2] = mode_lowering(space)?;
    let (a1d, a2d) = (a1.adjoint(), a2.adjoint());
    let sm = embed(&build_tls_operator(TlsOp::Lowering), Slot::Tls, space)?;
    let sp = sm.adjoint();
    let n1 = &a1d * &a1;
    let n2 = &a2d * &a2;
    let excited = &sp * &sm;
    let coupling = &(&a1d * &sm) + &(&sp * &a1);
    let drive = (&(&a1d + &a2d) - &(&a1 + &a2)).scale(i_unit() * p.eps);
    let h = &n1.scale(real(p.delta1)) + &excited.scale(real(p.delta_a));
    let h = &(&h + &coupling.scale(real(p.g))) + &n2.scale(real(p.delta2));
    Ok(&h + &drive)
}

/// Cavity channels `(a_i, kappa_i)` and, for the JC model, `(sigma_-, kappa_a / 2)`.
pub fn collapse_channels(params: &ModelParams, space: &CompositeSpace) -> Result<Vec<CollapseChannel>> {
    params.validate()?;
    let [a1, a2] = mode_lowering(space)?;
    match params {
        ModelParams::Kerr(p) => {
            if space.has_tls() {
                return Err(invalid("Kerr model lives on two bosonic modes without a TLS"));
            }
            Ok(vec![CollapseChannel::new(a1, p.kappa1)?, CollapseChannel::new(a2, p.kappa2)?])
        }
        ModelParams::Jc(p) => {
            if !space.has_tls() {
                return Err(invalid("JC model needs a TLS factor"));
            }
            let mut out = vec![CollapseChannel::new(a1, p.kappa1)?, CollapseChannel::new(a2, p.kappa2)?];
            if p.kappa_a > 0.0 {
                let sm = embed(&build_tls_operator(TlsOp::Lowering), Slot::Tls, space)?;
                out.push(CollapseChannel::new(sm, p.kappa_a / 2.0)?);
            }
            Ok(out)
        }
    }
}

/// `H - i * sum_k coefficient_k c_k^dag c_k`.
pub fn effective_hamiltonian(h: &OperatorMatrix, channels: &[CollapseChannel]) -> Result<OperatorMatrix> {
    let mut out = h.clone();
    for ch in channels {
        if ch.operator.dim() != h.dim() {
            return Err(invalid(format!(
                "channel dim {} does not match Hamiltonian dim {}",
                ch.operator.dim(),
                h.dim()
            )));
        }
        let damping = (&ch.operator.adjoint() * &ch.operator).scale(c64::new(0.0, -ch.coefficient));
        out = &out + &damping;
    }
    Ok(out)
}

/// Number operator of one mode embedded in `space`.
pub fn number_operator(space: &CompositeSpace, slot: Slot) -> Result<OperatorMatrix> {
    let cutoff = match slot {
        Slot::Mode1 => space.mode_cutoffs()[0],
        Slot::Mode2 => space.mode_cutoffs()[1],
        Slot::Tls => return embed(&build_tls_operator(TlsOp::ExcitationProjector), Slot::Tls, space),
    };
    embed(&build_mode_operator(ModeOp::Number, cutoff)?, slot, space)
}
