//! Concrete elements: the mode and qbit families, Jaynes–Cummings coupling
//! and a three-leg lowering-operator coupling, with their parameter records.
//!
//! Conventions (ħ = 1):
//!
//! * mode: `H = −δ a†a + i(η a† − η* a)`, jump `J = √(2κ) a`
//! * qbit: the same with `σ` (levels `|g⟩ = 0`, `|e⟩ = 1`), `J = √(2γ) σ`
//! * Jaynes–Cummings: `H = i(g* σ†a − g σ a†)`, legs `(qbit, mode)`
//!
//! The non-Hermitian part `−i κ a†a` is split between the ODE and the exact
//! propagator according to the picture:
//!
//! | picture | propagator exponents `z_n` | Hamiltonian part |
//! |---------|----------------------------|------------------|
//! | `Sch`   | none                       | `(−δ − iκ) n` + pump |
//! | `UIP`   | `iδ n`                     | `−iκ n` + dressed pump |
//! | `IP`    | `(iδ − κ) n`               | dressed pump |

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::cli::{Handle, ParameterTable, TokenParam};
use crate::qdata::{DensityOperator, StateVector};
use crate::qop::{DiagonalPropagator, ProductTerm, Tridiagonal};
use crate::structure::{
    Averaged, DisplayKey, Element, Exact, Hamiltonian, JumpChannel, JumpSet, Liouvillean,
    SystemLayout, TermHamiltonian,
};
use crate::{Error, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Picture {
    Sch,
    UIP,
    IP,
}

impl TokenParam for Picture {
    const CHOICES: &'static [&'static str] = &["Sch", "UIP", "IP"];

    fn token(self) -> &'static str {
        match self {
            Picture::Sch => "Sch",
            Picture::UIP => "UIP",
            Picture::IP => "IP",
        }
    }

    fn from_token(token: &str) -> Option<Self> {
        match token {
            "Sch" => Some(Picture::Sch),
            "UIP" => Some(Picture::UIP),
            "IP" => Some(Picture::IP),
            _ => None,
        }
    }
}

/// Registers `picture` (default `UIP`).
pub fn register_picture(table: &mut ParameterTable) -> Result<Handle<Picture>> {
    table.add("picture", "Quantum mechanical picture", Picture::UIP, None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsMode {
    pub delta: f64,
    pub kappa: f64,
    pub eta: C64,
    pub cutoff: usize,
    pub minit: C64,
    /// `Some` when a Fock initial state was requested.
    pub minit_fock: Option<usize>,
}

impl Default for ParsMode {
    fn default() -> Self {
        ParsMode {
            delta: 0.0,
            kappa: 0.0,
            eta: ZERO,
            cutoff: 10,
            minit: ZERO,
            minit_fock: None,
        }
    }
}

impl ParsMode {
    pub fn validate(&self) -> Result<()> {
        if self.cutoff < 2 {
            return Err(Error::InvalidParameter(format!(
                "mode cutoff must be at least 2, got {}",
                self.cutoff
            )));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mode loss rate must be finite and non-negative, got {}",
                self.kappa
            )));
        }
        if !self.delta.is_finite() || !self.eta.is_finite() || !self.minit.is_finite() {
            return Err(Error::InvalidParameter("non-finite mode parameter".into()));
        }
        Ok(())
    }
}

/// Table handles of a registered [`ParsMode`].
#[derive(Clone, Debug)]
pub struct ModeParams {
    pub delta: Handle<f64>,
    pub kappa: Handle<f64>,
    pub eta: Handle<C64>,
    pub cutoff: Handle<usize>,
    pub minit: Handle<C64>,
    pub minit_fock: Handle<usize>,
}

impl ModeParams {
    pub fn register(table: &mut ParameterTable, prefix: Option<&str>) -> Result<Self> {
        let d = ParsMode::default();
        Ok(ModeParams {
            delta: table.add("deltaC", "Mode detuning", d.delta, prefix)?,
            kappa: table.add("kappa", "Mode loss rate", d.kappa, prefix)?,
            eta: table.add("eta", "Mode pump amplitude", d.eta, prefix)?,
            cutoff: table.add("cutoff", "Mode Fock-space cutoff", d.cutoff, prefix)?,
            minit: table.add("minit", "Mode initial coherent amplitude", d.minit, prefix)?,
            minit_fock: table.add("minitFock", "Mode initial Fock state (overrides minit)", 0usize, prefix)?,
        })
    }

    /// The Fock option counts as given when set explicitly or nonzero.
    pub fn read(&self, table: &ParameterTable) -> ParsMode {
        let fock = table.get(&self.minit_fock);
        ParsMode {
            delta: table.get(&self.delta),
            kappa: table.get(&self.kappa),
            eta: table.get(&self.eta),
            cutoff: table.get(&self.cutoff),
            minit: table.get(&self.minit),
            minit_fock: (table.is_set(self.minit_fock.name()) || fock != 0).then_some(fock),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsQbit {
    pub delta: f64,
    pub gamma: f64,
    pub eta: C64,
    /// `(c_g, c_e)`, normalized on use.
    pub init: (C64, C64),
}

impl Default for ParsQbit {
    fn default() -> Self {
        ParsQbit {
            delta: 0.0,
            gamma: 0.0,
            eta: ZERO,
            init: (C64::new(1.0, 0.0), ZERO),
        }
    }
}

impl ParsQbit {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "qbit decay rate must be finite and non-negative, got {}",
                self.gamma
            )));
        }
        if !self.delta.is_finite() || !self.eta.is_finite() {
            return Err(Error::InvalidParameter("non-finite qbit parameter".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct QbitParams {
    pub delta: Handle<f64>,
    pub gamma: Handle<f64>,
    pub eta: Handle<C64>,
    pub init: Handle<(C64, C64)>,
}

impl QbitParams {
    pub fn register(table: &mut ParameterTable, prefix: Option<&str>) -> Result<Self> {
        let d = ParsQbit::default();
        Ok(QbitParams {
            delta: table.add("deltaA", "Qbit detuning", d.delta, prefix)?,
            gamma: table.add("gamma", "Qbit decay rate", d.gamma, prefix)?,
            eta: table.add("etaA", "Qbit pump amplitude", d.eta, prefix)?,
            init: table.add("qbitInit", "Qbit initial amplitudes (c_g),(c_e)", d.init, prefix)?,
        })
    }

    pub fn read(&self, table: &ParameterTable) -> ParsQbit {
        ParsQbit {
            delta: table.get(&self.delta),
            gamma: table.get(&self.gamma),
            eta: table.get(&self.eta),
            init: table.get(&self.init),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsJC {
    pub g: C64,
}

#[derive(Clone, Debug)]
pub struct JCParams {
    pub g: Handle<C64>,
}

impl JCParams {
    pub fn register(table: &mut ParameterTable, prefix: Option<&str>) -> Result<Self> {
        Ok(JCParams {
            g: table.add("g", "Jaynes-Cummings coupling", ZERO, prefix)?,
        })
    }

    pub fn read(&self, table: &ParameterTable) -> ParsJC {
        ParsJC {
            g: table.get(&self.g),
        }
    }
}

/// Which roles a free of the mode or qbit family carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FreeVariant {
    Plain,
    PlainSch,
    Pumped,
    PumpedSch,
    Lossy,
    LossyUIP,
    LossySch,
    PumpedLossy,
    PumpedLossyUIP,
    PumpedLossySch,
}

impl FreeVariant {
    pub const ALL: [FreeVariant; 10] = [
        FreeVariant::Plain,
        FreeVariant::PlainSch,
        FreeVariant::Pumped,
        FreeVariant::PumpedSch,
        FreeVariant::Lossy,
        FreeVariant::LossyUIP,
        FreeVariant::LossySch,
        FreeVariant::PumpedLossy,
        FreeVariant::PumpedLossyUIP,
        FreeVariant::PumpedLossySch,
    ];

    /// Lossless UIP and IP coincide.
    pub fn select(lossy: bool, pumped: bool, picture: Picture) -> Self {
        use FreeVariant::*;
        match (lossy, pumped, picture) {
            (false, false, Picture::Sch) => PlainSch,
            (false, false, _) => Plain,
            (false, true, Picture::Sch) => PumpedSch,
            (false, true, _) => Pumped,
            (true, false, Picture::Sch) => LossySch,
            (true, false, Picture::UIP) => LossyUIP,
            (true, false, Picture::IP) => Lossy,
            (true, true, Picture::Sch) => PumpedLossySch,
            (true, true, Picture::UIP) => PumpedLossyUIP,
            (true, true, Picture::IP) => PumpedLossy,
        }
    }

    pub fn is_lossy(self) -> bool {
        use FreeVariant::*;
        matches!(
            self,
            Lossy | LossyUIP | LossySch | PumpedLossy | PumpedLossyUIP | PumpedLossySch
        )
    }

    pub fn is_pumped(self) -> bool {
        use FreeVariant::*;
        matches!(
            self,
            Pumped | PumpedSch | PumpedLossy | PumpedLossyUIP | PumpedLossySch
        )
    }

    pub fn is_schrodinger(self) -> bool {
        use FreeVariant::*;
        matches!(self, PlainSch | PumpedSch | LossySch | PumpedLossySch)
    }

    /// Variant name for a family, e.g. `PumpedLossyModeUIP`.
    pub fn name(self, family: &str) -> String {
        use FreeVariant::*;
        let (head, tail) = match self {
            Plain => ("", ""),
            PlainSch => ("", "Sch"),
            Pumped => ("Pumped", ""),
            PumpedSch => ("Pumped", "Sch"),
            Lossy => ("Lossy", ""),
            LossyUIP => ("Lossy", "UIP"),
            LossySch => ("Lossy", "Sch"),
            PumpedLossy => ("PumpedLossy", ""),
            PumpedLossyUIP => ("PumpedLossy", "UIP"),
            PumpedLossySch => ("PumpedLossy", "Sch"),
        };
        format!("{head}{family}{tail}")
    }
}

/// Roles of a single-leg ladder system (mode or qbit).
#[derive(Clone, Debug)]
struct LadderParts {
    layout: SystemLayout,
    name: String,
    variant: FreeVariant,
    hamiltonian: Option<TermHamiltonian>,
    jumps: Option<JumpSet>,
    propagator: Option<DiagonalPropagator>,
}

impl LadderParts {
    fn build(
        family: &str,
        jump_label: &str,
        dim: usize,
        delta: f64,
        loss: f64,
        eta: C64,
        picture: Picture,
    ) -> Result<Self> {
        let variant = FreeVariant::select(loss != 0.0, eta != ZERO, picture);
        let name = variant.name(family);
        let level = |n: usize| n as f64;

        let exponents: Option<Vec<C64>> = match variant {
            v if v.is_schrodinger() => None,
            FreeVariant::Lossy | FreeVariant::PumpedLossy => Some(
                (0..dim)
                    .map(|n| C64::new(-loss, delta) * level(n))
                    .collect(),
            ),
            _ => Some((0..dim).map(|n| C64::new(0.0, delta) * level(n)).collect()),
        };
        let propagator = exponents.map(|z| DiagonalPropagator::new(0, z));
        let freqs = propagator
            .as_ref()
            .map(|p| p.frequencies())
            .filter(|f| f.iter().any(|w| *w != ZERO));

        // Diagonal remaining in the ODE: (−δ − iκ)n, −iκn or nothing.
        let diag_coeff = match variant {
            v if v.is_schrodinger() => C64::new(-delta, -loss),
            FreeVariant::LossyUIP | FreeVariant::PumpedLossyUIP => C64::new(0.0, -loss),
            _ => ZERO,
        };
        let has_diag = variant.is_schrodinger() || diag_coeff != ZERO;
        let hamiltonian = if has_diag || variant.is_pumped() {
            let mut op = Tridiagonal::number(dim).scaled(diag_coeff);
            if variant.is_pumped() {
                let pump = Tridiagonal::annihilation(dim)
                    .scaled(-I * eta.conj())
                    .plus(&Tridiagonal::creation(dim).scaled(I * eta))?;
                op = op.plus(&pump)?;
            }
            if let Some(f) = &freqs {
                op = op.with_freqs(f.clone())?;
            }
            Some(TermHamiltonian::new(vec![ProductTerm::single(
                C64::new(1.0, 0.0),
                0,
                op,
            )]))
        } else {
            None
        };

        let jumps = if variant.is_lossy() {
            let mut j = Tridiagonal::annihilation(dim);
            if let Some(f) = &freqs {
                j = j.with_freqs(f.clone())?;
            }
            let term = ProductTerm::single(C64::new((2.0 * loss).sqrt(), 0.0), 0, j);
            Some(JumpSet::new(vec![JumpChannel::new(jump_label, term)]))
        } else {
            None
        };

        Ok(LadderParts {
            layout: SystemLayout::new(name.clone(), vec![dim])?,
            name,
            variant,
            hamiltonian,
            jumps,
            propagator,
        })
    }
}

macro_rules! ladder_element {
    ($ty:ty) => {
        impl Element for $ty {
            fn layout(&self) -> &SystemLayout {
                &self.parts.layout
            }

            fn variant(&self) -> &str {
                &self.parts.name
            }

            fn hamiltonian(&self) -> Option<&dyn Hamiltonian> {
                self.parts.hamiltonian.as_ref().map(|h| h as &dyn Hamiltonian)
            }

            fn liouvillean(&self) -> Option<&dyn Liouvillean> {
                self.parts.jumps.as_ref().map(|j| j as &dyn Liouvillean)
            }

            fn exact(&self) -> Option<&dyn Exact> {
                self.parts.propagator.as_ref().map(|p| p as &dyn Exact)
            }

            fn averaged(&self) -> Option<&dyn Averaged> {
                Some(self)
            }
        }

        impl $ty {
            pub fn free_variant(&self) -> FreeVariant {
                self.parts.variant
            }

            pub fn dim(&self) -> usize {
                self.parts.layout.leg_dims[0]
            }
        }
    };
}

/// A truncated harmonic oscillator.
#[derive(Clone, Debug)]
pub struct Mode {
    pars: ParsMode,
    picture: Picture,
    parts: LadderParts,
}

ladder_element!(Mode);

impl Mode {
    pub fn pars(&self) -> &ParsMode {
        &self.pars
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }
}

impl Averaged for Mode {
    fn key(&self) -> DisplayKey {
        DisplayKey::new(["<n>", "Var(n)", "Re<a>", "Im<a>"])
    }

    fn average(&self, rho: &DensityOperator) -> Vec<f64> {
        let dim = rho.dim();
        let (mut n1, mut n2, mut a) = (0.0, 0.0, ZERO);
        for n in 0..dim {
            let p = rho.at(n, n).re;
            n1 += n as f64 * p;
            n2 += (n * n) as f64 * p;
            if n + 1 < dim {
                a += ((n + 1) as f64).sqrt() * rho.at(n + 1, n);
            }
        }
        vec![n1, n2 - n1 * n1, a.re, a.im]
    }
}

/// Builds the mode variant selected by `(κ ≠ 0, η ≠ 0, picture)`.
pub fn make_mode(p: &ParsMode, picture: Picture) -> Result<Mode> {
    p.validate()?;
    let parts = LadderParts::build("Mode", "photon loss", p.cutoff, p.delta, p.kappa, p.eta, picture)?;
    Ok(Mode {
        pars: p.clone(),
        picture,
        parts,
    })
}

/// A two-level system.
#[derive(Clone, Debug)]
pub struct Qbit {
    pars: ParsQbit,
    picture: Picture,
    parts: LadderParts,
}

ladder_element!(Qbit);

impl Qbit {
    pub fn pars(&self) -> &ParsQbit {
        &self.pars
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }
}

impl Averaged for Qbit {
    fn key(&self) -> DisplayKey {
        DisplayKey::new(["P_e", "Re<sigma>", "Im<sigma>"])
    }

    fn average(&self, rho: &DensityOperator) -> Vec<f64> {
        let s = rho.at(1, 0);
        vec![rho.at(1, 1).re, s.re, s.im]
    }
}

pub fn make_qbit(p: &ParsQbit, picture: Picture) -> Result<Qbit> {
    p.validate()?;
    let parts = LadderParts::build("Qbit", "spontaneous emission", 2, p.delta, p.gamma, p.eta, picture)?;
    Ok(Qbit {
        pars: p.clone(),
        picture,
        parts,
    })
}

/// Coherent state `∝ Σ αⁿ/√n! |n⟩`, normalized over the truncated space.
pub fn coherent(alpha: C64, cutoff: usize) -> Result<StateVector> {
    if cutoff == 0 {
        return Err(Error::InvalidDims("coherent state with cutoff 0".into()));
    }
    let mut amps = Vec::with_capacity(cutoff);
    let mut c = C64::new(1.0, 0.0);
    for n in 0..cutoff {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    StateVector::from_amplitudes(&[cutoff], amps)?.renormalized()
}

pub fn fock(n: usize, cutoff: usize) -> Result<StateVector> {
    if n >= cutoff {
        return Err(Error::FockExceedsCutoff { index: n, cutoff });
    }
    StateVector::basis(&[cutoff], &[n])
}

/// Fock state when requested, otherwise the coherent state `minit`.
pub fn mode_init(p: &ParsMode) -> Result<StateVector> {
    match p.minit_fock {
        Some(n) => fock(n, p.cutoff),
        None => coherent(p.minit, p.cutoff),
    }
}

pub fn state0() -> StateVector {
    StateVector::basis(&[2], &[0]).expect("valid qbit basis state")
}

pub fn state1() -> StateVector {
    StateVector::basis(&[2], &[1]).expect("valid qbit basis state")
}

pub fn qbit_init(p: &ParsQbit) -> Result<StateVector> {
    StateVector::from_amplitudes(&[2], vec![p.init.0, p.init.1])?.renormalized()
}

fn single_leg_freqs(element: &dyn Element, what: &str) -> Result<(usize, Option<Vec<C64>>)> {
    let dims = &element.layout().leg_dims;
    if dims.len() != 1 {
        return Err(Error::LegDimensionMismatch(format!(
            "{what} must be a single-leg free, got {} legs",
            dims.len()
        )));
    }
    let freqs = element
        .exact()
        .map(|e| e.propagator().frequencies())
        .filter(|f| f.iter().any(|w| *w != ZERO));
    Ok((dims[0], freqs))
}

fn dressed(op: Tridiagonal, freqs: &Option<Vec<C64>>) -> Result<Tridiagonal> {
    match freqs {
        Some(f) => op.with_freqs(f.clone()),
        None => Ok(op),
    }
}

/// Two-leg qbit–mode exchange coupling.
pub struct JaynesCummings {
    layout: SystemLayout,
    g: C64,
    hamiltonian: TermHamiltonian,
    constituents: [Arc<dyn Element>; 2],
}

impl fmt::Debug for JaynesCummings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JaynesCummings")
            .field("dims", &self.layout.leg_dims)
            .field("g", &self.g)
            .finish()
    }
}

impl JaynesCummings {
    /// `qbit` must have dimension 2; frequencies for dressing come from the
    /// constituents' propagators.
    pub fn new(qbit: Arc<dyn Element>, mode: Arc<dyn Element>, g: C64) -> Result<Self> {
        let (qdim, qf) = single_leg_freqs(qbit.as_ref(), "Jaynes-Cummings qbit")?;
        let (mdim, mf) = single_leg_freqs(mode.as_ref(), "Jaynes-Cummings mode")?;
        if qdim != 2 {
            return Err(Error::LegDimensionMismatch(format!(
                "Jaynes-Cummings qbit has dimension {qdim}"
            )));
        }
        let sigma = Tridiagonal::annihilation(2);
        let a = Tridiagonal::annihilation(mdim);
        let raise = ProductTerm::new(
            I * g.conj(),
            vec![
                (0, dressed(sigma.adjoint(), &qf)?),
                (1, dressed(a.clone(), &mf)?),
            ],
        )?;
        let lower = ProductTerm::new(
            -I * g,
            vec![(0, dressed(sigma, &qf)?), (1, dressed(a.adjoint(), &mf)?)],
        )?;
        Ok(JaynesCummings {
            layout: SystemLayout::new("JaynesCummings", vec![2, mdim])?,
            g,
            hamiltonian: TermHamiltonian::new(vec![raise, lower]),
            constituents: [qbit, mode],
        })
    }

    pub fn coupling(&self) -> C64 {
        self.g
    }
}

impl Element for JaynesCummings {
    fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    fn variant(&self) -> &str {
        "JaynesCummings"
    }

    fn hamiltonian(&self) -> Option<&dyn Hamiltonian> {
        Some(&self.hamiltonian)
    }

    fn constituents(&self) -> &[Arc<dyn Element>] {
        &self.constituents
    }
}

/// `H = c·(a₀⊗a₁⊗a₂) + h.c.` with `aₖ` the lowering operator of leg `k`.
pub struct TernaryCoupling {
    layout: SystemLayout,
    coupling: C64,
    hamiltonian: TermHamiltonian,
    constituents: [Arc<dyn Element>; 3],
}

impl fmt::Debug for TernaryCoupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TernaryCoupling")
            .field("dims", &self.layout.leg_dims)
            .field("coupling", &self.coupling)
            .finish()
    }
}

impl TernaryCoupling {
    pub fn new(
        f0: Arc<dyn Element>,
        f1: Arc<dyn Element>,
        f2: Arc<dyn Element>,
        coupling: C64,
    ) -> Result<Self> {
        let mut dims = Vec::with_capacity(3);
        let mut lowering = Vec::with_capacity(3);
        let mut raising = Vec::with_capacity(3);
        for (leg, f) in [&f0, &f1, &f2].into_iter().enumerate() {
            let (dim, freqs) = single_leg_freqs(f.as_ref(), "ternary coupling leg")?;
            if dim < 2 {
                return Err(Error::LegDimensionMismatch(format!(
                    "ternary coupling leg {leg} has dimension {dim}"
                )));
            }
            let a = Tridiagonal::annihilation(dim);
            raising.push((leg, dressed(a.adjoint(), &freqs)?));
            lowering.push((leg, dressed(a, &freqs)?));
            dims.push(dim);
        }
        let down = ProductTerm::new(coupling, lowering)?;
        let up = ProductTerm::new(coupling.conj(), raising)?;
        Ok(TernaryCoupling {
            layout: SystemLayout::new("TernaryCoupling", dims)?,
            coupling,
            hamiltonian: TermHamiltonian::new(vec![down, up]),
            constituents: [f0, f1, f2],
        })
    }

    pub fn coupling(&self) -> C64 {
        self.coupling
    }
}

impl Element for TernaryCoupling {
    fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    fn variant(&self) -> &str {
        "TernaryCoupling"
    }

    fn hamiltonian(&self) -> Option<&dyn Hamiltonian> {
        Some(&self.hamiltonian)
    }

    fn constituents(&self) -> &[Arc<dyn Element>] {
        &self.constituents
    }
}
