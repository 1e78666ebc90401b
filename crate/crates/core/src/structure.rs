//! Role contracts implemented by elements.
//!
//! An element exposes up to four independent roles: a Hamiltonian part
//! (evolved by the ODE), jump channels, an exact diagonal propagator, and
//! averaged quantities for display. A missing role is `None`, not an empty
//! implementation, so that e.g. a lossless mode never has its jump channels
//! consulted.
//!
//! All operator data is expressed on the element's local legs. The
//! framework maps local leg `l` onto a state leg via a `leg_map`.

use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::qdata::{DensityOperator, StateVector};
use crate::qop::{check_same_dims, DiagonalPropagator, ProductTerm};
use crate::{Error, Result};

const MINUS_I: C64 = C64 { re: 0.0, im: -1.0 };

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemLayout {
    pub leg_dims: Vec<usize>,
    pub label: String,
}

impl SystemLayout {
    pub fn new(label: impl Into<String>, leg_dims: Vec<usize>) -> Result<Self> {
        if leg_dims.is_empty() || leg_dims.contains(&0) {
            return Err(Error::InvalidDims(format!("element dims {leg_dims:?}")));
        }
        Ok(SystemLayout {
            leg_dims,
            label: label.into(),
        })
    }

    pub fn arity(&self) -> usize {
        self.leg_dims.len()
    }
}

/// Column labels contributed by one element, in display order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DisplayKey {
    pub labels: Vec<String>,
}

impl DisplayKey {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        DisplayKey {
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// A quantum jump `ψ → Jψ`; its rate is `‖Jψ‖² / ‖ψ‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpChannel {
    label: String,
    operator: ProductTerm,
    conjugate: ProductTerm,
}

impl JumpChannel {
    pub fn new(label: impl Into<String>, operator: ProductTerm) -> Self {
        let conjugate = operator.conj();
        JumpChannel {
            label: label.into(),
            operator,
            conjugate,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn operator(&self) -> &ProductTerm {
        &self.operator
    }

    /// Entrywise conjugate of the jump operator, for bra legs.
    pub(crate) fn conjugate(&self) -> &ProductTerm {
        &self.conjugate
    }

    /// `Jψ` with `J` mapped onto the legs of `psi`. Unchecked.
    pub(crate) fn apply_mapped(&self, leg_map: &[usize], psi: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(psi.dims()).expect("dims of an existing state");
        self.operator.apply_mapped_raw(
            0.0,
            leg_map,
            psi.dims(),
            psi.amplitudes(),
            out.amplitudes_mut(),
            C64::new(1.0, 0.0),
        );
        out
    }

    pub(crate) fn rate_mapped(&self, leg_map: &[usize], psi: &StateVector) -> f64 {
        let n2 = psi.norm_sqr();
        if n2 == 0.0 {
            return 0.0;
        }
        self.apply_mapped(leg_map, psi).norm_sqr() / n2
    }

    /// `Jψ` on a state consisting of this element's legs only.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        let identity: Vec<usize> = (0..psi.rank()).collect();
        self.operator.check_mapped(&identity, psi.dims())?;
        Ok(self.apply_mapped(&identity, psi))
    }
}

/// Non-Hermitian Hamiltonian part handled by the ODE, as a sum of product
/// terms on local legs. Terms carrying frequencies are dressed at the time
/// elapsed since the interaction picture was last re-based.
pub trait Hamiltonian: Send + Sync + Debug {
    fn terms(&self) -> &[ProductTerm];
}

pub trait Liouvillean: Send + Sync + Debug {
    fn channels(&self) -> &[JumpChannel];
}

pub trait Exact: Send + Sync + Debug {
    /// Propagator for local leg 0.
    fn propagator(&self) -> &DiagonalPropagator;
}

pub trait Averaged: Send + Sync + Debug {
    fn key(&self) -> DisplayKey;
    /// Averages of a unit-trace density operator over the element's legs.
    fn average(&self, rho: &DensityOperator) -> Vec<f64>;
}

/// A free subsystem or an interaction.
pub trait Element: Send + Sync + Debug {
    fn layout(&self) -> &SystemLayout;

    /// Name of the concrete variant, e.g. `PumpedLossyModeUIP`.
    fn variant(&self) -> &str;

    fn hamiltonian(&self) -> Option<&dyn Hamiltonian> {
        None
    }

    fn liouvillean(&self) -> Option<&dyn Liouvillean> {
        None
    }

    fn exact(&self) -> Option<&dyn Exact> {
        None
    }

    fn averaged(&self) -> Option<&dyn Averaged> {
        None
    }

    /// For interactions: the frees each leg was built from, in leg order.
    fn constituents(&self) -> &[Arc<dyn Element>] {
        &[]
    }
}

/// Simple term list implementing [`Hamiltonian`].
#[derive(Clone, Debug, PartialEq)]
pub struct TermHamiltonian {
    terms: Vec<ProductTerm>,
}

impl TermHamiltonian {
    pub fn new(terms: Vec<ProductTerm>) -> Self {
        TermHamiltonian { terms }
    }
}

impl Hamiltonian for TermHamiltonian {
    fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpSet {
    channels: Vec<JumpChannel>,
}

impl JumpSet {
    pub fn new(channels: Vec<JumpChannel>) -> Self {
        JumpSet { channels }
    }
}

impl Liouvillean for JumpSet {
    fn channels(&self) -> &[JumpChannel] {
        &self.channels
    }
}

impl Exact for DiagonalPropagator {
    fn propagator(&self) -> &DiagonalPropagator {
        self
    }
}

pub(crate) fn check_element_on(element: &dyn Element, leg_map: &[usize], dims: &[usize]) -> Result<()> {
    let layout = element.layout();
    if leg_map.len() != layout.arity() {
        return Err(Error::LegDimensionMismatch(format!(
            "{} has {} legs, {} mapped",
            layout.label,
            layout.arity(),
            leg_map.len()
        )));
    }
    for (local, &target) in leg_map.iter().enumerate() {
        if dims.get(target) != Some(&layout.leg_dims[local]) {
            return Err(Error::LegDimensionMismatch(format!(
                "{} leg {local} (dimension {}) mapped to state leg {target} of {dims:?}",
                layout.label, layout.leg_dims[local]
            )));
        }
    }
    Ok(())
}

/// `dψdt += −i·H(t)·ψ` for the element's Hamiltonian part on mapped legs.
pub(crate) fn add_contribution_mapped(
    element: &dyn Element,
    t: f64,
    leg_map: &[usize],
    dims: &[usize],
    psi: &[C64],
    dpsidt: &mut [C64],
) {
    if let Some(h) = element.hamiltonian() {
        for term in h.terms() {
            term.apply_mapped_raw(t, leg_map, dims, psi, dpsidt, MINUS_I);
        }
    }
}

fn own_legs(element: &dyn Element) -> Vec<usize> {
    (0..element.layout().arity()).collect()
}

/// `dψdt += −i·H_nh(t)·ψ` where `psi` spans exactly the element's legs.
pub fn add_hamiltonian_contribution(
    element: &dyn Element,
    t: f64,
    psi: &StateVector,
    dpsidt: &mut StateVector,
) -> Result<()> {
    check_same_dims(psi.dims(), dpsidt.dims())?;
    let legs = own_legs(element);
    check_element_on(element, &legs, psi.dims())?;
    let dims = psi.dims().to_vec();
    add_contribution_mapped(element, t, &legs, &dims, psi.amplitudes(), dpsidt.amplitudes_mut());
    Ok(())
}

/// Jump channels with their current rates; empty for lossless elements.
pub fn jump_channels<'a>(
    element: &'a dyn Element,
    psi: &StateVector,
) -> Result<Vec<(f64, &'a JumpChannel)>> {
    let legs = own_legs(element);
    check_element_on(element, &legs, psi.dims())?;
    Ok(element
        .liouvillean()
        .map(|l| {
            l.channels()
                .iter()
                .map(|ch| (ch.rate_mapped(&legs, psi), ch))
                .collect()
        })
        .unwrap_or_default())
}

pub fn exact_propagator(element: &dyn Element) -> Option<&DiagonalPropagator> {
    element.exact().map(|e| e.propagator())
}

/// Display key of an element; empty if it has no averages.
pub fn display_key(element: &dyn Element) -> DisplayKey {
    element.averaged().map(|a| a.key()).unwrap_or_default()
}

/// Averages from a density operator over the element's legs, normalized by
/// its trace first.
pub fn average(element: &dyn Element, rho: &DensityOperator) -> Result<Vec<f64>> {
    if rho.dims() != element.layout().leg_dims.as_slice() {
        return Err(Error::LegDimensionMismatch(format!(
            "density operator over {:?} for {} with {:?}",
            rho.dims(),
            element.layout().label,
            element.layout().leg_dims
        )));
    }
    match element.averaged() {
        None => Ok(Vec::new()),
        Some(a) => Ok(a.average(&rho.clone().normalized()?)),
    }
}

/// Averages from a pure state, `⟨ψ|A|ψ⟩/⟨ψ|ψ⟩`.
pub fn average_pure(element: &dyn Element, psi: &StateVector) -> Result<Vec<f64>> {
    average(element, &psi.dyad())
}
