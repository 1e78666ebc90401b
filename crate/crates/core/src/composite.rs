//! Assembly of frees and interactions into a simulable system.
//!
//! Frees are declared in a row and occupy state legs `0..N` in that order.
//! Each [`Act`] wires the legs of one interaction to free ordinals; leg `k`
//! of the interaction acts on free `legs[k]`. The same element instance may
//! appear in any number of frees and acts.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::qdata::{strides, DensityOperator, PartySelector, StateVector, MAX_RANK};
use crate::qop::{check_same_dims, DiagonalPropagator, Direction};
use crate::structure::{add_contribution_mapped, DisplayKey, Element, JumpChannel};
use crate::{Error, Result};

/// An interaction together with the free ordinals its legs act on.
#[derive(Clone)]
pub struct Act {
    legs: Vec<usize>,
    interaction: Arc<dyn Element>,
}

impl Act {
    pub fn new(legs: &[usize], interaction: Arc<dyn Element>) -> Self {
        Act {
            legs: legs.to_vec(),
            interaction,
        }
    }

    pub fn legs(&self) -> &[usize] {
        &self.legs
    }

    pub fn interaction(&self) -> &Arc<dyn Element> {
        &self.interaction
    }
}

impl fmt::Debug for Act {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Act{:?}({})", self.legs, self.interaction.variant())
    }
}

/// An element placed on concrete state legs.
#[derive(Clone, Debug)]
pub(crate) struct Placed {
    pub element: Arc<dyn Element>,
    pub leg_map: Vec<usize>,
    pub label: String,
}

/// A jump channel placed on concrete state legs.
#[derive(Clone, Debug)]
pub(crate) struct PlacedChannel {
    pub part: usize,
    pub channel: usize,
    pub free: Option<usize>,
    pub label: String,
}

/// A jump channel of the composite with its current rate.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpInfo {
    pub index: usize,
    pub free: Option<usize>,
    pub label: String,
    pub rate: f64,
}

/// Validated wiring of frees and interactions.
#[derive(Clone, Debug)]
pub struct Composite {
    dims: Vec<usize>,
    acts: Vec<Act>,
    /// Frees first (ordinal order), then acts.
    parts: Vec<Placed>,
    channels: Vec<PlacedChannel>,
    propagators: Vec<DiagonalPropagator>,
}

impl Composite {
    /// Validates the layout. Errors name the offending act and leg.
    pub fn new(frees: Vec<Arc<dyn Element>>, acts: Vec<Act>) -> Result<Self> {
        if frees.is_empty() {
            return Err(Error::Layout("no frees declared".into()));
        }
        let mut dims = Vec::with_capacity(frees.len());
        for (k, f) in frees.iter().enumerate() {
            let layout = f.layout();
            if layout.arity() != 1 {
                return Err(Error::Layout(format!(
                    "free #{k} ({}) has {} legs; frees must have exactly one",
                    f.variant(),
                    layout.arity()
                )));
            }
            dims.push(layout.leg_dims[0]);
        }
        if dims.len() > MAX_RANK {
            return Err(Error::Layout(format!(
                "{} frees exceed the maximal rank {}",
                dims.len(),
                MAX_RANK
            )));
        }

        let mut referenced = vec![false; frees.len()];
        for (a, act) in acts.iter().enumerate() {
            let layout = act.interaction.layout();
            if act.legs.len() != layout.arity() {
                return Err(Error::ArityMismatch {
                    act: a,
                    expected: layout.arity(),
                    found: act.legs.len(),
                });
            }
            if act.legs.len() < 2 {
                return Err(Error::Layout(format!(
                    "act #{a} has {} leg; interactions need at least two",
                    act.legs.len()
                )));
            }
            for (j, &ordinal) in act.legs.iter().enumerate() {
                if ordinal >= frees.len() {
                    return Err(Error::OrdinalOutOfRange {
                        act: a,
                        ordinal,
                        count: frees.len(),
                    });
                }
                if act.legs[..j].contains(&ordinal) {
                    return Err(Error::DuplicateLeg { act: a, ordinal });
                }
            }
            for (j, &ordinal) in act.legs.iter().enumerate() {
                if layout.leg_dims[j] != dims[ordinal] {
                    return Err(Error::LayoutMismatch {
                        act: a,
                        leg: j,
                        free: ordinal,
                        expected: layout.leg_dims[j],
                        found: dims[ordinal],
                    });
                }
                referenced[ordinal] = true;
            }
            if act.interaction.exact().is_some() {
                return Err(Error::Layout(format!(
                    "act #{a}: interactions cannot carry an exact propagator"
                )));
            }
        }
        if frees.len() >= 2 {
            if let Some(k) = referenced.iter().position(|r| !r) {
                return Err(Error::UnreferencedFree(k));
            }
        }

        let mut parts: Vec<Placed> = frees
            .iter()
            .enumerate()
            .map(|(k, f)| Placed {
                element: f.clone(),
                leg_map: vec![k],
                label: format!("{} #{k}", f.variant()),
            })
            .collect();
        parts.extend(acts.iter().map(|act| Placed {
            element: act.interaction.clone(),
            leg_map: act.legs.clone(),
            label: format!("{}{:?}", act.interaction.variant(), act.legs),
        }));

        let mut channels = Vec::new();
        for (p, part) in parts.iter().enumerate() {
            if let Some(l) = part.element.liouvillean() {
                for (c, ch) in l.channels().iter().enumerate() {
                    channels.push(PlacedChannel {
                        part: p,
                        channel: c,
                        free: (p < frees.len()).then_some(p),
                        label: format!("{}: {}", part.label, ch.label()),
                    });
                }
            }
        }

        let propagators = frees
            .iter()
            .enumerate()
            .filter_map(|(k, f)| f.exact().map(|e| e.propagator().on_leg(k)))
            .collect();

        Ok(Composite {
            dims,
            acts,
            parts,
            channels,
            propagators,
        })
    }

    /// A system consisting of one free.
    pub fn single(free: Arc<dyn Element>) -> Result<Self> {
        Self::new(vec![free], Vec::new())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn free_count(&self) -> usize {
        self.dims.len()
    }

    pub fn free(&self, ordinal: usize) -> &Arc<dyn Element> {
        &self.parts[ordinal].element
    }

    pub fn acts(&self) -> &[Act] {
        &self.acts
    }

    pub(crate) fn channel(&self, index: usize) -> (&JumpChannel, &[usize]) {
        let pc = &self.channels[index];
        let part = &self.parts[pc.part];
        let ch = &part
            .element
            .liouvillean()
            .expect("placed channels come from a Liouvillean")
            .channels()[pc.channel];
        (ch, &part.leg_map)
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channel_labels(&self) -> Vec<String> {
        self.channels.iter().map(|c| c.label.clone()).collect()
    }

    pub fn propagators(&self) -> &[DiagonalPropagator] {
        &self.propagators
    }

    /// True when every exact propagator is unitary (or there are none).
    pub fn is_unitary(&self) -> bool {
        self.propagators.iter().all(|p| p.is_unitary())
    }

    pub(crate) fn check_state(&self, dims: &[usize]) -> Result<()> {
        if dims != self.dims.as_slice() {
            return Err(Error::StateSystemMismatch {
                state: dims.to_vec(),
                system: self.dims.clone(),
            });
        }
        Ok(())
    }

    /// `acc += −i·H(t)·input` on a raw buffer over `tensor_dims`, with the
    /// system's legs starting at `leg_offset`. Unchecked.
    pub(crate) fn add_hamiltonian_raw(
        &self,
        t: f64,
        tensor_dims: &[usize],
        leg_offset: usize,
        input: &[C64],
        acc: &mut [C64],
    ) {
        let mut map = Vec::new();
        for part in &self.parts {
            map.clear();
            map.extend(part.leg_map.iter().map(|l| l + leg_offset));
            add_contribution_mapped(part.element.as_ref(), t, &map, tensor_dims, input, acc);
        }
    }

    /// `dψdt += −i·H(t)·ψ`, summed over frees and acts.
    pub fn add_hamiltonian(&self, t: f64, psi: &StateVector, dpsidt: &mut StateVector) -> Result<()> {
        self.check_state(psi.dims())?;
        check_same_dims(psi.dims(), dpsidt.dims())?;
        self.add_hamiltonian_raw(t, &self.dims, 0, psi.amplitudes(), dpsidt.amplitudes_mut());
        Ok(())
    }

    /// Channels in free order, then act order, each in element order.
    pub fn jumps(&self, psi: &StateVector) -> Result<Vec<JumpInfo>> {
        self.check_state(psi.dims())?;
        Ok(self
            .channels
            .iter()
            .enumerate()
            .map(|(i, pc)| {
                let (ch, map) = self.channel(i);
                JumpInfo {
                    index: i,
                    free: pc.free,
                    label: pc.label.clone(),
                    rate: ch.rate_mapped(map, psi),
                }
            })
            .collect())
    }

    /// Rates only, in channel order.
    pub(crate) fn rates_into(&self, psi: &StateVector, out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.channels.len()).map(|i| {
            let (ch, map) = self.channel(i);
            ch.rate_mapped(map, psi)
        }));
    }

    /// `J_m ψ`, not renormalized.
    pub fn apply_jump(&self, index: usize, psi: &StateVector) -> Result<StateVector> {
        self.check_state(psi.dims())?;
        if index >= self.channels.len() {
            return Err(Error::InvalidOperator(format!(
                "jump channel {index} of {}",
                self.channels.len()
            )));
        }
        let (ch, map) = self.channel(index);
        Ok(ch.apply_mapped(map, psi))
    }

    /// Applies every free's exact propagator over time `t`.
    pub fn apply_propagators(&self, t: f64, psi: &mut StateVector, direction: Direction) -> Result<()> {
        self.check_state(psi.dims())?;
        let (dims, data) = psi.split_mut();
        for p in &self.propagators {
            p.apply_raw(dims, p.leg(), data, t, direction, false);
        }
        Ok(())
    }

    /// `U ρ U†` (forward) or `U⁻¹ ρ U⁻¹†` (backward).
    pub fn apply_propagators_density(
        &self,
        t: f64,
        rho: &mut DensityOperator,
        direction: Direction,
    ) -> Result<()> {
        self.check_state(rho.dims())?;
        let r = self.rank();
        // ket legs then bra legs, on the stack to keep this allocation-free
        let mut buf = [0usize; 2 * MAX_RANK];
        buf[..r].copy_from_slice(&self.dims);
        buf[r..2 * r].copy_from_slice(&self.dims);
        let tensor = &buf[..2 * r];
        let data = rho.elements_mut();
        for p in &self.propagators {
            p.apply_raw(tensor, p.leg(), data, t, direction, false);
            p.apply_raw(tensor, p.leg() + r, data, t, direction, true);
        }
        Ok(())
    }

    /// One key per displayed part: frees in order, then acts with a
    /// non-empty key.
    pub fn display_key(&self) -> Vec<(String, DisplayKey)> {
        self.parts
            .iter()
            .map(|p| (p.label.clone(), crate::structure::display_key(p.element.as_ref())))
            .enumerate()
            .filter(|(i, (_, k))| *i < self.free_count() || !k.is_empty())
            .map(|(_, x)| x)
            .collect()
    }

    fn displayed_parts(&self) -> impl Iterator<Item = &Placed> {
        let n = self.free_count();
        self.parts.iter().enumerate().filter_map(move |(i, p)| {
            (i < n || p.element.averaged().is_some()).then_some(p)
        })
    }

    /// Per-part averages from the reduced, trace-normalized state.
    pub fn display_pure(&self, psi: &StateVector) -> Result<Vec<Vec<f64>>> {
        self.check_state(psi.dims())?;
        self.displayed_parts()
            .map(|p| {
                let rho = if p.leg_map.len() == self.rank() {
                    reorder(psi.dyad(), &p.leg_map)
                } else {
                    reorder(psi.reduced(&selector(&p.leg_map, self.rank())?)?, &p.leg_map)
                };
                crate::structure::average(p.element.as_ref(), &rho)
            })
            .collect()
    }

    pub fn display_density(&self, rho: &DensityOperator) -> Result<Vec<Vec<f64>>> {
        self.check_state(rho.dims())?;
        self.displayed_parts()
            .map(|p| {
                let reduced = if p.leg_map.len() == self.rank() {
                    reorder(rho.clone(), &p.leg_map)
                } else {
                    reorder(rho.partial_trace(&selector(&p.leg_map, self.rank())?)?, &p.leg_map)
                };
                crate::structure::average(p.element.as_ref(), &reduced)
            })
            .collect()
    }

    /// Party of state legs for the given free ordinals.
    pub fn party(&self, free_ordinals: &[usize]) -> Result<PartySelector> {
        PartySelector::new(free_ordinals, self.rank())
    }
}

fn selector(legs: &[usize], rank: usize) -> Result<PartySelector> {
    let mut sorted = legs.to_vec();
    sorted.sort_unstable();
    PartySelector::new(&sorted, rank)
}

/// Reorders the legs of a reduced operator (kept in ascending order) into
/// the order given by `legs`.
fn reorder(rho: DensityOperator, legs: &[usize]) -> DensityOperator {
    let mut sorted = legs.to_vec();
    sorted.sort_unstable();
    if sorted == legs {
        return rho;
    }
    // position in the ascending operator of each requested leg
    let perm: Vec<usize> = legs
        .iter()
        .map(|l| sorted.iter().position(|s| s == l).expect("same leg set"))
        .collect();
    let src_dims = rho.dims().to_vec();
    let dst_dims: Vec<usize> = perm.iter().map(|&p| src_dims[p]).collect();
    let src_st = strides(&src_dims);
    let n = rho.dim();
    let map: Vec<usize> = (0..n)
        .map(|flat| {
            let mut rem = flat;
            let mut src = 0;
            for (k, &d) in dst_dims.iter().enumerate().rev() {
                src += (rem % d) * src_st[perm[k]];
                rem /= d;
            }
            src
        })
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = rho.at(map[i], map[j]);
        }
    }
    DensityOperator::from_matrix(&dst_dims, out).expect("permuted dims are valid")
}

/// Binary system whose frees are the interaction's two constituents.
pub fn make_binary(interaction: Arc<dyn Element>) -> Result<Composite> {
    let arity = interaction.layout().arity();
    if arity != 2 {
        return Err(Error::ArityMismatch {
            act: 0,
            expected: 2,
            found: arity,
        });
    }
    let frees = interaction.constituents().to_vec();
    if frees.len() != 2 {
        return Err(Error::Layout(format!(
            "binary interaction {} does not know its constituents",
            interaction.variant()
        )));
    }
    Composite::new(frees, vec![Act::new(&[0, 1], interaction)])
}

/// General composite over an explicit row of frees.
pub fn make_composite(frees: Vec<Arc<dyn Element>>, acts: Vec<Act>) -> Result<Composite> {
    Composite::new(frees, acts)
}
