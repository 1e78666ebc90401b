//! Time evolution: single quantum trajectories, the master equation and
//! trajectory ensembles, with the two display disciplines.
//!
//! Between steps every state is kept in the Schrödinger picture. A step
//! from `t` integrates the interaction-picture equation with operators
//! dressed at `τ − t` and then applies the exact propagators over the step,
//! which re-bases the interaction picture at every step. Displays therefore
//! need no transformation.

mod ensemble;
mod master;
mod mcwf;
pub mod ode;

use num_complex::Complex64 as C64;

use crate::cli::{Handle, ParameterTable, TokenParam};
use crate::composite::Composite;
use crate::qdata::{DensityOperator, PartySelector, StateVector};
use crate::trajio::{DisplayRow, RowSink};
use crate::{Error, Result};

pub use ensemble::{ensemble_run, ensemble_traces, EnsembleTraces};
pub use master::{master_derivative, MasterTrajectory};
pub use mcwf::McwfTrajectory;
pub use ode::{ode_step, OdeStep, OdeStepper};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EvolutionMode {
    Single,
    Ensemble,
    Master,
}

impl TokenParam for EvolutionMode {
    const CHOICES: &'static [&'static str] = &["single", "ensemble", "master"];

    fn token(self) -> &'static str {
        match self {
            EvolutionMode::Single => "single",
            EvolutionMode::Ensemble => "ensemble",
            EvolutionMode::Master => "master",
        }
    }

    fn from_token(token: &str) -> Option<Self> {
        match token {
            "single" => Some(EvolutionMode::Single),
            "ensemble" => Some(EvolutionMode::Ensemble),
            "master" => Some(EvolutionMode::Master),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsEvolution {
    pub evol: EvolutionMode,
    pub t_final: f64,
    pub dt_display: f64,
    pub dc: u64,
    pub eps: f64,
    pub eps_abs: f64,
    pub dp_limit: f64,
    pub seed: u64,
    pub n_traj: usize,
    /// Free ordinals forming one party.
    pub negativity_party: Option<Vec<usize>>,
}

impl Default for ParsEvolution {
    fn default() -> Self {
        ParsEvolution {
            evol: EvolutionMode::Single,
            t_final: 1.0,
            dt_display: 0.1,
            dc: 0,
            eps: 1e-6,
            eps_abs: 1e-12,
            dp_limit: 0.01,
            seed: 1001,
            n_traj: 100,
            negativity_party: None,
        }
    }
}

impl ParsEvolution {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("T must be finite and non-negative, got {}", self.t_final));
        }
        if !(self.dt_display >= 0.0 && self.dt_display.is_finite()) {
            return bad(format!("Dt must be finite and non-negative, got {}", self.dt_display));
        }
        if self.dc == 0 && self.dt_display == 0.0 {
            return bad("dc and Dt cannot both be zero".into());
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.eps_abs >= 0.0) {
            return bad(format!("epsAbs must be non-negative, got {}", self.eps_abs));
        }
        if !(self.dp_limit > 0.0 && self.dp_limit < 1.0) {
            return bad(format!("dpLimit must lie in (0,1), got {}", self.dp_limit));
        }
        if self.n_traj == 0 {
            return bad("nTraj must be at least 1".into());
        }
        Ok(())
    }

    /// First stepsize tried by a fresh trajectory. Depends on `Dt` only
    /// when `Dt` governs the display.
    pub fn initial_dt(&self) -> f64 {
        let scale = if self.dc == 0 && self.dt_display > 0.0 {
            self.dt_display
        } else {
            self.t_final
        };
        if scale > 0.0 {
            0.1 * scale
        } else {
            1e-3
        }
    }

    /// Stepsizes below this are treated as a stalled stepper.
    pub fn min_dt(&self) -> f64 {
        (1e-12 * self.t_final).max(f64::MIN_POSITIVE)
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionParams {
    pub evol: Handle<EvolutionMode>,
    pub t_final: Handle<f64>,
    pub dt_display: Handle<f64>,
    pub dc: Handle<u64>,
    pub eps: Handle<f64>,
    pub eps_abs: Handle<f64>,
    pub dp_limit: Handle<f64>,
    pub seed: Handle<u64>,
    pub n_traj: Handle<usize>,
    pub negativity_party: Handle<String>,
}

impl EvolutionParams {
    pub fn register(table: &mut ParameterTable) -> Result<Self> {
        let d = ParsEvolution::default();
        Ok(EvolutionParams {
            evol: table.add("evol", "Evolution method", d.evol, None)?,
            t_final: table.add("T", "Simulated time", d.t_final, None)?,
            dt_display: table.add("Dt", "Time between displays (used when dc is 0)", d.dt_display, None)?,
            dc: table.add("dc", "Adaptive steps between displays (0: display every Dt)", d.dc, None)?,
            eps: table.add("eps", "Relative ODE tolerance", d.eps, None)?,
            eps_abs: table.add("epsAbs", "Absolute ODE tolerance", d.eps_abs, None)?,
            dp_limit: table.add("dpLimit", "Maximal total jump probability per step", d.dp_limit, None)?,
            seed: table.add("seed", "Random seed (ensemble members use seed, seed+1, ...)", d.seed, None)?,
            n_traj: table.add("nTraj", "Number of trajectories in an ensemble", d.n_traj, None)?,
            negativity_party: table.add(
                "negativityParty",
                "Free ordinals of one party for the negativity column, e.g. 0 or 1,2",
                String::new(),
                None,
            )?,
        })
    }

    pub fn read(&self, table: &ParameterTable) -> Result<ParsEvolution> {
        let party_text: String = table.get(&self.negativity_party);
        Ok(ParsEvolution {
            evol: table.get(&self.evol),
            t_final: table.get(&self.t_final),
            dt_display: table.get(&self.dt_display),
            dc: table.get(&self.dc),
            eps: table.get(&self.eps),
            eps_abs: table.get(&self.eps_abs),
            dp_limit: table.get(&self.dp_limit),
            seed: table.get(&self.seed),
            n_traj: table.get(&self.n_traj),
            negativity_party: parse_party(&party_text)?,
        })
    }
}

/// `""` → none; `"1,2"` → ordinals 1 and 2.
pub fn parse_party(text: &str) -> Result<Option<Vec<usize>>> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(None);
    }
    t.split(',')
        .map(|s| {
            s.trim().parse::<usize>().map_err(|_| Error::BadValue {
                token: text.to_string(),
                expected: "comma-separated free ordinals".into(),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(StateVector),
    Mixed(DensityOperator),
}

/// Everything needed to continue a trajectory bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryState {
    pub t: f64,
    pub state: QuantumState,
    /// Serialized random-number generator; empty for the master equation.
    pub rng: Vec<u8>,
    pub dt_next: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub dt_did: f64,
    /// `r − dp`; negative iff a jump happened. `None` for the master equation.
    pub jump_proximity: Option<f64>,
    /// Channel index of the jump, if one happened.
    pub jump: Option<usize>,
}

/// A trajectory that can be advanced step by step and displayed.
pub trait Trajectory {
    fn time(&self) -> f64;
    fn dt_next(&self) -> f64;
    /// One adaptive step that never passes `target`; when the remaining
    /// interval is taken in full, the time lands on `target` exactly.
    fn step(&mut self, target: f64) -> Result<StepReport>;
    fn display(&self) -> Result<Vec<Vec<f64>>>;
    fn tracks_jumps(&self) -> bool;
    fn density(&self) -> Option<&DensityOperator>;
    fn pure(&self) -> Option<&StateVector>;
    fn snapshot(&self) -> TrajectoryState;
}

/// Display-time summary passed to observers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisplayInfo {
    pub dt_did: f64,
    /// Minimum of `r − dp` over the steps since the previous display.
    pub jump_proximity: Option<f64>,
}

fn merge_proximity(acc: Option<f64>, step: Option<f64>) -> Option<f64> {
    match (acc, step) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

fn initial_info(traj: &dyn Trajectory) -> DisplayInfo {
    DisplayInfo {
        dt_did: traj.dt_next(),
        jump_proximity: traj.tracks_jumps().then_some(1.0),
    }
}

/// Displays at `t = k·Dt` (and at `T`), landing on each display time.
pub fn drive_dt(
    traj: &mut dyn Trajectory,
    t_final: f64,
    dt_display: f64,
    emit_initial: bool,
    on_display: &mut dyn FnMut(&dyn Trajectory, DisplayInfo) -> Result<()>,
) -> Result<()> {
    assert!(dt_display > 0.0, "display interval must be positive");
    if emit_initial {
        on_display(&*traj, initial_info(traj))?;
    }
    let mut k = (traj.time() / dt_display + 1e-9).floor() as u64 + 1;
    while traj.time() < t_final {
        let target = (k as f64 * dt_display).min(t_final);
        k += 1;
        if target <= traj.time() {
            continue;
        }
        let mut info = DisplayInfo {
            dt_did: 0.0,
            jump_proximity: None,
        };
        while traj.time() < target {
            let rep = traj.step(target)?;
            info.dt_did = rep.dt_did;
            info.jump_proximity = merge_proximity(info.jump_proximity, rep.jump_proximity);
        }
        on_display(&*traj, info)?;
    }
    Ok(())
}

/// Displays after every `dc` adaptive steps and once more at `T`.
pub fn drive_dc(
    traj: &mut dyn Trajectory,
    t_final: f64,
    dc: u64,
    emit_initial: bool,
    on_display: &mut dyn FnMut(&dyn Trajectory, DisplayInfo) -> Result<()>,
) -> Result<()> {
    assert!(dc >= 1, "dc must be at least 1");
    if emit_initial {
        on_display(&*traj, initial_info(traj))?;
    }
    let mut since = 0;
    let mut info = DisplayInfo {
        dt_did: 0.0,
        jump_proximity: None,
    };
    while traj.time() < t_final {
        let rep = traj.step(t_final)?;
        since += 1;
        info.dt_did = rep.dt_did;
        info.jump_proximity = merge_proximity(info.jump_proximity, rep.jump_proximity);
        if since == dc || traj.time() >= t_final {
            on_display(&*traj, info)?;
            since = 0;
            info.jump_proximity = None;
        }
    }
    Ok(())
}

/// Options shared by the row-producing runs.
#[derive(Default)]
pub struct RunOptions<'a> {
    /// Negativity column with respect to this party of state legs.
    pub negativity: Option<PartySelector>,
    /// Skip the initial row (used when resuming).
    pub skip_initial: bool,
    /// Called after every display row.
    pub after_display: Option<&'a mut dyn FnMut(&dyn Trajectory) -> Result<()>>,
}

fn make_row(traj: &dyn Trajectory, info: DisplayInfo, negativity: &Option<PartySelector>) -> Result<DisplayRow> {
    let neg = match negativity {
        None => None,
        Some(party) => {
            let rho = traj.density().ok_or(Error::NegativityRequiresDensity)?;
            Some(rho.negativity(party)?)
        }
    };
    Ok(DisplayRow {
        t: traj.time(),
        dt_did: info.dt_did,
        blocks: traj.display()?,
        jump_proximity: info.jump_proximity,
        negativity: neg,
    })
}

fn emit_row(
    sink: &mut dyn RowSink,
    opts: &mut RunOptions<'_>,
    traj: &dyn Trajectory,
    info: DisplayInfo,
) -> Result<()> {
    sink.row(&make_row(traj, info, &opts.negativity)?)?;
    if let Some(cb) = opts.after_display.as_mut() {
        cb(traj)?;
    }
    Ok(())
}

/// Rows at `t = 0, Dt, 2Dt, …, T`.
pub fn run_dt(
    traj: &mut dyn Trajectory,
    t_final: f64,
    dt_display: f64,
    sink: &mut dyn RowSink,
    mut opts: RunOptions<'_>,
) -> Result<()> {
    let emit = !opts.skip_initial;
    let mut cb = |traj: &dyn Trajectory, info| emit_row(sink, &mut opts, traj, info);
    drive_dt(traj, t_final, dt_display, emit, &mut cb)
}

/// Rows after every `dc` adaptive steps.
pub fn run(
    traj: &mut dyn Trajectory,
    t_final: f64,
    dc: u64,
    sink: &mut dyn RowSink,
    mut opts: RunOptions<'_>,
) -> Result<()> {
    let emit = !opts.skip_initial;
    let mut cb = |traj: &dyn Trajectory, info| emit_row(sink, &mut opts, traj, info);
    drive_dc(traj, t_final, dc, emit, &mut cb)
}

/// Applies the display-discipline precedence: `dc ≠ 0` selects [`run`],
/// otherwise [`run_dt`].
pub fn run_with_pars(
    traj: &mut dyn Trajectory,
    pars: &ParsEvolution,
    sink: &mut dyn RowSink,
    opts: RunOptions<'_>,
) -> Result<()> {
    if pars.dc != 0 {
        run(traj, pars.t_final, pars.dc, sink, opts)
    } else {
        run_dt(traj, pars.t_final, pars.dt_display, sink, opts)
    }
}

/// Negativity party of state legs, validated against the evolution mode.
pub fn negativity_selector(system: &Composite, pars: &ParsEvolution) -> Result<Option<PartySelector>> {
    match &pars.negativity_party {
        None => Ok(None),
        Some(_) if pars.evol == EvolutionMode::Single => Err(Error::NegativityRequiresDensity),
        Some(frees) => system.party(frees).map(Some),
    }
}

/// Builds the trajectory selected by `pars.evol` and runs it. Returns the
/// final state, or `None` for ensembles.
pub fn evolve(
    system: &Composite,
    psi0: &StateVector,
    pars: &ParsEvolution,
    sink: &mut dyn RowSink,
    after_display: Option<&mut dyn FnMut(&dyn Trajectory) -> Result<()>>,
) -> Result<Option<TrajectoryState>> {
    pars.validate()?;
    let negativity = negativity_selector(system, pars)?;
    let opts = RunOptions {
        negativity,
        skip_initial: false,
        after_display,
    };
    match pars.evol {
        EvolutionMode::Single => {
            let mut traj = McwfTrajectory::new(system, psi0.clone(), pars, pars.seed)?;
            run_with_pars(&mut traj, pars, sink, opts)?;
            Ok(Some(traj.snapshot()))
        }
        EvolutionMode::Master => {
            let mut traj = MasterTrajectory::new(system, psi0.dyad(), pars)?;
            run_with_pars(&mut traj, pars, sink, opts)?;
            Ok(Some(traj.snapshot()))
        }
        EvolutionMode::Ensemble => {
            ensemble_run(system, psi0, pars, sink, opts.negativity.as_ref(), true)?;
            Ok(None)
        }
    }
}

/// Continues a saved single trajectory or master evolution; the initial row
/// is not repeated.
pub fn resume(
    system: &Composite,
    saved: TrajectoryState,
    pars: &ParsEvolution,
    sink: &mut dyn RowSink,
    after_display: Option<&mut dyn FnMut(&dyn Trajectory) -> Result<()>>,
) -> Result<TrajectoryState> {
    pars.validate()?;
    let opts = RunOptions {
        negativity: negativity_selector(system, pars)?,
        skip_initial: true,
        after_display,
    };
    match (pars.evol, saved.state) {
        (EvolutionMode::Single, QuantumState::Pure(psi)) => {
            let mut traj = McwfTrajectory::restore(system, psi, saved.t, &saved.rng, saved.dt_next, pars)?;
            run_with_pars(&mut traj, pars, sink, opts)?;
            Ok(traj.snapshot())
        }
        (EvolutionMode::Master, QuantumState::Mixed(rho)) => {
            let mut traj = MasterTrajectory::restore(system, rho, saved.t, saved.dt_next, pars)?;
            run_with_pars(&mut traj, pars, sink, opts)?;
            Ok(traj.snapshot())
        }
        (EvolutionMode::Ensemble, _) => Err(Error::InvalidParameter(
            "ensembles cannot be resumed".into(),
        )),
        (mode, _) => Err(Error::InvalidParameter(format!(
            "saved state does not belong to a {} evolution",
            mode.token()
        ))),
    }
}

pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
