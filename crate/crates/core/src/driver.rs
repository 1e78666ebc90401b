//! Ready-made simulation scripts behind the `qedsim` binary.
//!
//! Every script registers its parameters in one table, parses the command
//! line, writes the header and runs [`evolve`]. With `--o` the rows go to
//! that file and the final state to the file with `.sv` appended; if that
//! state file already exists the run resumes from it and appends rows.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use crate::cli::{Handle, ParameterTable, UpdateOutcome};
use crate::composite::{make_binary, make_composite, Act, Composite};
use crate::elements::{
    make_mode, make_qbit, mode_init, qbit_init, register_picture, JCParams, JaynesCummings, ModeParams,
    QbitParams, TernaryCoupling,
};
use crate::evolution::{evolve, negativity_selector, resume, EvolutionMode, EvolutionParams, ParsEvolution, Trajectory};
use crate::qdata::StateVector;
use crate::structure::Element;
use crate::trajio::{self, HeaderInfo, TextSink};
use crate::{Error, Result};

/// Names accepted by [`run_script`].
pub const SCRIPTS: &[&str] = &["mode", "qbit", "jc", "ring"];

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A parsed script: the system, its initial state and the full table.
pub struct Prepared {
    pub table: ParameterTable,
    pub evolution: ParsEvolution,
    pub system: Composite,
    pub psi0: StateVector,
    pub io: IoOptions,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IoOptions {
    pub output: Option<PathBuf>,
    /// `None`: resume iff the state file exists.
    pub resume: Option<bool>,
    /// Write the state file after every this many display rows; 0 disables.
    pub checkpoint: u64,
}

struct IoHandles {
    output: Handle<String>,
    resume: Handle<bool>,
    checkpoint: Handle<u64>,
}

impl IoHandles {
    fn register(table: &mut ParameterTable) -> Result<Self> {
        Ok(IoHandles {
            output: table.add("o", "Output file (standard output if empty)", String::new(), None)?,
            resume: table.add(
                "resume",
                "Resume from the output's .sv file (default: iff it exists)",
                false,
                None,
            )?,
            checkpoint: table.add(
                "checkpoint",
                "Write the .sv file every this many display rows (0: only at the end)",
                0u64,
                None,
            )?,
        })
    }

    fn read(&self, table: &ParameterTable) -> IoOptions {
        let o: String = table.get(&self.output);
        IoOptions {
            output: (!o.is_empty()).then(|| PathBuf::from(o)),
            resume: table.is_set(self.resume.name()).then(|| table.get(&self.resume)),
            checkpoint: table.get(&self.checkpoint),
        }
    }
}

type Builder = fn(&ParameterTable, &ScriptHandles) -> Result<(Composite, StateVector)>;

enum ScriptHandles {
    Mode(ModeParams),
    Qbit(QbitParams),
    Jc(QbitParams, ModeParams, JCParams),
    Ring {
        qbit: QbitParams,
        plus: ModeParams,
        minus: ModeParams,
        g_plus: JCParams,
        g_minus: JCParams,
        g3: JCParams,
    },
}

fn register_script(name: &str, table: &mut ParameterTable) -> Result<(ScriptHandles, Builder)> {
    Ok(match name {
        "mode" => (ScriptHandles::Mode(ModeParams::register(table, None)?), build_mode),
        "qbit" => (ScriptHandles::Qbit(QbitParams::register(table, None)?), build_qbit),
        "jc" => (
            ScriptHandles::Jc(
                QbitParams::register(table, None)?,
                ModeParams::register(table, None)?,
                JCParams::register(table, None)?,
            ),
            build_jc,
        ),
        "ring" => (
            ScriptHandles::Ring {
                qbit: QbitParams::register(table, None)?,
                plus: ModeParams::register(table, Some("P"))?,
                minus: ModeParams::register(table, Some("M"))?,
                g_plus: JCParams::register(table, Some("P"))?,
                g_minus: JCParams::register(table, Some("M"))?,
                g3: JCParams::register(table, Some("3"))?,
            },
            build_ring,
        ),
        other => {
            return Err(Error::UnexpectedArgument(format!(
                "unknown script '{other}' (available: {})",
                SCRIPTS.join(", ")
            )))
        }
    })
}

fn picture(table: &ParameterTable) -> crate::elements::Picture {
    table.value("picture").expect("picture is registered by every script")
}

fn build_mode(table: &ParameterTable, h: &ScriptHandles) -> Result<(Composite, StateVector)> {
    let ScriptHandles::Mode(m) = h else { unreachable!() };
    let pm = m.read(table);
    let mode = make_mode(&pm, picture(table))?;
    Ok((Composite::single(Arc::new(mode))?, mode_init(&pm)?))
}

fn build_qbit(table: &ParameterTable, h: &ScriptHandles) -> Result<(Composite, StateVector)> {
    let ScriptHandles::Qbit(q) = h else { unreachable!() };
    let pq = q.read(table);
    let qbit = make_qbit(&pq, picture(table))?;
    Ok((Composite::single(Arc::new(qbit))?, qbit_init(&pq)?))
}

fn build_jc(table: &ParameterTable, h: &ScriptHandles) -> Result<(Composite, StateVector)> {
    let ScriptHandles::Jc(q, m, g) = h else { unreachable!() };
    let (pq, pm) = (q.read(table), m.read(table));
    let qbit: Arc<dyn Element> = Arc::new(make_qbit(&pq, picture(table))?);
    let mode: Arc<dyn Element> = Arc::new(make_mode(&pm, picture(table))?);
    let jc = JaynesCummings::new(qbit, mode, g.read(table).g)?;
    let psi0 = qbit_init(&pq)?.direct_product(&mode_init(&pm)?)?;
    Ok((make_binary(Arc::new(jc))?, psi0))
}

/// A qbit coupled to two counterpropagating modes of a ring cavity, each
/// mode by Jaynes–Cummings, and all three by a ternary scattering term.
fn build_ring(table: &ParameterTable, h: &ScriptHandles) -> Result<(Composite, StateVector)> {
    let ScriptHandles::Ring { qbit, plus, minus, g_plus, g_minus, g3 } = h else { unreachable!() };
    let pic = picture(table);
    let (pq, pp, pm) = (qbit.read(table), plus.read(table), minus.read(table));
    let q: Arc<dyn Element> = Arc::new(make_qbit(&pq, pic)?);
    let mp: Arc<dyn Element> = Arc::new(make_mode(&pp, pic)?);
    let mm: Arc<dyn Element> = Arc::new(make_mode(&pm, pic)?);
    let acts = vec![
        Act::new(&[0, 1], Arc::new(JaynesCummings::new(q.clone(), mp.clone(), g_plus.read(table).g)?)),
        Act::new(&[0, 2], Arc::new(JaynesCummings::new(q.clone(), mm.clone(), g_minus.read(table).g)?)),
        Act::new(
            &[1, 2, 0],
            Arc::new(TernaryCoupling::new(mp.clone(), mm.clone(), q.clone(), g3.read(table).g)?),
        ),
    ];
    let psi0 = qbit_init(&pq)?
        .direct_product(&mode_init(&pp)?)?
        .direct_product(&mode_init(&pm)?)?;
    Ok((make_composite(vec![q, mp, mm], acts)?, psi0))
}

/// Parses `args` for script `name`. `Ok(None)` means help was requested
/// and has been written to `out`.
pub fn prepare(name: &str, args: &[String], out: &mut dyn Write) -> Result<Option<Prepared>> {
    let mut table = ParameterTable::new();
    let evolution = EvolutionParams::register(&mut table)?;
    register_picture(&mut table)?;
    let (handles, builder) = register_script(name, &mut table)?;
    let io = IoHandles::register(&mut table)?;
    if table.update(args, "--")? == UpdateOutcome::HelpRequested {
        out.write_all(table.help("--").as_bytes())?;
        return Ok(None);
    }
    let evolution = evolution.read(&table)?;
    evolution.validate()?;
    let (system, psi0) = builder(&table, &handles)?;
    negativity_selector(&system, &evolution)?;
    let io = io.read(&table);
    Ok(Some(Prepared { table, evolution, system, psi0, io }))
}

fn header(script: &str, p: &Prepared) -> HeaderInfo {
    HeaderInfo {
        script: script.to_string(),
        parameters: p.table.dump(),
        key: p.system.display_key(),
        jump_proximity: p.evolution.evol == EvolutionMode::Single,
        negativity: p.evolution.negativity_party.as_ref().map(|party| {
            party.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
        }),
    }
}

/// Runs a prepared script, writing to `--o` or else to `out`.
pub fn execute(script: &str, p: &Prepared, out: &mut dyn Write) -> Result<()> {
    let sv = p.io.output.as_deref().map(trajio::sv_path);
    let resumable = p.evolution.evol != EvolutionMode::Ensemble;
    let resuming = match (&sv, p.io.resume) {
        (None, Some(true)) => {
            return Err(Error::InvalidParameter("--resume needs an output file (--o)".into()))
        }
        (None, _) => false,
        (Some(_), Some(false)) => false,
        (Some(_), Some(true)) => {
            if !resumable {
                return Err(Error::InvalidParameter("ensembles cannot be resumed".into()));
            }
            true
        }
        (Some(path), None) => resumable && path.exists(),
    };

    let mut file;
    let writer: &mut dyn Write = match &p.io.output {
        Some(path) => {
            file = trajio::open_output(Some(path), resuming)?;
            &mut *file
        }
        None => out,
    };

    let mut rows = 0u64;
    let checkpoint = p.io.checkpoint;
    let mut save_cb = |traj: &dyn Trajectory| -> Result<()> {
        rows += 1;
        if let Some(path) = &sv {
            if checkpoint > 0 && rows % checkpoint == 0 {
                trajio::save_state(&traj.snapshot(), path)?;
            }
        }
        Ok(())
    };
    let cb: Option<&mut dyn FnMut(&dyn Trajectory) -> Result<()>> =
        if sv.is_some() && checkpoint > 0 { Some(&mut save_cb) } else { None };

    let final_state = if resuming {
        let path = sv.as_deref().expect("resuming implies a state file");
        let saved = trajio::load_and_resume(path, p.system.dims())?;
        let mut sink = TextSink::new(&mut *writer);
        Some(resume(&p.system, saved, &p.evolution, &mut sink, cb)?)
    } else {
        trajio::write_header(writer, &header(script, p))?;
        let mut sink = TextSink::new(&mut *writer);
        evolve(&p.system, &p.psi0, &p.evolution, &mut sink, cb)?
    };
    writer.flush()?;
    if let (Some(path), Some(state)) = (&sv, final_state) {
        trajio::save_state(&state, path)?;
    }
    Ok(())
}

/// Full command-line entry point; returns the process exit code.
pub fn run_script(name: &str, args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let prepared = match prepare(name, args, out) {
        Ok(Some(p)) => p,
        Ok(None) => return EXIT_OK,
        Err(e) => return report(err, &e),
    };
    match execute(name, &prepared, out) {
        Ok(()) => EXIT_OK,
        Err(e) => report(err, &e),
    }
}

fn report(err: &mut dyn Write, e: &Error) -> i32 {
    let _ = writeln!(err, "error: {e}");
    if e.is_usage() || matches!(e, Error::Io { .. }) && !is_state_file_error(e) {
        EXIT_USAGE
    } else {
        EXIT_RUNTIME
    }
}

fn is_state_file_error(e: &Error) -> bool {
    match e {
        Error::Io { path, .. } => path.extension().is_some_and(|x| x == "sv"),
        _ => false,
    }
}

