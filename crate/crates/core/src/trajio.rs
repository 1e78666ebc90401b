//! Display rows, output headers and `.sv` state files.
//!
//! Output is line oriented. Header lines start with `# `; every other line
//! is a display row: time and last stepsize, then one tab-separated block
//! per displayed subsystem (values within a block separated by spaces),
//! then the jump-proximity column of single trajectories and finally the
//! negativity column when requested.
//!
//! `.sv` layout, little endian:
//!
//! ```text
//! b"CQEDSV01" | u32 rank | u32 dims[rank] | f64 t | (f64 re, f64 im)[Π dims]
//!             | u32 rng_len | u8 rng[rng_len] | f64 stepsize
//! ```
//!
//! A density operator over dims `d` is stored as a rank-`2R` tensor with
//! dims `d ++ d`.

use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;

use crate::evolution::{QuantumState, TrajectoryState};
use crate::qdata::{DensityOperator, StateVector};
use crate::structure::DisplayKey;
use crate::{Error, Result};

pub const SV_MAGIC: &[u8; 8] = b"CQEDSV01";

#[derive(Clone, Debug, PartialEq)]
pub struct DisplayRow {
    pub t: f64,
    pub dt_did: f64,
    pub blocks: Vec<Vec<f64>>,
    pub jump_proximity: Option<f64>,
    pub negativity: Option<f64>,
}

/// Receiver of display rows.
pub trait RowSink {
    fn row(&mut self, row: &DisplayRow) -> Result<()>;
}

impl RowSink for Vec<DisplayRow> {
    fn row(&mut self, row: &DisplayRow) -> Result<()> {
        self.push(row.clone());
        Ok(())
    }
}

/// Writes formatted rows to any writer.
pub struct TextSink<W: Write> {
    out: W,
}

impl<W: Write> TextSink<W> {
    pub fn new(out: W) -> Self {
        TextSink { out }
    }

    pub fn get_mut(&mut self) -> &mut W {
        &mut self.out
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> RowSink for TextSink<W> {
    fn row(&mut self, row: &DisplayRow) -> Result<()> {
        write_row(&mut self.out, row)?;
        Ok(())
    }
}

/// `%g`-style formatting with 6 significant digits; negative zero prints
/// as `0`.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    let fixed = format!("{x:.decimals$}");
    let out = trim_zeros(&fixed);
    if out == "-0" {
        "0".into()
    } else {
        out
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn format_row(row: &DisplayRow) -> String {
    let mut line = format!("{}\t{}", fmt_g(row.t), fmt_g(row.dt_did));
    for block in &row.blocks {
        line.push('\t');
        let vals: Vec<String> = block.iter().map(|v| fmt_g(*v)).collect();
        line.push_str(&vals.join(" "));
    }
    if let Some(jp) = row.jump_proximity {
        line.push('\t');
        line.push_str(&fmt_g(jp));
    }
    if let Some(n) = row.negativity {
        line.push('\t');
        line.push_str(&fmt_g(n));
    }
    line
}

pub fn write_row(out: &mut dyn Write, row: &DisplayRow) -> io::Result<()> {
    writeln!(out, "{}", format_row(row))
}

/// What the header documents besides the subsystem blocks.
#[derive(Clone, Debug, Default)]
pub struct HeaderInfo {
    pub script: String,
    pub parameters: Vec<(String, String)>,
    pub key: Vec<(String, DisplayKey)>,
    pub jump_proximity: bool,
    pub negativity: Option<String>,
}

/// Column key lines (without the `# ` prefix); columns count from 1.
pub fn column_key(info: &HeaderInfo) -> Vec<String> {
    let mut lines = vec!["1: time".to_string(), "2: dtDid".to_string()];
    let mut col = 3;
    for (label, key) in &info.key {
        if key.is_empty() {
            continue;
        }
        let last = col + key.len() - 1;
        let cols: Vec<String> = key
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| format!("{} {l}", col + i))
            .collect();
        lines.push(format!("{col}-{last}: {label}: {}", cols.join(", ")));
        col = last + 1;
    }
    if info.jump_proximity {
        lines.push(format!(
            "{col}: jump proximity (negative if a quantum jump occurred since the previous row)"
        ));
        col += 1;
    }
    if let Some(party) = &info.negativity {
        lines.push(format!("{col}: negativity with respect to frees {party}"));
    }
    lines
}

pub fn write_header(out: &mut dyn Write, info: &HeaderInfo) -> io::Result<()> {
    writeln!(
        out,
        "# {} {} {}",
        crate::FRAMEWORK_NAME,
        crate::FRAMEWORK_VERSION,
        info.script
    )?;
    writeln!(out, "# Parameters:")?;
    for (name, value) in &info.parameters {
        writeln!(out, "# {name} = {value}")?;
    }
    writeln!(out, "# Key to data columns:")?;
    for line in column_key(info) {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

/// Path of the state file belonging to output file `o`.
pub fn sv_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".sv");
    PathBuf::from(s)
}

/// Standard output when `path` is `None`; otherwise the file, truncated or
/// (when resuming) appended to.
pub fn open_output(path: Option<&Path>, append: bool) -> Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) => {
            let file = if append {
                OpenOptions::new().append(true).create(true).open(p)
            } else {
                File::create(p)
            }
            .map_err(|e| Error::Io {
                path: p.to_path_buf(),
                source: e,
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

pub fn encode_state(state: &TrajectoryState) -> Vec<u8> {
    let (dims, amps): (Vec<usize>, &[C64]) = match &state.state {
        QuantumState::Pure(psi) => (psi.dims().to_vec(), psi.amplitudes()),
        QuantumState::Mixed(rho) => (rho.tensor_dims(), rho.elements()),
    };
    let mut buf = Vec::with_capacity(8 + 4 + 4 * dims.len() + 8 + 16 * amps.len() + 4 + state.rng.len() + 8);
    buf.extend_from_slice(SV_MAGIC);
    buf.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for d in &dims {
        buf.extend_from_slice(&(*d as u32).to_le_bytes());
    }
    buf.extend_from_slice(&state.t.to_le_bytes());
    for a in amps {
        buf.extend_from_slice(&a.re.to_le_bytes());
        buf.extend_from_slice(&a.im.to_le_bytes());
    }
    buf.extend_from_slice(&(state.rng.len() as u32).to_le_bytes());
    buf.extend_from_slice(&state.rng);
    buf.extend_from_slice(&state.dt_next.to_le_bytes());
    buf
}

pub fn save_state(state: &TrajectoryState, path: &Path) -> Result<()> {
    std::fs::write(path, encode_state(state)).map_err(io_err(path))
}

/// Raw contents of a `.sv` file.
#[derive(Clone, Debug, PartialEq)]
pub struct SavedState {
    pub dims: Vec<usize>,
    pub t: f64,
    pub amplitudes: Vec<C64>,
    pub rng: Vec<u8>,
    pub dt_next: f64,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| format!("truncated at byte {} (need {n} more)", self.pos))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode_state(bytes: &[u8]) -> std::result::Result<SavedState, String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != SV_MAGIC {
        return Err("bad magic".into());
    }
    let rank = r.u32()? as usize;
    if rank == 0 || rank > 2 * crate::qdata::MAX_RANK {
        return Err(format!("unsupported rank {rank}"));
    }
    let mut dims = Vec::with_capacity(rank);
    let mut total: usize = 1;
    for _ in 0..rank {
        let d = r.u32()? as usize;
        if d == 0 {
            return Err("zero dimension".into());
        }
        total = total
            .checked_mul(d)
            .filter(|&t| t <= bytes.len() / 16)
            .ok_or("dimensions exceed the file size")?;
        dims.push(d);
    }
    let t = r.f64()?;
    let mut amplitudes = Vec::with_capacity(total);
    for _ in 0..total {
        let re = r.f64()?;
        let im = r.f64()?;
        amplitudes.push(C64::new(re, im));
    }
    let rng_len = r.u32()? as usize;
    let rng = r.take(rng_len)?.to_vec();
    let dt_next = r.f64()?;
    if r.pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - r.pos));
    }
    Ok(SavedState {
        dims,
        t,
        amplitudes,
        rng,
        dt_next,
    })
}

pub fn load_state(path: &Path) -> Result<SavedState> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    decode_state(&bytes).map_err(|reason| Error::CorruptSv {
        path: path.to_path_buf(),
        reason,
    })
}

/// Interprets a saved state for a system with `system_dims`: dims equal to
/// the system's mean a state vector, `dims ++ dims` a density operator.
pub fn into_trajectory_state(saved: SavedState, system_dims: &[usize]) -> Result<TrajectoryState> {
    let state = if saved.dims == system_dims {
        QuantumState::Pure(StateVector::from_amplitudes(&saved.dims, saved.amplitudes)?)
    } else if saved.dims.len() == 2 * system_dims.len()
        && saved.dims[..system_dims.len()] == *system_dims
        && saved.dims[system_dims.len()..] == *system_dims
    {
        QuantumState::Mixed(DensityOperator::from_matrix(system_dims, saved.amplitudes)?)
    } else {
        return Err(Error::StateSystemMismatch {
            state: saved.dims,
            system: system_dims.to_vec(),
        });
    };
    Ok(TrajectoryState {
        t: saved.t,
        state,
        rng: saved.rng,
        dt_next: saved.dt_next,
    })
}

/// Loads `path` and checks it against the system dimensions.
pub fn load_and_resume(path: &Path, system_dims: &[usize]) -> Result<TrajectoryState> {
    into_trajectory_state(load_state(path)?, system_dims)
}
