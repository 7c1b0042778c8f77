//! File formats: JSON band and state files, CSV traces and packets.
//!
//! JSON numbers are written in shortest round-trip form and parsed with
//! correct rounding, so every `f64` survives a write/read cycle bit for bit.
//!
//! Band file layout (field names are stable):
//!
//! ```text
//! { "format": "bloch-lab/bands", "version": 1,
//!   "k_points": [...],                       // informational copy of the grid
//!   "structure": {
//!     "grid": { "d": .., "n": .. },
//!     "m_cut": 32 | null,
//!     "bands": [ { "energies": [..], "berry": [..], "berry_reliable": [..],
//!                  "coeffs": [[[re, im], ...], ...] | null,
//!                  "periodic_gauge": true }, ... ],
//!     "berry_filled": true, "warnings": [..] } }
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::band_structure::BandStructure;
use crate::error::{ensure, Error, Result};
use crate::initial_states::MomentumState;
use crate::observables::{ObservableTrace, TraceRow};
use crate::position_space::PositionWavepacket;

const BAND_FORMAT: &str = "bloch-lab/bands";
const STATE_FORMAT: &str = "bloch-lab/state";
const VERSION: u32 = 1;

/// Header row of the observable CSV.
pub const TRACE_HEADER: &str = "tau,mean_k,dx,dS,sigma,chi";
/// Header row of the packet CSV.
pub const PACKET_HEADER: &str = "x,re,im,abs2";

#[derive(Serialize, Deserialize)]
struct BandFile {
    format: String,
    version: u32,
    #[serde(default)]
    k_points: Vec<f64>,
    structure: BandStructure,
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    format: String,
    version: u32,
    state: MomentumState,
}

fn check_header(format: &str, version: u32, expected: &str) -> Result<()> {
    ensure(format == expected, || format!("expected a {expected} file, found {format}"))
        .map_err(|e| Error::Format(e.to_string()))?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported {expected} version {version}")));
    }
    Ok(())
}

pub fn band_structure_to_string(bands: &BandStructure) -> Result<String> {
    let file = BandFile {
        format: BAND_FORMAT.into(),
        version: VERSION,
        k_points: bands.grid().points(),
        structure: bands.clone(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn band_structure_from_str(text: &str) -> Result<BandStructure> {
    let file: BandFile = serde_json::from_str(text)?;
    check_header(&file.format, file.version, BAND_FORMAT)?;
    file.structure.check_consistency()?;
    Ok(file.structure)
}

pub fn write_band_structure(bands: &BandStructure, path: &Path) -> Result<()> {
    std::fs::write(path, band_structure_to_string(bands)?)?;
    Ok(())
}

pub fn read_band_structure(path: &Path) -> Result<BandStructure> {
    band_structure_from_str(&std::fs::read_to_string(path)?)
}

pub fn write_state(state: &MomentumState, path: &Path) -> Result<()> {
    let file = StateFile {
        format: STATE_FORMAT.into(),
        version: VERSION,
        state: state.clone(),
    };
    std::fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

pub fn read_state(path: &Path) -> Result<MomentumState> {
    let file: StateFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    check_header(&file.format, file.version, STATE_FORMAT)?;
    let s = file.state;
    // re-run the constructor checks
    let grid = crate::grid::KGrid::new(s.grid().period(), s.grid().len())?;
    MomentumState::new(grid, s.amplitudes().to_vec()).map(|_| s)
}

pub fn write_trace_csv(trace: &ObservableTrace, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &trace.rows {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            r.tau, r.mean_k, r.dx, r.ds, r.sigma, r.chi
        )?;
    }
    Ok(())
}

pub fn save_trace_csv(trace: &ObservableTrace, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trace_csv(trace, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads the rows of a trace CSV (the initial spread is not stored).
pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != TRACE_HEADER {
        return Err(Error::Format(format!("unexpected trace header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_fields(&line, 6, i + 2)?;
        rows.push(TraceRow {
            tau: v[0],
            mean_k: v[1],
            dx: v[2],
            ds: v[3],
            sigma: v[4],
            chi: v[5],
        });
    }
    Ok(rows)
}

fn parse_fields(line: &str, count: usize, lineno: usize) -> Result<Vec<f64>> {
    let v = line
        .split(',')
        .map(|f| f.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Format(format!("line {lineno}: {e}")))?;
    if v.len() != count {
        return Err(Error::Format(format!("line {lineno}: expected {count} fields, found {}", v.len())));
    }
    Ok(v)
}

pub fn write_packet_csv(pkt: &PositionWavepacket, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{PACKET_HEADER}")?;
    for (i, v) in pkt.values.iter().enumerate() {
        writeln!(out, "{:e},{:e},{:e},{:e}", pkt.x_grid.x(i), v.re, v.im, v.norm_sqr())?;
    }
    Ok(())
}

pub fn save_packet_csv(pkt: &PositionWavepacket, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_packet_csv(pkt, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Returns `(x, ψ)` columns of a packet CSV.
pub fn read_packet_csv(path: &Path) -> Result<(Vec<f64>, Vec<num_complex::Complex64>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != PACKET_HEADER {
        return Err(Error::Format(format!("unexpected packet header {header:?}")));
    }
    let (mut xs, mut vals) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_fields(&line, 4, i + 2)?;
        xs.push(v[0]);
        vals.push(num_complex::Complex64::new(v[1], v[2]));
    }
    Ok((xs, vals))
}
