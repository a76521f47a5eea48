//! Plain-text field snapshots and CSV serialization of run diagnostics.
//!
//! A snapshot is a positional text file, one value per line:
//!
//! ```text
//!   dim                 1 or 2
//!   nx [ny]             cell counts (space-separated in 2D)
//!   dx [dy]             cell spacings
//!   time                simulation time
//!   φ values            row-major (inner x, outer y), nx·ny lines
//!   T values            row-major, nx·ny lines
//! ```
//!
//! Floats are written with 17 significant digits (`{:.16e}`), so a write/read
//! cycle reproduces every f64 bit for bit. The diagnostics CSV uses the fixed
//! header [`DIAGNOSTICS_CSV_HEADER`] with the same float format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::field::{FieldState, Grid};
use crate::galerkin::ModeTrajectory;
use crate::pde::DiagnosticsRecord;
use crate::stefan::EpsSweepRow;
use crate::{Error, Result};

/// Column header of the diagnostics CSV.
pub const DIAGNOSTICS_CSV_HEADER: &str = "time,E,E0,E1,S,energy_residual,\
entropy_prod_conduction,entropy_prod_mobility,caginalp_residual";

/// Column header of the layer-width sweep CSV.
pub const SWEEP_CSV_HEADER: &str =
    "eps,v,H,T_interface,T_weighted,jump,gt_defect,jump_defect,linear_jump_defect";

/// Write one snapshot to an open writer.
pub fn write_snapshot(w: &mut impl Write, grid: &Grid, state: &FieldState) -> Result<()> {
    state.check_shape(grid)?;
    writeln!(w, "{}", grid.dim)?;
    if grid.dim == 1 {
        writeln!(w, "{}", grid.nx)?;
        writeln!(w, "{:.16e}", grid.dx)?;
    } else {
        writeln!(w, "{} {}", grid.nx, grid.ny)?;
        writeln!(w, "{:.16e} {:.16e}", grid.dx, grid.dy)?;
    }
    writeln!(w, "{:.16e}", state.time)?;
    for v in &state.phi {
        writeln!(w, "{v:.16e}")?;
    }
    for v in &state.temp {
        writeln!(w, "{v:.16e}")?;
    }
    Ok(())
}

/// Parse one snapshot from an open reader, reconstructing the grid from the
/// header (the domain origin is always 0, extents are `n·spacing`).
pub fn read_snapshot(r: &mut impl BufRead) -> Result<(Grid, FieldState)> {
    let mut line_no = 0usize;
    let mut lines = r.lines();
    let mut next_line = |what: &str| -> Result<String> {
        line_no += 1;
        match lines.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(Error::Io(e)),
            None => Err(Error::domain(format!(
                "snapshot truncated at line {line_no}: expected {what}"
            ))),
        }
    };
    let parse_f64 = |tok: &str, line: usize, what: &str| -> Result<f64> {
        tok.trim().parse::<f64>().map_err(|_| {
            Error::domain(format!("snapshot line {line}: cannot parse {what} from {tok:?}"))
        })
    };

    let dim_line = next_line("the dimension")?;
    let dim: usize = dim_line.trim().parse().map_err(|_| {
        Error::domain(format!("snapshot line 1: cannot parse dimension from {dim_line:?}"))
    })?;
    if dim != 1 && dim != 2 {
        return Err(Error::domain(format!("snapshot line 1: dimension must be 1 or 2, got {dim}")));
    }

    let counts_line = next_line("cell counts")?;
    let counts: Vec<usize> = counts_line
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>().map_err(|_| {
                Error::domain(format!("snapshot line 2: cannot parse cell count from {t:?}"))
            })
        })
        .collect::<Result<_>>()?;
    if counts.len() != dim {
        return Err(Error::domain(format!(
            "snapshot line 2: expected {dim} cell count(s), got {}",
            counts.len()
        )));
    }

    let spacing_line = next_line("cell spacings")?;
    let spacings: Vec<f64> = spacing_line
        .split_whitespace()
        .map(|t| parse_f64(t, 3, "cell spacing"))
        .collect::<Result<_>>()?;
    if spacings.len() != dim {
        return Err(Error::domain(format!(
            "snapshot line 3: expected {dim} spacing(s), got {}",
            spacings.len()
        )));
    }

    let time = parse_f64(&next_line("the time")?, 4, "time")?;

    let grid = if dim == 1 {
        Grid::line(counts[0], counts[0] as f64 * spacings[0])?
    } else {
        Grid::rect(
            counts[0],
            counts[1],
            counts[0] as f64 * spacings[0],
            counts[1] as f64 * spacings[1],
        )?
    };
    let n = grid.cell_count();
    let mut values = Vec::with_capacity(2 * n);
    for k in 0..2 * n {
        let line = next_line("a field value")?;
        values.push(parse_f64(&line, 5 + k, "field value")?);
    }
    let temp = values.split_off(n);
    Ok((grid, FieldState::new(values, temp, time)))
}

/// Write a snapshot to a file path.
pub fn save_snapshot(path: &Path, grid: &Grid, state: &FieldState) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot(&mut w, grid, state)?;
    w.flush()?;
    Ok(())
}

/// Read a snapshot from a file path.
pub fn load_snapshot(path: &Path) -> Result<(Grid, FieldState)> {
    let mut r = BufReader::new(File::open(path)?);
    read_snapshot(&mut r)
}

/// One CSV data row (no trailing newline) for a diagnostics record.
pub fn diagnostics_csv_row(rec: &DiagnosticsRecord) -> String {
    format!(
        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        rec.time,
        rec.energies.total,
        rec.energies.quadratic,
        rec.energies.augmented,
        rec.energies.entropy,
        rec.energy_residual,
        rec.entropy_prod_conduction,
        rec.entropy_prod_mobility,
        rec.caginalp_residual,
    )
}

/// Write header plus one row per record.
pub fn write_diagnostics_csv(w: &mut impl Write, records: &[DiagnosticsRecord]) -> Result<()> {
    writeln!(w, "{DIAGNOSTICS_CSV_HEADER}")?;
    for rec in records {
        writeln!(w, "{}", diagnostics_csv_row(rec))?;
    }
    Ok(())
}

/// Write the diagnostics CSV to a file path.
pub fn save_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_diagnostics_csv(&mut w, records)?;
    w.flush()?;
    Ok(())
}

/// Header line of a mode-trajectory CSV with `n` modes per family:
/// `time,a_1..a_n,b_1..b_n,E,E0,E1,r`.
pub fn mode_csv_header(n: usize) -> String {
    use std::fmt::Write as _;
    let mut header = String::from("time");
    for i in 1..=n {
        let _ = write!(header, ",a_{i}");
    }
    for i in 1..=n {
        let _ = write!(header, ",b_{i}");
    }
    header.push_str(",E,E0,E1,r");
    header
}

/// Write a spectral trajectory as CSV: one row per sample, mode coefficients
/// followed by the energies and the inequality ratio r(t).
pub fn write_mode_csv(w: &mut impl Write, traj: &ModeTrajectory) -> Result<()> {
    use std::fmt::Write as _;
    let n = traj.samples.first().map_or(0, |s| s.modes.a.len());
    writeln!(w, "{}", mode_csv_header(n))?;
    for s in &traj.samples {
        let mut row = format!("{:.16e}", s.modes.time);
        for v in s.modes.a.iter().chain(s.modes.b.iter()) {
            let _ = write!(row, ",{v:.16e}");
        }
        let _ = write!(
            row,
            ",{:.16e},{:.16e},{:.16e},{:.16e}",
            s.energies.total, s.energies.quadratic, s.energies.augmented, s.r
        );
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// Write the mode-trajectory CSV to a file path.
pub fn save_mode_csv(path: &Path, traj: &ModeTrajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_mode_csv(&mut w, traj)?;
    w.flush()?;
    Ok(())
}

/// One CSV data row (no trailing newline) for a sweep entry. Truncated rows
/// carry NaN in every measured column; `eps` always prints.
pub fn sweep_csv_row(row: &EpsSweepRow) -> String {
    format!(
        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        row.eps,
        row.v,
        row.h,
        row.t_interface,
        row.t_weighted,
        row.jump,
        row.gt_defect,
        row.jump_defect,
        row.linear_jump_defect,
    )
}

/// Write header plus one row per sweep entry.
pub fn write_sweep_csv(w: &mut impl Write, rows: &[EpsSweepRow]) -> Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        writeln!(w, "{}", sweep_csv_row(row))?;
    }
    Ok(())
}

/// Write the sweep CSV to a file path.
pub fn save_sweep_csv(path: &Path, rows: &[EpsSweepRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sweep_csv(&mut w, rows)?;
    w.flush()?;
    Ok(())
}
