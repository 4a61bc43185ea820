//! Solution snapshots and their CSV serialization.
//!
//! A frame stores the interior cells of one time level in plain layer
//! units: depths (m), depth-velocity products (m^2/s), surfaces (m), and
//! limited velocities (m/s). CSV files carry full double precision so
//! frames round-trip losslessly.

use std::io::{self, BufRead, Write};

use crate::driver::{Grid, SimState};
use crate::params::Parameters;
use crate::state::{self};
use thiserror::Error;

/// Column order of every frame CSV.
pub const CSV_HEADER: &str = "x,b,h1,hu1,h2,hu2,eta1,eta2,u1,u2";

/// One time level of the interior solution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolutionFrame {
    /// Simulation time (s).
    pub t: f64,
    /// Cell centers (m).
    pub x: Vec<f64>,
    /// Bed elevation (m).
    pub b: Vec<f64>,
    /// Top layer depth (m).
    pub h1: Vec<f64>,
    /// Top layer depth-velocity (m^2/s).
    pub hu1: Vec<f64>,
    /// Bottom layer depth (m).
    pub h2: Vec<f64>,
    /// Bottom layer depth-velocity (m^2/s).
    pub hu2: Vec<f64>,
    /// Sea surface (m).
    pub eta1: Vec<f64>,
    /// Internal surface (m).
    pub eta2: Vec<f64>,
    /// Top layer limited velocity (m/s).
    pub u1: Vec<f64>,
    /// Bottom layer limited velocity (m/s).
    pub u2: Vec<f64>,
}

/// Frame (de)serialization failures.
#[derive(Debug, Error)]
pub enum FrameError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl SolutionFrame {
    /// Snapshot the interior cells of a state.
    pub fn from_state(state: &SimState, grid: &Grid, p: &Parameters) -> Self {
        let n = grid.n_cells;
        let mut f = SolutionFrame { t: state.t, ..Default::default() };
        f.reserve(n);
        for (i, idx) in grid.interior().enumerate() {
            let cell = &state.cells[idx];
            let prim = state::to_primitive(cell, p);
            f.x.push(grid.cell_center(i));
            f.b.push(cell.b);
            f.h1.push(prim.h1);
            f.hu1.push(cell.mu1 / p.rho1());
            f.h2.push(prim.h2);
            f.hu2.push(cell.mu2 / p.rho2());
            f.eta1.push(prim.eta1);
            f.eta2.push(prim.eta2);
            f.u1.push(prim.u1);
            f.u2.push(prim.u2);
        }
        f
    }

    fn reserve(&mut self, n: usize) {
        for v in [
            &mut self.x,
            &mut self.b,
            &mut self.h1,
            &mut self.hu1,
            &mut self.h2,
            &mut self.hu2,
            &mut self.eta1,
            &mut self.eta2,
            &mut self.u1,
            &mut self.u2,
        ] {
            v.reserve(n);
        }
    }

    /// Number of cells in the frame.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Named access to every column except `x`, in CSV order.
    pub fn fields(&self) -> [(&'static str, &Vec<f64>); 9] {
        [
            ("b", &self.b),
            ("h1", &self.h1),
            ("hu1", &self.hu1),
            ("h2", &self.h2),
            ("hu2", &self.hu2),
            ("eta1", &self.eta1),
            ("eta2", &self.eta2),
            ("u1", &self.u1),
            ("u2", &self.u2),
        ]
    }

    fn row(&self, i: usize) -> [f64; 10] {
        [
            self.x[i],
            self.b[i],
            self.h1[i],
            self.hu1[i],
            self.h2[i],
            self.hu2[i],
            self.eta1[i],
            self.eta2[i],
            self.u1[i],
            self.u2[i],
        ]
    }

    fn push_row(&mut self, v: &[f64]) {
        self.x.push(v[0]);
        self.b.push(v[1]);
        self.h1.push(v[2]);
        self.hu1.push(v[3]);
        self.h2.push(v[4]);
        self.hu2.push(v[5]);
        self.eta1.push(v[6]);
        self.eta2.push(v[7]);
        self.u1.push(v[8]);
        self.u2.push(v[9]);
    }

    /// Write the frame as CSV with full double precision.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for i in 0..self.len() {
            let row = self.row(i);
            let mut first = true;
            for v in row {
                if first {
                    first = false;
                } else {
                    write!(w, ",")?;
                }
                write!(w, "{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Read a frame written by `write_csv`. The time is not stored in the
    /// per-frame format; it stays zero unless the caller sets it.
    pub fn read_csv<R: BufRead>(r: &mut R) -> Result<Self, FrameError> {
        let mut lines = r.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => {
                return Err(FrameError::Parse { line: 1, reason: "empty file".into() });
            }
        };
        if header.trim() != CSV_HEADER {
            return Err(FrameError::Parse {
                line: 1,
                reason: format!("unexpected header '{}'", header.trim()),
            });
        }
        let mut frame = SolutionFrame::default();
        for (idx, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let vals = parse_floats(line, idx + 1, 10)?;
            frame.push_row(&vals);
        }
        Ok(frame)
    }
}

fn parse_floats(line: &str, line_no: usize, expect: usize) -> Result<Vec<f64>, FrameError> {
    let vals: Result<Vec<f64>, _> = line.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|e| FrameError::Parse {
        line: line_no,
        reason: format!("bad float: {e}"),
    })?;
    if vals.len() != expect {
        return Err(FrameError::Parse {
            line: line_no,
            reason: format!("expected {expect} columns, got {}", vals.len()),
        });
    }
    Ok(vals)
}

/// Write several frames as one time-stacked CSV with a leading `t` column,
/// suited to contour plotting.
pub fn write_stacked<W: Write>(frames: &[SolutionFrame], w: &mut W) -> io::Result<()> {
    writeln!(w, "t,{CSV_HEADER}")?;
    for f in frames {
        for i in 0..f.len() {
            write!(w, "{:.16e}", f.t)?;
            for v in f.row(i) {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::Grid;
    use crate::state::{from_primitive, PrimitiveState};

    fn params() -> Parameters {
        Parameters::new(9.8, 1000.0, 1000.0 / 0.95).unwrap()
    }

    fn sample_frame() -> SolutionFrame {
        let p = params();
        let grid = Grid::new(0.0, 1.0, 8).unwrap();
        let state = SimState::from_fn(&grid, |x| {
            let h2 = 0.4 + 0.01 * (7.0 * x).sin();
            let prim = PrimitiveState {
                h1: 0.6,
                u1: 0.1 * x,
                h2,
                u2: -0.05,
                b: -1.0,
                eta1: 0.0,
                eta2: -1.0 + h2,
            };
            from_primitive(&prim, &p).unwrap()
        });
        SolutionFrame::from_state(&state, &grid, &p)
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let frame = sample_frame();
        let mut buf = Vec::new();
        frame.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,b,h1,hu1,h2,hu2,eta1,eta2,u1,u2\n"));
        let parsed = SolutionFrame::read_csv(&mut buf.as_slice()).unwrap();
        assert_eq!(parsed.len(), frame.len());
        for i in 0..frame.len() {
            assert_eq!(parsed.row(i), frame.row(i), "row {i}");
        }
    }

    #[test]
    fn read_rejects_malformed_input() {
        let bad_header = "x,b,h1\n1,2,3\n";
        assert!(SolutionFrame::read_csv(&mut bad_header.as_bytes()).is_err());
        let bad_column = format!("{CSV_HEADER}\n1,2,3\n");
        assert!(SolutionFrame::read_csv(&mut bad_column.as_bytes()).is_err());
        let bad_float = format!("{CSV_HEADER}\n1,2,3,4,5,6,7,8,9,zebra\n");
        assert!(SolutionFrame::read_csv(&mut bad_float.as_bytes()).is_err());
    }

    #[test]
    fn stacked_csv_prefixes_time() {
        let mut f0 = sample_frame();
        f0.t = 0.0;
        let mut f1 = sample_frame();
        f1.t = 0.5;
        let mut buf = Vec::new();
        write_stacked(&[f0.clone(), f1], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x,b,h1,hu1,h2,hu2,eta1,eta2,u1,u2");
        let first = lines.next().unwrap();
        assert!(first.starts_with("0.0000000000000000e0,"));
        let n = f0.len();
        let row_n1 = text.lines().nth(1 + n).unwrap();
        assert!(row_n1.starts_with("5.0000000000000000e-1,"));
    }
}
