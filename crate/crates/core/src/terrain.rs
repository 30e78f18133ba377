//! Terrain height and slope queries.
//!
//! Heights are positive up; the vehicle's NED `z` is `-height`. Grid terrain
//! stores heights at nodes `origin + (col, row) * cell`, row 0 southmost, and
//! clamps queries outside the extent to the edge values.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::scalar::{cast, lit, Scalar};

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("cannot read terrain file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid terrain: {0}")]
    Invalid(String),
}

/// Rectangular heightmap sampled at grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightGrid<T> {
    ncols: usize,
    nrows: usize,
    origin: (T, T),
    cell: T,
    heights: Vec<T>,
}

impl<T: Scalar> HeightGrid<T> {
    /// `heights` is row-major with row 0 at `origin.1`.
    pub fn new(ncols: usize, nrows: usize, origin: (T, T), cell: T, heights: Vec<T>) -> Result<Self, TerrainError> {
        if ncols == 0 || nrows == 0 {
            return Err(TerrainError::Invalid(
                "grid must have at least one row and column".into(),
            ));
        }
        if heights.len() != ncols * nrows {
            return Err(TerrainError::Invalid(format!(
                "{} heights for a {ncols}x{nrows} grid",
                heights.len()
            )));
        }
        if !(cell > T::zero()) || !cell.is_finite() {
            return Err(TerrainError::Invalid(format!("cell size {cell} must be positive")));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(TerrainError::Invalid("heights must be finite".into()));
        }
        Ok(Self {
            ncols,
            nrows,
            origin,
            cell,
            heights,
        })
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn cell(&self) -> T {
        self.cell
    }

    pub fn origin(&self) -> (T, T) {
        self.origin
    }

    pub fn at(&self, col: usize, row: usize) -> T {
        self.heights[row * self.ncols + col]
    }

    /// Largest height difference between adjacent nodes divided by the cell
    /// size: a Lipschitz bound for the bilinear surface along either axis.
    pub fn lipschitz(&self) -> T {
        let mut max = T::zero();
        for r in 0..self.nrows {
            for c in 0..self.ncols {
                let h = self.at(c, r);
                if c + 1 < self.ncols {
                    max = max.max((self.at(c + 1, r) - h).abs());
                }
                if r + 1 < self.nrows {
                    max = max.max((self.at(c, r + 1) - h).abs());
                }
            }
        }
        max / self.cell
    }

    fn axis(&self, v: T, origin: T, n: usize) -> (usize, T) {
        if n == 1 {
            return (0, T::zero());
        }
        let max = cast::<f64, T>((n - 1) as f64);
        let f = ((v - origin) / self.cell).max(T::zero()).min(max);
        let i = f.floor().to_usize().unwrap_or(0).min(n - 2);
        (i, f - cast::<f64, T>(i as f64))
    }

    pub fn height(&self, x: T, y: T) -> T {
        let (c, fx) = self.axis(x, self.origin.0, self.ncols);
        let (r, fy) = self.axis(y, self.origin.1, self.nrows);
        let c1 = (c + 1).min(self.ncols - 1);
        let r1 = (r + 1).min(self.nrows - 1);
        let one = T::one();
        let h00 = self.at(c, r);
        let h10 = self.at(c1, r);
        let h01 = self.at(c, r1);
        let h11 = self.at(c1, r1);
        (h00 * (one - fx) + h10 * fx) * (one - fy) + (h01 * (one - fx) + h11 * fx) * fy
    }
}

/// Surface the rover drives on.
#[derive(Debug, Clone, PartialEq)]
pub enum Terrain<T> {
    Flat,
    /// Plane rising at `slope` rad towards `azimuth` (rad from +X toward +Y).
    Incline {
        slope: T,
        azimuth: T,
    },
    /// Ridges across X: `h = amplitude * sin(2 pi x / wavelength)`.
    Sinusoid {
        amplitude: T,
        wavelength: T,
    },
    Grid(HeightGrid<T>),
}

impl<T: Scalar> Terrain<T> {
    pub fn validate(&self) -> Result<(), TerrainError> {
        match self {
            Terrain::Flat | Terrain::Grid(_) => Ok(()),
            Terrain::Incline { slope, azimuth } => {
                if !slope.is_finite() || !azimuth.is_finite() || slope.abs() >= T::FRAC_PI_2() {
                    Err(TerrainError::Invalid(format!("incline slope {slope} out of range")))
                } else {
                    Ok(())
                }
            }
            Terrain::Sinusoid { amplitude, wavelength } => {
                if !amplitude.is_finite() || !(*wavelength > T::zero()) {
                    Err(TerrainError::Invalid(
                        "sinusoid needs finite amplitude and positive wavelength".into(),
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn height(&self, x: T, y: T) -> T {
        match self {
            Terrain::Flat => T::zero(),
            Terrain::Incline { slope, azimuth } => (x * azimuth.cos() + y * azimuth.sin()) * slope.tan(),
            Terrain::Sinusoid { amplitude, wavelength } => *amplitude * (T::TAU() * x / *wavelength).sin(),
            Terrain::Grid(g) => g.height(x, y),
        }
    }

    /// `(dh/dx, dh/dy)`. Analytic for the closed-form kinds; central
    /// difference with a one-cell step on grids.
    pub fn gradient(&self, x: T, y: T) -> (T, T) {
        match self {
            Terrain::Flat => (T::zero(), T::zero()),
            Terrain::Incline { slope, azimuth } => {
                let s = slope.tan();
                (s * azimuth.cos(), s * azimuth.sin())
            }
            Terrain::Sinusoid { amplitude, wavelength } => {
                let k = T::TAU() / *wavelength;
                (*amplitude * k * (k * x).cos(), T::zero())
            }
            Terrain::Grid(g) => {
                let h = g.cell;
                let two_h = h + h;
                (
                    (g.height(x + h, y) - g.height(x - h, y)) / two_h,
                    (g.height(x, y + h) - g.height(x, y - h)) / two_h,
                )
            }
        }
    }

    /// Kinematic `(roll, pitch)` of a rover at `(x, y)` heading `psi`.
    ///
    /// Pitch is `-atan` of the slope along the body X axis and roll is `atan`
    /// of the slope along the body Y axis `(sin psi, -cos psi)`.
    pub fn attitude(&self, x: T, y: T, psi: T) -> (T, T) {
        let (gx, gy) = self.gradient(x, y);
        let (s, c) = psi.sin_cos();
        let along = gx * c + gy * s;
        let across = gx * s - gy * c;
        (across.atan(), -along.atan())
    }

    pub fn cast<U: Scalar>(&self) -> Terrain<U> {
        match self {
            Terrain::Flat => Terrain::Flat,
            Terrain::Incline { slope, azimuth } => Terrain::Incline {
                slope: cast(*slope),
                azimuth: cast(*azimuth),
            },
            Terrain::Sinusoid { amplitude, wavelength } => Terrain::Sinusoid {
                amplitude: cast(*amplitude),
                wavelength: cast(*wavelength),
            },
            Terrain::Grid(g) => Terrain::Grid(HeightGrid {
                ncols: g.ncols,
                nrows: g.nrows,
                origin: (cast(g.origin.0), cast(g.origin.1)),
                cell: cast(g.cell),
                heights: g.heights.iter().map(|&h| cast(h)).collect(),
            }),
        }
    }
}

/// Loads an ESRI ASCII grid.
///
/// The first data line is the northern row. `NODATA_value` cells take the
/// height of their nearest valid cell (Euclidean in index space, ties to the
/// first in scan order).
pub fn load_ascii_grid<T: Scalar>(path: impl AsRef<Path>) -> Result<Terrain<T>, TerrainError> {
    let text = fs::read_to_string(path)?;
    parse_ascii_grid(&text)
}

pub fn parse_ascii_grid<T: Scalar>(text: &str) -> Result<Terrain<T>, TerrainError> {
    let mut ncols = None;
    let mut nrows = None;
    let mut x0 = None;
    let mut y0 = None;
    let mut centred = false;
    let mut cell = None;
    let mut nodata = None;

    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    while let Some((idx, line)) = lines.peek().copied() {
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        if !key.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            break;
        }
        lines.next();
        let line_no = idx + 1;
        let value = parts.next().ok_or_else(|| TerrainError::Parse {
            line: line_no,
            message: format!("header key `{key}` has no value"),
        })?;
        if parts.next().is_some() {
            return Err(TerrainError::Parse {
                line: line_no,
                message: format!("header key `{key}` has trailing tokens"),
            });
        }
        let num = |v: &str| -> Result<f64, TerrainError> {
            v.parse::<f64>().map_err(|_| TerrainError::Parse {
                line: line_no,
                message: format!("header `{key}` value `{v}` is not a number"),
            })
        };
        let count = |v: &str| -> Result<usize, TerrainError> {
            v.parse::<usize>().map_err(|_| TerrainError::Parse {
                line: line_no,
                message: format!("header `{key}` value `{v}` is not a positive integer"),
            })
        };
        match key.to_ascii_lowercase().as_str() {
            "ncols" => ncols = Some(count(value)?),
            "nrows" => nrows = Some(count(value)?),
            "xllcorner" => x0 = Some(num(value)?),
            "yllcorner" => y0 = Some(num(value)?),
            "xllcenter" => {
                x0 = Some(num(value)?);
                centred = true;
            }
            "yllcenter" => {
                y0 = Some(num(value)?);
                centred = true;
            }
            "cellsize" => cell = Some(num(value)?),
            "nodata_value" => nodata = Some(num(value)?),
            other => {
                return Err(TerrainError::Parse {
                    line: line_no,
                    message: format!("unknown header key `{other}`"),
                })
            }
        }
    }

    let missing = |k: &str| TerrainError::Parse {
        line: 1,
        message: format!("header is missing `{k}`"),
    };
    let ncols = ncols.ok_or_else(|| missing("ncols"))?;
    let nrows = nrows.ok_or_else(|| missing("nrows"))?;
    let x0 = x0.ok_or_else(|| missing("xllcorner"))?;
    let y0 = y0.ok_or_else(|| missing("yllcorner"))?;
    let cell = cell.ok_or_else(|| missing("cellsize"))?;
    if ncols == 0 || nrows == 0 {
        return Err(TerrainError::Parse {
            line: 1,
            message: "ncols and nrows must be positive".into(),
        });
    }
    if !(cell > 0.0) {
        return Err(TerrainError::Parse {
            line: 1,
            message: format!("cellsize {cell} must be positive"),
        });
    }

    // File rows run north to south.
    let mut file_rows: Vec<Vec<Option<f64>>> = Vec::with_capacity(nrows);
    let mut last_line = 0;
    for (idx, line) in lines {
        let line_no = idx + 1;
        last_line = line_no;
        if file_rows.len() == nrows {
            return Err(TerrainError::Parse {
                line: line_no,
                message: format!("more than nrows = {nrows} data rows"),
            });
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                let v = tok.parse::<f64>().map_err(|_| TerrainError::Parse {
                    line: line_no,
                    message: format!("cell value `{tok}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(TerrainError::Parse {
                        line: line_no,
                        message: format!("cell value `{tok}` is not finite"),
                    });
                }
                Ok((Some(v) != nodata).then_some(v))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != ncols {
            return Err(TerrainError::Parse {
                line: line_no,
                message: format!(
                    "row {} has {} values, expected ncols = {ncols}",
                    file_rows.len() + 1,
                    row.len()
                ),
            });
        }
        file_rows.push(row);
    }
    if file_rows.len() != nrows {
        return Err(TerrainError::Parse {
            line: last_line.max(1),
            message: format!("found {} data rows, expected nrows = {nrows}", file_rows.len()),
        });
    }

    file_rows.reverse();
    let cells: Vec<Option<f64>> = file_rows.into_iter().flatten().collect();
    let filled = fill_nodata(&cells, ncols, nrows).ok_or_else(|| TerrainError::Parse {
        line: 1,
        message: "every cell is NODATA".into(),
    })?;

    let shift = if centred { 0.0 } else { 0.5 * cell };
    let grid = HeightGrid::new(
        ncols,
        nrows,
        (lit(x0 + shift), lit(y0 + shift)),
        lit(cell),
        filled.into_iter().map(lit).collect(),
    )?;
    Ok(Terrain::Grid(grid))
}

fn fill_nodata(cells: &[Option<f64>], ncols: usize, nrows: usize) -> Option<Vec<f64>> {
    if cells.iter().all(Option::is_none) {
        return None;
    }
    let get = |c: isize, r: isize| -> Option<f64> {
        if c < 0 || r < 0 || c >= ncols as isize || r >= nrows as isize {
            None
        } else {
            cells[r as usize * ncols + c as usize]
        }
    };
    let out = cells
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if let Some(v) = v {
                return *v;
            }
            let (c0, r0) = ((i % ncols) as isize, (i / ncols) as isize);
            let mut best: Option<(isize, f64)> = None;
            let mut radius = 1isize;
            // Every cell on Chebyshev ring `radius` is at least `radius` away,
            // so once radius^2 exceeds the best distance the search is done.
            while best.is_none_or(|(d2, _)| radius * radius <= d2) {
                for dr in -radius..=radius {
                    for dc in -radius..=radius {
                        if dr.abs() != radius && dc.abs() != radius {
                            continue;
                        }
                        if let Some(h) = get(c0 + dc, r0 + dr) {
                            let d2 = dc * dc + dr * dr;
                            if best.is_none_or(|(b, _)| d2 < b) {
                                best = Some((d2, h));
                            }
                        }
                    }
                }
                radius += 1;
                if radius as usize > ncols.max(nrows) + 1 {
                    break;
                }
            }
            best.map(|(_, h)| h).unwrap_or_default()
        })
        .collect();
    Some(out)
}
