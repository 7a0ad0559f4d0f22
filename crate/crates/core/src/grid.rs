//! Gridded climate data model: cells on a fixed lat/lon lattice, one
//! seven-variable record per cell per year, rectangular over the year range.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::RegionAssignment;

/// Number of climate variables carried per record.
pub const VARIABLE_COUNT: usize = 7;

/// Absolute tolerance when snapping coordinates to the lattice.
const LATTICE_TOL: f64 = 1e-6;

/// The seven climate variables, in canonical vector order.
///
/// Every 7-vector in the crate (records, climatologies, mixture means) uses
/// this ordering, which matches the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClimateVariable {
    /// Air temperature, degrees Celsius.
    AirTemperature,
    /// Precipitable water, kg/m^2.
    PrecipitableWater,
    /// Precipitation, mm/day.
    Precipitation,
    /// Relative humidity, percent.
    RelativeHumidity,
    /// Sea-level pressure, hPa.
    SeaLevelPressure,
    /// Zonal wind, m/s.
    ZonalWind,
    /// Meridional wind, m/s.
    MeridionalWind,
}

impl ClimateVariable {
    pub const ALL: [ClimateVariable; VARIABLE_COUNT] = [
        ClimateVariable::AirTemperature,
        ClimateVariable::PrecipitableWater,
        ClimateVariable::Precipitation,
        ClimateVariable::RelativeHumidity,
        ClimateVariable::SeaLevelPressure,
        ClimateVariable::ZonalWind,
        ClimateVariable::MeridionalWind,
    ];

    /// Position in the canonical vector layout.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ClimateVariable::AirTemperature => "air_temperature",
            ClimateVariable::PrecipitableWater => "precipitable_water",
            ClimateVariable::Precipitation => "precipitation",
            ClimateVariable::RelativeHumidity => "relative_humidity",
            ClimateVariable::SeaLevelPressure => "sea_level_pressure",
            ClimateVariable::ZonalWind => "zonal_wind",
            ClimateVariable::MeridionalWind => "meridional_wind",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            ClimateVariable::AirTemperature => "°C",
            ClimateVariable::PrecipitableWater => "kg/m²",
            ClimateVariable::Precipitation => "mm/day",
            ClimateVariable::RelativeHumidity => "%",
            ClimateVariable::SeaLevelPressure => "hPa",
            ClimateVariable::ZonalWind => "m/s",
            ClimateVariable::MeridionalWind => "m/s",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }
}

impl fmt::Display for ClimateVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The CSV header every dataset file must carry, byte for byte.
pub const CSV_HEADER: &str = "lat,lon,year,air_temperature,precipitable_water,precipitation,relative_humidity,sea_level_pressure,zonal_wind,meridional_wind";

/// Opaque, dataset-scoped cell identifier.
///
/// Ids are assigned in (lat, lon) order during construction, so two datasets
/// built from the same rows in any order agree on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId(pub u32);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A grid cell: identifier plus lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub id: CellId,
    /// Degrees north, in [-90, 90].
    pub lat: f64,
    /// Degrees east, normalized to [0, 360).
    pub lon: f64,
}

/// One cell-year observation of all seven variables.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualRecord {
    pub cell: CellId,
    pub year: i32,
    pub values: [f64; VARIABLE_COUNT],
}

/// Per-cell long-term means over a stated year set.
#[derive(Debug, Clone, PartialEq)]
pub struct ClimatologyVector {
    pub cell: CellId,
    pub means: [f64; VARIABLE_COUNT],
}

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("duplicate record for cell ({lat}, {lon}) year {year}")]
    DuplicateRecord { lat: f64, lon: f64, year: i32 },
    #[error("line {line}: coordinates ({lat}, {lon}) are not on the {resolution}° lattice")]
    OffGrid {
        line: u64,
        lat: f64,
        lon: f64,
        resolution: f64,
    },
    #[error("ragged panel: cell ({lat}, {lon}) has no record for year {year}")]
    RaggedPanel { lat: f64, lon: f64, year: i32 },
    #[error("line {line}: non-finite value in column {column}")]
    NonFiniteValue { line: u64, column: String },
    #[error("input contains no data rows")]
    EmptyInput,
    #[error("year set is empty")]
    EmptyYearSet,
    #[error("year {year} outside dataset range [{first}, {last}]")]
    YearOutOfRange { year: i32, first: i32, last: i32 },
    #[error("invalid prediction horizon p={p}: need 1 <= p <= {max} (at least 2 training years)")]
    InvalidHorizon { p: usize, max: usize },
    #[error("cell {cell} is not covered by the region assignment")]
    UnassignedCell { cell: CellId },
    #[error("region {region} has no cells")]
    EmptyRegion { region: usize },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GridError {
    fn from(e: std::io::Error) -> Self {
        GridError::Io(e.to_string())
    }
}

/// One parsed input row; the shared entry into dataset validation.
#[derive(Debug, Clone)]
pub struct RawRow {
    pub lat: f64,
    pub lon: f64,
    pub year: i32,
    pub values: [f64; VARIABLE_COUNT],
    /// 1-based source line for diagnostics; 0 for generated rows.
    pub line: u64,
}

/// Immutable rectangular panel of annual records on a lat/lon lattice.
///
/// Safe to share across threads; all accessors are read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    cells: Vec<GridCell>,
    resolution: f64,
    first_year: i32,
    last_year: i32,
    /// Dense cell-major, year-minor storage: `values[cell * n_years + year_idx]`.
    values: Vec<[f64; VARIABLE_COUNT]>,
    /// Lattice index (lat_steps, lon_steps) -> cell index, for coordinate lookup.
    index: BTreeMap<(i64, i64), usize>,
}

fn lattice_index(value: f64, resolution: f64) -> Option<i64> {
    let steps = value / resolution;
    let rounded = steps.round();
    if (value - rounded * resolution).abs() <= LATTICE_TOL {
        Some(rounded as i64)
    } else {
        None
    }
}

/// Lattice key for normalized coordinates. Longitudes that snap to 360°
/// wrap to 0° when the resolution divides the circle.
fn lattice_key(lat: f64, lon: f64, resolution: f64) -> Option<(i64, i64)> {
    if !(-90.0..=90.0).contains(&lat) {
        return None;
    }
    let lat_steps = lattice_index(lat, resolution)?;
    let mut lon_steps = lattice_index(lon.rem_euclid(360.0), resolution)?;
    let circle = 360.0 / resolution;
    if (circle - circle.round()).abs() <= LATTICE_TOL {
        lon_steps = lon_steps.rem_euclid(circle.round() as i64);
    }
    Some((lat_steps, lon_steps))
}

impl Dataset {
    /// Validate and assemble rows into a dataset.
    ///
    /// Row order is irrelevant: cells are sorted by (lat, lon) and records
    /// keyed by (cell, year), so any permutation of the same rows yields an
    /// identical dataset.
    pub fn from_rows(rows: Vec<RawRow>, resolution: f64) -> Result<Self, GridError> {
        if rows.is_empty() {
            return Err(GridError::EmptyInput);
        }

        // (lat, lon) at lattice resolution -> per-year records for that cell.
        type CellRecords = (f64, f64, BTreeMap<i32, [f64; VARIABLE_COUNT]>);
        let mut keyed: BTreeMap<(i64, i64), CellRecords> = BTreeMap::new();
        let mut first_year = i32::MAX;
        let mut last_year = i32::MIN;

        for row in rows {
            let lon = row.lon.rem_euclid(360.0);
            let lat_ok = (-90.0..=90.0).contains(&row.lat);
            let key = match (
                lattice_index(row.lat, resolution),
                lattice_index(lon, resolution),
            ) {
                (Some(a), Some(b)) if lat_ok => (a, b),
                _ => {
                    return Err(GridError::OffGrid {
                        line: row.line,
                        lat: row.lat,
                        lon: row.lon,
                        resolution,
                    })
                }
            };
            for (i, v) in row.values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(GridError::NonFiniteValue {
                        line: row.line,
                        column: ClimateVariable::ALL[i].name().to_string(),
                    });
                }
            }
            let lat = key.0 as f64 * resolution;
            let lon = key.1 as f64 * resolution;
            let entry = keyed
                .entry(key)
                .or_insert_with(|| (lat, lon, BTreeMap::new()));
            if entry.2.insert(row.year, row.values).is_some() {
                return Err(GridError::DuplicateRecord {
                    lat,
                    lon,
                    year: row.year,
                });
            }
            first_year = first_year.min(row.year);
            last_year = last_year.max(row.year);
        }

        let n_years = (last_year - first_year + 1) as usize;
        let mut cells = Vec::with_capacity(keyed.len());
        let mut values = Vec::with_capacity(keyed.len() * n_years);
        let mut index = BTreeMap::new();
        for (i, (key, (lat, lon, records))) in keyed.into_iter().enumerate() {
            for year in first_year..=last_year {
                match records.get(&year) {
                    Some(v) => values.push(*v),
                    None => return Err(GridError::RaggedPanel { lat, lon, year }),
                }
            }
            if records.len() != n_years {
                // Extra years outside [first, last] are impossible; records
                // beyond n_years would mean a year outside the global range.
                return Err(GridError::RaggedPanel {
                    lat,
                    lon,
                    year: *records.keys().next_back().unwrap(),
                });
            }
            cells.push(GridCell {
                id: CellId(i as u32),
                lat,
                lon,
            });
            index.insert(key, i);
        }

        Ok(Dataset {
            cells,
            resolution,
            first_year,
            last_year,
            values,
            index,
        })
    }

    pub fn cells(&self) -> &[GridCell] {
        &self.cells
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_years(&self) -> usize {
        (self.last_year - self.first_year + 1) as usize
    }

    pub fn n_records(&self) -> usize {
        self.values.len()
    }

    pub fn year_range(&self) -> (i32, i32) {
        (self.first_year, self.last_year)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.first_year..=self.last_year
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cell(&self, id: CellId) -> Option<&GridCell> {
        self.cells.get(id.0 as usize)
    }

    /// Look a cell up by coordinates (lon may be un-normalized).
    pub fn find_cell(&self, lat: f64, lon: f64) -> Option<CellId> {
        let key = (
            lattice_index(lat, self.resolution)?,
            lattice_index(lon.rem_euclid(360.0), self.resolution)?,
        );
        self.index.get(&key).map(|&i| self.cells[i].id)
    }

    /// The record for one cell-year, if the year is in range.
    pub fn values(&self, cell: CellId, year: i32) -> Option<&[f64; VARIABLE_COUNT]> {
        if year < self.first_year || year > self.last_year {
            return None;
        }
        let cell_idx = cell.0 as usize;
        if cell_idx >= self.cells.len() {
            return None;
        }
        let year_idx = (year - self.first_year) as usize;
        Some(&self.values[cell_idx * self.n_years() + year_idx])
    }

    /// Materialized records in (cell, year) order.
    pub fn records(&self) -> impl Iterator<Item = AnnualRecord> + '_ {
        self.cells.iter().flat_map(move |c| {
            self.years().map(move |year| AnnualRecord {
                cell: c.id,
                year,
                values: *self.values(c.id, year).unwrap(),
            })
        })
    }

    fn check_years(&self, years: &[i32]) -> Result<BTreeSet<i32>, GridError> {
        if years.is_empty() {
            return Err(GridError::EmptyYearSet);
        }
        let set: BTreeSet<i32> = years.iter().copied().collect();
        for &y in &set {
            if y < self.first_year || y > self.last_year {
                return Err(GridError::YearOutOfRange {
                    year: y,
                    first: self.first_year,
                    last: self.last_year,
                });
            }
        }
        Ok(set)
    }
}

/// Parse and validate a dataset CSV (schema in [`CSV_HEADER`]).
pub fn ingest_csv<R: Read>(source: R, resolution: f64) -> Result<Dataset, GridError> {
    let reader = BufReader::new(source);
    let mut rows = Vec::new();
    let mut lines = reader.lines();

    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(GridError::EmptyInput),
    };
    if header.trim_end_matches('\r') != CSV_HEADER {
        return Err(GridError::MalformedRow {
            line: 1,
            reason: format!("header must be exactly `{CSV_HEADER}`"),
        });
    }

    for (i, line) in lines.enumerate() {
        let line_no = i as u64 + 2;
        let text = line?;
        let text = text.trim_end_matches('\r');
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 3 + VARIABLE_COUNT {
            return Err(GridError::MalformedRow {
                line: line_no,
                reason: format!(
                    "expected {} columns, found {}",
                    3 + VARIABLE_COUNT,
                    fields.len()
                ),
            });
        }
        let parse_f64 = |s: &str, what: &str| -> Result<f64, GridError> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| GridError::MalformedRow {
                    line: line_no,
                    reason: format!("cannot parse {what} from `{s}`"),
                })
        };
        let lat = parse_f64(fields[0], "lat")?;
        let lon = parse_f64(fields[1], "lon")?;
        let year: i32 = fields[2]
            .trim()
            .parse()
            .map_err(|_| GridError::MalformedRow {
                line: line_no,
                reason: format!("cannot parse year from `{}`", fields[2]),
            })?;
        let mut values = [0.0; VARIABLE_COUNT];
        for (v, (field, var)) in values
            .iter_mut()
            .zip(fields[3..].iter().zip(ClimateVariable::ALL))
        {
            *v = parse_f64(field, var.name())?;
        }
        rows.push(RawRow {
            lat,
            lon,
            year,
            values,
            line: line_no,
        });
    }

    Dataset::from_rows(rows, resolution)
}

/// Write a dataset in the canonical CSV form: header, then rows sorted by
/// (lat, lon, year), floats in shortest round-trip notation, LF newlines.
pub fn write_dataset_csv<W: Write>(ds: &Dataset, mut w: W) -> Result<(), GridError> {
    writeln!(w, "{CSV_HEADER}")?;
    for rec in ds.records() {
        let cell = ds.cell(rec.cell).unwrap();
        write!(w, "{},{},{}", cell.lat, cell.lon, rec.year)?;
        for v in rec.values {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Per-cell arithmetic means of every variable over the given years.
pub fn long_term_means(ds: &Dataset, years: &[i32]) -> Result<Vec<ClimatologyVector>, GridError> {
    let years = ds.check_years(years)?;
    let count = years.len() as f64;
    Ok(ds
        .cells()
        .iter()
        .map(|c| {
            let mut means = [0.0; VARIABLE_COUNT];
            for &y in &years {
                let values = ds.values(c.id, y).unwrap();
                for (m, v) in means.iter_mut().zip(values) {
                    *m += v;
                }
            }
            for m in &mut means {
                *m /= count;
            }
            ClimatologyVector { cell: c.id, means }
        })
        .collect())
}

/// Climatology export: `lat,lon,<7 variable mean columns>`.
pub fn write_climatology_csv<W: Write>(
    ds: &Dataset,
    climatology: &[ClimatologyVector],
    mut w: W,
) -> Result<(), GridError> {
    write!(w, "lat,lon")?;
    for var in ClimateVariable::ALL {
        write!(w, ",{}", var.name())?;
    }
    writeln!(w)?;
    for cv in climatology {
        let cell = ds.cell(cv.cell).unwrap();
        write!(w, "{},{}", cell.lat, cell.lon)?;
        for m in cv.means {
            write!(w, ",{m}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Split the year range into training years and the final `p` test years.
pub fn split_years(ds: &Dataset, p: usize) -> Result<(Vec<i32>, Vec<i32>), GridError> {
    let j = ds.n_years();
    if p < 1 || p + 2 > j {
        return Err(GridError::InvalidHorizon {
            p,
            max: j.saturating_sub(2),
        });
    }
    let cut = ds.first_year + (j - p) as i32;
    let train = (ds.first_year..cut).collect();
    let test = (cut..=ds.last_year).collect();
    Ok((train, test))
}

/// Mean vector over each region's cells, per year: entry `(region, year)`.
pub fn regional_annual_means(
    ds: &Dataset,
    assignment: &RegionAssignment,
    years: &[i32],
) -> Result<BTreeMap<(usize, i32), [f64; VARIABLE_COUNT]>, GridError> {
    let years = ds.check_years(years)?;
    let k = assignment.region_count();

    let mut members: Vec<Vec<CellId>> = vec![Vec::new(); k];
    for c in ds.cells() {
        let region = assignment
            .region_of(c.id)
            .ok_or(GridError::UnassignedCell { cell: c.id })?;
        members[region].push(c.id);
    }
    if let Some(region) = members.iter().position(|m| m.is_empty()) {
        return Err(GridError::EmptyRegion { region });
    }

    let mut out = BTreeMap::new();
    for (region, cells) in members.iter().enumerate() {
        for &y in &years {
            let mut mean = [0.0; VARIABLE_COUNT];
            for &cell in cells {
                let values = ds.values(cell, y).unwrap();
                for (m, v) in mean.iter_mut().zip(values) {
                    *m += v;
                }
            }
            for m in &mut mean {
                *m /= cells.len() as f64;
            }
            out.insert((region, y), mean);
        }
    }
    Ok(out)
}
