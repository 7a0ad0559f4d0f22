//! Labeled synthetic climate datasets: draw per-cell climatological means
//! from configured Gaussian components, add year-to-year noise, optionally
//! plant a known target relation. Because the component of every cell is
//! recorded, clustering recovery and prediction error are verifiable
//! against ground truth.

use std::collections::BTreeMap;
use std::io::Write;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{CellId, ClimateVariable, Dataset, GridError, RawRow, VARIABLE_COUNT};
use crate::seeding::rng_from;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("label maps cover different key sets")]
    KeyMismatch,
    #[error("label maps need at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// One mixture component of the generator: climatological mean and
/// cell-to-cell spread per variable, plus how many cells it populates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub mean: [f64; VARIABLE_COUNT],
    pub std: [f64; VARIABLE_COUNT],
    pub cells: usize,
}

/// Optional planted relation that overwrites the target variable as a
/// function of the co-observed variables (plus observation noise).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetRelation {
    #[default]
    None,
    Linear {
        target: ClimateVariable,
        intercept: f64,
        coefficients: Vec<(ClimateVariable, f64)>,
    },
    Sinusoidal {
        target: ClimateVariable,
        amplitude: f64,
        frequency: f64,
        predictor: ClimateVariable,
        #[serde(default)]
        offset: f64,
    },
}

impl TargetRelation {
    pub fn target(&self) -> Option<ClimateVariable> {
        match self {
            TargetRelation::None => None,
            TargetRelation::Linear { target, .. } | TargetRelation::Sinusoidal { target, .. } => {
                Some(*target)
            }
        }
    }
}

/// Lattice placement for generated cells: row-major from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    pub lat_start: f64,
    pub lon_start: f64,
    pub columns: usize,
    pub resolution: f64,
}

impl Default for GridLayout {
    fn default() -> Self {
        // 13 columns at 2.5°: the window 7.5–37.5N, 67.5–97.5E holds
        // 169 cells.
        GridLayout {
            lat_start: 7.5,
            lon_start: 67.5,
            columns: 13,
            resolution: 2.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub components: Vec<ComponentSpec>,
    /// Inclusive calendar year range.
    pub years: (i32, i32),
    #[serde(default)]
    pub target_relation: TargetRelation,
    /// Observation noise added to the planted target.
    #[serde(default)]
    pub noise_sigma: f64,
    /// Per-variable standard deviation of independent year-to-year noise
    /// around each cell's climatological mean.
    #[serde(default = "zero_noise")]
    pub year_noise: [f64; VARIABLE_COUNT],
    pub seed: u64,
    #[serde(default)]
    pub grid: GridLayout,
}

fn zero_noise() -> [f64; VARIABLE_COUNT] {
    [0.0; VARIABLE_COUNT]
}

/// Reference mixture means for the seven-region default generator, in
/// canonical variable order. One column per climate region over the Indian
/// window: montane-new, semi-arid, tropical wet-and-dry, arid, montane,
/// tropical wet, humid subtropical.
const SEVEN_REGION_MEANS: [[f64; VARIABLE_COUNT]; 7] = [
    // montane-new
    [12.44, 18.86, 4.8, 81.96, 1011.07, 0.69, 1.02],
    // semi-arid
    [27.04, 41.32, 3.1, 76.73, 1008.87, 0.94, 1.63],
    // tropical wet and dry
    [25.79, 29.19, 2.57, 53.05, 1008.08, 0.57, -0.36],
    // arid
    [25.81, 22.02, 0.67, 35.19, 1007.8, 1.1, 0.88],
    // montane
    [-2.54, 6.31, 2.36, 78.81, 1015.22, 2.99, 1.82],
    // tropical wet
    [26.83, 38.01, 3.03, 75.51, 1009.76, 2.67, -1.01],
    // humid subtropical
    [24.8, 37.61, 6.4, 74.5, 1009.43, 0.69, 0.54],
];

impl GeneratorSpec {
    /// The built-in seven-region reference spec: 169 cells over the default
    /// window, years 1948–2012. Per-variable cell spread is 25% of the
    /// across-region standard deviation of that variable's seven means
    /// (regions overlap but stay separable); year-to-year noise matches the
    /// cell spread.
    pub fn seven_region_reference(seed: u64) -> Self {
        let mut std = [0.0; VARIABLE_COUNT];
        for (v, s) in std.iter_mut().enumerate() {
            let mean: f64 = SEVEN_REGION_MEANS.iter().map(|m| m[v]).sum::<f64>() / 7.0;
            let var: f64 = SEVEN_REGION_MEANS
                .iter()
                .map(|m| (m[v] - mean) * (m[v] - mean))
                .sum::<f64>()
                / 7.0;
            *s = 0.25 * var.sqrt();
        }
        // 169 cells split as evenly as seven ways allows.
        let counts = [25, 24, 24, 24, 24, 24, 24];
        let components = SEVEN_REGION_MEANS
            .iter()
            .zip(counts)
            .map(|(mean, cells)| ComponentSpec {
                mean: *mean,
                std,
                cells,
            })
            .collect();
        GeneratorSpec {
            components,
            years: (1948, 2012),
            target_relation: TargetRelation::None,
            noise_sigma: 0.0,
            year_noise: std,
            seed,
            grid: GridLayout::default(),
        }
    }

    pub fn total_cells(&self) -> usize {
        self.components.iter().map(|c| c.cells).sum()
    }

    fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: &str| Err(SynthError::InvalidSpec(msg.to_string()));
        if self.components.is_empty() {
            return fail("no components");
        }
        if self.components.iter().any(|c| c.cells == 0) {
            return fail("every component needs at least one cell");
        }
        for c in &self.components {
            if c.std.iter().any(|s| !(s.is_finite() && *s >= 0.0))
                || c.mean.iter().any(|m| !m.is_finite())
            {
                return fail("component means must be finite and spreads nonnegative");
            }
        }
        if self.years.0 > self.years.1 {
            return fail("year range is reversed");
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return fail("noise_sigma must be nonnegative");
        }
        if self
            .year_noise
            .iter()
            .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return fail("year_noise must be nonnegative");
        }
        if self.grid.columns == 0 || self.grid.resolution <= 0.0 {
            return fail("grid needs positive resolution and at least one column");
        }
        let rows = self.total_cells().div_ceil(self.grid.columns);
        let max_lat = self.grid.lat_start + self.grid.resolution * (rows - 1) as f64;
        if max_lat > 90.0 || self.grid.lat_start < -90.0 {
            return fail("cell layout exceeds the latitude range");
        }
        match &self.target_relation {
            TargetRelation::None => {}
            TargetRelation::Linear {
                target,
                coefficients,
                ..
            } => {
                if coefficients.iter().any(|(v, _)| v == target) {
                    return fail("linear relation uses the target as a predictor");
                }
            }
            TargetRelation::Sinusoidal {
                target, predictor, ..
            } => {
                if target == predictor {
                    return fail("sinusoidal relation uses the target as its predictor");
                }
            }
        }
        Ok(())
    }
}

/// A generated dataset plus the component each cell was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub dataset: Dataset,
    pub true_labels: BTreeMap<CellId, usize>,
    pub generator: GeneratorSpec,
}

/// Generate a labeled dataset from the spec. Deterministic: the same spec
/// (including seed) always produces the identical dataset.
pub fn generate(spec: &GeneratorSpec) -> Result<LabeledDataset, SynthError> {
    spec.validate()?;
    let mut rng = rng_from(spec.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let layout = &spec.grid;

    let mut rows = Vec::new();
    let mut placements = Vec::new();
    let mut cell_index = 0usize;
    for (component, c) in spec.components.iter().enumerate() {
        for _ in 0..c.cells {
            let lat = layout.lat_start + layout.resolution * (cell_index / layout.columns) as f64;
            let lon = layout.lon_start + layout.resolution * (cell_index % layout.columns) as f64;
            placements.push((lat, lon, component));
            cell_index += 1;

            let mut cell_mean = [0.0; VARIABLE_COUNT];
            for (v, m) in cell_mean.iter_mut().enumerate() {
                *m = c.mean[v] + c.std[v] * unit.sample(&mut rng);
            }
            for year in spec.years.0..=spec.years.1 {
                let mut values = cell_mean;
                for (v, val) in values.iter_mut().enumerate() {
                    *val += spec.year_noise[v] * unit.sample(&mut rng);
                }
                if let Some(target) = spec.target_relation.target() {
                    let planted = match &spec.target_relation {
                        TargetRelation::Linear {
                            intercept,
                            coefficients,
                            ..
                        } => {
                            intercept
                                + coefficients
                                    .iter()
                                    .map(|(v, w)| w * values[v.index()])
                                    .sum::<f64>()
                        }
                        TargetRelation::Sinusoidal {
                            amplitude,
                            frequency,
                            predictor,
                            offset,
                            ..
                        } => offset + amplitude * (frequency * values[predictor.index()]).sin(),
                        TargetRelation::None => unreachable!(),
                    };
                    values[target.index()] = planted + spec.noise_sigma * unit.sample(&mut rng);
                }
                rows.push(RawRow {
                    lat,
                    lon,
                    year,
                    values,
                    line: 0,
                });
            }
        }
    }

    let dataset = Dataset::from_rows(rows, layout.resolution)?;
    let mut true_labels = BTreeMap::new();
    for (lat, lon, component) in placements {
        let id = dataset
            .find_cell(lat, lon)
            .expect("generated cell must exist");
        true_labels.insert(id, component);
    }
    Ok(LabeledDataset {
        dataset,
        true_labels,
        generator: spec.clone(),
    })
}

/// Labels sidecar: `lat,lon,true_region`, one row per cell.
pub fn write_labels_csv<W: Write>(labeled: &LabeledDataset, mut w: W) -> Result<(), SynthError> {
    writeln!(w, "lat,lon,true_region").map_err(GridError::from)?;
    for (&cell, &label) in &labeled.true_labels {
        let c = labeled.dataset.cell(cell).expect("labeled cell exists");
        writeln!(w, "{},{},{label}", c.lat, c.lon).map_err(GridError::from)?;
    }
    Ok(())
}

/// Adjusted Rand index between two labelings of the same items:
/// chance-corrected pair-counting agreement, 1 for identical partitions up
/// to relabeling.
pub fn adjusted_rand_index(
    a: &BTreeMap<CellId, usize>,
    b: &BTreeMap<CellId, usize>,
) -> Result<f64, SynthError> {
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        return Err(SynthError::KeyMismatch);
    }
    if a.len() < 2 {
        return Err(SynthError::TooFewItems(a.len()));
    }
    let xs: Vec<usize> = a.values().copied().collect();
    let ys: Vec<usize> = b.values().copied().collect();
    Ok(adjusted_rand_index_labels(&xs, &ys))
}

/// ARI over parallel label slices (items matched by position).
pub fn adjusted_rand_index_labels(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "label slices must align");
    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut row_sums: BTreeMap<usize, u64> = BTreeMap::new();
    let mut col_sums: BTreeMap<usize, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *row_sums.entry(x).or_default() += 1;
        *col_sums.entry(y).or_default() += 1;
    }
    let choose2 = |n: u64| (n * (n - 1) / 2) as f64;
    let index: f64 = table.values().map(|&n| choose2(n)).sum();
    let row_index: f64 = row_sums.values().map(|&n| choose2(n)).sum();
    let col_index: f64 = col_sums.values().map(|&n| choose2(n)).sum();
    let total = choose2(a.len() as u64);
    let expected = row_index * col_index / total;
    let max_index = 0.5 * (row_index + col_index);
    if max_index == expected {
        // Both partitions trivial (all-singletons or single cluster):
        // they agree exactly.
        return 1.0;
    }
    (index - expected) / (max_index - expected)
}
