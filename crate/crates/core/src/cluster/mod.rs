//! Climate regionalization: Gaussian-mixture EM with CV-selected component
//! count, and a k-means baseline. Both operate on standardized points and
//! store the scaler in the fitted model.

mod em;
mod kmeans;

pub use em::{
    assign_hard, e_step, em_fit, em_fit_with_trace, log_likelihood, m_step, select_k_cv, EmConfig,
    GaussianComponent, MixtureModel, SelectKConfig,
};
pub use kmeans::{kmeans_assign, kmeans_fit, kmeans_fit_with_trace, KMeansConfig, KMeansModel};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::grid::CellId;
use crate::scale::ScaleError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ClusterError {
    #[error("too few points: need {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("component {component} degenerated: weight {weight:e} underflowed")]
    DegenerateComponent { component: usize, weight: f64 },
    #[error("region label {label} out of range for {count} regions")]
    LabelOutOfRange { label: usize, count: usize },
    #[error("labels ({labels}) and cells ({cells}) differ in length")]
    LabelLengthMismatch { labels: usize, cells: usize },
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

/// Hard partition of grid cells into `region_count` regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionAssignment {
    labels: BTreeMap<CellId, usize>,
    region_count: usize,
}

impl RegionAssignment {
    pub fn from_labels(
        cells: &[CellId],
        labels: &[usize],
        region_count: usize,
    ) -> Result<Self, ClusterError> {
        if cells.len() != labels.len() {
            return Err(ClusterError::LabelLengthMismatch {
                labels: labels.len(),
                cells: cells.len(),
            });
        }
        let mut map = BTreeMap::new();
        for (&cell, &label) in cells.iter().zip(labels) {
            if label >= region_count {
                return Err(ClusterError::LabelOutOfRange {
                    label,
                    count: region_count,
                });
            }
            map.insert(cell, label);
        }
        Ok(RegionAssignment {
            labels: map,
            region_count,
        })
    }

    pub fn region_of(&self, cell: CellId) -> Option<usize> {
        self.labels.get(&cell).copied()
    }

    pub fn region_count(&self) -> usize {
        self.region_count
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// (cell, region) pairs in cell order.
    pub fn iter(&self) -> impl Iterator<Item = (CellId, usize)> + '_ {
        self.labels.iter().map(|(&c, &r)| (c, r))
    }

    pub fn cells_in_region(&self, region: usize) -> Vec<CellId> {
        self.labels
            .iter()
            .filter(|(_, &r)| r == region)
            .map(|(&c, _)| c)
            .collect()
    }

    pub fn region_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.region_count];
        for &r in self.labels.values() {
            sizes[r] += 1;
        }
        sizes
    }
}
