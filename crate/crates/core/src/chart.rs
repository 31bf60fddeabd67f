//! Charts and chart-anchored geometric values.
//!
//! A single fixed chart per scenario is enough for every system in this
//! library; angle coordinates are stored unwrapped in ℝ (covering-space
//! convention), so coordinate differences never cross a branch cut. Domain
//! constraints are per-coordinate positivity bounds (e.g. a radius `r > 0`).

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    id: String,
    dim: usize,
    /// Indices of coordinates constrained to be strictly positive.
    positive: Vec<usize>,
}

impl Chart {
    /// Unconstrained chart of dimension `dim`.
    pub fn euclidean(id: impl Into<String>, dim: usize) -> Self {
        Chart {
            id: id.into(),
            dim,
            positive: Vec::new(),
        }
    }

    /// Adds a strict positivity constraint on coordinate `index`.
    pub fn with_positive(mut self, index: usize) -> Self {
        assert!(index < self.dim);
        if !self.positive.contains(&index) {
            self.positive.push(index);
        }
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positive_indices(&self) -> &[usize] {
        &self.positive
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim
            && self.positive.iter().all(|&i| coords[i] > 0.0)
            && coords.iter().all(|c| c.is_finite())
    }

    /// Checks coordinates against the chart; `context` names the caller's probe.
    pub fn check_coords(&self, coords: &[f64], context: &str) -> Result<()> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch {
                chart: self.id.clone(),
                expected: self.dim,
                got: coords.len(),
            });
        }
        for (index, &value) in coords.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::ChartDomain {
                    chart: self.id.clone(),
                    index,
                    value,
                    constraint: "finite".into(),
                    context: context.into(),
                });
            }
        }
        for &index in &self.positive {
            if coords[index] <= 0.0 {
                return Err(Error::ChartDomain {
                    chart: self.id.clone(),
                    index,
                    value: coords[index],
                    constraint: "> 0".into(),
                    context: context.into(),
                });
            }
        }
        Ok(())
    }

    pub fn check_point(&self, p: &ChartPoint, context: &str) -> Result<()> {
        if p.chart_id != self.id {
            return Err(Error::Config(format!(
                "point on chart '{}' used with chart '{}'",
                p.chart_id, self.id
            )));
        }
        self.check_coords(&p.coords, context)
    }

    pub fn point(&self, coords: Vec<f64>) -> Result<ChartPoint> {
        self.check_coords(&coords, "construction")?;
        Ok(ChartPoint {
            chart_id: self.id.clone(),
            coords,
        })
    }
}

/// Coordinates of a configuration q in a fixed chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub chart_id: String,
    pub coords: Vec<f64>,
}

impl ChartPoint {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Coordinates of a covector α ∈ T*_q Q at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector {
    pub coords: Vec<f64>,
    pub base: ChartPoint,
}

/// Coordinates of a tangent vector δq ∈ T_q Q at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub coords: Vec<f64>,
    pub base: ChartPoint,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positivity_constraint() {
        let chart = Chart::euclidean("radial", 2).with_positive(0);
        assert!(chart.contains(&[0.5, -3.0]));
        assert!(!chart.contains(&[-0.5, 0.0]));
        assert!(!chart.contains(&[0.0, 0.0]));
        let err = chart
            .check_coords(&[-1.0, 0.0], "probe x-1e-5")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("probe x-1e-5") && msg.contains("> 0"));
    }

    #[test]
    fn dimension_mismatch() {
        let chart = Chart::euclidean("plane", 2);
        assert!(matches!(
            chart.check_coords(&[1.0], "test"),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
