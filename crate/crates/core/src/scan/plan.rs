use serde::{Deserialize, Serialize};

use super::ScanError;

const MAX_POINTS: usize = 10_000_000;

/// Uniform commanded grid of stage positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPlan {
    pub center_position: f64,
    pub span: f64,
    pub step: f64,
    /// Seconds per point.
    pub integration_time: f64,
}

/// Validates and builds a plan. The endpoints are both included, so a
/// 120 µm span at 0.24 µm steps gives 501 points.
pub fn build_scan_plan(
    center: f64,
    span: f64,
    step: f64,
    integration_time: f64,
) -> Result<ScanPlan, ScanError> {
    let plan = ScanPlan {
        center_position: center,
        span,
        step,
        integration_time,
    };
    plan.validate()?;
    Ok(plan)
}

impl ScanPlan {
    pub fn validate(&self) -> Result<(), ScanError> {
        if !self.center_position.is_finite() {
            return Err(ScanError::Domain("scan center must be finite".into()));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(ScanError::Domain(format!("step must be positive, got {}", self.step)));
        }
        if !(self.span >= self.step) || !self.span.is_finite() {
            return Err(ScanError::Domain(format!(
                "span {} must be at least one step {}",
                self.span, self.step
            )));
        }
        if !(self.integration_time > 0.0) || !self.integration_time.is_finite() {
            return Err(ScanError::Domain(format!(
                "integration time must be positive, got {}",
                self.integration_time
            )));
        }
        let intervals = self.span / self.step;
        if intervals >= MAX_POINTS as f64 {
            return Err(ScanError::Domain(format!(
                "span/step = {intervals:.3e} exceeds the {MAX_POINTS} point limit"
            )));
        }
        Ok(())
    }

    /// floor(span/step) + 1, tolerant to rounding in the ratio.
    pub fn point_count(&self) -> usize {
        let ratio = self.span / self.step;
        let nearest = ratio.round();
        let intervals = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            ratio.floor()
        };
        intervals as usize + 1
    }

    /// Commanded positions, symmetric about the center.
    pub fn commanded_positions(&self) -> Vec<f64> {
        let n = self.point_count();
        let first = self.center_position - 0.5 * (n - 1) as f64 * self.step;
        (0..n).map(|i| first + i as f64 * self.step).collect()
    }

    /// Pure integration time of one scan in seconds.
    pub fn duration(&self) -> f64 {
        self.point_count() as f64 * self.integration_time
    }

    pub fn with_center(&self, center: f64) -> Self {
        Self {
            center_position: center,
            ..*self
        }
    }

    /// Same span sampled with `points` points.
    pub fn with_point_count(&self, points: usize) -> Result<Self, ScanError> {
        if points < 2 {
            return Err(ScanError::Domain("a scan needs at least two points".into()));
        }
        let plan = Self {
            step: self.span / (points - 1) as f64,
            ..*self
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Lowest and highest commanded positions.
    pub fn window(&self) -> (f64, f64) {
        let half = 0.5 * (self.point_count() - 1) as f64 * self.step;
        (self.center_position - half, self.center_position + half)
    }
}
