//! Action-conditioned transition matrices over map units.

use crate::error::{check_dim, check_finite, Error, Result};
use crate::som::UnitIndex;

/// Index of a discrete action, `0..K`.
pub type ActionId = usize;

/// Result of a mode prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModePrediction {
    pub unit: UnitIndex,
    /// The winner's column is all zeros; `unit` is the lowest-index fallback.
    pub unlearned: bool,
}

/// One real `N x N` matrix per action; `T_a(to, from)` is stored row-major at `to * N + from`.
///
/// Entries are unconstrained: the least-squares rule never normalizes columns and
/// mode prediction only needs the argmax.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionModel {
    units: usize,
    matrices: Vec<Vec<f64>>,
}

impl TransitionModel {
    pub fn zeros(units: usize, actions: usize) -> Self {
        Self {
            units,
            matrices: vec![vec![0.0; units * units]; actions],
        }
    }

    pub fn from_matrices(units: usize, matrices: Vec<Vec<f64>>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidInput("at least one action is required".into()));
        }
        for m in &matrices {
            check_dim(units * units, m.len())?;
            check_finite(m, "transition matrix")?;
        }
        Ok(Self { units, matrices })
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn action_count(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrix(&self, action: ActionId) -> Result<&[f64]> {
        self.matrices
            .get(action)
            .map(Vec::as_slice)
            .ok_or_else(|| self.bad_action(action))
    }

    pub fn entry(&self, action: ActionId, to: UnitIndex, from: UnitIndex) -> f64 {
        self.matrices[action][to * self.units + from]
    }

    pub fn matrices(&self) -> &[Vec<f64>] {
        &self.matrices
    }

    fn bad_action(&self, action: ActionId) -> Error {
        Error::InvalidInput(format!(
            "action {action} outside 0..{}",
            self.matrices.len()
        ))
    }

    /// `T_a * p`, not renormalized.
    pub fn predict_density(&self, action: ActionId, p: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.units, p.len())?;
        let t = self.matrix(action)?;
        Ok(sparse_product(t, self.units, p, &support(p)))
    }

    /// One least-squares gradient step on `||p_next - T_a p||^2`:
    /// `T_a += gamma * (p_next - T_a p) p^T`.
    ///
    /// Returns the squared residual measured before the step.
    pub fn learn(
        &mut self,
        action: ActionId,
        p: &[f64],
        p_next: &[f64],
        gamma: f64,
    ) -> Result<f64> {
        check_dim(self.units, p.len())?;
        check_dim(self.units, p_next.len())?;
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("learning rate {gamma} must be >= 0")));
        }
        let units = self.units;
        let nz = support(p);
        let predicted = sparse_product(self.matrix(action)?, units, p, &nz);
        let residual: Vec<f64> = p_next.iter().zip(&predicted).map(|(a, b)| a - b).collect();
        let residual_sq = residual.iter().map(|r| r * r).sum();
        if gamma == 0.0 {
            return Ok(residual_sq);
        }
        let t = &mut self.matrices[action];
        for (row, r) in t.chunks_exact_mut(units).zip(&residual) {
            let scale = gamma * r;
            if scale == 0.0 {
                continue;
            }
            for &j in &nz {
                row[j] += scale * p[j];
            }
        }
        Ok(residual_sq)
    }

    /// Most likely successor of `winner` under `action`, never `winner` itself
    /// (except on a single-unit map, where no other unit exists).
    ///
    /// Ties go to the lowest index.
    pub fn predict_mode(&self, action: ActionId, winner: UnitIndex) -> Result<ModePrediction> {
        if winner >= self.units {
            return Err(Error::InvalidInput(format!(
                "unit {winner} outside a map of {} units",
                self.units
            )));
        }
        let t = self.matrix(action)?;
        let mut best: Option<(UnitIndex, f64)> = None;
        for to in (0..self.units).filter(|&s| s != winner) {
            let v = t[to * self.units + winner];
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((to, v));
            }
        }
        Ok(match best {
            Some((unit, v)) => ModePrediction {
                unit,
                unlearned: v == 0.0 && (0..self.units).all(|s| t[s * self.units + winner] == 0.0),
            },
            None => ModePrediction {
                unit: winner,
                unlearned: true,
            },
        })
    }
}

/// `T * p` over the nonzero entries of `p`, summed in index order.
fn sparse_product(t: &[f64], units: usize, p: &[f64], support: &[usize]) -> Vec<f64> {
    t.chunks_exact(units)
        .map(|row| support.iter().map(|&j| row[j] * p[j]).sum())
        .collect()
}

fn support(p: &[f64]) -> Vec<usize> {
    (0..p.len()).filter(|&j| p[j] != 0.0).collect()
}
