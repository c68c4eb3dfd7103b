//! Rectangular Kohonen map over environment states.
//!
//! The map serves both directions of the state representation: [`SomMap::find_winner`]
//! recognizes an input as a unit, [`SomMap::decode`] turns a unit back into the input
//! it predicts (its codebook vector). The activation pattern around the winner, normalized,
//! is the recognition density used by the transition model.

use rand::Rng;

use crate::error::{check_dim, check_finite, Error, Result};

/// Lower bound on the neighbourhood width, in grid units.
///
/// The adaptive width collapses to zero when an input matches a codebook exactly.
pub const SIGMA_FLOOR: f64 = 1e-3;

/// Activations below this (relative to the winner's 1.0) are set to exactly zero.
///
/// Keeps densities sparse and free of subnormal floats; the truncated mass is far below
/// the 1e-9 normalization tolerance.
pub const ACTIVATION_CUTOFF: f64 = 1e-12;

/// Row-major linear index of a map unit.
pub type UnitIndex = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MapGeometry {
    rows: usize,
    cols: usize,
}

impl MapGeometry {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "map geometry must be at least 1x1, got {rows}x{cols}"
            )));
        }
        Ok(Self { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn units(&self) -> usize {
        self.rows * self.cols
    }

    /// Length of the grid diagonal, `sqrt(rows^2 + cols^2)`.
    pub fn diameter(&self) -> f64 {
        ((self.rows * self.rows + self.cols * self.cols) as f64).sqrt()
    }

    pub fn coords(&self, unit: UnitIndex) -> (usize, usize) {
        (unit / self.cols, unit % self.cols)
    }

    pub fn index(&self, row: usize, col: usize) -> Option<UnitIndex> {
        (row < self.rows && col < self.cols).then_some(row * self.cols + col)
    }

    /// Squared Euclidean distance between two units' grid coordinates. No wraparound.
    pub fn grid_distance_sq(&self, a: UnitIndex, b: UnitIndex) -> f64 {
        let (ar, ac) = self.coords(a);
        let (br, bc) = self.coords(b);
        let dr = ar as f64 - br as f64;
        let dc = ac as f64 - bc as f64;
        dr * dr + dc * dc
    }
}

/// Winner lookup together with the distance statistics the adaptive width needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Match {
    pub winner: UnitIndex,
    /// Distance from the input to the winner's codebook (the quantization error).
    pub min_distance: f64,
    pub mean_distance: f64,
}

impl Match {
    /// `sigma0 * min / mean`, floored at [`SIGMA_FLOOR`].
    pub fn adaptive_width(&self, sigma0: f64) -> f64 {
        if self.mean_distance <= 0.0 {
            return SIGMA_FLOOR;
        }
        (sigma0 * self.min_distance / self.mean_distance).max(SIGMA_FLOOR)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SomMap {
    geometry: MapGeometry,
    dim: usize,
    // unit-major: codebook[unit * dim .. (unit + 1) * dim]
    codebook: Vec<f64>,
}

impl SomMap {
    /// Map with every codebook at the origin.
    pub fn zeros(geometry: MapGeometry, dim: usize) -> Self {
        Self {
            geometry,
            dim,
            codebook: vec![0.0; geometry.units() * dim],
        }
    }

    /// Codebooks drawn uniformly from `[-half_range, half_range]^dim`.
    pub fn random_uniform<R: Rng + ?Sized>(
        geometry: MapGeometry,
        dim: usize,
        half_range: f64,
        rng: &mut R,
    ) -> Self {
        let codebook = (0..geometry.units() * dim)
            .map(|_| {
                if half_range > 0.0 {
                    rng.random_range(-half_range..=half_range)
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            geometry,
            dim,
            codebook,
        }
    }

    pub fn from_codebook(geometry: MapGeometry, dim: usize, codebook: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("input dimension must be positive".into()));
        }
        check_dim(geometry.units() * dim, codebook.len())?;
        check_finite(&codebook, "codebook")?;
        Ok(Self {
            geometry,
            dim,
            codebook,
        })
    }

    pub fn geometry(&self) -> MapGeometry {
        self.geometry
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn units(&self) -> usize {
        self.geometry.units()
    }

    pub fn codebook(&self) -> &[f64] {
        &self.codebook
    }

    fn weights(&self, unit: UnitIndex) -> &[f64] {
        &self.codebook[unit * self.dim..(unit + 1) * self.dim]
    }

    fn check_input(&self, u: &[f64]) -> Result<()> {
        check_dim(self.dim, u.len())?;
        check_finite(u, "input state")
    }

    /// Winner plus min/mean codebook distances, in a single scan.
    ///
    /// Ties go to the lowest linear index.
    pub fn match_input(&self, u: &[f64]) -> Result<Match> {
        self.check_input(u)?;
        let mut winner = 0;
        let mut best_sq = f64::INFINITY;
        let mut total = 0.0;
        for (unit, w) in self.codebook.chunks_exact(self.dim).enumerate() {
            let d_sq: f64 = w.iter().zip(u).map(|(wi, ui)| (ui - wi) * (ui - wi)).sum();
            if d_sq < best_sq {
                best_sq = d_sq;
                winner = unit;
            }
            total += d_sq.sqrt();
        }
        Ok(Match {
            winner,
            min_distance: best_sq.sqrt(),
            mean_distance: total / self.units() as f64,
        })
    }

    pub fn find_winner(&self, u: &[f64]) -> Result<UnitIndex> {
        self.match_input(u).map(|m| m.winner)
    }

    /// Data-driven neighbourhood width for input `u`.
    pub fn adaptive_width(&self, u: &[f64], sigma0: f64) -> Result<f64> {
        self.match_input(u).map(|m| m.adaptive_width(sigma0))
    }

    pub fn quantization_error(&self, u: &[f64]) -> Result<f64> {
        self.match_input(u).map(|m| m.min_distance)
    }

    /// Gaussian activation around `winner` on the grid, truncated at [`ACTIVATION_CUTOFF`].
    pub fn neighborhood(&self, winner: UnitIndex, sigma: f64) -> Result<Vec<f64>> {
        neighborhood(&self.geometry, winner, sigma)
    }

    /// Moves every codebook a fraction `eta * h(s)` of the way towards `u`.
    pub fn update(&mut self, u: &[f64], eta: f64, h: &[f64]) -> Result<()> {
        self.check_input(u)?;
        check_dim(self.units(), h.len())?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidInput(format!("learning rate {eta} outside [0, 1]")));
        }
        if eta == 0.0 {
            return Ok(());
        }
        for (w, &hs) in self.codebook.chunks_exact_mut(self.dim).zip(h) {
            let rate = eta * hs;
            if rate == 0.0 {
                continue;
            }
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi += rate * (ui - *wi);
            }
        }
        Ok(())
    }

    /// The input predicted by `unit`: its codebook vector.
    pub fn decode(&self, unit: UnitIndex) -> Result<&[f64]> {
        if unit >= self.units() {
            return Err(Error::InvalidInput(format!(
                "unit {unit} outside a map of {} units",
                self.units()
            )));
        }
        Ok(self.weights(unit))
    }

    /// Recognition density for `u` with the adaptive width for `sigma0`.
    pub fn density(&self, u: &[f64], sigma0: f64) -> Result<RecognitionDensity> {
        let m = self.match_input(u)?;
        let h = self.neighborhood(m.winner, m.adaptive_width(sigma0))?;
        recognition_density(&h)
    }
}

pub fn neighborhood(geometry: &MapGeometry, winner: UnitIndex, sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("neighbourhood width {sigma} must be positive")));
    }
    if winner >= geometry.units() {
        return Err(Error::InvalidInput(format!("winner {winner} outside the map")));
    }
    let denom = 2.0 * sigma * sigma;
    Ok((0..geometry.units())
        .map(|s| {
            let h = (-geometry.grid_distance_sq(winner, s) / denom).exp();
            if h < ACTIVATION_CUTOFF {
                0.0
            } else {
                h
            }
        })
        .collect())
}

/// Normalized map activation, `p(s|u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecognitionDensity(Vec<f64>);

impl RecognitionDensity {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Most probable unit; ties go to the lowest index.
    pub fn argmax(&self) -> UnitIndex {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }
}

pub fn recognition_density(h: &[f64]) -> Result<RecognitionDensity> {
    if h.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput("activation must be finite and non-negative".into()));
    }
    let total: f64 = h.iter().sum();
    if total <= 0.0 {
        return Err(Error::Internal("activation pattern has no positive entry".into()));
    }
    Ok(RecognitionDensity(h.iter().map(|v| v / total).collect()))
}
