//! Lattice configurations of Bernoulli parameters.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CamError, Result};

/// Probability that a binary cell is in state 1; fully describes the cell's
/// Bernoulli measure.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BernoulliParam(f64);

impl BernoulliParam {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(CamError::ProbabilityOutOfRange(p))
        }
    }

    /// Clamps into `[0, 1]`. NaN maps to 0.
    pub fn saturating(p: f64) -> Self {
        if p.is_nan() {
            Self(0.0)
        } else {
            Self(p.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for BernoulliParam {
    type Error = CamError;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<BernoulliParam> for f64 {
    fn from(p: BernoulliParam) -> f64 {
        p.0
    }
}

/// Row-major `height x width` grid of Bernoulli parameters.
///
/// Cells are stored as plain `f64` for the stencil loops; every constructor
/// checks that each value lies in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration", into = "RawConfiguration")]
pub struct Configuration {
    height: usize,
    width: usize,
    cells: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawConfiguration {
    height: usize,
    width: usize,
    cells: Vec<f64>,
}

impl TryFrom<RawConfiguration> for Configuration {
    type Error = CamError;

    fn try_from(raw: RawConfiguration) -> Result<Self> {
        Configuration::new(raw.height, raw.width, raw.cells)
    }
}

impl From<Configuration> for RawConfiguration {
    fn from(cfg: Configuration) -> Self {
        RawConfiguration {
            height: cfg.height,
            width: cfg.width,
            cells: cfg.cells,
        }
    }
}

impl Configuration {
    pub fn new(height: usize, width: usize, cells: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(CamError::EmptyLattice { height, width });
        }
        let expected = height * width;
        if cells.len() != expected {
            return Err(CamError::CellCount {
                expected,
                got: cells.len(),
            });
        }
        if let Some(&bad) = cells.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(CamError::ProbabilityOutOfRange(bad));
        }
        Ok(Self {
            height,
            width,
            cells,
        })
    }

    pub fn filled(height: usize, width: usize, p: BernoulliParam) -> Result<Self> {
        Self::new(height, width, vec![p.get(); height * width])
    }

    /// Independent uniform draws in `[0, 1)` for every cell.
    pub fn random<R: Rng + ?Sized>(height: usize, width: usize, rng: &mut R) -> Result<Self> {
        let cells = (0..height * width).map(|_| rng.random::<f64>()).collect();
        Self::new(height, width, cells)
    }

    /// Values are clamped into `[0, 1]` rather than rejected.
    pub(crate) fn from_clamped(height: usize, width: usize, mut cells: Vec<f64>) -> Self {
        debug_assert_eq!(cells.len(), height * width);
        for c in &mut cells {
            *c = BernoulliParam::saturating(*c).get();
        }
        Self {
            height,
            width,
            cells,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<f64> {
        self.cells
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.width + col]
    }

    /// Cell value with periodic wrap-around in both directions.
    #[inline]
    pub fn get_wrapped(&self, row: isize, col: isize) -> f64 {
        let r = row.rem_euclid(self.height as isize) as usize;
        let c = col.rem_euclid(self.width as isize) as usize;
        self.cells[r * self.width + c]
    }

    pub fn set(&mut self, row: usize, col: usize, p: BernoulliParam) {
        self.cells[row * self.width + col] = p.get();
    }

    pub fn min(&self) -> f64 {
        self.cells.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.cells.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Toroidal translation: the value at `(r, c)` moves to `(r + dy, c + dx)`.
    pub fn shifted(&self, dy: isize, dx: isize) -> Self {
        let mut cells = vec![0.0; self.cells.len()];
        for r in 0..self.height {
            for c in 0..self.width {
                cells[r * self.width + c] = self.get_wrapped(r as isize - dy, c as isize - dx);
            }
        }
        Self {
            height: self.height,
            width: self.width,
            cells,
        }
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(CamError::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_cells() {
        assert!(matches!(
            Configuration::new(1, 2, vec![0.5, 1.5]),
            Err(CamError::ProbabilityOutOfRange(p)) if p == 1.5
        ));
        assert!(Configuration::new(1, 1, vec![f64::NAN]).is_err());
        assert!(Configuration::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Configuration::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn bernoulli_bounds() {
        assert!(BernoulliParam::new(-1e-18).is_err());
        assert_eq!(BernoulliParam::new(1.0).unwrap().get(), 1.0);
        assert_eq!(BernoulliParam::saturating(1.0 + 1e-16).get(), 1.0);
        assert_eq!(BernoulliParam::saturating(f64::NAN).get(), 0.0);
    }

    #[test]
    fn wrapped_access() {
        let cfg = Configuration::new(2, 3, vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        assert_eq!(cfg.get_wrapped(-1, -1), 0.5);
        assert_eq!(cfg.get_wrapped(2, 3), 0.0);
        assert_eq!(cfg.get_wrapped(1, 4), 0.4);
    }

    #[test]
    fn shift_moves_values() {
        let cfg = Configuration::new(2, 3, vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let s = cfg.shifted(0, 1);
        assert_eq!(s.cells(), &[0.2, 0.0, 0.1, 0.5, 0.3, 0.4]);
        assert_eq!(cfg.shifted(2, 3), cfg);
    }

    #[test]
    fn json_rejects_invalid_envelope() {
        let bad = r#"{"height":1,"width":1,"cells":[2.0]}"#;
        assert!(serde_json::from_str::<Configuration>(bad).is_err());
        let ok = r#"{"height":1,"width":2,"cells":[0.25,1.0]}"#;
        let cfg: Configuration = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.cells(), &[0.25, 1.0]);
    }
}
