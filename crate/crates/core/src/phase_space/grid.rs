use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::C64;
use crate::output::{csv_table, json_f64};

/// Default raster: 81 x 81 points over `[-3.5, 3.5]^2`.
pub const DEFAULT_RASTER: (f64, f64, usize) = (-3.5, 3.5, 81);
/// Default slice: 101 points over `[-3.5, 3.5]`.
pub const DEFAULT_SLICE: (f64, f64, usize) = (-3.5, 3.5, 101);

/// Sampling pattern in phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// Points along `Re(beta)` at fixed `Im(beta) = im`.
    Slice { im: f64, lo: f64, hi: f64, n: usize },
    /// Square raster, row-major by `Im(beta)` then `Re(beta)`.
    Raster { lo: f64, hi: f64, n: usize },
}

impl Default for GridSpec {
    fn default() -> Self {
        let (lo, hi, n) = DEFAULT_RASTER;
        GridSpec::Raster { lo, hi, n }
    }
}

impl GridSpec {
    pub fn default_slice() -> Self {
        let (lo, hi, n) = DEFAULT_SLICE;
        GridSpec::Slice { im: 0.0, lo, hi, n }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi, n) = match *self {
            GridSpec::Slice { lo, hi, n, im } => {
                if !im.is_finite() {
                    return Err(Error::param("grid.im", "must be finite"));
                }
                (lo, hi, n)
            }
            GridSpec::Raster { lo, hi, n } => (lo, hi, n),
        };
        if n < 2 {
            return Err(Error::param("grid.n", "need at least 2 points per axis"));
        }
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::param("grid", "need finite lo < hi"));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let h = (hi - lo) / (n - 1) as f64;
        (0..n).map(|i| lo + h * i as f64).collect()
    }

    pub fn layout(&self) -> GridLayout {
        match *self {
            GridSpec::Slice { im, lo, hi, n } => GridLayout::Slice {
                im,
                re: Self::axis(lo, hi, n),
            },
            GridSpec::Raster { lo, hi, n } => GridLayout::Raster {
                re: Self::axis(lo, hi, n),
                im: Self::axis(lo, hi, n),
            },
        }
    }

    pub fn points(&self) -> Vec<C64> {
        self.layout().points()
    }
}

/// Geometry of a [`WignerGrid`]; determines how integrals are taken.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridLayout {
    Slice { im: f64, re: Vec<f64> },
    Raster { re: Vec<f64>, im: Vec<f64> },
    /// Arbitrary points; no integration rule.
    Scattered,
}

impl GridLayout {
    pub fn points(&self) -> Vec<C64> {
        match self {
            GridLayout::Slice { im, re } => re.iter().map(|&x| C64::new(x, *im)).collect(),
            GridLayout::Raster { re, im } => im
                .iter()
                .flat_map(|&y| re.iter().map(move |&x| C64::new(x, y)))
                .collect(),
            GridLayout::Scattered => Vec::new(),
        }
    }
}

/// Sampled Wigner function, normalized so that `∫ W d^2 beta = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct WignerGrid {
    pub layout: GridLayout,
    pub points: Vec<C64>,
    pub values: Vec<f64>,
    /// Per-point flag: `|beta|` beyond `sqrt(n_max)/2`, where the Fock cutoff
    /// no longer guarantees the displaced state is represented.
    pub outside_cutoff: Vec<bool>,
}

pub const CSV_COLUMNS: [&str; 3] = ["re_beta", "im_beta", "w"];

impl WignerGrid {
    pub(crate) fn new(
        layout: GridLayout,
        points: Vec<C64>,
        values: Vec<f64>,
        outside_cutoff: Vec<bool>,
    ) -> Self {
        WignerGrid {
            layout,
            points,
            values,
            outside_cutoff,
        }
    }

    /// Grid from explicit samples with no integration rule.
    pub fn scattered(points: Vec<C64>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: values.len(),
            });
        }
        let n = points.len();
        Ok(WignerGrid::new(GridLayout::Scattered, points, values, vec![false; n]))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn any_outside_cutoff(&self) -> bool {
        self.outside_cutoff.iter().any(|&f| f)
    }

    pub fn to_csv(&self) -> String {
        csv_table(
            &CSV_COLUMNS,
            self.points
                .iter()
                .zip(&self.values)
                .map(|(b, &w)| vec![b.re, b.im, w]),
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        let arr = |f: &dyn Fn(usize) -> f64| {
            serde_json::Value::Array((0..self.len()).map(|i| json_f64(f(i))).collect())
        };
        serde_json::json!({
            "convention": "integral_one",
            "re_beta": arr(&|i| self.points[i].re),
            "im_beta": arr(&|i| self.points[i].im),
            "w": arr(&|i| self.values[i]),
            "outside_cutoff": self.outside_cutoff,
        })
    }
}
