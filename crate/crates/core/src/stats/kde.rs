use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::ScoredDocument;

/// Evaluation points along each axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl GridSpec {
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![lo],
            _ => (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    /// Regular `nx` by `ny` grid spanning the data range padded by `pad`
    /// bandwidths on each side.
    pub fn covering(points: &[(f64, f64)], bandwidths: (f64, f64), nx: usize, ny: usize, pad: f64) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        Self {
            x: Self::linspace(x0 - pad * bandwidths.0, x1 + pad * bandwidths.0, nx),
            y: Self::linspace(y0 - pad * bandwidths.1, y1 + pad * bandwidths.1, ny),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeGrid {
    /// Entropy axis.
    pub x_axis: Vec<f64>,
    /// log10(rank) axis.
    pub y_axis: Vec<f64>,
    /// `density[i][j]` is the estimate at `(x_axis[i], y_axis[j])`.
    pub density: Vec<Vec<f64>>,
    pub bandwidths: (f64, f64),
}

impl KdeGrid {
    /// Riemann sum of the density over the grid cells.
    pub fn integral(&self) -> f64 {
        let step = |a: &[f64]| if a.len() > 1 { a[1] - a[0] } else { 0.0 };
        let cell = step(&self.x_axis) * step(&self.y_axis);
        self.density.iter().flatten().sum::<f64>() * cell
    }

    /// `entropy,log10_rank,density` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("entropy,log10_rank,density\n");
        for (i, x) in self.x_axis.iter().enumerate() {
            for (j, y) in self.y_axis.iter().enumerate() {
                let _ = writeln!(out, "{x},{y},{}", self.density[i][j]);
            }
        }
        out
    }
}

/// (entropy, log10 rank) for every token.
pub fn entropy_rank_points<'a>(docs: impl IntoIterator<Item = &'a ScoredDocument>) -> Vec<(f64, f64)> {
    docs.into_iter()
        .flat_map(|d| d.scores.iter())
        .map(|s| (s.entropy, (s.rank.max(1) as f64).log10()))
        .collect()
}

fn std_dev(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Scott's rule for two dimensions: `n^(-1/6)` times each axis' standard
/// deviation.
pub fn scott_bandwidths(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::param("bandwidth selection needs at least 2 points"));
    }
    let factor = (points.len() as f64).powf(-1.0 / 6.0);
    let hx = std_dev(points.iter().map(|p| p.0)) * factor;
    let hy = std_dev(points.iter().map(|p| p.1)) * factor;
    if !(hx > 0.0 && hy > 0.0) {
        return Err(Error::param("degenerate data: zero spread along an axis"));
    }
    Ok((hx, hy))
}

/// Product-Gaussian kernel density estimate evaluated on `grid`.
pub fn kde2d(points: &[(f64, f64)], bandwidths: (f64, f64), grid: &GridSpec) -> Result<KdeGrid> {
    let (hx, hy) = bandwidths;
    if !(hx > 0.0 && hy > 0.0) || !hx.is_finite() || !hy.is_finite() {
        return Err(Error::param(format!("bandwidths must be positive, got {bandwidths:?}")));
    }
    if points.len() < 2 {
        return Err(Error::param("kernel density estimate needs at least 2 points"));
    }
    let norm = 1.0 / (points.len() as f64 * 2.0 * PI * hx * hy);
    // Kernel weights are separable: K(x, y) = Kx(x) * Ky(y).
    let ky: Vec<Vec<f64>> = grid
        .y
        .iter()
        .map(|&y| {
            points
                .iter()
                .map(|p| (-(y - p.1).powi(2) / (2.0 * hy * hy)).exp())
                .collect()
        })
        .collect();
    let density = grid
        .x
        .par_iter()
        .map(|&x| {
            let kx: Vec<f64> = points
                .iter()
                .map(|p| (-(x - p.0).powi(2) / (2.0 * hx * hx)).exp())
                .collect();
            ky.iter()
                .map(|row| norm * kx.iter().zip(row).map(|(a, b)| a * b).sum::<f64>())
                .collect()
        })
        .collect();
    Ok(KdeGrid {
        x_axis: grid.x.clone(),
        y_axis: grid.y.clone(),
        density,
        bandwidths,
    })
}
