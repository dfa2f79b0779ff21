//! Zernike moments over the inscribed disk of a square patch.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZernikeConfig {
    pub order: usize,
    /// Patch side length in pixels.
    pub size: usize,
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Disk radius for the full patch, in pixels.
    pub radius_full: f64,
    /// Disk radius for resampled grid cells, in pixels.
    pub radius_cell: f64,
}

impl Default for ZernikeConfig {
    fn default() -> Self {
        ZernikeConfig {
            order: 8,
            size: 32,
            grid_rows: 2,
            grid_cols: 2,
            radius_full: 16.0,
            radius_cell: 16.0,
        }
    }
}

impl ZernikeConfig {
    /// `(n, m)` with `0 <= m <= n <= order` and `n - m` even, ordered by `n`
    /// then `m`.
    pub fn indices(&self) -> Vec<(usize, usize)> {
        (0..=self.order)
            .flat_map(|n| (0..=n).filter(move |m| (n - m) % 2 == 0).map(move |m| (n, m)))
            .collect()
    }

    pub fn moment_count(&self) -> usize {
        self.indices().len()
    }

    /// Length of the spatial-pyramid descriptor.
    pub fn descriptor_len(&self) -> usize {
        (1 + self.grid_rows * self.grid_cols) * self.moment_count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 || self.size % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "patch size must be even and positive, got {}",
                self.size
            )));
        }
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(Error::InvalidParameter("grid must be at least 1x1".into()));
        }
        if !(self.radius_full > 0.0 && self.radius_cell > 0.0) {
            return Err(Error::InvalidParameter("disk radii must be positive".into()));
        }
        Ok(())
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Coefficients of `R_{n,m}(rho) = sum_s c_s rho^(n - 2s)`.
fn radial_coefficients(n: usize, m: usize) -> Vec<(i32, f64)> {
    (0..=(n - m) / 2)
        .map(|s| {
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * factorial(n - s)
                / (factorial(s) * factorial((n + m) / 2 - s) * factorial((n - m) / 2 - s));
            ((n - 2 * s) as i32, c)
        })
        .collect()
}

pub fn radial_polynomial(n: usize, m: usize, rho: f64) -> f64 {
    radial_coefficients(n, m)
        .into_iter()
        .map(|(p, c)| c * rho.powi(p))
        .sum()
}

/// Conjugate basis functions sampled at the pixel centres inside the disk,
/// pre-multiplied by `(n + 1) / pi` and the pixel area.
#[derive(Debug, Clone)]
pub struct ZernikeBasis {
    size: usize,
    indices: Vec<(usize, usize)>,
    support: Vec<usize>,
    /// `indices.len() x support.len()`, row-major.
    weights: Vec<Complex64>,
}

impl ZernikeBasis {
    /// Disk of `radius` pixels centred on the patch; `x` points right and
    /// `y` points up.
    pub fn new(order: usize, size: usize, radius: f64) -> Self {
        let cfg = ZernikeConfig {
            order,
            ..ZernikeConfig::default()
        };
        let indices = cfg.indices();
        let half = size as f64 / 2.0;
        let area = 1.0 / (radius * radius);
        let mut support = Vec::new();
        let mut polar = Vec::new();
        for r in 0..size {
            for c in 0..size {
                let x = (c as f64 + 0.5 - half) / radius;
                let y = (half - r as f64 - 0.5) / radius;
                let rho = (x * x + y * y).sqrt();
                if rho <= 1.0 {
                    support.push(r * size + c);
                    polar.push((rho, y.atan2(x)));
                }
            }
        }
        let mut weights = Vec::with_capacity(indices.len() * support.len());
        for &(n, m) in &indices {
            let coeffs = radial_coefficients(n, m);
            let norm = (n as f64 + 1.0) / std::f64::consts::PI * area;
            for &(rho, phi) in &polar {
                let radial: f64 = coeffs.iter().map(|&(p, c)| c * rho.powi(p)).sum();
                weights.push(Complex64::from_polar(norm * radial, -(m as f64) * phi));
            }
        }
        ZernikeBasis {
            size,
            indices,
            support,
            weights,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    /// Complex moments of a `size x size` patch.
    pub fn moments(&self, patch: &GrayImage) -> Result<Vec<Complex64>> {
        if patch.height() != self.size || patch.width() != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size * self.size,
                actual: patch.height() * patch.width(),
            });
        }
        let values: Vec<f64> = self
            .support
            .iter()
            .map(|&i| patch.pixels()[i] as f64)
            .collect();
        let len = self.support.len();
        Ok((0..self.indices.len())
            .map(|k| {
                self.weights[k * len..(k + 1) * len]
                    .iter()
                    .zip(&values)
                    .fold(Complex64::new(0.0, 0.0), |acc, (w, &v)| acc + w * v)
            })
            .collect())
    }

    pub fn magnitudes(&self, patch: &GrayImage) -> Result<Vec<f64>> {
        Ok(self.moments(patch)?.into_iter().map(|z| z.norm()).collect())
    }

    /// Discrete inner product of basis functions `a` and `b` over the disk,
    /// without the moment normalisation.
    pub fn inner_product(&self, a: usize, b: usize) -> Complex64 {
        let len = self.support.len();
        let (na, nb) = (self.indices[a].0 as f64 + 1.0, self.indices[b].0 as f64 + 1.0);
        let scale = std::f64::consts::PI.powi(2) / (na * nb);
        self.weights[a * len..(a + 1) * len]
            .iter()
            .zip(&self.weights[b * len..(b + 1) * len])
            .map(|(wa, wb)| wa.conj() * wb)
            .sum::<Complex64>()
            * scale
    }
}

/// Complex moments of `patch` over the centred disk of `radius` pixels.
pub fn zernike_moments(patch: &GrayImage, config: &ZernikeConfig, radius: f64) -> Result<Vec<Complex64>> {
    if patch.height() != patch.width() {
        return Err(Error::InvalidParameter("Zernike patch must be square".into()));
    }
    ZernikeBasis::new(config.order, patch.height(), radius).moments(patch)
}

/// Prepared full-patch and cell bases for the spatial-pyramid descriptor.
#[derive(Debug, Clone)]
pub struct SpatialZernike {
    config: ZernikeConfig,
    full: ZernikeBasis,
    cell: ZernikeBasis,
}

impl SpatialZernike {
    pub fn new(config: ZernikeConfig) -> Result<Self> {
        config.validate()?;
        Ok(SpatialZernike {
            full: ZernikeBasis::new(config.order, config.size, config.radius_full),
            cell: ZernikeBasis::new(config.order, config.size, config.radius_cell),
            config,
        })
    }

    pub fn config(&self) -> &ZernikeConfig {
        &self.config
    }

    /// Magnitudes of the full patch followed by each grid cell in row-major
    /// order; every cell is padded to a square and resampled to the patch
    /// size first.
    pub fn descriptor(&self, patch: &GrayImage) -> Result<Vec<f64>> {
        let cfg = &self.config;
        let mut out = self.full.magnitudes(patch)?;
        out.reserve(cfg.descriptor_len() - out.len());
        let p = cfg.size;
        for gr in 0..cfg.grid_rows {
            for gc in 0..cfg.grid_cols {
                let (r0, r1) = (gr * p / cfg.grid_rows, (gr + 1) * p / cfg.grid_rows);
                let (c0, c1) = (gc * p / cfg.grid_cols, (gc + 1) * p / cfg.grid_cols);
                let cell = resample_cell(patch, r0, r1, c0, c1, p);
                out.extend(self.cell.magnitudes(&cell)?);
            }
        }
        Ok(out)
    }
}

/// Rows `r0..r1`, columns `c0..c1` centred in a zero-padded square and
/// bilinearly resampled to `size x size`.
fn resample_cell(patch: &GrayImage, r0: usize, r1: usize, c0: usize, c1: usize, size: usize) -> GrayImage {
    let (h, w) = (r1 - r0, c1 - c0);
    let side = h.max(w) as f64;
    let off_r = (side - h as f64) / 2.0;
    let off_c = (side - w as f64) / 2.0;
    let step = side / size as f64;
    GrayImage::from_fn(size, size, |i, j| {
        let y = (i as f64 + 0.5) * step - 0.5 - off_r;
        let x = (j as f64 + 0.5) * step - 0.5 - off_c;
        crate::image::bilinear(h, w, y, x, |r, c| patch.get(r0 + r, c0 + c))
    })
}

pub fn spz_descriptor(patch: &GrayImage, config: &ZernikeConfig) -> Result<Vec<f64>> {
    SpatialZernike::new(*config)?.descriptor(patch)
}
