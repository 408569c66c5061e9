//! Real scalar fields with a synchronized spectral representation.

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;
use num_complex::Complex64;
use std::io::{Read, Write};

/// Scalar field on a periodic grid. Values and spectral coefficients are kept
/// in sync at construction; a `Field` is immutable afterwards, so the pair can
/// never go stale.
#[derive(Debug, Clone)]
pub struct Field {
    grid: PeriodicGrid,
    values: Vec<f64>,
    spectral: Vec<Complex64>,
}

impl Field {
    pub fn from_values(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len());
        let spectral = grid.transform(&values);
        Field {
            grid,
            values,
            spectral,
        }
    }

    pub fn from_spectral(grid: PeriodicGrid, spectral: Vec<Complex64>) -> Self {
        assert_eq!(spectral.len(), grid.len());
        let values = grid.inverse_transform(&spectral);
        Field {
            grid,
            values,
            spectral,
        }
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.len()).map(|i| f(&grid.coord(i))).collect();
        Field::from_values(grid, values)
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        let n = grid.len();
        Field {
            grid,
            values: vec![0.0; n],
            spectral: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spectral(&self) -> &[Complex64] {
        &self.spectral
    }

    /// Sample at a flat grid index.
    pub fn at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Spectral gradient components as fields. The Nyquist column is zeroed so
    /// the derivative of a real field stays real.
    pub fn gradient(&self) -> Vec<Field> {
        let g = &self.grid;
        let n = g.points_per_dim() as i64;
        (0..g.dim())
            .map(|axis| {
                let spec: Vec<Complex64> = self
                    .spectral
                    .iter()
                    .enumerate()
                    .map(|(idx, &c)| {
                        let k = g.mode(idx)[axis];
                        if k.abs() * 2 == n {
                            Complex64::new(0.0, 0.0)
                        } else {
                            Complex64::new(0.0, k as f64) * c
                        }
                    })
                    .collect();
                Field::from_spectral(g.clone(), spec)
            })
            .collect()
    }

    /// Max pointwise Euclidean norm of the gradient.
    pub fn grad_max(&self) -> f64 {
        let comps = self.gradient();
        (0..self.grid.len())
            .map(|i| {
                comps
                    .iter()
                    .map(|c| c.values[i] * c.values[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Zero every mode with any |k_i| > N/3 (two-thirds rule).
pub fn dealias(grid: &PeriodicGrid, spectral: &mut [Complex64]) {
    let cut = grid.points_per_dim() as f64 / 3.0;
    for (idx, c) in spectral.iter_mut().enumerate() {
        if grid.mode(idx).iter().any(|&k| (k.abs() as f64) > cut) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Dealiased copy of a field.
pub fn dealias_field(field: &Field) -> Field {
    let mut spec = field.spectral().to_vec();
    dealias(field.grid(), &mut spec);
    Field::from_spectral(field.grid().clone(), spec)
}

/// Periodic distance between two flat grid indices (torus metric per
/// coordinate, Euclidean combination).
pub fn periodic_distance(grid: &PeriodicGrid, a: usize, b: usize) -> f64 {
    let pa = grid.coord(a);
    let pb = grid.coord(b);
    let mut acc = 0.0;
    for (x, y) in pa.iter().zip(pb.iter()) {
        let mut d = (x - y).abs();
        if d > std::f64::consts::PI {
            d = 2.0 * std::f64::consts::PI - d;
        }
        acc += d * d;
    }
    acc.sqrt()
}

/// CSV snapshot: columns x[,y],value.
pub fn write_csv<W: Write>(field: &Field, mut w: W) -> Result<()> {
    let g = field.grid();
    if g.dim() == 1 {
        writeln!(w, "x,value")?;
    } else {
        writeln!(w, "x,y,value")?;
    }
    for i in 0..g.len() {
        let c = g.coord(i);
        if g.dim() == 1 {
            writeln!(w, "{:.17e},{:.17e}", c[0], field.at(i))?;
        } else {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", c[0], c[1], field.at(i))?;
        }
    }
    Ok(())
}

/// Raw little-endian snapshot: u32 d, u32 N, then N^d f64 values row-major.
pub fn write_binary<W: Write>(field: &Field, mut w: W) -> Result<()> {
    let g = field.grid();
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.points_per_dim() as u32).to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Read a snapshot in the layout produced by [`write_binary`].
pub fn read_binary<R: Read>(mut r: R) -> Result<Field> {
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let d = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf)?;
    let n = u32::from_le_bytes(u32buf) as usize;
    let grid = PeriodicGrid::new(d, n)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut f64buf = [0u8; 8];
    for _ in 0..grid.len() {
        r.read_exact(&mut f64buf).map_err(|_| {
            Error::InsufficientData("snapshot file shorter than header promises".into())
        })?;
        values.push(f64::from_le_bytes(f64buf));
    }
    Ok(Field::from_values(grid, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dealias_rules() {
        let g = PeriodicGrid::new(1, 64).unwrap();
        let mut spec = vec![Complex64::new(0.0, 0.0); 64];
        spec[g.index_of_mode(&[1])] = Complex64::new(1.0, 0.0);
        spec[g.index_of_mode(&[32])] = Complex64::new(1.0, 0.0); // Nyquist
        spec[g.index_of_mode(&[22])] = Complex64::new(1.0, 0.0); // 22 > 64/3
        dealias(&g, &mut spec);
        assert_eq!(spec[g.index_of_mode(&[1])].re, 1.0);
        assert_eq!(spec[g.index_of_mode(&[32])].re, 0.0);
        assert_eq!(spec[g.index_of_mode(&[22])].re, 0.0);
        // idempotent
        let snapshot = spec.clone();
        dealias(&g, &mut spec);
        assert_eq!(snapshot, spec);
    }

    #[test]
    fn gradient_of_sine() {
        let g = PeriodicGrid::new(1, 128).unwrap();
        let f = Field::from_fn(g, |x| (4.0 * x[0]).sin());
        let grad = &f.gradient()[0];
        for i in 0..f.grid().len() {
            let x = f.grid().coord(i)[0];
            assert!((grad.at(i) - 4.0 * (4.0 * x).cos()).abs() < 1e-10);
        }
        assert!((f.grad_max() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn binary_round_trip() {
        let g = PeriodicGrid::new(2, 8).unwrap();
        let f = Field::from_fn(g, |x| (x[0] - 0.3 * x[1]).sin());
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        let f2 = read_binary(&buf[..]).unwrap();
        assert_eq!(f.values(), f2.values());
    }

    #[test]
    fn periodic_metric_wraps() {
        let g = PeriodicGrid::new(1, 8).unwrap();
        // indices 0 and 7 are one cell apart through the seam
        let d = periodic_distance(&g, 0, 7);
        assert!((d - g.spacing()).abs() < 1e-14);
    }
}
