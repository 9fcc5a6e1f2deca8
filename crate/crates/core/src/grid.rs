//! Uniform periodic lattice standing in for `R^d`.
//!
//! The box `(-L/2, L/2)^d` carries `n` nodes per axis at `x_i = -L/2 + i h`
//! with `h = L / n`. The domain `Omega` and its buffer `Omega_R` sit strictly
//! inside the box. Functions defined on `Omega` are extended by zero.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Centered shape describing `Omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Shape {
    /// `(-a, a)`, one-dimensional.
    Interval { half_width: f64 },
    /// `(-a, a) x (-b, b)`, two-dimensional.
    Rectangle { half_widths: [f64; 2] },
    /// Open ball of the given radius, any dimension.
    Ball { radius: f64 },
}

impl Shape {
    /// Largest coordinate extent along any axis.
    pub fn extent(&self) -> f64 {
        match *self {
            Shape::Interval { half_width } => half_width,
            Shape::Rectangle { half_widths } => half_widths[0].max(half_widths[1]),
            Shape::Ball { radius } => radius,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Shape::Interval { half_width } => 2.0 * half_width,
            Shape::Rectangle { half_widths } => 2.0 * half_widths[0].hypot(half_widths[1]),
            Shape::Ball { radius } => 2.0 * radius,
        }
    }

    /// Euclidean distance from `x` to the closure of the shape (0 inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        match *self {
            Shape::Interval { half_width } => (x[0].abs() - half_width).max(0.0),
            Shape::Rectangle { half_widths } => {
                let dx = (x[0].abs() - half_widths[0]).max(0.0);
                let dy = (x[1].abs() - half_widths[1]).max(0.0);
                dx.hypot(dy)
            }
            Shape::Ball { radius } => (norm(x) - radius).max(0.0),
        }
    }

    /// Strict interior test; boundary nodes are outside so extensions vanish there.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match *self {
            Shape::Interval { half_width } => x[0].abs() < half_width - tol,
            Shape::Rectangle { half_widths } => {
                x[0].abs() < half_widths[0] - tol && x[1].abs() < half_widths[1] - tol
            }
            Shape::Ball { radius } => norm(x) < radius - tol,
        }
    }

    fn fits_dim(&self, dim: usize) -> bool {
        match self {
            Shape::Interval { .. } => dim == 1,
            Shape::Rectangle { .. } => dim == 2,
            Shape::Ball { .. } => true,
        }
    }

    fn is_positive(&self) -> bool {
        match *self {
            Shape::Interval { half_width } => half_width > 0.0,
            Shape::Rectangle { half_widths } => half_widths[0] > 0.0 && half_widths[1] > 0.0,
            Shape::Ball { radius } => radius > 0.0,
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Periodic computational box containing `Omega` and the buffer `Omega_R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub box_side: f64,
    pub points_per_axis: usize,
    pub omega: Shape,
    pub buffer: f64,
}

impl GridSpec {
    pub fn new(
        dim: usize,
        box_side: f64,
        points_per_axis: usize,
        omega: Shape,
        buffer: f64,
    ) -> Result<Self> {
        let g = GridSpec { dim, box_side, points_per_axis, omega, buffer };
        g.validate()?;
        Ok(g)
    }

    /// `Omega = (-a, a)` in a box of side `max(4 diam, 2(a + R) + margin)`.
    pub fn interval(half_width: f64, box_side: f64, n: usize, buffer: f64) -> Result<Self> {
        Self::new(1, box_side, n, Shape::Interval { half_width }, buffer)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {}", self.dim)));
        }
        let n = self.points_per_axis;
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("points_per_axis must be a power of two >= 16, got {n}")));
        }
        if !(self.box_side > 0.0) || !self.box_side.is_finite() {
            return Err(Error::InvalidGrid(format!("box side must be positive, got {}", self.box_side)));
        }
        if !self.omega.fits_dim(self.dim) || !self.omega.is_positive() {
            return Err(Error::InvalidGrid(format!("shape {:?} invalid for dim {}", self.omega, self.dim)));
        }
        if !(self.buffer > 0.0) {
            return Err(Error::InvalidGrid(format!("buffer must be positive, got {}", self.buffer)));
        }
        let margin = self.box_side / 2.0 - (self.omega.extent() + self.buffer);
        if margin < 2.0 * self.spacing() {
            return Err(Error::InvalidGrid(format!(
                "Omega_R does not fit in the box with a 2h margin (margin {margin:.4}, h {:.4})",
                self.spacing()
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.box_side / self.points_per_axis as f64
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total node count `n^d`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.box_side / 2.0 + i as f64 * self.spacing()
    }

    /// Axis indices of a flat (row-major) node index.
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        let n = self.points_per_axis;
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / n, flat % n]
        }
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.points_per_axis + idx[1]
        }
    }

    /// Node position; only the first `dim` entries are meaningful.
    pub fn position(&self, flat: usize) -> [f64; 2] {
        let m = self.multi_index(flat);
        let mut x = [0.0; 2];
        for (a, xa) in x.iter_mut().enumerate().take(self.dim) {
            *xa = self.coordinate(m[a]);
        }
        x
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.position(i)).collect()
    }

    pub fn distance_to_omega(&self, flat: usize) -> f64 {
        let x = self.position(flat);
        self.omega.distance(&x[..self.dim])
    }

    pub fn mask(&self) -> DomainMask {
        let tol = 1e-9 * self.spacing();
        let mut inside = Vec::with_capacity(self.len());
        let mut buffer_inside = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let x = self.position(i);
            inside.push(self.omega.contains(&x[..self.dim], tol));
            buffer_inside.push(self.omega.distance(&x[..self.dim]) < self.buffer);
        }
        DomainMask { inside, buffer_inside }
    }

    /// Same grid with a different buffer radius.
    pub fn with_buffer(&self, buffer: f64) -> Result<Self> {
        Self::new(self.dim, self.box_side, self.points_per_axis, self.omega, buffer)
    }

    /// Same box and shape at a different resolution.
    pub fn with_points(&self, n: usize) -> Result<Self> {
        Self::new(self.dim, self.box_side, n, self.omega, self.buffer)
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Boolean lattices marking `Omega` and `Omega_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    pub inside: Vec<bool>,
    pub buffer_inside: Vec<bool>,
}

impl DomainMask {
    /// Flat indices of the nodes inside `Omega`, in lattice order.
    pub fn omega_indices(&self) -> Vec<usize> {
        self.inside.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn omega_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn outside_buffer(&self) -> Vec<bool> {
        self.buffer_inside.iter().map(|b| !b).collect()
    }
}

/// Integration region for norms.
#[derive(Debug, Clone, Copy)]
pub enum Region<'a> {
    Full,
    Omega,
    Buffer,
    Custom(&'a [bool]),
}

impl Region<'_> {
    fn resolve(&self, grid: &GridSpec) -> Option<Vec<bool>> {
        match self {
            Region::Full => None,
            Region::Omega => Some(grid.mask().inside),
            Region::Buffer => Some(grid.mask().buffer_inside),
            Region::Custom(m) => Some(m.to_vec()),
        }
    }
}

/// Real scalar lattice function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

/// `d`-tuple of scalar lattices.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: GridSpec,
    pub components: Vec<Vec<f64>>,
}

impl ScalarField {
    pub fn zeros(grid: &GridSpec) -> Self {
        ScalarField { grid: *grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: &GridSpec, value: f64) -> Self {
        ScalarField { grid: *grid, values: vec![value; grid.len()] }
    }

    pub fn from_values(grid: &GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::MaskMismatch { expected: grid.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field contains non-finite values".into()));
        }
        Ok(ScalarField { grid: *grid, values })
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.position(i);
                f(&x[..grid.dim])
            })
            .collect();
        ScalarField { grid: *grid, values }
    }

    /// Values at the nodes of `Omega`, in lattice order.
    pub fn restrict(&self) -> Vec<f64> {
        let mask = self.grid.mask();
        self.values
            .iter()
            .zip(&mask.inside)
            .filter(|(_, &m)| m)
            .map(|(v, _)| *v)
            .collect()
    }

    /// Zero out every node outside `Omega`.
    pub fn masked(&self) -> Self {
        let mask = self.grid.mask();
        let values = self
            .values
            .iter()
            .zip(&mask.inside)
            .map(|(v, &m)| if m { *v } else { 0.0 })
            .collect();
        ScalarField { grid: self.grid, values }
    }

    pub fn lp_norm(&self, p: f64, region: Region<'_>) -> Result<f64> {
        lp_norm_of(&self.grid, self.values.iter().map(|v| v.abs()), p, region)
    }

    pub fn axpy(&self, alpha: f64, other: &ScalarField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + alpha * b).collect();
        Ok(ScalarField { grid: self.grid, values })
    }

    pub fn scale(&self, alpha: f64) -> Self {
        ScalarField { grid: self.grid, values: self.values.iter().map(|v| alpha * v).collect() }
    }

    /// `h^d sum f g` over the full box.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.grid.cell_volume() * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn holder_seminorm(&self, beta: f64, region: Region<'_>) -> Result<f64> {
        holder_seminorm(self, beta, region)
    }
}

impl VectorField {
    pub fn zeros(grid: &GridSpec) -> Self {
        VectorField { grid: *grid, components: vec![vec![0.0; grid.len()]; grid.dim] }
    }

    pub fn from_components(grid: &GridSpec, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim {
            return Err(Error::InvalidParameter(format!(
                "expected {} components, got {}",
                grid.dim,
                components.len()
            )));
        }
        for c in &components {
            if c.len() != grid.len() {
                return Err(Error::MaskMismatch { expected: grid.len(), got: c.len() });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("field contains non-finite values".into()));
            }
        }
        Ok(VectorField { grid: *grid, components })
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let values = (0..self.grid.len())
            .map(|i| self.components.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect();
        ScalarField { grid: self.grid, values }
    }

    pub fn lp_norm(&self, p: f64, region: Region<'_>) -> Result<f64> {
        let mag = self.magnitude();
        lp_norm_of(&self.grid, mag.values.into_iter(), p, region)
    }

    /// `h^d sum xi . zeta` over the full box.
    pub fn dot(&self, other: &VectorField) -> f64 {
        let s: f64 = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum();
        self.grid.cell_volume() * s
    }

    pub fn axpy(&self, alpha: f64, other: &VectorField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + alpha * y).collect())
            .collect();
        Ok(VectorField { grid: self.grid, components })
    }

    /// Multiply every component by a scalar lattice function.
    pub fn weighted(&self, w: &[f64]) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| c.iter().zip(w).map(|(x, y)| x * y).collect())
            .collect();
        VectorField { grid: self.grid, components }
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude().max_abs()
    }
}

/// Extend values given on the nodes of `Omega` (lattice order) by zero.
pub fn extend_by_zero(grid: &GridSpec, omega_values: &[f64]) -> Result<ScalarField> {
    let mask = grid.mask();
    let idx = mask.omega_indices();
    if idx.len() != omega_values.len() {
        return Err(Error::MaskMismatch { expected: idx.len(), got: omega_values.len() });
    }
    let mut values = vec![0.0; grid.len()];
    for (&i, &v) in idx.iter().zip(omega_values) {
        values[i] = v;
    }
    Ok(ScalarField { grid: *grid, values })
}

fn lp_norm_of(
    grid: &GridSpec,
    magnitudes: impl Iterator<Item = f64>,
    p: f64,
    region: Region<'_>,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("norm exponent must be >= 1, got {p}")));
    }
    let mask = region.resolve(grid);
    if let Some(m) = &mask {
        if m.len() != grid.len() {
            return Err(Error::MaskMismatch { expected: grid.len(), got: m.len() });
        }
        if !m.iter().any(|&b| b) {
            return Err(Error::EmptyRegion);
        }
    }
    let selected = magnitudes
        .enumerate()
        .filter(|(i, _)| mask.as_ref().map_or(true, |m| m[*i]))
        .map(|(_, v)| v);
    if p.is_infinite() {
        return Ok(selected.fold(0.0, f64::max));
    }
    let w = grid.cell_volume();
    if p == 1.0 {
        return Ok(w * selected.sum::<f64>());
    }
    if p == 2.0 {
        return Ok((w * selected.map(|v| v * v).sum::<f64>()).sqrt());
    }
    // scale by the max to keep large exponents finite
    let vals: Vec<f64> = selected.collect();
    let vmax = vals.iter().cloned().fold(0.0, f64::max);
    if vmax == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = vals.iter().map(|v| (v / vmax).powf(p)).sum();
    Ok(vmax * (w * s).powf(1.0 / p))
}

/// Discrete Hölder seminorm: max over node pairs of `|f(x)-f(y)| / |x-y|^beta`.
pub fn holder_seminorm(f: &ScalarField, beta: f64, region: Region<'_>) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!("Hölder exponent must lie in (0, 1], got {beta}")));
    }
    let grid = &f.grid;
    let mask = region.resolve(grid);
    let nodes: Vec<usize> = (0..grid.len()).filter(|i| mask.as_ref().map_or(true, |m| m[*i])).collect();
    let pos: Vec<[f64; 2]> = nodes.iter().map(|&i| grid.position(i)).collect();
    let mut best = 0.0_f64;
    for a in 0..nodes.len() {
        for b in (a + 1)..nodes.len() {
            let dv = (f.values[nodes[a]] - f.values[nodes[b]]).abs();
            if dv == 0.0 {
                continue;
            }
            let dx = (0..grid.dim).map(|k| (pos[a][k] - pos[b][k]).powi(2)).sum::<f64>().sqrt();
            best = best.max(dv / dx.powf(beta));
        }
    }
    Ok(best)
}

/// Plain-text header accompanying a binary field dump.
pub fn field_header(grid: &GridSpec, components: usize, s: Option<f64>) -> String {
    let mut h = String::new();
    let _ = writeln!(h, "format fracmk-field-v1");
    let _ = writeln!(h, "dtype f64-le");
    let _ = writeln!(h, "dims {}", grid.dim);
    let _ = writeln!(h, "n {}", grid.points_per_axis);
    let _ = writeln!(h, "L {}", grid.box_side);
    let _ = writeln!(h, "components {components}");
    match s {
        Some(s) => {
            let _ = writeln!(h, "s {s}");
        }
        None => {
            let _ = writeln!(h, "s none");
        }
    }
    h
}

/// Write `<stem>.bin` (flat little-endian f64, component-major) and `<stem>.hdr`.
pub fn write_field(dir: &Path, stem: &str, grid: &GridSpec, components: &[&[f64]], s: Option<f64>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut bytes = Vec::with_capacity(8 * grid.len() * components.len());
    for c in components {
        if c.len() != grid.len() {
            return Err(Error::MaskMismatch { expected: grid.len(), got: c.len() });
        }
        for v in c.iter() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(dir.join(format!("{stem}.bin")), bytes)?;
    std::fs::write(dir.join(format!("{stem}.hdr")), field_header(grid, components.len(), s))?;
    Ok(())
}

/// Read a dump written by [`write_field`]; returns the grid header values and components.
pub fn read_field(dir: &Path, stem: &str) -> Result<(usize, usize, f64, Vec<Vec<f64>>)> {
    let hdr = std::fs::read_to_string(dir.join(format!("{stem}.hdr")))?;
    let mut dims = 0;
    let mut n = 0;
    let mut l = 0.0;
    let mut comps = 1;
    for line in hdr.lines() {
        let mut it = line.split_whitespace();
        match (it.next(), it.next()) {
            (Some("dims"), Some(v)) => dims = v.parse().map_err(|_| Error::Config("bad dims".into()))?,
            (Some("n"), Some(v)) => n = v.parse().map_err(|_| Error::Config("bad n".into()))?,
            (Some("L"), Some(v)) => l = v.parse().map_err(|_| Error::Config("bad L".into()))?,
            (Some("components"), Some(v)) => {
                comps = v.parse().map_err(|_| Error::Config("bad components".into()))?
            }
            _ => {}
        }
    }
    let bytes = std::fs::read(dir.join(format!("{stem}.bin")))?;
    let len = (n as usize).pow(dims as u32);
    if bytes.len() != 8 * len * comps {
        return Err(Error::MaskMismatch { expected: 8 * len * comps, got: bytes.len() });
    }
    let vals: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let components = vals.chunks(len).map(|c| c.to_vec()).collect();
    Ok((dims, n, l, components))
}

/// CSV of a 1D slice: the whole lattice in 1D, the row through the origin in 2D.
pub fn write_slice_csv(path: &Path, grid: &GridSpec, columns: &[(&str, &[f64])]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let n = grid.points_per_axis;
    let mut out = String::from("x");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..n {
        let flat = if grid.dim == 1 { i } else { grid.flat_index([n / 2, i]) };
        let _ = write!(out, "{:.12e}", grid.coordinate(i));
        for (_, col) in columns {
            let _ = write!(out, ",{:.12e}", col[flat]);
        }
        out.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid1(n: usize) -> GridSpec {
        GridSpec::interval(1.0, 8.0, n, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::interval(1.0, 8.0, 100, 1.0).is_err());
        assert!(GridSpec::interval(1.0, 8.0, 8, 1.0).is_err());
        assert!(GridSpec::interval(1.0, 4.0, 64, 1.0).is_err());
        assert!(GridSpec::new(1, 8.0, 64, Shape::Rectangle { half_widths: [1.0, 1.0] }, 1.0).is_err());
        assert!(GridSpec::new(3, 8.0, 64, Shape::Ball { radius: 1.0 }, 1.0).is_err());
    }

    #[test]
    fn masks_are_nested() {
        let g = GridSpec::new(2, 8.0, 32, Shape::Ball { radius: 1.0 }, 1.0).unwrap();
        let m = g.mask();
        assert!(m.inside.iter().zip(&m.buffer_inside).all(|(a, b)| !a || *b));
        assert!(m.omega_count() > 0);
    }

    #[test]
    fn extend_by_zero_cases() {
        let g = grid1(64);
        let m = g.mask().omega_count();
        let z = extend_by_zero(&g, &vec![0.0; m]).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));

        let ind = extend_by_zero(&g, &vec![1.0; m]).unwrap();
        let mask = g.mask();
        for (v, inside) in ind.values.iter().zip(&mask.inside) {
            assert_eq!(*v, if *inside { 1.0 } else { 0.0 });
        }

        let vals: Vec<f64> = (0..m).map(|i| (i as f64 * 0.37).sin()).collect();
        let e = extend_by_zero(&g, &vals).unwrap();
        let l1_omega: f64 = vals.iter().map(|v| v.abs()).sum::<f64>() * g.cell_volume();
        assert_relative_eq!(e.lp_norm(1.0, Region::Full).unwrap(), l1_omega, max_relative = 1e-14);
        assert_relative_eq!(
            e.lp_norm(3.0, Region::Full).unwrap(),
            e.lp_norm(3.0, Region::Omega).unwrap(),
            max_relative = 1e-14
        );

        assert!(matches!(extend_by_zero(&g, &vals[1..]), Err(Error::MaskMismatch { .. })));
    }

    #[test]
    fn lp_norm_cases() {
        let g = grid1(256);
        let one = ScalarField::constant(&g, 1.0);
        let v = one.lp_norm(1.0, Region::Omega).unwrap();
        assert!((v - 2.0).abs() <= 2.0 * g.spacing());

        let f = ScalarField::from_fn(&g, |x| (x[0] * 1.3).cos() + 0.2);
        let direct = (g.cell_volume() * f.values.iter().map(|v| v * v).sum::<f64>()).sqrt();
        assert_eq!(f.lp_norm(2.0, Region::Full).unwrap(), direct);

        let l = g.box_side;
        let sine = ScalarField::from_fn(&g, |x| (2.0 * std::f64::consts::PI * x[0] / l).sin());
        assert!((sine.lp_norm(2.0, Region::Full).unwrap() - (l / 2.0).sqrt()).abs() <= 1e-12);

        assert!(matches!(f.lp_norm(0.5, Region::Full), Err(Error::InvalidParameter(_))));
        let empty = vec![false; g.len()];
        assert!(matches!(f.lp_norm(2.0, Region::Custom(&empty)), Err(Error::EmptyRegion)));
    }

    #[test]
    fn lp_monotone_in_exponent_on_bounded_region() {
        let g = grid1(128);
        let f = ScalarField::from_fn(&g, |x| (3.0 * x[0]).sin() * (-x[0] * x[0]).exp());
        let omega_measure = g.mask().omega_count() as f64 * g.cell_volume();
        for (p, q) in [(1.0, 2.0), (2.0, 4.0), (1.5, f64::INFINITY)] {
            let np = f.lp_norm(p, Region::Omega).unwrap();
            let nq = f.lp_norm(q, Region::Omega).unwrap();
            let expo = 1.0 / p - if q.is_infinite() { 0.0 } else { 1.0 / q };
            assert!(np <= nq * omega_measure.powf(expo) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn quadrature_converges_under_refinement() {
        let f = |x: &[f64]| (-x[0] * x[0]).exp() * (2.0 * x[0]).cos();
        let a = ScalarField::from_fn(&grid1(64), f).lp_norm(2.0, Region::Full).unwrap();
        let b = ScalarField::from_fn(&grid1(128), f).lp_norm(2.0, Region::Full).unwrap();
        assert!((a - b).abs() < (8.0f64 / 64.0).powi(2));
    }

    #[test]
    fn holder_cases() {
        let g = grid1(64);
        let c = ScalarField::constant(&g, 3.0);
        assert_eq!(c.holder_seminorm(0.5, Region::Omega).unwrap(), 0.0);

        let id = ScalarField::from_fn(&g, |x| x[0]);
        let v = id.holder_seminorm(1.0, Region::Omega).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        let sq = ScalarField::from_fn(&g, |x| x[0].abs().sqrt());
        assert!(sq.holder_seminorm(0.5, Region::Omega).unwrap() >= 1.0 - 1e-12);
        assert!(id.holder_seminorm(0.0, Region::Omega).is_err());
    }

    #[test]
    fn field_dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = grid1(32);
        let f = ScalarField::from_fn(&g, |x| x[0] * 0.5);
        write_field(dir.path(), "u", &g, &[&f.values], Some(0.7)).unwrap();
        let (dims, n, l, comps) = read_field(dir.path(), "u").unwrap();
        assert_eq!((dims, n, l), (1, 32, 8.0));
        assert_eq!(comps[0], f.values);
        write_slice_csv(&dir.path().join("u.csv"), &g, &[("u", &f.values)]).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("u.csv")).unwrap();
        assert_eq!(csv.lines().count(), 33);
    }
}
