//! Cartesian tensor-product phase-space mesh.
//!
//! The phase domain is `Ω_x × Ω_v` with one periodic x-axis and one or two
//! bounded (cutoff) v-axes. All cells are uniform per axis, so geometry
//! reduces to a handful of widths; topology is index arithmetic.
//!
//! Axis convention: axis 0 is x, axes `1..=d_v` are velocity axes.
//! Cell indices are x-fastest: `cell = ix + n_x * (iv0 + n_v0 * iv1)`.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Wraps around (position axis).
    Periodic,
    /// Compact-support truncation: the exterior state is zero (velocity axes).
    Cutoff,
}

impl BoundaryKind {
    fn name(self) -> &'static str {
        match self {
            BoundaryKind::Periodic => "periodic",
            BoundaryKind::Cutoff => "cutoff",
        }
    }
}

/// Uniform partition of one coordinate axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisPartition {
    pub lo: f64,
    pub hi: f64,
    pub n_cells: usize,
    pub boundary: BoundaryKind,
}

impl AxisPartition {
    pub fn new(lo: f64, hi: f64, n_cells: usize, boundary: BoundaryKind) -> Result<Self> {
        if !(hi > lo) || n_cells == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidAxis { lo, hi, n_cells });
        }
        Ok(Self { lo, hi, n_cells, boundary })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Uniform cell width.
    pub fn cell_width(&self) -> f64 {
        self.width() / self.n_cells as f64
    }

    pub fn cell_lo(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.cell_width()
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.cell_width()
    }

    /// Cell containing `x`, clamped into range (points on the upper domain
    /// boundary belong to the last cell).
    pub fn locate(&self, x: f64) -> usize {
        let i = ((x - self.lo) / self.cell_width()).floor() as isize;
        i.clamp(0, self.n_cells as isize - 1) as usize
    }

    /// Map a physical coordinate in cell `i` to the reference interval [-1, 1].
    pub fn to_ref(&self, i: usize, x: f64) -> f64 {
        (x - self.cell_center(i)) / (0.5 * self.cell_width())
    }

    /// Map a reference coordinate in [-1, 1] to a physical point in cell `i`.
    pub fn from_ref(&self, i: usize, xi: f64) -> f64 {
        self.cell_center(i) + 0.5 * self.cell_width() * xi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Low,
    High,
}

impl Side {
    pub fn normal_sign(self) -> f64 {
        match self {
            Side::Low => -1.0,
            Side::High => 1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Low => Side::High,
            Side::High => Side::Low,
        }
    }
}

/// One face of one cell, with its across-face connectivity.
///
/// `neighbor_cell` is `None` exactly when the face lies on a cutoff
/// v-boundary; periodic x-faces always have a neighbor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeRef {
    pub axis: usize,
    pub side: Side,
    pub owner_cell: usize,
    pub neighbor_cell: Option<usize>,
    pub normal_sign: i8,
}

/// Cartesian partition of the phase domain `Ω_x × Ω_v`.
#[derive(Clone, Debug)]
pub struct PhaseMesh {
    x_axes: Vec<AxisPartition>,
    v_axes: Vec<AxisPartition>,
}

impl PhaseMesh {
    pub fn new(x_axes: Vec<AxisPartition>, v_axes: Vec<AxisPartition>) -> Result<Self> {
        if x_axes.len() != 1 || v_axes.is_empty() || v_axes.len() > 2 {
            return Err(Error::UnsupportedDims { d_x: x_axes.len(), d_v: v_axes.len() });
        }
        if x_axes[0].boundary != BoundaryKind::Periodic {
            return Err(Error::WrongBoundaryKind {
                axis: 0,
                expected: "periodic",
                found: x_axes[0].boundary.name(),
            });
        }
        for (j, v) in v_axes.iter().enumerate() {
            if v.boundary != BoundaryKind::Cutoff {
                return Err(Error::WrongBoundaryKind {
                    axis: 1 + j,
                    expected: "cutoff",
                    found: v.boundary.name(),
                });
            }
        }
        Ok(Self { x_axes, v_axes })
    }

    /// Convenience constructor from domain bounds.
    pub fn build(
        x_lo: f64,
        x_hi: f64,
        n_x: usize,
        v_bounds: &[(f64, f64)],
        n_v: usize,
    ) -> Result<Self> {
        let x = AxisPartition::new(x_lo, x_hi, n_x, BoundaryKind::Periodic)?;
        let v = v_bounds
            .iter()
            .map(|&(lo, hi)| AxisPartition::new(lo, hi, n_v, BoundaryKind::Cutoff))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vec![x], v)
    }

    pub fn x_axis(&self) -> &AxisPartition {
        &self.x_axes[0]
    }

    pub fn v_axes(&self) -> &[AxisPartition] {
        &self.v_axes
    }

    pub fn d_v(&self) -> usize {
        self.v_axes.len()
    }

    /// Phase-space dimension `d_x + d_v`.
    pub fn dim(&self) -> usize {
        1 + self.v_axes.len()
    }

    /// Partition of axis `a` in the 0 = x, 1.. = v convention.
    pub fn axis(&self, a: usize) -> &AxisPartition {
        if a == 0 {
            &self.x_axes[0]
        } else {
            &self.v_axes[a - 1]
        }
    }

    pub fn n_x(&self) -> usize {
        self.x_axes[0].n_cells
    }

    pub fn n_v_cells(&self) -> usize {
        self.v_axes.iter().map(|a| a.n_cells).product()
    }

    pub fn n_phase_cells(&self) -> usize {
        self.n_x() * self.n_v_cells()
    }

    /// Per-axis cell widths, `[w_x, w_v0, w_v1]` truncated to `dim()`.
    pub fn cell_widths(&self) -> Vec<f64> {
        let mut w = vec![self.x_axes[0].cell_width()];
        w.extend(self.v_axes.iter().map(|a| a.cell_width()));
        w
    }

    /// Measure of one phase cell (all cells are congruent).
    pub fn cell_measure(&self) -> f64 {
        self.cell_widths().iter().product()
    }

    /// Maximum mesh size `h = max(h_x, h_v)`.
    pub fn h_max(&self) -> f64 {
        self.cell_widths().into_iter().fold(0.0, f64::max)
    }

    pub fn h_x(&self) -> f64 {
        self.x_axes[0].cell_width()
    }

    pub fn h_v_min(&self) -> f64 {
        self.v_axes
            .iter()
            .map(|a| a.cell_width())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn cell_index(&self, ix: usize, iv: &[usize]) -> usize {
        debug_assert_eq!(iv.len(), self.d_v());
        let mut v_lin = 0;
        for j in (0..iv.len()).rev() {
            v_lin = v_lin * self.v_axes[j].n_cells + iv[j];
        }
        ix + self.n_x() * v_lin
    }

    /// Inverse of [`Self::cell_index`]: `(ix, [iv0, iv1])` with unused entries zero.
    pub fn cell_coords(&self, cell: usize) -> (usize, [usize; 2]) {
        debug_assert!(cell < self.n_phase_cells());
        let ix = cell % self.n_x();
        let mut rest = cell / self.n_x();
        let mut iv = [0usize; 2];
        for (j, axis) in self.v_axes.iter().enumerate() {
            iv[j] = rest % axis.n_cells;
            rest /= axis.n_cells;
        }
        (ix, iv)
    }

    /// Per-axis cell index along axis `a` for a phase cell.
    fn axis_coord(&self, cell: usize, a: usize) -> usize {
        let (ix, iv) = self.cell_coords(cell);
        if a == 0 {
            ix
        } else {
            iv[a - 1]
        }
    }

    /// All faces of `cell`, low/high per axis.
    pub fn edges(&self, cell: usize) -> Vec<EdgeRef> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for axis in 0..self.dim() {
            for side in [Side::Low, Side::High] {
                out.push(self.edge(cell, axis, side));
            }
        }
        out
    }

    pub fn edge(&self, cell: usize, axis: usize, side: Side) -> EdgeRef {
        EdgeRef {
            axis,
            side,
            owner_cell: cell,
            neighbor_cell: self.neighbor(cell, axis, side),
            normal_sign: match side {
                Side::Low => -1,
                Side::High => 1,
            },
        }
    }

    /// Cell across the `(axis, side)` face of `cell`: wraps periodically in x,
    /// absent past a cutoff v-boundary.
    pub fn neighbor(&self, cell: usize, axis: usize, side: Side) -> Option<usize> {
        let i = self.axis_coord(cell, axis);
        let n = self.axis(axis).n_cells;
        let step: isize = match side {
            Side::Low => -1,
            Side::High => 1,
        };
        let j = match self.axis(axis).boundary {
            BoundaryKind::Periodic => ((i as isize + step).rem_euclid(n as isize)) as usize,
            BoundaryKind::Cutoff => {
                let j = i as isize + step;
                if j < 0 || j >= n as isize {
                    return None;
                }
                j as usize
            }
        };
        let (ix, mut iv) = self.cell_coords(cell);
        let mut ix = ix;
        if axis == 0 {
            ix = j;
        } else {
            iv[axis - 1] = j;
        }
        Some(self.cell_index(ix, &iv[..self.d_v()]))
    }

    /// Physical coordinates of a reference point `xi` within `cell`,
    /// returned as `(x, [v0, v1])`.
    pub fn cell_point(&self, cell: usize, xi: &[f64]) -> (f64, [f64; 2]) {
        let (ix, iv) = self.cell_coords(cell);
        let x = self.x_axes[0].from_ref(ix, xi[0]);
        let mut v = [0.0f64; 2];
        for (j, axis) in self.v_axes.iter().enumerate() {
            v[j] = axis.from_ref(iv[j], xi[1 + j]);
        }
        (x, v)
    }
}
