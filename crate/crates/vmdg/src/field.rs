//! Discrete fields: the phase-space distribution and the electromagnetic
//! field, both stored as modal coefficients in the per-cell orthonormal basis.
//!
//! With the orthonormal scaling, the L2 norm of a field is the Euclidean norm
//! of its coefficient vector, and L2 projection needs no mass-matrix solve.

use std::sync::Arc;

use crate::basis::{assembly_points, CellRule, ReferenceBasis};
use crate::error::{Error, Result};
use crate::mesh::{AxisPartition, PhaseMesh};

/// DG coefficients of `f_h`, cell-major: `coeffs[cell * n_modes + m]`.
#[derive(Clone, Debug)]
pub struct DistributionField {
    pub mesh: Arc<PhaseMesh>,
    pub basis: Arc<ReferenceBasis>,
    pub coeffs: Vec<f64>,
}

impl DistributionField {
    pub fn zeros(mesh: Arc<PhaseMesh>, basis: Arc<ReferenceBasis>) -> Self {
        assert_eq!(basis.dim, mesh.dim());
        let n = mesh.n_phase_cells() * basis.n_modes();
        Self { mesh, basis, coeffs: vec![0.0; n] }
    }

    /// L2 projection of a callable `g(x, v)` by cellwise quadrature.
    pub fn project(
        mesh: Arc<PhaseMesh>,
        basis: Arc<ReferenceBasis>,
        g: impl Fn(f64, [f64; 2]) -> f64,
    ) -> Self {
        let rule = CellRule::new(&basis, assembly_points(basis.degree));
        Self::project_with_rule(mesh, basis, &rule, g)
    }

    pub fn project_with_rule(
        mesh: Arc<PhaseMesh>,
        basis: Arc<ReferenceBasis>,
        rule: &CellRule,
        g: impl Fn(f64, [f64; 2]) -> f64,
    ) -> Self {
        let mut out = Self::zeros(mesh.clone(), basis.clone());
        let n_m = basis.n_modes();
        let dim = basis.dim;
        let sqrt_j = (mesh.cell_measure() / (2.0f64).powi(dim as i32)).sqrt();
        for cell in 0..mesh.n_phase_cells() {
            let c = &mut out.coeffs[cell * n_m..(cell + 1) * n_m];
            for q in 0..rule.n_nodes {
                let xi = &rule.points[q * dim..(q + 1) * dim];
                let (x, v) = mesh.cell_point(cell, xi);
                let gv = g(x, v) * rule.weights[q] * sqrt_j;
                let vals = &rule.values[q * n_m..(q + 1) * n_m];
                for m in 0..n_m {
                    c[m] += gv * vals[m];
                }
            }
        }
        out
    }

    pub fn n_modes(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn cell_coeffs(&self, cell: usize) -> &[f64] {
        let n_m = self.n_modes();
        &self.coeffs[cell * n_m..(cell + 1) * n_m]
    }

    /// Point value `sum_m c_m phi_m(xi(x,v)) / sqrt(J)`; `(x, v)` must lie in
    /// the closure of `cell` (face traces from either side are fine).
    pub fn eval_in_cell(&self, cell: usize, x: f64, v: [f64; 2]) -> f64 {
        let (ix, iv) = self.mesh.cell_coords(cell);
        let mut xi = [0.0f64; 3];
        xi[0] = self.mesh.x_axis().to_ref(ix, x);
        for j in 0..self.mesh.d_v() {
            xi[1 + j] = self.mesh.v_axes()[j].to_ref(iv[j], v[j]);
        }
        let c = self.cell_coeffs(cell);
        let mut s = 0.0;
        for (m, &cm) in c.iter().enumerate() {
            s += cm * self.basis.eval_mode(m, &xi[..self.basis.dim]);
        }
        s / self.jacobian().sqrt()
    }

    /// Point value with cell lookup.
    pub fn eval(&self, x: f64, v: [f64; 2]) -> f64 {
        let ix = self.mesh.x_axis().locate(x);
        let mut iv = [0usize; 2];
        for j in 0..self.mesh.d_v() {
            iv[j] = self.mesh.v_axes()[j].locate(v[j]);
        }
        self.eval_in_cell(self.mesh.cell_index(ix, &iv[..self.mesh.d_v()]), x, v)
    }

    fn jacobian(&self) -> f64 {
        self.mesh.cell_measure() / (2.0f64).powi(self.basis.dim as i32)
    }

    /// `||f_h||_{L2}`, exact under the orthonormal basis.
    pub fn l2_norm(&self) -> f64 {
        crate::diagnostics::neumaier_sum(self.coeffs.iter().map(|c| c * c)).sqrt()
    }

    /// Total mass `∫∫ f_h dx dv` (constant modes only).
    pub fn mass(&self) -> f64 {
        let n_m = self.n_modes();
        let scale = self.mesh.cell_measure().sqrt();
        crate::diagnostics::neumaier_sum(
            self.coeffs.iter().step_by(n_m).map(|c0| c0 * scale),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

/// Electromagnetic field components in the fixed order used everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    E1,
    E2,
    E3,
    B1,
    B2,
    B3,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::E1,
        Component::E2,
        Component::E3,
        Component::B1,
        Component::B2,
        Component::B3,
    ];

    pub fn index(self) -> usize {
        match self {
            Component::E1 => 0,
            Component::E2 => 1,
            Component::E3 => 2,
            Component::B1 => 3,
            Component::B2 => 4,
            Component::B3 => 5,
        }
    }

    pub fn is_electric(self) -> bool {
        self.index() < 3
    }

    pub fn name(self) -> &'static str {
        ["E1", "E2", "E3", "B1", "B2", "B3"][self.index()]
    }
}

/// Subset of the six EM components that carry degrees of freedom.
///
/// Inactive components read as exactly zero and are never stored; this is how
/// the reduced 1D1V and 1D2V systems drop the identically-vanishing fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComponentSet(u8);

impl ComponentSet {
    pub const EMPTY: ComponentSet = ComponentSet(0);

    pub fn of(components: &[Component]) -> Self {
        let mut bits = 0u8;
        for c in components {
            bits |= 1 << c.index();
        }
        ComponentSet(bits)
    }

    pub fn contains(self, c: Component) -> bool {
        self.0 & (1 << c.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Component> {
        Component::ALL.into_iter().filter(move |c| self.contains(*c))
    }

    /// Storage slot of `c` among the active components, in fixed order.
    pub fn slot(self, c: Component) -> Option<usize> {
        if !self.contains(c) {
            return None;
        }
        Some((self.0 & ((1 << c.index()) - 1)).count_ones() as usize)
    }

    pub fn has_tangential(self) -> bool {
        use Component::*;
        [E2, E3, B2, B3].iter().any(|&c| self.contains(c))
    }

    pub fn names(self) -> String {
        let v: Vec<&str> = self.iter().map(|c| c.name()).collect();
        format!("{{{}}}", v.join(","))
    }
}

/// DG coefficients of `(E_h, B_h)` on the spatial mesh,
/// `coeffs[(ix * n_active + slot) * n_modes + m]`.
#[derive(Clone, Debug)]
pub struct EMField {
    pub x_axis: AxisPartition,
    pub basis: Arc<ReferenceBasis>,
    pub active: ComponentSet,
    pub coeffs: Vec<f64>,
}

impl EMField {
    pub fn zeros(x_axis: AxisPartition, basis: Arc<ReferenceBasis>, active: ComponentSet) -> Self {
        assert_eq!(basis.dim, 1);
        let n = x_axis.n_cells * active.len() * basis.n_modes();
        Self { x_axis, basis, active, coeffs: vec![0.0; n] }
    }

    /// L2 projection of initial data `(E_0, B_0)(x)` componentwise; inactive
    /// components are dropped (they must vanish for the scenario to be
    /// consistent, which `verify_scenario` spot-checks).
    pub fn project(
        x_axis: AxisPartition,
        basis: Arc<ReferenceBasis>,
        active: ComponentSet,
        e0: impl Fn(f64) -> [f64; 3],
        b0: impl Fn(f64) -> [f64; 3],
    ) -> Self {
        let rule = CellRule::new(&basis, assembly_points(basis.degree));
        let mut out = Self::zeros(x_axis, basis.clone(), active);
        let n_m = basis.n_modes();
        let sqrt_j = (0.5 * x_axis.cell_width()).sqrt();
        for ix in 0..x_axis.n_cells {
            for q in 0..rule.n_nodes {
                let x = x_axis.from_ref(ix, rule.points[q]);
                let (e, b) = (e0(x), b0(x));
                let w = rule.weights[q] * sqrt_j;
                for c in active.iter() {
                    let val = if c.is_electric() { e[c.index()] } else { b[c.index() - 3] };
                    let slot = active.slot(c).unwrap();
                    let dst =
                        &mut out.coeffs[(ix * active.len() + slot) * n_m..][..n_m];
                    let vals = &rule.values[q * n_m..(q + 1) * n_m];
                    for m in 0..n_m {
                        dst[m] += w * val * vals[m];
                    }
                }
            }
        }
        out
    }

    pub fn n_modes(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn component_coeffs(&self, ix: usize, c: Component) -> Option<&[f64]> {
        let slot = self.active.slot(c)?;
        let n_m = self.n_modes();
        Some(&self.coeffs[(ix * self.active.len() + slot) * n_m..][..n_m])
    }

    /// Physical `(E, B)` at reference coordinate `xi` inside cell `ix`,
    /// given precomputed basis values at `xi`.
    pub fn eval_ref_with(&self, ix: usize, basis_vals: &[f64]) -> ([f64; 3], [f64; 3]) {
        let n_m = self.n_modes();
        let inv_sqrt_j = 1.0 / (0.5 * self.x_axis.cell_width()).sqrt();
        let mut e = [0.0f64; 3];
        let mut b = [0.0f64; 3];
        for c in self.active.iter() {
            let coeffs = self.component_coeffs(ix, c).unwrap();
            let mut s = 0.0;
            for m in 0..n_m {
                s += coeffs[m] * basis_vals[m];
            }
            s *= inv_sqrt_j;
            if c.is_electric() {
                e[c.index()] = s;
            } else {
                b[c.index() - 3] = s;
            }
        }
        (e, b)
    }

    /// Physical `(E, B)` at a point `x`.
    pub fn eval(&self, x: f64) -> ([f64; 3], [f64; 3]) {
        let ix = self.x_axis.locate(x);
        let xi = self.x_axis.to_ref(ix, x);
        let n_m = self.n_modes();
        let vals: Vec<f64> = (0..n_m).map(|m| self.basis.eval_mode(m, &[xi])).collect();
        self.eval_ref_with(ix, &vals)
    }

    /// `(||E_h||, ||B_h||)` in L2.
    pub fn l2_norms(&self) -> (f64, f64) {
        let mut e2 = 0.0;
        let mut b2 = 0.0;
        for ix in 0..self.x_axis.n_cells {
            for c in self.active.iter() {
                let coeffs = self.component_coeffs(ix, c).unwrap();
                let s: f64 = coeffs.iter().map(|c| c * c).sum();
                if c.is_electric() {
                    e2 += s;
                } else {
                    b2 += s;
                }
            }
        }
        (e2.sqrt(), b2.sqrt())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn compatible_with(&self, mesh: &PhaseMesh) -> Result<()> {
        if *mesh.x_axis() != self.x_axis {
            return Err(Error::MeshMismatch("EM field does not live on the x-projection"));
        }
        Ok(())
    }
}
