//! Upwind DG discretization of the Vlasov transport `a_h(f_h, E_h, B_h; g)`.
//!
//! The residual is assembled cell by cell against every basis function of the
//! owning cell: volume transport terms plus upwind face fluxes on the cell
//! boundary. With the orthonormal basis the mass matrix is the identity, so
//! the returned coefficients are directly the stage rates of the scheme.
//!
//! Face fluxes are computed from both sides with bitwise-identical inputs
//! (shared edge coordinates, shared field tables), so owner and neighbor
//! contributions cancel exactly in conserved quantities and the assembly is
//! deterministic under any thread count.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{assembly_points, CellRule, FaceRule, ReferenceBasis};
use crate::error::{Error, Result};
use crate::field::{DistributionField, EMField};
use crate::mesh::{AxisPartition, PhaseMesh, Side};

/// Choice of transport velocity: `v` itself, or the relativistic
/// `v / sqrt(1 + |v|^2)` (momentum variable, unit-bounded speed).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VelocityMapping {
    Classical,
    Relativistic,
}

impl VelocityMapping {
    /// Transport velocity as a padded 3-vector.
    pub fn transport(self, v: [f64; 2], d_v: usize) -> [f64; 3] {
        let v3 = [v[0], if d_v > 1 { v[1] } else { 0.0 }, 0.0];
        match self {
            VelocityMapping::Classical => v3,
            VelocityMapping::Relativistic => {
                let g = (1.0 + v3[0] * v3[0] + v3[1] * v3[1]).sqrt();
                [v3[0] / g, v3[1] / g, 0.0]
            }
        }
    }

    /// Upper bound of the spatial transport speed over the velocity box.
    pub fn x_transport_bound(self, v_axes: &[AxisPartition]) -> f64 {
        let m = v_axes[0].lo.abs().max(v_axes[0].hi.abs());
        match self {
            VelocityMapping::Classical => m,
            VelocityMapping::Relativistic => m / (1.0 + m * m).sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VelocityMapping::Classical => "classical",
            VelocityMapping::Relativistic => "relativistic",
        }
    }
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Upwind flux through an x-face: `{f v}·n + (|v·n|/2) [f]·n`.
///
/// Selects `v·n * f_minus` for outflow (`v·n > 0`) and `v·n * f_plus` for
/// inflow; continuous (central) at `v·n = 0`.
pub fn upwind_flux_x(v_dot_n: f64, f_minus: f64, f_plus: f64) -> f64 {
    0.5 * v_dot_n * (f_minus + f_plus) + 0.5 * v_dot_n.abs() * (f_minus - f_plus)
}

/// Upwind flux through a v-face; same selection with the normal acceleration
/// `(E + v x B)·n_v`. On cutoff boundary faces the exterior trace is zero,
/// which reproduces the compact-support boundary convention.
pub fn upwind_flux_v(a_dot_n: f64, f_minus: f64, f_plus: f64) -> f64 {
    upwind_flux_x(a_dot_n, f_minus, f_plus)
}

/// Acceleration components along the velocity axes: `(E + vt x B)_j`.
pub fn acceleration(e: [f64; 3], b: [f64; 3], vt: [f64; 3]) -> [f64; 2] {
    let c = cross(vt, b);
    [e[0] + c[0], e[1] + c[1]]
}

/// Normal acceleration `(E_h + vt x B_h)·n_v` at a point of a v-face.
pub fn field_at_face(
    em: &EMField,
    x: f64,
    v: [f64; 2],
    mapping: VelocityMapping,
    d_v: usize,
    v_axis: usize,
    normal_sign: f64,
) -> f64 {
    let (e, b) = em.eval(x);
    let vt = mapping.transport(v, d_v);
    normal_sign * acceleration(e, b, vt)[v_axis]
}

/// Precomputed tables for assembling `a_h` on one mesh/basis pair.
pub struct VlasovOperator {
    pub mesh: Arc<PhaseMesh>,
    pub basis: Arc<ReferenceBasis>,
    pub em_basis: Arc<ReferenceBasis>,
    rule: CellRule,
    /// Per axis: `[low, high]` face rules.
    faces: Vec<[FaceRule; 2]>,
    /// EM basis values at the 1D volume nodes: `[node * n_m1 + m]`.
    em_node_values: Vec<f64>,
}

impl VlasovOperator {
    pub fn new(
        mesh: Arc<PhaseMesh>,
        basis: Arc<ReferenceBasis>,
        em_basis: Arc<ReferenceBasis>,
    ) -> Self {
        assert_eq!(basis.dim, mesh.dim());
        assert_eq!(em_basis.dim, 1);
        let n1 = assembly_points(basis.degree);
        let rule = CellRule::new(&basis, n1);
        let faces = (0..basis.dim)
            .map(|axis| {
                [
                    FaceRule::new(&basis, n1, axis, false),
                    FaceRule::new(&basis, n1, axis, true),
                ]
            })
            .collect();
        let n_m1 = em_basis.n_modes();
        let mut em_node_values = vec![0.0; n1 * n_m1];
        for (r, &x) in rule.nodes_1d.iter().enumerate() {
            for m in 0..n_m1 {
                em_node_values[r * n_m1 + m] = em_basis.eval_mode(m, &[x]);
            }
        }
        Self { mesh, basis, em_basis, rule, faces, em_node_values }
    }

    pub fn n1(&self) -> usize {
        self.rule.n1
    }

    /// Physical `(E, B)` at the 1D volume nodes of every x-cell.
    pub fn em_at_nodes(&self, em: &EMField) -> Vec<([f64; 3], [f64; 3])> {
        let n1 = self.rule.n1;
        let n_m1 = self.em_basis.n_modes();
        let n_x = self.mesh.n_x();
        let mut out = vec![([0.0; 3], [0.0; 3]); n_x * n1];
        for ix in 0..n_x {
            for r in 0..n1 {
                out[ix * n1 + r] =
                    em.eval_ref_with(ix, &self.em_node_values[r * n_m1..(r + 1) * n_m1]);
            }
        }
        out
    }

    /// Evaluate the full residual: for every cell basis function `g`,
    /// `out[cell, m] = a_h(f, E_h, B_h; g_{cell,m})`.
    pub fn apply(
        &self,
        f: &DistributionField,
        em: &EMField,
        mapping: VelocityMapping,
    ) -> Result<Vec<f64>> {
        if !Arc::ptr_eq(&f.mesh, &self.mesh)
            && (f.mesh.cell_widths() != self.mesh.cell_widths()
                || f.mesh.n_phase_cells() != self.mesh.n_phase_cells())
        {
            return Err(Error::MeshMismatch("distribution mesh differs from operator mesh"));
        }
        if f.basis.n_modes() * self.mesh.n_phase_cells() != f.coeffs.len()
            || em.basis.n_modes() != self.em_basis.n_modes()
        {
            return Err(Error::MeshMismatch("basis layout differs from operator tables"));
        }
        em.compatible_with(&self.mesh)?;
        let em_nodes = self.em_at_nodes(em);
        let n_m = self.basis.n_modes();
        let mut out = vec![0.0; f.coeffs.len()];
        // thread dispatch costs more than the work below ~1k cells; the
        // per-cell outputs are identical either way
        if self.mesh.n_phase_cells() < 1024 {
            out.chunks_mut(n_m).enumerate().for_each(|(cell, r)| {
                self.cell_residual(cell, f, &em_nodes, mapping, r);
            });
        } else {
            out.par_chunks_mut(n_m).enumerate().for_each(|(cell, r)| {
                self.cell_residual(cell, f, &em_nodes, mapping, r);
            });
        }
        Ok(out)
    }

    fn cell_residual(
        &self,
        cell: usize,
        f: &DistributionField,
        em_nodes: &[([f64; 3], [f64; 3])],
        mapping: VelocityMapping,
        r: &mut [f64],
    ) {
        let mesh = &self.mesh;
        let dim = self.basis.dim;
        let d_v = mesh.d_v();
        let n_m = self.basis.n_modes();
        let n1 = self.rule.n1;
        let (ix, iv) = mesh.cell_coords(cell);
        let widths = mesh.cell_widths();
        let mut two_over_w = [0.0f64; 3];
        for a in 0..dim {
            two_over_w[a] = 2.0 / widths[a];
        }
        let c = f.cell_coeffs(cell);

        // volume terms: f (vt . grad_x g + (E + vt x B) . grad_v g)
        for q in 0..self.rule.n_nodes {
            let vals = &self.rule.values[q * n_m..(q + 1) * n_m];
            let mut fq = 0.0;
            for m in 0..n_m {
                fq += c[m] * vals[m];
            }
            let xi = &self.rule.points[q * dim..(q + 1) * dim];
            let mut v = [0.0f64; 2];
            for j in 0..d_v {
                v[j] = mesh.v_axes()[j].from_ref(iv[j], xi[1 + j]);
            }
            let vt = mapping.transport(v, d_v);
            let (e, b) = em_nodes[ix * n1 + q % n1];
            let acc = acceleration(e, b, vt);
            let wf = self.rule.weights[q] * fq;
            let cx = wf * vt[0] * two_over_w[0];
            let mut cv = [0.0f64; 2];
            for j in 0..d_v {
                cv[j] = wf * acc[j] * two_over_w[1 + j];
            }
            let gx = &self.rule.grads[0][q * n_m..(q + 1) * n_m];
            for m in 0..n_m {
                r[m] += cx * gx[m];
            }
            for j in 0..d_v {
                let gv = &self.rule.grads[1 + j][q * n_m..(q + 1) * n_m];
                for m in 0..n_m {
                    r[m] += cv[j] * gv[m];
                }
            }
        }

        // face terms: - sum over the cell boundary of (upwind flux) * g
        for axis in 0..dim {
            for (side_idx, side) in [Side::Low, Side::High].into_iter().enumerate() {
                let face = &self.faces[axis][side_idx];
                let opp = &self.faces[axis][1 - side_idx];
                let sign = side.normal_sign();
                let neighbor = mesh.neighbor(cell, axis, side);
                let cn = neighbor.map(|nb| f.cell_coeffs(nb));
                // pinned coordinate computed from the shared edge index so
                // both incident cells see bitwise-identical geometry
                let axis_part = mesh.axis(axis);
                let edge_cell = if axis == 0 { ix } else { iv[axis - 1] };
                let edge_coord = match side {
                    Side::Low => axis_part.cell_lo(edge_cell),
                    Side::High => axis_part.cell_lo(edge_cell + 1),
                };
                for fq in 0..face.n_nodes {
                    let xi = &face.points[fq * dim..(fq + 1) * dim];
                    let mut v = [0.0f64; 2];
                    for j in 0..d_v {
                        v[j] = if axis == 1 + j {
                            edge_coord
                        } else {
                            mesh.v_axes()[j].from_ref(iv[j], xi[1 + j])
                        };
                    }
                    let vt = mapping.transport(v, d_v);
                    let beta_n = if axis == 0 {
                        sign * vt[0]
                    } else {
                        // x varies along v-faces; axis 0 is the fastest face axis
                        let (e, b) = em_nodes[ix * n1 + fq % n1];
                        sign * acceleration(e, b, vt)[axis - 1]
                    };
                    let tr = &face.values[fq * n_m..(fq + 1) * n_m];
                    let mut f_minus = 0.0;
                    for m in 0..n_m {
                        f_minus += c[m] * tr[m];
                    }
                    let f_plus = match cn {
                        Some(cn) => {
                            let trn = &opp.values[fq * n_m..(fq + 1) * n_m];
                            let mut s = 0.0;
                            for m in 0..n_m {
                                s += cn[m] * trn[m];
                            }
                            s
                        }
                        None => 0.0,
                    };
                    let flux = upwind_flux_x(beta_n, f_minus, f_plus);
                    let wf = two_over_w[axis] * face.weights[fq] * flux;
                    for m in 0..n_m {
                        r[m] -= wf * tr[m];
                    }
                }
            }
        }
    }

    /// Max `|E_h + vt x B_h|` over all v-face quadrature nodes: the
    /// acceleration bound entering the CFL policy.
    pub fn max_face_acceleration(&self, em: &EMField, mapping: VelocityMapping) -> f64 {
        let mesh = &self.mesh;
        let dim = self.basis.dim;
        let d_v = mesh.d_v();
        let n1 = self.rule.n1;
        let em_nodes = self.em_at_nodes(em);
        let mut worst: f64 = 0.0;
        for cell in 0..mesh.n_phase_cells() {
            let (ix, iv) = mesh.cell_coords(cell);
            for axis in 1..dim {
                let face = &self.faces[axis][1];
                for fq in 0..face.n_nodes {
                    let xi = &face.points[fq * dim..(fq + 1) * dim];
                    let mut v = [0.0f64; 2];
                    for j in 0..d_v {
                        v[j] = mesh.v_axes()[j].from_ref(iv[j], xi[1 + j]);
                    }
                    let vt = mapping.transport(v, d_v);
                    let (e, b) = em_nodes[ix * n1 + fq % n1];
                    let a = acceleration(e, b, vt);
                    let mag = match d_v {
                        1 => a[0].abs(),
                        _ => (a[0] * a[0] + a[1] * a[1]).sqrt(),
                    };
                    worst = worst.max(mag);
                }
            }
        }
        worst
    }
}
