//! DG discretization of the Maxwell part `b_h(E_h, B_h, f_h; U, V)`:
//! 1D curl terms, the current coupling `-∫ J_h · U`, and a choice of upwind,
//! central, or alternating numerical fluxes on the x-faces.
//!
//! In one spatial dimension the curl couples only the tangential pairs
//! (E2, B3) and (E3, B2); E1 evolves by `-J1` alone and B1 is static. The
//! active-component mask drops whatever the scenario's reduced system does
//! not carry.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{assembly_points, CellRule, ReferenceBasis};
use crate::error::{Error, Result};
use crate::field::{Component, DistributionField, EMField};
use crate::mesh::PhaseMesh;
use crate::vlasov::VelocityMapping;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxwellFluxKind {
    /// `n x ({E} + [B]_tan/2, {B} - [E]_tan/2)`: dissipative, the scheme's default.
    Upwind,
    /// `n x ({E}, {B})`: energy conserving, sub-optimal order for even degree.
    Central,
    /// `n x (E^-, B^+)` with the minus trace taken from the lower-x cell.
    AlternatingEmBp,
    /// `n x (E^+, B^-)`, the mirrored convention.
    AlternatingEpBm,
}

impl MaxwellFluxKind {
    pub fn name(self) -> &'static str {
        match self {
            MaxwellFluxKind::Upwind => "upwind",
            MaxwellFluxKind::Central => "central",
            MaxwellFluxKind::AlternatingEmBp => "alternating_embp",
            MaxwellFluxKind::AlternatingEpBm => "alternating_epbm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "upwind" => Ok(Self::Upwind),
            "central" => Ok(Self::Central),
            "alternating_embp" => Ok(Self::AlternatingEmBp),
            "alternating_epbm" => Ok(Self::AlternatingEpBm),
            _ => Err(Error::Config(format!("unknown flux kind `{s}`"))),
        }
    }
}

/// Velocity moments of `f_h`: charge density and current, as spatial DG
/// coefficients (same basis and normalization as [`EMField`]).
#[derive(Clone, Debug)]
pub struct MomentPair {
    pub n_modes: usize,
    /// `rho[ix * n_modes + m]`
    pub rho: Vec<f64>,
    /// Per Cartesian component: `j[c][ix * n_modes + m]`; `j[2]` is zero for
    /// the planar velocity spaces handled here.
    pub j: [Vec<f64>; 3],
}

/// Tangential-pair face values `(E2h, E3h, B2h, B3h)` selected by the flux.
fn face_hats(
    flux: MaxwellFluxKind,
    left: [f64; 6],
    right: [f64; 6],
) -> [f64; 4] {
    let avg = |a: f64, b: f64| 0.5 * (a + b);
    let [e2l, e3l, b2l, b3l] = [left[1], left[2], left[4], left[5]];
    let [e2r, e3r, b2r, b3r] = [right[1], right[2], right[4], right[5]];
    match flux {
        MaxwellFluxKind::Upwind => [
            avg(e2l, e2r) + 0.5 * (b3l - b3r),
            avg(e3l, e3r) - 0.5 * (b2l - b2r),
            avg(b2l, b2r) - 0.5 * (e3l - e3r),
            avg(b3l, b3r) + 0.5 * (e2l - e2r),
        ],
        MaxwellFluxKind::Central => [
            avg(e2l, e2r),
            avg(e3l, e3r),
            avg(b2l, b2r),
            avg(b3l, b3r),
        ],
        MaxwellFluxKind::AlternatingEmBp => [e2l, e3l, b2r, b3r],
        MaxwellFluxKind::AlternatingEpBm => [e2r, e3r, b2l, b3l],
    }
}

pub struct MaxwellOperator {
    pub mesh: Arc<PhaseMesh>,
    pub phase_basis: Arc<ReferenceBasis>,
    pub em_basis: Arc<ReferenceBasis>,
    phase_rule: CellRule,
    rule1: CellRule,
    /// Phase-rule x-node values of the spatial basis, `[node * n_m1 + m]`.
    xnode_values: Vec<f64>,
    /// Spatial basis traces at the cell endpoints.
    trace_lo: Vec<f64>,
    trace_hi: Vec<f64>,
}

impl MaxwellOperator {
    pub fn new(
        mesh: Arc<PhaseMesh>,
        phase_basis: Arc<ReferenceBasis>,
        em_basis: Arc<ReferenceBasis>,
    ) -> Self {
        let n1 = assembly_points(phase_basis.degree);
        let phase_rule = CellRule::new(&phase_basis, n1);
        let rule1 = CellRule::new(&em_basis, assembly_points(em_basis.degree));
        let n_m1 = em_basis.n_modes();
        let mut xnode_values = vec![0.0; n1 * n_m1];
        for (r, &x) in phase_rule.nodes_1d.iter().enumerate() {
            for m in 0..n_m1 {
                xnode_values[r * n_m1 + m] = em_basis.eval_mode(m, &[x]);
            }
        }
        let trace_lo: Vec<f64> = (0..n_m1).map(|m| em_basis.eval_mode(m, &[-1.0])).collect();
        let trace_hi: Vec<f64> = (0..n_m1).map(|m| em_basis.eval_mode(m, &[1.0])).collect();
        Self { mesh, phase_basis, em_basis, phase_rule, rule1, xnode_values, trace_lo, trace_hi }
    }

    /// Velocity moments `rho_h = ∫ f_h dv` and `J_h = ∫ f_h vt dv`, assembled
    /// into the spatial DG space. Exact for the classical mapping; the
    /// relativistic weight is integrated with the same rule.
    pub fn compute_moments(&self, f: &DistributionField, mapping: VelocityMapping) -> MomentPair {
        let mesh = &self.mesh;
        let n_m = self.phase_basis.n_modes();
        let n_m1 = self.em_basis.n_modes();
        let n_x = mesh.n_x();
        let n1 = self.phase_rule.n1;
        let dim = self.phase_basis.dim;
        let d_v = mesh.d_v();
        let j_v: f64 = mesh.v_axes().iter().map(|a| 0.5 * a.cell_width()).product();
        let sqrt_jv = j_v.sqrt();
        let mut rho = vec![0.0; n_x * n_m1];
        let mut j = [vec![0.0; n_x * n_m1], vec![0.0; n_x * n_m1], vec![0.0; n_x * n_m1]];
        let n_vcells = mesh.n_v_cells();
        // x-major loop so each x-cell's accumulators are written once
        for ix in 0..n_x {
            let rho_ix = &mut rho[ix * n_m1..(ix + 1) * n_m1];
            let mut j_ix = vec![[0.0f64; 3]; n_m1];
            for ivc in 0..n_vcells {
                let cell = ix + n_x * ivc;
                let (_, iv) = mesh.cell_coords(cell);
                let c = f.cell_coeffs(cell);
                for q in 0..self.phase_rule.n_nodes {
                    let vals = &self.phase_rule.values[q * n_m..(q + 1) * n_m];
                    let mut fq = 0.0;
                    for m in 0..n_m {
                        fq += c[m] * vals[m];
                    }
                    let xi = &self.phase_rule.points[q * dim..(q + 1) * dim];
                    let mut v = [0.0f64; 2];
                    for a in 0..d_v {
                        v[a] = mesh.v_axes()[a].from_ref(iv[a], xi[1 + a]);
                    }
                    let vt = mapping.transport(v, d_v);
                    let w = self.phase_rule.weights[q] * sqrt_jv * fq;
                    let xv = &self.xnode_values[(q % n1) * n_m1..(q % n1 + 1) * n_m1];
                    for m in 0..n_m1 {
                        rho_ix[m] += w * xv[m];
                        for cpt in 0..3 {
                            j_ix[m][cpt] += w * vt[cpt] * xv[m];
                        }
                    }
                }
            }
            for (m, jm) in j_ix.iter().enumerate() {
                for cpt in 0..3 {
                    j[cpt][ix * n_m1 + m] = jm[cpt];
                }
            }
        }
        MomentPair { n_modes: n_m1, rho, j }
    }

    /// Constant ion background `rho_i = (∫ rho_h dx) / |Ω_x|` enforcing
    /// global neutrality.
    pub fn background_density(&self, moments: &MomentPair) -> f64 {
        let x = self.mesh.x_axis();
        let scale = x.cell_width().sqrt();
        let total = crate::diagnostics::neumaier_sum(
            moments.rho.iter().step_by(moments.n_modes).map(|c0| c0 * scale),
        );
        total / x.width()
    }

    /// Evaluate the Maxwell residual: for every active component's basis
    /// function, the corresponding `b_h` value (current term included when
    /// moments are supplied).
    pub fn apply(
        &self,
        em: &EMField,
        moments: Option<&MomentPair>,
        flux: MaxwellFluxKind,
    ) -> Result<Vec<f64>> {
        em.compatible_with(&self.mesh)?;
        if em.basis.n_modes() != self.em_basis.n_modes() {
            return Err(Error::MeshMismatch("EM basis differs from operator tables"));
        }
        if flux != MaxwellFluxKind::Upwind && !em.active.has_tangential() {
            return Err(Error::FluxMaskIncompatible {
                flux: flux.name(),
                active: em.active.names(),
            });
        }
        if let Some(m) = moments {
            assert_eq!(m.n_modes, self.em_basis.n_modes(), "moments from a different basis");
        }
        let n_m1 = self.em_basis.n_modes();
        let n_x = em.x_axis.n_cells;
        let n_active = em.active.len();
        let two_over_w = 2.0 / em.x_axis.cell_width();
        let mut out = vec![0.0; em.coeffs.len()];
        let stride = n_active * n_m1;
        let cell_kernel = |(ix, r): (usize, &mut [f64])| {
            if n_active == 0 {
                return;
            }
            // reference-scaled component values at the volume nodes
            let comp = |jx: usize, c: Component, vals: &[f64]| -> f64 {
                match em.component_coeffs(jx, c) {
                    Some(cc) => cc.iter().zip(vals).map(|(a, b)| a * b).sum(),
                    None => 0.0,
                }
            };
            use Component::*;
            for q in 0..self.rule1.n_nodes {
                let vals = &self.rule1.values[q * n_m1..(q + 1) * n_m1];
                let grad = &self.rule1.grads[0][q * n_m1..(q + 1) * n_m1];
                let e2 = comp(ix, E2, vals);
                let e3 = comp(ix, E3, vals);
                let b2 = comp(ix, B2, vals);
                let b3 = comp(ix, B3, vals);
                let w = self.rule1.weights[q] * two_over_w;
                for (c, sgn, val) in [
                    (E2, 1.0, b3),
                    (E3, -1.0, b2),
                    (B2, -1.0, e3),
                    (B3, 1.0, e2),
                ] {
                    if let Some(slot) = em.active.slot(c) {
                        let rr = &mut r[slot * n_m1..(slot + 1) * n_m1];
                        let ws = w * sgn * val;
                        for m in 0..n_m1 {
                            rr[m] += ws * grad[m];
                        }
                    }
                }
            }
            // current coupling: coefficients subtract directly (orthonormal basis)
            if let Some(mom) = moments {
                for c in [E1, E2, E3] {
                    if let Some(slot) = em.active.slot(c) {
                        let rr = &mut r[slot * n_m1..(slot + 1) * n_m1];
                        let jj = &mom.j[c.index()][ix * n_m1..(ix + 1) * n_m1];
                        for m in 0..n_m1 {
                            rr[m] -= jj[m];
                        }
                    }
                }
            }
            // face terms at both endpoints; hats built in geometric
            // left/right roles so both incident cells agree bitwise
            let traces = |jx: usize, tr: &[f64]| -> [f64; 6] {
                let mut t = [0.0f64; 6];
                for c in Component::ALL {
                    t[c.index()] = comp(jx, c, tr);
                }
                t
            };
            for (side_sign, nb, own_tr) in [
                (-1.0, (ix + n_x - 1) % n_x, &self.trace_lo),
                (1.0, (ix + 1) % n_x, &self.trace_hi),
            ] {
                let own = traces(ix, own_tr);
                let (left, right) = if side_sign > 0.0 {
                    (own, traces(nb, &self.trace_lo))
                } else {
                    (traces(nb, &self.trace_hi), own)
                };
                let [e2h, e3h, b2h, b3h] = face_hats(flux, left, right);
                for (c, sgn, val) in [
                    (E2, -1.0, b3h),
                    (E3, 1.0, b2h),
                    (B2, 1.0, e3h),
                    (B3, -1.0, e2h),
                ] {
                    if let Some(slot) = em.active.slot(c) {
                        let rr = &mut r[slot * n_m1..(slot + 1) * n_m1];
                        let ws = two_over_w * side_sign * sgn * val;
                        for m in 0..n_m1 {
                            rr[m] += ws * own_tr[m];
                        }
                    }
                }
            }
        };
        if n_x < 1024 {
            out.chunks_mut(stride.max(1)).enumerate().for_each(cell_kernel);
        } else {
            out.par_chunks_mut(stride.max(1)).enumerate().for_each(cell_kernel);
        }
        Ok(out)
    }
}
