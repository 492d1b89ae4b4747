//! Independent assemblies of the discrete stability identities.
//!
//! The operators dissipate exactly what the face jumps carry:
//!   `<a_h f, f> = -1/2 (sum_x-faces |vt.n| [f]^2 + sum_v-faces |a.n| [f]^2)`
//! and, for the Maxwell part,
//!   `b_h(E,B,f; E,B) + int J.E + 1/2 sum |[E]_tan|^2 + |[B]_tan|^2 = 0`  (upwind)
//!   `b_h(E,B,f; E,B) + int J.E = 0`  (central, alternating)
//!
//! The right-hand sides here are assembled by walking global edges and
//! evaluating basis traces directly, sharing no code with the operators'
//! per-cell table machinery. The face quadrature must use the same node
//! count, since the |.| factors are defined pointwise at the nodes.

use rand::Rng;
use std::sync::Arc;

use crate::basis::{assembly_points, gauss_legendre, ReferenceBasis};
use crate::diagnostics::neumaier_sum;
use crate::error::Result;
use crate::field::{Component, ComponentSet, DistributionField, EMField};
use crate::maxwell::{MaxwellFluxKind, MaxwellOperator, MomentPair};
use crate::mesh::{PhaseMesh, Side};
use crate::vlasov::{acceleration, VelocityMapping, VlasovOperator};

/// Jump dissipation functional of the Vlasov part, assembled edge by edge.
pub fn jump_dissipation(
    f: &DistributionField,
    em: &EMField,
    mapping: VelocityMapping,
) -> f64 {
    let mesh = &f.mesh;
    let basis = &f.basis;
    let dim = basis.dim;
    let d_v = mesh.d_v();
    let n1 = assembly_points(basis.degree);
    let (nodes, weights) = gauss_legendre(n1);
    let widths = mesh.cell_widths();
    let trace = |cell: usize, axis: usize, pinned: f64, free: &[f64]| -> f64 {
        let mut xi = [0.0f64; 3];
        let mut fi = 0;
        for a in 0..dim {
            if a == axis {
                xi[a] = pinned;
            } else {
                xi[a] = free[fi];
                fi += 1;
            }
        }
        let c = f.cell_coeffs(cell);
        (0..basis.n_modes())
            .map(|m| c[m] * basis.eval_mode(m, &xi[..dim]))
            .sum()
    };
    let mut terms: Vec<f64> = Vec::new();
    // tensor iteration over the free axes of a face
    let free_nodes = |n_free: usize| -> Vec<(Vec<f64>, f64)> {
        let mut out = vec![(vec![], 1.0)];
        for _ in 0..n_free {
            let mut next = Vec::with_capacity(out.len() * n1);
            for (pt, w) in &out {
                for i in 0..n1 {
                    let mut p = pt.clone();
                    p.push(nodes[i]);
                    next.push((p, w * weights[i]));
                }
            }
            out = next;
        }
        out
    };
    let face_pts = free_nodes(dim - 1);
    for cell in 0..mesh.n_phase_cells() {
        let (ix, iv) = mesh.cell_coords(cell);
        for axis in 0..dim {
            // every interior edge once (owner = low side), boundary edges as-is
            for side in [Side::Low, Side::High] {
                let neighbor = mesh.neighbor(cell, axis, side);
                if side == Side::Low && axis == 0 {
                    continue; // periodic x-edges handled from the high side
                }
                if side == Side::Low && neighbor.is_some() {
                    continue; // interior low faces counted by their neighbor
                }
                let edge_index = if axis == 0 { ix } else { iv[axis - 1] };
                let coord = match side {
                    Side::Low => mesh.axis(axis).cell_lo(edge_index),
                    Side::High => mesh.axis(axis).cell_lo(edge_index + 1),
                };
                for (free, w) in &face_pts {
                    let f_own = trace(cell, axis, side.normal_sign(), free);
                    let f_nb = neighbor
                        .map(|nb| trace(nb, axis, -side.normal_sign(), free))
                        .unwrap_or(0.0);
                    let jump = f_own - f_nb;
                    // physical point
                    let mut v = [0.0f64; 2];
                    let mut x = 0.0;
                    let mut fi = 0;
                    for a in 0..dim {
                        let val = if a == axis {
                            coord
                        } else {
                            let xi = free[fi];
                            fi += 1;
                            if a == 0 {
                                mesh.x_axis().from_ref(ix, xi)
                            } else {
                                mesh.v_axes()[a - 1].from_ref(iv[a - 1], xi)
                            }
                        };
                        if a == 0 {
                            x = val;
                        } else {
                            v[a - 1] = val;
                        }
                    }
                    let vt = mapping.transport(v, d_v);
                    let speed = if axis == 0 {
                        vt[0].abs()
                    } else {
                        let (e, b) = em.eval(x);
                        acceleration(e, b, vt)[axis - 1].abs()
                    };
                    terms.push((2.0 / widths[axis]) * w * speed * jump * jump);
                }
            }
        }
    }
    neumaier_sum(terms)
}

/// `<a_h(f, E, B), f>` against the independently assembled dissipation;
/// returns `(lhs, rhs, relative residual)`.
pub fn dissipation_identity(
    op: &VlasovOperator,
    f: &DistributionField,
    em: &EMField,
    mapping: VelocityMapping,
) -> Result<(f64, f64, f64)> {
    let r = op.apply(f, em, mapping)?;
    let lhs = neumaier_sum(r.iter().zip(&f.coeffs).map(|(a, b)| a * b));
    let rhs = -0.5 * jump_dissipation(f, em, mapping);
    let rel = (lhs - rhs).abs() / (1.0 + lhs.abs());
    Ok((lhs, rhs, rel))
}

/// Tangential-jump energy of the EM field across the periodic x-faces.
pub fn tangential_jump_integral(em: &EMField) -> f64 {
    let basis = &em.basis;
    let n_m = em.n_modes();
    let n_x = em.x_axis.n_cells;
    let j = 0.5 * em.x_axis.cell_width();
    let t_lo: Vec<f64> = (0..n_m).map(|m| basis.eval_mode(m, &[-1.0])).collect();
    let t_hi: Vec<f64> = (0..n_m).map(|m| basis.eval_mode(m, &[1.0])).collect();
    let trace = |ix: usize, c: Component, t: &[f64]| -> f64 {
        em.component_coeffs(ix, c)
            .map(|cc| cc.iter().zip(t).map(|(a, b)| a * b).sum())
            .unwrap_or(0.0)
    };
    use Component::*;
    neumaier_sum((0..n_x).map(|ix| {
        let nxt = (ix + 1) % n_x;
        let mut s = 0.0;
        for c in [E2, E3, B2, B3] {
            let d = trace(ix, c, &t_hi) - trace(nxt, c, &t_lo);
            s += d * d;
        }
        s / j
    }))
}

/// `∫ J_h · E_h dx`, exact as a coefficient inner product.
pub fn current_work(moments: &MomentPair, em: &EMField) -> f64 {
    let n_m = em.n_modes();
    use Component::*;
    neumaier_sum([E1, E2, E3].into_iter().flat_map(|c| {
        (0..em.x_axis.n_cells).map(move |ix| (c, ix))
    })
    .map(|(c, ix)| match em.component_coeffs(ix, c) {
        Some(cc) => cc
            .iter()
            .zip(&moments.j[c.index()][ix * n_m..(ix + 1) * n_m])
            .map(|(a, b)| a * b)
            .sum(),
        None => 0.0,
    }))
}

/// Maxwell energy identity residual; returns `(b_h value, relative residual)`.
pub fn maxwell_energy_identity(
    op: &MaxwellOperator,
    em: &EMField,
    moments: &MomentPair,
    flux: MaxwellFluxKind,
) -> Result<(f64, f64)> {
    let r = op.apply(em, Some(moments), flux)?;
    let bh = neumaier_sum(r.iter().zip(&em.coeffs).map(|(a, b)| a * b));
    let work = current_work(moments, em);
    let jumps = match flux {
        MaxwellFluxKind::Upwind => 0.5 * tangential_jump_integral(em),
        _ => 0.0,
    };
    let residual = bh + work + jumps;
    Ok((bh, residual.abs() / (1.0 + bh.abs())))
}

/// Uniformly random coefficients scaled to unit L2 norm.
pub fn random_distribution(
    mesh: Arc<PhaseMesh>,
    basis: Arc<ReferenceBasis>,
    rng: &mut impl Rng,
) -> DistributionField {
    let mut f = DistributionField::zeros(mesh, basis);
    for c in f.coeffs.iter_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    let n = f.l2_norm();
    if n > 0.0 {
        f.coeffs.iter_mut().for_each(|c| *c /= n);
    }
    f
}

pub fn random_em(
    mesh: &PhaseMesh,
    basis: Arc<ReferenceBasis>,
    active: ComponentSet,
    rng: &mut impl Rng,
) -> EMField {
    let mut em = EMField::zeros(*mesh.x_axis(), basis, active);
    for c in em.coeffs.iter_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    em
}

#[derive(Clone, Debug)]
pub struct IdentitySuiteReport {
    pub label: String,
    pub trials: usize,
    pub failures: usize,
    pub worst_rel: f64,
    pub tolerance: f64,
}

impl IdentitySuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Randomized check of the upwind dissipation identity for one
/// `(k, d_v)` configuration.
pub fn dissipation_suite(
    k: usize,
    d_v: usize,
    trials: usize,
    tolerance: f64,
    rng: &mut impl Rng,
) -> IdentitySuiteReport {
    let v_bounds = vec![(-2.0, 2.0); d_v];
    let mesh = Arc::new(PhaseMesh::build(0.0, 1.0, 3, &v_bounds, 3).unwrap());
    let basis = Arc::new(ReferenceBasis::new(k, mesh.dim()).unwrap());
    let em_basis = Arc::new(ReferenceBasis::new(k, 1).unwrap());
    let op = VlasovOperator::new(mesh.clone(), basis.clone(), em_basis.clone());
    let active = if d_v == 1 {
        ComponentSet::of(&[Component::E1])
    } else {
        ComponentSet::of(&[Component::E1, Component::E2, Component::B3])
    };
    let mut report = IdentitySuiteReport {
        label: format!("a_h dissipation k={k} d_v={d_v}"),
        trials,
        failures: 0,
        worst_rel: 0.0,
        tolerance,
    };
    for _ in 0..trials {
        let f = random_distribution(mesh.clone(), basis.clone(), rng);
        let em = random_em(&mesh, em_basis.clone(), active, rng);
        let (_, _, rel) =
            dissipation_identity(&op, &f, &em, VelocityMapping::Classical).unwrap();
        report.worst_rel = report.worst_rel.max(rel);
        if rel > tolerance {
            report.failures += 1;
        }
    }
    report
}

/// Randomized check of the Maxwell energy identity for one flux kind.
pub fn maxwell_suite(
    k: usize,
    flux: MaxwellFluxKind,
    trials: usize,
    tolerance: f64,
    rng: &mut impl Rng,
) -> IdentitySuiteReport {
    let mesh = Arc::new(PhaseMesh::build(0.0, 1.0, 6, &[(-2.0, 2.0)], 4).unwrap());
    let basis = Arc::new(ReferenceBasis::new(k, 2).unwrap());
    let em_basis = Arc::new(ReferenceBasis::new(k, 1).unwrap());
    let op = MaxwellOperator::new(mesh.clone(), basis.clone(), em_basis.clone());
    let active = ComponentSet::of(&Component::ALL);
    let mut report = IdentitySuiteReport {
        label: format!("b_h energy k={k} flux={}", flux.name()),
        trials,
        failures: 0,
        worst_rel: 0.0,
        tolerance,
    };
    for _ in 0..trials {
        let f = random_distribution(mesh.clone(), basis.clone(), rng);
        let em = random_em(&mesh, em_basis.clone(), active, rng);
        let moments = op.compute_moments(&f, VelocityMapping::Classical);
        let (_, rel) = maxwell_energy_identity(&op, &em, &moments, flux).unwrap();
        report.worst_rel = report.worst_rel.max(rel);
        if rel > tolerance {
            report.failures += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dissipation_identity_holds_on_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d_v in [1, 2] {
            for k in [0, 1, 2] {
                let rep = dissipation_suite(k, d_v, 5, 1e-10, &mut rng);
                assert!(rep.passed(), "{}: worst {:.2e}", rep.label, rep.worst_rel);
            }
        }
    }

    #[test]
    fn dissipation_is_nonpositive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mesh = Arc::new(PhaseMesh::build(0.0, 1.0, 3, &[(-2.0, 2.0)], 4).unwrap());
        let basis = Arc::new(ReferenceBasis::new(2, 2).unwrap());
        let em_basis = Arc::new(ReferenceBasis::new(2, 1).unwrap());
        let op = VlasovOperator::new(mesh.clone(), basis.clone(), em_basis.clone());
        for _ in 0..10 {
            let f = random_distribution(mesh.clone(), basis.clone(), &mut rng);
            let em = random_em(&mesh, em_basis.clone(), ComponentSet::of(&[Component::E1]), &mut rng);
            let (lhs, _, _) =
                dissipation_identity(&op, &f, &em, VelocityMapping::Classical).unwrap();
            assert!(lhs <= 1e-14, "positive dissipation {lhs}");
        }
    }

    #[test]
    fn relativistic_identity_exact_in_1d1v() {
        // with d_v = 1 the acceleration is polynomial and the transport
        // velocity enters pointwise, so the identity stays exact
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mesh = Arc::new(PhaseMesh::build(0.0, 1.0, 3, &[(-2.0, 2.0)], 4).unwrap());
        let basis = Arc::new(ReferenceBasis::new(2, 2).unwrap());
        let em_basis = Arc::new(ReferenceBasis::new(2, 1).unwrap());
        let op = VlasovOperator::new(mesh.clone(), basis.clone(), em_basis.clone());
        let f = random_distribution(mesh.clone(), basis.clone(), &mut rng);
        let em = random_em(&mesh, em_basis, ComponentSet::of(&[Component::E1]), &mut rng);
        let (_, _, rel) =
            dissipation_identity(&op, &f, &em, VelocityMapping::Relativistic).unwrap();
        assert!(rel < 1e-12, "{rel}");
    }

    #[test]
    fn maxwell_identities_hold_for_all_fluxes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for flux in [
            MaxwellFluxKind::Upwind,
            MaxwellFluxKind::Central,
            MaxwellFluxKind::AlternatingEmBp,
            MaxwellFluxKind::AlternatingEpBm,
        ] {
            for k in [1, 2] {
                let rep = maxwell_suite(k, flux, 5, 1e-10, &mut rng);
                assert!(rep.passed(), "{}: worst {:.2e}", rep.label, rep.worst_rel);
            }
        }
    }
}
