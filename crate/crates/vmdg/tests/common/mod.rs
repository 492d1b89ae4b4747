//! Brute-force reference assemblers for the DG operators: direct quadrature
//! loops over every cell, mode, and edge, built on pointwise polynomial
//! evaluation only. They share no assembly machinery with the production
//! operators and exist to pin them down coefficient by coefficient.

use std::sync::Arc;

use vmdg::basis::{assembly_points, gauss_legendre, ReferenceBasis};
use vmdg::field::{DistributionField, EMField};
use vmdg::maxwell::{MaxwellFluxKind, MomentPair};
use vmdg::mesh::{PhaseMesh, Side};
use vmdg::vlasov::{acceleration, upwind_flux_x, VelocityMapping};

/// Tensor points over `n_free` axes of the 1D rule (order irrelevant).
fn tensor(nodes: &[f64], weights: &[f64], n_free: usize) -> Vec<(Vec<f64>, f64)> {
    let mut out = vec![(vec![], 1.0)];
    for _ in 0..n_free {
        let mut next = Vec::with_capacity(out.len() * nodes.len());
        for (p, w) in &out {
            for (i, &x) in nodes.iter().enumerate() {
                let mut p2 = p.clone();
                p2.push(x);
                next.push((p2, w * weights[i]));
            }
        }
        out = next;
    }
    out
}

/// Reference-scaled trace of `f` on a face of `cell`.
fn trace(
    f: &DistributionField,
    basis: &ReferenceBasis,
    cell: usize,
    axis: usize,
    pinned: f64,
    free: &[f64],
) -> f64 {
    let dim = basis.dim;
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
}

/// Direct evaluation of `a_h(f, E, B; g)` for every cell basis function.
pub fn naive_apply_ah(
    f: &DistributionField,
    em: &EMField,
    mapping: VelocityMapping,
) -> Vec<f64> {
    let mesh: &Arc<PhaseMesh> = &f.mesh;
    let basis = &f.basis;
    let dim = basis.dim;
    let d_v = mesh.d_v();
    let n_m = basis.n_modes();
    let n1 = assembly_points(basis.degree);
    let (nodes, weights) = gauss_legendre(n1);
    let widths = mesh.cell_widths();
    let j: f64 = widths.iter().map(|w| 0.5 * w).product();
    let sqrt_j = j.sqrt();
    let vol_pts = tensor(&nodes, &weights, dim);
    let face_pts = tensor(&nodes, &weights, dim - 1);
    let mut out = vec![0.0; f.coeffs.len()];

    for cell in 0..mesh.n_phase_cells() {
        let (ix, iv) = mesh.cell_coords(cell);
        let r = &mut out[cell * n_m..(cell + 1) * n_m];
        // volume: J * sum w f_phys (vt . grad_x psi + a . grad_v psi)
        for (xi, w) in &vol_pts {
            let (x, v) = mesh.cell_point(cell, xi);
            let f_phys = f.eval_in_cell(cell, x, v);
            let (e, b) = em.eval(x);
            let vt = mapping.transport(v, d_v);
            let acc = acceleration(e, b, vt);
            for m in 0..n_m {
                let mut conv = vt[0] * basis.eval_mode_deriv(m, xi, 0) * (2.0 / widths[0]);
                for a in 0..d_v {
                    conv += acc[a] * basis.eval_mode_deriv(m, xi, 1 + a) * (2.0 / widths[1 + a]);
                }
                r[m] += j * w * f_phys * conv / sqrt_j;
            }
        }
        // faces: - J_f * sum w flux psi^-
        for axis in 0..dim {
            let j_f = j / (0.5 * widths[axis]);
            for side in [Side::Low, Side::High] {
                let sign = side.normal_sign();
                let neighbor = mesh.neighbor(cell, axis, side);
                let edge_cell = if axis == 0 { ix } else { iv[axis - 1] };
                let coord = match side {
                    Side::Low => mesh.axis(axis).cell_lo(edge_cell),
                    Side::High => mesh.axis(axis).cell_lo(edge_cell + 1),
                };
                for (free, w) in &face_pts {
                    let f_minus = trace(f, basis, cell, axis, sign, free) / sqrt_j;
                    let f_plus = neighbor
                        .map(|nb| trace(f, basis, nb, axis, -sign, free) / sqrt_j)
                        .unwrap_or(0.0);
                    // physical coordinates from the owner's frame
                    let mut x = 0.0;
                    let mut v = [0.0f64; 2];
                    let mut fi = 0;
                    for a in 0..dim {
                        let val = if a == axis {
                            coord
                        } else {
                            let t = free[fi];
                            fi += 1;
                            if a == 0 {
                                mesh.x_axis().from_ref(ix, t)
                            } else {
                                mesh.v_axes()[a - 1].from_ref(iv[a - 1], t)
                            }
                        };
                        if a == 0 {
                            x = val;
                        } else {
                            v[a - 1] = val;
                        }
                    }
                    let vt = mapping.transport(v, d_v);
                    let beta_n = if axis == 0 {
                        sign * vt[0]
                    } else {
                        let (e, b) = em.eval(x);
                        sign * acceleration(e, b, vt)[axis - 1]
                    };
                    let flux = upwind_flux_x(beta_n, f_minus, f_plus);
                    for m in 0..n_m {
                        let mut xi = [0.0f64; 3];
                        let mut fi = 0;
                        for a in 0..dim {
                            if a == axis {
                                xi[a] = sign;
                            } else {
                                xi[a] = free[fi];
                                fi += 1;
                            }
                        }
                        let psi = basis.eval_mode(m, &xi[..dim]) / sqrt_j;
                        r[m] -= j_f * w * flux * psi;
                    }
                }
            }
        }
    }
    out
}

/// Physical `(E, B)` trace of one side of a face.
fn em_trace(em: &EMField, ix: usize, xi: f64) -> ([f64; 3], [f64; 3]) {
    let n_m = em.basis.n_modes();
    let vals: Vec<f64> = (0..n_m).map(|m| em.basis.eval_mode(m, &[xi])).collect();
    em.eval_ref_with(ix, &vals)
}

/// Direct evaluation of `b_h(E, B, f; U, V)` for every active component's
/// basis function, from the definition: curl volume terms, hat fluxes on the
/// two endpoints, and the current term.
pub fn naive_apply_bh(
    em: &EMField,
    moments: Option<&MomentPair>,
    flux: MaxwellFluxKind,
) -> Vec<f64> {
    let n_m = em.basis.n_modes();
    let n_x = em.x_axis.n_cells;
    let w_x = em.x_axis.cell_width();
    let j = 0.5 * w_x;
    let sqrt_j = j.sqrt();
    let (nodes, weights) = gauss_legendre(assembly_points(em.basis.degree));
    let n_active = em.active.len();
    let mut out = vec![0.0; em.coeffs.len()];

    // curl(phi e_c): c = 2 -> (0, 0, phi'), c = 3 -> (0, -phi', 0), c = 1 -> 0
    let curl_component = |c: usize, dphi: f64| -> [f64; 3] {
        match c {
            1 => [0.0, 0.0, dphi],
            2 => [0.0, -dphi, 0.0],
            _ => [0.0; 3],
        }
    };

    for ix in 0..n_x {
        for comp in em.active.iter() {
            let slot = em.active.slot(comp).unwrap();
            let r = &mut out[(ix * n_active + slot) * n_m..][..n_m];
            for m in 0..n_m {
                let mut acc = 0.0;
                // volume
                for (i, &t) in nodes.iter().enumerate() {
                    let x = em.x_axis.from_ref(ix, t);
                    let (e, b) = em.eval(x);
                    let dphi = em.basis.eval_mode_deriv(m, &[t], 0) * (2.0 / w_x) / sqrt_j;
                    let curl = curl_component(comp.index() % 3, dphi);
                    let dot = if comp.is_electric() {
                        // test function U = phi e_c: + B . curl U
                        b[0] * curl[0] + b[1] * curl[1] + b[2] * curl[2]
                    } else {
                        // test function V = phi e_c: - E . curl V
                        -(e[0] * curl[0] + e[1] * curl[1] + e[2] * curl[2])
                    };
                    acc += j * weights[i] * dot;
                    // current: - J . U
                    if comp.is_electric() {
                        if let Some(mom) = moments {
                            let jm = &mom.j[comp.index()][ix * n_m..(ix + 1) * n_m];
                            let j_phys: f64 = (0..n_m)
                                .map(|mm| jm[mm] * em.basis.eval_mode(mm, &[t]))
                                .sum::<f64>()
                                / sqrt_j;
                            let phi = em.basis.eval_mode(m, &[t]) / sqrt_j;
                            acc -= j * weights[i] * j_phys * phi;
                        }
                    }
                }
                // faces: (n x Bhat) . U - (n x Ehat) . V at the endpoints
                for (sign, xi_owner) in [(-1.0, -1.0), (1.0, 1.0)] {
                    let nb = if sign > 0.0 { (ix + 1) % n_x } else { (ix + n_x - 1) % n_x };
                    let (left, right) = if sign > 0.0 {
                        (em_trace(em, ix, 1.0), em_trace(em, nb, -1.0))
                    } else {
                        (em_trace(em, nb, 1.0), em_trace(em, ix, -1.0))
                    };
                    let avg = |a: f64, b: f64| 0.5 * (a + b);
                    let (ehat, bhat): ([f64; 3], [f64; 3]) = match flux {
                        MaxwellFluxKind::Upwind => (
                            [
                                0.0,
                                avg(left.0[1], right.0[1]) + 0.5 * (left.1[2] - right.1[2]),
                                avg(left.0[2], right.0[2]) - 0.5 * (left.1[1] - right.1[1]),
                            ],
                            [
                                0.0,
                                avg(left.1[1], right.1[1]) - 0.5 * (left.0[2] - right.0[2]),
                                avg(left.1[2], right.1[2]) + 0.5 * (left.0[1] - right.0[1]),
                            ],
                        ),
                        MaxwellFluxKind::Central => (
                            [0.0, avg(left.0[1], right.0[1]), avg(left.0[2], right.0[2])],
                            [0.0, avg(left.1[1], right.1[1]), avg(left.1[2], right.1[2])],
                        ),
                        MaxwellFluxKind::AlternatingEmBp => (left.0, right.1),
                        MaxwellFluxKind::AlternatingEpBm => (right.0, left.1),
                    };
                    // n = sign * e1; n x F = sign * (0, -F3, F2)
                    let phi = em.basis.eval_mode(m, &[xi_owner]) / sqrt_j;
                    let c = comp.index() % 3;
                    let term = if comp.is_electric() {
                        // (n x Bhat) . (phi e_c)
                        match c {
                            1 => sign * (-bhat[2]) * phi,
                            2 => sign * bhat[1] * phi,
                            _ => 0.0,
                        }
                    } else {
                        // -(n x Ehat) . (phi e_c)
                        match c {
                            1 => -sign * (-ehat[2]) * phi,
                            2 => -sign * ehat[1] * phi,
                            _ => 0.0,
                        }
                    };
                    acc += term;
                }
                r[m] = acc;
            }
        }
    }
    out
}
