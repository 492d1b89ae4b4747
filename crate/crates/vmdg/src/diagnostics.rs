//! Norms, conserved quantities, divergence monitors, and empirical
//! convergence orders.
//!
//! Every reduction here goes through compensated (Neumaier) summation in a
//! fixed order, so diagnostics are bit-identical across reruns and thread
//! counts.

use crate::basis::{error_points, CellRule};
use crate::field::{Component, DistributionField, EMField};
use crate::maxwell::MomentPair;
use crate::vlasov::VelocityMapping;

/// Compensated sequential summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// One observer row; the CSV interface carries the first nine fields.
#[derive(Clone, Copy, Debug)]
pub struct DiagnosticRecord {
    pub time: f64,
    pub l2_f: f64,
    pub l2_e: f64,
    pub l2_b: f64,
    pub mass: f64,
    pub energy_kinetic: f64,
    pub energy_em: f64,
    pub div_e: f64,
    pub div_b: f64,
    /// Normal-jump norms of E and B, reported separately from the CSV row.
    pub jump_e: f64,
    pub jump_b: f64,
    /// Minimum cell mean of f, when the run carries a distribution.
    pub min_cell_mean: Option<f64>,
}

/// `||f_h - exact||_{L2}` with a quadrature two orders richer than assembly.
pub fn l2_error_phase(f: &DistributionField, exact: impl Fn(f64, [f64; 2]) -> f64) -> f64 {
    let rule = CellRule::new(&f.basis, error_points(f.basis.degree));
    let mesh = &f.mesh;
    let dim = f.basis.dim;
    let n_m = f.n_modes();
    let j = mesh.cell_measure() / (2.0f64).powi(dim as i32);
    let inv_sqrt_j = 1.0 / j.sqrt();
    let cell_err = |cell: usize| -> f64 {
        let c = f.cell_coeffs(cell);
        let mut acc = 0.0;
        for q in 0..rule.n_nodes {
            let vals = &rule.values[q * n_m..(q + 1) * n_m];
            let mut fh = 0.0;
            for m in 0..n_m {
                fh += c[m] * vals[m];
            }
            fh *= inv_sqrt_j;
            let (x, v) = mesh.cell_point(cell, &rule.points[q * dim..(q + 1) * dim]);
            let d = fh - exact(x, v);
            acc += rule.weights[q] * d * d;
        }
        acc * j
    };
    neumaier_sum((0..mesh.n_phase_cells()).map(cell_err)).max(0.0).sqrt()
}

/// `(||E_h - E||, ||B_h - B||)` in L2 over all six components.
pub fn l2_error_em(em: &EMField, exact: impl Fn(f64) -> ([f64; 3], [f64; 3])) -> (f64, f64) {
    let rule = CellRule::new(&em.basis, error_points(em.basis.degree));
    let n_m = em.n_modes();
    let j = 0.5 * em.x_axis.cell_width();
    let mut e_acc = Vec::with_capacity(em.x_axis.n_cells);
    let mut b_acc = Vec::with_capacity(em.x_axis.n_cells);
    for ix in 0..em.x_axis.n_cells {
        let mut ecell = 0.0;
        let mut bcell = 0.0;
        for q in 0..rule.n_nodes {
            let vals = &rule.values[q * n_m..(q + 1) * n_m];
            let (eh, bh) = em.eval_ref_with(ix, vals);
            let x = em.x_axis.from_ref(ix, rule.points[q]);
            let (ee, be) = exact(x);
            for c in 0..3 {
                let de = eh[c] - ee[c];
                let db = bh[c] - be[c];
                ecell += rule.weights[q] * de * de;
                bcell += rule.weights[q] * db * db;
            }
        }
        e_acc.push(ecell * j);
        b_acc.push(bcell * j);
    }
    (
        neumaier_sum(e_acc).max(0.0).sqrt(),
        neumaier_sum(b_acc).max(0.0).sqrt(),
    )
}

/// Kinetic and electromagnetic energies:
/// `∫∫ f |v|^2` (classical) or `∫∫ f (sqrt(1+|v|^2) - 1)` (relativistic),
/// and `∫ |E|^2 + |B|^2`.
pub fn total_energy(
    f: &DistributionField,
    em: &EMField,
    mapping: VelocityMapping,
) -> (f64, f64) {
    let rule = CellRule::new(&f.basis, crate::basis::assembly_points(f.basis.degree));
    let mesh = &f.mesh;
    let dim = f.basis.dim;
    let d_v = mesh.d_v();
    let n_m = f.n_modes();
    let j = mesh.cell_measure() / (2.0f64).powi(dim as i32);
    let sqrt_j = j.sqrt();
    let kin = neumaier_sum((0..mesh.n_phase_cells()).map(|cell| {
        let c = f.cell_coeffs(cell);
        let (_, iv) = mesh.cell_coords(cell);
        let mut acc = 0.0;
        for q in 0..rule.n_nodes {
            let vals = &rule.values[q * n_m..(q + 1) * n_m];
            let mut fq = 0.0;
            for m in 0..n_m {
                fq += c[m] * vals[m];
            }
            let xi = &rule.points[q * dim..(q + 1) * dim];
            let mut v2 = 0.0;
            for a in 0..d_v {
                let va = mesh.v_axes()[a].from_ref(iv[a], xi[1 + a]);
                v2 += va * va;
            }
            let weight_fn = match mapping {
                VelocityMapping::Classical => v2,
                VelocityMapping::Relativistic => (1.0 + v2).sqrt() - 1.0,
            };
            acc += rule.weights[q] * fq * weight_fn;
        }
        acc * sqrt_j
    }));
    let em_energy = neumaier_sum(em.coeffs.iter().map(|c| c * c));
    (kin, em_energy)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DivergenceReport {
    /// `|| div E_h - (rho_h - rho_i) ||`
    pub div_e: f64,
    /// `|| div B_h ||`
    pub div_b: f64,
    /// L2 norms of the normal (x-component) jumps across faces.
    pub jump_e: f64,
    pub jump_b: f64,
}

/// Elementwise strong divergence residuals of the constraints; monitored,
/// never enforced.
pub fn divergence_residuals(
    em: &EMField,
    moments: Option<&MomentPair>,
    rho_i: f64,
) -> DivergenceReport {
    let n_m = em.n_modes();
    let rule = CellRule::new(&em.basis, error_points(em.basis.degree));
    let w = em.x_axis.cell_width();
    let j = 0.5 * w;
    let inv_sqrt_j = 1.0 / j.sqrt();
    let n_x = em.x_axis.n_cells;
    let mut de_cells = Vec::with_capacity(n_x);
    let mut db_cells = Vec::with_capacity(n_x);
    for ix in 0..n_x {
        let e1 = em.component_coeffs(ix, Component::E1);
        let b1 = em.component_coeffs(ix, Component::B1);
        let mut de = 0.0;
        let mut db = 0.0;
        for q in 0..rule.n_nodes {
            let grads = &rule.grads[0][q * n_m..(q + 1) * n_m];
            let vals = &rule.values[q * n_m..(q + 1) * n_m];
            let deriv = |cc: Option<&[f64]>| -> f64 {
                cc.map(|cc| {
                    cc.iter().zip(grads).map(|(a, b)| a * b).sum::<f64>()
                        * (2.0 / w)
                        * inv_sqrt_j
                })
                .unwrap_or(0.0)
            };
            let div_e_q = deriv(e1);
            let div_b_q = deriv(b1);
            let rho_q = moments
                .map(|m| {
                    m.rho[ix * n_m..(ix + 1) * n_m]
                        .iter()
                        .zip(vals)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        * inv_sqrt_j
                })
                .unwrap_or(0.0);
            let re = div_e_q - (rho_q - rho_i);
            de += rule.weights[q] * re * re;
            db += rule.weights[q] * div_b_q * div_b_q;
        }
        de_cells.push(de * j);
        db_cells.push(db * j);
    }
    // normal jumps across the periodic faces
    let trace_lo: Vec<f64> = (0..n_m).map(|m| em.basis.eval_mode(m, &[-1.0])).collect();
    let trace_hi: Vec<f64> = (0..n_m).map(|m| em.basis.eval_mode(m, &[1.0])).collect();
    let trace = |ix: usize, c: Component, t: &[f64]| -> f64 {
        em.component_coeffs(ix, c)
            .map(|cc| cc.iter().zip(t).map(|(a, b)| a * b).sum::<f64>() * inv_sqrt_j)
            .unwrap_or(0.0)
    };
    let mut je = 0.0;
    let mut jb = 0.0;
    for ix in 0..n_x {
        let nxt = (ix + 1) % n_x;
        let d_e = trace(ix, Component::E1, &trace_hi) - trace(nxt, Component::E1, &trace_lo);
        let d_b = trace(ix, Component::B1, &trace_hi) - trace(nxt, Component::B1, &trace_lo);
        je += d_e * d_e;
        jb += d_b * d_b;
    }
    DivergenceReport {
        div_e: neumaier_sum(de_cells).max(0.0).sqrt(),
        div_b: neumaier_sum(db_cells).max(0.0).sqrt(),
        jump_e: je.sqrt(),
        jump_b: jb.sqrt(),
    }
}

/// Experimental orders `log2(err_{l-1} / err_l)` for a dyadic ladder; NaN
/// where undefined (first row, nonpositive errors).
pub fn eoc(errors: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::NAN; errors.len()];
    for l in 1..errors.len() {
        if errors[l - 1] > 0.0 && errors[l] > 0.0 {
            out[l] = (errors[l - 1] / errors[l]).log2();
        }
    }
    out
}
