//! Orthonormal modal basis on the reference cell `[-1, 1]^d` and tensor
//! Gauss-Legendre quadrature.
//!
//! The basis spans polynomials of *total* degree at most `k`: tensor products
//! of normalized Legendre polynomials restricted to `|alpha| <= k`. Distinct
//! tensor products are already mutually orthogonal on the reference cell, so
//! orthonormality is a per-factor scaling and the mass matrix is the identity.
//!
//! On a physical cell with widths `w_a` the basis is `phi_m(xi) / sqrt(J)`,
//! `J = prod(w_a / 2)`; coefficients in this scaled basis make the L2 norm of
//! a field the Euclidean norm of its coefficients.

use crate::error::{Error, Result};

/// Legendre `P_n(x)` and its derivative, by upward recurrence (valid at
/// the endpoints, unlike the `(1-x^2)`-scaled derivative identity).
pub fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut pm1, mut dpm1) = (1.0f64, 0.0f64);
    let (mut p, mut dp) = (x, 1.0f64);
    for j in 1..n {
        let jf = j as f64;
        let p_next = ((2.0 * jf + 1.0) * x * p - jf * pm1) / (jf + 1.0);
        let dp_next = dpm1 + (2.0 * jf + 1.0) * p;
        pm1 = p;
        dpm1 = dp;
        p = p_next;
        dp = dp_next;
    }
    (p, dp)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Exact for polynomials of degree `2n - 1`; weights sum to 2.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_with_deriv(n, x);
                x -= p2 / d2;
                dp = legendre_with_deriv(n, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_deriv(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// Modal basis of total degree `<= k` in `dim` variables.
#[derive(Debug)]
pub struct ReferenceBasis {
    pub degree: usize,
    pub dim: usize,
    /// Multi-indices in graded lexicographic order; mode 0 is the constant.
    pub modes: Vec<[usize; 3]>,
}

impl ReferenceBasis {
    pub fn new(degree: usize, dim: usize) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(Error::BadBasisDim(dim));
        }
        let mut modes = Vec::new();
        for total in 0..=degree {
            let mut alpha = [0usize; 3];
            enumerate_modes(&mut alpha, 0, dim, total, &mut modes);
        }
        Ok(Self { degree, dim, modes })
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Normalized 1D factor `sqrt((2n+1)/2) P_n(x)`.
    fn factor(n: usize, x: f64) -> (f64, f64) {
        let s = ((2 * n + 1) as f64 / 2.0).sqrt();
        let (p, dp) = legendre_with_deriv(n, x);
        (s * p, s * dp)
    }

    /// Value of mode `m` at a reference point.
    pub fn eval_mode(&self, m: usize, xi: &[f64]) -> f64 {
        let alpha = self.modes[m];
        let mut v = 1.0;
        for a in 0..self.dim {
            v *= Self::factor(alpha[a], xi[a]).0;
        }
        v
    }

    /// Reference-space partial derivative of mode `m` along `axis`.
    pub fn eval_mode_deriv(&self, m: usize, xi: &[f64], axis: usize) -> f64 {
        let alpha = self.modes[m];
        let mut v = 1.0;
        for a in 0..self.dim {
            let (p, dp) = Self::factor(alpha[a], xi[a]);
            v *= if a == axis { dp } else { p };
        }
        v
    }
}

fn enumerate_modes(
    alpha: &mut [usize; 3],
    axis: usize,
    dim: usize,
    remaining: usize,
    out: &mut Vec<[usize; 3]>,
) {
    if axis == dim - 1 {
        alpha[axis] = remaining;
        out.push(*alpha);
        alpha[axis] = 0;
        return;
    }
    for d in (0..=remaining).rev() {
        alpha[axis] = d;
        enumerate_modes(alpha, axis + 1, dim, remaining - d, out);
        alpha[axis] = 0;
    }
}

/// Tensor Gauss-Legendre rule on the reference cell with tabulated basis
/// values and reference-space gradients.
///
/// Node index runs axis-0-fastest: `q = q0 + n1*q1 + n1^2*q2`.
#[derive(Debug)]
pub struct CellRule {
    pub n1: usize,
    pub n_nodes: usize,
    /// Node coordinates, `points[q*dim + a]`.
    pub points: Vec<f64>,
    /// Product weights; sum to `2^dim`.
    pub weights: Vec<f64>,
    /// `values[q*n_modes + m]`.
    pub values: Vec<f64>,
    /// Per axis: `grads[a][q*n_modes + m]`.
    pub grads: Vec<Vec<f64>>,
    /// The 1D nodes the tensor rule is built from.
    pub nodes_1d: Vec<f64>,
    pub weights_1d: Vec<f64>,
}

impl CellRule {
    pub fn new(basis: &ReferenceBasis, n1: usize) -> Self {
        let dim = basis.dim;
        let (nodes_1d, weights_1d) = gauss_legendre(n1);
        let n_nodes = n1.pow(dim as u32);
        let n_m = basis.n_modes();
        let mut points = vec![0.0; n_nodes * dim];
        let mut weights = vec![0.0; n_nodes];
        for q in 0..n_nodes {
            let mut rest = q;
            let mut w = 1.0;
            for a in 0..dim {
                let i = rest % n1;
                rest /= n1;
                points[q * dim + a] = nodes_1d[i];
                w *= weights_1d[i];
            }
            weights[q] = w;
        }
        let mut values = vec![0.0; n_nodes * n_m];
        let mut grads = vec![vec![0.0; n_nodes * n_m]; dim];
        for q in 0..n_nodes {
            let xi = &points[q * dim..(q + 1) * dim];
            for m in 0..n_m {
                values[q * n_m + m] = basis.eval_mode(m, xi);
                for (a, g) in grads.iter_mut().enumerate() {
                    g[q * n_m + m] = basis.eval_mode_deriv(m, xi, a);
                }
            }
        }
        Self { n1, n_nodes, points, weights, values, grads, nodes_1d, weights_1d }
    }
}

/// Quadrature and basis traces on one face of the reference cell.
///
/// Face nodes are the tensor rule over the free axes (ascending axis order,
/// first free axis fastest), so the high face of one cell and the low face of
/// its neighbor enumerate matching physical points at equal indices.
#[derive(Debug)]
pub struct FaceRule {
    pub axis: usize,
    /// +1.0 for the high face, -1.0 for the low face.
    pub pinned: f64,
    pub n_nodes: usize,
    /// Full-dimension reference coordinates, `points[q*dim + a]`.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Basis traces, `values[q*n_modes + m]`.
    pub values: Vec<f64>,
}

impl FaceRule {
    pub fn new(basis: &ReferenceBasis, n1: usize, axis: usize, high: bool) -> Self {
        let dim = basis.dim;
        let (nodes_1d, weights_1d) = gauss_legendre(n1);
        let free: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
        let n_nodes = n1.pow(free.len() as u32);
        let pinned = if high { 1.0 } else { -1.0 };
        let n_m = basis.n_modes();
        let mut points = vec![0.0; n_nodes * dim];
        let mut weights = vec![1.0; n_nodes];
        for q in 0..n_nodes {
            points[q * dim + axis] = pinned;
            let mut rest = q;
            for &a in &free {
                let i = rest % n1;
                rest /= n1;
                points[q * dim + a] = nodes_1d[i];
                weights[q] *= weights_1d[i];
            }
        }
        let mut values = vec![0.0; n_nodes * n_m];
        for q in 0..n_nodes {
            let xi = &points[q * dim..(q + 1) * dim];
            for m in 0..n_m {
                values[q * n_m + m] = basis.eval_mode(m, xi);
            }
        }
        Self { axis, pinned, n_nodes, points, weights, values }
    }
}

/// Points per axis of the assembly rule for degree `k`: exact through total
/// degree `2k + 3`, covering the velocity-weighted terms.
pub fn assembly_points(k: usize) -> usize {
    k + 2
}

/// Points per axis of the error-measurement rule; two orders richer than
/// assembly so measured convergence orders are never quadrature-capped.
pub fn error_points(k: usize) -> usize {
    k + 4
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..=8 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            // exact through degree 2n-1
            for d in 0..2 * n {
                let num: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 0 { 2.0 / (d as f64 + 1.0) } else { 0.0 };
                assert!(
                    (num - exact).abs() < 1e-13,
                    "n={n} d={d}: {num} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn mode_counts() {
        assert_eq!(ReferenceBasis::new(0, 2).unwrap().n_modes(), 1);
        assert_eq!(ReferenceBasis::new(2, 2).unwrap().n_modes(), 6);
        assert_eq!(ReferenceBasis::new(3, 3).unwrap().n_modes(), 20);
        assert_eq!(ReferenceBasis::new(4, 1).unwrap().n_modes(), 5);
    }

    #[test]
    fn mode_zero_is_constant() {
        let b = ReferenceBasis::new(3, 2).unwrap();
        assert_eq!(b.modes[0], [0, 0, 0]);
        let v = b.eval_mode(0, &[0.3, -0.7]);
        assert!((v - 0.5f64).abs() < 1e-15); // (1/sqrt 2)^2
    }

    #[test]
    fn gram_matrix_is_identity() {
        for (k, d) in [(2, 1), (2, 2), (3, 3)] {
            let b = ReferenceBasis::new(k, d).unwrap();
            let rule = CellRule::new(&b, assembly_points(k));
            let n_m = b.n_modes();
            for i in 0..n_m {
                for j in 0..n_m {
                    let g: f64 = (0..rule.n_nodes)
                        .map(|q| {
                            rule.weights[q]
                                * rule.values[q * n_m + i]
                                * rule.values[q * n_m + j]
                        })
                        .sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (g - want).abs() < 1e-12,
                        "k={k} d={d} gram[{i}][{j}] = {g}"
                    );
                }
            }
        }
    }

    #[test]
    fn products_with_affine_weights_integrate_exactly() {
        // integrands phi_a phi_b (c0 + c1 v) have total degree 2k + 1, below
        // the rule's 2k + 3 exactness; compare against a much richer rule
        let k = 2;
        let b = ReferenceBasis::new(k, 2).unwrap();
        let rule = CellRule::new(&b, assembly_points(k));
        let rich = CellRule::new(&b, k + 6);
        let n_m = b.n_modes();
        let weight = |xi: &[f64]| 0.7 - 1.3 * xi[1];
        for a in 0..n_m {
            for c in 0..n_m {
                let int = |r: &CellRule| -> f64 {
                    (0..r.n_nodes)
                        .map(|q| {
                            r.weights[q]
                                * r.values[q * n_m + a]
                                * r.values[q * n_m + c]
                                * weight(&r.points[q * 2..q * 2 + 2])
                        })
                        .sum()
                };
                assert!((int(&rule) - int(&rich)).abs() < 1e-13, "a={a} c={c}");
            }
        }
    }

    #[test]
    fn derivative_tables_match_finite_differences() {
        let b = ReferenceBasis::new(3, 2).unwrap();
        let xi = [0.37, -0.21];
        let eps = 1e-6;
        for m in 0..b.n_modes() {
            for axis in 0..2 {
                let mut hi = xi;
                let mut lo = xi;
                hi[axis] += eps;
                lo[axis] -= eps;
                let fd = (b.eval_mode(m, &hi) - b.eval_mode(m, &lo)) / (2.0 * eps);
                let an = b.eval_mode_deriv(m, &xi, axis);
                assert!((fd - an).abs() < 1e-8, "mode {m} axis {axis}");
            }
        }
    }

    #[test]
    fn face_rule_pins_coordinate_and_weights_sum() {
        let b = ReferenceBasis::new(2, 3).unwrap();
        let f = FaceRule::new(&b, 4, 1, true);
        assert_eq!(f.n_nodes, 16);
        let wsum: f64 = f.weights.iter().sum();
        assert!((wsum - 4.0).abs() < 1e-13);
        for q in 0..f.n_nodes {
            assert_eq!(f.points[q * 3 + 1], 1.0);
        }
    }
}
