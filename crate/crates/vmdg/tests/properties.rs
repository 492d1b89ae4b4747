//! Property tests over randomized inputs.

use proptest::prelude::*;
use std::sync::Arc;

use vmdg::basis::ReferenceBasis;
use vmdg::field::DistributionField;
use vmdg::mesh::{PhaseMesh, Side};
use vmdg::vlasov::upwind_flux_x;

proptest! {
    /// Upwind selection: outflow carries the owner trace, inflow the
    /// neighbor trace, and the flux is antisymmetric under side exchange.
    #[test]
    fn upwind_flux_selects_the_upwind_trace(
        beta in -10.0f64..10.0,
        fm in -5.0f64..5.0,
        fp in -5.0f64..5.0,
    ) {
        let flux = upwind_flux_x(beta, fm, fp);
        if beta > 0.0 {
            prop_assert!((flux - beta * fm).abs() <= 1e-12 * (1.0 + flux.abs()));
        } else if beta < 0.0 {
            prop_assert!((flux - beta * fp).abs() <= 1e-12 * (1.0 + flux.abs()));
        }
        let mirrored = upwind_flux_x(-beta, fp, fm);
        prop_assert!((flux + mirrored).abs() <= 1e-12 * (1.0 + flux.abs()));
    }

    /// Edge pairing is an involution with opposite normals, for any shape.
    #[test]
    fn edge_pairing_involution(
        n_x in 1usize..6,
        n_v in 1usize..5,
        d_v in 1usize..3,
    ) {
        let v = vec![(-1.0, 1.0); d_v];
        let mesh = PhaseMesh::build(0.0, 1.0, n_x, &v, n_v).unwrap();
        for cell in 0..mesh.n_phase_cells() {
            for e in mesh.edges(cell) {
                if let Some(nb) = e.neighbor_cell {
                    let back = mesh.edge(nb, e.axis, e.side.opposite());
                    prop_assert_eq!(back.neighbor_cell, Some(cell));
                    prop_assert_eq!(back.normal_sign, -e.normal_sign);
                }
            }
        }
    }

    /// Cell measures tile the domain under refinement.
    #[test]
    fn measures_tile_domain(n in 1usize..9, d_v in 1usize..3) {
        let v = vec![(-3.0, 2.0); d_v];
        let mesh = PhaseMesh::build(0.0, 2.5, n, &v, n).unwrap();
        let total = mesh.cell_measure() * mesh.n_phase_cells() as f64;
        let exact = 2.5 * 5.0f64.powi(d_v as i32);
        prop_assert!((total - exact).abs() <= 1e-12 * exact);
    }

    /// Projection reproduces members of the discrete space exactly:
    /// project(eval(c)) = c for random coefficient vectors.
    #[test]
    fn projection_reproduces_discrete_fields(seed in 0u64..1000) {
        let mesh = Arc::new(PhaseMesh::build(0.0, 1.0, 2, &[(-1.0, 1.0)], 2).unwrap());
        let basis = Arc::new(ReferenceBasis::new(2, 2).unwrap());
        let mut f = DistributionField::zeros(mesh.clone(), basis.clone());
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        for c in f.coeffs.iter_mut() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *c = ((s >> 33) as f64 / (1u64 << 31) as f64) - 1.0;
        }
        let again = DistributionField::project(mesh, basis, |x, v| f.eval(x, v));
        for (a, b) in f.coeffs.iter().zip(&again.coeffs) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    /// Periodic wrap is consistent: walking n_x cells to the right returns
    /// to the start.
    #[test]
    fn periodic_walk_closes(n_x in 1usize..8) {
        let mesh = PhaseMesh::build(0.0, 1.0, n_x, &[(-1.0, 1.0)], 2).unwrap();
        let mut cell = 0usize;
        for _ in 0..n_x {
            cell = mesh.neighbor(cell, 0, Side::High).unwrap();
        }
        prop_assert_eq!(cell, 0);
    }
}
