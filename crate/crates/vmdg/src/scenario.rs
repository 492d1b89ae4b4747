//! Catalog of initial data, exact solutions, and manufactured-source
//! configurations driving the verification runs.
//!
//! Scenario callables must hold at every point of the declared domain; for
//! the ones that ship exact solutions, `verify_scenario` spot-checks the PDE
//! residual by finite differences at random space-time points before any
//! convergence study consumes them.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Component, ComponentSet};
use crate::mesh::{AxisPartition, BoundaryKind, PhaseMesh};
use crate::vlasov::{acceleration, VelocityMapping};

pub type PhaseFn = Arc<dyn Fn(f64, [f64; 2]) -> f64 + Send + Sync>;
pub type PhaseTimeFn = Arc<dyn Fn(f64, [f64; 2], f64) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;
pub type EmTimeFn = Arc<dyn Fn(f64, f64) -> ([f64; 3], [f64; 3]) + Send + Sync>;
pub type EmSourceFn = Arc<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>;

#[derive(Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub d_v: usize,
    pub x_bounds: (f64, f64),
    pub v_bounds: [(f64, f64); 2],
    pub active: ComponentSet,
    pub mapping: VelocityMapping,
    pub f0: PhaseFn,
    pub e0: FieldFn,
    pub b0: FieldFn,
    pub exact_f: Option<PhaseTimeFn>,
    pub exact_em: Option<EmTimeFn>,
    /// Extra right-hand side of the Vlasov equation (manufactured runs).
    pub source_f: Option<PhaseTimeFn>,
    /// Extra right-hand side of the Ampere equation (manufactured runs).
    pub source_e: Option<EmSourceFn>,
    /// Fields held fixed: pure transport benchmark, Maxwell never stepped.
    pub freeze_fields: bool,
    /// Distribution identically zero and never stepped (pure Maxwell runs).
    pub vlasov_inert: bool,
}

/// Manufactured-solution constants.
///
/// f = (1 + 0.2 v) e^{-4 v^2} (1 + 0.5 sin(x - t)), E1 = AMP cos(x - t):
/// the amplitude makes Gauss's law hold exactly, the first v-moments are
/// M1 (classical) and M1_REL (relativistic weight 1/sqrt(1+v^2)).
const MANUFACTURED_AMP: f64 = -0.443_113_462_726_379_0; // -sqrt(pi)/4
const MANUFACTURED_M1: f64 = 0.022_155_673_136_318_95; // sqrt(pi)/80
const MANUFACTURED_M1_REL: f64 = 0.019_190_863_199_791_84;

fn manufactured_g(v: f64) -> f64 {
    (1.0 + 0.2 * v) * (-4.0 * v * v).exp()
}

fn manufactured_g_prime(v: f64) -> f64 {
    (0.2 - 8.0 * v - 1.6 * v * v) * (-4.0 * v * v).exp()
}

/// Parameters of the Weibel smoke scenario; the reduced-system setup is
/// standard but its quantitative parameters are a free choice here. The
/// default spreads keep the thermal core resolvable on desk-scale meshes
/// (n_v >= 24 or so) while the box still holds the tails to ~1e-11.
#[derive(Clone, Copy, Debug)]
pub struct WeibelParams {
    /// Squared thermal spreads of the anisotropic Maxwellian.
    pub beta1: f64,
    pub beta2: f64,
    /// Magnetic seed amplitude of `B3 = b_seed * sin(x)`.
    pub b_seed: f64,
    /// Velocity box half-width.
    pub v_extent: f64,
}

impl Default for WeibelParams {
    fn default() -> Self {
        Self { beta1: 0.04, beta2: 0.16, b_seed: 1e-3, v_extent: 4.0 }
    }
}

impl Scenario {
    pub fn names() -> &'static [&'static str] {
        &[
            "free_streaming",
            "maxwell_vacuum_1d",
            "manufactured_coupled",
            "weibel_1d2v",
            "free_streaming_relativistic",
            "manufactured_coupled_relativistic",
        ]
    }

    pub fn lookup(name: &str) -> Result<Scenario> {
        match name {
            "free_streaming" => Ok(free_streaming(VelocityMapping::Classical)),
            "free_streaming_relativistic" => Ok(free_streaming(VelocityMapping::Relativistic)),
            "maxwell_vacuum_1d" => Ok(maxwell_vacuum_1d()),
            "manufactured_coupled" => Ok(manufactured_coupled(VelocityMapping::Classical)),
            "manufactured_coupled_relativistic" => {
                Ok(manufactured_coupled(VelocityMapping::Relativistic))
            }
            "weibel_1d2v" => Ok(weibel_1d2v(WeibelParams::default())),
            _ => Err(Error::UnknownScenario(name.to_string())),
        }
    }

    pub fn mesh(&self, n_x: usize, n_v: usize) -> Result<PhaseMesh> {
        let x = AxisPartition::new(self.x_bounds.0, self.x_bounds.1, n_x, BoundaryKind::Periodic)?;
        let v = (0..self.d_v)
            .map(|j| {
                AxisPartition::new(self.v_bounds[j].0, self.v_bounds[j].1, n_v, BoundaryKind::Cutoff)
            })
            .collect::<Result<Vec<_>>>()?;
        PhaseMesh::new(vec![x], v)
    }

    pub fn v_axes_nominal(&self) -> Vec<AxisPartition> {
        (0..self.d_v)
            .map(|j| {
                AxisPartition::new(self.v_bounds[j].0, self.v_bounds[j].1, 1, BoundaryKind::Cutoff)
                    .unwrap()
            })
            .collect()
    }

    pub fn has_exact(&self) -> bool {
        self.exact_f.is_some() || self.exact_em.is_some()
    }
}

fn free_streaming(mapping: VelocityMapping) -> Scenario {
    let f0 = |x: f64, v: [f64; 2]| (-v[0] * v[0] / 0.25).exp() * (1.0 + 0.5 * x.sin());
    let exact = move |x: f64, v: [f64; 2], t: f64| {
        let vt = mapping.transport(v, 1);
        f0(x - vt[0] * t, v)
    };
    Scenario {
        name: match mapping {
            VelocityMapping::Classical => "free_streaming",
            VelocityMapping::Relativistic => "free_streaming_relativistic",
        },
        d_v: 1,
        x_bounds: (0.0, TAU),
        v_bounds: [(-6.0, 6.0), (0.0, 0.0)],
        active: ComponentSet::EMPTY,
        mapping,
        f0: Arc::new(f0),
        e0: Arc::new(|_| [0.0; 3]),
        b0: Arc::new(|_| [0.0; 3]),
        exact_f: Some(Arc::new(exact)),
        exact_em: Some(Arc::new(|_, _| ([0.0; 3], [0.0; 3]))),
        source_f: None,
        source_e: None,
        freeze_fields: true,
        vlasov_inert: false,
    }
}

fn maxwell_vacuum_1d() -> Scenario {
    // d'Alembert plane wave in the (E2, B3) pair. The velocity box is inert
    // metadata (f = 0) but feeds the CFL policy: |v| <= 1.55 puts the
    // gamma = 0.2 temporal ladder just inside the degree-3 stability limit.
    let wave = |x: f64, t: f64| (TAU * (x - t)).cos();
    Scenario {
        name: "maxwell_vacuum_1d",
        d_v: 1,
        x_bounds: (0.0, 1.0),
        v_bounds: [(-1.55, 1.55), (0.0, 0.0)],
        active: ComponentSet::of(&[Component::E2, Component::B3]),
        mapping: VelocityMapping::Classical,
        f0: Arc::new(|_, _| 0.0),
        e0: Arc::new(move |x| [0.0, wave(x, 0.0), 0.0]),
        b0: Arc::new(move |x| [0.0, 0.0, wave(x, 0.0)]),
        exact_f: Some(Arc::new(|_, _, _| 0.0)),
        exact_em: Some(Arc::new(move |x, t| {
            ([0.0, wave(x, t), 0.0], [0.0, 0.0, wave(x, t)])
        })),
        source_f: None,
        source_e: None,
        freeze_fields: false,
        vlasov_inert: true,
    }
}

fn manufactured_coupled(mapping: VelocityMapping) -> Scenario {
    let p = |x: f64, t: f64| 1.0 + 0.5 * (x - t).sin();
    let e1 = |x: f64, t: f64| MANUFACTURED_AMP * (x - t).cos();
    let m1 = match mapping {
        VelocityMapping::Classical => MANUFACTURED_M1,
        VelocityMapping::Relativistic => MANUFACTURED_M1_REL,
    };
    let source_f = move |x: f64, v: [f64; 2], t: f64| {
        let vt = mapping.transport(v, 1)[0];
        let c = (x - t).cos();
        0.5 * (vt - 1.0) * manufactured_g(v[0]) * c
            + e1(x, t) * p(x, t) * manufactured_g_prime(v[0])
    };
    // S_E1 = d/dt E1 + J1; transverse components stay source free
    let source_e = move |x: f64, t: f64| {
        [MANUFACTURED_AMP * (x - t).sin() + m1 * p(x, t), 0.0, 0.0]
    };
    Scenario {
        name: match mapping {
            VelocityMapping::Classical => "manufactured_coupled",
            VelocityMapping::Relativistic => "manufactured_coupled_relativistic",
        },
        d_v: 1,
        x_bounds: (0.0, TAU),
        v_bounds: [(-6.0, 6.0), (0.0, 0.0)],
        active: ComponentSet::of(&[Component::E1]),
        mapping,
        f0: Arc::new(move |x, v| manufactured_g(v[0]) * p(x, 0.0)),
        e0: Arc::new(move |x| [e1(x, 0.0), 0.0, 0.0]),
        b0: Arc::new(|_| [0.0; 3]),
        exact_f: Some(Arc::new(move |x, v, t| manufactured_g(v[0]) * p(x, t))),
        exact_em: Some(Arc::new(move |x, t| ([e1(x, t), 0.0, 0.0], [0.0; 3]))),
        source_f: Some(Arc::new(source_f)),
        source_e: Some(Arc::new(source_e)),
        freeze_fields: false,
        vlasov_inert: false,
    }
}

fn weibel_1d2v(params: WeibelParams) -> Scenario {
    let WeibelParams { beta1, beta2, b_seed, v_extent } = params;
    let norm = 1.0 / (PI * (beta1 * beta2).sqrt());
    Scenario {
        name: "weibel_1d2v",
        d_v: 2,
        x_bounds: (0.0, TAU),
        v_bounds: [(-v_extent, v_extent), (-v_extent, v_extent)],
        active: ComponentSet::of(&[Component::E1, Component::E2, Component::B3]),
        mapping: VelocityMapping::Classical,
        f0: Arc::new(move |_, v| {
            norm * (-v[0] * v[0] / beta1 - v[1] * v[1] / beta2).exp()
        }),
        e0: Arc::new(|_| [0.0; 3]),
        b0: Arc::new(move |x| [0.0, 0.0, b_seed * x.sin()]),
        exact_f: None,
        exact_em: None,
        source_f: None,
        source_e: None,
        freeze_fields: false,
        vlasov_inert: false,
    }
}

/// Weibel with non-default parameters (library-level configurability).
pub fn weibel_with(params: WeibelParams) -> Scenario {
    weibel_1d2v(params)
}

/// Outcome of the finite-difference PDE spot check.
#[derive(Clone, Copy, Debug)]
pub struct ScenarioCheck {
    pub has_exact: bool,
    pub points: usize,
    pub max_vlasov_residual: f64,
    pub max_maxwell_residual: f64,
    /// Largest |f0| sampled within two coarse cells of the v-boundary.
    pub boundary_support: f64,
}

impl ScenarioCheck {
    pub fn max_residual(&self) -> f64 {
        self.max_vlasov_residual.max(self.max_maxwell_residual)
    }
}

/// Composite Gauss quadrature of `g(v)` over the velocity box.
pub fn v_box_quadrature(
    bounds: &[(f64, f64)],
    panels: usize,
    g: impl Fn([f64; 2]) -> f64,
) -> f64 {
    let (nodes, weights) = crate::basis::gauss_legendre(10);
    let line = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
        let w = (hi - lo) / panels as f64;
        (0..panels)
            .flat_map(|p| {
                let c = lo + (p as f64 + 0.5) * w;
                nodes
                    .iter()
                    .zip(&weights)
                    .map(move |(&t, &wt)| (c + 0.5 * w * t, 0.5 * w * wt))
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    match bounds.len() {
        1 => {
            let l = line(bounds[0].0, bounds[0].1);
            crate::diagnostics::neumaier_sum(l.into_iter().map(|(v, w)| w * g([v, 0.0])))
        }
        2 => {
            let l0 = line(bounds[0].0, bounds[0].1);
            let l1 = line(bounds[1].0, bounds[1].1);
            let mut terms = Vec::with_capacity(l0.len() * l1.len());
            for &(v0, w0) in &l0 {
                for &(v1, w1) in &l1 {
                    terms.push(w0 * w1 * g([v0, v1]));
                }
            }
            crate::diagnostics::neumaier_sum(terms)
        }
        _ => unreachable!(),
    }
}

/// Spot-check the declared exact solution against the declared PDE (with
/// sources) by central finite differences at `points` random space-time
/// samples; reports the largest relative residual.
pub fn verify_scenario(s: &Scenario, points: usize, seed: u64) -> ScenarioCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut check = ScenarioCheck {
        has_exact: s.has_exact(),
        points,
        max_vlasov_residual: 0.0,
        max_maxwell_residual: 0.0,
        boundary_support: boundary_support(s),
    };
    if !s.has_exact() {
        return check;
    }
    let delta = 1e-5;
    let em_at = |x: f64, t: f64| -> ([f64; 3], [f64; 3]) {
        s.exact_em.as_ref().map(|em| em(x, t)).unwrap_or(([0.0; 3], [0.0; 3]))
    };
    for _ in 0..points {
        let x = rng.gen_range(s.x_bounds.0..s.x_bounds.1);
        let t = rng.gen_range(0.0..1.0);
        // keep v in the bulk so the stencil stays inside the support
        let mut v = [0.0f64; 2];
        for j in 0..s.d_v {
            let (lo, hi) = s.v_bounds[j];
            v[j] = rng.gen_range(0.6 * lo..0.6 * hi);
        }

        if let Some(exact_f) = &s.exact_f {
            let fd_t = (exact_f(x, v, t + delta) - exact_f(x, v, t - delta)) / (2.0 * delta);
            let fd_x = (exact_f(x + delta, v, t) - exact_f(x - delta, v, t)) / (2.0 * delta);
            let mut fd_v = [0.0f64; 2];
            for j in 0..s.d_v {
                let mut hi = v;
                let mut lo = v;
                hi[j] += delta;
                lo[j] -= delta;
                fd_v[j] = (exact_f(x, hi, t) - exact_f(x, lo, t)) / (2.0 * delta);
            }
            let vt = s.mapping.transport(v, s.d_v);
            let (e, b) = em_at(x, t);
            let acc = acceleration(e, b, vt);
            let src = s.source_f.as_ref().map(|sf| sf(x, v, t)).unwrap_or(0.0);
            let mut residual = fd_t + vt[0] * fd_x - src;
            let mut scale = fd_t.abs() + (vt[0] * fd_x).abs() + src.abs();
            for j in 0..s.d_v {
                residual += acc[j] * fd_v[j];
                scale += (acc[j] * fd_v[j]).abs();
            }
            let rel = residual.abs() / scale.max(1.0);
            check.max_vlasov_residual = check.max_vlasov_residual.max(rel);
        }

        if s.exact_em.is_some() && !s.freeze_fields {
            let (e_hi, b_hi) = em_at(x, t + delta);
            let (e_lo, b_lo) = em_at(x, t - delta);
            let (e_xhi, b_xhi) = em_at(x + delta, t);
            let (e_xlo, b_xlo) = em_at(x - delta, t);
            let dx = |hi: [f64; 3], lo: [f64; 3], c: usize| (hi[c] - lo[c]) / (2.0 * delta);
            // 1D curls: (curl F) = (0, -d_x F3, d_x F2)
            let curl_b = [0.0, -dx(b_xhi, b_xlo, 2), dx(b_xhi, b_xlo, 1)];
            let curl_e = [0.0, -dx(e_xhi, e_xlo, 2), dx(e_xhi, e_xlo, 1)];
            let j_cur = current_from_exact(s, x, t);
            let src = s.source_e.as_ref().map(|se| se(x, t)).unwrap_or([0.0; 3]);
            for c in 0..3 {
                let dt_e = (e_hi[c] - e_lo[c]) / (2.0 * delta);
                let r_e = dt_e - (curl_b[c] - j_cur[c] + src[c]);
                let s_e = dt_e.abs() + curl_b[c].abs() + j_cur[c].abs() + src[c].abs();
                let dt_b = (b_hi[c] - b_lo[c]) / (2.0 * delta);
                let r_b = dt_b + curl_e[c];
                let s_b = dt_b.abs() + curl_e[c].abs();
                check.max_maxwell_residual = check
                    .max_maxwell_residual
                    .max(r_e.abs() / s_e.max(1.0))
                    .max(r_b.abs() / s_b.max(1.0));
            }
        }
    }
    check
}

fn current_from_exact(s: &Scenario, x: f64, t: f64) -> [f64; 3] {
    let Some(exact_f) = &s.exact_f else { return [0.0; 3] };
    let mut j = [0.0f64; 3];
    for c in 0..s.d_v {
        j[c] = v_box_quadrature(&s.v_bounds[..s.d_v], 24, |v| {
            exact_f(x, v, t) * s.mapping.transport(v, s.d_v)[c]
        });
    }
    j
}

fn boundary_support(s: &Scenario) -> f64 {
    // coarsest advertised resolution: 8 cells per axis, 2-cell margin
    let mut worst: f64 = 0.0;
    let n_samples = 24;
    for j in 0..s.d_v {
        let (lo, hi) = s.v_bounds[j];
        let band = 2.0 * (hi - lo) / 8.0;
        for side in [lo, hi] {
            for i in 0..n_samples {
                let frac = i as f64 / (n_samples - 1) as f64;
                let vj = if side == lo { lo + frac * band } else { hi - frac * band };
                for xi in 0..n_samples {
                    let x = s.x_bounds.0
                        + (s.x_bounds.1 - s.x_bounds.0) * xi as f64 / (n_samples - 1) as f64;
                    let mut v = [0.0f64; 2];
                    v[j] = vj;
                    // other v component at a few interior values
                    for w in [-0.3, 0.0, 0.4] {
                        if s.d_v > 1 {
                            let other = 1 - j;
                            let (olo, ohi) = s.v_bounds[other];
                            v[other] = 0.5 * (olo + ohi) + 0.5 * w * (ohi - olo);
                        }
                        worst = worst.max((s.f0)(x, v).abs());
                    }
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_catalog() {
        for name in Scenario::names() {
            let s = Scenario::lookup(name).unwrap();
            assert_eq!(&s.name, name);
        }
        assert!(Scenario::lookup("nope").is_err());
        assert!(Scenario::lookup("free_streaming").unwrap().exact_f.is_some());
        assert!(Scenario::lookup("weibel_1d2v").unwrap().exact_f.is_none());
    }

    #[test]
    fn exact_scenarios_pass_fd_spot_check() {
        for name in Scenario::names() {
            let s = Scenario::lookup(name).unwrap();
            let check = verify_scenario(&s, 100, 42);
            if s.has_exact() {
                assert!(
                    check.max_residual() <= 1e-6,
                    "{name}: vlasov {:.2e} maxwell {:.2e}",
                    check.max_vlasov_residual,
                    check.max_maxwell_residual
                );
            } else {
                assert_eq!(check.max_residual(), 0.0);
            }
        }
    }

    #[test]
    fn initial_support_stays_off_the_v_boundary() {
        for name in Scenario::names() {
            let s = Scenario::lookup(name).unwrap();
            let check = verify_scenario(&s, 1, 0);
            assert!(
                check.boundary_support < 1e-10,
                "{name}: boundary support {:.3e}",
                check.boundary_support
            );
        }
    }

    #[test]
    fn manufactured_first_moment_constants_match_quadrature() {
        let m1 = v_box_quadrature(&[(-6.0, 6.0)], 24, |v| manufactured_g(v[0]) * v[0]);
        assert!((m1 - MANUFACTURED_M1).abs() < 1e-14, "{m1}");
        let m1r = v_box_quadrature(&[(-6.0, 6.0)], 24, |v| {
            manufactured_g(v[0]) * v[0] / (1.0 + v[0] * v[0]).sqrt()
        });
        assert!((m1r - MANUFACTURED_M1_REL).abs() < 1e-14, "{m1r}");
        // Gauss's law amplitude: d/dx E1 = rho - rho_i
        let m0 = v_box_quadrature(&[(-6.0, 6.0)], 24, |v| manufactured_g(v[0]));
        assert!((MANUFACTURED_AMP + 0.5 * m0).abs() < 1e-14);
    }
}
