//! `vmdg` command line: single runs with diagnostics CSV, convergence
//! ladders, the randomized identity suites, and scenario spot checks.
//!
//! Exit codes: 0 success, 1 failed `--assert` gate, 2 configuration error,
//! 3 blow-up detected.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vmdg::config::RunConfig;
use vmdg::csv::{convergence_csv, diagnostics_csv};
use vmdg::maxwell::MaxwellFluxKind;
use vmdg::scenario::{verify_scenario, Scenario};
use vmdg::stepper::{CflPolicy, RunOptions, SemiDiscreteSystem};
use vmdg::study::{asserted_spatial_bound, run_study, StudyMode, StudySetup};
use vmdg::verify::{dissipation_suite, maxwell_suite};
use vmdg::Error;

#[derive(Parser)]
#[command(name = "vmdg", about = "RKDG Vlasov-Maxwell solver and verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags mirror the flat config keys; `--config FILE` loads the file first
/// and explicit flags override it.
#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "n_x")]
    n_x: Option<usize>,
    #[arg(long = "n_v")]
    n_v: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long = "t_final")]
    t_final: Option<f64>,
    #[arg(long)]
    flux: Option<String>,
    #[arg(long)]
    mapping: Option<String>,
    #[arg(long)]
    stride: Option<usize>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "adaptive_dt")]
    adaptive_dt: Option<bool>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
}

impl ConfigArgs {
    fn build(&self) -> vmdg::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_file(&text)?;
        }
        let mut set = |key: &str, value: Option<String>| -> vmdg::Result<()> {
            if let Some(v) = value {
                return cfg.apply(key, &v);
            }
            Ok(())
        };
        set("scenario", self.scenario.clone())?;
        set("k", self.k.map(|v| v.to_string()))?;
        set("n_x", self.n_x.map(|v| v.to_string()))?;
        set("n_v", self.n_v.map(|v| v.to_string()))?;
        set("cfl", self.cfl.map(|v| v.to_string()))?;
        set("t_final", self.t_final.map(|v| v.to_string()))?;
        set("flux", self.flux.clone())?;
        set("mapping", self.mapping.clone())?;
        set("stride", self.stride.map(|v| v.to_string()))?;
        set("out", self.out.clone())?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("adaptive_dt", self.adaptive_dt.map(|v| v.to_string()))?;
        set("levels", self.levels.map(|v| v.to_string()))?;
        set("mode", self.mode.clone())?;
        set("trials", self.trials.map(|v| v.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// One simulation; writes the diagnostics CSV.
    Run(ConfigArgs),
    /// Refinement ladder; writes the convergence CSV.
    Converge {
        #[command(flatten)]
        args: ConfigArgs,
        /// Exit 1 unless the measured orders meet their bounds.
        #[arg(long)]
        assert: bool,
    },
    /// Randomized dissipation / energy identity suites.
    VerifyIdentities {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long)]
        assert: bool,
    },
    /// Finite-difference PDE spot check of the scenario catalog.
    ScenarioCheck {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long)]
        assert: bool,
    },
}

fn emit(out: &Option<String>, text: &str) -> vmdg::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Config(format!("cannot write {path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn warn(cfg: &RunConfig) {
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
}

fn cmd_run(cfg: &RunConfig) -> vmdg::Result<bool> {
    warn(cfg);
    let scenario = cfg.load_scenario()?;
    let sys = SemiDiscreteSystem::new(scenario.clone(), cfg.k, cfg.n_x, cfg.n_v, cfg.flux)?;
    let policy = CflPolicy::for_scenario(&scenario, cfg.cfl);
    let opts = RunOptions { stride: cfg.stride, adaptive_dt: cfg.adaptive_dt };
    let (_, records) = sys.run(sys.initial_state(), cfg.t_final, &policy, &opts)?;
    emit(&cfg.out, &diagnostics_csv(&records))?;
    Ok(true)
}

fn cmd_converge(cfg: &RunConfig, assert_orders: bool) -> vmdg::Result<bool> {
    warn(cfg);
    if assert_orders && cfg.levels < 3 {
        return Err(Error::Config(format!(
            "asserting an EOC needs at least 3 ladder levels, got {}",
            cfg.levels
        )));
    }
    let scenario = cfg.load_scenario()?;
    if scenario.has_exact() {
        let check = verify_scenario(&scenario, 100, cfg.seed);
        if check.max_residual() > 1e-6 {
            return Err(Error::Config(format!(
                "scenario `{}` failed its PDE spot check: residual {:.3e}",
                scenario.name,
                check.max_residual()
            )));
        }
    }
    let setup = StudySetup {
        scenario,
        k: cfg.k,
        n0_x: cfg.n_x,
        n0_v: cfg.n_v,
        gamma: cfg.cfl,
        t_final: cfg.t_final,
        flux: cfg.flux,
        levels: cfg.levels,
        mode: cfg.mode,
    };
    let table = run_study(&setup)?;
    emit(&cfg.out, &convergence_csv(&table))?;
    let mut ok = true;
    match cfg.mode {
        StudyMode::Temporal => {
            let pol = table.pollution.expect("temporal study carries the check");
            eprintln!(
                "spatial-pollution check: floor {:.6e} vs coarsest {:.6e} (ratio {:.4}%) -> {}",
                pol.spatial_error,
                pol.coarsest_error,
                100.0 * pol.ratio,
                if pol.passed { "pass" } else { "FAIL" }
            );
            let row = table.final_row();
            for (label, err, eoc) in [
                ("f", row.err_f, row.eoc_f),
                ("E", row.err_e, row.eoc_e),
                ("B", row.err_b, row.eoc_b),
            ] {
                if err > 0.0 {
                    let in_range = (eoc - 3.0).abs() <= 0.25;
                    eprintln!("temporal EOC({label}) = {eoc:.4} -> {}", pass(in_range));
                    ok &= in_range;
                }
            }
            ok &= pol.passed;
        }
        StudyMode::Coupled => {
            let bound = asserted_spatial_bound(cfg.k, cfg.flux);
            let eoc = table.final_combined_eoc();
            eprintln!("combined EOC = {eoc:.4} (bound {bound}) -> {}", pass(eoc >= bound));
            ok &= eoc >= bound;
        }
        StudyMode::Spatial => {
            let bound = asserted_spatial_bound(cfg.k, cfg.flux);
            let row = table.final_row();
            for (label, err, eoc) in [
                ("f", row.err_f, row.eoc_f),
                ("E", row.err_e, row.eoc_e),
                ("B", row.err_b, row.eoc_b),
            ] {
                if err > 0.0 {
                    eprintln!("EOC({label}) = {eoc:.4} (bound {bound}) -> {}", pass(eoc >= bound));
                    ok &= eoc >= bound;
                }
            }
        }
    }
    Ok(!assert_orders || ok)
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_verify_identities(cfg: &RunConfig, assert_pass: bool) -> vmdg::Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tol = 1e-10;
    let mut ok = true;
    for d_v in [1usize, 2] {
        for k in [0usize, 1, 2] {
            let rep = dissipation_suite(k, d_v, cfg.trials, tol, &mut rng);
            println!(
                "{}: {}/{} within {tol:.0e} (worst {:.3e}) {}",
                rep.label,
                rep.trials - rep.failures,
                rep.trials,
                rep.worst_rel,
                pass(rep.passed())
            );
            ok &= rep.passed();
        }
    }
    for flux in [
        MaxwellFluxKind::Upwind,
        MaxwellFluxKind::Central,
        MaxwellFluxKind::AlternatingEmBp,
        MaxwellFluxKind::AlternatingEpBm,
    ] {
        let rep = maxwell_suite(cfg.k.min(3), flux, cfg.trials, tol, &mut rng);
        println!(
            "{}: {}/{} within {tol:.0e} (worst {:.3e}) {}",
            rep.label,
            rep.trials - rep.failures,
            rep.trials,
            rep.worst_rel,
            pass(rep.passed())
        );
        ok &= rep.passed();
    }
    Ok(!assert_pass || ok)
}

fn cmd_scenario_check(cfg: &RunConfig, assert_pass: bool, explicit: bool) -> vmdg::Result<bool> {
    let names: Vec<String> = if explicit {
        vec![cfg.scenario.clone()]
    } else {
        Scenario::names().iter().map(|s| s.to_string()).collect()
    };
    let mut ok = true;
    for name in &names {
        let scenario = Scenario::lookup(name)?;
        let check = verify_scenario(&scenario, 100, cfg.seed);
        if check.has_exact {
            let good = check.max_residual() <= 1e-6;
            println!(
                "{name}: max relative PDE residual {:.3e} over {} points, \
                 v-boundary support {:.1e} {}",
                check.max_residual(),
                check.points,
                check.boundary_support,
                pass(good)
            );
            ok &= good;
        } else {
            println!(
                "{name}: no exact solution (smoke scenario), v-boundary support {:.1e}",
                check.boundary_support
            );
        }
    }
    Ok(!assert_pass || ok)
}

fn dispatch(cli: &Cli) -> vmdg::Result<bool> {
    match &cli.command {
        Command::Run(args) => cmd_run(&args.build()?),
        Command::Converge { args, assert } => cmd_converge(&args.build()?, *assert),
        Command::VerifyIdentities { args, assert } => {
            cmd_verify_identities(&args.build()?, *assert)
        }
        Command::ScenarioCheck { args, assert } => {
            let explicit = args.scenario.is_some();
            cmd_scenario_check(&args.build()?, *assert, explicit)
        }
    }
}

fn main() -> ExitCode {
    vmdg::configure_threads_from_env();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::NonFinite { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
