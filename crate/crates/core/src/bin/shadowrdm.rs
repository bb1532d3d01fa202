use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shadowrdm::experiments::{
    any_infeasible, csv_string, emit_csv, pes_scan, run_scenario, scenario_shadows, EnsembleMode, Reference,
    ResultRow, ScenarioConfig,
};
use shadowrdm::fci::{compute_2rdm, contract_to_1rdm, solve_fci};
use shadowrdm::hamiltonians::{parse_system, write_fcidump};
use shadowrdm::shadows::{ShadowEnsemble, SpinRotationMode};
use shadowrdm::v2rdm::ConditionSet;

#[derive(Parser)]
#[command(name = "shadowrdm", version, about = "2-RDM reconstruction from classical shadows")]
struct Cli {
    #[command(flatten)]
    global: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Primal and dual residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// d, dq or dqg
    #[arg(long, global = true)]
    conditions: Option<ConditionSet>,
    /// spatial or spinorb
    #[arg(long, global = true)]
    spin_mode: Option<SpinRotationMode>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a TOML config.
    Run {
        config: PathBuf,
        /// CSV destination; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write one SDP debug JSON per run into this directory.
        #[arg(long)]
        debug_dir: Option<PathBuf>,
    },
    /// Potential-energy scan: FCI, v2RDM and sv2RDM per geometry.
    Pes {
        /// `hN` or a key with `{}` standing for the geometry.
        #[arg(long)]
        family: Option<String>,
        /// Comma-separated geometries in Å.
        #[arg(long, value_delimiter = ',')]
        geometries: Vec<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated shadow counts for the sv2RDM rows.
        #[arg(long, value_delimiter = ',')]
        m: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact ground state of a system.
    Fci {
        system: String,
        /// Also write the integrals in FCIDUMP format.
        #[arg(long)]
        write_fcidump: Option<PathBuf>,
    },
    /// Sample a shadow ensemble from the FCI 2-RDM and write it as JSON.
    Shadows {
        system: String,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

impl Overrides {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(t) = self.tol {
            cfg.solver.tol_primal = t;
            cfg.solver.tol_dual = t;
        }
        if let Some(n) = self.max_iter {
            cfg.solver.max_iter = n;
        }
        if let Some(c) = self.conditions {
            cfg.conditions = c;
        }
        if let Some(s) = self.spin_mode {
            cfg.spin_mode = s;
        }
    }
}

fn finish(rows: &[ResultRow], out: Option<&PathBuf>) -> shadowrdm::Result<ExitCode> {
    match out {
        Some(path) => {
            emit_csv(rows, path)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{}", csv_string(rows)?),
    }
    Ok(if any_infeasible(rows) {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn run(cli: Cli) -> shadowrdm::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, debug_dir } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            cli.global.apply(&mut cfg);
            if debug_dir.is_some() {
                cfg.debug_dir = debug_dir;
            }
            let rows = if let Some(pes) = cfg.pes.clone() {
                pes_scan(&pes.family, &pes.geometries, &cfg)?
                    .into_iter()
                    .flat_map(|p| std::iter::once(p.v2rdm).chain(p.sv2rdm))
                    .collect()
            } else {
                run_scenario(&cfg)?
            };
            finish(&rows, out.or(cfg.output).as_ref())
        }
        Command::Pes {
            family,
            geometries,
            config,
            m,
            seeds,
            sigma,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => ScenarioConfig::load(path)?,
                None => ScenarioConfig::default(),
            };
            cli.global.apply(&mut cfg);
            if !m.is_empty() {
                cfg.shadow_counts = m;
            }
            if !seeds.is_empty() {
                cfg.seeds = seeds;
            }
            if let Some(s) = sigma {
                cfg.sigma = s;
            }
            let pes = cfg.pes.clone();
            let family = family
                .or_else(|| pes.as_ref().map(|p| p.family.clone()))
                .ok_or_else(|| shadowrdm::Error::Config("pes needs --family".into()))?;
            let geometries = if geometries.is_empty() {
                pes.map(|p| p.geometries).unwrap_or_default()
            } else {
                geometries
            };
            let points = pes_scan(&family, &geometries, &cfg)?;
            for p in &points {
                eprintln!(
                    "{:>8.4}  fci {:>16.10}  v2rdm {:>16.10}",
                    p.geometry, p.e_fci, p.v2rdm.energy
                );
            }
            let rows: Vec<ResultRow> = points
                .into_iter()
                .flat_map(|p| std::iter::once(p.v2rdm).chain(p.sv2rdm))
                .collect();
            finish(&rows, out.or(cfg.output).as_ref())
        }
        Command::Fci { system, write_fcidump: dump } => {
            let sys = parse_system(&system)?;
            let sol = solve_fci(&sys.integrals, sys.n_alpha, sys.n_beta)?;
            let d2 = compute_2rdm(&sol)?;
            println!("system      {}", sys.key);
            println!("orbitals    {} spatial, {} spin", sys.integrals.n_spatial(), sys.n_spin());
            println!("electrons   {} ({} alpha, {} beta)", sys.n_electrons(), sys.n_alpha, sys.n_beta);
            println!("determinants {}", sol.basis.len());
            println!("e_nuc       {:.12}", sys.integrals.e_nuc());
            println!("e_fci       {:.12}", sol.energy);
            if sys.n_electrons() >= 2 {
                let d1 = contract_to_1rdm(&d2, sys.n_electrons())?;
                let occ: Vec<String> = (0..d1.nrows()).map(|p| format!("{:.6}", d1[(p, p)])).collect();
                println!("occupations {}", occ.join(" "));
            }
            if let Some(path) = dump {
                std::fs::write(&path, write_fcidump(&sys.integrals))
                    .map_err(|source| shadowrdm::Error::Io { path, source })?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Shadows {
            system,
            m,
            seed,
            sigma,
            out,
        } => {
            let mode = cli.global.spin_mode.unwrap_or_default();
            let reference = Reference::from_key(&system)?;
            let shadows = scenario_shadows(&reference.d2, seed, m, sigma, mode, EnsembleMode::Prefix)?;
            let ens = ShadowEnsemble {
                seed,
                mode,
                sigma,
                shadows,
            };
            std::fs::write(&out, ens.to_json()?).map_err(|source| shadowrdm::Error::Io { path: out.clone(), source })?;
            eprintln!("wrote {m} shadows to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
