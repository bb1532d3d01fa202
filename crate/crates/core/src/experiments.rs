//! Batch runs: shadow-count sweeps, condition comparisons, noise sweeps and
//! potential-energy scans, written out as CSV.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fci::{compute_2rdm, solve_fci};
use crate::hamiltonians::{parse_system, reduced_hamiltonian, ReducedHamiltonian, System};
use crate::numerics::{mix_seed, RngStream};
use crate::rdm::TwoRdm;
use crate::sdp::{solve_sdp, SdpDebugDump, SolveStatus, SolverOptions};
use crate::shadows::{add_gaussian_noise, sample_shadow_ensemble, ShadowRecord, SpinRotationMode};
use crate::v2rdm::{build_sdp, frobenius_error, ConditionSet, D_BLOCK};

const ROTATION_SALT: u64 = 0x5348_4144_4f57_0001;
const NOISE_SALT: u64 = 0x5348_4144_4f57_0002;
const FRESH_SALT: u64 = 0x5348_4144_4f57_0003;

/// How ensembles for different shadow counts relate under one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleMode {
    /// The `m`-shadow ensemble is the first `m` records of one stream.
    #[default]
    Prefix,
    /// Each `m` draws from its own stream seeded with `seed ^ hash(m)`.
    Fresh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: String,
    pub conditions: ConditionSet,
    pub shadow_counts: Vec<usize>,
    pub seeds: Vec<u64>,
    pub sigma: f64,
    pub spin_mode: SpinRotationMode,
    pub ensemble: EnsembleMode,
    pub solver: SolverOptions,
    pub output: Option<PathBuf>,
    /// Directory for per-run SDP debug dumps.
    pub debug_dir: Option<PathBuf>,
    pub pes: Option<PesConfig>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            system: "h4@1.0".into(),
            conditions: ConditionSet::DQG,
            shadow_counts: vec![0],
            seeds: vec![1],
            sigma: 0.0,
            spin_mode: SpinRotationMode::default(),
            ensemble: EnsembleMode::default(),
            solver: SolverOptions::default(),
            output: None,
            debug_dir: None,
            pes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PesConfig {
    /// `hN` for hydrogen chains, or a key containing `{}` that is replaced
    /// by each geometry (`fcidump:n2_{}.fcidump`).
    pub family: String,
    pub geometries: Vec<f64>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be non-empty".into()));
        }
        if self.shadow_counts.is_empty() {
            return Err(Error::Config("shadow_counts must be non-empty".into()));
        }
        if self.shadow_counts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config("shadow_counts must be sorted ascending".into()));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::Config(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub system: String,
    pub conditions: String,
    pub m: usize,
    pub seed: u64,
    pub sigma: f64,
    pub energy: f64,
    pub e_fci: f64,
    pub energy_error: f64,
    pub rdm_error: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub wall_time: f64,
}

/// A system together with its exact reference.
pub struct Reference {
    pub system: System,
    pub k2: ReducedHamiltonian,
    pub e_fci: f64,
    pub d2: TwoRdm,
}

impl Reference {
    pub fn new(system: System) -> Result<Self> {
        let sol = solve_fci(&system.integrals, system.n_alpha, system.n_beta)?;
        let d2 = compute_2rdm(&sol)?;
        let k2 = reduced_hamiltonian(&system.integrals, system.n_electrons())?;
        Ok(Self {
            system,
            k2,
            e_fci: sol.energy,
            d2,
        })
    }

    pub fn from_key(key: &str) -> Result<Self> {
        Self::new(parse_system(key)?)
    }
}

/// Shadows for `(seed, m)`: noiseless prefix plus independent noise.
pub fn scenario_shadows(
    d2: &TwoRdm,
    seed: u64,
    m: usize,
    sigma: f64,
    mode: SpinRotationMode,
    ensemble: EnsembleMode,
) -> Result<Vec<ShadowRecord>> {
    let base = match ensemble {
        EnsembleMode::Prefix => seed,
        EnsembleMode::Fresh => seed ^ mix_seed(m as u64, FRESH_SALT),
    };
    let mut rot = RngStream::derived(base, ROTATION_SALT);
    let mut noise = RngStream::derived(base, NOISE_SALT);
    sample_shadow_ensemble(d2, m, mode, &mut rot)?
        .iter()
        .map(|s| add_gaussian_noise(s, sigma, &mut noise))
        .collect()
}

fn debug_name(system: &str, cond: ConditionSet, m: usize, seed: u64) -> String {
    let clean: String = system
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect();
    format!("{clean}_{cond}_m{m}_s{seed}.json")
}

fn run_one(reference: &Reference, cfg: &ScenarioConfig, seed: u64, m: usize) -> Result<ResultRow> {
    let start = Instant::now();
    let shadows = scenario_shadows(&reference.d2, seed, m, cfg.sigma, cfg.spin_mode, cfg.ensemble)?;
    let problem = build_sdp(&reference.k2, cfg.conditions, &shadows)?;
    let sol = solve_sdp(&problem, &cfg.solver)?;
    if let Some(dir) = &cfg.debug_dir {
        let dump = SdpDebugDump::new(&problem, &sol);
        let path = dir.join(debug_name(&reference.system.key, cfg.conditions, m, seed));
        std::fs::write(&path, serde_json::to_string_pretty(&dump)?).map_err(|source| Error::Io { path, source })?;
    }
    let d2 = TwoRdm::new(reference.k2.n_spin(), sol.blocks[D_BLOCK].clone())?;
    let energy = reference.k2.energy(&d2);
    Ok(ResultRow {
        system: reference.system.key.clone(),
        conditions: cfg.conditions.to_string(),
        m,
        seed,
        sigma: cfg.sigma,
        energy,
        e_fci: reference.e_fci,
        energy_error: energy - reference.e_fci,
        rdm_error: frobenius_error(&d2, &reference.d2)?,
        status: sol.status,
        iterations: sol.iterations,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Runs every `(seed, m)` pair against a prepared reference. Rows are sorted
/// by seed, then shadow count.
pub fn run_with_reference(reference: &Reference, cfg: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    if let Some(dir) = &cfg.debug_dir {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
    }
    let tasks: Vec<(u64, usize)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| cfg.shadow_counts.iter().map(move |&m| (s, m)))
        .collect();
    let mut rows = tasks
        .par_iter()
        .map(|&(seed, m)| run_one(reference, cfg, seed, m))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| (a.seed, a.m).cmp(&(b.seed, b.m)));
    Ok(rows)
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let reference = Reference::from_key(&cfg.system)?;
    run_with_reference(&reference, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PesPoint {
    pub geometry: f64,
    pub system: String,
    pub e_fci: f64,
    /// Shadow-free relaxation (m = 0).
    pub v2rdm: ResultRow,
    /// One row per configured positive shadow count and seed.
    pub sv2rdm: Vec<ResultRow>,
}

pub fn pes_system_key(family: &str, geometry: f64) -> String {
    if family.contains("{}") {
        family.replace("{}", &geometry.to_string())
    } else {
        format!("{family}@{geometry}")
    }
}

pub fn pes_scan(family: &str, geometries: &[f64], cfg: &ScenarioConfig) -> Result<Vec<PesPoint>> {
    if geometries.is_empty() {
        return Err(invalid("PES scan needs at least one geometry"));
    }
    let mut counts: Vec<usize> = cfg.shadow_counts.iter().copied().filter(|&m| m > 0).collect();
    counts.insert(0, 0);
    counts.dedup();
    let mut out = Vec::with_capacity(geometries.len());
    for &g in geometries {
        let key = pes_system_key(family, g);
        let point_cfg = ScenarioConfig {
            system: key.clone(),
            shadow_counts: counts.clone(),
            ..cfg.clone()
        };
        let reference = Reference::from_key(&key)?;
        let rows = run_with_reference(&reference, &point_cfg)?;
        let (base, rest): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.m == 0);
        let v2rdm = base
            .into_iter()
            .next()
            .ok_or_else(|| invalid("missing shadow-free row"))?;
        out.push(PesPoint {
            geometry: g,
            system: key,
            e_fci: reference.e_fci,
            v2rdm,
            sv2rdm: rest,
        });
    }
    Ok(out)
}

pub const CSV_HEADER: [&str; 12] = [
    "system",
    "conditions",
    "m",
    "seed",
    "sigma",
    "energy",
    "e_fci",
    "energy_error",
    "rdm_error",
    "status",
    "iterations",
    "wall_time",
];

/// Twelve significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.system.clone(),
            r.conditions.clone(),
            r.m.to_string(),
            r.seed.to_string(),
            format_float(r.sigma),
            format_float(r.energy),
            format_float(r.e_fci),
            format_float(r.energy_error),
            format_float(r.rdm_error),
            r.status.to_string(),
            r.iterations.to_string(),
            format_float(r.wall_time),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    if rows.is_empty() {
        return Err(invalid("no rows to write"));
    }
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

/// Drops the `wall_time` column so runs can be compared byte for byte.
pub fn strip_wall_time(csv_text: &str) -> String {
    csv_text
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn any_infeasible(rows: &[ResultRow]) -> bool {
    rows.iter().any(|r| r.status == SolveStatus::Infeasible)
}
