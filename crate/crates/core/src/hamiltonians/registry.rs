//! Built-in systems addressable by string key.
//!
//! * `hN@d` — linear H_N chain in STO-3G with spacing `d` Å (`h4@1.0`)
//! * `hubbard:L:t=T:u=U[:pbc]` — Hubbard chain at half filling
//! * `fcidump:PATH` — integrals and electron count from an FCIDUMP file

use super::{hubbard_chain, hydrogen_chain_sto3g, read_fcidump, MolecularIntegrals};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct System {
    pub key: String,
    pub integrals: MolecularIntegrals,
    pub n_alpha: usize,
    pub n_beta: usize,
}

impl System {
    pub fn new(key: impl Into<String>, integrals: MolecularIntegrals) -> Result<Self> {
        let (n_alpha, n_beta) = integrals.electron_split()?;
        if n_alpha > integrals.n_spatial() {
            return Err(Error::InvalidInput(format!(
                "{n_alpha} alpha electrons exceed {} orbitals",
                integrals.n_spatial()
            )));
        }
        Ok(Self {
            key: key.into(),
            integrals,
            n_alpha,
            n_beta,
        })
    }

    pub fn n_electrons(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    pub fn n_spin(&self) -> usize {
        self.integrals.n_spin()
    }
}

fn bad(key: &str) -> Error {
    Error::UnknownSystem(key.to_string())
}

fn parse_f64(s: &str, key: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| bad(key))
}

pub fn parse_system(key: &str) -> Result<System> {
    let key = key.trim();
    if let Some(path) = key.strip_prefix("fcidump:") {
        if !std::path::Path::new(path).exists() {
            return Err(Error::Io {
                path: path.into(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "FCIDUMP file not found"),
            });
        }
        return System::new(key, read_fcidump(path)?);
    }
    if let Some(rest) = key.strip_prefix("hubbard:") {
        let mut parts = rest.split(':');
        let n: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(key))?;
        let (mut t, mut u, mut periodic) = (1.0, 0.0, false);
        for part in parts {
            match part.split_once('=') {
                Some(("t", v)) => t = parse_f64(v, key)?,
                Some(("u", v)) => u = parse_f64(v, key)?,
                None if part == "pbc" || part == "periodic" => periodic = true,
                _ => return Err(bad(key)),
            }
        }
        return System::new(key, hubbard_chain(n, t, u, periodic)?);
    }
    if let Some(rest) = key.strip_prefix('h') {
        let (n, d) = rest.split_once('@').ok_or_else(|| bad(key))?;
        let n: usize = n.parse().map_err(|_| bad(key))?;
        let d = parse_f64(d, key)?;
        return System::new(key, hydrogen_chain_sto3g(n, d)?);
    }
    Err(bad(key))
}
