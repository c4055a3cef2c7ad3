//! Grid description, true admittance-matrix assembly, and topology events.
//!
//! A grid is an undirected connected graph of buses (one slack, at least one
//! generator and one load) with complex line admittances and optional bus
//! shunts. The admittance matrix has `-y_ik` on edge off-diagonals and the
//! sum of incident line admittances plus the shunt on each diagonal. With no
//! shunts the matrix is a symmetric Laplacian (zero row sums).

pub mod matpower;

use crate::{CMatrix, Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const DEFAULT_V_LIMITS: [f64; 2] = [0.9, 1.1];
/// Angle box used when a grid file omits limits.
pub const DEFAULT_THETA_LIMITS: [f64; 2] =
    [-std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_4];
/// Default tolerance for the Laplacian check; assembly is exact, the
/// tolerance only guards file round-trips.
pub const LAPLACIAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusKind {
    Slack,
    Generator,
    Load,
}

/// One bus of the grid. Ids are the external (file) numbering; all other
/// APIs work with positional indices into `GridSpec::buses`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub kind: BusKind,
    #[serde(default = "default_v_limits")]
    pub v_limits: [f64; 2],
    #[serde(default = "default_theta_limits")]
    pub theta_limits: [f64; 2],
    /// Active-power range, generators only (p.u.).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_limits: Option<[f64; 2]>,
    /// Reactive-power range, generators only (p.u.).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_limits: Option<[f64; 2]>,
    /// Nominal complex demand `p + jq`, loads only (p.u., consumption > 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<Complex64>,
    /// Nominal voltage set-point, generators only (p.u.).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_setpoint: Option<f64>,
    /// Nominal active-power injection, generators only (p.u.).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_nominal: Option<f64>,
}

impl Bus {
    pub fn plain(id: usize, kind: BusKind) -> Self {
        Self {
            id,
            kind,
            v_limits: DEFAULT_V_LIMITS,
            theta_limits: DEFAULT_THETA_LIMITS,
            p_limits: None,
            q_limits: None,
            demand: None,
            v_setpoint: None,
            p_nominal: None,
        }
    }
}

fn default_v_limits() -> [f64; 2] {
    DEFAULT_V_LIMITS
}

fn default_theta_limits() -> [f64; 2] {
    DEFAULT_THETA_LIMITS
}

/// A power line with series admittance `y = g + jb`, `g > 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub y: Complex64,
}

/// A shunt element at a bus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Shunt {
    pub bus: usize,
    pub y: Complex64,
}

/// Base quantities; electrical data is stored per-unit, the base is kept
/// only for reporting.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BaseValues {
    pub mva: f64,
    pub kv: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default)]
    pub name: String,
    pub base: BaseValues,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    #[serde(default)]
    pub shunts: Vec<Shunt>,
}

/// Dense admittance matrix with structure flags.
#[derive(Debug, Clone)]
pub struct AdmittanceMatrix {
    pub y: CMatrix,
    pub is_symmetric: bool,
    pub is_laplacian: bool,
}

impl GridSpec {
    /// Load a grid from a `.json` schema file or a MATPOWER-style `.m` case.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let spec = match path.extension().and_then(|e| e.to_str()) {
            Some("m") => matpower::parse_case(&text)?,
            _ => serde_json::from_str::<GridSpec>(&text)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.buses.len()
    }

    /// Positional index of the bus with external id `id`.
    pub fn index_of(&self, id: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn slack_index(&self) -> usize {
        self.buses
            .iter()
            .position(|b| b.kind == BusKind::Slack)
            .expect("validated grid has a slack bus")
    }

    pub fn generator_indices(&self) -> Vec<usize> {
        self.kind_indices(BusKind::Generator)
    }

    pub fn load_indices(&self) -> Vec<usize> {
        self.kind_indices(BusKind::Load)
    }

    fn kind_indices(&self, kind: BusKind) -> Vec<usize> {
        self.buses
            .iter()
            .enumerate()
            .filter(|(_, b)| b.kind == kind)
            .map(|(i, _)| i)
            .collect()
    }

    /// Nominal demand vector over all buses (zero outside loads).
    pub fn nominal_demands(&self) -> Vec<Complex64> {
        self.buses
            .iter()
            .map(|b| b.demand.unwrap_or(Complex64::new(0.0, 0.0)))
            .collect()
    }

    /// Structural and electrical validation of the grid description.
    pub fn validate(&self) -> Result<()> {
        let n = self.buses.len();
        if n < 2 {
            return Err(Error::TooFewBuses { min: 2, got: n });
        }
        let slacks = self
            .buses
            .iter()
            .filter(|b| b.kind == BusKind::Slack)
            .count();
        if slacks != 1 {
            return Err(Error::InvalidGrid(format!(
                "expected exactly one slack bus, found {slacks}"
            )));
        }
        if self.generator_indices().is_empty() || self.load_indices().is_empty() {
            return Err(Error::InvalidGrid(
                "grid needs at least one generator and one load".into(),
            ));
        }
        let mut ids = std::collections::HashSet::new();
        for b in &self.buses {
            if !ids.insert(b.id) {
                return Err(Error::InvalidGrid(format!("duplicate bus id {}", b.id)));
            }
            if b.v_limits[0] > b.v_limits[1] || b.theta_limits[0] > b.theta_limits[1] {
                return Err(Error::InvalidGrid(format!(
                    "bus {}: empty limit interval",
                    b.id
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for line in &self.lines {
            if line.from == line.to {
                return Err(Error::InvalidGrid(format!(
                    "self-loop at bus {}",
                    line.from
                )));
            }
            let (a, b) = ordered(line.from, line.to);
            if !seen.insert((a, b)) {
                return Err(Error::DuplicateEdge(a, b));
            }
            if self.index_of(line.from).is_none() || self.index_of(line.to).is_none() {
                return Err(Error::InvalidGrid(format!(
                    "line ({},{}) references an unknown bus",
                    line.from, line.to
                )));
            }
            if line.y.re <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "line ({},{}) must have positive conductance, got {}",
                    line.from, line.to, line.y.re
                )));
            }
        }
        for s in &self.shunts {
            if self.index_of(s.bus).is_none() {
                return Err(Error::InvalidGrid(format!(
                    "shunt at unknown bus {}",
                    s.bus
                )));
            }
        }
        self.check_connected()?;
        Ok(())
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for line in &self.lines {
            let a = self.index_of(line.from).unwrap();
            let b = self.index_of(line.to).unwrap();
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut visited = vec![false; n];
        let mut stack = vec![0usize];
        visited[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
        let unreachable: Vec<usize> = visited
            .iter()
            .enumerate()
            .filter(|(_, v)| !**v)
            .map(|(i, _)| self.buses[i].id)
            .collect();
        if unreachable.is_empty() {
            Ok(())
        } else {
            Err(Error::Disconnected(unreachable))
        }
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Assemble the admittance matrix of a grid.
///
/// Each line contributes `-y` to both off-diagonal slots and `+y` to both
/// incident diagonals, so the result is exactly symmetric; shunts add to the
/// diagonal only, and `(Y 1)_i = y_s,i`.
pub fn build_admittance(spec: &GridSpec) -> Result<AdmittanceMatrix> {
    spec.validate()?;
    let n = spec.n();
    let mut y = CMatrix::zeros(n, n);
    for line in &spec.lines {
        let a = spec.index_of(line.from).unwrap();
        let b = spec.index_of(line.to).unwrap();
        y[(a, b)] -= line.y;
        y[(b, a)] -= line.y;
        y[(a, a)] += line.y;
        y[(b, b)] += line.y;
    }
    let mut any_shunt = false;
    for s in &spec.shunts {
        let i = spec.index_of(s.bus).unwrap();
        y[(i, i)] += s.y;
        if s.y.norm() > 0.0 {
            any_shunt = true;
        }
    }
    Ok(AdmittanceMatrix {
        y,
        is_symmetric: true,
        is_laplacian: !any_shunt,
    })
}

/// Remove a line (given by external bus ids, either orientation) and return
/// the modified grid. Fails if the edge does not exist or its removal would
/// disconnect the graph.
pub fn apply_line_trip(spec: &GridSpec, edge: (usize, usize)) -> Result<GridSpec> {
    let mut out = spec.clone();
    let key = ordered(edge.0, edge.1);
    let before = out.lines.len();
    out.lines.retain(|l| ordered(l.from, l.to) != key);
    if out.lines.len() == before {
        return Err(Error::UnknownEdge(edge.0, edge.1));
    }
    match out.check_connected() {
        Ok(()) => Ok(out),
        Err(Error::Disconnected(_)) => Err(Error::WouldDisconnect(edge.0, edge.1)),
        Err(e) => Err(e),
    }
}

/// `true` when `Y` is symmetric with zero row sums, both within `tol`.
pub fn is_laplacian(y: &CMatrix, tol: f64) -> bool {
    let (rows, cols) = y.shape();
    if rows != cols {
        return false;
    }
    let ones = crate::CVector::from_element(cols, Complex64::new(1.0, 0.0));
    let row_sums = y * ones;
    let max_row = row_sums.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_asym = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| (i, j)))
        .map(|(i, j)| (y[(i, j)] - y[(j, i)]).norm())
        .fold(0.0, f64::max);
    max_row <= tol && max_asym <= tol
}
