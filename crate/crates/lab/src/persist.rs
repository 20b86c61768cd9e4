//! Result persistence: one plain-text record per solved surface, keyed by
//! genus and target angle rounded to 1e-6, re-loadable as a warm start.
//! Records are `key = value` lines; floats are written with 17 significant
//! digits so reloads reproduce residuals exactly.

use scherk::numerics::Truncation;
use scherk::scmap::VertexConfiguration;
use scherk::solver::SolvedSurface;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("i/o error on {0}: {1}")]
    Io(PathBuf, String),
    #[error("missing field {0}")]
    MissingField(&'static str),
    #[error("malformed field {0}: {1}")]
    Malformed(&'static str, String),
    #[error("invalid configuration in record: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, PersistError>;

/// Serialized form of a solved surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub genus: usize,
    pub theta_target: f64,
    pub theta_achieved: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub lambda: f64,
    pub truncation: Truncation,
    pub conjugacy_residual: f64,
    pub angle_residual: f64,
}

impl SolutionRecord {
    pub fn from_solved(s: &SolvedSurface) -> Self {
        SolutionRecord {
            genus: s.genus(),
            theta_target: s.theta_target,
            theta_achieved: s.theta_achieved,
            a: s.config.a().to_vec(),
            b: s.config.b().to_vec(),
            lambda: s.lambda,
            truncation: s.config.truncation,
            conjugacy_residual: s.conjugacy_residual,
            angle_residual: s.angle_residual,
        }
    }

    pub fn configuration(&self) -> Result<VertexConfiguration> {
        VertexConfiguration::new(self.a.clone(), self.b.clone(), self.truncation)
            .map_err(|e| PersistError::BadConfig(e.to_string()))
    }

    /// File name key: genus plus theta rounded to 1e-6.
    pub fn key(&self) -> String {
        format!("sol_g{}_t{:.6}", self.genus, self.theta_target)
    }

    pub fn to_text(&self) -> String {
        let m = match self.truncation {
            Truncation::Infinite => "inf".to_string(),
            Truncation::Finite(m) => m.to_string(),
        };
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.17e}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "genus = {}\ntheta_target = {:.17e}\ntheta_achieved = {:.17e}\na = {}\nb = {}\nlambda = {:.17e}\nM = {}\nconjugacy_residual = {:.17e}\nangle_residual = {:.17e}\n",
            self.genus,
            self.theta_target,
            self.theta_achieved,
            join(&self.a),
            join(&self.b),
            self.lambda,
            m,
            self.conjugacy_residual,
            self.angle_residual,
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut fields = std::collections::HashMap::new();
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                fields.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get = |k: &'static str| -> Result<String> {
            fields
                .get(k)
                .cloned()
                .ok_or(PersistError::MissingField(k))
        };
        let f64field = |k: &'static str| -> Result<f64> {
            get(k)?.parse().map_err(|_| PersistError::Malformed(k, get(k).unwrap_or_default()))
        };
        let vecfield = |k: &'static str| -> Result<Vec<f64>> {
            get(k)?
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|_| PersistError::Malformed(k, get(k).unwrap_or_default()))
        };
        let m_raw = get("M")?;
        let truncation = if m_raw == "inf" {
            Truncation::Infinite
        } else {
            Truncation::Finite(
                m_raw
                    .parse()
                    .map_err(|_| PersistError::Malformed("M", m_raw.clone()))?,
            )
        };
        Ok(SolutionRecord {
            genus: get("genus")?
                .parse()
                .map_err(|_| PersistError::Malformed("genus", m_raw))?,
            theta_target: f64field("theta_target")?,
            theta_achieved: f64field("theta_achieved")?,
            a: vecfield("a")?,
            b: vecfield("b")?,
            lambda: f64field("lambda")?,
            truncation,
            conjugacy_residual: f64field("conjugacy_residual")?,
            angle_residual: f64field("angle_residual")?,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| PersistError::Io(dir.into(), e.to_string()))?;
        let path = dir.join(format!("{}.txt", self.key()));
        std::fs::write(&path, self.to_text())
            .map_err(|e| PersistError::Io(path.clone(), e.to_string()))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PersistError::Io(path.into(), e.to_string()))?;
        Self::from_text(&text)
    }
}

/// Flat zigzag record stored alongside solutions: genus, per-period edge
/// lengths, and the slope of the first edge.
#[derive(Debug, Clone, PartialEq)]
pub struct ZigzagRecord {
    pub genus: usize,
    pub edge_lengths: Vec<f64>,
    pub start_slope: i8,
}

impl ZigzagRecord {
    pub fn from_zigzag(z: &scherk::orthodisk::Zigzag) -> Self {
        ZigzagRecord {
            genus: z.genus(),
            edge_lengths: z.edge_lengths.clone(),
            start_slope: z.start_slope,
        }
    }

    pub fn to_text(&self) -> String {
        format!(
            "genus = {}\nedge_lengths = {}\nstart_slope = {}\n",
            self.genus,
            self.edge_lengths
                .iter()
                .map(|x| format!("{x:.17e}"))
                .collect::<Vec<_>>()
                .join(","),
            self.start_slope
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut fields = std::collections::HashMap::new();
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                fields.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get = |k: &'static str| fields.get(k).cloned().ok_or(PersistError::MissingField(k));
        Ok(ZigzagRecord {
            genus: get("genus")?
                .parse()
                .map_err(|_| PersistError::Malformed("genus", get("genus").unwrap_or_default()))?,
            edge_lengths: get("edge_lengths")?
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|_| PersistError::Malformed("edge_lengths", String::new()))?,
            start_slope: get("start_slope")?
                .parse()
                .map_err(|_| PersistError::Malformed("start_slope", String::new()))?,
        })
    }
}

/// Results directory: `--out` flag, then `SCHERK_LAB_RESULTS`, then
/// `./results`.
pub fn results_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var("SCHERK_LAB_RESULTS") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from("results")
}

/// Flat `key = value` config file mirroring the CLI flags.
pub fn read_config(path: &Path) -> Result<std::collections::HashMap<String, String>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| PersistError::Io(path.into(), e.to_string()))?;
    let mut out = std::collections::HashMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            out.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok(out)
}
