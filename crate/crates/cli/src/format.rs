//! On-disk JSON formats.
//!
//! Game file:
//!
//! ```json
//! {
//!   "name": "battle of the sexes",
//!   "players": 2,
//!   "shape": [2, 2],
//!   "payoffs": [[2, -1, -1, 1], [1, -1, -1, 2]]
//! }
//! ```
//!
//! `payoffs[k]` lists player `k+1`'s tensor in row-major order: with 1-based
//! strategy indices `(i_1, .., i_n)` the entry sits at position
//! `Σ_k (i_k - 1) · Π_{j>k} m_j`, so the last player's index varies fastest.
//! Optional keys: `name`, `shift_applied` (a constant already added to every
//! payoff) and `generator` (`{"name", "seed"}` for generated games).
//!
//! Profile file: `{"profile": [[x_1..], [x_2..], ..]}`.
//!
//! Tensor file (export): `{"schema_version", "shape", "data", "q"}` with the
//! same row-major convention.

use std::path::Path;

use mlgame_core::game::{MixedProfile, MultilinearGame};
use mlgame_core::tensor::DenseTensor;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{file}: {key}: {message} (line {line}, column {column})")]
    Parse {
        file: String,
        key: String,
        message: String,
        line: usize,
        column: usize,
    },
    #[error("{file}: {key}: {message}")]
    Invalid {
        file: String,
        key: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorInfo {
    pub name: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub players: usize,
    pub shape: Vec<usize>,
    pub payoffs: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift_applied: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorInfo>,
}

impl GameFile {
    pub fn from_game(game: &MultilinearGame<f64>) -> Self {
        Self {
            name: None,
            players: game.players(),
            shape: game.dims().to_vec(),
            payoffs: game.payoffs().iter().map(|p| p.data().to_vec()).collect(),
            shift_applied: None,
            generator: None,
        }
    }

    /// Validates the document and builds the game. `file` labels messages.
    pub fn to_game(&self, file: &str) -> Result<MultilinearGame<f64>, FormatError> {
        let invalid = |key: String, message: String| FormatError::Invalid {
            file: file.to_string(),
            key,
            message,
        };
        if self.players < 2 {
            return Err(invalid("players".into(), format!("need at least 2 players, found {}", self.players)));
        }
        if self.shape.len() != self.players {
            return Err(invalid(
                "shape".into(),
                format!("expected {} entries (one per player), found {}", self.players, self.shape.len()),
            ));
        }
        if let Some(i) = self.shape.iter().position(|&m| m == 0) {
            return Err(invalid(format!("shape[{i}]"), "strategy counts must be at least 1".into()));
        }
        let len = self
            .shape
            .iter()
            .try_fold(1usize, |a, &m| a.checked_mul(m))
            .ok_or_else(|| invalid("shape".into(), "tensor size overflows".into()))?;
        if self.payoffs.len() != self.players {
            return Err(invalid(
                "payoffs".into(),
                format!("expected {} arrays (one per player), found {}", self.players, self.payoffs.len()),
            ));
        }
        for (k, p) in self.payoffs.iter().enumerate() {
            if p.len() != len {
                return Err(invalid(
                    format!("payoffs[{k}]"),
                    format!("expected {len} entries (product of shape), found {}", p.len()),
                ));
            }
            if let Some(i) = p.iter().position(|v| !v.is_finite()) {
                return Err(invalid(format!("payoffs[{k}][{i}]"), "entry is not finite".into()));
            }
        }
        if let Some(c) = self.shift_applied {
            if !c.is_finite() {
                return Err(invalid("shift_applied".into(), "not finite".into()));
            }
        }
        MultilinearGame::from_flat(self.shape.clone(), self.payoffs.clone())
            .map_err(|e| invalid("payoffs".into(), e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub profile: Vec<Vec<f64>>,
}

impl ProfileFile {
    pub fn to_profile(&self, game: &MultilinearGame<f64>, file: &str) -> Result<MixedProfile<f64>, FormatError> {
        let invalid = |key: String, message: String| FormatError::Invalid {
            file: file.to_string(),
            key,
            message,
        };
        if self.profile.len() != game.players() {
            return Err(invalid(
                "profile".into(),
                format!("expected {} blocks (one per player), found {}", game.players(), self.profile.len()),
            ));
        }
        for (k, (b, &m)) in self.profile.iter().zip(game.dims()).enumerate() {
            if b.len() != m {
                return Err(invalid(format!("profile[{k}]"), format!("expected {m} entries, found {}", b.len())));
            }
        }
        MixedProfile::new(self.profile.clone()).map_err(|e| invalid("profile".into(), e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    pub schema_version: u32,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
    pub q: Vec<f64>,
}

impl TensorFile {
    pub fn new(tensor: &DenseTensor<f64>, q: Vec<f64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            shape: tensor.dims().to_vec(),
            data: tensor.data().to_vec(),
            q,
        }
    }

    pub fn to_tensor(&self, file: &str) -> Result<DenseTensor<f64>, FormatError> {
        DenseTensor::new(self.shape.clone(), self.data.clone()).map_err(|e| FormatError::Invalid {
            file: file.to_string(),
            key: "data".into(),
            message: e.to_string(),
        })
    }
}

/// Parses JSON text, reporting the key path and position of the first error.
pub fn parse<T: DeserializeOwned>(text: &str, file: &str) -> Result<T, FormatError> {
    let positioned = |key: String, e: serde_json::Error| {
        let mut message = e.to_string();
        // serde_json appends its own position; it is reported separately
        if let Some(cut) = message.rfind(" at line ") {
            message.truncate(cut);
        }
        FormatError::Parse {
            file: file.to_string(),
            key,
            message,
            line: e.line(),
            column: e.column(),
        }
    };
    let de = &mut serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut *de).map_err(|e| {
        let key = e.path().to_string();
        let key = if key == "." || key == "?" { "(document)".to_string() } else { key };
        positioned(key, e.into_inner())
    })?;
    de.end().map_err(|e| positioned("(document)".into(), e))?;
    Ok(value)
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_game(path: &Path) -> Result<(GameFile, MultilinearGame<f64>), FormatError> {
    let label = path.display().to_string();
    let file: GameFile = parse(&read_text(path)?, &label)?;
    let game = file.to_game(&label)?;
    Ok((file, game))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
