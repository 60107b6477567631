// SPDX-License-Identifier: Apache-2.0

//! JSON run configuration. Complex scalars are `[re, im]`, matrices are
//! row-major nested arrays and `β` is a list of `n` sections
//! `β_{··ℓ}`.

use std::path::Path;

use serde::Deserialize;

use crate::composite::CompositeSpec;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, RMat, RVec};
use crate::model::{self, StructureConstants};
use crate::qsde::SystemSpec;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub systems: Vec<SystemEntry>,
    #[serde(default)]
    pub composites: Vec<CompositeEntry>,
    #[serde(default)]
    pub analysis: Analysis,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ConstantsEntry {
    Builtin(String),
    Inline { alpha: Vec<Vec<[f64; 2]>>, beta: Vec<Vec<Vec<[f64; 2]>>> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemEntry {
    pub name: String,
    pub constants: ConstantsEntry,
    pub energy: Vec<f64>,
    pub coupling: Vec<Vec<f64>>,
    /// Defaults to zero.
    #[serde(default)]
    pub offset: Option<Vec<f64>>,
    /// Initial mean for `mean-flow`; defaults to zero.
    #[serde(default)]
    pub mu0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositeEntry {
    pub name: String,
    pub first: String,
    pub second: String,
    /// `E⁽¹²⁾`, `n₁ × n₂`; defaults to zero.
    #[serde(default)]
    pub direct_coupling: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analysis {
    pub eps: Option<Vec<f64>>,
    pub grid: Option<GridSpec>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub budget: Option<usize>,
    pub horizon_factor: Option<f64>,
    /// Arguments of the quasi-characteristic function; defaults to unit vectors.
    pub qcf_u: Option<Vec<Vec<f64>>>,
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn real_matrix(rows: &[Vec<f64>], what: &str) -> Result<RMat> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != cols) {
        return Err(schema(format!("{what}: ragged rows")));
    }
    Ok(RMat::from_fn(r, cols, |i, j| rows[i][j]))
}

fn complex_matrix(rows: &[Vec<[f64; 2]>], what: &str) -> Result<CMat> {
    let r = rows.len();
    if rows.iter().any(|row| row.len() != r) {
        return Err(schema(format!("{what}: expected a square matrix")));
    }
    Ok(CMat::from_fn(r, r, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

fn constants(entry: &ConstantsEntry, name: &str) -> Result<StructureConstants> {
    match entry {
        ConstantsEntry::Builtin(s) if s == "pauli" => Ok(model::pauli_constants()),
        ConstantsEntry::Builtin(s) => Err(schema(format!("system {name}: unknown builtin constants {s:?}"))),
        ConstantsEntry::Inline { alpha, beta } => {
            let alpha = complex_matrix(alpha, &format!("system {name} alpha"))?;
            let sections = beta
                .iter()
                .enumerate()
                .map(|(l, s)| complex_matrix(s, &format!("system {name} beta section {l}")))
                .collect::<Result<Vec<_>>>()?;
            StructureConstants::new(alpha, sections).map_err(|e| schema(format!("system {name}: {e}")))
        }
    }
}

impl SystemEntry {
    pub fn is_pauli(&self) -> bool {
        matches!(&self.constants, ConstantsEntry::Builtin(s) if s == "pauli")
    }

    pub fn build(&self) -> Result<SystemSpec> {
        let k = constants(&self.constants, &self.name)?;
        let coupling = real_matrix(&self.coupling, &format!("system {} coupling", self.name))?;
        let offset = self.offset.clone().unwrap_or_else(|| vec![0.0; coupling.nrows()]);
        SystemSpec::new(k, RVec::from_vec(self.energy.clone()), coupling, RVec::from_vec(offset))
            .map_err(|e| schema(format!("system {}: {e}", self.name)))
    }

    pub fn mu0(&self, n: usize) -> Result<RVec> {
        match &self.mu0 {
            None => Ok(RVec::zeros(n)),
            Some(v) if v.len() == n => Ok(RVec::from_vec(v.clone())),
            Some(v) => Err(schema(format!("system {}: mu0 has length {}, expected {n}", self.name, v.len()))),
        }
    }
}

impl ConfigDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
        doc.check_names()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn check_names(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for name in self.systems.iter().map(|s| &s.name).chain(self.composites.iter().map(|c| &c.name)) {
            if !seen.insert(name.as_str()) {
                return Err(schema(format!("duplicate name {name:?}")));
            }
        }
        for comp in &self.composites {
            for part in [&comp.first, &comp.second] {
                self.system(part)?;
            }
        }
        Ok(())
    }

    pub fn system(&self, name: &str) -> Result<&SystemEntry> {
        self.systems
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| schema(format!("unknown system {name:?}")))
    }

    pub fn build_composite(&self, entry: &CompositeEntry) -> Result<CompositeSpec> {
        let s1 = self.system(&entry.first)?.build()?;
        let s2 = self.system(&entry.second)?.build()?;
        let e12 = match &entry.direct_coupling {
            Some(rows) => real_matrix(rows, &format!("composite {} direct_coupling", entry.name))?,
            None => RMat::zeros(s1.n(), s2.n()),
        };
        CompositeSpec::new(s1, s2, e12).map_err(|e| schema(format!("composite {}: {e}", entry.name)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAULI: &str = r#"{
        "systems": [{"name": "p", "constants": "pauli", "energy": [0, 0, 1],
                     "coupling": [[1, 0, 0], [0, 1, 0]]}],
        "composites": [{"name": "pp", "first": "p", "second": "p"}]
    }"#;

    #[test]
    fn parses_builtin_and_composite() {
        let doc = ConfigDocument::from_json(PAULI).unwrap();
        let spec = doc.systems[0].build().unwrap();
        assert_eq!(spec.offset, RVec::zeros(2));
        assert_eq!(doc.build_composite(&doc.composites[0]).unwrap().n(), 15);
    }

    #[test]
    fn inline_constants_match_builtin() {
        let k = model::pauli_constants();
        let sec = |l: usize| -> Vec<Vec<[f64; 2]>> {
            (0..3).map(|j| (0..3).map(|i| [k.beta()[l][(j, i)].re, k.beta()[l][(j, i)].im]).collect()).collect()
        };
        let doc = serde_json::json!({
            "systems": [{"name": "q", "constants": {
                "alpha": [[[1,0],[0,0],[0,0]],[[0,0],[1,0],[0,0]],[[0,0],[0,0],[1,0]]],
                "beta": [sec(0), sec(1), sec(2)]},
                "energy": [0, 0, 0], "coupling": [[0, 0, 0], [0, 0, 0]]}]
        });
        let doc = ConfigDocument::from_json(&doc.to_string()).unwrap();
        assert_eq!(doc.systems[0].build().unwrap().constants, k);
    }

    #[test]
    fn schema_errors() {
        for bad in [
            r#"{"systems": [{"name": "p", "constants": "spin1", "energy": [0,0,1], "coupling": []}]}"#,
            r#"{"systems": [], "composites": [{"name": "x", "first": "a", "second": "b"}]}"#,
            r#"{"systems": [{"name": "p", "constants": "pauli", "energy": [0,1], "coupling": []}]}"#,
            r#"{"systems": [{"name": "p", "constants": "pauli", "energy": [0,0,1], "coupling": [[1,0,0]]}]}"#,
            r#"{"sistems": []}"#,
        ] {
            let r = ConfigDocument::from_json(bad).and_then(|d| d.systems.iter().try_for_each(|s| s.build().map(|_| ())));
            assert!(matches!(r, Err(Error::Schema(_))), "{bad}");
        }
    }
}
