//! JSON documents for subspaces and states.
//!
//! Complex numbers are serialized as two-element `[re, im]` arrays. The
//! canonical serialization keeps struct fields in a fixed order, stores
//! metadata under sorted keys, and relies on shortest-round-trip float
//! formatting, so `parse . serialize` is the identity byte for byte.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use ebspace::certify::{ConstructionClaim, Family3Params};
use ebspace::construct::DirectSumFamilyParams;
use ebspace::states::{BipartiteSubspace, DensityOperator, PureState};
use ebspace::tensor::{CMat, CVec, SystemDims};

#[derive(Debug, thiserror::Error)]
pub enum DocError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error("{0}")]
    Core(#[from] ebspace::Error),
}

pub type DocResult<T> = Result<T, DocError>;

const SPACE_FORMAT: &str = "ebspace/space-v1";
const STATE_FORMAT: &str = "ebspace/state-v1";

/// Serialized form of a bipartite subspace.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceDocument {
    pub format: String,
    #[serde(rename = "dA")]
    pub d_a: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
    /// Basis vectors as arrays of `[re, im]` pairs.
    pub basis: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

/// Result of loading a space document.
pub struct LoadedSpace {
    pub space: BipartiteSubspace,
    /// Set when the stored basis was not orthonormal and had to be fixed.
    pub orthonormalized_on_load: bool,
    pub claim: Option<ConstructionClaim>,
}

fn to_pairs(v: &CVec) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(pairs: &[[f64; 2]]) -> DocResult<CVec> {
    if pairs.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(DocError::Invalid("non-finite entry".into()));
    }
    Ok(DVector::from_iterator(
        pairs.len(),
        pairs.iter().map(|p| Complex64::new(p[0], p[1])),
    ))
}

impl SpaceDocument {
    pub fn from_space(space: &BipartiteSubspace) -> Self {
        SpaceDocument {
            format: SPACE_FORMAT.to_string(),
            d_a: space.d_a(),
            d_b: space.d_b(),
            basis: space.basis().iter().map(to_pairs).collect(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_claim(mut self, claim: &ConstructionClaim) -> Self {
        match claim {
            ConstructionClaim::Family3(p) => {
                self.metadata.insert("family".into(), "family3".into());
                self.metadata.insert(
                    "params".into(),
                    serde_json::json!({"d": p.d, "f": p.f, "theta": p.theta, "g": p.g}),
                );
            }
            ConstructionClaim::Family3N(p) => {
                self.metadata
                    .insert("family".into(), "direct-sum-3n".into());
                let x: Vec<[f64; 2]> = p.x.iter().map(|z| [z.re, z.im]).collect();
                self.metadata.insert(
                    "params".into(),
                    serde_json::json!({"m": p.m, "blocks": p.block_count, "x": x}),
                );
            }
            ConstructionClaim::Saturating(a_vecs) => {
                self.metadata.insert("family".into(), "saturating".into());
                let vecs: Vec<Vec<[f64; 2]>> = a_vecs.iter().map(to_pairs).collect();
                self.metadata
                    .insert("params".into(), serde_json::json!({ "aVecs": vecs }));
            }
        }
        self
    }

    fn claim(&self) -> DocResult<Option<ConstructionClaim>> {
        let Some(family) = self.metadata.get("family").and_then(|v| v.as_str()) else {
            return Ok(None);
        };
        let params = self
            .metadata
            .get("params")
            .cloned()
            .unwrap_or(serde_json::json!({}));
        match family {
            "family3" => {
                let d = field_f64(&params, "d")?;
                let f = field_f64(&params, "f")?;
                let theta = field_f64(&params, "theta")?;
                let g = field_f64(&params, "g")?;
                Ok(Some(ConstructionClaim::Family3(Family3Params::new(
                    d, f, theta, g,
                ))))
            }
            "direct-sum-3n" => {
                let m = field_f64(&params, "m")? as usize;
                let blocks = field_f64(&params, "blocks")? as usize;
                let x_raw: Vec<[f64; 2]> =
                    serde_json::from_value(params.get("x").cloned().ok_or_else(|| {
                        DocError::Invalid("direct-sum-3n claim is missing x".into())
                    })?)?;
                if x_raw.len() != 3 {
                    return Err(DocError::Invalid(
                        "direct-sum-3n claim needs three x values".into(),
                    ));
                }
                let x = [
                    Complex64::new(x_raw[0][0], x_raw[0][1]),
                    Complex64::new(x_raw[1][0], x_raw[1][1]),
                    Complex64::new(x_raw[2][0], x_raw[2][1]),
                ];
                Ok(Some(ConstructionClaim::Family3N(
                    DirectSumFamilyParams::plain(m, blocks, x),
                )))
            }
            "saturating" => {
                let vecs_raw: Vec<Vec<[f64; 2]>> =
                    serde_json::from_value(params.get("aVecs").cloned().ok_or_else(|| {
                        DocError::Invalid("saturating claim is missing aVecs".into())
                    })?)?;
                let vecs: DocResult<Vec<CVec>> = vecs_raw.iter().map(|v| from_pairs(v)).collect();
                Ok(Some(ConstructionClaim::Saturating(vecs?)))
            }
            _ => Ok(None),
        }
    }
}

fn field_f64(v: &serde_json::Value, key: &str) -> DocResult<f64> {
    v.get(key)
        .and_then(|x| x.as_f64())
        .ok_or_else(|| DocError::Invalid(format!("missing numeric field '{}'", key)))
}

/// Canonical serialization of a space document.
pub fn serialize_space(doc: &SpaceDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable");
    s.push('\n');
    s
}

/// Parses and validates a space document.
pub fn parse_space(text: &str) -> DocResult<LoadedSpace> {
    let doc: SpaceDocument = serde_json::from_str(text)?;
    if doc.format != SPACE_FORMAT {
        return Err(DocError::Invalid(format!(
            "unknown format '{}'",
            doc.format
        )));
    }
    let n = doc.d_a * doc.d_b;
    if doc.basis.is_empty() {
        return Err(DocError::Invalid("document has no basis vectors".into()));
    }
    let mut vectors = Vec::with_capacity(doc.basis.len());
    for row in &doc.basis {
        if row.len() != n {
            return Err(DocError::Invalid(format!(
                "basis vector of length {} does not match dA*dB = {}",
                row.len(),
                n
            )));
        }
        let v = from_pairs(row)?;
        if v.norm() == 0.0 {
            return Err(DocError::Invalid("zero basis vector".into()));
        }
        vectors.push(v);
    }
    let claim = doc.claim()?;
    match BipartiteSubspace::from_orthonormal(doc.d_a, doc.d_b, vectors.clone()) {
        Ok(space) => Ok(LoadedSpace {
            space,
            orthonormalized_on_load: false,
            claim,
        }),
        Err(_) => {
            let space = BipartiteSubspace::from_span(doc.d_a, doc.d_b, &vectors)?;
            Ok(LoadedSpace {
                space,
                orthonormalized_on_load: true,
                claim,
            })
        }
    }
}

/// Serialized form of a pure or mixed state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateDocument {
    pub format: String,
    pub kind: String,
    pub dims: Vec<usize>,
    /// Matrix rows for a density operator; a single row for a pure state.
    pub data: Vec<Vec<[f64; 2]>>,
}

pub enum LoadedState {
    Pure(PureState),
    Density(DensityOperator),
}

impl StateDocument {
    pub fn from_density(rho: &DensityOperator) -> Self {
        let n = rho.dim();
        let data = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| [rho.matrix[(r, c)].re, rho.matrix[(r, c)].im])
                    .collect()
            })
            .collect();
        StateDocument {
            format: STATE_FORMAT.to_string(),
            kind: "density".to_string(),
            dims: rho.dims.dims().to_vec(),
            data,
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        StateDocument {
            format: STATE_FORMAT.to_string(),
            kind: "pure".to_string(),
            dims: psi.dims.dims().to_vec(),
            data: vec![to_pairs(&psi.amplitudes)],
        }
    }
}

pub fn serialize_state(doc: &StateDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_state(text: &str) -> DocResult<LoadedState> {
    let doc: StateDocument = serde_json::from_str(text)?;
    if doc.format != STATE_FORMAT {
        return Err(DocError::Invalid(format!(
            "unknown format '{}'",
            doc.format
        )));
    }
    let dims = SystemDims::new(doc.dims.clone())
        .map_err(|e| DocError::Invalid(format!("bad dims: {}", e)))?;
    let n = dims.total();
    match doc.kind.as_str() {
        "pure" => {
            if doc.data.len() != 1 || doc.data[0].len() != n {
                return Err(DocError::Invalid(
                    "pure state needs one row of length dims".into(),
                ));
            }
            let v = from_pairs(&doc.data[0])?;
            Ok(LoadedState::Pure(PureState::raw(v, dims)?.normalized()))
        }
        "density" => {
            if doc.data.len() != n || doc.data.iter().any(|r| r.len() != n) {
                return Err(DocError::Invalid(
                    "density matrix must be square over dims".into(),
                ));
            }
            let mut m = CMat::zeros(n, n);
            for (r, row) in doc.data.iter().enumerate() {
                for (c, p) in row.iter().enumerate() {
                    m[(r, c)] = Complex64::new(p[0], p[1]);
                }
            }
            Ok(LoadedState::Density(DensityOperator::new(m, dims)?))
        }
        other => Err(DocError::Invalid(format!("unknown state kind '{}'", other))),
    }
}

/// Reinterprets a loaded state on a bipartite cut.
pub fn as_bipartite_density(state: LoadedState, cut: (usize, usize)) -> DocResult<DensityOperator> {
    let (da, db) = cut;
    let rho = match state {
        LoadedState::Pure(p) => p.density(),
        LoadedState::Density(d) => d,
    };
    if rho.dim() != da * db {
        return Err(DocError::Invalid(format!(
            "cut {}x{} does not match state of dimension {}",
            da,
            db,
            rho.dim()
        )));
    }
    Ok(DensityOperator::new(
        rho.matrix,
        SystemDims::bipartite(da, db),
    )?)
}
