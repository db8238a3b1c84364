//! Scenario documents (JSON, `"schema": 1`) and their resolution into
//! geometry, truncation policy and idempotent.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::expr::{parse_endomorphism, parse_function, parse_series};
use crate::coefficients::{parse_rational, ChartFunction, ChartRing, MultiIndex};
use crate::error::{Error, Result};
use crate::fedosov::ChartGeometry;
use crate::weyl_forms::{forms, GradedElement, SymplecticFrame, TermKey, TruncationPolicy};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub schema: u32,
    pub name: String,
    /// Half the chart dimension.
    pub n: usize,
    pub ring: ChartRing,
    /// ω_ij as rational strings; the standard frame when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_lower: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub christoffel: ChristoffelSpec,
    #[serde(default)]
    pub bundle: BundleSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub omega_h: Vec<OmegaTerm>,
    /// q as a matrix literal over the function ring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idempotent: Option<String>,
    pub truncation: TruncationSpec,
    /// Highest ħ order to report.
    #[serde(default = "default_order")]
    pub order: i32,
}

fn default_order() -> i32 {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChristoffelSpec {
    #[default]
    Flat,
    /// Γᵏ_ij = ω^{km} ∂_m∂_i∂_j φ.
    GeneratingFunction { phi: String },
    /// Nonzero Γᵏ_ij, 1-based; symmetric partners must be listed too.
    Components { entries: Vec<ChristoffelEntry> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChristoffelEntry {
    pub upper: usize,
    pub lower: [usize; 2],
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub rank: usize,
    #[serde(default)]
    pub connection: BundleConnection,
}

impl Default for BundleSpec {
    fn default() -> Self {
        Self { rank: 1, connection: BundleConnection::Trivial }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BundleConnection {
    #[default]
    Trivial,
    /// Γ_V = q dq − dq q, built from the scenario idempotent.
    FromIdempotent,
    /// One matrix literal (Γ_V)_i per coordinate.
    Components { matrices: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaTerm {
    /// 1-based dx indices, in the order written.
    pub forms: [usize; 2],
    /// Coefficient series; every term must carry a positive power of `h`.
    pub coefficient: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    pub k_min: i32,
    pub k_max: i32,
    /// Largest kept filtration degree 2k + |α|.
    #[serde(rename = "D")]
    pub filtration: i32,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub geometry: ChartGeometry,
    pub policy: TruncationPolicy,
    pub q: Option<Vec<Vec<ChartFunction>>>,
}

fn ctx(field: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Parse { pos, msg } => Error::Scenario(format!("{field}: parse error at position {pos}: {msg}")),
        other => Error::Scenario(format!("{field}: {other}")),
    }
}

impl ScenarioDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.schema != SCHEMA_VERSION {
            return Err(Error::Scenario(format!("schema {} (supported: {SCHEMA_VERSION})", doc.schema)));
        }
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn resolve(self) -> Result<Scenario> {
        self.resolve_with(None)
    }

    /// Resolves the document, optionally overriding the filtration bound D.
    pub fn resolve_with(self, filtration: Option<i32>) -> Result<Scenario> {
        if !(1..=2).contains(&self.n) {
            return Err(Error::Scenario(format!("n = {} (supported: 1, 2)", self.n)));
        }
        let dim = self.dim();
        let ring = self.ring;
        let frame = match &self.omega_lower {
            None => SymplecticFrame::standard(dim)?,
            Some(rows) => {
                let m = rows
                    .iter()
                    .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
                    .map_err(ctx("omega_lower"))?;
                SymplecticFrame::from_lower(m).map_err(ctx("omega_lower"))?
            }
        };
        let rank = self.bundle.rank;
        if rank == 0 || rank > 4 {
            return Err(Error::Scenario(format!("bundle rank {rank} (supported: 1..=4)")));
        }
        let q = match &self.idempotent {
            None => None,
            Some(src) => {
                let e = parse_endomorphism(src, ring, dim, rank).map_err(ctx("idempotent"))?;
                if e.terms().any(|(k, _)| k.hbar != 0) {
                    return Err(Error::Scenario("idempotent: q must not involve h".into()));
                }
                let q = e.function_matrix(0);
                check_idempotent(&q).map_err(ctx("idempotent"))?;
                Some(q)
            }
        };
        let mut geom = ChartGeometry::flat(frame, ring, rank);
        geom = match &self.christoffel {
            ChristoffelSpec::Flat => geom,
            ChristoffelSpec::GeneratingFunction { phi } => {
                let f = parse_function(phi, ring, dim).map_err(ctx("christoffel.phi"))?;
                geom.with_generating_function(&f).map_err(ctx("christoffel"))?
            }
            ChristoffelSpec::Components { entries } => {
                let z = ChartFunction::zero(ring, dim);
                let mut g = vec![vec![vec![z; dim]; dim]; dim];
                for e in entries {
                    let [i, j] = e.lower;
                    if [e.upper, i, j].iter().any(|&v| v == 0 || v > dim) {
                        return Err(Error::Scenario(format!("christoffel: index out of 1..={dim}")));
                    }
                    g[e.upper - 1][i - 1][j - 1] = parse_function(&e.value, ring, dim).map_err(ctx("christoffel.value"))?;
                }
                geom.with_christoffel(g).map_err(ctx("christoffel"))?
            }
        };
        geom = match &self.bundle.connection {
            BundleConnection::Trivial => geom,
            BundleConnection::FromIdempotent => {
                let q = q.as_ref().ok_or_else(|| Error::Scenario("bundle: from_idempotent needs an idempotent".into()))?;
                geom.with_projector_connection(q).map_err(ctx("bundle"))?
            }
            BundleConnection::Components { matrices } => {
                if matrices.len() != dim {
                    return Err(Error::Scenario(format!("bundle: {} matrices, expected {dim}", matrices.len())));
                }
                let mut comps = Vec::with_capacity(dim);
                for m in matrices {
                    let e = parse_endomorphism(m, ring, dim, rank).map_err(ctx("bundle.matrices"))?;
                    comps.push(e.function_matrix(0));
                }
                geom.with_bundle(comps).map_err(ctx("bundle"))?
            }
        };
        let mut omega_h = GradedElement::zero(dim, 1, ring);
        for t in &self.omega_h {
            let [a, b] = t.forms;
            if a == 0 || b == 0 || a > dim || b > dim {
                return Err(Error::Scenario(format!("omega_h: index out of 1..={dim}")));
            }
            let Some((sign, mask)) = forms::from_indices(&[a - 1, b - 1]) else {
                return Err(Error::Scenario("omega_h: repeated dx index".into()));
            };
            let s = parse_series(&t.coefficient, ring, dim).map_err(ctx("omega_h.coefficient"))?;
            for (k, f) in &s.terms {
                let f = if sign < 0 { f.neg() } else { f.clone() };
                omega_h.add_assign(&GradedElement::monomial(dim, 1, TermKey::new(*k, MultiIndex::zero(), mask, 0, 0), &f));
            }
        }
        geom = geom.with_omega_h(omega_h).map_err(ctx("omega_h"))?;
        let t = self.truncation;
        let policy = TruncationPolicy::new(t.k_min, t.k_max, filtration.unwrap_or(t.filtration), ring).map_err(ctx("truncation"))?;
        Ok(Scenario { doc: self, geometry: geom, policy, q })
    }
}

fn check_idempotent(q: &[Vec<ChartFunction>]) -> Result<()> {
    let n = q.len();
    for p in 0..n {
        for r in 0..n {
            let mut s = q[p][r].neg();
            for t in 0..n {
                s.add_assign(&q[p][t].mul(&q[t][r]));
            }
            if !s.is_zero() {
                return Err(Error::InvalidArgument(format!("q·q ≠ q at entry ({}, {})", p + 1, r + 1)));
            }
        }
    }
    Ok(())
}

impl Scenario {
    pub fn load(path: &Path, filtration: Option<i32>) -> Result<Self> {
        ScenarioDoc::load(path)?.resolve_with(filtration)
    }
}
