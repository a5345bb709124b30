//! Model configuration: a declarative TOML document mapped onto the builder
//! types. Matrix and vector literals are exact decimal pairs `[re, im]`, so
//! configs diff cleanly and round-trip through the parser.

use fockalg::error::{FockError, Result};
use fockalg::fock_core::Statistics;
use fockalg::hamiltonians::{InteractionSpec, PauliFierzSpec, QfhSpec};
use fockalg::operators::OneParticleOperator;
use fockalg::{C64, CMatrix, CVector};
use serde::{Deserialize, Serialize};

pub type ComplexLit = [f64; 2];
pub type VectorLit = Vec<ComplexLit>;
pub type MatrixLit = Vec<Vec<ComplexLit>>;

fn lit_to_c64(z: ComplexLit) -> C64 {
    C64::new(z[0], z[1])
}

pub fn vector_from_lit(v: &VectorLit) -> CVector {
    CVector::from_fn(v.len(), |k, _| lit_to_c64(v[k]))
}

pub fn matrix_from_lit(m: &MatrixLit, what: &str) -> Result<CMatrix> {
    let rows = m.len();
    if rows == 0 {
        return Err(FockError::InvalidParameter(format!(
            "{what}: matrix literal has no rows"
        )));
    }
    let cols = m[0].len();
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(FockError::InvalidParameter(format!(
                "{what}: row {i} has {} entries, row 0 has {cols}",
                row.len()
            )));
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| lit_to_c64(m[i][j])))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub basis: BasisConfig,
    pub one_particle: OneParticleConfig,
    pub interaction: InteractionConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub small_system: Option<SmallSystemConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjugate: Option<ConjugateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub statistics: StatisticsName,
    pub d: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticsName {
    Boson,
    Fermion,
}

impl From<StatisticsName> for Statistics {
    fn from(name: StatisticsName) -> Statistics {
        match name {
            StatisticsName::Boson => Statistics::Boson,
            StatisticsName::Fermion => Statistics::Fermion,
        }
    }
}

/// Either an explicit Hermitian matrix literal or a named dispersion family
/// sampled on a momentum grid (producing a diagonal matrix whose dimension
/// is the grid length).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneParticleConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<MatrixLit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_floor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Relativistic,
    Nonrelativistic,
}

pub fn dispersion(family: FamilyName, mass: f64, p: f64) -> f64 {
    match family {
        FamilyName::Relativistic => (p * p + mass * mass).sqrt(),
        FamilyName::Nonrelativistic => 0.5 * p * p + mass,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    pub kind: InteractionKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<PolynomialTerm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<WeylAtom>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    None,
    Polynomial,
    WeylSum,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialTerm {
    pub coefficient: ComplexLit,
    pub factors: Vec<VectorLit>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylAtom {
    pub coefficient: ComplexLit,
    pub vector: VectorLit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallSystemConfig {
    pub ell: usize,
    pub l: MatrixLit,
    pub v: MatrixLit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugateConfig {
    pub a: MatrixLit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub ess_spectrum: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mourre: Option<MourreConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trotter: Option<TrotterConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MourreConfig {
    pub grid: GridConfig,
    pub epsilon: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridConfig {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(FockError::InvalidParameter(format!(
                "analysis.mourre.grid.points: need at least 2, got {}",
                self.points
            )));
        }
        if !(self.hi > self.lo) {
            return Err(FockError::InvalidParameter(format!(
                "analysis.mourre.grid: need hi > lo, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        let n = self.points;
        Ok((0..n)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / (n - 1) as f64)
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterConfig {
    pub t: f64,
    pub schedule: Vec<usize>,
}

/// Everything the analysis drivers need, built and validated once.
pub struct BuiltModel {
    pub spec: QfhSpec,
    pub h_matrix: CMatrix,
    pub family: Option<(FamilyName, f64, Vec<f64>)>,
    pub small_system: Option<PauliFierzSpec>,
    pub conjugate: Option<CMatrix>,
}

pub fn parse_config(text: &str) -> Result<ModelConfig> {
    toml::from_str(text)
        .map_err(|e| FockError::InvalidParameter(format!("config parse error: {e}")))
}

pub fn serialize_config(config: &ModelConfig) -> Result<String> {
    toml::to_string_pretty(config)
        .map_err(|e| FockError::InvalidParameter(format!("config serialize error: {e}")))
}

impl ModelConfig {
    pub fn build(&self) -> Result<BuiltModel> {
        let statistics: Statistics = self.basis.statistics.into();
        let d = self.basis.d;

        let op = &self.one_particle;
        let (h_matrix, family) = match (&op.h, op.family) {
            (Some(_), Some(_)) => {
                return Err(FockError::InvalidParameter(
                    "one_particle: give either h or family, not both".into(),
                ))
            }
            (None, None) => {
                return Err(FockError::InvalidParameter(
                    "one_particle: give a matrix h or a named family".into(),
                ))
            }
            (Some(lit), None) => {
                if op.mass.is_some() || op.grid.is_some() {
                    return Err(FockError::InvalidParameter(
                        "one_particle: mass/grid only apply to a named family".into(),
                    ));
                }
                let m = matrix_from_lit(lit, "one_particle.h")?;
                if m.nrows() != d || m.ncols() != d {
                    return Err(FockError::DimensionMismatch {
                        rows: d,
                        cols: d,
                        got_rows: m.nrows(),
                        got_cols: m.ncols(),
                    });
                }
                (m, None)
            }
            (None, Some(name)) => {
                let mass = op.mass.ok_or_else(|| {
                    FockError::InvalidParameter("one_particle.mass: required for a family".into())
                })?;
                let grid = op.grid.clone().ok_or_else(|| {
                    FockError::InvalidParameter("one_particle.grid: required for a family".into())
                })?;
                if grid.len() != d {
                    return Err(FockError::InvalidParameter(format!(
                        "one_particle.grid: {} points but basis.d = {d}",
                        grid.len()
                    )));
                }
                if mass <= 0.0 {
                    return Err(FockError::InvalidParameter(format!(
                        "one_particle.mass: must be positive, got {mass}"
                    )));
                }
                let m = CMatrix::from_fn(d, d, |i, j| {
                    if i == j {
                        C64::new(dispersion(name, mass, grid[i]), 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                (m, Some((name, mass, grid)))
            }
        };

        let interaction = self.interaction.to_spec(d)?;
        let h_op = OneParticleOperator::hermitian(h_matrix.clone())?;
        let spec = QfhSpec::new(
            statistics,
            d,
            self.basis.n_max,
            h_op,
            interaction,
            op.mass_floor,
        )?;

        let small_system = match &self.small_system {
            None => None,
            Some(ss) => {
                if statistics != Statistics::Boson {
                    return Err(FockError::InvalidParameter(
                        "small_system: the coupled model is bosonic".into(),
                    ));
                }
                let l = matrix_from_lit(&ss.l, "small_system.l")?;
                let v = matrix_from_lit(&ss.v, "small_system.v")?;
                let h_pos = OneParticleOperator::positive(h_matrix.clone())?;
                let l_pos = OneParticleOperator::positive(l)?;
                Some(PauliFierzSpec::new(
                    d,
                    self.basis.n_max,
                    h_pos,
                    ss.ell,
                    l_pos,
                    v,
                    op.mass_floor,
                )?)
            }
        };

        let conjugate = match &self.conjugate {
            None => None,
            Some(c) => {
                let a = matrix_from_lit(&c.a, "conjugate.a")?;
                if a.nrows() != d || a.ncols() != d {
                    return Err(FockError::DimensionMismatch {
                        rows: d,
                        cols: d,
                        got_rows: a.nrows(),
                        got_cols: a.ncols(),
                    });
                }
                Some(a)
            }
        };

        Ok(BuiltModel {
            spec,
            h_matrix,
            family,
            small_system,
            conjugate,
        })
    }
}

impl InteractionConfig {
    pub fn to_spec(&self, d: usize) -> Result<InteractionSpec> {
        let spec = match self.kind {
            InteractionKind::None => {
                if !self.terms.is_empty() || !self.atoms.is_empty() {
                    return Err(FockError::InvalidParameter(
                        "interaction: kind none takes no terms or atoms".into(),
                    ));
                }
                InteractionSpec::none()
            }
            InteractionKind::Polynomial => {
                if !self.atoms.is_empty() {
                    return Err(FockError::InvalidParameter(
                        "interaction: polynomial kind takes terms, not atoms".into(),
                    ));
                }
                InteractionSpec::PolynomialField {
                    terms: self
                        .terms
                        .iter()
                        .map(|t| {
                            (
                                lit_to_c64(t.coefficient),
                                t.factors.iter().map(vector_from_lit).collect(),
                            )
                        })
                        .collect(),
                }
            }
            InteractionKind::WeylSum => {
                if !self.terms.is_empty() {
                    return Err(FockError::InvalidParameter(
                        "interaction: weyl_sum kind takes atoms, not terms".into(),
                    ));
                }
                InteractionSpec::WeylSum {
                    atoms: self
                        .atoms
                        .iter()
                        .map(|a| (lit_to_c64(a.coefficient), vector_from_lit(&a.vector)))
                        .collect(),
                }
            }
        };
        spec.validate(d)?;
        Ok(spec)
    }
}
