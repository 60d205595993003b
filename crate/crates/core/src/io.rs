//! Versioned JSON formats for operators, maps, run configurations and reports.
//!
//! Floats are written in scientific notation with 17 significant digits, which
//! round-trips every `f64` exactly; together with a fixed field order this
//! makes save -> load -> save byte-identical.

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::channels::{MapRecipe, SuperOperator};
use crate::linalg::{c, real_trace, ComplexMatrix, HermitianOperator, Projector, PsdOperator};
use crate::{Error, Result, ToleranceConfig};

pub const SCHEMA_VERSION: &str = "1";

/// Serde helpers writing `f64` with 17 significant digits.
pub mod float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    use crate::linalg::Complex64;

    pub fn format(v: f64) -> String {
        format!("{v:.16e}")
    }

    pub fn serialize<S: Serializer>(v: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if !v.is_finite() {
            return Err(serde::ser::Error::custom(format!("cannot serialize non-finite float {v}")));
        }
        let raw = RawValue::from_string(format(*v)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        f64::deserialize(deserializer)
    }

    struct F(f64);

    impl Serialize for F {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            serialize(&self.0, s)
        }
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|&x| F(x)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<f64>::deserialize(d)
        }
    }

    pub mod rows {
        use super::*;

        struct Row<'a>(&'a [f64]);

        impl Serialize for Row<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_seq(self.0.iter().map(|&x| F(x)))
            }
        }

        pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|row| Row(row)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
            Vec::<Vec<f64>>::deserialize(d)
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => s.serialize_some(&F(*x)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<f64>::deserialize(d)
        }
    }

    /// Complex vectors as `[[re, im], ...]`.
    pub mod complex_vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|z| [F(z.re), F(z.im)]))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
            let pairs = Vec::<[f64; 2]>::deserialize(d)?;
            Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
        }
    }
}

/// Canonical pretty JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_canonical_json(value)?)?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
    from_json(&text)
}

/// Dense complex matrix as separate real and imaginary row arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    #[serde(with = "float::rows")]
    pub re: Vec<Vec<f64>>,
    #[serde(with = "float::rows")]
    pub im: Vec<Vec<f64>>,
}

impl MatrixData {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let (rows, cols) = m.shape();
        let re = (0..rows).map(|i| (0..cols).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..rows).map(|i| (0..cols).map(|j| m[(i, j)].im).collect()).collect();
        Self { rows, cols, re, im }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let shape_ok = |a: &Vec<Vec<f64>>| a.len() == self.rows && a.iter().all(|r| r.len() == self.cols);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::Format(format!(
                "matrix arrays do not match the declared {}x{} shape",
                self.rows, self.cols
            )));
        }
        if self.re.iter().chain(&self.im).flatten().any(|x| !x.is_finite()) {
            return Err(Error::Format("matrix entries must be finite".into()));
        }
        Ok(ComplexMatrix::from_fn(self.rows, self.cols, |i, j| c(self.re[i][j], self.im[i][j])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    General,
    Hermitian,
    Psd,
    Density,
    Projector,
}

/// Operator file. The declared `kind` is re-validated on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub schema_version: String,
    pub dim: usize,
    pub kind: MatrixKind,
    #[serde(with = "float::rows")]
    pub re: Vec<Vec<f64>>,
    #[serde(with = "float::rows")]
    pub im: Vec<Vec<f64>>,
}

/// Trace tolerance for [`MatrixKind::Density`].
const DENSITY_TRACE_TOLERANCE: f64 = 1e-9;

impl MatrixFile {
    pub fn new(m: &ComplexMatrix, kind: MatrixKind) -> Self {
        let data = MatrixData::from_matrix(m);
        Self {
            schema_version: SCHEMA_VERSION.into(),
            dim: data.rows,
            kind,
            re: data.re,
            im: data.im,
        }
    }

    pub fn psd(op: &PsdOperator) -> Self {
        Self::new(op.matrix(), MatrixKind::Psd)
    }

    fn check_version(version: &str) -> Result<()> {
        if version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported schema_version {version:?} (expected {SCHEMA_VERSION:?})"
            )));
        }
        Ok(())
    }

    /// Raw matrix after shape checks and validation of the declared kind.
    pub fn to_matrix(&self, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
        Self::check_version(&self.schema_version)?;
        let m = MatrixData {
            rows: self.dim,
            cols: self.dim,
            re: self.re.clone(),
            im: self.im.clone(),
        }
        .to_matrix()?;
        match self.kind {
            MatrixKind::General => {}
            MatrixKind::Hermitian => {
                HermitianOperator::new(m.clone(), cfg)?;
            }
            MatrixKind::Psd => {
                PsdOperator::new(m.clone(), cfg)?;
            }
            MatrixKind::Density => {
                PsdOperator::new(m.clone(), cfg)?;
                let t = real_trace(&m);
                if (t - 1.0).abs() > DENSITY_TRACE_TOLERANCE {
                    return Err(Error::Format(format!("density operator has trace {t}")));
                }
            }
            MatrixKind::Projector => {
                Projector::new(m.clone(), cfg)?;
            }
        }
        Ok(m)
    }

    /// Loads as a PSD operator; `general` and `hermitian` files are checked for positivity.
    pub fn to_psd(&self, cfg: &ToleranceConfig) -> Result<PsdOperator> {
        PsdOperator::new(self.to_matrix(cfg)?, cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_json(path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_json(self, path)
    }
}

/// How a channel file encodes its map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelRepresentation {
    SuperopMatrix { matrix: MatrixData },
    Kraus { operators: Vec<MatrixData> },
    Choi { matrix: MatrixData },
    Family { recipe: MapRecipe },
}

impl ChannelRepresentation {
    pub fn kraus(ops: &[ComplexMatrix]) -> Self {
        ChannelRepresentation::Kraus {
            operators: ops.iter().map(MatrixData::from_matrix).collect(),
        }
    }

    pub fn family(recipe: MapRecipe) -> Self {
        ChannelRepresentation::Family { recipe }
    }

    pub fn describe(&self) -> String {
        match self {
            ChannelRepresentation::SuperopMatrix { .. } => "superop_matrix".into(),
            ChannelRepresentation::Kraus { operators } => format!("kraus[{}]", operators.len()),
            ChannelRepresentation::Choi { .. } => "choi".into(),
            ChannelRepresentation::Family { recipe } => recipe.name(),
        }
    }

    /// Reconstructs the map. Matrix and Choi forms carry no positivity
    /// certificate; Kraus forms and CP families are completely positive.
    pub fn build(&self, dim_in: usize, dim_out: usize, cfg: &ToleranceConfig) -> Result<SuperOperator> {
        use crate::channels::PositivityCertificate;
        let op = match self {
            ChannelRepresentation::SuperopMatrix { matrix } => {
                SuperOperator::from_matrix(dim_in, dim_out, matrix.to_matrix()?, PositivityCertificate::Unverified)?
            }
            ChannelRepresentation::Kraus { operators } => SuperOperator::from_kraus(
                operators.iter().map(MatrixData::to_matrix).collect::<Result<_>>()?,
            )?,
            ChannelRepresentation::Choi { matrix } => SuperOperator::from_choi(&matrix.to_matrix()?, dim_in, dim_out)?,
            ChannelRepresentation::Family { recipe } => recipe.build(cfg)?,
        };
        if op.dim_in() != dim_in || op.dim_out() != dim_out {
            return Err(Error::Format(format!(
                "channel declares {dim_in}->{dim_out} but encodes {}->{}",
                op.dim_in(),
                op.dim_out()
            )));
        }
        Ok(op)
    }

    /// Builds the map, reading the dimensions from the encoding itself.
    pub fn build_inferred(&self, cfg: &ToleranceConfig) -> Result<SuperOperator> {
        match self {
            ChannelRepresentation::Family { recipe } => recipe.build(cfg),
            ChannelRepresentation::Kraus { operators } => {
                let first = operators.first().ok_or_else(|| Error::Format("empty Kraus list".into()))?;
                self.build(first.cols, first.rows, cfg)
            }
            ChannelRepresentation::SuperopMatrix { matrix } => {
                let (din, dout) = (isqrt(matrix.cols)?, isqrt(matrix.rows)?);
                self.build(din, dout, cfg)
            }
            ChannelRepresentation::Choi { .. } => Err(Error::Format(
                "a Choi representation needs explicit dimensions".into(),
            )),
        }
    }
}

fn isqrt(n: usize) -> Result<usize> {
    let r = (n as f64).sqrt().round() as usize;
    if r * r != n {
        return Err(Error::Format(format!("{n} is not a square number")));
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub schema_version: String,
    pub dim_in: usize,
    pub dim_out: usize,
    pub representation: ChannelRepresentation,
}

impl ChannelFile {
    pub fn new(dim_in: usize, dim_out: usize, representation: ChannelRepresentation) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            dim_in,
            dim_out,
            representation,
        }
    }

    pub fn from_recipe(recipe: MapRecipe, cfg: &ToleranceConfig) -> Result<Self> {
        let op = recipe.build(cfg)?;
        Ok(Self::new(op.dim_in(), op.dim_out(), ChannelRepresentation::family(recipe)))
    }

    pub fn superop(op: &SuperOperator) -> Self {
        Self::new(
            op.dim_in(),
            op.dim_out(),
            ChannelRepresentation::SuperopMatrix {
                matrix: MatrixData::from_matrix(op.matrix()),
            },
        )
    }

    pub fn to_superoperator(&self, cfg: &ToleranceConfig) -> Result<SuperOperator> {
        MatrixFile::check_version(&self.schema_version)?;
        self.representation.build(self.dim_in, self.dim_out, cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_json(path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_json(self, path)
    }
}

/// Suites runnable from a [`RunConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    Counterexample,
    Dpi,
    Contraction,
    Step2,
    Auxiliary,
    AlphaLimit,
    Violation,
}

impl SuiteName {
    pub const ALL: [SuiteName; 7] = [
        SuiteName::Counterexample,
        SuiteName::Dpi,
        SuiteName::Contraction,
        SuiteName::Step2,
        SuiteName::Auxiliary,
        SuiteName::AlphaLimit,
        SuiteName::Violation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Counterexample => "counterexample",
            SuiteName::Dpi => "dpi",
            SuiteName::Contraction => "contraction",
            SuiteName::Step2 => "step2",
            SuiteName::Auxiliary => "auxiliary",
            SuiteName::AlphaLimit => "alpha-limit",
            SuiteName::Violation => "violation",
        }
    }
}

impl std::str::FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Format(format!("unknown suite {s:?}")))
    }
}

impl std::fmt::Display for SuiteName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fully resolved run configuration, echoed into every report.
///
/// On load, absent fields take the defaults of [`RunConfig::defaults`] for the
/// named suite; unknown fields are rejected. Fields a suite does not use are
/// still recorded so a report replays with the identical config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartialRunConfig")]
pub struct RunConfig {
    pub schema_version: String,
    pub suite: SuiteName,
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    #[serde(with = "float::vec")]
    pub alpha_grid: Vec<f64>,
    /// Order parameter of the violation search.
    #[serde(with = "float")]
    pub alpha: f64,
    #[serde(with = "float::vec")]
    pub epsilon_grid: Vec<f64>,
    pub mode: DpiMode,
    pub families: Vec<MapFamily>,
    /// Independent (map, sigma) instances in the contraction suite.
    pub instances: usize,
    pub n_sequence: Vec<usize>,
    pub hill_climb_steps: usize,
    /// Exit successfully when the violation search finds nothing.
    pub allow_inconclusive: bool,
    pub tolerance: ToleranceConfig,
    /// Report path; `None` leaves the choice to the caller.
    pub output: Option<String>,
}

pub use crate::harness::dpi::{DpiMode, MapFamily};

pub const DEFAULT_SEED: u64 = 20_170_503;

impl RunConfig {
    pub fn defaults(suite: SuiteName) -> Self {
        let mut cfg = RunConfig {
            schema_version: SCHEMA_VERSION.into(),
            suite,
            seed: DEFAULT_SEED,
            trials: 0,
            dims: vec![2, 3, 4],
            alpha_grid: vec![1.1, 1.25, 1.5, 2.0, 3.0, 5.0],
            alpha: 0.3,
            epsilon_grid: vec![1e-1, 1e-2, 1e-3, 1e-4],
            mode: DpiMode::RelativeEntropy,
            families: DpiMode::RelativeEntropy.default_families(),
            instances: 0,
            n_sequence: Vec::new(),
            hill_climb_steps: 0,
            allow_inconclusive: false,
            tolerance: ToleranceConfig::default(),
            output: None,
        };
        match suite {
            SuiteName::Counterexample => {}
            SuiteName::Dpi => cfg.trials = 1000,
            SuiteName::Contraction => {
                cfg.instances = 20;
                cfg.trials = 200;
                cfg.alpha_grid = vec![1.5, 2.0, 3.0];
            }
            SuiteName::Step2 => {
                cfg.dims = vec![32];
                cfg.n_sequence = vec![4, 8, 16, 24, 32];
            }
            SuiteName::Auxiliary => {
                cfg.trials = 500;
                cfg.dims = vec![2, 3, 4, 5];
            }
            SuiteName::AlphaLimit => {
                cfg.trials = 50;
                cfg.dims = vec![2, 3, 4, 5, 6];
            }
            SuiteName::Violation => {
                cfg.trials = 100_000;
                cfg.dims = vec![2];
                cfg.hill_climb_steps = 2000;
            }
        }
        cfg
    }

    /// Sets `mode` and the matching default families.
    pub fn with_mode(mut self, mode: DpiMode) -> Self {
        self.mode = mode;
        self.families = mode.default_families();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported schema_version {:?} (expected {SCHEMA_VERSION:?})",
                self.schema_version
            )));
        }
        self.tolerance.validate()?;
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::domain("dims must be a nonempty list of positive dimensions"));
        }
        if self.alpha_grid.iter().any(|a| !(a.is_finite() && *a > 0.0) || *a == 1.0) {
            return Err(Error::domain("alpha grid entries must lie in (0, 1) or (1, inf)"));
        }
        if self.epsilon_grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::domain("epsilon grid entries must be positive"));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_json(path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_json(self, path)
    }
}

/// On-disk form of [`RunConfig`] with every field but `suite` optional.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialRunConfig {
    schema_version: Option<String>,
    suite: SuiteName,
    seed: Option<u64>,
    trials: Option<usize>,
    dims: Option<Vec<usize>>,
    alpha_grid: Option<Vec<f64>>,
    alpha: Option<f64>,
    epsilon_grid: Option<Vec<f64>>,
    mode: Option<DpiMode>,
    families: Option<Vec<MapFamily>>,
    instances: Option<usize>,
    n_sequence: Option<Vec<usize>>,
    hill_climb_steps: Option<usize>,
    allow_inconclusive: Option<bool>,
    tolerance: Option<ToleranceConfig>,
    output: Option<String>,
}

impl TryFrom<PartialRunConfig> for RunConfig {
    type Error = String;

    fn try_from(p: PartialRunConfig) -> std::result::Result<Self, String> {
        let mut cfg = RunConfig::defaults(p.suite);
        if let Some(mode) = p.mode {
            cfg = cfg.with_mode(mode);
        }
        macro_rules! take {
            ($($field:ident),*) => { $(if let Some(v) = p.$field { cfg.$field = v; })* };
        }
        take!(
            schema_version, seed, trials, dims, alpha_grid, alpha, epsilon_grid, families, instances,
            n_sequence, hill_climb_steps, allow_inconclusive, tolerance
        );
        cfg.output = p.output;
        Ok(cfg)
    }
}
