//! Scenario files: one fully specified instance as JSON.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "rho": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
//!   "observables": { "A": [[0, 1], [1, 0]], "B": [[[0, 0], [0, -1]], [[0, 1], [0, 0]]] },
//!   "instrument": [[K_00, K_01], [K_10]],
//!   "labels": [1, -1],
//!   "secondary_povm": [E_0, E_1],
//!   "transfer_map": "transpose",
//!   "mode": "error-disturbance",
//!   "tolerances": { "num": 1e-8 }
//! }
//! ```
//!
//! Matrices are row-major nested arrays whose entries are either `[re, im]`
//! pairs or plain reals. `transfer_map` is `"transpose"` or a real matrix on
//! Hermitian-basis coordinates; it acts after the instrument.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{c, CMatrix, RMatrix};
use crate::processes::{Channel, Instrument, Povm, TransferMap};
use crate::systems::{DensityOp, HermitianOp};
use crate::tolerance::Tolerances;
use crate::uncertainty::{
    check_relation_errors, ozawa_chain_check, relation_error_disturbance_after, robertson_reduction, OzawaChain,
    RelationReport, RobertsonReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

impl Entry {
    fn value(self) -> crate::linalg::C64 {
        match self {
            Entry::Complex([re, im]) => c(re, im),
            Entry::Real(re) => c(re, 0.0),
        }
    }
}

/// Row-major matrix literal.
pub type MatrixLiteral = Vec<Vec<Entry>>;

pub fn matrix_literal(m: &CMatrix) -> MatrixLiteral {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Entry::Complex([m[(i, j)].re, m[(i, j)].im])).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioMode {
    ErrorsJoint,
    #[default]
    ErrorDisturbance,
    OzawaChain,
    Robertson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observables {
    #[serde(rename = "A")]
    pub a: MatrixLiteral,
    #[serde(rename = "B")]
    pub b: MatrixLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransferSpec {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dim: usize,
    pub rho: MatrixLiteral,
    pub observables: Observables,
    #[serde(default)]
    pub instrument: Option<Vec<Vec<MatrixLiteral>>>,
    #[serde(default)]
    pub labels: Option<Vec<f64>>,
    #[serde(default)]
    pub secondary_povm: Option<Vec<MatrixLiteral>>,
    #[serde(default)]
    pub transfer_map: Option<TransferSpec>,
    #[serde(default)]
    pub mode: ScenarioMode,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A rejected scenario: where, and why.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for Diagnostic {}

fn diag(path: impl Into<String>, message: impl fmt::Display) -> Diagnostic {
    Diagnostic { path: path.into(), message: message.to_string() }
}

/// Validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub mode: ScenarioMode,
    pub tolerances: Tolerances,
    pub rho: DensityOp,
    pub a: HermitianOp,
    pub b: HermitianOp,
    pub instrument: Option<Instrument>,
    pub secondary: Option<Povm>,
    pub transfer: Option<TransferMap>,
}

pub fn parse_str(text: &str) -> Result<ScenarioFile, Diagnostic> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        diag(
            if path.is_empty() || path == "." { "$".to_string() } else { path },
            format!("{inner} (line {}, column {})", inner.line(), inner.column()),
        )
    })
}

pub fn load(path: &Path) -> Result<Scenario, Diagnostic> {
    let text = std::fs::read_to_string(path).map_err(|e| diag(path.display().to_string(), e))?;
    parse_str(&text)?.validate()
}

fn to_matrix(lit: &MatrixLiteral, rows: usize, cols: usize, path: &str) -> Result<CMatrix, Diagnostic> {
    if lit.len() != rows {
        return Err(diag(path, format!("expected {rows} rows, found {}", lit.len())));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (i, row) in lit.iter().enumerate() {
        if row.len() != cols {
            return Err(diag(format!("{path}[{i}]"), format!("expected {cols} entries, found {}", row.len())));
        }
        for (j, e) in row.iter().enumerate() {
            let v = e.value();
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(diag(format!("{path}[{i}][{j}]"), "entry is not finite"));
            }
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

fn squarish_dim(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

fn effect_diagnostic(path: &str, count: usize, e: Error) -> Diagnostic {
    match e {
        Error::EffectNotPositive { index, .. } => diag(format!("{path}[{index}]"), e),
        Error::IncompletePovm { .. } => {
            diag(path, format!("{e}; effects [0..={}] must sum to the identity", count.saturating_sub(1)))
        }
        other => diag(path, other),
    }
}

impl ScenarioFile {
    pub fn validate(&self) -> Result<Scenario, Diagnostic> {
        let tol = self.tolerances;
        let d = self.dim;
        if d == 0 {
            return Err(diag("dim", "dimension must be at least 1"));
        }
        let rho = DensityOp::with_tolerances(to_matrix(&self.rho, d, d, "rho")?, &tol).map_err(|e| diag("rho", e))?;
        let a = HermitianOp::with_tolerance(to_matrix(&self.observables.a, d, d, "observables.A")?, tol.herm)
            .map_err(|e| diag("observables.A", e))?;
        let b = HermitianOp::with_tolerance(to_matrix(&self.observables.b, d, d, "observables.B")?, tol.herm)
            .map_err(|e| diag("observables.B", e))?;

        let instrument = match &self.instrument {
            None => None,
            Some(branches) => {
                if branches.is_empty() {
                    return Err(diag("instrument", "needs at least one branch"));
                }
                let d_out = branches
                    .iter()
                    .flatten()
                    .next()
                    .map(|k| k.len())
                    .ok_or_else(|| diag("instrument[0]", "branch has no Kraus operators"))?;
                let mut parsed = Vec::with_capacity(branches.len());
                for (i, branch) in branches.iter().enumerate() {
                    if branch.is_empty() {
                        return Err(diag(format!("instrument[{i}]"), "branch has no Kraus operators"));
                    }
                    let ks = branch
                        .iter()
                        .enumerate()
                        .map(|(a, k)| to_matrix(k, d_out, d, &format!("instrument[{i}][{a}]")))
                        .collect::<Result<Vec<_>, _>>()?;
                    parsed.push(ks);
                }
                let mut ins = Instrument::with_tolerances(parsed, &tol).map_err(|e| diag("instrument", e))?;
                if let Some(labels) = &self.labels {
                    ins = ins.with_labels(labels.clone()).map_err(|e| diag("labels", e))?;
                }
                Some(ins)
            }
        };
        if self.labels.is_some() && instrument.is_none() {
            return Err(diag("labels", "labels given without an instrument"));
        }
        let d_after_instrument = instrument.as_ref().map_or(d, Instrument::dim_out);

        let transfer = match &self.transfer_map {
            None => None,
            Some(TransferSpec::Named(name)) if name == "transpose" => Some(TransferMap::transpose(d_after_instrument)),
            Some(TransferSpec::Named(name)) => {
                return Err(diag("transfer_map", format!("unknown map {name:?}; expected \"transpose\" or a matrix")))
            }
            Some(TransferSpec::Matrix(rows)) => {
                let n_out = rows.len();
                let n_in = d_after_instrument * d_after_instrument;
                let d_out = squarish_dim(n_out)
                    .ok_or_else(|| diag("transfer_map", format!("{n_out} rows is not a squared dimension")))?;
                let mut m = RMatrix::zeros(n_out, n_in);
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != n_in {
                        return Err(diag(format!("transfer_map[{i}]"), format!("expected {n_in} entries, found {}", row.len())));
                    }
                    for (j, v) in row.iter().enumerate() {
                        m[(i, j)] = *v;
                    }
                }
                Some(
                    TransferMap::with_tolerances(d_after_instrument, d_out, m, &tol).map_err(|e| diag("transfer_map", e))?,
                )
            }
        };
        let d_final = transfer.as_ref().map_or(d_after_instrument, TransferMap::dim_out);

        let secondary = match &self.secondary_povm {
            None => None,
            Some(effects) => {
                let ops = effects
                    .iter()
                    .enumerate()
                    .map(|(i, e)| {
                        let path = format!("secondary_povm[{i}]");
                        HermitianOp::with_tolerance(to_matrix(e, d_final, d_final, &path)?, tol.herm).map_err(|err| diag(path, err))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Some(Povm::with_tolerances(ops, &tol).map_err(|e| effect_diagnostic("secondary_povm", effects.len(), e))?)
            }
        };

        match self.mode {
            ScenarioMode::ErrorsJoint if secondary.is_none() => {
                return Err(diag("secondary_povm", "required in errors-joint mode"));
            }
            ScenarioMode::ErrorsJoint | ScenarioMode::ErrorDisturbance | ScenarioMode::OzawaChain if instrument.is_none() => {
                return Err(diag("instrument", "required in this mode"));
            }
            ScenarioMode::OzawaChain if self.labels.is_none() => {
                return Err(diag("labels", "required in ozawa-chain mode"));
            }
            ScenarioMode::OzawaChain if transfer.is_some() => {
                return Err(diag("transfer_map", "ozawa-chain needs the Kraus form; drop the transfer map"));
            }
            _ => {}
        }
        if let (Some(t), Some(ins)) = (&transfer, &instrument) {
            // Positivity is checked per input: every branch output must stay positive.
            let theta: Channel = crate::processes::induced_channel(ins).into();
            let out = theta.apply(&rho, &tol).map_err(|e| diag("instrument", e))?;
            t.apply(&out, &tol).map_err(|e| diag("transfer_map", e))?;
        }

        Ok(Scenario { mode: self.mode, tolerances: tol, rho, a, b, instrument, secondary, transfer })
    }
}

/// Result of evaluating a scenario.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioReport {
    Relation(RelationReport),
    Chain(OzawaChain),
    Robertson(RobertsonReport),
}

impl ScenarioReport {
    pub fn satisfied(&self, tol: &Tolerances) -> bool {
        match self {
            ScenarioReport::Relation(r) => r.satisfied(),
            ScenarioReport::Chain(c) => c.holds(tol),
            ScenarioReport::Robertson(r) => r.satisfied,
        }
    }
}

impl Scenario {
    pub fn evaluate(&self) -> crate::error::Result<ScenarioReport> {
        let tol = &self.tolerances;
        let missing = |what: &str| Error::InvalidInput(format!("scenario has no {what}"));
        Ok(match self.mode {
            ScenarioMode::Robertson => ScenarioReport::Robertson(robertson_reduction(&self.a, &self.b, &self.rho, tol)?),
            ScenarioMode::OzawaChain => {
                let ins = self.instrument.as_ref().ok_or_else(|| missing("instrument"))?;
                ScenarioReport::Chain(ozawa_chain_check(&self.a, &self.b, ins, &self.rho, tol)?)
            }
            ScenarioMode::ErrorDisturbance => {
                let ins = self.instrument.as_ref().ok_or_else(|| missing("instrument"))?;
                let after = self.transfer.clone().map(Channel::from);
                ScenarioReport::Relation(relation_error_disturbance_after(&self.a, &self.b, ins, after.as_ref(), &self.rho, tol)?)
            }
            ScenarioMode::ErrorsJoint => {
                let ins = self.instrument.as_ref().ok_or_else(|| missing("instrument"))?;
                let l = self.secondary.as_ref().ok_or_else(|| missing("secondary_povm"))?;
                let l = match &self.transfer {
                    Some(t) => crate::processes::compose_measurement_after_channel(l, &t.clone().into())?,
                    None => l.clone(),
                };
                ScenarioReport::Relation(check_relation_errors(&self.a, &self.b, ins, &l, &self.rho, tol)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LUDERS_XY: &str = r#"{
        "dim": 2,
        "rho": [[1, 0], [0, 0]],
        "observables": {
            "A": [[0, 1], [1, 0]],
            "B": [[[0, 0], [0, -1]], [[0, 1], [0, 0]]]
        },
        "instrument": [
            [[[0.5, 0.5], [0.5, 0.5]]],
            [[[0.5, -0.5], [-0.5, 0.5]]]
        ],
        "labels": [1, -1],
        "mode": "error-disturbance"
    }"#;

    #[test]
    fn luders_scenario_round_trip() {
        let sc = parse_str(LUDERS_XY).unwrap().validate().unwrap();
        let report = sc.evaluate().unwrap();
        let ScenarioReport::Relation(r) = &report else { panic!("relation expected") };
        assert!(r.eps_a < 1e-9 && (r.eps_or_eta_b - 1.0).abs() < 1e-9 && r.bounds.simple < 1e-12);
        let json = serde_json::to_value(&report).unwrap();
        for key in ["eps_a", "eps_or_eta_b", "lhs", "bounds", "slack", "satisfied_full", "satisfied_simple", "mode"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert!(json["bounds"]["I"].as_f64().unwrap().abs() < 1e-12);
    }

    #[test]
    fn incomplete_povm_names_effects() {
        let text = LUDERS_XY.replace(
            r#""mode": "error-disturbance""#,
            r#""mode": "errors-joint", "secondary_povm": [[[1, 0], [0, 0]], [[0.5, 0], [0, 0.5]]]"#,
        );
        let err = parse_str(&text).unwrap().validate().unwrap_err();
        assert_eq!(err.path, "secondary_povm");
        assert!(err.message.contains("[0..=1]"), "{err}");

        let text = LUDERS_XY.replace(
            r#""mode": "error-disturbance""#,
            r#""mode": "errors-joint", "secondary_povm": [[[1, 0], [0, 0]], [[0, 0], [0, 1.5]], [[0, 0], [0, -0.5]]]"#,
        );
        let err = parse_str(&text).unwrap().validate().unwrap_err();
        assert_eq!(err.path, "secondary_povm[2]");
    }

    #[test]
    fn parse_errors_carry_paths() {
        let err = parse_str(&LUDERS_XY.replace(r#""dim": 2"#, r#""dim": "two""#)).unwrap_err();
        assert_eq!(err.path, "dim");
        assert!(err.message.contains("line"));
        let err = parse_str(&LUDERS_XY.replace(r#""labels""#, r#""lables""#)).unwrap_err();
        assert!(err.message.contains("lables"));
        let err = parse_str(&LUDERS_XY.replace("[[1, 0], [0, 0]]", "[[1, 0], [0]]")).unwrap().validate().unwrap_err();
        assert_eq!(err.path, "rho[1]");
    }

    #[test]
    fn transpose_map_scenario() {
        let text = LUDERS_XY.replace(r#""mode""#, r#""transfer_map": "transpose", "mode""#);
        let sc = parse_str(&text).unwrap().validate().unwrap();
        assert!(sc.transfer.is_some());
        let ScenarioReport::Relation(r) = sc.evaluate().unwrap() else { panic!() };
        // Transposition is lossless, so the disturbance is that of the Lüders channel alone.
        assert!((r.eps_or_eta_b - 1.0).abs() < 1e-9 && r.satisfied());

        let bad = LUDERS_XY.replace(r#""mode""#, r#""transfer_map": "partial", "mode""#);
        assert_eq!(parse_str(&bad).unwrap().validate().unwrap_err().path, "transfer_map");
    }

    #[test]
    fn non_positive_transfer_matrix_is_rejected_on_input() {
        // Coordinates (I, σx, σy, σz)/√2: triple σx, drop σy and σz.
        let rows = "[[1,0,0,0],[0,3,0,0],[0,0,0,0],[0,0,0,0]]";
        let text = LUDERS_XY.replace(r#""mode""#, &format!(r#""transfer_map": {rows}, "mode""#));
        // At |0⟩ the Lüders output is I/2, which the map keeps positive.
        assert!(parse_str(&text).unwrap().validate().is_ok());
        let plus = text.replace(r#""rho": [[1, 0], [0, 0]]"#, r#""rho": [[0.5, 0.5], [0.5, 0.5]]"#);
        let err = parse_str(&plus).unwrap().validate().unwrap_err();
        assert_eq!(err.path, "transfer_map");
        assert!(err.message.contains("positive"), "{err}");
    }
}
