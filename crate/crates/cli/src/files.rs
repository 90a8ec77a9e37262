//! Input file formats: combination JSON and variance-components CSV.

use std::path::Path;

use lwchi2::convolve::{LinearCombination, Term, TermKind};
use lwchi2::inference::VarCompModel;
use lwchi2::lwdist::{LWChiSquared, Theta};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KindSpec {
    LwChi2,
    Chi2,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Values([f64; 3]),
    Named(String),
}

/// One entry of a combination file.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub kind: KindSpec,
    pub nu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaSpec>,
    pub lambda: f64,
}

impl TermSpec {
    pub fn from_term(t: &Term) -> Self {
        match t.kind() {
            TermKind::LwChi2(d) => TermSpec {
                kind: KindSpec::LwChi2,
                nu: d.nu(),
                theta: Some(ThetaSpec::Values(d.theta().as_array())),
                lambda: t.coefficient(),
            },
            TermKind::Chi2(nu) => TermSpec { kind: KindSpec::Chi2, nu: *nu, theta: None, lambda: t.coefficient() },
        }
    }

    fn to_term(&self, index: usize) -> Result<Term, Failure> {
        let at = |msg: String| Failure::usage(format!("term {index}: {msg}"));
        match self.kind {
            KindSpec::Chi2 => {
                if self.theta.is_some() {
                    return Err(at("chi2 terms take no theta".into()));
                }
                Term::chi2(self.nu, self.lambda).map_err(|e| at(e.to_string()))
            }
            KindSpec::LwChi2 => {
                let theta = match &self.theta {
                    None => return Err(at("lw_chi2 terms need a theta".into())),
                    Some(ThetaSpec::Named(s)) if s == "standard" => Theta::standard(self.nu),
                    Some(ThetaSpec::Named(s)) => return Err(at(format!("unknown theta \"{s}\""))),
                    Some(ThetaSpec::Values([a, b, c])) => Theta::new(*a, *b, *c),
                }
                .map_err(|e| at(e.to_string()))?;
                let d = LWChiSquared::new(self.nu, theta).map_err(|e| at(e.to_string()))?;
                Term::lw_chi2(d, self.lambda).map_err(|e| at(e.to_string()))
            }
        }
    }
}

pub fn parse_combo(text: &str) -> Result<LinearCombination, Failure> {
    let specs: Vec<TermSpec> =
        serde_json::from_str(text).map_err(|e| Failure::usage(format!("combination file: {e}")))?;
    if specs.is_empty() {
        return Err(Failure::usage("combination file: empty term list"));
    }
    let terms = specs.iter().enumerate().map(|(i, s)| s.to_term(i)).collect::<Result<Vec<_>, _>>()?;
    LinearCombination::new(terms).map_err(|e| Failure::usage(e.to_string()))
}

pub fn read_combo(path: &Path) -> Result<LinearCombination, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse_combo(&text)
}

pub fn combo_to_json(c: &LinearCombination) -> String {
    let specs: Vec<TermSpec> = c.terms().iter().map(TermSpec::from_term).collect();
    serde_json::to_string_pretty(&specs).expect("term specs serialize")
}

/// Variance-components data with the hypothesised and optionally true components.
#[derive(Debug, Clone)]
pub struct VarCompData {
    pub model: VarCompModel,
    pub theta0: Vec<f64>,
    pub theta_true: Option<Vec<f64>>,
}

pub fn read_varcomp(path: &Path) -> Result<VarCompData, Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| Failure::usage(e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let with_true = match names.as_slice() {
        ["rho", "nu", "U", "theta0"] => false,
        ["rho", "nu", "U", "theta0", "theta_true"] => true,
        _ => {
            return Err(Failure::usage(format!(
                "header must be rho,nu,U,theta0[,theta_true], got {}",
                names.join(",")
            )))
        }
    };
    let (mut rho, mut nu, mut u, mut t0, mut tt) = (vec![], vec![], vec![], vec![], vec![]);
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::usage(e.to_string()))?;
        let row = line + 2;
        let num = |i: usize| -> Result<f64, Failure> {
            rec.get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("row {row}, column {}: not a number", names[i])))
        };
        rho.push(num(0)?);
        let n = num(1)?;
        if !(n >= 1.0 && n.fract() == 0.0 && n <= u32::MAX as f64) {
            return Err(Failure::usage(format!("row {row}: nu must be a positive integer")));
        }
        nu.push(n as u32);
        u.push(num(2)?);
        t0.push(num(3)?);
        if with_true {
            tt.push(num(4)?);
        }
    }
    let model = VarCompModel::new(rho, nu, u).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(VarCompData { model, theta0: t0, theta_true: with_true.then_some(tt) })
}

/// Response and design columns for the regression test.
pub fn read_regression(path: &Path, response: &str) -> Result<(Vec<f64>, Vec<Vec<f64>>), Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| Failure::usage(e.to_string()))?.clone();
    let yi = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| Failure::usage(format!("no column named {response}")))?;
    let mut y = vec![];
    let mut cols: Vec<Vec<f64>> = vec![vec![]; headers.len() - 1];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::usage(e.to_string()))?;
        let mut j = 0;
        for (i, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Failure::usage(format!("row {}, column {}: not a number", line + 2, i + 1)))?;
            if i == yi {
                y.push(v);
            } else {
                cols[j].push(v);
                j += 1;
            }
        }
    }
    Ok((y, cols))
}
