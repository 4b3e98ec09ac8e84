//! One- and two-dimensional parameter scans of the feasibility analysis.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{Grid, Scale};
use crate::params::{derive, SystemConfig, PARAM_NAMES};
use crate::resolution::{feasibility_report, ResolutionOptions};
use crate::table::{Table, Value};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("unknown output column '{0}'")]
    UnknownOutput(String),
}

impl SweepError {
    pub fn kind(&self) -> &'static str {
        match self {
            SweepError::InvalidAxis(_) => "InvalidAxis",
            SweepError::UnknownOutput(_) => "UnknownOutput",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    /// Parameter name as accepted by [`SystemConfig::set_param`], SI units.
    pub name: String,
    pub grid: Grid,
}

impl Axis {
    pub fn new(name: &str, scale: Scale, min: f64, max: f64, n: usize) -> Result<Self, SweepError> {
        if !PARAM_NAMES.contains(&name) {
            return Err(SweepError::InvalidAxis(format!(
                "unknown parameter '{name}' (expected one of {})",
                PARAM_NAMES.join(", ")
            )));
        }
        if n < 2 {
            return Err(SweepError::InvalidAxis(format!("{name}: need at least 2 points")));
        }
        let grid = Grid::new(scale, min, max, n).map_err(|e| SweepError::InvalidAxis(format!("{name}: {e}")))?;
        if !(min < max) {
            return Err(SweepError::InvalidAxis(format!("{name}: min must be below max")));
        }
        Ok(Axis { name: name.to_string(), grid })
    }

    /// Parses `NAME:SCALE:MIN:MAX:N`.
    pub fn parse(text: &str) -> Result<Self, SweepError> {
        let parts: Vec<&str> = text.split(':').collect();
        let [name, scale, min, max, n] = parts.as_slice() else {
            return Err(SweepError::InvalidAxis(format!("'{text}' is not NAME:SCALE:MIN:MAX:N")));
        };
        let bad = |what: &str| SweepError::InvalidAxis(format!("'{text}': bad {what}"));
        let scale: Scale = scale.parse().map_err(|_| bad("scale"))?;
        let min: f64 = min.parse().map_err(|_| bad("min"))?;
        let max: f64 = max.parse().map_err(|_| bad("max"))?;
        let n: usize = n.parse().map_err(|_| bad("point count"))?;
        Axis::new(name, scale, min, max, n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub base: SystemConfig,
    /// Report columns to keep; `None` keeps all of them.
    pub outputs: Option<Vec<String>>,
    pub options: ResolutionOptions,
}

/// Columns filled with the error name when a grid point fails.
pub const VERDICT_COLUMNS: &[&str] = &[
    "sql_ok", "finesse_ok", "condition_i", "condition_ii", "condition_iii", "thermal_constraint_ok", "regime_ok",
    "feasible",
];

fn report_columns() -> Vec<&'static str> {
    let mut cols = vec!["omega_eff", "lambda", "c_bar"];
    let d = derive(&SystemConfig::reference_default()).expect("default configuration is stable");
    cols.extend(feasibility_report(&d, &ResolutionOptions::default()).fields().into_iter().map(|(k, _)| k));
    cols.retain(|c| *c != "optimum_error");
    cols
}

fn evaluate(config: &SystemConfig, options: &ResolutionOptions) -> Result<Vec<(&'static str, Value)>, &'static str> {
    config.validate().map_err(|e| e.kind())?;
    let d = derive(config).map_err(|e| e.kind())?;
    let rep = feasibility_report(&d, options);
    let mut out = vec![("omega_eff", d.omega_eff.into()), ("lambda", d.lambda.into()), ("c_bar", d.c_bar.into())];
    out.extend(rep.fields().into_iter().filter(|(k, _)| *k != "optimum_error"));
    Ok(out)
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Table, SweepError> {
    if spec.axes.is_empty() || spec.axes.len() > 2 {
        return Err(SweepError::InvalidAxis("a sweep takes one or two axes".into()));
    }
    let all = report_columns();
    let columns: Vec<&'static str> = match &spec.outputs {
        None => all.clone(),
        Some(sel) => sel
            .iter()
            .map(|s| all.iter().find(|c| **c == s.as_str()).copied().ok_or_else(|| SweepError::UnknownOutput(s.clone())))
            .collect::<Result<_, _>>()?,
    };

    let sizes: Vec<usize> = spec.axes.iter().map(|a| a.grid.n).collect();
    let total: usize = sizes.iter().product();
    // Row-major: the first axis varies slowest.
    let coords = |index: usize| -> Vec<usize> {
        let mut rest = index;
        let mut c = vec![0; sizes.len()];
        for k in (0..sizes.len()).rev() {
            c[k] = rest % sizes[k];
            rest /= sizes[k];
        }
        c
    };

    let rows: Vec<Vec<Value>> = (0..total)
        .into_par_iter()
        .map(|index| {
            let c = coords(index);
            let mut config = spec.base.clone();
            let mut row: Vec<Value> = vec![Value::Int(index as i64)];
            for (axis, &k) in spec.axes.iter().zip(&c) {
                let v = axis.grid.point(k);
                config.set_param(&axis.name, v).expect("axis names are validated");
                row.push(v.into());
            }
            match evaluate(&config, &spec.options) {
                Ok(fields) => {
                    row.push("ok".into());
                    for col in &columns {
                        row.push(fields.iter().find(|(k, _)| k == col).map_or(Value::Missing, |(_, v)| v.clone()));
                    }
                }
                Err(kind) => {
                    row.push(kind.into());
                    for col in &columns {
                        row.push(if VERDICT_COLUMNS.contains(col) { kind.into() } else { Value::Missing });
                    }
                }
            }
            row
        })
        .collect();

    let mut header: Vec<String> = vec!["index".into()];
    header.extend(spec.axes.iter().map(|a| a.name.clone()));
    header.push("status".into());
    header.extend(columns.iter().map(|c| c.to_string()));
    let mut table = Table::new(header);
    for r in rows {
        table.push(r);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(axes: Vec<Axis>) -> SweepSpec {
        SweepSpec { axes, base: SystemConfig::reference_default(), outputs: None, options: ResolutionOptions::default() }
    }

    #[test]
    fn unknown_axis_is_rejected() {
        assert!(matches!(Axis::parse("colour:log:1:2:3"), Err(SweepError::InvalidAxis(_))));
        assert!(matches!(Axis::parse("I_0:log:1e-9"), Err(SweepError::InvalidAxis(_))));
        assert!(matches!(Axis::new("T", Scale::Linear, 1.0, 0.5, 3), Err(SweepError::InvalidAxis(_))));
        assert!(matches!(Axis::new("T", Scale::Linear, 0.0, 0.5, 1), Err(SweepError::InvalidAxis(_))));
    }

    #[test]
    fn row_count_and_order() {
        let t = run_sweep(&spec(vec![
            Axis::parse("T:linear:0.05:0.2:3").unwrap(),
            Axis::parse("finesse:log:1e5:1e6:4").unwrap(),
        ]))
        .unwrap();
        assert_eq!(t.rows.len(), 12);
        let idx: Vec<i64> = t.rows.iter().map(|r| if let Value::Int(i) = r[0] { i } else { -1 }).collect();
        assert_eq!(idx, (0..12).collect::<Vec<_>>());
        assert_eq!(t.get(4, "T"), Some(&Value::Num(0.125)));
    }

    #[test]
    fn selected_outputs_only() {
        let mut s = spec(vec![Axis::parse("T:linear:0.05:0.2:2").unwrap()]);
        s.outputs = Some(vec!["sql_ratio".into(), "feasible".into()]);
        let t = run_sweep(&s).unwrap();
        assert_eq!(t.columns, vec!["index", "T", "status", "sql_ratio", "feasible"]);
        s.outputs = Some(vec!["nope".into()]);
        assert!(matches!(run_sweep(&s), Err(SweepError::UnknownOutput(_))));
    }

    #[test]
    fn finesse_verdict_flips_at_the_analytic_value() {
        let base = SystemConfig::reference_default();
        let x_q = derive(&base).unwrap().geometry.unwrap().x_q;
        let f_star = base.wavelength / (crate::resolution::FINESSE_LIMIT * x_q);
        let mut s = spec(vec![Axis::new("finesse", Scale::Log, f_star / 3.0, f_star * 3.0, 8).unwrap()]);
        s.base.input_power = 0.0;
        let t = run_sweep(&s).unwrap();
        for k in 0..t.rows.len() {
            let f = t.get(k, "finesse").unwrap().as_f64().unwrap();
            let ok = t.get(k, "finesse_ok").unwrap().to_text();
            assert_eq!(ok == "true", f > f_star, "F = {f}");
        }
    }

    #[test]
    fn instability_rows_carry_error_name() {
        let d = derive(&SystemConfig::reference_default()).unwrap();
        let p = d.threshold_power();
        let t = run_sweep(&spec(vec![Axis::new("I_0", Scale::Linear, 0.5 * p, 1.5 * p, 10).unwrap()])).unwrap();
        for (k, row) in t.rows.iter().enumerate() {
            let power = row[1].as_f64().unwrap();
            let status = t.get(k, "status").unwrap().to_text();
            if power < p {
                assert_eq!(status, "ok");
            } else {
                assert_eq!(status, "UnstableSpring");
                assert_eq!(t.get(k, "feasible").unwrap().to_text(), "UnstableSpring");
                assert_eq!(t.get(k, "sql_ratio"), Some(&Value::Missing));
            }
        }
    }
}
