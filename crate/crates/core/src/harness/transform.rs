use crate::error::{Error, Result};
use crate::expr::{eval_batch, parse_with_names, render_with_names, Expr};
use crate::harness::IOTable;

/// A derived input column, e.g. `r = sqrt((dx*dx) + (dy*dy)) + 0.01`.
#[derive(Clone, Debug, PartialEq)]
pub struct VariableTransform {
    pub name: String,
    pub formula: Expr,
}

impl VariableTransform {
    pub fn new(name: impl Into<String>, formula: Expr) -> Self {
        VariableTransform {
            name: name.into(),
            formula,
        }
    }

    /// Parses `name=expression` against the given column names.
    pub fn parse<S: AsRef<str>>(spec: &str, columns: &[S]) -> Result<Self> {
        let (name, formula) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("transform `{spec}` is not of the form name=expression")))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::Config(format!("transform `{spec}` has an empty name")));
        }
        let formula = parse_with_names(formula, columns)
            .map_err(|e| Error::Config(format!("transform `{name}`: {e}")))?;
        Ok(VariableTransform::new(name, formula))
    }

    pub fn render<S: AsRef<str>>(&self, columns: &[S]) -> String {
        format!("{}={}", self.name, render_with_names(&self.formula, columns))
    }
}

/// Parses transform specs in order, so later ones may use earlier results.
pub fn parse_transforms<S: AsRef<str>>(specs: &[S], columns: &[String]) -> Result<Vec<VariableTransform>> {
    let mut names = columns.to_vec();
    let mut out = Vec::with_capacity(specs.len());
    for s in specs {
        let t = VariableTransform::parse(s.as_ref(), &names)?;
        names.push(t.name.clone());
        out.push(t);
    }
    Ok(out)
}

/// Appends one input column per transform, in order, then drops the
/// columns listed in `drop`. With `strict`, a transform that evaluates to a
/// non-finite value on any row is an error listing the offending rows.
pub fn apply_transforms(
    table: &IOTable,
    transforms: &[VariableTransform],
    drop: &[String],
    strict: bool,
) -> Result<IOTable> {
    let mut names = table.input_names().to_vec();
    let mut x = table.inputs().clone();
    for t in transforms {
        if names.contains(&t.name) {
            return Err(Error::Config(format!("column `{}` already exists", t.name)));
        }
        if let Some(i) = t.formula.max_var() {
            if i >= names.len() {
                return Err(Error::Config(format!(
                    "transform `{}` references missing column x{i}",
                    t.name
                )));
            }
        }
        let values = eval_batch(&t.formula, &x)?;
        if strict {
            let bad: Vec<usize> = values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_finite())
                .map(|(i, _)| i)
                .collect();
            if !bad.is_empty() {
                let shown: Vec<String> = bad.iter().take(20).map(|i| i.to_string()).collect();
                let more = if bad.len() > 20 { ", ..." } else { "" };
                return Err(Error::Data(format!(
                    "transform `{}` is not finite on {} rows: {}{more}",
                    t.name,
                    bad.len(),
                    shown.join(", ")
                )));
            }
        }
        x.push_column(&values)?;
        names.push(t.name.clone());
    }

    if drop.is_empty() {
        return table.with_inputs(names, x);
    }
    for d in drop {
        if !names.contains(d) {
            return Err(Error::Config(format!("cannot drop missing column `{d}`")));
        }
    }
    let keep: Vec<usize> = (0..names.len()).filter(|&j| !drop.contains(&names[j])).collect();
    if keep.is_empty() {
        return Err(Error::Config("dropping every input column".into()));
    }
    let kept_names = keep.iter().map(|&j| names[j].clone()).collect();
    table.with_inputs(kept_names, x.select_columns(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn table() -> IOTable {
        IOTable::new(
            vec!["dx".into(), "dy".into()],
            vec!["f".into()],
            Matrix::from_rows(&[[3.0, 4.0], [-1.0, 0.0]]).unwrap(),
            Matrix::from_rows(&[[1.0], [2.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn softened_distance_column() {
        let t = table();
        let tr = parse_transforms(&["r=sqrt((dx*dx)+(dy*dy))+0.01"], t.input_names()).unwrap();
        let out = apply_transforms(&t, &tr, &[], true).unwrap();
        assert_eq!(out.input_names(), &["dx", "dy", "r"]);
        assert!((out.inputs().get(0, 2) - 5.01).abs() < 1e-12);
        // input untouched
        assert_eq!(t.n_inputs(), 2);
    }

    #[test]
    fn empty_list_is_identity() {
        let t = table();
        assert_eq!(apply_transforms(&t, &[], &[], true).unwrap(), t);
    }

    #[test]
    fn strict_mode_lists_bad_rows() {
        let t = table();
        let tr = parse_transforms(&["l=log(dx)"], t.input_names()).unwrap();
        let err = apply_transforms(&t, &tr, &[], true).unwrap_err().to_string();
        assert!(err.contains("1 rows: 1"), "{err}");
        let lax = apply_transforms(&t, &tr, &[], false).unwrap();
        assert!(lax.inputs().get(1, 2).is_nan());
    }

    #[test]
    fn chained_transforms_and_drop() {
        let t = table();
        let tr = parse_transforms(&["r2=(dx*dx)+(dy*dy)", "r=sqrt(r2)"], t.input_names()).unwrap();
        let out = apply_transforms(&t, &tr, &["r2".to_string(), "dy".to_string()], true).unwrap();
        assert_eq!(out.input_names(), &["dx", "r"]);
        assert_eq!(out.inputs().row(0), &[3.0, 5.0]);
    }

    #[test]
    fn missing_column_is_an_error() {
        let t = table();
        assert!(parse_transforms(&["r=dz*2"], t.input_names()).is_err());
        let bad = VariableTransform::new("r", Expr::var(5));
        assert!(apply_transforms(&t, &[bad], &[], true).is_err());
        let dup = VariableTransform::new("dx", Expr::var(0));
        assert!(apply_transforms(&t, &[dup], &[], true).is_err());
    }
}
