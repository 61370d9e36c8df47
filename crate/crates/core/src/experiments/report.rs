use std::io::Write;

use serde::{Deserialize, Serialize};

use super::constants::ConstantsReport;
use crate::stats::fmt17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `observed <= bound + tolerance`
    AtMost,
    /// `observed >= bound - tolerance`
    AtLeast,
    /// `observed < bound + tolerance` (strict; used for monotone trends)
    LessThan,
    /// `|observed - bound| <= tolerance`
    Within,
    /// Recorded only.
    Info,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

impl Relation {
    pub fn judge(self, observed: f64, bound: f64, tolerance: f64) -> Verdict {
        let ok = match self {
            Relation::Info => return Verdict::Info,
            Relation::AtMost => observed <= bound + tolerance,
            Relation::AtLeast => observed >= bound - tolerance,
            Relation::LessThan => observed < bound + tolerance,
            Relation::Within => (observed - bound).abs() <= tolerance,
        };
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Relation::AtMost => "at_most",
            Relation::AtLeast => "at_least",
            Relation::LessThan => "less_than",
            Relation::Within => "within",
            Relation::Info => "info",
        }
    }
}

impl Verdict {
    fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        }
    }
}

/// JSON has no NaN; non-finite numbers are written as `null` and read back as NaN.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }

    pub mod vec {
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&x.is_finite().then_some(*x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Ok(Vec::<Option<f64>>::deserialize(d)?
                .into_iter()
                .map(|x| x.unwrap_or(f64::NAN))
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub label: String,
    /// Values of the report's grid columns (`NaN` where a column does not apply).
    #[serde(with = "nullable::vec")]
    pub grid: Vec<f64>,
    pub quantity: String,
    #[serde(with = "nullable")]
    pub observed: f64,
    #[serde(with = "nullable")]
    pub bound: f64,
    #[serde(with = "nullable")]
    pub tolerance: f64,
    #[serde(with = "nullable")]
    pub se: f64,
    pub relation: Relation,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub problem: String,
    pub grid_columns: Vec<String>,
    pub cells: Vec<Cell>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Pending cell; finished by one of the relation methods.
pub struct CellBuilder<'a> {
    report: &'a mut ExperimentReport,
    grid: Vec<f64>,
    quantity: String,
    observed: f64,
    se: f64,
    note: String,
}

impl CellBuilder<'_> {
    pub fn observed(mut self, value: f64, se: f64) -> Self {
        self.observed = value;
        self.se = se;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn at_most(self, bound: f64, tolerance: f64) {
        self.finish(Relation::AtMost, bound, tolerance)
    }

    pub fn at_least(self, bound: f64, tolerance: f64) {
        self.finish(Relation::AtLeast, bound, tolerance)
    }

    pub fn less_than(self, bound: f64) {
        self.finish(Relation::LessThan, bound, 0.0)
    }

    pub fn within(self, target: f64, tolerance: f64) {
        self.finish(Relation::Within, target, tolerance)
    }

    pub fn info(self, reference: f64) {
        self.finish(Relation::Info, reference, 0.0)
    }

    fn finish(self, relation: Relation, bound: f64, tolerance: f64) {
        let label = self
            .report
            .grid_columns
            .iter()
            .zip(&self.grid)
            .filter(|(_, v)| !v.is_nan())
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(",");
        self.report.cells.push(Cell {
            label,
            grid: self.grid,
            quantity: self.quantity,
            observed: self.observed,
            bound,
            tolerance,
            se: self.se,
            relation,
            verdict: relation.judge(self.observed, bound, tolerance),
            note: self.note,
        });
    }
}

impl ExperimentReport {
    pub fn new(experiment: &str, problem: &str, grid_columns: &[&str], provenance: Provenance) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            problem: problem.into(),
            grid_columns: grid_columns.iter().map(|s| s.to_string()).collect(),
            cells: Vec::new(),
            provenance,
            constants: None,
            notes: Vec::new(),
        }
    }

    /// Starts a cell at the given grid point. Missing trailing grid values are `NaN`.
    pub fn cell(&mut self, grid: &[f64], quantity: &str) -> CellBuilder<'_> {
        let mut g = grid.to_vec();
        g.resize(self.grid_columns.len(), f64::NAN);
        CellBuilder {
            report: self,
            grid: g,
            quantity: quantity.into(),
            observed: f64::NAN,
            se: 0.0,
            note: String::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.verdict == Verdict::Fail)
    }

    pub fn find(&self, quantity: &str) -> impl Iterator<Item = &Cell> {
        let q = quantity.to_string();
        self.cells.iter().filter(move |c| c.quantity == q)
    }

    /// True when every stored verdict follows from the stored numbers.
    pub fn verdicts_consistent(&self) -> bool {
        self.cells
            .iter()
            .all(|c| c.relation.judge(c.observed, c.bound, c.tolerance) == c.verdict)
    }

    /// Fixed columns: `cell, quantity, <grid...>, observed, bound, tolerance, se, relation, verdict`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["cell".to_string(), "quantity".to_string()];
        header.extend(self.grid_columns.iter().cloned());
        header.extend(["observed", "bound", "tolerance", "se", "relation", "verdict"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for c in &self.cells {
            let mut row = vec![format!("\"{}\"", c.label), c.quantity.clone()];
            row.extend(c.grid.iter().map(|v| fmt17(*v)));
            row.extend([c.observed, c.bound, c.tolerance, c.se].map(fmt17));
            row.push(c.relation.as_str().into());
            row.push(c.verdict.as_str().into());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One human-readable line per cell.
    pub fn summary_lines(&self) -> Vec<String> {
        self.cells
            .iter()
            .map(|c| {
                let rel = match c.relation {
                    Relation::AtMost => "<=",
                    Relation::AtLeast => ">=",
                    Relation::LessThan => "<",
                    Relation::Within => "~",
                    Relation::Info => "ref",
                };
                format!(
                    "[{}] {} {} {}: observed {:.6e} {} {:.6e} (tol {:.3e}, se {:.3e})",
                    c.verdict.as_str().to_uppercase(),
                    self.experiment,
                    c.label,
                    c.quantity,
                    c.observed,
                    rel,
                    c.bound,
                    c.tolerance,
                    c.se
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", "linear1d", &["epsilon", "t"], Provenance::default());
        r.cell(&[0.1, 1.0], "a").observed(1.0, 0.1).at_most(2.0, 0.0);
        r.cell(&[0.2], "b").observed(3.0, 0.0).at_most(2.0, 0.5);
        r.cell(&[], "c").observed(0.5, 0.0).within(0.45, 0.1);
        r.cell(&[], "d").observed(1.0, 0.0).less_than(1.0);
        r.cell(&[], "e").observed(f64::NAN, 0.0).at_least(0.0, 0.0);
        r
    }

    #[test]
    fn verdicts() {
        let r = sample();
        let v: Vec<Verdict> = r.cells.iter().map(|c| c.verdict).collect();
        assert_eq!(v, [Verdict::Pass, Verdict::Fail, Verdict::Pass, Verdict::Fail, Verdict::Fail]);
        assert!(!r.all_pass());
        assert!(r.verdicts_consistent());
        assert_eq!(r.cells[1].label, "epsilon=0.2");
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "cell,quantity,epsilon,t,observed,bound,tolerance,se,relation,verdict"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("\"epsilon=0.1,t=1\",a,1.0000000000000001e-1,1.0000000000000000e0,"), "{first}");
        assert!(first.ends_with(",at_most,pass"));
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap_or_else(|e| panic!("{e}"));
        assert_eq!(back.cells.len(), r.cells.len());
        assert_eq!(back.cells[0], r.cells[0]);
        assert!(back.cells[1].grid[1].is_nan());
        assert!(back.cells[4].observed.is_nan());
    }
}
