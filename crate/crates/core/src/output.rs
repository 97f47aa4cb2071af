//! Plain-text CSV output.
//!
//! Files start with `# key: value` header lines, then one header row and
//! one row per point. Numbers are written with 17 significant digits so
//! reading a file back reproduces every value exactly.

use std::io::{BufRead, Write};

use crate::covariance::CovarianceModel;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::simulator::Realization;

/// Writes `realization`, evaluated on `grid`, with provenance headers.
///
/// Regular grids get `colat,lon[,w],z1,…`; point lists get `x0,…,xd,z1,…`.
/// `extra` headers follow the standard ones.
pub fn write_realization<W: Write + ?Sized>(
    out: &mut W,
    realization: &Realization,
    grid: &GridSpec,
    extra: &[(&str, String)],
) -> Result<()> {
    let meta = &realization.metadata;
    let p = meta.components;
    writeln!(out, "# model: {}", meta.model)?;
    writeln!(out, "# d: {}", meta.dim)?;
    writeln!(out, "# p: {p}")?;
    writeln!(out, "# L: {}", meta.waves)?;
    writeln!(out, "# seed: {}", meta.seed)?;
    writeln!(out, "# grid: {grid}")?;
    writeln!(out, "# degrees: {}", meta.degrees)?;
    for (k, v) in extra {
        writeln!(out, "# {k}: {v}")?;
    }
    let z: Vec<String> = (1..=p).map(|j| format!("z{j}")).collect();
    let points = &realization.points;
    let slice_w = match grid {
        GridSpec::Slice3 { w, .. } => Some(*w),
        _ => None,
    };
    match grid {
        GridSpec::Points(_) => {
            let x: Vec<String> = (0..=points.dim()).map(|i| format!("x{i}")).collect();
            writeln!(out, "{},{}", x.join(","), z.join(","))?;
        }
        _ if slice_w.is_some() => writeln!(out, "colat,lon,w,{}", z.join(","))?,
        _ => writeln!(out, "colat,lon,{}", z.join(","))?,
    }
    let mut line = String::new();
    for i in 0..points.len() {
        line.clear();
        match grid.angles(i) {
            Some((colat, lon)) => {
                push(&mut line, colat);
                push(&mut line, lon);
                if let Some(w) = slice_w {
                    push(&mut line, w);
                }
            }
            None => {
                for &c in points.point(i).coords() {
                    push(&mut line, c);
                }
            }
        }
        for j in 0..p {
            push(&mut line, realization.value(i, j));
        }
        line.pop();
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn push(line: &mut String, v: f64) {
    use std::fmt::Write as _;
    let _ = write!(line, "{v:.16e},");
}

/// Writes `n,b_n` for `n ≤ n_max`.
pub fn write_coefficients<W: Write + ?Sized>(out: &mut W, model: &CovarianceModel, n_max: usize) -> Result<()> {
    writeln!(out, "# model: {}", model.spec().family)?;
    writeln!(out, "# d: {}", model.dim())?;
    writeln!(out, "n,b_n")?;
    for n in 0..=n_max {
        writeln!(out, "{n},{:.16e}", model.schoenberg_coeff(n))?;
    }
    Ok(())
}

/// A parsed CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn read_table<R: BufRead>(input: R) -> Result<Table> {
    let mut header = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let parse_err = |message: String| Error::Parse { line: k + 1, message };
        if let Some(h) = line.strip_prefix('#') {
            let (key, value) = h.split_once(':').ok_or_else(|| parse_err("header without ':'".into()))?;
            header.push((key.trim().to_string(), value.trim().to_string()));
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(|c| c.trim().to_string()).collect()),
            Some(cols) => {
                let row: Vec<f64> = line
                    .split(',')
                    .map(|t| t.trim().parse::<f64>().map_err(|_| parse_err(format!("invalid number {t:?}"))))
                    .collect::<Result<_>>()?;
                if row.len() != cols.len() {
                    return Err(parse_err(format!("expected {} fields, found {}", cols.len(), row.len())));
                }
                rows.push(row);
            }
        }
    }
    Ok(Table {
        header,
        columns: columns.unwrap_or_default(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::CovarianceSpec;
    use crate::grid::build_grid;
    use crate::simulator::{Execution, SimulationConfig, Simulator};

    #[test]
    fn realization_round_trips_exactly() {
        let model = CovarianceModel::new(CovarianceSpec::negative_binomial(0.5)).unwrap();
        let cfg = SimulationConfig::new(model, "geometric:0.5".parse().unwrap(), 40, 3).unwrap();
        let grid: GridSpec = "latlon:6x9".parse().unwrap();
        let points = build_grid(&grid).unwrap();
        let r = Simulator::new(cfg).simulate(&points, Execution::Sequential).unwrap();
        let mut buf = Vec::new();
        write_realization(&mut buf, &r, &grid, &[]).unwrap();
        let table = read_table(buf.as_slice()).unwrap();
        assert_eq!(table.columns, ["colat", "lon", "z1"]);
        assert_eq!(table.rows.len(), 54);
        assert_eq!(table.column("z1").unwrap(), r.values);
        assert_eq!(table.header_value("seed"), Some("3"));
        assert_eq!(table.header_value("grid"), Some("latlon:6x9"));
    }

    #[test]
    fn chentsov_coefficient_rows() {
        let model = CovarianceModel::new(CovarianceSpec::chentsov(2)).unwrap();
        let mut buf = Vec::new();
        write_coefficients(&mut buf, &model, 3).unwrap();
        let table = read_table(buf.as_slice()).unwrap();
        let expected = [(0.0, 0.0), (1.0, 0.75), (2.0, 0.0), (3.0, 0.109375)];
        assert_eq!(table.rows.len(), 4);
        for (row, (n, b)) in table.rows.iter().zip(expected) {
            assert_eq!(row[0], n);
            assert!((row[1] - b).abs() <= 1e-15 * b);
        }
    }

    #[test]
    fn malformed_rows_are_reported() {
        let bad = "# a: 1\nx,y\n1,2\n3\n";
        assert!(matches!(read_table(bad.as_bytes()), Err(Error::Parse { line: 4, .. })));
    }
}
