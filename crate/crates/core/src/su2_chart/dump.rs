use std::io::Write;

use serde::Serialize;

use super::{check_shape, HopfGrid, MetricField, ScalarField};
use crate::{Error, Result};

/// One row per cell: center coordinates, metric components, quadrature weight, optional value.
#[derive(Debug, Clone, Serialize)]
pub struct GridDump {
    pub resolution: [usize; 3],
    pub cells: Vec<CellRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellRecord {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub eta: f64,
    pub xi1: f64,
    pub xi2: f64,
    /// Upper triangle `g00 g01 g02 g11 g12 g22`.
    pub metric: [f64; 6],
    pub weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

fn records(metric: &MetricField, field: Option<&ScalarField>) -> Result<Vec<CellRecord>> {
    if let Some(f) = field {
        check_shape(metric.shape(), f.shape())?;
    }
    let grid: &HopfGrid = metric.grid();
    Ok((0..grid.len())
        .map(|c| {
            let (i, j, k) = grid.unindex(c);
            let [eta, xi1, xi2] = grid.center(i, j, k);
            let g = &metric.components()[c];
            CellRecord {
                i,
                j,
                k,
                eta,
                xi1,
                xi2,
                metric: [g[0][0], g[0][1], g[0][2], g[1][1], g[1][2], g[2][2]],
                weight: metric.weights()[c],
                value: field.map(|f| f.values()[c]),
            }
        })
        .collect())
}

pub fn dump_json(metric: &MetricField, field: Option<&ScalarField>) -> Result<GridDump> {
    Ok(GridDump {
        resolution: metric.grid().dims(),
        cells: records(metric, field)?,
    })
}

/// Writes the grid as CSV with a header line; `value` is appended when a field is given.
pub fn dump_csv<W: Write>(
    metric: &MetricField,
    field: Option<&ScalarField>,
    mut out: W,
) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidInput(format!("write failed: {e}"));
    let rows = records(metric, field)?;
    let mut header = String::from("i,j,k,eta,xi1,xi2,g00,g01,g02,g11,g12,g22,weight");
    if field.is_some() {
        header.push_str(",value");
    }
    writeln!(out, "{header}").map_err(io)?;
    for r in rows {
        write!(
            out,
            "{},{},{},{:e},{:e},{:e}",
            r.i, r.j, r.k, r.eta, r.xi1, r.xi2
        )
        .map_err(io)?;
        for m in r.metric {
            write!(out, ",{m:e}").map_err(io)?;
        }
        write!(out, ",{:e}", r.weight).map_err(io)?;
        if let Some(v) = r.value {
            write!(out, ",{v:e}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_curvature::BergerParams;
    use crate::su2_chart::chart_metric;

    #[test]
    fn csv_has_one_row_per_cell() {
        let grid = HopfGrid::new(3, 4, 5).unwrap();
        let m = chart_metric(&grid, BergerParams::round()).unwrap();
        let f = ScalarField::constant(&grid, 2.0);
        let mut buf = Vec::new();
        dump_csv(&m, Some(&f), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 60);
        assert!(lines[0].ends_with("weight,value"));
        assert_eq!(lines[1].split(',').count(), 14);
    }
}
