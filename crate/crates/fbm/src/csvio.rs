use std::io::{BufRead, BufReader, Read, Write};

use crate::error::FbmError;
use crate::grid::TimeGrid;
use crate::path::SamplePath;

/// Write paths as CSV: header `path_id,t,x0,...,x{d-1}`, one row per
/// (path, node), LF line endings, 17 significant digits.
pub fn write_paths_csv<W: Write>(mut w: W, paths: &[SamplePath]) -> Result<(), FbmError> {
    let first = paths
        .first()
        .ok_or_else(|| FbmError::Domain("no paths to write".into()))?;
    let grid = first.grid();
    let dim = first.dim();

    let mut header = String::from("path_id,t");
    for j in 0..dim {
        header.push_str(&format!(",x{j}"));
    }
    header.push('\n');
    w.write_all(header.as_bytes())?;

    for (pid, p) in paths.iter().enumerate() {
        if p.grid() != grid || p.dim() != dim {
            return Err(FbmError::GridMismatch(format!(
                "path {pid} disagrees with path 0 on grid or dim"
            )));
        }
        for k in 0..grid.n_nodes() {
            let mut line = format!("{pid},{}", fmt17(grid.node(k)));
            for j in 0..dim {
                line.push(',');
                line.push_str(&fmt17(p.value(k, j)));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
    }
    Ok(())
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Read paths written by [`write_paths_csv`]. Path ids must be contiguous
/// from 0 and rows per path must agree.
pub fn read_paths_csv<R: Read>(r: R) -> Result<Vec<SamplePath>, FbmError> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| FbmError::CsvParse("empty input".into()))??;
    let cols: Vec<&str> = header.trim_end().split(',').collect();
    if cols.len() < 3 || cols[0] != "path_id" || cols[1] != "t" {
        return Err(FbmError::CsvParse(format!("unexpected header: {header}")));
    }
    for (j, c) in cols[2..].iter().enumerate() {
        if *c != format!("x{j}") {
            return Err(FbmError::CsvParse(format!("unexpected header column {c}")));
        }
    }
    let dim = cols.len() - 2;

    // rows grouped by path id, ids contiguous ascending
    let mut per_path: Vec<Vec<(f64, Vec<f64>)>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != dim + 2 {
            return Err(FbmError::CsvParse(format!(
                "row {}: expected {} fields, got {}",
                lineno + 2,
                dim + 2,
                fields.len()
            )));
        }
        let pid: usize = fields[0]
            .parse()
            .map_err(|e| FbmError::CsvParse(format!("row {}: bad path_id: {e}", lineno + 2)))?;
        let t: f64 = fields[1]
            .parse()
            .map_err(|e| FbmError::CsvParse(format!("row {}: bad t: {e}", lineno + 2)))?;
        let mut vals = Vec::with_capacity(dim);
        for f in &fields[2..] {
            vals.push(f.parse::<f64>().map_err(|e| {
                FbmError::CsvParse(format!("row {}: bad value: {e}", lineno + 2))
            })?);
        }
        if pid == per_path.len() {
            per_path.push(Vec::new());
        } else if pid > per_path.len() {
            return Err(FbmError::CsvParse(format!(
                "path ids must be contiguous, jumped to {pid}"
            )));
        }
        per_path[pid].push((t, vals));
    }

    let first = per_path
        .first()
        .ok_or_else(|| FbmError::CsvParse("no data rows".into()))?;
    if first.len() < 2 {
        return Err(FbmError::CsvParse("need at least two nodes".into()));
    }
    let n = first.len() - 1;
    let t_end = first[n].0;
    let grid = TimeGrid::new(t_end, n)?;

    let mut out = Vec::with_capacity(per_path.len());
    for (pid, rows) in per_path.iter().enumerate() {
        if rows.len() != n + 1 {
            return Err(FbmError::CsvParse(format!(
                "path {pid} has {} rows, expected {}",
                rows.len(),
                n + 1
            )));
        }
        let mut values = Vec::with_capacity((n + 1) * dim);
        for (k, (t, vals)) in rows.iter().enumerate() {
            if (t - grid.node(k)).abs() > 1e-9 * t_end.max(1.0) {
                return Err(FbmError::CsvParse(format!(
                    "path {pid} row {k}: time {t} is not the uniform node {}",
                    grid.node(k)
                )));
            }
            values.extend_from_slice(vals);
        }
        out.push(SamplePath::new(grid, dim, values)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_exact() {
        let grid = TimeGrid::new(2.0, 3).unwrap();
        let p = SamplePath::from_fn(grid, 2, |t, j| (j as f64 + 1.0) * t * t - 1.0 / 3.0);
        let q = SamplePath::from_fn(grid, 2, |t, j| (t - 0.7).sin() + j as f64);
        let mut buf = Vec::new();
        write_paths_csv(&mut buf, &[p.clone(), q.clone()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("path_id,t,x0,x1\n"));
        assert!(!text.contains('\r'));
        let back = read_paths_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].values(), p.values());
        assert_eq!(back[1].values(), q.values());
    }

    #[test]
    fn fmt17_roundtrips_f64() {
        for &x in &[
            std::f64::consts::PI,
            1.0 / 3.0,
            -2.2250738585072014e-308,
            6.02214076e23,
            0.0,
        ] {
            let s = fmt17(x);
            let y: f64 = s.parse().unwrap();
            assert_eq!(x, y, "{s}");
        }
    }
}
