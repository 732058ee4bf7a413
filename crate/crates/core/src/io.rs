//! CSV readers and writers for point clouds and H-polytopes.
//!
//! Point clouds: one point per row, `d` numeric columns, optional header line.
//! Polytopes: one halfspace per row, `u_1,…,u_d,t`; normals are rescaled to
//! unit length on load together with their offsets.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::error::{Error, Result};
use crate::geom::{HPolytope, Halfspace, PointCloud};

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Numeric rows with their 1-based line numbers.
fn numeric_rows<R: Read>(reader: R, label: &Path, header: bool) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    let mut rec = StringRecord::new();
    loop {
        let more = rdr.read_record(&mut rec).map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(label, line, e.to_string())
        })?;
        if !more {
            break;
        }
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(k, f)| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_err(label, line, format!("column {}: '{f}' is not a finite number", k + 1))),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((line, row));
    }
    Ok(out)
}

pub fn parse_point_cloud<R: Read>(reader: R, label: &Path, header: bool) -> Result<PointCloud> {
    let rows = numeric_rows(reader, label, header)?;
    let Some((_, first)) = rows.first() else {
        return Err(parse_err(label, 1, "no points"));
    };
    let d = first.len();
    let mut data = Vec::with_capacity(rows.len() * d);
    for (line, row) in &rows {
        if row.len() != d {
            return Err(parse_err(label, *line, format!("expected {d} columns, found {}", row.len())));
        }
        data.extend_from_slice(row);
    }
    PointCloud::new(d, data)
}

pub fn read_point_cloud(path: &Path, header: bool) -> Result<PointCloud> {
    parse_point_cloud(open(path)?, path, header)
}

pub fn write_point_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    let mut w = create(path)?;
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    for p in cloud.points() {
        writeln!(w, "{}", join(p)).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn parse_polytope<R: Read>(reader: R, label: &Path) -> Result<HPolytope> {
    let rows = numeric_rows(reader, label, false)?;
    let Some((_, first)) = rows.first() else {
        return Err(parse_err(label, 1, "no constraints"));
    };
    let cols = first.len();
    if cols < 3 {
        return Err(parse_err(label, rows[0].0, format!("need at least 3 columns (u_1,u_2,t), found {cols}")));
    }
    let mut hs = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        if row.len() != cols {
            return Err(parse_err(label, line, format!("expected {cols} columns, found {}", row.len())));
        }
        let (u, t) = row.split_at(cols - 1);
        let h = Halfspace::from_raw(u.to_vec(), t[0]).map_err(|e| parse_err(label, line, e.to_string()))?;
        hs.push(h);
    }
    HPolytope::new(cols - 1, hs)
}

pub fn read_polytope(path: &Path) -> Result<HPolytope> {
    parse_polytope(open(path)?, path)
}

pub fn polytope_csv(p: &HPolytope) -> String {
    let mut s = String::new();
    for h in p.halfspaces() {
        let mut row: Vec<f64> = h.normal.coords().to_vec();
        row.push(h.offset);
        s.push_str(&join(&row));
        s.push('\n');
    }
    s
}

pub fn write_polytope(path: &Path, p: &HPolytope) -> Result<()> {
    write_text(path, &polytope_csv(p))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: PathBuf::from(path),
        source,
    })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Direction;

    fn label() -> &'static Path {
        Path::new("mem.csv")
    }

    #[test]
    fn cloud_basic_and_header() {
        let c = parse_point_cloud("1,2\n3, 4\n\n-1.5,0\n".as_bytes(), label(), false).unwrap();
        assert_eq!(c.n(), 3);
        assert_eq!(c.point(1), &[3.0, 4.0]);
        let c = parse_point_cloud("x,y\n1,2\n".as_bytes(), label(), true).unwrap();
        assert_eq!(c.n(), 1);
    }

    #[test]
    fn cloud_errors_name_lines() {
        match parse_point_cloud("1,2\n3,4\n5,x\n".as_bytes(), label(), false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_point_cloud("1,2\n3,4,5\n".as_bytes(), label(), false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_point_cloud("1,nan\n".as_bytes(), label(), false).is_err());
        assert!(parse_point_cloud("".as_bytes(), label(), false).is_err());
    }

    #[test]
    fn polytope_renormalizes() {
        let p = parse_polytope("2,0,4\n0,-3,3\n".as_bytes(), label()).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.halfspaces()[0].offset, 2.0);
        assert_eq!(p.halfspaces()[1].normal, Direction::new(vec![0.0, -1.0]).unwrap());
        assert_eq!(p.halfspaces()[1].offset, 1.0);
        assert!(matches!(parse_polytope("0,0,1\n".as_bytes(), label()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn polytope_roundtrip() {
        let p = HPolytope::cube(3, -0.25, 1.0 / 3.0).unwrap();
        let back = parse_polytope(polytope_csv(&p).as_bytes(), label()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_point_cloud(Path::new("/nonexistent/cloud.csv"), false).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/cloud.csv"));
    }
}
