//! File formats and atomic output.
//!
//! CSV files have a header row, `.` decimals, no thousands separators and LF
//! line endings. Numbers are printed in their shortest round-trip form, so a
//! file re-parses to the exact values that produced it.
//!
//! | export | columns |
//! |---|---|
//! | CSBP path | `time,value` |
//! | boundary path | `r,Z_r` |
//! | hull samples | `replicate,r,Z_r,V_r` (`V_r` includes the expected sub-threshold volume) |
//! | hull series | `k,ball_faces,hull_faces,hull_vertices,boundary_edges` |
//! | map edges | `u,v` |
//! | map faces | `v0,v1,v2,v3` |
//! | exit functional | `start,stop,coeff,dt,n,mean,stderr,target` |

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use bphull_core::hull_model::HullSample;
use bphull_core::path::{McEstimate, SampledPath};
use bphull_core::planar_maps::hull::HullSeries;
use bphull_core::planar_maps::quad::Quadrangulation;
use serde::Serialize;

use crate::error::{AppError, AppResult};

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> AppResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| AppError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| AppError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| AppError::io(path, e))?;
    tmp.persist(path).map_err(|e| AppError::io(path, e.error))?;
    Ok(())
}

/// Writes to `path` atomically, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> AppResult<()> {
    match path {
        Some(p) => write_atomic(p, contents.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .map_err(|e| AppError::io("<stdout>", e))
        }
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> AppResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn table<I, R>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for cell in row {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&cell);
        }
        out.push('\n');
    }
    out
}

fn num(x: f64) -> String {
    let mut s = String::new();
    let _ = write!(s, "{x}");
    s
}

/// Grid of `points` equally spaced times in `(0, end]`.
pub fn grid(end: f64, points: usize) -> Vec<f64> {
    (1..=points)
        .map(|i| end * i as f64 / points as f64)
        .collect()
}

pub fn csbp_csv(path: &SampledPath) -> String {
    table(
        "time,value",
        path.times
            .iter()
            .zip(&path.values)
            .map(|(&t, &v)| [num(t), num(v)]),
    )
}

pub fn boundary_csv(path: &SampledPath) -> String {
    table(
        "r,Z_r",
        path.times
            .iter()
            .zip(&path.values)
            .map(|(&t, &v)| [num(t), num(v)]),
    )
}

/// Each sample read at the radii of `radii`.
pub fn hull_csv(samples: &[HullSample], radii: &[f64]) -> String {
    let rows = samples.iter().enumerate().flat_map(|(i, h)| {
        radii.iter().map(move |&r| {
            [
                i.to_string(),
                num(r),
                num(h.boundary.value_at(r).unwrap_or(0.0)),
                num(h.compensated_volume_at(r)),
            ]
        })
    });
    table("replicate,r,Z_r,V_r", rows)
}

pub fn hull_series_csv(series: &HullSeries) -> String {
    let rows = series.rows.iter().map(|r| {
        [
            r.k.to_string(),
            r.ball_faces.to_string(),
            r.hull_faces.to_string(),
            r.hull_vertices.to_string(),
            r.boundary_edges.to_string(),
        ]
    });
    table("k,ball_faces,hull_faces,hull_vertices,boundary_edges", rows)
}

pub fn edges_csv(q: &Quadrangulation) -> String {
    table(
        "u,v",
        q.edge_list()
            .into_iter()
            .map(|(u, v)| [u.to_string(), v.to_string()]),
    )
}

pub fn faces_csv(q: &Quadrangulation) -> String {
    table(
        "v0,v1,v2,v3",
        q.face_vertices()
            .into_iter()
            .map(|f| f.map(|v| v.to_string())),
    )
}

/// One row describing an exit-functional estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BmRow {
    pub start: f64,
    pub stop: f64,
    pub coeff: f64,
    pub dt: f64,
    pub estimate: McEstimate,
    pub target: f64,
}

pub fn bm_csv(row: &BmRow) -> String {
    let cells = [
        num(row.start),
        num(row.stop),
        num(row.coeff),
        num(row.dt),
        row.estimate.n.to_string(),
        num(row.estimate.mean),
        num(row.estimate.stderr),
        num(row.target),
    ];
    table("start,stop,coeff,dt,n,mean,stderr,target", [cells])
}

#[cfg(test)]
mod tests {
    use super::*;
    use bphull_core::planar_maps::growth::sample_map;
    use bphull_core::planar_maps::hull::hull_series;

    #[test]
    fn numbers_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, 1e-300, 123456789.125, 2.5e17] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
            assert!(!num(x).contains(','));
        }
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"a\n").unwrap();
        write_atomic(&p, b"b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn missing_directory_is_an_io_error() {
        let e = write_atomic(Path::new("/nonexistent-dir/x.csv"), b"x").unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn map_tables_have_expected_shape() {
        let (_, q) = sample_map(100, 1, 0).unwrap();
        let s = hull_series(&q, 5).unwrap();
        assert_eq!(hull_series_csv(&s).lines().count(), 6);
        assert_eq!(edges_csv(&q).lines().count(), 201);
        assert_eq!(faces_csv(&q).lines().count(), 101);
        assert!(!edges_csv(&q).contains('\r'));
    }

    #[test]
    fn grid_ends_at_end() {
        let g = grid(2.0, 4);
        assert_eq!(g, vec![0.5, 1.0, 1.5, 2.0]);
    }
}
