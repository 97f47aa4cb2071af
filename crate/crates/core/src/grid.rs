//! Regular evaluation grids and point lists.
//!
//! Grids are built from face centers of a colatitude × longitude
//! partition of `S²`; points are ordered colatitude-major.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::sphere::PointSet;

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// `n_colat × n_lon` faces of `S²`.
    LatLon { n_colat: usize, n_lon: usize },
    /// A section of `S³` with fourth coordinate `w`, `|w| < 1`.
    Slice3 { w: f64, n_colat: usize, n_lon: usize },
    /// A great `S²` inside `S^d`: the last `d − 2` coordinates vanish.
    Section { dim: usize, n_colat: usize, n_lon: usize },
    /// Whitespace- or comma-separated coordinates, one point per line.
    Points(PathBuf),
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let faces = |n_colat: usize, n_lon: usize| {
            if n_colat == 0 || n_lon == 0 {
                Err(domain("grids need at least one face in each direction"))
            } else {
                Ok(())
            }
        };
        match self {
            GridSpec::LatLon { n_colat, n_lon } => faces(*n_colat, *n_lon),
            GridSpec::Slice3 { w, n_colat, n_lon } => {
                if !(w.abs() < 1.0) {
                    return Err(domain(format!("slice coordinate w = {w} must satisfy |w| < 1")));
                }
                faces(*n_colat, *n_lon)
            }
            GridSpec::Section { dim, n_colat, n_lon } => {
                if *dim < 3 {
                    return Err(domain("sections need d ≥ 3; use latlon on S²"));
                }
                faces(*n_colat, *n_lon)
            }
            GridSpec::Points(_) => Ok(()),
        }
    }

    /// Face counts `(n_colat, n_lon)` of the regular kinds.
    pub fn faces(&self) -> Option<(usize, usize)> {
        match *self {
            GridSpec::LatLon { n_colat, n_lon }
            | GridSpec::Slice3 { n_colat, n_lon, .. }
            | GridSpec::Section { n_colat, n_lon, .. } => Some((n_colat, n_lon)),
            GridSpec::Points(_) => None,
        }
    }

    /// `(colatitude, longitude)` of point `i` of a regular grid.
    pub fn angles(&self, i: usize) -> Option<(f64, f64)> {
        let (n_colat, n_lon) = self.faces()?;
        Some(face_center(i / n_lon, i % n_lon, n_colat, n_lon))
    }
}

fn face_center(row: usize, col: usize, n_colat: usize, n_lon: usize) -> (f64, f64) {
    (
        (row as f64 + 0.5) * PI / n_colat as f64,
        (col as f64 + 0.5) * 2.0 * PI / n_lon as f64,
    )
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::LatLon { n_colat, n_lon } => write!(f, "latlon:{n_colat}x{n_lon}"),
            GridSpec::Slice3 { w, n_colat, n_lon } => write!(f, "slice3:{w}:{n_colat}x{n_lon}"),
            GridSpec::Section { dim, n_colat, n_lon } => write!(f, "section:{dim}:{n_colat}x{n_lon}"),
            GridSpec::Points(path) => write!(f, "points:{}", path.display()),
        }
    }
}

fn parse_faces(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once('x')
        .ok_or_else(|| domain(format!("expected NxM face counts, got {s:?}")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| domain(format!("invalid face count {t:?}")))
    };
    Ok((parse(a)?, parse(b)?))
}

impl FromStr for GridSpec {
    type Err = Error;

    /// `latlon:NxM`, `slice3:W:NxM`, `section:D:NxM` or `points:FILE`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| domain(format!("grid spec {s:?} has no kind prefix")))?;
        let spec = match kind {
            "latlon" => {
                let (n_colat, n_lon) = parse_faces(rest)?;
                GridSpec::LatLon { n_colat, n_lon }
            }
            "slice3" => {
                let (w, faces) = rest
                    .split_once(':')
                    .ok_or_else(|| domain("expected slice3:W:NxM"))?;
                let w = w.parse().map_err(|_| domain(format!("invalid slice coordinate {w:?}")))?;
                let (n_colat, n_lon) = parse_faces(faces)?;
                GridSpec::Slice3 { w, n_colat, n_lon }
            }
            "section" => {
                let (dim, faces) = rest
                    .split_once(':')
                    .ok_or_else(|| domain("expected section:D:NxM"))?;
                let dim = dim.parse().map_err(|_| domain(format!("invalid dimension {dim:?}")))?;
                let (n_colat, n_lon) = parse_faces(faces)?;
                GridSpec::Section { dim, n_colat, n_lon }
            }
            "points" if !rest.is_empty() => GridSpec::Points(PathBuf::from(rest)),
            _ => return Err(domain(format!("unknown grid kind in {s:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Points of `spec`. Sections of high-dimensional spheres store only their
/// nonzero coordinates.
pub fn build_grid(spec: &GridSpec) -> Result<PointSet> {
    spec.validate()?;
    let regular = |n_colat: usize, n_lon: usize, scale: f64, extra: Option<f64>| {
        let width = 3 + extra.is_some() as usize;
        let mut coords = Vec::with_capacity(n_colat * n_lon * width);
        for row in 0..n_colat {
            for col in 0..n_lon {
                let (colat, lon) = face_center(row, col, n_colat, n_lon);
                let s = colat.sin();
                coords.extend([scale * s * lon.cos(), scale * s * lon.sin(), scale * colat.cos()]);
                coords.extend(extra);
            }
        }
        coords
    };
    match *spec {
        GridSpec::LatLon { n_colat, n_lon } => PointSet::new(2, 3, regular(n_colat, n_lon, 1.0, None)),
        GridSpec::Slice3 { w, n_colat, n_lon } => {
            PointSet::new(3, 4, regular(n_colat, n_lon, (1.0 - w * w).sqrt(), Some(w)))
        }
        GridSpec::Section { dim, n_colat, n_lon } => PointSet::new(dim, 3, regular(n_colat, n_lon, 1.0, None)),
        GridSpec::Points(ref path) => read_points(path),
    }
}

/// Reads a point list; blank lines and lines starting with `#` are skipped.
pub fn read_points(path: &Path) -> Result<PointSet> {
    parse_points(&std::fs::read_to_string(path)?)
}

pub fn parse_points(text: &str) -> Result<PointSet> {
    let mut width = None;
    let mut coords = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: k + 1, message };
        let row: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(format!("invalid number {t:?}"))))
            .collect::<Result<_>>()?;
        match width {
            None if row.len() < 2 => return Err(parse_err("a point needs at least two coordinates".into())),
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(parse_err(format!("expected {w} coordinates, found {}", row.len())))
            }
            _ => {}
        }
        let norm = row.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > crate::sphere::UNIT_TOLERANCE {
            return Err(parse_err(format!("point has norm {norm}, not 1")));
        }
        coords.extend(row);
    }
    let width = width.ok_or_else(|| Error::Parse {
        line: 0,
        message: "no points in list".into(),
    })?;
    PointSet::new(width - 1, width, coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_face_is_antipodal_to_greenwich() {
        let set = build_grid(&"latlon:1x1".parse().unwrap()).unwrap();
        let p = set.point(0);
        assert!((p.coords()[0] + 1.0).abs() < 1e-15);
        assert!(p.coords()[1].abs() < 1e-15 && p.coords()[2].abs() < 1e-15);
    }

    #[test]
    fn slice_and_section() {
        let set = build_grid(&"slice3:0.75:2x2".parse().unwrap()).unwrap();
        assert_eq!(set.len(), 4);
        for p in set.iter() {
            assert_eq!(p[3], 0.75);
            assert!((p.iter().map(|c| c * c).sum::<f64>().sqrt() - 1.0).abs() < 1e-12);
        }
        let set = build_grid(&"section:256:2x2".parse().unwrap()).unwrap();
        let p = set.point(3);
        assert_eq!(p.coords().len(), 257);
        assert!(p.coords()[3..].iter().all(|c| *c == 0.0));
    }

    #[test]
    fn colatitude_major_order() {
        let spec: GridSpec = "latlon:3x4".parse().unwrap();
        let (c0, l0) = spec.angles(0).unwrap();
        let (c1, l1) = spec.angles(1).unwrap();
        let (c4, _) = spec.angles(4).unwrap();
        assert_eq!(c0, c1);
        assert!(l1 > l0 && c4 > c0);
    }

    #[test]
    fn spec_round_trip_and_errors() {
        for s in ["latlon:500x500", "slice3:-0.25:10x20", "section:7:4x5", "points:pts.txt"] {
            assert_eq!(s.parse::<GridSpec>().unwrap().to_string(), s);
        }
        for s in ["latlon:0x4", "slice3:1:2x2", "section:2:2x2", "cube:2x2", "latlon:3", "points:"] {
            assert!(s.parse::<GridSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn point_list_errors_carry_line_numbers() {
        let ok = parse_points("# header\n1 0 0\n0,1,0\n\n0 0 -1\n").unwrap();
        assert_eq!((ok.dim(), ok.len()), (2, 3));
        match parse_points("1 0 0\n0 1\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_points("1 0 0\n0 x 0\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_points("0.5 0 0\n"), Err(Error::Parse { line: 1, .. })));
    }
}
