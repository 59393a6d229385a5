//! ASCII PCD v0.7 reader and writer for organized clouds.
//!
//! Only `DATA ascii` is handled. Intrinsics are not part of the format, so a
//! pinhole model is recovered from the organized layout by regressing pixel
//! coordinates on the normalized point coordinates `x/z` and `y/z`.

use std::fmt::Write as _;
use std::path::Path;

use super::{Frame, Intrinsics, Rgb};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::raster::Grid;

const MID_GRAY: Rgb = [128, 128, 128];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Float,
    Unsigned,
    Signed,
}

#[derive(Debug)]
struct Field {
    name: String,
    kind: Kind,
    size: usize,
    count: usize,
}

#[derive(Debug)]
struct Header {
    fields: Vec<Field>,
    width: usize,
    height: usize,
    points: usize,
}

fn parse_header<'a>(lines: &mut impl Iterator<Item = &'a str>) -> Result<Header> {
    let mut names: Vec<String> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    let mut types: Vec<Kind> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut width = None;
    let mut height = None;
    let mut points = None;

    let num = |tok: &str, key: &str| -> Result<usize> {
        tok.parse().map_err(|_| Error::Pcd(format!("bad {key} value '{tok}'")))
    };

    loop {
        let Some(line) = lines.next() else {
            return Err(Error::Pcd("missing DATA line".into()));
        };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or_default().to_ascii_uppercase();
        let rest: Vec<&str> = toks.collect();
        match key.as_str() {
            "VERSION" | "VIEWPOINT" => {}
            "FIELDS" => names = rest.iter().map(|s| s.to_string()).collect(),
            "SIZE" => sizes = rest.iter().map(|t| num(t, "SIZE")).collect::<Result<_>>()?,
            "TYPE" => {
                types = rest
                    .iter()
                    .map(|t| match *t {
                        "F" => Ok(Kind::Float),
                        "U" => Ok(Kind::Unsigned),
                        "I" => Ok(Kind::Signed),
                        other => Err(Error::Pcd(format!("unknown TYPE '{other}'"))),
                    })
                    .collect::<Result<_>>()?
            }
            "COUNT" => counts = rest.iter().map(|t| num(t, "COUNT")).collect::<Result<_>>()?,
            "WIDTH" => width = Some(num(rest.first().copied().unwrap_or(""), "WIDTH")?),
            "HEIGHT" => height = Some(num(rest.first().copied().unwrap_or(""), "HEIGHT")?),
            "POINTS" => points = Some(num(rest.first().copied().unwrap_or(""), "POINTS")?),
            "DATA" => {
                let kind = rest.first().copied().unwrap_or("");
                if kind != "ascii" {
                    return Err(Error::Pcd(format!("unsupported DATA '{kind}', only ascii")));
                }
                break;
            }
            other => return Err(Error::Pcd(format!("unknown header key '{other}'"))),
        }
    }

    if names.is_empty() {
        return Err(Error::Pcd("missing FIELDS".into()));
    }
    if counts.is_empty() {
        counts = vec![1; names.len()];
    }
    if sizes.len() != names.len() || types.len() != names.len() || counts.len() != names.len() {
        return Err(Error::Pcd("FIELDS/SIZE/TYPE/COUNT lengths disagree".into()));
    }
    let width = width.ok_or_else(|| Error::Pcd("missing WIDTH".into()))?;
    let height = height.ok_or_else(|| Error::Pcd("missing HEIGHT".into()))?;
    let points = points.unwrap_or(width * height);
    if points != width * height {
        return Err(Error::Pcd(format!(
            "POINTS {points} != WIDTH*HEIGHT {}",
            width * height
        )));
    }
    let fields = names
        .into_iter()
        .zip(types)
        .zip(sizes)
        .zip(counts)
        .map(|(((name, kind), size), count)| Field {
            name,
            kind,
            size,
            count,
        })
        .collect();
    Ok(Header {
        fields,
        width,
        height,
        points,
    })
}

fn column_of<'a>(header: &'a Header, name: &str) -> Option<(usize, &'a Field)> {
    let mut col = 0;
    for f in &header.fields {
        if f.name == name {
            return Some((col, f));
        }
        col += f.count;
    }
    None
}

fn unpack_rgb(tok: &str, field: &Field) -> Option<Rgb> {
    let packed: u32 = match field.kind {
        // PCL stores packed color as the bit pattern of a float.
        Kind::Float if field.size == 4 => tok.parse::<f32>().ok()?.to_bits(),
        Kind::Float => return None,
        Kind::Unsigned | Kind::Signed => tok.parse::<i64>().ok()? as u32,
    };
    Some([(packed >> 16) as u8, (packed >> 8) as u8, packed as u8])
}

/// Reads an organized ASCII PCD file into a frame.
pub fn load_pcd(path: &Path) -> Result<Frame> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pcd(&text)
}

pub(crate) fn parse_pcd(text: &str) -> Result<Frame> {
    let mut lines = text.lines();
    let header = parse_header(&mut lines)?;
    if header.height <= 1 {
        return Err(Error::UnorganizedCloud);
    }
    let (xc, _) = column_of(&header, "x").ok_or_else(|| Error::Pcd("no x field".into()))?;
    let (yc, _) = column_of(&header, "y").ok_or_else(|| Error::Pcd("no y field".into()))?;
    let (zc, _) = column_of(&header, "z").ok_or_else(|| Error::Pcd("no z field".into()))?;
    let rgb = column_of(&header, "rgb").or_else(|| column_of(&header, "rgba"));
    let ncols: usize = header.fields.iter().map(|f| f.count).sum();

    let mut cloud = Vec::with_capacity(header.points);
    let mut color = Vec::with_capacity(header.points);
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != ncols {
            return Err(Error::Pcd(format!(
                "row {} has {} values, expected {ncols}",
                cloud.len(),
                toks.len()
            )));
        }
        let coord = |c: usize| -> Result<f64> {
            toks[c]
                .parse::<f64>()
                .map_err(|_| Error::Pcd(format!("bad number '{}'", toks[c])))
        };
        cloud.push(Vec3::new(coord(xc)?, coord(yc)?, coord(zc)?));
        let c = rgb
            .and_then(|(col, field)| unpack_rgb(toks[col], field))
            .unwrap_or(MID_GRAY);
        color.push(c);
    }
    if cloud.len() != header.points {
        return Err(Error::Pcd(format!(
            "expected {} points, found {}",
            header.points,
            cloud.len()
        )));
    }

    let cloud = Grid::from_vec(header.width, header.height, cloud);
    let color = Grid::from_vec(header.width, header.height, color);
    let intrinsics = estimate_intrinsics(&cloud);
    Frame::from_cloud(intrinsics, color, cloud)
}

/// Least-squares pinhole fit of `col = fx·x/z + cx` and `row = fy·y/z + cy`.
fn estimate_intrinsics(cloud: &Grid<Vec3>) -> Intrinsics {
    let (w, h) = (cloud.width(), cloud.height());
    let mut sx = Regression::default();
    let mut sy = Regression::default();
    for p in cloud.pixels() {
        let q = cloud[p];
        if q.iter().all(|v| v.is_finite()) && q.z > 0.0 {
            sx.push(q.x / q.z, p.col as f64);
            sy.push(q.y / q.z, p.row as f64);
        }
    }
    let fallback_f = w.max(h) as f64;
    let (fx, cx) = sx.fit().unwrap_or((fallback_f, (w as f64 - 1.0) / 2.0));
    let (fy, cy) = sy.fit().unwrap_or((fx, (h as f64 - 1.0) / 2.0));
    Intrinsics {
        fx: if fx > 0.0 { fx } else { fallback_f },
        fy: if fy > 0.0 { fy } else { fallback_f },
        cx: cx.clamp(0.0, w as f64 - 1e-6),
        cy: cy.clamp(0.0, h as f64 - 1e-6),
        width: w,
        height: h,
        depth_scale: 0.001,
    }
}

#[derive(Default)]
struct Regression {
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    sxy: f64,
}

impl Regression {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.sxy += x * y;
    }

    /// Slope and intercept, if the abscissae are not all equal.
    fn fit(&self) -> Option<(f64, f64)> {
        let den = self.n * self.sxx - self.sx * self.sx;
        if self.n < 2.0 || den.abs() < 1e-12 * self.n * self.n {
            return None;
        }
        let slope = (self.n * self.sxy - self.sx * self.sy) / den;
        Some((slope, (self.sy - slope * self.sx) / self.n))
    }
}

/// Writes the frame's cloud as an organized ASCII PCD (invalid points as `nan`).
pub fn save_pcd(frame: &Frame, path: &Path) -> Result<()> {
    let (w, h) = (frame.width(), frame.height());
    let mut out = String::with_capacity(w * h * 40);
    out.push_str("# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\n");
    out.push_str("FIELDS x y z rgb\nSIZE 4 4 4 4\nTYPE F F F U\nCOUNT 1 1 1 1\n");
    let _ = write!(
        out,
        "WIDTH {w}\nHEIGHT {h}\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {}\nDATA ascii\n",
        w * h
    );
    for p in frame.points.pixels() {
        let c = frame.color[p];
        let packed = (c[0] as u32) << 16 | (c[1] as u32) << 8 | c[2] as u32;
        match frame.point(p) {
            Some(q) => {
                let _ = writeln!(out, "{:.7} {:.7} {:.7} {packed}", q.x, q.y, q.z);
            }
            None => {
                let _ = writeln!(out, "nan nan nan {packed}");
            }
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER_2X2: &str = "# .PCD v0.7\nVERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\nWIDTH 2\nHEIGHT 2\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS 4\nDATA ascii\n";

    #[test]
    fn four_finite_points() {
        let text = format!("{HEADER_2X2}-0.1 -0.1 1\n0.1 -0.1 1\n-0.1 0.1 1\n0.1 0.1 1\n");
        let f = parse_pcd(&text).unwrap();
        assert_eq!(f.valid_count(), 4);
        assert_eq!(f.color[0], MID_GRAY);
        assert_eq!(f.points[3], Vec3::new(0.1, 0.1, 1.0));
        // Recovered pinhole model reprojects each point onto its pixel.
        for p in f.points.pixels() {
            let (u, v) = f.intrinsics.project(&f.points[p]).unwrap();
            assert!((u - p.col as f64).abs() < 0.5 && (v - p.row as f64).abs() < 0.5);
        }
    }

    #[test]
    fn nan_row_is_invalid() {
        let text = format!("{HEADER_2X2}nan nan nan\nNaN NaN NaN\n-0.1 0.1 1\n0.1 0.1 1\n");
        let f = parse_pcd(&text).unwrap();
        assert_eq!(f.valid.as_slice(), &[false, false, true, true]);
    }

    #[test]
    fn unorganized_rejected() {
        let text =
            HEADER_2X2.replace("WIDTH 2", "WIDTH 4").replace("HEIGHT 2", "HEIGHT 1") + "0 0 1\n0 0 1\n0 0 1\n0 0 1\n";
        assert!(matches!(parse_pcd(&text), Err(Error::UnorganizedCloud)));
    }

    #[test]
    fn malformed_headers() {
        assert!(matches!(parse_pcd("VERSION 0.7\nFIELDS x y z\n"), Err(Error::Pcd(_))));
        let binary = HEADER_2X2.replace("DATA ascii", "DATA binary");
        assert!(matches!(parse_pcd(&binary), Err(Error::Pcd(_))));
        let short = format!("{HEADER_2X2}0 0 1\n");
        assert!(matches!(parse_pcd(&short), Err(Error::Pcd(_))));
        let bad_type = HEADER_2X2.replace("TYPE F F F", "TYPE F F Q");
        assert!(matches!(parse_pcd(&bad_type), Err(Error::Pcd(_))));
    }

    #[test]
    fn packed_float_rgb() {
        let packed: u32 = 0x00ff8010;
        let as_float = f32::from_bits(packed);
        let text = HEADER_2X2
            .replace("FIELDS x y z", "FIELDS x y z rgb")
            .replace("SIZE 4 4 4", "SIZE 4 4 4 4")
            .replace("TYPE F F F", "TYPE F F F F")
            .replace("COUNT 1 1 1", "COUNT 1 1 1 1");
        let mut body = String::new();
        for (x, y) in [(-0.1, -0.1), (0.1, -0.1), (-0.1, 0.1), (0.1, 0.1)] {
            body.push_str(&format!("{x} {y} 1 {:e}\n", as_float));
        }
        let f = parse_pcd(&(text + &body)).unwrap();
        assert_eq!(f.color[0], [0xff, 0x80, 0x10]);
    }
}
