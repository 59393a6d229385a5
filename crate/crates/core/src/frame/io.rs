use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb as ImgRgb};

use super::{Frame, Intrinsics, Rgb};
use crate::error::{Error, Result};
use crate::raster::Grid;

fn open(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ));
    }
    image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads an 8-bit color PNG and a 16-bit depth PNG into a deprojected frame.
pub fn load_frame(color_path: &Path, depth_path: &Path, intrinsics: Intrinsics) -> Result<Frame> {
    intrinsics.validate()?;
    let color = open(color_path)?.to_rgb8();
    let depth = match open(depth_path)? {
        DynamicImage::ImageLuma16(img) => img,
        _ => return Err(Error::DepthFormat(depth_path.to_path_buf())),
    };
    if color.dimensions() != depth.dimensions() {
        return Err(Error::DimensionMismatch(format!(
            "color is {:?}, depth is {:?}",
            color.dimensions(),
            depth.dimensions()
        )));
    }
    let (w, h) = (color.width() as usize, color.height() as usize);
    let color = Grid::from_vec(w, h, color.pixels().map(|p| p.0).collect());
    let scale = intrinsics.depth_scale;
    let depth = Grid::from_vec(w, h, depth.pixels().map(|p| p.0[0] as f64 * scale).collect());
    Frame::from_depth(intrinsics, color, depth)
}

pub fn save_color_png(color: &Grid<Rgb>, path: &Path) -> Result<()> {
    let buf: Vec<u8> = color.as_slice().iter().flatten().copied().collect();
    let img: ImageBuffer<ImgRgb<u8>, _> =
        ImageBuffer::from_raw(color.width() as u32, color.height() as u32, buf).expect("buffer sized from raster");
    img.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes metric depth as 16-bit units of `depth_scale` meters; invalid pixels are 0.
pub fn save_depth_png(depth: &Grid<f64>, depth_scale: f64, path: &Path) -> Result<()> {
    let buf: Vec<u16> = depth
        .as_slice()
        .iter()
        .map(|&z| {
            if z > 0.0 && z.is_finite() {
                (z / depth_scale).round().clamp(1.0, u16::MAX as f64) as u16
            } else {
                0
            }
        })
        .collect();
    let img: ImageBuffer<Luma<u16>, _> =
        ImageBuffer::from_raw(depth.width() as u32, depth.height() as u32, buf).expect("buffer sized from raster");
    img.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_intrinsics(path: &Path) -> Result<Intrinsics> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let k: Intrinsics = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    k.validate()?;
    Ok(k)
}

pub fn save_intrinsics(k: &Intrinsics, path: &Path) -> Result<()> {
    let text = toml::to_string(k).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_k() -> Intrinsics {
        Intrinsics {
            fx: 100.0,
            fy: 100.0,
            cx: 4.0,
            cy: 3.0,
            width: 8,
            height: 6,
            depth_scale: 0.001,
        }
    }

    #[test]
    fn png_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let k = small_k();
        let depth = Grid::from_fn(8, 6, |p| if p.col == 0 { 0.0 } else { 0.5 + 0.001 * p.row as f64 });
        let color = Grid::from_fn(8, 6, |p| [p.col as u8 * 10, p.row as u8, 7]);
        let f = Frame::from_depth(k, color, depth).unwrap();
        f.save_dir(dir.path()).unwrap();
        let g = Frame::load_dir(dir.path()).unwrap();
        assert_eq!(g.color, f.color);
        assert_eq!(g.valid, f.valid);
        for (a, b) in g.depth.as_slice().iter().zip(f.depth.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_8bit_depth() {
        let dir = tempfile::tempdir().unwrap();
        let color = Grid::filled(8, 6, [1u8, 2, 3]);
        let cpath = dir.path().join("c.png");
        save_color_png(&color, &cpath).unwrap();
        let err = load_frame(&cpath, &cpath, small_k()).unwrap_err();
        assert!(matches!(err, Error::DepthFormat(_)));
    }

    #[test]
    fn rejects_mismatched_sizes() {
        let dir = tempfile::tempdir().unwrap();
        let cpath = dir.path().join("c.png");
        let dpath = dir.path().join("d.png");
        save_color_png(&Grid::filled(8, 6, [0u8; 3]), &cpath).unwrap();
        save_depth_png(&Grid::filled(9, 6, 1.0), 0.001, &dpath).unwrap();
        let err = load_frame(&cpath, &dpath, small_k()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));

        // Images agree with each other but not with the intrinsics.
        save_depth_png(&Grid::filled(8, 6, 1.0), 0.001, &dpath).unwrap();
        let mut k = small_k();
        k.width = 10;
        let err = load_frame(&cpath, &dpath, k).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_frame(
            Path::new("/nonexistent/c.png"),
            Path::new("/nonexistent/d.png"),
            small_k(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn intrinsics_toml_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.toml");
        save_intrinsics(&Intrinsics::kinect(), &p).unwrap();
        assert_eq!(load_intrinsics(&p).unwrap(), Intrinsics::kinect());
        std::fs::write(&p, "fx = 1.0\nfy = 1.0\ncx = 0.5\ncy = 0.5\nwidth = 2\nheight = 2\n").unwrap();
        assert_eq!(load_intrinsics(&p).unwrap().depth_scale, 0.001);
    }
}
