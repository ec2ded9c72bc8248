//! CSV plot data.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::image::ManifoldImage;

/// Column names for one point of `img`.
pub fn value_columns(img: &ManifoldImage) -> Vec<String> {
    let name = img.manifold().name();
    let len = img.point_len();
    match name.as_str() {
        "s1" => vec!["angle".into()],
        "so3" => ["w", "x", "y", "z"].iter().map(|s| s.to_string()).collect(),
        n if n.starts_with("spd") => {
            let r = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
            (0..r).flat_map(|i| (i..r).map(move |j| format!("a{}{}", i + 1, j + 1))).collect()
        }
        _ => (0..len).map(|i| format!("x{}", i + 1)).collect(),
    }
}

/// One record per pixel: `index,i1,i2` and the values of each named image.
pub fn image_csv(images: &[(&str, &ManifoldImage)]) -> Result<String> {
    let Some((_, first)) = images.first() else {
        return Err(Error::InvalidParameter("no images to plot".into()));
    };
    for (_, img) in &images[1..] {
        if img.grid() != first.grid() {
            return Err(Error::ShapeMismatch("plotted images differ in size".into()));
        }
    }
    let mut out = String::from("index,i1,i2");
    for (label, img) in images {
        for c in value_columns(img) {
            write!(out, ",{label}_{c}").unwrap();
        }
    }
    out.push('\n');
    let grid = first.grid();
    for k in 0..grid.len() {
        let (i1, i2) = grid.coords(k);
        write!(out, "{k},{i1},{i2}").unwrap();
        for (_, img) in images {
            for v in img.point(k) {
                write!(out, ",{v:e}").unwrap();
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Energy and step traces, one record per iteration.
pub fn trace_csv(energy: &[f64], max_change: &[f64]) -> String {
    let mut out = String::from("iter,energy,max_change\n");
    for (i, (e, c)) in energy.iter().zip(max_change).enumerate() {
        writeln!(out, "{},{e:e},{c:e}", i + 1).unwrap();
    }
    out
}
