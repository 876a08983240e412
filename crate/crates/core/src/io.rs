//! Atomic file output, config hashing and minimal SVG rendering.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Writes `bytes` to a sibling temp file, syncs it and renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Renders with `render` into memory, then writes atomically.
pub fn atomic_write_with<F>(path: &Path, render: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    render(&mut buf)?;
    atomic_write(path, &buf)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

/// SHA-256 of the compact JSON rendering, hex encoded.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let json = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&json)))
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Polyline chart of several `(x, y)` series sharing axes.
pub fn svg_lines(title: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let pts = series.iter().flat_map(|s| s.1.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(out, r#"<text x="{PAD}" y="{}">{x0:.3e}</text>"#, H - PAD + 16.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{x1:.3e}</text>"#, W - PAD, H - PAD + 16.0);
    let _ = writeln!(out, r#"<text x="4" y="{}">{y0:.3e}</text>"#, H - PAD);
    let _ = writeln!(out, r#"<text x="4" y="{}">{y1:.3e}</text>"#, PAD);
    for (i, (label, data)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let d: Vec<String> = data
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, d.join(" "));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - PAD - 120.0,
            PAD + 14.0 * i as f64,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Grayscale heatmap of a square grid of values (row-major, first row at
/// the bottom), optionally on a log scale.
pub fn svg_heatmap(title: &str, side: usize, values: &[f64], log: bool) -> String {
    assert_eq!(values.len(), side * side);
    let tr = |v: f64| if log { v.max(1e-300).log10() } else { v };
    let finite = values.iter().map(|&v| tr(v)).filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v), b.max(v)));
    let lo = if log { lo.max(hi - 16.0) } else { lo };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cell = (H - 2.0 * PAD) / side as f64;
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{H}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, H / 2.0, escape(title));
    for i in 0..side {
        for j in 0..side {
            let v = ((tr(values[i * side + j]) - lo) / span).clamp(0.0, 1.0);
            let g = (255.0 * (1.0 - v)).round() as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{cell:.2}" height="{cell:.2}" fill="rgb({g},{g},{g})"/>"#,
                PAD + j as f64 * cell,
                H - PAD - (i + 1) as f64 * cell,
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("a.txt");
        atomic_write(&p, b"one").unwrap();
        atomic_write(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn hash_is_stable() {
        let a = config_hash(&serde_json::json!({"x": 1})).unwrap();
        assert_eq!(a.len(), 64);
        assert_eq!(a, config_hash(&serde_json::json!({"x": 1})).unwrap());
        assert_ne!(a, config_hash(&serde_json::json!({"x": 2})).unwrap());
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let s = svg_lines("m", &[("a", vec![(0.0, 1.0), (1.0, 2.0)])]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        let h = svg_heatmap("h", 2, &[0.0, 1.0, 2.0, 3.0], false);
        assert_eq!(h.matches("<rect").count(), 5);
    }
}
