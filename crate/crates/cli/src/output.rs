//! Text artifacts. Every number is written with 17 significant digits.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        // keeps -0 and +0 byte-identical across runs
        "0.0000000000000000e0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// A float serialised with 17 significant digits, or `null` when not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(fmt_num(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_num(*x));
        }
        out.push('\n');
    }
    std::fs::write(path, out)
}

/// Surface swept by revolving a `(radius, height)` polyline about the vertical axis.
pub fn revolve_obj(meridian: &[(f64, f64)], segments: usize) -> String {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(meridian.len());
    for &p in meridian {
        if pts.last().is_none_or(|q: &(f64, f64)| (q.0 - p.0).abs() > 1e-12 || (q.1 - p.1).abs() > 1e-12) {
            pts.push(p);
        }
    }
    let mut out = String::new();
    // ring[i] = (first vertex index, vertex count), 1-based like OBJ
    let mut rings: Vec<(usize, usize)> = Vec::with_capacity(pts.len());
    let mut next = 1;
    for &(r, z) in &pts {
        if r.abs() <= 1e-12 {
            let _ = writeln!(out, "v {} {} {}", fmt_num(0.0), fmt_num(0.0), fmt_num(z));
            rings.push((next, 1));
            next += 1;
        } else {
            for s in 0..segments {
                let phi = std::f64::consts::TAU * s as f64 / segments as f64;
                let _ = writeln!(out, "v {} {} {}", fmt_num(r * phi.cos()), fmt_num(r * phi.sin()), fmt_num(z));
            }
            rings.push((next, segments));
            next += segments;
        }
    }
    for w in rings.windows(2) {
        let (a, na) = w[0];
        let (b, nb) = w[1];
        for s in 0..segments {
            let t = (s + 1) % segments;
            match (na, nb) {
                (1, 1) => {}
                (1, _) => {
                    let _ = writeln!(out, "f {} {} {}", a, b + s, b + t);
                }
                (_, 1) => {
                    let _ = writeln!(out, "f {} {} {}", a + s, b, a + t);
                }
                _ => {
                    let _ = writeln!(out, "f {} {} {}", a + s, b + s, b + t);
                    let _ = writeln!(out, "f {} {} {}", a + s, b + t, a + t);
                }
            }
        }
    }
    out
}
