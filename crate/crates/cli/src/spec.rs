//! Problem spec files.
//!
//! ```toml
//! schema = 1
//! kind = "cm"
//! n = 2
//! j = 1
//!
//! [measure]
//! preset = "area_ball"
//! ```

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::Path;

use cm_revolution::{
    AngularPiece, ConvexProfile, DensityPiece, Expr, PolarData, RadialMeasure, Tolerance, ZonalMeasure,
};
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_ANGLE_SAMPLES: usize = 721;
pub const DEFAULT_RADIUS_SAMPLES: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    HessianDirichlet,
    MixedDirichlet,
    MixedEntire,
    Cm,
    BarSj,
    ForwardBody,
    Roundtrip,
}

impl Kind {
    pub fn is_radial(self) -> bool {
        matches!(self, Kind::HessianDirichlet | Kind::MixedDirichlet | Kind::MixedEntire)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::HessianDirichlet => "hessian_dirichlet",
            Kind::MixedDirichlet => "mixed_dirichlet",
            Kind::MixedEntire => "mixed_entire",
            Kind::Cm => "cm",
            Kind::BarSj => "bar_sj",
            Kind::ForwardBody => "forward_body",
            Kind::Roundtrip => "roundtrip",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VariantSpec {
    #[default]
    Area,
    Disk,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    pub schema: u32,
    pub kind: Kind,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub j: Option<usize>,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    #[serde(default)]
    pub variant: VariantSpec,
    pub measure: Option<MeasureSpec>,
    pub body: Option<BodySpec>,
    #[serde(default)]
    pub references: Vec<String>,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub preset: Option<String>,
    /// Cylinder length.
    pub length: Option<f64>,
    /// Origin-atom preset mass.
    pub mass: Option<f64>,

    /// Zonal: `[polar angle, mass]`.
    pub atoms: Option<Vec<[f64; 2]>>,
    /// Zonal: `Σ c cos^p θ` on `[start, end]`.
    pub density: Option<Vec<AngularPieceSpec>>,

    pub origin_atom: Option<f64>,
    /// Radial: `[radius, mass]`.
    pub sphere_atoms: Option<Vec<[f64; 2]>>,
    /// Radial: `f(x) = Σ c |x|^a` on `(previous end, end]`.
    pub spatial_density: Option<Vec<PowerPieceSpec>>,
    /// Radial: `ρ(r) = Σ c r^a`, mass per unit radius.
    pub radial_density: Option<Vec<PowerPieceSpec>>,
    pub cumulative: Option<TableSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularPieceSpec {
    pub start: f64,
    pub end: f64,
    pub terms: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerPieceSpec {
    pub end: f64,
    pub terms: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub radii: Vec<f64>,
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub preset: String,
    pub length: Option<f64>,
    /// Translation along the axis.
    #[serde(default)]
    pub shift: f64,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub tail_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub samples: Option<usize>,
    pub meridian_samples: Option<usize>,
    pub mesh: Option<bool>,
    pub mesh_segments: Option<usize>,
    /// Largest sampled radius for entire problems.
    pub radius_max: Option<f64>,
    /// Number of cap angles compared by a round trip.
    pub roundtrip_angles: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum Payload {
    Radial(RadialMeasure),
    Zonal(ZonalMeasure),
    Body(BodyPreset),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BodyPreset {
    Ball { shift: f64 },
    Disk { shift: f64 },
    Cylinder { length: f64, shift: f64 },
}

/// A validated spec.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub kind: Kind,
    pub n: usize,
    /// `k` for the radial problems, `j` for the others.
    pub order: usize,
    pub variant: VariantSpec,
    pub payload: Payload,
    pub references: Vec<ConvexProfile>,
    pub tolerance: Tolerance,
    pub samples: usize,
    pub meridian_samples: usize,
    pub mesh: bool,
    pub mesh_segments: usize,
    pub radius_max: f64,
    pub roundtrip_angles: usize,
}

#[derive(Debug)]
pub struct SpecError {
    pub violations: Vec<String>,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for SpecError {}

pub fn parse_file(path: &Path) -> Result<ProblemSpec, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|e| SpecError {
        violations: vec![format!("{}: {e}", path.display())],
    })?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<ProblemSpec, SpecError> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| SpecError {
        violations: vec![e.to_string().trim_end().to_string()],
    })?;
    let mut v = Violations { text, list: Vec::new() };
    let spec = validate(&raw, &mut v);
    match spec {
        Some(s) if v.list.is_empty() => Ok(s),
        _ => Err(SpecError { violations: v.list }),
    }
}

struct Violations<'a> {
    text: &'a str,
    list: Vec<String>,
}

impl Violations<'_> {
    /// Records a violation, located at the first line assigning `field`.
    fn push(&mut self, field: &str, msg: impl fmt::Display) {
        let line = self.text.lines().position(|l| {
            let l = l.trim_start();
            l.strip_prefix(field).is_some_and(|rest| rest.trim_start().starts_with('='))
                || l.strip_prefix('[').and_then(|r| r.strip_prefix(field)).is_some_and(|r| r.starts_with(']'))
        });
        match line {
            Some(i) => self.list.push(format!("line {}: `{field}`: {msg}", i + 1)),
            None => self.list.push(format!("`{field}`: {msg}")),
        }
    }
}

fn validate(raw: &RawSpec, v: &mut Violations) -> Option<ProblemSpec> {
    if raw.schema != SCHEMA_VERSION {
        v.push("schema", format!("unsupported schema version {} (expected {SCHEMA_VERSION})", raw.schema));
    }
    let kind = raw.kind;
    let n = match raw.n {
        Some(0) => {
            v.push("n", "dimension must be at least 1");
            None
        }
        Some(n) => Some(n),
        None => {
            v.push("n", format!("required for kind {kind}"));
            None
        }
    };

    let (order_name, order) = if kind.is_radial() { ("k", raw.k) } else { ("j", raw.j) };
    let stray = if kind.is_radial() { raw.j.map(|_| "j") } else { raw.k.map(|_| "k") };
    if let Some(f) = stray {
        v.push(f, format!("not used by kind {kind}; use `{order_name}`"));
    }
    let order = match (order, n) {
        (None, _) => {
            v.push(order_name, format!("required for kind {kind}"));
            None
        }
        (Some(o), Some(n)) if o == 0 || o > n => {
            v.push(order_name, format!("must lie in [1, {n}], got {o}"));
            None
        }
        (o, _) => o,
    };

    let radius = match (kind, raw.radius) {
        (Kind::HessianDirichlet | Kind::MixedDirichlet, None) => {
            v.push("R", format!("required for kind {kind}"));
            None
        }
        (Kind::HessianDirichlet | Kind::MixedDirichlet, Some(r)) if !(r > 0.0 && r.is_finite()) => {
            v.push("R", format!("must be positive and finite, got {r}"));
            None
        }
        (Kind::HessianDirichlet | Kind::MixedDirichlet, Some(r)) => Some(r),
        (_, Some(_)) => {
            v.push("R", format!("not used by kind {kind}"));
            None
        }
        (_, None) => None,
    };

    let tolerance = tolerance_from(&raw.tolerance, v);

    let references = match (kind, n, order) {
        (Kind::MixedDirichlet | Kind::MixedEntire, Some(n), Some(k)) => {
            if raw.references.len() != n - k {
                v.push(
                    "references",
                    format!("kind {kind} needs n - k = {} reference profiles, got {}", n - k, raw.references.len()),
                );
            }
            raw.references
                .iter()
                .filter_map(|name| match name.as_str() {
                    "q" => Some(ConvexProfile::q(n)),
                    "abs" => Some(ConvexProfile::abs(n)),
                    "u_b" => Some(ConvexProfile::u_b(n)),
                    other => {
                        v.push("references", format!("unknown profile {other:?} (expected q, abs or u_b)"));
                        None
                    }
                })
                .collect()
        }
        (Kind::MixedDirichlet | Kind::MixedEntire, _, _) => Vec::new(),
        _ => {
            if !raw.references.is_empty() {
                v.push("references", format!("not used by kind {kind}"));
            }
            Vec::new()
        }
    };

    if raw.variant != VariantSpec::Area && !matches!(kind, Kind::Roundtrip | Kind::ForwardBody) {
        v.push("variant", "only used by kinds roundtrip and forward_body");
    }

    let payload = match (n, order) {
        (Some(n), Some(order)) => payload_from(raw, n, order, radius, v),
        _ => None,
    };

    let out = &raw.output;
    let samples = out.samples.unwrap_or(if kind.is_radial() {
        DEFAULT_RADIUS_SAMPLES
    } else {
        DEFAULT_ANGLE_SAMPLES
    });
    if samples < 2 {
        v.push("samples", "at least two samples are required");
    }
    let meridian_samples = out.meridian_samples.unwrap_or(181);
    if meridian_samples < 2 {
        v.push("meridian_samples", "at least two samples are required");
    }
    let mesh_segments = out.mesh_segments.unwrap_or(64);
    if mesh_segments < 3 {
        v.push("mesh_segments", "at least three segments are required");
    }
    let radius_max = out.radius_max.unwrap_or(10.0);
    if !(radius_max > 0.0 && radius_max.is_finite()) {
        v.push("radius_max", format!("must be positive and finite, got {radius_max}"));
    }
    let roundtrip_angles = out.roundtrip_angles.unwrap_or(90);
    if roundtrip_angles < 1 {
        v.push("roundtrip_angles", "at least one angle is required");
    }

    Some(ProblemSpec {
        kind,
        n: n?,
        order: order?,
        variant: raw.variant,
        payload: payload?,
        references,
        tolerance: tolerance?,
        samples,
        meridian_samples,
        mesh: out.mesh.unwrap_or(false),
        mesh_segments,
        radius_max,
        roundtrip_angles,
    })
}

fn tolerance_from(t: &ToleranceSpec, v: &mut Violations) -> Option<Tolerance> {
    let d = Tolerance::default();
    let mut ok = true;
    let mut pick = |name: &str, x: Option<f64>, default: f64| -> f64 {
        let x = x.unwrap_or(default);
        if !(x > 0.0 && x.is_finite()) {
            v.push(name, format!("must be positive and finite, got {x}"));
            ok = false;
        }
        x
    };
    let abs_tol = pick("abs_tol", t.abs_tol, d.abs_tol);
    let rel_tol = pick("rel_tol", t.rel_tol, d.rel_tol);
    let tail_tol = pick("tail_tol", t.tail_tol, d.tail_tol);
    let max_subdivisions = t.max_subdivisions.unwrap_or(d.max_subdivisions);
    if max_subdivisions == 0 {
        v.push("max_subdivisions", "must be at least 1");
        ok = false;
    }
    ok.then_some(Tolerance { abs_tol, rel_tol, tail_tol, max_subdivisions })
}

fn has_radial_fields(m: &MeasureSpec) -> bool {
    m.origin_atom.is_some()
        || m.sphere_atoms.is_some()
        || m.spatial_density.is_some()
        || m.radial_density.is_some()
        || m.cumulative.is_some()
}

fn has_zonal_fields(m: &MeasureSpec) -> bool {
    m.atoms.is_some() || m.density.is_some()
}

fn payload_from(raw: &RawSpec, n: usize, order: usize, radius: Option<f64>, v: &mut Violations) -> Option<Payload> {
    if raw.kind == Kind::ForwardBody {
        if raw.measure.is_some() {
            v.push("measure", "kind forward_body takes a [body], not a [measure]");
        }
        let Some(b) = &raw.body else {
            v.push("body", "required for kind forward_body");
            return None;
        };
        return body_from(b, v).map(Payload::Body);
    }
    if raw.body.is_some() {
        v.push("body", format!("not used by kind {}", raw.kind));
    }
    let Some(m) = &raw.measure else {
        v.push("measure", format!("required for kind {}", raw.kind));
        return None;
    };
    if raw.kind.is_radial() {
        radial_from(m, n, radius, v).map(Payload::Radial)
    } else {
        zonal_from(m, n, order, v).map(Payload::Zonal)
    }
}

fn body_from(b: &BodySpec, v: &mut Violations) -> Option<BodyPreset> {
    if !b.shift.is_finite() {
        v.push("shift", "must be finite");
        return None;
    }
    let shift = b.shift;
    match (b.preset.as_str(), b.length) {
        ("ball", None) => Some(BodyPreset::Ball { shift }),
        ("disk", None) => Some(BodyPreset::Disk { shift }),
        ("cylinder", Some(length)) if length >= 0.0 && length.is_finite() => Some(BodyPreset::Cylinder { length, shift }),
        ("cylinder", Some(length)) => {
            v.push("length", format!("must be non-negative and finite, got {length}"));
            None
        }
        ("cylinder", None) => {
            v.push("length", "required by the cylinder body");
            None
        }
        ("ball" | "disk", Some(_)) => {
            v.push("length", format!("not used by the {} body", b.preset));
            None
        }
        (other, _) => {
            v.push("preset", format!("unknown body {other:?} (expected ball, disk or cylinder)"));
            None
        }
    }
}

fn check_terms(field: &str, terms: &[[f64; 2]], v: &mut Violations) -> bool {
    let mut ok = true;
    for &[c, e] in terms {
        if !(c.is_finite() && e.is_finite()) {
            v.push(field, format!("term [{c}, {e}] is not finite"));
            ok = false;
        } else if c < 0.0 {
            v.push(field, format!("coefficient {c} is negative"));
            ok = false;
        }
    }
    ok
}

fn radial_from(m: &MeasureSpec, n: usize, radius: Option<f64>, v: &mut Violations) -> Option<RadialMeasure> {
    if has_zonal_fields(m) {
        v.push("measure", "`atoms` and `density` describe zonal measures; radial problems use `sphere_atoms`, `spatial_density`, `radial_density` or `cumulative`");
        return None;
    }
    if let Some(p) = &m.preset {
        if has_radial_fields(m) {
            v.push("preset", "a preset cannot be combined with explicit measure fields");
            return None;
        }
        if m.length.is_some() {
            v.push("length", "only used by the cylinder preset");
        }
        let built = match p.as_str() {
            "lebesgue" => {
                if m.mass.is_some() {
                    v.push("mass", "only used by the origin_atom preset");
                }
                RadialMeasure::lebesgue(n, radius)
            }
            "origin_atom" => {
                let mass = m.mass.unwrap_or(1.0);
                if !(mass >= 0.0 && mass.is_finite()) {
                    v.push("mass", format!("atom mass must be non-negative, got {mass}"));
                    return None;
                }
                RadialMeasure::origin_atom_measure(n, radius, mass)
            }
            "area_ball" | "area_disk" | "cylinder" => {
                v.push("preset", format!("{p} is a spherical measure; radial problems take lebesgue or origin_atom"));
                return None;
            }
            other => {
                v.push("preset", format!("unknown preset {other:?}"));
                return None;
            }
        };
        return library(built, "preset", v);
    }
    if m.mass.is_some() || m.length.is_some() {
        v.push("measure", "`mass` and `length` are preset parameters");
    }
    if m.cumulative.is_some() && (m.origin_atom.is_some() || m.sphere_atoms.is_some() || m.spatial_density.is_some() || m.radial_density.is_some()) {
        v.push("cumulative", "a cumulative table cannot be combined with other measure fields");
        return None;
    }
    if m.spatial_density.is_some() && m.radial_density.is_some() {
        v.push("spatial_density", "give either `spatial_density` or `radial_density`, not both");
        return None;
    }
    if let Some(t) = &m.cumulative {
        if t.masses.iter().any(|&x| x < 0.0) {
            v.push("masses", "cumulative masses must be non-negative");
            return None;
        }
        return library(RadialMeasure::from_cumulative_table(n, radius, t.radii.clone(), t.masses.clone()), "cumulative", v);
    }

    let mut ok = true;
    let origin = m.origin_atom.unwrap_or(0.0);
    if !(origin >= 0.0 && origin.is_finite()) {
        v.push("origin_atom", format!("atom mass must be non-negative, got {origin}"));
        ok = false;
    }
    let atoms: Vec<(f64, f64)> = m.sphere_atoms.iter().flatten().map(|a| (a[0], a[1])).collect();
    for &(r, mass) in &atoms {
        if !(mass >= 0.0 && mass.is_finite()) {
            v.push("sphere_atoms", format!("atom mass must be non-negative, got {mass}"));
            ok = false;
        }
        if !(r > 0.0 && r.is_finite()) {
            v.push("sphere_atoms", format!("atom radius must be positive, got {r}"));
            ok = false;
        }
    }
    let nf = n as f64;
    let kappa = cm_revolution::unit_ball_volume(n);
    let mut density = Vec::new();
    let (field, pieces, spatial) = match (&m.spatial_density, &m.radial_density) {
        (Some(p), _) => ("spatial_density", p.as_slice(), true),
        (None, Some(p)) => ("radial_density", p.as_slice(), false),
        (None, None) => ("radial_density", &[][..], false),
    };
    for piece in pieces {
        ok &= check_terms(field, &piece.terms, v);
        let terms = piece
            .terms
            .iter()
            .map(|&[c, a]| {
                if spatial {
                    Expr::mono(nf * kappa * c, a + nf - 1.0, 0.0)
                } else {
                    Expr::mono(c, a, 0.0)
                }
            })
            .collect();
        density.push(DensityPiece { end: piece.end, density: Expr::sum(terms) });
    }
    if !ok {
        return None;
    }
    library(RadialMeasure::from_parts(n, radius, origin, &atoms, &density), "measure", v)
}

fn zonal_from(m: &MeasureSpec, n: usize, j: usize, v: &mut Violations) -> Option<ZonalMeasure> {
    if has_radial_fields(m) {
        v.push("measure", "radial measure fields are not used by spherical problems; use `atoms` and `density`");
        return None;
    }
    if let Some(p) = &m.preset {
        if has_zonal_fields(m) {
            v.push("preset", "a preset cannot be combined with explicit measure fields");
            return None;
        }
        if m.mass.is_some() {
            v.push("mass", "only used by the origin_atom preset");
        }
        if m.length.is_some() && p != "cylinder" {
            v.push("length", "only used by the cylinder preset");
        }
        let built = match p.as_str() {
            "area_ball" => ZonalMeasure::area_ball(n),
            "area_disk" => ZonalMeasure::area_disk(n, j),
            "cylinder" => match m.length {
                Some(l) if l >= 0.0 && l.is_finite() => ZonalMeasure::cylinder(n, j, l),
                Some(l) => {
                    v.push("length", format!("must be non-negative and finite, got {l}"));
                    return None;
                }
                None => {
                    v.push("length", "required by the cylinder preset");
                    return None;
                }
            },
            "lebesgue" | "origin_atom" => {
                v.push("preset", format!("{p} is a radial measure; spherical problems take area_ball, area_disk or cylinder"));
                return None;
            }
            other => {
                v.push("preset", format!("unknown preset {other:?}"));
                return None;
            }
        };
        return library(built, "preset", v);
    }
    if m.mass.is_some() || m.length.is_some() {
        v.push("measure", "`mass` and `length` are preset parameters");
    }
    let mut ok = true;
    let mut polar = PolarData::default();
    for &[t, mass] in m.atoms.iter().flatten() {
        if !(mass >= 0.0 && mass.is_finite()) {
            v.push("atoms", format!("atom mass must be non-negative, got {mass}"));
            ok = false;
        }
        if !(t.abs() <= FRAC_PI_2) {
            v.push("atoms", format!("polar angle {t} must lie in [-π/2, π/2]"));
            ok = false;
        }
        polar.atoms.push((t, mass));
    }
    for piece in m.density.iter().flatten() {
        ok &= check_terms("terms", &piece.terms, v);
        polar.density.push(AngularPiece {
            start: piece.start,
            end: piece.end,
            terms: piece.terms.iter().map(|&[c, p]| (c, p)).collect(),
        });
    }
    if !ok {
        return None;
    }
    library(ZonalMeasure::from_polar(n, polar), "measure", v)
}

fn library<T>(r: cm_revolution::Result<T>, field: &str, v: &mut Violations) -> Option<T> {
    match r {
        Ok(x) => Some(x),
        Err(e) => {
            v.push(field, e);
            None
        }
    }
}
