use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use cm_revolution::{
    binomial, check_condition, solve_dirichlet, solve_entire, BodyOfRevolution, CmReport, ConvexProfile, Error,
    QuadResult, RadialMeasure, Side, SolveReport, Tolerance, Variant, Witness, ZonalMeasure,
};
use serde::Serialize;

use crate::output::{revolve_obj, write_csv, Num};
use crate::spec::{BodyPreset, Kind, Payload, ProblemSpec, VariantSpec};

pub const EXIT_SOLVED: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_INADMISSIBLE: i32 = 2;
pub const EXIT_INVALID_SPEC: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Solved,
    Inadmissible,
    InvalidSpec,
    Error,
}

#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub kind: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cm: Option<CmOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub body: Option<BodyOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forward: Option<ForwardOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roundtrip: Option<RoundtripOut>,
    pub artifacts: Vec<String>,
}

impl Diagnostics {
    pub fn new(kind: impl Into<String>, status: Status) -> Self {
        Self {
            kind: kind.into(),
            status,
            n: None,
            order: None,
            message: None,
            condition: None,
            profile: None,
            cm: None,
            body: None,
            forward: None,
            roundtrip: None,
            artifacts: Vec::new(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WitnessOut {
    pub r1: Num,
    pub r2: Num,
    pub f1: Num,
    pub f2: Num,
}

impl From<Witness> for WitnessOut {
    fn from(w: Witness) -> Self {
        Self { r1: Num(w.r1), r2: Num(w.r2), f1: Num(w.f1), f2: Num(w.f2) }
    }
}

#[derive(Debug, Serialize)]
pub struct QuadOut {
    pub value: Num,
    pub error_bound: Num,
    pub certified: bool,
    pub truncation_point: Option<Num>,
    pub evaluations: usize,
}

impl From<QuadResult> for QuadOut {
    fn from(q: QuadResult) -> Self {
        Self {
            value: Num(q.value),
            error_bound: Num(q.error_bound),
            certified: q.certified,
            truncation_point: q.truncation_point.map(Num),
            evaluations: q.evaluations,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ConditionOut {
    pub f_non_decreasing: bool,
    pub violation_witness: Option<WitnessOut>,
    /// `(r, F(r))`.
    pub f_samples: Vec<[Num; 2]>,
    pub notes: Vec<String>,
}

impl From<SolveReport> for ConditionOut {
    fn from(r: SolveReport) -> Self {
        Self {
            f_non_decreasing: r.condition_ok,
            violation_witness: r.violation_witness.map(Into::into),
            f_samples: r.f_samples.iter().map(|&(a, b)| [Num(a), Num(b)]).collect(),
            notes: r.diagnostics,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ProfileOut {
    pub value_at_origin: Num,
    pub slope_limit: Num,
    pub radius: Option<Num>,
}

#[derive(Debug, Serialize)]
pub struct CmOut {
    pub admissible: bool,
    pub reasons: Vec<String>,
    pub centroid_defect: Num,
    pub total_mass: Option<Num>,
    pub r_mu: Num,
    pub r_mu_lower: Num,
    pub r_mu_upper: Num,
    pub c_mu: Num,
    pub c_mu_error: Num,
    pub c_mu_equator_term: Num,
    pub c_mu_tail_lower: Option<QuadOut>,
    pub c_mu_tail_upper: Option<QuadOut>,
    pub witness_lower: Option<WitnessOut>,
    pub witness_upper: Option<WitnessOut>,
}

impl From<&CmReport> for CmOut {
    fn from(r: &CmReport) -> Self {
        Self {
            admissible: r.admissible,
            reasons: r.reasons.iter().map(|x| format!("{x:?}")).collect(),
            centroid_defect: Num(r.centroid_defect),
            total_mass: r.total_mass.map(Num),
            r_mu: Num(r.r_mu),
            r_mu_lower: Num(r.r_mu_lower),
            r_mu_upper: Num(r.r_mu_upper),
            c_mu: Num(r.c_mu),
            c_mu_error: Num(r.c_mu_error),
            c_mu_equator_term: Num(r.equator_term),
            c_mu_tail_lower: r.tail_lower.map(Into::into),
            c_mu_tail_upper: r.tail_upper.map(Into::into),
            witness_lower: r.witness_lower.map(Into::into),
            witness_upper: r.witness_upper.map(Into::into),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BodyOut {
    pub r_k: Num,
    pub height: Num,
    pub segment_length: Num,
    pub support_south_pole: Num,
    pub support_north_pole: Num,
}

impl From<&BodyOfRevolution> for BodyOut {
    fn from(b: &BodyOfRevolution) -> Self {
        let (lo, hi) = b.pole_values();
        Self {
            r_k: Num(b.r_k()),
            height: Num(b.height()),
            segment_length: Num(b.segment_length()),
            support_south_pole: Num(lo),
            support_north_pole: Num(hi),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ForwardOut {
    pub variant: String,
    pub j: usize,
    pub equator_mass: Num,
    pub cap_moment_limit_lower: Num,
    pub cap_moment_limit_upper: Num,
}

#[derive(Debug, Serialize)]
pub struct RoundtripOut {
    pub variant: String,
    pub angles: usize,
    pub max_relative_deviation: Num,
    pub max_cap_moment_deviation: Num,
    pub equator_mass_in: Num,
    pub equator_mass_out: Num,
    pub equator_relative_deviation: Num,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Solver(e) => solver_exit_code(e),
            RunError::Io { .. } => EXIT_OTHER,
        }
    }
}

pub fn solver_exit_code(e: &Error) -> i32 {
    match e {
        Error::Inadmissible(_) | Error::ConditionViolated(_) => EXIT_INADMISSIBLE,
        Error::InvalidSpec(_) | Error::DimensionMismatch { .. } | Error::ReferenceDegenerate { .. } => EXIT_INVALID_SPEC,
        Error::BudgetExceeded { .. } | Error::TailNotDecaying { .. } => EXIT_BUDGET,
        _ => EXIT_OTHER,
    }
}

/// Outcome of a run; `diagnostics` is always written, other artifacts only when solved.
pub struct RunResult {
    pub diagnostics: Diagnostics,
    pub exit_code: i32,
}

struct Ctx<'a> {
    spec: &'a ProblemSpec,
    out: &'a Path,
    tol: Tolerance,
    diag: Diagnostics,
}

impl Ctx<'_> {
    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), RunError> {
        let path = self.out.join(name);
        write_csv(&path, header, rows).map_err(|source| RunError::Io { path, source })?;
        self.diag.artifacts.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, body: String) -> Result<(), RunError> {
        let path = self.out.join(name);
        std::fs::write(&path, body).map_err(|source| RunError::Io { path, source })?;
        self.diag.artifacts.push(name.to_string());
        Ok(())
    }

    fn meridian(&mut self, pts: &[(f64, f64)]) -> Result<(), RunError> {
        let rows: Vec<Vec<f64>> = pts.iter().map(|&(r, z)| vec![r, z]).collect();
        self.csv("meridian.csv", &["radius", "height"], &rows)?;
        if self.spec.mesh {
            self.text("mesh.obj", revolve_obj(pts, self.spec.mesh_segments))?;
        }
        Ok(())
    }
}

pub fn run(spec: &ProblemSpec, out: &Path) -> RunResult {
    let mut diag = Diagnostics::new(spec.kind.to_string(), Status::Solved);
    diag.n = Some(spec.n);
    diag.order = Some(spec.order);
    let mut ctx = Ctx { spec, out, tol: spec.tolerance, diag };
    let outcome = match spec.kind {
        Kind::HessianDirichlet | Kind::MixedDirichlet | Kind::MixedEntire => run_radial(&mut ctx),
        Kind::Cm | Kind::BarSj => run_cm(&mut ctx),
        Kind::ForwardBody => run_forward(&mut ctx),
        Kind::Roundtrip => run_roundtrip(&mut ctx),
    };
    let mut diagnostics = ctx.diag;
    let exit_code = match outcome {
        Ok(()) => EXIT_SOLVED,
        Err(e) => {
            let code = e.exit_code();
            diagnostics.status = match code {
                EXIT_INADMISSIBLE => Status::Inadmissible,
                EXIT_INVALID_SPEC => Status::InvalidSpec,
                _ => Status::Error,
            };
            if let RunError::Solver(Error::Inadmissible(report)) = &e {
                diagnostics.cm = Some(report.as_ref().into());
            }
            diagnostics.message = Some(e.to_string());
            code
        }
    };
    RunResult { diagnostics, exit_code }
}

fn radial_measure(spec: &ProblemSpec) -> &RadialMeasure {
    match &spec.payload {
        Payload::Radial(m) => m,
        _ => unreachable!("radial kinds carry a radial payload"),
    }
}

fn zonal_measure(spec: &ProblemSpec) -> &ZonalMeasure {
    match &spec.payload {
        Payload::Zonal(m) => m,
        _ => unreachable!("spherical kinds carry a zonal payload"),
    }
}

fn run_radial(ctx: &mut Ctx) -> Result<(), RunError> {
    let spec = ctx.spec;
    let (n, k) = (spec.n, spec.order);
    let mu = radial_measure(spec);
    let (mu, refs) = match spec.kind {
        Kind::HessianDirichlet => (mu.scale(1.0 / binomial(n, k))?, vec![ConvexProfile::q(n); n - k]),
        _ => (mu.clone(), spec.references.clone()),
    };
    let report = check_condition(&mu, k, &refs)?;
    let witness = report.violation_witness;
    ctx.diag.condition = Some(report.into());
    if let Some(w) = witness {
        return Err(Error::ConditionViolated(w).into());
    }
    let u = match spec.kind {
        Kind::MixedEntire => solve_entire(&mu, k, &refs)?,
        _ => solve_dirichlet(&mu, k, &refs, &ctx.tol)?,
    };
    ctx.diag.profile = Some(ProfileOut {
        value_at_origin: Num(u.v0()),
        slope_limit: Num(u.slope().limit()),
        radius: u.radius().map(Num),
    });

    let top = u.radius().unwrap_or(spec.radius_max);
    let grid = |m: usize| (0..m).map(move |i| top * i as f64 / (m - 1) as f64);
    let mut rows = Vec::with_capacity(spec.samples);
    for r in grid(spec.samples) {
        let q = u.evaluate_with(r, &ctx.tol)?;
        rows.push(vec![r, q.value, q.error_bound]);
    }
    ctx.csv("samples.csv", &["radius", "value", "error_bound"], &rows)?;
    let mut graph = Vec::with_capacity(spec.meridian_samples);
    for r in grid(spec.meridian_samples) {
        graph.push((r, u.evaluate_with(r, &ctx.tol)?.value));
    }
    ctx.meridian(&graph)
}

fn support_samples(ctx: &mut Ctx, body: &BodyOfRevolution) -> Result<(), RunError> {
    let m = ctx.spec.samples;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let theta = if i + 1 == m { FRAC_PI_2 } else { -FRAC_PI_2 + PI * i as f64 / (m - 1) as f64 };
        let (h, err) = body.support_at_angle(theta)?;
        rows.push(vec![theta, h, err]);
    }
    ctx.csv("samples.csv", &["angle", "value", "error_bound"], &rows)?;
    let meridian = body.boundary_meridian(ctx.spec.meridian_samples)?;
    ctx.meridian(&meridian)
}

fn solve_zonal(ctx: &mut Ctx, mu: &ZonalMeasure, variant: Variant) -> Result<BodyOfRevolution, RunError> {
    let j = ctx.spec.order;
    let (body, report) = match variant {
        Variant::AreaMeasure => cm_revolution::solve_cm(mu, j, &ctx.tol)?,
        Variant::DiskMixed => cm_revolution::solve_bar_sj(mu, j, &ctx.tol)?,
    };
    ctx.diag.cm = Some((&report).into());
    ctx.diag.body = Some((&body).into());
    Ok(body)
}

fn run_cm(ctx: &mut Ctx) -> Result<(), RunError> {
    let variant = if ctx.spec.kind == Kind::BarSj { Variant::DiskMixed } else { Variant::AreaMeasure };
    let body = solve_zonal(ctx, zonal_measure(ctx.spec), variant)?;
    support_samples(ctx, &body)
}

fn variant_of(spec: &ProblemSpec) -> Variant {
    match spec.variant {
        VariantSpec::Area => Variant::AreaMeasure,
        VariantSpec::Disk => Variant::DiskMixed,
    }
}

fn variant_name(v: Variant) -> String {
    match v {
        Variant::AreaMeasure => "area".into(),
        Variant::DiskMixed => "disk".into(),
    }
}

pub fn preset_body(n: usize, preset: BodyPreset, tol: &Tolerance) -> cm_revolution::Result<BodyOfRevolution> {
    let (lower, upper, shift) = match preset {
        BodyPreset::Ball { shift } => (ConvexProfile::u_b(n), ConvexProfile::u_b(n), shift),
        BodyPreset::Disk { shift } => (ConvexProfile::abs(n), ConvexProfile::abs(n), shift),
        BodyPreset::Cylinder { length, shift } => (ConvexProfile::abs(n), ConvexProfile::abs(n).with_v0(length), shift),
    };
    Ok(BodyOfRevolution::from_profiles(lower, upper, tol)?.translate(shift))
}

fn angle_grid(m: usize) -> impl Iterator<Item = f64> {
    (1..=m).map(move |i| if i == m { FRAC_PI_2 } else { FRAC_PI_2 * i as f64 / m as f64 })
}

fn run_forward(ctx: &mut Ctx) -> Result<(), RunError> {
    let spec = ctx.spec;
    let Payload::Body(preset) = spec.payload else {
        unreachable!("forward_body carries a body payload")
    };
    let body = preset_body(spec.n, preset, &ctx.tol)?;
    let variant = variant_of(spec);
    let mu = body.measure_of_body(spec.order, variant)?;
    ctx.diag.body = Some((&body).into());
    ctx.diag.forward = Some(ForwardOut {
        variant: variant_name(variant),
        j: spec.order,
        equator_mass: Num(mu.equator_mass()),
        cap_moment_limit_lower: Num(mu.cap_function(Side::Lower).limit()),
        cap_moment_limit_upper: Num(mu.cap_function(Side::Upper).limit()),
    });
    let mut rows = Vec::new();
    for a in angle_grid(spec.roundtrip_angles) {
        rows.push(vec![a, mu.cap_moment(Side::Lower, a)?, mu.cap_moment(Side::Upper, a)?]);
    }
    ctx.csv("cap_moments.csv", &["alpha", "lower", "upper"], &rows)?;
    support_samples(ctx, &body)
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn run_roundtrip(ctx: &mut Ctx) -> Result<(), RunError> {
    let spec = ctx.spec;
    let mu = zonal_measure(spec);
    let variant = variant_of(spec);
    let body = solve_zonal(ctx, mu, variant)?;
    let back = body.measure_of_body(spec.order, variant)?;
    let mut worst_cap: f64 = 0.0;
    let mut rows = Vec::new();
    for a in angle_grid(spec.roundtrip_angles) {
        let mut row = vec![a];
        for side in [Side::Lower, Side::Upper] {
            let (x, y) = (mu.cap_moment(side, a)?, back.cap_moment(side, a)?);
            worst_cap = worst_cap.max(relative(x, y));
            row.extend([x, y]);
        }
        rows.push(row);
    }
    let (e_in, e_out) = (mu.equator_mass(), back.equator_mass());
    let eq_dev = relative(e_in, e_out);
    ctx.diag.roundtrip = Some(RoundtripOut {
        variant: variant_name(variant),
        angles: spec.roundtrip_angles,
        max_relative_deviation: Num(worst_cap.max(eq_dev)),
        max_cap_moment_deviation: Num(worst_cap),
        equator_mass_in: Num(e_in),
        equator_mass_out: Num(e_out),
        equator_relative_deviation: Num(eq_dev),
    });
    ctx.csv("cap_moments.csv", &["alpha", "lower_in", "lower_out", "upper_in", "upper_out"], &rows)?;
    support_samples(ctx, &body)
}
