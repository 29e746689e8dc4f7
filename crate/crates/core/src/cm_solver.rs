//! Reconstruction of convex bodies of revolution from their area measures, and the forward map
//! from a body back to its cap moments and equator mass.

use std::f64::consts::FRAC_PI_2;

use crate::convex_profile::ConvexProfile;
use crate::error::{Error, Result, Witness};
use crate::expr::Expr;
use crate::ma_solver::solve_entire;
use crate::numerics::{unit_ball_volume, QuadResult, Tolerance};
use crate::piecewise::LeftMonotoneFn;
use crate::zonal_measure::{CapMomentProfile, Side, ZonalMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    NotFinite,
    NotCentered,
    FTrivial,
    FNotMonotone,
}

/// Which family of area measures is prescribed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `S_j(K, ·)`, mixed with the unit ball.
    AreaMeasure,
    /// `S(K[j], disk[n-j], ·)`, mixed with the unit disk in `e_{n+1}^⊥`.
    DiskMixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmReport {
    pub admissible: bool,
    pub reasons: Vec<Reason>,
    pub centroid_defect: f64,
    pub total_mass: Option<f64>,
    pub r_mu_lower: f64,
    pub r_mu_upper: f64,
    pub r_mu: f64,
    pub c_mu: f64,
    pub c_mu_error: f64,
    pub equator_term: f64,
    pub tail_lower: Option<QuadResult>,
    pub tail_upper: Option<QuadResult>,
    pub witness_lower: Option<Witness>,
    pub witness_upper: Option<Witness>,
}

impl CmReport {
    fn empty() -> Self {
        Self {
            admissible: false,
            reasons: Vec::new(),
            centroid_defect: 0.0,
            total_mass: None,
            r_mu_lower: f64::NAN,
            r_mu_upper: f64::NAN,
            r_mu: f64::NAN,
            c_mu: f64::NAN,
            c_mu_error: f64::NAN,
            equator_term: f64::NAN,
            tail_lower: None,
            tail_upper: None,
            witness_lower: None,
            witness_upper: None,
        }
    }
}

/// A convex body of revolution about the `e_{n+1}` axis in `R^{n+1}`.
///
/// On the southern hemisphere `h_K(z) = |z_{n+1}| lower(gn z)`, on the northern one
/// `h_K(z) = |z_{n+1}| upper(gn z)`, and `h_K = R_K` on the equator.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyOfRevolution {
    n: usize,
    r_k: f64,
    lower: ConvexProfile,
    upper: ConvexProfile,
    height: f64,
    segment: f64,
    lower_cap: f64,
    upper_cap: f64,
    /// Quadrature error carried by `h(e)`.
    height_error: f64,
    tol: Tolerance,
}

impl BodyOfRevolution {
    /// Body from the two entire support-function restrictions; `lower(0) = h(-e)`,
    /// `upper(0) = h(e)`, and both slopes must tend to the same radius.
    pub fn from_profiles(lower: ConvexProfile, upper: ConvexProfile, tol: &Tolerance) -> Result<Self> {
        let n = lower.dimension();
        if upper.dimension() != n {
            return Err(Error::DimensionMismatch { expected: n, found: upper.dimension() });
        }
        if lower.radius().is_some() || upper.radius().is_some() {
            return Err(Error::InvalidSpec("body profiles must be entire".into()));
        }
        let r_lo = lower.slope().limit();
        let r_hi = upper.slope().limit();
        if !(r_lo.is_finite() && r_hi.is_finite()) || (r_lo - r_hi).abs() > 1e-10 * (1.0 + r_lo) {
            return Err(Error::InvalidSpec(format!("profile slopes tend to different radii {r_lo} and {r_hi}")));
        }
        if r_lo <= 0.0 {
            return Err(Error::DegenerateBody);
        }
        let lower_cap = lower.slope().tail_integral(0.0, tol)?.value - lower.v0();
        let upper_cap = upper.slope().tail_integral(0.0, tol)?.value - upper.v0();
        let height = lower.v0() + upper.v0();
        // heights of the boundary at radius R_K: lower_cap from below, -upper_cap from above
        let span = -(lower_cap + upper_cap);
        let segment = if span < 1e-12 { 0.0 } else { span };
        Ok(Self {
            n,
            r_k: r_lo,
            lower,
            upper,
            height,
            segment,
            lower_cap,
            upper_cap,
            height_error: 0.0,
            tol: *tol,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn r_k(&self) -> f64 {
        self.r_k
    }

    pub fn lower(&self) -> &ConvexProfile {
        &self.lower
    }

    pub fn upper(&self) -> &ConvexProfile {
        &self.upper
    }

    /// Length of the projection onto the axis.
    pub fn height(&self) -> f64 {
        self.height
    }

    /// Length of the vertical boundary segment at radius `R_K`.
    pub fn segment_length(&self) -> f64 {
        self.segment
    }

    /// `h_K(-e_{n+1})` and `h_K(e_{n+1})`.
    pub fn pole_values(&self) -> (f64, f64) {
        (self.lower.v0(), self.upper.v0())
    }

    /// `K + τ e_{n+1}`.
    pub fn translate(&self, tau: f64) -> Self {
        Self {
            lower: self.lower.with_v0(self.lower.v0() - tau),
            upper: self.upper.with_v0(self.upper.v0() + tau),
            ..self.clone()
        }
    }

    /// Support function at a unit vector `z ∈ S^n ⊂ R^{n+1}`.
    pub fn support_function(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.n + 1 {
            return Err(Error::DimensionMismatch { expected: self.n + 1, found: z.len() });
        }
        let t = z[self.n];
        let horizontal = z[..self.n].iter().map(|x| x * x).sum::<f64>().sqrt();
        self.support_at(horizontal, t)
    }

    /// Support function at `(ρ, t)` with `ρ = |(z_1, ..., z_n)|`, extended 1-homogeneously.
    pub fn support_at(&self, rho: f64, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(self.r_k * rho);
        }
        let profile = if t < 0.0 { &self.lower } else { &self.upper };
        let a = t.abs();
        Ok(a * profile.evaluate_with(rho / a, &self.tol)?.value)
    }

    /// Support function at polar angle `θ` (`z_{n+1} = sin θ`), with error bound.
    pub fn support_at_angle(&self, theta: f64) -> Result<(f64, f64)> {
        let t = theta.sin();
        if theta == 0.0 || t == 0.0 {
            return Ok((self.r_k, 0.0));
        }
        let profile = if t < 0.0 { &self.lower } else { &self.upper };
        let a = t.abs();
        let rho = theta.cos().max(0.0);
        let q = profile.evaluate_with(rho / a, &self.tol)?;
        let carried = if t > 0.0 { self.height_error } else { 0.0 };
        Ok((a * q.value, a * (q.error_bound + carried)))
    }

    fn profile(&self, side: Side) -> &ConvexProfile {
        match side {
            Side::Lower => &self.lower,
            Side::Upper => &self.upper,
        }
    }

    fn slope_power(&self, side: Side, alpha: f64, j: usize) -> Result<f64> {
        if self.r_k <= 0.0 {
            return Err(Error::DegenerateBody);
        }
        if !(alpha > 0.0 && alpha <= FRAC_PI_2) {
            return Err(Error::OutOfDomain { r: alpha, domain: FRAC_PI_2 });
        }
        let p = self.profile(side).slope();
        let v = if alpha == FRAC_PI_2 { p.limit() } else { p.eval(alpha.tan()) };
        Ok(v.powi(j as i32))
    }

    /// `∫_{C_α^±} |z_{n+1}| dS_j(K, z) = κ_n p(tan α)^j sin(α)^{n-j}`.
    pub fn forward_cap_moment(&self, j: usize, side: Side, alpha: f64) -> Result<f64> {
        let pj = self.slope_power(side, alpha, j)?;
        Ok(unit_ball_volume(self.n) * pj * alpha.sin().powi((self.n - j) as i32))
    }

    /// Same for the disk-mixed measures: `κ_n p(tan α)^j`.
    pub fn forward_cap_moment_disk(&self, j: usize, side: Side, alpha: f64) -> Result<f64> {
        Ok(unit_ball_volume(self.n) * self.slope_power(side, alpha, j)?)
    }

    /// `S_j(K, S^n_o) = j κ_n ℓ R_K^{j-1}`.
    pub fn forward_equator_mass(&self, j: usize) -> f64 {
        if self.r_k <= 0.0 || self.segment == 0.0 {
            return 0.0;
        }
        let radial = if j == 1 { 1.0 } else { self.r_k.powi(j as i32 - 1) };
        j as f64 * unit_ball_volume(self.n) * self.segment * radial
    }

    /// Cap moments and equator mass of `S_j(K, ·)` (or of the disk-mixed measure).
    pub fn measure_of_body(&self, j: usize, variant: Variant) -> Result<ZonalMeasure> {
        if j == 0 || j > self.n {
            return Err(Error::InvalidSpec(format!("order j = {j} must lie in [1, {}]", self.n)));
        }
        if self.r_k <= 0.0 {
            return Err(Error::DegenerateBody);
        }
        let kappa = unit_ball_volume(self.n);
        let m = (self.n - j) as f64;
        let build = |u: &ConvexProfile| -> Result<LeftMonotoneFn> {
            let pw = u.slope().piecewise().map(|p| {
                let mut factors = vec![Expr::constant(kappa), p.clone().pow(j as f64)];
                if variant == Variant::AreaMeasure {
                    factors.push(Expr::mono(1.0, m, -m / 2.0));
                }
                Expr::prod(factors)
            });
            LeftMonotoneFn::try_from_piecewise(pw, "forward cap moment")
        };
        ZonalMeasure::from_cap_moments(self.n, build(&self.lower)?, build(&self.upper)?, self.forward_equator_mass(j))
    }

    /// Meridian of `∂K` in the `(radius, height)` half-plane, from the lower pole up the lower
    /// arc, along the vertical segment and back over the upper arc.
    pub fn boundary_meridian(&self, samples: usize) -> Result<Vec<(f64, f64)>> {
        if samples < 2 {
            return Err(Error::InvalidSpec("meridian needs at least two samples per arc".into()));
        }
        if self.r_k <= 0.0 {
            return Err(Error::DegenerateBody);
        }
        let lower = self.lower.legendre(&self.tol)?;
        let upper = self.upper.legendre(&self.tol)?;
        let mut pts = Vec::with_capacity(2 * samples);
        for i in 0..samples {
            let phi = FRAC_PI_2 * i as f64 / (samples - 1) as f64;
            let s = if i + 1 == samples { self.r_k } else { self.r_k * phi.sin() };
            pts.push((s, lower.eval(s)?));
        }
        for i in (0..samples).rev() {
            let phi = FRAC_PI_2 * i as f64 / (samples - 1) as f64;
            let s = if i + 1 == samples { self.r_k } else { self.r_k * phi.sin() };
            pts.push((s, -upper.eval(s)?));
        }
        Ok(pts)
    }
}

fn radius_from(g_total: f64, kappa: f64, j: usize) -> f64 {
    (g_total / kappa).powf(1.0 / j as f64)
}

fn cap_profile(mu: &ZonalMeasure, side: Side, j: usize, variant: Variant) -> Result<CapMomentProfile> {
    match variant {
        Variant::AreaMeasure => mu.f_profile(side, j),
        Variant::DiskMixed => mu.g_profile(side, j),
    }
}

fn solve_variant(mu: &ZonalMeasure, j: usize, variant: Variant, tol: &Tolerance) -> Result<(BodyOfRevolution, CmReport)> {
    let n = mu.dimension();
    if j == 0 || j > n {
        return Err(Error::InvalidSpec(format!("order j = {j} must lie in [1, {n}]")));
    }
    let kappa = unit_ball_volume(n);
    let mut report = CmReport::empty();

    let total = mu.total_mass(tol);
    match total {
        Ok(t) => report.total_mass = Some(t),
        Err(Error::TailNotDecaying { .. }) | Err(Error::NonFinite { .. }) => report.reasons.push(Reason::NotFinite),
        Err(e) => return Err(e),
    }
    let g_lo = mu.cap_function(Side::Lower).limit();
    let g_hi = mu.cap_function(Side::Upper).limit();
    report.centroid_defect = g_hi - g_lo;
    let scale = report.total_mass.unwrap_or(g_lo + g_hi);
    if !(report.centroid_defect.abs() <= 1e-10 * (scale + 1.0)) {
        report.reasons.push(Reason::NotCentered);
    }

    let f_lo = cap_profile(mu, Side::Lower, j, variant)?;
    let f_hi = cap_profile(mu, Side::Upper, j, variant)?;
    if !(f_lo.non_trivial && f_hi.non_trivial) {
        report.reasons.push(Reason::FTrivial);
    }
    if !(f_lo.non_decreasing && f_hi.non_decreasing) {
        report.reasons.push(Reason::FNotMonotone);
    }
    report.witness_lower = f_lo.witness;
    report.witness_upper = f_hi.witness;
    report.r_mu_lower = radius_from(f_lo.f.limit(), kappa, j);
    report.r_mu_upper = radius_from(f_hi.f.limit(), kappa, j);
    report.r_mu = report.r_mu_lower;

    if !report.reasons.is_empty() {
        return Err(Error::Inadmissible(Box::new(report)));
    }

    let refs = match variant {
        Variant::AreaMeasure => vec![ConvexProfile::u_b(n); n - j],
        Variant::DiskMixed => vec![ConvexProfile::abs(n); n - j],
    };
    let solve_side = |side: Side| -> Result<ConvexProfile> {
        let eta = mu.pushforward_to_radial(side)?;
        solve_entire(&eta, j, &refs)
    };
    let lower = solve_side(Side::Lower)?;
    let upper = solve_side(Side::Upper)?;

    let c = compute_c_mu(mu.equator_mass(), j, n, &lower, &upper, tol, &mut report)?;
    report.admissible = true;

    let upper = upper.with_v0(c);
    let mut body = BodyOfRevolution::from_profiles(lower, upper, tol)?;
    body.height_error = report.c_mu_error;
    Ok((body, report))
}

/// `c_μ = μ(S^n_o)/(j κ_n R^{j-1}) + ∫_0^∞ (R - p^-) + ∫_0^∞ (R - p^+)`.
pub fn compute_c_mu(
    equator: f64,
    j: usize,
    n: usize,
    lower: &ConvexProfile,
    upper: &ConvexProfile,
    tol: &Tolerance,
    report: &mut CmReport,
) -> Result<f64> {
    let kappa = unit_ball_volume(n);
    let r = lower.slope().limit();
    let radial = if j == 1 { 1.0 } else { r.powi(j as i32 - 1) };
    let equator_term = equator / (j as f64 * kappa * radial);
    let t_lo = lower.slope().tail_integral(0.0, tol)?;
    let t_hi = upper.slope().tail_integral(0.0, tol)?;
    let c = equator_term + t_lo.value + t_hi.value;
    report.equator_term = equator_term;
    report.c_mu = c;
    report.c_mu_error = t_lo.error_bound + t_hi.error_bound;
    report.tail_lower = Some(t_lo);
    report.tail_upper = Some(t_hi);
    Ok(c)
}

/// Body whose `j`-th area measure is `μ`, normalised so that `h_K(-e_{n+1}) = 0`.
pub fn solve_cm(mu: &ZonalMeasure, j: usize, tol: &Tolerance) -> Result<(BodyOfRevolution, CmReport)> {
    solve_variant(mu, j, Variant::AreaMeasure, tol)
}

/// Body whose `j`-th disk-mixed area measure is `μ`.
pub fn solve_bar_sj(mu: &ZonalMeasure, j: usize, tol: &Tolerance) -> Result<(BodyOfRevolution, CmReport)> {
    solve_variant(mu, j, Variant::DiskMixed, tol)
}
