//! SO(n)-invariant measures on the sphere `S^n ⊂ R^{n+1}`.
//!
//! A zonal measure is determined by its two cap-moment functions
//! `G^±(α) = ∫_{C_α^±} |z_{n+1}| dμ` and its mass on the equator. Both are stored in the
//! gnomonic coordinate `r = tan α`, where `G^±` is exactly the cumulative mass of the weighted
//! gnomonic pushforward on the ball of radius `r`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::{integrate_monotone, integrate_tail, unit_ball_volume, Tolerance};
use crate::piecewise::{LeftMonotoneFn, Piece, Piecewise};
use crate::radial_measure::RadialMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Southern hemisphere, `z_{n+1} < 0`.
    Lower,
    /// Northern hemisphere, `z_{n+1} > 0`.
    Upper,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Lower => -1.0,
            Side::Upper => 1.0,
        }
    }
}

/// Angular density `Σ c cos(θ)^p` on the polar-angle interval `[start, end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularPiece {
    pub start: f64,
    pub end: f64,
    /// `(c, p)` with `c >= 0`, `p >= 0`.
    pub terms: Vec<(f64, f64)>,
}

/// Disintegration of a zonal measure along the polar angle `θ`, with `z_{n+1} = sin θ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolarData {
    pub atoms: Vec<(f64, f64)>,
    pub density: Vec<AngularPiece>,
}

impl PolarData {
    fn validate(&self) -> Result<()> {
        for &(t, m) in &self.atoms {
            if !(t.abs() <= FRAC_PI_2) {
                return Err(Error::InvalidSpec(format!("polar angle {t} outside [-pi/2, pi/2]")));
            }
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::InvalidSpec(format!("atom mass must be non-negative, got {m}")));
            }
        }
        for piece in &self.density {
            if !(piece.start >= -FRAC_PI_2 && piece.start < piece.end && piece.end <= FRAC_PI_2) {
                return Err(Error::InvalidSpec(format!(
                    "density interval [{}, {}] must be a non-empty part of [-pi/2, pi/2]",
                    piece.start, piece.end
                )));
            }
            for &(c, p) in &piece.terms {
                if !(c >= 0.0 && c.is_finite() && p >= 0.0 && p.is_finite()) {
                    return Err(Error::InvalidSpec(format!(
                        "density term {c} cos^{p} must have non-negative coefficient and exponent"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Splits density pieces at the equator and maps each half to hemisphere angles
    /// `(a1, a2) ⊂ [0, π/2]` measured from the pole.
    fn hemisphere_pieces(&self, side: Side) -> Vec<(f64, f64, &[(f64, f64)])> {
        let mut out = Vec::new();
        for piece in &self.density {
            let (lo, hi) = match side {
                Side::Lower => (piece.start, piece.end.min(0.0)),
                Side::Upper => (piece.start.max(0.0), piece.end),
            };
            if hi <= lo {
                continue;
            }
            let (a1, a2) = match side {
                Side::Lower => (lo + FRAC_PI_2, hi + FRAC_PI_2),
                Side::Upper => (FRAC_PI_2 - hi, FRAC_PI_2 - lo),
            };
            out.push((a1, a2, piece.terms.as_slice()));
        }
        out
    }

    /// Cap moment computed directly from the polar-angle formula.
    fn cap_moment(&self, side: Side, alpha: f64) -> f64 {
        let mut g = 0.0;
        for &(t, m) in &self.atoms {
            let inside = match side {
                Side::Lower => t + FRAC_PI_2 < alpha,
                Side::Upper => FRAC_PI_2 - t < alpha,
            };
            if inside {
                g += t.sin().abs() * m;
            }
        }
        let limit = alpha - FRAC_PI_2;
        for piece in &self.density {
            // ∫ |sin s| c cos^p s ds = c/(p+1) |cos^{p+1}| difference
            let (lo, hi) = match side {
                Side::Lower => (piece.start, piece.end.min(limit).min(0.0)),
                Side::Upper => (piece.start.max(-limit).max(0.0), piece.end),
            };
            if hi <= lo {
                continue;
            }
            for &(c, p) in &piece.terms {
                let prim = |s: f64| s.cos().max(0.0).powf(p + 1.0) / (p + 1.0);
                g += match side {
                    Side::Lower => c * (prim(hi) - prim(lo)),
                    Side::Upper => c * (prim(lo) - prim(hi)),
                };
            }
        }
        g
    }

    /// `G^±` as a cumulative function of `r = tan α`.
    fn cap_function(&self, side: Side) -> Result<LeftMonotoneFn> {
        let mut origin = 0.0;
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for &(t, m) in &self.atoms {
            let a = match side {
                Side::Lower if t < 0.0 => t + FRAC_PI_2,
                Side::Upper if t > 0.0 => FRAC_PI_2 - t,
                _ => continue,
            };
            let w = a.cos() * m;
            if a <= 0.0 {
                origin += m;
            } else {
                atoms.push((a.tan(), w));
            }
        }
        // sin(α)^{p+1} as a function of r = tan α
        let sin_pow = |p: f64| Expr::mono(1.0, p + 1.0, -(p + 1.0) / 2.0);
        let mut cuts: Vec<f64> = vec![f64::INFINITY];
        let pieces = self.hemisphere_pieces(side);
        for &(a1, a2, _) in &pieces {
            for a in [a1, a2] {
                if a > 0.0 && a < FRAC_PI_2 {
                    cuts.push(a.tan());
                }
            }
        }
        cuts.extend(atoms.iter().map(|a| a.0));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut out = Vec::with_capacity(cuts.len());
        let mut start = 0.0f64;
        for &c in &cuts {
            let mid_alpha = if c.is_infinite() {
                start.atan() + 1e-9
            } else {
                (0.5 * (start + c)).atan()
            };
            let mut terms = vec![Expr::constant(origin)];
            for &(r, w) in &atoms {
                if r <= start {
                    terms.push(Expr::constant(w));
                }
            }
            for &(a1, a2, ts) in &pieces {
                let (s1, s2) = (a1.sin(), a2.sin());
                for &(coef, p) in ts {
                    let k = coef / (p + 1.0);
                    if a2 <= mid_alpha {
                        terms.push(Expr::constant(k * (s2.powf(p + 1.0) - s1.powf(p + 1.0))));
                    } else if a1 < mid_alpha {
                        terms.push(Expr::constant(-k * s1.powf(p + 1.0)));
                        terms.push(sin_pow(p).scale(k));
                    }
                }
            }
            out.push(Piece { end: c, expr: Expr::sum(terms) });
            start = c;
        }
        LeftMonotoneFn::try_from_piecewise(Piecewise::new(out)?, "cap moment")
    }

    fn equator(&self) -> f64 {
        self.atoms.iter().filter(|a| a.0 == 0.0).map(|a| a.1).sum()
    }

    fn reflect(&self) -> Self {
        Self {
            atoms: self.atoms.iter().map(|&(t, m)| (-t, m)).collect(),
            density: self
                .density
                .iter()
                .map(|p| AngularPiece {
                    start: -p.end,
                    end: -p.start,
                    terms: p.terms.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZonalMeasure {
    n: usize,
    lower: LeftMonotoneFn,
    upper: LeftMonotoneFn,
    equator: f64,
    polar: Option<PolarData>,
}

/// `F^±(α) = G^±(α) / sin(α)^{n-j}`, as a function of `r = tan α`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapMomentProfile {
    pub side: Side,
    pub j: usize,
    pub g: LeftMonotoneFn,
    pub f: Piecewise,
    pub non_trivial: bool,
    pub non_decreasing: bool,
    pub witness: Option<crate::error::Witness>,
}

impl CapMomentProfile {
    /// `F(α)` for `α ∈ (0, π/2]`.
    pub fn at_angle(&self, alpha: f64) -> f64 {
        if alpha >= FRAC_PI_2 {
            self.f.limit()
        } else {
            self.f.eval(alpha.tan())
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSpec("sphere dimension must be at least 1".into()));
    }
    Ok(())
}

impl ZonalMeasure {
    pub fn from_polar(n: usize, polar: PolarData) -> Result<Self> {
        check_n(n)?;
        polar.validate()?;
        let lower = polar.cap_function(Side::Lower)?;
        let upper = polar.cap_function(Side::Upper)?;
        let equator = polar.equator();
        Ok(Self {
            n,
            lower,
            upper,
            equator,
            polar: Some(polar),
        })
    }

    /// Measure given by its cap moments `G^±` in the coordinate `r = tan α` and equator mass.
    pub fn from_cap_moments(n: usize, lower: LeftMonotoneFn, upper: LeftMonotoneFn, equator: f64) -> Result<Self> {
        check_n(n)?;
        for g in [&lower, &upper] {
            if g.domain_end().is_finite() {
                return Err(Error::InvalidSpec("cap moments must be defined for every r = tan α > 0".into()));
            }
        }
        if !(equator >= 0.0 && equator.is_finite()) {
            return Err(Error::InvalidSpec(format!("equator mass must be non-negative, got {equator}")));
        }
        Ok(Self {
            n,
            lower,
            upper,
            equator,
            polar: None,
        })
    }

    /// Any area measure `S_j` of the unit ball: the normalised Hausdorff measure,
    /// with cap moments `κ_n sin^n α`.
    pub fn area_ball(n: usize) -> Result<Self> {
        let nf = n as f64;
        let polar = PolarData {
            atoms: vec![],
            density: vec![AngularPiece {
                start: -FRAC_PI_2,
                end: FRAC_PI_2,
                terms: vec![(nf * unit_ball_volume(n), nf - 1.0)],
            }],
        };
        Self::from_polar(n, polar)
    }

    /// `S_j` of the flat unit disk in `e_{n+1}^⊥`.
    pub fn area_disk(n: usize, j: usize) -> Result<Self> {
        Self::cylinder(n, j, 0.0)
    }

    /// `S_j` of the cylinder `B_1^n × [0, length]`.
    pub fn cylinder(n: usize, j: usize, length: f64) -> Result<Self> {
        check_n(n)?;
        if j == 0 || j > n {
            return Err(Error::InvalidSpec(format!("order j = {j} must lie in [1, {n}]")));
        }
        if !(length >= 0.0 && length.is_finite()) {
            return Err(Error::InvalidSpec(format!("cylinder length must be non-negative, got {length}")));
        }
        let kappa = unit_ball_volume(n);
        let mut polar = PolarData::default();
        if j == n {
            polar.atoms = vec![(-FRAC_PI_2, kappa), (FRAC_PI_2, kappa)];
        } else {
            let m = (n - j) as f64;
            polar.density = vec![AngularPiece {
                start: -FRAC_PI_2,
                end: FRAC_PI_2,
                terms: vec![(m * kappa, m - 1.0)],
            }];
        }
        if length > 0.0 {
            polar.atoms.push((0.0, j as f64 * kappa * length));
        }
        Self::from_polar(n, polar)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn polar(&self) -> Option<&PolarData> {
        self.polar.as_ref()
    }

    pub fn cap_function(&self, side: Side) -> &LeftMonotoneFn {
        match side {
            Side::Lower => &self.lower,
            Side::Upper => &self.upper,
        }
    }

    /// `G^±(α) = ∫_{C_α^±} |z_{n+1}| dμ` over the open cap.
    pub fn cap_moment(&self, side: Side, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= FRAC_PI_2) {
            return Err(Error::OutOfDomain { r: alpha, domain: FRAC_PI_2 });
        }
        if let Some(p) = &self.polar {
            return Ok(p.cap_moment(side, alpha));
        }
        let g = self.cap_function(side);
        Ok(if alpha == FRAC_PI_2 { g.limit() } else { g.eval(alpha.tan()) })
    }

    pub fn f_profile(&self, side: Side, j: usize) -> Result<CapMomentProfile> {
        if j == 0 || j > self.n {
            return Err(Error::InvalidSpec(format!("order j = {j} must lie in [1, {}]", self.n)));
        }
        let g = self.cap_function(side).clone();
        let m = (self.n - j) as f64;
        let f = g.piecewise().map(|e| Expr::prod(vec![e.clone(), Expr::mono(1.0, -m, m / 2.0)]));
        Ok(Self::profile_from(side, j, g, f))
    }

    /// `F^± = G^±` without the sine division, as used for the disk-mixed measures.
    pub fn g_profile(&self, side: Side, j: usize) -> Result<CapMomentProfile> {
        if j == 0 || j > self.n {
            return Err(Error::InvalidSpec(format!("order j = {j} must lie in [1, {}]", self.n)));
        }
        let g = self.cap_function(side).clone();
        let f = g.piecewise().clone();
        Ok(Self::profile_from(side, j, g, f))
    }

    fn profile_from(side: Side, j: usize, g: LeftMonotoneFn, f: Piecewise) -> CapMomentProfile {
        let non_trivial = g.limit() > 0.0;
        let (non_decreasing, witness) = match LeftMonotoneFn::new(f.clone()) {
            Ok(_) => (true, None),
            Err(w) => (false, Some(w)),
        };
        CapMomentProfile {
            side,
            j,
            g,
            f,
            non_trivial,
            non_decreasing,
            witness,
        }
    }

    /// `∫ z_{n+1} dμ` and whether it vanishes relative to the total mass.
    pub fn check_centered(&self, tol: &Tolerance) -> (bool, f64) {
        let defect = self.upper.limit() - self.lower.limit();
        let total = self.total_mass(tol).unwrap_or(f64::INFINITY);
        let scale = if total.is_finite() { total } else { self.upper.limit() + self.lower.limit() };
        (defect.abs() <= 1e-10 * (scale + 1.0), defect)
    }

    pub fn equator_mass(&self) -> f64 {
        self.equator
    }

    pub fn add(&self, other: &ZonalMeasure) -> Result<ZonalMeasure> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let lower = LeftMonotoneFn::try_from_piecewise(self.lower.piecewise().add(other.lower.piecewise()), "cap moment")?;
        let upper = LeftMonotoneFn::try_from_piecewise(self.upper.piecewise().add(other.upper.piecewise()), "cap moment")?;
        let polar = match (&self.polar, &other.polar) {
            (Some(a), Some(b)) => Some(PolarData {
                atoms: a.atoms.iter().chain(&b.atoms).copied().collect(),
                density: a.density.iter().chain(&b.density).cloned().collect(),
            }),
            _ => None,
        };
        Ok(Self {
            n: self.n,
            lower,
            upper,
            equator: self.equator + other.equator,
            polar,
        })
    }

    pub fn scale(&self, lambda: f64) -> Result<ZonalMeasure> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidSpec(format!("scale factor must be non-negative, got {lambda}")));
        }
        let lower = LeftMonotoneFn::try_from_piecewise(self.lower.piecewise().scale(lambda), "cap moment")?;
        let upper = LeftMonotoneFn::try_from_piecewise(self.upper.piecewise().scale(lambda), "cap moment")?;
        let polar = self.polar.as_ref().map(|p| PolarData {
            atoms: p.atoms.iter().map(|&(t, m)| (t, lambda * m)).collect(),
            density: p
                .density
                .iter()
                .map(|d| AngularPiece {
                    terms: d.terms.iter().map(|&(c, q)| (lambda * c, q)).collect(),
                    ..d.clone()
                })
                .collect(),
        });
        Ok(Self {
            n: self.n,
            lower,
            upper,
            equator: lambda * self.equator,
            polar,
        })
    }

    /// Image under `z_{n+1} ↦ -z_{n+1}`.
    pub fn reflect(&self) -> ZonalMeasure {
        Self {
            n: self.n,
            lower: self.upper.clone(),
            upper: self.lower.clone(),
            equator: self.equator,
            polar: self.polar.as_ref().map(PolarData::reflect),
        }
    }

    /// The measure `η^±` on `R^n` with `∫ φ dη^± = ∫_{S^n_±} φ(gn z) |z_{n+1}| dμ`.
    pub fn pushforward_to_radial(&self, side: Side) -> Result<RadialMeasure> {
        RadialMeasure::from_cumulative(self.n, None, self.cap_function(side).clone())
    }

    /// `μ(S^n_±) = ∫ √(1 + |x|^2) dη^±`.
    pub fn hemisphere_mass(&self, side: Side, tol: &Tolerance) -> Result<f64> {
        let g = self.cap_function(side);
        let pw = g.piecewise();
        let w = |r: f64| (1.0 + r * r).sqrt();
        let mut mass = g.value_at_zero();
        let pieces = pw.pieces();
        for (i, piece) in pieces.iter().enumerate() {
            let s = pw.piece_start(i);
            let start_value = piece.expr.eval(s);
            if i > 0 {
                mass += w(s) * (start_value - pieces[i - 1].expr.eval(s));
            } else {
                mass += w(0.0) * (start_value - g.value_at_zero());
            }
            if piece.end.is_finite() {
                let t = piece.end;
                let by_parts = integrate_monotone(|r| r / w(r) * piece.expr.eval(r), s, t, tol)?;
                mass += w(t) * piece.expr.eval(t) - w(s) * start_value - by_parts.value;
            } else {
                let top = piece.expr.limit_at_infinity();
                if !top.is_finite() {
                    return Err(Error::NonFinite { at: f64::INFINITY });
                }
                let d = |r: f64| piece.expr.deficit(r).max(0.0);
                let zero_from = piece.expr.deficit_vanishes_from(s);
                let plain = integrate_tail(d, s, zero_from, tol)?;
                let damped = integrate_tail(|r| d(r) / (w(r) * (w(r) + r)), s, zero_from, tol)?;
                mass += w(s) * d(s) + plain.value - damped.value;
            }
        }
        Ok(mass)
    }

    pub fn total_mass(&self, tol: &Tolerance) -> Result<f64> {
        Ok(self.hemisphere_mass(Side::Lower, tol)? + self.equator + self.hemisphere_mass(Side::Upper, tol)?)
    }
}

/// Gnomonic projection `z ↦ (z_1, ..., z_n) / |z_{n+1}|` of a hemisphere point.
pub fn gnomonic(z: &[f64]) -> Result<Vec<f64>> {
    let (last, head) = z.split_last().ok_or_else(|| Error::InvalidSpec("empty vector".into()))?;
    if *last == 0.0 {
        return Err(Error::EquatorPoint);
    }
    let a = last.abs();
    Ok(head.iter().map(|x| x / a).collect())
}

/// Inverse of [`gnomonic`] onto the given hemisphere.
pub fn gnomonic_inverse(x: &[f64], side: Side) -> Vec<f64> {
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    let c = (1.0 + norm2).sqrt().recip();
    let mut z: Vec<f64> = x.iter().map(|v| v * c).collect();
    z.push(side.sign() * c);
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn ball_cap_moments() {
        for n in 1..=4usize {
            let mu = ZonalMeasure::area_ball(n).unwrap();
            let kappa = unit_ball_volume(n);
            for &a in &[0.1, 0.7, 1.2, FRAC_PI_2] {
                for side in [Side::Lower, Side::Upper] {
                    let expected = kappa * a.sin().powi(n as i32);
                    assert_abs_diff_eq!(mu.cap_moment(side, a).unwrap(), expected, epsilon = 1e-13);
                    let g = mu.cap_function(side);
                    let via_r = if a == FRAC_PI_2 { g.limit() } else { g.eval(a.tan()) };
                    assert_abs_diff_eq!(via_r, expected, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn ball_total_mass_is_sphere_area() {
        let tol = Tolerance::default();
        for n in 1..=4usize {
            let mu = ZonalMeasure::area_ball(n).unwrap();
            let area = (n + 1) as f64 * unit_ball_volume(n + 1);
            assert_abs_diff_eq!(mu.total_mass(&tol).unwrap(), area, epsilon = 1e-7);
        }
    }

    #[test]
    fn pole_atom() {
        let k = unit_ball_volume(2);
        let mu = ZonalMeasure::from_polar(2, PolarData { atoms: vec![(FRAC_PI_2, k)], density: vec![] }).unwrap();
        assert_eq!(mu.cap_moment(Side::Upper, 0.3).unwrap(), k);
        assert_eq!(mu.cap_moment(Side::Lower, 0.3).unwrap(), 0.0);
        let tol = Tolerance::default();
        let (ok, defect) = mu.check_centered(&tol);
        assert!(!ok);
        assert_eq!(defect, k);
        assert_eq!(mu.pushforward_to_radial(Side::Upper).unwrap().origin_atom(), k);
    }

    #[test]
    fn open_cap_excludes_boundary_atoms() {
        let t = -FRAC_PI_2 + 0.4;
        let mu = ZonalMeasure::from_polar(2, PolarData { atoms: vec![(t, 1.0)], density: vec![] }).unwrap();
        let a = t + FRAC_PI_2;
        assert_eq!(mu.cap_moment(Side::Lower, a).unwrap(), 0.0);
        assert_abs_diff_eq!(mu.cap_moment(Side::Lower, a + 1e-9).unwrap(), 0.4f64.cos(), epsilon = 1e-12);
        let eta = mu.pushforward_to_radial(Side::Lower).unwrap();
        let atoms = eta.sphere_atoms();
        assert_eq!(atoms.len(), 1);
        assert_abs_diff_eq!(atoms[0].0, 0.4f64.tan(), epsilon = 1e-15);
        assert_abs_diff_eq!(atoms[0].1, 0.4f64.cos(), epsilon = 1e-15);
    }

    #[test]
    fn southern_free_region() {
        let mu = ZonalMeasure::from_polar(
            2,
            PolarData {
                atoms: vec![],
                density: vec![AngularPiece { start: -FRAC_PI_2 / 2.0, end: FRAC_PI_2, terms: vec![(1.0, 1.0)] }],
            },
        )
        .unwrap();
        for &a in &[0.1, 0.5, FRAC_PI_2 / 2.0] {
            assert_eq!(mu.cap_moment(Side::Lower, a).unwrap(), 0.0);
            assert_eq!(mu.cap_function(Side::Lower).eval(a.tan()), 0.0);
        }
    }

    #[test]
    fn presets() {
        let tol = Tolerance::default();
        let k = unit_ball_volume(3);
        let disk = ZonalMeasure::area_disk(3, 3).unwrap();
        assert_eq!(disk.equator_mass(), 0.0);
        let f = disk.f_profile(Side::Upper, 3).unwrap();
        assert!(f.non_trivial && f.non_decreasing);
        assert_abs_diff_eq!(f.at_angle(0.2), k, epsilon = 1e-15);
        let disk2 = ZonalMeasure::area_disk(3, 1).unwrap();
        let f = disk2.f_profile(Side::Lower, 1).unwrap();
        for &a in &[0.01, 0.5, 1.5, FRAC_PI_2] {
            assert_abs_diff_eq!(f.at_angle(a), k, epsilon = 1e-12);
        }
        let ball = ZonalMeasure::area_ball(3).unwrap();
        let f = ball.f_profile(Side::Upper, 2).unwrap();
        assert_abs_diff_eq!(f.at_angle(0.7), k * 0.7f64.sin().powi(2), epsilon = 1e-13);
        assert!(ball.check_centered(&tol).0);
        let cyl = ZonalMeasure::cylinder(3, 2, 1.5).unwrap();
        assert_abs_diff_eq!(cyl.equator_mass(), 2.0 * k * 1.5, epsilon = 1e-15);
        let sum = ball.add(&cyl).unwrap();
        assert_eq!(sum.equator_mass(), cyl.equator_mass());
        let zero = ZonalMeasure::from_polar(3, PolarData::default()).unwrap();
        assert!(!zero.f_profile(Side::Lower, 1).unwrap().non_trivial);
        let two_poles = ZonalMeasure::from_polar(2, PolarData { atoms: vec![(FRAC_PI_2, 1.0), (-FRAC_PI_2, 1.0)], density: vec![] }).unwrap();
        assert!(two_poles.check_centered(&tol).0);
        let eq = ZonalMeasure::from_polar(2, PolarData { atoms: vec![(0.0, 2.5)], density: vec![] }).unwrap();
        assert_eq!(eq.equator_mass(), 2.5);
    }

    #[test]
    fn gnomonic_examples() {
        let z = [3f64.sqrt() / 2.0, 0.0, -0.5];
        let x = gnomonic(&z).unwrap();
        assert_abs_diff_eq!(x[0], 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(x[1], 0.0);
        assert_eq!(gnomonic(&[0.0, 0.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(gnomonic(&[1.0, 0.0, 0.0]), Err(Error::EquatorPoint)));
    }

    #[test]
    fn infinite_hemisphere_mass_is_reported() {
        // G(r) = 1 - 1/(1+r) has a deficit that decays too slowly against √(1+r²)
        let g = Piecewise::single(f64::INFINITY, Expr::sum(vec![Expr::constant(1.0), Expr::mono(-1.0, 0.0, -0.5)]));
        let g = LeftMonotoneFn::new(g).unwrap();
        let mu = ZonalMeasure::from_cap_moments(2, g.clone(), g, 0.0).unwrap();
        let tol = Tolerance { max_subdivisions: 30, ..Tolerance::default() };
        assert!(mu.total_mass(&tol).is_err());
    }

    fn arb_polar() -> impl Strategy<Value = PolarData> {
        (
            prop::collection::vec((-FRAC_PI_2..=FRAC_PI_2, 0.0..2.0f64), 0..5),
            prop::collection::vec((-FRAC_PI_2..FRAC_PI_2, 0.01..1.5f64, 0.0..2.0f64, 0.0..4.0f64), 0..3),
        )
            .prop_map(|(atoms, dens)| PolarData {
                atoms,
                density: dens
                    .into_iter()
                    .map(|(s, w, c, p)| AngularPiece { start: s, end: (s + w).min(FRAC_PI_2), terms: vec![(c, p)] })
                    .collect(),
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pushforward_matches_direct_formula(polar in arb_polar(), alpha in 0.001..FRAC_PI_2) {
            let mu = ZonalMeasure::from_polar(3, polar).unwrap();
            for side in [Side::Lower, Side::Upper] {
                let direct = mu.cap_moment(side, alpha).unwrap();
                let eta = mu.pushforward_to_radial(side).unwrap();
                let pushed = eta.cumulative_mass(alpha.tan()).unwrap();
                prop_assert!((direct - pushed).abs() <= 1e-12 * (1.0 + direct.abs()));
            }
        }

        #[test]
        fn caps_are_monotone_and_left_continuous(polar in arb_polar()) {
            let mu = ZonalMeasure::from_polar(2, polar.clone()).unwrap();
            for &(t, _) in &polar.atoms {
                let side = if t < 0.0 { Side::Lower } else { Side::Upper };
                let a = FRAC_PI_2 - t.abs();
                if a > 1e-6 && a < FRAC_PI_2 - 1e-6 {
                    let at = mu.cap_moment(side, a).unwrap();
                    let before = mu.cap_moment(side, a - 1e-9).unwrap();
                    let after = mu.cap_moment(side, a + 1e-9).unwrap();
                    prop_assert!(before <= at + 1e-12 && at <= after + 1e-12);
                    prop_assert!((at - before).abs() < 1e-6);
                }
            }
        }

        #[test]
        fn symmetrisation_is_centered(polar in arb_polar()) {
            let mu = ZonalMeasure::from_polar(2, polar).unwrap();
            let sym = mu.add(&mu.reflect()).unwrap();
            prop_assert!(sym.check_centered(&Tolerance::default()).0);
        }

        #[test]
        fn gnomonic_round_trip(v in prop::collection::vec(-1.0..1.0f64, 3), flip in any::<bool>()) {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3 && v[2].abs() > 1e-3 * norm);
            let mut z: Vec<f64> = v.iter().map(|x| x / norm).collect();
            if flip { z[2] = -z[2]; }
            let side = if z[2] < 0.0 { Side::Lower } else { Side::Upper };
            let x = gnomonic(&z).unwrap();
            let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            prop_assert!((r - (z[2].abs().acos()).tan()).abs() <= 1e-9 * (1.0 + r));
            let back = gnomonic_inverse(&x, side);
            for (a, b) in z.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn mass_conservation(polar in arb_polar()) {
            let tol = Tolerance::default();
            let mu = ZonalMeasure::from_polar(2, polar.clone()).unwrap();
            let atoms: f64 = polar.atoms.iter().map(|a| a.1).sum();
            let dens: f64 = polar.density.iter().map(|d| {
                d.terms.iter().map(|&(c, p)| {
                    integrate_monotone_parts(|s| c * s.cos().max(0.0).powf(p), d.start, d.end)
                }).sum::<f64>()
            }).sum();
            let total = mu.total_mass(&tol).unwrap();
            prop_assert!((total - atoms - dens).abs() <= 1e-6 * (1.0 + total));
        }
    }

    /// Integral of a unimodal function split at its maximum `θ = 0`.
    fn integrate_monotone_parts(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64) -> f64 {
        let tol = Tolerance { abs_tol: 1e-12, rel_tol: 1e-12, ..Tolerance::default() };
        let mut total = 0.0;
        if a < 0.0 {
            total += integrate_monotone(f, a, b.min(0.0), &tol).unwrap().value;
        }
        if b > 0.0 {
            total += integrate_monotone(f, a.max(0.0), b, &tol).unwrap().value;
        }
        total
    }
}
