//! Radially symmetric convex functions stored as `(u(0), p_u)` and their radial conjugates.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::{QuadResult, Tolerance};
use crate::piecewise::{LeftMonotoneFn, Piecewise};

/// `u(x) = v0 + ∫_0^{|x|} p`, where `p` is the left derivative of the profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexProfile {
    n: usize,
    radius: Option<f64>,
    v0: f64,
    p: LeftMonotoneFn,
}

impl ConvexProfile {
    pub fn new(n: usize, radius: Option<f64>, v0: f64, p: LeftMonotoneFn) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        if !v0.is_finite() {
            return Err(Error::InvalidSpec(format!("value at the origin must be finite, got {v0}")));
        }
        let end = radius.unwrap_or(f64::INFINITY);
        if p.domain_end() != end {
            return Err(Error::InvalidSpec(format!(
                "slope profile lives on (0, {}] but the domain radius is {end}",
                p.domain_end()
            )));
        }
        Ok(Self { n, radius, v0, p })
    }

    fn entire_from(n: usize, expr: Expr) -> Self {
        let p = LeftMonotoneFn::new(Piecewise::single(f64::INFINITY, expr)).expect("named profile slopes are monotone");
        Self {
            n,
            radius: None,
            v0: 0.0,
            p,
        }
    }

    /// `|x|^2 / 2`.
    pub fn q(n: usize) -> Self {
        Self::entire_from(n, Expr::mono(1.0, 1.0, 0.0))
    }

    /// `|x|`.
    pub fn abs(n: usize) -> Self {
        Self::entire_from(n, Expr::constant(1.0))
    }

    /// `√(1 + |x|^2)`.
    pub fn u_b(n: usize) -> Self {
        Self {
            v0: 1.0,
            ..Self::entire_from(n, Expr::mono(1.0, 1.0, -0.5))
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn domain_end(&self) -> f64 {
        self.radius.unwrap_or(f64::INFINITY)
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn slope(&self) -> &LeftMonotoneFn {
        &self.p
    }

    pub fn with_v0(&self, v0: f64) -> Self {
        Self { v0, ..self.clone() }
    }

    fn check_radius(&self, r: f64, allow_zero: bool) -> Result<()> {
        let inside = if allow_zero { r >= 0.0 } else { r > 0.0 };
        if !(inside && r <= self.domain_end()) || r.is_infinite() {
            return Err(Error::OutOfDomain { r, domain: self.domain_end() });
        }
        Ok(())
    }

    pub fn evaluate_with(&self, r: f64, tol: &Tolerance) -> Result<QuadResult> {
        self.check_radius(r, true)?;
        Ok(self.p.integrate(0.0, r, tol)?.affine(1.0, self.v0))
    }

    pub fn evaluate(&self, r: f64) -> Result<f64> {
        Ok(self.evaluate_with(r, &Tolerance::default())?.value)
    }

    /// Left derivative of the profile.
    pub fn p_of(&self, r: f64) -> Result<f64> {
        self.check_radius(r, false)?;
        Ok(self.p.eval(r))
    }

    /// Right limit of the left derivative; the subdifferential at `r` is `[p_of, p_right]`.
    pub fn p_right(&self, r: f64) -> Result<f64> {
        self.check_radius(r, false)?;
        if r == self.domain_end() {
            return Ok(self.p.eval(r));
        }
        Ok(self.p.right_limit(r))
    }

    /// Radial Legendre–Fenchel conjugate.
    pub fn legendre(&self, tol: &Tolerance) -> Result<RadialLscFn> {
        let (domain_radius, boundary) = match self.radius {
            Some(_) => (f64::INFINITY, f64::NAN),
            None => {
                let d = self.p.limit();
                if d.is_finite() {
                    let tail = self.p.tail_integral(0.0, tol);
                    let b = match tail {
                        Ok(t) => -self.v0 + t.value,
                        Err(Error::TailNotDecaying { .. }) => f64::INFINITY,
                        Err(e) => return Err(e),
                    };
                    (d, b)
                } else {
                    (f64::INFINITY, f64::NAN)
                }
            }
        };
        Ok(RadialLscFn {
            profile: self.clone(),
            domain_radius,
            boundary,
            tol: *tol,
        })
    }

    /// `sup { r : p(r) <= s }`, clamped to the domain radius.
    fn argmax_radius(&self, s: f64) -> f64 {
        let end = self.domain_end();
        if self.p.value_at_zero() > s || self.p.eval(f64::MIN_POSITIVE) > s {
            return 0.0;
        }
        if end.is_finite() && self.p.eval(end) <= s {
            return end;
        }
        let mut lo = 0.0;
        let mut hi = if end.is_finite() { end } else { 1.0 };
        if end.is_infinite() {
            while self.p.eval(hi) <= s {
                lo = hi;
                hi *= 2.0;
                if hi > 1e300 {
                    return hi;
                }
            }
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.p.eval(mid) <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Radial profile of a lower semicontinuous convex function with domain `[0, D]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialLscFn {
    profile: ConvexProfile,
    domain_radius: f64,
    boundary: f64,
    tol: Tolerance,
}

impl RadialLscFn {
    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    /// Value at the domain radius; `+inf` if the supremum diverges. NaN when `D = ∞`.
    pub fn boundary_value(&self) -> f64 {
        self.boundary
    }

    pub fn source(&self) -> &ConvexProfile {
        &self.profile
    }

    /// `w*(s) = sup_{r >= 0} (s r - u(r))`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        let s = s.abs();
        if s > self.domain_radius {
            return Ok(f64::INFINITY);
        }
        if s == self.domain_radius {
            return Ok(self.boundary);
        }
        let u = &self.profile;
        let rstar = u.argmax_radius(s);
        if rstar == 0.0 {
            return Ok(-u.v0);
        }
        if rstar.is_infinite() || rstar > 1e300 {
            return Err(Error::UnboundedConjugate { s });
        }
        let pw = u.p.piecewise();
        let last = pw.pieces().len() - 1;
        let s_last = pw.piece_start(last);
        let l = u.p.limit();
        if u.radius.is_none() && l.is_finite() && rstar > 2.0 * s_last.max(1.0) {
            // s r* - u(r*) split at `a` so the large linear terms cancel analytically
            let a = 2.0 * s_last.max(1.0);
            let head = s * a - u.evaluate_with(a, &self.tol)?.value;
            let expr = &pw.pieces()[last].expr;
            let deficit = crate::numerics::integrate_monotone(|r| expr.deficit(r), a, rstar, &self.tol)?;
            return Ok(head + (s - l) * (rstar - a) + deficit.value);
        }
        Ok(s * rstar - u.evaluate_with(rstar, &self.tol)?.value)
    }

    /// Biconjugate `sup_{0 <= s <= D} (r s - w*(s))`, computed from values of `w*` alone.
    pub fn conjugate_at(&self, r: f64) -> Result<f64> {
        let r = r.abs();
        let phi = |s: f64| -> Result<f64> { Ok(r * s - self.eval(s)?) };
        let mut lo = 0.0;
        let mut hi = if self.domain_radius.is_finite() {
            self.domain_radius
        } else {
            let mut h = 1.0;
            while phi(2.0 * h)? > phi(h)? {
                h *= 2.0;
                if h > 1e150 {
                    return Err(Error::UnboundedConjugate { s: r });
                }
            }
            2.0 * h
        };
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let mut f1 = phi(x1)?;
        let mut f2 = phi(x2)?;
        for _ in 0..200 {
            if hi - lo <= 1e-15 * hi.max(1e-300) {
                break;
            }
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = phi(x2)?;
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = phi(x1)?;
            }
        }
        let mut best = f1.max(f2);
        best = best.max(phi(0.0)?);
        if self.domain_radius.is_finite() && self.boundary.is_finite() {
            best = best.max(r * self.domain_radius - self.boundary);
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::Piece;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn kink() -> ConvexProfile {
        let p = Piecewise::new(vec![
            Piece { end: 1.0, expr: Expr::zero() },
            Piece { end: f64::INFINITY, expr: Expr::constant(1.0) },
        ])
        .unwrap();
        ConvexProfile::new(2, None, 0.0, LeftMonotoneFn::new(p).unwrap()).unwrap()
    }

    #[test]
    fn named_profiles() {
        assert_eq!(ConvexProfile::q(2).p_of(3.0).unwrap(), 3.0);
        assert_abs_diff_eq!(ConvexProfile::u_b(2).p_of(1.0).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(ConvexProfile::abs(2).p_of(0.01).unwrap(), 1.0);
    }

    #[test]
    fn evaluation() {
        assert_abs_diff_eq!(ConvexProfile::q(2).evaluate(2.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ConvexProfile::abs(2).evaluate(3.0).unwrap(), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ConvexProfile::u_b(2).evaluate(1.0).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(ConvexProfile::u_b(3).evaluate(0.0).unwrap(), 1.0);
    }

    #[test]
    fn subdifferential_at_kink() {
        let u = kink();
        assert_eq!(u.p_of(1.0).unwrap(), 0.0);
        assert_eq!(u.p_right(1.0).unwrap(), 1.0);
        assert!(matches!(u.p_of(0.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn conjugates() {
        let tol = Tolerance::default();
        let q = ConvexProfile::q(2).legendre(&tol).unwrap();
        assert!(q.domain_radius().is_infinite());
        assert_abs_diff_eq!(q.eval(1.5).unwrap(), 1.125, epsilon = 1e-12);

        let a = ConvexProfile::abs(2).legendre(&tol).unwrap();
        assert_eq!(a.domain_radius(), 1.0);
        assert_eq!(a.eval(0.4).unwrap(), 0.0);
        assert_abs_diff_eq!(a.eval(1.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(a.eval(1.2).unwrap(), f64::INFINITY);

        let b = ConvexProfile::u_b(2).legendre(&tol).unwrap();
        for &s in &[0.0, 0.3, 0.7, 0.99, 0.999999] {
            assert_abs_diff_eq!(b.eval(s).unwrap(), -(1.0 - s * s).sqrt(), epsilon = 1e-8);
        }
        assert_abs_diff_eq!(b.boundary_value(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn u_b_conjugate_against_dense_grid() {
        let tol = Tolerance::default();
        let b = ConvexProfile::u_b(2).legendre(&tol).unwrap();
        let s = 0.6;
        let grid_sup = (0..200_000)
            .map(|i| i as f64 * 1e-4)
            .map(|r| s * r - (1.0 + r * r).sqrt())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(b.eval(s).unwrap(), grid_sup, epsilon = 1e-8);
    }

    #[test]
    fn conjugate_of_dirichlet_profile_is_finite_everywhere() {
        let tol = Tolerance::default();
        let p = LeftMonotoneFn::new(Piecewise::single(1.0, Expr::mono(1.0, 1.0, 0.0))).unwrap();
        let u = ConvexProfile::new(2, Some(1.0), -0.5, p).unwrap();
        let w = u.legendre(&tol).unwrap();
        assert_abs_diff_eq!(w.eval(0.5).unwrap(), 0.5 * 0.5 - (0.125 - 0.5), epsilon = 1e-12);
        assert_abs_diff_eq!(w.eval(3.0).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn kink_conjugate() {
        let tol = Tolerance::default();
        let w = kink().legendre(&tol).unwrap();
        assert_abs_diff_eq!(w.eval(0.5).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w.conjugate_at(2.0).unwrap(), 1.0, epsilon = 1e-10);
    }

    fn arb_profile() -> impl Strategy<Value = ConvexProfile> {
        (0.1..3.0f64, 0.1..2.0f64, 0.0..1.0f64, 0.0..2.0f64).prop_map(|(b, c, jump, height)| {
            let first = Expr::mono(c, 1.0, -0.5);
            let second = Expr::sum(vec![Expr::mono(c, 1.0, -0.5), Expr::constant(jump)]);
            let p = Piecewise::new(vec![
                Piece { end: b, expr: first },
                Piece { end: f64::INFINITY, expr: second },
            ])
            .unwrap();
            ConvexProfile::new(2, None, height, LeftMonotoneFn::new(p).unwrap()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn midpoint_convexity(u in arb_profile(), r in 0.0..10.0f64, s in 0.0..10.0f64) {
            let m = u.evaluate(0.5 * (r + s)).unwrap();
            prop_assert!(m <= 0.5 * (u.evaluate(r).unwrap() + u.evaluate(s).unwrap()) + 1e-9);
        }

        #[test]
        fn subgradient_inequality(u in arb_profile(), r in 0.01..10.0f64, d in 0.0..10.0f64) {
            let s = r + d;
            let lhs = u.evaluate(s).unwrap();
            let rhs = u.evaluate(r).unwrap() + u.p_of(r).unwrap() * (s - r);
            prop_assert!(lhs >= rhs - 1e-9);
        }

        #[test]
        fn young_equality(u in arb_profile(), r in 0.01..10.0f64, t in 0.0..1.0f64) {
            let tol = Tolerance::default();
            let w = u.legendre(&tol).unwrap();
            let (lo, hi) = (u.p_of(r).unwrap(), u.p_right(r).unwrap());
            let s = lo + t * (hi - lo);
            let lhs = s * r;
            let rhs = u.evaluate(r).unwrap() + w.eval(s).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs()));
        }

        #[test]
        fn involution(u in arb_profile(), r in 0.0..10.0f64) {
            let tol = Tolerance::default();
            let u = u.with_v0(0.0);
            let w = u.legendre(&tol).unwrap();
            let back = w.conjugate_at(r).unwrap();
            prop_assert!((back - u.evaluate(r).unwrap()).abs() <= 1e-8);
        }
    }
}
