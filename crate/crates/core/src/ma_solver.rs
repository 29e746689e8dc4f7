//! Mixed Monge–Ampère and Hessian measures of radial convex functions on centred balls, and the
//! explicit radial solutions of the Dirichlet and entire problems.

use crate::convex_profile::ConvexProfile;
use crate::error::{Error, Result, Witness};
use crate::expr::Expr;
use crate::numerics::{binomial, unit_ball_volume, Tolerance};
use crate::piecewise::{Certificate, LeftMonotoneFn, Piecewise};
use crate::radial_measure::RadialMeasure;

/// `MA(u_1, ..., u_n; D_r) = κ_n p_1(r) ⋯ p_n(r)`.
pub fn mixed_ma_on_ball(profiles: &[&ConvexProfile], r: f64) -> Result<f64> {
    let n = profiles.len();
    if n == 0 {
        return Err(Error::InvalidSpec("at least one profile is required".into()));
    }
    let mut prod = 1.0;
    let mut zero = false;
    for u in profiles {
        if u.dimension() != n {
            return Err(Error::DimensionMismatch { expected: n, found: u.dimension() });
        }
        let p = u.p_of(r)?;
        if p == 0.0 {
            zero = true;
        }
        prod *= p;
    }
    Ok(if zero { 0.0 } else { unit_ball_volume(n) * prod })
}

/// `Φ_k(u; D_r) = C(n,k) κ_n p(r)^k r^(n-k)`.
pub fn hessian_measure_on_ball(u: &ConvexProfile, k: usize, r: f64) -> Result<f64> {
    let n = u.dimension();
    check_order(k, n, 0)?;
    let p = u.p_of(r)?;
    Ok(binomial(n, k) * unit_ball_volume(n) * power(p, k) * power(r, n - k))
}

/// `MA_k(u; D_r) = κ_n p(r)^k`.
pub fn ma_k_on_ball(u: &ConvexProfile, k: usize, r: f64) -> Result<f64> {
    let n = u.dimension();
    check_order(k, n, 0)?;
    Ok(unit_ball_volume(n) * power(u.p_of(r)?, k))
}

/// `x^k` multiplied out left to right, in the same order as the product in [`mixed_ma_on_ball`],
/// so that `MA_n(u; D_r)` and `MA(u, ..., u; D_r)` agree to the last bit.
fn power(x: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, _| acc * x)
}

fn check_order(k: usize, n: usize, min: usize) -> Result<()> {
    if k < min || k > n {
        return Err(Error::InvalidSpec(format!("order k = {k} must lie in [{min}, {n}]")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub condition_ok: bool,
    /// `(r, F(r))` on a fixed grid.
    pub f_samples: Vec<(f64, f64)>,
    pub diagnostics: Vec<String>,
    pub violation_witness: Option<Witness>,
    /// `F` itself when the condition holds.
    pub f: Option<LeftMonotoneFn>,
}

fn sample_grid(end: f64) -> Vec<f64> {
    const N: usize = 64;
    if end.is_finite() {
        (1..=N).map(|i| end * i as f64 / N as f64).collect()
    } else {
        (0..N).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (N - 1) as f64)).collect()
    }
}

fn check_reference(index: usize, u: &ConvexProfile, end: f64) -> Result<()> {
    let p = u.slope();
    if u.domain_end() < end {
        return Err(Error::ReferenceDegenerate {
            index,
            reason: format!("defined only up to radius {}", u.domain_end()),
        });
    }
    let pw = p.piecewise();
    let first = &pw.pieces()[0];
    let probe = first.end.min(end);
    if first.expr.is_zero() || p.eval(probe) == 0.0 {
        return Err(Error::ReferenceDegenerate {
            index,
            reason: format!("p vanishes on (0, {probe}]"),
        });
    }
    if let Expr::Table(t) = &first.expr {
        if let Some((x, _)) = t.knots().filter(|&(x, _)| x > 0.0).find(|&(_, y)| y == 0.0) {
            return Err(Error::ReferenceDegenerate {
                index,
                reason: format!("p vanishes on (0, {x}]"),
            });
        }
    }
    let top = if end.is_finite() { p.eval(end) } else { 0.0 };
    let bad_piece = pw
        .pieces()
        .iter()
        .map(|pc| pc.end.min(end))
        .filter(|x| x.is_finite())
        .any(|x| !p.eval(x).is_finite());
    if !top.is_finite() || bad_piece {
        return Err(Error::ReferenceDegenerate {
            index,
            reason: "p is not finite".into(),
        });
    }
    Ok(())
}

/// Builds `F(r) = μ(D_r) / (p_{k+1}(r) ⋯ p_n(r))` and checks that it is non-decreasing.
pub fn check_condition(mu: &RadialMeasure, k: usize, refs: &[ConvexProfile]) -> Result<SolveReport> {
    let n = mu.dimension();
    check_order(k, n, 1)?;
    if refs.len() != n - k {
        return Err(Error::DimensionMismatch { expected: n - k, found: refs.len() });
    }
    let end = mu.domain_end();
    for (i, u) in refs.iter().enumerate() {
        if u.dimension() != n {
            return Err(Error::DimensionMismatch { expected: n, found: u.dimension() });
        }
        check_reference(i, u, end)?;
    }
    let mut parts: Vec<&Piecewise> = vec![mu.cumulative().piecewise()];
    parts.extend(refs.iter().map(|u| u.slope().piecewise()));
    let f = Piecewise::combine(&parts, |e| {
        let mut factors = vec![e[0].clone()];
        factors.extend(e[1..].iter().map(|p| (*p).clone().pow(-1.0)));
        Expr::prod(factors)
    });
    let f_samples: Vec<(f64, f64)> = sample_grid(end).into_iter().map(|r| (r, f.eval(r))).collect();
    match LeftMonotoneFn::new(f) {
        Ok(lm) => {
            let diagnostics = lm
                .certificates()
                .iter()
                .zip(lm.piecewise().pieces())
                .enumerate()
                .map(|(i, (c, p))| {
                    let how = match c {
                        Certificate::Exact => "exact",
                        Certificate::Numeric => "sampled",
                    };
                    format!("piece {i} ending at {:e}: monotonicity {how}", p.end)
                })
                .collect();
            Ok(SolveReport {
                condition_ok: true,
                f_samples,
                diagnostics,
                violation_witness: None,
                f: Some(lm),
            })
        }
        Err(w) => Ok(SolveReport {
            condition_ok: false,
            f_samples,
            diagnostics: vec![format!(
                "F decreases: F({:e}) = {:e} > F({:e}) = {:e}",
                w.r1, w.f1, w.r2, w.f2
            )],
            violation_witness: Some(w),
            f: None,
        }),
    }
}

fn slope_from_f(f: &LeftMonotoneFn, n: usize, k: usize) -> Result<LeftMonotoneFn> {
    let kappa = unit_ball_volume(n);
    let p = f.piecewise().map(|e| Expr::prod(vec![e.clone(), Expr::constant(1.0 / kappa)]).pow(1.0 / k as f64));
    LeftMonotoneFn::new(p).map_err(Error::ConditionViolated)
}

fn checked_f(mu: &RadialMeasure, k: usize, refs: &[ConvexProfile]) -> Result<LeftMonotoneFn> {
    let report = check_condition(mu, k, refs)?;
    match (report.f, report.violation_witness) {
        (Some(f), _) => Ok(f),
        (None, Some(w)) => Err(Error::ConditionViolated(w)),
        (None, None) => unreachable!("report carries either F or a witness"),
    }
}

/// Solution of `MA(u[k], u_{k+1}, ..., u_n; ·) = μ` in `D_R` with zero boundary values.
pub fn solve_dirichlet(mu: &RadialMeasure, k: usize, refs: &[ConvexProfile], tol: &Tolerance) -> Result<ConvexProfile> {
    let r = mu
        .radius()
        .ok_or_else(|| Error::InvalidSpec("the Dirichlet problem needs a finite radius".into()))?;
    let f = checked_f(mu, k, refs)?;
    let p = slope_from_f(&f, mu.dimension(), k)?;
    let total = p.integrate(0.0, r, tol)?;
    ConvexProfile::new(mu.dimension(), Some(r), -total.value, p)
}

/// Solution of `MA(u[k], u_{k+1}, ..., u_n; ·) = μ` in `R^n` with `u(0) = 0`.
pub fn solve_entire(mu: &RadialMeasure, k: usize, refs: &[ConvexProfile]) -> Result<ConvexProfile> {
    if mu.radius().is_some() {
        return Err(Error::InvalidSpec("the entire problem needs a measure on all of space".into()));
    }
    let f = checked_f(mu, k, refs)?;
    let p = slope_from_f(&f, mu.dimension(), k)?;
    ConvexProfile::new(mu.dimension(), None, 0.0, p)
}

/// Solution of `Φ_k(u; ·) = μ` in `D_R` with zero boundary values.
pub fn solve_hessian_dirichlet(mu: &RadialMeasure, k: usize, tol: &Tolerance) -> Result<ConvexProfile> {
    let n = mu.dimension();
    check_order(k, n, 1)?;
    let scaled = mu.scale(1.0 / binomial(n, k))?;
    let refs = vec![ConvexProfile::q(n); n - k];
    solve_dirichlet(&scaled, k, &refs, tol)
}
