//! Left-continuous piecewise closed-form functions on `(0, R]` or `(0, inf)`.

use crate::error::{Error, Result, Witness};
use crate::expr::Expr;
use crate::numerics::{integrate_monotone, integrate_tail, QuadResult, Tolerance};

/// One closed-form piece, covering `(previous end, end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub end: f64,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise {
    pieces: Vec<Piece>,
}

impl Piecewise {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidSpec("piecewise function needs at least one piece".into()));
        }
        let mut prev = 0.0;
        for (i, p) in pieces.iter().enumerate() {
            let last = i + 1 == pieces.len();
            if !(p.end > prev) || (p.end.is_infinite() && !last) || p.end.is_nan() {
                return Err(Error::InvalidSpec(format!(
                    "breakpoints must be positive and strictly increasing, got {} after {prev}",
                    p.end
                )));
            }
            prev = p.end;
        }
        Ok(Self { pieces }.merged())
    }

    pub fn single(domain_end: f64, expr: Expr) -> Self {
        Self {
            pieces: vec![Piece { end: domain_end, expr }],
        }
    }

    pub fn constant(domain_end: f64, c: f64) -> Self {
        Self::single(domain_end, Expr::constant(c))
    }

    /// Joins neighbouring pieces with identical expressions.
    fn merged(mut self) -> Self {
        let mut out: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in self.pieces.drain(..) {
            match out.last_mut() {
                Some(last) if last.expr == p.expr => last.end = p.end,
                _ => out.push(p),
            }
        }
        Self { pieces: out }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain_end(&self) -> f64 {
        self.pieces.last().expect("non-empty").end
    }

    pub fn piece_start(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.pieces[i - 1].end
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.end).filter(|e| e.is_finite()).collect()
    }

    pub fn piece_index(&self, r: f64) -> usize {
        self.pieces.partition_point(|p| p.end < r).min(self.pieces.len() - 1)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.pieces[self.piece_index(r)].expr.eval(r)
    }

    /// `lim_{s -> r+}`.
    pub fn right_limit(&self, r: f64) -> f64 {
        let i = self.piece_index(r);
        if self.pieces[i].end == r && i + 1 < self.pieces.len() {
            self.pieces[i + 1].expr.eval(r)
        } else {
            self.pieces[i].expr.eval(r)
        }
    }

    pub fn value_at_zero(&self) -> f64 {
        self.pieces[0].expr.eval(0.0)
    }

    /// Interior discontinuities `(location, right limit - value)`, zero jumps omitted.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.pieces
            .windows(2)
            .filter_map(|w| {
                let x = w[0].end;
                let d = w[1].expr.eval(x) - w[0].expr.eval(x);
                (d != 0.0).then_some((x, d))
            })
            .collect()
    }

    /// Limit at the right end of the domain.
    pub fn limit(&self) -> f64 {
        let last = self.pieces.last().expect("non-empty");
        if last.end.is_infinite() {
            last.expr.limit_at_infinity()
        } else {
            last.expr.eval(last.end)
        }
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    end: p.end,
                    expr: f(&p.expr),
                })
                .collect(),
        }
        .merged()
    }

    /// Restriction to `(0, end]`.
    pub fn restrict(&self, end: f64) -> Self {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            if p.end >= end {
                pieces.push(Piece {
                    end,
                    expr: p.expr.clone(),
                });
                break;
            }
            pieces.push(p.clone());
        }
        Self { pieces }.merged()
    }

    /// Pointwise combination over the common refinement of all breakpoints. The domain is the
    /// smallest of the inputs.
    pub fn combine(parts: &[&Piecewise], f: impl Fn(&[&Expr]) -> Expr) -> Self {
        let end = parts.iter().map(|p| p.domain_end()).fold(f64::INFINITY, f64::min);
        let mut ends: Vec<f64> = parts
            .iter()
            .flat_map(|p| p.pieces.iter().map(|q| q.end))
            .filter(|&e| e < end)
            .collect();
        ends.push(end);
        ends.sort_by(f64::total_cmp);
        ends.dedup();
        let mut idx = vec![0usize; parts.len()];
        let mut pieces = Vec::with_capacity(ends.len());
        for &e in &ends {
            for (k, p) in parts.iter().enumerate() {
                while p.pieces[idx[k]].end < e {
                    idx[k] += 1;
                }
            }
            let exprs: Vec<&Expr> = parts.iter().zip(&idx).map(|(p, &i)| &p.pieces[i].expr).collect();
            pieces.push(Piece { end: e, expr: f(&exprs) });
        }
        Self { pieces }.merged()
    }

    pub fn add(&self, other: &Piecewise) -> Self {
        Self::combine(&[self, other], |e| Expr::sum(e.iter().map(|x| (*x).clone()).collect()))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|e| e.clone().scale(c))
    }

    /// Derivative where every piece is differentiable in closed form, table slopes otherwise.
    pub fn derivative_at(&self, r: f64) -> f64 {
        let e = &self.pieces[self.piece_index(r)].expr;
        match e {
            Expr::Table(t) => t.slope(r),
            other => other.derivative().map(|d| d.eval(r)).unwrap_or(f64::NAN),
        }
    }
}

fn slack(v: f64) -> f64 {
    1e-12 * v.abs().max(1.0)
}

fn sample_points(s: f64, t: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    if t.is_finite() {
        const N: usize = 512;
        for i in 0..=N {
            pts.push(s + (t - s) * i as f64 / N as f64);
        }
        for m in 1..=12 {
            let d = (t - s) * 10f64.powi(-m);
            pts.push(s + d);
            pts.push(t - d);
        }
    } else {
        const N: usize = 1024;
        pts.push(s);
        for i in 0..N {
            let e = -12.0 + 24.0 * i as f64 / (N - 1) as f64;
            pts.push(s + 10f64.powf(e));
        }
    }
    pts.retain(|&x| x >= s && x <= t);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Searches `expr` on `[s, t]` for a decreasing pair beyond `tolerance`.
fn find_decrease(expr: &Expr, s: f64, t: f64, strict: bool) -> Option<Witness> {
    let pts = sample_points(s, t);
    let vals: Vec<(f64, f64)> = pts
        .into_iter()
        .map(|x| (x, expr.eval(x)))
        .filter(|(_, v)| v.is_finite())
        .collect();
    let mut running: Option<(f64, f64)> = None;
    for &(x, v) in &vals {
        if let Some((rx, rv)) = running {
            let tol = if strict { 0.0 } else { slack(rv) };
            if rv > v + tol {
                if rx > s {
                    return Some(Witness { r1: rx, r2: x, f1: rv, f2: v });
                }
                // the piece is (s, t]: its value at s belongs to the previous piece
                let mut d = 0.5 * (x - s);
                while d > 0.0 && s + d > s {
                    let f1 = expr.eval(s + d);
                    if f1 > v + tol {
                        return Some(Witness { r1: s + d, r2: x, f1, f2: v });
                    }
                    d *= 0.5;
                }
                running = Some((x, v));
                continue;
            }
            if v > rv {
                running = Some((x, v));
            }
        } else {
            running = Some((x, v));
        }
    }
    None
}

/// How a piece of a [`LeftMonotoneFn`] was verified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    Exact,
    Numeric,
}

/// Checks that `pw` is non-negative, non-decreasing and left-continuous.
pub fn check_monotone(pw: &Piecewise) -> std::result::Result<Vec<Certificate>, Witness> {
    let v0 = pw.value_at_zero();
    if v0 < -slack(v0) || v0.is_nan() {
        let x = pw.pieces[0].end.min(1.0) * 1e-12;
        return Err(Witness { r1: 0.0, r2: x, f1: 0.0, f2: pw.eval(x) });
    }
    let mut certs = Vec::with_capacity(pw.pieces.len());
    for (i, p) in pw.pieces.iter().enumerate() {
        let s = pw.piece_start(i);
        let t = p.end;
        match p.expr.certify_monotone(s, t, true) {
            Some(true) => certs.push(Certificate::Exact),
            Some(false) => {
                if let Some(w) = find_decrease(&p.expr, s, t, true) {
                    return Err(w);
                }
                certs.push(Certificate::Numeric);
            }
            None => {
                if let Some(w) = find_decrease(&p.expr, s, t, false) {
                    return Err(w);
                }
                certs.push(Certificate::Numeric);
            }
        }
        if i + 1 < pw.pieces.len() {
            let left = p.expr.eval(t);
            let right = pw.pieces[i + 1].expr.eval(t);
            if left > right + slack(left) {
                let next = pw.pieces[i + 1].end;
                let step = if next.is_finite() { (next - t) * 1e-9 } else { t.max(1.0) * 1e-9 };
                let r2 = t + step;
                return Err(Witness { r1: t, r2, f1: left, f2: pw.eval(r2) });
            }
        }
    }
    Ok(certs)
}

/// A non-negative, non-decreasing, left-continuous piecewise closed-form function.
#[derive(Debug, Clone, PartialEq)]
pub struct LeftMonotoneFn {
    pw: Piecewise,
    certificates: Vec<Certificate>,
}

impl LeftMonotoneFn {
    pub fn new(pw: Piecewise) -> std::result::Result<Self, Witness> {
        let certificates = check_monotone(&pw)?;
        Ok(Self { pw, certificates })
    }

    /// Like [`LeftMonotoneFn::new`] but reports failures as invalid input.
    pub fn try_from_piecewise(pw: Piecewise, what: &str) -> Result<Self> {
        Self::new(pw).map_err(|w| {
            Error::InvalidSpec(format!(
                "{what} is not non-negative and non-decreasing: f({}) = {} > f({}) = {}",
                w.r1, w.f1, w.r2, w.f2
            ))
        })
    }

    pub fn constant(domain_end: f64, c: f64) -> Result<Self> {
        Self::try_from_piecewise(Piecewise::constant(domain_end, c), "constant")
    }

    pub fn piecewise(&self) -> &Piecewise {
        &self.pw
    }

    pub fn certificates(&self) -> &[Certificate] {
        &self.certificates
    }

    pub fn domain_end(&self) -> f64 {
        self.pw.domain_end()
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.pw.eval(r)
    }

    pub fn right_limit(&self, r: f64) -> f64 {
        self.pw.right_limit(r)
    }

    pub fn value_at_zero(&self) -> f64 {
        self.pw.value_at_zero()
    }

    pub fn limit(&self) -> f64 {
        self.pw.limit()
    }

    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.pw.jumps()
    }

    /// `∫_a^b f` for `0 <= a <= b <= domain end`.
    pub fn integrate(&self, a: f64, b: f64, tol: &Tolerance) -> Result<QuadResult> {
        if !(a >= 0.0 && a <= b && b <= self.domain_end()) || b.is_infinite() {
            return Err(Error::OutOfDomain { r: b, domain: self.domain_end() });
        }
        let mut total = QuadResult::zero();
        if a == b {
            return Ok(total);
        }
        let first = self.pw.piece_index(a);
        let pieces = self.pw.pieces();
        for (i, piece) in pieces.iter().enumerate().skip(first) {
            let s = self.pw.piece_start(i);
            let lo = s.max(a);
            let hi = piece.end.min(b);
            if hi > lo {
                total = total.combine(integrate_expr(&piece.expr, s, lo, hi, piece.end.is_infinite(), tol)?);
            }
            if piece.end >= b {
                break;
            }
        }
        Ok(total)
    }

    /// `∫_a^∞ (L - f)` where `L` is the finite limit at infinity.
    pub fn tail_integral(&self, a: f64, tol: &Tolerance) -> Result<QuadResult> {
        let pieces = self.pw.pieces();
        let last = pieces.len() - 1;
        let s_last = self.pw.piece_start(last);
        let l = self.limit();
        if self.domain_end().is_finite() || !l.is_finite() {
            return Err(Error::NonFinite { at: f64::INFINITY });
        }
        let mut total = QuadResult::zero();
        if a < s_last {
            let inner = self.integrate(a, s_last, tol)?;
            total = total.combine(inner.affine(-1.0, l * (s_last - a)));
        }
        let start = a.max(s_last);
        let expr = &pieces[last].expr;
        let zero_from = expr.deficit_vanishes_from(start);
        let tail = integrate_tail(|r| expr.deficit(r).max(0.0), start, zero_from, tol)?;
        Ok(total.combine(tail))
    }
}

fn integrate_expr(expr: &Expr, start: f64, lo: f64, hi: f64, unbounded: bool, tol: &Tolerance) -> Result<QuadResult> {
    if let Expr::Table(t) = expr {
        return Ok(QuadResult::exact(t.integral(lo, hi)));
    }
    if let Some(prim) = expr.antiderivative() {
        let v = prim.eval(hi) - prim.eval(lo);
        if v.is_finite() {
            return Ok(QuadResult::exact(v));
        }
    }
    let l = if unbounded { expr.limit_at_infinity() } else { f64::NAN };
    if unbounded && l.is_finite() && hi > 2.0 * start.max(1.0) {
        let split = 2.0 * start.max(1.0);
        let head = if split > lo {
            integrate_expr(expr, start, lo, split, false, tol)?
        } else {
            QuadResult::zero()
        };
        let from = split.max(lo);
        let deficit = integrate_monotone(|r| expr.deficit(r), from, hi, tol)?;
        return Ok(head.combine(deficit.affine(-1.0, l * (hi - from))));
    }
    integrate_monotone(
        |r| expr.eval(if r == 0.0 { f64::MIN_POSITIVE } else { r }),
        lo,
        hi,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn step() -> Piecewise {
        Piecewise::new(vec![
            Piece { end: 1.0, expr: Expr::zero() },
            Piece { end: f64::INFINITY, expr: Expr::constant(1.0) },
        ])
        .unwrap()
    }

    #[test]
    fn left_continuity_at_breakpoints() {
        let f = step();
        assert_eq!(f.eval(1.0), 0.0);
        assert_eq!(f.right_limit(1.0), 1.0);
        assert_eq!(f.eval(1.0 + 1e-12), 1.0);
        assert_eq!(f.jumps(), vec![(1.0, 1.0)]);
    }

    #[test]
    fn rejects_bad_breakpoints() {
        let bad = Piecewise::new(vec![
            Piece { end: 2.0, expr: Expr::zero() },
            Piece { end: 1.0, expr: Expr::zero() },
        ]);
        assert!(bad.is_err());
        assert!(Piecewise::new(vec![]).is_err());
    }

    #[test]
    fn combine_refines_breakpoints() {
        let a = step();
        let b = Piecewise::new(vec![
            Piece { end: 0.5, expr: Expr::constant(2.0) },
            Piece { end: f64::INFINITY, expr: Expr::constant(3.0) },
        ])
        .unwrap();
        let s = a.add(&b);
        assert_eq!(s.breakpoints(), vec![0.5, 1.0]);
        assert_eq!(s.eval(0.5), 2.0);
        assert_eq!(s.eval(0.7), 3.0);
        assert_eq!(s.eval(2.0), 4.0);
    }

    #[test]
    fn identical_neighbours_merge() {
        let p = Piecewise::new(vec![
            Piece { end: 1.0, expr: Expr::constant(1.0) },
            Piece { end: 2.0, expr: Expr::constant(1.0) },
        ])
        .unwrap();
        assert_eq!(p.pieces().len(), 1);
    }

    #[test]
    fn monotone_validation() {
        assert!(LeftMonotoneFn::new(step()).is_ok());
        let down = Piecewise::new(vec![
            Piece { end: 1.0, expr: Expr::constant(2.0) },
            Piece { end: 2.0, expr: Expr::constant(1.0) },
        ])
        .unwrap();
        let w = LeftMonotoneFn::new(down).unwrap_err();
        assert!(w.r1 < w.r2 && w.f1 > w.f2);
        let bump = Piecewise::single(3.0, Expr::mono(1.0, 1.0, -1.0));
        let w = LeftMonotoneFn::new(bump).unwrap_err();
        assert!(w.r1 < w.r2 && w.f1 > w.f2);
        let neg = Piecewise::single(1.0, Expr::constant(-1.0));
        assert!(LeftMonotoneFn::new(neg).is_err());
    }

    #[test]
    fn numeric_validation_of_symbolic_sum() {
        let e = Expr::sum(vec![Expr::mono(1.0, 2.0, 0.0), Expr::mono(-1.0, 1.0, 0.0), Expr::constant(1.0)]);
        // r^2 - r + 1 decreases on (0, 1/2)
        assert!(LeftMonotoneFn::new(Piecewise::single(2.0, e.clone())).is_err());
        let ok = Piecewise::new(vec![Piece { end: 0.5, expr: Expr::constant(0.75) }, Piece { end: 2.0, expr: e }]).unwrap();
        let f = LeftMonotoneFn::new(ok).unwrap();
        assert_eq!(f.certificates()[1], Certificate::Numeric);
    }

    #[test]
    fn integration_routes() {
        let tol = Tolerance::default();
        let f = LeftMonotoneFn::new(step()).unwrap();
        assert_abs_diff_eq!(f.integrate(0.0, 3.0, &tol).unwrap().value, 2.0, epsilon = 1e-15);
        let ub = LeftMonotoneFn::new(Piecewise::single(f64::INFINITY, Expr::mono(1.0, 1.0, -0.5))).unwrap();
        let v = ub.integrate(0.0, 1e6, &tol).unwrap().value;
        assert_abs_diff_eq!(v, (1.0f64 + 1e12).sqrt() - 1.0, epsilon = 1e-6);
        let t = ub.tail_integral(0.0, &tol).unwrap();
        assert_abs_diff_eq!(t.value, 1.0, epsilon = 1e-8);
        let numeric = LeftMonotoneFn::new(Piecewise::single(
            f64::INFINITY,
            Expr::sum(vec![Expr::mono(1.0, 1.0, -0.5), Expr::constant(1.0)]).pow(0.5),
        ))
        .unwrap();
        let r = numeric.integrate(0.0, 50.0, &tol).unwrap();
        let g = |x: f64| (x / (1.0 + x * x).sqrt() + 1.0).sqrt();
        let fine = integrate_monotone(g, 0.0, 50.0, &Tolerance { abs_tol: 1e-12, rel_tol: 1e-13, ..tol }).unwrap();
        assert_abs_diff_eq!(r.value, fine.value, epsilon = 1e-7);
    }
}
