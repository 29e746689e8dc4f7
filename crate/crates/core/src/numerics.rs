//! Dimension constants and quadrature for monotone integrands.
//!
//! Every integral in the solvers has a monotone integrand on each closed-form piece, so the
//! quadrature here keeps a pair of lower/upper Riemann sums over its partition next to the
//! extrapolated Simpson estimate. When the Riemann bracket closes below the tolerance the
//! returned bound is guaranteed; otherwise it is the Richardson estimate of the Simpson error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Hard cap on the number of leaves kept by [`integrate_monotone`].
const MAX_LEAVES: usize = 1 << 17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Absolute integration error budget.
    pub abs_tol: f64,
    /// Relative integration error budget.
    pub rel_tol: f64,
    /// Budget for the heuristic `T * h(T)` estimate of a truncated improper tail.
    pub tail_tol: f64,
    /// Maximum bisection depth of a single interval, and maximum number of tail doublings.
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            tail_tol: 1e-9,
            max_subdivisions: 60,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, tail_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let tol = Self {
            abs_tol,
            rel_tol,
            tail_tol,
            max_subdivisions,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.abs_tol) && positive(self.rel_tol) && positive(self.tail_tol)) {
            return Err(Error::InvalidSpec(format!(
                "tolerances must be positive and finite, got {self:?}"
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidSpec("max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }

    /// Same budgets with every error tolerance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            tail_tol: self.tail_tol * factor,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Width of the Riemann bracket when `certified`, the Richardson error estimate otherwise.
    pub error_bound: f64,
    /// Lower Riemann sum over the final partition.
    pub lower_sum: f64,
    /// Upper Riemann sum over the final partition.
    pub upper_sum: f64,
    /// The bracket `[lower_sum, upper_sum]` is no wider than the tolerance.
    pub certified: bool,
    /// Truncation point of an improper integral.
    pub truncation_point: Option<f64>,
    pub evaluations: usize,
}

impl QuadResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error_bound: 0.0,
            lower_sum: value,
            upper_sum: value,
            certified: true,
            truncation_point: None,
            evaluations: 0,
        }
    }

    pub fn zero() -> Self {
        Self::exact(0.0)
    }

    /// Result for the sum of two integrals.
    pub fn combine(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            error_bound: self.error_bound + other.error_bound,
            lower_sum: self.lower_sum + other.lower_sum,
            upper_sum: self.upper_sum + other.upper_sum,
            certified: self.certified && other.certified,
            truncation_point: match (self.truncation_point, other.truncation_point) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
            evaluations: self.evaluations + other.evaluations,
        }
    }

    /// Result for `scale * integral + shift`.
    pub fn affine(self, scale: f64, shift: f64) -> QuadResult {
        let (lo, hi) = if scale >= 0.0 {
            (self.lower_sum, self.upper_sum)
        } else {
            (self.upper_sum, self.lower_sum)
        };
        QuadResult {
            value: scale * self.value + shift,
            error_bound: scale.abs() * self.error_bound,
            lower_sum: scale * lo + shift,
            upper_sum: scale * hi + shift,
            ..self
        }
    }
}

/// Volume of the n-dimensional unit ball, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // κ_n = 2π/n · κ_{n-2}
    let (mut k, start) = if n % 2 == 0 { (1.0, 2) } else { (2.0, 3) };
    let mut m = start;
    while m <= n {
        k *= 2.0 * PI / m as f64;
        m += 2;
    }
    k
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

struct Leaf {
    a: f64,
    b: f64,
    /// f at a, a+h/4, a+h/2, a+3h/4, b.
    f: [f64; 5],
    depth: usize,
}

impl Leaf {
    fn width(&self) -> f64 {
        self.b - self.a
    }

    fn coarse(&self) -> f64 {
        self.width() / 6.0 * (self.f[0] + 4.0 * self.f[2] + self.f[4])
    }

    fn fine(&self) -> f64 {
        self.width() / 12.0 * (self.f[0] + 4.0 * self.f[1] + 2.0 * self.f[2] + 4.0 * self.f[3] + self.f[4])
    }

    fn error(&self) -> f64 {
        (self.fine() - self.coarse()).abs() / 15.0
    }

    fn bracket(&self) -> (f64, f64) {
        let q = self.width() / 4.0;
        self.f.windows(2).fold((0.0, 0.0), |(lo, hi), w| {
            (lo + q * w[0].min(w[1]), hi + q * w[0].max(w[1]))
        })
    }

    fn value(&self) -> f64 {
        let fine = self.fine();
        let (lo, hi) = self.bracket();
        (fine + (fine - self.coarse()) / 15.0).clamp(lo, hi)
    }
}

impl PartialEq for Leaf {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Leaf {}
impl PartialOrd for Leaf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Leaf {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |l: &Leaf| l.error().max(0.25 * (l.bracket().1 - l.bracket().0) * f64::EPSILON);
        key(self).total_cmp(&key(other))
    }
}

fn sample<F: Fn(f64) -> f64>(f: &F, t: f64, evals: &mut usize) -> Result<f64> {
    *evals += 1;
    let v = f(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: t })
    }
}

fn make_leaf<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    ends: (f64, f64, f64),
    depth: usize,
    evals: &mut usize,
) -> Result<Leaf> {
    let h = b - a;
    let f1 = sample(f, a + 0.25 * h, evals)?;
    let f3 = sample(f, a + 0.75 * h, evals)?;
    Ok(Leaf {
        a,
        b,
        f: [ends.0, f1, ends.1, f3, ends.2],
        depth,
    })
}

/// Integrates a monotone function over `[a, b]`.
///
/// The value always lies between the lower and upper Riemann sums of the final partition.
pub fn integrate_monotone<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: &Tolerance) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidSpec(format!("bad integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult::zero());
    }
    let mut evals = 0;
    let mut heap = BinaryHeap::new();
    const INITIAL: usize = 4;
    let h = (b - a) / INITIAL as f64;
    let mut left = sample(&f, a, &mut evals)?;
    for i in 0..INITIAL {
        let lo = a + h * i as f64;
        let hi = if i + 1 == INITIAL { b } else { a + h * (i + 1) as f64 };
        let mid = sample(&f, 0.5 * (lo + hi), &mut evals)?;
        let right = sample(&f, hi, &mut evals)?;
        heap.push(make_leaf(&f, lo, hi, (left, mid, right), 0, &mut evals)?);
        left = right;
    }

    loop {
        let (mut value, mut err, mut lower, mut upper) = (0.0, 0.0, 0.0, 0.0);
        for leaf in heap.iter() {
            let (lo, hi) = leaf.bracket();
            value += leaf.value();
            err += leaf.error();
            lower += lo;
            upper += hi;
        }
        let target = tol.abs_tol.max(tol.rel_tol * value.abs());
        let bracket = upper - lower;
        if bracket <= target || err <= target {
            let certified = bracket <= target;
            return Ok(QuadResult {
                value,
                error_bound: if certified { bracket } else { err },
                lower_sum: lower,
                upper_sum: upper,
                certified,
                truncation_point: None,
                evaluations: evals,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        if worst.depth >= tol.max_subdivisions || heap.len() + 2 > MAX_LEAVES {
            return Err(Error::BudgetExceeded {
                a,
                b,
                subdivisions: worst.depth,
                estimate: value,
                error: err.min(bracket),
            });
        }
        let m = 0.5 * (worst.a + worst.b);
        let [f0, f1, f2, f3, f4] = worst.f;
        heap.push(make_leaf(&f, worst.a, m, (f0, f1, f2), worst.depth + 1, &mut evals)?);
        heap.push(make_leaf(&f, m, worst.b, (f2, f3, f4), worst.depth + 1, &mut evals)?);
    }
}

/// Integrates a non-increasing, non-negative `h` over `[a, ∞)`.
///
/// With `zero_from = Some(t0)` the integrand is declared to vanish on `[t0, ∞)` and only
/// `[a, t0]` is integrated. Otherwise the domain is covered by dyadic blocks `[T, 2T]` until
/// `T * h(T)` drops below `tol.tail_tol`; the last `T` is reported as the truncation point and
/// `T * h(T)` is added to the error bound.
pub fn integrate_tail<H: Fn(f64) -> f64>(
    h: H,
    a: f64,
    zero_from: Option<f64>,
    tol: &Tolerance,
) -> Result<QuadResult> {
    if !a.is_finite() {
        return Err(Error::InvalidSpec(format!("bad tail start {a}")));
    }
    if let Some(t0) = zero_from {
        if t0 <= a {
            return Ok(QuadResult::zero());
        }
        return integrate_monotone(&h, a, t0, tol);
    }
    let block_tol = Tolerance {
        abs_tol: tol.abs_tol / tol.max_subdivisions as f64,
        ..*tol
    };
    let mut total = QuadResult::zero();
    let mut lo = a;
    let mut hi = (2.0 * a).max(a + 1.0);
    let mut last_estimate = f64::INFINITY;
    let mut still_decreasing = false;
    for _ in 0..=tol.max_subdivisions {
        total = total.combine(integrate_monotone(&h, lo, hi, &block_tol)?);
        let hv = h(hi);
        total.evaluations += 1;
        if !hv.is_finite() {
            return Err(Error::NonFinite { at: hi });
        }
        if hv <= 0.0 {
            total.truncation_point = Some(hi);
            return Ok(total);
        }
        still_decreasing = hi * hv < last_estimate;
        last_estimate = hi * hv;
        if last_estimate < tol.tail_tol {
            total.truncation_point = Some(hi);
            total.error_bound += last_estimate;
            total.upper_sum += last_estimate;
            total.certified = false;
            return Ok(total);
        }
        lo = hi;
        hi *= 2.0;
    }
    if still_decreasing {
        return Err(Error::BudgetExceeded {
            a,
            b: lo,
            subdivisions: tol.max_subdivisions,
            estimate: total.value,
            error: last_estimate,
        });
    }
    Err(Error::TailNotDecaying {
        last_point: lo,
        last_estimate,
    })
}
