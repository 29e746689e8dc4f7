//! Closed-form radial expressions built from monomials `c * r^a * (1 + r^2)^b`.
//!
//! The solvers only ever multiply, divide, take roots of and add cumulative masses and
//! derivative profiles, so this small algebra with normalising constructors keeps every preset
//! and every power-law input in closed form end to end.

/// `coef * r^r_pow * (1 + r^2)^q_pow`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub r_pow: f64,
    pub q_pow: f64,
}

impl Monomial {
    pub fn new(coef: f64, r_pow: f64, q_pow: f64) -> Self {
        Self { coef, r_pow, q_pow }
    }

    /// Growth exponent at infinity.
    fn growth(&self) -> f64 {
        self.r_pow + 2.0 * self.q_pow
    }

    fn balanced(&self) -> bool {
        self.growth().abs() <= 1e-12 * (1.0 + self.r_pow.abs())
    }

    pub fn eval(&self, r: f64) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        let rp = if r == 0.0 {
            match self.r_pow.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => 1.0,
                _ => f64::INFINITY,
            }
        } else if r > 1e100 {
            let ln_r = r.ln();
            let e = self.r_pow * ln_r + self.q_pow * (2.0 * ln_r + (r * r).recip().ln_1p());
            return self.coef * e.exp();
        } else {
            r.powf(self.r_pow)
        };
        if rp == 0.0 {
            return 0.0;
        }
        let qp = if self.q_pow == 0.0 { 1.0 } else { (self.q_pow * (r * r).ln_1p()).exp() };
        self.coef * rp * qp
    }

    pub fn limit_at_infinity(&self) -> f64 {
        if self.coef == 0.0 {
            0.0
        } else if self.balanced() {
            self.coef
        } else if self.growth() < 0.0 {
            0.0
        } else {
            self.coef.signum() * f64::INFINITY
        }
    }

    fn deficit(&self, r: f64) -> f64 {
        if self.coef == 0.0 {
            0.0
        } else if self.balanced() {
            if self.r_pow == 0.0 {
                return 0.0;
            }
            // c - c (1 + r^-2)^(-a/2)
            let l = (r * r).recip().ln_1p();
            -self.coef * (-0.5 * self.r_pow * l).exp_m1()
        } else if self.growth() < 0.0 {
            -self.eval(r)
        } else {
            f64::NAN
        }
    }

    /// `Some(true)` if non-decreasing (or non-increasing when `increasing` is false) on `[s, t]`,
    /// `Some(false)` if it is strictly monotone the other way somewhere in `(s, t)`.
    fn certify(&self, s: f64, t: f64, increasing: bool) -> Option<bool> {
        if self.coef == 0.0 || s == t {
            return Some(true);
        }
        // d/dr = c r^(a-1) (1+r^2)^(b-1) (a + (a+2b) r^2)
        let a = self.r_pow;
        let g = self.growth();
        let want_positive = increasing == (self.coef > 0.0);
        let sign_ok = |x: f64| if want_positive { x >= 0.0 } else { x <= 0.0 };
        let at_s = a + g * s * s;
        let at_t_ok = if t.is_infinite() {
            if g == 0.0 {
                sign_ok(a)
            } else {
                sign_ok(g)
            }
        } else {
            sign_ok(a + g * t * t)
        };
        Some(sign_ok(at_s) && at_t_ok)
    }

    fn antiderivative(&self) -> Option<Expr> {
        let Monomial { coef, r_pow: a, q_pow: b } = *self;
        if coef == 0.0 {
            return Some(Expr::zero());
        }
        if b == 0.0 && a != -1.0 {
            return Some(Expr::mono(coef / (a + 1.0), a + 1.0, 0.0));
        }
        if a == 1.0 && b != -1.0 {
            return Some(Expr::mono(coef / (2.0 * (b + 1.0)), 0.0, b + 1.0));
        }
        None
    }

    fn derivative(&self) -> Expr {
        let Monomial { coef, r_pow: a, q_pow: b } = *self;
        Expr::sum(vec![
            Expr::mono(coef * a, a - 1.0, b - 1.0),
            Expr::mono(coef * (a + 2.0 * b), a + 1.0, b - 1.0),
        ])
    }
}

/// Piecewise-linear interpolation through `(xs, ys)`, constant outside the knot range.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl LinearTable {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Option<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return None;
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return None;
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return None;
        }
        Some(Self { xs, ys })
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn last_knot(&self) -> f64 {
        *self.xs.last().expect("non-empty table")
    }

    pub fn eval(&self, r: f64) -> f64 {
        let i = self.xs.partition_point(|&x| x < r);
        if i == 0 {
            return self.ys[0];
        }
        if i == self.xs.len() {
            return *self.ys.last().expect("non-empty table");
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        let w = (r - x0) / (x1 - x0);
        y0 + w * (y1 - y0)
    }

    pub fn slope(&self, r: f64) -> f64 {
        let i = self.xs.partition_point(|&x| x < r);
        if i == 0 || i == self.xs.len() {
            return 0.0;
        }
        (self.ys[i] - self.ys[i - 1]) / (self.xs[i] - self.xs[i - 1])
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut pts = vec![a];
        pts.extend(self.xs.iter().copied().filter(|&x| x > a && x < b));
        pts.push(b);
        pts.windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.eval(w[0]) + self.eval(w[1])))
            .sum()
    }

    fn certify(&self, s: f64, t: f64, increasing: bool) -> bool {
        let mut vals = vec![self.eval(s)];
        vals.extend(self.knots().filter(|&(x, _)| x > s && x < t).map(|(_, y)| y));
        vals.push(self.eval(t.min(self.last_knot().max(s))));
        vals.windows(2).all(|w| if increasing { w[0] <= w[1] } else { w[0] >= w[1] })
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            xs: self.xs.clone(),
            ys: self.ys.iter().map(|&y| f(y)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Mono(Monomial),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Pow(Box<Expr>, f64),
    Table(LinearTable),
}

impl Expr {
    pub fn mono(coef: f64, r_pow: f64, q_pow: f64) -> Self {
        if coef == 0.0 {
            return Self::zero();
        }
        Expr::Mono(Monomial::new(coef, r_pow, q_pow))
    }

    pub fn constant(c: f64) -> Self {
        Self::mono(c, 0.0, 0.0)
    }

    pub fn zero() -> Self {
        Expr::Mono(Monomial::new(0.0, 0.0, 0.0))
    }

    pub fn table(t: LinearTable) -> Self {
        if t.ys.iter().all(|&y| y == t.ys[0]) {
            return Self::constant(t.ys[0]);
        }
        Expr::Table(t)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Mono(m) if m.coef == 0.0 || (m.r_pow == 0.0 && m.q_pow == 0.0) => Some(m.coef),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn sum(terms: Vec<Expr>) -> Self {
        let mut monos: Vec<Monomial> = Vec::new();
        let mut others: Vec<Expr> = Vec::new();
        let mut stack = terms;
        while let Some(t) = stack.pop() {
            match t {
                Expr::Sum(inner) => stack.extend(inner),
                Expr::Mono(m) => {
                    if m.coef == 0.0 {
                        continue;
                    }
                    match monos.iter_mut().find(|x| x.r_pow == m.r_pow && x.q_pow == m.q_pow) {
                        Some(x) => x.coef += m.coef,
                        None => monos.push(m),
                    }
                }
                other => others.push(other),
            }
        }
        monos.retain(|m| m.coef != 0.0);
        monos.sort_by(|x, y| x.r_pow.total_cmp(&y.r_pow).then(x.q_pow.total_cmp(&y.q_pow)));
        others.reverse();
        let mut all: Vec<Expr> = monos.into_iter().map(Expr::Mono).collect();
        all.extend(others);
        match all.len() {
            0 => Self::zero(),
            1 => all.pop().expect("one term"),
            _ => Expr::Sum(all),
        }
    }

    pub fn prod(factors: Vec<Expr>) -> Self {
        let mut mono = Monomial::new(1.0, 0.0, 0.0);
        let mut powers: Vec<(Expr, f64)> = Vec::new();
        let mut stack = factors;
        while let Some(f) = stack.pop() {
            match f {
                Expr::Prod(inner) => stack.extend(inner),
                Expr::Mono(m) => {
                    if m.coef == 0.0 {
                        return Self::zero();
                    }
                    mono.coef *= m.coef;
                    mono.r_pow += m.r_pow;
                    mono.q_pow += m.q_pow;
                }
                other => {
                    let (base, k) = match other {
                        Expr::Pow(b, k) => (*b, k),
                        e => (e, 1.0),
                    };
                    match powers.iter_mut().find(|(b, _)| *b == base) {
                        Some(entry) => entry.1 += k,
                        None => powers.push((base, k)),
                    }
                }
            }
        }
        powers.reverse();
        let rest: Vec<Expr> = powers
            .into_iter()
            .filter(|(_, k)| *k != 0.0)
            .map(|(b, k)| if k == 1.0 { b } else { Expr::Pow(Box::new(b), k) })
            .collect();
        let unit = mono.coef == 1.0 && mono.r_pow == 0.0 && mono.q_pow == 0.0;
        if rest.is_empty() {
            return Expr::Mono(mono);
        }
        if rest.len() == 1 {
            if unit {
                return rest.into_iter().next().expect("one factor");
            }
            if let Expr::Sum(terms) = &rest[0] {
                return Self::sum(terms.iter().map(|t| Self::prod(vec![Expr::Mono(mono), t.clone()])).collect());
            }
            if let Expr::Table(t) = &rest[0] {
                if mono.r_pow == 0.0 && mono.q_pow == 0.0 && mono.coef >= 0.0 {
                    return Self::table(t.map_values(|y| mono.coef * y));
                }
            }
        }
        let mut all = Vec::with_capacity(rest.len() + 1);
        if !unit {
            all.push(Expr::Mono(mono));
        }
        all.extend(rest);
        Expr::Prod(all)
    }

    /// `self^k` for a non-negative base.
    pub fn pow(self, k: f64) -> Self {
        if k == 1.0 {
            return self;
        }
        if k == 0.0 {
            return Self::constant(1.0);
        }
        match self {
            Expr::Mono(m) if m.coef > 0.0 => Expr::Mono(Monomial::new(m.coef.powf(k), m.r_pow * k, m.q_pow * k)),
            Expr::Mono(m) if m.coef == 0.0 && k > 0.0 => Self::zero(),
            Expr::Pow(b, a) => b.pow(a * k),
            Expr::Prod(fs) => Self::prod(fs.into_iter().map(|f| f.pow(k)).collect()),
            other => Expr::Pow(Box::new(other), k),
        }
    }

    pub fn scale(self, c: f64) -> Self {
        Self::prod(vec![Self::constant(c), self])
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Expr::Mono(m) => m.eval(r),
            Expr::Sum(ts) => ts.iter().map(|t| t.eval(r)).sum(),
            Expr::Prod(fs) => {
                let vals: Vec<f64> = fs.iter().map(|f| f.eval(r)).collect();
                if vals.iter().any(|&v| v == 0.0) {
                    0.0
                } else {
                    vals.iter().product()
                }
            }
            Expr::Pow(b, k) => {
                let v = b.eval(r).max(0.0);
                v.powf(*k)
            }
            Expr::Table(t) => t.eval(r),
        }
    }

    /// Limit as `r -> infinity`; NaN for undetermined forms.
    pub fn limit_at_infinity(&self) -> f64 {
        match self {
            Expr::Mono(m) => m.limit_at_infinity(),
            Expr::Sum(ts) => ts.iter().map(|t| t.limit_at_infinity()).sum(),
            Expr::Prod(fs) => fs.iter().map(|f| f.limit_at_infinity()).product(),
            Expr::Pow(b, k) => b.limit_at_infinity().max(0.0).powf(*k),
            Expr::Table(t) => *t.ys.last().expect("non-empty table"),
        }
    }

    /// `limit_at_infinity() - eval(r)`, evaluated without cancellation for the forms in use.
    pub fn deficit(&self, r: f64) -> f64 {
        match self {
            Expr::Mono(m) => m.deficit(r),
            Expr::Sum(ts) => ts.iter().map(|t| t.deficit(r)).sum(),
            Expr::Prod(fs) => {
                let lims: Vec<f64> = fs.iter().map(|f| f.limit_at_infinity()).collect();
                let vals: Vec<f64> = fs.iter().map(|f| f.eval(r)).collect();
                (0..fs.len())
                    .map(|i| {
                        let before: f64 = lims[..i].iter().product();
                        let after: f64 = vals[i + 1..].iter().product();
                        before * fs[i].deficit(r) * after
                    })
                    .sum()
            }
            Expr::Pow(b, k) => {
                let lb = b.limit_at_infinity();
                if lb > 0.0 {
                    let d = b.deficit(r);
                    -lb.powf(*k) * (k * (-d / lb).ln_1p()).exp_m1()
                } else {
                    self.limit_at_infinity() - self.eval(r)
                }
            }
            Expr::Table(t) => t.ys.last().expect("non-empty table") - t.eval(r),
        }
    }

    /// Point from which `deficit` is identically zero, if known structurally.
    pub fn deficit_vanishes_from(&self, s: f64) -> Option<f64> {
        match self {
            Expr::Mono(m) if m.coef == 0.0 || (m.r_pow == 0.0 && m.q_pow == 0.0) => Some(s),
            Expr::Table(t) => Some(t.last_knot().max(s)),
            _ => None,
        }
    }

    pub fn antiderivative(&self) -> Option<Expr> {
        match self {
            Expr::Mono(m) => m.antiderivative(),
            Expr::Sum(ts) => ts.iter().map(|t| t.antiderivative()).collect::<Option<Vec<_>>>().map(Self::sum),
            _ => None,
        }
    }

    /// Symbolic derivative; `None` for tables.
    pub fn derivative(&self) -> Option<Expr> {
        match self {
            Expr::Mono(m) => Some(m.derivative()),
            Expr::Sum(ts) => ts.iter().map(|t| t.derivative()).collect::<Option<Vec<_>>>().map(Self::sum),
            Expr::Prod(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for i in 0..fs.len() {
                    let mut factors = fs.clone();
                    factors[i] = fs[i].derivative()?;
                    terms.push(Self::prod(factors));
                }
                Some(Self::sum(terms))
            }
            Expr::Pow(b, k) => Some(Self::prod(vec![
                Self::constant(*k),
                (**b).clone().pow(k - 1.0),
                b.derivative()?,
            ])),
            Expr::Table(_) => None,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            Expr::Mono(m) => m.coef >= 0.0,
            Expr::Sum(ts) => ts.iter().all(Expr::is_nonnegative),
            Expr::Prod(fs) => fs.iter().all(Expr::is_nonnegative),
            Expr::Pow(_, _) => true,
            Expr::Table(t) => t.ys.iter().all(|&y| y >= 0.0),
        }
    }

    /// Exact monotonicity certificate on `[s, t]` (`t` may be infinite).
    ///
    /// `Some(true)`: monotone in the requested direction. `Some(false)`: provably not.
    /// `None`: undecided by structure alone.
    pub fn certify_monotone(&self, s: f64, t: f64, increasing: bool) -> Option<bool> {
        match self {
            Expr::Mono(m) => m.certify(s, t, increasing),
            Expr::Table(tab) => Some(tab.certify(s, t, increasing)),
            Expr::Sum(ts) => ts
                .iter()
                .all(|e| e.certify_monotone(s, t, increasing) == Some(true))
                .then_some(true),
            Expr::Prod(fs) => fs
                .iter()
                .all(|f| f.is_nonnegative() && f.certify_monotone(s, t, increasing) == Some(true))
                .then_some(true),
            Expr::Pow(b, k) => {
                let dir = if *k > 0.0 { increasing } else { !increasing };
                (b.is_nonnegative() && b.certify_monotone(s, t, dir) == Some(true)).then_some(true)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn u_b_slope() -> Expr {
        Expr::mono(1.0, 1.0, -0.5)
    }

    #[test]
    fn monomial_evaluation() {
        let e = u_b_slope();
        assert_abs_diff_eq!(e.eval(1.0), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(e.eval(0.0), 0.0);
        assert_abs_diff_eq!(e.eval(1e200), 1.0, epsilon = 1e-15);
        assert_eq!(Expr::mono(2.0, -1.0, 0.0).eval(0.0), f64::INFINITY);
        assert_eq!(Expr::constant(3.0).eval(0.0), 3.0);
    }

    #[test]
    fn normal_forms() {
        let p = Expr::prod(vec![Expr::mono(2.0, 1.0, 0.0), Expr::mono(3.0, 2.0, -1.0)]);
        assert_eq!(p, Expr::mono(6.0, 3.0, -1.0));
        let s = Expr::sum(vec![Expr::mono(1.0, 2.0, 0.0), Expr::mono(-1.0, 2.0, 0.0)]);
        assert!(s.is_zero());
        let root = Expr::mono(4.0, 2.0, -1.0).pow(0.5);
        assert_eq!(root, Expr::mono(2.0, 1.0, -0.5));
        let ball = Expr::mono(std::f64::consts::PI, 3.0, -1.5);
        let ratio = Expr::prod(vec![ball, u_b_slope().pow(-1.0)]);
        assert_eq!(ratio, Expr::mono(std::f64::consts::PI, 2.0, -1.0));
    }

    #[test]
    fn mono_distributes_over_sum() {
        let s = Expr::sum(vec![Expr::constant(1.0), Expr::mono(1.0, 2.0, 0.0)]);
        let p = Expr::prod(vec![Expr::mono(2.0, -1.0, 0.0), s]);
        assert_eq!(p, Expr::sum(vec![Expr::mono(2.0, -1.0, 0.0), Expr::mono(2.0, 1.0, 0.0)]));
    }

    #[test]
    fn pow_of_sum_stays_symbolic() {
        let s = Expr::sum(vec![Expr::constant(1.0), Expr::mono(1.0, 2.0, 0.0)]);
        let e = s.clone().pow(0.5);
        assert_abs_diff_eq!(e.eval(2.0), 5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(e.clone().pow(2.0), s);
    }

    #[test]
    fn limits_and_deficits() {
        let e = u_b_slope();
        assert_eq!(e.limit_at_infinity(), 1.0);
        let r: f64 = 1e6;
        let w = (1.0 + r * r).sqrt();
        let exact = 1.0 / (w * (w + r));
        assert!((e.deficit(r) - exact).abs() < 1e-20);
        assert!(e.deficit(1e9) > 0.0);
        let cube = e.clone().pow(3.0);
        let d = cube.deficit(1e5);
        assert!((d - 1.5e-10).abs() < 1e-14);
        assert!(Expr::mono(1.0, 1.0, 0.0).limit_at_infinity().is_infinite());
        let p = Expr::prod(vec![Expr::Pow(Box::new(Expr::sum(vec![e.clone(), Expr::constant(1.0)])), 0.5), Expr::constant(2.0)]);
        assert!((p.limit_at_infinity() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!((p.deficit(3.0) - (p.limit_at_infinity() - p.eval(3.0))).abs() < 1e-14);
    }

    #[test]
    fn antiderivatives() {
        let a = Expr::mono(3.0, 2.0, 0.0).antiderivative().unwrap();
        assert_abs_diff_eq!(a.eval(2.0), 8.0, epsilon = 1e-14);
        let b = u_b_slope().antiderivative().unwrap();
        assert_abs_diff_eq!(b.eval(1.0) - b.eval(0.0), 2f64.sqrt() - 1.0, epsilon = 1e-15);
        assert!(Expr::mono(1.0, -1.0, 0.0).antiderivative().is_none());
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let e = Expr::sum(vec![Expr::mono(2.0, 1.5, -0.25), Expr::mono(1.0, 3.0, 0.0).pow(0.5)]);
        let d = e.derivative().unwrap();
        for &r in &[0.3, 1.0, 2.7] {
            let h = 1e-6;
            let fd = (e.eval(r + h) - e.eval(r - h)) / (2.0 * h);
            assert!((d.eval(r) - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn monotonicity_certificates() {
        assert_eq!(u_b_slope().certify_monotone(0.0, f64::INFINITY, true), Some(true));
        assert_eq!(Expr::mono(1.0, -1.0, 0.0).certify_monotone(0.5, 1.0, true), Some(false));
        // r (1+r^2)^-1 increases up to r = 1
        let bump = Expr::mono(1.0, 1.0, -1.0);
        assert_eq!(bump.certify_monotone(0.0, 1.0, true), Some(true));
        assert_eq!(bump.certify_monotone(0.0, 1.5, true), Some(false));
        let s = Expr::sum(vec![Expr::mono(1.0, 2.0, 0.0), Expr::mono(-1.0, 1.0, 0.0)]);
        assert_eq!(s.certify_monotone(0.0, 1.0, true), None);
        let t = LinearTable::new(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0]).unwrap();
        assert_eq!(Expr::table(t.clone()).certify_monotone(0.0, 1.0, true), Some(true));
        assert_eq!(Expr::table(t).certify_monotone(0.0, 2.0, true), Some(false));
        let inv = u_b_slope().pow(-2.0);
        assert_eq!(inv.certify_monotone(0.1, 3.0, false), Some(true));
    }

    #[test]
    fn table_integral_is_exact() {
        let t = LinearTable::new(vec![0.0, 1.0, 3.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert_abs_diff_eq!(t.integral(0.0, 3.0), 4.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t.integral(0.5, 4.0), 4.5 - 0.125 + 3.0, epsilon = 1e-15);
    }
}
