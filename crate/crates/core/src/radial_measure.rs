//! Rotationally invariant measures on open balls, stored by their mass on centred open balls.

use crate::error::{Error, Result};
use crate::expr::{Expr, LinearTable};
use crate::numerics::unit_ball_volume;
use crate::piecewise::{LeftMonotoneFn, Piece, Piecewise};

/// A piece of a radial density `ρ` (mass per unit radius) on `(previous end, end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPiece {
    pub end: f64,
    pub density: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialMeasure {
    n: usize,
    radius: Option<f64>,
    cumulative: LeftMonotoneFn,
}

fn domain_end(radius: Option<f64>) -> f64 {
    radius.unwrap_or(f64::INFINITY)
}

fn check_radius(radius: Option<f64>) -> Result<()> {
    match radius {
        Some(r) if !(r.is_finite() && r > 0.0) => Err(Error::InvalidSpec(format!("radius must be positive, got {r}"))),
        _ => Ok(()),
    }
}

impl RadialMeasure {
    /// Measure with an atom at the origin, atoms on spheres `|x| = r_i`, and a radial density
    /// whose pieces all have closed-form primitives. The density vanishes past its last piece.
    pub fn from_parts(
        n: usize,
        radius: Option<f64>,
        origin_atom: f64,
        sphere_atoms: &[(f64, f64)],
        density: &[DensityPiece],
    ) -> Result<Self> {
        check_radius(radius)?;
        let end = domain_end(radius);
        if !(origin_atom >= 0.0 && origin_atom.is_finite()) {
            return Err(Error::InvalidSpec(format!("origin atom must be non-negative, got {origin_atom}")));
        }
        for &(r, m) in sphere_atoms {
            if !(r > 0.0 && r < end) {
                return Err(Error::InvalidSpec(format!("sphere atom radius {r} must lie in (0, {end})")));
            }
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::InvalidSpec(format!("atom mass must be non-negative, got {m}")));
            }
        }
        let mut prev = 0.0;
        let mut primitives = Vec::with_capacity(density.len());
        for d in density {
            if !(d.end > prev && d.end <= end) {
                return Err(Error::InvalidSpec(format!("density breakpoint {} out of order or outside the domain", d.end)));
            }
            let prim = d
                .density
                .antiderivative()
                .ok_or_else(|| Error::InvalidSpec("density piece has no closed-form primitive".into()))?;
            primitives.push((prev, d.end, prim));
            prev = d.end;
        }
        if prev < end {
            primitives.push((prev, end, Expr::zero()));
        }

        let mut cuts: Vec<f64> = primitives.iter().map(|p| p.1).collect();
        cuts.extend(sphere_atoms.iter().map(|a| a.0));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut pieces = Vec::with_capacity(cuts.len());
        let mut mass_before = origin_atom;
        let mut start = 0.0;
        let mut k = 0;
        for &c in &cuts {
            while primitives[k].1 < c {
                k += 1;
            }
            let prim = &primitives[k].2;
            let at_start = prim.eval(start);
            if !at_start.is_finite() {
                return Err(Error::InvalidSpec(format!("density is not integrable at r = {start}")));
            }
            let expr = Expr::sum(vec![Expr::constant(mass_before - at_start), prim.clone()]);
            pieces.push(Piece { end: c, expr });
            mass_before += prim.eval(c) - at_start;
            mass_before += sphere_atoms.iter().filter(|a| a.0 == c).map(|a| a.1).sum::<f64>();
            start = c;
        }
        let cumulative = LeftMonotoneFn::try_from_piecewise(Piecewise::new(pieces)?, "cumulative mass")?;
        Self::from_cumulative(n, radius, cumulative)
    }

    /// Measure with density `f(x) = Σ c |x|^a` on each piece `(previous end, end]`.
    pub fn from_spatial_density(n: usize, radius: Option<f64>, pieces: &[(f64, Vec<(f64, f64)>)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        let kappa = unit_ball_volume(n);
        let nf = n as f64;
        let mut density = Vec::with_capacity(pieces.len());
        for (end, terms) in pieces {
            let mut ts = Vec::with_capacity(terms.len());
            for &(c, a) in terms {
                if c < 0.0 {
                    return Err(Error::InvalidSpec(format!("spatial density coefficient {c} is negative")));
                }
                if a + nf <= 0.0 {
                    return Err(Error::InvalidSpec(format!("|x|^{a} is not locally integrable in dimension {n}")));
                }
                ts.push(Expr::mono(nf * kappa * c, a + nf - 1.0, 0.0));
            }
            density.push(DensityPiece { end: *end, density: Expr::sum(ts) });
        }
        Self::from_parts(n, radius, 0.0, &[], &density)
    }

    pub fn lebesgue(n: usize, radius: Option<f64>) -> Result<Self> {
        let end = domain_end(radius);
        Self::from_spatial_density(n, radius, &[(end, vec![(1.0, 0.0)])])
    }

    pub fn origin_atom_measure(n: usize, radius: Option<f64>, mass: f64) -> Result<Self> {
        Self::from_parts(n, radius, mass, &[], &[])
    }

    pub fn from_cumulative(n: usize, radius: Option<f64>, cumulative: LeftMonotoneFn) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        check_radius(radius)?;
        if cumulative.domain_end() != domain_end(radius) {
            return Err(Error::InvalidSpec(format!(
                "cumulative mass is defined on (0, {}] but the measure lives on radius {}",
                cumulative.domain_end(),
                domain_end(radius)
            )));
        }
        Ok(Self { n, radius, cumulative })
    }

    /// Cumulative mass interpolated linearly through `(r_i, m_i)`, constant past the last knot.
    pub fn from_cumulative_table(n: usize, radius: Option<f64>, radii: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        let table = LinearTable::new(radii, masses)
            .ok_or_else(|| Error::InvalidSpec("cumulative table must have matching, finite, increasing knots".into()))?;
        let pw = Piecewise::single(domain_end(radius), Expr::table(table));
        let cumulative = LeftMonotoneFn::try_from_piecewise(pw, "cumulative table")?;
        Self::from_cumulative(n, radius, cumulative)
    }

    pub fn zero(n: usize, radius: Option<f64>) -> Result<Self> {
        Self::origin_atom_measure(n, radius, 0.0)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn domain_end(&self) -> f64 {
        domain_end(self.radius)
    }

    pub fn cumulative(&self) -> &LeftMonotoneFn {
        &self.cumulative
    }

    /// `μ(D_r)`, the mass of the open ball of radius `r`.
    pub fn cumulative_mass(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= self.domain_end()) || r.is_infinite() {
            return Err(Error::OutOfDomain { r, domain: self.domain_end() });
        }
        Ok(self.cumulative.eval(r))
    }

    pub fn origin_atom(&self) -> f64 {
        self.cumulative.value_at_zero()
    }

    pub fn sphere_atoms(&self) -> Vec<(f64, f64)> {
        self.cumulative.jumps()
    }

    /// Mass per unit radius at a point where the cumulative mass is smooth.
    pub fn density(&self, r: f64) -> f64 {
        self.cumulative.piecewise().derivative_at(r)
    }

    pub fn total_mass(&self) -> f64 {
        self.cumulative.limit()
    }

    fn check_compatible(&self, other: &RadialMeasure) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        if self.radius != other.radius {
            return Err(Error::InvalidSpec(format!(
                "measures live on different balls ({:?} vs {:?})",
                self.radius, other.radius
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &RadialMeasure) -> Result<RadialMeasure> {
        self.check_compatible(other)?;
        let pw = self.cumulative.piecewise().add(other.cumulative.piecewise());
        let cumulative = LeftMonotoneFn::try_from_piecewise(pw, "sum of cumulative masses")?;
        Ok(Self { cumulative, ..self.clone() })
    }

    pub fn scale(&self, lambda: f64) -> Result<RadialMeasure> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidSpec(format!("scale factor must be non-negative, got {lambda}")));
        }
        let pw = self.cumulative.piecewise().scale(lambda);
        let cumulative = LeftMonotoneFn::try_from_piecewise(pw, "scaled cumulative mass")?;
        Ok(Self { cumulative, ..self.clone() })
    }
}
