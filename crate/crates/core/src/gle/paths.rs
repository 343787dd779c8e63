//! Polyline paths on the torus avoiding the singular set `E_τ[2] ∪ {±p} + Λ`.
//!
//! Straight segments that pass within `DETOUR_FACTOR · clearance` of a
//! singular point are replaced by an arc of a regular polygon around it.
//! Around `±p` the arc goes on the side meeting fewer translates of the cut
//! `L = [−p, p]`.

use num_complex::Complex;

use crate::elliptic::{half_periods, EllipticContext};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

use super::GLEParams;

/// Detours trigger within this multiple of the clearance.
pub const DETOUR_FACTOR: f64 = 1.1;
/// Sides of the full polygon a detour arc is cut from.
pub const DETOUR_SIDES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularKind {
    HalfPeriod(usize),
    Plus,
    Minus,
}

/// Base representatives of the singular points and the cut `L`.
#[derive(Debug, Clone)]
pub struct SingularSet<T: Real> {
    pub points: Vec<(C<T>, SingularKind)>,
    /// Representative of `p` closest to the origin; `L = [−p̂, p̂]`.
    pub p_hat: C<T>,
}

fn cross<T: Real>(a: C<T>, b: C<T>) -> T {
    a.re * b.im - a.im * b.re
}

fn dot<T: Real>(a: C<T>, b: C<T>) -> T {
    a.re * b.re + a.im * b.im
}

/// Distance from `x` to the segment `[a, b]`.
pub(crate) fn point_segment_dist<T: Real>(x: C<T>, a: C<T>, b: C<T>) -> T {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == T::zero() {
        return (x - a).norm();
    }
    let t = (dot(x - a, d) / len2).max(T::zero()).min(T::one());
    (x - (a + d * t)).norm()
}

fn segments_cross<T: Real>(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> bool {
    let o1 = cross(b - a, c - a);
    let o2 = cross(b - a, d - a);
    let o3 = cross(d - c, a - c);
    let o4 = cross(d - c, b - c);
    o1 * o2 < T::zero() && o3 * o4 < T::zero()
}

impl<T: Real> SingularSet<T> {
    pub fn new(ctx: &EllipticContext<T>, params: &GLEParams<T>) -> Self {
        let p_hat = ctx.nearest_lattice_offset(params.p.z);
        let mut points: Vec<(C<T>, SingularKind)> = half_periods(&ctx.tau)
            .iter()
            .enumerate()
            .map(|(k, h)| (*h, SingularKind::HalfPeriod(k)))
            .collect();
        points.push((p_hat, SingularKind::Plus));
        points.push((-p_hat, SingularKind::Minus));
        SingularSet { points, p_hat }
    }

    /// Lattice translates of `x` within `radius` of the segment `[a, b]`.
    fn translates_near(
        ctx: &EllipticContext<T>,
        x: C<T>,
        a: C<T>,
        b: C<T>,
        radius: T,
    ) -> Vec<C<T>> {
        let (ra, sa) = ctx.real_coords(a - x);
        let (rb, sb) = ctx.real_coords(b - x);
        let m0 = ra.min(rb).floor().to_i64().unwrap_or(0) - 2;
        let m1 = ra.max(rb).ceil().to_i64().unwrap_or(0) + 2;
        let n0 = sa.min(sb).floor().to_i64().unwrap_or(0) - 2;
        let n1 = sa.max(sb).ceil().to_i64().unwrap_or(0) + 2;
        let mut out = Vec::new();
        for m in m0..=m1 {
            for n in n0..=n1 {
                let y = x + ctx.from_coords(T::from_i64(m).unwrap(), T::from_i64(n).unwrap());
                if point_segment_dist(y, a, b) < radius {
                    out.push(y);
                }
            }
        }
        out
    }

    /// Singular points (as translates) within `radius` of `[a, b]`.
    pub fn near_segment(
        &self,
        ctx: &EllipticContext<T>,
        a: C<T>,
        b: C<T>,
        radius: T,
    ) -> Vec<(C<T>, SingularKind)> {
        let mut out = Vec::new();
        for &(x, kind) in &self.points {
            for y in Self::translates_near(ctx, x, a, b, radius) {
                out.push((y, kind));
            }
        }
        out
    }

    /// Distance from `z` to the singular set on the torus.
    pub fn distance(&self, ctx: &EllipticContext<T>, z: C<T>) -> T {
        self.points
            .iter()
            .map(|(x, _)| ctx.torus_dist(z, *x))
            .fold(T::infinity(), T::min)
    }

    /// Distance from the segment `[a, b]` to the singular set.
    pub fn segment_distance(&self, ctx: &EllipticContext<T>, a: C<T>, b: C<T>, probe: T) -> T {
        self.near_segment(ctx, a, b, probe)
            .iter()
            .map(|(x, _)| point_segment_dist(*x, a, b))
            .fold(probe, T::min)
    }

    /// Number of crossings of `[a, b]` with `L + Λ`.
    pub fn cut_crossings(&self, ctx: &EllipticContext<T>, a: C<T>, b: C<T>) -> usize {
        let zero = Complex::new(T::zero(), T::zero());
        let reach = self.p_hat.norm() * T::lit(1.01) + T::lit(1e-9);
        Self::translates_near(ctx, zero, a, b, reach)
            .into_iter()
            .filter(|l| segments_cross(a, b, *l - self.p_hat, *l + self.p_hat))
            .count()
    }

    /// Distance from `z` to `L + Λ`.
    pub fn cut_distance(&self, ctx: &EllipticContext<T>, z: C<T>) -> T {
        let zero = Complex::new(T::zero(), T::zero());
        let reach = self.p_hat.norm() * T::lit(1.01) + T::one();
        Self::translates_near(ctx, zero, z, z, reach)
            .into_iter()
            .map(|l| point_segment_dist(z, l - self.p_hat, l + self.p_hat))
            .fold(T::infinity(), T::min)
    }
}

/// Polyline with a guaranteed clearance from the singular set.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec<T: Real> {
    pub vertices: Vec<C<T>>,
    pub clearance: T,
}

impl<T: Real> PathSpec<T> {
    pub fn start(&self) -> C<T> {
        self.vertices[0]
    }

    pub fn end(&self) -> C<T> {
        *self.vertices.last().unwrap()
    }

    pub fn length(&self) -> T {
        self.vertices
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        PathSpec {
            vertices: v,
            clearance: self.clearance,
        }
    }

    /// Minimum distance of the path from the singular set.
    pub fn min_distance(&self, ctx: &EllipticContext<T>, sing: &SingularSet<T>) -> T {
        let probe = T::one();
        if self.vertices.len() == 1 {
            return sing.distance(ctx, self.vertices[0]);
        }
        self.vertices
            .windows(2)
            .map(|w| sing.segment_distance(ctx, w[0], w[1], probe))
            .fold(T::infinity(), T::min)
    }

    pub fn validate(&self, ctx: &EllipticContext<T>, sing: &SingularSet<T>) -> Result<()> {
        let d = self.min_distance(ctx, sing);
        if d < self.clearance {
            return Err(Error::SingularityProximity {
                distance: d.as_f64(),
                clearance: self.clearance.as_f64(),
            });
        }
        Ok(())
    }

    pub fn cut_crossings(&self, ctx: &EllipticContext<T>, sing: &SingularSet<T>) -> usize {
        self.vertices
            .windows(2)
            .map(|w| sing.cut_crossings(ctx, w[0], w[1]))
            .sum()
    }
}

fn detour_radius<T: Real>(clearance: T) -> (T, T) {
    let trigger = clearance * T::lit(DETOUR_FACTOR);
    let sides = T::from_usize(DETOUR_SIDES).unwrap();
    (trigger, trigger / (T::PI() / sides).cos())
}

fn arc<T: Real>(center: C<T>, radius: T, from: T, span: T) -> Vec<C<T>> {
    let sides = T::from_usize(DETOUR_SIDES).unwrap();
    let pieces = (span.abs() / (T::lit(2.0) * T::PI() / sides))
        .ceil()
        .max(T::one());
    let k = pieces.to_usize().unwrap();
    (0..=k)
        .map(|j| {
            let th = from + span * T::from_usize(j).unwrap() / pieces;
            center + Complex::from_polar(radius, th)
        })
        .collect()
}

/// Polyline from `from` to `to` with detours around singular points.
pub fn route<T: Real>(
    ctx: &EllipticContext<T>,
    sing: &SingularSet<T>,
    from: C<T>,
    to: C<T>,
    clearance: T,
) -> Result<Vec<C<T>>> {
    let (trigger, rho) = detour_radius(clearance);
    let d = to - from;
    let len2 = d.norm_sqr();
    if len2 == T::zero() {
        return Ok(vec![from]);
    }
    let mut hits: Vec<(T, T, C<T>, SingularKind)> = Vec::new();
    for (o, kind) in sing.near_segment(ctx, from, to, trigger) {
        let f = from - o;
        let bq = dot(f, d);
        let cq = f.norm_sqr() - rho * rho;
        let disc = bq * bq - len2 * cq;
        if disc <= T::zero() {
            continue;
        }
        let sq = disc.sqrt();
        let t_in = (-bq - sq) / len2;
        let t_out = (-bq + sq) / len2;
        if t_in <= T::zero() || t_out >= T::one() {
            let dist = (from - o).norm().min((to - o).norm());
            return Err(Error::SingularityProximity {
                distance: dist.as_f64(),
                clearance: rho.as_f64(),
            });
        }
        hits.push((t_in, t_out, o, kind));
    }
    hits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    for w in hits.windows(2) {
        if w[0].1 >= w[1].0 {
            return Err(Error::SingularityProximity {
                distance: (w[0].2 - w[1].2).norm().as_f64(),
                clearance: (rho * T::lit(2.0)).as_f64(),
            });
        }
    }

    let two_pi = T::lit(2.0) * T::PI();
    let mut out = vec![from];
    for (t_in, t_out, o, kind) in hits {
        let entry = from + d * t_in;
        let exit = from + d * t_out;
        let th_in = (entry - o).arg();
        let th_out = (exit - o).arg();
        let mut ccw = th_out - th_in;
        while ccw <= T::zero() {
            ccw += two_pi;
        }
        let cw = ccw - two_pi;
        let a_ccw = arc(o, rho, th_in, ccw);
        let a_cw = arc(o, rho, th_in, cw);
        let choose_ccw = match kind {
            SingularKind::HalfPeriod(_) => ccw <= -cw,
            SingularKind::Plus | SingularKind::Minus => {
                let count = |pts: &Vec<C<T>>| -> usize {
                    pts.windows(2)
                        .map(|w| sing.cut_crossings(ctx, w[0], w[1]))
                        .sum()
                };
                let (c1, c2) = (count(&a_ccw), count(&a_cw));
                if c1 != c2 {
                    c1 < c2
                } else {
                    ccw <= -cw
                }
            }
        };
        let chosen = if choose_ccw { a_ccw } else { a_cw };
        out.extend(chosen);
    }
    out.push(to);
    Ok(out)
}

/// Basepoint `0.37 + 0.29τ`, nudged by at most 0.05 until it clears the
/// singular set and the cut.
pub fn default_basepoint<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    clearance: T,
) -> Result<C<T>> {
    let sing = SingularSet::new(ctx, params);
    let base = ctx.from_coords(T::lit(0.37), T::lit(0.29));
    let (_, rho) = detour_radius(clearance);
    let ok = |q: C<T>| {
        sing.distance(ctx, q) >= rho * T::lit(1.5) && sing.cut_distance(ctx, q) >= clearance
    };
    if ok(base) {
        return Ok(base);
    }
    for step in 1..=5 {
        let radius = T::lit(0.01) * T::from_i32(step).unwrap();
        for k in 0..8 {
            let th = T::PI() * T::from_i32(k).unwrap() / T::lit(4.0);
            let q = base + Complex::from_polar(radius, th);
            if ok(q) {
                return Ok(q);
            }
        }
    }
    Err(Error::NoValidBasepoint {
        clearance: clearance.as_f64(),
    })
}

/// The cycles `ℓ₁, ℓ₂` from `q₀` to `q₀ + 1`, `q₀ + τ`, and loops `γ±`
/// running once counter-clockwise around the translates of `±p` nearest `q₀`.
#[derive(Debug, Clone)]
pub struct Cycles<T: Real> {
    pub l1: PathSpec<T>,
    pub l2: PathSpec<T>,
    pub gamma_plus: PathSpec<T>,
    pub gamma_minus: PathSpec<T>,
}

pub fn build_cycles<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    q0: C<T>,
    clearance: T,
) -> Result<Cycles<T>> {
    let sing = SingularSet::new(ctx, params);
    let (_, rho) = detour_radius(clearance);
    if sing.distance(ctx, q0) < rho * T::lit(1.5) || sing.cut_distance(ctx, q0) < clearance {
        return Err(Error::NoValidBasepoint {
            clearance: clearance.as_f64(),
        });
    }
    let mk = |vertices: Vec<C<T>>| -> Result<PathSpec<T>> {
        let path = PathSpec {
            vertices,
            clearance,
        };
        path.validate(ctx, &sing)?;
        Ok(path)
    };
    let one = Complex::new(T::one(), T::zero());
    let l1 = mk(route(ctx, &sing, q0, q0 + one, clearance)?)?;
    let l2 = mk(route(ctx, &sing, q0, q0 + ctx.tau_value(), clearance)?)?;
    let mut loops = Vec::with_capacity(2);
    for sign in [T::one(), -T::one()] {
        let o = ctx.nearest_representative(sing.p_hat * sign, q0);
        let dir = (q0 - o) / (q0 - o).norm();
        let touch = o + dir * rho;
        let tail = route(ctx, &sing, q0, touch, clearance)?;
        let th = dir.arg();
        let circle = arc(o, rho, th, T::lit(2.0) * T::PI());
        let mut v = tail.clone();
        v.extend(circle.into_iter().skip(1));
        v.extend(tail.into_iter().rev().skip(1));
        loops.push(mk(v)?);
    }
    let gamma_minus = loops.pop().unwrap();
    let gamma_plus = loops.pop().unwrap();
    Ok(Cycles {
        l1,
        l2,
        gamma_plus,
        gamma_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{make_context, Tau};
    use crate::hitchin::PVIIndex;

    fn setup() -> (EllipticContext<f64>, GLEParams<f64>) {
        let c = make_context(Tau::from_parts(0.2, 1.1).unwrap(), 1e-10).unwrap();
        let g = GLEParams::new(&c, PVIIndex::ZERO, C::new(0.31, 0.22), C::new(0.3, 0.1)).unwrap();
        (c, g)
    }

    #[test]
    fn straight_path_without_obstacles() {
        let (c, g) = setup();
        let sing = SingularSet::new(&c, &g);
        let v = route(&c, &sing, C::new(0.1, 0.7), C::new(0.2, 0.7), 0.05).unwrap();
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn detour_around_half_period_keeps_clearance() {
        let (c, g) = setup();
        let sing = SingularSet::new(&c, &g);
        let v = route(&c, &sing, C::new(0.3, 0.01), C::new(0.7, -0.01), 0.05).unwrap();
        assert!(v.len() > 3);
        let path = PathSpec {
            vertices: v,
            clearance: 0.05,
        };
        assert!(path.min_distance(&c, &sing) >= 0.05);
    }

    #[test]
    fn cycles_are_valid() {
        let (c, g) = setup();
        let q0 = default_basepoint(&c, &g, 0.05).unwrap();
        let cy = build_cycles(&c, &g, q0, 0.05).unwrap();
        for path in [&cy.l1, &cy.l2, &cy.gamma_plus, &cy.gamma_minus] {
            let sing = SingularSet::new(&c, &g);
            assert!(path.min_distance(&c, &sing) >= 0.05);
            assert!((path.start() - q0).norm() < 1e-15);
        }
        assert!((cy.l1.end() - q0 - 1.0).norm() < 1e-12);
        assert!((cy.gamma_plus.end() - q0).norm() < 1e-15);
    }

    #[test]
    fn crossing_count() {
        let (c, g) = setup();
        let sing = SingularSet::new(&c, &g);
        let p = sing.p_hat;
        let n = p * C::new(0.0, 1.0) / p.norm();
        assert_eq!(
            sing.cut_crossings(&c, p * 0.5 - n * 0.1, p * 0.5 + n * 0.1),
            1
        );
        assert_eq!(
            sing.cut_crossings(&c, p * 1.5 - n * 0.1, p * 1.5 + n * 0.1),
            0
        );
    }
}
