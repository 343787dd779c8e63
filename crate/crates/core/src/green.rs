//! Gradients and critical points of the torus Green function `G` and of
//! `G_p(z) = ½(G(z − p) + G(z + p))`.
//!
//! Only `−4π ∂G/∂z = ζ(z) − rη₁ − sη₂` is ever evaluated; the potential itself
//! is never needed.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::elliptic::{half_periods, EllipticContext, TorusPoint};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// The source pair `±p` of `G_p`, with `p` off the half-periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPair<T: Real> {
    pub p: TorusPoint<T>,
}

impl<T: Real> SingularPair<T> {
    pub fn new(ctx: &EllipticContext<T>, p: C<T>) -> Result<Self> {
        let pt = ctx.lattice_reduce(p);
        if pt.is_half_period(ctx.tol) {
            return Err(Error::HalfPeriodInput);
        }
        Ok(SingularPair { p: pt })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Trivial,
    Nontrivial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint<T: Real> {
    pub location: TorusPoint<T>,
    pub kind: CriticalKind,
    /// `|−4π ∂G/∂z|` at the location.
    pub residual: T,
    pub hessian_det: T,
}

/// `−4π ∂G/∂z = ζ(z) − rη₁ − sη₂` with `(r, s)` the real coordinates of `z`.
///
/// The expression is doubly periodic, so no reduction of `z` is needed.
pub fn green_grad<T: Real>(ctx: &EllipticContext<T>, z: C<T>) -> Result<C<T>> {
    let (r, s) = ctx.real_coords(z);
    Ok(ctx.wzeta(z)? - ctx.eta_of(r, s))
}

fn check_sources<T: Real>(ctx: &EllipticContext<T>, pair: &SingularPair<T>, z: C<T>) -> Result<()> {
    let d = ctx
        .torus_dist(z, pair.p.z)
        .min(ctx.torus_dist(z, -pair.p.z));
    let clearance = ctx.pole_clearance();
    if d < clearance {
        return Err(Error::SingularityProximity {
            distance: d.as_f64(),
            clearance: clearance.as_f64(),
        });
    }
    Ok(())
}

/// `−4π ∂G_p/∂z`.
pub fn gp_grad<T: Real>(ctx: &EllipticContext<T>, pair: &SingularPair<T>, z: C<T>) -> Result<C<T>> {
    check_sources(ctx, pair, z)?;
    let p = pair.p.z;
    let half = T::lit(0.5);
    Ok((green_grad(ctx, z - p)? + green_grad(ctx, z + p)?) * half)
}

fn grad_of<T: Real>(
    ctx: &EllipticContext<T>,
    pair: Option<&SingularPair<T>>,
    z: C<T>,
) -> Result<C<T>> {
    match pair {
        Some(pair) => gp_grad(ctx, pair, z),
        None => green_grad(ctx, z),
    }
}

/// Gradient and its partials in the real coordinates `(r, s)`.
fn grad_with_partials<T: Real>(
    ctx: &EllipticContext<T>,
    pair: Option<&SingularPair<T>>,
    r: T,
    s: T,
) -> Result<(C<T>, C<T>, C<T>)> {
    let a = ctx.from_coords(r, s);
    let tau = ctx.tau_value();
    let half = T::lit(0.5);
    let (zeta, wp) = match pair {
        None => {
            let v = ctx.values(a)?;
            (v.zeta, v.wp)
        }
        Some(pair) => {
            check_sources(ctx, pair, a)?;
            let p = pair.p.z;
            let plus = ctx.values(a + p)?;
            let minus = ctx.values(a - p)?;
            ((plus.zeta + minus.zeta) * half, (plus.wp + minus.wp) * half)
        }
    };
    let f = zeta - ctx.eta_of(r, s);
    let fr = -wp - ctx.eta1;
    let fs = -(tau * wp) - ctx.eta2;
    Ok((f, fr, fs))
}

/// Damped Newton on the real system `Re F = Im F = 0` in `(r, s)`.
fn newton_critical<T: Real>(
    ctx: &EllipticContext<T>,
    pair: Option<&SingularPair<T>>,
    r0: T,
    s0: T,
    max_iter: usize,
    tol: T,
) -> Option<(T, T, T)> {
    let (mut r, mut s) = (r0, s0);
    let (mut f, mut fr, mut fs) = grad_with_partials(ctx, pair, r, s).ok()?;
    let max_step = T::lit(0.25);
    for _ in 0..max_iter {
        let res = f.norm();
        if res < tol {
            break;
        }
        let det = fr.re * fs.im - fs.re * fr.im;
        if det.abs() < T::epsilon() {
            return None;
        }
        let mut dr = -(fs.im * f.re - fs.re * f.im) / det;
        let mut ds = -(-fr.im * f.re + fr.re * f.im) / det;
        let len = (dr * dr + ds * ds).sqrt();
        if len > max_step {
            dr = dr * max_step / len;
            ds = ds * max_step / len;
        }
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..12 {
            let (nr, ns) = (r + lambda * dr, s + lambda * ds);
            if let Ok(next) = grad_with_partials(ctx, pair, nr, ns) {
                if next.0.norm() < res {
                    r = nr;
                    s = ns;
                    (f, fr, fs) = next;
                    accepted = true;
                    break;
                }
            }
            lambda = lambda * T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    let res = f.norm();
    if res.is_finite() {
        Some((r, s, res))
    } else {
        None
    }
}

/// Signed determinant of the real Hessian of `G` (or `G_p`) in `z = x + iy`,
/// by central differences of the analytic gradient.
pub fn classify_hessian<T: Real>(
    ctx: &EllipticContext<T>,
    pair: Option<&SingularPair<T>>,
    a: C<T>,
) -> Result<T> {
    classify_hessian_with_step(ctx, pair, a, T::lit(1e-4) * T::one().min(ctx.tau.im()))
}

pub fn classify_hessian_with_step<T: Real>(
    ctx: &EllipticContext<T>,
    pair: Option<&SingularPair<T>>,
    a: C<T>,
    h: T,
) -> Result<T> {
    let mut sing = vec![C::new(T::zero(), T::zero())];
    if let Some(pair) = pair {
        sing = vec![pair.p.z, -pair.p.z];
    }
    let reach = sing
        .iter()
        .map(|x| ctx.torus_dist(a, *x))
        .fold(T::infinity(), T::min);
    if reach <= T::lit(2.0) * h {
        return Err(Error::StepTooLarge { step: h.as_f64() });
    }
    // ∂G/∂z = −grad/(4π); G_x = 2 Re ∂G/∂z, G_y = −2 Im ∂G/∂z.
    let scale = -T::lit(2.0) / (T::lit(4.0) * T::PI());
    let real_grad = |z: C<T>| -> Result<(T, T)> {
        let g = grad_of(ctx, pair, z)? * scale;
        Ok((g.re, -g.im))
    };
    let hx = C::new(h, T::zero());
    let hy = C::new(T::zero(), h);
    let (gxp, gyp) = real_grad(a + hx)?;
    let (gxm, gym) = real_grad(a - hx)?;
    let (gxp2, gyp2) = real_grad(a + hy)?;
    let (gxm2, gym2) = real_grad(a - hy)?;
    let two_h = T::lit(2.0) * h;
    let hxx = (gxp - gxm) / two_h;
    let hyx = (gyp - gym) / two_h;
    let hxy = (gxp2 - gxm2) / two_h;
    let hyy = (gyp2 - gym2) / two_h;
    let off = (hxy + hyx) * T::lit(0.5);
    Ok(hxx * hyy - off * off)
}

/// Critical points of `G` (`pair = None`) or `G_p`, with half-periods always
/// reported as trivial points and nontrivial ones folded under `a ↦ −a`.
pub fn find_critical_points<T: Real>(
    ctx: &EllipticContext<T>,
    pair: Option<&SingularPair<T>>,
    seeds_per_axis: usize,
) -> Result<Vec<CriticalPoint<T>>> {
    find_critical_points_with(ctx, pair, seeds_per_axis, 50, T::lit(1e-12))
}

pub fn find_critical_points_with<T: Real>(
    ctx: &EllipticContext<T>,
    pair: Option<&SingularPair<T>>,
    seeds_per_axis: usize,
    max_iter: usize,
    newton_tol: T,
) -> Result<Vec<CriticalPoint<T>>> {
    if seeds_per_axis < 8 {
        return Err(Error::InvalidArgument(
            "seeds_per_axis must be at least 8".into(),
        ));
    }
    let mut singular = vec![C::new(T::zero(), T::zero())];
    if let Some(pair) = pair {
        singular = vec![pair.p.z, -pair.p.z];
    }
    let n = T::from_usize(seeds_per_axis).unwrap();
    let exclusion = T::lit(0.03);
    let seeds: Vec<(T, T)> = (0..seeds_per_axis)
        .flat_map(|i| (0..seeds_per_axis).map(move |j| (i, j)))
        .map(|(i, j)| {
            (
                (T::from_usize(i).unwrap() + T::lit(0.5)) / n,
                (T::from_usize(j).unwrap() + T::lit(0.5)) / n,
            )
        })
        .filter(|&(r, s)| {
            let z = ctx.from_coords(r, s);
            singular.iter().all(|x| ctx.torus_dist(z, *x) >= exclusion)
        })
        .collect();

    let accept = ctx.tol.max(newton_tol);
    let mut found: Vec<(TorusPoint<T>, T)> = seeds
        .par_iter()
        .filter_map(|&(r, s)| newton_critical(ctx, pair, r, s, max_iter, newton_tol))
        .filter(|&(_, _, res)| res < accept)
        .map(|(r, s, res)| (ctx.canonical_pm(ctx.from_coords(r, s)), res))
        .collect();
    found.sort_by(|a, b| {
        (a.0.r, a.0.s)
            .partial_cmp(&(b.0.r, b.0.s))
            .unwrap_or(Ordering::Equal)
    });

    let merge = T::lit(1e-6);
    let hp_tol = T::lit(1e-6);
    let hp = half_periods(&ctx.tau);
    let first_hp = if pair.is_some() { 0 } else { 1 };
    let mut out: Vec<CriticalPoint<T>> = Vec::new();
    for h in hp.iter().skip(first_hp) {
        let loc = ctx.lattice_reduce(*h);
        let residual = grad_of(ctx, pair, *h)?.norm();
        out.push(CriticalPoint {
            location: loc,
            kind: CriticalKind::Trivial,
            residual,
            hessian_det: classify_hessian(ctx, pair, *h)?,
        });
    }
    let mut nontrivial: Vec<(TorusPoint<T>, T)> = Vec::new();
    for (loc, res) in found {
        if ctx.dist_to_half_periods(loc.z) < hp_tol {
            continue;
        }
        let dup = nontrivial.iter_mut().find(|(q, _)| {
            ctx.torus_dist(q.z, loc.z) < merge || ctx.torus_dist(q.z, -loc.z) < merge
        });
        match dup {
            Some(entry) => {
                if res < entry.1 {
                    *entry = (loc, res);
                }
            }
            None => nontrivial.push((loc, res)),
        }
    }
    for (loc, res) in nontrivial {
        out.push(CriticalPoint {
            location: loc,
            kind: CriticalKind::Nontrivial,
            residual: res,
            hessian_det: classify_hessian(ctx, pair, loc.z).unwrap_or(T::nan()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{make_context, Tau};

    fn ctx(re: f64, im: f64) -> EllipticContext<f64> {
        make_context(Tau::from_parts(re, im).unwrap(), 1e-10).unwrap()
    }

    #[test]
    fn half_periods_are_critical() {
        let c = ctx(0.2, 1.1);
        for h in &half_periods(&c.tau)[1..] {
            assert!(green_grad(&c, *h).unwrap().norm() < 1e-10);
        }
        let pair = SingularPair::new(&c, C::new(0.31, 0.42)).unwrap();
        for h in half_periods(&c.tau) {
            assert!(gp_grad(&c, &pair, h).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn rectangular_conjugate_symmetry() {
        let c = ctx(0.0, 1.3);
        let z = C::new(0.21, 0.37);
        let a = green_grad(&c, z).unwrap();
        let b = green_grad(&c, z.conj()).unwrap();
        assert!((a.conj() - b).norm() < 1e-10);
    }

    #[test]
    fn singular_pair_rejects_half_period() {
        let c = ctx(0.0, 1.0);
        assert_eq!(
            SingularPair::new(&c, C::new(0.5, 0.5)),
            Err(Error::HalfPeriodInput)
        );
    }

    #[test]
    fn sources_are_refused() {
        let c = ctx(0.0, 1.0);
        let pair = SingularPair::new(&c, C::new(0.3, 0.1)).unwrap();
        assert!(matches!(
            gp_grad(&c, &pair, C::new(-0.3, -0.1)),
            Err(Error::SingularityProximity { .. })
        ));
    }

    #[test]
    fn square_torus_has_three_critical_points() {
        let c = ctx(0.0, 1.0);
        let pts = find_critical_points(&c, None, 12).unwrap();
        assert_eq!(pts.len(), 3, "{pts:?}");
        assert!(pts.iter().all(|p| p.kind == CriticalKind::Trivial));
        assert!(pts.iter().all(|p| p.hessian_det.abs() > 1e-6));
    }

    #[test]
    fn too_few_seeds() {
        let c = ctx(0.0, 1.0);
        assert!(find_critical_points(&c, None, 4).is_err());
    }
}
