//! The generalized Lamé equation `y″ = I_n(z; p, A, τ) y` and its monodromy.

mod monodromy;
mod paths;

pub use monodromy::{
    classify, classify_with, default_clearance, eigen_common_basis, is_unitary, monodromy,
    monodromy_with, transfer_matrix, transport, ClassifyOptions, MonodromyClass, MonodromyOptions,
    MonodromyRep, RepResiduals,
};
pub use paths::{
    build_cycles, default_basepoint, route, Cycles, PathSpec, SingularKind, SingularSet,
    DETOUR_FACTOR, DETOUR_SIDES,
};

use crate::elliptic::{half_periods, EllipticContext, Tau, TorusPoint};
use crate::error::{Error, Result};
use crate::hitchin::{HamiltonianState, PVIIndex};
use crate::scalar::{Real, C};

/// `B = A² − ζ(2p)A − ¾℘(2p) − Σ n_k(n_k+1)℘(p − ω_k/2)`, the value making
/// `±p` apparent singularities.
pub fn apparent_b<T: Real>(
    ctx: &EllipticContext<T>,
    index: PVIIndex,
    p: C<T>,
    a: C<T>,
) -> Result<C<T>> {
    if ctx.dist_to_half_periods(p) < ctx.pole_clearance() {
        return Err(Error::HalfPeriodInput);
    }
    let v2 = ctx.values(p * T::lit(2.0))?;
    let mut b = a * a - v2.zeta * a - v2.wp * T::lit(0.75);
    for (k, h) in half_periods(&ctx.tau).iter().enumerate() {
        let w = index.weight::<T>(k);
        if w != T::zero() {
            b -= ctx.wp(p - *h)?.0 * w;
        }
    }
    Ok(b)
}

/// Parameters of `GLE(n, p, A, τ)`; `b` is the apparentness value for the
/// stored representative `p.z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GLEParams<T: Real> {
    pub index: PVIIndex,
    pub p: TorusPoint<T>,
    pub a: C<T>,
    pub b: C<T>,
    pub tau: Tau<T>,
}

impl<T: Real> GLEParams<T> {
    /// `p` may be any representative; `A` refers to that choice of sign.
    pub fn new(ctx: &EllipticContext<T>, index: PVIIndex, p: C<T>, a: C<T>) -> Result<Self> {
        let pt = ctx.lattice_reduce(p);
        if pt.is_half_period(ctx.tol) {
            return Err(Error::HalfPeriodInput);
        }
        Ok(GLEParams {
            index,
            p: pt,
            a,
            b: apparent_b(ctx, index, pt.z, a)?,
            tau: ctx.tau,
        })
    }

    pub fn from_state(
        ctx: &EllipticContext<T>,
        index: PVIIndex,
        state: &HamiltonianState<T>,
    ) -> Result<Self> {
        Self::new(ctx, index, state.p, state.a)
    }

    /// The same parameters with `B` shifted off its apparentness value.
    pub fn detuned(&self, delta: C<T>) -> Self {
        GLEParams {
            b: self.b + delta,
            ..*self
        }
    }
}

/// `I_n(z) = Σ n_k(n_k+1)℘(z − ω_k/2) + ¾(℘(z+p) + ℘(z−p)) + A(ζ(z+p) − ζ(z−p)) + B`.
pub fn potential<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    z: C<T>,
) -> Result<C<T>> {
    let p = params.p.z;
    let clearance = ctx.pole_clearance();
    let d = ctx
        .torus_dist(z, p)
        .min(ctx.torus_dist(z, -p))
        .min(ctx.dist_to_half_periods(z));
    if d < clearance {
        return Err(Error::SingularityProximity {
            distance: d.as_f64(),
            clearance: clearance.as_f64(),
        });
    }
    potential_unchecked(ctx, params, z)
}

pub(crate) fn potential_unchecked<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    z: C<T>,
) -> Result<C<T>> {
    let p = params.p.z;
    let plus = ctx.values(z + p)?;
    let minus = ctx.values(z - p)?;
    let mut acc =
        (plus.wp + minus.wp) * T::lit(0.75) + params.a * (plus.zeta - minus.zeta) + params.b;
    for (k, h) in half_periods(&ctx.tau).iter().enumerate() {
        let w = params.index.weight::<T>(k);
        if w != T::zero() {
            acc += ctx.wp(z - *h)?.0 * w;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::make_context;

    fn ctx(re: f64, im: f64) -> EllipticContext<f64> {
        make_context(Tau::from_parts(re, im).unwrap(), 1e-10).unwrap()
    }

    #[test]
    fn b_for_zero_a_square_lattice() {
        let c = ctx(0.0, 1.0);
        let b = apparent_b(&c, PVIIndex::ZERO, C::new(0.3, 0.0), C::new(0.0, 0.0)).unwrap();
        let (w, _) = c.wp(C::new(0.6, 0.0)).unwrap();
        assert!((b + w * 0.75).norm() < 1e-10);
    }

    #[test]
    fn b_is_invariant_under_joint_sign() {
        let c = ctx(0.2, 1.1);
        let (p, a) = (C::new(0.31, 0.22), C::new(0.7, -0.4));
        for idx in [PVIIndex::ZERO, PVIIndex::ONE_000] {
            let b1 = apparent_b(&c, idx, p, a).unwrap();
            let b2 = apparent_b(&c, idx, -p, -a).unwrap();
            assert!((b1 - b2).norm() < 1e-10);
        }
    }

    #[test]
    fn half_period_p_rejected() {
        let c = ctx(0.0, 1.0);
        assert_eq!(
            apparent_b(&c, PVIIndex::ZERO, C::new(0.5, 0.0), C::new(1.0, 0.0)),
            Err(Error::HalfPeriodInput)
        );
    }

    #[test]
    fn potential_is_elliptic_and_even() {
        let c = ctx(0.2, 1.1);
        let g =
            GLEParams::new(&c, PVIIndex::ONE_000, C::new(0.31, 0.22), C::new(0.7, -0.4)).unwrap();
        let z = C::new(0.13, 0.41);
        let i0 = potential(&c, &g, z).unwrap();
        for shift in [C::new(1.0, 0.0), c.tau_value()] {
            assert!((potential(&c, &g, z + shift).unwrap() - i0).norm() < 1e-9);
        }
        assert!((potential(&c, &g, -z).unwrap() - i0).norm() < 1e-9);
    }

    #[test]
    fn local_coefficient_at_p() {
        let c = ctx(0.2, 1.1);
        let g = GLEParams::new(&c, PVIIndex::ZERO, C::new(0.31, 0.22), C::new(0.7, -0.4)).unwrap();
        let eps = C::new(1e-4, 1e-4);
        let v = potential(&c, &g, g.p.z + eps).unwrap() * eps * eps;
        assert!((v - C::new(0.75, 0.0)).norm() < 1e-3, "{v}");
    }
}
