//! Hitchin's explicit solution of elliptic Painlevé VI, its `(1,0,0,0)`
//! Okamoto lift, the Hamiltonian flow in `(p, A)`, and the region `Ω_τⁿ`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_rational::Ratio;
use rayon::prelude::*;

use crate::elliptic::{half_periods, ContextFamily, EllipticContext, Tau, TorusPoint};
use crate::error::{Error, Result};
use crate::gle::apparent_b;
use crate::green::{find_critical_points, CriticalKind, SingularPair};
use crate::ode::{integrate, OdeOptions, OdeStats};
use crate::scalar::{ci, near_integer, Real, C};

/// Monodromy data `(r, s) ∈ ℂ² \ ½ℤ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyParams<T: Real> {
    pub r: C<T>,
    pub s: C<T>,
}

impl<T: Real> MonodromyParams<T> {
    pub fn new(r: C<T>, s: C<T>) -> Result<Self> {
        let tol = T::default_tol();
        let two = T::lit(2.0);
        let half_lattice = |x: C<T>| x.im.abs() <= tol && near_integer(two * x.re, tol);
        if half_lattice(r) && half_lattice(s) {
            return Err(Error::HalfLatticeInput);
        }
        if !(r.re.is_finite() && r.im.is_finite() && s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::InvalidArgument("(r, s) must be finite".into()));
        }
        Ok(MonodromyParams { r, s })
    }

    pub fn real(r: T, s: T) -> Result<Self> {
        Self::new(Complex::new(r, T::zero()), Complex::new(s, T::zero()))
    }

    pub fn is_real(&self, tol: T) -> bool {
        self.r.im.abs() <= tol && self.s.im.abs() <= tol
    }

    pub fn negated(&self) -> Self {
        MonodromyParams {
            r: -self.r,
            s: -self.s,
        }
    }

    /// `a = r + sτ`.
    pub fn point(&self, ctx: &EllipticContext<T>) -> C<T> {
        self.r + self.s * ctx.tau_value()
    }
}

/// Index `n = (n₀, n₁, n₂, n₃)` with parameters `α_k = ½(n_k + ½)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PVIIndex {
    pub n: [u32; 4],
}

impl PVIIndex {
    pub const ZERO: PVIIndex = PVIIndex { n: [0, 0, 0, 0] };
    pub const ONE_000: PVIIndex = PVIIndex { n: [1, 0, 0, 0] };

    pub fn new(n: [u32; 4]) -> Self {
        PVIIndex { n }
    }

    /// `α_k = (2n_k + 1)² / 8`, exactly.
    pub fn alpha(&self, k: usize) -> Ratio<i64> {
        let m = 2 * i64::from(self.n[k]) + 1;
        Ratio::new(m * m, 8)
    }

    pub fn alphas(&self) -> [Ratio<i64>; 4] {
        [self.alpha(0), self.alpha(1), self.alpha(2), self.alpha(3)]
    }

    pub fn alpha_value<T: Real>(&self, k: usize) -> T {
        let a = self.alpha(k);
        T::lit(*a.numer() as f64) / T::lit(*a.denom() as f64)
    }

    /// `n_k(n_k + 1)`, the coefficient of `℘(z − ω_k/2)` in the potential.
    pub fn weight<T: Real>(&self, k: usize) -> T {
        let n = self.n[k] as f64;
        T::lit(n * (n + 1.0))
    }

    pub fn is_supported(&self) -> bool {
        *self == Self::ZERO || *self == Self::ONE_000
    }

    fn require_supported(&self) -> Result<()> {
        if self.is_supported() {
            Ok(())
        } else {
            Err(Error::UnsupportedIndex(self.n))
        }
    }
}

impl fmt::Display for PVIIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.n;
        write!(f, "{a},{b},{c},{d}")
    }
}

impl FromStr for PVIIndex {
    type Err = Error;

    /// Accepts `0` for the zero index or four comma-separated integers.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let parse = |x: &str| {
            x.parse::<u32>()
                .map_err(|_| Error::InvalidArgument(format!("bad index component `{x}`")))
        };
        match parts.len() {
            1 if parse(parts[0])? == 0 => Ok(PVIIndex::ZERO),
            4 => Ok(PVIIndex::new([
                parse(parts[0])?,
                parse(parts[1])?,
                parse(parts[2])?,
                parse(parts[3])?,
            ])),
            _ => Err(Error::InvalidArgument(format!(
                "index `{s}` must be `0` or four comma-separated integers"
            ))),
        }
    }
}

/// A point `(p, A)` of the Hamiltonian flow at time `τ`. `b` is always the
/// apparentness value for `(p, A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianState<T: Real> {
    pub tau: Tau<T>,
    pub p: C<T>,
    pub a: C<T>,
    pub b: C<T>,
}

impl<T: Real> HamiltonianState<T> {
    pub fn new(ctx: &EllipticContext<T>, index: PVIIndex, p: C<T>, a: C<T>) -> Result<Self> {
        Ok(HamiltonianState {
            tau: ctx.tau,
            p,
            a,
            b: apparent_b(ctx, index, p, a)?,
        })
    }
}

/// `Z_{r,s}(τ) = ζ(r + sτ) − rη₁ − sη₂`.
pub fn z_rs<T: Real>(ctx: &EllipticContext<T>, params: &MonodromyParams<T>) -> Result<C<T>> {
    let a = params.point(ctx);
    Ok(ctx.wzeta(a)? - ctx.eta1 * params.r - ctx.eta2 * params.s)
}

/// `℘(p) = ℘(a) + ℘′(a) / (2 Z_{r,s})`.
pub fn hitchin_wp<T: Real>(ctx: &EllipticContext<T>, params: &MonodromyParams<T>) -> Result<C<T>> {
    let a = params.point(ctx);
    let v = ctx.values(a)?;
    let z = v.zeta - ctx.eta1 * params.r - ctx.eta2 * params.s;
    if z.norm() < ctx.tol {
        return Err(Error::DegenerateZ {
            modulus: z.norm().as_f64(),
        });
    }
    Ok(v.wp + v.dwp / (z * T::lit(2.0)))
}

pub fn hitchin_p<T: Real>(
    ctx: &EllipticContext<T>,
    params: &MonodromyParams<T>,
) -> Result<(TorusPoint<T>, C<T>)> {
    let w = hitchin_wp(ctx, params)?;
    Ok((ctx.invert_wp(w)?, w))
}

/// `℘(p^{(1,0,0,0)}) = ℘ + (3℘′Z² + (12℘² − g₂)Z + 3℘℘′) / (2(Z³ − 3℘Z − ℘′))`
/// with `℘, ℘′` at `r + sτ`.
pub fn okamoto_wp_1000<T: Real>(
    ctx: &EllipticContext<T>,
    params: &MonodromyParams<T>,
) -> Result<C<T>> {
    let a = params.point(ctx);
    let v = ctx.values(a)?;
    let z = v.zeta - ctx.eta1 * params.r - ctx.eta2 * params.s;
    let (w, dw) = (v.wp, v.dwp);
    let three = T::lit(3.0);
    let den = z * z * z - w * z * three - dw;
    if den.norm() < ctx.tol {
        return Err(Error::DegenerateDenominator {
            modulus: den.norm().as_f64(),
        });
    }
    let num = dw * z * z * three + (w * w * T::lit(12.0) - ctx.g2) * z + w * dw * three;
    Ok(w + num / (den * T::lit(2.0)))
}

pub fn okamoto_p_1000<T: Real>(
    ctx: &EllipticContext<T>,
    params: &MonodromyParams<T>,
) -> Result<(TorusPoint<T>, C<T>)> {
    let w = okamoto_wp_1000(ctx, params)?;
    Ok((ctx.invert_wp(w)?, w))
}

/// `℘(pⁿ_{r,s})` for the supported indices.
pub fn solution_wp<T: Real>(
    ctx: &EllipticContext<T>,
    params: &MonodromyParams<T>,
    index: PVIIndex,
) -> Result<C<T>> {
    index.require_supported()?;
    if index == PVIIndex::ZERO {
        hitchin_wp(ctx, params)
    } else {
        okamoto_wp_1000(ctx, params)
    }
}

pub fn solution_p<T: Real>(
    ctx: &EllipticContext<T>,
    params: &MonodromyParams<T>,
    index: PVIIndex,
) -> Result<(TorusPoint<T>, C<T>)> {
    let w = solution_wp(ctx, params, index)?;
    Ok((ctx.invert_wp(w)?, w))
}

/// The preimage of `℘(p) = w` closest to `prev`, checking for branch jumps.
fn track<T: Real>(ctx: &EllipticContext<T>, w: C<T>, prev: C<T>) -> Result<C<T>> {
    let pt = ctx.invert_wp(w)?;
    let a = ctx.nearest_representative(pt.z, prev);
    let b = ctx.nearest_representative(-pt.z, prev);
    let next = if (a - prev).norm() <= (b - prev).norm() {
        a
    } else {
        b
    };
    let jump = (next - prev).norm();
    if jump > T::lit(0.3) * ctx.lattice_diameter() {
        return Err(Error::BranchJump {
            jump: jump.as_f64(),
        });
    }
    Ok(next)
}

/// `p(τ − h), p(τ), p(τ + h)` on one continuous branch through `p0`.
fn stencil<T: Real>(
    family: &ContextFamily<T>,
    params: &MonodromyParams<T>,
    index: PVIIndex,
    tau: Tau<T>,
    h: T,
    p0: C<T>,
) -> Result<[C<T>; 3]> {
    let t = tau.value();
    let hc = Complex::new(h, T::zero());
    let minus = family.at(t - hc)?;
    let plus = family.at(t + hc)?;
    let pm = track(&minus, solution_wp(&minus, params, index)?, p0)?;
    let pp = track(&plus, solution_wp(&plus, params, index)?, p0)?;
    Ok([pm, p0, pp])
}

fn check_step<T: Real>(h: T) -> Result<()> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidArgument("step h must be positive".into()));
    }
    Ok(())
}

/// `(−1/4π²) Σ α_k ℘′(p + ω_k/2)`.
pub fn epvi_rhs<T: Real>(ctx: &EllipticContext<T>, index: PVIIndex, p: C<T>) -> Result<C<T>> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (k, h) in half_periods(&ctx.tau).iter().enumerate() {
        acc += ctx.wp(p + *h)?.1 * index.alpha_value::<T>(k);
    }
    let pi = T::PI();
    Ok(-acc / (T::lit(4.0) * pi * pi))
}

/// `|p″(τ) − (−1/4π²) Σ α_k ℘′(p + ω_k/2)|` with `p″` from central differences
/// of step `h` along the real `τ` direction.
pub fn epvi_residual<T: Real>(
    family: &ContextFamily<T>,
    params: &MonodromyParams<T>,
    index: PVIIndex,
    tau: Tau<T>,
    h: T,
) -> Result<T> {
    check_step(h)?;
    let ctx = family.at(tau.value())?;
    let (p0, _) = solution_p(&ctx, params, index)?;
    epvi_residual_on_branch(family, params, index, tau, h, p0.z)
}

pub fn epvi_residual_on_branch<T: Real>(
    family: &ContextFamily<T>,
    params: &MonodromyParams<T>,
    index: PVIIndex,
    tau: Tau<T>,
    h: T,
    p0: C<T>,
) -> Result<T> {
    check_step(h)?;
    let ctx = family.at(tau.value())?;
    let [pm, p, pp] = stencil(family, params, index, tau, h, p0)?;
    let second = (pp - p * T::lit(2.0) + pm) / (h * h);
    Ok((second - epvi_rhs(&ctx, index, p)?).norm())
}

/// EPVI residual of a `℘(p)`-curve given directly as a function of `τ`,
/// for sensitivity checks on perturbed solutions.
pub fn epvi_residual_of<T, F>(
    family: &ContextFamily<T>,
    index: PVIIndex,
    tau: Tau<T>,
    h: T,
    wp_of: F,
) -> Result<T>
where
    T: Real,
    F: Fn(&EllipticContext<T>) -> Result<C<T>>,
{
    check_step(h)?;
    let t = tau.value();
    let hc = Complex::new(h, T::zero());
    let ctx = family.at(t)?;
    let p = ctx.invert_wp(wp_of(&ctx)?)?.z;
    let minus = family.at(t - hc)?;
    let plus = family.at(t + hc)?;
    let pm = track(&minus, wp_of(&minus)?, p)?;
    let pp = track(&plus, wp_of(&plus)?, p)?;
    let second = (pp - p * T::lit(2.0) + pm) / (h * h);
    Ok((second - epvi_rhs(&ctx, index, p)?).norm())
}

/// `A = ½(4πi·dp/dτ + ζ(2p) − 2pη₁)` with `dp/dτ` by central differences,
/// for the canonical preimage `p`.
pub fn a_from_hitchin<T: Real>(
    family: &ContextFamily<T>,
    params: &MonodromyParams<T>,
    tau: Tau<T>,
    h: T,
) -> Result<C<T>> {
    let ctx = family.at(tau.value())?;
    let (p, _) = hitchin_p(&ctx, params)?;
    a_on_branch(family, params, PVIIndex::ZERO, tau, h, p.z)
}

/// `A` for the solution of the given index along the branch through `p0`
/// (either preimage; the result flips sign with `p0`).
pub fn a_on_branch<T: Real>(
    family: &ContextFamily<T>,
    params: &MonodromyParams<T>,
    index: PVIIndex,
    tau: Tau<T>,
    h: T,
    p0: C<T>,
) -> Result<C<T>> {
    check_step(h)?;
    let ctx = family.at(tau.value())?;
    let [pm, p, pp] = stencil(family, params, index, tau, h, p0)?;
    let dp = (pp - pm) / (h * T::lit(2.0));
    a_from_derivative(&ctx, p, dp)
}

/// Inverts the first Hamiltonian equation for `A`.
pub fn a_from_derivative<T: Real>(ctx: &EllipticContext<T>, p: C<T>, dp: C<T>) -> Result<C<T>> {
    let four_pi_i = ci(T::lit(4.0) * T::PI());
    let zeta2p = ctx.wzeta(p * T::lit(2.0))?;
    Ok((four_pi_i * dp + zeta2p - p * ctx.eta1 * T::lit(2.0)) * T::lit(0.5))
}

/// Hamiltonian state for the explicit solution at `τ`, with `A` from
/// Richardson-extrapolated central differences at steps `h` and `h/2`.
pub fn solution_state<T: Real>(
    family: &ContextFamily<T>,
    params: &MonodromyParams<T>,
    index: PVIIndex,
    tau: Tau<T>,
    h: T,
) -> Result<HamiltonianState<T>> {
    let ctx = family.at(tau.value())?;
    let (p, _) = solution_p(&ctx, params, index)?;
    let a1 = a_on_branch(family, params, index, tau, h, p.z)?;
    let a2 = a_on_branch(family, params, index, tau, h * T::lit(0.5), p.z)?;
    let a = (a2 * T::lit(4.0) - a1) / T::lit(3.0);
    HamiltonianState::new(&ctx, index, p.z, a)
}

/// Right-hand side `(dp/dτ, dA/dτ)` of the Hamiltonian system.
pub fn hamiltonian_rhs<T: Real>(
    ctx: &EllipticContext<T>,
    index: PVIIndex,
    p: C<T>,
    a: C<T>,
) -> Result<[C<T>; 2]> {
    let two = T::lit(2.0);
    let four_pi = T::lit(4.0) * T::PI();
    let v2 = ctx.values(p * two)?;
    let dp = ci(-T::one() / four_pi) * (a * two - v2.zeta + p * ctx.eta1 * two);
    let mut sum = Complex::new(T::zero(), T::zero());
    for (k, h) in half_periods(&ctx.tau).iter().enumerate() {
        let wk = index.weight::<T>(k);
        if wk != T::zero() {
            sum += ctx.wp(p - *h)?.1 * wk;
        }
    }
    let da =
        ci(T::one() / four_pi) * ((v2.wp * two + ctx.eta1 * two) * a - v2.dwp * T::lit(1.5) - sum);
    Ok([dp, da])
}

/// Integrates the Hamiltonian system along the straight segment from
/// `state0.tau` to `tau1`, returning `steps + 1` equally spaced states.
pub fn hamiltonian_flow<T: Real>(
    family: &ContextFamily<T>,
    index: PVIIndex,
    state0: &HamiltonianState<T>,
    tau1: Tau<T>,
    steps: usize,
) -> Result<Vec<HamiltonianState<T>>> {
    hamiltonian_flow_with(family, index, state0, tau1, steps, &OdeOptions::default()).map(|r| r.0)
}

pub fn hamiltonian_flow_with<T: Real>(
    family: &ContextFamily<T>,
    index: PVIIndex,
    state0: &HamiltonianState<T>,
    tau1: Tau<T>,
    steps: usize,
    opts: &OdeOptions<T>,
) -> Result<(Vec<HamiltonianState<T>>, OdeStats)> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let t0 = state0.tau.value();
    let dtau = tau1.value() - t0;
    let clearance = T::lit(1e-6);
    let rhs = |t: T, y: &[C<T>; 2]| -> Result<[C<T>; 2]> {
        let tau = t0 + dtau * t;
        let ctx = family.at(tau)?;
        let d = ctx.dist_to_half_periods(y[0]);
        if d < clearance * T::one().min(tau.im) {
            return Err(Error::HalfPeriodCollision {
                distance: d.as_f64(),
            });
        }
        let [dp, da] = hamiltonian_rhs(&ctx, index, y[0], y[1])?;
        Ok([dp * dtau, da * dtau])
    };
    let n = T::from_usize(steps).unwrap();
    let mut out = vec![*state0];
    let mut y = [state0.p, state0.a];
    let mut stats = OdeStats::default();
    for k in 0..steps {
        let ta = T::from_usize(k).unwrap() / n;
        let tb = T::from_usize(k + 1).unwrap() / n;
        let (next, st) = integrate(rhs, ta, tb, y, opts)?;
        stats += st;
        y = next;
        let ctx = family.at(t0 + dtau * tb)?;
        out.push(HamiltonianState::new(&ctx, index, y[0], y[1])?);
    }
    Ok((out, stats))
}

/// A member's witness `(r, s)` and its `℘`-plane residual
/// `|℘(pⁿ_{r,s}) − ℘(p)| / max(1, |℘(p)|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness<T: Real> {
    pub params: MonodromyParams<T>,
    pub residual: T,
}

/// Forward table of `℘(pⁿ_{r,s})` over real `(r, s)` cell centres.
#[derive(Debug, Clone)]
pub struct ForwardTable<T: Real> {
    pub index: PVIIndex,
    pub resolution: usize,
    values: Vec<Option<C<T>>>,
}

impl<T: Real> ForwardTable<T> {
    pub fn build(ctx: &EllipticContext<T>, index: PVIIndex, resolution: usize) -> Result<Self> {
        index.require_supported()?;
        let n = T::from_usize(resolution).unwrap();
        let values = (0..resolution * resolution)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / resolution, k % resolution);
                let r = (T::from_usize(i).unwrap() + T::lit(0.5)) / n;
                let s = (T::from_usize(j).unwrap() + T::lit(0.5)) / n;
                MonodromyParams::real(r, s)
                    .and_then(|mp| solution_wp(ctx, &mp, index))
                    .ok()
                    .filter(|w| w.re.is_finite() && w.im.is_finite())
            })
            .collect();
        Ok(ForwardTable {
            index,
            resolution,
            values,
        })
    }

    fn coords(&self, k: usize) -> (T, T) {
        let n = T::from_usize(self.resolution).unwrap();
        let (i, j) = (k / self.resolution, k % self.resolution);
        (
            (T::from_usize(i).unwrap() + T::lit(0.5)) / n,
            (T::from_usize(j).unwrap() + T::lit(0.5)) / n,
        )
    }

    /// Searches for real `(r, s)` with `℘(pⁿ_{r,s}) = target`: best table
    /// cells first, then Newton in `(r, s)`.
    pub fn solve(
        &self,
        ctx: &EllipticContext<T>,
        target: C<T>,
        match_tol: T,
    ) -> Option<Witness<T>> {
        let scale = T::one().max(target.norm());
        let mut ranked: Vec<(T, usize)> = self
            .values
            .iter()
            .enumerate()
            .filter_map(|(k, v)| v.map(|w| ((w - target).norm() / scale, k)))
            .collect();
        ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut best: Option<Witness<T>> = None;
        for &(_, k) in ranked.iter().take(12) {
            let (r0, s0) = self.coords(k);
            if let Some(w) = refine_real(ctx, self.index, target, r0, s0) {
                if best.is_none_or(|b| w.residual < b.residual) {
                    best = Some(w);
                }
                if w.residual < T::lit(1e-10) {
                    break;
                }
            }
        }
        best.filter(|w| w.residual < match_tol)
    }
}

/// Newton on `℘(pⁿ_{r,s}) = target` over real `(r, s)` with a
/// finite-difference Jacobian.
fn refine_real<T: Real>(
    ctx: &EllipticContext<T>,
    index: PVIIndex,
    target: C<T>,
    r0: T,
    s0: T,
) -> Option<Witness<T>> {
    let scale = T::one().max(target.norm());
    let eval = |r: T, s: T| -> Option<C<T>> {
        let mp = MonodromyParams::real(r, s).ok()?;
        solution_wp(ctx, &mp, index).ok()
    };
    let (mut r, mut s) = (r0, s0);
    let mut f = eval(r, s)? - target;
    let d = T::lit(1e-7);
    let max_step = T::lit(0.05);
    for _ in 0..40 {
        let res = f.norm() / scale;
        if res < T::lit(1e-13) {
            break;
        }
        let fr = (eval(r + d, s)? - eval(r - d, s)?) / (d * T::lit(2.0));
        let fs = (eval(r, s + d)? - eval(r, s - d)?) / (d * T::lit(2.0));
        let det = fr.re * fs.im - fs.re * fr.im;
        if det.abs() < T::epsilon() {
            break;
        }
        let mut dr = -(fs.im * f.re - fs.re * f.im) / det;
        let mut ds = -(-fr.im * f.re + fr.re * f.im) / det;
        let len = (dr * dr + ds * ds).sqrt();
        if len > max_step {
            dr = dr * max_step / len;
            ds = ds * max_step / len;
        }
        let mut lambda = T::one();
        let mut moved = false;
        for _ in 0..10 {
            if let Some(w) = eval(r + lambda * dr, s + lambda * ds) {
                let nf = w - target;
                if nf.norm() < f.norm() {
                    r = r + lambda * dr;
                    s = s + lambda * ds;
                    f = nf;
                    moved = true;
                    break;
                }
            }
            lambda = lambda * T::lit(0.5);
        }
        if !moved {
            break;
        }
    }
    let wrap = |x: T| x - x.floor();
    Some(Witness {
        params: MonodromyParams::real(wrap(r), wrap(s)).ok()?,
        residual: f.norm() / scale,
    })
}

/// Seeds per axis used when deciding membership through critical points.
pub const MEMBERSHIP_SEEDS: usize = 10;
/// Resolution of the forward table for the `(1,0,0,0)` membership search.
pub const FORWARD_RESOLUTION: usize = 48;
/// `℘`-plane match tolerance for forward-scanned membership.
pub const MATCH_TOL: f64 = 1e-3;

/// Returns a witness `(r, s)` when `p ∈ Ω_τⁿ`.
pub fn omega_membership<T: Real>(
    ctx: &EllipticContext<T>,
    pair: &SingularPair<T>,
    index: PVIIndex,
) -> Result<Option<Witness<T>>> {
    index.require_supported()?;
    if index == PVIIndex::ZERO {
        membership_zero(ctx, pair)
    } else {
        let table = ForwardTable::build(ctx, index, FORWARD_RESOLUTION)?;
        membership_forward(ctx, pair, &table)
    }
}

fn membership_zero<T: Real>(
    ctx: &EllipticContext<T>,
    pair: &SingularPair<T>,
) -> Result<Option<Witness<T>>> {
    let (target, _) = ctx.wp(pair.p.z)?;
    let scale = T::one().max(target.norm());
    let points = find_critical_points(ctx, Some(pair), MEMBERSHIP_SEEDS)?;
    let mut best: Option<Witness<T>> = None;
    for cp in points.iter().filter(|c| c.kind == CriticalKind::Nontrivial) {
        let Ok(mp) = MonodromyParams::real(cp.location.r, cp.location.s) else {
            continue;
        };
        let Ok(w) = hitchin_wp(ctx, &mp) else {
            continue;
        };
        let residual = (w - target).norm() / scale;
        if best.is_none_or(|b| residual < b.residual) {
            best = Some(Witness {
                params: mp,
                residual,
            });
        }
    }
    Ok(best)
}

fn membership_forward<T: Real>(
    ctx: &EllipticContext<T>,
    pair: &SingularPair<T>,
    table: &ForwardTable<T>,
) -> Result<Option<Witness<T>>> {
    let (target, _) = ctx.wp(pair.p.z)?;
    Ok(table.solve(ctx, target, T::lit(MATCH_TOL)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellState<T: Real> {
    /// Within the exclusion radius of `E_τ[2]`.
    Excluded,
    NonMember,
    Member(Witness<T>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCell<T: Real> {
    pub r: T,
    pub s: T,
    pub state: CellState<T>,
}

impl<T: Real> RegionCell<T> {
    pub fn is_member(&self) -> bool {
        matches!(self.state, CellState::Member(_))
    }
}

/// Membership of cell centres `p = r + sτ` on a `resolution²` grid over
/// `[0, 1)²`, stored with `r` as the slow index.
#[derive(Debug, Clone)]
pub struct RegionSample<T: Real> {
    pub tau: Tau<T>,
    pub index: PVIIndex,
    pub resolution: usize,
    pub exclusion_radius: T,
    pub cells: Vec<RegionCell<T>>,
}

impl<T: Real> RegionSample<T> {
    pub fn cell(&self, i: usize, j: usize) -> &RegionCell<T> {
        &self.cells[i * self.resolution + j]
    }

    pub fn member_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_member()).count()
    }

    /// Largest radius around `E_τ[2]` containing no member cell centre.
    pub fn member_free_radius(&self, ctx: &EllipticContext<T>) -> T {
        self.cells
            .iter()
            .filter(|c| c.is_member())
            .map(|c| ctx.dist_to_half_periods(ctx.from_coords(c.r, c.s)))
            .fold(T::infinity(), T::min)
    }
}

pub fn omega_scan<T: Real>(
    ctx: &EllipticContext<T>,
    index: PVIIndex,
    resolution: usize,
) -> Result<RegionSample<T>> {
    index.require_supported()?;
    if resolution < 16 {
        return Err(Error::InvalidArgument(
            "resolution must be at least 16".into(),
        ));
    }
    let table = if index == PVIIndex::ZERO {
        None
    } else {
        Some(ForwardTable::build(ctx, index, FORWARD_RESOLUTION)?)
    };
    let n = T::from_usize(resolution).unwrap();
    let exclusion = T::lit(2.0) / n;
    let cells = (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / resolution, k % resolution);
            let r = (T::from_usize(i).unwrap() + T::lit(0.5)) / n;
            let s = (T::from_usize(j).unwrap() + T::lit(0.5)) / n;
            let z = ctx.from_coords(r, s);
            let state = if ctx.dist_to_half_periods(z) < exclusion {
                CellState::Excluded
            } else {
                let found = SingularPair::new(ctx, z)
                    .ok()
                    .and_then(|pair| match &table {
                        None => membership_zero(ctx, &pair).ok().flatten(),
                        Some(t) => membership_forward(ctx, &pair, t).ok().flatten(),
                    });
                match found {
                    Some(w) if w.residual < T::lit(MATCH_TOL) => CellState::Member(w),
                    _ => CellState::NonMember,
                }
            };
            RegionCell { r, s, state }
        })
        .collect();
    Ok(RegionSample {
        tau: ctx.tau,
        index,
        resolution,
        exclusion_radius: exclusion,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::make_context;

    fn ctx(re: f64, im: f64) -> EllipticContext<f64> {
        make_context(Tau::from_parts(re, im).unwrap(), 1e-10).unwrap()
    }

    #[test]
    fn alphas_are_exact() {
        let z = PVIIndex::ZERO.alphas();
        assert!(z.iter().all(|a| *a == Ratio::new(1, 8)));
        assert_eq!(PVIIndex::ONE_000.alpha(0), Ratio::new(9, 8));
        assert_eq!(PVIIndex::new([2, 0, 0, 0]).alpha(0), Ratio::new(25, 8));
    }

    #[test]
    fn index_parsing() {
        assert_eq!("0".parse::<PVIIndex>().unwrap(), PVIIndex::ZERO);
        assert_eq!("1,0,0,0".parse::<PVIIndex>().unwrap(), PVIIndex::ONE_000);
        assert!("1,0".parse::<PVIIndex>().is_err());
        assert_eq!(PVIIndex::ONE_000.to_string(), "1,0,0,0");
    }

    #[test]
    fn half_lattice_rejected() {
        assert_eq!(
            MonodromyParams::real(0.5, 0.0),
            Err(Error::HalfLatticeInput)
        );
        assert!(MonodromyParams::real(0.5, 0.25).is_ok());
    }

    #[test]
    fn z_rs_is_odd() {
        let c = ctx(0.2, 1.1);
        let mp = MonodromyParams::real(0.3, 0.2).unwrap();
        let a = z_rs(&c, &mp).unwrap();
        let b = z_rs(&c, &mp.negated()).unwrap();
        assert!((a + b).norm() < 1e-10);
    }

    #[test]
    fn hitchin_and_okamoto_are_even_in_rs() {
        let c = ctx(0.2, 1.1);
        let mp = MonodromyParams::real(0.3, 0.2).unwrap();
        for idx in [PVIIndex::ZERO, PVIIndex::ONE_000] {
            let a = solution_wp(&c, &mp, idx).unwrap();
            let b = solution_wp(&c, &mp.negated(), idx).unwrap();
            assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
        }
    }

    #[test]
    fn unsupported_index() {
        let c = ctx(0.0, 1.0);
        let mp = MonodromyParams::real(0.3, 0.2).unwrap();
        assert_eq!(
            solution_wp(&c, &mp, PVIIndex::new([0, 1, 0, 0])),
            Err(Error::UnsupportedIndex([0, 1, 0, 0]))
        );
    }

    #[test]
    fn epvi_residual_small_for_hitchin() {
        let fam = ContextFamily::new(1e-10);
        let mp = MonodromyParams::real(0.3, 0.2).unwrap();
        let tau = Tau::from_parts(0.2, 1.1).unwrap();
        let r = epvi_residual(&fam, &mp, PVIIndex::ZERO, tau, 1e-3).unwrap();
        assert!(r < 1e-5, "residual {r}");
    }

    #[test]
    fn n0_flow_drops_weight_term() {
        let c = ctx(0.2, 1.1);
        let p = C::new(0.31, 0.27);
        let a = C::new(0.4, -0.2);
        let [_, da] = hamiltonian_rhs(&c, PVIIndex::ZERO, p, a).unwrap();
        let v = c.values(p * 2.0).unwrap();
        let expect = C::new(0.0, 1.0 / (4.0 * std::f64::consts::PI))
            * ((v.wp * 2.0 + c.eta1 * 2.0) * a - v.dwp * 1.5);
        assert!((da - expect).norm() < 1e-12);
    }
}
