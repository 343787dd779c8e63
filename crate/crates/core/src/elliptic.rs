//! Weierstrass functions for the lattice `Λ = ℤ + ℤτ`.
//!
//! Values are computed from the Jacobi theta function `θ₁(v | τ)` with
//! `v = πz` and nome `q = e^{iπτ}`:
//!
//! ```text
//! ζ(z)  = η₁ z + π θ₁'/θ₁
//! ℘(z)  = −η₁ − π² (θ₁'/θ₁)'
//! ℘'(z) = −π³ (θ₁'/θ₁)''
//! ```
//!
//! Arguments are first reduced to the centred cell `r, s ∈ [−½, ½)`, where the
//! theta series converges like `|q|^{n²}`. `g₂`, `g₃` come from the Eisenstein
//! q-expansions rather than from the branch values, so the cubic relations
//! between them are a real consistency check.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{ci, cr, near_integer, Real, C};

/// A point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tau<T: Real>(C<T>);

impl<T: Real> Tau<T> {
    pub fn new(value: C<T>) -> Result<Self> {
        if !(value.im > T::zero()) || !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::InvalidTau {
                im: value.im.as_f64(),
            });
        }
        Ok(Tau(value))
    }

    pub fn from_parts(re: T, im: T) -> Result<Self> {
        Self::new(Complex::new(re, im))
    }

    #[inline]
    pub fn value(&self) -> C<T> {
        self.0
    }

    #[inline]
    pub fn im(&self) -> T {
        self.0.im
    }
}

/// A point of the torus `ℂ/Λ` with its real lattice coordinates.
///
/// `z = r + sτ` with `r, s ∈ [0, 1)` is the stored representative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint<T: Real> {
    pub z: C<T>,
    pub r: T,
    pub s: T,
}

impl<T: Real> TorusPoint<T> {
    /// Both `2r` and `2s` within `tol` of integers.
    pub fn is_half_period(&self, tol: T) -> bool {
        let two = T::lit(2.0);
        near_integer(two * self.r, tol) && near_integer(two * self.s, tol)
    }

    /// Representative with coordinates in `[−½, ½)`, as a complex number.
    pub fn centered(&self, tau: &Tau<T>) -> C<T> {
        let half = T::lit(0.5);
        let r = if self.r >= half {
            self.r - T::one()
        } else {
            self.r
        };
        let s = if self.s >= half {
            self.s - T::one()
        } else {
            self.s
        };
        cr::<T>(r) + tau.value() * s
    }
}

/// The four half-periods `ω_k/2` with `ω₀ = 0, ω₁ = 1, ω₂ = τ, ω₃ = 1 + τ`.
pub fn half_periods<T: Real>(tau: &Tau<T>) -> [C<T>; 4] {
    let half = T::lit(0.5);
    let t = tau.value();
    [
        C::new(T::zero(), T::zero()),
        cr(half),
        t * half,
        (cr::<T>(T::one()) + t) * half,
    ]
}

/// Precomputed lattice data for one `τ`. Immutable after construction.
#[derive(Debug, Clone)]
pub struct EllipticContext<T: Real> {
    pub tau: Tau<T>,
    pub nome_q: C<T>,
    pub eta1: C<T>,
    pub eta2: C<T>,
    pub e1: C<T>,
    pub e2: C<T>,
    pub e3: C<T>,
    pub g2: C<T>,
    pub g3: C<T>,
    /// Highest theta-series index summed.
    pub series_cutoff: usize,
    pub tol: T,
    pub series_tol: T,
    /// `2(−1)ⁿ q^{(n+½)²}` for `n = 0..=series_cutoff`.
    theta_coeffs: Vec<C<T>>,
}

/// ℘, ℘′ and ζ at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeierstrassValues<T: Real> {
    pub wp: C<T>,
    pub dwp: C<T>,
    pub zeta: C<T>,
}

/// Residuals of the identities every context must satisfy.
#[derive(Debug, Clone, Copy)]
pub struct ContextResiduals<T: Real> {
    pub e_sum: T,
    pub legendre: T,
    pub g2: T,
    pub g3: T,
}

impl<T: Real> ContextResiduals<T> {
    pub fn max(&self) -> T {
        self.e_sum.max(self.legendre).max(self.g2).max(self.g3)
    }
}

/// Builds the context for `τ` with comparison tolerance `tol` and series
/// truncation at machine precision.
pub fn make_context<T: Real>(tau: Tau<T>, tol: T) -> Result<EllipticContext<T>> {
    EllipticContext::with_series_tol(tau, tol, T::epsilon())
}

impl<T: Real> EllipticContext<T> {
    pub fn new(tau: Tau<T>) -> Result<Self> {
        make_context(tau, T::default_tol())
    }

    pub fn with_series_tol(tau: Tau<T>, tol: T, series_tol: T) -> Result<Self> {
        if !(tol > T::zero()) || !(series_tol > T::zero()) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        let t = tau.value();
        let pi = T::PI();
        let i_pi = ci(pi);
        let nome_q = (i_pi * t).exp();
        let qa = nome_q.norm();

        // Term n of the theta sums is bounded by (2n+1)³ |q|^{n² − n}
        // once the argument is reduced to the centred cell.
        let mut cutoff = 1usize;
        loop {
            let n = T::from_usize(cutoff).unwrap();
            let weight = (T::lit(2.0) * n + T::one()).powi(3);
            if weight * qa.powf(n * n - n) < series_tol / T::lit(10.0) || cutoff >= 64 {
                break;
            }
            cutoff += 1;
        }
        let theta_coeffs = (0..=cutoff)
            .map(|n| {
                let k = T::from_usize(n).unwrap() + T::lit(0.5);
                let sign = if n % 2 == 0 {
                    T::lit(2.0)
                } else {
                    T::lit(-2.0)
                };
                (i_pi * t * (k * k)).exp() * sign
            })
            .collect::<Vec<_>>();

        let mut ctx = EllipticContext {
            tau,
            nome_q,
            eta1: C::new(T::zero(), T::zero()),
            eta2: C::new(T::zero(), T::zero()),
            e1: C::new(T::zero(), T::zero()),
            e2: C::new(T::zero(), T::zero()),
            e3: C::new(T::zero(), T::zero()),
            g2: C::new(T::zero(), T::zero()),
            g3: C::new(T::zero(), T::zero()),
            series_cutoff: cutoff,
            tol,
            series_tol,
            theta_coeffs,
        };

        // η₁ = −π² θ₁'''(0) / (3 θ₁'(0))
        let (mut d1, mut d3) = (C::new(T::zero(), T::zero()), C::new(T::zero(), T::zero()));
        for (n, a) in ctx.theta_coeffs.iter().enumerate() {
            let k = T::from_usize(2 * n + 1).unwrap();
            d1 += *a * k;
            d3 -= *a * (k * k * k);
        }
        ctx.eta1 = -(d3 / d1) * (pi * pi / T::lit(3.0));
        // η₂ = 2ζ(τ/2), evaluated without reduction (s = ½ is inside the
        // convergence band) so the Legendre relation remains a real check.
        let half = T::lit(0.5);
        ctx.eta2 = ctx.eval_raw(t * half).zeta * T::lit(2.0);

        let hp = half_periods(&tau);
        ctx.e1 = ctx.eval_raw(hp[1]).wp;
        ctx.e2 = ctx.eval_raw(hp[2]).wp;
        ctx.e3 = ctx.eval_raw(hp[3] - cr(T::one())).wp;

        let (g2, g3) = eisenstein_invariants(nome_q, series_tol);
        ctx.g2 = g2;
        ctx.g3 = g3;
        Ok(ctx)
    }

    #[inline]
    pub fn tau_value(&self) -> C<T> {
        self.tau.value()
    }

    /// Branch value `e_k = ℘(ω_k/2)` for `k = 1, 2, 3`.
    pub fn e(&self, k: usize) -> C<T> {
        match k {
            1 => self.e1,
            2 => self.e2,
            3 => self.e3,
            _ => panic!("branch values are indexed 1..=3"),
        }
    }

    /// Quasi-period increment of ζ for the lattice vector `m + nτ`.
    #[inline]
    pub fn eta_of(&self, m: T, n: T) -> C<T> {
        self.eta1 * m + self.eta2 * n
    }

    pub fn residuals(&self) -> ContextResiduals<T> {
        let two_pi_i = ci(T::lit(2.0) * T::PI());
        let four = T::lit(4.0);
        let (e1, e2, e3) = (self.e1, self.e2, self.e3);
        ContextResiduals {
            e_sum: (e1 + e2 + e3).norm(),
            legendre: (self.eta1 * self.tau_value() - self.eta2 - two_pi_i).norm(),
            g2: (self.g2 + (e1 * e2 + e2 * e3 + e3 * e1) * four).norm(),
            g3: (self.g3 - e1 * e2 * e3 * four).norm(),
        }
    }

    /// Pole clearance: `10⁻⁶ · min(1, Im τ)`.
    #[inline]
    pub fn pole_clearance(&self) -> T {
        T::lit(1e-6) * T::one().min(self.tau.im())
    }

    /// Diameter of the fundamental parallelogram.
    pub fn lattice_diameter(&self) -> T {
        let t = self.tau_value();
        let one = cr::<T>(T::one());
        (one + t).norm().max((one - t).norm())
    }

    /// Real lattice coordinates `(r, s)` with `z = r + sτ`, unreduced.
    #[inline]
    pub fn real_coords(&self, z: C<T>) -> (T, T) {
        let t = self.tau_value();
        let s = z.im / t.im;
        (z.re - s * t.re, s)
    }

    #[inline]
    pub fn from_coords(&self, r: T, s: T) -> C<T> {
        cr::<T>(r) + self.tau_value() * s
    }

    /// Reduces to `r, s ∈ [−½, ½)`; returns the reduced point and the
    /// subtracted integer lattice coordinates `(m, n)`.
    pub fn reduce_centered(&self, z: C<T>) -> (C<T>, T, T) {
        let (r, s) = self.real_coords(z);
        let half = T::lit(0.5);
        let m = (r + half).floor();
        let n = (s + half).floor();
        (self.from_coords(r - m, s - n), m, n)
    }

    /// Representative of `z` closest to the origin, with its Euclidean norm.
    pub fn nearest_lattice_offset(&self, z: C<T>) -> C<T> {
        let (zc, _, _) = self.reduce_centered(z);
        let t = self.tau_value();
        let mut best = zc;
        for m in -1i32..=1 {
            for n in -1i32..=1 {
                let cand = zc - cr::<T>(T::from_i32(m).unwrap()) - t * T::from_i32(n).unwrap();
                if cand.norm() < best.norm() {
                    best = cand;
                }
            }
        }
        best
    }

    /// Distance from `z` to the nearest lattice point.
    #[inline]
    pub fn dist_to_lattice(&self, z: C<T>) -> T {
        self.nearest_lattice_offset(z).norm()
    }

    /// Distance between `a` and `b` on the torus.
    #[inline]
    pub fn torus_dist(&self, a: C<T>, b: C<T>) -> T {
        self.dist_to_lattice(a - b)
    }

    /// The representative of `w + Λ` closest to `target`.
    #[inline]
    pub fn nearest_representative(&self, w: C<T>, target: C<T>) -> C<T> {
        target + self.nearest_lattice_offset(w - target)
    }

    /// Distance from `z` to `E_τ[2]` (lattice points and half-periods).
    pub fn dist_to_half_periods(&self, z: C<T>) -> T {
        half_periods(&self.tau)
            .iter()
            .map(|h| self.torus_dist(z, *h))
            .fold(T::infinity(), T::min)
    }

    /// Reduction to the torus point with `r, s ∈ [0, 1)`.
    pub fn lattice_reduce(&self, z: C<T>) -> TorusPoint<T> {
        let (r, s) = self.real_coords(z);
        let snap_tol = T::epsilon() * T::lit(4096.0) * T::one().max(z.norm());
        let wrap = |x: T| {
            let mut f = x - x.floor();
            if f >= T::one() - snap_tol || f <= snap_tol {
                f = T::zero();
            }
            f
        };
        let (r, s) = (wrap(r), wrap(s));
        TorusPoint {
            z: self.from_coords(r, s),
            r,
            s,
        }
    }

    /// Theta-series evaluation without argument reduction.
    fn eval_raw(&self, z: C<T>) -> WeierstrassValues<T> {
        let pi = T::PI();
        let v = z * pi;
        let w = (ci(T::one()) * v).exp();
        let w_inv = w.inv();
        let w2 = w * w;
        let w2_inv = w_inv * w_inv;
        let (mut p, mut p_inv) = (w, w_inv);
        let zero = C::new(T::zero(), T::zero());
        let (mut th0, mut th1, mut th2, mut th3) = (zero, zero, zero, zero);
        let two_i = ci(T::lit(2.0));
        let half = T::lit(0.5);
        for (n, a) in self.theta_coeffs.iter().enumerate() {
            let k = T::from_usize(2 * n + 1).unwrap();
            let sin = (p - p_inv) / two_i;
            let cos = (p + p_inv) * half;
            th0 += *a * sin;
            th1 += *a * cos * k;
            th2 -= *a * sin * (k * k);
            th3 -= *a * cos * (k * k * k);
            p *= w2;
            p_inv *= w2_inv;
        }
        let l1 = th1 / th0;
        let l2 = th2 / th0;
        let l3 = th3 / th0;
        let zeta = self.eta1 * z + l1 * pi;
        let wp = -self.eta1 - (l2 - l1 * l1) * (pi * pi);
        let dwp = -(l3 - l1 * l2 * T::lit(3.0) + l1 * l1 * l1 * T::lit(2.0)) * (pi * pi * pi);
        WeierstrassValues { wp, dwp, zeta }
    }

    fn check_pole(&self, zc: C<T>) -> Result<()> {
        let d = self.dist_to_lattice(zc);
        let clearance = self.pole_clearance();
        if d < clearance {
            return Err(Error::PoleProximity {
                distance: d.as_f64(),
                clearance: clearance.as_f64(),
            });
        }
        Ok(())
    }

    /// ℘, ℘′ and ζ at `z`.
    pub fn values(&self, z: C<T>) -> Result<WeierstrassValues<T>> {
        let (zc, m, n) = self.reduce_centered(z);
        self.check_pole(zc)?;
        let mut out = self.eval_raw(zc);
        out.zeta += self.eta_of(m, n);
        Ok(out)
    }

    /// `(℘(z), ℘′(z))`.
    pub fn wp(&self, z: C<T>) -> Result<(C<T>, C<T>)> {
        let v = self.values(z)?;
        Ok((v.wp, v.dwp))
    }

    pub fn wzeta(&self, z: C<T>) -> Result<C<T>> {
        Ok(self.values(z)?.zeta)
    }

    /// `℘″ = 6℘² − g₂/2`.
    pub fn wp_second(&self, wp: C<T>) -> C<T> {
        wp * wp * T::lit(6.0) - self.g2 * T::lit(0.5)
    }

    /// Canonical representative of `±z`: reduced `s < ½`, then `r < ½`,
    /// then the smaller `|z|`.
    pub fn canonical_pm(&self, z: C<T>) -> TorusPoint<T> {
        let plus = self.lattice_reduce(z);
        let minus = self.lattice_reduce(-z);
        let tie = T::lit(1e-9);
        let half = T::lit(0.5);
        let is_tie = |x: T| x <= tie || (x - half).abs() <= tie || x >= T::one() - tie;
        if !is_tie(plus.s) {
            return if plus.s < half { plus } else { minus };
        }
        if !is_tie(plus.r) {
            return if plus.r < half { plus } else { minus };
        }
        if plus.z.norm() <= minus.z.norm() {
            plus
        } else {
            minus
        }
    }

    /// Solves `℘(z) = c`, returning the canonical one of the two preimages.
    pub fn invert_wp(&self, c: C<T>) -> Result<TorusPoint<T>> {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::InvalidArgument("℘-value must be finite".into()));
        }
        let scale = T::one().max(c.norm());
        let hp = half_periods(&self.tau);
        for k in 1..=3 {
            if (c - self.e(k)).norm() <= self.tol * scale * T::lit(1e-3) {
                return Ok(self.lattice_reduce(hp[k]));
            }
        }

        let mut seeds: Vec<C<T>> = Vec::new();
        for k in 1..=3 {
            let second = self.wp_second(self.e(k));
            if second.norm() > T::epsilon() {
                seeds.push(hp[k] + ((c - self.e(k)) / (second * T::lit(0.5))).sqrt());
            }
        }
        if c.norm() > T::one() {
            seeds.push(c.sqrt().inv());
        }
        for i in 0..6 {
            for j in 0..3 {
                let r = (T::from_usize(i).unwrap() + T::lit(0.5)) / T::lit(6.0);
                let s = (T::from_usize(j).unwrap() + T::lit(0.5)) / T::lit(6.0);
                seeds.push(self.from_coords(r, s));
            }
        }
        let mut ranked: Vec<(T, C<T>)> = seeds
            .into_iter()
            .filter_map(|z| self.wp(z).ok().map(|(w, _)| ((w - c).norm(), z)))
            .filter(|(d, _)| d.is_finite())
            .collect();
        ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

        let max_step = T::lit(0.2) * T::one().min(self.tau.im());
        let mut best: Option<(T, C<T>)> = None;
        for &(_, seed) in ranked.iter().take(8) {
            let Some((res, z)) = self.newton_wp(c, seed, max_step) else {
                continue;
            };
            if best.is_none_or(|(b, _)| res < b) {
                best = Some((res, z));
            }
            if res <= self.tol * scale {
                break;
            }
        }
        match best {
            Some((res, z)) if res <= self.tol * scale => Ok(self.canonical_pm(z)),
            Some((res, _)) => Err(Error::NoConvergence(format!(
                "℘-inversion residual {:e}",
                res.as_f64()
            ))),
            None => Err(Error::NoConvergence("℘-inversion: all seeds failed".into())),
        }
    }

    fn newton_wp(&self, c: C<T>, seed: C<T>, max_step: T) -> Option<(T, C<T>)> {
        let mut z = seed;
        let mut settled = 0;
        for _ in 0..80 {
            let (w, dw) = self.wp(z).ok()?;
            let f = w - c;
            if dw.norm() == T::zero() {
                return Some((f.norm(), z));
            }
            let mut step = f / dw;
            let len = step.norm();
            if len > max_step {
                step = step * (max_step / len);
            }
            z -= step;
            let (zc, _, _) = self.reduce_centered(z);
            z = zc;
            if step.norm() <= T::epsilon() * T::lit(16.0) * T::one().max(z.norm()) {
                settled += 1;
                if settled >= 2 {
                    break;
                }
            }
        }
        let (w, _) = self.wp(z).ok()?;
        Some(((w - c).norm(), z))
    }
}

/// Builds contexts with shared tolerances for arbitrary `τ`, for computations
/// that move in `τ` (finite differences, flows).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextFamily<T: Real> {
    pub tol: T,
    pub series_tol: T,
}

impl<T: Real> Default for ContextFamily<T> {
    fn default() -> Self {
        ContextFamily {
            tol: T::default_tol(),
            series_tol: T::epsilon(),
        }
    }
}

impl<T: Real> ContextFamily<T> {
    pub fn new(tol: T) -> Self {
        ContextFamily {
            tol,
            series_tol: T::epsilon(),
        }
    }

    pub fn at(&self, tau: C<T>) -> Result<EllipticContext<T>> {
        EllipticContext::with_series_tol(Tau::new(tau)?, self.tol, self.series_tol)
    }
}

/// `g₂ = (4π⁴/3) E₄`, `g₃ = (8π⁶/27) E₆` with `q² = e^{2πiτ}`.
fn eisenstein_invariants<T: Real>(q: C<T>, series_tol: T) -> (C<T>, C<T>) {
    let q2 = q * q;
    let one = cr::<T>(T::one());
    let mut s3 = C::new(T::zero(), T::zero());
    let mut s5 = C::new(T::zero(), T::zero());
    let mut qn = q2;
    for n in 1..20_000usize {
        let nn = T::from_usize(n).unwrap();
        let lambert = qn / (one - qn);
        let t3 = lambert * nn.powi(3);
        let t5 = lambert * nn.powi(5);
        s3 += t3;
        s5 += t5;
        if t5.norm() * T::lit(504.0) < series_tol * T::lit(0.1) * (T::one() + s5.norm()) {
            break;
        }
        qn *= q2;
    }
    let pi = T::PI();
    let pi2 = pi * pi;
    let e4 = one + s3 * T::lit(240.0);
    let e6 = one - s5 * T::lit(504.0);
    (
        e4 * (T::lit(4.0) * pi2 * pi2 / T::lit(3.0)),
        e6 * (T::lit(8.0) * pi2 * pi2 * pi2 / T::lit(27.0)),
    )
}
