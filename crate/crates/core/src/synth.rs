//! Solutions of `Δu + eᵘ = 0` from unitary GLE monodromy.
//!
//! With an eigenbasis `y₁, y₂(z) = y₁(−z)` and `W = y₁′y₂ − y₁y₂′`,
//!
//! ```text
//! u_β(z) = log 8 + 2 log(β|W|) − 2 log(β²|y₁|² + |y₂|²)
//! ```
//!
//! is the solution with developing map `f = βy₁/y₂`. It is single-valued, so
//! transport paths may be chosen freely.

use num_complex::Complex;
use rayon::prelude::*;

use crate::elliptic::{half_periods, EllipticContext, Tau};
use crate::error::{Error, Result};
use crate::gle::{
    eigen_common_basis, is_unitary, potential, route, transport, GLEParams, MonodromyRep,
    SingularSet,
};
use crate::ode::OdeOptions;
use crate::scalar::{Real, C};

/// Basis of GLE solutions at `q0` diagonalizing the monodromy, with
/// `y₂(z) = y₁(−z)`.
#[derive(Debug, Clone)]
pub struct EigenBasis<T: Real> {
    pub q0: C<T>,
    /// `(y₁(q₀), y₁′(q₀))`.
    pub y1_init: [C<T>; 2],
    /// `(y₂(q₀), y₂′(q₀)) = (y₁(−q₀), −y₁′(−q₀))`.
    pub y2_init: [C<T>; 2],
    pub wronskian: C<T>,
    pub r: T,
    pub s: T,
    /// Path from `q₀` to `−q₀` used for the parity transport.
    pub reflect_path: Vec<C<T>>,
    pub clearance: T,
    pub ode: OdeOptions<T>,
}

impl<T: Real> EigenBasis<T> {
    fn state(&self) -> [C<T>; 4] {
        [
            self.y1_init[0],
            self.y1_init[1],
            self.y2_init[0],
            self.y2_init[1],
        ]
    }
}

/// Tolerances for synthesis transports.
pub fn synth_ode<T: Real>() -> OdeOptions<T> {
    OdeOptions::with_tolerances(T::lit(1e-12), T::lit(1e-14))
}

pub fn eigenbasis<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    rep: &MonodromyRep<T>,
) -> Result<EigenBasis<T>> {
    eigenbasis_with(ctx, params, rep, &synth_ode())
}

pub fn eigenbasis_with<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    rep: &MonodromyRep<T>,
    ode: &OdeOptions<T>,
) -> Result<EigenBasis<T>> {
    let (r, s) = is_unitary(rep, T::lit(1e-6)).ok_or(Error::NotUnitary)?;
    let (t1, t2) = (rep.transfer(1), rep.transfer(2));
    let (p, _) = eigen_common_basis(&t1, &t2);
    let cond = p.det().norm();
    if cond < T::lit(1e-6) {
        return Err(Error::IllConditioned {
            condition: (T::one() / cond).as_f64(),
        });
    }
    let two_pi = T::lit(2.0) * T::PI();
    let lam = Complex::from_polar(T::one(), -two_pi * s);
    let mu = Complex::from_polar(T::one(), two_pi * r);
    let mismatch = |v: [C<T>; 2]| {
        let a = t1.apply(v);
        let b = t2.apply(v);
        (a[0] - v[0] * lam).norm()
            + (a[1] - v[1] * lam).norm()
            + (b[0] - v[0] * mu).norm()
            + (b[1] - v[1] * mu).norm()
    };
    let (c0, c1) = (p.column(0), p.column(1));
    let y1 = if mismatch(c0) <= mismatch(c1) { c0 } else { c1 };

    let q0 = rep.basepoint;
    let sing = SingularSet::new(ctx, params);
    let clearance = rep.clearance;
    let reflect_path = route(ctx, &sing, q0, -q0, clearance)?;
    let (end, _) = transport(ctx, params, &reflect_path, y1, ode)?;
    let y2 = [end[0], -end[1]];
    let w = y1[1] * y2[0] - y1[0] * y2[1];
    if w.norm() < ctx.tol {
        return Err(Error::IllConditioned {
            condition: (T::one() / w.norm()).as_f64(),
        });
    }
    Ok(EigenBasis {
        q0,
        y1_init: y1,
        y2_init: y2,
        wronskian: w,
        r,
        s,
        reflect_path,
        clearance,
        ode: *ode,
    })
}

/// `(y₁, y₁′, y₂, y₂′)` continued along `vertices` (starting at `q₀`).
pub fn basis_along<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    vertices: &[C<T>],
) -> Result<[C<T>; 4]> {
    Ok(transport(ctx, params, vertices, basis.state(), &basis.ode)?.0)
}

/// `u_β` from basis values.
pub fn u_from_values<T: Real>(y1: C<T>, y2: C<T>, w: C<T>, beta: T) -> T {
    let two = T::lit(2.0);
    T::lit(8.0).ln() + two * (beta * w.norm()).ln()
        - two * (beta * beta * y1.norm_sqr() + y2.norm_sqr()).ln()
}

/// `u_β(z)` by direct transport from `q₀` with the given path clearance.
pub fn u_at<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    beta: T,
    z: C<T>,
    clearance: T,
) -> Result<T> {
    let sing = SingularSet::new(ctx, params);
    let path = route(ctx, &sing, basis.q0, z, clearance)?;
    let y = basis_along(ctx, params, basis, &path)?;
    Ok(u_from_values(y[0], y[2], basis.wronskian, beta))
}

/// `|y₂(z) − y₁(−z)| + |y₂′(z) + y₁′(−z)|`, with `y₁(−z)` continued along
/// the reflection path followed by the mirror image of the path to `z`.
pub fn parity_defect<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    z: C<T>,
) -> Result<T> {
    let (at_z, at_mz) = mirrored_values(ctx, params, basis, z)?;
    Ok((at_z[2] - at_mz[0]).norm() + (at_z[3] + at_mz[1]).norm())
}

/// `f(z) f(−z)` with `f = y₁/y₂`, continued along mirrored paths.
pub fn parity_product<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    z: C<T>,
) -> Result<C<T>> {
    let (a, b) = mirrored_values(ctx, params, basis, z)?;
    Ok((a[0] / a[2]) * (b[0] / b[2]))
}

fn mirrored_values<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    z: C<T>,
) -> Result<([C<T>; 4], [C<T>; 4])> {
    let sing = SingularSet::new(ctx, params);
    let q = route(ctx, &sing, basis.q0, z, basis.clearance)?;
    let mut mirrored = basis.reflect_path.clone();
    mirrored.extend(q.iter().skip(1).map(|v| -*v));
    Ok((
        basis_along(ctx, params, basis, &q)?,
        basis_along(ctx, params, basis, &mirrored)?,
    ))
}

/// `W(z) = y₁′y₂ − y₁y₂′` after continuation to `z`.
pub fn wronskian_at<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    z: C<T>,
) -> Result<C<T>> {
    let sing = SingularSet::new(ctx, params);
    let q = route(ctx, &sing, basis.q0, z, basis.clearance)?;
    let y = basis_along(ctx, params, basis, &q)?;
    Ok(y[1] * y[2] - y[0] * y[3])
}

/// Gridded `u_β` over `x ∈ [0, 1)`, `y ∈ [0, Im τ)`, which is a fundamental
/// domain of `ℤ + ℤτ`. Index `j·N + i` holds `z = i·hx + i·j·hy`.
#[derive(Debug, Clone)]
pub struct SolutionField<T: Real> {
    pub tau: Tau<T>,
    pub p: C<T>,
    pub a: C<T>,
    pub beta: T,
    pub resolution: usize,
    pub hx: T,
    pub hy: T,
    pub mask_radius: T,
    /// `NaN` on masked nodes.
    pub u: Vec<T>,
    pub mask: Vec<bool>,
}

impl<T: Real> SolutionField<T> {
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.resolution + i
    }

    pub fn point(&self, i: usize, j: usize) -> C<T> {
        Complex::new(
            self.hx * T::from_usize(i).unwrap(),
            self.hy * T::from_usize(j).unwrap(),
        )
    }

    pub fn value(&self, i: usize, j: usize) -> Option<T> {
        let k = self.idx(i, j);
        if self.mask[k] {
            None
        } else {
            Some(self.u[k])
        }
    }

    /// Shifts every value by a constant (for sensitivity checks).
    pub fn shifted(&self, delta: T) -> Self {
        let mut out = self.clone();
        for v in out.u.iter_mut() {
            *v += delta;
        }
        out
    }

    /// `|Δ_h u + eᵘ|` at each node with an unmasked five-point stencil; `x`
    /// wraps with period 1, `y` does not.
    pub fn residual_grid(&self) -> Vec<Option<T>> {
        let n = self.resolution;
        let mut out = vec![None; n * n];
        let (hx2, hy2) = (self.hx * self.hx, self.hy * self.hy);
        for j in 1..n - 1 {
            for i in 0..n {
                let (l, r) = ((i + n - 1) % n, (i + 1) % n);
                let stencil = [
                    self.value(i, j),
                    self.value(l, j),
                    self.value(r, j),
                    self.value(i, j - 1),
                    self.value(i, j + 1),
                ];
                if let [Some(c), Some(w), Some(e), Some(s), Some(nn)] = stencil {
                    let two = T::lit(2.0);
                    let lap = (w - two * c + e) / hx2 + (s - two * c + nn) / hy2;
                    out[self.idx(i, j)] = Some((lap + c.exp()).abs());
                }
            }
        }
        out
    }

    pub fn max_u(&self) -> T {
        self.u
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| !**m)
            .map(|(v, _)| *v)
            .fold(T::neg_infinity(), T::max)
    }
}

/// Maximum of `|Δ_h u + eᵘ|` over nodes with full unmasked stencils.
pub fn pde_residual<T: Real>(field: &SolutionField<T>) -> T {
    field
        .residual_grid()
        .into_iter()
        .flatten()
        .fold(T::zero(), T::max)
}

/// Ratio of maximal residuals of a field and its refinement by two, taken
/// over the coarse nodes where both are defined.
pub fn residual_ratio<T: Real>(coarse: &SolutionField<T>, fine: &SolutionField<T>) -> Result<T> {
    if fine.resolution != 2 * coarse.resolution {
        return Err(Error::InvalidArgument(
            "fine field must have twice the coarse resolution".into(),
        ));
    }
    let rc = coarse.residual_grid();
    let rf = fine.residual_grid();
    let n = coarse.resolution;
    let (mut mc, mut mf) = (T::zero(), T::zero());
    for j in 0..n {
        for i in 0..n {
            if let (Some(a), Some(b)) = (rc[coarse.idx(i, j)], rf[fine.idx(2 * i, 2 * j)]) {
                mc = mc.max(a);
                mf = mf.max(b);
            }
        }
    }
    Ok(mc / mf)
}

fn singular_heights<T: Real>(ctx: &EllipticContext<T>, params: &GLEParams<T>) -> Vec<T> {
    let b = ctx.tau.im();
    let mut ys: Vec<T> = half_periods(&ctx.tau).iter().map(|h| h.im).collect();
    let p = ctx.nearest_lattice_offset(params.p.z);
    ys.push(p.im);
    ys.push(-p.im);
    ys.into_iter().map(|y| y - (y / b).floor() * b).collect()
}

fn row_clear<T: Real>(y: T, heights: &[T], b: T, gap: T) -> bool {
    heights.iter().all(|h| {
        let d = (y - *h).abs();
        d.min(b - d) >= gap
    })
}

pub fn u_field<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    resolution: usize,
    beta: T,
) -> Result<SolutionField<T>> {
    if !(beta > T::zero()) {
        return Err(Error::InvalidArgument("beta must be positive".into()));
    }
    if resolution < 32 {
        return Err(Error::InvalidArgument(
            "resolution must be at least 32".into(),
        ));
    }
    let n = resolution;
    let nf = T::from_usize(n).unwrap();
    let b = ctx.tau.im();
    let (hx, hy) = (T::one() / nf, b / nf);
    let mask_radius = (T::lit(2.0) * hx.max(hy)).max(basis.clearance);
    let path_clearance = T::lit(0.85) * mask_radius;
    let sing = SingularSet::new(ctx, params);
    let point = |i: usize, j: usize| {
        Complex::new(
            hx * T::from_usize(i).unwrap(),
            hy * T::from_usize(j).unwrap(),
        )
    };
    let mask: Vec<bool> = (0..n * n)
        .map(|k| sing.distance(ctx, point(k % n, k / n)) < mask_radius)
        .collect();

    // Horizontal base row between grid rows, clear of every singular height.
    let heights = singular_heights(ctx, params);
    let gap = T::lit(1.5) * mask_radius;
    let jq = (basis.q0.im / hy).floor().to_i64().unwrap_or(0);
    let mut y_row = None;
    for off in 0..n as i64 {
        for cand in [jq + off, jq - off] {
            let j = cand.rem_euclid(n as i64);
            let y = hy * (T::from_i64(j).unwrap() + T::lit(0.5));
            if row_clear(y, &heights, b, gap) {
                y_row = Some((j as usize, y));
                break;
            }
        }
        if y_row.is_some() {
            break;
        }
    }
    let (j_row, y_row) = y_row.ok_or(Error::NoValidBasepoint {
        clearance: gap.as_f64(),
    })?;

    let start = Complex::new(T::zero(), y_row);
    let to_row = route(ctx, &sing, basis.q0, start, path_clearance)?;
    let mut state = basis_along(ctx, params, basis, &to_row)?;
    let mut row_states = Vec::with_capacity(n);
    row_states.push(state);
    for i in 1..n {
        let a = Complex::new(hx * T::from_usize(i - 1).unwrap(), y_row);
        let c = Complex::new(hx * T::from_usize(i).unwrap(), y_row);
        state = transport(ctx, params, &[a, c], state, &basis.ode)?.0;
        row_states.push(state);
    }

    let w = basis.wronskian;
    let columns: Vec<Vec<(usize, T)>> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<(usize, T)>> {
            let x = hx * T::from_usize(i).unwrap();
            let mut vals = Vec::with_capacity(n);
            let up = (j_row + 1..n).collect::<Vec<_>>();
            let down = (0..=j_row).rev().collect::<Vec<_>>();
            for dir in [up, down] {
                let mut cur = Complex::new(x, y_row);
                let mut st = row_states[i];
                for j in dir {
                    if mask[j * n + i] {
                        continue;
                    }
                    let target = Complex::new(x, hy * T::from_usize(j).unwrap());
                    let path = route(ctx, &sing, cur, target, path_clearance)?;
                    st = transport(ctx, params, &path, st, &basis.ode)?.0;
                    cur = target;
                    vals.push((j, u_from_values(st[0], st[2], w, beta)));
                }
            }
            Ok(vals)
        })
        .collect::<Result<_>>()?;

    let mut u = vec![T::nan(); n * n];
    for (i, col) in columns.into_iter().enumerate() {
        for (j, v) in col {
            u[j * n + i] = v;
        }
    }
    Ok(SolutionField {
        tau: ctx.tau,
        p: params.p.z,
        a: params.a,
        beta,
        resolution: n,
        hx,
        hy,
        mask_radius,
        u,
        mask,
    })
}

/// Basis clearance, shrunk for points close to the singular set.
pub fn adaptive_clearance<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    z: C<T>,
) -> T {
    let d = SingularSet::new(ctx, params).distance(ctx, z);
    basis.clearance.min(T::lit(0.8) * d)
}

/// `max |u_β(z) − u_β(−z)|` over the given points, by direct transport.
pub fn evenness_defect<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    beta: T,
    points: &[C<T>],
) -> Result<T> {
    let vals: Vec<T> = points
        .par_iter()
        .map(|z| -> Result<T> {
            let cl = adaptive_clearance(ctx, params, basis, *z);
            let a = u_at(ctx, params, basis, beta, *z, cl)?;
            let b = u_at(ctx, params, basis, beta, -*z, cl)?;
            Ok((a - b).abs())
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(T::zero(), T::max))
}

/// `max |u_β(z + ω) − u_β(z)|` over the given points and `ω ∈ {1, τ}`.
pub fn periodicity_defect<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    beta: T,
    points: &[C<T>],
) -> Result<T> {
    let tau = ctx.tau.value();
    let one = Complex::new(T::one(), T::zero());
    let vals: Vec<T> = points
        .par_iter()
        .map(|z| -> Result<T> {
            let cl = adaptive_clearance(ctx, params, basis, *z);
            let u0 = u_at(ctx, params, basis, beta, *z, cl)?;
            let u1 = u_at(ctx, params, basis, beta, *z + one, cl)?;
            let u2 = u_at(ctx, params, basis, beta, *z + tau, cl)?;
            Ok((u1 - u0).abs().max((u2 - u0).abs()))
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(T::zero(), T::max))
}

/// Every `stride`-th unmasked node of the field.
pub fn sample_points<T: Real>(field: &SolutionField<T>, stride: usize) -> Vec<C<T>> {
    let n = field.resolution;
    let stride = stride.max(1);
    let mut out = Vec::new();
    for j in (0..n).step_by(stride) {
        for i in (0..n).step_by(stride) {
            if !field.mask[field.idx(i, j)] {
                out.push(field.point(i, j));
            }
        }
    }
    out
}

/// Radii of the sampling circles, before scaling by `min(1, Im τ)`.
pub const ASYMPTOTIC_RADII: [f64; 4] = [0.08, 0.04, 0.02, 0.01];

/// Least-squares slope of the circle-averaged `u₁` against `ln ρ` around
/// `center`, returned as `|slope − expected|`.
pub fn asymptotics_check<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    center: C<T>,
    expected_coeff: T,
) -> Result<T> {
    Ok((asymptotic_slope(ctx, params, basis, center)? - expected_coeff).abs())
}

pub fn asymptotic_slope<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    center: C<T>,
) -> Result<T> {
    let sing = SingularSet::new(ctx, params);
    if sing.distance(ctx, center) > T::lit(1e-8) {
        return Err(Error::InvalidArgument(
            "center must be a half-period or ±p".into(),
        ));
    }
    let scale = T::one().min(ctx.tau.im());
    let radii: Vec<T> = ASYMPTOTIC_RADII
        .iter()
        .map(|r| T::lit(*r) * scale)
        .collect();
    let r_max = radii[0];
    let other = sing
        .points
        .iter()
        .map(|(x, _)| ctx.torus_dist(center, *x))
        .filter(|d| *d > T::lit(1e-8))
        .fold(T::infinity(), T::min);
    if other <= T::lit(2.0) * r_max {
        return Err(Error::CircleIntersectsSingularity {
            radius: r_max.as_f64(),
        });
    }
    let clearance = radii[3] * T::lit(0.4);
    let per_circle = 8usize;
    let means: Vec<T> = radii
        .par_iter()
        .map(|rho| -> Result<T> {
            let mut acc = T::zero();
            for k in 0..per_circle {
                let th = T::lit(2.0) * T::PI() * (T::from_usize(k).unwrap() + T::lit(0.25))
                    / T::from_usize(per_circle).unwrap();
                let z = center + Complex::from_polar(*rho, th);
                acc += u_at(ctx, params, basis, T::one(), z, clearance)?;
            }
            Ok(acc / T::from_usize(per_circle).unwrap())
        })
        .collect::<Result<_>>()?;
    let xs: Vec<T> = radii.iter().map(|r| r.ln()).collect();
    let m = T::from_usize(xs.len()).unwrap();
    let xbar = xs.iter().fold(T::zero(), |a, b| a + *b) / m;
    let ybar = means.iter().fold(T::zero(), |a, b| a + *b) / m;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (x, y) in xs.iter().zip(&means) {
        sxy += (*x - xbar) * (*y - ybar);
        sxx += (*x - xbar) * (*x - xbar);
    }
    Ok(sxy / sxx)
}

/// Default finite-difference step for [`schwarzian_defect`].
pub const SCHWARZIAN_STEP: f64 = 0.01;

/// `|S(f)(z) + 2I(z)| / |2I(z)|` with the Schwarzian of `f = y₁/y₂` from
/// fourth-order central differences of step `h` along the real direction.
///
/// The differences are taken of the Möbius image `g = (y₂(z)y₁ − y₁(z)y₂) /
/// (y₂′(z)y₁ − y₁′(z)y₂)`, which has the same Schwarzian and no pole near `z`.
pub fn schwarzian_defect<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    basis: &EigenBasis<T>,
    z: C<T>,
    h: T,
) -> Result<T> {
    let sing = SingularSet::new(ctx, params);
    let path = route(ctx, &sing, basis.q0, z, basis.clearance)?;
    let at_z = basis_along(ctx, params, basis, &path)?;
    let (n1, n2) = (at_z[2], -at_z[0]);
    let (d1, d2) = (at_z[3], -at_z[1]);
    let chart = |st: &[C<T>; 4]| (n1 * st[0] + n2 * st[2]) / (d1 * st[0] + d2 * st[2]);
    let hc = Complex::new(h, T::zero());
    let mut f = [Complex::new(T::zero(), T::zero()); 7];
    f[3] = chart(&at_z);
    for dir in [1i32, -1] {
        let mut st = at_z;
        let mut cur = z;
        for k in 1..=3 {
            let next = z + hc * T::from_i32(dir * k).unwrap();
            st = transport(ctx, params, &[cur, next], st, &basis.ode)?.0;
            cur = next;
            f[(3 + dir * k) as usize] = chart(&st);
        }
    }
    let h2 = h * h;
    let d1 = (-f[5] + f[4] * T::lit(8.0) - f[2] * T::lit(8.0) + f[1]) / (h * T::lit(12.0));
    let d2 = (-f[5] + f[4] * T::lit(16.0) - f[3] * T::lit(30.0) + f[2] * T::lit(16.0) - f[1])
        / (h2 * T::lit(12.0));
    let d3 = (-f[6] + f[5] * T::lit(8.0) - f[4] * T::lit(13.0) + f[2] * T::lit(13.0)
        - f[1] * T::lit(8.0)
        + f[0])
        / (h2 * h * T::lit(8.0));
    let ratio = d2 / d1;
    let schwarzian = d3 / d1 - ratio * ratio * T::lit(1.5);
    let target = potential(ctx, params, z)? * T::lit(-2.0);
    Ok((schwarzian - target).norm() / target.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::ContextFamily;
    use crate::gle::monodromy;
    use crate::hitchin::{solution_state, MonodromyParams, PVIIndex};

    fn setup() -> (EllipticContext<f64>, GLEParams<f64>, EigenBasis<f64>) {
        let fam = ContextFamily::<f64>::new(1e-10);
        let tau = Tau::from_parts(0.2, 1.1).unwrap();
        let ctx = fam.at(tau.value()).unwrap();
        let mp = MonodromyParams::real(0.3, 0.2).unwrap();
        let st = solution_state(&fam, &mp, PVIIndex::ZERO, tau, 1e-3).unwrap();
        let g = GLEParams::new(&ctx, PVIIndex::ZERO, st.p, st.a).unwrap();
        let rep = monodromy(&ctx, &g, None).unwrap();
        let b = eigenbasis(&ctx, &g, &rep).unwrap();
        (ctx, g, b)
    }

    #[test]
    fn basis_parity_and_wronskian() {
        let (ctx, g, b) = setup();
        assert!((b.r - 0.3).abs() < 1e-6 && (b.s - 0.2).abs() < 1e-6);
        let zs = [
            Complex::new(0.13, 0.21),
            Complex::new(0.71, 0.64),
            Complex::new(0.45, 0.95),
        ];
        for z in zs {
            assert!(parity_defect(&ctx, &g, &b, z).unwrap() < 1e-8);
            assert!((parity_product(&ctx, &g, &b, z).unwrap() - 1.0).norm() < 1e-8);
            assert!((wronskian_at(&ctx, &g, &b, z).unwrap() - b.wronskian).norm() < 1e-9);
            let sd = schwarzian_defect(&ctx, &g, &b, z, SCHWARZIAN_STEP).unwrap();
            assert!(sd < 1e-3, "{sd}");
        }
    }

    #[test]
    fn even_only_at_unit_beta() {
        let (ctx, g, b) = setup();
        let zs = [Complex::new(0.31, 0.17), Complex::new(0.62, 0.83)];
        assert!(evenness_defect(&ctx, &g, &b, 1.0, &zs).unwrap() < 1e-7);
        assert!(evenness_defect(&ctx, &g, &b, 2.0, &zs).unwrap() > 1e-2);
        assert!(periodicity_defect(&ctx, &g, &b, 2.0, &zs).unwrap() < 1e-7);
    }

    #[test]
    fn coarse_field_solves_pde() {
        let (ctx, g, b) = setup();
        let f = u_field(&ctx, &g, &b, 32, 1.0).unwrap();
        assert!(f.mask.iter().any(|m| *m));
        assert!(f.u.iter().zip(&f.mask).all(|(u, m)| *m || u.is_finite()));
        let shifted = f.shifted(0.1);
        assert!(pde_residual(&shifted) > pde_residual(&f));
        // x-periodicity of the grid: column 0 against a direct value at x = 1.
        let (i, j) = (0, 5);
        if let Some(v) = f.value(i, j) {
            let w = u_at(&ctx, &g, &b, 1.0, f.point(i, j) + 1.0, b.clearance).unwrap();
            assert!((v - w).abs() < 1e-7);
        }
    }
}
