//! Transfer matrices along paths, the monodromy representation, and its
//! classification.

use num_complex::Complex;
use rayon::prelude::*;

use crate::elliptic::EllipticContext;
use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::ode::{integrate, OdeOptions, OdeStats};
use crate::scalar::{Real, C};

use super::paths::{build_cycles, default_basepoint, Cycles, PathSpec, SingularSet};
use super::{potential_unchecked, GLEParams};

/// Continues solutions of the GLE along a polyline. The state holds `N/2`
/// pairs `(y, y′)`; edges are parameterized by arc length.
pub fn transport<T: Real, const N: usize>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    vertices: &[C<T>],
    y0: [C<T>; N],
    opts: &OdeOptions<T>,
) -> Result<([C<T>; N], OdeStats)> {
    let mut y = y0;
    let mut stats = OdeStats::default();
    for w in vertices.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b - a).norm();
        if len == T::zero() {
            continue;
        }
        let u = (b - a) / len;
        let rhs = |t: T, s: &[C<T>; N]| -> Result<[C<T>; N]> {
            let pot = potential_unchecked(ctx, params, a + u * t)?;
            let mut out = [Complex::new(T::zero(), T::zero()); N];
            for k in (0..N).step_by(2) {
                out[k] = u * s[k + 1];
                out[k + 1] = u * pot * s[k];
            }
            Ok(out)
        };
        let (next, st) = integrate(rhs, T::zero(), len, y, opts)?;
        stats += st;
        y = next;
    }
    Ok((y, stats))
}

/// Matrix mapping initial data `(y, y′)` at the path start to the continued
/// data at its end.
pub fn transfer_matrix<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    path: &PathSpec<T>,
    opts: &OdeOptions<T>,
) -> Result<Mat2<T>> {
    let o = Complex::new(T::one(), T::zero());
    let z = Complex::new(T::zero(), T::zero());
    let (y, _) = transport(ctx, params, &path.vertices, [o, z, z, o], opts)?;
    Ok(Mat2::from_columns([y[0], y[1]], [y[2], y[3]]))
}

/// `N₁, N₂` act on the row of basis functions, `ℓ_j*(y₁, y₂)ᵀ = N_j (y₁, y₂)ᵀ`,
/// for the basis with identity data at the basepoint. `N_j` is the class of
/// `ℓ_j` avoiding `L + Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyRep<T: Real> {
    pub n1: Mat2<T>,
    pub n2: Mat2<T>,
    pub gamma_plus: Mat2<T>,
    pub gamma_minus: Mat2<T>,
    pub basepoint: C<T>,
    pub clearance: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepResiduals<T: Real> {
    pub det_n1: T,
    pub det_n2: T,
    pub det_gamma_plus: T,
    pub det_gamma_minus: T,
    pub commutator: T,
    pub gamma_plus: T,
    pub gamma_minus: T,
}

impl<T: Real> RepResiduals<T> {
    pub fn max_det(&self) -> T {
        self.det_n1
            .max(self.det_n2)
            .max(self.det_gamma_plus)
            .max(self.det_gamma_minus)
    }
}

impl<T: Real> MonodromyRep<T> {
    /// A representation with `ρ(γ±) = −I`, for classifying given matrices.
    pub fn from_matrices(n1: Mat2<T>, n2: Mat2<T>) -> Self {
        let m = -Mat2::identity();
        MonodromyRep {
            n1,
            n2,
            gamma_plus: m,
            gamma_minus: m,
            basepoint: Complex::new(T::zero(), T::zero()),
            clearance: T::zero(),
        }
    }

    pub fn residuals(&self) -> RepResiduals<T> {
        let one = Complex::new(T::one(), T::zero());
        let id = Mat2::identity();
        RepResiduals {
            det_n1: (self.n1.det() - one).norm(),
            det_n2: (self.n2.det() - one).norm(),
            det_gamma_plus: (self.gamma_plus.det() - one).norm(),
            det_gamma_minus: (self.gamma_minus.det() - one).norm(),
            commutator: (self.n1 * self.n2 - self.n2 * self.n1).norm(),
            gamma_plus: (self.gamma_plus - (-id)).norm(),
            gamma_minus: (self.gamma_minus - (-id)).norm(),
        }
    }

    /// Data transfer matrix `N_jᵀ` for the `L`-avoiding class of `ℓ_j`.
    pub fn transfer(&self, j: usize) -> Mat2<T> {
        match j {
            1 => self.n1.transpose(),
            2 => self.n2.transpose(),
            _ => panic!("cycle index must be 1 or 2"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MonodromyOptions<T: Real> {
    pub q0: Option<C<T>>,
    /// Defaults to `0.05 · min(1, Im τ)`.
    pub clearance: Option<T>,
    pub ode: OdeOptions<T>,
}

impl<T: Real> Default for MonodromyOptions<T> {
    fn default() -> Self {
        MonodromyOptions {
            q0: None,
            clearance: None,
            ode: OdeOptions::default(),
        }
    }
}

pub fn default_clearance<T: Real>(ctx: &EllipticContext<T>) -> T {
    T::lit(0.05) * T::one().min(ctx.tau.im())
}

pub fn monodromy<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    q0: Option<C<T>>,
) -> Result<MonodromyRep<T>> {
    monodromy_with(
        ctx,
        params,
        &MonodromyOptions {
            q0,
            ..Default::default()
        },
    )
}

pub fn monodromy_with<T: Real>(
    ctx: &EllipticContext<T>,
    params: &GLEParams<T>,
    opts: &MonodromyOptions<T>,
) -> Result<MonodromyRep<T>> {
    let clearance = opts.clearance.unwrap_or_else(|| default_clearance(ctx));
    let q0 = match opts.q0 {
        Some(q) => q,
        None => default_basepoint(ctx, params, clearance)?,
    };
    let Cycles {
        l1,
        l2,
        gamma_plus,
        gamma_minus,
    } = build_cycles(ctx, params, q0, clearance)?;
    let sing = SingularSet::new(ctx, params);
    let paths = [&l1, &l2, &gamma_plus, &gamma_minus];
    let mats: Vec<Mat2<T>> = paths
        .par_iter()
        .map(|p| transfer_matrix(ctx, params, p, &opts.ode))
        .collect::<Result<_>>()?;
    let sign = |path: &PathSpec<T>| {
        if path.cut_crossings(ctx, &sing) % 2 == 1 {
            -T::one()
        } else {
            T::one()
        }
    };
    let n1 = mats[0]
        .transpose()
        .scale(Complex::new(sign(&l1), T::zero()));
    let n2 = mats[1]
        .transpose()
        .scale(Complex::new(sign(&l2), T::zero()));
    Ok(MonodromyRep {
        n1,
        n2,
        gamma_plus: mats[2].transpose(),
        gamma_minus: mats[3].transpose(),
        basepoint: q0,
        clearance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonodromyClass<T: Real> {
    /// `N₁ ~ diag(e^{−2πis}, e^{2πis})`, `N₂ ~ diag(e^{2πir}, e^{−2πir})`.
    CompletelyReducible { r: C<T>, s: C<T> },
    /// `N₁ ~ ε₁[[1,0],[1,1]]`, `N₂ ~ ε₂[[1,0],[C,1]]`; `c = None` is `C = ∞`
    /// (`N₁ = ε₁I`).
    NotCompletelyReducible { eps1: i8, eps2: i8, c: Option<C<T>> },
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions<T: Real> {
    /// Below this `|tr² − 4|` a matrix counts as having a repeated eigenvalue.
    pub disc_tol: T,
    pub offdiag_tol: T,
    /// Minimum `|det|` of the unit-column eigenvector matrix.
    pub cond_tol: T,
    /// Below this norm `εN − I` counts as zero.
    pub scalar_tol: T,
}

impl<T: Real> Default for ClassifyOptions<T> {
    fn default() -> Self {
        ClassifyOptions {
            disc_tol: T::lit(1e-6),
            offdiag_tol: T::lit(1e-6),
            cond_tol: T::lit(1e-6),
            scalar_tol: T::lit(1e-6),
        }
    }
}

/// Eigenvector matrix of whichever of `N₁, N₂, N₁N₂` has the widest
/// eigenvalue gap, with that gap.
pub fn eigen_common_basis<T: Real>(n1: &Mat2<T>, n2: &Mat2<T>) -> (Mat2<T>, T) {
    let cands = [*n1, *n2, *n1 * *n2];
    let (best, gap) = cands
        .iter()
        .map(|m| {
            let (a, b) = m.eigenvalues();
            (m, (a - b).norm())
        })
        .fold(
            (&cands[0], -T::one()),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
    let (a, b) = best.eigenvalues();
    (
        Mat2::from_columns(best.eigenvector(a), best.eigenvector(b)),
        gap,
    )
}

fn wrap<T: Real>(x: C<T>) -> C<T> {
    Complex::new(x.re - x.re.floor(), x.im)
}

/// Canonical `(r, s)`: real parts in `[0, 1)`, joint sign fixed by
/// `Re s ≤ ½`, then `Re r ≤ ½`.
pub(crate) fn canonical_rs<T: Real>(r: C<T>, s: C<T>) -> (C<T>, C<T>) {
    let tie = T::lit(1e-9);
    let half = T::lit(0.5);
    let (r, s) = (wrap(r), wrap(s));
    let (nr, ns) = (wrap(-r), wrap(-s));
    let snapped = |x: T| {
        if x > T::one() - tie {
            T::zero()
        } else {
            x
        }
    };
    let (rr, sr) = (snapped(r.re), snapped(s.re));
    let s_tie = sr <= tie || (sr - half).abs() <= tie;
    let keep = if !s_tie { sr < half } else { rr <= half + tie };
    let fix = |x: C<T>| Complex::new(snapped(x.re), x.im);
    if keep {
        (fix(r), fix(s))
    } else {
        (fix(nr), fix(ns))
    }
}

pub fn classify<T: Real>(rep: &MonodromyRep<T>) -> Result<MonodromyClass<T>> {
    classify_with(&rep.n1, &rep.n2, &ClassifyOptions::default())
}

pub fn classify_with<T: Real>(
    n1: &Mat2<T>,
    n2: &Mat2<T>,
    opts: &ClassifyOptions<T>,
) -> Result<MonodromyClass<T>> {
    let four = Complex::new(T::lit(4.0), T::zero());
    let disc = |m: &Mat2<T>| (m.trace() * m.trace() - m.det() * four).norm();
    let max_disc = disc(n1).max(disc(n2)).max(disc(&(*n1 * *n2)));
    let two_pi = T::lit(2.0) * T::PI();
    let i = Complex::new(T::zero(), T::one());

    if max_disc > opts.disc_tol {
        let (p, _) = eigen_common_basis(n1, n2);
        let cond = p.det().norm();
        if cond < opts.cond_tol {
            return Err(Error::IllConditioned {
                condition: (T::one() / cond).as_f64(),
            });
        }
        let pinv = p.inverse();
        let d1 = pinv * *n1 * p;
        let d2 = pinv * *n2 * p;
        let off = |d: &Mat2<T>, n: &Mat2<T>| {
            d.get(0, 1).norm().max(d.get(1, 0).norm()) / T::one().max(n.norm())
        };
        let worst = off(&d1, n1).max(off(&d2, n2));
        if worst > opts.offdiag_tol {
            return Err(Error::IllConditioned {
                condition: (worst / opts.offdiag_tol).as_f64(),
            });
        }
        let lambda = d1.get(0, 0);
        let mu = d2.get(0, 0);
        let s = i * lambda.ln() / two_pi;
        let r = -i * mu.ln() / two_pi;
        let (r, s) = canonical_rs(r, s);
        return Ok(MonodromyClass::CompletelyReducible { r, s });
    }

    let sign = |m: &Mat2<T>| if m.trace().re >= T::zero() { 1i8 } else { -1i8 };
    let (e1, e2) = (sign(n1), sign(n2));
    let id = Mat2::identity();
    let as_c = |e: i8| Complex::new(T::from_i8(e).unwrap(), T::zero());
    let k1 = n1.scale(as_c(e1)) - id;
    let k2 = n2.scale(as_c(e2)) - id;
    let (z1, z2) = (k1.norm() < opts.scalar_tol, k2.norm() < opts.scalar_tol);
    if z1 && z2 {
        let half_if = |e: i8| if e == 1 { T::zero() } else { T::lit(0.5) };
        let s = Complex::new(half_if(e1), T::zero());
        let r = Complex::new(half_if(e2), T::zero());
        let (r, s) = canonical_rs(r, s);
        return Ok(MonodromyClass::CompletelyReducible { r, s });
    }
    let c = if z1 {
        None
    } else {
        let mut best = (0, 0);
        for a in 0..2 {
            for b in 0..2 {
                if k1.get(a, b).norm() > k1.get(best.0, best.1).norm() {
                    best = (a, b);
                }
            }
        }
        Some(k2.get(best.0, best.1) / k1.get(best.0, best.1))
    };
    Ok(MonodromyClass::NotCompletelyReducible {
        eps1: e1,
        eps2: e2,
        c,
    })
}

/// Real `(r, s)` when the representation is unitary: completely reducible
/// with `|Im r|, |Im s| < tol` and `(r, s) ∉ ½ℤ²`.
pub fn is_unitary<T: Real>(rep: &MonodromyRep<T>, tol: T) -> Option<(T, T)> {
    match classify(rep).ok()? {
        MonodromyClass::CompletelyReducible { r, s } => {
            if r.im.abs() >= tol || s.im.abs() >= tol {
                return None;
            }
            let two = T::lit(2.0);
            let half_int = |x: T| ((two * x) - (two * x).round()).abs() < tol;
            if half_int(r.re) && half_int(s.re) {
                return None;
            }
            Some((r.re, s.re))
        }
        MonodromyClass::NotCompletelyReducible { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(x: f64) -> C<f64> {
        Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * x)
    }

    #[test]
    fn diagonal_pair() {
        let n1 = Mat2::diag(e(-0.2), e(0.2));
        let n2 = Mat2::diag(e(0.3), e(-0.3));
        match classify_with(&n1, &n2, &ClassifyOptions::default()).unwrap() {
            MonodromyClass::CompletelyReducible { r, s } => {
                assert!(
                    (r - 0.3).norm() < 1e-12 && (s - 0.2).norm() < 1e-12,
                    "{r} {s}"
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parabolic_pair() {
        let o = Complex::new(1.0, 0.0);
        let z = Complex::new(0.0, 0.0);
        let c = Complex::new(0.4, -1.3);
        let n1 = Mat2::new(o, z, o, o).scale(-o);
        let n2 = Mat2::new(o, z, c, o);
        assert_eq!(
            classify_with(&n1, &n2, &ClassifyOptions::default()).unwrap(),
            MonodromyClass::NotCompletelyReducible {
                eps1: -1,
                eps2: 1,
                c: Some(c)
            }
        );
        let id = Mat2::identity();
        assert_eq!(
            classify_with(&id, &Mat2::new(o, z, o, o), &ClassifyOptions::default()).unwrap(),
            MonodromyClass::NotCompletelyReducible {
                eps1: 1,
                eps2: 1,
                c: None
            }
        );
    }

    #[test]
    fn unitary_requires_real_data() {
        let n1 = Mat2::diag(e(-0.2), e(0.2));
        let n2 = Mat2::diag(e(0.3), e(-0.3));
        let rep = MonodromyRep::from_matrices(n1, n2);
        let (r, s) = is_unitary(&rep, 1e-8).unwrap();
        assert!((r - 0.3).abs() < 1e-12 && (s - 0.2).abs() < 1e-12);
        let damp = Complex::new((2.0 * std::f64::consts::PI * 0.1).exp(), 0.0);
        let n1c = Mat2::diag(e(-0.2) * damp, e(0.2) / damp);
        assert!(is_unitary(&MonodromyRep::from_matrices(n1c, n2), 1e-8).is_none());
    }

    #[test]
    fn canonical_sign() {
        let (r, s) = canonical_rs(Complex::new(0.7f64, 0.0), Complex::new(0.8, 0.0));
        assert!((r.re - 0.3).abs() < 1e-12 && (s.re - 0.2).abs() < 1e-12);
        let (r, s) = canonical_rs(Complex::new(0.7f64, 0.0), Complex::new(0.5, 0.0));
        assert!((r.re - 0.3).abs() < 1e-12 && (s.re - 0.5).abs() < 1e-12);
    }
}
