//! Independent reference implementations and samplers shared by the
//! integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as Cx;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(cot x, 1/sin² x)` without overflow for large `|Im x|`.
fn cot_csc2(x: Cx) -> (Cx, Cx) {
    if x.im < 0.0 {
        let (c, s) = cot_csc2(-x);
        return (-c, s);
    }
    let e = (Cx::i() * x * 2.0).exp();
    let d = e - 1.0;
    (Cx::i() * (e + 1.0) / d, -e * 4.0 / (d * d))
}

/// `℘` and `ζ` summed row by row over `m + nτ`, each row in closed form.
pub fn lattice_wp_zeta(tau: Cx, z: Cx, rows: i32) -> (Cx, Cx) {
    let pi2 = PI * PI;
    let (c0, s0) = cot_csc2(z * PI);
    let mut wp = s0 * pi2 - pi2 / 3.0;
    let mut zeta = c0 * PI + z * (pi2 / 3.0);
    for n in (-rows..=rows).filter(|n| *n != 0) {
        let w = tau * f64::from(n);
        let (cz, sz) = cot_csc2((z - w) * PI);
        let (cw, sw) = cot_csc2(w * PI);
        wp += (sz - sw) * pi2;
        zeta += cz * PI + cw * PI + z * sw * pi2;
    }
    (wp, zeta)
}

/// Plain square partial sum of `℘`; slowly convergent, for loose checks only.
pub fn brute_wp(tau: Cx, z: Cx, radius: i32) -> Cx {
    let mut acc = Cx::new(1.0, 0.0) / (z * z);
    for m in -radius..=radius {
        for n in -radius..=radius {
            if m == 0 && n == 0 {
                continue;
            }
            let w = tau * f64::from(n) + f64::from(m);
            acc += Cx::new(1.0, 0.0) / ((z - w) * (z - w)) - Cx::new(1.0, 0.0) / (w * w);
        }
    }
    acc
}

/// `|θ₁(πz)|` up to a constant factor, from the Jacobi triple product.
fn theta1_abs(tau: Cx, z: Cx) -> f64 {
    let q = (Cx::i() * PI * tau).exp();
    let e = (Cx::i() * 2.0 * PI * z).exp();
    let mut prod = (z * PI).sin();
    let mut q2n = Cx::new(1.0, 0.0);
    for _ in 0..200 {
        q2n *= q * q;
        prod *= (Cx::new(1.0, 0.0) - q2n * e) * (Cx::new(1.0, 0.0) - q2n / e);
        if q2n.norm() < 1e-18 {
            break;
        }
    }
    prod.norm()
}

/// Green function of the torus up to an additive constant.
pub fn green_potential(tau: Cx, z: Cx) -> f64 {
    -theta1_abs(tau, z).ln() / (2.0 * PI) + z.im * z.im / (2.0 * tau.im)
}

/// `−4π ∂G/∂z = −2π(G_x − iG_y)` by fourth-order central differences.
pub fn green_grad_fd(tau: Cx, z: Cx, h: f64) -> Cx {
    let d = |dir: Cx| {
        let g = |k: f64| green_potential(tau, z + dir * (k * h));
        (-g(2.0) + 8.0 * g(1.0) - 8.0 * g(-1.0) + g(-2.0)) / (12.0 * h)
    };
    let gx = d(Cx::new(1.0, 0.0));
    let gy = d(Cx::new(0.0, 1.0));
    Cx::new(gx, -gy) * (-2.0 * PI)
}

/// `τ` uniformly in the truncated modular domain
/// `|Re τ| ≤ ½, |τ| ≥ 1, Im τ ≤ 1.6`.
pub fn random_tau(rng: &mut impl Rng) -> Cx {
    loop {
        let t = Cx::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.85..1.6));
        if t.norm() >= 1.0 {
            return t;
        }
    }
}

/// Point of the centred cell at least `margin` from every lattice point.
pub fn random_z(rng: &mut impl Rng, tau: Cx, margin: f64) -> Cx {
    loop {
        let z = tau * rng.gen_range(-0.5..0.5) + rng.gen_range(-0.5..0.5);
        let near = (-1..=1)
            .flat_map(|m| (-1..=1).map(move |n| (m, n)))
            .map(|(m, n)| (z - tau * f64::from(n) - f64::from(m)).norm())
            .fold(f64::INFINITY, f64::min);
        if near >= margin {
            return z;
        }
    }
}

/// Real `(r, s)` whose point `r + sτ` keeps `margin` from the half-lattice.
pub fn random_rs(rng: &mut impl Rng, margin: f64) -> (f64, f64) {
    loop {
        let (r, s): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let off = |x: f64| {
            let y = (2.0 * x).fract();
            y.min(1.0 - y) / 2.0
        };
        if off(r) >= margin || off(s) >= margin {
            return (r, s);
        }
    }
}
