//! Adaptive Dormand–Prince 5(4) integration of complex first-order systems
//! `y' = f(t, y)` over a real parameter `t`.

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T: Real> {
    pub rtol: T,
    pub atol: T,
    /// Initial step; `None` picks `|t1 − t0| / 64`.
    pub h_init: Option<T>,
    pub h_min: T,
    pub h_max: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        OdeOptions {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-12),
            h_init: None,
            h_min: T::lit(1e-14),
            h_max: None,
            max_steps: 200_000,
        }
    }
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tolerances(rtol: T, atol: T) -> Self {
        OdeOptions {
            rtol,
            atol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl std::ops::AddAssign for OdeStats {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

// Dormand & Prince (1980) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin<T: Real, const N: usize>(y: &[C<T>; N], h: T, terms: &[(f64, &[C<T>; N])]) -> [C<T>; N] {
    let mut out = *y;
    for (coef, k) in terms {
        let w = h * T::lit(*coef);
        for i in 0..N {
            out[i] += k[i] * w;
        }
    }
    out
}

/// Integrates from `t0` to `t1` (either direction) and returns the final state.
pub fn integrate<T, const N: usize, F>(
    mut f: F,
    t0: T,
    t1: T,
    y0: [C<T>; N],
    opts: &OdeOptions<T>,
) -> Result<([C<T>; N], OdeStats)>
where
    T: Real,
    F: FnMut(T, &[C<T>; N]) -> Result<[C<T>; N]>,
{
    let mut stats = OdeStats::default();
    let span = t1 - t0;
    if span == T::zero() {
        return Ok((y0, stats));
    }
    let dir = span.signum();
    let mut h = opts
        .h_init
        .unwrap_or(span.abs() / T::lit(64.0))
        .abs()
        .min(span.abs());
    if let Some(hm) = opts.h_max {
        h = h.min(hm);
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    stats.evaluations += 1;
    let fifth = T::lit(0.2);

    while (t1 - t) * dir > T::zero() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepFailure(format!(
                "step budget {} exhausted at t = {}",
                opts.max_steps,
                t.as_f64()
            )));
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        let hs = if last { remaining } else { h } * dir;

        let k2 = f(t + hs * T::lit(C2), &lin(&y, hs, &[(A21, &k1)]))?;
        let k3 = f(t + hs * T::lit(C3), &lin(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(
            t + hs * T::lit(C4),
            &lin(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        )?;
        let k5 = f(
            t + hs * T::lit(C5),
            &lin(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = f(
            t + hs,
            &lin(
                &y,
                hs,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        )?;
        let y_new = lin(
            &y,
            hs,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = f(t + hs, &y_new)?;
        stats.evaluations += 6;

        let mut err_sq = T::zero();
        for i in 0..N {
            let e = (k1[i] * T::lit(E1)
                + k3[i] * T::lit(E3)
                + k4[i] * T::lit(E4)
                + k5[i] * T::lit(E5)
                + k6[i] * T::lit(E6)
                + k7[i] * T::lit(E7))
                * hs;
            let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            let q = e.norm() / sc;
            err_sq += q * q;
        }
        let err = (err_sq / T::from_usize(N).unwrap()).sqrt();
        if !err.is_finite() {
            stats.rejected += 1;
            h = h * T::lit(0.25);
            if h < opts.h_min {
                return Err(Error::StepFailure("non-finite error estimate".into()));
            }
            continue;
        }

        let factor = if err == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(-fifth))
                .min(T::lit(5.0))
                .max(T::lit(0.2))
        };
        if err <= T::one() {
            t = if last { t1 } else { t + hs };
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            if !last {
                h = h * factor;
            }
        } else {
            stats.rejected += 1;
            h = h * factor.min(T::one());
        }
        if let Some(hm) = opts.h_max {
            h = h.min(hm);
        }
        if h < opts.h_min {
            return Err(Error::StepFailure(format!(
                "step size underflow at t = {}",
                t.as_f64()
            )));
        }
    }
    Ok((y, stats))
}
