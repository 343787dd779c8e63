//! Fixed-precision CSV and JSON writers.
//!
//! Every real is written with 17 significant digits in scientific notation,
//! so identical values always print identically and round-trip exactly.
//! Non-finite values become `null` in JSON and `nan` in CSV.

use std::io::Write;

use serde::Serialize;
use serde_json::value::RawValue;
use thiserror::Error;

use crate::hitchin::{CellState, RegionSample};
use crate::mat2::Mat2;
use crate::scalar::{Real, C};
use crate::synth::SolutionField;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type OutputResult<T> = std::result::Result<T, OutputError>;

/// `x` with 17 significant digits, or `nan`/`inf`/`-inf`.
pub fn fmt_real<T: Real>(x: T) -> String {
    let v = x.as_f64();
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn raw(s: String) -> Box<RawValue> {
    RawValue::from_string(s).expect("formatter emits valid JSON")
}

pub fn real_json<T: Real>(x: T) -> Box<RawValue> {
    if x.is_finite() {
        raw(fmt_real(x))
    } else {
        raw("null".into())
    }
}

/// `[re, im]`.
pub fn complex_json<T: Real>(z: C<T>) -> Box<RawValue> {
    raw(format!(
        "[{},{}]",
        real_json(z.re).get(),
        real_json(z.im).get()
    ))
}

/// Row-major `[[[re, im], [re, im]], [[re, im], [re, im]]]`.
pub fn matrix_json<T: Real>(m: &Mat2<T>) -> Box<RawValue> {
    let row = |i: usize| {
        format!(
            "[{},{}]",
            complex_json(m.get(i, 0)).get(),
            complex_json(m.get(i, 1)).get()
        )
    };
    raw(format!("[{},{}]", row(0), row(1)))
}

#[derive(Serialize)]
struct RegionCellJson {
    r_cell: Box<RawValue>,
    s_cell: Box<RawValue>,
    excluded: bool,
    member: bool,
    witness_r: Option<Box<RawValue>>,
    witness_s: Option<Box<RawValue>>,
    residual: Option<Box<RawValue>>,
}

#[derive(Serialize)]
struct RegionJson {
    tau: Box<RawValue>,
    index: [u32; 4],
    resolution: usize,
    exclusion_radius: Box<RawValue>,
    member_count: usize,
    cells: Vec<RegionCellJson>,
}

fn cell_fields<T: Real>(state: &CellState<T>) -> (bool, bool, Option<[T; 3]>) {
    match state {
        CellState::Excluded => (true, false, None),
        CellState::NonMember => (false, false, None),
        CellState::Member(w) => (
            false,
            true,
            Some([w.params.r.re, w.params.s.re, w.residual]),
        ),
    }
}

/// Columns `r_cell, s_cell, member, witness_r, witness_s, residual, excluded`;
/// witness fields are empty for non-members.
pub fn write_region_csv<T: Real, W: Write>(sample: &RegionSample<T>, out: W) -> OutputResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "r_cell",
        "s_cell",
        "member",
        "witness_r",
        "witness_s",
        "residual",
        "excluded",
    ])?;
    for cell in &sample.cells {
        let (excluded, member, wit) = cell_fields(&cell.state);
        let [wr, ws, res] = match wit {
            Some(v) => v.map(fmt_real),
            None => [String::new(), String::new(), String::new()],
        };
        w.write_record([
            fmt_real(cell.r),
            fmt_real(cell.s),
            u8::from(member).to_string(),
            wr,
            ws,
            res,
            u8::from(excluded).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn region_json<T: Real>(sample: &RegionSample<T>) -> OutputResult<String> {
    let cells = sample
        .cells
        .iter()
        .map(|cell| {
            let (excluded, member, wit) = cell_fields(&cell.state);
            RegionCellJson {
                r_cell: real_json(cell.r),
                s_cell: real_json(cell.s),
                excluded,
                member,
                witness_r: wit.map(|v| real_json(v[0])),
                witness_s: wit.map(|v| real_json(v[1])),
                residual: wit.map(|v| real_json(v[2])),
            }
        })
        .collect();
    let doc = RegionJson {
        tau: complex_json(sample.tau.value()),
        index: sample.index.n,
        resolution: sample.resolution,
        exclusion_radius: real_json(sample.exclusion_radius),
        member_count: sample.member_count(),
        cells,
    };
    Ok(serde_json::to_string(&doc)?)
}

/// Columns `x, y, u, masked`; `u` is `nan` on masked nodes.
pub fn write_field_csv<T: Real, W: Write>(field: &SolutionField<T>, out: W) -> OutputResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "u", "masked"])?;
    let n = field.resolution;
    for j in 0..n {
        for i in 0..n {
            let z = field.point(i, j);
            let k = field.idx(i, j);
            w.write_record([
                fmt_real(z.re),
                fmt_real(z.im),
                fmt_real(field.u[k]),
                u8::from(field.mask[k]).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct FieldHeaderJson {
    tau: Box<RawValue>,
    p: Box<RawValue>,
    a: Box<RawValue>,
    beta: Box<RawValue>,
    resolution: usize,
    mask_radius: Box<RawValue>,
    masked: usize,
    residual_max: Box<RawValue>,
    residual_mean: Box<RawValue>,
}

/// Grid metadata and a summary of `|Δ_h u + eᵘ|`.
pub fn field_header_json<T: Real>(field: &SolutionField<T>) -> OutputResult<String> {
    let res: Vec<T> = field.residual_grid().into_iter().flatten().collect();
    let max = res.iter().copied().fold(T::zero(), T::max);
    let mean = if res.is_empty() {
        T::nan()
    } else {
        res.iter().fold(T::zero(), |a, b| a + *b) / T::from_usize(res.len()).unwrap()
    };
    let doc = FieldHeaderJson {
        tau: complex_json(field.tau.value()),
        p: complex_json(field.p),
        a: complex_json(field.a),
        beta: real_json(field.beta),
        resolution: field.resolution,
        mask_radius: real_json(field.mask_radius),
        masked: field.mask.iter().filter(|m| **m).count(),
        residual_max: real_json(max),
        residual_mean: real_json(mean),
    };
    Ok(serde_json::to_string(&doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1f64, -1.0 / 3.0, 6.02214076e23, 5e-324, 1.0] {
            let s = fmt_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(fmt_real(f64::NAN), "nan");
        assert_eq!(real_json(f64::INFINITY).get(), "null");
    }

    #[test]
    fn matrix_layout() {
        let m = Mat2::new(
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 2.0),
            Complex::new(3.0, 0.0),
            Complex::new(0.0, -4.0),
        );
        let v: serde_json::Value = serde_json::from_str(matrix_json(&m).get()).unwrap();
        assert_eq!(v[0][1][1].as_f64(), Some(2.0));
        assert_eq!(v[1][0][0].as_f64(), Some(3.0));
        assert_eq!(v[1][1][1].as_f64(), Some(-4.0));
    }
}
