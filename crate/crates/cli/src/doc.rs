//! Ordered JSON objects whose reals go through the fixed-precision formatter.

use painleve_torus::output::{complex_json, matrix_json, real_json};
use painleve_torus::{Complex64, Mat2};
use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::value::{to_raw_value, RawValue};

#[derive(Default)]
pub struct Obj(Vec<(&'static str, Box<RawValue>)>);

impl Obj {
    pub fn new() -> Self {
        Obj::default()
    }

    pub fn raw(mut self, key: &'static str, v: Box<RawValue>) -> Self {
        self.0.push((key, v));
        self
    }

    pub fn real(self, key: &'static str, x: f64) -> Self {
        self.raw(key, real_json(x))
    }

    pub fn cx(self, key: &'static str, z: Complex64) -> Self {
        self.raw(key, complex_json(z))
    }

    pub fn mat(self, key: &'static str, m: &Mat2) -> Self {
        self.raw(key, matrix_json(m))
    }

    pub fn val<S: Serialize + ?Sized>(self, key: &'static str, v: &S) -> Self {
        let raw = to_raw_value(v).expect("plain values serialize");
        self.raw(key, raw)
    }

    pub fn finish(&self) -> String {
        serde_json::to_string(self).expect("raw values serialize")
    }
}

impl Serialize for Obj {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut map = ser.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

pub fn reals(xs: &[f64]) -> Box<RawValue> {
    let parts: Vec<String> = xs.iter().map(|x| real_json(*x).get().to_owned()).collect();
    RawValue::from_string(format!("[{}]", parts.join(","))).expect("numbers and nulls")
}
