//! Number formatting and JSON helpers shared by the serializers.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dual::C64;

/// Significant digits used for every number the crate writes out.
pub const SIG_DIGITS: usize = 12;

/// Rounds to [`SIG_DIGITS`] significant digits. Non-finite values pass through.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// A complex number on the wire: a bare number when the imaginary part is
/// zero, otherwise a `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WireComplex(pub C64);

impl Serialize for WireComplex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let re = round_sig(self.0.re);
        let im = round_sig(self.0.im);
        if im == 0.0 {
            re.serialize(s)
        } else {
            [re, im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for WireComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Real(f64),
            Pair(Vec<f64>),
        }
        match Raw::deserialize(d)? {
            Raw::Real(x) => Ok(WireComplex(C64::new(x, 0.0))),
            Raw::Pair(v) if v.len() == 2 => Ok(WireComplex(C64::new(v[0], v[1]))),
            Raw::Pair(v) => Err(D::Error::custom(format!(
                "complex entries are a number or [re, im]; got {} components",
                v.len()
            ))),
        }
    }
}

pub(crate) fn to_wire(v: impl IntoIterator<Item = C64>) -> Vec<WireComplex> {
    v.into_iter().map(WireComplex).collect()
}
