use serde::{Deserialize, Serialize};

use super::{AngularBp, MultiIndexGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorEntry {
    pub alpha: Vec<usize>,
    pub w: f64,
}

/// Wire form `{"d", "k", "vertex_mass", "interior": [{"alpha", "w"}]}`.
/// Interior entries not listed are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularBpJson {
    pub d: usize,
    pub k: usize,
    pub vertex_mass: Vec<f64>,
    pub interior: Vec<InteriorEntry>,
}

impl From<&AngularBp<f64>> for AngularBpJson {
    fn from(m: &AngularBp<f64>) -> Self {
        Self {
            d: m.d(),
            k: m.k(),
            vertex_mass: m.vertex_mass().to_vec(),
            interior: m
                .grid()
                .indices()
                .iter()
                .zip(m.interior())
                .map(|(alpha, &w)| InteriorEntry { alpha: alpha.clone(), w })
                .collect(),
        }
    }
}

impl TryFrom<AngularBpJson> for AngularBp<f64> {
    type Error = Error;

    fn try_from(j: AngularBpJson) -> Result<Self> {
        let grid = MultiIndexGrid::shared(j.d, j.k)?;
        let mut interior = vec![0.0; grid.len()];
        let mut seen = vec![false; grid.len()];
        for e in &j.interior {
            let pos = grid.position(&e.alpha).ok_or_else(|| {
                Error::Structure(format!("alpha {:?} is not a multi-index of d={}, k={}", e.alpha, j.d, j.k))
            })?;
            if std::mem::replace(&mut seen[pos], true) {
                return Err(Error::Structure(format!("alpha {:?} listed twice", e.alpha)));
            }
            if !e.w.is_finite() {
                return Err(Error::Structure(format!("non-finite weight for alpha {:?}", e.alpha)));
            }
            interior[pos] = e.w;
        }
        AngularBp::new(j.d, j.k, j.vertex_mass, interior)
    }
}

impl Serialize for AngularBp<f64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AngularBpJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for AngularBp<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = AngularBpJson::deserialize(d)?;
        AngularBp::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_bit_stable() {
        let m = AngularBp::from_interior(3, 5, vec![0.1, 1.0 / 3.0, 0.05, 0.07, 0.0123456789012345, 0.02]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: AngularBp<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn json_layout() {
        let m = AngularBp::new(2, 2, vec![0.0, 0.0], vec![1.0]).unwrap();
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            r#"{"d":2,"k":2,"vertex_mass":[0.0,0.0],"interior":[{"alpha":[1,1],"w":1.0}]}"#
        );
    }

    #[test]
    fn json_rejects_unknown_alpha() {
        let s = r#"{"d":2,"k":3,"vertex_mass":[0.5,0.5],"interior":[{"alpha":[0,3],"w":0.0}]}"#;
        assert!(serde_json::from_str::<AngularBp<f64>>(s).is_err());
    }
}
