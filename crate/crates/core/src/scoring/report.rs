use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

/// Recall, precision and F1. Serialized as `{"r", "p", "f1"}` with four
/// decimals.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ScoreTriple {
    #[serde(rename = "r")]
    pub recall: f64,
    #[serde(rename = "p")]
    pub precision: f64,
    pub f1: f64,
}

impl ScoreTriple {
    pub fn from_rp(recall: f64, precision: f64) -> Self {
        let f1 = if recall + precision > 0.0 { 2.0 * recall * precision / (recall + precision) } else { 0.0 };
        ScoreTriple { recall, precision, f1 }
    }
}

fn fixed4<E: serde::ser::Error>(x: f64) -> Result<Box<RawValue>, E> {
    RawValue::from_string(format!("{x:.4}")).map_err(E::custom)
}

impl Serialize for ScoreTriple {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = fixed4::<S::Error>(self.recall)?;
        let p = fixed4::<S::Error>(self.precision)?;
        let f = fixed4::<S::Error>(self.f1)?;
        let mut st = s.serialize_struct("ScoreTriple", 3)?;
        st.serialize_field("r", &r)?;
        st.serialize_field("p", &p)?;
        st.serialize_field("f1", &f)?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ScoreReport {
    pub muc: ScoreTriple,
    pub b_cubed: ScoreTriple,
    pub ceaf_phi4: ScoreTriple,
    pub conll_avg_f1: f64,
    pub azp: ScoreTriple,
}

impl Serialize for ScoreReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let avg = fixed4::<S::Error>(self.conll_avg_f1)?;
        let mut st = s.serialize_struct("ScoreReport", 5)?;
        st.serialize_field("muc", &self.muc)?;
        st.serialize_field("b_cubed", &self.b_cubed)?;
        st.serialize_field("ceaf_phi4", &self.ceaf_phi4)?;
        st.serialize_field("conll_avg_f1", &avg)?;
        st.serialize_field("azp", &self.azp)?;
        st.end()
    }
}
