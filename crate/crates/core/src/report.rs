use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bijection::Bijection;
use crate::Rational;

/// Which computation produced a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Oracle,
    CertifierDense,
    CertifierSparse,
    CertifierFallback,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Oracle => "oracle",
            Provenance::CertifierDense => "certifier-dense",
            Provenance::CertifierSparse => "certifier-sparse",
            Provenance::CertifierFallback => "certifier-fallback",
        }
    }
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    Bijection(Bijection),
    Subset { members: Vec<usize> },
}

/// Result of a discrepancy computation together with the object that attains it.
///
/// `witness_count` is the overlap `e(G_π ∩ H)` for a bijection witness or the
/// induced edge count `e(S)` for a subset witness; the reported deviation can
/// be recomputed from it and `baseline`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscrepancyReport {
    pub value: Rational,
    pub plus_value: Rational,
    pub minus_value: Rational,
    pub witness: Witness,
    pub witness_count: u64,
    pub baseline: Rational,
    pub provenance: Provenance,
    /// Sizes recorded by each pipeline stage (empty for oracle reports).
    pub stages: BTreeMap<String, i64>,
    pub notes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    value_num: i128,
    value_den: i128,
    plus_num: i128,
    plus_den: i128,
    minus_num: i128,
    minus_den: i128,
    witness: Witness,
    witness_count: u64,
    baseline_num: i128,
    baseline_den: i128,
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    stages: BTreeMap<String, i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

impl Serialize for DiscrepancyReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ReportJson {
            value_num: *self.value.numer(),
            value_den: *self.value.denom(),
            plus_num: *self.plus_value.numer(),
            plus_den: *self.plus_value.denom(),
            minus_num: *self.minus_value.numer(),
            minus_den: *self.minus_value.denom(),
            witness: self.witness.clone(),
            witness_count: self.witness_count,
            baseline_num: *self.baseline.numer(),
            baseline_den: *self.baseline.denom(),
            provenance: self.provenance,
            stages: self.stages.clone(),
            notes: self.notes.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscrepancyReport {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = ReportJson::deserialize(d)?;
        let ratio = |num: i128, den: i128| {
            if den == 0 {
                Err(serde::de::Error::custom("zero denominator"))
            } else {
                Ok(Rational::new(num, den))
            }
        };
        Ok(Self {
            value: ratio(j.value_num, j.value_den)?,
            plus_value: ratio(j.plus_num, j.plus_den)?,
            minus_value: ratio(j.minus_num, j.minus_den)?,
            witness: j.witness,
            witness_count: j.witness_count,
            baseline: ratio(j.baseline_num, j.baseline_den)?,
            provenance: j.provenance,
            stages: j.stages,
            notes: j.notes,
        })
    }
}

impl DiscrepancyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn bijection(&self) -> Option<&Bijection> {
        match &self.witness {
            Witness::Bijection(b) => Some(b),
            Witness::Subset { .. } => None,
        }
    }

    pub fn value_f64(&self) -> f64 {
        to_f64(self.value)
    }
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_has_flat_rational_fields() {
        let r = DiscrepancyReport {
            value: Rational::new(2, 3),
            plus_value: Rational::new(1, 3),
            minus_value: Rational::new(2, 3),
            witness: Witness::Bijection(Bijection::identity(3)),
            witness_count: 0,
            baseline: Rational::new(2, 3),
            provenance: Provenance::Oracle,
            stages: BTreeMap::new(),
            notes: vec![],
        };
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in [
            "value_num",
            "value_den",
            "plus_num",
            "plus_den",
            "minus_num",
            "minus_den",
            "witness",
            "baseline_num",
            "baseline_den",
            "provenance",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["value_num"], 2);
        assert_eq!(v["value_den"], 3);
        assert_eq!(v["provenance"], "oracle");
        assert_eq!(v["witness"]["kind"], "bijection");
        let back: DiscrepancyReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
