//! Serde adapter for log-domain weights that may be `-inf`.
//!
//! JSON has no infinities, so `-inf` is written as the string `"-inf"`.

use serde::{Deserialize, Deserializer, Serializer};

pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    if *value == f64::NEG_INFINITY {
        serializer.serialize_str("-inf")
    } else {
        serializer.serialize_f64(*value)
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }
    match Repr::deserialize(deserializer)? {
        Repr::Num(v) => Ok(v),
        Repr::Str(s) => parse_log_weight(&s).map_err(serde::de::Error::custom),
    }
}

/// Parses a float, accepting `-inf`/`-infinity` spellings.
pub fn parse_log_weight(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|e| format!("invalid log weight {s:?}: {e}")),
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct W(#[serde(with = "super")] f64);

    #[test]
    fn neg_inf_survives_json() {
        let s = serde_json::to_string(&W(f64::NEG_INFINITY)).unwrap();
        assert_eq!(s, "\"-inf\"");
        assert_eq!(serde_json::from_str::<W>(&s).unwrap(), W(f64::NEG_INFINITY));
        assert_eq!(serde_json::from_str::<W>("-0.5").unwrap(), W(-0.5));
    }
}
