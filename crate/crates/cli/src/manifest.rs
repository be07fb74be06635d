use clap::ValueEnum;
use cms_core::{Method, RootKind, Tolerances};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything needed to reproduce a run. Written at the head of JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub system: RootKind,
    pub n: usize,
    pub nu: f64,
    pub x0: Vec<f64>,
    pub times: Vec<f64>,
    pub method: Method,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub format: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none", default, with = "betas")]
    pub betas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub paths: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_end: Option<f64>,
}

/// JSON has no infinity, so an infinite β is written as the string `"inf"`.
pub mod betas {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum Beta {
        Finite(f64),
        Named(String),
    }

    impl From<f64> for Beta {
        fn from(v: f64) -> Self {
            if v.is_finite() {
                Beta::Finite(v)
            } else {
                Beta::Named("inf".into())
            }
        }
    }

    pub fn serialize<S: Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|b| b.iter().map(|&x| Beta::from(x)).collect::<Vec<_>>()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
        let raw = Option::<Vec<Beta>>::deserialize(d)?;
        raw.map(|list| {
            list.into_iter()
                .map(|b| match b {
                    Beta::Finite(x) => Ok(x),
                    Beta::Named(s) => s.parse::<f64>().map_err(serde::de::Error::custom),
                })
                .collect()
        })
        .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunManifest {
        RunManifest {
            subcommand: "sde".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            system: RootKind::B,
            n: 3,
            nu: 0.5,
            x0: vec![3.0, 2.0, 0.1],
            times: vec![0.1, 1.0 / 3.0],
            method: Method::EulerMaruyama,
            tolerances: Tolerances { dt: Some(1e-4), ..Default::default() },
            seed: Some(u64::MAX),
            format: OutputFormat::Json,
            betas: Some(vec![10.0, 100.0, f64::INFINITY]),
            paths: Some(10_000),
            t_end: Some(1.0),
        }
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let m = sample();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"inf\""));
        let back: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn optional_fields_are_omitted() {
        let m = RunManifest { seed: None, betas: None, paths: None, t_end: None, ..sample() };
        let text = serde_json::to_string(&m).unwrap();
        assert!(!text.contains("betas") && !text.contains("seed"));
        assert_eq!(serde_json::from_str::<RunManifest>(&text).unwrap(), m);
    }
}
