//! User-facing test options shared by `check` flags and batch entries.

use std::fmt;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};
use sitest_core::bandwidth::GridBounds;
use sitest_core::{BandwidthChoice, GridConfig, TestKind, TestSpec, WeightSpec};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestName {
    #[default]
    Score,
    Maximin,
    Omnibus,
}

/// `auto` or a fixed bandwidth in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(into = "String")]
pub enum HArg {
    #[default]
    Auto,
    Fixed(f64),
}

impl fmt::Display for HArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HArg::Auto => f.write_str("auto"),
            HArg::Fixed(h) => write!(f, "{h}"),
        }
    }
}

impl From<HArg> for String {
    fn from(h: HArg) -> Self {
        h.to_string()
    }
}

impl FromStr for HArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(HArg::Auto);
        }
        s.parse::<f64>()
            .map(HArg::Fixed)
            .map_err(|_| format!("expected `auto` or a number, got `{s}`"))
    }
}

impl<'de> Deserialize<'de> for HArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(h) => Ok(HArg::Fixed(h)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        One(String),
        Many(Vec<String>),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::One(s) => vec![s],
        Raw::Many(v) => v,
    })
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestOptions {
    /// Which test to run.
    #[arg(long, value_enum, default_value_t = TestName::Score)]
    pub test: TestName,

    /// Weight function(s): sumabs, sumsq, pairs, absprod:A:B, cf, cos, sin
    /// (or cf:G1,G2 etc.). Repeat, or separate with commas, for maximin.
    #[arg(long = "weight", value_name = "W")]
    #[serde(deserialize_with = "one_or_many")]
    pub weight: Vec<String>,

    /// Frequency vector for cf/cos/sin weights given without one, e.g. 1,0.5.
    #[arg(long)]
    pub gamma: Option<String>,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// `auto` runs the bandwidth selector; a number fixes h.
    #[arg(long, default_value_t = HArg::Auto)]
    pub h: HArg,

    /// Bandwidth search grid: [lower, upper]·n^(-1/5), log-spaced.
    #[arg(long, default_value_t = 0.5)]
    pub h_grid_lower: f64,
    #[arg(long, default_value_t = 3.0)]
    pub h_grid_upper: f64,
    #[arg(long, default_value_t = 30)]
    pub h_grid_points: usize,

    /// Omnibus frequency grid: each coordinate in [-B, B].
    #[arg(long, default_value_t = 3.0)]
    pub grid_bound: f64,
    #[arg(long, default_value_t = 7)]
    pub grid_per_axis: usize,

    /// Bootstrap replicates for the omnibus test.
    #[arg(long, default_value_t = 500)]
    pub boot_m: usize,

    /// Bootstrap seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Weight in the bandwidth criterion of the omnibus test.
    #[arg(long, default_value = "sumsq")]
    pub mise_weight: String,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            test: TestName::Score,
            weight: Vec::new(),
            gamma: None,
            alpha: 0.05,
            h: HArg::Auto,
            h_grid_lower: 0.5,
            h_grid_upper: 3.0,
            h_grid_points: 30,
            grid_bound: 3.0,
            grid_per_axis: 7,
            boot_m: 500,
            seed: 0,
            mise_weight: "sumsq".into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum OptionsError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] sitest_core::Error),
}

impl TestOptions {
    pub fn to_spec(&self) -> Result<TestSpec, OptionsError> {
        let weights = self.weights()?;
        let kind = match self.test {
            TestName::Score => match weights.as_slice() {
                [] => TestKind::Score {
                    weight: WeightSpec::SumAbs,
                },
                [w] => TestKind::Score { weight: w.clone() },
                _ => {
                    return Err(OptionsError::Invalid(
                        "the score test takes one weight; use --test maximin for several".into(),
                    ))
                }
            },
            TestName::Maximin if weights.is_empty() => TestKind::Maximin {
                weights: vec![WeightSpec::SumAbs, WeightSpec::SumSquares],
            },
            TestName::Maximin => TestKind::Maximin { weights },
            TestName::Omnibus => {
                if !weights.is_empty() {
                    return Err(OptionsError::Invalid(
                        "the omnibus test builds its own weights; drop --weight".into(),
                    ));
                }
                TestKind::Omnibus {
                    grid: GridConfig {
                        bound: self.grid_bound,
                        per_axis: self.grid_per_axis,
                    },
                    m: self.boot_m,
                    seed: self.seed,
                    mise_weight: self.parse_weight(&self.mise_weight)?,
                }
            }
        };
        let bandwidth = match self.h {
            HArg::Auto => BandwidthChoice::Auto(GridBounds {
                lower: self.h_grid_lower,
                upper: self.h_grid_upper,
                points: self.h_grid_points,
            }),
            HArg::Fixed(h) => BandwidthChoice::Fixed(h),
        };
        let spec = TestSpec::new(kind, self.alpha).with_bandwidth(bandwidth);
        spec.validate()?;
        if let BandwidthChoice::Auto(bounds) = spec.bandwidth {
            bounds.grid(1)?;
        }
        Ok(spec)
    }

    fn weights(&self) -> Result<Vec<WeightSpec>, OptionsError> {
        self.weight
            .iter()
            .flat_map(|w| -> Vec<&str> {
                // commas inside `cf:1,2` belong to the frequency vector
                if w.contains(':') {
                    vec![w.as_str()]
                } else {
                    w.split(',').collect()
                }
            })
            .map(|w| self.parse_weight(w))
            .collect()
    }

    fn parse_weight(&self, w: &str) -> Result<WeightSpec, OptionsError> {
        let w = w.trim();
        if matches!(w, "cf" | "cos" | "sin") {
            let gamma = self
                .gamma
                .as_deref()
                .ok_or_else(|| OptionsError::Invalid(format!("weight `{w}` needs --gamma")))?;
            return Ok(format!("{w}:{gamma}").parse()?);
        }
        Ok(w.parse()?)
    }
}
