//! Weight functions `W(x)` used by the score tests.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `Σ_l |x_l|`
    SumAbs,
    /// `Σ_l x_l²`
    SumSquares,
    /// `|x_a x_b|` (zero-based coordinates).
    AbsProduct { a: usize, b: usize },
    /// `Σ_{a<b} |x_a x_b|`
    SumAbsProducts,
    /// `exp(i γᵀx)`; complex valued.
    CharFn { gamma: Vec<f64> },
    /// `cos(γᵀx)`, the real part of [`WeightSpec::CharFn`].
    Cosine { gamma: Vec<f64> },
    /// `sin(γᵀx)`, the imaginary part of [`WeightSpec::CharFn`].
    Sine { gamma: Vec<f64> },
    /// Values supplied per observation.
    Pointwise { values: Vec<f64> },
    /// `Σ_k coef_k W_k(x)`
    LinearCombo { terms: Vec<(f64, WeightSpec)> },
}

impl WeightSpec {
    pub fn is_complex(&self) -> bool {
        match self {
            WeightSpec::CharFn { .. } => true,
            WeightSpec::LinearCombo { terms } => terms.iter().any(|(_, w)| w.is_complex()),
            _ => false,
        }
    }

    /// Splits a complex weight into its real and imaginary parts; real
    /// weights are returned unchanged.
    pub fn real_components(&self) -> Vec<WeightSpec> {
        match self {
            WeightSpec::CharFn { gamma } => vec![
                WeightSpec::Cosine {
                    gamma: gamma.clone(),
                },
                WeightSpec::Sine {
                    gamma: gamma.clone(),
                },
            ],
            other => vec![other.clone()],
        }
    }

    /// `W(X_i)` for every observation.
    pub fn evaluate(&self, data: &Dataset) -> Result<Vec<f64>> {
        let n = data.n();
        let p = data.p();
        let values: Vec<f64> = match self {
            WeightSpec::SumAbs => data
                .rows()
                .map(|r| r.iter().map(|v| v.abs()).sum())
                .collect(),
            WeightSpec::SumSquares => data.rows().map(|r| r.iter().map(|v| v * v).sum()).collect(),
            WeightSpec::AbsProduct { a, b } => {
                if *a >= p || *b >= p {
                    return Err(Error::InvalidConfig(format!(
                        "abs_product coordinates ({a}, {b}) out of range for p = {p}"
                    )));
                }
                data.rows().map(|r| (r[*a] * r[*b]).abs()).collect()
            }
            WeightSpec::SumAbsProducts => data
                .rows()
                .map(|r| {
                    let mut s = 0.0;
                    for a in 0..p {
                        for b in a + 1..p {
                            s += (r[a] * r[b]).abs();
                        }
                    }
                    s
                })
                .collect(),
            WeightSpec::CharFn { .. } => return Err(Error::ComplexWeight(self.to_string())),
            WeightSpec::Cosine { gamma } => {
                check_gamma(gamma, p)?;
                data.rows().map(|r| libm::cos(dot(gamma, r))).collect()
            }
            WeightSpec::Sine { gamma } => {
                check_gamma(gamma, p)?;
                data.rows().map(|r| libm::sin(dot(gamma, r))).collect()
            }
            WeightSpec::Pointwise { values } => {
                if values.len() != n {
                    return Err(Error::LengthMismatch {
                        what: "pointwise weights",
                        expected: n,
                        actual: values.len(),
                    });
                }
                values.clone()
            }
            WeightSpec::LinearCombo { terms } => {
                let mut out = vec![0.0; n];
                for (coef, w) in terms {
                    for (o, v) in out.iter_mut().zip(w.evaluate(data)?) {
                        *o += coef * v;
                    }
                }
                out
            }
        };
        if let Some(&v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "weight values",
                value: v,
            });
        }
        Ok(values)
    }

    /// Complex evaluation; real weights get a zero imaginary part.
    pub fn evaluate_complex(&self, data: &Dataset) -> Result<Vec<Complex64>> {
        match self {
            WeightSpec::CharFn { gamma } => {
                check_gamma(gamma, data.p())?;
                Ok(data.rows().map(|r| Complex64::cis(dot(gamma, r))).collect())
            }
            WeightSpec::LinearCombo { terms } => {
                let mut out = vec![Complex64::new(0.0, 0.0); data.n()];
                for (coef, w) in terms {
                    for (o, v) in out.iter_mut().zip(w.evaluate_complex(data)?) {
                        *o += v * *coef;
                    }
                }
                Ok(out)
            }
            other => Ok(other
                .evaluate(data)?
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect()),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_gamma(gamma: &[f64], p: usize) -> Result<()> {
    if gamma.len() != p {
        return Err(Error::LengthMismatch {
            what: "gamma",
            expected: p,
            actual: gamma.len(),
        });
    }
    Ok(())
}

fn fmt_vec(f: &mut fmt::Formatter<'_>, v: &[f64]) -> fmt::Result {
    for (k, g) in v.iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        write!(f, "{g}")?;
    }
    Ok(())
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::SumAbs => f.write_str("sumabs"),
            WeightSpec::SumSquares => f.write_str("sumsq"),
            WeightSpec::AbsProduct { a, b } => write!(f, "absprod:{}:{}", a + 1, b + 1),
            WeightSpec::SumAbsProducts => f.write_str("pairs"),
            WeightSpec::CharFn { gamma } => {
                f.write_str("cf:")?;
                fmt_vec(f, gamma)
            }
            WeightSpec::Cosine { gamma } => {
                f.write_str("cos:")?;
                fmt_vec(f, gamma)
            }
            WeightSpec::Sine { gamma } => {
                f.write_str("sin:")?;
                fmt_vec(f, gamma)
            }
            WeightSpec::Pointwise { .. } => f.write_str("pointwise"),
            WeightSpec::LinearCombo { terms } => {
                f.write_str("combo(")?;
                for (k, (c, w)) in terms.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{c}*{w}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parses the names produced by `Display`: `sumabs`, `sumsq`, `pairs`,
/// `absprod:A:B` (one-based), `cf:g1,g2,...`, `cos:...`, `sin:...`.
impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidConfig(format!("unrecognized weight `{s}`"));
        let parse_gamma = |rest: &str| -> Result<Vec<f64>> {
            rest.split(',')
                .map(|g| g.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        match s {
            "sumabs" => return Ok(WeightSpec::SumAbs),
            "sumsq" => return Ok(WeightSpec::SumSquares),
            "pairs" => return Ok(WeightSpec::SumAbsProducts),
            _ => {}
        }
        let (head, rest) = s.split_once(':').ok_or_else(bad)?;
        match head {
            "absprod" => {
                let (a, b) = rest.split_once(':').ok_or_else(bad)?;
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a == 0 || b == 0 {
                    return Err(bad());
                }
                Ok(WeightSpec::AbsProduct { a: a - 1, b: b - 1 })
            }
            "cf" => Ok(WeightSpec::CharFn {
                gamma: parse_gamma(rest)?,
            }),
            "cos" => Ok(WeightSpec::Cosine {
                gamma: parse_gamma(rest)?,
            }),
            "sin" => Ok(WeightSpec::Sine {
                gamma: parse_gamma(rest)?,
            }),
            _ => Err(bad()),
        }
    }
}

impl WeightSpec {
    pub fn combo(terms: impl IntoIterator<Item = (f64, WeightSpec)>) -> Self {
        WeightSpec::LinearCombo {
            terms: terms.into_iter().collect(),
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}
