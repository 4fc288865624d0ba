//! Law-invariant lattice seminorms on random variables and their polars.
//!
//! Three families are built in:
//!
//! * `Lp`: `(E|x|^p)^(1/p)`, `p` in `[1, inf]`.
//! * `Orlicz`: the Luxemburg gauge of a Young function. The polar is
//!   `inf_beta beta E Phi*(|eta|/beta) + beta`.
//! * `Spectral`: the gauge whose polar is the spectral functional
//!   `rho(|eta|) = int sigma(u) q_|eta|(u) du`. On quantiles this gauge is
//!   `sup_alpha int_alpha^1 q_|x| / int_alpha^1 sigma`, which for the power
//!   weight equals `sup_alpha (1-alpha)^gamma AVaR_alpha(|x|)`.

mod audit;
mod oracle;
mod spectral;
mod young;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{FilteredSpace, RandVar};

pub use audit::{check_properties, doob_constant, DoobEstimate, PropertyReport};
pub use oracle::{polar_oracle, OracleResult};
pub use spectral::{Distortion, Quantile};
pub use young::YoungFn;

const SIGMA_MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum YoungSpec {
    Power { p: f64 },
    Exponential,
}

impl YoungSpec {
    pub fn young_fn(&self) -> YoungFn {
        match *self {
            YoungSpec::Power { p } => YoungFn::Power(p),
            YoungSpec::Exponential => YoungFn::Exp,
        }
    }
}

/// A member of one of the built-in seminorm families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub enum SeminormSpec {
    Lp { p: f64 },
    Orlicz(YoungSpec),
    Spectral(Distortion),
}

/// Either a number or the string `"inf"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Exponent {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    young: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<Vec<f64>>,
}

impl TryFrom<SpecRepr> for SeminormSpec {
    type Error = Error;

    fn try_from(r: SpecRepr) -> Result<Self> {
        let exponent = |e: Option<Exponent>| -> Result<f64> {
            match e {
                Some(Exponent::Number(p)) => Ok(p),
                Some(Exponent::Text(s)) if s == "inf" => Ok(f64::INFINITY),
                Some(Exponent::Text(s)) => Err(Error::InvalidSpec(format!("exponent `{s}` is not a number"))),
                None => Err(Error::InvalidSpec("missing exponent `p`".into())),
            }
        };
        let spec = match r.kind.as_str() {
            "lp" => SeminormSpec::Lp { p: exponent(r.p)? },
            "orlicz" => match r.young.as_deref() {
                Some("power") => SeminormSpec::Orlicz(YoungSpec::Power { p: exponent(r.p)? }),
                Some("exp") => SeminormSpec::Orlicz(YoungSpec::Exponential),
                other => {
                    return Err(Error::InvalidSpec(format!(
                        "unknown Young function {other:?}; expected \"power\" or \"exp\""
                    )))
                }
            },
            "spectral" => match (r.gamma, r.sigma) {
                (Some(gamma), None) => SeminormSpec::Spectral(Distortion::Power { gamma }),
                (None, Some(sigma)) => SeminormSpec::Spectral(Distortion::Tabulated { sigma }),
                _ => return Err(Error::InvalidSpec("spectral spec needs exactly one of `gamma` or `sigma`".into())),
            },
            other => return Err(Error::InvalidSpec(format!("unknown kind `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<SeminormSpec> for SpecRepr {
    fn from(s: SeminormSpec) -> Self {
        let num = |p: f64| Some(if p.is_infinite() { Exponent::Text("inf".into()) } else { Exponent::Number(p) });
        let empty = SpecRepr { kind: String::new(), p: None, young: None, gamma: None, sigma: None };
        match s {
            SeminormSpec::Lp { p } => SpecRepr { kind: "lp".into(), p: num(p), ..empty },
            SeminormSpec::Orlicz(YoungSpec::Power { p }) => {
                SpecRepr { kind: "orlicz".into(), young: Some("power".into()), p: num(p), ..empty }
            }
            SeminormSpec::Orlicz(YoungSpec::Exponential) => {
                SpecRepr { kind: "orlicz".into(), young: Some("exp".into()), ..empty }
            }
            SeminormSpec::Spectral(Distortion::Power { gamma }) => {
                SpecRepr { kind: "spectral".into(), gamma: Some(gamma), ..empty }
            }
            SeminormSpec::Spectral(Distortion::Tabulated { sigma }) => {
                SpecRepr { kind: "spectral".into(), sigma: Some(sigma), ..empty }
            }
        }
    }
}

impl SeminormSpec {
    pub fn lp(p: f64) -> Self {
        SeminormSpec::Lp { p }
    }

    pub fn orlicz_power(p: f64) -> Self {
        SeminormSpec::Orlicz(YoungSpec::Power { p })
    }

    pub fn orlicz_exp() -> Self {
        SeminormSpec::Orlicz(YoungSpec::Exponential)
    }

    pub fn spectral(gamma: f64) -> Self {
        SeminormSpec::Spectral(Distortion::Power { gamma })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SeminormSpec::Lp { p } => {
                if !(*p >= 1.0) {
                    return Err(Error::InvalidSpec(format!("Lp exponent must be >= 1, got {p}")));
                }
            }
            SeminormSpec::Orlicz(YoungSpec::Power { p }) => {
                if !(*p > 1.0 && p.is_finite()) {
                    return Err(Error::InvalidSpec(format!("Young power must be finite and > 1, got {p}")));
                }
            }
            SeminormSpec::Orlicz(YoungSpec::Exponential) => {}
            SeminormSpec::Spectral(Distortion::Power { gamma }) => {
                if !(*gamma > 0.0 && *gamma < 1.0) {
                    return Err(Error::InvalidSpec(format!("gamma must lie in (0, 1), got {gamma}")));
                }
            }
            SeminormSpec::Spectral(Distortion::Tabulated { sigma }) => {
                if sigma.is_empty() {
                    return Err(Error::InvalidSpec("sigma table is empty".into()));
                }
                if sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                    return Err(Error::InvalidSpec("sigma must be finite and nonnegative".into()));
                }
                if sigma.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::InvalidSpec("sigma must be nondecreasing".into()));
                }
                let mass = sigma.iter().sum::<f64>() / sigma.len() as f64;
                if (mass - 1.0).abs() > SIGMA_MASS_TOL {
                    return Err(Error::InvalidSpec(format!("sigma must integrate to 1, got {mass}")));
                }
            }
        }
        Ok(())
    }

    /// True for the families computed as linear programs (L1 and L-infinity).
    pub fn is_polyhedral(&self) -> bool {
        matches!(self, SeminormSpec::Lp { p } if *p == 1.0 || p.is_infinite())
    }

    pub fn label(&self) -> String {
        match self {
            SeminormSpec::Lp { p } if p.is_infinite() => "Linf".into(),
            SeminormSpec::Lp { p } => format!("L{p}"),
            SeminormSpec::Orlicz(YoungSpec::Power { p }) => format!("orlicz-power({p})"),
            SeminormSpec::Orlicz(YoungSpec::Exponential) => "orlicz-exp".into(),
            SeminormSpec::Spectral(Distortion::Power { gamma }) => format!("spectral({gamma})"),
            SeminormSpec::Spectral(Distortion::Tabulated { sigma }) => {
                format!("spectral-table({})", sigma.len())
            }
        }
    }

    /// Seminorm of `x` under probabilities `prob`.
    pub fn value(&self, prob: &[f64], x: &[f64]) -> f64 {
        assert_eq!(prob.len(), x.len(), "dimension mismatch");
        match self {
            SeminormSpec::Lp { p } => lp_norm(prob, x, *p),
            SeminormSpec::Orlicz(y) => y.young_fn().luxemburg(prob, x),
            SeminormSpec::Spectral(d) => {
                let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                d.gauge(&Quantile::new(prob, &abs)).0
            }
        }
    }

    /// Polar seminorm of `eta` under probabilities `prob`.
    pub fn polar_value(&self, prob: &[f64], eta: &[f64]) -> f64 {
        assert_eq!(prob.len(), eta.len(), "dimension mismatch");
        match self {
            SeminormSpec::Lp { p } => lp_norm(prob, eta, conjugate_exponent(*p)),
            SeminormSpec::Orlicz(y) => y.young_fn().orlicz_polar(prob, eta).0,
            SeminormSpec::Spectral(d) => {
                let abs: Vec<f64> = eta.iter().map(|v| v.abs()).collect();
                d.rho(&Quantile::new(prob, &abs))
            }
        }
    }

    pub fn seminorm(&self, space: &FilteredSpace, xi: &RandVar) -> f64 {
        self.value(space.prob(), xi.values())
    }

    pub fn polar(&self, space: &FilteredSpace, eta: &RandVar) -> f64 {
        self.polar_value(space.prob(), eta.values())
    }

    /// Luxemburg norm of the conjugate Young function (Orlicz specs only).
    pub fn conjugate_luxemburg(&self, space: &FilteredSpace, eta: &RandVar) -> Result<f64> {
        match self {
            SeminormSpec::Orlicz(y) => Ok(y.young_fn().conjugate().luxemburg(space.prob(), eta.values())),
            _ => Err(Error::Unsupported(format!("{} is not an Orlicz spec", self.label()))),
        }
    }
}

pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

pub fn lp_norm(prob: &[f64], x: &[f64], p: f64) -> f64 {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    if p == 1.0 {
        return prob.iter().zip(x).map(|(q, v)| q * v.abs()).sum();
    }
    let s: f64 = prob.iter().zip(x).map(|(q, v)| q * (v.abs() / max).powf(p)).sum();
    max * s.powf(1.0 / p)
}

/// A nonempty ordered list of seminorm specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SeminormSpec>", into = "Vec<SeminormSpec>")]
pub struct NormFamily(Vec<SeminormSpec>);

impl NormFamily {
    pub fn new(specs: Vec<SeminormSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::InvalidSpec("norm family must not be empty".into()));
        }
        Ok(Self(specs))
    }

    pub fn specs(&self) -> &[SeminormSpec] {
        &self.0
    }
}

impl TryFrom<Vec<SeminormSpec>> for NormFamily {
    type Error = Error;
    fn try_from(v: Vec<SeminormSpec>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<NormFamily> for Vec<SeminormSpec> {
    fn from(f: NormFamily) -> Self {
        f.0
    }
}

pub fn quantile(space: &FilteredSpace, eta: &RandVar) -> Quantile {
    Quantile::new(space.prob(), eta.values())
}

/// `int sigma(u) q_eta(u) du` (signed `eta` allowed).
pub fn spectral_rho(spec: &SeminormSpec, space: &FilteredSpace, eta: &RandVar) -> Result<f64> {
    match spec {
        SeminormSpec::Spectral(d) => Ok(d.rho(&quantile(space, eta))),
        _ => Err(Error::Unsupported(format!("{} is not a spectral spec", spec.label()))),
    }
}

/// Layer-cake sum `sum_j (s_j - s_{j-1}) polar(1_{eta >= s_j})` over the
/// distinct values of a nonnegative `eta`.
pub fn choquet_integral(spec: &SeminormSpec, space: &FilteredSpace, eta: &RandVar) -> Result<f64> {
    if let Some((atom, &value)) = eta.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::Negative { atom, value });
    }
    let mut levels: Vec<f64> = eta.values().iter().copied().filter(|v| *v > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut prev = 0.0;
    let mut total = 0.0;
    for s in levels {
        let ind: Vec<f64> = eta.values().iter().map(|&v| if v >= s { 1.0 } else { 0.0 }).collect();
        total += (s - prev) * spec.polar_value(space.prob(), &ind);
        prev = s;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::fixtures::s4;
    use proptest::prelude::*;

    fn rv(v: &[f64]) -> RandVar {
        RandVar::new(v.to_vec())
    }

    #[test]
    fn json_forms() {
        let cases = [
            (r#"{"kind":"lp","p":2}"#, SeminormSpec::lp(2.0)),
            (r#"{"kind":"lp","p":"inf"}"#, SeminormSpec::lp(f64::INFINITY)),
            (r#"{"kind":"orlicz","young":"power","p":2}"#, SeminormSpec::orlicz_power(2.0)),
            (r#"{"kind":"orlicz","young":"exp"}"#, SeminormSpec::orlicz_exp()),
            (r#"{"kind":"spectral","gamma":0.5}"#, SeminormSpec::spectral(0.5)),
        ];
        for (json, spec) in cases {
            let parsed: SeminormSpec = serde_json::from_str(json).unwrap();
            assert_eq!(parsed, spec);
            let back: SeminormSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
            assert_eq!(back, spec);
        }
        for bad in [
            r#"{"kind":"lp","p":0.5}"#,
            r#"{"kind":"spectral","gamma":1.5}"#,
            r#"{"kind":"spectral","sigma":[0.5,0.4]}"#,
            r#"{"kind":"orlicz","young":"cosh"}"#,
            r#"{"kind":"wat"}"#,
        ] {
            assert!(serde_json::from_str::<SeminormSpec>(bad).is_err(), "{bad}");
        }
        assert!(NormFamily::new(vec![]).is_err());
    }

    #[test]
    fn worked_values() {
        let s = s4();
        let ind = rv(&[1.0, 0.0, 0.0, 0.0]);
        let sp = SeminormSpec::spectral(0.5);
        assert!((sp.seminorm(&s, &ind) - 0.5).abs() < 1e-15);
        assert!((sp.polar(&s, &ind) - 0.5).abs() < 1e-15);
        let eta = rv(&[3.0, 1.0, 1.0, 5.0]);
        assert_eq!(SeminormSpec::lp(1.0).polar(&s, &eta), 5.0);
        let rho = spectral_rho(&sp, &s, &eta).unwrap();
        assert!((rho - (2.0 + 2f64.sqrt())).abs() < 1e-12);
        let ch = choquet_integral(&sp, &s, &eta).unwrap();
        assert!((ch - rho).abs() < 1e-12);
        assert!((choquet_integral(&SeminormSpec::lp(1.0), &s, &eta).unwrap() - 5.0).abs() < 1e-15);
        assert!(matches!(choquet_integral(&sp, &s, &rv(&[1.0, -1.0, 0.0, 0.0])), Err(Error::Negative { atom: 1, .. })));
        // Orlicz x^2/2: Luxemburg is ||x||_2 / sqrt 2 and the polar sqrt 2 ||eta||_2.
        let o = SeminormSpec::orlicz_power(2.0);
        assert!((o.seminorm(&s, &rv(&[1.0; 4])) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((o.polar(&s, &rv(&[1.0; 4])) - 2f64.sqrt()).abs() < 1e-12);
    }

    fn specs() -> Vec<SeminormSpec> {
        vec![
            SeminormSpec::lp(1.0),
            SeminormSpec::lp(2.0),
            SeminormSpec::lp(3.0),
            SeminormSpec::lp(f64::INFINITY),
            SeminormSpec::orlicz_power(2.0),
            SeminormSpec::orlicz_power(3.0),
            SeminormSpec::orlicz_exp(),
            SeminormSpec::spectral(0.3),
            SeminormSpec::spectral(0.5),
            SeminormSpec::spectral(0.8),
            SeminormSpec::Spectral(Distortion::Tabulated { sigma: vec![0.5, 0.75, 1.25, 1.5] }),
        ]
    }

    fn prob_and_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (1usize..7)
            .prop_flat_map(|n| {
                (
                    proptest::collection::vec(0.05f64..1.0, n),
                    proptest::collection::vec(-5.0f64..5.0, n),
                    proptest::collection::vec(-5.0f64..5.0, n),
                )
            })
            .prop_map(|(w, x, y)| {
                let s: f64 = w.iter().sum();
                (w.iter().map(|v| v / s).collect(), x, y)
            })
    }

    proptest! {
        #[test]
        fn bipolar_holder((prob, x, eta) in prob_and_pair()) {
            for spec in specs() {
                let lhs: f64 = prob.iter().zip(&x).zip(&eta).map(|((p, a), b)| p * a * b).sum();
                let rhs = spec.value(&prob, &x) * spec.polar_value(&prob, &eta);
                prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs), "{}: {} > {}", spec.label(), lhs, rhs);
            }
        }

        #[test]
        fn homogeneous_and_monotone((prob, x, u) in prob_and_pair(), c in 0.0f64..4.0) {
            for spec in specs() {
                let px = spec.value(&prob, &x);
                let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
                prop_assert!((spec.value(&prob, &scaled) - c * px).abs() <= 1e-9 * (1.0 + c * px));
                let dominated: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a * (b / 5.0)).collect();
                prop_assert!(spec.value(&prob, &dominated) <= px + 1e-12 * (1.0 + px), "{}", spec.label());
            }
        }

        #[test]
        fn triangle_inequality((prob, x, y) in prob_and_pair()) {
            for spec in specs() {
                let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                let l = spec.value(&prob, &sum);
                let r = spec.value(&prob, &x) + spec.value(&prob, &y);
                prop_assert!(l <= r + 1e-9 * (1.0 + r), "{}", spec.label());
                let lp = spec.polar_value(&prob, &sum);
                let rp = spec.polar_value(&prob, &x) + spec.polar_value(&prob, &y);
                prop_assert!(lp <= rp + 1e-9 * (1.0 + rp), "{} polar", spec.label());
            }
        }

        #[test]
        fn comonotone_additivity((prob, x, y) in prob_and_pair()) {
            // Sort both by the same order to make them comonotone.
            let mut idx: Vec<usize> = (0..x.len()).collect();
            idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
            let mut xs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
            let mut ys: Vec<f64> = y.iter().map(|v| v.abs()).collect();
            xs.sort_by(f64::total_cmp);
            ys.sort_by(f64::total_cmp);
            let mut a = vec![0.0; x.len()];
            let mut b = vec![0.0; x.len()];
            for (rank, &i) in idx.iter().enumerate() {
                a[i] = xs[rank];
                b[i] = ys[rank];
            }
            for gamma in [0.3, 0.5, 0.8] {
                let d = Distortion::Power { gamma };
                let sum: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u + v).collect();
                let l = d.rho(&Quantile::new(&prob, &sum));
                let r = d.rho(&Quantile::new(&prob, &a)) + d.rho(&Quantile::new(&prob, &b));
                prop_assert!((l - r).abs() <= 1e-9);
            }
        }
    }
}
