//! Named example symbols, buildable from JSON.
//!
//! Dual-variable formulas act on the torus part of `xi`; cyclic coordinates
//! are ignored by the homogeneous and decaying entries.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DualFunction, SpaceFunction, Symbol};
use crate::error::{Error, Result};
use crate::group::{DualPoint, Factor, Group};

/// Outer function `h` in `h(|xi|^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceSpec {
    Constant { value: f64 },
    Character { freq: Vec<i64> },
    /// `offset + amplitude * cos(2 pi <freq, x>)`.
    Cosine {
        freq: Vec<i64>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        offset: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SymbolSpec {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    /// Sign of the first torus coordinate.
    Sign,
    /// `<weights, xi/|xi|>`, zero at the origin.
    Homogeneous0 { weights: Vec<f64> },
    /// 1 within `inner_angle` of `direction`, 0 beyond `outer_angle`, cosine ramp between.
    Cone { direction: Vec<f64>, inner_angle: f64, outer_angle: f64 },
    /// `1 / (1 + |xi|)`.
    Decay,
    HomogeneousPlusDecay { weights: Vec<f64> },
    /// `h(|xi|^exponent)`.
    Power { exponent: f64, h: Profile },
    CosSqrt,
    /// `(-1)^(xi_1 + ... + xi_a)`.
    Alternating,
    /// `1 - |xi|_inf / (radius + 1)` on `|xi|_inf <= radius`, zero outside.
    Bump { radius: i64 },
    /// `phi(x) * g(x, xi)`.
    Separable { space: SpaceSpec, dual: Box<SymbolSpec> },
}

impl SymbolSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Sign => "sign",
            Self::Homogeneous0 { .. } => "homogeneous0",
            Self::Cone { .. } => "cone",
            Self::Decay => "decay",
            Self::HomogeneousPlusDecay { .. } => "homogeneous_plus_decay",
            Self::Power { .. } => "power",
            Self::CosSqrt => "cos_sqrt",
            Self::Alternating => "alternating",
            Self::Bump { .. } => "bump",
            Self::Separable { .. } => "separable",
        }
    }
}

fn torus_indices(group: &Group) -> Vec<usize> {
    group.factors().iter().enumerate().filter(|(_, f)| matches!(f, Factor::Torus { .. })).map(|(j, _)| j).collect()
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::InvalidSpec(format!("{what} has {got} entries, torus rank is {want}")));
    }
    Ok(())
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn euclid(tor: &[usize], xi: &DualPoint) -> f64 {
    tor.iter().map(|&j| (xi.0[j] as f64).powi(2)).sum::<f64>().sqrt()
}

fn homogeneous(tor: Vec<usize>, weights: Vec<f64>) -> impl Fn(&DualPoint) -> f64 + Send + Sync + Clone {
    move |xi| {
        let r = euclid(&tor, xi);
        if r == 0.0 {
            return 0.0;
        }
        tor.iter().zip(&weights).map(|(&j, w)| w * xi.0[j] as f64).sum::<f64>() / r
    }
}

fn space_function(group: &Group, spec: &SpaceSpec) -> Result<SpaceFunction> {
    let tor = torus_indices(group);
    let phase = |freq: &[i64]| -> Result<DualPoint> {
        check_len("space frequency", freq.len(), tor.len())?;
        let mut coords = vec![0i64; group.rank()];
        for (&j, &k) in tor.iter().zip(freq) {
            coords[j] = k;
        }
        Ok(DualPoint(coords))
    };
    Ok(match spec {
        SpaceSpec::Constant { value } => {
            let v = *value;
            SpaceFunction::new(format!("{v}"), move |_| real(v))
        }
        SpaceSpec::Character { freq } => SpaceFunction::character(group, &phase(freq)?),
        SpaceSpec::Cosine { freq, amplitude, offset } => {
            let (xi, a, b) = (phase(freq)?, *amplitude, *offset);
            let g = group.clone();
            SpaceFunction::new(format!("{b}+{a}cos{xi}"), move |x| {
                real(b + a * g.character(&xi, x).map(|c| c.re).unwrap_or(0.0))
            })
        }
    })
}

/// Builds the symbol described by `spec` on `group`.
pub fn build(spec: &SymbolSpec, group: &Group) -> Result<Symbol> {
    let tor = torus_indices(group);
    let dual = |label: String, rule: Box<dyn Fn(&DualPoint) -> f64 + Send + Sync>| {
        Symbol::multiplier(&DualFunction::new(label, move |xi| real(rule(xi))))
    };
    let needs_torus = |name: &str| -> Result<()> {
        if tor.is_empty() {
            return Err(Error::InvalidSpec(format!("{name} needs at least one torus factor")));
        }
        Ok(())
    };
    let sym = match spec {
        SymbolSpec::Constant { value } => {
            let v = *value;
            dual(format!("constant({v})"), Box::new(move |_| v))
        }
        SymbolSpec::Sign => {
            needs_torus("sign")?;
            let j = tor[0];
            dual("sign".into(), Box::new(move |xi| xi.0[j].signum() as f64))
        }
        SymbolSpec::Homogeneous0 { weights } => {
            needs_torus("homogeneous0")?;
            check_len("weights", weights.len(), tor.len())?;
            dual("homogeneous0".into(), Box::new(homogeneous(tor.clone(), weights.clone())))
        }
        SymbolSpec::Cone { direction, inner_angle, outer_angle } => {
            needs_torus("cone")?;
            check_len("direction", direction.len(), tor.len())?;
            let dn = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
            if dn == 0.0 || !(0.0..=PI).contains(inner_angle) || outer_angle <= inner_angle || *outer_angle > PI {
                return Err(Error::InvalidSpec("cone needs a nonzero direction and 0 <= inner < outer <= pi".into()));
            }
            let (a, b) = (*inner_angle, *outer_angle);
            let (tor, dir) = (tor.clone(), direction.iter().map(|d| d / dn).collect::<Vec<f64>>());
            dual(
                "cone".into(),
                Box::new(move |xi| {
                    let r = euclid(&tor, xi);
                    if r == 0.0 {
                        return 0.0;
                    }
                    let c = tor.iter().zip(&dir).map(|(&j, d)| d * xi.0[j] as f64).sum::<f64>() / r;
                    let t = ((c.clamp(-1.0, 1.0).acos() - a) / (b - a)).clamp(0.0, 1.0);
                    0.5 * (1.0 + (PI * t).cos())
                }),
            )
        }
        SymbolSpec::Decay => {
            let tor = tor.clone();
            dual("decay".into(), Box::new(move |xi| 1.0 / (1.0 + euclid(&tor, xi))))
        }
        SymbolSpec::HomogeneousPlusDecay { weights } => {
            needs_torus("homogeneous_plus_decay")?;
            check_len("weights", weights.len(), tor.len())?;
            let h = homogeneous(tor.clone(), weights.clone());
            let tor = tor.clone();
            dual("homogeneous_plus_decay".into(), Box::new(move |xi| h(xi) + 1.0 / (1.0 + euclid(&tor, xi))))
        }
        SymbolSpec::Power { exponent, h } => {
            if !(*exponent > 0.0 && *exponent < 1.0) {
                return Err(Error::InvalidSpec(format!("power exponent must lie in (0, 1), got {exponent}")));
            }
            let (p, h) = (*exponent, *h);
            let tor = tor.clone();
            dual(
                format!("{h:?}(|xi|^{p})").to_lowercase(),
                Box::new(move |xi| {
                    let s = euclid(&tor, xi).powf(p);
                    match h {
                        Profile::Cos => s.cos(),
                        Profile::Sin => s.sin(),
                    }
                }),
            )
        }
        SymbolSpec::CosSqrt => {
            let tor = tor.clone();
            dual("cos_sqrt".into(), Box::new(move |xi| euclid(&tor, xi).sqrt().cos()))
        }
        SymbolSpec::Alternating => {
            needs_torus("alternating")?;
            let tor = tor.clone();
            dual(
                "alternating".into(),
                Box::new(move |xi| if tor.iter().map(|&j| xi.0[j]).sum::<i64>().rem_euclid(2) == 0 { 1.0 } else { -1.0 }),
            )
        }
        SymbolSpec::Bump { radius } => {
            if *radius < 0 {
                return Err(Error::InvalidSpec("bump radius must be nonnegative".into()));
            }
            let (r, tor) = (*radius, tor.clone());
            dual(
                format!("bump({r})"),
                Box::new(move |xi| {
                    let s = tor.iter().map(|&j| xi.0[j].abs()).max().unwrap_or(0);
                    if s <= r {
                        1.0 - s as f64 / (r + 1) as f64
                    } else {
                        0.0
                    }
                }),
            )
        }
        SymbolSpec::Separable { space, dual: inner } => {
            let phi = space_function(group, space)?;
            let g = build(inner, group)?;
            let label = format!("{}*{}", phi.label(), g.label());
            Symbol::new(label, move |x, xi| phi.eval(x) * g.eval(x, xi))
        }
    };
    Ok(sym.with_label(spec.name()))
}

/// Gallery entries for groups of the given torus rank.
pub fn gallery(torus_rank: usize) -> Vec<(&'static str, SymbolSpec)> {
    let e1: Vec<f64> = (0..torus_rank).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect();
    let weights: Vec<f64> = (0..torus_rank).map(|j| 1.0 / (1 + j) as f64).collect();
    let mut freq = vec![0i64; torus_rank];
    if let Some(f) = freq.first_mut() {
        *f = 1;
    }
    vec![
        ("constant", SymbolSpec::Constant { value: 1.0 }),
        ("sign", SymbolSpec::Sign),
        ("homogeneous0", SymbolSpec::Homogeneous0 { weights: weights.clone() }),
        ("cone", SymbolSpec::Cone { direction: e1, inner_angle: 0.5, outer_angle: 0.8 }),
        ("decay", SymbolSpec::Decay),
        ("homogeneous_plus_decay", SymbolSpec::HomogeneousPlusDecay { weights }),
        ("power", SymbolSpec::Power { exponent: 0.5, h: Profile::Sin }),
        ("cos_sqrt", SymbolSpec::CosSqrt),
        ("alternating", SymbolSpec::Alternating),
        ("bump", SymbolSpec::Bump { radius: 8 }),
        (
            "phase_sign",
            SymbolSpec::Separable { space: SpaceSpec::Character { freq }, dual: Box::new(SymbolSpec::Sign) },
        ),
    ]
}

pub fn names() -> Vec<&'static str> {
    gallery(1).into_iter().map(|(n, _)| n).collect()
}

/// Builds the gallery entry `name` with its default parameters.
pub fn by_name(name: &str, group: &Group) -> Result<Symbol> {
    let (_, spec) = gallery(torus_indices(group).len())
        .into_iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidSpec(format!("unknown gallery symbol `{name}`")))?;
    Ok(build(&spec, group)?.with_label(name))
}
