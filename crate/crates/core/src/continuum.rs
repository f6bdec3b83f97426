//! Grid-refinement studies of continuation spectra for the divergence-form
//! equation `(g u_x)_x + (g u_y)_y = 0` on a rectangle.
//!
//! Each level samples the conductivity at edge midpoints of a square grid with
//! cell size `h` (the 5-point finite-volume stencil; the `h` factors cancel for
//! square cells), builds the shifted continuation operator on the herringbone
//! chart, and records its floating spectrum. The coarsest level is also
//! certified exactly.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::StripNetwork;
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};
use crate::spectral::{certify_spectrum, float_eigen, SpectrumVerdict};
use crate::transfer::modified_h;

/// Imaginary parts above this fraction of the spectral radius count as
/// non-real.
pub const IMAG_RELATIVE_TOL: f64 = 1e-9;
/// Smallest real part accepted as positive.
pub const POSITIVE_THRESHOLD: f64 = 1e-10;
/// Relative agreement required between float eigenvalues and exact roots.
pub const BACKEND_RELATIVE_TOL: f64 = 1e-9;

pub const STUDY_NOTE: &str =
    "numerical evidence from lattice refinements only; this does not prove positivity in the continuum";

/// Conductivity presets on the rectangle `[0, length] x [0, height]`.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaPreset {
    /// `g`
    Uniform(Rational),
    /// `a + b x + c y`
    Linear(Rational, Rational, Rational),
    /// `a + b x^2 y^2`
    Bump(Rational, Rational),
}

impl GammaPreset {
    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        match self {
            GammaPreset::Uniform(g) => g.clone(),
            GammaPreset::Linear(a, b, c) => a + b * x + c * y,
            GammaPreset::Bump(a, b) => a + b * x * x * y * y,
        }
    }
}

impl FromStr for GammaPreset {
    type Err = Error;

    /// `uniform:g`, `linear:a,b,c` or `bump:a,b`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidConfig(format!("conductivity preset {s:?} is not of the form kind:args")))?;
        let args = args.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
        match (kind.trim(), args.as_slice()) {
            ("uniform", [g]) => Ok(GammaPreset::Uniform(g.clone())),
            ("linear", [a, b, c]) => Ok(GammaPreset::Linear(a.clone(), b.clone(), c.clone())),
            ("bump", [a, b]) => Ok(GammaPreset::Bump(a.clone(), b.clone())),
            _ => Err(Error::InvalidConfig(format!("unknown conductivity preset {s:?}"))),
        }
    }
}

impl fmt::Display for GammaPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[&Rational]| v.iter().map(|r| format_rational(r)).collect::<Vec<_>>().join(",");
        match self {
            GammaPreset::Uniform(g) => write!(f, "uniform:{}", join(&[g])),
            GammaPreset::Linear(a, b, c) => write!(f, "linear:{}", join(&[a, b, c])),
            GammaPreset::Bump(a, b) => write!(f, "bump:{}", join(&[a, b])),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumConfig {
    pub height: Rational,
    pub length: Rational,
    pub shift: Rational,
    pub gamma: GammaPreset,
    /// Cell sizes, coarsest first.
    pub levels: Vec<Rational>,
}

fn divides(h: &Rational, x: &Rational) -> bool {
    (x / h).is_integer()
}

impl ContinuumConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !self.height.is_positive() || !self.length.is_positive() || self.shift.is_negative() {
            return bad("height and length must be positive and shift nonnegative".into());
        }
        if self.levels.is_empty() {
            return bad("at least one level is required".into());
        }
        if self.levels.windows(2).any(|w| w[0] <= w[1]) {
            return bad("levels must be listed coarse to fine".into());
        }
        for h in &self.levels {
            if !h.is_positive() || !divides(h, &self.height) || !divides(h, &self.length) || !divides(h, &self.shift) {
                return bad(format!("cell size {} must divide height, length and shift", format_rational(h)));
            }
            if &self.shift + h > self.length {
                return bad(format!("shift too long for cell size {}", format_rational(h)));
            }
        }
        // both presets take their extremes on the rectangle at its corners
        let zero = Rational::zero();
        for (x, y) in [(&zero, &zero), (&self.length, &zero), (&zero, &self.height), (&self.length, &self.height)] {
            if !self.gamma.eval(x, y).is_positive() {
                return bad(format!(
                    "conductivity {} is not positive at ({}, {})",
                    self.gamma,
                    format_rational(x),
                    format_rational(y)
                ));
            }
        }
        Ok(())
    }

    /// `(rows, cols, shift in cells)` at `level`.
    pub fn grid(&self, level: usize) -> Result<(usize, usize, usize)> {
        let h = self
            .levels
            .get(level)
            .ok_or_else(|| Error::InvalidConfig(format!("no level {level}")))?;
        let cells = |x: &Rational| -> Result<usize> {
            let q = x / h;
            if !q.is_integer() {
                return Err(Error::InvalidConfig(format!("cell size {} does not divide {}", format_rational(h), format_rational(x))));
            }
            q.to_integer().try_into().map_err(|_| Error::InvalidConfig("grid too large".into()))
        };
        Ok((cells(&self.height)? + 1, cells(&self.length)? + 1, cells(&self.shift)?))
    }

    /// Parses the key-value config file:
    ///
    /// ```text
    /// height = "1"
    /// length = "4"
    /// shift = "1/2"
    /// gamma = "linear:1,1,0"
    /// levels = ["1/2", "1/4"]
    /// ```
    ///
    /// Numbers may also be written as bare integers.
    pub fn from_text(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let cfg = ContinuumConfig {
            height: raw.height.value()?,
            length: raw.length.value()?,
            shift: raw.shift.value()?,
            gamma: raw.gamma.parse()?,
            levels: raw.levels.iter().map(NumberText::value).collect::<Result<_>>()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let raw = RawConfig {
            height: NumberText::Text(format_rational(&self.height)),
            length: NumberText::Text(format_rational(&self.length)),
            shift: NumberText::Text(format_rational(&self.shift)),
            gamma: self.gamma.to_string(),
            levels: self.levels.iter().map(|h| NumberText::Text(format_rational(h))).collect(),
        };
        toml::to_string(&raw).expect("config serializes")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NumberText {
    Int(i64),
    Text(String),
}

impl NumberText {
    fn value(&self) -> Result<Rational> {
        match self {
            NumberText::Int(i) => Ok(Rational::from_integer((*i).into())),
            NumberText::Text(t) => parse_rational(t).map_err(|e| Error::InvalidConfig(e.to_string())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    height: NumberText,
    length: NumberText,
    shift: NumberText,
    gamma: String,
    levels: Vec<NumberText>,
}

/// Lattice network for `level`: each edge carries the conductivity at its
/// midpoint. Vertex `(c, r)` sits at `x = (c-1) h`, `y = (r-1) h`.
pub fn discretize(cfg: &ContinuumConfig, level: usize) -> Result<StripNetwork<Rational>> {
    let (rows, cols, _) = cfg.grid(level)?;
    let h = &cfg.levels[level];
    let half = h / Rational::from_integer(2.into());
    let coord = |i: usize| h * Rational::from_integer((i as i64 - 1).into());
    let mut bad = None;
    let mut sample = |x: Rational, y: Rational| {
        let g = cfg.gamma.eval(&x, &y);
        if !g.is_positive() && bad.is_none() {
            bad = Some((x, y, g.clone()));
        }
        g
    };
    let horiz: Vec<Vec<Rational>> =
        (1..=rows).map(|r| (1..cols).map(|c| sample(coord(c) + &half, coord(r))).collect()).collect();
    let vert: Vec<Vec<Rational>> =
        (1..rows).map(|r| (1..=cols).map(|c| sample(coord(c), coord(r) + &half)).collect()).collect();
    if let Some((x, y, g)) = bad {
        return Err(Error::InvalidConfig(format!(
            "conductivity {} at edge midpoint ({}, {})",
            format_rational(&g),
            format_rational(&x),
            format_rational(&y)
        )));
    }
    StripNetwork::new(rows, cols, horiz, vert)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactLevelCheck {
    pub verdict: SpectrumVerdict,
    pub positive_count: usize,
    #[serde(with = "crate::scalar::serde_rational::option")]
    pub min_root_lower_bound: Option<Rational>,
    /// Float eigenvalues within the relative tolerance of the exact roots.
    pub backends_agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: usize,
    #[serde(with = "crate::scalar::serde_rational")]
    pub h: Rational,
    pub rows: usize,
    pub cols: usize,
    pub chart_dim: usize,
    pub shift_steps: usize,
    pub eigenvalues: Vec<[f64; 2]>,
    pub min_real: f64,
    pub max_abs_imag: f64,
    pub spectral_radius: f64,
    pub positive: bool,
    pub exact: Option<ExactLevelCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub gamma: String,
    #[serde(with = "crate::scalar::serde_rational")]
    pub height: Rational,
    #[serde(with = "crate::scalar::serde_rational")]
    pub length: Rational,
    #[serde(with = "crate::scalar::serde_rational")]
    pub shift: Rational,
    pub verdict: bool,
    pub note: String,
    pub levels: Vec<LevelResult>,
}

fn run_level(cfg: &ContinuumConfig, level: usize) -> Result<LevelResult> {
    let h = cfg.levels[level].clone();
    let failed = |e: Error| Error::NumericFailure(format!("level {level} (h = {}): {e}", format_rational(&h)));
    let net = discretize(cfg, level)?;
    let (rows, cols, shift_steps) = cfg.grid(level)?;
    let float_net = net.to_backend::<f64>();
    let op = modified_h(&float_net, shift_steps)?;
    let eig = float_eigen(&op.matrix).map_err(failed)?;
    let spectral_radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min_real = eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let max_abs_imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let positive = max_abs_imag <= IMAG_RELATIVE_TOL * spectral_radius && min_real > POSITIVE_THRESHOLD;

    let exact = if level == 0 {
        let exact_op = modified_h(&net, shift_steps)?;
        let report = certify_spectrum(&exact_op.matrix).map_err(failed)?;
        let backends_agree = eig.len() == report.dim
            && eig.iter().all(|z| {
                report.isolating_intervals.iter().any(|i| {
                    let mid = i.midpoint().to_f64();
                    (z - mid).norm() <= BACKEND_RELATIVE_TOL * mid.abs().max(1.0)
                })
            });
        Some(ExactLevelCheck {
            verdict: report.verdict,
            positive_count: report.positive_count,
            min_root_lower_bound: report.min_root_lower_bound(),
            backends_agree,
        })
    } else {
        None
    };

    Ok(LevelResult {
        level,
        h,
        rows,
        cols,
        chart_dim: 2 * rows - 1,
        shift_steps,
        eigenvalues: eig.iter().map(|z| [z.re, z.im]).collect(),
        min_real,
        max_abs_imag,
        spectral_radius,
        positive,
        exact,
    })
}

/// Runs every level (concurrently) and collects the results in level order.
pub fn refinement_study(cfg: &ContinuumConfig) -> Result<RefinementStudy> {
    cfg.validate()?;
    let levels = (0..cfg.levels.len())
        .into_par_iter()
        .map(|i| run_level(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let verdict = levels.iter().all(|l| l.positive)
        && levels[0]
            .exact
            .as_ref()
            .is_some_and(|e| e.verdict == SpectrumVerdict::AllPositive && e.backends_agree);
    Ok(RefinementStudy {
        gamma: cfg.gamma.to_string(),
        height: cfg.height.clone(),
        length: cfg.length.clone(),
        shift: cfg.shift.clone(),
        verdict,
        note: STUDY_NOTE.to_string(),
        levels,
    })
}

/// Column order of [`RefinementStudy::to_csv`].
pub const CSV_HEADER: [&str; 7] = ["level", "h", "rows", "s", "min_eigenvalue", "max_imag", "verdict"];

impl RefinementStudy {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("study serializes")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory csv");
        for l in &self.levels {
            w.write_record([
                l.level.to_string(),
                format_rational(&l.h),
                l.rows.to_string(),
                l.shift_steps.to_string(),
                l.min_real.to_string(),
                l.max_abs_imag.to_string(),
                if l.positive { "POSITIVE" } else { "NOT_POSITIVE" }.to_string(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

impl ContinuumConfig {
    /// The same config with the conductivity replaced.
    pub fn with_gamma(&self, gamma: GammaPreset) -> Self {
        Self { gamma, ..self.clone() }
    }

    /// A unit-height strip of length 4 with shift 1/2 on the given levels.
    pub fn unit_strip(gamma: GammaPreset, levels: Vec<Rational>) -> Self {
        Self {
            height: Rational::one(),
            length: Rational::from_integer(4.into()),
            shift: Rational::new(1.into(), 2.into()),
            gamma,
            levels,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn preset_parsing() {
        assert_eq!("uniform:1".parse::<GammaPreset>().unwrap(), GammaPreset::Uniform(int(1)));
        assert_eq!("linear:1,1/2,0".parse::<GammaPreset>().unwrap(), GammaPreset::Linear(int(1), rat(1, 2), int(0)));
        assert_eq!("bump:1,-2".parse::<GammaPreset>().unwrap().to_string(), "bump:1,-2");
        assert!("wave:1".parse::<GammaPreset>().is_err());
        assert!("linear:1,2".parse::<GammaPreset>().is_err());
    }

    #[test]
    fn uniform_discretization_is_uniform_network() {
        let cfg = ContinuumConfig::unit_strip(GammaPreset::Uniform(int(1)), vec![rat(1, 2), rat(1, 4)]);
        for level in 0..2 {
            let net = discretize(&cfg, level).unwrap();
            let (rows, cols, _) = cfg.grid(level).unwrap();
            assert_eq!(net, StripNetwork::build_uniform(rows, cols, int(1)).unwrap());
        }
    }

    #[test]
    fn linear_midpoint_sampling() {
        let cfg = ContinuumConfig {
            height: int(1),
            length: int(1),
            shift: int(0),
            gamma: GammaPreset::Linear(int(1), int(1), int(0)),
            levels: vec![rat(1, 2)],
        };
        let net = discretize(&cfg, 0).unwrap();
        assert_eq!(net.horizontal(1, 1), &rat(5, 4));
        assert_eq!(net.vertical(1, 1), &int(1));
    }

    #[test]
    fn nonpositive_conductivity_is_rejected() {
        let cfg = ContinuumConfig {
            height: int(1),
            length: int(1),
            shift: int(0),
            gamma: GammaPreset::Bump(int(1), int(-2)),
            levels: vec![rat(1, 2)],
        };
        assert!(matches!(discretize(&cfg, 0), Err(Error::InvalidConfig(_))));
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn config_validation() {
        let base = ContinuumConfig::unit_strip(GammaPreset::Uniform(int(1)), vec![rat(1, 2)]);
        assert!(base.validate().is_ok());
        assert!(ContinuumConfig { levels: vec![rat(1, 3)], ..base.clone() }.validate().is_err());
        assert!(ContinuumConfig { levels: vec![rat(1, 4), rat(1, 2)], ..base.clone() }.validate().is_err());
        assert!(ContinuumConfig { shift: int(4), ..base.clone() }.validate().is_err());
        assert_eq!(base.grid(0).unwrap(), (3, 9, 1));
    }

    #[test]
    fn config_text_round_trip() {
        let text = "height = 1\nlength = \"4\"\nshift = \"1/2\"\ngamma = \"linear:1,1,1\"\nlevels = [\"1/2\", \"1/4\"]\n";
        let cfg = ContinuumConfig::from_text(text).unwrap();
        assert_eq!(cfg.gamma, GammaPreset::Linear(int(1), int(1), int(1)));
        assert_eq!(ContinuumConfig::from_text(&cfg.to_text()).unwrap(), cfg);
        assert!(ContinuumConfig::from_text("height = 1").is_err());
    }

    #[test]
    fn zero_shift_gives_identity_spectrum() {
        let cfg = ContinuumConfig { shift: int(0), ..ContinuumConfig::unit_strip(GammaPreset::Uniform(int(1)), vec![rat(1, 2), rat(1, 4)]) };
        let study = refinement_study(&cfg).unwrap();
        assert!(study.verdict);
        for l in &study.levels {
            assert!(l.eigenvalues.iter().all(|[re, im]| *re == 1.0 && *im == 0.0));
        }
    }

    #[test]
    fn coarse_uniform_study_is_certified() {
        let cfg = ContinuumConfig::unit_strip(GammaPreset::Uniform(int(1)), vec![rat(1, 2), rat(1, 4)]);
        let study = refinement_study(&cfg).unwrap();
        assert!(study.verdict);
        let exact = study.levels[0].exact.as_ref().unwrap();
        assert_eq!(exact.verdict, SpectrumVerdict::AllPositive);
        assert_eq!(exact.positive_count, 5);
        assert!(exact.backends_agree);
        assert_eq!(RefinementStudy::from_text(&study.to_text()).unwrap(), study);
        assert!(study.to_csv().starts_with("level,h,rows,s,min_eigenvalue,max_imag,verdict\n"));
    }
}
