//! Job specification: a single JSON document, parsed and validated in full
//! before any computation starts.

use std::path::{Path, PathBuf};

use curvecap_core::chebyshev::MinimaxConfig;
use curvecap_core::exactnum::parse_rational;
use curvecap_core::sampler::rational_circle;
use curvecap_core::{AffineMap, BasisKind, CurveConfig, Error, GaussRational, Ideal, Poly, Result, SampleConfig};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub nvars: usize,
    pub generators: Vec<String>,
    #[serde(default)]
    pub sampling: Option<Sampling>,
    #[serde(default)]
    pub analysis: Analysis,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default)]
    pub circle: Option<Circle>,
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
}

/// `count` exact points on the circle `|z_1| = radius`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circle {
    pub radius: String,
    pub count: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analysis {
    #[serde(default = "default_hilbert_degree")]
    pub hilbert_degree: u32,
    #[serde(default)]
    pub s_min: Option<u32>,
    #[serde(default = "default_s_max")]
    pub s_max: u32,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    #[serde(default = "default_passes")]
    pub passes: usize,
    #[serde(default)]
    pub basis: Basis,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub tau_q: Option<TauQ>,
    #[serde(default)]
    pub transform: Option<Transform>,
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis {
            hilbert_degree: default_hilbert_degree(),
            s_min: None,
            s_max: default_s_max(),
            n_max: default_n_max(),
            passes: default_passes(),
            basis: Basis::default(),
            seed: default_seed(),
            tolerances: Tolerances::default(),
            tau_q: None,
            transform: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
pub enum Basis {
    #[default]
    C,
    #[serde(rename = "monomial")]
    Monomial,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted `|log d_n − log cheb_side|` in `verify`.
    #[serde(default = "default_gap")]
    pub gap: f64,
    /// Largest accepted Chebyshev convergence diagnostic in `verify`.
    #[serde(default = "default_diagnostic")]
    pub diagnostic: f64,
    #[serde(default = "default_minimax_tol")]
    pub minimax: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_residual")]
    pub residual: f64,
    #[serde(default = "default_dedup")]
    pub dedup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gap: default_gap(),
            diagnostic: default_diagnostic(),
            minimax: default_minimax_tol(),
            max_iters: default_max_iters(),
            residual: default_residual(),
            dedup: default_dedup(),
        }
    }
}

/// `τ(K, Q, n)` for `n = 1..=n_max`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauQ {
    pub q: String,
    pub n_max: u32,
}

/// `z ↦ A z + b` with exact entries such as `"1/2"` or `"(1)+(2)i"`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transform {
    pub matrix: Vec<Vec<String>>,
    pub shift: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

fn default_r_max() -> f64 {
    1e6
}
fn default_hilbert_degree() -> u32 {
    12
}
fn default_s_max() -> u32 {
    20
}
fn default_n_max() -> u32 {
    10
}
fn default_passes() -> usize {
    10
}
fn default_seed() -> u64 {
    0x5eed
}
fn default_gap() -> f64 {
    0.05
}
fn default_diagnostic() -> f64 {
    0.02
}
fn default_minimax_tol() -> f64 {
    MinimaxConfig::default().tol
}
fn default_max_iters() -> usize {
    MinimaxConfig::default().max_iters
}
fn default_residual() -> f64 {
    SampleConfig::default().residual_tol
}
fn default_dedup() -> f64 {
    SampleConfig::default().dedup_tol
}

pub enum SampleSource {
    Circle(Vec<GaussRational>),
    File(PathBuf),
}

/// A spec with every text field parsed.
pub struct Job {
    pub spec: JobSpec,
    pub ideal: Ideal,
    pub source: Option<SampleSource>,
    pub tau_q: Option<(Poly, u32)>,
    pub transform: Option<AffineMap>,
    pub seed: u64,
}

impl Job {
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Job> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read spec {}: {e}", path.display())))?;
        let spec: JobSpec = serde_json::from_str(&text).map_err(|e| Error::Input(format!("spec: {e}")))?;
        Job::new(spec, path.parent().unwrap_or(Path::new(".")), seed)
    }

    pub fn new(spec: JobSpec, base: &Path, seed: Option<u64>) -> Result<Job> {
        if spec.nvars < 2 {
            return Err(Error::Input(format!("nvars = {} but a curve needs at least 2 variables", spec.nvars)));
        }
        let ideal = Ideal::parse(spec.nvars, &spec.generators)?;
        let source = match &spec.sampling {
            None => None,
            Some(s) => Some(match (&s.circle, &s.file) {
                (Some(c), None) => {
                    if c.count == 0 {
                        return Err(Error::Input("sampling.circle.count must be positive".into()));
                    }
                    let r = parse_rational(&c.radius)?;
                    if r <= curvecap_core::BigRational::from_integer(0.into()) {
                        return Err(Error::Input("sampling.circle.radius must be positive".into()));
                    }
                    SampleSource::Circle(rational_circle(c.count, &r))
                }
                (None, Some(f)) => SampleSource::File(if f.is_absolute() { f.clone() } else { base.join(f) }),
                _ => return Err(Error::Input("sampling needs exactly one of `circle` or `file`".into())),
            }),
        };
        let tau_q = match &spec.analysis.tau_q {
            None => None,
            Some(t) => {
                if t.n_max == 0 {
                    return Err(Error::Input("analysis.tau_q.n_max must be at least 1".into()));
                }
                Some((curvecap_core::parse_poly(&t.q, spec.nvars)?, t.n_max))
            }
        };
        let transform = match &spec.analysis.transform {
            None => None,
            Some(t) => {
                let matrix = t
                    .matrix
                    .iter()
                    .map(|row| row.iter().map(|x| x.parse()).collect::<Result<Vec<GaussRational>>>())
                    .collect::<Result<Vec<_>>>()?;
                let shift = t.shift.iter().map(|x| x.parse()).collect::<Result<Vec<GaussRational>>>()?;
                let map = AffineMap::new(matrix, shift)?;
                if map.nvars() != spec.nvars {
                    return Err(Error::Input(format!("transform acts on {} variables, spec has {}", map.nvars(), spec.nvars)));
                }
                Some(map)
            }
        };
        let tol = &spec.analysis.tolerances;
        for (name, v) in [("gap", tol.gap), ("diagnostic", tol.diagnostic), ("minimax", tol.minimax), ("residual", tol.residual), ("dedup", tol.dedup)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Input(format!("analysis.tolerances.{name} must be positive, got {v}")));
            }
        }
        let seed = seed.unwrap_or(spec.analysis.seed);
        Ok(Job { spec, ideal, source, tau_q, transform, seed })
    }

    pub fn curve_config(&self) -> CurveConfig {
        CurveConfig { seed: self.seed, ..CurveConfig::default() }
    }

    pub fn sample_config(&self) -> SampleConfig {
        let tol = &self.spec.analysis.tolerances;
        SampleConfig { residual_tol: tol.residual, dedup_tol: tol.dedup, seed: self.seed, ..SampleConfig::default() }
    }

    pub fn minimax(&self) -> MinimaxConfig {
        let tol = &self.spec.analysis.tolerances;
        MinimaxConfig { tol: tol.minimax, max_iters: tol.max_iters, ..MinimaxConfig::default() }
    }

    pub fn basis_kind(&self) -> BasisKind {
        match self.spec.analysis.basis {
            Basis::C => BasisKind::C,
            Basis::Monomial => BasisKind::Monomial,
        }
    }
}
