//! Declarative experiment specifications and their validation.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    KacEsd,
    ThermoEsd,
    AsepMidpoint,
    AsepLis,
    AsepGap,
    BoundsAudit,
    BlockingAudit,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::KacEsd,
        ExperimentKind::ThermoEsd,
        ExperimentKind::AsepMidpoint,
        ExperimentKind::AsepLis,
        ExperimentKind::AsepGap,
        ExperimentKind::BoundsAudit,
        ExperimentKind::BlockingAudit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::KacEsd => "kac-esd",
            ExperimentKind::ThermoEsd => "thermo-esd",
            ExperimentKind::AsepMidpoint => "asep-midpoint",
            ExperimentKind::AsepLis => "asep-lis",
            ExperimentKind::AsepGap => "asep-gap",
            ExperimentKind::BoundsAudit => "bounds-audit",
            ExperimentKind::BlockingAudit => "blocking-audit",
        }
    }

    fn accepts(self, field: Field) -> bool {
        use ExperimentKind::*;
        use Field::*;
        match field {
            MasterSeed | OutputPath => true,
            N => true,
            K => matches!(self, KacEsd | ThermoEsd | BoundsAudit),
            Q | C | Alpha => matches!(
                self,
                AsepMidpoint | AsepLis | AsepGap | BoundsAudit | BlockingAudit
            ),
            Beta | Mu => self == ThermoEsd,
            A => self == BlockingAudit,
            Particles => matches!(self, AsepMidpoint | AsepLis | AsepGap | BoundsAudit),
            Replicas | BurnIn => matches!(self, KacEsd | ThermoEsd | AsepMidpoint | AsepLis),
            PilotReplicas | SeedMatrix => matches!(self, KacEsd | ThermoEsd | BoundsAudit),
            RGrid => matches!(
                self,
                KacEsd | ThermoEsd | AsepMidpoint | AsepLis | BoundsAudit
            ),
            StateSamples | InnerSamples => self == BoundsAudit,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fixed symmetric matrix that the compression experiments conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedMatrixKind {
    /// One GOE-like draw from the seed-matrix stream.
    #[default]
    Goe,
    Identity,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    N,
    K,
    Q,
    C,
    Alpha,
    Beta,
    Mu,
    A,
    Particles,
    Replicas,
    PilotReplicas,
    BurnIn,
    RGrid,
    MasterSeed,
    OutputPath,
    SeedMatrix,
    StateSamples,
    InnerSamples,
}

impl Field {
    fn name(self) -> &'static str {
        match self {
            Field::N => "n",
            Field::K => "k",
            Field::Q => "q",
            Field::C => "c",
            Field::Alpha => "alpha",
            Field::Beta => "beta",
            Field::Mu => "mu",
            Field::A => "a",
            Field::Particles => "particles",
            Field::Replicas => "replicas",
            Field::PilotReplicas => "pilotReplicas",
            Field::BurnIn => "burnIn",
            Field::RGrid => "rGrid",
            Field::MasterSeed => "masterSeed",
            Field::OutputPath => "outputPath",
            Field::SeedMatrix => "seedMatrix",
            Field::StateSamples => "stateSamples",
            Field::InnerSamples => "innerSamples",
        }
    }
}

/// Experiment description as written in a spec file. Omitted fields take
/// per-kind defaults in [`ExperimentSpec::resolve`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: Option<ExperimentKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pilot_replicas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_matrix: Option<SeedMatrixKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_samples: Option<usize>,
}

pub const DEFAULT_MASTER_SEED: u64 = 20_240_917;
pub const MIN_PILOT_REPLICAS: usize = 100;

/// A validated spec with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolvedSpec {
    pub kind: ExperimentKind,
    pub n: usize,
    pub k: Option<usize>,
    pub q: Option<f64>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub mu: Option<f64>,
    pub a: Option<f64>,
    pub particles: Option<usize>,
    pub replicas: usize,
    pub pilot_replicas: usize,
    pub burn_in: u64,
    pub r_grid: Vec<f64>,
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
    pub seed_matrix: SeedMatrixKind,
    pub state_samples: usize,
    pub inner_samples: usize,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind: Some(kind),
            ..Self::default()
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(vec![format!("spec: {e}")]))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Fills defaults and checks every field, collecting one diagnostic per
    /// offending field.
    pub fn resolve(&self) -> Result<ResolvedSpec> {
        let kind = match self.kind {
            Some(k) => k,
            None => return Err(Error::Config(vec!["kind: required".into()])),
        };
        let mut errs = Vec::new();
        for (field, present) in self.present_fields() {
            if present && !kind.accepts(field) {
                errs.push(format!("{}: not used by {kind} experiments", field.name()));
            }
        }

        let n = self.n.unwrap_or(match kind {
            ExperimentKind::KacEsd => 60,
            ExperimentKind::ThermoEsd => 40,
            ExperimentKind::AsepMidpoint | ExperimentKind::AsepLis => 200,
            ExperimentKind::AsepGap => 8,
            ExperimentKind::BoundsAudit => 20,
            ExperimentKind::BlockingAudit => 80,
        });
        let min_n = if kind == ExperimentKind::KacEsd || kind == ExperimentKind::ThermoEsd {
            1
        } else {
            2
        };
        if n < min_n {
            errs.push(format!("n: must be >= {min_n}, got {n}"));
        }
        let needs_even = matches!(
            kind,
            ExperimentKind::AsepMidpoint
                | ExperimentKind::BoundsAudit
                | ExperimentKind::BlockingAudit
        );
        if needs_even && n % 2 != 0 {
            errs.push(format!(
                "n: must be even for {kind} (midpoint height), got {n}"
            ));
        }

        let k = kind
            .accepts(Field::K)
            .then(|| self.k.unwrap_or(n / 2).max(1));
        if let Some(k) = k {
            if k == 0 || k > n {
                errs.push(format!("k: must satisfy 1 <= k <= n, got k = {k}, n = {n}"));
            }
        }

        let (q, c, alpha) = self.resolve_asymmetry(kind, n, &mut errs);

        let (beta, mu) = if kind == ExperimentKind::ThermoEsd {
            let beta = self.beta.unwrap_or(1.0);
            let mu = self.mu.unwrap_or(1.0);
            if !(beta > 0.0 && beta.is_finite()) {
                errs.push(format!("beta: must be positive, got {beta}"));
            }
            if !(mu > 0.0 && mu.is_finite()) {
                errs.push(format!("mu: must be positive, got {mu}"));
            }
            (Some(beta), Some(mu))
        } else {
            (None, None)
        };

        let a = if kind == ExperimentKind::BlockingAudit {
            let a = match (self.a, q) {
                (Some(a), _) => Some(a),
                (None, Some(q)) => Some(q.powf(-9.0 * n as f64 / 20.0)),
                (None, None) => None,
            };
            if let Some(a) = a {
                if !(a > 0.0 && a.is_finite()) {
                    errs.push(format!("a: must be positive and finite, got {a}"));
                }
            }
            a
        } else {
            None
        };

        let particles = kind
            .accepts(Field::Particles)
            .then(|| self.particles.unwrap_or(n / 2));
        if let Some(m) = particles {
            if m > n {
                errs.push(format!("particles: cannot exceed n = {n}, got {m}"));
            }
            if kind == ExperimentKind::AsepGap && (m == 0 || m == n) {
                errs.push(format!(
                    "particles: the chain with {m} particles on {n} sites has one state"
                ));
            }
        }

        let replicas = if kind.accepts(Field::Replicas) {
            let r = self.replicas.unwrap_or(match kind {
                ExperimentKind::KacEsd | ExperimentKind::ThermoEsd => 2000,
                _ => 1000,
            });
            if r == 0 {
                errs.push("replicas: must be >= 1".into());
            }
            r
        } else {
            0
        };

        let pilot_replicas = if kind.accepts(Field::PilotReplicas) {
            let p = self.pilot_replicas.unwrap_or(match kind {
                ExperimentKind::BoundsAudit => 200,
                _ => 2000,
            });
            if p < MIN_PILOT_REPLICAS {
                errs.push(format!(
                    "pilotReplicas: must be >= {MIN_PILOT_REPLICAS}, got {p}"
                ));
            }
            p
        } else {
            0
        };

        let burn_in = if kind.accepts(Field::BurnIn) {
            self.burn_in.unwrap_or(match kind {
                ExperimentKind::AsepMidpoint | ExperimentKind::AsepLis => 10 * (n as u64).pow(3),
                _ => 0,
            })
        } else {
            0
        };

        let r_grid = if kind.accepts(Field::RGrid) {
            let grid = self.r_grid.clone().unwrap_or_else(|| default_grid(kind));
            if grid.is_empty() {
                errs.push("rGrid: must not be empty".into());
            } else if grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                errs.push("rGrid: entries must be finite and >= 0".into());
            } else if grid.windows(2).any(|w| w[1] <= w[0]) {
                errs.push("rGrid: must be strictly ascending".into());
            }
            grid
        } else {
            Vec::new()
        };

        let (state_samples, inner_samples) = if kind == ExperimentKind::BoundsAudit {
            let s = self.state_samples.unwrap_or(200);
            let i = self.inner_samples.unwrap_or(2000);
            if s == 0 {
                errs.push("stateSamples: must be >= 1".into());
            }
            if i == 0 {
                errs.push("innerSamples: must be >= 1".into());
            }
            (s, i)
        } else {
            (0, 0)
        };

        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        Ok(ResolvedSpec {
            kind,
            n,
            k,
            q,
            c,
            alpha,
            beta,
            mu,
            a,
            particles,
            replicas,
            pilot_replicas,
            burn_in,
            r_grid,
            master_seed: self.master_seed.unwrap_or(DEFAULT_MASTER_SEED),
            output_path: self.output_path.clone(),
            seed_matrix: if kind.accepts(Field::SeedMatrix) {
                self.seed_matrix.unwrap_or_default()
            } else {
                SeedMatrixKind::Goe
            },
            state_samples,
            inner_samples,
        })
    }

    /// `q` either directly or as `1 - c / n^alpha`. The tail bounds need
    /// `(c, alpha)`; a direct `q` is read with `alpha = 1/2`.
    fn resolve_asymmetry(
        &self,
        kind: ExperimentKind,
        n: usize,
        errs: &mut Vec<String>,
    ) -> (Option<f64>, Option<f64>, Option<f64>) {
        if !kind.accepts(Field::Q) {
            return (None, None, None);
        }
        let nf = n as f64;
        let (def_c, def_alpha) = match kind {
            ExperimentKind::BlockingAudit => (-20.0 * 0.6f64.ln(), 1.0),
            _ => (1.0, 0.5),
        };
        let scaling_given = self.c.is_some() || self.alpha.is_some();
        let (q, c, alpha) = match self.q {
            Some(q) if scaling_given => {
                errs.push(format!(
                    "q: give either q or (c, alpha), not both (q = {q})"
                ));
                return (None, None, None);
            }
            Some(q) => {
                let alpha = def_alpha;
                (q, (1.0 - q) * nf.powf(alpha), alpha)
            }
            None => {
                let c = self.c.unwrap_or(def_c);
                let alpha = self.alpha.unwrap_or(def_alpha);
                if !(c > 0.0 && c.is_finite()) {
                    errs.push(format!("c: must be positive, got {c}"));
                    return (None, None, None);
                }
                let alpha_ok = if kind == ExperimentKind::BlockingAudit {
                    alpha > 0.0 && alpha <= 1.0
                } else {
                    alpha > 0.0 && alpha < 1.0
                };
                if !alpha_ok {
                    errs.push(format!("alpha: out of range, got {alpha}"));
                    return (None, None, None);
                }
                (1.0 - c / nf.powf(alpha), c, alpha)
            }
        };
        let strict = matches!(kind, ExperimentKind::AsepMidpoint | ExperimentKind::AsepLis);
        let ok = q > 0.0 && (q < 1.0 || (!strict && q == 1.0));
        if !ok {
            let range = if strict { "(0, 1)" } else { "(0, 1]" };
            errs.push(format!("q: must lie in {range}, got {q}"));
        }
        (Some(q), Some(c), Some(alpha))
    }

    fn present_fields(&self) -> [(Field, bool); 18] {
        [
            (Field::N, self.n.is_some()),
            (Field::K, self.k.is_some()),
            (Field::Q, self.q.is_some()),
            (Field::C, self.c.is_some()),
            (Field::Alpha, self.alpha.is_some()),
            (Field::Beta, self.beta.is_some()),
            (Field::Mu, self.mu.is_some()),
            (Field::A, self.a.is_some()),
            (Field::Particles, self.particles.is_some()),
            (Field::Replicas, self.replicas.is_some()),
            (Field::PilotReplicas, self.pilot_replicas.is_some()),
            (Field::BurnIn, self.burn_in.is_some()),
            (Field::RGrid, self.r_grid.is_some()),
            (Field::MasterSeed, self.master_seed.is_some()),
            (Field::OutputPath, self.output_path.is_some()),
            (Field::SeedMatrix, self.seed_matrix.is_some()),
            (Field::StateSamples, self.state_samples.is_some()),
            (Field::InnerSamples, self.inner_samples.is_some()),
        ]
    }
}

/// `count` evenly spaced points `0, step, ..., (count - 1) step`.
pub fn uniform_grid(step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64 * step).collect()
}

fn default_grid(kind: ExperimentKind) -> Vec<f64> {
    match kind {
        ExperimentKind::AsepMidpoint => uniform_grid(1.0, 21),
        ExperimentKind::AsepLis => uniform_grid(2.0, 21),
        // 0, 0.05, ..., 0.5 written exactly rather than accumulated
        _ => (0..=10).map(|i| i as f64 / 20.0).collect(),
    }
}
