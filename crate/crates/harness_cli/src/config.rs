use std::path::{Path, PathBuf};

use conv_spectral::ConvArchitecture;
use inner_kernel::{gegenbauer_coeffs, InnerProductKernel, KernelDescriptor};
use serde::{Deserialize, Serialize};

use crate::target::{build_target, TargetSpec};
use crate::HarnessError;

/// Architectures of a learning-curve experiment, built from the shared `(d, q, omega, delta)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchKind {
    /// Inner-product kernel on the whole signal.
    Fc,
    /// Full-size patches with global pooling.
    FcGp,
    /// Patches of size `q`, no pooling.
    Ck,
    /// Local average pooling of width `omega`.
    CkLp,
    /// Local average pooling of width `omega` followed by downsampling by `delta`.
    CkLpDs,
    /// Global pooling.
    CkGp,
}

impl ArchKind {
    pub fn build(self, d: usize, q: usize, omega: usize, delta: usize) -> Result<ConvArchitecture, HarnessError> {
        Ok(match self {
            Self::Fc => ConvArchitecture::fc(d),
            Self::FcGp => ConvArchitecture::fc_gp(d),
            Self::Ck => ConvArchitecture::ck(d, q)?,
            Self::CkLp => ConvArchitecture::ck_ap(d, q, omega)?,
            Self::CkLpDs => ConvArchitecture::ck_ap_ds(d, q, omega, delta)?,
            Self::CkGp => ConvArchitecture::ck_gp(d, q)?,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Fc => "FC",
            Self::FcGp => "FC-GP",
            Self::Ck => "CK",
            Self::CkLp => "CK-LP",
            Self::CkLpDs => "CK-LP-DS",
            Self::CkGp => "CK-GP",
        }
    }
}

/// How test risk is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskPolicy {
    /// Exact for patch kernels, sampled for full-size patches.
    Auto,
    Exact,
    MonteCarlo,
}

fn default_memory_cap_mb() -> usize {
    3072
}

fn default_mc_points() -> usize {
    20_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub d: usize,
    pub q: usize,
    pub omega: usize,
    #[serde(default = "one")]
    pub delta: usize,
    pub kernel: KernelDescriptor,
    pub lambda: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    pub architectures: Vec<ArchKind>,
    pub targets: Vec<TargetSpec>,
    pub n_grid: Vec<usize>,
    pub seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub risk: RiskPolicy,
    #[serde(default = "default_mc_points")]
    pub mc_points: usize,
    /// Largest Gram system (matrix plus factor) a single fit may allocate.
    #[serde(default = "default_memory_cap_mb")]
    pub memory_cap_mb: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one() -> usize {
    1
}

/// `count` integers spaced geometrically from `lo` to `hi`, rounded and deduplicated.
pub fn geometric_grid(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if count <= 1 || hi <= lo {
        return vec![lo];
    }
    let ratio = (hi as f64 / lo as f64).powf(1.0 / (count - 1) as f64);
    let mut out: Vec<usize> = (0..count).map(|i| (lo as f64 * ratio.powi(i as i32)).round() as usize).collect();
    out.dedup();
    out
}

/// Bytes held by one fit: the Gram matrix, its factor and solver workspace.
pub fn gram_system_bytes(n: usize) -> usize {
    3 * n * n * std::mem::size_of::<f64>()
}

impl ExperimentConfig {
    /// The experiment of the flagship figure: `d = 30`, `q = 10`, `omega = 5`,
    /// `h(t) = sum_{i=1}^5 0.2 t^i`, `lambda = 1e-6`, noiseless labels, five seeds.
    pub fn paper_figure_1() -> Self {
        Self {
            name: "paper_figure_1".into(),
            d: 30,
            q: 10,
            omega: 5,
            delta: 1,
            kernel: KernelDescriptor::experiment(),
            lambda: krr_lab::DEFAULT_RIDGE,
            noise_sigma: 0.0,
            architectures: vec![ArchKind::CkGp, ArchKind::CkLp, ArchKind::Ck, ArchKind::FcGp, ArchKind::Fc],
            targets: vec![TargetSpec::LfChain { l: 3 }, TargetSpec::HfChain { l: 3 }],
            n_grid: geometric_grid(10, 8000, 12),
            seeds: 5,
            master_seed: 0,
            risk: RiskPolicy::Auto,
            mc_points: default_mc_points(),
            memory_cap_mb: default_memory_cap_mb(),
            output: None,
        }
    }

    /// Local pooling with and without downsampling by `delta = omega` on a cyclic target.
    pub fn downsampling_curves() -> Self {
        Self {
            name: "downsampling_curves".into(),
            delta: 5,
            architectures: vec![ArchKind::CkLp, ArchKind::CkLpDs],
            targets: vec![TargetSpec::LfChain { l: 3 }],
            ..Self::paper_figure_1()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "paper_figure_1" => Some(Self::paper_figure_1()),
            "downsampling_curves" => Some(Self::downsampling_curves()),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 2] = ["paper_figure_1", "downsampling_curves"];

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let parse = |message: String| HarnessError::Parse { path: path.to_path_buf(), message };
        let cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| parse(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| parse(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn kernel(&self) -> Result<InnerProductKernel, HarnessError> {
        Ok(gegenbauer_coeffs(&self.kernel, self.q)?)
    }

    /// The kernel on full-size patches for `FC` and `FC-GP`.
    pub fn kernel_for(&self, arch: &ConvArchitecture) -> Result<InnerProductKernel, HarnessError> {
        Ok(gegenbauer_coeffs(&self.kernel, arch.q)?)
    }

    pub fn build_architectures(&self) -> Result<Vec<(ArchKind, ConvArchitecture)>, HarnessError> {
        self.architectures.iter().map(|&k| Ok((k, k.build(self.d, self.q, self.omega, self.delta)?))).collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return bad("n_grid must be nonempty with n >= 1".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("n_grid must be strictly increasing: {:?}", self.n_grid));
        }
        if self.seeds == 0 {
            return bad("seeds must be >= 1".into());
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise_sigma must be finite and >= 0, got {}", self.noise_sigma));
        }
        if self.architectures.is_empty() || self.targets.is_empty() {
            return bad("at least one architecture and one target are required".into());
        }
        if self.mc_points < 2 {
            return bad("mc_points must be >= 2".into());
        }
        for (_, arch) in self.build_architectures()? {
            self.kernel_for(&arch)?;
        }
        for t in &self.targets {
            build_target(t, self.d)?;
        }
        Ok(())
    }

    /// Fails before any allocation when the largest fit would exceed the memory cap.
    pub fn check_resources(&self) -> Result<(), HarnessError> {
        let n = *self.n_grid.last().expect("validated");
        let needed_mb = gram_system_bytes(n).div_ceil(1 << 20);
        if needed_mb > self.memory_cap_mb {
            return Err(HarnessError::ResourceGuard { n, needed_mb, cap_mb: self.memory_cap_mb });
        }
        Ok(())
    }
}
