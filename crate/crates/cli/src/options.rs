use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    X1,
    X2,
    X3,
    Y1,
    Y2,
    Y3,
}

impl Window {
    pub fn kind(self) -> resoline::wavekernel::WindowKind {
        use resoline::wavekernel::WindowKind as W;
        match self {
            Self::X1 => W::X1,
            Self::X2 => W::X2,
            Self::X3 => W::X3,
            Self::Y1 => W::Y1,
            Self::Y2 => W::Y2,
            Self::Y3 => W::Y3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Function {
    Xhat,
    Yhat,
}

/// Every option any subcommand reads. Flags and config-file keys share the
/// same kebab-case names; a flag wins over the file, the file over the
/// subcommand's default.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Options {
    /// Subcommand the config file was written for; must match if present.
    #[arg(skip)]
    pub command: Option<String>,

    /// Potential JSON file.
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Second potential, sharing the right part of the first.
    #[arg(long)]
    pub potential2: Option<PathBuf>,
    /// Inverse problem JSON file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Potential the inverse result is scored against.
    #[arg(long)]
    pub truth: Option<PathBuf>,

    /// Main output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Second CSV output (the `Y` kernel for `kernels`).
    #[arg(long)]
    pub csv2: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,

    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub ngrid: Option<usize>,
    #[arg(long)]
    pub r_window: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub n_theta: Option<usize>,
    #[arg(long, value_enum)]
    pub window: Option<Window>,
    #[arg(long, value_enum)]
    pub function: Option<Function>,

    #[arg(long, allow_hyphen_values = true)]
    pub re_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub re_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub im_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub im_max: Option<f64>,
    #[arg(long)]
    pub n_re: Option<usize>,
    #[arg(long)]
    pub n_im: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub z_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z_im: Option<f64>,

    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_cells: Option<usize>,
    #[arg(long)]
    pub max_abs: Option<f64>,
    #[arg(long)]
    pub half_width: Option<f64>,

    /// Starting left-part values, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub init: Option<Vec<f64>>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr; $($field:ident),*) => {
        Options { $($field: $hi.$field.or($lo.$field)),* }
    };
}

impl Options {
    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: Options) -> Options {
        overlay!(self, lower;
            command, potential, potential2, spec, truth, out, csv, csv2, svg, radius, ngrid,
            r_window, r_max, cutoff, tolerance, n_theta, window, function, re_min, re_max,
            im_min, im_max, n_re, n_im, z_re, z_im, seed, max_cells, max_abs, half_width,
            init, max_iter)
    }

    pub fn from_file(path: &Path) -> Result<Options, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::input(path, e))
    }

    pub fn input_paths(&self) -> Vec<&Path> {
        [&self.potential, &self.potential2, &self.spec, &self.truth]
            .into_iter()
            .flatten()
            .map(|p| p.as_path())
            .collect()
    }

    pub fn output_paths(&self) -> Vec<&Path> {
        [&self.out, &self.csv, &self.csv2, &self.svg].into_iter().flatten().map(|p| p.as_path()).collect()
    }
}
