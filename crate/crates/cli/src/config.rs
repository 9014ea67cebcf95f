//! Run configuration: built-in defaults, overridden by a TOML config file,
//! overridden by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use soliton_jj::dynamics::{DEFAULT_ATOL, DEFAULT_RTOL, DEFAULT_SAMPLES};
use soliton_jj::functionals::DEFAULT_TOL;
use soliton_jj::{derive_params, Evaluator, FunctionalMode, Params};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SOLITON_JJ_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Flags shared by every subcommand. All optional so that unset flags fall
/// through to the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML config file with [params], [tolerances], [grid], [output] and [run] tables.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory (default: $SOLITON_JJ_OUT_DIR, else ./out).
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Functional evaluation: auto, quadrature, polynomial, quartic, sextic.
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<FunctionalMode>,
    /// Shorthand for --mode quadrature.
    #[arg(long, global = true)]
    pub exact: bool,
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    #[arg(long, global = true)]
    pub atol: Option<f64>,
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long, global = true, value_delimiter = ',')]
    pub formats: Option<Vec<Format>>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Interaction strength u.
    #[arg(long, global = true)]
    pub u: Option<f64>,
    /// Particle number N.
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// Separation Δ.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Ω/Λ.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega_ratio: Option<f64>,
    #[arg(long, global = true)]
    pub t_final: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub z_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub z_max: Option<f64>,
    #[arg(long, global = true)]
    pub z_points: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta_max: Option<f64>,
    #[arg(long, global = true)]
    pub theta_points: Option<usize>,
    #[arg(long, global = true)]
    pub delta_min: Option<f64>,
    #[arg(long, global = true)]
    pub delta_max: Option<f64>,
    #[arg(long, global = true)]
    pub delta_points: Option<usize>,
}

fn parse_mode(s: &str) -> Result<FunctionalMode, String> {
    FunctionalMode::parse(s).ok_or_else(|| format!("unknown mode '{s}' (auto, quadrature, polynomial, quartic, sextic)"))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    params: ParamsSection,
    #[serde(default)]
    tolerances: TolSection,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    output: OutputSection,
    #[serde(default)]
    run: RunSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsSection {
    u: Option<f64>,
    n: Option<u64>,
    delta: Option<f64>,
    omega_ratio: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TolSection {
    rtol: Option<f64>,
    atol: Option<f64>,
    quad_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    t_final: Option<f64>,
    samples: Option<usize>,
    z_min: Option<f64>,
    z_max: Option<f64>,
    z_points: Option<usize>,
    theta_min: Option<f64>,
    theta_max: Option<f64>,
    theta_points: Option<usize>,
    delta_min: Option<f64>,
    delta_max: Option<f64>,
    delta_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    formats: Option<Vec<Format>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    mode: Option<String>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub quad_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub t_final: f64,
    pub samples: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub z_points: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_points: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_points: usize,
}

impl Grid {
    pub fn z_values(&self) -> Vec<f64> {
        linspace(self.z_min, self.z_max, self.z_points)
    }

    pub fn theta_values(&self) -> Vec<f64> {
        linspace(self.theta_min, self.theta_max, self.theta_points)
    }

    pub fn delta_values(&self) -> Vec<f64> {
        linspace(self.delta_min, self.delta_max, self.delta_points)
    }
}

/// `n` evenly spaced points including both ends; a single point sits at `a`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Fully resolved configuration; echoed into `run.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub u: f64,
    pub n_particles: u64,
    pub delta: f64,
    pub omega_ratio: f64,
    pub grid: Grid,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    pub tolerances: Tolerances,
    pub mode: FunctionalMode,
    pub seed: u64,
}

/// Values a subcommand or figure bundle substitutes for the built-in
/// defaults; config file and flags still take precedence.
#[derive(Debug, Clone, Default)]
pub struct Preset {
    pub u: Option<f64>,
    pub n: Option<u64>,
    pub delta: Option<f64>,
    pub omega_ratio: Option<f64>,
    pub mode: Option<FunctionalMode>,
    pub t_final: Option<f64>,
    pub samples: Option<usize>,
    pub z_range: Option<(f64, f64, usize)>,
    pub theta_range: Option<(f64, f64, usize)>,
    pub delta_range: Option<(f64, f64, usize)>,
}

impl RunConfig {
    pub fn resolve(subcommand: &str, flags: &CommonArgs, preset: &Preset) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => load_file(p)?,
            None => FileConfig::default(),
        };
        let file_mode = match &file.run.mode {
            Some(s) => Some(parse_mode(s).map_err(CliError::Usage)?),
            None => None,
        };
        let flag_mode = if flags.exact { Some(FunctionalMode::Quadrature) } else { flags.mode };
        let (pz0, pz1, pzn) = preset.z_range.unwrap_or((-0.9, 0.9, 13));
        let (pt0, pt1, ptn) = preset.theta_range.unwrap_or((0.0, std::f64::consts::PI, 3));
        let (pd0, pd1, pdn) = preset.delta_range.unwrap_or((0.0, 1.5, 151));
        let g = &file.grid;
        let grid = Grid {
            t_final: pick(flags.t_final, g.t_final, preset.t_final, 200.0),
            samples: pick(flags.samples, g.samples, preset.samples, DEFAULT_SAMPLES),
            z_min: pick(flags.z_min, g.z_min, None, pz0),
            z_max: pick(flags.z_max, g.z_max, None, pz1),
            z_points: pick(flags.z_points, g.z_points, None, pzn),
            theta_min: pick(flags.theta_min, g.theta_min, None, pt0),
            theta_max: pick(flags.theta_max, g.theta_max, None, pt1),
            theta_points: pick(flags.theta_points, g.theta_points, None, ptn),
            delta_min: pick(flags.delta_min, g.delta_min, None, pd0),
            delta_max: pick(flags.delta_max, g.delta_max, None, pd1),
            delta_points: pick(flags.delta_points, g.delta_points, None, pdn),
        };
        let output_dir = flags
            .out_dir
            .clone()
            .or(file.output.dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let mut formats = flags
            .formats
            .clone()
            .or(file.output.formats.clone())
            .unwrap_or_else(|| vec![Format::Csv, Format::Json, Format::Svg]);
        formats.dedup();
        let tolerances = Tolerances {
            rtol: pick(flags.rtol, file.tolerances.rtol, None, DEFAULT_RTOL),
            atol: pick(flags.atol, file.tolerances.atol, None, DEFAULT_ATOL),
            quad_tol: pick(flags.quad_tol, file.tolerances.quad_tol, None, DEFAULT_TOL),
        };
        let cfg = RunConfig {
            subcommand: subcommand.to_string(),
            u: pick(flags.u, file.params.u, preset.u, 0.4),
            n_particles: pick(flags.n, file.params.n, preset.n, 10),
            delta: pick(flags.delta, file.params.delta, preset.delta, 0.0),
            omega_ratio: pick(flags.omega_ratio, file.params.omega_ratio, preset.omega_ratio, 0.0),
            grid,
            output_dir,
            formats,
            tolerances,
            mode: flag_mode.or(file_mode).or(preset.mode).unwrap_or_default(),
            seed: pick(flags.seed, file.run.seed, None, 0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        for (name, v) in [("rtol", t.rtol), ("atol", t.atol), ("quad-tol", t.quad_tol)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let g = &self.grid;
        if !(g.t_final > 0.0) || !g.t_final.is_finite() {
            return Err(CliError::Domain(format!("t-final must be positive, got {}", g.t_final)));
        }
        if g.samples < 2 {
            return Err(CliError::Domain("samples must be at least 2".into()));
        }
        for (name, a, b) in [
            ("z", g.z_min, g.z_max),
            ("theta", g.theta_min, g.theta_max),
            ("delta", g.delta_min, g.delta_max),
        ] {
            if !a.is_finite() || !b.is_finite() {
                return Err(CliError::Domain(format!("{name} grid bounds must be finite")));
            }
        }
        if g.z_min < -1.0 || g.z_max > 1.0 {
            return Err(CliError::Domain("z grid out of [-1,1]".into()));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(CliError::Domain("output directory is empty".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<Params, CliError> {
        Ok(derive_params(self.u, self.n_particles, self.omega_ratio, self.delta)?)
    }

    pub fn evaluator(&self) -> Evaluator<f64> {
        Evaluator::new(self.mode).with_tol(self.tolerances.quad_tol)
    }

    pub fn integrate_options(&self) -> soliton_jj::dynamics::IntegrateOptions<f64> {
        soliton_jj::dynamics::IntegrateOptions {
            rtol: self.tolerances.rtol,
            atol: self.tolerances.atol,
            samples: self.grid.samples,
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

fn pick<T: Copy>(flag: Option<T>, file: Option<T>, preset: Option<T>, default: T) -> T {
    flag.or(file).or(preset).unwrap_or(default)
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Domain(format!("config {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_ends() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[params]\ndelta = 0.5\nn = 20\n[run]\nmode = \"sextic\"\n").unwrap();
        let flags = CommonArgs {
            config: Some(path),
            delta: Some(0.9),
            out_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        let preset = Preset {
            n: Some(200),
            omega_ratio: Some(1.0),
            ..Default::default()
        };
        let c = RunConfig::resolve("x", &flags, &preset).unwrap();
        assert_eq!(c.delta, 0.9);
        assert_eq!(c.n_particles, 20);
        assert_eq!(c.omega_ratio, 1.0);
        assert_eq!(c.mode, FunctionalMode::Sextic);
        assert_eq!(c.u, 0.4);
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[params]\ndetla = 0.5\n").unwrap();
        let flags = CommonArgs {
            config: Some(path),
            ..Default::default()
        };
        assert!(matches!(RunConfig::resolve("x", &flags, &Preset::default()), Err(CliError::Domain(_))));
    }
}
