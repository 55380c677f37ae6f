use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use diracl2::algebra::{parse_blade, Blade};
use diracl2::field::{Bump, FieldError, Grid, TestFunction, WeightSpec};
use diracl2::verify::VERIFY_MAX_N;
use diracl2::Multivector;
use serde::Serialize;

use crate::CliError;

/// Largest nodes per axis for field commands, indexed by `n - 1`.
pub const GRID_CAPS: [usize; 3] = [257, 49, 17];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Verify,
    Solve,
    Kernel,
    Sweep,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Verify => "verify",
            Command::Solve => "solve",
            Command::Kernel => "kernel",
            Command::Sweep => "sweep",
        })
    }
}

/// Flags shared by every subcommand. Values stay strings until
/// [`RunConfig::resolve`] so flags and config files go through one parser.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Flat `key=value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<String>,
    /// Nodes per axis, one value or a comma list of n+1 values.
    #[arg(long)]
    pub grid: Option<String>,
    /// Box per axis, e.g. `-1:1,-1:1`.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// zero, quadratic0, aniso-quadratic or axial-poly:<axis>:<c0>,<c1>,...
    #[arg(long)]
    pub weight: Option<String>,
    /// Right-hand side, `bump:<blade>` such as `bump:e0` or `bump:e12`.
    #[arg(long)]
    pub rhs: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub rhs_scale: Option<String>,
    /// Bump center, comma list of n+1 coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub rhs_center: Option<String>,
    /// Gap between the bump support and the box, as a fraction of each side.
    #[arg(long)]
    pub margin: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub max_iter: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    /// Random polynomial fields for the calculus suite (default 100 for
    /// n <= 3, 10 for n = 4, 3 above).
    #[arg(long)]
    pub fields: Option<String>,
    /// Refinement levels for `kernel` and `sweep`.
    #[arg(long)]
    pub levels: Option<String>,
    /// Radius around the origin where the Cauchy kernel is zeroed.
    #[arg(long)]
    pub exclusion: Option<String>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub output: Option<String>,
    /// Where `solve` writes `u`: binary snapshot, or CSV when the name ends
    /// in `.csv`.
    #[arg(long)]
    pub snapshot: Option<String>,
}

const KEYS: [&str; 17] = [
    "n",
    "grid",
    "domain",
    "weight",
    "rhs",
    "rhs-scale",
    "rhs-center",
    "margin",
    "tol",
    "max-iter",
    "seed",
    "trials",
    "fields",
    "levels",
    "exclusion",
    "output",
    "snapshot",
];

impl Flags {
    fn entries(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("n", &self.n),
            ("grid", &self.grid),
            ("domain", &self.domain),
            ("weight", &self.weight),
            ("rhs", &self.rhs),
            ("rhs-scale", &self.rhs_scale),
            ("rhs-center", &self.rhs_center),
            ("margin", &self.margin),
            ("tol", &self.tol),
            ("max-iter", &self.max_iter),
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("fields", &self.fields),
            ("levels", &self.levels),
            ("exclusion", &self.exclusion),
            ("output", &self.output),
            ("snapshot", &self.snapshot),
        ]
    }
}

/// Reads a `key=value` file. Blank lines and `#` comments are skipped;
/// keys may use `-` or `_`.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("config line {}: unknown key `{}`", i + 1, k.trim())));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhsConfig {
    pub blade: String,
    pub scale: f64,
    pub center: Vec<f64>,
    pub margin: f64,
}

/// Fully resolved and validated run parameters, embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    pub grid: Vec<usize>,
    pub domain: Vec<[f64; 2]>,
    pub weight: String,
    pub rhs: RhsConfig,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub seed: u64,
    pub trials: u64,
    pub fields: u64,
    pub levels: usize,
    pub exclusion: Option<f64>,
    pub output: Option<String>,
    pub snapshot: Option<String>,
}

fn bad(key: &str, value: &str, why: impl fmt::Display) -> CliError {
    CliError::Config(format!("{key} = `{value}`: {why}"))
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| bad(key, value, e))
}

fn finite(key: &str, value: &str) -> Result<f64, CliError> {
    let v: f64 = number(key, value)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, value, "must be finite"))
    }
}

fn list<T>(key: &str, value: &str, item: impl Fn(&str) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(|s| match s.trim() {
            "" => Err(bad(key, value, "empty list item")),
            s => item(s),
        })
        .collect()
}

/// Default nodes per axis: the base of the ladder for `kernel` and `sweep`,
/// the solve grid otherwise.
fn default_nodes(command: Command, n: usize) -> usize {
    match (command, n) {
        (Command::Kernel, 1) => 65,
        (Command::Sweep, 1) => 33,
        (Command::Kernel | Command::Sweep, 2) => 13,
        (Command::Kernel | Command::Sweep, _) => 5,
        (_, 1) => 65,
        (_, 2) => 25,
        _ => 9,
    }
}

/// Nodes per axis after `levels - 1` refinements.
fn finest(nodes: usize, levels: usize) -> usize {
    (0..levels.saturating_sub(1)).fold(nodes, |m, _| 2 * (m - 1) + 1)
}

impl RunConfig {
    /// Merges defaults, the config file and flags (in that order of
    /// precedence) and validates every value.
    pub fn resolve(command: Command, flags: &Flags) -> Result<RunConfig, CliError> {
        let mut raw = match &flags.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        for (key, value) in flags.entries() {
            if let Some(v) = value {
                raw.insert(key.to_string(), v.clone());
            }
        }
        let get = |k: &str| raw.get(k).map(String::as_str);

        let n = match get("n") {
            Some(v) => number::<usize>("n", v)?,
            None => 1,
        };
        let max_n = if command == Command::Verify { VERIFY_MAX_N } else { GRID_CAPS.len() };
        if n == 0 || n > max_n {
            return Err(CliError::Config(format!("n = {n}: {command} supports 1 <= n <= {max_n}")));
        }
        let axes = n + 1;

        let levels = match get("levels") {
            Some(v) => number::<usize>("levels", v)?,
            None => 3,
        };
        if !(1..=8).contains(&levels) {
            return Err(bad("levels", &levels.to_string(), "must be between 1 and 8"));
        }

        let grid = match get("grid") {
            Some(v) => list("grid", v, |s| number::<usize>("grid", s))?,
            None => vec![default_nodes(command, n)],
        };
        let grid = match grid.len() {
            1 => vec![grid[0]; axes],
            l if l == axes => grid,
            l => return Err(CliError::Config(format!("grid: {l} values for {axes} axes"))),
        };
        if command != Command::Verify {
            let top = if matches!(command, Command::Kernel | Command::Sweep) { levels } else { 1 };
            let cap = GRID_CAPS[n - 1];
            for &m in &grid {
                if m < 3 {
                    return Err(CliError::Config(format!("grid: {m} nodes on an axis, need at least 3")));
                }
                if finest(m, top) > cap {
                    return Err(CliError::Config(format!(
                        "grid: {} nodes per axis at the finest level exceeds the cap {cap} for n = {n}",
                        finest(m, top)
                    )));
                }
            }
        }

        let domain = match get("domain") {
            Some(v) => list("domain", v, |s| {
                let (a, b) = s.split_once(':').ok_or_else(|| bad("domain", s, "expected low:high"))?;
                let (a, b) = (finite("domain", a)?, finite("domain", b)?);
                if a < b {
                    Ok([a, b])
                } else {
                    Err(bad("domain", s, "low must be below high"))
                }
            })?,
            None => vec![[-1.0, 1.0]],
        };
        let domain = match domain.len() {
            1 => vec![domain[0]; axes],
            l if l == axes => domain,
            l => return Err(CliError::Config(format!("domain: {l} intervals for {axes} axes"))),
        };

        let weight_text = get("weight").unwrap_or("quadratic0");
        let weight: WeightSpec = weight_text.parse().map_err(|e: FieldError| bad("weight", weight_text, e))?;
        if let WeightSpec::AxialPoly { axis, .. } = &weight {
            if *axis > n {
                return Err(bad("weight", weight_text, format!("axis {axis} does not exist for n = {n}")));
            }
        }

        let rhs_text = get("rhs").unwrap_or("bump:e0");
        let blade_text = rhs_text.strip_prefix("bump:").ok_or_else(|| bad("rhs", rhs_text, "expected bump:<blade>"))?;
        let blade = parse_blade(n, blade_text).map_err(|e| bad("rhs", rhs_text, e))?;
        let scale = match get("rhs-scale") {
            Some(v) => finite("rhs-scale", v)?,
            None => 1.0,
        };
        let center = match get("rhs-center") {
            Some(v) => list("rhs-center", v, |s| finite("rhs-center", s))?,
            None => domain.iter().map(|[a, b]| 0.5 * (a + b)).collect(),
        };
        if center.len() != axes {
            return Err(CliError::Config(format!("rhs-center: {} values for {axes} axes", center.len())));
        }
        if center.iter().zip(&domain).any(|(c, [a, b])| !(c > a && c < b)) {
            return Err(CliError::Config("rhs-center must lie strictly inside the domain".into()));
        }
        let margin = match get("margin") {
            Some(v) => finite("margin", v)?,
            None => 0.1,
        };
        if !(margin > 0.0 && margin < 0.5) {
            return Err(bad("margin", &margin.to_string(), "must lie strictly between 0 and 0.5"));
        }

        let tol = match get("tol") {
            Some(v) => finite("tol", v)?,
            None => diracl2::solver::DEFAULT_TOL,
        };
        if tol <= 0.0 {
            return Err(bad("tol", &tol.to_string(), "must be positive"));
        }
        let max_iter = match get("max-iter") {
            Some(v) => {
                let m = number::<usize>("max-iter", v)?;
                if m == 0 {
                    return Err(bad("max-iter", v, "must be positive"));
                }
                Some(m)
            }
            None => None,
        };
        let seed = match get("seed") {
            Some(v) => number::<u64>("seed", v)?,
            None => 7,
        };
        let positive = |key: &str, default: u64| -> Result<u64, CliError> {
            match get(key) {
                Some(v) => {
                    let t = number::<u64>(key, v)?;
                    if t == 0 {
                        Err(bad(key, v, "must be positive"))
                    } else {
                        Ok(t)
                    }
                }
                None => Ok(default),
            }
        };
        let trials = positive("trials", 1000)?;
        // symbolic products get expensive past n = 3
        let fields = positive("fields", match n {
            1..=3 => 100,
            4 => 10,
            _ => 3,
        })?;
        let exclusion = match get("exclusion") {
            Some(v) => {
                let r = finite("exclusion", v)?;
                if r <= 0.0 {
                    return Err(bad("exclusion", v, "must be positive"));
                }
                Some(r)
            }
            None => None,
        };
        if command == Command::Kernel && domain.iter().any(|[a, b]| !(*a < 0.0 && *b > 0.0)) {
            return Err(CliError::Config("kernel: the origin must lie inside the domain".into()));
        }

        Ok(RunConfig {
            command,
            n,
            grid,
            domain,
            weight: weight.to_string(),
            rhs: RhsConfig {
                blade: blade.to_string(),
                scale,
                center,
                margin,
            },
            tol,
            max_iter,
            seed,
            trials,
            fields,
            levels,
            exclusion,
            output: get("output").map(str::to_string),
            snapshot: get("snapshot").map(str::to_string),
        })
    }

    pub fn weight(&self) -> WeightSpec {
        self.weight.parse().expect("validated on resolve")
    }

    pub fn blade(&self) -> Blade {
        parse_blade(self.n, &self.rhs.blade).expect("validated on resolve")
    }

    /// The base grid.
    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(
            self.n,
            self.grid.clone(),
            self.domain.iter().map(|d| d[0]).collect(),
            self.domain.iter().map(|d| d[1]).collect(),
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    /// The right-hand side test function: a bump around `rhs.center` whose
    /// radius on each axis is `1 - 2 margin` times the distance to the
    /// nearer face, times `scale · e_A`.
    pub fn rhs_function(&self) -> TestFunction {
        let radii = self
            .rhs
            .center
            .iter()
            .zip(&self.domain)
            .map(|(c, [a, b])| (1.0 - 2.0 * self.rhs.margin) * (c - a).min(b - c))
            .collect();
        let bump = Bump::new(self.rhs.center.clone(), radii).expect("validated on resolve");
        let mut coeff = Multivector::zero(self.n).expect("n in range");
        coeff.coeffs_mut()[self.blade().mask() as usize] = self.rhs.scale;
        TestFunction::new(bump, coeff)
    }
}
