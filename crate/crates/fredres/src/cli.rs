//! Command-line front end. Every command writes a `#` header echoing the effective configuration,
//! then one or more tables (CSV) or a single JSON object with the same field names.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{JobConfig, Preset};
use crate::error::{Error, Result};
use crate::fredholm::determinant_converged;
use crate::resolvent::Branch;
use crate::resonances::{counting_function, estimate_pole_order, find_resonances_from_exclusion, ResonanceSet};
use crate::scattering::{born_term_diagnostics, smatrix_minus, smatrix_plus};
use crate::verify::{self, Check, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "fredres", version, about = "Fredholm determinants, S-matrix values and resonances for H = ∂³ + p∂ + ∂p + q")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML job configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Built-in coefficients when no config file is given.
    #[arg(long, global = true, value_enum)]
    pub preset: Option<PresetArg>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Nyström node count (overrides numerics.nodes).
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Overrides tolerances.zero and tolerances.determinant.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Zero,
    Box,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// D±(k) over the [grid] points, row-major.
    DetGrid {
        #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
        branch: BranchArg,
    },
    /// Certified zeros of D₊ in the [region] and the counting function with its upper bound.
    Resonances,
    /// S₊(k) (or S₋(k)) from the amplitudes next to the determinant ratio, over the [grid] points.
    Smatrix {
        #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
        branch: BranchArg,
    },
    /// Identity and bound checks; exits with status 1 if any check fails.
    Verify {
        /// "all" or a comma-separated list of kernels, determinant, scattering, identities, bounds, resonances.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Mutation hook: exchange e₊ and e₋ in the kernel coefficients.
        #[arg(long)]
        mutate_rotations: bool,
    },
    /// Born-term split of ψ₁Y₊⁰ψ₂ over the [born] angles and radii (requires p = 0).
    BornDiag,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::DetGrid { .. } => "det-grid",
            Command::Resonances => "resonances",
            Command::Smatrix { .. } => "smatrix",
            Command::Verify { .. } => "verify",
            Command::BornDiag => "born-diag",
        }
    }
}

/// Rendered output and process exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub status: i32,
}

/// Effective configuration: file or preset, then command-line overrides, then validation.
pub fn load_config(common: &Common) -> Result<JobConfig> {
    let mut cfg = match (&common.config, common.preset) {
        (Some(p), _) => JobConfig::load(p)?,
        (None, Some(p)) => JobConfig::preset(match p {
            PresetArg::Zero => Preset::Zero,
            PresetArg::Box => Preset::Box,
            PresetArg::Smooth => Preset::Smooth,
        }),
        (None, None) => return Err(Error::Config("give --config PATH or --preset NAME".into())),
    };
    if let Some(n) = common.nodes {
        cfg.numerics.nodes = n;
    }
    if let Some(t) = common.tol {
        cfg.tolerances.zero = t;
        cfg.tolerances.determinant = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<Output> {
    let cfg = load_config(&cli.common)?;
    let c = cfg.coefficients.build()?;
    let fmt = cli.common.format;
    let mut doc = Doc::new(cli.command.name(), &cfg, fmt);
    let mut status = 0;
    match &cli.command {
        Command::DetGrid { branch } => {
            let method = cfg.numerics.grid_method();
            let branch = to_branch(*branch);
            let tol = cfg.tolerances.determinant;
            let rows: Vec<DetRow> = cfg
                .grid
                .points()?
                .par_iter()
                .map(|&k| match determinant_converged(&c, k, branch, method) {
                    Ok((d, change)) => DetRow {
                        re: k.re,
                        im: k.im,
                        d_re: Some(d.re),
                        d_im: Some(d.im),
                        d_abs: Some(d.norm()),
                        rel_change: Some(change),
                        converged: change <= tol,
                        status: "ok".into(),
                    },
                    Err(e) => DetRow { re: k.re, im: k.im, d_re: None, d_im: None, d_abs: None, rel_change: None, converged: false, status: e.code().into() },
                })
                .collect();
            doc.table("points", &rows)?;
        }
        Command::Resonances => {
            let method = cfg.numerics.search_method();
            let set = find_resonances_from_exclusion(&c, cfg.region.region()?, cfg.tolerances.zero, method)?;
            let (m, m_note) = match estimate_pole_order(&c, PI / 12.0, method) {
                Ok(o) => (o.m, "estimated".to_string()),
                Err(e) => (3, format!("estimate failed ({e}); using the largest admissible order")),
            };
            doc.meta("region", format!("{} <= |k| <= {}, {} <= arg k <= {}", set.region.r_min, set.region.r_max, set.region.theta_min, set.region.theta_max));
            doc.meta("exclusion_radius", set.exclusion_radius.to_string());
            doc.meta("boundary_count", set.boundary_count.to_string());
            doc.meta("located", set.total_multiplicity().to_string());
            doc.meta("pole_order", format!("{m} ({m_note})"));
            doc.meta("closed_sector_defects", set.defects.len().to_string());
            doc.table("zeros", &resonance_rows(&set))?;
            let counting: Vec<CountingRow> = cfg
                .region
                .radii
                .iter()
                .map(|&r| counting_function(&set, c.gamma(), m, r).map(|v| CountingRow { r, count: v.count, bound: v.bound, bound_holds: v.bound_holds }))
                .collect::<Result<_>>()?;
            doc.table("counting", &counting)?;
        }
        Command::Smatrix { branch } => {
            let n = cfg.numerics.nodes;
            let plus = *branch == BranchArg::Plus;
            let rows: Vec<SRow> = cfg
                .grid
                .points()?
                .par_iter()
                .map(|&k| {
                    let v = if plus { smatrix_plus(&c, k, n) } else { smatrix_minus(&c, k, n) };
                    match v {
                        Ok(v) => SRow {
                            re: k.re,
                            im: k.im,
                            s_re: Some(v.s.re),
                            s_im: Some(v.s.im),
                            s_det_re: Some(v.s_det.re),
                            s_det_im: Some(v.s_det.im),
                            s_abs: Some(v.s.norm()),
                            discrepancy: Some(v.discrepancy),
                            status: "ok".into(),
                        },
                        Err(e) => SRow {
                            re: k.re,
                            im: k.im,
                            s_re: None,
                            s_im: None,
                            s_det_re: None,
                            s_det_im: None,
                            s_abs: None,
                            discrepancy: None,
                            status: e.code().into(),
                        },
                    }
                })
                .collect();
            doc.table("points", &rows)?;
        }
        Command::Verify { suite, mutate_rotations } => {
            let suites = verify::parse_suites(suite)?;
            let mut opts = VerifyOptions::from_config(&cfg)?;
            opts.swap_rotations = *mutate_rotations;
            if *mutate_rotations {
                doc.meta("mutation", "e+ and e- exchanged in kernel coefficients".into());
            }
            let checks = verify::run(&c, &suites, &opts);
            if verify::any_failed(&checks) {
                status = 1;
            }
            let rows: Vec<CheckRow> = checks.iter().map(CheckRow::from).collect();
            doc.table("checks", &rows)?;
        }
        Command::BornDiag => {
            let n = cfg.numerics.nodes;
            let pts: Vec<Complex64> = cfg
                .born
                .angles
                .iter()
                .flat_map(|&a| cfg.born.radii.iter().map(move |&r| Complex64::from_polar(r, a)))
                .collect();
            let rows: Vec<BornRow> = pts
                .par_iter()
                .map(|&k| match born_term_diagnostics(&c, k, n) {
                    Ok(d) => BornRow {
                        re: k.re,
                        im: k.im,
                        zeta_re: d.zeta.re,
                        zeta_im: d.zeta.im,
                        t_re: Some(d.t.re),
                        t_im: Some(d.t.im),
                        t1_re: Some(d.t1.re),
                        t1_im: Some(d.t1.im),
                        t2_re: Some(d.t2.re),
                        t2_im: Some(d.t2.im),
                        f_plus_zeta_abs: Some(d.f_plus_at_zeta.norm()),
                        f_minus_abs: Some(d.f_minus_at_estar_zeta.norm()),
                        regime: format!("{:?}", d.regime).to_lowercase(),
                        status: "ok".into(),
                    },
                    Err(e) => {
                        let zeta = (crate::resolvent::E_PLUS - 1.0) * k;
                        BornRow {
                            re: k.re,
                            im: k.im,
                            zeta_re: zeta.re,
                            zeta_im: zeta.im,
                            t_re: None,
                            t_im: None,
                            t1_re: None,
                            t1_im: None,
                            t2_re: None,
                            t2_im: None,
                            f_plus_zeta_abs: None,
                            f_minus_abs: None,
                            regime: String::new(),
                            status: e.code().into(),
                        }
                    }
                })
                .collect();
            doc.table("points", &rows)?;
        }
    }
    Ok(Output { text: doc.finish()?, status })
}

/// Parse arguments, run, write the output; returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: --threads: {e}");
            return 2;
        }
    }
    let out = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let written = match &cli.common.out {
        Some(p) => std::fs::write(p, &out.text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(out.text.as_bytes()).map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    out.status
}

fn to_branch(b: BranchArg) -> Branch {
    match b {
        BranchArg::Plus => Branch::Plus,
        BranchArg::Minus => Branch::Minus,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DetRow {
    pub re: f64,
    pub im: f64,
    pub d_re: Option<f64>,
    pub d_im: Option<f64>,
    pub d_abs: Option<f64>,
    /// Relative change of D under resolution doubling.
    pub rel_change: Option<f64>,
    pub converged: bool,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceRow {
    pub re: f64,
    pub im: f64,
    pub multiplicity: u32,
    pub residual: f64,
    pub certificate_radius: f64,
    pub newton_steps: u32,
    /// "zero" for a refined zero, "cluster" for an unresolved group.
    pub kind: &'static str,
}

pub fn resonance_rows(set: &ResonanceSet) -> Vec<ResonanceRow> {
    let row = |z: &crate::resonances::Resonance, kind| ResonanceRow {
        re: z.k.re,
        im: z.k.im,
        multiplicity: z.multiplicity,
        residual: z.residual,
        certificate_radius: z.certificate.radius,
        newton_steps: z.newton_steps,
        kind,
    };
    set.zeros.iter().map(|z| row(z, "zero")).chain(set.clusters.iter().map(|z| row(z, "cluster"))).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CountingRow {
    pub r: f64,
    pub count: i64,
    pub bound: f64,
    pub bound_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SRow {
    pub re: f64,
    pub im: f64,
    pub s_re: Option<f64>,
    pub s_im: Option<f64>,
    /// S from the determinant ratio.
    pub s_det_re: Option<f64>,
    pub s_det_im: Option<f64>,
    pub s_abs: Option<f64>,
    pub discrepancy: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub id: String,
    pub suite: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub status: String,
    pub note: String,
}

impl From<&Check> for CheckRow {
    fn from(c: &Check) -> Self {
        Self { id: c.id.clone(), suite: c.suite.name(), residual: c.residual, tolerance: c.tolerance, status: c.status.to_string(), note: c.note.clone() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BornRow {
    pub re: f64,
    pub im: f64,
    pub zeta_re: f64,
    pub zeta_im: f64,
    pub t_re: Option<f64>,
    pub t_im: Option<f64>,
    pub t1_re: Option<f64>,
    pub t1_im: Option<f64>,
    pub t2_re: Option<f64>,
    pub t2_im: Option<f64>,
    pub f_plus_zeta_abs: Option<f64>,
    pub f_minus_abs: Option<f64>,
    pub regime: String,
    pub status: String,
}

/// Output assembly: header block, metadata and named tables.
struct Doc {
    fmt: Format,
    command: &'static str,
    config: JobConfig,
    meta: Vec<(String, String)>,
    csv_tables: Vec<(String, String)>,
    json_tables: serde_json::Map<String, serde_json::Value>,
}

impl Doc {
    fn new(command: &'static str, cfg: &JobConfig, fmt: Format) -> Self {
        Self { fmt, command, config: cfg.clone(), meta: Vec::new(), csv_tables: Vec::new(), json_tables: serde_json::Map::new() }
    }

    fn meta(&mut self, key: &str, value: String) {
        self.meta.push((key.into(), value));
    }

    fn table<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        match self.fmt {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in rows {
                    w.serialize(r).map_err(|e| Error::Config(format!("csv: {e}")))?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
                self.csv_tables.push((name.into(), String::from_utf8(bytes).expect("csv output is utf-8")));
            }
            Format::Json => {
                let v = serde_json::to_value(rows).map_err(|e| Error::Config(format!("json: {e}")))?;
                self.json_tables.insert(name.into(), v);
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<String> {
        match self.fmt {
            Format::Csv => {
                let mut s = format!("# fredres {} {}\n# config:\n", env!("CARGO_PKG_VERSION"), self.command);
                for line in self.config.to_toml().lines() {
                    s.push_str("#   ");
                    s.push_str(line);
                    s.push('\n');
                }
                for (k, v) in &self.meta {
                    s.push_str(&format!("# {k} = {v}\n"));
                }
                let many = self.csv_tables.len() > 1;
                for (i, (name, body)) in self.csv_tables.iter().enumerate() {
                    if many {
                        if i > 0 {
                            s.push('\n');
                        }
                        s.push_str(&format!("# table: {name}\n"));
                    }
                    s.push_str(body);
                }
                Ok(s)
            }
            Format::Json => {
                let mut root = serde_json::Map::new();
                root.insert("command".into(), self.command.into());
                root.insert("version".into(), env!("CARGO_PKG_VERSION").into());
                root.insert("config".into(), serde_json::to_value(&self.config).map_err(|e| Error::Config(format!("json: {e}")))?);
                let meta: serde_json::Map<String, serde_json::Value> = self.meta.into_iter().map(|(k, v)| (k, v.into())).collect();
                root.insert("meta".into(), meta.into());
                for (k, v) in self.json_tables {
                    root.insert(k, v);
                }
                let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(root)).map_err(|e| Error::Config(format!("json: {e}")))?;
                s.push('\n');
                Ok(s)
            }
        }
    }
}
