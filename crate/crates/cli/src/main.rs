use clap::{Args, Parser, Subcommand};
use miura_cli::config::{RunConfig, SurfaceConfig};
use miura_cli::experiments::{self, Drop, TrendSummary, ABLATION_CAP};
use miura_cli::export::{self, csv_string, write_file};
use miura_cli::run::{self, Metrics};
use miura_cli::{presets, CliError, Result};
use miura_core::unfold;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "miura", version, about = "Inverse design of surface-aligned Miura-ori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one pattern and export meshes, drawings, metrics and a manifest.
    Run(ConfigArgs),
    /// Compare the full objective with one energy term removed.
    Ablate {
        /// Term to drop: length, mu or center.
        #[arg(long)]
        drop: String,
        /// Iteration cap for both runs.
        #[arg(long, default_value_t = ABLATION_CAP)]
        cap: usize,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// One run per offset epsilon.
    SweepEpsilon {
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1])]
        values: Vec<f64>,
        /// Concurrent runs (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// One run per quad count at fixed epsilon.
    SweepResolution {
        #[arg(long, value_delimiter = ',', default_values_t = [288, 392, 512, 648, 800, 1800, 3200])]
        counts: Vec<usize>,
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Unfold a planar-quad OBJ and write the crease pattern.
    Develop {
        obj: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: usize,
        /// Largest planarity residual accepted per quad.
        #[arg(long, default_value_t = unfold::DEFAULT_PLANARITY_GATE)]
        gate: f64,
        #[arg(long, default_value = "develop")]
        out: PathBuf,
    },
    /// Re-derive the metrics of a run directory from its exported meshes.
    Report { dir: PathBuf },
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// TOML run configuration; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the five-surface study settings for this surface.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    surface: Option<String>,
    #[arg(long, conflicts_with = "dims")]
    quads: Option<usize>,
    /// Quad rows and columns, e.g. `24,12`.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<[usize; 2]>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    skew_ratio: Option<f64>,
    #[arg(long)]
    fill: Option<f64>,
    #[arg(long)]
    rho_length: Option<f64>,
    #[arg(long)]
    rho_mu: Option<f64>,
    #[arg(long)]
    rho_center: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    no_continuation: bool,
    #[arg(long)]
    no_damping: bool,
    /// Sequential assembly.
    #[arg(long)]
    sequential: bool,
    /// Sequential, without timestamps or timings, for byte-identical output.
    #[arg(long)]
    reproducible: bool,
    #[arg(long)]
    seed_quad: Option<usize>,
    /// Output directory; takes precedence over MIURA_OUT_DIR and the config file.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(p)) => presets::study(p)?,
            (None, None) => RunConfig::default(),
        };
        cfg.resolve_output_dir();
        if let Some(kind) = &self.surface {
            if *kind != cfg.surface.kind {
                cfg.surface = SurfaceConfig {
                    kind: kind.clone(),
                    domain: cfg.surface.domain,
                    ..SurfaceConfig::default()
                };
            }
        }
        if let Some(q) = self.quads {
            cfg.pattern.quads = Some(q);
            cfg.pattern.dims = None;
        }
        if let Some(d) = self.dims {
            cfg.pattern.dims = Some(d);
        }
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut cfg.epsilon, self.epsilon);
        set(&mut cfg.pattern.skew_ratio, self.skew_ratio);
        set(&mut cfg.pattern.fill, self.fill);
        set(&mut cfg.weights.length, self.rho_length);
        set(&mut cfg.weights.mu, self.rho_mu);
        set(&mut cfg.weights.center, self.rho_center);
        if let Some(n) = self.max_iters {
            cfg.solver.max_iters = n;
        }
        cfg.solver.continuation &= !self.no_continuation;
        cfg.solver.damping &= !self.no_damping;
        cfg.solver.parallel &= !self.sequential;
        cfg.output.reproducible |= self.reproducible;
        if let Some(s) = self.seed_quad {
            cfg.output.seed_quad = s;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_metrics(label: &str, m: &Metrics) {
    let ce = m.consistency_error.map_or("-".to_string(), |c| format!("{c:.2e}"));
    println!(
        "{label}: {} after {} iterations ({} stages) planarity {:.2e} develop {:.2e} E_l {:.3e} mean|mu| {:.4} max|mu| {:.4} fold-overs {} consistency {ce}",
        m.status, m.iterations, m.stages, m.max_planarity, m.max_develop, m.e_length, m.mean_mu, m.max_mu, m.foldovers
    );
}

fn print_trend(t: &TrendSummary) {
    for ((v, mu), ok) in t.values.iter().zip(&t.mean_mu).zip(&t.converged) {
        println!("{} = {v}: mean|mu| {mu:.4}{}", t.parameter, if *ok { "" } else { " (not converged)" });
    }
    let verdict = match (t.compared, t.holds) {
        (None, _) => "not tested".to_string(),
        (Some(_), true) => "holds".to_string(),
        (Some(_), false) => "does not hold".to_string(),
    };
    println!("trend {}: {verdict}", t.expected);
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let r = run::execute(&cfg)?;
            print_metrics(&cfg.surface.kind, &r.manifest.metrics);
            println!("artifacts in {}", r.dir.display());
            r.check()
        }
        Command::Ablate { drop, cap, config } => {
            let drop = Drop::parse(&drop)?;
            let cfg = config.resolve()?;
            let (report, full, dropped) = experiments::ablate(&cfg, drop, cap)?;
            print_metrics("full", &full.manifest.metrics);
            print_metrics(&format!("drop-{}", drop.as_str()), &dropped.manifest.metrics);
            println!("{}: {}", report.expected, if report.holds { "holds" } else { "does not hold" });
            Ok(())
        }
        Command::SweepEpsilon { values, jobs, config } => {
            let cfg = config.resolve()?;
            let (summary, _) = experiments::sweep_epsilon(&cfg, &values, jobs)?;
            print_trend(&summary);
            Ok(())
        }
        Command::SweepResolution { counts, jobs, config } => {
            let cfg = config.resolve()?;
            let (summary, _) = experiments::sweep_resolution(&cfg, &counts, jobs)?;
            print_trend(&summary);
            Ok(())
        }
        Command::Develop { obj, seed, gate, out } => {
            let mesh = export::read_obj(&obj)?;
            if seed >= mesh.quads.len() {
                return Err(CliError::Config(format!("seed {seed} out of range for {} quads", mesh.quads.len())));
            }
            let dev = unfold::develop(&mesh.positions, &mesh.quads, seed, gate)?;
            let iso = unfold::isometry_error(&dev, &mesh.positions, &mesh.quads);
            write_file(&out.join(run::UNFOLDED), &export::planar_obj_string(&dev.flat_positions, &mesh.quads))?;
            write_file(&out.join("unfolded.svg"), &export::crease_svg(&dev.flat_positions, &mesh.quads, &dev.creases))?;
            write_file(&out.join("creases.csv"), &csv_string(&export::crease_rows(&dev.creases))?)?;
            println!(
                "developed {} quads: consistency {:.3e}, isometry {:.3e}, artifacts in {}",
                mesh.quads.len(),
                dev.consistency_error,
                iso,
                out.display()
            );
            Ok(())
        }
        Command::Report { dir } => {
            let (_, derived, mismatches) = run::rederive(&dir)?;
            print_metrics("re-derived", &derived);
            if mismatches.is_empty() {
                println!("all metrics match the manifest within {:e}", run::REPORT_TOL);
                return Ok(());
            }
            for m in &mismatches {
                println!("{}: manifest {:e}, re-derived {:e}", m.name, m.manifest, m.derived);
            }
            Err(CliError::Artifact {
                path: dir.join(run::MANIFEST),
                msg: format!("{} metrics disagree with the exported meshes", mismatches.len()),
            })
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("miura: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn parse_dims(s: &str) -> std::result::Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts[..] {
        [r, c] => Ok([r.parse().map_err(|e| format!("rows: {e}"))?, c.parse().map_err(|e| format!("cols: {e}"))?]),
        _ => Err(format!("expected ROWS,COLS, got {s:?}")),
    }
}
