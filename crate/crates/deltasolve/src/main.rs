//! `deltasolve` command-line driver: point-spectrum reports, field evolution
//! tables and dispersive-decay scans from a JSON run configuration.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use deltasolve::config::{EvolveMode, OutputFormat, RunConfig};
use deltasolve::dispersive::{self, weight};
use deltasolve::propagator;
use deltasolve::spectrum;
use deltasolve::Complex64;

#[derive(Parser)]
#[command(name = "deltasolve", about = "Schrödinger evolution with point interactions", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Negative eigenvalues and null vectors of the coupling matrix
    Spectrum(CommonArgs),
    /// Evolve the initial datum and tabulate field values
    Evolve(CommonArgs),
    /// Weighted-sup decay scan and rate fit
    Decay(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// JSON run configuration
    #[arg(long)]
    config: std::path::PathBuf,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Override the configured output format
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&CommonArgs, fn(&RunConfig) -> Result<String, deltasolve::EngineError>);
    let format_override;
    match &cli.command {
        Command::Spectrum(a) => {
            args = a;
            run = cmd_spectrum;
        }
        Command::Evolve(a) => {
            args = a;
            run = cmd_evolve;
        }
        Command::Decay(a) => {
            args = a;
            run = cmd_decay;
        }
    }
    format_override = args.format;

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut cfg = match RunConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(f) = format_override {
        cfg.output.format = f;
    }

    let rendered = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("numerical failure: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };

    let target = args
        .out
        .clone()
        .or_else(|| cfg.output.path.as_ref().map(std::path::PathBuf::from));
    match target {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, rendered) {
                eprintln!("config error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_CONFIG);
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(rendered.as_bytes());
        }
    }
    ExitCode::SUCCESS
}

/// 17-significant-digit float field.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<String, deltasolve::EngineError> {
    let interaction = cfg.interaction()?;
    let pairs = spectrum::find_eigenvalues(&interaction, spectrum::default_kappa_max(&interaction));
    match cfg.output.format {
        OutputFormat::Json => {
            #[derive(serde::Serialize)]
            struct Row {
                kappa: f64,
                energy: f64,
                multiplicity: usize,
                null_vectors: Vec<Vec<f64>>,
            }
            let rows: Vec<Row> = pairs
                .iter()
                .map(|p| Row {
                    kappa: p.kappa,
                    energy: p.energy,
                    multiplicity: p.multiplicity,
                    null_vectors: p.nullvecs.clone(),
                })
                .collect();
            Ok(serde_json::to_string_pretty(&serde_json::json!({ "eigenvalues": rows })).unwrap() + "\n")
        }
        OutputFormat::Csv => {
            let n = interaction.n();
            let mut out = String::new();
            out.push_str("kappa,energy,multiplicity,vector_index");
            for j in 0..n {
                out.push_str(&format!(",v{j}"));
            }
            out.push('\n');
            for p in &pairs {
                for (w, vec) in p.nullvecs.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{}",
                        fmt(p.kappa),
                        fmt(p.energy),
                        p.multiplicity,
                        w
                    ));
                    for v in vec {
                        out.push(',');
                        out.push_str(&fmt(*v));
                    }
                    out.push('\n');
                }
            }
            Ok(out)
        }
    }
}

struct EvolveRow {
    t: f64,
    x: [f64; 3],
    value: Complex64,
    second: Option<Complex64>,
    w: f64,
}

fn cmd_evolve(cfg: &RunConfig) -> Result<String, deltasolve::EngineError> {
    let interaction = cfg.interaction()?;
    let f = cfg.datum()?;
    let opts = cfg.evolve_options();
    let points = &cfg.evolve.points;
    let mode = cfg.evolve.mode;

    let mut rows: Vec<EvolveRow> = Vec::new();
    for &t in &cfg.time_grid {
        let primary: Vec<Complex64> = match mode {
            EvolveMode::Free => points.iter().map(|&p| propagator::free_evolve(&f, p, t)).collect(),
            EvolveMode::Spectral => {
                propagator::spectral_evolve_grid(&interaction, &f, points, t, &opts)?.values
            }
            EvolveMode::ClosedForm => {
                require_n1(&interaction)?;
                points
                    .iter()
                    .map(|&p| {
                        propagator::n1_evolve(
                            interaction.alpha(0),
                            interaction.center(0),
                            &f,
                            p,
                            t,
                            opts.continuous_only,
                            opts.tol,
                        )
                    })
                    .collect::<Result<_, _>>()?
            }
            EvolveMode::Full | EvolveMode::Both => {
                propagator::evolve_grid(&interaction, &f, points, t, &opts)?
            }
        };
        let secondary: Option<Vec<Complex64>> = if mode == EvolveMode::Both {
            require_n1(&interaction)?;
            // closed-form versus spectral cross-check columns; the primary
            // column above is the full evolution (closed-form path for N=1)
            Some(propagator::spectral_evolve_grid(&interaction, &f, points, t, &opts)?.values)
        } else {
            None
        };
        for (i, &p) in points.iter().enumerate() {
            rows.push(EvolveRow {
                t,
                x: p,
                value: primary[i],
                second: secondary.as_ref().map(|s| s[i]),
                w: weight(&interaction, p)?,
            });
        }
    }

    match cfg.output.format {
        OutputFormat::Json => {
            let json_rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    let mut v = serde_json::json!({
                        "t": r.t,
                        "x": r.x,
                        "re": r.value.re,
                        "im": r.value.im,
                        "abs": r.value.norm(),
                        "weight": r.w,
                    });
                    if let Some(s) = r.second {
                        v["re_spectral"] = s.re.into();
                        v["im_spectral"] = s.im.into();
                        v["rel_diff"] = ((r.value - s).norm() / s.norm().max(1e-300)).into();
                    }
                    v
                })
                .collect();
            Ok(serde_json::to_string_pretty(&serde_json::json!({ "rows": json_rows })).unwrap() + "\n")
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str("t,x0,x1,x2,re,im,abs,weight");
            if mode == EvolveMode::Both {
                out.push_str(",re_spectral,im_spectral,rel_diff");
            }
            out.push('\n');
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}",
                    fmt(r.t),
                    fmt(r.x[0]),
                    fmt(r.x[1]),
                    fmt(r.x[2]),
                    fmt(r.value.re),
                    fmt(r.value.im),
                    fmt(r.value.norm()),
                    fmt(r.w)
                ));
                if let Some(s) = r.second {
                    out.push_str(&format!(
                        ",{},{},{}",
                        fmt(s.re),
                        fmt(s.im),
                        fmt((r.value - s).norm() / s.norm().max(1e-300))
                    ));
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}

fn require_n1(interaction: &deltasolve::InteractionConfig) -> Result<(), deltasolve::EngineError> {
    if interaction.n() != 1 {
        return Err(deltasolve::EngineError::Domain(
            "closed-form mode requires a single center".into(),
        ));
    }
    Ok(())
}

fn cmd_decay(cfg: &RunConfig) -> Result<String, deltasolve::EngineError> {
    let interaction = cfg.interaction()?;
    let f = cfg.datum()?;
    let opts = cfg.evolve_options();
    let grid = cfg.grid_spec();
    let scan = dispersive::decay_scan(&interaction, &f, &cfg.time_grid, &grid, &opts)?;
    match cfg.output.format {
        OutputFormat::Json => {
            Ok(serde_json::to_string_pretty(&serde_json::json!({
                "slope": scan.record.slope,
                "constant": scan.record.constant,
                "r2": scan.record.r2,
                "c_theorem": scan.c_theorem,
                "weighted_l1": scan.weighted_l1,
                "rows": scan
                    .record
                    .times
                    .iter()
                    .zip(&scan.record.norms)
                    .map(|(t, n)| serde_json::json!({"t": t, "norm": n}))
                    .collect::<Vec<_>>(),
            }))
            .unwrap()
                + "\n")
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str("t,norm,slope,constant,r2,c_theorem\n");
            for (t, n) in scan.record.times.iter().zip(&scan.record.norms) {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt(*t),
                    fmt(*n),
                    fmt(scan.record.slope),
                    fmt(scan.record.constant),
                    fmt(scan.record.r2),
                    fmt(scan.c_theorem)
                ));
            }
            Ok(out)
        }
    }
}
