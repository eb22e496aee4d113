use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rhdmm::cases::{case_by_name, CASE_NAMES};
use rhdmm::driver::{convergence_table, run, vcl_comparison, vcl_series_csv};
use rhdmm::io::{
    convergence_table_csv, convergence_table_text, emit_cutline, CutField, RunConfig, SnapshotFile,
};
use rhdmm::Error;

/// Relativistic hydrodynamics on adaptive moving meshes.
#[derive(Parser, Debug)]
#[command(name = "rhdmm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Overrides shared by the simulation subcommands.
#[derive(clap::Args, Debug, Default)]
struct Overrides {
    /// Case name (see `list-cases`)
    #[arg(long)]
    case: Option<String>,
    /// Cells per direction, e.g. 40 or 65x18x18
    #[arg(long = "n")]
    grid: Option<String>,
    #[arg(long)]
    flux: Option<String>,
    #[arg(long)]
    vcl: Option<String>,
    #[arg(long)]
    rk: Option<String>,
    /// on | off
    #[arg(long)]
    adapt: Option<String>,
    #[arg(long)]
    cfl: Option<String>,
    #[arg(long)]
    t_final: Option<String>,
    /// Any config key, as key=value; may be repeated
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation and write snapshots, entropy series and a summary
    Run {
        /// Configuration file
        config: Option<PathBuf>,
        #[command(flatten)]
        over: Overrides,
    },
    /// Error table over a sequence of grids
    Converge {
        config: Option<PathBuf>,
        #[command(flatten)]
        over: Overrides,
        /// Comma-separated cells per direction
        #[arg(long, default_value = "20,40,80")]
        grids: String,
        /// Also write the table as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sample a snapshot along a straight line
    Cutline {
        snapshot: PathBuf,
        /// Start point, comma separated
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// End point, comma separated
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// rho | lnrho | p | speed
        #[arg(long, default_value = "lnrho")]
        field: String,
        /// Output file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Jacobian discrepancy histories for VCL1/VCL2 with RK2/RK3
    VclCompare {
        config: Option<PathBuf>,
        #[command(flatten)]
        over: Overrides,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the available cases
    ListCases,
}

fn output_root() -> PathBuf {
    std::env::var_os("RHDMM_OUTPUT_ROOT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn config(path: Option<&Path>, over: &Overrides, default_case: &str) -> rhdmm::Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::for_case(over.case.as_deref().unwrap_or(default_case))?,
    };
    let mut pairs: Vec<(String, String)> = Vec::new();
    if path.is_some() {
        if let Some(c) = &over.case {
            pairs.push(("case".into(), c.clone()));
        }
    }
    for (k, v) in [
        ("grid", &over.grid),
        ("flux", &over.flux),
        ("vcl", &over.vcl),
        ("rk", &over.rk),
        ("adapt.enabled", &over.adapt),
        ("cfl", &over.cfl),
        ("t_final", &over.t_final),
    ] {
        if let Some(v) = v {
            pairs.push((k.into(), v.clone()));
        }
    }
    for kv in &over.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        pairs.push((k.trim().into(), v.trim().into()));
    }
    for (k, v) in pairs {
        cfg.set(&k, &v)
            .map_err(|m| Error::Invalid(format!("{k}: {m}")))?;
    }
    Ok(cfg)
}

fn parse_point(s: &str) -> rhdmm::Result<[f64; 3]> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == 2 => Ok([v[0], v[1], 0.0]),
        Ok(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
        _ => Err(Error::Invalid(format!("bad point '{s}'"))),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> rhdmm::Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent() {
                if !dir.as_os_str().is_empty() {
                    fs::create_dir_all(dir)?;
                }
            }
            fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn execute(cmd: Command) -> rhdmm::Result<()> {
    match cmd {
        Command::Run { config: path, over } => {
            let cfg = config(path.as_deref(), &over, "vortex")?;
            let s = run(&cfg, &output_root())?;
            println!(
                "{}: t = {} after {} steps (last dt {:e}), {:.2} s, output in {}",
                cfg.case,
                s.t,
                s.steps,
                s.last_dt,
                s.wall_seconds,
                s.out_dir.display()
            );
        }
        Command::Converge {
            config: path,
            over,
            grids,
            csv,
        } => {
            let cfg = config(path.as_deref(), &over, "vortex")?;
            let grids: Result<Vec<usize>, _> = grids
                .split(',')
                .map(|g| g.trim().parse::<usize>())
                .collect();
            let grids = grids
                .map_err(|_| Error::Invalid("--grids expects comma-separated integers".into()))?;
            let rows = convergence_table(&cfg, &grids, cfg.flux, cfg.adapt)?;
            print!("{}", convergence_table_text(&rows));
            if let Some(p) = csv {
                write_or_print(Some(&p), &convergence_table_csv(&rows))?;
            }
        }
        Command::Cutline {
            snapshot,
            from,
            to,
            samples,
            field,
            out,
        } => {
            let field: CutField = field.parse()?;
            let (a, b) = (parse_point(&from)?, parse_point(&to)?);
            if samples < 2 {
                return Err(Error::Invalid("--samples must be at least 2".into()));
            }
            let snap = SnapshotFile::read(&snapshot)?;
            let pts = emit_cutline(&snap, a, b, samples, field)?;
            let mut text = String::from("s,value\n");
            for (s, v) in pts {
                text.push_str(&format!("{s:?},{v:?}\n"));
            }
            write_or_print(out.as_deref(), &text)?;
        }
        Command::VclCompare {
            config: path,
            over,
            out,
        } => {
            let cfg = config(path.as_deref(), &over, "spherical-riemann")?;
            let series = vcl_comparison(&cfg)?;
            for s in &series {
                println!(
                    "{:>10}: max log10 |J - J~|_1 = {:.2}",
                    s.label(),
                    s.max_log10()
                );
            }
            let out =
                out.unwrap_or_else(|| output_root().join(&cfg.output_dir).join("vcl_compare.csv"));
            write_or_print(Some(&out), &vcl_series_csv(&series))?;
        }
        Command::ListCases => {
            for name in CASE_NAMES {
                let c = case_by_name(name)?;
                let n = &c.default_n[..c.dim];
                let grid = n
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join("x");
                println!(
                    "{:<18} {}D  grid {:<10} t_final {}",
                    c.name, c.dim, grid, c.t_final
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rhdmm::solver::FluxKind;

    #[test]
    fn points_and_overrides() {
        assert_eq!(parse_point("0.1,0.2").unwrap(), [0.1, 0.2, 0.0]);
        assert!(parse_point("1").is_err());
        let over = Overrides {
            grid: Some("24".into()),
            flux: Some("ec".into()),
            ..Default::default()
        };
        let cfg = config(None, &over, "vortex").unwrap();
        assert_eq!(cfg.grid, [24, 24, 1]);
        assert_eq!(cfg.flux, FluxKind::Ec);
        let bad = Overrides {
            set: vec!["flux".into()],
            ..Default::default()
        };
        assert!(config(None, &bad, "vortex").unwrap_err().is_config());
    }
}
