use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chemostat_core::analysis::{
    attractor_bounds, attractor_bounds_sharpened, classify_with_bounds, DilutionBand,
};
use chemostat_core::noise::{sample_ou_path, OUParams};
use chemostat_core::TimeGrid;
use chemostat_harness::config::{parse_config, Format, ScenarioConfig};
use chemostat_harness::export::{
    export_trajectory, fmt17, output_path, write_json, write_summary_csv, TrajectoryRecord,
};
use chemostat_harness::presets::{load_preset, white_noise_twin, PRESETS};
use chemostat_harness::{compare_models, run_ensemble, run_scenario};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "chemostat",
    version,
    about = "Chemostat with wall growth under bounded and white noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset applied beneath the file (or alone)
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> anyhow::Result<ScenarioConfig> {
        Ok(match (&self.config, &self.preset) {
            (Some(path), preset) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                parse_config(&text, preset.as_deref())
                    .with_context(|| path.display().to_string())?
            }
            (None, Some(name)) => load_preset(name)?,
            (None, None) => bail!("give --config or --preset"),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in presets
    Presets,
    /// Sample one O-U path and write `t,z`
    OuSample {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Output file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every configured seed and report bounds, envelopes and positivity
    Simulate {
        #[command(flatten)]
        source: Source,
        /// Run only this seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_format)]
        format: Option<Format>,
    },
    /// Monte-Carlo ensemble over seeds split from a master seed
    Ensemble {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        master_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_format)]
        format: Option<Format>,
    },
    /// Attractor bounds for a dilution band
    Bounds {
        #[command(flatten)]
        source: Source,
        #[arg(long, requires = "b2")]
        b1: Option<f64>,
        #[arg(long, requires = "b1")]
        b2: Option<f64>,
        /// Sharpening index n >= 1
        #[arg(long)]
        sharpen: Option<u32>,
    },
    /// Extinction/persistence verdict with both margins
    Classify {
        #[command(flatten)]
        source: Source,
        #[arg(long, requires = "b2")]
        b1: Option<f64>,
        #[arg(long, requires = "b1")]
        b2: Option<f64>,
    },
    /// Deterministic, O-U and white-noise runs side by side on one seed
    Compare {
        /// O-U configuration
        #[arg(long)]
        config_a: Option<PathBuf>,
        #[arg(long)]
        preset_a: Option<String>,
        /// White-noise configuration; defaults to the twin of the first
        #[arg(long)]
        config_b: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse::<Format>().map_err(|e| e.to_string())
}

fn band_for(
    cfg: &ScenarioConfig,
    b1: Option<f64>,
    b2: Option<f64>,
) -> anyhow::Result<DilutionBand> {
    Ok(match (b1, b2) {
        (Some(b1), Some(b2)) => DilutionBand::new(b1, b2)?,
        _ => cfg.dilution_band()?,
    })
}

fn out_dir(cli: &Option<PathBuf>, cfg: &ScenarioConfig) -> Option<PathBuf> {
    cli.clone().or_else(|| cfg.output.dir.clone())
}

fn prefix(cfg: &ScenarioConfig) -> String {
    cfg.output
        .prefix
        .clone()
        .or_else(|| cfg.name.clone())
        .unwrap_or_else(|| "run".into())
}

fn print_json<T: serde::Serialize>(v: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn simulate(
    mut cfg: ScenarioConfig,
    seed: Option<u64>,
    dir: Option<PathBuf>,
    format: Format,
) -> anyhow::Result<()> {
    if let Some(seed) = seed {
        cfg.seeds = vec![seed];
    }
    for w in &cfg.warnings {
        eprintln!("warning: {w:?}");
    }
    let result = run_scenario(&cfg);
    let report = result.report(&cfg);
    if let Some(dir) = &dir {
        let prefix = prefix(&cfg);
        for run in result.completed() {
            let rec = TrajectoryRecord::new(
                &run.trajectory,
                run.noise.as_ref(),
                cfg.params.alpha,
                cfg.params.dilution,
            )?;
            export_trajectory(
                &rec,
                output_path(dir, &prefix, &format!("seed{}", run.seed), format),
                format,
            )?;
        }
        write_json(&report, output_path(dir, &prefix, "report", Format::Json))?;
    }
    if let Some(c) = &report.classification {
        println!("verdict: {:?}", c.verdict);
    }
    if let Some(e) = &report.analysis_error {
        println!("bounds unavailable: {e}");
    }
    for s in &report.seeds {
        match (&s.terminal, &s.failure) {
            (Some(y), _) => {
                let cert = s.envelopes.map(|e| {
                    if e.band_certified {
                        " certified"
                    } else {
                        " uncertified"
                    }
                });
                println!(
                    "seed {}: s={} x1={} x2={}{}",
                    s.seed,
                    fmt17(y.s),
                    fmt17(y.x1),
                    fmt17(y.x2),
                    cert.unwrap_or("")
                );
            }
            (None, Some(f)) => println!("seed {}: failed: {f}", s.seed),
            (None, None) => unreachable!(),
        }
    }
    Ok(())
}

fn write_ou(path: Option<&Path>, grid: TimeGrid, values: &[f64]) -> anyhow::Result<()> {
    let mut text = String::from("t,z\n");
    for (t, z) in grid.times().zip(values) {
        text.push_str(&format!("{},{}\n", fmt17(t), fmt17(*z)));
    }
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| p.display().to_string())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Presets => {
            for p in PRESETS {
                println!("{:<6} {}", p.name, p.summary);
            }
        }
        Command::OuSample {
            beta,
            gamma,
            seed,
            t_end,
            dt,
            out,
        } => {
            let grid = TimeGrid::spanning(0.0, t_end, dt)?;
            let path = sample_ou_path(OUParams::new(beta, gamma)?, seed, grid);
            write_ou(out.as_deref(), grid, path.values())?;
        }
        Command::Simulate {
            source,
            seed,
            out,
            format,
        } => {
            let cfg = source.load()?;
            let dir = out_dir(&out, &cfg);
            let format = format.unwrap_or(cfg.output.format);
            simulate(cfg, seed, dir, format)?;
        }
        Command::Ensemble {
            source,
            n,
            master_seed,
            out,
            format,
        } => {
            let cfg = source.load()?;
            let summary = run_ensemble(&cfg, n, master_seed)?;
            if let Some(dir) = out_dir(&out, &cfg) {
                let prefix = prefix(&cfg);
                match format.unwrap_or(cfg.output.format) {
                    Format::Csv => write_summary_csv(
                        &summary,
                        output_path(&dir, &prefix, "ensemble", Format::Csv),
                    )?,
                    Format::Json => write_json(
                        &summary,
                        output_path(&dir, &prefix, "ensemble", Format::Json),
                    )?,
                }
            }
            println!("completed {} of {}", summary.completed, summary.n);
            if let Some(r) = summary.band_certification_rate {
                println!("band certification rate {r}");
            }
            if let Some(c) = &summary.classification {
                println!("verdict: {:?}", c.verdict);
            }
        }
        Command::Bounds {
            source,
            b1,
            b2,
            sharpen,
        } => {
            let cfg = source.load()?;
            let band = band_for(&cfg, b1, b2)?;
            let report = match sharpen {
                Some(n) => attractor_bounds_sharpened(&cfg.params, &band, n)?,
                None => attractor_bounds(&cfg.params, &band)?,
            };
            print_json(&report)?;
        }
        Command::Classify { source, b1, b2 } => {
            let cfg = source.load()?;
            let band = band_for(&cfg, b1, b2)?;
            let bounds = attractor_bounds(&cfg.params, &band)?;
            print_json(&classify_with_bounds(&cfg.params, &bounds))?;
        }
        Command::Compare {
            config_a,
            preset_a,
            config_b,
            seed,
            out,
        } => {
            let a = Source {
                config: config_a,
                preset: preset_a,
            }
            .load()?;
            let b = match config_b {
                Some(path) => Source {
                    config: Some(path),
                    preset: None,
                }
                .load()?,
                None => white_noise_twin(&a),
            };
            let cmp = compare_models(&a, &b, seed)?;
            for c in &cmp.columns {
                if let Some(f) = &c.failure {
                    eprintln!("{}: failed: {f}", c.label);
                }
            }
            match out {
                Some(path) => cmp.export_csv(path)?,
                None => cmp.write_csv(&mut std::io::stdout().lock())?,
            }
        }
    }
    Ok(())
}
