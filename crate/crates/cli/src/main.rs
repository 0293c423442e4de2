use std::path::PathBuf;

use anyhow::{bail, Context as _};
use clap::{Parser, Subcommand};
use hysterobeam_cli::{commands, presets, Context, RunConfig};

#[derive(Parser)]
#[command(
    name = "hysterobeam",
    version,
    about = "Cantilever beam with Bouc-Wen hysteretic damping"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset (see `hysterobeam presets`).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Overrides the configuration's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for snapshot generation.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Natural frequencies.
    Modes,
    /// Time integration of the full model.
    Simulate,
    /// Error against a reference over halving step sizes.
    Converge,
    /// Reduced order models.
    #[command(subcommand)]
    Rom(RomCommand),
    /// Lists the built-in presets.
    Presets,
}

#[derive(Subcommand)]
enum RomCommand {
    /// Snapshots, greedy point selection and projection.
    Build,
    /// Error of the stored model against the full model.
    Eval,
}

fn load(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => RunConfig::from_file(path)?,
        (None, Some(name)) => presets::load(name)?,
        (None, None) => bail!("either --config or --preset is required"),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    Ok(cfg)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if let Command::Presets = cli.command {
        for name in presets::names() {
            println!("{name}");
        }
        return Ok(());
    }
    let cfg = load(&cli)?;
    let ctx = Context::new(&cli.out, cli.workers);
    match cli.command {
        Command::Modes => {
            let r = commands::modes(&cfg, &ctx).context("modes")?;
            for (i, f) in r.frequencies.iter().enumerate() {
                println!("mode {}: {f:.4} Hz", i + 1);
            }
            println!("shortest period: {:.4e} s", r.shortest_period);
        }
        Command::Simulate => {
            let r = commands::simulate_cmd(&cfg, &ctx).context("simulate")?;
            print!("{}", r.summary(&cfg));
        }
        Command::Converge => {
            let r = commands::converge(&cfg, &ctx).context("converge")?;
            print!("{}", r.study.summary());
        }
        Command::Rom(RomCommand::Build) => {
            let r = commands::rom_build(&cfg, &ctx).context("rom build")?;
            println!(
                "selected {} points{}, kept {}; relative residual {:.3e}",
                r.selection.indices.len(),
                if r.selection.rank_deficient {
                    " (rank deficient)"
                } else {
                    ""
                },
                r.points,
                r.residual / r.target_norm
            );
            println!(
                "wrote {} and {}",
                r.snapshot_path.display(),
                r.rom_path.display()
            );
        }
        Command::Rom(RomCommand::Eval) => {
            let r = commands::rom_eval(&cfg, &ctx).context("rom eval")?;
            println!("baseline (zero output): {:.5e}", r.baseline);
            println!(
                "modal model without hysteresis feedback: {:.5e}",
                r.linear_modal
            );
            for (m, e) in &r.rows {
                println!("m = {m:>4}: E_rms = {e:.5e}");
            }
        }
        Command::Presets => unreachable!(),
    }
    Ok(())
}
