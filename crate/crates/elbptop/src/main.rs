use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use elbptop_core::preprocess::TimParams;
use elbptop::{fusion_search, run_pipeline, synth_generate, DatasetManifest, RunConfig, RunReport, SynthSpec};

#[derive(Parser)]
#[command(name = "elbptop", version, about = "Micro-expression recognition with ELBPTOP descriptors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
    /// Run configuration (JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration: casme2, smic or samm.
    #[arg(long)]
    preset: Option<String>,
    /// Feature cache directory, overriding the config.
    #[arg(long, env = "ELBPTOP_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Resize frames to WIDTH HEIGHT.
    #[arg(long, num_args = 2, value_names = ["WIDTH", "HEIGHT"])]
    frame_size: Option<Vec<usize>>,
    /// Skip motion magnification.
    #[arg(long)]
    no_evm: bool,
    /// Magnification factor.
    #[arg(long)]
    alpha: Option<f64>,
    /// Skip temporal interpolation.
    #[arg(long, conflicts_with = "tim_length")]
    no_tim: bool,
    /// Interpolated clip length.
    #[arg(long)]
    tim_length: Option<usize>,
    /// Skip the whitened projection.
    #[arg(long)]
    no_wpca: bool,
    /// Retained projection dimension.
    #[arg(long)]
    wpca_k: Option<usize>,
    /// Fit the projection on all clips, test clips included.
    #[arg(long)]
    transductive: bool,
    /// Comma-separated penalty grid.
    #[arg(long, value_delimiter = ',')]
    c_grid: Option<Vec<f64>>,
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    renormalize_fused: bool,
}

impl RunArgs {
    fn load(&self) -> Result<(RunConfig, DatasetManifest)> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => bail!("either --config or --preset is required"),
        };
        if let Some(dir) = &self.cache_dir {
            config.cache_dir = Some(dir.clone());
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(size) = &self.frame_size {
            config.frame_size = Some([size[0], size[1]]);
        }
        if self.no_evm {
            config.evm = None;
        }
        if let Some(alpha) = self.alpha {
            match config.evm.as_mut() {
                Some(evm) => evm.alpha = alpha,
                None => bail!("--alpha needs magnification settings in the config"),
            }
        }
        if self.no_tim {
            config.tim = None;
        }
        if let Some(n) = self.tim_length {
            config.tim = Some(TimParams { target_length: n });
        }
        config.wpca.enabled &= !self.no_wpca;
        if self.wpca_k.is_some() {
            config.wpca.k = self.wpca_k;
        }
        config.wpca.transductive |= self.transductive;
        if let Some(grid) = &self.c_grid {
            config.c_grid = grid.clone();
        }
        config.standardize |= self.standardize;
        config.renormalize_fused |= self.renormalize_fused;
        config.validate()?;
        let manifest = DatasetManifest::load(&self.manifest)?;
        Ok((config, manifest))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract descriptors for every clip into the feature cache.
    Extract {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Extract (or reuse cached features) and run the evaluation protocol.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Rank every descriptor / plane-subset combination.
    FusionSearch {
        #[command(flatten)]
        run: RunArgs,
        /// Write the full ranking as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rows to print.
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Generate a synthetic labelled dataset with a manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 8)]
        subjects: usize,
        #[arg(long, default_value_t = 4)]
        clips: usize,
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 12)]
        length: usize,
    },
    /// Print a saved JSON report as a table.
    Report { path: PathBuf },
    /// Print a preset configuration as JSON.
    Preset { name: String },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract { run } => {
            let (config, manifest) = run.load()?;
            if config.cache_dir.is_none() {
                bail!("extract needs a cache directory (--cache-dir, ELBPTOP_CACHE_DIR or cache_dir in the config)");
            }
            let set = elbptop::extract_features(&config, &manifest)?;
            println!("{} clips x {} descriptors: {} computed, {} from cache", set.clips.len(), set.descriptors.len(), set.computed, set.cache_hits);
            for (d, h) in set.descriptors.iter().zip(&set.hashes) {
                println!("  {} -> {}", d.tag(), h);
            }
        }
        Command::Evaluate { run, report } => {
            let (config, manifest) = run.load()?;
            let result = run_pipeline(&config, &manifest)?;
            print!("{}", result.table());
            if let Some(path) = report {
                result.save(&path)?;
            }
        }
        Command::FusionSearch { run, out, top } => {
            let (config, manifest) = run.load()?;
            let ranking = fusion_search(&config, &manifest)?;
            print!("{}", ranking.table(top));
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&ranking)? + "\n";
                std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Synth { out, seed, classes, subjects, clips, size, length } => {
            let spec = SynthSpec { seed, classes, subjects, clips_per_subject: clips, width: size, height: size, length, ..SynthSpec::default() };
            let manifest = synth_generate(&spec, &out)?;
            println!("wrote {} clips and {}", manifest.entries.len(), out.join("manifest.json").display());
        }
        Command::Report { path } => print!("{}", RunReport::load(&path)?.table()),
        Command::Preset { name } => println!("{}", serde_json::to_string_pretty(&RunConfig::preset(&name)?)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::FAILURE
        }
    }
}
