use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use cs_gesture::pipeline::{
    evaluate, load_model, save_model, sweep_csv, sweep_m, train, write_centers, write_synthetic,
    Extractor, GestureModel, Manifest, PipelineConfig, Recognizer, ServerMessage, Server,
    SweepScenario,
};
use cs_gesture::sensing::load_frame_sequence;
use cs_gesture::synth::{gen_dataset, read_truth, Canvas, DatasetSpec, Split};
use cs_gesture::tseries::{CenterSeq, Point};
use cs_gesture::{Error, Result};

#[derive(Parser)]
#[command(name = "csgesture", version, about = "Compressed-domain gesture recognition toolkit")]
struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the code matrix and clustering seeds, and seeds generators.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Model file to write (train) or read (eval, run, serve).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic dataset of PGM frame directories.
    Synth(SynthArgs),
    /// Extract motion centers from a frame directory.
    Extract {
        frames: PathBuf,
        /// Output center file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train a model from the train split of a manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Evaluate a model on the test and unspecified splits of a manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Stream a frame directory through the recognizer, printing wire messages.
    Run { frames: PathBuf },
    /// Center error versus measurement count, as CSV.
    #[command(name = "sweep-m")]
    SweepM(SweepArgs),
    /// Serve recognition over WebSocket.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8765")]
        addr: String,
        /// Exit after serving this many connections.
        #[arg(long)]
        max_connections: Option<usize>,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 50)]
    train: usize,
    #[arg(long, default_value_t = 20)]
    test: usize,
    #[arg(long, default_value_t = 50)]
    unspecified: usize,
    #[arg(long, default_value_t = 30)]
    min_duration: usize,
    #[arg(long, default_value_t = 46)]
    max_duration: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Frame directory; a synthetic Z gesture is generated when absent. A
    /// `truth.txt` next to the frames adds a ground-truth error column.
    #[arg(long)]
    frames: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "50,100,150,200,250,300")]
    ms: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Length of the synthetic gesture in frames.
    #[arg(long, default_value_t = 80)]
    duration: usize,
    /// Pixel noise of the synthetic gesture.
    #[arg(long, default_value_t = 24.0)]
    noise: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.phi_seed = s;
        cfg.kmeans_seed = s;
    }
    let model_path = || {
        cli.model
            .clone()
            .ok_or_else(|| Error::Config("--model <path> is required".into()))
    };
    let load = || -> Result<Arc<GestureModel>> { Ok(Arc::new(load_model(&model_path()?)?)) };

    match cli.command {
        Command::Synth(a) => synth(&a, &cfg, cli.seed.unwrap_or(0)),
        Command::Extract { frames, output } => {
            let records = Extractor::new(&cfg)?.records(&load_frame_sequence(&frames)?)?;
            let out = writer(output.as_deref())?;
            write_centers(out, &records)
        }
        Command::Train { manifest } => {
            let path = model_path()?;
            let manifest = Manifest::load(&manifest)?;
            let data = manifest.split(Split::Train).resolve(&Extractor::new(&cfg)?)?;
            let model = train(&data, &cfg)?;
            save_model(&model, &path)?;
            eprintln!(
                "trained {} classes on {} samples (tau = {}), wrote {}",
                model.classes.len(),
                data.len(),
                model.tau(),
                path.display()
            );
            Ok(())
        }
        Command::Eval { manifest, json } => {
            let model = load()?;
            let manifest = Manifest::load(&manifest)?;
            let ex = Extractor::new(&model.config)?;
            let test = manifest.split(Split::Test).resolve(&ex)?;
            let unspecified: Vec<CenterSeq> = manifest
                .split(Split::Unspecified)
                .resolve(&ex)?
                .into_iter()
                .map(|(_, s)| s)
                .collect();
            let report = evaluate(&model, &test, &unspecified)?;
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{report}");
            }
            Ok(())
        }
        Command::Run { frames } => {
            let model = load()?;
            let mut rec = Recognizer::new(model)?;
            let mut out = BufWriter::new(io::stdout().lock());
            for frame in load_frame_sequence(&frames)? {
                let step = rec.push(frame)?;
                if let Some(c) = &step.center {
                    writeln!(out, "{}", ServerMessage::center(c).to_json())?;
                }
                if let Some(e) = &step.event {
                    writeln!(out, "{}", ServerMessage::event(e).to_json())?;
                }
            }
            if let Some(e) = rec.finish()? {
                writeln!(out, "{}", ServerMessage::event(&e).to_json())?;
            }
            out.flush()?;
            Ok(())
        }
        Command::SweepM(a) => sweep(&a, &cfg, cli.seed.unwrap_or(1)),
        Command::Serve { addr, max_connections } => {
            let server = Server::new(load()?)?;
            let listener = Server::bind(addr.as_str())?;
            println!("listening on ws://{}", listener.local_addr()?);
            io::stdout().flush()?;
            server.run(listener, max_connections)
        }
    }
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn synth(a: &SynthArgs, cfg: &PipelineConfig, seed: u64) -> Result<()> {
    let spec = DatasetSpec {
        train_per_class: a.train,
        test_per_class: a.test,
        unspecified: a.unspecified,
        duration: (a.min_duration, a.max_duration),
        seed,
        canvas: Canvas {
            width: cfg.width,
            height: cfg.height,
            block: cfg.block,
            ..Canvas::default()
        },
        ..Default::default()
    };
    let samples = gen_dataset(&spec)?;
    let manifest = write_synthetic(&a.out, &samples, spec.intensity)?;
    eprintln!(
        "wrote {} samples and {}",
        manifest.entries.len(),
        a.out.join("manifest.txt").display()
    );
    Ok(())
}

fn sweep(a: &SweepArgs, cfg: &PipelineConfig, seed: u64) -> Result<()> {
    let (frames, truth) = match &a.frames {
        Some(dir) => {
            let frames = load_frame_sequence(dir)?;
            let truth_path = dir.join("truth.txt");
            let truth = if truth_path.is_file() {
                Some(read_truth(&truth_path)?.into_iter().map(|(p, _)| p).collect::<Vec<Point>>())
            } else {
                None
            };
            (frames, truth)
        }
        None => {
            let scenario = SweepScenario {
                duration: a.duration,
                noise_sigma: a.noise,
                seed,
                ..Default::default()
            };
            let (frames, truth) = scenario.generate(cfg)?;
            (frames, Some(truth))
        }
    };
    let rows = sweep_m(&frames, cfg, &a.ms, a.trials, truth.as_deref())?;
    let mut out = writer(a.output.as_deref())?;
    out.write_all(sweep_csv(&rows).as_bytes())?;
    out.flush()?;
    Ok(())
}
