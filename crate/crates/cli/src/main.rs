use std::io::Write;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use minibrowser::engine::{
    self, benchmark, format_bench_table, parse_script, read_file, synth, EngineError, Page, PipelineOptions,
    DEFAULT_VIEWPORT,
};
use minibrowser::layout::LayoutStats;
use minibrowser::scheduler::{TraversalOptions, DEFAULT_CUTOFF};

#[derive(Parser)]
#[command(name = "engine", about = "Parallel layout engine for a small HTML/CSS subset")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Stylesheet applied before any <style> element; repeatable.
    #[arg(long = "css", value_name = "FILE")]
    css: Vec<String>,
    /// Layout workers; defaults to the available parallelism.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
    /// Subtrees at most this large are traversed by a single worker.
    #[arg(long = "parallel-cutoff", value_name = "K", default_value_t = DEFAULT_CUTOFF)]
    parallel_cutoff: usize,
    #[arg(long, value_name = "W", default_value_t = DEFAULT_VIEWPORT)]
    viewport: f64,
}

impl Common {
    fn traversal(&self) -> TraversalOptions {
        let mut t = TraversalOptions::default();
        if let Some(w) = self.workers {
            t.workers = w as usize;
        }
        t.cutoff = self.parallel_cutoff;
        t
    }

    fn stylesheets(&self) -> Result<Vec<String>, EngineError> {
        self.css.iter().map(|p| read_file(p)).collect()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Render a page to a display list, optionally a raster, or a dump.
    #[command(group(ArgGroup::new("dump").args(["dump_tokens", "dump_dom", "dump_style", "dump_flow", "dump_layout"])))]
    Render {
        page: String,
        #[command(flatten)]
        common: Common,
        /// Write the display list here instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<String>,
        /// Paint the display list into a binary PPM.
        #[arg(long, value_name = "FILE")]
        raster: Option<String>,
        #[arg(long)]
        dump_tokens: bool,
        #[arg(long)]
        dump_dom: bool,
        #[arg(long)]
        dump_style: bool,
        #[arg(long)]
        dump_flow: bool,
        #[arg(long)]
        dump_layout: bool,
        /// Print per-stage wall times to stderr.
        #[arg(long)]
        timings: bool,
    },
    /// Time the layout stage for several worker counts.
    Bench {
        #[arg(required = true)]
        pages: Vec<String>,
        #[arg(long = "css", value_name = "FILE")]
        css: Vec<String>,
        /// Comma-separated worker counts.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        workers: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_VIEWPORT)]
        viewport: f64,
    },
    /// Apply mutation commands, relayout incrementally, print layout dumps
    /// before and after.
    Mutate {
        page: String,
        #[arg(long, value_name = "FILE")]
        commands: String,
        #[command(flatten)]
        common: Common,
    },
    /// Write a synthetic page.
    Synth {
        /// Approximate number of flows.
        #[arg(long, default_value_t = 10_000)]
        flows: usize,
        #[arg(long, default_value_t = 8)]
        branching: usize,
        /// Emit a random page with this seed instead of a balanced tree.
        #[arg(long)]
        random: Option<u64>,
        /// Also write the matching stylesheet here.
        #[arg(long, value_name = "FILE")]
        css_out: Option<String>,
    },
}

fn write_file(path: &str, bytes: &[u8]) -> Result<(), EngineError> {
    std::fs::write(path, bytes).map_err(|e| EngineError::Io { path: path.to_string(), message: e.to_string() })
}

fn stdout(text: &str) -> Result<(), EngineError> {
    std::io::stdout()
        .write_all(text.as_bytes())
        .map_err(|e| EngineError::Io { path: "<stdout>".into(), message: e.to_string() })
}

fn stats_line(label: &str, s: &LayoutStats) -> String {
    format!(
        "# {label} visits: intrinsic {} width {} height {} total {}\n",
        s.intrinsic_visits,
        s.width_visits,
        s.height_visits,
        s.total()
    )
}

fn run(cli: Cli) -> Result<(), EngineError> {
    match cli.command {
        Command::Render {
            page,
            common,
            out,
            raster,
            dump_tokens,
            dump_dom,
            dump_style,
            dump_flow,
            dump_layout,
            timings,
        } => {
            let options =
                PipelineOptions { traversal: common.traversal(), viewport: common.viewport, raster: raster.is_some() };
            let output = engine::run_pipeline(&page, &common.css, options)?;
            for d in &output.page.diagnostics {
                eprintln!("warning: {d}");
            }
            if timings {
                for t in &output.timings {
                    eprintln!("{}\t{:.3}", t.stage.name(), t.elapsed.as_secs_f64() * 1000.0);
                }
            }
            if let Some(path) = &raster {
                let image = output.rendered.raster.as_ref().expect("raster requested");
                write_file(path, &image.to_ppm())?;
            }
            let p = &output.page;
            let dump = if dump_tokens {
                Some(output.tokens.iter().map(|t| format!("{t}\n")).collect::<String>())
            } else if dump_dom {
                Some(p.dom.dump())
            } else if dump_style {
                Some(p.styles.dump(&p.dom))
            } else if dump_flow {
                Some(p.flows.dump())
            } else if dump_layout {
                Some(p.dump_layout())
            } else {
                None
            };
            match (&out, dump) {
                (Some(path), dump) => {
                    write_file(path, output.rendered.json.as_bytes())?;
                    if let Some(d) = dump {
                        stdout(&d)?;
                    }
                }
                (None, Some(d)) => stdout(&d)?,
                (None, None) => stdout(&output.rendered.json)?,
            }
        }
        Command::Bench { pages, css, workers, reps, viewport } => {
            let sheets: Vec<String> = css.iter().map(|p| read_file(p)).collect::<Result<_, _>>()?;
            let mut rows = Vec::new();
            for page in &pages {
                let html = read_file(page)?;
                rows.push(benchmark(page, &html, &sheets, &workers, reps, viewport)?);
            }
            stdout(&format_bench_table(&rows))?;
        }
        Command::Mutate { page, commands, common } => {
            let html = read_file(&page)?;
            let css = common.stylesheets()?;
            let script = read_file(&commands)?;
            let (cmds, diags) = parse_script(&script);
            for d in &diags {
                eprintln!("warning: {commands}: {d}");
            }
            let mut p = Page::load(&html, &css, common.viewport, common.traversal())?;
            let mut text = format!("== before ==\n{}", p.dump_layout());
            let dirtied = p.apply_mutations(&cmds)?;
            let stats = p.incremental_relayout()?;
            text.push_str(&format!("== after ==\n{}", p.dump_layout()));
            text.push_str(&format!("# commands {} dirty flows {}\n", cmds.len(), dirtied.len()));
            text.push_str(&stats_line("incremental", &stats));
            let mut full = p.clone();
            full.flows.mark_all_dirty();
            text.push_str(&stats_line("full", &full.relayout()?));
            let same = p.dump_layout() == p.from_scratch_dump()?;
            text.push_str(&format!("# matches from-scratch layout: {}\n", if same { "yes" } else { "no" }));
            stdout(&text)?;
            if !same {
                return Err(EngineError::Pipeline("incremental layout diverged from a full rebuild".into()));
            }
        }
        Command::Synth { flows, branching, random, css_out } => {
            let (html, css) = match random {
                Some(seed) => (synth::random_page(seed, flows / 2), synth::random_css(seed, 40)),
                None => (synth::wide_tree_page(flows, branching), synth::wide_tree_css()),
            };
            stdout(&html)?;
            if let Some(path) = css_out {
                write_file(&path, css.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                EngineError::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
