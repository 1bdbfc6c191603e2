//! Subcommand implementations. Work for different metrics runs on the rayon
//! pool; results come back over a channel and only this thread writes files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use hitsignal::ingest::{metric_file_stem, metric_from_file_stem, MetricPanel};
use hitsignal::{Error, ErrorKind, Result};
use rayon::prelude::*;

use crate::config::RunConfig;

pub mod fit;
pub mod ingest;
pub mod lasso;
pub mod pca;
pub mod report;
pub mod synth;

/// Where each stage reads and writes under the output root.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: &Path) -> Self {
        Layout { root: root.to_path_buf() }
    }

    pub fn panels(&self) -> PathBuf {
        self.root.join("panels")
    }

    pub fn truth(&self) -> PathBuf {
        self.root.join("truth")
    }

    pub fn fits(&self) -> PathBuf {
        self.root.join("fits")
    }

    pub fn report(&self) -> PathBuf {
        self.root.join("report")
    }

    pub fn lasso(&self) -> PathBuf {
        self.root.join("lasso")
    }

    pub fn pca(&self) -> PathBuf {
        self.root.join("pca")
    }

    pub fn panel_file(&self, metric: &str) -> PathBuf {
        self.panels().join(format!("{}.csv", metric_file_stem(metric)))
    }

    pub fn fit_stem(&self, metric: &str) -> PathBuf {
        self.fits().join(metric_file_stem(metric))
    }
}

pub struct Context {
    pub config: RunConfig,
    pub layout: Layout,
    pool: rayon::ThreadPool,
}

impl Context {
    pub fn new(config: RunConfig) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        let layout = Layout::new(&config.out);
        Ok(Context { config, layout, pool })
    }

    /// Run `work` for every item in parallel; `sink` sees each result on the
    /// calling thread, in completion order.
    pub fn each<I, T, W, S>(&self, items: Vec<I>, work: W, mut sink: S) -> Result<()>
    where
        I: Send + Sync,
        T: Send,
        W: Fn(&I) -> T + Send + Sync,
        S: FnMut(&I, T) -> Result<()>,
    {
        let (tx, rx) = mpsc::channel::<(usize, T)>();
        std::thread::scope(|scope| {
            let items = &items;
            let work = &work;
            scope.spawn(move || {
                self.pool.install(|| {
                    items.par_iter().enumerate().for_each_with(tx, |tx, (k, item)| {
                        // The receiver only disappears after a sink error.
                        let _ = tx.send((k, work(item)));
                    });
                });
            });
            let mut first_err = None;
            for (k, value) in rx {
                if first_err.is_none() {
                    if let Err(e) = sink(&items[k], value) {
                        first_err = Some(e);
                    }
                }
            }
            first_err.map_or(Ok(()), Err)
        })
    }
}

/// A metric that failed without stopping the run.
#[derive(Debug)]
pub struct Failure {
    pub metric: String,
    pub error: Error,
}

/// Per-metric failures of one command.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<Failure>,
}

impl Outcome {
    pub fn fail(&mut self, metric: &str, error: Error) {
        self.failures.push(Failure { metric: metric.to_string(), error });
    }

    /// The most severe kind among the failures.
    pub fn worst(&self) -> Option<ErrorKind> {
        let rank = |k: ErrorKind| match k {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numerical => 3,
        };
        self.failures.iter().map(|f| f.error.kind()).max_by_key(|k| rank(*k))
    }

    /// Writes `failures.csv` in `dir` (or removes a stale one) and reports to stderr.
    pub fn finish(mut self, dir: &Path, stage: &str, ok: usize) -> Result<Self> {
        self.failures.sort_by(|a, b| a.metric.cmp(&b.metric));
        let path = dir.join("failures.csv");
        if self.failures.is_empty() {
            if path.exists() {
                fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
            }
        } else {
            let mut w = csv::Writer::from_writer(create(&path)?);
            w.write_record(["metric", "kind", "message"])?;
            for f in &self.failures {
                w.write_record([f.metric.as_str(), kind_name(f.error.kind()), &f.error.to_string()])?;
                eprintln!("{stage}: {}: {}", f.metric, f.error);
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        eprintln!("{stage}: {ok} ok, {} failed", self.failures.len());
        Ok(self)
    }
}

pub fn kind_name(k: ErrorKind) -> &'static str {
    match k {
        ErrorKind::Data => "data",
        ErrorKind::Numerical => "numerical",
        ErrorKind::Usage => "usage",
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes()).and_then(|_| f.flush()).map_err(|e| Error::io(path, e))
}

/// Files in `dir` with the given suffix, sorted by name.
pub fn list_files(dir: &Path, suffix: &str) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for e in entries {
        let path = e.map_err(|e| Error::io(dir, e))?.path();
        if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(suffix)) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Metric names of the panel files present, honouring the selection.
pub fn available_panels(ctx: &Context) -> Result<Vec<String>> {
    let dir = ctx.layout.panels();
    let mut metrics: Vec<String> = list_files(&dir, ".csv")?
        .iter()
        .filter_map(|p| p.file_stem().and_then(|s| s.to_str()).map(str::to_string))
        .filter(|s| s != "normality" && s != "failures")
        .map(|s| metric_from_file_stem(&s))
        .filter(|m| ctx.config.wants(m))
        .collect();
    metrics.sort();
    for wanted in &ctx.config.metrics {
        if !metrics.contains(wanted) {
            return Err(Error::InvalidData(format!(
                "no panel for metric `{wanted}` in {}",
                dir.display()
            )));
        }
    }
    if metrics.is_empty() {
        return Err(Error::InvalidData(format!("no panel files in {}", dir.display())));
    }
    Ok(metrics)
}

pub fn load_panel(ctx: &Context, metric: &str) -> Result<MetricPanel> {
    let path = ctx.layout.panel_file(metric);
    let f = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    hitsignal::ingest::read_panel_csv(metric, std::io::BufReader::new(f))
}
