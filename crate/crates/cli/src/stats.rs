use std::path::PathBuf;
use std::thread;

use clap::Args;

use athtrack::{dataset_stats, DatasetStats};

use crate::error::CliError;
use crate::files::read_records;
use crate::manifest::Manifest;
use crate::Run;

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Ground-truth files; each one counts as a video.
    #[arg(required = true, num_args = 1..)]
    files: Vec<PathBuf>,
    /// Keep only records of this class.
    #[arg(long)]
    class: Option<i64>,
}

fn line(label: &str, s: &DatasetStats) -> String {
    let (fv, of, tv) = s.rounded();
    format!(
        "{label}: videos={} frames={} objects={} tracks={} F/V={fv} O/F={of} T/V={tv}",
        s.videos, s.frames, s.objects, s.tracks
    )
}

pub fn run(a: &StatsArgs) -> Result<Run, CliError> {
    // Files are parsed on separate threads; output keeps argument order.
    let per_file: Vec<Result<DatasetStats, CliError>> = thread::scope(|scope| {
        let handles: Vec<_> = a
            .files
            .iter()
            .map(|path| scope.spawn(move || read_records(path, a.class).map(|r| dataset_stats(&r, 1))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("stats worker panicked")).collect()
    });
    let per_file = per_file.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut m = Manifest::new("stats");
    if let Some(c) = a.class {
        m.arg("class", c);
    }
    for (path, s) in a.files.iter().zip(&per_file) {
        println!("{}", line(&path.display().to_string(), s));
        m.input("ground_truth", path);
    }
    let total = DatasetStats::combine(&per_file);
    println!("{}", line("total", &total));
    m.extra_block("total", &total.to_key_value());
    Ok(Run { manifest: m, default_path: None })
}
