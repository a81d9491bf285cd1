use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;

/// Full-precision decimal rendering: 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv(rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = String::from("eps,value\n");
    for (e, v) in rows {
        writeln!(out, "{},{}", fmt17(e), fmt17(v)).unwrap();
    }
    out
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    command: &'a str,
    pass: bool,
    config: &'a ExperimentConfig,
    report: R,
}

pub struct Sink {
    dir: PathBuf,
}

impl Sink {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Sink {
            dir: dir.to_path_buf(),
        })
    }

    fn write(&self, file: &str, text: &str) -> Result<()> {
        let path = self.dir.join(file);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn report<R: Serialize>(
        &self,
        file: &str,
        command: &str,
        pass: bool,
        config: &ExperimentConfig,
        report: R,
    ) -> Result<()> {
        let env = Envelope {
            command,
            pass,
            config,
            report,
        };
        let mut text = serde_json::to_string_pretty(&env)?;
        text.push('\n');
        self.write(file, &text)
    }

    pub fn trace(&self, file: &str, rows: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
        self.write(file, &csv(rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_doubles() {
        let xs = [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI * 1e-300,
            5e-324,
            1.7976931348623157e308,
        ];
        let text = csv(xs.iter().map(|&x| (x, -x)));
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("eps,value"));
        for (line, x) in lines.zip(xs) {
            let (a, b) = line.split_once(',').unwrap();
            assert_eq!(a.parse::<f64>().unwrap().to_bits(), x.to_bits());
            assert_eq!(b.parse::<f64>().unwrap().to_bits(), (-x).to_bits());
            assert_eq!(
                a.trim_start_matches('-')
                    .split('e')
                    .next()
                    .unwrap()
                    .replace('.', "")
                    .len(),
                17
            );
        }
    }
}
