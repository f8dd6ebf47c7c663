use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::Deserialize;
use tropdesc::lattice::RatPoint;
use tropdesc::sample::{SampleConfig, DEFAULT_RETRIES};

use crate::BadInput;

/// Settings as read from a JSON config file. Every field is optional; flags
/// given on the command line win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub k: Option<usize>,
    pub points: Option<Vec<[String; 2]>>,
    pub q: Option<[String; 2]>,
    pub seed: Option<u64>,
    pub d_max: Option<u32>,
    pub retries: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .context(BadInput)?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .context(BadInput)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

/// Fully resolved run settings.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub k: usize,
    pub points: Option<Vec<RatPoint>>,
    pub q: Option<RatPoint>,
    pub seed: u64,
    pub d_max: u32,
    pub retries: u32,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub threads: usize,
}

/// Values taken from command-line flags.
#[derive(Clone, Debug, Default)]
pub struct FlagValues {
    pub k: Option<usize>,
    pub points: Option<String>,
    pub q: Option<String>,
    pub seed: Option<u64>,
    pub d_max: Option<u32>,
    pub retries: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn parse_point(s: &str) -> Result<RatPoint> {
    RatPoint::parse(s.trim())
        .with_context(|| format!("bad point {s:?}"))
        .context(BadInput)
}

fn parse_pair(p: &[String; 2]) -> Result<RatPoint> {
    parse_point(&format!("{},{}", p[0], p[1]))
}

/// Parse `"x1,y1;x2,y2;..."`.
pub fn parse_points(s: &str) -> Result<Vec<RatPoint>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(parse_point).collect()
}

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: FlagValues) -> Result<RunConfig> {
        let points = match (flags.points, file.points) {
            (Some(s), _) => Some(parse_points(&s)?),
            (None, Some(list)) => Some(list.iter().map(parse_pair).collect::<Result<Vec<_>>>()?),
            (None, None) => None,
        };
        let q = match (flags.q, file.q) {
            (Some(s), _) => Some(parse_point(&s)?),
            (None, Some(p)) => Some(parse_pair(&p)?),
            (None, None) => None,
        };
        let d_max = flags.d_max.or(file.d_max).unwrap_or(2);
        if d_max == 0 {
            return Err(anyhow!("--dmax must be positive").context(BadInput));
        }
        let k_given = flags.k.or(file.k);
        let k = match (&points, k_given) {
            (Some(p), Some(k)) if p.len() != k => {
                return Err(anyhow!("k = {k} but {} points were given", p.len()).context(BadInput))
            }
            (Some(p), _) => p.len(),
            (None, Some(k)) => k,
            (None, None) => 3 * d_max as usize,
        };
        if let Some(p) = &points {
            for i in 0..p.len() {
                for j in i + 1..p.len() {
                    if p[i] == p[j] {
                        return Err(anyhow!("points {} and {} coincide", i + 1, j + 1).context(BadInput));
                    }
                }
            }
        }
        let format = match flags.format.or(file.format).as_deref() {
            None | Some("json") => Format::Json,
            Some("text") => Format::Text,
            Some(other) => return Err(anyhow!("unknown format {other:?}").context(BadInput)),
        };
        let retries = flags.retries.or(file.retries).unwrap_or(DEFAULT_RETRIES);
        if retries == 0 {
            return Err(anyhow!("--retries must be positive").context(BadInput));
        }
        Ok(RunConfig {
            k,
            points,
            q,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            d_max,
            retries,
            out: flags.out.or(file.out),
            format,
            csv: flags.csv.or(file.csv),
            svg: flags.svg.or(file.svg),
            threads: flags.threads.or(file.threads).unwrap_or(1).max(1),
        })
    }

    pub fn sample_config(&self) -> SampleConfig {
        SampleConfig {
            k: self.k,
            points: self.points.clone(),
            q: self.q.clone(),
            seed: self.seed,
            retries: self.retries,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = FileConfig {
            seed: Some(5),
            d_max: Some(3),
            ..FileConfig::default()
        };
        let flags = FlagValues {
            seed: Some(9),
            ..FlagValues::default()
        };
        let cfg = RunConfig::resolve(file, flags).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.d_max, 3);
        assert_eq!(cfg.k, 9);
    }

    #[test]
    fn points_fix_k() {
        let flags = FlagValues {
            points: Some("0,0; 1/2,3".into()),
            ..FlagValues::default()
        };
        let cfg = RunConfig::resolve(FileConfig::default(), flags).unwrap();
        assert_eq!(cfg.k, 2);
        let clash = FlagValues {
            points: Some("0,0".into()),
            k: Some(3),
            ..FlagValues::default()
        };
        assert!(RunConfig::resolve(FileConfig::default(), clash).is_err());
    }
}
