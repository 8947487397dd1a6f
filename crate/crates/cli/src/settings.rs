//! Layered option resolution and small text formats: command-line flags
//! override config-file entries, which override built-in defaults. The
//! config file is flat `key = value` lines; parameter ranges come from a
//! separate `name = lo, hi` file so sweeps can share one config.

use anyhow::{anyhow, bail, Context, Result};
use stabens::ensembles::EnsembleKind;
use std::collections::HashMap;
use std::path::Path;

/// Every key any subcommand understands; one shared file can configure
/// them all, and typos are rejected instead of silently ignored.
const KNOWN_KEYS: [&str; 14] = [
    "model", "branch", "ensemble", "family", "n", "samples", "seed", "mode", "ranges", "out",
    "workers", "window", "resolution", "bins",
];

/// A parsed `key = value` configuration file (possibly absent).
pub struct ConfigFile {
    entries: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<ConfigFile> {
        let mut entries = HashMap::new();
        let Some(path) = path else {
            return Ok(ConfigFile { entries });
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {} is not `key = value`: `{raw}`", index + 1);
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("unknown config key `{key}` on line {}", index + 1);
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    /// The flag value if given, else the config entry for `key`.
    pub fn resolve_str(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.get(key).map(String::from))
    }

    /// As [`ConfigFile::resolve_str`], parsing the config entry when the
    /// flag is absent.
    pub fn resolve<T>(
        &self,
        flag: Option<T>,
        key: &str,
        parse: impl FnOnce(&str) -> Result<T>,
    ) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.get(key)
            .map(|text| parse(text).with_context(|| format!("config key `{key}`")))
            .transpose()
    }
}

/// Parse a parameter-override file: one `name = lo, hi` line per
/// parameter, `#` comments allowed. Unlisted parameters keep their
/// model defaults.
pub fn load_ranges(path: &Path) -> Result<Vec<(String, (f64, f64))>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading ranges file {}", path.display()))?;
    let mut overrides = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let problem = || format!("ranges line {} is not `name = lo, hi`: `{raw}`", index + 1);
        let (name, interval) = line.split_once('=').with_context(problem)?;
        let (lo, hi) = interval.split_once(',').with_context(problem)?;
        let lo: f64 = lo.trim().parse().with_context(problem)?;
        let hi: f64 = hi.trim().parse().with_context(problem)?;
        overrides.push((name.trim().to_string(), (lo, hi)));
    }
    Ok(overrides)
}

pub fn parse_count(text: &str) -> Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| anyhow!("`{text}` is not a whole number"))
}

pub fn parse_seed(text: &str) -> Result<u64> {
    text.trim()
        .parse()
        .map_err(|_| anyhow!("`{text}` is not a valid seed"))
}

/// Comma-separated ensemble kinds, e.g. `fcs,iid,mvn`.
pub fn parse_kinds(text: &str) -> Result<Vec<EnsembleKind>> {
    let kinds: Vec<EnsembleKind> = text
        .split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(EnsembleKind::parse)
        .collect::<stabens::Result<_>>()?;
    if kinds.is_empty() {
        bail!("no ensemble kinds given");
    }
    Ok(kinds)
}

/// Family sizes: comma-separated entries, each a single size or an
/// inclusive `lo..hi` range, e.g. `1..4,6`.
pub fn parse_size_list(text: &str) -> Result<Vec<usize>> {
    let mut sizes = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = part.split_once("..") {
            let lo = parse_count(lo)?;
            let hi = parse_count(hi)?;
            if lo == 0 || hi < lo {
                bail!("`{part}` is not a valid size range");
            }
            sizes.extend(lo..=hi);
        } else {
            let n = parse_count(part)?;
            if n == 0 {
                bail!("family size must be at least 1");
            }
            sizes.push(n);
        }
    }
    if sizes.is_empty() {
        bail!("no family sizes given");
    }
    Ok(sizes)
}

/// A symmetric plane window `lo,hi`.
pub fn parse_window(text: &str) -> Result<(f64, f64)> {
    let problem = || format!("`{text}` is not a window (expected `lo,hi`)");
    let (lo, hi) = text.split_once(',').with_context(problem)?;
    let lo: f64 = lo.trim().parse().with_context(problem)?;
    let hi: f64 = hi.trim().parse().with_context(problem)?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        bail!("window `{text}` must have lo < hi");
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(contents.as_bytes()).unwrap();
        file
    }

    #[test]
    fn config_entries_yield_to_flags() {
        let file = temp_file("model = seir\nsamples = 250 # inline comment\n\n# whole-line comment\n");
        let cfg = ConfigFile::load(Some(file.path())).unwrap();
        assert_eq!(cfg.resolve_str(None, "model").as_deref(), Some("seir"));
        assert_eq!(
            cfg.resolve_str(Some("lorenz".into()), "model").as_deref(),
            Some("lorenz")
        );
        assert_eq!(cfg.resolve(None, "samples", parse_count).unwrap(), Some(250));
        assert_eq!(cfg.resolve(Some(9), "samples", parse_count).unwrap(), Some(9));
        assert_eq!(cfg.resolve(None, "seed", parse_seed).unwrap(), None);
    }

    #[test]
    fn malformed_or_unknown_config_lines_are_rejected() {
        let missing = ConfigFile::load(Some(Path::new("/nonexistent/config")));
        assert!(missing.is_err());
        let bad_shape = temp_file("model seir\n");
        assert!(ConfigFile::load(Some(bad_shape.path())).is_err());
        let typo = temp_file("modle = seir\n");
        assert!(ConfigFile::load(Some(typo.path())).is_err());
    }

    #[test]
    fn ranges_files_parse_named_intervals() {
        let file = temp_file("mu = 0.1, 0.2\nbeta = 0, 1 # wide\n");
        let overrides = load_ranges(file.path()).unwrap();
        assert_eq!(
            overrides,
            vec![
                ("mu".to_string(), (0.1, 0.2)),
                ("beta".to_string(), (0.0, 1.0)),
            ]
        );
        let bad = temp_file("mu = 0.1\n");
        assert!(load_ranges(bad.path()).is_err());
    }

    #[test]
    fn size_lists_accept_ranges_and_reject_nonsense() {
        assert_eq!(parse_size_list("1..4,6").unwrap(), vec![1, 2, 3, 4, 6]);
        assert_eq!(parse_size_list(" 2 ").unwrap(), vec![2]);
        assert!(parse_size_list("0").is_err());
        assert!(parse_size_list("4..2").is_err());
        assert!(parse_size_list("").is_err());
    }

    #[test]
    fn kind_lists_parse_by_name() {
        let kinds = parse_kinds("fcs, iid,mvn").unwrap();
        assert_eq!(
            kinds,
            vec![EnsembleKind::Fcs, EnsembleKind::Iid, EnsembleKind::Mvn]
        );
        assert!(parse_kinds("fcs,nosuch").is_err());
        assert!(parse_kinds(" , ").is_err());
    }

    #[test]
    fn windows_require_an_ordered_pair() {
        assert_eq!(parse_window("-3, 3").unwrap(), (-3.0, 3.0));
        assert!(parse_window("3,-3").is_err());
        assert!(parse_window("3").is_err());
    }
}
