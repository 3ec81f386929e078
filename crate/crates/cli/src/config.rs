//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # three datasets, labels named explicitly
//! dataset   = data/iris.csv | Species
//! dataset   = data/glass.csv | type
//! sizes     = 5, 7, 10
//! combiners = vote, arith, h_arith, h_med
//! folds     = 10
//! repeats   = 10
//! seed      = 7
//! ```
//!
//! `dataset`, `sizes`, `combiners` and `composition` may be repeated; their
//! values accumulate. Relative dataset paths resolve against the config
//! file's directory. A dataset without `| label` uses its last column.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use gmfuse::ensemble::{Combiner, Composition, Family};
use gmfuse::eval::{DatasetSource, ExperimentConfig};
use gmfuse::{Error, Result};

fn list<T: FromStr<Err = Error>>(value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{value}`")))
}

fn counts(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| number(key, s))
        .collect()
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "`{key}` expects true or false, got `{value}`"
        ))),
    }
}

/// Parses configuration text. `base` anchors relative dataset paths.
pub fn parse_config(text: &str, base: &Path) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    let mut families: Vec<Family> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |msg: String| Error::Config(format!("line {}: {msg}", i + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let value = value.trim();
        let parsed: Result<()> = (|| {
            match key.as_str() {
                "dataset" => {
                    let (path, label) = match value.split_once('|') {
                        Some((p, l)) => (
                            p.trim(),
                            Some(l.trim().to_string()).filter(|l| !l.is_empty()),
                        ),
                        None => (value, None),
                    };
                    if path.is_empty() {
                        return Err(Error::Config("empty dataset path".into()));
                    }
                    config.datasets.push(DatasetSource {
                        path: base.join(path),
                        label,
                    });
                }
                "sizes" | "size" => config.sizes.extend(counts(&key, value)?),
                "combiners" | "combiner" => config.combiners.extend(list::<Combiner>(value)?),
                "composition" => families.extend(list::<Family>(value)?),
                "folds" => config.folds = number(&key, value)?,
                "repeats" => config.repeats = number(&key, value)?,
                "seed" => config.seed = number(&key, value)?,
                "tie_policy" => config.tie_policy = value.parse()?,
                "alpha" => config.alpha = number(&key, value)?,
                "parallel" => config.parallel = flag(&key, value)?,
                "timing" => config.timing = flag(&key, value)?,
                "output_dir" => config.output_dir = Some(base.join(value)),
                "knn_k" => config.hyper.knn_k = number(&key, value)?,
                "tree_max_depth" => config.hyper.tree_max_depth = number(&key, value)?,
                "tree_min_leaf" => config.hyper.tree_min_leaf = number(&key, value)?,
                "nb_variance_floor" => config.hyper.nb_variance_floor = number(&key, value)?,
                "epochs" => config.hyper.epochs = number(&key, value)?,
                "learning_rate" => config.hyper.learning_rate = number(&key, value)?,
                "l2" => config.hyper.l2 = number(&key, value)?,
                _ => return Err(Error::Config(format!("unknown key `{key}`"))),
            }
            Ok(())
        })();
        parsed.map_err(|e| match e {
            Error::Config(m) => at(m),
            other => other,
        })?;
    }
    if !families.is_empty() {
        config.composition = Composition::new(families)?;
    }
    if config.datasets.is_empty() {
        return Err(Error::Config("no `dataset` entries".into()));
    }
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    parse_config(&text, &base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_defaults() {
        let cfg = parse_config(
            "# demo\ndataset = iris.csv | Species\ndataset = other.csv\nsizes = 5, 7\nsizes = 10\n\
             combiners = arith, h_arith\ntie-policy = seeded-random\nseed = 3\n",
            Path::new("/data"),
        )
        .unwrap();
        assert_eq!(cfg.datasets[0].path, Path::new("/data/iris.csv"));
        assert_eq!(cfg.datasets[0].label.as_deref(), Some("Species"));
        assert_eq!(cfg.datasets[1].label, None);
        assert_eq!(cfg.sizes, vec![5, 7, 10]);
        assert_eq!(cfg.combiners.len(), 2);
        assert_eq!((cfg.folds, cfg.repeats, cfg.seed), (10, 10, 3));
        assert_eq!(cfg.alpha, 0.01);
    }

    #[test]
    fn rejects_unknown_keys_and_combiners() {
        let base = Path::new(".");
        let err = parse_config(
            "dataset = a.csv\nsizes = 5\ncombiners = arith\ncolour = red\n",
            base,
        )
        .unwrap_err();
        assert!(err.to_string().contains("line 4"));
        let err =
            parse_config("dataset = a.csv\nsizes = 5\ncombiners = h_mode\n", base).unwrap_err();
        assert!(err.to_string().contains("h_arith"));
        assert!(parse_config("dataset = a.csv\nsizes = 1\ncombiners = arith\n", base).is_err());
        assert!(parse_config("sizes = 5\ncombiners = arith\n", base).is_err());
        assert!(parse_config("dataset = a.csv\nsizes = five\ncombiners = arith\n", base).is_err());
    }

    #[test]
    fn composition_and_hyperparameters() {
        let cfg = parse_config(
            "dataset = a.csv\nsizes = 4\ncombiners = vote\ncomposition = knn, nb\nknn_k = 3\nparallel = false\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(
            cfg.composition.families(),
            &[Family::Knn, Family::GaussianNaiveBayes]
        );
        assert_eq!(cfg.hyper.knn_k, 3);
        assert!(!cfg.parallel);
    }
}
