//! Synthetic and file-backed loss sequences.
//!
//! Every source is oblivious: the loss vector for round `t` is a pure
//! function of the source definition, its seed, and `t`, so the whole
//! sequence is fixed before the learner moves and any round can be queried
//! in any order. Losses always lie in `[0, 1]`.

use std::fs;
use std::path::Path;

use rand::Rng;

use crate::decision_sets::DecisionSet;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, SALT_ENV, SALT_ENV_PARAMS};

#[derive(Clone, Debug)]
enum Kind {
    /// Independent Bernoulli losses with fixed per-component means.
    Bernoulli { means: Vec<f64> },
    /// Deterministic repetition of the mean vector (no noise).
    Constant { means: Vec<f64> },
    /// `ell_{t,i} = (t + i) mod 2`: the parity flip-flop that defeats any
    /// fixed action while keeping the best one at about half the horizon.
    WorstCaseFlip { d: usize },
    /// Explicit per-round loss vectors, e.g. loaded from a file.
    Explicit { rows: Vec<Vec<f64>> },
}

/// A loss sequence over a fixed horizon.
#[derive(Clone, Debug)]
pub struct LossSource {
    kind: Kind,
    d: usize,
    horizon: u64,
    seed: u64,
    label: String,
}

fn check_means(means: &[f64]) -> Result<()> {
    if means.is_empty() {
        return Err(Error::InvalidParameter("empty mean vector".into()));
    }
    for (i, &mu) in means.iter().enumerate() {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!(
                "mean {mu} at component {i} outside [0, 1]"
            )));
        }
    }
    Ok(())
}

impl LossSource {
    /// Bernoulli losses with the given per-component means.
    pub fn bernoulli(means: Vec<f64>, horizon: u64, seed: u64) -> Result<Self> {
        check_means(&means)?;
        Ok(LossSource {
            d: means.len(),
            kind: Kind::Bernoulli { means },
            horizon,
            seed,
            label: "bernoulli".into(),
        })
    }

    /// Bernoulli losses whose means are drawn once, uniformly on `[0, 1]`,
    /// from the seed at construction time.
    pub fn uniform_means(d: usize, horizon: u64, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("need at least one component".into()));
        }
        let mut rng = stream_rng(seed, &[SALT_ENV_PARAMS]);
        let means: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        Ok(LossSource {
            d,
            kind: Kind::Bernoulli { means },
            horizon,
            seed,
            label: "uniform-means".into(),
        })
    }

    /// A gap instance: the first `best_count` components have mean `eps`,
    /// the rest mean `mu`. With `deterministic` the means are emitted as-is
    /// every round; otherwise losses are Bernoulli draws.
    pub fn easy_gap(
        d: usize,
        best_count: usize,
        eps: f64,
        mu: f64,
        deterministic: bool,
        horizon: u64,
        seed: u64,
    ) -> Result<Self> {
        if d == 0 || best_count == 0 || best_count > d {
            return Err(Error::InvalidParameter(format!(
                "gap instance requires 1 <= best_count <= d, got d={d}, best_count={best_count}"
            )));
        }
        let mut means = vec![mu; d];
        means[..best_count].fill(eps);
        check_means(&means)?;
        let kind = if deterministic {
            Kind::Constant { means }
        } else {
            Kind::Bernoulli { means }
        };
        Ok(LossSource {
            d,
            kind,
            horizon,
            seed,
            label: "easy-gap".into(),
        })
    }

    /// The deterministic parity sequence `ell_{t,i} = (t + i) mod 2`.
    pub fn worst_case_flip(d: usize, horizon: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("need at least one component".into()));
        }
        Ok(LossSource {
            d,
            kind: Kind::WorstCaseFlip { d },
            horizon,
            seed: 0,
            label: "worst-case-flip".into(),
        })
    }

    /// An explicit list of loss vectors; the horizon is the number of rows.
    pub fn explicit(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = match rows.first() {
            Some(row) if !row.is_empty() => row.len(),
            _ => {
                return Err(Error::InvalidParameter(
                    "explicit loss source needs at least one non-empty row".into(),
                ))
            }
        };
        for (t, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidParameter(format!(
                    "row {t} has {} entries, expected {d}",
                    row.len()
                )));
            }
            for (i, &l) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&l) {
                    return Err(Error::InvalidParameter(format!(
                        "loss {l} at round {}, component {i} outside [0, 1]",
                        t + 1
                    )));
                }
            }
        }
        Ok(LossSource {
            d,
            horizon: rows.len() as u64,
            kind: Kind::Explicit { rows },
            seed: 0,
            label: "file".into(),
        })
    }

    /// Loads an explicit source from a loss CSV (see [`write_loss_csv`]).
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let (_, _, rows) = read_loss_csv(path)?;
        Self::explicit(rows)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Reseeded copy (environment draws change; structure does not).
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// The loss vector of round `t` (1-based). Pure in `(self, t)`.
    pub fn losses_at(&self, t: u64) -> Result<Vec<f64>> {
        if t == 0 || t > self.horizon {
            return Err(Error::InvalidParameter(format!(
                "round {t} outside 1..={}",
                self.horizon
            )));
        }
        Ok(match &self.kind {
            Kind::Bernoulli { means } => {
                let mut rng = stream_rng(self.seed, &[SALT_ENV, t]);
                means
                    .iter()
                    .map(|&mu| if rng.gen::<f64>() < mu { 1.0 } else { 0.0 })
                    .collect()
            }
            Kind::Constant { means } => means.clone(),
            Kind::WorstCaseFlip { d } => (0..*d)
                .map(|i| ((t + i as u64) % 2) as f64)
                .collect(),
            Kind::Explicit { rows } => rows[(t - 1) as usize].clone(),
        })
    }

    /// Sum of the loss vectors over the whole horizon.
    pub fn cumulative_losses(&self) -> Result<Vec<f64>> {
        let mut total = vec![0.0; self.d];
        for t in 1..=self.horizon {
            for (slot, l) in total.iter_mut().zip(self.losses_at(t)?) {
                *slot += l;
            }
        }
        Ok(total)
    }

    /// Exact total loss of the best fixed action in hindsight.
    pub fn oracle_lstar(&self, set: &DecisionSet) -> Result<f64> {
        let cumulative = self.cumulative_losses()?;
        let (_, value) = set.best_fixed_action(&cumulative)?;
        Ok(value)
    }
}

/// Writes a loss CSV: a header `d=<d>[,set=<descriptor>]` followed by one
/// comma-separated row of losses per round.
pub fn write_loss_csv(
    path: impl AsRef<Path>,
    d: usize,
    set_descriptor: Option<&str>,
    rows: &[Vec<f64>],
) -> Result<()> {
    let path = path.as_ref();
    let mut out = match set_descriptor {
        Some(desc) => format!("d={d},set={desc}\n"),
        None => format!("d={d}\n"),
    };
    for row in rows {
        let cells: Vec<String> = row.iter().map(|l| l.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Reads a loss CSV: returns `(d, optional set descriptor, rows)`.
pub fn read_loss_csv(path: impl AsRef<Path>) -> Result<(usize, Option<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let display = path.display().to_string();
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::LossFile {
        path: display.clone(),
        message: "empty file".into(),
    })?;
    let mut d: Option<usize> = None;
    let mut descriptor = None;
    for field in header.split(',') {
        match field.split_once('=') {
            Some(("d", v)) => {
                d = Some(v.trim().parse().map_err(|_| Error::LossFile {
                    path: display.clone(),
                    message: format!("bad dimension {v:?} in header"),
                })?)
            }
            Some(("set", v)) => descriptor = Some(v.trim().to_string()),
            _ => {
                return Err(Error::LossFile {
                    path: display.clone(),
                    message: format!("unrecognized header field {field:?}"),
                })
            }
        }
    }
    let d = d.ok_or_else(|| Error::LossFile {
        path: display.clone(),
        message: "header missing d=<dimension>".into(),
    })?;
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| Error::LossFile {
                    path: display.clone(),
                    message: format!("bad loss value {cell:?} on line {}", lineno + 2),
                })
            })
            .collect::<Result<_>>()?;
        if row.len() != d {
            return Err(Error::LossFile {
                path: display.clone(),
                message: format!(
                    "line {} has {} values, expected {d}",
                    lineno + 2,
                    row.len()
                ),
            });
        }
        rows.push(row);
    }
    Ok((d, descriptor, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_is_oblivious_and_reproducible() {
        let src = LossSource::bernoulli(vec![0.2, 0.8], 100, 5).unwrap();
        let a = src.losses_at(17).unwrap();
        // Query out of order, then again: identical.
        let _ = src.losses_at(99).unwrap();
        let b = src.losses_at(17).unwrap();
        assert_eq!(a, b);
        for l in a {
            assert!(l == 0.0 || l == 1.0);
        }
        assert!(src.losses_at(0).is_err());
        assert!(src.losses_at(101).is_err());
    }

    #[test]
    fn bernoulli_means_converge() {
        let src = LossSource::bernoulli(vec![0.2, 0.8], 20_000, 5).unwrap();
        let total = src.cumulative_losses().unwrap();
        let t = src.horizon() as f64;
        // 4 sigma of a Bernoulli mean over 20k rounds.
        assert!((total[0] / t - 0.2).abs() < 4.0 * (0.2f64 * 0.8 / t).sqrt());
        assert!((total[1] / t - 0.8).abs() < 4.0 * (0.2f64 * 0.8 / t).sqrt());
    }

    #[test]
    fn mean_validation() {
        assert!(LossSource::bernoulli(vec![0.2, 1.2], 10, 0).is_err());
        assert!(LossSource::bernoulli(vec![], 10, 0).is_err());
        assert!(LossSource::easy_gap(4, 5, 0.1, 0.3, false, 10, 0).is_err());
        assert!(LossSource::easy_gap(4, 1, -0.1, 0.3, false, 10, 0).is_err());
    }

    #[test]
    fn uniform_means_are_seed_stable() {
        let a = LossSource::uniform_means(6, 10, 42).unwrap();
        let b = LossSource::uniform_means(6, 10, 42).unwrap();
        let c = LossSource::uniform_means(6, 10, 43).unwrap();
        assert_eq!(a.losses_at(3).unwrap(), b.losses_at(3).unwrap());
        let same: bool = (1..=10).all(|t| a.losses_at(t).unwrap() == c.losses_at(t).unwrap());
        assert!(!same);
    }

    #[test]
    fn easy_gap_layout() {
        let src = LossSource::easy_gap(5, 2, 0.1, 0.4, true, 3, 0).unwrap();
        assert_eq!(src.losses_at(1).unwrap(), vec![0.1, 0.1, 0.4, 0.4, 0.4]);
        // Deterministic: identical every round.
        assert_eq!(src.losses_at(1).unwrap(), src.losses_at(3).unwrap());
        // Stochastic variant keeps the means but draws coins.
        let src = LossSource::easy_gap(5, 2, 0.1, 0.4, false, 5000, 9).unwrap();
        let total = src.cumulative_losses().unwrap();
        assert!((total[0] / 5000.0 - 0.1).abs() < 0.03);
        assert!((total[4] / 5000.0 - 0.4).abs() < 0.03);
    }

    #[test]
    fn worst_case_flip_pattern() {
        let src = LossSource::worst_case_flip(3, 10).unwrap();
        assert_eq!(src.losses_at(1).unwrap(), vec![1.0, 0.0, 1.0]);
        assert_eq!(src.losses_at(2).unwrap(), vec![0.0, 1.0, 0.0]);
        // Every component alternates; totals split the horizon evenly.
        let total = src.cumulative_losses().unwrap();
        assert_eq!(total, vec![5.0, 5.0, 5.0]);
    }

    #[test]
    fn oracle_lstar_matches_enumeration() {
        let src = LossSource::bernoulli(vec![0.9, 0.1, 0.5], 500, 3).unwrap();
        let set = DecisionSet::mab(3).unwrap();
        let lstar = src.oracle_lstar(&set).unwrap();
        let cumulative = src.cumulative_losses().unwrap();
        let best = cumulative.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(lstar, best);
    }

    #[test]
    fn loss_csv_round_trip() {
        let dir = std::env::temp_dir().join("fpl_trix_env_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("losses.csv");
        let rows = vec![vec![0.0, 0.5, 1.0], vec![0.25, 0.125, 0.75]];
        write_loss_csv(&path, 3, Some("mab:d=3"), &rows).unwrap();
        let (d, desc, got) = read_loss_csv(&path).unwrap();
        assert_eq!(d, 3);
        assert_eq!(desc.as_deref(), Some("mab:d=3"));
        assert_eq!(got, rows);

        let src = LossSource::from_file(&path).unwrap();
        assert_eq!(src.horizon(), 2);
        assert_eq!(src.dim(), 3);
        assert_eq!(src.losses_at(2).unwrap(), vec![0.25, 0.125, 0.75]);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn loss_csv_rejects_malformed_input() {
        let dir = std::env::temp_dir().join("fpl_trix_env_bad");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        fs::write(&path, "d=2\n0.5,0.5\n0.5\n").unwrap();
        assert!(read_loss_csv(&path).is_err());
        fs::write(&path, "q=2\n0.5,0.5\n").unwrap();
        assert!(read_loss_csv(&path).is_err());
        fs::write(&path, "d=2\n0.5,abc\n").unwrap();
        assert!(read_loss_csv(&path).is_err());
        fs::write(&path, "d=2\n0.5,1.5\n").unwrap();
        assert!(LossSource::from_file(&path).is_err());
        fs::remove_dir_all(&dir).ok();
    }
}
