use crate::error::{Error, Result};
use crate::label::Label;

const WEIGHT_TOLERANCE: f64 = 1e-10;

/// Checks that weights are non-negative and sum to one, within `1e-10`.
pub fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Weight("no weights given".into()));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < -WEIGHT_TOLERANCE) {
        return Err(Error::Weight(format!("negative or non-finite weight {w}")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(Error::Weight(format!("weights sum to {sum}")));
    }
    Ok(())
}

/// Row-stochastic matrix `ν_{yz}` from source labels `y` to target labels `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    sources: Vec<Label>,
    targets: Vec<Label>,
    entries: Vec<Vec<f64>>,
}

impl StochasticMatrix {
    pub fn new(sources: Vec<Label>, targets: Vec<Label>, entries: Vec<Vec<f64>>) -> Result<Self> {
        if entries.len() != sources.len() || entries.iter().any(|r| r.len() != targets.len()) {
            return Err(Error::Shape(format!(
                "stochastic matrix must be {}x{}",
                sources.len(),
                targets.len()
            )));
        }
        for (y, row) in sources.iter().zip(&entries) {
            check_weights(row).map_err(|e| Error::Weight(format!("row {y}: {e}")))?;
        }
        let entries = entries
            .into_iter()
            .map(|r| r.into_iter().map(|w| w.max(0.0)).collect())
            .collect();
        Ok(Self { sources, targets, entries })
    }

    /// Relabelling `y ↦ f(y)` as a deterministic matrix.
    pub fn deterministic(sources: Vec<Label>, targets: Vec<Label>, f: impl Fn(&Label) -> Label) -> Result<Self> {
        let entries = sources
            .iter()
            .map(|y| {
                let image = f(y);
                let row: Vec<f64> = targets.iter().map(|z| if *z == image { 1.0 } else { 0.0 }).collect();
                if row.iter().sum::<f64>() == 1.0 {
                    Ok(row)
                } else {
                    Err(Error::Label(format!("{y} maps to {image}, which is not a target")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sources, targets, entries)
    }

    pub fn sources(&self) -> &[Label] {
        &self.sources
    }

    pub fn targets(&self) -> &[Label] {
        &self.targets
    }

    pub fn entry(&self, y: usize, z: usize) -> f64 {
        self.entries[y][z]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub(crate) fn check_sources<'a>(&self, labels: impl Iterator<Item = &'a Label>) -> Result<()> {
        let labels: Vec<&Label> = labels.collect();
        if labels.len() != self.sources.len() || labels.iter().any(|l| !self.sources.contains(l)) {
            return Err(Error::Label("stochastic matrix sources do not match the outcome set".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rows() {
        let l = Label::range(2);
        assert!(StochasticMatrix::new(l.clone(), l.clone(), vec![vec![0.5, 0.5], vec![1.0, 0.0]]).is_ok());
        assert!(StochasticMatrix::new(l.clone(), l.clone(), vec![vec![0.6, 0.5], vec![1.0, 0.0]]).is_err());
        assert!(StochasticMatrix::new(l.clone(), l.clone(), vec![vec![1.1, -0.1], vec![1.0, 0.0]]).is_err());
        assert!(StochasticMatrix::new(l.clone(), l, vec![vec![1.0]]).is_err());
    }

    #[test]
    fn weights() {
        assert!(check_weights(&[0.25, 0.75]).is_ok());
        assert!(check_weights(&[0.25, 0.7]).is_err());
        assert!(check_weights(&[]).is_err());
    }
}
