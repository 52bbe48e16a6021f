use crate::error::{check_len, Error, Result};

/// Per-expert, per-round losses in `[0, 1]` together with their running sums.
///
/// Rounds are 1-based in the accessors: `loss(t, k)` is the loss of expert `k`
/// at round `t ∈ 1..=rounds`, and `cumulative(t)` is the vector of sums over
/// rounds `1..=t`, with `cumulative(0)` all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct LossPanel {
    experts: usize,
    instantaneous: Vec<f64>,
    cumulative: Vec<f64>,
    clamped: usize,
}

impl LossPanel {
    pub fn new(experts: usize) -> Result<Self> {
        if experts == 0 {
            return Err(Error::invalid("experts", "need at least one expert"));
        }
        Ok(Self {
            experts,
            instantaneous: Vec::new(),
            cumulative: vec![0.0; experts],
            clamped: 0,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(experts: usize, rows: &[R]) -> Result<Self> {
        let mut panel = Self::new(experts)?;
        for row in rows {
            panel.push_row(row.as_ref())?;
        }
        Ok(panel)
    }

    /// Appends a round. Entries outside `[0, 1]` are clamped and counted.
    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        check_len("loss row", self.experts, row.len())?;
        if row.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite("loss row"));
        }
        let base = self.cumulative.len() - self.experts;
        for (k, &raw) in row.iter().enumerate() {
            let loss = clamp_loss(raw, &mut self.clamped);
            self.instantaneous.push(loss);
            let next = self.cumulative[base + k] + loss;
            self.cumulative.push(next);
        }
        Ok(())
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    pub fn rounds(&self) -> usize {
        self.instantaneous.len() / self.experts
    }

    /// Number of entries that were clamped into `[0, 1]`.
    pub fn clamped_entries(&self) -> usize {
        self.clamped
    }

    pub fn row(&self, t: usize) -> &[f64] {
        assert!(t >= 1 && t <= self.rounds(), "round {t} out of range");
        &self.instantaneous[(t - 1) * self.experts..t * self.experts]
    }

    pub fn loss(&self, t: usize, k: usize) -> f64 {
        self.row(t)[k]
    }

    pub fn cumulative(&self, t: usize) -> &[f64] {
        assert!(t <= self.rounds(), "round {t} out of range");
        &self.cumulative[t * self.experts..(t + 1) * self.experts]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.instantaneous.chunks_exact(self.experts)
    }

    /// Sample mean of each expert's losses.
    pub fn means(&self) -> Vec<f64> {
        let t = self.rounds().max(1) as f64;
        self.cumulative(self.rounds()).iter().map(|s| s / t).collect()
    }
}

pub(crate) fn clamp_loss(raw: f64, counter: &mut usize) -> f64 {
    if raw < 0.0 {
        *counter += 1;
        0.0
    } else if raw > 1.0 {
        *counter += 1;
        1.0
    } else {
        raw
    }
}
