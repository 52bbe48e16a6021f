use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Tolerance on `|Σω − 1|` accepted by [`WeightVector::new`].
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A point on the probability simplex: nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates that `weights` already lies on the simplex.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        validate_simplex(&weights)?;
        Ok(Self(weights))
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "simplex needs at least one vertex");
        Self(vec![1.0 / k as f64; k])
    }

    /// Uniform mass over `members`, zero elsewhere.
    pub fn uniform_over(k: usize, members: &[usize]) -> Self {
        assert!(!members.is_empty());
        let mass = 1.0 / members.len() as f64;
        let mut w = vec![0.0; k];
        for &m in members {
            w[m] = mass;
        }
        Self(w)
    }

    /// Normalizes nonnegative, finite, not-all-zero masses.
    pub fn from_unnormalized(mut masses: Vec<f64>) -> Result<Self> {
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::Simplex(
                "unnormalized masses must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(Error::Simplex("all masses are zero".into()));
        }
        for m in &mut masses {
            *m /= total;
        }
        Ok(Self(masses))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `ω·x`, accumulated left to right.
    pub fn dot(&self, values: &[f64]) -> Result<f64> {
        check_len("weight dot product", self.0.len(), values.len())?;
        Ok(self.0.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    pub fn validate(&self) -> Result<()> {
        validate_simplex(&self.0)
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(value: WeightVector) -> Self {
        value.0
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

fn validate_simplex(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::Simplex("empty weight vector".into()));
    }
    if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::Simplex(format!("entry {i} is {v}")));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::Simplex(format!("entries sum to {total:.17}")));
    }
    Ok(())
}

/// Combined forecast `Σ_k ω_k Ŷ_k`.
pub fn combine_forecasts(weights: &WeightVector, expert_forecasts: &[f64]) -> Result<f64> {
    if expert_forecasts.iter().any(|f| !f.is_finite()) {
        return Err(Error::NonFinite("expert forecasts"));
    }
    weights.dot(expert_forecasts)
}
