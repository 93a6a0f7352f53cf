//! Validated scalar newtypes shared by the learners.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of rounds (or episodes), at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Horizon(usize);

impl Horizon {
    pub fn new(t: usize) -> Result<Self> {
        if t < 2 {
            return Err(Error::InvalidParameter(format!("horizon {t} must be at least 2")));
        }
        Ok(Self(t))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    pub fn ln(self) -> f64 {
        (self.0 as f64).ln()
    }

    pub fn log2(self) -> f64 {
        (self.0 as f64).log2()
    }
}

impl TryFrom<usize> for Horizon {
    type Error = Error;
    fn try_from(t: usize) -> Result<Self> {
        Self::new(t)
    }
}

impl From<Horizon> for usize {
    fn from(h: Horizon) -> usize {
        h.0
    }
}

/// A strictly positive, finite step size.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LearningRate(f64);

impl LearningRate {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!("learning rate {eta} must be positive and finite")));
        }
        Ok(Self(eta))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for LearningRate {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LearningRate> for f64 {
    fn from(v: LearningRate) -> f64 {
        v.0
    }
}

/// Failure probability in the open unit interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Confidence(f64);

impl Confidence {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta {delta} must lie in (0, 1)")));
        }
        Ok(Self(delta))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Confidence {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Confidence> for f64 {
    fn from(v: Confidence) -> f64 {
        v.0
    }
}

pub(crate) fn check_loss(loss: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&loss) {
        return Err(Error::InvalidParameter(format!("loss {loss} outside [0, 1]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Horizon::new(1).is_err());
        assert!(LearningRate::new(0.0).is_err());
        assert!(LearningRate::new(f64::NAN).is_err());
        assert!(Confidence::new(1.0).is_err());
        assert!(Confidence::new(0.0).is_err());
        assert_eq!(Horizon::new(8).unwrap().get(), 8);
        let h: Horizon = serde_json::from_str("16").unwrap();
        assert_eq!(h.get(), 16);
        assert!(serde_json::from_str::<Horizon>("1").is_err());
    }
}
