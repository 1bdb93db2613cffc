use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Masses, charges and field strength of the two-particle system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub mu1: f64,
    pub mu2: f64,
    pub e1: f64,
    pub e2: f64,
    /// Uniform magnetic field strength (signed).
    #[serde(rename = "B")]
    pub b: f64,
}

impl SystemParams {
    pub fn new(mu1: f64, mu2: f64, e1: f64, e2: f64, b: f64) -> Result<Self> {
        let p = Self { mu1, mu2, e1, e2, b };
        p.validate()?;
        Ok(p)
    }

    /// Two identical unit particles (`μ = e = 1`) in a field of strength `b`.
    pub fn identical(b: f64) -> Self {
        Self { mu1: 1.0, mu2: 1.0, e1: 1.0, e2: 1.0, b }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu1, self.mu2, self.e1, self.e2, self.b];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.mu1 <= 0.0 || self.mu2 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "masses must be positive (mu1 = {}, mu2 = {})",
                self.mu1, self.mu2
            )));
        }
        if self.e1 == 0.0 || self.e2 == 0.0 {
            return Err(Error::InvalidParams(format!("charges must be nonzero (e1 = {}, e2 = {})", self.e1, self.e2)));
        }
        Ok(())
    }

    pub fn with_field(self, b: f64) -> Self {
        Self { b, ..self }
    }

    /// True when `μ1 = μ2 = 1` and `e1 = e2 = 1`.
    pub fn is_identical_unit(&self) -> bool {
        self.mu1 == 1.0 && self.mu2 == 1.0 && self.e1 == 1.0 && self.e2 == 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_mass_and_zero_charge() {
        assert!(SystemParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, -2.0, 1.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 1.0, 1.0, f64::NAN).is_err());
        assert!(SystemParams::new(2.0, 0.5, -1.0, 3.0, -4.0).is_ok());
    }

    #[test]
    fn serializes_field_as_capital_b() {
        let json = serde_json::to_string(&SystemParams::identical(2.5)).unwrap();
        assert!(json.contains("\"B\":2.5"));
        let back: SystemParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, SystemParams::identical(2.5));
    }
}
