//! Pointwise losses.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    SquaredError,
}

/// A pointwise loss with an optional known upper bound `M` (used by the
/// generalization bound when the user can certify one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossFn {
    pub kind: LossKind,
    pub bound_m: Option<f64>,
}

impl LossFn {
    pub fn squared_error() -> Self {
        LossFn {
            kind: LossKind::SquaredError,
            bound_m: None,
        }
    }

    #[inline]
    pub fn loss(&self, y: f64, y_hat: f64) -> f64 {
        match self.kind {
            LossKind::SquaredError => {
                let d = y - y_hat;
                d * d
            }
        }
    }
}

impl Default for LossFn {
    fn default() -> Self {
        LossFn::squared_error()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squared_error_basics() {
        let l = LossFn::squared_error();
        assert_eq!(l.loss(2.0, 2.0), 0.0);
        assert_eq!(l.loss(0.0, 2.0), 4.0);
        assert_eq!(l.loss(2.0, 0.0), 4.0);
        assert_eq!(l.loss(-1.0, 1.0), 4.0);
    }
}
