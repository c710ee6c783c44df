//! L2-regularized logistic regression trained by full-batch gradient
//! descent. Deterministic: no sampling anywhere.

use super::{mlp::sigmoid, ModelError};

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2_lambda: f64,
}

impl LogisticModel {
    pub fn probability(&self, x: &[f64]) -> f64 {
        let z: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias;
        sigmoid(z)
    }
}

pub fn train_logistic(
    rows: &[Vec<f64>],
    targets: &[f64],
    epochs: usize,
    lr: f64,
    l2: f64,
) -> Result<LogisticModel, ModelError> {
    assert!(epochs >= 1, "epochs must be >= 1");
    assert!(lr > 0.0, "learning rate must be positive");
    assert!(l2 >= 0.0, "l2 must be non-negative");
    if rows.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mut model = LogisticModel {
        weights: vec![0.0; d],
        bias: 0.0,
        l2_lambda: l2,
    };

    for _ in 0..epochs {
        let mut grad_w = vec![0.0; d];
        let mut grad_b = 0.0;
        let mut loss = 0.0;
        for (row, &y) in rows.iter().zip(targets) {
            let p = model.probability(row);
            let err = p - y;
            for (g, v) in grad_w.iter_mut().zip(row) {
                *g += err * v;
            }
            grad_b += err;
            let pc = p.clamp(1e-12, 1.0 - 1e-12);
            loss -= y * pc.ln() + (1.0 - y) * (1.0 - pc).ln();
        }
        loss = loss / n + 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>();
        if !loss.is_finite() {
            return Err(ModelError::DivergedLoss);
        }
        for (w, g) in model.weights.iter_mut().zip(&grad_w) {
            *w -= lr * (g / n + l2 * *w);
        }
        model.bias -= lr * grad_b / n;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::is_malicious;

    fn separable() -> (Vec<Vec<f64>>, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![f64::from(i % 2)]).collect();
        let targets: Vec<f64> = (0..40).map(|i| f64::from(i % 2)).collect();
        (rows, targets)
    }

    #[test]
    fn learns_separable_single_feature() {
        let (rows, targets) = separable();
        let m = train_logistic(&rows, &targets, 500, 0.5, 0.0).unwrap();
        assert!(m.weights[0] > 0.0);
        let correct = rows
            .iter()
            .zip(&targets)
            .filter(|(r, &y)| f64::from(is_malicious(m.probability(r))) == y)
            .count();
        assert_eq!(correct, rows.len());
    }

    #[test]
    fn huge_l2_shrinks_weights() {
        let (rows, targets) = separable();
        let m = train_logistic(&rows, &targets, 200, 1e-7, 1e6).unwrap();
        assert!(m.weights[0].abs() < 1e-2, "w = {}", m.weights[0]);
    }

    #[test]
    #[should_panic(expected = "epochs must be >= 1")]
    fn zero_epochs_violates_contract() {
        let (rows, targets) = separable();
        let _ = train_logistic(&rows, &targets, 0, 0.1, 0.0);
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(matches!(
            train_logistic(&[], &[], 1, 0.1, 0.0),
            Err(ModelError::EmptyDataset)
        ));
    }
}
