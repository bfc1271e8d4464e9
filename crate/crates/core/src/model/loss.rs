use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LossOutput {
    /// Mean softmax cross-entropy over counted vertices.
    pub loss: f64,
    /// Gradient of `loss` with respect to each part's logits.
    pub dlogits: Vec<Array2<f64>>,
    pub correct: usize,
    pub count: usize,
}

impl LossOutput {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.count as f64
    }
}

/// Mean softmax cross-entropy over the labeled rows marked in `owned`. Each
/// labeled vertex must be owned by exactly one row across parts; other rows
/// get a zero gradient.
pub fn loss_grad(logits: &[Array2<f64>], labels: &[Vec<Option<usize>>], owned: &[Vec<bool>]) -> Result<LossOutput> {
    if labels.len() != logits.len() || owned.len() != logits.len() {
        return Err(Error::LengthMismatch {
            expected: logits.len(),
            got: labels.len().min(owned.len()),
        });
    }
    let mut total = 0.0;
    let mut count = 0;
    let mut correct = 0;
    let mut dlogits = Vec::with_capacity(logits.len());
    for ((z, lab), own) in logits.iter().zip(labels).zip(owned) {
        if lab.len() != z.nrows() || own.len() != z.nrows() {
            return Err(Error::LengthMismatch {
                expected: z.nrows(),
                got: lab.len(),
            });
        }
        let classes = z.ncols();
        let mut g = Array2::zeros(z.dim());
        for (i, row) in z.rows().into_iter().enumerate() {
            let Some(y) = lab[i].filter(|_| own[i]) else {
                continue;
            };
            if y >= classes {
                return Err(Error::LabelOutOfRange { label: y, classes });
            }
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let sum: f64 = row.iter().map(|&v| (v - max).exp()).sum();
            total += max + sum.ln() - row[y];
            for (j, &v) in row.iter().enumerate() {
                g[(i, j)] = (v - max).exp() / sum - if j == y { 1.0 } else { 0.0 };
            }
            let argmax = row
                .iter()
                .enumerate()
                .fold(0, |best, (j, &v)| if v > row[best] { j } else { best });
            correct += usize::from(argmax == y);
            count += 1;
        }
        dlogits.push(g);
    }
    if count == 0 {
        return Err(Error::NoLabeledVertex);
    }
    let scale = 1.0 / count as f64;
    for g in &mut dlogits {
        g.mapv_inplace(|v| v * scale);
    }
    Ok(LossOutput {
        loss: total * scale,
        dlogits,
        correct,
        count,
    })
}
