use crate::error::{Error, Result};
use crate::numcore::DenseMatrix;

/// Mean negative log-likelihood over the masked nodes plus
/// `l2 · Σ‖W‖²` over `regularized`.
///
/// `labels` and `mask` index the first `labels.len()` rows of `probs`
/// (document nodes come first).
pub fn masked_cross_entropy(
    probs: &DenseMatrix,
    labels: &[usize],
    mask: &[bool],
    l2: f64,
    regularized: &[&DenseMatrix],
) -> Result<f64> {
    let data = data_term(probs, labels, mask)?;
    Ok(data + l2_penalty(l2, regularized))
}

/// The cross-entropy part of [`masked_cross_entropy`].
pub fn data_term(probs: &DenseMatrix, labels: &[usize], mask: &[bool]) -> Result<f64> {
    check(probs, labels, mask)?;
    let mut total = 0.0;
    let mut count = 0usize;
    for (i, (&label, _)) in labels.iter().zip(mask).enumerate().filter(|(_, (_, &m))| m) {
        total -= probs.get(i, label).ln();
        count += 1;
    }
    Ok(total / count as f64)
}

pub fn l2_penalty(l2: f64, regularized: &[&DenseMatrix]) -> f64 {
    l2 * regularized.iter().map(|w| w.sum_squares()).sum::<f64>()
}

/// Gradient of the data term with respect to the softmax logits:
/// `(p - onehot) / m` on masked rows, zero elsewhere.
pub fn loss_backward(probs: &DenseMatrix, labels: &[usize], mask: &[bool]) -> Result<DenseMatrix> {
    check(probs, labels, mask)?;
    let count = mask.iter().filter(|&&m| m).count() as f64;
    let mut d = DenseMatrix::zeros(probs.rows(), probs.cols());
    for (i, (&label, &m)) in labels.iter().zip(mask).enumerate() {
        if !m {
            continue;
        }
        for (c, v) in d.row_mut(i).iter_mut().enumerate() {
            let target = if c == label { 1.0 } else { 0.0 };
            *v = (probs.get(i, c) - target) / count;
        }
    }
    Ok(d)
}

fn check(probs: &DenseMatrix, labels: &[usize], mask: &[bool]) -> Result<()> {
    if labels.len() != mask.len() || labels.len() > probs.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels, {} mask entries, {} rows",
            labels.len(),
            mask.len(),
            probs.rows()
        )));
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyMask("loss"));
    }
    for (&l, _) in labels.iter().zip(mask).filter(|(_, &m)| m) {
        if l >= probs.cols() {
            return Err(Error::LabelOutOfRange {
                label: l,
                classes: probs.cols(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions_leave_only_l2() {
        let p = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let w = DenseMatrix::from_vec(1, 2, vec![1.0, 2.0]).unwrap();
        let loss = masked_cross_entropy(&p, &[0, 1], &[true, true], 5e-4, &[&w]).unwrap();
        assert_eq!(loss, 5e-4 * 5.0);
    }

    #[test]
    fn uniform_five_classes() {
        let p = DenseMatrix::from_vec(3, 5, vec![0.2; 15]).unwrap();
        let loss = data_term(&p, &[0, 3, 4], &[true, true, false]).unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn two_node_fixture() {
        let p = DenseMatrix::from_rows(&[vec![0.75, 0.25], vec![0.75, 0.25]]).unwrap();
        let loss = data_term(&p, &[0, 1], &[true, true]).unwrap();
        assert!((loss + (0.75f64.ln() + 0.25f64.ln()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_mask_rejected() {
        let p = DenseMatrix::from_vec(1, 2, vec![0.5; 2]).unwrap();
        assert!(matches!(
            data_term(&p, &[0], &[false]),
            Err(Error::EmptyMask(_))
        ));
        assert!(matches!(
            data_term(&p, &[2], &[true]),
            Err(Error::LabelOutOfRange { .. })
        ));
    }
}
