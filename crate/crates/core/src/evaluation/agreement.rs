//! Chance-corrected agreement between two annotators.

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub kappa: f64,
    /// 0–100.
    pub percent_agreement: f64,
    pub n: usize,
    /// Annotator A on rows, B on columns, canonical class order.
    pub contingency: [[usize; Label::COUNT]; Label::COUNT],
    pub distribution_a: [usize; Label::COUNT],
    pub distribution_b: [usize; Label::COUNT],
}

impl AgreementReport {
    pub fn agreed(&self) -> usize {
        (0..Label::COUNT).map(|i| self.contingency[i][i]).sum()
    }

    /// Agreed counts per class: the instances that survive when
    /// disagreements are excluded.
    pub fn retained(&self) -> [usize; Label::COUNT] {
        std::array::from_fn(|i| self.contingency[i][i])
    }
}

/// Cohen's κ = (pₒ − pₑ)/(1 − pₑ). When both annotators use one and the same
/// label throughout, pₑ = 1 and κ is defined as 0.
pub fn cohen_kappa(a: &[Label], b: &[Label]) -> Result<AgreementReport> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "annotator sequences differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::invalid("no annotation pairs"));
    }
    let n = a.len();
    let mut contingency = [[0usize; Label::COUNT]; Label::COUNT];
    for (x, y) in a.iter().zip(b) {
        contingency[x.index()][y.index()] += 1;
    }
    let distribution_a: [usize; Label::COUNT] = std::array::from_fn(|i| contingency[i].iter().sum());
    let distribution_b: [usize; Label::COUNT] =
        std::array::from_fn(|j| contingency.iter().map(|r| r[j]).sum());

    let nf = n as f64;
    let agreed: usize = (0..Label::COUNT).map(|i| contingency[i][i]).sum();
    let po = agreed as f64 / nf;
    let pe: f64 = (0..Label::COUNT)
        .map(|i| (distribution_a[i] as f64 / nf) * (distribution_b[i] as f64 / nf))
        .sum();
    let kappa = if pe >= 1.0 { 0.0 } else { (po - pe) / (1.0 - pe) };

    Ok(AgreementReport {
        kappa,
        percent_agreement: 100.0 * po,
        n,
        contingency,
        distribution_a,
        distribution_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::*;

    #[test]
    fn hand_oracle() {
        let r = cohen_kappa(&[Nom, Nom, Pleon, Pleon], &[Nom, Pleon, Pleon, Pleon]).unwrap();
        assert!((r.kappa - 0.5).abs() < 1e-12);
        assert_eq!(r.percent_agreement, 75.0);
        assert_eq!(r.distribution_a, [2, 2, 0]);
        assert_eq!(r.distribution_b, [1, 3, 0]);
    }

    #[test]
    fn identical_is_one() {
        let a = [Nom, Clause, Pleon, Nom];
        assert_eq!(cohen_kappa(&a, &a).unwrap().kappa, 1.0);
    }

    #[test]
    fn constant_annotator_is_zero() {
        let r = cohen_kappa(&[Nom, Nom, Nom], &[Nom, Pleon, Clause]).unwrap();
        assert_eq!(r.kappa, 0.0);
        let r = cohen_kappa(&[Pleon], &[Pleon]).unwrap();
        assert_eq!(r.kappa, 0.0);
        assert_eq!(r.percent_agreement, 100.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(cohen_kappa(&[Nom], &[Nom, Nom]).is_err());
        assert!(cohen_kappa(&[], &[]).is_err());
    }
}
