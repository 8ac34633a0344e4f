use serde::{Deserialize, Serialize};

use super::HdcError;

/// A real-valued hypervector in `R^D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hypervector(Vec<f64>);

impl Hypervector {
    pub fn from_vec(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn ones(dim: usize) -> Self {
        Self(vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> Result<f64, HdcError> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// In-place `self += other`.
    pub fn add_assign(&mut self, other: &Self) -> Result<(), HdcError> {
        check_dims(self.dim(), other.dim())?;
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
        Ok(())
    }

    /// In-place `self *= other` component-wise.
    pub fn bind_assign(&mut self, other: &Self) -> Result<(), HdcError> {
        check_dims(self.dim(), other.dim())?;
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a *= b;
        }
        Ok(())
    }

    /// Checks that `self` has the expected dimension.
    pub fn expect_dim(&self, dim: usize) -> Result<(), HdcError> {
        check_dims(dim, self.dim())
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<(), HdcError> {
    if expected == found {
        Ok(())
    } else {
        Err(HdcError::DimensionMismatch { expected, found })
    }
}

/// Component-wise sum of a nonempty sequence of hypervectors.
pub fn bundle<'a, I>(hvs: I) -> Result<Hypervector, HdcError>
where
    I: IntoIterator<Item = &'a Hypervector>,
{
    let mut iter = hvs.into_iter();
    let mut acc = iter.next().ok_or(HdcError::EmptyBundle)?.clone();
    for hv in iter {
        acc.add_assign(hv)?;
    }
    Ok(acc)
}

/// Component-wise product.
pub fn bind(a: &Hypervector, b: &Hypervector) -> Result<Hypervector, HdcError> {
    let mut out = a.clone();
    out.bind_assign(b)?;
    Ok(out)
}

/// Component-wise product of a nonempty sequence of hypervectors.
pub fn bind_all<'a, I>(hvs: I) -> Result<Hypervector, HdcError>
where
    I: IntoIterator<Item = &'a Hypervector>,
{
    let mut iter = hvs.into_iter();
    let mut acc = iter.next().ok_or(HdcError::EmptyBundle)?.clone();
    for hv in iter {
        acc.bind_assign(hv)?;
    }
    Ok(acc)
}

/// Normalized dot product `(1/D) a·b`.
pub fn similarity(a: &Hypervector, b: &Hypervector) -> Result<f64, HdcError> {
    let dot = a.dot(b)?;
    Ok(dot / a.dim() as f64)
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Scales `h` to unit Euclidean norm. The zero vector maps to itself.
pub fn normalize(h: &Hypervector) -> Hypervector {
    let n = h.norm();
    if n == 0.0 {
        h.clone()
    } else {
        Hypervector(h.0.iter().map(|v| v / n).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hv(v: &[f64]) -> Hypervector {
        Hypervector::from_vec(v.to_vec())
    }

    #[test]
    fn bundle_of_one_is_identity() {
        let a = hv(&[1.0, -2.0, 3.5]);
        assert_eq!(bundle([&a]).unwrap(), a);
    }

    #[test]
    fn bundle_adds_componentwise() {
        let a = hv(&[1.0, -1.0, 1.0, 1.0]);
        let b = hv(&[1.0, 1.0, -1.0, 1.0]);
        assert_eq!(bundle([&a, &b]).unwrap(), hv(&[2.0, 0.0, 0.0, 2.0]));
    }

    #[test]
    fn empty_bundle_is_an_error() {
        let none: [&Hypervector; 0] = [];
        assert_eq!(bundle(none), Err(HdcError::EmptyBundle));
    }

    #[test]
    fn bind_multiplies_componentwise() {
        let out = bind(&hv(&[1.0, -1.0]), &hv(&[1.0, 1.0])).unwrap();
        assert_eq!(out, hv(&[1.0, -1.0]));
    }

    #[test]
    fn bipolar_bind_is_self_inverse() {
        let a = hv(&[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(bind(&a, &a).unwrap(), Hypervector::ones(4));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = bind(&hv(&[1.0]), &hv(&[1.0, 2.0])).unwrap_err();
        assert_eq!(err, HdcError::DimensionMismatch { expected: 1, found: 2 });
        assert!(similarity(&hv(&[1.0]), &hv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn self_similarity_of_bipolar_is_one() {
        let a = hv(&[1.0, -1.0, -1.0, 1.0, 1.0]);
        assert_eq!(similarity(&a, &a).unwrap(), 1.0);
        assert_eq!(similarity(&a, &a.negated()).unwrap(), -1.0);
    }

    #[test]
    fn normalize_cases() {
        assert_eq!(normalize(&hv(&[3.0, 4.0])), hv(&[0.6, 0.8]));
        assert_eq!(normalize(&Hypervector::zeros(3)), Hypervector::zeros(3));
        let h = hv(&[0.3, -2.0, 7.0]);
        let once = normalize(&h);
        let twice = normalize(&once);
        for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
