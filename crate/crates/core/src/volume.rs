//! Cubic sample arrays shared by the transforms, phantoms and file formats.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Domain {
    Spatial,
    Frequency,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Real(v) => v.len(),
            Samples::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An n₁×n₂×n₃ array stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledVolume {
    pub dims: [usize; 3],
    pub data: Samples,
    pub domain: Domain,
}

impl SampledVolume {
    pub fn new(dims: [usize; 3], data: Samples, domain: Domain) -> Result<Self> {
        let expected = dims.iter().product::<usize>();
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: data.len(),
            });
        }
        Ok(Self { dims, data, domain })
    }

    pub fn real(n: usize, data: Vec<f64>) -> Result<Self> {
        Self::new([n; 3], Samples::Real(data), Domain::Spatial)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            dims: [n; 3],
            data: Samples::Real(alloc::vec![0.0; n * n * n]),
            domain: Domain::Spatial,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Side length if the volume is a cube.
    pub fn cube_side(&self) -> Option<usize> {
        (self.dims[0] == self.dims[1] && self.dims[1] == self.dims[2]).then_some(self.dims[0])
    }

    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        match &self.data {
            Samples::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Samples::Complex(v) => v.clone(),
        }
    }

    /// Σ |f|².
    pub fn energy(&self) -> f64 {
        match &self.data {
            Samples::Real(v) => v.iter().map(|x| x * x).sum(),
            Samples::Complex(v) => v.iter().map(|x| x.norm_sqr()).sum(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.data {
            Samples::Real(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Samples::Complex(v) => v.iter().fold(0.0, |m, x| m.max(x.norm())),
        }
    }

    /// Σ |f − g|² over matching samples.
    pub fn distance_sqr(&self, other: &SampledVolume) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        let a = self.to_complex();
        let b = other.to_complex();
        Ok(a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn length_is_checked() {
        assert!(SampledVolume::real(2, vec![0.0; 7]).is_err());
        let v = SampledVolume::real(2, vec![1.0; 8]).unwrap();
        assert_eq!(v.energy(), 8.0);
        assert_eq!(v.offset(1, 0, 1), 5);
        assert_eq!(v.cube_side(), Some(2));
    }

    #[test]
    fn distance_between_real_and_complex() {
        let a = SampledVolume::real(1, vec![3.0]).unwrap();
        let b = SampledVolume::new(
            [1; 3],
            Samples::Complex(vec![Complex64::new(0.0, 4.0)]),
            Domain::Spatial,
        )
        .unwrap();
        assert_eq!(a.distance_sqr(&b).unwrap(), 25.0);
    }
}
