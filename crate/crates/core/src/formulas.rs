//! Closed forms linking the loop-soup intensity `c` to the CLE parameter `κ`
//! and to the dimensions of cluster boundaries and of the carpet.

use crate::error::{Error, Result};

pub const KAPPA_MIN: f64 = 8.0 / 3.0;
pub const KAPPA_MAX: f64 = 4.0;

/// `κ ∈ (8/3, 4]`.
#[derive(Copy, Clone, Debug, PartialEq, PartialOrd)]
pub struct Kappa(f64);

impl Kappa {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa > KAPPA_MIN && kappa <= KAPPA_MAX {
            Ok(Kappa(kappa))
        } else {
            Err(Error::OutOfRange {
                name: "kappa",
                value: kappa,
                range: "(8/3, 4]",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Intensity in `(0, 1]`, where the κ correspondence applies.
#[derive(Copy, Clone, Debug, PartialEq, PartialOrd)]
pub struct Intensity(f64);

impl Intensity {
    pub fn new(c: f64) -> Result<Self> {
        if c > 0.0 && c <= 1.0 {
            Ok(Intensity(c))
        } else {
            Err(Error::OutOfRange {
                name: "c",
                value: c,
                range: "(0, 1]",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `c = (3κ − 8)(6 − κ) / 2κ`.
pub fn c_of_kappa(kappa: f64) -> Result<f64> {
    let k = Kappa::new(kappa)?.get();
    Ok((3.0 * k - 8.0) * (6.0 - k) / (2.0 * k))
}

/// `25 + c² − 26c`, clamped at zero where rounding pushes it just below.
fn discriminant(c: f64) -> f64 {
    let d = 25.0 + c * c - 26.0 * c;
    if d < 0.0 && d > -1e-15 {
        0.0
    } else {
        d
    }
}

/// The root of `3κ² + (2c − 26)κ + 48 = 0` lying in `(8/3, 4]`.
pub fn kappa_of_c(c: f64) -> Result<f64> {
    let c = Intensity::new(c)?.get();
    Ok((13.0 - c - libm::sqrt(discriminant(c))) / 3.0)
}

fn check_closed_unit(c: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&c) {
        Ok(c)
    } else {
        Err(Error::OutOfRange {
            name: "c",
            value: c,
            range: "[0, 1]",
        })
    }
}

/// Dimension of an outer cluster boundary, `(37 − c − √(25 + c² − 26c)) / 24`.
/// At `c = 0` this is the Brownian frontier value 4/3.
pub fn boundary_dimension(c: f64) -> Result<f64> {
    let c = check_closed_unit(c)?;
    Ok((37.0 - c - libm::sqrt(discriminant(c))) / 24.0)
}

/// Carpet dimension `(187 − 7c + √(25 + c² − 26c)) / 96`.
pub fn carpet_dimension(c: f64) -> Result<f64> {
    let c = check_closed_unit(c)?;
    Ok((187.0 - 7.0 * c + libm::sqrt(discriminant(c))) / 96.0)
}

/// SLE_κ curve dimension `1 + κ/8`.
pub fn sle_dimension(kappa: f64) -> f64 {
    1.0 + kappa / 8.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_values() {
        assert_eq!(c_of_kappa(4.0).unwrap(), 1.0);
        assert_eq!(c_of_kappa(3.0).unwrap(), 0.5);
        assert_eq!(kappa_of_c(1.0).unwrap(), 4.0);
        assert_eq!(kappa_of_c(0.5).unwrap(), 3.0);
        assert_eq!(carpet_dimension(1.0).unwrap(), 15.0 / 8.0);
        assert_eq!(carpet_dimension(0.0).unwrap(), 2.0);
        assert_eq!(boundary_dimension(0.0).unwrap(), 4.0 / 3.0);
        assert_eq!(boundary_dimension(1.0).unwrap(), 1.5);
    }

    #[test]
    fn near_lower_kappa_end() {
        let c = c_of_kappa(KAPPA_MIN + 1e-9).unwrap();
        assert!(c > 0.0 && c < 1e-8);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(c_of_kappa(KAPPA_MIN).is_err());
        assert!(c_of_kappa(4.0 + 1e-12).is_err());
        assert!(kappa_of_c(0.0).is_err());
        assert!(kappa_of_c(1.01).is_err());
        assert!(boundary_dimension(-0.1).is_err());
        assert!(carpet_dimension(1.5).is_err());
    }

    #[test]
    fn boundary_dimension_matches_sle() {
        let c = 0.37;
        let a = boundary_dimension(c).unwrap();
        let b = sle_dimension(kappa_of_c(c).unwrap());
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn carpet_dimension_decreasing() {
        let v: alloc::vec::Vec<f64> = (0..=1000)
            .map(|i| carpet_dimension(i as f64 / 1000.0).unwrap())
            .collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }
}
