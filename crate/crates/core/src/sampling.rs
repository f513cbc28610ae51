//! Deterministic sampling of chart boxes.

use rand::distributions::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Closed per-coordinate intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    bounds: Vec<(f64, f64)>,
}

impl BoxDomain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Contract("box has no coordinates".into()));
        }
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Contract(format!(
                    "box interval {k} is empty or unbounded: [{lo}, {hi}]"
                )));
            }
        }
        Ok(BoxDomain { bounds })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        BoxDomain::new(vec![(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.bounds).all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    pub fn contains_strictly(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.bounds).all(|(x, (lo, hi))| *lo < *x && *x < *hi)
    }

    /// Cartesian product `self x other`.
    pub fn product(&self, other: &BoxDomain) -> BoxDomain {
        let mut bounds = self.bounds.clone();
        bounds.extend_from_slice(&other.bounds);
        BoxDomain { bounds }
    }

    /// Restrict to a subset of coordinates.
    pub fn select(&self, coords: &[usize]) -> BoxDomain {
        BoxDomain {
            bounds: coords.iter().map(|&k| self.bounds[k]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub seed: u64,
    pub domain: BoxDomain,
    pub points: Vec<Vec<f64>>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.iter().map(Vec::as_slice)
    }
}

/// `count` points drawn uniformly from the open box.
pub fn sample(domain: &BoxDomain, count: usize, seed: u64) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::Contract("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..count)
        .map(|_| {
            domain
                .bounds
                .iter()
                .map(|&(lo, hi)| {
                    // Open01 excludes both ends; the clamp guards rounding in lo + w*t.
                    let t: f64 = Open01.sample(&mut rng);
                    let x = lo + (hi - lo) * t;
                    if x <= lo || x >= hi {
                        0.5 * (lo + hi)
                    } else {
                        x
                    }
                })
                .collect()
        })
        .collect();
    Ok(SampleSet {
        seed,
        domain: domain.clone(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_inside_unit_interval() {
        let s = sample(&BoxDomain::new(vec![(0.0, 1.0)]).unwrap(), 1, 7).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.points[0][0] > 0.0 && s.points[0][0] < 1.0);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let b = BoxDomain::cube(3, -2.0, 2.0).unwrap();
        assert_eq!(sample(&b, 10, 99).unwrap(), sample(&b, 10, 99).unwrap());
        assert_ne!(sample(&b, 10, 99).unwrap(), sample(&b, 10, 100).unwrap());
    }

    #[test]
    fn sixty_four_interior_points() {
        let b = BoxDomain::new(vec![(-1.0, 1.0), (0.5, 2.0)]).unwrap();
        let s = sample(&b, 64, 0).unwrap();
        assert_eq!(s.len(), 64);
        assert!(s.iter().all(|p| b.contains_strictly(p)));
    }

    #[test]
    fn empty_box_rejected() {
        assert!(BoxDomain::new(vec![(1.0, 1.0)]).is_err());
        assert!(BoxDomain::new(vec![]).is_err());
        let b = BoxDomain::cube(1, 0.0, 1.0).unwrap();
        assert!(sample(&b, 0, 1).is_err());
    }
}
