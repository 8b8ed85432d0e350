//! Product quadrature on the sphere: Gauss–Legendre in x = cos θ on the two
//! hemispheres separately, uniform trapezoid in φ.
//!
//! Weights integrate against the round measure normalised to total mass 1,
//! dμ = dx dφ / 4π. Splitting at the equator keeps the rule spectrally
//! accurate for densities that are only piecewise smooth across |z| = 1.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::{gauss_legendre_on, pairwise_sum};

/// A point on the sphere in polar coordinates: `x = cos θ`, azimuth `phi`.
/// The north pole x = 1 is z = 0 in chart 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub x: f64,
    pub phi: f64,
}

impl SpherePoint {
    pub fn new(x: f64, phi: f64) -> Self {
        Self { x, phi }
    }

    pub fn sin_theta(&self) -> f64 {
        ((1.0 - self.x) * (1.0 + self.x)).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    n_theta: usize,
    n_phi: usize,
    /// Ring abscissae x = cos θ, north panel first.
    rings: Vec<f64>,
    /// Ring weights against dx/2; they sum to 1.
    ring_weights: Vec<f64>,
    phis: Vec<f64>,
}

impl QuadratureRule {
    /// `n_theta` nodes per hemisphere panel, `n_phi` azimuthal nodes.
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::Resolution(format!(
                "quadrature needs n_theta > 0 and n_phi > 0 (got {n_theta}, {n_phi})"
            )));
        }
        let (north, wn) = gauss_legendre_on(n_theta, 0.0, 1.0);
        let (south, ws) = gauss_legendre_on(n_theta, -1.0, 0.0);
        let mut rings = Vec::with_capacity(2 * n_theta);
        let mut ring_weights = Vec::with_capacity(2 * n_theta);
        for (x, w) in north.iter().rev().zip(wn.iter().rev()) {
            rings.push(*x);
            ring_weights.push(0.5 * w);
        }
        for (x, w) in south.iter().rev().zip(ws.iter().rev()) {
            rings.push(*x);
            ring_weights.push(0.5 * w);
        }
        let phis = (0..n_phi)
            .map(|j| 2.0 * PI * j as f64 / n_phi as f64)
            .collect();
        Ok(Self {
            n_theta,
            n_phi,
            rings,
            ring_weights,
            phis,
        })
    }

    /// The smallest rule `build_basis` accepts for degree `l`.
    pub fn minimal_for_degree(l: usize) -> Self {
        Self::new(2 * l + 2, 2 * l + 2).expect("positive sizes")
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn rings(&self) -> &[f64] {
        &self.rings
    }

    pub fn ring_weights(&self) -> &[f64] {
        &self.ring_weights
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn len(&self) -> usize {
        self.rings.len() * self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn phi_weight(&self) -> f64 {
        1.0 / self.n_phi as f64
    }

    /// All nodes with their weights, ring-major.
    pub fn nodes(&self) -> impl Iterator<Item = (SpherePoint, f64)> + '_ {
        let wp = self.phi_weight();
        self.rings
            .iter()
            .zip(&self.ring_weights)
            .flat_map(move |(&x, &wr)| {
                self.phis
                    .iter()
                    .map(move |&phi| (SpherePoint::new(x, phi), wr * wp))
            })
    }

    /// ∫ f dμ with a fixed pairwise reduction order.
    pub fn integrate<F: Fn(SpherePoint) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self.nodes().map(|(p, w)| w * f(p)).collect();
        pairwise_sum(&terms)
    }

    /// Fallible variant of [`integrate`](Self::integrate).
    pub fn try_integrate<F: Fn(SpherePoint) -> Result<f64>>(&self, f: F) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.len());
        for (p, w) in self.nodes() {
            terms.push(w * f(p)?);
        }
        Ok(pairwise_sum(&terms))
    }
}

/// Equal-area sample grid: `bands` bands uniform in x times `bands` uniform
/// azimuths, sampled at cell centres. Used for sup-norm indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    points: Vec<SpherePoint>,
}

impl SampleGrid {
    pub fn equal_area(bands: usize) -> Self {
        let mut points = Vec::with_capacity(bands * bands);
        for i in 0..bands {
            let x = -1.0 + (2.0 * i as f64 + 1.0) / bands as f64;
            for j in 0..bands {
                let phi = 2.0 * PI * (j as f64 + 0.5) / bands as f64;
                points.push(SpherePoint::new(x, phi));
            }
        }
        Self { points }
    }

    /// The default 65 × 65 grid; the odd band count puts a ring on the equator.
    pub fn standard() -> Self {
        Self::equal_area(65)
    }

    pub fn from_points(points: Vec<SpherePoint>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        let q = QuadratureRule::new(10, 12).unwrap();
        let total: f64 = q.nodes().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(q.nodes().all(|(_, w)| w > 0.0));
        assert_eq!(q.len(), 240);
    }

    #[test]
    fn integrates_zonal_polynomials_and_trig() {
        let q = QuadratureRule::new(6, 8).unwrap();
        // ∫ x² dμ = 1/3
        assert!((q.integrate(|p| p.x * p.x) - 1.0 / 3.0).abs() < 1e-15);
        // ∫ cos²φ dμ = 1/2
        assert!((q.integrate(|p| p.phi.cos().powi(2)) - 0.5).abs() < 1e-15);
        assert!(q.integrate(|p| (3.0 * p.phi).sin()).abs() < 1e-15);
    }

    #[test]
    fn equator_split_resolves_kinked_density() {
        // ∫ 4/(1+|x|)² dμ = 2 exactly; the kink at x = 0 sits on a panel edge.
        let q = QuadratureRule::new(20, 1).unwrap();
        let v = q.integrate(|p| 4.0 / (1.0 + p.x.abs()).powi(2));
        assert!((v - 2.0).abs() < 1e-13, "{v}");
    }

    #[test]
    fn rejects_empty_rule() {
        assert!(QuadratureRule::new(0, 4).is_err());
    }

    #[test]
    fn standard_grid_contains_the_equator() {
        let g = SampleGrid::standard();
        assert_eq!(g.len(), 65 * 65);
        assert!(g.points().iter().any(|p| p.x.abs() < 1e-15));
        assert!(g.points().iter().all(|p| p.x.abs() < 1.0));
    }
}
