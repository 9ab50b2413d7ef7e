//! Concrete locally compact groups: Euclidean space, the ax+b group and the
//! flat torus.
//!
//! Elements are stored as plain coordinate vectors. In the ax+b group the pair
//! `(a, b)` stands for the affine map `x -> a x + b`, so the product is
//! `(a, b)(c, d) = (ac, ad + b)` and the identity is `(1, 0)`. Algebraic
//! identities hold to about `1e-12` per coordinate for moderate magnitudes.

use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Coordinate storage; inline for every model we ship.
pub type Coords = SmallVec<[f64; 4]>;

/// A point of a group model.
#[derive(Clone, PartialEq)]
pub struct GroupElement {
    coords: Coords,
}

impl GroupElement {
    pub fn new(coords: &[f64]) -> Self {
        GroupElement {
            coords: Coords::from_slice(coords),
        }
    }

    pub fn from_coords(coords: Coords) -> Self {
        GroupElement { coords }
    }

    /// Convenience for ax+b elements.
    pub fn ab(a: f64, b: f64) -> Self {
        GroupElement::new(&[a, b])
    }

    pub fn scalar(x: f64) -> Self {
        GroupElement::new(&[x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// First coordinate; the scale `a` in the ax+b group.
    pub fn a(&self) -> f64 {
        self.coords[0]
    }

    /// Second coordinate; the offset `b` in the ax+b group.
    pub fn b(&self) -> f64 {
        self.coords[1]
    }

    /// Lexicographic total order on coordinates.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (x, y) in self.coords.iter().zip(other.coords.iter()) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.coords.len().cmp(&other.coords.len())
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords.as_slice())
    }
}

/// One of the three shipped group models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupModel {
    /// `R^d` under addition.
    Euclidean { dim: usize },
    /// The affine group of the line, identified with the right half-plane.
    AxB,
    /// The flat torus `[0,1)^d` under addition mod 1.
    Torus { dim: usize },
}

/// Reduce to `[0, 1)`; values that round up to `1.0` map to `0.0`.
pub(crate) fn wrap_unit(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl GroupModel {
    pub fn dim(&self) -> usize {
        match *self {
            GroupModel::Euclidean { dim } | GroupModel::Torus { dim } => dim,
            GroupModel::AxB => 2,
        }
    }

    pub fn is_unimodular(&self) -> bool {
        !matches!(self, GroupModel::AxB)
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, GroupModel::Torus { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            GroupModel::Euclidean { .. } => "euclidean",
            GroupModel::AxB => "ax_b",
            GroupModel::Torus { .. } => "torus",
        }
    }

    pub fn identity(&self) -> GroupElement {
        match *self {
            GroupModel::AxB => GroupElement::ab(1.0, 0.0),
            GroupModel::Euclidean { dim } | GroupModel::Torus { dim } => {
                GroupElement::from_coords(smallvec::smallvec![0.0; dim])
            }
        }
    }

    pub fn validate(&self, x: &GroupElement) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        if let Some(&bad) = x.coords().iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        match self {
            GroupModel::AxB if x.a() <= 0.0 => Err(Error::NonPositiveScale(x.a())),
            GroupModel::Torus { .. } if x.coords().iter().any(|&c| !(0.0..1.0).contains(&c)) => {
                Err(Error::InvalidParameter(format!(
                    "torus coordinates must lie in [0, 1): {x:?}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Build a validated element; torus coordinates are reduced mod 1 first.
    pub fn element(&self, coords: &[f64]) -> Result<GroupElement> {
        let x = match self {
            GroupModel::Torus { .. } => {
                GroupElement::from_coords(coords.iter().map(|&c| wrap_unit(c)).collect())
            }
            _ => GroupElement::new(coords),
        };
        self.validate(&x)?;
        Ok(x)
    }

    pub fn multiply(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(self.mul(x, y))
    }

    pub fn invert(&self, x: &GroupElement) -> Result<GroupElement> {
        self.validate(x)?;
        Ok(self.inv(x))
    }

    pub fn modular(&self, x: &GroupElement) -> Result<f64> {
        self.validate(x)?;
        Ok(self.delta(x))
    }

    /// Unchecked product for inputs already known to be valid.
    pub(crate) fn mul(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        match self {
            GroupModel::AxB => {
                let (a, b) = (x.a(), x.b());
                let (c, d) = (y.a(), y.b());
                GroupElement::ab(a * c, a * d + b)
            }
            GroupModel::Euclidean { .. } => GroupElement::from_coords(
                x.coords().iter().zip(y.coords()).map(|(p, q)| p + q).collect(),
            ),
            GroupModel::Torus { .. } => GroupElement::from_coords(
                x.coords()
                    .iter()
                    .zip(y.coords())
                    .map(|(p, q)| wrap_unit(p + q))
                    .collect(),
            ),
        }
    }

    pub(crate) fn inv(&self, x: &GroupElement) -> GroupElement {
        match self {
            GroupModel::AxB => GroupElement::ab(1.0 / x.a(), -x.b() / x.a()),
            GroupModel::Euclidean { .. } => {
                GroupElement::from_coords(x.coords().iter().map(|c| -c).collect())
            }
            GroupModel::Torus { .. } => {
                GroupElement::from_coords(x.coords().iter().map(|c| wrap_unit(-c)).collect())
            }
        }
    }

    /// `x^{-1} y`, the displacement from `x` to `y` seen from `x`.
    pub(crate) fn relative(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        match self {
            // (1/a, -b/a)(c, d) = (c/a, (d - b)/a), written to avoid an extra rounding.
            GroupModel::AxB => GroupElement::ab(y.a() / x.a(), (y.b() - x.b()) / x.a()),
            _ => self.mul(&self.inv(x), y),
        }
    }

    pub(crate) fn delta(&self, x: &GroupElement) -> f64 {
        match self {
            GroupModel::AxB => 1.0 / x.a(),
            _ => 1.0,
        }
    }

    /// Density of the left Haar measure with respect to coordinate volume.
    pub fn haar_density(&self, x: &GroupElement) -> f64 {
        match self {
            GroupModel::AxB => 1.0 / (x.a() * x.a()),
            _ => 1.0,
        }
    }

    /// Per-coordinate deviation between two elements, using circular
    /// distance on the torus.
    pub fn coord_deviation(&self, x: &GroupElement, y: &GroupElement) -> f64 {
        x.coords()
            .iter()
            .zip(y.coords())
            .map(|(p, q)| {
                let d = (p - q).abs();
                match self {
                    GroupModel::Torus { .. } => d.min(1.0 - d),
                    _ => d,
                }
            })
            .fold(0.0, f64::max)
    }

    /// Metric used by neighbour shifts: Euclidean distance, or the geodesic
    /// distance on the torus. Not meaningful for ax+b.
    pub fn distance(&self, x: &GroupElement, y: &GroupElement) -> f64 {
        x.coords()
            .iter()
            .zip(y.coords())
            .map(|(p, q)| {
                let d = (p - q).abs();
                let d = match self {
                    GroupModel::Torus { .. } => d.min(1.0 - d),
                    _ => d,
                };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const AXB: GroupModel = GroupModel::AxB;

    #[test]
    fn axb_product_and_inverse() {
        let p = AXB
            .multiply(&GroupElement::ab(2.0, 1.0), &GroupElement::ab(3.0, 4.0))
            .unwrap();
        assert_eq!(p, GroupElement::ab(6.0, 9.0));
        let q = AXB
            .multiply(&AXB.identity(), &GroupElement::ab(5.0, -2.0))
            .unwrap();
        assert_eq!(q, GroupElement::ab(5.0, -2.0));
        assert_eq!(
            AXB.invert(&GroupElement::ab(2.0, 4.0)).unwrap(),
            GroupElement::ab(0.5, -2.0)
        );
        let x = GroupElement::ab(2.0, 4.0);
        let e = AXB.multiply(&x, &AXB.invert(&x).unwrap()).unwrap();
        assert!(AXB.coord_deviation(&e, &AXB.identity()) < 1e-12);
    }

    #[test]
    fn euclidean_product() {
        let m = GroupModel::Euclidean { dim: 2 };
        let p = m
            .multiply(&GroupElement::new(&[1.0, 2.0]), &GroupElement::new(&[3.0, 4.0]))
            .unwrap();
        assert_eq!(p, GroupElement::new(&[4.0, 6.0]));
    }

    #[test]
    fn identity_inverse_is_identity() {
        for m in [
            GroupModel::Euclidean { dim: 3 },
            GroupModel::AxB,
            GroupModel::Torus { dim: 2 },
        ] {
            assert_eq!(m.invert(&m.identity()).unwrap(), m.identity());
            assert_eq!(m.modular(&m.identity()).unwrap(), 1.0);
        }
    }

    #[test]
    fn modular_values() {
        assert_eq!(AXB.modular(&GroupElement::ab(2.0, 3.0)).unwrap(), 0.5);
        let m = GroupModel::Euclidean { dim: 1 };
        assert_eq!(m.modular(&GroupElement::scalar(-17.0)).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_elements() {
        assert_eq!(
            AXB.multiply(&GroupElement::ab(0.0, 1.0), &AXB.identity()),
            Err(Error::NonPositiveScale(0.0))
        );
        assert!(matches!(
            AXB.invert(&GroupElement::scalar(1.0)),
            Err(Error::DimensionMismatch { .. })
        ));
        let t = GroupModel::Torus { dim: 1 };
        assert!(t.validate(&GroupElement::scalar(1.0)).is_err());
    }

    #[test]
    fn torus_wraps_ties_to_zero() {
        let t = GroupModel::Torus { dim: 1 };
        assert_eq!(t.element(&[1.0]).unwrap(), GroupElement::scalar(0.0));
        assert_eq!(t.element(&[-1e-18]).unwrap(), GroupElement::scalar(0.0));
        let s = t
            .multiply(&GroupElement::scalar(0.75), &GroupElement::scalar(0.25))
            .unwrap();
        assert_eq!(s, GroupElement::scalar(0.0));
    }

    fn random_element(m: GroupModel, rng: &mut ChaCha8Rng) -> GroupElement {
        match m {
            GroupModel::AxB => {
                GroupElement::ab(rng.random_range(0.5..2.0), rng.random_range(-2.0..2.0))
            }
            GroupModel::Euclidean { dim } => GroupElement::from_coords(
                (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect(),
            ),
            GroupModel::Torus { dim } => {
                GroupElement::from_coords((0..dim).map(|_| rng.random::<f64>()).collect())
            }
        }
    }

    #[test]
    fn associativity_and_modular_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [
            GroupModel::Euclidean { dim: 2 },
            GroupModel::AxB,
            GroupModel::Torus { dim: 2 },
        ] {
            for _ in 0..10_000 {
                let x = random_element(m, &mut rng);
                let y = random_element(m, &mut rng);
                let z = random_element(m, &mut rng);
                let left = m.mul(&m.mul(&x, &y), &z);
                let right = m.mul(&x, &m.mul(&y, &z));
                assert!(m.coord_deviation(&left, &right) <= 1e-12, "{m:?} {x:?} {y:?} {z:?}");
                let dxy = m.delta(&m.mul(&x, &y));
                let prod = m.delta(&x) * m.delta(&y);
                assert!((dxy - prod).abs() <= 1e-12 * prod);
                let e = m.mul(&x, &m.inv(&x));
                assert!(m.coord_deviation(&e, &m.identity()) <= 1e-12);
            }
        }
    }

    #[test]
    fn relative_matches_inverse_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = random_element(AXB, &mut rng);
            let y = random_element(AXB, &mut rng);
            let r = AXB.relative(&x, &y);
            let s = AXB.mul(&AXB.inv(&x), &y);
            assert!(AXB.coord_deviation(&r, &s) <= 1e-12);
        }
    }
}
