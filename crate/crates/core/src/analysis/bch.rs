//! The double exponential `h_x(v,u) = log_x(exp_{exp_x(v)}(Π u))` and its
//! curvature series.

use crate::error::{GeometryError, Result};
use crate::geometry::{self, ConnectionSpace, Point, TangentVector};

/// One evaluated term of the series.
#[derive(Debug, Clone, PartialEq)]
pub struct BchTerm {
    pub label: &'static str,
    /// Joint degree of the term in `(u, v)`.
    pub degree: usize,
    pub value: TangentVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BchTruncation {
    pub order: usize,
    pub terms: Vec<BchTerm>,
}

impl BchTruncation {
    /// Sum of all retained terms.
    pub fn value(&self) -> TangentVector {
        let mut iter = self.terms.iter();
        let first = iter.next().expect("a truncation has at least one term");
        iter.fold(first.value.clone(), |acc, t| acc.add(&t.value))
    }

    pub fn term(&self, label: &str) -> Option<&TangentVector> {
        self.terms.iter().find(|t| t.label == label).map(|t| &t.value)
    }
}

/// Truncation of the series of `h_x(v,u)` at joint degree `order ∈ {1,2,3,4}`:
///
/// `v + u + 1/6 R(u,v)v + 1/3 R(u,v)u + 1/12 ∇_vR(u,v)v + 1/24 ∇_uR(u,v)v
///  + 5/24 ∇_vR(u,v)u + 1/12 ∇_uR(u,v)u`.
///
/// There are no degree-2 terms for torsion-free connections.
pub fn bch_series(
    space: &dyn ConnectionSpace,
    x: &Point,
    v: &TangentVector,
    u: &TangentVector,
    order: usize,
) -> Result<BchTruncation> {
    if !(1..=4).contains(&order) {
        return Err(GeometryError::InvalidArgument(format!(
            "series order must be in 1..=4, got {order}"
        )));
    }
    if order >= 3 && !space.capabilities().has_curvature {
        return Err(GeometryError::Unsupported(format!(
            "{} has no curvature capability",
            space.name()
        )));
    }
    let mut terms = vec![
        BchTerm { label: "v", degree: 1, value: v.clone() },
        BchTerm { label: "u", degree: 1, value: u.clone() },
    ];
    if order >= 3 {
        let r_v = geometry::curvature(space, x, u, v, v)?;
        let r_u = geometry::curvature(space, x, u, v, u)?;
        terms.push(BchTerm { label: "R(u,v)v/6", degree: 3, value: r_v.scale(1.0 / 6.0) });
        terms.push(BchTerm { label: "R(u,v)u/3", degree: 3, value: r_u.scale(1.0 / 3.0) });
    }
    if order >= 4 {
        let nr = |dir: &TangentVector, w: &TangentVector| geometry::nabla_curvature(space, x, dir, u, v, w);
        terms.push(BchTerm { label: "DvR(u,v)v/12", degree: 4, value: nr(v, v)?.scale(1.0 / 12.0) });
        terms.push(BchTerm { label: "DuR(u,v)v/24", degree: 4, value: nr(u, v)?.scale(1.0 / 24.0) });
        terms.push(BchTerm { label: "5DvR(u,v)u/24", degree: 4, value: nr(v, u)?.scale(5.0 / 24.0) });
        terms.push(BchTerm { label: "DuR(u,v)u/12", degree: 4, value: nr(u, u)?.scale(1.0 / 12.0) });
    }
    Ok(BchTruncation { order, terms })
}

/// `log_x(exp_y(Π_x^y u))` with `y = exp_x(v)`, using the space's transport.
pub fn bch_numeric(
    space: &dyn ConnectionSpace,
    x: &Point,
    v: &TangentVector,
    u: &TangentVector,
) -> Result<TangentVector> {
    let y = geometry::exp(space, x, v)?;
    let u_y = if v.is_zero() {
        u.clone()
    } else {
        let moved = space.transport_along(u, v)?;
        TangentVector::new(y.clone(), moved.components)
    };
    let z = geometry::exp(space, &y, &u_y)?;
    geometry::log(space, x, &z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{Euclidean, Sphere};

    #[test]
    fn flat_series_is_sum_at_every_order() {
        let e = Euclidean::new(3);
        let x = Point::from_slice(&[1.0, 2.0, 3.0]);
        let v = TangentVector::from_slice(&x, &[0.1, 0.2, -0.3]);
        let u = TangentVector::from_slice(&x, &[-0.4, 0.0, 0.5]);
        for order in 1..=4 {
            let s = bch_series(&e, &x, &v, &u, order).unwrap().value();
            assert!((s.components - (&v.components + &u.components)).norm() < 1e-15);
        }
        let n = bch_numeric(&e, &x, &v, &u).unwrap();
        assert!((n.components - (&v.components + &u.components)).norm() < 1e-15);
    }

    #[test]
    fn zero_v_gives_u() {
        let s = Sphere::new(2);
        let x = Point::from_slice(&[0.0, 0.0, 1.0]);
        let v = TangentVector::zero(&x);
        let u = TangentVector::from_slice(&x, &[0.1, -0.05, 0.0]);
        for order in 1..=4 {
            let out = bch_series(&s, &x, &v, &u, order).unwrap().value();
            assert!((out.components - &u.components).norm() < 1e-15);
        }
        let n = bch_numeric(&s, &x, &v, &u).unwrap();
        assert!((n.components - &u.components).norm() < 1e-14);
    }

    #[test]
    fn zero_u_gives_v() {
        let s = Sphere::new(2);
        let x = Point::from_slice(&[1.0, 0.0, 0.0]);
        let v = TangentVector::from_slice(&x, &[0.0, 0.3, -0.1]);
        let n = bch_numeric(&s, &x, &v, &TangentVector::zero(&x)).unwrap();
        assert!((n.components - &v.components).norm() < 1e-10);
    }

    #[test]
    fn sphere_orders_three_and_four_coincide() {
        let s = Sphere::new(2);
        let x = Point::from_slice(&[1.0, 0.0, 0.0]);
        let v = TangentVector::from_slice(&x, &[0.0, 0.1, 0.02]);
        let u = TangentVector::from_slice(&x, &[0.0, -0.03, 0.1]);
        let s3 = bch_series(&s, &x, &v, &u, 3).unwrap();
        let s4 = bch_series(&s, &x, &v, &u, 4).unwrap();
        assert_eq!(s3.terms.len(), 4);
        assert_eq!(s4.terms.len(), 8);
        assert!((s3.value().components - s4.value().components).norm() < 1e-10);
        // R(u,v)v on the unit sphere is ⟨v,v⟩u − ⟨u,v⟩v
        let expect = (&u.components * v.components.dot(&v.components)
            - &v.components * u.components.dot(&v.components))
            / 6.0;
        assert!((s3.term("R(u,v)v/6").unwrap().components.clone() - expect).norm() < 1e-15);
    }

    #[test]
    fn order_two_equals_order_one() {
        let s = Sphere::new(2);
        let x = Point::from_slice(&[1.0, 0.0, 0.0]);
        let v = TangentVector::from_slice(&x, &[0.0, 0.1, 0.0]);
        let u = TangentVector::from_slice(&x, &[0.0, 0.0, 0.1]);
        let a = bch_series(&s, &x, &v, &u, 1).unwrap();
        let b = bch_series(&s, &x, &v, &u, 2).unwrap();
        assert_eq!(a.value(), b.value());
        assert!(bch_series(&s, &x, &v, &u, 5).is_err());
    }
}
