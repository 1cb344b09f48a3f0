use nalgebra::Matrix2;

use super::ray_speed;
use crate::Vec2;

/// Barycentric slack for the characteristic-in-cone test.
const CONE_TOL: f64 = 1e-9;
/// Smallest sine of the angle between the two simplex edges.
const DEGENERATE_SIN: f64 = 1e-9;

/// Result of one local solve on the triangle `(X, Xj, Xk)`.
///
/// With `P` the matrix whose rows are `X - Xj` and `X - Xk`, the gradient is
/// approximated as `grad u = P^-1 (a v + b)` where `a = (1, 1)` and
/// `b = (-uj, -uk)`. Substituting into `V^2 |grad u|^2 = (1 + <grad u, W>)^2`
/// gives `A v^2 + B v + C = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexUpdate {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Larger real root, or `+inf` when there is none.
    pub candidate: f64,
    /// Whether the flow direction `-V grad u / |grad u| + W` at `X` points into
    /// the cone spanned by `Xj - X` and `Xk - X`.
    pub characteristic_inside: bool,
    /// Candidate is usable: real root, consistent sign, inside the cone, and
    /// strictly above both neighbour values.
    pub valid: bool,
}

impl SimplexUpdate {
    fn invalid(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c, candidate: f64::INFINITY, characteristic_inside: false, valid: false }
    }

    pub fn value(&self) -> Option<f64> {
        self.valid.then_some(self.candidate)
    }
}

/// Travel time from `x` to the accepted node `xj` along the straight edge,
/// plus `uj`. Uses the ground speed along the edge under the wind at `x`.
pub fn edge_update(x: Vec2, xj: Vec2, uj: f64, wind: Vec2, speed: f64) -> f64 {
    let e = xj - x;
    let len = e.norm();
    if len == 0.0 {
        return uj;
    }
    uj + len / ray_speed(e / len, wind, speed)
}

/// Quadratic upwind update at `x` from accepted neighbours `xj`, `xk`.
///
/// If exactly one neighbour value is infinite, falls back to the one-sided
/// [`edge_update`] from the finite one.
pub fn simplex_update(x: Vec2, xj: Vec2, xk: Vec2, uj: f64, uk: f64, wind: Vec2, speed: f64) -> SimplexUpdate {
    match (uj.is_finite(), uk.is_finite()) {
        (true, true) => {}
        (false, false) => return SimplexUpdate::invalid(f64::NAN, f64::NAN, f64::NAN),
        (true, false) | (false, true) => {
            let (xf, uf) = if uj.is_finite() { (xj, uj) } else { (xk, uk) };
            let v = edge_update(x, xf, uf, wind, speed);
            return SimplexUpdate {
                a: 0.0,
                b: 0.0,
                c: 0.0,
                candidate: v,
                characteristic_inside: true,
                valid: v.is_finite(),
            };
        }
    }

    let ej = x - xj;
    let ek = x - xk;
    let p = Matrix2::new(ej.x, ej.y, ek.x, ek.y);
    // near-collinear simplices have no usable interior
    if p.determinant().abs() <= DEGENERATE_SIN * ej.norm() * ek.norm() {
        return SimplexUpdate::invalid(f64::NAN, f64::NAN, f64::NAN);
    }
    let Some(p_inv) = p.try_inverse() else {
        return SimplexUpdate::invalid(f64::NAN, f64::NAN, f64::NAN);
    };
    let pa: Vec2 = p_inv * Vec2::new(1.0, 1.0);
    let pb: Vec2 = p_inv * Vec2::new(-uj, -uk);
    let v2 = speed * speed;
    let aw = pa.dot(&wind);
    let bw1 = pb.dot(&wind) + 1.0;
    let a = v2 * pa.dot(&pa) - aw * aw;
    let b = 2.0 * v2 * pa.dot(&pb) - 2.0 * aw * bw1;
    let c = v2 * pb.dot(&pb) - bw1 * bw1;

    let scale = a.abs().max(b.abs()).max(c.abs());
    let candidate = if a.abs() <= 1e-14 * scale {
        if b == 0.0 {
            return SimplexUpdate::invalid(a, b, c);
        }
        -c / b
    } else {
        let mut disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            if disc > -1e-12 * b * b {
                disc = 0.0;
            } else {
                return SimplexUpdate::invalid(a, b, c);
            }
        }
        let s = disc.sqrt();
        let r1 = (-b + s) / (2.0 * a);
        let r2 = (-b - s) / (2.0 * a);
        r1.max(r2)
    };

    let grad = pa * candidate + pb;
    let gnorm = grad.norm();
    // The squared equation admits roots with 1 + <grad, W> < 0 (negative front speed).
    let consistent = gnorm > 0.0 && 1.0 + grad.dot(&wind) > 0.0;
    let flow = -speed * grad / gnorm.max(f64::MIN_POSITIVE) + wind;
    let characteristic_inside = consistent && in_cone(xj - x, xk - x, flow);
    let valid = characteristic_inside && candidate.is_finite() && candidate > uj.max(uk);
    SimplexUpdate { a, b, c, candidate, characteristic_inside, valid }
}

/// Whether `d` lies in the cone spanned by `e1` and `e2` (non-negative
/// barycentric weights, unit-normalized direction).
fn in_cone(e1: Vec2, e2: Vec2, d: Vec2) -> bool {
    let n = d.norm();
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    let m = Matrix2::from_columns(&[e1 / e1.norm(), e2 / e2.norm()]);
    match m.try_inverse() {
        Some(inv) => {
            let l: Vec2 = inv * (d / n);
            l.x >= -CONE_TOL && l.y >= -CONE_TOL
        }
        None => false,
    }
}
