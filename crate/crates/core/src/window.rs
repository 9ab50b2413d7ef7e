//! Regions of a group: sampling windows, strips, cones and the
//! parallelogram used in the ax+b analysis.
//!
//! Every ax+b region is a convex set `{(a, b) : a in [lo, hi], L(a) <= b <= U(a)}`
//! with piecewise linear `L`, `U`. Internally each one has two descriptions:
//! a list of half-planes (used when it is the outer set of a containment test
//! or when slicing for quadrature) and a vertex/ray list (used when it is the
//! inner set). Containment of convex sets then reduces to checking the inner
//! vertices and recession rays against the outer half-planes.

use crate::error::{Error, Result};
use crate::group::{Coords, GroupElement, GroupModel};

/// A region of a group model.
#[derive(Clone, Debug, PartialEq)]
pub enum Window {
    /// The whole group. Finite mass only on the torus.
    Whole,
    /// Axis-aligned box, Euclidean or torus (inside `[0,1]^d`).
    Box { lo: Coords, hi: Coords },
    /// ax+b region `a in [a_lo, a_hi]`, `b - shear * a in [b_lo, b_hi]`.
    /// `shear = 0` is a coordinate box; left translation preserves the shear,
    /// right translation changes it.
    AffineBox {
        a_lo: f64,
        a_hi: f64,
        b_lo: f64,
        b_hi: f64,
        shear: f64,
    },
    /// ax+b cone `a in [a_lo, a_hi]`, `|b - apex_b| <= slope * a`.
    Cone {
        apex_b: f64,
        slope: f64,
        a_lo: f64,
        a_hi: f64,
    },
    /// ax+b strip `[a, a_max] x [b - delta a, b + delta a]` anchored at `(a, b)`.
    /// `a_max` may be infinite.
    Strip {
        anchor: GroupElement,
        delta: f64,
        a_max: f64,
    },
    /// The parallelogram with corners `(0,0), (1/2, d/2), (1,0), (1/2, -d/2)`
    /// cut to `a >= a_min`.
    ParallelogramD { delta: f64, a_min: f64 },
    /// Intersection of ax+b regions; its mass is computed by quadrature.
    Intersection(Vec<Window>),
}

/// Haar mass lost by truncating an untruncated strip anchored at first
/// coordinate `anchor_a` at `a_max`: `2 delta anchor_a / a_max`.
pub fn strip_tail_mass(anchor_a: f64, delta: f64, a_max: f64) -> f64 {
    2.0 * delta * anchor_a / a_max
}

impl Window {
    /// One-dimensional interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Self {
        Window::Box {
            lo: Coords::from_slice(&[lo]),
            hi: Coords::from_slice(&[hi]),
        }
    }

    pub fn boxed(lo: &[f64], hi: &[f64]) -> Self {
        Window::Box {
            lo: Coords::from_slice(lo),
            hi: Coords::from_slice(hi),
        }
    }

    /// Cube `[-r, r]^d` around the origin.
    pub fn cube(dim: usize, r: f64) -> Self {
        Window::Box {
            lo: smallvec::smallvec![-r; dim],
            hi: smallvec::smallvec![r; dim],
        }
    }

    /// ax+b coordinate box.
    pub fn ab_box(a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> Self {
        Window::AffineBox {
            a_lo,
            a_hi,
            b_lo,
            b_hi,
            shear: 0.0,
        }
    }

    pub fn cone(slope: f64, a_lo: f64, a_hi: f64) -> Self {
        Window::Cone {
            apex_b: 0.0,
            slope,
            a_lo,
            a_hi,
        }
    }

    pub fn strip(anchor: GroupElement, delta: f64, a_max: f64) -> Self {
        Window::Strip {
            anchor,
            delta,
            a_max,
        }
    }

    pub fn describe(&self) -> String {
        format!("{self:?}")
    }

    pub fn validate(&self, model: GroupModel) -> Result<()> {
        let bad = || Err(Error::InvalidWindow(self.describe()));
        match (self, model) {
            (Window::Whole, _) => Ok(()),
            (Window::Box { lo, hi }, GroupModel::Euclidean { dim } | GroupModel::Torus { dim }) => {
                if lo.len() != dim || hi.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: lo.len().min(hi.len()),
                    });
                }
                let ordered = lo.iter().zip(hi).all(|(l, h)| l <= h && l.is_finite() && h.is_finite());
                let on_torus = matches!(model, GroupModel::Torus { .. });
                if !ordered || (on_torus && lo.iter().chain(hi).any(|&c| !(0.0..=1.0).contains(&c))) {
                    return bad();
                }
                Ok(())
            }
            (
                Window::AffineBox {
                    a_lo,
                    a_hi,
                    b_lo,
                    b_hi,
                    shear,
                },
                GroupModel::AxB,
            ) => {
                if *a_lo > 0.0 && a_lo <= a_hi && b_lo <= b_hi && b_lo.is_finite() && b_hi.is_finite() && shear.is_finite() {
                    Ok(())
                } else {
                    bad()
                }
            }
            (
                Window::Cone {
                    apex_b,
                    slope,
                    a_lo,
                    a_hi,
                },
                GroupModel::AxB,
            ) => {
                if *a_lo >= 0.0 && a_lo <= a_hi && *slope >= 0.0 && apex_b.is_finite() {
                    Ok(())
                } else {
                    bad()
                }
            }
            (
                Window::Strip {
                    anchor,
                    delta,
                    a_max,
                },
                GroupModel::AxB,
            ) => {
                model.validate(anchor)?;
                if *delta > 0.0 && *a_max >= anchor.a() {
                    Ok(())
                } else {
                    bad()
                }
            }
            (Window::ParallelogramD { delta, a_min }, GroupModel::AxB) => {
                if *delta > 0.0 && *a_min > 0.0 {
                    Ok(())
                } else {
                    bad()
                }
            }
            (Window::Intersection(parts), GroupModel::AxB) => {
                parts.iter().try_for_each(|w| w.validate(model))
            }
            _ => bad(),
        }
    }
}

/// Closed-form Haar mass of a window.
pub fn haar_mass(model: GroupModel, w: &Window) -> Result<f64> {
    w.validate(model)?;
    match w {
        Window::Whole => match model {
            GroupModel::Torus { .. } => Ok(1.0),
            _ => Err(Error::InfiniteMass),
        },
        Window::Box { lo, hi } => Ok(lo.iter().zip(hi).map(|(l, h)| h - l).product()),
        Window::AffineBox {
            a_lo,
            a_hi,
            b_lo,
            b_hi,
            ..
        } => Ok((1.0 / a_lo - 1.0 / a_hi) * (b_hi - b_lo)),
        Window::Cone {
            slope, a_lo, a_hi, ..
        } => {
            if *slope == 0.0 || a_lo == a_hi {
                return Ok(0.0);
            }
            if *a_lo == 0.0 || a_hi.is_infinite() {
                return Err(Error::InfiniteMass);
            }
            Ok(2.0 * slope * (a_hi / a_lo).ln())
        }
        Window::Strip {
            anchor,
            delta,
            a_max,
        } => Ok(2.0 * delta - strip_tail_mass(anchor.a(), *delta, *a_max)),
        Window::ParallelogramD { delta, a_min } => Ok(parallelogram_d_mass(*delta, *a_min)),
        Window::Intersection(_) => haar_mass_quadrature(model, w),
    }
}

/// `Haar(D ∩ {a >= a_min})` for the parallelogram `D` of half-width `delta`.
pub(crate) fn parallelogram_d_mass(delta: f64, a_min: f64) -> f64 {
    let two_d = 2.0 * delta;
    if a_min >= 1.0 {
        0.0
    } else if a_min >= 0.5 {
        // ∫_{a_min}^1 2δ(1-a)/a² da
        two_d * (1.0 / a_min + a_min.ln() - 1.0)
    } else {
        // left half ∫ 2δ/a da plus the right half 2δ(1 - ln 2)
        two_d * ((0.5 / a_min).ln() + 1.0 - std::f64::consts::LN_2)
    }
}

/// Membership test.
#[allow(clippy::only_used_in_recursion)]
pub fn contains(model: GroupModel, w: &Window, x: &GroupElement) -> bool {
    match w {
        Window::Whole => true,
        Window::Box { lo, hi } => x
            .coords()
            .iter()
            .zip(lo.iter().zip(hi))
            .all(|(c, (l, h))| l <= c && c <= h),
        Window::Intersection(parts) => parts.iter().all(|p| contains(model, p, x)),
        _ => match constraints(w) {
            Some((a_lo, a_hi, planes)) => {
                let (a, b) = (x.a(), x.b());
                a >= a_lo && a <= a_hi && planes.iter().all(|p| p.ca * a + p.cb * b <= p.rhs)
            }
            None => false,
        },
    }
}

/// Left translate `z W = {z x : x in W}`.
pub fn translate_window(model: GroupModel, z: &GroupElement, w: &Window) -> Result<Window> {
    model.validate(z)?;
    w.validate(model)?;
    translate_unchecked(model, z, w)
}

pub(crate) fn translate_unchecked(model: GroupModel, z: &GroupElement, w: &Window) -> Result<Window> {
    if *z == model.identity() {
        return Ok(w.clone());
    }
    match (w, model) {
        (Window::Whole, _) => Ok(Window::Whole),
        (Window::Box { lo, hi }, GroupModel::Euclidean { .. }) => Ok(Window::Box {
            lo: lo.iter().zip(z.coords()).map(|(l, s)| l + s).collect(),
            hi: hi.iter().zip(z.coords()).map(|(h, s)| h + s).collect(),
        }),
        (Window::Box { lo, hi }, GroupModel::Torus { .. }) => {
            let lo2: Coords = lo.iter().zip(z.coords()).map(|(l, s)| l + s).collect();
            let hi2: Coords = hi.iter().zip(z.coords()).map(|(h, s)| h + s).collect();
            // Only translates that stay inside the fundamental domain are boxes.
            let shift = |v: f64| if v >= 1.0 { v - 1.0 } else { v };
            let all_shifted = lo2.iter().all(|&l| l >= 1.0);
            if hi2.iter().all(|&h| h <= 1.0) {
                Ok(Window::Box { lo: lo2, hi: hi2 })
            } else if all_shifted {
                Ok(Window::Box {
                    lo: lo2.iter().map(|&v| shift(v)).collect(),
                    hi: hi2.iter().map(|&v| shift(v)).collect(),
                })
            } else {
                Err(Error::NotRepresentable("torus box wraps around".into()))
            }
        }
        (
            Window::AffineBox {
                a_lo,
                a_hi,
                b_lo,
                b_hi,
                shear,
            },
            GroupModel::AxB,
        ) => {
            let (c, d) = (z.a(), z.b());
            Ok(Window::AffineBox {
                a_lo: c * a_lo,
                a_hi: c * a_hi,
                b_lo: c * b_lo + d,
                b_hi: c * b_hi + d,
                shear: *shear,
            })
        }
        (
            Window::Cone {
                apex_b,
                slope,
                a_lo,
                a_hi,
            },
            GroupModel::AxB,
        ) => {
            let (c, d) = (z.a(), z.b());
            Ok(Window::Cone {
                apex_b: c * apex_b + d,
                slope: *slope,
                a_lo: c * a_lo,
                a_hi: c * a_hi,
            })
        }
        (
            Window::Strip {
                anchor,
                delta,
                a_max,
            },
            GroupModel::AxB,
        ) => Ok(Window::Strip {
            anchor: model.mul(z, anchor),
            delta: *delta,
            a_max: z.a() * a_max,
        }),
        (Window::Intersection(parts), GroupModel::AxB) => Ok(Window::Intersection(
            parts
                .iter()
                .map(|p| translate_unchecked(model, z, p))
                .collect::<Result<_>>()?,
        )),
        (Window::ParallelogramD { .. }, _) => Err(Error::NotRepresentable(
            "translates of the parallelogram D are not tracked".into(),
        )),
        _ => Err(Error::InvalidWindow(w.describe())),
    }
}

/// Right translate `W x = {w x : w in W}`. Supported for boxes.
pub fn right_translate_window(model: GroupModel, w: &Window, x: &GroupElement) -> Result<Window> {
    model.validate(x)?;
    w.validate(model)?;
    match (w, model) {
        (Window::AffineBox {
            a_lo,
            a_hi,
            b_lo,
            b_hi,
            shear,
        }, GroupModel::AxB) => {
            let (c, d) = (x.a(), x.b());
            // (a, b)(c, d) = (ac, ad + b): b - s a = b' - a'(d + s)/c
            Ok(Window::AffineBox {
                a_lo: a_lo * c,
                a_hi: a_hi * c,
                b_lo: *b_lo,
                b_hi: *b_hi,
                shear: (d + shear) / c,
            })
        }
        (_, GroupModel::Euclidean { .. } | GroupModel::Torus { .. }) => {
            translate_unchecked(model, x, w)
        }
        _ => Err(Error::NotRepresentable(format!(
            "right translate of {}",
            w.describe()
        ))),
    }
}

/// `inner ⊆ outer`, up to a relative slack of `1e-12` that absorbs rounding
/// from recentering.
pub fn contains_window(model: GroupModel, outer: &Window, inner: &Window) -> bool {
    if matches!(outer, Window::Whole) {
        return true;
    }
    match model {
        GroupModel::Euclidean { .. } | GroupModel::Torus { .. } => match (outer, inner) {
            (Window::Box { lo, hi }, Window::Box { lo: l2, hi: h2 }) => lo
                .iter()
                .zip(hi)
                .zip(l2.iter().zip(h2))
                .all(|((l, h), (l2, h2))| le_slack(*l, *l2) && le_slack(*h2, *h)),
            _ => false,
        },
        GroupModel::AxB => {
            let Some(shape) = polygon(inner) else {
                return false;
            };
            let outer_parts: Vec<&Window> = match outer {
                Window::Intersection(parts) => parts.iter().collect(),
                w => vec![w],
            };
            outer_parts.into_iter().all(|w| {
                let Some((a_lo, a_hi, planes)) = constraints(w) else {
                    return false;
                };
                let verts_ok = shape.vertices.iter().all(|&(a, b)| {
                    le_slack(a_lo, a)
                        && le_slack(a, a_hi)
                        && planes.iter().all(|p| le_slack(p.ca * a + p.cb * b, p.rhs))
                });
                let rays_ok = shape.rays.iter().all(|&(da, db)| {
                    (a_hi.is_infinite() || da <= 0.0)
                        && planes.iter().all(|p| p.ca * da + p.cb * db <= 1e-12 * (p.ca.abs() + p.cb.abs()))
                });
                verts_ok && rays_ok
            })
        }
    }
}

/// `lo <= x` with a relative slack for rounding.
fn le_slack(lo: f64, x: f64) -> bool {
    lo <= x || lo - x <= 1e-12 * (1.0 + lo.abs().max(x.abs()))
}

/// `ca a + cb b <= rhs`.
#[derive(Clone, Copy, Debug)]
struct HalfPlane {
    ca: f64,
    cb: f64,
    rhs: f64,
}

impl HalfPlane {
    fn new(ca: f64, cb: f64, rhs: f64) -> Self {
        HalfPlane { ca, cb, rhs }
    }
}

/// Half-plane description of an ax+b region: `(a_lo, a_hi, b-constraints)`.
fn constraints(w: &Window) -> Option<(f64, f64, Vec<HalfPlane>)> {
    match w {
        Window::Whole => Some((0.0, f64::INFINITY, Vec::new())),
        Window::AffineBox {
            a_lo,
            a_hi,
            b_lo,
            b_hi,
            shear,
        } => Some((
            *a_lo,
            *a_hi,
            vec![
                HalfPlane::new(-shear, 1.0, *b_hi),
                HalfPlane::new(*shear, -1.0, -b_lo),
            ],
        )),
        Window::Cone {
            apex_b,
            slope,
            a_lo,
            a_hi,
        } => Some((
            *a_lo,
            *a_hi,
            vec![
                HalfPlane::new(-slope, 1.0, *apex_b),
                HalfPlane::new(-slope, -1.0, -apex_b),
            ],
        )),
        Window::Strip {
            anchor,
            delta,
            a_max,
        } => {
            let (a, b) = (anchor.a(), anchor.b());
            Some((
                a,
                *a_max,
                vec![
                    HalfPlane::new(0.0, 1.0, b + delta * a),
                    HalfPlane::new(0.0, -1.0, -(b - delta * a)),
                ],
            ))
        }
        Window::ParallelogramD { delta, a_min } => Some((
            *a_min,
            1.0,
            vec![
                HalfPlane::new(-delta, 1.0, 0.0),
                HalfPlane::new(-delta, -1.0, 0.0),
                HalfPlane::new(*delta, 1.0, *delta),
                HalfPlane::new(*delta, -1.0, *delta),
            ],
        )),
        Window::Intersection(parts) => {
            let mut lo: f64 = 0.0;
            let mut hi = f64::INFINITY;
            let mut planes = Vec::new();
            for p in parts {
                let (l, h, mut ps) = constraints(p)?;
                lo = lo.max(l);
                hi = hi.min(h);
                planes.append(&mut ps);
            }
            Some((lo, hi, planes))
        }
        Window::Box { .. } => None,
    }
}

struct Polygon {
    vertices: Vec<(f64, f64)>,
    rays: Vec<(f64, f64)>,
}

/// Vertex/ray description of an ax+b region; `None` when not available.
fn polygon(w: &Window) -> Option<Polygon> {
    let mut vertices = Vec::new();
    let mut rays = Vec::new();
    match w {
        Window::AffineBox {
            a_lo,
            a_hi,
            b_lo,
            b_hi,
            shear,
        } => {
            vertices.push((*a_lo, b_lo + shear * a_lo));
            vertices.push((*a_lo, b_hi + shear * a_lo));
            if a_hi.is_finite() {
                vertices.push((*a_hi, b_lo + shear * a_hi));
                vertices.push((*a_hi, b_hi + shear * a_hi));
            } else {
                rays.push((1.0, *shear));
            }
        }
        Window::Cone {
            apex_b,
            slope,
            a_lo,
            a_hi,
        } => {
            vertices.push((*a_lo, apex_b - slope * a_lo));
            vertices.push((*a_lo, apex_b + slope * a_lo));
            if a_hi.is_finite() {
                vertices.push((*a_hi, apex_b - slope * a_hi));
                vertices.push((*a_hi, apex_b + slope * a_hi));
            } else {
                rays.push((1.0, -slope));
                rays.push((1.0, *slope));
            }
        }
        Window::Strip {
            anchor,
            delta,
            a_max,
        } => {
            let (a, b) = (anchor.a(), anchor.b());
            vertices.push((a, b - delta * a));
            vertices.push((a, b + delta * a));
            if a_max.is_finite() {
                vertices.push((*a_max, b - delta * a));
                vertices.push((*a_max, b + delta * a));
            } else {
                rays.push((1.0, 0.0));
            }
        }
        Window::ParallelogramD { delta, a_min } => {
            if *a_min >= 1.0 {
                return Some(Polygon {
                    vertices,
                    rays,
                });
            }
            if *a_min < 0.5 {
                vertices.push((*a_min, -delta * a_min));
                vertices.push((*a_min, delta * a_min));
                vertices.push((0.5, -delta * 0.5));
                vertices.push((0.5, delta * 0.5));
            } else {
                vertices.push((*a_min, -delta * (1.0 - a_min)));
                vertices.push((*a_min, delta * (1.0 - a_min)));
            }
            vertices.push((1.0, 0.0));
        }
        _ => return None,
    }
    Some(Polygon { vertices, rays })
}

/// b-extent of an ax+b region at scale `a`.
fn slice(a_lo: f64, a_hi: f64, planes: &[HalfPlane], a: f64) -> f64 {
    if a < a_lo || a > a_hi {
        return 0.0;
    }
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for p in planes {
        if p.cb > 0.0 {
            hi = hi.min((p.rhs - p.ca * a) / p.cb);
        } else if p.cb < 0.0 {
            lo = lo.max((p.rhs - p.ca * a) / p.cb);
        } else if p.ca * a > p.rhs {
            return 0.0;
        }
    }
    (hi - lo).max(0.0)
}

/// Haar mass by adaptive quadrature over slices.
///
/// ax+b regions are integrated in `t = 1/a`, which turns
/// `∫ width(a) / a² da` into `∫ width(1/t) dt` over a bounded interval.
/// Euclidean and torus boxes fall back to their volume.
pub fn haar_mass_quadrature(model: GroupModel, w: &Window) -> Result<f64> {
    w.validate(model)?;
    match model {
        GroupModel::Euclidean { .. } | GroupModel::Torus { .. } => haar_mass(model, w),
        GroupModel::AxB => {
            let (a_lo, a_hi, planes) =
                constraints(w).ok_or_else(|| Error::InvalidWindow(w.describe()))?;
            if a_lo <= 0.0 {
                return Err(Error::InfiniteMass);
            }
            if !planes.iter().any(|p| p.cb > 0.0) || !planes.iter().any(|p| p.cb < 0.0) {
                return Err(Error::InfiniteMass);
            }
            let t_lo = if a_hi.is_infinite() { 0.0 } else { 1.0 / a_hi };
            let t_hi = 1.0 / a_lo;
            let f = |t: f64| {
                if t <= 0.0 {
                    // width growth at a -> infinity decides finiteness
                    let far = slice(a_lo, a_hi, &planes, 1e300);
                    let farther = slice(a_lo, a_hi, &planes, 2e300);
                    if farther > far * 1.5 {
                        f64::INFINITY
                    } else {
                        far
                    }
                } else {
                    slice(a_lo, a_hi, &planes, 1.0 / t)
                }
            };
            if f(t_lo).is_infinite() && t_lo == 0.0 {
                return Err(Error::InfiniteMass);
            }
            Ok(adaptive_simpson(&f, t_lo, t_hi, 1e-12, 60))
        }
    }
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if hi <= lo {
        return 0.0;
    }
    // A fixed pre-split keeps kinks in the integrand from hiding between
    // the first few Simpson nodes.
    let pieces = 64;
    let h = (hi - lo) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let a = lo + h * i as f64;
            let b = if i + 1 == pieces { hi } else { a + h };
            let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
            recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol / pieces as f64, depth)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    const AXB: GroupModel = GroupModel::AxB;

    #[test]
    fn closed_form_masses() {
        assert!((haar_mass(AXB, &Window::ab_box(1.0, 2.0, 0.0, 1.0)).unwrap() - 0.5).abs() < 1e-15);
        let s = Window::strip(AXB.identity(), 0.1, f64::INFINITY);
        assert_eq!(haar_mass(AXB, &s).unwrap(), 0.2);
        let e1 = GroupModel::Euclidean { dim: 2 };
        assert_eq!(haar_mass(e1, &Window::boxed(&[0.0, 0.0], &[1.0, 1.0])).unwrap(), 1.0);
        assert_eq!(haar_mass(GroupModel::Torus { dim: 3 }, &Window::Whole).unwrap(), 1.0);
    }

    #[test]
    fn infinite_regions_are_signalled() {
        assert_eq!(
            haar_mass(GroupModel::Euclidean { dim: 1 }, &Window::Whole),
            Err(Error::InfiniteMass)
        );
        assert_eq!(
            haar_mass(AXB, &Window::cone(0.1, 0.0, 1.0)),
            Err(Error::InfiniteMass)
        );
    }

    #[test]
    fn strip_truncation_tail() {
        let anchor = GroupElement::ab(2.0, 0.3);
        let full = haar_mass(AXB, &Window::strip(anchor.clone(), 0.1, f64::INFINITY)).unwrap();
        let cut = haar_mass(AXB, &Window::strip(anchor, 0.1, 50.0)).unwrap();
        assert!((full - cut - strip_tail_mass(2.0, 0.1, 50.0)).abs() < 1e-9);
    }

    #[test]
    fn translate_strip_from_identity() {
        let z = GroupElement::ab(3.0, -1.5);
        let s = Window::strip(AXB.identity(), 0.1, f64::INFINITY);
        let t = translate_window(AXB, &z, &s).unwrap();
        assert_eq!(t, Window::strip(z, 0.1, f64::INFINITY));
        let e1 = GroupModel::Euclidean { dim: 1 };
        assert_eq!(
            translate_window(e1, &GroupElement::scalar(3.0), &Window::interval(0.0, 1.0)).unwrap(),
            Window::interval(3.0, 4.0)
        );
        let b = Window::ab_box(1.0, 2.0, 0.0, 1.0);
        assert_eq!(translate_window(AXB, &AXB.identity(), &b).unwrap(), b);
    }

    #[test]
    fn parallelogram_closed_form_matches_quadrature() {
        for &a_min in &[0.5, 0.25, 1e-3, 0.75] {
            let w = Window::ParallelogramD { delta: 0.1, a_min };
            let exact = haar_mass(AXB, &w).unwrap();
            let quad = haar_mass_quadrature(AXB, &w).unwrap();
            assert!((exact - quad).abs() < 1e-9, "{a_min}: {exact} vs {quad}");
        }
    }

    #[test]
    fn intersection_mass_by_quadrature() {
        // cone of slope 1 over a in [1, 2] cut by the box b in [0, 10]: half the cone
        let w = Window::Intersection(vec![
            Window::cone(1.0, 1.0, 2.0),
            Window::ab_box(1.0, 2.0, 0.0, 10.0),
        ]);
        let m = haar_mass(AXB, &w).unwrap();
        assert!((m - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn containment() {
        let cone = Window::cone(0.2, 0.01, 100.0);
        assert!(contains_window(AXB, &cone, &Window::strip(AXB.identity(), 0.1, 100.0)));
        assert!(!contains_window(AXB, &cone, &Window::strip(AXB.identity(), 0.1, 101.0)));
        assert!(!contains_window(
            AXB,
            &cone,
            &Window::strip(GroupElement::ab(1.0, 0.15), 0.1, 10.0)
        ));
        let unbounded = Window::AffineBox {
            a_lo: 0.5,
            a_hi: f64::INFINITY,
            b_lo: -1.0,
            b_hi: 1.0,
            shear: 0.0,
        };
        assert!(contains_window(AXB, &unbounded, &Window::strip(AXB.identity(), 0.1, f64::INFINITY)));
        assert!(!contains_window(AXB, &cone, &Window::strip(AXB.identity(), 0.1, f64::INFINITY)));
        let e1 = GroupModel::Euclidean { dim: 1 };
        assert!(contains_window(e1, &Window::interval(-1.0, 1.0), &Window::interval(0.0, 1.0)));
        assert!(!contains_window(e1, &Window::interval(-1.0, 1.0), &Window::interval(0.0, 1.5)));
    }

    #[test]
    fn membership() {
        let s = Window::strip(AXB.identity(), 0.1, f64::INFINITY);
        assert!(contains(AXB, &s, &GroupElement::ab(2.0, 0.05)));
        assert!(!contains(AXB, &s, &GroupElement::ab(4.0, 10.0)));
        assert!(!contains(AXB, &s, &GroupElement::ab(0.5, 0.0)));
    }

    #[test]
    fn right_translation_scales_by_modular_function() {
        let w = Window::ab_box(1.0, 3.0, -1.0, 2.0);
        let x = GroupElement::ab(2.5, 0.7);
        let wx = right_translate_window(AXB, &w, &x).unwrap();
        let lhs = haar_mass(AXB, &wx).unwrap();
        let rhs = AXB.modular(&x).unwrap() * haar_mass(AXB, &w).unwrap();
        assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        // the sheared image contains exactly the right-translated corner points
        let corner = AXB.mul(&GroupElement::ab(3.0, 2.0), &x);
        assert!(contains(AXB, &wx, &corner));
    }
}
