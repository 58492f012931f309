//! Axis-aligned box arithmetic.
//!
//! Boxes are stored as corner pairs `(x1, y1)`-`(x2, y2)` in pixel units with
//! strictly positive width and height. A [`BBox`] can only be built through a
//! validating constructor, so every operation in this module is infallible.
//!
//! The GIoU loss gradient is analytic. `min`/`max` in the intersection and
//! enclosing-box terms are piecewise linear; on an exact tie the subgradient
//! selects the first argument (the `a` box).

use std::fmt;

use crate::error::GeometryError;

/// Axis-aligned rectangle, top-left `(x1, y1)`, bottom-right `(x2, y2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, GeometryError> {
        if !(x1.is_finite() && y1.is_finite() && x2.is_finite() && y2.is_finite()) {
            return Err(GeometryError::NonFinite([x1, y1, x2, y2]));
        }
        if !(x1 < x2 && y1 < y2) {
            return Err(GeometryError::Degenerate([x1, y1, x2, y2]));
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    /// Builds a box from MOT-style `(left, top, width, height)`.
    pub fn from_xywh(x: f64, y: f64, w: f64, h: f64) -> Result<Self, GeometryError> {
        Self::new(x, y, x + w, y + h)
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn y1(&self) -> f64 {
        self.y1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn y2(&self) -> f64 {
        self.y2
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn from_coords(c: [f64; 4]) -> Result<Self, GeometryError> {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Result<Self, GeometryError> {
        Self::new(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)
    }

    /// Multiplies every coordinate by `s`.
    pub fn scale(&self, s: f64) -> Result<Self, GeometryError> {
        Self::new(self.x1 * s, self.y1 * s, self.x2 * s, self.y2 * s)
    }

    /// Moves each coordinate by `-step * grad`.
    pub fn descend(&self, grad: &BoxGrad, step: f64) -> Result<Self, GeometryError> {
        Self::new(
            self.x1 - step * grad.d_x1,
            self.y1 - step * grad.d_y1,
            self.x2 - step * grad.d_x2,
            self.y2 - step * grad.d_y2,
        )
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.x1 <= other.x1 && self.y1 <= other.y1 && self.x2 >= other.x2 && self.y2 >= other.y2
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x1, self.y1, self.x2, self.y2)
    }
}

/// Partial derivatives of a scalar loss with respect to the four box coordinates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BoxGrad {
    pub d_x1: f64,
    pub d_y1: f64,
    pub d_x2: f64,
    pub d_y2: f64,
}

impl BoxGrad {
    pub const ZERO: BoxGrad = BoxGrad { d_x1: 0.0, d_y1: 0.0, d_x2: 0.0, d_y2: 0.0 };

    pub fn from_array(g: [f64; 4]) -> Self {
        Self { d_x1: g[0], d_y1: g[1], d_x2: g[2], d_y2: g[3] }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.d_x1, self.d_y1, self.d_x2, self.d_y2]
    }

    pub fn scaled(self, s: f64) -> Self {
        Self { d_x1: self.d_x1 * s, d_y1: self.d_y1 * s, d_x2: self.d_x2 * s, d_y2: self.d_y2 * s }
    }

    pub fn is_zero(&self) -> bool {
        self.to_array().iter().all(|v| *v == 0.0)
    }
}

impl std::ops::Add for BoxGrad {
    type Output = BoxGrad;

    fn add(self, rhs: BoxGrad) -> BoxGrad {
        BoxGrad {
            d_x1: self.d_x1 + rhs.d_x1,
            d_y1: self.d_y1 + rhs.d_y1,
            d_x2: self.d_x2 + rhs.d_x2,
            d_y2: self.d_y2 + rhs.d_y2,
        }
    }
}

impl std::ops::AddAssign for BoxGrad {
    fn add_assign(&mut self, rhs: BoxGrad) {
        *self = *self + rhs;
    }
}

impl std::ops::Neg for BoxGrad {
    type Output = BoxGrad;

    fn neg(self) -> BoxGrad {
        self.scaled(-1.0)
    }
}

fn overlap_1d(a1: f64, a2: f64, b1: f64, b2: f64) -> f64 {
    (a2.min(b2) - a1.max(b1)).max(0.0)
}

pub fn intersection_area(a: &BBox, b: &BBox) -> f64 {
    overlap_1d(a.x1, a.x2, b.x1, b.x2) * overlap_1d(a.y1, a.y2, b.y1, b.y2)
}

pub fn union_area(a: &BBox, b: &BBox) -> f64 {
    a.area() + b.area() - intersection_area(a, b)
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = intersection_area(a, b);
    inter / (a.area() + b.area() - inter)
}

/// Smallest axis-aligned box containing both inputs.
pub fn enclosing_box(a: &BBox, b: &BBox) -> BBox {
    BBox {
        x1: a.x1.min(b.x1),
        y1: a.y1.min(b.y1),
        x2: a.x2.max(b.x2),
        y2: a.y2.max(b.y2),
    }
}

/// Generalized IoU: IoU minus the fraction of the enclosing box not covered
/// by the union. Range `(-1, 1]`.
pub fn giou(a: &BBox, b: &BBox) -> f64 {
    let inter = intersection_area(a, b);
    let union = a.area() + b.area() - inter;
    let hull = enclosing_box(a, b).area();
    inter / union - (hull - union) / hull
}

/// `1 - giou(a, b)`, in `[0, 2)`.
pub fn giou_loss(a: &BBox, b: &BBox) -> f64 {
    1.0 - giou(a, b)
}

/// Analytic gradient of [`giou_loss`] with respect to both boxes.
///
/// The loss is written as `2 - I/U - U/C` (intersection, union, hull areas),
/// so `dL = -(dI·U - I·dU)/U² - (dU·C - U·dC)/C²` with `dU = dA_a + dA_b - dI`.
pub fn giou_loss_grad(a: &BBox, b: &BBox) -> (BoxGrad, BoxGrad) {
    // Intersection extents. `>=`/`<=` pick `a` on ties.
    let ix1_from_a = a.x1 >= b.x1;
    let iy1_from_a = a.y1 >= b.y1;
    let ix2_from_a = a.x2 <= b.x2;
    let iy2_from_a = a.y2 <= b.y2;
    let iw_raw = a.x2.min(b.x2) - a.x1.max(b.x1);
    let ih_raw = a.y2.min(b.y2) - a.y1.max(b.y1);
    let overlapping = iw_raw > 0.0 && ih_raw > 0.0;
    let (iw, ih) = if overlapping { (iw_raw, ih_raw) } else { (0.0, 0.0) };
    let inter = iw * ih;

    // Enclosing extents.
    let cx1_from_a = a.x1 <= b.x1;
    let cy1_from_a = a.y1 <= b.y1;
    let cx2_from_a = a.x2 >= b.x2;
    let cy2_from_a = a.y2 >= b.y2;
    let cw = a.x2.max(b.x2) - a.x1.min(b.x1);
    let ch = a.y2.max(b.y2) - a.y1.min(b.y1);
    let hull = cw * ch;

    let union = a.area() + b.area() - inter;

    // Derivatives of I and C w.r.t. [x1, y1, x2, y2] of a box, given which
    // box supplies each extent.
    let d_inter = |x1: bool, y1: bool, x2: bool, y2: bool| -> [f64; 4] {
        if !overlapping {
            return [0.0; 4];
        }
        [
            if x1 { -ih } else { 0.0 },
            if y1 { -iw } else { 0.0 },
            if x2 { ih } else { 0.0 },
            if y2 { iw } else { 0.0 },
        ]
    };
    let d_hull = |x1: bool, y1: bool, x2: bool, y2: bool| -> [f64; 4] {
        [
            if x1 { -ch } else { 0.0 },
            if y1 { -cw } else { 0.0 },
            if x2 { ch } else { 0.0 },
            if y2 { cw } else { 0.0 },
        ]
    };
    let d_area = |bx: &BBox| -> [f64; 4] {
        let (w, h) = (bx.width(), bx.height());
        [-h, -w, h, w]
    };

    let di_a = d_inter(ix1_from_a, iy1_from_a, ix2_from_a, iy2_from_a);
    let di_b = d_inter(!ix1_from_a, !iy1_from_a, !ix2_from_a, !iy2_from_a);
    let dc_a = d_hull(cx1_from_a, cy1_from_a, cx2_from_a, cy2_from_a);
    let dc_b = d_hull(!cx1_from_a, !cy1_from_a, !cx2_from_a, !cy2_from_a);

    let grad_for = |di: [f64; 4], dc: [f64; 4], da: [f64; 4]| -> BoxGrad {
        let mut g = [0.0; 4];
        for k in 0..4 {
            let du = da[k] - di[k];
            g[k] = -(di[k] * union - inter * du) / (union * union)
                - (du * hull - union * dc[k]) / (hull * hull);
        }
        BoxGrad::from_array(g)
    };

    (grad_for(di_a, dc_a, d_area(a)), grad_for(di_b, dc_b, d_area(b)))
}
