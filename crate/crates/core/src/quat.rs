//! Quaternion arithmetic, the sphere of imaginary units and slice exponentials.
//!
//! A quaternion is stored as `w + x i + y j + z k` with `w` the real part.
//! (Texts that index components as `x_0..x_3` or `x_1..x_4` map onto
//! `w, x, y, z` in that order.)

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Quaternion::new(w, 0.0, 0.0, 0.0)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Euclidean norm, computed with `hypot` so that large components do not overflow.
    pub fn norm(self) -> f64 {
        self.w.hypot(self.x).hypot(self.y.hypot(self.z))
    }

    pub fn imag(self) -> Quaternion {
        Quaternion::new(0.0, self.x, self.y, self.z)
    }

    pub fn imag_norm(self) -> f64 {
        self.x.hypot(self.y).hypot(self.z)
    }

    pub fn is_real(self) -> bool {
        self.x == 0.0 && self.y == 0.0 && self.z == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Real inner product of the underlying 4-vectors, `Re(conj(self) * other)`.
    pub fn dot(self, other: Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn inverse(self) -> Option<Quaternion> {
        let n = self.norm_sqr();
        if n == 0.0 {
            None
        } else {
            Some(self.conj() * (1.0 / n))
        }
    }

    pub fn powi(self, k: usize) -> Quaternion {
        let mut out = Quaternion::ONE;
        let mut base = self;
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                out = out * base;
            }
            base = base * base;
            e >>= 1;
        }
        out
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }

    /// Relative distance `|a - b| / max(1, |a|, |b|)`.
    pub fn rel_dist(self, other: Quaternion) -> f64 {
        let scale = 1f64.max(self.norm()).max(other.norm());
        (self - other).norm() / scale
    }

    /// Imaginary unit `I_q` of the slice containing `q`.
    ///
    /// On the real axis every slice contains `q`; the canonical unit `i` is
    /// returned and the flag is set.
    pub fn slice_unit(self) -> SliceUnit {
        let n = self.imag_norm();
        if n == 0.0 {
            SliceUnit {
                unit: ImaginaryUnit::I,
                real_axis: true,
            }
        } else {
            SliceUnit {
                unit: ImaginaryUnit {
                    x: self.x / n,
                    y: self.y / n,
                    z: self.z / n,
                },
                real_axis: false,
            }
        }
    }

    pub fn trig_form(self) -> Result<TrigForm> {
        let r = self.norm();
        if r == 0.0 {
            return Err(FockError::NoTrigForm);
        }
        let unit = self.slice_unit();
        // atan2 keeps the angle accurate near 0 and pi where acos loses digits.
        let angle = self.imag_norm().atan2(self.w);
        Ok(TrigForm {
            modulus: r,
            angle,
            unit: unit.unit,
            real_axis: unit.real_axis,
        })
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.w, self.x, self.y, self.z)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Quaternion) {
        *self = *self - o;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl MulAssign for Quaternion {
    fn mul_assign(&mut self, o: Quaternion) {
        *self = *self * o;
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        Quaternion::new(self.w / s, self.x / s, self.y / s, self.z / s)
    }
}

impl From<f64> for Quaternion {
    fn from(w: f64) -> Self {
        Quaternion::real(w)
    }
}

impl From<ImaginaryUnit> for Quaternion {
    fn from(u: ImaginaryUnit) -> Self {
        Quaternion::new(0.0, u.x, u.y, u.z)
    }
}

/// A unit purely imaginary quaternion, i.e. a point of the sphere `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryUnit {
    x: f64,
    y: f64,
    z: f64,
}

/// Result of [`Quaternion::slice_unit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceUnit {
    pub unit: ImaginaryUnit,
    /// Set when the input was real and `unit` is the default choice.
    pub real_axis: bool,
}

impl ImaginaryUnit {
    pub const I: ImaginaryUnit = ImaginaryUnit { x: 1.0, y: 0.0, z: 0.0 };
    pub const J: ImaginaryUnit = ImaginaryUnit { x: 0.0, y: 1.0, z: 0.0 };
    pub const K: ImaginaryUnit = ImaginaryUnit { x: 0.0, y: 0.0, z: 1.0 };

    /// Normalizes `(x, y, z)`; fails on the zero vector or non-finite input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = x.hypot(y).hypot(z);
        if !(n.is_finite() && n > 0.0) {
            return Err(FockError::Domain(format!(
                "({x}, {y}, {z}) does not define an imaginary unit"
            )));
        }
        Ok(ImaginaryUnit {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    pub fn components(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn as_quaternion(self) -> Quaternion {
        self.into()
    }

    pub fn dot(self, other: ImaginaryUnit) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, o: ImaginaryUnit) -> [f64; 3] {
        [
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        ]
    }

    /// A unit orthogonal to `self`, chosen deterministically: the cross
    /// product with the canonical axis least aligned with `self`.
    pub fn perpendicular(self) -> ImaginaryUnit {
        let a = [self.x.abs(), self.y.abs(), self.z.abs()];
        let axis = if a[0] <= a[1] && a[0] <= a[2] {
            ImaginaryUnit::I
        } else if a[1] <= a[2] {
            ImaginaryUnit::J
        } else {
            ImaginaryUnit::K
        };
        let c = self.cross(axis);
        ImaginaryUnit::new(c[0], c[1], c[2]).expect("cross product with a non-parallel axis")
    }

    /// The point `x + I y` of the slice `C_I`.
    pub fn point(self, re: f64, im: f64) -> Quaternion {
        Quaternion::new(re, im * self.x, im * self.y, im * self.z)
    }

    /// Coordinates `(a, b)` of `q` in the basis `{1, I}`; the component of
    /// `q` orthogonal to `C_I` is dropped.
    pub fn coords(self, q: Quaternion) -> (f64, f64) {
        (q.w, q.x * self.x + q.y * self.y + q.z * self.z)
    }
}

impl Neg for ImaginaryUnit {
    type Output = ImaginaryUnit;
    fn neg(self) -> ImaginaryUnit {
        ImaginaryUnit {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// `q = r (cos a + I sin a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigForm {
    pub modulus: f64,
    pub angle: f64,
    pub unit: ImaginaryUnit,
    pub real_axis: bool,
}

impl TrigForm {
    pub fn reconstruct(&self) -> Quaternion {
        slice_exp(self.unit, self.angle) * self.modulus
    }
}

/// `e^{I t} = cos t + I sin t`.
pub fn slice_exp(unit: ImaginaryUnit, t: f64) -> Quaternion {
    let (s, c) = t.sin_cos();
    unit.point(c, s)
}

/// Deterministic, roughly uniform points on `S`.
///
/// The first three points are `i, j, k` (as many as `count` allows); the rest
/// follow a golden-angle spiral.
pub fn sphere_grid(count: usize) -> Vec<ImaginaryUnit> {
    let mut out: Vec<ImaginaryUnit> = [ImaginaryUnit::I, ImaginaryUnit::J, ImaginaryUnit::K]
        .into_iter()
        .take(count)
        .collect();
    let rest = count.saturating_sub(3);
    let golden = PI * (3.0 - 5f64.sqrt());
    for m in 0..rest {
        let z = 1.0 - (2.0 * m as f64 + 1.0) / rest as f64;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        // Offset the spiral phase so no point lands on a coordinate axis.
        let phi = golden * m as f64 + 0.5;
        out.push(ImaginaryUnit::new(rho * phi.cos(), rho * phi.sin(), z).expect("unit vector"));
    }
    out
}
