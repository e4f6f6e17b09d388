//! Fixed-size vectors and matrices, plus central-difference gradients.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Largest dimension handled by [`SmallMatrix`].
pub const MAX_DIM: usize = 6;

/// Default relative step for [`grad_fd`].
pub const DEFAULT_FD_SCALE: f64 = 1e-5;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn e1() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn e2() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    pub fn e3() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    /// Canonical basis vector `e_{i+1}`.
    pub fn basis(i: usize) -> Self {
        match i {
            0 => Self::e1(),
            1 => Self::e2(),
            2 => Self::e3(),
            _ => panic!("basis index {i} out of range"),
        }
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        cross(self, o)
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Self {
        self * self.norm().recip()
    }

    /// Componentwise product.
    pub fn hadamard(self, o: Self) -> Self {
        Self::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    pub fn max_abs(self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl<T: Real> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Right-handed cross product.
pub fn cross<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    Vec3::new(
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )
}

/// 3×3 matrix stored by rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T> {
    pub rows: [[T; 3]; 3],
}

impl<T: Real> Mat3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            rows: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    pub fn from_rows(rows: [[T; 3]; 3]) -> Self {
        Self { rows }
    }

    /// Skew matrix with `hat(v) w = v × w`.
    pub fn hat(v: Vec3<T>) -> Self {
        let z = T::zero();
        Self {
            rows: [[z, -v.z, v.y], [v.z, z, -v.x], [-v.y, v.x, z]],
        }
    }

    pub fn row(&self, i: usize) -> Vec3<T> {
        Vec3::from_array(self.rows[i])
    }

    pub fn transpose(&self) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.rows[i][j] = self.rows[j][i];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let mut out = Self::identity();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = T::zero();
                for k in 0..3 {
                    acc = acc + self.rows[i][k] * o.rows[k][j];
                }
                out.rows[i][j] = acc;
            }
        }
        out
    }

    pub fn add_scaled(&self, o: &Self, s: T) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.rows[i][j] = self.rows[i][j] + o.rows[i][j] * s;
            }
        }
        out
    }

    pub fn det(&self) -> T {
        self.row(0).dot(self.row(1).cross(self.row(2)))
    }

    /// Projects a near-rotation back onto SO(3) with a few Newton–Schulz
    /// iterations `R ← R (3I − RᵀR)/2`.
    pub fn reorthonormalize(&self) -> Self {
        let half = lit::<T>(0.5);
        let three = lit::<T>(3.0);
        let mut r = *self;
        for _ in 0..4 {
            let rtr = r.transpose().mul_mat(&r);
            let mut corr = Self::identity();
            for i in 0..3 {
                for j in 0..3 {
                    let id = if i == j { three } else { T::zero() };
                    corr.rows[i][j] = (id - rtr.rows[i][j]) * half;
                }
            }
            r = r.mul_mat(&corr);
        }
        r
    }

    /// `max |RᵀR − I|`.
    pub fn orthogonality_defect(&self) -> T {
        let rtr = self.transpose().mul_mat(self);
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { T::one() } else { T::zero() };
                worst = worst.max((rtr.rows[i][j] - id).abs());
            }
        }
        worst
    }
}

/// Dense `n × n` matrix with `2 ≤ n ≤ 6`.
///
/// Matrices built through [`SmallMatrix::antisymmetric`] and
/// [`SmallMatrix::set_pair`] are antisymmetric by construction; any plain
/// [`SmallMatrix::set`] drops the tag.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallMatrix<T> {
    n: usize,
    data: [[T; MAX_DIM]; MAX_DIM],
    antisymmetric: bool,
}

impl<T: Real> SmallMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&n),
            "SmallMatrix dimension {n} outside 1..={MAX_DIM}"
        );
        Self {
            n,
            data: [[T::zero(); MAX_DIM]; MAX_DIM],
            antisymmetric: false,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i][i] = T::one();
        }
        m
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i][i] = v;
        }
        m
    }

    /// Zero matrix tagged antisymmetric; fill it with [`Self::set_pair`].
    pub fn antisymmetric(n: usize) -> Self {
        let mut m = Self::zeros(n);
        m.antisymmetric = true;
        m
    }

    pub fn from_rows(rows: &[&[T]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "row {i} has wrong length");
            m.data[i][..n].copy_from_slice(r);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_tagged_antisymmetric(&self) -> bool {
        self.antisymmetric
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        assert!(i < self.n && j < self.n);
        self.data[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(i < self.n && j < self.n);
        self.data[i][j] = v;
        self.antisymmetric = false;
    }

    /// Sets `(i, j) = v` and `(j, i) = −v`, keeping the antisymmetric tag.
    pub fn set_pair(&mut self, i: usize, j: usize, v: T) {
        assert!(i < self.n && j < self.n && i != j);
        self.data[i][j] = v;
        self.data[j][i] = -v;
    }

    pub fn transpose(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out.data[i][j] = self.data[j][i];
            }
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n);
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = T::zero();
                for k in 0..self.n {
                    acc = acc + self.data[i][k] * o.data[k][j];
                }
                out.data[i][j] = acc;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(T::zero(), |acc, k| acc + self.data[i][k] * v[k])
            })
            .collect()
    }

    /// `uᵀ A v`.
    pub fn bilinear(&self, u: &[T], v: &[T]) -> T {
        assert!(u.len() == self.n && v.len() == self.n);
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc = acc + u[i] * self.data[i][j] * v[j];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max(self.data[i][j].abs());
            }
        }
        worst
    }

    /// `max |A − B|` entrywise.
    pub fn max_abs_diff(&self, o: &Self) -> T {
        assert_eq!(self.n, o.n);
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max((self.data[i][j] - o.data[i][j]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.data[i][j].is_finite()))
    }
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
///
/// Rejects matrices with `|det A| ≤ 1e−12 ‖A‖ⁿ` (max-entry norm).
pub fn invert_small<T: Real>(a: &SmallMatrix<T>) -> Result<SmallMatrix<T>> {
    let n = a.dim();
    let scale = a.max_abs();
    let singular = |det: T| Error::Singular {
        dim: n,
        condition: to_f64(scale.powi(n as i32) / det.abs()),
    };
    if scale == T::zero() || !a.is_finite() {
        return Err(singular(T::zero()));
    }
    let mut work = a.clone();
    let mut inv = SmallMatrix::identity(n);
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                work.data[i][col]
                    .abs()
                    .partial_cmp(&work.data[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if work.data[pivot][col] == T::zero() {
            return Err(singular(T::zero()));
        }
        if pivot != col {
            work.data.swap(pivot, col);
            inv.data.swap(pivot, col);
            det = -det;
        }
        let p = work.data[col][col];
        det = det * p;
        let pinv = p.recip();
        for j in 0..n {
            work.data[col][j] = work.data[col][j] * pinv;
            inv.data[col][j] = inv.data[col][j] * pinv;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let factor = work.data[i][col];
            if factor == T::zero() {
                continue;
            }
            for j in 0..n {
                work.data[i][j] = work.data[i][j] - factor * work.data[col][j];
                inv.data[i][j] = inv.data[i][j] - factor * inv.data[col][j];
            }
        }
    }
    if det.abs() <= lit::<T>(1e-12) * scale.powi(n as i32) {
        return Err(singular(det));
    }
    Ok(inv)
}

/// Central-difference gradient with per-coordinate step
/// `h_i = scale · max(1, |x_i|)`.
pub fn grad_fd<T: Real, const N: usize>(
    field: impl Fn(&[T; N]) -> T,
    point: &[T; N],
    scale: T,
) -> Result<[T; N]> {
    try_grad_fd(|x| Ok(field(x)), point, scale)
}

/// [`grad_fd`] for fields that can fail.
pub fn try_grad_fd<T: Real, const N: usize>(
    field: impl Fn(&[T; N]) -> Result<T>,
    point: &[T; N],
    scale: T,
) -> Result<[T; N]> {
    if !(scale > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference scale must be positive, got {}",
            scale
        )));
    }
    let mut out = [T::zero(); N];
    for i in 0..N {
        let h = scale * T::one().max(point[i].abs());
        let mut xp = *point;
        let mut xm = *point;
        xp[i] = point[i] + h;
        xm[i] = point[i] - h;
        // the step actually represented in floating point
        let span = xp[i] - xm[i];
        if span == T::zero() {
            return Err(Error::NonFinite {
                what: format!("finite-difference step for coordinate {i} underflowed"),
            });
        }
        let (fp, fm) = (field(&xp)?, field(&xm)?);
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite {
                what: format!("field near coordinate {i} of the gradient stencil"),
            });
        }
        out[i] = (fp - fm) / span;
    }
    Ok(out)
}
