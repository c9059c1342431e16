//! Fixed-dimension (d = 3) tensor types and contractions.
//!
//! Everything in the elastic-energy calculus happens in three dimensions, so
//! the types here are small fixed arrays with hand-written contraction loops.
//! The rank-4 and rank-6 tensors are stored densely (3⁴ and 3⁶ entries); the
//! production energy code in [`crate::frank`] uses closed Kronecker-delta
//! forms instead and is cross-checked against these dense evaluations.
//!
//! Index conventions (matching the usual continuum-mechanics notation):
//!
//! * `A : B = Σ_ij A_ij B_ij` (double contraction of matrices),
//! * `(Λ : A)_ij = Σ_kl Λ_ijkl A_kl`,
//! * `(Θ ⋮ Γ)_ijk = Σ_lmn Θ_ijklmn Γ_lmn`,
//! * `[h]ₓ` is the cross-product matrix with `[h]ₓ b = h × b`,
//! * `uncross` is its left inverse on skew matrices.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

// ──────────────────────────────────────────────────────────────────────
// Vec3
// ──────────────────────────────────────────────────────────────────────

/// A vector of R³.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    /// The zero vector.
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    /// Builds a vector from components.
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    /// The `i`-th standard basis vector (`i` ∈ 0..3).
    pub fn basis(i: usize) -> Self {
        let mut v = Vec3::ZERO;
        v.0[i] = 1.0;
        v
    }

    /// Euclidean inner product `a · b`.
    pub fn dot(self, other: Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    /// Euclidean norm `|a|`.
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Squared Euclidean norm `|a|²`.
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Cross product `a × b`.
    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3([
            self.0[1] * other.0[2] - self.0[2] * other.0[1],
            self.0[2] * other.0[0] - self.0[0] * other.0[2],
            self.0[0] * other.0[1] - self.0[1] * other.0[0],
        ])
    }

    /// Outer product `a ⊗ b`.
    pub fn outer(self, other: Vec3) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = self.0[i] * other.0[j];
            }
        }
        m
    }

    /// Returns `a / |a|`; the caller must ensure `|a| > 0`.
    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }

    /// True iff every component is finite.
    pub fn is_finite(self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

// ──────────────────────────────────────────────────────────────────────
// Mat3
// ──────────────────────────────────────────────────────────────────────

/// A matrix of R³ˣ³, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    /// The zero matrix.
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    /// The identity matrix.
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Builds a matrix entrywise from `f(i, j)`.
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Transpose `Aᵀ`.
    pub fn transpose(self) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = self[(j, i)];
            }
        }
        m
    }

    /// Trace `tr A`.
    pub fn trace(self) -> f64 {
        self[(0, 0)] + self[(1, 1)] + self[(2, 2)]
    }

    /// Symmetric part `A_sym = (A + Aᵀ)/2`.
    pub fn sym(self) -> Mat3 {
        (self + self.transpose()) * 0.5
    }

    /// Skew-symmetric part `A_skw = (A − Aᵀ)/2`.
    pub fn skw(self) -> Mat3 {
        (self - self.transpose()) * 0.5
    }

    /// Double contraction `A : B = Σ_ij A_ij B_ij`.
    pub fn ddot(self, other: Mat3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self[(i, j)] * other[(i, j)];
            }
        }
        s
    }

    /// Frobenius norm `|A| = (A : A)^{1/2}`.
    pub fn norm(self) -> f64 {
        self.ddot(self).sqrt()
    }

    /// Squared Frobenius norm.
    pub fn norm_sq(self) -> f64 {
        self.ddot(self)
    }

    /// Matrix–vector product `A b`.
    pub fn mul_vec(self, b: Vec3) -> Vec3 {
        let mut v = Vec3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                v[i] += self[(i, j)] * b[j];
            }
        }
        v
    }

    /// Matrix–matrix product `A B`.
    pub fn mul_mat(self, b: Mat3) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    m[(i, j)] += self[(i, k)] * b[(k, j)];
                }
            }
        }
        m
    }

    /// True iff every entry is finite.
    pub fn is_finite(self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = self[(i, j)] + o[(i, j)];
            }
        }
        m
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = self[(i, j)] - o[(i, j)];
            }
        }
        m
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self * -1.0
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = self[(i, j)] * s;
            }
        }
        m
    }
}

// ──────────────────────────────────────────────────────────────────────
// Special maps: sym/skw wrappers, cross matrix, uncross, Levi–Civita
// ──────────────────────────────────────────────────────────────────────

/// Symmetric part of a matrix, `(A + Aᵀ)/2`.
pub fn sym(a: Mat3) -> Mat3 {
    a.sym()
}

/// Skew-symmetric part of a matrix, `(A − Aᵀ)/2`.
pub fn skw(a: Mat3) -> Mat3 {
    a.skw()
}

/// Cross-product matrix `[h]ₓ` with `[h]ₓ b = h × b` for all `b`.
pub fn cross_matrix(h: Vec3) -> Mat3 {
    Mat3([
        [0.0, -h[2], h[1]],
        [h[2], 0.0, -h[0]],
        [-h[1], h[0], 0.0],
    ])
}

/// Left inverse of [`cross_matrix`]: returns `(A₃₂, A₁₃, A₂₁)`.
///
/// On skew matrices this recovers the axial vector; for a gradient,
/// `2 · uncross(skw(∇a)) = curl a`.
pub fn uncross(a: Mat3) -> Vec3 {
    Vec3([a[(2, 1)], a[(0, 2)], a[(1, 0)]])
}

/// The Levi–Civita tensor `Υ` with `Υ_ijk = sgn` of the permutation `(i,j,k)`.
pub fn levi_civita() -> Tensor3 {
    let mut t = Tensor3::ZERO;
    t[(0, 1, 2)] = 1.0;
    t[(1, 2, 0)] = 1.0;
    t[(2, 0, 1)] = 1.0;
    t[(0, 2, 1)] = -1.0;
    t[(2, 1, 0)] = -1.0;
    t[(1, 0, 2)] = -1.0;
    t
}

/// Kronecker delta as a float, `δ_ij`.
#[inline]
pub fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Levi–Civita symbol as a float, `Υ_ijk`.
#[inline]
pub fn eps(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

// ──────────────────────────────────────────────────────────────────────
// Higher-order tensors
// ──────────────────────────────────────────────────────────────────────

/// A tensor of order 3 (3³ entries), e.g. `Γ`, `Υ`, or `∇d ⊗ d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor3(pub [[[f64; 3]; 3]; 3]);

impl Tensor3 {
    /// The zero tensor.
    pub const ZERO: Tensor3 = Tensor3([[[0.0; 3]; 3]; 3]);

    /// Builds a tensor from a component function `f(i,j,k)`.
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize) -> f64) -> Tensor3 {
        let mut t = Tensor3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    t[(i, j, k)] = f(i, j, k);
                }
            }
        }
        t
    }

    /// The dyadic product `(A ⊗ a)_ijk = A_ij a_k`.
    pub fn dyad(a: Mat3, v: Vec3) -> Tensor3 {
        Tensor3::from_fn(|i, j, k| a[(i, j)] * v[k])
    }

    /// Frobenius norm.
    pub fn norm(self) -> f64 {
        t3_dot_t3(self, self).sqrt()
    }

    /// Squared Frobenius norm.
    pub fn norm_sq(self) -> f64 {
        t3_dot_t3(self, self)
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.0[i][j][k]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        &mut self.0[i][j][k]
    }
}

impl Add for Tensor3 {
    type Output = Tensor3;
    fn add(self, o: Tensor3) -> Tensor3 {
        Tensor3::from_fn(|i, j, k| self[(i, j, k)] + o[(i, j, k)])
    }
}

impl Sub for Tensor3 {
    type Output = Tensor3;
    fn sub(self, o: Tensor3) -> Tensor3 {
        Tensor3::from_fn(|i, j, k| self[(i, j, k)] - o[(i, j, k)])
    }
}

impl Mul<f64> for Tensor3 {
    type Output = Tensor3;
    fn mul(self, s: f64) -> Tensor3 {
        Tensor3::from_fn(|i, j, k| self[(i, j, k)] * s)
    }
}

/// A dense tensor of order 4 (3⁴ entries), e.g. the elastic tensor `Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4(pub [[[[f64; 3]; 3]; 3]; 3]);

impl Tensor4 {
    /// The zero tensor.
    pub const ZERO: Tensor4 = Tensor4([[[[0.0; 3]; 3]; 3]; 3]);

    /// Builds a tensor from a component function `f(i,j,k,l)`.
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Tensor4 {
        let mut t = Tensor4::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t[(i, j, k, l)] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }
}

impl Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = f64;
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &f64 {
        &self.0[i][j][k][l]
    }
}

impl IndexMut<(usize, usize, usize, usize)> for Tensor4 {
    fn index_mut(&mut self, (i, j, k, l): (usize, usize, usize, usize)) -> &mut f64 {
        &mut self.0[i][j][k][l]
    }
}

/// A dense tensor of order 5 (3⁵ entries), the result of contracting a
/// rank-6 tensor with a vector in its third slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor5(pub Box<[f64; 243]>);

impl Tensor5 {
    /// The zero tensor.
    pub fn zero() -> Tensor5 {
        Tensor5(Box::new([0.0; 243]))
    }

    #[inline]
    fn offset(i: usize, j: usize, l: usize, m: usize, n: usize) -> usize {
        (((i * 3 + j) * 3 + l) * 3 + m) * 3 + n
    }
}

impl Index<(usize, usize, usize, usize, usize)> for Tensor5 {
    type Output = f64;
    fn index(&self, (i, j, l, m, n): (usize, usize, usize, usize, usize)) -> &f64 {
        &self.0[Tensor5::offset(i, j, l, m, n)]
    }
}

impl IndexMut<(usize, usize, usize, usize, usize)> for Tensor5 {
    fn index_mut(&mut self, (i, j, l, m, n): (usize, usize, usize, usize, usize)) -> &mut f64 {
        &mut self.0[Tensor5::offset(i, j, l, m, n)]
    }
}

/// A dense tensor of order 6 (3⁶ entries), e.g. the elastic tensor `Θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor6(pub Box<[f64; 729]>);

impl Tensor6 {
    /// The zero tensor.
    pub fn zero() -> Tensor6 {
        Tensor6(Box::new([0.0; 729]))
    }

    /// Builds a tensor from a component function `f(i,j,k,l,m,n)`.
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize, usize, usize) -> f64) -> Tensor6 {
        let mut t = Tensor6::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        for m in 0..3 {
                            for n in 0..3 {
                                t[(i, j, k, l, m, n)] = f(i, j, k, l, m, n);
                            }
                        }
                    }
                }
            }
        }
        t
    }

    #[inline]
    fn offset(i: usize, j: usize, k: usize, l: usize, m: usize, n: usize) -> usize {
        ((((i * 3 + j) * 3 + k) * 3 + l) * 3 + m) * 3 + n
    }
}

impl Index<(usize, usize, usize, usize, usize, usize)> for Tensor6 {
    type Output = f64;
    fn index(&self, (i, j, k, l, m, n): (usize, usize, usize, usize, usize, usize)) -> &f64 {
        &self.0[Tensor6::offset(i, j, k, l, m, n)]
    }
}

impl IndexMut<(usize, usize, usize, usize, usize, usize)> for Tensor6 {
    fn index_mut(
        &mut self,
        (i, j, k, l, m, n): (usize, usize, usize, usize, usize, usize),
    ) -> &mut f64 {
        &mut self.0[Tensor6::offset(i, j, k, l, m, n)]
    }
}

// ──────────────────────────────────────────────────────────────────────
// Contractions
// ──────────────────────────────────────────────────────────────────────

/// `(Λ : A)_ij = Σ_kl Λ_ijkl A_kl`.
pub fn t4_mat(lambda: &Tensor4, a: Mat3) -> Mat3 {
    let mut out = Mat3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    out[(i, j)] += lambda[(i, j, k, l)] * a[(k, l)];
                }
            }
        }
    }
    out
}

/// `(Λ a)_ijk = Σ_l Λ_ijkl a_l` — contraction of a rank-4 tensor with a
/// vector in the last slot.
pub fn t4_vec3idx(lambda: &Tensor4, a: Vec3) -> Tensor3 {
    let mut out = Tensor3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    out[(i, j, k)] += lambda[(i, j, k, l)] * a[l];
                }
            }
        }
    }
    out
}

/// `(Θ ⋮ Γ)_ijk = Σ_lmn Θ_ijklmn Γ_lmn`.
pub fn t6_t3(theta: &Tensor6, gamma: &Tensor3) -> Tensor3 {
    let mut out = Tensor3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut s = 0.0;
                for l in 0..3 {
                    for m in 0..3 {
                        for n in 0..3 {
                            s += theta[(i, j, k, l, m, n)] * gamma[(l, m, n)];
                        }
                    }
                }
                out[(i, j, k)] = s;
            }
        }
    }
    out
}

/// `(A : Θ)_klmn = Σ_ij A_ij Θ_ijklmn` — contraction of a matrix with the
/// first two slots of a rank-6 tensor.
pub fn mat_t6(a: Mat3, theta: &Tensor6) -> Tensor4 {
    let mut out = Tensor4::ZERO;
    for k in 0..3 {
        for l in 0..3 {
            for m in 0..3 {
                for n in 0..3 {
                    let mut s = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            s += a[(i, j)] * theta[(i, j, k, l, m, n)];
                        }
                    }
                    out[(k, l, m, n)] = s;
                }
            }
        }
    }
    out
}

/// `(a · Θ)_ijlmn = Σ_k a_k Θ_ijklmn` — contraction of a vector with the
/// third slot of a rank-6 tensor, yielding a rank-5 tensor.
pub fn vec_t6(a: Vec3, theta: &Tensor6) -> Tensor5 {
    let mut out = Tensor5::zero();
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                for m in 0..3 {
                    for n in 0..3 {
                        let mut s = 0.0;
                        for k in 0..3 {
                            s += a[k] * theta[(i, j, k, l, m, n)];
                        }
                        out[(i, j, l, m, n)] = s;
                    }
                }
            }
        }
    }
    out
}

/// `(Γ : A)_i = Σ_jk Γ_ijk A_jk`.
pub fn t3_mat(gamma: &Tensor3, a: Mat3) -> Vec3 {
    let mut out = Vec3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i] += gamma[(i, j, k)] * a[(j, k)];
            }
        }
    }
    out
}

/// `(Γ · a)_ij = Σ_k Γ_ijk a_k`.
pub fn t3_vec(gamma: &Tensor3, a: Vec3) -> Mat3 {
    let mut out = Mat3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[(i, j)] += gamma[(i, j, k)] * a[k];
            }
        }
    }
    out
}

/// Full contraction `Γ ⋮ Γ' = Σ_ijk Γ_ijk Γ'_ijk`.
pub fn t3_dot_t3(a: Tensor3, b: Tensor3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                s += a[(i, j, k)] * b[(i, j, k)];
            }
        }
    }
    s
}
