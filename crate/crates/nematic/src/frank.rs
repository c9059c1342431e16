//! The Oseen–Frank elastic energy, its equivalent forms, and the elastic
//! tensors Λ and Θ.
//!
//! The classical Oseen–Frank density for a unit director `d` is
//!
//! ```text
//! F = K1/2 (div d)² + K2/2 (d·curl d)² + K3/2 |d × curl d|²
//! ```
//!
//! Using the unit-norm restriction it is re-expressed with constants
//! `k1 = k3 = K1/2`, `k2 = min{K2,K3}/2`, `k4 = K2 − k2`, `k5 = K3 − k2` as
//!
//! ```text
//! 2F(h,S) = k1 tr(S)² + k2 |curl|² + k3 |h|² tr(S)² + k4 ([h]ₓ : S_skw)²
//!           + 4 k5 |S_skw h|² ,          |curl|² = 2 |S_skw|² ,
//! ```
//!
//! valid for arbitrary `(h, S)` (the generalization needed by the
//! Young-measure layer), and finally in tensor form
//!
//! ```text
//! 2F = S : Λ : S + (S ⊗ h) ⋮ Θ ⋮ (S ⊗ h)
//! ```
//!
//! with `Λ_ijkl = k1 δ_ij δ_kl + k2 (δ_ik δ_jl − δ_il δ_jk)` and the rank-6
//! tensor Θ assembled from the three Kronecker-delta blocks of the appendix.
//! All three forms agree for every `(h, S)` (the K-form needs `|h| = 1`),
//! which pins down the factor conventions uniquely; in particular the `k2`
//! contribution to `F_S` is `k2 (S − Sᵀ) = 2 k2 S_skw`.
//!
//! Production code uses the closed delta-form contractions below; the dense
//! [`Tensor4`]/[`Tensor6`] builders exist for the brute-force oracle path.

use crate::tensor::{
    cross_matrix, delta, skw, uncross, Mat3, Tensor3, Tensor4, Tensor6, Vec3,
};
use crate::{Error, Result};

/// Frank elastic moduli `K1, K2, K3` together with the derived constants
/// `k1..k5` of the reformulated energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrankConstants {
    /// Splay modulus `K1 > 0`.
    pub big_k1: f64,
    /// Twist modulus `K2 > 0`.
    pub big_k2: f64,
    /// Bend modulus `K3 > 0`.
    pub big_k3: f64,
    /// `k1 = K1/2`.
    pub k1: f64,
    /// `k2 = min{K2,K3}/2`.
    pub k2: f64,
    /// `k3 = K1/2`.
    pub k3: f64,
    /// `k4 = K2 − k2 ≥ 0`.
    pub k4: f64,
    /// `k5 = K3 − k2 ≥ 0`.
    pub k5: f64,
}

impl FrankConstants {
    /// Builds the constants from the classical moduli.
    ///
    /// Fails with a validation error unless `K1, K2, K3 > 0`.
    pub fn new(big_k1: f64, big_k2: f64, big_k3: f64) -> Result<Self> {
        if !(big_k1 > 0.0 && big_k2 > 0.0 && big_k3 > 0.0)
            || !(big_k1.is_finite() && big_k2.is_finite() && big_k3.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "Frank moduli must be positive and finite, got K1={big_k1}, K2={big_k2}, K3={big_k3}"
            )));
        }
        let (k1, k2, k3, k4, k5) = derive_k(big_k1, big_k2, big_k3)?;
        Ok(FrankConstants {
            big_k1,
            big_k2,
            big_k3,
            k1,
            k2,
            k3,
            k4,
            k5,
        })
    }

    /// One-constant approximation `K1 = K2 = K3 = k`.
    pub fn one_constant(k: f64) -> Result<Self> {
        FrankConstants::new(k, k, k)
    }
}

/// The `K → k` constant mapping of the reformulated energy:
/// `k1 = k3 = K1/2`, `k2 = min{K2,K3}/2`, `k4 = K2 − k2`, `k5 = K3 − k2`.
pub fn derive_k(big_k1: f64, big_k2: f64, big_k3: f64) -> Result<(f64, f64, f64, f64, f64)> {
    if !(big_k1 > 0.0 && big_k2 > 0.0 && big_k3 > 0.0) {
        return Err(Error::InvalidConfig(
            "derive_k requires K1, K2, K3 > 0".into(),
        ));
    }
    let k1 = big_k1 / 2.0;
    let k3 = k1;
    let k2 = big_k2.min(big_k3) / 2.0;
    let k4 = big_k2 - k2;
    let k5 = big_k3 - k2;
    Ok((k1, k2, k3, k4, k5))
}

/// The elastic rank-4 tensor Λ in closed form (coefficients only; the
/// Kronecker-delta structure is baked into the contraction methods).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaTensor {
    /// Coefficient of `δ_ij δ_kl`.
    pub k1: f64,
    /// Coefficient of `δ_ik δ_jl − δ_il δ_jk`.
    pub k2: f64,
}

/// Builds Λ with `Λ_ijkl = k1 δ_ij δ_kl + k2 (δ_ik δ_jl − δ_il δ_jk)`.
/// Zero coefficients are allowed (test mode for single-block checks).
pub fn build_lambda(k1: f64, k2: f64) -> LambdaTensor {
    LambdaTensor { k1, k2 }
}

impl LambdaTensor {
    /// `(Λ : S)_ij = k1 tr(S) δ_ij + k2 (S_ij − S_ji)`.
    pub fn contract(&self, s: Mat3) -> Mat3 {
        Mat3::IDENTITY * (self.k1 * s.trace()) + (s - s.transpose()) * self.k2
    }

    /// Quadratic form `S : Λ : S = k1 tr(S)² + 2 k2 |S_skw|²`.
    pub fn quadratic(&self, s: Mat3) -> f64 {
        s.ddot(self.contract(s))
    }

    /// Dense representation for the oracle path.
    pub fn dense(&self) -> Tensor4 {
        let (k1, k2) = (self.k1, self.k2);
        Tensor4::from_fn(|i, j, k, l| {
            k1 * delta(i, j) * delta(k, l) + k2 * (delta(i, k) * delta(j, l) - delta(i, l) * delta(j, k))
        })
    }
}

/// The elastic rank-6 tensor Θ in closed form (coefficients of the three
/// Kronecker-delta blocks of (the appendix decomposition)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaTensor {
    /// Coefficient of the `δ_ij δ_lm δ_kn` block (`Θ¹`, trace–trace).
    pub k3: f64,
    /// Coefficient of the Levi–Civita product block (`Υ_kji Υ_nml`,
    /// the twist square).
    pub k4: f64,
    /// Coefficient of the skew-vector block (`Θ³`, the bend square).
    pub k5: f64,
}

/// Builds Θ from the three delta blocks with coefficients `k3, k4, k5 ≥ 0`.
pub fn build_theta(k3: f64, k4: f64, k5: f64) -> ThetaTensor {
    ThetaTensor { k3, k4, k5 }
}

impl ThetaTensor {
    /// Closed-form contraction `(Θ ⋮ (S ⊗ h))_ijk`:
    ///
    /// ```text
    /// k3 δ_ij tr(S) h_k
    /// + k4 [ (S_ij − S_ji) h_k + (S_jk − S_kj) h_i + (S_ki − S_ik) h_j ]
    /// + k5 [ 2 δ_jk (S_skw h)_i − 2 δ_ik (S_skw h)_j ]
    /// ```
    pub fn contract(&self, s: Mat3, h: Vec3) -> Tensor3 {
        let tr = s.trace();
        let w = skw(s).mul_vec(h);
        let (k3, k4, k5) = (self.k3, self.k4, self.k5);
        Tensor3::from_fn(|i, j, k| {
            k3 * delta(i, j) * tr * h[k]
                + k4 * ((s[(i, j)] - s[(j, i)]) * h[k]
                    + (s[(j, k)] - s[(k, j)]) * h[i]
                    + (s[(k, i)] - s[(i, k)]) * h[j])
                + k5 * (2.0 * delta(j, k) * w[i] - 2.0 * delta(i, k) * w[j])
        })
    }

    /// Quadratic form `(S ⊗ h) ⋮ Θ ⋮ (S ⊗ h)
    /// = k3 tr(S)²|h|² + k4 ([h]ₓ : S)² + 4 k5 |S_skw h|²`.
    pub fn quadratic(&self, s: Mat3, h: Vec3) -> f64 {
        let tr = s.trace();
        let w = skw(s).mul_vec(h);
        let p = cross_matrix(h).ddot(s);
        self.k3 * tr * tr * h.norm_sq() + self.k4 * p * p + 4.0 * self.k5 * w.norm_sq()
    }

    /// Bilinear pairing `(S ⊗ h) ⋮ Θ ⋮ (S' ⊗ h')` (Θ is symmetric under
    /// swapping its two index triples, so the order of arguments is
    /// irrelevant).
    pub fn pair(&self, s: Mat3, h: Vec3, s2: Mat3, h2: Vec3) -> f64 {
        crate::tensor::t3_dot_t3(Tensor3::dyad(s, h), self.contract(s2, h2))
    }

    /// Quadratic form of a *difference of dyads*,
    /// `(S⊗h − S̃⊗h̃) ⋮ Θ ⋮ (S⊗h − S̃⊗h̃)`, needed by the relative energy.
    pub fn quadratic_diff(&self, s: Mat3, h: Vec3, s2: Mat3, h2: Vec3) -> f64 {
        self.quadratic(s, h) - 2.0 * self.pair(s, h, s2, h2) + self.quadratic(s2, h2)
    }

    /// Dense representation for the oracle path, assembled from the exact
    /// Kronecker-delta blocks of the defining display.
    pub fn dense(&self) -> Tensor6 {
        let (k3, k4, k5) = (self.k3, self.k4, self.k5);
        Tensor6::from_fn(|i, j, k, l, m, n| {
            let theta1 = delta(i, j) * delta(l, m) * delta(k, n);
            // Levi–Civita product block Υ_kji Υ_nml expanded in deltas.
            let theta_twist = delta(k, n) * delta(j, m) * delta(i, l)
                + delta(k, m) * delta(j, l) * delta(i, n)
                + delta(k, l) * delta(j, n) * delta(i, m)
                - delta(k, n) * delta(j, l) * delta(i, m)
                - delta(k, m) * delta(j, n) * delta(i, l)
                - delta(k, l) * delta(j, m) * delta(i, n);
            let theta_bend = delta(i, l) * delta(m, n) * delta(j, k)
                - delta(m, i) * delta(l, n) * delta(j, k)
                - delta(l, j) * delta(m, n) * delta(i, k)
                + delta(j, m) * delta(l, n) * delta(i, k);
            k3 * theta1 + k4 * theta_twist + k5 * theta_bend
        })
    }
}

/// Both elastic tensors bundled, as used by the stress/variational code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticTensors {
    /// The rank-4 tensor Λ (quadratic part).
    pub lambda: LambdaTensor,
    /// The rank-6 tensor Θ (quartic part).
    pub theta: ThetaTensor,
    /// The constants the tensors were built from.
    pub constants: FrankConstants,
}

impl ElasticTensors {
    /// Builds Λ and Θ from Frank constants.
    pub fn new(c: FrankConstants) -> Self {
        ElasticTensors {
            lambda: build_lambda(c.k1, c.k2),
            theta: build_theta(c.k3, c.k4, c.k5),
            constants: c,
        }
    }

    /// Convenience constructor from the classical moduli.
    pub fn from_moduli(big_k1: f64, big_k2: f64, big_k3: f64) -> Result<Self> {
        Ok(ElasticTensors::new(FrankConstants::new(big_k1, big_k2, big_k3)?))
    }
}

/// The curl vector associated with a gradient-like matrix `S` (for
/// `S = ∇d` this is `curl d`): `c = 2 · uncross(S_skw)`.
pub fn curl_of_gradient(s: Mat3) -> Vec3 {
    uncross(skw(s)) * 2.0
}

/// Energy density, K-form (the classical Oseen–Frank expression):
/// `F = K1/2 tr(S)² + K2/2 (h·c)² + K3/2 |h × c|²` with `c` the curl vector
/// of `S`. Equivalent to the other forms only when `|h| = 1`.
pub fn energy_density_k_form(h: Vec3, s: Mat3, c: &FrankConstants) -> f64 {
    let curl = curl_of_gradient(s);
    let twist = h.dot(curl);
    let bend = h.cross(curl);
    0.5 * (c.big_k1 * s.trace().powi(2) + c.big_k2 * twist * twist + c.big_k3 * bend.norm_sq())
}

/// Energy density, little-k form, valid for arbitrary `(h, S)`:
/// `2F = k1 tr(S)² + 2 k2 |S_skw|² + k3 |h|² tr(S)² + k4 ([h]ₓ:S)²
///       + 4 k5 |S_skw h|²`.
pub fn energy_density_small_k_form(h: Vec3, s: Mat3, c: &FrankConstants) -> f64 {
    let tr = s.trace();
    let sk = skw(s);
    let w = sk.mul_vec(h);
    let p = cross_matrix(h).ddot(s);
    0.5 * (c.k1 * tr * tr
        + 2.0 * c.k2 * sk.norm_sq()
        + c.k3 * h.norm_sq() * tr * tr
        + c.k4 * p * p
        + 4.0 * c.k5 * w.norm_sq())
}

/// Energy density, tensor form: `2F = S:Λ:S + (S⊗h)⋮Θ⋮(S⊗h)` via the
/// closed-form contractions.
pub fn energy_density_tensor_form(h: Vec3, s: Mat3, et: &ElasticTensors) -> f64 {
    0.5 * (et.lambda.quadratic(s) + et.theta.quadratic(s, h))
}

/// Default energy density used by the solver and energetics: the tensor
/// form (identical to the little-k form for all inputs).
pub fn energy_density(h: Vec3, s: Mat3, et: &ElasticTensors) -> f64 {
    energy_density_tensor_form(h, s, et)
}

/// Partial derivative `F_S(h, S)`:
///
/// ```text
/// F_S = k1 tr(S) I + k2 (S − Sᵀ) + k3 |h|² tr(S) I
///       + k4 ([h]ₓ : S) [h]ₓ + 4 k5 (S_skw h ⊗ h)_skw .
/// ```
pub fn f_s(h: Vec3, s: Mat3, c: &FrankConstants) -> Mat3 {
    let tr = s.trace();
    let hx = cross_matrix(h);
    let p = hx.ddot(s);
    let w = skw(s).mul_vec(h);
    Mat3::IDENTITY * (c.k1 * tr)
        + (s - s.transpose()) * c.k2
        + Mat3::IDENTITY * (c.k3 * h.norm_sq() * tr)
        + hx * (c.k4 * p)
        + skw(w.outer(h)) * (4.0 * c.k5)
}

/// Partial derivative `F_h(h, S)`:
///
/// ```text
/// F_h = k3 tr(S)² h + 2 k4 ([h]ₓ : S) uncross(S_skw) + 4 k5 S_skwᵀ S_skw h .
/// ```
pub fn f_h(h: Vec3, s: Mat3, c: &FrankConstants) -> Vec3 {
    let tr = s.trace();
    let sk = skw(s);
    let p = cross_matrix(h).ddot(s);
    h * (c.k3 * tr * tr)
        + uncross(sk) * (2.0 * c.k4 * p)
        + sk.transpose().mul_mat(sk).mul_vec(h) * (4.0 * c.k5)
}

/// Rank-one Λ form `a⊗b : Λ : a⊗b = k1 (a·b)² + k2 (|a|²|b|² − (a·b)²)`,
/// bounded below by `min{k1,k2} |a|²|b|²` (strong ellipticity).
pub fn lambda_rank_one_form(lambda: &LambdaTensor, a: Vec3, b: Vec3) -> f64 {
    let ab = a.dot(b);
    lambda.k1 * ab * ab + lambda.k2 * (a.norm_sq() * b.norm_sq() - ab * ab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{t3_dot_t3, t4_mat, t6_t3, Tensor3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1234)
    }

    fn rand_vec(r: &mut ChaCha8Rng) -> Vec3 {
        Vec3([r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)])
    }

    fn rand_mat(r: &mut ChaCha8Rng) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = r.gen_range(-2.0..2.0);
            }
        }
        m
    }

    fn rand_unit(r: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = rand_vec(r);
            if v.norm() > 0.3 {
                return v.normalized();
            }
        }
    }

    // ── derive_k ─────────────────────────────────────────────────────

    #[test]
    fn derive_k_one_constant() {
        let k = derive_k(1.0, 1.0, 1.0).unwrap();
        assert_eq!(k, (0.5, 0.5, 0.5, 0.5, 0.5));
    }

    #[test]
    fn derive_k_generic() {
        let k = derive_k(2.0, 4.0, 6.0).unwrap();
        assert_eq!(k, (1.0, 2.0, 1.0, 2.0, 4.0));
    }

    #[test]
    fn derive_k_symmetric_case() {
        let (_, k2, _, k4, k5) = derive_k(1.0, 3.0, 3.0).unwrap();
        assert_eq!(k2, 1.5);
        assert_eq!(k4, 1.5);
        assert_eq!(k5, 1.5);
    }

    #[test]
    fn derive_k_rejects_nonpositive() {
        assert!(derive_k(0.0, 1.0, 1.0).is_err());
        assert!(FrankConstants::new(1.0, -2.0, 1.0).is_err());
    }

    // ── Λ ────────────────────────────────────────────────────────────

    #[test]
    fn lambda_trace_block() {
        let lam = build_lambda(1.0, 0.0);
        assert_eq!(lam.contract(Mat3::IDENTITY), Mat3::IDENTITY * 3.0);
    }

    #[test]
    fn lambda_skew_block() {
        let lam = build_lambda(0.0, 1.0);
        let s = Vec3::basis(0).outer(Vec3::basis(1));
        let r = lam.contract(s);
        assert_eq!(r[(0, 1)], 1.0);
        assert_eq!(r[(1, 0)], -1.0);
        assert_eq!(r[(0, 0)], 0.0);
    }

    #[test]
    fn lambda_rank_one_example() {
        let lam = build_lambda(1.0, 2.0);
        let v = lambda_rank_one_form(&lam, Vec3::basis(0), Vec3::basis(1));
        assert_eq!(v, 2.0);
        // And through the dense route: a⊗b : Λ : a⊗b.
        let ab = Vec3::basis(0).outer(Vec3::basis(1));
        let dense = lam.dense();
        assert_eq!(ab.ddot(t4_mat(&dense, ab)), 2.0);
    }

    #[test]
    fn lambda_closed_matches_dense_500() {
        let mut r = rng();
        for _ in 0..500 {
            let lam = build_lambda(r.gen_range(0.0..3.0), r.gen_range(0.0..3.0));
            let s = rand_mat(&mut r);
            let fast = lam.contract(s);
            let slow = t4_mat(&lam.dense(), s);
            assert!((fast - slow).norm() <= 1e-12 * (1.0 + slow.norm()));
        }
    }

    #[test]
    fn lambda_ellipticity_random() {
        let mut r = rng();
        for _ in 0..500 {
            let lam = build_lambda(r.gen_range(0.01..3.0), r.gen_range(0.01..3.0));
            let (a, b) = (rand_vec(&mut r), rand_vec(&mut r));
            let q = lambda_rank_one_form(&lam, a, b);
            let bound = lam.k1.min(lam.k2) * a.norm_sq() * b.norm_sq();
            assert!(q >= bound - 1e-12 * (1.0 + bound.abs()));
        }
    }

    // Appendix Λ-block identities against direct formulas.
    #[test]
    fn lambda_appendix_identities() {
        let mut r = rng();
        for _ in 0..200 {
            let s = rand_mat(&mut r);
            let lam0 = Tensor4::from_fn(|i, j, k, l| delta(i, k) * delta(j, l));
            let lam1 = Tensor4::from_fn(|i, j, k, l| delta(i, j) * delta(k, l));
            let lam2 = Tensor4::from_fn(|i, j, k, l| delta(i, l) * delta(j, k));
            let q0 = s.ddot(t4_mat(&lam0, s));
            let q1 = s.ddot(t4_mat(&lam1, s));
            let q2 = s.ddot(t4_mat(&lam2, s));
            let q3 = q0 - q2;
            let tol = 1e-12 * (1.0 + s.norm_sq());
            assert!((q0 - s.norm_sq()).abs() <= tol);
            assert!((q1 - s.trace().powi(2)).abs() <= tol);
            assert!((q2 - s.mul_mat(s).trace()).abs() <= tol);
            assert!((q3 - curl_of_gradient(s).norm_sq()).abs() <= tol);
        }
    }

    // ── Θ ────────────────────────────────────────────────────────────

    #[test]
    fn theta_trace_block_vs_dense() {
        let mut r = rng();
        let th = build_theta(1.0, 0.0, 0.0);
        let dense = th.dense();
        for _ in 0..100 {
            let s = rand_mat(&mut r);
            let h = rand_unit(&mut r);
            let q = th.quadratic(s, h);
            let gamma = Tensor3::dyad(s, h);
            let q_dense = t3_dot_t3(gamma, t6_t3(&dense, &gamma));
            assert!((q - q_dense).abs() <= 1e-12 * (1.0 + q.abs()));
            assert!((q - s.trace().powi(2) * h.norm_sq()).abs() <= 1e-12 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn theta_bend_block_value() {
        let mut r = rng();
        let th = build_theta(0.0, 0.0, 1.0);
        for _ in 0..100 {
            let s = rand_mat(&mut r);
            let h = rand_vec(&mut r);
            let q = th.quadratic(s, h);
            let w = skw(s).mul_vec(h);
            assert!((q - 4.0 * w.norm_sq()).abs() <= 1e-12 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn theta_vanishes_at_h_zero() {
        let mut r = rng();
        let th = build_theta(1.3, 0.7, 2.1);
        for _ in 0..50 {
            let s = rand_mat(&mut r);
            assert_eq!(th.quadratic(s, Vec3::ZERO), 0.0);
            assert_eq!(th.contract(s, Vec3::ZERO), Tensor3::ZERO);
        }
    }

    #[test]
    fn theta_closed_matches_dense_500() {
        let mut r = rng();
        for _ in 0..500 {
            let th = build_theta(
                r.gen_range(0.0..2.0),
                r.gen_range(0.0..2.0),
                r.gen_range(0.0..2.0),
            );
            let s = rand_mat(&mut r);
            let h = rand_vec(&mut r);
            let fast = th.contract(s, h);
            let slow = t6_t3(&th.dense(), &Tensor3::dyad(s, h));
            assert!((fast - slow).norm() <= 1e-11 * (1.0 + slow.norm()));
        }
    }

    // Appendix Θ-block identities: each block's quadratic form equals the
    // corresponding scalar expression.
    #[test]
    fn theta_appendix_identities() {
        let mut r = rng();
        for _ in 0..200 {
            let s = rand_mat(&mut r);
            let h = rand_vec(&mut r);
            let gamma = Tensor3::dyad(s, h);
            let tol = 1e-11 * (1.0 + s.norm_sq() * h.norm_sq());

            // Θ⁰ = δ_il δ_jm δ_kn ↔ |S|²|h|².
            let th0 = Tensor6::from_fn(|i, j, k, l, m, n| delta(i, l) * delta(j, m) * delta(k, n));
            let q0 = t3_dot_t3(gamma, t6_t3(&th0, &gamma));
            assert!((q0 - s.norm_sq() * h.norm_sq()).abs() <= tol);

            // Θ¹ ↔ tr(S)²|h|² (trace block).
            let q1 = build_theta(1.0, 0.0, 0.0).quadratic(s, h);
            assert!((q1 - s.trace().powi(2) * h.norm_sq()).abs() <= tol);

            // δ_kn(δ_il δ_jm − δ_im δ_jl) ↔ |curl|²|h|² = 2|S_skw|²|h|².
            let th2 = Tensor6::from_fn(|i, j, k, l, m, n| {
                delta(k, n) * (delta(i, l) * delta(j, m) - delta(i, m) * delta(j, l))
            });
            let q2 = t3_dot_t3(gamma, t6_t3(&th2, &gamma));
            assert!((q2 - 2.0 * skw(s).norm_sq() * h.norm_sq()).abs() <= tol);

            // Bend block ↔ |h × curl|² = 4|S_skw h|².
            let q3 = build_theta(0.0, 0.0, 1.0).quadratic(s, h);
            assert!((q3 - h.cross(curl_of_gradient(s)).norm_sq()).abs() <= tol);

            // Twist block ↔ (h · curl)² = ([h]ₓ : S)².
            let q4 = build_theta(0.0, 1.0, 0.0).quadratic(s, h);
            let p = cross_matrix(h).ddot(s);
            assert!((q4 - p * p).abs() <= tol);
            assert!((p - h.dot(curl_of_gradient(s))).abs() <= 1e-12 * (1.0 + p.abs()));
        }
    }

    // The Θ blocks are mutually orthogonal in the inner product of the
    // contracted rank-3 tensors (the mechanism behind the norm-equivalence
    // inequality): trace·twist and twist·bend cross terms vanish.
    #[test]
    fn theta_block_orthogonality() {
        let mut r = rng();
        let t1 = build_theta(1.0, 0.0, 0.0);
        let t_twist = build_theta(0.0, 1.0, 0.0);
        let t_bend = build_theta(0.0, 0.0, 1.0);
        for _ in 0..200 {
            let s = rand_mat(&mut r);
            let h = rand_vec(&mut r);
            let g1 = t1.contract(s, h);
            let gt = t_twist.contract(s, h);
            let gb = t_bend.contract(s, h);
            let scale = 1.0 + s.norm_sq() * h.norm_sq();
            assert!(t3_dot_t3(g1, gt).abs() <= 1e-11 * scale);
            assert!(t3_dot_t3(gt, gb).abs() <= 1e-11 * scale);
        }
    }

    // Norm-equivalence inequality: |Θ⋮(Γ−Γ̃)|² ≤ c (Γ−Γ̃)⋮Θ⋮(Γ−Γ̃) for dyadic
    // differences, with an empirical c reported (not asserted sharp).
    #[test]
    fn theta_norm_equivalence_empirical() {
        let mut r = rng();
        let th = build_theta(0.5, 0.5, 0.5);
        let mut c_max: f64 = 0.0;
        for _ in 0..2000 {
            let (s, s2) = (rand_mat(&mut r), rand_mat(&mut r));
            let (h, h2) = (rand_vec(&mut r), rand_vec(&mut r));
            let g = th.contract(s, h) - th.contract(s2, h2);
            let quad = th.quadratic_diff(s, h, s2, h2);
            if quad > 1e-10 {
                c_max = c_max.max(g.norm_sq() / quad);
            }
            assert!(quad >= -1e-10);
        }
        // The blocks are squares with fixed norm factors (3, 6, 16 vs the
        // quadratic-form factors 1, 1, 4), so c stays bounded.
        assert!(c_max.is_finite() && c_max > 0.0);
        assert!(c_max <= 50.0, "empirical c unexpectedly large: {c_max}");
    }

    // ── energy forms ─────────────────────────────────────────────────

    #[test]
    fn energy_zero_gradient() {
        let et = ElasticTensors::from_moduli(1.0, 2.0, 3.0).unwrap();
        let h = Vec3::basis(2);
        assert_eq!(energy_density_k_form(h, Mat3::ZERO, &et.constants), 0.0);
        assert_eq!(energy_density_small_k_form(h, Mat3::ZERO, &et.constants), 0.0);
        assert_eq!(energy_density_tensor_form(h, Mat3::ZERO, &et), 0.0);
    }

    #[test]
    fn energy_k_form_equals_small_k_on_unit_directors() {
        let mut r = rng();
        for _ in 0..200 {
            let et = ElasticTensors::from_moduli(
                r.gen_range(0.1..3.0),
                r.gen_range(0.1..3.0),
                r.gen_range(0.1..3.0),
            )
            .unwrap();
            let s = rand_mat(&mut r);
            let h = rand_unit(&mut r);
            let fa = energy_density_k_form(h, s, &et.constants);
            let fb = energy_density_small_k_form(h, s, &et.constants);
            assert!((fa - fb).abs() <= 1e-12 * (1.0 + s.norm_sq()));
        }
    }

    #[test]
    fn energy_small_k_equals_tensor_form_everywhere() {
        let mut r = rng();
        for _ in 0..200 {
            let et = ElasticTensors::from_moduli(
                r.gen_range(0.1..3.0),
                r.gen_range(0.1..3.0),
                r.gen_range(0.1..3.0),
            )
            .unwrap();
            let s = rand_mat(&mut r);
            let h = rand_vec(&mut r); // arbitrary length
            let fb = energy_density_small_k_form(h, s, &et.constants);
            let fc = energy_density_tensor_form(h, s, &et);
            assert!((fb - fc).abs() <= 1e-12 * (1.0 + fb.abs()));
            // and against the dense tensors:
            let gamma = Tensor3::dyad(s, h);
            let fd = 0.5
                * (s.ddot(t4_mat(&et.lambda.dense(), s))
                    + t3_dot_t3(gamma, t6_t3(&et.theta.dense(), &gamma)));
            assert!((fc - fd).abs() <= 1e-11 * (1.0 + fc.abs()));
            assert!(fb >= -1e-12);
        }
    }

    // ── F_S, F_h ─────────────────────────────────────────────────────

    #[test]
    fn derivatives_vanish_at_zero_gradient() {
        let c = FrankConstants::new(1.0, 2.0, 3.0).unwrap();
        let h = Vec3::basis(1);
        assert_eq!(f_s(h, Mat3::ZERO, &c), Mat3::ZERO);
        assert_eq!(f_h(h, Mat3::ZERO, &c), Vec3::ZERO);
    }

    #[test]
    fn derivatives_at_h_zero() {
        let mut r = rng();
        let c = FrankConstants::new(1.4, 0.9, 2.2).unwrap();
        for _ in 0..50 {
            let s = rand_mat(&mut r);
            assert_eq!(f_h(Vec3::ZERO, s, &c), Vec3::ZERO);
            // Only the Λ part survives: k1 tr(S) I + k2 (S − Sᵀ).
            let expect = Mat3::IDENTITY * (c.k1 * s.trace()) + (s - s.transpose()) * c.k2;
            assert!((f_s(Vec3::ZERO, s, &c) - expect).norm() <= 1e-13 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut r = rng();
        let step = 1e-5;
        for _ in 0..200 {
            let et = ElasticTensors::from_moduli(
                r.gen_range(0.1..3.0),
                r.gen_range(0.1..3.0),
                r.gen_range(0.1..3.0),
            )
            .unwrap();
            let c = et.constants;
            let s = rand_mat(&mut r);
            let h = rand_vec(&mut r);

            let fs = f_s(h, s, &c);
            for i in 0..3 {
                for j in 0..3 {
                    let mut sp = s;
                    let mut sm = s;
                    sp[(i, j)] += step;
                    sm[(i, j)] -= step;
                    let fd = (energy_density_small_k_form(h, sp, &c)
                        - energy_density_small_k_form(h, sm, &c))
                        / (2.0 * step);
                    let scale = 1.0 + fs.norm();
                    assert!(
                        (fs[(i, j)] - fd).abs() <= 1e-6 * scale,
                        "F_S mismatch at ({i},{j}): {} vs {}",
                        fs[(i, j)],
                        fd
                    );
                }
            }

            let fh = f_h(h, s, &c);
            for i in 0..3 {
                let mut hp = h;
                let mut hm = h;
                hp[i] += step;
                hm[i] -= step;
                let fd = (energy_density_small_k_form(hp, s, &c)
                    - energy_density_small_k_form(hm, s, &c))
                    / (2.0 * step);
                let scale = 1.0 + fh.norm();
                assert!((fh[i] - fd).abs() <= 1e-6 * scale);
            }
        }
    }
}
