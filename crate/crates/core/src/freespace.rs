//! Free-electron plane-wave solutions and the closed-form zero-model
//! limits used for calibration.

use crate::real::Real;
use crate::spinor::{alpha_dot, dirac_matrices, Bispinor, Matrix4, C64};

/// Dimensionless four-wave vector: `q = ħk/(m_e c)`, `q₄ = ħω/(m_e c²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveFourVector {
    pub q: [f64; 3],
    pub q4: f64,
}

impl WaveFourVector {
    pub fn new(q: [f64; 3], q4: f64) -> Self {
        Self { q, q4 }
    }

    /// On-shell positive-frequency vector shifted by the detuning `ξ`.
    pub fn from_detuning(q: [f64; 3], xi: f64) -> Self {
        Self { q, q4: q40(q) + xi }
    }

    pub fn detuning(&self) -> f64 {
        self.q4 - q40(self.q)
    }
}

/// Field wavelength and the derived dimensionless frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalScale {
    /// Wavelength in metres.
    pub lambda0: f64,
    /// Angular frequency `2πc/λ₀` in rad/s.
    pub omega0: f64,
    /// `ħω₀/(m_e c²)`.
    pub omega: f64,
}

const HBAR: f64 = 1.054_571_817e-34;
const C_LIGHT: f64 = 299_792_458.0;
const ELECTRON_REST_ENERGY: f64 = 8.187_105_776_6e-14;

impl PhysicalScale {
    pub fn from_wavelength(lambda0: f64) -> Self {
        let omega0 = 2.0 * std::f64::consts::PI * C_LIGHT / lambda0;
        Self { lambda0, omega0, omega: HBAR * omega0 / ELECTRON_REST_ENERGY }
    }

    pub fn from_omega(omega: f64) -> Self {
        let omega0 = omega * ELECTRON_REST_ENERGY / HBAR;
        Self { lambda0: 2.0 * std::f64::consts::PI * C_LIGHT / omega0, omega0, omega }
    }

    pub fn wavenumber(&self) -> f64 {
        self.omega0 / C_LIGHT
    }
}

pub fn q40(q: [f64; 3]) -> f64 {
    (1.0 + dot3(q, q)).sqrt()
}

/// `q₄₀` in the solver precision.
pub fn q40_in<T: Real>(q: [f64; 3]) -> T {
    let q2 = (0..3).fold(T::zero(), |acc, k| acc + T::from_f64(q[k]) * T::from_f64(q[k]));
    (T::one() + q2).sqrt()
}

/// `1 − q₄₀ = −q²/(1 + q₄₀)` without cancellation.
pub fn one_minus_q40_in<T: Real>(q: [f64; 3]) -> T {
    let q2 = (0..3).fold(T::zero(), |acc, k| acc + T::from_f64(q[k]) * T::from_f64(q[k]));
    -q2 / (T::one() + q40_in::<T>(q))
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `α₄ + α·q`.
pub fn free_hamiltonian(q: [f64; 3]) -> Matrix4 {
    dirac_matrices().alpha[3] + alpha_dot(&q.map(|x| C64::new(x, 0.0)))
}

/// `P₀ = ½U − (α₄ + α·q)/(2q₄)`.
pub fn p0_operator(k: &WaveFourVector) -> Matrix4 {
    Matrix4::identity().scale_re(0.5) - free_hamiltonian(k.q).scale_re(0.5 / k.q4)
}

/// `P± = ½U ± (α₄ + α·q)/(2q₄₀)`.
pub fn free_projectors(q: [f64; 3]) -> (Matrix4, Matrix4) {
    let h = free_hamiltonian(q).scale_re(0.5 / q40(q));
    let half = Matrix4::identity().scale_re(0.5);
    (half + h, half - h)
}

/// Orthonormal basis with `c₁, c₂` spanning `P₊` and `c₃, c₄` spanning `P₋`.
pub fn free_basis(q: [f64; 3]) -> [Bispinor; 4] {
    let e = q40(q);
    let delta = (2.0 * e * (1.0 + e)).sqrt();
    let r = |x: f64| C64::new(x / delta, 0.0);
    let qp = C64::new(q[0], q[1]) / delta;
    let qm = C64::new(q[0], -q[1]) / delta;
    let z = C64::new(0.0, 0.0);
    [
        Bispinor([r(1.0 + e), z, r(q[2]), qp]),
        Bispinor([z, r(1.0 + e), qm, r(-q[2])]),
        Bispinor([r(q[2]), qp, r(-1.0 - e), z]),
        Bispinor([qm, r(-q[2]), z, r(-1.0 - e)]),
    ]
}

/// Closed-form zero-model quantities at given `q₄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroModel {
    pub s_plus: f64,
    pub s_minus: f64,
    pub r_plus: f64,
    pub r_minus: f64,
}

pub fn zero_model_analytics(q: [f64; 3], q4: f64, i_a: f64) -> ZeroModel {
    let e = q40(q);
    let dp = (q4 - e) * (q4 - e);
    let dm = (q4 + e) * (q4 + e);
    let s = |d: f64| if i_a + d == 0.0 { 1.0 } else { i_a / (i_a + d) };
    ZeroModel { s_plus: s(dp), s_minus: s(dm), r_plus: (i_a + dp).sqrt(), r_minus: (i_a + dm).sqrt() }
}

/// `S(n_o) = S₊P₊ + S₋P₋` of the zero model.
pub fn zero_model_center(q: [f64; 3], q4: f64, i_a: f64) -> Matrix4 {
    let z = zero_model_analytics(q, q4, i_a);
    let (pp, pm) = free_projectors(q);
    pp.scale_re(z.s_plus) + pm.scale_re(z.s_minus)
}

/// Relative residual of the truncated zero-model family for a general `c₀`:
/// `√(I_A c₀†S c₀ / c₀†S² c₀)`.
pub fn zero_model_residual(q: [f64; 3], q4: f64, i_a: f64, c0: &Bispinor) -> f64 {
    // Project first so the small `S₋` branch is not swamped by rounding in `S₊P₊`.
    let z = zero_model_analytics(q, q4, i_a);
    let (pp, pm) = free_projectors(q);
    let wp = (pp * *c0).norm().powi(2);
    let wm = (pm * *c0).norm().powi(2);
    let num = z.s_plus * wp + z.s_minus * wm;
    let den = z.s_plus * z.s_plus * wp + z.s_minus * z.s_minus * wm;
    (i_a * num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;
    use crate::spinor::hermitian_eigen;
    use proptest::prelude::*;

    const Q: [f64; 3] = [0.0, 0.0, 0.02];

    #[test]
    fn q40_values() {
        assert_eq!(q40([0.0; 3]), 1.0);
        // Newton iteration in double-double as an independent root.
        let target = DoubleDouble::from(1.0) + DoubleDouble::mul_f64(0.02, 0.02);
        let mut x = DoubleDouble::from(1.0);
        for _ in 0..8 {
            x = (x + target / x) * DoubleDouble::from(0.5);
        }
        assert!((q40(Q) - x.hi()).abs() <= f64::EPSILON);
        assert!((q40_in::<DoubleDouble>(Q) - x).abs().hi() < 1e-30);
        assert!(q40(Q).to_string().starts_with("1.00019998"));
    }

    #[test]
    fn energy_form_of_dispersion() {
        // (m c² q₄₀)² = c²(m²c² + p²) with p = m c q, in units m = c = 1.
        let p = Q;
        let e = q40(Q);
        assert!((e * e - (1.0 + dot3(p, p))).abs() < 1e-15);
    }

    #[test]
    fn cancellation_free_offset() {
        let exact = -0.0004 / (1.0 + q40(Q));
        assert!((one_minus_q40_in::<f64>(Q) - exact).abs() < 1e-20);
    }

    #[test]
    fn projector_decomposition_at_rest() {
        let (pp, pm) = free_projectors([0.0; 3]);
        assert_eq!(pp, Matrix4::from_real_diag([1.0, 1.0, 0.0, 0.0]));
        assert_eq!(pm, Matrix4::from_real_diag([0.0, 0.0, 1.0, 1.0]));
        let b = free_basis([0.0; 3]);
        // At rest the basis is the unit basis up to sign.
        for k in 0..4 {
            assert!((b[k].dot(&Bispinor::unit(k)).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn basis_reconstructs_projectors() {
        let b = free_basis(Q);
        let (pp, pm) = free_projectors(Q);
        assert!((Matrix4::outer(&b[0], &b[0]) + Matrix4::outer(&b[1], &b[1]) - pp).max_abs() < 1e-15);
        assert!((Matrix4::outer(&b[2], &b[2]) + Matrix4::outer(&b[3], &b[3]) - pm).max_abs() < 1e-15);
        assert!((pp * b[0] - b[0]).norm() < 1e-15);
        for i in 0..4 {
            for j in 0..4 {
                let g = b[i].dot(&b[j]);
                assert!((g - C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).norm() < 1e-14);
            }
        }
        let s3 = dirac_matrices().sigma[2];
        assert!((b[0].form(&s3).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_model_table_values() {
        let z = zero_model_analytics(Q, q40(Q), 3e-6);
        assert!((z.r_plus / 0.00173205 - 1.0).abs() < 1e-5);
        let z = zero_model_analytics(Q, -q40(Q), 3e-6);
        assert!((z.r_plus / 2.00040 - 1.0).abs() < 1e-5);
        assert!((z.r_plus - 2.0 * (1.0 + 0.0004 + 7.5e-7f64).sqrt()).abs() < 1e-14);
        let z = zero_model_analytics(Q, q40(Q), 0.0);
        assert_eq!((z.s_plus, z.s_minus, z.r_plus), (1.0, 0.0, 0.0));
    }

    #[test]
    fn zero_model_residual_on_eigenvectors() {
        let b = free_basis(Q);
        let q4 = q40(Q) + 2e-4;
        let z = zero_model_analytics(Q, q4, 3e-6);
        assert!((zero_model_residual(Q, q4, 3e-6, &b[0]) / z.r_plus - 1.0).abs() < 1e-12);
        assert!((zero_model_residual(Q, q4, 3e-6, &b[3]) / z.r_minus - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn projector_identities(q1 in -1.0..1.0f64, q2 in -1.0..1.0f64, q3 in -1.0..1.0f64) {
            let q = [q1, q2, q3];
            let (pp, pm) = free_projectors(q);
            prop_assert!(pp.is_projector(1e-14));
            prop_assert!(pm.is_projector(1e-14));
            prop_assert!((pp * pm).max_abs() < 1e-14);
            prop_assert!((pp + pm - Matrix4::identity()).max_abs() < 1e-15);
            prop_assert!((pp.trace().re - 2.0).abs() < 1e-14);
        }

        #[test]
        fn free_hamiltonian_spectrum(q1 in -2.0..2.0f64, q2 in -2.0..2.0f64, q3 in -2.0..2.0f64) {
            let q = [q1, q2, q3];
            let (vals, _) = hermitian_eigen(&free_hamiltonian(q));
            let e = q40(q);
            for (v, want) in vals.iter().zip([-e, -e, e, e]) {
                prop_assert!((v - want).abs() < 1e-13);
            }
        }

        #[test]
        fn p0_singular_only_on_shell(q3 in -0.5..0.5f64, dq in 1e-3..0.5f64) {
            let q = [0.0, 0.0, q3];
            let e = q40(q);
            for q4 in [e, -e] {
                prop_assert!(p0_operator(&WaveFourVector::new(q, q4)).det().norm() < 1e-14);
            }
            let off = p0_operator(&WaveFourVector::new(q, e + dq)).det().norm();
            prop_assert!(off > 1e-8);
        }

        #[test]
        fn negative_frequency_symmetry(xi in -0.5..0.5f64, ia in 0.0..1e-3f64) {
            let e = q40(Q);
            let a = zero_model_analytics(Q, e + xi, ia);
            let b = zero_model_analytics(Q, -(e + xi), ia);
            prop_assert!((a.r_plus - b.r_minus).abs() < 1e-14);
            prop_assert!((a.r_minus - b.r_plus).abs() < 1e-14);
        }
    }
}
