//! Fisher information and the unitarily constrained Cramér-Rao bound.
//!
//! The whitened measurements are linear in the extended pose vector
//! `q_e = [vec(Q)ᵀ, tᵀ]ᵀ ∈ ℝ¹²` with identity noise covariance, so the
//! Fisher information is `F = JᵀJ` with `J = [Cᵀ⊗Ā | 1_N⊗Ā]`. The plain
//! bound `F⁻¹` ignores the unitarity of `Q`; restricting to the
//! constraint manifold through an orthonormal basis `U` of the
//! null-space of the constraint gradients gives the constrained bound
//!
//! ```text
//! C(q_e) = U (UᵀF U)⁻¹ Uᵀ
//! ```
//!
//! with 6 non-redundant constraints (the distinct entries of
//! `QᵀQ - I = 0`), so `U` is 12×6. Root bounds for direct overlay on
//! RMSE curves are square roots of the rotation- and translation-block
//! traces. Both bounds are evaluated at the true pose: this is a bound
//! computation, not an estimation step.

use nalgebra::{DMatrix, Matrix3};

use crate::error::Error;
use crate::geometry::RotationMatrix;
use crate::Result;

/// Fisher information for the extended pose vector, 12×12.
#[derive(Debug, Clone)]
pub struct FisherInfo {
    pub matrix: DMatrix<f64>,
}

/// A Cramér-Rao bound on the extended pose vector.
#[derive(Debug, Clone)]
pub struct CrbResult {
    /// 12×12 covariance lower bound.
    pub c_q: DMatrix<f64>,
    /// Root bound on the rotation block: `√tr(C[0..9, 0..9])`.
    pub rcrb_q: f64,
    /// Root bound on the translation block: `√tr(C[9..12, 9..12])`.
    pub rcrb_t: f64,
}

impl CrbResult {
    fn from_cov(c_q: DMatrix<f64>) -> Self {
        let rot_trace: f64 = (0..9).map(|i| c_q[(i, i)]).sum();
        let t_trace: f64 = (9..12).map(|i| c_q[(i, i)]).sum();
        Self {
            c_q,
            rcrb_q: rot_trace.sqrt(),
            rcrb_t: t_trace.sqrt(),
        }
    }
}

/// Fisher information `F = JᵀJ` with `J = [Cᵀ⊗Ā | 1_N⊗Ā]`.
///
/// Equivalently, in block form, `F₁₁ = CCᵀ⊗ĀᵀĀ`,
/// `F₁₂ = (C 1_N)⊗(ĀᵀĀ)`, `F₂₂ = N·ĀᵀĀ`.
pub fn fim(abar: &DMatrix<f64>, topology: &DMatrix<f64>) -> FisherInfo {
    FisherInfo {
        matrix: assemble_jacobian(abar, topology).tr_mul(&assemble_jacobian(abar, topology)),
    }
}

/// The (M−1)N × 12 measurement Jacobian `[Cᵀ⊗Ā | 1_N⊗Ā]`.
pub fn assemble_jacobian(abar: &DMatrix<f64>, topology: &DMatrix<f64>) -> DMatrix<f64> {
    let n = topology.ncols();
    let rows = abar.nrows() * n;
    let mut jac = DMatrix::zeros(rows, 12);
    let jq = topology.transpose().kronecker(abar);
    jac.view_mut((0, 0), (rows, 9)).copy_from(&jq);
    let ones = DMatrix::from_element(n, 1, 1.0);
    let jt = ones.kronecker(abar);
    jac.view_mut((0, 9), (rows, 3)).copy_from(&jt);
    jac
}

/// Orthonormal basis of the null-space of the gradient of the six
/// non-redundant unitarity constraints, 12×6.
///
/// With `Q = [q₁ q₂ q₃]`, the rotation columns are
/// `(1/√2)[-q₃; 0; q₁]`, `(1/√2)[0; -q₃; q₂]`, `(1/√2)[q₂; -q₁; 0]`
/// (stacked per rotation column), and the last three columns span the
/// unconstrained translation block.
pub fn constraint_nullspace(q: &RotationMatrix) -> DMatrix<f64> {
    let m = q.matrix();
    let q1 = m.column(0);
    let q2 = m.column(1);
    let q3 = m.column(2);
    let s = std::f64::consts::FRAC_1_SQRT_2;

    let mut u = DMatrix::zeros(12, 6);
    for i in 0..3 {
        // Column 0: [-q3; 0; q1].
        u[(i, 0)] = -s * q3[i];
        u[(6 + i, 0)] = s * q1[i];
        // Column 1: [0; -q3; q2].
        u[(3 + i, 1)] = -s * q3[i];
        u[(6 + i, 1)] = s * q2[i];
        // Column 2: [q2; -q1; 0].
        u[(i, 2)] = s * q2[i];
        u[(3 + i, 2)] = -s * q1[i];
        // Translation block.
        u[(9 + i, 3 + i)] = 1.0;
    }
    u
}

/// Gradient matrix of the six non-redundant constraints, 6×12. Exposed
/// for verifying `G·U = 0`.
pub fn constraint_gradient(q: &RotationMatrix) -> DMatrix<f64> {
    let m = q.matrix();
    let q1 = m.column(0);
    let q2 = m.column(1);
    let q3 = m.column(2);
    let mut g = DMatrix::zeros(6, 12);
    // Rows: q₁ᵀq₁-1, q₂ᵀq₁, q₃ᵀq₁, q₂ᵀq₂-1, q₃ᵀq₂, q₃ᵀq₃-1.
    let assign = |g: &mut DMatrix<f64>, row: usize, block: usize, v: &[f64; 3], scale: f64| {
        for i in 0..3 {
            g[(row, 3 * block + i)] += scale * v[i];
        }
    };
    let (v1, v2, v3) = (
        [q1[0], q1[1], q1[2]],
        [q2[0], q2[1], q2[2]],
        [q3[0], q3[1], q3[2]],
    );
    assign(&mut g, 0, 0, &v1, 2.0);
    assign(&mut g, 1, 0, &v2, 1.0);
    assign(&mut g, 1, 1, &v1, 1.0);
    assign(&mut g, 2, 0, &v3, 1.0);
    assign(&mut g, 2, 2, &v1, 1.0);
    assign(&mut g, 3, 1, &v2, 2.0);
    assign(&mut g, 4, 1, &v3, 1.0);
    assign(&mut g, 4, 2, &v2, 1.0);
    assign(&mut g, 5, 2, &v3, 2.0);
    g
}

/// Unitarily constrained Cramér-Rao bound `U (UᵀF U)⁻¹ Uᵀ`, evaluated at
/// the true rotation.
pub fn uc_crb(fim: &FisherInfo, q: &RotationMatrix) -> Result<CrbResult> {
    let u = constraint_nullspace(q);
    let reduced = u.tr_mul(&fim.matrix) * &u;
    let inv = reduced
        .try_inverse()
        .ok_or(Error::UnidentifiableConfiguration)?;
    Ok(CrbResult::from_cov(&u * inv * u.transpose()))
}

/// Unconstrained bound `F⁻¹` on the full 12-dimensional pose vector.
pub fn unconstrained_crb(fim: &FisherInfo) -> Result<CrbResult> {
    let inv = fim
        .matrix
        .clone()
        .try_inverse()
        .ok_or(Error::UnidentifiableConfiguration)?;
    Ok(CrbResult::from_cov(inv))
}

/// Transform a pose bound to a bound on the stacked sensor positions
/// `vec(S) = (C_eᵀ⊗I₃) q_e`: returns `(C_eᵀ⊗I₃) C (C_e⊗I₃)`, 3N×3N.
pub fn crb_positions(crb: &CrbResult, topology: &DMatrix<f64>) -> DMatrix<f64> {
    let n = topology.ncols();
    let mut c_e = DMatrix::zeros(4, n);
    c_e.view_mut((0, 0), (3, n)).copy_from(topology);
    c_e.view_mut((3, 0), (1, n)).fill(1.0);
    let transform = c_e.transpose().kronecker(&Matrix3::identity());
    &transform * &crb.c_q * transform.transpose()
}

/// Root bound on the stacked sensor positions, `√tr`, for overlay on
/// position RMSE curves.
pub fn rcrb_positions(crb: &CrbResult, topology: &DMatrix<f64>) -> f64 {
    crb_positions(crb, topology).trace().sqrt()
}

/// Constrained and unconstrained bounds for a whitened model, evaluated
/// at the true pose and topology.
///
/// The calibration whitener normalizes squared measurements by
/// `σ̂ = d²_{m,1}/√ζ`, but squaring `y = r + v` gives the squared-range
/// noise a standard deviation of `2rσ_v ≈ 2r²/√ζ` — twice the
/// calibration. The estimators are invariant to that common scale; the
/// information matrix is not. Attainable bounds therefore come from the
/// physically whitened design `Ā/2`.
pub fn model_bounds(
    model: &crate::measurement::WhitenedModel,
    topology: &DMatrix<f64>,
    rotation: &RotationMatrix,
) -> Result<(CrbResult, CrbResult)> {
    let design = &model.abar * 0.5;
    let info = fim(&design, topology);
    let constrained = uc_crb(&info, rotation)?;
    let unconstrained = unconstrained_crb(&info)?;
    Ok((constrained, unconstrained))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{euler_to_rotation, rotation_exp, EulerOrder, Pose};
    use crate::measurement::{
        build_whitened_model, draw_anchors, pyramid_topology, zeta_from_db, RangeData, Scenario,
    };
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn paper_setup(zeta_db: f64, seed: u64) -> (Scenario, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let anchors = draw_anchors(4, 500.0, &mut rng);
        let pose = Pose::new(
            euler_to_rotation([20.0, -25.0, 10.0], EulerOrder::Xyz),
            Vector3::new(100.0, 100.0, 55.0),
        );
        let scenario = Scenario::new(
            anchors,
            pyramid_topology(5.0, 5.0, 5.0),
            pose,
            zeta_from_db(zeta_db),
        )
        .unwrap();
        let data = RangeData::exact(&scenario.true_ranges(), scenario.zeta);
        let abar = build_whitened_model(&scenario.anchors, &data, &Default::default())
            .unwrap()
            .abar;
        (scenario, abar)
    }

    #[test]
    fn fim_matches_block_formula() {
        let (scenario, abar) = paper_setup(80.0, 1);
        let c = &scenario.topology;
        let f = fim(&abar, c);

        let ata = abar.tr_mul(&abar);
        let cct = c * c.transpose();
        let f11 = cct.kronecker(&ata);
        let c1 = c * DMatrix::from_element(c.ncols(), 1, 1.0);
        let f12 = c1.kronecker(&ata);
        let f22 = &ata * c.ncols() as f64;

        let mut block = DMatrix::zeros(12, 12);
        block.view_mut((0, 0), (9, 9)).copy_from(&f11);
        block.view_mut((0, 9), (9, 3)).copy_from(&f12);
        block.view_mut((9, 0), (3, 9)).copy_from(&f12.transpose());
        block.view_mut((9, 9), (3, 3)).copy_from(&f22);

        assert!((&f.matrix - &block).norm() < 1e-10 * block.norm());

        // Symmetric and positive semidefinite.
        assert!((&f.matrix - f.matrix.transpose()).norm() < 1e-12 * f.matrix.norm());
        let eig = nalgebra::SymmetricEigen::new(f.matrix.clone());
        assert!(eig.eigenvalues.min() > -1e-9 * eig.eigenvalues.max());
    }

    #[test]
    fn fim_coupling_vanishes_for_centered_topology() {
        let (scenario, abar) = paper_setup(80.0, 3);
        let mean = scenario.topology.column_mean();
        let centered =
            DMatrix::from_fn(3, scenario.topology.ncols(), |i, j| {
                scenario.topology[(i, j)] - mean[i]
            });
        let f = fim(&abar, &centered);
        // C·1_N = 0 kills the rotation/translation coupling blocks.
        assert!(f.matrix.view((0, 9), (9, 3)).norm() < 1e-9);
    }

    #[test]
    fn fim_quadratic_in_design_scale() {
        let (scenario, abar) = paper_setup(80.0, 5);
        let f1 = fim(&abar, &scenario.topology);
        let f2 = fim(&(&abar * 3.0), &scenario.topology);
        assert!((&f2.matrix - &f1.matrix * 9.0).norm() < 1e-9 * f2.matrix.norm());
    }

    #[test]
    fn nullspace_closed_form_at_identity() {
        let u = constraint_nullspace(&RotationMatrix::identity());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // Column 0 is (1/√2)[-e₃; 0; e₁; 0].
        assert_eq!(u[(2, 0)], -s);
        assert_eq!(u[(6, 0)], s);
        // Translation block is the identity.
        for i in 0..3 {
            assert_eq!(u[(9 + i, 3 + i)], 1.0);
        }
        assert!((u.tr_mul(&u) - DMatrix::identity(6, 6)).norm() < 1e-12);
    }

    #[test]
    fn nullspace_annihilates_constraint_gradient() {
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = rotation_exp(&Vector3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            ));
            let u = constraint_nullspace(&q);
            let g = constraint_gradient(&q);
            assert!((&g * &u).norm() < 1e-12);
            assert!((u.tr_mul(&u) - DMatrix::identity(6, 6)).norm() < 1e-12);
            // Each column is orthogonal to all six gradients.
            for col in 0..6 {
                for row in 0..6 {
                    assert!(g.row(row).transpose().dot(&u.column(col)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn constrained_bound_never_exceeds_unconstrained() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let m = DMatrix::from_fn(12, 12, |_, _| rng.random_range(-1.0..1.0));
            let f = FisherInfo {
                matrix: m.tr_mul(&m) + DMatrix::identity(12, 12) * 0.1,
            };
            let q = rotation_exp(&Vector3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            ));
            let constrained = uc_crb(&f, &q).unwrap();
            let unconstrained = unconstrained_crb(&f).unwrap();
            assert!(constrained.c_q.trace() <= unconstrained.c_q.trace() + 1e-9);
        }
    }

    #[test]
    fn constrained_bound_has_rank_six() {
        let (scenario, abar) = paper_setup(80.0, 7);
        let f = fim(&abar, &scenario.topology);
        let crb = uc_crb(&f, &scenario.pose.rotation).unwrap();
        let sv = crb.c_q.clone().svd(false, false).singular_values;
        let rank = sv.iter().filter(|&&s| s > 1e-10 * sv.max()).count();
        assert_eq!(rank, 6);
        assert!(crb.rcrb_q.is_finite() && crb.rcrb_q > 0.0);
        assert!(crb.rcrb_t.is_finite() && crb.rcrb_t > 0.0);
    }

    #[test]
    fn bound_scales_with_reference_range() {
        // Exact data at ζ and 100ζ: Ā scales by 10, the root bound by 1/10
        // (10 dB per decade on the variance).
        let (scenario, abar) = paper_setup(60.0, 9);
        let f1 = fim(&abar, &scenario.topology);
        let b1 = uc_crb(&f1, &scenario.pose.rotation).unwrap();

        let data = RangeData::exact(&scenario.true_ranges(), scenario.zeta * 100.0);
        let abar2 = build_whitened_model(&scenario.anchors, &data, &Default::default())
            .unwrap()
            .abar;
        let f2 = fim(&abar2, &scenario.topology);
        let b2 = uc_crb(&f2, &scenario.pose.rotation).unwrap();

        assert!((b2.rcrb_q / b1.rcrb_q - 0.1).abs() < 1e-9);
        assert!((b2.rcrb_t / b1.rcrb_t - 0.1).abs() < 1e-9);

        let u1 = unconstrained_crb(&f1).unwrap();
        let u2 = unconstrained_crb(&f2).unwrap();
        assert!((u2.rcrb_q / u1.rcrb_q - 0.1).abs() < 1e-9);
    }

    #[test]
    fn bound_invariant_to_nullspace_basis_rotation() {
        let (scenario, abar) = paper_setup(80.0, 11);
        let f = fim(&abar, &scenario.topology);
        let q = &scenario.pose.rotation;
        let u = constraint_nullspace(q);

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let m = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
        let r = m.qr().q();
        let u2 = &u * &r;

        let reduced = u.tr_mul(&f.matrix) * &u;
        let c1 = &u * reduced.try_inverse().unwrap() * u.transpose();
        let reduced2 = u2.tr_mul(&f.matrix) * &u2;
        let c2 = &u2 * reduced2.try_inverse().unwrap() * u2.transpose();
        assert!((&c1 - &c2).norm() < 1e-10 * c1.norm());
    }

    #[test]
    fn position_bound_structure() {
        let (scenario, abar) = paper_setup(80.0, 13);
        let f = fim(&abar, &scenario.topology);
        let crb = uc_crb(&f, &scenario.pose.rotation).unwrap();

        // Zero topology: every sensor block reduces to the translation
        // bound.
        let zero_c = DMatrix::zeros(3, 4);
        let pos = crb_positions(&crb, &zero_c);
        let t_block = crb.c_q.view((9, 9), (3, 3)).clone_owned();
        for s in 0..4 {
            let block = pos.view((3 * s, 3 * s), (3, 3)).clone_owned();
            assert!((block - &t_block).norm() < 1e-12);
        }

        // Symmetric PSD on the real topology.
        let pos = crb_positions(&crb, &scenario.topology);
        assert_eq!(pos.shape(), (30, 30));
        assert!((&pos - pos.transpose()).norm() < 1e-10 * pos.norm());
        let eig = nalgebra::SymmetricEigen::new(pos.clone());
        assert!(eig.eigenvalues.min() > -1e-9 * eig.eigenvalues.max());

        // Monotone in ζ.
        let data = RangeData::exact(&scenario.true_ranges(), scenario.zeta * 10.0);
        let abar2 = build_whitened_model(&scenario.anchors, &data, &Default::default())
            .unwrap()
            .abar;
        let crb2 = uc_crb(&fim(&abar2, &scenario.topology), &scenario.pose.rotation).unwrap();
        assert!(
            crb_positions(&crb2, &scenario.topology).trace()
                < crb_positions(&crb, &scenario.topology).trace()
        );
    }
}
