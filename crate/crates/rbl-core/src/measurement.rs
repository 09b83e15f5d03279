//! Range measurement synthesis and the whitened linear models.
//!
//! Ranging noise grows with distance: a range `r` measured at reference
//! range `ζ` carries additive zero-mean Gaussian noise of standard
//! deviation `r/√ζ`. Working with *squared* ranges turns localization into
//! a linear problem at the cost of distance-dependent noise on the
//! squares; this module estimates that noise covariance from the data,
//! pre-whitens with `W = Σ̂^{-1/2}`, and projects out the nuisance
//! `‖s‖²` term with an isometry `U_M` (so the noise stays white). The
//! resulting model
//!
//! ```text
//! D̄ = Ā S + N̄,   D̄ = U_MᵀW D,   Ā = -2 U_MᵀW Aᵀ
//! ```
//!
//! feeds every estimator. Centering with a second isometry `U_N`
//! eliminates the translation and leaves the rotation-only model
//! `D̃ = Ā Q C̄ + Ñ`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::geometry::{rigid_transform, Pose};
use crate::Result;

/// Convert a reference range quoted in dB to linear scale, `ζ = 10^(dB/10)`.
pub fn zeta_from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear reference range to dB.
pub fn zeta_to_db(zeta: f64) -> f64 {
    10.0 * zeta.log10()
}

/// A complete ground-truth setup: anchors, body topology, true pose, and
/// the reference range of the ranging hardware.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Anchor positions, 3×M, meters.
    pub anchors: DMatrix<f64>,
    /// Sensor coordinates in the body reference frame, 3×N, meters.
    pub topology: DMatrix<f64>,
    /// True pose of the body.
    pub pose: Pose,
    /// Reference range, linear scale.
    pub zeta: f64,
}

impl Scenario {
    /// Validate the rank conditions for joint estimation: at least 4
    /// anchors, `(M-1)·N ≥ 12`, and a positive reference range.
    pub fn new(
        anchors: DMatrix<f64>,
        topology: DMatrix<f64>,
        pose: Pose,
        zeta: f64,
    ) -> Result<Self> {
        let m = anchors.ncols();
        let n = topology.ncols();
        if anchors.nrows() != 3 || topology.nrows() != 3 {
            return Err(Error::ShapeMismatch(format!(
                "anchors and topology must have 3 rows, got {} and {}",
                anchors.nrows(),
                topology.nrows()
            )));
        }
        if m < 4 {
            return Err(Error::InsufficientAnchors { need: 4, have: m });
        }
        if (m - 1) * n < 12 {
            return Err(Error::InsufficientSensors {
                need: 12usize.div_ceil(m - 1),
                have: n,
            });
        }
        if !(zeta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "reference range must be positive, got {zeta}"
            )));
        }
        Ok(Self {
            anchors,
            topology,
            pose,
            zeta,
        })
    }

    /// True absolute sensor positions `S = Q C + t 1ᵀ`.
    pub fn sensor_positions(&self) -> DMatrix<f64> {
        rigid_transform(&self.pose, &self.topology)
    }

    /// True anchor-to-sensor ranges, M×N.
    pub fn true_ranges(&self) -> DMatrix<f64> {
        true_ranges(&self.anchors, &self.sensor_positions())
    }
}

/// Raw and squared range measurements.
#[derive(Debug, Clone)]
pub struct RangeData {
    /// Noisy ranges `Y`, M×N, meters.
    pub ranges: DMatrix<f64>,
    /// Squared measurements `D = Y ∘ Y`, M×N, meters².
    pub squared: DMatrix<f64>,
    /// Reference range used for whitening, linear scale.
    pub zeta: f64,
}

impl RangeData {
    /// Noise-free data: `Y` equals the true ranges exactly. `zeta` is kept
    /// for the whitening model.
    pub fn exact(true_ranges: &DMatrix<f64>, zeta: f64) -> Self {
        Self {
            ranges: true_ranges.clone(),
            squared: true_ranges.component_mul(true_ranges),
            zeta,
        }
    }
}

/// Pairwise Euclidean distances between anchors (3×M) and sensors (3×N),
/// as an M×N matrix.
pub fn true_ranges(anchors: &DMatrix<f64>, positions: &DMatrix<f64>) -> DMatrix<f64> {
    let m = anchors.ncols();
    let n = positions.ncols();
    DMatrix::from_fn(m, n, |i, j| (anchors.column(i) - positions.column(j)).norm())
}

/// Draw noisy measurements `y = r + v`, `v ~ N(0, r²/ζ)` i.i.d. per entry,
/// and square them.
///
/// An infinite `zeta` is the noiseless limit: the rng is not consumed and
/// `Y` equals the true ranges exactly.
pub fn simulate_ranges<R: Rng + ?Sized>(
    true_ranges: &DMatrix<f64>,
    zeta: f64,
    rng: &mut R,
) -> RangeData {
    if zeta.is_infinite() {
        return RangeData::exact(true_ranges, zeta);
    }
    let scale = zeta.sqrt().recip();
    let ranges = true_ranges.map(|r| r + r * scale * rng.sample::<f64, _>(StandardNormal));
    RangeData {
        squared: ranges.component_mul(&ranges),
        ranges,
        zeta,
    }
}

/// Add i.i.d. `N(0, σ_e²)` perturbations to every topology entry.
pub fn perturb_topology<R: Rng + ?Sized>(
    topology: &DMatrix<f64>,
    sigma_e: f64,
    rng: &mut R,
) -> DMatrix<f64> {
    if sigma_e == 0.0 {
        return topology.clone();
    }
    topology.map(|c| c + sigma_e * rng.sample::<f64, _>(StandardNormal))
}

/// Draw `m` anchors uniformly at random inside a ball of radius
/// `radius_m` centered at the origin.
pub fn draw_anchors<R: Rng + ?Sized>(m: usize, radius_m: f64, rng: &mut R) -> DMatrix<f64> {
    let mut anchors = DMatrix::zeros(3, m);
    for mut col in anchors.column_iter_mut() {
        loop {
            let x = rng.random_range(-radius_m..=radius_m);
            let y = rng.random_range(-radius_m..=radius_m);
            let z = rng.random_range(-radius_m..=radius_m);
            if x * x + y * y + z * z <= radius_m * radius_m {
                col[0] = x;
                col[1] = y;
                col[2] = z;
                break;
            }
        }
    }
    anchors
}

/// The 10-sensor topology used by the reference experiments: sensors along
/// the edges of a rectangle-based pyramid of the given length × width ×
/// height. Columns are the four base corners, the apex, the four midpoints
/// of the lateral edges, and the midpoint of one base edge.
pub fn pyramid_topology(length: f64, width: f64, height: f64) -> DMatrix<f64> {
    let (hl, hw) = (length / 2.0, width / 2.0);
    let corners = [
        [hl, hw, 0.0],
        [hl, -hw, 0.0],
        [-hl, -hw, 0.0],
        [-hl, hw, 0.0],
    ];
    let apex = [0.0, 0.0, height];
    let mut cols: Vec<[f64; 3]> = corners.to_vec();
    cols.push(apex);
    for c in corners {
        cols.push([
            (c[0] + apex[0]) / 2.0,
            (c[1] + apex[1]) / 2.0,
            (c[2] + apex[2]) / 2.0,
        ]);
    }
    cols.push([hl, 0.0, 0.0]);
    DMatrix::from_fn(3, cols.len(), |i, j| cols[j][i])
}

/// Options for noise-covariance estimation and whitening.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitenOptions {
    /// Sensor whose column calibrates the per-anchor noise variance.
    pub reference_sensor: usize,
    /// Opt-in floor (meters²) for nonpositive reference measurements.
    /// `None` treats them as a hard error.
    pub clamp_floor: Option<f64>,
}

impl Default for WhitenOptions {
    fn default() -> Self {
        Self {
            reference_sensor: 0,
            clamp_floor: None,
        }
    }
}

impl WhitenOptions {
    /// The clamp floor enabled at its default of 1e-6 m².
    pub fn with_clamp() -> Self {
        Self {
            clamp_floor: Some(1e-6),
            ..Self::default()
        }
    }
}

/// Per-anchor noise variance estimates `σ̂²_m = d²_{m,ref}/ζ` from the
/// squared measurements of the reference sensor.
///
/// Returns the variances and the number of clamped entries (always 0
/// when no clamp floor is configured).
pub fn estimate_noise_covariance(
    squared: &DMatrix<f64>,
    zeta: f64,
    opts: &WhitenOptions,
) -> Result<(DVector<f64>, usize)> {
    let reference = opts.reference_sensor;
    if reference >= squared.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "reference sensor {reference} out of range for {} sensors",
            squared.ncols()
        )));
    }
    let mut clamped = 0usize;
    let mut variances = DVector::zeros(squared.nrows());
    for m in 0..squared.nrows() {
        let mut d = squared[(m, reference)];
        if d <= 0.0 {
            match opts.clamp_floor {
                Some(floor) => {
                    d = floor;
                    clamped += 1;
                }
                None => {
                    return Err(Error::DegenerateMeasurement {
                        anchor: m,
                        sensor: reference,
                        value: d,
                    });
                }
            }
        }
        variances[m] = d * d / zeta;
    }
    Ok((variances, clamped))
}

/// Orthonormal basis of the orthogonal complement of `w`, as the columns
/// of an M×(M−1) matrix `U` with `UᵀU = I` and `Uᵀw = 0`.
///
/// Built from the Householder reflector that maps `w` onto the first
/// coordinate axis; any orthonormal basis of the complement is equally
/// valid, and downstream estimates depend only on the projector `UUᵀ`.
pub fn isometry_nullspace_basis(w: &DVector<f64>) -> Result<DMatrix<f64>> {
    let m = w.len();
    let norm = w.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    // v = w + sign(w₀)·‖w‖·e₀ never cancels; H = I - 2vvᵀ/vᵀv sends w to a
    // multiple of e₀, so the remaining M-1 columns of H span w's
    // orthogonal complement.
    let mut v = w.clone();
    v[0] += w[0].signum() * norm;
    let vtv = v.norm_squared();
    let mut u = DMatrix::zeros(m, m - 1);
    for j in 1..m {
        for i in 0..m {
            u[(i, j - 1)] = f64::from(i == j) - 2.0 * v[i] * v[j] / vtv;
        }
    }
    Ok(u)
}

/// The pre-whitened, projected linear model `D̄ = Ā S + N̄`.
#[derive(Debug, Clone)]
pub struct WhitenedModel {
    /// `D̄ = U_MᵀW D`, (M−1)×N.
    pub dbar: DMatrix<f64>,
    /// `Ā = -2 U_MᵀW Aᵀ`, (M−1)×3.
    pub abar: DMatrix<f64>,
    /// Diagonal of the whitener `W = Σ̂^{-1/2}`.
    pub whitener: DVector<f64>,
    /// Isometry `U_M`, M×(M−1), with `U_MᵀW 1_M = 0`.
    pub um: DMatrix<f64>,
    /// Number of reference measurements clamped during covariance
    /// estimation.
    pub clamp_events: usize,
}

/// The translation-free model `D̃ = Ā Q C̄ + Ñ` for rotation-only
/// estimation.
#[derive(Debug, Clone)]
pub struct CenteredModel {
    /// `D̃ = D̄ U_N`, (M−1)×(N−1).
    pub dtil: DMatrix<f64>,
    /// `C̄ = C U_N`, 3×(N−1).
    pub cbar: DMatrix<f64>,
    /// Isometry `U_N`, N×(N−1), with `1_NᵀU_N = 0`.
    pub un: DMatrix<f64>,
}

/// Relative threshold below which the smallest singular value of `Ā`
/// counts as rank deficiency.
const RANK_TOL: f64 = 1e-10;

/// Build the whitened model from anchors and squared-range data.
///
/// `W` is the inverse square root of the estimated noise covariance,
/// `U_M` spans the complement of `W 1_M`, `u_m = ‖a_m‖²`, and
/// `D = [d_1 … d_N] - u 1ᵀ`.
pub fn build_whitened_model(
    anchors: &DMatrix<f64>,
    data: &RangeData,
    opts: &WhitenOptions,
) -> Result<WhitenedModel> {
    let m = anchors.ncols();
    if m < 4 {
        return Err(Error::InsufficientAnchors { need: 4, have: m });
    }
    if data.squared.nrows() != m {
        return Err(Error::ShapeMismatch(format!(
            "squared measurements have {} rows for {} anchors",
            data.squared.nrows(),
            m
        )));
    }
    let (variances, clamp_events) = estimate_noise_covariance(&data.squared, data.zeta, opts)?;
    let whitener = variances.map(|v| v.sqrt().recip());

    let um = isometry_nullspace_basis(&whitener)?;

    // D with the anchor-norm column offset removed, then row-scaled by W.
    let u_norms: Vec<f64> = anchors.column_iter().map(|a| a.norm_squared()).collect();
    let mut wd = data.squared.clone();
    for i in 0..m {
        for j in 0..wd.ncols() {
            wd[(i, j)] = whitener[i] * (wd[(i, j)] - u_norms[i]);
        }
    }
    let dbar = um.transpose() * wd;

    let mut wat = anchors.transpose();
    for i in 0..m {
        for j in 0..3 {
            wat[(i, j)] *= -2.0 * whitener[i];
        }
    }
    let abar = um.transpose() * wat;

    let sv = abar.clone().svd(false, false).singular_values;
    let (smin, smax) = (sv.min(), sv.max());
    if smin <= RANK_TOL * smax.max(1.0) {
        return Err(Error::RankDeficient {
            what: "whitened anchor matrix",
            sigma_min: smin,
        });
    }

    Ok(WhitenedModel {
        dbar,
        abar,
        whitener,
        um,
        clamp_events,
    })
}

/// Eliminate the translation by right-projecting with `U_N`.
pub fn center_model(model: &WhitenedModel, topology: &DMatrix<f64>) -> Result<CenteredModel> {
    let n = topology.ncols();
    if n < 2 {
        return Err(Error::InsufficientSensors { need: 2, have: n });
    }
    if model.dbar.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "whitened model has {} sensors, topology has {}",
            model.dbar.ncols(),
            n
        )));
    }
    let un = isometry_nullspace_basis(&DVector::from_element(n, 1.0))?;
    Ok(CenteredModel {
        dtil: &model.dbar * &un,
        cbar: topology * &un,
        un,
    })
}
