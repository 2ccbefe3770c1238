//! Random-restart Newton search for critical points of the determinant
//! minimization problem
//!
//! ```text
//! minimize det B   subject to   det B > 0,  ‖Bu‖ₚ = 1 for all u ∈ 𝒰ⁱ
//! ```
//!
//! under each of the three neighbor cases. The first-order conditions are
//! turned into a square root-finding problem in (B, λ): the gradient of
//! det B (the cofactor matrix) must be a multiplier combination of the
//! constraint gradients, and the constraints must hold. Constraints use the
//! p-th power form ‖Bu‖ₚᵖ − 1, which keeps derivatives polynomial-like in
//! the |(Bu)ᵢ|.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{lp_norm_pow, Exponent};
use crate::lattice::{self, Basis, NeighborCase, PackingCheckReport};
use crate::linalg::{self, Mat3};

/// |(Bu)ᵢ| below this with p < 2 marks a kink: the gradient is fine but the
/// curvature term blows up and Newton may stall.
pub const KINK_EPS: f64 = 1e-12;

/// Restart search configuration. `seed` plus the restart index determine the
/// random stream of each restart, so runs are reproducible and independent
/// of scheduling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub restarts: usize,
    pub seed: u64,
    pub newton_tol: f64,
    pub max_iterations: usize,
    pub min_abs_det: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 500,
            seed: 1,
            newton_tol: 1e-11,
            max_iterations: 200,
            min_abs_det: 1e-8,
        }
    }
}

/// A converged stationary point of the Lagrange system.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub basis: Basis,
    pub case: NeighborCase,
    pub multipliers: Vec<f64>,
    /// Sup-norm of the stationarity system at the returned point.
    pub residual: f64,
    pub density: f64,
    /// True only after the finite packing check passed.
    pub verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveError {
    /// |det start| below `min_abs_det`.
    DegenerateStart {
        det: f64,
    },
    MaxIterations,
    SingularJacobian,
    /// The iterate left the region |det B| ≥ `min_abs_det`.
    LeftRegion,
    /// Newton stalled with some |(Bu)ᵢ| < [`KINK_EPS`] and p < 2.
    Kink,
    /// Converged, but to a critical point with det B < 0.
    NegativeDeterminant,
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::DegenerateStart { det } => {
                write!(f, "starting determinant {det:e} too close to zero")
            }
            SolveError::MaxIterations => write!(f, "Newton iteration limit exceeded"),
            SolveError::SingularJacobian => write!(f, "stationarity Jacobian is singular"),
            SolveError::LeftRegion => write!(f, "iterate left the invertible region"),
            SolveError::Kink => write!(f, "Newton stalled at a norm kink"),
            SolveError::NegativeDeterminant => {
                write!(f, "converged to a critical point with det B < 0")
            }
        }
    }
}

impl core::error::Error for SolveError {}

/// sign(t)|t|^(p−1) with sign(0) = 0.
fn phi(t: f64, pm: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if t > 0.0 {
        libm::pow(t, pm)
    } else {
        -libm::pow(-t, pm)
    }
}

/// Gradient of ‖Bu‖ₚᵖ with respect to B: entry (i, k) is
/// p·sign((Bu)ᵢ)|(Bu)ᵢ|^(p−1)·u_k.
fn constraint_gradient(basis: &Basis, u: [i64; 3], p: f64) -> Mat3 {
    let w = basis.image(u);
    let pm = p - 1.0;
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        let s = p * phi(w[i], pm);
        for k in 0..3 {
            g[i][k] = s * u[k] as f64;
        }
    }
    g
}

/// ‖Bu‖ₚᵖ − 1 for each representative of the case.
pub fn constraint_residuals(basis: &Basis, case: NeighborCase, p: Exponent) -> Vec<f64> {
    case.representatives()
        .iter()
        .map(|&u| lp_norm_pow(basis.image(u), p) - 1.0)
        .collect()
}

/// True when some constraint image has a coordinate inside the kink zone
/// while p < 2.
pub fn kink_condition(basis: &Basis, case: NeighborCase, p: Exponent) -> bool {
    if p.get() >= 2.0 {
        return false;
    }
    case.representatives().iter().any(|&u| {
        let w = basis.image(u);
        w.iter().any(|t| t.abs() < KINK_EPS)
    })
}

/// The square stationarity system in (B, λ): first the 9 entries of
/// cofactor(B) − Σⱼ λⱼ ∇‖Buⱼ‖ₚᵖ, then the constraint residuals. A critical
/// point of the minimization problem zeroes this vector.
pub fn stationarity_system(
    basis: &Basis,
    multipliers: &[f64],
    case: NeighborCase,
    p: Exponent,
) -> Vec<f64> {
    let reps = case.representatives();
    assert_eq!(
        multipliers.len(),
        reps.len(),
        "one multiplier per constraint"
    );
    let mut out = Vec::with_capacity(9 + reps.len());
    let mut grad = linalg::cofactor3(basis.matrix());
    for (j, &u) in reps.iter().enumerate() {
        let g = constraint_gradient(basis, u, p.get());
        for i in 0..3 {
            for k in 0..3 {
                grad[i][k] -= multipliers[j] * g[i][k];
            }
        }
    }
    for row in &grad {
        out.extend_from_slice(row);
    }
    out.extend(constraint_residuals(basis, case, p));
    out
}

/// Analytic Jacobian of [`stationarity_system`] with respect to the 9 basis
/// entries followed by the multipliers (row-major, n = 9 + #constraints).
pub fn stationarity_jacobian(
    basis: &Basis,
    multipliers: &[f64],
    case: NeighborCase,
    p: Exponent,
) -> Vec<f64> {
    let reps = case.representatives();
    let m = reps.len();
    let n = 9 + m;
    let pv = p.get();
    let pm = pv - 1.0;
    let mut jac = vec![0.0; n * n];
    let b = basis.matrix();

    // d(cofactor)/dB block
    for i in 0..3 {
        for k in 0..3 {
            let row = 3 * i + k;
            for l in 0..3 {
                for c in 0..3 {
                    jac[row * n + 3 * l + c] = linalg::dcofactor3(b, i, k, l, c);
                }
            }
        }
    }

    for (j, &u) in reps.iter().enumerate() {
        let w = basis.image(u);
        let g = constraint_gradient(basis, u, pv);
        for i in 0..3 {
            // curvature of the constraint: p(p−1)|wᵢ|^(p−2); zero at p = 1,
            // cut off inside the kink zone where it is singular
            let curv = if pm == 0.0 || w[i].abs() < KINK_EPS {
                0.0
            } else {
                pv * pm * libm::pow(w[i].abs(), pm - 1.0)
            };
            for k in 0..3 {
                let row = 3 * i + k;
                // ∂/∂λⱼ
                jac[row * n + 9 + j] = -g[i][k];
                // ∂/∂B[i][c] of the multiplier term (only the same row i)
                for c in 0..3 {
                    jac[row * n + 3 * i + c] -=
                        multipliers[j] * curv * (u[k] as f64) * (u[c] as f64);
                }
            }
        }
        // constraint rows
        let row = 9 + j;
        for l in 0..3 {
            for c in 0..3 {
                jac[row * n + 3 * l + c] = g[l][c];
            }
        }
    }
    jac
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Least-squares multipliers for the stationarity block at fixed B; the
/// natural warm start for Newton.
fn initial_multipliers(basis: &Basis, case: NeighborCase, p: Exponent) -> Vec<f64> {
    let reps = case.representatives();
    let m = reps.len();
    let mut a = vec![0.0; 9 * m];
    for (j, &u) in reps.iter().enumerate() {
        let g = constraint_gradient(basis, u, p.get());
        for i in 0..3 {
            for k in 0..3 {
                a[(3 * i + k) * m + j] = g[i][k];
            }
        }
    }
    let cof = linalg::cofactor3(basis.matrix());
    let mut rhs = [0.0; 9];
    for i in 0..3 {
        for k in 0..3 {
            rhs[3 * i + k] = cof[i][k];
        }
    }
    linalg::lstsq(&a, &rhs, 9, m).unwrap_or_else(|| vec![0.0; m])
}

fn basis_from_flat(v: &[f64]) -> Option<Basis> {
    let m = [[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]];
    Basis::new(m).ok()
}

/// Damped Newton iteration on the stationarity system. Success requires the
/// residual sup-norm at or below `cfg.newton_tol` and det B > 0; the result
/// is then run through the finite packing check to set `verified`.
pub fn newton_solve(
    start: &Basis,
    case: NeighborCase,
    p: Exponent,
    cfg: &SearchConfig,
) -> Result<CriticalPoint, SolveError> {
    let det0 = start.det();
    if det0.abs() < cfg.min_abs_det {
        return Err(SolveError::DegenerateStart { det: det0 });
    }
    let m = case.representatives().len();
    let n = 9 + m;

    let mut flat = Vec::with_capacity(n);
    for row in start.matrix() {
        flat.extend_from_slice(row);
    }
    flat.extend(initial_multipliers(start, case, p));

    let mut basis = *start;
    let mut resid = stationarity_system(&basis, &flat[9..], case, p);
    let mut rnorm = sup_norm(&resid);

    for _ in 0..cfg.max_iterations {
        if rnorm <= cfg.newton_tol {
            return finish(basis, flat[9..].to_vec(), rnorm, case, p);
        }
        let mut jac = stationarity_jacobian(&basis, &flat[9..], case, p);
        let mut step: Vec<f64> = resid.iter().map(|r| -r).collect();
        linalg::solve_dense(&mut jac, &mut step, n).map_err(|_| {
            if kink_condition(&basis, case, p) {
                SolveError::Kink
            } else {
                SolveError::SingularJacobian
            }
        })?;

        // Armijo backtracking on the residual sup-norm
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand: Vec<f64> = flat.iter().zip(&step).map(|(x, d)| x + t * d).collect();
            if let Some(b) = basis_from_flat(&cand) {
                if b.det().abs() >= cfg.min_abs_det {
                    let r = stationarity_system(&b, &cand[9..], case, p);
                    let rn = sup_norm(&r);
                    if rn.is_finite() && rn < rnorm * (1.0 - 1e-4 * t) {
                        flat = cand;
                        basis = b;
                        resid = r;
                        rnorm = rn;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // distinguish why the full step was unusable
            let full: Vec<f64> = flat.iter().zip(&step).map(|(x, d)| x + d).collect();
            if basis_from_flat(&full)
                .map(|b| b.det().abs() < cfg.min_abs_det)
                .unwrap_or(true)
            {
                return Err(SolveError::LeftRegion);
            }
            if kink_condition(&basis, case, p) {
                return Err(SolveError::Kink);
            }
            return Err(SolveError::MaxIterations);
        }
    }
    if rnorm <= cfg.newton_tol {
        return finish(basis, flat[9..].to_vec(), rnorm, case, p);
    }
    Err(SolveError::MaxIterations)
}

fn finish(
    basis: Basis,
    multipliers: Vec<f64>,
    residual: f64,
    case: NeighborCase,
    p: Exponent,
) -> Result<CriticalPoint, SolveError> {
    if basis.det() <= 0.0 {
        return Err(SolveError::NegativeDeterminant);
    }
    let verified = verify_bounded(&basis, p)
        .map(|r| r.is_packing)
        .unwrap_or(false);
    Ok(CriticalPoint {
        density: lattice::density(&basis, p),
        basis,
        case,
        multipliers,
        residual,
        verified,
    })
}

/// Packing check guarded against pathologically large enumeration boxes
/// (possible for barely invertible critical points); those are reported as
/// unverified rather than enumerated.
fn verify_bounded(basis: &Basis, p: Exponent) -> Option<PackingCheckReport> {
    let bound = lattice::enumeration_bound(basis, p, 1.0 + 1e-9);
    let cells: f64 = bound.iter().map(|b| 2.0 * (*b as f64) + 1.0).product();
    if cells > 2e7 {
        return None;
    }
    Some(lattice::verify_packing(basis, p, 1e-9))
}

/// Standard normal via Box-Muller on the ChaCha stream.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // u1 in (0, 1], u2 in [0, 1)
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

/// Runs the restart with the given index: draws a starting matrix with
/// i.i.d. N(0, 1) entries from the stream derived from (seed, index) and
/// solves. Starts with negative determinant get two columns swapped first
/// (same lattice class, det > 0, case structure preserved).
pub fn search_restart(
    case: NeighborCase,
    p: Exponent,
    cfg: &SearchConfig,
    index: u64,
) -> Result<CriticalPoint, SolveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let mut m = [[0.0; 3]; 3];
    for row in &mut m {
        for v in row.iter_mut() {
            *v = normal(&mut rng);
        }
    }
    let basis = Basis::new(m).map_err(|_| SolveError::DegenerateStart {
        det: linalg::det3(&m),
    })?;
    let start = if basis.det() < 0.0 {
        basis.swap_columns(0, 1)
    } else {
        basis
    };
    newton_solve(&start, case, p, cfg)
}

/// Filters converged results down to verified packing lattices, deduplicates
/// by density (within 1e-7), and sorts by density descending. Ties break on
/// the matrix entries so the order is total and deterministic.
pub fn collect_results(found: Vec<CriticalPoint>) -> Vec<CriticalPoint> {
    let mut out: Vec<CriticalPoint> = found.into_iter().filter(|c| c.verified).collect();
    out.sort_by(|a, b| {
        b.density.partial_cmp(&a.density).unwrap().then_with(|| {
            let ma = a.basis.matrix();
            let mb = b.basis.matrix();
            for i in 0..3 {
                for j in 0..3 {
                    match ma[i][j].partial_cmp(&mb[i][j]).unwrap() {
                        core::cmp::Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
            }
            core::cmp::Ordering::Equal
        })
    });
    out.dedup_by(|next, kept| (kept.density - next.density).abs() <= 1e-7);
    out
}

/// The full restart search: deterministic given `cfg.seed`, results sorted
/// by density descending. An empty result list is a valid outcome.
pub fn random_search(case: NeighborCase, p: Exponent, cfg: &SearchConfig) -> Vec<CriticalPoint> {
    let mut found = Vec::new();
    for index in 0..cfg.restarts as u64 {
        if let Ok(cp) = search_restart(case, p, cfg, index) {
            found.push(cp);
        }
    }
    collect_results(found)
}
