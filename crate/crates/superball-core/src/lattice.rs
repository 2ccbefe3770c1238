//! Lattice bases, packing density, neighbor configurations, and finite
//! packing verification.
//!
//! A basis B (columns are the lattice generators) defines the lattice
//! Λ = Bℤ³. With the body rescaled to 𝒦 = ½ℬᵖ₃, Λ is a packing lattice iff
//! ‖Bu‖ₚ ≥ 1 for every nonzero integer u, and the enumeration bound below
//! reduces that to a finite check.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{conjugate_exponent, lp_norm, superball_volume, Exponent};
use crate::linalg::{self, Mat3};

/// Bases with |det| below this are rejected at construction.
pub const MIN_ABS_DET: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatticeError {
    /// |det B| < [`MIN_ABS_DET`]: the columns do not span ℝ³ numerically.
    SingularBasis { det: f64 },
    /// The Hanner shortcut requires 1 < p < 2.
    ExponentOutOfRange { p: f64 },
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::SingularBasis { det } => {
                write!(f, "determinant too small: |det| = {:e}", det.abs())
            }
            LatticeError::ExponentOutOfRange { p } => {
                write!(f, "Hanner verification requires 1 < p < 2, got p = {p}")
            }
        }
    }
}

impl core::error::Error for LatticeError {}

/// An invertible 3×3 matrix whose columns generate a lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis {
    m: Mat3,
}

impl Basis {
    pub fn new(m: Mat3) -> Result<Self, LatticeError> {
        let det = linalg::det3(&m);
        if !det.is_finite() || det.abs() < MIN_ABS_DET {
            return Err(LatticeError::SingularBasis { det });
        }
        Ok(Self { m })
    }

    #[inline]
    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn det(&self) -> f64 {
        linalg::det3(&self.m)
    }

    /// B u for an integer coefficient vector u.
    pub fn image(&self, u: [i64; 3]) -> [f64; 3] {
        let v = [u[0] as f64, u[1] as f64, u[2] as f64];
        linalg::mat_vec3(&self.m, v)
    }

    /// Inverse matrix; exists by the construction invariant.
    pub fn inverse(&self) -> Mat3 {
        linalg::inverse3(&self.m).expect("basis invariant guarantees invertibility")
    }

    /// Basis with columns j0 and j1 swapped. Same lattice, determinant of
    /// opposite sign, and the three neighbor-case vector sets are preserved
    /// as ± sets under coordinate permutations.
    pub fn swap_columns(&self, j0: usize, j1: usize) -> Self {
        let mut m = self.m;
        for row in &mut m {
            row.swap(j0, j1);
        }
        Self { m }
    }
}

/// Minkowski's three contact configurations. Any basis of a locally densest
/// lattice packing can be reduced to one of these; the listed vectors are one
/// representative per ± pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NeighborCase {
    I,
    II,
    III,
}

const CASE_I: [[i64; 3]; 6] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, -1, 0],
    [0, 1, -1],
    [1, 0, -1],
];

const CASE_II: [[i64; 3]; 6] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [0, 1, 1],
    [1, 0, 1],
];

const CASE_III: [[i64; 3]; 7] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [0, 1, 1],
    [1, 0, 1],
    [1, 1, 1],
];

impl NeighborCase {
    pub fn representatives(&self) -> &'static [[i64; 3]] {
        match self {
            NeighborCase::I => &CASE_I,
            NeighborCase::II => &CASE_II,
            NeighborCase::III => &CASE_III,
        }
    }

    pub fn index(&self) -> u8 {
        match self {
            NeighborCase::I => 1,
            NeighborCase::II => 2,
            NeighborCase::III => 3,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(NeighborCase::I),
            2 => Some(NeighborCase::II),
            3 => Some(NeighborCase::III),
            _ => None,
        }
    }
}

impl fmt::Display for NeighborCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeighborCase::I => write!(f, "I"),
            NeighborCase::II => write!(f, "II"),
            NeighborCase::III => write!(f, "III"),
        }
    }
}

/// Outcome of the finite packing check. `violators` lists one representative
/// per ± pair of integer vectors with ‖Bu‖ₚ < 1 − tol, and `vectors_checked`
/// counts the evaluated vectors (± pairs counted once). An empty enumeration
/// box leaves `min_norm` infinite and the packing property vacuously true.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingCheckReport {
    pub is_packing: bool,
    pub min_norm: f64,
    pub argmin: [i64; 3],
    pub enumeration_box: [i64; 3],
    pub vectors_checked: u64,
    pub violators: Vec<[i64; 3]>,
}

/// Packing density vol(½ℬᵖ₃) / |det B|.
///
/// The value is a *packing* density only if B actually verifies as a packing
/// lattice; this function does not check that.
pub fn density(basis: &Basis, p: Exponent) -> f64 {
    superball_volume(p, 0.5) / basis.det().abs()
}

/// Upper bound for the ℓ^q norm of a row. For very large finite q the direct
/// power sum under/overflows, so fall back to the max-abs bound inflated by
/// 3^(1/q) ≥ ‖v‖_q / ‖v‖_∞; any upper bound keeps the enumeration sound.
fn lq_row_norm_upper(v: [f64; 3], q: f64) -> f64 {
    if q.is_infinite() {
        v[0].abs().max(v[1].abs()).max(v[2].abs())
    } else if q > 50.0 {
        let maxabs = v[0].abs().max(v[1].abs()).max(v[2].abs());
        maxabs * libm::pow(3.0, 1.0 / q)
    } else if q == 2.0 {
        libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    } else {
        let s = libm::pow(v[0].abs(), q) + libm::pow(v[1].abs(), q) + libm::pow(v[2].abs(), q);
        libm::pow(s, 1.0 / q)
    }
}

/// Componentwise enumeration bound: every integer u with ‖Bu‖ₚ ≤ μ satisfies
/// |uᵢ| ≤ ⌊‖B⁻¹ᵢ‖_q · μ⌋ where B⁻¹ᵢ is the i-th row of B⁻¹ and q is the
/// conjugate exponent of p (q = ∞ uses the max-abs row norm).
pub fn enumeration_bound(basis: &Basis, p: Exponent, mu: f64) -> [i64; 3] {
    assert!(mu >= 0.0, "enumeration radius must be nonnegative");
    let q = conjugate_exponent(p);
    let inv = basis.inverse();
    let mut out = [0i64; 3];
    for i in 0..3 {
        out[i] = libm::floor(lq_row_norm_upper(inv[i], q) * mu) as i64;
    }
    out
}

/// Visits one representative of each ± pair of nonzero integer vectors in
/// the box |uᵢ| ≤ bound[i] (canonical representative: first nonzero
/// coordinate positive).
fn for_each_half_box<F: FnMut([i64; 3])>(bound: [i64; 3], mut f: F) {
    for u0 in 0..=bound[0] {
        let r1 = if u0 > 0 { -bound[1] } else { 0 };
        for u1 in r1..=bound[1] {
            let r2 = if u0 > 0 || u1 > 0 { -bound[2] } else { 1 };
            for u2 in r2..=bound[2] {
                if u0 == 0 && u1 == 0 && u2 == 0 {
                    continue;
                }
                f([u0, u1, u2]);
            }
        }
    }
}

/// Decides the packing property up to `tol` by enumerating all nonzero
/// integer vectors inside the bound for μ = 1 + tol. Requires
/// 0 ≤ tol ≤ 1e-3.
pub fn verify_packing(basis: &Basis, p: Exponent, tol: f64) -> PackingCheckReport {
    assert!((0.0..=1e-3).contains(&tol), "tol must be in [0, 1e-3]");
    let mu = 1.0 + tol;
    let bound = enumeration_bound(basis, p, mu);
    let mut min_norm = f64::INFINITY;
    let mut argmin = [0i64; 3];
    let mut checked = 0u64;
    let mut violators = Vec::new();
    for_each_half_box(bound, |u| {
        checked += 1;
        let n = lp_norm(basis.image(u), p);
        if n < min_norm {
            min_norm = n;
            argmin = u;
        }
        if n < 1.0 - tol {
            violators.push(u);
        }
    });
    PackingCheckReport {
        is_packing: min_norm >= 1.0 - tol,
        min_norm,
        argmin,
        enumeration_box: bound,
        vectors_checked: checked,
        violators,
    }
}

/// Hanner shortcut: for 1 < p < 2, if ‖Bu‖ₚ = 1 for every u in the Case III
/// set (within `tol`), then B is a packing lattice with no enumeration
/// needed. Returns whether the equalities hold.
pub fn hanner_verify(basis: &Basis, p: Exponent, tol: f64) -> Result<bool, LatticeError> {
    let pv = p.get();
    if pv <= 1.0 || pv >= 2.0 {
        return Err(LatticeError::ExponentOutOfRange { p: pv });
    }
    let mut worst = 0.0f64;
    for &u in NeighborCase::III.representatives() {
        let dev = (lp_norm(basis.image(u), p) - 1.0).abs();
        worst = worst.max(dev);
    }
    Ok(worst <= tol)
}

/// Number of lattice translates touching the central body: counts nonzero
/// integer u with ‖Bu‖ₚ ≤ 1 + tol. Always even since u and −u pair up.
/// Meaningful only on bases that verify as packing lattices.
pub fn count_neighbors(basis: &Basis, p: Exponent, tol: f64) -> u32 {
    let mu = 1.0 + tol;
    let bound = enumeration_bound(basis, p, mu);
    let mut half = 0u32;
    for_each_half_box(bound, |u| {
        if lp_norm(basis.image(u), p) <= mu {
            half += 1;
        }
    });
    2 * half
}
