//! The one-parameter family of circulant packing lattices.
//!
//! For x, y, z ≥ 0 the matrix
//!
//! ```text
//!            ( -x   y   z )
//! L(x,y,z) = (  z  -x   y )
//!            (  y   z  -x )
//! ```
//!
//! satisfies the Case III contact equalities exactly when (x, y, z) solves
//!
//! ```text
//! f_p(x,y,z) = ( xᵖ + yᵖ + zᵖ − 1,
//!                (x−y)ᵖ + (z−x)ᵖ + (y+z)ᵖ − 1,
//!                3(−x+y+z)ᵖ − 1 ) = 0
//! ```
//!
//! inside the region z ≥ x ≥ y ≥ 0. The family starts at p = 1 with
//! (1/3, 1/6, 1/2) and ends at p = log₂ 3 with (1/2, 1/2, 1/2), the body
//! centered cubic lattice, where the Jacobian degenerates.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{superball_volume, Exponent, LOG2_3};
use crate::lattice::{count_neighbors, Basis};
use crate::linalg;
use crate::scalar::Scalar;

/// Convergence target for the damped Newton solve.
pub const NEWTON_TOL: f64 = 1e-11;

/// The solved family endpoint at p = log₂ 3 (body centered cubic), where the
/// solver itself degenerates and the value is known analytically.
pub const ENDPOINT: (f64, f64, f64) = (0.5, 0.5, 0.5);

/// Default starting guess for the p = 1 solve.
pub const DEFAULT_START: (f64, f64, f64) = (0.3, 0.2, 0.5);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyError {
    /// A power argument would be negative: the point left z ≥ x ≥ y ≥ 0
    /// (or −x + y + z < 0).
    OutOfRegion {
        x: f64,
        y: f64,
        z: f64,
    },
    SingularJacobian,
    MaxIterations,
    /// Invariants of the converged point failed (should not happen).
    InvalidPoint,
}

impl fmt::Display for FamilyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyError::OutOfRegion { x, y, z } => {
                write!(f, "point ({x}, {y}, {z}) violates z >= x >= y >= 0")
            }
            FamilyError::SingularJacobian => write!(f, "family Jacobian is numerically singular"),
            FamilyError::MaxIterations => write!(f, "family Newton did not converge"),
            FamilyError::InvalidPoint => write!(f, "converged point violates family invariants"),
        }
    }
}

impl core::error::Error for FamilyError {}

/// A solved point of the family system at some p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyPoint {
    pub p: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Sup-norm of the family system at (x, y, z).
    pub residual: f64,
}

impl FamilyPoint {
    /// Validates the region invariants z ≥ x ≥ y ≥ 0 and −x + y + z ≥ 0.
    pub fn new(p: Exponent, x: f64, y: f64, z: f64, residual: f64) -> Result<Self, FamilyError> {
        if y < 0.0 || x < y || z < x || -x + y + z < 0.0 {
            return Err(FamilyError::OutOfRegion { x, y, z });
        }
        Ok(Self {
            p: p.get(),
            x,
            y,
            z,
            residual,
        })
    }
}

/// The circulant basis L(x, y, z).
pub fn family_matrix(pt: &FamilyPoint) -> Basis {
    let (x, y, z) = (pt.x, pt.y, pt.z);
    Basis::new([[-x, y, z], [z, -x, y], [y, z, -x]]).expect("family matrix is invertible")
}

fn region_ok(x: f64, y: f64, z: f64) -> bool {
    y >= 0.0 && x - y >= 0.0 && z - x >= 0.0 && -x + y + z >= 0.0
}

/// The family system over any scalar (plain f64 or intervals). All power
/// arguments must be nonnegative; `t^(p−1)` at t = 0, p = 1 follows the
/// `0^0 = 1` convention of [`Scalar::powr`].
pub fn system_in<T: Scalar>(p: T, x: T, y: T, z: T) -> [T; 3] {
    let one = T::of(1.0);
    let three = T::of(3.0);
    [
        x.powr(p) + y.powr(p) + z.powr(p) - one,
        (x - y).powr(p) + (z - x).powr(p) + (y + z).powr(p) - one,
        three * (-x + y + z).powr(p) - one,
    ]
}

/// The seven distinct power terms t^(p−1) appearing in the Jacobian, kept
/// separate so interval evaluations can reuse each exactly once.
pub struct JacobianTerms<T> {
    pub x_pm: T,
    pub y_pm: T,
    pub z_pm: T,
    pub xy_pm: T,
    pub zx_pm: T,
    pub yz_pm: T,
    pub w_pm: T,
}

pub fn jacobian_terms<T: Scalar>(p: T, x: T, y: T, z: T) -> JacobianTerms<T> {
    let pm = p - T::of(1.0);
    JacobianTerms {
        x_pm: x.powr(pm),
        y_pm: y.powr(pm),
        z_pm: z.powr(pm),
        xy_pm: (x - y).powr(pm),
        zx_pm: (z - x).powr(pm),
        yz_pm: (y + z).powr(pm),
        w_pm: (-x + y + z).powr(pm),
    }
}

/// The Jacobian of the family system (including the leading factor p):
///
/// ```text
///     ( x^(p−1)                y^(p−1)                z^(p−1)               )
/// p · ( (x−y)^(p−1)−(z−x)^(p−1)  −(x−y)^(p−1)+(y+z)^(p−1)  (z−x)^(p−1)+(y+z)^(p−1) )
///     ( −3(−x+y+z)^(p−1)       3(−x+y+z)^(p−1)        3(−x+y+z)^(p−1)       )
/// ```
///
/// At p = 1 every power is t⁰, which is 1 for t > 0 and, by convention, also
/// at t = 0 (matching the limit from p > 1 for positive t).
pub fn jacobian_in<T: Scalar>(p: T, x: T, y: T, z: T) -> [[T; 3]; 3] {
    let t = jacobian_terms(p, x, y, z);
    let three = T::of(3.0);
    let w3 = three * t.w_pm;
    [
        [p * t.x_pm, p * t.y_pm, p * t.z_pm],
        [
            p * (t.xy_pm - t.zx_pm),
            p * (-t.xy_pm + t.yz_pm),
            p * (t.zx_pm + t.yz_pm),
        ],
        [p * (-w3), p * w3, p * w3],
    ]
}

/// f_p(x, y, z) for plain floats, with a region check.
pub fn family_system(p: Exponent, x: f64, y: f64, z: f64) -> Result<[f64; 3], FamilyError> {
    if !region_ok(x, y, z) {
        return Err(FamilyError::OutOfRegion { x, y, z });
    }
    Ok(system_in(p.get(), x, y, z))
}

/// Df_p(x, y, z) for plain floats, with a region check.
pub fn family_jacobian(p: Exponent, x: f64, y: f64, z: f64) -> Result<[[f64; 3]; 3], FamilyError> {
    if !region_ok(x, y, z) {
        return Err(FamilyError::OutOfRegion { x, y, z });
    }
    Ok(jacobian_in(p.get(), x, y, z))
}

/// Closed form det L(x, y, z) = y³ + z³ − x³ + 3xyz.
pub fn family_det(x: f64, y: f64, z: f64) -> f64 {
    y * y * y + z * z * z - x * x * x + 3.0 * x * y * z
}

fn sup3(v: [f64; 3]) -> f64 {
    v[0].abs().max(v[1].abs()).max(v[2].abs())
}

/// Damped Newton solve of the family system at fixed p. Convergence means
/// residual sup-norm ≤ [`NEWTON_TOL`].
pub fn solve_family(p: Exponent, start: (f64, f64, f64)) -> Result<FamilyPoint, FamilyError> {
    let (mut x, mut y, mut z) = start;
    if !region_ok(x, y, z) {
        return Err(FamilyError::OutOfRegion { x, y, z });
    }
    let mut f = system_in(p.get(), x, y, z);
    let mut res = sup3(f);
    for _ in 0..200 {
        if res <= NEWTON_TOL {
            return FamilyPoint::new(p, x, y, z, res);
        }
        let j = jacobian_in(p.get(), x, y, z);
        let mut a = [
            j[0][0], j[0][1], j[0][2], j[1][0], j[1][1], j[1][2], j[2][0], j[2][1], j[2][2],
        ];
        let mut d = [-f[0], -f[1], -f[2]];
        linalg::solve_dense(&mut a, &mut d, 3).map_err(|_| FamilyError::SingularJacobian)?;
        // backtrack until inside the region with a decreased residual
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let (nx, ny, nz) = (x + step * d[0], y + step * d[1], z + step * d[2]);
            if region_ok(nx, ny, nz) {
                let nf = system_in(p.get(), nx, ny, nz);
                let nres = sup3(nf);
                if nres.is_finite() && nres < res * (1.0 - 1e-4 * step) {
                    x = nx;
                    y = ny;
                    z = nz;
                    f = nf;
                    res = nres;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(FamilyError::MaxIterations);
        }
    }
    if res <= NEWTON_TOL {
        FamilyPoint::new(p, x, y, z, res)
    } else {
        Err(FamilyError::MaxIterations)
    }
}

/// Continuation from a solved point to a target p, walking in steps of at
/// most `max_step` with the previous solution as warm start and halving the
/// step on failure.
pub fn continue_family(
    from: &FamilyPoint,
    p_target: f64,
    max_step: f64,
) -> Result<FamilyPoint, FamilyError> {
    debug_assert!(max_step > 0.0);
    let mut cur = *from;
    loop {
        if (cur.p - p_target).abs() < 1e-15 {
            return Ok(cur);
        }
        let dir = if p_target > cur.p { 1.0 } else { -1.0 };
        let mut step = max_step.min((p_target - cur.p).abs());
        let mut advanced = false;
        for _ in 0..40 {
            let p_next = cur.p + dir * step;
            let pe = Exponent::new(p_next).map_err(|_| FamilyError::InvalidPoint)?;
            match solve_family(pe, (cur.x, cur.y, cur.z)) {
                Ok(pt) => {
                    cur = pt;
                    advanced = true;
                    break;
                }
                Err(_) => step *= 0.5,
            }
        }
        if !advanced {
            return Err(FamilyError::MaxIterations);
        }
    }
}

/// Solves the family at p, starting from p = 1 and continuing upward.
pub fn solve_at(p: Exponent) -> Result<FamilyPoint, FamilyError> {
    let base = solve_family(Exponent::new(1.0).unwrap(), DEFAULT_START)?;
    continue_family(&base, p.get(), 0.01)
}

/// One row of the family table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyRow {
    pub p: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub det: f64,
    pub density: f64,
    pub neighbors: u32,
}

impl FamilyRow {
    pub fn from_point(pt: &FamilyPoint) -> Self {
        let pe = Exponent::new(pt.p).expect("family point has a valid exponent");
        let det = family_det(pt.x, pt.y, pt.z);
        let density = superball_volume(pe, 0.5) / det;
        let neighbors = count_neighbors(&family_matrix(pt), pe, 1e-6);
        FamilyRow {
            p: pt.p,
            x: pt.x,
            y: pt.y,
            z: pt.z,
            det,
            density,
            neighbors,
        }
    }
}

/// Tabulates the family over the given p values (each must lie in
/// [1, log₂ 3)). Rows are solved by continuation in ascending order; a row
/// failure is recorded without aborting the rest.
pub fn family_table(p_values: &[f64]) -> Vec<(f64, Result<FamilyRow, FamilyError>)> {
    let mut sorted: Vec<f64> = p_values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("p values must not be NaN"));
    let mut results: Vec<(f64, Result<FamilyRow, FamilyError>)> = Vec::new();
    let mut cur: Option<FamilyPoint> = None;
    for &pv in &sorted {
        let row = (|| {
            if !(1.0..LOG2_3).contains(&pv) {
                return Err(FamilyError::OutOfRegion {
                    x: pv,
                    y: 0.0,
                    z: 0.0,
                });
            }
            let pe = Exponent::new(pv).unwrap();
            let pt = match &cur {
                None => {
                    let base = solve_family(Exponent::new(1.0).unwrap(), DEFAULT_START)?;
                    continue_family(&base, pv, 0.01)?
                }
                Some(prev) => continue_family(prev, pv, 0.01)?,
            };
            debug_assert!((pt.p - pe.get()).abs() < 1e-15);
            cur = Some(pt);
            Ok(FamilyRow::from_point(&pt))
        })();
        // keep the caller's original order
        results.push((pv, row));
    }
    let mut ordered = Vec::with_capacity(p_values.len());
    for &pv in p_values {
        let idx = results
            .iter()
            .position(|(q, _)| *q == pv)
            .expect("every requested p was processed");
        ordered.push(results.remove(idx));
    }
    ordered
}

#[cfg(test)]
#[allow(clippy::needless_range_loop, clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::catalog::FIRST_REGIME;
    use crate::geometry::lp_norm;
    use crate::lattice::{enumeration_bound, verify_packing, NeighborCase};

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    fn pt(pv: f64, x: f64, y: f64, z: f64) -> FamilyPoint {
        FamilyPoint::new(p(pv), x, y, z, 0.0).unwrap()
    }

    #[test]
    fn family_matrix_examples() {
        let l1 = family_matrix(&pt(1.0, 1.0 / 3.0, 1.0 / 6.0, 0.5));
        let want = &FIRST_REGIME[0].1;
        for i in 0..3 {
            for j in 0..3 {
                assert!((l1.matrix()[i][j] - want[i][j]).abs() < 1e-12);
            }
        }

        let bcc = family_matrix(&pt(LOG2_3, 0.5, 0.5, 0.5));
        assert_eq!(
            *bcc.matrix(),
            [[-0.5, 0.5, 0.5], [0.5, -0.5, 0.5], [0.5, 0.5, -0.5]]
        );

        let l13 = family_matrix(&pt(
            1.3,
            0.419839537552611,
            0.260336714776511,
            0.589023079186421,
        ));
        let want = &FIRST_REGIME[3].1;
        for i in 0..3 {
            for j in 0..3 {
                assert!((l13.matrix()[i][j] - want[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn family_system_examples() {
        let f = family_system(p(1.0), 1.0 / 3.0, 1.0 / 6.0, 0.5).unwrap();
        for v in f {
            assert!(v.abs() < 1e-15);
        }

        // at the endpoint, components 1 and 3 reduce to 3·(1/2)^p − 1 with
        // p = log₂ 3, and component 2 to 1^p − 1
        let f = family_system(p(LOG2_3), 0.5, 0.5, 0.5).unwrap();
        assert!(f[0].abs() < 1e-15);
        assert!(f[1].abs() < 1e-15);
        assert!(f[2].abs() < 1e-15);

        let f = family_system(p(1.5), 0.475292821919, 0.375983627555, 0.580059051165).unwrap();
        assert!(f.iter().all(|v| v.abs() <= 1e-9));

        assert!(matches!(
            family_system(p(1.5), 0.2, 0.3, 0.5),
            Err(FamilyError::OutOfRegion { .. })
        ));
    }

    #[test]
    fn jacobian_singular_at_endpoint() {
        let j = family_jacobian(p(LOG2_3), 0.5, 0.5, 0.5).unwrap();
        // rows proportional to (2/3, 2/3, 2/3), (0, 1, 1), (−2, 2, 2) up to
        // the common factor p·(1/2)^(p−1); singular
        let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
            - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
            + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
        assert!(det.abs() < 1e-14);
        assert!((j[1][0]).abs() < 1e-15);
        assert!((j[2][1] - (-j[2][0])).abs() < 1e-15);
    }

    #[test]
    fn jacobian_linear_at_p2() {
        let (x, y, z) = (0.3, 0.2, 0.6);
        let j = family_jacobian(p(2.0), x, y, z).unwrap();
        let want = [
            [2.0 * x, 2.0 * y, 2.0 * z],
            [
                2.0 * ((x - y) - (z - x)),
                2.0 * (-(x - y) + (y + z)),
                2.0 * ((z - x) + (y + z)),
            ],
            [-6.0 * (-x + y + z), 6.0 * (-x + y + z), 6.0 * (-x + y + z)],
        ];
        for i in 0..3 {
            for k in 0..3 {
                assert!((j[i][k] - want[i][k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let pe = p(1.2);
        let (x, y, z) = (0.39, 0.22, 0.57);
        let j = family_jacobian(pe, x, y, z).unwrap();
        let h = 1e-7;
        let vars = [x, y, z];
        for col in 0..3 {
            let mut vp = vars;
            let mut vm = vars;
            vp[col] += h;
            vm[col] -= h;
            let fp = family_system(pe, vp[0], vp[1], vp[2]).unwrap();
            let fm = family_system(pe, vm[0], vm[1], vm[2]).unwrap();
            for row in 0..3 {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                assert!(
                    (fd - j[row][col]).abs() < 1e-6,
                    "row {row} col {col}: fd {fd} vs {}",
                    j[row][col]
                );
            }
        }
    }

    #[test]
    fn solve_family_examples() {
        let pt1 = solve_family(p(1.0), DEFAULT_START).unwrap();
        assert!((pt1.x - 1.0 / 3.0).abs() < 1e-10);
        assert!((pt1.y - 1.0 / 6.0).abs() < 1e-10);
        assert!((pt1.z - 0.5).abs() < 1e-10);
        assert!(pt1.residual <= NEWTON_TOL);

        let pt11 = continue_family(&pt1, 1.1, 0.01).unwrap();
        assert!((pt11.x - 0.364125450067).abs() < 1e-8);
        assert!((pt11.y - 0.193419513868).abs() < 1e-8);
        assert!((pt11.z - 0.539049770666).abs() < 1e-8);

        let near_end = continue_family(&pt11, LOG2_3 - 1e-9, 0.01).unwrap();
        assert!((near_end.x - 0.5).abs() < 1e-3);
        assert!((near_end.y - 0.5).abs() < 1e-3);
        assert!((near_end.z - 0.5).abs() < 1e-3);
    }

    #[test]
    fn family_det_examples() {
        assert!((family_det(1.0 / 3.0, 1.0 / 6.0, 0.5) - 19.0 / 108.0).abs() < 1e-16);
        assert!((family_det(0.5, 0.5, 0.5) - 0.5).abs() < 1e-16);
        assert_eq!(family_det(0.0, 0.0, 1.0), 1.0);
    }

    #[test]
    fn family_det_matches_matrix_determinant() {
        let cases = [
            (1.0, 1.0 / 3.0, 1.0 / 6.0, 0.5),
            (1.4, 0.446984776909398, 0.307534456631338, 0.595696355825461),
            (1.58, 0.498, 0.4774, 0.5197),
        ];
        for (pv, x, y, z) in cases {
            let b = family_matrix(&pt(pv, x, y, z));
            let lhs = family_det(x, y, z);
            assert!((lhs - b.det()).abs() <= 1e-14 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn family_table_matches_recorded_densities() {
        let grid = [1.0, 1.1, 1.2, 1.3, 1.4, 1.5];
        let want = [0.94736, 0.90913, 0.87861, 0.85375, 0.83284, 0.81395];
        let rows = family_table(&grid);
        let mut last_density = f64::INFINITY;
        for ((pv, row), want) in rows.iter().zip(want) {
            let row = row.as_ref().expect("row solves");
            assert!(
                (row.density - want).abs() < 1e-4,
                "p = {pv}: density {} vs {want}",
                row.density
            );
            assert_eq!(row.neighbors, 14, "p = {pv}");
            assert!(row.density < last_density, "densities must decrease");
            last_density = row.density;
        }
        // p = 1 is exactly 18/19
        let p1 = rows[0].1.as_ref().unwrap();
        assert!((p1.density - 18.0 / 19.0).abs() < 1e-10);
    }

    #[test]
    fn family_table_reports_per_row_failures() {
        let rows = family_table(&[1.2, 0.5, 1.7]);
        assert!(rows[0].1.is_ok());
        assert!(rows[1].1.is_err(), "p = 0.5 is outside [1, log₂ 3)");
        assert!(rows[2].1.is_err(), "p = 1.7 is outside [1, log₂ 3)");
    }

    /// ‖Lu‖ₚ is invariant under cyclic shifts of u.
    #[test]
    fn circulant_symmetry() {
        let pe = p(1.3);
        let fp = solve_at(pe).unwrap();
        let b = family_matrix(&fp);
        let bound = enumeration_bound(&b, pe, 1.0 + 1e-6);
        for u0 in -bound[0]..=bound[0] {
            for u1 in -bound[1]..=bound[1] {
                for u2 in -bound[2]..=bound[2] {
                    if (u0, u1, u2) == (0, 0, 0) {
                        continue;
                    }
                    let n0 = lp_norm(b.image([u0, u1, u2]), pe);
                    let n1 = lp_norm(b.image([u2, u0, u1]), pe);
                    assert!((n0 - n1).abs() < 1e-12);
                }
            }
        }
    }

    /// Case III equalities hold at every converged point, and for
    /// 1 < p < 2 the full verification must confirm the packing.
    #[test]
    fn converged_points_are_packings() {
        for pv in [1.05, 1.25, 1.45, 1.55] {
            let pe = p(pv);
            let fp = solve_at(pe).unwrap();
            let b = family_matrix(&fp);
            for &u in NeighborCase::III.representatives() {
                assert!((lp_norm(b.image(u), pe) - 1.0).abs() <= 1e-9);
            }
            let report = verify_packing(&b, pe, 1e-9);
            assert!(report.is_packing, "p = {pv}");
        }
    }
}
