//! Existence certificates for the family via an effective implicit function
//! theorem: if, for some linear map T and radius ε,
//!
//! ```text
//! ‖Df_p(x)·T − I‖ < 1 − ‖T‖·‖f_p(x₀)‖ / ε
//! ```
//!
//! holds for all x in the closed ℓ∞ ball of radius ε around x₀ and all p in
//! [p₀, p₀ + pε], then f_p has a zero inside the ball for every such p. Each
//! [`verify_row`] checks one (p-subinterval, ball) pair with outward-rounded
//! interval arithmetic; [`certify_schedule`] chains rows into a gap-free
//! covering of a p range.
//!
//! T is the ordinary floating-point inverse of the point Jacobian at the
//! center; all rigor lives in the interval evaluation of the condition. The
//! interval evaluation runs over the closed box, a superset of the open
//! ball, so passing is conservative.

use alloc::vec::Vec;
use core::fmt;

use crate::family::{self, FamilyError, FamilyPoint};
use crate::geometry::Exponent;
use crate::interval::{linf_op_norm, mat_from_points, vec_linf, Interval, IntervalMatrix3};
use crate::linalg::{self, Mat3};

/// Ball radius and p-step used below [`FINE_FROM`].
pub const COARSE_EPS: (f64, f64) = (0.03, 0.01);
/// Ball radius and p-step used from [`FINE_FROM`] on.
pub const FINE_EPS: (f64, f64) = (0.006, 0.001);
/// Where the classic step schedule switches from coarse to fine parameters.
pub const FINE_FROM: f64 = 1.52;

/// Condition-number estimate above which the point Jacobian is treated as
/// numerically singular and the row fails with [`RowStatus::SingularT`].
pub const SINGULAR_T_COND: f64 = 1e12;

/// Input parameters of one certificate row, in the argument order of the
/// schedule file format: p0, x0, y0, z0, eps, peps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleRow {
    pub p0: f64,
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
    pub eps: f64,
    pub peps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Pass,
    /// The ε ball is not contained in the admissible region.
    RegionFail,
    /// The point Jacobian at the center is numerically singular.
    SingularT,
    /// The operator-norm inequality does not hold (lhs.hi ≥ rhs.lo).
    ConditionFail,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RowStatus::Pass => "pass",
            RowStatus::RegionFail => "region-fail",
            RowStatus::SingularT => "singular-T",
            RowStatus::ConditionFail => "condition-fail",
        };
        write!(f, "{s}")
    }
}

/// One verified (or failed) subinterval of p.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRow {
    pub p_lo: f64,
    /// Verified upper end: outward-rounded p0 + pε.
    pub p_hi: f64,
    pub center: [f64; 3],
    pub eps: f64,
    /// The approximate-inverse operator, as plain floats.
    pub t: Mat3,
    pub lhs: Interval,
    pub rhs: Interval,
    pub region_ok: bool,
    pub pass: bool,
    pub status: RowStatus,
}

impl CertificateRow {
    fn failed(row: &ScheduleRow, status: RowStatus, region_ok: bool, t: Mat3) -> Self {
        // sentinel enclosures keep the pass invariant: 1 < 0 is false
        CertificateRow {
            p_lo: row.p0,
            p_hi: (row.p0 + row.peps).next_up(),
            center: [row.x0, row.y0, row.z0],
            eps: row.eps,
            t,
            lhs: Interval::point(1.0),
            rhs: Interval::point(0.0),
            region_ok,
            pass: false,
            status,
        }
    }
}

/// A gap-free list of passing rows covering `[covered.0, covered.1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateChain {
    pub rows: Vec<CertificateRow>,
    pub covered: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertifyError {
    EmptySchedule,
    NotSortedAt {
        index: usize,
    },
    /// A row failed; all computed rows are attached for reporting.
    RowFailed {
        index: usize,
        status: RowStatus,
        rows: Vec<CertificateRow>,
    },
    /// Two consecutive rows leave p uncovered starting here.
    Gap {
        first_uncovered: f64,
        rows: Vec<CertificateRow>,
    },
}

impl fmt::Display for CertifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyError::EmptySchedule => write!(f, "schedule contains no rows"),
            CertifyError::NotSortedAt { index } => {
                write!(f, "schedule rows are not sorted by p0 at index {index}")
            }
            CertifyError::RowFailed { index, status, .. } => {
                write!(f, "certificate row {index} failed with status {status}")
            }
            CertifyError::Gap {
                first_uncovered, ..
            } => {
                write!(f, "coverage gap: p = {first_uncovered} is not certified")
            }
        }
    }
}

impl core::error::Error for CertifyError {}

/// True iff the closed ℓ∞ ball of radius ε around the center lies inside the
/// region where every power argument of the family system is nonnegative:
/// y₀ − ε ≥ 0, x₀ − y₀ − 2ε ≥ 0, z₀ − x₀ − 2ε ≥ 0, −x₀ + y₀ + z₀ − 3ε ≥ 0.
/// Margins are evaluated in interval arithmetic and must be provably
/// nonnegative.
pub fn region_check(center: [f64; 3], eps: f64) -> bool {
    assert!(eps > 0.0, "ball radius must be positive");
    let [x0, y0, z0] = center.map(Interval::point);
    let e = Interval::point(eps);
    let two = Interval::point(2.0);
    let three = Interval::point(3.0);
    let margins = [
        y0 - e,
        x0 - y0 - two * e,
        z0 - x0 - two * e,
        -x0 + y0 + z0 - three * e,
    ];
    margins.iter().all(|m| m.lo() >= 0.0)
}

/// Entrywise product row of Df_P(X)·T − I, evaluated in factored form: each
/// of the seven power terms of the Jacobian occurs exactly once per entry
/// (the plain interval matrix product would lose the cancellation inside
/// rows 2 and 3 and roughly double the enclosure width). Algebraically this
/// is the same matrix.
fn lhs_product(p: Interval, x: Interval, y: Interval, z: Interval, t: &Mat3) -> IntervalMatrix3 {
    let terms = family::jacobian_terms::<Interval>(p, x, y, z);
    let tp = mat_from_points(t);
    let three = Interval::point(3.0);
    let mut a = [[Interval::point(0.0); 3]; 3];
    for j in 0..3 {
        let (t0, t1, t2) = (tp[0][j], tp[1][j], tp[2][j]);
        a[0][j] = p * (terms.x_pm * t0 + terms.y_pm * t1 + terms.z_pm * t2);
        a[1][j] = p * (terms.xy_pm * (t0 - t1) + terms.zx_pm * (t2 - t0) + terms.yz_pm * (t1 + t2));
        a[2][j] = p * (three * terms.w_pm * (t1 + t2 - t0));
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = row[i] - Interval::point(1.0);
    }
    a
}

fn verify_row_with(row: &ScheduleRow, t_override: Option<&Mat3>) -> CertificateRow {
    assert!(row.peps > 0.0, "p step must be positive");
    let center = [row.x0, row.y0, row.z0];
    if !region_check(center, row.eps) {
        return CertificateRow::failed(row, RowStatus::RegionFail, false, [[0.0; 3]; 3]);
    }

    let t = match t_override {
        Some(t) => *t,
        None => {
            let j0 = family::jacobian_in::<f64>(row.p0, row.x0, row.y0, row.z0);
            match linalg::inverse3(&j0) {
                Some(t) if linalg::linf_norm3(&j0) * linalg::linf_norm3(&t) <= SINGULAR_T_COND => t,
                _ => return CertificateRow::failed(row, RowStatus::SingularT, true, [[0.0; 3]; 3]),
            }
        }
    };

    let p = Interval::new(row.p0, (row.p0 + row.peps).next_up()).expect("valid p interval");
    let x = Interval::centered(row.x0, row.eps);
    let y = Interval::centered(row.y0, row.eps);
    let z = Interval::centered(row.z0, row.eps);

    let lhs = linf_op_norm(&lhs_product(p, x, y, z, &t));

    let f0 = family::system_in::<Interval>(
        p,
        Interval::point(row.x0),
        Interval::point(row.y0),
        Interval::point(row.z0),
    );
    let t_norm = linf_op_norm(&mat_from_points(&t));
    let rhs = Interval::point(1.0) - t_norm * vec_linf(&f0) / Interval::point(row.eps);

    let pass = lhs.hi() < rhs.lo();
    CertificateRow {
        p_lo: row.p0,
        p_hi: p.hi(),
        center,
        eps: row.eps,
        t,
        lhs,
        rhs,
        region_ok: true,
        pass,
        status: if pass {
            RowStatus::Pass
        } else {
            RowStatus::ConditionFail
        },
    }
}

/// Checks the existence condition on one row: T is the floating-point
/// inverse of the point Jacobian at the center, lhs and rhs are interval
/// enclosures, and the row passes iff the region check holds and
/// lhs.hi < rhs.lo.
pub fn verify_row(row: &ScheduleRow) -> CertificateRow {
    verify_row_with(row, None)
}

/// Verifies all rows (input must be sorted by p0) and checks the chain is
/// gap-free: each row must start no later than where the previous one ends.
pub fn certify_schedule(rows: &[ScheduleRow]) -> Result<CertificateChain, CertifyError> {
    if rows.is_empty() {
        return Err(CertifyError::EmptySchedule);
    }
    for (i, pair) in rows.windows(2).enumerate() {
        if pair[1].p0 < pair[0].p0 {
            return Err(CertifyError::NotSortedAt { index: i + 1 });
        }
    }
    let certs: Vec<CertificateRow> = rows.iter().map(verify_row).collect();
    if let Some(index) = certs.iter().position(|c| !c.pass) {
        let status = certs[index].status;
        return Err(CertifyError::RowFailed {
            index,
            status,
            rows: certs,
        });
    }
    for pair in certs.windows(2) {
        if pair[1].p_lo > pair[0].p_hi {
            return Err(CertifyError::Gap {
                first_uncovered: pair[0].p_hi,
                rows: certs,
            });
        }
    }
    let covered = (certs[0].p_lo, certs.last().unwrap().p_hi);
    Ok(CertificateChain {
        rows: certs,
        covered,
    })
}

/// The classic fixed-step schedule: steps of 0.01 with ε = 0.03 below
/// [`FINE_FROM`], then steps of 0.001 with ε = 0.006. Centers are
/// regenerated by Newton continuation of the family.
pub fn step_schedule(p_start: f64, p_end: f64) -> Result<Vec<ScheduleRow>, FamilyError> {
    let mut rows = Vec::new();
    let mut p0 = p_start;
    let mut cur: Option<FamilyPoint> = None;
    while p0 < p_end - 1e-12 {
        let (eps, peps) = if p0 < FINE_FROM - 1e-12 {
            COARSE_EPS
        } else {
            FINE_EPS
        };
        let pt = solve_center(&mut cur, p0)?;
        rows.push(ScheduleRow {
            p0,
            x0: pt.x,
            y0: pt.y,
            z0: pt.z,
            eps,
            peps,
        });
        p0 += peps;
    }
    Ok(rows)
}

fn solve_center(cur: &mut Option<FamilyPoint>, p0: f64) -> Result<FamilyPoint, FamilyError> {
    let pt = match cur {
        None => family::solve_at(Exponent::new(p0).map_err(|_| FamilyError::InvalidPoint)?)?,
        Some(prev) => family::continue_family(prev, p0, 0.01)?,
    };
    *cur = Some(pt);
    Ok(pt)
}

/// Result of the best-effort adaptive scheduler.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoOutcome {
    /// Row parameters that passed, in order.
    pub schedule: Vec<ScheduleRow>,
    /// Their verified certificates.
    pub rows: Vec<CertificateRow>,
    /// Upper end of the certified range (equals the last p_hi, or `p_start`
    /// when nothing passed).
    pub reached: f64,
    /// Whether `reached` extends to `p_end`.
    pub complete: bool,
}

/// Builds a passing chain from `p_start` toward `p_end` by walking the
/// family and halving both ε and the p step whenever a row fails. Reports
/// the largest certified p when it cannot continue (the family Jacobian
/// degenerates toward log₂ 3, where no radius works in double precision).
pub fn auto_schedule(p_start: f64, p_end: f64, initial_step: f64) -> AutoOutcome {
    assert!(initial_step > 0.0);
    let mut eps = COARSE_EPS.0;
    let mut peps = initial_step;
    let mut p0 = p_start;
    let mut cur: Option<FamilyPoint> = None;
    let mut schedule = Vec::new();
    let mut rows: Vec<CertificateRow> = Vec::new();
    let mut reached = p_start;
    while p0 < p_end - 1e-12 && schedule.len() < 100_000 {
        if p0 >= FINE_FROM - 1e-12 {
            eps = eps.min(FINE_EPS.0);
            peps = peps.min(FINE_EPS.1);
        }
        let pt = match solve_center(&mut cur, p0) {
            Ok(pt) => pt,
            Err(_) => break,
        };
        let row = ScheduleRow {
            p0,
            x0: pt.x,
            y0: pt.y,
            z0: pt.z,
            eps,
            peps,
        };
        let cert = verify_row(&row);
        if cert.pass {
            p0 = cert.p_hi;
            reached = cert.p_hi;
            schedule.push(row);
            rows.push(cert);
        } else {
            eps *= 0.5;
            peps *= 0.5;
            if peps < 1e-13 {
                break;
            }
        }
    }
    AutoOutcome {
        schedule,
        rows,
        reached,
        complete: reached >= p_end - 1e-12,
    }
}
