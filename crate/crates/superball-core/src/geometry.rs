//! ℓᵖ norms on ℝ³, conjugate exponents, and superball volumes.

use core::fmt;

/// log₂ 3, the right end of the first regime. The circulant family of
/// packing lattices lives on p ∈ [1, log₂ 3].
pub const LOG2_3: f64 = 1.584_962_500_721_156_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryError {
    /// Exponents must be finite and ≥ 1.
    InvalidExponent(f64),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::InvalidExponent(p) => {
                write!(f, "exponent must be finite and >= 1, got {p}")
            }
        }
    }
}

impl core::error::Error for GeometryError {}

/// The norm exponent p, restricted to finite values ≥ 1.
///
/// The conjugate exponent q with 1/p + 1/q = 1 is *not* an `Exponent`: it is
/// produced on demand by [`conjugate_exponent`] and may be `+∞` (for p = 1),
/// in which case dual norms must fall back to the max-abs norm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self, GeometryError> {
        if p.is_finite() && p >= 1.0 {
            Ok(Self(p))
        } else {
            Err(GeometryError::InvalidExponent(p))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for Exponent {
    type Error = GeometryError;

    fn try_from(p: f64) -> Result<Self, Self::Error> {
        Exponent::new(p)
    }
}

/// ‖v‖ₚ = (Σ|vᵢ|ᵖ)^(1/p). Zero iff v = 0, absolutely homogeneous.
pub fn lp_norm(v: [f64; 3], p: Exponent) -> f64 {
    let p = p.get();
    let (a, b, c) = (v[0].abs(), v[1].abs(), v[2].abs());
    if p == 1.0 {
        a + b + c
    } else if p == 2.0 {
        libm::sqrt(a * a + b * b + c * c)
    } else {
        let s = libm::pow(a, p) + libm::pow(b, p) + libm::pow(c, p);
        libm::pow(s, 1.0 / p)
    }
}

/// Σ|vᵢ|ᵖ, the p-th power of the norm. Polynomial-like in the |vᵢ|, which is
/// what the search constraints differentiate.
pub fn lp_norm_pow(v: [f64; 3], p: Exponent) -> f64 {
    let p = p.get();
    let (a, b, c) = (v[0].abs(), v[1].abs(), v[2].abs());
    if p == 1.0 {
        a + b + c
    } else if p == 2.0 {
        a * a + b * b + c * c
    } else {
        libm::pow(a, p) + libm::pow(b, p) + libm::pow(c, p)
    }
}

/// The conjugate exponent q = p/(p−1), with q = +∞ for p = 1.
pub fn conjugate_exponent(p: Exponent) -> f64 {
    let p = p.get();
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// Γ(x) for real x > 0.
///
/// Wraps `libm::tgamma` (musl's implementation); relative error is at the
/// few-ulp level, far below 1e-12 on [1, 4], which is the range the volume
/// formula needs for p ∈ [1, ∞). Validated in the tests against 22-digit
/// reference values.
pub fn gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    libm::tgamma(x)
}

/// Lebesgue volume of `scale · ℬᵖ₃`:
/// vol = (2·scale)³ · Γ(1 + 1/p)³ / Γ(1 + 3/p).
pub fn superball_volume(p: Exponent, scale: f64) -> f64 {
    assert!(
        scale > 0.0 && scale.is_finite(),
        "superball scale must be positive and finite"
    );
    let p = p.get();
    let side = 2.0 * scale;
    let g1 = gamma(1.0 + 1.0 / p);
    let g3 = gamma(1.0 + 3.0 / p);
    side * side * side * g1 * g1 * g1 / g3
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + (hi - lo) * u
    }

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    #[test]
    fn exponent_rejects_bad_values() {
        assert!(Exponent::new(0.9).is_err());
        assert!(Exponent::new(f64::INFINITY).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert!(Exponent::new(1.0).is_ok());
    }

    #[test]
    fn lp_norm_examples() {
        for pv in [1.0, 1.3, 2.0, 2.7] {
            assert_eq!(lp_norm([1.0, 0.0, 0.0], p(pv)), 1.0);
        }
        assert_eq!(lp_norm([1.0, 1.0, 1.0], p(1.0)), 3.0);
        // 3^(1/log2 3) = 2 analytically
        assert!((lp_norm([1.0, 1.0, 1.0], p(LOG2_3)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate_exponent(p(2.0)), 2.0);
        assert!((conjugate_exponent(p(1.5)) - 3.0).abs() < 1e-15);
        assert_eq!(conjugate_exponent(p(1.0)), f64::INFINITY);
    }

    /// 22-digit reference values (arbitrary-precision evaluation), rounded
    /// to f64. The wrapped gamma must stay within 1e-12 relative on [1, 4].
    #[test]
    fn gamma_accuracy_on_1_4() {
        let refs: [(f64, f64); 16] = [
            (1.0, 1.0),
            (1.1, 0.9513507698668731836292),
            (1.25, 0.9064024770554770779827),
            (1.3, 0.8974706963062771884938),
            (1.5, 0.8862269254527580136491),
            (1.6180339887, 0.895673151698968095565),
            (1.75, 0.9190625268488832338468),
            (2.0, 1.0),
            (2.2, 1.101802490879712732769),
            (2.5, 1.329340388179137020474),
            (2.8, 1.676490787764436858036),
            (3.0, 2.0),
            (3.3, 2.683437381955768793596),
            (3.5, 3.323350970447842551184),
            (3.7, 4.170651783796603165394),
            (4.0, 6.0),
        ];
        for (x, want) in refs {
            let got = gamma(x);
            assert!(
                (got - want).abs() / want <= 1e-12,
                "gamma({x}) = {got}, want {want}"
            );
        }
        // classic checks
        let sqrt_pi = libm::sqrt(core::f64::consts::PI);
        assert!((gamma(1.5) - sqrt_pi / 2.0).abs() < 1e-12);
        assert!((gamma(2.0) - 1.0).abs() < 1e-12);
        assert!((gamma(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn volume_euclidean_ball() {
        let want = 4.0 * core::f64::consts::PI / 3.0;
        assert!((superball_volume(p(2.0), 1.0) - want).abs() < 1e-12);
    }

    #[test]
    fn volume_octahedron_exact_and_monte_carlo() {
        // cross-polytope: vol(ℬ¹₃) = 2³/3! = 4/3, scaled by (1/2)³
        let v = superball_volume(p(1.0), 0.5);
        assert!((v - 1.0 / 6.0).abs() < 1e-14);

        // membership sampling in the cube [-1/2, 1/2]³, 10⁷ points
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 10_000_000u64;
        let mut hits = 0u64;
        for _ in 0..n {
            let x = uniform(&mut rng, -0.5, 0.5);
            let y = uniform(&mut rng, -0.5, 0.5);
            let z = uniform(&mut rng, -0.5, 0.5);
            if x.abs() + y.abs() + z.abs() <= 0.5 {
                hits += 1;
            }
        }
        let est = hits as f64 / n as f64; // cube volume is 1
        let p_true = 1.0 / 6.0;
        let sigma = libm::sqrt(p_true * (1.0 - p_true) / n as f64);
        assert!(
            (est - p_true).abs() <= 3.0 * sigma,
            "MC estimate {est} vs {p_true}, 3σ = {}",
            3.0 * sigma
        );
    }

    /// Independent oracle for the p = 3/2 volume: iterated adaptive Simpson
    /// quadrature of vol(ℬᵖ₃) = 8 ∫₀¹ ∫₀^Y (1 − xᵖ − yᵖ)^{1/p} dy dx with
    /// Y = (1 − xᵖ)^{1/p}, using only `pow`. No gamma function involved.
    #[test]
    fn volume_p15_against_quadrature() {
        fn simpson<F: Fn(f64) -> f64>(_f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
            (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        }
        #[allow(clippy::too_many_arguments)]
        fn adapt<F: Fn(f64) -> f64>(
            f: &F,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = simpson(f, a, m, fa, flm, fm);
            let right = simpson(f, m, b, fm, frm, fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
            let m = 0.5 * (a + b);
            let (fa, fm, fb) = (f(a), f(m), f(b));
            let whole = simpson(&f, a, b, fa, fm, fb);
            adapt(&f, a, b, fa, fm, fb, whole, tol, 40)
        }

        let pv = 1.5;
        let inner = |x: f64| {
            let rem = 1.0 - libm::pow(x, pv);
            if rem <= 0.0 {
                return 0.0;
            }
            let y_max = libm::pow(rem, 1.0 / pv);
            integrate(
                |y| {
                    let t = rem - libm::pow(y, pv);
                    if t <= 0.0 {
                        0.0
                    } else {
                        libm::pow(t, 1.0 / pv)
                    }
                },
                0.0,
                y_max,
                1e-10,
            )
        };
        let octant = integrate(inner, 0.0, 1.0, 1e-9);
        let oracle_unit = 8.0 * octant;
        let oracle_half = oracle_unit / 8.0; // scale (1/2)³

        let got = superball_volume(p(1.5), 0.5);
        assert!(
            (got - oracle_half).abs() < 1e-6,
            "closed form {got} vs quadrature {oracle_half}"
        );
        // frozen 22-digit reference: Γ(5/3)³ / 2
        assert!((got - 0.3678457157355892943129).abs() < 1e-14);
    }

    #[test]
    fn volume_scaling_is_cubic() {
        for pv in [1.0, 1.2, 1.7, 2.0, 3.0] {
            for s in [0.25, 0.5, 1.0, 1.75] {
                let a = superball_volume(p(pv), s);
                let b = s * s * s * superball_volume(p(pv), 1.0);
                assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs());
            }
        }
    }

    #[test]
    fn volume_increasing_in_p() {
        let mut last = superball_volume(p(1.0), 1.0);
        let mut pv = 1.05;
        while pv <= 2.0 {
            let v = superball_volume(p(pv), 1.0);
            assert!(v > last, "volume not increasing at p = {pv}");
            last = v;
            pv += 0.05;
        }
    }

    #[test]
    fn triangle_inequality_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let pv = p(uniform(&mut rng, 1.0, 3.0));
            let v = [
                uniform(&mut rng, -2.0, 2.0),
                uniform(&mut rng, -2.0, 2.0),
                uniform(&mut rng, -2.0, 2.0),
            ];
            let w = [
                uniform(&mut rng, -2.0, 2.0),
                uniform(&mut rng, -2.0, 2.0),
                uniform(&mut rng, -2.0, 2.0),
            ];
            let sum = [v[0] + w[0], v[1] + w[1], v[2] + w[2]];
            assert!(lp_norm(sum, pv) <= lp_norm(v, pv) + lp_norm(w, pv) + 1e-12);
        }
    }

    #[test]
    fn hoelder_duality_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let pv = uniform(&mut rng, 1.0, 3.0);
            let pe = p(pv);
            let q = conjugate_exponent(pe);
            let v = [
                uniform(&mut rng, -2.0, 2.0),
                uniform(&mut rng, -2.0, 2.0),
                uniform(&mut rng, -2.0, 2.0),
            ];
            let w = [
                uniform(&mut rng, -2.0, 2.0),
                uniform(&mut rng, -2.0, 2.0),
                uniform(&mut rng, -2.0, 2.0),
            ];
            let dot = (v[0] * w[0] + v[1] * w[1] + v[2] * w[2]).abs();
            let dual = if q.is_infinite() {
                w[0].abs().max(w[1].abs()).max(w[2].abs())
            } else {
                lp_norm(w, p(q))
            };
            assert!(dot <= lp_norm(v, pe) * dual + 1e-12);
        }
    }

    /// ‖x+y‖ₚᵖ + ‖x−y‖ₚᵖ ≥ (‖x‖ₚ+‖y‖ₚ)ᵖ + |‖x‖ₚ−‖y‖ₚ|ᵖ for 1 < p < 2.
    #[test]
    fn hanner_inequality_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10_000 {
            let pv = uniform(&mut rng, 1.0 + 1e-6, 2.0 - 1e-6);
            let pe = p(pv);
            let x = [
                uniform(&mut rng, -2.0, 2.0),
                uniform(&mut rng, -2.0, 2.0),
                uniform(&mut rng, -2.0, 2.0),
            ];
            let y = [
                uniform(&mut rng, -2.0, 2.0),
                uniform(&mut rng, -2.0, 2.0),
                uniform(&mut rng, -2.0, 2.0),
            ];
            let xp = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
            let xm = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
            let lhs = lp_norm_pow(xp, pe) + lp_norm_pow(xm, pe);
            let nx = lp_norm(x, pe);
            let ny = lp_norm(y, pe);
            let rhs = libm::pow(nx + ny, pv) + libm::pow((nx - ny).abs(), pv);
            assert!(lhs >= rhs - 1e-10, "Hanner violated at p={pv}");
        }
    }
}
