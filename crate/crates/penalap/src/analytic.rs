//! Closed-form exact and penalized solutions used as test oracles.
//!
//! 1D cases live on the fluid interval (0, pi) inside the periodic box
//! [0, 2pi); penalized closed forms are piecewise: a fluid branch on
//! [0, pi] and a linear solid branch on [pi, 2pi).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    Ok(())
}

/// Coefficients of a piecewise penalized solution: `A1 x + A2` added to the
/// fluid branch, `B1 x + B2` the solid branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

/// `-w'' = m^2 cos mx` on (0, pi) with `w'(0) = w'(pi) = alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case1DSameFlux {
    pub m: u32,
    pub alpha: f64,
    pub eta: f64,
}

impl Case1DSameFlux {
    pub fn new(m: u32, alpha: f64, eta: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        check_eta(eta)?;
        Ok(Self { m, alpha, eta })
    }

    pub fn source(&self, x: f64) -> f64 {
        let m = self.m as f64;
        m * m * (m * x).cos()
    }

    pub fn coefficients(&self) -> PiecewiseCoefficients {
        let (a, e) = (self.alpha, self.eta);
        let s = if self.m % 2 == 1 { 2.0 } else { 0.0 };
        let a1 = a / (1.0 + e) + e * s / (PI * (1.0 + e));
        let b1 = -a / (1.0 + e) + s / (PI * (1.0 + e));
        let b2 = 1.5 * PI * a / (1.0 + e) - s / (1.0 + e) * (e / 2.0 + 2.0) + 1.0;
        let a2 = 2.0 * PI * b1 - 1.0 + b2;
        PiecewiseCoefficients { a1, a2, b1, b2 }
    }
}

/// `-w'' = m^2 sin mx` on (0, pi) with `w'(0) = alpha + m`, `w'(pi) = alpha - m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case1DDiffFlux {
    pub m: u32,
    pub alpha: f64,
    pub eta: f64,
}

impl Case1DDiffFlux {
    pub fn new(m: u32, alpha: f64, eta: f64) -> Result<Self> {
        if m % 2 == 0 {
            return Err(Error::InvalidArgument(format!("m must be odd for compatibility, got {m}")));
        }
        check_eta(eta)?;
        Ok(Self { m, alpha, eta })
    }

    pub fn source(&self, x: f64) -> f64 {
        let m = self.m as f64;
        m * m * (m * x).sin()
    }

    /// `beta = alpha + m cos mx`.
    pub fn beta(&self, x: f64) -> f64 {
        let m = self.m as f64;
        self.alpha + m * (m * x).cos()
    }

    pub fn beta_divergence(&self, x: f64) -> f64 {
        let m = self.m as f64;
        -m * m * (m * x).sin()
    }

    pub fn coefficients(&self) -> PiecewiseCoefficients {
        let (a, e, m) = (self.alpha, self.eta, self.m as f64);
        PiecewiseCoefficients {
            a1: a / (1.0 + e),
            a2: -0.5 * PI * a / (1.0 + e) - 2.0 / (m * PI),
            b1: -a / (1.0 + e),
            b2: 1.5 * PI * a / (1.0 + e) - 2.0 / (m * PI),
        }
    }
}

/// `-w'' = (1-eps) cos x + eps sin x` with `beta = alpha + eps cos x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseEpsMix {
    pub epsilon: f64,
    pub alpha: f64,
    pub eta: f64,
}

impl CaseEpsMix {
    pub fn new(epsilon: f64, alpha: f64, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        if !epsilon.is_finite() || !alpha.is_finite() {
            return Err(Error::InvalidArgument("epsilon and alpha must be finite".into()));
        }
        Ok(Self { epsilon, alpha, eta })
    }

    pub fn source(&self, x: f64) -> f64 {
        (1.0 - self.epsilon) * x.cos() + self.epsilon * x.sin()
    }

    pub fn beta(&self, x: f64) -> f64 {
        self.alpha + self.epsilon * x.cos()
    }

    pub fn beta_divergence(&self, x: f64) -> f64 {
        -self.epsilon * x.sin()
    }

    /// Obtained from C0 continuity at 0 and pi, the flux relation
    /// `v'_f = eta v'_s + beta`, and zero fluid mean.
    pub fn coefficients(&self) -> PiecewiseCoefficients {
        let (a, e, eps) = (self.alpha, self.eta, self.epsilon);
        let a1 = (a + 2.0 * e * (1.0 - eps) / PI) / (1.0 + e);
        let b1 = 2.0 * (1.0 - eps) / PI - a1;
        let a2 = -2.0 * eps / PI - 0.5 * PI * a1;
        let b2 = (1.0 - eps) + a2 - 2.0 * PI * b1;
        PiecewiseCoefficients { a1, a2, b1, b2 }
    }
}

/// 2D Poisson cases on the periodic box [0, 2pi)^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Case2D {
    /// Fluid square (pi/2, 3pi/2)^2 with constant flux offset.
    Square { alpha_x: f64, alpha_y: f64, eta: f64 },
    /// Fluid annulus pi/4 < r < 3pi/4 around (pi, pi).
    Annulus { alpha: f64, eta: f64 },
}

pub const ANNULUS_CENTER: [f64; 2] = [PI, PI];
pub const ANNULUS_R_IN: f64 = PI / 4.0;
pub const ANNULUS_R_OUT: f64 = 0.75 * PI;

fn wrap_2pi(x: f64) -> f64 {
    x.rem_euclid(2.0 * PI)
}

fn piecewise(x: f64, fluid: impl Fn(f64) -> f64, c: &PiecewiseCoefficients) -> f64 {
    let x = wrap_2pi(x);
    if x <= PI {
        fluid(x) + c.a1 * x + c.a2
    } else {
        c.b1 * x + c.b2
    }
}

/// `w = cos mx + alpha x - pi alpha/2` on [0, pi].
pub fn exact_1d_same_flux(x: f64, case: &Case1DSameFlux) -> f64 {
    (case.m as f64 * x).cos() + case.alpha * x - 0.5 * PI * case.alpha
}

pub fn penalized_1d_same_flux(x: f64, case: &Case1DSameFlux) -> f64 {
    let m = case.m as f64;
    piecewise(x, |x| (m * x).cos(), &case.coefficients())
}

/// `max_{[0,pi]} |v - w|`. The difference is linear there, so the maximum
/// sits at an endpoint.
pub fn penalization_error_1d(case: &Case1DSameFlux) -> f64 {
    let c = case.coefficients();
    let a0 = -0.5 * PI * case.alpha;
    let at = |x: f64| ((c.a1 - case.alpha) * x + c.a2 - a0).abs();
    at(0.0).max(at(PI))
}

/// Fourier coefficient `(1/2pi) int_0^{2pi} v e^{-ikx} dx` of the penalized
/// same-flux solution.
pub fn fourier_coeff_penalized(k: i64, case: &Case1DSameFlux) -> Complex64 {
    let m = case.m as i64;
    let (mf, kf) = (m as f64, k as f64);
    let (a, e) = (case.alpha, case.eta);
    let k_odd = k.rem_euclid(2) == 1;
    // odd-k term shared by both parities of m
    let odd_k = |q: f64| -2.0 * a / (PI * q * q * (1.0 + e));
    let imag = |q: f64| Complex64::new(0.0, mf * mf / (PI * q * (mf * mf - q * q)));
    if k == 0 {
        // fluid mean is zero; only the solid branch contributes
        return Complex64::new(if m % 2 == 0 { 0.5 } else { 0.0 }, 0.0);
    }
    if m % 2 == 1 {
        if !k_odd {
            imag(kf)
        } else {
            let q = if k.abs() == m { mf } else { kf };
            let mut re = 2.0 * (1.0 - e) / (PI * PI * q * q * (1.0 + e)) + odd_k(q);
            if k.abs() == m {
                re += 0.25;
            }
            Complex64::new(re, 0.0)
        }
    } else if k_odd {
        Complex64::new(odd_k(kf), 0.0) + imag(kf)
    } else if k.abs() == m {
        Complex64::new(0.25, 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// `w = sin mx + alpha x - 2/(m pi) - pi alpha/2` on [0, pi].
pub fn exact_1d_diff_flux(x: f64, case: &Case1DDiffFlux) -> f64 {
    let m = case.m as f64;
    (m * x).sin() + case.alpha * x - 2.0 / (m * PI) - 0.5 * PI * case.alpha
}

pub fn penalized_1d_diff_flux(x: f64, case: &Case1DDiffFlux) -> f64 {
    let m = case.m as f64;
    piecewise(x, |x| (m * x).sin(), &case.coefficients())
}

/// `w = (1-eps) cos x + eps sin x + alpha x - pi alpha/2 - 2 eps/pi` on [0, pi].
pub fn exact_eps_mix(x: f64, case: &CaseEpsMix) -> f64 {
    let eps = case.epsilon;
    (1.0 - eps) * x.cos() + eps * x.sin() + case.alpha * x - 0.5 * PI * case.alpha - 2.0 * eps / PI
}

pub fn penalized_eps_mix(x: f64, case: &CaseEpsMix) -> f64 {
    let eps = case.epsilon;
    piecewise(x, |x| (1.0 - eps) * x.cos() + eps * x.sin(), &case.coefficients())
}

/// `w = sin x cos 2y + ax x + ay y - (ax + ay) pi` on the fluid square.
pub fn exact_2d_square(x: f64, y: f64, alpha_x: f64, alpha_y: f64) -> f64 {
    x.sin() * (2.0 * y).cos() + alpha_x * x + alpha_y * y - (alpha_x + alpha_y) * PI
}

pub fn square_source(x: f64, y: f64) -> f64 {
    5.0 * x.sin() * (2.0 * y).cos()
}

/// Additive constant fixing `int r w dr = 0` over the annulus.
pub fn annulus_constant(alpha: f64) -> f64 {
    -(3.0 / 32.0) * alpha * PI * (9.0 * (0.75 * PI).ln() - (0.25 * PI).ln() - 4.0)
}

/// `w(r) = cos 4r + (3/4) alpha pi log r + C`.
pub fn exact_2d_annulus(r: f64, alpha: f64) -> Result<f64> {
    let tol = 1e-9;
    if r < ANNULUS_R_IN - tol || r > ANNULUS_R_OUT + tol {
        return Err(Error::InvalidArgument(format!("r = {r} outside the annulus")));
    }
    Ok((4.0 * r).cos() + 0.75 * alpha * PI * r.ln() + annulus_constant(alpha))
}

pub fn annulus_source(r: f64) -> f64 {
    16.0 * (4.0 * r).cos() + 4.0 * (4.0 * r).sin() / r
}

/// Radial profile `g(r) = alpha (4r/3pi)^2 (4(1 - r/pi))^3` for `r <= pi`, else 0.
pub fn annulus_g(r: f64, alpha: f64) -> f64 {
    if r >= PI {
        return 0.0;
    }
    let s = 4.0 * r / (3.0 * PI);
    let t = 4.0 * (1.0 - r / PI);
    alpha * s * s * t * t * t
}

/// `beta = g(r) e_r` around (pi, pi); zero at the centre.
pub fn annulus_beta(x: f64, y: f64, alpha: f64) -> [f64; 2] {
    let (dx, dy) = (x - ANNULUS_CENTER[0], y - ANNULUS_CENTER[1]);
    let r = dx.hypot(dy);
    if r == 0.0 || r >= PI {
        return [0.0, 0.0];
    }
    let g = annulus_g(r, alpha);
    [g * dx / r, g * dy / r]
}

/// `div(g e_r) = g' + g/r = alpha (1024/(3 pi^2)) r (1 - r/pi)^2 (1 - 2r/pi)`.
pub fn annulus_beta_divergence(x: f64, y: f64, alpha: f64) -> f64 {
    let r = (x - ANNULUS_CENTER[0]).hypot(y - ANNULUS_CENTER[1]);
    if r >= PI {
        return 0.0;
    }
    let u = 1.0 - r / PI;
    alpha * 1024.0 / (3.0 * PI * PI) * r * u * u * (1.0 - 2.0 * r / PI)
}

/// `phi = e^{-t} sin x` on (-pi, pi).
pub fn exact_heat(x: f64, t: f64) -> f64 {
    (-t).exp() * x.sin()
}

/// `w = cos x + alpha x - 1` on (0, pi), with `w(0) = 0` and `w'(pi) = alpha`.
pub fn exact_mixed_dn(x: f64, alpha: f64) -> f64 {
    x.cos() + alpha * x - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1(f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
        // sixth-order central difference
        let h = 1e-3;
        (45.0 * (f(x + h) - f(x - h)) - 9.0 * (f(x + 2.0 * h) - f(x - 2.0 * h)) + (f(x + 3.0 * h) - f(x - 3.0 * h))) / (60.0 * h)
    }

    fn d2(f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-3;
        (-49.0 / 18.0 * f(x) + 1.5 * (f(x + h) + f(x - h)) - 0.15 * (f(x + 2.0 * h) + f(x - 2.0 * h))
            + (f(x + 3.0 * h) + f(x - 3.0 * h)) / 90.0)
            / (h * h)
    }

    /// Composite Gauss-Legendre (5 point) integral.
    fn quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let nodes = [0.0, -0.538_469_310_105_683, 0.538_469_310_105_683, -0.906_179_845_938_664, 0.906_179_845_938_664];
        let weights = [0.568_888_888_888_889, 0.478_628_670_499_366, 0.478_628_670_499_366, 0.236_926_885_056_189, 0.236_926_885_056_189];
        let w = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let c = a + (p as f64 + 0.5) * w;
                nodes.iter().zip(&weights).map(|(n, wt)| wt * f(c + 0.5 * w * n)).sum::<f64>() * 0.5 * w
            })
            .sum()
    }

    #[test]
    fn same_flux_exact_examples() {
        let c = Case1DSameFlux::new(1, 1.0, 1e-8).unwrap();
        assert!((exact_1d_same_flux(0.0, &c) - (1.0 - PI / 2.0)).abs() < 1e-15);
        assert!((exact_1d_same_flux(0.0, &c) + 0.570796).abs() < 1e-6);
        let c2 = Case1DSameFlux::new(2, 0.0, 1e-8).unwrap();
        assert!((exact_1d_same_flux(PI / 2.0, &c2) + 1.0).abs() < 1e-15);
        for case in [c, c2] {
            assert!(quad(&|x| exact_1d_same_flux(x, &case), 0.0, PI, 64).abs() < 1e-13);
            let f = |x| exact_1d_same_flux(x, &case);
            for x in [0.3, 1.0, 2.5] {
                assert!((-d2(&f, x) - case.source(x)).abs() < 1e-6);
            }
            assert!((d1(&f, 0.0) - case.alpha).abs() < 1e-9);
            assert!((d1(&f, PI) - case.alpha).abs() < 1e-9);
        }
        assert!(Case1DSameFlux::new(0, 1.0, 1e-2).is_err());
        assert!(Case1DSameFlux::new(1, 1.0, 0.0).is_err());
    }

    #[test]
    fn a1_coefficient_example() {
        let c = Case1DSameFlux::new(1, 1.0, 1e-2).unwrap().coefficients();
        assert!((c.a1 - (1.0 + 0.02 / PI) / 1.01).abs() < 1e-15);
    }

    fn check_piecewise(v: &dyn Fn(f64) -> f64, beta: &dyn Fn(f64) -> f64, eta: f64) {
        // C0 continuity at pi and at 0 = 2pi
        assert!((v(PI) - v(PI + 1e-12)).abs() < 1e-10);
        assert!((v(0.0) - v(2.0 * PI - 1e-12)).abs() < 1e-10);
        // flux relation with one-sided sixth-order differences
        let h = 1e-3;
        let right_d = |x: f64| {
            (-147.0 * v(x) + 360.0 * v(x + h) - 450.0 * v(x + 2.0 * h) + 400.0 * v(x + 3.0 * h) - 225.0 * v(x + 4.0 * h)
                + 72.0 * v(x + 5.0 * h)
                - 10.0 * v(x + 6.0 * h))
                / (60.0 * h)
        };
        let left_d = |x: f64| {
            (147.0 * v(x) - 360.0 * v(x - h) + 450.0 * v(x - 2.0 * h) - 400.0 * v(x - 3.0 * h) + 225.0 * v(x - 4.0 * h)
                - 72.0 * v(x - 5.0 * h)
                + 10.0 * v(x - 6.0 * h))
                / (60.0 * h)
        };
        // x = pi: fluid on the left; x = 0: fluid on the right, solid wraps from 2pi
        let at_pi = left_d(PI) - (eta * right_d(PI + 1e-13) + beta(PI));
        let at_0 = right_d(0.0) - (eta * left_d(2.0 * PI - 1e-13) + beta(0.0));
        assert!(at_pi.abs() < 1e-8, "flux at pi: {at_pi}");
        assert!(at_0.abs() < 1e-8, "flux at 0: {at_0}");
        // zero fluid mean
        assert!(quad(v, 0.0, PI, 64).abs() < 1e-12);
    }

    #[test]
    fn penalized_same_flux_satisfies_interface_relations() {
        for m in 1..=4 {
            for (alpha, eta) in [(1.0, 1e-2), (0.3, 1e-1), (-2.0, 0.5)] {
                let case = Case1DSameFlux::new(m, alpha, eta).unwrap();
                check_piecewise(&|x| penalized_1d_same_flux(x, &case), &|_| alpha, eta);
            }
        }
    }

    #[test]
    fn penalized_diff_flux_satisfies_interface_relations() {
        for m in [1, 3, 5] {
            for (alpha, eta) in [(1.0, 1e-2), (0.0, 0.3)] {
                let case = Case1DDiffFlux::new(m, alpha, eta).unwrap();
                check_piecewise(&|x| penalized_1d_diff_flux(x, &case), &|x| case.beta(x), eta);
            }
        }
        assert!(Case1DDiffFlux::new(2, 1.0, 1e-2).is_err());
    }

    #[test]
    fn penalized_eps_mix_satisfies_interface_relations() {
        for eps in [0.0, 0.01, 0.5, 1.0] {
            for (alpha, eta) in [(1.0, 1e-2), (0.4, 0.2)] {
                let case = CaseEpsMix::new(eps, alpha, eta).unwrap();
                check_piecewise(&|x| penalized_eps_mix(x, &case), &|x| case.beta(x), eta);
                // the fluid branch solves the PDE
                let f = |x| penalized_eps_mix(x, &case);
                assert!((-d2(&f, 1.3) - case.source(1.3)).abs() < 1e-6);
                assert!(d2(&f, 4.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn eps_mix_reduces_to_same_flux() {
        for eta in [1e-1, 1e-4] {
            let e = CaseEpsMix::new(0.0, 0.7, eta).unwrap();
            let s = Case1DSameFlux::new(1, 0.7, eta).unwrap();
            for x in [0.0, 0.5, 2.0, 3.5, 6.0] {
                assert!((exact_eps_mix(x, &e) - exact_1d_same_flux(x, &s)).abs() < 1e-14);
                assert!((penalized_eps_mix(x, &e) - penalized_1d_same_flux(x, &s)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn penalized_forms_converge_to_exact() {
        for x in [0.0, 0.7, 2.0, PI] {
            let s = Case1DSameFlux::new(3, 1.0, 1e-12).unwrap();
            assert!((penalized_1d_same_flux(x, &s) - exact_1d_same_flux(x, &s)).abs() < 1e-10);
            let d = Case1DDiffFlux::new(1, 1.0, 1e-12).unwrap();
            assert!((penalized_1d_diff_flux(x, &d) - exact_1d_diff_flux(x, &d)).abs() < 1e-10);
            let e = CaseEpsMix::new(0.3, 1.0, 1e-12).unwrap();
            assert!((penalized_eps_mix(x, &e) - exact_eps_mix(x, &e)).abs() < 1e-10);
        }
    }

    #[test]
    fn even_m_zero_alpha_is_exact_for_any_eta() {
        for eta in [1e-1, 1e-3, 0.9] {
            let c = Case1DSameFlux::new(2, 0.0, eta).unwrap();
            for x in [0.0, 0.4, 1.7, PI] {
                assert!((penalized_1d_same_flux(x, &c) - exact_1d_same_flux(x, &c)).abs() < 1e-14);
            }
            assert_eq!(penalization_error_1d(&c), 0.0);
        }
    }

    #[test]
    fn penalization_error_is_first_order_in_eta() {
        let err = |eta| penalization_error_1d(&Case1DSameFlux::new(1, 1.0, eta).unwrap());
        let r = err(1e-3) / err(1e-2);
        assert!((r - 0.1).abs() < 0.015, "{r}");
        let c = Case1DSameFlux::new(1, 1.0, 1e-2).unwrap();
        for x in [0.1, 0.9, 1.4] {
            let d = |x| (penalized_1d_same_flux(x, &c) - exact_1d_same_flux(x, &c)).abs();
            assert!((d(x) - d(PI - x)).abs() < 1e-14);
        }
        // the maximum sits at the fluid boundary
        let worst = (0..=100).map(|i| {
            let x = PI * i as f64 / 100.0;
            (penalized_1d_same_flux(x, &c) - exact_1d_same_flux(x, &c)).abs()
        });
        assert!((worst.fold(0.0, f64::max) - penalization_error_1d(&c)).abs() < 1e-15);
    }

    #[test]
    fn fourier_coefficients_match_quadrature() {
        for m in 1..=4 {
            for (alpha, eta) in [(1.0, 1e-2), (0.3, 0.2)] {
                let case = Case1DSameFlux::new(m, alpha, eta).unwrap();
                for k in -9i64..=9 {
                    let kf = k as f64;
                    // split at pi where v has a kink
                    let re = |x: f64| penalized_1d_same_flux(x, &case) * (kf * x).cos();
                    let im = |x: f64| -penalized_1d_same_flux(x, &case) * (kf * x).sin();
                    let q = Complex64::new(
                        quad(&re, 0.0, PI, 200) + quad(&re, PI, 2.0 * PI, 200),
                        quad(&im, 0.0, PI, 200) + quad(&im, PI, 2.0 * PI, 200),
                    ) / (2.0 * PI);
                    let f = fourier_coeff_penalized(k, &case);
                    assert!((q - f).norm() < 1e-11, "m={m} k={k}: {q} vs {f}");
                }
            }
        }
    }

    #[test]
    fn fourier_examples_and_decay() {
        let even = Case1DSameFlux::new(2, 1.0, 1e-2).unwrap();
        assert_eq!(fourier_coeff_penalized(4, &even), Complex64::new(0.0, 0.0));
        assert_eq!(fourier_coeff_penalized(2, &even), Complex64::new(0.25, 0.0));
        let odd = Case1DSameFlux::new(1, 1.0, 1e-2).unwrap();
        let ratio_odd = fourier_coeff_penalized(101, &odd).norm() / fourier_coeff_penalized(201, &odd).norm();
        assert!((ratio_odd - (201.0f64 / 101.0).powi(2)).abs() < 0.05);
        let ratio_even = fourier_coeff_penalized(100, &odd).norm() / fourier_coeff_penalized(200, &odd).norm();
        assert!((ratio_even - 8.0).abs() < 0.05);
    }

    #[test]
    fn diff_flux_examples() {
        let c = Case1DDiffFlux::new(1, 1.0, 1e-8).unwrap();
        assert!((exact_1d_diff_flux(PI / 2.0, &c) - (1.0 - 2.0 / PI)).abs() < 1e-15);
        assert!(quad(&|x| exact_1d_diff_flux(x, &c), 0.0, PI, 64).abs() < 1e-13);
        let f = |x| exact_1d_diff_flux(x, &c);
        assert!((d1(&f, 0.0) - 2.0).abs() < 1e-9);
        assert!((d1(&f, PI) - 0.0).abs() < 1e-9);
        // alpha = 0: independent of eta
        let a = Case1DDiffFlux::new(3, 0.0, 1e-1).unwrap();
        let b = Case1DDiffFlux::new(3, 0.0, 1e-6).unwrap();
        for x in [0.2, 2.0, 5.0] {
            assert_eq!(penalized_1d_diff_flux(x, &a), penalized_1d_diff_flux(x, &b));
        }
        // derivative gap constant in the fluid and O(eta)
        let p = Case1DDiffFlux::new(1, 1.0, 1e-2).unwrap();
        let gap = |x| d1(&|y| penalized_1d_diff_flux(y, &p), x) - d1(&|y| exact_1d_diff_flux(y, &p), x);
        assert!((gap(0.5) - gap(2.5)).abs() < 1e-9);
        assert!((gap(0.5).abs() - 1e-2 / 1.01).abs() < 1e-9);
    }

    #[test]
    fn square_examples() {
        assert_eq!(exact_2d_square(PI, PI / 2.0, 0.0, 0.0), PI.sin() * PI.cos());
        assert!(exact_2d_square(PI, PI / 2.0, 0.0, 0.0).abs() < 1e-15);
        let lap = |x: f64, y: f64| {
            let fx = |s| exact_2d_square(s, y, 2.0, 1.0);
            let fy = |s| exact_2d_square(x, s, 2.0, 1.0);
            d2(&fx, x) + d2(&fy, y)
        };
        assert!((-lap(2.0, 3.5) - square_source(2.0, 3.5)).abs() < 1e-6);
        let inner = |y: f64| quad(&|x| exact_2d_square(x, y, 2.0, 1.0), PI / 2.0, 1.5 * PI, 16);
        assert!(quad(&inner, PI / 2.0, 1.5 * PI, 16).abs() < 1e-12);
    }

    #[test]
    fn annulus_examples() {
        assert!((annulus_constant(0.0)).abs() == 0.0);
        assert!((exact_2d_annulus(1.0, 0.0).unwrap() - 4.0f64.cos()).abs() < 1e-15);
        let f = |r: f64| exact_2d_annulus(r.clamp(ANNULUS_R_IN, ANNULUS_R_OUT), 1.0).unwrap();
        let inner = |r: f64| exact_2d_annulus(r, 1.0).unwrap();
        let h = 1e-4;
        let dr_in = (-3.0 * inner(ANNULUS_R_IN) + 4.0 * inner(ANNULUS_R_IN + h) - inner(ANNULUS_R_IN + 2.0 * h)) / (2.0 * h);
        let dr_out = (3.0 * inner(ANNULUS_R_OUT) - 4.0 * inner(ANNULUS_R_OUT - h) + inner(ANNULUS_R_OUT - 2.0 * h)) / (2.0 * h);
        assert!((dr_in - 3.0).abs() < 1e-5, "{dr_in}");
        assert!((dr_out - 1.0).abs() < 1e-5, "{dr_out}");
        assert!(quad(&|r| r * f(r), ANNULUS_R_IN, ANNULUS_R_OUT, 64).abs() < 1e-12);
        // -(1/r)(r w')' = source
        for r in [1.0, 1.5, 2.2] {
            let lap = d2(&f, r) + d1(&f, r) / r;
            assert!((-lap - annulus_source(r)).abs() < 1e-6);
        }
        assert!(exact_2d_annulus(0.5, 1.0).is_err());
        assert!(exact_2d_annulus(2.5, 1.0).is_err());
    }

    #[test]
    fn annulus_beta_examples() {
        let mag = |r: f64| {
            let b = annulus_beta(PI + r, PI, 1.0);
            b[0].hypot(b[1])
        };
        assert!((mag(PI / 4.0) - 3.0).abs() < 1e-13);
        assert!((mag(0.75 * PI) - 1.0).abs() < 1e-13);
        assert_eq!(mag(PI), 0.0);
        assert_eq!(annulus_beta(PI, PI, 1.0), [0.0, 0.0]);
        // divergence against a numerical one
        for (x, y) in [(PI + 0.3, PI - 0.2), (PI - 1.5, PI + 1.0), (1.0, 4.0)] {
            let h = 1e-5;
            let num = (annulus_beta(x + h, y, 0.7)[0] - annulus_beta(x - h, y, 0.7)[0] + annulus_beta(x, y + h, 0.7)[1]
                - annulus_beta(x, y - h, 0.7)[1])
                / (2.0 * h);
            assert!((num - annulus_beta_divergence(x, y, 0.7)).abs() < 1e-7, "{num}");
        }
    }

    #[test]
    fn heat_and_mixed_examples() {
        assert_eq!(exact_heat(1.2, 0.0), 1.2f64.sin());
        assert!((exact_heat(0.5, 1.0) - (-1.0f64).exp() * 0.5f64.sin()).abs() < 1e-16);
        assert_eq!(exact_mixed_dn(0.0, 2.0), 0.0);
        let f = |x| exact_mixed_dn(x, 2.0);
        assert!((d1(&f, PI) - 2.0).abs() < 1e-9);
        assert!((-d2(&f, 1.0) - 1.0f64.cos()).abs() < 1e-6);
    }
}
