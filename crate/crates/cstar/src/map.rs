//! Self-maps of the punctured plane of the form `z^n exp(g(z) + h(1/z))`
//! with polynomial `g`, `h`, evaluated in log-polar coordinates so that
//! iterates can leave the range of `f64` moduli without overflowing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A point of the punctured plane in log-polar coordinates:
/// `z = exp(l + i theta)` with `theta` normalized to `[-pi, pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPoint {
    pub l: f64,
    pub theta: f64,
}

impl LogPoint {
    pub fn new(l: f64, theta: f64) -> Self {
        LogPoint {
            l,
            theta: normalize_angle(theta),
        }
    }

    /// Conjugate point; in log-polar this is `theta -> -theta`.
    pub fn conj(self) -> Self {
        LogPoint::new(self.l, -self.theta)
    }
}

/// Normalize an angle to `[-pi, pi)`, with ties at `pi` mapped to `-pi`.
/// In-range angles pass through unchanged, so normalization is idempotent
/// and conjugation stays bit-exact.
pub fn normalize_angle(theta: f64) -> f64 {
    if theta.is_nan() || (-PI..PI).contains(&theta) {
        return theta;
    }
    let mut t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can round up to exactly 2*pi for tiny negative inputs.
    if t >= PI {
        t -= 2.0 * PI;
    }
    t
}

/// Default horizon scale: `L_max = 300 / max(deg g, deg h)` keeps every
/// monomial below `exp(300)` and therefore inside `f64` range.
const HORIZON_SCALE: f64 = 300.0;

/// A concrete transcendental self-map of the punctured plane,
/// `f(z) = rot * z^n * exp(g(z) + h(1/z))`, where `g` and `h` are
/// non-constant polynomials without constant term and `|rot| = 1`.
///
/// The rotation factor is stored as its angle so that maps built from the
/// same parameters compare bit-for-bit equal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CStarMap {
    /// Exponent of the `z^n` factor.
    pub index_n: i32,
    /// Angle of the unit-modulus rotation factor, radians.
    pub rot_angle: f64,
    /// Coefficients of `g`, `g_coeffs[j]` multiplying `z^(j+1)`.
    pub g_coeffs: Vec<Complex64>,
    /// Coefficients of `h`, `h_coeffs[j]` multiplying `w^(j+1)` with `w = 1/z`.
    pub h_coeffs: Vec<Complex64>,
    /// Display label; parsed maps carry their canonical spec string.
    pub label: String,
    /// Horizon `L_max`: evaluation requires `|log r| <= horizon`.
    pub horizon: f64,
}

impl CStarMap {
    pub fn new(
        index_n: i32,
        rot_angle: f64,
        g_coeffs: Vec<Complex64>,
        h_coeffs: Vec<Complex64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let nonconstant = |c: &[Complex64]| c.iter().any(|v| v.norm_sqr() != 0.0);
        if !nonconstant(&g_coeffs) {
            return Err(Error::InvalidParameter("g must be non-constant".into()));
        }
        if !nonconstant(&h_coeffs) {
            return Err(Error::InvalidParameter("h must be non-constant".into()));
        }
        if !rot_angle.is_finite() {
            return Err(Error::InvalidParameter("rotation angle must be finite".into()));
        }
        let mut map = CStarMap {
            index_n,
            rot_angle: normalize_angle(rot_angle),
            g_coeffs,
            h_coeffs,
            label: label.into(),
            horizon: 0.0,
        };
        map.horizon = HORIZON_SCALE / map.degree() as f64;
        Ok(map)
    }

    /// Complexified Arnol'd standard map `z e^{i alpha} e^{beta (z - 1/z) / 2}`.
    pub fn arnold(alpha: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "arnold requires beta > 0, got {beta}"
            )));
        }
        let half = Complex64::new(beta / 2.0, 0.0);
        let mut map = CStarMap::new(1, alpha, vec![half], vec![-half], "")?;
        map.label = map
            .canonical_spec()
            .unwrap_or_else(|| format!("arnold({alpha}, {beta})"));
        Ok(map)
    }

    /// `max(deg g, deg h)`, at least 1 by the non-constant invariant.
    pub fn degree(&self) -> usize {
        let deg = |c: &[Complex64]| {
            c.iter()
                .rposition(|v| v.norm_sqr() != 0.0)
                .map(|i| i + 1)
                .unwrap_or(0)
        };
        deg(&self.g_coeffs).max(deg(&self.h_coeffs)).max(1)
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    fn check_horizon(&self, l: f64) -> Result<()> {
        if !l.is_finite() || l.abs() > self.horizon {
            return Err(Error::HorizonExceeded {
                log_r: l,
                l_max: self.horizon,
            });
        }
        Ok(())
    }

    /// `g(z) + h(1/z)` for `z = exp(l + i theta)`. The caller guarantees the
    /// horizon so each monomial stays below `exp(300)` in modulus.
    fn exponent_sum(&self, l: f64, theta: f64) -> Complex64 {
        let z = Complex64::from_polar(l.exp(), theta);
        let w = Complex64::from_polar((-l).exp(), -theta);
        poly_no_const(&self.g_coeffs, z) + poly_no_const(&self.h_coeffs, w)
    }

    /// One application of the map. Log-modulus of the image is
    /// `n*l + Re(g(z) + h(1/z))`; the argument is
    /// `n*theta + rot_angle + Im(g(z) + h(1/z))`, normalized.
    pub fn eval(&self, z: LogPoint) -> Result<LogPoint> {
        self.check_horizon(z.l)?;
        let s = self.exponent_sum(z.l, z.theta);
        let l = self.index_n as f64 * z.l + s.re;
        let theta = self.index_n as f64 * z.theta + self.rot_angle + s.im;
        if l.is_nan() || theta.is_nan() {
            return Err(Error::NonFinite);
        }
        if l.is_infinite() {
            return Err(Error::HorizonExceeded {
                log_r: l,
                l_max: self.horizon,
            });
        }
        Ok(LogPoint::new(l, normalize_angle(theta)))
    }

    /// Log-modulus of `f` on the circle of log-radius `log_r` at angle
    /// `theta`. Shares the evaluation path of [`eval`](Self::eval) so circle
    /// searches and orbit iterations agree bit-for-bit.
    pub fn log_modulus_at(&self, log_r: f64, theta: f64) -> Result<f64> {
        self.check_horizon(log_r)?;
        let s = self.exponent_sum(log_r, theta);
        let l = self.index_n as f64 * log_r + s.re;
        if l.is_nan() {
            return Err(Error::NonFinite);
        }
        Ok(l)
    }

    /// Logarithmic derivative `f'(z)/f(z) = n/z + g'(z) - h'(1/z)/z^2`.
    pub fn log_derivative(&self, z: LogPoint) -> Result<Complex64> {
        self.check_horizon(z.l)?;
        let zz = Complex64::from_polar(z.l.exp(), z.theta);
        let d = self.log_derivative_times_z(z)? / zz;
        if !d.re.is_finite() || !d.im.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(d)
    }

    /// `z f'(z)/f(z) = n + z g'(z) + sum_j j h_j w^j` with `w = 1/z`.
    ///
    /// This is `d/dtheta` of `-i log f` along circles and stays representable
    /// whenever the point itself is inside the horizon, which makes it the
    /// right building block for boundary winding integrals.
    pub fn log_derivative_times_z(&self, z: LogPoint) -> Result<Complex64> {
        self.check_horizon(z.l)?;
        let zz = Complex64::from_polar(z.l.exp(), z.theta);
        let w = Complex64::from_polar((-z.l).exp(), -z.theta);
        // z g'(z) = sum_j j c_j z^j, and -h'(1/z)/z = -sum_j j d_j w^(j-1) * w^0 ... w^j / w
        // written with w = 1/z: -h'(w) * w = -sum_j j d_j w^j ... sign folded below.
        let mut zg = Complex64::new(0.0, 0.0);
        let mut acc = zz;
        for (j, c) in self.g_coeffs.iter().enumerate() {
            zg += (j as f64 + 1.0) * c * acc;
            acc *= zz;
        }
        let mut hw = Complex64::new(0.0, 0.0);
        let mut accw = w;
        for (j, d) in self.h_coeffs.iter().enumerate() {
            hw += (j as f64 + 1.0) * d * accw;
            accw *= w;
        }
        let d = Complex64::new(self.index_n as f64, 0.0) + zg - hw;
        if d.re.is_nan() || d.im.is_nan() {
            return Err(Error::NonFinite);
        }
        Ok(d)
    }

    /// Log-modulus and unreduced phase of `f` along the circle of log-radius
    /// `log_r`, together with their derivatives in `theta`.
    ///
    /// The phase is *not* reduced modulo 2*pi: for exponential-type maps it
    /// sweeps through astronomically many turns along one circle and the
    /// winding bookkeeping needs the continuous value.
    pub fn circle_funcs(&self, log_r: f64, theta: f64) -> Result<CircleSample> {
        self.check_horizon(log_r)?;
        let s = self.exponent_sum(log_r, theta);
        let log_mod = self.index_n as f64 * log_r + s.re;
        let phase = self.index_n as f64 * theta + self.rot_angle + s.im;
        let d = self.log_derivative_times_z(LogPoint {
            l: log_r,
            theta,
        })?;
        if log_mod.is_nan() || phase.is_nan() {
            return Err(Error::NonFinite);
        }
        Ok(CircleSample {
            log_mod,
            phase,
            d_log_mod: -d.im,
            d_phase: d.re,
        })
    }

    /// Canonical spec string, when the map is expressible in the grammar:
    /// either `arnold(alpha, beta)` or `n=..; g=..; h=..` with real
    /// coefficients and trivial rotation.
    pub fn canonical_spec(&self) -> Option<String> {
        if self.index_n == 1 && self.g_coeffs.len() == 1 && self.h_coeffs.len() == 1 {
            let c = self.g_coeffs[0];
            let d = self.h_coeffs[0];
            if c.im == 0.0 && d.im == 0.0 && c.re > 0.0 && d.re == -c.re {
                return Some(format!("arnold({}, {})", self.rot_angle, 2.0 * c.re));
            }
        }
        if self.rot_angle != 0.0 {
            return None;
        }
        let real = |c: &[Complex64]| c.iter().all(|v| v.im == 0.0);
        if !real(&self.g_coeffs) || !real(&self.h_coeffs) {
            return None;
        }
        Some(format!(
            "n={}; g={}; h={}",
            self.index_n,
            format_poly(&self.g_coeffs, 'z'),
            format_poly(&self.h_coeffs, 'w')
        ))
    }
}

/// One sample of `log |f|` and continuous `arg f` along a circle.
#[derive(Clone, Copy, Debug)]
pub struct CircleSample {
    pub log_mod: f64,
    pub phase: f64,
    pub d_log_mod: f64,
    pub d_phase: f64,
}

/// Evaluate `sum_j c[j] x^(j+1)` by Horner's scheme.
fn poly_no_const(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    let mut p = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        p = p * x + c;
    }
    p * x
}

fn format_poly(coeffs: &[Complex64], var: char) -> String {
    let mut out = String::new();
    for (j, c) in coeffs.iter().enumerate() {
        if c.re == 0.0 {
            continue;
        }
        if !out.is_empty() && c.re > 0.0 {
            out.push('+');
        }
        out.push_str(&format!("{}", c.re));
        out.push(var);
        if j > 0 {
            out.push_str(&format!("^{}", j + 1));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
