//! Maximum and minimum modulus along circles, their relaxed variants and
//! iterates, and grid-certified escape thresholds.
//!
//! All radii and moduli are carried as natural logs; nothing above
//! `exp(L_max)` is ever materialized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::itinerary::{EssSymbol, EssentialItinerary};
use crate::map::CStarMap;

/// Coarse probes per circle before local refinement.
pub const COARSE_PROBES: usize = 1024;
/// Bracket width at which golden-section refinement stops, radians.
pub const GOLDEN_TOL: f64 = 1e-10;
/// Default absolute tolerance (in log scale) requested from circle searches.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Extrema of `log |f|` on one circle.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModulusSample {
    pub log_r: f64,
    /// `log M(r)` and the angle attaining it.
    pub log_max: f64,
    pub theta_max: f64,
    /// `log m(r)` and the angle attaining it.
    pub log_min: f64,
    pub theta_min: f64,
    pub n_probes: u32,
}

/// Maximum modulus `M(r, f)` in log scale, with the minimum computed from
/// the same probe sweep.
pub fn max_modulus(map: &CStarMap, log_r: f64, tol: f64) -> Result<ModulusSample> {
    circle_extrema(map, log_r, tol)
}

/// Minimum modulus `m(r, f)` in log scale; dual of [`max_modulus`].
pub fn min_modulus(map: &CStarMap, log_r: f64, tol: f64) -> Result<ModulusSample> {
    circle_extrema(map, log_r, tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelaxedKind {
    /// `mu(r) = eps * M(r)`
    Mu,
    /// `nu(r) = m(r) / eps`
    Nu,
}

/// `log mu(r)` or `log nu(r)` for `0 < eps < 1`.
pub fn relaxed_modulus(map: &CStarMap, log_r: f64, eps: f64, kind: RelaxedKind) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "relaxation factor must be in (0, 1), got {eps}"
        )));
    }
    let sample = circle_extrema(map, log_r, DEFAULT_TOL)?;
    Ok(match kind {
        RelaxedKind::Mu => eps.ln() + sample.log_max,
        RelaxedKind::Nu => sample.log_min - eps.ln(),
    })
}

/// Both extrema of `log |f(r e^{i theta})|` over `theta`.
///
/// Coarse scan over [`COARSE_PROBES`] equispaced angles, then golden-section
/// refinement of every bracketed local extremum. The number of local optima
/// of a trigonometric polynomial is bounded by twice its degree, so only the
/// best `2 deg + 2` brackets are refined. `tol` is honored down to the `f64`
/// noise floor of the values involved.
pub fn circle_extrema(map: &CStarMap, log_r: f64, tol: f64) -> Result<ModulusSample> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {tol}")));
    }
    let k = COARSE_PROBES;
    let step = 2.0 * std::f64::consts::PI / k as f64;
    let mut probes = 0u32;
    let mut values = Vec::with_capacity(k);
    for i in 0..k {
        let theta = -std::f64::consts::PI + step * i as f64;
        values.push(map.log_modulus_at(log_r, theta)?);
        probes += 1;
    }

    let vmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if vmax == vmin {
        // |f| is constant on this circle.
        return Ok(ModulusSample {
            log_r,
            log_max: vmax,
            theta_max: -std::f64::consts::PI,
            log_min: vmin,
            theta_min: -std::f64::consts::PI,
            n_probes: probes,
        });
    }

    let refine_cap = 2 * map.degree() + 2;
    let theta_of = |i: usize| -std::f64::consts::PI + step * i as f64;

    // Brackets extend one coarse step either side of the candidate; the
    // evaluation is periodic so unwrapped angles below -pi are fine.
    let mut best_max = (f64::NEG_INFINITY, 0.0f64);
    let mut brackets: Vec<(usize, f64)> = Vec::new();
    for i in 0..k {
        let prev = values[(i + k - 1) % k];
        let next = values[(i + 1) % k];
        if values[i] >= prev && values[i] >= next {
            brackets.push((i, values[i]));
        }
    }
    brackets.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    brackets.truncate(refine_cap);
    for &(i, coarse) in &brackets {
        let center = theta_of(i);
        let (theta, value, used) = golden_max(map, log_r, center - step, center + step, tol)?;
        probes += used;
        let (theta, value) = if coarse >= value { (center, coarse) } else { (theta, value) };
        if value > best_max.0 {
            best_max = (value, crate::map::normalize_angle(theta));
        }
    }

    let mut best_min = (f64::INFINITY, 0.0f64);
    let mut brackets: Vec<(usize, f64)> = Vec::new();
    for i in 0..k {
        let prev = values[(i + k - 1) % k];
        let next = values[(i + 1) % k];
        if values[i] <= prev && values[i] <= next {
            brackets.push((i, values[i]));
        }
    }
    brackets.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    brackets.truncate(refine_cap);
    for &(i, coarse) in &brackets {
        let center = theta_of(i);
        let (theta, value, used) = golden_min(map, log_r, center - step, center + step, tol)?;
        probes += used;
        let (theta, value) = if coarse <= value { (center, coarse) } else { (theta, value) };
        if value < best_min.0 {
            best_min = (value, crate::map::normalize_angle(theta));
        }
    }

    Ok(ModulusSample {
        log_r,
        log_max: best_max.0,
        theta_max: best_max.1,
        log_min: best_min.0,
        theta_min: best_min.1,
        n_probes: probes,
    })
}

fn golden_max(
    map: &CStarMap,
    log_r: f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64, u32)> {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let theta_tol = GOLDEN_TOL.min(tol.sqrt().max(1e-12));
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = map.log_modulus_at(log_r, c)?;
    let mut fd = map.log_modulus_at(log_r, d)?;
    let mut probes = 2u32;
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    while b - a > theta_tol && probes < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = map.log_modulus_at(log_r, c)?;
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = map.log_modulus_at(log_r, d)?;
            if fd > best.1 {
                best = (d, fd);
            }
        }
        probes += 1;
    }
    Ok((best.0, best.1, probes))
}

fn golden_min(
    map: &CStarMap,
    log_r: f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64, u32)> {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let theta_tol = GOLDEN_TOL.min(tol.sqrt().max(1e-12));
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = map.log_modulus_at(log_r, c)?;
    let mut fd = map.log_modulus_at(log_r, d)?;
    let mut probes = 2u32;
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    while b - a > theta_tol && probes < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = map.log_modulus_at(log_r, c)?;
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = map.log_modulus_at(log_r, d)?;
            if fd < best.1 {
                best = (d, fd);
            }
        }
        probes += 1;
    }
    Ok((best.0, best.1, probes))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TruncationReason {
    RequestedDepth,
    Horizon,
}

/// The iterated radius sequence `(R_n)` of the fast-escape definition:
/// `R_{n+1} = M(R_n)` on symbol inf and `R_{n+1} = m(R_n)` on symbol 0,
/// carried in log scale and truncated at the horizon.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiusSequence {
    pub itinerary: EssentialItinerary,
    /// `log R_0 .. log R_d`.
    pub log_r: Vec<f64>,
    pub truncated_at: usize,
    pub reason: TruncationReason,
}

impl RadiusSequence {
    pub fn depth(&self) -> usize {
        self.log_r.len() - 1
    }
}

/// Fill the radius sequence until `depth` or until a value leaves the
/// horizon; truncation is a recorded outcome, not an error.
pub fn iterate_radius(
    map: &CStarMap,
    itinerary: &EssentialItinerary,
    log_r0: f64,
    depth: usize,
) -> RadiusSequence {
    let mut log_r = vec![log_r0];
    let mut reason = TruncationReason::RequestedDepth;
    for n in 1..=depth {
        let prev = log_r[n - 1];
        if prev.abs() > map.horizon {
            reason = TruncationReason::Horizon;
            break;
        }
        let sample = match circle_extrema(map, prev, DEFAULT_TOL) {
            Ok(s) => s,
            Err(_) => {
                reason = TruncationReason::Horizon;
                break;
            }
        };
        let next = match itinerary.symbol(n) {
            EssSymbol::Inf => sample.log_max,
            EssSymbol::Zero => sample.log_min,
        };
        if !next.is_finite() {
            reason = TruncationReason::Horizon;
            break;
        }
        log_r.push(next);
    }
    let truncated_at = log_r.len() - 1;
    RadiusSequence {
        itinerary: itinerary.clone(),
        log_r,
        truncated_at,
        reason,
    }
}

/// Grid-certified escape thresholds. `log_r_f` is the smallest tested
/// log-radius above which both `log M > 2 log r` and `-log m > 2 log r`
/// hold on the tested grid, mirrored at small radii. `log_r_plus` and
/// `log_r_minus` additionally demand a 0.5 margin in log scale. The result
/// is a certified-on-grid claim, not a proof for all radii.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Thresholds {
    pub log_r_f: f64,
    pub log_r_plus: f64,
    pub log_r_minus: f64,
}

pub fn find_thresholds(map: &CStarMap, grid: &[f64]) -> Result<Thresholds> {
    let two_decades = 2.0 * std::f64::consts::LN_10;
    if grid.len() < 2 {
        return Err(Error::ThresholdNotFound(
            "scan grid has fewer than two points".into(),
        ));
    }
    let mut sorted: Vec<f64> = grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted[0] <= 0.0 {
        return Err(Error::ThresholdNotFound(
            "scan grid must consist of positive log-radii (each side is mirrored internally)"
                .into(),
        ));
    }
    if sorted[sorted.len() - 1] - sorted[0] < two_decades {
        return Err(Error::ThresholdNotFound(format!(
            "scan grid spans {:.3} in log r, need at least two decades ({:.3})",
            sorted[sorted.len() - 1] - sorted[0],
            two_decades
        )));
    }

    struct Probe {
        p: f64,
        plain: bool,
        plus_margin: bool,
        minus_margin: bool,
    }
    let mut probes = Vec::with_capacity(sorted.len());
    for &p in &sorted {
        let up = circle_extrema(map, p, DEFAULT_TOL)?;
        let dn = circle_extrema(map, -p, DEFAULT_TOL)?;
        let plain = up.log_max > 2.0 * p
            && -up.log_min > 2.0 * p
            && dn.log_max > 2.0 * p
            && -dn.log_min > 2.0 * p;
        let plus_margin = up.log_max > 2.0 * p + 0.5 && -up.log_min > 2.0 * p + 0.5;
        let minus_margin = dn.log_max > 2.0 * p + 0.5 && -dn.log_min > 2.0 * p + 0.5;
        probes.push(Probe {
            p,
            plain,
            plus_margin,
            minus_margin,
        });
    }

    // Smallest grid value such that the plain condition holds from there on.
    let mut log_r_f = None;
    for i in 0..probes.len() {
        if probes[i..].iter().all(|q| q.plain) {
            log_r_f = Some(probes[i].p);
            break;
        }
    }
    let log_r_f = log_r_f.ok_or_else(|| {
        Error::ThresholdNotFound("no tail of the grid satisfies M(r) > r^2 and 1/m(r) > r^2".into())
    })?;

    let log_r_plus = probes
        .iter()
        .find(|q| q.p >= log_r_f && q.plus_margin)
        .map(|q| q.p)
        .ok_or_else(|| {
            Error::ThresholdNotFound("no grid value reaches the 0.5 margin above R(f)".into())
        })?;
    let log_r_minus = probes
        .iter()
        .find(|q| q.p >= log_r_f && q.minus_margin)
        .map(|q| -q.p)
        .ok_or_else(|| {
            Error::ThresholdNotFound("no grid value reaches the 0.5 margin below 1/R(f)".into())
        })?;

    Ok(Thresholds {
        log_r_f,
        log_r_plus,
        log_r_minus,
    })
}

/// Strict six-column CSV of circle extrema, one row per requested radius:
/// `log_r,log_M,theta_max,log_m,theta_min,n_probes`, LF line endings,
/// 17 significant digits.
pub fn modulus_csv(map: &CStarMap, log_radii: &[f64]) -> Result<String> {
    let mut out = String::from("log_r,log_M,theta_max,log_m,theta_min,n_probes\n");
    for &log_r in log_radii {
        let s = circle_extrema(map, log_r, DEFAULT_TOL)?;
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            s.log_r, s.log_max, s.theta_max, s.log_min, s.theta_min, s.n_probes
        ));
    }
    Ok(out)
}

/// `a >= b` up to accumulated rounding in the quantities compared; used for
/// the non-strict comparisons of the fast-escape test and straddle checks
/// where exact equality is meaningful in the underlying construction.
pub fn approx_ge(a: f64, b: f64) -> bool {
    a >= b - 1e-12 * b.abs().max(1.0)
}

pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b + 1e-12 * b.abs().max(1.0)
}
