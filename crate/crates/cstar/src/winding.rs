//! Argument-principle preimage counting on annuli.
//!
//! The number of solutions of `f(z) = w` inside an annulus equals the net
//! winding of `f - w` around its boundary. For exponential-type maps the
//! phase of `f` sweeps through astronomically many turns along one circle,
//! so blind quadrature of `f'/(f - w)` cannot resolve the integral. Instead
//! each circle is split by the smooth function `log |f| - log |w|` into
//!
//! * arcs with `|f| >= 2 |w|`, where `arg(f - w) = arg f + arg(1 - w/f)`
//!   and the second term stays in `(-pi/2, pi/2)`: the contribution is the
//!   exact unreduced phase difference of `f` plus a principal-value
//!   correction at the endpoints;
//! * arcs with `|f| <= |w| / 2`, handled symmetrically through
//!   `f - w = -w (1 - f/w)`;
//! * thin transition zones, where the argument of `1 - w/f` is tracked
//!   continuously with derivative-controlled steps.
//!
//! The unreduced phase is exact up to `f64` rounding of `Im(g + h)`, so the
//! result carries an explicit error estimate; a count is only reported when
//! the total winding is within 0.1 of an integer and the estimate allows it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::map::{normalize_angle, CStarMap};

use std::f64::consts::{LN_2, PI};

/// A target value in log-polar form; the modulus may be far outside `f64`
/// range as a raw number.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LogTarget {
    pub log_mod: f64,
    pub arg: f64,
}

/// Net boundary winding of `f - w` over an annulus, in turns.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindingOutcome {
    /// `(winding(outer) - winding(inner)) / 2 pi`.
    pub turns: f64,
    /// Absolute error estimate on `turns`.
    pub err_est: f64,
    /// Rounded count when certified within 0.1 of an integer, else `None`.
    pub count: Option<i64>,
    pub inconclusive: Option<String>,
}

/// Monotone decomposition of `log |f|` along one circle, reused across
/// targets.
#[derive(Clone, Debug)]
pub struct CircleGeometry {
    pub log_r: f64,
    /// Angles of the local extrema of `log |f(r e^{i theta})|`, bracketed by
    /// `-pi` and `pi`; `log |f|` is monotone between consecutive knots.
    knots: Vec<f64>,
    /// Largest `|phase|` encountered, for the error estimate.
    phase_scale: f64,
}

const SCAN: usize = 2048;

impl CircleGeometry {
    pub fn build(map: &CStarMap, log_r: f64) -> Result<Self> {
        let mut knots = vec![-PI];
        let step = 2.0 * PI / SCAN as f64;
        let mut prev_theta = -PI;
        let mut prev = map.circle_funcs(log_r, prev_theta)?;
        let mut phase_scale = prev.phase.abs();
        for i in 1..=SCAN {
            let theta = -PI + step * i as f64;
            let cur = map.circle_funcs(log_r, theta)?;
            phase_scale = phase_scale.max(cur.phase.abs());
            if prev.d_log_mod == 0.0 || prev.d_log_mod.signum() != cur.d_log_mod.signum() {
                // Bisect the derivative sign change.
                let mut a = prev_theta;
                let mut b = theta;
                let mut fa = prev.d_log_mod;
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    let fm = map.circle_funcs(log_r, mid)?.d_log_mod;
                    if fm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if fa.signum() != fm.signum() {
                        b = mid;
                    } else {
                        a = mid;
                        fa = fm;
                    }
                }
                let root = 0.5 * (a + b);
                if root > *knots.last().unwrap() + 1e-13 && root < PI - 1e-13 {
                    knots.push(root);
                }
            }
            prev = cur;
            prev_theta = theta;
        }
        knots.push(PI);
        Ok(CircleGeometry {
            log_r,
            knots,
            phase_scale,
        })
    }
}

enum Regime {
    Above,
    Below,
    Mid,
}

/// Net change of `arg(f - w)` around the circle, in radians, with an error
/// estimate. `Err(String)` marks an inconclusive evaluation (target too
/// close to the image of the contour), which is reported, not fatal.
fn circle_winding(
    map: &CStarMap,
    geom: &CircleGeometry,
    w: LogTarget,
) -> Result<std::result::Result<(f64, f64), String>> {
    let log_r = geom.log_r;
    let s_at = |theta: f64| -> Result<(f64, f64)> {
        let c = map.circle_funcs(log_r, theta)?;
        Ok((c.log_mod - w.log_mod, c.phase))
    };
    // u(theta) = 1 - w / f(theta), well-scaled in the mid regime.
    let u_at = |theta: f64| -> Result<Complex64> {
        let (s, ph) = s_at(theta)?;
        let q_abs = (-s).exp();
        let q_arg = normalize_angle(w.arg - normalize_angle(ph));
        Ok(Complex64::new(1.0, 0.0) - Complex64::from_polar(q_abs, q_arg))
    };
    // v(theta) = 1 - f(theta) / w, the symmetric factor deep below.
    let v_at = |theta: f64| -> Result<Complex64> {
        let (s, ph) = s_at(theta)?;
        let inv_abs = s.exp();
        let inv_arg = normalize_angle(normalize_angle(ph) - w.arg);
        Ok(Complex64::new(1.0, 0.0) - Complex64::from_polar(inv_abs, inv_arg))
    };

    // Split every monotone piece at the crossings of s = +-ln 2.
    let mut cuts: Vec<f64> = Vec::new();
    for win in geom.knots.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b - a < 1e-13 {
            continue;
        }
        cuts.push(a);
        let sa = s_at(a)?.0;
        let sb = s_at(b)?.0;
        for target in [-LN_2, LN_2] {
            if (sa - target).signum() != (sb - target).signum() {
                let mut lo = a;
                let mut hi = b;
                let mut flo = sa - target;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let fm = s_at(mid)?.0 - target;
                    if flo.signum() != fm.signum() {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                    if hi - lo < 1e-13 {
                        break;
                    }
                }
                cuts.push(0.5 * (lo + hi));
            }
        }
    }
    cuts.push(PI);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);

    // Winding of f - w = f * (1 - q): the arg f part contributes exactly
    // 2 pi n around the circle; the rest is the net change of arg(1 - q),
    // summed segment by segment. Per-segment net changes of a continuous
    // argument are branch-independent, so the pieces chain without any
    // joint bookkeeping.
    let mut winding = 2.0 * PI * map.index_n as f64;
    let mut err = 4.0 * f64::EPSILON * geom.phase_scale.max(w.arg.abs());
    let mut steps = 0usize;
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b - a < 1e-13 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let s_mid = s_at(mid)?.0;
        let regime = if s_mid >= LN_2 - 1e-9 {
            Regime::Above
        } else if s_mid <= -LN_2 + 1e-9 {
            Regime::Below
        } else {
            Regime::Mid
        };
        match regime {
            Regime::Above => {
                // u stays in D(1, 1/2 + eps), inside the right half-plane,
                // so the continuous change equals the principal difference.
                let ua = u_at(a)?;
                let ub = u_at(b)?;
                winding += ub.arg() - ua.arg();
            }
            Regime::Below => {
                // arg(1 - q) = arg(-q) + arg(1 - 1/q). The first term has
                // continuous representative pi + arg w - ph(theta), whose
                // net change ph(a) - ph(b) is exact in the unreduced phase;
                // the second stays in D(1, 1/2 + eps).
                let (_, ph_a) = s_at(a)?;
                let (_, ph_b) = s_at(b)?;
                winding += ph_a - ph_b;
                let va = v_at(a)?;
                let vb = v_at(b)?;
                winding += vb.arg() - va.arg();
                err += 4.0 * f64::EPSILON * ph_a.abs().max(ph_b.abs());
            }
            Regime::Mid => match track_mid(map, geom, w, a, b, &mut steps)? {
                Ok((delta, e)) => {
                    winding += delta;
                    err += e;
                }
                Err(msg) => return Ok(Err(msg)),
            },
        }
    }
    Ok(Ok((winding, err + 1e-12 * steps as f64)))
}

/// Continuous tracking of `arg(1 - w/f)` across a transition zone, with
/// steps bounded by the instantaneous rotation rate of `u = 1 - q`.
fn track_mid(
    map: &CStarMap,
    geom: &CircleGeometry,
    w: LogTarget,
    a: f64,
    b: f64,
    steps_total: &mut usize,
) -> Result<std::result::Result<(f64, f64), String>> {
    let log_r = geom.log_r;
    let u_of = |theta: f64| -> Result<(Complex64, f64)> {
        let c = map.circle_funcs(log_r, theta)?;
        let s = c.log_mod - w.log_mod;
        let q_abs = (-s).exp();
        let q_arg = normalize_angle(w.arg - normalize_angle(c.phase));
        let u = Complex64::new(1.0, 0.0) - Complex64::from_polar(q_abs, q_arg);
        // |u'| <= |q| * |s' + i ph'|.
        let rate = q_abs * (c.d_log_mod.hypot(c.d_phase)).max(1e-12);
        Ok((u, rate))
    };

    let mut theta = a;
    let (mut u_prev, mut rate) = u_of(a)?;
    let mut delta = 0.0f64;
    let mut err = 0.0f64;
    let mut steps = 0usize;
    while theta < b {
        if u_prev.norm() < 1e-9 {
            return Ok(Err(format!(
                "target passes within 1e-9 of the contour image at theta {theta:.6}"
            )));
        }
        // Steps are bounded by the instantaneous rotation rate of u; the
        // floor guarantees progress when the zone is thinner than the
        // angular resolution of f64.
        let floor = 1e-15 * (1.0 + theta.abs());
        let mut h = (0.5 * u_prev.norm() / rate).min(b - theta).max(floor);
        loop {
            let theta_next = if theta + h >= b { b } else { theta + h };
            let (u_next, rate_next) = u_of(theta_next)?;
            if u_next.norm() < 1e-12 {
                return Ok(Err(format!(
                    "target meets the contour image near theta {theta_next:.6}"
                )));
            }
            let dphi = (u_next / u_prev).arg();
            if dphi.abs() <= 0.9 || h <= floor {
                delta += dphi;
                err += 4.0 * f64::EPSILON;
                theta = theta_next;
                u_prev = u_next;
                rate = rate_next;
                break;
            }
            h = (h * 0.5).max(floor);
        }
        steps += 1;
        *steps_total += 1;
        if steps > 2_000_000 {
            return Ok(Err("transition-zone tracking exceeded its step budget".into()));
        }
    }
    Ok(Ok((delta, err + 1e-13 * steps as f64)))
}

/// Count preimages of `w` in the annulus bounded by the two circles, by the
/// winding of `f - w` over the boundary (outer counterclockwise, inner
/// clockwise).
pub fn count_preimages(
    map: &CStarMap,
    inner: &CircleGeometry,
    outer: &CircleGeometry,
    w: LogTarget,
) -> Result<WindingOutcome> {
    let wo = circle_winding(map, outer, w)?;
    let wi = circle_winding(map, inner, w)?;
    let (wo, eo) = match wo {
        Ok(v) => v,
        Err(msg) => {
            return Ok(WindingOutcome {
                turns: f64::NAN,
                err_est: f64::INFINITY,
                count: None,
                inconclusive: Some(msg),
            })
        }
    };
    let (wi, ei) = match wi {
        Ok(v) => v,
        Err(msg) => {
            return Ok(WindingOutcome {
                turns: f64::NAN,
                err_est: f64::INFINITY,
                count: None,
                inconclusive: Some(msg),
            })
        }
    };
    let turns = (wo - wi) / (2.0 * PI);
    let err_est = (eo + ei) / (2.0 * PI);
    let rounded = turns.round();
    let certified = (turns - rounded).abs() <= 0.1
        && err_est <= 0.1
        && rounded.abs() < 9.0e15
        && rounded >= 0.0;
    Ok(WindingOutcome {
        turns,
        err_est,
        count: if certified { Some(rounded as i64) } else { None },
        inconclusive: if certified {
            None
        } else {
            Some(format!(
                "winding {turns:.6} (err {err_est:.2e}) is not within 0.1 of a nonnegative integer"
            ))
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_map;

    fn test_map() -> CStarMap {
        parse_map("n=0; g=1z; h=-1w").unwrap()
    }

    /// Independent oracle for the test map: solutions of exp(z - 1/z) = w
    /// satisfy z - 1/z = log|w| + i(arg w + 2 pi k); each branch gives a
    /// quadratic whose roots multiply to -1, so exactly one root has
    /// |z| > 1. Count the roots with log|z| inside the band.
    fn brute_count(log_lo: f64, log_hi: f64, w: LogTarget) -> i64 {
        let mut count = 0;
        let k_cap = ((log_hi.exp() + w.log_mod.abs()) / (2.0 * PI)).ceil() as i64 + 4;
        for k in -k_cap..=k_cap {
            let c = Complex64::new(w.log_mod, w.arg + 2.0 * PI * k as f64);
            let disc = (c * c + Complex64::new(4.0, 0.0)).sqrt();
            for root in [(c + disc) / 2.0, (c - disc) / 2.0] {
                let l = root.norm().ln();
                if l >= log_lo && l <= log_hi {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn matches_brute_force_at_small_radii() {
        let map = test_map();
        let inner = CircleGeometry::build(&map, 0.3504).unwrap();
        let outer = CircleGeometry::build(&map, 2.3504).unwrap();
        for (log_mod, arg) in [(2.6, 0.7), (3.0, -1.2), (1.7, 2.9), (2.0, 0.0)] {
            let w = LogTarget { log_mod, arg };
            let got = count_preimages(&map, &inner, &outer, w).unwrap();
            let want = brute_count(0.3504, 2.3504, w);
            assert_eq!(
                got.count,
                Some(want),
                "target {log_mod},{arg}: turns {} err {}",
                got.turns,
                got.err_est
            );
        }
    }

    #[test]
    fn zero_preimages_when_target_unreachable() {
        // |w| far above M(outer radius): no solutions in the annulus.
        let map = test_map();
        let inner = CircleGeometry::build(&map, 0.2).unwrap();
        let outer = CircleGeometry::build(&map, 1.0).unwrap();
        let w = LogTarget {
            log_mod: 50.0,
            arg: 0.3,
        };
        let got = count_preimages(&map, &inner, &outer, w).unwrap();
        assert_eq!(got.count, Some(0));
    }

    #[test]
    fn huge_winding_is_certified() {
        // The acceptance-scale case: annulus around mu(R_+) for log R_+ = 3;
        // targets near 1.865e8 in log-modulus have ~1.5e8 preimages.
        let map = test_map();
        let core = -1.0 + 2.0 * 3f64.sinh();
        let inner = CircleGeometry::build(&map, core - 1.0).unwrap();
        let outer = CircleGeometry::build(&map, core + 1.0).unwrap();
        let log_w = 2.0 * core.sinh() - 1.0; // core of the next band
        let w = LogTarget {
            log_mod: log_w,
            arg: 1.1,
        };
        let got = count_preimages(&map, &inner, &outer, w).unwrap();
        let count = got.count.expect("winding should certify");
        assert!(count > 100_000_000, "count {count}");
        // Analytic estimate: branches k with Re = log|w| fitting inside the
        // outer radius: about sqrt(R^2 - log|w|^2) / pi of them.
        let r_out = (core + 1.0).exp();
        let expected = (r_out * r_out - log_w * log_w).sqrt() / PI;
        let rel = (count as f64 - expected).abs() / expected;
        assert!(rel < 1e-3, "count {count} vs estimate {expected}");
    }

    #[test]
    fn arnold_counts_are_integers() {
        let map = CStarMap::arnold(0.4, 1.5).unwrap();
        let inner = CircleGeometry::build(&map, 1.0).unwrap();
        let outer = CircleGeometry::build(&map, 2.0).unwrap();
        for arg in [0.0, 1.0, -2.0] {
            let w = LogTarget { log_mod: 4.0, arg };
            let got = count_preimages(&map, &inner, &outer, w).unwrap();
            let c = got.count.expect("should certify");
            assert!(c >= 0);
        }
    }
}
