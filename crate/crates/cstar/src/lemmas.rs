//! Numerical verifiers for the growth, convexity, power and ratio
//! properties of `M(r)` and `m(r)`, and for the comparison between iterated
//! moduli and their relaxed variants. Verdicts are grid-certified claims
//! about the sampled radii, not proofs.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::map::CStarMap;
use crate::modulus::{circle_extrema, relaxed_modulus, RelaxedKind, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    InsufficientData,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "FAIL"),
            Verdict::InsufficientData => write!(f, "insufficient-data"),
        }
    }
}

/// Per-property report. The `_max` entries concern `M(r)`, the `_min`
/// entries the dual statements for `m(r)` with reversed inequalities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthReport {
    /// (i): `log M(r) / log r` grows along the increasing radii tail.
    pub growth_max: Verdict,
    pub growth_min: Verdict,
    /// (ii): `log M(r)` is convex in `log r`; `-log m(r)` likewise.
    pub convex_max: Verdict,
    pub convex_min: Verdict,
    /// (iii): `log M(r^k) >= k log M(r)` at the sampled radii and powers.
    pub power_max: Verdict,
    pub power_min: Verdict,
    /// (iv): `log M(kr) - log M(r)` grows along the radii tail.
    pub ratio_max: Verdict,
    pub ratio_min: Verdict,
    pub notes: Vec<String>,
}

impl GrowthReport {
    pub fn all_passed(&self) -> bool {
        [
            self.growth_max,
            self.growth_min,
            self.convex_max,
            self.convex_min,
            self.power_max,
            self.power_min,
            self.ratio_max,
            self.ratio_min,
        ]
        .iter()
        .all(|v| *v != Verdict::Fail)
    }

    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("growth  M: {}  m: {}", self.growth_max, self.growth_min),
            format!("convex  M: {}  m: {}", self.convex_max, self.convex_min),
            format!("power   M: {}  m: {}", self.power_max, self.power_min),
            format!("ratio   M: {}  m: {}", self.ratio_max, self.ratio_min),
        ]
    }
}

/// Tolerance for the discrete convexity check, matching the acceptance
/// threshold on second differences.
pub const CONVEXITY_TOL: f64 = 1e-6;
/// Tolerance for the power inequality (iii).
pub const POWER_TOL: f64 = 1e-9;

/// Check properties (i)-(iv) on the given log-radius grid with powers `ks`.
pub fn verify_growth_properties(
    map: &CStarMap,
    log_radii: &[f64],
    ks: &[f64],
) -> Result<GrowthReport> {
    let mut notes = Vec::new();
    let mut radii: Vec<f64> = log_radii.to_vec();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let samples: Vec<_> = radii
        .iter()
        .map(|&x| circle_extrema(map, x, DEFAULT_TOL))
        .collect::<Result<_>>()?;

    // (i) monotone growth of log M / log r along the tail; radii at or too
    // close to the unit circle are excluded from the quotient.
    let quotient_pts: Vec<(f64, f64, f64)> = radii
        .iter()
        .zip(&samples)
        .filter(|(x, _)| x.abs() > 1e-6)
        .map(|(&x, s)| (x, s.log_max / x, s.log_min / x))
        .collect();
    let (growth_max, growth_min) = if quotient_pts.len() < 2 {
        (Verdict::InsufficientData, Verdict::InsufficientData)
    } else {
        let mut gmax = Verdict::Pass;
        let mut gmin = Verdict::Pass;
        for w in quotient_pts.windows(2) {
            if w[1].1 < w[0].1 - 1e-9 {
                gmax = Verdict::Fail;
                notes.push(format!(
                    "growth M: quotient drops {} -> {} between log r {} and {}",
                    w[0].1, w[1].1, w[0].0, w[1].0
                ));
            }
            if w[1].2 > w[0].2 + 1e-9 {
                gmin = Verdict::Fail;
                notes.push(format!(
                    "growth m: quotient rises {} -> {} between log r {} and {}",
                    w[0].2, w[1].2, w[0].0, w[1].0
                ));
            }
        }
        (gmax, gmin)
    };

    // (ii) discrete second differences. On a uniform grid this is the raw
    // stencil f(x-h) - 2 f(x) + f(x+h); otherwise the chord test at the
    // middle point is used.
    let (convex_max, convex_min) = if radii.len() < 3 {
        (Verdict::InsufficientData, Verdict::InsufficientData)
    } else {
        let mut cmax = Verdict::Pass;
        let mut cmin = Verdict::Pass;
        let uniform = radii
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect::<Vec<_>>()
            .windows(2)
            .all(|h| (h[1] - h[0]).abs() < 1e-9);
        for i in 1..radii.len() - 1 {
            let (x0, x1, x2) = (radii[i - 1], radii[i], radii[i + 1]);
            let second = |f0: f64, f1: f64, f2: f64| {
                if uniform {
                    f0 - 2.0 * f1 + f2
                } else {
                    // Chord above function, scaled like a second difference.
                    let interp = f0 + (f2 - f0) * (x1 - x0) / (x2 - x0);
                    2.0 * (interp - f1)
                }
            };
            let d_max = second(samples[i - 1].log_max, samples[i].log_max, samples[i + 1].log_max);
            if d_max < -CONVEXITY_TOL {
                cmax = Verdict::Fail;
                notes.push(format!("convex M: second difference {d_max} at log r {x1}"));
            }
            let d_min = second(
                -samples[i - 1].log_min,
                -samples[i].log_min,
                -samples[i + 1].log_min,
            );
            if d_min < -CONVEXITY_TOL {
                cmin = Verdict::Fail;
                notes.push(format!("convex m: second difference {d_min} at log r {x1}"));
            }
        }
        (cmax, cmin)
    };

    // (iii) M(r^k) >= M(r)^k and m(r^k) <= m(r)^k.
    let (power_max, power_min) = if radii.is_empty() || ks.is_empty() {
        (Verdict::InsufficientData, Verdict::InsufficientData)
    } else {
        let mut pmax = Verdict::Pass;
        let mut pmin = Verdict::Pass;
        for (&x, s) in radii.iter().zip(&samples) {
            for &k in ks {
                let sk = circle_extrema(map, k * x, DEFAULT_TOL)?;
                if sk.log_max < k * s.log_max - POWER_TOL {
                    pmax = Verdict::Fail;
                    notes.push(format!(
                        "power M: log M(r^{k}) = {} < k log M(r) = {} at log r {x}",
                        sk.log_max,
                        k * s.log_max
                    ));
                }
                if sk.log_min > k * s.log_min + POWER_TOL {
                    pmin = Verdict::Fail;
                    notes.push(format!(
                        "power m: log m(r^{k}) = {} > k log m(r) = {} at log r {x}",
                        sk.log_min,
                        k * s.log_min
                    ));
                }
            }
        }
        (pmax, pmin)
    };

    // (iv) the gap log M(kr) - log M(r) grows along the tail.
    let (ratio_max, ratio_min) = if radii.len() < 2 || ks.is_empty() {
        (Verdict::InsufficientData, Verdict::InsufficientData)
    } else {
        let mut rmax = Verdict::Pass;
        let mut rmin = Verdict::Pass;
        for &k in ks {
            if k <= 1.0 {
                continue;
            }
            let mut prev: Option<(f64, f64)> = None;
            for (&x, s) in radii.iter().zip(&samples) {
                let shifted = circle_extrema(map, x + k.ln(), DEFAULT_TOL)?;
                let gap_max = shifted.log_max - s.log_max;
                let gap_min = shifted.log_min - s.log_min;
                if let Some((pmaxg, pming)) = prev {
                    if gap_max < pmaxg - 1e-9 {
                        rmax = Verdict::Fail;
                        notes.push(format!(
                            "ratio M: gap shrinks {pmaxg} -> {gap_max} near log r {x} (k={k})"
                        ));
                    }
                    if gap_min > pming + 1e-9 {
                        rmin = Verdict::Fail;
                        notes.push(format!(
                            "ratio m: gap grows {pming} -> {gap_min} near log r {x} (k={k})"
                        ));
                    }
                }
                prev = Some((gap_max, gap_min));
            }
        }
        (rmax, rmin)
    };

    Ok(GrowthReport {
        growth_max,
        growth_min,
        convex_max,
        convex_min,
        power_max,
        power_min,
        ratio_max,
        ratio_min,
        notes,
    })
}

/// One comparison `log M^{n-1}(r) < log eps + log mu^n(r)` (or its dual).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RelaxedStep {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Trace of the iterated-vs-relaxed comparison on one side.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelaxedTrace {
    /// `log M^n(r)` (or `log m^n(r)`), starting at n = 0.
    pub iterates: Vec<f64>,
    /// `log mu^n(r)` (or `log nu^n(r)`), starting at n = 0.
    pub relaxed: Vec<f64>,
    pub checks: Vec<RelaxedStep>,
    pub truncated_by_horizon: bool,
}

impl RelaxedTrace {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Comparison of iterated moduli with their relaxed variants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelaxedComparison {
    pub eps: f64,
    /// `M` against `mu` starting from `log_r`.
    pub upper: RelaxedTrace,
    /// `m` against `nu` starting from `-log_r`.
    pub lower: RelaxedTrace,
}

impl RelaxedComparison {
    pub fn passed(&self) -> bool {
        self.upper.passed() && self.lower.passed()
    }
}

/// Verify `M^{n-1}(r) < eps mu^n(r)` for all representable `n <= depth`,
/// together with the dual `m^{n-1}(r') > nu^n(r') / eps` at the mirrored
/// radius `r' = 1/r`. `n = 0` is vacuous. The horizon truncates the trace
/// with a partial verdict.
pub fn verify_relaxed_iterates(
    map: &CStarMap,
    eps: f64,
    log_r: f64,
    depth: usize,
) -> Result<RelaxedComparison> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(crate::error::Error::InvalidParameter(format!(
            "eps must be in (0, 1), got {eps}"
        )));
    }
    let upper = one_side(map, eps, log_r, depth, RelaxedKind::Mu)?;
    let lower = one_side(map, eps, -log_r, depth, RelaxedKind::Nu)?;
    Ok(RelaxedComparison { eps, upper, lower })
}

fn one_side(
    map: &CStarMap,
    eps: f64,
    log_r: f64,
    depth: usize,
    kind: RelaxedKind,
) -> Result<RelaxedTrace> {
    let ln_eps = eps.ln();
    let mut iterates = vec![log_r];
    let mut relaxed = vec![log_r];
    let mut checks = Vec::new();
    let mut truncated = false;
    for n in 1..=depth {
        let prev_it = iterates[n - 1];
        let prev_rel = relaxed[n - 1];
        if prev_it.abs() > map.horizon || prev_rel.abs() > map.horizon {
            truncated = true;
            break;
        }
        let next_it = match kind {
            RelaxedKind::Mu => circle_extrema(map, prev_it, DEFAULT_TOL)?.log_max,
            RelaxedKind::Nu => circle_extrema(map, prev_it, DEFAULT_TOL)?.log_min,
        };
        let next_rel = relaxed_modulus(map, prev_rel, eps, kind)?;
        iterates.push(next_it);
        relaxed.push(next_rel);
        // M^{n-1}(r) < eps mu^n(r), dually m^{n-1}(r) > nu^n(r)/eps.
        let (lhs, rhs, pass) = match kind {
            RelaxedKind::Mu => (prev_it, ln_eps + next_rel, prev_it < ln_eps + next_rel),
            RelaxedKind::Nu => (prev_it, next_rel - ln_eps, prev_it > next_rel - ln_eps),
        };
        checks.push(RelaxedStep { n, lhs, rhs, pass });
    }
    Ok(RelaxedTrace {
        iterates,
        relaxed,
        checks,
        truncated_by_horizon: truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_map;

    fn test_map() -> CStarMap {
        parse_map("n=0; g=1z; h=-1w").unwrap()
    }

    #[test]
    fn power_property_closed_form() {
        // (iii) at k = 2 reads (r^2 - 1/r^2) >= 2 (r - 1/r) for the test map.
        let map = test_map();
        let report =
            verify_growth_properties(&map, &[4f64.ln(), 8f64.ln(), 16f64.ln()], &[2.0]).unwrap();
        assert!(report.power_max.passed(), "{:?}", report.notes);
        assert!(report.power_min.passed(), "{:?}", report.notes);
    }

    #[test]
    fn convexity_on_log_grid() {
        // Second difference of r - 1/r on the equispaced grid log 2, log 4,
        // log 8 is (2 - 1/2) - 2(4 - 1/4) + (8 - 1/8) = 2.375 > 0.
        let map = test_map();
        let grid = [2f64.ln(), 4f64.ln(), 8f64.ln()];
        let report = verify_growth_properties(&map, &grid, &[2.0]).unwrap();
        assert!(report.convex_max.passed());
        assert!(report.convex_min.passed());
    }

    #[test]
    fn single_radius_is_insufficient() {
        let map = test_map();
        let report = verify_growth_properties(&map, &[4f64.ln()], &[2.0]).unwrap();
        assert_eq!(report.growth_max, Verdict::InsufficientData);
        assert_eq!(report.ratio_max, Verdict::InsufficientData);
        assert_eq!(report.convex_max, Verdict::InsufficientData);
        // (iii) only needs one radius.
        assert!(report.power_max.passed());
    }

    #[test]
    fn relaxed_comparison_passes_above_threshold() {
        // n = 1 instance at log r = 3: 3 < 2 ln(0.1) + (e^3 - e^{-3}).
        let map = test_map();
        let cmp = verify_relaxed_iterates(&map, 0.1, 3.0, 4).unwrap();
        assert!(cmp.passed());
        assert!(!cmp.upper.checks.is_empty());
        let first = cmp.upper.checks[0];
        assert_eq!(first.n, 1);
        assert!((first.rhs - (2.0 * 0.1f64.ln() + 2.0 * 3f64.sinh())).abs() < 1e-6);
    }

    #[test]
    fn vacuous_at_depth_zero() {
        let map = test_map();
        let cmp = verify_relaxed_iterates(&map, 0.1, 3.0, 0).unwrap();
        assert!(cmp.passed());
        assert!(cmp.upper.checks.is_empty());
    }

    #[test]
    fn tiny_margin_radius_fails() {
        // With eps close to 1 the inequality needs r >= R_2(f, eps); just
        // above the unit circle it fails, demonstrating the constraint.
        let map = test_map();
        let cmp = verify_relaxed_iterates(&map, 0.999999, 1e-6, 1).unwrap();
        assert!(!cmp.upper.passed());
    }
}
