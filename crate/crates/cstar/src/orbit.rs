//! Orbit classification at finite horizon and the fast-escape membership
//! test against iterated radius sequences.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::itinerary::{EssSymbol, EssentialItinerary};
use crate::map::{CStarMap, LogPoint};
use crate::modulus::{approx_ge, approx_le, iterate_radius, RadiusSequence};
use crate::partition::AnnularPartition;

/// Consecutive deep samples required before an escape verdict; guards
/// against single-step excursions.
pub const TRAILING_RUN: usize = 3;
/// Default log-modulus level treated as deep escape.
pub const DEFAULT_ESCAPE_LEVEL: f64 = 50.0;

/// Finite-horizon verdict for one orbit. These approximate the escape
/// classes; the record never claims true membership in the limit sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitVerdict {
    EscapesToInfinity,
    EscapesToZero,
    EscapesMixed,
    BoundedSoFar,
    Undetermined,
}

impl OrbitVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            OrbitVerdict::EscapesToInfinity => "escapes_to_infinity",
            OrbitVerdict::EscapesToZero => "escapes_to_zero",
            OrbitVerdict::EscapesMixed => "escapes_mixed",
            OrbitVerdict::BoundedSoFar => "bounded_so_far",
            OrbitVerdict::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub start: LogPoint,
    pub samples: Vec<LogPoint>,
    pub essential: Vec<EssSymbol>,
    pub annular: Vec<i64>,
    pub verdict: OrbitVerdict,
    pub horizon_hit: bool,
}

impl OrbitRecord {
    /// Iterations actually performed.
    pub fn checked_depth(&self) -> usize {
        self.samples.len() - 1
    }

    /// Essential symbols as a string over {0, i}, at most `len` long.
    pub fn essential_prefix(&self, len: usize) -> String {
        self.essential
            .iter()
            .take(len)
            .map(|s| s.as_char())
            .collect()
    }

    pub fn annular_prefix(&self, len: usize) -> String {
        self.annular
            .iter()
            .take(len)
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Iterate `z0` for at most `budget` steps, recording essential symbols
/// (inf iff `L > 0`) and annular indices. The orbit stops early after
/// [`TRAILING_RUN`] consecutive samples beyond `escape_level` in `|L|` or
/// when the horizon is exceeded; the verdict reads the trailing window of
/// symbols.
pub fn classify_orbit(
    map: &CStarMap,
    partition: &AnnularPartition,
    z0: LogPoint,
    budget: usize,
    escape_level: f64,
) -> OrbitRecord {
    assert!(budget >= 1, "budget must be at least 1");
    let mut samples = vec![z0];
    let mut horizon_hit = false;
    let mut deep_run = usize::from(z0.l.abs() > escape_level);
    while samples.len() <= budget {
        if deep_run >= TRAILING_RUN {
            break;
        }
        let prev = *samples.last().unwrap();
        match map.eval(prev) {
            Ok(next) => {
                deep_run = if next.l.abs() > escape_level {
                    deep_run + 1
                } else {
                    0
                };
                samples.push(next);
            }
            Err(Error::HorizonExceeded { .. }) | Err(Error::NonFinite) => {
                horizon_hit = true;
                break;
            }
            Err(_) => unreachable!("eval only raises horizon or non-finite errors"),
        }
    }

    let essential: Vec<EssSymbol> = samples
        .iter()
        .map(|p| EssSymbol::of_log_modulus(p.l))
        .collect();
    let annular: Vec<i64> = samples
        .iter()
        .map(|p| partition.annulus_index(p.l).index)
        .collect();

    let exited_deep = horizon_hit || deep_run >= TRAILING_RUN;
    let tail = &essential[essential.len().saturating_sub(TRAILING_RUN)..];
    let verdict = if exited_deep {
        if tail.iter().all(|s| *s == EssSymbol::Inf) {
            OrbitVerdict::EscapesToInfinity
        } else if tail.iter().all(|s| *s == EssSymbol::Zero) {
            OrbitVerdict::EscapesToZero
        } else {
            OrbitVerdict::EscapesMixed
        }
    } else {
        let tail_bounded = samples
            .iter()
            .rev()
            .take(TRAILING_RUN)
            .all(|p| p.l.abs() <= escape_level);
        if tail_bounded {
            OrbitVerdict::BoundedSoFar
        } else {
            OrbitVerdict::Undetermined
        }
    };

    OrbitRecord {
        start: z0,
        samples,
        essential,
        annular,
        verdict,
        horizon_hit,
    }
}

/// Result of checking one point against the fast-escape definition for a
/// given itinerary, lag and starting radius. Membership is asserted only on
/// the checked prefix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FastEscapeReport {
    pub holds_on_prefix: bool,
    /// Deepest `n` actually compared; `None` when the lag alone exhausted
    /// the horizon.
    pub checked_depth: Option<usize>,
    /// `log |f^{n+ell}(z)|` for the checked range.
    pub orbit_log_moduli: Vec<f64>,
    pub radii: RadiusSequence,
}

/// Check `|f^{n+ell}(z)| >= R_n` on symbol inf and `<= R_n` on symbol 0 for
/// `n` up to `depth`, with `(R_n)` iterated from `log_r0` along `e`.
/// Comparisons are non-strict up to accumulated rounding, since the
/// construction produces exact-equality witnesses.
pub fn fast_escape_test(
    map: &CStarMap,
    z0: LogPoint,
    e: &EssentialItinerary,
    log_r0: f64,
    ell: usize,
    depth: usize,
) -> FastEscapeReport {
    let radii = iterate_radius(map, e, log_r0, depth);
    let mut point = z0;
    let mut warmup_ok = true;
    for _ in 0..ell {
        match map.eval(point) {
            Ok(next) => point = next,
            Err(_) => {
                warmup_ok = false;
                break;
            }
        }
    }
    if !warmup_ok {
        return FastEscapeReport {
            holds_on_prefix: false,
            checked_depth: None,
            orbit_log_moduli: Vec::new(),
            radii,
        };
    }

    let mut holds = true;
    let mut checked = None;
    let mut moduli = Vec::new();
    for n in 0..=depth.min(radii.truncated_at) {
        moduli.push(point.l);
        let radius = radii.log_r[n];
        let ok = match e.symbol(n) {
            EssSymbol::Inf => approx_ge(point.l, radius),
            EssSymbol::Zero => approx_le(point.l, radius),
        };
        checked = Some(n);
        if !ok {
            holds = false;
            break;
        }
        if n < depth.min(radii.truncated_at) {
            match map.eval(point) {
                Ok(next) => point = next,
                Err(_) => break,
            }
        }
    }
    FastEscapeReport {
        holds_on_prefix: holds,
        checked_depth: checked,
        orbit_log_moduli: moduli,
        radii,
    }
}

/// Parse seed points from CSV text with columns `L,theta`. A header row is
/// skipped when the first field does not parse as a number.
pub fn parse_seed_csv(text: &str) -> crate::error::Result<Vec<LogPoint>> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let a = fields.next().unwrap_or("").trim();
        let b = fields.next().unwrap_or("").trim();
        if fields.next().is_some() {
            return Err(Error::Parse {
                pos: lineno,
                reason: format!("line {}: expected two fields L,theta", lineno + 1),
            });
        }
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(l), Ok(theta)) if l.is_finite() && theta.is_finite() => {
                points.push(LogPoint::new(l, theta));
            }
            _ if lineno == 0 => continue, // header row
            _ => {
                return Err(Error::Parse {
                    pos: lineno,
                    reason: format!("line {}: cannot parse `{line}`", lineno + 1),
                })
            }
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_map;
    use crate::partition::build_partition;

    fn test_map() -> CStarMap {
        parse_map("n=0; g=1z; h=-1w").unwrap()
    }

    fn partition(map: &CStarMap) -> AnnularPartition {
        build_partition(map, 3.0, -3.0, 6).unwrap()
    }

    #[test]
    fn real_axis_orbit_escapes_to_infinity() {
        let map = test_map();
        let p = partition(&map);
        let rec = classify_orbit(&map, &p, LogPoint::new(3.0, 0.0), 64, DEFAULT_ESCAPE_LEVEL);
        assert_eq!(rec.verdict, OrbitVerdict::EscapesToInfinity);
        assert!(rec.essential.iter().all(|s| *s == EssSymbol::Inf));
        assert!(rec.horizon_hit);
    }

    #[test]
    fn negative_axis_orbit_mixes() {
        // z = -e^3 maps to modulus e^{-(e^3 - e^{-3})}, then far out again:
        // symbols (i, 0, i) on the representable prefix.
        let map = test_map();
        let p = partition(&map);
        let rec = classify_orbit(
            &map,
            &p,
            LogPoint::new(3.0, std::f64::consts::PI),
            64,
            DEFAULT_ESCAPE_LEVEL,
        );
        assert_eq!(rec.verdict, OrbitVerdict::EscapesMixed);
        assert_eq!(rec.essential[0], EssSymbol::Inf);
        assert_eq!(rec.essential[1], EssSymbol::Zero);
        assert!((rec.samples[1].l + 2.0 * 3f64.sinh()).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_is_bounded() {
        let map = test_map();
        let p = partition(&map);
        let rec = classify_orbit(&map, &p, LogPoint::new(0.0, 0.0), 32, DEFAULT_ESCAPE_LEVEL);
        assert_eq!(rec.verdict, OrbitVerdict::BoundedSoFar);
        assert!(!rec.horizon_hit);
        assert_eq!(rec.checked_depth(), 32);
    }

    #[test]
    fn classification_is_deterministic() {
        let map = test_map();
        let p = partition(&map);
        let z = LogPoint::new(1.2, 0.7);
        let a = classify_orbit(&map, &p, z, 48, DEFAULT_ESCAPE_LEVEL);
        let b = classify_orbit(&map, &p, z, 48, DEFAULT_ESCAPE_LEVEL);
        assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.l.to_bits(), y.l.to_bits());
            assert_eq!(x.theta.to_bits(), y.theta.to_bits());
        }
        assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn annular_growth_constraint() {
        // s_{k+1} <= s_k + 1 when s_k > 0 and dually; a violation would mean
        // the modulus search failed.
        let map = test_map();
        let p = partition(&map);
        let mut rng = crate::rng::SplitMix64::new(17);
        for _ in 0..200 {
            let z = LogPoint::new(rng.next_in(-4.0, 4.0), rng.next_in(-3.2, 3.2));
            let rec = classify_orbit(&map, &p, z, 24, DEFAULT_ESCAPE_LEVEL);
            for w in rec.annular.windows(2) {
                if w[0] > 0 {
                    assert!(w[1] <= w[0] + 1, "jump {} -> {} from {:?}", w[0], w[1], z);
                }
                if w[0] < 0 {
                    assert!(w[1] >= w[0] - 1, "jump {} -> {} from {:?}", w[0], w[1], z);
                }
            }
        }
    }

    #[test]
    fn fast_escape_all_inf() {
        let map = test_map();
        // L_1 = 2 sinh(3.1) >= lambda_1 = 2 sinh(3).
        let rep = fast_escape_test(
            &map,
            LogPoint::new(3.1, 0.0),
            &EssentialItinerary::all_inf(),
            3.0,
            0,
            1,
        );
        assert!(rep.holds_on_prefix);
        assert!(rep.checked_depth >= Some(1));
    }

    #[test]
    fn fast_escape_fails_below_radius() {
        let map = test_map();
        let rep = fast_escape_test(
            &map,
            LogPoint::new(2.9, 0.0),
            &EssentialItinerary::all_inf(),
            3.0,
            0,
            3,
        );
        assert!(!rep.holds_on_prefix);
        assert_eq!(rep.checked_depth, Some(0));
    }

    #[test]
    fn fast_escape_equality_case() {
        // Mixed itinerary (inf, 0, ...): the orbit of -e^3 meets the m-rule
        // radius exactly; the non-strict comparison accepts it.
        let map = test_map();
        let rep = fast_escape_test(
            &map,
            LogPoint::new(3.0, std::f64::consts::PI),
            &EssentialItinerary::alternating(),
            3.0,
            0,
            1,
        );
        assert!(rep.holds_on_prefix, "moduli {:?} radii {:?}", rep.orbit_log_moduli, rep.radii.log_r);
        assert_eq!(rep.checked_depth, Some(1));
    }

    #[test]
    fn fast_escape_matches_radius_iteration() {
        // With e = all-inf the test reduces to the classical check against
        // M^n(R_0); cross-validate the radii against the closed form.
        let map = test_map();
        let rep = fast_escape_test(
            &map,
            LogPoint::new(3.2, 0.0),
            &EssentialItinerary::all_inf(),
            3.0,
            0,
            2,
        );
        assert!((rep.radii.log_r[1] - 2.0 * 3f64.sinh()).abs() < 1e-8);
        assert!(rep.holds_on_prefix);
    }

    #[test]
    fn seed_csv_round_trip() {
        let pts = parse_seed_csv("L,theta\n1.0,0.5\n-2.0,3.0\n").unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].l, 1.0);
        // Headerless input also works.
        let pts = parse_seed_csv("1.0,0.5\n").unwrap();
        assert_eq!(pts.len(), 1);
        assert!(parse_seed_csv("1.0,0.5,9\n").is_err());
        assert!(parse_seed_csv("1.0,abc\n2.0,1.0\n").is_ok()); // header-ish first line
        assert!(parse_seed_csv("1.0,1.0\nx,y\n").is_err());
    }
}
