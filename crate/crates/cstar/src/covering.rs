//! Compact covering annuli inside the partition bands and certified
//! covering relations between them.
//!
//! Band `B_n` for `n > 0` is the closed annulus of relative half-width
//! `-log eps` around the core radius `mu^n(R_+)` (iterated relaxed maximum
//! modulus); bands for `n < 0` mirror this with `nu^n(R_-)`; `B_0` is the
//! closure of `A_0`. A covering `f(B_from) >= B_to` is certified by three
//! checks: the hyperbolic length of the core circle is below `delta`, the
//! extreme moduli on the core circle straddle the target band, and the
//! maximum is at least twice the minimum. An argument-principle oracle
//! independently counts preimages of sampled targets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{CStarMap, LogPoint};
use crate::modulus::{circle_extrema, DEFAULT_TOL};
use crate::partition::AnnularPartition;
use crate::rng::{mix_seed, SplitMix64};
use crate::winding::{count_preimages, CircleGeometry, LogTarget, WindingOutcome};

use std::f64::consts::PI;

/// Default absolute constant of the covering criterion. The underlying
/// covering lemma only asserts existence of some delta > 0; this default
/// makes the induced eps equal to 1/e.
pub const DEFAULT_DELTA: f64 = 2.0 * PI * PI;

/// The eps for which the core circle of `A(eps c, c/eps)` has hyperbolic
/// length exactly `delta / 2`, safely below `delta`:
/// `pi^2 / log(1/eps) = delta / 2`.
pub fn choose_eps(delta: f64) -> f64 {
    debug_assert!(delta > 0.0);
    (-2.0 * PI * PI / delta).exp()
}

/// Hyperbolic length of the core circle of the annulus `A(eps c, c/eps)`.
pub fn core_circle_length(eps: f64) -> f64 {
    PI * PI / (1.0 / eps).ln()
}

/// A closed sub-annulus `[inner, outer]` (log radii) around a core circle.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CoveringAnnulus {
    pub index: i64,
    pub core_log_r: f64,
    pub eps: f64,
    pub inner_log_r: f64,
    pub outer_log_r: f64,
}

impl CoveringAnnulus {
    /// Band around a core radius with half-width `-log eps`.
    pub fn around_core(index: i64, core_log_r: f64, eps: f64) -> Self {
        let ln_eps = eps.ln();
        CoveringAnnulus {
            index,
            core_log_r,
            eps,
            inner_log_r: core_log_r + ln_eps,
            outer_log_r: core_log_r - ln_eps,
        }
    }

    /// The exceptional central band: the closure of `A_0`.
    pub fn central(inner_log_r: f64, outer_log_r: f64, eps: f64) -> Self {
        CoveringAnnulus {
            index: 0,
            core_log_r: 0.5 * (inner_log_r + outer_log_r),
            eps,
            inner_log_r,
            outer_log_r,
        }
    }

    pub fn contains_log_r(&self, l: f64) -> bool {
        l >= self.inner_log_r && l <= self.outer_log_r
    }

    /// Strict interior membership with an optional margin in log scale.
    pub fn strictly_inside(&self, l: f64, margin: f64) -> bool {
        l > self.inner_log_r + margin && l < self.outer_log_r - margin
    }
}

/// A chain level excluded from the covering set, with the inequality that
/// failed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainFailure {
    pub level: i64,
    pub detail: String,
}

/// The covering annuli that verified the chain of inequalities, plus the
/// recorded exclusions and truncation state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoveringSet {
    pub eps: f64,
    pub annuli: Vec<CoveringAnnulus>,
    pub excluded: Vec<ChainFailure>,
    /// True when the horizon stopped the tabulation before `depth`.
    pub horizon_truncated: bool,
}

impl CoveringSet {
    pub fn annulus(&self, index: i64) -> Option<&CoveringAnnulus> {
        self.annuli.iter().find(|a| a.index == index)
    }

    /// Resolve an itinerary of band indices to the stored annuli; excluded
    /// levels surface the recorded chain failure.
    pub fn resolve(&self, itinerary: &[i64]) -> Result<Vec<CoveringAnnulus>> {
        itinerary
            .iter()
            .map(|&s| {
                if let Some(a) = self.annulus(s) {
                    Ok(*a)
                } else if let Some(fail) = self.excluded.iter().find(|f| f.level == s) {
                    Err(Error::ChainViolation {
                        level: fail.level,
                        detail: fail.detail.clone(),
                    })
                } else {
                    Err(Error::InvalidParameter(format!(
                        "band {s} is not tabulated (horizon or depth limit)"
                    )))
                }
            })
            .collect()
    }
}

/// Equality slack for chain and straddle comparisons: the constructions
/// produce exact-equality witnesses (`mu(R)/eps = M(R)`), which float
/// rounding may perturb either way.
fn slack(scale: f64) -> f64 {
    1e-9 * scale.abs().max(1.0)
}

/// Build `B_0` plus `B_n` for `0 < |n| <= depth`, verifying at each level
/// the chain `M^{n-1}(R_+) < eps mu^n(R_+) < mu^n(R_+) < mu^n(R_+)/eps
/// <= M^n(R_+)` (mirrored below). Levels failing the chain are excluded and
/// recorded; the final inequality is allowed to hold with equality at
/// `|n| = 1`, where the construction gives `mu(R_+)/eps = M(R_+)` exactly
/// and the band is not compactly contained.
pub fn build_covering_annuli(
    map: &CStarMap,
    partition: &AnnularPartition,
    eps: f64,
    depth: usize,
) -> Result<CoveringSet> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be in (0, 1), got {eps}"
        )));
    }
    let ln_eps = eps.ln();
    let mut annuli = vec![CoveringAnnulus::central(
        partition.log_r_minus,
        partition.log_r_plus,
        eps,
    )];
    let mut excluded = Vec::new();
    let mut horizon_truncated = false;

    // Positive side: cores are iterates of mu from R_+.
    let mut core_prev = partition.log_r_plus;
    for n in 1..=depth as i64 {
        if n as usize >= partition.upper.len() {
            horizon_truncated = true;
            break;
        }
        if core_prev.abs() > map.horizon {
            horizon_truncated = true;
            break;
        }
        let core = ln_eps + circle_extrema(map, core_prev, DEFAULT_TOL)?.log_max;
        let band = CoveringAnnulus::around_core(n, core, eps);
        let below = partition.upper[(n - 1) as usize];
        let above = partition.upper[n as usize];
        if band.inner_log_r <= below {
            excluded.push(ChainFailure {
                level: n,
                detail: format!(
                    "M^{}(R_+) = {below} >= eps mu^{n}(R_+) = {}",
                    n - 1,
                    band.inner_log_r
                ),
            });
        } else if band.outer_log_r > above + slack(above) {
            excluded.push(ChainFailure {
                level: n,
                detail: format!(
                    "mu^{n}(R_+)/eps = {} > M^{n}(R_+) = {above}",
                    band.outer_log_r
                ),
            });
        } else {
            annuli.push(band);
        }
        core_prev = core;
    }

    // Negative side: cores are iterates of nu from R_-.
    let mut core_prev = partition.log_r_minus;
    for n in 1..=depth as i64 {
        if n as usize >= partition.lower.len() {
            horizon_truncated = true;
            break;
        }
        if core_prev.abs() > map.horizon {
            horizon_truncated = true;
            break;
        }
        let core = circle_extrema(map, core_prev, DEFAULT_TOL)?.log_min - ln_eps;
        let band = CoveringAnnulus::around_core(-n, core, eps);
        let above = partition.lower[(n - 1) as usize];
        let below = partition.lower[n as usize];
        if band.outer_log_r >= above {
            excluded.push(ChainFailure {
                level: -n,
                detail: format!(
                    "nu^{n}(R_-)/eps = {} >= m^{}(R_-) = {above}",
                    band.outer_log_r,
                    n - 1
                ),
            });
        } else if band.inner_log_r < below - slack(below) {
            excluded.push(ChainFailure {
                level: -n,
                detail: format!(
                    "eps nu^{n}(R_-) = {} < m^{n}(R_-) = {below}",
                    band.inner_log_r
                ),
            });
        } else {
            annuli.push(band);
        }
        core_prev = core;
    }

    annuli.sort_by_key(|a| a.index);
    Ok(CoveringSet {
        eps,
        annuli,
        excluded,
        horizon_truncated,
    })
}

/// The hyperbolic-length component of a certificate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LengthCheck {
    /// `pi^2 / log(1/eps)`, the hyperbolic length of the core circle.
    pub value: f64,
    pub delta: f64,
    pub pass: bool,
}

/// Result of the argument-principle cross-check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleReport {
    pub targets_tested: u32,
    /// Smallest certified preimage count over the targets, when every
    /// target certified.
    pub min_preimage_count: Option<i64>,
    pub inconclusive: u32,
    /// One representative reason when not all targets certified.
    pub detail: Option<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.inconclusive == 0 && self.min_preimage_count.map_or(false, |c| c >= 1)
    }
}

/// A checked instance of the covering criterion for `f(B_from) >= B_to`,
/// with witnesses and the optional oracle cross-check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoveringCertificate {
    pub from_index: i64,
    pub to_index: i64,
    pub eps: f64,
    pub length_check: LengthCheck,
    /// Core-circle points of minimum and maximum modulus.
    pub witness_min: LogPoint,
    pub witness_max: LogPoint,
    /// `log |f|` at the witnesses.
    pub log_mod_min: f64,
    pub log_mod_max: f64,
    pub straddle_pass: bool,
    pub doubling_pass: bool,
    /// Band indices whose full band `[inner, outer]` is straddled by the
    /// witness moduli; the extreme entries play the role of the covered
    /// range of the covering theorem.
    pub covered_indices: Vec<i64>,
    pub oracle: Option<OracleReport>,
}

impl CoveringCertificate {
    /// The covering-criterion verdict (the oracle is reported separately).
    pub fn pass(&self) -> bool {
        self.length_check.pass && self.straddle_pass && self.doubling_pass
    }
}

/// Certify `f(B_from) >= B_to`.
///
/// Witnesses are the extrema of `|f|` on the core circle of `B_from`. With
/// `oracle_targets > 0`, that many targets are drawn in `B_to` (log-uniform
/// in modulus, uniform in angle, deterministically from `seed` and the band
/// indices) and their preimages in `B_from` counted by the boundary winding
/// integral; an inconclusive winding is recorded, not fatal.
pub fn certify_covering(
    map: &CStarMap,
    set: &CoveringSet,
    from_index: i64,
    to_index: i64,
    delta: f64,
    oracle_targets: u32,
    seed: u64,
) -> Result<CoveringCertificate> {
    let from = set
        .annulus(from_index)
        .ok_or_else(|| Error::InvalidParameter(format!("band {from_index} not in covering set")))?;
    let to = set
        .annulus(to_index)
        .ok_or_else(|| Error::InvalidParameter(format!("band {to_index} not in covering set")))?;

    let length = core_circle_length(from.eps);
    let length_check = LengthCheck {
        value: length,
        delta,
        pass: length < delta,
    };

    let sample = circle_extrema(map, from.core_log_r, DEFAULT_TOL)?;
    let straddle_pass = sample.log_min <= to.inner_log_r + slack(to.inner_log_r)
        && sample.log_max >= to.outer_log_r - slack(to.outer_log_r);
    let doubling_pass = sample.log_max >= sample.log_min + std::f64::consts::LN_2;

    let covered_indices: Vec<i64> = set
        .annuli
        .iter()
        .filter(|b| {
            sample.log_min <= b.inner_log_r + slack(b.inner_log_r)
                && sample.log_max >= b.outer_log_r - slack(b.outer_log_r)
        })
        .map(|b| b.index)
        .collect();

    let oracle = if oracle_targets > 0 {
        Some(run_oracle(map, from, to, oracle_targets, seed)?)
    } else {
        None
    };

    Ok(CoveringCertificate {
        from_index,
        to_index,
        eps: from.eps,
        length_check,
        witness_min: LogPoint::new(from.core_log_r, sample.theta_min),
        witness_max: LogPoint::new(from.core_log_r, sample.theta_max),
        log_mod_min: sample.log_min,
        log_mod_max: sample.log_max,
        straddle_pass,
        doubling_pass,
        covered_indices,
        oracle,
    })
}

fn run_oracle(
    map: &CStarMap,
    from: &CoveringAnnulus,
    to: &CoveringAnnulus,
    targets: u32,
    seed: u64,
) -> Result<OracleReport> {
    let inner = CircleGeometry::build(map, from.inner_log_r)?;
    let outer = CircleGeometry::build(map, from.outer_log_r)?;
    let mut rng = SplitMix64::new(mix_seed(seed, from.index, to.index));
    let mut min_count: Option<i64> = None;
    let mut inconclusive = 0u32;
    let mut detail = None;
    for _ in 0..targets {
        // Up to three redraws when a target lands on the contour image.
        let mut outcome: Option<WindingOutcome> = None;
        for _ in 0..4 {
            let w = LogTarget {
                log_mod: rng.next_in(to.inner_log_r, to.outer_log_r),
                arg: rng.next_in(-PI, PI),
            };
            let res = count_preimages(map, &inner, &outer, w)?;
            let on_contour = res
                .inconclusive
                .as_deref()
                .map_or(false, |m| m.contains("contour"));
            outcome = Some(res);
            if !on_contour {
                break;
            }
        }
        let res = outcome.unwrap();
        match res.count {
            Some(c) => min_count = Some(min_count.map_or(c, |m| m.min(c))),
            None => {
                inconclusive += 1;
                if detail.is_none() {
                    detail = res.inconclusive;
                }
            }
        }
    }
    Ok(OracleReport {
        targets_tested: targets,
        min_preimage_count: if inconclusive == 0 { min_count } else { None },
        inconclusive,
        detail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_map;
    use crate::partition::build_partition;

    fn test_map() -> CStarMap {
        parse_map("n=0; g=1z; h=-1w").unwrap()
    }

    const EPS: f64 = 0.36787944117144233; // 1/e

    #[test]
    fn choose_eps_inverts_length_formula() {
        for delta in [PI * PI, 2.0 * PI * PI, 0.5] {
            let eps = choose_eps(delta);
            let len = core_circle_length(eps);
            assert!((len - delta / 2.0).abs() < 1e-12 * delta, "delta {delta}");
        }
        assert!((choose_eps(PI * PI) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((choose_eps(2.0 * PI * PI) - (-1.0f64).exp()).abs() < 1e-15);
        // Small delta forces extreme eps.
        assert!(choose_eps(0.5) < 1e-17);
    }

    #[test]
    fn chain_verified_at_acceptance_scale() {
        // log R_+ = 3: B_1 = [18.04, 20.04] with the chain
        // 3 < 18.04 < 19.04 < 20.04 <= upper[1].
        let map = test_map();
        let p = build_partition(&map, 3.0, -3.0, 6).unwrap();
        let set = build_covering_annuli(&map, &p, EPS, 2).unwrap();
        let b1 = set.annulus(1).expect("B_1 present");
        let want_core = -1.0 + 2.0 * 3f64.sinh();
        assert!((b1.core_log_r - want_core).abs() < 1e-8);
        assert!((b1.inner_log_r - (want_core - 1.0)).abs() < 1e-8);
        assert!(b1.inner_log_r > p.upper[0]);
        assert!(b1.outer_log_r <= p.upper[1] + 1e-6);
        assert!(set.annulus(2).is_some());
        assert!(set.annulus(-1).is_some());
        // B_0 is the closure of A_0.
        let b0 = set.annulus(0).unwrap();
        assert_eq!(b0.inner_log_r, -3.0);
        assert_eq!(b0.outer_log_r, 3.0);
    }

    #[test]
    fn chain_violation_is_excluded_and_recorded() {
        // At log R_+ = 1 the n = 1 inequality R_+ < eps mu(R_+) fails:
        // 1 + 2 > 2 sinh(1) = 2.35.
        let map = test_map();
        let p = build_partition(&map, 1.0, -1.0, 4).unwrap();
        let set = build_covering_annuli(&map, &p, EPS, 2).unwrap();
        assert!(set.annulus(1).is_none());
        assert!(set.excluded.iter().any(|f| f.level == 1));
        assert!(matches!(
            set.resolve(&[1, 2]),
            Err(Error::ChainViolation { level: 1, .. })
        ));
    }

    #[test]
    fn near_unit_eps_keeps_chain_but_fails_length() {
        let map = test_map();
        let p = build_partition(&map, 3.0, -3.0, 4).unwrap();
        let eps = 1.0 - 1e-9;
        let set = build_covering_annuli(&map, &p, eps, 1).unwrap();
        assert!(set.annulus(1).is_some(), "{:?}", set.excluded);
        let cert = certify_covering(&map, &set, 1, 1, DEFAULT_DELTA, 0, 1).unwrap();
        assert!(!cert.length_check.pass);
        assert!(!cert.pass());
    }

    #[test]
    fn certificate_b1_to_b2_at_acceptance_scale() {
        let map = test_map();
        let p = build_partition(&map, 3.0, -3.0, 6).unwrap();
        let set = build_covering_annuli(&map, &p, EPS, 2).unwrap();
        let cert = certify_covering(&map, &set, 1, 2, 2.0 * PI * PI, 0, 1).unwrap();
        assert!(cert.length_check.pass);
        assert!(cert.straddle_pass, "min {} max {}", cert.log_mod_min, cert.log_mod_max);
        assert!(cert.doubling_pass);
        assert!(cert.pass());
        // The straddle also covers every other tabulated band.
        assert!(cert.covered_indices.contains(&1));
        assert!(cert.covered_indices.contains(&-1));
        assert!(cert.covered_indices.contains(&0));
    }

    #[test]
    fn central_band_covering_fails_quietly() {
        // f(B_0) need not cover anything: the certificate records the
        // failure without raising an error.
        let map = test_map();
        let p = build_partition(&map, 3.0, -3.0, 6).unwrap();
        let set = build_covering_annuli(&map, &p, EPS, 2).unwrap();
        let cert = certify_covering(&map, &set, 0, 2, 2.0 * PI * PI, 0, 1).unwrap();
        assert!(!cert.straddle_pass);
        assert!(!cert.pass());
    }

    #[test]
    fn tiny_delta_fails_length_check_regardless() {
        let map = test_map();
        let p = build_partition(&map, 3.0, -3.0, 6).unwrap();
        let set = build_covering_annuli(&map, &p, EPS, 2).unwrap();
        let cert = certify_covering(&map, &set, 1, 2, 0.1, 0, 1).unwrap();
        assert!(!cert.length_check.pass);
        assert!(cert.straddle_pass);
    }

    #[test]
    fn oracle_confirms_small_scale_covering() {
        // A desk-scale configuration where brute preimage counting is
        // feasible: log R_+ = 1.5.
        let map = test_map();
        let p = build_partition(&map, 1.5, -1.5, 6).unwrap();
        let set = build_covering_annuli(&map, &p, EPS, 3).unwrap();
        let cert = certify_covering(&map, &set, 1, 2, 2.0 * PI * PI, 16, 1).unwrap();
        assert!(cert.pass());
        let oracle = cert.oracle.as_ref().unwrap();
        assert!(oracle.passed(), "{oracle:?}");
        assert!(oracle.min_preimage_count.unwrap() >= 1);
    }

    #[test]
    fn oracle_is_deterministic() {
        let map = test_map();
        let p = build_partition(&map, 1.5, -1.5, 6).unwrap();
        let set = build_covering_annuli(&map, &p, EPS, 2).unwrap();
        let a = certify_covering(&map, &set, 1, 2, 2.0 * PI * PI, 4, 99).unwrap();
        let b = certify_covering(&map, &set, 1, 2, 2.0 * PI * PI, 4, 99).unwrap();
        assert_eq!(
            a.oracle.as_ref().unwrap().min_preimage_count,
            b.oracle.as_ref().unwrap().min_preimage_count
        );
    }

    #[test]
    fn beyond_horizon_certificate_errors() {
        // B_2 at log R_+ = 3 has its core near 1.87e8; evaluating f on its
        // circle exceeds the horizon.
        let map = test_map();
        let p = build_partition(&map, 3.0, -3.0, 6).unwrap();
        let set = build_covering_annuli(&map, &p, EPS, 2).unwrap();
        assert!(matches!(
            certify_covering(&map, &set, 2, 2, 2.0 * PI * PI, 0, 1),
            Err(Error::HorizonExceeded { .. })
        ));
    }
}
