//! Generators for the five families of annular itineraries (fast, periodic,
//! bounded, unbounded non-escaping, arbitrarily slow), their realizability
//! validation against covering evidence, and the text form used by the CLI.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::covering::CoveringSet;
use crate::error::{Error, Result};
use crate::map::CStarMap;
use crate::modulus::{circle_extrema, ModulusSample, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgramKind {
    Fast,
    Periodic,
    Bounded,
    UnboundedNonescaping,
    Slow,
    Custom,
}

/// A target program of partition indices: a prefix and an optional cycle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnularItinerary {
    pub prefix: Vec<i64>,
    pub cycle: Option<Vec<i64>>,
    pub kind: ProgramKind,
}

impl AnnularItinerary {
    /// Materialize the first `len` entries.
    pub fn entries(&self, len: usize) -> Vec<i64> {
        let mut out = Vec::with_capacity(len);
        out.extend(self.prefix.iter().take(len));
        if let Some(cycle) = &self.cycle {
            while out.len() < len {
                out.push(cycle[(out.len() - self.prefix.len()) % cycle.len()]);
            }
        }
        out
    }

    /// Consecutive transitions to validate, including the cycle wrap.
    pub fn transitions(&self) -> Vec<(i64, i64)> {
        let mut ts = Vec::new();
        for w in self.prefix.windows(2) {
            ts.push((w[0], w[1]));
        }
        if let Some(cycle) = &self.cycle {
            if let Some(&last) = self.prefix.last() {
                ts.push((last, cycle[0]));
            }
            for w in cycle.windows(2) {
                ts.push((w[0], w[1]));
            }
            if cycle.len() >= 1 {
                ts.push((cycle[cycle.len() - 1], cycle[0]));
            }
        }
        ts
    }
}

/// `s_{k+1} = s_k (+/-) 1` marching away from the core.
pub fn fast_program(start: i64, len: usize) -> Result<AnnularItinerary> {
    if start == 0 {
        return Err(Error::InvalidParameter(
            "fast programs start in a band with |n| >= 1".into(),
        ));
    }
    let step = if start > 0 { 1 } else { -1 };
    let prefix = (0..len as i64).map(|k| start + step * k).collect();
    Ok(AnnularItinerary {
        prefix,
        cycle: None,
        kind: ProgramKind::Fast,
    })
}

pub fn periodic_program(word: &[i64]) -> Result<AnnularItinerary> {
    if word.is_empty() {
        return Err(Error::InvalidParameter("empty periodic word".into()));
    }
    if word.contains(&0) {
        return Err(Error::InvalidParameter(
            "periodic words avoid the exceptional band 0".into(),
        ));
    }
    Ok(AnnularItinerary {
        prefix: Vec::new(),
        cycle: Some(word.to_vec()),
        kind: ProgramKind::Periodic,
    })
}

/// Entries from {low, low+1}: every band covers itself and the next one.
/// The high band appears every sixth step so that shallow prefixes stay in
/// the low band, where subdivision resolves deeper.
pub fn bounded_program(low: i64, len: usize) -> Result<AnnularItinerary> {
    let high = low + 1;
    if low == 0 || high == 0 {
        return Err(Error::InvalidParameter(
            "bounded programs avoid the exceptional band 0".into(),
        ));
    }
    if low < 0 && high > low {
        // Mirrored side: pair (low, low+1) with low+1 <= -1 is fine; only
        // the zero band is excluded above.
    }
    let prefix = (0..len)
        .map(|k| if k % 6 == 5 { high } else { low })
        .collect();
    Ok(AnnularItinerary {
        prefix,
        cycle: None,
        kind: ProgramKind::Bounded,
    })
}

/// Excursions climbing to ever higher bands with returns to the first one:
/// 1, 2, 1, 2, 3, 1, 2, 3, 4, ... capped at `peak`.
pub fn unbounded_nonescaping_program(peak: i64, len: usize) -> Result<AnnularItinerary> {
    if peak < 2 {
        return Err(Error::InvalidParameter(
            "unbounded programs need a peak of at least 2".into(),
        ));
    }
    let mut prefix = Vec::with_capacity(len);
    'fill: for top in 2..=peak {
        for s in 1..=top {
            prefix.push(s);
            if prefix.len() == len {
                break 'fill;
            }
        }
    }
    while prefix.len() < len {
        for s in 1..=peak {
            prefix.push(s);
            if prefix.len() == len {
                break;
            }
        }
    }
    Ok(AnnularItinerary {
        prefix,
        cycle: None,
        kind: ProgramKind::UnboundedNonescaping,
    })
}

/// Target escape rates `log r_t` for the slow program.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Rates {
    /// `log r_t = slope * t + intercept`, slope > 0.
    Linear { slope: f64, intercept: f64 },
    Table(Vec<f64>),
}

impl Rates {
    fn at(&self, t: u64) -> Option<f64> {
        match self {
            Rates::Linear { slope, intercept } => Some(slope * t as f64 + intercept),
            Rates::Table(v) => v.get(t as usize).copied(),
        }
    }

    /// First `t >= t_min` with `log r_t > threshold`.
    fn overtake(&self, threshold: f64, t_min: u64) -> Option<u64> {
        match self {
            Rates::Linear { slope, intercept } => {
                if *slope <= 0.0 {
                    return None;
                }
                let raw = (threshold - intercept) / slope;
                if !raw.is_finite() || raw >= 9.0e15 {
                    return None;
                }
                let t = if raw < 0.0 { 0 } else { raw.floor() as u64 + 1 };
                Some(t.max(t_min))
            }
            Rates::Table(v) => {
                let mut t = t_min;
                while (t as usize) < v.len() {
                    if v[t as usize] > threshold {
                        return Some(t);
                    }
                    t += 1;
                }
                None
            }
        }
    }
}

/// Number of steps the slow program dwells in one band; astronomically
/// large counts beyond the tabulated cores stay symbolic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DwellCount {
    Steps(u64),
    /// The threshold `log M(mu^n(R_+))` is beyond the horizon, so the dwell
    /// has no representable end.
    BeyondHorizon,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BandDwell {
    pub band: i64,
    /// `log M(mu^band(R_+))`, the level the rate must overtake.
    pub threshold: Option<f64>,
    pub dwell: DwellCount,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlowProgram {
    pub itinerary: AnnularItinerary,
    pub dwells: Vec<BandDwell>,
    /// True when a materialized dwell was cut to `dwell_cap` entries.
    pub dwell_truncated: bool,
}

/// Build the arbitrarily-slow program: dwell in band `n` while the rate
/// stays at or below `log M(mu^n(R_+))`, then advance. Dwell counts are
/// computed in closed form from the rate; the materialized prefix truncates
/// each dwell at `dwell_cap` entries and records having done so.
pub fn slow_program(
    set: &CoveringSet,
    rates: &Rates,
    start_band: i64,
    len_cap: usize,
    dwell_cap: u64,
) -> Result<SlowProgram> {
    if start_band < 1 {
        return Err(Error::InvalidParameter(
            "slow programs climb the positive bands; start at n >= 1".into(),
        ));
    }
    let ln_eps = set.eps.ln();
    let mut dwells = Vec::new();
    let mut prefix = Vec::new();
    let mut truncated = false;
    let mut band = start_band;
    let mut t: u64 = 0;
    loop {
        // log M(mu^n(R_+)) = core_{n+1} - log eps when the next core is
        // tabulated.
        let threshold = set.annulus(band + 1).map(|b| b.core_log_r - ln_eps);
        let (dwell, jump_t) = match threshold {
            Some(th) => match rates.overtake(th, t + 1) {
                Some(tj) => (DwellCount::Steps(tj - t), Some(tj)),
                None => (DwellCount::BeyondHorizon, None),
            },
            None => (DwellCount::BeyondHorizon, None),
        };
        dwells.push(BandDwell {
            band,
            threshold,
            dwell,
        });
        let steps = match dwell {
            DwellCount::Steps(s) => s,
            DwellCount::BeyondHorizon => {
                // Fill the remaining materialized prefix and stop.
                while prefix.len() < len_cap {
                    prefix.push(band);
                }
                truncated = true;
                break;
            }
        };
        let materialized = steps.min(dwell_cap).min((len_cap - prefix.len()) as u64);
        if materialized < steps {
            truncated = true;
        }
        for _ in 0..materialized {
            prefix.push(band);
        }
        if prefix.len() >= len_cap {
            break;
        }
        t = jump_t.unwrap();
        band += 1;
        if rates.at(t).is_none() {
            break;
        }
    }
    Ok(SlowProgram {
        itinerary: AnnularItinerary {
            prefix,
            cycle: None,
            kind: ProgramKind::Slow,
        },
        dwells,
        dwell_truncated: truncated,
    })
}

/// How a transition is known to be realizable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionSupport {
    /// The straddle condition was checked numerically on the core circle.
    Certified,
    /// The source circle is beyond the evaluation horizon; the target lies
    /// in the range the covering theorem guarantees (`[1, n+1]` for
    /// `n >= 1`, mirrored below).
    TheoremGuaranteed,
    /// Outside every covered range (or the bands are not tabulated).
    Unsupported,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransitionCheck {
    pub from: i64,
    pub to: i64,
    pub support: TransitionSupport,
}

fn theorem_range_contains(from: i64, to: i64) -> bool {
    if to == 0 {
        return false;
    }
    if from > 0 {
        (1..=from + 1).contains(&to)
    } else if from < 0 {
        (from - 1..=-1).contains(&to)
    } else {
        false
    }
}

/// Survey every consecutive transition of the program against the covering
/// evidence: a numerically certified straddle where the source circle is
/// evaluable, the covering theorem's guaranteed range otherwise, and
/// `Unsupported` where neither applies.
pub fn survey_transitions(
    map: &CStarMap,
    set: &CoveringSet,
    itinerary: &AnnularItinerary,
) -> Vec<TransitionCheck> {
    let mut extrema_cache: BTreeMap<i64, Option<ModulusSample>> = BTreeMap::new();
    let mut checks = Vec::new();
    for (from, to) in itinerary.transitions() {
        let support = match (set.annulus(from), set.annulus(to)) {
            (Some(from_band), Some(to_band)) => {
                let sample = extrema_cache
                    .entry(from)
                    .or_insert_with(|| circle_extrema(map, from_band.core_log_r, DEFAULT_TOL).ok());
                match sample {
                    Some(s) => {
                        let slack_in = 1e-9 * to_band.inner_log_r.abs().max(1.0);
                        let slack_out = 1e-9 * to_band.outer_log_r.abs().max(1.0);
                        if s.log_min <= to_band.inner_log_r + slack_in
                            && s.log_max >= to_band.outer_log_r - slack_out
                        {
                            TransitionSupport::Certified
                        } else {
                            TransitionSupport::Unsupported
                        }
                    }
                    None if theorem_range_contains(from, to) => {
                        TransitionSupport::TheoremGuaranteed
                    }
                    None => TransitionSupport::Unsupported,
                }
            }
            _ => TransitionSupport::Unsupported,
        };
        checks.push(TransitionCheck { from, to, support });
    }
    checks
}

/// Strict validation: like [`survey_transitions`] but any unsupported
/// transition is an error.
pub fn validate_program(
    map: &CStarMap,
    set: &CoveringSet,
    itinerary: &AnnularItinerary,
) -> Result<Vec<TransitionCheck>> {
    let checks = survey_transitions(map, set, itinerary);
    for c in &checks {
        if c.support == TransitionSupport::Unsupported {
            return Err(Error::Unrealizable {
                from: c.from,
                to: c.to,
            });
        }
    }
    Ok(checks)
}

/// Parsed form of the CLI `--itinerary` argument.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ItinerarySpec {
    /// Plain comma list of band indices.
    Custom(Vec<i64>),
    Fast { start: i64, len: usize },
    Periodic(Vec<i64>),
    Bounded { low: i64, len: usize },
    Unbounded { peak: i64, len: usize },
    Slow { slope: f64, intercept: f64, len: usize },
}

/// Grammar: `1,2,3` | `fast:START:LEN` | `periodic:W1,W2,...` |
/// `bounded:LOW:LEN` | `unbounded:PEAK:LEN` | `slow:SLOPE:INTERCEPT:LEN`.
pub fn parse_itinerary_spec(text: &str) -> Result<ItinerarySpec> {
    let text = text.trim();
    let err = |reason: &str| Error::Parse {
        pos: 0,
        reason: reason.to_string(),
    };
    let parse_int_list = |s: &str| -> Result<Vec<i64>> {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<i64>()
                    .map_err(|_| err(&format!("`{p}` is not an integer band index")))
            })
            .collect()
    };
    if let Some(rest) = text.strip_prefix("fast:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 {
            return Err(err("fast:START:LEN"));
        }
        return Ok(ItinerarySpec::Fast {
            start: parts[0].trim().parse().map_err(|_| err("bad START"))?,
            len: parts[1].trim().parse().map_err(|_| err("bad LEN"))?,
        });
    }
    if let Some(rest) = text.strip_prefix("periodic:") {
        return Ok(ItinerarySpec::Periodic(parse_int_list(rest)?));
    }
    if let Some(rest) = text.strip_prefix("bounded:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 {
            return Err(err("bounded:LOW:LEN"));
        }
        return Ok(ItinerarySpec::Bounded {
            low: parts[0].trim().parse().map_err(|_| err("bad LOW"))?,
            len: parts[1].trim().parse().map_err(|_| err("bad LEN"))?,
        });
    }
    if let Some(rest) = text.strip_prefix("unbounded:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 {
            return Err(err("unbounded:PEAK:LEN"));
        }
        return Ok(ItinerarySpec::Unbounded {
            peak: parts[0].trim().parse().map_err(|_| err("bad PEAK"))?,
            len: parts[1].trim().parse().map_err(|_| err("bad LEN"))?,
        });
    }
    if let Some(rest) = text.strip_prefix("slow:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(err("slow:SLOPE:INTERCEPT:LEN"));
        }
        return Ok(ItinerarySpec::Slow {
            slope: parts[0].trim().parse().map_err(|_| err("bad SLOPE"))?,
            intercept: parts[1].trim().parse().map_err(|_| err("bad INTERCEPT"))?,
            len: parts[2].trim().parse().map_err(|_| err("bad LEN"))?,
        });
    }
    if text.is_empty() {
        return Err(err("empty itinerary"));
    }
    Ok(ItinerarySpec::Custom(parse_int_list(text)?))
}
