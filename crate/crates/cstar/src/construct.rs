//! Realizing points with prescribed annular itineraries by subdivision
//! shooting, and the mixed annuli that combine maximum- and minimum-modulus
//! iterates along an essential itinerary.

use serde::{Deserialize, Serialize};

use crate::covering::CoveringAnnulus;
use crate::error::{Error, Result};
use crate::itinerary::{EssSymbol, EssentialItinerary};
use crate::map::{CStarMap, LogPoint};
use crate::modulus::{circle_extrema, DEFAULT_TOL};

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RealizeOptions {
    /// Initial grid is `grid x grid` cells over the starting band.
    pub grid: usize,
    /// Bands are shrunk by this much (log scale) in the stencil test.
    pub margin: f64,
    /// Surviving cells larger than this diameter are quadrisected.
    pub tol: f64,
    /// Cap on live cells per generation.
    pub max_cells: usize,
    /// Cap on subdivision generations within one round.
    pub max_generations: usize,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        RealizeOptions {
            grid: 16,
            margin: 0.1,
            tol: 1e-3,
            max_cells: 1024,
            max_generations: 96,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    id: u64,
    l_lo: f64,
    l_hi: f64,
    t_lo: f64,
    t_hi: f64,
}

impl Cell {
    fn center(&self) -> LogPoint {
        LogPoint::new(0.5 * (self.l_lo + self.l_hi), 0.5 * (self.t_lo + self.t_hi))
    }

    fn diameter(&self) -> f64 {
        (self.l_hi - self.l_lo).max(self.t_hi - self.t_lo)
    }

    fn stencil(&self) -> [LogPoint; 9] {
        let mut out = [LogPoint { l: 0.0, theta: 0.0 }; 9];
        let mut i = 0;
        for fl in [0.0, 0.5, 1.0] {
            for ft in [0.0, 0.5, 1.0] {
                out[i] = LogPoint::new(
                    self.l_lo + fl * (self.l_hi - self.l_lo),
                    self.t_lo + ft * (self.t_hi - self.t_lo),
                );
                i += 1;
            }
        }
        out
    }

    fn quadrisect(&self, next_id: &mut u64) -> [Cell; 4] {
        let lm = 0.5 * (self.l_lo + self.l_hi);
        let tm = 0.5 * (self.t_lo + self.t_hi);
        let mut make = |l_lo, l_hi, t_lo, t_hi| {
            let c = Cell {
                id: *next_id,
                l_lo,
                l_hi,
                t_lo,
                t_hi,
            };
            *next_id += 1;
            c
        };
        [
            make(self.l_lo, lm, self.t_lo, tm),
            make(self.l_lo, lm, tm, self.t_hi),
            make(lm, self.l_hi, self.t_lo, tm),
            make(lm, self.l_hi, tm, self.t_hi),
        ]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: usize,
    pub generations: usize,
    pub survivors: usize,
    pub cells_tested: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RealizeOutcome {
    pub point: LogPoint,
    /// Deepest round whose band membership the returned point passed in the
    /// fresh forward re-verification.
    pub verified_depth: usize,
    /// Whether the full itinerary was realized.
    pub completed: bool,
    /// Present when subdivision stalled before the last round.
    pub stall: Option<String>,
    pub rounds: Vec<RoundTrace>,
}

/// Deepest `k` such that `f^j(point)` lies strictly inside `bands[j]` for
/// all `j <= k`, evaluated fresh from the map; `None` when even the first
/// band fails.
pub fn verify_orbit_in_bands(
    map: &CStarMap,
    point: LogPoint,
    bands: &[CoveringAnnulus],
) -> Option<usize> {
    let mut z = point;
    let mut depth = None;
    for (k, band) in bands.iter().enumerate() {
        if !band.strictly_inside(z.l, 0.0) {
            return depth;
        }
        depth = Some(k);
        if k + 1 < bands.len() {
            match map.eval(z) {
                Ok(next) => z = next,
                Err(_) => return depth,
            }
        }
    }
    depth
}

enum CellStatus {
    Pass,
    /// At least one stencil orbit is evaluable; the score is the smallest
    /// distance of a stencil image to the *center* of the shrunk band.
    /// Scoring against the center rather than the interval keeps a gradient
    /// inside the band, so subdivision homes onto cells that map well into
    /// the interior instead of freezing on edge-straddling ties.
    Candidate(f64),
    /// No stencil orbit reaches the step inside the horizon.
    Dead,
}

fn classify_cell(map: &CStarMap, cell: &Cell, step: usize, lo: f64, hi: f64) -> CellStatus {
    let mid = 0.5 * (lo + hi);
    let mut all_in = true;
    let mut best_center_dist = f64::INFINITY;
    for p in cell.stencil() {
        let mut z = p;
        let mut ok = true;
        for _ in 0..step {
            match map.eval(z) {
                Ok(next) => z = next,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            all_in = false;
            continue;
        }
        best_center_dist = best_center_dist.min((z.l - mid).abs());
        if z.l < lo || z.l > hi {
            all_in = false;
        }
    }
    if !best_center_dist.is_finite() {
        CellStatus::Dead
    } else if all_in {
        CellStatus::Pass
    } else {
        CellStatus::Candidate(best_center_dist)
    }
}

/// Locate a point whose orbit visits the given bands in order:
/// `f^k(point)` in `bands[k]`.
///
/// Rectangular cells in `(L, theta)` over the starting band are filtered
/// round by round: a cell survives round `k` when the images of its 3x3
/// stencil under `f^k` lie in `bands[k]` shrunk by `margin`. When no cell
/// passes outright, the most promising border cells (smallest stencil
/// violation) are quadrisected and retried, up to the generation cap, so
/// thin preimage slivers of strongly expanding steps are still found.
/// Survivors wider than `tol` are quadrisected between rounds. The returned
/// point is the center of a surviving cell and is re-verified by a fresh
/// forward orbit; results are numerically verified candidates, not
/// certified enclosures.
pub fn realize_orbit(
    map: &CStarMap,
    bands: &[CoveringAnnulus],
    opts: &RealizeOptions,
) -> Result<RealizeOutcome> {
    if bands.is_empty() {
        return Err(Error::InvalidParameter("empty itinerary".into()));
    }
    let start = &bands[0];
    if bands.len() == 1 {
        // No transition to satisfy: the core circle point suffices.
        let point = LogPoint::new(start.core_log_r, 0.0);
        return Ok(RealizeOutcome {
            point,
            verified_depth: 0,
            completed: true,
            stall: None,
            rounds: Vec::new(),
        });
    }
    for band in bands {
        if band.outer_log_r - band.inner_log_r <= 2.0 * opts.margin {
            return Err(Error::NoCellSurvives {
                round: 0,
                detail: format!(
                    "margin {} exceeds the half-width of band {}",
                    opts.margin, band.index
                ),
            });
        }
    }

    let grid = opts.grid.max(2);
    let mut next_id = 0u64;
    let mut frontier: Vec<Cell> = Vec::with_capacity(grid * grid);
    let dl = (start.outer_log_r - start.inner_log_r) / grid as f64;
    let dt = 2.0 * PI / grid as f64;
    for i in 0..grid {
        for j in 0..grid {
            frontier.push(Cell {
                id: next_id,
                l_lo: start.inner_log_r + dl * i as f64,
                l_hi: start.inner_log_r + dl * (i + 1) as f64,
                t_lo: -PI + dt * j as f64,
                t_hi: -PI + dt * (j + 1) as f64,
            });
            next_id += 1;
        }
    }

    let mut rounds = Vec::new();
    let mut last_good: Vec<Cell> = Vec::new();
    let mut stall: Option<String> = None;
    let mut reached = 0usize;
    for (k, band) in bands.iter().enumerate() {
        let lo = band.inner_log_r + opts.margin;
        let hi = band.outer_log_r - opts.margin;
        let mut generations = 0usize;
        let mut tested = 0usize;
        let survivors = loop {
            let mut pass: Vec<Cell> = Vec::new();
            let mut border: Vec<(f64, Cell)> = Vec::new();
            for cell in &frontier {
                tested += 1;
                match classify_cell(map, cell, k, lo, hi) {
                    CellStatus::Pass => pass.push(*cell),
                    CellStatus::Candidate(score) => border.push((score, *cell)),
                    CellStatus::Dead => {}
                }
            }
            if !pass.is_empty() {
                break Some(pass);
            }
            generations += 1;
            if generations > opts.max_generations || border.is_empty() {
                break None;
            }
            border.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.id.cmp(&b.1.id)));
            border.truncate((opts.max_cells / 4).max(1));
            let mut refined = Vec::with_capacity(border.len() * 4);
            for (_, cell) in &border {
                if cell.diameter() < 1e-14 * (1.0 + cell.l_lo.abs()) {
                    continue;
                }
                refined.extend_from_slice(&cell.quadrisect(&mut next_id));
            }
            if refined.is_empty() {
                break None;
            }
            frontier = refined;
        };
        match survivors {
            Some(mut cells) => {
                rounds.push(RoundTrace {
                    round: k,
                    generations,
                    survivors: cells.len(),
                    cells_tested: tested,
                });
                last_good = cells.clone();
                reached = k;
                // Keep resolution moving: split wide survivors before the
                // next round.
                let mut refined = Vec::new();
                for cell in cells.drain(..) {
                    if cell.diameter() > opts.tol {
                        refined.extend_from_slice(&cell.quadrisect(&mut next_id));
                    } else {
                        refined.push(cell);
                    }
                }
                refined.truncate(opts.max_cells);
                frontier = refined;
            }
            None => {
                if k == 0 {
                    return Err(Error::NoCellSurvives {
                        round: 0,
                        detail: "no starting cell maps into the shrunk band".into(),
                    });
                }
                stall = Some(format!(
                    "no cell survives round {k} after {generations} generations"
                ));
                rounds.push(RoundTrace {
                    round: k,
                    generations,
                    survivors: 0,
                    cells_tested: tested,
                });
                break;
            }
        }
    }

    // A stall before any transition was realized is a failed construction,
    // not a partial result.
    if reached == 0 && stall.is_some() {
        return Err(Error::NoCellSurvives {
            round: 1,
            detail: stall.unwrap(),
        });
    }

    // Fresh re-verification, in deterministic cell order.
    let target_depth = reached;
    for cell in &last_good {
        let point = cell.center();
        if let Some(depth) = verify_orbit_in_bands(map, point, &bands[..=target_depth]) {
            if depth >= target_depth {
                return Ok(RealizeOutcome {
                    point,
                    verified_depth: depth,
                    completed: stall.is_none() && depth + 1 == bands.len(),
                    stall,
                    rounds,
                });
            }
        }
    }
    Err(Error::NoCellSurvives {
        round: target_depth,
        detail: "no surviving cell center re-verified".into(),
    })
}

/// One verified inequality of the mixed construction.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MixedCheck {
    pub n: usize,
    pub symbol: EssSymbol,
    /// The plain radius `log R_n`.
    pub plain: f64,
    /// The band edge it must clear: `log(eps^2 M(R~_{n-1}))` on symbol inf,
    /// `log(m(R~_{n-1}) / eps^2)` on symbol 0.
    pub edge: f64,
}

/// Mixed covering annuli along an essential itinerary: band `n` surrounds
/// the relaxed radius `R~_n` (iterated mu/nu with a head start), and the
/// verified inequalities place it beyond the plain radius `R_n` on the
/// correct side, so realized orbits are fast escaping for `e`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixedAnnuli {
    pub eps: f64,
    pub log_r0: f64,
    /// Band for step `n` at index `n`.
    pub annuli: Vec<CoveringAnnulus>,
    /// `log R_n` (plain max/min iteration from `log_r0`).
    pub plain_radii: Vec<f64>,
    /// `log R~_n` (relaxed iteration from the head start).
    pub tilde_radii: Vec<f64>,
    pub checks: Vec<MixedCheck>,
    pub horizon_truncated: bool,
}

/// Build the mixed annuli to `depth` steps and verify the placement
/// inequalities at each step. A failed inequality signals that `log_r0` is
/// not far enough out for this `eps`; rescan with a larger (or smaller)
/// starting radius.
pub fn mixed_fast_annuli(
    map: &CStarMap,
    e: &EssentialItinerary,
    eps: f64,
    log_r0: f64,
    depth: usize,
) -> Result<MixedAnnuli> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be in (0, 1), got {eps}"
        )));
    }
    let ln_eps = eps.ln();
    let s0 = circle_extrema(map, log_r0, DEFAULT_TOL)?;
    // Head start: R~_0 = mu(R_0) > R_0 when e_0 = inf, nu(R_0) < R_0 when
    // e_0 = 0.
    let tilde0 = match e.symbol(0) {
        EssSymbol::Inf => ln_eps + s0.log_max,
        EssSymbol::Zero => s0.log_min - ln_eps,
    };
    let mut plain = vec![log_r0];
    let mut tilde = vec![tilde0];
    let mut annuli = vec![CoveringAnnulus::around_core(0, tilde0, eps)];
    let mut checks = Vec::new();
    let mut truncated = false;

    for n in 1..=depth {
        let p_prev = plain[n - 1];
        let t_prev = tilde[n - 1];
        if p_prev.abs() > map.horizon || t_prev.abs() > map.horizon {
            truncated = true;
            break;
        }
        let sp = circle_extrema(map, p_prev, DEFAULT_TOL)?;
        let st = circle_extrema(map, t_prev, DEFAULT_TOL)?;
        let symbol = e.symbol(n);
        let (p_next, t_next) = match symbol {
            EssSymbol::Inf => (sp.log_max, ln_eps + st.log_max),
            EssSymbol::Zero => (sp.log_min, st.log_min - ln_eps),
        };
        let band = CoveringAnnulus::around_core(n as i64, t_next, eps);
        // R_n < eps^2 M(R~_{n-1}) = inner edge on symbol inf;
        // m(R~_{n-1}) / eps^2 = outer edge < R_n on symbol 0.
        let (edge, pass) = match symbol {
            EssSymbol::Inf => (band.inner_log_r, p_next < band.inner_log_r),
            EssSymbol::Zero => (band.outer_log_r, band.outer_log_r < p_next),
        };
        if !pass {
            return Err(Error::InequalityViolation {
                index: n,
                detail: format!(
                    "symbol {:?}: log R_{n} = {p_next} vs band edge {edge}; \
                     increase the head-start radius",
                    symbol
                ),
            });
        }
        checks.push(MixedCheck {
            n,
            symbol,
            plain: p_next,
            edge,
        });
        plain.push(p_next);
        tilde.push(t_next);
        annuli.push(band);
    }

    Ok(MixedAnnuli {
        eps,
        log_r0,
        annuli,
        plain_radii: plain,
        tilde_radii: tilde,
        checks,
        horizon_truncated: truncated,
    })
}

/// Scan candidate starting radii (in order) for the first for which the
/// mixed construction verifies to at least `min_depth` checks.
pub fn scan_mixed_r0(
    map: &CStarMap,
    e: &EssentialItinerary,
    eps: f64,
    min_depth: usize,
    candidates: &[f64],
) -> Result<MixedAnnuli> {
    let mut last_err = None;
    for &log_r0 in candidates {
        match mixed_fast_annuli(map, e, eps, log_r0, min_depth) {
            Ok(m) if m.checks.len() >= min_depth => return Ok(m),
            Ok(_) => {
                last_err = Some(Error::ThresholdNotFound(format!(
                    "horizon truncates the mixed sequence before depth {min_depth} at log R_0 = {log_r0}"
                )))
            }
            Err(e @ Error::InequalityViolation { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::ThresholdNotFound("empty candidate list for the mixed-radius scan".into())
    }))
}
