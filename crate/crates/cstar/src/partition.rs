//! The annular partition {A_n}: bands between successive iterates of the
//! maximum modulus above `R_+` and of the minimum modulus below `R_-`,
//! with the core band `A_0` in between.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::CStarMap;
use crate::modulus::{circle_extrema, DEFAULT_TOL};

/// Boundary log-radii of the partition up to the representable depth.
///
/// `upper[n] = log M^n(R_+)` is strictly increasing, `lower[n] = log m^n(R_-)`
/// strictly decreasing; band `A_n` for `n > 0` is `upper[n-1] <= L < upper[n]`,
/// `A_0` is the open band between the thresholds, and `A_n` for `n < 0` is
/// `lower[-n] < L <= lower[-n-1]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnularPartition {
    pub log_r_plus: f64,
    pub log_r_minus: f64,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

/// Index of the band containing a log-modulus, with a saturation flag for
/// values beyond the tabulated depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandIndex {
    pub index: i64,
    pub saturated: bool,
}

impl AnnularPartition {
    pub fn depth_plus(&self) -> usize {
        self.upper.len() - 1
    }

    pub fn depth_minus(&self) -> usize {
        self.lower.len() - 1
    }

    /// Band membership per the half-open conventions: upper bands are closed
    /// below and open above, lower bands open below and closed above, `A_0`
    /// open on both sides. Indices beyond the tabulated depth saturate.
    pub fn annulus_index(&self, l: f64) -> BandIndex {
        if l > self.lower[0] && l < self.upper[0] {
            return BandIndex {
                index: 0,
                saturated: false,
            };
        }
        if l >= self.upper[0] {
            let n = self.upper.partition_point(|&u| u <= l);
            return BandIndex {
                index: n as i64,
                saturated: n == self.upper.len(),
            };
        }
        let n = self.lower.partition_point(|&v| v >= l);
        BandIndex {
            index: -(n as i64),
            saturated: n == self.lower.len(),
        }
    }

    /// CSV rows `n,log_lo,log_hi`, outermost lower band first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,log_lo,log_hi\n");
        for n in (1..self.lower.len()).rev() {
            out.push_str(&format!(
                "{},{:.16e},{:.16e}\n",
                -(n as i64),
                self.lower[n],
                self.lower[n - 1]
            ));
        }
        out.push_str(&format!(
            "0,{:.16e},{:.16e}\n",
            self.log_r_minus, self.log_r_plus
        ));
        for n in 1..self.upper.len() {
            out.push_str(&format!(
                "{},{:.16e},{:.16e}\n",
                n,
                self.upper[n - 1],
                self.upper[n]
            ));
        }
        out
    }
}

/// Tabulate the partition to `depth` levels on each side (or fewer when the
/// horizon intervenes). Requires `log_r_minus < 0 < log_r_plus` and genuine
/// expansion at both thresholds.
pub fn build_partition(
    map: &CStarMap,
    log_r_plus: f64,
    log_r_minus: f64,
    depth: usize,
) -> Result<AnnularPartition> {
    if !(log_r_minus < 0.0 && 0.0 < log_r_plus) {
        return Err(Error::InvalidParameter(format!(
            "thresholds must satisfy log R_- < 0 < log R_+, got {log_r_minus} and {log_r_plus}"
        )));
    }
    let mut upper = vec![log_r_plus];
    for n in 1..=depth {
        let prev = upper[n - 1];
        if prev.abs() > map.horizon {
            break;
        }
        let next = circle_extrema(map, prev, DEFAULT_TOL)?.log_max;
        if n == 1 && next <= prev {
            return Err(Error::NotExpanding(format!(
                "log M(R_+) = {next} <= log R_+ = {prev}"
            )));
        }
        if next <= prev {
            return Err(Error::NotExpanding(format!(
                "upper sequence stalls at level {n}: {next} <= {prev}"
            )));
        }
        upper.push(next);
    }
    let mut lower = vec![log_r_minus];
    for n in 1..=depth {
        let prev = lower[n - 1];
        if prev.abs() > map.horizon {
            break;
        }
        let next = circle_extrema(map, prev, DEFAULT_TOL)?.log_min;
        if next >= prev {
            return Err(Error::NotExpanding(format!(
                "lower sequence stalls at level {n}: {next} >= {prev}"
            )));
        }
        lower.push(next);
    }
    Ok(AnnularPartition {
        log_r_plus,
        log_r_minus,
        upper,
        lower,
    })
}
