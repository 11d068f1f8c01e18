//! Per-pixel orbit classification over log-polar windows, PPM output with
//! a legend sidecar, a connected-component probe, and the extended modulus
//! CSV export.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::map::{CStarMap, LogPoint};
use crate::modulus::{circle_extrema, DEFAULT_TOL};
use crate::orbit::{classify_orbit, OrbitVerdict, DEFAULT_ESCAPE_LEVEL};
use crate::partition::AnnularPartition;
use crate::rng::SplitMix64;

/// Hard cap on pixels per render.
pub const PIXEL_CAP: u64 = 1 << 24;
/// Essential-symbol prefix length hashed into the class id.
pub const CLASS_PREFIX_LEN: usize = 6;

/// A log-polar viewport: rows are equal log-modulus bands, top = `l_max`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RenderWindow {
    pub l_min: f64,
    pub l_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub width: usize,
    pub height: usize,
    pub budget: usize,
    pub palette_id: u32,
}

impl RenderWindow {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_min < self.l_max) {
            return Err(Error::InvalidParameter(format!(
                "window needs l_min < l_max, got {} and {}",
                self.l_min, self.l_max
            )));
        }
        let span = self.theta_max - self.theta_min;
        if !(span > 0.0 && span <= 2.0 * std::f64::consts::PI + 1e-12) {
            return Err(Error::InvalidParameter(
                "theta window must be positive and within one full turn".into(),
            ));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter("window has zero pixels".into()));
        }
        let pixels = self.width as u64 * self.height as u64;
        if pixels > PIXEL_CAP {
            return Err(Error::PixelCapExceeded {
                requested: pixels,
                cap: PIXEL_CAP,
            });
        }
        if self.budget == 0 {
            return Err(Error::InvalidParameter("budget must be at least 1".into()));
        }
        Ok(())
    }

    /// Log-polar point at the center of pixel `(col, row)`; row 0 is the
    /// top of the image at `l_max`.
    pub fn point_of(&self, col: usize, row: usize) -> LogPoint {
        let l = self.l_max - (row as f64 + 0.5) * (self.l_max - self.l_min) / self.height as f64;
        let theta = self.theta_min
            + (col as f64 + 0.5) * (self.theta_max - self.theta_min) / self.width as f64;
        LogPoint { l, theta }
    }

    /// Inverse of [`point_of`](Self::point_of) on pixel centers.
    pub fn pixel_of(&self, p: LogPoint) -> (usize, usize) {
        let col = ((p.theta - self.theta_min) / (self.theta_max - self.theta_min)
            * self.width as f64)
            .floor()
            .clamp(0.0, (self.width - 1) as f64) as usize;
        let row = ((self.l_max - p.l) / (self.l_max - self.l_min) * self.height as f64)
            .floor()
            .clamp(0.0, (self.height - 1) as f64) as usize;
        (col, row)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassInfo {
    pub verdict: OrbitVerdict,
    pub prefix: String,
    pub rgb: [u8; 3],
}

/// Per-pixel class ids with the legend mapping ids to verdict and prefix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassGrid {
    pub width: usize,
    pub height: usize,
    pub class_ids: Vec<u32>,
    pub legend: BTreeMap<u32, ClassInfo>,
}

impl ClassGrid {
    pub fn class_at(&self, col: usize, row: usize) -> u32 {
        self.class_ids[row * self.width + col]
    }

    /// Legend sidecar: `class_id,verdict,prefix,r,g,b`, sorted by id.
    pub fn legend_csv(&self) -> String {
        let mut out = String::from("class_id,verdict,prefix,r,g,b\n");
        for (id, info) in &self.legend {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                id,
                info.verdict.as_str(),
                info.prefix,
                info.rgb[0],
                info.rgb[1],
                info.rgb[2]
            ));
        }
        out
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Class id: order-independent hash of verdict and symbol prefix, so
/// parallel rendering cannot influence ids.
pub fn class_id(verdict: OrbitVerdict, prefix: &str) -> u32 {
    let mut bytes = Vec::with_capacity(prefix.len() + 24);
    bytes.extend_from_slice(verdict.as_str().as_bytes());
    bytes.push(b'|');
    bytes.extend_from_slice(prefix.as_bytes());
    let h = fnv1a64(&bytes);
    (h ^ (h >> 32)) as u32
}

fn color_of(id: u32, palette_id: u32) -> [u8; 3] {
    let mut rng = SplitMix64::new(((palette_id as u64) << 32) ^ id as u64);
    let x = rng.next_u64();
    [
        (x >> 16) as u8 | 0x20,
        (x >> 32) as u8 | 0x20,
        (x >> 48) as u8 | 0x20,
    ]
}

/// Classify every pixel-center orbit and assemble a P6 image.
///
/// Rows are classified in parallel on a dedicated pool of `threads` workers
/// and assembled in row order, so the bytes do not depend on the thread
/// count. Returns the grid and the PPM bytes.
pub fn render_classification(
    map: &CStarMap,
    partition: &AnnularPartition,
    window: &RenderWindow,
    threads: usize,
) -> Result<(ClassGrid, Vec<u8>)> {
    window.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    type RowOut = (Vec<u32>, BTreeMap<u32, ClassInfo>);
    let rows: Vec<RowOut> = pool.install(|| {
        (0..window.height)
            .into_par_iter()
            .map(|row| {
                let mut ids = Vec::with_capacity(window.width);
                let mut legend = BTreeMap::new();
                for col in 0..window.width {
                    let z = window.point_of(col, row);
                    let rec =
                        classify_orbit(map, partition, z, window.budget, DEFAULT_ESCAPE_LEVEL);
                    let prefix = rec.essential_prefix(CLASS_PREFIX_LEN);
                    let id = class_id(rec.verdict, &prefix);
                    legend.entry(id).or_insert_with(|| ClassInfo {
                        verdict: rec.verdict,
                        prefix: prefix.clone(),
                        rgb: color_of(id, window.palette_id),
                    });
                    ids.push(id);
                }
                (ids, legend)
            })
            .collect()
    });

    let mut class_ids = Vec::with_capacity(window.width * window.height);
    let mut legend = BTreeMap::new();
    for (ids, row_legend) in rows {
        class_ids.extend_from_slice(&ids);
        for (id, info) in row_legend {
            legend.entry(id).or_insert(info);
        }
    }
    let grid = ClassGrid {
        width: window.width,
        height: window.height,
        class_ids,
        legend,
    };

    let mut ppm = Vec::with_capacity(grid.class_ids.len() * 3 + 32);
    ppm.extend_from_slice(format!("P6\n{} {}\n255\n", window.width, window.height).as_bytes());
    for id in &grid.class_ids {
        let rgb = grid.legend[id].rgb;
        ppm.extend_from_slice(&rgb);
    }
    Ok((grid, ppm))
}

/// One 4-connected component of filtered pixels.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComponentInfo {
    pub pixels: usize,
    /// Touches the bottom image edge (l_min side).
    pub touches_l_min: bool,
    /// Touches the top image edge (l_max side).
    pub touches_l_max: bool,
}

/// 4-connected component labeling restricted to pixels whose class passes
/// the filter. Edge contact is a within-window proxy for unboundedness
/// toward 0 or infinity; this is a heuristic probe, not a proof.
pub fn component_probe<F>(grid: &ClassGrid, filter: F) -> Vec<ComponentInfo>
where
    F: Fn(&ClassInfo) -> bool,
{
    let keep: Vec<bool> = grid
        .class_ids
        .iter()
        .map(|id| filter(&grid.legend[id]))
        .collect();
    let mut seen = vec![false; keep.len()];
    let mut out = Vec::new();
    for start in 0..keep.len() {
        if !keep[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut info = ComponentInfo {
            pixels: 0,
            touches_l_min: false,
            touches_l_max: false,
        };
        while let Some(p) = stack.pop() {
            info.pixels += 1;
            let (col, row) = (p % grid.width, p / grid.width);
            if row == 0 {
                info.touches_l_max = true;
            }
            if row == grid.height - 1 {
                info.touches_l_min = true;
            }
            let mut push = |q: usize| {
                if keep[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            };
            if col > 0 {
                push(p - 1);
            }
            if col + 1 < grid.width {
                push(p + 1);
            }
            if row > 0 {
                push(p - grid.width);
            }
            if row + 1 < grid.height {
                push(p + grid.width);
            }
        }
        out.push(info);
    }
    out
}

/// Extended modulus CSV with relaxed columns and a horizon flag:
/// `log_r,log_M,theta_max,log_m,theta_min,n_probes,log_mu,log_nu,flag`.
/// Out-of-horizon radii produce a flagged row instead of an error.
pub fn export_modulus_csv(map: &CStarMap, log_radii: &[f64], eps: f64) -> Result<String> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be in (0, 1), got {eps}"
        )));
    }
    let ln_eps = eps.ln();
    let mut out = String::from("log_r,log_M,theta_max,log_m,theta_min,n_probes,log_mu,log_nu,flag\n");
    for &log_r in log_radii {
        match circle_extrema(map, log_r, DEFAULT_TOL) {
            Ok(s) => out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},\n",
                s.log_r,
                s.log_max,
                s.theta_max,
                s.log_min,
                s.theta_min,
                s.n_probes,
                ln_eps + s.log_max,
                s.log_min - ln_eps,
            )),
            Err(Error::HorizonExceeded { .. }) => {
                out.push_str(&format!("{log_r:.16e},,,,,,,,horizon\n"));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
