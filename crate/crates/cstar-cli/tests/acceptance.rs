//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Tolerances and thresholds are pinned in the asserts.

use std::process::Command;
use std::time::Instant;

use cstar::construct::{scan_mixed_r0, verify_orbit_in_bands};
use cstar::covering::{build_covering_annuli, certify_covering, CoveringSet};
use cstar::error::Error;
use cstar::itinerary::{EssSymbol, EssentialItinerary};
use cstar::lemmas::{verify_growth_properties, verify_relaxed_iterates};
use cstar::map::{CStarMap, LogPoint};
use cstar::modulus::circle_extrema;
use cstar::orbit::fast_escape_test;
use cstar::parse::parse_map;
use cstar::partition::build_partition;
use cstar::program::{periodic_program, slow_program, validate_program, DwellCount, Rates};
use cstar::raster::{component_probe, render_classification, RenderWindow};
use cstar::rng::SplitMix64;

const EPS: f64 = 0.36787944117144233; // 1/e
const DELTA: f64 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
const TOL: f64 = 1e-10;

fn test_map() -> CStarMap {
    parse_map("n=0; g=1z; h=-1w").unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cstar"))
}

fn report(criterion: &str, started: Instant, budget_s: Option<f64>) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("criterion {criterion}: PASS ({elapsed:.2}s)");
    if let Some(b) = budget_s {
        assert!(
            elapsed < b,
            "criterion {criterion} exceeded its {b}s runtime budget: {elapsed:.2}s"
        );
    }
}

#[test]
fn criterion_01_modulus_oracle() {
    let t0 = Instant::now();
    let map = test_map();
    for r in [1.1f64, 2.0, 4.0, 8.0, 16.0] {
        let s = circle_extrema(&map, r.ln(), TOL).unwrap();
        let want = r - 1.0 / r;
        assert!(
            (s.log_max - want).abs() <= 1e-9,
            "log M({r}) = {} vs {want}",
            s.log_max
        );
        assert!(
            (s.log_min + want).abs() <= 1e-9,
            "log m({r}) = {} vs {}",
            s.log_min,
            -want
        );
    }
    for beta in [0.5f64, 2.0] {
        let arnold = CStarMap::arnold(0.0, beta).unwrap();
        for r in [2.0f64, 4.0, 8.0] {
            let s = circle_extrema(&arnold, r.ln(), TOL).unwrap();
            let want = r.ln() + beta * (r - 1.0 / r) / 2.0;
            assert!(
                (s.log_max - want).abs() <= 1e-9,
                "arnold(0,{beta}): log M({r}) = {} vs {want}",
                s.log_max
            );
        }
    }
    report("1 (modulus oracle)", t0, Some(1.0));
}

#[test]
fn criterion_02_growth_property_suite() {
    let t0 = Instant::now();
    let ks = [1.5f64, 2.0, 3.0];
    for map in [test_map(), CStarMap::arnold(0.0, 2.0).unwrap()] {
        // (i), (ii), (iv) on an equispaced 8-point log grid.
        let grid: Vec<f64> = (0..8).map(|i| 0.6 + 0.3 * i as f64).collect();
        let rep = verify_growth_properties(&map, &grid, &[2.0]).unwrap();
        assert!(rep.convex_max.passed(), "{:?}", rep.notes);
        assert!(rep.convex_min.passed(), "{:?}", rep.notes);
        assert!(rep.growth_max.passed() && rep.growth_min.passed(), "{:?}", rep.notes);
        assert!(rep.ratio_max.passed() && rep.ratio_min.passed(), "{:?}", rep.notes);
        // (iii) with k in {1.5, 2, 3} at r in {4, 8}, tolerance 1e-9,
        // plus the dual inequalities for m.
        let rep = verify_growth_properties(&map, &[4f64.ln(), 8f64.ln()], &ks).unwrap();
        assert!(rep.power_max.passed(), "{:?}", rep.notes);
        assert!(rep.power_min.passed(), "{:?}", rep.notes);
    }
    report("2 (growth property suite)", t0, Some(5.0));
}

#[test]
fn criterion_03_relaxed_iterates() {
    let t0 = Instant::now();
    let map = test_map();
    let cmp = verify_relaxed_iterates(&map, 0.1, 3.0, 16).unwrap();
    assert!(cmp.upper.passed(), "upper checks: {:?}", cmp.upper.checks);
    assert!(
        cmp.upper.checks.len() >= 2,
        "expected at least the n = 1, 2 comparisons before the horizon"
    );
    // Trace against the closed-form recurrences: M-iterates follow
    // a -> 2 sinh(a), relaxed iterates b -> ln(eps) + 2 sinh(b).
    let mut a = 3.0f64;
    for (n, got) in cmp.upper.iterates.iter().enumerate().skip(1) {
        a = 2.0 * a.sinh();
        assert!(
            (got - a).abs() <= 1e-6 * a.abs(),
            "M^{n}: {got} vs closed form {a}"
        );
    }
    let mut b = 3.0f64;
    for (n, got) in cmp.upper.relaxed.iter().enumerate().skip(1) {
        b = 0.1f64.ln() + 2.0 * b.sinh();
        assert!(
            (got - b).abs() <= 1e-6 * b.abs(),
            "mu^{n}: {got} vs closed form {b}"
        );
    }
    report("3 (relaxed-iterate comparison)", t0, None);
}

fn assert_full_pass(map: &CStarMap, set: &CoveringSet, from: i64, to: i64) {
    let cert = certify_covering(map, set, from, to, DELTA, 16, 1).unwrap();
    assert!(cert.length_check.pass, "{from}->{to} length");
    assert!(cert.straddle_pass, "{from}->{to} straddle");
    assert!(cert.doubling_pass, "{from}->{to} doubling");
    let oracle = cert.oracle.expect("oracle ran");
    assert_eq!(oracle.targets_tested, 16);
    assert_eq!(oracle.inconclusive, 0, "{:?}", oracle.detail);
    assert!(
        oracle.min_preimage_count.unwrap() >= 1,
        "{from}->{to} oracle count"
    );
}

#[test]
fn criterion_04_covering_certification() {
    let t0 = Instant::now();
    let map = test_map();
    // Pinned scale log R_+ = 3: B_1 -> B_2 certifies fully, including the
    // 16-target winding oracle; B_2 -> B_3 is beyond the horizon (B_3's
    // core is not even tabulatable) and must be reported as such, not
    // silently passed.
    let p = build_partition(&map, 3.0, -3.0, 8).unwrap();
    let set = build_covering_annuli(&map, &p, EPS, 3).unwrap();
    assert_full_pass(&map, &set, 1, 2);
    assert!(set.annulus(3).is_none());
    assert!(set.horizon_truncated);
    assert!(matches!(
        certify_covering(&map, &set, 2, 2, DELTA, 0, 1),
        Err(Error::HorizonExceeded { .. })
    ));
    // The same pair list fits inside the horizon at log R_+ = 1.5, where
    // both certificates must pass in full.
    let p = build_partition(&map, 1.5, -1.5, 8).unwrap();
    let set = build_covering_annuli(&map, &p, EPS, 3).unwrap();
    assert_full_pass(&map, &set, 1, 2);
    assert_full_pass(&map, &set, 2, 3);
    report("4 (covering certification)", t0, Some(30.0));
}

#[test]
fn criterion_05_orbit_realization() {
    let t0 = Instant::now();
    let out = bin()
        .args([
            "construct",
            "--map",
            "n=0; g=1z; h=-1w",
            "--itinerary",
            "1,2,3",
            "--log-r-plus",
            "1.5",
            "--log-r-minus",
            "-1.5",
            "--depth",
            "3",
            "--margin",
            "0.05",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    let report_json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report_json["verified_depth"], 2);
    assert_eq!(report_json["completed"], true);
    let l = report_json["point"]["l"].as_f64().unwrap();
    let theta = report_json["point"]["theta"].as_f64().unwrap();

    // Independent re-evaluation: the orbit must lie in the prescribed
    // B-annuli for k <= 2, within margin 0.05 in log scale.
    let map = test_map();
    let p = build_partition(&map, 1.5, -1.5, 8).unwrap();
    let set = build_covering_annuli(&map, &p, EPS, 3).unwrap();
    let bands = set.resolve(&[1, 2, 3]).unwrap();
    let mut z = LogPoint::new(l, theta);
    for (k, band) in bands.iter().enumerate() {
        assert!(
            z.l >= band.inner_log_r - 0.05 && z.l <= band.outer_log_r + 0.05,
            "step {k}: L = {} outside [{}, {}]",
            z.l,
            band.inner_log_r,
            band.outer_log_r
        );
        if k < 2 {
            z = map.eval(z).unwrap();
        }
    }
    assert_eq!(
        verify_orbit_in_bands(&map, LogPoint::new(l, theta), &bands),
        Some(2)
    );

    // The all-inf realized point passes the fast-escape test to the same
    // depth with log R_0 = log R_+.
    let rep = fast_escape_test(
        &map,
        LogPoint::new(l, theta),
        &EssentialItinerary::all_inf(),
        1.5,
        0,
        2,
    );
    assert!(rep.holds_on_prefix, "{:?}", rep.orbit_log_moduli);
    assert_eq!(rep.checked_depth, Some(2));
    report("5 (orbit realization, exit code 0)", t0, None);
}

#[test]
fn criterion_06_mixed_itinerary() {
    let t0 = Instant::now();
    let map = test_map();
    let e = EssentialItinerary::alternating();
    // Scan log R_0 upward until the placement inequalities verify to
    // depth >= 2.
    let candidates: Vec<f64> = (2..=24).map(|i| i as f64 * 0.25).collect();
    let mixed = scan_mixed_r0(&map, &e, EPS, 2, &candidates).unwrap();
    assert!(mixed.checks.len() >= 2);
    assert!(mixed.checks.iter().all(|c| match c.symbol {
        EssSymbol::Inf => c.plain < c.edge,
        EssSymbol::Zero => c.edge < c.plain,
    }));

    // Certify the consecutive coverings and realize through the CLI.
    let out = bin()
        .args([
            "construct",
            "--map",
            "n=0; g=1z; h=-1w",
            "--essential",
            "i0",
            "--depth",
            "2",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    let report_json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report_json["verified_depth"], 2);
    let certs = report_json["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 2);
    for c in certs {
        assert_eq!(c["length_check"]["pass"], true);
        assert_eq!(c["straddle_pass"], true);
        assert_eq!(c["doubling_pass"], true);
    }
    // Essential symbols alternate inf, 0 on the verified prefix.
    assert_eq!(report_json["essential_prefix"], "i0i");
    report("6 (mixed itinerary at desk scale)", t0, None);
}

#[test]
fn criterion_07_itinerary_programs() {
    let t0 = Instant::now();
    let map = test_map();
    let p = build_partition(&map, 1.5, -1.5, 8).unwrap();
    let set = build_covering_annuli(&map, &p, EPS, 4).unwrap();

    // Periodic [2, 3] validates against the covering evidence.
    let prog = periodic_program(&[2, 3]).unwrap();
    let checks = validate_program(&map, &set, &prog).unwrap();
    assert_eq!(checks.len(), 2);

    // Slow program with log r_t = t: dwell counts match the closed-form
    // recurrence core_{n+1} = ln(eps) + 2 sinh(core_n), T_n = 2 sinh(core_n),
    // dwell_n = floor(T_n) + 1 - (floor(T_{n-1}) + 1), exactly as integers
    // where representable.
    let rates = Rates::Linear {
        slope: 1.0,
        intercept: 0.0,
    };
    let slow = slow_program(&set, &rates, 1, 64, 16).unwrap();
    let mut core = EPS.ln() + 2.0 * 1.5f64.sinh();
    let mut prev_jump: u64 = 0;
    let mut representable = 0;
    for dwell in &slow.dwells {
        let threshold = 2.0 * core.sinh();
        if !threshold.is_finite() || threshold >= 9.0e15 {
            assert_eq!(dwell.dwell, DwellCount::BeyondHorizon);
            break;
        }
        let jump = threshold.floor() as u64 + 1;
        assert_eq!(
            dwell.dwell,
            DwellCount::Steps(jump - prev_jump),
            "band {}: threshold {threshold}",
            dwell.band
        );
        prev_jump = jump;
        core = EPS.ln() + threshold;
        representable += 1;
    }
    assert!(representable >= 2);
    assert!(slow
        .dwells
        .iter()
        .any(|d| d.dwell == DwellCount::BeyondHorizon));

    // Bounded two-symbol program of length 12 realizes to depth >= 4.
    let out = bin()
        .args([
            "construct",
            "--map",
            "n=0; g=1z; h=-1w",
            "--itinerary",
            "bounded:1:12",
            "--log-r-plus",
            "1.5",
            "--log-r-minus",
            "-1.5",
            "--depth",
            "3",
        ])
        .output()
        .unwrap();
    let report_json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let depth = report_json["verified_depth"].as_u64().unwrap();
    assert!(depth >= 4, "bounded program verified only to depth {depth}");
    let entries = report_json["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 12);
    assert!(entries.iter().any(|e| e == 2) && entries.iter().any(|e| e == 1));
    report("7 (itinerary programs)", t0, None);
}

#[test]
fn criterion_08_render_determinism() {
    let t0 = Instant::now();
    let dir = std::env::temp_dir().join(format!("cstar-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut hashes = Vec::new();
    for (run, threads) in [(0, "1"), (1, "8"), (2, "1"), (3, "8")] {
        let prefix = dir.join(format!("r{run}"));
        let out = bin()
            .args([
                "render",
                "--map",
                "n=0; g=1z; h=-1w",
                "--l-min",
                "1",
                "--l-max",
                "6",
                "--width",
                "256",
                "--height",
                "256",
                "--budget",
                "64",
                "--log-r-plus",
                "3",
                "--log-r-minus",
                "-3",
                "--threads",
                threads,
                "--out",
                prefix.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let ppm = std::fs::read(prefix.with_extension("ppm")).unwrap();
        let legend = std::fs::read(format!("{}_legend.csv", prefix.display())).unwrap();
        hashes.push((
            cstar::config::sha256_hex(&ppm),
            cstar::config::sha256_hex(&legend),
        ));
    }
    for h in &hashes[1..] {
        assert_eq!(h, &hashes[0], "render outputs differ across runs/threads");
    }
    let _ = std::fs::remove_dir_all(&dir);
    report("8 (render determinism across threads)", t0, None);
}

#[test]
fn criterion_09_starting_radius_consistency() {
    let t0 = Instant::now();
    let map = test_map();
    let e = EssentialItinerary::all_inf();
    let log_r0 = 3.0;
    let log_r0_doubled = 2f64.ln() + log_r0;
    let mut rng = SplitMix64::new(9);
    let mut passed_big = 0;
    for _ in 0..100 {
        let z = LogPoint::new(rng.next_in(3.7, 4.3), rng.next_in(-1e-6, 1e-6));
        let big = fast_escape_test(&map, z, &e, log_r0_doubled, 0, 8);
        let small = fast_escape_test(&map, z, &e, log_r0, 0, 8);
        if big.holds_on_prefix {
            passed_big += 1;
            let shared = big
                .checked_depth
                .unwrap()
                .min(small.checked_depth.unwrap_or(0));
            assert!(
                small.holds_on_prefix || small.checked_depth.unwrap_or(0) > shared,
                "point {z:?} passes at 2 R_0 but fails at R_0 on the shared prefix"
            );
            // The shared prefix must actually pass at the smaller radius.
            for n in 0..=shared {
                assert!(
                    small.orbit_log_moduli[n] >= small.radii.log_r[n] - 1e-9,
                    "depth {n} at point {z:?}"
                );
            }
        }
    }
    assert!(passed_big >= 50, "only {passed_big} seeds passed at 2 R_0");
    report("9 (starting-radius consistency)", t0, None);
}

#[test]
fn criterion_10_heuristic_unbounded_component_probe() {
    // Heuristic: edge contact within the window is a proxy for
    // unboundedness. A failure here triggers investigation rather than
    // marking the construction wrong, but on this configuration the
    // real-axis escape beam must reach the top edge.
    let t0 = Instant::now();
    let map = test_map();
    let p = build_partition(&map, 3.0, -3.0, 6).unwrap();
    let window = RenderWindow {
        l_min: 1.0,
        l_max: 6.0,
        theta_min: -std::f64::consts::PI,
        theta_max: std::f64::consts::PI,
        width: 256,
        height: 256,
        budget: 64,
        palette_id: 0,
    };
    let (grid, _) = render_classification(&map, &p, &window, 4).unwrap();
    let comps = component_probe(&grid, |c| {
        c.verdict == cstar::orbit::OrbitVerdict::EscapesToInfinity
    });
    assert!(
        comps.iter().any(|c| c.touches_l_max),
        "no escaping component touches the l_max edge (heuristic probe: investigate)"
    );
    report("10 (heuristic component probe)", t0, None);
}
