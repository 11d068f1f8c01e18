//! Escape dynamics of transcendental self-maps of the punctured plane.
//!
//! The crate makes the annular machinery of this class of maps executable:
//!
//! * [`map`]: maps `z^n exp(g(z) + h(1/z))` with polynomial `g`, `h`
//!   (including the complexified Arnol'd family), evaluated in log-polar
//!   coordinates so iterates never overflow;
//! * [`modulus`]: maximum/minimum modulus along circles, relaxed variants,
//!   iterated radius sequences and grid-certified escape thresholds;
//! * [`lemmas`]: numerical verifiers for the growth/convexity/power/ratio
//!   properties and the iterated-vs-relaxed comparison;
//! * [`partition`] and [`itinerary`]: the annular partition, essential
//!   itineraries and annular indices;
//! * [`orbit`]: finite-horizon orbit classification and the fast-escape
//!   membership test;
//! * [`covering`] and [`winding`]: compact covering annuli, covering
//!   certificates, and the argument-principle preimage oracle;
//! * [`construct`] and [`program`]: subdivision shooting for prescribed
//!   itineraries, mixed fast annuli, and the five itinerary program
//!   families;
//! * [`raster`]: bit-exact classification images and CSV exports;
//! * [`config`]: reproducible run configuration and manifests.
//!
//! Everything is deterministic: pseudo-randomness comes from the splitmix
//! generator in [`rng`] seeded from the config, parallel rendering reduces
//! in index order, and reruns produce identical bytes.

pub mod config;
pub mod construct;
pub mod covering;
pub mod error;
pub mod itinerary;
pub mod lemmas;
pub mod map;
pub mod modulus;
pub mod orbit;
pub mod parse;
pub mod partition;
pub mod program;
pub mod raster;
pub mod rng;
pub mod winding;

pub use config::Config;
pub use covering::{
    build_covering_annuli, certify_covering, choose_eps, CoveringAnnulus, CoveringCertificate,
    CoveringSet,
};
pub use construct::{
    mixed_fast_annuli, realize_orbit, scan_mixed_r0, MixedAnnuli, RealizeOptions, RealizeOutcome,
};
pub use error::{Error, Result};
pub use itinerary::{EssSymbol, EssentialItinerary};
pub use map::{CStarMap, LogPoint};
pub use modulus::{
    find_thresholds, iterate_radius, max_modulus, min_modulus, relaxed_modulus, ModulusSample,
    RadiusSequence, Thresholds,
};
pub use orbit::{classify_orbit, fast_escape_test, OrbitRecord, OrbitVerdict};
pub use parse::{format_map, parse_map};
pub use partition::{build_partition, AnnularPartition};
pub use program::{parse_itinerary_spec, AnnularItinerary, ItinerarySpec, ProgramKind};
pub use raster::{component_probe, render_classification, ClassGrid, RenderWindow};
