//! Assessment engine for IoT security best practices.
//!
//! The crate is organised bottom-up:
//!
//! * [`cvss`] parses CVSS v3.1 base vectors and scores them.
//! * [`catalog`] holds best practices, test cases, attacker types and scenarios.
//! * [`findings`] is the ledger of devices, scored findings and observations.
//! * [`ranking`] aggregates findings into per-best-practice statistics.
//! * [`decision`] maps device capabilities to scenarios and ranked best practices.
//! * [`assessor`] evaluates the test cases against declarative device models.
//! * [`workspace`] and [`report`] glue the pieces together for the CLI.

pub mod assessor;
pub mod catalog;
pub mod cvss;
pub mod decision;
pub mod findings;
pub mod ranking;
pub mod report;
pub mod workspace;

/// The catalog shipped with the crate.
pub const BUNDLED_CATALOG: &str = include_str!("../data/catalog.toml");

/// Findings ledger of the nine reference devices.
pub const BUNDLED_LEDGER: &str = include_str!("../data/ledger.toml");

/// Reconstructed device models of the nine reference devices, keyed by device id.
pub const BUNDLED_DEVICE_MODELS: [(&str, &str); 9] = [
    (
        "arlo-essential-indoor",
        include_str!("../data/devices/arlo-essential-indoor.toml"),
    ),
    (
        "blink-mini",
        include_str!("../data/devices/blink-mini.toml"),
    ),
    ("bosch-360", include_str!("../data/devices/bosch-360.toml")),
    (
        "dlink-dcs8010lh",
        include_str!("../data/devices/dlink-dcs8010lh.toml"),
    ),
    (
        "nest-cam-indoor",
        include_str!("../data/devices/nest-cam-indoor.toml"),
    ),
    (
        "nest-protect",
        include_str!("../data/devices/nest-protect.toml"),
    ),
    (
        "ring-spotlight",
        include_str!("../data/devices/ring-spotlight.toml"),
    ),
    ("tesvor-s6", include_str!("../data/devices/tesvor-s6.toml")),
    (
        "tplink-tapo-c100",
        include_str!("../data/devices/tplink-tapo-c100.toml"),
    ),
];

/// Loads [`BUNDLED_CATALOG`]. Panics only if the shipped data is corrupt.
pub fn bundled_catalog() -> catalog::Catalog {
    catalog::load_catalog(BUNDLED_CATALOG).expect("bundled catalog is valid")
}

/// Loads [`BUNDLED_LEDGER`] against `catalog`.
pub fn bundled_ledger(catalog: &catalog::Catalog) -> findings::Ledger {
    findings::load_ledger(BUNDLED_LEDGER, catalog).expect("bundled ledger is valid")
}
