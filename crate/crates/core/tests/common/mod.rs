//! Shared helpers for the integration and acceptance suites.

#![allow(dead_code)]

use std::path::PathBuf;

use surplex::io;
use surplex::{Environment, Rational};

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn qv(parts: &[&str]) -> Vec<Rational> {
    parts.iter().map(|s| q(s)).collect()
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn load_fixture_env(name: &str) -> Environment {
    let json = std::fs::read_to_string(fixture_path(name)).unwrap();
    io::environment_from_json(&json).unwrap()
}

/// Deterministic test RNG (splitmix64), independent of the library's
/// generator internals.
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    /// Random rational with numerator in `-span..=span` and denominator in
    /// `1..=max_denom`.
    pub fn rational(&mut self, span: i64, max_denom: i64) -> Rational {
        let numer = (self.below((2 * span + 1) as u64) as i64) - span;
        let denom = 1 + (self.below(max_denom as u64) as i64);
        Rational::new(numer, denom)
    }
}
