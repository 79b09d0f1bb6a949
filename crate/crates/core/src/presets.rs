//! Named parameter sets.
//!
//! Figure presets live in `data/presets.toml`; every Table-1 cell name
//! (`casc-sb-weak`, `nabla-g-saturated-doppler`, ...) also resolves, to the
//! cell's designated point at `N = 0`.

use std::collections::BTreeMap;

use crate::cooling::Table1Cell;
use crate::params::SystemParams;

const PRESETS: &str = include_str!("../data/presets.toml");

fn figure_presets() -> BTreeMap<String, SystemParams> {
    toml::from_str(PRESETS).expect("bundled presets parse")
}

pub fn preset(name: &str) -> Option<SystemParams> {
    if let Some(cell) = Table1Cell::from_name(name) {
        return Some(cell.designated_point(0.0));
    }
    figure_presets().remove(name)
}

pub fn names() -> Vec<String> {
    let mut v: Vec<String> = figure_presets().into_keys().collect();
    v.extend(Table1Cell::ALL.iter().map(|c| c.name().to_string()));
    v
}
