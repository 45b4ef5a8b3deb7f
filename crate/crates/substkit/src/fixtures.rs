//! Bundled substitution fixtures, byte-stable and shipped with the crate.

use crate::error::{Error, Result};
use crate::subst::Substitution;

/// Names of the seven bundled fixtures, in listing order.
pub const FIXTURE_NAMES: [&str; 7] = [
    "thue_morse",
    "rudin_shapiro",
    "baum_sweet",
    "overlap3",
    "partition4",
    "height2_ternary",
    "bijective3",
];

/// One-line description per fixture, aligned with `FIXTURE_NAMES`.
pub const FIXTURE_BLURBS: [&str; 7] = [
    "classical 2-letter bijective substitution (0->01, 1->10)",
    "4-letter quasi-bijective substitution behind the Rudin-Shapiro sequence",
    "4-letter synchronizing substitution behind the Baum-Sweet sequence (not primitive)",
    "3-letter substitution whose synchronizing sets overlap in one letter",
    "4-letter pure substitution whose synchronizing sets partition the alphabet",
    "ternary substitution with height 2 equal to its column number",
    "3-letter bijective substitution whose column group is the full symmetric group",
];

/// Raw JSON for a fixture, exactly as shipped.
pub fn fixture_json(name: &str) -> Option<&'static str> {
    match name {
        "thue_morse" => Some(include_str!("../fixtures/thue_morse.json")),
        "rudin_shapiro" => Some(include_str!("../fixtures/rudin_shapiro.json")),
        "baum_sweet" => Some(include_str!("../fixtures/baum_sweet.json")),
        "overlap3" => Some(include_str!("../fixtures/overlap3.json")),
        "partition4" => Some(include_str!("../fixtures/partition4.json")),
        "height2_ternary" => Some(include_str!("../fixtures/height2_ternary.json")),
        "bijective3" => Some(include_str!("../fixtures/bijective3.json")),
        _ => None,
    }
}

/// Parses a bundled fixture by name.
pub fn fixture(name: &str) -> Result<Substitution> {
    let json = fixture_json(name).ok_or_else(|| Error::Io(format!("no fixture '{name}'")))?;
    Substitution::from_json_str(json)
}
