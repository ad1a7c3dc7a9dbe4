//! Spectral data: bundled defaults compiled into the binary, with
//! per-file overrides from disk.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use puree_core::optics::{ConeCurves, Spectrum};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, PureeError, Result};

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../../data/flavors/", $name, ".csv")))),*]
    };
}

const WATER: &str = include_str!("../../../data/water.csv");
const CONES: [&str; 3] = [
    include_str!("../../../data/cones_r.csv"),
    include_str!("../../../data/cones_g.csv"),
    include_str!("../../../data/cones_b.csv"),
];
const FLAVORS: &[(&str, &str)] = bundled!(
    "apple",
    "apricot",
    "banana",
    "beef",
    "blueberry",
    "carrot",
    "chicken",
    "mango",
    "parsnip",
    "pea",
    "squash",
    "strawberry",
    "sweet_potato",
);

/// Names of the bundled flavor spectra, alphabetical.
pub fn bundled_flavor_names() -> Vec<&'static str> {
    FLAVORS.iter().map(|(n, _)| *n).collect()
}

fn parse_bundled(name: &str, text: &str) -> Spectrum {
    Spectrum::from_csv_str(text)
        .unwrap_or_else(|e| panic!("bundled spectrum {name} is invalid: {e}"))
}

/// Loads a `wavelength_nm,value` CSV file.
pub fn load_spectrum(path: &Path) -> Result<Spectrum> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Spectrum::from_csv_str(&text).map_err(|source| PureeError::Spectrum {
        path: path.to_path_buf(),
        source,
    })
}

/// Optional replacements for bundled spectra. Unset entries use the
/// bundled data.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectraPaths {
    pub water: Option<PathBuf>,
    /// Red, green and blue responsivity files.
    pub cones: Option<[PathBuf; 3]>,
    /// Directory searched for `<flavor>.csv` before the bundled set.
    pub flavor_dir: Option<PathBuf>,
    /// Explicit per-flavor files, taking precedence over `flavor_dir`.
    pub flavors: BTreeMap<String, PathBuf>,
}

/// Everything the renderer needs for a list of flavors.
#[derive(Clone, Debug)]
pub struct SpectraSet {
    pub water: Spectrum,
    pub cones: ConeCurves,
    pub flavors: BTreeMap<String, Spectrum>,
}

impl SpectraSet {
    /// Resolves `flavors` against the overrides, then the bundled data.
    pub fn load(paths: &SpectraPaths, flavors: &[String]) -> Result<Self> {
        let water = match &paths.water {
            Some(p) => load_spectrum(p)?,
            None => parse_bundled("water", WATER),
        };
        let cone = |i: usize| match &paths.cones {
            Some(ps) => load_spectrum(&ps[i]),
            None => Ok(parse_bundled("cones", CONES[i])),
        };
        let cones = ConeCurves::new(cone(0)?, cone(1)?, cone(2)?)?;
        let mut map = BTreeMap::new();
        for name in flavors {
            let from_dir = paths
                .flavor_dir
                .as_ref()
                .map(|d| d.join(format!("{name}.csv")))
                .filter(|p| p.exists());
            let spectrum = match paths.flavors.get(name).cloned().or(from_dir) {
                Some(p) => load_spectrum(&p)?,
                None => match FLAVORS.iter().find(|(n, _)| n == name) {
                    Some((n, text)) => parse_bundled(n, text),
                    None => {
                        return Err(PureeError::Config(format!(
                            "no spectrum for flavor `{name}`"
                        )))
                    }
                },
            };
            map.insert(name.clone(), spectrum);
        }
        Ok(SpectraSet {
            water,
            cones,
            flavors: map,
        })
    }
}
