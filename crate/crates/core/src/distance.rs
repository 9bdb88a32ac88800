//! Aggregated distances between languages: syntactic (one-hot typology
//! vectors), geographic (great circle) and genetic (shared genealogy).
//!
//! All three are normalized to [0, 1], symmetric, and zero on the diagonal.
//! Precomputed values (e.g. exported from URIEL) can be loaded and take
//! precedence over the built-in computations.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Coordinates, FeatureGroup, FeatureMatrix, LangCode, Language, LanguageRegistry};

/// Mean Earth radius in km. Only used for unnormalized output.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistanceError {
    #[error("{a} and {b} share no known syntactic feature")]
    NoSharedFeatures { a: LangCode, b: LangCode },
    #[error("language {0} has no coordinates")]
    MissingCoordinates(LangCode),
    #[error("unknown language {0}")]
    UnknownLanguage(LangCode),
    #[error("{component} distance {value} for ({a}, {b}) is outside [0, 1]")]
    ValueOutOfRange {
        a: LangCode,
        b: LangCode,
        component: Component,
        value: f64,
    },
    #[error("no {component} distance for ({a}, {b})")]
    MissingPair {
        a: LangCode,
        b: LangCode,
        component: Component,
    },
    #[error("unknown distance component {0:?}")]
    UnknownComponent(String),
    #[error("pair ({a}, {b}): {inner}")]
    AtPair {
        a: LangCode,
        b: LangCode,
        inner: alloc::boxed::Box<DistanceError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Component {
    Syntactic,
    Geographic,
    Genetic,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Syntactic, Component::Geographic, Component::Genetic];

    pub fn as_str(self) -> &'static str {
        match self {
            Component::Syntactic => "syntactic",
            Component::Geographic => "geographic",
            Component::Genetic => "genetic",
        }
    }

    /// Abbreviation used in report headers.
    pub fn short(self) -> &'static str {
        match self {
            Component::Syntactic => "syn",
            Component::Geographic => "geo",
            Component::Genetic => "gen",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Component {
    type Err = DistanceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "syntactic" | "syn" => Ok(Component::Syntactic),
            "geographic" | "geo" => Ok(Component::Geographic),
            "genetic" | "gen" => Ok(Component::Genetic),
            _ => Err(DistanceError::UnknownComponent(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Computed,
    Loaded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub provenance: Provenance,
}

/// The components known for one unordered pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairDistance {
    components: [Option<Measured>; 3],
}

impl PairDistance {
    pub fn get(&self, component: Component) -> Option<Measured> {
        self.components[component.slot()]
    }
}

/// Distances keyed by unordered language pair; lookups in either direction
/// hit the same entry, so symmetry is exact.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairDistances {
    map: BTreeMap<(LangCode, LangCode), PairDistance>,
}

fn canonical(a: &LangCode, b: &LangCode) -> (LangCode, LangCode) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

impl PairDistances {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores one component. Values must lie in [0, 1]; a language paired
    /// with itself must be at distance 0.
    pub fn insert(
        &mut self,
        a: &LangCode,
        b: &LangCode,
        component: Component,
        value: f64,
        provenance: Provenance,
    ) -> Result<(), DistanceError> {
        let out_of_range = !(0.0..=1.0).contains(&value) || (a == b && value != 0.0);
        if out_of_range {
            return Err(DistanceError::ValueOutOfRange {
                a: a.clone(),
                b: b.clone(),
                component,
                value,
            });
        }
        let entry = self.map.entry(canonical(a, b)).or_default();
        entry.components[component.slot()] = Some(Measured { value, provenance });
        Ok(())
    }

    pub fn measured(&self, a: &LangCode, b: &LangCode, component: Component) -> Option<Measured> {
        if a == b {
            return Some(Measured {
                value: 0.0,
                provenance: Provenance::Computed,
            });
        }
        self.map.get(&canonical(a, b)).and_then(|p| p.get(component))
    }

    pub fn get(&self, a: &LangCode, b: &LangCode, component: Component) -> Result<f64, DistanceError> {
        self.measured(a, b, component)
            .map(|m| m.value)
            .ok_or_else(|| DistanceError::MissingPair {
                a: a.clone(),
                b: b.clone(),
                component,
            })
    }

    /// Unordered pairs in canonical (a <= b) order.
    pub fn pairs(&self) -> impl Iterator<Item = (&LangCode, &LangCode, &PairDistance)> {
        self.map.iter().map(|((a, b), d)| (a, b, d))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Which groups count as syntax for [`syntactic_distance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceConfig {
    pub syntactic_groups: Vec<FeatureGroup>,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig {
            syntactic_groups: FeatureGroup::SYNTACTIC.to_vec(),
        }
    }
}

/// Cosine distance between the one-hot vectors of two languages over the
/// syntax features known for both.
///
/// Each shared feature contributes exactly one 1 to each vector, so both norms
/// equal `sqrt(m)` for `m` shared features and the dot product counts the
/// features on which the languages agree: the distance is `1 - agree / m`.
pub fn syntactic_distance(
    a: &LangCode,
    b: &LangCode,
    matrix: &FeatureMatrix,
    groups: &[FeatureGroup],
) -> Result<f64, DistanceError> {
    let ai = matrix
        .language_index(a)
        .ok_or_else(|| DistanceError::UnknownLanguage(a.clone()))?;
    let bi = matrix
        .language_index(b)
        .ok_or_else(|| DistanceError::UnknownLanguage(b.clone()))?;
    let mut shared = 0u32;
    let mut agree = 0u32;
    for (fi, f) in matrix.features().iter().enumerate() {
        if !groups.contains(&f.group) {
            continue;
        }
        if let (Some(x), Some(y)) = (matrix.get(ai, fi), matrix.get(bi, fi)) {
            shared += 1;
            agree += u32::from(x == y);
        }
    }
    if shared == 0 {
        return Err(DistanceError::NoSharedFeatures {
            a: a.clone(),
            b: b.clone(),
        });
    }
    Ok(1.0 - f64::from(agree) / f64::from(shared))
}

/// Central angle between two points, in radians.
///
/// Haversine form evaluated as `2 atan2(sqrt(h), sqrt(1 - h))` with `1 - h`
/// expanded symbolically, so antipodal points come out at exactly pi.
pub fn central_angle(p: Coordinates, q: Coordinates) -> f64 {
    let (phi1, phi2) = (p.latitude.to_radians(), q.latitude.to_radians());
    let half_dphi = (phi2 - phi1) / 2.0;
    let half_dlambda = (q.longitude - p.longitude).to_radians() / 2.0;
    let cos_prod = libm::cos(phi1) * libm::cos(phi2);
    let s_lambda = libm::sin(half_dlambda);
    let s_phi = libm::sin(half_dphi);
    let c_phi = libm::cos(half_dphi);
    let h = (s_phi * s_phi + cos_prod * s_lambda * s_lambda).max(0.0);
    let one_minus_h = (c_phi * c_phi - cos_prod * s_lambda * s_lambda).max(0.0);
    2.0 * libm::atan2(libm::sqrt(h), libm::sqrt(one_minus_h))
}

/// Great-circle distance divided by half the circumference.
pub fn great_circle_fraction(p: Coordinates, q: Coordinates) -> f64 {
    (central_angle(p, q) / PI).clamp(0.0, 1.0)
}

pub fn great_circle_km(p: Coordinates, q: Coordinates) -> f64 {
    central_angle(p, q) * EARTH_RADIUS_KM
}

pub fn geographic_distance(a: &Language, b: &Language) -> Result<f64, DistanceError> {
    let p = a
        .coordinates
        .ok_or_else(|| DistanceError::MissingCoordinates(a.code.clone()))?;
    let q = b
        .coordinates
        .ok_or_else(|| DistanceError::MissingCoordinates(b.code.clone()))?;
    if a.code == b.code {
        return Ok(0.0);
    }
    Ok(great_circle_fraction(p, q))
}

/// `1 - 2s / (|A| + |B|)` where `s` is the shared prefix length of the two
/// root-first genealogy chains.
pub fn genetic_distance(a: &Language, b: &Language) -> f64 {
    let shared = a
        .genealogy
        .iter()
        .zip(&b.genealogy)
        .take_while(|(x, y)| x == y)
        .count();
    let total = a.genealogy.len() + b.genealogy.len();
    if total == 0 {
        return 0.0;
    }
    1.0 - (2 * shared) as f64 / total as f64
}

fn compute(
    component: Component,
    a: &Language,
    b: &Language,
    matrix: &FeatureMatrix,
    config: &DistanceConfig,
) -> Result<f64, DistanceError> {
    match component {
        Component::Syntactic => syntactic_distance(&a.code, &b.code, matrix, &config.syntactic_groups),
        Component::Geographic => geographic_distance(a, b),
        Component::Genetic => Ok(genetic_distance(a, b)),
    }
}

/// All components for every unordered pair of `codes`, taking loaded
/// overrides where present and computing the rest.
pub fn distance_table_for(
    codes: &[LangCode],
    registry: &LanguageRegistry,
    matrix: &FeatureMatrix,
    overrides: Option<&PairDistances>,
    config: &DistanceConfig,
) -> Result<PairDistances, DistanceError> {
    let langs: Vec<&Language> = codes
        .iter()
        .map(|c| registry.get(c).ok_or_else(|| DistanceError::UnknownLanguage(c.clone())))
        .collect::<Result<_, _>>()?;
    let mut out = PairDistances::new();
    for (i, a) in langs.iter().enumerate() {
        for b in &langs[i + 1..] {
            for component in Component::ALL {
                let loaded = overrides.and_then(|o| o.measured(&a.code, &b.code, component));
                let measured = match loaded {
                    Some(m) => m,
                    None => Measured {
                        value: compute(component, a, b, matrix, config).map_err(|e| DistanceError::AtPair {
                            a: a.code.clone(),
                            b: b.code.clone(),
                            inner: alloc::boxed::Box::new(e),
                        })?,
                        provenance: Provenance::Computed,
                    },
                };
                out.insert(&a.code, &b.code, component, measured.value, measured.provenance)?;
            }
        }
    }
    Ok(out)
}

/// [`distance_table_for`] over every language in the registry.
pub fn distance_table(
    registry: &LanguageRegistry,
    matrix: &FeatureMatrix,
    overrides: Option<&PairDistances>,
    config: &DistanceConfig,
) -> Result<PairDistances, DistanceError> {
    let codes: Vec<LangCode> = registry.codes().cloned().collect();
    distance_table_for(&codes, registry, matrix, overrides, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::FeatureDescriptor;
    use alloc::vec;

    fn code(s: &str) -> LangCode {
        LangCode::new(s).unwrap()
    }

    fn lang(c: &str, lat: f64, lon: f64, gen: &[&str]) -> Language {
        Language::new(
            code(c),
            c,
            Some(Coordinates { latitude: lat, longitude: lon }),
            gen.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    fn two_feature_matrix(a: [u32; 2], b: [u32; 2]) -> FeatureMatrix {
        let feats = vec![
            FeatureDescriptor::with_count("81A", "", FeatureGroup::WordOrder, 2, &[]).unwrap(),
            FeatureDescriptor::with_count("90A", "", FeatureGroup::WordOrder, 2, &[]).unwrap(),
            FeatureDescriptor::with_count("13A", "", FeatureGroup::Phonology, 2, &[]).unwrap(),
        ];
        let mut m = FeatureMatrix::new(vec![code("aa"), code("bb")], feats).unwrap();
        for (i, id) in ["81A", "90A"].iter().enumerate() {
            m.set(&code("aa"), id, a[i]).unwrap();
            m.set(&code("bb"), id, b[i]).unwrap();
        }
        m.set(&code("aa"), "13A", 1).unwrap();
        m.set(&code("bb"), "13A", 2).unwrap();
        m
    }

    /// Explicit one-hot vectors and cosine, as an independent route.
    fn cosine_distance_oracle(m: &FeatureMatrix, a: &LangCode, b: &LangCode) -> f64 {
        let mut va = Vec::new();
        let mut vb = Vec::new();
        for f in m.features() {
            if !FeatureGroup::SYNTACTIC.contains(&f.group) {
                continue;
            }
            if let (Some(x), Some(y)) = (m.value(a, &f.id), m.value(b, &f.id)) {
                for &c in f.categories.keys() {
                    va.push(f64::from(u8::from(c == x)));
                    vb.push(f64::from(u8::from(c == y)));
                }
            }
        }
        let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
        let na: f64 = va.iter().map(|x| x * x).sum::<f64>();
        let nb: f64 = vb.iter().map(|x| x * x).sum::<f64>();
        1.0 - dot / libm::sqrt(na * nb)
    }

    #[test]
    fn syntactic_examples() {
        let same = two_feature_matrix([1, 2], [1, 2]);
        assert_eq!(syntactic_distance(&code("aa"), &code("bb"), &same, &FeatureGroup::SYNTACTIC).unwrap(), 0.0);
        // [1,0,1,0] vs [1,0,0,1]
        let half = two_feature_matrix([1, 1], [1, 2]);
        let d = syntactic_distance(&code("aa"), &code("bb"), &half, &FeatureGroup::SYNTACTIC).unwrap();
        assert_eq!(d, 0.5);
        assert!((d - cosine_distance_oracle(&half, &code("aa"), &code("bb"))).abs() < 1e-15);
        let none = two_feature_matrix([1, 1], [2, 2]);
        assert_eq!(syntactic_distance(&code("aa"), &code("bb"), &none, &FeatureGroup::SYNTACTIC).unwrap(), 1.0);
    }

    #[test]
    fn syntactic_requires_shared_features() {
        let feats = vec![FeatureDescriptor::with_count("81A", "", FeatureGroup::WordOrder, 2, &[]).unwrap()];
        let mut m = FeatureMatrix::new(vec![code("aa"), code("bb")], feats).unwrap();
        m.set(&code("aa"), "81A", 1).unwrap();
        assert!(matches!(
            syntactic_distance(&code("aa"), &code("bb"), &m, &FeatureGroup::SYNTACTIC),
            Err(DistanceError::NoSharedFeatures { .. })
        ));
    }

    #[test]
    fn geographic_examples() {
        let a = lang("aa", 0.0, 0.0, &["X"]);
        let b = lang("bb", 0.0, 90.0, &["X"]);
        assert!((geographic_distance(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(geographic_distance(&a, &a).unwrap(), 0.0);
        for (phi, lambda) in [(0.0, 0.0), (37.5, 10.0), (-60.0, -120.0), (89.0, 45.0)] {
            let p = Coordinates { latitude: phi, longitude: lambda };
            let q = Coordinates { latitude: -phi, longitude: lambda + 180.0 };
            assert!((great_circle_fraction(p, q) - 1.0).abs() < 1e-15, "{phi} {lambda}");
        }
        let noloc = Language::new(code("cc"), "C", None, vec!["X".into()]).unwrap();
        assert!(matches!(geographic_distance(&a, &noloc), Err(DistanceError::MissingCoordinates(_))));
    }

    #[test]
    fn genetic_examples() {
        let fr = lang("fr", 0.0, 0.0, &["IE", "Italic", "Romance"]);
        let de = lang("de", 0.0, 0.0, &["IE", "Germanic", "West Germanic"]);
        let ja = lang("ja", 0.0, 0.0, &["Japonic"]);
        assert_eq!(genetic_distance(&fr, &fr), 0.0);
        assert_eq!(genetic_distance(&fr, &ja), 1.0);
        assert!((genetic_distance(&fr, &de) - (1.0 - 2.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn pair_distances_symmetry_and_ranges() {
        let mut d = PairDistances::new();
        d.insert(&code("fr"), &code("es"), Component::Syntactic, 0.12, Provenance::Loaded).unwrap();
        assert_eq!(d.get(&code("es"), &code("fr"), Component::Syntactic).unwrap(), 0.12);
        assert_eq!(d.get(&code("es"), &code("es"), Component::Genetic).unwrap(), 0.0);
        assert!(matches!(
            d.get(&code("es"), &code("fr"), Component::Genetic),
            Err(DistanceError::MissingPair { .. })
        ));
        assert!(d.insert(&code("fr"), &code("es"), Component::Genetic, 1.3, Provenance::Loaded).is_err());
    }

    #[test]
    fn table_prefers_overrides() {
        let reg = LanguageRegistry::from_languages([
            lang("aa", 0.0, 0.0, &["X", "Y"]),
            lang("bb", 10.0, 10.0, &["X", "Z"]),
            lang("cc", 20.0, 40.0, &["W"]),
        ])
        .unwrap();
        let feats = vec![FeatureDescriptor::with_count("81A", "", FeatureGroup::WordOrder, 2, &[]).unwrap()];
        let mut m = FeatureMatrix::new(vec![code("aa"), code("bb"), code("cc")], feats).unwrap();
        for c in ["aa", "bb", "cc"] {
            m.set(&code(c), "81A", 1).unwrap();
        }
        let mut ov = PairDistances::new();
        ov.insert(&code("bb"), &code("aa"), Component::Syntactic, 0.7, Provenance::Loaded).unwrap();
        let t = distance_table(&reg, &m, Some(&ov), &DistanceConfig::default()).unwrap();
        assert_eq!(t.len(), 3);
        let m_ab = t.measured(&code("aa"), &code("bb"), Component::Syntactic).unwrap();
        assert_eq!(m_ab, Measured { value: 0.7, provenance: Provenance::Loaded });
        let m_ac = t.measured(&code("aa"), &code("cc"), Component::Syntactic).unwrap();
        assert_eq!(m_ac, Measured { value: 0.0, provenance: Provenance::Computed });
        for c in Component::ALL {
            assert_eq!(t.get(&code("cc"), &code("cc"), c).unwrap(), 0.0);
        }
    }
}
