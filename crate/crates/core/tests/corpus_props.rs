use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use xfer_core::corpus::{
    drop_features, filter_pairs, Coordinates, FeatureDescriptor, FeatureGroup, FeatureMatrix, FeaturePolicy,
    FilterPolicy, LangCode, Language, ScoreTable, Task, TransferRecord,
};
use xfer_core::distance::{central_angle, genetic_distance, great_circle_km, syntactic_distance, EARTH_RADIUS_KM};
use xfer_core::encoding::{decode_profile, encode_onehot, encode_ordinal, ColumnSpec, Side};

const CODES: [&str; 8] = ["de", "en", "fr", "ja", "zh", "nl", "af", "ru"];

fn code(s: &str) -> LangCode {
    LangCode::new(s).unwrap()
}

fn table_strategy() -> impl Strategy<Value = ScoreTable> {
    prop::collection::btree_map((0usize..3, 0usize..8, 0usize..8), 0.0f64..=1.0, 1..60).prop_map(|m| {
        ScoreTable::new(m.into_iter().map(|((t, s, g), a)| {
            TransferRecord::new(Task::ALL[t], code(CODES[s]), code(CODES[g]), a).unwrap()
        }))
        .unwrap()
    })
}

fn matrix_strategy() -> impl Strategy<Value = FeatureMatrix> {
    let cells = prop::collection::vec(prop::option::weighted(0.8, 1u32..5), CODES.len() * 6);
    (cells, prop::collection::vec(0usize..10, 6)).prop_map(|(cells, groups)| {
        let feats: Vec<FeatureDescriptor> = groups
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                FeatureDescriptor::with_count(format!("{}A", i + 1), format!("F{i}"), FeatureGroup::ALL[g], 4, &[])
                    .unwrap()
            })
            .collect();
        let langs: Vec<LangCode> = CODES.iter().map(|c| code(c)).collect();
        let mut m = FeatureMatrix::new(langs.clone(), feats).unwrap();
        for (li, l) in langs.iter().enumerate() {
            for fi in 0..6 {
                if let Some(v) = cells[li * 6 + fi] {
                    m.set(l, &format!("{}A", fi + 1), v).unwrap();
                }
            }
        }
        m
    })
}

fn coords() -> impl Strategy<Value = Coordinates> {
    (-90.0f64..=90.0, -179.999f64..=180.0).prop_map(|(latitude, longitude)| Coordinates { latitude, longitude })
}

/// Straight-line chord through the sphere converted to an arc.
fn chord_angle(p: Coordinates, q: Coordinates) -> f64 {
    let xyz = |c: Coordinates| {
        let (la, lo) = (c.latitude.to_radians(), c.longitude.to_radians());
        [la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()]
    };
    let (a, b) = (xyz(p), xyz(q));
    let chord = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    2.0 * (chord / 2.0).min(1.0).asin()
}

proptest! {
    #[test]
    fn filtering_is_idempotent(table in table_strategy()) {
        let policy = FilterPolicy::standard();
        let once = filter_pairs(&table, &policy);
        prop_assert_eq!(filter_pairs(&once, &policy), once.clone());
        prop_assert!(once.records().iter().all(|r| !r.is_supervised()
            && r.source != "ja" && r.target != "zh" && r.target != "fr"
            && !(r.source == "de" && r.target == "en")));
        prop_assert!(once.len() <= table.len());
    }

    #[test]
    fn dropping_features_is_a_set_difference(m in matrix_strategy()) {
        let policy = FeaturePolicy::standard();
        let kept = drop_features(&m, &policy);
        let expected: BTreeSet<String> = m
            .features()
            .iter()
            .enumerate()
            .filter(|(fi, f)| f.group != FeatureGroup::Phonology && m.known_count(*fi) > 0)
            .map(|(_, f)| f.id.clone())
            .collect();
        let got: BTreeSet<String> = kept.features().iter().map(|f| f.id.clone()).collect();
        prop_assert_eq!(got, expected);
        for f in kept.features() {
            for l in kept.languages() {
                prop_assert_eq!(kept.value(l, &f.id), m.value(l, &f.id));
            }
        }
    }

    #[test]
    fn onehot_blocks_sum_to_one_and_round_trip(m in matrix_strategy(), table in table_strategy()) {
        let d = encode_onehot(&m, &table).unwrap();
        let mut blocks: BTreeMap<(String, Side), Vec<usize>> = BTreeMap::new();
        for (c, spec) in d.columns().iter().enumerate() {
            if let ColumnSpec::Feature { feature_id, side, .. } = spec {
                blocks.entry((feature_id.clone(), *side)).or_default().push(c);
            }
        }
        for r in 0..d.n_rows() {
            for cols in blocks.values() {
                let s: f64 = cols.iter().map(|&c| d.get(r, c)).sum();
                prop_assert_eq!(s, 1.0);
            }
            let pair = &d.pairs()[r];
            for side in Side::BOTH {
                let lang = pair.language(side);
                let profile = decode_profile(&d, r, side);
                for f in m.features() {
                    prop_assert_eq!(profile.get(&f.id).copied().flatten(), m.value(lang, &f.id));
                }
            }
        }
        let o = encode_ordinal(&m, &table).unwrap();
        prop_assert_eq!(o.n_cols(), 2 * m.features().len());
        prop_assert_eq!(o.target(), d.target());
    }

    #[test]
    fn great_circle_triangle_inequality(p in coords(), q in coords(), r in coords()) {
        let d = |a, b| great_circle_km(a, b);
        prop_assert!(d(p, r) <= d(p, q) + d(q, r) + 1e-6);
    }

    #[test]
    fn syntactic_distance_is_cosine_of_onehots(m in matrix_strategy(), a in 0usize..8, b in 0usize..8) {
        let (la, lb) = (code(CODES[a]), code(CODES[b]));
        let groups = FeatureGroup::ALL;
        let got = syntactic_distance(&la, &lb, &m, &groups);
        // explicit one-hot vectors over features known for both languages
        let mut va = Vec::new();
        let mut vb = Vec::new();
        for f in m.features() {
            if let (Some(x), Some(y)) = (m.value(&la, &f.id), m.value(&lb, &f.id)) {
                for cat in 1..=4 {
                    va.push(f64::from(u8::from(x == cat)));
                    vb.push(f64::from(u8::from(y == cat)));
                }
            }
        }
        if va.is_empty() {
            prop_assert!(got.is_err());
        } else {
            let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
            let na = va.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
            let want = 1.0 - dot / (na * nb);
            prop_assert!((got.unwrap() - want).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn haversine_agrees_with_chord(p in coords(), q in coords()) {
        let h = central_angle(p, q);
        let c = chord_angle(p, q);
        prop_assert!((h - c).abs() <= 1e-9 * c.max(1e-6), "{} vs {}", h, c);
        prop_assert_eq!(h, central_angle(q, p));
        prop_assert!((0.0..=std::f64::consts::PI).contains(&h));
    }
}

#[test]
fn antipodes_and_known_distance() {
    let p = Coordinates { latitude: 0.0, longitude: 0.0 };
    let q = Coordinates { latitude: 0.0, longitude: 180.0 };
    assert_eq!(central_angle(p, q), std::f64::consts::PI);
    // one degree of arc on the mean-radius sphere
    let r = Coordinates { latitude: 1.0, longitude: 0.0 };
    assert!((great_circle_km(p, r) - EARTH_RADIUS_KM * 1f64.to_radians()).abs() < 1e-9);
}

#[test]
fn genetic_distance_examples() {
    let lang = |c: &str, chain: &[&str]| {
        Language::new(code(c), c, None, chain.iter().map(|s| s.to_string()).collect()).unwrap()
    };
    let de = lang("de", &["Indo-European", "Germanic", "West"]);
    let nl = lang("nl", &["Indo-European", "Germanic", "West"]);
    let ru = lang("ru", &["Indo-European", "Slavic", "East"]);
    let ja = lang("ja", &["Japonic"]);
    assert_eq!(genetic_distance(&de, &nl), 0.0);
    assert!((genetic_distance(&de, &ru) - (1.0 - 2.0 / 6.0)).abs() < 1e-15);
    assert_eq!(genetic_distance(&de, &ja), 1.0);
}
