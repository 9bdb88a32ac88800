use proptest::prelude::*;
use xfer_core::stats::{chi_squared_sf, kruskal_wallis, kruskal_wallis_permutation, pearson, rank_with_ties};

fn groups_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec((0u8..12).prop_map(f64::from), 1..9), 2..5)
        .prop_filter("need three observations", |g| g.iter().map(Vec::len).sum::<usize>() >= 3)
        .prop_filter("not all tied", |g| {
            let first = g[0][0];
            g.iter().flatten().any(|&v| v != first)
        })
}

/// Mann-Whitney U by direct pair counting, ties counted as one half.
fn u_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

fn tie_correction(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        sum += t * t * t - t;
        i = j;
    }
    1.0 - sum / (n * n * n - n)
}

proptest! {
    #[test]
    fn kw_invariant_under_monotone_transform(groups in groups_strategy()) {
        let h = kruskal_wallis(&groups).unwrap();
        let moved: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| g.iter().map(|&x| (x / 3.0).exp() + x * x * x - 7.0).collect())
            .collect();
        let h2 = kruskal_wallis(&moved).unwrap();
        prop_assert_eq!(h.h, h2.h);
        prop_assert_eq!(h.p, h2.p);
    }

    #[test]
    fn kw_invariant_under_within_group_shuffle(groups in groups_strategy()) {
        let h = kruskal_wallis(&groups).unwrap();
        let reversed: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().rev().copied().collect()).collect();
        prop_assert_eq!(h.h, kruskal_wallis(&reversed).unwrap().h);
    }

    #[test]
    fn two_group_kw_matches_mann_whitney(
        a in prop::collection::vec((0u8..15).prop_map(f64::from), 1..12),
        b in prop::collection::vec((0u8..15).prop_map(f64::from), 1..12),
    ) {
        let pooled: Vec<f64> = a.iter().chain(&b).copied().collect();
        prop_assume!(pooled.len() >= 3 && pooled.iter().any(|&v| v != pooled[0]));
        let (n1, n2) = (a.len() as f64, b.len() as f64);
        let u = u_statistic(&a, &b);
        let oracle = 12.0 * (u - n1 * n2 / 2.0).powi(2) / (n1 * n2 * (n1 + n2 + 1.0)) / tie_correction(&pooled);
        let h = kruskal_wallis(&[a, b]).unwrap().h;
        prop_assert!((h - oracle).abs() <= 1e-9 * oracle.max(1.0), "{} vs {}", h, oracle);
    }

    #[test]
    fn ranks_sum_to_triangular_number(values in prop::collection::vec(-5i32..5, 1..40)) {
        let v: Vec<f64> = values.iter().map(|&x| f64::from(x)).collect();
        let r = rank_with_ties(&v).unwrap();
        let n = v.len() as f64;
        prop_assert!((r.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn pearson_is_bounded_and_symmetric(
        pairs in prop::collection::vec((-100i32..100, -100i32..100), 3..30),
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
        let y: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
        if let (Ok(r1), Ok(r2)) = (pearson(&x, &y), pearson(&y, &x)) {
            prop_assert!((-1.0..=1.0).contains(&r1));
            prop_assert_eq!(r1, r2);
        }
    }
}

#[test]
fn hand_computed_kw_values() {
    let h = kruskal_wallis(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    assert!((h.h - 2.4).abs() < 1e-12);
    let tied = kruskal_wallis(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
    assert!((tied.h - 3.0).abs() < 1e-12);
    assert_eq!(tied.df, 1);
}

#[test]
fn permutation_p_orders_with_separation() {
    let separated = [vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![11.0, 12.0, 13.0, 14.0, 15.0]];
    let mixed = [vec![1.0, 12.0, 3.0, 14.0, 5.0], vec![11.0, 2.0, 13.0, 4.0, 15.0]];
    let p_sep = kruskal_wallis_permutation(&separated, 999, 4).unwrap();
    let p_mix = kruskal_wallis_permutation(&mixed, 999, 4).unwrap();
    assert!(p_sep < p_mix);
    assert!(p_sep >= 1.0 / 1000.0);
    assert!(p_mix <= 1.0);
    // exact two-sided p for the separated case is 2 / C(10, 5) = 0.0079
    assert!(p_sep < 0.03);
    assert_eq!(p_sep, kruskal_wallis_permutation(&separated, 999, 4).unwrap());
}

#[test]
fn chi_squared_two_df_is_exponential() {
    for i in 0..=2000 {
        let x = i as f64 * 0.1;
        let want = (-x / 2.0).exp();
        let got = chi_squared_sf(x, 2);
        assert!((got - want).abs() <= 1e-12 * want, "x={x}: {got} vs {want}");
    }
}

#[test]
fn chi_squared_tail_is_monotone_and_finite_deep_in_the_tail() {
    for df in 1..=10 {
        let mut prev = 1.0;
        let mut x = 0.0;
        while x < 1300.0 {
            let q = chi_squared_sf(x, df);
            assert!(q.is_finite() && q <= prev, "df={df} x={x}");
            if x < 1200.0 {
                assert!(q > 1e-300, "df={df} x={x}: {q}");
            }
            prev = q;
            x += 0.5;
        }
    }
    let q = chi_squared_sf(1280.0, 1);
    assert!(q > 1e-281 && q < 1e-279);
}
