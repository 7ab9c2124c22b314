use qfrac::verify::{check_names, run};

#[test]
fn every_check_passes() {
    for seed in [0, 7] {
        let r = run(seed, None);
        assert_eq!(r.outcomes.len(), check_names().len());
        assert!(r.passed(), "{}", r.render());
    }
}

#[test]
fn filter_selects_by_substring() {
    let r = run(3, Some("mittag-leffler"));
    let names: Vec<_> = r.outcomes.iter().map(|o| o.name).collect();
    assert_eq!(names, ["mittag-leffler-series", "mittag-leffler-divergence"]);
    assert!(run(3, Some("no-such-check")).outcomes.is_empty());
}

#[test]
fn filtering_does_not_change_a_check() {
    let full = run(11, Some("semigroup"));
    let wide = run(11, Some("e"));
    let same = wide.outcomes.iter().find(|o| o.name == "semigroup").unwrap();
    assert_eq!(&full.outcomes[0], same);
}

#[test]
fn report_is_reproducible() {
    let a = run(42, Some("hilfer")).render();
    let b = run(42, Some("hilfer")).render();
    assert_eq!(a, b);
    assert!(a.starts_with("seed = 42\n"));
    assert!(a.ends_with("4 checks, 0 failed\n"), "{a}");
}
