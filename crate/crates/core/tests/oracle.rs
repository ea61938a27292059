use ecsim_core::optics::BeamSplitterConvention;
use ecsim_core::verify::{run_all, VerifyOptions};

#[test]
fn default_suite_passes() {
    let checks = run_all(&VerifyOptions::default()).unwrap();
    for c in &checks {
        println!("{:<28} cases {:>5}  max dev {:.3e}  tol {:.0e}", c.name, c.cases, c.max_deviation, c.tolerance);
    }
    assert!(checks.iter().all(|c| c.passed()));
    assert_eq!(checks[0].cases, 200);
}

#[test]
fn wrong_convention_fails_only_the_beam_splitter_check() {
    let opts =
        VerifyOptions { convention: BeamSplitterConvention::Swapped, random_states: 40, ..VerifyOptions::default() };
    let checks = run_all(&opts).unwrap();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    assert_eq!(failed, ["beam splitters"]);
}
