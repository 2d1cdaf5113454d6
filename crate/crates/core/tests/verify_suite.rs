use fracreg::verify::{checks_csv, run_suite, VerifyConfig};

#[test]
fn default_suite_passes() {
    let rows = run_suite(&VerifyConfig::default()).unwrap();
    print!("{}", checks_csv(&rows));
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
    assert!(failed.is_empty(), "failed checks: {failed:?}");
}
