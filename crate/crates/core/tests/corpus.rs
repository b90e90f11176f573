use std::path::PathBuf;

use weakmem::cli::run_corpus;
use weakmem::enumerate::EnumConfig;

#[test]
fn bundled_corpus_matches_every_expectation() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let rows = run_corpus(&dir, &EnumConfig::default()).unwrap();
    assert!(rows.len() >= 40, "{}", rows.len());
    let bad: Vec<String> = rows.iter().filter(|r| !r.ok()).map(|r| format!("{} {} {:?}", r.file, r.model, r.got)).collect();
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn every_corpus_file_round_trips_through_the_printer() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    for e in std::fs::read_dir(dir).unwrap() {
        let path = e.unwrap().path();
        let p = weakmem::litmus::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let q = weakmem::litmus::parse(&weakmem::litmus::emit(&p)).unwrap();
        assert_eq!(p, q, "{}", path.display());
    }
}
