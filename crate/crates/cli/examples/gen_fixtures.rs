//! Regenerates the worked-example fixtures shipped with the CLI.

use orthostab::suite::{example_2_7, example_3_3};
use orthostab::TolPolicy;

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir).unwrap();
    let (got, _, exact) = example_2_7().unwrap();
    assert!(exact);
    std::fs::write(
        dir.join("example_2_7.json"),
        serde_json::to_string_pretty(&got).unwrap(),
    )
    .unwrap();
    let (sol, _, ok) = example_3_3(&TolPolicy::default()).unwrap();
    assert!(ok);
    std::fs::write(
        dir.join("example_3_3_ledger.json"),
        serde_json::to_string_pretty(&sol.ledger).unwrap(),
    )
    .unwrap();
    println!("fixtures written to {}", dir.display());
}
