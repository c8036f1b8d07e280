use std::path::Path;
use std::process::{Command, Output};

fn sfpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfpp")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("girg.toml");
    std::fs::write(
        &path,
        "seed = 3\npairs = 20\nn_grid = [1000, 2000]\nlength_law = \"exp:1\"\n[model]\nkind = \"girg\"\nd = 2\ntau = 2.5\nalpha = 1.95\n",
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn criterion_reports_verdicts_and_rejects_bad_laws() {
    let out = sfpp(&["criterion", "--law", "unif:0:1"]);
    assert!(out.status.success());
    assert!(json(&out)["verdict"].is_string());
    assert_eq!(sfpp(&["criterion", "--law", "exp:-2"]).status.code(), Some(2));
    assert_eq!(sfpp(&["criterion", "--law", "bogus"]).status.code(), Some(2));
}

#[test]
fn generate_percolate_and_box() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let graph = dir.path().join("g.sgx");
    let graph = graph.to_str().unwrap();
    let out = sfpp(&["generate", "--config", &cfg, "--n", "3000", "--lengths", "--out", graph]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let perc = dir.path().join("p.sgx");
    let out = sfpp(&["percolate", "--input", graph, "--c", "0.5", "--out", perc.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("kept "));

    let out = sfpp(&["boxing", "--input", graph, "--mu", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["annuli"].as_array().is_some_and(|a| !a.is_empty()));

    let out = sfpp(&["brw", "--input", graph, "--coupled", "--generations", "2"]);
    assert!(json(&out)["domination"]["holds"].as_bool().unwrap());
}

#[test]
fn distances_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let csv = dir.path().join("d.csv");
    let out = sfpp(&["distances", "--config", &cfg, "--workers", "2", "--csv", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = sfpp(&["report", "--csv", csv.to_str().unwrap()]);
    let sizes = json(&out)["sizes"].as_array().unwrap().clone();
    assert_eq!(sizes.len(), 2);
    assert_eq!(sizes[0]["pairs"], 20);
    assert!(sizes[1]["ks_to_previous"].is_number());
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "seed = 1\npairs = 0\nn_grid = [10]\nlength_law = \"exp:1\"\n[model]\nkind = \"hrg\"\nalpha_h = 0.75\nt_h = 0.5\n").unwrap();
    let out = sfpp(&["distances", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(sfpp(&["distances", "--config", "/nonexistent.toml"]).status.code(), Some(2));
}
