// Declarative scenario in, checksummed artifacts out.

use dyadic_field::runner::{inspect_manifest, parse_scenario_str, run, RunOptions};

const SCENARIO: &str = r#"
name = "example_lp"
command = "lp"
seed = 3
[model.marginal]
distribution = { kind = "rademacher" }
[params]
p = 1.5
grid_exps = [4, 6, 8]
reps = 300
"#;

pub fn run_example() -> dyadic_field::Result<()> {
    let sc = parse_scenario_str(SCENARIO, false, None)?;
    let out = std::env::temp_dir().join(format!("dyadic-field-example-{}", std::process::id()));
    let manifest = run(&sc, &RunOptions { out: Some(out.clone()), ..Default::default() })?;
    for f in &manifest.files {
        println!("{} {} ({} bytes)", f.sha256, f.path, f.bytes);
    }
    println!("{}", std::fs::read_to_string(out.join("lp_trace.csv"))?);
    assert!(inspect_manifest(&out)?.verified);
    std::fs::remove_dir_all(&out)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> dyadic_field::Result<()> {
    run_example()
}
