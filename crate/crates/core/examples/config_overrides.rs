//! Flat `key = value` configuration: parse a file, apply overrides and
//! print the resolved settings.

use astrocyte_cpg::config::RunConfig;

const TEXT: &str = "\
# reward-only ablation on the scripted backend
run.backend = stub
run.sessions = 20
plasticity.eta_ado = 0
stub.topple_after = none
";

fn main() {
    let mut cfg = RunConfig::from_text(TEXT).expect("valid config");
    cfg.apply_override("run.seed=42").unwrap();
    cfg.apply_override("session.max_length=5").unwrap();
    match cfg.apply_override("plasticity.etaa=1") {
        Err(e) => println!("rejected: {e}"),
        Ok(()) => unreachable!(),
    }
    cfg.validate().unwrap();
    print!("{}", cfg.to_text());
    println!("{} keys", cfg.keys().len());
}
