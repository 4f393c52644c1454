//! Train, checkpoint, resume and compare against an uninterrupted run.

use astrocyte_cpg::commands::cmd_train;
use astrocyte_cpg::config::RunConfig;
use astrocyte_cpg::io::{Checkpoint, RunDir};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = std::env::temp_dir().join(format!("astrocyte-cpg-resume-{}", std::process::id()));
    let mut cfg = RunConfig::default();
    cfg.apply_override("run.backend=stub")?;
    cfg.apply_override("stub.topple_after=1.5")?;
    cfg.run.sessions = 6;

    cfg.run.out = tmp.join("straight").to_string_lossy().into_owned();
    cmd_train(&cfg, None, false)?;

    cfg.run.out = tmp.join("resumed").to_string_lossy().into_owned();
    cfg.run.sessions = 3;
    cmd_train(&cfg, None, false)?;
    let ck_path = RunDir::new(&cfg.run.out).checkpoint(3);
    let ck = Checkpoint::load(&ck_path)?;
    println!("checkpoint v{} after session {}", ck.version, ck.session_index);
    cfg.run.sessions = 6;
    cmd_train(&cfg, Some(&ck_path), false)?;

    let a = std::fs::read_to_string(tmp.join("straight/sessions.csv"))?;
    let b = std::fs::read_to_string(tmp.join("resumed/sessions.csv"))?;
    print!("{b}");
    println!("identical to uninterrupted run: {}", a == b);
    std::fs::remove_dir_all(&tmp)?;
    Ok(())
}
