//! Score every strategy against what players actually did.

use std::path::PathBuf;

use clmm_game::pipeline::{build_all_days, GameOptions, PoolData};
use clmm_game::strategies::{run_strategy_suite, summarize, SuiteConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pool = PoolData::load(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/pool"))?;
    let (days, _) = build_all_days(&pool, &GameOptions::default())?;
    let config = SuiteConfig { jobs: 2, ..SuiteConfig::default() };
    let report = run_strategy_suite(&pool, &days, &config)?;
    println!("{} rows, {} absent cells", report.rows.len(), report.absent.len());

    println!("{:>6} {:>8} {:>10} {:>10}", "", "overlap", "roi", "nog");
    for (name, s) in summarize(&report.rows) {
        let med = |x: Option<clmm_game::strategies::Stats>| x.map_or(f64::NAN, |s| s.median);
        println!("{name:>6} {:>8.3} {:>10.2e} {:>10.2e}", med(s.overlap_gt), med(s.roi), med(s.nog));
    }
    Ok(())
}
