use pouchsim::battery::run_battery;
use pouchsim::config::RunConfig;
use std::time::Instant;

fn main() {
    let mut cfg = RunConfig::default();
    cfg.battery.trials_per_condition = 30;
    for seed in [42u64, 7, 1234] {
        cfg.battery.master_seed = seed;
        let t0 = Instant::now();
        let run = run_battery(&cfg, None).unwrap();
        let dt = t0.elapsed().as_secs_f64();
        println!("seed {seed}: {} records in {:.2} s, fit offset {:.5} fills {:?}",
                 run.records.len(), dt, run.fit.contact_offset,
                 run.fit.fills.map(|f| format!("{f:.4}")));
        for s in &run.summaries {
            println!("  {} d{:>3}: angle {:6.2}+/-{:.3} force {:.4}+/-{:.4} cv {:.4} path {:.4} cv {:.4}",
                     s.design_id, s.duty, s.angle_deg.mean, s.angle_deg.sd,
                     s.force.mean, s.force.sd, s.force.cv, s.path_length.mean, s.path_length.cv);
        }
        let p = |t: &pouchsim::stats::AnovaTable| t.factor_b.p.unwrap_or(f64::NAN);
        println!("  anova duty-effect p: angle {:.2e} force {:.2e} path {:.2e}",
                 p(&run.anova_angle), p(&run.anova_force), p(&run.anova_path));
        println!("  anova interaction p(angle): {:.2e}", run.anova_angle.interaction.p.unwrap_or(f64::NAN));
        for c in &run.tukey_duty_angle {
            println!("  tukey duty {}-{}: q {:.3} p {:.4}", c.group_i, c.group_j, c.q_statistic, c.p_value);
        }
        // smoothness sample
        let s0 = &run.summaries[0];
        println!("  smoothness abd 1c-d50: Sx {:.3} Sy {:.3} Sz {:.3}",
                 s0.sparc_abduction_mean.s_x, s0.sparc_abduction_mean.s_y, s0.sparc_abduction_mean.s_z);
    }
}
