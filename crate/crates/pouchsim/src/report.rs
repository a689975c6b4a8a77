//! Persistence and report emission: JSON-lines trial records, summary
//! tables (CSV + markdown), and plot-ready CSV/SVG artifacts.
//!
//! All emitters iterate in fixed orders and format floats deterministically,
//! so a re-run with the same inputs is byte-identical.

use crate::battery::BatteryRun;
use crate::error::{Error, Result};
use crate::rig::TrialRecord;
use crate::screening::ScreeningResult;
use crate::stats::AnovaTable;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn write_records_jsonl(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::Config(format!("serialize record: {e}")))?;
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_jsonl(path: &Path) -> Result<Vec<TrialRecord>> {
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: TrialRecord = serde_json::from_str(&line).map_err(|e| Error::Schema {
            row: i + 1,
            column: "record".into(),
            message: e.to_string(),
        })?;
        records.push(r);
    }
    Ok(records)
}

/// Fixed-precision float for human-facing tables.
fn fmt(v: f64) -> String {
    if v.is_nan() {
        "n/a".to_string()
    } else {
        format!("{v:.4}")
    }
}

/// Full-precision float for plot-data CSVs (shortest round-trip form).
fn fmt_exact(v: f64) -> String {
    format!("{v}")
}

pub fn screening_csv(results: &[ScreeningResult]) -> String {
    let mut out = String::from(
        "rank,design,n_cells,width_mm,required_pressure_pa,hoop_stress_pa,max_thickness_m,lift_torque_margin_nm,feasible,reason\n",
    );
    for r in results {
        let reason = r
            .reason
            .map(|x| format!("{x:?}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.rank,
            r.design.id(),
            r.design.n_cells,
            fmt(r.design.width * 1e3),
            fmt(r.required_pressure),
            fmt(r.hoop_stress),
            fmt(r.max_thickness),
            fmt(r.lift_torque_margin),
            r.feasible,
            reason
        );
    }
    out
}

pub fn screening_text(results: &[ScreeningResult]) -> String {
    let mut out = String::from("design-space screen (ranked)\n");
    let _ = writeln!(
        out,
        "{:<4} {:<14} {:>12} {:>12} {:>8}  reason",
        "rank", "design", "P_req [Pa]", "sigma [Pa]", "feasible"
    );
    for r in results {
        let reason = r
            .reason
            .map(|x| format!("{x:?}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<4} {:<14} {:>12} {:>12} {:>8}  {}",
            r.rank,
            r.design.id(),
            fmt(r.required_pressure),
            fmt(r.hoop_stress),
            r.feasible,
            reason
        );
    }
    out
}

fn anova_csv(name: &str, t: &AnovaTable) -> String {
    let mut out = String::from("effect,sum_sq,df,mean_sq,f,p\n");
    let row = |label: &str, e: &crate::stats::AnovaEffect| -> String {
        format!(
            "{label},{},{},{},{},{}\n",
            fmt_exact(e.sum_sq),
            fmt_exact(e.df),
            fmt_exact(e.mean_sq),
            e.f.map(fmt_exact).unwrap_or_else(|| "n/a".into()),
            e.p.map(fmt_exact).unwrap_or_else(|| "n/a".into()),
        )
    };
    out.push_str(&row(&format!("{name}:cells"), &t.factor_a));
    out.push_str(&row(&format!("{name}:duty"), &t.factor_b));
    out.push_str(&row(&format!("{name}:interaction"), &t.interaction));
    out.push_str(&row(&format!("{name}:error"), &t.error));
    out
}

/// Simple deterministic SVG polyline plot.
struct SvgPlot {
    width: f64,
    height: f64,
    margin: f64,
    body: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

impl SvgPlot {
    fn new(x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        SvgPlot {
            width: 640.0,
            height: 480.0,
            margin: 40.0,
            body: String::new(),
            x_range,
            y_range,
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let sx = self.margin + (x - x0) / (x1 - x0).max(1e-12) * (self.width - 2.0 * self.margin);
        let sy = self.height
            - self.margin
            - (y - y0) / (y1 - y0).max(1e-12) * (self.height - 2.0 * self.margin);
        (sx, sy)
    }

    fn polyline(&mut self, points: &[(f64, f64)], color: &str, opacity: f64) {
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| {
                let (sx, sy) = self.map(x, y);
                format!("{sx:.2},{sy:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-opacity=\"{opacity:.2}\" stroke-width=\"1.2\" points=\"{}\"/>",
            coords.join(" ")
        );
    }

    fn circle(&mut self, x: f64, y: f64, color: &str) {
        let (sx, sy) = self.map(x, y);
        let _ = writeln!(
            self.body,
            "  <circle cx=\"{sx:.2}\" cy=\"{sy:.2}\" r=\"3\" fill=\"{color}\"/>"
        );
    }

    fn finish(self, title: &str) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n  <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n  <text x=\"{tx}\" y=\"20\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">{title}</text>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            tx = self.width / 2.0,
            body = self.body
        )
    }
}

/// Writes the battery report bundle into `dir`; returns the file names
/// written (relative to `dir`).
pub fn write_battery_report(dir: &Path, run: &BatteryRun) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut save = |name: &str, content: String| -> Result<()> {
        fs::write(dir.join(name), content)?;
        written.push(name.to_string());
        Ok(())
    };

    // condition summary tables
    let mut angle_csv =
        String::from("design,duty,n,angle_mean_deg,angle_sd_deg,angle_cv\n");
    let mut force_csv = String::from("design,duty,n,force_mean_n,force_sd_n,force_cv\n");
    let mut path_csv = String::from("design,duty,n,path_mean_m,path_sd_m,path_cv\n");
    let mut smooth_csv = String::from(
        "design,duty,phase,sx_mean,sx_sd,sy_mean,sy_sd,sz_mean,sz_sd\n",
    );
    for s in &run.summaries {
        let _ = writeln!(
            angle_csv,
            "{},{},{},{},{},{}",
            s.design_id,
            s.duty,
            s.n_trials,
            fmt_exact(s.angle_deg.mean),
            fmt_exact(s.angle_deg.sd),
            fmt_exact(s.angle_deg.cv)
        );
        let _ = writeln!(
            force_csv,
            "{},{},{},{},{},{}",
            s.design_id,
            s.duty,
            s.n_trials,
            fmt_exact(s.force.mean),
            fmt_exact(s.force.sd),
            fmt_exact(s.force.cv)
        );
        let _ = writeln!(
            path_csv,
            "{},{},{},{},{},{}",
            s.design_id,
            s.duty,
            s.n_trials,
            fmt_exact(s.path_length.mean),
            fmt_exact(s.path_length.sd),
            fmt_exact(s.path_length.cv)
        );
        for (phase, mean, sd) in [
            ("abduction", &s.sparc_abduction_mean, &s.sparc_abduction_sd),
            ("adduction", &s.sparc_adduction_mean, &s.sparc_adduction_sd),
        ] {
            let _ = writeln!(
                smooth_csv,
                "{},{},{},{},{},{},{},{},{}",
                s.design_id,
                s.duty,
                phase,
                fmt_exact(mean.s_x),
                fmt_exact(sd[0]),
                fmt_exact(mean.s_y),
                fmt_exact(sd[1]),
                fmt_exact(mean.s_z),
                fmt_exact(sd[2])
            );
        }
    }
    save("angle_summary.csv", angle_csv)?;
    save("force_summary.csv", force_csv)?;
    save("path_summary.csv", path_csv)?;
    save("smoothness_summary.csv", smooth_csv)?;

    save(
        "anova.csv",
        format!(
            "{}{}{}",
            anova_csv("max_angle", &run.anova_angle),
            anova_csv("static_force", &run.anova_force),
            anova_csv("path_length", &run.anova_path)
        ),
    )?;

    let mut tukey = String::from("metric,group_i,group_j,mean_diff,q,p\n");
    for c in &run.tukey_duty_angle {
        let _ = writeln!(
            tukey,
            "max_angle_duty,{},{},{},{},{}",
            c.group_i,
            c.group_j,
            fmt_exact(c.mean_diff),
            fmt_exact(c.q_statistic),
            fmt_exact(c.p_value)
        );
    }
    save("tukey.csv", tukey)?;

    // traceability manifest
    let mut manifest = String::from("design,duty,trial_id,seed\n");
    for r in &run.records {
        let _ = writeln!(manifest, "{},{},{},{}", r.design_id, r.duty, r.id(), r.rng_seed);
    }
    save("records_manifest.csv", manifest)?;

    // per-condition trajectory overlays: CSV plot data + SVG
    for s in &run.summaries {
        let stem = format!(
            "trajectory_{}_d{:03}",
            s.design_id.replace('.', "p"),
            s.duty as u32
        );
        let mut csv = String::from("trial_id,t,x,y\n");
        let sel: Vec<&TrialRecord> = run
            .records
            .iter()
            .filter(|r| r.design_id == s.design_id && r.duty == s.duty)
            .collect();
        let mut x_max = 1e-6f64;
        let mut y_max = 1e-6f64;
        for r in &sel {
            for p in &r.trajectory.samples {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    r.id(),
                    fmt_exact(p.t),
                    fmt_exact(p.x),
                    fmt_exact(p.y)
                );
                x_max = x_max.max(p.x.abs());
                y_max = y_max.max(p.y.abs());
            }
        }
        save(&format!("{stem}.csv"), csv)?;
        let mut plot = SvgPlot::new((-0.02, x_max * 1.1), (-0.01, y_max * 1.1));
        for (i, r) in sel.iter().enumerate() {
            let pts: Vec<(f64, f64)> = r.trajectory.samples.iter().map(|p| (p.x, p.y)).collect();
            plot.polyline(&pts, PALETTE[i % PALETTE.len()], 0.45);
        }
        let svg = plot.finish(&format!("{} duty {}% end-effector x-y", s.design_id, s.duty));
        save(&format!("{stem}.svg"), svg)?;
    }

    // force vs duty summary
    let mut force_plot = SvgPlot::new((40.0, 110.0), {
        let max_f = run
            .summaries
            .iter()
            .map(|s| s.force.mean + s.force.sd)
            .fold(0.0f64, f64::max);
        (0.0, max_f * 1.15)
    });
    let mut design_ids: Vec<String> = run.summaries.iter().map(|s| s.design_id.clone()).collect();
    design_ids.sort();
    design_ids.dedup();
    let mut fcsv = String::from("design,duty,force_mean_n,force_sd_n\n");
    for (di, design) in design_ids.iter().enumerate() {
        let pts: Vec<(f64, f64)> = run
            .summaries
            .iter()
            .filter(|s| &s.design_id == design)
            .map(|s| (s.duty, s.force.mean))
            .collect();
        for s in run.summaries.iter().filter(|s| &s.design_id == design) {
            let _ = writeln!(
                fcsv,
                "{},{},{},{}",
                design,
                s.duty,
                fmt_exact(s.force.mean),
                fmt_exact(s.force.sd)
            );
        }
        force_plot.polyline(&pts, PALETTE[di % PALETTE.len()], 1.0);
        for &(x, y) in &pts {
            force_plot.circle(x, y, PALETTE[di % PALETTE.len()]);
        }
    }
    save("force_vs_duty.csv", fcsv)?;
    save(
        "force_vs_duty.svg",
        force_plot.finish("static force vs duty cycle"),
    )?;

    // path-length distributions
    let mut pcsv = String::from("design,duty,trial_id,path_length_m\n");
    for (r, m) in run.records.iter().zip(&run.metrics) {
        let _ = writeln!(
            pcsv,
            "{},{},{},{}",
            r.design_id,
            r.duty,
            r.id(),
            fmt_exact(m.path_length)
        );
    }
    save("path_length_distribution.csv", pcsv)?;
    let max_pl = run
        .metrics
        .iter()
        .map(|m| m.path_length)
        .fold(0.0f64, f64::max);
    let mut pplot = SvgPlot::new((40.0, 110.0), (0.0, max_pl * 1.15));
    for (di, design) in design_ids.iter().enumerate() {
        for (r, m) in run.records.iter().zip(&run.metrics) {
            if &r.design_id == design {
                // horizontal jitter by trial index keeps points distinguishable
                let x = r.duty + (r.trial_index as f64 % 10.0 - 4.5) * 0.5;
                pplot.circle(x, m.path_length, PALETTE[di % PALETTE.len()]);
            }
        }
    }
    save(
        "path_length_distribution.svg",
        pplot.finish("path length by condition"),
    )?;

    // markdown report
    let mut md = String::from("# trial battery report\n\n");
    let _ = writeln!(
        md,
        "rig calibration: contact offset {} m, terminal fills {:?}, max residual {} deg\n",
        fmt(run.fit.contact_offset),
        run.fit.fills.map(|f| format!("{f:.4}")),
        fmt(run.fit.max_abs_residual_deg)
    );
    let _ = writeln!(
        md,
        "arm defaults are reported in the config header of the records manifest; {} trials, {} diverged\n",
        run.records.len(),
        run.diverged.len()
    );
    md.push_str("| design | duty % | angle deg (mean+/-sd) | force N (mean+/-sd) | force CV | path m (mean+/-sd) |\n");
    md.push_str("|---|---|---|---|---|---|\n");
    for s in &run.summaries {
        let _ = writeln!(
            md,
            "| {} | {} | {} +/- {} | {} +/- {} | {} | {} +/- {} |",
            s.design_id,
            s.duty,
            fmt(s.angle_deg.mean),
            fmt(s.angle_deg.sd),
            fmt(s.force.mean),
            fmt(s.force.sd),
            fmt(s.force.cv),
            fmt(s.path_length.mean),
            fmt(s.path_length.sd)
        );
    }
    md.push('\n');
    for (name, table) in [
        ("max angle", &run.anova_angle),
        ("static force", &run.anova_force),
        ("path length", &run.anova_path),
    ] {
        let _ = writeln!(md, "## two-way ANOVA: {name}\n");
        md.push_str("| effect | sum_sq | df | F | p |\n|---|---|---|---|---|\n");
        for (label, e) in [
            ("cells", &table.factor_a),
            ("duty", &table.factor_b),
            ("interaction", &table.interaction),
            ("error", &table.error),
        ] {
            let _ = writeln!(
                md,
                "| {label} | {} | {} | {} | {} |",
                fmt(e.sum_sq),
                e.df,
                e.f.map(fmt).unwrap_or_else(|| "-".into()),
                e.p.map(fmt).unwrap_or_else(|| "-".into())
            );
        }
        md.push('\n');
    }
    if !run.diverged.is_empty() {
        md.push_str("## diverged trials\n\n");
        for d in &run.diverged {
            let _ = writeln!(md, "- {d}");
        }
    }
    save("report.md", md)?;

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    #[test]
    fn records_round_trip_jsonl() {
        let mut cfg = RunConfig::default();
        cfg.battery.trials_per_condition = 2;
        let run = crate::battery::run_battery(&cfg, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        write_records_jsonl(&path, &run.records).unwrap();
        let back = read_records_jsonl(&path).unwrap();
        assert_eq!(back, run.records);
    }

    #[test]
    fn report_bundle_is_deterministic() {
        let mut cfg = RunConfig::default();
        cfg.battery.trials_per_condition = 2;
        let run = crate::battery::run_battery(&cfg, None).unwrap();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let w1 = write_battery_report(d1.path(), &run).unwrap();
        let w2 = write_battery_report(d2.path(), &run).unwrap();
        assert_eq!(w1, w2);
        assert!(w1.iter().any(|f| f.starts_with("trajectory_")));
        // 6 condition overlays (2 designs x 3 duties), csv + svg each
        let overlays = w1.iter().filter(|f| f.starts_with("trajectory_")).count();
        assert_eq!(overlays, 12);
        for name in &w1 {
            let a = std::fs::read(d1.path().join(name)).unwrap();
            let b = std::fs::read(d2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between runs");
        }
    }

    #[test]
    fn single_record_report_does_not_crash() {
        let mut cfg = RunConfig::default();
        cfg.battery.trials_per_condition = 2;
        let mut run = crate::battery::run_battery(&cfg, None).unwrap();
        run.records.truncate(2);
        run.metrics.truncate(2);
        run.summaries.truncate(1);
        let dir = tempfile::tempdir().unwrap();
        write_battery_report(dir.path(), &run).unwrap();
    }
}
