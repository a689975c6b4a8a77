//! Two-way ANOVA with interaction and Tukey HSD post-hoc comparisons.

use crate::error::{Error, Result};
use crate::special::{f_cdf, studentized_range_cdf};
use serde::{Deserialize, Serialize};

/// One effect row of the ANOVA decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaEffect {
    pub sum_sq: f64,
    pub df: f64,
    pub mean_sq: f64,
    /// `None` when the error mean square vanishes (degenerate data).
    pub f: Option<f64>,
    pub p: Option<f64>,
}

/// Balanced two-factor ANOVA table with interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub factor_a: AnovaEffect,
    pub factor_b: AnovaEffect,
    pub interaction: AnovaEffect,
    pub error: AnovaEffect,
    pub total_sum_sq: f64,
    pub total_df: f64,
    /// Set when every observation is identical and no F is defined.
    pub degenerate: bool,
}

/// Balanced two-way ANOVA over `data[a][b] = replicate observations`.
///
/// Sums of squares use the computational (totals) formulas on grand-mean
/// centered data, which keeps them translation invariant; the definitional
/// route lives in the test oracle.
pub fn two_way_anova(data: &[Vec<Vec<f64>>]) -> Result<AnovaTable> {
    let a = data.len();
    if a < 2 {
        return Err(Error::Degenerate("need at least 2 levels of factor A".into()));
    }
    let b = data[0].len();
    if b < 2 {
        return Err(Error::Degenerate("need at least 2 levels of factor B".into()));
    }
    let r = data
        .first()
        .and_then(|row| row.first())
        .map(|c| c.len())
        .unwrap_or(0);
    if r < 2 {
        return Err(Error::Degenerate("need at least 2 replicates per cell".into()));
    }
    for (i, row) in data.iter().enumerate() {
        if row.len() != b {
            return Err(Error::Degenerate(format!(
                "factor A level {i} has {} B levels, expected {b}",
                row.len()
            )));
        }
        for (j, cell) in row.iter().enumerate() {
            if cell.len() != r {
                return Err(Error::Degenerate(format!(
                    "unbalanced design: cell ({i}, {j}) has {} replicates, expected {r}",
                    cell.len()
                )));
            }
        }
    }

    let n = (a * b * r) as f64;
    let grand_mean = data
        .iter()
        .flat_map(|row| row.iter().flat_map(|c| c.iter()))
        .sum::<f64>()
        / n;

    // totals of centered data
    let mut a_totals = vec![0.0; a];
    let mut b_totals = vec![0.0; b];
    let mut cell_totals = vec![vec![0.0; b]; a];
    let mut sum_sq_obs = 0.0;
    for (i, row) in data.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            for &y in cell {
                let yc = y - grand_mean;
                a_totals[i] += yc;
                b_totals[j] += yc;
                cell_totals[i][j] += yc;
                sum_sq_obs += yc * yc;
            }
        }
    }
    let grand_total: f64 = a_totals.iter().sum();
    let correction = grand_total * grand_total / n;

    let ss_total = sum_sq_obs - correction;
    let ss_a = a_totals.iter().map(|t| t * t).sum::<f64>() / (b * r) as f64 - correction;
    let ss_b = b_totals.iter().map(|t| t * t).sum::<f64>() / (a * r) as f64 - correction;
    let ss_cells = cell_totals
        .iter()
        .flat_map(|row| row.iter())
        .map(|t| t * t)
        .sum::<f64>()
        / r as f64
        - correction;
    let ss_ab = (ss_cells - ss_a - ss_b).max(0.0);
    let ss_e = (ss_total - ss_cells).max(0.0);
    let ss_a = ss_a.max(0.0);
    let ss_b = ss_b.max(0.0);

    let df_a = (a - 1) as f64;
    let df_b = (b - 1) as f64;
    let df_ab = df_a * df_b;
    let df_e = (a * b * (r - 1)) as f64;
    let ms_e = ss_e / df_e;

    let degenerate = ms_e <= f64::EPSILON * grand_mean.abs().max(1.0);
    let effect = |ss: f64, df: f64| -> Result<AnovaEffect> {
        let ms = ss / df;
        if degenerate {
            return Ok(AnovaEffect {
                sum_sq: ss,
                df,
                mean_sq: ms,
                f: None,
                p: None,
            });
        }
        let f = ms / ms_e;
        let p = 1.0 - f_cdf(f, df, df_e)?;
        Ok(AnovaEffect {
            sum_sq: ss,
            df,
            mean_sq: ms,
            f: Some(f),
            p: Some(p),
        })
    };

    Ok(AnovaTable {
        factor_a: effect(ss_a, df_a)?,
        factor_b: effect(ss_b, df_b)?,
        interaction: effect(ss_ab, df_ab)?,
        error: AnovaEffect {
            sum_sq: ss_e,
            df: df_e,
            mean_sq: ms_e,
            f: None,
            p: None,
        },
        total_sum_sq: ss_total,
        total_df: n - 1.0,
        degenerate,
    })
}

/// One pairwise Tukey comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TukeyComparison {
    pub group_i: usize,
    pub group_j: usize,
    pub mean_diff: f64,
    pub q_statistic: f64,
    pub p_value: f64,
}

/// Tukey HSD over group means with a common error mean square.
///
/// p-values come from the studentized range distribution evaluated by
/// deterministic Gauss-Legendre quadrature.
pub fn tukey_hsd(
    group_means: &[f64],
    mse: f64,
    n_per_group: usize,
    df_error: f64,
) -> Result<Vec<TukeyComparison>> {
    let k = group_means.len();
    if k < 2 {
        return Err(Error::Degenerate("tukey_hsd needs at least 2 groups".into()));
    }
    if mse <= 0.0 {
        return Err(Error::Domain("tukey_hsd requires mse > 0".into()));
    }
    if n_per_group == 0 || df_error <= 0.0 {
        return Err(Error::Domain("tukey_hsd requires n > 0 and df > 0".into()));
    }
    let scale = (mse / n_per_group as f64).sqrt();
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            let diff = group_means[i] - group_means[j];
            let q = diff.abs() / scale;
            let p = 1.0 - studentized_range_cdf(q, k, df_error)?;
            out.push(TukeyComparison {
                group_i: i,
                group_j: j,
                mean_diff: diff,
                q_statistic: q,
                p_value: p,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, Gamma, StandardNormal};

    /// Definitional oracle: direct mean subtractions, no shortcut formulas.
    pub(crate) fn anova_oracle(data: &[Vec<Vec<f64>>]) -> (f64, f64, f64, f64) {
        let a = data.len();
        let b = data[0].len();
        let r = data[0][0].len();
        let n = (a * b * r) as f64;
        let grand: f64 = data
            .iter()
            .flat_map(|row| row.iter().flat_map(|c| c.iter()))
            .sum::<f64>()
            / n;
        let a_means: Vec<f64> = (0..a)
            .map(|i| {
                data[i]
                    .iter()
                    .flat_map(|c| c.iter())
                    .sum::<f64>()
                    / (b * r) as f64
            })
            .collect();
        let b_means: Vec<f64> = (0..b)
            .map(|j| {
                data.iter()
                    .map(|row| row[j].iter().sum::<f64>())
                    .sum::<f64>()
                    / (a * r) as f64
            })
            .collect();
        let cell_means: Vec<Vec<f64>> = data
            .iter()
            .map(|row| row.iter().map(|c| c.iter().sum::<f64>() / r as f64).collect())
            .collect();

        let mut ss_a = 0.0;
        for &m in &a_means {
            ss_a += (b * r) as f64 * (m - grand) * (m - grand);
        }
        let mut ss_b = 0.0;
        for &m in &b_means {
            ss_b += (a * r) as f64 * (m - grand) * (m - grand);
        }
        let mut ss_ab = 0.0;
        let mut ss_e = 0.0;
        for i in 0..a {
            for j in 0..b {
                let dev = cell_means[i][j] - a_means[i] - b_means[j] + grand;
                ss_ab += r as f64 * dev * dev;
                for &y in &data[i][j] {
                    ss_e += (y - cell_means[i][j]) * (y - cell_means[i][j]);
                }
            }
        }
        (ss_a, ss_b, ss_ab, ss_e)
    }

    fn synthetic(a: usize, b: usize, r: usize, seed: u64) -> Vec<Vec<Vec<f64>>> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..a)
            .map(|i| {
                (0..b)
                    .map(|j| {
                        (0..r)
                            .map(|_| {
                                let z: f64 = StandardNormal.sample(&mut rng);
                                2.0 * i as f64 + 0.7 * j as f64
                                    + 0.5 * (i * j) as f64
                                    + z
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn matches_definitional_oracle() {
        let data = synthetic(2, 3, 5, 42);
        let table = two_way_anova(&data).unwrap();
        let (ss_a, ss_b, ss_ab, ss_e) = anova_oracle(&data);
        assert!((table.factor_a.sum_sq - ss_a).abs() < 1e-9);
        assert!((table.factor_b.sum_sq - ss_b).abs() < 1e-9);
        assert!((table.interaction.sum_sq - ss_ab).abs() < 1e-9);
        assert!((table.error.sum_sq - ss_e).abs() < 1e-9);
        let f_a = (ss_a / 1.0) / (ss_e / (2.0 * 3.0 * 4.0));
        assert!((table.factor_a.f.unwrap() - f_a).abs() < 1e-9);
    }

    #[test]
    fn df_sum_and_ss_partition() {
        let data = synthetic(3, 4, 6, 7);
        let t = two_way_anova(&data).unwrap();
        let df_sum = t.factor_a.df + t.factor_b.df + t.interaction.df + t.error.df;
        assert_eq!(df_sum, t.total_df);
        let ss_sum = t.factor_a.sum_sq + t.factor_b.sum_sq + t.interaction.sum_sq + t.error.sum_sq;
        assert!((ss_sum - t.total_sum_sq).abs() <= 1e-12 * t.total_sum_sq.max(1.0));
        for e in [&t.factor_a, &t.factor_b, &t.interaction, &t.error] {
            assert!(e.sum_sq >= 0.0);
        }
        for e in [&t.factor_a, &t.factor_b, &t.interaction] {
            let p = e.p.unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn all_equal_observations_flagged() {
        let data = vec![vec![vec![3.5; 4]; 3]; 2];
        let t = two_way_anova(&data).unwrap();
        assert!(t.degenerate);
        assert!(t.factor_a.f.is_none());
        assert!(t.factor_a.sum_sq.abs() < 1e-20);
        assert!(t.total_sum_sq.abs() < 1e-20);
    }

    #[test]
    fn translation_invariance() {
        let data = synthetic(2, 3, 8, 99);
        let t0 = two_way_anova(&data).unwrap();
        let shifted: Vec<Vec<Vec<f64>>> = data
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| c.iter().map(|y| y + 1.0e4).collect())
                    .collect()
            })
            .collect();
        let t1 = two_way_anova(&shifted).unwrap();
        assert!((t0.factor_a.f.unwrap() - t1.factor_a.f.unwrap()).abs() < 1e-9);
        assert!((t0.factor_b.f.unwrap() - t1.factor_b.f.unwrap()).abs() < 1e-9);
        assert!((t0.interaction.f.unwrap() - t1.interaction.f.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn unbalanced_design_rejected() {
        let mut data = synthetic(2, 3, 5, 1);
        data[1][2].pop();
        assert!(two_way_anova(&data).is_err());
    }

    #[test]
    fn tukey_identical_means_p_near_one() {
        let cmp = tukey_hsd(&[5.0, 5.0], 2.0, 10, 18.0).unwrap();
        assert_eq!(cmp.len(), 1);
        assert!(cmp[0].p_value > 0.999);
    }

    #[test]
    fn tukey_rejects_bad_mse() {
        assert!(tukey_hsd(&[1.0, 2.0], 0.0, 10, 18.0).is_err());
        assert!(tukey_hsd(&[1.0], 1.0, 10, 18.0).is_err());
    }

    #[test]
    fn tukey_matches_monte_carlo() {
        // three-group synthetic case versus 10^6 draws of the studentized
        // range statistic.
        let k = 3;
        let n = 12;
        let df = (k * (n - 1)) as f64;
        let means = [0.0, 0.35, 0.9];
        let mse = 1.0;
        let comparisons = tukey_hsd(&means, mse, n, df).unwrap();

        let draws = 1_000_000usize;
        let mut rng = ChaCha12Rng::seed_from_u64(2024);
        let gamma = Gamma::new(df / 2.0, 2.0).unwrap();
        let mut qs = Vec::with_capacity(draws);
        for _ in 0..draws {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for _ in 0..k {
                let z: f64 = StandardNormal.sample(&mut rng);
                lo = lo.min(z);
                hi = hi.max(z);
            }
            let chi2: f64 = gamma.sample(&mut rng);
            let s = (chi2 / df).sqrt();
            qs.push((hi - lo) / s);
        }
        for cmp in comparisons {
            let exceed = qs.iter().filter(|&&q| q >= cmp.q_statistic).count();
            let p_mc = exceed as f64 / draws as f64;
            let se = (p_mc * (1.0 - p_mc) / draws as f64).sqrt().max(1e-6);
            assert!(
                (cmp.p_value - p_mc).abs() <= 3.0 * se,
                "pair ({}, {}): quadrature {} vs MC {} (se {})",
                cmp.group_i,
                cmp.group_j,
                cmp.p_value,
                p_mc,
                se
            );
        }
    }

    #[test]
    fn tukey_paper_like_duty_separation() {
        // groups separated like the duty effect: 50% far from 75/100%,
        // 75% and 100% close together
        let means = [10.0, 13.0, 13.2];
        let mse = 4.0;
        let n = 60;
        let df = 177.0;
        let cmp = tukey_hsd(&means, mse, n, df).unwrap();
        let p = |i: usize, j: usize| {
            cmp.iter()
                .find(|c| c.group_i == i && c.group_j == j)
                .unwrap()
                .p_value
        };
        assert!(p(0, 1) < 0.01);
        assert!(p(0, 2) < 0.01);
        assert!(p(1, 2) > 0.3);
    }

    #[test]
    fn fuzzed_random_tables_match_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for trial in 0..20 {
            let a = rng.gen_range(2..=4);
            let b = rng.gen_range(2..=4);
            let r = rng.gen_range(2..=8);
            let data = synthetic(a, b, r, 1000 + trial);
            let t = two_way_anova(&data).unwrap();
            let (ss_a, ss_b, ss_ab, ss_e) = anova_oracle(&data);
            for (got, want) in [
                (t.factor_a.sum_sq, ss_a),
                (t.factor_b.sum_sq, ss_b),
                (t.interaction.sum_sq, ss_ab),
                (t.error.sum_sq, ss_e),
            ] {
                assert!((got - want).abs() < 1e-9, "trial {trial}: {got} vs {want}");
            }
        }
    }
}
