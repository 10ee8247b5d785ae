use super::record::{cmp_params, Params, RunRecord};
use super::Scenario;
use std::collections::BTreeSet;

/// Statistics of one parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    pub scenario: Scenario,
    pub key: Params,
    /// Runs in the group, failed ones included.
    pub runs: usize,
    /// Runs with a non-finite MSE.
    pub diverged: usize,
    /// Mean and population standard deviation over the finite runs.
    pub mean: f64,
    pub std: f64,
    /// Median over all runs; failed runs count as `+inf`.
    pub median: f64,
    pub horizon_median: Option<f64>,
    pub note: Option<String>,
}

/// Median of a slice (NaN when empty).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    // equal middles also covers two infinities
    if v.len() % 2 == 1 || v[m - 1] == v[m] {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl AggregateStats {
    pub fn from_records(scenario: Scenario, key: Params, group: &[&RunRecord]) -> Self {
        let all: Vec<f64> = group.iter().map(|r| r.mse).collect();
        let finite: Vec<f64> = all.iter().copied().filter(|v| v.is_finite()).collect();
        let (mean, std) = mean_std(&finite);
        let horizons: Vec<f64> = group.iter().filter_map(|r| r.horizon).collect();
        Self {
            scenario,
            key,
            runs: group.len(),
            diverged: all.len() - finite.len(),
            mean,
            std,
            median: median(&all),
            horizon_median: (!horizons.is_empty()).then(|| median(&horizons)),
            note: None,
        }
    }

    /// A grid cell with no runs.
    pub fn empty(scenario: Scenario, key: Params, note: &str) -> Self {
        Self {
            scenario,
            key,
            runs: 0,
            diverged: 0,
            mean: f64::NAN,
            std: f64::NAN,
            median: f64::NAN,
            horizon_median: None,
            note: Some(note.to_string()),
        }
    }
}

/// Group records by the parameters named in `group_by` (all parameters when
/// `None`) and summarize each group, ordered by group key.
pub fn aggregate(records: &[RunRecord], group_by: Option<&[&str]>) -> Vec<AggregateStats> {
    let key_of = |r: &RunRecord| -> Params {
        match group_by {
            None => r.params.clone(),
            Some(names) => r
                .params
                .iter()
                .filter(|(k, _)| names.contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    };
    let mut keyed: Vec<(Scenario, Params, &RunRecord)> = records.iter().map(|r| (r.scenario, key_of(r), r)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| cmp_params(&a.1, &b.1)).then(a.2.seed.cmp(&b.2.seed)));
    let mut out = Vec::new();
    let mut i = 0;
    while i < keyed.len() {
        let mut j = i;
        while j < keyed.len() && keyed[j].0 == keyed[i].0 && keyed[j].1 == keyed[i].1 {
            j += 1;
        }
        let group: Vec<&RunRecord> = keyed[i..j].iter().map(|k| k.2).collect();
        out.push(AggregateStats::from_records(keyed[i].0, keyed[i].1.clone(), &group));
        i = j;
    }
    out
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:?}")
    }
}

/// CSV with one column per parameter name seen in the table.
pub fn aggregates_to_csv(rows: &[AggregateStats]) -> String {
    let names: BTreeSet<&str> = rows.iter().flat_map(|r| r.key.keys().map(String::as_str)).collect();
    let mut out = String::from("scenario");
    for n in &names {
        out.push(',');
        out.push_str(n);
    }
    out.push_str(",runs,diverged,mean_mse,median_mse,std_mse,median_horizon,note\n");
    for r in rows {
        out.push_str(r.scenario.name());
        for n in &names {
            out.push(',');
            if let Some(v) = r.key.get(*n) {
                out.push_str(&v.to_string());
            }
        }
        out.push_str(&format!(
            ",{},{},{},{},{},{},{}\n",
            r.runs,
            r.diverged,
            num(r.mean),
            num(r.median),
            num(r.std),
            r.horizon_median.map(num).unwrap_or_default(),
            r.note.as_deref().unwrap_or("")
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::record::Provenance;
    use super::*;
    use std::collections::BTreeMap;

    fn rec(eps: f64, seed: u64, mse: f64) -> RunRecord {
        let mut params = Params::new();
        params.insert("eps".into(), eps.into());
        RunRecord {
            scenario: Scenario::OpenLoopL8,
            params,
            seed,
            mse,
            horizon: None,
            diverged: !mse.is_finite(),
            metrics: BTreeMap::new(),
            error: None,
            wall_time: 0.0,
            provenance: Provenance::new("h".into()),
        }
    }

    #[test]
    fn single_record() {
        let a = aggregate(&[rec(0.1, 1, 0.5)], None);
        assert_eq!(a.len(), 1);
        assert_eq!((a[0].mean, a[0].median, a[0].std, a[0].runs), (0.5, 0.5, 0.0, 1));
    }

    #[test]
    fn median_is_robust() {
        let rs = vec![rec(0.1, 1, 1.0), rec(0.1, 2, 2.0), rec(0.1, 3, 100.0)];
        assert_eq!(aggregate(&rs, None)[0].median, 2.0);
    }

    #[test]
    fn duplicated_set_keeps_statistics() {
        let rs = vec![rec(0.1, 1, 1.0), rec(0.1, 2, 4.0), rec(0.1, 3, 7.0)];
        let doubled: Vec<RunRecord> = rs.iter().chain(&rs).cloned().collect();
        let (a, b) = (&aggregate(&rs, None)[0], &aggregate(&doubled, None)[0]);
        assert_eq!((a.mean, a.median), (b.mean, b.median));
        assert!((a.std - b.std).abs() < 1e-15);
        assert_eq!(b.runs, 6);
    }

    #[test]
    fn diverged_runs_excluded_from_mean() {
        let rs = vec![rec(0.1, 1, 1.0), rec(0.1, 2, f64::INFINITY), rec(0.1, 3, 3.0)];
        let a = &aggregate(&rs, None)[0];
        assert_eq!((a.mean, a.diverged, a.runs, a.median), (2.0, 1, 3, 3.0));
    }

    #[test]
    fn groups_sorted_and_empty_input() {
        let rs = vec![rec(1.0, 1, 1.0), rec(0.025, 1, 2.0), rec(0.1, 1, 3.0)];
        let eps: Vec<f64> = aggregate(&rs, None).iter().map(|a| a.key["eps"].as_f64().unwrap()).collect();
        assert_eq!(eps, vec![0.025, 0.1, 1.0]);
        assert!(aggregate(&[], None).is_empty());
        let all = aggregate(&rs, Some(&[]));
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].runs, 3);
        let csv = aggregates_to_csv(&aggregate(&rs, None));
        assert!(csv.starts_with("scenario,eps,runs,"));
        assert_eq!(csv.lines().count(), 4);
    }
}
