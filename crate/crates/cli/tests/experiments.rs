use std::path::PathBuf;

use rgreedi_cli::report::CSV_HEADER;
use rgreedi_cli::{
    csv_string, emit_csv, plot_svg, read_csv, run_experiment, run_experiment_detailed, CliError,
    Experiment, ExperimentConfig, ReferenceMode, ResultRow,
};

fn micro() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/micro.dat")
}

fn row(algorithm: &str, partition: &str, k: usize, ratio: f64) -> ResultRow {
    ResultRow {
        experiment: "coverage_ratio".into(),
        instance_name: "toy".into(),
        algorithm: algorithm.into(),
        partition: partition.into(),
        k,
        m: 2,
        stat: "single_opt".into(),
        value: 10.0 * ratio,
        ratio,
        oracle_calls: 7,
        wall_ms: 0,
    }
}

fn micro_config() -> ExperimentConfig {
    ExperimentConfig {
        experiment: Experiment::CoverageRatio,
        fimi: Some(micro()),
        trials: 60,
        seed: 3,
        ..ExperimentConfig::default()
    }
}

/// (mean ratio, se ratio) of the random rows at each k.
fn rand_stats(rows: &[ResultRow], algorithm: &str) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for mean in rows
        .iter()
        .filter(|r| r.algorithm == algorithm && r.stat.starts_with("mean_"))
    {
        let se = rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.k == mean.k && r.stat.starts_with("se_"))
            .expect("every mean row has an se row");
        out.push((mean.k, mean.ratio, se.ratio));
    }
    out
}

#[test]
fn single_row_file_has_two_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    emit_csv(&[row("greedy", "none", 1, 0.5)], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.ends_with('\n'));
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
}

#[test]
fn empty_rows_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_csv(&[], &dir.path().join("x.csv")).is_err());
    assert!(plot_svg(&[]).is_err());
}

#[test]
fn unwritable_path_names_the_path() {
    let err = emit_csv(
        &[row("greedy", "none", 1, 0.5)],
        &PathBuf::from("/nonexistent/dir/x.csv"),
    )
    .unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dir/x.csv"), "{err}");
}

#[test]
fn csv_round_trip_is_exact() {
    let rows = run_experiment(&micro_config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rt.csv");
    emit_csv(&rows, &path).unwrap();
    assert_eq!(read_csv(&path).unwrap(), rows);
}

#[test]
fn ratios_have_six_significant_digits() {
    let text = csv_string(&run_experiment(&micro_config()).unwrap()).unwrap();
    for line in text.lines().skip(1) {
        let ratio = line.split(',').nth(8).unwrap();
        assert!(!ratio.contains('e') && !ratio.contains('E'), "{ratio}");
        let digits: String = ratio.chars().filter(char::is_ascii_digit).collect();
        let significant = digits.trim_start_matches('0');
        if !significant.is_empty() {
            assert!(significant.len() <= 6, "{ratio}");
        }
        if ratio.starts_with("0.") || ratio.starts_with("1.") {
            assert_eq!(significant.len(), 6, "{ratio}");
        }
    }
}

#[test]
fn plot_has_one_polyline_per_series() {
    let rows: Vec<ResultRow> = [1, 2, 3]
        .into_iter()
        .flat_map(|k| {
            [
                row("greedy", "none", k, 0.9),
                row("det_greedi", "block", k, 0.7),
            ]
        })
        .collect();
    let svg = plot_svg(&rows).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let lines: Vec<_> = doc
        .descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .collect();
    assert_eq!(lines.len(), 2);
    for l in &lines {
        assert_eq!(l.attribute("points").unwrap().split_whitespace().count(), 3);
    }
    let texts: Vec<&str> = doc
        .descendants()
        .filter(|n| n.has_tag_name("text"))
        .filter_map(|n| n.text())
        .collect();
    assert!(texts.contains(&"k") && texts.contains(&"ratio"));
    assert!(texts.contains(&"greedy (none)") && texts.contains(&"det_greedi (block)"));
}

#[test]
fn plot_rejects_mixed_experiments() {
    let mut other = row("greedy", "none", 2, 0.5);
    other.experiment = "exemplar".into();
    assert!(matches!(
        plot_svg(&[row("greedy", "none", 1, 0.5), other]),
        Err(CliError::Plot(_))
    ));
}

#[test]
fn micro_fimi_coverage_ratios() {
    let rows = run_experiment(&micro_config()).unwrap();
    assert!(rows.iter().all(|r| r.stat.ends_with("_opt")));
    for r in rows.iter().filter(|r| !r.stat.starts_with("se_")) {
        assert!(r.ratio <= 1.0 + 1e-9, "{r:?}");
    }
    let stats = rand_stats(&rows, "rand_greedi");
    assert_eq!(
        stats.iter().map(|s| s.0).collect::<Vec<_>>(),
        vec![1, 2, 3, 4, 5]
    );
    let bound = (1.0 - (-1.0f64).exp()) / 2.0;
    for (k, mean, se) in stats {
        assert!(mean >= bound - 3.0 * se, "k={k}: {mean} vs {bound}");
    }
}

#[test]
fn tight_l3_det_is_fooled_and_rand_is_not() {
    let cfg = ExperimentConfig {
        experiment: Experiment::TightInstance,
        l: 3,
        trials: 100,
        ..ExperimentConfig::default()
    };
    let rows = run_experiment(&cfg).unwrap();
    let det = rows.iter().find(|r| r.algorithm == "det_greedi").unwrap();
    assert_eq!(det.partition, "adversarial");
    assert_eq!(det.m, 10);
    assert_eq!(det.value, 21.0);
    assert_eq!(det.ratio, 0.583333);
    let (_, mean, _) = rand_stats(&rows, "rand_greedi")[0];
    assert!(mean > det.ratio, "{mean}");
}

#[test]
fn identical_config_gives_identical_csv() {
    for experiment in Experiment::ALL {
        let cfg = ExperimentConfig {
            experiment,
            k_range: vec![1, 2],
            n: 14,
            trials: 5,
            seed: 11,
            ..ExperimentConfig::default()
        };
        let a = csv_string(&run_experiment(&cfg).unwrap()).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| csv_string(&run_experiment(&cfg).unwrap()).unwrap());
        assert_eq!(a, b, "{experiment}");
    }
}

#[test]
fn single_trial_deterministic_runs_repeat() {
    let cfg = ExperimentConfig {
        trials: 1,
        ..micro_config()
    };
    let a = csv_string(&run_experiment(&cfg).unwrap()).unwrap();
    let b = csv_string(&run_experiment(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    assert!(!a.contains("se_"));
}

#[test]
fn attached_reports_take_the_best_candidate() {
    for experiment in [
        Experiment::CoverageRatio,
        Experiment::Diversity,
        Experiment::BoundSuite,
    ] {
        let cfg = ExperimentConfig {
            experiment,
            k_range: vec![2, 3],
            n: 14,
            trials: 1,
            ..ExperimentConfig::default()
        };
        let rows = run_experiment_detailed(&cfg).unwrap();
        let mut seen = 0;
        for d in rows {
            let Some(rep) = d.report else { continue };
            seen += 1;
            assert_eq!(
                rep.final_value,
                rep.best_round1_value().max(rep.round2_value),
                "{:?}",
                d.row
            );
            assert_eq!(rep.final_value, d.row.value);
        }
        assert!(seen > 0, "{experiment}");
    }
}

#[test]
fn exact_reference_refuses_large_instances() {
    let cfg = ExperimentConfig {
        n: 40,
        k_range: vec![2],
        reference: ReferenceMode::Opt,
        ..ExperimentConfig::default()
    };
    assert!(matches!(
        run_experiment(&cfg),
        Err(CliError::TooLarge { n: 40, .. })
    ));

    let auto = ExperimentConfig {
        reference: ReferenceMode::Auto,
        trials: 3,
        ..cfg
    };
    let rows = run_experiment(&auto).unwrap();
    assert!(rows.iter().all(|r| r.stat.ends_with("_greedy")));
    let greedy = rows.iter().find(|r| r.algorithm == "greedy").unwrap();
    assert_eq!(greedy.ratio, 1.0);
}
