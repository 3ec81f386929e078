use gmfuse::data::Dataset;
use gmfuse::eval::{run_experiment_on, ExperimentConfig};

fn rings() -> Dataset {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..120 {
        let t = i as f64 * 0.61;
        let r = if i % 2 == 0 { 1.0 } else { 2.0 };
        x.push(vec![r * t.cos(), r * t.sin(), (t * 0.3).sin()]);
        y.push(i % 2);
    }
    Dataset::from_numeric("rings", x, y, vec!["inner".into(), "outer".into()]).unwrap()
}

#[test]
fn timing_grows_with_members_and_weighting() {
    let config = ExperimentConfig {
        sizes: vec![2, 20],
        combiners: ["arith", "h_med"]
            .iter()
            .map(|c| c.parse().unwrap())
            .collect(),
        repeats: 1,
        seed: 4,
        ..ExperimentConfig::default()
    };
    let table = run_experiment_on(&[rings()], &config).unwrap();
    let rows = table.timing_report();
    assert_eq!(rows.len(), 4);
    let seconds = |size: usize, c: &str| {
        rows.iter()
            .find(|r| r.size == size && r.combiner == c)
            .unwrap()
            .seconds
    };
    assert!(seconds(20, "arith") >= seconds(2, "arith"));
    assert!(seconds(20, "h_med") >= seconds(2, "h_med"));
    // Both combiners share each cell's training and scoring time.
    assert!(seconds(20, "h_med") >= seconds(20, "arith"));
}
