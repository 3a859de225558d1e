use ductsr::expr::{parse, Expr};
use ductsr::sr::{pareto_update, ParetoEntry, ParetoFrontier};
use proptest::prelude::*;

// small pool so that ties on complexity, loss and text all occur
fn pool() -> Vec<Expr> {
    [
        "X",
        "Y",
        "Z",
        "Re",
        "1",
        "X**2",
        "Y**3",
        "X+Y",
        "Y+X",
        "X*Y",
        "Re*2",
        "Re-X",
        "X+Y+Z",
        "Re*(1-Y**2)",
        "X*Y*Z",
        "(X+1)**2",
        "Re*X-Y",
        "X/Y+Z",
        "Re*(2-X)*Y",
        "X+Y+Z+Re",
    ]
    .iter()
    .map(|s| parse(s).unwrap())
    .collect()
}

// independent oracle: keep the non-dominated candidates, then among exact
// (complexity, loss) ties keep the smallest printed string
fn brute_force(cands: &[(usize, usize, f64, String)]) -> Vec<(usize, f64, String)> {
    let finite: Vec<_> = cands.iter().filter(|c| c.2.is_finite()).collect();
    let mut keep: Vec<(usize, f64, String)> = Vec::new();
    for a in &finite {
        let dominated = finite
            .iter()
            .any(|b| b.1 <= a.1 && b.2 <= a.2 && (b.1 < a.1 || b.2 < a.2));
        if !dominated {
            keep.push((a.1, a.2, a.3.clone()));
        }
    }
    keep.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.cmp(&b.2)));
    keep.dedup_by(|later, earlier| later.0 == earlier.0 && later.1 == earlier.1);
    keep
}

fn stream(max_len: usize) -> impl Strategy<Value = Vec<(usize, f64)>> {
    let n = pool().len();
    let loss = prop_oneof![
        8 => (0u32..20).prop_map(|k| k as f64),
        2 => 0.0..20.0f64,
        1 => Just(f64::INFINITY),
    ];
    prop::collection::vec((0..n, loss), 1..max_len)
}

fn run(stream: &[(usize, f64)]) -> (ParetoFrontier, Vec<(usize, usize, f64, String)>) {
    let pool = pool();
    let mut f = ParetoFrontier::new();
    let mut seen = Vec::new();
    for (k, &(i, loss)) in stream.iter().enumerate() {
        let e = pool[i].clone();
        seen.push((k, e.complexity(), loss, e.to_string()));
        pareto_update(&mut f, ParetoEntry::new(e, loss));
        assert!(f.is_well_formed());
    }
    (f, seen)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_brute_force_filter(s in stream(200)) {
        let (f, seen) = run(&s);
        let got: Vec<(usize, f64, String)> =
            f.entries().iter().map(|e| (e.complexity, e.loss, e.expression.to_string())).collect();
        prop_assert_eq!(got, brute_force(&seen));
    }

    #[test]
    fn ids_follow_complexity_order(s in stream(100)) {
        let (f, _) = run(&s);
        for (i, e) in f.entries().iter().enumerate() {
            prop_assert_eq!(e.id, i);
        }
    }
}

#[test]
fn ten_thousand_candidate_streams() {
    use proptest::test_runner::{Config, TestRunner};
    let mut runner = TestRunner::new(Config {
        cases: 8,
        ..Config::default()
    });
    runner
        .run(&prop::collection::vec((0..pool().len(), 0u32..500), 10_000), |raw| {
            let s: Vec<(usize, f64)> = raw.into_iter().map(|(i, l)| (i, l as f64 / 7.0)).collect();
            let (f, seen) = run(&s);
            let got: Vec<_> = f
                .entries()
                .iter()
                .map(|e| (e.complexity, e.loss, e.expression.to_string()))
                .collect();
            prop_assert_eq!(got, brute_force(&seen));
            Ok(())
        })
        .unwrap();
}

#[test]
fn json_reparses_to_same_trees() {
    let f: ParetoFrontier = ["X", "Re*(2.18-8.46*Y**2)", "Re*(2.18-8.46*Y**2)*(1-3.89*Z**2)"]
        .iter()
        .zip([100.0, 50.0, 1e-3])
        .map(|(s, l)| ParetoEntry::new(parse(s).unwrap(), l))
        .collect();
    let records: Vec<ductsr::sr::FrontierRecord> = serde_json::from_str(&f.to_json()).unwrap();
    for (r, e) in records.iter().zip(f.entries()) {
        assert!(r.parse_expression().unwrap().same_structure(&e.expression));
        assert_eq!(r.loss, e.loss);
    }
}
