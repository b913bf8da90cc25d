use pension_core::dp::utility;
use pension_core::{DpConfig, DpProblem, PolicyModel};

/// Two decision times, two scenarios, allocations {0, 1}.
///
/// Both scenarios start at the same ratio, so the first decision is shared.
/// The second decision may differ per scenario whenever the two ratios at
/// step 1 differ, which the growth factors below guarantee.
struct Toy {
    z0: f64,
    equity: [[f64; 2]; 2],
    matching: [[f64; 2]; 2],
}

impl Toy {
    fn problem(&self) -> DpProblem {
        DpProblem::new(
            0,
            vec![self.z0; 2],
            self.equity.iter().map(|s| s.to_vec()).collect(),
            self.matching.iter().map(|s| s.to_vec()).collect(),
        )
        .unwrap()
    }

    fn growth(&self, step: usize, p: usize, a: f64) -> f64 {
        a * self.equity[step][p] + (1.0 - a) * self.matching[step][p]
    }

    /// Best `(a0, [a1_p0, a1_p1], mean utility)` over all eight policies.
    fn enumerate(&self, grid: &[f64]) -> (usize, [usize; 2], f64) {
        let mut best = (0, [0, 0], f64::NEG_INFINITY);
        for a0 in 0..grid.len() {
            let z1 = [0, 1].map(|p| self.z0 * self.growth(0, p, grid[a0]));
            assert_ne!(z1[0], z1[1], "instance must separate the scenarios at step 1");
            for a1_0 in 0..grid.len() {
                for a1_1 in 0..grid.len() {
                    let a1 = [a1_0, a1_1];
                    let mean = (0..2)
                        .map(|p| utility(z1[p] * self.growth(1, p, grid[a1[p]]), 1.0, 3.0).unwrap())
                        .sum::<f64>()
                        / 2.0;
                    if mean > best.2 {
                        best = (a0, a1, mean);
                    }
                }
            }
        }
        best
    }
}

fn toy_config() -> DpConfig {
    DpConfig {
        grid: vec![0.0, 1.0],
        span: 1.0,
        iterations: 2,
        ..DpConfig::default()
    }
}

fn assert_matches_enumeration(toy: &Toy, expected: (usize, [usize; 2])) {
    let cfg = toy_config();
    let (a0, a1, value) = toy.enumerate(&cfg.grid);
    assert_eq!((a0, a1), expected, "instance no longer exercises the intended branch");
    let model = PolicyModel::solve(&toy.problem(), &cfg).unwrap();
    assert_eq!(model.decisions(0), &[a0, a0]);
    assert_eq!(model.decisions(1), &a1);
    let last = *model.trace().last().unwrap();
    assert!((last - value).abs() < 1e-12, "dp {last} vs enumeration {value}");
}

#[test]
fn equity_first_then_split() {
    // equity is the better first move on average; at step 1 scenario 0
    // overshoots with equity while scenario 1 still needs it
    assert_matches_enumeration(
        &Toy {
            z0: 1.5,
            equity: [[1.8, 1.2], [1.6, 1.4]],
            matching: [[1.0, 0.98], [1.0, 0.99]],
        },
        (1, [0, 1]),
    );
}

#[test]
fn matching_first_then_equity() {
    // starting near the peak, a first equity step overshoots in both
    // scenarios; the second step needs equity everywhere
    assert_matches_enumeration(
        &Toy {
            z0: 2.6,
            equity: [[1.5, 1.6], [1.1, 1.05]],
            matching: [[1.0, 1.01], [1.0, 1.01]],
        },
        (0, [1, 1]),
    );
}

#[test]
fn losing_equity_is_avoided() {
    assert_matches_enumeration(
        &Toy {
            z0: 2.0,
            equity: [[0.7, 0.8], [0.6, 0.9]],
            matching: [[1.05, 1.04], [1.02, 1.03]],
        },
        (0, [0, 0]),
    );
}

#[test]
fn ratios_far_above_the_peak_take_the_lowest_risk() {
    // a riskless world where equity adds 10% a year to the ratio; starting
    // ratios straddle the utility peak at 3
    let n = 60;
    let steps = 5;
    let z0: Vec<f64> = (0..n).map(|i| 0.5 + 5.5 * i as f64 / (n - 1) as f64).collect();
    let pr = DpProblem::new(0, z0, vec![vec![1.1; n]; steps], vec![vec![1.0; n]; steps]).unwrap();
    let model = PolicyModel::solve(&pr, &DpConfig::default()).unwrap();
    for t in 0..steps {
        assert_eq!(model.decide(t, 100.0).unwrap(), 0.0, "t={t}");
        assert_eq!(model.decide(t, 0.1).unwrap(), 1.0, "t={t}");
    }
}
