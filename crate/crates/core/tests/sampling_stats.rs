use genperm_core::fixtures::{example_4_1_target, random_mixture};
use genperm_core::patterns::{density_in_permuton_mc, pattern_distribution_exact};
use genperm_core::sampling::{concentration_experiment_with_budget, random_pattern, sample_points};
use genperm_core::{rng, Permutation, Scalar};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_p_value(k: usize, mu: &genperm_core::StepPermuton<genperm_core::Exact>, draws: u64, seed: u64) -> f64 {
    let patterns = Permutation::all(k);
    let expected = pattern_distribution_exact(mu, k).unwrap();
    let mut counts = vec![0u64; patterns.len()];
    for i in 0..draws {
        let sigma = random_pattern(mu, k, rng::trial_seed(seed, i)).unwrap();
        counts[patterns.iter().position(|t| *t == sigma).unwrap()] += 1;
    }
    let mut stat = 0.0;
    let mut cells = 0;
    for (count, e) in counts.iter().zip(&expected) {
        let e = e.value.to_f64() * draws as f64;
        if e == 0.0 {
            assert_eq!(*count, 0);
            continue;
        }
        stat += (*count as f64 - e).powi(2) / e;
        cells += 1;
    }
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn pattern_frequencies_follow_exact_densities() {
    let mu = example_4_1_target();
    for k in 2..=3 {
        assert!(chi_square_p_value(k, &mu, 20_000, 31) > 1e-4);
    }
}

#[test]
fn points_fall_where_the_mass_is() {
    let mu = random_mixture(6, 3, 2, &mut rng::stream(32, 0)).to_f64();
    let batch = sample_points(&mu, 5000, 33).unwrap();
    for (x, y) in batch.points {
        let i = mu.x_cuts().iter().rposition(|c| *c <= x).unwrap();
        let j = mu.y_cuts().iter().rposition(|c| *c <= y).unwrap();
        assert!(*mu.mass(i, j) > 0.0, "point ({x}, {y}) in an empty cell");
    }
}

#[test]
fn seeded_runs_are_reproducible() {
    let mu = example_4_1_target();
    assert_eq!(random_pattern(&mu, 40, 5).unwrap(), random_pattern(&mu, 40, 5).unwrap());
    let tau = Permutation::new(vec![2, 1, 3]).unwrap();
    let a = density_in_permuton_mc(&tau, &mu, 40_000, 9).unwrap();
    let b = density_in_permuton_mc(&tau, &mu, 40_000, 9).unwrap();
    assert_eq!(a, b);
    let exact = pattern_distribution_exact(&mu, 3).unwrap();
    let reference = exact.iter().find(|d| d.tau == tau).unwrap().value.to_f64();
    assert!((a.value - reference).abs() < 5.0 * a.std_error + 1e-9);
}

#[test]
fn concentration_median_shrinks() {
    let mu = random_mixture(4, 4, 3, &mut rng::stream(34, 0));
    let medians: Vec<f64> = [16, 64, 256, 1024]
        .iter()
        .map(|&k| concentration_experiment_with_budget(&mu, k, 40, 35, 0).unwrap().median_d_inf)
        .collect();
    assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
}
