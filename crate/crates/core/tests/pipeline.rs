use robin_rd::grid::{compute_a1, Grid1D};
use robin_rd::io::{read_pair_csv, write_pair_csv};
use robin_rd::monotone::{iterate_down, iterate_up, residual, IterationOptions};
use robin_rd::nonlinearity::example_family;
use robin_rd::shooting::{default_box_max, enumerate_solutions, ShootingOptions};
use robin_rd::subsuper::{eigen_subsolution, supersolution, verify_pair, PairKind, SuperCase};
use robin_rd::{Error, OrderInterval, ReactionQuad};

#[test]
fn bracket_iterate_and_match_the_shooting_oracle() {
    let grid = Grid1D::new(256).unwrap();
    let quad = example_family(1.0, 10.0).unwrap();
    let (lambda, mu) = (1.6, 1.2);

    let sub = eigen_subsolution(grid, lambda, mu, &quad).unwrap();
    let (_, sup) =
        supersolution(grid, lambda, mu, &quad, SuperCase::Auto, Some(&sub.pair)).unwrap();
    assert!(sub.report.pass && sup.report.pass);
    let interval = OrderInterval::new(sub.pair.clone(), sup.pair.clone()).unwrap();
    let options = IterationOptions::default();
    let min = iterate_up(grid, lambda, mu, &quad, &interval, &options).unwrap();
    let max = iterate_down(grid, lambda, mu, &quad, &interval, &options).unwrap();
    assert!(min.is_positive() && min.residual_interior < 1e-6 && min.residual_boundary < 1e-6);
    assert!(min.pair.le(&max.pair, 1e-9));

    let enumeration = enumerate_solutions(
        grid,
        lambda,
        mu,
        &quad,
        default_box_max(lambda, mu, Some(sup.pair.sup_norm())),
        128,
        &ShootingOptions::default(),
    )
    .unwrap();
    assert!(enumeration.trivial.is_some());
    let (_, distance) = enumeration.closest_positive(&min.pair).unwrap();
    assert!(distance < 1e-3, "oracle distance {distance}");
    let smallest = enumeration
        .positive
        .iter()
        .map(|r| r.record.u_sup())
        .fold(f64::INFINITY, f64::min);
    assert!((smallest - min.u_sup()).abs() < 1e-3);
}

#[test]
fn solution_survives_a_csv_round_trip_and_still_verifies() {
    let grid = Grid1D::new(128).unwrap();
    let quad = example_family(1.0, 10.0).unwrap();
    let (lambda, mu) = (1.5, 1.5);
    let sub = eigen_subsolution(grid, lambda, mu, &quad).unwrap();
    let (_, sup) =
        supersolution(grid, lambda, mu, &quad, SuperCase::Auto, Some(&sub.pair)).unwrap();
    let interval = OrderInterval::new(sub.pair, sup.pair).unwrap();
    let min = iterate_up(
        grid,
        lambda,
        mu,
        &quad,
        &interval,
        &IterationOptions::default(),
    )
    .unwrap();

    let mut bytes = Vec::new();
    write_pair_csv(&min.pair, &mut bytes).unwrap();
    let back = read_pair_csv(grid, bytes.as_slice()).unwrap();
    assert_eq!(back.distance(&min.pair).unwrap(), 0.0);

    let (interior, boundary) = residual(grid, lambda, mu, &quad, &back).unwrap();
    assert_eq!(interior, min.residual_interior);
    assert_eq!(boundary, min.residual_boundary);
    let report = verify_pair(grid, lambda, mu, &quad, &back, PairKind::Sub, false).unwrap();
    assert!(report.worst_interior()[0].abs() < 1e-6);
}

#[test]
fn below_threshold_there_is_no_bracket() {
    let grid = Grid1D::new(128).unwrap();
    let quad = example_family(1.0, 10.0).unwrap();
    let a1 = compute_a1(grid, quad.g.deriv0()).unwrap();
    let (lambda, mu) = (0.4 * a1, 0.4 * a1);
    assert!(matches!(
        eigen_subsolution(grid, lambda, mu, &quad),
        Err(Error::ParameterRegime(_))
    ));
    // The family still has an upper branch here, found only by shooting.
    let enumeration = enumerate_solutions(
        grid,
        lambda,
        mu,
        &quad,
        8.0,
        128,
        &ShootingOptions::default(),
    )
    .unwrap();
    assert!(enumeration.positive.iter().all(|r| r.record.u_sup() > 0.9));
}

#[test]
fn linear_terms_below_threshold_have_only_the_trivial_root() {
    let grid = Grid1D::new(128).unwrap();
    let quad = ReactionQuad::linear();
    let a1 = compute_a1(grid, quad.g.deriv0()).unwrap();
    let (lambda, mu) = (0.4 * a1, 0.4 * a1);
    let enumeration = enumerate_solutions(
        grid,
        lambda,
        mu,
        &quad,
        8.0,
        128,
        &ShootingOptions::default(),
    )
    .unwrap();
    assert_eq!(enumeration.count_positive(), 0);
    assert!(enumeration.trivial.is_some());
}
