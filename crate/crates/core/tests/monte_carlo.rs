use priorint::known_variance::{AcceptanceFamily, Method};
use priorint::mc::{
    mc_coverage, mc_expected_length, FamilyKnown, PrattKnown, SamplingMode, Simulation,
    StandardKnown, StandardT,
};
use priorint::ProblemConfig;

#[test]
fn generator_moments() {
    let sim = Simulation::new(0.0, 1.0, 2, 10_000_000, 99).unwrap();
    let z = sim.standardized_means();
    assert!(z.mean.abs() <= 4.0 * z.std_error, "{z:?}");
    let v = sim.variance_ratios();
    assert!((v.mean - 1.0).abs() <= 4.0 * v.std_error, "{v:?}");
}

#[test]
fn independent_of_thread_count() {
    let rule = StandardT::new(0.05, 24).unwrap();
    let sim = Simulation::new(0.2, 1.5, 24, 200_000, 5).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| (sim.coverage(&rule), sim.expected_length(&rule)))
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn pivotal_rules_cover() {
    let known = StandardKnown::new(0.05).unwrap();
    let est = mc_coverage(3.0, 2.0, 10, &known, 1_000_000, 1).unwrap();
    assert!(est.agrees_with(0.95, 3.0), "{est:?}");
    assert!((est.std_error - 0.000_218).abs() < 1e-5);
    let t = StandardT::new(0.05, 24).unwrap();
    let est = mc_coverage(-1.0, 0.5, 24, &t, 1_000_000, 2).unwrap();
    assert!(est.agrees_with(0.95, 3.0), "{est:?}");
}

#[test]
fn pratt_length_at_zero() {
    let cfg = ProblemConfig::default().with_w(0.0);
    let fam = AcceptanceFamily::build(&cfg, Method::Pratt).unwrap();
    let rule = PrattKnown::new(0.05).unwrap();
    let (sigma, n) = (1.0, 9);
    let est = mc_expected_length(0.0, sigma, n, &rule, 1_000_000, 3).unwrap();
    let expect = fam.expected_length(0.0) * sigma / (n as f64).sqrt();
    assert!(est.agrees_with(expect, 3.0), "{est:?} vs {expect}");
}

#[test]
fn mixed_family_cover_and_length() {
    let cfg = ProblemConfig::default();
    let fam = AcceptanceFamily::build(&cfg, Method::Mixed).unwrap();
    let rule = FamilyKnown::new(&fam).unwrap();
    for theta in [0.0, 2.0, 4.0] {
        let sim = Simulation::at_theta(theta, 1.0, 4, 400_000, 17).unwrap();
        let cov = sim.coverage(&rule);
        assert!(cov.agrees_with(0.95, 3.0), "θ={theta}: {cov:?}");
        let len = sim.expected_length(&rule);
        let expect = fam.expected_length(theta) * 0.5;
        assert!(len.agrees_with(expect, 3.0), "θ={theta}: {len:?} vs {expect}");
    }
}

#[test]
fn raw_and_sufficient_agree() {
    let t = StandardT::new(0.05, 8).unwrap();
    let a = Simulation::new(1.0, 1.0, 8, 200_000, 4).unwrap();
    let b = a.with_mode(SamplingMode::Raw);
    let (la, lb) = (a.expected_length(&t), b.expected_length(&t));
    let se = (la.std_error.powi(2) + lb.std_error.powi(2)).sqrt();
    assert!((la.mean - lb.mean).abs() <= 4.0 * se);
}
