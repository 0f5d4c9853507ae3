use cvbell::fock::{
    bogoliubov_residual, build_generators, commutator_residuals, default_cutoff, oracle_check,
    random_displacements, FockWorkspace, OracleReport, DEFAULT_DIMENSION_CAP,
};
use cvbell::types::{Displacement, SqueezedParams};

const TOL: f64 = 1e-6;

/// Raises the cutoff from the default until doubling it moves the oracle by at most `TOL`.
fn converged(n: usize, r: f64, alphas: &[Vec<Displacement>]) -> OracleReport {
    let p = SqueezedParams::new(n, r).unwrap();
    let mut d = default_cutoff(n);
    loop {
        let rep = oracle_check(&p, d, alphas, TOL).unwrap();
        if rep.max_cutoff_shift <= TOL {
            return rep;
        }
        d += 4;
        assert!(d <= 32, "no converged cutoff for n={n} r={r}");
    }
}

#[test]
fn spec_two_mode_example() {
    let alphas = vec![vec![Displacement::real(0.2), Displacement::new(-0.1, 0.1)]];
    let rep = converged(2, 0.3, &alphas);
    assert!(rep.max_deviation <= TOL, "{rep:?}");
}

#[test]
fn random_tuples_agree() {
    for (n, r) in [(2, 0.5), (2, -0.4), (3, 0.3), (3, -0.2)] {
        let alphas = random_displacements(n, 20, 1.0, 11);
        let rep = converged(n, r, &alphas);
        assert!(rep.max_deviation <= TOL, "{rep:?}");
    }
}

#[test]
fn four_modes_small_squeezing() {
    let alphas = random_displacements(4, 5, 0.5, 3);
    let rep = oracle_check(&SqueezedParams::new(4, 0.1).unwrap(), 8, &alphas, 1e-6).unwrap();
    assert!(rep.max_deviation <= 1e-6, "{rep:?}");
    assert!(rep.max_cutoff_shift <= 1e-6, "{rep:?}");
}

#[test]
fn strong_squeezing_small_cutoff_leaks() {
    let alphas = random_displacements(2, 2, 1.0, 0);
    assert!(oracle_check(&SqueezedParams::new(2, 2.5).unwrap(), 8, &alphas, 1e-6).is_err());
}

#[test]
fn algebra_at_default_cutoffs() {
    for n in [2, 3] {
        let ws = FockWorkspace::with_cap(n, default_cutoff(n), DEFAULT_DIMENSION_CAP).unwrap();
        let comm = commutator_residuals(&build_generators(&ws), &ws).unwrap();
        assert!(comm.max() <= 1e-5, "n={n}: {comm:?}");
    }
    let ws = FockWorkspace::with_cap(2, 24, DEFAULT_DIMENSION_CAP).unwrap();
    for r in [0.3, -0.3] {
        let res = bogoliubov_residual(&SqueezedParams::new(2, r).unwrap(), &ws).unwrap();
        assert!(res <= 1e-6, "r={r}: {res}");
    }
}
