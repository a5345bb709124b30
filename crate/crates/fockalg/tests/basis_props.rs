use fockalg::fock_core::{
    binomial, build_basis, sector_dimension, sector_projector, SectorKind, Statistics,
};
use fockalg::{max_abs, CMatrix};
use proptest::prelude::*;

fn statistics_strategy() -> impl Strategy<Value = Statistics> {
    prop_oneof![Just(Statistics::Boson), Just(Statistics::Fermion)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_and_state_are_inverse_bijections(
        stat in statistics_strategy(),
        d in 1usize..5,
        extra in 0usize..4,
    ) {
        let n_max = match stat {
            Statistics::Boson => extra,
            Statistics::Fermion => extra.min(d),
        };
        let basis = build_basis(d, n_max, stat).unwrap();
        for i in 0..basis.dim() {
            let state = basis.index_state(i).unwrap();
            prop_assert_eq!(basis.state_index(&state.occupations).unwrap(), i);
        }
    }

    #[test]
    fn sectors_partition_the_basis_in_ascending_total_order(
        stat in statistics_strategy(),
        d in 1usize..5,
        extra in 0usize..4,
    ) {
        let n_max = match stat {
            Statistics::Boson => extra,
            Statistics::Fermion => extra.min(d),
        };
        let basis = build_basis(d, n_max, stat).unwrap();
        let mut covered = 0;
        for n in 0..=n_max {
            let range = basis.sector_range(n).unwrap();
            prop_assert_eq!(range.start, covered);
            prop_assert_eq!(range.len(), sector_dimension(d, n, stat));
            for i in range.clone() {
                prop_assert_eq!(basis.states[i].total as usize, n);
            }
            covered = range.end;
        }
        prop_assert_eq!(covered, basis.dim());
        // Within each sector the occupation tuples descend lexicographically.
        for n in 0..=n_max {
            let range = basis.sector_range(n).unwrap();
            for w in basis.states[range].windows(2) {
                prop_assert!(w[0].occupations > w[1].occupations);
            }
        }
    }

    #[test]
    fn sector_projectors_are_an_orthogonal_resolution_of_the_identity(
        stat in statistics_strategy(),
        d in 1usize..4,
        extra in 0usize..4,
    ) {
        let n_max = match stat {
            Statistics::Boson => extra,
            Statistics::Fermion => extra.min(d),
        };
        let basis = build_basis(d, n_max, stat).unwrap();
        let dim = basis.dim();
        let mut sum = CMatrix::zeros(dim, dim);
        for n in 0..=n_max {
            let p = sector_projector(&basis, SectorKind::Single(n)).unwrap().matrix;
            prop_assert!(max_abs(&(&p * &p - &p)) == 0.0);
            for m in 0..n {
                let q = sector_projector(&basis, SectorKind::Single(m)).unwrap().matrix;
                prop_assert!(max_abs(&(&p * &q)) == 0.0);
            }
            sum += &p;
        }
        prop_assert!(max_abs(&(&sum - CMatrix::identity(dim, dim))) == 0.0);
        let cumulative = sector_projector(&basis, SectorKind::Cumulative(n_max))
            .unwrap()
            .matrix;
        prop_assert!(max_abs(&(&cumulative - CMatrix::identity(dim, dim))) == 0.0);
    }

    #[test]
    fn dimensions_follow_the_counting_laws(
        d in 1usize..6,
        n in 0usize..5,
    ) {
        prop_assert_eq!(
            sector_dimension(d, n, Statistics::Boson),
            binomial(n + d - 1, d - 1)
        );
        prop_assert_eq!(sector_dimension(d, n, Statistics::Fermion), binomial(d, n));
        let boson = build_basis(d, n, Statistics::Boson).unwrap();
        prop_assert_eq!(boson.dim(), binomial(n + d, d));
        let vacuum = boson.vacuum_vector();
        prop_assert_eq!(vacuum.len(), boson.dim());
        prop_assert_eq!(vacuum[0].re, 1.0);
    }
}
