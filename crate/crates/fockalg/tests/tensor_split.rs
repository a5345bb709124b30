use fockalg::fock_core::{build_basis, Statistics};
use fockalg::operators::{
    creation, field, gamma, number_operator, parity, tensor_split, TensorSplit,
};
use fockalg::{max_abs, C64, CMatrix, CVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_matrix(rng: &mut ChaCha20Rng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Assemble the block-diagonal operator acting as `b` on the `modes_k`
/// coordinates and `c` on the `modes_kc` coordinates.
fn direct_sum(d: usize, split: &TensorSplit, b: &CMatrix, c: &CMatrix) -> CMatrix {
    let mut full = CMatrix::zeros(d, d);
    for (i, &mi) in split.modes_k.iter().enumerate() {
        for (j, &mj) in split.modes_k.iter().enumerate() {
            full[(mi, mj)] = b[(i, j)];
        }
    }
    for (i, &mi) in split.modes_kc.iter().enumerate() {
        for (j, &mj) in split.modes_kc.iter().enumerate() {
            full[(mi, mj)] = c[(i, j)];
        }
    }
    full
}

#[test]
fn particle_number_is_additive_across_the_split() {
    for (stat, d, n_max, modes) in [
        (Statistics::Boson, 3, 3, vec![0usize, 2]),
        (Statistics::Fermion, 4, 4, vec![1, 3]),
    ] {
        let basis = build_basis(d, n_max, stat).unwrap();
        let split = tensor_split(&basis, &modes).unwrap();
        let p = split.image_projector();
        let n_full = split.conjugate(&number_operator(&basis).matrix);
        let nk = number_operator(&split.basis_k).matrix;
        let nkc = number_operator(&split.basis_kc).matrix;
        let dim_k = split.basis_k.dim();
        let dim_kc = split.basis_kc.dim();
        let additive = nk.kronecker(&CMatrix::identity(dim_kc, dim_kc))
            + CMatrix::identity(dim_k, dim_k).kronecker(&nkc);
        let defect = max_abs(&(&n_full - &p * &additive * &p));
        assert!(defect <= 1e-12, "number additivity defect {defect}");
    }
}

#[test]
fn block_diagonal_lifts_factor_through_the_split() {
    let mut rng = ChaCha20Rng::seed_from_u64(201);
    for (stat, d, n_max, modes) in [
        (Statistics::Boson, 3, 3, vec![0usize, 1]),
        (Statistics::Boson, 4, 2, vec![1, 3]),
        (Statistics::Fermion, 4, 4, vec![0, 2]),
    ] {
        let basis = build_basis(d, n_max, stat).unwrap();
        let split = tensor_split(&basis, &modes).unwrap();
        let b = random_matrix(&mut rng, split.modes_k.len());
        let c = random_matrix(&mut rng, split.modes_kc.len());
        let full = direct_sum(d, &split, &b, &c);
        let lhs = split.conjugate(&gamma(&basis, &full).unwrap().matrix);
        let gk = gamma(&split.basis_k, &b).unwrap().matrix;
        let gkc = gamma(&split.basis_kc, &c).unwrap().matrix;
        let p = split.image_projector();
        let rhs = &p * gk.kronecker(&gkc) * &p;
        let defect = max_abs(&(&lhs - &rhs));
        assert!(defect <= 1e-12, "lift factorization defect {defect}");
    }
}

#[test]
fn bosonic_fields_supported_on_one_side_act_on_that_factor() {
    let mut rng = ChaCha20Rng::seed_from_u64(202);
    let basis = build_basis(3, 3, Statistics::Boson).unwrap();
    let modes = vec![0usize, 2];
    let split = tensor_split(&basis, &modes).unwrap();
    let mut u = CVector::zeros(3);
    u[0] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    u[2] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let lhs = split.conjugate(&field(&basis, &u).unwrap().matrix);
    let uk = TensorSplit::restrict_vector(&u, &split.modes_k);
    let fk = field(&split.basis_k, &uk).unwrap().matrix;
    let dim_kc = split.basis_kc.dim();
    let p = split.image_projector();
    let rhs = &p * fk.kronecker(&CMatrix::identity(dim_kc, dim_kc)) * &p;
    let defect = max_abs(&(&lhs - &rhs));
    assert!(defect <= 1e-12, "one-sided field defect {defect}");
}

#[test]
fn fermionic_creators_across_the_split_carry_the_parity_twist() {
    let mut rng = ChaCha20Rng::seed_from_u64(203);
    // Interleaved split: modes {1} vs {0, 2}; a creator supported on the
    // complement picks up the parity of the first factor.
    let basis = build_basis(3, 3, Statistics::Fermion).unwrap();
    let modes = vec![1usize];
    let split = tensor_split(&basis, &modes).unwrap();
    let mut u = CVector::zeros(3);
    u[0] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    u[2] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let lhs = split.conjugate(&creation(&basis, &u).unwrap().matrix);
    let ukc = TensorSplit::restrict_vector(&u, &split.modes_kc);
    let ckc = creation(&split.basis_kc, &ukc).unwrap().matrix;
    let par_k = parity(&split.basis_k).matrix;
    let p = split.image_projector();
    let rhs = &p * par_k.kronecker(&ckc) * &p;
    let defect = max_abs(&(&lhs - &rhs));
    assert!(defect <= 1e-12, "parity twist defect {defect}");

    // Without the twist the sign is wrong on odd states of the first
    // factor, so the plain tensor form must fail.
    let wrong = &p
        * CMatrix::identity(split.basis_k.dim(), split.basis_k.dim()).kronecker(&ckc)
        * &p;
    assert!(max_abs(&(&lhs - &wrong)) > 0.1);
}
