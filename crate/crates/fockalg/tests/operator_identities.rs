use fockalg::fock_core::{build_basis, sector_projector, FockBasis, SectorKind, Statistics};
use fockalg::operators::{
    dgamma, field, gamma, momentum, monomial_vector, number_function, vee_product, wedge_product,
};
use fockalg::spectral::exp_hermitian;
use fockalg::{max_abs, op_norm, C64, CMatrix, CVector};
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_vector(rng: &mut ChaCha20Rng, d: usize) -> CVector {
    CVector::from_fn(d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn random_matrix(rng: &mut ChaCha20Rng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn random_hermitian(rng: &mut ChaCha20Rng, d: usize) -> CMatrix {
    let m = random_matrix(rng, d);
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn permutation_parity(perm: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Permanent (sign = false) or determinant (sign = true) of the Gram matrix
/// `[<u_i|v_j>]` by direct permutation sum.
fn gram_sum(us: &[CVector], vs: &[CVector], sign: bool) -> C64 {
    let n = us.len();
    let mut total = C64::new(0.0, 0.0);
    for perm in (0..n).permutations(n) {
        let mut term = C64::new(if sign { permutation_parity(&perm) } else { 1.0 }, 0.0);
        for (i, &j) in perm.iter().enumerate() {
            term *= us[i].dotc(&vs[j]);
        }
        total += term;
    }
    total
}

fn tensor_vector(vectors: &[&CVector], d: usize) -> CVector {
    let n = vectors.len();
    let dim = d.pow(n as u32);
    CVector::from_fn(dim, |t, _| {
        let mut idx = t;
        let mut digits = vec![0usize; n];
        for slot in (0..n).rev() {
            digits[slot] = idx % d;
            idx /= d;
        }
        digits
            .iter()
            .enumerate()
            .map(|(slot, &mode)| vectors[slot][mode])
            .product()
    })
}

/// `sum_sigma sign(sigma) u_{sigma(1)} (x) ... (x) u_{sigma(n)}`, the raw
/// (anti)symmetrization in the plain tensor power.
fn symmetrized_tensor(vectors: &[CVector], d: usize, fermion: bool) -> CVector {
    let n = vectors.len();
    let mut acc = CVector::zeros(d.pow(n as u32));
    for perm in (0..n).permutations(n) {
        let ordered: Vec<&CVector> = perm.iter().map(|&i| &vectors[i]).collect();
        let sign = if fermion {
            permutation_parity(&perm)
        } else {
            1.0
        };
        acc += tensor_vector(&ordered, d) * C64::new(sign, 0.0);
    }
    acc
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn cumulative(basis: &FockBasis, n: usize) -> CMatrix {
    sector_projector(basis, SectorKind::Cumulative(n))
        .unwrap()
        .matrix
}

#[test]
fn monomial_inner_products_equal_gram_permanents_and_determinants() {
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    for n in 2..=5usize {
        // Bosons: permanent, three independent routes.
        let d = 3;
        let basis = build_basis(d, n, Statistics::Boson).unwrap();
        let us: Vec<CVector> = (0..n).map(|_| random_vector(&mut rng, d)).collect();
        let vs: Vec<CVector> = (0..n).map(|_| random_vector(&mut rng, d)).collect();
        let factors_u: Vec<&CVector> = us.iter().collect();
        let factors_v: Vec<&CVector> = vs.iter().collect();
        let mu = monomial_vector(&basis, &factors_u).unwrap();
        let mv = monomial_vector(&basis, &factors_v).unwrap();
        let library = mu.dotc(&mv);
        let permanent = gram_sum(&us, &vs, false);
        let su = symmetrized_tensor(&us, d, false);
        let sv = symmetrized_tensor(&vs, d, false);
        let brute = su.dotc(&sv) / C64::new(factorial(n), 0.0);
        let scale = permanent.norm().max(1.0);
        assert!(
            (library - permanent).norm() <= 1e-9 * scale,
            "boson n={n}: library {library} vs permanent {permanent}"
        );
        assert!(
            (brute - permanent).norm() <= 1e-9 * scale,
            "boson n={n}: brute {brute} vs permanent {permanent}"
        );

        // Fermions: determinant.
        let d = 5;
        let basis = build_basis(d, n, Statistics::Fermion).unwrap();
        let us: Vec<CVector> = (0..n).map(|_| random_vector(&mut rng, d)).collect();
        let vs: Vec<CVector> = (0..n).map(|_| random_vector(&mut rng, d)).collect();
        let factors_u: Vec<&CVector> = us.iter().collect();
        let factors_v: Vec<&CVector> = vs.iter().collect();
        let mu = monomial_vector(&basis, &factors_u).unwrap();
        let mv = monomial_vector(&basis, &factors_v).unwrap();
        let library = mu.dotc(&mv);
        let determinant = gram_sum(&us, &vs, true);
        let su = symmetrized_tensor(&us, d, true);
        let sv = symmetrized_tensor(&vs, d, true);
        let brute = su.dotc(&sv) / C64::new(factorial(n), 0.0);
        let scale = determinant.norm().max(1.0);
        assert!(
            (library - determinant).norm() <= 1e-9 * scale,
            "fermion n={n}: library {library} vs determinant {determinant}"
        );
        assert!(
            (brute - determinant).norm() <= 1e-9 * scale,
            "fermion n={n}: brute {brute} vs determinant {determinant}"
        );
    }
}

#[test]
fn symmetrized_operator_products_obey_the_permutation_law() {
    let mut rng = ChaCha20Rng::seed_from_u64(102);
    let d = 2;
    for n in 2..=3usize {
        let basis = build_basis(d, n, Statistics::Boson).unwrap();
        let a: Vec<CMatrix> = (0..n).map(|_| random_matrix(&mut rng, d)).collect();
        let b: Vec<CMatrix> = (0..n).map(|_| random_matrix(&mut rng, d)).collect();
        let refs_a: Vec<&CMatrix> = a.iter().collect();
        let refs_b: Vec<&CMatrix> = b.iter().collect();
        let lhs = vee_product(&basis, &refs_a).unwrap().matrix
            * vee_product(&basis, &refs_b).unwrap().matrix
            * C64::new(factorial(n), 0.0);
        let mut rhs = CMatrix::zeros(basis.dim(), basis.dim());
        for perm in (0..n).permutations(n) {
            let mixed: Vec<CMatrix> = (0..n).map(|i| &a[i] * &b[perm[i]]).collect();
            let refs: Vec<&CMatrix> = mixed.iter().collect();
            rhs += vee_product(&basis, &refs).unwrap().matrix;
        }
        assert!(
            max_abs(&(&lhs - &rhs)) <= 1e-10 * max_abs(&rhs).max(1.0),
            "permutation product law failed at n = {n}"
        );
    }
}

#[test]
fn polarization_recovers_mixed_monomials_from_pure_powers() {
    let mut rng = ChaCha20Rng::seed_from_u64(103);
    let d = 2;
    let n = 3;
    let basis = build_basis(d, n, Statistics::Boson).unwrap();
    let xs: Vec<CVector> = (0..n).map(|_| random_vector(&mut rng, d)).collect();
    let refs: Vec<&CVector> = xs.iter().collect();
    let lhs = monomial_vector(&basis, &refs).unwrap()
        * C64::new(factorial(n) * if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    let mut rhs = CVector::zeros(basis.dim());
    for subset_bits in 0u32..(1 << n) {
        let mut w = CVector::zeros(d);
        let mut size = 0;
        for (i, x) in xs.iter().enumerate() {
            if subset_bits & (1 << i) != 0 {
                w += x;
                size += 1;
            }
        }
        let pure: Vec<&CVector> = (0..n).map(|_| &w).collect();
        let sign = if size % 2 == 0 { 1.0 } else { -1.0 };
        rhs += monomial_vector(&basis, &pure).unwrap() * C64::new(sign, 0.0);
    }
    let scale = rhs.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    assert!((&lhs - &rhs).iter().all(|z| z.norm() <= 1e-10 * scale));
}

#[test]
fn mode_oscillators_assemble_the_free_hamiltonian() {
    // For diagonal h, dGamma(h) = sum_k h_k (phi_k^2 + pi_k^2 - 1)/2 with
    // phi_k, pi_k the quadratures of mode k scaled by 1/sqrt(2); truncation
    // only disturbs the top sector, so compare below it.
    let d = 3;
    let n_max = 4;
    let basis = build_basis(d, n_max, Statistics::Boson).unwrap();
    let h_diag = [0.5, 1.25, 2.0];
    let h = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(h_diag[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let lift = dgamma(&basis, &h).unwrap().matrix;
    let dim = basis.dim();
    let mut assembled = CMatrix::zeros(dim, dim);
    for k in 0..d {
        let mut e = CVector::zeros(d);
        e[k] = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
        let phi = field(&basis, &e).unwrap().matrix;
        let pi = momentum(&basis, &e).unwrap().matrix;
        let quad = (&phi * &phi + &pi * &pi - CMatrix::identity(dim, dim))
            * C64::new(0.5 * h_diag[k], 0.0);
        assembled += quad;
    }
    let below = cumulative(&basis, n_max - 1);
    let defect = max_abs(&((&lift - &assembled) * &below));
    assert!(defect <= 1e-12, "oscillator assembly defect {defect}");
}

#[test]
fn fermionic_field_words_span_the_full_matrix_algebra() {
    // The 2d generators phi(e_k), phi(i e_k) multiply into 2^(2d) linearly
    // independent words, exactly the dimension of the matrix algebra.
    let d = 3;
    let basis = build_basis(d, d, Statistics::Fermion).unwrap();
    let dim = basis.dim();
    let mut generators = Vec::with_capacity(2 * d);
    for k in 0..d {
        let mut e = CVector::zeros(d);
        e[k] = C64::new(1.0, 0.0);
        generators.push(field(&basis, &e).unwrap().matrix);
        let mut ie = CVector::zeros(d);
        ie[k] = C64::new(0.0, 1.0);
        generators.push(field(&basis, &ie).unwrap().matrix);
    }
    let words = 1usize << (2 * d);
    assert_eq!(words, dim * dim);
    let mut stacked = CMatrix::zeros(words, dim * dim);
    for bits in 0..words {
        let mut word = CMatrix::identity(dim, dim);
        for (g, generator) in generators.iter().enumerate() {
            if bits & (1 << g) != 0 {
                word = word * generator;
            }
        }
        for (flat, value) in word.iter().enumerate() {
            stacked[(bits, flat)] = *value;
        }
    }
    assert_eq!(stacked.rank(1e-8), dim * dim);
}

#[test]
fn field_powers_obey_the_factorial_growth_bound() {
    let mut rng = ChaCha20Rng::seed_from_u64(104);
    let d = 2;
    let n_max = 8;
    let basis = build_basis(d, n_max, Statistics::Boson).unwrap();
    let u = random_vector(&mut rng, d) * C64::new(0.35, 0.0);
    let norm_u = u.norm();
    let phi = field(&basis, &u).unwrap().matrix;
    for n in 0..=3usize {
        let below = cumulative(&basis, n);
        let mut power = below.clone();
        for p in 1..=4usize {
            power = &phi * power;
            // Up to p + n <= n_max the truncated power agrees with the
            // exact one, so the bound transfers verbatim.
            let bound = factorial(p).sqrt() * (2.0 * (n as f64 + 1.0).sqrt() * norm_u).powi(p as i32);
            assert!(
                op_norm(&power) <= bound + 1e-12,
                "field power bound violated at p={p}, n={n}"
            );
        }
    }
}

#[test]
fn multiplicative_lift_is_a_functor() {
    let mut rng = ChaCha20Rng::seed_from_u64(105);
    let d = 3;
    let n_max = 5;
    let basis = build_basis(d, n_max, Statistics::Boson).unwrap();
    let a = random_matrix(&mut rng, d);
    let b = random_matrix(&mut rng, d);
    let ga = gamma(&basis, &a).unwrap().matrix;
    let gb = gamma(&basis, &b).unwrap().matrix;
    let gab = gamma(&basis, &(&a * &b)).unwrap().matrix;
    let scale = max_abs(&gab).max(1.0);
    assert!(max_abs(&(&ga * &gb - &gab)) <= 1e-10 * scale);

    // Unitary one-parameter groups: Gamma(exp(itA)) = exp(it dGamma(A)).
    let h = random_hermitian(&mut rng, d);
    let t = 0.7;
    let one_particle_flow = exp_hermitian(&h, C64::new(0.0, t)).unwrap();
    let lifted_flow = exp_hermitian(&dgamma(&basis, &h).unwrap().matrix, C64::new(0.0, t)).unwrap();
    let via_functor = gamma(&basis, &one_particle_flow).unwrap().matrix;
    assert!(max_abs(&(&via_functor - &lifted_flow)) <= 1e-10);

    // Scalars lift to powers of the number operator.
    let z = C64::new(0.4, 0.3);
    let samples: Vec<C64> = (0..=n_max as u32).map(|n| z.powu(n)).collect();
    let z_to_the_n = number_function(&basis, &samples).unwrap().matrix;
    let gz = gamma(&basis, &(CMatrix::identity(d, d) * z)).unwrap().matrix;
    assert!(max_abs(&(&gz - &z_to_the_n)) <= 1e-12);
}

#[test]
fn lift_sector_blocks_match_symmetrized_powers() {
    let mut rng = ChaCha20Rng::seed_from_u64(106);
    let d = 3;
    let basis = build_basis(d, 3, Statistics::Boson).unwrap();
    let a = random_matrix(&mut rng, d);
    let ga = gamma(&basis, &a).unwrap().matrix;
    for n in 1..=3usize {
        let factors: Vec<&CMatrix> = (0..n).map(|_| &a).collect();
        let vee = vee_product(&basis, &factors).unwrap().matrix;
        let range = basis.sector_range(n).unwrap();
        let single = sector_projector(&basis, SectorKind::Single(n)).unwrap().matrix;
        let block = &single * &ga * &single;
        assert!(
            max_abs(&(&block - &vee)) <= 1e-10 * max_abs(&vee).max(1.0),
            "sector {n} block mismatch over {} states",
            range.len()
        );
    }

    let fbasis = build_basis(4, 2, Statistics::Fermion).unwrap();
    let b = random_matrix(&mut rng, 4);
    let gb = gamma(&fbasis, &b).unwrap().matrix;
    let factors: Vec<&CMatrix> = vec![&b, &b];
    let wedge = wedge_product(&fbasis, &factors).unwrap().matrix;
    let single = sector_projector(&fbasis, SectorKind::Single(2)).unwrap().matrix;
    assert!(max_abs(&(&single * &gb * &single - &wedge)) <= 1e-10);
}
