//! Builders for cutoff field Hamiltonians `H = dGamma(h) + V`, the coupled
//! field-plus-small-system Hamiltonians `dGamma(h) ⊗ 1 + 1 ⊗ L + phi(v)`,
//! and the product-formula and resolvent-series checks that accompany them.
//!
//! Interactions follow the uniform truncation semantics: a polynomial in
//! the fields is evaluated as the product of the truncated factor matrices,
//! so descending the cutoff commutes with building the interaction.

use crate::error::{FockError, Result};
use crate::fock_core::{build_basis, FockBasis, Statistics};
use crate::operators::{
    creation, dgamma, field, weyl, FockOperator, OneParticleOperator,
    OneParticleVector, SectorShift,
};
use crate::spectral::{eigh, exp_hermitian};
use crate::{hermiticity_defect, max_abs, op_norm, C64, CMatrix};

/// Interaction term of a cutoff field Hamiltonian.
#[derive(Debug, Clone)]
pub enum InteractionSpec {
    /// `sum_j c_j * phi(u_{j,1}) ... phi(u_{j,k_j})`; an empty factor list
    /// is a constant term.
    PolynomialField {
        terms: Vec<(C64, Vec<OneParticleVector>)>,
    },
    /// `sum_j c_j * W(u_j)`: the atomic-measure surrogate of a smeared
    /// Weyl-operator integral. Bosonic only.
    WeylSum {
        atoms: Vec<(C64, OneParticleVector)>,
    },
}

impl InteractionSpec {
    /// The zero interaction.
    pub fn none() -> InteractionSpec {
        InteractionSpec::PolynomialField { terms: Vec::new() }
    }

    /// Check that every one-particle vector has length `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        let check = |u: &OneParticleVector| {
            if u.len() != d {
                Err(FockError::WrongLength {
                    expected: d,
                    got: u.len(),
                })
            } else {
                Ok(())
            }
        };
        match self {
            InteractionSpec::PolynomialField { terms } => {
                for (_, factors) in terms {
                    for u in factors {
                        check(u)?;
                    }
                }
            }
            InteractionSpec::WeylSum { atoms } => {
                for (_, u) in atoms {
                    check(u)?;
                }
            }
        }
        Ok(())
    }

    /// Whether no vector in the interaction excites the given mode.
    pub fn avoids_mode(&self, mode: usize) -> bool {
        let clean = |u: &OneParticleVector| mode < u.len() && u[mode] == C64::new(0.0, 0.0);
        match self {
            InteractionSpec::PolynomialField { terms } => terms
                .iter()
                .all(|(_, factors)| factors.iter().all(clean)),
            InteractionSpec::WeylSum { atoms } => atoms.iter().all(|(_, u)| clean(u)),
        }
    }

    /// Largest number of field factors in any term (0 for WeylSum).
    pub fn max_degree(&self) -> usize {
        match self {
            InteractionSpec::PolynomialField { terms } => {
                terms.iter().map(|(_, f)| f.len()).max().unwrap_or(0)
            }
            InteractionSpec::WeylSum { .. } => 0,
        }
    }
}

/// Declarative description of a cutoff field Hamiltonian.
#[derive(Debug, Clone)]
pub struct QfhSpec {
    pub statistics: Statistics,
    pub d: usize,
    pub n_max: usize,
    pub h: OneParticleOperator,
    pub interaction: InteractionSpec,
    /// Opt-in check that `h >= mass_floor > 0`; the floor is recorded for
    /// gap reporting. Builders work without it.
    pub mass_floor: Option<f64>,
}

impl QfhSpec {
    pub fn new(
        statistics: Statistics,
        d: usize,
        n_max: usize,
        h: OneParticleOperator,
        interaction: InteractionSpec,
        mass_floor: Option<f64>,
    ) -> Result<QfhSpec> {
        if h.matrix.nrows() != d || h.matrix.ncols() != d {
            return Err(FockError::DimensionMismatch {
                rows: d,
                cols: d,
                got_rows: h.matrix.nrows(),
                got_cols: h.matrix.ncols(),
            });
        }
        if !h.hermitian {
            return Err(FockError::NotHermitian {
                defect: hermiticity_defect(&h.matrix),
            });
        }
        interaction.validate(d)?;
        if let Some(m) = mass_floor {
            if m <= 0.0 {
                return Err(FockError::InvalidParameter(
                    "mass floor must be strictly positive".into(),
                ));
            }
            let min = *eigh(&h.matrix)?
                .eigenvalues
                .first()
                .ok_or(FockError::ZeroModes)?;
            if min < m - 1e-12 * m.max(1.0) {
                return Err(FockError::MassCheckFailed {
                    min_eigenvalue: min,
                    mass: m,
                });
            }
        }
        Ok(QfhSpec {
            statistics,
            d,
            n_max,
            h,
            interaction,
            mass_floor,
        })
    }

    pub fn basis(&self) -> Result<FockBasis> {
        build_basis(self.d, self.n_max, self.statistics)
    }
}

/// The same model one cutoff level down: identical one-particle operator
/// and interaction, `N_max - 1`.
pub fn descend(spec: &QfhSpec) -> Result<QfhSpec> {
    if spec.n_max == 0 {
        return Err(FockError::CutoffTooSmall {
            needed: 1,
            n_max: 0,
        });
    }
    let mut lower = spec.clone();
    lower.n_max -= 1;
    Ok(lower)
}

/// Evaluate the interaction as a matrix over the basis, as a product of
/// truncated factors per term.
pub fn interaction_matrix(basis: &FockBasis, interaction: &InteractionSpec) -> Result<CMatrix> {
    interaction.validate(basis.d)?;
    let dim = basis.dim();
    let mut v = CMatrix::zeros(dim, dim);
    match interaction {
        InteractionSpec::PolynomialField { terms } => {
            for (coeff, factors) in terms {
                let mut term = CMatrix::identity(dim, dim);
                for u in factors {
                    term *= field(basis, u)?.matrix;
                }
                v += term * *coeff;
            }
        }
        InteractionSpec::WeylSum { atoms } => {
            for (coeff, u) in atoms {
                v += weyl(basis, u)?.matrix * *coeff;
            }
        }
    }
    Ok(v)
}

fn is_sector_diagonal(m: &CMatrix, basis: &FockBasis) -> bool {
    for (j, src) in basis.states.iter().enumerate() {
        for (i, dst) in basis.states.iter().enumerate() {
            if m[(i, j)].norm() != 0.0 && dst.total != src.total {
                return false;
            }
        }
    }
    true
}

/// Build `H = dGamma(h) + V` over the spec's basis. The result is verified
/// Hermitian; a non-Hermitian interaction is rejected.
pub fn build_qfh(spec: &QfhSpec) -> Result<FockOperator> {
    let basis = spec.basis()?;
    let v = interaction_matrix(&basis, &spec.interaction)?;
    let v_defect = hermiticity_defect(&v);
    if v_defect > 1e-12 * max_abs(&v).max(1.0) {
        return Err(FockError::NonHermitianInteraction { defect: v_defect });
    }
    let h0 = dgamma(&basis, &spec.h.matrix)?;
    let matrix = h0.matrix + v;
    let sector_shift = if is_sector_diagonal(&matrix, &basis) {
        SectorShift::Shift(0)
    } else {
        SectorShift::Mixed
    };
    Ok(FockOperator {
        matrix,
        hermitian: true,
        sector_shift,
        signature: basis.signature(),
    })
}

/// The multiplication map from (sector p) ⊗ (sector q) into sector p+q of
/// the bosonic Fock space, in orthonormal occupation bases. Columns are
/// indexed by the Kronecker pairing `i_p * dim_q + i_q`.
#[derive(Debug, Clone)]
pub struct Symmetrizer {
    pub p: usize,
    pub q: usize,
    pub d: usize,
    pub matrix: CMatrix,
}

/// Build the symmetrizer. Each column has a single nonzero entry: the pair
/// (|m>, |n>) maps to sqrt(prod_i C(m_i + n_i, m_i)) |m + n>.
pub fn symmetrizer(p: usize, q: usize, d: usize) -> Result<Symmetrizer> {
    let basis_p = build_basis(d, p, Statistics::Boson)?;
    let basis_q = build_basis(d, q, Statistics::Boson)?;
    let basis_pq = build_basis(d, p + q, Statistics::Boson)?;
    let range_p = basis_p.sector_range(p)?;
    let range_q = basis_q.sector_range(q)?;
    let range_pq = basis_pq.sector_range(p + q)?;
    let dim_q = range_q.len();
    let mut matrix = CMatrix::zeros(range_pq.len(), range_p.len() * dim_q);
    for (ip, sp) in range_p.clone().enumerate() {
        let m = &basis_p.states[sp].occupations;
        for (iq, sq) in range_q.clone().enumerate() {
            let n = &basis_q.states[sq].occupations;
            let sum: Vec<u32> = m.iter().zip(n).map(|(&a, &b)| a + b).collect();
            let row = basis_pq.state_index(&sum)? - range_pq.start;
            let weight: f64 = m
                .iter()
                .zip(n)
                .map(|(&a, &b)| crate::fock_core::binomial((a + b) as usize, a as usize) as f64)
                .product();
            matrix[(row, ip * dim_q + iq)] = C64::new(weight.sqrt(), 0.0);
        }
    }
    Ok(Symmetrizer { p, q, d, matrix })
}

/// Coupled creation operator `a*(v)` on the space Fock ⊗ small-system,
/// where `v` maps the small system into (one-particle) ⊗ (small-system)
/// with row index `mode * ell + s`. Equals `sum_m a*(e_m) ⊗ K_m` with
/// `K_m[s,t] = v[m*ell + s, t]`. Flat indices pair as `fock * ell + s`.
pub fn coupled_creation(basis: &FockBasis, ell: usize, v: &CMatrix) -> Result<CMatrix> {
    if ell == 0 {
        return Err(FockError::InvalidParameter(
            "small-system dimension must be positive".into(),
        ));
    }
    if v.nrows() != basis.d * ell || v.ncols() != ell {
        return Err(FockError::DimensionMismatch {
            rows: basis.d * ell,
            cols: ell,
            got_rows: v.nrows(),
            got_cols: v.ncols(),
        });
    }
    let dim = basis.dim();
    let mut total = CMatrix::zeros(dim * ell, dim * ell);
    let mut e = crate::CVector::zeros(basis.d);
    for mode in 0..basis.d {
        let k = CMatrix::from_fn(ell, ell, |s, t| v[(mode * ell + s, t)]);
        if max_abs(&k) == 0.0 {
            continue;
        }
        e[mode] = C64::new(1.0, 0.0);
        let cre = creation(basis, &e)?.matrix;
        e[mode] = C64::new(0.0, 0.0);
        total += cre.kronecker(&k);
    }
    Ok(total)
}

/// Declarative description of a field coupled to a confined small system.
#[derive(Debug, Clone)]
pub struct PauliFierzSpec {
    pub d: usize,
    pub n_max: usize,
    pub h: OneParticleOperator,
    pub ell: usize,
    pub l: OneParticleOperator,
    pub v: CMatrix,
    pub mass_floor: Option<f64>,
}

impl PauliFierzSpec {
    pub fn new(
        d: usize,
        n_max: usize,
        h: OneParticleOperator,
        ell: usize,
        l: OneParticleOperator,
        v: CMatrix,
        mass_floor: Option<f64>,
    ) -> Result<PauliFierzSpec> {
        if h.matrix.nrows() != d || h.matrix.ncols() != d {
            return Err(FockError::DimensionMismatch {
                rows: d,
                cols: d,
                got_rows: h.matrix.nrows(),
                got_cols: h.matrix.ncols(),
            });
        }
        if !h.hermitian {
            return Err(FockError::NotHermitian {
                defect: hermiticity_defect(&h.matrix),
            });
        }
        if l.matrix.nrows() != ell || l.matrix.ncols() != ell {
            return Err(FockError::DimensionMismatch {
                rows: ell,
                cols: ell,
                got_rows: l.matrix.nrows(),
                got_cols: l.matrix.ncols(),
            });
        }
        if !l.positive {
            let min = eigh(&l.matrix)?
                .eigenvalues
                .first()
                .copied()
                .unwrap_or(0.0);
            return Err(FockError::NotPositive {
                min_eigenvalue: min,
            });
        }
        if v.nrows() != d * ell || v.ncols() != ell {
            return Err(FockError::DimensionMismatch {
                rows: d * ell,
                cols: ell,
                got_rows: v.nrows(),
                got_cols: v.ncols(),
            });
        }
        if let Some(m) = mass_floor {
            if m <= 0.0 {
                return Err(FockError::InvalidParameter(
                    "mass floor must be strictly positive".into(),
                ));
            }
            let min = *eigh(&h.matrix)?
                .eigenvalues
                .first()
                .ok_or(FockError::ZeroModes)?;
            if min < m - 1e-12 * m.max(1.0) {
                return Err(FockError::MassCheckFailed {
                    min_eigenvalue: min,
                    mass: m,
                });
            }
        }
        Ok(PauliFierzSpec {
            d,
            n_max,
            h,
            ell,
            l,
            v,
            mass_floor,
        })
    }
}

/// A built coupled Hamiltonian `H = dGamma(h) ⊗ 1 + 1 ⊗ L + phi(v)`,
/// with the free and coupling parts kept separate for form-bound checks.
#[derive(Debug, Clone)]
pub struct PauliFierzOperator {
    pub matrix: CMatrix,
    /// `dGamma(h) ⊗ 1 + 1 ⊗ L`.
    pub free_part: CMatrix,
    /// `phi(v) = a(v) + a*(v)`.
    pub coupling: CMatrix,
    pub basis: FockBasis,
    pub ell: usize,
}

pub fn build_pauli_fierz(spec: &PauliFierzSpec) -> Result<PauliFierzOperator> {
    let basis = build_basis(spec.d, spec.n_max, Statistics::Boson)?;
    let dim = basis.dim();
    let h0 = dgamma(&basis, &spec.h.matrix)?.matrix;
    let free_part = h0.kronecker(&CMatrix::identity(spec.ell, spec.ell))
        + CMatrix::identity(dim, dim).kronecker(&spec.l.matrix);
    let cre = coupled_creation(&basis, spec.ell, &spec.v)?;
    let coupling = &cre + cre.adjoint();
    let matrix = &free_part + &coupling;
    let defect = hermiticity_defect(&matrix);
    if defect > 1e-12 * max_abs(&matrix).max(1.0) {
        return Err(FockError::NotHermitian { defect });
    }
    Ok(PauliFierzOperator {
        matrix,
        free_part,
        coupling,
        basis,
        ell: spec.ell,
    })
}

/// The relative form constant `C(v,r) = |(h^{-1/2} ⊗ 1) v (L+r)^{-1/2}|^2`
/// (operator norm squared) controlling `|<f|phi(v)f>| <= C(v,r) <f|(H_0+r)f>`.
pub fn form_constant(spec: &PauliFierzSpec, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(FockError::InvalidParameter(
            "form-constant shift r must be positive".into(),
        ));
    }
    let h_dec = eigh(&spec.h.matrix)?;
    let h_min = *h_dec.eigenvalues.first().ok_or(FockError::ZeroModes)?;
    if h_min <= 0.0 {
        return Err(FockError::NotPositive {
            min_eigenvalue: h_min,
        });
    }
    let inv_sqrt_h = crate::spectral::func_hermitian(&spec.h.matrix, |x| {
        C64::new(1.0 / x.sqrt(), 0.0)
    })?;
    let shifted = &spec.l.matrix + CMatrix::identity(spec.ell, spec.ell) * C64::new(r, 0.0);
    let inv_sqrt_l = crate::spectral::func_hermitian(&shifted, |x| C64::new(1.0 / x.sqrt(), 0.0))?;
    let weighted =
        inv_sqrt_h.kronecker(&CMatrix::identity(spec.ell, spec.ell)) * &spec.v * inv_sqrt_l;
    Ok(op_norm(&weighted).powi(2))
}

fn matrix_power(m: &CMatrix, mut n: usize) -> CMatrix {
    let dim = m.nrows();
    let mut result = CMatrix::identity(dim, dim);
    let mut base = m.clone();
    while n > 0 {
        if n % 2 == 1 {
            result = &result * &base;
        }
        n /= 2;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Product-formula errors `|e^{-t(H0+V)} - (e^{-tV/n} e^{-tH0/n})^n|`
/// (operator norm) along a schedule of step counts.
pub fn trotter_errors(h0: &CMatrix, v: &CMatrix, t: f64, schedule: &[usize]) -> Result<Vec<f64>> {
    if h0.nrows() != v.nrows() || h0.ncols() != v.ncols() || h0.nrows() != h0.ncols() {
        return Err(FockError::DimensionMismatch {
            rows: h0.nrows(),
            cols: h0.ncols(),
            got_rows: v.nrows(),
            got_cols: v.ncols(),
        });
    }
    if t <= 0.0 {
        return Err(FockError::InvalidParameter(
            "propagation time must be positive".into(),
        ));
    }
    if schedule.iter().any(|&n| n == 0) {
        return Err(FockError::InvalidParameter(
            "step counts must be positive".into(),
        ));
    }
    let exact = exp_hermitian(&(h0 + v), C64::new(-t, 0.0))?;
    let mut errors = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let a = exp_hermitian(v, C64::new(-t / n as f64, 0.0))?;
        let b = exp_hermitian(h0, C64::new(-t / n as f64, 0.0))?;
        let step = a * b;
        let product = matrix_power(&step, n);
        errors.push(op_norm(&(&exact - product)));
    }
    Ok(errors)
}

/// Flag-checked wrapper over `trotter_errors` for Fock operators on a
/// shared basis.
pub fn trotter_check(
    h0: &FockOperator,
    v: &FockOperator,
    t: f64,
    schedule: &[usize],
) -> Result<Vec<f64>> {
    if h0.signature != v.signature {
        return Err(FockError::BasisMismatch);
    }
    if !h0.hermitian {
        return Err(FockError::NotHermitian {
            defect: hermiticity_defect(&h0.matrix),
        });
    }
    if !v.hermitian {
        return Err(FockError::NotHermitian {
            defect: hermiticity_defect(&v.matrix),
        });
    }
    trotter_errors(&h0.matrix, &v.matrix, t, schedule)
}

/// Convergence report for the perturbative resolvent series
/// `R_s = sum_n s^n R_0 (V R_0)^n` with `R_0 = (z - H0)^{-1}`.
#[derive(Debug, Clone)]
pub struct ResolventReport {
    /// `q = |s| * |V R_0|`; the series converges geometrically iff q < 1.
    pub contraction: f64,
    /// `|R_s - P_k|` for partial sums `P_k`, k = 0..=k_max.
    pub errors: Vec<f64>,
    /// Geometric tail bounds `|R_0| q^{k+1} / (1-q)`.
    pub tail_bounds: Vec<f64>,
}

pub fn resolvent_series(
    h0: &CMatrix,
    v: &CMatrix,
    z: C64,
    s: C64,
    k_max: usize,
) -> Result<ResolventReport> {
    if h0.nrows() != v.nrows() || h0.ncols() != v.ncols() || h0.nrows() != h0.ncols() {
        return Err(FockError::DimensionMismatch {
            rows: h0.nrows(),
            cols: h0.ncols(),
            got_rows: v.nrows(),
            got_cols: v.ncols(),
        });
    }
    let dim = h0.nrows();
    let id = CMatrix::identity(dim, dim);
    let r0 = (&id * z - h0)
        .lu()
        .try_inverse()
        .ok_or(FockError::SingularOperator)?;
    let q = s.norm() * op_norm(&(v * &r0));
    if q >= 1.0 {
        return Err(FockError::DivergentSeries {
            contraction_norm: q,
        });
    }
    let exact = (&id * z - h0 - v * s)
        .lu()
        .try_inverse()
        .ok_or(FockError::SingularOperator)?;
    let step = v * &r0 * s;
    let r0_norm = op_norm(&r0);
    let mut term = r0.clone();
    let mut partial = r0.clone();
    let mut errors = Vec::with_capacity(k_max + 1);
    let mut tail_bounds = Vec::with_capacity(k_max + 1);
    errors.push(op_norm(&(&exact - &partial)));
    tail_bounds.push(r0_norm * q / (1.0 - q));
    for k in 1..=k_max {
        term = &term * &step;
        partial += &term;
        errors.push(op_norm(&(&exact - &partial)));
        tail_bounds.push(r0_norm * q.powi(k as i32 + 1) / (1.0 - q));
    }
    Ok(ResolventReport {
        contraction: q,
        errors,
        tail_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock_core::sector_dimension;
    use crate::operators::{number_function, number_operator};
    use crate::CVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            values.len(),
            values.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    fn random_vector(rng: &mut ChaCha20Rng, d: usize) -> CVector {
        CVector::from_fn(d, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn random_hermitian(rng: &mut ChaCha20Rng, n: usize) -> CMatrix {
        let raw = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        (&raw + raw.adjoint()) * C64::new(0.5, 0.0)
    }

    fn free_spec(h: CMatrix, n_max: usize) -> QfhSpec {
        let d = h.nrows();
        QfhSpec::new(
            Statistics::Boson,
            d,
            n_max,
            OneParticleOperator::hermitian(h).unwrap(),
            InteractionSpec::none(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn free_hamiltonian_spectrum_is_all_occupation_sums() {
        let spec = free_spec(diag(&[1.0, 2.0]), 2);
        let h = build_qfh(&spec).unwrap();
        assert_eq!(h.sector_shift, SectorShift::Shift(0));
        let eigs = eigh(&h.matrix).unwrap().eigenvalues;
        let expected = [0.0, 1.0, 2.0, 2.0, 3.0, 4.0];
        for (got, want) in eigs.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn constant_weyl_atom_shifts_the_free_hamiltonian() {
        let d = 2;
        let atoms = vec![(C64::new(0.7, 0.0), CVector::zeros(d))];
        let spec = QfhSpec::new(
            Statistics::Boson,
            d,
            2,
            OneParticleOperator::hermitian(diag(&[1.0, 2.0])).unwrap(),
            InteractionSpec::WeylSum { atoms },
            None,
        )
        .unwrap();
        let h = build_qfh(&spec).unwrap();
        let free = build_qfh(&free_spec(diag(&[1.0, 2.0]), 2)).unwrap();
        let dim = h.matrix.nrows();
        let shift = CMatrix::identity(dim, dim) * C64::new(0.7, 0.0);
        assert!(max_abs(&(&h.matrix - (&free.matrix + shift))) <= 1e-12);
    }

    #[test]
    fn quadratic_field_term_matches_the_squared_field_matrix() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let u = random_vector(&mut rng, 2);
        let basis = build_basis(2, 3, Statistics::Boson).unwrap();
        let spec_v = interaction_matrix(
            &basis,
            &InteractionSpec::PolynomialField {
                terms: vec![(C64::new(1.0, 0.0), vec![u.clone(), u.clone()])],
            },
        )
        .unwrap();
        let f = field(&basis, &u).unwrap().matrix;
        assert!(max_abs(&(spec_v - &f * &f)) <= 1e-12);
    }

    #[test]
    fn non_hermitian_interactions_are_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let u = random_vector(&mut rng, 2);
        let v = random_vector(&mut rng, 2);
        // phi(u)phi(v) alone is not Hermitian for independent u, v.
        let spec = QfhSpec::new(
            Statistics::Boson,
            2,
            2,
            OneParticleOperator::hermitian(diag(&[1.0, 1.0])).unwrap(),
            InteractionSpec::PolynomialField {
                terms: vec![(C64::new(1.0, 0.0), vec![u, v])],
            },
            None,
        )
        .unwrap();
        assert!(matches!(
            build_qfh(&spec),
            Err(FockError::NonHermitianInteraction { .. })
        ));
    }

    #[test]
    fn mass_floor_check_accepts_and_rejects_correctly() {
        let h = diag(&[0.5, 2.0]);
        let ok = QfhSpec::new(
            Statistics::Boson,
            2,
            1,
            OneParticleOperator::hermitian(h.clone()).unwrap(),
            InteractionSpec::none(),
            Some(0.5),
        );
        assert!(ok.is_ok());
        let bad = QfhSpec::new(
            Statistics::Boson,
            2,
            1,
            OneParticleOperator::hermitian(h).unwrap(),
            InteractionSpec::none(),
            Some(0.75),
        );
        assert!(matches!(bad, Err(FockError::MassCheckFailed { .. })));
    }

    #[test]
    fn descend_of_the_free_field_is_the_free_field_one_level_down() {
        let spec = free_spec(diag(&[1.0, 2.0]), 3);
        let lower = descend(&spec).unwrap();
        assert_eq!(lower.n_max, 2);
        let built = build_qfh(&lower).unwrap();
        let basis = build_basis(2, 2, Statistics::Boson).unwrap();
        let direct = dgamma(&basis, &diag(&[1.0, 2.0])).unwrap();
        assert!(max_abs(&(&built.matrix - &direct.matrix)) == 0.0);
        let ground = descend(&descend(&lower).unwrap().clone());
        assert!(ground.is_ok());
        assert!(matches!(
            descend(&ground.unwrap()),
            Err(FockError::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn cutoff_zero_hamiltonian_is_the_vacuum_energy_scalar() {
        // Constant term 0.4 plus a quadratic term whose cutoff-0 field
        // factors vanish: the 1x1 Hamiltonian is exactly 0.4.
        let u = CVector::from_vec(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.5)]);
        let spec = QfhSpec::new(
            Statistics::Boson,
            2,
            0,
            OneParticleOperator::hermitian(diag(&[1.0, 2.0])).unwrap(),
            InteractionSpec::PolynomialField {
                terms: vec![
                    (C64::new(0.4, 0.0), vec![]),
                    (C64::new(1.0, 0.0), vec![u.clone(), u.clone()]),
                ],
            },
            None,
        )
        .unwrap();
        let h = build_qfh(&spec).unwrap();
        assert_eq!(h.matrix.nrows(), 1);
        assert!((h.matrix[(0, 0)] - C64::new(0.4, 0.0)).norm() <= 1e-15);
    }

    #[test]
    fn symmetrizer_norm_matches_the_binomial_law() {
        for d in [2usize, 3] {
            for p in 0..=3usize {
                for q in 0..=3usize {
                    let s = symmetrizer(p, q, d).unwrap();
                    let expected =
                        (crate::fock_core::binomial(p + q, p) as f64).sqrt();
                    assert!(
                        (op_norm(&s.matrix) - expected).abs() <= 1e-12 * expected,
                        "sector degrees p={p} q={q} d={d}"
                    );
                }
            }
        }
    }

    #[test]
    fn symmetrizer_gram_is_diagonal_with_binomial_total() {
        // S S* acts diagonally in the occupation basis; its diagonal entry
        // at |s> sums the products of per-mode binomials over the splits
        // of s, which telescopes to C(p+q, p).
        let s = symmetrizer(2, 1, 2).unwrap();
        let gram = &s.matrix * s.matrix.adjoint();
        let dim = gram.nrows();
        for i in 0..dim {
            for j in 0..dim {
                if i == j {
                    assert!((gram[(i, j)] - C64::new(3.0, 0.0)).norm() <= 1e-12);
                } else {
                    assert!(gram[(i, j)].norm() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn rank_structured_coupling_factorizes_as_a_tensor_product() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let d = 2;
        let ell = 2;
        let basis = build_basis(d, 2, Statistics::Boson).unwrap();
        let u = random_vector(&mut rng, d);
        let k = CMatrix::from_fn(ell, ell, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let v = CMatrix::from_fn(d * ell, ell, |row, t| u[row / ell] * k[(row % ell, t)]);
        let coupled = coupled_creation(&basis, ell, &v).unwrap();
        let factored = creation(&basis, &u).unwrap().matrix.kronecker(&k);
        assert!(max_abs(&(coupled - factored)) <= 1e-13);
    }

    #[test]
    fn coupled_creation_norm_with_number_weight_is_the_coupling_norm() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let d = 2;
        let ell = 2;
        let n_max = 4;
        let basis = build_basis(d, n_max, Statistics::Boson).unwrap();
        let v = CMatrix::from_fn(d * ell, ell, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let cre = coupled_creation(&basis, ell, &v).unwrap();
        let samples: Vec<C64> = (0..=n_max)
            .map(|n| C64::new(1.0 / ((n as f64) + 1.0).sqrt(), 0.0))
            .collect();
        let weight = number_function(&basis, &samples)
            .unwrap()
            .matrix
            .kronecker(&CMatrix::identity(ell, ell));
        let weighted = cre * weight;
        assert!((op_norm(&weighted) - op_norm(&v)).abs() <= 1e-10 * op_norm(&v).max(1.0));
    }

    #[test]
    fn decoupled_pauli_fierz_spectrum_is_the_tensor_sum() {
        let d = 2;
        let ell = 2;
        let h = diag(&[1.0, 2.0]);
        let l = diag(&[0.0, 0.5]);
        let spec = PauliFierzSpec::new(
            d,
            2,
            OneParticleOperator::hermitian(h.clone()).unwrap(),
            ell,
            OneParticleOperator::positive(l.clone()).unwrap(),
            CMatrix::zeros(d * ell, ell),
            None,
        )
        .unwrap();
        let built = build_pauli_fierz(&spec).unwrap();
        let eigs = eigh(&built.matrix).unwrap().eigenvalues;
        let basis = build_basis(d, 2, Statistics::Boson).unwrap();
        let field_eigs = eigh(&dgamma(&basis, &h).unwrap().matrix)
            .unwrap()
            .eigenvalues;
        let mut expected: Vec<f64> = field_eigs
            .iter()
            .flat_map(|&a| [a, a + 0.5])
            .collect();
        expected.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (got, want) in eigs.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn trivial_small_system_reduces_to_a_linear_field_coupling() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let d = 2;
        let n_max = 3;
        let u = random_vector(&mut rng, d);
        // ell = 1, L = 0: the coupling column is u itself.
        let v = CMatrix::from_fn(d, 1, |row, _| u[row]);
        let spec = PauliFierzSpec::new(
            d,
            n_max,
            OneParticleOperator::hermitian(diag(&[1.0, 2.0])).unwrap(),
            1,
            OneParticleOperator::positive(CMatrix::zeros(1, 1)).unwrap(),
            v,
            None,
        )
        .unwrap();
        let built = build_pauli_fierz(&spec).unwrap();
        let qfh = QfhSpec::new(
            Statistics::Boson,
            d,
            n_max,
            OneParticleOperator::hermitian(diag(&[1.0, 2.0])).unwrap(),
            InteractionSpec::PolynomialField {
                terms: vec![(C64::new(1.0, 0.0), vec![u])],
            },
            None,
        );
        // The linear term phi(u) is only Hermitian as a whole matrix; the
        // builder accepts it because a(u) + a*(u) is Hermitian.
        let direct = build_qfh(&qfh.unwrap()).unwrap();
        assert!(max_abs(&(&built.matrix - &direct.matrix)) <= 1e-12);
    }

    #[test]
    fn form_constant_is_monotone_nonincreasing_in_the_shift() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let d = 2;
        let ell = 2;
        let v = CMatrix::from_fn(d * ell, ell, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let l_raw = random_hermitian(&mut rng, ell);
        let l = &l_raw * l_raw.adjoint();
        let spec = PauliFierzSpec::new(
            d,
            2,
            OneParticleOperator::hermitian(diag(&[1.0, 2.0])).unwrap(),
            ell,
            OneParticleOperator::positive(l).unwrap(),
            v,
            Some(1.0),
        )
        .unwrap();
        let c1 = form_constant(&spec, 1.0).unwrap();
        let c10 = form_constant(&spec, 10.0).unwrap();
        let c100 = form_constant(&spec, 100.0).unwrap();
        assert!(c1 >= c10 && c10 >= c100);
        assert!(c100 > 0.0);
    }

    #[test]
    fn trotter_error_vanishes_for_commuting_pieces() {
        let h0 = diag(&[1.0, 2.0, 3.0]);
        let zero = CMatrix::zeros(3, 3);
        let errors = trotter_errors(&h0, &zero, 1.0, &[1, 2, 4]).unwrap();
        assert!(errors.iter().all(|&e| e <= 1e-14));
        let v = diag(&[0.5, -0.25, 0.75]);
        let errors = trotter_errors(&h0, &v, 1.0, &[1, 2, 4]).unwrap();
        assert!(errors.iter().all(|&e| e <= 1e-12));
    }

    #[test]
    fn trotter_error_halves_when_steps_double() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let h0 = random_hermitian(&mut rng, 6);
        let v = random_hermitian(&mut rng, 6);
        let schedule: Vec<usize> = (0..=8).map(|k| 1usize << k).collect();
        let errors = trotter_errors(&h0, &v, 1.0, &schedule).unwrap();
        for w in errors.windows(2) {
            assert!(w[1] < w[0]);
        }
        for k in 5..errors.len() {
            let ratio = errors[k] / errors[k - 1];
            assert!(ratio > 0.4 && ratio < 0.6, "ratio {ratio}");
        }
    }

    #[test]
    fn resolvent_series_converges_geometrically_within_its_tail_bounds() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let h0 = random_hermitian(&mut rng, 5);
        let v = random_hermitian(&mut rng, 5);
        let z = C64::new(0.0, 4.0);
        let s = C64::new(0.35, 0.1);
        let report = resolvent_series(&h0, &v, z, s, 12).unwrap();
        assert!(report.contraction < 1.0);
        for (err, bound) in report.errors.iter().zip(&report.tail_bounds) {
            assert!(err <= &(bound * (1.0 + 1e-9) + 1e-13));
        }
        assert!(report.errors.last().unwrap() < &1e-6);
        // First-order term: d/ds R_s at 0 equals R0 V R0.
        let id = CMatrix::identity(5, 5);
        let r0 = (&id * z - &h0).lu().try_inverse().unwrap();
        let eps = 1e-6;
        let perturbed = (&id * z - &h0 - &v * C64::new(eps, 0.0))
            .lu()
            .try_inverse()
            .unwrap();
        let numeric_derivative = (&perturbed - &r0) / C64::new(eps, 0.0);
        let analytic = &r0 * &v * &r0;
        assert!(max_abs(&(numeric_derivative - analytic)) <= 1e-4);
    }

    #[test]
    fn divergent_series_preconditions_are_reported() {
        let h0 = diag(&[1.0, 2.0]);
        let v = diag(&[5.0, 5.0]);
        let z = C64::new(0.0, 1.0);
        let err = resolvent_series(&h0, &v, z, C64::new(1.0, 0.0), 3);
        assert!(matches!(err, Err(FockError::DivergentSeries { .. })));
        let on_spectrum = resolvent_series(&h0, &v, C64::new(1.0, 0.0), C64::new(0.0, 0.0), 1);
        assert!(matches!(on_spectrum, Err(FockError::SingularOperator)));
    }

    #[test]
    fn sector_dimension_bookkeeping_matches_the_built_bases() {
        let spec = free_spec(diag(&[1.0, 2.0, 3.0]), 4);
        let basis = spec.basis().unwrap();
        for n in 0..=4usize {
            assert_eq!(
                basis.sector_dim(n).unwrap(),
                sector_dimension(3, n, Statistics::Boson)
            );
        }
        let h = build_qfh(&spec).unwrap();
        assert_eq!(h.matrix.nrows(), basis.dim());
        let n_op = number_operator(&basis).matrix;
        let comm = &h.matrix * &n_op - &n_op * &h.matrix;
        assert!(max_abs(&comm) == 0.0);
    }
}
