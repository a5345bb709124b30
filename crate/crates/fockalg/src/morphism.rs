//! Symbolic algebra generators and the canonical sector-descent morphism.
//!
//! Generator words are ordered products of field powers, Weyl factors,
//! multiplicative lifts `Gamma(A)`, and number functions. The morphism acts
//! per word: it extracts the one-particle legs of the `Gamma` factors and
//! shifts every number function by one, sending an operator at cutoff `N`
//! to one at cutoff `N - 1`.
//!
//! The numeric side realizes the morphism exactly with a probe mode: the
//! basis is built with one extra mode (always the last), every word keeps
//! its support off that mode, and `a(e) T a*(e)` compressed to probe-free
//! states of total at most `N - 1` reproduces the evaluated symbolic image
//! with no limiting procedure. Fermionic words must be conjugated by the
//! grading first; the parity operator implements that conjugation at every
//! cutoff, and omitting it flips the sign of odd words.

use crate::error::{FockError, Result};
use crate::fock_core::{build_basis, FockBasis, SectorKind, Statistics};
use crate::operators::{
    creation, field, gamma, number_function, parity, weyl, FockOperator, OneParticleOperator,
    OneParticleVector, SectorShift,
};
use crate::{hermiticity_defect, max_abs, C64, CMatrix, CVector};

/// One multiplicative factor of a generator word.
#[derive(Debug, Clone)]
pub enum GeneratorFactor {
    /// `phi(u)^k`.
    FieldPower(OneParticleVector, u32),
    /// `W(u)` (bosonic only).
    Weyl(OneParticleVector),
    /// `Gamma(A)` with `A` a verified strict contraction.
    Gamma(OneParticleOperator),
    /// `theta(N)` sampled on total occupation numbers starting at 0.
    NumberFunction(Vec<C64>),
    /// The projector onto total occupation `n`.
    SectorProj(usize),
    /// A complex multiple of the identity.
    Scalar(C64),
}

impl GeneratorFactor {
    fn is_fieldlike(&self) -> bool {
        matches!(
            self,
            GeneratorFactor::FieldPower(_, _) | GeneratorFactor::Weyl(_)
        )
    }

    fn is_numberlike(&self) -> bool {
        matches!(
            self,
            GeneratorFactor::NumberFunction(_) | GeneratorFactor::SectorProj(_)
        )
    }
}

/// An ordered product of generator factors.
#[derive(Debug, Clone, Default)]
pub struct GeneratorWord {
    pub factors: Vec<GeneratorFactor>,
}

impl GeneratorWord {
    pub fn new(factors: Vec<GeneratorFactor>) -> GeneratorWord {
        GeneratorWord { factors }
    }

    /// Canonical form: field and Weyl factors first, then `Gamma` factors,
    /// then at most one number factor; scalars may sit anywhere. Words are
    /// never reordered silently, because reordering hides commutation
    /// bookkeeping; a word out of order is an error.
    pub fn validate_canonical(&self) -> Result<()> {
        let mut stage = 0u8;
        let mut number_seen = false;
        for factor in &self.factors {
            match factor {
                GeneratorFactor::Scalar(_) => {}
                f if f.is_fieldlike() => {
                    if stage > 0 {
                        return Err(FockError::NonCanonicalWord(
                            "field or Weyl factor after a Gamma or number factor".into(),
                        ));
                    }
                }
                GeneratorFactor::Gamma(op) => {
                    if stage > 1 {
                        return Err(FockError::NonCanonicalWord(
                            "Gamma factor after a number factor".into(),
                        ));
                    }
                    if !op.contraction {
                        return Err(FockError::NotContraction {
                            norm: crate::op_norm(&op.matrix),
                        });
                    }
                    stage = 1;
                }
                f if f.is_numberlike() => {
                    if number_seen {
                        return Err(FockError::NonCanonicalWord(
                            "more than one number factor".into(),
                        ));
                    }
                    number_seen = true;
                    stage = 2;
                }
                _ => unreachable!("all variants covered"),
            }
        }
        Ok(())
    }

    /// Verify that the word cannot excite the given mode: field and Weyl
    /// vectors vanish there and every `Gamma` leg has the mode as an
    /// eigenvector.
    pub fn probe_free(&self, probe: usize) -> Result<()> {
        let zero = C64::new(0.0, 0.0);
        for factor in &self.factors {
            match factor {
                GeneratorFactor::FieldPower(u, _) | GeneratorFactor::Weyl(u) => {
                    if probe < u.len() && u[probe] != zero {
                        return Err(FockError::ProbeInSupport { mode: probe });
                    }
                }
                GeneratorFactor::Gamma(op) => {
                    let a = &op.matrix;
                    if probe < a.nrows() {
                        for j in 0..a.nrows() {
                            if j != probe && (a[(probe, j)] != zero || a[(j, probe)] != zero) {
                                return Err(FockError::ProbeInSupport { mode: probe });
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// A finite complex-linear combination of generator words.
#[derive(Debug, Clone, Default)]
pub struct AlgebraElement {
    pub terms: Vec<(C64, GeneratorWord)>,
}

impl AlgebraElement {
    pub fn from_word(word: GeneratorWord) -> AlgebraElement {
        AlgebraElement {
            terms: vec![(C64::new(1.0, 0.0), word)],
        }
    }

    pub fn from_terms(terms: Vec<(C64, GeneratorWord)>) -> AlgebraElement {
        AlgebraElement { terms }
    }

    /// Drop terms that are structurally zero: vanishing coefficient, a zero
    /// scalar factor, or a number factor with no nonzero sample left.
    pub fn pruned(mut self) -> AlgebraElement {
        let zero = C64::new(0.0, 0.0);
        self.terms.retain(|(coeff, word)| {
            if *coeff == zero {
                return false;
            }
            !word.factors.iter().any(|f| match f {
                GeneratorFactor::Scalar(c) => *c == zero,
                GeneratorFactor::NumberFunction(samples) => {
                    samples.iter().all(|s| *s == zero)
                }
                _ => false,
            })
        });
        self
    }

    pub fn is_zero(&self) -> bool {
        self.clone().pruned().terms.is_empty()
    }

    pub fn probe_free(&self, probe: usize) -> Result<()> {
        for (_, word) in &self.terms {
            word.probe_free(probe)?;
        }
        Ok(())
    }

    /// Term-by-term product (word concatenation). The result is evaluable
    /// but generally not canonical; the morphism will reject it until the
    /// caller normal-orders.
    pub fn multiply(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (c1, w1) in &self.terms {
            for (c2, w2) in &other.terms {
                let mut factors = w1.factors.clone();
                factors.extend(w2.factors.iter().cloned());
                terms.push((c1 * c2, GeneratorWord::new(factors)));
            }
        }
        AlgebraElement { terms }
    }

    /// Restrict every one-particle object to the first `d_new` modes; any
    /// excitation of a dropped mode is an error. Diagonal `Gamma` entries on
    /// dropped modes are allowed (they are the extracted tensor legs).
    pub fn restrict_modes(&self, d_new: usize) -> Result<AlgebraElement> {
        let zero = C64::new(0.0, 0.0);
        let mut terms = Vec::with_capacity(self.terms.len());
        for (coeff, word) in &self.terms {
            let mut factors = Vec::with_capacity(word.factors.len());
            for factor in &word.factors {
                let restricted = match factor {
                    GeneratorFactor::FieldPower(u, k) => {
                        for mode in d_new..u.len() {
                            if u[mode] != zero {
                                return Err(FockError::ProbeInSupport { mode });
                            }
                        }
                        GeneratorFactor::FieldPower(u.rows(0, d_new).into_owned(), *k)
                    }
                    GeneratorFactor::Weyl(u) => {
                        for mode in d_new..u.len() {
                            if u[mode] != zero {
                                return Err(FockError::ProbeInSupport { mode });
                            }
                        }
                        GeneratorFactor::Weyl(u.rows(0, d_new).into_owned())
                    }
                    GeneratorFactor::Gamma(op) => {
                        let a = &op.matrix;
                        for i in d_new..a.nrows() {
                            for j in 0..a.ncols() {
                                if i != j && (a[(i, j)] != zero || a[(j, i)] != zero) {
                                    return Err(FockError::ProbeInSupport {
                                        mode: i.max(j),
                                    });
                                }
                            }
                        }
                        GeneratorFactor::Gamma(OneParticleOperator {
                            matrix: a.view((0, 0), (d_new, d_new)).into_owned(),
                            hermitian: op.hermitian,
                            positive: op.positive,
                            contraction: op.contraction,
                        })
                    }
                    other => other.clone(),
                };
                factors.push(restricted);
            }
            terms.push((*coeff, GeneratorWord::new(factors)));
        }
        Ok(AlgebraElement { terms })
    }
}

/// Evaluate an element as a matrix over the basis: the product of factor
/// matrices in word order, extended linearly over terms.
pub fn evaluate(element: &AlgebraElement, basis: &FockBasis) -> Result<FockOperator> {
    let dim = basis.dim();
    let mut total = CMatrix::zeros(dim, dim);
    let mut shifts: Vec<SectorShift> = Vec::new();
    for (coeff, word) in &element.terms {
        word.validate_canonical()?;
        let mut product = CMatrix::identity(dim, dim);
        let mut word_shift = SectorShift::Shift(0);
        for factor in &word.factors {
            let (matrix, factor_shift) = match factor {
                GeneratorFactor::FieldPower(u, k) => {
                    if u.len() != basis.d {
                        return Err(FockError::WrongLength {
                            expected: basis.d,
                            got: u.len(),
                        });
                    }
                    let f = field(basis, u)?.matrix;
                    let mut p = CMatrix::identity(dim, dim);
                    for _ in 0..*k {
                        p = p * &f;
                    }
                    let shift = if *k == 0 {
                        SectorShift::Shift(0)
                    } else {
                        SectorShift::Mixed
                    };
                    (p, shift)
                }
                GeneratorFactor::Weyl(u) => {
                    if u.len() != basis.d {
                        return Err(FockError::WrongLength {
                            expected: basis.d,
                            got: u.len(),
                        });
                    }
                    (weyl(basis, u)?.matrix, SectorShift::Mixed)
                }
                GeneratorFactor::Gamma(op) => {
                    (gamma(basis, &op.matrix)?.matrix, SectorShift::Shift(0))
                }
                GeneratorFactor::NumberFunction(samples) => (
                    number_function(basis, samples)?.matrix,
                    SectorShift::Shift(0),
                ),
                GeneratorFactor::SectorProj(n) => {
                    let m = if *n <= basis.n_max {
                        crate::fock_core::sector_projector(basis, SectorKind::Single(*n))?.matrix
                    } else {
                        // A sector above the cutoff holds no states, so its
                        // projector is zero.
                        CMatrix::zeros(dim, dim)
                    };
                    (m, SectorShift::Shift(0))
                }
                GeneratorFactor::Scalar(c) => {
                    (CMatrix::identity(dim, dim) * *c, SectorShift::Shift(0))
                }
            };
            product = product * matrix;
            word_shift = match (word_shift, factor_shift) {
                (SectorShift::Shift(a), SectorShift::Shift(b)) => SectorShift::Shift(a + b),
                _ => SectorShift::Mixed,
            };
        }
        total += product * *coeff;
        shifts.push(word_shift);
    }
    let sector_shift = match shifts.split_first() {
        None => SectorShift::Shift(0),
        Some((first, rest)) => {
            if rest.iter().all(|s| s == first) {
                *first
            } else {
                SectorShift::Mixed
            }
        }
    };
    let hermitian = hermiticity_defect(&total) <= 1e-12 * max_abs(&total).max(1.0);
    Ok(FockOperator {
        matrix: total,
        hermitian,
        sector_shift,
        signature: basis.signature(),
    })
}

/// One term of a morphism image: the extracted one-particle tensor leg
/// (`None` when no `Gamma` factor contributed, i.e. the leg is the scalar 1)
/// together with the descended word.
#[derive(Debug, Clone)]
pub struct ImageTerm {
    pub coeff: C64,
    pub one_particle_part: Option<CMatrix>,
    pub word: GeneratorWord,
}

/// The symbolic image of an element under the canonical morphism.
#[derive(Debug, Clone)]
pub struct MorphismImage {
    pub terms: Vec<ImageTerm>,
}

impl MorphismImage {
    /// Forget the tensor legs, keeping the descended words.
    pub fn fock_element(&self) -> AlgebraElement {
        AlgebraElement {
            terms: self
                .terms
                .iter()
                .map(|t| (t.coeff, t.word.clone()))
                .collect(),
        }
    }

    /// Fold each term's probe-mode eigenvalue of the tensor leg into its
    /// coefficient. Exact when every leg has the probe as an eigenvector.
    pub fn project_probe(&self, probe: usize) -> AlgebraElement {
        AlgebraElement {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let mu = match &t.one_particle_part {
                        Some(a) if probe < a.nrows() => a[(probe, probe)],
                        _ => C64::new(1.0, 0.0),
                    };
                    (t.coeff * mu, t.word.clone())
                })
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.fock_element().is_zero()
    }
}

/// The canonical morphism on a combination of canonical words: per word,
/// `Gamma` legs multiply into the one-particle part, number functions shift
/// by one, sector projectors step down (the vacuum projector maps to zero),
/// and field and Weyl factors pass through unchanged.
pub fn canonical_image(element: &AlgebraElement) -> Result<MorphismImage> {
    let mut terms = Vec::with_capacity(element.terms.len());
    'term: for (coeff, word) in &element.terms {
        word.validate_canonical()?;
        let mut leg: Option<CMatrix> = None;
        let mut factors = Vec::with_capacity(word.factors.len());
        for factor in &word.factors {
            match factor {
                GeneratorFactor::Gamma(op) => {
                    leg = Some(match leg {
                        Some(prev) => prev * &op.matrix,
                        None => op.matrix.clone(),
                    });
                    factors.push(factor.clone());
                }
                GeneratorFactor::NumberFunction(samples) => {
                    if samples.len() <= 1 {
                        continue 'term;
                    }
                    factors.push(GeneratorFactor::NumberFunction(samples[1..].to_vec()));
                }
                GeneratorFactor::SectorProj(n) => {
                    if *n == 0 {
                        continue 'term;
                    }
                    factors.push(GeneratorFactor::SectorProj(n - 1));
                }
                other => factors.push(other.clone()),
            }
        }
        terms.push(ImageTerm {
            coeff: *coeff,
            one_particle_part: leg,
            word: GeneratorWord::new(factors),
        });
    }
    Ok(MorphismImage { terms })
}

/// Indices of basis states with zero probe occupation and total at most
/// `n_max - 1`, in basis order. Dropping the probe coordinate maps these
/// states bijectively and order-preservingly onto the basis with one fewer
/// mode and cutoff `n_max - 1`.
pub fn probe_free_indices(basis: &FockBasis, probe: usize) -> Vec<usize> {
    basis
        .states
        .iter()
        .enumerate()
        .filter(|(_, st)| {
            st.occupations[probe] == 0 && (st.total as usize) < basis.n_max.max(1)
        })
        .map(|(i, _)| i)
        .collect()
}

fn check_probe_protocol(basis: &FockBasis, probe: usize) -> Result<()> {
    if basis.n_max == 0 {
        return Err(FockError::CutoffTooSmall {
            needed: 1,
            n_max: 0,
        });
    }
    if probe + 1 != basis.d {
        return Err(FockError::InvalidParameter(format!(
            "the probe must be the last mode ({}), got {}",
            basis.d - 1,
            probe
        )));
    }
    Ok(())
}

/// `a(e_probe) M a*(e_probe)` compressed to probe-free states of total at
/// most `n_max - 1`, with no grading applied.
pub fn probe_compression(m: &CMatrix, basis: &FockBasis, probe: usize) -> Result<CMatrix> {
    check_probe_protocol(basis, probe)?;
    let mut e = CVector::zeros(basis.d);
    e[probe] = C64::new(1.0, 0.0);
    let cre = creation(basis, &e)?.matrix;
    let conjugated = cre.adjoint() * m * cre;
    let keep = probe_free_indices(basis, probe);
    Ok(crate::compress(&conjugated, &keep, &keep))
}

/// Numeric realization of the morphism at the probe mode. Bosonic
/// operators are conjugated directly; fermionic operators are graded first
/// (conjugated by parity), which is what makes annihilating across odd
/// words sign-correct. The result lives on the basis with the probe mode
/// removed and the cutoff lowered by one.
pub fn numeric_morphism(
    t: &FockOperator,
    basis: &FockBasis,
    probe: usize,
) -> Result<FockOperator> {
    if t.signature != basis.signature() {
        return Err(FockError::BasisMismatch);
    }
    check_probe_protocol(basis, probe)?;
    let graded;
    let m = match basis.statistics {
        Statistics::Boson => &t.matrix,
        Statistics::Fermion => {
            let p = parity(basis).matrix;
            graded = &p * &t.matrix * &p;
            &graded
        }
    };
    let compressed = probe_compression(m, basis, probe)?;
    let sub_basis = build_basis(basis.d - 1, basis.n_max - 1, basis.statistics)?;
    if compressed.nrows() != sub_basis.dim() {
        return Err(FockError::BasisMismatch);
    }
    Ok(FockOperator {
        matrix: compressed,
        hermitian: t.hermitian,
        sector_shift: t.sector_shift,
        signature: sub_basis.signature(),
    })
}

/// Evaluate a symbolic image on the probe-free sub-basis: project the
/// tensor legs onto the probe, restrict supports to the remaining modes,
/// and evaluate at cutoff `n_max - 1`. This is the exact comparison target
/// for `numeric_morphism`.
pub fn image_on_sub_basis(
    image: &MorphismImage,
    basis: &FockBasis,
    probe: usize,
) -> Result<FockOperator> {
    check_probe_protocol(basis, probe)?;
    let element = image.project_probe(probe).restrict_modes(basis.d - 1)?;
    let sub_basis = build_basis(basis.d - 1, basis.n_max - 1, basis.statistics)?;
    evaluate(&element, &sub_basis)
}

/// Images of the iterated morphism. Step `k + 1` is the image of step `k`'s
/// descended words (tensor legs are reported per step, not re-entered).
pub fn iterate_morphism(element: &AlgebraElement, k: usize) -> Result<Vec<MorphismImage>> {
    let mut chain = Vec::with_capacity(k);
    let mut current = element.clone();
    for _ in 0..k {
        let image = canonical_image(&current)?;
        current = image.fock_element().pruned();
        chain.push(image);
    }
    Ok(chain)
}

/// First iteration count at which the image vanishes identically, when a
/// number factor forces that to happen; `None` for words that never die
/// symbolically (pure field, Weyl, or `Gamma` words).
pub fn decay_check(element: &AlgebraElement) -> Result<Option<usize>> {
    if element.is_zero() {
        return Ok(Some(0));
    }
    let mut bound = 0usize;
    let mut has_number_factor = false;
    for (_, word) in &element.terms {
        for factor in &word.factors {
            match factor {
                GeneratorFactor::NumberFunction(samples) => {
                    has_number_factor = true;
                    bound = bound.max(samples.len());
                }
                GeneratorFactor::SectorProj(n) => {
                    has_number_factor = true;
                    bound = bound.max(n + 1);
                }
                _ => {}
            }
        }
    }
    if !has_number_factor {
        return Ok(None);
    }
    let mut current = element.clone();
    for k in 1..=bound {
        current = canonical_image(&current)?.fock_element().pruned();
        if current.terms.is_empty() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Defect of multiplicativity at the probe: compares the numeric morphism
/// of a product with the product of the numeric morphisms, compressed to
/// totals at most `n_max - 1 - margin` where `margin` bounds the total
/// sector shift of the factors. For probe-free words the middle sums agree
/// state by state, so the defect is solver noise.
pub fn morphism_multiplicativity_check(
    t1: &FockOperator,
    t2: &FockOperator,
    basis: &FockBasis,
    probe: usize,
    margin: usize,
) -> Result<f64> {
    let product = t1.compose(t2)?;
    let lhs = numeric_morphism(&product, basis, probe)?;
    let m1 = numeric_morphism(t1, basis, probe)?;
    let m2 = numeric_morphism(t2, basis, probe)?;
    let rhs = m1.compose(&m2)?;
    let sub_basis = build_basis(basis.d - 1, basis.n_max - 1, basis.statistics)?;
    let cap = (basis.n_max - 1).saturating_sub(margin);
    let keep: Vec<usize> = sub_basis
        .states
        .iter()
        .enumerate()
        .filter(|(_, st)| st.total as usize <= cap)
        .map(|(i, _)| i)
        .collect();
    let diff = &lhs.matrix - &rhs.matrix;
    Ok(max_abs(&crate::compress(&diff, &keep, &keep)))
}
