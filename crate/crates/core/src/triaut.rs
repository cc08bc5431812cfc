//! Triangular automorphisms of affine n-space.
//!
//! A triangular automorphism is a tuple `(f1, ..., fn)` with
//! `fi = λi·xi + hi`, `λi ≠ 0` and `hi` a polynomial in `x1..x(i-1)`
//! (so `h1` is a constant).
//!
//! Composition follows one convention throughout the crate:
//! `outer.compose(&inner)` substitutes the coordinates of `inner` into those
//! of `outer`, i.e. coordinate `j` of the result is
//! `μ'j·μj·xj + μ'j·pj + p'j(inner)`.

use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly::{fmt_rational, integer, Degree, Monomial, Polynomial, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangularAutomorphism {
    lambdas: Vec<Rational>,
    tails: Vec<Polynomial>,
}

/// The set 𝒯(m) of triangular automorphisms of `n`-space whose coordinates
/// all have degree at most `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeClass {
    pub n: usize,
    pub m: u32,
}

impl DegreeClass {
    pub fn new(n: usize, m: u32) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "degree class needs n >= 1 and m >= 1, got n={n}, m={m}"
            )));
        }
        Ok(DegreeClass { n, m })
    }

    pub fn contains(&self, phi: &TriangularAutomorphism) -> bool {
        phi.n() == self.n && phi.degree() <= self.m
    }

    /// `m^(n-1)`, the degree bound for the group generated by 𝒯(m).
    pub fn generated_bound(&self) -> u32 {
        self.m.pow(self.n as u32 - 1)
    }
}

fn check_tail(coord: usize, tail: &Polynomial) -> Result<()> {
    let top = tail.max_variable();
    if top >= coord {
        return Err(Error::NotTriangular {
            coord,
            detail: if coord == 1 {
                format!("h1 must be constant, got {tail}")
            } else {
                format!(
                    "tail {tail} mentions x{top}, only x1..x{} allowed",
                    coord - 1
                )
            },
        });
    }
    Ok(())
}

impl TriangularAutomorphism {
    /// Validated constructor from the diagonal scalars and tails.
    pub fn new(lambdas: Vec<Rational>, tails: Vec<Polynomial>) -> Result<Self> {
        let n = lambdas.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        if tails.len() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: tails.len(),
            });
        }
        for (i, (lambda, tail)) in lambdas.iter().zip(&tails).enumerate() {
            if lambda.is_zero() {
                return Err(Error::ZeroScale { coord: i + 1 });
            }
            check_tail(i + 1, tail)?;
        }
        let tails = tails.into_iter().map(|t| t.promoted(n)).collect();
        Ok(TriangularAutomorphism { lambdas, tails })
    }

    /// Splits each `fi` into `λi·xi + hi`, rejecting anything non-triangular.
    pub fn from_coordinates(coords: Vec<Polynomial>) -> Result<Self> {
        let n = coords.len();
        let mut lambdas = Vec::with_capacity(n);
        let mut tails = Vec::with_capacity(n);
        for (i, f) in coords.into_iter().enumerate() {
            let coord = i + 1;
            let xi = Monomial::var(coord);
            let lambda = f.coefficient(&xi);
            if lambda.is_zero() {
                return Err(Error::ZeroScale { coord });
            }
            let tail = &f - &Polynomial::term(lambda.clone(), xi, n);
            check_tail(coord, &tail)?;
            lambdas.push(lambda);
            tails.push(tail);
        }
        Self::new(lambdas, tails)
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        TriangularAutomorphism {
            lambdas: vec![Rational::one(); n],
            tails: vec![Polynomial::zero(n); n],
        }
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[Rational] {
        &self.lambdas
    }

    pub fn tails(&self) -> &[Polynomial] {
        &self.tails
    }

    /// `f_index` (1-based) as a polynomial.
    pub fn coordinate(&self, index: usize) -> Polynomial {
        let n = self.n();
        &self.tails[index - 1]
            + &Polynomial::term(self.lambdas[index - 1].clone(), Monomial::var(index), n)
    }

    pub fn coordinates(&self) -> Vec<Polynomial> {
        (1..=self.n()).map(|i| self.coordinate(i)).collect()
    }

    /// `self ∘ inner`: coordinate `j` is `self_j(inner_1, ..., inner_n)`.
    pub fn compose(&self, inner: &TriangularAutomorphism) -> Result<TriangularAutomorphism> {
        let n = self.n();
        if inner.n() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: inner.n(),
            });
        }
        let inner_coords = inner.coordinates();
        let mut lambdas = Vec::with_capacity(n);
        let mut tails = Vec::with_capacity(n);
        for j in 0..n {
            let mu_outer = &self.lambdas[j];
            lambdas.push(mu_outer * &inner.lambdas[j]);
            let shifted = self.tails[j].substitute(&inner_coords)?;
            tails.push(&inner.tails[j].scale(mu_outer) + &shifted.promoted(n));
        }
        Ok(TriangularAutomorphism { lambdas, tails })
    }

    /// Two-sided inverse by back-substitution:
    /// `gi = λi⁻¹·(xi − hi(g1, ..., g(i-1)))`.
    pub fn inverse(&self) -> TriangularAutomorphism {
        let n = self.n();
        let mut lambdas = Vec::with_capacity(n);
        let mut tails: Vec<Polynomial> = Vec::with_capacity(n);
        let mut coords: Vec<Polynomial> = Vec::with_capacity(n);
        for i in 0..n {
            let inv = self.lambdas[i].recip();
            // hi only reads x1..x(i-1); pad the image list with the remaining variables
            let mut images = coords.clone();
            images.extend((i + 1..=n).map(|k| Polynomial::var(k, n)));
            let shifted = self.tails[i]
                .substitute(&images)
                .expect("image list covers every variable")
                .promoted(n);
            let tail = (-&shifted).scale(&inv);
            coords.push(&tail + &Polynomial::term(inv.clone(), Monomial::var(i + 1), n));
            lambdas.push(inv);
            tails.push(tail);
        }
        TriangularAutomorphism { lambdas, tails }
    }

    /// `self^k`; negative powers use the inverse.
    pub fn pow(&self, k: i64) -> TriangularAutomorphism {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = TriangularAutomorphism::identity(self.n());
        for _ in 0..k.unsigned_abs() {
            acc = base.compose(&acc).expect("same dimension");
        }
        acc
    }

    /// Maximum total degree of the coordinates; at least 1.
    pub fn degree(&self) -> u32 {
        self.tails
            .iter()
            .map(Polynomial::total_degree)
            .max()
            .and_then(Degree::finite)
            .unwrap_or(0)
            .max(1)
    }

    /// `φ·ψ·φ⁻¹·ψ⁻¹`.
    pub fn commutator(&self, other: &TriangularAutomorphism) -> Result<TriangularAutomorphism> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        self.compose(other)?
            .compose(&self.inverse())?
            .compose(&other.inverse())
    }

    pub fn is_identity(&self) -> bool {
        self.is_unitriangular() && self.tails.iter().all(Polynomial::is_zero)
    }

    pub fn is_unitriangular(&self) -> bool {
        self.lambdas.iter().all(One::is_one)
    }

    /// Whether `fi = xi` for every `i <= s`.
    pub fn fixes_prefix(&self, s: usize) -> bool {
        s <= self.n()
            && self.lambdas[..s].iter().all(One::is_one)
            && self.tails[..s].iter().all(Polynomial::is_zero)
    }

    /// Factors `self` into elementary maps whose ordered composition
    /// (first factor outermost) is `self`.
    ///
    /// Coordinate `i` contributes one shear per tail monomial, in term order,
    /// followed by its scaling when `λi ≠ 1`. Coordinates are emitted from
    /// `1` to `n`, which realizes `self = τ1·τ2·…·τn` with `τi` touching only
    /// coordinate `i`.
    pub fn elementary_factorization(&self) -> Vec<Elementary> {
        let mut out = Vec::new();
        for (i, (lambda, tail)) in self.lambdas.iter().zip(&self.tails).enumerate() {
            for (m, c) in tail.terms() {
                out.push(Elementary::Shear {
                    coord: i + 1,
                    coeff: c.clone(),
                    monomial: m.clone(),
                });
            }
            if !lambda.is_one() {
                out.push(Elementary::Scale {
                    coord: i + 1,
                    lambda: lambda.clone(),
                });
            }
        }
        out
    }
}

/// Canonical text form: `n=<n>` then one `x<i> -> <fi>` line per coordinate.
impl fmt::Display for TriangularAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n())?;
        for i in 1..=self.n() {
            writeln!(f, "x{i} -> {}", self.coordinate(i))?;
        }
        Ok(())
    }
}

/// An automorphism changing a single coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Elementary {
    /// `x_coord ↦ λ·x_coord`
    Scale { coord: usize, lambda: Rational },
    /// `x_coord ↦ x_coord + c·x^α`, `x^α` in the earlier variables
    Shear {
        coord: usize,
        coeff: Rational,
        monomial: Monomial,
    },
}

impl Elementary {
    pub fn coord(&self) -> usize {
        match self {
            Elementary::Scale { coord, .. } | Elementary::Shear { coord, .. } => *coord,
        }
    }

    pub fn to_automorphism(&self, n: usize) -> TriangularAutomorphism {
        let mut phi = TriangularAutomorphism::identity(n);
        match self {
            Elementary::Scale { coord, lambda } => phi.lambdas[coord - 1] = lambda.clone(),
            Elementary::Shear {
                coord,
                coeff,
                monomial,
            } => phi.tails[coord - 1] = Polynomial::term(coeff.clone(), monomial.clone(), n),
        }
        phi
    }
}

impl fmt::Display for Elementary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elementary::Scale { coord, lambda } => {
                write!(f, "scale x{coord} by ")?;
                fmt_rational(lambda, f)
            }
            Elementary::Shear {
                coord,
                coeff,
                monomial,
            } => {
                let term = Polynomial::term(coeff.clone(), monomial.clone(), 0);
                write!(f, "shear x{coord} += {term}")
            }
        }
    }
}

/// Parameters for sampling elements of 𝒯(m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleParams {
    pub n: usize,
    pub m: u32,
    /// coefficients and `λi` are nonzero integers in `[-coeff_bound, coeff_bound]`
    pub coeff_bound: i64,
    /// inclusion probability of each candidate tail monomial
    pub density: f64,
}

impl SampleParams {
    pub fn new(n: usize, m: u32) -> Self {
        SampleParams {
            n,
            m,
            coeff_bound: 3,
            density: 0.5,
        }
    }

    pub fn with_coeff_bound(mut self, coeff_bound: i64) -> Self {
        self.coeff_bound = coeff_bound;
        self
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }
}

pub(crate) fn nonzero_int<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> Rational {
    let bound = bound.max(1);
    let mag = rng.gen_range(1..=bound);
    integer(if rng.gen_bool(0.5) { mag } else { -mag })
}

pub fn random_triangular_with<R: Rng + ?Sized>(
    rng: &mut R,
    params: &SampleParams,
) -> TriangularAutomorphism {
    let n = params.n;
    let mut lambdas = Vec::with_capacity(n);
    let mut tails = Vec::with_capacity(n);
    for i in 0..n {
        lambdas.push(nonzero_int(rng, params.coeff_bound));
        let terms: Vec<_> = Monomial::all_up_to_degree(i, params.m)
            .into_iter()
            .filter_map(|mono| {
                rng.gen_bool(params.density)
                    .then(|| (mono, nonzero_int(rng, params.coeff_bound)))
            })
            .collect();
        tails.push(Polynomial::from_terms(terms, n));
    }
    TriangularAutomorphism { lambdas, tails }
}

/// Deterministic sample from 𝒯(m).
pub fn random_triangular(
    n: usize,
    m: u32,
    seed: u64,
    coeff_bound: i64,
    density: f64,
) -> TriangularAutomorphism {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = SampleParams {
        n,
        m,
        coeff_bound,
        density,
    };
    random_triangular_with(&mut rng, &params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational;

    fn x(i: usize, n: usize) -> Polynomial {
        Polynomial::var(i, n)
    }

    pub(crate) fn example_map() -> TriangularAutomorphism {
        TriangularAutomorphism::new(
            vec![integer(1), integer(1), integer(1)],
            vec![Polynomial::zero(3), x(1, 3).pow(2), x(2, 3).pow(2)],
        )
        .unwrap()
    }

    #[test]
    fn make_example_map() {
        let phi = example_map();
        assert_eq!(
            phi.to_string(),
            "n=3\nx1 -> x1\nx2 -> x2 + x1^2\nx3 -> x3 + x2^2\n"
        );
        assert_eq!(phi.degree(), 2);
        assert!(phi.is_unitriangular());
    }

    #[test]
    fn make_rejects_non_triangular_tails() {
        let err = TriangularAutomorphism::new(
            vec![integer(1), integer(1)],
            vec![Polynomial::zero(2), x(2, 2)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotTriangular { coord: 2, .. }));

        let err = TriangularAutomorphism::new(vec![integer(1)], vec![x(1, 1)]).unwrap_err();
        assert!(matches!(err, Error::NotTriangular { coord: 1, .. }));

        let err = TriangularAutomorphism::new(
            vec![integer(1), integer(0)],
            vec![Polynomial::zero(2), Polynomial::zero(2)],
        )
        .unwrap_err();
        assert_eq!(err, Error::ZeroScale { coord: 2 });
    }

    #[test]
    fn make_affine_line() {
        let phi = TriangularAutomorphism::new(
            vec![integer(2)],
            vec![Polynomial::constant(rational(1, 2), 1)],
        )
        .unwrap();
        assert_eq!(phi.coordinate(1).to_string(), "1/2 + 2*x1");
    }

    #[test]
    fn identity_basics() {
        assert_eq!(
            TriangularAutomorphism::identity(1).to_string(),
            "n=1\nx1 -> x1\n"
        );
        let id3 = TriangularAutomorphism::identity(3);
        assert_eq!(id3.to_string(), "n=3\nx1 -> x1\nx2 -> x2\nx3 -> x3\n");
        assert_eq!(id3.degree(), 1);
        assert!(id3.fixes_prefix(3));
    }

    #[test]
    fn square_of_example_map() {
        let phi = example_map();
        let sq = phi.compose(&phi).unwrap();
        let coords: Vec<String> = sq.coordinates().iter().map(ToString::to_string).collect();
        assert_eq!(
            coords,
            ["x1", "x2 + 2*x1^2", "x3 + 2*x2^2 + 2*x1^2*x2 + x1^4"]
        );
        assert_eq!(sq.degree(), 4);
    }

    #[test]
    fn compose_matches_full_substitution() {
        let a = random_triangular(3, 2, 11, 3, 0.6);
        let b = random_triangular(3, 2, 12, 3, 0.6);
        let ab = a.compose(&b).unwrap();
        let inner = b.coordinates();
        for j in 1..=3 {
            assert_eq!(
                ab.coordinate(j),
                a.coordinate(j).substitute(&inner).unwrap()
            );
        }
    }

    #[test]
    fn compose_dimension_mismatch() {
        let err = TriangularAutomorphism::identity(2)
            .compose(&TriangularAutomorphism::identity(3))
            .unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn inverse_examples() {
        let shear = TriangularAutomorphism::new(
            vec![integer(1), integer(1)],
            vec![Polynomial::zero(2), x(1, 2).pow(2)],
        )
        .unwrap();
        assert_eq!(shear.inverse().coordinate(2).to_string(), "x2 - x1^2");

        let phi = example_map();
        let inv = phi.inverse();
        let expected3 = &x(3, 3) - &(&x(2, 3) - &x(1, 3).pow(2)).pow(2);
        assert_eq!(inv.coordinate(3), expected3);
        assert!(phi.compose(&inv).unwrap().is_identity());
        assert!(inv.compose(&phi).unwrap().is_identity());

        let affine = TriangularAutomorphism::new(
            vec![integer(2)],
            vec![Polynomial::constant(integer(1), 1)],
        )
        .unwrap();
        assert_eq!(affine.inverse().coordinate(1).to_string(), "-1/2 + 1/2*x1");
    }

    #[test]
    fn commutator_examples() {
        let phi = example_map();
        assert!(phi.commutator(&phi).unwrap().is_identity());
        assert!(phi
            .commutator(&TriangularAutomorphism::identity(3))
            .unwrap()
            .is_identity());

        let scale =
            TriangularAutomorphism::new(vec![integer(2)], vec![Polynomial::zero(1)]).unwrap();
        let shift = TriangularAutomorphism::new(
            vec![integer(1)],
            vec![Polynomial::constant(integer(1), 1)],
        )
        .unwrap();
        let c = scale.commutator(&shift).unwrap();
        assert_eq!(c.coordinate(1).to_string(), "1 + x1");
    }

    #[test]
    fn prefix_and_unitriangular_predicates() {
        let phi = TriangularAutomorphism::new(
            vec![integer(2), integer(1)],
            vec![Polynomial::zero(2), Polynomial::zero(2)],
        )
        .unwrap();
        assert!(phi.fixes_prefix(0));
        assert!(!phi.fixes_prefix(1));
        assert!(!phi.is_unitriangular());
        assert!(!phi.fixes_prefix(5));
    }

    #[test]
    fn factorization_examples() {
        let shear = TriangularAutomorphism::new(
            vec![integer(1), integer(1)],
            vec![Polynomial::zero(2), x(1, 2).pow(2)],
        )
        .unwrap();
        let f = shear.elementary_factorization();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].to_string(), "shear x2 += x1^2");

        assert!(TriangularAutomorphism::identity(4)
            .elementary_factorization()
            .is_empty());

        let phi = example_map();
        let f = phi.elementary_factorization();
        let printed: Vec<String> = f.iter().map(ToString::to_string).collect();
        assert_eq!(printed, ["shear x2 += x1^2", "shear x3 += x2^2"]);
        let product = f
            .iter()
            .rev()
            .fold(TriangularAutomorphism::identity(3), |acc, e| {
                e.to_automorphism(3).compose(&acc).unwrap()
            });
        assert_eq!(product, phi);
    }

    #[test]
    fn factorization_with_scalings_round_trips() {
        for seed in 0..40 {
            let phi = random_triangular(3, 2, seed, 3, 0.5);
            let factors = phi.elementary_factorization();
            let nterms: usize = phi.tails().iter().map(Polynomial::num_terms).sum();
            assert!(factors.len() <= 3 + nterms);
            let product = factors
                .iter()
                .fold(TriangularAutomorphism::identity(3), |acc, e| {
                    acc.compose(&e.to_automorphism(3)).unwrap()
                });
            assert_eq!(product, phi, "seed {seed}");
        }
    }

    #[test]
    fn random_generator_is_deterministic_and_bounded() {
        let a = random_triangular(4, 3, 99, 4, 0.4);
        let b = random_triangular(4, 3, 99, 4, 0.4);
        assert_eq!(a, b);
        for seed in 0..50 {
            assert!(random_triangular(4, 2, seed, 3, 0.7).degree() <= 2);
        }
        let line = random_triangular(1, 3, 5, 3, 1.0);
        assert!(line.tails()[0].is_constant());
        assert_eq!(line.degree(), 1);
    }

    #[test]
    fn pow_and_negative_pow() {
        let phi = example_map();
        assert_eq!(phi.pow(2), phi.compose(&phi).unwrap());
        assert!(phi.pow(3).compose(&phi.pow(-3)).unwrap().is_identity());
        assert!(phi.pow(0).is_identity());
    }

    #[test]
    fn degree_class_membership() {
        let class = DegreeClass::new(3, 2).unwrap();
        assert!(class.contains(&example_map()));
        assert!(!class.contains(&example_map().pow(2)));
        assert_eq!(class.generated_bound(), 4);
        assert!(DegreeClass::new(3, 0).is_err());
    }
}
