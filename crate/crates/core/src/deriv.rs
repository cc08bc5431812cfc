//! Triangular derivations `D = Σ gi ∂/∂xi` with `gi ∈ K[x1..x(i-1)]`.
//!
//! Such derivations are locally nilpotent, so the exponential series
//! `Σ s^k D^k(xi) / k!` is a finite sum and defines a unitriangular
//! automorphism.

use std::fmt;

use num_traits::One;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly::{integer, Degree, Monomial, Polynomial, Rational};
use crate::triaut::{nonzero_int, TriangularAutomorphism};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangularDerivation {
    coeffs: Vec<Polynomial>,
}

impl TriangularDerivation {
    pub fn new(coeffs: Vec<Polynomial>) -> Result<Self> {
        let n = coeffs.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        for (i, g) in coeffs.iter().enumerate() {
            let top = g.max_variable();
            if top > i {
                return Err(Error::NotTriangular {
                    coord: i + 1,
                    detail: if i == 0 {
                        format!("g1 must be constant, got {g}")
                    } else {
                        format!("coefficient {g} mentions x{top}, only x1..x{i} allowed")
                    },
                });
            }
        }
        Ok(TriangularDerivation {
            coeffs: coeffs.into_iter().map(|g| g.promoted(n)).collect(),
        })
    }

    pub fn zero(n: usize) -> Self {
        TriangularDerivation {
            coeffs: vec![Polynomial::zero(n); n],
        }
    }

    /// `∂/∂x_index` in dimension `n`.
    pub fn partial(n: usize, index: usize) -> Self {
        let mut d = Self::zero(n);
        d.coeffs[index - 1] = Polynomial::one(n);
        d
    }

    /// `g·∂/∂x_index`.
    pub fn single(n: usize, index: usize, g: Polynomial) -> Result<Self> {
        let mut coeffs = vec![Polynomial::zero(n); n];
        coeffs[index - 1] = g;
        Self::new(coeffs)
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Polynomial::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> TriangularDerivation {
        TriangularDerivation {
            coeffs: self.coeffs.iter().map(|g| g.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &TriangularDerivation) -> Result<TriangularDerivation> {
        self.check_dim(other)?;
        Ok(TriangularDerivation {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Largest coefficient degree.
    pub fn degree(&self) -> Degree {
        self.coeffs
            .iter()
            .map(Polynomial::total_degree)
            .max()
            .unwrap_or(Degree::NegInfinity)
    }

    fn check_dim(&self, other: &TriangularDerivation) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(())
    }

    /// `D(p) = Σ gi·∂p/∂xi`.
    pub fn apply(&self, p: &Polynomial) -> Result<Polynomial> {
        if p.max_variable() > self.n() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: p.nvars(),
            });
        }
        let p = p.clone().promoted(self.n());
        let mut out = Polynomial::zero(self.n());
        for (i, g) in self.coeffs.iter().enumerate() {
            if g.is_zero() {
                continue;
            }
            let dp = p.partial(i + 1)?;
            if !dp.is_zero() {
                out = &out + &(g * &dp);
            }
        }
        Ok(out)
    }

    /// `[D1, D2]`, whose `i`-th coefficient is `D1(g2_i) − D2(g1_i)`.
    pub fn bracket(&self, other: &TriangularDerivation) -> Result<TriangularDerivation> {
        self.check_dim(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(mine, theirs)| Ok(&self.apply(theirs)? - &other.apply(mine)?))
            .collect::<Result<Vec<_>>>()?;
        TriangularDerivation::new(coeffs)
    }

    /// Least `k` with `D^k(xi) = 0`, for each variable.
    ///
    /// `D^k(xi) = D^(k-1)(gi)`, and `gi` only involves earlier variables, so
    /// the indices are computed bottom-up, each with its own ceiling.
    pub fn variable_indices(&self) -> Result<Vec<usize>> {
        let mut indices: Vec<usize> = Vec::with_capacity(self.n());
        for g in &self.coeffs {
            let ceiling = indices.iter().copied().max().unwrap_or(0);
            let k = self.index_with_ceiling(g, ceiling)?;
            indices.push(k + 1);
        }
        Ok(indices)
    }

    /// Least `k` with `D^k(p) = 0` (0 for `p = 0`).
    pub fn nilpotency_index(&self, p: &Polynomial) -> Result<usize> {
        let ceiling = self.variable_indices()?.into_iter().max().unwrap_or(0);
        self.index_with_ceiling(p, ceiling)
    }

    // A monomial of degree d whose variables are all killed by D^M is killed
    // by D^(d(M-1)+1), hence cap = 1 + deg(p)·M.
    fn index_with_ceiling(&self, p: &Polynomial, var_ceiling: usize) -> Result<usize> {
        let deg = p.total_degree().finite().unwrap_or(0) as usize;
        let cap = 1 + deg * var_ceiling;
        let mut cur = p.clone();
        let mut k = 0;
        while !cur.is_zero() {
            if k >= cap {
                return Err(Error::NilpotencyCap { cap });
            }
            cur = self.apply(&cur)?;
            k += 1;
        }
        Ok(k)
    }

    /// `exp(s·D)(p) = Σ s^k D^k(p) / k!`.
    pub fn exp_apply(&self, s: &Rational, p: &Polynomial) -> Result<Polynomial> {
        let ceiling = self.variable_indices()?.into_iter().max().unwrap_or(0);
        let deg = p.total_degree().finite().unwrap_or(0) as usize;
        let cap = 1 + deg * ceiling;
        let mut out = Polynomial::zero(self.n());
        let mut term = p.clone().promoted(self.n());
        let mut factor = Rational::one();
        let mut k = 0usize;
        while !term.is_zero() {
            if k >= cap {
                return Err(Error::NilpotencyCap { cap });
            }
            out = &out + &term.scale(&factor);
            term = self.apply(&term)?;
            k += 1;
            factor = factor * s / integer(k as i64);
        }
        Ok(out)
    }

    /// The unitriangular automorphism `(exp(s·D)(x1), ..., exp(s·D)(xn))`.
    pub fn exp(&self, s: &Rational) -> Result<TriangularAutomorphism> {
        let n = self.n();
        let coords = (1..=n)
            .map(|i| self.exp_apply(s, &Polynomial::var(i, n)))
            .collect::<Result<Vec<_>>>()?;
        let phi = TriangularAutomorphism::from_coordinates(coords)?;
        debug_assert!(phi.is_unitriangular());
        Ok(phi)
    }
}

/// Canonical text form: `n=<n>` then one `dx<i> <- <gi>` line per coordinate.
impl fmt::Display for TriangularDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n())?;
        for (i, g) in self.coeffs.iter().enumerate() {
            writeln!(f, "dx{} <- {g}", i + 1)?;
        }
        Ok(())
    }
}

pub fn random_derivation_with<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_degree: u32,
    coeff_bound: i64,
    density: f64,
) -> TriangularDerivation {
    let coeffs = (0..n)
        .map(|i| {
            let terms: Vec<(Monomial, Rational)> = Monomial::all_up_to_degree(i, max_degree)
                .into_iter()
                .filter_map(|m| {
                    rng.gen_bool(density)
                        .then(|| (m, nonzero_int(rng, coeff_bound)))
                })
                .collect();
            Polynomial::from_terms(terms, n)
        })
        .collect();
    TriangularDerivation { coeffs }
}

/// Deterministic random triangular derivation with coefficient degree at
/// most `max_degree`.
pub fn random_derivation(
    n: usize,
    max_degree: u32,
    seed: u64,
    coeff_bound: i64,
    density: f64,
) -> TriangularDerivation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_derivation_with(&mut rng, n, max_degree, coeff_bound, density)
}

/// Random small rational with numerator in `[-bound, bound]` and denominator
/// in `1..=3`; used for exponential parameters.
pub(crate) fn small_rational<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> Rational {
    let num = rng.gen_range(-bound..=bound);
    let den = rng.gen_range(1..=3);
    Rational::new(num.into(), den.into())
}

impl TriangularDerivation {
    /// Always true for validated values; kept for checking bracket output.
    pub fn is_triangular(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, g)| g.max_variable() <= i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational;

    fn x(i: usize, n: usize) -> Polynomial {
        Polynomial::var(i, n)
    }

    fn heis_pair() -> (TriangularDerivation, TriangularDerivation) {
        (
            TriangularDerivation::partial(2, 1),
            TriangularDerivation::single(2, 2, x(1, 2)).unwrap(),
        )
    }

    #[test]
    fn make_examples() {
        let d = TriangularDerivation::new(vec![Polynomial::one(2), Polynomial::zero(2)]).unwrap();
        assert_eq!(d, TriangularDerivation::partial(2, 1));
        assert_eq!(d.to_string(), "n=2\ndx1 <- 1\ndx2 <- 0\n");
        let e = TriangularDerivation::new(vec![Polynomial::zero(2), x(1, 2)]).unwrap();
        assert_eq!(e.to_string(), "n=2\ndx1 <- 0\ndx2 <- x1\n");
        let err = TriangularDerivation::new(vec![Polynomial::zero(2), x(2, 2)]).unwrap_err();
        assert!(matches!(err, Error::NotTriangular { coord: 2, .. }));
    }

    #[test]
    fn apply_examples() {
        let (d1, d2) = heis_pair();
        assert_eq!(
            d2.apply(&x(2, 2).pow(2)).unwrap(),
            (&x(1, 2) * &x(2, 2)).scale(&integer(2))
        );
        assert!(d2.apply(&Polynomial::one(2)).unwrap().is_zero());
        assert_eq!(
            d1.apply(&x(1, 2).pow(4)).unwrap(),
            x(1, 2).pow(3).scale(&integer(4))
        );
    }

    #[test]
    fn bracket_examples() {
        let (d1, d2) = heis_pair();
        assert_eq!(
            d1.bracket(&d2).unwrap(),
            TriangularDerivation::partial(2, 2)
        );
        assert!(d2.bracket(&d2).unwrap().is_zero());
        let sq = TriangularDerivation::single(2, 2, x(1, 2).pow(2)).unwrap();
        assert_eq!(
            d1.bracket(&sq).unwrap(),
            TriangularDerivation::single(2, 2, x(1, 2).scale(&integer(2))).unwrap()
        );
        assert!(matches!(
            d1.bracket(&TriangularDerivation::zero(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nilpotency_examples() {
        let (d1, d2) = heis_pair();
        assert_eq!(d2.nilpotency_index(&x(2, 2)).unwrap(), 2);
        assert_eq!(d2.nilpotency_index(&Polynomial::one(2)).unwrap(), 1);
        assert_eq!(d2.nilpotency_index(&Polynomial::zero(2)).unwrap(), 0);
        assert_eq!(d1.nilpotency_index(&x(1, 2).pow(3)).unwrap(), 4);
    }

    #[test]
    fn variable_indices_chain() {
        // ∂1 + x1∂2 + x2∂3: x3 -> x2 -> x1 -> 1 -> 0
        let d = TriangularDerivation::new(vec![Polynomial::one(3), x(1, 3), x(2, 3)]).unwrap();
        assert_eq!(d.variable_indices().unwrap(), vec![2, 3, 4]);
    }

    #[test]
    fn exp_examples() {
        let (d1, d2) = heis_pair();
        let phi = d2.exp(&integer(1)).unwrap();
        assert_eq!(phi.coordinate(1), x(1, 2));
        assert_eq!(phi.coordinate(2), &x(2, 2) + &x(1, 2));
        assert!(d2.exp(&integer(0)).unwrap().is_identity());
        let s = rational(5, 3);
        let t = d1.exp(&s).unwrap();
        assert_eq!(t.coordinate(1), &x(1, 2) + &Polynomial::constant(s, 2));
        assert_eq!(t.coordinate(2), x(2, 2));
    }

    #[test]
    fn exp_of_chain_matches_truncated_series() {
        // D = ∂1 + x1∂2: exp(sD)(x2) = x2 + s·x1 + s²/2
        let d = TriangularDerivation::new(vec![Polynomial::one(2), x(1, 2)]).unwrap();
        let s = rational(2, 3);
        let phi = d.exp(&s).unwrap();
        let expected =
            &(&x(2, 2) + &x(1, 2).scale(&s)) + &Polynomial::constant(&s * &s / integer(2), 2);
        assert_eq!(phi.coordinate(2), expected);
    }

    #[test]
    fn random_derivations_are_triangular() {
        for seed in 0..30 {
            let d = random_derivation(4, 2, seed, 3, 0.6);
            assert!(d.is_triangular());
            assert!(d.degree().at_most(2));
        }
        assert_eq!(
            random_derivation(3, 2, 8, 3, 0.5),
            random_derivation(3, 2, 8, 3, 0.5)
        );
    }
}
