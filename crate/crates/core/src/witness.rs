//! Randomized and exhaustive checks of the structural results on triangular
//! automorphisms: the degree bound for generated groups, the derived series
//! of the triangular group, unipotency of groups generated by exponentials
//! of triangular derivations, and the non-connected counterexample.
//!
//! Every harness is deterministic in its seed. Trials run in parallel, each
//! with its own ChaCha stream, and results are merged in trial order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::deriv::{small_rational, TriangularDerivation};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial, Rational};
use crate::triaut::{random_triangular_with, DegreeClass, SampleParams, TriangularAutomorphism};

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Letter {
    pub label: String,
    pub inverse: bool,
}

impl Letter {
    pub fn new(label: impl Into<String>, inverse: bool) -> Self {
        Letter {
            label: label.into(),
            inverse,
        }
    }
}

/// A formal word in labeled generators and their inverses. Evaluation
/// composes the letters with the first letter outermost.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct GroupWord {
    pub letters: Vec<Letter>,
}

impl GroupWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        GroupWord { letters }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Word with every letter positive, e.g. `GroupWord::of(&["A", "B"])`.
    pub fn of(labels: &[&str]) -> Self {
        GroupWord {
            letters: labels.iter().map(|l| Letter::new(*l, false)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        GroupWord { letters }
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&l.label)?;
            if l.inverse {
                f.write_str("^-1")?;
            }
        }
        Ok(())
    }
}

/// Generators by label, with cached inverses.
#[derive(Debug, Clone)]
pub struct GeneratorTable {
    n: usize,
    entries: BTreeMap<String, (TriangularAutomorphism, TriangularAutomorphism)>,
}

impl GeneratorTable {
    pub fn new(n: usize) -> Self {
        GeneratorTable {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, label: impl Into<String>, phi: TriangularAutomorphism) -> Result<()> {
        if phi.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: phi.n(),
            });
        }
        let inv = phi.inverse();
        self.entries.insert(label.into(), (phi, inv));
        Ok(())
    }

    pub fn labels(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest generator degree.
    pub fn max_degree(&self) -> u32 {
        self.entries
            .values()
            .map(|(g, _)| g.degree())
            .max()
            .unwrap_or(1)
    }

    pub fn letter(&self, letter: &Letter) -> Result<&TriangularAutomorphism> {
        let (g, inv) = self
            .entries
            .get(&letter.label)
            .ok_or_else(|| Error::UnknownLabel(letter.label.clone()))?;
        Ok(if letter.inverse { inv } else { g })
    }

    /// Ordered composition of the letters; the empty word is the identity.
    pub fn evaluate(&self, word: &GroupWord) -> Result<TriangularAutomorphism> {
        // fold from the right: substituting the running product into a single
        // generator is far cheaper than the reverse
        let mut acc = TriangularAutomorphism::identity(self.n);
        for letter in word.letters.iter().rev() {
            acc = self.letter(letter)?.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Generators in the canonical automorphism text form, by label.
    pub fn printed(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(k, (g, _))| (k.clone(), g.to_string()))
            .collect()
    }
}

/// How adjacent letters may cancel when enumerating reduced words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    /// free generators with inverses; `g g^-1` and `g^-1 g` are excluded
    Free,
    /// every generator is its own inverse; only positive letters are used and
    /// `g g` is excluded
    Involutive,
}

/// All reduced words of length at most `max_len`, by increasing length.
pub fn reduced_words(labels: &[String], max_len: usize, reduction: Reduction) -> Vec<GroupWord> {
    let alphabet: Vec<Letter> = match reduction {
        Reduction::Free => labels
            .iter()
            .flat_map(|l| [Letter::new(l.clone(), false), Letter::new(l.clone(), true)])
            .collect(),
        Reduction::Involutive => labels
            .iter()
            .map(|l| Letter::new(l.clone(), false))
            .collect(),
    };
    let cancels = |a: &Letter, b: &Letter| match reduction {
        Reduction::Free => a.label == b.label && a.inverse != b.inverse,
        Reduction::Involutive => a.label == b.label,
    };
    let mut out = vec![GroupWord::empty()];
    let mut frontier = vec![GroupWord::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for a in &alphabet {
                if w.letters.last().is_some_and(|last| cancels(last, a)) {
                    continue;
                }
                let mut letters = w.letters.clone();
                letters.push(a.clone());
                next.push(GroupWord { letters });
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn random_word<R: Rng + ?Sized>(rng: &mut R, labels: &[String], max_len: usize) -> GroupWord {
    let len = rng.gen_range(1..=max_len.max(1));
    let letters = (0..len)
        .map(|_| {
            let label = labels[rng.gen_range(0..labels.len())].clone();
            Letter::new(label, rng.gen_bool(0.5))
        })
        .collect();
    GroupWord { letters }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub n: usize,
    pub m: u32,
    pub trials: usize,
    pub max_word_len: usize,
    pub max_degree_observed: u32,
    pub bound: u32,
    pub witness_word: String,
    pub witness_generators: BTreeMap<String, String>,
    pub witness_result: String,
}

/// Configuration for [`degree_fuzz`]-style runs over freshly sampled
/// generators from 𝒯(m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeFuzz {
    pub class: DegreeClass,
    pub max_word_len: usize,
    pub trials: usize,
    pub seed: u64,
    pub generators_per_trial: usize,
    pub coeff_bound: i64,
    pub density: f64,
}

impl DegreeFuzz {
    pub fn new(n: usize, m: u32, max_word_len: usize, trials: usize, seed: u64) -> Result<Self> {
        if max_word_len == 0 || trials == 0 {
            return Err(Error::InvalidParameter(
                "word length and trial count must be positive".into(),
            ));
        }
        Ok(DegreeFuzz {
            class: DegreeClass::new(n, m)?,
            max_word_len,
            trials,
            seed,
            generators_per_trial: 3,
            coeff_bound: 2,
            density: 0.5,
        })
    }

    fn trial(&self, t: usize) -> (GeneratorTable, GroupWord) {
        let mut rng = trial_rng(self.seed, t as u64);
        let params = SampleParams::new(self.class.n, self.class.m)
            .with_coeff_bound(self.coeff_bound)
            .with_density(self.density);
        let mut table = GeneratorTable::new(self.class.n);
        for k in 0..self.generators_per_trial.max(1) {
            let g = random_triangular_with(&mut rng, &params);
            table
                .insert(format!("g{}", k + 1), g)
                .expect("same dimension");
        }
        let word = random_word(&mut rng, &table.labels(), self.max_word_len);
        (table, word)
    }

    pub fn run(&self) -> Result<FuzzReport> {
        let degrees = (0..self.trials)
            .into_par_iter()
            .map(|t| {
                let (table, word) = self.trial(t);
                table.evaluate(&word).map(|phi| phi.degree())
            })
            .collect::<Result<Vec<u32>>>()?;
        let (best, _) = first_max(&degrees);
        let (table, word) = self.trial(best);
        finish_fuzz(
            self.class,
            self.trials,
            self.max_word_len,
            degrees[best],
            &table,
            &word,
        )
    }
}

// index of the first maximum
fn first_max(values: &[u32]) -> (usize, u32) {
    values.iter().enumerate().fold(
        (0, 0),
        |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
    )
}

fn finish_fuzz(
    class: DegreeClass,
    trials: usize,
    max_word_len: usize,
    max_degree: u32,
    table: &GeneratorTable,
    word: &GroupWord,
) -> Result<FuzzReport> {
    let bound = class.generated_bound();
    let result = table.evaluate(word)?;
    if max_degree > bound {
        return Err(Error::PropertyViolation(format!(
            "word {word} over 𝒯({}) in dimension {} has degree {max_degree} > {bound}",
            class.m, class.n
        )));
    }
    Ok(FuzzReport {
        n: class.n,
        m: class.m,
        trials,
        max_word_len,
        max_degree_observed: max_degree,
        bound,
        witness_word: word.to_string(),
        witness_generators: table.printed(),
        witness_result: result.to_string(),
    })
}

/// Samples words of length at most `max_word_len` in random elements of
/// 𝒯(m) and their inverses, and checks every product has degree at most
/// `m^(n-1)`. A violation is a hard error.
pub fn degree_fuzz(
    n: usize,
    m: u32,
    max_word_len: usize,
    trials: usize,
    seed: u64,
) -> Result<FuzzReport> {
    DegreeFuzz::new(n, m, max_word_len, trials, seed)?.run()
}

/// Like [`degree_fuzz`] but over a fixed generator table; `m` is the largest
/// generator degree.
pub fn degree_fuzz_table(
    table: &GeneratorTable,
    max_word_len: usize,
    trials: usize,
    seed: u64,
) -> Result<FuzzReport> {
    if table.is_empty() || max_word_len == 0 || trials == 0 {
        return Err(Error::InvalidParameter(
            "need generators, a positive word length and a positive trial count".into(),
        ));
    }
    let class = DegreeClass::new(table.n(), table.max_degree())?;
    let labels = table.labels();
    let sample = |t: usize| random_word(&mut trial_rng(seed, t as u64), &labels, max_word_len);
    let degrees = (0..trials)
        .into_par_iter()
        .map(|t| table.evaluate(&sample(t)).map(|phi| phi.degree()))
        .collect::<Result<Vec<u32>>>()?;
    let (best, _) = first_max(&degrees);
    finish_fuzz(
        class,
        trials,
        max_word_len,
        degrees[best],
        table,
        &sample(best),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivedDepthReport {
    pub n: usize,
    pub depth: usize,
    pub trials: usize,
    /// every sample fixed `x1..x(depth-1)`
    pub fixed_prefix: usize,
    pub all_unitriangular: bool,
    pub identity_count: usize,
    pub max_degree: u32,
}

fn iterated_commutator<R: Rng + ?Sized>(
    rng: &mut R,
    params: &SampleParams,
    depth: usize,
) -> TriangularAutomorphism {
    if depth == 0 {
        return random_triangular_with(rng, params);
    }
    let a = iterated_commutator(rng, params, depth - 1);
    let b = iterated_commutator(rng, params, depth - 1);
    a.commutator(&b).expect("same dimension")
}

/// Samples depth-`depth` iterated commutators of random triangular
/// automorphisms (depth 1 = `[φ, ψ]`, depth d+1 = commutator of two depth-d
/// samples) and checks they are unitriangular and fix `x1..x(depth-1)`.
/// At depth `n+1` every sample must be the identity.
pub fn derived_depth_test(
    n: usize,
    depth: usize,
    trials: usize,
    seed: u64,
) -> Result<DerivedDepthReport> {
    if n == 0 || depth == 0 || depth > n + 1 || trials == 0 {
        return Err(Error::InvalidParameter(format!(
            "need n >= 1, 1 <= depth <= n+1 and trials >= 1, got n={n}, depth={depth}, trials={trials}"
        )));
    }
    let params = SampleParams::new(n, 2)
        .with_coeff_bound(2)
        .with_density(0.5);
    let samples: Vec<TriangularAutomorphism> = (0..trials)
        .into_par_iter()
        .map(|t| iterated_commutator(&mut trial_rng(seed, t as u64), &params, depth))
        .collect();
    let fixed_prefix = depth - 1;
    for (t, phi) in samples.iter().enumerate() {
        if !phi.is_unitriangular() {
            return Err(Error::PropertyViolation(format!(
                "trial {t}: depth-{depth} commutator is not unitriangular:\n{phi}"
            )));
        }
        if !phi.fixes_prefix(fixed_prefix) {
            return Err(Error::PropertyViolation(format!(
                "trial {t}: depth-{depth} commutator moves one of x1..x{fixed_prefix}:\n{phi}"
            )));
        }
        if depth == n + 1 && !phi.is_identity() {
            return Err(Error::PropertyViolation(format!(
                "trial {t}: depth-{depth} commutator in dimension {n} is not the identity:\n{phi}"
            )));
        }
    }
    Ok(DerivedDepthReport {
        n,
        depth,
        trials,
        fixed_prefix,
        all_unitriangular: true,
        identity_count: samples.iter().filter(|p| p.is_identity()).count(),
        max_degree: samples
            .iter()
            .map(TriangularAutomorphism::degree)
            .max()
            .unwrap_or(1),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnipotentReport {
    pub n: usize,
    pub generators: usize,
    pub trials: usize,
    pub max_word_len: usize,
    pub all_unitriangular: bool,
    pub max_degree: u32,
}

/// Samples products `exp(s1·D_i1)···exp(sk·D_ik)` with `k <= max_word_len`
/// and small rational `sj`, and checks each is unitriangular.
pub fn unipotent_generation_test(
    derivations: &[TriangularDerivation],
    max_word_len: usize,
    trials: usize,
    seed: u64,
) -> Result<UnipotentReport> {
    let n = derivations
        .first()
        .map(TriangularDerivation::n)
        .ok_or_else(|| Error::InvalidParameter("need at least one derivation".into()))?;
    if let Some(d) = derivations.iter().find(|d| d.n() != n) {
        return Err(Error::DimensionMismatch {
            left: n,
            right: d.n(),
        });
    }
    if max_word_len == 0 || trials == 0 {
        return Err(Error::InvalidParameter(
            "word length and trial count must be positive".into(),
        ));
    }
    let products = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let len = rng.gen_range(1..=max_word_len);
            let factors = (0..len)
                .map(|_| {
                    let d = &derivations[rng.gen_range(0..derivations.len())];
                    let s = small_rational(&mut rng, 4);
                    d.exp(&s)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut acc = TriangularAutomorphism::identity(n);
            for f in factors.iter().rev() {
                acc = f.compose(&acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    for (t, phi) in products.iter().enumerate() {
        if !phi.is_unitriangular() {
            return Err(Error::PropertyViolation(format!(
                "trial {t}: product of exponentials is not unitriangular:\n{phi}"
            )));
        }
    }
    Ok(UnipotentReport {
        n,
        generators: derivations.len(),
        trials,
        max_word_len,
        all_unitriangular: true,
        max_degree: products
            .iter()
            .map(TriangularAutomorphism::degree)
            .max()
            .unwrap_or(1),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DetOneLevel {
    /// words of length at most this
    pub max_len: usize,
    /// distinct `k` with `(1, k(a-b); 0, 1)` reached, ascending
    pub ks: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonconnectedReport {
    pub a: String,
    pub b: String,
    pub max_word_len: usize,
    pub generator_a: String,
    pub generator_b: String,
    pub words_enumerated: usize,
    pub distinct_elements: usize,
    pub det_one_ks: Vec<i64>,
    pub levels: Vec<DetOneLevel>,
}

/// The 2×2 matrix `(1, c; 0, -1)` as a triangular automorphism after
/// reversing the variable order: `(-y1, y2 + c·y1)`. Matrix products then
/// match [`TriangularAutomorphism::compose`].
pub fn order_two_generator(c: &Rational) -> TriangularAutomorphism {
    TriangularAutomorphism::new(
        vec![
            -Rational::from_integer(1.into()),
            Rational::from_integer(1.into()),
        ],
        vec![Polynomial::zero(2), Polynomial::var(1, 2).scale(c)],
    )
    .expect("valid triangular data")
}

fn unipotent_parameter(phi: &TriangularAutomorphism) -> Option<Rational> {
    // (y1, y2 + t·y1) corresponds to the matrix (1, t; 0, 1)
    let t = phi.tails()[1].coefficient(&Monomial::var(1));
    let shape = Polynomial::var(1, 2).scale(&t);
    (phi.is_unitriangular() && phi.tails()[0].is_zero() && phi.tails()[1] == shape).then_some(t)
}

/// Enumerates the reduced words of length at most `max_word_len` in the
/// order-two generators `A = (1, a; 0, -1)` and `B = (1, b; 0, -1)`, and
/// collects the determinant-one elements they produce. Each must be
/// `(1, k(a-b); 0, 1)` with `k` an integer, and the number of distinct ones
/// must grow strictly at every even length.
pub fn nonconnected_counterexample(
    a: &Rational,
    b: &Rational,
    max_word_len: usize,
) -> Result<NonconnectedReport> {
    let diff = a - b;
    if diff.is_zero() {
        return Err(Error::InvalidParameter(
            "a and b must differ; equal parameters give a single subgroup of order two".into(),
        ));
    }
    let mut table = GeneratorTable::new(2);
    table.insert("A", order_two_generator(a))?;
    table.insert("B", order_two_generator(b))?;
    for label in ["A", "B"] {
        if !table
            .evaluate(&GroupWord::of(&[label, label]))?
            .is_identity()
        {
            return Err(Error::PropertyViolation(format!(
                "{label}·{label} is not the identity"
            )));
        }
    }

    let words = reduced_words(&table.labels(), max_word_len, Reduction::Involutive);
    let mut distinct = BTreeSet::new();
    let mut first_len: BTreeMap<i64, usize> = BTreeMap::new();
    for w in &words {
        let phi = table.evaluate(w)?;
        distinct.insert(phi.to_string());
        let det = &phi.lambdas()[0] * &phi.lambdas()[1];
        if det != Rational::from_integer(1.into()) {
            continue;
        }
        let t = unipotent_parameter(&phi).ok_or_else(|| {
            Error::PropertyViolation(format!(
                "determinant-one element of unexpected shape:\n{phi}"
            ))
        })?;
        let k = &t / &diff;
        let k = k
            .is_integer()
            .then(|| k.to_integer().to_i64())
            .flatten()
            .ok_or_else(|| {
                Error::PropertyViolation(format!("word {w} gives parameter {t}, not in (a-b)·Z"))
            })?;
        let len = first_len.entry(k).or_insert(w.len());
        *len = (*len).min(w.len());
    }

    let levels: Vec<DetOneLevel> = (2..=max_word_len)
        .step_by(2)
        .map(|max_len| DetOneLevel {
            max_len,
            ks: first_len
                .iter()
                .filter(|(_, &l)| l <= max_len)
                .map(|(&k, _)| k)
                .collect(),
        })
        .collect();
    let mut prev = first_len.values().filter(|&&l| l == 0).count();
    for level in &levels {
        if level.ks.len() <= prev {
            return Err(Error::PropertyViolation(format!(
                "determinant-one count did not grow at length {}",
                level.max_len
            )));
        }
        prev = level.ks.len();
    }

    Ok(NonconnectedReport {
        a: a.to_string(),
        b: b.to_string(),
        max_word_len,
        generator_a: table.letter(&Letter::new("A", false))?.to_string(),
        generator_b: table.letter(&Letter::new("B", false))?.to_string(),
        words_enumerated: words.len(),
        distinct_elements: distinct.len(),
        det_one_ks: first_len.keys().copied().collect(),
        levels,
    })
}
