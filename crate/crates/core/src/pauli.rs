//! Symbolic algebra of multi-site Pauli strings.
//!
//! Operators on an `N`-site spin-1/2 chain are stored as linear combinations
//! of tensor products of single-site letters `{I, X, Y, Z}`. Products,
//! commutators and adjoints are computed term by term from the single-site
//! multiplication table, so identities among operators can be checked by
//! comparing coefficients instead of dense matrices.
//!
//! Sites are numbered `1..=N`. In the dense representation site 1 is the most
//! significant qubit of the computational (σᶻ) basis index, and basis state
//! `|0⟩` is the σᶻ = +1 eigenstate.
//!
//! Coefficients are `f64` complex numbers. Every phase produced by the
//! multiplication table is a power of `i`, so cancellations are exact modulo
//! float rounding; terms with `|c| < 1e-14` are dropped on canonicalization.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Terms whose coefficient magnitude falls below this are dropped.
pub const COEFF_EPS: f64 = 1e-14;

/// Largest chain the packed word representation supports.
pub const MAX_SITES: usize = 64;

/// Default cap on `N` for conversion to dense `2^N × 2^N` matrices.
pub const DEFAULT_DENSE_OPERATOR_LIMIT: usize = 12;

/// Pivot threshold used when ranking coefficient vectors.
pub const SPAN_PIVOT: f64 = 1e-10;

const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// `i^k` for `k` taken modulo 4.
pub(crate) fn i_pow(k: u8) -> Complex64 {
    I_POW[(k & 3) as usize]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// (x bit, z bit) in the symplectic encoding, Y = (1, 1).
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Single-site product `self · other = i^k · result`, returned as `(k, result)`.
    pub fn product(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// 2×2 matrix in the σᶻ basis.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let j = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -j], [j, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::spec(format!("unknown Pauli letter {other:?}"))),
        }
    }
}

/// Letter sequence packed into x/z bit masks; bit `k` is site `k + 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliWord {
    x: u64,
    z: u64,
}

impl PauliWord {
    pub const IDENTITY: PauliWord = PauliWord { x: 0, z: 0 };

    fn from_letters(letters: &[Pauli]) -> PauliWord {
        let mut w = PauliWord::IDENTITY;
        for (k, p) in letters.iter().enumerate() {
            w.set(k, *p);
        }
        w
    }

    fn set(&mut self, bit: usize, p: Pauli) {
        let (x, z) = p.bits();
        let m = 1u64 << bit;
        self.x = (self.x & !m) | if x { m } else { 0 };
        self.z = (self.z & !m) | if z { m } else { 0 };
    }

    /// Letter on 1-based `site`.
    pub fn letter(&self, site: usize) -> Pauli {
        let m = 1u64 << (site - 1);
        Pauli::from_bits(self.x & m != 0, self.z & m != 0)
    }

    pub fn letters(&self, n: usize) -> Vec<Pauli> {
        (1..=n).map(|s| self.letter(s)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// 1-based sites carrying a non-identity letter.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        let mask = self.x | self.z;
        (0..64).filter(move |b| mask & (1u64 << b) != 0).map(|b| b + 1)
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Product `self · other = i^k · word`.
    pub fn product(&self, other: &PauliWord) -> (u8, PauliWord) {
        let mut k = 0u8;
        let mut overlap = (self.x | self.z) & (other.x | other.z);
        while overlap != 0 {
            let b = overlap.trailing_zeros();
            let m = 1u64 << b;
            let a = Pauli::from_bits(self.x & m != 0, self.z & m != 0);
            let c = Pauli::from_bits(other.x & m != 0, other.z & m != 0);
            k = k.wrapping_add(a.product(c).0);
            overlap &= overlap - 1;
        }
        (
            k & 3,
            PauliWord {
                x: self.x ^ other.x,
                z: self.z ^ other.z,
            },
        )
    }

    /// Dense action on an `n`-site computational basis.
    pub(crate) fn action(&self, n: usize) -> WordAction {
        let mut flip = 0usize;
        let mut zmask = 0usize;
        for site in 1..=n {
            let bit = 1usize << (n - site);
            let m = 1u64 << (site - 1);
            if self.x & m != 0 {
                flip |= bit;
            }
            if self.z & m != 0 {
                zmask |= bit;
            }
        }
        WordAction {
            flip,
            zmask,
            phase: i_pow((self.y_count() & 3) as u8),
        }
    }

    fn display(&self, n: usize) -> String {
        self.letters(n).into_iter().map(Pauli::as_char).collect()
    }
}

/// `P|b⟩ = phase · (−1)^{popcount(b & zmask)} |b ⊕ flip⟩` on basis indices.
#[derive(Clone, Copy, Debug)]
pub(crate) struct WordAction {
    pub flip: usize,
    pub zmask: usize,
    pub phase: Complex64,
}

impl WordAction {
    /// Amplitude of `P|b⟩` on `|b ⊕ flip⟩`.
    #[inline]
    pub fn amp(&self, b: usize) -> Complex64 {
        if (b & self.zmask).count_ones() & 1 == 1 {
            -self.phase
        } else {
            self.phase
        }
    }
}

/// A complex coefficient times a tensor product of single-site letters.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    coeff: Complex64,
    n: usize,
    word: PauliWord,
}

impl PauliString {
    pub fn new(coeff: Complex64, letters: &[Pauli]) -> Result<Self> {
        check_sites(letters.len())?;
        Ok(PauliString {
            coeff,
            n: letters.len(),
            word: PauliWord::from_letters(letters),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_sites(n)?;
        Ok(PauliString {
            coeff: Complex64::new(1.0, 0.0),
            n,
            word: PauliWord::IDENTITY,
        })
    }

    pub(crate) fn from_word(coeff: Complex64, n: usize, word: PauliWord) -> Self {
        PauliString { coeff, n, word }
    }

    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    pub fn with_coeff(mut self, coeff: Complex64) -> Self {
        self.coeff = coeff;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn word(&self) -> PauliWord {
        self.word
    }

    pub fn letters(&self) -> Vec<Pauli> {
        self.word.letters(self.n)
    }

    pub fn letter(&self, site: usize) -> Pauli {
        self.word.letter(site)
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        let (k, word) = self.word.product(&other.word);
        Ok(PauliString {
            coeff: self.coeff * other.coeff * i_pow(k),
            n: self.n,
            word,
        })
    }

    pub fn adjoint(&self) -> PauliString {
        PauliString {
            coeff: self.coeff.conj(),
            ..self.clone()
        }
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses a bare letter sequence such as `"XIZ"` with unit coefficient.
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(Pauli::try_from)
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(Complex64::new(1.0, 0.0), &letters)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", fmt_coeff(self.coeff), self.word.display(self.n))
    }
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::spec("a Pauli string needs at least one site"));
    }
    if n > MAX_SITES {
        return Err(Error::Capacity {
            what: "Pauli word",
            n,
            limit: MAX_SITES,
        });
    }
    Ok(())
}

fn check_site(n: usize, site: usize) -> Result<()> {
    if site == 0 || site > n {
        return Err(Error::OutOfRange {
            what: "site",
            index: site,
            lo: 1,
            hi: n,
        });
    }
    Ok(())
}

fn fmt_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else {
        format!("{}{:+}i", c.re, c.im)
    }
}

/// Canonical linear combination of Pauli strings on a fixed number of sites.
///
/// Each letter sequence appears at most once and no coefficient is below
/// [`COEFF_EPS`] in magnitude, so two sums are equal iff their term maps are.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSum {
    n: usize,
    terms: BTreeMap<PauliWord, Complex64>,
}

impl OperatorSum {
    pub fn zero(n: usize) -> Result<Self> {
        check_sites(n)?;
        Ok(OperatorSum {
            n,
            terms: BTreeMap::new(),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Ok(PauliString::identity(n)?.into())
    }

    /// `σ^p` on a single 1-based `site`.
    pub fn site(n: usize, site: usize, p: Pauli) -> Result<Self> {
        Self::product_term(n, Complex64::new(1.0, 0.0), &[(site, p)])
    }

    /// `coeff · Π σ_s^{p_s}` over the listed `(site, letter)` factors.
    ///
    /// Repeated sites multiply in the listed order.
    pub fn product_term(n: usize, coeff: Complex64, factors: &[(usize, Pauli)]) -> Result<Self> {
        check_sites(n)?;
        let mut s = PauliString::from_word(coeff, n, PauliWord::IDENTITY);
        for &(site, p) in factors {
            check_site(n, site)?;
            let mut w = PauliWord::IDENTITY;
            w.set(site - 1, p);
            s = s.mul(&PauliString::from_word(Complex64::new(1.0, 0.0), n, w))?;
        }
        Ok(s.into())
    }

    /// Sum of `coeff · letters` entries; all sequences must share one length.
    pub fn from_terms<'a, I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, &'a [Pauli])>,
    {
        let mut it = terms.into_iter().peekable();
        let n = match it.peek() {
            Some((_, l)) => l.len(),
            None => return Err(Error::spec("from_terms needs at least one term")),
        };
        let mut out = OperatorSum::zero(n)?;
        for (c, letters) in it {
            let s = PauliString::new(c, letters)?;
            if s.n != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: s.n,
                });
            }
            out.add_word(s.word, s.coeff);
        }
        out.canonicalize();
        Ok(out)
    }

    /// `σ⁺ = (σˣ + iσʸ)/2`, raising toward σᶻ = +1.
    pub fn sigma_plus(n: usize, site: usize) -> Result<Self> {
        Self::ladder(n, site, Pauli::X, Pauli::Y, 1.0)
    }

    /// `σ⁻ = (σˣ − iσʸ)/2`.
    pub fn sigma_minus(n: usize, site: usize) -> Result<Self> {
        Self::ladder(n, site, Pauli::X, Pauli::Y, -1.0)
    }

    /// `Γ± = (σᶻ ± iσˣ)/2`.
    pub fn gamma_pm(n: usize, site: usize, sign: f64) -> Result<Self> {
        Self::ladder(n, site, Pauli::Z, Pauli::X, sign)
    }

    /// `Π± = (σʸ ± iσᶻ)/2`.
    pub fn pi_pm(n: usize, site: usize, sign: f64) -> Result<Self> {
        Self::ladder(n, site, Pauli::Y, Pauli::Z, sign)
    }

    /// `(σ^a + sign·i σ^b)/2` on one site.
    pub fn ladder(n: usize, site: usize, a: Pauli, b: Pauli, sign: f64) -> Result<Self> {
        let ra = Self::site(n, site, a)?;
        let rb = Self::site(n, site, b)?;
        Ok((&ra + &(&rb * Complex64::new(0.0, sign))) * 0.5)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = PauliString> + '_ {
        self.terms
            .iter()
            .map(move |(w, c)| PauliString::from_word(*c, self.n, *w))
    }

    pub(crate) fn words(&self) -> impl Iterator<Item = (&PauliWord, &Complex64)> {
        self.terms.iter()
    }

    /// Coefficient of the given letter sequence (zero if absent).
    pub fn coeff_of(&self, letters: &[Pauli]) -> Complex64 {
        if letters.len() != self.n {
            return Complex64::new(0.0, 0.0);
        }
        self.terms
            .get(&PauliWord::from_letters(letters))
            .copied()
            .unwrap_or_default()
    }

    /// Coefficient of a word given as a string like `"ZZI"`.
    pub fn coeff_of_str(&self, letters: &str) -> Complex64 {
        match PauliString::from_str(letters) {
            Ok(s) => self.coeff_of(&s.letters()),
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn coeff_of_identity(&self) -> Complex64 {
        self.terms
            .get(&PauliWord::IDENTITY)
            .copied()
            .unwrap_or_default()
    }

    fn add_word(&mut self, w: PauliWord, c: Complex64) {
        *self.terms.entry(w).or_default() += c;
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|_, c| c.norm() >= COEFF_EPS);
    }

    fn check_same(&self, other: &OperatorSum) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &OperatorSum) -> Result<OperatorSum> {
        self.check_same(other)?;
        let mut out = OperatorSum {
            n: self.n,
            terms: BTreeMap::new(),
        };
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let (k, w) = wa.product(wb);
                out.add_word(w, ca * cb * i_pow(k));
            }
        }
        out.canonicalize();
        Ok(out)
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &OperatorSum) -> Result<OperatorSum> {
        self.check_same(other)?;
        // Pauli words either commute or anticommute; only odd phases survive.
        let mut out = OperatorSum {
            n: self.n,
            terms: BTreeMap::new(),
        };
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let (k1, w) = wa.product(wb);
                let (k2, _) = wb.product(wa);
                if k1 != k2 {
                    out.add_word(w, ca * cb * (i_pow(k1) - i_pow(k2)));
                }
            }
        }
        out.canonicalize();
        Ok(out)
    }

    /// `{self, other} = self·other + other·self`.
    pub fn anticommutator(&self, other: &OperatorSum) -> Result<OperatorSum> {
        Ok(&self.mul(other)? + &other.mul(self)?)
    }

    /// Hermitian conjugate: Pauli letters are self-adjoint, so only the
    /// coefficients are conjugated.
    pub fn adjoint(&self) -> OperatorSum {
        OperatorSum {
            n: self.n,
            terms: self.terms.iter().map(|(w, c)| (*w, c.conj())).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> OperatorSum {
        let mut out = OperatorSum {
            n: self.n,
            terms: self.terms.iter().map(|(w, v)| (*w, v * c)).collect(),
        };
        out.canonicalize();
        out
    }

    /// Largest coefficient magnitude of `self − other`.
    pub fn max_coeff_diff(&self, other: &OperatorSum) -> Result<f64> {
        self.check_same(other)?;
        let mut worst = 0.0f64;
        for (w, c) in &self.terms {
            let d = c - other.terms.get(w).copied().unwrap_or_default();
            worst = worst.max(d.norm());
        }
        for (w, c) in &other.terms {
            if !self.terms.contains_key(w) {
                worst = worst.max(c.norm());
            }
        }
        Ok(worst)
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of the dense matrix, `sqrt(2^N Σ|c|²)` by trace orthogonality.
    pub fn frobenius_norm(&self) -> f64 {
        let s: f64 = self.terms.values().map(|c| c.norm_sqr()).sum();
        (s * 2f64.powi(self.n as i32)).sqrt()
    }

    /// Coefficient inner product `Σ conj(self_s) other_s`.
    pub fn coeff_inner(&self, other: &OperatorSum) -> Complex64 {
        let (small, large, conj_small) = if self.terms.len() <= other.terms.len() {
            (&self.terms, &other.terms, true)
        } else {
            (&other.terms, &self.terms, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, c) in small {
            if let Some(d) = large.get(w) {
                acc += if conj_small { c.conj() * d } else { d.conj() * c };
            }
        }
        acc
    }

    /// `tr(A) = 2^N · c_I`.
    pub fn trace(&self) -> Complex64 {
        self.coeff_of_identity() * 2f64.powi(self.n as i32)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// 1-based sites touched by at least one term.
    pub fn support(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|w| w.support()).collect()
    }

    /// Re-embed on a chain of `n` sites with site `s` moved to `map(s)`.
    pub fn relabel_sites(&self, n: usize, map: impl Fn(usize) -> usize) -> Result<OperatorSum> {
        check_sites(n)?;
        let mut out = OperatorSum::zero(n)?;
        for (w, c) in &self.terms {
            let mut nw = PauliWord::IDENTITY;
            for site in w.support() {
                let t = map(site);
                check_site(n, t)?;
                nw.set(t - 1, w.letter(site));
            }
            out.add_word(nw, *c);
        }
        out.canonicalize();
        Ok(out)
    }

    /// Dense matrix with the default size cap.
    pub fn to_dense(&self) -> Result<DenseOperator> {
        self.to_dense_with_limit(DEFAULT_DENSE_OPERATOR_LIMIT)
    }

    pub fn to_dense_with_limit(&self, limit: usize) -> Result<DenseOperator> {
        if self.n > limit {
            return Err(Error::Capacity {
                what: "dense operator",
                n: self.n,
                limit,
            });
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (w, c) in &self.terms {
            let act = w.action(self.n);
            for b in 0..dim {
                m[(b ^ act.flip, b)] += c * act.amp(b);
            }
        }
        Ok(DenseOperator { n: self.n, matrix: m })
    }
}

impl From<PauliString> for OperatorSum {
    fn from(s: PauliString) -> Self {
        let mut out = OperatorSum {
            n: s.n,
            terms: BTreeMap::new(),
        };
        out.add_word(s.word, s.coeff);
        out.canonicalize();
        out
    }
}

impl fmt::Display for OperatorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| format!("({}) {}", fmt_coeff(*c), w.display(self.n)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

// Linear-combination operators panic on mismatched site counts; that is a
// programming error rather than a data error. Use `mul`/`commutator` for the
// fallible products.

impl Add for &OperatorSum {
    type Output = OperatorSum;

    fn add(self, rhs: &OperatorSum) -> OperatorSum {
        assert_eq!(self.n, rhs.n, "site-count mismatch in operator sum");
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_word(*w, *c);
        }
        out.canonicalize();
        out
    }
}

impl Add for OperatorSum {
    type Output = OperatorSum;

    fn add(self, rhs: OperatorSum) -> OperatorSum {
        &self + &rhs
    }
}

impl Sub for &OperatorSum {
    type Output = OperatorSum;

    fn sub(self, rhs: &OperatorSum) -> OperatorSum {
        assert_eq!(self.n, rhs.n, "site-count mismatch in operator difference");
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_word(*w, -c);
        }
        out.canonicalize();
        out
    }
}

impl Sub for OperatorSum {
    type Output = OperatorSum;

    fn sub(self, rhs: OperatorSum) -> OperatorSum {
        &self - &rhs
    }
}

impl Neg for &OperatorSum {
    type Output = OperatorSum;

    fn neg(self) -> OperatorSum {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Neg for OperatorSum {
    type Output = OperatorSum;

    fn neg(self) -> OperatorSum {
        -&self
    }
}

impl Mul<Complex64> for &OperatorSum {
    type Output = OperatorSum;

    fn mul(self, c: Complex64) -> OperatorSum {
        self.scale(c)
    }
}

impl Mul<Complex64> for OperatorSum {
    type Output = OperatorSum;

    fn mul(self, c: Complex64) -> OperatorSum {
        self.scale(c)
    }
}

impl Mul<f64> for &OperatorSum {
    type Output = OperatorSum;

    fn mul(self, c: f64) -> OperatorSum {
        self.scale(Complex64::new(c, 0.0))
    }
}

impl Mul<f64> for OperatorSum {
    type Output = OperatorSum;

    fn mul(self, c: f64) -> OperatorSum {
        self.scale(Complex64::new(c, 0.0))
    }
}

impl Mul for &OperatorSum {
    type Output = OperatorSum;

    fn mul(self, rhs: &OperatorSum) -> OperatorSum {
        OperatorSum::mul(self, rhs).expect("site-count mismatch in operator product")
    }
}

/// Operator product of two Pauli strings.
pub fn mul(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    a.mul(b)
}

pub fn commutator(a: &OperatorSum, b: &OperatorSum) -> Result<OperatorSum> {
    a.commutator(b)
}

pub fn adjoint(a: &OperatorSum) -> OperatorSum {
    a.adjoint()
}

pub fn to_dense(a: &OperatorSum, n: usize) -> Result<DenseOperator> {
    if a.n() != n {
        return Err(Error::Dimension {
            expected: n,
            found: a.n(),
        });
    }
    a.to_dense()
}

/// Dimension of the complex linear span of `gens` in the Pauli basis.
pub fn span_dimension(gens: &[OperatorSum]) -> Result<usize> {
    let Some(first) = gens.first() else {
        return Ok(0);
    };
    let mut span = Span::new(first.n());
    for g in gens {
        span.insert(g)?;
    }
    Ok(span.rank())
}

/// Incrementally orthonormalized span of operators over their Pauli coefficients.
///
/// Coordinates are allocated lazily as new words appear, so memory scales
/// with the number of distinct words seen rather than with `4^N`.
#[derive(Clone, Debug)]
pub struct Span {
    n: usize,
    index: HashMap<PauliWord, usize>,
    basis: Vec<Vec<Complex64>>,
    pivot: f64,
}

impl Span {
    pub fn new(n: usize) -> Self {
        Span {
            n,
            index: HashMap::new(),
            basis: Vec::new(),
            pivot: SPAN_PIVOT,
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Adds `op` to the span; returns whether the rank grew.
    pub fn insert(&mut self, op: &OperatorSum) -> Result<bool> {
        if op.n() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: op.n(),
            });
        }
        let scale = op.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if scale == 0.0 {
            return Ok(false);
        }
        let mut coords: Vec<(usize, Complex64)> = Vec::with_capacity(op.len());
        for (w, c) in &op.terms {
            let next = self.index.len();
            let k = *self.index.entry(*w).or_insert(next);
            coords.push((k, c / scale));
        }
        let dim = self.index.len();
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for (k, c) in coords {
            v[k] = c;
        }
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for b in &self.basis {
                let proj: Complex64 = b.iter().zip(&v).map(|(bi, vi)| bi.conj() * vi).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < self.pivot {
            return Ok(false);
        }
        for c in &mut v {
            *c /= norm;
        }
        for b in &mut self.basis {
            b.resize(dim, Complex64::new(0.0, 0.0));
        }
        self.basis.push(v);
        Ok(true)
    }
}

/// Dense `2^N × 2^N` operator in the σᶻ computational basis, site 1 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    n: usize,
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn new(n: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::spec(format!(
                "dense operator on {n} sites must be {dim}x{dim}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(DenseOperator { n, matrix })
    }

    /// `I / 2^N`.
    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        DenseOperator {
            n,
            matrix: DMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator {
            n: self.n,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise magnitude of `self − other`.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> DenseOperator {
        DenseOperator {
            n: self.n,
            matrix: (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0),
        }
    }
}
