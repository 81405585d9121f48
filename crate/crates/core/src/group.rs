//! The Grigorchuk group as a rewriting system over `{a, b, c, d}`.
//!
//! Elements are stored as words in alternating normal form: involutions
//! cancel and adjacent letters from `{b, c, d}` collapse by the Klein table,
//! so every reduced word alternates between `a` and one of `b, c, d`.
//! A word `s1 s2 ... sn` denotes the product acting as `s1(s2(...sn(w)))`,
//! i.e. the rightmost letter acts first.
//!
//! The word problem is decided by the contracting recursion on sections:
//! `g` is trivial iff it fixes the first level and both of its sections are
//! trivial. Sections of a reduced word of length `n >= 2` have length at most
//! `(n + 1) / 2`, which bounds the recursion depth logarithmically.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, LazyLock};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A letter of the binary alphabet, always `0` or `1`.
pub type Bit = u8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    A,
    B,
    C,
    D,
}

use Generator::{A, B, C, D};

impl Generator {
    pub const ALL: [Generator; 4] = [A, B, C, D];

    pub fn to_char(self) -> char {
        match self {
            A => 'a',
            B => 'b',
            C => 'c',
            D => 'd',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a' => Some(A),
            'b' => Some(B),
            'c' => Some(C),
            'd' => Some(D),
            _ => None,
        }
    }

    /// True for `b`, `c` and `d`, the nontrivial elements of the Klein subgroup.
    pub fn is_klein(self) -> bool {
        self != A
    }

    /// One step of the wreath recursion: the image of the letter `x` and the
    /// section at `x` (`None` for the identity).
    pub fn split(self, x: Bit) -> (Bit, Option<Generator>) {
        match (self, x) {
            (A, x) => (x ^ 1, None),
            (B, 0) | (C, 0) => (0, Some(A)),
            (B, _) => (1, Some(C)),
            (C, _) => (1, Some(D)),
            (D, 0) => (0, None),
            (D, _) => (1, Some(B)),
        }
    }

    pub fn recursion(self) -> WreathRecursion {
        GroupElement::generator(self).recursion()
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        match (chars.next().and_then(Generator::from_char), chars.next()) {
            (Some(g), None) => Ok(g),
            _ => Err(Error::Parse(format!(
                "expected one of a, b, c, d, got {s:?}"
            ))),
        }
    }
}

/// Product of two letters of `{b, c, d}`; `None` when they are equal.
fn klein_product(x: Generator, y: Generator) -> Option<Generator> {
    debug_assert!(x.is_klein() && y.is_klein());
    if x == y {
        return None;
    }
    Some(match (x, y) {
        (B, C) | (C, B) => D,
        (B, D) | (D, B) => C,
        _ => B,
    })
}

/// The Klein four-group `{1, b, c, d}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Klein {
    One,
    B,
    C,
    D,
}

impl Klein {
    pub const ALL: [Klein; 4] = [Klein::One, Klein::B, Klein::C, Klein::D];

    pub fn from_generator(s: Generator) -> Option<Klein> {
        match s {
            A => None,
            B => Some(Klein::B),
            C => Some(Klein::C),
            D => Some(Klein::D),
        }
    }

    pub fn generator(self) -> Option<Generator> {
        match self {
            Klein::One => None,
            Klein::B => Some(B),
            Klein::C => Some(C),
            Klein::D => Some(D),
        }
    }

    pub fn element(self) -> GroupElement {
        GroupElement::reduce(self.generator())
    }
}

impl std::ops::Mul for Klein {
    type Output = Klein;

    fn mul(self, other: Klein) -> Klein {
        match (self.generator(), other.generator()) {
            (None, _) => other,
            (_, None) => self,
            (Some(x), Some(y)) => klein_product(x, y)
                .and_then(Klein::from_generator)
                .unwrap_or(Klein::One),
        }
    }
}

impl fmt::Display for Klein {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.generator() {
            None => write!(f, "1"),
            Some(g) => write!(f, "{g}"),
        }
    }
}

impl FromStr for Klein {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "e" => Ok(Klein::One),
            other => other
                .parse::<Generator>()
                .ok()
                .and_then(Klein::from_generator)
                .ok_or_else(|| Error::Parse(format!("expected one of 1, b, c, d, got {other:?}"))),
        }
    }
}

/// Root permutation plus the two sections of an element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WreathRecursion {
    pub root_swap: bool,
    pub section0: GroupElement,
    pub section1: GroupElement,
}

/// A group element in alternating normal form.
///
/// Equality and hashing are syntactic on the normal form. Two different
/// normal forms may still represent the same element; use
/// [`GroupElement::same_element`] for group equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GroupElement {
    word: Vec<Generator>,
}

impl GroupElement {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn generator(s: Generator) -> Self {
        Self { word: vec![s] }
    }

    /// Rewrites an arbitrary word to normal form with `ss -> 1` and the six
    /// Klein rules `bc -> d`, `cb -> d`, `bd -> c`, `db -> c`, `cd -> b`,
    /// `dc -> b`. The stack always holds an alternating word, so a single
    /// left-to-right pass reaches the fixed point.
    pub fn reduce<I: IntoIterator<Item = Generator>>(raw: I) -> Self {
        let mut word: Vec<Generator> = Vec::new();
        for x in raw {
            match word.last().copied() {
                Some(y) if y == x => {
                    word.pop();
                }
                Some(y) if y.is_klein() && x.is_klein() => {
                    word.pop();
                    if let Some(z) = klein_product(y, x) {
                        word.push(z);
                    }
                }
                _ => word.push(x),
            }
        }
        Self { word }
    }

    /// Wraps a word that is already in normal form.
    pub(crate) fn from_reduced(word: Vec<Generator>) -> Self {
        debug_assert!(is_normal_form(&word));
        Self { word }
    }

    pub fn letters(&self) -> &[Generator] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    /// True for the empty word. Nonempty words may still be trivial.
    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// `self * rhs`, acting as `rhs` first.
    pub fn mul(&self, rhs: &GroupElement) -> GroupElement {
        GroupElement::reduce(self.word.iter().chain(rhs.word.iter()).copied())
    }

    pub fn inverse(&self) -> GroupElement {
        // Reversal of an alternating word is alternating.
        Self {
            word: self.word.iter().rev().copied().collect(),
        }
    }

    pub fn pow(&self, mut n: u64) -> GroupElement {
        let mut result = GroupElement::identity();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `h * self * h^{-1}`.
    pub fn conjugate_by(&self, h: &GroupElement) -> GroupElement {
        GroupElement::reduce(
            h.word
                .iter()
                .chain(self.word.iter())
                .chain(h.word.iter().rev())
                .copied(),
        )
    }

    /// Whether the element swaps the two vertices of the first level.
    pub fn swaps_root(&self) -> bool {
        self.word.iter().filter(|&&s| s == A).count() % 2 == 1
    }

    /// Image of the letter `x` together with the reduced section at `x`.
    pub fn split(&self, x: Bit) -> (Bit, GroupElement) {
        let mut x = x;
        let mut sections = Vec::with_capacity(self.word.len() / 2 + 1);
        for &s in self.word.iter().rev() {
            let (y, section) = s.split(x);
            sections.extend(section);
            x = y;
        }
        (x, GroupElement::reduce(sections.into_iter().rev()))
    }

    pub fn recursion(&self) -> WreathRecursion {
        WreathRecursion {
            root_swap: self.swaps_root(),
            section0: self.split(0).1,
            section1: self.split(1).1,
        }
    }

    /// The section `g|_u`, defined by `g(uw) = g(u) g|_u(w)`.
    pub fn section(&self, u: &[Bit]) -> GroupElement {
        u.iter().fold(self.clone(), |g, &x| g.split(x).1)
    }

    /// The action on a finite word, computed one letter at a time through
    /// the wreath recursion.
    pub fn apply(&self, w: &[Bit]) -> Vec<Bit> {
        let mut g = self.clone();
        let mut out = Vec::with_capacity(w.len());
        for &x in w {
            if g.is_empty() {
                out.push(x);
                continue;
            }
            let (y, next) = g.split(x);
            out.push(y);
            g = next;
        }
        out
    }

    pub fn is_trivial(&self) -> bool {
        is_trivial_word(self)
    }

    pub fn same_element(&self, other: &GroupElement) -> bool {
        self.mul(&other.inverse()).is_trivial()
    }

    /// Smallest `n >= 1` with `g^n` trivial.
    ///
    /// Repeated squaring finds the first trivial power `g^(2^j)`; the order
    /// is then the least divisor of `2^j` that works. If no square up to the
    /// cap is trivial, every exponent up to the cap is scanned.
    pub fn order(&self, cap: u64) -> Result<u64> {
        if cap == 0 {
            return Err(Error::InvalidArgument(
                "order cap must be at least 1".into(),
            ));
        }
        if self.is_trivial() {
            return Ok(1);
        }
        let mut power = self.clone();
        let mut exponent: u64 = 1;
        loop {
            if power.is_trivial() {
                return Ok(divisors(exponent)
                    .into_iter()
                    .find(|&d| self.pow(d).is_trivial())
                    .unwrap_or(exponent));
            }
            match exponent.checked_mul(2) {
                Some(next) if next <= cap => {
                    power = power.mul(&power);
                    exponent = next;
                }
                _ => break,
            }
        }
        let mut power = self.clone();
        for n in 2..=cap {
            power = power.mul(self);
            if power.is_trivial() {
                return Ok(n);
            }
        }
        Err(Error::OrderExceedsCap { cap })
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortlex: by length, then lexicographically with `a < b < c < d`.
impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.word
            .len()
            .cmp(&other.word.len())
            .then_with(|| self.word.cmp(&other.word))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "1");
        }
        for s in &self.word {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Parses words such as `abad`, `1`, `e`, `(ad)^4` or `a(bc)^3d`.
impl FromStr for GroupElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let raw = parse_sequence(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(Error::Parse(format!(
                "unexpected {:?} in {s:?}",
                chars[pos]
            )));
        }
        Ok(GroupElement::reduce(raw))
    }
}

fn parse_sequence(chars: &[char], pos: &mut usize) -> Result<Vec<Generator>> {
    let mut out = Vec::new();
    while let Some(&c) = chars.get(*pos) {
        match c {
            '1' | 'e' => *pos += 1,
            '(' => {
                *pos += 1;
                let inner = parse_sequence(chars, pos)?;
                if chars.get(*pos) != Some(&')') {
                    return Err(Error::Parse("unbalanced parenthesis".into()));
                }
                *pos += 1;
                let mut times = 1usize;
                if chars.get(*pos) == Some(&'^') {
                    *pos += 1;
                    let start = *pos;
                    while chars.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
                        *pos += 1;
                    }
                    let digits: String = chars[start..*pos].iter().collect();
                    times = digits
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent {digits:?}")))?;
                }
                for _ in 0..times {
                    out.extend_from_slice(&inner);
                }
            }
            ')' => break,
            c => match Generator::from_char(c) {
                Some(g) => {
                    out.push(g);
                    *pos += 1;
                }
                None => return Err(Error::Parse(format!("unexpected character {c:?}"))),
            },
        }
    }
    Ok(out)
}

fn is_normal_form(word: &[Generator]) -> bool {
    word.windows(2)
        .all(|w| w[0] != w[1] && (w[0] == A || w[1] == A))
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d != n / d {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

struct TrivialityCache {
    map: HashMap<Vec<Generator>, bool>,
    capacity: Option<usize>,
}

static TRIVIALITY_CACHE: LazyLock<RwLock<TrivialityCache>> = LazyLock::new(|| {
    RwLock::new(TrivialityCache {
        map: HashMap::new(),
        capacity: None,
    })
});

/// Caps the number of memoized word-problem answers; `None` means unbounded.
/// When the cap is reached the cache is cleared.
pub fn set_cache_capacity(capacity: Option<usize>) {
    let mut cache = TRIVIALITY_CACHE.write();
    cache.capacity = capacity;
    if capacity.is_some_and(|c| cache.map.len() > c) {
        cache.map.clear();
    }
}

pub fn cache_len() -> usize {
    TRIVIALITY_CACHE.read().map.len()
}

fn is_trivial_word(g: &GroupElement) -> bool {
    if g.swaps_root() {
        return false;
    }
    if g.len() <= 1 {
        return g.is_empty();
    }
    if let Some(&known) = TRIVIALITY_CACHE.read().map.get(&g.word) {
        return known;
    }
    let bound = g.len().div_ceil(2);
    let (_, s0) = g.split(0);
    let (_, s1) = g.split(1);
    assert!(
        s0.len() <= bound && s1.len() <= bound,
        "contraction violated: sections of {g} are {s0} and {s1}"
    );
    let trivial = is_trivial_word(&s0) && is_trivial_word(&s1);
    let mut cache = TRIVIALITY_CACHE.write();
    if cache.capacity.is_some_and(|c| cache.map.len() >= c) {
        cache.map.clear();
    }
    cache.map.insert(g.word.clone(), trivial);
    trivial
}

/// The generator of `{b, c, d}` that fixes a word whose first zero sits at
/// 1-based position `k` (followed by at least one more letter).
pub fn first_zero_fixer(k: usize) -> Generator {
    match k % 3 {
        0 => B,
        2 => C,
        _ => D,
    }
}

/// Action of a single generator by the first-zero rule: `a` flips the first
/// letter; `b`, `c`, `d` flip the letter after the first zero unless they
/// are the fixer for that position.
pub fn apply_fast(s: Generator, w: &[Bit]) -> Vec<Bit> {
    let mut out = w.to_vec();
    if s == A {
        if let Some(x) = out.first_mut() {
            *x ^= 1;
        }
        return out;
    }
    if let Some(idx) = w.iter().position(|&x| x == 0) {
        let k = idx + 1;
        if k < w.len() && first_zero_fixer(k) != s {
            out[k] ^= 1;
        }
    }
    out
}

/// All normal-form words of length exactly `len`, in lexicographic order.
pub fn reduced_words_of_length(len: usize) -> Vec<GroupElement> {
    fn extend(prefix: &mut Vec<Generator>, len: usize, out: &mut Vec<GroupElement>) {
        if prefix.len() == len {
            out.push(GroupElement::from_reduced(prefix.clone()));
            return;
        }
        for s in Generator::ALL {
            let allowed = match prefix.last() {
                None => true,
                Some(&A) => s != A,
                Some(_) => s == A,
            };
            if allowed {
                prefix.push(s);
                extend(prefix, len, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(len), len, &mut out);
    out
}

/// All normal-form words of length at most `max_len` in shortlex order.
pub fn reduced_words(max_len: usize) -> Vec<GroupElement> {
    (0..=max_len).flat_map(reduced_words_of_length).collect()
}

/// Action of `g` on the whole level `depth`, as a table indexed by the
/// binary value of the word (first letter most significant).
pub fn level_permutation(g: &GroupElement, depth: usize) -> Vec<u32> {
    (0..1u32 << depth)
        .map(|i| bits_to_index(&g.apply(&index_to_bits(i, depth))))
        .collect()
}

pub fn index_to_bits(i: u32, depth: usize) -> Vec<Bit> {
    (0..depth)
        .map(|k| ((i >> (depth - 1 - k)) & 1) as Bit)
        .collect()
}

pub fn bits_to_index(w: &[Bit]) -> u32 {
    w.iter().fold(0, |acc, &x| (acc << 1) | x as u32)
}

const SIGNATURE_DEPTH: usize = 6;

static ENUMERATIONS: LazyLock<Mutex<HashMap<usize, Arc<Vec<GroupElement>>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// The distinct elements representable by normal-form words of length at
/// most `max_len`, listed by their shortlex-first representative.
///
/// Candidates are bucketed by their action on a fixed level (distinct
/// actions imply distinct elements) and duplicates inside a bucket are
/// confirmed with the word problem.
pub fn enumerate_elements(max_len: usize) -> Arc<Vec<GroupElement>> {
    if let Some(found) = ENUMERATIONS.lock().get(&max_len) {
        return found.clone();
    }
    let mut buckets: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    let mut elements: Vec<GroupElement> = Vec::new();
    for g in reduced_words(max_len) {
        let signature = level_permutation(&g, SIGNATURE_DEPTH);
        let bucket = buckets.entry(signature).or_default();
        if bucket.iter().any(|&i| g.same_element(&elements[i])) {
            continue;
        }
        bucket.push(elements.len());
        elements.push(g);
    }
    let elements = Arc::new(elements);
    ENUMERATIONS.lock().insert(max_len, elements.clone());
    elements
}

pub fn parse_bits(s: &str) -> Result<Vec<Bit>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            c => Err(Error::Parse(format!("expected binary digit, got {c:?}"))),
        })
        .collect()
}

pub fn format_bits(w: &[Bit]) -> String {
    w.iter().map(|&x| if x == 0 { '0' } else { '1' }).collect()
}
