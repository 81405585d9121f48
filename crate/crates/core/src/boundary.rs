//! Eventually periodic points of the tree boundary and the action on them.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{format_bits, parse_bits, Bit, Generator, GroupElement, Klein};

/// An infinite binary word `pre (period)^w` in canonical form: the period is
/// primitive and the preperiod is as short as possible, so two values are
/// equal as infinite words iff they are structurally equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EvPeriodicWord {
    pre: Vec<Bit>,
    period: Vec<Bit>,
}

impl EvPeriodicWord {
    pub fn new(pre: Vec<Bit>, period: Vec<Bit>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidArgument("period must be nonempty".into()));
        }
        if pre.iter().chain(period.iter()).any(|&x| x > 1) {
            return Err(Error::InvalidArgument("letters must be 0 or 1".into()));
        }
        let mut word = Self { pre, period };
        word.canonicalize();
        Ok(word)
    }

    /// The constant word `x^w`.
    pub fn constant(x: Bit) -> Self {
        Self {
            pre: Vec::new(),
            period: vec![x & 1],
        }
    }

    /// The exceptional point `1^w`.
    pub fn ones() -> Self {
        Self::constant(1)
    }

    /// `1^(z-1) 0 1^w`, the word whose only zero sits at position `z`.
    pub fn single_zero(z: usize) -> Result<Self> {
        if z == 0 {
            return Err(Error::InvalidArgument("positions are 1-based".into()));
        }
        let mut pre = vec![1; z - 1];
        pre.push(0);
        Self::new(pre, vec![1])
    }

    fn canonicalize(&mut self) {
        let p = self.period.len();
        if let Some(d) = (1..p)
            .find(|&d| p.is_multiple_of(d) && (d..p).all(|i| self.period[i] == self.period[i - d]))
        {
            self.period.truncate(d);
        }
        while let (Some(&x), Some(&y)) = (self.pre.last(), self.period.last()) {
            if x != y {
                break;
            }
            self.pre.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn preperiod(&self) -> &[Bit] {
        &self.pre
    }

    pub fn period(&self) -> &[Bit] {
        &self.period
    }

    /// Letter at 0-based index `i`.
    pub fn letter(&self, i: usize) -> Bit {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.period[(i - self.pre.len()) % self.period.len()]
        }
    }

    pub fn prefix(&self, n: usize) -> Vec<Bit> {
        (0..n).map(|i| self.letter(i)).collect()
    }

    /// 1-based position of the first zero.
    pub fn first_zero(&self) -> Option<usize> {
        (0..self.pre.len() + self.period.len())
            .find(|&i| self.letter(i) == 0)
            .map(|i| i + 1)
    }

    pub fn has_infinitely_many_zeros(&self) -> bool {
        self.period.contains(&0)
    }

    /// Index of the next letter in the finite state space `0..pre+period`.
    fn next_index(&self, i: usize) -> usize {
        if i + 1 == self.pre.len() + self.period.len() {
            self.pre.len()
        } else {
            i + 1
        }
    }

    /// Length of the longest common prefix with a different word.
    pub fn common_prefix_len(&self, other: &EvPeriodicWord) -> Option<usize> {
        if self == other {
            return None;
        }
        let bound = self.pre.len().max(other.pre.len()) + self.period.len() * other.period.len();
        (0..=bound).find(|&i| self.letter(i) != other.letter(i))
    }
}

impl fmt::Display for EvPeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({})^w",
            format_bits(&self.pre),
            format_bits(&self.period)
        )
    }
}

impl FromStr for EvPeriodicWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let body = s
            .strip_suffix("^w")
            .ok_or_else(|| Error::Parse(format!("expected PRE(PER)^w, got {s:?}")))?;
        let (pre, rest) = body
            .split_once('(')
            .ok_or_else(|| Error::Parse(format!("missing '(' in {s:?}")))?;
        let period = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("missing ')' in {s:?}")))?;
        EvPeriodicWord::new(parse_bits(pre)?, parse_bits(period)?)
    }
}

impl TryFrom<String> for EvPeriodicWord {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EvPeriodicWord> for String {
    fn from(w: EvPeriodicWord) -> String {
        w.to_string()
    }
}

/// The sections of `g` along `xi` as a finite state machine over
/// (section, index into `xi`). Both the image `g(xi)` and the neighborhood
/// stabilizer test read off this run.
struct SectionRun {
    outputs: Vec<Bit>,
    sections: Vec<GroupElement>,
    cycle_start: usize,
}

impl SectionRun {
    fn new(g: &GroupElement, xi: &EvPeriodicWord) -> Self {
        let mut seen: HashMap<(GroupElement, usize), usize> = HashMap::new();
        let mut outputs = Vec::new();
        let mut sections = Vec::new();
        let mut state = (g.clone(), 0usize);
        loop {
            if let Some(&start) = seen.get(&state) {
                return Self {
                    outputs,
                    sections,
                    cycle_start: start,
                };
            }
            seen.insert(state.clone(), outputs.len());
            let (section, index) = state;
            let (y, next) = section.split(xi.letter(index));
            outputs.push(y);
            sections.push(section);
            state = (next, xi.next_index(index));
        }
    }

    fn image(&self) -> EvPeriodicWord {
        EvPeriodicWord::new(
            self.outputs[..self.cycle_start].to_vec(),
            self.outputs[self.cycle_start..].to_vec(),
        )
        .expect("cycle is nonempty")
    }
}

/// The boundary action `g(xi)`.
pub fn act_beta(g: &GroupElement, xi: &EvPeriodicWord) -> EvPeriodicWord {
    if g.is_empty() {
        return xi.clone();
    }
    SectionRun::new(g, xi).image()
}

/// Whether two words differ in finitely many letters.
pub fn same_orbit(xi: &EvPeriodicWord, eta: &EvPeriodicWord) -> bool {
    let p = xi.period.len();
    if p != eta.period.len() {
        return false;
    }
    let start = xi.pre.len().max(eta.pre.len());
    (start..start + p).all(|i| xi.letter(i) == eta.letter(i))
}

pub fn in_stabilizer(g: &GroupElement, xi: &EvPeriodicWord) -> bool {
    act_beta(g, xi) == *xi
}

/// Whether `g` fixes a whole neighborhood of `xi`: it fixes `xi` and some
/// section along a prefix of `xi` is trivial.
pub fn in_neighborhood_stabilizer(g: &GroupElement, xi: &EvPeriodicWord) -> bool {
    if g.is_empty() {
        return true;
    }
    let run = SectionRun::new(g, xi);
    run.image() == *xi && run.sections.iter().any(GroupElement::is_trivial)
}

/// Coset of `g` in `St(1^w) / St°(1^w)`, or `None` when `g` moves `1^w`.
pub fn klein_coset(g: &GroupElement) -> Option<Klein> {
    let xi0 = EvPeriodicWord::ones();
    if !in_stabilizer(g, &xi0) {
        return None;
    }
    let coset = Klein::ALL
        .into_iter()
        .find(|h| in_neighborhood_stabilizer(&g.mul(&h.element()), &xi0));
    Some(
        coset.expect(
            "every stabilizer element lies in a Klein coset of the neighborhood stabilizer",
        ),
    )
}

/// An element `g'` fixing the letter `x` with section `g'|_x = g`.
///
/// Letters lift through fixed elements of the first-level stabilizer:
/// at `0` via `b, ada, aba, aca`, at `1` via `aba, d, b, c`.
pub fn lift(g: &GroupElement, x: Bit) -> GroupElement {
    use Generator::{A, B, C, D};
    let image: fn(Generator) -> &'static [Generator] = if x == 0 {
        |s| match s {
            A => &[B],
            B => &[A, D, A],
            C => &[A, B, A],
            D => &[A, C, A],
        }
    } else {
        |s| match s {
            A => &[A, B, A],
            B => &[D],
            C => &[B],
            D => &[C],
        }
    };
    GroupElement::reduce(g.letters().iter().flat_map(|&s| image(s).iter().copied()))
}

/// An element fixing the vertex `prefix` whose section there is `g`.
pub fn lift_along(g: &GroupElement, prefix: &[Bit]) -> GroupElement {
    prefix.iter().rev().fold(g.clone(), |acc, &x| lift(&acc, x))
}

/// An element mapping the finite word `from` to `to` (equal lengths),
/// found by breadth-first search over the level.
pub fn transporter(from: &[Bit], to: &[Bit]) -> Option<GroupElement> {
    if from.len() != to.len() {
        return None;
    }
    let mut parent: HashMap<Vec<Bit>, (Vec<Bit>, Generator)> = HashMap::new();
    let mut queue = VecDeque::from([from.to_vec()]);
    parent.insert(from.to_vec(), (from.to_vec(), Generator::A));
    while let Some(w) = queue.pop_front() {
        if w == to {
            let mut letters = Vec::new();
            let mut cur = w;
            while cur != from {
                let (prev, s) = parent[&cur].clone();
                letters.push(s);
                cur = prev;
            }
            // The last step taken is the leftmost letter.
            return Some(GroupElement::reduce(letters));
        }
        for s in Generator::ALL {
            let next = GroupElement::generator(s).apply(&w);
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), (w.clone(), s));
                queue.push_back(next);
            }
        }
    }
    None
}

/// An element of `St°(xi)` that moves `eta`, built by conjugating `d` into
/// position and lifting it along the common prefix. `None` when `xi == eta`.
pub fn separating_element(xi: &EvPeriodicWord, eta: &EvPeriodicWord) -> Option<GroupElement> {
    let n = xi.common_prefix_len(eta)?;
    let common = xi.prefix(n);
    let tail = (n..n + 3).map(|i| eta.letter(i)).collect::<Vec<_>>();
    let h = transporter(&tail, &[1, 0, 0]).expect("level is transitive");
    let local = GroupElement::generator(Generator::D).conjugate_by(&h.inverse());
    Some(lift_along(&local, &common))
}

/// A point of the orbit of `base`, stored as the set of positions where it
/// differs from `base`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitPoint {
    base: Arc<EvPeriodicWord>,
    /// Sorted 1-based positions.
    flips: Vec<usize>,
}

impl OrbitPoint {
    pub fn new(base: Arc<EvPeriodicWord>) -> Self {
        Self {
            base,
            flips: Vec::new(),
        }
    }

    /// Expresses `word` relative to `base`, if they lie in the same orbit.
    pub fn from_word(base: Arc<EvPeriodicWord>, word: &EvPeriodicWord) -> Option<Self> {
        if !same_orbit(&base, word) {
            return None;
        }
        let end = base.pre.len().max(word.pre.len());
        let flips = (0..end)
            .filter(|&i| base.letter(i) != word.letter(i))
            .map(|i| i + 1)
            .collect();
        Some(Self { base, flips })
    }

    pub fn base(&self) -> &Arc<EvPeriodicWord> {
        &self.base
    }

    pub fn flips(&self) -> &[usize] {
        &self.flips
    }

    pub fn is_base(&self) -> bool {
        self.flips.is_empty()
    }

    /// Letter at 1-based position `pos`.
    pub fn letter(&self, pos: usize) -> Bit {
        self.base.letter(pos - 1) ^ self.flips.binary_search(&pos).is_ok() as Bit
    }

    fn toggle(&mut self, pos: usize) {
        match self.flips.binary_search(&pos) {
            Ok(i) => {
                self.flips.remove(i);
            }
            Err(i) => self.flips.insert(i, pos),
        }
    }

    pub fn first_zero(&self) -> Option<usize> {
        let last_flip = self.flips.last().copied().unwrap_or(0);
        let horizon = last_flip + self.base.pre.len() + self.base.period.len() + 1;
        (1..=horizon).find(|&pos| self.letter(pos) == 0)
    }

    pub fn apply_generator(&self, s: Generator) -> OrbitPoint {
        let mut out = self.clone();
        match s {
            Generator::A => out.toggle(1),
            s => {
                if let Some(k) = self.first_zero() {
                    if crate::group::first_zero_fixer(k) != s {
                        out.toggle(k + 1);
                    }
                }
            }
        }
        out
    }

    /// Action of a word, rightmost letter first.
    pub fn apply(&self, g: &GroupElement) -> OrbitPoint {
        g.letters()
            .iter()
            .rev()
            .fold(self.clone(), |p, &s| p.apply_generator(s))
    }

    pub fn to_word(&self) -> EvPeriodicWord {
        let pre_len = self
            .base
            .pre
            .len()
            .max(self.flips.last().copied().unwrap_or(0));
        let pre = (1..=pre_len).map(|pos| self.letter(pos)).collect();
        let period = (pre_len..pre_len + self.base.period.len())
            .map(|i| self.base.letter(i))
            .collect();
        EvPeriodicWord::new(pre, period).expect("period is nonempty")
    }
}

impl fmt::Display for OrbitPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_word())
    }
}
