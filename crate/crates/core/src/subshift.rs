//! Eventually periodic words over `{0, .., 2k-1}`, the subshift `Omega_k` and the
//! symbolic kfsm test.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::hm;

pub type Symbol = u32;

/// A word `pre period period period ...`. An empty period marks a finite prefix.
///
/// Constructors normalize the representation: the period block is primitive and
/// the preperiod is as short as possible, so structural equality is equality of
/// the infinite sequences.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet: u32,
    pre: Vec<Symbol>,
    period: Vec<Symbol>,
}

fn primitive_len(block: &[Symbol]) -> usize {
    let n = block.len();
    (1..=n)
        .find(|&d| n % d == 0 && (d..n).all(|i| block[i] == block[i - d]))
        .unwrap_or(n)
}

impl Word {
    pub fn new(alphabet: u32, pre: Vec<Symbol>, period: Vec<Symbol>) -> Result<Word> {
        if alphabet == 0 {
            return Err(Error::InvalidInput("empty alphabet".into()));
        }
        if let Some(s) = pre.iter().chain(&period).find(|&&s| s >= alphabet) {
            return Err(Error::InvalidInput(format!("symbol {s} outside alphabet of size {alphabet}")));
        }
        let mut w = Word { alphabet, pre, period };
        w.normalize();
        Ok(w)
    }

    pub fn periodic(alphabet: u32, period: Vec<Symbol>) -> Result<Word> {
        if period.is_empty() {
            return Err(Error::InvalidInput("empty period".into()));
        }
        Word::new(alphabet, Vec::new(), period)
    }

    pub fn finite(alphabet: u32, symbols: Vec<Symbol>) -> Result<Word> {
        Word::new(alphabet, symbols, Vec::new())
    }

    fn normalize(&mut self) {
        if self.period.is_empty() {
            return;
        }
        let d = primitive_len(&self.period);
        self.period.truncate(d);
        while let (Some(a), Some(b)) = (self.pre.last(), self.period.last()) {
            if a != b {
                break;
            }
            self.pre.pop();
            self.period.rotate_right(1);
        }
    }

    /// Parse `"01(23)"`, `"(0011)"`, a finite `"0123"`, or the comma form
    /// `"10,11(12,13)"` used for alphabets above 10.
    pub fn parse(s: &str, alphabet: u32) -> Result<Word> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("not a word: {s:?}"));
        let (pre, period) = match s.find('(') {
            Some(i) => {
                let rest = s[i + 1..].strip_suffix(')').ok_or_else(bad)?;
                (&s[..i], Some(rest))
            }
            None => (s.as_str(), None),
        };
        let comma = s.contains(',');
        let symbols = |t: &str| -> Result<Vec<Symbol>> {
            let t = t.trim_matches(',');
            if t.is_empty() {
                return Ok(Vec::new());
            }
            if comma {
                t.split(',').map(|x| x.parse().map_err(|_| bad())).collect()
            } else {
                t.chars().map(|c| c.to_digit(10).ok_or_else(bad)).collect()
            }
        };
        let pre = symbols(pre)?;
        match period {
            Some(p) => {
                let p = symbols(p)?;
                if p.is_empty() {
                    return Err(bad());
                }
                Word::new(alphabet, pre, p)
            }
            None => Word::finite(alphabet, pre),
        }
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn preperiod(&self) -> &[Symbol] {
        &self.pre
    }

    pub fn period(&self) -> &[Symbol] {
        &self.period
    }

    pub fn is_periodic(&self) -> bool {
        self.pre.is_empty() && !self.period.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.period.is_empty()
    }

    /// Length of a finite word; `None` for infinite words.
    pub fn len(&self) -> Option<usize> {
        self.is_finite().then_some(self.pre.len())
    }

    pub fn is_empty(&self) -> bool {
        self.is_finite() && self.pre.is_empty()
    }

    pub fn at(&self, i: usize) -> Option<Symbol> {
        if i < self.pre.len() {
            Some(self.pre[i])
        } else if self.period.is_empty() {
            None
        } else {
            Some(self.period[(i - self.pre.len()) % self.period.len()])
        }
    }

    /// The first `n` symbols (fewer if the word is a shorter finite prefix).
    pub fn prefix(&self, n: usize) -> Vec<Symbol> {
        (0..n).map_while(|i| self.at(i)).collect()
    }

    pub fn shift(&self) -> Word {
        let mut w = self.clone();
        if !w.pre.is_empty() {
            w.pre.remove(0);
        } else if !w.period.is_empty() {
            w.period.rotate_left(1);
        }
        w
    }

    fn map(&self, alphabet: u32, f: impl Fn(Symbol) -> Symbol) -> Word {
        let mut w = Word {
            alphabet,
            pre: self.pre.iter().map(|&s| f(s)).collect(),
            period: self.period.iter().map(|&s| f(s)).collect(),
        };
        w.normalize();
        w
    }

    /// Symbolwise `s -> s + 2 mod 2k`.
    pub fn deck_shift(&self) -> Word {
        let m = self.alphabet;
        self.map(m, |s| (s + 2) % m)
    }

    /// Symbolwise `s -> s mod 2`.
    pub fn project_base(&self) -> Word {
        self.map(2, |s| s % 2)
    }

    /// Symbolwise `s -> s mod 2k`, landing in the alphabet of `S_k`.
    pub fn project_cover(&self, k: u32) -> Word {
        self.map(2 * k, |s| s % (2 * k))
    }

    /// Frequency of odd symbols along the period.
    pub fn rotation_number(&self) -> Result<Rational> {
        if self.period.is_empty() {
            return Err(Error::FinitePrefixWord);
        }
        let odd = self.period.iter().filter(|&&s| s % 2 == 1).count();
        Ok(Rational::new(odd as i64, self.period.len() as i64))
    }

    /// All distinct shifts of the word, starting with the word itself.
    pub fn orbit(&self) -> Vec<Word> {
        let n = self.pre.len() + self.period.len();
        let mut out = Vec::with_capacity(n);
        let mut w = self.clone();
        for _ in 0..n {
            let next = w.shift();
            out.push(w);
            w = next;
        }
        out
    }

    /// Least rotation of the period block; identifies the orbit of a periodic word.
    pub fn canonical(&self) -> Word {
        if self.period.is_empty() {
            return self.clone();
        }
        let n = self.period.len();
        let best = (0..n)
            .min_by(|&a, &b| {
                (0..n)
                    .map(|i| self.period[(a + i) % n].cmp(&self.period[(b + i) % n]))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
            .unwrap_or(0);
        let mut period = self.period.clone();
        period.rotate_left(best);
        Word { alphabet: self.alphabet, pre: Vec::new(), period }
    }

    /// Lexicographic comparison restricted to the symbols both words define.
    /// Two words agreeing on their common finite prefix compare as equal.
    pub fn cmp_prefix(&self, other: &Word) -> Ordering {
        let horizon = match (self.len(), other.len()) {
            (None, None) => return self.cmp(other),
            (a, b) => a.unwrap_or(usize::MAX).min(b.unwrap_or(usize::MAX)),
        };
        (0..horizon)
            .map(|i| self.at(i).cmp(&other.at(i)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        let horizon = match (self.period.len(), other.period.len()) {
            (0, _) | (_, 0) => self.pre.len().max(other.pre.len()) + 1,
            (a, b) => self.pre.len().max(other.pre.len()) + a.lcm(&b),
        };
        (0..horizon)
            .map(|i| match (self.at(i), other.at(i)) {
                (Some(a), Some(b)) => a.cmp(&b),
                (None, Some(_)) => Ordering::Less,
                (Some(_), None) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
            .then(self.alphabet.cmp(&other.alphabet))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Symbol]| -> String {
            let parts: Vec<String> = v.iter().map(|s| s.to_string()).collect();
            parts.join(if self.alphabet <= 10 { "" } else { "," })
        };
        write!(f, "{}", join(&self.pre))?;
        if !self.period.is_empty() {
            if self.alphabet > 10 && !self.pre.is_empty() {
                write!(f, ",")?;
            }
            write!(f, "({})", join(&self.period))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

/// A finite union of periodic orbits, stored as one canonical word per orbit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct WordSet {
    #[serde(skip)]
    alphabet: u32,
    members: Vec<Word>,
}

impl WordSet {
    pub fn new(alphabet: u32, words: impl IntoIterator<Item = Word>) -> Result<WordSet> {
        let mut set = BTreeSet::new();
        for w in words {
            if w.alphabet != alphabet {
                return Err(Error::InvalidInput(format!("word {w} is not over alphabet {alphabet}")));
            }
            if w.period.is_empty() {
                return Err(Error::FinitePrefixWord);
            }
            set.insert(Word { alphabet, pre: Vec::new(), period: w.period.clone() }.canonical());
        }
        Ok(WordSet { alphabet, members: set.into_iter().collect() })
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn members(&self) -> &[Word] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn deck_shift(&self) -> WordSet {
        WordSet::new(self.alphabet, self.members.iter().map(Word::deck_shift)).expect("same alphabet")
    }

    /// Every rotation of every member.
    pub fn points(&self) -> impl Iterator<Item = Word> + '_ {
        self.members.iter().flat_map(Word::orbit)
    }

    /// Lexicographic max (or min) over the points of the set that begin with `symbol`.
    pub fn extreme_in_cylinder(&self, symbol: Symbol, max: bool) -> Option<Word> {
        let it = self.points().filter(|w| w.at(0) == Some(symbol));
        if max { it.max() } else { it.min() }
    }
}

fn allowed(a: Symbol, b: Symbol, k: u32) -> bool {
    let m = 2 * k;
    if a % 2 == 0 {
        b == a || b == (a + 1) % m
    } else {
        b == (a + 1) % m || b == (a + 2) % m
    }
}

/// Membership in `Omega_k`: every consecutive pair, including the wrap of the
/// period block, is an allowed transition.
pub fn is_in_omega(w: &Word, k: u32) -> bool {
    if w.alphabet != 2 * k {
        return false;
    }
    let n = w.pre.len() + w.period.len();
    let steps = if w.period.is_empty() { n.saturating_sub(1) } else { n };
    (0..steps).all(|i| allowed(w.at(i).unwrap(), w.at(i + 1).unwrap(), k))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum KfsmVerdict {
    Kfsm,
    NotKfsm { j: usize, left: Word, right: Word },
}

impl KfsmVerdict {
    pub fn is_kfsm(&self) -> bool {
        matches!(self, KfsmVerdict::Kfsm)
    }
}

/// The symbolic kfsm test: for each `j = 1..=k`, the shifted maximum over the
/// cylinder `[2j-1]` must not exceed the shifted minimum over `[2j mod 2k]`.
/// A constraint whose cylinder is unvisited is skipped.
pub fn is_symbolic_kfsm(z: &WordSet, k: u32) -> Result<KfsmVerdict> {
    if z.alphabet != 2 * k {
        return Err(Error::InvalidInput(format!("set is not over alphabet {}", 2 * k)));
    }
    if let Some(w) = z.members.iter().find(|w| !is_in_omega(w, k)) {
        return Err(Error::InvalidInput(format!("{w} is not in Omega_{k}")));
    }
    for j in 1..=k {
        let hi = z.extreme_in_cylinder(2 * j - 1, true);
        let lo = z.extreme_in_cylinder((2 * j) % (2 * k), false);
        if let (Some(hi), Some(lo)) = (hi, lo) {
            let (left, right) = (hi.shift(), lo.shift());
            if left > right {
                return Ok(KfsmVerdict::NotKfsm { j: j as usize, left, right });
            }
        }
    }
    Ok(KfsmVerdict::Kfsm)
}

/// The periodic Sturmian word of rotation number `omega`, as its least rotation.
pub fn sturmian_word(omega: &Rational) -> Result<Word> {
    let (p, q) = hm::small_fraction(omega)?;
    let nu = vec![Rational::one() - omega];
    let cluster = hm::b_k_rational(1, p, q, &nu)?;
    Ok(cluster.orbits[0].clone())
}

/// A length-`n` Sturmian prefix for an irrational rotation number represented by
/// the rational proxy `omega`, read from the base point `x`.
pub fn sturmian_prefix(omega: &Rational, x: &Rational, n: usize) -> Result<Word> {
    let params = hm::HMParams::proxy(1, omega.clone(), vec![Rational::one() - omega])?;
    hm::b_k_prefix(&params, &crate::exactnum::CirclePoint::new(x.clone(), 1), n)
}

fn check_kappa(k0: &Word, k1: &Word) -> Result<()> {
    if k0.alphabet != 2 || k1.alphabet != 2 {
        return Err(Error::InvalidKappaPair("kappa words must be binary".into()));
    }
    if k0.cmp_prefix(k1) == Ordering::Greater {
        return Err(Error::InvalidKappaPair(format!("{k0} > {k1}")));
    }
    for s in k0.orbit().iter().chain(k1.orbit().iter()) {
        if s.cmp_prefix(k0) == Ordering::Less || s.cmp_prefix(k1) == Ordering::Greater {
            return Err(Error::InvalidKappaPair(format!("shift {s} leaves [{k0}, {k1}]")));
        }
    }
    Ok(())
}

/// Whether every shift of `w` lies in `[kappa0, kappa1]`.
pub fn in_order_interval(w: &Word, kappa0: &Word, kappa1: &Word) -> Result<bool> {
    check_kappa(kappa0, kappa1)?;
    if w.alphabet != 2 {
        return Err(Error::InvalidInput("word must be binary".into()));
    }
    Ok(w.orbit()
        .iter()
        .all(|s| s.cmp_prefix(kappa0) != Ordering::Less && s.cmp_prefix(kappa1) != Ordering::Greater))
}
