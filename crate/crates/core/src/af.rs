//! Argumentation frameworks: data model, APX/TGF parsing and a brute-force
//! semantics oracle.
//!
//! The oracle works on `u64` subset masks and is the ground truth every
//! encoding is tested against. It refuses frameworks above its configured
//! argument limit instead of silently degrading.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Default number of arguments the oracle is willing to enumerate over.
pub const DEFAULT_ORACLE_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AfError {
    #[error("line {line}: malformed fact `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: argument `{name}` declared twice")]
    DuplicateArgument { line: usize, name: String },
    #[error("line {line}: attack references undeclared argument `{name}`")]
    Undeclared { line: usize, name: String },
    #[error("unknown argument `{0}`")]
    UnknownArgument(String),
    #[error("oracle limit exceeded: {n} arguments > limit {limit}")]
    OracleLimit { n: usize, limit: usize },
}

/// A named argument with its dense index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Argument {
    pub name: String,
    pub index: usize,
}

/// The seven semantics handled by the oracle and the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemanticsId {
    ConflictFree,
    Admissible,
    Complete,
    Stable,
    Preferred,
    SemiStable,
    Stage,
}

impl SemanticsId {
    pub const ALL: [SemanticsId; 7] = [
        SemanticsId::ConflictFree,
        SemanticsId::Admissible,
        SemanticsId::Complete,
        SemanticsId::Stable,
        SemanticsId::Preferred,
        SemanticsId::SemiStable,
        SemanticsId::Stage,
    ];

    /// Short tag used on the command line (`cf`, `adm`, ...).
    pub fn tag(self) -> &'static str {
        match self {
            SemanticsId::ConflictFree => "cf",
            SemanticsId::Admissible => "adm",
            SemanticsId::Complete => "com",
            SemanticsId::Stable => "stb",
            SemanticsId::Preferred => "prf",
            SemanticsId::SemiStable => "sst",
            SemanticsId::Stage => "stg",
        }
    }

    /// Semantics whose encoding is a two-block QBF rather than a CNF.
    pub fn is_second_level(self) -> bool {
        matches!(
            self,
            SemanticsId::Preferred | SemanticsId::SemiStable | SemanticsId::Stage
        )
    }
}

impl fmt::Display for SemanticsId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SemanticsId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SemanticsId::ALL
            .into_iter()
            .find(|sem| sem.tag() == s)
            .ok_or_else(|| format!("unknown semantics `{s}` (expected cf|adm|com|stb|prf|sst|stg)"))
    }
}

/// Credulous or skeptical acceptance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Credulous,
    Skeptical,
}

/// A set of arguments, stored as a bitset over argument indices.
///
/// Ordering compares the bitset as an unsigned integer where argument `i`
/// contributes bit `i`.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Extension {
    words: Vec<u64>,
}

impl Extension {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        let mut e = Self::new();
        for i in it {
            e.insert(i);
        }
        e
    }

    pub fn from_mask(mask: u64) -> Self {
        let mut e = Extension { words: vec![mask] };
        e.trim();
        e
    }

    /// The low 64 bits; only meaningful for frameworks with ≤ 64 arguments.
    pub fn mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn insert(&mut self, i: usize) {
        let w = i / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter(move |b| w & (1 << b) != 0).map(move |b| wi * 64 + b)
        })
    }

    pub fn is_subset(&self, other: &Extension) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    /// Render with argument names, e.g. `{z,r}`.
    pub fn display<'a>(&'a self, af: &'a Af) -> impl fmt::Display + 'a {
        DisplayExt { ext: self, af }
    }
}

impl PartialOrd for Extension {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Extension {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.words
            .len()
            .cmp(&other.words.len())
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl fmt::Debug for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

struct DisplayExt<'a> {
    ext: &'a Extension,
    af: &'a Af,
}

impl fmt::Display for DisplayExt<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.ext.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            f.write_str(self.af.name(i))?;
        }
        f.write_str("}")
    }
}

/// An abstract argumentation framework `(A, R)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Af {
    names: Vec<String>,
    index: HashMap<String, usize>,
    attacks: BTreeSet<(usize, usize)>,
}

impl Af {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add an argument; returns its index. Fails on a duplicate name.
    pub fn add_argument(&mut self, name: &str) -> Result<usize, AfError> {
        if self.index.contains_key(name) {
            return Err(AfError::DuplicateArgument { line: 0, name: name.to_string() });
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        Ok(i)
    }

    /// Add an attack between existing indices (duplicates are ignored).
    pub fn add_attack(&mut self, from: usize, to: usize) {
        assert!(from < self.len() && to < self.len(), "attack endpoint out of range");
        self.attacks.insert((from, to));
    }

    /// Build from names and name pairs; panics on unknown names (test helper).
    pub fn from_names(args: &[&str], attacks: &[(&str, &str)]) -> Self {
        let mut af = Af::new();
        for a in args {
            af.add_argument(a).expect("duplicate argument");
        }
        for (x, y) in attacks {
            let (x, y) = (af.index_of(x).expect("unknown"), af.index_of(y).expect("unknown"));
            af.add_attack(x, y);
        }
        af
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn argument(&self, name: &str) -> Result<Argument, AfError> {
        self.index_of(name)
            .map(|index| Argument { name: name.to_string(), index })
            .ok_or_else(|| AfError::UnknownArgument(name.to_string()))
    }

    pub fn arguments(&self) -> impl Iterator<Item = Argument> + '_ {
        self.names
            .iter()
            .enumerate()
            .map(|(index, name)| Argument { name: name.clone(), index })
    }

    /// Attacks in lexicographic `(attacker, target)` order.
    pub fn attacks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.attacks.iter().copied()
    }

    pub fn num_attacks(&self) -> usize {
        self.attacks.len()
    }

    pub fn attacks_pair(&self, from: usize, to: usize) -> bool {
        self.attacks.contains(&(from, to))
    }

    pub fn has_self_attack(&self) -> bool {
        self.attacks.iter().any(|&(a, b)| a == b)
    }

    /// Serialize as APX facts, one per line.
    pub fn to_apx(&self) -> String {
        let mut out = String::new();
        for n in &self.names {
            out.push_str(&format!("arg({n}).\n"));
        }
        for &(a, b) in &self.attacks {
            out.push_str(&format!("att({},{}).\n", self.names[a], self.names[b]));
        }
        out
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parse ICCMA APX facts (`arg(x).`, `att(x,y).`, `%` comments).
pub fn parse_apx(text: &str) -> Result<Af, AfError> {
    // Collect (line, fact) pairs; a fact may span lines and ends at '.'.
    let mut facts: Vec<(usize, String)> = Vec::new();
    let mut cur = String::new();
    let mut start_line = 1;
    for (lno, line) in text.lines().enumerate() {
        let lno = lno + 1;
        if line.trim_start().starts_with('%') {
            continue;
        }
        for ch in line.chars() {
            if ch.is_whitespace() {
                continue;
            }
            if cur.is_empty() {
                start_line = lno;
            }
            if ch == '.' {
                facts.push((start_line, std::mem::take(&mut cur)));
            } else {
                cur.push(ch);
            }
        }
    }
    if !cur.is_empty() {
        return Err(AfError::Malformed { line: start_line, text: cur });
    }

    let mut af = Af::new();
    let mut pending = Vec::new();
    for (line, fact) in facts {
        let malformed = || AfError::Malformed { line, text: fact.clone() };
        let (head, rest) = fact.split_once('(').ok_or_else(malformed)?;
        let inner = rest.strip_suffix(')').ok_or_else(malformed)?;
        match head {
            "arg" if valid_name(inner) => {
                af.add_argument(inner).map_err(|_| AfError::DuplicateArgument {
                    line,
                    name: inner.to_string(),
                })?;
            }
            "att" => {
                let (x, y) = inner.split_once(',').ok_or_else(malformed)?;
                if !valid_name(x) || !valid_name(y) {
                    return Err(malformed());
                }
                pending.push((line, x.to_string(), y.to_string()));
            }
            _ => return Err(malformed()),
        }
    }
    resolve_attacks(af, pending)
}

fn resolve_attacks(mut af: Af, pending: Vec<(usize, String, String)>) -> Result<Af, AfError> {
    for (line, x, y) in pending {
        let lookup = |n: &str| {
            af.index_of(n)
                .ok_or_else(|| AfError::Undeclared { line, name: n.to_string() })
        };
        let (a, b) = (lookup(&x)?, lookup(&y)?);
        af.add_attack(a, b);
    }
    Ok(af)
}

/// Parse Trivial Graph Format: node lines, a `#` line, then edge lines.
pub fn parse_tgf(text: &str) -> Result<Af, AfError> {
    let mut af = Af::new();
    let mut pending = Vec::new();
    let mut in_edges = false;
    for (lno, line) in text.lines().enumerate() {
        let lno = lno + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "#" {
            if in_edges {
                return Err(AfError::Malformed { line: lno, text: line.to_string() });
            }
            in_edges = true;
            continue;
        }
        let mut toks = line.split_whitespace();
        let malformed = || AfError::Malformed { line: lno, text: line.to_string() };
        if !in_edges {
            let name = toks.next().ok_or_else(malformed)?;
            if !valid_name(name) {
                return Err(malformed());
            }
            af.add_argument(name).map_err(|_| AfError::DuplicateArgument {
                line: lno,
                name: name.to_string(),
            })?;
        } else {
            let x = toks.next().ok_or_else(malformed)?;
            let y = toks.next().ok_or_else(malformed)?;
            pending.push((lno, x.to_string(), y.to_string()));
        }
    }
    resolve_attacks(af, pending)
}

/// Pick the parser from a file name: `.tgf` means TGF, anything else APX.
pub fn parse_by_extension(path: &str, text: &str) -> Result<Af, AfError> {
    if path.ends_with(".tgf") {
        parse_tgf(text)
    } else {
        parse_apx(text)
    }
}

/// `def_F(S)`: arguments all of whose attackers are attacked by `S`.
pub fn defended_set(af: &Af, s: &Extension) -> Extension {
    let mut attacked = Extension::new();
    for (a, b) in af.attacks() {
        if s.contains(a) {
            attacked.insert(b);
        }
    }
    let mut undefended = Extension::new();
    for (a, b) in af.attacks() {
        if !attacked.contains(a) {
            undefended.insert(b);
        }
    }
    Extension::from_indices((0..af.len()).filter(|&i| !undefended.contains(i)))
}

/// The range `S⁺`: `S` together with everything it attacks.
pub fn range(af: &Af, s: &Extension) -> Extension {
    let mut r = s.clone();
    for (a, b) in af.attacks() {
        if s.contains(a) {
            r.insert(b);
        }
    }
    r
}

/// Brute-force semantics oracle over subset masks.
#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    af: &'a Af,
    limit: usize,
    out: Vec<u64>,
    inc: Vec<u64>,
    all: u64,
}

impl<'a> Oracle<'a> {
    pub fn new(af: &'a Af) -> Result<Self, AfError> {
        Self::with_limit(af, DEFAULT_ORACLE_LIMIT)
    }

    /// An oracle with a custom argument limit (capped at 63).
    pub fn with_limit(af: &'a Af, limit: usize) -> Result<Self, AfError> {
        let limit = limit.min(63);
        if af.len() > limit {
            return Err(AfError::OracleLimit { n: af.len(), limit });
        }
        let mut out = vec![0u64; af.len()];
        let mut inc = vec![0u64; af.len()];
        for (a, b) in af.attacks() {
            out[a] |= 1 << b;
            inc[b] |= 1 << a;
        }
        let all = if af.is_empty() { 0 } else { u64::MAX >> (64 - af.len()) };
        Ok(Oracle { af, limit, out, inc, all })
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    fn attacked_by(&self, s: u64) -> u64 {
        bits(s).fold(0, |acc, a| acc | self.out[a])
    }

    fn conflict_free(&self, s: u64) -> bool {
        self.attacked_by(s) & s == 0
    }

    fn range_mask(&self, s: u64) -> u64 {
        s | self.attacked_by(s)
    }

    fn defended(&self, s: u64) -> u64 {
        let att = self.attacked_by(s);
        (0..self.af.len())
            .filter(|&a| self.inc[a] & !att == 0)
            .fold(0, |acc, a| acc | 1 << a)
    }

    fn admissible(&self, s: u64) -> bool {
        self.conflict_free(s) && s & !self.defended(s) == 0
    }

    fn base(&self, s: u64, sigma: SemanticsId) -> bool {
        match sigma {
            SemanticsId::ConflictFree | SemanticsId::Stage => self.conflict_free(s),
            SemanticsId::Admissible | SemanticsId::Preferred | SemanticsId::SemiStable => {
                self.admissible(s)
            }
            SemanticsId::Complete => self.admissible(s) && self.defended(s) == s,
            SemanticsId::Stable => self.conflict_free(s) && self.range_mask(s) == self.all,
        }
    }

    /// The quantity a second-level semantics maximizes (the set or its range).
    fn key(&self, s: u64, sigma: SemanticsId) -> u64 {
        match sigma {
            SemanticsId::SemiStable | SemanticsId::Stage => self.range_mask(s),
            _ => s,
        }
    }

    /// Membership test `s ∈ σ(F)`.
    pub fn check_mask(&self, s: u64, sigma: SemanticsId) -> bool {
        if !self.base(s, sigma) {
            return false;
        }
        if !sigma.is_second_level() {
            return true;
        }
        let k = self.key(s, sigma);
        // Look for a candidate with a strictly larger key.
        let rest = self.all & !s;
        match sigma {
            SemanticsId::Preferred => subsets(rest)
                .filter(|&t| t != 0)
                .all(|t| !self.admissible(s | t)),
            _ => subsets(self.all).all(|t| {
                let kt = self.key(t, sigma);
                !(kt != k && kt & k == k && self.base(t, sigma))
            }),
        }
    }

    pub fn check(&self, s: &Extension, sigma: SemanticsId) -> bool {
        self.check_mask(s.mask(), sigma)
    }

    /// All σ-extensions as masks, ascending.
    pub fn enumerate_masks(&self, sigma: SemanticsId) -> Vec<u64> {
        let base: Vec<u64> = subsets(self.all).filter(|&s| self.base(s, sigma)).collect();
        if !sigma.is_second_level() {
            let mut v = base;
            v.sort_unstable();
            return v;
        }
        let keys: Vec<u64> = base.iter().map(|&s| self.key(s, sigma)).collect();
        // Maximal keys among the base family.
        let mut order: Vec<usize> = (0..base.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(keys[i].count_ones()));
        let mut maximal: Vec<u64> = Vec::new();
        for &i in &order {
            let k = keys[i];
            if !maximal.iter().any(|&m| m != k && m & k == k) && !maximal.contains(&k) {
                maximal.push(k);
            }
        }
        let mut v: Vec<u64> = base
            .iter()
            .zip(&keys)
            .filter(|(_, k)| maximal.contains(k))
            .map(|(&s, _)| s)
            .collect();
        v.sort_unstable();
        v
    }

    pub fn enumerate(&self, sigma: SemanticsId) -> Vec<Extension> {
        self.enumerate_masks(sigma).into_iter().map(Extension::from_mask).collect()
    }

    pub fn accept(&self, sigma: SemanticsId, arg: usize, mode: Mode) -> bool {
        let bit = 1u64 << arg;
        if mode == Mode::Credulous && !sigma.is_second_level() {
            // Stop at the first witness instead of collecting the family.
            return subsets(self.all & !bit).any(|s| self.base(s | bit, sigma));
        }
        let exts = self.enumerate_masks(sigma);
        match mode {
            Mode::Credulous => exts.iter().any(|&e| e & (1 << arg) != 0),
            Mode::Skeptical => exts.iter().all(|&e| e & (1 << arg) != 0),
        }
    }
}

/// `true` iff `s ∈ σ(af)` (oracle with the default limit).
pub fn check(af: &Af, s: &Extension, sigma: SemanticsId) -> Result<bool, AfError> {
    Ok(Oracle::new(af)?.check(s, sigma))
}

/// All σ-extensions in ascending bitset order.
pub fn enumerate(af: &Af, sigma: SemanticsId) -> Result<Vec<Extension>, AfError> {
    Ok(Oracle::new(af)?.enumerate(sigma))
}

/// Credulous / skeptical acceptance by enumeration. Skeptical acceptance over
/// an empty extension family is `true`.
pub fn oracle_accept(af: &Af, sigma: SemanticsId, a: &Argument, mode: Mode) -> Result<bool, AfError> {
    Ok(Oracle::new(af)?.accept(sigma, a.index, mode))
}

fn bits(mut s: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if s == 0 {
            None
        } else {
            let i = s.trailing_zeros() as usize;
            s &= s - 1;
            Some(i)
        }
    })
}

/// All submasks of `m` in ascending order.
fn subsets(m: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == m { None } else { Some(((cur | !m).wrapping_add(1)) & m) };
        Some(cur)
    })
}
