//! Regular trees with unit edges.
//!
//! Vertices are addressed by non-backtracking words read from the root: the
//! first letter picks one of the `k` root edges, every later letter picks one
//! of the `k - 1` children in fixed order (the parent edge is never labelled).
//! With this convention every word is automatically non-backtracking and two
//! words name the same vertex iff they are equal.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::value::{int, to_f64};

pub type Letter = u8;

/// Number of admissible letters at position `index` of a word in `T_k`.
pub fn letter_count(valence: u32, index: usize) -> u32 {
    if index == 0 {
        valence
    } else {
        valence - 1
    }
}

pub fn check_word(valence: u32, word: &[Letter], offset: usize) -> Result<()> {
    for (i, &l) in word.iter().enumerate() {
        if u32::from(l) >= letter_count(valence, i + offset) {
            return Err(Error::InvalidPoint(format!(
                "letter {l} at position {} exceeds the {} edges available in T_{valence}",
                i + offset,
                letter_count(valence, i + offset)
            )));
        }
    }
    Ok(())
}

/// Partial progress along the edge labelled `letter` leaving the end of a word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeOffset {
    pub letter: Letter,
    /// Strictly inside `(0, 1)`.
    pub offset: BigRational,
}

/// A point of the tree: a vertex word plus an optional partial edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreePoint {
    word: Vec<Letter>,
    edge: Option<EdgeOffset>,
}

impl TreePoint {
    pub fn root() -> Self {
        TreePoint {
            word: Vec::new(),
            edge: None,
        }
    }

    pub fn vertex(word: Vec<Letter>) -> Self {
        TreePoint { word, edge: None }
    }

    /// A point `offset` of the way along edge `letter` after `word`. An offset of
    /// zero yields the vertex itself.
    pub fn on_edge(word: Vec<Letter>, letter: Letter, offset: BigRational) -> Result<Self> {
        if offset.is_negative() || offset >= BigRational::one() {
            return Err(Error::InvalidPoint(format!(
                "edge offset {offset} outside [0, 1)"
            )));
        }
        if offset.is_zero() {
            return Ok(TreePoint::vertex(word));
        }
        Ok(TreePoint {
            word,
            edge: Some(EdgeOffset { letter, offset }),
        })
    }

    pub fn word(&self) -> &[Letter] {
        &self.word
    }

    pub fn edge(&self) -> Option<&EdgeOffset> {
        self.edge.as_ref()
    }

    pub fn is_vertex(&self) -> bool {
        self.edge.is_none()
    }

    pub fn depth(&self) -> BigRational {
        let base = int(self.word.len() as i64);
        match &self.edge {
            Some(e) => base + &e.offset,
            None => base,
        }
    }

    pub(crate) fn check(&self, valence: u32) -> Result<()> {
        check_word(valence, &self.word, 0)?;
        if let Some(e) = &self.edge {
            check_word(valence, &[e.letter], self.word.len())?;
        }
        Ok(())
    }

    /// Letters of the geodesic from the root to this point, including a partial edge.
    fn path_letter(&self, i: usize) -> Option<Letter> {
        match i.cmp(&self.word.len()) {
            Ordering::Less => Some(self.word[i]),
            Ordering::Equal => self.edge.as_ref().map(|e| e.letter),
            Ordering::Greater => None,
        }
    }
}

impl fmt::Display for TreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_word(f, &self.word)?;
        if let Some(e) = &self.edge {
            write!(f, ">{}@{}", e.letter, e.offset)?;
        }
        Ok(())
    }
}

fn write_word(f: &mut fmt::Formatter<'_>, word: &[Letter]) -> fmt::Result {
    if word.is_empty() {
        return write!(f, ".");
    }
    let parts: Vec<String> = word.iter().map(|l| l.to_string()).collect();
    // Single-digit alphabets print compactly; larger valences use separators.
    if word.iter().all(|&l| l < 10) {
        write!(f, "{}", parts.concat())
    } else {
        write!(f, "{}", parts.join("-"))
    }
}

pub(crate) fn parse_word(s: &str) -> Result<Vec<Letter>> {
    if s == "." || s.is_empty() {
        return Ok(Vec::new());
    }
    let parse_one = |t: &str| {
        t.parse::<Letter>()
            .map_err(|_| Error::Parse(format!("bad tree letter `{t}`")))
    };
    if s.contains('-') {
        s.split('-').map(parse_one).collect()
    } else {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as Letter)
                    .ok_or_else(|| Error::Parse(format!("bad tree letter `{c}`")))
            })
            .collect()
    }
}

impl std::str::FromStr for TreePoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('>') {
            None => Ok(TreePoint::vertex(parse_word(s)?)),
            Some((w, rest)) => {
                let (l, off) = rest
                    .split_once('@')
                    .ok_or_else(|| Error::Parse(format!("tree point `{s}` lacks an offset")))?;
                let letter = l
                    .parse::<Letter>()
                    .map_err(|_| Error::Parse(format!("bad tree letter `{l}`")))?;
                let offset: BigRational = off
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad rational offset `{off}`")))?;
                TreePoint::on_edge(parse_word(w)?, letter, offset)
            }
        }
    }
}

/// An end of the tree given by an eventually periodic word `pre · period^∞`.
///
/// Stored canonically: the period is primitive and the preperiod is as short as
/// possible, so two ends are equal iff their representations are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeEnd {
    pre: Vec<Letter>,
    period: Vec<Letter>,
}

impl TreeEnd {
    pub fn new(pre: Vec<Letter>, period: Vec<Letter>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidPoint("tree end needs a nonempty period".into()));
        }
        let mut pre = pre;
        let mut period = primitive_root(period);
        while let (Some(&a), Some(&b)) = (pre.last(), period.last()) {
            if a != b {
                break;
            }
            pre.pop();
            period.rotate_right(1);
        }
        Ok(TreeEnd { pre, period })
    }

    /// Like [`TreeEnd::new`] but also validates letters for `T_valence`.
    pub fn checked(valence: u32, pre: Vec<Letter>, period: Vec<Letter>) -> Result<Self> {
        let end = TreeEnd::new(pre, period)?;
        end.check(valence)?;
        Ok(end)
    }

    pub fn preperiod(&self) -> &[Letter] {
        &self.pre
    }

    pub fn period(&self) -> &[Letter] {
        &self.period
    }

    pub fn letter(&self, i: usize) -> Letter {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.period[(i - self.pre.len()) % self.period.len()]
        }
    }

    /// The first `n` letters.
    pub fn prefix(&self, n: usize) -> Vec<Letter> {
        (0..n).map(|i| self.letter(i)).collect()
    }

    pub(crate) fn check(&self, valence: u32) -> Result<()> {
        check_word(valence, &self.pre, 0)?;
        // Period letters recur at positions >= 1, so they must fit the child alphabet
        // even when the preperiod is empty.
        check_word(valence, &self.period, 1)
    }

    /// Length of the longest common prefix, or `None` if the ends coincide.
    pub fn common_prefix(&self, other: &TreeEnd) -> Option<usize> {
        if self == other {
            return None;
        }
        let horizon =
            self.pre.len().max(other.pre.len()) + self.period.len().lcm(&other.period.len());
        (0..horizon).find(|&i| self.letter(i) != other.letter(i))
    }

    /// Does the end pass through the cylinder of words starting with `prefix`?
    pub fn starts_with(&self, prefix: &[Letter]) -> bool {
        prefix.iter().enumerate().all(|(i, &l)| self.letter(i) == l)
    }

    /// An end that follows this one for exactly `m` letters, then leaves along
    /// the smallest other letter and continues with `0`s.
    pub fn branch_partner(&self, valence: u32, m: usize) -> Result<TreeEnd> {
        let mut word = self.prefix(m);
        let here = self.letter(m);
        let other = (0..letter_count(valence, m) as Letter)
            .find(|&l| l != here)
            .expect("every vertex has at least two forward letters");
        word.push(other);
        TreeEnd::checked(valence, word, vec![0])
    }
}

fn primitive_root(period: Vec<Letter>) -> Vec<Letter> {
    let n = period.len();
    for d in 1..n {
        if n.is_multiple_of(d) && (d..n).all(|i| period[i] == period[i - d]) {
            return period[..d].to_vec();
        }
    }
    period
}

impl fmt::Display for TreeEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_word(f, &self.pre)?;
        write!(f, "|")?;
        write_word(f, &self.period)
    }
}

impl std::str::FromStr for TreeEnd {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (pre, period) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("tree end `{s}` lacks `|`")))?;
        TreeEnd::new(parse_word(pre)?, parse_word(period)?)
    }
}

/// A geodesic from the root: either a finite segment ending at a point or a ray to an end.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Path<'a> {
    Finite(&'a TreePoint),
    Infinite(&'a TreeEnd),
}

impl Path<'_> {
    fn letter(&self, i: usize) -> Option<Letter> {
        match self {
            Path::Finite(p) => p.path_letter(i),
            Path::Infinite(e) => Some(e.letter(i)),
        }
    }

    fn depth(&self) -> Option<BigRational> {
        match self {
            Path::Finite(p) => Some(p.depth()),
            Path::Infinite(_) => None,
        }
    }

    fn depth_f64(&self) -> f64 {
        match self {
            Path::Finite(p) => to_f64(&p.depth()),
            Path::Infinite(_) => f64::INFINITY,
        }
    }

    /// Common letters with `other`, scanning at most `cap` positions.
    fn common_letters(&self, other: &Path<'_>, cap: usize) -> usize {
        if let (Path::Infinite(a), Path::Infinite(b)) = (self, other) {
            return a.common_prefix(b).unwrap_or(usize::MAX).min(cap);
        }
        let mut i = 0;
        while i < cap {
            match (self.letter(i), other.letter(i)) {
                (Some(a), Some(b)) if a == b => i += 1,
                _ => break,
            }
        }
        i
    }

    /// The point at distance `depth` from the root along this path.
    fn point_at(&self, depth: &BigRational) -> TreePoint {
        let whole = depth.floor();
        let n = whole.to_integer().to_usize().expect("depth fits in usize");
        let frac = depth - &whole;
        let word: Vec<Letter> = (0..n)
            .map(|i| self.letter(i).expect("depth within path"))
            .collect();
        if frac.is_zero() {
            TreePoint::vertex(word)
        } else {
            let letter = self.letter(n).expect("depth within path");
            TreePoint::on_edge(word, letter, frac).expect("fractional part lies in (0,1)")
        }
    }
}

/// Depth at which the geodesics from the root to `a` and to `b` separate.
pub(crate) fn meet_depth(a: Path<'_>, b: Path<'_>) -> BigRational {
    let da = a.depth();
    let db = b.depth();
    let cap = match (&da, &db) {
        (Some(x), Some(y)) => x.min(y).ceil().to_integer().to_usize().unwrap_or(usize::MAX),
        (Some(x), None) | (None, Some(x)) => x.ceil().to_integer().to_usize().unwrap_or(usize::MAX),
        (None, None) => usize::MAX,
    };
    let common = int(a.common_letters(&b, cap) as i64);
    [Some(common), da, db]
        .into_iter()
        .flatten()
        .min()
        .expect("at least one finite bound")
}

pub fn dist(p: &TreePoint, q: &TreePoint) -> BigRational {
    let m = meet_depth(Path::Finite(p), Path::Finite(q));
    p.depth() + q.depth() - m * int(2)
}

/// Point at distance `s` from `origin` on the geodesic towards `target`, clamped to
/// the target when it is a finite point.
pub(crate) fn geodesic_point(origin: &TreePoint, target: Path<'_>, s: &BigRational) -> TreePoint {
    let m = meet_depth(Path::Finite(origin), target);
    let d0 = origin.depth();
    let up = &d0 - &m;
    if *s <= up {
        Path::Finite(origin).point_at(&(d0 - s))
    } else {
        let mut depth = m + (s - up);
        if let Some(dt) = target.depth() {
            depth = depth.min(dt);
        }
        target.point_at(&depth)
    }
}

/// Time at which the rays from `origin` to `a` and to `b` stop coinciding.
pub fn branch_time_from(origin: &TreePoint, a: &TreeEnd, b: &TreeEnd) -> Result<BigRational> {
    let lcp = a.common_prefix(b).ok_or(Error::IdenticalBoundaryPoints)?;
    let d0 = origin.depth();
    let ma = meet_depth(Path::Finite(origin), Path::Infinite(a));
    let mb = meet_depth(Path::Finite(origin), Path::Infinite(b));
    let ua = &d0 - &ma;
    let ub = &d0 - &mb;
    Ok(match ua.cmp(&ub) {
        Ordering::Less => ua,
        Ordering::Greater => ub,
        Ordering::Equal => ua + int(lcp as i64) - ma,
    })
}

/// Float evaluation of a tree ray, used by the generic numeric kernels.
///
/// It walks the same geodesic as the exact code, but in `f64` and without
/// allocating, so root finding and quadrature can call it many times.
#[derive(Clone, Debug)]
pub(crate) struct FloatRay<'a> {
    origin: &'a TreePoint,
    target: &'a TreeEnd,
    d0: f64,
    up: f64,
    meet: f64,
}

impl<'a> FloatRay<'a> {
    pub(crate) fn new(origin: &'a TreePoint, target: &'a TreeEnd) -> Self {
        let meet = meet_depth(Path::Finite(origin), Path::Infinite(target));
        let d0 = to_f64(&origin.depth());
        let meet = to_f64(&meet);
        FloatRay {
            origin,
            target,
            d0,
            up: d0 - meet,
            meet,
        }
    }

    fn at(&self, t: f64) -> (Path<'a>, f64) {
        if t <= self.up {
            (Path::Finite(self.origin), self.d0 - t)
        } else {
            (Path::Infinite(self.target), self.meet + (t - self.up))
        }
    }

    /// `dist(self(t), other(t))` in floating point.
    pub(crate) fn separation(&self, other: &FloatRay<'_>, t: f64) -> f64 {
        let (pa, da) = self.at(t);
        let (pb, db) = other.at(t);
        float_dist(pa, da, pb, db)
    }
}

fn float_dist(pa: Path<'_>, da: f64, pb: Path<'_>, db: f64) -> f64 {
    let lo = da.min(db).min(pa.depth_f64()).min(pb.depth_f64());
    let cap = if lo.is_finite() { lo.ceil() as usize } else { usize::MAX };
    let common = pa.common_letters(&pb, cap) as f64;
    let meet = common.min(da).min(db);
    da + db - 2.0 * meet
}

/// Neighbouring vertices of a vertex word in `T_valence`.
pub fn neighbours(valence: u32, word: &[Letter]) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    if let Some((_, parent)) = word.split_last() {
        out.push(parent.to_vec());
    }
    for l in 0..letter_count(valence, word.len()) {
        let mut w = word.to_vec();
        w.push(l as Letter);
        out.push(w);
    }
    out
}

/// All vertices strictly closer than `radius` to `p`, with their exact distances.
pub fn vertices_within(valence: u32, p: &TreePoint, radius: &BigRational) -> Vec<(Vec<Letter>, BigRational)> {
    let mut seeds = vec![(p.word.clone(), BigRational::zero())];
    if let Some(e) = &p.edge {
        let mut far = p.word.clone();
        far.push(e.letter);
        seeds[0].1 = e.offset.clone();
        seeds.push((far, BigRational::one() - &e.offset));
    }
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<Letter>, BigRational, Option<Vec<Letter>>)> = seeds
        .iter()
        .map(|(w, d)| (w.clone(), d.clone(), None))
        .collect();
    // Seeds on a partial edge must not walk back across that edge.
    let seed_words: Vec<Vec<Letter>> = seeds.iter().map(|(w, _)| w.clone()).collect();
    while let Some((w, d, from)) = stack.pop() {
        if d >= *radius {
            continue;
        }
        for nb in neighbours(valence, &w) {
            if Some(&nb) == from.as_ref() || (from.is_none() && seed_words.contains(&nb)) {
                continue;
            }
            stack.push((nb, &d + BigRational::one(), Some(w.clone())));
        }
        out.push((w, d));
    }
    out
}
