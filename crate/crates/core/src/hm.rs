//! The Hedlund-Morse construction: itineraries of a rigid rotation of `S_k`
//! against a `2k`-interval address system.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{gcd, to_pair, CirclePoint, Rational};
use crate::subshift::{Symbol, Word, WordSet};

/// An allowable pair `(omega, nu)`: `nu_i >= 0` and `sum nu_i = k (1 - omega)`.
///
/// A proxy parameter set stands in for an irrational `omega`: the rational is
/// only used up to a finite horizon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HMParams {
    pub k: u32,
    pub omega: Rational,
    pub nu: Vec<Rational>,
    #[serde(skip)]
    proxy: bool,
}

impl HMParams {
    pub fn new(k: u32, omega: Rational, nu: Vec<Rational>) -> Result<HMParams> {
        if k == 0 {
            return Err(Error::NotAllowable("k must be positive".into()));
        }
        if omega <= 0 || omega >= 1 {
            return Err(Error::NotAllowable(format!("omega = {omega} outside (0, 1)")));
        }
        if nu.len() != k as usize {
            return Err(Error::NotAllowable(format!("expected {k} values of nu, got {}", nu.len())));
        }
        if let Some(v) = nu.iter().find(|v| v.is_negative()) {
            return Err(Error::NotAllowable(format!("nu entry {v} is negative")));
        }
        let total: Rational = nu.iter().sum();
        let want = (Rational::one() - &omega) * k as i64;
        if total != want {
            return Err(Error::NotAllowable(format!("sum of nu is {total}, expected {want}")));
        }
        Ok(HMParams { k, omega, nu, proxy: false })
    }

    /// Parameters whose rational `omega` approximates an irrational rotation.
    pub fn proxy(k: u32, omega: Rational, nu: Vec<Rational>) -> Result<HMParams> {
        Ok(HMParams { proxy: true, ..HMParams::new(k, omega, nu)? })
    }

    pub fn is_proxy(&self) -> bool {
        self.proxy
    }

    /// Symmetric parameters `nu_i = 1 - omega`.
    pub fn sturmian(k: u32, omega: Rational) -> Result<HMParams> {
        let v = Rational::one() - &omega;
        HMParams::new(k, omega, vec![v; k as usize])
    }
}

/// `(p, q)` with `p/q = x` in lowest terms.
pub fn small_fraction(x: &Rational) -> Result<(u64, u64)> {
    match to_pair(x) {
        Some((p, q)) if p >= 0 => Ok((p as u64, q as u64)),
        _ => Err(Error::InvalidInput(format!("{x} is not a small nonnegative fraction"))),
    }
}

/// Left endpoints `l_0 .. l_{2k-1}` of the address intervals; `X_j` runs from
/// `l_j` to `l_{j+1}` (cyclically) and has length `nu_{j/2+1}` or `omega`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AddressSystem {
    pub k: u32,
    pub bounds: Vec<Rational>,
    pub lengths: Vec<Rational>,
}

impl AddressSystem {
    pub fn interval(&self, j: usize) -> (Rational, Rational) {
        let n = self.bounds.len();
        (self.bounds[j].clone(), self.bounds[(j + 1) % n].clone())
    }

    /// Address of `x`, or `None` when `x` is one of the boundary points.
    pub fn symbol(&self, x: &CirclePoint) -> Option<Symbol> {
        let k = Rational::from_int(self.k as i64);
        if self.bounds.iter().any(|b| b == x.value()) {
            return None;
        }
        self.bounds.iter().zip(&self.lengths).position(|(b, len)| {
            let off = (x.value() - b).rem_euclid(&k);
            off < *len
        }).map(|j| j as Symbol)
    }
}

pub fn address_system(params: &HMParams) -> AddressSystem {
    let k = params.k as i64;
    let km = Rational::from_int(k);
    let mut bounds = Vec::with_capacity(2 * k as usize);
    let mut lengths = Vec::with_capacity(2 * k as usize);
    let mut s = Rational::zero();
    for (j, v) in params.nu.iter().enumerate() {
        let shift = &params.omega * j as i64;
        bounds.push((&s + &shift).rem_euclid(&km));
        s += v;
        bounds.push((&s + &shift).rem_euclid(&km));
        lengths.push(v.clone());
        lengths.push(params.omega.clone());
    }
    AddressSystem { k: params.k, bounds, lengths }
}

/// The first `n` addresses along the orbit of `x` under `R_omega`.
pub fn hm_itinerary(x: &CirclePoint, params: &HMParams, n: usize) -> Result<Word> {
    if x.modulus() != params.k as u64 {
        return Err(Error::InvalidInput(format!("point lives on S_{}, expected S_{}", x.modulus(), params.k)));
    }
    let xs = address_system(params);
    if let Some(out) = scaled_itinerary(&xs, &params.omega, x.value(), n) {
        return Word::finite(2 * params.k, out);
    }
    let mut out = Vec::with_capacity(n);
    let mut y = x.clone();
    for step in 0..n {
        out.push(xs.symbol(&y).ok_or(Error::GoodSetViolation { step })?);
        y = y.add(&params.omega);
    }
    Word::finite(2 * params.k, out)
}

/// The itinerary over a common denominator in `i128`. `None` on overflow or
/// when the orbit meets a boundary, leaving the error to the exact path.
fn scaled_itinerary(xs: &AddressSystem, omega: &Rational, x: &Rational, n: usize) -> Option<Vec<Symbol>> {
    let den = xs
        .bounds
        .iter()
        .chain(&xs.lengths)
        .chain([omega, x])
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let scale = |r: &Rational| (r.numer() * (&den / r.denom())).to_i128();
    let m = (&den * BigInt::from(xs.k)).to_i128()?;
    let bounds: Vec<i128> = xs.bounds.iter().map(scale).collect::<Option<_>>()?;
    let lengths: Vec<i128> = xs.lengths.iter().map(scale).collect::<Option<_>>()?;
    let step = scale(omega)?;
    let mut y = scale(x)?.rem_euclid(m);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        if bounds.contains(&y) {
            return None;
        }
        let j = bounds.iter().zip(&lengths).position(|(b, len)| (y - b).rem_euclid(m) < *len)?;
        out.push(j as Symbol);
        y = (y + step).rem_euclid(m);
    }
    Some(out)
}

/// A finite union of periodic orbits with rational weights summing to one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitCluster {
    pub k: u32,
    pub p: u64,
    pub q: u64,
    pub nu: Vec<Rational>,
    pub orbits: Vec<Word>,
    pub weights: Vec<Rational>,
    pub period: u64,
    pub rotation: Rational,
}

impl OrbitCluster {
    pub fn word_set(&self) -> WordSet {
        WordSet::new(2 * self.k, self.orbits.iter().cloned()).expect("cluster words share an alphabet")
    }
}

fn check_fraction(p: u64, q: u64) -> Result<()> {
    if q < 2 || p == 0 || p >= q || gcd(p, q) != 1 {
        return Err(Error::NotAllowable(format!("{p}/{q} must be a reduced fraction in (0, 1)")));
    }
    Ok(())
}

/// Offsets of the odd boundaries inside the fundamental domain
/// `J = [k - d/q, k)`, `d = gcd(p, k)`, measured from its left end.
fn odd_cuts(params: &HMParams, p: u64, q: u64) -> Vec<Rational> {
    let k = params.k as u64;
    let len = Rational::new(gcd(p, k) as i64, q as i64);
    let j0 = Rational::from_int(k as i64) - &len;
    let xs = address_system(params);
    (0..k as usize).map(|j| (&xs.bounds[2 * j + 1] - &j0).rem_euclid(&len)).collect()
}

/// `B_k(p/q, nu)` with its invariant probability measure.
///
/// The fundamental domain `J` is cut at the representatives of the odd
/// boundaries. Points in one piece share an itinerary, so each piece yields one
/// periodic orbit weighted by `N |K| / k`, `N = qk / gcd(p, k)`.
pub fn b_k_rational(k: u32, p: u64, q: u64, nu: &[Rational]) -> Result<OrbitCluster> {
    check_fraction(p, q)?;
    let params = HMParams::new(k, Rational::new(p as i64, q as i64), nu.to_vec())?;
    let d = gcd(p, k as u64);
    let n = q * k as u64 / d;
    let len = Rational::new(d as i64, q as i64);
    let j0 = Rational::from_int(k as i64) - &len;

    let cuts: BTreeSet<Rational> = odd_cuts(&params, p, q).into_iter().collect();
    let cuts: Vec<Rational> = cuts.into_iter().collect();
    if cuts.first() != Some(&Rational::zero()) {
        return Err(Error::Internal("the identification point is not a cut".into()));
    }

    let mut found: BTreeMap<Word, Rational> = BTreeMap::new();
    for (i, a) in cuts.iter().enumerate() {
        let b = cuts.get(i + 1).unwrap_or(&len);
        let x = CirclePoint::new(&j0 + Rational::mid(a, b), k as u64);
        let prefix = hm_itinerary(&x, &params, n as usize)
            .map_err(|e| Error::Internal(format!("component midpoint left the good set: {e}")))?;
        let word = Word::periodic(2 * k, prefix.prefix(n as usize))?.canonical();
        let weight = (b - a) * n as i64 / Rational::from_int(k as i64);
        *found.entry(word).or_insert_with(Rational::zero) += &weight;
    }
    let (orbits, weights) = found.into_iter().unzip();
    Ok(OrbitCluster {
        k,
        p,
        q,
        nu: nu.to_vec(),
        orbits,
        weights,
        period: n,
        rotation: params.omega,
    })
}

/// A length-`n` prefix of a point of `B_k(omega, nu)` for proxy `omega`.
pub fn b_k_prefix(params: &HMParams, x: &CirclePoint, n: usize) -> Result<Word> {
    hm_itinerary(x, params, n)
}

/// `C_k`: project every orbit of a cluster to the base and merge coincident orbits.
pub fn c_k(cluster: &OrbitCluster) -> WordSet {
    WordSet::new(2, cluster.orbits.iter().map(Word::project_base)).expect("binary words")
}

/// Measure of the cylinder `[block]`: Lebesgue measure of the points of `S_k`
/// whose first itinerary symbols are `block`, divided by `k`.
pub fn lambda_cylinder(params: &HMParams, block: &[Symbol]) -> Rational {
    let k = Rational::from_int(params.k as i64);
    let xs = address_system(params);
    let mut set = vec![(Rational::zero(), k.clone())];
    for (i, &s) in block.iter().enumerate() {
        let s = s as usize;
        if s >= xs.bounds.len() {
            return Rational::zero();
        }
        let start = (&xs.bounds[s] - &params.omega * i as i64).rem_euclid(&k);
        let arc = arc_pieces(&start, &xs.lengths[s], &k);
        set = intersect(&set, &arc);
        if set.is_empty() {
            break;
        }
    }
    set.iter().map(|(a, b)| b - a).sum::<Rational>() / &k
}

fn arc_pieces(start: &Rational, len: &Rational, k: &Rational) -> Vec<(Rational, Rational)> {
    if len.is_zero() {
        return Vec::new();
    }
    let end = start + len;
    if end <= *k {
        vec![(start.clone(), end)]
    } else {
        vec![(Rational::zero(), end - k), (start.clone(), k.clone())]
    }
}

fn intersect(a: &[(Rational, Rational)], b: &[(Rational, Rational)]) -> Vec<(Rational, Rational)> {
    let mut out = Vec::new();
    for (a0, a1) in a {
        for (b0, b1) in b {
            let lo = a0.clone().max(b0.clone());
            let hi = a1.clone().min(b1.clone());
            if lo < hi {
                out.push((lo, hi));
            }
        }
    }
    out.sort();
    out
}

/// Measure carried by each fundamental domain `[j, j+1)`: `(omega + nu_j) / k`.
pub fn skewness(params: &HMParams) -> Vec<Rational> {
    let k = Rational::from_int(params.k as i64);
    params.nu.iter().map(|v| (&params.omega + v) / &k).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Resonance {
    /// `R_omega^n(l_j) = l_{j2}` with `n > 1`.
    Resonant { n: u64, j: usize, j2: usize },
    NonresonantUpTo { horizon: u64 },
}

/// Smallest `n > 1` solving `n * omega = delta (mod k)`, if any.
fn solve_rotation(omega: &Rational, delta: &Rational, k: u32) -> Option<BigInt> {
    let den = omega.denom().lcm(delta.denom());
    let a = omega.numer() * (&den / omega.denom());
    let c = delta.numer() * (&den / delta.denom());
    let m = &den * BigInt::from(k);
    let g = a.gcd(&m);
    if !(&c % &g).is_zero() {
        return None;
    }
    let (a, c, m) = (a / &g, c / &g, m / &g);
    let inv = a.extended_gcd(&m).x.mod_floor(&m);
    let mut n = (c * inv).mod_floor(&m);
    while n <= BigInt::one() {
        n += &m;
    }
    Some(n)
}

/// Rational parameters are always resonant. Proxy parameters are searched for
/// boundary coincidences `R^n(l_j) = l_{j2}` with `1 < n <= horizon`.
pub fn is_resonant(params: &HMParams, horizon: u64) -> Resonance {
    let xs = address_system(params);
    if !params.is_proxy() {
        let (p, q) = small_fraction(&params.omega).expect("rational omega");
        let n = q * params.k as u64 / gcd(p, params.k as u64);
        return Resonance::Resonant { n, j: 0, j2: 0 };
    }
    let mut best: Option<(BigInt, usize, usize)> = None;
    for (j, a) in xs.bounds.iter().enumerate() {
        for (j2, b) in xs.bounds.iter().enumerate() {
            if let Some(n) = solve_rotation(&params.omega, &(b - a), params.k) {
                if n <= BigInt::from(horizon) && best.as_ref().is_none_or(|(m, _, _)| n < *m) {
                    best = Some((n, j, j2));
                }
            }
        }
    }
    match best {
        Some((n, j, j2)) => Resonance::Resonant { n: n.to_u64().expect("bounded by horizon"), j, j2 },
        None => Resonance::NonresonantUpTo { horizon },
    }
}

/// Whether two distinct odd boundaries share an orbit of `R_{p/q}`; exactly
/// when the cluster has fewer than `k` orbits.
pub fn is_subresonant(k: u32, p: u64, q: u64, nu: &[Rational]) -> Result<bool> {
    check_fraction(p, q)?;
    let params = HMParams::new(k, Rational::new(p as i64, q as i64), nu.to_vec())?;
    let cuts: BTreeSet<Rational> = odd_cuts(&params, p, q).into_iter().collect();
    Ok(cuts.len() < k as usize)
}

fn compositions(total: u64, parts: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for m in 0..=total {
        prefix.push(m);
        compositions(total - m, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// All pure `nu` for `p/q`: every `nu_i` is a nonnegative multiple of `gcd(p, k)/q`.
pub fn pure_lattice(k: u32, p: u64, q: u64) -> Vec<Vec<Rational>> {
    let d = gcd(p, k as u64);
    let total = k as u64 * (q - p) / d;
    let mut out = Vec::new();
    compositions(total, k as usize, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|c| c.into_iter().map(|m| Rational::new((m * d) as i64, q as i64)).collect())
        .collect()
}

fn binomial(n: u64, r: u64) -> BigInt {
    (0..r).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// `(count in S_k, count in S^1)` of single kfsm periodic orbits with rotation `p/q`.
///
/// The cover count is the number of lattice points; the base count is the
/// number of cyclic-rotation classes, by Burnside's lemma.
pub fn count_kfsm_periodic(k: u32, p: u64, q: u64) -> (BigInt, BigInt) {
    let k = k as u64;
    let d = gcd(p, k);
    let total = k * (q - p) / d;
    let cover = binomial(total + k - 1, k - 1);
    let mut fixed = BigInt::zero();
    for s in 0..k {
        let g = gcd(s, k);
        let blocks = k / g;
        if total % blocks == 0 {
            let t = total / blocks;
            fixed += binomial(t + g - 1, g - 1);
        }
    }
    (cover, fixed / BigInt::from(k))
}

/// `nu` realising the discrete construction on `Z/2qZ` with parameter `mu`.
pub fn discrete_nu(p: u64, q: u64, mu: u64) -> Vec<Rational> {
    let (p, q, mu) = (p as i64, q as i64, mu as i64);
    vec![Rational::new(mu, q), Rational::new(2 * (q - p) - mu, q)]
}

/// Itinerary of the point 1 under `n -> n + p` on `Z/2qZ` with addresses
/// `[1, mu]`, `[mu+1, mu+p]`, `[mu+p+1, 2q-p]`, `[2q-p+1, 2q]`.
pub fn discrete_hm(p: u64, q: u64, mu: i64) -> Result<Word> {
    check_fraction(p, q)?;
    let max = 2 * (q - p) as i64;
    if mu < 0 || mu > max {
        return Err(Error::InvalidMu { mu, max });
    }
    let (p, q) = (p as i64, q as i64);
    let symbol = |n: i64| -> Symbol {
        if n <= mu {
            0
        } else if n <= mu + p {
            1
        } else if n <= 2 * q - p {
            2
        } else {
            3
        }
    };
    let len = 2 * q / gcd(p as u64, 2) as i64;
    let mut n = 1;
    let mut out = Vec::with_capacity(len as usize);
    for _ in 0..len {
        out.push(symbol(n));
        n = (n - 1 + p).rem_euclid(2 * q) + 1;
    }
    Ok(Word::periodic(4, out)?.canonical())
}

/// Least `j > 0` with `tau^j(nu) = nu`, `tau` the left cyclic shift.
pub fn tau_period(nu: &[Rational]) -> usize {
    let k = nu.len();
    (1..=k)
        .find(|&j| (0..k).all(|i| nu[i] == nu[(i + j) % k]))
        .unwrap_or(k)
}

pub fn tau(nu: &[Rational]) -> Vec<Rational> {
    let mut v = nu.to_vec();
    v.rotate_left(1);
    v
}

/// `(period in S_k, period of the projection to S^1)`.
pub fn cluster_periods(k: u32, p: u64, q: u64, nu: &[Rational]) -> (u64, u64) {
    let j = tau_period(nu) as u64;
    (q * k as u64 / gcd(p, k as u64), j * q / gcd(j, p))
}
