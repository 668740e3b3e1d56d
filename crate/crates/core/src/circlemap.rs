//! Piecewise-linear degree-one bimodal circle maps and their itinerary coding.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{CirclePoint, Rational};
use crate::interp::{flat_spot_rotation, FlatSpotLift, RotationResult};
use crate::subshift::{Symbol, Word};

/// One period of a lift `g: [0, 1] -> R` given by breakpoints, increasing with
/// slope > 1 on `[0, x_max]` and strictly decreasing on `[x_max, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BimodalMap {
    xs: Vec<Rational>,
    ys: Vec<Rational>,
    top: usize,
    z_max: Rational,
    z_min: Rational,
}

/// Map description file: `{"breakpoints": [["0", "0"], ["1/2", "3/2"], ["1", "1"]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapFile {
    pub breakpoints: Vec<(Rational, Rational)>,
}

impl BimodalMap {
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<BimodalMap> {
        let bad = |m: &str| Err(Error::InvalidMap(m.to_string()));
        if points.len() < 3 {
            return bad("need at least three breakpoints");
        }
        let (xs, ys): (Vec<Rational>, Vec<Rational>) = points.into_iter().unzip();
        if !xs[0].is_zero() || xs[xs.len() - 1] != 1 {
            return bad("breakpoints must run from 0 to 1");
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return bad("breakpoints must be strictly increasing");
        }
        if ys[ys.len() - 1] != &ys[0] + 1 {
            return bad("g(1) must equal g(0) + 1");
        }
        let top = (0..ys.len()).max_by(|&a, &b| ys[a].cmp(&ys[b])).unwrap();
        for i in 0..xs.len() - 1 {
            let slope = (&ys[i + 1] - &ys[i]) / (&xs[i + 1] - &xs[i]);
            if i < top && slope <= 1 {
                return bad("slope must exceed 1 on the increasing branch");
            }
            if i >= top && !slope.is_negative() {
                return bad("the branch after x_max must be strictly decreasing");
            }
        }
        let (g0, x_max, g_top) = (&ys[0], &xs[top], &ys[top]);
        if g0.is_negative() || g0 >= x_max {
            return bad("need 0 <= g(0) < x_max");
        }
        if *g_top <= 1 || *g_top > x_max + 1 {
            return bad("need 1 < g(x_max) <= x_max + 1");
        }
        let mut g = BimodalMap { xs, ys, top, z_max: Rational::zero(), z_min: Rational::zero() };
        g.z_max = g.inc_inv(&g.xs[top].clone()).expect("x_max in range");
        g.z_min = g.inc_inv(&Rational::one()).expect("1 in range");
        Ok(g)
    }

    /// `g(x) = 3x` on `[0, 1/2]`, `2 - x` on `[1/2, 1]`.
    pub fn model() -> BimodalMap {
        BimodalMap::new(vec![
            (Rational::zero(), Rational::zero()),
            (Rational::new(1, 2), Rational::new(3, 2)),
            (Rational::one(), Rational::one()),
        ])
        .expect("model map is valid")
    }

    pub fn from_file(file: &MapFile) -> Result<BimodalMap> {
        BimodalMap::new(file.breakpoints.clone())
    }

    pub fn breakpoints(&self) -> Vec<(Rational, Rational)> {
        self.xs.iter().cloned().zip(self.ys.iter().cloned()).collect()
    }

    pub fn x_max(&self) -> &Rational {
        &self.xs[self.top]
    }

    pub fn z_max(&self) -> &Rational {
        &self.z_max
    }

    pub fn z_min(&self) -> &Rational {
        &self.z_min
    }

    fn eval_unit(&self, x: &Rational) -> Rational {
        let i = match self.xs.binary_search(x) {
            Ok(i) => return self.ys[i].clone(),
            Err(i) => i - 1,
        };
        let t = (x - &self.xs[i]) / (&self.xs[i + 1] - &self.xs[i]);
        &self.ys[i] + t * (&self.ys[i + 1] - &self.ys[i])
    }

    /// The lift `g~`, using `g~(x + 1) = g~(x) + 1`.
    pub fn eval(&self, x: &Rational) -> Rational {
        let n = Rational::from(x.floor());
        self.eval_unit(&(x - &n)) + n
    }

    /// The induced map on `S_k`.
    pub fn eval_on(&self, x: &CirclePoint) -> CirclePoint {
        CirclePoint::new(self.eval(x.value()), x.modulus())
    }

    /// Inverse of the increasing branch on `[g(0), g(x_max)]`.
    pub fn inc_inv(&self, y: &Rational) -> Option<Rational> {
        if *y < self.ys[0] || *y > self.ys[self.top] {
            return None;
        }
        let i = (0..self.top).find(|&i| *y <= self.ys[i + 1]).unwrap_or(self.top - 1);
        Some(self.inc_inv_on(i, y))
    }

    fn inc_inv_on(&self, i: usize, y: &Rational) -> Rational {
        let t = (y - &self.ys[i]) / (&self.ys[i + 1] - &self.ys[i]);
        &self.xs[i] + t * (&self.xs[i + 1] - &self.xs[i])
    }

    /// Inverse of the increasing branch clamped to its range.
    fn inc_inv_clamped(&self, y: &Rational) -> Rational {
        let y = y.clone().max(self.ys[0].clone()).min(self.ys[self.top].clone());
        self.inc_inv(&y).expect("clamped into range")
    }

    /// `b_n(y)`: the preimage of `y` on the increasing branch over `[n, n + x_max]`.
    pub fn branch_inverse(&self, n: i64, y: &Rational) -> Option<Rational> {
        self.inc_inv(&(y - n)).map(|x| x + n)
    }

    /// The closed intervals `I_0 .. I_{2k-1}` on which the coding is defined.
    pub fn address_intervals(&self, k: u32) -> Vec<(Rational, Rational)> {
        (0..k as i64)
            .flat_map(|j| {
                [
                    (Rational::from_int(j), &self.z_max + j),
                    (&self.z_min + j, self.x_max() + j),
                ]
            })
            .collect()
    }

    /// Address of a point of `S_k`, if it lies in one of the closed intervals.
    pub fn address(&self, x: &CirclePoint) -> Option<Symbol> {
        let j = x.value().floor();
        let f = x.value() - Rational::from(j.clone());
        let j: u32 = j.try_into().expect("point below modulus");
        if f <= self.z_max {
            Some(2 * j)
        } else if f >= self.z_min && f <= *self.x_max() {
            Some(2 * j + 1)
        } else {
            None
        }
    }

    pub fn upper_truncation(&self) -> Truncation {
        let value = self.ys[self.top].clone();
        let right = self.inc_inv(&(&value - 1)).expect("g(x_max) - 1 in range") + 1;
        Truncation { map: self.clone(), spot: (self.x_max().clone(), right), value }
    }

    pub fn lower_truncation(&self) -> Truncation {
        let value = &self.ys[0] + 1;
        let left = self.inc_inv(&value).expect("1 + g(0) in range");
        Truncation { map: self.clone(), spot: (left, Rational::one()), value }
    }
}

/// A semi-monotone truncation of a bimodal map with a single flat spot per period.
#[derive(Clone, Debug)]
pub struct Truncation {
    map: BimodalMap,
    spot: (Rational, Rational),
    value: Rational,
}

impl FlatSpotLift for Truncation {
    fn eval(&self, x: &Rational) -> Rational {
        // window [spot.1 - 1, spot.1): increasing branch, then the flat spot
        let w0 = &self.spot.1 - 1;
        let n = Rational::from((x - &w0).floor());
        let y = x - &n;
        let out = if y < self.spot.0 { self.map.eval(&y) } else { self.value.clone() };
        out + n
    }

    fn period(&self) -> i64 {
        1
    }

    fn spots(&self) -> Vec<(Rational, Rational)> {
        vec![self.spot.clone()]
    }

    fn spot_values(&self) -> Vec<Rational> {
        vec![self.value.clone()]
    }
}

/// The coding of `x` under `g~_k`, stopping with an error if the orbit leaves
/// the positive-slope region `I_0 u .. u I_{2k-1}`.
pub fn map_itinerary(g: &BimodalMap, x: &CirclePoint, n: usize) -> Result<Word> {
    let k = x.modulus() as u32;
    let mut out = Vec::with_capacity(n);
    let mut y = x.clone();
    for step in 0..n {
        out.push(g.address(&y).ok_or(Error::EscapedPositiveRegion { step })?);
        y = g.eval_on(&y);
    }
    Word::finite(2 * k, out)
}

/// `sum s_j / 3^(j+1)`: the model-map point with binary itinerary `w`. Finite
/// words give the partial sum, within `1 / (2 * 3^n)` of any completion.
pub fn inverse_itinerary_model(w: &Word) -> Result<Rational> {
    if w.alphabet() != 2 {
        return Err(Error::InvalidInput("itinerary must be binary".into()));
    }
    let series = |s: &[Symbol]| -> (Rational, Rational) {
        let mut scale = Rational::one();
        let mut sum = Rational::zero();
        for &b in s {
            scale = scale / 3;
            sum += &(&scale * b as i64);
        }
        (sum, scale)
    };
    let (pre, pre_scale) = series(w.preperiod());
    if w.is_finite() {
        return Ok(pre);
    }
    let (block, block_scale) = series(w.period());
    Ok(pre + pre_scale * block / (Rational::one() - block_scale))
}

/// The point of `[0, 1)` whose binary itinerary under `g` is `w`.
///
/// For a periodic block the fixed point of the composed inverse branches is
/// solved exactly; the affine piece is located with a floating-point pass and
/// the result is then checked by exact forward iteration.
pub fn point_of_itinerary(g: &BimodalMap, w: &Word) -> Result<Rational> {
    if w.alphabet() != 2 {
        return Err(Error::InvalidInput("itinerary must be binary".into()));
    }
    let tail = if w.is_finite() { Rational::zero() } else { periodic_point(g, w.period())? };
    Ok(w.preperiod()
        .iter()
        .rev()
        .fold(tail, |x, &s| g.inc_inv_clamped(&(x + s as i64))))
}

fn periodic_point(g: &BimodalMap, block: &[Symbol]) -> Result<Rational> {
    let xs: Vec<f64> = g.xs.iter().map(Rational::to_f64).collect();
    let ys: Vec<f64> = g.ys.iter().map(Rational::to_f64).collect();
    let piece = |y: f64| (0..g.top).find(|&i| y <= ys[i + 1]).unwrap_or(g.top - 1);
    let inv = |i: usize, y: f64| xs[i] + (y - ys[i]) / (ys[i + 1] - ys[i]) * (xs[i + 1] - xs[i]);
    let clamp = |y: f64| y.max(ys[0]).min(ys[g.top]);

    let mut x = 0.0;
    for _ in 0..200 {
        for &s in block.iter().rev() {
            let y = clamp(x + s as f64);
            x = inv(piece(y), y);
        }
    }
    let mut pieces = vec![0; block.len()];
    for (slot, &s) in pieces.iter_mut().zip(block).rev() {
        let y = clamp(x + s as f64);
        *slot = piece(y);
        x = inv(*slot, y);
    }

    // x_i = A_i x_{i+1} + B_i along the block; compose and solve x = A x + B.
    let (mut a, mut b) = (Rational::one(), Rational::zero());
    for (&s, &i) in block.iter().zip(&pieces).rev() {
        let slope = (&g.xs[i + 1] - &g.xs[i]) / (&g.ys[i + 1] - &g.ys[i]);
        let offset = &g.xs[i] + &slope * (Rational::from_int(s as i64) - &g.ys[i]);
        b = &slope * &b + offset;
        a = &slope * &a;
    }
    let fixed = &b / (Rational::one() - &a);

    let mut y = fixed.clone();
    for &s in block {
        y = g.eval(&y) - s as i64;
    }
    if y == fixed {
        Ok(fixed)
    } else {
        Err(Error::Internal(format!("could not certify the periodic point of {block:?}")))
    }
}

/// Itineraries of `min(Lambda_1)` and `max(Lambda_1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KappaWords {
    pub kappa0: Word,
    pub kappa1: Word,
    /// Both words are exact eventually periodic itineraries (otherwise finite prefixes).
    pub certified: bool,
}

type State = (Rational, Rational);

fn next_state(g: &BimodalMap, s: &State, sym: Symbol) -> Option<State> {
    let (lo, hi) = if sym == 0 {
        (Rational::zero(), g.z_max.clone())
    } else {
        (g.z_min.clone(), g.x_max().clone())
    };
    let a = s.0.clone().max(lo);
    let b = s.1.clone().min(hi);
    if a > b {
        return None;
    }
    Some((g.eval(&a) - sym as i64, g.eval(&b) - sym as i64))
}

/// Extreme itineraries of the maximal invariant set of the positive-slope
/// region, found on the graph of cylinder images `g^n(I_w)`.
pub fn kappa_words(g: &BimodalMap, horizon: usize) -> KappaWords {
    const CAP: usize = 4096;
    let start: State = (Rational::zero(), Rational::one());
    let mut ids: HashMap<State, usize> = HashMap::new();
    let mut states = vec![start.clone()];
    ids.insert(start, 0);
    let mut edges: Vec<[Option<usize>; 2]> = Vec::new();
    let mut i = 0;
    while i < states.len() && states.len() <= CAP {
        let mut e = [None, None];
        for sym in 0..2 {
            if let Some(t) = next_state(g, &states[i], sym) {
                let id = *ids.entry(t.clone()).or_insert_with(|| {
                    states.push(t);
                    states.len() - 1
                });
                e[sym as usize] = Some(id);
            }
        }
        edges.push(e);
        i += 1;
    }
    if edges.len() == states.len() {
        // finite graph: keep states with an infinite continuation
        let mut alive = vec![true; states.len()];
        loop {
            let mut changed = false;
            for s in 0..states.len() {
                if alive[s] && !edges[s].iter().flatten().any(|&t| alive[t]) {
                    alive[s] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let walk = |prefer_high: bool| -> Word {
            let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
            let mut syms = Vec::new();
            let mut s = 0;
            loop {
                if let Some(&at) = seen.get(&s) {
                    let period = syms.split_off(at);
                    return Word::new(2, syms, period).expect("binary");
                }
                seen.insert(s, syms.len());
                let order = if prefer_high { [1, 0] } else { [0, 1] };
                let (sym, t) = order
                    .iter()
                    .find_map(|&b| edges[s][b].filter(|&t| alive[t]).map(|t| (b as Symbol, t)))
                    .expect("alive state has an alive successor");
                syms.push(sym);
                s = t;
            }
        };
        if alive[0] {
            return KappaWords { kappa0: walk(false), kappa1: walk(true), certified: true };
        }
    }
    // fallback: greedy prefix with bounded lookahead
    let mut memo: HashMap<(State, usize), bool> = HashMap::new();
    fn survives(g: &BimodalMap, s: &State, depth: usize, memo: &mut HashMap<(State, usize), bool>) -> bool {
        if depth == 0 {
            return true;
        }
        if let Some(&v) = memo.get(&(s.clone(), depth)) {
            return v;
        }
        let v = (0..2).any(|b| next_state(g, s, b).is_some_and(|t| survives(g, &t, depth - 1, memo)));
        memo.insert((s.clone(), depth), v);
        v
    }
    let mut greedy = |prefer_high: bool| -> Word {
        let mut s: State = (Rational::zero(), Rational::one());
        let mut syms = Vec::new();
        for n in 0..horizon {
            let order = if prefer_high { [1, 0] } else { [0, 1] };
            let step = order.iter().find_map(|&b| {
                next_state(g, &s, b)
                    .filter(|t| survives(g, t, horizon - n - 1, &mut memo))
                    .map(|t| (b, t))
            });
            match step {
                Some((b, t)) => {
                    syms.push(b);
                    s = t;
                }
                None => break,
            }
        }
        Word::finite(2, syms).expect("binary")
    };
    KappaWords { kappa0: greedy(false), kappa1: greedy(true), certified: false }
}

/// `(L_g, U_g)`: the flat-spot heights for which the interpolated family is defined,
/// `g(min Lambda_1)` and `g(max Lambda_1) - 1`.
pub fn flat_range(g: &BimodalMap) -> Result<(Rational, Rational)> {
    let kw = kappa_words(g, 64);
    if !kw.certified {
        return Err(Error::InvalidMap("extreme itineraries are not eventually periodic".into()));
    }
    let lo = point_of_itinerary(g, &kw.kappa0.shift())?;
    let hi = point_of_itinerary(g, &kw.kappa1.shift())?;
    Ok((lo, hi))
}

/// `[rho(g_l), rho(g_u)]` from the lower and upper truncations.
pub fn rotation_interval(g: &BimodalMap, budget: usize) -> Result<(Rational, Rational)> {
    let run = |t: &Truncation| flat_spot_rotation(t, &t.value, budget);
    match (run(&g.lower_truncation()), run(&g.upper_truncation())) {
        (RotationResult::Exact(a), RotationResult::Exact(b)) => Ok((a, b)),
        (a, b) => Err(Error::NonLockingWithinBudget(format!("lower {a}, upper {b}"))),
    }
}

/// Lifts of a `(p, q)` periodic orbit of `g` to `S_k`, grouped into `g~_k` orbits.
pub fn lift_periodic_orbit(g: &BimodalMap, orbit: &[Rational], p: i64, q: usize, k: u32) -> Result<Vec<Vec<Rational>>> {
    let base: BTreeSet<Rational> = orbit.iter().map(|x| x.rem_euclid(&Rational::one())).collect();
    if base.len() != q {
        return Err(Error::NotPeriodic);
    }
    for x in &base {
        let mut y = x.clone();
        for _ in 0..q {
            y = g.eval(&y);
        }
        if y != x + p || !base.contains(&g.eval(x).rem_euclid(&Rational::one())) {
            return Err(Error::NotPeriodic);
        }
    }
    let x0 = base.iter().next().unwrap().clone();
    let mut seen: BTreeSet<CirclePoint> = BTreeSet::new();
    let mut out = Vec::new();
    for i in 0..k as i64 {
        let start = CirclePoint::new(&x0 + i, k as u64);
        if seen.contains(&start) {
            continue;
        }
        let mut cycle = Vec::new();
        let mut y = start.clone();
        loop {
            seen.insert(y.clone());
            cycle.push(y.value().clone());
            y = g.eval_on(&y);
            if y == start {
                break;
            }
        }
        out.push(cycle);
    }
    Ok(out)
}
