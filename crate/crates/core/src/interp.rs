//! The interpolated flat-spot family `H_{k,c}`, rotation numbers by flat-spot
//! capture, kfsm boxes and the rotation-number diagram.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

use crate::circlemap::{flat_range, kappa_words, point_of_itinerary, rotation_interval, BimodalMap};
use crate::error::{Error, Result};
use crate::exactnum::{gcd, Rational};
use crate::hm::{b_k_rational, pure_lattice};
use crate::subshift::{in_order_interval, is_symbolic_kfsm, sturmian_word, KfsmVerdict, Word, WordSet};

/// A non-decreasing lift with `F(x + P) = F(x) + P` that is constant on finitely
/// many closed intervals per period.
pub trait FlatSpotLift {
    fn eval(&self, x: &Rational) -> Rational;
    fn period(&self) -> i64;
    fn spots(&self) -> Vec<(Rational, Rational)>;
    fn spot_values(&self) -> Vec<Rational>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationResult {
    Exact(Rational),
    /// No flat spot was revisited within `steps` iterations; `rho` lies in `[lo, hi]`.
    Interval { lo: Rational, hi: Rational, steps: usize },
}

impl RotationResult {
    pub fn exact(&self) -> Option<&Rational> {
        match self {
            RotationResult::Exact(rho) => Some(rho),
            RotationResult::Interval { .. } => None,
        }
    }

    pub fn bounds(&self) -> (Rational, Rational) {
        match self {
            RotationResult::Exact(rho) => (rho.clone(), rho.clone()),
            RotationResult::Interval { lo, hi, .. } => (lo.clone(), hi.clone()),
        }
    }
}

impl fmt::Display for RotationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RotationResult::Exact(rho) => write!(f, "{rho}"),
            RotationResult::Interval { lo, hi, steps } => write!(f, "[{lo}, {hi}] after {steps} steps"),
        }
    }
}

/// Rotation number of a flat-spot lift, iterating from `start`.
///
/// Once the orbit has entered the same flat spot twice (up to deck
/// translation) it is exactly periodic from there on and the rotation number
/// is the displacement per step along that cycle. Without a revisit the
/// returned interval uses `|F^n(x) - x - n rho| < P`.
pub fn flat_spot_rotation(f: &dyn FlatSpotLift, start: &Rational, budget: usize) -> RotationResult {
    let spots = f.spots();
    let p = Rational::from_int(f.period());
    let mut seen: BTreeMap<usize, (usize, Rational)> = BTreeMap::new();
    let mut x = start.clone();
    for step in 0..budget {
        for (i, (a, b)) in spots.iter().enumerate() {
            let m = Rational::from(((&x - a) / &p).floor());
            if &x - &m * &p <= *b {
                if let Some((s0, m0)) = seen.get(&i) {
                    let rho = (&m - m0) * &p / Rational::from_int((step - s0) as i64);
                    return RotationResult::Exact(rho);
                }
                seen.insert(i, (step, m));
                break;
            }
        }
        x = f.eval(&x);
    }
    let n = Rational::from_int(budget.max(1) as i64);
    let d = &x - start;
    RotationResult::Interval { lo: (&d - &p) / &n, hi: (&d + &p) / &n, steps: budget }
}

/// `H_{k,c}`: the lift of `g` to `S_k` with its `k` decreasing laps replaced by
/// flat spots at heights `c_j + j - 1`.
#[derive(Clone, Debug)]
pub struct InterpolatedMap {
    base: BimodalMap,
    c: Vec<Rational>,
    range: (Rational, Rational),
    spots: Vec<(Rational, Rational)>,
    values: Vec<Rational>,
}

impl InterpolatedMap {
    pub fn new(base: &BimodalMap, c: Vec<Rational>) -> Result<InterpolatedMap> {
        let range = flat_range(base)?;
        InterpolatedMap::with_range(base, c, range)
    }

    /// As [`InterpolatedMap::new`] with `(L_g, U_g)` supplied by the caller.
    pub fn with_range(base: &BimodalMap, c: Vec<Rational>, range: (Rational, Rational)) -> Result<InterpolatedMap> {
        if c.is_empty() {
            return Err(Error::InvalidInput("c must have k >= 1 entries".into()));
        }
        if let Some(v) = c.iter().find(|v| **v < range.0 || **v > range.1) {
            return Err(Error::InvalidInput(format!("c entry {v} outside [{}, {}]", range.0, range.1)));
        }
        let mut spots = Vec::with_capacity(c.len());
        let mut values = Vec::with_capacity(c.len());
        for (i, cj) in c.iter().enumerate() {
            let i = i as i64;
            let v = cj + i;
            let left = base.branch_inverse(i - 1, &v).expect("c within the branch range");
            let right = base.branch_inverse(i, &v).expect("c within the branch range");
            spots.push((left, right));
            values.push(v);
        }
        Ok(InterpolatedMap { base: base.clone(), c, range, spots, values })
    }

    pub fn k(&self) -> u32 {
        self.c.len() as u32
    }

    pub fn c(&self) -> &[Rational] {
        &self.c
    }

    pub fn range(&self) -> &(Rational, Rational) {
        &self.range
    }
}

impl FlatSpotLift for InterpolatedMap {
    fn eval(&self, x: &Rational) -> Rational {
        let k = self.c.len() as i64;
        let w0 = &self.spots[0].0;
        let n = ((x - w0) / Rational::from_int(k)).floor();
        let shift = Rational::from(n) * k;
        let y = x - &shift;
        let out = match self.spots.iter().position(|(a, b)| *a <= y && y <= *b) {
            Some(j) => self.values[j].clone(),
            None => self.base.eval(&y),
        };
        out + shift
    }

    fn period(&self) -> i64 {
        self.c.len() as i64
    }

    fn spots(&self) -> Vec<(Rational, Rational)> {
        self.spots.clone()
    }

    fn spot_values(&self) -> Vec<Rational> {
        self.values.clone()
    }
}

pub fn h_eval(h: &InterpolatedMap, x: &Rational) -> Rational {
    h.eval(x)
}

pub fn rotation_number(h: &InterpolatedMap, budget: usize) -> RotationResult {
    flat_spot_rotation(h, &h.values[0], budget)
}

/// The default iteration budget `10 k max_den^2`.
pub fn default_budget(k: u32, max_den: u64) -> usize {
    (10 * k as u64 * max_den * max_den).max(100) as usize
}

/// A product of closed intervals `[l_j, r_j]` in `c`-space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Box {
    pub coords: Vec<(Rational, Rational)>,
}

impl Box {
    pub fn center(&self) -> Vec<Rational> {
        self.coords.iter().map(|(a, b)| Rational::mid(a, b)).collect()
    }

    pub fn lower_corner(&self) -> Vec<Rational> {
        self.coords.iter().map(|(a, _)| a.clone()).collect()
    }

    pub fn upper_corner(&self) -> Vec<Rational> {
        self.coords.iter().map(|(_, b)| b.clone()).collect()
    }

    /// Whether the open interiors of two boxes meet.
    pub fn interiors_meet(&self, other: &Box) -> bool {
        self.coords
            .iter()
            .zip(&other.coords)
            .all(|((a0, a1), (b0, b1))| a0.clone().max(b0.clone()) < a1.clone().min(b1.clone()))
    }

    /// Swap-symmetric image: coordinates cyclically shifted left.
    pub fn rotate(&self) -> Box {
        let mut coords = self.coords.clone();
        coords.rotate_left(1);
        Box { coords }
    }
}

/// The set of `c` for which `Z` is invariant under `H_{k,c}`.
///
/// Coordinate `j` is bounded below by the image of the largest point of `Z` in
/// `I_{2j-3}` (just left of flat spot `j`) and above by the image of the smallest
/// point of `Z` in `I_{2j-2}` (just right of it); unvisited cylinders leave the
/// full range `[L_g, U_g]`.
pub fn box_of(g: &BimodalMap, z: &WordSet) -> Result<Box> {
    box_of_in(g, z, &flat_range(g)?)
}

pub fn box_of_in(g: &BimodalMap, z: &WordSet, range: &(Rational, Rational)) -> Result<Box> {
    let k = z.alphabet() / 2;
    if let KfsmVerdict::NotKfsm { j, .. } = is_symbolic_kfsm(z, k)? {
        return Err(Error::NotKfsm { j });
    }
    let m = 2 * k as i64;
    let (lo, hi) = range;
    let mut coords = Vec::with_capacity(k as usize);
    for j in 1..=k as i64 {
        let left = ((2 * j - 3).rem_euclid(m)) as u32;
        let right = ((2 * j - 2).rem_euclid(m)) as u32;
        let coord = |w: Option<Word>, default: &Rational| -> Result<Rational> {
            match w {
                Some(w) => {
                    let x = point_of_itinerary(g, &w.shift().project_base())?;
                    Ok(x.max(lo.clone()).min(hi.clone()))
                }
                None => Ok(default.clone()),
            }
        };
        let l = coord(z.extreme_in_cylinder(left, true), lo)?;
        let r = coord(z.extreme_in_cylinder(right, false), hi)?;
        coords.push((l, r));
    }
    Ok(Box { coords })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagramRow {
    pub p: u64,
    pub q: u64,
    pub nu: Vec<Rational>,
    pub orbit: Word,
    #[serde(rename = "box")]
    pub boxed: Box,
}

/// One box per pure parameter `nu` for each `p/q` with `q <= max_den` inside the
/// rotation interval of `g`, in `(p/q, nu)` order.
pub fn level_diagram(g: &BimodalMap, k: u32, max_den: u64) -> Result<Vec<DiagramRow>> {
    let range = flat_range(g)?;
    let (rho_lo, rho_hi) = rotation_interval(g, default_budget(1, max_den.max(10)))?;
    let mut fractions = Vec::new();
    for q in 2..=max_den {
        for p in 1..q {
            let x = Rational::new(p as i64, q as i64);
            if gcd(p, q) == 1 && x > rho_lo && x < rho_hi {
                fractions.push((x, p, q));
            }
        }
    }
    fractions.sort();
    let mut rows = Vec::new();
    for (_, p, q) in fractions {
        for nu in pure_lattice(k, p, q) {
            let cluster = b_k_rational(k, p, q, &nu)?;
            let z = cluster.word_set();
            let boxed = box_of_in(g, &z, &range)?;
            rows.push(DiagramRow { p, q, nu, orbit: cluster.orbits[0].clone(), boxed });
        }
    }
    Ok(rows)
}

/// Rotation numbers on a regular grid of `[L_g, U_g]^k` (cross-validation only).
pub fn forward_scan(g: &BimodalMap, k: u32, steps: u32, budget: usize) -> Result<Vec<(Vec<Rational>, RotationResult)>> {
    let range = flat_range(g)?;
    let width = &range.1 - &range.0;
    let axis: Vec<Rational> = (0..=steps)
        .map(|i| &range.0 + &width * i as i64 / Rational::from_int(steps.max(1) as i64))
        .collect();
    let mut points: Vec<Vec<Rational>> = vec![Vec::new()];
    for _ in 0..k {
        points = points
            .into_iter()
            .flat_map(|p| axis.iter().map(move |a| {
                let mut p = p.clone();
                p.push(a.clone());
                p
            }))
            .collect();
    }
    points
        .into_iter()
        .map(|c| {
            let h = InterpolatedMap::with_range(g, c.clone(), range.clone())?;
            Ok((c, rotation_number(&h, budget)))
        })
        .collect()
}

/// CSV with columns `p,q,params,l1,r1,...,lk,rk`; `params` joins `nu` with `;`.
pub fn diagram_csv(rows: &[DiagramRow], k: u32) -> String {
    let mut out = String::from("p,q,params");
    for j in 1..=k {
        write!(out, ",l{j},r{j}").unwrap();
    }
    out.push('\n');
    for row in rows {
        let params: Vec<String> = row.nu.iter().map(Rational::to_string).collect();
        write!(out, "{},{},{}", row.p, row.q, params.join(";")).unwrap();
        for (l, r) in &row.boxed.coords {
            write!(out, ",{l},{r}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// SVG with one rectangle per box (first two coordinates; `k = 1` draws bars).
/// Coordinates are rounded to a 1000-unit canvas.
pub fn diagram_svg(rows: &[DiagramRow], range: &(Rational, Rational)) -> String {
    const SIZE: f64 = 1000.0;
    let (lo, hi) = (range.0.to_f64(), range.1.to_f64());
    let span = if hi > lo { hi - lo } else { 1.0 };
    let sx = |v: &Rational| ((v.to_f64() - lo) / span * SIZE).round();
    let sy = |v: &Rational| (SIZE - (v.to_f64() - lo) / span * SIZE).round();
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="-10 -10 {} {}" width="600" height="600">"#,
        SIZE + 20.0,
        SIZE + 20.0
    )
    .unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white" stroke="black"/>"#).unwrap();
    for row in rows {
        let hue = (row.p as f64 / row.q as f64 * 300.0).round();
        let (x0, x1) = (sx(&row.boxed.coords[0].0), sx(&row.boxed.coords[0].1));
        let (y0, y1) = match row.boxed.coords.get(1) {
            Some((a, b)) => (sy(b), sy(a)),
            None => (SIZE * (1.0 - row.p as f64 / row.q as f64) - 4.0, SIZE * (1.0 - row.p as f64 / row.q as f64) + 4.0),
        };
        writeln!(
            out,
            r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="hsl({hue},70%,60%)" fill-opacity="0.6" stroke="black" stroke-width="1"><title>{}/{}</title></rect>"#,
            (x1 - x0).max(1.0),
            (y1 - y0).max(1.0),
            row.p,
            row.q
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagonalSlice {
    pub nu: Vec<Rational>,
    pub member: bool,
}

/// `nu_s(omega) = (1 - omega, ..)` and whether the Sturmian orbit of `omega`
/// lies within the kappa order interval of `g`.
pub fn diagonal_slice(g: &BimodalMap, k: u32, omega: &Rational) -> Result<DiagonalSlice> {
    if omega.is_negative() || *omega > 1 {
        return Err(Error::InvalidInput(format!("omega = {omega} outside [0, 1]")));
    }
    let nu = vec![Rational::one() - omega; k as usize];
    let sturm = if omega.is_zero() {
        Word::periodic(2, vec![0])?
    } else if *omega == 1 {
        Word::periodic(2, vec![1])?
    } else {
        sturmian_word(omega)?
    };
    let kw = kappa_words(g, 64);
    Ok(DiagonalSlice { nu, member: in_order_interval(&sturm, &kw.kappa0, &kw.kappa1)? })
}
