//! Acceptance criteria 1-10. Every criterion prints one PASS/FAIL line.
//!
//! Criterion 6 (count_in_base >= 0.4 q_n along the convergents of 1/phi^2) does
//! not hold for even p_n: there count_in_base = (q_n - p_n + 1) / 2, about
//! 0.31 q_n. It runs unchanged and reports FAIL; `EXPECTED_FAILURES` keeps it
//! from failing the test run while any other failure still does.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use kfsm::circlemap::{inverse_itinerary_model, lift_periodic_orbit, map_itinerary, rotation_interval, BimodalMap};
use kfsm::hm::{b_k_rational, c_k, count_kfsm_periodic, discrete_hm, lambda_cylinder, pure_lattice, skewness, HMParams};
use kfsm::interp::{box_of, rotation_number, FlatSpotLift, InterpolatedMap, RotationResult};
use kfsm::subshift::{is_symbolic_kfsm, sturmian_word, Word, WordSet};
use kfsm::{CirclePoint, Rational};

const EXPECTED_FAILURES: &[u32] = &[6];

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() < limit, || format!("took {:?}, limit {limit:?}", start.elapsed()))
}

fn kfsm(args: &[&str]) -> Result<Vec<Value>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_kfsm")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("kfsm {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect()
}

fn fractions(max_q: u64) -> Vec<(u64, u64)> {
    (2..=max_q).flat_map(|q| (1..q).filter(move |&p| gcd(p, q) == 1).map(move |p| (p, q))).collect()
}

/// Least period of a cyclic sequence, by direct search.
fn least_period(v: &[u32]) -> usize {
    (1..=v.len()).find(|&d| v.len() % d == 0 && (0..v.len()).all(|i| v[i] == v[(i + d) % v.len()])).unwrap()
}

/// Least rotation of a cyclic sequence as a word over `alphabet`.
fn necklace(alphabet: u32, v: &[u32]) -> Word {
    let n = v.len();
    let best = (0..n).map(|s| (0..n).map(|i| v[(s + i) % n]).collect::<Vec<_>>()).min().unwrap();
    Word::periodic(alphabet, best).unwrap()
}

fn successors(a: u32, k: u32) -> [u32; 2] {
    let m = 2 * k;
    if a % 2 == 0 { [a, (a + 1) % m] } else { [(a + 1) % m, (a + 2) % m] }
}

/// A random allowable rational `nu`: nonnegative, summing to `k (1 - p/q)`.
fn random_nu(rng: &mut ChaCha8Rng, k: u32, p: u64, q: u64) -> Vec<Rational> {
    let m = rng.gen_range(1..=3i64);
    let total = k as i64 * (q - p) as i64 * m;
    let den = q as i64 * m;
    let j = if rng.gen_bool(0.3) {
        // deliberately tau-symmetric: repeat a block of length j | k
        let divisors: Vec<u32> = (1..=k).filter(|d| k % d == 0).collect();
        divisors[rng.gen_range(0..divisors.len())]
    } else {
        k
    };
    let reps = (k / j) as i64;
    if total % reps != 0 {
        return random_nu_block(rng, k as usize, total, den);
    }
    let block = random_nu_block(rng, j as usize, total / reps, den);
    block.iter().cycle().take(k as usize).cloned().collect()
}

fn random_nu_block(rng: &mut ChaCha8Rng, len: usize, total: i64, den: i64) -> Vec<Rational> {
    let mut cuts: Vec<i64> = (0..len - 1).map(|_| rng.gen_range(0..=total)).collect();
    cuts.push(0);
    cuts.push(total);
    cuts.sort();
    cuts.windows(2).map(|w| r(w[1] - w[0], den)).collect()
}

fn random_fraction(rng: &mut ChaCha8Rng, max_q: u64) -> (u64, u64) {
    loop {
        let q = rng.gen_range(2..=max_q);
        let p = rng.gen_range(1..q);
        if gcd(p, q) == 1 {
            return (p, q);
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let a = kfsm(&["generate", "--k", "2", "--omega", "2/5", "--nu", "3/5,3/5"])?;
    within(start, Duration::from_secs(1))?;
    let start = Instant::now();
    let b = kfsm(&["generate", "--k", "2", "--omega", "2/5", "--nu", "4/5,2/5"])?;
    within(start, Duration::from_secs(1))?;
    let strings = |v: &Value, key: &str| -> Vec<String> {
        v[key].as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_owned()).collect()
    };
    ensure(strings(&a[0], "orbits") == ["(00123)", "(01223)"], || format!("orbits {}", a[0]["orbits"]))?;
    ensure(strings(&a[0], "weights") == ["1/2", "1/2"], || format!("weights {}", a[0]["weights"]))?;
    ensure(strings(&b[0], "orbits") == ["(00123)"], || format!("orbits {}", b[0]["orbits"]))?;
    let target = necklace(2, &[0, 1, 0, 0, 1]);
    for s in strings(&a[0], "orbits").iter().chain(&strings(&b[0], "orbits")) {
        let base = Word::parse(s, 4).unwrap().project_base().canonical();
        ensure(base == target, || format!("{s} projects to {base}"))?;
    }
    Ok("{00123, 01223} weights (1/2, 1/2); {00123}; both project to (01001)".into())
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let fr = fractions(50);
    for &(p, q) in &fr {
        let (p, q) = (p as i64, q as i64);
        // floor((i + 1) p / q + phi) - floor(i p / q + phi) with phi = 1 / (2q)
        let floor = |i: i64| (2 * i * p + 1).div_euclid(2 * q);
        let mech: Vec<u32> = (0..q).map(|i| (floor(i + 1) - floor(i)) as u32).collect();
        let expected = necklace(2, &mech);
        let word = sturmian_word(&r(p, q)).map_err(|e| e.to_string())?;
        ensure(word == expected, || format!("{p}/{q}: {word} vs {expected}"))?;
        for k in 1..=3u32 {
            let nu = vec![r(q - p, q); k as usize];
            let cluster = b_k_rational(k, p as u64, q as u64, &nu).map_err(|e| e.to_string())?;
            let proj = c_k(&cluster);
            ensure(proj.members() == [expected.clone()], || format!("{p}/{q} k={k}: {:?}", proj.members()))?;
        }
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("{} fractions, k = 1..3", fr.len()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut symmetric = 0;
    for _ in 0..100 {
        let k = rng.gen_range(1..=5u32);
        let (p, q) = random_fraction(&mut rng, 30);
        let nu = random_nu(&mut rng, k, p, q);
        let j = (1..=k as usize).find(|&j| (0..k as usize).all(|i| nu[i] == nu[(i + j) % k as usize])).unwrap() as u64;
        if j < k as u64 {
            symmetric += 1;
        }
        let cluster = b_k_rational(k, p, q, &nu).map_err(|e| format!("{p}/{q} {nu:?}: {e}"))?;
        let cover = q * k as u64 / gcd(p, k as u64);
        let base = j * q / gcd(j, p);
        // the projected set repeats after the lcm of its orbits' periods
        let mut set_period = 1;
        for w in &cluster.orbits {
            let cyc = w.prefix(w.period().len());
            let proj: Vec<u32> = cyc.iter().map(|s| s % 2).collect();
            ensure(least_period(&cyc) as u64 == cover, || format!("k={k} {p}/{q} {nu:?}: {w} period != {cover}"))?;
            let d = least_period(&proj) as u64;
            set_period = set_period / gcd(set_period, d) * d;
        }
        ensure(set_period == base, || format!("k={k} {p}/{q} {nu:?}: base period {set_period} != {base}"))?;
    }
    Ok(format!("100 samples ({symmetric} tau-symmetric)"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let k = rng.gen_range(1..=4u32);
        let (p, q) = random_fraction(&mut rng, 12);
        let omega = r(p as i64, q as i64);
        let nu = random_nu(&mut rng, k, p, q);
        let params = HMParams::new(k, omega.clone(), nu.clone()).map_err(|e| e.to_string())?;
        let kk = Rational::from_int(k as i64);
        let mut odd = Rational::zero();
        for j in 0..k as usize {
            let even = lambda_cylinder(&params, &[2 * j as u32]);
            let odd_j = lambda_cylinder(&params, &[2 * j as u32 + 1]);
            ensure(even == &nu[j] / &kk && odd_j == &omega / &kk, || format!("length-1 cylinders {nu:?} j={j}"))?;
            odd += &odd_j;
        }
        ensure(odd == omega, || format!("odd mass {odd} != {omega}"))?;
        let skew: Vec<Rational> = nu.iter().map(|v| (v + &omega) / &kk).collect();
        ensure(skewness(&params) == skew, || format!("skewness {nu:?}"))?;

        let cluster = b_k_rational(k, p, q, &nu).map_err(|e| e.to_string())?;
        let n = rng.gen_range(2..=3usize);
        let mut freq: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for (w, weight) in cluster.orbits.iter().zip(&cluster.weights) {
            let len = w.period().len();
            for i in 0..len {
                let block: Vec<u32> = (0..n).map(|t| w.at(i + t).unwrap()).collect();
                *freq.entry(block).or_insert_with(Rational::zero) += &(weight / Rational::from_int(len as i64));
            }
        }
        let blocks = (0..n).fold(vec![vec![]], |acc: Vec<Vec<u32>>, _| {
            acc.into_iter().flat_map(|b| (0..2 * k).map(move |s| [b.clone(), vec![s]].concat())).collect()
        });
        for block in blocks {
            let expected = freq.get(&block).cloned().unwrap_or_else(Rational::zero);
            let got = lambda_cylinder(&params, &block);
            ensure(got == expected, || format!("k={k} {omega} {nu:?} {block:?}: {got} vs {expected}"))?;
        }
    }
    Ok("50 samples, blocks of length 1..3".into())
}

/// Periodic orbits of Omega_k with exact period `n` and `ones` odd symbols per period.
fn omega_orbits(k: u32, n: usize, ones: usize) -> BTreeSet<Word> {
    fn dfs(k: u32, n: usize, ones: usize, path: &mut Vec<u32>, out: &mut BTreeSet<Word>) {
        let odd = path.iter().filter(|s| *s % 2 == 1).count();
        if odd > ones {
            return;
        }
        if path.len() == n {
            if odd == ones && successors(path[n - 1], k).contains(&path[0]) && least_period(path) == n {
                out.insert(necklace(2 * k, path));
            }
            return;
        }
        for s in successors(*path.last().unwrap(), k) {
            path.push(s);
            dfs(k, n, ones, path, out);
            path.pop();
        }
    }
    let mut out = BTreeSet::new();
    for s in 0..2 * k {
        dfs(k, n, ones, &mut vec![s], &mut out);
    }
    out
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for k in 1..=2u32 {
        for (p, q) in fractions(7) {
            let n = (q * k as u64 / gcd(p, k as u64)) as usize;
            let brute: BTreeSet<Word> = omega_orbits(k, n, n * p as usize / q as usize)
                .into_iter()
                .filter(|w| {
                    let z = WordSet::new(2 * k, [w.clone()]).unwrap();
                    is_symbolic_kfsm(&z, k).unwrap().is_kfsm()
                })
                .collect();
            let mut hm = BTreeSet::new();
            for nu in pure_lattice(k, p, q) {
                let cluster = b_k_rational(k, p, q, &nu).map_err(|e| e.to_string())?;
                ensure(cluster.orbits.len() == 1, || format!("pure {nu:?} gave {} orbits", cluster.orbits.len()))?;
                hm.insert(cluster.orbits[0].clone());
            }
            ensure(brute == hm, || format!("k={k} {p}/{q}: brute {brute:?} vs hm {hm:?}"))?;
            cases += 1;
        }
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("{cases} (k, p/q) cases"))
}

fn criterion_6() -> Outcome {
    let convergents = [(1, 2), (1, 3), (2, 5), (3, 8), (5, 13), (8, 21), (13, 34), (21, 55), (34, 89)];
    let mut short = Vec::new();
    for (p, q) in convergents {
        let (cover, base) = count_kfsm_periodic(2, p, q);
        let discrete: BTreeSet<Word> = (0..=2 * (q - p) as i64)
            .map(|mu| discrete_hm(p, q, mu))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure(cover == (discrete.len() as u64).into(), || format!("{p}/{q}: cover {cover} vs discrete {}", discrete.len()))?;
        let base: u64 = base.try_into().unwrap();
        if 10 * base < 4 * q {
            short.push(format!("{p}/{q}: base {base} < {}", 0.4 * q as f64));
        }
    }
    ensure(short.is_empty(), || short.join("; "))?;
    Ok("count_in_base >= 0.4 q_n along all convergents".into())
}

/// The point of `S_k` coded by a word of `Omega_k` on the model map.
fn model_point(w: &Word) -> Rational {
    inverse_itinerary_model(&w.project_base()).unwrap() + (w.at(0).unwrap() / 2) as i64
}

fn criterion_7() -> Outcome {
    let g = BimodalMap::model();
    let mut cases = 0;
    for k in 1..=2u32 {
        for (p, q) in fractions(7) {
            let rho = r(p as i64, q as i64);
            for nu in pure_lattice(k, p, q) {
                let cluster = b_k_rational(k, p, q, &nu).map_err(|e| e.to_string())?;
                let z = cluster.word_set();
                let orbit = &cluster.orbits[0];
                let b = box_of(&g, &z).map_err(|e| format!("{p}/{q} {nu:?}: {e}"))?;
                let tag = format!("k={k} {p}/{q} nu={nu:?}");

                let center = InterpolatedMap::new(&g, b.center()).map_err(|e| e.to_string())?;
                let got = rotation_number(&center, 10_000);
                ensure(got == RotationResult::Exact(rho.clone()), || format!("{tag}: center rotation {got}"))?;
                let modulus = Rational::from_int(k as i64);
                for w in z.points() {
                    let x = model_point(&w);
                    let image = center.eval(&x).rem_euclid(&modulus);
                    let next = model_point(&w.shift());
                    ensure(image == next, || format!("{tag}: H moves {x} to {image}, expected {next}"))?;
                }

                // lower corner: flat spot j starts at the largest point of Z in I_{2j-3}
                let corner = InterpolatedMap::new(&g, b.lower_corner()).map_err(|e| e.to_string())?;
                let got = rotation_number(&corner, 10_000);
                ensure(got == RotationResult::Exact(rho.clone()), || format!("{tag}: corner rotation {got}"))?;
                let j = (1..=k as i64)
                    .find(|j| z.extreme_in_cylinder(((2 * j - 3).rem_euclid(2 * k as i64)) as u32, true).is_some())
                    .unwrap();
                let x = corner.spots()[(j - 1) as usize].0.clone();
                let n = orbit.period().len();
                let coded = map_itinerary(&g, &CirclePoint::new(x, k as u64), n).map_err(|e| format!("{tag}: {e}"))?;
                let coded = necklace(2 * k, &coded.prefix(n));
                ensure(&coded == orbit, || format!("{tag}: spot orbit {coded} vs {orbit}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} pure parameters"))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let dir = std::env::temp_dir().join(format!("kfsm-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let csv = dir.join("diag.csv");
    let svg = dir.join("diag.svg");
    kfsm(&[
        "diagram", "--map", "model", "--k", "2", "--max-den", "5",
        "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ])?;
    within(start, Duration::from_secs(30))?;
    let text = std::fs::read_to_string(&csv).map_err(|e| e.to_string())?;
    let svg_rects = std::fs::read_to_string(&svg).map_err(|e| e.to_string())?.matches("<rect").count();
    let _ = std::fs::remove_dir_all(&dir);

    type Rect = [Rational; 4];
    let mut rects: Vec<((u64, u64), Rect)> = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let c: Vec<Rational> = f[3..7].iter().map(|s| s.parse().unwrap()).collect();
        rects.push(((f[0].parse().unwrap(), f[1].parse().unwrap()), [c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()]));
    }
    ensure(svg_rects == rects.len() + 1, || format!("svg has {svg_rects} rects for {} rows", rects.len()))?;
    let set: BTreeSet<_> = rects.iter().cloned().collect();
    for (pq, [a, b, c, d]) in &rects {
        let swapped = (*pq, [c.clone(), d.clone(), a.clone(), b.clone()]);
        ensure(set.contains(&swapped), || format!("{pq:?}: no swap image of {a},{b},{c},{d}"))?;
    }
    for (i, (pq, x)) in rects.iter().enumerate() {
        for (pq2, y) in &rects[i + 1..] {
            let meet = x[0].clone().max(y[0].clone()) < x[1].clone().min(y[1].clone())
                && x[2].clone().max(y[2].clone()) < x[3].clone().min(y[3].clone());
            ensure(pq == pq2 || !meet, || format!("interiors of {pq:?} and {pq2:?} meet"))?;
        }
    }
    let mut counts: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for (pq, _) in &rects {
        *counts.entry(*pq).or_default() += 1;
    }
    let expected: BTreeMap<(u64, u64), u64> =
        fractions(5).into_iter().map(|(p, q)| ((p, q), if p % 2 == 1 { 2 * (q - p) + 1 } else { q - p + 1 })).collect();
    ensure(counts == expected, || format!("counts {counts:?} vs {expected:?}"))?;
    Ok(format!("{} rectangles over {} rotation numbers", rects.len(), counts.len()))
}

fn criterion_9() -> Outcome {
    let g = BimodalMap::model();
    let interval = rotation_interval(&g, 1000).map_err(|e| e.to_string())?;
    ensure(interval == (r(0, 1), r(1, 1)), || format!("rotation interval {interval:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for ray in 0..20 {
        let k = rng.gen_range(1..=3usize);
        let c0: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=20)).collect();
        let dir: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=4)).collect();
        let mut last: Option<RotationResult> = None;
        for t in 0..=10 {
            let c: Vec<Rational> = (0..k).map(|i| r((c0[i] + t * dir[i]).min(80), 160)).collect();
            let rho = rotation_number(&InterpolatedMap::new(&g, c.clone()).map_err(|e| e.to_string())?, 4000);
            if let Some(prev) = &last {
                let (lo, _) = prev.bounds();
                let (_, hi) = rho.bounds();
                ensure(lo <= hi, || format!("ray {ray}: {prev} then {rho} at {c:?}"))?;
            }
            last = Some(rho);
        }
    }
    Ok("rho(model) = [0, 1]; 20 rays nondecreasing".into())
}

fn criterion_10() -> Outcome {
    let g = BimodalMap::model();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..50 {
        let k0 = rng.gen_range(1..=3u32);
        let (p, q) = random_fraction(&mut rng, 12);
        let lattice = pure_lattice(k0, p, q);
        let nu = &lattice[rng.gen_range(0..lattice.len())];
        let cluster = b_k_rational(k0, p, q, nu).map_err(|e| e.to_string())?;
        let w = c_k(&cluster).members()[0].clone();
        let q1 = w.period().len();
        let p1 = w.period().iter().filter(|s| **s == 1).count() as u64;
        let orbit: Vec<Rational> = w.orbit().iter().map(|s| inverse_itinerary_model(s).unwrap()).collect();
        let k = rng.gen_range(1..=6u32);
        let lifted = lift_periodic_orbit(&g, &orbit, p1 as i64, q1, k).map_err(|e| format!("{w} k={k}: {e}"))?;
        let d = gcd(k as u64, p1);
        let period = k as usize * q1 / d as usize;
        let tag = format!("{w} (p'={p1}, q'={q1}) k={k}");
        ensure(lifted.len() as u64 == d, || format!("{tag}: {} orbits, expected {d}", lifted.len()))?;
        let mut all = BTreeSet::new();
        for cycle in &lifted {
            ensure(cycle.len() == period, || format!("{tag}: period {} expected {period}", cycle.len()))?;
            let mut y = CirclePoint::new(cycle[0].clone(), k as u64);
            for x in cycle {
                ensure(y.value() == x, || format!("{tag}: not a g_k orbit"))?;
                y = g.eval_on(&y);
                all.insert(x.clone());
            }
            ensure(y.value() == &cycle[0], || format!("{tag}: cycle does not close"))?;
        }
        ensure(all.len() == k as usize * q1, || format!("{tag}: lifts overlap or miss points"))?;
    }
    Ok("50 samples".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        (1, "cluster reproduction", criterion_1),
        (2, "Sturmian oracle", criterion_2),
        (3, "period formulas", criterion_3),
        (4, "measure consistency", criterion_4),
        (5, "brute-force kfsm equivalence", criterion_5),
        (6, "counting growth", criterion_6),
        (7, "interpolation consistency", criterion_7),
        (8, "diagram reproduction", criterion_8),
        (9, "rotation interval and monotonicity", criterion_9),
        (10, "lifting", criterion_10),
    ];
    let mut unexpected = Vec::new();
    let mut err = std::io::stderr();
    for (n, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let line = match &outcome {
            Ok(detail) => format!("PASS  {n:>2} {name} ({secs:.2}s): {detail}"),
            Err(detail) => format!("FAIL  {n:>2} {name} ({secs:.2}s): {detail}"),
        };
        writeln!(err, "{line}").unwrap();
        if outcome.is_err() != EXPECTED_FAILURES.contains(&n) {
            unexpected.push(line);
        }
    }
    assert!(unexpected.is_empty(), "unexpected acceptance results:\n{}", unexpected.join("\n"));
}
