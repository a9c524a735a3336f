//! Cross-checks between single-pass arc jets and the explicit multi-index
//! sums, plus finite-difference verification of arc coefficients.

use hotan_core::jets::{eval_on_arc, Arc, ArcTail};
use hotan_core::taylor::{derivative_tensor, sum_order_k, sum_order_s};
use hotan_core::{default_variables, parse, Expr};

/// splitmix64, enough randomness for test instance generation
struct Rng(u64);

impl Rng {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.next_u64() as f64 / u64::MAX as f64;
        lo + u * (hi - lo)
    }

    fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Random polynomial with n variables, total degree <= 4, built as source
/// text so the parser is exercised too.
fn random_poly(rng: &mut Rng, n: usize) -> Expr {
    let vars = default_variables(n);
    let terms = 1 + rng.below(6);
    let mut text = String::new();
    for i in 0..terms {
        let coeff = rng.uniform(-2.0, 2.0);
        if i > 0 {
            text.push_str(" + ");
        }
        text.push_str(&format!("{coeff}"));
        let mut budget = 4usize;
        for v in &vars {
            let e = rng.below(budget.min(3) + 1);
            budget -= e;
            if e > 0 {
                text.push_str(&format!("*{v}^{e}"));
            }
        }
    }
    parse(&text, &vars).unwrap()
}

fn random_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

#[test]
fn arc_jet_coefficients_match_multi_index_sums() {
    let mut rng = Rng(0x5eed_0001);
    for _ in 0..60 {
        let n = 2 + rng.below(2);
        let k = 2 + rng.below(3);
        let f = random_poly(&mut rng, n);
        let base = random_vec(&mut rng, n);
        let dirs: Vec<Vec<f64>> = (0..k - 1).map(|_| random_vec(&mut rng, n)).collect();
        let w = random_vec(&mut rng, n);

        let plain = Arc::new(base.clone(), dirs.clone());
        let jet = eval_on_arc(&f, &plain, k - 1).unwrap();
        for s in 1..k {
            let explicit = sum_order_s(&f, &base, &dirs, s).unwrap();
            let diff = (jet.coeff(s) - explicit).abs();
            assert!(
                diff <= 1e-9 * (1.0 + explicit.abs()),
                "order {s}: jet {} vs sum {}",
                jet.coeff(s),
                explicit
            );
        }

        let tailed = Arc::with_tail(
            base.clone(),
            dirs.clone(),
            ArcTail {
                vector: w.clone(),
                degree: k,
                scale: 1.0,
            },
        );
        let jet_k = eval_on_arc(&f, &tailed, k).unwrap();
        let explicit_k = sum_order_k(&f, &base, &dirs, &w).unwrap();
        let diff = (jet_k.coeff(k) - explicit_k).abs();
        assert!(
            diff <= 1e-9 * (1.0 + explicit_k.abs()),
            "order {k} with tail: jet {} vs sum {}",
            jet_k.coeff(k),
            explicit_k
        );
    }
}

#[test]
fn arc_jet_coefficients_match_central_differences() {
    let mut rng = Rng(0x5eed_0002);
    let step = 1e-3;
    let mut checked = 0;
    while checked < 20 {
        let n = 2 + rng.below(2);
        let k = 2 + rng.below(3);
        let f = random_poly(&mut rng, n);
        let base = random_vec(&mut rng, n);
        let dirs: Vec<Vec<f64>> = (0..k - 1).map(|_| random_vec(&mut rng, n)).collect();
        let arc = Arc::new(base, dirs);
        let g = |t: f64| f.eval(&arc.point_at(t)).unwrap();
        let jet = eval_on_arc(&f, &arc, k - 1).unwrap();
        for s in 1..k.min(4) {
            let fd = match s {
                1 => (g(step) - g(-step)) / (2.0 * step),
                2 => (g(step) - 2.0 * g(0.0) + g(-step)) / (step * step),
                _ => (g(2.0 * step) - 2.0 * g(step) + 2.0 * g(-step) - g(-2.0 * step))
                    / (2.0 * step * step * step),
            };
            let factorial = [1.0, 1.0, 2.0, 6.0][s];
            let expected = fd / factorial;
            if expected.abs() < 0.05 {
                continue; // relative comparison needs a meaningful magnitude
            }
            let rel = (jet.coeff(s) - expected).abs() / expected.abs();
            assert!(rel <= 1e-4, "order {s}: jet {} vs fd {}", jet.coeff(s), expected);
            checked += 1;
        }
    }
}

#[test]
fn derivative_tensor_is_permutation_invariant() {
    let mut rng = Rng(0x5eed_0003);
    for _ in 0..50 {
        let n = 2 + rng.below(2);
        let f = random_poly(&mut rng, n);
        let base = random_vec(&mut rng, n);
        let u = random_vec(&mut rng, n);
        let v = random_vec(&mut rng, n);
        let z = random_vec(&mut rng, n);
        let a = derivative_tensor(&f, &base, &[(&u, 1), (&v, 1), (&z, 1)]).unwrap();
        let b = derivative_tensor(&f, &base, &[(&z, 1), (&u, 1), (&v, 1)]).unwrap();
        let c = derivative_tensor(&f, &base, &[(&v, 1), (&z, 1), (&u, 1)]).unwrap();
        let scale = 1.0 + a.abs();
        assert!((a - b).abs() <= 1e-9 * scale, "{a} vs {b}");
        assert!((a - c).abs() <= 1e-9 * scale, "{a} vs {c}");
    }
}

#[test]
fn corollary_specializations_match_generic_evaluator() {
    let mut rng = Rng(0x5eed_0004);
    // order 2: f'(x)w + (1/2) f''(x)[h]^2
    for _ in 0..30 {
        let n = 2 + rng.below(2);
        let f = random_poly(&mut rng, n);
        let base = random_vec(&mut rng, n);
        let h = random_vec(&mut rng, n);
        let w = random_vec(&mut rng, n);
        let generic = sum_order_k(&f, &base, &[h.clone()], &w).unwrap();
        let hand = derivative_tensor(&f, &base, &[(&w, 1)]).unwrap()
            + 0.5 * derivative_tensor(&f, &base, &[(&h, 2)]).unwrap();
        assert!(
            (generic - hand).abs() <= 1e-9 * (1.0 + hand.abs()),
            "{generic} vs {hand}"
        );
    }
    // order 3: f'(x)w + f''(x)[h1][h2] + (1/3!) f'''(x)[h1]^3
    for _ in 0..30 {
        let n = 2 + rng.below(2);
        let f = random_poly(&mut rng, n);
        let base = random_vec(&mut rng, n);
        let h1 = random_vec(&mut rng, n);
        let h2 = random_vec(&mut rng, n);
        let w = random_vec(&mut rng, n);
        let generic = sum_order_k(&f, &base, &[h1.clone(), h2.clone()], &w).unwrap();
        let hand = derivative_tensor(&f, &base, &[(&w, 1)]).unwrap()
            + derivative_tensor(&f, &base, &[(&h1, 1), (&h2, 1)]).unwrap()
            + derivative_tensor(&f, &base, &[(&h1, 3)]).unwrap() / 6.0;
        assert!(
            (generic - hand).abs() <= 1e-9 * (1.0 + hand.abs()),
            "{generic} vs {hand}"
        );
    }
}

#[test]
fn nonpolynomial_jets_match_finite_differences() {
    let vars = default_variables(2);
    let f = parse("sin(x1)*exp(x2) + cos(x1*x2)", &vars).unwrap();
    let arc = Arc::new(vec![0.3, -0.2], vec![vec![1.0, 0.5], vec![-0.3, 1.0]]);
    let jet = eval_on_arc(&f, &arc, 2).unwrap();
    let g = |t: f64| f.eval(&arc.point_at(t)).unwrap();
    let step = 1e-4;
    let d1 = (g(step) - g(-step)) / (2.0 * step);
    let d2 = (g(step) - 2.0 * g(0.0) + g(-step)) / (step * step);
    assert!((jet.coeff(1) - d1).abs() <= 1e-6 * (1.0 + d1.abs()));
    assert!((jet.coeff(2) - d2 / 2.0).abs() <= 1e-5 * (1.0 + d2.abs()));
}
