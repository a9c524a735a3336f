//! Multi-index enumeration and explicit evaluation of the weighted
//! derivative-tensor sums that give the order-s Taylor coefficients of f
//! along a polynomial arc.
//!
//! This is the combinatorial route: enumerate the index set, evaluate each
//! symmetric tensor against its argument list, add with 1/(a1!...as!)
//! weights. It serves as the independent cross-check of single-pass jet
//! propagation.

use thiserror::Error;

use crate::expr::{DomainError, Expr};
use crate::jets::directional_jet;

/// Largest tensor order with exact integer factorials in this build.
pub const MAX_ORDER: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaylorError {
    #[error("derivative order {0} exceeds the supported bound {MAX_ORDER}")]
    OrderTooLarge(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Exponent tuple (a1, ..., as) with weighted sum `a1 + 2 a2 + ... + s as`
/// pinned by the enumeration that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndex {
    alpha: Vec<u32>,
}

impl MultiIndex {
    pub fn alpha(&self) -> &[u32] {
        &self.alpha
    }

    /// a1 + 2 a2 + ... + s as
    pub fn weighted_sum(&self) -> usize {
        self.alpha
            .iter()
            .enumerate()
            .map(|(i, a)| (i + 1) * *a as usize)
            .sum()
    }

    /// a1 + ... + as, the order of the tensor this index addresses.
    pub fn total(&self) -> usize {
        self.alpha.iter().map(|a| *a as usize).sum()
    }
}

/// All tuples of length `parts` with a1 + 2 a2 + ... + parts·a_parts = total,
/// in ascending lexicographic order.
pub(crate) fn enumerate_weighted(parts: usize, total: usize) -> Vec<Vec<u32>> {
    fn rec(parts: usize, pos: usize, remaining: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == parts {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let weight = pos + 1;
        if pos + 1 == parts {
            // last slot must absorb the remainder exactly
            if remaining % weight == 0 {
                cur.push((remaining / weight) as u32);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for a in 0..=(remaining / weight) {
            cur.push(a as u32);
            rec(parts, pos + 1, remaining - a * weight, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(parts, 0, total, &mut Vec::new(), &mut out);
    out
}

/// Index set of the order-s stationarity sum: all (a1, ..., as) >= 0 with
/// a1 + 2 a2 + ... + s as = s. The count is the partition number p(s).
pub fn enumerate_multiindices(s: usize) -> Vec<MultiIndex> {
    assert!(s >= 1, "order must be at least 1");
    enumerate_weighted(s, s)
        .into_iter()
        .map(|alpha| MultiIndex { alpha })
        .collect()
}

fn factorial(n: u32) -> Result<u64, TaylorError> {
    if n as usize > MAX_ORDER {
        return Err(TaylorError::OrderTooLarge(n as usize));
    }
    Ok((2..=n as u64).product())
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Value of the symmetric m-linear derivative tensor
/// `f^(m)(base)[v1]^a1 ... [vu]^au` with m the total multiplicity.
///
/// Extracted from univariate jet passes along subset sums of the arguments
/// (the polarization identity), so evaluation reuses the series recurrences
/// and never forms the tensor itself.
pub fn derivative_tensor(
    f: &Expr,
    base: &[f64],
    args: &[(&[f64], u32)],
) -> Result<f64, TaylorError> {
    let n = f.arity();
    assert_eq!(base.len(), n, "base point dimension mismatch");
    for (v, _) in args {
        assert_eq!(v.len(), n, "argument dimension mismatch");
    }
    let m: u32 = args.iter().map(|(_, mult)| *mult).sum();
    assert!(m >= 1, "tensor order must be at least 1");
    if m as usize > MAX_ORDER {
        return Err(TaylorError::OrderTooLarge(m as usize));
    }

    // Sum over sub-multiplicities beta <= alpha, skipping beta = 0:
    //   sum (-1)^(m-|beta|) C(alpha,beta) c_m(sum_j beta_j v_j)
    // where c_m is the m-th jet coefficient along the given direction.
    let mut beta: Vec<u32> = vec![0; args.len()];
    let mut total = 0.0;
    loop {
        // advance odometer
        let mut carry = true;
        for (b, (_, a)) in beta.iter_mut().zip(args) {
            if !carry {
                break;
            }
            if *b < *a {
                *b += 1;
                carry = false;
            } else {
                *b = 0;
            }
        }
        if carry {
            break; // wrapped past the last combination
        }
        let size: u32 = beta.iter().sum();
        let mut dir = vec![0.0; n];
        let mut comb = 1.0;
        for ((v, a), b) in args.iter().zip(&beta) {
            comb *= binomial(*a, *b);
            if *b > 0 {
                for (d, vi) in dir.iter_mut().zip(*v) {
                    *d += *b as f64 * vi;
                }
            }
        }
        let sign = if (m - size) % 2 == 0 { 1.0 } else { -1.0 };
        let cm = directional_jet(f, base, &dir, m as usize)?.coeff(m as usize);
        total += sign * comb * cm;
    }
    Ok(total)
}

/// Order-s stationarity sum: over all multi-indices with weighted sum s,
/// `1/(a1!...as!) · f^(|a|)(base)[h1]^a1 ... [hs]^as`.
pub fn sum_order_s(
    f: &Expr,
    base: &[f64],
    directions: &[Vec<f64>],
    s: usize,
) -> Result<f64, TaylorError> {
    assert!(
        s >= 1 && s <= directions.len(),
        "order s must satisfy 1 <= s <= number of directions"
    );
    if s > MAX_ORDER {
        return Err(TaylorError::OrderTooLarge(s));
    }
    let mut total = 0.0;
    for idx in enumerate_multiindices(s) {
        total += weighted_tensor_term(f, base, directions, idx.alpha())?;
    }
    Ok(total)
}

/// Order-k condition value: `f'(base)w` plus the sum over multi-indices of
/// length k-1 with weighted sum k.
pub fn sum_order_k(
    f: &Expr,
    base: &[f64],
    directions: &[Vec<f64>],
    w: &[f64],
) -> Result<f64, TaylorError> {
    let k = directions.len() + 1;
    assert!(k >= 2, "need at least one direction");
    if k > MAX_ORDER {
        return Err(TaylorError::OrderTooLarge(k));
    }
    let mut total = derivative_tensor(f, base, &[(w, 1)])?;
    for alpha in enumerate_weighted(k - 1, k) {
        total += weighted_tensor_term(f, base, directions, &alpha)?;
    }
    Ok(total)
}

fn weighted_tensor_term(
    f: &Expr,
    base: &[f64],
    directions: &[Vec<f64>],
    alpha: &[u32],
) -> Result<f64, TaylorError> {
    let mut args: Vec<(&[f64], u32)> = Vec::new();
    let mut weight = 1.0;
    for (i, a) in alpha.iter().enumerate() {
        weight /= factorial(*a)? as f64;
        if *a > 0 {
            args.push((directions[i].as_slice(), *a));
        }
    }
    if args.is_empty() {
        return Ok(0.0);
    }
    Ok(weight * derivative_tensor(f, base, &args)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{default_variables, parse};
    use approx::assert_relative_eq;

    /// Brute force over the exponent box with an early weight cutoff; the
    /// cutoff only skips tuples that already exceed the target.
    fn brute_force_weighted(parts: usize, total: usize) -> Vec<Vec<u32>> {
        fn rec(
            parts: usize,
            total: usize,
            pos: usize,
            weight_so_far: usize,
            cur: &mut Vec<u32>,
            out: &mut Vec<Vec<u32>>,
        ) {
            if pos == parts {
                if weight_so_far == total {
                    out.push(cur.clone());
                }
                return;
            }
            for a in 0..=total as u32 {
                let w = weight_so_far + (pos + 1) * a as usize;
                if w > total {
                    break;
                }
                cur.push(a);
                rec(parts, total, pos + 1, w, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(parts, total, 0, 0, &mut Vec::new(), &mut out);
        out.sort();
        out
    }

    #[test]
    fn multiindex_counts_match_partition_numbers() {
        let expected = [1usize, 2, 3, 5, 7, 11, 15, 22];
        for (s, want) in (1..=8).zip(expected) {
            let got = enumerate_multiindices(s);
            assert_eq!(got.len(), want, "count at s={s}");
            for idx in &got {
                assert_eq!(idx.weighted_sum(), s);
            }
        }
    }

    #[test]
    fn enumeration_matches_brute_force_and_is_sorted() {
        for s in 1..=8 {
            let got: Vec<Vec<u32>> = enumerate_multiindices(s)
                .into_iter()
                .map(|m| m.alpha().to_vec())
                .collect();
            let mut sorted = got.clone();
            sorted.sort();
            assert_eq!(got, sorted, "lexicographic order at s={s}");
            assert_eq!(got, brute_force_weighted(s, s), "brute force at s={s}");
        }
        // the order-k index set over k-1 slots
        assert_eq!(enumerate_weighted(1, 2), vec![vec![2]]);
        assert_eq!(enumerate_weighted(2, 3), brute_force_weighted(2, 3));
        assert_eq!(enumerate_weighted(3, 4), brute_force_weighted(3, 4));
    }

    #[test]
    fn single_index_at_s_equals_one() {
        let got = enumerate_multiindices(1);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].alpha(), &[1]);
    }

    #[test]
    fn hessian_of_square() {
        let f = parse("x1^2", &default_variables(2)).unwrap();
        let e1: &[f64] = &[1.0, 0.0];
        let v = derivative_tensor(&f, &[0.0, 0.0], &[(e1, 2)]).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn cubic_term_hessian_vanishes_at_origin() {
        let f = parse("-x1 + x2^3", &default_variables(2)).unwrap();
        let e2: &[f64] = &[0.0, 1.0];
        let v = derivative_tensor(&f, &[0.0, 0.0], &[(e2, 2)]).unwrap();
        assert_relative_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gradient_component() {
        let f = parse("-x1 + x2^3", &default_variables(2)).unwrap();
        let e1: &[f64] = &[1.0, 0.0];
        let v = derivative_tensor(&f, &[0.0, 0.0], &[(e1, 1)]).unwrap();
        assert_relative_eq!(v, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn tensor_is_symmetric_in_arguments() {
        let f = parse("x1^2*x2 + x2^3*x1 + sin(x1)", &default_variables(2)).unwrap();
        let a: &[f64] = &[0.3, -0.4];
        let b: &[f64] = &[1.0, 0.7];
        let base = [0.2, 0.1];
        let v1 = derivative_tensor(&f, &base, &[(a, 2), (b, 1)]).unwrap();
        let v2 = derivative_tensor(&f, &base, &[(b, 1), (a, 2)]).unwrap();
        assert_relative_eq!(v1, v2, epsilon = 1e-10);
    }

    #[test]
    fn order_cap_is_enforced() {
        let f = parse("x1^2", &default_variables(1)).unwrap();
        let e: &[f64] = &[1.0];
        assert_eq!(
            derivative_tensor(&f, &[0.0], &[(e, 13)]),
            Err(TaylorError::OrderTooLarge(13))
        );
    }

    #[test]
    fn stationarity_sums_frozen_values() {
        let vars = default_variables(2);
        let f = parse("-x1 + x2^3", &vars).unwrap();
        let h = vec![vec![0.0, 1.0]];
        assert_relative_eq!(
            sum_order_s(&f, &[0.0, 0.0], &h, 1).unwrap(),
            0.0,
            epsilon = 1e-14
        );

        let g = parse("x1^2", &vars).unwrap();
        let h = vec![vec![1.0, 0.0]];
        assert_relative_eq!(
            sum_order_s(&g, &[0.0, 0.0], &h, 1).unwrap(),
            0.0,
            epsilon = 1e-14
        );

        // coefficient of t^2 in f(t(0,1) + t^2(1,0)) with f = x2 is 0
        let f = parse("x2", &vars).unwrap();
        let h = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_relative_eq!(
            sum_order_s(&f, &[0.0, 0.0], &h, 2).unwrap(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn order_k_sum_frozen_values() {
        let vars = default_variables(2);
        let f = parse("-x1 + x2^3", &vars).unwrap();
        let h = vec![vec![0.0, 1.0]];
        let v = sum_order_k(&f, &[0.0, 0.0], &h, &[1.0, 0.0]).unwrap();
        assert_relative_eq!(v, -1.0, epsilon = 1e-12);

        let f = parse("x1^2 + x2^2", &vars).unwrap();
        let h = vec![vec![1.0, 0.0]];
        let v = sum_order_k(&f, &[0.0, 0.0], &h, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-12);

        let f = parse("3", &vars).unwrap();
        let v = sum_order_k(&f, &[0.5, 0.5], &h, &[0.3, 0.4]).unwrap();
        assert_relative_eq!(v, 0.0, epsilon = 1e-14);
    }
}
