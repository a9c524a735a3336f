//! Truncated univariate Taylor (jet) arithmetic and evaluation of an
//! expression along a polynomial arc.
//!
//! A `Jet` of order K stores coefficients (c0, ..., cK) of
//! c0 + c1 t + ... + cK t^K + o(t^K). One pass of [`eval_on_arc`] yields all
//! Taylor coefficients of f along the arc, which is everything the
//! optimality conditions consume.

use crate::expr::{DomainError, Expr, Node};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    /// Jet of the constant function `value`.
    pub fn constant(value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Jet { coeffs }
    }

    /// Jet of `t ↦ value + t`.
    pub fn variable(value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Jet { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least the constant term");
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs[i]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn add(&self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a - b)
    }

    pub fn neg(&self) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    fn zip(&self, o: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(self.order(), o.order(), "jet orders must match");
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, o: &Jet) -> Jet {
        assert_eq!(self.order(), o.order(), "jet orders must match");
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        for k in 0..n {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.coeffs[j] * o.coeffs[k - j];
            }
            out[k] = acc;
        }
        Jet { coeffs: out }
    }

    /// Series division; the divisor must have a nonzero constant term.
    pub fn div(&self, o: &Jet) -> Result<Jet, DomainError> {
        assert_eq!(self.order(), o.order(), "jet orders must match");
        if o.coeffs[0] == 0.0 {
            return Err(DomainError::DivisionByZero);
        }
        let n = self.coeffs.len();
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 0..k {
                acc -= q[j] * o.coeffs[k - j];
            }
            q[k] = acc / o.coeffs[0];
        }
        Ok(Jet { coeffs: q })
    }

    /// Integer power by square-and-multiply on truncated products.
    pub fn pow_int(&self, e: u32) -> Jet {
        let mut result = Jet::constant(1.0, self.order());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Joint sine/cosine recurrence.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.coeffs.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.coeffs[0].sin();
        c[0] = self.coeffs[0].cos();
        for k in 1..n {
            let mut sa = 0.0;
            let mut ca = 0.0;
            for j in 1..=k {
                let w = j as f64 * self.coeffs[j];
                sa += w * c[k - j];
                ca += w * s[k - j];
            }
            s[k] = sa / k as f64;
            c[k] = -ca / k as f64;
        }
        (Jet { coeffs: s }, Jet { coeffs: c })
    }

    pub fn sin(&self) -> Jet {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Jet {
        self.sin_cos().1
    }

    pub fn exp(&self) -> Jet {
        let n = self.coeffs.len();
        let mut b = vec![0.0; n];
        b[0] = self.coeffs[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.coeffs[j] * b[k - j];
            }
            b[k] = acc / k as f64;
        }
        Jet { coeffs: b }
    }
}

/// Optional arc tail `scale · t^degree · vector`. Membership arcs use degree
/// k-1 with the free scale, optimality arcs degree k with scale 1.
#[derive(Debug, Clone)]
pub struct ArcTail {
    pub vector: Vec<f64>,
    pub degree: usize,
    pub scale: f64,
}

/// Polynomial arc `base + t h1 + t² h2 + ... + t^(k-1) h_(k-1) [+ tail]`.
#[derive(Debug, Clone)]
pub struct Arc {
    base: Vec<f64>,
    directions: Vec<Vec<f64>>,
    tail: Option<ArcTail>,
}

impl Arc {
    pub fn new(base: Vec<f64>, directions: Vec<Vec<f64>>) -> Self {
        let n = base.len();
        assert!(n > 0, "arc dimension must be positive");
        for d in &directions {
            assert_eq!(d.len(), n, "direction dimension mismatch");
        }
        Arc {
            base,
            directions,
            tail: None,
        }
    }

    pub fn with_tail(base: Vec<f64>, directions: Vec<Vec<f64>>, tail: ArcTail) -> Self {
        let mut arc = Arc::new(base, directions);
        assert_eq!(tail.vector.len(), arc.dim(), "tail dimension mismatch");
        let k = arc.order();
        assert!(
            tail.degree == k || tail.degree + 1 == k,
            "tail degree must be k-1 or k"
        );
        assert!(tail.scale > 0.0, "tail scale must be positive");
        arc.tail = Some(tail);
        arc
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Arc order k = number of directions + 1.
    pub fn order(&self) -> usize {
        self.directions.len() + 1
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn highest_degree(&self) -> usize {
        let d = self.directions.len();
        match &self.tail {
            Some(t) => d.max(t.degree),
            None => d.max(0),
        }
    }

    pub fn point_at(&self, t: f64) -> Vec<f64> {
        let mut p = self.base.clone();
        let mut tp = 1.0;
        for h in &self.directions {
            tp *= t;
            for (pi, hi) in p.iter_mut().zip(h) {
                *pi += tp * hi;
            }
        }
        if let Some(tail) = &self.tail {
            let td = t.powi(tail.degree as i32) * tail.scale;
            for (pi, wi) in p.iter_mut().zip(&tail.vector) {
                *pi += td * wi;
            }
        }
        p
    }

    /// Jet of coordinate `i` of the arc, truncated at `order`.
    fn coordinate_jet(&self, i: usize, order: usize) -> Jet {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = self.base[i];
        for (deg, h) in self.directions.iter().enumerate() {
            let deg = deg + 1;
            if deg <= order {
                coeffs[deg] += h[i];
            }
        }
        if let Some(tail) = &self.tail {
            if tail.degree <= order {
                coeffs[tail.degree] += tail.scale * tail.vector[i];
            }
        }
        Jet { coeffs }
    }
}

/// Order-`order` jet of `t ↦ f(arc(t))`. Exact up to rounding for
/// polynomial `f`.
pub fn eval_on_arc(f: &Expr, arc: &Arc, order: usize) -> Result<Jet, DomainError> {
    assert_eq!(arc.dim(), f.arity(), "arc dimension must equal expr arity");
    assert!(
        order >= arc.highest_degree(),
        "jet order must cover the arc's highest term"
    );
    let vars: Vec<Jet> = (0..arc.dim()).map(|i| arc.coordinate_jet(i, order)).collect();
    let out = eval_node_jet(f.root(), &vars, order)?;
    if out.is_finite() {
        Ok(out)
    } else {
        Err(DomainError::NonFinite)
    }
}

/// Jet of `t ↦ f(x + t v)`, the straight-line special case.
pub fn directional_jet(
    f: &Expr,
    x: &[f64],
    v: &[f64],
    order: usize,
) -> Result<Jet, DomainError> {
    let arc = Arc::new(x.to_vec(), vec![v.to_vec()]);
    eval_on_arc(f, &arc, order)
}

/// Gradient assembled from n first-order coordinate passes.
pub fn gradient(f: &Expr, x: &[f64]) -> Result<Vec<f64>, DomainError> {
    let n = f.arity();
    let mut g = vec![0.0; n];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        g[i] = directional_jet(f, x, &e, 1)?.coeff(1);
    }
    Ok(g)
}

fn eval_node_jet(n: &Node, vars: &[Jet], order: usize) -> Result<Jet, DomainError> {
    Ok(match n {
        Node::Const(c) => Jet::constant(*c, order),
        Node::Var(i) => vars[*i].clone(),
        Node::Neg(a) => eval_node_jet(a, vars, order)?.neg(),
        Node::Add(a, b) => eval_node_jet(a, vars, order)?.add(&eval_node_jet(b, vars, order)?),
        Node::Sub(a, b) => eval_node_jet(a, vars, order)?.sub(&eval_node_jet(b, vars, order)?),
        Node::Mul(a, b) => eval_node_jet(a, vars, order)?.mul(&eval_node_jet(b, vars, order)?),
        Node::Div(a, b) => {
            eval_node_jet(a, vars, order)?.div(&eval_node_jet(b, vars, order)?)?
        }
        Node::Pow(a, e) => eval_node_jet(a, vars, order)?.pow_int(*e),
        Node::Sin(a) => eval_node_jet(a, vars, order)?.sin(),
        Node::Cos(a) => eval_node_jet(a, vars, order)?.cos(),
        Node::Exp(a) => eval_node_jet(a, vars, order)?.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{default_variables, parse};
    use approx::assert_relative_eq;

    #[test]
    fn mul_square_of_one_plus_t() {
        let a = Jet::from_coeffs(vec![1.0, 1.0, 0.0]);
        assert_eq!(a.mul(&a).coeffs(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn pow_int_cube_of_t() {
        let t = Jet::from_coeffs(vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(t.pow_int(3).coeffs(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(t.pow_int(0).coeffs(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn exp_of_t_first_order() {
        let t = Jet::from_coeffs(vec![0.0, 1.0]);
        assert_eq!(t.exp().coeffs(), &[1.0, 1.0]);
    }

    #[test]
    fn div_needs_nonzero_constant_term() {
        let one = Jet::constant(1.0, 2);
        let t = Jet::from_coeffs(vec![0.0, 1.0, 0.0]);
        assert_eq!(one.div(&t), Err(DomainError::DivisionByZero));
        // geometric series 1/(1-t) = 1 + t + t^2
        let d = Jet::from_coeffs(vec![1.0, -1.0, 0.0]);
        assert_eq!(one.div(&d).unwrap().coeffs(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn sin_cos_recurrence_matches_series() {
        let t = Jet::from_coeffs(vec![0.0, 1.0, 0.0, 0.0]);
        let (s, c) = t.sin_cos();
        assert_relative_eq!(s.coeff(1), 1.0);
        assert_relative_eq!(s.coeff(3), -1.0 / 6.0);
        assert_relative_eq!(c.coeff(0), 1.0);
        assert_relative_eq!(c.coeff(2), -0.5);
    }

    #[test]
    fn arc_jet_squared_coordinate() {
        let f = parse("x1^2", &default_variables(2)).unwrap();
        let arc = Arc::new(vec![0.0, 0.0], vec![vec![1.0, 0.0]]);
        let jet = eval_on_arc(&f, &arc, 2).unwrap();
        assert_eq!(jet.coeffs(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn arc_jet_with_tail() {
        // f(t^2, t) = -t^2 + t^3
        let f = parse("-x1 + x2^3", &default_variables(2)).unwrap();
        let arc = Arc::with_tail(
            vec![0.0, 0.0],
            vec![vec![0.0, 1.0]],
            ArcTail {
                vector: vec![1.0, 0.0],
                degree: 2,
                scale: 1.0,
            },
        );
        let jet = eval_on_arc(&f, &arc, 3).unwrap();
        assert_eq!(jet.coeffs(), &[0.0, 0.0, -1.0, 1.0]);
    }

    #[test]
    fn arc_jet_first_order_vanishes_on_tangent_ray() {
        let f = parse("-x1 + x2^3", &default_variables(2)).unwrap();
        let arc = Arc::new(vec![0.0, 0.0], vec![vec![0.0, 1.0]]);
        let jet = eval_on_arc(&f, &arc, 1).unwrap();
        assert_eq!(jet.coeffs(), &[0.0, 0.0]);
    }

    #[test]
    fn gradient_matches_hand_values() {
        let f = parse("x1*x2 + exp(x1)", &default_variables(2)).unwrap();
        let g = gradient(&f, &[0.5, -2.0]).unwrap();
        assert_relative_eq!(g[0], -2.0 + 0.5f64.exp(), epsilon = 1e-14);
        assert_relative_eq!(g[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn point_at_includes_tail() {
        let arc = Arc::with_tail(
            vec![1.0, 0.0],
            vec![vec![0.0, 1.0]],
            ArcTail {
                vector: vec![1.0, 1.0],
                degree: 2,
                scale: 0.5,
            },
        );
        let p = arc.point_at(0.1);
        assert_relative_eq!(p[0], 1.0 + 0.5 * 0.01);
        assert_relative_eq!(p[1], 0.1 + 0.5 * 0.01);
    }

    #[test]
    fn linearity_of_arc_jets() {
        let vars = default_variables(2);
        let f = parse("x1^2 - x2^3 + 2*x1*x2", &vars).unwrap();
        let g = parse("x2^2 + x1", &vars).unwrap();
        let sum = parse("x1^2 - x2^3 + 2*x1*x2 + x2^2 + x1", &vars).unwrap();
        let arc = Arc::new(vec![0.3, -0.7], vec![vec![1.0, 0.5], vec![-0.25, 2.0]]);
        let jf = eval_on_arc(&f, &arc, 4).unwrap();
        let jg = eval_on_arc(&g, &arc, 4).unwrap();
        let js = eval_on_arc(&sum, &arc, 4).unwrap();
        for i in 0..=4 {
            assert_relative_eq!(jf.coeff(i) + jg.coeff(i), js.coeff(i), max_relative = 1e-12);
        }
    }
}
