//! Truncated multivariate Taylor arithmetic ("jets").
//!
//! A [`Jet`] of order `K` in `d` variables carries a value together with every
//! partial derivative of total degree at most `K`. Coefficients are stored as
//! raw partial derivatives, not Taylor coefficients: the entry for the
//! multi-index `(2, 0)` of `x0^2` is `2`, not `1`. Multiplication applies the
//! multivariate Leibniz rule, so every arithmetic result is exact up to the
//! truncation order.
//!
//! Multi-indices are ordered by total degree, which makes the coefficients of
//! an order `k` jet a prefix of the coefficients of an order `k + 1` jet. That
//! prefix property keeps truncation free.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Highest derivative order any jet can carry.
pub const MAX_ORDER: usize = 3;

/// Index tables shared by every jet of one dimension.
#[derive(Debug)]
pub struct Layout {
    dim: usize,
    indices: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `degree_end[k]` is the number of multi-indices of degree `<= k`.
    degree_end: [usize; MAX_ORDER + 1],
    /// `(out, a, b, weight)`, sorted by the degree of `out`.
    product: Vec<(u32, u32, u32, f64)>,
    product_end: [usize; MAX_ORDER + 1],
    /// `shift[i][alpha]` is the index of `alpha + e_i`, for `|alpha| < MAX_ORDER`.
    shift: Vec<Vec<usize>>,
    factorial_weight: Vec<f64>,
}

fn binomial(n: u8, k: u8) -> f64 {
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * f64::from(n - j) / f64::from(j + 1);
    }
    acc
}

impl Layout {
    fn build(dim: usize) -> Layout {
        let mut indices: Vec<Vec<u8>> = vec![vec![0; dim]];
        let mut degree_end = [0usize; MAX_ORDER + 1];
        degree_end[0] = 1;
        let mut frontier: Vec<Vec<u8>> = vec![vec![0; dim]];
        for deg in 1..=MAX_ORDER {
            // Monomials of degree `deg`, generated as `alpha + e_i` with `i` no
            // smaller than the last nonzero slot of `alpha` to avoid duplicates.
            let mut next = Vec::new();
            for alpha in &frontier {
                let last = alpha.iter().rposition(|&a| a > 0).unwrap_or(0);
                for i in last..dim {
                    let mut beta = alpha.clone();
                    beta[i] += 1;
                    next.push(beta);
                }
            }
            indices.extend(next.iter().cloned());
            degree_end[deg] = indices.len();
            frontier = next;
        }
        let lookup: HashMap<Vec<u8>, usize> = indices
            .iter()
            .enumerate()
            .map(|(k, alpha)| (alpha.clone(), k))
            .collect();

        let mut product = Vec::new();
        let mut product_end = [0usize; MAX_ORDER + 1];
        let mut deg_cursor = 0;
        for (out, alpha) in indices.iter().enumerate() {
            let deg: usize = alpha.iter().map(|&a| usize::from(a)).sum();
            while deg_cursor < deg {
                product_end[deg_cursor] = product.len();
                deg_cursor += 1;
            }
            // enumerate beta <= alpha
            let mut beta = vec![0u8; dim];
            loop {
                let gamma: Vec<u8> = alpha.iter().zip(&beta).map(|(a, b)| a - b).collect();
                let weight: f64 = alpha.iter().zip(&beta).map(|(&a, &b)| binomial(a, b)).product();
                product.push((out as u32, lookup[&beta] as u32, lookup[&gamma] as u32, weight));
                // odometer increment bounded by alpha
                let mut slot = 0;
                loop {
                    if slot == dim {
                        break;
                    }
                    if beta[slot] < alpha[slot] {
                        beta[slot] += 1;
                        break;
                    }
                    beta[slot] = 0;
                    slot += 1;
                }
                if slot == dim {
                    break;
                }
            }
        }
        while deg_cursor <= MAX_ORDER {
            product_end[deg_cursor] = product.len();
            deg_cursor += 1;
        }

        let shift = (0..dim)
            .map(|i| {
                indices[..degree_end[MAX_ORDER - 1]]
                    .iter()
                    .map(|alpha| {
                        let mut beta = alpha.clone();
                        beta[i] += 1;
                        lookup[&beta]
                    })
                    .collect()
            })
            .collect();

        let factorial_weight = indices
            .iter()
            .map(|alpha| {
                alpha
                    .iter()
                    .map(|&a| (1..=u32::from(a)).map(f64::from).product::<f64>())
                    .product::<f64>()
            })
            .collect();

        Layout {
            dim,
            indices,
            lookup,
            degree_end,
            product,
            product_end,
            shift,
            factorial_weight,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of coefficients of a jet of the given order.
    pub fn len(&self, order: usize) -> usize {
        self.degree_end[order]
    }

    pub fn multi_index(&self, k: usize) -> &[u8] {
        &self.indices[k]
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

/// Shared layout for jets in `dim` variables.
pub fn layout(dim: usize) -> Arc<Layout> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Layout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("jet layout cache poisoned");
    guard.entry(dim).or_insert_with(|| Arc::new(Layout::build(dim))).clone()
}

/// A truncated Taylor expansion; see the module docs for the coefficient convention.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(order={}, ", self.order)?;
        f.debug_list().entries(self.coeffs.iter()).finish()?;
        write!(f, ")")
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.layout.dim == other.layout.dim && self.order == other.order && self.coeffs == other.coeffs
    }
}

impl Jet {
    /// Constant jet. Orders above [`MAX_ORDER`] are clamped.
    pub fn constant(value: f64, dim: usize, order: usize) -> Jet {
        let layout = layout(dim);
        let order = order.min(MAX_ORDER);
        let mut coeffs = vec![0.0; layout.len(order)];
        coeffs[0] = value;
        Jet { layout, order, coeffs }
    }

    /// The coordinate function `x^var` expanded at `point`.
    ///
    /// Unlike [`jet_seed`], accepts order 0 (value only).
    pub fn variable(point: &[f64], var: usize, order: usize) -> Jet {
        let mut jet = Jet::constant(point[var], point.len(), order);
        if jet.order >= 1 {
            jet.coeffs[1 + var] = 1.0;
        }
        jet
    }

    /// All coordinate functions at `point`.
    pub fn variables(point: &[f64], order: usize) -> Vec<Jet> {
        (0..point.len()).map(|i| Jet::variable(point, i, order)).collect()
    }

    /// Constant with the same dimension and order as `self`.
    pub fn constant_like(&self, value: f64) -> Jet {
        Jet::constant(value, self.layout.dim, self.order)
    }

    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Jet {
        let layout = layout(dim);
        assert_eq!(coeffs.len(), layout.len(order), "coefficient count mismatch");
        Jet { layout, order, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    /// Raw partial derivative for a multi-index, or `None` above the order.
    pub fn partial(&self, alpha: &[u8]) -> Option<f64> {
        let k = self.layout.index_of(alpha)?;
        self.coeffs.get(k).copied()
    }

    /// First partial `d/dx^i`.
    pub fn d1(&self, i: usize) -> f64 {
        assert!(self.order >= 1, "jet of order 0 has no first derivatives");
        self.coeffs[1 + i]
    }

    /// Gradient (first partials).
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.d1(i)).collect()
    }

    /// Directional derivative at the expansion point: `sum_i dir[i] * d/dx^i`.
    pub fn directional(&self, dir: &[f64]) -> f64 {
        dir.iter().enumerate().map(|(i, &v)| v * self.d1(i)).sum()
    }

    /// The jet of `d/dx^i`, one order lower.
    pub fn d(&self, i: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order 0 jet");
        let order = self.order - 1;
        let n = self.layout.len(order);
        let shift = &self.layout.shift[i];
        let coeffs = (0..n).map(|k| self.coeffs[shift[k]]).collect();
        Jet {
            layout: self.layout.clone(),
            order,
            coeffs,
        }
    }

    /// Directional derivative as a jet: `sum_i dir[i] * d/dx^i`.
    pub fn d_along(&self, dir: &[f64]) -> Jet {
        let mut acc = Jet::constant(0.0, self.dim(), self.order - 1);
        for (i, &v) in dir.iter().enumerate() {
            if v != 0.0 {
                acc += &(self.d(i) * v);
            }
        }
        acc
    }

    /// Drop coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        Jet {
            layout: self.layout.clone(),
            order,
            coeffs: self.coeffs[..self.layout.len(order)].to_vec(),
        }
    }

    fn check_compat(&self, other: &Jet) {
        assert_eq!(self.layout.dim, other.layout.dim, "jet dimension mismatch");
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        self.check_compat(other);
        let order = self.order.min(other.order);
        let mut coeffs = vec![0.0; self.layout.len(order)];
        for &(out, a, b, w) in &self.layout.product[..self.layout.product_end[order]] {
            coeffs[out as usize] += w * self.coeffs[a as usize] * other.coeffs[b as usize];
        }
        Jet {
            layout: self.layout.clone(),
            order,
            coeffs,
        }
    }

    /// Compose with a univariate function given its derivatives
    /// `derivs[k] = f^(k)(self.value())` for `k = 0..=order`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = self.constant_like(derivs[0]);
        let mut power = self.constant_like(1.0);
        let mut factorial = 1.0;
        for (k, &dk) in derivs.iter().enumerate().take(self.order + 1).skip(1) {
            power = power.mul_jet(&h);
            factorial *= k as f64;
            if dk != 0.0 {
                out += &(&power * (dk / factorial));
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let r = 1.0 / a;
        self.compose(&[r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&[e, e, e, e])
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        self.compose(&[a.ln(), 1.0 / a, -1.0 / (a * a), 2.0 / (a * a * a)])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&[s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&[c, -s, -c, s])
    }

    pub fn sqrt(&self) -> Jet {
        let a = self.value();
        let s = a.sqrt();
        self.compose(&[s, 0.5 / s, -0.25 / (a * s), 0.375 / (a * a * s)])
    }

    pub fn tanh(&self) -> Jet {
        let t = self.value().tanh();
        let sech2 = 1.0 - t * t;
        self.compose(&[t, sech2, -2.0 * t * sech2, sech2 * (6.0 * t * t - 2.0)])
    }

    /// Integer power. Negative exponents require a nonzero value.
    pub fn powi(&self, n: i32) -> Jet {
        let a = self.value();
        let nf = f64::from(n);
        let derivs = [
            a.powi(n),
            nf * a.powi(n - 1),
            nf * (nf - 1.0) * a.powi(n - 2),
            nf * (nf - 1.0) * (nf - 2.0) * a.powi(n - 3),
        ];
        if n >= 0 {
            // exact repeated squaring keeps a = 0 well defined
            let mut result = self.constant_like(1.0);
            let mut base = self.clone();
            let mut e = n as u32;
            while e > 0 {
                if e & 1 == 1 {
                    result = result.mul_jet(&base);
                }
                base = base.mul_jet(&base);
                e >>= 1;
            }
            result
        } else {
            self.compose(&derivs)
        }
    }
}

/// Seed the coordinate function `x^var_index` at `point`.
pub fn jet_seed(point: &[f64], var_index: usize, order: usize) -> Result<Jet> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::Contract(format!("jet order {order} outside 1..={MAX_ORDER}")));
    }
    if var_index >= point.len() {
        return Err(Error::Contract(format!(
            "variable index {var_index} out of range for dimension {}",
            point.len()
        )));
    }
    Ok(Jet::variable(point, var_index, order))
}

/// Compose a multivariate Taylor polynomial with jets.
///
/// `partials[k]` is the raw partial of an outer function `F` for the `k`-th
/// multi-index of the `inputs.len()`-dimensional layout, taken at the values
/// of `inputs`. Returns the jet of `F(inputs)`.
pub fn compose_multivariate(partials: &[f64], inputs: &[Jet]) -> Jet {
    let outer = layout(inputs.len());
    let probe = &inputs[0];
    let outer_order = (0..=MAX_ORDER)
        .rev()
        .find(|&k| outer.len(k) <= partials.len())
        .unwrap_or(0);
    let order = inputs.iter().map(Jet::order).min().unwrap_or(0).min(outer_order);
    let shifted: Vec<Jet> = inputs
        .iter()
        .map(|x| {
            let mut h = x.truncate(order);
            h.coeffs[0] = 0.0;
            h
        })
        .collect();
    // powers[i][p] = h_i^p
    let powers: Vec<Vec<Jet>> = shifted
        .iter()
        .map(|h| {
            let mut list = vec![Jet::constant(1.0, probe.dim(), order)];
            for p in 1..=outer_order {
                let next = list[p - 1].mul_jet(h);
                list.push(next);
            }
            list
        })
        .collect();
    let mut out = Jet::constant(0.0, probe.dim(), order);
    for k in 0..outer.len(outer_order) {
        let c = partials[k];
        if c == 0.0 {
            continue;
        }
        let alpha = outer.multi_index(k);
        let mut term = Jet::constant(c / outer.factorial_weight[k], probe.dim(), order);
        for (i, &a) in alpha.iter().enumerate() {
            if a > 0 {
                term = term.mul_jet(&powers[i][usize::from(a)]);
            }
        }
        out += &term;
    }
    out
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

fn add_jets(a: &Jet, b: &Jet) -> Jet {
    a.check_compat(b);
    let order = a.order.min(b.order);
    let n = a.layout.len(order);
    let coeffs = a.coeffs[..n].iter().zip(&b.coeffs[..n]).map(|(x, y)| x + y).collect();
    Jet {
        layout: a.layout.clone(),
        order,
        coeffs,
    }
}

fn sub_jets(a: &Jet, b: &Jet) -> Jet {
    a.check_compat(b);
    let order = a.order.min(b.order);
    let n = a.layout.len(order);
    let coeffs = a.coeffs[..n].iter().zip(&b.coeffs[..n]).map(|(x, y)| x - y).collect();
    Jet {
        layout: a.layout.clone(),
        order,
        coeffs,
    }
}

forward_binop!(Add, add, add_jets);
forward_binop!(Sub, sub, sub_jets);
forward_binop!(Mul, mul, |a, b| a.mul_jet(b));
forward_binop!(Div, div, |a, b| a.mul_jet(&b.recip()));

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.check_compat(rhs);
        if rhs.order < self.order {
            self.order = rhs.order;
            self.coeffs.truncate(self.layout.len(rhs.order));
        }
        for (x, y) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *x += y;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.check_compat(rhs);
        if rhs.order < self.order {
            self.order = rhs.order;
            self.coeffs.truncate(self.layout.len(rhs.order));
        }
        for (x, y) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *x -= y;
        }
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        for x in &mut self.coeffs {
            *x *= rhs;
        }
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out *= rhs;
        out
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        self *= rhs;
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.clone() + rhs
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self *= -1.0;
        self
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.clone() * -1.0
    }
}
