//! Central finite differences, used as an independent derivative oracle.

use crate::error::Result;
use crate::jet::{layout, Jet, MAX_ORDER};

/// Base step for a derivative of total degree `k`, scaled by `max(1, |x|)`.
///
/// Balances truncation error `O(h^4)` against rounding `O(eps / h^k)`.
pub fn step_for_degree(k: usize) -> f64 {
    match k {
        0 | 1 => 1e-3,
        2 => 3e-3,
        _ => 6e-3,
    }
}

// Fourth-order central stencils: (offset in units of h, weight) and the
// power of h that divides the sum.
fn stencil(order: u8) -> (&'static [(f64, f64)], i32) {
    const D1: [(f64, f64); 4] = [
        (2.0, -1.0 / 12.0),
        (1.0, 2.0 / 3.0),
        (-1.0, -2.0 / 3.0),
        (-2.0, 1.0 / 12.0),
    ];
    const D2: [(f64, f64); 5] = [
        (2.0, -1.0 / 12.0),
        (1.0, 4.0 / 3.0),
        (0.0, -5.0 / 2.0),
        (-1.0, 4.0 / 3.0),
        (-2.0, -1.0 / 12.0),
    ];
    const D3: [(f64, f64); 6] = [
        (3.0, -1.0 / 8.0),
        (2.0, 1.0),
        (1.0, -13.0 / 8.0),
        (-1.0, 13.0 / 8.0),
        (-2.0, -1.0),
        (-3.0, 1.0 / 8.0),
    ];
    match order {
        1 => (&D1, 1),
        2 => (&D2, 2),
        3 => (&D3, 3),
        _ => unreachable!("stencil order above 3"),
    }
}

/// Raw partial derivatives of `f` at `point` for every multi-index of degree
/// `<= order`, in the layout order used by [`Jet`].
pub fn partials<F>(f: F, point: &[f64], order: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let order = order.min(MAX_ORDER);
    let lay = layout(point.len());
    let count = lay.len(order);
    let mut out = Vec::with_capacity(count);
    out.push(f(point)?);
    let mut probe = point.to_vec();
    for k in 1..count {
        let alpha = lay.multi_index(k);
        let degree: usize = alpha.iter().map(|&a| usize::from(a)).sum();
        let base = step_for_degree(degree);
        // tensor product of one-dimensional stencils over the active axes
        let axes: Vec<(usize, u8, f64)> = alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, &a)| (i, a, base * point[i].abs().max(1.0)))
            .collect();
        let mut acc = 0.0;
        let mut scale = 1.0;
        for &(_, a, h) in &axes {
            scale *= h.powi(stencil(a).1);
        }
        let mut idx = vec![0usize; axes.len()];
        'outer: loop {
            let mut weight = 1.0;
            probe.copy_from_slice(point);
            for (slot, &(axis, a, h)) in axes.iter().enumerate() {
                let (offset, w) = stencil(a).0[idx[slot]];
                weight *= w;
                probe[axis] = point[axis] + offset * h;
            }
            if weight != 0.0 {
                acc += weight * f(&probe)?;
            }
            for slot in 0..axes.len() {
                idx[slot] += 1;
                if idx[slot] < stencil(axes[slot].1).0.len() {
                    continue 'outer;
                }
                idx[slot] = 0;
            }
            break;
        }
        out.push(acc / scale);
    }
    Ok(out)
}

/// Finite-difference jet of `f` composed with the input jets.
///
/// The outer partials are estimated at the values of `inputs`, then pushed
/// through the inputs exactly, so downstream jet algebra stays exact.
pub fn jet_from_values<F>(f: F, inputs: &[Jet]) -> Result<Jet>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let point: Vec<f64> = inputs.iter().map(Jet::value).collect();
    let order = inputs.iter().map(Jet::order).min().unwrap_or(0);
    let p = partials(f, &point, order)?;
    Ok(crate::field::reembed_coeffs(&p, order, inputs))
}
