//! Sampled checks for submersions with a horizontal distribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{add, bilinear, connection_values, norm_inf, scale, sub, trilinear, values, Frame, SubmersionSetup};
use crate::check::{CheckResult, Residuals, Status, Sweep};
use crate::error::Result;
use crate::field::Christoffel;
use crate::geometry::{statistical_residuals, DualConnection, LeviCivita};
use crate::jet::Jet;
use crate::linalg::Matrix;

fn pts(samples: &[Vec<f64>]) -> impl Iterator<Item = &[f64]> {
    samples.iter().map(Vec::as_slice)
}

fn unit(m: usize, a: usize) -> Vec<f64> {
    (0..m).map(|i| if i == a { 1.0 } else { 0.0 }).collect()
}

fn dual_values(setup: &SubmersionSetup, frame: &Frame) -> Result<(Christoffel<f64>, Christoffel<f64>)> {
    let total = DualConnection::new(setup.total.connection.clone(), setup.total.metric.clone());
    let base = DualConnection::new(setup.base.connection.clone(), setup.base.metric.clone());
    Ok((
        connection_values(&total, &frame.point)?,
        connection_values(&base, &frame.base_point)?,
    ))
}

/// `|g_M(X̃_a, X̃_b) - s g_B(e_a, e_b)|` over base coordinate pairs.
fn lift_metric_residual(frame: &Frame, s: f64) -> f64 {
    let m = frame.m();
    let g = frame.g();
    let lifts = frame.horizontal_basis();
    let mut worst = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            let r = bilinear(&g, &lifts[a], &lifts[b]) - s * frame.base_metric.get(a, b);
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// Determinant of the total metric restricted to the vertical basis.
fn fiber_metric_det(frame: &Frame) -> f64 {
    let v = frame.vertical_basis();
    if v.is_empty() {
        return 1.0;
    }
    let g = frame.g();
    Matrix::from_fn(v.len(), v.len(), |i, j| bilinear(&g, &v[i], &v[j])).determinant_value()
}

pub fn check_semi_riemannian(setup: &SubmersionSetup, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let mut degenerate = false;
    let sweep = Sweep::run(pts(samples), |p, r| {
        let frame = setup.frame(p)?;
        r.record("horizontal_isometry", lift_metric_residual(&frame, 1.0));
        if fiber_metric_det(&frame).abs() <= 1e-12 * frame.g().norm_inf().max(1.0) {
            degenerate = true;
        }
        Ok(())
    })?;
    let pass = sweep.max() <= tol && !degenerate;
    Ok(sweep
        .finish_with(
            "semi_riemannian",
            "submersion preserving lengths of horizontal vectors",
            tol,
            Status::from_pass(pass),
        )
        .detail("fiber_metric_nondegenerate", !degenerate))
}

pub fn check_conformal_metric(setup: &SubmersionSetup, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let sweep = Sweep::run(pts(samples), |p, r| {
        let frame = setup.frame(p)?;
        r.record(
            "horizontal_conformality",
            lift_metric_residual(&frame, frame.conformal_scale()),
        );
        Ok(())
    })?;
    Ok(sweep
        .finish("conformal_metric", "conformal submersion on horizontal vectors", tol)
        .detail("has_conformal_factor", setup.phi.is_some()))
}

/// `∇_{X̃_a} X̃_b` at the frame point for connection values `gamma`.
fn nabla_lifts(frame: &Frame, gamma: &Christoffel<f64>, a: usize, b: usize) -> Vec<f64> {
    let xa = values(&frame.lift_field(a));
    Frame::covariant(gamma, &xa, &frame.lift_field(b))
}

/// Conformal defect `[a][b][c]` for the given total and base connection values.
pub fn conformal_defect_with(frame: &Frame, gamma: &Christoffel<f64>, base_gamma: &Christoffel<f64>) -> Vec<f64> {
    let m = frame.m();
    let gb = &frame.base_metric;
    let lifts = frame.horizontal_basis();
    let dphi: Vec<f64> = lifts.iter().map(|l| frame.dphi(l)).collect();
    let mut out = Vec::with_capacity(m * m * m);
    for a in 0..m {
        for b in 0..m {
            let pushed = frame.push(&nabla_lifts(frame, gamma, a, b));
            let star: Vec<f64> = (0..m).map(|k| *base_gamma.get(k, a, b)).collect();
            for c in 0..m {
                let ec = unit(m, c);
                let d = frame.base_dot(&pushed, &ec) - frame.base_dot(&star, &ec) + dphi[c] * gb.get(a, b)
                    - dphi[a] * gb.get(b, c)
                    - dphi[b] * gb.get(c, a);
                out.push(d);
            }
        }
    }
    out
}

pub fn conformal_defect(frame: &Frame) -> Vec<f64> {
    conformal_defect_with(frame, &frame.gamma, &frame.base_gamma)
}

pub fn check_conformal_defect(setup: &SubmersionSetup, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let sweep = Sweep::run(pts(samples), |p, r| {
        let frame = setup.frame(p)?;
        r.record_all("defect", conformal_defect(&frame));
        Ok(())
    })?;
    Ok(sweep.finish(
        "conformal_defect",
        "conformal submersion with horizontal distribution",
        tol,
    ))
}

/// `max |P_H ∇_{X̃_a} X̃_b - lift(∇*_a e_b)|`.
pub fn affine_residual(frame: &Frame) -> f64 {
    let m = frame.m();
    let mut worst = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            let h = frame.horizontal(&nabla_lifts(frame, &frame.gamma, a, b));
            let star: Vec<f64> = (0..m).map(|k| *frame.base_gamma.get(k, a, b)).collect();
            worst = worst.max(norm_inf(&sub(&h, &frame.lift_vector(&star))));
        }
    }
    worst
}

pub fn check_affine_hd(setup: &SubmersionSetup, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let sweep = Sweep::run(pts(samples), |p, r| {
        let frame = setup.frame(p)?;
        r.record("horizontal_part", affine_residual(&frame));
        // the g_B-lowered version equals the conformal defect when φ is constant
        let lowered = conformal_defect_with(&frame, &frame.gamma, &frame.base_gamma);
        if setup.phi.is_none() {
            r.record_all("lowered", lowered);
        }
        Ok(())
    })?;
    Ok(sweep.finish("affine_hd", "affine submersion with horizontal distribution", tol))
}

/// Induced connection `∇'^c_ab = (π_* ∇_{X̃_a} X̃_b)^c` at a total point.
pub fn induced_connection(frame: &Frame) -> Christoffel<f64> {
    let m = frame.m();
    let pushed: Vec<Vec<f64>> = (0..m * m)
        .map(|ab| frame.push(&nabla_lifts(frame, &frame.gamma, ab / m, ab % m)))
        .collect();
    Christoffel::from_fn(m, |c, a, b| pushed[a * m + b][c])
}

/// Induced metric `g̃_ab = g_M(X̃_a, X̃_b)` at a total point.
pub fn induced_metric(frame: &Frame) -> Matrix<f64> {
    let lifts = frame.horizontal_basis();
    let g = frame.g();
    Matrix::from_fn(frame.m(), frame.m(), |a, b| bilinear(&g, &lifts[a], &lifts[b]))
}

/// Base samples: the projections of every fourth sample, rounded up.
pub fn fiber_anchor_count(samples: usize) -> usize {
    samples.div_ceil(4)
}

pub fn check_projectable(setup: &SubmersionSetup, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let name = "projectable";
    let reference = "projectability of the horizontal covariant derivative";
    let anchors = &samples[..fiber_anchor_count(samples.len()).min(samples.len())];
    if setup.m() == setup.n() {
        let sweep = Sweep::run(pts(anchors), |p, r| {
            setup.frame(p)?;
            r.record("spread", 0.0);
            Ok(())
        })?;
        return Ok(sweep.finish(name, reference, tol).detail("singleton_fibers", true));
    }
    let mut thin = 0usize;
    let sweep = Sweep::run(pts(anchors), |p, r| {
        let fiber = setup.fiber_points(p, &[0.2, 0.5, 0.8])?;
        if fiber.len() < 2 {
            thin += 1;
            return Ok(());
        }
        let mut pushed: Vec<Vec<f64>> = Vec::new();
        for q in &fiber {
            let frame = setup.frame(q)?;
            let ind = induced_connection(&frame);
            pushed.push(ind.data().to_vec());
        }
        let mut spread = 0.0f64;
        for w in pushed.windows(2) {
            spread = spread.max(norm_inf(&sub(&w[0], &w[1])));
        }
        r.record("spread", spread);
        Ok(())
    })?;
    let status = if sweep.evaluated() == 0 || thin * 10 > anchors.len() {
        Status::Inconclusive
    } else {
        Status::from_pass(sweep.max() <= tol)
    };
    Ok(sweep
        .finish_with(name, reference, tol, status)
        .detail("thin_fibers", thin as f64))
}

/// Residuals of the induced structure on the base at one total point:
/// `(torsion, cubic asymmetry, proof identity)`.
fn induced_statistical_residuals(setup: &SubmersionSetup, frame: &Frame) -> Result<(f64, f64, f64)> {
    let m = frame.m();
    let ind = induced_connection(frame);
    let gt = induced_metric(frame);
    let lifts: Vec<Vec<Jet>> = (0..m).map(|a| frame.lift_field(a)).collect();
    let lift_vals: Vec<Vec<f64>> = lifts.iter().map(|l| values(l)).collect();
    // g̃_bc as a function on the total space, differentiated along X̃_a
    let gfun = |b: usize, c: usize| -> Jet {
        let gl: Vec<Jet> = Frame::apply(&frame.metric, &lifts[c]);
        let mut acc = gl[0].constant_like(0.0);
        for (k, gk) in gl.iter().enumerate() {
            acc += &(lifts[b][k].clone() * gk.clone());
        }
        acc
    };
    let c_total = frame.cubic_form(setup)?;
    let mut tor = 0.0f64;
    let mut cubic = vec![0.0; m * m * m];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                tor = tor.max((ind.get(c, a, b) - ind.get(c, b, a)).abs());
                let mut v = gfun(b, c).directional(&lift_vals[a]);
                for d in 0..m {
                    v -= ind.get(d, a, b) * gt.get(d, c) + gt.get(b, d) * ind.get(d, a, c);
                }
                cubic[(a * m + b) * m + c] = v;
            }
        }
    }
    let mut asym = 0.0f64;
    let mut ident = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                asym = asym.max((cubic[(a * m + b) * m + c] - cubic[(b * m + a) * m + c]).abs());
                let total = trilinear(&c_total, &lift_vals[a], &lift_vals[b], &lift_vals[c]);
                ident = ident.max((cubic[(a * m + b) * m + c] - total).abs());
            }
        }
    }
    Ok((tor, asym, ident))
}

pub fn check_induced_statistical(setup: &SubmersionSetup, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let name = "induced_statistical";
    let reference = "induced statistical structure on the base";
    let premise = crate::geometry::check_is_statistical(
        setup.total.connection.as_ref(),
        setup.total.metric.as_ref(),
        samples,
        tol,
    )?;
    let sweep = Sweep::run(pts(samples), |p, r| {
        let frame = setup.frame(p)?;
        let (tor, asym, ident) = induced_statistical_residuals(setup, &frame)?;
        r.record("induced_torsion", tor);
        r.record("induced_cubic_asymmetry", asym);
        r.record("cubic_form_identity", ident);
        Ok(())
    })?;
    let status = if premise.passed() {
        Status::from_pass(sweep.max() <= tol)
    } else {
        Status::PremiseFailed
    };
    Ok(sweep
        .finish_with(name, reference, tol, status)
        .detail("premise_total_statistical", premise.passed())
        .detail("premise_residual", premise.max_residual)
        .detail("orthogonal_rule", setup.horizontal.is_metric_orthogonal()))
}

pub fn check_gauss_weingarten(setup: &SubmersionSetup, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let sweep = Sweep::run(pts(samples), |p, r| {
        let frame = setup.frame(p)?;
        let (m, nv) = (frame.m(), frame.n() - frame.m());
        let vf: Vec<Vec<Jet>> = (0..nv).map(|f| frame.vertical_field(f)).collect();
        let hf: Vec<Vec<Jet>> = (0..m).map(|a| frame.lift_field(a)).collect();
        let mut vals = [0.0f64; 4];
        let mut update = |slot: usize, v: Vec<f64>| vals[slot] = vals[slot].max(norm_inf(&v));
        for u in &vf {
            let uv = values(u);
            for w in &vf {
                // ∇_U W = T_U W + ∇̂_U W
                let full = frame.nabla(&uv, w);
                let t = frame.t_tensor(&uv, &values(w));
                update(0, sub(&full, &add(&t, &frame.vertical_part(&full))));
            }
            for x in &hf {
                // ∇_U X = H ∇_U X + T_U X
                let full = frame.nabla(&uv, x);
                let t = frame.t_tensor(&uv, &values(x));
                update(1, sub(&full, &add(&frame.horizontal(&full), &t)));
            }
        }
        for x in &hf {
            let xv = values(x);
            for w in &vf {
                // ∇_X V = V ∇_X V + A_X V
                let full = frame.nabla(&xv, w);
                let a = frame.a_tensor(&xv, &values(w));
                update(2, sub(&full, &add(&frame.vertical_part(&full), &a)));
            }
            for y in &hf {
                // ∇_X Y = H ∇_X Y + A_X Y
                let full = frame.nabla(&xv, y);
                let a = frame.a_tensor(&xv, &values(y));
                update(3, sub(&full, &add(&frame.horizontal(&full), &a)));
            }
        }
        r.record("vertical_vertical", vals[0]);
        r.record("vertical_horizontal", vals[1]);
        r.record("horizontal_vertical", vals[2]);
        r.record("horizontal_horizontal", vals[3]);
        Ok(())
    })?;
    Ok(sweep.finish("gauss_weingarten", "decomposition of covariant derivatives", tol))
}

/// Random `n x n` matrix with entries in `[-1, 1]`.
fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> Matrix<f64> {
    Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn check_tensoriality(setup: &SubmersionSetup, samples: &[Vec<f64>], tol: f64, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e45);
    let sweep = Sweep::run(pts(samples), |p, r| {
        let frame = setup.frame(p)?;
        let n = frame.n();
        let e: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = random_matrix(n, &mut rng);
        let bent = frame.affine_field(&f, &b);
        let t0 = frame.t_tensor(&e, &f);
        let t1 = frame.t_tensor_with(&frame.gamma, &e, &bent);
        let a0 = frame.a_tensor(&e, &f);
        let a1 = frame.a_tensor_with(&frame.gamma, &e, &bent);
        r.record("t_extension", norm_inf(&sub(&t0, &t1)));
        r.record("a_extension", norm_inf(&sub(&a0, &a1)));
        // T_E = T_{V E} and A_E = A_{H E}
        r.record(
            "t_vertical_slot",
            norm_inf(&sub(&t0, &frame.t_tensor(&frame.vertical_part(&e), &f))),
        );
        r.record(
            "a_horizontal_slot",
            norm_inf(&sub(&a0, &frame.a_tensor(&frame.horizontal(&e), &f))),
        );
        Ok(())
    })?;
    Ok(sweep.finish("tensoriality", "fundamental tensors are tensorial", tol))
}

/// `S_E F = ∇_E F - ∇̄_E F`, computed from fields.
pub fn s_tensor(frame: &Frame, dual: &Christoffel<f64>, e: &[f64], f_field: &[Jet]) -> Vec<f64> {
    sub(&frame.nabla(e, f_field), &Frame::covariant(dual, e, f_field))
}

pub fn check_difference_tensor(
    setup: &SubmersionSetup,
    samples: &[Vec<f64>],
    tol: f64,
    seed: u64,
) -> Result<CheckResult> {
    let total = &setup.total;
    let statistical = crate::geometry::is_statistical(total.connection.as_ref(), total.metric.as_ref(), samples, tol)?;
    let lc = LeviCivita::new(total.metric.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5d1f);
    let sweep = Sweep::run(pts(samples), |p, r| {
        let frame = setup.frame(p)?;
        let (dual, _) = dual_values(setup, &frame)?;
        let n = frame.n();
        let e: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = random_matrix(n, &mut rng);
        let s = s_tensor(&frame, &dual, &e, &frame.affine_field(&f, &b));
        let coeffs: Vec<f64> = frame.gamma.data().iter().zip(dual.data()).map(|(a, b)| a - b).collect();
        let diff = Christoffel::from_fn(n, |k, i, j| coeffs[(k * n + i) * n + j]);
        r.record("field_vs_coefficients", norm_inf(&sub(&s, &diff.contract(&e, &f))));
        if statistical {
            let l = connection_values(&lc, p)?;
            let twice = scale(&sub(&frame.gamma.contract(&e, &f), &l.contract(&e, &f)), 2.0);
            r.record("twice_levi_civita_offset", norm_inf(&sub(&s, &twice)));
        }
        Ok(())
    })?;
    Ok(sweep
        .finish("difference_tensor", "difference of a connection and its dual", tol)
        .detail("statistical", statistical))
}

pub fn check_dual_conformal_pair(setup: &SubmersionSetup, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let sweep = Sweep::run(pts(samples), |p, r| {
        let frame = setup.frame(p)?;
        let (dual, base_dual) = dual_values(setup, &frame)?;
        r.record_all("primal_defect", conformal_defect(&frame));
        r.record_all("dual_defect", conformal_defect_with(&frame, &dual, &base_dual));
        Ok(())
    })?;
    let primal = sweep.component("primal_defect");
    let dual = sweep.component("dual_defect");
    let holds = (primal <= tol) == (dual <= tol);
    Ok(sweep
        .finish_with(
            "dual_conformal_pair",
            "conformal submersion property passes to the dual pair",
            tol,
            Status::from_pass(holds),
        )
        .detail("primal_holds", primal <= tol)
        .detail("dual_holds", dual <= tol)
        .detail("biconditional_holds", holds))
}

/// The six component identities relating cubic forms of total space,
/// base and fibres, each as a maximum over basis vectors at one point.
pub struct LemmaResiduals {
    pub base_cubic_form: f64,
    pub difference_vertical: f64,
    pub horizontal_tensor_a: f64,
    pub difference_horizontal: f64,
    pub vertical_tensor_t: f64,
    pub fiber_cubic_form: f64,
}

impl LemmaResiduals {
    pub fn record(&self, r: &mut Residuals) {
        r.record("base_cubic_form", self.base_cubic_form);
        r.record("difference_vertical", self.difference_vertical);
        r.record("horizontal_tensor_a", self.horizontal_tensor_a);
        r.record("difference_horizontal", self.difference_horizontal);
        r.record("vertical_tensor_t", self.vertical_tensor_t);
        r.record("fiber_cubic_form", self.fiber_cubic_form);
    }
}

/// `(∇̂_U ĝ)(V, W)` with vertical fields.
fn fiber_cubic(frame: &Frame, u: &[Jet], v: &[Jet], w: &[Jet]) -> f64 {
    let uv = values(u);
    let gvw = {
        let gw = Frame::apply(&frame.metric, w);
        let mut acc = gw[0].constant_like(0.0);
        for (k, gk) in gw.iter().enumerate() {
            acc += &(v[k].clone() * gk.clone());
        }
        acc
    };
    let nv = frame.vertical_part(&frame.nabla(&uv, v));
    let nw = frame.vertical_part(&frame.nabla(&uv, w));
    gvw.directional(&uv) - frame.g_dot(&nv, &values(w)) - frame.g_dot(&values(v), &nw)
}

pub fn lemma_residuals(setup: &SubmersionSetup, frame: &Frame) -> Result<LemmaResiduals> {
    let (m, nv) = (frame.m(), frame.n() - frame.m());
    let (dual, _) = dual_values(setup, frame)?;
    let c = frame.cubic_form(setup)?;
    let cb = frame.base_cubic_form(setup)?;
    let g = frame.g();
    let hb = frame.horizontal_basis();
    let vb = frame.vertical_basis();
    let vf: Vec<Vec<Jet>> = (0..nv).map(|f| frame.vertical_field(f)).collect();
    let s_of = |e: &[f64], f: &[f64]| -> Vec<f64> { s_tensor(frame, &dual, e, &frame.constant_field(f)) };
    let a_bar = |e: &[f64], f: &[f64]| frame.a_tensor_with(&dual, e, &frame.constant_field(f));
    let t_bar = |e: &[f64], f: &[f64]| frame.t_tensor_with(&dual, e, &frame.constant_field(f));

    let mut out = LemmaResiduals {
        base_cubic_form: 0.0,
        difference_vertical: 0.0,
        horizontal_tensor_a: 0.0,
        difference_horizontal: 0.0,
        vertical_tensor_t: 0.0,
        fiber_cubic_form: 0.0,
    };
    let s2 = frame.conformal_scale();
    for a in 0..m {
        for b in 0..m {
            for d in 0..m {
                let lhs = trilinear(&c, &hb[a], &hb[b], &hb[d]);
                let rhs = s2 * cb[(a * m + b) * m + d];
                out.base_cubic_form = out.base_cubic_form.max((lhs - rhs).abs());
            }
        }
    }
    for v in &vb {
        for x in &hb {
            for y in &hb {
                let r7 = trilinear(&c, v, x, y) + bilinear(&g, &s_of(v, x), y);
                out.difference_vertical = out.difference_vertical.max(r7.abs());
                let diff = sub(&frame.a_tensor(x, v), &a_bar(x, v));
                let r8 = trilinear(&c, x, v, y) + bilinear(&g, &diff, y);
                out.horizontal_tensor_a = out.horizontal_tensor_a.max(r8.abs());
            }
            for w in &vb {
                let r9 = trilinear(&c, x, v, w) + bilinear(&g, &s_of(x, v), w);
                out.difference_horizontal = out.difference_horizontal.max(r9.abs());
                let diff = sub(&frame.t_tensor(v, x), &t_bar(v, x));
                let r10 = trilinear(&c, v, x, w) + bilinear(&g, &diff, w);
                out.vertical_tensor_t = out.vertical_tensor_t.max(r10.abs());
            }
        }
    }
    for u in &vf {
        for v in &vf {
            for w in &vf {
                let lhs = trilinear(&c, &values(u), &values(v), &values(w));
                let r11 = lhs - fiber_cubic(frame, u, v, w);
                out.fiber_cubic_form = out.fiber_cubic_form.max(r11.abs());
            }
        }
    }
    Ok(out)
}

pub fn check_lemma_components(setup: &SubmersionSetup, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let mut orthogonal = true;
    let sweep = Sweep::run(pts(samples), |p, r| {
        let frame = setup.frame(p)?;
        if frame.orthogonality_defect() > tol {
            orthogonal = false;
        }
        lemma_residuals(setup, &frame)?.record(r);
        Ok(())
    })?;
    let status = if orthogonal {
        Status::from_pass(sweep.max() <= tol)
    } else {
        Status::PremiseFailed
    };
    Ok(sweep
        .finish_with(
            "lemma_components",
            "component identities for the cubic form of a conformal submersion",
            tol,
            status,
        )
        .detail("horizontal_orthogonal", orthogonal))
}

/// Residuals of the four conditions at one point, plus the torsion premise.
pub struct FourConditions {
    pub condition_1: f64,
    pub condition_2: f64,
    pub fiber_cubic_asymmetry: f64,
    pub fiber_torsion: f64,
    pub base_torsion: f64,
    pub base_cubic_asymmetry: f64,
    pub total_torsion: f64,
}

pub fn four_condition_residuals(setup: &SubmersionSetup, frame: &Frame) -> Result<FourConditions> {
    let nv = frame.n() - frame.m();
    let (dual, _) = dual_values(setup, frame)?;
    let hb = frame.horizontal_basis();
    let vb = frame.vertical_basis();
    let vf: Vec<Vec<Jet>> = (0..nv).map(|f| frame.vertical_field(f)).collect();
    let s_of = |e: &[f64], f: &[f64]| -> Vec<f64> { s_tensor(frame, &dual, e, &frame.constant_field(f)) };
    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    for v in &vb {
        for x in &hb {
            let a_diff = sub(
                &frame.a_tensor(x, v),
                &frame.a_tensor_with(&dual, x, &frame.constant_field(v)),
            );
            c1 = c1.max(norm_inf(&sub(&frame.horizontal(&s_of(v, x)), &a_diff)));
            let t_diff = sub(
                &frame.t_tensor(v, x),
                &frame.t_tensor_with(&dual, v, &frame.constant_field(x)),
            );
            c2 = c2.max(norm_inf(&sub(&frame.vertical_part(&s_of(x, v)), &t_diff)));
        }
    }
    let mut fiber_asym = 0.0f64;
    let mut fiber_tor = 0.0f64;
    for (i, u) in vf.iter().enumerate() {
        for (j, v) in vf.iter().enumerate() {
            for w in &vf {
                let a = fiber_cubic(frame, u, v, w);
                let b = fiber_cubic(frame, v, u, w);
                fiber_asym = fiber_asym.max((a - b).abs());
            }
            if i < j {
                let (uv, vv) = (values(u), values(v));
                let nab = sub(&frame.nabla(&uv, v), &frame.nabla(&vv, u));
                let bracket: Vec<f64> = (0..frame.n())
                    .map(|k| v[k].directional(&uv) - u[k].directional(&vv))
                    .collect();
                fiber_tor = fiber_tor.max(norm_inf(&sub(&frame.vertical_part(&nab), &bracket)));
            }
        }
    }
    let (base_torsion, base_asym) = statistical_residuals(
        setup.base.connection.as_ref(),
        setup.base.metric.as_ref(),
        &frame.base_point,
    )?;
    let n = frame.n();
    let mut total_torsion = 0.0f64;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                total_torsion = total_torsion.max((frame.gamma.get(k, i, j) - frame.gamma.get(k, j, i)).abs());
            }
        }
    }
    Ok(FourConditions {
        condition_1: c1,
        condition_2: c2,
        fiber_cubic_asymmetry: fiber_asym,
        fiber_torsion: fiber_tor,
        base_torsion,
        base_cubic_asymmetry: base_asym,
        total_torsion,
    })
}

/// Evaluates the four conditions and the statistical property of the total
/// space; the verdict is that both sides agree and hold.
pub fn check_four_conditions(setup: &SubmersionSetup, samples: &[Vec<f64>], tol: f64) -> Result<CheckResult> {
    let name = "four_conditions";
    let reference = "statistical total space from fibre, base and tensor conditions";
    let stat = crate::geometry::check_is_statistical(
        setup.total.connection.as_ref(),
        setup.total.metric.as_ref(),
        samples,
        tol,
    )?;
    let mut orthogonal = true;
    let sweep = Sweep::run(pts(samples), |p, r| {
        let frame = setup.frame(p)?;
        if frame.orthogonality_defect() > tol {
            orthogonal = false;
        }
        let c = four_condition_residuals(setup, &frame)?;
        r.record("condition_1", c.condition_1);
        r.record("condition_2", c.condition_2);
        r.record("fiber_cubic_asymmetry", c.fiber_cubic_asymmetry);
        r.record("fiber_torsion", c.fiber_torsion);
        r.record("base_torsion", c.base_torsion);
        r.record("base_cubic_asymmetry", c.base_cubic_asymmetry);
        r.record("total_torsion", c.total_torsion);
        Ok(())
    })?;
    let conditions_hold = sweep.complete_enough() && sweep.max() <= tol;
    let statistical = stat.passed();
    let biconditional = conditions_hold == statistical;
    let status = if !orthogonal {
        Status::PremiseFailed
    } else {
        Status::from_pass(conditions_hold && statistical)
    };
    Ok(sweep
        .finish_with(name, reference, tol, status)
        .detail("conditions_hold", conditions_hold)
        .detail("total_statistical", statistical)
        .detail("total_statistical_residual", stat.max_residual)
        .detail("biconditional_holds", biconditional)
        .detail("horizontal_orthogonal", orthogonal))
}
