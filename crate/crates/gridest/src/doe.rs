//! D-optimal design of experiment: pick generator voltage set-points that
//! maximize the determinant of the information matrix subject to power-flow
//! and operating constraints.
//!
//! The objective is `-log det(lambda * Zinv + A(v)' A(v))` over the nodal
//! voltages `v`, where `A(v)` is the estimation regressor and `Zinv` the
//! accumulated information. The load balance constraint couples `v` through
//! the latest admittance estimate. Decision variables are the voltage
//! magnitudes and angles of all non-slack buses plus generator active
//! powers; load balance is enforced with an augmented-Lagrangian scheme
//! around a projected-gradient inner solver, and every candidate is snapped
//! back onto the power-flow manifold of the estimated network before it is
//! scored.

use crate::estimator::EstimatorState;
use crate::netmodel::{BusKind, GridSpec};
use crate::powerflow::{
    add_measurement_noise, injection_jacobian, injections, phasors, solve_power_flow,
    solve_power_flow_y, GenSetpoint, NoiseModel, PhasorSample, PowerFlowOptions,
};
use crate::structvec::{regressor_columns, Parametrization};
use crate::{CMatrix, CVector, Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Per-bus and per-generator operating boxes (positional bus indices).
#[derive(Debug, Clone)]
pub struct DoeLimits {
    pub v_min: DVector<f64>,
    pub v_max: DVector<f64>,
    pub th_min: DVector<f64>,
    pub th_max: DVector<f64>,
    /// Aligned with the problem's generator list.
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
    pub q_min: Vec<f64>,
    pub q_max: Vec<f64>,
}

impl DoeLimits {
    pub fn from_spec(spec: &GridSpec) -> Self {
        let n = spec.n();
        let mut v_min = DVector::zeros(n);
        let mut v_max = DVector::zeros(n);
        let mut th_min = DVector::zeros(n);
        let mut th_max = DVector::zeros(n);
        for (i, b) in spec.buses.iter().enumerate() {
            v_min[i] = b.v_limits[0];
            v_max[i] = b.v_limits[1];
            th_min[i] = b.theta_limits[0];
            th_max[i] = b.theta_limits[1];
        }
        let mut p_min = Vec::new();
        let mut p_max = Vec::new();
        let mut q_min = Vec::new();
        let mut q_max = Vec::new();
        for b in spec.buses.iter().filter(|b| b.kind == BusKind::Generator) {
            let p = b.p_limits.unwrap_or([0.0, 1.0]);
            let q = b.q_limits.unwrap_or([-1.0, 1.0]);
            p_min.push(p[0]);
            p_max.push(p[1]);
            q_min.push(q[0]);
            q_max.push(q[1]);
        }
        Self {
            v_min,
            v_max,
            th_min,
            th_max,
            p_min,
            p_max,
            q_min,
            q_max,
        }
    }
}

/// One design problem instance at time `t`.
#[derive(Debug, Clone)]
pub struct DoeProblem {
    /// Accumulated scaled information `Z_{t-1}^{-1}` (Hermitian PD).
    pub z_inv_prev: CMatrix,
    /// Latest admittance estimate, used in the balance constraint.
    pub y_hat_prev: CMatrix,
    pub lambda: f64,
    pub parametrization: Parametrization,
    /// Complex demands per bus (consumption, nonzero at loads).
    pub demands: Vec<Complex64>,
    pub slack: usize,
    /// Positional indices of the controllable generators.
    pub gens: Vec<usize>,
    /// Nominal set-points; always used as the first start.
    pub nominal: Vec<GenSetpoint>,
    pub limits: DoeLimits,
}

impl DoeProblem {
    pub fn from_state(
        state: &EstimatorState,
        spec: &GridSpec,
        demands: &[Complex64],
    ) -> Result<Self> {
        let y_hat = state.estimate_admittance()?.y;
        Ok(Self {
            z_inv_prev: state.z_inv().clone(),
            y_hat_prev: y_hat,
            lambda: state.lambda(),
            parametrization: state.parametrization(),
            demands: demands.to_vec(),
            slack: spec.slack_index(),
            gens: spec.generator_indices(),
            nominal: crate::powerflow::nominal_setpoints(spec),
            limits: DoeLimits::from_spec(spec),
        })
    }
}

/// Result of one design solve.
#[derive(Debug, Clone)]
pub struct DoeSolution {
    pub v_star: CVector,
    /// Active powers per generator, aligned with the problem's `gens`.
    pub p_star: Vec<f64>,
    /// `-log det` information objective at `v_star`.
    pub objective: f64,
    pub feasible: bool,
    /// Set when the design fell back to the nominal set-points.
    pub fallback_nominal: bool,
    pub solver_iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct DoeOptions {
    /// Number of starts; the nominal operating point is always start 1.
    pub multistarts: usize,
    pub seed: u64,
    /// Constraint tolerance for the feasibility certificate.
    pub feas_tol: f64,
    /// Projected-gradient iterations per augmented-Lagrangian round.
    pub inner_iters: usize,
    pub al_rounds: usize,
    pub pf: PowerFlowOptions,
}

impl Default for DoeOptions {
    fn default() -> Self {
        Self {
            multistarts: 5,
            seed: 0,
            feas_tol: 1e-6,
            inner_iters: 30,
            al_rounds: 3,
            pf: PowerFlowOptions::default(),
        }
    }
}

/// `-log det(lambda * Zinv + A(v)' A(v))`, evaluated through a Cholesky
/// factorization of the Hermitian PD argument.
pub fn information_objective(v: &CVector, prob: &DoeProblem) -> Result<f64> {
    let m = information_matrix(v, prob)?;
    neg_log_det(&m)
}

fn information_matrix(v: &CVector, prob: &DoeProblem) -> Result<CMatrix> {
    let p = prob.parametrization;
    if v.len() != p.n {
        return Err(Error::DimensionMismatch {
            expected: p.n,
            got: v.len(),
            context: "information objective voltage",
        });
    }
    let a = crate::estimator::regressor(v, p)?;
    let lam = Complex64::new(prob.lambda, 0.0);
    Ok(&prob.z_inv_prev * lam + a.adjoint() * a)
}

fn neg_log_det(m: &CMatrix) -> Result<f64> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("information matrix"))?;
    let mut acc = 0.0;
    let l = chol.l();
    for k in 0..l.nrows() {
        acc += l[(k, k)].re.ln();
    }
    Ok(-2.0 * acc)
}

/// Four-step design/measure/update loop body.
///
/// Solves the design under the latest estimate, applies the set-points to
/// the true grid, synthesizes a noisy sample, and feeds it back into the
/// estimator. On an infeasible design the step runs at the nominal
/// set-points with the fallback flag raised.
pub fn doe_step(
    state: &mut EstimatorState,
    spec: &GridSpec,
    true_y: &CMatrix,
    demands: &[Complex64],
    noise: &NoiseModel,
    t: usize,
    opts: &DoeOptions,
) -> Result<(DoeSolution, PhasorSample)> {
    let prob = DoeProblem::from_state(state, spec, demands)?;
    let sol = match solve_doe(&prob, opts) {
        Ok(sol) => sol,
        Err(Error::DoeInfeasible) => {
            let nominal_v = solve_power_flow(spec, demands, &prob.nominal, &opts.pf)?;
            DoeSolution {
                objective: information_objective(&nominal_v, &prob).unwrap_or(f64::INFINITY),
                v_star: nominal_v,
                p_star: prob.nominal.iter().map(|g| g.p).collect(),
                feasible: false,
                fallback_nominal: true,
                solver_iterations: 0,
            }
        }
        Err(e) => return Err(e),
    };

    let setpoints: Vec<GenSetpoint> = prob
        .gens
        .iter()
        .zip(sol.p_star.iter())
        .map(|(&bus, &p)| GenSetpoint {
            bus,
            v_mag: sol.v_star[bus].norm(),
            p,
        })
        .collect();
    let v = solve_power_flow(spec, demands, &setpoints, &opts.pf)?;
    let sample = crate::powerflow::make_sample(t, true_y, v, noise);
    state.update(&sample.v_noisy, &sample.i_noisy)?;
    Ok((sol, sample))
}

/// Solve the constrained design problem by multi-start: the nominal point
/// first, then seeded random generator set-points; each start is refined in
/// the full voltage space and snapped back to power-flow feasibility under
/// the estimated admittance.
pub fn solve_doe(prob: &DoeProblem, opts: &DoeOptions) -> Result<DoeSolution> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<DoeSolution> = None;
    let mut iterations_total = 0;

    for start in 0..opts.multistarts.max(1) {
        let setpoints: Vec<GenSetpoint> = if start == 0 {
            prob.nominal.clone()
        } else {
            prob.gens
                .iter()
                .enumerate()
                .map(|(gi, &bus)| GenSetpoint {
                    bus,
                    v_mag: rng.gen_range(prob.limits.v_min[bus]..=prob.limits.v_max[bus]),
                    p: rng.gen_range(prob.limits.p_min[gi]..=prob.limits.p_max[gi]),
                })
                .collect()
        };
        match refine_start(prob, opts, &setpoints, &mut iterations_total) {
            Some(sol) => {
                let better = match &best {
                    Some(b) => sol.objective < b.objective,
                    None => true,
                };
                if better {
                    best = Some(sol);
                }
            }
            None => continue,
        }
    }

    match best {
        Some(mut sol) => {
            sol.solver_iterations = iterations_total;
            Ok(sol)
        }
        None => Err(Error::DoeInfeasible),
    }
}

/// Decision vector layout: angles of non-slack buses, magnitudes of
/// non-slack buses, generator active powers.
struct Layout {
    free: Vec<usize>,
    n: usize,
    ng: usize,
}

impl Layout {
    fn new(prob: &DoeProblem) -> Self {
        let n = prob.y_hat_prev.nrows();
        let free: Vec<usize> = (0..n).filter(|&i| i != prob.slack).collect();
        Self {
            free,
            n,
            ng: prob.gens.len(),
        }
    }

    fn dim(&self) -> usize {
        2 * self.free.len() + self.ng
    }

    fn unpack(&self, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>, Vec<f64>) {
        let nf = self.free.len();
        let mut th = DVector::zeros(self.n);
        let mut vm = DVector::from_element(self.n, 1.0);
        for (k, &i) in self.free.iter().enumerate() {
            th[i] = x[k];
            vm[i] = x[nf + k];
        }
        let p = (0..self.ng).map(|g| x[2 * nf + g]).collect();
        (th, vm, p)
    }

    fn lower(&self, prob: &DoeProblem) -> DVector<f64> {
        let nf = self.free.len();
        let mut lo = DVector::zeros(self.dim());
        for (k, &i) in self.free.iter().enumerate() {
            lo[k] = prob.limits.th_min[i];
            lo[nf + k] = prob.limits.v_min[i];
        }
        for g in 0..self.ng {
            lo[2 * nf + g] = prob.limits.p_min[g];
        }
        lo
    }

    fn upper(&self, prob: &DoeProblem) -> DVector<f64> {
        let nf = self.free.len();
        let mut hi = DVector::zeros(self.dim());
        for (k, &i) in self.free.iter().enumerate() {
            hi[k] = prob.limits.th_max[i];
            hi[nf + k] = prob.limits.v_max[i];
        }
        for g in 0..self.ng {
            hi[2 * nf + g] = prob.limits.p_max[g];
        }
        hi
    }
}

fn refine_start(
    prob: &DoeProblem,
    opts: &DoeOptions,
    setpoints: &[GenSetpoint],
    iterations_total: &mut usize,
) -> Option<DoeSolution> {
    // restoration: land exactly on the balance manifold of the estimate
    let v0 = solve_power_flow_y(
        &prob.y_hat_prev,
        prob.slack,
        setpoints,
        &prob.demands,
        &opts.pf,
    )
    .ok()?;

    let layout = Layout::new(prob);
    let lo = layout.lower(prob);
    let hi = layout.upper(prob);
    let nf = layout.free.len();
    let mut x = DVector::zeros(layout.dim());
    for (k, &i) in layout.free.iter().enumerate() {
        x[k] = v0[i].arg();
        x[nf + k] = v0[i].norm();
    }
    for (g, sp) in setpoints.iter().enumerate() {
        x[2 * nf + g] = sp.p;
    }
    project(&mut x, &lo, &hi);

    // augmented-Lagrangian rounds over the load/generator balance
    let n_eq = 2 * (layout.n - 1 - layout.ng) + layout.ng;
    let mut mu = DVector::zeros(n_eq);
    let mut rho = 10.0;
    for _round in 0..opts.al_rounds {
        x = spg_minimize(
            prob,
            &layout,
            &lo,
            &hi,
            x,
            &mu,
            rho,
            opts.inner_iters,
            iterations_total,
        );
        let (th, vm, p) = layout.unpack(&x);
        let c = eq_constraints(prob, &layout, &th, &vm, &p);
        mu += &c * rho;
        rho *= 10.0;
    }

    // snap back to exact feasibility and score
    let (th, vm, p) = layout.unpack(&x);
    let refined: Vec<GenSetpoint> = prob
        .gens
        .iter()
        .enumerate()
        .map(|(g, &bus)| GenSetpoint {
            bus,
            v_mag: vm[bus].clamp(prob.limits.v_min[bus], prob.limits.v_max[bus]),
            p: p[g].clamp(prob.limits.p_min[g], prob.limits.p_max[g]),
        })
        .collect();
    let _ = th;
    let v_star = solve_power_flow_y(
        &prob.y_hat_prev,
        prob.slack,
        &refined,
        &prob.demands,
        &opts.pf,
    )
    .ok()?;

    let feasible = certify(prob, &v_star, &refined, opts.feas_tol);
    let objective = information_objective(&v_star, prob).ok()?;
    if !feasible {
        return None;
    }
    Some(DoeSolution {
        v_star,
        p_star: refined.iter().map(|g| g.p).collect(),
        objective,
        feasible: true,
        fallback_nominal: false,
        solver_iterations: 0,
    })
}

/// Independent re-check of constraints 16b-16f at a candidate point.
fn certify(prob: &DoeProblem, v: &CVector, setpoints: &[GenSetpoint], tol: f64) -> bool {
    let n = v.len();
    let s = injections(&prob.y_hat_prev, v);
    for i in 0..n {
        if i == prob.slack {
            continue;
        }
        let vm = v[i].norm();
        let th = v[i].arg();
        if vm < prob.limits.v_min[i] - tol || vm > prob.limits.v_max[i] + tol {
            return false;
        }
        if th < prob.limits.th_min[i] - tol || th > prob.limits.th_max[i] + tol {
            return false;
        }
    }
    for (g, sp) in setpoints.iter().enumerate() {
        if sp.p < prob.limits.p_min[g] - tol || sp.p > prob.limits.p_max[g] + tol {
            return false;
        }
        let q = s[sp.bus].im;
        if q < prob.limits.q_min[g] - tol || q > prob.limits.q_max[g] + tol {
            return false;
        }
        if (s[sp.bus].re - sp.p).abs() > tol {
            return false;
        }
    }
    for i in 0..n {
        if i == prob.slack || prob.gens.contains(&i) {
            continue;
        }
        if (s[i] + prob.demands[i]).norm() > tol {
            return false;
        }
    }
    true
}

/// Equality constraints: load-bus P and Q balance, generator P balance.
fn eq_constraints(
    prob: &DoeProblem,
    layout: &Layout,
    th: &DVector<f64>,
    vm: &DVector<f64>,
    p: &[f64],
) -> DVector<f64> {
    let v = phasors(vm, th);
    let s = injections(&prob.y_hat_prev, &v);
    let mut c = Vec::with_capacity(2 * layout.n);
    for i in 0..layout.n {
        if i == prob.slack || prob.gens.contains(&i) {
            continue;
        }
        c.push(s[i].re + prob.demands[i].re);
        c.push(s[i].im + prob.demands[i].im);
    }
    for (g, &bus) in prob.gens.iter().enumerate() {
        c.push(s[bus].re - p[g]);
    }
    DVector::from_vec(c)
}

fn project(x: &mut DVector<f64>, lo: &DVector<f64>, hi: &DVector<f64>) {
    for k in 0..x.len() {
        x[k] = x[k].clamp(lo[k], hi[k]);
    }
}

/// Augmented Lagrangian value and gradient at `x`.
#[allow(clippy::too_many_arguments)]
fn al_eval(
    prob: &DoeProblem,
    layout: &Layout,
    x: &DVector<f64>,
    mu: &DVector<f64>,
    rho: f64,
    want_grad: bool,
) -> (f64, Option<DVector<f64>>) {
    let nf = layout.free.len();
    let (th, vm, p) = layout.unpack(x);
    let v = phasors(&vm, &th);

    // information objective and its Wirtinger gradient
    let (f_val, g_complex) = match info_value_grad(prob, &v, want_grad) {
        Ok(pair) => pair,
        Err(_) => return (f64::INFINITY, None),
    };

    let c = eq_constraints(prob, layout, &th, &vm, &p);
    let mut value = f_val;
    for j in 0..c.len() {
        value += mu[j] * c[j] + 0.5 * rho * c[j] * c[j];
    }

    // one-sided quadratic penalty on generator reactive power
    let s = injections(&prob.y_hat_prev, &v);
    let mut q_viol = Vec::with_capacity(layout.ng);
    for (g, &bus) in prob.gens.iter().enumerate() {
        let q = s[bus].im;
        let over = (q - prob.limits.q_max[g]).max(0.0);
        let under = (prob.limits.q_min[g] - q).max(0.0);
        value += 0.5 * rho * (over * over + under * under);
        q_viol.push(over - under);
    }

    if !want_grad {
        return (value, None);
    }

    let jac = injection_jacobian(&prob.y_hat_prev, &vm, &th);
    let mut grad = DVector::zeros(layout.dim());

    // objective part: d/dth_i = 2 Im(g_i v_i), d/dvm_i = -2 Re(g_i e^{j th_i})
    if let Some(gc) = &g_complex {
        for (k, &i) in layout.free.iter().enumerate() {
            grad[k] += 2.0 * (gc[i] * v[i]).im;
            grad[nf + k] += -2.0 * (gc[i] * Complex64::from_polar(1.0, th[i])).re;
        }
    }

    // constraint part
    let mut row = 0usize;
    let mut add_rows = |grad: &mut DVector<f64>, bus: usize, weight_p: f64, weight_q: f64| {
        for (k, &i) in layout.free.iter().enumerate() {
            grad[k] += weight_p * jac.dp_dth[(bus, i)] + weight_q * jac.dq_dth[(bus, i)];
            grad[nf + k] += weight_p * jac.dp_dvm[(bus, i)] + weight_q * jac.dq_dvm[(bus, i)];
        }
    };
    for i in 0..layout.n {
        if i == prob.slack || prob.gens.contains(&i) {
            continue;
        }
        let wp = mu[row] + rho * c[row];
        let wq = mu[row + 1] + rho * c[row + 1];
        add_rows(&mut grad, i, wp, wq);
        row += 2;
    }
    for (g, &bus) in prob.gens.iter().enumerate() {
        let wp = mu[row] + rho * c[row];
        add_rows(&mut grad, bus, wp, 0.0);
        grad[2 * nf + g] -= wp;
        row += 1;
    }
    // reactive-power penalty part
    for (g, &bus) in prob.gens.iter().enumerate() {
        let w = rho * q_viol[g];
        if w != 0.0 {
            add_rows(&mut grad, bus, 0.0, w);
        }
    }

    (value, Some(grad))
}

/// Objective value and complex gradient `g_q = tr(M^{-1} A' B_q)`.
fn info_value_grad(
    prob: &DoeProblem,
    v: &CVector,
    want_grad: bool,
) -> Result<(f64, Option<CVector>)> {
    let p = prob.parametrization;
    let a = crate::estimator::regressor(v, p)?;
    let lam = Complex64::new(prob.lambda, 0.0);
    let m = &prob.z_inv_prev * lam + a.adjoint() * &a;
    let chol = m
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("information matrix"))?;
    let mut logdet = 0.0;
    let l = chol.l();
    for k in 0..l.nrows() {
        logdet += l[(k, k)].re.ln();
    }
    let value = -2.0 * logdet;
    if !want_grad {
        return Ok((value, None));
    }
    // W = M^{-1} A' (dim x n); g_q = tr(W B_q) accumulates sign * W[c, row]
    // over the sparse regressor structure, and df = -2 Re(sum g_q dv_q).
    let w = chol.solve(&a.adjoint());
    let mut g = CVector::zeros(p.n);
    for (c, entries) in regressor_columns(p).iter().enumerate() {
        for &(row, vcol, sign) in entries {
            if sign >= 0 {
                g[vcol] += w[(c, row)];
            } else {
                g[vcol] -= w[(c, row)];
            }
        }
    }
    Ok((value, Some(g)))
}

/// Projected gradient descent with a Barzilai-Borwein step and Armijo
/// backtracking inside the box `[lo, hi]`.
#[allow(clippy::too_many_arguments)]
fn spg_minimize(
    prob: &DoeProblem,
    layout: &Layout,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
    mut x: DVector<f64>,
    mu: &DVector<f64>,
    rho: f64,
    max_iters: usize,
    iterations_total: &mut usize,
) -> DVector<f64> {
    let (mut f, grad) = al_eval(prob, layout, &x, mu, rho, true);
    let mut g = match grad {
        Some(g) => g,
        None => return x,
    };
    let mut step = 1e-3;
    let mut x_prev: Option<(DVector<f64>, DVector<f64>)> = None;

    for _ in 0..max_iters {
        *iterations_total += 1;
        // BB step from the previous pair
        if let Some((xp, gp)) = &x_prev {
            let sx = &x - xp;
            let sg = &g - gp;
            let denom = sx.dot(&sg);
            if denom.abs() > 1e-14 {
                step = (sx.dot(&sx) / denom).abs().clamp(1e-6, 1e2);
            }
        }
        let mut accepted = false;
        let mut alpha = step;
        for _ in 0..12 {
            let mut x_try = &x - &g * alpha;
            project(&mut x_try, lo, hi);
            let d = &x_try - &x;
            if d.amax() < 1e-12 {
                break;
            }
            let (f_try, _) = al_eval(prob, layout, &x_try, mu, rho, false);
            // Armijo on the projected direction
            if f_try <= f + 1e-4 * g.dot(&d) {
                let (_, grad_new) = al_eval(prob, layout, &x_try, mu, rho, true);
                let g_new = match grad_new {
                    Some(gn) => gn,
                    None => return x,
                };
                x_prev = Some((x.clone(), g.clone()));
                x = x_try;
                f = f_try;
                g = g_new;
                accepted = true;
                break;
            }
            alpha *= 0.25;
        }
        if !accepted {
            break;
        }
    }
    x
}
