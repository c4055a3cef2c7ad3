//! Steady-state phasor synthesis: AC power-flow solution and measurement
//! noise injection.
//!
//! The solver is Newton-Raphson in polar coordinates with the analytic
//! Jacobian, flat start, and step halving when the residual grows. Buses are
//! classified as the slack (voltage pinned to `1 ∠ 0`), PV generators (fixed
//! active power and voltage magnitude), and PQ loads (fixed complex demand).

use crate::netmodel::{build_admittance, BusKind, GridSpec};
use crate::{CMatrix, CVector, Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Voltage magnitude and active power ordered for one generator bus
/// (positional bus index).
#[derive(Debug, Clone, Copy)]
pub struct GenSetpoint {
    pub bus: usize,
    pub v_mag: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PowerFlowOptions {
    /// Convergence threshold on the infinity norm of the power mismatch.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerFlowOptions {
    fn default() -> Self {
        // Converge well below the 1e-8 residual contract to leave margin
        // for the oracle check.
        Self {
            tol: 1e-10,
            max_iter: 30,
        }
    }
}

/// One steady state of the network: clean and noisy phasors.
#[derive(Debug, Clone)]
pub struct PhasorSample {
    pub t: usize,
    pub v: CVector,
    pub i: CVector,
    pub v_noisy: CVector,
    pub i_noisy: CVector,
}

/// Gaussian measurement-error model: i.i.d. `N(0, sigma^2)` on the real and
/// imaginary part of every entry, currents and voltages separately.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    pub sigma_i: f64,
    pub sigma_v: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            sigma_i: 0.0,
            sigma_v: 0.0,
            seed: 0,
        }
    }
}

/// Nodal complex power injections `s_i = v_i * conj((Y v)_i)`.
pub fn injections(y: &CMatrix, v: &CVector) -> CVector {
    let i = y * v;
    CVector::from_fn(v.len(), |k, _| v[k] * i[k].conj())
}

/// Nodal current injections `i = Y v`.
pub fn currents_from_voltages(y: &CMatrix, v: &CVector) -> CVector {
    y * v
}

/// Elementwise `|s - [v] conj(Y v)|`: the residual of the power-flow
/// equations at each bus.
pub fn power_mismatch(y: &CMatrix, v: &CVector, s: &CVector) -> DVector<f64> {
    let calc = injections(y, v);
    DVector::from_fn(v.len(), |k, _| (s[k] - calc[k]).norm())
}

/// The four Jacobian blocks of the injections with respect to voltage
/// angles and magnitudes, over all buses.
pub struct InjectionJacobian {
    pub dp_dth: DMatrix<f64>,
    pub dp_dvm: DMatrix<f64>,
    pub dq_dth: DMatrix<f64>,
    pub dq_dvm: DMatrix<f64>,
}

/// Analytic polar-coordinate Jacobian of `s(v)` under admittance `y`.
pub fn injection_jacobian(y: &CMatrix, vm: &DVector<f64>, th: &DVector<f64>) -> InjectionJacobian {
    let n = vm.len();
    let s = {
        let v = phasors(vm, th);
        injections(y, &v)
    };
    let mut dp_dth = DMatrix::zeros(n, n);
    let mut dp_dvm = DMatrix::zeros(n, n);
    let mut dq_dth = DMatrix::zeros(n, n);
    let mut dq_dvm = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let g = y[(i, k)].re;
            let b = y[(i, k)].im;
            if i == k {
                dp_dth[(i, i)] = -s[i].im - b * vm[i] * vm[i];
                dp_dvm[(i, i)] = s[i].re / vm[i] + g * vm[i];
                dq_dth[(i, i)] = s[i].re - g * vm[i] * vm[i];
                dq_dvm[(i, i)] = s[i].im / vm[i] - b * vm[i];
            } else {
                let tik = th[i] - th[k];
                let (sin, cos) = tik.sin_cos();
                dp_dth[(i, k)] = vm[i] * vm[k] * (g * sin - b * cos);
                dp_dvm[(i, k)] = vm[i] * (g * cos + b * sin);
                dq_dth[(i, k)] = -vm[i] * vm[k] * (g * cos + b * sin);
                dq_dvm[(i, k)] = vm[i] * (g * sin - b * cos);
            }
        }
    }
    InjectionJacobian {
        dp_dth,
        dp_dvm,
        dq_dth,
        dq_dvm,
    }
}

pub fn phasors(vm: &DVector<f64>, th: &DVector<f64>) -> CVector {
    CVector::from_fn(vm.len(), |k, _| Complex64::from_polar(vm[k], th[k]))
}

/// Solve the power-flow equations under an arbitrary admittance matrix.
///
/// `demands` is a full-length vector of complex consumptions (nonzero only
/// at PQ buses); generator buses are PV with the given set-points; `slack`
/// is held at `1 ∠ 0`. Returns the complex bus voltages.
pub fn solve_power_flow_y(
    y: &CMatrix,
    slack: usize,
    gens: &[GenSetpoint],
    demands: &[Complex64],
    opts: &PowerFlowOptions,
) -> Result<CVector> {
    let n = y.nrows();
    if demands.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: demands.len(),
            context: "solve_power_flow demands",
        });
    }
    let mut is_pv = vec![false; n];
    let mut vset = vec![1.0; n];
    let mut p_spec = vec![0.0; n];
    let mut q_spec = vec![0.0; n];
    for g in gens {
        if g.bus >= n || g.bus == slack {
            return Err(Error::Config(format!(
                "generator set-point at invalid bus index {}",
                g.bus
            )));
        }
        if is_pv[g.bus] {
            return Err(Error::Config(format!(
                "duplicate generator set-point at bus index {}",
                g.bus
            )));
        }
        is_pv[g.bus] = true;
        vset[g.bus] = g.v_mag;
        p_spec[g.bus] = g.p;
    }
    for i in 0..n {
        if i != slack && !is_pv[i] {
            p_spec[i] = -demands[i].re;
            q_spec[i] = -demands[i].im;
        }
    }

    // flat start
    let mut vm = DVector::from_fn(n, |k, _| if is_pv[k] { vset[k] } else { 1.0 });
    vm[slack] = 1.0;
    let mut th = DVector::zeros(n);

    let p_rows: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let q_rows: Vec<usize> = (0..n).filter(|&i| i != slack && !is_pv[i]).collect();
    let m = p_rows.len() + q_rows.len();

    let mismatch = |vm: &DVector<f64>, th: &DVector<f64>| -> DVector<f64> {
        let v = phasors(vm, th);
        let s = injections(y, &v);
        let mut f = DVector::zeros(m);
        for (r, &i) in p_rows.iter().enumerate() {
            f[r] = p_spec[i] - s[i].re;
        }
        for (r, &i) in q_rows.iter().enumerate() {
            f[p_rows.len() + r] = q_spec[i] - s[i].im;
        }
        f
    };

    let mut f = mismatch(&vm, &th);
    let mut res = f.amax();
    for iter in 0..opts.max_iter {
        if res <= opts.tol {
            return Ok(phasors(&vm, &th));
        }
        let jac = injection_jacobian(y, &vm, &th);
        let mut j = DMatrix::zeros(m, m);
        for (r, &i) in p_rows.iter().enumerate() {
            for (c, &k) in p_rows.iter().enumerate() {
                j[(r, c)] = jac.dp_dth[(i, k)];
            }
            for (c, &k) in q_rows.iter().enumerate() {
                j[(r, p_rows.len() + c)] = jac.dp_dvm[(i, k)];
            }
        }
        for (r, &i) in q_rows.iter().enumerate() {
            for (c, &k) in p_rows.iter().enumerate() {
                j[(p_rows.len() + r, c)] = jac.dq_dth[(i, k)];
            }
            for (c, &k) in q_rows.iter().enumerate() {
                j[(p_rows.len() + r, p_rows.len() + c)] = jac.dq_dvm[(i, k)];
            }
        }
        let lu = j.lu();
        let dx = match lu.solve(&f) {
            Some(dx) => dx,
            None => {
                return Err(Error::PowerFlowDiverged {
                    iterations: iter,
                    residual: res,
                })
            }
        };

        // full Newton step, halving while the residual increases
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let mut vm_try = vm.clone();
            let mut th_try = th.clone();
            for (c, &i) in p_rows.iter().enumerate() {
                th_try[i] += alpha * dx[c];
            }
            for (c, &i) in q_rows.iter().enumerate() {
                vm_try[i] += alpha * dx[p_rows.len() + c];
            }
            if vm_try.iter().any(|&x| x <= 0.0) {
                alpha *= 0.5;
                continue;
            }
            let f_try = mismatch(&vm_try, &th_try);
            let res_try = f_try.amax();
            if res_try < res || alpha < 1.0 / 64.0 {
                vm = vm_try;
                th = th_try;
                f = f_try;
                res = res_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::PowerFlowDiverged {
                iterations: iter + 1,
                residual: res,
            });
        }
    }
    if res <= opts.tol {
        Ok(phasors(&vm, &th))
    } else {
        Err(Error::PowerFlowDiverged {
            iterations: opts.max_iter,
            residual: res,
        })
    }
}

/// Solve the power flow of a grid at the given demands and generator
/// set-points. Set-points must cover every generator bus exactly once.
pub fn solve_power_flow(
    spec: &GridSpec,
    demands: &[Complex64],
    setpoints: &[GenSetpoint],
    opts: &PowerFlowOptions,
) -> Result<CVector> {
    let gens = spec.generator_indices();
    if setpoints.len() != gens.len() || setpoints.iter().any(|s| !gens.contains(&s.bus)) {
        return Err(Error::Config(format!(
            "set-points must cover the {} generator buses exactly",
            gens.len()
        )));
    }
    let y = build_admittance(spec)?.y;
    solve_power_flow_y(&y, spec.slack_index(), setpoints, demands, opts)
}

/// Nominal set-points from the grid file (`v_setpoint`, `p_nominal`).
pub fn nominal_setpoints(spec: &GridSpec) -> Vec<GenSetpoint> {
    spec.buses
        .iter()
        .enumerate()
        .filter(|(_, b)| b.kind == BusKind::Generator)
        .map(|(i, b)| GenSetpoint {
            bus: i,
            v_mag: b.v_setpoint.unwrap_or(1.0),
            p: b.p_nominal.unwrap_or(0.0),
        })
        .collect()
}

/// Build a clean sample at time `t` from a converged voltage solution and
/// overlay measurement noise per the model.
pub fn make_sample(t: usize, y: &CMatrix, v: CVector, noise: &NoiseModel) -> PhasorSample {
    let i = currents_from_voltages(y, &v);
    let sample = PhasorSample {
        t,
        v_noisy: v.clone(),
        i_noisy: i.clone(),
        v,
        i,
    };
    add_measurement_noise(sample, noise)
}

/// Overlay i.i.d. Gaussian noise on the real and imaginary parts of the
/// clean phasors. Deterministic given `(noise.seed, sample.t)`; the same
/// unit draws are scaled by sigma, so sweeps over sigma stay paired.
pub fn add_measurement_noise(mut sample: PhasorSample, noise: &NoiseModel) -> PhasorSample {
    let n = sample.v.len();
    let mut rng = ChaCha8Rng::seed_from_u64(
        noise
            .seed
            .wrapping_add((sample.t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
    );
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut draw = |sigma: f64| {
        let re = unit.sample(&mut rng);
        let im = unit.sample(&mut rng);
        Complex64::new(sigma * re, sigma * im)
    };
    sample.i_noisy = CVector::from_fn(n, |k, _| sample.i[k] + draw(noise.sigma_i));
    sample.v_noisy = CVector::from_fn(n, |k, _| sample.v[k] + draw(noise.sigma_v));
    sample
}
