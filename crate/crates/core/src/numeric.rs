//! Numeric layer: integrates the P4 equation on a uniform grid, builds the
//! gauge prefactors by quadrature, samples exact states on the grid and
//! measures eigen-residuals with finite differences.

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::{principal_s_branch, rational_to_f64, ParamScalar, Rational};
use crate::error::NumericError;
use crate::op::{DiffOp, GaugeTag};
use crate::pha::{ladder_energy, multidim_weight_check, PhaSignature, WeightReport};
use crate::states::{StateExpr, WeightType};

/// Tolerances of the embedded integrator. The step is also capped at half a
/// grid spacing, so in practice these only bite near a pole.
const ODE_RTOL: f64 = 1e-13;
const ODE_ATOL: f64 = 1e-13;

/// Run parameters for a single P4 trajectory. Every key is optional in JSON
/// and unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct P4Config {
    pub alpha: f64,
    pub beta: f64,
    pub x0: f64,
    pub f0: f64,
    pub fp0: f64,
    pub span: [f64; 2],
    pub h: f64,
    pub f_min: f64,
    /// Integration stops once `|f|` exceeds this, ahead of a movable pole.
    pub f_max: f64,
    pub tol_ode: f64,
    pub n_max: usize,
    /// Accuracy order of the central finite-difference stencils: 2, 4 or 6.
    pub fd_order: usize,
    pub kind: WeightType,
}

impl Default for P4Config {
    fn default() -> Self {
        P4Config {
            alpha: 0.0,
            beta: 2.0,
            x0: 0.0,
            f0: 1.0,
            fp0: 0.0,
            span: [-3.0, 3.0],
            h: 5e-4,
            f_min: 1e-6,
            f_max: 3.0,
            tol_ode: 1e-8,
            n_max: 2,
            fd_order: 4,
            kind: WeightType::Lowest,
        }
    }
}

impl P4Config {
    pub fn validate(&self) -> Result<(), NumericError> {
        let bad = |m: String| Err(NumericError::Config(m));
        let finite = [
            self.alpha,
            self.beta,
            self.x0,
            self.f0,
            self.fp0,
            self.span[0],
            self.span[1],
            self.h,
            self.f_min,
            self.f_max,
            self.tol_ode,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all numeric fields must be finite".into());
        }
        if self.h <= 0.0 {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if !(self.span[0] <= self.x0 && self.x0 <= self.span[1]) {
            return bad(format!("x0 = {} lies outside span {:?}", self.x0, self.span));
        }
        if self.f_min <= 0.0 || self.f_max <= self.f_min {
            return bad(format!("need 0 < f_min < f_max, got {} and {}", self.f_min, self.f_max));
        }
        if self.tol_ode <= 0.0 {
            return bad(format!("tol_ode must be positive, got {}", self.tol_ode));
        }
        if ![2, 4, 6].contains(&self.fd_order) {
            return bad(format!("fd_order must be 2, 4 or 6, got {}", self.fd_order));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, NumericError> {
        let cfg: P4Config = serde_json::from_str(s).map_err(|e| NumericError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Cumulative integrals of the superpotentials, zero at `x0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WIntegrals {
    pub w3: Vec<f64>,
    /// Only present for `beta < 0`, where `sqrt(-beta)` is real.
    pub w1: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct P4Trajectory {
    pub alpha: f64,
    pub beta: f64,
    pub h: f64,
    pub grid: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    /// Index of `x0` in `grid`.
    pub origin: usize,
    /// Where the leftward sweep stopped before reaching the span, if it did.
    pub singular_left: Option<f64>,
    pub singular_right: Option<f64>,
    pub w_integrals: WIntegrals,
}

impl P4Trajectory {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn domain(&self) -> [f64; 2] {
        [self.grid[0], self.grid[self.grid.len() - 1]]
    }

    /// The truncation point nearest to `x0`, if any.
    pub fn singular_at(&self) -> Option<f64> {
        let x0 = self.grid[self.origin];
        match (self.singular_left, self.singular_right) {
            (Some(l), Some(r)) => Some(if x0 - l <= r - x0 { l } else { r }),
            (l, r) => l.or(r),
        }
    }

    /// `V = -2f' + 4f^2 + 4xf + x^2 - 1` on the grid.
    pub fn potential(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let (x, f, fp) = (self.grid[k], self.f[k], self.fp[k]);
                -2.0 * fp + 4.0 * f * f + 4.0 * x * f + x * x - 1.0
            })
            .collect()
    }

    /// The real branch `sqrt(-beta)` used by the `W1` gauge.
    pub fn s_branch(&self) -> Complex64 {
        principal_s_branch(self.beta)
    }
}

/// `f''` from the P4 equation.
pub fn p4_rhs(alpha: f64, beta: f64, x: f64, f: f64, fp: f64) -> f64 {
    fp * fp / (2.0 * f) + 6.0 * f * f * f + 8.0 * x * f * f + 2.0 * (x * x - (1.0 + alpha)) * f + beta / (2.0 * f)
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

type State = [f64; 2];

/// One trial step; returns the 5th-order solution and the scaled error norm.
fn dopri_step(alpha: f64, beta: f64, x: f64, y: State, dx: f64) -> (State, f64) {
    let rhs = |x: f64, y: State| [y[1], p4_rhs(alpha, beta, x, y[0], y[1])];
    let mut k = [[0.0; 2]; 7];
    for s in 0..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            ys[0] += dx * A[s][j] * kj[0];
            ys[1] += dx * A[s][j] * kj[1];
        }
        k[s] = rhs(x + C[s] * dx, ys);
    }
    let mut y5 = y;
    let mut err: f64 = 0.0;
    for c in 0..2 {
        let mut e = 0.0;
        for s in 0..7 {
            y5[c] += dx * B5[s] * k[s][c];
            e += dx * (B5[s] - B4[s]) * k[s][c];
        }
        let scale = ODE_ATOL + ODE_RTOL * y[c].abs().max(y5[c].abs());
        err = err.max((e / scale).abs());
    }
    if !y5[0].is_finite() || !y5[1].is_finite() {
        err = f64::INFINITY;
    }
    (y5, err)
}

/// Advances from `x` to `target` with adaptive substeps no longer than
/// `max_step`. Returns `None` if the step collapses.
fn advance(alpha: f64, beta: f64, x: f64, y: State, target: f64, max_step: f64, dx_hint: &mut f64) -> Option<State> {
    let dir = (target - x).signum();
    let mut x = x;
    let mut y = y;
    let mut dx = dx_hint.abs().min(max_step);
    let floor = 1e-12 * (1.0 + target.abs());
    while (target - x) * dir > 0.0 {
        let remaining = (target - x).abs();
        let last = dx >= remaining;
        let step = if last { remaining } else { dx };
        let (y_new, err) = dopri_step(alpha, beta, x, y, dir * step);
        if err <= 1.0 {
            x = if last { target } else { x + dir * step };
            y = y_new;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        dx = (step * fac).min(max_step);
        if err > 1.0 && dx < floor {
            return None;
        }
        if !last || err > 1.0 {
            *dx_hint = dx;
        }
    }
    Some(y)
}

struct Sweep {
    /// Half-step nodes starting at `x0`; only nodes up to the last accepted
    /// full grid point are kept.
    xs: Vec<f64>,
    ys: Vec<State>,
    stopped: Option<f64>,
    collapsed: Option<(f64, f64)>,
}

fn sweep(cfg: &P4Config, dir: f64) -> Sweep {
    let half = cfg.h / 2.0;
    let end = if dir > 0.0 { cfg.span[1] } else { cfg.span[0] };
    let n_half = (((end - cfg.x0).abs() / half) + 1e-9).floor() as usize;
    let n_half = n_half - n_half % 2;
    let mut xs = vec![cfg.x0];
    let mut ys = vec![[cfg.f0, cfg.fp0]];
    let mut stopped = None;
    let mut collapsed = None;
    let mut hint = half;
    for k in 1..=n_half {
        let x_prev = xs[k - 1];
        let target = cfg.x0 + dir * (k as f64) * half;
        match advance(cfg.alpha, cfg.beta, x_prev, ys[k - 1], target, half, &mut hint) {
            Some(y) if y[0].abs() >= cfg.f_min && y[0].abs() <= cfg.f_max && y[1].is_finite() => {
                xs.push(target);
                ys.push(y);
            }
            Some(_) => {
                stopped = Some(target);
                break;
            }
            None => {
                stopped = Some(x_prev);
                collapsed = Some((x_prev, hint));
                break;
            }
        }
    }
    if xs.len() % 2 == 0 {
        xs.pop();
        ys.pop();
    }
    Sweep { xs, ys, stopped, collapsed }
}

/// Integrates the P4 equation both ways from `x0` on the grid `x0 + k h`,
/// stopping a direction at the first sample where `|f|` leaves
/// `[f_min, f_max]` or the adaptive step collapses.
pub fn integrate_p4(cfg: &P4Config) -> Result<P4Trajectory, NumericError> {
    cfg.validate()?;
    if cfg.f0.abs() < cfg.f_min {
        return Err(NumericError::ImmediateSingularity { f0: cfg.f0, f_min: cfg.f_min });
    }
    let (right, left) = rayon::join(|| sweep(cfg, 1.0), || sweep(cfg, -1.0));
    if right.xs.len() == 1 && left.xs.len() == 1 {
        if let Some((x, step)) = right.collapsed.or(left.collapsed) {
            return Err(NumericError::StepCollapse { x, step });
        }
    }

    // Stitch the half-step nodes into one ascending array.
    let mut hx: Vec<f64> = left.xs.iter().rev().copied().collect();
    let mut hy: Vec<State> = left.ys.iter().rev().copied().collect();
    let origin_half = hx.len() - 1;
    hx.extend_from_slice(&right.xs[1..]);
    hy.extend_from_slice(&right.ys[1..]);

    let grid: Vec<f64> = hx.iter().step_by(2).copied().collect();
    let f: Vec<f64> = hy.iter().step_by(2).map(|y| y[0]).collect();
    let fp: Vec<f64> = hy.iter().step_by(2).map(|y| y[1]).collect();
    let origin = origin_half / 2;

    let w3: Vec<f64> = hx.iter().zip(&hy).map(|(x, y)| -2.0 * y[0] - x).collect();
    let int_w3 = cumulative_simpson(&w3, cfg.h, origin);
    let int_w1 = if cfg.beta < 0.0 {
        let s = (-cfg.beta).sqrt();
        let w1: Vec<f64> = hy.iter().map(|y| -y[0] + (y[1] - s) / (2.0 * y[0])).collect();
        Some(cumulative_simpson(&w1, cfg.h, origin))
    } else {
        None
    };

    Ok(P4Trajectory {
        alpha: cfg.alpha,
        beta: cfg.beta,
        h: cfg.h,
        grid,
        f,
        fp,
        origin,
        singular_left: left.stopped,
        singular_right: right.stopped,
        w_integrals: WIntegrals { w3: int_w3, w1: int_w1 },
    })
}

/// Cumulative integral on the full grid from half-step samples `w`, zero at
/// full-grid index `origin`. Each grid interval uses Simpson's rule with its
/// midpoint sample.
fn cumulative_simpson(w: &[f64], h: f64, origin: usize) -> Vec<f64> {
    let n = w.len().div_ceil(2);
    let mut out = vec![0.0; n];
    let piece = |k: usize| h / 6.0 * (w[2 * k] + 4.0 * w[2 * k + 1] + w[2 * k + 2]);
    for k in origin + 1..n {
        out[k] = out[k - 1] + piece(k - 1);
    }
    for k in (0..origin).rev() {
        out[k] = out[k + 1] - piece(k);
    }
    out
}

/// Half-width of the central stencil of the given accuracy order for the
/// `deriv`-th derivative.
pub fn central_half_width(deriv: usize, order: usize) -> usize {
    (order + deriv - 1) / 2
}

/// Central finite-difference weights on offsets `-w..=w` for the `deriv`-th
/// derivative at unit spacing, solved exactly from the moment conditions.
pub fn fd_weights(deriv: usize, half_width: usize) -> Vec<f64> {
    let n = 2 * half_width + 1;
    let offsets: Vec<i64> = (0..n as i64).map(|k| k - half_width as i64).collect();
    let mut m: Vec<Vec<Rational>> = (0..n)
        .map(|row| {
            let mut r: Vec<Rational> =
                offsets.iter().map(|&k| Rational::from_integer(k.into()).pow(row as i32)).collect();
            let rhs = if row == deriv {
                (1..=deriv as i64).fold(Rational::one(), |acc, v| acc * Rational::from_integer(v.into()))
            } else {
                Rational::zero()
            };
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).expect("Vandermonde system is regular");
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (dst, src) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *dst = &*dst - &(&factor * src);
                }
            }
        }
    }
    m.iter().map(|row| rational_to_f64(&row[n])).collect()
}

/// Applies a central stencil at every index `w..len-w`.
fn stencil<T>(v: &[T], weights: &[f64], scale: f64) -> Vec<T>
where
    T: Copy + Zero + std::ops::Mul<f64, Output = T>,
{
    let w = weights.len() / 2;
    if v.len() < 2 * w + 1 {
        return Vec::new();
    }
    (w..v.len() - w)
        .map(|k| {
            let mut acc = T::zero();
            for (j, &c) in weights.iter().enumerate() {
                if c != 0.0 {
                    acc = acc + v[k + j - w] * (c * scale);
                }
            }
            acc
        })
        .collect()
}

/// `deriv`-th derivative of uniformly spaced samples at the interior indices
/// `w..len-w`, with `w = central_half_width(deriv, order)`.
pub fn fd_derivative<T>(v: &[T], h: f64, deriv: usize, order: usize) -> Vec<T>
where
    T: Copy + Zero + std::ops::Mul<f64, Output = T>,
{
    let w = central_half_width(deriv, order);
    stencil(v, &fd_weights(deriv, w), h.powi(-(deriv as i32)))
}

/// Largest `|f''_FD - rhs| / (1 + |f''_FD|)` over the interior, with `f''`
/// taken as the finite-difference derivative of the stored `f'`.
pub fn ode_residual(tr: &P4Trajectory, order: usize) -> Result<f64, NumericError> {
    let w = central_half_width(1, order);
    let need = 2 * w + 5;
    if tr.len() < need {
        return Err(NumericError::GridTooSmall { got: tr.len(), need });
    }
    let fpp = fd_derivative(&tr.fp, tr.h, 1, order);
    Ok(fpp
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let k = i + w;
            let rhs = p4_rhs(tr.alpha, tr.beta, tr.grid[k], tr.f[k], tr.fp[k]);
            (d - rhs).abs() / (1.0 + d.abs())
        })
        .fold(0.0, f64::max))
}

/// Consistency of the stored `f'` with the finite-difference derivative of
/// `f`, in the same relative form as [`ode_residual`].
pub fn slope_residual(tr: &P4Trajectory, order: usize) -> Result<f64, NumericError> {
    let w = central_half_width(1, order);
    let need = 2 * w + 5;
    if tr.len() < need {
        return Err(NumericError::GridTooSmall { got: tr.len(), need });
    }
    let d = fd_derivative(&tr.f, tr.h, 1, order);
    Ok(d.iter().enumerate().map(|(i, d)| (d - tr.fp[i + w]).abs() / (1.0 + d.abs())).fold(0.0, f64::max))
}

/// A state sampled on a trajectory grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridState {
    pub values: Vec<Complex64>,
    pub level: usize,
    pub weight_type: WeightType,
    pub energy: Complex64,
}

impl GridState {
    /// Largest `|Im v| / max |v|`.
    pub fn imag_ratio(&self) -> f64 {
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / scale
    }

    pub fn with_energy(&self, energy: Complex64) -> GridState {
        GridState { energy, ..self.clone() }
    }
}

/// Zero-mode energy of a weight chain: `0` for `exp(∫W3)`, `alpha - s` for
/// `exp(∫W1)`.
pub fn zero_mode_energy(kind: WeightType) -> ParamScalar {
    match kind {
        WeightType::Lowest => ParamScalar::zero(),
        WeightType::Highest => &ParamScalar::alpha() - &ParamScalar::s(),
    }
}

/// Exact ladder energy of a state at the trajectory's parameters.
pub fn state_energy(st: &StateExpr, tr: &P4Trajectory) -> Result<Complex64, NumericError> {
    let e = ladder_energy(
        &zero_mode_energy(st.weight_type),
        st.level,
        &PhaSignature::painleve_iv(),
        st.weight_type.direction(),
    );
    e.eval(tr.alpha, tr.beta, tr.s_branch()).map_err(|e| NumericError::Ring(e.into()))
}

/// Samples `exp(∫W) * body` on the grid.
pub fn eval_state(st: &StateExpr, tr: &P4Trajectory) -> Result<GridState, NumericError> {
    let integral = match st.gauge {
        GaugeTag::W3 => &tr.w_integrals.w3,
        GaugeTag::W1 => tr.w_integrals.w1.as_ref().ok_or(NumericError::GaugeIncompatible { beta: tr.beta })?,
    };
    let body = st.body.compile(tr.alpha, tr.beta, tr.s_branch());
    let values = (0..tr.len())
        .into_par_iter()
        .map(|k| {
            let b = body.eval(tr.grid[k], tr.f[k], tr.fp[k])?;
            Ok(b * integral[k].exp())
        })
        .collect::<Result<Vec<_>, crate::error::RingError>>()?;
    Ok(GridState { values, level: st.level, weight_type: st.weight_type, energy: state_energy(st, tr)? })
}

fn normalized(values: &[Complex64]) -> Vec<Complex64> {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return values.to_vec();
    }
    values.iter().map(|v| v / scale).collect()
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative l2 norm of `(-D^2 + V - E) psi` over interior points, with `D^2`
/// the central stencil of accuracy `order`.
pub fn eigen_residual(gs: &GridState, tr: &P4Trajectory, order: usize) -> Result<f64, NumericError> {
    let w = central_half_width(2, order);
    let need = 2 * w + 5;
    if gs.values.len() < need || tr.len() != gs.values.len() {
        return Err(NumericError::GridTooSmall { got: gs.values.len().min(tr.len()), need });
    }
    let v = normalized(&gs.values);
    let d2 = fd_derivative(&v, tr.h, 2, order);
    let pot = tr.potential();
    let r: Vec<Complex64> = d2
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let k = i + w;
            -d + v[k] * (pot[k] - gs.energy)
        })
        .collect();
    let denom = l2(&v[w..v.len() - w]);
    Ok(if denom == 0.0 { 0.0 } else { l2(&r) / denom })
}

/// `op` applied to grid samples through finite differences. The result
/// covers the indices `w..len-w` where `w` is the widest stencil used.
pub fn apply_op_fd(
    op: &DiffOp,
    values: &[Complex64],
    tr: &P4Trajectory,
    order: usize,
) -> Result<Vec<Complex64>, NumericError> {
    let top = op.order().unwrap_or(0);
    let w = (0..=top).map(|d| central_half_width(d, order)).max().unwrap_or(0);
    let need = 2 * w + 5;
    if values.len() < need {
        return Err(NumericError::GridTooSmall { got: values.len(), need });
    }
    let s = tr.s_branch();
    let n = values.len() - 2 * w;
    let mut out = vec![Complex64::zero(); n];
    for (d, coeff) in op.coeffs().iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        let deriv: Vec<Complex64> = if d == 0 {
            values.to_vec()
        } else {
            let wd = central_half_width(d, order);
            let mut full = vec![Complex64::zero(); wd];
            full.extend(fd_derivative(values, tr.h, d, order));
            full
        };
        let c = coeff.compile(tr.alpha, tr.beta, s);
        for (i, o) in out.iter_mut().enumerate() {
            let k = i + w;
            *o += c.eval(tr.grid[k], tr.f[k], tr.fp[k])? * deriv[k];
        }
    }
    Ok(out)
}

/// `||op psi|| / ||psi||` over the interior of the widest stencil, after
/// max-abs normalization.
pub fn annihilation_residual(
    op: &DiffOp,
    gs: &GridState,
    tr: &P4Trajectory,
    order: usize,
) -> Result<f64, NumericError> {
    let v = normalized(&gs.values);
    let r = apply_op_fd(op, &v, tr, order)?;
    let w = (v.len() - r.len()) / 2;
    let denom = l2(&v[w..v.len() - w]);
    Ok(if denom == 0.0 { 0.0 } else { l2(&r) / denom })
}

/// CSV with columns `x, f, fp, intW3[, intW1], state_0, ...`; states are
/// written as their real parts.
pub fn trajectory_csv(tr: &P4Trajectory, states: &[GridState]) -> String {
    let mut out = String::from("x,f,fp,intW3");
    if tr.w_integrals.w1.is_some() {
        out.push_str(",intW1");
    }
    for (i, _) in states.iter().enumerate() {
        out.push_str(&format!(",state_{i}"));
    }
    out.push('\n');
    for k in 0..tr.len() {
        out.push_str(&format!("{:.12e},{:.12e},{:.12e},{:.12e}", tr.grid[k], tr.f[k], tr.fp[k], tr.w_integrals.w3[k]));
        if let Some(w1) = &tr.w_integrals.w1 {
            out.push_str(&format!(",{:.12e}", w1[k]));
        }
        for st in states {
            out.push_str(&format!(",{:.12e}", st.values[k].re));
        }
        out.push('\n');
    }
    out
}

/// Axis defaults for multi-dimensional runs. The zero-mode check applies the
/// third-order `c` by finite differences; at `h = 5e-4` the rounding of the
/// samples alone, amplified by a third-derivative stencil, is about `2e-6`,
/// so the axes use a coarser grid with the sixth-order stencils.
pub fn multidim_axis_default() -> P4Config {
    P4Config { h: 1e-3, fd_order: 6, ..P4Config::default() }
}

/// Per-axis data of a separable multi-dimensional run.
#[derive(Clone, Debug, Serialize)]
pub struct AxisSummary {
    pub index: usize,
    pub alpha: f64,
    pub beta: f64,
    pub domain: [f64; 2],
    pub points: usize,
    pub singular_at: Option<f64>,
    /// `||c_i psi_0|| / ||psi_0||` through the finite-difference `c_i`. On
    /// the product grid the other factors cancel from the ratio, so this is
    /// also the relative size of `c_i` applied to the product zero mode.
    pub zero_mode_annihilation: f64,
    pub zero_mode_eigen_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyRow {
    pub levels: Vec<usize>,
    pub energy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MultidimReport {
    pub axes: Vec<AxisSummary>,
    pub weights: WeightReport,
    pub energies: Vec<EnergyRow>,
    #[serde(skip)]
    pub trajectories: Vec<P4Trajectory>,
    #[serde(skip)]
    pub zero_modes: Vec<GridState>,
}

/// Energy of the product of lowest-weight states with the given levels.
pub fn product_energy(levels: &[usize]) -> Rational {
    let sig = PhaSignature::painleve_iv();
    levels
        .iter()
        .map(|&n| {
            ladder_energy(&zero_mode_energy(WeightType::Lowest), n, &sig, WeightType::Lowest.direction())
                .as_rational()
                .expect("lowest-weight energies are rational")
        })
        .sum()
}

/// Integrates each axis, checks the per-axis zero modes against the
/// finite-difference `c`, runs the weight check on `c_i c_j†` and tabulates
/// product energies for all levels up to `n_max` on every axis.
pub fn multidim_assemble(axes: &[P4Config], n_max: usize, c: &DiffOp) -> Result<MultidimReport, NumericError> {
    if axes.len() < 2 {
        return Err(NumericError::Config(format!("need at least 2 axes, got {}", axes.len())));
    }
    let per_axis = axes
        .par_iter()
        .enumerate()
        .map(|(index, cfg)| {
            let tr = integrate_p4(cfg)?;
            let zero = StateExpr {
                gauge: GaugeTag::W3,
                level: 0,
                weight_type: WeightType::Lowest,
                body: crate::ring::RingElem::one(),
            };
            let gs = eval_state(&zero, &tr)?;
            let summary = AxisSummary {
                index,
                alpha: cfg.alpha,
                beta: cfg.beta,
                domain: tr.domain(),
                points: tr.len(),
                singular_at: tr.singular_at(),
                zero_mode_annihilation: annihilation_residual(c, &gs, &tr, cfg.fd_order)?,
                zero_mode_eigen_residual: eigen_residual(&gs, &tr, cfg.fd_order)?,
            };
            Ok((summary, tr, gs))
        })
        .collect::<Result<Vec<_>, NumericError>>()?;

    let sigs = vec![PhaSignature::painleve_iv(); axes.len()];
    let weights = multidim_weight_check(&sigs).map_err(|e| NumericError::Config(e.to_string()))?;

    let mut energies = Vec::new();
    let mut levels = vec![0usize; axes.len()];
    loop {
        energies.push(EnergyRow { levels: levels.clone(), energy: rational_to_f64(&product_energy(&levels)) });
        let mut i = axes.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if levels[i] < n_max {
                levels[i] += 1;
                levels[i + 1..].iter_mut().for_each(|l| *l = 0);
                break;
            }
            if i == 0 {
                i = usize::MAX;
                break;
            }
        }
        if i == usize::MAX || (n_max == 0) {
            break;
        }
    }

    let mut axes_out = Vec::new();
    let mut trajectories = Vec::new();
    let mut zero_modes = Vec::new();
    for (s, t, g) in per_axis {
        axes_out.push(s);
        trajectories.push(t);
        zero_modes.push(g);
    }
    Ok(MultidimReport { axes: axes_out, weights, energies, trajectories, zero_modes })
}

impl MultidimReport {
    /// Product zero mode `prod_i psi_{i;0}(x_i)` on every `stride`-th grid
    /// point of each axis, as CSV with columns `x_1, ..., x_N, psi0`.
    pub fn product_zero_mode_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let n = self.trajectories.len();
        let header: Vec<String> = (1..=n).map(|i| format!("x_{i}")).collect();
        let mut out = format!("{},psi0\n", header.join(","));
        let idx: Vec<Vec<usize>> = self.trajectories.iter().map(|t| (0..t.len()).step_by(stride).collect()).collect();
        let mut pos = vec![0usize; n];
        'outer: loop {
            let mut value = 1.0;
            let mut xs = Vec::with_capacity(n);
            for a in 0..n {
                let k = idx[a][pos[a]];
                xs.push(format!("{:.6e}", self.trajectories[a].grid[k]));
                value *= self.zero_modes[a].values[k].re;
            }
            out.push_str(&format!("{},{:.12e}\n", xs.join(","), value));
            let mut a = n;
            while a > 0 {
                a -= 1;
                pos[a] += 1;
                if pos[a] < idx[a].len() {
                    continue 'outer;
                }
                pos[a] = 0;
            }
            break;
        }
        out
    }
}
