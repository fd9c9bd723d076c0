//! Integral curves of the scaled gradient field `∇F / ‖∇F‖²`, along which `F` grows at unit rate.

use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::field::GradientField;
use crate::kernel::MAX_DIM;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Fraction of `|θ|` covered by one RK4 step.
    pub step_frac: f64,
    /// Gradient norms below this stop the trace.
    pub grad_floor: f64,
    pub max_steps: usize,
    pub level_tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            step_frac: 1.0 / 64.0,
            grad_floor: 1e-3,
            max_steps: 4096,
            level_tol: 1e-8,
        }
    }
}

impl FlowOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = self.step_frac > 0.0 && self.grad_floor > 0.0 && self.level_tol > 0.0 && self.max_steps > 0;
        if !positive {
            return Err(invalid("flow options must all be positive"));
        }
        if self.step_frac > 0.125 {
            return Err(invalid(format!("step_frac {} exceeds 1/8", self.step_frac)));
        }
        Ok(())
    }

    fn rk4_steps(&self) -> usize {
        (1.0 / self.step_frac).round().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowStatus {
    Hit,
    GradientFloor,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTrace {
    pub seed: Vec<f64>,
    pub level: f64,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    /// Field value at each stored position.
    pub values: Vec<f64>,
    pub status: FlowStatus,
    /// `c - F(seed)`; the realized hitting time when `status` is `Hit`.
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HitPoint {
    pub theta: f64,
    pub point: Vec<f64>,
    /// True when the trace did not hit and the closest stored point was used.
    pub fallback: bool,
}

struct Scaled<'a, F: ?Sized> {
    field: &'a F,
    floor: f64,
}

impl<F: GradientField + ?Sized> Scaled<'_, F> {
    /// Writes `∇F/‖∇F‖²` into `v`; returns `F` and `‖∇F‖`.
    fn eval(&self, x: &[f64], v: &mut [f64]) -> Result<(f64, f64)> {
        let f = self.field.value_and_gradient(x, v);
        if !f.is_finite() || v.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("field or gradient at {x:?}")));
        }
        let n2: f64 = v.iter().map(|g| g * g).sum();
        let norm = n2.sqrt();
        if norm >= self.floor {
            v.iter_mut().for_each(|g| *g /= n2);
        }
        Ok((f, norm))
    }
}

/// Follows the scaled gradient flow from `x0` until `field = c`.
pub fn trace_to_level<F: GradientField + ?Sized>(
    field: &F,
    x0: &[f64],
    c: f64,
    opts: &FlowOptions,
) -> Result<CurveTrace> {
    opts.validate()?;
    let d = x0.len();
    if d == 0 || d > MAX_DIM || d != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: d,
        });
    }
    let flow = Scaled {
        field,
        floor: opts.grad_floor,
    };
    let mut k1 = [0.0; MAX_DIM];
    let mut k2 = [0.0; MAX_DIM];
    let mut k3 = [0.0; MAX_DIM];
    let mut k4 = [0.0; MAX_DIM];
    let mut tmp = [0.0; MAX_DIM];
    let mut x = [0.0; MAX_DIM];
    x[..d].copy_from_slice(x0);

    let (f0, norm0) = flow.eval(&x[..d], &mut k1[..d])?;
    let theta = c - f0;
    let mut tr = CurveTrace {
        seed: x0.to_vec(),
        level: c,
        times: vec![0.0],
        positions: vec![x0.to_vec()],
        values: vec![f0],
        status: FlowStatus::Hit,
        theta,
    };
    if theta.abs() <= opts.level_tol {
        return Ok(tr);
    }
    if norm0 < opts.grad_floor {
        tr.status = FlowStatus::GradientFloor;
        return Ok(tr);
    }
    let steps = opts.rk4_steps();
    if steps > opts.max_steps {
        tr.status = FlowStatus::BudgetExceeded;
        return Ok(tr);
    }
    let dt = theta / steps as f64;
    let mut f = f0;
    for s in 1..=steps {
        let stages = [(&mut k2, 0.5), (&mut k3, 0.5), (&mut k4, 1.0)];
        let mut prev: [f64; MAX_DIM] = k1;
        for (k, w) in stages {
            for j in 0..d {
                tmp[j] = x[j] + w * dt * prev[j];
            }
            let (_, norm) = flow.eval(&tmp[..d], &mut k[..d])?;
            if norm < opts.grad_floor {
                tr.status = FlowStatus::GradientFloor;
                return Ok(tr);
            }
            prev = *k;
        }
        for j in 0..d {
            x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let (f_new, norm) = flow.eval(&x[..d], &mut k1[..d])?;
        tr.times.push(s as f64 * dt);
        tr.positions.push(x[..d].to_vec());
        tr.values.push(f_new);
        // Away from critical points each step gains `dt` in height; a large miss means
        // the curve ran through a stationary point.
        if norm < opts.grad_floor || ((f_new - f) - dt).abs() > 0.5 * dt.abs() {
            tr.status = FlowStatus::GradientFloor;
            return Ok(tr);
        }
        f = f_new;
    }

    // Newton polish along the gradient direction.
    let budget = opts.max_steps - steps;
    for _ in 0..budget.min(50) {
        let r = c - f;
        if r.abs() <= opts.level_tol {
            let last = tr.positions.len() - 1;
            tr.positions[last] = x[..d].to_vec();
            tr.values[last] = f;
            return Ok(tr);
        }
        // k1 holds ∇F/‖∇F‖² at x.
        for j in 0..d {
            x[j] += r * k1[j];
        }
        let (f_new, norm) = flow.eval(&x[..d], &mut k1[..d])?;
        if norm < opts.grad_floor {
            tr.status = FlowStatus::GradientFloor;
            return Ok(tr);
        }
        f = f_new;
    }
    if (c - f).abs() <= opts.level_tol {
        let last = tr.positions.len() - 1;
        tr.positions[last] = x[..d].to_vec();
        tr.values[last] = f;
        return Ok(tr);
    }
    tr.status = FlowStatus::BudgetExceeded;
    Ok(tr)
}

/// The hitting time and point; non-hit traces fall back to the stored point closest in value to the level.
pub fn hitting_point(tr: &CurveTrace) -> Result<HitPoint> {
    if tr.positions.is_empty() {
        return Err(invalid("empty trace"));
    }
    if tr.status == FlowStatus::Hit {
        return Ok(HitPoint {
            theta: tr.theta,
            point: tr.positions.last().expect("nonempty").clone(),
            fallback: false,
        });
    }
    let mut best = 0;
    for (i, v) in tr.values.iter().enumerate() {
        if (v - tr.level).abs() < (tr.values[best] - tr.level).abs() {
            best = i;
        }
    }
    Ok(HitPoint {
        theta: tr.times[best],
        point: tr.positions[best].clone(),
        fallback: true,
    })
}

/// Writes `t,x,y,...,f` rows.
pub fn write_trace_csv<W: Write>(tr: &CurveTrace, mut out: W) -> Result<()> {
    let axes: Vec<String> = (0..tr.seed.len()).map(|j| ["x", "y", "z"][j].to_string()).collect();
    writeln!(out, "t,{},f", axes.join(","))?;
    for ((t, p), f) in tr.times.iter().zip(&tr.positions).zip(&tr.values) {
        let coords: Vec<String> = p.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(out, "{t:.17e},{},{f:.17e}", coords.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FnGradientField;

    fn bowl() -> impl GradientField {
        FnGradientField::new(
            2,
            |x: &[f64]| 1.0 - x[0] * x[0] - x[1] * x[1],
            |x: &[f64], g: &mut [f64]| {
                g[0] = -2.0 * x[0];
                g[1] = -2.0 * x[1];
            },
        )
    }

    #[test]
    fn radial_flow_hits_circle() {
        let tr = trace_to_level(&bowl(), &[0.8, 0.0], 0.75, &FlowOptions::default()).unwrap();
        assert_eq!(tr.status, FlowStatus::Hit);
        assert!((tr.theta - 0.39).abs() < 1e-15);
        let hp = hitting_point(&tr).unwrap();
        assert!((hp.point[0] - 0.5).abs() < 1e-8 && hp.point[1].abs() < 1e-12);
        assert!(!hp.fallback);
    }

    #[test]
    fn seed_on_level() {
        let tr = trace_to_level(&bowl(), &[0.5, 0.0], 0.75, &FlowOptions::default()).unwrap();
        assert_eq!(tr.status, FlowStatus::Hit);
        assert_eq!(tr.theta, 0.0);
        assert_eq!(tr.positions, vec![vec![0.5, 0.0]]);
    }

    #[test]
    fn sign_of_theta() {
        let o = FlowOptions::default();
        assert!(trace_to_level(&bowl(), &[0.8, 0.1], 0.75, &o).unwrap().theta > 0.0);
        assert!(trace_to_level(&bowl(), &[0.1, 0.2], 0.75, &o).unwrap().theta < 0.0);
    }

    #[test]
    fn step_frac_bound() {
        let o = FlowOptions {
            step_frac: 0.25,
            ..FlowOptions::default()
        };
        assert!(trace_to_level(&bowl(), &[0.8, 0.0], 0.75, &o).is_err());
    }

    #[test]
    fn non_finite_gradient_is_an_error() {
        let f = FnGradientField::new(1, |_: &[f64]| 0.0, |_: &[f64], g: &mut [f64]| g[0] = f64::NAN);
        assert!(trace_to_level(&f, &[0.0], 1.0, &FlowOptions::default()).is_err());
    }
}
