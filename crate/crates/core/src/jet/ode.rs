//! Adaptive Dormand–Prince 5(4) integration over jet-valued states.
//!
//! States are vectors of [`Jet3`]; the jet slots carry sensitivities with
//! respect to parameters (for example the transverse coordinate of a profile
//! PDE), so the same integrator serves both scalar profiles and
//! parameter-dependent ones. Dense output uses the standard fourth-order
//! continuous extension of the method.

use crate::error::{Error, Result};

use super::Jet3;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dense-output weights of the continuous extension.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Mixed absolute/relative tolerance per jet coefficient.
    pub tol: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            tol: 1e-10,
            initial_step: None,
            max_steps: 200_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Interpolation data for one accepted step.
#[derive(Debug, Clone)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    rcont: [Vec<Jet3>; 5],
}

impl DenseSegment {
    fn eval(&self, t: f64) -> Vec<Jet3> {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        (0..r1.len())
            .map(|i| r1[i] + (r2[i] + (r3[i] + (r4[i] + r5[i] * theta1) * theta) * theta1) * theta)
            .collect()
    }
}

/// Accepted steps of an integration together with their dense output.
#[derive(Debug, Clone)]
pub struct JetTrajectory {
    grid: Vec<f64>,
    states: Vec<Vec<Jet3>>,
    segments: Vec<DenseSegment>,
    interpolation_order: usize,
}

impl JetTrajectory {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn states(&self) -> &[Vec<Jet3>] {
        &self.states
    }

    pub fn interpolation_order(&self) -> usize {
        self.interpolation_order
    }

    pub fn start(&self) -> f64 {
        self.grid[0]
    }

    pub fn end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn final_state(&self) -> &[Jet3] {
        self.states.last().unwrap()
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.start() <= self.end() {
            (self.start(), self.end())
        } else {
            (self.end(), self.start())
        };
        (lo..=hi).contains(&t)
    }

    /// State at `t`. Grid abscissae return the stored states exactly.
    pub fn eval(&self, t: f64) -> Result<Vec<Jet3>> {
        if !self.contains(t) {
            return Err(Error::Argument(format!(
                "t = {t} outside trajectory span [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        let forward = self.end() >= self.start();
        // first grid index strictly past t in integration direction
        let idx = self
            .grid
            .partition_point(|&g| if forward { g <= t } else { g >= t });
        if idx > 0 && self.grid[idx - 1] == t {
            return Ok(self.states[idx - 1].clone());
        }
        let seg = idx.clamp(1, self.segments.len()) - 1;
        Ok(self.segments[seg].eval(t))
    }
}

fn combine(y: &[Jet3], h: f64, stages: &[Vec<Jet3>], weights: &[f64]) -> Vec<Jet3> {
    let mut out = y.to_vec();
    for (k, &w) in stages.iter().zip(weights.iter()) {
        if w == 0.0 {
            continue;
        }
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += *ki * (h * w);
        }
    }
    out
}

fn all_finite(v: &[Jet3]) -> bool {
    v.iter().all(Jet3::is_finite)
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (either direction).
///
/// A failing or non-finite right-hand side shrinks the step; when the step
/// underflows the error reports the last abscissa that was reached.
pub fn integrate<F>(
    rhs: F,
    t0: f64,
    y0: Vec<Jet3>,
    t_end: f64,
    opts: OdeOptions,
) -> Result<JetTrajectory>
where
    F: Fn(f64, &[Jet3]) -> Result<Vec<Jet3>>,
{
    if !(opts.tol > 0.0) {
        return Err(Error::Argument(format!("ODE tolerance must be > 0, got {}", opts.tol)));
    }
    let span = t_end - t0;
    let dir = if span >= 0.0 { 1.0 } else { -1.0 };
    let mut traj = JetTrajectory {
        grid: vec![t0],
        states: vec![y0.clone()],
        segments: Vec::new(),
        interpolation_order: 4,
    };
    if span == 0.0 {
        return Ok(traj);
    }

    let min_step = 1e-13 * t0.abs().max(t_end.abs()).max(1.0);
    let mut h = opts
        .initial_step
        .unwrap_or_else(|| (span.abs() * 1e-3).clamp(1e-6, 1e-2))
        .min(span.abs())
        * dir;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = match rhs(t, &y) {
        Ok(k) if all_finite(&k) => k,
        Ok(_) => {
            return Err(Error::Integration {
                last_valid: t,
                reason: "non-finite right-hand side at the initial point".into(),
            })
        }
        Err(e) => {
            return Err(Error::Integration {
                last_valid: t,
                reason: e.to_string(),
            })
        }
    };

    let mut steps = 0;
    while (t_end - t) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Integration {
                last_valid: t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }

        match try_step(&rhs, t, &y, &k1, h, opts.tol) {
            Ok(Some((y_new, k7, err, rcont))) => {
                if err <= 1.0 {
                    let t_new = if ((t + h) - t_end).abs() <= min_step { t_end } else { t + h };
                    traj.segments.push(DenseSegment { t0: t, h, rcont });
                    traj.grid.push(t_new);
                    traj.states.push(y_new.clone());
                    t = t_new;
                    y = y_new;
                    k1 = k7;
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= if err <= 1.0 { fac } else { fac.min(1.0) };
            }
            Ok(None) => h *= 0.5,
            Err(_) => h *= 0.25,
        }
        if h.abs() < min_step && (t_end - t) * dir > min_step {
            return Err(Error::Integration {
                last_valid: t,
                reason: "step size underflow near a singularity of the right-hand side".into(),
            });
        }
    }
    Ok(traj)
}

/// Integrates through the abscissae of `grid` (monotone, starting at the
/// initial point) with one step per interval and no error control.
///
/// With a grid shared across initial data, the result depends smoothly on
/// that data, so derivatives carried in the jets match finite differences of
/// the discrete solution.
pub fn integrate_on_grid<F>(rhs: F, y0: Vec<Jet3>, grid: &[f64]) -> Result<JetTrajectory>
where
    F: Fn(f64, &[Jet3]) -> Result<Vec<Jet3>>,
{
    let Some(&t0) = grid.first() else {
        return Err(Error::Argument("empty integration grid".into()));
    };
    let mut traj = JetTrajectory {
        grid: vec![t0],
        states: vec![y0.clone()],
        segments: Vec::new(),
        interpolation_order: 4,
    };
    let fail = |t: f64, reason: String| Error::Integration { last_valid: t, reason };
    let mut y = y0;
    let mut k1 = rhs(t0, &y).map_err(|e| fail(t0, e.to_string()))?;
    for w in grid.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        match try_step(&rhs, t, &y, &k1, h, f64::INFINITY) {
            Ok(Some((y_new, k7, _, rcont))) => {
                traj.segments.push(DenseSegment { t0: t, h, rcont });
                traj.grid.push(w[1]);
                traj.states.push(y_new.clone());
                y = y_new;
                k1 = k7;
            }
            Ok(None) => return Err(fail(t, "non-finite state on the fixed grid".into())),
            Err(e) => return Err(fail(t, e.to_string())),
        }
    }
    Ok(traj)
}

type StepOutput = (Vec<Jet3>, Vec<Jet3>, f64, [Vec<Jet3>; 5]);

fn try_step<F>(
    rhs: &F,
    t: f64,
    y: &[Jet3],
    k1: &[Jet3],
    h: f64,
    tol: f64,
) -> Result<Option<StepOutput>>
where
    F: Fn(f64, &[Jet3]) -> Result<Vec<Jet3>>,
{
    let mut k: Vec<Vec<Jet3>> = vec![k1.to_vec()];
    for s in 1..7 {
        let ys = combine(y, h, &k, &A[s][..s]);
        let ks = rhs(t + C[s] * h, &ys)?;
        if !all_finite(&ks) {
            return Ok(None);
        }
        k.push(ks);
    }
    // FSAL: the seventh stage is evaluated at the new solution
    let y_new = combine(y, h, &k[..6], &A[6]);
    if !all_finite(&y_new) {
        return Ok(None);
    }

    let mut err: f64 = 0.0;
    for i in 0..y.len() {
        let mut e = Jet3::zero();
        for (s, &w) in E.iter().enumerate() {
            if w != 0.0 {
                e += k[s][i] * (h * w);
            }
        }
        for ((ec, yc), nc) in e.taylor().iter().zip(y[i].taylor()).zip(y_new[i].taylor()) {
            let sc = tol * (1.0 + yc.abs().max(nc.abs()));
            err = err.max(ec.abs() / sc);
        }
    }

    let ydiff: Vec<Jet3> = y_new.iter().zip(y).map(|(a, b)| *a - *b).collect();
    let bspl: Vec<Jet3> = (0..y.len()).map(|i| k[0][i] * h - ydiff[i]).collect();
    let r4: Vec<Jet3> = (0..y.len())
        .map(|i| ydiff[i] - k[6][i] * h - bspl[i])
        .collect();
    let r5 = combine(&vec![Jet3::zero(); y.len()], h, &k, &D);
    let k7 = k.pop().unwrap();
    Ok(Some((y_new, k7, err, [y.to_vec(), ydiff, bspl, r4, r5])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Vec<Jet3> {
        vec![Jet3::constant(v)]
    }

    #[test]
    fn exponential_growth() {
        let traj = integrate(|_, y| Ok(y.to_vec()), 0.0, scalar(1.0), 1.0, OdeOptions::default())
            .unwrap();
        assert!((traj.final_state()[0].value() - std::f64::consts::E).abs() < 1e-9);
        // dense output between grid points
        let mid = traj.eval(0.5).unwrap()[0].value();
        assert!((mid - 0.5f64.exp()).abs() < 1e-9, "{mid}");
    }

    #[test]
    fn dense_output_is_exact_on_grid() {
        let traj = integrate(|_, y| Ok(y.to_vec()), 0.0, scalar(1.0), 2.0, OdeOptions::default())
            .unwrap();
        for (t, s) in traj.grid().iter().zip(traj.states()) {
            assert_eq!(traj.eval(*t).unwrap()[0], s[0]);
        }
        assert!(traj.eval(2.5).is_err());
    }

    #[test]
    fn backward_integration() {
        let traj =
            integrate(|_, y| Ok(vec![-y[0]]), 1.0, scalar(1.0), -1.0, OdeOptions::default())
                .unwrap();
        assert!((traj.final_state()[0].value() - 2f64.exp()).abs() < 1e-9);
        assert!((traj.eval(0.0).unwrap()[0].value() - 1f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn parameter_sensitivity_is_carried_by_jets() {
        // y' = p y, y(0) = 1 with p = 0.7 + dp: ∂y(1)/∂p = e^p
        let p = Jet3::variable(&[0.7, 0.0, 0.0, 0.0], 0).unwrap();
        let traj =
            integrate(move |_, y| Ok(vec![y[0] * p]), 0.0, scalar(1.0), 1.0, OdeOptions::default())
                .unwrap();
        let y = traj.final_state()[0];
        assert!((y.value() - 0.7f64.exp()).abs() < 1e-9);
        assert!((y.d(0) - 0.7f64.exp()).abs() < 1e-9);
        assert!((y.partial(&[0, 0, 0]) - 0.7f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn blow_up_reports_last_valid_abscissa() {
        // y' = y², y(0) = 1 blows up at t = 1
        let err = integrate(|_, y| Ok(vec![y[0] * y[0]]), 0.0, scalar(1.0), 2.0, OdeOptions::default())
            .unwrap_err();
        match err {
            Error::Integration { last_valid, .. } => assert!(last_valid > 0.9 && last_valid < 1.0),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(integrate(|_, y| Ok(y.to_vec()), 0.0, scalar(1.0), 1.0, OdeOptions::with_tol(0.0))
            .is_err());
    }
}
