//! Profile functions: closed-form expressions and ODE-defined profiles.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::jet::{integrate, integrate_on_grid, Jet3, JetTrajectory, OdeOptions};
use crate::Point;

use super::expr::Expr;

/// Default tolerance of every profile integration.
pub const PROFILE_TOL: f64 = 1e-13;

type Derivs = dyn Fn(f64, f64) -> [f64; 4] + Send + Sync;

/// A second-order profile `u'' = h(u)` stored as `(u, u')` trajectories on
/// both sides of the initial abscissa.
#[derive(Clone)]
pub struct OdeProfile {
    pub t0: f64,
    pub forward: Option<Arc<JetTrajectory>>,
    pub backward: Option<Arc<JetTrajectory>>,
    /// `(u, u') ↦ (u, u', u'', u''')` from the differentiated ODE.
    derivs: Arc<Derivs>,
    /// Residual of the defining relation at `(u, u')`, used for diagnostics.
    residual: Arc<Derivs>,
}

#[derive(Clone)]
pub enum ProfileFunction {
    Closed { source: String, expr: Expr },
    Ode(OdeProfile),
}

impl fmt::Debug for ProfileFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileFunction::Closed { source, .. } => write!(f, "Closed({source})"),
            ProfileFunction::Ode(p) => {
                let (lo, hi) = p.domain();
                write!(f, "Ode(t0 = {}, domain = [{lo}, {hi}])", p.t0)
            }
        }
    }
}

impl OdeProfile {
    pub fn domain(&self) -> (f64, f64) {
        let lo = self.backward.as_ref().map_or(self.t0, |t| t.end());
        let hi = self.forward.as_ref().map_or(self.t0, |t| t.end());
        (lo, hi)
    }

    fn state(&self, t: f64) -> Result<(f64, f64)> {
        let traj = if t >= self.t0 { &self.forward } else { &self.backward };
        let (lo, hi) = self.domain();
        let traj = traj.as_ref().filter(|tr| tr.contains(t)).ok_or_else(|| {
            Error::Argument(format!("profile queried at {t} outside its domain [{lo}, {hi}]"))
        })?;
        let s = traj.eval(t)?;
        Ok((s[0].value(), s[1].value()))
    }

    /// Value of the defining relation's residual at `t` (first-integral or ODE form).
    pub fn relation_residual(&self, t: f64) -> Result<f64> {
        let (u, up) = self.state(t)?;
        Ok((self.residual)(u, up)[0])
    }
}

impl ProfileFunction {
    pub fn closed(source: &str) -> Result<Self> {
        Ok(ProfileFunction::Closed {
            source: source.to_string(),
            expr: Expr::parse(source)?,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            ProfileFunction::Closed { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            ProfileFunction::Ode(p) => p.domain(),
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.domain();
        t >= lo && t <= hi
    }

    /// Value and first three derivatives at `t`.
    pub fn taylor(&self, t: f64) -> Result<[f64; 4]> {
        match self {
            ProfileFunction::Closed { expr, .. } => {
                let p: Point = [t, 0.0, 0.0, 0.0];
                let j = expr.eval_jet(&Jet3::variable(&p, 0)?)?;
                Ok([j.value(), j.d(0), j.partial(&[0, 0]), j.partial(&[0, 0, 0])])
            }
            ProfileFunction::Ode(p) => {
                let (u, up) = p.state(t)?;
                Ok((p.derivs)(u, up))
            }
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.taylor(t)?[0])
    }

    /// The profile composed with a coordinate jet.
    pub fn jet(&self, arg: &Jet3) -> Result<Jet3> {
        match self {
            ProfileFunction::Closed { expr, .. } => expr.eval_jet(arg),
            ProfileFunction::Ode(_) => Ok(arg.compose(self.taylor(arg.value())?)),
        }
    }

    /// Derivative profile; only closed forms are supported.
    pub fn derivative(&self) -> Result<Self> {
        match self {
            ProfileFunction::Closed { source, expr } => Ok(ProfileFunction::Closed {
                source: format!("d/dt[{source}]"),
                expr: expr.derivative(),
            }),
            ProfileFunction::Ode(_) => Err(Error::Argument("derivative of an ODE profile".into())),
        }
    }
}

fn solve_second_order<H>(
    h: H,
    t0: f64,
    u0: f64,
    up0: f64,
    span: (f64, f64),
    tol: f64,
) -> Result<Sweeps<Arc<JetTrajectory>>>
where
    H: Fn(f64) -> f64 + Copy,
{
    let rhs = move |_t: f64, y: &[Jet3]| -> Result<Vec<Jet3>> {
        let u = y[0].value();
        Ok(vec![y[1], Jet3::constant(h(u))])
    };
    let y0 = vec![Jet3::constant(u0), Jet3::constant(up0)];
    let opts = OdeOptions::with_tol(tol);
    let forward = if span.1 > t0 {
        Some(Arc::new(integrate(rhs, t0, y0.clone(), span.1, opts)?))
    } else {
        None
    };
    let backward = if span.0 < t0 {
        Some(Arc::new(integrate(rhs, t0, y0, span.0, opts)?))
    } else {
        None
    };
    Ok((forward, backward))
}

/// Profile `φ` with `φ'² = φ⁴ + (a+b)φ² + ab`, `φ(0) = φ₀` and
/// `φ'(0) = sign·√(φ₀⁴ + (a+b)φ₀² + ab)`, integrated in the second-order form
/// `φ'' = 2φ³ + (a+b)φ`.
pub fn solve_phi_profile(a: f64, b: f64, phi0: f64, sign: f64, span: (f64, f64)) -> Result<ProfileFunction> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::construction("a > 0 and b > 0", None));
    }
    let s = a + b;
    let radicand = phi0.powi(4) + s * phi0 * phi0 + a * b;
    let up0 = sign.signum() * radicand.sqrt();
    let (forward, backward) = solve_second_order(move |u| 2.0 * u * u * u + s * u, 0.0, phi0, up0, span, PROFILE_TOL)?;
    Ok(ProfileFunction::Ode(OdeProfile {
        t0: 0.0,
        forward,
        backward,
        derivs: Arc::new(move |u, up| [u, up, 2.0 * u * u * u + s * u, (6.0 * u * u + s) * up]),
        residual: Arc::new(move |u, up| {
            let r = up * up - (u.powi(4) + s * u * u + a * b);
            [r / (1.0 + up * up), 0.0, 0.0, 0.0]
        }),
    }))
}

/// Profile `F` with `F'' = 2K_N F³ + cF`, `F(0) = F₀`, `F'(0) = F₀'`.
pub fn solve_f_profile(k_n: f64, c: f64, f0: f64, fp0: f64, span: (f64, f64)) -> Result<ProfileFunction> {
    if !(f0 > 0.0) {
        return Err(Error::construction("F(0) > 0", None));
    }
    let (forward, backward) =
        solve_second_order(move |u| 2.0 * k_n * u * u * u + c * u, 0.0, f0, fp0, span, PROFILE_TOL)?;
    let profile = OdeProfile {
        t0: 0.0,
        forward,
        backward,
        derivs: Arc::new(move |u, up| [u, up, 2.0 * k_n * u * u * u + c * u, (6.0 * k_n * u * u + c) * up]),
        // first integral F'² = K_N F⁴ + c F² + E₀
        residual: Arc::new(move |u, up| {
            let e0 = fp0 * fp0 - k_n * f0.powi(4) - c * f0 * f0;
            let r = up * up - (k_n * u.powi(4) + c * u * u + e0);
            [r / (1.0 + up * up), 0.0, 0.0, 0.0]
        }),
    };
    let (lo, hi) = profile.domain();
    for t in [lo, hi] {
        let (u, _) = profile.state(t)?;
        if !(u > 0.0) {
            return Err(Error::construction("F > 0 on the integration span", Some([t, 0.0, 0.0, 0.0])));
        }
    }
    Ok(ProfileFunction::Ode(profile))
}

/// Profile `F` from the squared form `(F'')² = 2K_N F³ + cF`, taking the
/// `sign` branch of `F''`. Kept to document why that reading is rejected.
pub fn solve_f_profile_squared(
    k_n: f64,
    c: f64,
    f0: f64,
    fp0: f64,
    sign: f64,
    span: (f64, f64),
) -> Result<ProfileFunction> {
    let h = move |u: f64| sign.signum() * (2.0 * k_n * u * u * u + c * u).max(0.0).sqrt();
    let (forward, backward) = solve_second_order(h, 0.0, f0, fp0, span, PROFILE_TOL)?;
    Ok(ProfileFunction::Ode(OdeProfile {
        t0: 0.0,
        forward,
        backward,
        derivs: Arc::new(move |u, up| {
            let upp = h(u);
            let dr = (6.0 * k_n * u * u + c) * up;
            let uppp = if upp == 0.0 { 0.0 } else { dr / (2.0 * upp) };
            [u, up, upp, uppp]
        }),
        residual: Arc::new(move |u, _| {
            let r = 2.0 * k_n * u * u * u + c * u;
            [r.min(0.0), 0.0, 0.0, 0.0]
        }),
    }))
}

/// Residuals `(unsquared, squared)` of the two readings of the III₂ profile
/// equation for a closed-form `F`, maximized over `samples`.
pub fn f_equation_residuals(f: &ProfileFunction, k_n: f64, c: f64, samples: &[f64]) -> Result<(f64, f64)> {
    let mut unsquared: f64 = 0.0;
    let mut squared: f64 = 0.0;
    for &t in samples {
        let [u, _, upp, _] = f.taylor(t)?;
        let rhs = 2.0 * k_n * u * u * u + c * u;
        unsquared = unsquared.max((upp - rhs).abs());
        squared = squared.max((upp * upp - rhs).abs());
    }
    Ok((unsquared, squared))
}

/// Forward and backward sweeps from the initial abscissa; `None` when the
/// span has no extent on that side.
type Sweeps<T> = (Option<T>, Option<T>);

/// Which variant of the type-V profile PDE to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuPde {
    /// `μ_y² = 2μ/(μ+D) · [μ((μ+C)² + e) − 2K_N/c]`.
    PlusSign,
    /// `μ_y² = −2μ/(μ+D) · [(μ(μ+C)² + e) − 2K_N/c]`.
    DetachedE,
    /// `μ_y² = −2μ/(μ+D) · [μ((μ+C)² + e) − 2K_N/c]`, the form that follows
    /// from the fiber curvature equation with `f² = cDμ`, `ψ² = E(μ+D)`.
    Derived,
}

/// Constants of the type-V profile PDE.
#[derive(Debug, Clone, Copy)]
pub struct MuConstants {
    pub big_c: f64,
    pub c: f64,
    pub e: f64,
    pub k_n: f64,
    pub mu0: f64,
    pub y0: f64,
    pub sign: f64,
    pub form: MuPde,
}

/// `μ(x, y)` solving the type-V profile PDE with `μ(x, y₀) = μ₀`.
///
/// For each base abscissa `x` the PDE is integrated in `y` with `(μ, μ_x)`
/// carried as jets in `x`; trajectories are cached per abscissa.
#[derive(Clone)]
pub struct MuProfile {
    pub d: ProfileFunction,
    pub d_prime: ProfileFunction,
    pub consts: MuConstants,
    pub y_span: (f64, f64),
    /// Shared `y` grids for the forward and backward sweeps.
    grids: Arc<Sweeps<Vec<f64>>>,
    cache: Arc<Mutex<BTreeMap<u64, Arc<Sweeps<JetTrajectory>>>>>,
}

impl fmt::Debug for MuProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MuProfile").field("d", &self.d).field("y_span", &self.y_span).finish()
    }
}

/// `√G(μ, D)` with `G = σ·2μB(μ)/(μ+D)` and its partials in `μ` and `D`.
fn mu_speed(k: &MuConstants, mu: &Jet3, d: &Jet3) -> Result<(Jet3, Jet3, Jet3)> {
    let cc = k.big_c;
    let (sigma, bracket, bracket_prime) = match k.form {
        MuPde::PlusSign | MuPde::Derived => {
            let m2 = (*mu + cc) * (*mu + cc);
            (
                if k.form == MuPde::PlusSign { 1.0 } else { -1.0 },
                *mu * (m2 + k.e) - 2.0 * k.k_n / k.c,
                m2 + k.e + 2.0 * *mu * (*mu + cc),
            )
        }
        MuPde::DetachedE => {
            let m2 = (*mu + cc) * (*mu + cc);
            (-1.0, *mu * m2 + k.e - 2.0 * k.k_n / k.c, m2 + 2.0 * *mu * (*mu + cc))
        }
    };
    let mud = *mu + *d;
    let inv_mud = mud.recip(1e-12, "μ + D")?;
    let g = (2.0 * sigma) * *mu * bracket * inv_mud;
    let s = g.sqrt(0.0, "μ_y² radicand")? * k.sign.signum();
    let inv_mu = mu.recip(1e-12, "μ")?;
    let inv_b = bracket.recip(1e-14, "profile PDE bracket")?;
    let s_mu = s * 0.5 * (inv_mu + bracket_prime * inv_b - inv_mud);
    let s_d = -0.5 * s * inv_mud;
    Ok((s, s_mu, s_d))
}

/// Solves the type-V profile PDE; the `y` step sequence is chosen adaptively
/// at `x_ref` and shared by every other abscissa.
pub fn solve_mu_profile(
    d: ProfileFunction,
    consts: MuConstants,
    y_span: (f64, f64),
    x_ref: f64,
) -> Result<MuProfile> {
    if consts.c == 0.0 {
        return Err(Error::construction("c ≠ 0", None));
    }
    let d_prime = d.derivative()?;
    let mut profile = MuProfile {
        d,
        d_prime,
        consts,
        y_span,
        grids: Arc::new((None, None)),
        cache: Arc::new(Mutex::new(BTreeMap::new())),
    };
    let opts = OdeOptions::with_tol(PROFILE_TOL);
    let (lo, hi) = y_span;
    let y0 = consts.y0;
    let reference = |end: f64| -> Result<Option<Vec<f64>>> {
        let (rhs, init) = profile.system(x_ref)?;
        Ok(Some(halve(integrate(rhs, y0, init, end, opts)?.grid())))
    };
    let fwd = if hi > y0 { reference(hi)? } else { None };
    let bwd = if lo < y0 { reference(lo)? } else { None };
    profile.grids = Arc::new((fwd, bwd));
    Ok(profile)
}

/// `grid` with every interval split at its midpoint.
fn halve(grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * grid.len());
    for w in grid.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.extend(grid.last());
    out
}

impl MuProfile {
    fn d_jets(&self, x: &Jet3) -> Result<(Jet3, Jet3)> {
        Ok((self.d.jet(x)?, self.d_prime.jet(x)?))
    }

    /// Right-hand side in `y` and initial state for `(μ, μ_x)` as jets in `x`.
    #[allow(clippy::type_complexity)]
    fn system(&self, x: f64) -> Result<(impl Fn(f64, &[Jet3]) -> Result<Vec<Jet3>>, Vec<Jet3>)> {
        let xj = Jet3::variable(&[x, 0.0, 0.0, 0.0], 0)?;
        let (dj, dpj) = self.d_jets(&xj)?;
        let k = self.consts;
        let rhs = move |_y: f64, s: &[Jet3]| -> Result<Vec<Jet3>> {
            let (sp, s_mu, s_d) = mu_speed(&k, &s[0], &dj)?;
            Ok(vec![sp, s_mu * s[1] + s_d * dpj])
        };
        Ok((rhs, vec![Jet3::constant(k.mu0), Jet3::zero()]))
    }

    fn trajectories(&self, x: f64) -> Result<Arc<Sweeps<JetTrajectory>>> {
        let key = x.to_bits();
        if let Some(t) = self.cache.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let sweep = |grid: &Option<Vec<f64>>| -> Result<Option<JetTrajectory>> {
            match grid {
                Some(g) => {
                    let (rhs, init) = self.system(x)?;
                    Ok(Some(integrate_on_grid(rhs, init, g)?))
                }
                None => Ok(None),
            }
        };
        let fwd = sweep(&self.grids.0)?;
        let bwd = sweep(&self.grids.1)?;
        let entry = Arc::new((fwd, bwd));
        self.cache.lock().unwrap().insert(key, entry.clone());
        Ok(entry)
    }

    /// Jets `(μ, μ_y, μ_x, D)` in the variables `(x, y)` = slots 0 and 1 at `(x, y)`.
    pub fn jets_at(&self, x: f64, y: f64) -> Result<MuJets> {
        let tr = self.trajectories(x)?;
        let traj = if y >= self.consts.y0 { &tr.0 } else { &tr.1 };
        let state = match traj {
            Some(t) if t.contains(y) => t.eval(y)?,
            _ if y == self.consts.y0 => vec![Jet3::constant(self.consts.mu0), Jet3::zero()],
            _ => {
                return Err(Error::Argument(format!(
                    "μ profile queried at y = {y} outside [{}, {}]",
                    self.y_span.0, self.y_span.1
                )))
            }
        };
        let p: Point = [x, y, 0.0, 0.0];
        let xj = Jet3::variable(&p, 0)?;
        let (dj, dpj) = self.d_jets(&xj)?;
        // lift the x-jets to (x, y)-jets by Picard iteration in y
        let (m0, w0) = (state[0], state[1]);
        let (mut mu, mut w) = (m0, w0);
        for _ in 0..4 {
            let (sp, s_mu, s_d) = mu_speed(&self.consts, &mu, &dj)?;
            let new_mu = m0 + sp.antiderivative(1);
            let new_w = w0 + (s_mu * w + s_d * dpj).antiderivative(1);
            mu = new_mu;
            w = new_w;
        }
        let (mu_y, _, _) = mu_speed(&self.consts, &mu, &dj)?;
        Ok(MuJets { mu, mu_y, mu_x: w, d: dj, d_prime: dpj })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MuJets {
    pub mu: Jet3,
    pub mu_y: Jet3,
    pub mu_x: Jet3,
    pub d: Jet3,
    pub d_prime: Jet3,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_initial_derivatives() {
        let p = solve_phi_profile(1.0, 2.0, 1.0, 1.0, (-0.2, 0.2)).unwrap();
        let [u, up, upp, _] = p.taylor(0.0).unwrap();
        assert_eq!(u, 1.0);
        assert!((up - 6f64.sqrt()).abs() < 1e-15);
        assert!((upp - 5.0).abs() < 1e-15);
        let p0 = solve_phi_profile(1.0, 2.0, 0.0, 1.0, (-0.2, 0.2)).unwrap();
        assert!((p0.taylor(0.0).unwrap()[1] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn f_profile_matches_the_linear_closed_form() {
        let b = 2.0;
        let f = solve_f_profile(1.0, 0.0, 1.0 / b, -1.0 / (b * b), (-0.5, 1.0)).unwrap();
        for t in [-0.5, -0.1, 0.3, 1.0] {
            let v = f.value(t).unwrap();
            assert!((v - 1.0 / (t + b)).abs() < 1e-9, "{t}: {v}");
        }
    }

    #[test]
    fn f_profile_initial_curvature() {
        let f = solve_f_profile(1.0, 1.0, 1.0, 0.0, (-0.1, 0.1)).unwrap();
        assert_eq!(f.taylor(0.0).unwrap()[2], 3.0);
    }

    #[test]
    fn mu_profile_initial_speed() {
        let consts = MuConstants {
            big_c: 0.0,
            c: 1.0,
            e: 0.0,
            k_n: 1.0,
            mu0: 2.0,
            y0: 0.0,
            sign: 1.0,
            form: MuPde::PlusSign,
        };
        let mu = solve_mu_profile(ProfileFunction::closed("t").unwrap(), consts, (0.0, 0.5), 1.0).unwrap();
        let j = mu.jets_at(1.0, 0.0).unwrap();
        // r₀ = 2μ/(μ+D)·(μ³ − 2) at μ = 2, D = 1
        let r0: f64 = 4.0 / 3.0 * 6.0;
        assert!((j.mu.d(1) - r0.sqrt()).abs() < 1e-14);
        assert_eq!(j.mu.d(0), 0.0);
    }
}
