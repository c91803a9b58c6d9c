use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::MetricChart;
use crate::jet::Jet3;
use crate::{Point, DIM};

use super::profile::{solve_f_profile, solve_mu_profile, solve_phi_profile, MuConstants, MuPde, ProfileFunction};
use super::{Family, FamilySpec, FamilyTag};

/// Interval on which a profile is solved: the box side widened by a tenth of
/// its width on each end, so grid exclusion and difference stencils near the
/// edge stay inside, and always containing the initial abscissa.
fn padded(side: [f64; 2], origin: f64) -> (f64, f64) {
    let pad = 0.1 * (side[1] - side[0]);
    ((side[0] - pad).min(origin), (side[1] + pad).max(origin))
}

/// Smallest admissible value of a quantity that must stay positive or nonzero.
const MARGIN: f64 = 1e-9;

type Params = BTreeMap<String, f64>;

const ALL4: [usize; 4] = [0, 1, 2, 3];
const LAST3: [usize; 3] = [1, 2, 3];
const LAST2: [usize; 2] = [2, 3];

fn param(p: &Params, k: &str) -> f64 {
    p[k]
}

fn profile(spec: &FamilySpec, k: &str) -> Result<ProfileFunction> {
    let src = spec.resolved_profiles().remove(k).expect("profile in schema");
    ProfileFunction::closed(&src).map_err(|e| Error::spec(format!("profiles.{k}"), e.to_string()))
}

fn positive(v: f64, what: &str) -> Result<(), String> {
    if v > MARGIN {
        Ok(())
    } else {
        Err(format!("{what} > 0 (value {v:e})"))
    }
}

fn nonzero(v: f64, what: &str) -> Result<(), String> {
    if v.abs() > MARGIN {
        Ok(())
    } else {
        Err(format!("{what} ≠ 0 (value {v:e})"))
    }
}

/// `1 + (k/4)|x|²`, the denominator of the conformal space-form chart.
fn sf_denominator(k: f64, xs: &[f64]) -> f64 {
    1.0 + 0.25 * k * xs.iter().map(|x| x * x).sum::<f64>()
}

/// Conformal factor `(1 + (k/4)|x|²)⁻²` of the space form of curvature `k`.
fn sf_factor(k: f64, xs: &[Jet3]) -> Result<Jet3> {
    let r2: Jet3 = xs.iter().map(|x| *x * *x).sum();
    let den = 1.0 + r2 * (0.25 * k);
    Ok(den.recip(MARGIN, "space-form chart denominator")?.powi(2))
}


fn family(spec: &FamilySpec, chart: MetricChart) -> Family {
    Family {
        spec: spec.clone(),
        chart,
        sample_box: spec.sample_box(),
        eigen: None,
        profile: None,
        mu: None,
    }
}

fn with_eigen<F>(mut f: Family, eigen: F) -> Family
where
    F: Fn(&Point) -> Result<[f64; 4]> + Send + Sync + 'static,
{
    f.eigen = Some(Arc::new(eigen));
    f
}

fn degenerate(what: &str) -> Error {
    Error::Degenerate(what.to_string())
}

fn poly(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn poly_jet(coeffs: &[f64], t: &Jet3) -> Jet3 {
    coeffs.iter().rev().fold(Jet3::zero(), |acc, c| acc * *t + *c)
}

fn coeffs(p: &Params, n: usize) -> Vec<f64> {
    (0..=n).map(|k| param(p, &format!("a{k}"))).collect()
}

pub(super) fn construct(spec: &FamilySpec) -> Result<Family> {
    use FamilyTag::*;
    let p = spec.resolved_params();
    match spec.family {
        I => space_form(spec, &p),
        II => surface_product(spec, &p),
        III1 | R2a | R2b | R2c => warped_line_closed(spec, &p),
        III2 => warped_line_ode(spec, &p),
        IV => type_iv(spec, &p),
        V => type_v(spec, &p),
        VI => type_vi(spec, &p),
        VII => type_vii(spec, &p),
        VIII => type_viii(spec, &p),
        IX => type_ix(spec, &p),
        S1 | S2 | S3 | S4 | S5 | S6 | S7 | S8 | S9 | S10 => stackel(spec, &p),
    }
}

fn space_form(spec: &FamilySpec, p: &Params) -> Result<Family> {
    let k = param(p, "k");
    let chart = MetricChart::diagonal(
        "I",
        move |x| {
            let c = sf_factor(k, x)?;
            Ok([c; DIM])
        },
        move |x| positive(sf_denominator(k, x), "1 + (k/4)|x|²"),
    );
    Ok(with_eigen(family(spec, chart), move |_| Ok([3.0 * k; 4])))
}

fn surface_product(spec: &FamilySpec, p: &Params) -> Result<Family> {
    let k = param(p, "K");
    if k == 0.0 {
        return Err(degenerate("K = 0 gives the flat product"));
    }
    let chart = MetricChart::diagonal(
        "II",
        move |x| {
            let a = sf_factor(k, &x[..2])?;
            let b = sf_factor(-k, &x[2..])?;
            Ok([a, a, b, b])
        },
        move |x| {
            positive(sf_denominator(k, &x[..2]), "1 + (K/4)(x1² + x2²)")?;
            positive(sf_denominator(-k, &x[2..]), "1 − (K/4)(x3² + x4²)")
        },
    );
    Ok(with_eigen(family(spec, chart), move |_| Ok([k, k, -k, -k])))
}

/// Ricci eigenvalues of `dx² + f(x)² g_N` with `g_N` of curvature `k_n`,
/// from the value and first two derivatives of `f`.
fn warped_line_eigen(k_n: f64, f: [f64; 3]) -> [f64; 4] {
    let [f0, f1, f2] = f;
    let fiber = (2.0 * k_n - 2.0 * f1 * f1) / (f0 * f0) - f2 / f0;
    [fiber, fiber, fiber, -3.0 * f2 / f0]
}

fn warped_line_chart(label: &str, k_n: f64, f: ProfileFunction, reciprocal: bool) -> MetricChart {
    let fd = f.clone();
    MetricChart::diagonal(
        label,
        move |x| {
            let v = f.jet(&x[0])?;
            let w = if reciprocal { v.recip(MARGIN, "F")? } else { v };
            let fiber = w * w * sf_factor(k_n, &x[1..])?;
            Ok([Jet3::constant(1.0), fiber, fiber, fiber])
        },
        move |x| {
            if !fd.contains(x[0]) {
                let (lo, hi) = fd.domain();
                return Err(format!("x1 in the profile domain [{lo}, {hi}]"));
            }
            let v = fd.value(x[0]).map_err(|e| e.to_string())?;
            positive(v, if reciprocal { "F" } else { "f" })?;
            positive(sf_denominator(k_n, &x[1..]), "1 + (K_N/4)(x2² + x3² + x4²)")
        },
    )
}

fn warped_line_closed(spec: &FamilySpec, p: &Params) -> Result<Family> {
    let k_n = param(p, "K_N");
    let f = profile(spec, "f")?;
    let chart = warped_line_chart(spec.family.name(), k_n, f.clone(), false);
    let fe = f.clone();
    let mut fam = with_eigen(family(spec, chart), move |x| {
        let [f0, f1, f2, _] = fe.taylor(x[0])?;
        Ok(warped_line_eigen(k_n, [f0, f1, f2]))
    });
    fam.profile = Some(f);
    Ok(fam)
}

fn warped_line_ode(spec: &FamilySpec, p: &Params) -> Result<Family> {
    let (k_n, c) = (param(p, "K_N"), param(p, "c"));
    let b = spec.sample_box();
    let span = padded(b[0], 0.0);
    let big_f = solve_f_profile(k_n, c, param(p, "F0"), param(p, "F1"), span)?;
    let chart = warped_line_chart("III2", k_n, big_f.clone(), true);
    let fe = big_f.clone();
    let mut fam = with_eigen(family(spec, chart), move |x| {
        let [u, u1, u2, _] = fe.taylor(x[0])?;
        // f = 1/F
        let f = [1.0 / u, -u1 / (u * u), (2.0 * u1 * u1 - u * u2) / (u * u * u)];
        Ok(warped_line_eigen(k_n, f))
    });
    fam.profile = Some(big_f);
    Ok(fam)
}

fn type_iv(spec: &FamilySpec, p: &Params) -> Result<Family> {
    let (k_n, c, a) = (param(p, "K_N"), param(p, "c"), param(p, "A"));
    if c == 0.0 {
        return Err(Error::construction("c ≠ 0", None));
    }
    if a == 0.0 {
        return Err(Error::construction("A ≠ 0", None));
    }
    let kk = profile(spec, "K")?;
    let kp = kk.derivative()?;
    let alpha = profile(spec, "alpha")?;
    let q = k_n / (c * a);
    let big_c = a - q;
    let (kk2, kp2) = (kk.clone(), kp.clone());
    let chart = MetricChart::new(
        "IV",
        false,
        move |pt| {
            let x = Jet3::coordinates(pt);
            let kj = kk.jet(&x[0])?;
            let kpj = kp.jet(&x[0])?;
            let beta = -kpj * ((kj + q + a) * 2.0).recip(MARGIN, "K + K_N/(cA) + A")?;
            let gamma = kpj * (kj * kj - q * q).recip(MARGIN, "K² − (K_N/(cA))²")?;
            let shear = beta * x[1] + alpha.jet(&x[0])?;
            let f2 = kj * c + k_n / a;
            let fiber = f2 * sf_factor(k_n, &x[2..])?;
            let mut g = [[Jet3::zero(); DIM]; DIM];
            g[0][0] = beta * gamma + shear * shear;
            g[0][1] = shear;
            g[1][0] = shear;
            g[1][1] = Jet3::constant(1.0);
            g[2][2] = fiber;
            g[3][3] = fiber;
            Ok(g)
        },
        move |pt| {
            let k = kk2.value(pt[0]).map_err(|e| e.to_string())?;
            let k1 = kp2.value(pt[0]).map_err(|e| e.to_string())?;
            nonzero(k1, "K'(x)")?;
            nonzero(k - q, "K − K_N/(cA)")?;
            nonzero(k + q, "K + K_N/(cA)")?;
            nonzero(k + q + a, "K + K_N/(cA) + A")?;
            positive(c * k + k_n / a, "cK + K_N/A")?;
            let bg = -k1 * k1 / (2.0 * (k + q + a) * (k * k - q * q));
            positive(bg, "β·γ")?;
            positive(sf_denominator(k_n, &pt[2..]), "1 + (K_N/4)(x3² + x4²)")
        },
    );
    let ke = profile(spec, "K")?;
    Ok(with_eigen(family(spec, chart), move |pt| {
        let k = ke.value(pt[0])?;
        Ok([2.0 * k + big_c, 2.0 * k + big_c, 3.0 * k + a, 2.0 * k - a + big_c])
    }))
}

fn type_v(spec: &FamilySpec, p: &Params) -> Result<Family> {
    let (k_n, c, big_c, e) = (param(p, "K_N"), param(p, "c"), param(p, "C"), param(p, "e"));
    if c == 0.0 {
        return Err(Error::construction("c ≠ 0", None));
    }
    let form = match spec.profiles.get("mu_pde").map(String::as_str) {
        None | Some("derived") => MuPde::Derived,
        Some("plus-sign") => MuPde::PlusSign,
        Some("detached-e") => MuPde::DetachedE,
        Some(other) => {
            return Err(Error::spec(
                "profiles.mu_pde",
                format!("expected `derived`, `plus-sign` or `detached-e`, got `{other}`"),
            ))
        }
    };
    let consts = MuConstants {
        big_c,
        c,
        e,
        k_n,
        mu0: param(p, "mu0"),
        y0: param(p, "y0"),
        sign: param(p, "sign"),
        form,
    };
    let b = spec.sample_box();
    let y_span = padded(b[1], consts.y0);
    let d = profile(spec, "D")?;
    let mu = solve_mu_profile(d, consts, y_span, 0.5 * (b[0][0] + b[0][1]))?;
    let (mu_eval, mu_dom, mu_eig) = (mu.clone(), mu.clone(), mu.clone());
    let chart = MetricChart::new(
        "V",
        false,
        move |pt| {
            let x = Jet3::coordinates(pt);
            let j = mu_eval.jets_at(pt[0], pt[1])?;
            let dm = j.d - big_c;
            let den = (dm * dm + (2.0 * k_n / c) * j.d.recip(MARGIN, "D")? + e) * j.d * j.d * 2.0;
            let big_e = j.d_prime * j.d_prime * den.recip(MARGIN, "E denominator")?;
            let shear = j.mu_x * j.mu_y.recip(MARGIN, "μ_y")?;
            let fiber = j.d * j.mu * c * sf_factor(k_n, &x[2..])?;
            let mut g = [[Jet3::zero(); DIM]; DIM];
            g[0][0] = big_e * (j.mu + j.d) + shear * shear;
            g[0][1] = shear;
            g[1][0] = shear;
            g[1][1] = Jet3::constant(1.0);
            g[2][2] = fiber;
            g[3][3] = fiber;
            Ok(g)
        },
        move |pt| {
            let d = mu_dom.d.value(pt[0]).map_err(|e| e.to_string())?;
            let d1 = mu_dom.d_prime.value(pt[0]).map_err(|e| e.to_string())?;
            nonzero(d, "D(x)")?;
            nonzero(d1, "D'(x)")?;
            let j = mu_dom.jets_at(pt[0], pt[1]).map_err(|e| e.to_string())?;
            let m = j.mu.value();
            nonzero(j.mu_y.value(), "μ_y")?;
            positive(c * d * m, "cDμ")?;
            let den = 2.0 * d * d * ((d - big_c).powi(2) + 2.0 * k_n / (c * d) + e);
            nonzero(den, "(D−C)² + 2K_N/(cD) + e")?;
            positive(d1 * d1 / den * (m + d), "E(μ + D)")?;
            positive(sf_denominator(k_n, &pt[2..]), "1 + (K_N/4)(x3² + x4²)")
        },
    );
    let mut fam = with_eigen(family(spec, chart), move |pt| {
        let j = mu_eig.jets_at(pt[0], pt[1])?;
        let (m, d) = (j.mu.value(), j.d.value());
        let k = m - d + big_c;
        Ok([2.0 * k + big_c, 2.0 * k + big_c, 2.0 * k - d + big_c, 3.0 * k + d])
    });
    fam.mu = Some(mu);
    Ok(fam)
}

fn type_vi(spec: &FamilySpec, p: &Params) -> Result<Family> {
    let (a, b, q, r) = (param(p, "a"), param(p, "b"), param(p, "q"), param(p, "r"));
    for (v, name) in [(a, "a > 0"), (b, "b > 0"), (q, "q > 0"), (r, "r > 0")] {
        if !(v > 0.0) {
            return Err(Error::construction(name, None));
        }
    }
    if a == b {
        return Err(Error::construction("a ≠ b", None));
    }
    let bx = spec.sample_box();
    let span = padded(bx[0], 0.0);
    let phi = solve_phi_profile(a, b, param(p, "phi0"), param(p, "sign"), span)?;
    let (pe, pd, pg) = (phi.clone(), phi.clone(), phi.clone());
    let chart = MetricChart::diagonal(
        "VI",
        move |x| {
            let f = pe.jet(&x[0])?;
            let f2 = f * f;
            Ok([Jet3::constant(1.0), f2, (f2 + a) * r, (f2 + b) * q])
        },
        move |x| {
            if !pd.contains(x[0]) {
                let (lo, hi) = pd.domain();
                return Err(format!("x1 in the profile domain [{lo}, {hi}]"));
            }
            let v = pd.value(x[0]).map_err(|e| e.to_string())?;
            nonzero(v, "φ")
        },
    );
    let mut fam = with_eigen(family(spec, chart), move |x| {
        let s = pg.value(x[0])?.powi(2);
        Ok([
            -6.0 * s - 2.0 * a - 2.0 * b,
            -4.0 * s - 2.0 * a - 2.0 * b,
            -4.0 * s - 2.0 * b,
            -4.0 * s - 2.0 * a,
        ])
    });
    fam.profile = Some(phi);
    Ok(fam)
}

/// `|x_i − x_j|` as a sign-resolved jet.
fn gap(x: &[Jet3; DIM], i: usize, j: usize) -> Result<Jet3> {
    (x[i] - x[j]).abs_signed(MARGIN, &format!("x{} − x{}", i + 1, j + 1))
}

/// `Π_{j∈idx, j≠i} (x_i − x_j) / P(x_i)` with the signed product.
fn signed_ratio(x: &[Jet3; DIM], i: usize, idx: &[usize], p: &[Jet3; DIM]) -> Result<Jet3> {
    let mut m = p[i].recip(MARGIN, &format!("P(x{})", i + 1))?;
    for &j in idx {
        if j != i {
            m *= x[i] - x[j] ;
        }
    }
    Ok(m)
}

fn signed_ratio_value(x: &Point, i: usize, idx: &[usize], p: f64) -> f64 {
    idx.iter().filter(|&&j| j != i).map(|&j| x[i] - x[j]).product::<f64>() / p
}

fn distinct(x: &Point, idx: &[usize]) -> Result<(), String> {
    for (n, &i) in idx.iter().enumerate() {
        for &j in &idx[n + 1..] {
            nonzero(x[i] - x[j], &format!("x{} − x{}", i + 1, j + 1))?;
        }
    }
    Ok(())
}

fn type_vii(spec: &FamilySpec, p: &Params) -> Result<Family> {
    let a = coeffs(p, 6);
    if a[6] == 0.0 {
        return Err(degenerate("a6 = 0 (P of degree below six)"));
    }
    let (ae, ad) = (a.clone(), a.clone());
    let chart = MetricChart::diagonal(
        "VII",
        move |x| {
            let p = x.map(|t| poly_jet(&ae, &t));
            let mut out = [Jet3::zero(); DIM];
            for i in 0..DIM {
                out[i] = signed_ratio(x, i, &ALL4, &p)?;
            }
            Ok(out)
        },
        move |x| {
            distinct(x, &ALL4)?;
            for i in 0..DIM {
                let v = signed_ratio_value(x, i, &ALL4, poly(&ad, x[i]));
                positive(v, &format!("μ{}²", i + 1))?;
            }
            Ok(())
        },
    );
    let (a5, a6) = (a[5], a[6]);
    Ok(with_eigen(family(spec, chart), move |x| {
        let total: f64 = x.iter().sum();
        Ok(std::array::from_fn(|i| -a6 * (0.5 * x[i] + total) - 0.75 * a5))
    }))
}

fn type_viii(spec: &FamilySpec, p: &Params) -> Result<Family> {
    let a = coeffs(p, 5);
    if a[5] == 0.0 {
        return Err(degenerate("a5 = 0 (P of degree below five)"));
    }
    if a[0] != 0.0 {
        return Err(Error::construction("P(0) = 0 (a0 = 0)", None));
    }
    let (ae, ad) = (a.clone(), a.clone());
    let chart = MetricChart::diagonal(
        "VIII",
        move |x| {
            let mut out = [Jet3::zero(); DIM];
            let p = x.map(|t| poly_jet(&ae, &t));
            out[0] = (x[1] * x[2] * x[3]).abs_signed(MARGIN, "x2x3x4")?;
            for i in 1..DIM {
                out[i] = signed_ratio(x, i, &LAST3, &p)?;
            }
            Ok(out)
        },
        move |x| {
            distinct(x, &LAST3)?;
            positive(x[1] * x[2] * x[3], "x2x3x4")?;
            for i in 1..DIM {
                let v = signed_ratio_value(x, i, &LAST3, poly(&ad, x[i]));
                positive(v, &format!("μ{}²", i + 1))?;
            }
            Ok(())
        },
    );
    let (a4, a5) = (a[4], a[5]);
    Ok(with_eigen(family(spec, chart), move |x| {
        let s = x[1] + x[2] + x[3];
        let mut r = [0.0; 4];
        r[0] = -a5 * s - 0.75 * a4;
        for i in 1..DIM {
            r[i] = -a5 * (0.5 * x[i] + s) - 0.75 * a4;
        }
        Ok(r)
    }))
}

fn type_ix(spec: &FamilySpec, p: &Params) -> Result<Family> {
    let b = param(p, "b");
    let (a1, a2, a3) = (param(p, "a1"), param(p, "a2"), param(p, "a3"));
    if b == 0.0 {
        return Err(Error::construction("b ≠ 0", None));
    }
    if a3 == 0.0 {
        return Err(degenerate("a3 = 0 (P of degree below four)"));
    }
    let pj = move |t: &Jet3| (*t - b) * (*t * (*t * (*t * a3 + a2) + a1));
    let pf = move |t: f64| (t - b) * (t * (t * (t * a3 + a2) + a1));
    let chart = MetricChart::diagonal(
        "IX",
        move |x| {
            let g1 = (x[2] - b) * (x[3] - b);
            let g2 = x[2] * x[3];
            let p = x.map(|t| pj(&t));
            let g3 = signed_ratio(x, 2, &LAST2, &p)?;
            let g4 = signed_ratio(x, 3, &LAST2, &p)?;
            Ok([g1, g2, g3, g4])
        },
        move |x| {
            distinct(x, &LAST2)?;
            positive((x[2] - b) * (x[3] - b), "(x3 − b)(x4 − b)")?;
            positive(x[2] * x[3], "x3x4")?;
            positive(signed_ratio_value(x, 2, &LAST2, pf(x[2])), "μ3²")?;
            positive(signed_ratio_value(x, 3, &LAST2, pf(x[3])), "μ4²")
        },
    );
    Ok(with_eigen(family(spec, chart), move |x| {
        let r1 = -a3 * (x[2] + x[3]) - 0.75 * a2;
        let r2 = r1 + 0.5 * b * a3;
        let rk = |k: usize, l: usize| -a3 * (1.5 * x[k] + x[l]) - 0.75 * a2 + 0.5 * b * a3;
        Ok([r1, r2, rk(2, 3), rk(3, 2)])
    }))
}

fn stackel(spec: &FamilySpec, p: &Params) -> Result<Family> {
    use FamilyTag::*;
    let tag = spec.family;
    let pr = |k: &str| profile(spec, k);
    let one = Jet3::constant(1.0);
    let chart = match tag {
        S1 => {
            let (eta, psi, phi) = (pr("eta")?, pr("psi")?, pr("phi")?);
            MetricChart::diagonal(
                "S1",
                move |x| {
                    let e = eta.jet(&x[0])?;
                    Ok([one, e, e * psi.jet(&x[1])?, e * phi.jet(&x[1])?])
                },
                |_| Ok(()),
            )
        }
        S2 => {
            let (phi, xi, zeta, eta) = (pr("phi")?, pr("xi")?, pr("zeta")?, pr("eta")?);
            MetricChart::diagonal(
                "S2",
                move |x| {
                    let f = phi.jet(&x[0])?;
                    let (u, v, w) = (xi.jet(&x[1])?, zeta.jet(&x[2])?, eta.jet(&x[3])?);
                    let abs = |j: Jet3, what: &str| j.abs_signed(MARGIN, what);
                    Ok([
                        one,
                        f * abs((u - v) * (u - w), "(ξ − ζ)(ξ − η)")?,
                        f * abs((v - u) * (v - w), "(ζ − ξ)(ζ − η)")?,
                        f * abs((w - u) * (w - v), "(η − ξ)(η − ζ)")?,
                    ])
                },
                |_| Ok(()),
            )
        }
        S3 => {
            let (eta, xi, phi, psi) = (pr("eta")?, pr("xi")?, pr("phi")?, pr("psi")?);
            MetricChart::diagonal(
                "S3",
                move |x| {
                    let g3 = x[0] * x[1] * (phi.jet(&x[2])? + psi.jet(&x[3])?);
                    Ok([eta.jet(&x[0])?, x[0] * xi.jet(&x[1])?, g3, g3])
                },
                |_| Ok(()),
            )
        }
        S4 => {
            let (phi, psi, xi, eta) = (pr("phi")?, pr("psi")?, pr("xi")?, pr("eta")?);
            MetricChart::diagonal(
                "S4",
                move |x| {
                    let a = phi.jet(&x[0])? + psi.jet(&x[1])?;
                    let b = xi.jet(&x[2])? + eta.jet(&x[3])?;
                    Ok([a, a, b, b])
                },
                |_| Ok(()),
            )
        }
        S5 => {
            let (xi, eta, psi, phi) = (pr("xi")?, pr("eta")?, pr("psi")?, pr("phi")?);
            MetricChart::diagonal(
                "S5",
                move |x| {
                    let (u, v) = (xi.jet(&x[0])?, eta.jet(&x[1])?);
                    let a = u - v;
                    let b = u * v * (psi.jet(&x[2])? + phi.jet(&x[3])?);
                    Ok([a, a, b, b])
                },
                |_| Ok(()),
            )
        }
        S6 => {
            let (phi, psi, xi, eta) = (pr("phi")?, pr("psi")?, pr("xi")?, pr("eta")?);
            MetricChart::diagonal(
                "S6",
                move |x| {
                    let b = x[0] * (xi.jet(&x[2])? + eta.jet(&x[3])?);
                    Ok([phi.jet(&x[0])?, psi.jet(&x[0])?, b, b])
                },
                |_| Ok(()),
            )
        }
        S7 => {
            let (phi, psi, eta) = (pr("phi")?, pr("psi")?, pr("eta")?);
            MetricChart::diagonal(
                "S7",
                move |x| Ok([one, phi.jet(&x[0])?, psi.jet(&x[0])?, eta.jet(&x[0])?]),
                |_| Ok(()),
            )
        }
        S8 => {
            let phis: Vec<ProfileFunction> =
                (1..=4).map(|i| pr(&format!("phi{i}"))).collect::<Result<_>>()?;
            MetricChart::diagonal(
                "S8",
                move |x| {
                    let mut out = [Jet3::zero(); DIM];
                    for i in 0..DIM {
                        let mut m = phis[i].jet(&x[i])?;
                        for j in 0..DIM {
                            if j != i {
                                m *= gap(x, i, j)?;
                            }
                        }
                        out[i] = m;
                    }
                    Ok(out)
                },
                |x| distinct(x, &[0, 1, 2, 3]),
            )
        }
        S9 => {
            let phis: Vec<ProfileFunction> =
                (2..=4).map(|i| pr(&format!("phi{i}"))).collect::<Result<_>>()?;
            MetricChart::diagonal(
                "S9",
                move |x| {
                    let mut out = [Jet3::zero(); DIM];
                    out[0] = (x[1] * x[2] * x[3]).abs_signed(MARGIN, "x2x3x4")?;
                    for i in 1..DIM {
                        let mut m = phis[i - 1].jet(&x[i])?;
                        for j in 1..DIM {
                            if j != i {
                                m *= gap(x, i, j)?;
                            }
                        }
                        out[i] = m;
                    }
                    Ok(out)
                },
                |x| distinct(x, &[1, 2, 3]),
            )
        }
        S10 => {
            let b = param(p, "b");
            let (phi3, phi4) = (pr("phi3")?, pr("phi4")?);
            MetricChart::diagonal(
                "S10",
                move |x| {
                    let g1 = (x[2] - b).abs_signed(MARGIN, "x3 − b")? * (x[3] - b).abs_signed(MARGIN, "x4 − b")?;
                    let d = gap(x, 2, 3)?;
                    Ok([g1, x[2] * x[3], phi3.jet(&x[2])? * d, phi4.jet(&x[3])? * d])
                },
                |x| distinct(x, &[2, 3]),
            )
        }
        _ => unreachable!("not a separable family"),
    };
    Ok(family(spec, chart))
}

