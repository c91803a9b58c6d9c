use rand::Rng;

use super::{FamilySpec, FamilyTag};

fn around<R: Rng>(rng: &mut R, center: f64, spread: f64) -> f64 {
    center + rng.gen_range(-spread..=spread)
}

fn set(spec: &mut FamilySpec, k: &str, v: f64) {
    spec.params.insert(k.to_string(), v);
}

/// Sets `a0..aN` to the coefficients of `lead·Π(t − root)`.
fn set_poly(spec: &mut FamilySpec, lead: f64, roots: &[f64]) {
    let mut c = vec![lead];
    for r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (k, v) in c.iter().enumerate() {
            next[k + 1] += v;
            next[k] -= r * v;
        }
        c = next;
    }
    for (k, v) in c.into_iter().enumerate() {
        set(spec, &format!("a{k}"), v);
    }
}

fn positive_quadratic<R: Rng>(rng: &mut R) -> String {
    let (a, b, c) = (rng.gen_range(0.2..2.0), rng.gen_range(-0.5..0.5), rng.gen_range(1.0..3.0));
    format!("{a}*t^2 + {b}*t + {c}")
}

/// Draws a parameter set for `tag` near its defaults.
///
/// The draw is not guaranteed to build; callers retry with a fresh draw
/// when construction fails.
pub fn random_spec<R: Rng>(tag: FamilyTag, rng: &mut R) -> FamilySpec {
    use FamilyTag::*;
    let mut spec = FamilySpec::new(tag);
    match tag {
        I => set(&mut spec, "k", around(rng, 0.0, 2.0)),
        II => {
            let k = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            set(&mut spec, "K", k)
        }
        III1 => {
            set(&mut spec, "K_N", around(rng, 0.0, 2.0));
            spec = spec.with_profile("f", &positive_quadratic(rng));
        }
        R2a | R2b | R2c => {}
        III2 => {
            set(&mut spec, "K_N", rng.gen_range(0.2..2.0));
            set(&mut spec, "c", rng.gen_range(0.2..2.0));
            set(&mut spec, "F0", rng.gen_range(0.8..1.5));
            set(&mut spec, "F1", around(rng, 0.0, 0.3));
        }
        IV => {
            set(&mut spec, "K_N", rng.gen_range(0.2..2.0));
            set(&mut spec, "c", rng.gen_range(0.5..2.0));
            set(&mut spec, "A", rng.gen_range(0.5..2.0));
            let (p, q) = (rng.gen_range(0.5..2.0), around(rng, 0.0, 0.2));
            spec = spec.with_profile("K", &format!("{p}*t + {q}"));
            let (s, u) = (around(rng, 0.0, 1.0), around(rng, 0.0, 1.0));
            spec = spec.with_profile("alpha", &format!("{s}*t + {u}"));
        }
        V => {
            set(&mut spec, "K_N", rng.gen_range(0.5..2.0));
            set(&mut spec, "c", rng.gen_range(0.5..1.0));
            set(&mut spec, "C", around(rng, 0.0, 0.3));
            set(&mut spec, "e", rng.gen_range(0.0..0.5));
            set(&mut spec, "mu0", rng.gen_range(0.2..0.6));
            let p = rng.gen_range(0.7..1.5);
            spec = spec.with_profile("D", &format!("{p}*t"));
        }
        VI => {
            let a = rng.gen_range(0.5..1.5);
            set(&mut spec, "a", a);
            set(&mut spec, "b", a + rng.gen_range(0.3..2.0));
            set(&mut spec, "q", rng.gen_range(0.5..2.0));
            set(&mut spec, "r", rng.gen_range(0.5..2.0));
            set(&mut spec, "phi0", rng.gen_range(0.8..1.5));
        }
        VII => {
            let mut roots: Vec<f64> = [1.0, 3.0, 5.0].iter().map(|lo| lo + rng.gen_range(0.1..0.9)).collect();
            roots.extend((0..3).map(|_| -rng.gen_range(0.2..4.0)));
            set_poly(&mut spec, rng.gen_range(0.5..4.0), &roots);
        }
        VIII => {
            let roots = [
                0.0,
                rng.gen_range(1.05..1.45),
                rng.gen_range(2.05..2.45),
                -rng.gen_range(0.2..3.0),
                -rng.gen_range(0.2..3.0),
            ];
            set_poly(&mut spec, rng.gen_range(0.5..2.0), &roots);
        }
        IX => {
            set(&mut spec, "b", rng.gen_range(0.3..1.4));
            let (r, s) = (rng.gen_range(2.05..2.45), rng.gen_range(0.2..3.0));
            let a3 = rng.gen_range(0.5..2.0);
            // a3·t(t − r)(t + s)
            set(&mut spec, "a3", a3);
            set(&mut spec, "a2", a3 * (s - r));
            set(&mut spec, "a1", -a3 * r * s);
        }
        S10 => set(&mut spec, "b", rng.gen_range(1.0..1.4)),
        S3 | S4 | S6 => {
            for &(k, _) in tag.profile_schema() {
                spec = spec.with_profile(k, &positive_quadratic(rng));
            }
        }
        _ => {}
    }
    spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draws_validate_and_are_reproducible() {
        for tag in FamilyTag::ALL {
            let a = random_spec(tag, &mut ChaCha8Rng::seed_from_u64(5));
            let b = random_spec(tag, &mut ChaCha8Rng::seed_from_u64(5));
            a.validate().unwrap();
            assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        }
    }
}
