use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::{Point, DIM};

/// Metric components as jets at one point.
pub type MetricJets = [[Jet3; DIM]; DIM];

type Evaluator = dyn Fn(&Point) -> Result<MetricJets> + Send + Sync;
type DomainPredicate = dyn Fn(&Point) -> Result<(), String> + Send + Sync;

/// A coordinate chart of a 4-dimensional Riemannian metric.
#[derive(Clone)]
pub struct MetricChart {
    label: String,
    diagonal: bool,
    evaluator: Arc<Evaluator>,
    domain: Arc<DomainPredicate>,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart")
            .field("label", &self.label)
            .field("diagonal", &self.diagonal)
            .finish()
    }
}

impl MetricChart {
    pub fn new<E, D>(label: impl Into<String>, diagonal: bool, evaluator: E, domain: D) -> Self
    where
        E: Fn(&Point) -> Result<MetricJets> + Send + Sync + 'static,
        D: Fn(&Point) -> Result<(), String> + Send + Sync + 'static,
    {
        MetricChart {
            label: label.into(),
            diagonal,
            evaluator: Arc::new(evaluator),
            domain: Arc::new(domain),
        }
    }

    /// Diagonal chart from the four squared scale factors `μ_i²`.
    pub fn diagonal<E, D>(label: impl Into<String>, squares: E, domain: D) -> Self
    where
        E: Fn(&[Jet3; DIM]) -> Result<[Jet3; DIM]> + Send + Sync + 'static,
        D: Fn(&Point) -> Result<(), String> + Send + Sync + 'static,
    {
        Self::new(
            label,
            true,
            move |p| {
                let x = Jet3::coordinates(p);
                let d = squares(&x)?;
                let mut g = [[Jet3::zero(); DIM]; DIM];
                for i in 0..DIM {
                    g[i][i] = d[i];
                }
                Ok(g)
            },
            domain,
        )
    }

    /// Chart with no domain restriction.
    pub fn unrestricted<E>(label: impl Into<String>, diagonal: bool, evaluator: E) -> Self
    where
        E: Fn(&Point) -> Result<MetricJets> + Send + Sync + 'static,
    {
        Self::new(label, diagonal, evaluator, |_| Ok(()))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub fn check_domain(&self, p: &Point) -> Result<(), String> {
        (self.domain)(p)
    }

    pub fn in_domain(&self, p: &Point) -> bool {
        self.check_domain(p).is_ok()
    }

    /// Raw metric jets without validation.
    pub fn components_unchecked(&self, p: &Point) -> Result<MetricJets> {
        (self.evaluator)(p)
    }

    /// Metric jets at `p`, after the domain predicate, symmetry and positive
    /// definiteness have been checked.
    pub fn metric_at(&self, p: &Point) -> Result<MetricJets> {
        self.check_domain(p).map_err(|reason| Error::Geometry {
            point: *p,
            reason: format!("outside chart domain: {reason}"),
        })?;
        let g = (self.evaluator)(p).map_err(|e| match e {
            Error::Domain { factor, .. } => Error::Domain {
                factor,
                point: p.to_vec(),
            },
            other => other,
        })?;
        for i in 0..DIM {
            for j in 0..DIM {
                if !g[i][j].is_finite() {
                    return Err(Error::Geometry {
                        point: *p,
                        reason: format!("non-finite metric component g[{i}][{j}]"),
                    });
                }
                if i < j && g[i][j] != g[j][i] {
                    let scale = 1.0 + g[i][j].max_abs();
                    if (g[i][j] - g[j][i]).max_abs() > 1e-12 * scale {
                        return Err(Error::Geometry {
                            point: *p,
                            reason: format!("metric not symmetric in ({i}, {j})"),
                        });
                    }
                }
            }
        }
        let values: [[f64; DIM]; DIM] = std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].value()));
        if let Some(k) = first_nonpositive_minor(&values) {
            return Err(Error::Geometry {
                point: *p,
                reason: format!("metric not positive definite (leading minor {k} ≤ 0)"),
            });
        }
        Ok(g)
    }
}

/// Index (1-based) of the first leading principal minor that is not positive.
pub fn first_nonpositive_minor(g: &[[f64; DIM]; DIM]) -> Option<usize> {
    // Cholesky-style elimination: the pivots are ratios of successive minors
    let mut a = *g;
    for k in 0..DIM {
        if !(a[k][k] > 0.0) {
            return Some(k + 1);
        }
        for i in k + 1..DIM {
            let f = a[i][k] / a[k][k];
            for j in k..DIM {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minors() {
        let id = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        assert_eq!(first_nonpositive_minor(&id), None);
        let mut bad = id;
        bad[0][1] = 2.0;
        bad[1][0] = 2.0;
        assert_eq!(first_nonpositive_minor(&bad), Some(2));
    }

    #[test]
    fn domain_is_enforced() {
        let chart = MetricChart::diagonal(
            "half-space",
            |x| Ok([x[0], Jet3::constant(1.0), Jet3::constant(1.0), Jet3::constant(1.0)]),
            |p| if p[0] > 0.0 { Ok(()) } else { Err("x1 > 0".into()) },
        );
        assert!(chart.metric_at(&[1.0, 0.0, 0.0, 0.0]).is_ok());
        let err = chart.metric_at(&[-1.0, 0.0, 0.0, 0.0]).unwrap_err();
        assert!(err.to_string().contains("x1 > 0"));
    }

    #[test]
    fn indefinite_metric_is_rejected() {
        let chart = MetricChart::diagonal(
            "lorentz",
            |_| Ok([Jet3::constant(-1.0), Jet3::constant(1.0), Jet3::constant(1.0), Jet3::constant(1.0)]),
            |_| Ok(()),
        );
        assert!(matches!(chart.metric_at(&[0.0; 4]), Err(Error::Geometry { .. })));
    }
}
