use std::fmt;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A concave per-link utility of the service rate.
#[derive(Clone)]
pub enum Utility {
    /// `ln q`, with `U(0) = -inf`.
    Log,
    /// `w ln q`, `w > 0`.
    WeightedLog(f64),
    /// `w q`.
    Linear(f64),
    /// Caller-supplied concave function and its derivative.
    Generic { value: ScalarFn, derivative: ScalarFn },
}

impl fmt::Debug for Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Utility::Log => write!(f, "Log"),
            Utility::WeightedLog(w) => write!(f, "WeightedLog({w})"),
            Utility::Linear(w) => write!(f, "Linear({w})"),
            Utility::Generic { .. } => write!(f, "Generic"),
        }
    }
}

impl Utility {
    pub fn generic(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Utility::Generic { value: Arc::new(value), derivative: Arc::new(derivative) }
    }

    pub fn value(&self, q: f64) -> f64 {
        match self {
            Utility::Log => log_or_neg_inf(q),
            Utility::WeightedLog(w) => w * log_or_neg_inf(q),
            Utility::Linear(w) => w * q,
            Utility::Generic { value, .. } => value(q),
        }
    }

    pub fn derivative(&self, q: f64) -> f64 {
        match self {
            Utility::Log => 1.0 / q,
            Utility::WeightedLog(w) => w / q,
            Utility::Linear(w) => *w,
            Utility::Generic { derivative, .. } => derivative(q),
        }
    }
}

fn log_or_neg_inf(q: f64) -> f64 {
    if q > 0.0 {
        q.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `argmax_{q in [0,1]} theta U(q) - q c`.
///
/// Closed forms for the log and linear families (ties go to `q = 1`);
/// bisection on the derivative to `1e-12` otherwise.
pub fn one_dim_utility_opt(utility: &Utility, theta: f64, c: f64) -> f64 {
    match utility {
        Utility::Log => log_argmax(theta, c),
        Utility::WeightedLog(w) => log_argmax(theta * w, c),
        Utility::Linear(w) => {
            if theta * w >= c {
                1.0
            } else {
                0.0
            }
        }
        Utility::Generic { derivative, .. } => {
            let slope = |q: f64| theta * derivative(q) - c;
            if slope(1.0) >= 0.0 {
                return 1.0;
            }
            if slope(0.0) <= 0.0 {
                return 0.0;
            }
            let (mut lo, mut hi) = (0.0, 1.0);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if slope(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    }
}

fn log_argmax(scale: f64, c: f64) -> f64 {
    if c <= scale {
        1.0
    } else {
        scale / c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(one_dim_utility_opt(&Utility::Log, 1.0, 4.0), 0.25);
        assert_eq!(one_dim_utility_opt(&Utility::Log, 1.0, 0.5), 1.0);
        assert_eq!(one_dim_utility_opt(&Utility::Log, 1.0, -3.0), 1.0);
        assert_eq!(one_dim_utility_opt(&Utility::WeightedLog(2.0), 1.0, 8.0), 0.25);
        assert_eq!(one_dim_utility_opt(&Utility::Linear(1.0), 2.0, 1.0), 1.0);
        assert_eq!(one_dim_utility_opt(&Utility::Linear(1.0), 1.0, 1.0), 1.0);
        assert_eq!(one_dim_utility_opt(&Utility::Linear(1.0), 1.0, 1.5), 0.0);
    }

    #[test]
    fn generic_bisection_matches_log() {
        let g = Utility::generic(f64::ln, |q| 1.0 / q);
        for c in [0.5, 1.3, 4.0, 17.0] {
            let a = one_dim_utility_opt(&g, 1.0, c);
            let b = one_dim_utility_opt(&Utility::Log, 1.0, c);
            assert!((a - b).abs() < 1e-11, "c = {c}: {a} vs {b}");
        }
        let sq = Utility::generic(|q| -(q - 0.3) * (q - 0.3), |q| -2.0 * (q - 0.3));
        assert!((one_dim_utility_opt(&sq, 1.0, 0.0) - 0.3).abs() < 1e-11);
        assert_eq!(one_dim_utility_opt(&sq, 1.0, 5.0), 0.0);
    }
}
