use crate::scalar::Scalar;

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
///
/// Returns `(argmin, min)`. The endpoints are always evaluated as well, so a
/// monotone objective converges to the right boundary value exactly. Ties
/// resolve toward the smaller argument.
pub fn golden_section_min<T: Scalar>(f: impl Fn(T) -> T, lo: T, hi: T, xtol: T) -> (T, T) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iters = 0;
    while (b - a) > xtol && iters < 500 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    let mid = (a + b) / T::lit(2.0);
    let candidates = [(lo, f(lo)), (c, fc), (mid, f(mid)), (d, fd), (hi, f(hi))];
    candidates
        .into_iter()
        .fold(None, |best: Option<(T, T)>, (x, fx)| match best {
            Some((bx, bf)) if bf < fx || (bf == fx && bx <= x) => Some((bx, bf)),
            _ => Some((x, fx)),
        })
        .expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finds_interior_quadratic_minimum() {
        let (x, v) = golden_section_min(|x: f64| (x - 1.3).powi(2) + 2.0, -5.0, 5.0, 1e-12);
        assert_relative_eq!(x, 1.3, epsilon = 1e-6);
        assert_relative_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn monotone_objective_hits_endpoint() {
        let (x, v) = golden_section_min(|x: f64| 3.0 - x, 2.0, 7.0, 1e-12);
        assert_eq!(x, 7.0);
        assert_eq!(v, -4.0);
        let (x, _) = golden_section_min(|x: f64| x, 2.0, 7.0, 1e-12);
        assert_eq!(x, 2.0);
    }

    #[test]
    fn degenerate_interval() {
        assert_eq!(golden_section_min(|x: f64| x * x, 2.0, 2.0, 1e-9), (2.0, 4.0));
    }

    #[test]
    fn constant_objective_prefers_left() {
        assert_eq!(golden_section_min(|_: f32| 1.0, 2.0, 3.0, 1e-6).0, 2.0);
    }
}
