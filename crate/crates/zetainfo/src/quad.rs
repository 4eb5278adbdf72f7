//! Adaptive Gauss-Kronrod (G7K15) quadrature on finite intervals, with a
//! compactified half-line variant for improper integrals.

use crate::{Error, Result};

// 15-point Kronrod nodes (positive half; symmetric about 0).
const XGK: [f64; 8] = [
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
];

const WGK: [f64; 8] = [
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
];

// 7-point Gauss weights for the nodes at even Kronrod indices.
const WG: [f64; 4] = [
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kronrod = WGK[0] * fc;
    let mut gauss = WG[0] * fc;
    for i in 1..8 {
        let dx = half * XGK[i];
        let fsum = f(mid - dx) + f(mid + dx);
        kronrod += WGK[i] * fsum;
        if i % 2 == 0 {
            gauss += WG[i / 2] * fsum;
        }
    }
    let value = half * kronrod;
    let err = (value - half * gauss).abs();
    (value, err)
}

const MAX_INTERVALS: usize = 4000;

/// Adaptive integration of f over [a, b] to the given absolute tolerance.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    integrate_with_splits(f, a, b, &[], abs_tol)
}

/// Adaptive integration with mandatory subdivision points (for integrable
/// singularities or kinks at known locations).
pub fn integrate_with_splits(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    splits: &[f64],
    abs_tol: f64,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidParameter(format!(
            "bad integration interval [{a}, {b}]"
        )));
    }
    let mut points: Vec<f64> = vec![a, b];
    points.extend(splits.iter().cloned().filter(|&s| s > a && s < b));
    points.sort_by(|x, y| x.partial_cmp(y).unwrap());
    points.dedup();

    // (lo, hi, value, err) worklist; subdivide the worst interval first.
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::new();
    for w in points.windows(2) {
        let (v, e) = gk15(&f, w[0], w[1]);
        intervals.push((w[0], w[1], v, e));
    }
    loop {
        let total_err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if total_err <= abs_tol {
            break;
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailure {
                achieved: total_err,
                requested: abs_tol,
            });
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval at floating-point resolution; accept what we have
            let (v, e) = gk15(&f, lo, hi);
            intervals.push((lo, hi, v, 0.0 * e));
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    Ok(intervals.iter().map(|iv| iv.2).sum())
}

/// Integration over [0, infinity): [0, 1] directly, [1, infinity) via the
/// inversion t = 1/u so that slowly decaying tails become endpoint
/// singularities the adaptive rule can localize.
pub fn integrate_half_line(f: impl Fn(f64) -> f64, abs_tol: f64) -> Result<f64> {
    let head = integrate(&f, 0.0, 1.0, 0.5 * abs_tol)?;
    let tail = integrate(|u: f64| f(1.0 / u) / (u * u), 0.0, 1.0, 0.5 * abs_tol)?;
    Ok(head + tail)
}
