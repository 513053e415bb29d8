//! Interpolating B-spline curves in the (lon, lat) plane.
//!
//! The global interpolation recipe is: chord-length parameters, a clamped
//! knot vector by knot averaging, then a square collocation solve for the
//! control points so the curve passes through every data point. Curves are
//! evaluated with de Boor's triangular recursion.

use crate::error::{Error, Result};

/// A point in the parameter plane: `[lon, lat]` in degrees.
pub type Point2 = [f64; 2];

/// Degree used for trajectory smoothing when enough points are available.
pub const DEFAULT_DEGREE: usize = 3;

/// Relative parameter step given to consecutive duplicate data points.
const DUPLICATE_STEP: f64 = 1e-9;

/// Pivots below this magnitude make the collocation system singular.
const MIN_PIVOT: f64 = 1e-14;

/// A clamped B-spline curve with 2D control points.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineCurve {
    degree: usize,
    knots: Vec<f64>,
    control_points: Vec<Point2>,
}

impl SplineCurve {
    pub fn new(degree: usize, knots: Vec<f64>, control_points: Vec<Point2>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Domain("degree must be at least 1".into()));
        }
        let n = control_points.len();
        if n < degree + 1 {
            return Err(Error::Domain(format!(
                "degree {degree} needs at least {} control points, got {n}",
                degree + 1
            )));
        }
        if knots.len() != n + degree + 1 {
            return Err(Error::Domain(format!(
                "expected {} knots for {n} control points of degree {degree}, got {}",
                n + degree + 1,
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) || knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain(
                "knots must be finite and nondecreasing".into(),
            ));
        }
        let (first, last) = (knots[0], knots[knots.len() - 1]);
        let clamped = knots[..=degree].iter().all(|&k| k == first)
            && knots[knots.len() - degree - 1..].iter().all(|&k| k == last);
        if !clamped || first != 0.0 || last != 1.0 {
            return Err(Error::Domain(
                "knot vector must be clamped on [0, 1]".into(),
            ));
        }
        Ok(SplineCurve {
            degree,
            knots,
            control_points,
        })
    }

    /// Interpolates `points` with the default recipe. The degree drops to
    /// `n - 1` when fewer than four points are given.
    pub fn interpolate(points: &[Point2]) -> Result<(Self, Vec<f64>)> {
        let params = chord_length_params(points)?;
        let degree = DEFAULT_DEGREE.min(points.len() - 1);
        let knots = averaging_knots(&params, degree)?;
        let control = solve_interpolating_control_points(points, &params, &knots, degree)?;
        let curve = SplineCurve::new(degree, knots, control)?;
        Ok((curve, params))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn control_points(&self) -> &[Point2] {
        &self.control_points
    }

    /// Index `s` of the knot span `[knots[s], knots[s+1])` holding `t`;
    /// `t = 1` belongs to the last nonempty span.
    pub fn find_span(&self, t: f64) -> usize {
        find_span(&self.knots, self.degree, self.control_points.len(), t)
    }

    /// Evaluates the curve at `t ∈ [0, 1]` by de Boor's algorithm.
    pub fn de_boor(&self, t: f64) -> Result<Point2> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("parameter {t} outside [0, 1]")));
        }
        let p = self.degree;
        let span = self.find_span(t);
        let mut d: Vec<Point2> = self.control_points[span - p..=span].to_vec();
        for r in 1..=p {
            for j in (r..=p).rev() {
                let i = j + span - p;
                let left = self.knots[i];
                let denom = self.knots[i + 1 + p - r] - left;
                let alpha = if denom == 0.0 {
                    0.0
                } else {
                    (t - left) / denom
                };
                d[j] = [
                    (1.0 - alpha) * d[j - 1][0] + alpha * d[j][0],
                    (1.0 - alpha) * d[j - 1][1] + alpha * d[j][1],
                ];
            }
        }
        Ok(d[p])
    }

    /// Evaluates the curve at each parameter, in order.
    pub fn sample(&self, params: &[f64]) -> Result<Vec<Point2>> {
        params.iter().map(|&t| self.de_boor(t)).collect()
    }
}

fn find_span(knots: &[f64], degree: usize, n: usize, t: f64) -> usize {
    if t >= knots[n] {
        return n - 1;
    }
    if t <= knots[degree] {
        return degree;
    }
    // Largest s in [degree, n-1] with knots[s] <= t.
    let (mut lo, mut hi) = (degree, n);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if knots[mid] <= t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Values of the `degree + 1` basis functions that are nonzero on `span`,
/// i.e. `N[span-degree..=span]` at `t`.
fn nonzero_basis(knots: &[f64], degree: usize, span: usize, t: f64) -> Vec<f64> {
    let mut values = vec![0.0; degree + 1];
    // Clamped ends: exactly one basis function is 1.
    if span == degree && t == knots[degree] {
        values[0] = 1.0;
        return values;
    }
    if t == knots[span + 1] && span + 1 == knots.len() - degree - 1 {
        values[degree] = 1.0;
        return values;
    }
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    values[0] = 1.0;
    for j in 1..=degree {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom == 0.0 { 0.0 } else { values[r] / denom };
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
    values
}

/// Chord-length parameters in [0, 1] for the data points.
///
/// A zero-length chord (hovering sample) gets a step of 1e-9 of the total
/// length so the parameters stay strictly increasing.
pub fn chord_length_params(points: &[Point2]) -> Result<Vec<f64>> {
    if points.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 points to parameterize, got {}",
            points.len()
        )));
    }
    if points.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Domain("non-finite data point".into()));
    }
    let chords: Vec<f64> = points
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
        .collect();
    let total: f64 = chords.iter().sum();
    if total == 0.0 {
        return Err(Error::Domain("all data points coincide".into()));
    }
    let min_step = DUPLICATE_STEP * total;
    let steps: Vec<f64> = chords
        .iter()
        .map(|&c| if c > 0.0 { c } else { min_step })
        .collect();
    let sum: f64 = steps.iter().sum();

    let mut params = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    params.push(0.0);
    for s in &steps[..steps.len() - 1] {
        acc += s;
        params.push(acc / sum);
    }
    params.push(1.0);
    Ok(params)
}

/// Clamped knot vector by averaging `degree` consecutive parameters.
pub fn averaging_knots(params: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = params.len();
    if degree == 0 {
        return Err(Error::Domain("degree must be at least 1".into()));
    }
    if n < degree + 1 {
        return Err(Error::Domain(format!(
            "{n} points are too few for degree {degree}"
        )));
    }
    if params.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "parameters must be strictly increasing".into(),
        ));
    }
    let mut knots = Vec::with_capacity(n + degree + 1);
    knots.extend(std::iter::repeat_n(0.0, degree + 1));
    for j in 1..n - degree {
        let mean = params[j..j + degree].iter().sum::<f64>() / degree as f64;
        knots.push(mean);
    }
    knots.extend(std::iter::repeat_n(1.0, degree + 1));
    Ok(knots)
}

/// Solves the collocation system `Σ N_i(params[k]) P_i = points[k]` for the
/// control points `P`.
///
/// The system is banded. Chord parameters with averaged knots make the
/// collocation matrix totally positive, so elimination runs without row
/// exchanges and the band never widens.
pub fn solve_interpolating_control_points(
    points: &[Point2],
    params: &[f64],
    knots: &[f64],
    degree: usize,
) -> Result<Vec<Point2>> {
    let n = points.len();
    if params.len() != n || knots.len() != n + degree + 1 {
        return Err(Error::Domain(format!(
            "inconsistent sizes: {n} points, {} parameters, {} knots for degree {degree}",
            params.len(),
            knots.len()
        )));
    }
    if n < degree + 1 || degree == 0 {
        return Err(Error::Domain(format!(
            "{n} points are too few for degree {degree}"
        )));
    }

    let spans: Vec<usize> = params
        .iter()
        .map(|&t| find_span(knots, degree, n, t))
        .collect();
    let lower = spans
        .iter()
        .enumerate()
        .map(|(k, &s)| k.saturating_sub(s - degree))
        .max()
        .unwrap_or(0);
    let upper = spans
        .iter()
        .enumerate()
        .map(|(k, &s)| s.saturating_sub(k))
        .max()
        .unwrap_or(0);

    let width = lower + upper + 1;
    let mut band = vec![vec![0.0; width]; n];
    for (k, (&t, &s)) in params.iter().zip(&spans).enumerate() {
        for (offset, value) in nonzero_basis(knots, degree, s, t).into_iter().enumerate() {
            let col = s - degree + offset;
            band[k][col + lower - k] = value;
        }
    }
    let mut rhs: Vec<Point2> = points.to_vec();

    for i in 0..n {
        let pivot = band[i][lower];
        if !pivot.is_finite() || pivot.abs() < MIN_PIVOT {
            return Err(Error::Numeric(format!(
                "collocation system is singular at row {i} (pivot {pivot:e})"
            )));
        }
        let last_col = (i + upper).min(n - 1);
        for r in i + 1..=(i + lower).min(n - 1) {
            let factor = band[r][i + lower - r] / pivot;
            if factor == 0.0 {
                continue;
            }
            for c in i..=last_col {
                band[r][c + lower - r] -= factor * band[i][c + lower - i];
            }
            let src = rhs[i];
            rhs[r][0] -= factor * src[0];
            rhs[r][1] -= factor * src[1];
        }
    }

    let mut control = vec![[0.0; 2]; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for c in i + 1..=(i + upper).min(n - 1) {
            let a = band[i][c + lower - i];
            acc[0] -= a * control[c][0];
            acc[1] -= a * control[c][1];
        }
        let pivot = band[i][lower];
        control[i] = [acc[0] / pivot, acc[1] / pivot];
    }
    if control.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Numeric(
            "collocation solve produced non-finite values".into(),
        ));
    }
    Ok(control)
}
