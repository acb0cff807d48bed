//! Clothoid segments (linear-curvature arcs) and the G1 Hermite fit.
//!
//! A segment is parameterised by arc length `s ∈ [0, length]`:
//!
//! ```text
//! κ(s) = kappa0 + dk·s
//! θ(s) = theta0 + kappa0·s + dk·s²/2
//! x(s) = x0 + ∫₀ˢ cos θ(u) du,   y(s) = y0 + ∫₀ˢ sin θ(u) du
//! ```
//!
//! The position integrals are generalized Fresnel integrals, evaluated here
//! with a three-branch scheme (power series, rational minimax approximation,
//! asymptotic expansion) plus a Lommel-function continuation for the moment
//! recurrences, following Bertolazzi & Frego's method. The G1 fit finds the
//! unique "single-turn" clothoid joining two planar poses by Newton iteration
//! on a one-dimensional root problem.

use crate::geom::wrap_angle;
use thiserror::Error;

/// Position error (m) and heading error (rad) allowed between the fitted
/// segment's endpoint and the requested end pose.
pub const FIT_TOLERANCE: f64 = 1e-3;

const ONE_OVER_SQRT_PI: f64 = 0.564189583547756286948;

/// Errors from the G1 Hermite fit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClothoidError {
    /// Start and end positions coincide (or are non-finite); no arc exists.
    #[error("degenerate endpoints: start and end positions coincide")]
    DegenerateEndpoints,
    /// The root solve did not converge, or the solution failed the endpoint
    /// verification within `FIT_TOLERANCE`.
    #[error("clothoid fit did not converge to the requested poses")]
    NonConvergence,
}

/// Normalized Fresnel integrals `C(y) = ∫₀ʸ cos(π t²/2) dt` and
/// `S(y) = ∫₀ʸ sin(π t²/2) dt`, extended to negative `y` by odd symmetry.
///
/// Three evaluation branches: Maclaurin series for `|y| < 1`, rational
/// minimax approximations for `1 ≤ |y| < 6`, and the asymptotic auxiliary
/// expansion beyond. Absolute error is below 1e-9 everywhere.
pub fn fresnel_cs(y: f64) -> (f64, f64) {
    // Rational approximation tables for the auxiliary functions on [1, 6).
    const FRN: [f64; 12] = [
        0.49999988085884732562,
        1.3511177791210715095,
        1.3175407836168659241,
        1.1861149300293854992,
        0.7709627298888346769,
        0.4173874338787963957,
        0.19044202705272903923,
        0.06655998896627697537,
        0.022789258616785717418,
        0.0040116689358507943804,
        0.0012192036851249883877,
        0.0,
    ];
    const FRD: [f64; 12] = [
        1.0,
        2.7022305772400260215,
        4.2059268151438492767,
        4.5221882840107715516,
        3.7240352281630359588,
        2.4589286254678152943,
        1.3125491629443702962,
        0.5997685720120932908,
        0.20907680750378849485,
        0.07159621634657901433,
        0.012602969513793714191,
        0.0038302423512931250065,
    ];
    const GN: [f64; 12] = [
        0.50000014392706344801,
        0.032346434925349128728,
        0.17619325157863254363,
        0.038606273170706486252,
        0.023693692309257725361,
        0.007092018516845033662,
        0.0012492123212412087428,
        0.00044023040894778468486,
        -8.80266827476172521e-6,
        -1.4033554916580018648e-8,
        2.3509221782155474353e-10,
        0.0,
    ];
    const GD: [f64; 12] = [
        1.0,
        2.0646987497019598937,
        2.9109311766948031235,
        2.6561936751333032911,
        2.0195563983177268073,
        1.1167891129189363902,
        0.57267874755973172715,
        0.19408481169593070798,
        0.07634808341431248904,
        0.011573247407207865977,
        0.0044099273693067311209,
        -0.00009070958410429993314,
    ];
    const EPS: f64 = 1e-15;

    let x = y.abs();
    let (mut c, mut s);
    if x < 1.0 {
        // Power series around zero in t = (π/2) x².
        let t = std::f64::consts::FRAC_PI_2 * x * x;
        let t2 = t * t;

        // C series
        let mut term = x;
        let mut acc = x;
        let mut n = 1.0_f64;
        loop {
            // term_{k+1}/term_k = -t² (4k+1)/((2k)(2k+1)(4k+5))
            let k = n - 1.0;
            term *= -t2 * (4.0 * k + 1.0) / ((2.0 * k + 1.0) * (2.0 * k + 2.0) * (4.0 * k + 5.0));
            acc += term;
            if term.abs() < EPS * acc.abs() || n > 60.0 {
                break;
            }
            n += 1.0;
        }
        c = acc;

        // S series
        let mut term = x * t / 3.0;
        let mut acc = term;
        let mut n = 1.0_f64;
        loop {
            let k = n - 1.0;
            term *= -t2 * (4.0 * k + 3.0) / ((2.0 * k + 2.0) * (2.0 * k + 3.0) * (4.0 * k + 7.0));
            acc += term;
            if term.abs() < EPS * acc.abs() || n > 60.0 {
                break;
            }
            n += 1.0;
        }
        s = acc;
    } else if x < 6.0 {
        // Auxiliary functions f, g by rational approximation: a degree-10
        // numerator over a degree-11 denominator, Horner in x.
        let sum_p = |coef: &[f64; 12], x: f64| {
            let mut acc = coef[11];
            for k in (0..11).rev() {
                acc = acc * x + coef[k];
            }
            acc
        };
        let f = sum_p(&FRN, x) / sum_p(&FRD, x);
        let g = sum_p(&GN, x) / sum_p(&GD, x);
        let u = std::f64::consts::FRAC_PI_2 * x * x;
        let (su, cu) = u.sin_cos();
        c = 0.5 + f * su - g * cu;
        s = 0.5 - f * cu - g * su;
    } else {
        // Asymptotic auxiliary expansion for large argument:
        // f(x) ≈ (1/πx)·Σ (-1)^k (4k-1)!! z^{2k},
        // g(x) ≈ (z/πx)·Σ (-1)^k (4k+1)!! z^{2k},  z = 1/(π x²).
        let pix2 = std::f64::consts::PI * x * x;
        let z = 1.0 / pix2;
        let mut f = 0.0;
        let mut g = 0.0;
        let mut fk = 1.0_f64; // (4k-1)!! with k = 0 → 1
        let mut gk = 1.0_f64; // (4k+1)!! with k = 0 → 1
        let mut sign = 1.0_f64;
        let mut zpow = 1.0_f64;
        for k in 0..12 {
            let df = sign * fk * zpow;
            let dg = sign * gk * zpow;
            f += df;
            g += dg;
            if df.abs() < EPS && dg.abs() < EPS {
                break;
            }
            let kk = k as f64;
            fk *= (4.0 * kk + 1.0) * (4.0 * kk + 3.0);
            gk *= (4.0 * kk + 3.0) * (4.0 * kk + 5.0);
            sign = -sign;
            zpow *= z * z;
        }
        f /= std::f64::consts::PI * x;
        g *= z / (std::f64::consts::PI * x);
        let u = std::f64::consts::FRAC_PI_2 * x * x;
        let (su, cu) = u.sin_cos();
        c = 0.5 + f * su - g * cu;
        s = 0.5 - f * cu - g * su;
    }
    if y < 0.0 {
        c = -c;
        s = -s;
    }
    (c, s)
}

/// Reduced Lommel function `s_{μ,ν}(b) / b^{μ+1}` as a convergent series.
fn lommel_reduced(mu: f64, nu: f64, b: f64) -> f64 {
    let mut term = 1.0 / ((mu + nu + 1.0) * (mu - nu + 1.0));
    let mut acc = term;
    for n in 1..=100 {
        let n = n as f64;
        term *= (-b / (2.0 * n + mu - nu + 1.0)) * (b / (2.0 * n + mu + nu + 1.0));
        acc += term;
        if term.abs() < 1e-50 * acc.abs() {
            break;
        }
    }
    acc
}

/// Moments `X_k = ∫₀¹ tᵏ cos(bt) dt`, `Y_k = ∫₀¹ tᵏ sin(bt) dt` for
/// `k = 0..nk`. The three-term recurrence is used where stable (k < 2b) and a
/// Lommel-series continuation elsewhere.
fn eval_xy_a_zero(nk: usize, b: f64, x: &mut [f64], y: &mut [f64]) {
    let sb = b.sin();
    let cb = b.cos();
    let b2 = b * b;
    if b.abs() < 1e-3 {
        x[0] = 1.0 - (b2 / 6.0) * (1.0 - (b2 / 20.0) * (1.0 - b2 / 42.0));
        y[0] = (b / 2.0) * (1.0 - (b2 / 12.0) * (1.0 - b2 / 30.0));
    } else {
        x[0] = sb / b;
        y[0] = (1.0 - cb) / b;
    }
    // Recurrence in the stable region.
    let m = ((2.0 * b).floor() as i64).clamp(1, nk as i64 - 1) as usize;
    for k in 1..m {
        let kf = k as f64;
        x[k] = (sb - kf * y[k - 1]) / b;
        y[k] = (kf * x[k - 1] - cb) / b;
    }
    // Lommel continuation for the unstable region.
    if m < nk {
        let aa = b * sb;
        let dd = sb - b * cb;
        let bb = b * dd;
        let cc = -b2 * sb;
        let mut r_la = lommel_reduced(m as f64 + 0.5, 1.5, b);
        let mut r_ld = lommel_reduced(m as f64 + 0.5, 0.5, b);
        for k in m..nk {
            let kf = k as f64;
            let r_lb = lommel_reduced(kf + 1.5, 0.5, b);
            let r_lc = lommel_reduced(kf + 1.5, 1.5, b);
            x[k] = (kf * aa * r_la + bb * r_lb + cb) / (1.0 + kf);
            y[k] = (cc * r_lc + sb) / (2.0 + kf) + dd * r_ld;
            r_la = r_lc;
            r_ld = r_lb;
        }
    }
}

/// `∫₀¹ cos/sin(a t²/2 + b t) dt` for small `|a|`: Taylor expansion in `a`
/// around the pure-oscillation moments with `p` correction terms.
fn eval_xy_a_small(a: f64, b: f64, p: usize) -> (f64, f64) {
    debug_assert!(p < 11, "series order limited to keep moment arrays bounded");
    let nkk = 4 * p + 3;
    let mut x0 = [0.0; 43];
    let mut y0 = [0.0; 43];
    eval_xy_a_zero(nkk, b, &mut x0, &mut y0);

    let mut x = x0[0] - (a / 2.0) * y0[2];
    let mut y = y0[0] + (a / 2.0) * x0[2];

    let mut t = 1.0;
    let aa = -a * a / 4.0;
    for n in 1..=p {
        let nf = n as f64;
        t *= aa / (2.0 * nf * (2.0 * nf - 1.0));
        let bf = a / (4.0 * nf + 2.0);
        let jj = 4 * n;
        x += t * (x0[jj] - bf * y0[jj + 2]);
        y += t * (y0[jj] + bf * x0[jj + 2]);
    }
    (x, y)
}

/// `∫₀¹ cos/sin(a t²/2 + b t) dt` for general `a` by completing the square
/// and differencing normalized Fresnel integrals.
fn eval_xy_a_large(a: f64, b: f64) -> (f64, f64) {
    let s = if a > 0.0 { 1.0 } else { -1.0 };
    let absa = a.abs();
    let z = ONE_OVER_SQRT_PI * absa.sqrt();
    let ell = s * b * ONE_OVER_SQRT_PI / absa.sqrt();
    let g = -0.5 * s * b * b / absa;
    let (cl, sl) = fresnel_cs(ell);
    let (cz, sz) = fresnel_cs(ell + z);
    let dc = cz - cl;
    let ds = sz - sl;
    let cg = g.cos() / z;
    let sg = g.sin() / z;
    let x = cg * dc - s * sg * ds;
    let y = sg * dc + s * cg * ds;
    (x, y)
}

/// Generalized Fresnel integrals
/// `X(a,b,c) = ∫₀¹ cos(a t²/2 + b t + c) dt` and the matching sine integral.
pub fn generalized_fresnel(a: f64, b: f64, c: f64) -> (f64, f64) {
    let (x0, y0) = if a.abs() < 0.01 {
        eval_xy_a_small(a, b, 3)
    } else {
        eval_xy_a_large(a, b)
    };
    let (sc, cc) = c.sin_cos();
    (x0 * cc - y0 * sc, x0 * sc + y0 * cc)
}

/// A clothoid (linear-curvature) segment in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClothoidSegment {
    pub x0: f64,
    pub y0: f64,
    pub theta0: f64,
    pub kappa0: f64,
    /// Curvature rate dκ/ds.
    pub dk: f64,
    /// Total arc length (m), strictly positive.
    pub length: f64,
}

impl ClothoidSegment {
    /// A zero-curvature segment (straight line) of the given length.
    pub fn straight(x0: f64, y0: f64, theta: f64, length: f64) -> Self {
        Self {
            x0,
            y0,
            theta0: theta,
            kappa0: 0.0,
            dk: 0.0,
            length,
        }
    }

    /// Fit the clothoid joining `start = (x, y, heading)` to `end` with
    /// continuous position and heading (G1 Hermite data).
    ///
    /// Returns an error if the endpoints coincide or the root solve fails the
    /// endpoint verification within [`FIT_TOLERANCE`].
    pub fn fit_g1(start: (f64, f64, f64), end: (f64, f64, f64)) -> Result<Self, ClothoidError> {
        let (x0, y0, theta0) = start;
        let (x1, y1, theta1) = end;
        let dx = x1 - x0;
        let dy = y1 - y0;
        let r = dx.hypot(dy);
        if !r.is_finite() || r < 1e-9 {
            return Err(ClothoidError::DegenerateEndpoints);
        }
        let phi = dy.atan2(dx);
        let phi0 = wrap_angle(theta0 - phi);
        let phi1 = wrap_angle(theta1 - phi);
        let delta = phi1 - phi0;

        // Root problem: find A with Y(2A, delta - A, phi0) = 0.
        let g = |a: f64| generalized_fresnel(2.0 * a, delta - a, phi0).1;

        let mut a = initial_guess(phi0, phi1);
        let mut converged = false;
        for _ in 0..50 {
            let ga = g(a);
            if ga.abs() < 1e-12 {
                converged = true;
                break;
            }
            let h = 1e-6 * (1.0 + a.abs());
            let dg = (g(a + h) - g(a - h)) / (2.0 * h);
            if dg.abs() < 1e-14 {
                break;
            }
            let step = ga / dg;
            a -= step;
            if !a.is_finite() {
                break;
            }
        }
        if !converged {
            // Coarse scan for a bracketing sign change, then bisection.
            match scan_bisect(&g, initial_guess(phi0, phi1)) {
                Some(root) => a = root,
                None => return Err(ClothoidError::NonConvergence),
            }
        }

        let (xint, _) = generalized_fresnel(2.0 * a, delta - a, phi0);
        let length = r / xint;
        if !(length.is_finite() && length > 0.0) {
            return Err(ClothoidError::NonConvergence);
        }
        let kappa0 = (delta - a) / length;
        let dk = 2.0 * a / (length * length);
        let seg = Self {
            x0,
            y0,
            theta0,
            kappa0,
            dk,
            length,
        };

        // Endpoint verification.
        let (xe, ye) = seg.point_at(length);
        let pos_err = (xe - x1).hypot(ye - y1);
        let heading_err = wrap_angle(seg.heading_at(length) - theta1).abs();
        if pos_err > FIT_TOLERANCE || heading_err > FIT_TOLERANCE {
            return Err(ClothoidError::NonConvergence);
        }
        Ok(seg)
    }

    /// Position at arc length `s`.
    pub fn point_at(&self, s: f64) -> (f64, f64) {
        if s == 0.0 {
            return (self.x0, self.y0);
        }
        let (x, y) = generalized_fresnel(self.dk * s * s, self.kappa0 * s, self.theta0);
        (self.x0 + s * x, self.y0 + s * y)
    }

    /// Heading (rad) at arc length `s`.
    pub fn heading_at(&self, s: f64) -> f64 {
        wrap_angle(self.theta0 + s * (self.kappa0 + 0.5 * s * self.dk))
    }

    /// Signed curvature at arc length `s`.
    pub fn curvature_at(&self, s: f64) -> f64 {
        self.kappa0 + s * self.dk
    }

    /// Largest |curvature| over the segment. Curvature is linear in arc
    /// length, so the extremes sit at the endpoints.
    pub fn max_abs_curvature(&self) -> f64 {
        self.kappa0
            .abs()
            .max((self.kappa0 + self.dk * self.length).abs())
    }

    /// End pose `(x, y, heading)`.
    pub fn end_pose(&self) -> (f64, f64, f64) {
        let (x, y) = self.point_at(self.length);
        (x, y, self.heading_at(self.length))
    }

    /// Arc-length stations from 0 to `length` inclusive, spaced at most
    /// `step` apart (uniformly).
    pub fn sample_s(&self, step: f64) -> Vec<f64> {
        let n = (self.length / step).ceil().max(1.0) as usize;
        (0..=n).map(|i| self.length * i as f64 / n as f64).collect()
    }

    /// Points along the segment spaced at most `step` apart, endpoints
    /// included.
    pub fn sample_points(&self, step: f64) -> Vec<(f64, f64)> {
        self.sample_s(step)
            .into_iter()
            .map(|s| self.point_at(s))
            .collect()
    }
}

/// Starting point for the Newton iteration, from a fitted polynomial in the
/// normalized end headings (leading behaviour A ≈ 3(φ₀+φ₁)).
fn initial_guess(phi0: f64, phi1: f64) -> f64 {
    const CF: [f64; 6] = [
        2.989696028701907,
        0.716228953608281,
        -0.458969738821509,
        -0.502821153340377,
        0.261062141752652,
        -0.045854475238709,
    ];
    let x = phi0 / std::f64::consts::PI;
    let y = phi1 / std::f64::consts::PI;
    let xy = x * y;
    let x2 = x * x;
    let y2 = y * y;
    (phi0 + phi1)
        * (CF[0]
            + xy * (CF[1] + xy * CF[2])
            + (CF[3] + xy * CF[4]) * (x2 + y2)
            + CF[5] * (x2 * x2 + y2 * y2))
}

/// Fallback root search: coarse scan over A for sign changes of `g`, then
/// bisection on the bracket nearest the initial guess.
fn scan_bisect(g: &dyn Fn(f64) -> f64, near: f64) -> Option<f64> {
    let lo = -40.0;
    let hi = 40.0;
    let n = 640;
    let mut best: Option<(f64, f64)> = None;
    let mut prev_a = lo;
    let mut prev_g = g(lo);
    for i in 1..=n {
        let a = lo + (hi - lo) * i as f64 / n as f64;
        let ga = g(a);
        if prev_g == 0.0 {
            return Some(prev_a);
        }
        if prev_g * ga < 0.0 {
            let mid = 0.5 * (prev_a + a);
            let better = match best {
                None => true,
                Some((b, _)) => (mid - near).abs() < (b - near).abs(),
            };
            if better {
                best = Some((mid, prev_a));
            }
        }
        prev_a = a;
        prev_g = ga;
    }
    let (_, mut a_lo) = best?;
    let mut a_hi = a_lo + (hi - lo) / n as f64;
    let mut g_lo = g(a_lo);
    for _ in 0..200 {
        let mid = 0.5 * (a_lo + a_hi);
        let gm = g(mid);
        if gm.abs() < 1e-13 {
            return Some(mid);
        }
        if g_lo * gm <= 0.0 {
            a_hi = mid;
        } else {
            a_lo = mid;
            g_lo = gm;
        }
    }
    Some(0.5 * (a_lo + a_hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    /// Direct Simpson quadrature of ∫₀¹ cos/sin(a t²/2 + b t + c) dt,
    /// independent of the series/Fresnel evaluation above.
    fn quadrature_xy(a: f64, b: f64, c: f64) -> (f64, f64) {
        let n = 2000; // even
        let h = 1.0 / n as f64;
        let f = |t: f64| a * 0.5 * t * t + b * t + c;
        let mut sx = f(0.0).cos() + f(1.0).cos();
        let mut sy = f(0.0).sin() + f(1.0).sin();
        for i in 1..n {
            let t = i as f64 * h;
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sx += w * f(t).cos();
            sy += w * f(t).sin();
        }
        (sx * h / 3.0, sy * h / 3.0)
    }

    #[test]
    fn fresnel_matches_tabulated_values() {
        let table = [
            (0.5, 0.4923442259, 0.0647324329),
            (1.0, 0.7798934004, 0.4382591474),
            (1.5, 0.4452611760, 0.6975049601),
            (2.0, 0.4882534061, 0.3434156784),
            (2.5, 0.4574130096, 0.6191817558),
            (7.3, 0.5392680157, 0.5189473279),
        ];
        for (x, c_ref, s_ref) in table {
            let (c, s) = fresnel_cs(x);
            assert_abs_diff_eq!(c, c_ref, epsilon = 1e-8);
            assert_abs_diff_eq!(s, s_ref, epsilon = 1e-8);
        }
    }

    #[test]
    fn fresnel_is_odd() {
        for x in [0.3, 1.2, 2.7, 6.5] {
            let (cp, sp) = fresnel_cs(x);
            let (cn, sn) = fresnel_cs(-x);
            assert_eq!(cp, -cn);
            assert_eq!(sp, -sn);
        }
        assert_eq!(fresnel_cs(0.0), (0.0, 0.0));
    }

    #[test]
    fn generalized_fresnel_matches_quadrature() {
        let mut rng = crate::rng::stream(7, "fresnel-test", 0);
        for _ in 0..200 {
            let a: f64 = rng.gen_range(-30.0..30.0);
            let b: f64 = rng.gen_range(-10.0..10.0);
            let c: f64 = rng.gen_range(-3.2..3.2);
            let (x, y) = generalized_fresnel(a, b, c);
            let (xq, yq) = quadrature_xy(a, b, c);
            assert_abs_diff_eq!(x, xq, epsilon = 1e-7);
            assert_abs_diff_eq!(y, yq, epsilon = 1e-7);
        }
    }

    #[test]
    fn generalized_fresnel_small_a_branch_matches_quadrature() {
        let mut rng = crate::rng::stream(8, "fresnel-small-a", 0);
        for _ in 0..100 {
            let a: f64 = rng.gen_range(-0.009..0.009);
            let b: f64 = rng.gen_range(-20.0..20.0);
            let c: f64 = rng.gen_range(-3.2..3.2);
            let (x, y) = generalized_fresnel(a, b, c);
            let (xq, yq) = quadrature_xy(a, b, c);
            assert_abs_diff_eq!(x, xq, epsilon = 1e-8);
            assert_abs_diff_eq!(y, yq, epsilon = 1e-8);
        }
    }

    #[test]
    fn straight_fit_has_zero_curvature_everywhere() {
        let seg = ClothoidSegment::fit_g1((0.0, 0.0, 0.0), (5.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(seg.length, 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(seg.kappa0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(seg.dk, 0.0, epsilon = 1e-12);
        for s in seg.sample_s(0.25) {
            assert_abs_diff_eq!(seg.curvature_at(s), 0.0, epsilon = 1e-12);
            let (x, y) = seg.point_at(s);
            assert_abs_diff_eq!(x, s, epsilon = 1e-9);
            assert_abs_diff_eq!(y, 0.0, epsilon = 1e-9);
        }

        // A rotated/translated straight case behaves identically.
        let th = 0.7_f64;
        let seg = ClothoidSegment::fit_g1((2.0, -1.0, th), (2.0 + 8.0 * th.cos(), -1.0 + 8.0 * th.sin(), th))
            .unwrap();
        assert_abs_diff_eq!(seg.length, 8.0, epsilon = 1e-9);
        assert!(seg.max_abs_curvature() < 1e-10);
    }

    #[test]
    fn quarter_circle_fit_recovers_circular_arc() {
        // (0,0,heading 0) to (1,1,heading π/2) is the unit quarter circle:
        // length π/2, constant curvature 1.
        let seg =
            ClothoidSegment::fit_g1((0.0, 0.0, 0.0), (1.0, 1.0, std::f64::consts::FRAC_PI_2))
                .unwrap();
        assert_abs_diff_eq!(seg.length, std::f64::consts::FRAC_PI_2, epsilon = 1e-9);
        assert_abs_diff_eq!(seg.kappa0, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(seg.dk, 0.0, epsilon = 1e-8);
        // Midpoint sits on the circle centred at (0,1).
        let (xm, ym) = seg.point_at(seg.length / 2.0);
        assert_abs_diff_eq!(xm.hypot(ym - 1.0), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn s_curve_fit_is_antisymmetric() {
        // Equal start/end headings at an offset target give an S-shaped arc
        // whose end curvature mirrors the start curvature.
        let seg = ClothoidSegment::fit_g1((0.0, 0.0, 0.5), (4.0, 0.0, 0.5)).unwrap();
        let k_end = seg.curvature_at(seg.length);
        assert_abs_diff_eq!(seg.kappa0, -k_end, epsilon = 1e-9);
        assert!(seg.kappa0.abs() > 1e-3, "curve should actually bend");
    }

    #[test]
    fn random_pose_fits_verify_endpoints_by_quadrature() {
        let mut rng = crate::rng::stream(11, "g1-fit", 0);
        let mut fitted = 0;
        for _ in 0..400 {
            let x0: f64 = rng.gen_range(-10.0..10.0);
            let y0: f64 = rng.gen_range(-10.0..10.0);
            let t0: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let x1 = x0 + rng.gen_range(-6.0..6.0);
            let y1 = y0 + rng.gen_range(-6.0..6.0);
            let t1: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            if (x1 - x0).hypot(y1 - y0) < 0.3 {
                continue;
            }
            let Ok(seg) = ClothoidSegment::fit_g1((x0, y0, t0), (x1, y1, t1)) else {
                continue;
            };
            fitted += 1;

            // Independent endpoint check: integrate the heading law directly.
            let n = 4000;
            let h = seg.length / n as f64;
            let theta = |s: f64| seg.theta0 + s * (seg.kappa0 + 0.5 * s * seg.dk);
            let mut xi = theta(0.0).cos() + theta(seg.length).cos();
            let mut yi = theta(0.0).sin() + theta(seg.length).sin();
            for i in 1..n {
                let s = i as f64 * h;
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                xi += w * theta(s).cos();
                yi += w * theta(s).sin();
            }
            let xe = seg.x0 + xi * h / 3.0;
            let ye = seg.y0 + yi * h / 3.0;
            assert_abs_diff_eq!(xe, x1, epsilon = 2e-3);
            assert_abs_diff_eq!(ye, y1, epsilon = 2e-3);
            // Fit's own endpoint must satisfy the declared tolerance.
            let (fx, fy, ft) = seg.end_pose();
            assert!((fx - x1).hypot(fy - y1) <= FIT_TOLERANCE);
            assert!(wrap_angle(ft - t1).abs() <= FIT_TOLERANCE);
        }
        assert!(fitted > 350, "only {fitted} of the random fits converged");
    }

    #[test]
    fn degenerate_endpoints_are_rejected() {
        let err = ClothoidSegment::fit_g1((1.0, 2.0, 0.3), (1.0, 2.0, 1.0)).unwrap_err();
        assert_eq!(err, ClothoidError::DegenerateEndpoints);
    }

    #[test]
    fn sampling_covers_both_endpoints_within_step() {
        let seg = ClothoidSegment::fit_g1((0.0, 0.0, 0.2), (6.0, 2.0, -0.4)).unwrap();
        let pts = seg.sample_points(0.5);
        assert!(pts.len() >= 2);
        let (x0, y0) = pts[0];
        assert_abs_diff_eq!(x0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y0, 0.0, epsilon = 1e-12);
        let (xl, yl) = *pts.last().unwrap();
        assert!((xl - 6.0).hypot(yl - 2.0) <= FIT_TOLERANCE);
        for w in pts.windows(2) {
            let d = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
            assert!(d <= 0.5 + 1e-9, "chord {d} exceeds the sampling step");
        }
    }
}
