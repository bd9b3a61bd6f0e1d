//! Escape-rate Green functions of Hénon words, raster slices and batch evaluation.
//!
//! All estimates live in the Hénon coordinates of a [`HenonForm`]. Escape is
//! certified by a filtration: with `R` at least the filtration radius, the
//! region `V+ = {|x| >= max(|y|, R)}` is forward invariant and every factor
//! multiplies `log|x|` by its degree up to a bounded additive error. That turns
//! the `O(1)` in `G(z) = log‖z‖ + O(1)` into the explicit constant `C'`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::automorphism::{HenonFactor, HenonForm};
use crate::error::{Error, Result};
use crate::exec::Exec;

pub type Point = (Complex64, Complex64);

/// Above this modulus orbits are followed through `log|x|` only.
const LOG_MODE_THRESHOLD: f64 = 1e150;
/// Guard keeping the next factor evaluation inside the double range.
const LOG_OVERFLOW_GUARD: f64 = 650.0;
pub const DEFAULT_MAX_ITER: u32 = 200;
pub const MAX_RASTER_CELLS: u64 = 8192 * 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenEstimate {
    pub value: f64,
    pub iterations_used: u32,
    /// `|value - G| <= error_bound` up to floating round-off.
    pub error_bound: f64,
    pub escaped: bool,
}

/// One factor `(a y + p(x), x)` with embedded coefficients.
#[derive(Debug, Clone)]
pub struct NumericFactor {
    pub a: Complex64,
    /// Ascending coefficients of `p`.
    pub p: Vec<Complex64>,
    degree: u32,
    lead_abs: f64,
    /// Sum of `|p_i|` below the leading term.
    lower_abs: f64,
}

impl NumericFactor {
    fn new(a: Complex64, p: Vec<Complex64>) -> Self {
        let degree = (p.len() - 1) as u32;
        let lead_abs = p[degree as usize].norm();
        let lower_abs = p[..degree as usize].iter().map(|c| c.norm()).sum();
        NumericFactor { a, p, degree, lead_abs, lower_abs }
    }

    fn from_exact(f: &HenonFactor) -> Self {
        Self::new(f.a.embed(), f.numeric_coeffs())
    }

    /// `sigma ∘ H^{-1} ∘ sigma = ((y - p(x))/a, x)`, again a Hénon factor.
    fn swapped_inverse(&self) -> Self {
        let inv_a = self.a.inv();
        Self::new(inv_a, self.p.iter().map(|c| -c * inv_a).collect())
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn apply(&self, (x, y): Point) -> Point {
        (self.a * y + crate::roots::horner(&self.p, x), x)
    }

    /// `p'(x)` at `x`; the factor Jacobian is `[[p'(x), a], [1, 0]]`.
    pub fn dp(&self, x: Complex64) -> Complex64 {
        crate::roots::horner_with_derivative(&self.p, x).1
    }

    /// Radius beyond which `V+` maps into itself with `|X| >= 2|x|`.
    fn radius(&self) -> f64 {
        let d = self.degree as f64;
        let r1 = 2.0 * (self.lower_abs + self.a.norm()) / self.lead_abs;
        let r2 = (4.0 / self.lead_abs).powf(1.0 / (d - 1.0));
        1f64.max(r1).max(r2)
    }

    /// `[lo, hi]` with `log|X| - d log|x|` in that range on `V+`.
    fn filtration_log_window(&self) -> (f64, f64) {
        ((self.lead_abs / 2.0).ln(), (self.lead_abs + self.lower_abs + self.a.norm()).ln())
    }

    /// `log+‖H(z)‖ <= d log+‖z‖ + u` everywhere.
    fn global_log_excess(&self) -> f64 {
        (self.a.norm() + self.lead_abs + self.lower_abs).max(1.0).ln()
    }
}

/// A Hénon word `H_1 ∘ ... ∘ H_k` with embedded coefficients.
#[derive(Debug, Clone)]
pub struct NumericHenon {
    /// Outermost factor first; application runs from the back.
    pub factors: Vec<NumericFactor>,
}

impl NumericHenon {
    pub fn from_form(h: &HenonForm) -> Self {
        NumericHenon { factors: h.factors.iter().map(NumericFactor::from_exact).collect() }
    }

    /// `sigma ∘ f^{-1} ∘ sigma`: forward escape of this word is backward escape of `f`.
    pub fn swapped_inverse(&self) -> Self {
        NumericHenon { factors: self.factors.iter().rev().map(NumericFactor::swapped_inverse).collect() }
    }

    pub fn degree(&self) -> u64 {
        self.factors.iter().map(|f| f.degree as u64).product()
    }

    pub fn apply(&self, z: Point) -> Point {
        self.factors.iter().rev().fold(z, |z, f| f.apply(z))
    }

    /// Closed-form inverse `(x, y) -> (y, (x - p(y))/a)` per factor.
    pub fn apply_inverse(&self, z: Point) -> Point {
        self.factors.iter().fold(z, |(x, y), f| (y, (x - crate::roots::horner(&f.p, y)) / f.a))
    }

    /// Jacobian matrix of the word at `z`.
    pub fn jacobian(&self, z: Point) -> [[Complex64; 2]; 2] {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut m = [[one, zero], [zero, one]];
        let mut z = z;
        for f in self.factors.iter().rev() {
            let j = [[f.dp(z.0), f.a], [one, zero]];
            m = mat_mul(j, m);
            z = f.apply(z);
        }
        m
    }

    fn filtration_radius(&self) -> f64 {
        self.factors.iter().map(NumericFactor::radius).fold(1.0, f64::max)
    }

    /// Weights `w_j` = product of the degrees of factors applied after factor j.
    fn weights(&self) -> Vec<f64> {
        let mut w = vec![1.0; self.factors.len()];
        let mut acc = 1.0;
        for (j, f) in self.factors.iter().enumerate() {
            w[j] = acc;
            acc *= f.degree as f64;
        }
        w
    }

    /// `sup |G - log‖z‖|` on the filtration region, and the global excess of `G` over `log+‖z‖`.
    fn constants(&self) -> (f64, f64) {
        let d = self.degree() as f64;
        let w = self.weights();
        let (mut lo, mut hi, mut glob) = (0.0, 0.0, 0.0);
        for (f, wj) in self.factors.iter().zip(&w) {
            let (l, h) = f.filtration_log_window();
            lo += wj * l;
            hi += wj * h;
            glob += wj * f.global_log_excess();
        }
        (lo.abs().max(hi.abs()) / (d - 1.0), glob / (d - 1.0))
    }
}

pub(crate) fn mat_mul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn max_norm((x, y): Point) -> f64 {
    x.norm().max(y.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GreenMode {
    Gplus,
    Gminus,
    Gmax,
}

/// Forward and backward Green functions of one Hénon form.
#[derive(Debug, Clone)]
pub struct GreenFunctions {
    forward: NumericHenon,
    backward: NumericHenon,
    radius: f64,
    c_prime: f64,
}

impl GreenFunctions {
    pub fn new(h: &HenonForm) -> Self {
        Self::from_numeric(NumericHenon::from_form(h))
    }

    pub fn from_numeric(forward: NumericHenon) -> Self {
        let backward = forward.swapped_inverse();
        let radius = forward.filtration_radius().max(backward.filtration_radius());
        let (f_filt, f_glob) = forward.constants();
        let (b_filt, b_glob) = backward.constants();
        let c_prime = f_filt.max(f_glob).max(b_filt).max(b_glob);
        GreenFunctions { forward, backward, radius, c_prime }
    }

    pub fn map(&self) -> &NumericHenon {
        &self.forward
    }

    pub fn degree(&self) -> u64 {
        self.forward.degree()
    }

    /// Filtration radius `R0`: escape radii below it are rejected.
    pub fn filtration_radius(&self) -> f64 {
        self.radius
    }

    /// `C'` with `|max(G+, G-)(z) - log‖z‖| <= C'` once `‖z‖ >= R0`.
    pub fn c_prime(&self) -> f64 {
        self.c_prime
    }

    pub fn plus(&self, z: Point, max_iter: u32, escape_radius: f64) -> Result<GreenEstimate> {
        self.check(z, escape_radius)?;
        Ok(escape_rate(&self.forward, z, max_iter, escape_radius, self.c_prime))
    }

    pub fn minus(&self, z: Point, max_iter: u32, escape_radius: f64) -> Result<GreenEstimate> {
        self.check(z, escape_radius)?;
        Ok(escape_rate(&self.backward, (z.1, z.0), max_iter, escape_radius, self.c_prime))
    }

    pub fn eval(&self, mode: GreenMode, z: Point, max_iter: u32, escape_radius: f64) -> Result<GreenEstimate> {
        match mode {
            GreenMode::Gplus => self.plus(z, max_iter, escape_radius),
            GreenMode::Gminus => self.minus(z, max_iter, escape_radius),
            GreenMode::Gmax => {
                let p = self.plus(z, max_iter, escape_radius)?;
                let m = self.minus(z, max_iter, escape_radius)?;
                let top = if p.value >= m.value { p } else { m };
                Ok(GreenEstimate {
                    value: top.value,
                    iterations_used: p.iterations_used.max(m.iterations_used),
                    error_bound: p.error_bound.max(m.error_bound),
                    escaped: p.escaped || m.escaped,
                })
            }
        }
    }

    fn check(&self, z: Point, escape_radius: f64) -> Result<()> {
        if ![z.0.re, z.0.im, z.1.re, z.1.im, escape_radius].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if escape_radius < self.radius {
            return Err(Error::InvalidRadius { given: escape_radius, required: self.radius });
        }
        Ok(())
    }
}

enum Orbit {
    Finite(Point),
    /// `log|x| / s` once the orbit is deep inside the filtration region.
    Log(f64),
}

fn escape_rate(h: &NumericHenon, z: Point, max_iter: u32, radius: f64, c_prime: f64) -> GreenEstimate {
    let big_d = h.degree() as f64;
    let mut orbit = Orbit::Finite(z);
    let mut scale = 1.0f64;
    let mut escaped = false;
    let mut value = 0.0;
    let mut n = 0;
    while n < max_iter {
        for f in h.factors.iter().rev() {
            let d = f.degree as f64;
            orbit = match orbit {
                Orbit::Finite((x, y)) => {
                    let ax = x.norm();
                    let in_filtration = ax >= radius && ax >= y.norm();
                    escaped |= in_filtration;
                    let overflow_risk = d * ax.ln() + (f.lead_abs + f.lower_abs + f.a.norm()).ln() > LOG_OVERFLOW_GUARD;
                    if in_filtration && (ax > LOG_MODE_THRESHOLD || overflow_risk) {
                        Orbit::Log(ax.ln() / scale + f.lead_abs.ln() / (scale * d))
                    } else {
                        Orbit::Finite(f.apply((x, y)))
                    }
                }
                Orbit::Log(g) => Orbit::Log(g + f.lead_abs.ln() / (scale * d)),
            };
            scale *= d;
        }
        n += 1;
        if let Orbit::Finite((x, y)) = orbit {
            let ax = x.norm();
            escaped |= ax >= radius && ax >= y.norm();
        }
        if escaped {
            value = match orbit {
                Orbit::Finite(p) => max_norm(p).ln() / scale,
                Orbit::Log(g) => g,
            };
        }
        if let Orbit::Finite(p) = orbit {
            if !max_norm(p).is_finite() {
                break;
            }
        }
    }
    GreenEstimate {
        value: value.max(0.0),
        iterations_used: n,
        error_bound: c_prime * big_d.powi(-(n as i32)),
        escaped,
    }
}

/// `G+` at `z` in the Hénon coordinates of `h`.
pub fn green_plus(h: &HenonForm, z: Point, max_iter: u32, escape_radius: f64) -> Result<GreenEstimate> {
    GreenFunctions::new(h).plus(z, max_iter, escape_radius)
}

/// `G-` at `z`, via the closed-form inverse of the word.
pub fn green_minus(h: &HenonForm, z: Point, max_iter: u32, escape_radius: f64) -> Result<GreenEstimate> {
    GreenFunctions::new(h).minus(z, max_iter, escape_radius)
}

/// Evaluates many points; results are in input order under either policy.
pub fn green_batch(
    g: &GreenFunctions,
    mode: GreenMode,
    points: &[Point],
    max_iter: u32,
    escape_radius: f64,
    exec: Exec,
) -> Result<Vec<GreenEstimate>> {
    exec.map_indexed(points.len(), |i| g.eval(mode, points[i], max_iter, escape_radius)).into_iter().collect()
}

/// Real 2-parameter chart `origin + s u + t v`, `s, t ∈ [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    pub origin: Point,
    pub u: Point,
    pub v: Point,
}

impl Chart {
    /// Axis-aligned window on the real `(x, y)`-plane, half-width `radius`.
    pub fn real_square(center: (f64, f64), radius: f64) -> Self {
        let c = |r: f64| Complex64::new(r, 0.0);
        Chart { origin: (c(center.0), c(center.1)), u: (c(radius), c(0.0)), v: (c(0.0), c(radius)) }
    }

    /// Cell centres: a 1×1 grid samples the origin.
    pub fn point(&self, i: u32, j: u32, nx: u32, ny: u32) -> Point {
        let s = -1.0 + (2.0 * i as f64 + 1.0) / nx as f64;
        let t = -1.0 + (2.0 * j as f64 + 1.0) / ny as f64;
        (self.origin.0 + self.u.0 * s + self.v.0 * t, self.origin.1 + self.u.1 * s + self.v.1 * t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub nx: u32,
    pub ny: u32,
    /// Row-major, `ny` rows of `nx` values.
    pub values: Vec<f64>,
}

impl Raster {
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Plain PGM with values scaled from `[0, G_max]` onto `0..=65535`.
    pub fn to_pgm(&self) -> String {
        let g_max = self.max_value();
        let mut out = format!("P2\n# G_max {g_max:e}\n{} {}\n65535\n", self.nx, self.ny);
        for row in self.values.chunks(self.nx as usize) {
            let line: Vec<String> = row
                .iter()
                .map(|v| if g_max > 0.0 { ((v / g_max) * 65535.0).round() as u32 } else { 0 }.to_string())
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.nx as usize) {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v:e}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn raster_slice(
    g: &GreenFunctions,
    chart: &Chart,
    (nx, ny): (u32, u32),
    mode: GreenMode,
    max_iter: u32,
    exec: Exec,
) -> Result<Raster> {
    let cells = nx as u64 * ny as u64;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("raster resolution must be positive".into()));
    }
    if cells > MAX_RASTER_CELLS {
        return Err(Error::ResourceCap(format!("{nx}x{ny} raster exceeds {MAX_RASTER_CELLS} cells")));
    }
    let radius = g.filtration_radius();
    let rows: Vec<Result<Vec<f64>>> = exec.map_indexed(ny as usize, |j| {
        (0..nx).map(|i| g.eval(mode, chart.point(i, j as u32, nx, ny), max_iter, radius).map(|e| e.value)).collect()
    });
    let mut values = Vec::with_capacity(cells as usize);
    for row in rows {
        values.extend(row?);
    }
    Ok(Raster { nx, ny, values })
}
