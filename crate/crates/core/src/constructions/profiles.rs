//! Single-variable profiles (ψ, K, L, φ, p_ℓ) with derivatives and a constraint audit.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const AUDIT_SAMPLES: usize = 10_000;
const AUDIT_TOL: f64 = 1e-12;

/// Quintic smoothstep `6t⁵ − 15t⁴ + 10t³` with two derivatives, clamped outside `[0, 1]`.
pub fn smoothstep(t: f64) -> [f64; 3] {
    if t <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    if t >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let (t2, t3) = (t * t, t * t * t);
    [
        t3 * (10.0 + t * (-15.0 + 6.0 * t)),
        30.0 * t2 * (1.0 - t) * (1.0 - t),
        60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
    ]
}

/// `∫₀ᵗ smoothstep`, valid on `[0, 1]`.
fn smoothstep_integral(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t.powi(4) * (2.5 + t * (-3.0 + t))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileName {
    PsiTurb,
    K,
    L,
    Phi,
    PEll(u32),
    Custom(String),
}

impl fmt::Display for ProfileName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileName::PsiTurb => write!(f, "psi"),
            ProfileName::K => write!(f, "K"),
            ProfileName::L => write!(f, "L"),
            ProfileName::Phi => write!(f, "phi"),
            ProfileName::PEll(l) => write!(f, "p_{l}"),
            ProfileName::Custom(s) => write!(f, "{s}"),
        }
    }
}

type Curve = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

#[derive(Clone)]
enum Shape {
    /// Value knots joined by smoothsteps, constant outside.
    Values(Vec<(f64, f64)>),
    /// Derivative knots joined by smoothsteps, integrated from `start` at the first knot.
    Slopes { knots: Vec<(f64, f64)>, start: f64, partial: Vec<f64> },
    Curve(Curve),
}

/// One named condition. `violation` returns a positive amount when it fails at a point.
#[derive(Clone)]
pub struct Constraint {
    pub label: String,
    pub interval: (f64, f64),
    /// Sample interior midpoints only (strict conditions on open intervals).
    pub open: bool,
    violation: Arc<dyn Fn(f64, [f64; 3]) -> f64 + Send + Sync>,
}

impl Constraint {
    pub fn new(
        label: impl Into<String>,
        interval: (f64, f64),
        open: bool,
        violation: impl Fn(f64, [f64; 3]) -> f64 + Send + Sync + 'static,
    ) -> Constraint {
        Constraint { label: label.into(), interval, open, violation: Arc::new(violation) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditEntry {
    pub label: String,
    pub worst_violation: f64,
    pub witness: f64,
    pub ok: bool,
}

#[derive(Clone)]
pub struct Profile {
    pub name: ProfileName,
    pub domain: (f64, f64),
    shape: Shape,
    constraints: Vec<Constraint>,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

impl Profile {
    /// `[f, f', f'']` at `x`.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        match &self.shape {
            Shape::Values(k) => values_eval(k, x),
            Shape::Slopes { knots, start, partial } => slopes_eval(knots, *start, partial, x),
            Shape::Curve(c) => c(x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x)[0]
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.eval(x)[1]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Checks every constraint at [`AUDIT_SAMPLES`] points of its interval.
    pub fn audit(&self) -> Vec<AuditEntry> {
        self.constraints
            .iter()
            .map(|c| {
                let (a, b) = c.interval;
                let n = AUDIT_SAMPLES;
                let mut worst = f64::NEG_INFINITY;
                let mut witness = a;
                for i in 0..n {
                    let x = if c.open {
                        a + (b - a) * (i as f64 + 0.5) / n as f64
                    } else {
                        a + (b - a) * i as f64 / (n - 1) as f64
                    };
                    let v = (c.violation)(x, self.eval(x));
                    if v > worst || v.is_nan() {
                        worst = v;
                        witness = x;
                    }
                }
                AuditEntry { label: c.label.clone(), worst_violation: worst, witness, ok: worst <= AUDIT_TOL }
            })
            .collect()
    }

    fn audited(self) -> Result<Profile> {
        let bad: Vec<String> = self
            .audit()
            .into_iter()
            .filter(|e| !e.ok)
            .map(|e| format!("{} {} (violation {:.3e} at {})", self.name, e.label, e.worst_violation, e.witness))
            .collect();
        if bad.is_empty() {
            Ok(self)
        } else {
            Err(Error::Constraint(bad.join("; ")))
        }
    }

    /// A profile from an arbitrary curve with no named constraints (overrides and negative tests).
    pub fn custom(label: &str, domain: (f64, f64), f: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static) -> Profile {
        Profile { name: ProfileName::Custom(label.into()), domain, shape: Shape::Curve(Arc::new(f)), constraints: vec![] }
    }

    pub fn constant(label: &str, domain: (f64, f64), c: f64) -> Profile {
        Profile::custom(label, domain, move |_| [c, 0.0, 0.0])
    }
}

fn segment(knots: &[(f64, f64)], x: f64) -> Option<usize> {
    if x < knots[0].0 || x >= knots[knots.len() - 1].0 {
        return None;
    }
    knots.windows(2).position(|w| x >= w[0].0 && x < w[1].0)
}

fn values_eval(k: &[(f64, f64)], x: f64) -> [f64; 3] {
    match segment(k, x) {
        None if x < k[0].0 => [k[0].1, 0.0, 0.0],
        None => [k[k.len() - 1].1, 0.0, 0.0],
        Some(i) => {
            let ((x0, y0), (x1, y1)) = (k[i], k[i + 1]);
            let w = x1 - x0;
            let s = smoothstep((x - x0) / w);
            let dy = y1 - y0;
            [y0 + dy * s[0], dy * s[1] / w, dy * s[2] / (w * w)]
        }
    }
}

fn slope_partials(knots: &[(f64, f64)], start: f64) -> Vec<f64> {
    let mut acc = vec![start];
    for w in knots.windows(2) {
        let last = *acc.last().expect("non-empty");
        acc.push(last + (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1));
    }
    acc
}

fn slopes_eval(k: &[(f64, f64)], start: f64, partial: &[f64], x: f64) -> [f64; 3] {
    match segment(k, x) {
        None if x < k[0].0 => [start + k[0].1 * (x - k[0].0), k[0].1, 0.0],
        None => {
            let (xe, ye) = k[k.len() - 1];
            [partial[k.len() - 1] + ye * (x - xe), ye, 0.0]
        }
        Some(i) => {
            let ((x0, y0), (x1, y1)) = (k[i], k[i + 1]);
            let w = x1 - x0;
            let t = (x - x0) / w;
            let s = smoothstep(t);
            let dy = y1 - y0;
            [
                partial[i] + y0 * w * t + dy * w * smoothstep_integral(t),
                y0 + dy * s[0],
                dy * s[1] / w,
            ]
        }
    }
}

/// Parameters of the end profile `K`. The descent knots give `K′` on `[4, 8]`
/// up to a common factor fixed so that `K(8) = 0`, unless `scale` is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KParams {
    /// Width of the smoothstep that takes `K′` from 1 down to 0 after `ϱ = 3`.
    pub ramp: f64,
    /// Interior knots `(ϱ, shape)` on `(4, 8)`; `K′ = −scale · shape`.
    pub descent: Vec<(f64, f64)>,
    pub scale: Option<f64>,
}

impl Default for KParams {
    fn default() -> Self {
        KParams {
            ramp: 0.2,
            descent: vec![(4.3, 0.5), (5.0, 0.62), (5.7, 0.85), (6.3, 1.0), (7.75, 1.0)],
            scale: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProfileParams {
    PsiTurb,
    K(KParams),
    /// `L` rising from 0 to the plateau `a`.
    L { a: f64 },
    Phi { plateaus: [f64; 2] },
    PEll(u32),
}

pub fn build_profile(params: &ProfileParams) -> Result<Profile> {
    match params {
        ProfileParams::PsiTurb => psi(),
        ProfileParams::K(k) => k_profile(k),
        ProfileParams::L { a } => l_profile(*a),
        ProfileParams::Phi { plateaus } => phi_profile(*plateaus),
        ProfileParams::PEll(l) => p_ell(*l),
    }
}

fn le(v: f64, bound: f64) -> f64 {
    v - bound
}

fn psi() -> Result<Profile> {
    Profile {
        name: ProfileName::PsiTurb,
        domain: (0.0, 1.0),
        shape: Shape::Values(vec![(0.5, 1.0), (1.0, 0.0)]),
        constraints: vec![
            Constraint::new("psi = 1 on [0, 1/2]", (0.0, 0.5), false, |_, f| (f[0] - 1.0).abs()),
            Constraint::new("psi' < 0 on (1/2, 1)", (0.5, 1.0), true, |_, f| if f[1] < 0.0 { 0.0 } else { 1.0 + f[1] }),
            Constraint::new("psi(1) = 0, flat to second order", (1.0, 1.0), false, |_, f| {
                f[0].abs().max(f[1].abs()).max(f[2].abs())
            }),
            Constraint::new("0 <= psi <= 1", (0.0, 1.0), false, |_, f| (-f[0]).max(f[0] - 1.0)),
        ],
    }
    .audited()
}

fn k_profile(p: &KParams) -> Result<Profile> {
    if !(p.ramp > 0.0 && p.ramp < 1.0) {
        return Err(Error::Constraint(format!("K ramp width {} outside (0, 1)", p.ramp)));
    }
    if p.descent.windows(2).any(|w| w[1].0 <= w[0].0) || p.descent.iter().any(|k| k.0 <= 4.0 || k.0 >= 8.0) {
        return Err(Error::Constraint("K descent knots must increase strictly inside (4, 8)".into()));
    }
    let mut base = vec![(4.0, 0.0)];
    base.extend(p.descent.iter().copied());
    base.push((8.0, 0.0));
    let k4 = 3.0 + p.ramp * 0.5;
    let scale = match p.scale {
        Some(s) => s,
        None => {
            let area = slope_partials(&base, 0.0).last().copied().unwrap_or(0.0);
            if area <= 0.0 {
                return Err(Error::Constraint("K descent shape has no area".into()));
            }
            k4 / area
        }
    };
    let mut knots = vec![(1.0, 1.0), (3.0, 1.0), (3.0 + p.ramp, 0.0)];
    knots.extend(base.iter().map(|&(x, y)| (x, -scale * y)));
    let mut partial = slope_partials(&knots, 1.0);
    if p.scale.is_none() {
        // K(8) is zero by the choice of scale; drop the rounding left over from the sum
        *partial.last_mut().expect("non-empty") = 0.0;
    }
    Profile {
        name: ProfileName::K,
        domain: (1.0, 10.0),
        shape: Shape::Slopes { knots, start: 1.0, partial },
        constraints: vec![
            Constraint::new("(K-1) K = rho on [1, 3]", (1.0, 3.0), false, |x, f| (f[0] - x).abs()),
            Constraint::new("(K-2) 0 <= K' <= 1 on [3, 4)", (3.0, 4.0), true, |_, f| (-f[1]).max(f[1] - 1.0)),
            Constraint::new("(K-3) -1 <= K' <= 0 on (4, 8]", (4.0, 8.0), true, |_, f| le(f[1], 0.0).max(-1.0 - f[1])),
            Constraint::new("(K-4) K = 0 on [8, 10]", (8.0, 10.0), false, |_, f| f[0].abs().max(f[1].abs())),
            Constraint::new("|K'K| < 4", (1.0, 10.0), false, |_, f| (f[0] * f[1]).abs() - 4.0 + 1e-9),
            Constraint::new("|K'K| < 2.2 on [4, 8] (fits a = 1.1 (2A + bC)/(bm))", (4.0, 8.0), false, |_, f| {
                (f[0] * f[1]).abs() - 2.2 + 1e-9
            }),
        ],
    }
    .audited()
}

fn l_profile(a: f64) -> Result<Profile> {
    if !(a > 0.0) {
        return Err(Error::Constraint(format!("L plateau a = {a} must be positive")));
    }
    Profile {
        name: ProfileName::L,
        domain: (1.0, 10.0),
        shape: Shape::Values(vec![(2.0, 0.0), (3.0, a)]),
        constraints: vec![
            Constraint::new("(L-1) L = 0 on [1, 2]", (1.0, 2.0), false, |_, f| f[0].abs()),
            Constraint::new("(L-2) L' > 0 on (2, 3)", (2.0, 3.0), true, |_, f| if f[1] > 0.0 { 0.0 } else { 1.0 - f[1] }),
            Constraint::new("(L-3) L = a on [3, 10]", (3.0, 10.0), false, move |_, f| (f[0] - a).abs()),
        ],
    }
    .audited()
}

fn phi_profile(plateaus: [f64; 2]) -> Result<Profile> {
    let [lo, hi] = plateaus;
    let shape = Shape::Values(vec![
        (-1.0, 0.0),
        (-2.0 / 3.0, lo),
        (-1.0 / 3.0, lo),
        (1.0 / 3.0, hi),
        (2.0 / 3.0, hi),
        (1.0, PI),
    ]);
    Profile {
        name: ProfileName::Phi,
        domain: (-2.0, 2.0),
        shape,
        constraints: vec![
            Constraint::new("(i) phi = 0 for tau <= -1", (-2.0, -1.0), false, |_, f| f[0].abs()),
            Constraint::new("(ii) phi = pi for tau >= 1", (1.0, 2.0), false, |_, f| (f[0] - PI).abs()),
            Constraint::new("(iii) phi(0) = pi/2", (0.0, 0.0), false, |_, f| (f[0] - PI / 2.0).abs()),
            Constraint::new("(iv) phi' >= 0 on (-1, 1)", (-1.0, 1.0), true, |_, f| -f[1]),
            Constraint::new("(v) phi = pi/4 on (-2/3, -1/3)", (-2.0 / 3.0, -1.0 / 3.0), true, |_, f| (f[0] - PI / 4.0).abs()),
            Constraint::new("(vi) phi = 3pi/4 on (1/3, 2/3)", (1.0 / 3.0, 2.0 / 3.0), true, |_, f| {
                (f[0] - 3.0 * PI / 4.0).abs()
            }),
        ],
    }
    .audited()
}

/// Reparametrisation `σ` of `|τ|`: identity up to 1/2, constant 1 after 3/2, C² in between.
pub fn sigma(t: f64) -> [f64; 3] {
    if t <= 0.5 {
        [t, 1.0, 0.0]
    } else if t >= 1.5 {
        [1.0, 0.0, 0.0]
    } else {
        let s = t - 0.5;
        // H(s) = 2s − 2s³ + s⁴, H' = 2(1−s)²(1+2s)
        let h = 2.0 * s - 2.0 * s.powi(3) + s.powi(4);
        let h1 = 2.0 - 6.0 * s * s + 4.0 * s.powi(3);
        let h2 = -12.0 * s + 12.0 * s * s;
        [0.5 + 0.5 * h, 0.5 * h1, 0.5 * h2]
    }
}

/// `p_ℓ(τ) = sign(τ)^ℓ σ(|τ|)^{−ℓ}`; `p_0 ≡ 1`.
pub fn p_ell_eval(ell: u32, tau: f64) -> [f64; 3] {
    if ell == 0 {
        return [1.0, 0.0, 0.0];
    }
    let l = ell as f64;
    let (sg, [s, s1, s2]) = if tau >= 0.0 {
        (1.0, sigma(tau))
    } else {
        let [s, s1, s2] = sigma(-tau);
        (if ell % 2 == 0 { 1.0 } else { -1.0 }, [s, -s1, s2])
    };
    let f = s.powf(-l);
    let f1 = -l * s.powf(-l - 1.0) * s1;
    let f2 = l * (l + 1.0) * s.powf(-l - 2.0) * s1 * s1 - l * s.powf(-l - 1.0) * s2;
    [sg * f, sg * f1, sg * f2]
}

fn p_ell(ell: u32) -> Result<Profile> {
    let odd = ell % 2 == 1;
    let far_left = if odd { -1.0 } else { 1.0 };
    let mut constraints = vec![
        Constraint::new("(ii) p = (-1)^l on (-2, -3/2)", (-2.0, -1.5), true, move |_, f| (f[0] - far_left).abs()),
        Constraint::new("(iii) p = 1 on (3/2, 2)", (1.5, 2.0), true, |_, f| (f[0] - 1.0).abs()),
    ];
    if ell == 0 {
        constraints.push(Constraint::new("p = 1 on (-2, 2)", (-2.0, 2.0), false, |_, f| (f[0] - 1.0).abs()));
    } else {
        let l = ell as i32;
        constraints.push(Constraint::new("(i) p = 1/tau^l on (-1/2, 0)", (-0.5, 0.0), true, move |x, f| {
            (f[0] * x.powi(l) - 1.0).abs()
        }));
        constraints.push(Constraint::new("(i) p = 1/tau^l on (0, 1/2)", (0.0, 0.5), true, move |x, f| {
            (f[0] * x.powi(l) - 1.0).abs()
        }));
        constraints.push(Constraint::new("(iv) p' < 0 on (1/2, 3/2)", (0.5, 1.5), true, |_, f| {
            if f[1] < 0.0 {
                0.0
            } else {
                1.0 + f[1]
            }
        }));
        // On the negative side p′ has sign (−1)^ℓ: |p| grows toward the singular locus.
        constraints.push(Constraint::new("|p| increasing toward 0 on (-3/2, -1/2)", (-1.5, -0.5), true, move |_, f| {
            if f[0] * f[1] > 0.0 {
                0.0
            } else {
                1.0 + (f[0] * f[1]).abs()
            }
        }));
    }
    Profile {
        name: ProfileName::PEll(ell),
        domain: (-2.0, 2.0),
        shape: Shape::Curve(Arc::new(move |t| p_ell_eval(ell, t))),
        constraints,
    }
    .audited()
}
