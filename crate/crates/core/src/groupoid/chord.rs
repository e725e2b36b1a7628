//! Chords of a Lagrangian curve in a two-dimensional chart, chord
//! functions and their products with maps and flows.
//!
//! A chord through `x` is a geodesic with mid-point `x` and both ends
//! `a = s_x(b)`, `b` on `λ`.  Its phase is the area enclosed by the chord
//! (from `a` to `b`) and the arc of `λ` from `b` back to `a`; with that
//! orientation `dΦ_λ(x) = H_x(a)`.  On closed curves the arc is the one
//! of shorter parameter length and the canonical orientation makes it
//! run forward.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{EtherError, Result};
use crate::ether::EtherStructure;
use crate::geometry::{newton_solve, Curve, Membrane, Point, Vector};
use crate::groupoid::{left_map, right_map, GroupoidElement};
use crate::phase_maps::{flow, mapped_curve, trajectory_curve, HamiltonianSystem, PhaseFunction, SymplecticMap};

type CurveFn = Arc<dyn Fn(f64) -> Point + Send + Sync>;

/// Embedded curve `s ↦ λ(s)` on `[s0, s1]`, optionally closed and
/// optionally a level set `H = E`.
#[derive(Clone)]
pub struct LagrangianCurve {
    pub label: String,
    point: CurveFn,
    derivative: Option<CurveFn>,
    pub range: (f64, f64),
    pub closed: bool,
    pub level: Option<(HamiltonianSystem, f64)>,
}

impl fmt::Debug for LagrangianCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LagrangianCurve")
            .field("label", &self.label)
            .field("range", &self.range)
            .field("closed", &self.closed)
            .finish()
    }
}

/// Parameter samples for the chord scan.
const SCAN_SAMPLES: usize = 96;
/// Distinct chords must differ by more than this.
const CHORD_SAME_TOL: f64 = 1e-6;

impl LagrangianCurve {
    pub fn new<F>(label: impl Into<String>, point: F, range: (f64, f64), closed: bool) -> Self
    where
        F: Fn(f64) -> Point + Send + Sync + 'static,
    {
        Self { label: label.into(), point: Arc::new(point), derivative: None, range, closed, level: None }
    }

    pub fn with_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> Point + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn with_level(mut self, sys: HamiltonianSystem, energy: f64) -> Self {
        self.level = Some((sys, energy));
        self
    }

    /// Counter-clockwise circle; centred at the origin it is the level
    /// `r²/2` of the harmonic oscillator.
    pub fn circle(center: Point, radius: f64) -> Self {
        let (c1, c2) = (center.clone(), center.clone());
        let mut out = Self::new(
            format!("circle r={radius}"),
            move |s| &c1 + Point::from_vec(vec![radius * s.cos(), radius * s.sin()]),
            (0.0, 2.0 * PI),
            true,
        )
        .with_derivative(move |s| Point::from_vec(vec![-radius * s.sin(), radius * s.cos()]));
        if c2.amax() == 0.0 {
            out = out.with_level(HamiltonianSystem::harmonic_oscillator(), 0.5 * radius * radius);
        }
        out
    }

    pub fn point(&self, s: f64) -> Point {
        (self.point)(s)
    }

    pub fn derivative(&self, s: f64) -> Point {
        match &self.derivative {
            Some(d) => d(s),
            None => {
                let h = 1e-6 * (self.range.1 - self.range.0);
                (self.point(s + h) - self.point(s - h)) / (2.0 * h)
            }
        }
    }

    pub fn period(&self) -> f64 {
        self.range.1 - self.range.0
    }

    /// `s` moved into the parameter range on closed curves.
    pub fn wrap(&self, s: f64) -> f64 {
        if self.closed {
            self.range.0 + (s - self.range.0).rem_euclid(self.period())
        } else {
            s
        }
    }

    /// Parameter difference `to - from`, wrapped to `(-P/2, P/2]` on closed curves.
    pub fn param_delta(&self, from: f64, to: f64) -> f64 {
        let d = to - from;
        if !self.closed {
            return d;
        }
        let p = self.period();
        let mut w = d.rem_euclid(p);
        if w > 0.5 * p {
            w -= p;
        }
        w
    }

    /// Arc `τ ↦ λ(from + τ·delta)`.
    pub fn arc(&self, from: f64, delta: f64) -> Curve {
        let (a, b) = (self.clone(), self.clone());
        Curve::with_tangent(
            format!("{} arc", self.label),
            move |tau| Ok(a.point(from + tau * delta)),
            move |tau| Ok(b.derivative(from + tau * delta) * delta),
        )
    }

    fn samples(&self) -> Vec<f64> {
        let n = SCAN_SAMPLES;
        let (s0, s1) = self.range;
        if self.closed {
            (0..n).map(|k| s0 + (s1 - s0) * k as f64 / n as f64).collect()
        } else {
            (0..=n).map(|k| s0 + (s1 - s0) * k as f64 / n as f64).collect()
        }
    }

    fn in_range(&self, s: f64) -> bool {
        self.closed || (s >= self.range.0 - 1e-12 && s <= self.range.1 + 1e-12)
    }

    /// Parameter of the point of `λ` nearest to `x` and its distance.
    pub fn nearest(&self, x: &Point) -> (f64, f64) {
        let mut best = (self.range.0, f64::INFINITY);
        for s in self.samples() {
            let d = (self.point(s) - x).norm();
            if d < best.1 {
                best = (s, d);
            }
        }
        // Newton on ⟨λ(s) - x, λ'(s)⟩ = 0
        let mut s = best.0;
        for _ in 0..30 {
            let g = |s: f64| (self.point(s) - x).dot(&self.derivative(s));
            let h = 1e-6;
            let dg = (g(s + h) - g(s - h)) / (2.0 * h);
            if dg.abs() < 1e-14 {
                break;
            }
            let next = s - g(s) / dg;
            if !self.in_range(next) || (next - s).abs() < 1e-15 {
                break;
            }
            s = next;
        }
        let d = (self.point(s) - x).norm();
        if d < best.1 {
            (s, d)
        } else {
            best
        }
    }
}

/// Chord `a = s_x(b)` with feet `λ(s_a)`, `λ(s_b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chord {
    pub x: Point,
    pub a: Point,
    pub b: Point,
    pub s_a: f64,
    pub s_b: f64,
    pub degenerate: bool,
    /// True when the orientation is opposite to the canonical one.
    pub reversed: bool,
}

impl Chord {
    pub fn reversed(&self) -> Self {
        Self {
            x: self.x.clone(),
            a: self.b.clone(),
            b: self.a.clone(),
            s_a: self.s_b,
            s_b: self.s_a,
            degenerate: self.degenerate,
            reversed: !self.reversed,
        }
    }
}

fn require_plane(e: &EtherStructure) -> Result<()> {
    if e.dim() != 2 {
        return Err(EtherError::Parameter(format!("chord operations need a two-dimensional chart, got {}", e.dim())));
    }
    Ok(())
}

/// Newton on `(s_a, s_b)` for `s_x(λ(s_b)) = target(λ(s_a))`.
pub(crate) fn solve_feet<T>(
    e: &EtherStructure,
    lam: &LagrangianCurve,
    x: &Point,
    target: T,
    seed: (f64, f64),
) -> Result<(f64, f64)>
where
    T: Fn(&Point) -> Result<Point>,
{
    let residual = |u: &Vector| Ok(e.reflection(x, &lam.point(u[1]))? - target(&lam.point(u[0]))?);
    let opts = e.fixture.settings.newton();
    let wrapped = |u: &Vector| Vector::from_vec(vec![lam.wrap(u[0]), lam.wrap(u[1])]);
    let sol = newton_solve(residual, &wrapped(&Vector::from_vec(vec![seed.0, seed.1])), &opts)?;
    // a long Newton excursion costs parameter precision; polish in range
    let sol = newton_solve(residual, &wrapped(&sol.x), &opts)?;
    Ok((sol.x[0], sol.x[1]))
}

/// Scan `λ` for foot pairs with `s_x(λ(s_b)) = target(λ(s_a))` and refine every candidate.
pub(crate) fn feet_candidates<T>(e: &EtherStructure, lam: &LagrangianCurve, x: &Point, target: T) -> Vec<(f64, f64)>
where
    T: Fn(&Point) -> Result<Point>,
{
    let samples = lam.samples();
    let pts: Vec<Point> = samples.iter().map(|s| lam.point(*s)).collect();
    let mut scan: Vec<Option<(usize, f64)>> = Vec::with_capacity(samples.len());
    let images: Vec<Option<Point>> = pts.iter().map(|p| target(p).ok()).collect();
    for p in &pts {
        let entry = e.reflection(x, p).ok().map(|w| {
            // nearest image of a sample to s_x(λ(s_b))
            images
                .iter()
                .enumerate()
                .filter_map(|(i, q)| q.as_ref().map(|q| (i, (q - &w).norm())))
                .fold((0, f64::INFINITY), |m, c| if c.1 < m.1 { c } else { m })
        });
        scan.push(entry);
    }
    let n = samples.len();
    let mut seeds = Vec::new();
    for i in 0..n {
        let Some((ia, d)) = scan[i] else { continue };
        let neighbour = |j: Option<usize>| j.and_then(|j| scan[j]).map(|s| s.1).unwrap_or(f64::INFINITY);
        let prev = if i > 0 {
            Some(i - 1)
        } else if lam.closed {
            Some(n - 1)
        } else {
            None
        };
        let next = if i + 1 < n {
            Some(i + 1)
        } else if lam.closed {
            Some(0)
        } else {
            None
        };
        if d <= neighbour(prev) && d <= neighbour(next) {
            seeds.push((samples[ia], samples[i]));
        }
    }
    seeds
        .into_iter()
        .filter_map(|seed| solve_feet(e, lam, x, &target, seed).ok())
        .filter(|(sa, sb)| lam.in_range(*sa) && lam.in_range(*sb))
        .collect()
}

fn canonical(lam: &LagrangianCurve, x: &Point, s_a: f64, s_b: f64) -> Chord {
    let chord = Chord { x: x.clone(), a: lam.point(s_a), b: lam.point(s_b), s_a, s_b, degenerate: false, reversed: false };
    if lam.param_delta(s_b, s_a) < 0.0 {
        let mut c = chord.reversed();
        c.reversed = false;
        c
    } else {
        chord
    }
}

/// The unique non-oriented chord of `λ` through `x`, canonically oriented.
pub fn chord_find(e: &EtherStructure, lam: &LagrangianCurve, x: &Point) -> Result<Chord> {
    require_plane(e)?;
    e.fixture.check_point(x, "chord_find")?;
    let (s0, dist) = lam.nearest(x);
    if dist < 1e-10 {
        let p = lam.point(s0);
        return Ok(Chord { x: x.clone(), a: p.clone(), b: p, s_a: s0, s_b: s0, degenerate: true, reversed: false });
    }
    let mut found: Vec<Chord> = Vec::new();
    for (sa, sb) in feet_candidates(e, lam, x, |p| Ok(p.clone())) {
        let c = canonical(lam, x, sa, sb);
        if (&c.a - &c.b).norm() < 1e-9 {
            continue;
        }
        let same = found.iter().any(|f| (&f.a - &c.a).norm() < CHORD_SAME_TOL && (&f.b - &c.b).norm() < CHORD_SAME_TOL);
        if !same {
            found.push(c);
        }
    }
    match found.len() {
        0 => {
            Err(EtherError::NotInDomain { context: format!("chord_find: no chord of {} through {:?}", lam.label, x.as_slice()) })
        }
        1 => Ok(found.pop().expect("one chord")),
        k => Err(EtherError::Ambiguous {
            context: format!("chord_find at {:?}", x.as_slice()),
            detail: format!("{k} distinct chords"),
        }),
    }
}

/// Area enclosed by the chord `a → b` and the arc of `λ` from `b` to `a`.
pub fn chord_phase_oriented(e: &EtherStructure, lam: &LagrangianCurve, chord: &Chord) -> Result<f64> {
    if chord.degenerate {
        return Ok(0.0);
    }
    let [g1, g2] = e.geodesic_pieces(&chord.x, &chord.b, &chord.a)?;
    let delta = lam.param_delta(chord.s_b, chord.s_a);
    Membrane::new(vec![g2.reversed(), g1.reversed(), lam.arc(chord.s_b, delta)]).area(&e.fixture)
}

/// `Φ_λ(x)`.
pub fn chord_phase(e: &EtherStructure, lam: &LagrangianCurve, x: &Point) -> Result<f64> {
    chord_phase_oriented(e, lam, &chord_find(e, lam, x)?)
}

/// `Φ_λ` with gradient `H_x(a)` and end-points `(ℓ, r) = (a, b)`.
pub fn chord_phase_function(e: &EtherStructure, lam: &LagrangianCurve) -> PhaseFunction {
    let (e1, l1) = (e.clone(), lam.clone());
    let (e2, l2) = (e.clone(), lam.clone());
    let (e3, l3) = (e.clone(), lam.clone());
    PhaseFunction::new(format!("Φ[{}]", lam.label), move |x| chord_phase(&e1, &l1, x))
        .with_gradient(move |x| {
            let c = chord_find(&e2, &l2, x)?;
            e2.hamiltonian(x, &c.a)
        })
        .with_endpoints(move |x| {
            let c = chord_find(&e3, &l3, x)?;
            Ok((c.a, c.b))
        })
}

/// Max over the level functions of `|H(ℓ(x, ±dΦ_λ)) - E|`, `|H(r(x, ±dΦ_λ)) - E|`.
pub fn chord_hj_residual(e: &EtherStructure, lam: &LagrangianCurve, x: &Point, sign: f64) -> Result<f64> {
    let (sys, energy) =
        lam.level.as_ref().ok_or_else(|| EtherError::Parameter(format!("{} carries no level-set description", lam.label)))?;
    let c = chord_find(e, lam, x)?;
    let p = e.hamiltonian(x, &c.a)? * sign;
    let m = GroupoidElement::new(x.clone(), p);
    let hl = sys.value(&left_map(e, &m)?)?;
    let hr = sys.value(&right_map(e, &m)?)?;
    Ok((hl - energy).abs().max((hr - energy).abs()))
}

/// Geodesic-with-feet solution of a chord product.
#[derive(Debug, Clone)]
pub struct ChordProduct {
    pub value: f64,
    /// Foot on `λ` whose image is the geodesic end `a`.
    pub s_origin: f64,
    pub s_b: f64,
}

/// `(Φ^t ∘ Φ_λ)(x)`: membrane of the trajectory `a₀ → a = γ^t(a₀)`, the
/// geodesic `a → b` through `x` and the arc of `λ` from `b` to `a₀`,
/// minus `tH`.
pub fn chord_product(
    e: &EtherStructure,
    lam: &LagrangianCurve,
    sys: &HamiltonianSystem,
    x: &Point,
    t: f64,
) -> Result<ChordProduct> {
    let chord = chord_find(e, lam, x)?;
    if t == 0.0 {
        return Ok(ChordProduct { value: chord_phase_oriented(e, lam, &chord)?, s_origin: chord.s_a, s_b: chord.s_b });
    }
    if chord.degenerate {
        return Err(EtherError::NotInDomain { context: "chord_product: mid-point on the curve".into() });
    }
    // continuation in t from the chord itself
    let stages = ((t.abs() / 0.25).ceil() as usize).max(1);
    let mut seed = (chord.s_a, chord.s_b);
    for k in 1..=stages {
        let tk = t * k as f64 / stages as f64;
        seed = solve_feet(e, lam, x, |p| flow(sys, &e.fixture, p, tk), seed).map_err(|err| err.at_stage("chord_product"))?;
    }
    let (s0, sb) = seed;
    let a0 = lam.point(s0);
    let a = flow(sys, &e.fixture, &a0, t)?;
    let b = lam.point(sb);
    let [g1, g2] = e.geodesic_pieces(x, &b, &a)?;
    let membrane = Membrane::new(vec![
        trajectory_curve(sys, &e.fixture, &a0, t),
        g2.reversed(),
        g1.reversed(),
        lam.arc(sb, lam.param_delta(sb, s0)),
    ]);
    Ok(ChordProduct { value: membrane.area(&e.fixture)? - t * sys.value(&a0)?, s_origin: s0, s_b: sb })
}

/// `(Φ^γ_y ∘ Φ_λ)(x)` for `y` whose fixed point `ỹ = λ(s_y)` lies on `λ`:
/// the arc `b → ỹ` on `λ`, the geodesic `ỹ → γ(ỹ)` through `y`, the image
/// arc `γ(ỹ) → a = γ(a₀)` and the geodesic `a → b` through `x`.
pub fn chord_map_product(
    e: &EtherStructure,
    lam: &LagrangianCurve,
    gamma: &SymplecticMap,
    s_y: f64,
    x: &Point,
) -> Result<ChordProduct> {
    let chord = chord_find(e, lam, x)?;
    let (s0, sb) =
        solve_feet(e, lam, x, |p| gamma.apply(p), (chord.s_a, chord.s_b)).map_err(|err| err.at_stage("chord_map_product"))?;
    let yt = lam.point(s_y);
    let gyt = gamma.apply(&yt)?;
    let y = e.midpoint(&gyt, &yt)?;
    let a = gamma.apply(&lam.point(s0))?;
    let b = lam.point(sb);
    let d1 = lam.param_delta(sb, s_y);
    let d2 = lam.param_delta(sb, s0) - d1;
    let [y1, y2] = e.geodesic_pieces(&y, &yt, &gyt)?;
    let [g1, g2] = e.geodesic_pieces(x, &b, &a)?;
    let membrane = Membrane::new(vec![
        lam.arc(sb, d1),
        y1,
        y2,
        mapped_curve(gamma, &lam.arc(s_y, d2), e.fixture.settings.h_fd),
        g2.reversed(),
        g1.reversed(),
    ]);
    Ok(ChordProduct { value: membrane.area(&e.fixture)?, s_origin: s0, s_b: sb })
}
