//! Closed-form global solutions: coincidence polynomials, halfspace
//! solutions, and double-cone solutions assembled from angular pieces.
//!
//! Every 2D solution here is homogeneous of degree two and piecewise equal to
//! a quadratic on angular sectors. A solution is stored as a partition of the
//! circle into half-open arcs `[start, start+width)`, each carrying the
//! quadratic active there; adjacent pieces match in value and gradient on the
//! shared rays, so which piece owns a boundary ray is immaterial.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{self, Branch};
use crate::obstacle::{NormalizedPair, ObstacleSide, QuadraticForm};

const TAU: f64 = 2.0 * std::f64::consts::PI;
const PI: f64 = std::f64::consts::PI;

fn mod_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PieceKind {
    /// Coincidence with the lower obstacle (`u = p1`).
    Lower,
    /// Coincidence with the upper obstacle (`u = p2`).
    Upper,
    /// Harmonic sector (`p1 < u < p2` in the interior).
    Harmonic,
}

/// One angular sector `[start, start + width)` of a piecewise-quadratic
/// solution, with the quadratic active on it.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AngularPiece {
    pub start: f64,
    pub width: f64,
    pub kind: PieceKind,
    pub form: QuadraticForm,
}

impl AngularPiece {
    pub fn end(&self) -> f64 {
        self.start + self.width
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolynomialKind {
    LowerObstacle,
    UpperObstacle,
    StrictHarmonic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Polynomial(PolynomialKind),
    Halfspace { which: ObstacleSide, e: [f64; 2] },
    DoubleCone,
}

/// A homogeneous degree-two global solution, stored as angular pieces.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlowupSolution {
    pub family: Family,
    pub pieces: Vec<AngularPiece>,
}

#[derive(Debug, Error, PartialEq)]
pub enum BuildError {
    #[error("angle out of range: {0}")]
    AngleOutOfRange(String),
    #[error("halfspace solution is inadmissible: {0}")]
    Inadmissible(String),
    #[error("pieces do not partition the circle: {0}")]
    BadPartition(String),
}

/// Symmetry tag selecting one member of a reflection/rotation orbit.
///
/// `rotation` applies a counterclockwise quarter turn `rotation * pi/2`;
/// `mirrored` first reflects through the `x1` axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrangement {
    pub rotation: u8,
    pub mirrored: bool,
}

impl Arrangement {
    pub const IDENTITY: Arrangement = Arrangement { rotation: 0, mirrored: false };

    pub fn all() -> [Arrangement; 8] {
        let mut out = [Arrangement::IDENTITY; 8];
        let mut i = 0;
        for &mirrored in &[false, true] {
            for rotation in 0..4u8 {
                out[i] = Arrangement { rotation, mirrored };
                i += 1;
            }
        }
        out
    }

    pub fn rotations() -> [Arrangement; 4] {
        [
            Arrangement { rotation: 0, mirrored: false },
            Arrangement { rotation: 1, mirrored: false },
            Arrangement { rotation: 2, mirrored: false },
            Arrangement { rotation: 3, mirrored: false },
        ]
    }
}

/// Exact quarter-turn substitution: coefficients of `x -> form(R_{-pi/2} x)`
/// applied `j` times. Kept in integer arithmetic on the coefficients so
/// harmonic pieces stay trace-free to the bit.
fn quarter_rotated(form: QuadraticForm, j: u8) -> QuadraticForm {
    let mut f = form;
    for _ in 0..(j % 4) {
        f = QuadraticForm::new(f.c, -f.b, f.a);
    }
    f
}

fn mirrored_form(form: QuadraticForm) -> QuadraticForm {
    QuadraticForm::new(form.a, -form.b, form.c)
}

impl BlowupSolution {
    /// Constructor for piece lists; sorts, validates the partition, and
    /// canonicalises the starting piece.
    pub fn from_pieces(family: Family, mut pieces: Vec<AngularPiece>) -> Result<Self, BuildError> {
        if pieces.is_empty() {
            return Err(BuildError::BadPartition("no pieces".into()));
        }
        for p in &mut pieces {
            p.start = mod_tau(p.start);
        }
        pieces.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap());
        let total: f64 = pieces.iter().map(|p| p.width).sum();
        if (total - TAU).abs() > 1e-9 {
            return Err(BuildError::BadPartition(format!(
                "widths sum to {total}, expected 2*pi"
            )));
        }
        let n = pieces.len();
        for i in 0..n {
            let expected = pieces[i].start + pieces[i].width;
            let actual = if i + 1 < n { pieces[i + 1].start } else { pieces[0].start + TAU };
            if (expected - actual).abs() > 1e-9 {
                return Err(BuildError::BadPartition(format!(
                    "piece {i} ends at {expected} but the next piece starts at {actual}"
                )));
            }
        }
        Ok(Self { family, pieces })
    }

    pub fn polynomial(form: QuadraticForm, kind: PolynomialKind) -> Self {
        let piece_kind = match kind {
            PolynomialKind::LowerObstacle => PieceKind::Lower,
            PolynomialKind::UpperObstacle => PieceKind::Upper,
            PolynomialKind::StrictHarmonic => PieceKind::Harmonic,
        };
        Self {
            family: Family::Polynomial(kind),
            pieces: vec![AngularPiece { start: 0.0, width: TAU, kind: piece_kind, form }],
        }
    }

    /// The piece whose arc contains the direction of `x` (origin falls into
    /// the first piece; the value there is 0 regardless).
    pub fn piece_at(&self, x: [f64; 2]) -> &AngularPiece {
        let theta = mod_tau(f64::atan2(x[1], x[0]));
        self.piece_at_angle(theta)
    }

    pub fn piece_at_angle(&self, theta: f64) -> &AngularPiece {
        let first = self.pieces[0].start;
        let rel = mod_tau(theta - first);
        let mut acc = 0.0;
        for p in &self.pieces {
            acc += p.width;
            if rel < acc {
                return p;
            }
        }
        self.pieces.last().unwrap()
    }

    /// Value and gradient at `x`; homogeneous of degree two by construction.
    pub fn eval(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let p = self.piece_at(x);
        (p.form.eval(x), p.form.gradient(x))
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.piece_at(x).form.eval(x)
    }

    /// Applies an [`Arrangement`] (mirror through the `x1` axis, then `j`
    /// exact quarter turns) to this solution.
    pub fn rearranged(&self, arr: Arrangement) -> Self {
        let mut pieces = self.pieces.clone();
        if arr.mirrored {
            for p in &mut pieces {
                let new_start = mod_tau(-(p.start + p.width));
                p.start = new_start;
                p.form = mirrored_form(p.form);
            }
        }
        let rot = f64::from(arr.rotation) * (PI / 2.0);
        for p in &mut pieces {
            p.start = mod_tau(p.start + rot);
            p.form = quarter_rotated(p.form, arr.rotation);
        }
        let family = match self.family {
            Family::Halfspace { which, e } => {
                let mut e = e;
                if arr.mirrored {
                    e = [e[0], -e[1]];
                }
                for _ in 0..(arr.rotation % 4) {
                    e = [-e[1], e[0]];
                }
                Family::Halfspace { which, e }
            }
            f => f,
        };
        Self::from_pieces(family, pieces).expect("rearrangement preserves the partition")
    }
}

/// The four-piece double-cone family on the canonical pair: the upper
/// coincidence cone straddles the positive `x1` axis between the rays
/// `2 theta = phi1` and `2 theta = -phi2`, flanked by two harmonic sectors of
/// width `pi/2`, with the lower cone opposite. `arrangement` generates the
/// reflected and quarter-rotated members of the family.
pub fn build_mu(phi1: f64, phi2: f64, arrangement: Arrangement) -> Result<BlowupSolution, BuildError> {
    for (phi, name) in [(phi1, "phi1"), (phi2, "phi2")] {
        if !(phi > 0.0 && phi < PI) {
            return Err(BuildError::AngleOutOfRange(format!(
                "{name} = {phi} must lie in (0, pi)"
            )));
        }
    }
    let p1 = QuadraticForm::diagonal(-1.0, -1.0);
    let p2 = QuadraticForm::diagonal(1.0, 1.0);
    let q1 = QuadraticForm::new(phi1.cos(), phi1.sin(), -phi1.cos());
    let q2 = QuadraticForm::new(phi2.cos(), -phi2.sin(), -phi2.cos());
    let pieces = vec![
        AngularPiece {
            start: -phi2 / 2.0,
            width: (phi1 + phi2) / 2.0,
            kind: PieceKind::Upper,
            form: p2,
        },
        AngularPiece { start: phi1 / 2.0, width: PI / 2.0, kind: PieceKind::Harmonic, form: q1 },
        AngularPiece {
            start: phi1 / 2.0 + PI / 2.0,
            width: PI - (phi1 + phi2) / 2.0,
            kind: PieceKind::Lower,
            form: p1,
        },
        AngularPiece {
            start: 1.5 * PI - phi2 / 2.0,
            width: PI / 2.0,
            kind: PieceKind::Harmonic,
            form: q2,
        },
    ];
    let base = BlowupSolution::from_pieces(Family::DoubleCone, pieces)?;
    Ok(base.rearranged(arrangement))
}

/// Halfspace solution for one obstacle: the harmonic quadratic occupies the
/// halfplane `x . e > 0` and the obstacle the complement.
pub fn build_halfspace(
    pair: &NormalizedPair,
    which: ObstacleSide,
    alpha: f64,
    branch: Branch,
) -> Result<BlowupSolution, BuildError> {
    build_halfspace_oriented(pair, which, alpha, branch, false)
}

/// As [`build_halfspace`], with `flip` selecting which side of the boundary
/// line carries the harmonic piece.
pub fn build_halfspace_oriented(
    pair: &NormalizedPair,
    which: ObstacleSide,
    alpha: f64,
    branch: Branch,
    flip: bool,
) -> Result<BlowupSolution, BuildError> {
    let adm = classify::halfspace_admissible(pair, which, alpha);
    if !adm.admissible {
        return Err(BuildError::Inadmissible(format!(
            "alpha = {alpha}, window [{}, {}], delta = {}",
            adm.window.0, adm.window.1, adm.delta
        )));
    }
    let data = classify::halfspace_sector(pair, which, alpha, branch);
    let psi = data.boundary_angle;
    let mut eta = psi + PI / 2.0;
    if flip {
        eta += PI;
    }
    let e = [eta.cos(), eta.sin()];
    let (obstacle_form, kind) = match which {
        ObstacleSide::Lower => (pair.lower(), PieceKind::Lower),
        ObstacleSide::Upper => (pair.upper(), PieceKind::Upper),
    };
    let pieces = vec![
        AngularPiece { start: eta - PI / 2.0, width: PI, kind: PieceKind::Harmonic, form: data.q },
        AngularPiece { start: eta + PI / 2.0, width: PI, kind, form: obstacle_form },
    ];
    BlowupSolution::from_pieces(Family::Halfspace { which, e }, pieces)
}

/// Assembles a double-cone solution from two harmonic sector quadratics and
/// the four boundary rays, already checked for cyclic validity.
pub(crate) fn double_cone_from_arcs(
    pair: &NormalizedPair,
    qx: QuadraticForm,
    qy: QuadraticForm,
    rays: [f64; 4],
    widths: [f64; 4],
) -> Result<BlowupSolution, BuildError> {
    let [kx, mx, my, ky] = rays;
    let pieces = vec![
        AngularPiece { start: kx, width: widths[0], kind: PieceKind::Harmonic, form: qx },
        AngularPiece { start: mx, width: widths[1], kind: PieceKind::Lower, form: pair.lower() },
        AngularPiece { start: my, width: widths[2], kind: PieceKind::Harmonic, form: qy },
        AngularPiece { start: ky, width: widths[3], kind: PieceKind::Upper, form: pair.upper() },
    ];
    BlowupSolution::from_pieces(Family::DoubleCone, pieces)
}

/// Configuration for the randomized part of [`verify_solution`] sampling.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_theta: usize,
    pub n_radius: usize,
    pub n_random: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { n_theta: 360, n_radius: 16, n_random: 200, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckLine {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), value, tolerance, pass: value <= tolerance }
    }
}

/// Numeric verification record for one solution; `pass` iff every metric is
/// below its tolerance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_ordering_violation: f64,
    pub max_c1_mismatch: f64,
    pub max_harmonic_residual: f64,
    pub max_complementarity_violation: f64,
    pub checks: Vec<CheckLine>,
    pub pass: bool,
}

pub const C1_TOL: f64 = 1e-10;
pub const ORDERING_TOL: f64 = 1e-10;
pub const COMPLEMENTARITY_TOL: f64 = 1e-10;

/// Checks a solution against its defining conditions on a dense angular and
/// radial sample: obstacle ordering, exact harmonicity of the sector
/// quadratics, value+gradient continuity across piece boundaries, and
/// coincidence pieces equalling their obstacle identically.
pub fn verify_solution(
    solution: &BlowupSolution,
    pair: &NormalizedPair,
    cfg: &SamplerConfig,
) -> VerificationReport {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    let p1 = pair.lower();
    let p2 = pair.upper();

    let mut ordering: f64 = 0.0;
    let mut complementarity: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut points = Vec::with_capacity(cfg.n_theta * cfg.n_radius + cfg.n_random);
    for it in 0..cfg.n_theta {
        let theta = TAU * (it as f64 + 0.5) / cfg.n_theta as f64;
        for ir in 0..cfg.n_radius {
            let r = (ir as f64 + 1.0) / cfg.n_radius as f64;
            points.push([r * theta.cos(), r * theta.sin()]);
        }
    }
    for _ in 0..cfg.n_random {
        points.push([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
    }
    for &x in &points {
        let piece = solution.piece_at(x);
        let u = piece.form.eval(x);
        ordering = ordering.max(p1.eval(x) - u).max(u - p2.eval(x));
        match piece.kind {
            PieceKind::Lower => complementarity = complementarity.max((u - p1.eval(x)).abs()),
            PieceKind::Upper => complementarity = complementarity.max((u - p2.eval(x)).abs()),
            PieceKind::Harmonic => {}
        }
    }

    // Harmonic pieces must be trace-free exactly: the Laplacian of
    // a x1^2 + 2b x1 x2 + c x2^2 is 2(a + c).
    let mut harmonic_residual: f64 = 0.0;
    for p in &solution.pieces {
        if p.kind == PieceKind::Harmonic {
            harmonic_residual = harmonic_residual.max((p.form.a + p.form.c).abs());
        }
    }

    // Value and gradient continuity across every boundary ray, evaluated
    // from both adjacent pieces directly.
    let mut c1: f64 = 0.0;
    let np = solution.pieces.len();
    for i in 0..np {
        let cur = &solution.pieces[i];
        let nxt = &solution.pieces[(i + 1) % np];
        let theta = cur.end();
        let dir = [theta.cos(), theta.sin()];
        for ir in 1..=8 {
            let r = ir as f64 / 8.0;
            let x = [r * dir[0], r * dir[1]];
            let dv = (cur.form.eval(x) - nxt.form.eval(x)).abs();
            let ga = cur.form.gradient(x);
            let gb = nxt.form.gradient(x);
            let dg = ((ga[0] - gb[0]).powi(2) + (ga[1] - gb[1]).powi(2)).sqrt();
            c1 = c1.max(dv).max(dg);
        }
    }

    let mut checks = vec![
        CheckLine::new("ordering p1 <= u <= p2", ordering, ORDERING_TOL),
        CheckLine::new("c1 matching across rays", c1, C1_TOL),
        CheckLine::new("harmonic pieces trace-free", harmonic_residual, 0.0),
        CheckLine::new("coincidence pieces equal obstacle", complementarity, COMPLEMENTARITY_TOL),
    ];

    if let Family::Halfspace { which, e } = solution.family {
        // u - p1 = -(lambda1/2) (x.e)_+^2  (and mirrored for the upper side).
        let mut worst: f64 = 0.0;
        for &x in &points {
            let dot = (x[0] * e[0] + x[1] * e[1]).max(0.0);
            let u = solution.value(x);
            let resid = match which {
                ObstacleSide::Lower => u - p1.eval(x) + pair.lambda1() / 2.0 * dot * dot,
                ObstacleSide::Upper => p2.eval(x) - u - pair.lambda2() / 2.0 * dot * dot,
            };
            worst = worst.max(resid.abs());
        }
        checks.push(CheckLine::new("halfspace deviation identity", worst, 1e-10));
    }

    let pass = checks.iter().all(|c| c.pass);
    VerificationReport {
        max_ordering_violation: ordering,
        max_c1_mismatch: c1,
        max_harmonic_residual: harmonic_residual,
        max_complementarity_violation: complementarity,
        checks,
        pass,
    }
}

/// Scaled boundary-adjusted energy of a homogeneous solution at radius one,
/// reduced to the closed-form integral of `lambda_i p^i` over the coincidence
/// cones; exact up to rounding for piecewise-conic solutions.
pub fn weiss_of_blowup(solution: &BlowupSolution, pair: &NormalizedPair) -> f64 {
    let l1 = pair.lambda1();
    let l2 = pair.lambda2();
    let mut total = 0.0;
    for p in &solution.pieces {
        let lambda = match p.kind {
            PieceKind::Lower => l1,
            PieceKind::Upper => l2,
            PieceKind::Harmonic => continue,
        };
        // int_{arc} int_0^1 (a cos^2 + 2b sc + c sin^2) r^3 dr dtheta
        let f = |theta: f64| -> f64 {
            0.5 * (p.form.a + p.form.c) * theta + 0.25 * (p.form.a - p.form.c) * (2.0 * theta).sin()
                - 0.5 * p.form.b * (2.0 * theta).cos()
        };
        total += lambda * 0.25 * (f(p.end()) - f(p.start));
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obstacle::NormalizedPair;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn canonical() -> NormalizedPair {
        NormalizedPair::canonical()
    }

    /// Direct transcription of the four-branch angular formula used as the
    /// oracle for `build_mu`. The doubled angle is reduced into one period
    /// `[-pi - phi2, 3 pi - phi2)` before branching.
    fn mu_formula(phi1: f64, phi2: f64, r: f64, theta: f64) -> f64 {
        let period = 4.0 * PI;
        let mut t = (2.0 * theta + PI + phi2).rem_euclid(period) - PI - phi2;
        if t < -PI - phi2 {
            t += period;
        }
        if t >= -phi2 && t <= phi1 {
            r * r
        } else if t > phi1 && t <= PI + phi1 {
            r * r * (t - phi1).cos()
        } else if t >= -PI - phi2 && t < -phi2 {
            r * r * (t + phi2).cos()
        } else {
            -r * r
        }
    }

    #[test]
    fn mu_matches_angular_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(phi1, phi2) in &[
            (PI / 2.0, PI / 2.0),
            (PI / 3.0, PI / 2.0),
            (2.0 * PI / 3.0, PI / 4.0),
            (0.3, 2.9),
        ] {
            let mu = build_mu(phi1, phi2, Arrangement::IDENTITY).unwrap();
            for _ in 0..300 {
                let r = rng.gen_range(0.01..1.5);
                let theta = rng.gen_range(0.0..TAU);
                let x = [r * theta.cos(), r * theta.sin()];
                let expect = mu_formula(phi1, phi2, r, theta);
                let got = mu.value(x);
                assert!(
                    (got - expect).abs() < 1e-10,
                    "mu({phi1},{phi2}) at r={r}, theta={theta}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn mu_right_angle_case_is_the_diagonal_cross() {
        // phi1 = phi2 = pi/2: harmonic sectors carry 2 x1 x2 and -2 x1 x2,
        // coincidence cones straddle the axes.
        let mu = build_mu(PI / 2.0, PI / 2.0, Arrangement::IDENTITY).unwrap();
        assert!((mu.value([1.0, 0.0]) - 1.0).abs() < 1e-14); // p2 side
        assert!((mu.value([-1.0, 0.0]) + 1.0).abs() < 1e-14); // p1 side
        assert!((mu.value([0.5, 0.5]) - 0.5).abs() < 1e-14); // 2 x1 x2
        assert!((mu.value([-0.5, 0.5]) + 0.5).abs() < 1e-14); // -2 x1 x2
    }

    #[test]
    fn mu_upper_cone_width_is_half_the_angle_sum() {
        for &(phi1, phi2) in &[(0.4, 1.1), (1.2, PI - 1.2), (2.0, 0.7)] {
            let mu = build_mu(phi1, phi2, Arrangement::IDENTITY).unwrap();
            let upper = mu.pieces.iter().find(|p| p.kind == PieceKind::Upper).unwrap();
            assert!((upper.width - (phi1 + phi2) / 2.0).abs() < 1e-12);
            let lower = mu.pieces.iter().find(|p| p.kind == PieceKind::Lower).unwrap();
            assert!((lower.width - (PI - (phi1 + phi2) / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn mu_rejects_out_of_range_angles() {
        assert!(matches!(
            build_mu(0.0, 1.0, Arrangement::IDENTITY),
            Err(BuildError::AngleOutOfRange(_))
        ));
        assert!(build_mu(1.0, PI, Arrangement::IDENTITY).is_err());
    }

    #[test]
    fn mirror_swaps_the_two_angles() {
        let (phi1, phi2) = (0.9, 2.1);
        let mirrored = build_mu(phi1, phi2, Arrangement { rotation: 0, mirrored: true }).unwrap();
        let swapped = build_mu(phi2, phi1, Arrangement::IDENTITY).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            assert!((mirrored.value(x) - swapped.value(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn arrangements_are_isometric_rearrangements() {
        let base = build_mu(0.8, 1.7, Arrangement::IDENTITY).unwrap();
        for arr in Arrangement::all() {
            let sol = base.rearranged(arr);
            let rep = verify_solution(&sol, &canonical(), &SamplerConfig::default());
            assert!(rep.pass, "arrangement {arr:?} fails verification: {rep:?}");
            assert_eq!(rep.max_harmonic_residual, 0.0);
        }
    }

    #[test]
    fn homogeneity_of_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sols = [
            build_mu(1.0, 1.3, Arrangement::IDENTITY).unwrap(),
            build_halfspace(&canonical(), ObstacleSide::Lower, -1.0, Branch::Plus).unwrap(),
            BlowupSolution::polynomial(canonical().lower(), PolynomialKind::LowerObstacle),
        ];
        for _ in 0..50 {
            let sol = &sols[rng.gen_range(0..sols.len())];
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let s = rng.gen_range(0.01..3.0);
            let (v, _) = sol.eval(x);
            let (vs, _) = sol.eval([s * x[0], s * x[1]]);
            assert!((vs - s * s * v).abs() <= 1e-12 * (1.0 + vs.abs()));
        }
        for sol in &sols {
            let (v, g) = sol.eval([0.0, 0.0]);
            assert_eq!(v, 0.0);
            assert_eq!(g, [0.0, 0.0]);
        }
    }

    #[test]
    fn halfspace_lower_matches_signed_parabola() {
        // alpha = a1 = -1 with beta = 0: u = -x1^2 + sgn(x2) x2^2.
        let sol = build_halfspace(&canonical(), ObstacleSide::Lower, -1.0, Branch::Plus).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            let x: [f64; 2] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let expect = -x[0] * x[0] + x[1].signum() * x[1] * x[1];
            assert!((sol.value(x) - expect).abs() < 1e-12, "at {x:?}");
        }
        let rep = verify_solution(&sol, &canonical(), &SamplerConfig::default());
        assert!(rep.pass);
    }

    #[test]
    fn halfspace_case3_pair_uses_cross_term_quadratic() {
        // Pair (-1,-1,2,2), lower obstacle, alpha = 0: u = 2 x1 x2 above
        // the diagonal x2 = x1, u = p1 below (and the reflected variants).
        let pair = NormalizedPair::new(-1.0, -1.0, 2.0, 2.0).unwrap();
        let sol = build_halfspace(&pair, ObstacleSide::Lower, 0.0, Branch::Plus).unwrap();
        let q = sol
            .pieces
            .iter()
            .find(|p| p.kind == PieceKind::Harmonic)
            .unwrap()
            .form;
        assert!((q.a - 0.0).abs() < 1e-12 && (q.c - 0.0).abs() < 1e-12);
        assert!((q.b.abs() - 1.0).abs() < 1e-12, "q = +-2 x1 x2, got {q:?}");
        let rep = verify_solution(&sol, &pair, &SamplerConfig::default());
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn halfspace_deviation_identity_at_random_points() {
        let pair = canonical();
        let sol = build_halfspace(&pair, ObstacleSide::Lower, -0.4, Branch::Minus).unwrap();
        let e = match sol.family {
            Family::Halfspace { e, .. } => e,
            _ => unreachable!(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let dot = (x[0] * e[0] + x[1] * e[1]).max(0.0);
            let lhs = sol.value(x) - pair.lower().eval(x);
            let rhs = -pair.lambda1() / 2.0 * dot * dot;
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn verify_flags_a_corrupted_harmonic_sector() {
        // Perturb phi1 by eps in the sector quadratic only: the mismatch on
        // the sector boundary grows like 2 eps r^2 to first order in eps
        // (Taylor expansion of the cosine amplitude in the angle).
        let eps = 1e-3;
        let mut sol = build_mu(PI / 3.0, PI / 2.0, Arrangement::IDENTITY).unwrap();
        let idx = sol.pieces.iter().position(|p| p.kind == PieceKind::Harmonic).unwrap();
        let phi = PI / 3.0 + eps;
        sol.pieces[idx].form = QuadraticForm::new(phi.cos(), phi.sin(), -phi.cos());
        let rep = verify_solution(&sol, &canonical(), &SamplerConfig::default());
        assert!(!rep.pass);
        // Gradient mismatch at radius r is 2 eps r (1 + O(eps)); the reported
        // maximum over sampled radii r <= 1 is therefore close to 2 eps.
        assert!(
            rep.max_c1_mismatch > 1.6 * eps && rep.max_c1_mismatch < 2.4 * eps,
            "mismatch {} outside the first-order window around {}",
            rep.max_c1_mismatch,
            2.0 * eps
        );
    }

    #[test]
    fn strict_harmonic_polynomial_passes_with_empty_coincidence() {
        let q = QuadraticForm::new(0.0, 0.5, 0.0); // x1 x2, strictly between
        let sol = BlowupSolution::polynomial(q, PolynomialKind::StrictHarmonic);
        let rep = verify_solution(&sol, &canonical(), &SamplerConfig::default());
        assert!(rep.pass);
    }

    #[test]
    fn weiss_levels_on_the_canonical_pair() {
        let pair = canonical();
        let p1 = BlowupSolution::polynomial(pair.lower(), PolynomialKind::LowerObstacle);
        let p2 = BlowupSolution::polynomial(pair.upper(), PolynomialKind::UpperObstacle);
        let harm = BlowupSolution::polynomial(
            QuadraticForm::new(0.0, 0.5, 0.0),
            PolynomialKind::StrictHarmonic,
        );
        assert!((weiss_of_blowup(&p1, &pair) - TAU).abs() < 1e-12);
        assert!((weiss_of_blowup(&p2, &pair) - TAU).abs() < 1e-12);
        assert_eq!(weiss_of_blowup(&harm, &pair), 0.0);
        for &(phi1, phi2) in &[(PI / 2.0, PI / 2.0), (0.3, 1.9), (2.4, 0.5)] {
            let mu = build_mu(phi1, phi2, Arrangement::IDENTITY).unwrap();
            assert!((weiss_of_blowup(&mu, &pair) - PI).abs() < 1e-12);
        }
        let hs = build_halfspace(&pair, ObstacleSide::Lower, -0.2, Branch::Plus).unwrap();
        assert!((weiss_of_blowup(&hs, &pair) - PI).abs() < 1e-12);
        let hs = build_halfspace(&pair, ObstacleSide::Upper, 0.7, Branch::Minus).unwrap();
        assert!((weiss_of_blowup(&hs, &pair) - PI).abs() < 1e-12);
    }
}
