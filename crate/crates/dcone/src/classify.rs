//! Exact classification of the blow-up families admitted by a normalized
//! obstacle pair.
//!
//! The sign pattern of the signature polynomial `P = (a1+c2) x1^2 +
//! (a2+c1) x2^2` splits pairs into three cases:
//!
//! * Case 1 (`P == 0`): a continuum of double-cone solutions, one for every
//!   admissible sector parameter `alpha` in `[a1, a2]`; the harmonic sectors
//!   always open at a right angle.
//! * Case 2 (`P` changes sign): a single admissible `alpha`, exactly four
//!   double-cone solutions, sector opening fixed by the coefficients.
//! * Case 3 (`P` has a sign): no double-cone solutions; only the obstacle
//!   with the lower curvature keeps a full rotational family of halfspace
//!   solutions.
//!
//! Halfspace admissibility is a pair of linear inequalities in `alpha`
//! (`delta_1 <= 0` for the lower obstacle, `delta_2 = -delta_1 <= 0` for the
//! upper), plus the shared alpha window.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::obstacle::{NormalizedPair, ObstacleSide, QuadraticForm, CASE_TOL};
use crate::solutions::{double_cone_from_arcs, BlowupSolution};

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = 2.0 * PI;

/// Sign of the square root chosen for the sector coefficient `beta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn signum(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum CaseLabel {
    Case1,
    Case2,
    Case3 {
        sign: Case3Sign,
        /// `a1 + c2 = 0` within tolerance.
        a_boundary: bool,
        /// `a2 + c1 = 0` within tolerance.
        c_boundary: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case3Sign {
    NonNegative,
    NonPositive,
}

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("no double-cone solutions exist for this pair")]
    NoDoubleCones,
    #[error("alpha = {alpha} outside the admissible window [{lo}, {hi}]")]
    AlphaOutOfWindow { alpha: f64, lo: f64, hi: f64 },
    #[error("operation requires a Case 1 or Case 2 pair")]
    NotCase1Or2,
}

/// Trichotomy on the signature coefficients, with `CASE_TOL` deciding
/// boundary membership. Ties on a single vanishing coefficient are reported
/// as boundary Case 3.
pub fn classify(pair: &NormalizedPair) -> CaseLabel {
    let sig = pair.signature();
    let a_zero = sig.a.abs() <= CASE_TOL;
    let c_zero = sig.c.abs() <= CASE_TOL;
    if a_zero && c_zero {
        return CaseLabel::Case1;
    }
    if !a_zero && !c_zero && sig.a * sig.c < 0.0 {
        return CaseLabel::Case2;
    }
    let sign = if sig.a > CASE_TOL || sig.c > CASE_TOL {
        Case3Sign::NonNegative
    } else {
        Case3Sign::NonPositive
    };
    CaseLabel::Case3 { sign, a_boundary: a_zero, c_boundary: c_zero }
}

/// The set of sector parameters `alpha` admitting double-cone solutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum AlphaSet {
    Interval { lo: f64, hi: f64 },
    Single { alpha: f64, halfspace_only: bool },
    Empty,
}

impl AlphaSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, AlphaSet::Empty)
    }
}

pub fn double_cone_alphas(pair: &NormalizedPair) -> AlphaSet {
    match classify(pair) {
        CaseLabel::Case1 => AlphaSet::Interval { lo: pair.a1, hi: pair.a2 },
        CaseLabel::Case2 => {
            let alpha = (pair.a2 * pair.c2 - pair.a1 * pair.c1)
                / (pair.c2 + pair.a1 - pair.a2 - pair.c1);
            AlphaSet::Single { alpha, halfspace_only: false }
        }
        CaseLabel::Case3 { a_boundary, c_boundary, .. } => {
            if a_boundary {
                AlphaSet::Single { alpha: pair.a1, halfspace_only: true }
            } else if c_boundary {
                AlphaSet::Single { alpha: pair.a2, halfspace_only: true }
            } else {
                AlphaSet::Empty
            }
        }
    }
}

/// Slope of a line through the origin, with the vertical line explicit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Slope {
    Finite(f64),
    Infinite,
}

impl Slope {
    fn from_angle(psi: f64) -> Self {
        if (psi - PI / 2.0).abs() < 1e-14 {
            Slope::Infinite
        } else {
            Slope::Finite(psi.tan())
        }
    }

    pub fn abs(&self) -> f64 {
        match self {
            Slope::Finite(m) => m.abs(),
            Slope::Infinite => f64::INFINITY,
        }
    }
}

/// Angle in `[0, pi)` of the line with direction `(dx, dy)`; a zero vector
/// denotes the degenerate vertical line.
fn line_angle(dx: f64, dy: f64) -> f64 {
    if dx == 0.0 && dy == 0.0 {
        return PI / 2.0;
    }
    let mut psi = f64::atan2(dy, dx);
    psi = psi.rem_euclid(PI);
    if psi >= PI {
        psi -= PI;
    }
    psi
}

/// One harmonic sector candidate: the trace-free quadratic
/// `q = alpha x1^2 + 2 beta x1 x2 - alpha x2^2` together with the two lines
/// where it touches the obstacles.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SectorSolution {
    pub alpha: f64,
    pub beta: f64,
    pub q: QuadraticForm,
    /// Angle in `[0, pi)` of the line where `q` meets the lower obstacle.
    pub gamma1_angle: f64,
    /// Angle in `[0, pi)` of the line where `q` meets the upper obstacle.
    pub gamma2_angle: f64,
}

impl SectorSolution {
    pub fn slope_m(&self) -> Slope {
        Slope::from_angle(self.gamma1_angle)
    }

    pub fn slope_k(&self) -> Slope {
        Slope::from_angle(self.gamma2_angle)
    }
}

fn alpha_window(pair: &NormalizedPair) -> (f64, f64) {
    (pair.a1.max(-pair.c2), pair.a2.min(-pair.c1))
}

/// Builds the sector data for a given `alpha`, using the lower-obstacle
/// factorisation `beta^2 = -(alpha - a1)(alpha + c1)`.
///
/// The boundary slopes are kept as line angles so the degenerate vertical
/// cases (`alpha = -c1` or `alpha = -c2`) need no special values.
pub fn sector_from_alpha(
    pair: &NormalizedPair,
    alpha: f64,
    branch: Branch,
) -> Result<SectorSolution, ClassifyError> {
    let (lo, hi) = alpha_window(pair);
    if alpha < lo - CASE_TOL || alpha > hi + CASE_TOL {
        return Err(ClassifyError::AlphaOutOfWindow { alpha, lo, hi });
    }
    let beta_sq = (-(alpha - pair.a1) * (alpha + pair.c1)).max(0.0);
    let beta = branch.signum() * beta_sq.sqrt();
    Ok(SectorSolution {
        alpha,
        beta,
        q: QuadraticForm::new(alpha, beta, -alpha),
        gamma1_angle: line_angle(alpha + pair.c1, beta),
        gamma2_angle: line_angle(pair.c2 + alpha, beta),
    })
}

/// Sector data anchored at one obstacle, used by halfspace construction:
/// `beta` comes from that obstacle's factorisation and `boundary_angle` is
/// the free-boundary line of the halfspace solution.
#[derive(Clone, Copy, Debug)]
pub struct HalfspaceSector {
    pub q: QuadraticForm,
    pub beta: f64,
    pub boundary_angle: f64,
}

pub fn halfspace_sector(
    pair: &NormalizedPair,
    which: ObstacleSide,
    alpha: f64,
    branch: Branch,
) -> HalfspaceSector {
    match which {
        ObstacleSide::Lower => {
            let beta_sq = (-(alpha - pair.a1) * (alpha + pair.c1)).max(0.0);
            let beta = branch.signum() * beta_sq.sqrt();
            HalfspaceSector {
                q: QuadraticForm::new(alpha, beta, -alpha),
                beta,
                boundary_angle: line_angle(alpha + pair.c1, beta),
            }
        }
        ObstacleSide::Upper => {
            let beta_sq = (-(alpha - pair.a2) * (alpha + pair.c2)).max(0.0);
            let beta = branch.signum() * beta_sq.sqrt();
            HalfspaceSector {
                q: QuadraticForm::new(alpha, beta, -alpha),
                beta,
                boundary_angle: line_angle(alpha + pair.c2, beta),
            }
        }
    }
}

/// Opening angles of the harmonic sectors of a double-cone solution.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OpeningAngles {
    pub acute: f64,
    pub obtuse: f64,
    pub cos_squared: f64,
}

pub fn opening_angle(pair: &NormalizedPair) -> Result<OpeningAngles, ClassifyError> {
    match classify(pair) {
        CaseLabel::Case1 => Ok(OpeningAngles {
            acute: PI / 2.0,
            obtuse: PI / 2.0,
            cos_squared: 0.0,
        }),
        CaseLabel::Case2 => {
            let sig = pair.signature();
            let cos_squared = (sig.a * sig.c)
                / ((pair.a1 + pair.c1) * (pair.a2 + pair.c2));
            let acute = cos_squared.sqrt().acos();
            Ok(OpeningAngles { acute, obtuse: PI - acute, cos_squared })
        }
        CaseLabel::Case3 { .. } => Err(ClassifyError::NoDoubleCones),
    }
}

/// Admissibility record for a halfspace solution candidate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HalfspaceAdmissibility {
    pub which: ObstacleSide,
    pub alpha: f64,
    pub window: (f64, f64),
    /// `delta_1` for the lower obstacle, `delta_2 = -delta_1` for the upper.
    pub delta: f64,
    pub admissible: bool,
    pub beta_magnitude: f64,
    pub boundary_slope: Slope,
}

/// `delta_1(alpha) = a1 c1 - a2 c2 + alpha (a1 - c1 - a2 + c2)`.
fn delta1(pair: &NormalizedPair, alpha: f64) -> f64 {
    pair.a1 * pair.c1 - pair.a2 * pair.c2
        + alpha * (pair.a1 - pair.c1 - pair.a2 + pair.c2)
}

/// Decides whether `alpha` yields a halfspace solution for `which`:
/// the alpha window plus `delta <= 0` (boundary equality admitted).
pub fn halfspace_admissible(
    pair: &NormalizedPair,
    which: ObstacleSide,
    alpha: f64,
) -> HalfspaceAdmissibility {
    let window = alpha_window(pair);
    let delta = match which {
        ObstacleSide::Lower => delta1(pair, alpha),
        ObstacleSide::Upper => -delta1(pair, alpha),
    };
    let in_window = alpha >= window.0 - CASE_TOL && alpha <= window.1 + CASE_TOL;
    let admissible = in_window && delta <= CASE_TOL;
    let sector = halfspace_sector(pair, which, alpha, Branch::Plus);
    HalfspaceAdmissibility {
        which,
        alpha,
        window,
        delta,
        admissible,
        beta_magnitude: sector.beta.abs(),
        boundary_slope: Slope::from_angle(sector.boundary_angle),
    }
}

/// Axis of the closed cone `{|x2| <= K |x1|}` (horizontal) or
/// `{|x2| >= K |x1|}` (vertical) containing the free boundary lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeAxis {
    Horizontal,
    Vertical,
}

/// How many free-boundary directions the halfspace family for one obstacle
/// admits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DirectionBound {
    /// Every line through the origin occurs (rotationally invariant family).
    AllDirections,
    /// Slopes bounded by `bound`; the boundary lines stay inside the cone
    /// around `axis`.
    ConeBound { bound: f64, axis: ConeAxis },
    /// A finite number of admissible solutions (0 or 2).
    Count(u8),
}

pub fn halfspace_direction_bounds(pair: &NormalizedPair, which: ObstacleSide) -> DirectionBound {
    let sig = pair.signature();
    match classify(pair) {
        CaseLabel::Case1 => DirectionBound::AllDirections,
        CaseLabel::Case2 => {
            let da = pair.a2 - pair.a1;
            let dc = pair.c2 - pair.c1;
            let bound = match which {
                ObstacleSide::Lower => (-(da * sig.a) / (dc * sig.c)).sqrt(),
                ObstacleSide::Upper => (-(da * sig.c) / (dc * sig.a)).sqrt(),
            };
            let axis = if sig.a > 0.0 { ConeAxis::Horizontal } else { ConeAxis::Vertical };
            DirectionBound::ConeBound { bound, axis }
        }
        CaseLabel::Case3 { sign, a_boundary, c_boundary } => {
            let favored = match sign {
                Case3Sign::NonNegative => ObstacleSide::Lower,
                Case3Sign::NonPositive => ObstacleSide::Upper,
            };
            if which == favored {
                DirectionBound::AllDirections
            } else if a_boundary || c_boundary {
                DirectionBound::Count(2)
            } else {
                DirectionBound::Count(0)
            }
        }
    }
}

fn mod_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Minimum arc width accepted when assembling double cones; degenerate
/// zero-width cones are halfspace solutions and excluded here.
const MIN_ARC: f64 = 1e-9;

/// Tries to assemble the four-arc partition `[q_x][p1][q_y][p2]` from a
/// concrete choice of boundary rays; `None` when the rays are not in cyclic
/// order.
fn try_assembly(
    pair: &NormalizedPair,
    sx: &SectorSolution,
    sy: &SectorSolution,
    i_kx: usize,
    i_mx: usize,
    i_my: usize,
    i_ky: usize,
) -> Option<BlowupSolution> {
    let kx = mod_tau(sx.gamma2_angle + i_kx as f64 * PI);
    let mx = mod_tau(sx.gamma1_angle + i_mx as f64 * PI);
    let my = mod_tau(sy.gamma1_angle + i_my as f64 * PI);
    let ky = mod_tau(sy.gamma2_angle + i_ky as f64 * PI);
    let wa = mod_tau(mx - kx);
    let wb = mod_tau(my - mx);
    let wc = mod_tau(ky - my);
    let wd = mod_tau(kx - ky);
    let widths = [wa, wb, wc, wd];
    if widths.iter().any(|&w| w < MIN_ARC) {
        return None;
    }
    if (wa + wb + wc + wd - TAU).abs() > 1e-9 {
        return None;
    }
    double_cone_from_arcs(pair, sx.q, sy.q, [kx, mx, my, ky], widths).ok()
}

fn same_solution(a: &BlowupSolution, b: &BlowupSolution) -> bool {
    if a.pieces.len() != b.pieces.len() {
        return false;
    }
    a.pieces.iter().zip(&b.pieces).all(|(p, q)| {
        let ds = mod_tau(p.start - q.start);
        let ds = ds.min(TAU - ds);
        ds < 1e-9
            && p.kind == q.kind
            && (p.form.a - q.form.a).abs() < 1e-9
            && (p.form.b - q.form.b).abs() < 1e-9
            && (p.form.c - q.form.c).abs() < 1e-9
    })
}

/// Enumerates the double-cone solutions generated by the sector parameters
/// `alpha1` and `alpha2`.
///
/// Case 2 ignores the inputs (the admissible `alpha` is unique) and returns
/// exactly four solutions. In Case 1 a single interior `alpha` yields four,
/// and a pair of distinct interior values yields the sixteen merged
/// arrangements with disjoint sectors (four beta-sign combinations times
/// four placements). Output order is canonical (lexicographic in the piece
/// layout) so runs are reproducible.
pub fn enumerate_double_cones(
    pair: &NormalizedPair,
    alpha1: f64,
    alpha2: f64,
) -> Result<Vec<BlowupSolution>, ClassifyError> {
    let (alpha1, alpha2) = match classify(pair) {
        CaseLabel::Case3 { .. } => return Err(ClassifyError::NoDoubleCones),
        CaseLabel::Case2 => match double_cone_alphas(pair) {
            AlphaSet::Single { alpha, .. } => (alpha, alpha),
            _ => unreachable!("Case 2 always carries a single alpha"),
        },
        CaseLabel::Case1 => (alpha1, alpha2),
    };

    let sectors_for = |alpha: f64| -> Result<[SectorSolution; 2], ClassifyError> {
        Ok([
            sector_from_alpha(pair, alpha, Branch::Plus)?,
            sector_from_alpha(pair, alpha, Branch::Minus)?,
        ])
    };
    let s1 = sectors_for(alpha1)?;
    let s2 = sectors_for(alpha2)?;

    let mut ordered_pairs: Vec<(&SectorSolution, &SectorSolution)> = Vec::new();
    for sx in &s1 {
        for sy in &s2 {
            ordered_pairs.push((sx, sy));
        }
    }
    if (alpha1 - alpha2).abs() > 0.0 {
        for sx in &s2 {
            for sy in &s1 {
                ordered_pairs.push((sx, sy));
            }
        }
    }

    let mut found: Vec<BlowupSolution> = Vec::new();
    for (sx, sy) in ordered_pairs {
        for i_kx in 0..2 {
            for i_mx in 0..2 {
                for i_my in 0..2 {
                    for i_ky in 0..2 {
                        if let Some(sol) = try_assembly(pair, sx, sy, i_kx, i_mx, i_my, i_ky) {
                            if !found.iter().any(|s| same_solution(s, &sol)) {
                                found.push(sol);
                            }
                        }
                    }
                }
            }
        }
    }
    found.sort_by(|a, b| {
        let key = |s: &BlowupSolution| {
            s.pieces
                .iter()
                .flat_map(|p| [p.start, p.width, p.form.a, p.form.b])
                .collect::<Vec<_>>()
        };
        key(a).partial_cmp(&key(b)).unwrap()
    });
    Ok(found)
}
