//! Closed-form resource accounting: per-gate depth and qubit formulas, CNOT
//! qubit counts per syndrome allocation, the threshold scaling law and the
//! color/surface overhead comparison.

use crate::{Error, Result};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Code family for resource formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    Color,
    Surface,
}

/// Ways of implementing a logical CNOT compared in the small-distance table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    ColorTransversal,
    ColorSurgery,
    SurfaceTransversal,
    SurfaceSurgery,
    /// Surface-code surgery with the intermediate data row kept.
    SurfaceSurgeryHorsman,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ColorTransversal,
        Method::ColorSurgery,
        Method::SurfaceTransversal,
        Method::SurfaceSurgery,
        Method::SurfaceSurgeryHorsman,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::ColorTransversal => "color transversal",
            Method::ColorSurgery => "color surgery",
            Method::SurfaceTransversal => "surface transversal",
            Method::SurfaceSurgery => "surface surgery",
            Method::SurfaceSurgeryHorsman => "surface surgery (Horsman)",
        }
    }

    /// Allocations with a defined count, in table order.
    pub fn allocations(self) -> &'static [SyndromeAllocation] {
        use SyndromeAllocation::*;
        match self {
            Method::ColorTransversal => &[OneTotal, HalfFaces, Faces, TwoPerFace],
            Method::ColorSurgery => &[OneTotal, Faces, TwoPerFace],
            Method::SurfaceTransversal => &[OneTotal, HalfFaces, Faces],
            Method::SurfaceSurgery | Method::SurfaceSurgeryHorsman => &[OneTotal, Faces],
        }
    }
}

/// Number of syndrome qubits relative to the face count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SyndromeAllocation {
    /// A single roving syndrome qubit.
    OneTotal,
    HalfFaces,
    Faces,
    TwoPerFace,
}

impl SyndromeAllocation {
    pub fn label(self) -> &'static str {
        match self {
            SyndromeAllocation::OneTotal => "1 total",
            SyndromeAllocation::HalfFaces => "faces/2",
            SyndromeAllocation::Faces => "faces",
            SyndromeAllocation::TwoPerFace => "2xfaces",
        }
    }
}

impl FromStr for SyndromeAllocation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace([' ', '_', '-'], "").as_str() {
            "1total" | "one" | "onetotal" => Ok(SyndromeAllocation::OneTotal),
            "faces/2" | "halffaces" => Ok(SyndromeAllocation::HalfFaces),
            "faces" | "perface" => Ok(SyndromeAllocation::Faces),
            "2xfaces" | "2×faces" | "twoperface" | "percheck" => Ok(SyndromeAllocation::TwoPerFace),
            _ => Err(Error::Parse(format!("unknown allocation {s:?}"))),
        }
    }
}

fn odd_distance(d: usize) -> Result<u64> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidDistance(d as i64));
    }
    Ok(d as u64)
}

/// Data qubits of a triangular 4.8.8 color patch.
pub fn color_data_qubits(d: u64) -> u64 {
    (d * d - 1) / 2 + d
}

/// Faces of a triangular 4.8.8 color patch.
pub fn color_faces(d: u64) -> u64 {
    (d * d + 2 * d - 3) / 4
}

/// Qubits for one logical CNOT, syndrome qubits included.
pub fn qubit_count(method: Method, alloc: SyndromeAllocation, d: usize) -> Result<u64> {
    use SyndromeAllocation::*;
    let d = odd_distance(d)?;
    let n = color_data_qubits(d);
    let f = color_faces(d);
    let unsupported = || Error::Invalid(format!("{} has no {} allocation", method.label(), alloc.label()));
    Ok(match (method, alloc) {
        (Method::ColorTransversal, OneTotal) => 2 * n + 1,
        (Method::ColorTransversal, HalfFaces) => 2 * n + f,
        (Method::ColorTransversal, Faces) => 2 * n + 2 * f,
        (Method::ColorTransversal, TwoPerFace) => 2 * n + 4 * f,
        (Method::ColorSurgery, OneTotal) => 3 * n + 1,
        (Method::ColorSurgery, Faces) => 3 * n + 3 * f,
        (Method::ColorSurgery, TwoPerFace) => 3 * n + 6 * f,
        (Method::SurfaceTransversal, OneTotal) => 2 * d * d + 1,
        (Method::SurfaceTransversal, HalfFaces) => 2 * d * d + (d - 1) * (d - 1),
        (Method::SurfaceTransversal, Faces) => 2 * d * d + 2 * (d - 1) * (d - 1),
        (Method::SurfaceSurgery, OneTotal) => 3 * d * d + 1,
        (Method::SurfaceSurgery, Faces) => 6 * d * d - 6 * d + 3,
        (Method::SurfaceSurgeryHorsman, OneTotal) => 3 * d * d + 2 * d + 1,
        (Method::SurfaceSurgeryHorsman, Faces) => 6 * d * d - 1,
        _ => return Err(unsupported()),
    })
}

/// Logical operations of the universal gate set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Gate {
    /// Injection of `T|+>`.
    TPlus,
    Identity,
    PrepZero,
    PrepPlus,
    MeasZ,
    MeasX,
    H,
    S,
    Cnot,
}

impl Gate {
    pub const ALL: [Gate; 9] = [
        Gate::TPlus,
        Gate::Identity,
        Gate::PrepZero,
        Gate::PrepPlus,
        Gate::MeasZ,
        Gate::MeasX,
        Gate::H,
        Gate::S,
        Gate::Cnot,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Gate::TPlus => "T|+>",
            Gate::Identity => "I",
            Gate::PrepZero => "|0>",
            Gate::PrepPlus => "|+>",
            Gate::MeasZ => "M_Z",
            Gate::MeasX => "M_X",
            Gate::H => "H",
            Gate::S => "S",
            Gate::Cnot => "CNOT",
        }
    }
}

impl FromStr for Gate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t" | "t|+>" | "tplus" | "t_plus" => Ok(Gate::TPlus),
            "i" | "identity" => Ok(Gate::Identity),
            "|0>" | "zero" | "prep_zero" => Ok(Gate::PrepZero),
            "|+>" | "plus" | "prep_plus" => Ok(Gate::PrepPlus),
            "m_z" | "mz" | "meas_z" => Ok(Gate::MeasZ),
            "m_x" | "mx" | "meas_x" => Ok(Gate::MeasX),
            "h" => Ok(Gate::H),
            "s" => Ok(Gate::S),
            "cnot" | "cx" => Ok(Gate::Cnot),
            _ => Err(Error::Parse(format!("unknown gate {s:?}"))),
        }
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "color" | "colour" | "488" => Ok(Family::Color),
            "surface" => Ok(Family::Surface),
            _ => Err(Error::Parse(format!("unknown code family {s:?}"))),
        }
    }
}

/// Evaluated resources of one logical gate at one distance, with one
/// syndrome qubit per check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GateResources {
    pub family: Family,
    pub gate: Gate,
    pub d: usize,
    /// Extraction rounds.
    pub depth: u64,
    pub qubits: u64,
    /// Logical failure scales as `p^error_order`.
    pub error_order: u64,
    pub depth_formula: &'static str,
    pub qubit_formula: &'static str,
}

pub fn gate_resources(family: Family, gate: Gate, d: usize) -> Result<GateResources> {
    let du = odd_distance(d)?;
    let (depth, depth_formula) = match (family, gate) {
        (_, Gate::TPlus) => (6, "6"),
        (_, Gate::Identity | Gate::PrepZero | Gate::PrepPlus) => (du, "d"),
        (_, Gate::MeasZ | Gate::MeasX) => (1, "1"),
        (Family::Color, Gate::H | Gate::S) => (0, "0"),
        (Family::Surface, Gate::H) => (6 * du, "6d"),
        (Family::Surface, Gate::S) => (12 * du, "12d"),
        (_, Gate::Cnot) => (3 * du, "3d"),
    };
    let two_patch = matches!(gate, Gate::Cnot) || (family == Family::Surface && matches!(gate, Gate::H | Gate::S));
    let (qubits, qubit_formula) = match (family, two_patch) {
        (Family::Color, false) => (omega_color_int(du), "d^2+2d-2"),
        (Family::Color, true) => (3 * du * du + 6 * du - 6, "3d^2+6d-6"),
        (Family::Surface, false) => (omega_surface_int(du), "2d^2-2d+1"),
        (Family::Surface, true) => (6 * du * du - 6 * du + 3, "6d^2-6d+3"),
    };
    let error_order = if gate == Gate::TPlus { 1 } else { du.div_ceil(2) };
    Ok(GateResources {
        family,
        gate,
        d,
        depth,
        qubits,
        error_order,
        depth_formula,
        qubit_formula,
    })
}

fn omega_color_int(d: u64) -> u64 {
    d * d + 2 * d - 2
}

fn omega_surface_int(d: u64) -> u64 {
    2 * d * d - 2 * d + 1
}

/// Single-patch color overhead, for continuous `d`.
pub fn omega_color(d: f64) -> f64 {
    d * d + 2.0 * d - 2.0
}

/// Single-patch surface overhead, for continuous `d`.
pub fn omega_surface(d: f64) -> f64 {
    2.0 * d * d - 2.0 * d + 1.0
}

/// Prefactor `A(d)` of the scaling law.
pub type Prefactor = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Thresholds and prefactors of `p_fail = A(d) (p/p_th)^(d/2)`.
#[derive(Clone)]
pub struct ResourceModel {
    pub p_th_color: f64,
    pub p_th_surface: f64,
    pub a_color: Prefactor,
    pub a_surface: Prefactor,
}

impl fmt::Debug for ResourceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResourceModel")
            .field("p_th_color", &self.p_th_color)
            .field("p_th_surface", &self.p_th_surface)
            .finish_non_exhaustive()
    }
}

impl ResourceModel {
    pub fn new(p_th_color: f64, p_th_surface: f64) -> Result<Self> {
        for p in [p_th_color, p_th_surface] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Probability(p));
            }
        }
        Ok(ResourceModel {
            p_th_color,
            p_th_surface,
            a_color: Arc::new(|_| 1.0),
            a_surface: Arc::new(|_| 1.0),
        })
    }

    /// Highest color and lowest surface threshold estimates.
    pub fn best_for_color() -> Self {
        Self::new(0.00143, 0.00502).unwrap()
    }

    /// Lowest color and highest surface threshold estimates.
    pub fn best_for_surface() -> Self {
        Self::new(0.00082, 0.01140).unwrap()
    }

    pub fn threshold(&self, family: Family) -> f64 {
        match family {
            Family::Color => self.p_th_color,
            Family::Surface => self.p_th_surface,
        }
    }

    fn check_below(&self, p: f64) -> Result<()> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Probability(p));
        }
        if p >= self.p_th_color || p >= self.p_th_surface {
            return Err(Error::Regime(format!("p = {p} is not below both thresholds")));
        }
        Ok(())
    }
}

/// `A(d) (p/p_th)^(d/2)`. `p` equal to the threshold is allowed (the base is
/// one); above it the law does not apply.
pub fn p_fail(model: &ResourceModel, family: Family, d: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Probability(p));
    }
    let th = model.threshold(family);
    if p > th {
        return Err(Error::Regime(format!("p = {p} above threshold {th}")));
    }
    let a = match family {
        Family::Color => (model.a_color)(d),
        Family::Surface => (model.a_surface)(d),
    };
    Ok(a * (p / th).powf(d / 2.0))
}

/// Color distance with the same error suppression as surface distance
/// `d_s`, neglecting the prefactor term.
pub fn dc_for_ds(model: &ResourceModel, d_s: f64, p: f64) -> Result<f64> {
    model.check_below(p)?;
    Ok(d_s * (p / model.p_th_surface).ln() / (p / model.p_th_color).ln())
}

/// Smallest odd integer distance at least [`dc_for_ds`].
pub fn dc_for_ds_odd(model: &ResourceModel, d_s: f64, p: f64) -> Result<u64> {
    // tolerate rounding noise just above an integer
    let d = (dc_for_ds(model, d_s, p)? - 1e-9).ceil() as u64;
    Ok(if d.is_multiple_of(2) { d + 1 } else { d }.max(3))
}

/// `Ω_c(d_c) / Ω_s(d_s)` with continuous `d_c`.
pub fn overhead_ratio(model: &ResourceModel, d_s: f64, p: f64) -> Result<f64> {
    Ok(omega_color(dc_for_ds(model, d_s, p)?) / omega_surface(d_s))
}

/// Lower end of the crossover search.
pub const CROSSOVER_P_MIN: f64 = 1e-12;

/// The `p` at which both codes need the same qubits, by bisection on `log p`
/// to relative tolerance `1e-6`.
pub fn crossover_p(model: &ResourceModel, d_s: f64) -> Result<f64> {
    let hi_edge = model.p_th_color.min(model.p_th_surface);
    let f = |lp: f64| overhead_ratio(model, d_s, lp.exp()).map(|r| r - 1.0);
    let mut lo = CROSSOVER_P_MIN.ln();
    // stay strictly inside the regime
    let mut hi = hi_edge.ln() - 1e-9;
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::Invalid(format!(
            "no crossover in ({CROSSOVER_P_MIN:e}, {hi_edge:e}) for d_s = {d_s}"
        )));
    }
    while (hi - lo) > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if f(mid)?.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// One row per (method, allocation) with counts for each distance.
pub fn cnot_table_csv(ds: &[usize]) -> Result<String> {
    let mut out = String::from("method,allocation");
    for d in ds {
        out += &format!(",d{d}");
    }
    out.push('\n');
    for m in Method::ALL {
        for &a in m.allocations() {
            out += &format!("{},{}", m.label(), a.label());
            for &d in ds {
                out += &format!(",{}", qubit_count(m, a, d)?);
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Depth and qubits of every gate for the given families.
pub fn gate_table_csv(families: &[Family], ds: &[usize]) -> Result<String> {
    let mut out = String::from("family,gate,d,depth,qubits,error_order,depth_formula,qubit_formula\n");
    for &fam in families {
        for g in Gate::ALL {
            for &d in ds {
                let r = gate_resources(fam, g, d)?;
                out += &format!(
                    "{:?},{},{},{},{},{},{},{}\n",
                    fam,
                    g.label(),
                    d,
                    r.depth,
                    r.qubits,
                    r.error_order,
                    r.depth_formula,
                    r.qubit_formula
                );
            }
        }
    }
    Ok(out)
}

/// Log-spaced `(p, ratio)` points for each `d_s`, up to just below the
/// lower threshold.
pub fn ratio_curves_csv(model: &ResourceModel, d_ss: &[usize], p_min: f64, points: usize) -> Result<String> {
    let p_max = model.p_th_color.min(model.p_th_surface) * 0.999;
    let mut out = String::from("d_s,p,d_c,ratio\n");
    for &ds in d_ss {
        for k in 0..points {
            let t = k as f64 / (points.max(2) - 1) as f64;
            let p = (p_min.ln() + t * (p_max.ln() - p_min.ln())).exp();
            let dc = dc_for_ds(model, ds as f64, p)?;
            out += &format!("{ds},{p:.6e},{dc:.6},{:.6}\n", overhead_ratio(model, ds as f64, p)?);
        }
    }
    Ok(out)
}

/// Crossover per model and `d_s`; `none` where the ratio never reaches 1
/// inside the search range.
pub fn crossover_csv(models: &[(&str, &ResourceModel)], d_ss: &[usize]) -> Result<String> {
    let mut out = String::from("model,p_th_color,p_th_surface,d_s,crossover_p\n");
    for (name, m) in models {
        for &ds in d_ss {
            let cell = match crossover_p(m, ds as f64) {
                Ok(p) => format!("{p:.6e}"),
                Err(Error::Invalid(_)) => "none".into(),
                Err(e) => return Err(e),
            };
            out += &format!("{name},{},{},{ds},{cell}\n", m.p_th_color, m.p_th_surface);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DS: [usize; 5] = [3, 5, 7, 9, 11];

    /// Printed CNOT qubit counts, row by row.
    fn printed() -> Vec<(Method, SyndromeAllocation, [u64; 5])> {
        use Method::*;
        use SyndromeAllocation::*;
        vec![
            (ColorTransversal, OneTotal, [15, 35, 63, 99, 143]),
            (ColorTransversal, HalfFaces, [17, 42, 77, 122, 177]),
            (ColorTransversal, Faces, [20, 50, 92, 146, 212]),
            (ColorTransversal, TwoPerFace, [26, 66, 122, 194, 282]),
            (ColorSurgery, OneTotal, [22, 52, 94, 148, 214]),
            (ColorSurgery, Faces, [30, 75, 138, 219, 318]),
            (ColorSurgery, TwoPerFace, [39, 99, 183, 291, 423]),
            (SurfaceTransversal, OneTotal, [19, 51, 99, 163, 243]),
            (SurfaceTransversal, HalfFaces, [22, 66, 134, 226, 342]),
            (SurfaceTransversal, Faces, [26, 82, 170, 290, 442]),
            (SurfaceSurgery, OneTotal, [28, 76, 148, 244, 364]),
            (SurfaceSurgery, Faces, [39, 123, 255, 435, 663]),
            (SurfaceSurgeryHorsman, OneTotal, [34, 86, 162, 262, 386]),
            (SurfaceSurgeryHorsman, Faces, [53, 149, 293, 485, 725]),
        ]
    }

    #[test]
    fn cnot_counts_match_printed_table() {
        let rows = printed();
        let total: usize = Method::ALL.iter().map(|m| m.allocations().len()).sum();
        assert_eq!(rows.len(), total);
        for (m, a, want) in rows {
            for (k, &d) in DS.iter().enumerate() {
                assert_eq!(qubit_count(m, a, d).unwrap(), want[k], "{} {} d={d}", m.label(), a.label());
            }
        }
    }

    #[test]
    fn roving_color_cnot_formula() {
        for d in DS {
            let du = d as u64;
            assert_eq!(
                qubit_count(Method::ColorSurgery, SyndromeAllocation::OneTotal, d).unwrap(),
                (3 * du * du + 6 * du - 1) / 2
            );
        }
    }

    #[test]
    fn unsupported_pairs_and_distances_error() {
        assert!(qubit_count(Method::ColorSurgery, SyndromeAllocation::HalfFaces, 3).is_err());
        assert!(qubit_count(Method::SurfaceSurgery, SyndromeAllocation::TwoPerFace, 3).is_err());
        assert!(qubit_count(Method::ColorSurgery, SyndromeAllocation::Faces, 4).is_err());
        assert!(gate_resources(Family::Color, Gate::H, 1).is_err());
    }

    #[test]
    fn gate_table_entries() {
        let c = |g, d| gate_resources(Family::Color, g, d).unwrap();
        let s = |g, d| gate_resources(Family::Surface, g, d).unwrap();
        assert_eq!((c(Gate::Cnot, 5).depth, c(Gate::Cnot, 5).qubits), (15, 99));
        assert_eq!(s(Gate::S, 7).depth, 84);
        assert_eq!(s(Gate::H, 7).depth, 42);
        for d in DS {
            assert_eq!(c(Gate::H, d).depth, 0);
            assert_eq!(c(Gate::S, d).depth, 0);
            assert_eq!(c(Gate::TPlus, d).depth, 6);
            assert_eq!(c(Gate::Identity, d).depth, d as u64);
            assert_eq!(c(Gate::MeasX, d).depth, 1);
            assert_eq!(c(Gate::TPlus, d).error_order, 1);
            assert_eq!(c(Gate::Cnot, d).error_order, (d as u64 + 1) / 2);
            let du = d as u64;
            assert_eq!(c(Gate::Identity, d).qubits, du * du + 2 * du - 2);
            assert_eq!(s(Gate::Identity, d).qubits, 2 * du * du - 2 * du + 1);
            assert_eq!(s(Gate::Cnot, d).qubits, 6 * du * du - 6 * du + 3);
            assert_eq!(s(Gate::H, d).qubits, 6 * du * du - 6 * du + 3);
            // color single patch: data plus two syndrome qubits per face
            assert_eq!(c(Gate::Identity, d).qubits, color_data_qubits(du) + 2 * color_faces(du));
            assert_eq!(
                qubit_count(Method::ColorSurgery, SyndromeAllocation::TwoPerFace, d).unwrap(),
                c(Gate::Cnot, d).qubits
            );
            assert_eq!(
                qubit_count(Method::SurfaceSurgery, SyndromeAllocation::Faces, d).unwrap(),
                s(Gate::Cnot, d).qubits
            );
        }
    }

    #[test]
    fn scaling_law_examples() {
        let m = ResourceModel::new(0.00143, 0.00502).unwrap();
        assert!((p_fail(&m, Family::Color, 4.0, 0.00143).unwrap() - 1.0).abs() < 1e-12);
        assert!((p_fail(&m, Family::Color, 4.0, 0.000143).unwrap() - 0.01).abs() < 1e-12);
        assert!((p_fail(&m, Family::Surface, 6.0, 0.000502).unwrap() - 0.001).abs() < 1e-12);
        assert!(matches!(p_fail(&m, Family::Color, 3.0, 0.002), Err(Error::Regime(_))));
        assert!(dc_for_ds(&m, 11.0, 0.002).is_err());
    }

    #[test]
    fn equal_thresholds_keep_distance() {
        let m = ResourceModel::new(0.003, 0.003).unwrap();
        assert!((dc_for_ds(&m, 11.0, 1e-4).unwrap() - 11.0).abs() < 1e-12);
        assert!((overhead_ratio(&m, 201.0, 1e-4).unwrap() - 0.5).abs() < 0.01);
        assert_eq!(dc_for_ds_odd(&m, 11.0, 1e-4).unwrap(), 11);
    }

    #[test]
    fn distance_conversion_against_direct_logs() {
        // log-ratio computed from log10 values
        let m = ResourceModel::best_for_color();
        let p: f64 = 1e-4;
        let want = 11.0 * (p.log10() - 0.00502f64.log10()) / (p.log10() - 0.00143f64.log10());
        assert!((dc_for_ds(&m, 11.0, p).unwrap() - want).abs() < 1e-10);
        assert!(overhead_ratio(&m, 11.0, 1e-6).unwrap() < 1.0);
        assert!(overhead_ratio(&ResourceModel::best_for_surface(), 11.0, 1e-4).unwrap() > 1.0);
    }

    /// Solve Ω_c(d_c) = Ω_s(d_s) for d_c, then invert the log ratio.
    fn crossover_oracle(pc: f64, ps: f64, ds: f64) -> f64 {
        let dc = -1.0 + (3.0 + omega_surface(ds)).sqrt();
        let r = dc / ds;
        ((ps.ln() - r * pc.ln()) / (1.0 - r)).exp()
    }

    #[test]
    fn crossover_matches_closed_form() {
        for (pc, ps) in [(0.00143, 0.00502), (0.00082, 0.01140)] {
            let m = ResourceModel::new(pc, ps).unwrap();
            for ds in [5.0, 11.0, 21.0, 51.0] {
                let want = crossover_oracle(pc, ps, ds);
                if want < CROSSOVER_P_MIN {
                    assert!(crossover_p(&m, ds).is_err());
                    continue;
                }
                let got = crossover_p(&m, ds).unwrap();
                assert!(((got - want) / want).abs() < 1e-6, "{pc} {ps} {ds}: {got} vs {want}");
            }
        }
        let c1 = crossover_p(&ResourceModel::best_for_color(), 11.0).unwrap();
        assert!((c1 - 1.3e-5).abs() < 0.1e-5, "{c1}");
        let c2 = crossover_p(&ResourceModel::best_for_surface(), 11.0).unwrap();
        assert!((1e-8..=1e-6).contains(&c2), "{c2}");
    }

    #[test]
    fn no_crossover_is_reported() {
        // the surface threshold far below the color one: color always wins
        let m = ResourceModel::new(0.009, 0.0001).unwrap();
        assert!(crossover_p(&m, 11.0).is_err());
    }

    #[test]
    fn csv_emitters_have_expected_shape() {
        let t = cnot_table_csv(&DS).unwrap();
        assert_eq!(t.lines().count(), 15);
        assert!(t.contains("color surgery,faces,30,75,138,219,318"));
        let g = gate_table_csv(&[Family::Color, Family::Surface], &[3]).unwrap();
        assert_eq!(g.lines().count(), 19);
        let x = crossover_csv(&[("s", &ResourceModel::best_for_surface())], &[5, 11]).unwrap();
        assert!(x.contains("s,0.00082,0.0114,5,none\n"), "{x}");
        let r = ratio_curves_csv(&ResourceModel::best_for_color(), &[11, 21], 1e-9, 5).unwrap();
        assert_eq!(r.lines().count(), 11);
    }

    proptest! {
        #[test]
        fn ratio_decreases_with_p(ds in 3usize..60, a in -10.0f64..-3.2, b in -10.0f64..-3.2) {
            let m = ResourceModel::best_for_color();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            let r_lo = overhead_ratio(&m, ds as f64, 10f64.powf(lo)).unwrap();
            let r_hi = overhead_ratio(&m, ds as f64, 10f64.powf(hi)).unwrap();
            prop_assert!(r_lo < r_hi);
        }

        #[test]
        fn p_fail_monotone_in_p(d in 3usize..30, x in 0.01f64..0.99, y in 0.01f64..0.99) {
            let m = ResourceModel::best_for_surface();
            prop_assume!((x - y).abs() > 1e-9);
            let f = |t: f64| p_fail(&m, Family::Surface, d as f64, t * m.p_th_surface).unwrap();
            prop_assert_eq!(f(x) < f(y), x < y);
        }
    }
}
