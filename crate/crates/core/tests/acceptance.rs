//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria that are not met are reported, not hidden; the process exits 0
//! unless `ACCEPTANCE_STRICT` is set, in which case any FAIL exits 1.

use colorsurg::cli::run_cli;
use colorsurg::decoding::single_fault_failures;
use colorsurg::geometry::{build_color_patch, build_surface_patch, Basis};
use colorsurg::montecarlo::{bell_wait, fit_scaling, results_csv, Campaign, Prepared, Protocol, ScalingFit};
use colorsurg::pauli::{code_distance, Clifford1};
use colorsurg::resources::{
    crossover_p, gate_resources, overhead_ratio, qubit_count, Family, Gate, Method, ResourceModel, SyndromeAllocation,
};
use colorsurg::surgery::{inject_state, logical_cnot, CnotMode, Extraction, InjectionInput};
use colorsurg::verify::{
    cnot_mode_disagreements, cnot_truth_table, injection_detection, merge_identity, stage_distances, verify_cnot, verify_injection,
};
use std::time::{Duration, Instant};

type Outcome = Result<(bool, String), String>;

struct Line {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn run(id: usize, title: &'static str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Line {
    let t = Instant::now();
    let r = f();
    let elapsed = t.elapsed();
    let (mut pass, mut detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
    if let Some(l) = limit {
        if elapsed > l {
            pass = false;
            detail.push_str(&format!("; over the {:?} limit", l));
        }
    }
    let line = Line {
        id,
        title,
        pass,
        detail,
        elapsed,
    };
    println!(
        "{} {:>2} {}: {} [{:.2?}]",
        if line.pass { "PASS" } else { "FAIL" },
        line.id,
        line.title,
        line.detail,
        line.elapsed
    );
    line
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn geometry_counts() -> Outcome {
    let mut bad = Vec::new();
    for d in [3i64, 5, 7, 9, 11, 13, 15] {
        let p = build_color_patch(d).map_err(e)?;
        let (data, faces) = ((d * d - 1) / 2 + d, (d * d + 2 * d - 3) / 4);
        if p.n() as i64 != data || p.faces.len() as i64 != faces {
            bad.push(format!("d={d}: {} qubits, {} faces", p.n(), p.faces.len()));
        }
    }
    Ok((
        bad.is_empty(),
        if bad.is_empty() {
            "d=3..15 data and face counts exact".into()
        } else {
            bad.join("; ")
        },
    ))
}

fn code_distances() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for d in [3usize, 5] {
        let s = build_surface_patch(d as i64).map_err(e)?;
        let ds = code_distance(&s.checkset(), &s.logical_pair()).map_err(e)?;
        let c = build_color_patch(d as i64).map_err(e)?;
        let (cs, lp) = (c.checkset(), c.logical_pair());
        let dc = code_distance(&cs, &lp).map_err(e)?;
        let h = vec![Some(Clifford1::H); c.n()];
        let s_gate = if d % 4 == 1 { Clifford1::S } else { Clifford1::SDagger };
        let sg = vec![Some(s_gate); c.n()];
        let dh = code_distance(&cs.transversal_image(&h), &lp.transversal_image(&h)).map_err(e)?;
        let dsg = code_distance(&cs.transversal_image(&sg), &lp.transversal_image(&sg)).map_err(e)?;
        ok &= [ds, dc, dh, dsg].iter().all(|&x| x == d);
        parts.push(format!("d={d}: surface {ds}, color {dc}, after H {dh}, after {s_gate:?} {dsg}"));
    }
    Ok((ok, parts.join("; ")))
}

fn tables() -> Outcome {
    use Method::*;
    use SyndromeAllocation::*;
    let printed: [(Method, SyndromeAllocation, [u64; 5]); 14] = [
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
    ];
    let mut bad = Vec::new();
    let mut cells = 0;
    for (m, a, row) in printed {
        for (k, d) in [3usize, 5, 7, 9, 11].into_iter().enumerate() {
            cells += 1;
            let got = qubit_count(m, a, d).map_err(e)?;
            if got != row[k] {
                bad.push(format!("{} {} d={d}: {got} != {}", m.label(), a.label(), row[k]));
            }
        }
    }
    let mut formulas = 0;
    for d in [3u64, 5, 7, 9, 11, 13, 21] {
        for g in Gate::ALL {
            for fam in [Family::Color, Family::Surface] {
                let r = gate_resources(fam, g, d as usize).map_err(e)?;
                let depth = match (fam, g) {
                    (_, Gate::TPlus) => 6,
                    (_, Gate::Identity | Gate::PrepZero | Gate::PrepPlus) => d,
                    (_, Gate::MeasZ | Gate::MeasX) => 1,
                    (Family::Color, Gate::H | Gate::S) => 0,
                    (Family::Surface, Gate::H) => 6 * d,
                    (Family::Surface, Gate::S) => 12 * d,
                    (_, Gate::Cnot) => 3 * d,
                };
                let qubits = match (fam, g) {
                    (Family::Color, Gate::Cnot) => 3 * d * d + 6 * d - 6,
                    (Family::Color, _) => d * d + 2 * d - 2,
                    (Family::Surface, Gate::H | Gate::S | Gate::Cnot) => 6 * d * d - 6 * d + 3,
                    (Family::Surface, _) => 2 * d * d - 2 * d + 1,
                };
                let order = if g == Gate::TPlus { 1 } else { d.div_ceil(2) };
                formulas += 1;
                if (r.depth, r.qubits, r.error_order) != (depth, qubits, order) {
                    bad.push(format!("{fam:?} {} d={d}", g.label()));
                }
            }
        }
    }
    let ok = bad.is_empty();
    Ok((
        ok,
        if ok {
            format!("{cells} CNOT-count cells and {formulas} gate formula evaluations match")
        } else {
            bad.join("; ")
        },
    ))
}

fn cnot_correctness() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let want: Vec<((bool, bool), (bool, bool))> = [(false, false), (false, true), (true, false), (true, true)]
        .iter()
        .map(|&(c, t)| ((c, t), (c, c ^ t)))
        .collect();
    for d in [3, 5] {
        for mode in [CnotMode::Accelerated, CnotMode::SevenStep] {
            let r = verify_cnot(d, mode, 8).map_err(e)?;
            let tt = (0..4).all(|s| cnot_truth_table(d, mode, s).map(|t| t == want).unwrap_or(false));
            ok &= r.passed() && tt;
            parts.push(format!(
                "{} d={d} {}/{} checks, truth table {}",
                mode.name(),
                r.n_passed(),
                r.checks.len(),
                if tt { "ok" } else { "wrong" }
            ));
        }
        let dis = cnot_mode_disagreements(d, CnotMode::Accelerated, CnotMode::SevenStep, 16).map_err(e)?;
        ok &= dis == 0;
        parts.push(format!("d={d} modes disagree on {dis}/16 seeds"));
    }
    Ok((ok, parts.join("; ")))
}

fn merged_identity() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [3, 5] {
        for b in [Basis::X, Basis::Z] {
            let (bad, counts) = merge_identity(d, b, 1000).map_err(e)?;
            // both outcomes must occur, or the comparison says little
            ok &= bad == 0 && counts[0] > 0 && counts[1] > 0;
            parts.push(format!("d={d} {b:?}{b:?}: {bad} mismatches (+1: {}, -1: {})", counts[0], counts[1]));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn surgery_distances() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [3, 5] {
        let c = logical_cnot(d, CnotMode::Accelerated, Extraction::default()).map_err(e)?;
        for (label, w) in stage_distances(&c).map_err(e)? {
            // w is None when no logical of weight <= d exists
            let min = w.map_or(format!(">{d}"), |w| w.to_string());
            ok &= w.is_none_or(|w| w >= d);
            parts.push(format!("d={d} {label}: {min}"));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn fault_tolerance_order(trials: u64) -> Outcome {
    let d = 3;
    let prep = Prepared::new(Protocol::Memory, d, Some(3), 1).map_err(e)?;
    let s = &prep.schedule;
    let lt = &prep.table;
    let (fails, tried) = single_fault_failures(&s.circuit, lt, &s.analysis.detectors, &s.observable_parities());
    let ps = [1e-3, 3e-3, 1e-2];
    let mut results = Vec::new();
    for (i, &p) in ps.iter().enumerate() {
        let mut c = Campaign::new(Protocol::Memory, d, p, trials, 20_240 + i as u64);
        c.rounds = Some(3);
        results.push(prep.run(&c).map_err(e)?);
    }
    let fit = fit_scaling(&results.iter().map(|r| (r.campaign.p, r.p_fail)).collect::<Vec<_>>()).map_err(e)?;
    let exp = ScalingFit::expected_exponent(d);
    let ok_fit = fit.matches_distance(d, 0.3);
    let rates: Vec<String> = results.iter().map(|r| format!("{:.0e}:{:.3e}", r.campaign.p, r.p_fail)).collect();
    Ok((
        fails == 0 && ok_fit,
        format!(
            "exhaustive {fails}/{tried} single-fault failures; fitted k = {:.2} +/- {:.2} (want {exp} +/- 0.3) from {} at {trials} trials/point",
            fit.exponent,
            fit.exponent_stderr,
            rates.join(" ")
        ),
    ))
}

fn injection(trials: u64) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [3, 5, 7] {
        let depth = inject_state(d, InjectionInput::SymbolicT, Extraction::default())
            .map_err(e)?
            .schedule
            .total_depth;
        ok &= depth == 6;
        let mut n = 0;
        for input in [
            InjectionInput::Zero,
            InjectionInput::Plus,
            InjectionInput::SPlus,
            InjectionInput::SymbolicT,
        ] {
            let r = verify_injection(d, input, 4).map_err(e)?;
            ok &= r.passed();
            n += r.n_passed();
        }
        parts.push(format!("d={d} depth {depth}, {n} readout checks ok"));
    }
    for d in [5, 7] {
        let r = injection_detection(d, false).map_err(e)?;
        ok &= r.undetected == 0;
        parts.push(format!(
            "d={d} step-2 faults: {} undetected of {} ({} aliased to the injected qubit)",
            r.undetected, r.faults, r.aliased
        ));
    }
    for d in [5, 7] {
        let w = bell_wait(d, 0.01, trials, 70 + d as u64).map_err(e)?;
        ok &= w.sigmas() <= 3.0;
        parts.push(format!(
            "Bell wait d={d}: {:.5} vs {:.5} ({:.2} sigma)",
            w.mean,
            w.expected,
            w.sigmas()
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn omega_surface(d: f64) -> f64 {
    2.0 * d * d - 2.0 * d + 1.0
}

/// Equal qubit budget for one logical qubit, then equal failure rates.
fn crossover_closed_form(pc: f64, ps: f64, ds: f64) -> f64 {
    let dc = (omega_surface(ds) + 3.0).sqrt() - 1.0;
    ((dc * pc.ln() - ds * ps.ln()) / (dc - ds)).exp()
}

fn crossover() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for (pc, ps) in [(0.00143, 0.00502), (0.00082, 0.01140), (0.002, 0.004)] {
        let m = ResourceModel::new(pc, ps).map_err(e)?;
        for ds in [5.0, 11.0, 21.0] {
            let want = crossover_closed_form(pc, ps, ds);
            if want < 1e-12 {
                continue;
            }
            let got = crossover_p(&m, ds).map_err(e)?;
            worst = worst.max(((got - want) / want).abs());
        }
    }
    ok &= worst < 1e-6;
    parts.push(format!("max relative deviation from closed form {worst:.1e}"));
    let c1 = crossover_p(&ResourceModel::best_for_color(), 11.0).map_err(e)?;
    let c2 = crossover_p(&ResourceModel::best_for_surface(), 11.0).map_err(e)?;
    ok &= (c1 / 1.3e-5).log10().abs() < 0.05 && (1e-8..=1e-6).contains(&c2);
    parts.push(format!("d_s=11 crossovers {c1:.3e} and {c2:.3e}"));
    let m = ResourceModel::new(0.003, 0.003).map_err(e)?;
    let r = overhead_ratio(&m, 201.0, 1e-4).map_err(e)?;
    ok &= (r - 0.5).abs() <= 0.01;
    parts.push(format!("equal-threshold ratio at d_s=201 {r:.5}"));
    Ok((ok, parts.join("; ")))
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["colorsurg"];
    full.extend_from_slice(args);
    let code = run_cli(full, &mut out, &mut err);
    if code != 0 {
        return Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err)));
    }
    Ok(out)
}

fn determinism() -> Outcome {
    let mut compared = 0;
    let mut bad = Vec::new();
    for proto in Protocol::ALL {
        let args = [
            "montecarlo",
            "--protocol",
            proto.name(),
            "--d",
            "3",
            "--p",
            "0.003,0.01",
            "--trials",
            "3000",
            "--seed",
            "99",
        ];
        let a = cli(&args)?;
        let b = cli(&args)?;
        compared += 1;
        if a != b || a.is_empty() {
            bad.push(proto.name().to_string());
        }
    }
    let dir = std::env::temp_dir().join(format!("colorsurg-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(e)?;
    let cfg = dir.join("run.cfg");
    std::fs::write(
        &cfg,
        "protocol = memory\nd = 3\np = 0.002, 0.005\ntrials = 20000\nseed = 4242\nrounds = 3\n",
    )
    .map_err(e)?;
    let cfg_s = cfg.to_str().unwrap();
    let runs: Vec<Vec<u8>> = [["1"], ["4"]]
        .iter()
        .map(|j| cli(&["montecarlo", "--config", cfg_s, "--jobs", j[0]]))
        .collect::<Result<_, _>>()?;
    compared += 1;
    if runs[0] != runs[1] {
        bad.push("config file across thread counts".into());
    }
    let w = |s| {
        bell_wait(7, 0.01, 100_000, s)
            .map(|w| format!("{:?}", (w.mean, w.stderr)))
            .map_err(e)
    };
    compared += 1;
    if w(3)? != w(3)? {
        bad.push("bell wait".into());
    }
    let prep = Prepared::new(Protocol::Memory, 3, Some(3), 1).map_err(e)?;
    let mut c = Campaign::new(Protocol::Memory, 3, 0.004, 50_000, 1);
    c.rounds = Some(3);
    compared += 1;
    if results_csv(&[prep.run(&c).map_err(e)?], None) != results_csv(&[prep.run(&c).map_err(e)?], None) {
        bad.push("library campaign".into());
    }
    let _ = std::fs::remove_dir_all(&dir);
    let ok = bad.is_empty();
    Ok((
        ok,
        if ok {
            format!("{compared} pipelines byte-identical on re-run")
        } else {
            format!("differs: {}", bad.join(", "))
        },
    ))
}

fn main() {
    let trials: u64 = std::env::var("ACCEPTANCE_TRIALS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1_000_000);
    let lines = vec![
        run(1, "geometry counts", Some(Duration::from_secs(1)), geometry_counts),
        run(2, "code distance", Some(Duration::from_secs(300)), code_distances),
        run(3, "resource tables", None, tables),
        run(4, "CNOT correctness", Some(Duration::from_secs(60)), cnot_correctness),
        run(5, "merged-measurement identity", None, merged_identity),
        run(6, "distance during surgery", Some(Duration::from_secs(600)), surgery_distances),
        run(7, "fault-tolerance order", None, || fault_tolerance_order(trials)),
        run(8, "state injection", None, || injection(trials)),
        run(9, "crossover analysis", None, crossover),
        run(10, "determinism", None, determinism),
    ];
    let passed = lines.iter().filter(|l| l.pass).count();
    println!("{passed}/{} criteria pass", lines.len());
    if passed < lines.len() && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
