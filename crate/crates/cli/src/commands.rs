use serde::Serialize;
use weakgrad::io::{fmt17, write_atomic};
use weakgrad::modulus::{modulus_family_grid, modulus_single, CurveFamily, MeasureSpec, ModulusResult};
use weakgrad::muckenhoupt::{ap_scan, stage_growth_audit, SweepSpec};
use weakgrad::power_arcs::{integrate_log_corrected, integrate_power};
use weakgrad::weak_gradient::{gradient_csv, np_complement, weak_gradient_report, LipschitzSpec};
use weakgrad::weight::{box_sum_bound, mc_integral_nd, ConstructionParams, McEstimate, WeightSequence};
use weakgrad::{Error, ExtReal, Interval};

use crate::config::Experiment;
use crate::{Command, Failure};

pub fn run(cmd: Command, exp: &Experiment) -> Result<(), Failure> {
    match cmd {
        Command::Build => build(exp),
        Command::Eval => eval(exp),
        Command::ApScan => scan(exp),
        Command::Audit => audit(exp),
        Command::Integrability => integrability(exp),
        Command::Modulus => modulus(exp),
        Command::NpClassify => np_classify(exp),
        Command::Gradient => gradient(exp),
        Command::McCheck => mc_check(exp),
    }
}

fn write(exp: &Experiment, name: &str, contents: &str) -> Result<(), Failure> {
    let path = exp.out.join(name);
    write_atomic(&path, contents.as_bytes()).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize + ?Sized>(exp: &Experiment, name: &str, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    write(exp, name, &text)
}

fn p_tag(p: f64) -> String {
    format!("p{p}")
}

fn weight(exp: &Experiment) -> Result<WeightSequence, Failure> {
    Ok(WeightSequence::build(exp.params)?)
}

fn measure(exp: &Experiment) -> Result<MeasureSpec, Failure> {
    match &exp.measure {
        Some(path) => Ok(MeasureSpec::from_json(&read(path)?)?),
        None => Ok(MeasureSpec::absolutely_continuous(weight(exp)?.final_level().clone())),
    }
}

fn read(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct WeightSummary {
    params: ConstructionParams,
    stages: usize,
    segments: usize,
    min_level: f64,
    /// `Π (1 + ε_k)`.
    epsilon_product: f64,
    window_integral: ExtReal,
    failed_audits: Vec<usize>,
}

fn build(exp: &Experiment) -> Result<(), Failure> {
    let seq = weight(exp)?;
    let failed_audits: Vec<usize> = (1..=seq.depth()).filter(|&k| !seq.audit_stage(k).all()).collect();
    write(exp, "stage_table.csv", &seq.stage_table_csv())?;
    write_json(
        exp,
        "weight_summary.json",
        &WeightSummary {
            params: seq.params,
            stages: seq.depth(),
            segments: seq.final_level().len(),
            min_level: seq.stages.iter().map(|s| s.level).fold(1.0, f64::min),
            epsilon_product: seq.epsilons().iter().map(|e| 1.0 + e).product(),
            window_integral: integrate_power(seq.final_level(), 1.0, exp.params.window),
            failed_audits: failed_audits.clone(),
        },
    )?;
    if !failed_audits.is_empty() {
        return Err(Failure::Construction(format!("stage audits failed at k = {failed_audits:?}")));
    }
    Ok(())
}

fn sample_points(iv: Interval, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![iv.center()],
        n => (0..n).map(|i| if i == n - 1 { iv.hi } else { iv.lo + iv.len() * i as f64 / (n - 1) as f64 }).collect(),
    }
}

fn eval(exp: &Experiment) -> Result<(), Failure> {
    let seq = weight(exp)?;
    let w = seq.final_level();
    let mut csv = String::from("x,w\n");
    for x in sample_points(exp.interval, exp.samples.unwrap_or(1001)) {
        csv.push_str(&format!("{},{}\n", fmt17(x), fmt17(w.eval(x))));
    }
    write(exp, "eval.csv", &csv)
}

#[derive(Serialize)]
struct ScanSummary {
    p: f64,
    intervals: usize,
    infinite_rows: usize,
    sup: ExtReal,
    argmax: Option<Interval>,
}

fn scan(exp: &Experiment) -> Result<(), Failure> {
    let seq = weight(exp)?;
    let sweep = SweepSpec::dyadic(exp.params.window, exp.scale_depth);
    let threshold = 1.0 + exp.params.alpha;
    let mut summary = Vec::new();
    let mut violations = Vec::new();
    for &p in &exp.p {
        let report = ap_scan(seq.final_level(), p, &sweep)?;
        write(exp, &format!("ap_scan_{}.csv", p_tag(p)), &report.to_csv())?;
        if p > threshold && report.sup.is_infinite() {
            violations.push(format!("p = {p}: {} infinite rows", report.infinite_rows()));
        }
        summary.push(ScanSummary {
            p,
            intervals: report.rows.len(),
            infinite_rows: report.infinite_rows(),
            sup: report.sup,
            argmax: report.argmax,
        });
    }
    write_json(exp, "ap_scan.json", &summary)?;
    violations_to_result(violations)
}

fn violations_to_result(violations: Vec<String>) -> Result<(), Failure> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(violations.join("; ")))
    }
}

#[derive(Serialize)]
struct AuditSummary {
    p: f64,
    c_emp: f64,
    product_bound: f64,
    max_sup: ExtReal,
    all_flags: bool,
    bounded: bool,
}

fn audit(exp: &Experiment) -> Result<(), Failure> {
    let threshold = 1.0 + exp.params.alpha;
    if let Some(p) = exp.p.iter().find(|&&p| p <= threshold) {
        return Err(Failure::Config(format!("audit needs p > 1 + alpha = {threshold}, got {p}")));
    }
    let seq = weight(exp)?;
    let sweep = SweepSpec::dyadic(exp.params.window, exp.scale_depth);
    let mut summary = Vec::new();
    let mut violations = Vec::new();
    for &p in &exp.p {
        let a = stage_growth_audit(&seq, p, &sweep)?;
        write(exp, &format!("audit_{}.csv", p_tag(p)), &a.to_csv())?;
        if !a.all_flags() {
            let bad: Vec<usize> = a.rows.iter().filter(|r| !r.flag).map(|r| r.k).collect();
            violations.push(format!("p = {p}: audit flags false at k = {bad:?}"));
        }
        if !a.bounded() {
            violations.push(format!("p = {p}: max S_k {} exceeds {}", a.max_sup, a.product_bound));
        }
        summary.push(AuditSummary {
            p,
            c_emp: a.c_emp,
            product_bound: a.product_bound,
            max_sup: a.max_sup,
            all_flags: a.all_flags(),
            bounded: a.bounded(),
        });
    }
    write_json(exp, "audit.json", &summary)?;
    violations_to_result(violations)
}

#[derive(Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
enum IntegrabilityMode {
    /// `∫ w^{-s}`
    Power { s: f64 },
    /// `∫ w^{-1/α} |ln(w/r̄)|^{-θ}`
    LogCorrected { theta: f64 },
}

#[derive(Serialize)]
struct IntegrabilitySummary {
    #[serde(flatten)]
    mode: IntegrabilityMode,
    window_integral: ExtReal,
    intervals: usize,
    infinite_rows: usize,
}

fn integrability(exp: &Experiment) -> Result<(), Failure> {
    let seq = weight(exp)?;
    let w = seq.final_level();
    let alpha = exp.params.alpha;
    let mode = match (exp.theta, exp.s) {
        (Some(_), Some(_)) => return Err(Failure::Config("give either --s or --theta, not both".into())),
        (Some(theta), None) => IntegrabilityMode::LogCorrected { theta },
        (None, s) => IntegrabilityMode::Power { s: s.unwrap_or(1.0 / alpha) },
    };
    let integral = |iv: Interval| -> Result<ExtReal, Failure> {
        Ok(match mode {
            IntegrabilityMode::Power { s } => integrate_power(w, -s, iv),
            IntegrabilityMode::LogCorrected { theta } => integrate_log_corrected(w, alpha, theta, iv)?,
        })
    };
    let mut centers = seq.centers();
    centers.sort_by(f64::total_cmp);
    let sweep = SweepSpec { window: exp.params.window, j_min: 0, j_max: exp.scale_depth, step: 1.0 };
    let mut csv = String::from("lo,hi,meets_center,value\n");
    let mut infinite_rows = 0;
    let intervals = sweep.intervals();
    for iv in &intervals {
        let i = centers.partition_point(|&q| q < iv.lo);
        let meets = i < centers.len() && centers[i] <= iv.hi;
        let v = integral(*iv)?;
        infinite_rows += v.is_infinite() as usize;
        csv.push_str(&format!("{},{},{},{}\n", fmt17(iv.lo), fmt17(iv.hi), meets, v));
    }
    write(exp, "integrability.csv", &csv)?;
    let window_integral = integral(exp.params.window)?;
    write_json(
        exp,
        "integrability.json",
        &IntegrabilitySummary { mode, window_integral, intervals: intervals.len(), infinite_rows },
    )
}

fn family(exp: &Experiment) -> Result<CurveFamily, Failure> {
    let Some(path) = &exp.family else {
        return Ok(CurveFamily::new(vec![exp.interval])?);
    };
    let pairs: Vec<[f64; 2]> =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let ivs = pairs
        .iter()
        .map(|&[a, b]| Interval::new(a, b).map_err(|e| Failure::Config(format!("{}: {e}", path.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CurveFamily::new(ivs)?)
}

#[derive(Serialize)]
struct ModulusSummary {
    p: f64,
    curves: usize,
    value: ExtReal,
    gap: f64,
    converged: bool,
    /// Closed form, for a single curve.
    exact: Option<f64>,
}

fn modulus(exp: &Experiment) -> Result<(), Failure> {
    let mu = measure(exp)?;
    let fam = family(exp)?;
    let mut summary = Vec::new();
    let mut stalled = Vec::new();
    for &p in &exp.p {
        let result: ModulusResult = match modulus_family_grid(&mu, &fam, p, exp.cells) {
            Ok(r) => r,
            Err(Error::NotConverged(r)) => {
                stalled.push(format!("p = {p}: relative gap {:e} after {} iterations", r.gap, r.iterations));
                *r
            }
            Err(e) => return Err(e.into()),
        };
        write_json(exp, &format!("modulus_{}.json", p_tag(p)), &result)?;
        let exact = match fam.intervals() {
            [iv] => Some(modulus_single(&mu, *iv, p)?),
            _ => None,
        };
        summary.push(ModulusSummary {
            p,
            curves: fam.len(),
            value: result.value,
            gap: result.gap,
            converged: result.converged,
            exact,
        });
    }
    write_json(exp, "modulus.json", &summary)?;
    if stalled.is_empty() {
        Ok(())
    } else {
        Err(Failure::NotConverged(format!("solver did not converge: {}", stalled.join("; "))))
    }
}

fn np_classify(exp: &Experiment) -> Result<(), Failure> {
    let mu = measure(exp)?;
    for &p in &exp.p {
        let report = np_complement(&mu, p, exp.interval)?;
        write_json(exp, &format!("np_{}.json", p_tag(p)), &report)?;
    }
    Ok(())
}

fn gradient(exp: &Experiment) -> Result<(), Failure> {
    let mu = measure(exp)?;
    let f = match &exp.function {
        Some(path) => LipschitzSpec::from_json(&read(path)?)?,
        None => LipschitzSpec::linear(1.0),
    };
    for &p in &exp.p {
        let rows = weak_gradient_report(&mu, p, &f, exp.interval, exp.samples.unwrap_or(101))?;
        write(exp, &format!("gradient_{}.csv", p_tag(p)), &gradient_csv(&rows))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct McCheck {
    p: f64,
    dim: usize,
    /// Power of `ŵ` being integrated, `1 − p/α`.
    s: f64,
    seed: u64,
    #[serde(flatten)]
    mc: McEstimate,
    bound: ExtReal,
    holds: bool,
}

fn mc_check(exp: &Experiment) -> Result<(), Failure> {
    let seq = weight(exp)?;
    let bx = vec![exp.params.window; exp.dim];
    let samples = exp.samples.unwrap_or(100_000);
    if samples < 2 {
        return Err(Failure::Config("mc-check needs at least two samples".into()));
    }
    let mut checks = Vec::new();
    let mut violations = Vec::new();
    for &p in &exp.p {
        let s = 1.0 - p / exp.params.alpha;
        let mc = mc_integral_nd(&seq, s, &bx, samples, exp.seed);
        let bound = box_sum_bound(&seq, s, &bx);
        let holds = ExtReal::finite(mc.estimate) <= bound.max(ExtReal::ZERO) + ExtReal::finite(3.0 * mc.stderr);
        if !holds {
            violations.push(format!("p = {p}: estimate {} above bound {bound}", fmt17(mc.estimate)));
        }
        checks.push(McCheck { p, dim: exp.dim, s, seed: exp.seed, mc, bound, holds });
    }
    write_json(exp, "mc_check.json", &checks)?;
    violations_to_result(violations)
}
