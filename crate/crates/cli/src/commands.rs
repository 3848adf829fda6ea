use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use carrier::correlations::{discord, ree, BoundReport, Certificate, Direction};
use carrier::examples::{
    cubitt_run, example1_build, example2_run, example2_sweep, example3_run, example3_sweep, example3_transition,
    linspace, Example2Params, Example3Params, ExampleReport,
};
use carrier::infotheory::{mutual_information, von_neumann_entropy};
use carrier::protocol::{run_suite, Status, Suite, VerificationRecord};
use carrier::qstate::StateFile;
use carrier::{CutSpec, DensityMatrix};
use serde::Serialize;

use crate::output::Sink;
use crate::{CliError, Example, RunConfig, SweepExample};

fn context(what: &Path) -> impl Fn(carrier::Error) -> CliError + '_ {
    move |e| match CliError::from(e) {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", what.display())),
        other => other,
    }
}

fn load_state(path: &Path, repair: bool) -> Result<DensityMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    StateFile::parse(&text, repair).map_err(context(path))
}

#[derive(Serialize)]
struct Header<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

fn open(cfg: &RunConfig) -> Result<Sink, CliError> {
    let mut sink = Sink::open(cfg.format, cfg.output.as_deref())?;
    let timestamp = (!cfg.deterministic).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    });
    sink.meta(
        "header",
        &Header {
            tool: "carrier",
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
            timestamp,
        },
    )?;
    Ok(sink)
}

fn elapsed(cfg: &RunConfig, start: Instant) -> Option<f64> {
    (!cfg.deterministic).then(|| start.elapsed().as_secs_f64())
}

#[derive(Serialize)]
struct MeasureRow {
    quantity: &'static str,
    subsystems: String,
    value: f64,
    direction: Direction,
    method: String,
    error_estimate: f64,
    certificate_kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<Certificate>,
}

impl MeasureRow {
    fn exact(quantity: &'static str, subsystems: String, value: f64, method: &str) -> Self {
        Self::from_report(quantity, subsystems, BoundReport::exact(value, method, None), false)
    }

    fn from_report(quantity: &'static str, subsystems: String, r: BoundReport, with_certificate: bool) -> Self {
        Self {
            quantity,
            subsystems,
            value: r.value,
            direction: r.direction,
            method: r.method.clone(),
            error_estimate: r.error_estimate,
            certificate_kind: r.certificate_kind(),
            certificate: if with_certificate { r.certificate } else { None },
        }
    }
}

pub fn measures(
    cfg: &RunConfig,
    path: &Path,
    cut: Option<&str>,
    measured: Option<&str>,
    repair: bool,
) -> Result<(), CliError> {
    let rho = load_state(path, repair)?;
    let labels = rho.labels().to_vec();
    let cut = match cut {
        Some(text) => {
            let c = CutSpec::parse(text)?;
            c.validate(rho.layout())?;
            Some(c)
        }
        None if labels.len() == 2 && measured.is_none() => Some(CutSpec::new(&labels[..1], &labels[1..])),
        None => None,
    };
    let measured = measured.map(str::to_string).or_else(|| {
        let c = cut.as_ref()?;
        match (c.left.len(), c.right.len()) {
            (_, 1) => Some(c.right[0].clone()),
            (1, _) => Some(c.left[0].clone()),
            _ => None,
        }
    });
    if cut.is_none() && measured.is_none() {
        return Err(CliError::Input("give --cut or --measured".into()));
    }
    if let Some(m) = &measured {
        rho.layout().position(m)?;
    }

    let opts = cfg.opts();
    let mut rows = vec![MeasureRow::exact("S", labels.concat(), von_neumann_entropy(&rho), "spectrum")];
    if let Some(c) = &cut {
        for side in [&c.left, &c.right] {
            let reduced = rho.partial_trace(side)?;
            rows.push(MeasureRow::exact("S", side.concat(), von_neumann_entropy(&reduced), "spectrum"));
        }
        rows.push(MeasureRow::exact("I", c.to_string(), mutual_information(&rho, c)?, "entropies"));
        rows.push(MeasureRow::from_report("E", c.to_string(), ree(&rho, c, &opts)?, cfg.certificate));
    }
    if let Some(m) = &measured {
        let rest: Vec<&str> = labels.iter().map(String::as_str).filter(|l| l != m).collect();
        rows.push(MeasureRow::from_report(
            "D",
            format!("{}|{m}", rest.concat()),
            discord(&rho, m, &opts)?,
            cfg.certificate,
        ));
    }

    let mut sink = open(cfg)?;
    for r in &rows {
        sink.row("measure", r)?;
    }
    sink.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    records: usize,
    certified: usize,
    supported: usize,
    failed: usize,
    all_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_seconds: Option<f64>,
}

impl Summary {
    fn of(records: &[VerificationRecord], elapsed_seconds: Option<f64>) -> Self {
        let count = |s: Status| records.iter().filter(|r| r.status == s).count();
        let failed = records.iter().filter(|r| !r.ok()).count();
        Self {
            records: records.len(),
            certified: count(Status::Certified),
            supported: count(Status::Supported),
            failed,
            all_ok: failed == 0,
            elapsed_seconds,
        }
    }
}

fn write_record(sink: &mut Sink, cfg: &RunConfig, r: &VerificationRecord) -> Result<(), CliError> {
    if cfg.certificate {
        sink.row("record", r)?;
    } else {
        sink.row("record", &r.row())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Parameters<'a> {
    example: &'a str,
    parameters: &'a [(String, f64)],
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<serde_json::Value>,
}

fn unused(example: Example, given: &[(&str, Option<f64>)]) -> Result<(), CliError> {
    match given.iter().find(|(_, v)| v.is_some()) {
        Some((name, _)) => Err(CliError::Input(format!("--{name} does not apply to example {example:?}"))),
        None => Ok(()),
    }
}

fn details(v: impl Serialize) -> Option<serde_json::Value> {
    serde_json::to_value(v).ok()
}

pub fn reproduce(
    cfg: &RunConfig,
    example: Example,
    p: Option<f64>,
    u: Option<f64>,
    s: Option<f64>,
    state: Option<&Path>,
    repair: bool,
) -> Result<(), CliError> {
    let start = Instant::now();
    let opts = cfg.opts();
    if example != Example::One && state.is_some() {
        return Err(CliError::Input("--state applies to example 1 only".into()));
    }
    let (report, extra): (ExampleReport, Option<serde_json::Value>) = match example {
        Example::Cubitt => {
            unused(example, &[("p", p), ("u", u), ("s", s)])?;
            let run = cubitt_run(&opts)?;
            let extra = details(serde_json::json!({
                "outcome_probability": run.outcome_probability,
                "phi_plus_fidelity": run.phi_plus_fidelity,
            }));
            (run.report, extra)
        }
        Example::Two => {
            unused(example, &[("u", u), ("s", s)])?;
            let run = example2_run(&Example2Params::new(p.unwrap_or(0.5))?, &opts)?;
            (run.report, None)
        }
        Example::Three => {
            unused(example, &[("p", p)])?;
            let u = u.unwrap_or(0.01);
            let params = match s {
                Some(s) => Example3Params::new(u, s)?,
                None => Example3Params::at_lower_s(u)?,
            };
            let run = example3_run(&params, &opts)?;
            let extra = details(serde_json::json!({
                "s_range": [run.s_range.0, run.s_range.1],
                "thresholds": run.thresholds,
                "a_bc_min_eigenvalue": run.a_bc_min_eigenvalue,
            }));
            (run.report, extra)
        }
        Example::One => {
            unused(example, &[("p", p), ("u", u), ("s", s)])?;
            let path = state.ok_or_else(|| CliError::Input("example 1 needs --state with a pure state file".into()))?;
            let rho = load_state(path, repair)?;
            let top = rho.eigenvalues().into_iter().fold(f64::NEG_INFINITY, f64::max);
            if top < 1.0 - 1e-9 {
                return Err(CliError::Input(format!(
                    "{}: example 1 needs a pure state (largest eigenvalue {top})",
                    path.display()
                )));
            }
            let run = example1_build(&rho.dominant_vector(), &opts).map_err(context(path))?;
            (run.report, details(&run.admissibility))
        }
    };

    let mut sink = open(cfg)?;
    sink.meta(
        "parameters",
        &Parameters {
            example: &report.example,
            parameters: &report.parameters,
            details: extra,
        },
    )?;
    for r in &report.records {
        write_record(&mut sink, cfg, r)?;
    }
    let summary = Summary::of(&report.records, elapsed(cfg, start));
    sink.meta("summary", &summary)?;
    sink.finish()?;
    eprintln!(
        "{}: {}/{} records ok",
        report.example,
        summary.records - summary.failed,
        summary.records
    );
    if summary.all_ok {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} record(s) failed", summary.failed)))
    }
}

/// `lo:hi:n` or `a,b,c`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Input(format!("grid spec `{spec}`: {why}"));
    let num = |t: &str| -> Result<f64, CliError> {
        let x: f64 = t.trim().parse().map_err(|_| bad(&format!("`{t}` is not a number")))?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(bad("values must be finite"))
        }
    };
    let spec_t = spec.trim();
    if spec_t.is_empty() {
        return Err(bad("empty grid"));
    }
    let values = if spec_t.contains(':') {
        let parts: Vec<&str> = spec_t.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(bad("expected lo:hi:n"));
        };
        let n: usize = n.trim().parse().map_err(|_| bad("n must be a nonnegative integer"))?;
        linspace(num(lo)?, num(hi)?, n)
    } else {
        spec_t.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(bad("empty grid"));
    }
    Ok(values)
}

#[derive(Serialize)]
struct Transition {
    u_npt: f64,
    u_ppt: f64,
}

pub fn sweep(cfg: &RunConfig, example: SweepExample, spec: &str) -> Result<(), CliError> {
    let grid = parse_grid(spec)?;
    match example {
        SweepExample::Two => {
            let rows = example2_sweep(&grid)?;
            let mut sink = open(cfg)?;
            for r in &rows {
                sink.row("row", r)?;
            }
            sink.finish()?;
        }
        SweepExample::Three => {
            let rows = example3_sweep(&grid)?;
            let mut sink = open(cfg)?;
            for r in &rows {
                sink.row("row", r)?;
            }
            let transition = example3_transition(&rows).map(|(u_npt, u_ppt)| Transition { u_npt, u_ppt });
            match &transition {
                Some(t) => eprintln!("A:BC turns PPT between u = {} and u = {}", t.u_npt, t.u_ppt),
                None => eprintln!("no NPT to PPT transition on this grid"),
            }
            sink.meta("summary", &serde_json::json!({ "transition": transition }))?;
            sink.finish()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SuiteSummary {
    suite: Suite,
    instances: usize,
    seed: u64,
    #[serde(flatten)]
    counts: Summary,
    worst_slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    carrier_ppt: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a_bc_npt: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    candidates: Option<usize>,
}

pub fn verify(cfg: &RunConfig, suite: &str, n: Option<usize>, trials: Option<usize>) -> Result<(), CliError> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse::<Suite>()?]
    };
    let opts = cfg.opts();
    let start = Instant::now();
    let mut sink = open(cfg)?;
    let (mut total, mut failed) = (0, 0);
    for s in suites {
        let count = match s {
            Suite::Theorem3 => trials.or(n),
            _ => n,
        }
        .unwrap_or_else(|| s.default_n());
        let suite_start = Instant::now();
        let report = run_suite(s, count, cfg.seed, &opts)?;
        for r in &report.records {
            write_record(&mut sink, cfg, r)?;
        }
        let summary = SuiteSummary {
            suite: s,
            instances: report.instances,
            seed: report.seed,
            counts: Summary::of(&report.records, elapsed(cfg, suite_start)),
            worst_slack: report.worst_slack,
            carrier_ppt: report.search.as_ref().map(|x| x.carrier_ppt),
            a_bc_npt: report.search.as_ref().map(|x| x.a_bc_npt),
            candidates: report.search.as_ref().map(|x| x.candidates.len()),
        };
        eprintln!(
            "{}: {}/{} ok ({} certified, {} supported), worst slack {:.3e}",
            s.name(),
            summary.counts.records - summary.counts.failed,
            summary.counts.records,
            summary.counts.certified,
            summary.counts.supported,
            summary.worst_slack
        );
        sink.meta("suite_summary", &summary)?;
        total += summary.counts.records;
        failed += summary.counts.failed;
    }
    sink.meta(
        "summary",
        &serde_json::json!({
            "records": total,
            "failed": failed,
            "all_ok": failed == 0,
            "elapsed_seconds": elapsed(cfg, start),
        }),
    )?;
    sink.finish()?;
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{failed} record(s) failed")))
    }
}
