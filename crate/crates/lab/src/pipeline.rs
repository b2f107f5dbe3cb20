use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use denjoy_core::catalog::IntervalFunction;
use denjoy_core::combinatorics::{intersection_multiplicity, predecessor_successor_table, pullbacks};
use denjoy_core::crossratio::{crd_level_sums, iterate_distortion_bound, FourTuple};
use denjoy_core::dynamics::{
    conjugacy_verdict, omega_gap_profile, wandering_verdict, ConjugacyReport, ConjugacyVerdict, OrbitClass,
    WanderingVerdict, CONFIRM_ITERATES, DENSE_GAP, PERIOD_SEARCH,
};
use denjoy_core::rotation::{birkhoff_estimate, detect_period, refined_rotation};
use denjoy_core::variation::{classify_regularity, Functional, VariationReport, DIVERGENCE_RATIO};
use denjoy_core::num::frac;
use denjoy_core::Arc;
use serde_json::{json, Value};

use crate::config::{build_function, build_map, BuiltMap, Config};
use crate::error::Result;
use crate::report::{ExperimentReport, SeriesRow, StageReport, StageStatus, Verdict, SCHEMA_VERSION};

/// Pullback multiplicity bound for natural neighbourhoods.
pub const MULTIPLICITY_BOUND: usize = 15;
/// Width of the point-like arcs placed on an orbit when the map has no
/// wandering arcs of its own.
pub const POINT_ARC_WIDTH: f64 = 1e-9;
/// Iterates over which the known wandering arc of a Denjoy map is checked.
pub const WANDERING_CHECK: usize = 50;

/// A finished experiment and the series of the stages that emit one.
#[derive(Debug)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub series: Vec<(String, Vec<SeriesRow>)>,
}

struct StageOutput {
    metrics: Value,
    verdicts: Vec<Verdict>,
    series: Vec<SeriesRow>,
}

struct Ctx<'a> {
    cfg: &'a Config,
    seed: u64,
    map: Option<BuiltMap>,
    variation: Option<VariationReport>,
    conjugacy: Option<ConjugacyReport>,
    crd: Option<f64>,
}

impl Ctx<'_> {
    fn map(&self) -> &BuiltMap {
        self.map.as_ref().expect("pipeline validated to carry a map")
    }
}

/// Runs every stage of the configured pipeline in order.
///
/// Stage failures and an expired time limit produce a report with
/// `complete = false`; only an unbuildable map is an error.
pub fn run_experiment(cfg: &Config, seed: u64) -> Result<Outcome> {
    let start = Instant::now();
    let mut timings = BTreeMap::new();
    let map = match &cfg.map {
        Some(m) => {
            let t = Instant::now();
            let built = build_map(m)?;
            timings.insert("map".to_string(), t.elapsed().as_secs_f64());
            Some(built)
        }
        None => None,
    };
    let label = map.as_ref().map(|m| m.diffeo().label().to_string());
    let mut ctx = Ctx { cfg, seed, map, variation: None, conjugacy: None, crd: None };

    let mut stages = BTreeMap::new();
    let mut verdicts = Vec::new();
    let mut series = Vec::new();
    let mut incomplete: Option<String> = None;
    let mut timed_out = false;
    for &stage in cfg.pipeline.stages() {
        if let Some(limit) = cfg.time_limit_s {
            if !timed_out && start.elapsed().as_secs_f64() > limit {
                timed_out = true;
                incomplete.get_or_insert_with(|| format!("time limit of {limit} s reached before stage `{stage}`"));
            }
        }
        if timed_out {
            stages.insert(stage.to_string(), skipped());
            continue;
        }
        let emit = cfg.emit_series.enabled(stage);
        let t = Instant::now();
        let out = match stage {
            "rotation" => rotation_stage(&ctx, emit),
            "variation" => variation_stage(&mut ctx, emit),
            "crossratio" => crossratio_stage(&mut ctx, emit),
            "conjugacy" => conjugacy_stage(&mut ctx, emit),
            "combinatorics" => combinatorics_stage(&ctx, emit),
            "criterion" => criterion_stage(&ctx),
            other => unreachable!("unknown stage {other}"),
        };
        timings.insert(stage.to_string(), t.elapsed().as_secs_f64());
        match out {
            Ok(o) => {
                let rows = if emit { o.series.len() } else { 0 };
                let file = (emit && !o.series.is_empty()).then(|| format!("{stage}.csv"));
                stages.insert(
                    stage.to_string(),
                    StageReport { status: StageStatus::Ok, metrics: o.metrics, error: None, series_file: file, series_rows: rows },
                );
                verdicts.extend(o.verdicts);
                if emit && !o.series.is_empty() {
                    series.push((stage.to_string(), o.series));
                }
            }
            Err(e) => {
                incomplete.get_or_insert_with(|| format!("stage `{stage}` failed"));
                stages.insert(
                    stage.to_string(),
                    StageReport {
                        status: StageStatus::Error,
                        metrics: json!({}),
                        error: Some(e.to_string()),
                        series_file: None,
                        series_rows: 0,
                    },
                );
            }
        }
    }
    timings.insert("total".to_string(), start.elapsed().as_secs_f64());
    let report = ExperimentReport {
        schema_version: SCHEMA_VERSION.to_string(),
        pipeline: cfg.pipeline.name().to_string(),
        map: label,
        seed,
        config: serde_json::to_value(cfg)?,
        stages,
        verdicts,
        complete: incomplete.is_none(),
        incomplete_reason: incomplete,
        timings,
    };
    Ok(Outcome { report, series })
}

fn skipped() -> StageReport {
    StageReport { status: StageStatus::Skipped, metrics: json!({}), error: None, series_file: None, series_rows: 0 }
}

fn functional(f: &Functional) -> Value {
    match *f {
        Functional::Value(v) => json!({ "finite": true, "value": v }),
        Functional::Diverging { rate, last } => json!({ "finite": false, "rate": rate, "last": last }),
    }
}

fn finite_word(finite: bool) -> &'static str {
    if finite {
        "finite"
    } else {
        "diverging"
    }
}

fn rotation_stage(ctx: &Ctx, emit: bool) -> Result<StageOutput> {
    let cfg = ctx.cfg;
    let f = ctx.map().diffeo();
    let est = birkhoff_estimate(f, 0.0, cfg.n)?;
    let (mid, width) = refined_rotation(f, 0.0, cfg.n)?;
    let period = detect_period(f, cfg.q_max, 0.0)?;
    let metrics = json!({
        "x0": 0.0,
        "value": est.value,
        "error_bound": est.error_bound,
        "iterates": est.iterates_used,
        "convergents": est.convergents,
        "bracket": { "value": mid, "width": width },
        "period": period.map(|(p, q)| json!({ "p": p, "q": q })),
    });
    let verdict = match period {
        Some((p, q)) => Verdict::new("rotation", "rotation-type", format!("rational {p}/{q}"), format!("period found, q_max={}", cfg.q_max)),
        None => Verdict::new(
            "rotation",
            "rotation-type",
            "irrational-evidence",
            format!("no period up to q_max={}, value {:.10} +- {:.1e} at n={}", cfg.q_max, est.value, est.error_bound, cfg.n),
        ),
    };
    let mut series = Vec::new();
    if emit {
        series.reserve(cfg.n as usize);
        let mut x = 0.0;
        for k in 1..=cfg.n {
            x = f.eval(x);
            series.push(SeriesRow { n: k, value: frac(x / k as f64), bound: 2.0 / k as f64 });
        }
    }
    Ok(StageOutput { metrics, verdicts: vec![verdict], series })
}

fn variation_stage(ctx: &mut Ctx, emit: bool) -> Result<StageOutput> {
    let f: IntervalFunction = build_function(ctx.cfg, ctx.map.as_ref())?;
    let rep = classify_regularity(&f, ctx.cfg.depth)?;
    let oracle = f.oracle.as_ref().map(|o| {
        json!({
            "total_variation": o.total_variation,
            "quadratic_variation": o.quadratic_variation,
            "zv_bounded": o.zv_bounded,
            "zyg_norm_bounded": o.zyg_norm_bounded,
        })
    });
    let metrics = json!({
        "function": f.label,
        "domain": [f.domain.0, f.domain.1],
        "depth": rep.depth,
        "depths": rep.depths,
        "tv": functional(&rep.tv),
        "zv": functional(&rep.zv),
        "qv": rep.qv,
        "qv_resolved": rep.qv_resolved,
        "zygmund_norm": functional(&rep.zyg_norm),
        "converged": {
            "tv": rep.converged.tv,
            "zv": rep.converged.zv,
            "qv": rep.converged.qv,
            "zygmund_norm": rep.converged.zyg_norm,
        },
        "holder": rep.holder.map(|(c, a)| json!({ "constant": c, "exponent": a })),
        "tv_sequence": rep.tv_sequence,
        "zv_sequence": rep.zv_sequence,
        "qv_sequence": rep.qv_sequence,
        "zygmund_sequence": rep.zyg_sequence,
        "bv_implications": rep.bv_implications,
        "zygmund_implications": rep.zygmund_implications,
        "oracle": oracle,
    });
    let value = format!(
        "tv {}, zv {}, qv {}, zygmund-norm {}",
        finite_word(rep.tv.is_finite()),
        finite_word(rep.zv.is_finite()),
        if rep.qv_resolved && rep.qv.is_finite() { "finite" } else { "unresolved" },
        finite_word(rep.zyg_norm.is_finite()),
    );
    let qualifier = format!("dyadic depths {:?}, divergence ratio {DIVERGENCE_RATIO} per doubling", rep.depths);
    let series = if emit {
        rep.depths
            .iter()
            .zip(rep.zv_sequence.iter().zip(&rep.tv_sequence))
            .map(|(&d, (&zv, &tv))| SeriesRow { n: d as u64, value: zv, bound: tv })
            .collect()
    } else {
        Vec::new()
    };
    ctx.variation = Some(rep);
    Ok(StageOutput { metrics, verdicts: vec![Verdict::new("variation", "regularity", value, qualifier)], series })
}

fn crossratio_stage(ctx: &mut Ctx, emit: bool) -> Result<StageOutput> {
    let cfg = ctx.cfg;
    let map = ctx.map();
    let sums = crd_level_sums(map.diffeo(), cfg.crd_depth, cfg.inner_samples, ctx.seed);
    let estimate = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut verdicts = vec![Verdict::new(
        "crossratio",
        "crd-variation",
        format!("lower bound {estimate:.6}"),
        format!("dyadic depth <= {}, {} random inner pairs per cell, seed {}", cfg.crd_depth, cfg.inner_samples, ctx.seed),
    )];
    let mut metrics = json!({
        "level_sums": sums,
        "estimate": estimate,
        "depth": cfg.crd_depth,
        "inner_samples": cfg.inner_samples,
    });
    if let Some(d) = map.denjoy() {
        let arc = d.wandering_arc;
        let n = cfg.horizon;
        let arcs = (0..n as i64).map(|i| arc.image_n(&d.base, i)).collect::<denjoy_core::Result<Vec<Arc>>>()?;
        let (s, l) = (arc.start(), arc.length());
        let t = FourTuple::new(s, s + l / 3.0, s + 2.0 * l / 3.0, s + l)?;
        let r = iterate_distortion_bound(&d.base, n, &t, &arcs)?;
        let within = r.measured.abs() <= r.budget;
        metrics["koebe_budget"] = json!({
            "horizon": n,
            "measured": r.measured,
            "chain_sum": r.chain_sum,
            "reassembly_gap": (r.measured - r.chain_sum).abs(),
            "budget": r.budget,
            "zv_total": r.zv_total,
            "qv_total": r.qv_total,
        });
        verdicts.push(Verdict::new(
            "crossratio",
            "koebe-budget",
            if within { "within-budget" } else { "exceeded" },
            format!("wandering arc orbit, {n} iterates, |{:.4}| vs {:.4}", r.measured, r.budget),
        ));
    }
    let series = if emit {
        sums.iter().enumerate().map(|(k, &s)| SeriesRow { n: k as u64 + 1, value: s, bound: estimate }).collect()
    } else {
        Vec::new()
    };
    ctx.crd = Some(estimate);
    Ok(StageOutput { metrics, verdicts, series })
}

fn verdict_name(v: &ConjugacyVerdict) -> String {
    match v {
        ConjugacyVerdict::ConjugateEvidence { .. } => "conjugate-evidence".into(),
        ConjugacyVerdict::WanderingIntervalFound(_) => "wandering-interval-found".into(),
        ConjugacyVerdict::RationalRotation { p, q } => format!("rational-rotation {p}/{q}"),
    }
}

fn class_name(c: OrbitClass) -> String {
    match c {
        OrbitClass::DenseLike => "dense-like".into(),
        OrbitClass::CantorLike => "cantor-like".into(),
        OrbitClass::PeriodicLike(q) => format!("periodic-like {q}"),
        OrbitClass::Undecided => "undecided".into(),
    }
}

/// Largest complementary gap of the first `k` orbit points, `k = 1..=len`.
fn running_max_gap(points: &[f64]) -> Vec<f64> {
    let mut sorted: BTreeSet<u64> = BTreeSet::new();
    let mut gaps: BTreeMap<u64, usize> = BTreeMap::new();
    let add = |gaps: &mut BTreeMap<u64, usize>, g: f64| *gaps.entry(g.to_bits()).or_default() += 1;
    let remove = |gaps: &mut BTreeMap<u64, usize>, g: f64| {
        let key = g.to_bits();
        let c = gaps.get_mut(&key).expect("gap present");
        *c -= 1;
        if *c == 0 {
            gaps.remove(&key);
        }
    };
    let mut out = Vec::with_capacity(points.len());
    for &p in points {
        let p = frac(p);
        let key = p.to_bits();
        if sorted.insert(key) {
            if sorted.len() == 1 {
                add(&mut gaps, 1.0);
            } else {
                let prev = sorted.range(..key).next_back().or_else(|| sorted.iter().next_back()).copied().unwrap();
                let next = sorted.range(key + 1..).next().or_else(|| sorted.iter().next()).copied().unwrap();
                let (a, b) = (f64::from_bits(prev), f64::from_bits(next));
                let span = |x: f64, y: f64| if y > x { y - x } else { y + 1.0 - x };
                remove(&mut gaps, if sorted.len() == 2 { 1.0 } else { span(a, b) });
                add(&mut gaps, span(a, p));
                add(&mut gaps, span(p, b));
            }
        }
        out.push(f64::from_bits(*gaps.keys().next_back().unwrap()));
    }
    out
}

fn conjugacy_stage(ctx: &mut Ctx, emit: bool) -> Result<StageOutput> {
    let cfg = ctx.cfg;
    let map = ctx.map();
    let f = map.diffeo();
    let n = cfg.budget;
    let rep = conjugacy_verdict(f, n)?;
    let profile = omega_gap_profile(f, 0.0, n, cfg.q_max.min(n as u64))?;
    let plateaus: Vec<Value> = rep
        .plateaus
        .iter()
        .map(|p| json!({ "start": p.arc.start(), "length": p.arc.length(), "flatness": p.flatness }))
        .collect();
    let found = match &rep.verdict {
        ConjugacyVerdict::WanderingIntervalFound(a) => Some(json!({ "start": a.start(), "length": a.length() })),
        _ => None,
    };
    let mut metrics = json!({
        "budget": n,
        "verdict": verdict_name(&rep.verdict),
        "rotation": rep.rotation,
        "plateau_count": rep.plateaus.len(),
        "plateaus": plateaus,
        "wandering_interval": found,
        "conjugacy_defect": rep.conjugacy_defect,
        "orbit_class": class_name(profile.class),
        "max_gap": profile.max_gap,
        "gap_trend": profile.gap_trend,
    });
    let qualifier = match &rep.verdict {
        ConjugacyVerdict::ConjugateEvidence { unconfirmed_plateaus } => {
            format!("scale-limited, n={n}, {unconfirmed_plateaus} unconfirmed plateaus")
        }
        ConjugacyVerdict::WanderingIntervalFound(_) => {
            format!("orbit of the arc disjoint for {} iterates, n={n}", CONFIRM_ITERATES.min(n))
        }
        ConjugacyVerdict::RationalRotation { .. } => format!("period search q <= {}", PERIOD_SEARCH.min(n as u64)),
    };
    let mut verdicts = vec![
        Verdict::new("conjugacy", "conjugacy", verdict_name(&rep.verdict), qualifier),
        Verdict::new("conjugacy", "orbit-class", class_name(profile.class), format!("n={n}, dense gap threshold {DENSE_GAP}/n")),
    ];
    if let Some(d) = map.denjoy() {
        let w = wandering_verdict(f, &d.wandering_arc, WANDERING_CHECK, 1e-12)?;
        let value = match w {
            WanderingVerdict::WanderingUpTo(k) => format!("wandering-up-to-{k}"),
            WanderingVerdict::OverlapAt(i, j) => format!("overlap-at {i},{j}"),
            WanderingVerdict::Contracted { .. } => "contracted".into(),
        };
        metrics["constructed_arc"] = json!({
            "start": d.wandering_arc.start(),
            "length": d.wandering_arc.length(),
            "verdict": value,
        });
        verdicts.push(Verdict::new(
            "conjugacy",
            "constructed-arc",
            value,
            format!("{WANDERING_CHECK} iterates, separation tolerance 1e-12"),
        ));
    }
    let series = if emit {
        running_max_gap(&profile.points)
            .into_iter()
            .enumerate()
            .map(|(k, g)| SeriesRow { n: k as u64 + 1, value: g, bound: DENSE_GAP / (k + 1) as f64 })
            .collect()
    } else {
        Vec::new()
    };
    ctx.conjugacy = Some(rep);
    Ok(StageOutput { metrics, verdicts, series })
}

fn combinatorics_stage(ctx: &Ctx, emit: bool) -> Result<StageOutput> {
    let cfg = ctx.cfg;
    let map = ctx.map();
    let f = map.diffeo();
    // Successors of index n need arcs up to 3n; leave room for skipped indices.
    let total = 3 * (cfg.indices + cfg.indices / 10 + 4) + 1;
    let (arcs, source) = match map.denjoy() {
        Some(d) => ((0..total as i64).map(|k| d.inserted_arc(k)).collect::<Vec<_>>(), "inserted arcs"),
        None => {
            let orbit = denjoy_core::dynamics::forward_orbit(f, 0.0, total - 1)?;
            let arcs = orbit
                .iter()
                .map(|&x| Arc::from_start_len(x, POINT_ARC_WIDTH))
                .collect::<denjoy_core::Result<Vec<Arc>>>()?;
            (arcs, "point arcs on the orbit of 0")
        }
    };
    let table = predecessor_successor_table(&arcs)?;
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut series = Vec::new();
    let (mut worst, mut tested, mut skipped) = (0, 0, 0);
    for n in 2..arcs.len() {
        if tested == cfg.indices || 3 * n >= arcs.len() {
            break;
        }
        let Ok(t) = table.natural_neighborhood(n) else {
            skipped += 1;
            continue;
        };
        let m = intersection_multiplicity(&pullbacks(f, &t, n)?);
        *histogram.entry(m).or_default() += 1;
        worst = worst.max(m);
        tested += 1;
        if emit {
            series.push(SeriesRow { n: n as u64, value: m as f64, bound: MULTIPLICITY_BOUND as f64 });
        }
    }
    let successors = table.successor.iter().filter(|s| s.is_some()).count();
    let metrics = json!({
        "arcs": source,
        "arc_count": arcs.len(),
        "indices_tested": tested,
        "indices_without_neighborhood": skipped,
        "max_multiplicity": worst,
        "multiplicity_histogram": histogram,
        "successors": successors,
        "double_successors": table.double_successors,
    });
    let value = if worst <= MULTIPLICITY_BOUND { "within-bound" } else { "exceeds-bound" };
    let verdicts = vec![Verdict::new(
        "combinatorics",
        "pullback-multiplicity",
        value,
        format!("max {worst} over {tested} indices ({source}), bound {MULTIPLICITY_BOUND}"),
    )];
    Ok(StageOutput { metrics, verdicts, series })
}

fn criterion_stage(ctx: &Ctx) -> Result<StageOutput> {
    let (Some(var), Some(conj)) = (&ctx.variation, &ctx.conjugacy) else {
        return Err(denjoy_core::Error::InvalidArgument("needs the variation and conjugacy stages".into()).into());
    };
    let zv = var.zv.is_finite();
    let qv = var.qv_resolved && var.qv.is_finite() && var.converged.qv;
    let hypotheses = zv && qv;
    let no_wandering = !matches!(conj.verdict, ConjugacyVerdict::WanderingIntervalFound(_));
    let value = match (hypotheses, no_wandering) {
        (true, true) => "consistent",
        (true, false) => "inconsistent",
        (false, _) => "hypotheses-not-evidenced",
    };
    let metrics = json!({
        "zv_finite": zv,
        "qv_finite": qv,
        "no_wandering_interval": no_wandering,
        "crd_variation": ctx.crd,
        "consistency": value,
    });
    let qualifier = format!(
        "finite ZV+QV evidence of log Df at depth {}: {hypotheses}; no wandering interval found at n={}: {no_wandering}",
        var.depth, conj.budget
    );
    Ok(StageOutput {
        metrics,
        verdicts: vec![Verdict::new("criterion", "criterion-consistency", value, qualifier)],
        series: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use denjoy_core::dynamics::max_circle_gap;

    #[test]
    fn running_gap_matches_batch() {
        let pts: Vec<f64> = (0..300).map(|k| frac(k as f64 * 0.618_033_988_75 + 0.1)).collect();
        let run = running_max_gap(&pts);
        for k in [1, 2, 3, 10, 77, 300] {
            assert_eq!(run[k - 1], max_circle_gap(&pts[..k]), "k={k}");
        }
    }

    #[test]
    fn running_gap_with_repeats() {
        let pts = [0.0, 0.5, 0.0, 0.25, 0.5];
        assert_eq!(running_max_gap(&pts), vec![1.0, 0.5, 0.5, 0.5, 0.5]);
    }
}
