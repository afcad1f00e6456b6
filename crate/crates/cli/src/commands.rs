use frasian_core::bands::{
    band_coverage, band_grid, dkw_band, dkw_epsilon, dp_posterior, dp_posterior_band, dp_shift_sweep, BandCoverageConfig,
    BandMethod, BaseMeasure, DpBandConfig, DpPrior, RESIDUAL_FLAG,
};
use frasian_core::conformal::sim::{coverage_simulate, region_length_simulate, PredictionSimConfig};
use frasian_core::conformal::{
    bayes_predictive_interval, default_grid, posterior_update, pvalue_curve, region_from_curve, ConjugateNormalModel,
    GridSpec, PValueVariant, RegionWarning, DEFAULT_GRID_POINTS,
};
use frasian_core::mtest::{
    fwer_simulate, optimal_weights, thresholds, weighted_bonferroni_with, FwerConfig, Hypothesis, MeanVector,
    PValueVector, RejectionRule, WeightVector,
};
use frasian_core::{NormalParams, Probability, RngSeed, Sample, SimulationReport};
use serde_json::{json, Value};

use crate::config::{BandMethodArg, BandsArgs, Command, DpArgs, ModelArgs, MtestArgs, PredictArgs, Preset, RunConfig, SampleArgs, SimulateArgs};
use crate::io::{parse_inline, read_column, Artifacts, CliError, CliResult};

const FWER_NULLS: usize = 100;
const DP_SWEEP_SHIFTS: [f64; 3] = [0.0, 1.0, 2.0];

pub fn run(cfg: &RunConfig) -> CliResult<Vec<std::path::PathBuf>> {
    let mut out = Artifacts::new(cfg)?;
    let alpha = Probability::level(cfg.alpha)?;
    let seed = RngSeed::new(cfg.seed);
    match &cfg.command {
        Command::Predict(args) => predict(args, alpha, &mut out)?,
        Command::Bands(args) => bands(args, alpha, &seed, &mut out)?,
        Command::Mtest(args) => mtest(args, alpha, &mut out)?,
        Command::Simulate(args) => simulate(args, alpha, cfg.reps, &seed, &mut out)?,
    }
    Ok(out.written)
}

fn load_sample(args: &SampleArgs) -> CliResult<Sample> {
    let values = match (&args.sample, &args.sample_file) {
        (Some(inline), _) => parse_inline(inline)?,
        (None, Some(path)) => read_column(path, "y")?,
        (None, None) => return Err(CliError::Usage("a sample is required: pass --sample or --sample-file".into())),
    };
    if values.is_empty() {
        return Err(CliError::Usage("the sample is empty".into()));
    }
    Ok(Sample::new(values)?)
}

fn model(args: &ModelArgs) -> CliResult<ConjugateNormalModel> {
    Ok(ConjugateNormalModel::new(NormalParams::new(args.prior_mean, args.prior_var)?, args.noise_var)?)
}

fn predict_grid(args: &PredictArgs, model: &ConjugateNormalModel, sample: &Sample) -> CliResult<GridSpec> {
    let def = default_grid(model, sample)?;
    let lo = args.grid_lo.unwrap_or(def.lo);
    let hi = args.grid_hi.unwrap_or(def.hi);
    Ok(match args.grid_step {
        Some(step) => GridSpec::new(lo, hi, step)?,
        None if args.grid_lo.is_none() && args.grid_hi.is_none() => def,
        None => GridSpec::with_points(lo, hi, DEFAULT_GRID_POINTS)?,
    })
}

fn warning_text(w: RegionWarning) -> &'static str {
    match w {
        RegionWarning::Empty => "frequentized region is empty: alpha exceeds the largest attainable p-value",
        RegionWarning::BoundaryClipped => "frequentized region touches the grid boundary and may extend beyond it",
    }
}

fn predict(args: &PredictArgs, alpha: Probability, out: &mut Artifacts) -> CliResult<()> {
    let sample = load_sample(&args.sample)?;
    let model = model(&args.model)?;
    let grid = predict_grid(args, &model, &sample)?;
    let variant = if args.self_inclusive { PValueVariant::SelfInclusive } else { PValueVariant::Printed };

    let curve = pvalue_curve(&model, &sample, &grid, variant)?;
    let region = region_from_curve(&curve, alpha, Some(grid));
    let post = posterior_update(&model, &sample);
    let bayes = bayes_predictive_interval(&post, &model, alpha)?;
    let pred = post.predictive(&model);

    out.json(
        "region.json",
        json!({
            "sample": sample,
            "posterior": { "mean": post.post_mean, "variance": post.post_variance },
            "predictive": { "mean": pred.mean, "variance": pred.variance },
            "pvalue_variant": variant,
            "grid": grid,
            "frequentized": {
                "intervals": region.intervals,
                "length": region.length(),
                "flags": region.warnings,
            },
            "bayes": {
                "intervals": bayes.intervals,
                "length": bayes.length(),
            },
            "warnings": region.warnings.iter().map(|&w| warning_text(w)).collect::<Vec<_>>(),
        }),
    )?;
    out.csv(
        "pvalues.csv",
        &["z", "pvalue", "in_region"],
        curve.iter().map(|&(z, p)| (z, p, u8::from(p >= alpha.get()))),
    )
}

fn normal_base(dp: &DpArgs) -> CliResult<NormalParams> {
    Ok(NormalParams::new(dp.base_mean, dp.base_var)?)
}

fn require_beta(dp: &DpArgs) -> CliResult<f64> {
    dp.beta.ok_or_else(|| CliError::Usage("--method dp needs --beta".into()))
}

fn bands(args: &BandsArgs, alpha: Probability, seed: &RngSeed, out: &mut Artifacts) -> CliResult<()> {
    let sample = load_sample(&args.sample)?;
    let grid = band_grid(&sample)?;
    let (band, meta) = match args.method {
        BandMethodArg::Dkw => {
            let band = dkw_band(&sample, alpha, &grid)?;
            let meta = json!({ "epsilon": dkw_epsilon(sample.len(), alpha)? });
            (band, meta)
        }
        BandMethodArg::Dp => {
            let beta = require_beta(&args.dp)?;
            let prior = DpPrior::new(BaseMeasure::Normal { params: normal_base(&args.dp)? }, beta)?;
            let post = dp_posterior(&prior, &sample)?;
            let dp = dp_posterior_band(&post, alpha, args.dp.draws, args.dp.truncation, &grid, seed)?;
            let meta = json!({
                "radius": dp.band.radius,
                "base_weight": post.base_weight(),
                "posterior_concentration": post.concentration(),
                "max_truncation_residual": dp.max_residual,
                "residual_flag": RESIDUAL_FLAG,
                "under_truncated_draws": dp.under_truncated_draws,
                "draws": dp.draws,
            });
            (dp.band, meta)
        }
    };
    let mut warnings = Vec::new();
    if meta.get("under_truncated_draws").and_then(Value::as_u64).unwrap_or(0) > 0 {
        warnings.push(format!("some draws left stick mass above {RESIDUAL_FLAG}; raise --truncation"));
    }
    out.json(
        "band.json",
        json!({
            "method": args.method,
            "n": sample.len(),
            "alpha": alpha,
            "grid_points": band.grid.len(),
            "metadata": meta,
            "warnings": warnings,
        }),
    )?;
    let rows = (0..band.grid.len()).map(|k| (band.grid[k], band.lower[k], band.center[k], band.upper[k]));
    out.csv("band.csv", &["x", "lower", "ecdf_or_mean", "upper"], rows)
}

fn mtest(args: &MtestArgs, alpha: Probability, out: &mut Artifacts) -> CliResult<()> {
    let pvalues = PValueVector::new(read_column(&args.pvalues, "pvalue")?)?;
    let m = pvalues.m();
    let (weights, provenance, c) = if let Some(path) = &args.weights {
        (WeightVector::new(read_column(path, "weight")?)?, "supplied", None)
    } else if let Some(path) = &args.means {
        let opt = optimal_weights(&MeanVector::new(read_column(path, "theta")?)?, alpha)?;
        (opt.weights, "optimal", Some(opt.c))
    } else {
        (WeightVector::uniform(m)?, "uniform", None)
    };
    if weights.m() != m {
        return Err(CliError::Usage(format!("{m} p-values but {} weights", weights.m())));
    }
    let rule = if args.literal_rule { RejectionRule::WeightedThenBonferroni } else { RejectionRule::Weighted };
    let t = thresholds(&weights, alpha, rule)?;
    let rejected = weighted_bonferroni_with(&pvalues, &weights, alpha, rule)?;
    out.json(
        "mtest.json",
        json!({
            "m": m,
            "rule": rule,
            "weight_provenance": provenance,
            "c": c,
            "weights": weights,
            "thresholds": t,
            "rejected": rejected.one_based(),
            "n_rejected": rejected.len(),
        }),
    )
}

fn labelled(label: String, report: &SimulationReport) -> Value {
    json!({ "label": label, "report": report })
}

fn simulate(
    args: &SimulateArgs,
    alpha: Probability,
    reps: Option<usize>,
    seed: &RngSeed,
    out: &mut Artifacts,
) -> CliResult<()> {
    let reports = match args.preset {
        Preset::Fig1 => fig1(args, alpha, reps.unwrap_or(1000), seed, out)?,
        Preset::ConformalCoverage => {
            let cfg = prediction_config(args, alpha, args.theta.unwrap_or(5.0), reps.unwrap_or(10_000))?;
            let report = coverage_simulate(&cfg, seed)?;
            vec![labelled(format!("theta={}", cfg.truth.mean), &report)]
        }
        Preset::DpCoverage => dp_coverage(args, alpha, reps.unwrap_or(100), seed)?,
        Preset::Fwer => {
            let weights = match &args.weights {
                Some(path) => WeightVector::new(read_column(path, "weight")?)?,
                None => WeightVector::uniform(FWER_NULLS)?,
            };
            let rule = if args.literal_rule { RejectionRule::WeightedThenBonferroni } else { RejectionRule::Weighted };
            let cfg = FwerConfig {
                truth: vec![Hypothesis::Null; weights.m()],
                weights,
                alpha,
                rule,
                replicates: reps.unwrap_or(10_000),
            };
            vec![labelled("full-null".into(), &fwer_simulate(&cfg, seed)?)]
        }
    };
    out.json("report.json", json!({ "preset": args.preset, "reports": reports }))
}

fn prediction_config(args: &SimulateArgs, alpha: Probability, theta: f64, reps: usize) -> CliResult<PredictionSimConfig> {
    let mut cfg = PredictionSimConfig::two_point(theta, reps);
    cfg.model = model(&args.model)?;
    cfg.alpha = alpha;
    cfg.n = args.n.unwrap_or(cfg.n);
    Ok(cfg)
}

fn fig1(args: &SimulateArgs, alpha: Probability, reps: usize, seed: &RngSeed, out: &mut Artifacts) -> CliResult<Vec<Value>> {
    let mut reports = Vec::new();
    let mut rows: Vec<(f64, usize, &'static str, f64, f64)> = Vec::new();
    for (i, theta) in [0.0, 5.0].into_iter().enumerate() {
        let cfg = prediction_config(args, alpha, theta, reps)?;
        let (report, pairs) = region_length_simulate(&cfg, &seed.child(i as u64))?;
        for (r, pair) in pairs.iter().enumerate() {
            rows.extend(pair.sample.values().iter().map(|&y| (theta, r, "data", y, y)));
            rows.extend(pair.frequentized.intervals.iter().map(|iv| (theta, r, "frequentized", iv.lo, iv.hi)));
            rows.extend(pair.bayes.intervals.iter().map(|iv| (theta, r, "bayes", iv.lo, iv.hi)));
        }
        reports.push(labelled(format!("theta={theta}"), &report));
    }
    out.csv("fig1.csv", &["theta", "replicate", "kind", "lo", "hi"], rows)?;
    Ok(reports)
}

fn dp_coverage(args: &SimulateArgs, alpha: Probability, reps: usize, seed: &RngSeed) -> CliResult<Vec<Value>> {
    let dp = DpBandConfig {
        base: normal_base(&args.dp)?,
        concentration: args.dp.beta.unwrap_or(10.0),
        draws: args.dp.draws,
        truncation: args.dp.truncation,
        content_draws: 200,
    };
    let theta = args.theta.unwrap_or(5.0);
    let base = BandCoverageConfig {
        method: BandMethod::DpPosterior,
        truth: NormalParams::new(theta, 1.0)?,
        n: args.n.unwrap_or(200),
        alpha,
        replicates: reps,
        dp: Some(dp),
    };
    let mut reports = vec![labelled(format!("dp shift={theta}"), &band_coverage(&base, &seed.child(0))?)];
    let dkw = BandCoverageConfig { method: BandMethod::Dkw, dp: None, ..base };
    reports.push(labelled(format!("dkw shift={theta}"), &band_coverage(&dkw, &seed.child(1))?));

    let sweep_cfg = BandCoverageConfig { dp: Some(DpBandConfig { content_draws: 0, ..dp }), ..base };
    for (shift, report) in dp_shift_sweep(&sweep_cfg, &DP_SWEEP_SHIFTS, &seed.child(2))? {
        reports.push(labelled(format!("dp shift={shift}"), &report));
    }
    Ok(reports)
}
