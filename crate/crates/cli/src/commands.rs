//! File-to-file commands and the full pipeline.

use std::fs;
use std::path::{Path, PathBuf};

use fdaclust_core::basis::{functional_from_json, functional_to_json, FunctionalDatum};
use fdaclust_core::cluster::{
    fpc_scores, read_memberships_csv, run_route, smooth_cohort, write_memberships_csv, ClusterParams,
    ClusteringRecord, DistanceMatrix, Route, RouteInput, RouteResult,
};
use fdaclust_core::curve::{
    read_curves_csv, read_labels_csv, resample, write_curves_csv, write_labels_csv, AdjustedGrade, Cohort,
    HbGrade, SampledCurve,
};
use fdaclust_core::eval::{self, AnalysisReport, ContingencyTable, GradeMap};
use fdaclust_core::fpca::{choose_q, fit_fpca, scores, FpcaModel, ScoreMatrix};
use fdaclust_core::ingest::{indicator_curve, landmark_warps, parse_measurement, register};
use fdaclust_core::synth::{generate_cohort, generate_raw_measurement, grade_asymmetry, CohortSpec};
use fdaclust_core::Error;
use rayon::prelude::*;

use crate::config::{stage_seed, PipelineConfig, DEFAULT_CONFIG_TOML};
use crate::error::{read_text, write_text, CliError, CliResult};
use crate::plot;

pub struct Context {
    pub config: PipelineConfig,
    pub out_dir: PathBuf,
    pub quiet: bool,
}

impl Context {
    pub fn new(config: PipelineConfig, out_dir: impl Into<PathBuf>, quiet: bool) -> Self {
        Self {
            config,
            out_dir: out_dir.into(),
            quiet,
        }
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn grid_size(&self) -> usize {
        self.config.data.grid_size
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> fdaclust_core::Result<()>) -> CliResult<String> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

fn first_line(path: &Path) -> CliResult<String> {
    Ok(read_text(path)?.lines().next().unwrap_or("").trim().to_string())
}

// ---------------------------------------------------------------- loading

pub fn load_cohort(path: &Path, grid_size: usize) -> CliResult<Cohort> {
    let text = read_text(path)?;
    let curves = read_curves_csv(text.as_bytes()).map_err(CliError::in_file(path))?;
    Cohort::new(curves, None, grid_size).map_err(CliError::in_file(path))
}

pub fn load_labels(path: &Path, ids: &[String]) -> CliResult<Vec<HbGrade>> {
    read_labels_csv(read_text(path)?.as_bytes(), ids).map_err(CliError::in_file(path))
}

pub fn load_functional(path: &Path) -> CliResult<Vec<FunctionalDatum>> {
    functional_from_json(&read_text(path)?).map_err(CliError::in_file(path))
}

pub fn load_scores(path: &Path) -> CliResult<ScoreMatrix> {
    ScoreMatrix::read_csv(read_text(path)?.as_bytes()).map_err(CliError::in_file(path))
}

pub fn load_clustering(path: &Path) -> CliResult<ClusteringRecord> {
    ClusteringRecord::from_json(&read_text(path)?).map_err(CliError::in_file(path))
}

/// Cohort curves as sampled on the shared grid.
fn grid_curves(cohort: &Cohort) -> CliResult<Vec<SampledCurve>> {
    let grid = cohort.grid();
    Ok(cohort
        .curves()
        .iter()
        .map(|c| resample(c, grid))
        .collect::<fdaclust_core::Result<_>>()?)
}

// ---------------------------------------------------------------- init

pub fn cmd_init(ctx: &Context, force: bool) -> CliResult<PathBuf> {
    let path = ctx.out("fdaclust.toml");
    if path.exists() && !force {
        return Err(CliError::Config(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    write_text(&path, DEFAULT_CONFIG_TOML)?;
    ctx.say(format!("wrote {}", path.display()));
    Ok(path)
}

// ---------------------------------------------------------------- synth

/// Synthetic cohort of the config (seed derived from the master seed).
pub fn config_cohort_spec(config: &PipelineConfig) -> CohortSpec {
    config.cohort_spec(stage_seed(config.seed, "synth"))
}

/// Writes `cohort.csv` and `labels.csv`, plus raw measurement files when
/// `raw_per_grade > 0`.
pub fn cmd_synth(ctx: &Context, spec: Option<&Path>, raw_per_grade: usize) -> CliResult<Vec<PathBuf>> {
    let spec = match spec {
        Some(p) => {
            let s: CohortSpec = toml::from_str(&read_text(p)?)
                .map_err(|e| CliError::Config(format!("{}: {}", p.display(), e.message())))?;
            s.validate().map_err(CliError::in_file(p))?;
            s
        }
        None => config_cohort_spec(&ctx.config),
    };
    let cohort = generate_cohort(&spec)?;
    let labels = cohort.labels().expect("synthetic cohorts are labelled").to_vec();
    let mut written = write_cohort(ctx, &cohort, &labels)?;

    if raw_per_grade > 0 {
        let mut ids = Vec::new();
        let mut grades = Vec::new();
        for g in &spec.grades {
            for i in 0..raw_per_grade {
                let id = format!("m_{}_{:03}", g.grade.name().to_lowercase(), i + 1);
                let seed = stage_seed(spec.seed, &format!("raw/{id}"));
                let text = generate_raw_measurement(grade_asymmetry(g.grade), seed)?;
                let path = ctx.out(&format!("raw/{id}.csv"));
                write_text(&path, &text)?;
                written.push(path);
                ids.push(id);
                grades.push(HbGrade::from_raw(g.grade.value() as i64)?);
            }
        }
        let path = ctx.out("raw_labels.csv");
        write_text(&path, &csv_bytes(|b| write_labels_csv(&ids, &grades, b))?)?;
        written.push(path);
    }
    ctx.say(format!("synthesized {} curves into {}", cohort.len(), ctx.out_dir.display()));
    Ok(written)
}

fn write_cohort(ctx: &Context, cohort: &Cohort, labels: &[HbGrade]) -> CliResult<Vec<PathBuf>> {
    let curves = grid_curves(cohort)?;
    let cohort_path = ctx.out("cohort.csv");
    write_text(&cohort_path, &csv_bytes(|b| write_curves_csv(&curves, b))?)?;
    let labels_path = ctx.out("labels.csv");
    write_text(&labels_path, &csv_bytes(|b| write_labels_csv(&cohort.ids(), labels, b))?)?;
    Ok(vec![cohort_path, labels_path])
}

// ---------------------------------------------------------------- ingest

/// Indicator curves from every `*.csv` in `raw_dir`, registered (if enabled)
/// and sampled on the unit grid. Ids are file stems, in file-name order.
pub fn ingest_curves(raw_dir: &Path, config: &PipelineConfig) -> CliResult<Vec<SampledCurve>> {
    let entries = fs::read_dir(raw_dir).map_err(|source| CliError::Io {
        path: raw_dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InsufficientData(format!("no .csv files in {}", raw_dir.display())).into());
    }
    let name = config.indicator()?;
    let map = config.poi_map();
    let curves: Vec<SampledCurve> = files
        .par_iter()
        .map(|path| {
            let id = path.file_stem().expect("listed files have names").to_string_lossy();
            let text = read_text(path)?;
            let m = parse_measurement(&id, &text).map_err(CliError::in_file(path))?;
            let c = indicator_curve(&m, name, &map).map_err(CliError::in_file(path))?;
            Ok(c.rescaled_to_unit())
        })
        .collect::<CliResult<_>>()?;
    let grid = fdaclust_core::curve::uniform_grid(config.data.grid_size)?;
    if !config.registration.enabled {
        return Ok(curves.iter().map(|c| resample(c, &grid)).collect::<fdaclust_core::Result<_>>()?);
    }
    let warps = landmark_warps(&curves, config.registration.landmarks)?;
    Ok(curves
        .iter()
        .zip(&warps)
        .map(|(c, w)| register(c, w, &grid))
        .collect::<fdaclust_core::Result<_>>()?)
}

pub fn cmd_ingest(ctx: &Context, raw_dir: &Path) -> CliResult<PathBuf> {
    let curves = ingest_curves(raw_dir, &ctx.config)?;
    let path = ctx.out(&format!("{}.csv", ctx.config.indicator()?));
    write_text(&path, &csv_bytes(|b| write_curves_csv(&curves, b))?)?;
    ctx.say(format!("ingested {} measurements into {}", curves.len(), path.display()));
    Ok(path)
}

// ---------------------------------------------------------------- smooth / fpca

fn basis_params(config: &PipelineConfig) -> ClusterParams {
    config.params(config.cluster.routes[0])
}

pub fn cmd_smooth(ctx: &Context, cohort: &Path) -> CliResult<PathBuf> {
    let cohort = load_cohort(cohort, ctx.grid_size())?;
    let data = smooth_cohort(&cohort, &basis_params(&ctx.config))?;
    let path = ctx.out("functional.json");
    write_text(&path, &functional_to_json(&data)?)?;
    ctx.say(format!("smoothed {} curves into {}", data.len(), path.display()));
    Ok(path)
}

/// Number of components kept: the configured count or the variance threshold.
fn chosen_q(config: &PipelineConfig, model: &FpcaModel) -> CliResult<usize> {
    Ok(match config.fpca.q {
        Some(q) => q,
        None => choose_q(model, config.fpca.threshold)?,
    })
}

pub fn cmd_fpca(ctx: &Context, functional: &Path) -> CliResult<(PathBuf, PathBuf)> {
    let data = load_functional(functional)?;
    let model = fit_fpca(&data)?;
    let q = chosen_q(&ctx.config, &model)?;
    let s = scores(&data, &model, q)?;
    let model_path = ctx.out("fpca.json");
    write_text(&model_path, &model.to_json()?)?;
    let scores_path = ctx.out("scores.csv");
    write_text(&scores_path, &csv_bytes(|b| s.write_csv(b))?)?;
    ctx.say(format!("kept {q} components; wrote {} and {}", model_path.display(), scores_path.display()));
    Ok((model_path, scores_path))
}

// ---------------------------------------------------------------- cluster

/// Route input from a file: cohort CSV for grid routes, functional JSON or
/// score CSV otherwise.
fn route_input(route: Route, input: &Path, config: &PipelineConfig) -> CliResult<(Vec<String>, RouteInput)> {
    let is_json = input.extension().is_some_and(|x| x == "json");
    if route.uses_grid() {
        let cohort = load_cohort(input, config.data.grid_size)?;
        return Ok((cohort.ids(), RouteInput::Grid(cohort.grid_values()?)));
    }
    if is_json {
        let data = load_functional(input)?;
        let ids = data.iter().map(|d| d.id().to_string()).collect();
        return Ok((ids, RouteInput::Functional(data)));
    }
    if !route.uses_scores() {
        return Err(Error::MixedRepresentation(format!("route {route} needs functional data (.json)")).into());
    }
    let s = load_scores(input)?;
    Ok((s.ids.clone(), RouteInput::Scores(s.values)))
}

fn write_clustering(ctx: &Context, result: &RouteResult, ids: &[String], params: &ClusterParams, dir: &str) -> CliResult<Vec<PathBuf>> {
    let route = result.route;
    let record = ClusteringRecord::new(result, ids.to_vec(), params)?;
    let path = ctx.out(&format!("{dir}{route}.json"));
    write_text(&path, &record.to_json()?)?;
    let mut written = vec![path];
    if let Some(u) = &result.memberships {
        let path = ctx.out(&format!("{dir}{route}.memberships.csv"));
        write_text(&path, &csv_bytes(|b| write_memberships_csv(ids, u, b))?)?;
        written.push(path);
    }
    Ok(written)
}

pub fn cmd_cluster(ctx: &Context, route: Route, input: &Path) -> CliResult<Vec<PathBuf>> {
    let params = ctx.config.params(route);
    params.check_for(route)?;
    let (ids, items) = route_input(route, input, &ctx.config)?;
    let result = run_route(route, items, &params)?;
    let written = write_clustering(ctx, &result, &ids, &params, "clustering-")?;
    ctx.say(format!("{route}: cluster sizes {:?}", result.clustering.sizes()));
    Ok(written)
}

// ---------------------------------------------------------------- evaluate

pub struct EvaluateInputs<'a> {
    pub clustering: &'a Path,
    pub labels: &'a Path,
    pub cohort: &'a Path,
    /// Route feature file for the silhouette; rebuilt from the cohort if absent.
    pub features: Option<&'a Path>,
}

/// Distance in the route's own feature space.
fn feature_distance(
    record: &ClusteringRecord,
    cohort: &Cohort,
    features: Option<&Path>,
) -> CliResult<DistanceMatrix> {
    let route = record.route;
    let params = ClusterParams {
        q: record.q.or(record.params.q),
        ..record.params.clone()
    };
    Ok(match route {
        Route::TsDtw | Route::TsFuzzy => {
            let rows = match features {
                Some(p) => load_cohort(p, cohort.grid().len())?.grid_values()?,
                None => cohort.grid_values()?,
            };
            if route == Route::TsDtw {
                DistanceMatrix::dtw(&rows, params.window)?
            } else {
                DistanceMatrix::euclidean(&rows)?
            }
        }
        Route::BasisCoeff => {
            let data = match features {
                Some(p) => load_functional(p)?,
                None => smooth_cohort(cohort, &params)?,
            };
            DistanceMatrix::l2_functional(&data)?
        }
        _ => {
            let rows = match features {
                Some(p) if p.extension().is_some_and(|x| x == "json") => fpc_scores(&load_functional(p)?, &params)?.0,
                Some(p) => load_scores(p)?.values,
                None => fpc_scores(&smooth_cohort(cohort, &params)?, &params)?.0,
            };
            DistanceMatrix::euclidean(&rows)?
        }
    })
}

/// Grade map, contingency table and report for one clustering.
pub fn evaluate_clustering(
    route: &str,
    labels: &[usize],
    k: usize,
    grid_rows: &[Vec<f64>],
    clinician: &[HbGrade],
    distance: Option<&DistanceMatrix>,
) -> CliResult<(GradeMap, AnalysisReport)> {
    let ladder = AdjustedGrade::LADDER;
    let gm = eval::assign_grades(labels, k, grid_rows, &ladder)?;
    let table = eval::contingency(&gm, labels, clinician, &ladder)?;
    let sil = match distance {
        Some(d) if k >= 2 => Some(eval::silhouette(labels, k, d)?.1),
        _ => None,
    };
    let mut sizes = vec![0; k];
    for &l in labels {
        sizes[l] += 1;
    }
    let report = eval::report(route, sizes, &gm, &table, sil)?;
    Ok((gm, report))
}

fn write_report(ctx: &Context, report: &AnalysisReport, dir: &str) -> CliResult<Vec<PathBuf>> {
    let json = ctx.out(&format!("{dir}{}.json", report.route));
    write_text(&json, &report.to_json()?)?;
    let table = ctx.out(&format!("{dir}{}.contingency.csv", report.route));
    write_text(&table, &csv_bytes(|b| report.contingency.write_csv(b))?)?;
    Ok(vec![json, table])
}

pub fn cmd_evaluate(ctx: &Context, inputs: EvaluateInputs<'_>) -> CliResult<AnalysisReport> {
    let record = load_clustering(inputs.clustering)?;
    let cohort = load_cohort(inputs.cohort, ctx.grid_size())?;
    if cohort.ids() != record.ids {
        return Err(CliError::InFile {
            path: inputs.clustering.to_path_buf(),
            source: Error::SizeMismatch("clustering ids differ from the cohort's".into()),
        });
    }
    let clinician = load_labels(inputs.labels, &record.ids)?;
    let labels = record.zero_based_labels()?;
    let dist = if record.k >= 2 {
        Some(feature_distance(&record, &cohort, inputs.features)?)
    } else {
        None
    };
    let (_, report) = evaluate_clustering(
        record.route.name(),
        &labels,
        record.k,
        &cohort.grid_values()?,
        &clinician,
        dist.as_ref(),
    )?;
    write_report(ctx, &report, "report-")?;
    println!("{}", eval::text_table(std::slice::from_ref(&report)).trim_end());
    Ok(report)
}

/// Metrics of a stored contingency table (`assigned,HB1,...` CSV).
pub fn cmd_evaluate_table(ctx: &Context, table: &Path) -> CliResult<AnalysisReport> {
    let t = ContingencyTable::read_csv(read_text(table)?.as_bytes()).map_err(CliError::in_file(table))?;
    let name = table.file_stem().map_or("table".into(), |s| s.to_string_lossy().into_owned());
    let gm = GradeMap {
        grades: t.ladder.clone(),
    };
    let report = eval::report(&name, Vec::new(), &gm, &t, None)?;
    write_text(&ctx.out(&format!("report-{name}.json")), &report.to_json()?)?;
    println!("{}", eval::text_table(std::slice::from_ref(&report)).trim_end());
    Ok(report)
}

// ---------------------------------------------------------------- plot

pub fn cmd_plot(ctx: &Context, input: &Path, clustering: Option<&Path>, output: Option<&Path>) -> CliResult<PathBuf> {
    let record = clustering.map(load_clustering).transpose()?;
    let svg = if input.extension().is_some_and(|x| x == "json") {
        plot_json(ctx, input)?
    } else {
        let header = first_line(input)?;
        if header == "id,time,value" {
            let cohort = load_cohort(input, ctx.grid_size())?;
            let curves = grid_curves(&cohort)?;
            match &record {
                Some(r) => plot::clusters(&curves, &aligned_labels(r, &cohort.ids(), input)?, r.k, &[]),
                None => plot::spaghetti(&curves, &stem(input)),
            }
        } else if header.starts_with("id,u1") {
            let (ids, u) = read_memberships_csv(read_text(input)?.as_bytes()).map_err(CliError::in_file(input))?;
            plot::memberships(&ids, &u)
        } else if header.starts_with("id,pc1") {
            let s = load_scores(input)?;
            let labels = record.as_ref().map(|r| aligned_labels(r, &s.ids, input)).transpose()?;
            plot::score_matrix(&s, labels.as_deref())
        } else if header.starts_with("assigned,") {
            let t = ContingencyTable::read_csv(read_text(input)?.as_bytes()).map_err(CliError::in_file(input))?;
            plot::contingency(&t)
        } else {
            return Err(CliError::InFile {
                path: input.to_path_buf(),
                source: Error::Structure(format!("no chart for CSV header `{header}`")),
            });
        }
    };
    let path = match output {
        Some(p) => p.to_path_buf(),
        None => ctx.out(&format!("{}.svg", stem(input))),
    };
    write_text(&path, &svg)?;
    ctx.say(format!("wrote {}", path.display()));
    Ok(path)
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or("plot".into(), |s| s.to_string_lossy().into_owned())
}

fn aligned_labels(record: &ClusteringRecord, ids: &[String], input: &Path) -> CliResult<Vec<usize>> {
    if record.ids != ids {
        return Err(CliError::InFile {
            path: input.to_path_buf(),
            source: Error::SizeMismatch("clustering ids differ from the plotted items".into()),
        });
    }
    Ok(record.zero_based_labels()?)
}

fn plot_json(ctx: &Context, input: &Path) -> CliResult<String> {
    let text = read_text(input)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::in_file(input)(Error::Json(e)))?;
    if value.get("eigenvalues").is_some() {
        let model = FpcaModel::from_json(&text).map_err(CliError::in_file(input))?;
        return Ok(plot::scree(model.eigenvalues(), ctx.config.fpca.threshold));
    }
    if value.get("contingency").is_some() {
        let report = AnalysisReport::from_json(&text).map_err(CliError::in_file(input))?;
        return Ok(plot::contingency(&report.contingency));
    }
    if value.is_array() {
        let data = load_functional(input)?;
        let grid = fdaclust_core::curve::uniform_grid(ctx.grid_size())?;
        let curves = data
            .iter()
            .map(|d| SampledCurve::new(d.id(), grid.clone(), d.eval_on_grid(&grid)?))
            .collect::<fdaclust_core::Result<Vec<_>>>()?;
        return Ok(plot::spaghetti(&curves, &stem(input)));
    }
    Err(CliError::InFile {
        path: input.to_path_buf(),
        source: Error::Structure("no chart for this JSON document".into()),
    })
}

// ---------------------------------------------------------------- pipeline

pub struct PipelineOutput {
    pub reports: Vec<AnalysisReport>,
    pub written: Vec<PathBuf>,
}

/// Cohort and optional labels from the configured source.
pub fn pipeline_cohort(config: &PipelineConfig) -> CliResult<(Cohort, Option<Vec<HbGrade>>)> {
    let grid = config.data.grid_size;
    let cohort = if let Some(dir) = &config.data.raw_dir {
        Cohort::new(ingest_curves(dir, config)?, None, grid)?
    } else if let Some(path) = &config.data.cohort {
        load_cohort(path, grid)?
    } else {
        generate_cohort(&config_cohort_spec(config))?
    };
    let labels = match &config.data.labels {
        Some(path) => Some(load_labels(path, &cohort.ids())?),
        None => cohort.labels().map(<[HbGrade]>::to_vec),
    };
    Ok((cohort, labels))
}

/// Every stage from the configured data source to reports and charts.
pub fn cmd_pipeline(ctx: &Context) -> CliResult<PipelineOutput> {
    let config = &ctx.config;
    config.validate()?;
    let (cohort, labels) = pipeline_cohort(config)?;
    let ids = cohort.ids();
    let mut written = Vec::new();

    let curves = grid_curves(&cohort)?;
    let cohort_path = ctx.out("cohort.csv");
    write_text(&cohort_path, &csv_bytes(|b| write_curves_csv(&curves, b))?)?;
    written.push(cohort_path);
    if let Some(l) = &labels {
        let path = ctx.out("labels.csv");
        write_text(&path, &csv_bytes(|b| write_labels_csv(&ids, l, b))?)?;
        written.push(path);
    }

    let data = smooth_cohort(&cohort, &basis_params(config))?;
    let path = ctx.out("functional.json");
    write_text(&path, &functional_to_json(&data)?)?;
    written.push(path);

    let model = fit_fpca(&data)?;
    let q = chosen_q(config, &model)?;
    let score_matrix = scores(&data, &model, q)?;
    for (name, text) in [
        ("fpca.json", model.to_json()?),
        ("scores.csv", csv_bytes(|b| score_matrix.write_csv(b))?),
        ("plots/cohort.svg", plot::spaghetti(&curves, "cohort")),
        ("plots/scree.svg", plot::scree(model.eigenvalues(), config.fpca.threshold)),
    ] {
        let path = ctx.out(name);
        write_text(&path, &text)?;
        written.push(path);
    }
    ctx.say(format!("{} curves, {q} principal components", cohort.len()));

    let grid_rows = cohort.grid_values()?;
    let mut reports = Vec::new();
    let mut scatter_labels = None;
    for &route in &config.cluster.routes {
        let params = config.params(route);
        let input = if route.uses_grid() {
            RouteInput::Grid(grid_rows.clone())
        } else if route.uses_scores() {
            RouteInput::Scores(score_matrix.values.clone())
        } else {
            RouteInput::Functional(data.clone())
        };
        let result = run_route(route, input, &params)?;
        written.extend(write_clustering(ctx, &result, &ids, &params, "clusters/")?);
        let c = &result.clustering;
        if route.uses_scores() && scatter_labels.is_none() {
            scatter_labels = Some(c.labels.clone());
        }
        let mut names: Vec<String> = (1..=c.k).map(|i| format!("cluster {i}")).collect();
        if let Some(l) = &labels {
            let (gm, report) =
                evaluate_clustering(route.name(), &c.labels, c.k, &grid_rows, l, Some(&result.distance))?;
            names = (0..c.k).map(|i| format!("cluster {} ({})", i + 1, gm.grade(i))).collect();
            written.extend(write_report(ctx, &report, "reports/")?);
            ctx.say(format!("{route}: ccr {:.4}, approx ccr {:.4}", report.ccr, report.approx_ccr));
            reports.push(report);
        } else {
            ctx.say(format!("{route}: cluster sizes {:?}", c.sizes()));
        }
        let path = ctx.out(&format!("plots/{route}.clusters.svg"));
        write_text(&path, &plot::clusters(&curves, &c.labels, c.k, &names))?;
        written.push(path);
        if let Some(u) = &result.memberships {
            let path = ctx.out(&format!("plots/{route}.memberships.svg"));
            write_text(&path, &plot::memberships(&ids, u))?;
            written.push(path);
        }
    }
    let path = ctx.out("plots/scores.svg");
    write_text(&path, &plot::score_matrix(&score_matrix, scatter_labels.as_deref()))?;
    written.push(path);

    if !reports.is_empty() {
        let path = ctx.out("report.json");
        write_text(&path, &(serde_json::to_string_pretty(&reports).map_err(Error::Json)? + "\n"))?;
        written.push(path);
        let path = ctx.out("report.txt");
        write_text(&path, &eval::text_table(&reports))?;
        written.push(path);
    }
    Ok(PipelineOutput { reports, written })
}
