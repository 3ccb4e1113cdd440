//! Select, classify and evaluate every requested method on one dataset, and
//! render the per-method reports and the comparison table.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::cube::{load_cube, load_gt};
use super::map::{decode_estimated_gt, export_map, scatter};
use crate::classify::{
    evaluate_with_classes, extract_features, knn_predict, predict, stratified_split, train_svm,
    Classifier, EvalReport, SplitPlan,
};
use crate::datamodel::{quantize_cube, GroundTruth, HyperCube, LabeledData, QuantizedCube};
use crate::error::{Error, Result};
use crate::selection::{
    estimated_gt, relevance_of, select_with_relevance, Method, SelectionResult,
};

/// A loaded, quantized dataset with its relevance scores.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub cube: HyperCube,
    pub gt: GroundTruth,
    pub qcube: QuantizedCube,
    pub data: LabeledData,
    pub relevance: Vec<f64>,
}

impl Dataset {
    pub fn load(config: &RunConfig) -> Result<Self> {
        let cube = load_cube(&config.cube, &config.raw_path())?;
        let gt = load_gt(&config.gt, cube.rows(), cube.cols())?;
        Self::from_parts(cube, gt, config.levels)
    }

    pub fn from_parts(cube: HyperCube, gt: GroundTruth, levels: usize) -> Result<Self> {
        gt.matches(&cube)?;
        gt.validate()?;
        let qcube = quantize_cube(&cube, levels)?;
        let data = LabeledData::new(&qcube, &gt)?;
        let relevance = relevance_of(&data);
        Ok(Self {
            cube,
            gt,
            qcube,
            data,
            relevance,
        })
    }

    pub fn select(&self, method: Method, config: &RunConfig) -> Result<SelectionResult> {
        select_with_relevance(
            &self.data,
            self.relevance.clone(),
            method,
            config.k,
            &config.selection_params(),
        )
    }

    /// Estimated GT of `bands`, decoded to classes and laid out on the grid.
    pub fn estimated_map(&self, bands: &[usize]) -> Result<Vec<u32>> {
        let est = estimated_gt(&self.data, bands)?;
        let decoded = decode_estimated_gt(&self.data, &est)?;
        scatter(&self.data, &decoded, self.gt.rows(), self.gt.cols())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub eval: EvalReport,
    /// RBF width actually used; `None` for 1-NN.
    pub gamma: Option<f64>,
}

/// Trains on the split's training pixels using `bands` and scores the test
/// pixels. Features are taken in ascending band order so the outcome does
/// not depend on the order bands were selected in.
pub fn classify_bands(
    dataset: &Dataset,
    split: &SplitPlan,
    bands: &[usize],
    config: &RunConfig,
) -> Result<Classification> {
    let mut bands = bands.to_vec();
    bands.sort_unstable();
    bands.dedup();
    let train = split.train();
    let test = split.test();
    let labels = dataset.gt.labels();
    let train_y: Vec<u32> = train.iter().map(|&p| labels[p]).collect();
    let test_y: Vec<u32> = test.iter().map(|&p| labels[p]).collect();
    let train_x = extract_features(&dataset.qcube, &bands, &train)?;
    let test_x = extract_features(&dataset.qcube, &bands, &test)?;
    let (predicted, gamma) = match config.classifier {
        Classifier::Knn => (knn_predict(&train_x, &train_y, &test_x)?, None),
        Classifier::Svm => {
            let params = config.svm_params();
            let model = train_svm(&train_x, &train_y, &params)?;
            (predict(&model, &test_x)?, Some(model.gamma))
        }
    };
    let eval = evaluate_with_classes(&predicted, &test_y, &dataset.gt.classes())?;
    Ok(Classification { eval, gamma })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub selection: SelectionResult,
    pub classification: Classification,
    /// Decoded estimated-GT class map on the full grid.
    pub map: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub method: Method,
    pub result: std::result::Result<MethodRun, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOutcome {
    pub config: RunConfig,
    pub rows: usize,
    pub cols: usize,
    pub bands_total: usize,
    pub labeled_pixels: usize,
    pub train_pixels: usize,
    pub test_pixels: usize,
    pub classes: Vec<u32>,
    pub methods: Vec<MethodOutcome>,
}

fn run_method(
    dataset: &Dataset,
    split: &SplitPlan,
    method: Method,
    config: &RunConfig,
) -> Result<MethodRun> {
    let selection = dataset.select(method, config)?;
    let classification = classify_bands(dataset, split, &selection.selected, config)?;
    let map = dataset.estimated_map(&selection.selected)?;
    Ok(MethodRun {
        selection,
        classification,
        map,
    })
}

pub fn run_compare(config: &RunConfig) -> Result<CompareOutcome> {
    config.validate()?;
    let dataset = Dataset::load(config)?;
    compare_on(&dataset, config)
}

/// [`run_compare`] on an already loaded dataset. `config.levels` must match
/// the dataset's quantization.
pub fn compare_on(dataset: &Dataset, config: &RunConfig) -> Result<CompareOutcome> {
    config.validate()?;
    if dataset.qcube.levels() != config.levels {
        return Err(Error::Config(format!(
            "dataset quantized to {} levels, config asks for {}",
            dataset.qcube.levels(),
            config.levels
        )));
    }
    let bands_total = dataset.cube.bands();
    if config.k > bands_total {
        return Err(Error::Config(format!(
            "k = {} exceeds the {bands_total} available bands",
            config.k
        )));
    }
    let split = stratified_split(&dataset.gt, config.train_fraction, config.seed)?;
    let methods = config
        .methods
        .par_iter()
        .map(|&method| MethodOutcome {
            method,
            result: run_method(dataset, &split, method, config).map_err(|e| e.to_string()),
        })
        .collect();
    Ok(CompareOutcome {
        config: config.clone(),
        rows: dataset.gt.rows(),
        cols: dataset.gt.cols(),
        bands_total,
        labeled_pixels: dataset.data.len(),
        train_pixels: split.train().len(),
        test_pixels: split.test().len(),
        classes: dataset.gt.classes(),
        methods,
    })
}

#[derive(Serialize, Deserialize)]
struct ReportHeader {
    method: Method,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    bands_total: usize,
    labeled_pixels: usize,
    train_pixels: usize,
    test_pixels: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    selected: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    step_scores: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    svm_gamma_used: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    overall_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_agreement: Option<f64>,
    config: RunConfig,
}

/// Marks the start of a table block in a report.
pub const TABLE_MARKER: &str = "%% ";

fn percent(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

impl CompareOutcome {
    pub fn any_failed(&self) -> bool {
        self.methods.iter().any(|m| m.result.is_err())
    }

    /// Key/value header (TOML, with the run config as its `[config]` table)
    /// followed by per-class and confusion tables.
    pub fn report(&self, outcome: &MethodOutcome) -> String {
        let run = outcome.result.as_ref().ok();
        let header = ReportHeader {
            method: outcome.method,
            status: if run.is_some() { "ok" } else { "failed" }.into(),
            error: outcome.result.as_ref().err().cloned(),
            bands_total: self.bands_total,
            labeled_pixels: self.labeled_pixels,
            train_pixels: self.train_pixels,
            test_pixels: self.test_pixels,
            selected: run.map(|r| r.selection.selected.clone()),
            step_scores: run.map(|r| r.selection.step_scores.clone()),
            svm_gamma_used: run.and_then(|r| r.classification.gamma),
            overall_accuracy: run.map(|r| r.classification.eval.overall_accuracy),
            kappa: run.map(|r| r.classification.eval.kappa),
            expected_agreement: run.map(|r| r.classification.eval.expected_agreement),
            config: self.config.clone(),
        };
        let mut out = toml::to_string(&header).expect("report header serializes");
        let Some(run) = run else {
            return out;
        };
        let eval = &run.classification.eval;
        let cm = &eval.confusion;
        out.push('\n');
        writeln!(out, "{TABLE_MARKER}per_class").unwrap();
        out.push_str("class\tname\ttest_pixels\taccuracy\n");
        for (i, &class) in cm.classes().iter().enumerate() {
            let acc = eval.per_class[i].map_or_else(|| "n/a".to_string(), |a| format!("{a:.6}"));
            writeln!(
                out,
                "{class}\t{}\t{}\t{acc}",
                self.config.class_name(class),
                cm.row_sum(i)
            )
            .unwrap();
        }
        writeln!(out, "{TABLE_MARKER}confusion rows=truth cols=predicted").unwrap();
        out.push_str("truth");
        for &class in cm.classes() {
            write!(out, "\t{class}").unwrap();
        }
        out.push('\n');
        for (i, &class) in cm.classes().iter().enumerate() {
            write!(out, "{class}").unwrap();
            for j in 0..cm.classes().len() {
                write!(out, "\t{}", cm.get(i, j)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parameter block, then one row per class and the Kappa/OA footer, one
    /// column per method, accuracies in percent.
    pub fn table(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        out.push_str("# parameters\n");
        writeln!(out, "levels = {}", c.levels).unwrap();
        writeln!(out, "k = {}", c.k).unwrap();
        writeln!(out, "beta = {}", c.beta).unwrap();
        writeln!(out, "threshold = {}", c.threshold).unwrap();
        writeln!(out, "lambda = {}", c.lambda).unwrap();
        writeln!(out, "classifier = {}", c.classifier).unwrap();
        if c.classifier == Classifier::Svm {
            writeln!(out, "svm_c = {}", c.svm_c).unwrap();
            match c.svm_gamma {
                Some(g) => writeln!(out, "svm_gamma = {g}").unwrap(),
                None => writeln!(out, "svm_gamma = {} (1/k)", 1.0 / c.k as f64).unwrap(),
            }
            writeln!(out, "svm_tol = {}", c.svm_tol).unwrap();
        }
        writeln!(out, "train_fraction = {}", c.train_fraction).unwrap();
        writeln!(out, "seed = {}", c.seed).unwrap();
        writeln!(out, "bands_total = {}", self.bands_total).unwrap();
        writeln!(out, "labeled_pixels = {}", self.labeled_pixels).unwrap();
        for m in &self.methods {
            if let Err(e) = &m.result {
                writeln!(out, "# {} failed: {e}", m.method).unwrap();
            }
        }
        out.push('\n');

        out.push_str("Class");
        for m in &self.methods {
            write!(out, "\t{}", m.method).unwrap();
        }
        out.push('\n');
        let cell = |m: &MethodOutcome, f: &dyn Fn(&EvalReport) -> Option<f64>| match &m.result {
            Ok(run) => f(&run.classification.eval).map_or_else(|| "n/a".into(), percent),
            Err(_) => "failed".to_string(),
        };
        for (i, &class) in self.classes.iter().enumerate() {
            out.push_str(&c.class_name(class));
            for m in &self.methods {
                write!(out, "\t{}", cell(m, &|e| e.per_class[i])).unwrap();
            }
            out.push('\n');
        }
        out.push_str("Kappa(%)");
        for m in &self.methods {
            write!(out, "\t{}", cell(m, &|e| Some(e.kappa))).unwrap();
        }
        out.push_str("\nOA(%)");
        for m in &self.methods {
            write!(out, "\t{}", cell(m, &|e| Some(e.overall_accuracy))).unwrap();
        }
        out.push('\n');
        out
    }

    /// Writes `<method>.report.txt`, `<method>.map.ppm` and `comparison.txt`
    /// into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for m in &self.methods {
            let name = m.method.name();
            let path = dir.join(format!("{name}.report.txt"));
            fs::write(&path, self.report(m)).map_err(|e| Error::io(&path, e))?;
            if let Ok(run) = &m.result {
                export_map(
                    &run.map,
                    self.rows,
                    self.cols,
                    &dir.join(format!("{name}.map.ppm")),
                )?;
            }
        }
        let path = dir.join("comparison.txt");
        fs::write(&path, self.table()).map_err(|e| Error::io(&path, e))
    }
}

/// Recovers the run config embedded in a report.
pub fn config_from_report(text: &str) -> Result<RunConfig> {
    let head = match text.find(&format!("\n{TABLE_MARKER}")) {
        Some(i) => &text[..i],
        None => text,
    };
    let value: toml::Table =
        toml::from_str(head).map_err(|e| Error::Config(format!("malformed report: {e}")))?;
    let config = value
        .get("config")
        .cloned()
        .ok_or_else(|| Error::Config("report has no [config] table".into()))?;
    let config: RunConfig = config
        .try_into()
        .map_err(|e| Error::Config(format!("report config: {e}")))?;
    config.validate()?;
    Ok(config)
}
