//! Command-line front end: configuration layering, dataset loading, and the
//! characterize / encode / extract / train / evaluate / cost pipelines.
//!
//! Every run resolves a [`RunConfig`] with the precedence CLI flag > config
//! file > built-in default, and every output file starts with a header
//! carrying the FNV-1a hash of that resolved configuration plus the seed, so
//! reruns are checkable byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::costmodel::{self, Catalog, BASE_CHANNELS, BASE_WINDOW_SECONDS};
use crate::device::{self, DeviceParams, DeviceState, VoltageInterval};
use crate::eegdata::{
    self, label_windows, parse_annotations, parse_csv, parse_edf, synthesize, Label, LabeledWindow,
    PatientData, Recording, SyntheticProfile, DEFAULT_HORIZON, INTERICTAL_MARGIN,
};
use crate::error::{Error, Result};
use crate::features::{accumulate_rounds, extract_features, CorrelationMap};
use crate::predictor::{
    self, classify, deploy, train, AlarmConfig, PredictionMetrics, ScoredWindow, TrainConfig,
};
use crate::waveform::{
    calibrate_thresholds, encode_window, EncodingConfig, DEFAULT_PULSE_AMPLITUDE,
};

/// Cutoff of the preprocessing low-pass applied to recorded data (Hz).
const LOWPASS_CUTOFF_HZ: f64 = 50.0;

#[derive(Parser, Debug)]
#[command(
    name = "eegcim",
    version,
    about = "Behavioral simulator of an RRAM computing-in-memory EEG correlation extractor and seizure predictor"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit device characterization tables: I-V sweep, pulse-train response,
    /// and the pulse-overlap curve.
    Characterize(CommonArgs),
    /// Encode labeled windows into pulse trains.
    Encode(CommonArgs),
    /// Extract per-window correlation maps through the crossbar simulation.
    Extract(CommonArgs),
    /// Train the predictor on all labeled windows of each patient.
    Train(CommonArgs),
    /// Leave-one-seizure-out training and event-level evaluation.
    Evaluate(CommonArgs),
    /// Roll up the hardware cost catalog.
    Cost(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Characterize(a)
            | Command::Encode(a)
            | Command::Extract(a)
            | Command::Train(a)
            | Command::Evaluate(a)
            | Command::Cost(a) => a,
        }
    }
}

/// Flags shared by every subcommand. Any of these may also appear as a
/// `key = value` line in the `--config` file; the flag wins.
#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Key-value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset: `synthetic`, a CSV file, or a CHB-MIT-style directory.
    #[arg(long)]
    pub data: Option<String>,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for every stochastic path.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated patient ids to keep (default: all).
    #[arg(long)]
    pub patients: Option<String>,
    /// Preictal horizon in minutes.
    #[arg(long = "horizon-min")]
    pub horizon_min: Option<f64>,
    /// Encoding slot width in nanoseconds.
    #[arg(long = "slot-ns")]
    pub slot_ns: Option<f64>,
    /// Threshold half-width in standard deviations.
    #[arg(long = "k-sigma")]
    pub k_sigma: Option<f64>,
    /// Weight bit width for quantized deployment.
    #[arg(long)]
    pub bits: Option<u32>,
    /// Hardware catalog CSV for the cost subcommand.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Channel count for cost scaling.
    #[arg(long)]
    pub channels: Option<usize>,
}

/// Fully resolved run configuration. Defaults: `data = synthetic`,
/// `out = out`, `seed = 1`, all patients, 30 min horizon, 40 ns slots,
/// `k_sigma = 1`, 8-bit weights, built-in catalog, 18 channels.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data: String,
    pub out: PathBuf,
    pub seed: u64,
    pub patients: Vec<String>,
    pub horizon_min: f64,
    pub slot_ns: f64,
    pub k_sigma: f64,
    pub bits: u32,
    pub catalog: Option<PathBuf>,
    pub channels: usize,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => parse_config_file(&fs::read_to_string(path)?)?,
            None => BTreeMap::new(),
        };
        for key in file.keys() {
            const KNOWN: [&str; 10] = [
                "data", "out", "seed", "patients", "horizon_min", "slot_ns", "k_sigma", "bits",
                "catalog", "channels",
            ];
            if !KNOWN.contains(&key.as_str()) {
                return Err(Error::InvalidParam(format!("unknown config key {key:?}")));
            }
        }
        let pick = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).cloned());
        let num = |text: Option<String>, key: &str, default: f64| -> Result<f64> {
            match text {
                Some(t) => t
                    .parse()
                    .map_err(|_| Error::InvalidParam(format!("bad value {t:?} for {key}"))),
                None => Ok(default),
            }
        };
        let cfg = RunConfig {
            data: pick(args.data.clone(), "data").unwrap_or_else(|| "synthetic".into()),
            out: pick(args.out.as_ref().map(|p| p.display().to_string()), "out")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("out")),
            seed: num(pick(args.seed.map(|s| s.to_string()), "seed"), "seed", 1.0)? as u64,
            patients: pick(args.patients.clone(), "patients")
                .map(|p| p.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
                .unwrap_or_default(),
            horizon_min: num(
                pick(args.horizon_min.map(|v| v.to_string()), "horizon_min"),
                "horizon_min",
                DEFAULT_HORIZON / 60.0,
            )?,
            slot_ns: num(pick(args.slot_ns.map(|v| v.to_string()), "slot_ns"), "slot_ns", 40.0)?,
            k_sigma: num(pick(args.k_sigma.map(|v| v.to_string()), "k_sigma"), "k_sigma", 1.0)?,
            bits: num(pick(args.bits.map(|v| v.to_string()), "bits"), "bits", 8.0)? as u32,
            catalog: pick(
                args.catalog.as_ref().map(|p| p.display().to_string()),
                "catalog",
            )
            .map(PathBuf::from),
            channels: num(
                pick(args.channels.map(|v| v.to_string()), "channels"),
                "channels",
                BASE_CHANNELS as f64,
            )? as usize,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.horizon_min <= 0.0 {
            return Err(Error::InvalidParam("horizon_min must be positive".into()));
        }
        if self.slot_ns <= 0.0 {
            return Err(Error::InvalidParam("slot_ns must be positive".into()));
        }
        if self.k_sigma <= 0.0 {
            return Err(Error::InvalidParam("k_sigma must be positive".into()));
        }
        if self.bits == 0 || self.bits > 32 {
            return Err(Error::InvalidParam("bits must lie in 1..=32".into()));
        }
        if self.channels == 0 {
            return Err(Error::InvalidParam("channels must be positive".into()));
        }
        Ok(())
    }

    pub fn horizon_sec(&self) -> f64 {
        self.horizon_min * 60.0
    }

    pub fn slot_width(&self) -> f64 {
        self.slot_ns * 1e-9
    }

    /// Canonical text rendering, the input of the config hash.
    pub fn canonical(&self) -> String {
        format!(
            "data={}\nout={}\nseed={}\npatients={}\nhorizon_min={}\nslot_ns={}\nk_sigma={}\nbits={}\ncatalog={}\nchannels={}\n",
            self.data,
            self.out.display(),
            self.seed,
            self.patients.join(","),
            self.horizon_min,
            self.slot_ns,
            self.k_sigma,
            self.bits,
            self.catalog.as_ref().map_or(String::new(), |p| p.display().to_string()),
            self.channels
        )
    }

    /// FNV-1a hash of the resolved configuration; stable across runs and
    /// platforms, unlike the std hasher.
    pub fn hash(&self) -> u64 {
        fnv1a(self.canonical().as_bytes())
    }

    /// Header line prepended to every output file.
    fn header(&self) -> String {
        format!("# eegcim config={:016x} seed={}\n", self.hash(), self.seed)
    }
}

fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(idx + 1, format!("expected `key = value`, got {line:?}")))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives a named sub-seed so every stochastic stage draws from its own
/// stream of the run seed.
pub fn sub_seed(seed: u64, name: &str) -> u64 {
    fnv1a(format!("{seed}/{name}").as_bytes())
}

/// Maps an error onto the documented exit codes: 1 usage, 2 data, 3 internal.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParam(_) => 1,
        Error::Parse { .. } | Error::Data(_) | Error::Io(_) => 2,
        Error::DimensionMismatch(_) => 3,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = RunConfig::resolve(cli.command.args())?;
    fs::create_dir_all(&cfg.out)?;
    match cli.command {
        Command::Characterize(_) => cmd_characterize(&cfg),
        Command::Encode(_) => cmd_encode(&cfg),
        Command::Extract(_) => cmd_extract(&cfg),
        Command::Train(_) => cmd_train(&cfg),
        Command::Evaluate(_) => cmd_evaluate(&cfg),
        Command::Cost(_) => cmd_cost(&cfg),
    }
}

fn write_report(cfg: &RunConfig, rel: &str, body: &str) -> Result<PathBuf> {
    let path = cfg.out.join(rel);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(&path, format!("{}{body}", cfg.header()))?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// characterize

fn cmd_characterize(cfg: &RunConfig) -> Result<()> {
    let params = DeviceParams::default();
    params.validate()?;

    // static I-V curve at w = 0 and a potentiating staircase sweep
    let mut iv = String::from("voltage_v,static_current_a,staircase_current_a,staircase_w\n");
    let static_sweep = device::iv_sweep(&params, -1.5, 1.5, 121, 0.0)?;
    let staircase = device::iv_sweep(&params, -1.5, 1.5, 121, 1e-6)?;
    for ((v, i_static, _), (_, i_stair, w)) in static_sweep.iter().zip(&staircase) {
        iv.push_str(&format!("{v:.6e},{i_static:.6e},{i_stair:.6e},{w:.6e}\n"));
    }
    write_report(cfg, "characterize/iv_sweep.csv", &iv)?;

    // cumulative pulse response at the programming and half-select amplitudes
    let width = 500e-9;
    let mut pulses = String::from("pulse,w_160,g_160_s,w_080,g_080_s\n");
    let mut hot = DeviceState::default();
    let mut cold = DeviceState::default();
    for k in 1..=100 {
        hot = device::step(hot, &params, VoltageInterval { voltage: 1.6, duration: width });
        cold = device::step(cold, &params, VoltageInterval { voltage: 0.8, duration: width });
        pulses.push_str(&format!(
            "{k},{:.6e},{:.6e},{:.6e},{:.6e}\n",
            hot.w(),
            device::conductance(hot, &params),
            cold.w(),
            device::conductance(cold, &params)
        ));
    }
    write_report(cfg, "characterize/pulse_response.csv", &pulses)?;

    // conductance change vs pre/post pulse offset
    let mut overlap = String::from("dt_ns,delta_g_s\n");
    let mut dt = -500.0f64;
    while dt <= 500.0 {
        let dg = device::overlap_response(&params, width, DEFAULT_PULSE_AMPLITUDE, dt * 1e-9);
        overlap.push_str(&format!("{dt:.0},{dg:.6e}\n"));
        dt += 10.0;
    }
    write_report(cfg, "characterize/overlap.csv", &overlap)?;

    let dw = |v: f64| params.lambda * (params.eta * v).sinh() * width;
    let dg0 = device::overlap_response(&params, width, DEFAULT_PULSE_AMPLITUDE, 0.0);
    let dg500 = device::overlap_response(&params, width, DEFAULT_PULSE_AMPLITUDE, width);
    let summary = format!(
        "per_pulse_dw_1.6V {:.4e}\nper_pulse_dw_0.8V {:.4e}\ndisturb_ratio {:.1}\noverlap_dg_dt0_s {:.4e}\noverlap_dg_dt500_s {:.4e}\noverlap_ratio {:.1}\n",
        dw(1.6),
        dw(0.8),
        dw(1.6) / dw(0.8),
        dg0,
        dg500,
        dg0 / dg500
    );
    write_report(cfg, "characterize/summary.txt", &summary)?;
    print!("{summary}");
    Ok(())
}

// ---------------------------------------------------------------------------
// dataset loading

/// Loaded dataset plus whether the corpus selection rule applies (it only
/// does for recorded corpora; synthetic patients are built to be usable).
struct Dataset {
    patients: Vec<PatientData>,
    apply_selection: bool,
}

fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    if cfg.data == "synthetic" {
        return Ok(Dataset { patients: synthetic_patients(cfg), apply_selection: false });
    }
    let path = Path::new(&cfg.data);
    if !path.exists() {
        return Err(Error::Data(format!("data path {} does not exist", path.display())));
    }
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        let stem = path.file_stem().map_or("csv".to_string(), |s| s.to_string_lossy().into_owned());
        let rec = parse_csv(&text, &stem)?.filter_lowpass(LOWPASS_CUTOFF_HZ)?;
        return Ok(Dataset {
            patients: vec![PatientData { id: stem, recordings: vec![rec] }],
            apply_selection: false,
        });
    }
    let mut patients = load_edf_corpus(path)?;
    if !cfg.patients.is_empty() {
        patients.retain(|p| cfg.patients.contains(&p.id));
    }
    if patients.is_empty() {
        return Err(Error::Data(format!("no patients found under {}", path.display())));
    }
    Ok(Dataset { patients, apply_selection: true })
}

/// Loads a CHB-MIT-style directory: one subdirectory per patient holding EDF
/// files plus a `*-summary.txt` annotation file. Files are placed
/// back to back on the patient timeline in name order.
fn load_edf_corpus(root: &Path) -> Result<Vec<PatientData>> {
    let mut patients = Vec::new();
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    for dir in dirs {
        let id = dir.file_name().map_or(String::new(), |n| n.to_string_lossy().into_owned());
        let mut entries: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        let mut annotations = eegdata::FileAnnotations::new();
        for entry in &entries {
            if entry.file_name().is_some_and(|n| n.to_string_lossy().ends_with("-summary.txt")) {
                annotations = parse_annotations(&fs::read_to_string(entry)?)?;
            }
        }
        let mut recordings = Vec::new();
        let mut offset = 0.0;
        for entry in &entries {
            if entry.extension().is_none_or(|e| e != "edf") {
                continue;
            }
            let name = entry.file_name().map_or(String::new(), |n| n.to_string_lossy().into_owned());
            let edf = parse_edf(&fs::read(entry)?)?;
            let sampling_rate = edf.sampling_rate(0);
            let rec = Recording {
                patient_id: id.clone(),
                channels: edf.signals.iter().map(|s| s.label.clone()).collect(),
                sampling_rate,
                samples: edf.signals.into_iter().map(|s| s.samples).collect(),
                seizures: annotations.get(&name).cloned().unwrap_or_default(),
                start_offset_sec: offset,
                source: name,
            };
            let rec = rec.select_paper_channels()?.filter_lowpass(LOWPASS_CUTOFF_HZ)?;
            offset += rec.duration_sec();
            recordings.push(rec);
        }
        if !recordings.is_empty() {
            patients.push(PatientData { id, recordings });
        }
    }
    Ok(patients)
}

/// Builds the deterministic synthetic corpus: two patients, three seizures
/// each, low baseline correlation and an elevated-correlation preictal
/// regime, plus three clean interictal recordings per patient placed well
/// outside the four-hour margin.
fn synthetic_patients(cfg: &RunConfig) -> Vec<PatientData> {
    let horizon = cfg.horizon_sec();
    let onsets = [20_000.0, 50_000.0, 80_000.0];
    (0..2u8)
        .map(|p| {
            let id = format!("synth{}", (b'A' + p) as char);
            let mut recordings = Vec::new();
            for (k, onset) in onsets.iter().enumerate() {
                let profile = SyntheticProfile {
                    duration_sec: horizon + 90.0,
                    rho: 0.05,
                    preictal_rho: 0.45,
                    seizure_onsets: vec![horizon + 30.0],
                    seizure_len_sec: 30.0,
                    preictal_span_sec: horizon,
                    ..SyntheticProfile::default()
                };
                let mut rec = synthesize(&profile, sub_seed(cfg.seed, &format!("{id}/sz{k}")));
                rec.patient_id = id.clone();
                rec.start_offset_sec = onset - horizon - 30.0;
                rec.source = format!("synthetic:{id}:sz{k}");
                recordings.push(rec);
            }
            let mut t0 = onsets[2] + 30.0 + INTERICTAL_MARGIN + 600.0;
            for k in 0..3 {
                let profile = SyntheticProfile {
                    duration_sec: horizon,
                    rho: 0.05,
                    preictal_rho: 0.05,
                    ..SyntheticProfile::default()
                };
                let mut rec = synthesize(&profile, sub_seed(cfg.seed, &format!("{id}/bg{k}")));
                rec.patient_id = id.clone();
                rec.start_offset_sec = t0;
                rec.source = format!("synthetic:{id}:bg{k}");
                t0 += horizon + 60.0;
                recordings.push(rec);
            }
            PatientData { id, recordings }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// encoding and extraction helpers

/// Per-fold threshold calibration at the configured slot shape.
fn thresholds_for(cfg: &RunConfig, windows: &[&LabeledWindow]) -> Result<Vec<EncodingConfig<f64>>> {
    let pooled: Vec<Vec<Vec<f64>>> = windows.iter().map(|w| w.samples.clone()).collect();
    let base = calibrate_thresholds(&pooled, cfg.k_sigma)?;
    base.into_iter()
        .map(|c| {
            EncodingConfig::with_shape(c.v_pth, c.v_nth, DEFAULT_PULSE_AMPLITUDE, cfg.slot_width())
        })
        .collect()
}

/// Presentations of each window's pulse trains during extraction. A single
/// pass changes `w` by only ~1e-3, which would leave the conductance contrast
/// below the compute ADC's resolution; repeating the train accumulates the
/// change linearly into a usable range.
const EXTRACTION_ROUNDS: usize = 150;

/// Extracts maps for a window set in parallel, preserving input order.
fn parallel_maps(
    windows: &[&LabeledWindow],
    cfgs: &[EncodingConfig<f64>],
    params: &DeviceParams<f64>,
    hash: u64,
) -> Result<Vec<CorrelationMap<f64>>> {
    if windows.is_empty() {
        return Ok(Vec::new());
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(windows.len());
    let chunk = windows.len().div_ceil(workers);
    let mut out: Vec<Result<Vec<CorrelationMap<f64>>>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = windows
            .chunks(chunk)
            .map(|slice| {
                scope.spawn(move || {
                    slice
                        .iter()
                        .map(|w| {
                            let map = extract_features(w, cfgs, params, hash)?;
                            accumulate_rounds(&map, params, EXTRACTION_ROUNDS)
                        })
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        for h in handles {
            out.push(h.join().expect("extraction worker panicked"));
        }
    });
    let mut maps = Vec::with_capacity(windows.len());
    for part in out {
        maps.extend(part?);
    }
    Ok(maps)
}

fn labeled_windows(cfg: &RunConfig, patient: &PatientData) -> Result<Vec<LabeledWindow>> {
    label_windows(&patient.recordings, cfg.horizon_sec())
}

fn window_file_stem(w: &LabeledWindow) -> String {
    format!("{}-{:.0}", w.patient_id, w.window_start)
}

// ---------------------------------------------------------------------------
// encode

fn cmd_encode(cfg: &RunConfig) -> Result<()> {
    let dataset = load_dataset(cfg)?;
    let mut index = String::from("patient window_start label pos_pulses neg_pulses\n");
    for patient in &dataset.patients {
        let windows = labeled_windows(cfg, patient)?;
        if windows.is_empty() {
            println!("patient {}: no labelable windows, skipped", patient.id);
            continue;
        }
        let refs: Vec<&LabeledWindow> = windows.iter().collect();
        let cfgs = thresholds_for(cfg, &refs)?;
        for w in &windows {
            let channels: Vec<Vec<f64>> = w.samples.clone();
            let trains = encode_window(&channels, &cfgs)?;
            let pos: usize = trains.iter().map(|(p, _)| p.count_ones()).sum();
            let neg: usize = trains.iter().map(|(_, n)| n.count_ones()).sum();
            index.push_str(&format!(
                "{} {} {:?} {pos} {neg}\n",
                w.patient_id, w.window_start, w.label
            ));
            let mut blob = cfg.header().into_bytes();
            for (p, n) in &trains {
                blob.extend_from_slice(&p.to_bytes());
                blob.extend_from_slice(&n.to_bytes());
            }
            let path = cfg.out.join("trains").join(format!("{}.bin", window_file_stem(w)));
            fs::create_dir_all(path.parent().unwrap())?;
            fs::write(path, blob)?;
        }
    }
    let path = write_report(cfg, "encode_index.txt", &index)?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// extract

fn cmd_extract(cfg: &RunConfig) -> Result<()> {
    let dataset = load_dataset(cfg)?;
    let params = DeviceParams::default();
    let hash = cfg.hash();
    let mut index = String::from("patient window_start label map_file\n");
    for patient in &dataset.patients {
        let windows = labeled_windows(cfg, patient)?;
        if windows.is_empty() {
            println!("patient {}: no labelable windows, skipped", patient.id);
            continue;
        }
        let refs: Vec<&LabeledWindow> = windows.iter().collect();
        let cfgs = thresholds_for(cfg, &refs)?;
        let maps = parallel_maps(&refs, &cfgs, &params, hash)?;
        for (w, map) in windows.iter().zip(&maps) {
            let rel = format!("maps/{}.txt", window_file_stem(w));
            write_report(cfg, &rel, &map.to_text())?;
            index.push_str(&format!("{} {} {:?} {rel}\n", w.patient_id, w.window_start, w.label));
        }
    }
    let path = write_report(cfg, "extract_index.txt", &index)?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// train

fn cmd_train(cfg: &RunConfig) -> Result<()> {
    let dataset = load_dataset(cfg)?;
    let params = DeviceParams::default();
    let hash = cfg.hash();
    let train_cfg = TrainConfig { bit_width: cfg.bits, ..TrainConfig::default() };
    for patient in &dataset.patients {
        let windows = labeled_windows(cfg, patient)?;
        let refs: Vec<&LabeledWindow> = windows.iter().collect();
        if !has_both_classes(&refs) {
            println!("patient {}: fewer than two classes present, skipped", patient.id);
            continue;
        }
        let cfgs = thresholds_for(cfg, &refs)?;
        let maps = parallel_maps(&refs, &cfgs, &params, hash)?;
        let examples: Vec<(CorrelationMap<f64>, Label)> =
            maps.into_iter().zip(refs.iter().map(|w| w.label)).collect();
        let seed = sub_seed(cfg.seed, &format!("train/{}", patient.id));
        let weights = train(&examples, &params, &train_cfg, seed)?;
        let model = deploy(&weights, &params)?;
        let rel = format!("weights/{}.txt", patient.id);
        let path = cfg.out.join(&rel);
        fs::create_dir_all(path.parent().unwrap())?;
        fs::write(&path, weights.to_text(seed, hash))?;
        println!(
            "patient {}: trained on {} windows, quantization max |err| {:.3e}, wrote {}",
            patient.id,
            examples.len(),
            model.quant.max_abs_error,
            path.display()
        );
    }
    Ok(())
}

fn has_both_classes(windows: &[&LabeledWindow]) -> bool {
    windows.iter().any(|w| w.label == Label::Preictal)
        && windows.iter().any(|w| w.label == Label::Interictal)
}

// ---------------------------------------------------------------------------
// evaluate

fn cmd_evaluate(cfg: &RunConfig) -> Result<()> {
    let dataset = load_dataset(cfg)?;
    let selected: Vec<String> = if dataset.apply_selection {
        eegdata::select_patients(&dataset.patients)
    } else {
        dataset.patients.iter().map(|p| p.id.clone()).collect()
    };
    let params = DeviceParams::default();
    let mut per_patient = Vec::new();
    for patient in &dataset.patients {
        if !selected.contains(&patient.id) {
            println!(
                "patient {}: fails the selection rule (needs 2 seizures and 3 h interictal), skipped",
                patient.id
            );
            continue;
        }
        match evaluate_patient(cfg, patient, &params)? {
            Some(m) => per_patient.push(m),
            None => continue,
        }
    }
    if per_patient.is_empty() {
        return Err(Error::Data("no patient produced evaluable folds".into()));
    }
    let mut table = String::from(
        "patient seizures sensitivity_pct fpr_per_hour predicted_time_min window_accuracy\n",
    );
    let mut rows = per_patient.clone();
    if let Some(avg) = predictor::average_metrics(&per_patient) {
        rows.push(avg);
    }
    for m in &rows {
        table.push_str(&format!(
            "{} {} {:.1} {:.4} {:.1} {:.4}\n",
            m.patient_id,
            m.n_seizures,
            m.sensitivity_pct,
            m.fpr_per_hour,
            m.predicted_time_min,
            m.window_accuracy
        ));
    }
    let path = write_report(cfg, "metrics.txt", &table)?;
    print!("{table}");
    println!("wrote {}", path.display());
    Ok(())
}

/// Leave-one-seizure-out evaluation of one patient: each merged seizure's
/// preictal windows plus one contiguous share of the interictal windows form
/// a test fold; the remainder trains a fresh model.
fn evaluate_patient(
    cfg: &RunConfig,
    patient: &PatientData,
    params: &DeviceParams<f64>,
) -> Result<Option<PredictionMetrics>> {
    let horizon = cfg.horizon_sec();
    let windows = labeled_windows(cfg, patient)?;
    let onsets: Vec<f64> = patient.merged_seizures().iter().map(|(s, _)| *s).collect();
    if onsets.len() < 2 {
        println!("patient {}: fewer than two merged seizures, skipped", patient.id);
        return Ok(None);
    }
    let fold_of_preictal = |w: &LabeledWindow| {
        onsets.iter().position(|o| w.window_start >= o - horizon && w.window_start < *o)
    };
    let interictal: Vec<&LabeledWindow> =
        windows.iter().filter(|w| w.label == Label::Interictal).collect();
    let n_folds = onsets.len();
    let hash = cfg.hash();
    let train_cfg = TrainConfig { bit_width: cfg.bits, ..TrainConfig::default() };

    let mut scored: Vec<ScoredWindow> = Vec::new();
    for fold in 0..n_folds {
        let inter_lo = fold * interictal.len() / n_folds;
        let inter_hi = (fold + 1) * interictal.len() / n_folds;
        let mut train_set: Vec<&LabeledWindow> = Vec::new();
        let mut test_set: Vec<&LabeledWindow> = Vec::new();
        for w in &windows {
            let in_test = match w.label {
                Label::Preictal => fold_of_preictal(w) == Some(fold),
                Label::Interictal => {
                    let idx = interictal
                        .iter()
                        .position(|x| std::ptr::eq(*x, w))
                        .expect("interictal window indexed");
                    (inter_lo..inter_hi).contains(&idx)
                }
            };
            if in_test {
                test_set.push(w);
            } else {
                train_set.push(w);
            }
        }
        if !has_both_classes(&train_set) {
            println!("patient {}: fold {fold} leaves a single-class training set, skipped", patient.id);
            continue;
        }
        if test_set.is_empty() {
            continue;
        }
        let cfgs = thresholds_for(cfg, &train_set)?;
        let train_maps = parallel_maps(&train_set, &cfgs, params, hash)?;
        let examples: Vec<(CorrelationMap<f64>, Label)> =
            train_maps.into_iter().zip(train_set.iter().map(|w| w.label)).collect();
        let seed = sub_seed(cfg.seed, &format!("evaluate/{}/{fold}", patient.id));
        let weights = train(&examples, params, &train_cfg, seed)?;
        let model = deploy(&weights, params)?;
        let test_maps = parallel_maps(&test_set, &cfgs, params, hash)?;
        for (w, map) in test_set.iter().zip(&test_maps) {
            scored.push(ScoredWindow {
                start_sec: w.window_start,
                label: w.label,
                predicted: classify(model.logits(map)?),
            });
        }
    }
    if scored.is_empty() {
        println!("patient {}: no evaluable folds, skipped", patient.id);
        return Ok(None);
    }
    let alarm = AlarmConfig { horizon_sec: horizon, ..AlarmConfig::default() };
    Ok(Some(predictor::evaluate(&patient.id, &scored, &onsets, &alarm)))
}

// ---------------------------------------------------------------------------
// cost

fn cmd_cost(cfg: &RunConfig) -> Result<()> {
    let catalog: Catalog<f64> = match &cfg.catalog {
        Some(path) => Catalog::from_text(&fs::read_to_string(path)?)?,
        None => Catalog::builtin(),
    };
    let catalog = if cfg.channels != BASE_CHANNELS {
        costmodel::scale(&catalog, cfg.channels, BASE_WINDOW_SECONDS)?
    } else {
        catalog
    };
    let report = costmodel::pipeline_cost(&catalog)?;
    write_report(cfg, "cost_report.txt", &report.to_text())?;
    let path = write_report(cfg, "cost_records.txt", &report.to_records())?;
    print!("{}", report.to_text());
    println!("wrote {}", path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv1a_matches_reference_vectors() {
        // published FNV-1a test vectors
        assert_eq!(fnv1a(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn defaults_resolve_without_flags() {
        let cfg = RunConfig::resolve(&CommonArgs::default()).unwrap();
        assert_eq!(cfg.data, "synthetic");
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.horizon_min, 30.0);
        assert_eq!(cfg.slot_ns, 40.0);
        assert_eq!(cfg.bits, 8);
        assert_eq!(cfg.channels, 18);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "seed = 9\nslot_ns = 80\n# comment\nbits = 4\n").unwrap();
        let args = CommonArgs {
            config: Some(path),
            seed: Some(2),
            ..CommonArgs::default()
        };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.seed, 2); // flag wins
        assert_eq!(cfg.slot_ns, 80.0); // file beats default
        assert_eq!(cfg.bits, 4);
    }

    #[test]
    fn unknown_config_key_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "sede = 9\n").unwrap();
        let args = CommonArgs { config: Some(path), ..CommonArgs::default() };
        let err = RunConfig::resolve(&args).unwrap_err();
        assert_eq!(exit_code(&err), 1);
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let a = RunConfig::resolve(&CommonArgs::default()).unwrap();
        let b = RunConfig::resolve(&CommonArgs::default()).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::resolve(&CommonArgs { seed: Some(5), ..CommonArgs::default() })
            .unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn sub_seeds_differ_per_name() {
        assert_ne!(sub_seed(1, "train/a"), sub_seed(1, "train/b"));
        assert_ne!(sub_seed(1, "train/a"), sub_seed(2, "train/a"));
        assert_eq!(sub_seed(1, "train/a"), sub_seed(1, "train/a"));
    }

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(exit_code(&Error::InvalidParam("x".into())), 1);
        assert_eq!(exit_code(&Error::Data("x".into())), 2);
        assert_eq!(exit_code(&Error::parse(3, "x")), 2);
        assert_eq!(exit_code(&Error::DimensionMismatch("x".into())), 3);
    }

    #[test]
    fn synthetic_corpus_has_balanced_structure() {
        let args = CommonArgs { horizon_min: Some(2.0), ..CommonArgs::default() };
        let cfg = RunConfig::resolve(&args).unwrap();
        let patients = synthetic_patients(&cfg);
        assert_eq!(patients.len(), 2);
        for p in &patients {
            assert_eq!(p.merged_seizures().len(), 3);
            let windows = label_windows(&p.recordings, cfg.horizon_sec()).unwrap();
            let pre = windows.iter().filter(|w| w.label == Label::Preictal).count();
            let inter = windows.iter().filter(|w| w.label == Label::Interictal).count();
            // three preictal spans and three interictal recordings of one
            // horizon each; 2 min = 40 windows per span
            assert_eq!(pre, 120);
            assert_eq!(inter, 120);
        }
    }
}
