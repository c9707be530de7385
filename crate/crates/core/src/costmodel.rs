//! Parametric area/power/latency/energy accounting for the two chip phases.
//!
//! The component catalog is data, not logic: it ships as a CSV mirroring the
//! published table and can be swapped from the CLI. Per-component energy is
//! `power x active latency`, where the active latency defaults to the phase
//! wall-clock latency (the maximum-runtime assumption) unless a row carries
//! its own value (ReLU and the compute crossbar finish early). Phase power
//! is the energy-weighted average `energy / phase latency`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default catalog mirroring the published table.
pub const DEFAULT_CATALOG: &str = include_str!("../data/hw_catalog.csv");

/// Baseline channel count the default catalog is sized for.
pub const BASE_CHANNELS: usize = 18;
/// Baseline window length of the default catalog (s).
pub const BASE_WINDOW_SECONDS: f64 = 3.0;

/// The two operating phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Extracting,
    Computing,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Extracting => write!(f, "extracting"),
            Phase::Computing => write!(f, "computing"),
        }
    }
}

/// One catalog row.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec<F> {
    pub name: String,
    /// Free-form sizing note (count, resolution, ...).
    pub spec: String,
    pub area_mm2: F,
    pub power_mw: F,
    pub unit_latency_us: F,
    /// Time the component is actually powered within the phase (us).
    pub active_latency_us: F,
    /// Energy printed in the source table, kept for cross-checking (nJ).
    pub catalog_energy_nj: Option<F>,
    pub technology: String,
}

impl<F: Real> ComponentSpec<F> {
    fn validate(&self) -> Result<()> {
        let vals = [self.area_mm2, self.power_mw, self.unit_latency_us, self.active_latency_us];
        if vals.iter().any(|v| *v < F::zero()) {
            return Err(Error::InvalidParam(format!(
                "component {:?} has a negative quantity",
                self.name
            )));
        }
        Ok(())
    }

    /// Core chip components are the 130 nm macro and the RRAM arrays; the
    /// rest is peripheral.
    pub fn is_core(&self) -> bool {
        self.technology.contains("130nm") || self.technology.contains("RRAM")
    }
}

/// All components of one phase plus the phase wall-clock latency.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePlan<F> {
    pub phase: Phase,
    pub total_latency_us: F,
    pub components: Vec<ComponentSpec<F>>,
}

/// Totals of one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTotals<F> {
    pub area_mm2: F,
    pub power_mw: F,
    pub energy_nj: F,
    pub latency_us: F,
}

/// Per-component and per-phase roll-up.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport<F> {
    /// (phase, name, computed energy nJ, catalog energy nJ).
    pub per_component: Vec<(Phase, String, F, Option<F>)>,
    pub per_phase: BTreeMap<Phase, PhaseTotals<F>>,
    pub grand_energy_nj: F,
    pub grand_latency_us: F,
    /// Chip area: the phases share one chip, so this is the larger phase
    /// footprint, not the sum.
    pub grand_area_mm2: F,
    /// Fraction of total energy consumed by the core components.
    pub core_energy_fraction: F,
    /// Scaling assumptions applied to the plan, if any.
    pub notes: Vec<String>,
}

impl<F: Real> CostReport<F> {
    /// Human-readable table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("phase        component         energy_nJ   catalog_nJ\n");
        for (phase, name, e, cat) in &self.per_component {
            let cat = cat.map_or("-".to_string(), |c| format!("{c:.3e}"));
            out.push_str(&format!("{phase:<12} {name:<17} {e:.3e}   {cat}\n"));
        }
        for (phase, t) in &self.per_phase {
            out.push_str(&format!(
                "total {phase}: area {:.3} mm2, power {:.2} mW, energy {:.4e} nJ, latency {:.4} us\n",
                t.area_mm2, t.power_mw, t.energy_nj, t.latency_us
            ));
        }
        out.push_str(&format!(
            "grand: area {:.3} mm2, energy {:.4e} nJ, latency {:.4} us, core share {:.1}%\n",
            self.grand_area_mm2,
            self.grand_energy_nj,
            self.grand_latency_us,
            self.core_energy_fraction * F::c(100.0)
        ));
        for n in &self.notes {
            out.push_str(&format!("# {n}\n"));
        }
        out
    }

    /// Machine-readable `key value` records.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for (phase, name, e, _) in &self.per_component {
            out.push_str(&format!("energy.{phase}.{} {e:.6e}\n", name.replace(' ', "_")));
        }
        for (phase, t) in &self.per_phase {
            out.push_str(&format!("phase.{phase}.area_mm2 {:.6e}\n", t.area_mm2));
            out.push_str(&format!("phase.{phase}.power_mw {:.6e}\n", t.power_mw));
            out.push_str(&format!("phase.{phase}.energy_nj {:.6e}\n", t.energy_nj));
            out.push_str(&format!("phase.{phase}.latency_us {:.6e}\n", t.latency_us));
        }
        out.push_str(&format!("grand.energy_nj {:.6e}\n", self.grand_energy_nj));
        out.push_str(&format!("grand.latency_us {:.6e}\n", self.grand_latency_us));
        out.push_str(&format!("grand.area_mm2 {:.6e}\n", self.grand_area_mm2));
        out.push_str(&format!("grand.core_energy_fraction {:.6e}\n", self.core_energy_fraction));
        out
    }
}

/// The full two-phase catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog<F> {
    pub extracting: PhasePlan<F>,
    pub computing: PhasePlan<F>,
    pub notes: Vec<String>,
}

impl<F: Real> Catalog<F> {
    /// Loads the built-in catalog.
    pub fn builtin() -> Self {
        Self::from_text(DEFAULT_CATALOG).expect("built-in catalog parses")
    }

    /// Parses the CSV catalog format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut latencies: BTreeMap<Phase, F> = BTreeMap::new();
        let mut components: BTreeMap<Phase, Vec<ComponentSpec<F>>> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let phase = |s: &str| -> Result<Phase> {
                match s {
                    "extracting" => Ok(Phase::Extracting),
                    "computing" => Ok(Phase::Computing),
                    other => Err(Error::parse(line_no, format!("unknown phase {other:?}"))),
                }
            };
            let num = |s: &str, what: &str| -> Result<F> {
                s.parse::<f64>()
                    .map(F::c)
                    .map_err(|_| Error::parse(line_no, format!("bad {what} {s:?}")))
            };
            match fields[0] {
                "latency" => {
                    if fields.len() != 3 {
                        return Err(Error::parse(line_no, "latency row needs 3 fields"));
                    }
                    latencies.insert(phase(fields[1])?, num(fields[2], "latency")?);
                }
                "component" => {
                    if fields.len() != 10 {
                        return Err(Error::parse(line_no, "component row needs 10 fields"));
                    }
                    let catalog_energy = if fields[8] == "-" {
                        None
                    } else {
                        Some(num(fields[8], "catalog energy")?)
                    };
                    let comp = ComponentSpec {
                        name: fields[2].to_string(),
                        spec: fields[3].to_string(),
                        area_mm2: num(fields[4], "area")?,
                        power_mw: num(fields[5], "power")?,
                        unit_latency_us: num(fields[6], "unit latency")?,
                        active_latency_us: num(fields[7], "active latency")?,
                        catalog_energy_nj: catalog_energy,
                        technology: fields[9].to_string(),
                    };
                    comp.validate()
                        .map_err(|e| Error::parse(line_no, e.to_string()))?;
                    components.entry(phase(fields[1])?).or_default().push(comp);
                }
                other => return Err(Error::parse(line_no, format!("unknown row kind {other:?}"))),
            }
        }
        let mut plan = |phase: Phase| -> Result<PhasePlan<F>> {
            Ok(PhasePlan {
                phase,
                total_latency_us: *latencies
                    .get(&phase)
                    .ok_or_else(|| Error::Data(format!("catalog missing {phase} latency")))?,
                components: components.remove(&phase).unwrap_or_default(),
            })
        };
        Ok(Catalog {
            extracting: plan(Phase::Extracting)?,
            computing: plan(Phase::Computing)?,
            notes: Vec::new(),
        })
    }

    /// Serializes back into the CSV catalog format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.notes {
            out.push_str(&format!("# {n}\n"));
        }
        out.push_str(&format!("latency,extracting,{}\n", self.extracting.total_latency_us));
        out.push_str(&format!("latency,computing,{}\n", self.computing.total_latency_us));
        for plan in [&self.extracting, &self.computing] {
            for c in &plan.components {
                let cat = c
                    .catalog_energy_nj
                    .map_or("-".to_string(), |e| format!("{e:e}"));
                out.push_str(&format!(
                    "component,{},{},{},{:e},{:e},{:e},{:e},{cat},{}\n",
                    plan.phase,
                    c.name,
                    c.spec,
                    c.area_mm2,
                    c.power_mw,
                    c.unit_latency_us,
                    c.active_latency_us,
                    c.technology
                ));
            }
        }
        out
    }
}

/// Rolls one phase up into totals plus per-component computed energies.
pub fn rollup<F: Real>(plan: &PhasePlan<F>) -> Result<(PhaseTotals<F>, Vec<(Phase, String, F, Option<F>)>)> {
    if plan.components.is_empty() {
        return Err(Error::Data(format!("{} phase has no components", plan.phase)));
    }
    if plan.total_latency_us < F::zero() {
        return Err(Error::InvalidParam("negative phase latency".into()));
    }
    let mut area = F::zero();
    let mut energy = F::zero();
    let mut rows = Vec::with_capacity(plan.components.len());
    for c in &plan.components {
        c.validate()?;
        let e = c.power_mw * c.active_latency_us; // mW * us = nJ
        area = area + c.area_mm2;
        energy = energy + e;
        rows.push((plan.phase, c.name.clone(), e, c.catalog_energy_nj));
    }
    let power = if plan.total_latency_us > F::zero() {
        energy / plan.total_latency_us
    } else {
        F::zero()
    };
    Ok((
        PhaseTotals { area_mm2: area, power_mw: power, energy_nj: energy, latency_us: plan.total_latency_us },
        rows,
    ))
}

/// Combines both phases into the whole-pipeline report.
pub fn pipeline_cost<F: Real>(catalog: &Catalog<F>) -> Result<CostReport<F>> {
    let (ext, mut rows) = rollup(&catalog.extracting)?;
    let (cmp, cmp_rows) = rollup(&catalog.computing)?;
    rows.extend(cmp_rows);
    let grand_energy = ext.energy_nj + cmp.energy_nj;
    let core_energy: F = catalog
        .extracting
        .components
        .iter()
        .map(|c| (c, catalog.extracting.total_latency_us))
        .chain(catalog.computing.components.iter().map(|c| (c, catalog.computing.total_latency_us)))
        .filter(|(c, _)| c.is_core())
        .map(|(c, _)| c.power_mw * c.active_latency_us)
        .fold(F::zero(), |a, b| a + b);
    let mut per_phase = BTreeMap::new();
    per_phase.insert(Phase::Extracting, ext);
    per_phase.insert(Phase::Computing, cmp);
    Ok(CostReport {
        per_component: rows,
        per_phase,
        grand_energy_nj: grand_energy,
        grand_latency_us: ext.latency_us + cmp.latency_us,
        grand_area_mm2: ext.area_mm2.max(cmp.area_mm2),
        core_energy_fraction: core_energy / grand_energy,
        notes: catalog.notes.clone(),
    })
}

/// Scales a catalog to a different channel count and window length.
///
/// Assumptions, all recorded in the output notes: driver count, power and
/// area scale linearly with channels; crossbar area and power scale with the
/// squared channel ratio (device count); extraction latency scales with the
/// slot count, i.e. linearly with window length; everything else is
/// unchanged.
pub fn scale<F: Real>(catalog: &Catalog<F>, channels: usize, window_seconds: f64) -> Result<Catalog<F>> {
    if channels == 0 || window_seconds <= 0.0 {
        return Err(Error::InvalidParam("scale needs channels > 0 and window > 0".into()));
    }
    let ratio = F::c(channels as f64 / BASE_CHANNELS as f64);
    let ratio2 = ratio * ratio;
    let win_ratio = F::c(window_seconds / BASE_WINDOW_SECONDS);
    let mut out = catalog.clone();
    out.notes = vec![
        format!("scaled to {channels} channels (x{:.3} linear, drivers and array rows)", channels as f64 / BASE_CHANNELS as f64),
        format!("crossbar area/power scaled with squared channel ratio"),
        format!("extraction latency scaled with window length ({window_seconds} s window)"),
    ];
    let ext_latency = catalog.extracting.total_latency_us * win_ratio;
    out.extracting.total_latency_us = ext_latency;
    for plan in [&mut out.extracting, &mut out.computing] {
        let is_extracting = plan.phase == Phase::Extracting;
        for c in &mut plan.components {
            if c.name.contains("Driver") {
                c.power_mw = c.power_mw * ratio;
                c.area_mm2 = c.area_mm2 * ratio;
                if let Ok(count) = c.spec.parse::<f64>() {
                    c.spec = format!("{:.0}", count * channels as f64 / BASE_CHANNELS as f64);
                }
            } else if c.name == "Crossbar" {
                c.power_mw = c.power_mw * ratio2;
                c.area_mm2 = c.area_mm2 * ratio2;
                if is_extracting {
                    c.spec = format!("{channels}x{channels}");
                } else {
                    c.spec = format!("{channels}x2");
                }
            }
            if is_extracting {
                c.active_latency_us = ext_latency;
            }
        }
    }
    Ok(out)
}
