//! Models, bound registry, sweep specifications and CSV output.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use relaycap::gauss_bounds::{
    self as gb, BoundError, BoundResult, GaussianRelayParams, HyperSourceParams,
};
use relaycap::optimize::{GridConfig, OptimizeError};

use crate::settings::{db_to_linear, Settings};
use crate::CliError;

/// Channel model a sweep runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    General,
    Hyper,
    DestOnly,
    Orthogonal,
}

impl Model {
    pub const ALL: [Model; 4] = [
        Model::General,
        Model::Hyper,
        Model::DestOnly,
        Model::Orthogonal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::General => "general",
            Model::Hyper => "hyper",
            Model::DestOnly => "dest-only",
            Model::Orthogonal => "orthogonal",
        }
    }

    /// Parameter names, in linear scale.
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            Model::General | Model::Orthogonal => &["P1", "P2", "N2", "N3", "Q"],
            Model::Hyper | Model::DestOnly => &["P1R", "P1D", "P2", "N2", "N3", "Q"],
        }
    }

    /// Bounds available for this model, in default column order.
    pub fn bounds(self) -> &'static [Bound] {
        use Bound::*;
        match self {
            Model::General => &[
                LbInputDescription,
                LbStateDescription,
                LbStateDescriptionTheta0,
                Cutset,
                BaselineDf,
            ],
            Model::Hyper => &[LbHyper, UbHyper, Cutset, BaselineDf],
            Model::DestOnly => &[
                CapacityDestOnly,
                LbHyperDestOnly,
                UbHyper,
                Cutset,
                BaselineDf,
            ],
            Model::Orthogonal => &[CapacityOrthogonal],
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase().replace('_', "-");
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown model `{s}` (general, hyper, dest-only, orthogonal)"
                ))
            })
    }
}

/// A bound that can fill one sweep column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    LbInputDescription,
    LbStateDescription,
    /// The state-description scheme with no state description sent.
    LbStateDescriptionTheta0,
    Cutset,
    BaselineDf,
    CapacityOrthogonal,
    UbHyper,
    LbHyper,
    LbHyperDestOnly,
    CapacityDestOnly,
}

impl Bound {
    pub const ALL: [Bound; 10] = [
        Bound::LbInputDescription,
        Bound::LbStateDescription,
        Bound::LbStateDescriptionTheta0,
        Bound::Cutset,
        Bound::BaselineDf,
        Bound::CapacityOrthogonal,
        Bound::UbHyper,
        Bound::LbHyper,
        Bound::LbHyperDestOnly,
        Bound::CapacityDestOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Bound::LbInputDescription => "lb_input_description",
            Bound::LbStateDescription => "lb_state_description",
            Bound::LbStateDescriptionTheta0 => "lb_state_description_theta0",
            Bound::Cutset => "cutset",
            Bound::BaselineDf => "baseline_df",
            Bound::CapacityOrthogonal => "capacity_orthogonal",
            Bound::UbHyper => "ub_hyper",
            Bound::LbHyper => "lb_hyper",
            Bound::LbHyperDestOnly => "lb_hyper_dest_only",
            Bound::CapacityDestOnly => "capacity_dest_only",
        }
    }

    /// Whether the column is an upper bound or a capacity, as opposed to an
    /// achievable rate.
    pub fn is_upper(self) -> bool {
        matches!(self, Bound::Cutset | Bound::UbHyper)
    }

    /// Evaluates the optimized bound at linear parameters `params`.
    pub fn evaluate(
        self,
        model: Model,
        params: &BTreeMap<String, f64>,
        grid: &GridConfig,
    ) -> Result<BoundResult<f64>, CliError> {
        if !model.bounds().contains(&self) {
            return Err(CliError::Usage(format!(
                "bound `{}` is not available for model `{model}`",
                self.name()
            )));
        }
        let get = |k: &str| {
            params
                .get(k)
                .copied()
                .ok_or_else(|| CliError::Usage(format!("missing parameter {k}")))
        };
        let out = match model {
            Model::General | Model::Orthogonal => {
                let p = GaussianRelayParams::new(
                    get("P1")?,
                    get("P2")?,
                    get("N2")?,
                    get("N3")?,
                    get("Q")?,
                )?;
                match self {
                    Bound::LbInputDescription => gb::lb_input_description_with(&p, grid),
                    Bound::LbStateDescription => gb::lb_state_description_with(&p, grid),
                    Bound::LbStateDescriptionTheta0 => {
                        gb::lb_state_description_no_description_with(&p, grid)
                    }
                    Bound::Cutset => gb::cutset_gaussian_with(&p, grid),
                    Bound::BaselineDf => gb::baseline_df_state_as_noise_with(&p, grid),
                    Bound::CapacityOrthogonal => gb::capacity_orthogonal_with(&p, grid),
                    _ => unreachable!("checked against the model's bound list"),
                }
            }
            Model::Hyper | Model::DestOnly => {
                let h = HyperSourceParams::new(
                    get("P1R")?,
                    get("P1D")?,
                    get("P2")?,
                    get("N2")?,
                    get("N3")?,
                    get("Q")?,
                )?;
                match self {
                    Bound::UbHyper => gb::ub_hyper_with(&h, grid),
                    Bound::LbHyper => gb::lb_hyper_with(&h, grid),
                    Bound::LbHyperDestOnly => gb::lb_hyper_dest_only_with(&h, grid),
                    Bound::CapacityDestOnly => gb::capacity_dest_only_with(&h, grid),
                    Bound::Cutset => gb::cutset_gaussian_with(&h.pooled(), grid),
                    Bound::BaselineDf => gb::baseline_df_state_as_noise_with(&h.pooled(), grid),
                    _ => unreachable!("checked against the model's bound list"),
                }
            }
        };
        Ok(out?)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Bound {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Bound::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown bound `{s}`")))
    }
}

/// Parses a comma-separated bound list.
pub fn parse_bounds(list: &str) -> Result<Vec<Bound>, CliError> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// The swept quantity, in dB.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Axis {
    /// Source-to-relay SNR, `P1/N2` or `P1R/N2`; sets `N2`.
    SnrRelay,
    /// Source-to-destination SNR, `P1/N3` or `P1D/N3`; sets `N3`.
    SnrDest,
    /// A model parameter given in dB.
    Parameter(String),
}

impl Axis {
    pub fn name(&self) -> String {
        match self {
            Axis::SnrRelay => "snr_relay".into(),
            Axis::SnrDest => "snr_dest".into(),
            Axis::Parameter(p) => p.clone(),
        }
    }

    /// Writes the swept value into `params`.
    fn apply(
        &self,
        model: Model,
        params: &mut BTreeMap<String, f64>,
        x_db: f64,
    ) -> Result<(), CliError> {
        let source = |key: &str| {
            params
                .get(key)
                .copied()
                .ok_or_else(|| CliError::Usage(format!("axis {} needs {key}", self.name())))
        };
        let split = matches!(model, Model::Hyper | Model::DestOnly);
        let snr = db_to_linear(x_db);
        match self {
            Axis::SnrRelay => {
                let p = source(if split { "P1R" } else { "P1" })?;
                params.insert("N2".into(), p / snr);
            }
            Axis::SnrDest => {
                let p = source(if split { "P1D" } else { "P1" })?;
                params.insert("N3".into(), p / snr);
            }
            Axis::Parameter(name) => {
                params.insert(name.clone(), snr);
            }
        }
        Ok(())
    }

    fn swept_parameter(&self) -> &str {
        match self {
            Axis::SnrRelay => "N2",
            Axis::SnrDest => "N3",
            Axis::Parameter(p) => p,
        }
    }
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "snr_relay" => Ok(Axis::SnrRelay),
            "snr_dest" => Ok(Axis::SnrDest),
            _ => {
                let name = t
                    .strip_suffix("_dB")
                    .or_else(|| t.strip_suffix("_db"))
                    .unwrap_or(t)
                    .to_ascii_uppercase();
                if ["P1", "P2", "N2", "N3", "Q", "P1R", "P1D"].contains(&name.as_str()) {
                    Ok(Axis::Parameter(name))
                } else {
                    Err(CliError::Usage(format!(
                        "unknown axis `{s}` (snr_relay, snr_dest or a parameter name)"
                    )))
                }
            }
        }
    }
}

/// Inclusive dB range `start:stop:step`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DbRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DbRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self, CliError> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite())
            || step <= 0.0
            || start > stop
        {
            return Err(CliError::Usage(format!(
                "invalid range {start}:{stop}:{step}"
            )));
        }
        Ok(Self { start, stop, step })
    }

    /// Grid points `start + k·step` up to `stop`, tolerating rounding at the end.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl FromStr for DbRange {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|w| w.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Usage(format!("range `{s}` is not start:stop:step")))?;
        match parts.as_slice() {
            [a, b, c] => DbRange::new(*a, *b, *c),
            _ => Err(CliError::Usage(format!(
                "range `{s}` is not start:stop:step"
            ))),
        }
    }
}

/// A fully resolved sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub model: Model,
    pub bounds: Vec<Bound>,
    pub axis: Axis,
    pub range: DbRange,
    /// Fixed parameters, linear scale.
    pub fixed: BTreeMap<String, f64>,
    pub grid: GridConfig,
}

impl SweepSpec {
    /// Checks bound/model pairing and that every parameter is either fixed or swept.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.bounds.is_empty() {
            return Err(CliError::Usage("no bounds requested".into()));
        }
        for b in &self.bounds {
            if !self.model.bounds().contains(b) {
                return Err(CliError::Usage(format!(
                    "bound `{b}` is not available for model `{}`",
                    self.model
                )));
            }
        }
        let known = self.model.parameters();
        for k in self.fixed.keys() {
            if !known.contains(&k.as_str()) {
                return Err(CliError::Usage(format!(
                    "parameter {k} does not belong to model `{}`",
                    self.model
                )));
            }
        }
        let swept = self.axis.swept_parameter();
        if !known.contains(&swept) {
            return Err(CliError::Usage(format!(
                "axis {} does not apply to model `{}`",
                self.axis.name(),
                self.model
            )));
        }
        for k in known {
            if *k != swept && !self.fixed.contains_key(*k) {
                return Err(CliError::Usage(format!("parameter {k} is not set")));
            }
        }
        Ok(())
    }

    /// Linear parameters at swept value `x_db`.
    pub fn params_at(&self, x_db: f64) -> Result<BTreeMap<String, f64>, CliError> {
        let mut p = self.fixed.clone();
        self.axis.apply(self.model, &mut p, x_db)?;
        Ok(p)
    }

    /// Applies `sweep.*`, `model.*` and `grid.*` settings on top of this spec.
    pub fn apply_settings(&mut self, s: &Settings) -> Result<(), CliError> {
        if let Some(m) = s.get("sweep.model") {
            self.model = m.parse()?;
        }
        if let Some(b) = s.get("sweep.bounds") {
            self.bounds = parse_bounds(b)?;
        }
        if let Some(x) = s.get("sweep.x") {
            self.axis = x.parse()?;
        }
        if let Some(r) = s.get("sweep.range") {
            self.range = r.parse()?;
        }
        self.fixed.extend(s.model_params()?);
        let g = s.grid()?;
        let grid = &mut self.grid;
        grid.coarse_steps = g.coarse_steps.or(grid.coarse_steps);
        grid.refine_rounds = g.refine_rounds.or(grid.refine_rounds);
        grid.refine_shrink = g.refine_shrink.or(grid.refine_shrink);
        grid.refine_steps = g.refine_steps.or(grid.refine_steps);
        grid.refine_starts = g.refine_starts.or(grid.refine_starts);
        Ok(())
    }
}

/// Figure presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig3,
    Fig4,
    Fig5a,
    Fig5b,
    Fig6,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig5a,
        Preset::Fig5b,
        Preset::Fig6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5a => "fig5a",
            Preset::Fig5b => "fig5b",
            Preset::Fig6 => "fig6",
        }
    }

    /// Parameter values in dB.
    pub fn parameters_db(self) -> &'static [(&'static str, f64)] {
        match self {
            Preset::Fig3 => &[("P1", 10.0), ("P2", 10.0), ("N3", 10.0), ("Q", 15.0)],
            Preset::Fig4 => &[("P1", 10.0), ("P2", 20.0), ("N3", 10.0), ("Q", 15.0)],
            // Published without a unit; read as dB (see the README).
            Preset::Fig5a => &[
                ("P1R", 10.0),
                ("P1D", 10.0),
                ("P2", 10.0),
                ("N3", 10.0),
                ("Q", 5.0),
            ],
            Preset::Fig5b => &[
                ("P1R", 10.0),
                ("P1D", 10.0),
                ("P2", 10.0),
                ("N2", 10.0),
                ("Q", 20.0),
            ],
            Preset::Fig6 => &[
                ("P1R", 10.0),
                ("P1D", 20.0),
                ("P2", 20.0),
                ("N3", 10.0),
                ("Q", 10.0),
            ],
        }
    }

    pub fn spec(self) -> SweepSpec {
        use Bound::*;
        let (model, axis, bounds): (Model, Axis, Vec<Bound>) = match self {
            Preset::Fig3 | Preset::Fig4 => (
                Model::General,
                Axis::SnrRelay,
                Model::General.bounds().to_vec(),
            ),
            Preset::Fig5a => (Model::Hyper, Axis::SnrRelay, Model::Hyper.bounds().to_vec()),
            Preset::Fig5b => (Model::Hyper, Axis::SnrDest, Model::Hyper.bounds().to_vec()),
            Preset::Fig6 => (
                Model::DestOnly,
                Axis::SnrRelay,
                vec![CapacityDestOnly, Cutset, BaselineDf],
            ),
        };
        SweepSpec {
            model,
            bounds,
            axis,
            range: DbRange {
                start: -10.0,
                stop: 30.0,
                step: 1.0,
            },
            fixed: self
                .parameters_db()
                .iter()
                .map(|(k, db)| (k.to_string(), db_to_linear(*db)))
                .collect(),
            grid: GridConfig::default(),
        }
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown preset `{s}` (fig3, fig4, fig5a, fig5b, fig6)"
                ))
            })
    }
}

/// One computed sweep row; `None` marks an infeasible cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub x_db: f64,
    pub cells: Vec<Option<f64>>,
}

/// Computed sweep in ascending x order, with per-cell warnings.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub bounds: Vec<Bound>,
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

impl SweepTable {
    /// Column of one bound.
    pub fn column(&self, bound: Bound) -> Option<Vec<Option<f64>>> {
        let k = self.bounds.iter().position(|b| *b == bound)?;
        Some(self.rows.iter().map(|r| r.cells[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_dB");
        for b in &self.bounds {
            let _ = write!(out, ",{b}");
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format_x(row.x_db));
            for c in &row.cells {
                out.push(',');
                if let Some(v) = c {
                    out.push_str(&format_sig6(*v));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Swept value without rounding noise.
pub fn format_x(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    format!("{}", r + 0.0)
}

/// Six significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..=5).contains(&mag) {
        format!("{:.*}", (5 - mag) as usize, v)
    } else {
        format!("{v:.5e}")
    }
}

/// Whether an error means "no admissible point" rather than a numerical fault.
fn is_infeasible(e: &CliError) -> bool {
    matches!(
        e,
        CliError::Bound(BoundError::Optimize(OptimizeError::NoFeasiblePoint))
            | CliError::Bound(BoundError::FeasibilityViolation { .. })
    )
}

/// Computes every row in a worker pool and returns them in x order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable, CliError> {
    spec.validate()?;
    let xs = spec.range.points();
    let computed: Vec<(SweepRow, Vec<String>)> = xs
        .par_iter()
        .map(|&x| {
            let params = spec.params_at(x)?;
            let mut cells = Vec::with_capacity(spec.bounds.len());
            let mut warnings = Vec::new();
            for b in &spec.bounds {
                match b.evaluate(spec.model, &params, &spec.grid) {
                    Ok(r) => cells.push(Some(r.rate)),
                    Err(e) if is_infeasible(&e) => {
                        warnings.push(format!("warning: {b} at x_dB={}: {e}", format_x(x)));
                        cells.push(None);
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok((SweepRow { x_db: x, cells }, warnings))
        })
        .collect::<Result<_, CliError>>()?;
    let (rows, warnings): (Vec<_>, Vec<_>) = computed.into_iter().unzip();
    Ok(SweepTable {
        bounds: spec.bounds.clone(),
        rows,
        warnings: warnings.concat(),
    })
}

/// `key=value` lines describing one optimized bound.
pub fn point_report(model: Model, bound: Bound, r: &BoundResult<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "model={model}\nbound={bound}\nrate={}\nactive_term={}",
        r.rate,
        r.active_term.as_str()
    );
    for (k, v) in &r.argmax {
        let _ = writeln!(out, "argmax.{k}={v}");
    }
    for (k, v) in &r.details {
        let _ = writeln!(out, "detail.{k}={v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(1.108369123), "1.10837");
        assert_eq!(format_sig6(0.000123456789), "0.000123457");
        assert_eq!(format_sig6(12.5), "12.5000");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1.5e-7), "1.50000e-7");
    }

    #[test]
    fn range_points_include_stop() {
        let r: DbRange = "-10:30:1".parse().unwrap();
        let p = r.points();
        assert_eq!(p.len(), 41);
        assert_eq!(p[40], 30.0);
        assert_eq!(DbRange::new(0.0, 1.0, 0.1).unwrap().points().len(), 11);
        assert!("1:0:1".parse::<DbRange>().is_err());
        assert!("0:1:0".parse::<DbRange>().is_err());
    }

    #[test]
    fn presets_use_documented_values() {
        let f3 = Preset::Fig3.spec();
        assert_eq!(f3.fixed["P1"], 10.0);
        assert!((f3.fixed["Q"] - 10f64.powf(1.5)).abs() < 1e-12);
        let f6 = Preset::Fig6.spec();
        assert_eq!(f6.fixed["P1D"], 100.0);
        for p in Preset::ALL {
            p.spec().validate().unwrap();
        }
    }

    #[test]
    fn rejects_bad_pairing() {
        let mut s = Preset::Fig3.spec();
        s.bounds = vec![Bound::UbHyper];
        assert!(matches!(s.validate(), Err(CliError::Usage(_))));
        assert!("bogus".parse::<Bound>().is_err());
    }

    #[test]
    fn axis_sets_noise() {
        let s = Preset::Fig3.spec();
        let p = s.params_at(10.0).unwrap();
        assert!((p["N2"] - 1.0).abs() < 1e-12);
    }
}
