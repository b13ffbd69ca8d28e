//! Versioned JSON documents for all four index kinds.
//!
//! Buckets are written as sorted maps from key text to sorted value lists,
//! so a rebuild from the same input serializes to identical bytes.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::anns_asym::{AsymIndex, AsymParams};
use crate::anns_sym::{SymIndex, SymParams};
use crate::asrs::{AsrsIndex, SubcurveRange};
use crate::geometry::{Curve, Metric};
use crate::grid::{Grid, PathKey};
use crate::twd::{StampedPoint, TimeScale, TwdIndex};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// One curve as it appears in curve files and index documents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub id: String,
    pub points: Vec<Vec<f64>>,
}

impl From<&Curve> for CurveRecord {
    fn from(c: &Curve) -> Self {
        Self { id: c.id().to_string(), points: c.to_vertices() }
    }
}

impl TryFrom<CurveRecord> for Curve {
    type Error = Error;

    fn try_from(r: CurveRecord) -> Result<Curve> {
        Curve::new(r.id, r.points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct GridDoc {
    origin: Vec<f64>,
    side: f64,
    cell: f64,
    cells_per_axis: i64,
}

impl From<&Grid> for GridDoc {
    fn from(g: &Grid) -> Self {
        Self { origin: g.origin().to_vec(), side: g.side(), cell: g.cell(), cells_per_axis: g.cells_per_axis() }
    }
}

impl GridDoc {
    fn restore(&self) -> Result<Grid> {
        let grid = Grid::new(&self.origin, self.side, self.cell)?;
        if grid.cells_per_axis() != self.cells_per_axis {
            return Err(Error::Format(format!(
                "grid records {} cells per axis but its geometry gives {}",
                self.cells_per_axis,
                grid.cells_per_axis()
            )));
        }
        Ok(grid)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct AsymDoc {
    format_version: u32,
    metric: Metric,
    d: usize,
    delta: f64,
    eps: f64,
    k: usize,
    budget: u64,
    diameter_estimate: f64,
    grid: GridDoc,
    curves: Vec<CurveRecord>,
    buckets: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SymDoc {
    format_version: u32,
    metric: Metric,
    d: Option<usize>,
    delta: f64,
    eps: f64,
    budget: u64,
    eps_int: f64,
    cell: f64,
    r_marked: f64,
    r_outer: f64,
    curves: Vec<CurveRecord>,
    buckets: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct AsrsDoc {
    format_version: u32,
    metric: Metric,
    d: usize,
    delta: f64,
    eps: f64,
    k: usize,
    budget: u64,
    diameter_estimate: f64,
    grid: GridDoc,
    curve: CurveRecord,
    buckets: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TwdDoc {
    format_version: u32,
    theta: usize,
    eps: f64,
    time_scale: TimeScale,
    t_min: f64,
    t_max: f64,
    step: f64,
    endpoints: Vec<f64>,
    points: Vec<StampedPoint>,
    buckets: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Document {
    Asym(AsymDoc),
    Sym(SymDoc),
    Asrs(AsrsDoc),
    Twd(TwdDoc),
}

/// Any of the four index kinds.
#[derive(Clone, Debug)]
pub enum AnyIndex {
    Asym(AsymIndex),
    Sym(SymIndex),
    Asrs(AsrsIndex),
    Twd(TwdIndex),
}

impl AnyIndex {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyIndex::Asym(_) => "asym",
            AnyIndex::Sym(_) => "sym",
            AnyIndex::Asrs(_) => "asrs",
            AnyIndex::Twd(_) => "twd",
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = match self {
            AnyIndex::Asym(i) => Document::Asym(asym_doc(i)),
            AnyIndex::Sym(i) => Document::Sym(sym_doc(i)),
            AnyIndex::Asrs(i) => Document::Asrs(asrs_doc(i)),
            AnyIndex::Twd(i) => Document::Twd(twd_doc(i)),
        };
        let mut text = serde_json::to_string(&doc)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let version = serde_json::from_str::<serde_json::Value>(text)?
            .get("format_version")
            .and_then(serde_json::Value::as_u64);
        if version != Some(FORMAT_VERSION as u64) {
            return Err(Error::Format(format!("unsupported format version {version:?}")));
        }
        match serde_json::from_str(text)? {
            Document::Asym(d) => restore_asym(d).map(AnyIndex::Asym),
            Document::Sym(d) => restore_sym(d).map(AnyIndex::Sym),
            Document::Asrs(d) => restore_asrs(d).map(AnyIndex::Asrs),
            Document::Twd(d) => restore_twd(d).map(AnyIndex::Twd),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn id_buckets<'a>(
    curves: &[Curve],
    buckets: impl Iterator<Item = (&'a PathKey, &'a [u32])>,
) -> BTreeMap<String, Vec<String>> {
    buckets
        .map(|(k, ids)| {
            let mut names: Vec<String> = ids.iter().map(|&i| curves[i as usize].id().to_string()).collect();
            names.sort();
            (k.as_str().to_string(), names)
        })
        .collect()
}

fn restore_id_buckets(
    curves: &[Curve],
    buckets: BTreeMap<String, Vec<String>>,
    check_key: impl Fn(&PathKey) -> Result<()>,
) -> Result<HashMap<PathKey, Vec<u32>>> {
    let pos: HashMap<&str, u32> = curves.iter().enumerate().map(|(i, c)| (c.id(), i as u32)).collect();
    let mut out = HashMap::with_capacity(buckets.len());
    for (key, names) in buckets {
        let key = PathKey::parse(&key)?;
        check_key(&key)?;
        let mut ids = names
            .iter()
            .map(|n| pos.get(n.as_str()).copied().ok_or_else(|| Error::Format(format!("unknown curve id {n:?}"))))
            .collect::<Result<Vec<u32>>>()?;
        ids.sort_unstable();
        ids.dedup();
        out.insert(key, ids);
    }
    Ok(out)
}

fn restore_curves(records: Vec<CurveRecord>) -> Result<Vec<Curve>> {
    records.into_iter().map(Curve::try_from).collect()
}

/// A grid key must have `k` lattice points inside the grid.
fn grid_key_check<'a>(grid: &'a Grid, k: usize) -> impl Fn(&PathKey) -> Result<()> + 'a {
    move |key| {
        let pts = key.lattice_points()?;
        if pts.len() != k {
            return Err(Error::Format(format!("key {key} does not have {k} points")));
        }
        for lp in &pts {
            if lp.coords().len() != grid.dim() {
                return Err(Error::Format(format!("key {key} has the wrong dimension")));
            }
            grid.to_point(lp)?;
        }
        Ok(())
    }
}

fn asym_doc(i: &AsymIndex) -> AsymDoc {
    let p = i.params();
    AsymDoc {
        format_version: FORMAT_VERSION,
        metric: p.metric,
        d: i.grid().dim(),
        delta: p.delta,
        eps: p.eps,
        k: p.k,
        budget: p.budget,
        diameter_estimate: i.diameter_estimate(),
        grid: i.grid().into(),
        curves: i.curves().iter().map(CurveRecord::from).collect(),
        buckets: id_buckets(i.curves(), i.buckets()),
    }
}

fn restore_asym(d: AsymDoc) -> Result<AsymIndex> {
    let params = AsymParams { delta: d.delta, eps: d.eps, k: d.k, metric: d.metric, budget: d.budget };
    params.validate()?;
    let grid = d.grid.restore()?;
    let curves = restore_curves(d.curves)?;
    crate::geometry::validate_corpus(&curves)?;
    if grid.dim() != d.d || curves[0].dim() != d.d {
        return Err(Error::Format("dimension disagrees with the grid or curves".into()));
    }
    let buckets = restore_id_buckets(&curves, d.buckets, grid_key_check(&grid, d.k))?;
    Ok(AsymIndex::from_parts(params, grid, d.diameter_estimate, curves, buckets))
}

fn sym_doc(i: &SymIndex) -> SymDoc {
    let p = i.params();
    SymDoc {
        format_version: FORMAT_VERSION,
        metric: Metric::Discrete,
        d: i.dim(),
        delta: p.delta,
        eps: p.eps,
        budget: p.budget,
        eps_int: p.eps_int(),
        cell: i.cell(),
        r_marked: p.r_marked(),
        r_outer: p.r_outer(),
        curves: i.curves().iter().map(CurveRecord::from).collect(),
        buckets: id_buckets(i.curves(), i.buckets()),
    }
}

fn restore_sym(d: SymDoc) -> Result<SymIndex> {
    if d.metric != Metric::Discrete {
        return Err(Error::Format("symmetric index documents use the discrete metric".into()));
    }
    let params = SymParams { delta: d.delta, eps: d.eps, budget: d.budget };
    let curves = restore_curves(d.curves)?;
    if !curves.is_empty() {
        crate::geometry::validate_corpus(&curves)?;
    }
    if curves.first().map(Curve::dim) != d.d {
        return Err(Error::Format("dimension disagrees with the curves".into()));
    }
    let dim = d.d.unwrap_or(0);
    let buckets = restore_id_buckets(&curves, d.buckets, |key| {
        let pts = key.lattice_points()?;
        if pts.iter().any(|lp| lp.coords().len() != dim) {
            return Err(Error::Format(format!("key {key} has the wrong dimension")));
        }
        Ok(())
    })?;
    Ok(SymIndex::from_parts(params, curves, buckets))
}

fn asrs_doc(i: &AsrsIndex) -> AsrsDoc {
    let p = i.params();
    AsrsDoc {
        format_version: FORMAT_VERSION,
        metric: Metric::Continuous,
        d: i.grid().dim(),
        delta: p.delta,
        eps: p.eps,
        k: p.k,
        budget: p.budget,
        diameter_estimate: i.diameter_estimate(),
        grid: i.grid().into(),
        curve: i.curve().into(),
        buckets: i
            .buckets()
            .map(|(k, r)| (k.as_str().to_string(), r.iter().map(ToString::to_string).collect()))
            .collect(),
    }
}

fn restore_asrs(d: AsrsDoc) -> Result<AsrsIndex> {
    let params = AsymParams { delta: d.delta, eps: d.eps, k: d.k, metric: d.metric, budget: d.budget };
    params.validate()?;
    let grid = d.grid.restore()?;
    let curve = Curve::try_from(d.curve)?;
    if grid.dim() != d.d || curve.dim() != d.d {
        return Err(Error::Format("dimension disagrees with the grid or curve".into()));
    }
    let check = grid_key_check(&grid, d.k);
    let n = curve.len() as f64;
    let mut buckets = HashMap::with_capacity(d.buckets.len());
    for (key, ranges) in d.buckets {
        let key = PathKey::parse(&key)?;
        check(&key)?;
        let ranges = ranges
            .iter()
            .map(|r| {
                let r: SubcurveRange = r.parse()?;
                if r.start < 1.0 || r.end > n {
                    return Err(Error::Format(format!("range {r} outside [1, {n}]")));
                }
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        buckets.insert(key, ranges);
    }
    drop(check);
    Ok(AsrsIndex::from_parts(params, grid, d.diameter_estimate, curve, buckets))
}

fn twd_doc(i: &TwdIndex) -> TwdDoc {
    let (t_min, t_max) = i.span();
    TwdDoc {
        format_version: FORMAT_VERSION,
        theta: i.theta(),
        eps: i.eps(),
        time_scale: i.time_scale(),
        t_min,
        t_max,
        step: i.step(),
        endpoints: i.endpoints(),
        points: i.points().to_vec(),
        buckets: i.buckets().map(|(&(a, b), r)| (format!("{a}-{b}"), r.clone())).collect(),
    }
}

fn restore_twd(d: TwdDoc) -> Result<TwdIndex> {
    let mut buckets = BTreeMap::new();
    for (key, mut regions) in d.buckets {
        let bad = || Error::Format(format!("malformed window key {key:?}"));
        let (a, b) = key.split_once('-').ok_or_else(bad)?;
        let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if a > b || b + 1 > d.endpoints.len() {
            return Err(bad());
        }
        regions.sort();
        regions.dedup();
        buckets.insert((a, b), regions);
    }
    let index = TwdIndex::from_parts(d.theta, d.eps, d.time_scale, d.points, buckets)?;
    if index.steps() + 1 != d.endpoints.len() {
        return Err(Error::Format("endpoint count disagrees with the points".into()));
    }
    Ok(index)
}
