//! Config-driven experiment runner behind the `ihs` binary.
//!
//! A config names a scenario, its parameters, a list of operations and an
//! output target. Every operation yields a [`Report`]; check operations
//! turn the exit status to 1 when they find a violation.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hilbert::{gram, kernel_f, psd_check, PsdVerdict, Vector};
use crate::matrix::Matrix;
use crate::scalar::{format_scalar, parse_scalar, ratio, Scalar};
use crate::structures::{Family, LayeredStructure, Seed};
use crate::subspaces::{
    alternate, commute_check, projection_law_failures, AlternationStatus, Subspace,
    DEFAULT_MAX_ITER,
};
use crate::weakclosure::{
    asym_free_check, chain_probe, foundation_rank, l1, l2_check, one_based_check,
    scattered_probe, DeltaTypeSpace, ShelahRanker, SyntheticClosure, TypeDef,
    TypeKind, WeakClosure,
};

pub const DEFAULT_SEED: u64 = 0x1f5_2024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Refining,
    Coarsening,
    #[serde(alias = "subset_sums")]
    SubsetSums,
    #[serde(alias = "mixed_kernel")]
    MixedKernel,
    #[serde(alias = "angled_lines")]
    AngledLines,
    #[serde(alias = "pure_set")]
    PureSet,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Refining => "refining",
            Scenario::Coarsening => "coarsening",
            Scenario::SubsetSums => "subset-sums",
            Scenario::MixedKernel => "mixed-kernel",
            Scenario::AngledLines => "angled-lines",
            Scenario::PureSet => "pure-set",
        }
    }
}

/// Structure parameters; which ones matter depends on the scenario.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none", alias = "N")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none", alias = "b")]
    pub branching: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none", alias = "c")]
    pub leaf_multiplicity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none", alias = "s")]
    pub class_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// An operation with optional arguments. In a config file an entry is
/// either a bare name or an object with an `op` key.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpSpec {
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<(usize, usize)>>,
    /// Closure-element tags whose bounded closure is the domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cases: Option<usize>,
}

impl OpSpec {
    pub fn named(op: &str) -> Self {
        OpSpec {
            op: op.to_owned(),
            ..OpSpec::default()
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OpEntry {
    Name(String),
    Full(OpSpec),
}

fn de_ops<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<OpSpec>, D::Error> {
    let entries = Vec::<OpEntry>::deserialize(d)?;
    Ok(entries
        .into_iter()
        .map(|e| match e {
            OpEntry::Name(op) => OpSpec::named(&op),
            OpEntry::Full(s) => s,
        })
        .collect())
}

/// Axes of a sweep; missing axes keep the base parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default, skip_serializing_if = "Option::is_none", alias = "N")]
    pub depth: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none", alias = "b")]
    pub branching: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub params: Params,
    #[serde(default, deserialize_with = "de_ops")]
    pub ops: Vec<OpSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub split_width: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, params: Params) -> Self {
        ExperimentConfig {
            scenario,
            params,
            ops: Vec::new(),
            output: OutputSpec::default(),
            grid: None,
            seed: None,
            max_iter: None,
            split_width: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn with_ops(mut self, ops: &[&str]) -> Self {
        self.ops = ops.iter().map(|o| OpSpec::named(o)).collect();
        self
    }

    /// The structure this config describes; `None` for angled lines.
    pub fn structure(&self) -> Result<Option<LayeredStructure>> {
        let p = &self.params;
        let n = p.depth.unwrap_or(0);
        Ok(Some(match self.scenario {
            Scenario::Refining => {
                LayeredStructure::refining(n, p.branching.unwrap_or(2), p.leaf_multiplicity.unwrap_or(1))?
            }
            Scenario::Coarsening => LayeredStructure::coarsening(n, p.branching.unwrap_or(2))?,
            Scenario::SubsetSums => match p.branching {
                Some(b) => LayeredStructure::subset_sums(n)?.with_params(n, b)?,
                None => LayeredStructure::subset_sums(n)?,
            },
            Scenario::PureSet => {
                LayeredStructure::pure_set(p.atoms.or(p.branching).unwrap_or(3))?
            }
            Scenario::MixedKernel => LayeredStructure::mixed_kernel(
                p.m_max.or(p.depth).unwrap_or(3),
                p.branching.unwrap_or(2),
                p.class_size.unwrap_or(1),
            )?,
            Scenario::AngledLines => return Ok(None),
        }))
    }

    pub fn typedef(&self) -> Result<Option<TypeDef>> {
        Ok(match self.structure()? {
            None => None,
            Some(s) if self.scenario == Scenario::SubsetSums => {
                Some(TypeDef::new(s, TypeKind::SubsetSum)?)
            }
            Some(s) => Some(TypeDef::points_of(s)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Op {
    Build,
    Closure,
    Psd,
    OneBased,
    AsymFree,
    Commute,
    CanonicalBase,
    Orders,
    Alternate,
    FoundationRank,
    VRank,
    ShelahRank,
    ChainProbe,
    ScatteredProbe,
    ProjectionProperties,
}

impl Op {
    pub fn parse(s: &str) -> Result<Op> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let key = key.strip_suffix("-check").unwrap_or(&key);
        Ok(match key {
            "build" => Op::Build,
            "closure" | "weak-closure" => Op::Closure,
            "psd" => Op::Psd,
            "one-based" => Op::OneBased,
            "asym-free" => Op::AsymFree,
            "commute" => Op::Commute,
            "canonical-base" => Op::CanonicalBase,
            "orders" | "order" | "l2" => Op::Orders,
            "alternate" => Op::Alternate,
            "foundation" | "foundation-rank" | "rank-foundation" => Op::FoundationRank,
            "v" | "v-rank" | "rank-v" => Op::VRank,
            "shelah" | "shelah-rank" | "rank-shelah" => Op::ShelahRank,
            "chain" | "chain-probe" => Op::ChainProbe,
            "scattered" | "scattered-probe" => Op::ScatteredProbe,
            "projection-properties" | "projection-laws" => Op::ProjectionProperties,
            _ => return Err(Error::InvalidArgument(format!("unknown op {s:?}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Build => "build",
            Op::Closure => "closure",
            Op::Psd => "psd-check",
            Op::OneBased => "one-based-check",
            Op::AsymFree => "asym-free-check",
            Op::Commute => "commute-check",
            Op::CanonicalBase => "canonical-base-check",
            Op::Orders => "order-check",
            Op::Alternate => "alternate",
            Op::FoundationRank => "foundation-rank",
            Op::VRank => "v-rank",
            Op::ShelahRank => "shelah-rank",
            Op::ChainProbe => "chain-probe",
            Op::ScatteredProbe => "scattered-probe",
            Op::ProjectionProperties => "projection-properties",
        }
    }

    fn is_rank(self) -> bool {
        matches!(self, Op::FoundationRank | Op::VRank | Op::ShelahRank)
    }

    fn allowed_on_angled_lines(self) -> bool {
        matches!(
            self,
            Op::Build
                | Op::Closure
                | Op::Psd
                | Op::OneBased
                | Op::Commute
                | Op::Alternate
                | Op::ProjectionProperties
        )
    }
}

/// One row of a rank table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankRow {
    pub family: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub b: usize,
    pub element_tag: String,
    pub rank: i64,
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub family: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub b: usize,
    pub m_max: usize,
    pub metric: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub op: String,
    pub params: Value,
    pub verdict: String,
    pub details: Vec<Value>,
    #[serde(skip)]
    pub violation: bool,
    #[serde(skip)]
    pub rank_rows: Vec<RankRow>,
    #[serde(skip)]
    pub sweep_rows: Vec<SweepRow>,
}

impl Report {
    fn new(op: Op, params: Value, verdict: &str, details: Vec<Value>) -> Self {
        Report {
            op: op.name().to_owned(),
            params,
            verdict: verdict.to_owned(),
            details,
            violation: false,
            rank_rows: Vec::new(),
            sweep_rows: Vec::new(),
        }
    }

    fn check(op: Op, params: Value, holds: bool, details: Vec<Value>) -> Self {
        let mut r = Self::new(op, params, if holds { "holds" } else { "fails" }, details);
        r.violation = !holds;
        r
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// 0 on success, 1 when a check found a violation.
    pub exit_code: i32,
    pub reports: Vec<Report>,
    /// The rendered output, also written to the configured path if any.
    pub rendered: String,
}

enum Instance {
    Closure(Box<WeakClosure>),
    Lines(SyntheticClosure),
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    inst: Instance,
}

impl Ctx<'_> {
    fn closure(&self) -> &WeakClosure {
        match &self.inst {
            Instance::Closure(c) => c,
            Instance::Lines(_) => unreachable!("validated before execution"),
        }
    }

    fn base_params(&self) -> Value {
        let mut p = serde_json::to_value(&self.cfg.params).expect("params serialize");
        p["scenario"] = json!(self.cfg.scenario.name());
        if let Some(s) = self.cfg.structure().ok().flatten() {
            p["N"] = json!(s.depth());
            p["b"] = json!(s.branching());
        }
        p
    }

    fn params_with(&self, spec: &OpSpec) -> Value {
        let mut p = self.base_params();
        let extra = serde_json::to_value(spec).expect("op spec serializes");
        if let Value::Object(m) = extra {
            for (k, v) in m {
                if k != "op" {
                    p[k] = v;
                }
            }
        }
        p
    }

    fn dims(&self) -> (usize, usize) {
        let s = self.closure().structure();
        (s.depth(), s.branching())
    }

    fn max_iter(&self, spec: &OpSpec) -> usize {
        spec.max_iter.or(self.cfg.max_iter).unwrap_or(DEFAULT_MAX_ITER)
    }

    /// Seeds of the named closure elements.
    fn seeds_of(&self, tags: &[String]) -> Result<Vec<Seed>> {
        let c = self.closure();
        let mut out: Vec<Seed> = Vec::new();
        for t in tags {
            let i = (0..c.len())
                .find(|&i| c.tag(i).to_string() == *t)
                .ok_or_else(|| Error::NotInClosure(t.clone()))?;
            for s in c.seeds(i)? {
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        Ok(out)
    }
}

/// Validates the config, then runs every listed op in order.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let ops = validate(cfg)?;
    let ctx = Ctx {
        cfg,
        inst: match cfg.typedef()? {
            Some(t) => Instance::Closure(Box::new(WeakClosure::new(&t)?)),
            None => Instance::Lines(SyntheticClosure::angled_lines()),
        },
    };
    let mut reports = Vec::with_capacity(ops.len());
    for (op, spec) in ops {
        reports.push(execute(&ctx, op, &spec)?);
    }
    finish(cfg, reports)
}

fn validate(cfg: &ExperimentConfig) -> Result<Vec<(Op, OpSpec)>> {
    if cfg.ops.is_empty() {
        return Err(Error::InvalidArgument("no ops requested".into()));
    }
    let ops = cfg
        .ops
        .iter()
        .map(|s| Ok((Op::parse(&s.op)?, s.clone())))
        .collect::<Result<Vec<_>>>()?;
    for (op, _) in &ops {
        if cfg.scenario == Scenario::AngledLines && !op.allowed_on_angled_lines() {
            return Err(Error::InvalidArgument(format!(
                "{} is not available for angled-lines",
                op.name()
            )));
        }
        if cfg.output.format == Format::Csv && !op.is_rank() {
            return Err(Error::InvalidArgument(format!(
                "{} has no CSV form; CSV is for rank tables and sweeps",
                op.name()
            )));
        }
    }
    if let Some(w) = cfg.split_width {
        if w < 2 {
            return Err(Error::InvalidArgument("split width must be at least 2".into()));
        }
    }
    cfg.structure()?;
    Ok(ops)
}

fn finish(cfg: &ExperimentConfig, reports: Vec<Report>) -> Result<Outcome> {
    let rendered = match cfg.output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&reports)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut wrote = false;
            for r in &reports {
                for row in &r.rank_rows {
                    w.serialize(row)?;
                    wrote = true;
                }
                for row in &r.sweep_rows {
                    w.serialize(row)?;
                    wrote = true;
                }
            }
            if !wrote {
                w.write_record(["family", "N", "b", "element_tag", "rank"])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
                .expect("csv output is utf-8")
        }
    };
    if let Some(p) = &cfg.output.path {
        fs::write(p, &rendered)?;
    }
    let exit_code = i32::from(reports.iter().any(|r| r.violation));
    Ok(Outcome {
        exit_code,
        reports,
        rendered,
    })
}

fn vec_json(v: &Vector) -> Value {
    json!({"coeffs": v.coeff_strings(), "norm_squared": format_scalar(&v.norm_sq())})
}

fn execute(ctx: &Ctx, op: Op, spec: &OpSpec) -> Result<Report> {
    let params = ctx.params_with(spec);
    match (op, &ctx.inst) {
        (Op::Build, Instance::Lines(l)) => Ok(Report::new(
            op,
            params,
            "ok",
            vec![json!({"dimension": l.space.dim(), "subspaces": 2})],
        )),
        (Op::Build, Instance::Closure(c)) => {
            let s = c.structure();
            Ok(Report::new(
                op,
                params,
                "ok",
                vec![json!({
                    "family": s.family().to_string(),
                    "descriptor": s.descriptor(),
                    "points": s.point_count(),
                    "classes": s.classes().len(),
                    "dimension": c.space().dim(),
                    "closure_size": c.len(),
                })],
            ))
        }
        (Op::Closure, _) => {
            let details = match &ctx.inst {
                Instance::Closure(c) => c
                    .elements()
                    .iter()
                    .map(|e| {
                        let mut v = vec_json(&e.vector);
                        v["tag"] = json!(e.tag.to_string());
                        v
                    })
                    .collect(),
                Instance::Lines(l) => l
                    .vectors
                    .iter()
                    .map(|(t, v)| {
                        let mut j = vec_json(v);
                        j["tag"] = json!(t);
                        j
                    })
                    .collect(),
            };
            Ok(Report::new(op, params, "ok", details))
        }
        (Op::Psd, _) => psd_report(ctx, params),
        (Op::OneBased, _) => {
            let r = match &ctx.inst {
                Instance::Closure(c) => one_based_check(c.as_ref())?,
                Instance::Lines(l) => one_based_check(l)?,
            };
            let mut details = vec![json!({"pairs_checked": r.pairs_checked, "failures": r.failures.len()})];
            details.extend(r.failures.iter().map(|f| {
                json!({"a": f.a, "b": f.b, "vector": f.vector,
                       "ab": vec_json(&f.ab), "ba": vec_json(&f.ba), "meet": vec_json(&f.meet)})
            }));
            Ok(Report::check(op, params, r.holds, details))
        }
        (Op::AsymFree, _) => {
            let r = asym_free_check(ctx.closure())?;
            let mut details = vec![json!({"pairs_checked": r.pairs_checked})];
            details.extend(r.violations.iter().map(|(a, b)| json!({"a": a, "b": b})));
            Ok(Report::check(op, params, r.holds, details))
        }
        (Op::Commute, Instance::Lines(l)) => {
            let (a, b) = (&l.subspaces[0].1, &l.subspaces[1].1);
            let tests: Vec<Vector> = l.vectors.iter().map(|(_, v)| v.clone()).collect();
            commute_report(op, params, a, b, &tests)
        }
        (Op::Commute, Instance::Closure(c)) => {
            let (Some(a), Some(b)) = (&spec.a, &spec.b) else {
                return Err(Error::InvalidArgument(
                    "commute-check needs element tag lists `a` and `b`".into(),
                ));
            };
            let da = c.domain(&ctx.seeds_of(a)?)?;
            let db = c.domain(&ctx.seeds_of(b)?)?;
            let tests: Vec<Vector> = c.elements().iter().map(|e| e.vector.clone()).collect();
            commute_report(op, params, &da.subspace, &db.subspace, &tests)
        }
        (Op::CanonicalBase, _) => canonical_base_report(ctx.closure(), params),
        (Op::Orders, _) => orders_report(ctx.closure(), params),
        (Op::Alternate, _) => alternate_report(ctx, params, ctx.max_iter(spec)),
        (Op::FoundationRank, _) => {
            let c = ctx.closure();
            let ranks = foundation_rank(&c.orders()?.0)?;
            let rows = (0..c.len()).map(|i| (c.tag(i).to_string(), ranks.rank(i) as i64)).collect();
            Ok(rank_report(ctx, op, params, rows, json!({"top": ranks.top()})))
        }
        (Op::VRank, _) => {
            let c = ctx.closure();
            let d = c.domain(&ctx.seeds_of(spec.domain.as_deref().unwrap_or(&[]))?)?;
            let rows = (0..c.len())
                .map(|i| Ok((c.tag(i).to_string(), c.v_rank(c.vector(i), &d.subspace)? as i64)))
                .collect::<Result<Vec<_>>>()?;
            Ok(rank_report(ctx, op, params, rows, json!({"domain": d.label})))
        }
        (Op::ShelahRank, _) => {
            let c = ctx.closure();
            let seeds = ctx.seeds_of(spec.domain.as_deref().unwrap_or(&[]))?;
            let width = spec
                .split_width
                .or(ctx.cfg.split_width)
                .unwrap_or(c.structure().branching());
            let space = DeltaTypeSpace::padded(c.typedef())?;
            let mut ranker = ShelahRanker::new(&space, width)?;
            let rows = (0..c.len())
                .map(|i| Ok((c.tag(i).to_string(), ranker.rank(&space.type_over(c.tag(i), &seeds)?))))
                .collect::<Result<Vec<_>>>()?;
            let label = c.domain(&seeds)?.label;
            Ok(rank_report(
                ctx,
                op,
                params,
                rows,
                json!({"domain": label, "split_width": width, "universe": space.universe_len()}),
            ))
        }
        (Op::ChainProbe, _) => {
            let c = ctx.closure();
            let chain = chain_probe(&c.orders()?.0)?;
            Ok(Report::new(op, params, "ok", vec![json!({"max_chain": chain})]))
        }
        (Op::ScatteredProbe, _) => {
            let c = ctx.closure();
            let eps = match &spec.eps {
                Some(e) => parse_scalar(e)?,
                None => ratio(1, 4),
            };
            let (n, b) = ctx.dims();
            let grid = spec.params.clone().unwrap_or_else(|| vec![(n, b), (n, b + 1), (n, b + 2)]);
            let r = scattered_probe(c.typedef(), &eps, &grid)?;
            let mut details: Vec<Value> = r
                .rows
                .iter()
                .map(|row| json!({"N": row.depth, "b": row.branching, "tag": row.tag, "count": row.count}))
                .collect();
            details.push(json!({"flagged": r.flagged.iter().map(|(n, t)| json!({"N": n, "tag": t})).collect::<Vec<_>>()}));
            let verdict = if r.flagged.is_empty() { "scattered" } else { "non-scattered" };
            Ok(Report::new(op, params, verdict, details))
        }
        (Op::ProjectionProperties, _) => projection_report(ctx, params, spec.cases.unwrap_or(200)),
    }
}

fn psd_report(ctx: &Ctx, params: Value) -> Result<Report> {
    let g = match &ctx.inst {
        Instance::Lines(l) => l.space.gram_matrix(),
        Instance::Closure(c) => {
            let s = c.structure();
            if s.family() == Family::MixedKernel {
                let pts = s.points();
                Matrix::symmetric_from_fn(pts.len(), |i, j| {
                    kernel_f(s, &pts[i], &pts[j]).expect("points of the structure")
                })
            } else {
                let vs: Vec<Vector> = c.elements().iter().map(|e| e.vector.clone()).collect();
                gram(&vs)?
            }
        }
    };
    let mut r = match psd_check(&g)? {
        PsdVerdict::Psd { rank, pivots } => Report::new(
            Op::Psd,
            params,
            "PSD",
            vec![json!({"size": g.rows(), "rank": rank,
                        "pivots": pivots.iter().map(format_scalar).collect::<Vec<_>>()})],
        ),
        PsdVerdict::NotPsd { witness, value } => Report::new(
            Op::Psd,
            params,
            "NOT_PSD",
            vec![json!({"size": g.rows(), "value": format_scalar(&value),
                        "witness": witness.iter().map(format_scalar).collect::<Vec<_>>()})],
        ),
    };
    r.violation = r.verdict != "PSD";
    Ok(r)
}

fn commute_report(op: Op, params: Value, a: &Subspace, b: &Subspace, tests: &[Vector]) -> Result<Report> {
    let r = commute_check(a, b, tests)?;
    let details = r
        .failures
        .iter()
        .map(|f| {
            json!({"vector": vec_json(&f.vector), "ab": vec_json(&f.ab),
                   "ba": vec_json(&f.ba), "meet": vec_json(&f.meet)})
        })
        .collect();
    Ok(Report::check(op, params, r.holds, details))
}

/// Exactly one closure element lying in the domain matches the inner
/// products of `a` against the domain, and it is `P_A a`.
pub fn canonical_base_failures(c: &WeakClosure) -> Result<Vec<(String, String, String)>> {
    let mut failures = Vec::new();
    let domains = c.domains()?;
    for d in domains.iter() {
        let basis = d.subspace.basis();
        let inside: Vec<usize> = (0..c.len())
            .filter_map(|i| match d.subspace.contains(c.vector(i)) {
                Ok(true) => Some(Ok(i)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            })
            .collect::<Result<_>>()?;
        for a in 0..c.len() {
            let profile: Vec<Scalar> = basis.iter().map(|u| c.vector(a).inner_unchecked(u)).collect();
            let matches: Vec<usize> = inside
                .iter()
                .copied()
                .filter(|&b| {
                    basis
                        .iter()
                        .zip(&profile)
                        .all(|(u, p)| c.vector(b).inner_unchecked(u) == *p)
                })
                .collect();
            let base = c.canonical_base(c.vector(a), &d.subspace);
            let why = match (&base, matches.as_slice()) {
                (Err(e), _) => Some(e.to_string()),
                (Ok(b), [m]) if b == m => None,
                (_, ms) => Some(format!("{} matching elements", ms.len())),
            };
            if let Some(w) = why {
                failures.push((c.tag(a).to_string(), d.label.clone(), w));
            }
        }
    }
    Ok(failures)
}

fn canonical_base_report(c: &WeakClosure, params: Value) -> Result<Report> {
    let failures = canonical_base_failures(c)?;
    let checked = c.len() * c.domains()?.len();
    let mut details = vec![json!({"pairs_checked": checked})];
    details.extend(
        failures
            .iter()
            .map(|(a, d, w)| json!({"element": a, "domain": d, "reason": w})),
    );
    Ok(Report::check(Op::CanonicalBase, params, failures.is_empty(), details))
}

/// Mismatches between `≤₁` and the transpose of `≤_𝒫`, and between `L₂`
/// and `L₁` on types represented by `(b, bdd(b))`.
pub fn order_failures(c: &WeakClosure) -> Result<Vec<String>> {
    let orders = c.orders()?;
    let (p, one) = (&orders.0, &orders.1);
    let mut out = Vec::new();
    let n = c.len();
    for i in 0..n {
        for j in 0..n {
            if one.lt(i, j) != p.lt(j, i) {
                out.push(format!("order mismatch at ({}, {})", c.tag(i), c.tag(j)));
            }
        }
    }
    let doms: Vec<Subspace> = (0..n)
        .map(|i| Ok(c.element_domain(i)?.subspace))
        .collect::<Result<_>>()?;
    for i in 0..n {
        for j in 0..n {
            let l2 = l2_check((c.vector(i), &doms[i]), (c.vector(j), &doms[j]))?;
            if l2 != l1(c, i, j)? {
                out.push(format!("L2 and L1 disagree at ({}, {})", c.tag(i), c.tag(j)));
            }
        }
    }
    Ok(out)
}

fn orders_report(c: &WeakClosure, params: Value) -> Result<Report> {
    let failures = order_failures(c)?;
    let orders = c.orders()?;
    let mut details = vec![json!({
        "strict_pairs_p": orders.0.pairs().len(),
        "strict_pairs_1": orders.1.pairs().len(),
    })];
    details.extend(failures.iter().map(|f| json!(f)));
    Ok(Report::check(Op::Orders, params, failures.is_empty(), details))
}

fn alternate_report(ctx: &Ctx, params: Value, max_iter: usize) -> Result<Report> {
    match &ctx.inst {
        Instance::Lines(l) => {
            let (a, b) = (&l.subspaces[0].1, &l.subspaces[1].1);
            let run = alternate(&l.vectors[0].1, a, b, max_iter)?;
            let verdict = match run.status {
                AlternationStatus::FixedPoint(k) => format!("fixed_point({k})"),
                AlternationStatus::Unconverged => "unconverged".to_owned(),
            };
            let details = match run.to_json() {
                Value::Array(steps) => steps,
                other => vec![other],
            };
            Ok(Report::new(Op::Alternate, params, &verdict, details))
        }
        Instance::Closure(c) => {
            let doms = c.domains()?;
            let mut worst = 0;
            let mut unconverged = 0;
            for i in 0..doms.len() {
                for j in 0..doms.len() {
                    for e in c.elements() {
                        let run = alternate(&e.vector, &doms[i].subspace, &doms[j].subspace, max_iter)?;
                        match run.status {
                            AlternationStatus::FixedPoint(k) => worst = worst.max(k),
                            AlternationStatus::Unconverged => unconverged += 1,
                        }
                    }
                }
            }
            let verdict = if unconverged > 0 {
                "unconverged".to_owned()
            } else {
                format!("fixed_point({worst})")
            };
            Ok(Report::new(
                Op::Alternate,
                params,
                &verdict,
                vec![json!({"domains": doms.len(), "max_steps": worst, "unconverged": unconverged})],
            ))
        }
    }
}

fn rank_report(ctx: &Ctx, op: Op, params: Value, rows: Vec<(String, i64)>, summary: Value) -> Report {
    let (n, b) = ctx.dims();
    let family = ctx.cfg.scenario.name().to_owned();
    let rank_rows: Vec<RankRow> = rows
        .into_iter()
        .map(|(element_tag, rank)| RankRow {
            family: family.clone(),
            n,
            b,
            element_tag,
            rank,
        })
        .collect();
    let mut details = vec![summary];
    details.extend(
        rank_rows
            .iter()
            .map(|r| json!({"element_tag": r.element_tag, "rank": r.rank})),
    );
    let mut r = Report::new(op, params, "ok", details);
    r.rank_rows = rank_rows;
    r
}

/// Random vectors with small rational coefficients on a few generators.
pub fn random_vector(space: &std::sync::Arc<crate::hilbert::InnerSpace>, rng: &mut ChaCha8Rng) -> Vector {
    let mut v = space.zero();
    if space.dim() == 0 {
        return v;
    }
    let terms = rng.random_range(1..=3usize);
    for _ in 0..terms {
        let g = rng.random_range(0..space.dim());
        let c = ratio(rng.random_range(-4..=4i64), rng.random_range(1..=3i64));
        v = v.axpy(&c, &space.unit(g));
    }
    v
}

fn projection_report(ctx: &Ctx, params: Value, cases: usize) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed.unwrap_or(DEFAULT_SEED));
    let (space, subs): (_, Vec<Subspace>) = match &ctx.inst {
        Instance::Closure(c) => (
            c.space().clone(),
            c.domains()?.iter().map(|d| d.subspace.clone()).collect(),
        ),
        Instance::Lines(l) => (l.space.clone(), l.subspaces.iter().map(|s| s.1.clone()).collect()),
    };
    let mut failures = Vec::new();
    let mut laws = BTreeSet::new();
    for case in 0..cases {
        let s = &subs[rng.random_range(0..subs.len())];
        let mut alt: Vec<Vector> = s.spanning().iter().rev().cloned().collect();
        if let (Some(x), Some(y)) = (s.spanning().first(), s.spanning().last()) {
            alt.push(&x.scaled(&ratio(2, 1)) - y);
        }
        let alt = Subspace::span(&space, alt)?;
        let u = random_vector(&space, &mut rng);
        let v = random_vector(&space, &mut rng);
        for law in projection_law_failures(s, &alt, &u, &v)? {
            laws.insert(law);
            failures.push(json!({"case": case, "law": law}));
        }
    }
    let mut details = vec![json!({"cases": cases, "failed_laws": laws.into_iter().collect::<Vec<_>>()})];
    details.extend(failures.iter().cloned());
    Ok(Report::check(Op::ProjectionProperties, params, failures.is_empty(), details))
}

/// One row per grid cell and metric.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.scenario == Scenario::AngledLines {
        return Err(Error::InvalidArgument("angled-lines has no parameters to sweep".into()));
    }
    let grid = cfg
        .grid
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("sweep needs a grid".into()))?;
    let axes = [&grid.depth, &grid.branching, &grid.m_max];
    if axes.iter().all(|a| a.is_none()) || axes.iter().any(|a| matches!(a, Some(v) if v.is_empty())) {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    let eps = match &grid.eps {
        Some(e) => parse_scalar(e)?,
        None => ratio(1, 4),
    };
    let one = |v: Option<usize>| vec![v];
    let depths = grid.depth.clone().map_or_else(|| one(cfg.params.depth), |v| v.into_iter().map(Some).collect());
    let bs = grid
        .branching
        .clone()
        .map_or_else(|| one(cfg.params.branching), |v| v.into_iter().map(Some).collect());
    let ms = grid.m_max.clone().map_or_else(|| one(cfg.params.m_max), |v| v.into_iter().map(Some).collect());
    let mut rows = Vec::new();
    for &m in &ms {
        for &n in &depths {
            for &b in &bs {
                let mut cell = cfg.clone();
                cell.params.depth = n;
                cell.params.branching = b;
                cell.params.m_max = m;
                let t = cell.typedef()?.expect("not angled lines");
                let c = WeakClosure::new(&t)?;
                let ranks = foundation_rank(&c.orders()?.0)?;
                let eps_sq = &eps * &eps;
                let max_eps = (0..c.len())
                    .map(|i| {
                        (0..c.len())
                            .filter(|&j| (c.vector(i) - c.vector(j)).norm_sq() <= eps_sq)
                            .count()
                    })
                    .max()
                    .unwrap_or(0);
                let s = c.structure();
                let m_col = if s.family() == Family::MixedKernel { s.class_count() } else { 0 };
                let metrics = [
                    ("closure_size", c.len().to_string()),
                    ("top_rank", ranks.top().to_string()),
                    ("max_chain", chain_probe(&c.orders()?.0)?.to_string()),
                    ("max_eps_count", max_eps.to_string()),
                ];
                for (metric, value) in metrics {
                    rows.push(SweepRow {
                        family: cfg.scenario.name().to_owned(),
                        n: s.depth(),
                        b: s.branching(),
                        m_max: m_col,
                        metric: metric.to_owned(),
                        value,
                    });
                }
            }
        }
    }
    let mut params = serde_json::to_value(&cfg.params)?;
    params["scenario"] = json!(cfg.scenario.name());
    params["grid"] = serde_json::to_value(grid)?;
    let details = rows.iter().map(|r| serde_json::to_value(r).expect("row serializes")).collect();
    let mut report = Report {
        op: "sweep".to_owned(),
        params,
        verdict: "ok".to_owned(),
        details,
        violation: false,
        rank_rows: Vec::new(),
        sweep_rows: Vec::new(),
    };
    report.sweep_rows = rows;
    finish(cfg, vec![report])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    #[test]
    fn mixed_kernel_psd() {
        let c = cfg(r#"{"scenario": "mixed-kernel", "params": {"m_max": 3, "class_size": 2}, "ops": ["psd-check"]}"#);
        let out = run(&c).unwrap();
        assert_eq!(out.exit_code, 0);
        assert_eq!(out.reports[0].verdict, "PSD");
    }

    #[test]
    fn angled_lines_fail_one_basedness() {
        let c = cfg(r#"{"scenario": "angled-lines", "ops": ["one-based-check"]}"#);
        let out = run(&c).unwrap();
        assert_eq!(out.exit_code, 1);
        assert_eq!(out.reports[0].verdict, "fails");
        assert!(out.reports[0].details.len() > 1);
    }

    #[test]
    fn config_errors() {
        assert!(ExperimentConfig::from_json(r#"{"scenario": "spirals", "ops": ["build"]}"#).is_err());
        assert!(run(&cfg(r#"{"scenario": "refining", "ops": ["levitate"]}"#)).is_err());
        assert!(run(&cfg(r#"{"scenario": "angled-lines", "ops": ["v-rank"]}"#)).is_err());
        assert!(run(&cfg(r#"{"scenario": "refining", "ops": ["closure"], "output": {"format": "csv"}}"#)).is_err());
        assert!(sweep(&cfg(r#"{"scenario": "refining", "grid": {}}"#)).is_err());
        assert!(sweep(&cfg(r#"{"scenario": "refining", "grid": {"depth": []}}"#)).is_err());
    }

    #[test]
    fn sweeps() {
        let out = sweep(&cfg(r#"{"scenario": "mixed-kernel", "grid": {"m_max": [1, 2, 3, 4, 5]}}"#)).unwrap();
        let top: Vec<&str> = out.reports[0]
            .sweep_rows
            .iter()
            .filter(|r| r.metric == "top_rank")
            .map(|r| r.value.as_str())
            .collect();
        assert_eq!(top, ["1", "2", "3", "4", "5"]);

        let out = sweep(&cfg(r#"{"scenario": "refining", "params": {"b": 2}, "grid": {"N": [0, 1, 2, 3]}}"#)).unwrap();
        let chain: Vec<&str> = out.reports[0]
            .sweep_rows
            .iter()
            .filter(|r| r.metric == "max_chain")
            .map(|r| r.value.as_str())
            .collect();
        assert_eq!(chain, ["1", "2", "3", "4"]);
    }

    #[test]
    fn rank_csv() {
        let c = cfg(r#"{"scenario": "refining", "params": {"N": 1, "b": 2}, "ops": ["foundation-rank"], "output": {"format": "csv"}}"#);
        let out = run(&c).unwrap();
        assert_eq!(
            out.rendered,
            "family,N,b,element_tag,rank\nrefining,1,2,h(x[0]),1\nrefining,1,2,h(x[1]),1\nrefining,1,2,t0(x[0]),0\n"
        );
    }

    #[test]
    fn repeated_runs_are_identical() {
        let c = cfg(r#"{"scenario": "coarsening", "params": {"N": 2, "b": 2},
                        "ops": ["closure", "foundation-rank", "one-based-check", "projection-properties"]}"#);
        assert_eq!(run(&c).unwrap().rendered, run(&c).unwrap().rendered);
    }
}
