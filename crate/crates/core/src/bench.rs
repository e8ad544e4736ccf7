//! Wall-clock scaling of node generation and node-set modification.
//!
//! Every ladder point is run `repeats` times (embedding `modify_repeats`
//! times); the minimum per stage is kept and the slope of log time against
//! log N is fitted. All work runs on
//! the calling thread.

use std::time::{Duration, Instant};

use crate::embedded::{embed, EmbedOptions, EmbeddedSpec, MembershipMap};
use crate::error::{Error, Result};
use crate::generator::{generate, NodeSet};
use crate::metrics::{fit_slope, seed_params};
use crate::poisson::SamplerConfig;
use crate::sbf::GeometricModel;
use crate::shapes::ShapeSpec;

/// Generation parameters shared by every ladder point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub n_d: usize,
    pub k_hat: usize,
    pub tau: f64,
    pub repeats: usize,
    /// Embedding runs per spacing; they are cheap next to generation, so
    /// more of them are affordable to suppress timer noise.
    pub modify_repeats: usize,
    pub seed: u64,
}

impl BenchConfig {
    pub fn new(n_d: usize) -> Self {
        Self {
            n_d,
            k_hat: 15,
            tau: 2.0,
            repeats: 3,
            modify_repeats: 10,
            seed: 0,
        }
    }
}

/// Stage times of one generation run, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateRow {
    pub h: f64,
    pub repeat: usize,
    pub n: usize,
    pub fit: f64,
    pub boundary: f64,
    pub obb: f64,
    pub poisson: f64,
    pub classify: f64,
    pub total: f64,
}

impl GenerateRow {
    fn min(&self, other: &Self) -> Self {
        Self {
            h: self.h,
            repeat: 0,
            n: self.n,
            fit: self.fit.min(other.fit),
            boundary: self.boundary.min(other.boundary),
            obb: self.obb.min(other.obb),
            poisson: self.poisson.min(other.poisson),
            classify: self.classify.min(other.classify),
            total: self.total.min(other.total),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateTable {
    /// One row per (h, repeat).
    pub rows: Vec<GenerateRow>,
    /// Per-h minimum over repeats, in ladder order.
    pub best: Vec<GenerateRow>,
    /// Slope of log best total against log N.
    pub slope: f64,
}

impl GenerateTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,repeat,n,fit,boundary,obb,poisson,classify,total\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n",
                r.h, r.repeat, r.n, r.fit, r.boundary, r.obb, r.poisson, r.classify, r.total
            ));
        }
        out.push_str(&format!("# slope,{:.4}\n", self.slope));
        out
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn check(h_ladder: &[f64], cfg: &BenchConfig) -> Result<()> {
    if cfg.repeats == 0 || cfg.modify_repeats == 0 {
        return Err(Error::InvalidArgument(
            "at least one repeat is needed".into(),
        ));
    }
    if h_ladder.len() < 3 {
        return Err(Error::TooFew {
            needed: 3,
            got: h_ladder.len(),
        });
    }
    Ok(())
}

/// Times fit plus generation for each spacing of the ladder.
pub fn scale_generate(
    shape: &ShapeSpec,
    h_ladder: &[f64],
    cfg: &BenchConfig,
) -> Result<GenerateTable> {
    Ok(generate_ladder(shape, h_ladder, cfg, |_, _| Ok(()))?.0)
}

/// Runs the generation ladder, handing the last node set of each spacing to
/// `visit` (outside the timed region).
fn generate_ladder<T>(
    shape: &ShapeSpec,
    h_ladder: &[f64],
    cfg: &BenchConfig,
    mut visit: impl FnMut(f64, NodeSet) -> Result<T>,
) -> Result<(GenerateTable, Vec<T>)> {
    check(h_ladder, cfg)?;
    let params = seed_params(shape.manifold(), cfg.n_d)?;
    let seeds = shape.sample(&params)?;
    let mut rows = Vec::new();
    let mut best: Vec<GenerateRow> = Vec::new();
    let mut visited = Vec::with_capacity(h_ladder.len());
    for &h in h_ladder {
        let sampler = SamplerConfig {
            h,
            k_hat: cfg.k_hat,
            seed: cfg.seed,
        };
        let mut min: Option<GenerateRow> = None;
        let mut last = None;
        for repeat in 0..cfg.repeats {
            let start = Instant::now();
            let model = GeometricModel::fit_default(&seeds, &params)?;
            let fit = start.elapsed();
            let g = generate(&model, cfg.tau, &sampler)?;
            let t = g.timings;
            let row = GenerateRow {
                h,
                repeat,
                n: g.nodes.len(),
                fit: secs(fit),
                boundary: secs(t.boundary),
                obb: secs(t.obb),
                poisson: secs(t.poisson),
                classify: secs(t.classify),
                total: secs(fit + t.total),
            };
            rows.push(row);
            min = Some(match min {
                Some(m) => m.min(&row),
                None => row,
            });
            last = Some(g.nodes);
        }
        best.extend(min);
        visited.push(visit(h, last.expect("at least one repeat"))?);
    }
    let slope = slope_of(best.iter().map(|r| (r.n, r.total)))?;
    Ok((GenerateTable { rows, best, slope }, visited))
}

fn slope_of(points: impl Iterator<Item = (usize, f64)>) -> Result<f64> {
    let (ns, ts): (Vec<f64>, Vec<f64>) = points.map(|(n, t)| (n as f64, t.max(1e-9))).unzip();
    fit_slope(&ns, &ts)
}

/// Modification time next to the generation time at the same spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifyRow {
    pub h: f64,
    /// Nodes before modification.
    pub n: usize,
    pub removed: usize,
    pub added: usize,
    pub modify: f64,
    pub generate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModifyTable {
    /// Minimum over repeats per spacing.
    pub rows: Vec<ModifyRow>,
    pub slope: f64,
    /// Timings of the generation runs that produced the node sets.
    pub generation: GenerateTable,
}

impl ModifyTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,n,removed,added,modify,generate\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.6e},{:.6e}\n",
                r.h, r.n, r.removed, r.added, r.modify, r.generate
            ));
        }
        out.push_str(&format!("# slope,{:.4}\n", self.slope));
        out
    }

    pub fn always_faster(&self) -> bool {
        self.rows.iter().all(|r| r.modify < r.generate)
    }
}

/// Generates the domain at each spacing, then times embedding `objects` into
/// it (fit, sampling and classification of the embedded boundaries included).
pub fn scale_modify(
    domain: &ShapeSpec,
    objects: &[EmbeddedSpec],
    h_ladder: &[f64],
    cfg: &BenchConfig,
) -> Result<ModifyTable> {
    let (generation, rows) = generate_ladder(domain, h_ladder, cfg, |h, nodes| {
        let map = MembershipMap::new(&nodes);
        let opts = EmbedOptions {
            tau: cfg.tau,
            ..EmbedOptions::new(h)
        };
        let mut modify = f64::INFINITY;
        let mut counts = (0, 0);
        for _ in 0..cfg.modify_repeats {
            let start = Instant::now();
            let e = embed(&nodes, &map, objects, &opts)?;
            modify = modify.min(secs(start.elapsed()));
            let removed = e.map.owners().iter().filter(|&&o| o != 0).count();
            counts = (removed, e.nodes.len() + removed - nodes.len());
        }
        Ok(ModifyRow {
            h,
            n: nodes.len(),
            removed: counts.0,
            added: counts.1,
            modify,
            generate: 0.0,
        })
    })?;
    let mut rows = rows;
    for (r, g) in rows.iter_mut().zip(&generation.best) {
        r.generate = g.total;
    }
    let slope = slope_of(rows.iter().map(|r| (r.n, r.modify)))?;
    Ok(ModifyTable {
        rows,
        slope,
        generation,
    })
}
