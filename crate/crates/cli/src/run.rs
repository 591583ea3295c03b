use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use arw_core::correlations::{
    c6_work, census, exponent_monitor, CensusRow, CostCaps, CENSUS_CSV_HEADER, C6_REFERENCE_EXPONENT,
    X4_REFERENCE_EXPONENT,
};
use arw_core::kacrice::{
    variance_quadrature, SingularPolicy, VarianceConfig, VarianceQuadrature, VarianceReport, QUADRATURE_CSV_HEADER,
    VARIANCE_CSV_HEADER,
};
use arw_core::lattice::{enumerate, is_admissible, LatticeCache};
use arw_core::moments::{
    angular_moment, assemble_leading_constant, l2_integral_predictions, lemma52_terms, lemma61_asymptotic_check,
    lemma61_exact, AsymptoticRow, Lemma52Config, Lemma52Row, ASYMPTOTIC_CSV_HEADER, LEMMA52_CSV_HEADER,
};
use arw_core::montecarlo::{default_resolution, ensemble_stats, write_samples_csv, EnsembleStats, ENSEMBLE_CSV_HEADER};
use arw_core::report::fmt_sig;
use arw_core::{LatticeSet, PairSumTable};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::args::{CapArgs, Cli, Command, Format, McArgs, MSelection, MomentTable, Policy, QuadArgs};

/// Leading constant of the normalized variance, `32/375`.
pub const TARGET: f64 = 32.0 / 375.0;

/// Rendered CSV or JSON text.
pub struct Artifact(pub String);

/// Failure that should end the process with a distinct exit status.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Refusal(pub String);

struct Ctx {
    format: Format,
    cache: Option<LatticeCache>,
}

impl Ctx {
    fn lattice(&self, m: u64) -> Result<LatticeSet> {
        match &self.cache {
            Some(c) => c.get(m).with_context(|| format!("lattice cache for m={m}")),
            None => Ok(enumerate(m)),
        }
    }

    fn census_path(&self, m: u64) -> Option<PathBuf> {
        self.cache.as_ref().map(|c| c.dir().join(format!("census_{m}.json")))
    }

    /// Census through the on-disk memo. Entries are keyed by `m` and the
    /// caps they were computed under.
    fn census(&self, set: &LatticeSet, caps: &CostCaps) -> Result<CensusRow> {
        let path = self.census_path(set.m());
        if let Some(p) = path.as_deref().filter(|p| p.exists()) {
            if let Ok(hit) = serde_json::from_slice::<CachedCensus>(&fs::read(p)?) {
                if hit.caps == *caps {
                    return Ok(hit.row);
                }
            }
        }
        let row = census(set, caps);
        if let Some(p) = path {
            let entry = CachedCensus { caps: *caps, row: row.clone() };
            write_atomic(&p, serde_json::to_string(&entry)?.as_bytes())?;
        }
        Ok(row)
    }

    /// Energies with nonempty `E(m)`. A single named empty energy is an
    /// error; empty ones inside a range or list are skipped.
    fn nonempty(&self, sel: &MSelection) -> Result<Vec<(u64, LatticeSet)>> {
        let (ms, single) = sel.resolve()?;
        let mut out = Vec::new();
        for m in ms {
            let set = self.lattice(m)?;
            if set.is_empty() {
                if single {
                    bail!("m={m} is not a sum of three squares");
                }
                eprintln!("skipping m={m}: not a sum of three squares");
                continue;
            }
            out.push((m, set));
        }
        if out.is_empty() {
            bail!("no energy in the selection has lattice points");
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct CachedCensus {
    caps: CostCaps,
    row: CensusRow,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn csv(header: &str, lines: impl IntoIterator<Item = String>) -> Artifact {
    let mut s = String::from(header);
    s.push('\n');
    for l in lines {
        s.push_str(&l);
        s.push('\n');
    }
    Artifact(s)
}

fn json<T: Serialize>(v: &T) -> Result<Artifact> {
    Ok(Artifact(serde_json::to_string_pretty(v)? + "\n"))
}

/// Runs the selected pipeline. A refusal alongside an artifact means the
/// artifact is partial and should still be written.
pub fn run(cli: &Cli) -> Result<(Artifact, Option<Refusal>)> {
    let cache = cli.cache_dir.as_ref().map(LatticeCache::new).transpose().context("cache directory")?;
    let ctx = Ctx { format: cli.format, cache };
    let art = match &cli.command {
        Command::Census { sel, caps } => return census_cmd(&ctx, sel, caps),
        Command::Lattice { sel, summary } => lattice(&ctx, sel, *summary),
        Command::Moments { sel, table, k_max, grid_n, caps } => match table {
            MomentTable::Integrals => integrals(&ctx, sel, caps),
            MomentTable::Traces => traces(&ctx, sel, caps, *grid_n),
            MomentTable::Angular => angular(&ctx, sel, *k_max),
            MomentTable::Assembly => assembly(&ctx),
        },
        Command::Kacrice { sel, quad } => kacrice(&ctx, sel, quad),
        Command::Montecarlo { sel, mc, samples_dir } => montecarlo(&ctx, sel, mc, samples_dir.as_deref()),
        Command::VarianceSweep { sel, quad, mc } => sweep(&ctx, sel, quad, mc),
    }?;
    Ok((art, None))
}

#[derive(Serialize)]
struct LatticeEntry {
    m: u64,
    #[serde(rename = "N")]
    n: usize,
    admissible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<[i64; 3]>>,
}

fn lattice(ctx: &Ctx, sel: &MSelection, summary: bool) -> Result<Artifact> {
    let (ms, _) = sel.resolve()?;
    let mut entries = Vec::with_capacity(ms.len());
    for m in ms {
        let set = ctx.lattice(m)?;
        let points = (!summary).then(|| set.iter().map(|p| p.0).collect());
        entries.push(LatticeEntry { m, n: set.len(), admissible: is_admissible(m), points });
    }
    match ctx.format {
        Format::Json => json(&entries),
        Format::Csv if summary => {
            Ok(csv("m,N,admissible", entries.iter().map(|e| format!("{},{},{}", e.m, e.n, e.admissible))))
        }
        Format::Csv => Ok(csv(
            "m,x,y,z",
            entries.iter().flat_map(|e| {
                e.points.iter().flatten().map(move |p| format!("{},{},{},{}", e.m, p[0], p[1], p[2]))
            }),
        )),
    }
}

#[derive(Serialize)]
struct CensusReport {
    rows: Vec<CensusRow>,
    #[serde(serialize_with = "arw_core::report::sig_opt::serialize")]
    slope_x4: Option<f64>,
    #[serde(serialize_with = "arw_core::report::sig::serialize")]
    reference_x4: f64,
    #[serde(serialize_with = "arw_core::report::sig_opt::serialize")]
    slope_c6: Option<f64>,
    #[serde(serialize_with = "arw_core::report::sig::serialize")]
    reference_c6: f64,
    #[serde(serialize_with = "arw_core::report::sig_opt::serialize")]
    slope_t: Option<f64>,
}

fn census_cmd(ctx: &Ctx, sel: &MSelection, caps: &CapArgs) -> Result<(Artifact, Option<Refusal>)> {
    let caps = caps.caps()?;
    let (ms, _) = sel.resolve()?;
    let mut rows = Vec::with_capacity(ms.len());
    let mut refused = Vec::new();
    let mut inadmissible = 0usize;
    for m in ms {
        let set = ctx.lattice(m)?;
        inadmissible += !is_admissible(m) as usize;
        let row = ctx.census(&set, &caps)?;
        if row.c6.is_none() && !set.is_empty() {
            let work = c6_work(&set, &PairSumTable::new(&set));
            refused.push(format!("m={m} (estimated work {work})"));
        }
        rows.push(row);
    }
    if inadmissible > 0 {
        eprintln!("{inadmissible} inadmissible m (m mod 8 in {{0, 4, 7}}) flagged and left out of the fits");
    }
    let fit_rows: Vec<CensusRow> = rows.iter().filter(|r| r.admissible).cloned().collect();
    let mon = exponent_monitor(fit_rows);
    let opt = |x: Option<f64>| x.map(fmt_sig).unwrap_or_else(|| "n/a".into());
    eprintln!(
        "fitted exponents over admissible m: X(4) {} (reference {}), C(6) {} (reference {}), T {}",
        opt(mon.slope_x4),
        fmt_sig(X4_REFERENCE_EXPONENT),
        opt(mon.slope_c6),
        fmt_sig(C6_REFERENCE_EXPONENT),
        opt(mon.slope_t)
    );
    let art = match ctx.format {
        Format::Csv => csv(CENSUS_CSV_HEADER, rows.iter().map(CensusRow::csv_line)),
        Format::Json => json(&CensusReport {
            rows,
            slope_x4: mon.slope_x4,
            reference_x4: X4_REFERENCE_EXPONENT,
            slope_c6: mon.slope_c6,
            reference_c6: C6_REFERENCE_EXPONENT,
            slope_t: mon.slope_t,
        })?,
    };
    let refusal = (!refused.is_empty())
        .then(|| Refusal(format!("C(6) refused by --c6-cap {} for {}", caps.c6_work, refused.join(", "))));
    Ok((art, refusal))
}

fn integrals(ctx: &Ctx, sel: &MSelection, caps: &CapArgs) -> Result<Artifact> {
    let caps = caps.caps()?;
    let mut rows: Vec<AsymptoticRow> = Vec::new();
    for (m, set) in ctx.nonempty(sel)? {
        let table = lemma61_exact(&set, &caps, true).map_err(|e| Refusal(format!("m={m}: {e}")))?;
        rows.extend(lemma61_asymptotic_check(&table, &ctx.census(&set, &caps)?));
    }
    match ctx.format {
        Format::Csv => Ok(csv(ASYMPTOTIC_CSV_HEADER, rows.iter().map(AsymptoticRow::csv_line))),
        Format::Json => json(&rows),
    }
}

fn traces(ctx: &Ctx, sel: &MSelection, caps: &CapArgs, grid_n: Option<usize>) -> Result<Artifact> {
    let caps = caps.caps()?;
    let cfg = Lemma52Config { grid_n, ..Default::default() };
    let mut rows: Vec<Lemma52Row> = Vec::new();
    for (m, set) in ctx.nonempty(sel)? {
        let t = lemma52_terms(&set, &ctx.census(&set, &caps)?, &cfg).with_context(|| format!("m={m}"))?;
        eprintln!("m={m}: grid {} excluded fraction {}", t.grid_n, fmt_sig(t.excluded_fraction));
        rows.extend(t.rows);
    }
    match ctx.format {
        Format::Csv => Ok(csv(LEMMA52_CSV_HEADER, rows.iter().map(Lemma52Row::csv_line))),
        Format::Json => json(&rows),
    }
}

#[derive(Serialize)]
struct AngularRow {
    m: u64,
    #[serde(rename = "N")]
    n: usize,
    k: u32,
    exact: String,
    #[serde(serialize_with = "arw_core::report::sig::serialize")]
    value: f64,
}

fn angular(ctx: &Ctx, sel: &MSelection, k_max: u32) -> Result<Artifact> {
    if k_max == 0 {
        bail!("--k-max must be at least 1");
    }
    let mut rows = Vec::new();
    for (m, set) in ctx.nonempty(sel)? {
        for k in 1..=k_max {
            let b = angular_moment(&set, k)?.value;
            let value = b.to_f64().context("moment out of range")?;
            rows.push(AngularRow { m, n: set.len(), k, exact: b.to_string(), value });
        }
    }
    match ctx.format {
        Format::Csv => Ok(csv(
            "m,N,k,exact,value",
            rows.iter().map(|r| format!("{},{},{},{},{}", r.m, r.n, r.k, r.exact, fmt_sig(r.value))),
        )),
        Format::Json => json(&rows),
    }
}

fn assembly(ctx: &Ctx) -> Result<Artifact> {
    let a = assemble_leading_constant(&l2_integral_predictions())?;
    eprintln!("1/N coefficient {}, 1/N^2 coefficient {}, constant {}", a.coeff_1_over_n, a.coeff_1_over_n2, a.constant);
    match ctx.format {
        Format::Csv => Ok(csv(
            "name,weight,coeff_1_over_n,coeff_1_over_n2",
            a.terms
                .iter()
                .map(|t| format!("{},{},{},{}", t.name, t.weight, t.coeff_1_over_n, t.coeff_1_over_n2))
                .chain([format!("total,,{},{}", a.coeff_1_over_n, a.coeff_1_over_n2)]),
        )),
        Format::Json => json(&a),
    }
}

fn variance_config(q: &QuadArgs) -> Result<VarianceConfig> {
    if !(q.eps_sing > 0.0 && q.eps_sing < 1.0) {
        bail!("--eps-sing must lie in (0, 1)");
    }
    let policy = match q.policy {
        Policy::Evaluate => SingularPolicy::Evaluate,
        Policy::Exclude => SingularPolicy::Exclude,
    };
    Ok(VarianceConfig { grid_n: q.grid_n, eps_sing: q.eps_sing, policy, ..Default::default() })
}

fn kacrice(ctx: &Ctx, sel: &MSelection, quad: &QuadArgs) -> Result<Artifact> {
    let cfg = variance_config(quad)?;
    let mut rows: Vec<VarianceQuadrature> = Vec::new();
    for (m, set) in ctx.nonempty(sel)? {
        rows.push(variance_quadrature(&set, &cfg).with_context(|| format!("m={m}"))?);
    }
    match ctx.format {
        Format::Csv => Ok(csv(QUADRATURE_CSV_HEADER, rows.iter().map(VarianceQuadrature::csv_line))),
        Format::Json => json(&rows),
    }
}

fn ensemble(set: &LatticeSet, mc: &McArgs) -> Result<EnsembleStats> {
    let res = mc.resolution.unwrap_or_else(|| default_resolution(set.m()));
    let st = ensemble_stats(set, mc.samples, res, mc.seed).with_context(|| format!("m={}", set.m()))?;
    if st.flagged > 0 {
        eprintln!("m={}: {} samples without a sign change on the grid", st.m, st.flagged);
    }
    Ok(st)
}

fn montecarlo(ctx: &Ctx, sel: &MSelection, mc: &McArgs, samples_dir: Option<&Path>) -> Result<Artifact> {
    if mc.samples < 3 {
        bail!("--samples must be at least 3");
    }
    if let Some(d) = samples_dir {
        fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    let mut rows = Vec::new();
    for (m, set) in ctx.nonempty(sel)? {
        let st = ensemble(&set, mc)?;
        if let Some(d) = samples_dir {
            let path = d.join(format!("samples_m{m}.csv"));
            let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_samples_csv(&st.estimates, std::io::BufWriter::new(f))?;
        }
        rows.push(st);
    }
    match ctx.format {
        Format::Csv => Ok(csv(ENSEMBLE_CSV_HEADER, rows.iter().map(EnsembleStats::csv_line))),
        Format::Json => json(&rows),
    }
}

#[derive(Serialize)]
struct SweepReport {
    rows: Vec<VarianceReport>,
    normalized: Vec<Normalized>,
    #[serde(serialize_with = "arw_core::report::sig::serialize")]
    target: f64,
}

#[derive(Serialize)]
struct Normalized {
    m: u64,
    #[serde(serialize_with = "arw_core::report::sig::serialize")]
    value: f64,
}

fn sweep(ctx: &Ctx, sel: &MSelection, quad: &QuadArgs, mc: &McArgs) -> Result<Artifact> {
    let cfg = variance_config(quad)?;
    if mc.samples > 0 && mc.samples < 3 {
        bail!("--samples must be 0 or at least 3");
    }
    let mut rows = Vec::new();
    for (m, set) in ctx.nonempty(sel)? {
        let q = variance_quadrature(&set, &cfg).with_context(|| format!("m={m}"))?;
        let mut report = VarianceReport::new(&q);
        if mc.samples > 0 {
            ensemble(&set, mc)?.merge_into(&mut report);
        }
        eprintln!("m={m} N={} var*N^2/m = {} (target {})", q.n, fmt_sig(report.normalized()), fmt_sig(TARGET));
        rows.push(report);
    }
    match ctx.format {
        Format::Csv => Ok(csv(VARIANCE_CSV_HEADER, rows.iter().map(VarianceReport::csv_line))),
        Format::Json => {
            let normalized = rows.iter().map(|r| Normalized { m: r.m, value: r.normalized() }).collect();
            json(&SweepReport { rows, normalized, target: TARGET })
        }
    }
}
