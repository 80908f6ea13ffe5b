//! `affcell`: KL caches, cell partitions and cell ideal verification for
//! the affine Weyl groups G2 and B2 with unequal parameters.
//!
//! Exit codes: 0 success, 1 operational error, 2 verification failure,
//! 3 non-generic parameters.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use affcell::celldata::{descriptors_for, genericity_check, Zone, ZoneTable};
use affcell::cells::{
    check_descriptors, check_lusztig_star, check_parabolic_classes, compare_with_strips, default_margin, interior,
    partition_json, CellGraph, Strips,
};
use affcell::cellular::{finite_cells_g2, simple_module_report, CellContext, CellIdeal, Report};
use affcell::coxeter::parse_params;
use affcell::hecke::HeckeAlgebra;
use affcell::klbasis::{read_header, KLCache};
use affcell::{Ball, CoxeterSystem, Error, Exec, GroupType};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "affcell", version, about = "Kazhdan-Lusztig cells and affine cell ideals of G2 and B2")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Opts {
    /// Group type.
    #[arg(long = "type", global = true, default_value = "g2")]
    kind: GroupType,
    /// Weights `a,b` (G2) or `a,b,c` (B2).
    #[arg(long, global = true, default_value = "5,2")]
    weights: String,
    /// Parameter zone; required for B2, checked against the weights for G2.
    #[arg(long, global = true)]
    zone: Option<Zone>,
    /// Length bound of the enumerated ball.
    #[arg(long, global = true, default_value_t = 10)]
    radius: usize,
    /// Cache file; defaults to a file named after the group inside
    /// `$AFFCELL_CACHE_DIR` (or `.affcell-cache`).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Directory for default cache files.
    #[arg(long, global = true, env = "AFFCELL_CACHE_DIR", hide_env_values = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Distance from the ball boundary below which cell comparisons are not
    /// certified; defaults to one more than the longest base element.
    #[arg(long, global = true)]
    margin: Option<usize>,
    /// Replacement cell tables (JSON, as printed by `dump table`).
    #[arg(long, global = true)]
    tables: Option<PathBuf>,
    /// Run every loop on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute and store `C_w` for the whole ball, reusing an existing cache.
    BuildCache,
    /// Compute left and two-sided cells and compare them with the tables.
    Cells,
    /// Verify the cell ideal isomorphism.
    Verify {
        /// `cN`, `all` or `finite-g2`.
        #[arg(long, default_value = "all")]
        cell: String,
        /// Largest number of basis pairs tested for multiplicativity.
        #[arg(long, default_value_t = 4000)]
        sample_budget: usize,
    },
    /// Draw the alcoves of the ball colored by two-sided cell; alcoves
    /// outside the certified interior are faded.
    Render {
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Print cached data.
    Dump {
        #[command(subcommand)]
        what: DumpWhat,
    },
}

#[derive(Subcommand)]
enum DumpWhat {
    /// KL polynomials `p_{y,w}`, all of them or those of one `w`.
    Kl {
        #[arg(long)]
        w: Option<String>,
    },
    /// The cell tables of the zone.
    Table,
}

/// Error with its exit code.
struct Fail {
    code: u8,
    message: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonGeneric(_) => 3,
            Error::CellData(_) | Error::Verification(_) | Error::Construction(_) => 2,
            _ => 1,
        };
        Fail { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail { code: 1, message: e.to_string() }
    }
}

type CmdResult = Result<u8, Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    let o = &cli.opts;
    match &cli.cmd {
        Cmd::BuildCache => build_cache(o),
        Cmd::Cells => cells(o),
        Cmd::Verify { cell, sample_budget } => verify(o, cell, *sample_budget),
        Cmd::Render { out } => render_cmd(o, out.as_deref()),
        Cmd::Dump { what: DumpWhat::Kl { w } } => dump_kl(o, w.as_deref()),
        Cmd::Dump { what: DumpWhat::Table } => {
            let (_, table) = setup(o)?;
            print(o.format, &table.dump(), |v| serde_json::to_string_pretty(v).unwrap_or_default());
            Ok(0)
        }
    }
}

fn exec(o: &Opts) -> Exec {
    if o.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

/// The system, checked for genericity, and its tables.
fn setup(o: &Opts) -> Result<(CoxeterSystem, ZoneTable), Fail> {
    let sys = CoxeterSystem::new(o.kind, &parse_params(&o.weights)?)?;
    let zone = genericity_check(&sys, o.zone)?;
    let table = match &o.tables {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let value: Value = serde_json::from_str(&text).map_err(|e| Fail { code: 1, message: e.to_string() })?;
            ZoneTable::from_json(&value)?
        }
        None => descriptors_for(o.kind, zone)?,
    };
    if table.kind != o.kind {
        return Err(Fail { code: 1, message: format!("tables are for {}, not {}", table.kind, o.kind) });
    }
    table.check_order(&sys)?;
    Ok((sys, table))
}

fn cache_path(o: &Opts, sys: &CoxeterSystem) -> PathBuf {
    if let Some(p) = &o.cache {
        return p.clone();
    }
    let dir = o.cache_dir.clone().unwrap_or_else(|| PathBuf::from(".affcell-cache"));
    let w: Vec<String> = sys.params().iter().map(u32::to_string).collect();
    dir.join(format!("{}-{}.jsonl", sys.kind(), w.join("_")))
}

/// Loads the cache, extending it and writing it back when it does not
/// cover the radius. Also returns the reused and computed counts.
fn kl_cache(o: &Opts, sys: &CoxeterSystem) -> Result<(KLCache, usize, usize), Fail> {
    let path = cache_path(o, sys);
    let ball = Arc::new(Ball::new(sys.clone(), o.radius));
    let alg = Arc::new(HeckeAlgebra::new(ball));
    if path.exists() {
        let covered = read_header(&path)?.radius >= o.radius;
        let (kl, stats) = KLCache::load(&path, alg, exec(o))?;
        if !covered {
            kl.save(&path)?;
        }
        return Ok((kl, stats.reused, stats.computed));
    }
    let kl = KLCache::build(alg, exec(o))?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    kl.save(&path)?;
    let n = kl.ball().size();
    Ok((kl, 0, n))
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn print(format: Format, v: &Value, text: impl Fn(&Value) -> String) {
    match format {
        Format::Json => emit(&(serde_json::to_string_pretty(v).unwrap_or_default() + "\n")),
        Format::Csv | Format::Text => emit(&text(v)),
    }
}

fn build_cache(o: &Opts) -> CmdResult {
    let (sys, _) = setup(o)?;
    let (kl, reused, computed) = kl_cache(o, &sys)?;
    let v = json!({
        "path": cache_path(o, &sys).display().to_string(),
        "radius": o.radius,
        "elements": kl.ball().size(),
        "reused": reused,
        "computed": computed,
    });
    print(o.format, &v, |v| match o.format {
        Format::Csv => format!(
            "path,radius,elements,reused,computed\n{},{},{},{},{}\n",
            v["path"].as_str().unwrap_or(""),
            v["radius"],
            v["elements"],
            v["reused"],
            v["computed"]
        ),
        _ => format!(
            "{}: {} elements up to length {} ({} reused, {} computed)\n",
            v["path"].as_str().unwrap_or(""),
            v["elements"],
            v["radius"],
            v["reused"],
            v["computed"]
        ),
    });
    Ok(0)
}

fn cells(o: &Opts) -> CmdResult {
    let (sys, table) = setup(o)?;
    let (kl, _, _) = kl_cache(o, &sys)?;
    let ball = kl.ball();
    let margin = o.margin.unwrap_or_else(|| default_margin(&table));
    let cert = interior(ball, margin);
    let graph = CellGraph::build(&kl, exec(o))?;
    let left = graph.left_cells();
    let two = graph.two_sided_cells();

    let parabolic = check_parabolic_classes(&kl, &table).err().map(|e| e.to_string());
    let strips = Strips::build(ball, &table);
    let (mismatches, strip_json, descriptors) = match &strips {
        Ok(s) => (
            serde_json::to_value(compare_with_strips(ball, &two, s, cert)).unwrap_or_default(),
            partition_json(ball, "strips", &s.partition(), Some(s), cert),
            match check_descriptors(ball, &table, &left, &two, cert) {
                Ok(v) => json!(v),
                Err(e) => json!([e.to_string()]),
            },
        ),
        Err(e) => (json!([e.to_string()]), Value::Null, json!([])),
    };
    let star = check_lusztig_star(&graph, &left, &two, cert);
    let ok = parabolic.is_none()
        && strips.is_ok()
        && mismatches.as_array().is_some_and(|a| a.is_empty())
        && descriptors.as_array().is_some_and(|a| a.is_empty())
        && star.is_none();
    let v = json!({
        "type": sys.kind(),
        "weights": sys.params(),
        "zone": table.zone,
        "radius": ball.radius(),
        "certified_radius": cert,
        "ok": ok,
        "two_sided": partition_json(ball, "two-sided", &two, strips.as_ref().ok(), cert),
        "left": partition_json(ball, "left", &left, None, cert),
        "strips": strip_json,
        "diff": {
            "parabolic_classes": parabolic,
            "strip_mismatches": mismatches,
            "descriptor_mismatches": descriptors,
            "lusztig_star": star,
        },
    });
    print(o.format, &v, |v| match o.format {
        Format::Csv => {
            let mut s = String::from("element,length,two_sided,left,strip\n");
            for w in ball.up_to(cert) {
                let strip = strips.as_ref().map(|s| format!("c{}", s.class_of(w))).unwrap_or_default();
                s += &format!(
                    "{},{},{},{},{}\n",
                    ball.elem(w),
                    ball.length(w),
                    two.block_of(w),
                    left.block_of(w),
                    strip
                );
            }
            s
        }
        _ => {
            let mut s = format!(
                "{} weights {:?} zone {} radius {} (certified up to {})\n",
                sys.kind(),
                sys.params(),
                table.zone,
                ball.radius(),
                cert
            );
            for b in v["two_sided"]["blocks"].as_array().into_iter().flatten() {
                let n = b["elements"].as_array().map_or(0, Vec::len);
                s += &format!("  {:>4}: {n} elements\n", b["name"].as_str().unwrap_or("?"));
            }
            s += &format!("diff: {}\n", if v["ok"] == json!(true) { "none" } else { "see JSON output" });
            s
        }
    });
    Ok(if ok { 0 } else { 2 })
}

fn verify(o: &Opts, selector: &str, budget: usize) -> CmdResult {
    let (sys, table) = setup(o)?;
    let (kl, _, _) = kl_cache(o, &sys)?;
    let ctx = CellContext::new(&kl, &table, exec(o))?;
    let mut reports: Vec<Report> = Vec::new();
    let mut simple = Vec::new();
    let finite = |reports: &mut Vec<Report>| -> Result<(), Fail> {
        let graph = CellGraph::build(&kl, exec(o))?;
        reports.push(finite_cells_g2(&ctx, &graph.left_cells()));
        Ok(())
    };
    let descs: Vec<_> = match selector {
        "all" => table.descriptors.iter().collect(),
        "finite-g2" => Vec::new(),
        name => vec![table
            .descriptor(name)
            .ok_or_else(|| Fail { code: 1, message: format!("no cell `{name}` in zone {}", table.zone) })?],
    };
    for d in descs {
        let rep = match CellIdeal::new(&ctx, d, o.radius) {
            Ok(cell) => {
                let rep = cell.verify(budget);
                if let Ok(form) = cell.phi_form() {
                    simple.push(simple_module_report(&d.name, &form));
                }
                rep
            }
            Err(_) => affcell::cellular::verify_theorem(&ctx, d, o.radius, budget),
        };
        reports.push(rep);
    }
    if selector == "finite-g2" || (selector == "all" && sys.kind() == GroupType::G2) {
        finite(&mut reports)?;
    }
    let ok = reports.iter().all(Report::passed);
    let v = json!({
        "type": sys.kind(),
        "weights": sys.params(),
        "zone": table.zone,
        "radius": o.radius.min(kl.ball().radius()),
        "ok": ok,
        "reports": reports.iter().map(Report::to_json).collect::<Vec<_>>(),
        "simple_modules": simple,
    });
    print(o.format, &v, |_| {
        let mut s = String::new();
        if o.format == Format::Csv {
            s += "cell,check,status,detail\n";
        }
        for r in &reports {
            if o.format == Format::Text {
                s += &format!(
                    "{} ({}, radius {}, tau degree {}):\n",
                    r.cell,
                    r.base_ring.name(),
                    r.radius,
                    r.tau_degree_bound
                );
            }
            for c in &r.checks {
                let status =
                    serde_json::to_value(c.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                let detail = c.detail.clone().unwrap_or_default();
                s += &match o.format {
                    Format::Csv => format!("{},{},{},\"{}\"\n", r.cell, c.name, status, detail.replace('"', "'")),
                    _ => format!("  {:<28} {:<14} {}\n", c.name, status, detail),
                };
            }
        }
        s
    });
    Ok(if ok { 0 } else { 2 })
}

/// Colors come from the strips; near the boundary the computed cells are
/// not yet closed, so the picture is only drawn in full where they agree.
fn render_cmd(o: &Opts, out: Option<&Path>) -> CmdResult {
    let (sys, table) = setup(o)?;
    let (kl, _, _) = kl_cache(o, &sys)?;
    let ball = kl.ball();
    let cert = interior(ball, o.margin.unwrap_or_else(|| default_margin(&table)));
    let strips = Strips::build(ball, &table)?;
    let graph = CellGraph::build(&kl, exec(o))?;
    let mismatches = compare_with_strips(ball, &graph.two_sided_cells(), &strips, cert);
    let svg = render::svg(ball, &strips.partition(), cert);
    match out {
        Some(p) => std::fs::write(p, svg)?,
        None => emit(&svg),
    }
    if let Some(m) = mismatches.first() {
        eprintln!("computed cell of {} differs from strip c{} ({} mismatches)", m.element, m.strip, mismatches.len());
        return Ok(2);
    }
    Ok(0)
}

fn dump_kl(o: &Opts, w: Option<&str>) -> CmdResult {
    let (sys, _) = setup(o)?;
    let (kl, _, _) = kl_cache(o, &sys)?;
    let ball = kl.ball();
    let ws: Vec<_> = match w {
        Some(text) => vec![ball.require(&sys.parse(text)?)?],
        None => ball.ids().collect(),
    };
    let mut rows = Vec::new();
    for &w in &ws {
        for (y, p) in kl.c_element(w).terms().iter().rev() {
            rows.push((ball.elem(w).to_string(), ball.elem(*y).to_string(), p.clone()));
        }
    }
    let v = Value::Array(rows.iter().map(|(w, y, p)| json!({ "w": w, "y": y, "p": p.to_string() })).collect());
    print(o.format, &v, |_| {
        let mut s = if o.format == Format::Csv { String::from("w,y,p\n") } else { String::new() };
        for (w, y, p) in &rows {
            s += &match o.format {
                Format::Csv => format!("{w},{y},{p}\n"),
                _ => format!("p({y}, {w}) = {}\n", p.pretty()),
            };
        }
        s
    });
    Ok(0)
}
