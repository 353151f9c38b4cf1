use std::io::Write;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use tsplab::analysis::{
    calibrate_d0, calibrate_pi3, classify_copy, colored_cell_centers, decide_set_cover, find_aligned_copies,
    predict_local, restrict_tour, stability_trial, ClassifyConfig, D0Config, DecideConfig,
};
use tsplab::bnb::{hk_one_tree_bound, run_bfs_bnb, write_levels_csv, BnBConfig};
use tsplab::exact::{held_karp_path, held_karp_tour, PathEnds};
use tsplab::gadgets::{
    default_m, ni_gadget, nn_gadget, pi_h, pi_h_3, pi_set, q_set, toy_provider, toy_provider_with, Gadget,
    Pi3Orientation, QConfig, DEFAULT_R,
};
use tsplab::geometry::Frame;
use tsplab::heuristics::run as run_heuristic;
use tsplab::instance::{discretize, gen_uniform, load, plant, save, to_text, PlantOptions, DEFAULT_PRECISION_BITS};
use tsplab::{EdgeConstraints, Heuristic, Instance, Point};

use crate::spec::{GadgetSpec, OutputFormat, PointArg, SolveMode};
use crate::{Cli, Command};

/// Largest instance `heur --reference auto` solves exactly.
const AUTO_EXACT_MAX: usize = 16;

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn load_instance(path: &Path) -> Result<Instance> {
    load(path).with_context(|| format!("loading {}", path.display()))
}

fn emit(out: &mut dyn Write, value: &impl Serialize, pretty: bool) -> Result<()> {
    if pretty {
        serde_json::to_writer_pretty(&mut *out, value)?;
    } else {
        serde_json::to_writer(&mut *out, value)?;
    }
    writeln!(out)?;
    Ok(())
}

/// Indices within `r` of `c` (S) and in the shell `(r, outer]` (Y).
fn ball_and_shell(inst: &Instance, c: PointArg, r: f64, outer: Option<f64>) -> Result<(Point, Vec<usize>, Vec<usize>)> {
    ensure!(inst.domain.d == 2, "local analysis needs a planar instance");
    ensure!(r > 0.0, "R must be positive");
    let outer = outer.unwrap_or(2.0 * r);
    ensure!(outer >= r, "outer radius below R");
    let center = Point::xy(c.0, c.1);
    let (mut s, mut y) = (Vec::new(), Vec::new());
    for (i, p) in inst.points.iter().enumerate() {
        let d = inst.domain.dist(&center, p);
        if d <= r {
            s.push(i);
        } else if d <= outer {
            y.push(i);
        }
    }
    ensure!(!s.is_empty(), "no points within R of the center");
    Ok((center, s, y))
}

fn build_gadget(cmd: &Command) -> Result<Gadget> {
    let Command::Plant { gadget, heuristic, variant, k, eps_pi, d1, .. } = cmd else {
        unreachable!()
    };
    let prov = || toy_provider((*variant).into());
    Ok(match gadget {
        GadgetSpec::Nn => nn_gadget(),
        GadgetSpec::Ni => ni_gadget(DEFAULT_R)?,
        GadgetSpec::Pi(k) => pi_set(*k)?,
        GadgetSpec::Q => q_set(&prov()?, &QConfig::default())?,
        GadgetSpec::M => default_m(*heuristic, &prov()?)?,
        GadgetSpec::PiH => pi_h(*k, *eps_pi, &default_m(*heuristic, &prov()?)?)?,
        GadgetSpec::Pi3 => pi_h_3(&pi_h(*k, *eps_pi, &default_m(*heuristic, &prov()?)?)?, *d1, Pi3Orientation::Inward)?,
    })
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let pretty = cli.pretty;
    match &cli.command {
        Command::Gen { n, d, seed, topology, bits } => {
            let mut inst = gen_uniform(*n, *d, *seed, *topology)?;
            if *bits < DEFAULT_PRECISION_BITS {
                let snapped = discretize(&inst, *bits)?;
                if !snapped.duplicates.is_empty() {
                    eprintln!("warning: {} points coincide after snapping to {bits} bits", snapped.duplicates.len());
                }
                inst = snapped.instance;
            }
            out.write_all(to_text(&inst)?.as_bytes())?;
        }

        Command::Solve { file, mode, endpoints } => {
            let inst = load_instance(file)?;
            let (length, order) = match (mode, endpoints) {
                (SolveMode::Tour, None) => {
                    let t = held_karp_tour(&inst)?;
                    (t.length, t.order)
                }
                (SolveMode::Tour, Some(_)) => bail!("--endpoints needs --mode path"),
                (SolveMode::Path, e) => {
                    let ends = match e {
                        None => PathEnds::Free,
                        Some(e) => {
                            ensure!(e.0 <= inst.len() && e.1 <= inst.len(), "endpoint out of range");
                            PathEnds::Fixed(e.0 - 1, e.1 - 1)
                        }
                    };
                    let p = held_karp_path(&inst, ends)?;
                    (p.length, p.order)
                }
            };
            emit(out, &json!({ "n": inst.len(), "length": length, "order": one_based(&order) }), pretty)?;
        }

        Command::Heur { file, heuristic, reference } => {
            let inst = load_instance(file)?;
            let hs: Vec<Heuristic> = match heuristic.as_str() {
                "all" => Heuristic::ALL.to_vec(),
                name => vec![name.parse()?],
            };
            let tours = hs.iter().map(|&h| Ok((h, run_heuristic(h, &inst)?))).collect::<Result<Vec<_>>>()?;
            let exact = match reference.as_str() {
                "exact" => true,
                "onetree" => false,
                "auto" => inst.len() <= AUTO_EXACT_MAX,
                other => bail!("unknown reference `{other}` (auto, exact, onetree)"),
            };
            let (ref_kind, ref_value) = if exact {
                ("exact", held_karp_tour(&inst)?.length)
            } else {
                let ub = tours.iter().map(|(_, t)| t.length).fold(f64::INFINITY, f64::min);
                let b = hk_one_tree_bound(&inst, &EdgeConstraints::new(), tsplab::bnb::DEFAULT_ITERS, Some(ub));
                ("onetree", b.bound)
            };
            if pretty {
                writeln!(out, "{:<8} {:>14} {:>9}   reference {ref_kind} = {ref_value:.6}", "heur", "length", "ratio")?;
                for (h, t) in &tours {
                    writeln!(out, "{:<8} {:>14.6} {:>9.5}", h.name(), t.length, t.length / ref_value)?;
                }
            } else {
                writeln!(out, "heuristic,length,reference,reference_kind,ratio")?;
                for (h, t) in &tours {
                    writeln!(out, "{},{},{},{},{}", h.name(), t.length, ref_value, ref_kind, t.length / ref_value)?;
                }
            }
        }

        cmd @ Command::Plant { file, gadget, scale, copies, clearance, r, seed, gadget_out, .. } => {
            ensure!(*scale > 0.0, "scale must be positive");
            let mut inst = load_instance(file)?;
            let g = build_gadget(cmd)?.scaled(*scale);
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let centers: Vec<Point> = match r {
                Some(r) => {
                    let mut cs = colored_cell_centers(&inst.domain, *r);
                    ensure!(cs.len() >= *copies, "only {} colored cells at R = {r}", cs.len());
                    cs.shuffle(&mut rng);
                    cs.truncate(*copies);
                    cs
                }
                None => (0..*copies)
                    .map(|_| Point::new((0..inst.domain.d).map(|_| rng.gen_range(0.0..inst.domain.t)).collect()))
                    .collect(),
            };
            for (j, c) in centers.iter().enumerate() {
                let name = format!("{gadget}#{}", j + 1);
                inst = plant(&inst, &g.points, c, &PlantOptions::new(&name, *clearance))?.0;
            }
            if let Some(p) = gadget_out {
                save(&g.to_instance(), p).with_context(|| format!("writing {}", p.display()))?;
            }
            out.write_all(to_text(&inst)?.as_bytes())?;
        }

        Command::Detect { file, gadget_file, eps, r } => {
            let inst = load_instance(file)?;
            let g = load_instance(gadget_file)?;
            for c in find_aligned_copies(&inst, &g.points, *eps, *r)? {
                let rec = json!({ "center": c.center, "members": one_based(&c.members), "cell": c.cell });
                emit(out, &rec, pretty)?;
            }
        }

        Command::Simulate { file, center, r, outer, heuristic, eps, cap } => {
            let inst = load_instance(file)?;
            let (c, s, y) = ball_and_shell(&inst, *center, *r, *outer)?;
            let frame = Frame { origin: [c.x(), c.y()], scale: *r, ..Frame::default() };
            let pred = predict_local(*heuristic, &inst, &s, &y, &frame, *eps, *cap)?;
            let tour = run_heuristic(*heuristic, &inst)?;
            let actual = restrict_tour(&inst, &tour, &s.iter().chain(&y).copied().collect::<Vec<_>>())?;
            let predicted = actual.is_single_path() && pred.contains(&actual.runs[0].order);
            let rec = json!({
                "s": one_based(&s),
                "y": one_based(&y),
                "candidates": pred.global_paths().iter().map(|p| one_based(p)).collect::<Vec<_>>(),
                "cap_exceeded": pred.candidates.cap_exceeded,
                "actual_runs": actual.runs.iter().map(|p| one_based(&p.order)).collect::<Vec<_>>(),
                "predicted": predicted,
            });
            emit(out, &rec, pretty)?;
        }

        Command::Classify { file, gadget_file, heuristic, eps, sim_eps, trials, seed } => {
            let inst = load_instance(file)?;
            let g = Gadget::from_instance(&load_instance(gadget_file)?)?;
            ensure!(!inst.plants.is_empty(), "the instance records no planted copies");
            let tour = run_heuristic(*heuristic, &inst)?;
            let cfg = ClassifyConfig { eps: *eps, sim_eps: *sim_eps, trials: *trials, seed: *seed, ..ClassifyConfig::default() };
            for rec in &inst.plants {
                let placement = Frame { origin: [rec.center.x(), rec.center.y()], ..Frame::default() };
                let report = classify_copy(&inst, &tour, *heuristic, &g, &rec.member_indices, &placement, &cfg)?;
                emit(out, &json!({ "copy": rec.gadget_name, "report": report }), pretty)?;
            }
        }

        Command::Stability { file, center, r, outer, heuristic, delta, trials, seed } => {
            let inst = load_instance(file)?;
            let (_, s, y) = ball_and_shell(&inst, *center, *r, *outer)?;
            let est = stability_trial(&inst, *heuristic, &s, &y, *delta, *trials, *seed)?;
            emit(out, &est, pretty)?;
        }

        Command::Bnb { file, n, seed, bound, incumbent, rule, level_cap, node_cap, iters, no_propagate, format } => {
            let inst = match file {
                Some(f) => load_instance(f)?,
                None => gen_uniform(*n, 2, *seed, tsplab::Topology::Cube)?,
            };
            let cfg = BnBConfig {
                bound: (*bound).into(),
                incumbent: incumbent.0,
                rule: (*rule).into(),
                node_cap: *node_cap,
                level_cap: *level_cap,
                one_tree_iters: *iters,
                propagate: !no_propagate,
                record_trace: false,
            };
            let res = run_bfs_bnb(&inst, &cfg)?;
            match format {
                OutputFormat::Csv => write_levels_csv(&res, &mut *out)?,
                OutputFormat::Json => {
                    let rec = json!({
                        "termination": res.termination,
                        "incumbent": res.incumbent,
                        "nodes": res.nodes,
                        "expanded": res.expanded(),
                        "best": res.best.as_ref().map(|t| one_based(&t.order)),
                        "levels": res.levels,
                        "history": res.history,
                    });
                    emit(out, &rec, pretty)?;
                }
            }
        }

        Command::Decide { variant, inner, heuristic, d0 } => {
            let prov = toy_provider_with((*variant).into(), *inner)?;
            let cfg = DecideConfig { d0: *d0, ..DecideConfig::default() };
            emit(out, &decide_set_cover(&prov, *heuristic, &cfg)?, pretty)?;
        }

        Command::Calibrate { variant, trials, required, seed, pi3_k, d1_grid, d2_factor } => {
            let cfg = D0Config { trials: *trials, required: *required, seed: *seed, ..D0Config::default() };
            let d0 = calibrate_d0(&toy_provider((*variant).into())?, &cfg)?;
            let pi3 = pi3_k.map(|k| calibrate_pi3(k, d1_grid, *d2_factor, *trials, *seed)).transpose()?;
            emit(out, &json!({ "d0": d0, "pi3": pi3 }), pretty)?;
        }

        Command::Replay { .. } => unreachable!("replay is resolved before dispatch"),
    }
    Ok(())
}
