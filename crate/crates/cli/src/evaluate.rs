use std::collections::BTreeSet;
use std::time::Instant;

use ab3dmot::eval::{format_table, write_curve_csv};
use ab3dmot::kitti::{read_gt_labels, read_tracking_results};
use ab3dmot::{discover_sequences, evaluate, EvalConfig, EvalSequence};
use anyhow::{bail, Context};
use rayon::prelude::*;

use crate::manifest::{write_json, EvalManifest, EvalSequenceStats, TOOL, VERSION};
use crate::output::OutputGuard;
use crate::{with_jobs, EvalArgs};

pub fn run(args: &EvalArgs) -> anyhow::Result<()> {
    let wall = Instant::now();
    let gt_files = discover_sequences(&args.gt)?;
    if gt_files.is_empty() {
        bail!("no sequence files found in {}", args.gt.display());
    }
    let result_files = discover_sequences(&args.results)?;
    let gt_names: BTreeSet<&String> = gt_files.keys().collect();
    let result_names: BTreeSet<&String> = result_files.keys().collect();
    if gt_names != result_names {
        let missing: Vec<&str> = gt_names
            .difference(&result_names)
            .map(|s| s.as_str())
            .collect();
        let extra: Vec<&str> = result_names
            .difference(&gt_names)
            .map(|s| s.as_str())
            .collect();
        bail!(
            "sequence sets differ: missing results for [{}], results without ground truth for [{}]",
            missing.join(", "),
            extra.join(", ")
        );
    }

    let category = args.common.category.as_str();
    let cfg = EvalConfig {
        min_iou: args.iou_gate,
        recall_points: args.recall_points,
    };
    let (sequences, report) = with_jobs(args.common.jobs, || -> anyhow::Result<_> {
        let sequences = gt_files
            .par_iter()
            .map(|(name, gt_path)| {
                Ok(EvalSequence {
                    name: name.clone(),
                    gt: read_gt_labels(gt_path, Some(category))?,
                    preds: read_tracking_results(&result_files[name], Some(category))?,
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let report = evaluate(&sequences, &cfg)?;
        Ok((sequences, report))
    })??;

    print!("{}", format_table(&report));

    let mut guard = OutputGuard::new();
    if let Some(csv_path) = &args.csv {
        if let Some(parent) = csv_path.parent() {
            guard.create_dir_all(parent)?;
        }
        guard.track_file(csv_path);
        let file = std::fs::File::create(csv_path)
            .with_context(|| format!("cannot write {}", csv_path.display()))?;
        write_curve_csv(&report.integral, file)?;
    }
    if let Some(out) = &args.out {
        if let Some(parent) = out.parent() {
            guard.create_dir_all(parent)?;
        }
        let c = report.best.counts;
        let manifest = EvalManifest {
            tool: TOOL,
            version: VERSION,
            command: "eval",
            gt: args.gt.clone(),
            results: args.results.clone(),
            category: category.to_string(),
            iou_gate: cfg.min_iou,
            recall_points: cfg.recall_points,
            sequences: sequences
                .iter()
                .map(|s| EvalSequenceStats {
                    name: s.name.clone(),
                    frames: s
                        .gt
                        .keys()
                        .chain(s.preds.keys())
                        .max()
                        .map_or(0, |&f| f + 1),
                    gt_objects: s.gt.values().flatten().filter(|g| g.is_matchable()).count(),
                    predictions: s.preds.values().map(Vec::len).sum(),
                })
                .collect(),
            thresholds_evaluated: report.sweep.len(),
            samota: report.integral.samota,
            amota: report.integral.amota,
            amotp: report.integral.amotp,
            mota: report.best_mota,
            motp: report.best_motp,
            best_threshold: report.best.threshold,
            tp: c.tp,
            fp: c.fp,
            fn_: c.misses,
            ids: c.ids,
            frag: c.frag,
            num_gt: c.num_gt,
            wall_seconds: wall.elapsed().as_secs_f64(),
        };
        guard.track_file(out);
        write_json(&manifest, out)?;
    }
    guard.commit();
    Ok(())
}
