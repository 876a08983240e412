use std::io::Write;

use serde_json::{json, Value};
use tori_core::io::svg_heatmap;
use tori_core::resonance::{expand_levels, square_level, LevelSets, QuasiResonanceParams};
use tori_core::ModeIndex;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Output;

pub fn run(config: &ExperimentConfig, out: &Output) -> Result<Value, CliError> {
    let k = &config.kinematic;
    if k.lambda_list.is_empty() || config.study_tori.is_empty() {
        return Err(CliError::Config("kinematic map needs lambda_list and study_tori".into()));
    }
    let l1 = square_level(k.l1_half_width);
    let mut summary = Vec::new();
    for torus in &config.study_tori {
        let mut per_lambda: Vec<LevelSets> = Vec::new();
        for &lambda in &k.lambda_list {
            let params = QuasiResonanceParams::new(lambda, k.tau)?.with_norm(k.norm);
            let sets = expand_levels(&l1, &params, torus, k.max_level, k.search_box, config.budget())?;
            let name = format!("levels_w{}_L{lambda}", torus.omega_sq());
            out.csv(&format!("{name}.csv"), |w| sets.write_csv(w))?;
            out.json(&format!("{name}.json"), &sets.to_json())?;
            out.svg(&format!("{name}.svg"), || level_map(&sets, &format!("ω²={} Λ={lambda}", torus.omega_sq())))?;
            summary.push(json!({
                "omega_sq": torus.omega_sq(),
                "kind": torus.kind(),
                "lambda": lambda,
                "tau": k.tau,
                "norm": k.norm,
                // The computed level count N; a lower bound when not exhausted.
                "levels": sets.depth(),
                "exhausted": sets.exhausted,
                "truncated_levels": sets.depth().min(6),
                "level_sizes": sets.levels.iter().map(Vec::len).collect::<Vec<_>>(),
                "excited_modes": sets.excited_count(),
                "second_level_empty": sets.levels.get(1).map_or(true, Vec::is_empty),
                "union_is_rectangle": sets.union_is_rectangle(),
                "bounding_box": sets.bounding_box(),
            }));
            per_lambda.push(sets);
        }
        let identical = per_lambda.windows(2).all(|w| w[0] == w[1]);
        eprintln!(
            "ω² = {}: levels {:?}, identical across Λ: {identical}",
            torus.omega_sq(),
            per_lambda.iter().map(LevelSets::depth).collect::<Vec<_>>()
        );
    }
    out.csv("kinematic.csv", |w| {
        writeln!(w, "omega_sq,lambda,tau,levels,exhausted,truncated_levels,excited_modes,union_is_rectangle")?;
        for row in &summary {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                row["omega_sq"], row["lambda"], row["tau"], row["levels"], row["exhausted"],
                row["truncated_levels"], row["excited_modes"], row["union_is_rectangle"]
            )?;
        }
        Ok(())
    })?;
    out.report("kinematic.json", &summary)?;
    Ok(json!({ "runs": summary }))
}

/// Level number of each mode (0 if unexcited) on the smallest square
/// holding the union.
fn level_map(sets: &LevelSets, title: &str) -> String {
    let r = sets.union().iter().map(|k| k.inf_norm()).max().unwrap_or(0);
    let side = (2 * r + 1) as usize;
    let mut values = vec![0.0; side * side];
    for (j, level) in sets.levels.iter().enumerate() {
        for k in level {
            values[index(*k, r)] = (j + 1) as f64;
        }
    }
    svg_heatmap(title, side, &values, false)
}

fn index(k: ModeIndex, r: i64) -> usize {
    let side = 2 * r + 1;
    ((k.m + r) * side + k.l + r) as usize
}
