//! gnuplot templates. Scripts read the report CSV by relative path and render a PNG
//! next to it.

use std::fmt::Write;

use langevin_gauss::experiments::{Cell, ExperimentReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Log-log observed values against the noise level with the `K sqrt(eps)` line.
    LogLog,
    /// Log-linear decay in time with the fitted slope annotated.
    Decay,
}

/// Default plot for an experiment, if it has one.
pub fn kind_for(experiment: &str) -> Option<PlotKind> {
    match experiment {
        "scaling_law" | "p_wasserstein" | "concentration" | "linearization_gap" => Some(PlotKind::LogLog),
        "covariance_decay" | "coupling" => Some(PlotKind::Decay),
        _ => None,
    }
}

/// Builds the script. `csv` is the CSV file name relative to the script.
///
/// Panics on an empty report; callers only plot reports that produced cells.
pub fn emit_plot_script(report: &ExperimentReport, kind: PlotKind, csv: &str) -> String {
    assert!(!report.cells.is_empty(), "cannot plot an empty report");
    let axis = match kind {
        PlotKind::LogLog => "epsilon",
        PlotKind::Decay => "t",
    };
    let gi = report.grid_columns.iter().position(|c| c == axis).unwrap_or(0);
    // the longest series along the axis; ties go to the earliest quantity
    let on_axis = |c: &&Cell| c.grid.get(gi).is_some_and(|x| x.is_finite());
    let mut headline = report.cells[0].quantity.clone();
    let mut best = 0;
    for c in report.cells.iter().filter(on_axis) {
        let n = report.find(&c.quantity).filter(on_axis).count();
        if n > best {
            best = n;
            headline = c.quantity.clone();
        }
    }
    let g = report.grid_columns.len();
    let xcol = 3 + gi;
    let ycol = 3 + g;
    let bcol = 4 + g;
    let png = csv.trim_end_matches(".csv").to_string() + ".png";

    let mut s = String::new();
    let _ = writeln!(s, "# {} on {}", report.experiment, report.problem);
    let _ = writeln!(s, "set terminal pngcairo size 800,600");
    let _ = writeln!(s, "set output '{png}'");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key top left");
    let _ = writeln!(s, "set grid");
    let sel = |col: usize| format!("(strcol(2) eq '{headline}' ? column({col}) : 1/0)");
    match kind {
        PlotKind::LogLog => {
            let _ = writeln!(s, "set logscale xy");
            let _ = writeln!(s, "set xlabel 'epsilon'");
            let _ = writeln!(s, "set ylabel '{headline}'");
            let curve = match &report.constants {
                Some(c) => {
                    let _ = writeln!(s, "K = {:e}", c.k);
                    ", K*sqrt(x) with lines dashtype 2 title 'K sqrt(eps)'".to_string()
                }
                None => String::new(),
            };
            let _ = writeln!(
                s,
                "plot '{csv}' skip 1 using {}:{} with linespoints title '{headline}', \\\n     '{csv}' skip 1 using {}:{} with points title 'bound'{curve}",
                sel(xcol),
                sel(ycol),
                sel(xcol),
                sel(bcol)
            );
        }
        PlotKind::Decay => {
            let _ = writeln!(s, "set logscale y");
            let _ = writeln!(s, "set xlabel 't'");
            let _ = writeln!(s, "set ylabel '{headline}'");
            let slope = report
                .cells
                .iter()
                .find(|c| c.quantity == "slope" || c.quantity == "log_decay_slope")
                .map(|c| c.observed);
            if let Some(k) = slope {
                let _ = writeln!(s, "set label 1 sprintf('fitted log slope = %.4f', {k:e}) at graph 0.55, graph 0.9");
            }
            let _ = writeln!(
                s,
                "plot '{csv}' skip 1 using {}:{} with linespoints title '{headline}', \\\n     '{csv}' skip 1 using {}:{} with lines dashtype 2 title 'reference'",
                sel(xcol),
                sel(ycol),
                sel(xcol),
                sel(bcol)
            );
        }
    }
    s
}
