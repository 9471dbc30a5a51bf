//! SVG line charts of artifact CSVs.
//!
//! The schema is read from the header row. Each schema has a fixed x column
//! and one line per y column; empty cells are skipped. Cost tables have no
//! natural x axis and are rejected.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::commands::CliError;

struct Layout {
    title: &'static str,
    x: &'static str,
    ys: &'static [&'static str],
}

fn layout(header: &[String]) -> Option<Layout> {
    let cols: Vec<&str> = header.iter().map(String::as_str).collect();
    Some(match cols.as_slice() {
        ["iteration", "f_le_measured", "f_le_exact", "f_exact"] => Layout {
            title: "fidelity trace",
            x: "iteration",
            ys: &["f_le_measured", "f_le_exact", "f_exact"],
        },
        ["n", "mean_nupds", "stderr_nupds", "trials", "p_succ"] => Layout {
            title: "updates against register size",
            x: "n",
            ys: &["mean_nupds"],
        },
        ["topology", "coupling", "n", "t_gate", "n_ts", "mean_nupds", "stderr_nupds", "trials", "p_succ"] => Layout {
            title: "updates against register size",
            x: "n",
            ys: &["mean_nupds"],
        },
        ["n", "f_targ", "anum_at_50", "grid_points"] => Layout {
            title: "accuracy threshold against register size",
            x: "n",
            ys: &["anum_at_50"],
        },
        ["n", "mean_f", "mean_fle", "samples"] => Layout {
            title: "perturbed target fidelity",
            x: "n",
            ys: &["mean_f", "mean_fle"],
        },
        _ => return None,
    })
}

type Series = Vec<(String, Vec<(f64, f64)>)>;

fn read_series(path: &Path) -> Result<(Layout, Series), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let lay = layout(&header)
        .ok_or_else(|| CliError::Usage(format!("{}: no plot layout for columns {header:?}", path.display())))?;
    let col = |name: &str| header.iter().position(|h| h == name).expect("layout columns exist");
    let xi = col(lay.x);
    let mut series: Series = lay.ys.iter().map(|y| (y.to_string(), Vec::new())).collect();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let Some(x) = record.get(xi).and_then(|s| s.parse::<f64>().ok()) else {
            continue;
        };
        for (name, points) in series.iter_mut() {
            if let Some(y) = record.get(col(name)).and_then(|s| s.parse::<f64>().ok()) {
                points.push((x, y));
            }
        }
    }
    Ok((lay, series))
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

fn draw(out: &Path, lay: &Layout, series: &Series) -> Result<(), Box<dyn std::error::Error>> {
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (x0, x1) = padded(x0, x1);
    let (y0, y1) = padded(y0, y1);

    let root = SVGBackend::new(out, (800, 500)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(lay.title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, y0..y1)?;
    chart.configure_mesh().x_desc(lay.x).draw()?;
    for (i, (name, points)) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(points.iter().copied(), color.stroke_width(2)))?
            .label(name.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        chart.draw_series(points.iter().map(|&p| Circle::new(p, 3, color.filled())))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()?;
    root.present()?;
    Ok(())
}

/// Plot `input` to `<out_dir>/<stem>.svg` (next to the input when no
/// directory is given).
pub fn plot_csv(input: &Path, out_dir: Option<&Path>) -> Result<PathBuf, CliError> {
    let (lay, series) = read_series(input)?;
    let dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => input.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    std::fs::create_dir_all(if dir.as_os_str().is_empty() { Path::new(".") } else { &dir })?;
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    let out = dir.join(format!("{stem}.svg"));
    let tmp = dir.join(format!(".{stem}.svg.tmp"));
    draw(&tmp, &lay, &series).map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    std::fs::rename(&tmp, &out)?;
    Ok(out)
}
