//! SVG figures: sweep curves and the MDS scatter over an SVM decision raster.

use cgnet::analysis::{SvmModel, SweepResult};
use cgnet::signals::Regime;
use plotters::coord::Shift;
use plotters::prelude::*;

type PlotError = Box<dyn std::error::Error>;
type Area<'a> = DrawingArea<SVGBackend<'a>, Shift>;

const PERIODIC: RGBColor = RGBColor(31, 119, 180);
const CHAOTIC: RGBColor = RGBColor(214, 39, 40);
const PALETTE: [RGBColor; 4] = [
    PERIODIC,
    CHAOTIC,
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
];

fn render(
    size: (u32, u32),
    draw: impl FnOnce(&Area) -> Result<(), PlotError>,
) -> Result<String, PlotError> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, size).into_drawing_area();
        root.fill(&WHITE)?;
        draw(&root)?;
        root.present()?;
    }
    Ok(svg)
}

fn finite_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

/// Entropy curves of a sweep, one line per series, with ±1 stdev bars.
pub fn sweep_curves(sweep: &SweepResult, x_label: &str) -> Result<String, PlotError> {
    render((720, 480), |root| {
        let xr = finite_range(sweep.x_values.iter().copied());
        let yr = finite_range(
            sweep
                .series
                .iter()
                .flat_map(|s| s.entropy.iter().copied())
                .chain([0.0, 1.0]),
        );
        let mut chart = ChartBuilder::on(root)
            .margin(20)
            .x_label_area_size(40)
            .y_label_area_size(50)
            .build_cartesian_2d(xr.0..xr.1, yr.0..yr.1)?;
        chart
            .configure_mesh()
            .x_desc(x_label)
            .y_desc("normalized persistent entropy")
            .draw()?;
        for (k, s) in sweep.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let points: Vec<(f64, f64)> = sweep
                .x_values
                .iter()
                .zip(&s.entropy)
                .filter(|(_, e)| e.is_finite())
                .map(|(&x, &e)| (x, e))
                .collect();
            chart
                .draw_series(LineSeries::new(points.clone(), color.stroke_width(2)))?
                .label(s.label.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
            let bars = sweep
                .x_values
                .iter()
                .zip(&s.entropy)
                .zip(&s.entropy_std)
                .filter(|((_, e), sd)| e.is_finite() && **sd > 0.0)
                .map(|((&x, &e), &sd)| PathElement::new(vec![(x, e - sd), (x, e + sd)], color));
            chart.draw_series(bars)?;
            chart.draw_series(
                points
                    .into_iter()
                    .map(|p| Circle::new(p, 3, color.filled())),
            )?;
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()?;
        Ok(())
    })
}

/// MDS scatter coloured by regime, over the sign of the SVM decision
/// function sampled on a grid when a model is given.
pub fn mds_scatter(
    points: &[(f64, f64)],
    labels: Option<&[Regime]>,
    model: Option<&SvmModel>,
) -> Result<String, PlotError> {
    render((600, 600), |root| {
        let xr = finite_range(points.iter().map(|p| p.0));
        let yr = finite_range(points.iter().map(|p| p.1));
        let mut chart = ChartBuilder::on(root)
            .margin(20)
            .x_label_area_size(40)
            .y_label_area_size(50)
            .build_cartesian_2d(xr.0..xr.1, yr.0..yr.1)?;
        chart
            .configure_mesh()
            .x_desc("MDS 1")
            .y_desc("MDS 2")
            .draw()?;
        if let Some(model) = model {
            let cells = 60;
            let (dx, dy) = ((xr.1 - xr.0) / cells as f64, (yr.1 - yr.0) / cells as f64);
            let tiles = (0..cells)
                .flat_map(|i| (0..cells).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let (x0, y0) = (xr.0 + i as f64 * dx, yr.0 + j as f64 * dy);
                    let side = if model.predict((x0 + dx / 2.0, y0 + dy / 2.0)) {
                        CHAOTIC
                    } else {
                        PERIODIC
                    };
                    Rectangle::new([(x0, y0), (x0 + dx, y0 + dy)], side.mix(0.15).filled())
                });
            chart.draw_series(tiles)?;
        }
        match labels {
            None => {
                chart.draw_series(points.iter().map(|&p| Circle::new(p, 5, BLACK.filled())))?;
            }
            Some(labels) => {
                for (regime, color) in [(Regime::Periodic, PERIODIC), (Regime::Chaotic, CHAOTIC)] {
                    let pts = points
                        .iter()
                        .zip(labels)
                        .filter(|(_, &l)| l == regime)
                        .map(|(&p, _)| Circle::new(p, 5, color.filled()));
                    chart
                        .draw_series(pts)?
                        .label(regime.as_str())
                        .legend(move |(x, y)| Circle::new((x + 8, y), 5, color.filled()));
                }
                chart
                    .configure_series_labels()
                    .background_style(WHITE.mix(0.8))
                    .border_style(BLACK)
                    .draw()?;
            }
        }
        Ok(())
    })
}
