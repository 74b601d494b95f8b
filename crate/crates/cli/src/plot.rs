//! Static SVG plots: curves over box sides and STFT magnitude heatmaps.

use gabor_lab::signal::RealGrid;
use plotters::prelude::*;

const PALETTE: [RGBColor; 4] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn draw_error<E: std::fmt::Debug>(e: E) -> String {
    format!("plot rendering failed: {e:?}")
}

/// Line plot of several series against a shared x axis; nonpositive values
/// are dropped on a log y axis.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    log_y: bool,
) -> Result<String, String> {
    let points = || {
        series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|&(_, y)| !log_y || y > 0.0)
    };
    let (x_lo, x_hi) = points().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| {
        (lo.min(x), hi.max(x))
    });
    let (y_lo, y_hi) = points().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, y)| {
        (lo.min(y), hi.max(y))
    });
    if !x_lo.is_finite() || !y_lo.is_finite() {
        return Err(format!("nothing to plot for {title}"));
    }
    let pad = |lo: f64, hi: f64| {
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0))
        }
    };
    let (x_lo, x_hi) = pad(x_lo, x_hi);
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (720, 480)).into_drawing_area();
        root.fill(&WHITE).map_err(draw_error)?;
        let mut builder = ChartBuilder::on(&root);
        builder
            .caption(title, ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(70);
        macro_rules! draw {
            ($chart:expr) => {{
                let mut chart = $chart;
                chart
                    .configure_mesh()
                    .x_desc(x_label)
                    .y_desc(y_label)
                    .draw()
                    .map_err(draw_error)?;
                for (k, s) in series.iter().enumerate() {
                    let color = PALETTE[k % PALETTE.len()];
                    let pts: Vec<(f64, f64)> = s
                        .points
                        .iter()
                        .copied()
                        .filter(|&(_, y)| !log_y || y > 0.0)
                        .collect();
                    chart
                        .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
                        .map_err(draw_error)?
                        .label(s.label)
                        .legend(move |(x, y)| {
                            PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2))
                        });
                    chart
                        .draw_series(pts.into_iter().map(|p| Circle::new(p, 3, color.filled())))
                        .map_err(draw_error)?;
                }
                chart
                    .configure_series_labels()
                    .background_style(WHITE.mix(0.8))
                    .border_style(BLACK)
                    .draw()
                    .map_err(draw_error)?;
            }};
        }
        if log_y {
            let (lo, hi) = if y_hi > y_lo {
                (y_lo, y_hi)
            } else {
                (y_lo / 10.0, y_hi * 10.0)
            };
            draw!(builder
                .build_cartesian_2d(x_lo..x_hi, (lo..hi).log_scale())
                .map_err(draw_error)?);
        } else {
            let (lo, hi) = pad(y_lo, y_hi);
            draw!(builder
                .build_cartesian_2d(x_lo..x_hi, lo..hi)
                .map_err(draw_error)?);
        }
        root.present().map_err(draw_error)?;
    }
    Ok(svg)
}

/// Heatmap of a nonnegative grid, time on x and frequency on y; `log` maps
/// values through `log10` over six decades below the maximum.
pub fn heatmap(title: &str, grid: &RealGrid, log: bool) -> Result<String, String> {
    let l = grid.l;
    let max = grid.max();
    let level = |v: f64| -> f64 {
        if max <= 0.0 {
            return 0.0;
        }
        if log {
            let decades = 6.0;
            ((v / max).max(10f64.powf(-decades)).log10() + decades) / decades
        } else {
            v / max
        }
    };
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (640, 640)).into_drawing_area();
        root.fill(&WHITE).map_err(draw_error)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(
                format!("{title} ({})", if log { "log scale" } else { "linear" }),
                ("sans-serif", 20),
            )
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(50)
            .build_cartesian_2d(0..l, 0..l)
            .map_err(draw_error)?;
        chart
            .configure_mesh()
            .disable_mesh()
            .x_desc("x")
            .y_desc("omega")
            .draw()
            .map_err(draw_error)?;
        chart
            .draw_series(
                (0..l)
                    .flat_map(|x| (0..l).map(move |w| (x, w)))
                    .map(|(x, w)| {
                        let t = level(grid.get(x, w));
                        let shade = (255.0 * (1.0 - t)).round() as u8;
                        Rectangle::new(
                            [(x, w), (x + 1, w + 1)],
                            RGBColor(shade, shade, 255).filled(),
                        )
                    }),
            )
            .map_err(draw_error)?;
        root.present().map_err(draw_error)?;
    }
    Ok(svg)
}
