//! Minimal deterministic SVG emitters for the standard plots.
//!
//! Identical input produces identical bytes: coordinates are formatted with
//! fixed precision and nothing depends on hashing or time.

use std::path::Path;

use crate::inverse::{CoefficientMap, Histogram1d};
use crate::io::{atomic_write, IoError};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

pub enum SvgPlot<'a> {
    /// Birth–death scatter with the diagonal drawn; dims colored.
    PdScatter {
        pairs: &'a [(u8, f64, f64)],
        window: (f64, f64),
    },
    /// Coefficient heatmap, color scale symmetric about 0.
    CoeffHeatmap { map: &'a CoefficientMap },
    /// 2D projection scatter, optionally colored by a per-point value.
    PcaScatter {
        points: &'a [(f64, f64)],
        color_by: Option<&'a [f64]>,
    },
    /// Overlaid high (red) and low (blue) count histograms.
    Hist1d {
        high: &'a Histogram1d,
        low: &'a Histogram1d,
        x_label: &'a str,
    },
}

fn header(out: &mut String) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
}

fn axes(out: &mut String) {
    let x0 = MARGIN;
    let y0 = HEIGHT - MARGIN;
    let x1 = WIDTH - MARGIN;
    let y1 = MARGIN;
    out.push_str(&format!(
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n"
    ));
    out.push_str(&format!(
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n"
    ));
}

fn to_canvas(x: f64, y: f64, lo: (f64, f64), hi: (f64, f64)) -> (f64, f64) {
    let sx = (x - lo.0) / (hi.0 - lo.0);
    let sy = (y - lo.1) / (hi.1 - lo.1);
    (
        MARGIN + sx * (WIDTH - 2.0 * MARGIN),
        HEIGHT - MARGIN - sy * (HEIGHT - 2.0 * MARGIN),
    )
}

/// Diverging blue–white–red ramp for t in [-1, 1].
fn diverging_color(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let (r, g, b) = if t < 0.0 {
        let s = 1.0 + t; // 0 at -1, 1 at 0
        (
            (255.0 * s) as u8,
            (255.0 * s) as u8,
            255u8,
        )
    } else {
        let s = 1.0 - t;
        (
            255u8,
            (255.0 * s) as u8,
            (255.0 * s) as u8,
        )
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

pub fn render_svg(plot: &SvgPlot) -> String {
    let mut out = String::new();
    header(&mut out);
    match plot {
        SvgPlot::PdScatter { pairs, window } => {
            axes(&mut out);
            let lo = (window.0, window.0);
            let hi = (window.1, window.1);
            let (dx0, dy0) = to_canvas(window.0, window.0, lo, hi);
            let (dx1, dy1) = to_canvas(window.1, window.1, lo, hi);
            out.push_str(&format!(
                "<line x1=\"{dx0:.2}\" y1=\"{dy0:.2}\" x2=\"{dx1:.2}\" y2=\"{dy1:.2}\" stroke=\"gray\" stroke-dasharray=\"4 3\" stroke-width=\"1\"/>\n"
            ));
            let drawn = pairs
                .iter()
                .filter(|(_, b, d)| {
                    d.is_finite() && *b >= window.0 && *b <= window.1 && *d >= window.0 && *d <= window.1
                })
                .count();
            if drawn == 0 {
                out.push_str(&format!(
                    "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"16\" text-anchor=\"middle\">no pairs</text>\n",
                    WIDTH / 2.0,
                    HEIGHT / 2.0
                ));
            }
            for (dim, birth, death) in pairs.iter() {
                if !death.is_finite()
                    || *birth < window.0
                    || *birth > window.1
                    || *death < window.0
                    || *death > window.1
                {
                    continue;
                }
                let (cx, cy) = to_canvas(*birth, *death, lo, hi);
                let fill = if *dim == 0 { "#1f77b4" } else { "#d62728" };
                out.push_str(&format!(
                    "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"2.5\" fill=\"{fill}\" fill-opacity=\"0.7\"/>\n"
                ));
            }
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">birth</text>\n",
                WIDTH / 2.0,
                HEIGHT - 16.0
            ));
            out.push_str(&format!(
                "<text x=\"16\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">death</text>\n",
                HEIGHT / 2.0,
                HEIGHT / 2.0
            ));
        }
        SvgPlot::CoeffHeatmap { map } => {
            let bins = map.spec.bins as usize;
            let vmax = map
                .grid
                .iter()
                .fold(0.0_f64, |m, v| m.max(v.abs()))
                .max(f64::MIN_POSITIVE);
            let cell_w = (WIDTH - 2.0 * MARGIN) / bins as f64;
            let cell_h = (HEIGHT - 2.0 * MARGIN) / bins as f64;
            for row in 0..bins {
                for col in 0..bins {
                    let v = map.grid[row * bins + col];
                    if v == 0.0 {
                        continue;
                    }
                    // row = birth on x, col = death on y, origin bottom-left
                    let x = MARGIN + row as f64 * cell_w;
                    let y = HEIGHT - MARGIN - (col + 1) as f64 * cell_h;
                    out.push_str(&format!(
                        "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell_w:.3}\" height=\"{cell_h:.3}\" fill=\"{}\"/>\n",
                        diverging_color(v / vmax)
                    ));
                }
            }
            axes(&mut out);
        }
        SvgPlot::PcaScatter { points, color_by } => {
            axes(&mut out);
            if points.is_empty() {
                out.push_str(&format!(
                    "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"16\" text-anchor=\"middle\">no points</text>\n",
                    WIDTH / 2.0,
                    HEIGHT / 2.0
                ));
            } else {
                let (mut xlo, mut xhi, mut ylo, mut yhi) =
                    (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
                for (x, y) in points.iter() {
                    xlo = xlo.min(*x);
                    xhi = xhi.max(*x);
                    ylo = ylo.min(*y);
                    yhi = yhi.max(*y);
                }
                if xhi <= xlo {
                    xhi = xlo + 1.0;
                }
                if yhi <= ylo {
                    yhi = ylo + 1.0;
                }
                let (clo, chi) = match color_by {
                    Some(values) if !values.is_empty() => {
                        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        (lo, if hi > lo { hi } else { lo + 1.0 })
                    }
                    _ => (0.0, 1.0),
                };
                for (i, (x, y)) in points.iter().enumerate() {
                    let (cx, cy) = to_canvas(*x, *y, (xlo, ylo), (xhi, yhi));
                    let fill = match color_by {
                        Some(values) => {
                            let t = (values[i] - clo) / (chi - clo) * 2.0 - 1.0;
                            diverging_color(t)
                        }
                        None => "#333333".to_string(),
                    };
                    out.push_str(&format!(
                        "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"3\" fill=\"{fill}\" stroke=\"#555555\" stroke-width=\"0.4\"/>\n"
                    ));
                }
            }
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">pc1</text>\n",
                WIDTH / 2.0,
                HEIGHT - 16.0
            ));
        }
        SvgPlot::Hist1d { high, low, x_label } => {
            axes(&mut out);
            let nbins = high.counts.len().max(low.counts.len()).max(1);
            let cmax = high
                .counts
                .iter()
                .chain(low.counts.iter())
                .copied()
                .max()
                .unwrap_or(0)
                .max(1) as f64;
            let bar_w = (WIDTH - 2.0 * MARGIN) / nbins as f64;
            let draw = |counts: &[u64], fill: &str, out: &mut String| {
                for (i, &c) in counts.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let h = c as f64 / cmax * (HEIGHT - 2.0 * MARGIN);
                    let x = MARGIN + i as f64 * bar_w;
                    let y = HEIGHT - MARGIN - h;
                    out.push_str(&format!(
                        "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bar_w:.3}\" height=\"{h:.2}\" fill=\"{fill}\" fill-opacity=\"0.55\"/>\n"
                    ));
                }
            };
            draw(&high.counts, "#d62728", &mut out);
            draw(&low.counts, "#1f77b4", &mut out);
            if high.empty && low.empty {
                out.push_str(&format!(
                    "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"16\" text-anchor=\"middle\">no data</text>\n",
                    WIDTH / 2.0,
                    HEIGHT / 2.0
                ));
            }
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">{x_label}</text>\n",
                WIDTH / 2.0,
                HEIGHT - 16.0
            ));
            out.push_str("<text x=\"560\" y=\"40\" font-size=\"12\" fill=\"#d62728\">high</text>\n");
            out.push_str("<text x=\"560\" y=\"56\" font-size=\"12\" fill=\"#1f77b4\">low</text>\n");
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg(plot: &SvgPlot, path: &Path) -> Result<(), IoError> {
    atomic_write(path, render_svg(plot).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::GridSpec;

    #[test]
    fn empty_diagram_scatter_says_no_pairs_and_draws_the_diagonal() {
        let svg = render_svg(&SvgPlot::PdScatter {
            pairs: &[],
            window: (0.0, 8.0),
        });
        assert!(svg.contains("no pairs"));
        assert!(svg.contains("stroke-dasharray"));
        assert!(!svg.contains("<circle"));
    }

    #[test]
    fn one_pair_draws_one_marker() {
        let svg = render_svg(&SvgPlot::PdScatter {
            pairs: &[(1, 0.5, 0.7071)],
            window: (0.0, 8.0),
        });
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("no pairs"));
    }

    #[test]
    fn heatmap_color_scale_is_symmetric_about_zero() {
        let spec = GridSpec::new(2, 0.0, 8.0).unwrap();
        let map = CoefficientMap {
            spec,
            grid: vec![0.5, -0.5, 0.0, 0.25],
        };
        let svg = render_svg(&SvgPlot::CoeffHeatmap { map: &map });
        // +vmax is pure red, -vmax the mirrored pure blue
        assert!(svg.contains("#ff0000"));
        assert!(svg.contains("#0000ff"));
        // exact zeros are skipped
        assert_eq!(svg.matches("<rect x=").count(), 3);
    }

    #[test]
    fn rendering_is_deterministic() {
        let plot = SvgPlot::PcaScatter {
            points: &[(0.0, 1.0), (2.0, -1.0), (0.5, 0.25)],
            color_by: Some(&[1.0, 2.0, 3.0]),
        };
        assert_eq!(render_svg(&plot), render_svg(&plot));
    }

    #[test]
    fn hist_svg_handles_empty_regions() {
        let high = Histogram1d::from_values(&[], 0.05);
        let low = Histogram1d::from_values(&[1.5, 1.5, 1.6], 0.05);
        let svg = render_svg(&SvgPlot::Hist1d {
            high: &high,
            low: &low,
            x_label: "bond length",
        });
        assert!(svg.contains("bond length"));
        assert!(!svg.contains("no data"));
    }
}
