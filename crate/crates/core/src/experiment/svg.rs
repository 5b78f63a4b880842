use std::fmt::Write;

use crate::qcbm::TrainingRecord;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 48.0;
const COLORS: [&str; 4] = ["#1f4e9c", "#c0392b", "#27864a", "#7a4ea3"];

pub struct Series<'a> {
    pub label: String,
    pub records: &'a [TrainingRecord],
    pub dashed: bool,
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

/// Best-so-far KL vs epoch: a shaded band spanning `band` (per-epoch min to
/// max) with `lines` drawn on top.
pub fn render_chart(band: &[&[TrainingRecord]], lines: &[Series<'_>]) -> String {
    let epochs = band.iter().map(|c| c.len()).chain(lines.iter().map(|s| s.records.len())).max().unwrap_or(1).max(2);
    let ymax = band
        .iter()
        .flat_map(|c| c.iter())
        .chain(lines.iter().flat_map(|s| s.records.iter()))
        .map(|r| r.best_kl)
        .fold(0.0f64, f64::max);
    let ystep = nice_step(if ymax > 0.0 { ymax } else { 1.0 });
    let ytop = (ymax / ystep).ceil().max(1.0) * ystep;
    let xmax = (epochs - 1) as f64;
    let px = |e: f64| LEFT + e / xmax * (W - LEFT - RIGHT);
    let py = |v: f64| TOP + (1.0 - v / ytop) * (H - TOP - BOTTOM);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();

    // Axes and ticks.
    let (x0, x1, y0, y1) = (px(0.0), px(xmax), py(0.0), py(ytop));
    writeln!(s, r#"<path d="M{x0:.2},{y1:.2} V{y0:.2} H{x1:.2}" fill="none" stroke="black"/>"#).unwrap();
    let mut v = 0.0;
    while v <= ytop + ystep * 1e-9 {
        let y = py(v);
        writeln!(s, r##"<line x1="{:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, x0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, y + 4.0, fmt_tick(v, ystep)).unwrap();
        v += ystep;
    }
    let xstep = nice_step(xmax).max(1.0);
    let mut e = 0.0;
    while e <= xmax + 1e-9 {
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, px(e), y0 + 16.0, e).unwrap();
        e += xstep;
    }
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">epoch</text>"#, (x0 + x1) / 2.0, H - 10.0).unwrap();
    writeln!(s, r#"<text transform="translate(16,{:.2}) rotate(-90)" text-anchor="middle">best KL divergence</text>"#, (y0 + y1) / 2.0).unwrap();

    // Band over the epochs every curve covers.
    let common = band.iter().map(|c| c.len()).min().unwrap_or(0);
    if common > 0 {
        let lo: Vec<f64> = (0..common).map(|i| band.iter().map(|c| c[i].best_kl).fold(f64::INFINITY, f64::min)).collect();
        let hi: Vec<f64> = (0..common).map(|i| band.iter().map(|c| c[i].best_kl).fold(f64::NEG_INFINITY, f64::max)).collect();
        let mut d = String::new();
        for (i, h) in hi.iter().enumerate() {
            write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, px(i as f64), py(*h)).unwrap();
        }
        for (i, l) in lo.iter().enumerate().rev() {
            write!(d, "L{:.2},{:.2} ", px(i as f64), py(*l)).unwrap();
        }
        writeln!(s, r##"<path d="{}Z" fill="#9bb7e0" fill-opacity="0.45" stroke="none"/>"##, d).unwrap();
    }

    for (k, line) in lines.iter().enumerate() {
        let pts: Vec<String> =
            line.records.iter().map(|r| format!("{:.2},{:.2}", px(r.epoch as f64), py(r.best_kl))).collect();
        let dash = if line.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
            pts.join(" "),
            COLORS[k % COLORS.len()]
        )
        .unwrap();
    }

    // Legend.
    let mut ly = TOP + 12.0;
    let lx = x1 - 200.0;
    if common > 0 {
        writeln!(s, r##"<rect x="{lx:.2}" y="{:.2}" width="24" height="10" fill="#9bb7e0" fill-opacity="0.45"/>"##, ly - 9.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{ly:.2}">baseline spread ({} runs)</text>"#, lx + 30.0, band.len()).unwrap();
        ly += 16.0;
    }
    for (k, line) in lines.iter().enumerate() {
        let dash = if line.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        writeln!(s, r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="2"{dash}/>"#, ly - 4.0, lx + 24.0, ly - 4.0, COLORS[k % COLORS.len()]).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#, lx + 30.0, escape(&line.label)).unwrap();
        ly += 16.0;
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64, step: f64) -> String {
    let digits = (-step.log10().floor()).max(0.0) as usize;
    format!("{v:.digits$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(vals: &[f64]) -> Vec<TrainingRecord> {
        vals.iter()
            .enumerate()
            .map(|(epoch, &v)| TrainingRecord { epoch, best_kl: v, pop_best: v, pop_median: v, params: vec![] })
            .collect()
    }

    #[test]
    fn chart_has_band_and_lines() {
        let a = curve(&[0.69, 0.5, 0.4]);
        let b = curve(&[0.69, 0.6, 0.3]);
        let svg = render_chart(&[&a, &b], &[Series { label: "x<y".into(), records: &b, dashed: false }]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("fill-opacity"));
        assert!(svg.contains("x&lt;y"));
        assert_eq!(nice_step(0.69), 0.2);
    }
}
